use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use protoalign::survival::MedianTies;

use crate::config::{ConfigLayer, SolveMode, CONFIG_ENV};

#[derive(Debug, Parser)]
#[command(name = "protoalign", version, about = "Curriculum-mass optimal transport, prototype alignment and survival statistics")]
pub struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,

    /// Seed for every randomly initialized input.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a transport problem for a cost matrix.
    Solve(SolveArgs),
    /// Tabulate the curriculum mass schedule.
    Schedule(ScheduleArgs),
    /// Run the token-to-prototype alignment pipeline for one sample.
    Align(AlignArgs),
    /// Kaplan-Meier curves and log-rank test for a median risk split.
    Km(KmArgs),
    /// Concordance index of risks against survival times.
    Cindex(CindexArgs),
    /// Cox, contrastive and combined losses.
    Loss(LossArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverFlags {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub iota: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub log_domain: Option<bool>,
    #[arg(long)]
    pub exact_sink: Option<bool>,
}

impl SolverFlags {
    fn fill(&self, l: &mut ConfigLayer) {
        l.epsilon = self.epsilon;
        l.gamma = self.gamma;
        l.iota = self.iota;
        l.max_iters = self.max_iters;
        l.tol = self.tol;
        l.log_domain = self.log_domain;
        l.exact_sink = self.exact_sink;
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Headerless N×K cost matrix.
    #[arg(long)]
    pub cost: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Option<SolveMode>,
    /// Transported mass for curriculum mode.
    #[arg(long)]
    pub rho: Option<f64>,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long)]
    pub rho_base: Option<f64>,
    #[arg(long)]
    pub rho_upper: Option<f64>,
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Last step to tabulate (defaults to the horizon).
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// Headerless N_p×D_p pathology tokens.
    #[arg(long)]
    pub tokens_p: PathBuf,
    /// Headerless N_g×D_g genomics tokens.
    #[arg(long)]
    pub tokens_g: PathBuf,
    /// Headerless K×D′ prototypes; seeded random when absent.
    #[arg(long)]
    pub prototypes: Option<PathBuf>,
    /// D_p×D′ pathology projection; seeded random when absent.
    #[arg(long)]
    pub proj_p: Option<PathBuf>,
    /// D_g×D′ genomics projection; seeded random when absent.
    #[arg(long)]
    pub proj_g: Option<PathBuf>,
    /// JSON sidecar {modality, n_tokens, padded_rows} for the pathology tokens.
    #[arg(long)]
    pub meta_p: Option<PathBuf>,
    /// JSON sidecar for the genomics tokens.
    #[arg(long)]
    pub meta_g: Option<PathBuf>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub d_prime: Option<usize>,
    #[arg(long)]
    pub rescale_plan: Option<bool>,
    #[arg(long)]
    pub lambda_wsi: Option<f64>,
    #[arg(long)]
    pub lambda_gen: Option<f64>,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
pub enum Split {
    #[default]
    Median,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Ties {
    Low,
    High,
}

impl From<Ties> for MedianTies {
    fn from(t: Ties) -> Self {
        match t {
            Ties::Low => MedianTies::Low,
            Ties::High => MedianTies::High,
        }
    }
}

#[derive(Debug, Args)]
pub struct KmArgs {
    /// Survival CSV with header time,event,risk.
    #[arg(long)]
    pub survival: PathBuf,
    #[arg(long, value_enum, default_value_t = Split::Median)]
    pub split: Split,
    /// Group receiving risks equal to the median.
    #[arg(long, value_enum)]
    pub ties: Option<Ties>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CindexArgs {
    #[arg(long)]
    pub survival: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    /// Survival CSV; its risks give the Cox loss.
    #[arg(long)]
    pub survival: PathBuf,
    /// Refined pathology prototypes, K×D′.
    #[arg(long)]
    pub h_p: PathBuf,
    /// Refined genomics prototypes, K×D′.
    #[arg(long)]
    pub h_g: PathBuf,
    /// Two-row CSV: pathology anchor, then genomics anchor.
    #[arg(long)]
    pub anchors: PathBuf,
    /// D′×D′ anchor projection; identity when absent.
    #[arg(long)]
    pub phi: Option<PathBuf>,
    /// Instance loss value, e.g. from `align`.
    #[arg(long)]
    pub instance: f64,
    #[arg(long)]
    pub tau_r: Option<f64>,
    #[arg(long)]
    pub lambda_contrast: Option<f64>,
    #[arg(long)]
    pub lambda_instance: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

impl Command {
    /// Flag layer of the config.
    pub fn layer(&self) -> ConfigLayer {
        let mut l = ConfigLayer::default();
        match self {
            Command::Solve(a) => {
                a.solver.fill(&mut l);
                l.mode = a.mode;
                l.rho = a.rho;
            }
            Command::Schedule(a) => {
                l.rho_base = a.rho_base;
                l.rho_upper = a.rho_upper;
                l.horizon = a.horizon;
                l.steps = a.steps.map(Some);
            }
            Command::Align(a) => {
                a.solver.fill(&mut l);
                l.rho = a.rho;
                l.beta = a.beta;
                l.tau = a.tau;
                l.k = a.k;
                l.d_prime = a.d_prime;
                l.rescale_plan = a.rescale_plan;
                l.lambda_wsi = a.lambda_wsi;
                l.lambda_gen = a.lambda_gen;
            }
            Command::Km(a) => l.median_ties = a.ties.map(Into::into),
            Command::Cindex(_) => {}
            Command::Loss(a) => {
                l.tau_r = a.tau_r;
                l.lambda_contrast = a.lambda_contrast;
                l.lambda_instance = a.lambda_instance;
            }
        }
        l
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Schedule(_) => "schedule",
            Command::Align(_) => "align",
            Command::Km(_) => "km",
            Command::Cindex(_) => "cindex",
            Command::Loss(_) => "loss",
        }
    }
}
