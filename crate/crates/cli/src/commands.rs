use std::path::{Path, PathBuf};

use ndarray::{concatenate, Array1, Array2, Axis};
use protoalign::apart::{anchor_scores, contrastive_loss, mean_token, AnchorPair, LossReport};
use protoalign::linalg::softmax_rows;
use protoalign::ot::{
    rho_schedule, solve_balanced, solve_uot_curriculum, solve_uot_kl, CostMatrix, Marginals, TransportPlan,
};
use protoalign::survival::{concordance, cox_loss, kaplan_meier, logrank_test, risk_stratify_with};
use protoalign::together::{align as align_sample, seeded_projection, Modality, PrototypeBank, TokenMatrix};
use serde::{Deserialize, Serialize};

use crate::cli::{AlignArgs, CindexArgs, KmArgs, LossArgs, ScheduleArgs, SolveArgs};
use crate::config::{RunConfig, SolveMode};
use crate::csvio::{
    format_km, format_schedule, parse_matrix, parse_survival, write_atomic, write_column, write_json, write_matrix,
};
use crate::error::{CliError, InModule, Result};
use crate::report::{Recorder, Status};

fn out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn read_matrix_input(rec: &mut Recorder, path: &Path) -> Result<Array2<f64>> {
    let bytes = rec.input(path)?;
    parse_matrix(path, &bytes)
}

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn plan_diagnostics(rec: &mut Recorder, plan: &TransportPlan<f64>) {
    rec.diag("converged", plan.converged);
    rec.diag("iterations", plan.iterations);
    rec.diag("residual", plan.residual);
    rec.diag("total_mass", plan.total_mass());
    rec.diag("min_entry", plan.min_entry());
    if !plan.converged {
        rec.not_converged();
    }
}

pub fn solve(a: &SolveArgs, cfg: &RunConfig) -> Result<Status> {
    let mut rec = Recorder::new("solve", cfg);
    let cost = CostMatrix::new(read_matrix_input(&mut rec, &a.cost)?).in_module("ot")?;
    let (n, k) = (cost.nrows(), cost.ncols());
    out_dir(&a.out)?;
    let solver = cfg.solver();
    let uniform = Marginals::uniform(n, k).in_module("ot")?;
    let row_target = 1.0 / n as f64;

    let (plan, sink) = match cfg.mode {
        SolveMode::Balanced => (solve_balanced(&cost, &uniform, &solver).in_module("ot")?, None),
        SolveMode::Uot => (solve_uot_kl(&cost, &uniform, &solver).in_module("ot")?, None),
        SolveMode::Curriculum => {
            let c = solve_uot_curriculum(&cost, cfg.rho, &solver).in_module("ot")?;
            (c.plan, Some(c.sink_mass))
        }
    };

    write_matrix(&rec.output(a.out.join("plan.csv")), &plan.values)?;
    plan_diagnostics(&mut rec, &plan);
    let mut rows = plan.row_sums();
    if let Some(sink) = &sink {
        write_column(&rec.output(a.out.join("sink.csv")), sink)?;
        let total: f64 = sink.iter().sum();
        rec.diag("sink_total", total);
        rows.iter_mut().zip(sink).for_each(|(r, s)| *r += s);
        if plan.converged {
            rec.check("sink_mass", (total - (1.0 - cfg.rho)).abs(), 10.0 * cfg.tol);
            rec.check("plan_mass", (plan.total_mass() - cfg.rho).abs(), 10.0 * cfg.tol);
        }
    }
    if plan.converged {
        rec.check("row_marginal", max_abs(rows.iter().map(|r| r - row_target)), cfg.tol);
    }
    rec.finish(a.out.join("report.json"))
}

pub fn schedule(a: &ScheduleArgs, cfg: &RunConfig) -> Result<Status> {
    let mut rec = Recorder::new("schedule", cfg);
    let sched = cfg.schedule()?;
    let steps = cfg.steps.unwrap_or(cfg.horizon);
    out_dir(&a.out)?;
    let rows: Vec<(u64, f64)> = (0..=steps).map(|t| (t, rho_schedule(t, &sched))).collect();
    write_atomic(&rec.output(a.out.join("schedule.csv")), &format_schedule(&rows))?;
    let drops = rows.windows(2).map(|w| (w[0].1 - w[1].1).max(0.0));
    rec.check("monotone", max_abs(drops), 0.0);
    rec.check("final_is_upper", (rows[rows.len() - 1].1 - cfg.rho_upper).abs(), 0.0);
    rec.diag("rho_0", rows[0].1);
    rec.finish(a.out.join("report.json"))
}

/// Token sidecar metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenMeta {
    pub modality: Modality,
    pub n_tokens: usize,
    #[serde(default)]
    pub padded_rows: Vec<usize>,
}

fn load_tokens(rec: &mut Recorder, path: &Path, meta: Option<&PathBuf>, modality: Modality) -> Result<TokenMatrix<f64>> {
    let values = read_matrix_input(rec, path)?;
    let n = values.nrows();
    let mut padding = vec![false; n];
    if let Some(meta_path) = meta {
        let bytes = rec.input(meta_path)?;
        let meta: TokenMeta = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::format(meta_path, format!("invalid token metadata: {e}")))?;
        if meta.modality != modality {
            return Err(CliError::format(
                meta_path,
                format!("metadata is for {} tokens, expected {modality}", meta.modality),
            ));
        }
        if meta.n_tokens != n {
            return Err(CliError::format(
                meta_path,
                format!("n_tokens is {}, but {} has {n} rows", meta.n_tokens, path.display()),
            ));
        }
        for &i in &meta.padded_rows {
            if i >= n {
                return Err(CliError::format(meta_path, format!("padded row {i} out of range {n}")));
            }
            padding[i] = true;
        }
    }
    TokenMatrix::with_padding(values, modality, padding).in_module("together")
}

#[derive(Debug, Serialize)]
struct AlignLosses {
    ce_p: f64,
    ce_g: f64,
    instance_loss: f64,
}

pub fn align(a: &AlignArgs, cfg: &RunConfig) -> Result<Status> {
    let mut rec = Recorder::new("align", cfg);
    let xp = load_tokens(&mut rec, &a.tokens_p, a.meta_p.as_ref(), Modality::Pathology)?;
    let xg = load_tokens(&mut rec, &a.tokens_g, a.meta_g.as_ref(), Modality::Genomics)?;

    let protos = match &a.prototypes {
        Some(p) => read_matrix_input(&mut rec, p)?,
        None => seeded_projection(cfg.k, cfg.d_prime, cfg.seed.wrapping_add(2)),
    };
    let d_prime = protos.ncols();
    let bank = PrototypeBank::new(protos, cfg.tau).in_module("together")?;
    let wp = match &a.proj_p {
        Some(p) => read_matrix_input(&mut rec, p)?,
        None => seeded_projection(xp.ncols(), d_prime, cfg.seed),
    };
    let wg = match &a.proj_g {
        Some(p) => read_matrix_input(&mut rec, p)?,
        None => seeded_projection(xg.ncols(), d_prime, cfg.seed.wrapping_add(1)),
    };
    out_dir(&a.out)?;

    let params = cfg.align_params();
    let out = align_sample(&xp, &xg, wp.view(), wg.view(), &bank, &params, &cfg.solver()).in_module("together")?;

    let joint = &out.transport.plan.values;
    write_matrix(&rec.output(a.out.join("w_final_p.csv")), &out.pathology.weights.values)?;
    write_matrix(&rec.output(a.out.join("w_final_g.csv")), &out.genomics.weights.values)?;
    write_matrix(&rec.output(a.out.join("h_p.csv")), &out.pathology.prototypes)?;
    write_matrix(&rec.output(a.out.join("h_g.csv")), &out.genomics.prototypes)?;
    write_matrix(&rec.output(a.out.join("plan.csv")), joint)?;
    write_column(&rec.output(a.out.join("sink.csv")), &out.transport.sink_mass)?;
    write_json(
        &rec.output(a.out.join("losses.json")),
        &AlignLosses {
            ce_p: out.pathology.soft_ce,
            ce_g: out.genomics.soft_ce,
            instance_loss: out.instance_loss,
        },
    )?;

    let plan = &out.transport.plan;
    plan_diagnostics(&mut rec, plan);
    rec.diag("n_tot", out.stacked.n_tot());
    rec.diag("n_p", out.stacked.n_p);
    rec.diag("sink_total", out.transport.total_sink());

    // invariants re-checked on the produced arrays
    let mut softmax_err: f64 = 0.0;
    let mut fusion_err: f64 = 0.0;
    let mut negative: f64 = 0.0;
    for (m, tokens) in [(&out.pathology, &xp), (&out.genomics, &xg)] {
        let soft = softmax_rows(m.logits.view());
        for (i, pad) in tokens.padding().iter().enumerate() {
            if *pad {
                continue;
            }
            softmax_err = softmax_err.max((soft.row(i).sum() - 1.0).abs());
            let mass = m.plan.row(i).sum();
            let expected = (1.0 - cfg.beta) + cfg.beta * mass;
            fusion_err = fusion_err.max((m.weights.values.row(i).sum() - expected).abs());
        }
        negative = negative.max(-m.weights.values.iter().fold(0.0f64, |a, &x| a.min(x)));
    }
    let cost_err = max_abs(
        out.stacked
            .cost
            .values()
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|c| (-c).exp()).sum::<f64>() - 1.0),
    );
    rec.check("softmax_rows", softmax_err, 1e-12);
    rec.check("cost_rows", cost_err, 1e-12);
    rec.check("fusion_row_sums", fusion_err, 1e-12);
    rec.check("weights_nonnegative", negative, 0.0);
    if plan.converged {
        let n_tot = out.stacked.n_tot() as f64;
        let rows = plan.row_sums();
        let row_err = max_abs(rows.iter().zip(&out.transport.sink_mass).map(|(r, s)| r + s - 1.0 / n_tot));
        rec.check("row_marginal", row_err, cfg.tol);
        rec.check("sink_mass", (out.transport.total_sink() - (1.0 - cfg.rho)).abs(), 10.0 * cfg.tol);
        rec.check("plan_mass", (plan.total_mass() - cfg.rho).abs(), 10.0 * cfg.tol);
        let stacked = concatenate(Axis(0), &[out.pathology.plan.view(), out.genomics.plan.view()]).expect("same K");
        let kept: f64 = stacked.sum();
        let scale = if cfg.rescale_plan { n_tot } else { 1.0 };
        rec.check("split_mass", (kept - joint.sum() * scale).abs(), 1e-9);
    }
    rec.finish(a.out.join("report.json"))
}

#[derive(Debug, Serialize)]
struct LogRankOut {
    chi_square: f64,
    p_value: f64,
    n_high: usize,
    n_low: usize,
    median: f64,
}

pub fn km(a: &KmArgs, cfg: &RunConfig) -> Result<Status> {
    let mut rec = Recorder::new("km", cfg);
    let bytes = rec.input(&a.survival)?;
    let table = parse_survival(&a.survival, &bytes)?;
    let strata = risk_stratify_with(table.risk(), cfg.median_ties).in_module("survival")?;
    let high = table.cohort(&strata.high).in_module("survival")?;
    let low = table.cohort(&strata.low).in_module("survival")?;
    let test = logrank_test(&high, &low).in_module("survival")?;
    let km_high = kaplan_meier(&high.time, &high.event).in_module("survival")?;
    let km_low = kaplan_meier(&low.time, &low.event).in_module("survival")?;
    out_dir(&a.out)?;
    write_atomic(&rec.output(a.out.join("km_high.csv")), &format_km(&km_high))?;
    write_atomic(&rec.output(a.out.join("km_low.csv")), &format_km(&km_low))?;
    write_json(
        &rec.output(a.out.join("logrank.json")),
        &LogRankOut {
            chi_square: test.chi_square,
            p_value: test.p_value,
            n_high: strata.high.len(),
            n_low: strata.low.len(),
            median: strata.median,
        },
    )?;
    rec.diag("chi_square", test.chi_square);
    rec.diag("p_value", test.p_value);
    rec.finish(a.out.join("report.json"))
}

#[derive(Debug, Serialize)]
struct CindexOut {
    c_index: f64,
    n_pairs: u64,
}

pub fn cindex(a: &CindexArgs, cfg: &RunConfig) -> Result<Status> {
    let mut rec = Recorder::new("cindex", cfg);
    let bytes = rec.input(&a.survival)?;
    let table = parse_survival(&a.survival, &bytes)?;
    let c = concordance(&table).in_module("survival")?;
    out_dir(&a.out)?;
    let out = CindexOut {
        c_index: c.c_index(),
        n_pairs: c.n_pairs,
    };
    write_json(&rec.output(a.out.join("cindex.json")), &out)?;
    rec.diag("concordant", c.concordant);
    rec.diag("risk_ties", c.risk_ties);
    rec.finish(a.out.join("report.json"))
}

pub fn loss(a: &LossArgs, cfg: &RunConfig) -> Result<Status> {
    let mut rec = Recorder::new("loss", cfg);
    let bytes = rec.input(&a.survival)?;
    let table = parse_survival(&a.survival, &bytes)?;
    let (surv, _) = cox_loss(&table).in_module("survival")?;

    let h_p = read_matrix_input(&mut rec, &a.h_p)?;
    let h_g = read_matrix_input(&mut rec, &a.h_g)?;
    let anchors = read_matrix_input(&mut rec, &a.anchors)?;
    if anchors.nrows() != 2 {
        return Err(CliError::format(&a.anchors, format!("expected 2 rows, found {}", anchors.nrows())));
    }
    let d = anchors.ncols();
    let phi = match &a.phi {
        Some(p) => read_matrix_input(&mut rec, p)?,
        None => Array2::eye(d),
    };
    let pair = AnchorPair::new(
        Array1::from(anchors.row(0).to_vec()),
        Array1::from(anchors.row(1).to_vec()),
        phi,
        cfg.tau_r,
    )
    .in_module("apart")?;
    let sp = anchor_scores(&mean_token(h_p.view()).in_module("apart")?, &pair, Modality::Pathology).in_module("apart")?;
    let sg = anchor_scores(&mean_token(h_g.view()).in_module("apart")?, &pair, Modality::Genomics).in_module("apart")?;
    let contrast = contrastive_loss(sp, sg).in_module("apart")?;
    let report = LossReport::new(surv, contrast, a.instance, &cfg.loss_weights()).in_module("apart")?;

    out_dir(&a.out)?;
    write_json(&rec.output(a.out.join("losses.json")), &report)?;
    rec.diag("scores_p", sp);
    rec.diag("scores_g", sg);
    rec.finish(a.out.join("report.json"))
}
