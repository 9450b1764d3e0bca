//! Token-to-prototype alignment: logits against a shared prototype bank,
//! transport costs, the joint curriculum plan over both modalities, weight
//! fusion, prototype aggregation and the instance soft cross-entropy.
//!
//! Padded token rows (flagged in [`TokenMatrix::padding`]) never enter a
//! cost, a plan, an aggregate or a loss average.

use ndarray::{s, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{log_softmax_rows, normalize_rows, softmax_rows};
use crate::ot::{solve_uot_curriculum, CostMatrix, CurriculumPlan, SolverConfig};
use crate::scalar::{log_sum_exp, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Pathology,
    Genomics,
}

impl Modality {
    pub fn other(self) -> Self {
        match self {
            Modality::Pathology => Modality::Genomics,
            Modality::Genomics => Modality::Pathology,
        }
    }
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Modality::Pathology => f.write_str("pathology"),
            Modality::Genomics => f.write_str("genomics"),
        }
    }
}

/// Tokens of one modality, one row per token.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenMatrix<T> {
    values: Array2<T>,
    modality: Modality,
    padding: Vec<bool>,
}

impl<T: Scalar> TokenMatrix<T> {
    pub fn new(values: Array2<T>, modality: Modality) -> Result<Self> {
        let n = values.nrows();
        Self::with_padding(values, modality, vec![false; n])
    }

    /// `padding[i] == true` marks row `i` as padding.
    pub fn with_padding(values: Array2<T>, modality: Modality, padding: Vec<bool>) -> Result<Self> {
        if values.nrows() == 0 {
            return Err(Error::invalid("tokens", format!("{modality} token matrix has no rows")));
        }
        if padding.len() != values.nrows() {
            return Err(Error::dims("padding mask", values.nrows(), padding.len()));
        }
        if let Some(((i, j), _)) = values.indexed_iter().find(|(_, x)| x.is_nan()) {
            return Err(Error::invalid("tokens", format!("{modality} entry ({i}, {j}) is NaN")));
        }
        Ok(Self {
            values,
            modality,
            padding,
        })
    }

    pub fn values(&self) -> ArrayView2<'_, T> {
        self.values.view()
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn padding(&self) -> &[bool] {
        &self.padding
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// Indices of the rows that are not padding.
    pub fn valid_rows(&self) -> Vec<usize> {
        (0..self.nrows()).filter(|&i| !self.padding[i]).collect()
    }

    pub fn n_valid(&self) -> usize {
        self.padding.iter().filter(|&&p| !p).count()
    }
}

/// `K` prototypes in the shared space with the logit temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeBank<T> {
    values: Array2<T>,
    tau: T,
}

impl<T: Scalar> PrototypeBank<T> {
    pub fn new(values: Array2<T>, tau: T) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::invalid("prototypes", format!("need K >= 2, got {}", values.nrows())));
        }
        if !(tau > T::zero()) {
            return Err(Error::invalid("tau", format!("must be > 0, got {tau}")));
        }
        normalize_rows(values.view(), None)?;
        Ok(Self { values, tau })
    }

    pub fn values(&self) -> ArrayView2<'_, T> {
        self.values.view()
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn k(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    /// Rows scaled to unit Euclidean norm.
    pub fn normalized(&self) -> Array2<T> {
        normalize_rows(self.values.view(), None).expect("checked at construction")
    }
}

/// Binary pathway-by-gene membership.
#[derive(Debug, Clone, PartialEq)]
pub struct PathwayMask {
    membership: Vec<Vec<bool>>,
    n_genes: usize,
}

impl PathwayMask {
    pub fn new(membership: Vec<Vec<bool>>) -> Result<Self> {
        let n_genes = membership.first().map_or(0, Vec::len);
        if membership.is_empty() || n_genes == 0 {
            return Err(Error::invalid("pathway mask", "mask must be non-empty"));
        }
        for (c, row) in membership.iter().enumerate() {
            if row.len() != n_genes {
                return Err(Error::dims("pathway mask row", n_genes, row.len()));
            }
            if !row.iter().any(|&m| m) {
                return Err(Error::invalid("pathway mask", format!("pathway {c} selects no genes")));
            }
        }
        Ok(Self { membership, n_genes })
    }

    /// Build from 0/1 integers; any other value is rejected.
    pub fn from_indicators(rows: &[Vec<u8>]) -> Result<Self> {
        let mut membership = Vec::with_capacity(rows.len());
        for (c, row) in rows.iter().enumerate() {
            let mut r = Vec::with_capacity(row.len());
            for (g, &v) in row.iter().enumerate() {
                match v {
                    0 => r.push(false),
                    1 => r.push(true),
                    other => {
                        return Err(Error::invalid(
                            "pathway mask",
                            format!("entry ({c}, {g}) is {other}, expected 0 or 1"),
                        ))
                    }
                }
            }
            membership.push(r);
        }
        Self::new(membership)
    }

    pub fn n_pathways(&self) -> usize {
        self.membership.len()
    }

    pub fn n_genes(&self) -> usize {
        self.n_genes
    }

    pub fn row(&self, c: usize) -> &[bool] {
        &self.membership[c]
    }
}

/// Gather, for each pathway, the expression values of its member genes in
/// ascending gene order. Zero expression values are kept; only positions
/// outside the pathway are dropped.
pub fn pathway_select<T: Scalar>(x_g: &[T], mask: &PathwayMask) -> Result<Vec<Vec<T>>> {
    if x_g.len() != mask.n_genes() {
        return Err(Error::dims("pathway_select", mask.n_genes(), x_g.len()));
    }
    Ok(mask
        .membership
        .iter()
        .map(|row| x_g.iter().zip(row).filter(|(_, &m)| m).map(|(&x, _)| x).collect())
        .collect())
}

/// Cosine-similarity logits `normalize(X·W) · normalize(P)ᵀ / τ`.
///
/// `projection` is `D×D′`. Padded rows get an all-zero logit row.
pub fn prototype_logits<T: Scalar>(
    tokens: &TokenMatrix<T>,
    projection: ArrayView2<'_, T>,
    bank: &PrototypeBank<T>,
) -> Result<Array2<T>> {
    if projection.nrows() != tokens.ncols() {
        return Err(Error::dims("projection rows vs token dim", tokens.ncols(), projection.nrows()));
    }
    if projection.ncols() != bank.dim() {
        return Err(Error::dims("projection cols vs prototype dim", bank.dim(), projection.ncols()));
    }
    let projected = tokens.values().dot(&projection);
    let x = normalize_rows(projected.view(), Some(tokens.padding())).map_err(|e| match e {
        Error::ZeroNorm { row, .. } => Error::ZeroNorm {
            row,
            context: Some("projected token"),
        },
        other => other,
    })?;
    let p = bank.normalized();
    let inv_tau = T::one() / bank.tau();
    Ok(x.dot(&p.t()).mapv(|v| v * inv_tau))
}

/// `C = -log softmax(L)` row-wise.
pub fn transport_cost<T: Scalar>(logits: ArrayView2<'_, T>) -> Result<CostMatrix<T>> {
    if let Some(((i, j), _)) = logits.indexed_iter().find(|(_, x)| !x.is_finite()) {
        return Err(Error::invalid("logits", format!("entry ({i}, {j}) is not finite")));
    }
    let mut c = logits.to_owned();
    for mut row in c.axis_iter_mut(Axis(0)) {
        let lse = log_sum_exp(row.iter().copied());
        row.mapv_inplace(|x| lse - x);
    }
    CostMatrix::new(c)
}

/// Joint cost over the non-padded rows of both modalities, pathology first.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedCost<T> {
    pub cost: CostMatrix<T>,
    /// Number of pathology rows in `cost`.
    pub n_p: usize,
    /// Original row index of each kept pathology row.
    pub rows_p: Vec<usize>,
    /// Original row index of each kept genomics row.
    pub rows_g: Vec<usize>,
}

impl<T: Scalar> StackedCost<T> {
    pub fn n_tot(&self) -> usize {
        self.cost.nrows()
    }
}

fn kept_rows(n: usize, padding: Option<&[bool]>) -> Result<Vec<usize>> {
    match padding {
        None => Ok((0..n).collect()),
        Some(p) if p.len() == n => Ok((0..n).filter(|&i| !p[i]).collect()),
        Some(p) => Err(Error::dims("padding mask", n, p.len())),
    }
}

/// Stack the pathology and genomics costs along the token axis after
/// dropping padded rows.
pub fn stack_costs<T: Scalar>(
    cost_p: &CostMatrix<T>,
    cost_g: &CostMatrix<T>,
    padding_p: Option<&[bool]>,
    padding_g: Option<&[bool]>,
) -> Result<StackedCost<T>> {
    if cost_p.ncols() != cost_g.ncols() {
        return Err(Error::dims("stack_costs prototypes", cost_p.ncols(), cost_g.ncols()));
    }
    let rows_p = kept_rows(cost_p.nrows(), padding_p)?;
    let rows_g = kept_rows(cost_g.nrows(), padding_g)?;
    if rows_p.is_empty() && rows_g.is_empty() {
        return Err(Error::Degenerate("both modalities are fully padded".into()));
    }
    let k = cost_p.ncols();
    let mut values = Array2::zeros((rows_p.len() + rows_g.len(), k));
    for (dst, &src) in rows_p.iter().enumerate() {
        values.row_mut(dst).assign(&cost_p.values().row(src));
    }
    for (dst, &src) in rows_g.iter().enumerate() {
        values.row_mut(rows_p.len() + dst).assign(&cost_g.values().row(src));
    }
    Ok(StackedCost {
        cost: CostMatrix::new(values)?,
        n_p: rows_p.len(),
        rows_p,
        rows_g,
    })
}

/// Split a plan over stacked rows into the first `n_p` rows and the rest.
pub fn split_plan<T: Scalar>(plan: ArrayView2<'_, T>, n_p: usize) -> Result<(Array2<T>, Array2<T>)> {
    if n_p > plan.nrows() {
        return Err(Error::invalid(
            "n_p",
            format!("{n_p} exceeds the {} rows of the plan", plan.nrows()),
        ));
    }
    Ok((plan.slice(s![..n_p, ..]).to_owned(), plan.slice(s![n_p.., ..]).to_owned()))
}

/// Place `rows` (the kept rows, in order) back at their original indices in
/// an `n_rows`-row matrix; all other rows are zero.
pub fn expand_rows<T: Scalar>(rows: ArrayView2<'_, T>, kept: &[usize], n_rows: usize) -> Result<Array2<T>> {
    if rows.nrows() != kept.len() {
        return Err(Error::dims("expand_rows", kept.len(), rows.nrows()));
    }
    let mut out = Array2::zeros((n_rows, rows.ncols()));
    for (src, &dst) in kept.iter().enumerate() {
        if dst >= n_rows {
            return Err(Error::invalid("kept", format!("row index {dst} out of range {n_rows}")));
        }
        out.row_mut(dst).assign(&rows.row(src));
    }
    Ok(out)
}

/// Multiply a de-sinked plan by `n_tot` so each row holds the fraction of
/// its token's mass that was transported (in `[0, 1]`).
pub fn rescale_plan_rows<T: Scalar>(plan: ArrayView2<'_, T>, n_tot: usize) -> Array2<T> {
    let scale = T::from_usize_lossy(n_tot);
    plan.mapv(|q| q * scale)
}

/// Fused token-to-prototype weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionWeights<T> {
    pub values: Array2<T>,
    pub beta: T,
}

/// `W = (1-β)·softmax(L) + β·Q⋆`.
pub fn fuse_weights<T: Scalar>(
    logits: ArrayView2<'_, T>,
    plan: ArrayView2<'_, T>,
    beta: T,
) -> Result<FusionWeights<T>> {
    if logits.dim() != plan.dim() {
        return Err(Error::invalid(
            "fuse_weights",
            format!("logits {:?} and plan {:?} differ in shape", logits.dim(), plan.dim()),
        ));
    }
    if !(beta >= T::zero() && beta <= T::one()) {
        return Err(Error::invalid("beta", format!("must lie in [0, 1], got {beta}")));
    }
    let soft = softmax_rows(logits);
    let mut values = soft.mapv(|p| (T::one() - beta) * p);
    values.zip_mut_with(&plan, |w, &q| *w += beta * q);
    Ok(FusionWeights { values, beta })
}

/// `H = Wᵀ·X` over the non-padded tokens; `K×D`.
pub fn aggregate_prototypes<T: Scalar>(weights: &FusionWeights<T>, tokens: &TokenMatrix<T>) -> Result<Array2<T>> {
    let w = &weights.values;
    if w.nrows() != tokens.nrows() {
        return Err(Error::dims("aggregate_prototypes rows", tokens.nrows(), w.nrows()));
    }
    let (k, d) = (w.ncols(), tokens.ncols());
    let mut h = Array2::zeros((k, d));
    let x = tokens.values();
    for i in tokens.valid_rows() {
        for p in 0..k {
            let wip = w[(i, p)];
            if wip != T::zero() {
                h.row_mut(p).scaled_add(wip, &x.row(i));
            }
        }
    }
    Ok(h)
}

/// `-(1/N) Σ_i ⟨π_i, log softmax(L)_i⟩` over the non-padded rows. Rows of
/// `pi` may carry less than unit mass.
pub fn instance_soft_ce<T: Scalar>(
    pi: ArrayView2<'_, T>,
    logits: ArrayView2<'_, T>,
    padding: Option<&[bool]>,
) -> Result<T> {
    if pi.dim() != logits.dim() {
        return Err(Error::invalid(
            "instance_soft_ce",
            format!("targets {:?} and logits {:?} differ in shape", pi.dim(), logits.dim()),
        ));
    }
    let rows = kept_rows(pi.nrows(), padding)?;
    if rows.is_empty() {
        return Ok(T::zero());
    }
    let logp = log_softmax_rows(logits);
    let mut total = T::zero();
    for &i in &rows {
        for (&q, &lp) in pi.row(i).iter().zip(logp.row(i)) {
            if q != T::zero() {
                total -= q * lp;
            }
        }
    }
    Ok(total / T::from_usize_lossy(rows.len()))
}

/// `λ_wsi·CE_p + λ_gen·CE_g`.
pub fn instance_loss<T: Scalar>(ce_p: T, ce_g: T, lambda_wsi: T, lambda_gen: T) -> Result<T> {
    if !(lambda_wsi >= T::zero()) || !(lambda_gen >= T::zero()) {
        return Err(Error::invalid("lambda", "modality weights must be >= 0"));
    }
    Ok(lambda_wsi * ce_p + lambda_gen * ce_g)
}

/// Seeded `D×D′` Gaussian projection with entries of variance `1/D`.
pub fn seeded_projection<T: Scalar>(d: usize, d_prime: usize, seed: u64) -> Array2<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (d.max(1) as f64).sqrt();
    Array2::from_shape_fn((d, d_prime), |_| {
        let z: f64 = StandardNormal.sample(&mut rng);
        T::lit(z * scale)
    })
}

/// Parameters of the alignment pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignParams<T> {
    pub rho: T,
    pub beta: T,
    pub lambda_wsi: T,
    pub lambda_gen: T,
    /// Multiply the de-sinked plan by `N_tot` before fusion and the
    /// cross-entropy.
    pub rescale_plan: bool,
}

impl<T: Scalar> Default for AlignParams<T> {
    fn default() -> Self {
        Self {
            rho: T::one(),
            beta: T::lit(0.5),
            lambda_wsi: T::one(),
            lambda_gen: T::one(),
            rescale_plan: true,
        }
    }
}

/// Per-modality outputs of [`align`], indexed like the input token rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalityAlignment<T> {
    pub logits: Array2<T>,
    /// Plan rows handed to fusion and the cross-entropy (zero on padding).
    pub plan: Array2<T>,
    pub weights: FusionWeights<T>,
    pub prototypes: Array2<T>,
    pub soft_ce: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment<T> {
    pub stacked: StackedCost<T>,
    pub transport: CurriculumPlan<T>,
    pub pathology: ModalityAlignment<T>,
    pub genomics: ModalityAlignment<T>,
    pub instance_loss: T,
}

/// Full alignment pass for one sample: logits → costs → stacked curriculum
/// plan → split → fusion → aggregation → instance losses.
pub fn align<T: Scalar>(
    tokens_p: &TokenMatrix<T>,
    tokens_g: &TokenMatrix<T>,
    projection_p: ArrayView2<'_, T>,
    projection_g: ArrayView2<'_, T>,
    bank: &PrototypeBank<T>,
    params: &AlignParams<T>,
    solver: &SolverConfig<T>,
) -> Result<Alignment<T>> {
    let logits_p = prototype_logits(tokens_p, projection_p, bank)?;
    let logits_g = prototype_logits(tokens_g, projection_g, bank)?;
    let cost_p = transport_cost(logits_p.view())?;
    let cost_g = transport_cost(logits_g.view())?;
    let stacked = stack_costs(&cost_p, &cost_g, Some(tokens_p.padding()), Some(tokens_g.padding()))?;
    let transport = solve_uot_curriculum(&stacked.cost, params.rho, solver)?;

    let joint = if params.rescale_plan {
        rescale_plan_rows(transport.plan.values.view(), stacked.n_tot())
    } else {
        transport.plan.values.clone()
    };
    let (q_p, q_g) = split_plan(joint.view(), stacked.n_p)?;
    let q_p = expand_rows(q_p.view(), &stacked.rows_p, tokens_p.nrows())?;
    let q_g = expand_rows(q_g.view(), &stacked.rows_g, tokens_g.nrows())?;

    let pathology = modality_outputs(tokens_p, logits_p, q_p, params.beta)?;
    let genomics = modality_outputs(tokens_g, logits_g, q_g, params.beta)?;
    let instance_loss = instance_loss(pathology.soft_ce, genomics.soft_ce, params.lambda_wsi, params.lambda_gen)?;
    Ok(Alignment {
        stacked,
        transport,
        pathology,
        genomics,
        instance_loss,
    })
}

fn modality_outputs<T: Scalar>(
    tokens: &TokenMatrix<T>,
    logits: Array2<T>,
    plan: Array2<T>,
    beta: T,
) -> Result<ModalityAlignment<T>> {
    let mut weights = fuse_weights(logits.view(), plan.view(), beta)?;
    for (i, &pad) in tokens.padding().iter().enumerate() {
        if pad {
            weights.values.row_mut(i).fill(T::zero());
        }
    }
    let prototypes = aggregate_prototypes(&weights, tokens)?;
    let soft_ce = instance_soft_ce(plan.view(), logits.view(), Some(tokens.padding()))?;
    Ok(ModalityAlignment {
        logits,
        plan,
        weights,
        prototypes,
        soft_ce,
    })
}
