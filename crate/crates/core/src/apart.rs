//! Anchor-based contrastive loss over mean refined prototype tokens, with a
//! closed-form gradient, and the combined training objective.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::l2_norm;
use crate::scalar::{sigmoid, softplus, Scalar};
use crate::together::Modality;

/// Mean of the `K` refined prototype rows of one modality.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanToken<T>(Array1<T>);

impl<T: Scalar> MeanToken<T> {
    pub fn new(values: Array1<T>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("mean token", "entries must be finite"));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> ArrayView1<'_, T> {
        self.0.view()
    }
}

pub fn mean_token<T: Scalar>(h: ArrayView2<'_, T>) -> Result<MeanToken<T>> {
    if h.nrows() == 0 {
        return Err(Error::invalid("prototypes", "cannot average zero rows"));
    }
    let mean = h.sum_axis(Axis(0)).mapv(|x| x / T::from_usize_lossy(h.nrows()));
    MeanToken::new(mean)
}

/// Modality anchors, the shared projection `φ` (`D′×D′`, applied as `φ·v`)
/// and the score temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorPair<T> {
    a_p: Array1<T>,
    a_g: Array1<T>,
    phi: Array2<T>,
    tau_r: T,
}

impl<T: Scalar> AnchorPair<T> {
    pub fn new(a_p: Array1<T>, a_g: Array1<T>, phi: Array2<T>, tau_r: T) -> Result<Self> {
        let d = a_p.len();
        if d == 0 {
            return Err(Error::invalid("anchors", "anchors must be non-empty"));
        }
        if a_g.len() != d {
            return Err(Error::dims("genomics anchor", d, a_g.len()));
        }
        if phi.dim() != (d, d) {
            return Err(Error::invalid(
                "phi",
                format!("expected {d}x{d}, got {}x{}", phi.nrows(), phi.ncols()),
            ));
        }
        if !(tau_r > T::zero()) || !tau_r.is_finite() {
            return Err(Error::invalid("tau_r", format!("must be > 0, got {tau_r}")));
        }
        let pair = Self { a_p, a_g, phi, tau_r };
        pair.project(pair.a_p.view(), "pathology anchor")?;
        pair.project(pair.a_g.view(), "genomics anchor")?;
        Ok(pair)
    }

    /// Anchors with `φ = I`.
    pub fn with_identity(a_p: Array1<T>, a_g: Array1<T>, tau_r: T) -> Result<Self> {
        let d = a_p.len();
        Self::new(a_p, a_g, Array2::eye(d), tau_r)
    }

    pub fn anchor(&self, m: Modality) -> ArrayView1<'_, T> {
        match m {
            Modality::Pathology => self.a_p.view(),
            Modality::Genomics => self.a_g.view(),
        }
    }

    pub fn phi(&self) -> ArrayView2<'_, T> {
        self.phi.view()
    }

    pub fn tau_r(&self) -> T {
        self.tau_r
    }

    pub fn dim(&self) -> usize {
        self.a_p.len()
    }

    /// `normalize(φ·v)` together with `|φ·v|`.
    fn project(&self, v: ArrayView1<'_, T>, what: &'static str) -> Result<(Array1<T>, T)> {
        let z = self.phi.dot(&v);
        let n = l2_norm(z.view());
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::ZeroNorm {
                row: 0,
                context: Some(what),
            });
        }
        Ok((z.mapv(|x| x / n), n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorePair<T> {
    pub plus: T,
    pub minus: T,
}

/// Scaled cosine scores of `h̄` against its own modality's anchor (`plus`)
/// and the other modality's anchor (`minus`).
pub fn anchor_scores<T: Scalar>(h: &MeanToken<T>, anchors: &AnchorPair<T>, own: Modality) -> Result<ScorePair<T>> {
    if h.values().len() != anchors.dim() {
        return Err(Error::dims("mean token", anchors.dim(), h.values().len()));
    }
    let (zh, _) = anchors.project(h.values(), "mean token")?;
    let (zo, _) = anchors.project(anchors.anchor(own), "own anchor")?;
    let (zx, _) = anchors.project(anchors.anchor(own.other()), "other anchor")?;
    Ok(ScorePair {
        plus: zh.dot(&zo) / anchors.tau_r,
        minus: zh.dot(&zx) / anchors.tau_r,
    })
}

/// `-log σ_p - log σ_g` with `σ = e^{s+} / (e^{s+} + e^{s-})`.
pub fn contrastive_loss<T: Scalar>(scores_p: ScorePair<T>, scores_g: ScorePair<T>) -> Result<T> {
    for s in [scores_p, scores_g] {
        if !s.plus.is_finite() || !s.minus.is_finite() {
            return Err(Error::invalid("scores", "scores must be finite"));
        }
    }
    Ok(softplus(scores_p.minus - scores_p.plus) + softplus(scores_g.minus - scores_g.plus))
}

/// Loss value and its gradients with respect to both prototype matrices
/// and both anchors (`φ` is held fixed).
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastiveGrad<T> {
    pub loss: T,
    pub scores_p: ScorePair<T>,
    pub scores_g: ScorePair<T>,
    pub h_p: Array2<T>,
    pub h_g: Array2<T>,
    pub a_p: Array1<T>,
    pub a_g: Array1<T>,
}

// Pull a gradient w.r.t. normalize(z) back to z.
fn unnormalize_grad<T: Scalar>(zhat: &Array1<T>, norm: T, g: &Array1<T>) -> Array1<T> {
    let radial = zhat.dot(g);
    (g - &zhat.mapv(|x| x * radial)).mapv(|x| x / norm)
}

pub fn contrastive_grad<T: Scalar>(
    h_p: ArrayView2<'_, T>,
    h_g: ArrayView2<'_, T>,
    anchors: &AnchorPair<T>,
) -> Result<ContrastiveGrad<T>> {
    let d = anchors.dim();
    for (h, what) in [(h_p, "pathology prototypes"), (h_g, "genomics prototypes")] {
        if h.ncols() != d {
            return Err(Error::dims(what, d, h.ncols()));
        }
    }
    let mean_p = mean_token(h_p)?;
    let mean_g = mean_token(h_g)?;
    let (zp, np) = anchors.project(mean_p.values(), "pathology mean token")?;
    let (zg, ng) = anchors.project(mean_g.values(), "genomics mean token")?;
    let (ap, nap) = anchors.project(anchors.a_p.view(), "pathology anchor")?;
    let (ag, nag) = anchors.project(anchors.a_g.view(), "genomics anchor")?;
    let inv_tau = T::one() / anchors.tau_r;

    let scores_p = ScorePair {
        plus: zp.dot(&ap) * inv_tau,
        minus: zp.dot(&ag) * inv_tau,
    };
    let scores_g = ScorePair {
        plus: zg.dot(&ag) * inv_tau,
        minus: zg.dot(&ap) * inv_tau,
    };
    let loss = contrastive_loss(scores_p, scores_g)?;

    // dℓ/ds- = σ(s- - s+), dℓ/ds+ = -σ(s- - s+)
    let wp = sigmoid(scores_p.minus - scores_p.plus) * inv_tau;
    let wg = sigmoid(scores_g.minus - scores_g.plus) * inv_tau;

    let d_zp = (&ag - &ap).mapv(|x| x * wp);
    let d_zg = (&ap - &ag).mapv(|x| x * wg);
    let d_ap = (&zg.mapv(|x| x * wg) - &zp.mapv(|x| x * wp)).to_owned();
    let d_ag = (&zp.mapv(|x| x * wp) - &zg.mapv(|x| x * wg)).to_owned();

    let phi_t = anchors.phi.t();
    let back = |zhat: &Array1<T>, norm: T, g: &Array1<T>| phi_t.dot(&unnormalize_grad(zhat, norm, g));

    let spread = |g: Array1<T>, k: usize| {
        let g = g.mapv(|x| x / T::from_usize_lossy(k));
        let mut out = Array2::zeros((k, g.len()));
        for mut row in out.axis_iter_mut(Axis(0)) {
            row.assign(&g);
        }
        out
    };

    Ok(ContrastiveGrad {
        loss,
        scores_p,
        scores_g,
        h_p: spread(back(&zp, np, &d_zp), h_p.nrows()),
        h_g: spread(back(&zg, ng, &d_zg), h_g.nrows()),
        a_p: back(&ap, nap, &d_ap),
        a_g: back(&ag, nag, &d_ag),
    })
}

/// Weights of the auxiliary terms in the combined objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights<T> {
    pub lambda_contrast: T,
    pub lambda_instance: T,
}

impl<T: Scalar> Default for LossWeights<T> {
    fn default() -> Self {
        Self {
            lambda_contrast: T::lit(0.5),
            lambda_instance: T::lit(0.5),
        }
    }
}

pub fn total_loss<T: Scalar>(surv: T, contrast: T, instance: T, weights: &LossWeights<T>) -> Result<T> {
    if !(weights.lambda_contrast >= T::zero()) || !(weights.lambda_instance >= T::zero()) {
        return Err(Error::invalid("lambda", "loss weights must be >= 0"));
    }
    Ok(surv + weights.lambda_contrast * contrast + weights.lambda_instance * instance)
}

/// The four loss values of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport<T> {
    pub surv: T,
    pub contrast: T,
    pub instance: T,
    pub total: T,
}

impl<T: Scalar> LossReport<T> {
    pub fn new(surv: T, contrast: T, instance: T, weights: &LossWeights<T>) -> Result<Self> {
        Ok(Self {
            surv,
            contrast,
            instance,
            total: total_loss(surv, contrast, instance, weights)?,
        })
    }
}
