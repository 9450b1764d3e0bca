mod oracles;

use ndarray::{Array1, Array2};
use proptest::prelude::*;
use protoalign::apart::*;
use protoalign::together::Modality;
use rand::Rng;

use oracles::*;

struct Instance {
    h_p: Array2<f64>,
    h_g: Array2<f64>,
    a_p: Array1<f64>,
    a_g: Array1<f64>,
    phi: Array2<f64>,
    tau_r: f64,
}

impl Instance {
    fn random(seed: u64, k: usize, d: usize) -> Self {
        let mut r = rng(seed);
        Self {
            h_p: gaussian_matrix(&mut r, k, d),
            h_g: gaussian_matrix(&mut r, k, d),
            a_p: gaussian_vec(&mut r, d),
            a_g: gaussian_vec(&mut r, d),
            phi: gaussian_matrix(&mut r, d, d),
            tau_r: r.random_range(0.1..1.0),
        }
    }

    fn flat(&self) -> Vec<f64> {
        self.h_p.iter().chain(self.h_g.iter()).chain(self.a_p.iter()).chain(self.a_g.iter()).copied().collect()
    }

    // Forward value through the score/loss functions, not the gradient routine.
    fn loss_at(&self, x: &[f64]) -> f64 {
        let (k, d) = self.h_p.dim();
        let (kg, _) = self.h_g.dim();
        let h_p = Array2::from_shape_vec((k, d), x[..k * d].to_vec()).unwrap();
        let h_g = Array2::from_shape_vec((kg, d), x[k * d..(k + kg) * d].to_vec()).unwrap();
        let off = (k + kg) * d;
        let a_p = Array1::from(x[off..off + d].to_vec());
        let a_g = Array1::from(x[off + d..].to_vec());
        let anchors = AnchorPair::new(a_p, a_g, self.phi.clone(), self.tau_r).unwrap();
        let sp = anchor_scores(&mean_token(h_p.view()).unwrap(), &anchors, Modality::Pathology).unwrap();
        let sg = anchor_scores(&mean_token(h_g.view()).unwrap(), &anchors, Modality::Genomics).unwrap();
        contrastive_loss(sp, sg).unwrap()
    }

    fn analytic(&self) -> (f64, Vec<f64>) {
        let anchors = AnchorPair::new(self.a_p.clone(), self.a_g.clone(), self.phi.clone(), self.tau_r).unwrap();
        let g = contrastive_grad(self.h_p.view(), self.h_g.view(), &anchors).unwrap();
        let flat = g.h_p.iter().chain(g.h_g.iter()).chain(g.a_p.iter()).chain(g.a_g.iter()).copied().collect();
        (g.loss, flat)
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let inst = Instance::random(seed, 2 + (seed as usize % 3), 3);
        let x = inst.flat();
        let (loss, analytic) = inst.analytic();
        assert!((loss - inst.loss_at(&x)).abs() < 1e-12);
        let numeric = central_diff(|v| inst.loss_at(v), &x, 1e-5);
        worst = worst.max(rel_err(&analytic, &numeric, 1e-8));
    }
    assert!(worst <= 1e-4, "worst relative error {worst}");
}

#[test]
fn gradient_with_identity_phi_and_uneven_prototype_counts() {
    let mut inst = Instance::random(500, 3, 4);
    inst.phi = Array2::eye(4);
    inst.h_g = gaussian_matrix(&mut rng(501), 5, 4);
    let x = inst.flat();
    let numeric = central_diff(|v| inst.loss_at(v), &x, 1e-5);
    assert!(rel_err(&inst.analytic().1, &numeric, 1e-8) <= 1e-4);
}

#[test]
fn rotation_leaves_scores_unchanged() {
    let mut r = rng(17);
    for _ in 0..20 {
        let d = r.random_range(2..6);
        let (h, a_p, a_g) = (gaussian_vec(&mut r, d), gaussian_vec(&mut r, d), gaussian_vec(&mut r, d));
        let q = orthogonal(&mut r, d);
        let eval = |h: &Array1<f64>, a_p: &Array1<f64>, a_g: &Array1<f64>| {
            let anchors = AnchorPair::with_identity(a_p.clone(), a_g.clone(), 0.1).unwrap();
            let m = MeanToken::new(h.clone()).unwrap();
            (
                anchor_scores(&m, &anchors, Modality::Pathology).unwrap(),
                anchor_scores(&m, &anchors, Modality::Genomics).unwrap(),
            )
        };
        let (s1, s2) = eval(&h, &a_p, &a_g);
        let (r1, r2) = eval(&q.dot(&h), &q.dot(&a_p), &q.dot(&a_g));
        for (a, b) in [(s1, r1), (s2, r2)] {
            assert!((a.plus - b.plus).abs() < 1e-10 && (a.minus - b.minus).abs() < 1e-10);
        }
        let l1 = contrastive_loss(s1, s2).unwrap();
        let l2 = contrastive_loss(r1, r2).unwrap();
        assert!((l1 - l2).abs() < 1e-10);
    }
}

#[test]
fn default_weights_are_one_half() {
    let w = LossWeights::<f64>::default();
    assert_eq!((w.lambda_contrast, w.lambda_instance), (0.5, 0.5));
    let report = LossReport::new(0.7, 1.2, 0.4, &w).unwrap();
    assert!((report.total - (0.7 + 0.6 + 0.2)).abs() < 1e-15);
}

proptest! {
    #[test]
    fn loss_positive_and_monotone(p_plus in -10.0f64..10.0, p_minus in -10.0f64..10.0,
                                  g_plus in -10.0f64..10.0, g_minus in -10.0f64..10.0, bump in 1e-3f64..5.0) {
        let sp = ScorePair { plus: p_plus, minus: p_minus };
        let sg = ScorePair { plus: g_plus, minus: g_minus };
        let l = contrastive_loss(sp, sg).unwrap();
        prop_assert!(l > 0.0);
        let higher = contrastive_loss(ScorePair { plus: p_plus + bump, ..sp }, sg).unwrap();
        prop_assert!(higher < l);
    }
}
