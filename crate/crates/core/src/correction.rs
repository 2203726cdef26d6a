//! Cross-entropy and its backward-corrected form `ℓ← = T⁻¹ ℓ`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matvec, ProbVector};
use crate::noise::TransitionMatrix;

/// Posterior entries are clamped below by this before taking logs.
pub const LOG_CLAMP: f64 = 1e-12;

/// Which training loss a run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    /// Plain cross-entropy on the observed labels.
    None,
    /// Cross-entropy corrected by `T⁻¹`.
    Backward,
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Correction::None => "none",
            Correction::Backward => "backward",
        })
    }
}

impl FromStr for Correction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Correction::None),
            "backward" => Ok(Correction::Backward),
            other => Err(Error::ConfigInvalid(format!(
                "unknown correction {other:?} (expected none|backward)"
            ))),
        }
    }
}

/// Per-candidate-class losses. Entries may be negative after correction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossVector(Vec<f64>);

impl LossVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(LossVector(entries))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `ℓ_i = -ln max(p_i, ε)` for every candidate class `i`.
pub fn ce_loss_vector(posterior: &ProbVector) -> LossVector {
    LossVector(posterior.as_slice().iter().map(|&p| -p.max(LOG_CLAMP).ln()).collect())
}

pub fn backward_correct(t: &TransitionMatrix, l: &LossVector) -> Result<LossVector> {
    LossVector::new(matvec(t.inverse(), l.as_slice())?)
}

pub fn loss_for_label(corrected: &LossVector, noisy_label: usize) -> Result<f64> {
    corrected.0.get(noisy_label).copied().ok_or(Error::LabelOutOfRange {
        label: noisy_label,
        classes: corrected.len(),
    })
}

/// Gradient with respect to the logits of
/// `loss_for_label(backward_correct(t, ce_loss_vector(softmax(z))), label)`.
///
/// With `w` the `label` row of `T⁻¹`, the loss is `Σ_k w_k ℓ_k`, and each
/// unclamped `ℓ_k` contributes `w_k (p - e_k)`. Clamped entries are constant.
pub fn corrected_loss_grad(posterior: &ProbVector, t: &TransitionMatrix, noisy_label: usize) -> Result<Vec<f64>> {
    let c = t.num_classes();
    if posterior.len() != c {
        return Err(Error::DimensionMismatch {
            expected: c,
            found: posterior.len(),
        });
    }
    if noisy_label >= c {
        return Err(Error::LabelOutOfRange {
            label: noisy_label,
            classes: c,
        });
    }
    let mut grad = vec![0.0; c];
    weighted_ce_grad(posterior.as_slice(), t.inverse().row(noisy_label), &mut grad);
    Ok(grad)
}

/// Loss `Σ_k w_k ℓ_k(p)` and its logit gradient written into `grad`.
pub(crate) fn weighted_ce_grad(p: &[f64], weights: &[f64], grad: &mut [f64]) -> f64 {
    let mut active_weight = 0.0;
    let mut loss = 0.0;
    for (k, (&pk, &wk)) in p.iter().zip(weights).enumerate() {
        if pk > LOG_CLAMP {
            active_weight += wk;
            grad[k] = -wk;
            loss -= wk * pk.ln();
        } else {
            grad[k] = 0.0;
            loss -= wk * LOG_CLAMP.ln();
        }
    }
    for (g, &pk) in grad.iter_mut().zip(p) {
        *g += active_weight * pk;
    }
    loss
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::softmax;
    use proptest::prelude::*;

    fn fashion06() -> TransitionMatrix {
        TransitionMatrix::validate(&[vec![0.4, 0.3, 0.3], vec![0.3, 0.4, 0.3], vec![0.3, 0.3, 0.4]]).unwrap()
    }

    fn random_stochastic(rng: &mut impl rand::Rng, c: usize) -> TransitionMatrix {
        loop {
            let rows: Vec<Vec<f64>> = (0..c)
                .map(|i| {
                    // diagonal-heavy so draws are comfortably non-singular
                    let raw: Vec<f64> = (0..c)
                        .map(|j| rng.gen::<f64>() + if i == j { 1.5 } else { 0.0 })
                        .collect();
                    let s: f64 = raw.iter().sum();
                    raw.iter().map(|x| x / s).collect()
                })
                .collect();
            if let Ok(t) = TransitionMatrix::validate(&rows) {
                return t;
            }
        }
    }

    fn composed_loss(z: &[f64], t: &TransitionMatrix, label: usize) -> f64 {
        let p = softmax(z).unwrap();
        loss_for_label(&backward_correct(t, &ce_loss_vector(&p)).unwrap(), label).unwrap()
    }

    fn finite_diff(z: &[f64], t: &TransitionMatrix, label: usize) -> Vec<f64> {
        let h = 1e-5;
        (0..z.len())
            .map(|i| {
                let mut up = z.to_vec();
                let mut dn = z.to_vec();
                up[i] += h;
                dn[i] -= h;
                (composed_loss(&up, t, label) - composed_loss(&dn, t, label)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn ce_examples() {
        let ln3 = 3f64.ln();
        assert!(ce_loss_vector(&ProbVector::uniform(3))
            .as_slice()
            .iter()
            .all(|l| (l - ln3).abs() < 1e-15));
        let pole = ce_loss_vector(&ProbVector::one_hot(3, 0));
        assert_eq!(pole.as_slice(), &[0.0, -LOG_CLAMP.ln(), -LOG_CLAMP.ln()]);
        let l = ce_loss_vector(&ProbVector::new(vec![0.5, 0.25, 0.25]).unwrap());
        for (a, b) in l.as_slice().iter().zip([2f64.ln(), 4f64.ln(), 4f64.ln()]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn backward_correct_examples() {
        let l = LossVector::new(vec![0.3, 1.2, 2.0]).unwrap();
        assert_eq!(backward_correct(&TransitionMatrix::identity(3), &l).unwrap(), l);

        let ln3 = 3f64.ln();
        let u = backward_correct(&fashion06(), &LossVector::new(vec![ln3; 3]).unwrap()).unwrap();
        assert!(u.as_slice().iter().all(|v| (v - ln3).abs() < 1e-12));

        let e = backward_correct(&fashion06(), &LossVector::new(vec![1.0, 0.0, 0.0]).unwrap()).unwrap();
        for (a, b) in e.as_slice().iter().zip([7.0, -3.0, -3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(
            backward_correct(&fashion06(), &LossVector::new(vec![1.0]).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn label_selection() {
        let l = LossVector::new(vec![7.0, -3.0, -3.0]).unwrap();
        assert_eq!(loss_for_label(&l, 1).unwrap(), -3.0);
        assert!(matches!(
            loss_for_label(&l, 3),
            Err(Error::LabelOutOfRange { label: 3, classes: 3 })
        ));

        let p = ProbVector::new(vec![0.5, 0.25, 0.25]).unwrap();
        let corrected = backward_correct(&TransitionMatrix::identity(3), &ce_loss_vector(&p)).unwrap();
        assert!((loss_for_label(&corrected, 0).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn identity_gradient_is_softmax_ce_gradient() {
        let p = softmax(&[0.3, -1.0, 2.0]).unwrap();
        let g = corrected_loss_grad(&p, &TransitionMatrix::identity(3), 2).unwrap();
        let expected: Vec<f64> = p
            .as_slice()
            .iter()
            .enumerate()
            .map(|(k, pk)| pk - if k == 2 { 1.0 } else { 0.0 })
            .collect();
        assert_eq!(g, expected);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let mut mats = vec![fashion06(), TransitionMatrix::identity(3)];
        mats.extend((0..5).map(|_| random_stochastic(&mut rng, 3)));
        let logits = [vec![0.0, 0.0, 0.0], vec![1.5, -0.7, 0.2], vec![-3.0, 2.0, 0.5]];
        for t in &mats {
            for z in &logits {
                for label in 0..3 {
                    let p = softmax(z).unwrap();
                    let g = corrected_loss_grad(&p, t, label).unwrap();
                    let fd = finite_diff(z, t, label);
                    for (a, n) in g.iter().zip(&fd) {
                        let tol = 1e-6 * a.abs().max(n.abs()).max(1.0);
                        assert!((a - n).abs() <= tol, "analytic {a} vs numeric {n}");
                    }
                }
            }
        }
    }

    #[test]
    fn clamped_pole_gradient_is_finite() {
        let g = corrected_loss_grad(&ProbVector::one_hot(3, 0), &fashion06(), 1).unwrap();
        assert!(g.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn correction_is_unbiased_for_every_clean_class() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
        let mut mats = vec![fashion06()];
        mats.extend((0..20).map(|_| random_stochastic(&mut rng, 3)));
        use rand::Rng;
        for t in &mats {
            for _ in 0..1000 {
                let raw: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() + 1e-3).collect();
                let s: f64 = raw.iter().sum();
                let p = ProbVector::new(raw.iter().map(|x| x / s).collect()).unwrap();
                let l = ce_loss_vector(&p);
                let corrected = backward_correct(t, &l).unwrap();
                for y in 0..3 {
                    let expectation: f64 = (0..3).map(|j| t.prob(y, j) * corrected.as_slice()[j]).sum();
                    assert!((expectation - l.as_slice()[y]).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn minimizer_is_preserved_on_a_discrete_problem() {
        let t = fashion06();
        let clean = [0.5, 0.3, 0.2];
        let noisy: Vec<f64> = (0..3).map(|j| (0..3).map(|y| clean[y] * t.prob(y, j)).sum()).collect();

        let mut best_corrected = (f64::INFINITY, (0, 0));
        let mut best_clean = (f64::INFINITY, (0, 0));
        for a in 1..99 {
            for b in 1..(100 - a) {
                let p =
                    ProbVector::new(vec![a as f64 / 100.0, b as f64 / 100.0, (100 - a - b) as f64 / 100.0]).unwrap();
                let l = ce_loss_vector(&p);
                let lc = backward_correct(&t, &l).unwrap();
                let noisy_risk: f64 = (0..3).map(|j| noisy[j] * lc.as_slice()[j]).sum();
                let clean_risk: f64 = (0..3).map(|y| clean[y] * l.as_slice()[y]).sum();
                if noisy_risk < best_corrected.0 {
                    best_corrected = (noisy_risk, (a, b));
                }
                if clean_risk < best_clean.0 {
                    best_clean = (clean_risk, (a, b));
                }
            }
        }
        assert_eq!(best_corrected.1, best_clean.1);
        assert_eq!(best_clean.1, (50, 30));
    }

    proptest! {
        #[test]
        fn correction_is_linear(l1 in proptest::collection::vec(-10.0f64..10.0, 3),
                                l2 in proptest::collection::vec(-10.0f64..10.0, 3),
                                a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let t = fashion06();
            let mix: Vec<f64> = l1.iter().zip(&l2).map(|(x, y)| a * x + b * y).collect();
            let lhs = backward_correct(&t, &LossVector::new(mix).unwrap()).unwrap();
            let c1 = backward_correct(&t, &LossVector::new(l1).unwrap()).unwrap();
            let c2 = backward_correct(&t, &LossVector::new(l2).unwrap()).unwrap();
            for i in 0..3 {
                let rhs = a * c1.as_slice()[i] + b * c2.as_slice()[i];
                let scale = lhs.as_slice()[i].abs().max(rhs.abs()).max(1.0);
                prop_assert!((lhs.as_slice()[i] - rhs).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn identity_correction_is_identity(l in proptest::collection::vec(-10.0f64..10.0, 4)) {
            let lv = LossVector::new(l).unwrap();
            prop_assert_eq!(backward_correct(&TransitionMatrix::identity(4), &lv).unwrap(), lv);
        }
    }
}
