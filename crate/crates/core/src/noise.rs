//! Class-conditional noise model.
//!
//! A [`TransitionMatrix`] is stored row-stochastic: `t[i][j] = P(noisy = j | clean = i)`.
//! Posterior transforms apply the transpose explicitly; the backward
//! correction uses the stored inverse directly.

use std::fmt;
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{invert, matvec, Matrix, ProbVector};
use crate::rng::{keyed_unit, stream};

/// Allowed deviation of a row sum from 1 before a grid is rejected.
pub const ROW_SUM_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    t: Matrix,
    t_inv: Matrix,
}

impl TransitionMatrix {
    /// Validates a raw square grid: entries in [0, 1], rows summing to 1
    /// within [`ROW_SUM_TOL`] (renormalized exactly), and non-singular.
    pub fn validate(grid: &[Vec<f64>]) -> Result<Self> {
        let c = grid.len();
        if c == 0 {
            return Err(Error::EmptyInput);
        }
        for row in grid {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    found: row.len(),
                });
            }
        }
        for (i, row) in grid.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteInput);
                }
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::EntryOutOfRange {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        let mut rows = Vec::with_capacity(c);
        for (i, row) in grid.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NotStochastic {
                    row: i,
                    sum: (sum * 1e9).round() / 1e9,
                });
            }
            rows.push(row.iter().map(|v| v / sum).collect::<Vec<_>>());
        }
        let t = Matrix::from_rows(&rows)?;
        let t_inv = invert(&t)?;
        Ok(TransitionMatrix { t, t_inv })
    }

    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        Self::validate(&m.to_rows())
    }

    pub fn identity(num_classes: usize) -> Self {
        TransitionMatrix {
            t: Matrix::identity(num_classes),
            t_inv: Matrix::identity(num_classes),
        }
    }

    pub fn num_classes(&self) -> usize {
        self.t.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.t
    }

    pub fn inverse(&self) -> &Matrix {
        &self.t_inv
    }

    /// `P(noisy = noisy | clean = clean)`.
    pub fn prob(&self, clean: usize, noisy: usize) -> f64 {
        self.t[(clean, noisy)]
    }

    pub fn row(&self, clean: usize) -> &[f64] {
        self.t.row(clean)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.t.to_rows()
    }

    /// Parses the plain-text matrix format: one row per line, entries
    /// separated by whitespace or commas. Blank lines and `#` comments are
    /// ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut grid = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("line {}: bad number {s:?}", lineno + 1)))
                })
                .collect::<Result<Vec<f64>>>()?;
            grid.push(row);
        }
        Self::validate(&grid)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_string()).map_err(|e| Error::io(path, e))
    }
}

/// One row per line, shortest round-trip decimal representation.
impl fmt::Display for TransitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_matrix(f, &self.t)
    }
}

pub(crate) fn write_matrix(f: &mut impl fmt::Write, m: &Matrix) -> fmt::Result {
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(f, "{}", row.join(" "))?;
    }
    Ok(())
}

impl Serialize for TransitionMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

/// Headline noise level: one minus the smallest diagonal entry.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct FlipRate(f64);

impl FlipRate {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn flip_rate(t: &TransitionMatrix) -> FlipRate {
    let min_diag = (0..t.num_classes()).map(|i| t.prob(i, i)).fold(f64::INFINITY, f64::min);
    FlipRate(1.0 - min_diag)
}

/// Noisy-label posterior `Tᵀ · clean`.
pub fn noisy_posterior(t: &TransitionMatrix, clean: &ProbVector) -> Result<ProbVector> {
    if clean.len() != t.num_classes() {
        return Err(Error::DimensionMismatch {
            expected: t.num_classes(),
            found: clean.len(),
        });
    }
    let c = t.num_classes();
    let out: Vec<f64> = (0..c)
        .map(|j| (0..c).map(|i| t.prob(i, j) * clean.as_slice()[i]).sum())
        .collect();
    ProbVector::new(out)
}

/// Clean-posterior estimate `T⁻ᵀ · noisy`. Entries may leave the simplex.
pub fn clean_from_noisy(t: &TransitionMatrix, noisy: &[f64]) -> Result<Vec<f64>> {
    matvec(&t.inverse().transpose(), noisy)
}

/// Draws one noisy label per clean label; instance `i` uses the draw keyed
/// by `(seed, i)` and inverse-CDF sampling over row `labels[i]`.
pub fn inject_noise(labels: &[usize], t: &TransitionMatrix, seed: u64) -> Result<Vec<usize>> {
    let c = t.num_classes();
    labels
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            if y >= c {
                return Err(Error::LabelOutOfRange { label: y, classes: c });
            }
            Ok(sample_row(t.row(y), keyed_unit(seed, stream::NOISE, i as u64)))
        })
        .collect()
}

fn sample_row(row: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    let mut last_nonzero = 0;
    for (j, &p) in row.iter().enumerate() {
        if p > 0.0 {
            last_nonzero = j;
        }
        cum += p;
        if u < cum && p > 0.0 {
            return j;
        }
    }
    last_nonzero
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn fashion06() -> TransitionMatrix {
        TransitionMatrix::validate(&[vec![0.4, 0.3, 0.3], vec![0.3, 0.4, 0.3], vec![0.3, 0.3, 0.4]]).unwrap()
    }

    #[test]
    fn validate_examples() {
        let t = fashion06();
        assert!((flip_rate(&t).value() - 0.6).abs() < 1e-12);
        assert_eq!(flip_rate(&TransitionMatrix::identity(3)).value(), 0.0);

        let printed = [vec![0.5, 0.2, 0.3], vec![0.3, 0.5, 0.3], vec![0.3, 0.3, 0.5]];
        match TransitionMatrix::validate(&printed) {
            Err(e @ Error::NotStochastic { row: 1, .. }) => assert!(e.to_string().contains("1.1")),
            other => panic!("expected NotStochastic, got {other:?}"),
        }

        assert!(matches!(
            TransitionMatrix::validate(&[vec![1.2, -0.2], vec![0.0, 1.0]]),
            Err(Error::EntryOutOfRange { row: 0, col: 0, .. })
        ));
        assert!(matches!(
            TransitionMatrix::validate(&[vec![0.5, 0.5], vec![0.5, 0.5]]),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn validate_renormalizes_within_tolerance() {
        let t = TransitionMatrix::validate(&[vec![0.5, 0.5 + 1e-7], vec![0.0, 1.0]]).unwrap();
        assert!((t.row(0).iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flip_rate_of_asymmetric_matrix() {
        let t = TransitionMatrix::validate(&[vec![0.9, 0.1, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!((flip_rate(&t).value() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn noisy_posterior_examples() {
        let id = TransitionMatrix::identity(3);
        let e0 = ProbVector::one_hot(3, 0);
        assert_eq!(noisy_posterior(&id, &e0).unwrap(), e0);

        let out = noisy_posterior(&fashion06(), &e0).unwrap();
        for (a, b) in out.as_slice().iter().zip([0.4, 0.3, 0.3]) {
            assert!((a - b).abs() < 1e-15);
        }
        let u = noisy_posterior(&fashion06(), &ProbVector::uniform(3)).unwrap();
        for a in u.as_slice() {
            assert!((a - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(matches!(
            noisy_posterior(&fashion06(), &ProbVector::uniform(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn noisy_posterior_uses_transpose() {
        let t = TransitionMatrix::validate(&[vec![0.8, 0.2], vec![0.1, 0.9]]).unwrap();
        let out = noisy_posterior(&t, &ProbVector::one_hot(2, 1)).unwrap();
        assert_eq!(out.as_slice(), &[0.1, 0.9]);
        let back = clean_from_noisy(&t, out.as_slice()).unwrap();
        assert!((back[0]).abs() < 1e-12 && (back[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn injection_examples() {
        let labels: Vec<usize> = (0..1000).map(|i| i % 3).collect();
        for seed in [0, 1, 99] {
            assert_eq!(
                inject_noise(&labels, &TransitionMatrix::identity(3), seed).unwrap(),
                labels
            );
        }
        assert!(matches!(
            inject_noise(&[5], &fashion06(), 0),
            Err(Error::LabelOutOfRange { label: 5, classes: 3 })
        ));

        let n = 300_000;
        let noisy = inject_noise(&vec![0; n], &fashion06(), 42).unwrap();
        let mut counts = [0usize; 3];
        for y in noisy {
            counts[y] += 1;
        }
        for (c, e) in counts.iter().zip([0.4, 0.3, 0.3]) {
            assert!((*c as f64 / n as f64 - e).abs() <= 0.01);
        }
    }

    #[test]
    fn injection_is_deterministic() {
        let labels: Vec<usize> = (0..500).map(|i| i % 3).collect();
        let a = inject_noise(&labels, &fashion06(), 5).unwrap();
        let b = inject_noise(&labels, &fashion06(), 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, inject_noise(&labels, &fashion06(), 6).unwrap());
    }

    #[test]
    fn text_format_round_trips() {
        let t = fashion06();
        let parsed = TransitionMatrix::parse(&t.to_string()).unwrap();
        assert_eq!(parsed, t);
        let commas = TransitionMatrix::parse("# header\n0.4,0.3,0.3\n0.3, 0.4, 0.3\n\n0.3 0.3 0.4\n").unwrap();
        assert!(commas.matrix().max_abs_diff(t.matrix()) < 1e-15);
        assert!(matches!(
            TransitionMatrix::parse("0.5 x\n0.5 0.5"),
            Err(Error::Parse(_))
        ));
    }

    proptest! {
        #[test]
        fn noisy_posterior_stays_on_simplex(raw in proptest::collection::vec(0.0f64..1.0, 3)) {
            let s: f64 = raw.iter().sum();
            prop_assume!(s > 1e-6);
            let p = ProbVector::new(raw.iter().map(|x| x / s).collect()).unwrap();
            let out = noisy_posterior(&fashion06(), &p).unwrap();
            prop_assert!((out.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn identity_injection_is_identity(seed in any::<u64>(), labels in proptest::collection::vec(0usize..4, 0..64)) {
            prop_assert_eq!(inject_noise(&labels, &TransitionMatrix::identity(4), seed).unwrap(), labels);
        }

        #[test]
        fn flip_rate_ignores_off_diagonal_arrangement(a in 0.0f64..0.5) {
            let t1 = TransitionMatrix::validate(&[vec![0.5, a, 0.5 - a], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
            let t2 = TransitionMatrix::validate(&[vec![0.5, 0.5 - a, a], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
            prop_assert!((flip_rate(&t1).value() - flip_rate(&t2).value()).abs() < 1e-15);
        }
    }
}
