//! Anchor-point estimation of the transition matrix from noisy-class
//! posteriors.
//!
//! For every class `c` the instance with the largest `P(noisy = c | x)` is
//! taken as a surrogate anchor point of clean class `c`; its whole posterior
//! vector becomes row `c` of the estimate.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, ProbVector};
use crate::noise::TransitionMatrix;

/// Noisy-class posteriors with per-instance identifiers.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorBatch {
    num_classes: usize,
    ids: Vec<u64>,
    rows: Vec<ProbVector>,
}

impl PosteriorBatch {
    pub fn new(num_classes: usize, ids: Vec<u64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if ids.len() != rows.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: rows.len(),
            });
        }
        let rows = rows
            .into_iter()
            .map(|r| {
                if r.len() != num_classes {
                    return Err(Error::DimensionMismatch {
                        expected: num_classes,
                        found: r.len(),
                    });
                }
                ProbVector::new(r)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PosteriorBatch { num_classes, ids, rows })
    }

    /// Identifiers `0..n` in order.
    pub fn from_rows(num_classes: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let ids = (0..rows.len() as u64).collect();
        Self::new(num_classes, ids, rows)
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn rows(&self) -> &[ProbVector] {
        &self.rows
    }

    /// Interchange format: a `C=<n>` header line, then `id,p_0,..,p_{C-1}`
    /// per instance.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or(Error::EmptyInput)?;
        let c: usize = header
            .strip_prefix("C=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("expected header C=<n>, got {header:?}")))?;
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            let mut fields = line.split(',').map(str::trim);
            let id = fields
                .next()
                .and_then(|f| f.parse::<u64>().ok())
                .ok_or_else(|| Error::Parse(format!("record {}: bad identifier", k + 1)))?;
            let probs = fields
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("record {}: bad probability {f:?}", k + 1)))
                })
                .collect::<Result<Vec<f64>>>()?;
            ids.push(id);
            rows.push(probs);
        }
        Self::new(c, ids, rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("C={}\n", self.num_classes);
        for (id, row) in self.ids.iter().zip(&self.rows) {
            let _ = write!(out, "{id}");
            for p in row.as_slice() {
                let _ = write!(out, ",{p}");
            }
            out.push('\n');
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Estimates `T` by surrogate anchor points.
///
/// With `top_k = 1` each row is the posterior of the single instance that
/// maximizes that class's probability, ties going to the lowest identifier.
/// Larger `top_k` averages the `k` best candidates. A class whose best
/// probability is no better than uniform has no usable anchor.
pub fn estimate_transition(batch: &PosteriorBatch, top_k: usize) -> Result<TransitionMatrix> {
    if batch.is_empty() {
        return Err(Error::EmptyInput);
    }
    if top_k == 0 {
        return Err(Error::ConfigInvalid("top_k must be at least 1".into()));
    }
    let c = batch.num_classes;
    let uniform = 1.0 / c as f64;
    let mut rows = Vec::with_capacity(c);
    for class in 0..c {
        let mut order: Vec<usize> = (0..batch.len()).collect();
        let key = |i: usize| batch.rows[i].as_slice()[class];
        order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(batch.ids[a].cmp(&batch.ids[b])));
        let best = key(order[0]);
        if best <= uniform + 1e-6 {
            return Err(Error::NoAnchorCandidate { class, best });
        }
        let chosen = &order[..top_k.min(order.len())];
        let mut row = vec![0.0; c];
        for &i in chosen {
            for (r, p) in row.iter_mut().zip(batch.rows[i].as_slice()) {
                *r += p;
            }
        }
        let sum: f64 = row.iter().sum();
        rows.push(row.into_iter().map(|v| v / sum).collect::<Vec<_>>());
    }
    TransitionMatrix::validate(&rows)
}

/// Entrywise `true − estimated`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorMatrix(Matrix);

impl ErrorMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if let Some((k, &v)) = m
            .as_slice()
            .iter()
            .enumerate()
            .find(|(_, v)| !(-1.0..=1.0).contains(*v))
        {
            return Err(Error::EntryOutOfRange {
                row: k / m.cols(),
                col: k % m.cols(),
                value: v,
            });
        }
        Ok(ErrorMatrix(m))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

impl Serialize for ErrorMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.to_rows().serialize(s)
    }
}

pub fn estimation_error(true_t: &TransitionMatrix, est_t: &TransitionMatrix) -> Result<ErrorMatrix> {
    let (a, b) = (true_t.matrix(), est_t.matrix());
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: b.rows(),
        });
    }
    let data = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x - y).collect();
    ErrorMatrix::new(Matrix::new(a.rows(), a.cols(), data)?)
}

pub fn max_abs_error(e: &ErrorMatrix) -> f64 {
    e.0.as_slice().iter().fold(0.0, |m, v| m.max(v.abs()))
}
