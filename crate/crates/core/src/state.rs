use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point `(q, p)` of a `2N`-dimensional phase space with a time tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    q: Vec<f64>,
    p: Vec<f64>,
    #[serde(default)]
    t: f64,
}

impl PhaseState {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        Self::at_time(q, p, 0.0)
    }

    pub fn at_time(q: Vec<f64>, p: Vec<f64>, t: f64) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::Parameter("phase space dimension must be at least 1".into()));
        }
        if q.len() != p.len() {
            return Err(Error::Parameter(format!(
                "q has {} components but p has {}",
                q.len(),
                p.len()
            )));
        }
        let s = PhaseState { q, p, t };
        if !s.is_finite() {
            return Err(Error::Parameter(format!("non-finite phase state {s:?}")));
        }
        Ok(s)
    }

    /// One-degree-of-freedom state `(x, p)` at `t = 0`.
    pub fn one_d(x: f64, p: f64) -> Result<Self> {
        Self::new(vec![x], vec![p])
    }

    /// Builds a state from stacked coordinates `[q_1..q_N, p_1..p_N]`.
    pub fn from_coords(coords: &[f64], t: f64) -> Result<Self> {
        if coords.len() % 2 != 0 {
            return Err(Error::Parameter(format!(
                "odd coordinate count {}",
                coords.len()
            )));
        }
        let n = coords.len() / 2;
        Self::at_time(coords[..n].to_vec(), coords[n..].to_vec(), t)
    }

    /// Unchecked constructor for intermediate points (stencils, stages).
    pub(crate) fn raw(q: Vec<f64>, p: Vec<f64>, t: f64) -> Self {
        debug_assert_eq!(q.len(), p.len());
        PhaseState { q, p, t }
    }

    pub(crate) fn raw_coords(coords: &[f64], t: f64) -> Self {
        let n = coords.len() / 2;
        PhaseState::raw(coords[..n].to_vec(), coords[n..].to_vec(), t)
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// Stacked coordinates `[q, p]`.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(2 * self.dim());
        c.extend_from_slice(&self.q);
        c.extend_from_slice(&self.p);
        c
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.q.iter().chain(&self.p).all(|v| v.is_finite())
    }

    /// Squared Euclidean distance in phase space (time tags ignored).
    pub fn distance_sq(&self, other: &PhaseState) -> f64 {
        self.q
            .iter()
            .zip(&other.q)
            .chain(self.p.iter().zip(&other.p))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Largest absolute coordinate difference (time tags ignored).
    pub fn max_abs_diff(&self, other: &PhaseState) -> f64 {
        self.q
            .iter()
            .zip(&other.q)
            .chain(self.p.iter().zip(&other.p))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn norm_inf(&self) -> f64 {
        self.q.iter().chain(&self.p).map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Checks that a computed state is finite, naming the producer on failure.
    pub(crate) fn checked(self, what: &str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::Numerical(format!("{what} produced a non-finite state")))
        }
    }
}
