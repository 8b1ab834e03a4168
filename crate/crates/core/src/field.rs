//! Scalar functions on phase space (observables, invariants, functionals).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::state::PhaseState;
use crate::system::{central_partial, HamiltonianSystem};

type EvalFn = Arc<dyn Fn(&PhaseState) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&PhaseState) -> (Vec<f64>, Vec<f64>) + Send + Sync>;
type SingularFn = Arc<dyn Fn(&PhaseState) -> bool + Send + Sync>;

/// Half-width of the exclusion band around the zero set of a denominator.
pub const SINGULAR_BAND: f64 = 0.1;

/// A named scalar field `φ(q, p)` with an optional analytic gradient and an
/// optional singular set excluded from evaluation.
#[derive(Clone)]
pub struct ScalarField {
    name: String,
    eval: EvalFn,
    gradient: Option<GradFn>,
    singular: Option<SingularFn>,
    reciprocal: Option<String>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new(name: impl Into<String>, eval: impl Fn(&PhaseState) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            name: name.into(),
            eval: Arc::new(eval),
            gradient: None,
            singular: None,
            reciprocal: None,
        }
    }

    pub fn with_gradient(
        mut self,
        g: impl Fn(&PhaseState) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_singular_set(mut self, f: impl Fn(&PhaseState) -> bool + Send + Sync + 'static) -> Self {
        self.singular = Some(Arc::new(f));
        self
    }

    /// Name of a companion field that is regular where this one is singular.
    pub fn with_reciprocal_hint(mut self, name: impl Into<String>) -> Self {
        self.reciprocal = Some(name.into());
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, s: &PhaseState) -> f64 {
        (self.eval)(s)
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// `(∂φ/∂q, ∂φ/∂p)`, analytic when supplied, else central differences.
    pub fn gradient(&self, s: &PhaseState) -> (Vec<f64>, Vec<f64>) {
        if let Some(g) = &self.gradient {
            return g(s);
        }
        let n = s.dim();
        let f = &*self.eval;
        let gq = (0..n).map(|i| central_partial(f, s, i)).collect();
        let gp = (0..n).map(|i| central_partial(f, s, n + i)).collect();
        (gq, gp)
    }

    pub fn is_singular(&self, s: &PhaseState) -> bool {
        self.singular.as_ref().is_some_and(|f| f(s))
    }

    pub fn reciprocal_hint(&self) -> Option<&str> {
        self.reciprocal.as_deref()
    }

    pub fn energy(sys: &HamiltonianSystem) -> Self {
        let e = sys.energy_fn();
        let gsys = sys.clone();
        ScalarField::new("H", move |s| e(s))
            .with_gradient(move |s| (gsys.grad_q(s), gsys.grad_p(s)))
    }

    pub fn twice_energy(sys: &HamiltonianSystem) -> Self {
        let e = sys.energy_fn();
        let gsys = sys.clone();
        ScalarField::new("2H", move |s| 2.0 * e(s)).with_gradient(move |s| {
            let scale = |v: Vec<f64>| v.into_iter().map(|x| 2.0 * x).collect();
            (scale(gsys.grad_q(s)), scale(gsys.grad_p(s)))
        })
    }

    /// `q_j / p_j` with exclusion band `|p_j| < band`.
    pub fn ratio_q_over_p(j: usize, band: f64) -> Self {
        let name = if j == 0 { "x/p".to_string() } else { format!("q{0}/p{0}", j + 1) };
        let hint = if j == 0 { "p/x".to_string() } else { format!("p{0}/q{0}", j + 1) };
        ScalarField::new(name, move |s| s.q()[j] / s.p()[j])
            .with_gradient(move |s| {
                let n = s.dim();
                let (x, p) = (s.q()[j], s.p()[j]);
                let mut gq = vec![0.0; n];
                let mut gp = vec![0.0; n];
                gq[j] = 1.0 / p;
                gp[j] = -x / (p * p);
                (gq, gp)
            })
            .with_singular_set(move |s| s.p()[j].abs() < band)
            .with_reciprocal_hint(hint)
    }

    /// `p_j / q_j` with exclusion band `|q_j| < band`.
    pub fn ratio_p_over_q(j: usize, band: f64) -> Self {
        let name = if j == 0 { "p/x".to_string() } else { format!("p{0}/q{0}", j + 1) };
        let hint = if j == 0 { "x/p".to_string() } else { format!("q{0}/p{0}", j + 1) };
        ScalarField::new(name, move |s| s.p()[j] / s.q()[j])
            .with_gradient(move |s| {
                let n = s.dim();
                let (x, p) = (s.q()[j], s.p()[j]);
                let mut gq = vec![0.0; n];
                let mut gp = vec![0.0; n];
                gq[j] = -p / (x * x);
                gp[j] = 1.0 / x;
                (gq, gp)
            })
            .with_singular_set(move |s| s.q()[j].abs() < band)
            .with_reciprocal_hint(hint)
    }

    /// Resolves a functional by name: `H`, `2H`, `x/p`, `p/x`, `q<j>/p<j>`, `p<j>/q<j>`.
    pub fn parse(name: &str, sys: &HamiltonianSystem, band: f64) -> Result<Self> {
        let field = match name {
            "H" => ScalarField::energy(sys),
            "2H" => ScalarField::twice_energy(sys),
            "x/p" => ScalarField::ratio_q_over_p(0, band),
            "p/x" => ScalarField::ratio_p_over_q(0, band),
            other => {
                let parsed = other.split_once('/').and_then(|(a, b)| {
                    let ia = a.strip_prefix('q').and_then(|r| r.parse::<usize>().ok());
                    let ib = b.strip_prefix('p').and_then(|r| r.parse::<usize>().ok());
                    let ja = a.strip_prefix('p').and_then(|r| r.parse::<usize>().ok());
                    let jb = b.strip_prefix('q').and_then(|r| r.parse::<usize>().ok());
                    match (ia, ib, ja, jb) {
                        (Some(i), Some(k), _, _) if i == k && i >= 1 => {
                            Some(ScalarField::ratio_q_over_p(i - 1, band))
                        }
                        (_, _, Some(i), Some(k)) if i == k && i >= 1 => {
                            Some(ScalarField::ratio_p_over_q(i - 1, band))
                        }
                        _ => None,
                    }
                });
                parsed.ok_or_else(|| Error::Parameter(format!("unknown functional '{other}'")))?
            }
        };
        if let Some(j) = field_index(&field) {
            if j >= sys.dim() {
                return Err(Error::Parameter(format!(
                    "functional '{name}' needs coordinate {} but system has dimension {}",
                    j + 1,
                    sys.dim()
                )));
            }
        }
        Ok(field)
    }
}

fn field_index(f: &ScalarField) -> Option<usize> {
    let n = f.name();
    if n == "x/p" || n == "p/x" {
        return Some(0);
    }
    n.split_once('/')
        .and_then(|(a, _)| a[1..].parse::<usize>().ok())
        .map(|j| j - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::make_harmonic_oscillator;

    #[test]
    fn ratio_gradient_matches_finite_differences() {
        let f = ScalarField::ratio_q_over_p(0, SINGULAR_BAND);
        let s = PhaseState::one_d(0.7, -1.3).unwrap();
        let (gq, gp) = f.gradient(&s);
        let bare = ScalarField::new("x/p", |s| s.q()[0] / s.p()[0]);
        let (nq, np) = bare.gradient(&s);
        assert!((gq[0] - nq[0]).abs() < 1e-8);
        assert!((gp[0] - np[0]).abs() < 1e-8);
    }

    #[test]
    fn singular_band_and_hint() {
        let f = ScalarField::ratio_q_over_p(0, SINGULAR_BAND);
        assert!(f.is_singular(&PhaseState::one_d(1.0, 0.05).unwrap()));
        assert!(!f.is_singular(&PhaseState::one_d(1.0, 0.5).unwrap()));
        assert_eq!(f.reciprocal_hint(), Some("p/x"));
    }

    #[test]
    fn parse_names() {
        let ho = make_harmonic_oscillator();
        let s = PhaseState::one_d(1.0, 2.0).unwrap();
        assert_eq!(ScalarField::parse("2H", &ho, 0.1).unwrap().eval(&s), 5.0);
        assert_eq!(ScalarField::parse("H", &ho, 0.1).unwrap().eval(&s), 2.5);
        assert_eq!(ScalarField::parse("x/p", &ho, 0.1).unwrap().eval(&s), 0.5);
        assert_eq!(ScalarField::parse("p1/q1", &ho, 0.1).unwrap().eval(&s), 2.0);
        assert!(ScalarField::parse("q2/p2", &ho, 0.1).is_err());
        assert!(ScalarField::parse("bogus", &ho, 0.1).is_err());
    }
}
