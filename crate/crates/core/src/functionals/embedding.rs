use num_traits::{Signed, Zero};

use super::{ConstantKind, ConstantReport, Witness};
use crate::error::{Error, Result};
use crate::measure::{BoundarySet, Measure, StepFunction};
use crate::rational::{from_f64, to_f64, Rational};
use crate::refine::{Refinement, DEFAULT_PIECE_CAP};
use crate::weight::Weight;

/// Largest refinement dimension accepted by `embedding_constant`.
pub const EMBEDDING_DIM_CAP: usize = 4096;
const MAX_ITERATIONS: usize = 200_000;

/// `Σ_Q α_Q (∫_Q φ dμ)² / ∫ φ² dμ`.
pub fn embedding_rayleigh(alpha: &Weight, mu: &Measure, phi: &StepFunction) -> Result<Rational> {
    let den = phi.square().integrate(mu);
    if den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let num = alpha.iter().fold(Rational::zero(), |acc, (q, a)| {
        let s = phi.integral_over(q, mu);
        acc + a * &s * &s
    });
    Ok(num / den)
}

pub fn embedding_constant(alpha: &Weight, mu: &Measure, tol: f64) -> Result<ConstantReport> {
    embedding_constant_with(alpha, mu, tol, None)
}

/// Largest eigenvalue of the form restricted to functions constant on refinement
/// classes. `hint` is scored as an indicator and used as restart vector.
pub fn embedding_constant_with(
    alpha: &Weight,
    mu: &Measure,
    tol: f64,
    hint: Option<&BoundarySet>,
) -> Result<ConstantReport> {
    let refn = Refinement::new(alpha, mu, DEFAULT_PIECE_CAP)?;
    let k = refn.classes.len();
    if k > EMBEDDING_DIM_CAP {
        return Err(Error::CapExceeded { size: k, cap: EMBEDDING_DIM_CAP });
    }
    let op = Operator::new(&refn);
    let mut phi = vec![1.0f64; k];
    if op.apply(&phi).iter().all(|&v| v == 0.0) {
        if let Some(h) = hint {
            phi = refn.classes.iter().map(|c| if h.contains_rect(&c.pieces[0].rect) { 1.0 } else { 0.0 }).collect();
        }
        if k == 0 || op.apply(&phi).iter().all(|&v| v == 0.0) {
            let w = StepFunction::constant(Rational::from_integer(1.into()));
            return Ok(ConstantReport {
                approx: Some((0.0, 0.0)),
                ..ConstantReport::exact(ConstantKind::Embedding, Rational::zero(), Witness::Function(w), "zero-operator")
            });
        }
    }
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    for it in 0..MAX_ITERATIONS {
        let t = op.apply(&phi);
        let norm = t.iter().cloned().fold(0.0f64, f64::max);
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        phi = t.into_iter().map(|v| v / norm).collect();
        if it % 16 == 0 {
            lo = op.rayleigh_f64(&phi);
            hi = op.collatz_f64(&phi);
            if hi - lo <= tol * hi.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
    }

    // exact certificates on the final iterate
    let phi_exact: Vec<Rational> = phi.iter().map(|&v| from_f64(v)).collect();
    let mut lower = op.rayleigh_exact(&phi_exact);
    let mut witness = Witness::Function(op.step_function(&refn, &phi_exact));
    if let Some(h) = hint {
        let ind = StepFunction::indicator(h);
        if let Ok(v) = embedding_rayleigh(alpha, mu, &ind) {
            if v > lower {
                lower = v;
                witness = Witness::Function(ind);
            }
        }
    }
    let upper = op.collatz_exact(&phi_exact);
    let exact = upper.as_ref() == Some(&lower);
    Ok(ConstantReport {
        kind: ConstantKind::Embedding,
        approx: Some((lo.max(to_f64(&lower)), upper.as_ref().map_or(hi, to_f64))),
        lower,
        upper,
        exact,
        witness,
        method: "power-iteration".to_string(),
    })
}

/// `(Tφ)_c = Σ_{Q ⊇ c} α_Q Σ_{d ⊆ Q} m_d φ_d` on classes.
struct Operator {
    alpha: Vec<Rational>,
    inside: Vec<Vec<usize>>,
    containing: Vec<Vec<usize>>,
    m: Vec<Rational>,
    alpha_f: Vec<f64>,
    m_f: Vec<f64>,
}

impl Operator {
    fn new(refn: &Refinement) -> Self {
        let alpha: Vec<Rational> = refn.support.iter().map(|(_, a)| a.clone()).collect();
        let m = refn.class_masses();
        Self {
            alpha_f: alpha.iter().map(to_f64).collect(),
            m_f: m.iter().map(to_f64).collect(),
            alpha,
            inside: refn.inside.clone(),
            containing: refn.classes.iter().map(|c| c.containing.clone()).collect(),
            m,
        }
    }

    fn sums_f64(&self, phi: &[f64]) -> Vec<f64> {
        self.inside.iter().map(|cs| cs.iter().map(|&d| self.m_f[d] * phi[d]).sum()).collect()
    }

    fn apply(&self, phi: &[f64]) -> Vec<f64> {
        let s = self.sums_f64(phi);
        self.containing.iter().map(|qs| qs.iter().map(|&q| self.alpha_f[q] * s[q]).sum()).collect()
    }

    fn rayleigh_f64(&self, phi: &[f64]) -> f64 {
        let s = self.sums_f64(phi);
        let num: f64 = s.iter().zip(&self.alpha_f).map(|(s, a)| a * s * s).sum();
        let den: f64 = phi.iter().zip(&self.m_f).map(|(p, m)| m * p * p).sum();
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    fn floored(phi: &[f64]) -> Vec<f64> {
        let top = phi.iter().cloned().fold(0.0f64, f64::max);
        let floor = (top * 1e-12).max(f64::MIN_POSITIVE);
        phi.iter().map(|&v| v.max(floor)).collect()
    }

    fn collatz_f64(&self, phi: &[f64]) -> f64 {
        let p = Self::floored(phi);
        let t = self.apply(&p);
        t.iter().zip(&p).map(|(t, p)| t / p).fold(0.0f64, f64::max)
    }

    fn sums_exact(&self, phi: &[Rational]) -> Vec<Rational> {
        self.inside
            .iter()
            .map(|cs| cs.iter().fold(Rational::zero(), |acc, &d| acc + &self.m[d] * &phi[d]))
            .collect()
    }

    fn rayleigh_exact(&self, phi: &[Rational]) -> Rational {
        let s = self.sums_exact(phi);
        let num = s.iter().zip(&self.alpha).fold(Rational::zero(), |acc, (s, a)| acc + a * s * s);
        let den = phi.iter().zip(&self.m).fold(Rational::zero(), |acc, (p, m)| acc + m * p * p);
        if den.is_zero() {
            Rational::zero()
        } else {
            num / den
        }
    }

    /// Collatz–Wielandt bound `max_c (Tφ)_c / φ_c` for a strictly positive floor of `φ`.
    fn collatz_exact(&self, phi: &[Rational]) -> Option<Rational> {
        let pf: Vec<f64> = phi.iter().map(to_f64).collect();
        let p: Vec<Rational> = Self::floored(&pf).into_iter().map(from_f64).collect();
        if p.iter().any(|v| !v.is_positive()) {
            return None;
        }
        let s = self.sums_exact(&p);
        self.containing
            .iter()
            .zip(&p)
            .map(|(qs, pc)| qs.iter().fold(Rational::zero(), |acc, &q| acc + &self.alpha[q] * &s[q]) / pc)
            .max()
    }

    fn step_function(&self, refn: &Refinement, phi: &[Rational]) -> StepFunction {
        let pieces = refn
            .classes
            .iter()
            .zip(phi)
            .flat_map(|(c, v)| c.pieces.iter().map(move |p| (p.rect.clone(), v.clone())))
            .collect();
        StepFunction::new(pieces).expect("refinement pieces are disjoint")
    }
}
