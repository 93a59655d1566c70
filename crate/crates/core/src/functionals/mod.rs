//! Energies, potentials, and the box, Carleson, REC, and embedding constants.

mod boxc;
mod carleson;
mod embedding;
mod hooked;
pub mod oracle;
mod rec;

use num_traits::Zero;
use serde::{Serialize, Serializer};

pub use boxc::{box_constant, box_ratio};
pub use carleson::{carleson_constant, carleson_constant_with, carleson_energy, CarlesonStrategy};
pub use embedding::{embedding_constant, embedding_constant_with, embedding_rayleigh, EMBEDDING_DIM_CAP};
pub use rec::{rec_constant, rec_constant_with, rec_energy, REC_EXACT_CLASS_CAP};

use crate::bigrid::DyadicRect;
use crate::error::Result;
use crate::measure::{BoundarySet, Measure, StepFunction};
use crate::rational::{format_rational, Rational};
use crate::refine::{Refinement, DEFAULT_PIECE_CAP};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantKind {
    Box,
    Carleson,
    Rec,
    Embedding,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    None,
    Rect(DyadicRect),
    Set(BoundarySet),
    Function(StepFunction),
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(2))?;
        match self {
            Witness::None => {
                m.serialize_entry("type", "none")?;
            }
            Witness::Rect(r) => {
                m.serialize_entry("type", "rect")?;
                m.serialize_entry("rect", r)?;
            }
            Witness::Set(e) => {
                m.serialize_entry("type", "set")?;
                m.serialize_entry("set", e)?;
            }
            Witness::Function(f) => {
                m.serialize_entry("type", "function")?;
                m.serialize_entry("function", f)?;
            }
        }
        m.end()
    }
}

/// A constant with a certified lower bound (re-evaluated on the witness) and,
/// when known, an upper bound.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantReport {
    pub kind: ConstantKind,
    pub lower: Rational,
    pub upper: Option<Rational>,
    pub exact: bool,
    pub witness: Witness,
    pub method: String,
    /// Floating brackets, only for the embedding constant.
    pub approx: Option<(f64, f64)>,
}

impl ConstantReport {
    pub(crate) fn exact(kind: ConstantKind, value: Rational, witness: Witness, method: &str) -> Self {
        Self {
            kind,
            upper: Some(value.clone()),
            lower: value,
            exact: true,
            witness,
            method: method.to_string(),
            approx: None,
        }
    }

    pub(crate) fn lower_bound(kind: ConstantKind, lower: Rational, witness: Witness, method: &str) -> Self {
        Self { kind, lower, upper: None, exact: false, witness, method: method.to_string(), approx: None }
    }

    /// The value when exact.
    pub fn value(&self) -> Option<&Rational> {
        self.exact.then_some(&self.lower)
    }

    /// Best known upper bound, or the lower bound when exact.
    pub fn best_upper(&self) -> Option<&Rational> {
        self.upper.as_ref()
    }

    pub fn witness_set(&self) -> Option<&BoundarySet> {
        match &self.witness {
            Witness::Set(e) => Some(e),
            _ => None,
        }
    }
}

impl Serialize for ConstantReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ConstantReport", 7)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("lower", &format_rational(&self.lower))?;
        st.serialize_field("upper", &self.upper.as_ref().map(format_rational))?;
        st.serialize_field("exact", &self.exact)?;
        st.serialize_field("method", &self.method)?;
        if let Some((lo, hi)) = self.approx {
            st.serialize_field("approx", &[lo, hi])?;
        }
        st.serialize_field("witness", &self.witness)?;
        st.end()
    }
}

/// The functional of `report.kind` evaluated on its witness; `None` without one.
pub fn reevaluate_witness(report: &ConstantReport, alpha: &Weight, mu: &Measure) -> Result<Option<Rational>> {
    let ratio = |num: Rational, e: &BoundarySet| crate::rational::ratio_or_zero(&num, &mu.mass_of(e));
    Ok(match (&report.witness, report.kind) {
        (Witness::None, _) => None,
        (Witness::Rect(r), ConstantKind::Box) => Some(box_ratio(alpha, mu, r)),
        (Witness::Rect(r), kind) => {
            let e = BoundarySet::from_rect(r.clone());
            reevaluate_set(kind, alpha, mu, &e).map(|n| ratio(n, &e))
        }
        (Witness::Set(e), kind) => reevaluate_set(kind, alpha, mu, e).map(|n| ratio(n, e)),
        (Witness::Function(f), _) => Some(embedding_rayleigh(alpha, mu, f)?),
    })
}

fn reevaluate_set(kind: ConstantKind, alpha: &Weight, mu: &Measure, e: &BoundarySet) -> Option<Rational> {
    match kind {
        ConstantKind::Box | ConstantKind::Carleson => Some(carleson_energy(alpha, mu, e)),
        ConstantKind::Rec => Some(rec_energy(alpha, mu, e)),
        ConstantKind::Embedding => None,
    }
}

/// `Σ_R α_R μ(R) ν(R)`.
pub fn energy(alpha: &Weight, mu: &Measure, nu: &Measure) -> Rational {
    let mut acc = Rational::zero();
    for (r, a) in alpha.iter() {
        let m = mu.mass(r);
        if m.is_zero() {
            continue;
        }
        let n = nu.mass(r);
        if !n.is_zero() {
            acc += a * m * n;
        }
    }
    acc
}

/// `𝕍^μ(x) = Σ_{R ⊇ x} α_R μ(R)`.
pub fn potential(alpha: &Weight, mu: &Measure, x: &DyadicRect) -> Rational {
    alpha
        .iter()
        .filter(|(r, _)| r.contains(x))
        .fold(Rational::zero(), |acc, (r, a)| acc + a * mu.mass(r))
}

/// `𝕍^μ` read on the atoms of `support`, as a step function.
///
/// Exact as a function on `supp(support)` when every support rectangle of `α`
/// either contains or misses each atom, as for hooked weights and quadrant atoms.
pub fn potential_function(alpha: &Weight, mu: &Measure, support: &Measure) -> StepFunction {
    StepFunction::from_disjoint(
        support
            .atoms()
            .iter()
            .map(|a| (a.support.clone(), potential(alpha, mu, &a.support)))
            .filter(|(_, v)| !v.is_zero())
            .collect(),
    )
}

/// `𝕍^μ` on every support rectangle's contribution, `α_Q μ(Q)` in support order.
fn support_coefficients(refn: &Refinement, mu: &Measure) -> Vec<Rational> {
    refn.support.iter().map(|(r, a)| a * mu.mass(r)).collect()
}

fn potential_on_classes(refn: &Refinement, coeff: &[Rational]) -> Vec<Rational> {
    refn.classes
        .iter()
        .map(|c| c.containing.iter().fold(Rational::zero(), |acc, &q| acc + &coeff[q]))
        .collect()
}

/// `∫ 𝕍^μ dν`, integrating the potential over the refinement of `ν`.
pub fn potential_pair_integral(alpha: &Weight, mu: &Measure, nu: &Measure) -> Result<Rational> {
    let refn = Refinement::new(alpha, nu, DEFAULT_PIECE_CAP)?;
    let coeff = support_coefficients(&refn, mu);
    let v = potential_on_classes(&refn, &coeff);
    Ok(refn.classes.iter().zip(&v).fold(Rational::zero(), |acc, (c, v)| acc + &c.mass * v))
}

/// `∫ (𝕍^μ)² dν`, integrating over the refinement of `ν`.
pub fn potential_square_integral(alpha: &Weight, mu: &Measure, nu: &Measure) -> Result<Rational> {
    let refn = Refinement::new(alpha, nu, DEFAULT_PIECE_CAP)?;
    let coeff = support_coefficients(&refn, mu);
    let v = potential_on_classes(&refn, &coeff);
    Ok(refn.classes.iter().zip(&v).fold(Rational::zero(), |acc, (c, v)| acc + &c.mass * v * v))
}
