//! Measures on the boundary as finite sums of uniform atoms, boundary sets, and
//! step functions. Everything is exact.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bigrid::{DyadicRect, Geometry};
use crate::error::{Error, Result};
use crate::rational::{pow2, Rational};

/// Mass spread uniformly over a dyadic rectangle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(rename = "rect")]
    pub support: DyadicRect,
    #[serde(with = "crate::rational::serde_rational")]
    pub mass: Rational,
}

impl Atom {
    pub fn new(support: DyadicRect, mass: Rational) -> Self {
        Self { support, mass }
    }

    /// Mass of this atom inside `r`.
    pub fn mass_in(&self, r: &DyadicRect) -> Rational {
        match r.intersect(&self.support) {
            None => Rational::zero(),
            Some(i) => {
                let drop = i.area_exponent() - self.support.area_exponent();
                if drop == 0 {
                    self.mass.clone()
                } else {
                    &self.mass * pow2(-(drop as i64))
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Measure {
    geometry: Geometry,
    atoms: Vec<Atom>,
}

impl Measure {
    pub fn new(geometry: Geometry, atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            geometry.check(&a.support)?;
            if a.mass.is_negative() {
                return Err(Error::BadParameter(format!("negative mass on {}", a.support)));
            }
        }
        for (i, a) in atoms.iter().enumerate() {
            for b in &atoms[i + 1..] {
                if a.support.intersects(&b.support) {
                    return Err(Error::BadParameter(format!(
                        "atoms {} and {} overlap",
                        a.support, b.support
                    )));
                }
            }
        }
        Ok(Self { geometry, atoms })
    }

    pub fn empty(geometry: Geometry) -> Self {
        Self { geometry, atoms: Vec::new() }
    }

    pub fn uniform(geometry: Geometry, support: DyadicRect, mass: Rational) -> Result<Self> {
        Self::new(geometry, vec![Atom::new(support, mass)])
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn mass(&self, r: &DyadicRect) -> Rational {
        self.atoms.iter().fold(Rational::zero(), |acc, a| acc + a.mass_in(r))
    }

    pub fn mass_of(&self, e: &BoundarySet) -> Rational {
        e.members().iter().fold(Rational::zero(), |acc, m| acc + self.mass(m))
    }

    pub fn total(&self) -> Rational {
        self.atoms.iter().fold(Rational::zero(), |acc, a| acc + &a.mass)
    }

    /// `μ|E`: atoms cut down to their intersections with the members of `e`.
    pub fn restrict(&self, e: &BoundarySet) -> Measure {
        let mut atoms = Vec::new();
        for a in &self.atoms {
            for m in e.members() {
                if let Some(i) = a.support.intersect(m) {
                    let mass = a.mass_in(&i);
                    atoms.push(Atom::new(i, mass));
                }
            }
        }
        Measure { geometry: self.geometry, atoms }
    }

    pub fn scaled(&self, c: &Rational) -> Measure {
        Measure {
            geometry: self.geometry,
            atoms: self.atoms.iter().map(|a| Atom::new(a.support.clone(), &a.mass * c)).collect(),
        }
    }

    /// Sum of two measures. Atoms on identical supports merge; otherwise supports
    /// must be disjoint.
    pub fn plus(&self, other: &Measure) -> Result<Measure> {
        if self.geometry != other.geometry {
            return Err(Error::GeometryMismatch("measures on different depths".into()));
        }
        let mut atoms = self.atoms.clone();
        for b in &other.atoms {
            if let Some(a) = atoms.iter_mut().find(|a| a.support == b.support) {
                a.mass += &b.mass;
            } else {
                atoms.push(b.clone());
            }
        }
        Measure::new(self.geometry, atoms)
    }

    /// Same atoms on a deeper (or equal) geometry.
    pub fn with_geometry(&self, geometry: Geometry) -> Result<Measure> {
        Measure::new(geometry, self.atoms.clone())
    }

    pub fn support_set(&self) -> BoundarySet {
        BoundarySet::from_rects(
            self.atoms.iter().filter(|a| !a.mass.is_zero()).map(|a| a.support.clone()),
        )
    }
}

/// `r \ s` as a list of disjoint dyadic rectangles.
pub fn rect_difference(r: &DyadicRect, s: &DyadicRect) -> Vec<DyadicRect> {
    let Some(target) = r.intersect(s) else {
        return vec![r.clone()];
    };
    let mut out = Vec::new();
    let mut cur = r.clone();
    while cur.x.level() < target.x.level() {
        let (lo, hi) = cur.x_halves();
        if lo.x.contains(&target.x) {
            out.push(hi);
            cur = lo;
        } else {
            out.push(lo);
            cur = hi;
        }
    }
    while cur.y.level() < target.y.level() {
        let (lo, hi) = cur.y_halves();
        if lo.y.contains(&target.y) {
            out.push(hi);
            cur = lo;
        } else {
            out.push(lo);
            cur = hi;
        }
    }
    debug_assert_eq!(cur, target);
    out
}

/// A union of boundary cells, held as disjoint dyadic rectangles.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoundarySet {
    members: Vec<DyadicRect>,
}

impl BoundarySet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self { members: vec![DyadicRect::root()] }
    }

    pub fn from_rect(r: DyadicRect) -> Self {
        Self { members: vec![r] }
    }

    /// Union of arbitrary (possibly overlapping) rectangles, in canonical form.
    pub fn from_rects<I: IntoIterator<Item = DyadicRect>>(rects: I) -> Self {
        let mut members: Vec<DyadicRect> = Vec::new();
        for r in rects {
            let mut pieces = vec![r];
            for m in &members {
                if pieces.is_empty() {
                    break;
                }
                pieces = pieces.iter().flat_map(|p| rect_difference(p, m)).collect();
            }
            members.extend(pieces);
        }
        let mut set = Self { members };
        set.canonicalize();
        set
    }

    /// Merge sibling pairs into their parents until nothing merges, then sort.
    fn canonicalize(&mut self) {
        let mut set: BTreeSet<DyadicRect> = self.members.drain(..).collect();
        loop {
            let mut merged = None;
            for m in &set {
                for along_x in [true, false] {
                    let (axis, other) = if along_x { (&m.x, &m.y) } else { (&m.y, &m.x) };
                    let Some(sib) = axis.sibling() else { continue };
                    let partner = if along_x {
                        DyadicRect::new(sib, other.clone())
                    } else {
                        DyadicRect::new(other.clone(), sib)
                    };
                    if set.contains(&partner) {
                        let parent_axis = axis.parent().expect("sibling implies parent");
                        let parent = if along_x {
                            DyadicRect::new(parent_axis, other.clone())
                        } else {
                            DyadicRect::new(other.clone(), parent_axis)
                        };
                        merged = Some((m.clone(), partner, parent));
                        break;
                    }
                }
                if merged.is_some() {
                    break;
                }
            }
            match merged {
                Some((a, b, p)) => {
                    set.remove(&a);
                    set.remove(&b);
                    set.insert(p);
                }
                None => break,
            }
        }
        self.members = set.into_iter().collect();
    }

    pub fn members(&self) -> &[DyadicRect] {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn area(&self) -> Rational {
        self.members.iter().fold(Rational::zero(), |acc, m| acc + m.area())
    }

    /// Exact area of `q ∩ self`.
    pub fn area_within(&self, q: &DyadicRect) -> Rational {
        self.members
            .iter()
            .filter_map(|m| m.intersect(q))
            .fold(Rational::zero(), |acc, i| acc + i.area())
    }

    /// `q ⊆ self`, decided by comparing the covered area with the area of `q`.
    pub fn contains_rect(&self, q: &DyadicRect) -> bool {
        if self.members.iter().any(|m| m.contains(q)) {
            return true;
        }
        self.area_within(q) == q.area()
    }

    pub fn contains_set(&self, other: &BoundarySet) -> bool {
        other.members.iter().all(|m| self.contains_rect(m))
    }

    pub fn union(&self, other: &BoundarySet) -> BoundarySet {
        BoundarySet::from_rects(self.members.iter().chain(other.members.iter()).cloned())
    }

    pub fn same_cells(&self, other: &BoundarySet) -> bool {
        self.contains_set(other) && other.contains_set(self)
    }
}

/// Finitely many constant pieces on disjoint rectangles, zero elsewhere.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct StepFunction {
    pieces: Vec<(DyadicRect, Rational)>,
}

#[derive(Serialize, Deserialize)]
struct PieceRecord {
    rect: DyadicRect,
    #[serde(with = "crate::rational::serde_rational")]
    value: Rational,
}

impl Serialize for StepFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let recs: Vec<PieceRecord> = self
            .pieces
            .iter()
            .map(|(r, v)| PieceRecord { rect: r.clone(), value: v.clone() })
            .collect();
        recs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let recs = Vec::<PieceRecord>::deserialize(d)?;
        StepFunction::new(recs.into_iter().map(|p| (p.rect, p.value)).collect())
            .map_err(serde::de::Error::custom)
    }
}

impl StepFunction {
    pub fn new(pieces: Vec<(DyadicRect, Rational)>) -> Result<Self> {
        for (i, (a, _)) in pieces.iter().enumerate() {
            for (b, _) in &pieces[i + 1..] {
                if a.intersects(b) {
                    return Err(Error::BadParameter(format!("pieces {a} and {b} overlap")));
                }
            }
        }
        Ok(Self { pieces })
    }

    /// Caller guarantees the rectangles are pairwise disjoint.
    pub(crate) fn from_disjoint(pieces: Vec<(DyadicRect, Rational)>) -> Self {
        Self { pieces }
    }

    pub fn constant(c: Rational) -> Self {
        Self { pieces: vec![(DyadicRect::root(), c)] }
    }

    pub fn indicator(e: &BoundarySet) -> Self {
        Self { pieces: e.members().iter().map(|m| (m.clone(), Rational::from_integer(1.into()))).collect() }
    }

    pub fn pieces(&self) -> &[(DyadicRect, Rational)] {
        &self.pieces
    }

    /// Value on a rectangle lying inside a single piece (0 if none contains it).
    pub fn value_on(&self, r: &DyadicRect) -> Rational {
        self.pieces
            .iter()
            .find(|(p, _)| p.contains(r))
            .map(|(_, v)| v.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn map(&self, f: impl Fn(&Rational) -> Rational) -> StepFunction {
        StepFunction { pieces: self.pieces.iter().map(|(r, v)| (r.clone(), f(v))).collect() }
    }

    pub fn square(&self) -> StepFunction {
        self.map(|v| v * v)
    }

    pub fn abs(&self) -> StepFunction {
        self.map(|v| v.abs())
    }

    pub fn scaled(&self, c: &Rational) -> StepFunction {
        self.map(|v| v * c)
    }

    /// `∫_R φ dμ`.
    pub fn integral_over(&self, r: &DyadicRect, mu: &Measure) -> Rational {
        let mut acc = Rational::zero();
        for (p, v) in &self.pieces {
            if v.is_zero() {
                continue;
            }
            if let Some(i) = p.intersect(r) {
                acc += v * mu.mass(&i);
            }
        }
        acc
    }

    /// `∫ φ dμ`.
    pub fn integrate(&self, mu: &Measure) -> Rational {
        self.pieces.iter().fold(Rational::zero(), |acc, (p, v)| acc + v * mu.mass(p))
    }

    /// Pointwise sum on the common refinement.
    pub fn add(&self, other: &StepFunction) -> StepFunction {
        let mut pieces = Vec::new();
        for (a, va) in &self.pieces {
            let mut rest = vec![a.clone()];
            for (b, vb) in &other.pieces {
                if let Some(i) = a.intersect(b) {
                    pieces.push((i, va + vb));
                    rest = rest.iter().flat_map(|p| rect_difference(p, b)).collect();
                }
            }
            pieces.extend(rest.into_iter().map(|p| (p, va.clone())));
        }
        for (b, vb) in &other.pieces {
            let mut rest = vec![b.clone()];
            for (a, _) in &self.pieces {
                if a.intersects(b) {
                    rest = rest.iter().flat_map(|p| rect_difference(p, a)).collect();
                }
            }
            pieces.extend(rest.into_iter().map(|p| (p, vb.clone())));
        }
        StepFunction { pieces }
    }
}

/// `∫ ψ dμ`.
pub fn integrate(psi: &StepFunction, mu: &Measure) -> Rational {
    psi.integrate(mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn r(s: &str) -> DyadicRect {
        s.parse().unwrap()
    }

    fn lebesgue(depth: u32) -> Measure {
        Measure::uniform(Geometry::new(depth), DyadicRect::root(), int(1)).unwrap()
    }

    #[test]
    fn mass_by_area_ratio() {
        let mu = lebesgue(2);
        assert_eq!(mu.mass(&DyadicRect::hooked(1, 1)), rat(1, 4));
        assert_eq!(mu.total(), int(1));
        assert_eq!(Measure::empty(Geometry::new(3)).total(), int(0));
    }

    #[test]
    fn restriction_examples() {
        let mu = lebesgue(2);
        assert!(mu.restrict(&BoundarySet::empty()).atoms().is_empty());
        let half = mu.restrict(&BoundarySet::from_rect(r("x:1/0,y:0/0")));
        assert_eq!(half.atoms().len(), 1);
        assert_eq!(half.total(), rat(1, 2));
        assert_eq!(mu.restrict(&BoundarySet::full()), mu);
    }

    #[test]
    fn overlapping_atoms_rejected() {
        let g = Geometry::new(2);
        let atoms = vec![
            Atom::new(DyadicRect::root(), int(1)),
            Atom::new(DyadicRect::hooked(1, 1), int(1)),
        ];
        assert!(Measure::new(g, atoms).is_err());
        assert!(Measure::uniform(g, DyadicRect::hooked(3, 0), int(1)).is_err());
        assert!(Measure::uniform(g, DyadicRect::root(), int(-1)).is_err());
    }

    #[test]
    fn integrate_examples() {
        let mu = lebesgue(2);
        assert_eq!(integrate(&StepFunction::constant(int(1)), &mu), int(1));
        let ind = StepFunction::indicator(&BoundarySet::from_rect(DyadicRect::hooked(1, 1)));
        assert_eq!(integrate(&ind, &mu), rat(1, 4));
    }

    #[test]
    fn difference_tiles_the_rectangle() {
        let a = DyadicRect::root();
        let b = r("x:2/1,y:1/1");
        let diff = rect_difference(&a, &b);
        let area = diff.iter().fold(Rational::zero(), |acc, d| acc + d.area());
        assert_eq!(area + b.area(), int(1));
        for (i, p) in diff.iter().enumerate() {
            assert!(!p.intersects(&b));
            for q in &diff[i + 1..] {
                assert!(!p.intersects(q));
            }
        }
        assert_eq!(rect_difference(&b, &a), vec![]);
    }

    #[test]
    fn boundary_set_canonical_merge() {
        let quads = [r("x:1/0,y:1/0"), r("x:1/1,y:1/0"), r("x:1/0,y:1/1"), r("x:1/1,y:1/1")];
        let e = BoundarySet::from_rects(quads.iter().cloned());
        assert_eq!(e.members(), &[DyadicRect::root()]);
        let overlapping = BoundarySet::from_rects([r("x:1/0,y:0/0"), r("x:0/0,y:1/0")]);
        assert_eq!(overlapping.area(), rat(3, 4));
        assert!(overlapping.contains_rect(&r("x:1/0,y:1/1")));
        assert!(!overlapping.contains_rect(&r("x:1/1,y:1/1")));
        // a rectangle covered only by two members jointly
        let split = BoundarySet::from_rects([r("x:2/0,y:1/0"), r("x:2/1,y:1/0")]);
        assert!(split.contains_rect(&r("x:1/0,y:1/0")));
    }

    #[test]
    fn step_function_sum_refines() {
        let f = StepFunction::constant(int(1));
        let g = StepFunction::indicator(&BoundarySet::from_rect(DyadicRect::hooked(1, 1)));
        let h = f.add(&g);
        let mu = lebesgue(2);
        assert_eq!(h.integrate(&mu), rat(5, 4));
        assert_eq!(h.value_on(&DyadicRect::hooked(2, 2)), int(2));
        assert_eq!(h.value_on(&r("x:2/3,y:2/3")), int(1));
    }
}
