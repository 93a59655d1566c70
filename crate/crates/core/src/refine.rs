//! Refinement of measure atoms under the cuts of a weight's support.
//!
//! Every support rectangle meets each refinement piece either fully or not at all,
//! so any quantity of the form `Σ_Q α_Q F(μ(Q ∩ E))` depends on `E` only through
//! which pieces it takes. Pieces met by exactly the same support rectangles are
//! grouped into classes.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::bigrid::{DyadicInterval, DyadicRect};
use crate::error::{Error, Result};
use crate::measure::{BoundarySet, Measure};
use crate::rational::Rational;
use crate::weight::Weight;

pub const DEFAULT_PIECE_CAP: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub rect: DyadicRect,
    pub mass: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PieceClass {
    pub mass: Rational,
    pub pieces: Vec<Piece>,
    /// Indices into `Refinement::support` of the rectangles containing the class.
    pub containing: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Refinement {
    pub support: Vec<(DyadicRect, Rational)>,
    pub classes: Vec<PieceClass>,
    /// For each support rectangle, the classes it contains.
    pub inside: Vec<Vec<usize>>,
}

/// Coarsest dyadic partition of `root` in which every cut is a union of parts.
fn partition_axis(root: &DyadicInterval, cuts: &[&DyadicInterval], out: &mut Vec<DyadicInterval>) {
    let inner: Vec<&DyadicInterval> =
        cuts.iter().copied().filter(|c| *c != root && root.contains(c)).collect();
    if inner.is_empty() {
        out.push(root.clone());
        return;
    }
    let (lo, hi) = root.children();
    partition_axis(&lo, &inner, out);
    partition_axis(&hi, &inner, out);
}

/// Pieces of the atoms of `mu` under the cuts `rects`.
pub fn refine_atoms(mu: &Measure, rects: &[DyadicRect], cap: usize) -> Result<Vec<Piece>> {
    let mut pieces = Vec::new();
    for atom in mu.atoms() {
        if atom.mass.is_zero() {
            continue;
        }
        let s = &atom.support;
        let mut xcuts = Vec::new();
        let mut ycuts = Vec::new();
        for r in rects {
            if let Some(i) = r.intersect(s) {
                if i.x != s.x {
                    xcuts.push(i.x.clone());
                }
                if i.y != s.y {
                    ycuts.push(i.y.clone());
                }
            }
        }
        xcuts.sort();
        xcuts.dedup();
        ycuts.sort();
        ycuts.dedup();
        let mut xs = Vec::new();
        partition_axis(&s.x, &xcuts.iter().collect::<Vec<_>>(), &mut xs);
        let mut ys = Vec::new();
        partition_axis(&s.y, &ycuts.iter().collect::<Vec<_>>(), &mut ys);
        if pieces.len() + xs.len() * ys.len() > cap {
            return Err(Error::CapExceeded { size: pieces.len() + xs.len() * ys.len(), cap });
        }
        for x in &xs {
            for y in &ys {
                let rect = DyadicRect::new(x.clone(), y.clone());
                let mass = atom.mass_in(&rect);
                pieces.push(Piece { rect, mass });
            }
        }
    }
    Ok(pieces)
}

impl Refinement {
    pub fn new(alpha: &Weight, mu: &Measure, cap: usize) -> Result<Self> {
        let support = alpha.support();
        let rects: Vec<DyadicRect> = support.iter().map(|(r, _)| r.clone()).collect();
        let pieces = refine_atoms(mu, &rects, cap)?;
        let mut by_key: BTreeMap<Vec<usize>, PieceClass> = BTreeMap::new();
        for p in pieces {
            let containing: Vec<usize> = rects
                .iter()
                .enumerate()
                .filter(|(_, r)| r.contains(&p.rect))
                .map(|(i, _)| i)
                .collect();
            let class = by_key.entry(containing.clone()).or_insert_with(|| PieceClass {
                mass: Rational::zero(),
                pieces: Vec::new(),
                containing,
            });
            class.mass += &p.mass;
            class.pieces.push(p);
        }
        let classes: Vec<PieceClass> = by_key.into_values().collect();
        let mut inside = vec![Vec::new(); support.len()];
        for (c, class) in classes.iter().enumerate() {
            for &q in &class.containing {
                inside[q].push(c);
            }
        }
        Ok(Self { support, classes, inside })
    }

    pub fn class_masses(&self) -> Vec<Rational> {
        self.classes.iter().map(|c| c.mass.clone()).collect()
    }

    /// Union of the pieces of the given classes.
    pub fn set_of(&self, classes: impl IntoIterator<Item = usize>) -> BoundarySet {
        BoundarySet::from_rects(
            classes
                .into_iter()
                .flat_map(|c| self.classes[c].pieces.iter().map(|p| p.rect.clone())),
        )
    }

    /// `μ(Q)` for every support rectangle, from class masses.
    pub fn support_masses(&self) -> Vec<Rational> {
        self.inside
            .iter()
            .map(|cs| cs.iter().fold(Rational::zero(), |acc, &c| acc + &self.classes[c].mass))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigrid::Geometry;
    use crate::rational::int;

    #[test]
    fn pieces_respect_cuts() {
        let g = Geometry::new(2);
        let mu = Measure::uniform(g, DyadicRect::root(), int(1)).unwrap();
        let alpha = Weight::from_entries([
            (DyadicRect::hooked(1, 1), int(1)),
            ("x:2/3,y:0/0".parse().unwrap(), int(1)),
        ])
        .unwrap();
        let refn = Refinement::new(&alpha, &mu, DEFAULT_PIECE_CAP).unwrap();
        let total = refn.classes.iter().fold(Rational::zero(), |a, c| a + &c.mass);
        assert_eq!(total, int(1));
        for class in &refn.classes {
            for p in &class.pieces {
                for (i, (r, _)) in refn.support.iter().enumerate() {
                    let inside = r.contains(&p.rect);
                    assert!(inside || !r.intersects(&p.rect));
                    assert_eq!(inside, class.containing.contains(&i));
                }
            }
        }
        assert_eq!(refn.support_masses(), vec![mu.mass(&refn.support[0].0), mu.mass(&refn.support[1].0)]);
    }

    #[test]
    fn cap_is_enforced() {
        let g = Geometry::new(4);
        let mu = Measure::uniform(g, DyadicRect::root(), int(1)).unwrap();
        let alpha = Weight::from_entries([("x:4/5,y:4/9".parse().unwrap(), int(1))]).unwrap();
        assert!(matches!(Refinement::new(&alpha, &mu, 3), Err(Error::CapExceeded { .. })));
    }
}
