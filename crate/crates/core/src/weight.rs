//! Finitely supported weights on dyadic rectangles.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bigrid::{DyadicRect, Geometry};
use crate::error::{Error, Result};
use crate::rational::{pow2, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Explicit,
    /// Indicator of the up-set generated by these rectangles.
    UpsetFromGenerators(Vec<DyadicRect>),
    /// `1/area` on a family of rectangles.
    ReciprocalAreaFamily,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weight {
    entries: BTreeMap<DyadicRect, Rational>,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct WeightRecord {
    pub rect: DyadicRect,
    #[serde(with = "crate::rational::serde_rational")]
    pub value: Rational,
}

impl Weight {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new(), provenance: Provenance::Explicit }
    }

    /// Explicit weight. Zero values are dropped; negative ones are rejected.
    pub fn from_entries<I: IntoIterator<Item = (DyadicRect, Rational)>>(entries: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (r, v) in entries {
            if v.is_negative() {
                return Err(Error::BadParameter(format!("negative weight on {r}")));
            }
            if v.is_zero() {
                continue;
            }
            if map.insert(r.clone(), v).is_some() {
                return Err(Error::DuplicateRect(r.to_string()));
            }
        }
        Ok(Self { entries: map, provenance: Provenance::Explicit })
    }

    /// Value 1 on every rectangle containing some generator.
    pub fn from_upset_generators(generators: &[DyadicRect], g: &Geometry) -> Result<Self> {
        let mut map = BTreeMap::new();
        for gen in generators {
            g.check(gen)?;
            for a in g.ancestors(gen) {
                map.entry(a).or_insert_with(|| Rational::from_integer(1.into()));
            }
        }
        Ok(Self { entries: map, provenance: Provenance::UpsetFromGenerators(generators.to_vec()) })
    }

    /// `α_R = 1/m₂(R)` on the family, zero elsewhere.
    pub fn from_family_reciprocal_area(family: &[DyadicRect]) -> Result<Self> {
        if family.is_empty() {
            return Err(Error::BadParameter("empty family".into()));
        }
        let mut map = BTreeMap::new();
        for r in family {
            if map.insert(r.clone(), pow2(r.area_exponent() as i64)).is_some() {
                return Err(Error::DuplicateRect(r.to_string()));
            }
        }
        Ok(Self { entries: map, provenance: Provenance::ReciprocalAreaFamily })
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn generators(&self) -> Option<&[DyadicRect]> {
        match &self.provenance {
            Provenance::UpsetFromGenerators(g) => Some(g),
            _ => None,
        }
    }

    pub fn value(&self, r: &DyadicRect) -> Rational {
        self.entries.get(r).cloned().unwrap_or_else(Rational::zero)
    }

    /// Support with values, in rectangle order.
    pub fn support(&self) -> Vec<(DyadicRect, Rational)> {
        self.entries.iter().map(|(r, v)| (r.clone(), v.clone())).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DyadicRect, &Rational)> {
        self.entries.iter()
    }

    pub fn rects(&self) -> impl Iterator<Item = &DyadicRect> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_level(&self) -> u32 {
        self.entries.keys().map(|r| r.x.level().max(r.y.level())).max().unwrap_or(0)
    }

    pub fn all_hooked(&self) -> bool {
        self.entries.keys().all(|r| r.is_hooked())
    }

    /// Every ancestor of every member is a member with a value at least as large.
    pub fn is_upset(&self) -> bool {
        self.entries.iter().all(|(r, v)| {
            let parents = [
                r.x.parent().map(|x| DyadicRect::new(x, r.y.clone())),
                r.y.parent().map(|y| DyadicRect::new(r.x.clone(), y)),
            ];
            parents.into_iter().flatten().all(|p| self.entries.get(&p).is_some_and(|pv| pv >= v))
        })
    }

    pub fn scaled(&self, c: &Rational) -> Weight {
        let entries = if c.is_zero() {
            BTreeMap::new()
        } else {
            self.entries.iter().map(|(r, v)| (r.clone(), v * c)).collect()
        };
        Weight { entries, provenance: Provenance::Explicit }
    }

    pub fn plus(&self, other: &Weight) -> Weight {
        let mut entries = self.entries.clone();
        for (r, v) in &other.entries {
            *entries.entry(r.clone()).or_insert_with(Rational::zero) += v;
        }
        Weight { entries, provenance: Provenance::Explicit }
    }

    /// Rectangle-indexed function `R ↦ g(R) α_R` on the support.
    pub fn map_values(&self, f: impl Fn(&DyadicRect, &Rational) -> Rational) -> Weight {
        let entries = self
            .entries
            .iter()
            .map(|(r, v)| (r.clone(), f(r, v)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        Weight { entries, provenance: Provenance::Explicit }
    }

    pub fn rect_set(&self) -> BTreeSet<DyadicRect> {
        self.entries.keys().cloned().collect()
    }

    pub(crate) fn records(&self) -> Vec<WeightRecord> {
        self.entries
            .iter()
            .map(|(r, v)| WeightRecord { rect: r.clone(), value: v.clone() })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn upset_from_root_and_corner() {
        let g = Geometry::new(8);
        let w = Weight::from_upset_generators(&[DyadicRect::root()], &g).unwrap();
        assert_eq!(w.support(), vec![(DyadicRect::root(), int(1))]);
        let w = Weight::from_upset_generators(&[DyadicRect::hooked(2, 4)], &g).unwrap();
        assert_eq!(w.len(), 15);
        assert!(w.is_upset());
    }

    #[test]
    fn upset_from_staircase_generators() {
        let n = 16u32;
        let g = Geometry::new(n + 1);
        let gens: Vec<_> = (1..=4).map(|j| DyadicRect::hooked(1 << j, n >> j)).collect();
        let w = Weight::from_upset_generators(&gens, &g).unwrap();
        assert!(w.is_upset());
        for (r, _) in w.support() {
            for a in g.ancestors(&r) {
                assert!(w.value(&a) > int(0));
            }
        }
        // two strategies: dedup of ancestor lists vs. filter of the hooked grid
        let by_filter = (0..=n)
            .flat_map(|p| (0..=n).map(move |q| DyadicRect::hooked(p, q)))
            .filter(|h| gens.iter().any(|q| h.contains(q)))
            .count();
        assert_eq!(w.len(), by_filter);
        assert_eq!(w.len(), 65);
    }

    #[test]
    fn reciprocal_area_family() {
        let w = Weight::from_family_reciprocal_area(&[DyadicRect::root()]).unwrap();
        assert_eq!(w.value(&DyadicRect::root()), int(1));
        let w = Weight::from_family_reciprocal_area(&[DyadicRect::hooked(1, 0)]).unwrap();
        assert_eq!(w.value(&DyadicRect::hooked(1, 0)), int(2));
        let fam = ["x:1/0,y:1/0".parse().unwrap(), "x:1/1,y:1/1".parse().unwrap()];
        let w = Weight::from_family_reciprocal_area(&fam).unwrap();
        assert!(w.support().iter().all(|(_, v)| *v == int(4)));
        assert!(!w.is_upset());
        assert!(matches!(
            Weight::from_family_reciprocal_area(&[DyadicRect::root(), DyadicRect::root()]),
            Err(Error::DuplicateRect(_))
        ));
        assert!(Weight::from_family_reciprocal_area(&[]).is_err());
    }

    #[test]
    fn upset_detection() {
        assert!(Weight::empty().is_upset());
        let lone = Weight::from_entries([(DyadicRect::hooked(1, 0), int(1))]).unwrap();
        assert!(!lone.is_upset());
        let decreasing = Weight::from_entries([
            (DyadicRect::root(), int(1)),
            (DyadicRect::hooked(1, 0), int(2)),
        ])
        .unwrap();
        assert!(!decreasing.is_upset());
    }
}
