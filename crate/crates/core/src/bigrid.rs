//! Dyadic geometry of the unit square.
//!
//! Intervals are half-open, `[index * 2^-level, (index + 1) * 2^-level)`, so siblings
//! and quadrants are exactly disjoint. Indices are big integers: depths such as
//! `N = 256` put indices far outside machine words.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{pow2, Rational};

/// Default depth cap for dense enumeration of the whole bi-tree.
pub const ORACLE_DEPTH_CAP: u32 = 6;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicInterval {
    level: u32,
    index: BigUint,
}

impl DyadicInterval {
    pub fn new(level: u32, index: BigUint) -> Result<Self> {
        if index.bits() > level as u64 {
            return Err(Error::BadParameter(format!(
                "index {index} out of range for level {level}"
            )));
        }
        Ok(Self { level, index })
    }

    pub fn from_u64(level: u32, index: u64) -> Result<Self> {
        Self::new(level, BigUint::from(index))
    }

    pub fn unit() -> Self {
        Self { level: 0, index: BigUint::zero() }
    }

    /// `[0, 2^-level)`.
    pub fn origin(level: u32) -> Self {
        Self { level, index: BigUint::zero() }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> &BigUint {
        &self.index
    }

    pub fn is_origin(&self) -> bool {
        self.index.is_zero()
    }

    pub fn contains(&self, other: &DyadicInterval) -> bool {
        if self.level > other.level {
            return false;
        }
        let d = (other.level - self.level) as u64;
        if self.index.is_zero() {
            return other.index.bits() <= d;
        }
        (&other.index >> d) == self.index
    }

    pub fn intersect(&self, other: &DyadicInterval) -> Option<DyadicInterval> {
        if self.contains(other) {
            Some(other.clone())
        } else if other.contains(self) {
            Some(self.clone())
        } else {
            None
        }
    }

    pub fn children(&self) -> (DyadicInterval, DyadicInterval) {
        let lo = &self.index << 1usize;
        let hi = &lo + BigUint::one();
        (
            DyadicInterval { level: self.level + 1, index: lo },
            DyadicInterval { level: self.level + 1, index: hi },
        )
    }

    pub fn parent(&self) -> Option<DyadicInterval> {
        if self.level == 0 {
            None
        } else {
            Some(DyadicInterval { level: self.level - 1, index: &self.index >> 1usize })
        }
    }

    /// The unique ancestor at `level` (which must not exceed `self.level`).
    pub fn ancestor_at(&self, level: u32) -> DyadicInterval {
        assert!(level <= self.level);
        DyadicInterval { level, index: &self.index >> (self.level - level) as usize }
    }

    /// Smallest dyadic interval containing both.
    pub fn join(&self, other: &DyadicInterval) -> DyadicInterval {
        let mut a = self.ancestor_at(self.level.min(other.level));
        let mut b = other.ancestor_at(self.level.min(other.level));
        while a != b {
            a = a.parent().expect("root is a common ancestor");
            b = b.parent().expect("root is a common ancestor");
        }
        a
    }

    pub fn start(&self) -> Rational {
        crate::rational::from_biguint(&self.index) * pow2(-(self.level as i64))
    }

    pub fn end(&self) -> Rational {
        crate::rational::from_biguint(&(&self.index + BigUint::one())) * pow2(-(self.level as i64))
    }

    /// Is `self` the lower (left) child of its parent?
    pub fn is_lower_child(&self) -> bool {
        !self.index.bit(0)
    }

    pub fn sibling(&self) -> Option<DyadicInterval> {
        if self.level == 0 {
            return None;
        }
        let mut index = self.index.clone();
        index.set_bit(0, !self.index.bit(0));
        Some(DyadicInterval { level: self.level, index })
    }
}

/// Product of two dyadic intervals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicRect {
    pub x: DyadicInterval,
    pub y: DyadicInterval,
}

impl DyadicRect {
    pub fn new(x: DyadicInterval, y: DyadicInterval) -> Self {
        Self { x, y }
    }

    pub fn root() -> Self {
        Self { x: DyadicInterval::unit(), y: DyadicInterval::unit() }
    }

    pub fn from_parts(x_level: u32, x_index: u64, y_level: u32, y_index: u64) -> Result<Self> {
        Ok(Self {
            x: DyadicInterval::from_u64(x_level, x_index)?,
            y: DyadicInterval::from_u64(y_level, y_index)?,
        })
    }

    /// The hooked rectangle `[0, 2^-x_level) x [0, 2^-y_level)`.
    pub fn hooked(x_level: u32, y_level: u32) -> Self {
        Self { x: DyadicInterval::origin(x_level), y: DyadicInterval::origin(y_level) }
    }

    /// Lower-left corner at the origin.
    pub fn is_hooked(&self) -> bool {
        self.x.is_origin() && self.y.is_origin()
    }

    pub fn levels(&self) -> (u32, u32) {
        (self.x.level, self.y.level)
    }

    pub fn contains(&self, other: &DyadicRect) -> bool {
        self.x.contains(&other.x) && self.y.contains(&other.y)
    }

    pub fn intersect(&self, other: &DyadicRect) -> Option<DyadicRect> {
        Some(DyadicRect { x: self.x.intersect(&other.x)?, y: self.y.intersect(&other.y)? })
    }

    pub fn intersects(&self, other: &DyadicRect) -> bool {
        (self.x.contains(&other.x) || other.x.contains(&self.x))
            && (self.y.contains(&other.y) || other.y.contains(&self.y))
    }

    pub fn join(&self, other: &DyadicRect) -> DyadicRect {
        DyadicRect { x: self.x.join(&other.x), y: self.y.join(&other.y) }
    }

    /// `-log2` of the area.
    pub fn area_exponent(&self) -> u64 {
        self.x.level as u64 + self.y.level as u64
    }

    pub fn area(&self) -> Rational {
        pow2(-(self.area_exponent() as i64))
    }

    pub fn x_halves(&self) -> (DyadicRect, DyadicRect) {
        let (a, b) = self.x.children();
        (DyadicRect::new(a, self.y.clone()), DyadicRect::new(b, self.y.clone()))
    }

    pub fn y_halves(&self) -> (DyadicRect, DyadicRect) {
        let (a, b) = self.y.children();
        (DyadicRect::new(self.x.clone(), a), DyadicRect::new(self.x.clone(), b))
    }

    /// Upper-right quadrant.
    pub fn upper_right(&self) -> DyadicRect {
        DyadicRect::new(self.x.children().1, self.y.children().1)
    }
}

impl fmt::Display for DyadicRect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x:{}/{},y:{}/{}", self.x.level, self.x.index, self.y.level, self.y.index)
    }
}

impl FromStr for DyadicRect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("not a rectangle: {s:?}"));
        let (xs, ys) = s.trim().split_once(',').ok_or_else(bad)?;
        let axis = |part: &str, tag: &str| -> Result<DyadicInterval> {
            let body = part.trim().strip_prefix(tag).ok_or_else(bad)?;
            let (l, i) = body.split_once('/').ok_or_else(bad)?;
            let level: u32 = l.trim().parse().map_err(|_| bad())?;
            let index: BigUint = i.trim().parse().map_err(|_| bad())?;
            DyadicInterval::new(level, index)
        };
        Ok(DyadicRect { x: axis(xs, "x:")?, y: axis(ys, "y:")? })
    }
}

impl Serialize for DyadicRect {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DyadicRect {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The sub-rectangles used by the maximal-principle construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubRects {
    /// upper-right quadrant
    pub pp: DyadicRect,
    /// left half (the x-axis is halved)
    pub minus: DyadicRect,
    /// top half
    pub t: DyadicRect,
    /// right half
    pub r: DyadicRect,
    /// lower-left quadrant
    pub mm: DyadicRect,
}

/// Bi-tree of depth `N`: boundary cells are the `2^N x 2^N` squares at level `(N, N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Geometry {
    pub depth: u32,
}

impl Geometry {
    pub fn new(depth: u32) -> Self {
        Self { depth }
    }

    pub fn admits(&self, r: &DyadicRect) -> bool {
        r.x.level <= self.depth && r.y.level <= self.depth
    }

    pub fn check(&self, r: &DyadicRect) -> Result<()> {
        if self.admits(r) {
            Ok(())
        } else {
            Err(Error::GeometryMismatch(format!("{r} is finer than depth {}", self.depth)))
        }
    }

    /// `(2^{N+1} - 1)^2`.
    pub fn rect_count(&self) -> BigUint {
        let side = (BigUint::one() << (self.depth as usize + 1)) - BigUint::one();
        &side * &side
    }

    pub fn is_cell(&self, r: &DyadicRect) -> bool {
        r.x.level == self.depth && r.y.level == self.depth
    }

    /// All rectangles, ordered by x-level, x-index, y-level, y-index.
    pub fn enumerate_all(&self) -> Result<impl Iterator<Item = DyadicRect>> {
        self.enumerate_all_capped(ORACLE_DEPTH_CAP)
    }

    pub fn enumerate_all_capped(&self, cap: u32) -> Result<impl Iterator<Item = DyadicRect>> {
        if self.depth > cap {
            return Err(Error::CapExceeded { size: self.depth as usize, cap: cap as usize });
        }
        let depth = self.depth;
        let axis: Vec<DyadicInterval> = (0..=depth)
            .flat_map(|l| (0..(1u64 << l)).map(move |i| DyadicInterval::origin(l).with_index(i)))
            .collect();
        let axis2 = axis.clone();
        Ok(axis.into_iter().flat_map(move |x| {
            axis2.clone().into_iter().map(move |y| DyadicRect::new(x.clone(), y))
        }))
    }

    /// Boundary cells in row-major order (`y` outer, `x` inner).
    pub fn cells(&self, cap: u32) -> Result<Vec<DyadicRect>> {
        if self.depth > cap {
            return Err(Error::CapExceeded { size: self.depth as usize, cap: cap as usize });
        }
        let n = 1u64 << self.depth;
        let mut out = Vec::with_capacity((n * n) as usize);
        for y in 0..n {
            for x in 0..n {
                out.push(DyadicRect::from_parts(self.depth, x, self.depth, y)?);
            }
        }
        Ok(out)
    }

    /// Every rectangle containing `r`, outer x-level descending, inner y-level descending.
    pub fn ancestors(&self, r: &DyadicRect) -> Vec<DyadicRect> {
        let mut out = Vec::with_capacity(((r.x.level + 1) * (r.y.level + 1)) as usize);
        for lx in (0..=r.x.level).rev() {
            let x = r.x.ancestor_at(lx);
            for ly in (0..=r.y.level).rev() {
                out.push(DyadicRect::new(x.clone(), r.y.ancestor_at(ly)));
            }
        }
        out
    }

    pub fn subrects(&self, r: &DyadicRect) -> Result<SubRects> {
        if r.x.level >= self.depth || r.y.level >= self.depth {
            return Err(Error::DepthExceeded(r.to_string()));
        }
        let (left, right) = r.x_halves();
        let (_, top) = r.y_halves();
        let (xl, _) = r.x.children();
        let (yl, _) = r.y.children();
        Ok(SubRects {
            pp: r.upper_right(),
            minus: left,
            t: top,
            r: right,
            mm: DyadicRect::new(xl, yl),
        })
    }
}

impl DyadicInterval {
    fn with_index(mut self, i: u64) -> Self {
        self.index = BigUint::from(i);
        self
    }
}
