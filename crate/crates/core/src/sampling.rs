//! Seeded random instances for the property batteries. Every draw is a pure
//! function of the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bigrid::{DyadicRect, Geometry};
use crate::constructions::staircase_rect;
use crate::error::Result;
use crate::measure::{Atom, BoundarySet, Measure, StepFunction};
use crate::rational::{rat, Rational};
use crate::weight::Weight;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.rng.gen_range(0..n.max(1))
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    /// `p/q` with `0 ≤ p ≤ max_num`, `1 ≤ q ≤ max_den`.
    pub fn rational(&mut self, max_num: i64, max_den: i64) -> Rational {
        rat(self.rng.gen_range(0..=max_num), self.rng.gen_range(1..=max_den))
    }

    fn positive(&mut self, max_num: i64, max_den: i64) -> Rational {
        rat(self.rng.gen_range(1..=max_num), self.rng.gen_range(1..=max_den))
    }

    /// Random dyadic partition of the unit square into admitted rectangles.
    pub fn partition(&mut self, g: &Geometry, split: f64) -> Vec<DyadicRect> {
        let mut out = Vec::new();
        let mut stack = vec![DyadicRect::root()];
        while let Some(r) = stack.pop() {
            let can_x = r.x.level() < g.depth;
            let can_y = r.y.level() < g.depth;
            if !(can_x || can_y) || !self.chance(split) {
                out.push(r);
                continue;
            }
            let (a, b) = if can_x && (!can_y || self.chance(0.5)) { r.x_halves() } else { r.y_halves() };
            stack.push(b);
            stack.push(a);
        }
        out
    }

    /// Atoms on a random partition; some pieces carry no mass.
    pub fn measure(&mut self, g: &Geometry) -> Result<Measure> {
        let parts = self.partition(g, 0.7);
        let mut atoms: Vec<Atom> = Vec::new();
        for r in parts {
            if self.chance(0.8) {
                let m = self.positive(4, 4);
                atoms.push(Atom::new(r, m));
            }
        }
        if atoms.is_empty() {
            atoms.push(Atom::new(DyadicRect::root(), rat(1, 1)));
        }
        Measure::new(*g, atoms)
    }

    /// Nonnegative step function on a random partition, not identically zero.
    pub fn step_function(&mut self, g: &Geometry) -> StepFunction {
        let parts = self.partition(g, 0.75);
        let mut pieces: Vec<(DyadicRect, Rational)> =
            parts.into_iter().map(|r| (r, self.rational(3, 2))).filter(|(_, v)| *v != Rational::from_integer(0.into())).collect();
        if pieces.is_empty() {
            pieces.push((DyadicRect::root(), rat(1, 1)));
        }
        StepFunction::new(pieces).expect("a partition has disjoint pieces")
    }

    pub fn rect(&mut self, g: &Geometry) -> DyadicRect {
        let lx = self.below(g.depth as u64 + 1) as u32;
        let ly = self.below(g.depth as u64 + 1) as u32;
        let ix = self.below(1 << lx);
        let iy = self.below(1 << ly);
        DyadicRect::from_parts(lx, ix, ly, iy).expect("index below 2^level")
    }

    /// Up to `max_entries` random rectangles with small positive weights.
    pub fn weight(&mut self, g: &Geometry, max_entries: usize) -> Weight {
        let n = 1 + self.below(max_entries as u64) as usize;
        let mut entries = std::collections::BTreeMap::new();
        for _ in 0..n {
            let r = self.rect(g);
            let v = self.positive(6, 3);
            entries.insert(r, v);
        }
        Weight::from_entries(entries).expect("distinct keys")
    }

    /// A random set of boundary cells.
    pub fn boundary_set(&mut self, g: &Geometry) -> BoundarySet {
        let parts = self.partition(g, 0.7);
        BoundarySet::from_rects(parts.into_iter().filter(|_| self.chance(0.5)))
    }

    /// Clean hooked system for the staircase with `N = 2^m`: disjoint,
    /// non-adjacent generator runs, each realized by a hooked rectangle whose
    /// generator set is exactly that run.
    pub fn clean_system(&mut self, n: u64, m: u32) -> Vec<DyadicRect> {
        loop {
            let mut out = Vec::new();
            let mut j = 1u32;
            while j <= m {
                if self.chance(0.4) {
                    let len = 1 + self.below((m - j + 1) as u64) as u32;
                    let b = j + len - 1;
                    out.push(self.run_rect(n, m, j, b));
                    j = b + 2;
                } else {
                    j += 1;
                }
            }
            if !out.is_empty() {
                return out;
            }
        }
    }

    /// Hooked `(u, v)` containing exactly the generators `a..=b`.
    fn run_rect(&mut self, n: u64, m: u32, a: u32, b: u32) -> DyadicRect {
        let u_hi = staircase_rect(n, a).x.level() as u64;
        let u_lo = if a > 1 { staircase_rect(n, a - 1).x.level() as u64 + 1 } else { 0 };
        let v_hi = staircase_rect(n, b).y.level() as u64;
        let v_lo = if b < m { staircase_rect(n, b + 1).y.level() as u64 + 1 } else { 0 };
        let u = u_lo + self.below(u_hi - u_lo + 1);
        let v = v_lo + self.below(v_hi - v_lo + 1);
        DyadicRect::hooked(u as u32, v as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::generator_intervals;

    #[test]
    fn draws_are_reproducible() {
        let g = Geometry::new(3);
        let a = Sampler::new(11).measure(&g).unwrap();
        let b = Sampler::new(11).measure(&g).unwrap();
        assert_eq!(a, b);
        assert_eq!(Sampler::new(4).weight(&g, 5), Sampler::new(4).weight(&g, 5));
    }

    #[test]
    fn clean_systems_have_separated_runs() {
        let mut s = Sampler::new(3);
        let gens: Vec<DyadicRect> = (1..=4).map(|j| staircase_rect(16, j)).collect();
        for _ in 0..50 {
            let sys = s.clean_system(16, 4);
            let mut iv: Vec<(usize, usize)> = generator_intervals(&sys, &gens).into_iter().map(Option::unwrap).collect();
            iv.sort();
            assert!(iv.windows(2).all(|w| w[1].0 > w[0].1 + 1));
        }
    }
}
