//! Integer-scaled tables over the hooked grid `{hooked(p, q) : 0 ≤ p, q ≤ L}`.
//!
//! `dd[p][q] / nd[p][q]` is the box ratio of `hooked(p, q)`: `dd` is the scaled
//! sum of `α_Q μ(Q)²` over support rectangles dominated by `(p, q)`, and `nd` is
//! the scaled mass `μ(hooked(p, q))`. Both carry the same overall scale.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::bigrid::DyadicRect;
use crate::measure::Measure;
use crate::rational::Rational;
use crate::weight::Weight;

pub(crate) struct HookedGrid {
    pub side: usize,
    pub dd: Vec<BigInt>,
    pub nd: Vec<BigInt>,
    pub support: Vec<bool>,
}

fn lcm_denoms<'a>(it: impl Iterator<Item = &'a Rational>) -> BigInt {
    it.fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Exponent `e` with `|S ∩ origin(p)| = 2^{-e} |S|` along one axis, if nonempty.
fn axis_drop(level: u32, index_is_zero: bool, contained_in_origin: impl Fn(u32) -> bool, p: u32) -> Option<u32> {
    if p <= level {
        contained_in_origin(p).then_some(0)
    } else {
        index_is_zero.then_some(p - level)
    }
}

impl HookedGrid {
    /// Requires every support rectangle of `alpha` to be hooked.
    pub fn new(alpha: &Weight, mu: &Measure) -> Self {
        let l = alpha
            .rects()
            .map(|r| r.x.level().max(r.y.level()))
            .chain(mu.atoms().iter().map(|a| a.support.x.level().max(a.support.y.level())))
            .max()
            .unwrap_or(0);
        let side = l as usize + 1;
        let idx = |p: usize, q: usize| p * side + q;

        // scaled masses of hooked rectangles: mass · dm · 2^{2L}
        let dm = lcm_denoms(mu.atoms().iter().map(|a| &a.mass));
        let mut nu = vec![BigInt::zero(); side * side];
        for atom in mu.atoms() {
            if atom.mass.is_zero() {
                continue;
            }
            let m = atom.mass.numer() * (&dm / atom.mass.denom());
            let s = &atom.support;
            let drops = |iv: &crate::bigrid::DyadicInterval| -> Vec<Option<u32>> {
                (0..=l)
                    .map(|p| {
                        axis_drop(
                            iv.level(),
                            iv.index().is_zero(),
                            |p| iv.ancestor_at(p).is_origin(),
                            p,
                        )
                    })
                    .collect()
            };
            let fx = drops(&s.x);
            let fy = drops(&s.y);
            for (p, ex) in fx.iter().enumerate() {
                let Some(ex) = ex else { continue };
                for (q, ey) in fy.iter().enumerate() {
                    let Some(ey) = ey else { continue };
                    let shift = 2 * l - ex - ey;
                    nu[idx(p, q)] += &m << shift;
                }
            }
        }

        let da = lcm_denoms(alpha.iter().map(|(_, v)| v));
        let mut dd = vec![BigInt::zero(); (side + 1) * (side + 1)];
        let didx = |p: usize, q: usize| p * (side + 1) + q;
        let mut support = vec![false; side * side];
        for (r, a) in alpha.iter() {
            let (p, q) = (r.x.level() as usize, r.y.level() as usize);
            support[idx(p, q)] = true;
            let a_int = a.numer() * (&da / a.denom());
            let n = &nu[idx(p, q)];
            dd[didx(p, q)] += a_int * n * n;
        }
        for p in (0..side).rev() {
            for q in (0..side).rev() {
                let v = &dd[didx(p + 1, q)] + &dd[didx(p, q + 1)] - &dd[didx(p + 1, q + 1)];
                dd[didx(p, q)] += v;
            }
        }
        // ratio D/ν = (dd_raw / (da·dm²·4^{2L})) / (nu / (dm·4^{L})): align scales
        let scale_nu = &da * &dm << (2 * l);
        let dd = (0..side)
            .flat_map(|p| (0..side).map(move |q| (p, q)))
            .map(|(p, q)| dd[didx(p, q)].clone())
            .collect();
        let nd = nu.into_iter().map(|v| v * &scale_nu).collect();
        Self { side, dd, nd, support }
    }

    pub fn at(&self, p: usize, q: usize) -> usize {
        p * self.side + q
    }

    pub fn rect(p: usize, q: usize) -> DyadicRect {
        DyadicRect::hooked(p as u32, q as u32)
    }

    pub fn ratio(num: &BigInt, den: &BigInt) -> Rational {
        if den.is_zero() {
            Rational::zero()
        } else {
            Rational::new(num.clone(), den.clone())
        }
    }

    /// `a/b > c/d` for nonnegative numerators and positive denominators.
    pub fn greater(a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt) -> bool {
        debug_assert!(b.is_positive() && d.is_positive());
        a * d > c * b
    }

    /// Scaled `(numerator, denominator)` of the staircase union with the given
    /// corners (x-level increasing, y-level decreasing).
    pub fn staircase_totals(&self, corners: &[(usize, usize)]) -> (BigInt, BigInt) {
        let mut num = BigInt::zero();
        let mut den = BigInt::zero();
        for (k, &(p, q)) in corners.iter().enumerate() {
            num += &self.dd[self.at(p, q)];
            den += &self.nd[self.at(p, q)];
            if let Some(&(pn, _)) = corners.get(k + 1) {
                num -= &self.dd[self.at(pn, q)];
                den -= &self.nd[self.at(pn, q)];
            }
        }
        (num, den)
    }
}
