//! Brute-force evaluators used as independent references at tiny depth.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Num, One, Zero};

use super::potential;
use crate::bigrid::{DyadicRect, Geometry};
use crate::error::{Error, Result};
use crate::measure::{BoundarySet, Measure};
use crate::rational::Rational;
use crate::weight::Weight;

pub const ENERGY_ORACLE_DEPTH: u32 = 4;
pub const SUBSET_ORACLE_DEPTH: u32 = 2;
pub const CELLWISE_ORACLE_DEPTH: u32 = 6;

/// `energy` by enumerating every rectangle of the geometry.
pub fn oracle_energy(alpha: &Weight, mu: &Measure, nu: &Measure, g: &Geometry) -> Result<Rational> {
    let mut acc = Rational::zero();
    for r in g.enumerate_all_capped(ENERGY_ORACLE_DEPTH)? {
        let a = alpha.value(&r);
        if !a.is_zero() {
            acc += a * mu.mass(&r) * nu.mass(&r);
        }
    }
    Ok(acc)
}

/// `∫(𝕍^μ)² dν` as the double sum over pairs of support rectangles.
pub fn pairwise_square_integral(alpha: &Weight, mu: &Measure, nu: &Measure) -> Rational {
    let s: Vec<(&DyadicRect, Rational)> = alpha.iter().map(|(r, a)| (r, a * mu.mass(r))).collect();
    let mut acc = Rational::zero();
    for (r, a) in &s {
        for (q, b) in &s {
            if let Some(i) = r.intersect(q) {
                acc += a * b * nu.mass(&i);
            }
        }
    }
    acc
}

/// `∫(𝕍^μ)² dν` summed cell by cell.
pub fn cellwise_square_integral(alpha: &Weight, mu: &Measure, nu: &Measure, g: &Geometry) -> Result<Rational> {
    let mut acc = Rational::zero();
    for c in g.cells(CELLWISE_ORACLE_DEPTH)? {
        let n = nu.mass(&c);
        if !n.is_zero() {
            let v = potential(alpha, mu, &c);
            acc += n * &v * &v;
        }
    }
    Ok(acc)
}

/// Cell bitmasks, integer masses and a common scale for a depth ≤ 2 geometry.
struct CellSystem {
    cells: Vec<DyadicRect>,
    masks: Vec<u32>,
    alpha: Vec<Rational>,
    cell_mass: Vec<Rational>,
}

impl CellSystem {
    fn new(alpha: &Weight, mu: &Measure, g: &Geometry) -> Result<Self> {
        if g.depth > SUBSET_ORACLE_DEPTH {
            return Err(Error::CapExceeded { size: g.depth as usize, cap: SUBSET_ORACLE_DEPTH as usize });
        }
        let cells = g.cells(SUBSET_ORACLE_DEPTH)?;
        let masks = alpha
            .rects()
            .map(|r| cells.iter().enumerate().filter(|(_, c)| r.contains(c)).fold(0u32, |m, (i, _)| m | 1 << i))
            .collect();
        let cell_mass = cells.iter().map(|c| mu.mass(c)).collect();
        Ok(Self { cells, masks, alpha: alpha.iter().map(|(_, a)| a.clone()).collect(), cell_mass })
    }

    fn set(&self, mask: usize) -> BoundarySet {
        BoundarySet::from_rects((0..self.cells.len()).filter(|i| mask >> i & 1 == 1).map(|i| self.cells[i].clone()))
    }

    fn scaled(&self) -> (Vec<BigInt>, Vec<BigInt>, BigInt, BigInt) {
        let dm = self.cell_mass.iter().fold(BigInt::one(), |acc, m| acc.lcm(m.denom()));
        let da = self.alpha.iter().fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
        let m = self.cell_mass.iter().map(|x| x.numer() * (&dm / x.denom())).collect();
        let a = self.alpha.iter().map(|x| x.numer() * (&da / x.denom())).collect();
        (m, a, dm, da)
    }

    fn small(m: &[BigInt], a: &[BigInt]) -> bool {
        let total: BigInt = m.iter().sum();
        total.bits() <= 28 && a.iter().all(|x| x.bits() <= 28)
    }
}

fn subset_masses<T: Num + Clone>(m: &[T]) -> Vec<T> {
    let n = m.len();
    let mut out = vec![T::zero(); 1 << n];
    for e in 1..(1usize << n) {
        let low = e.trailing_zeros() as usize;
        out[e] = out[e & (e - 1)].clone() + m[low].clone();
    }
    out
}

/// Best `num[e]/den[e]`; ties keep the first subset.
fn argmax_ratio<T: Num + Clone + PartialOrd>(num: &[T], den: &[T]) -> (usize, T, T) {
    let mut best = (0usize, T::zero(), T::one());
    for e in 1..num.len() {
        if den[e] != T::zero() && num[e].clone() * best.2.clone() > best.1.clone() * den[e].clone() {
            best = (e, num[e].clone(), den[e].clone());
        }
    }
    best
}

fn carleson_table<T: Num + Clone + PartialOrd>(masks: &[u32], a: &[T], m: &[T]) -> (usize, T, T) {
    let n = m.len();
    let sm = subset_masses(m);
    let mut w = vec![T::zero(); 1 << n];
    for (mask, a) in masks.iter().zip(a) {
        let s = sm[*mask as usize].clone();
        w[*mask as usize] = w[*mask as usize].clone() + a.clone() * s.clone() * s;
    }
    for bit in 0..n {
        for e in 0..(1usize << n) {
            if e >> bit & 1 == 1 {
                w[e] = w[e].clone() + w[e ^ (1 << bit)].clone();
            }
        }
    }
    argmax_ratio(&w, &sm)
}

fn rec_table<T: Num + Clone + PartialOrd>(masks: &[u32], a: &[T], m: &[T]) -> (usize, T, T) {
    let n = m.len();
    let sm = subset_masses(m);
    let num: Vec<T> = (0..(1usize << n))
        .map(|e| {
            masks.iter().zip(a).fold(T::zero(), |acc, (mask, a)| {
                let s = sm[*mask as usize & e].clone();
                acc + a.clone() * s.clone() * s
            })
        })
        .collect();
    argmax_ratio(&num, &sm)
}

fn to_i128(v: &[BigInt]) -> Vec<i128> {
    v.iter().map(|x| i128::try_from(x).expect("bounded by caller")).collect()
}

fn finish(best: (usize, BigInt, BigInt), scale: BigInt, sys: &CellSystem) -> (Rational, BoundarySet) {
    let (e, num, den) = best;
    if num.is_zero() {
        return (Rational::zero(), sys.set(e));
    }
    (Rational::new(num, den * scale), sys.set(e))
}

/// `sup_E Σ_{Q ⊆ E} α_Q μ(Q)² / μ(E)` over every set of boundary cells.
pub fn brute_carleson(alpha: &Weight, mu: &Measure, g: &Geometry) -> Result<(Rational, BoundarySet)> {
    let sys = CellSystem::new(alpha, mu, g)?;
    let (m, a, dm, da) = sys.scaled();
    let best = if CellSystem::small(&m, &a) {
        let (e, n, d) = carleson_table(&sys.masks, &to_i128(&a), &to_i128(&m));
        (e, BigInt::from(n), BigInt::from(d))
    } else {
        carleson_table(&sys.masks, &a, &m)
    };
    Ok(finish(best, da * dm, &sys))
}

/// `sup_E Σ_Q α_Q μ(Q ∩ E)² / μ(E)` over every set of boundary cells.
pub fn brute_rec(alpha: &Weight, mu: &Measure, g: &Geometry) -> Result<(Rational, BoundarySet)> {
    let sys = CellSystem::new(alpha, mu, g)?;
    let (m, a, dm, da) = sys.scaled();
    let best = if CellSystem::small(&m, &a) {
        let (e, n, d) = rec_table(&sys.masks, &to_i128(&a), &to_i128(&m));
        (e, BigInt::from(n), BigInt::from(d))
    } else {
        rec_table(&sys.masks, &a, &m)
    };
    Ok(finish(best, da * dm, &sys))
}

/// `sup_R Σ_{Q ⊆ R} α_Q μ(Q)² / μ(R)` over every rectangle of the geometry.
pub fn brute_box(alpha: &Weight, mu: &Measure, g: &Geometry) -> Result<Rational> {
    let mut best = Rational::zero();
    for r in g.enumerate_all_capped(ENERGY_ORACLE_DEPTH)? {
        let v = super::boxc::box_ratio(alpha, mu, &r);
        if v > best {
            best = v;
        }
    }
    Ok(best)
}
