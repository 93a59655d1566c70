use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::boxc::box_constant;
use super::hooked::HookedGrid;
use super::{ConstantKind, ConstantReport, Witness};
use crate::error::Result;
use crate::flow::max_closure;
use crate::measure::{BoundarySet, Measure};
use crate::rational::{ratio_or_zero, Rational};
use crate::refine::{Refinement, DEFAULT_PIECE_CAP};
use crate::weight::Weight;

/// Largest support accepted by the explicit subset enumeration strategy.
pub const SUBSET_ENUMERATION_CAP: usize = 20;
/// Support size up to which `Auto` prefers enumeration over min-cut.
const AUTO_SUBSET_CAP: usize = 10;
/// Largest `|support| · |classes|` handed to the exact min-cut search.
pub const MIN_CUT_EDGE_CAP: usize = 400_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CarlesonStrategy {
    Auto,
    SupportSubsets,
    HookedStaircase,
    MinCut,
    Greedy,
}

/// `Σ_{Q ⊆ E} α_Q μ(Q)²`.
pub fn carleson_energy(alpha: &Weight, mu: &Measure, e: &BoundarySet) -> Rational {
    alpha
        .iter()
        .filter(|(q, _)| e.contains_rect(q))
        .fold(Rational::zero(), |acc, (q, a)| {
            let m = mu.mass(q);
            acc + a * &m * &m
        })
}

/// Exact `sup_E carleson_energy(E) / μ(E)` whenever a strategy applies.
pub fn carleson_constant(alpha: &Weight, mu: &Measure) -> Result<ConstantReport> {
    carleson_constant_with(alpha, mu, CarlesonStrategy::Auto)
}

pub fn carleson_constant_with(alpha: &Weight, mu: &Measure, strategy: CarlesonStrategy) -> Result<ConstantReport> {
    let seed = box_constant(alpha, mu);
    if alpha.is_empty() {
        return Ok(ConstantReport::exact(ConstantKind::Carleson, Rational::zero(), Witness::Set(BoundarySet::empty()), "empty-support"));
    }
    let strategy = match strategy {
        CarlesonStrategy::Auto if alpha.all_hooked() => CarlesonStrategy::HookedStaircase,
        CarlesonStrategy::Auto if alpha.len() <= AUTO_SUBSET_CAP => CarlesonStrategy::SupportSubsets,
        CarlesonStrategy::Auto => CarlesonStrategy::MinCut,
        s => s,
    };
    if strategy == CarlesonStrategy::HookedStaircase && alpha.all_hooked() {
        return Ok(staircase(alpha, mu, &seed));
    }
    let sys = ClassSystem::new(alpha, mu)?;
    match strategy {
        CarlesonStrategy::SupportSubsets if alpha.len() <= SUBSET_ENUMERATION_CAP => Ok(sys.subsets(&seed)),
        CarlesonStrategy::Greedy => Ok(sys.greedy(&seed)),
        _ if alpha.len().saturating_mul(sys.m.len()) <= MIN_CUT_EDGE_CAP => Ok(sys.min_cut(&seed)),
        _ => Ok(sys.greedy(&seed)),
    }
}

fn seed_lambda(seed: &ConstantReport) -> (Rational, BoundarySet) {
    let set = match &seed.witness {
        Witness::Rect(r) => BoundarySet::from_rect(r.clone()),
        _ => BoundarySet::empty(),
    };
    (seed.lower.clone(), set)
}

/// Support rectangles and refinement classes, with `w_Q = α_Q μ(Q)²`.
struct ClassSystem {
    refn: Refinement,
    w: Vec<Rational>,
    m: Vec<Rational>,
}

impl ClassSystem {
    fn new(alpha: &Weight, mu: &Measure) -> Result<Self> {
        let refn = Refinement::new(alpha, mu, DEFAULT_PIECE_CAP)?;
        let masses = refn.support_masses();
        let w = refn.support.iter().zip(&masses).map(|((_, a), m)| a * m * m).collect();
        let m = refn.class_masses();
        Ok(Self { refn, w, m })
    }

    /// Numerator and mass of the closure of a class set `u`.
    fn closure_value(&self, u: &[bool]) -> (Rational, Rational) {
        let num = self
            .refn
            .inside
            .iter()
            .zip(&self.w)
            .filter(|(cs, _)| cs.iter().all(|&c| u[c]))
            .fold(Rational::zero(), |acc, (_, w)| acc + w);
        let den = self.m.iter().zip(u).filter(|(_, &b)| b).fold(Rational::zero(), |acc, (m, _)| acc + m);
        (num, den)
    }

    fn witness(&self, u: &[bool]) -> BoundarySet {
        BoundarySet::from_rects(
            self.refn
                .inside
                .iter()
                .zip(&self.refn.support)
                .filter(|(cs, _)| cs.iter().all(|&c| u[c]))
                .map(|(_, (r, _))| r.clone()),
        )
    }

    fn finish(&self, seed: &ConstantReport, best: Option<(Rational, Vec<bool>)>, exact: bool, method: &str) -> ConstantReport {
        let (seed_value, seed_set) = seed_lambda(seed);
        let (value, set) = match best {
            Some((v, u)) if v > seed_value => (v, self.witness(&u)),
            _ => (seed_value, seed_set),
        };
        if exact {
            ConstantReport::exact(ConstantKind::Carleson, value, Witness::Set(set), method)
        } else {
            ConstantReport::lower_bound(ConstantKind::Carleson, value, Witness::Set(set), method)
        }
    }

    fn subsets(&self, seed: &ConstantReport) -> ConstantReport {
        let n = self.w.len();
        let k = self.m.len();
        let mut best: Option<(Rational, Vec<bool>)> = None;
        let mut u = vec![false; k];
        for mask in 1u64..(1u64 << n) {
            u.iter_mut().for_each(|b| *b = false);
            for q in 0..n {
                if mask >> q & 1 == 1 {
                    for &c in &self.refn.inside[q] {
                        u[c] = true;
                    }
                }
            }
            let (num, den) = self.closure_value(&u);
            let v = ratio_or_zero(&num, &den);
            if best.as_ref().map_or(true, |(b, _)| v > *b) {
                best = Some((v, u.clone()));
            }
        }
        self.finish(seed, best, true, "support-subset-enumeration")
    }

    /// Dinkelbach iteration; each step is a maximum-weight closure solved by min-cut.
    fn min_cut(&self, seed: &ConstantReport) -> ConstantReport {
        let (mut lambda, _) = seed_lambda(seed);
        let mut best: Option<(Rational, Vec<bool>)> = None;
        loop {
            let cost: Vec<Rational> = self.m.iter().map(|m| m * &lambda).collect();
            let (value, _, res) = max_closure(&self.w, &self.refn.inside, &cost);
            if !value.is_positive() {
                break;
            }
            let mut u = vec![false; self.m.len()];
            for c in res {
                u[c] = true;
            }
            let (num, den) = self.closure_value(&u);
            let next = ratio_or_zero(&num, &den);
            if next <= lambda {
                break;
            }
            lambda = next.clone();
            best = Some((next, u));
        }
        self.finish(seed, best, true, "dinkelbach-min-cut")
    }

    fn greedy(&self, seed: &ConstantReport) -> ConstantReport {
        let k = self.m.len();
        let mut u = vec![false; k];
        let mut current = Rational::zero();
        let mut best: Option<(Rational, Vec<bool>)> = None;
        loop {
            let mut step: Option<(Rational, usize)> = None;
            for (q, cs) in self.refn.inside.iter().enumerate() {
                if cs.iter().all(|&c| u[c]) {
                    continue;
                }
                let mut t = u.clone();
                cs.iter().for_each(|&c| t[c] = true);
                let (num, den) = self.closure_value(&t);
                let v = ratio_or_zero(&num, &den);
                if v > current && step.as_ref().map_or(true, |(b, _)| v > *b) {
                    step = Some((v, q));
                }
            }
            let Some((v, q)) = step else { break };
            self.refn.inside[q].iter().for_each(|&c| u[c] = true);
            current = v.clone();
            best = Some((v, u.clone()));
        }
        self.finish(seed, best, false, "greedy")
    }
}

/// Dinkelbach iteration over staircase unions of hooked support rectangles.
///
/// For fixed `λ` the objective of a staircase with corners `(p_1,q_1), …, (p_n,q_n)`
/// (`p` increasing, `q` decreasing) is `Σ f(p_k,q_k) − Σ f(p_{k+1},q_k)` with
/// `f = D − λν`, maximized by a dynamic program over the grid.
fn staircase(alpha: &Weight, mu: &Measure, seed: &ConstantReport) -> ConstantReport {
    let grid = HookedGrid::new(alpha, mu);
    let (mut lambda, seed_set) = seed_lambda(seed);
    let mut corners_best: Option<Vec<(usize, usize)>> = None;
    loop {
        let Some(corners) = best_staircase(&grid, &lambda) else { break };
        let (num, den) = grid.staircase_totals(&corners);
        let next = HookedGrid::ratio(&num, &den);
        if next <= lambda {
            break;
        }
        lambda = next;
        corners_best = Some(corners);
    }
    let set = match corners_best {
        Some(cs) => BoundarySet::from_rects(cs.iter().map(|&(p, q)| HookedGrid::rect(p, q))),
        None => seed_set,
    };
    ConstantReport::exact(ConstantKind::Carleson, lambda, Witness::Set(set), "hooked-staircase-dinkelbach")
}

/// Corners of a staircase with strictly positive objective at `λ`, if any.
fn best_staircase(grid: &HookedGrid, lambda: &Rational) -> Option<Vec<(usize, usize)>> {
    let side = grid.side;
    let (a, b) = (lambda.numer().clone(), lambda.denom().clone());
    let f = |p: usize, q: usize| -> BigInt {
        let i = grid.at(p, q);
        &b * &grid.dd[i] - &a * &grid.nd[i]
    };
    // colmax[q] = max over earlier columns p' of best(p', q), with its p'
    let mut colmax: Vec<Option<(BigInt, usize)>> = vec![None; side];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; side * side];
    let mut top: Option<(BigInt, (usize, usize))> = None;
    for p in 0..side {
        let mut suffix: Option<(BigInt, usize)> = None;
        let mut col: Vec<Option<BigInt>> = vec![None; side];
        for q in (0..side).rev() {
            let here = if grid.support[grid.at(p, q)] { Some(f(p, q)) } else { None };
            if let Some(fv) = here {
                let (val, from) = match &suffix {
                    Some((s, qq)) if s.is_positive() => {
                        let pp = colmax[*qq].as_ref().map(|(_, pp)| *pp).expect("suffix row has an entry");
                        (fv + s, Some((pp, *qq)))
                    }
                    _ => (fv, None),
                };
                pred[grid.at(p, q)] = from;
                if top.as_ref().map_or(true, |(t, _)| val > *t) {
                    top = Some((val.clone(), (p, q)));
                }
                col[q] = Some(val);
            }
            if let Some((cm, _)) = &colmax[q] {
                let cand = cm - f(p, q);
                if suffix.as_ref().map_or(true, |(s, _)| cand > *s) {
                    suffix = Some((cand, q));
                }
            }
        }
        for (q, v) in col.into_iter().enumerate() {
            if let Some(v) = v {
                if colmax[q].as_ref().map_or(true, |(c, _)| v > *c) {
                    colmax[q] = Some((v, p));
                }
            }
        }
    }
    let (value, mut at) = top?;
    if !value.is_positive() {
        return None;
    }
    let mut corners = vec![at];
    while let Some(prev) = pred[grid.at(at.0, at.1)] {
        corners.push(prev);
        at = prev;
    }
    corners.reverse();
    Some(corners)
}
