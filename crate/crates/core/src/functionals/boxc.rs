use std::collections::BTreeSet;

use num_traits::Zero;

use super::hooked::HookedGrid;
use super::{ConstantKind, ConstantReport, Witness};
use crate::bigrid::{DyadicInterval, DyadicRect};
use crate::measure::Measure;
use crate::rational::{ratio_or_zero, Rational};
use crate::weight::Weight;

/// Largest candidate set evaluated exactly on the general path.
pub(crate) const BOX_CANDIDATE_CAP: usize = 250_000;

/// Join-closure of a family of dyadic intervals.
fn interval_closure(items: impl IntoIterator<Item = DyadicInterval>) -> BTreeSet<DyadicInterval> {
    let mut set: BTreeSet<DyadicInterval> = items.into_iter().collect();
    loop {
        let v: Vec<&DyadicInterval> = set.iter().collect();
        let mut fresh = Vec::new();
        for (i, a) in v.iter().enumerate() {
            for b in &v[i + 1..] {
                let j = a.join(b);
                if !set.contains(&j) {
                    fresh.push(j);
                }
            }
        }
        if fresh.is_empty() {
            return set;
        }
        set.extend(fresh);
    }
}

/// `Σ_{Q ⊆ R} α_Q μ(Q)² / μ(R)` with `0/0 = 0`.
pub fn box_ratio(alpha: &Weight, mu: &Measure, r: &DyadicRect) -> Rational {
    let num = alpha
        .iter()
        .filter(|(q, _)| r.contains(q))
        .fold(Rational::zero(), |acc, (q, a)| {
            let m = mu.mass(q);
            acc + a * &m * &m
        });
    ratio_or_zero(&num, &mu.mass(r))
}

/// `sup_R Σ_{Q ⊆ R} α_Q μ(Q)² / μ(R)`.
///
/// The sup is attained on the join-closure of the support: between joins the
/// numerator is constant while the mass only grows.
pub fn box_constant(alpha: &Weight, mu: &Measure) -> ConstantReport {
    if alpha.is_empty() {
        return ConstantReport::exact(ConstantKind::Box, Rational::zero(), Witness::None, "empty-support");
    }
    if alpha.all_hooked() {
        return hooked_box(alpha, mu);
    }
    let xs = interval_closure(alpha.rects().map(|r| r.x.clone()));
    let ys = interval_closure(alpha.rects().map(|r| r.y.clone()));
    if xs.len().saturating_mul(ys.len()) <= BOX_CANDIDATE_CAP {
        let (best, arg) = best_over(alpha, mu, xs.iter().flat_map(|x| ys.iter().map(move |y| DyadicRect::new(x.clone(), y.clone()))));
        return ConstantReport::exact(ConstantKind::Box, best, arg.map_or(Witness::None, Witness::Rect), "axis-closure-enumeration");
    }
    let support: Vec<DyadicRect> = alpha.rects().cloned().collect();
    let pairs = support
        .iter()
        .enumerate()
        .flat_map(|(i, a)| support[i..].iter().map(move |b| a.join(b)));
    let (best, arg) = best_over(alpha, mu, pairs);
    ConstantReport::lower_bound(ConstantKind::Box, best, arg.map_or(Witness::None, Witness::Rect), "pairwise-joins")
}

fn best_over(alpha: &Weight, mu: &Measure, cands: impl Iterator<Item = DyadicRect>) -> (Rational, Option<DyadicRect>) {
    let w: Vec<(&DyadicRect, Rational)> = alpha
        .iter()
        .map(|(q, a)| {
            let m = mu.mass(q);
            (q, a * &m * &m)
        })
        .collect();
    let mut best = Rational::zero();
    let mut arg = None;
    for r in cands {
        let num = w
            .iter()
            .filter(|(q, _)| r.contains(q))
            .fold(Rational::zero(), |acc, (_, v)| acc + v);
        let v = ratio_or_zero(&num, &mu.mass(&r));
        if arg.is_none() || v > best {
            best = v;
            arg = Some(r);
        }
    }
    (best, arg)
}

fn hooked_box(alpha: &Weight, mu: &Measure) -> ConstantReport {
    let grid = HookedGrid::new(alpha, mu);
    let mut arg: Option<usize> = None;
    for i in 0..grid.dd.len() {
        if grid.nd[i].is_zero() {
            continue;
        }
        let better = match arg {
            None => true,
            Some(j) => HookedGrid::greater(&grid.dd[i], &grid.nd[i], &grid.dd[j], &grid.nd[j]),
        };
        if better {
            arg = Some(i);
        }
    }
    match arg {
        None => ConstantReport::exact(ConstantKind::Box, Rational::zero(), Witness::Rect(DyadicRect::root()), "hooked-grid"),
        Some(i) => {
            let (p, q) = (i / grid.side, i % grid.side);
            let value = HookedGrid::ratio(&grid.dd[i], &grid.nd[i]);
            ConstantReport::exact(ConstantKind::Box, value, Witness::Rect(HookedGrid::rect(p, q)), "hooked-grid")
        }
    }
}
