//! Builders for the separating instances and the combinatorial helpers around them.
//!
//! Rectangle names follow one convention throughout: `Q_j = hooked(2^j, N/2^j)` for
//! the staircase examples, with `Q^{++}` the upper-right quadrant carrying mass.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::bigrid::{DyadicRect, Geometry};
use crate::error::{Error, Result};
use crate::functionals::{box_constant, carleson_constant};
use crate::measure::{Atom, BoundarySet, Measure};
use crate::rational::{format_rational, int, pow2, rat, Rational};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExampleKind {
    Simple,
    Potential,
    Rec,
    Embedding,
    Family,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Params {
    pub n: Option<u64>,
    pub m: Option<u32>,
    pub k: Option<u32>,
    pub delta: Option<Rational>,
}

impl Serialize for Params {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Params", 4)?;
        st.serialize_field("N", &self.n)?;
        st.serialize_field("M", &self.m)?;
        st.serialize_field("K", &self.k)?;
        st.serialize_field("delta", &self.delta.as_ref().map(format_rational))?;
        st.end()
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub kind: ExampleKind,
    pub geometry: Geometry,
    pub mu: Measure,
    pub nu: Option<Measure>,
    pub alpha: Weight,
    pub sets: BTreeMap<String, BoundarySet>,
    pub params: Params,
    pub rects: BTreeMap<String, Vec<DyadicRect>>,
    /// Measure components (`μ₀, μ₁, …`) where the construction has them.
    pub components: Vec<Measure>,
    /// `R ↦ μ₀(R) α_R` on the support, for the embedding example.
    pub f: Option<Weight>,
}

impl Instance {
    /// The measure every constant is evaluated against (`ν` when present).
    pub fn test_measure(&self) -> &Measure {
        self.nu.as_ref().unwrap_or(&self.mu)
    }

    pub fn set(&self, name: &str) -> Option<&BoundarySet> {
        self.sets.get(name)
    }

    pub fn rect_list(&self, name: &str) -> &[DyadicRect] {
        self.rects.get(name).map_or(&[], |v| v.as_slice())
    }
}

fn log2_exact(n: u64) -> Option<u32> {
    (n.is_power_of_two()).then(|| n.trailing_zeros())
}

/// Staircase generator `hooked(2^j, N/2^j)`.
pub fn staircase_rect(n: u64, j: u32) -> DyadicRect {
    DyadicRect::hooked(1u32 << j, (n >> j) as u32)
}

/// Lebesgue measure and `α = 1/area` on a family of rectangles.
pub fn carleson_family_weight(family: &[DyadicRect]) -> Result<Instance> {
    let alpha = Weight::from_family_reciprocal_area(family)?;
    let depth = family.iter().map(|r| r.x.level().max(r.y.level())).max().unwrap_or(0).max(1);
    let geometry = Geometry::new(depth);
    let mu = Measure::uniform(geometry, DyadicRect::root(), int(1))?;
    let mut sets = BTreeMap::new();
    sets.insert("U".to_string(), BoundarySet::from_rects(family.iter().cloned()));
    let mut rects = BTreeMap::new();
    rects.insert("family".to_string(), family.to_vec());
    Ok(Instance {
        kind: ExampleKind::Family,
        geometry,
        mu,
        nu: None,
        alpha,
        sets,
        params: Params { n: Some(depth as u64), ..Params::default() },
        rects,
        components: Vec::new(),
        f: None,
    })
}

/// Result of the exhaustive family search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyGap {
    pub family: Vec<DyadicRect>,
    pub carleson: Rational,
    pub box_value: Rational,
    pub ratio: Rational,
    pub families_checked: u64,
}

/// Exhaustive search over families of at most `max_size` rectangles at a depth
/// with at most 16 cells, maximizing carleson/box for Lebesgue measure.
///
/// With `α = 1/area` and Lebesgue measure every term `α_Q μ(Q)²` is `area(Q)`, so
/// both constants reduce to integer arithmetic on cell bitmasks.
pub fn family_gap_search(depth: u32, max_size: usize) -> Result<FamilyGap> {
    if depth > 2 {
        return Err(Error::CapExceeded { size: depth as usize, cap: 2 });
    }
    let g = Geometry::new(depth);
    let cells = g.cells(2)?;
    let rects: Vec<DyadicRect> = g.enumerate_all_capped(2)?.collect();
    let masks: Vec<u32> = rects
        .iter()
        .map(|r| cells.iter().enumerate().filter(|(_, c)| r.contains(c)).fold(0, |m, (i, _)| m | 1 << i))
        .collect();
    let mut search = GapSearch { masks: &masks, max_size, checked: 0, best: None };
    search.descend(0, &mut Vec::new());
    let (_, _, idx, (cn, cd), (bn, bd)) = search.best.ok_or_else(|| Error::BadParameter("empty search".into()))?;
    let carleson = rat(cn as i64, cd as i64);
    let box_value = rat(bn as i64, bd as i64);
    Ok(FamilyGap {
        ratio: &carleson / &box_value,
        family: idx.iter().map(|&i| rects[i].clone()).collect(),
        carleson,
        box_value,
        families_checked: search.checked,
    })
}

type Frac = (u64, u64);

struct GapSearch<'a> {
    masks: &'a [u32],
    max_size: usize,
    checked: u64,
    /// (ratio numerator, ratio denominator, family, carleson, box)
    best: Option<(u64, u64, Vec<usize>, Frac, Frac)>,
}

fn better(a: Frac, b: Frac) -> bool {
    a.0 * b.1 > b.0 * a.1
}

impl GapSearch<'_> {
    /// Carleson and box constants of a family in cell units.
    fn score(&self, fam: &[u32]) -> (Frac, Frac) {
        let mut c_best = (0u64, 1u64);
        for sub in 1u32..(1 << fam.len()) {
            let e = (0..fam.len()).filter(|i| sub >> i & 1 == 1).fold(0u32, |m, i| m | fam[i]);
            let num = fam.iter().filter(|&&f| f & !e == 0).map(|f| f.count_ones() as u64).sum();
            let cand = (num, e.count_ones() as u64);
            if better(cand, c_best) {
                c_best = cand;
            }
        }
        let mut b_best = (0u64, 1u64);
        for &r in self.masks {
            let num = fam.iter().filter(|&&f| f & !r == 0).map(|f| f.count_ones() as u64).sum();
            let cand = (num, r.count_ones() as u64);
            if better(cand, b_best) {
                b_best = cand;
            }
        }
        (c_best, b_best)
    }

    fn descend(&mut self, start: usize, chosen: &mut Vec<usize>) {
        if !chosen.is_empty() {
            self.checked += 1;
            let fam: Vec<u32> = chosen.iter().map(|&i| self.masks[i]).collect();
            let (c, b) = self.score(&fam);
            let key = (c.0 * b.1, c.1 * b.0);
            if self.best.as_ref().map_or(true, |(n, d, ..)| better(key, (*n, *d))) {
                self.best = Some((key.0, key.1, chosen.clone(), c, b));
            }
        }
        if chosen.len() == self.max_size {
            return;
        }
        for i in start..self.masks.len() {
            chosen.push(i);
            self.descend(i + 1, chosen);
            chosen.pop();
        }
    }
}

/// Simple separating example: `N = 4^k`, `k ≥ 2`.
pub fn simple_example(n: u64) -> Result<Instance> {
    let bad = || Error::BadParameter(format!("simple example needs N = 4^k with k >= 2, got {n}"));
    let lg = log2_exact(n).ok_or_else(bad)?;
    if lg % 2 != 0 || lg < 4 || n > 1 << 20 {
        return Err(bad());
    }
    let s = 1i64 << (lg / 2);
    let nn = n as u32;
    let geometry = Geometry::new(nn);
    let omega = DyadicRect::hooked(nn, nn);
    let qs: Vec<DyadicRect> = (1..=nn).map(|i| DyadicRect::hooked(i - 1, nn - i)).collect();
    let quads: Vec<DyadicRect> = qs.iter().map(|q| q.upper_right()).collect();
    let mut atoms = vec![Atom::new(omega.clone(), rat(1, s))];
    atoms.extend(quads.iter().map(|q| Atom::new(q.clone(), rat(1, 4))));
    let mu = Measure::new(geometry, atoms)?;
    let alpha = Weight::from_entries(
        std::iter::once(omega.clone()).chain(qs.iter().cloned()).map(|r| (r, int(1))),
    )?;
    let mut sets = BTreeMap::new();
    sets.insert("omega".to_string(), BoundarySet::from_rect(omega.clone()));
    sets.insert("E".to_string(), BoundarySet::from_rect(omega));
    let mut rects = BTreeMap::new();
    rects.insert("Q".to_string(), qs);
    rects.insert("Q++".to_string(), quads);
    Ok(Instance {
        kind: ExampleKind::Simple,
        geometry,
        mu,
        nu: None,
        alpha,
        sets,
        params: Params { n: Some(n), ..Params::default() },
        rects,
        components: Vec::new(),
        f: None,
    })
}

fn staircase_params(n: u64, delta: &Rational) -> Result<u32> {
    let m = log2_exact(n).ok_or_else(|| Error::BadParameter(format!("N = {n} is not a power of two")))?;
    if m < 2 || n > 1 << 16 {
        return Err(Error::BadParameter(format!("N = {n} out of range")));
    }
    if *delta <= Rational::zero() || *delta > Rational::one() {
        return Err(Error::BadParameter(format!("delta = {} not in (0, 1]", format_rational(delta))));
    }
    Ok(m)
}

/// Potential example: `N = 2^M`; mass `δ/N` on each `Q_j^{++}`, `α` the up-set of the `Q_j`.
///
/// The geometry has depth `N + 1` because `Q_M^{++}` lives at x-level `N + 1`.
pub fn potential_example(n: u64, delta: &Rational) -> Result<Instance> {
    let m = staircase_params(n, delta)?;
    let geometry = Geometry::new(n as u32 + 1);
    let qs: Vec<DyadicRect> = (1..=m).map(|j| staircase_rect(n, j)).collect();
    let quads: Vec<DyadicRect> = qs.iter().map(|q| q.upper_right()).collect();
    let mass = delta / int(n as i64);
    let mu = Measure::new(geometry, quads.iter().map(|q| Atom::new(q.clone(), mass.clone())).collect())?;
    let alpha = Weight::from_upset_generators(&qs, &geometry)?;
    let omega0 = DyadicRect::hooked(n as u32, n as u32);
    let mut sets = BTreeMap::new();
    sets.insert("omega0".to_string(), BoundarySet::from_rect(omega0));
    let mut rects = BTreeMap::new();
    rects.insert("Q".to_string(), qs);
    rects.insert("Q++".to_string(), quads);
    Ok(Instance {
        kind: ExampleKind::Potential,
        geometry,
        components: vec![mu.clone()],
        mu,
        nu: None,
        alpha,
        sets,
        params: Params { n: Some(n), m: Some(m), k: None, delta: Some(delta.clone()) },
        rects,
        f: None,
    })
}

pub fn default_rec_delta(n: u64) -> Rational {
    rat(1, log2_exact(n).unwrap_or(1).max(1) as i64)
}

/// Potential example plus mass `1/(MN)` spread on `ω₀`; `F = ∪ Q_j^-`.
pub fn rec_example(n: u64, delta: &Rational) -> Result<Instance> {
    let mut inst = potential_example(n, delta)?;
    let m = inst.params.m.expect("set by potential_example");
    let omega0 = DyadicRect::hooked(n as u32, n as u32);
    let extra = Measure::uniform(inst.geometry, omega0, rat(1, m as i64 * n as i64))?;
    let nu = inst.mu.plus(&extra)?;
    let minus: Vec<DyadicRect> = inst
        .rect_list("Q")
        .iter()
        .map(|q| inst.geometry.subrects(q).map(|s| s.minus))
        .collect::<Result<_>>()?;
    inst.sets.insert("F".to_string(), BoundarySet::from_rects(minus.iter().cloned()));
    inst.rects.insert("Q-".to_string(), minus);
    inst.kind = ExampleKind::Rec;
    inst.nu = Some(nu);
    inst.components.push(extra);
    Ok(inst)
}

pub fn default_embedding_delta(n: u64) -> Rational {
    let m = log2_exact(n).unwrap_or(2).max(2);
    let ceil_log = 32 - (m - 1).leading_zeros();
    rat(1, ceil_log.max(1) as i64)
}

/// `Q_{k,j} = ⋂_{i=j}^{j+2^k} Q_{0,i}`, for `j = 1..M-2^k`.
pub fn embedding_family(n: u64, m: u32, k: u32) -> Vec<DyadicRect> {
    let run = 1u32 << k;
    (1..=m.saturating_sub(run))
        .map(|j| (j..=j + run).map(|i| staircase_rect(n, i)).reduce(|a, b| a.intersect(&b).expect("hooked rectangles meet")).expect("nonempty run"))
        .collect()
}

/// Embedding example: `μ = μ₀ + Σ_{k=1..K} μ_k`, with `μ_k` of mass `2^{-2k} δ/N` on each `Q_{k,j}^{++}`.
pub fn embedding_example(n: u64, delta: &Rational, k_max: u32) -> Result<Instance> {
    let base = potential_example(n, delta)?;
    let m = base.params.m.expect("set by potential_example");
    if k_max < 1 || (1u32 << k_max.min(31)) > m - 1 {
        return Err(Error::BadParameter(format!("K = {k_max} needs 1 <= K and 2^K <= M - 1 = {}", m - 1)));
    }
    let geometry = base.geometry;
    let mu0 = base.mu.clone();
    let mut mu = mu0.clone();
    let mut components = vec![mu0.clone()];
    let mut rects = base.rects.clone();
    for k in 1..=k_max {
        let fam = embedding_family(n, m, k);
        let quads: Vec<DyadicRect> = fam.iter().map(|q| q.upper_right()).collect();
        let mass = delta * pow2(-2 * k as i64) / int(n as i64);
        let mk = Measure::new(geometry, quads.iter().map(|q| Atom::new(q.clone(), mass.clone())).collect())?;
        mu = mu.plus(&mk)?;
        components.push(mk);
        rects.insert(format!("Q{k}"), fam);
        rects.insert(format!("Q{k}++"), quads);
    }
    let alpha = base.alpha.clone();
    let f = alpha.map_values(|r, a| a * mu0.mass(r));
    Ok(Instance {
        kind: ExampleKind::Embedding,
        geometry,
        mu,
        nu: None,
        alpha,
        sets: base.sets,
        params: Params { n: Some(n), m: Some(m), k: Some(k_max), delta: Some(delta.clone()) },
        rects,
        components,
        f: Some(f),
    })
}

/// Indices `j` (1-based) of the generators contained in `r`, as a closed interval.
fn generator_interval(r: &DyadicRect, generators: &[DyadicRect]) -> Option<(usize, usize)> {
    let idx: Vec<usize> = (0..generators.len()).filter(|&j| r.contains(&generators[j])).collect();
    Some((*idx.first()? + 1, *idx.last()? + 1))
}

/// Clean system: one join per merged (overlapping or adjacent) generator interval.
pub fn cleanify(hooked: &[DyadicRect], generators: &[DyadicRect]) -> Result<Vec<DyadicRect>> {
    if let Some(r) = hooked.iter().chain(generators).find(|r| !r.is_hooked()) {
        return Err(Error::NotHooked(r.to_string()));
    }
    let mut intervals: Vec<(usize, usize)> = hooked.iter().filter_map(|r| generator_interval(r, generators)).collect();
    intervals.sort();
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for (a, b) in intervals {
        match merged.last_mut() {
            Some((_, e)) if a <= *e + 1 => *e = (*e).max(b),
            _ => merged.push((a, b)),
        }
    }
    Ok(merged
        .into_iter()
        .map(|(a, b)| generators[a - 1..b].iter().cloned().reduce(|x, y| x.join(&y)).expect("nonempty interval"))
        .collect())
}

/// Generator-index intervals of a system of hooked rectangles.
pub fn generator_intervals(hooked: &[DyadicRect], generators: &[DyadicRect]) -> Vec<Option<(usize, usize)>> {
    hooked.iter().map(|r| generator_interval(r, generators)).collect()
}

/// `(|c_j|, |C^{[m, m+k]}_j|)` for the staircase with `N = 2^M`.
///
/// `c_j`: hooked rectangles whose generator set is exactly `{j}`. `C^{[m,m+k]}_j`:
/// hooked rectangles whose generator set is exactly `[m, m+k]`, counted when
/// `j` lies in the run and zero otherwise.
pub fn class_count(n: u64, j: u32, m: u32, k: u32) -> Result<(u64, u64)> {
    let big_m = log2_exact(n).filter(|&mm| mm >= 1).ok_or_else(|| Error::BadParameter(format!("N = {n} is not a power of two")))?;
    if j < 1 || j > big_m || m < 1 || m + k > big_m {
        return Err(Error::BadParameter(format!("indices out of [1, {big_m}]")));
    }
    let c = run_count(n, big_m, j, j);
    let cc = if (m..=m + k).contains(&j) { run_count(n, big_m, m, m + k) } else { 0 };
    Ok((c, cc))
}

/// Hooked `(u, v)` containing exactly `Q_a, …, Q_b`: `2^{a-1} < u ≤ 2^a` (or `0 ≤ u ≤ 2^a`
/// when `a = 1`) and `N/2^{b+1} < v ≤ N/2^b` (or `0 ≤ v` when `b = M`).
fn run_count(n: u64, big_m: u32, a: u32, b: u32) -> u64 {
    let u_hi = 1u64 << a;
    let u_lo = if a > 1 { (1u64 << (a - 1)) + 1 } else { 0 };
    let v_hi = n >> b;
    let v_lo = if b < big_m { (n >> (b + 1)) + 1 } else { 0 };
    (u_hi + 1 - u_lo) * (v_hi + 1 - v_lo)
}

/// The same count by enumerating the hooked grid.
pub fn class_count_by_enumeration(n: u64, a: u32, b: u32) -> u64 {
    let m = log2_exact(n).unwrap_or(0);
    let gens: Vec<DyadicRect> = (1..=m).map(|j| staircase_rect(n, j)).collect();
    let mut count = 0;
    for u in 0..=n as u32 {
        for v in 0..=n as u32 {
            let r = DyadicRect::hooked(u, v);
            if generator_interval(&r, &gens) == Some((a as usize, b as usize)) {
                count += 1;
            }
        }
    }
    count
}

/// Box and Carleson constants of a family instance together.
pub fn family_constants(inst: &Instance) -> Result<(Rational, Rational)> {
    let b = box_constant(&inst.alpha, &inst.mu);
    let c = carleson_constant(&inst.alpha, &inst.mu)?;
    Ok((b.lower, c.lower))
}
