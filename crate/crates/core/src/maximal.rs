//! Strong dyadic maximal function at small depth, the weights it induces, and
//! fractional sparse selection by exact max-flow.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::bigrid::{DyadicRect, Geometry};
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::functionals::embedding_rayleigh;
use crate::measure::{Measure, StepFunction};
use crate::rational::{format_rational, from_f64, pow2, ratio_or_zero, to_f64, Rational};
use crate::refine::{Refinement, DEFAULT_PIECE_CAP};
use crate::weight::Weight;

pub const MAXIMAL_DEPTH_CAP: u32 = 8;
/// Largest flow network (nodes) accepted by `sparse_selection`.
pub const SELECTION_NODE_CAP: usize = 1000;
const ASCENT_POWER_STEPS: usize = 30;

/// Per-cell masses, integrals of `|ψ|`, and prefix sums over the `2^N × 2^N` cell grid.
struct CellGrid {
    depth: u32,
    side: usize,
    mass: Vec<Rational>,
    value: Vec<Rational>,
    pm: Vec<Rational>,
    pi: Vec<Rational>,
}

impl CellGrid {
    fn new(mu: &Measure, psi: &StepFunction, g: &Geometry) -> Result<Self> {
        if g.depth > MAXIMAL_DEPTH_CAP {
            return Err(Error::CapExceeded { size: g.depth as usize, cap: MAXIMAL_DEPTH_CAP as usize });
        }
        let side = 1usize << g.depth;
        let mut mass = vec![Rational::zero(); side * side];
        for a in mu.atoms() {
            g.check(&a.support)?;
            let block = Self::block_of(g.depth, &a.support);
            let share = &a.mass * pow2(-((2 * g.depth - a.support.x.level() - a.support.y.level()) as i64));
            Self::for_block(side, block, |i| mass[i] += &share);
        }
        let mut value = vec![Rational::zero(); side * side];
        for (r, v) in psi.pieces() {
            g.check(r)?;
            let block = Self::block_of(g.depth, r);
            let av = v.abs();
            Self::for_block(side, block, |i| value[i] = av.clone());
        }
        let integral: Vec<Rational> = mass.iter().zip(&value).map(|(m, v)| m * v).collect();
        let pm = Self::prefix(side, &mass);
        let pi = Self::prefix(side, &integral);
        Ok(Self { depth: g.depth, side, mass, value, pm, pi })
    }

    /// Cell block `[x0, x1) × [y0, y1)` of an admitted rectangle.
    fn block_of(depth: u32, r: &DyadicRect) -> (usize, usize, usize, usize) {
        let sx = depth - r.x.level();
        let sy = depth - r.y.level();
        let ix = usize::try_from(r.x.index()).expect("index fits the cell grid");
        let iy = usize::try_from(r.y.index()).expect("index fits the cell grid");
        (ix << sx, (ix + 1) << sx, iy << sy, (iy + 1) << sy)
    }

    fn for_block(side: usize, (x0, x1, y0, y1): (usize, usize, usize, usize), mut f: impl FnMut(usize)) {
        for y in y0..y1 {
            for x in x0..x1 {
                f(y * side + x);
            }
        }
    }

    fn prefix(side: usize, a: &[Rational]) -> Vec<Rational> {
        let w = side + 1;
        let mut p = vec![Rational::zero(); w * w];
        for y in 0..side {
            for x in 0..side {
                p[(y + 1) * w + x + 1] = &a[y * side + x] + &p[y * w + x + 1] + &p[(y + 1) * w + x] - &p[y * w + x];
            }
        }
        p
    }

    fn block_sum(&self, p: &[Rational], (x0, x1, y0, y1): (usize, usize, usize, usize)) -> Rational {
        let w = self.side + 1;
        &p[y1 * w + x1] - &p[y0 * w + x1] - &p[y1 * w + x0] + &p[y0 * w + x0]
    }

    fn cell(&self, i: usize) -> DyadicRect {
        let (x, y) = (i % self.side, i / self.side);
        DyadicRect::from_parts(self.depth, x as u64, self.depth, y as u64).expect("cell index in range")
    }

    fn rect_at(&self, i: usize, lx: u32, ly: u32) -> DyadicRect {
        let (x, y) = (i % self.side, i / self.side);
        DyadicRect::from_parts(lx, (x >> (self.depth - lx)) as u64, ly, (y >> (self.depth - ly)) as u64)
            .expect("ancestor index in range")
    }

    fn average(&self, r: &DyadicRect) -> Rational {
        let b = Self::block_of(self.depth, r);
        ratio_or_zero(&self.block_sum(&self.pi, b), &self.block_sum(&self.pm, b))
    }

    fn rect_mass(&self, r: &DyadicRect) -> Rational {
        self.block_sum(&self.pm, Self::block_of(self.depth, r))
    }

    /// Ancestor levels of a cell in the pinned order: area descending, then x-level.
    fn level_order(&self) -> Vec<(u32, u32)> {
        let n = self.depth;
        let mut v: Vec<(u32, u32)> = (0..=n).flat_map(|lx| (0..=n).map(move |ly| (lx, ly))).collect();
        v.sort_by_key(|&(lx, ly)| (lx + ly, lx, ly));
        v
    }

    /// `(ℳψ(x), first maximizing rectangle)` per cell.
    fn maximize(&self) -> Vec<(Rational, DyadicRect)> {
        let order = self.level_order();
        let mut cache: BTreeMap<DyadicRect, Rational> = BTreeMap::new();
        (0..self.side * self.side)
            .map(|i| {
                let mut best: Option<(Rational, DyadicRect)> = None;
                for &(lx, ly) in &order {
                    let r = self.rect_at(i, lx, ly);
                    let v = cache.entry(r.clone()).or_insert_with(|| self.average(&r)).clone();
                    if best.as_ref().map_or(true, |(b, _)| v > *b) {
                        best = Some((v, r));
                    }
                }
                best.expect("every cell has ancestors")
            })
            .collect()
    }
}

/// `ℳ_μ ψ` on boundary cells, zero cells omitted.
pub fn maximal_function(mu: &Measure, psi: &StepFunction, g: &Geometry) -> Result<StepFunction> {
    let grid = CellGrid::new(mu, psi, g)?;
    let pieces = grid
        .maximize()
        .into_iter()
        .enumerate()
        .filter(|(_, (v, _))| !v.is_zero())
        .map(|(i, (v, _))| (grid.cell(i), v))
        .collect();
    Ok(StepFunction::from_disjoint(pieces))
}

/// Cells assigned to their first maximizing rectangle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArgmaxDecomposition {
    /// cell → chosen rectangle, for cells with `ℳψ > 0`
    pub assignment: BTreeMap<DyadicRect, DyadicRect>,
    /// chosen rectangle → its cells `A'_Q`
    pub classes: BTreeMap<DyadicRect, Vec<DyadicRect>>,
}

pub fn argmax_decomposition(mu: &Measure, psi: &StepFunction, g: &Geometry) -> Result<ArgmaxDecomposition> {
    let grid = CellGrid::new(mu, psi, g)?;
    Ok(decompose(&grid))
}

fn decompose(grid: &CellGrid) -> ArgmaxDecomposition {
    let mut assignment = BTreeMap::new();
    let mut classes: BTreeMap<DyadicRect, Vec<DyadicRect>> = BTreeMap::new();
    for (i, (v, r)) in grid.maximize().into_iter().enumerate() {
        if v.is_positive() {
            let c = grid.cell(i);
            classes.entry(r.clone()).or_default().push(c.clone());
            assignment.insert(c, r);
        }
    }
    ArgmaxDecomposition { assignment, classes }
}

/// `α_Q = μ(A'_Q) / μ(Q)²` on the argmax classes.
pub fn weight_from_function(mu: &Measure, psi: &StepFunction, g: &Geometry) -> Result<Weight> {
    let grid = CellGrid::new(mu, psi, g)?;
    let dec = decompose(&grid);
    let entries = dec.classes.iter().map(|(q, cells)| {
        let a = cells.iter().fold(Rational::zero(), |acc, c| acc + grid.rect_mass(c));
        let mq = grid.rect_mass(q);
        (q.clone(), ratio_or_zero(&a, &(&mq * &mq)))
    });
    Weight::from_entries(entries.collect::<Vec<_>>())
}

/// `∫ (ℳ_μ ψ)² dμ`.
pub fn maximal_square_integral(mu: &Measure, psi: &StepFunction, g: &Geometry) -> Result<Rational> {
    let grid = CellGrid::new(mu, psi, g)?;
    Ok(grid
        .maximize()
        .iter()
        .zip(&grid.mass)
        .fold(Rational::zero(), |acc, ((v, _), m)| acc + m * v * v))
}

/// Coordinate ascent on `∫(ℳψ)²/∫ψ²`: fix the argmax map, power-iterate the
/// resulting linear averaging operator, reassign. Values are exact ratios of
/// the iterates, reported as a running maximum.
pub fn maximal_norm_lower_bound(mu: &Measure, psi0: &StepFunction, g: &Geometry, rounds: usize) -> Result<Vec<Rational>> {
    let mut grid = CellGrid::new(mu, psi0, g)?;
    let norm = |grid: &CellGrid| grid.mass.iter().zip(&grid.value).fold(Rational::zero(), |acc, (m, v)| acc + m * v * v);
    if norm(&grid).is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let mut out: Vec<Rational> = Vec::with_capacity(rounds);
    let mut best = Rational::zero();
    for round in 0..rounds.max(1) {
        let maxed = grid.maximize();
        let num = maxed.iter().zip(&grid.mass).fold(Rational::zero(), |acc, ((v, _), m)| acc + m * v * v);
        let ratio = num / norm(&grid);
        if round == 0 || ratio > best {
            best = ratio;
        }
        out.push(best.clone());
        if round + 1 == rounds.max(1) {
            break;
        }
        let next = ascent_step(&grid, &maxed);
        let candidate = StepFunction::from_disjoint(
            next.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, &v)| (grid.cell(i), from_f64(v))).collect(),
        );
        let cand_grid = CellGrid::new(mu, &candidate, g)?;
        if !norm(&cand_grid).is_zero() {
            grid = cand_grid;
        }
    }
    Ok(out)
}

/// A few power steps of `L*L` where `(Lψ)(x)` is the average of `ψ` over the rectangle assigned to `x`.
fn ascent_step(grid: &CellGrid, maxed: &[(Rational, DyadicRect)]) -> Vec<f64> {
    let side = grid.side;
    let mass: Vec<f64> = grid.mass.iter().map(to_f64).collect();
    let blocks: Vec<(usize, usize, usize, usize)> = maxed.iter().map(|(_, r)| CellGrid::block_of(grid.depth, r)).collect();
    let w = side + 1;
    let prefix = |a: &[f64]| {
        let mut p = vec![0.0f64; w * w];
        for y in 0..side {
            for x in 0..side {
                p[(y + 1) * w + x + 1] = a[y * side + x] + p[y * w + x + 1] + p[(y + 1) * w + x] - p[y * w + x];
            }
        }
        p
    };
    let sum = |p: &[f64], (x0, x1, y0, y1): (usize, usize, usize, usize)| p[y1 * w + x1] - p[y0 * w + x1] - p[y1 * w + x0] + p[y0 * w + x0];
    let pm = prefix(&mass);
    let qmass: Vec<f64> = blocks.iter().map(|&b| sum(&pm, b)).collect();
    let mut psi: Vec<f64> = grid.value.iter().map(to_f64).collect();
    for _ in 0..ASCENT_POWER_STEPS {
        let weighted: Vec<f64> = psi.iter().zip(&mass).map(|(p, m)| p * m).collect();
        let pw = prefix(&weighted);
        // g = Lψ
        let gv: Vec<f64> = blocks.iter().zip(&qmass).map(|(&b, &qm)| if qm > 0.0 { sum(&pw, b) / qm } else { 0.0 }).collect();
        // ψ ← L* g, spreading μ_x g_x / μ(Q_x) over Q_x by a difference array
        let mut diff = vec![0.0f64; w * w];
        for (i, &(x0, x1, y0, y1)) in blocks.iter().enumerate() {
            if qmass[i] <= 0.0 {
                continue;
            }
            let t = mass[i] * gv[i] / qmass[i];
            diff[y0 * w + x0] += t;
            diff[y0 * w + x1] -= t;
            diff[y1 * w + x0] -= t;
            diff[y1 * w + x1] += t;
        }
        let mut next = vec![0.0f64; side * side];
        let mut acc = vec![0.0f64; w * w];
        for y in 0..side {
            for x in 0..side {
                let v = diff[y * w + x] + if y > 0 { acc[(y - 1) * w + x] } else { 0.0 } + if x > 0 { acc[y * w + x - 1] } else { 0.0 }
                    - if x > 0 && y > 0 { acc[(y - 1) * w + x - 1] } else { 0.0 };
                acc[y * w + x] = v;
                next[y * side + x] = if mass[y * side + x] > 0.0 { v } else { 0.0 };
            }
        }
        let top = next.iter().cloned().fold(0.0f64, f64::max);
        if top <= 0.0 || !top.is_finite() {
            break;
        }
        psi = next.into_iter().map(|v| v / top).collect();
    }
    psi
}

/// `α = Σ_i 2^{-i} α^i` (from `i = 1`) and `φ = Σ_i φ_i`.
pub fn combine_weights(pairs: &[(Weight, StepFunction)], g: &Geometry) -> Result<(Weight, StepFunction)> {
    let mut alpha = Weight::empty();
    let mut phi = StepFunction::default();
    for (i, (a, f)) in pairs.iter().enumerate() {
        for r in a.rects().chain(f.pieces().iter().map(|(r, _)| r)) {
            if !g.admits(r) {
                return Err(Error::GeometryMismatch(format!("{r} not admitted at depth {}", g.depth)));
            }
        }
        alpha = alpha.plus(&a.scaled(&pow2(-(i as i64 + 1))));
        phi = phi.add(f);
    }
    Ok((alpha, phi))
}

/// Fractional disjoint selection: `w(Q, p)` mass of piece `p` given to `Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseSelection {
    pub assignments: Vec<(DyadicRect, DyadicRect, Rational)>,
}

impl SparseSelection {
    pub fn selected_mass(&self, q: &DyadicRect) -> Rational {
        self.assignments.iter().filter(|(r, _, _)| r == q).fold(Rational::zero(), |acc, (_, _, w)| acc + w)
    }

    pub fn piece_load(&self, p: &DyadicRect) -> Rational {
        self.assignments.iter().filter(|(_, s, _)| s == p).fold(Rational::zero(), |acc, (_, _, w)| acc + w)
    }
}

/// Support rectangles whose demand exceeds the mass of their union.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfeasibilityCertificate {
    pub rects: Vec<DyadicRect>,
    pub demand: Rational,
    pub capacity: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SelectionOutcome {
    Feasible(SparseSelection),
    Infeasible(InfeasibilityCertificate),
}

impl SelectionOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SelectionOutcome::Feasible(_))
    }
}

impl Serialize for SelectionOutcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        #[derive(Serialize)]
        struct Flow<'a> {
            rect: &'a DyadicRect,
            piece: &'a DyadicRect,
            mass: String,
        }
        let mut m = s.serialize_map(None)?;
        match self {
            SelectionOutcome::Feasible(sel) => {
                m.serialize_entry("feasible", &true)?;
                let flows: Vec<Flow> = sel
                    .assignments
                    .iter()
                    .map(|(r, p, w)| Flow { rect: r, piece: p, mass: format_rational(w) })
                    .collect();
                m.serialize_entry("flows", &flows)?;
            }
            SelectionOutcome::Infeasible(c) => {
                m.serialize_entry("feasible", &false)?;
                m.serialize_entry("violating", &c.rects)?;
                m.serialize_entry("demand", &format_rational(&c.demand))?;
                m.serialize_entry("capacity", &format_rational(&c.capacity))?;
            }
        }
        m.end()
    }
}

/// Transport demands `α_Q μ(Q)²` into refinement pieces `p ⊆ Q` of capacity `μ(p)`.
pub fn sparse_selection(alpha: &Weight, mu: &Measure) -> Result<SelectionOutcome> {
    let refn = Refinement::new(alpha, mu, DEFAULT_PIECE_CAP)?;
    let nq = refn.support.len();
    let nc = refn.classes.len();
    let nodes = nq + nc + 2;
    if nodes > SELECTION_NODE_CAP {
        return Err(Error::CapExceeded { size: nodes, cap: SELECTION_NODE_CAP });
    }
    let (s, t) = (nq + nc, nq + nc + 1);
    let masses = refn.support_masses();
    let demand: Vec<Rational> = refn.support.iter().zip(&masses).map(|((_, a), m)| a * m * m).collect();
    let total: Rational = demand.iter().fold(Rational::zero(), |acc, d| acc + d);
    let infinite = &total + Rational::from_integer(1.into());
    let mut net = FlowNetwork::new(nodes);
    let mut edges = Vec::new();
    for (q, d) in demand.iter().enumerate() {
        if d.is_positive() {
            net.add_edge(s, q, d.clone());
        }
        for &c in &refn.inside[q] {
            edges.push((q, c, net.add_edge(q, nq + c, infinite.clone())));
        }
    }
    for (c, class) in refn.classes.iter().enumerate() {
        net.add_edge(nq + c, t, class.mass.clone());
    }
    let flow = net.max_flow(s, t);
    if flow == total {
        let mut assignments = Vec::new();
        for (q, c, e) in edges {
            let f = net.flow(e);
            if f.is_zero() {
                continue;
            }
            let class = &refn.classes[c];
            for p in &class.pieces {
                let share = &f * &p.mass / &class.mass;
                if !share.is_zero() {
                    assignments.push((refn.support[q].0.clone(), p.rect.clone(), share));
                }
            }
        }
        return Ok(SelectionOutcome::Feasible(SparseSelection { assignments }));
    }
    let side = net.source_side(s);
    let chosen: Vec<usize> = (0..nq).filter(|&q| side[q]).collect();
    let mut covered = vec![false; nc];
    for &q in &chosen {
        for &c in &refn.inside[q] {
            covered[c] = true;
        }
    }
    let capacity = (0..nc).filter(|&c| covered[c]).fold(Rational::zero(), |acc, c| acc + &refn.classes[c].mass);
    let demand_s = chosen.iter().fold(Rational::zero(), |acc, &q| acc + &demand[q]);
    Ok(SelectionOutcome::Infeasible(InfeasibilityCertificate {
        rects: chosen.iter().map(|&q| refn.support[q].0.clone()).collect(),
        demand: demand_s,
        capacity,
    }))
}

/// The three sides of the forward chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainReport {
    /// `Σ_Q α_Q (∫_Q |ψ| dμ)²`
    pub left: Rational,
    /// `Σ_Q ⟨|ψ|⟩_Q² · selected(Q)`
    pub middle: Rational,
    /// `∫ (ℳ_μ ψ)² dμ`
    pub right: Rational,
}

impl ChainReport {
    pub fn holds(&self) -> bool {
        self.left <= self.middle && self.middle <= self.right
    }
}

pub fn forward_chain_verify(alpha: &Weight, mu: &Measure, psi: &StepFunction, g: &Geometry) -> Result<ChainReport> {
    let sel = match sparse_selection(alpha, mu)? {
        SelectionOutcome::Feasible(s) => s,
        SelectionOutcome::Infeasible(_) => {
            return Err(Error::BadParameter("sparse selection is infeasible: Carleson constant exceeds 1".into()))
        }
    };
    let grid = CellGrid::new(mu, psi, g)?;
    let mut left = Rational::zero();
    let mut middle = Rational::zero();
    for (q, a) in alpha.iter() {
        let avg = grid.average(q);
        let mq = grid.rect_mass(q);
        left += a * &avg * &avg * &mq * &mq;
        middle += &avg * &avg * sel.selected_mass(q);
    }
    let right = grid.maximize().iter().zip(&grid.mass).fold(Rational::zero(), |acc, ((v, _), m)| acc + m * v * v);
    Ok(ChainReport { left, middle, right })
}

/// `embedding_rayleigh(weight_from_function(μ,ψ), μ, ψ) · ∫ψ² dμ` and `∫(ℳψ)² dμ`.
pub fn backward_identity(mu: &Measure, psi: &StepFunction, g: &Geometry) -> Result<(Rational, Rational)> {
    let alpha = weight_from_function(mu, psi, g)?;
    let abs = psi.abs();
    let lhs = embedding_rayleigh(&alpha, mu, &abs)? * abs.square().integrate(mu);
    Ok((lhs, maximal_square_integral(mu, psi, g)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::carleson_constant;
    use crate::measure::BoundarySet;
    use crate::rational::{int, rat};

    fn quarter() -> (Measure, StepFunction, Geometry) {
        let g = Geometry::new(1);
        let mu = Measure::uniform(g, DyadicRect::root(), int(1)).unwrap();
        let psi = StepFunction::indicator(&BoundarySet::from_rect(DyadicRect::hooked(1, 1)));
        (mu, psi, g)
    }

    fn cell(x: u64, y: u64) -> DyadicRect {
        DyadicRect::from_parts(1, x, 1, y).unwrap()
    }

    #[test]
    fn quarter_maximal_values() {
        let (mu, psi, g) = quarter();
        let m = maximal_function(&mu, &psi, &g).unwrap();
        assert_eq!(m.value_on(&cell(0, 0)), int(1));
        assert_eq!(m.value_on(&cell(1, 0)), rat(1, 2));
        assert_eq!(m.value_on(&cell(0, 1)), rat(1, 2));
        assert_eq!(m.value_on(&cell(1, 1)), rat(1, 4));
        assert_eq!(maximal_square_integral(&mu, &psi, &g).unwrap(), rat(25, 64));
    }

    #[test]
    fn quarter_decomposition_and_weight() {
        let (mu, psi, g) = quarter();
        let d = argmax_decomposition(&mu, &psi, &g).unwrap();
        assert_eq!(d.classes.len(), 4);
        assert_eq!(d.assignment[&cell(0, 0)], DyadicRect::hooked(1, 1));
        assert_eq!(d.assignment[&cell(1, 0)], DyadicRect::hooked(0, 1));
        assert_eq!(d.assignment[&cell(0, 1)], DyadicRect::hooked(1, 0));
        assert_eq!(d.assignment[&cell(1, 1)], DyadicRect::root());
        let alpha = weight_from_function(&mu, &psi, &g).unwrap();
        assert_eq!(alpha.value(&DyadicRect::hooked(1, 1)), int(4));
        assert_eq!(alpha.value(&DyadicRect::hooked(0, 1)), int(1));
        assert_eq!(alpha.value(&DyadicRect::hooked(1, 0)), int(1));
        assert_eq!(alpha.value(&DyadicRect::root()), rat(1, 4));
        let (lhs, rhs) = backward_identity(&mu, &psi, &g).unwrap();
        assert_eq!(lhs, rat(25, 64));
        assert_eq!(rhs, rat(25, 64));
        assert!(carleson_constant(&alpha, &mu).unwrap().lower <= int(1));
    }

    #[test]
    fn quarter_chain_is_tight() {
        let (mu, psi, g) = quarter();
        let alpha = weight_from_function(&mu, &psi, &g).unwrap();
        let sel = sparse_selection(&alpha, &mu).unwrap();
        assert!(sel.is_feasible());
        let c = forward_chain_verify(&alpha, &mu, &psi, &g).unwrap();
        assert_eq!((c.left.clone(), c.middle.clone(), c.right.clone()), (rat(25, 64), rat(25, 64), rat(25, 64)));
        let seq = maximal_norm_lower_bound(&mu, &psi, &g, 5).unwrap();
        assert_eq!(seq[0], rat(25, 16));
        assert!(seq.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn root_demand_feasibility() {
        let g = Geometry::new(2);
        let mu = Measure::uniform(g, DyadicRect::root(), rat(3, 2)).unwrap();
        let ok = Weight::from_entries([(DyadicRect::root(), rat(2, 3))]).unwrap();
        assert!(sparse_selection(&ok, &mu).unwrap().is_feasible());
        let bad = Weight::from_entries([(DyadicRect::root(), rat(4, 3))]).unwrap();
        match sparse_selection(&bad, &mu).unwrap() {
            SelectionOutcome::Infeasible(c) => {
                assert_eq!(c.rects, vec![DyadicRect::root()]);
                assert!(c.demand > c.capacity);
            }
            SelectionOutcome::Feasible(_) => panic!("demand exceeds total mass"),
        }
    }

    #[test]
    fn constant_function_goes_to_root() {
        let g = Geometry::new(2);
        let mu = Measure::uniform(g, DyadicRect::root(), int(2)).unwrap();
        let psi = StepFunction::constant(rat(3, 5));
        let d = argmax_decomposition(&mu, &psi, &g).unwrap();
        assert_eq!(d.classes.keys().collect::<Vec<_>>(), vec![&DyadicRect::root()]);
        assert_eq!(d.classes[&DyadicRect::root()].len(), 16);
        let alpha = weight_from_function(&mu, &psi, &g).unwrap();
        assert_eq!(alpha.value(&DyadicRect::root()), rat(1, 2));
        assert_eq!(maximal_norm_lower_bound(&mu, &psi, &g, 1).unwrap(), vec![int(1)]);
    }

    #[test]
    fn combine_halves_weights() {
        let (mu, psi, g) = quarter();
        let alpha = weight_from_function(&mu, &psi, &g).unwrap();
        let (a, f) = combine_weights(&[(alpha.clone(), psi.clone())], &g).unwrap();
        assert_eq!(a, alpha.scaled(&rat(1, 2)));
        assert_eq!(f.integrate(&mu), psi.integrate(&mu));
        let (a2, _) = combine_weights(&[(alpha.clone(), psi.clone()), (alpha, psi)], &g).unwrap();
        assert!(carleson_constant(&a2, &mu).unwrap().lower <= int(1));
        let deep = Weight::from_entries([(DyadicRect::hooked(3, 0), int(1))]).unwrap();
        assert!(matches!(combine_weights(&[(deep, StepFunction::default())], &g), Err(Error::GeometryMismatch(_))));
    }
}
