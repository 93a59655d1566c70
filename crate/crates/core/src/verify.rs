//! Inequality batteries for each construction. Every battery returns a
//! `RunReport` whose checks are exact rational comparisons.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bigrid::{DyadicInterval, DyadicRect, Geometry};
use crate::constructions::{
    default_embedding_delta, default_rec_delta, embedding_example, potential_example, rec_example, simple_example,
    carleson_family_weight, Instance,
};
use crate::error::{Error, Result};
use crate::functionals::{
    box_constant, carleson_constant, embedding_constant_with, embedding_rayleigh, potential,
    potential_function, potential_pair_integral, potential_square_integral, rec_constant_with, rec_energy,
    reevaluate_witness, ConstantReport,
};
use crate::io::params_value;
use crate::maximal::{
    backward_identity, forward_chain_verify, maximal_norm_lower_bound, sparse_selection, weight_from_function,
};
use crate::measure::{BoundarySet, Measure};
use crate::rational::{int, rat, ratio_or_zero, Rational};
use crate::report::{Relation, RunReport};
use crate::sampling::Sampler;
use crate::weight::Weight;

/// Tolerance handed to the power iteration.
pub const EMBEDDING_TOL: f64 = 1e-9;
/// Random support cells added to the quadrant corners when sampling a potential.
pub const SUPPORT_SAMPLES: usize = 64;
/// Seeded clean systems in the small-REC battery.
pub const CLEAN_SYSTEMS: usize = 200;
/// Seeded instances in the maximal-function battery.
pub const DOR_INSTANCES: usize = 50;

/// Fitted constants used by the batteries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fits {
    /// `sup 𝕍^μ ≤ c·δ` on the support of the potential example.
    pub potential: Rational,
    /// `carleson(α, ν) ≤ c·δ` on the REC example.
    pub carleson: Rational,
    /// `ℰ_A[μ|A] ≤ c·δ·μ(A)` on clean systems of the embedding example.
    pub small_rec: Rational,
}

impl Default for Fits {
    fn default() -> Self {
        Self { potential: int(10), carleson: int(8), small_rec: int(8) }
    }
}

fn add_witness_check(report: &mut RunReport, c: &ConstantReport, alpha: &Weight, mu: &Measure, label: &str) -> Result<()> {
    if let Some(v) = reevaluate_witness(c, alpha, mu)? {
        report.check(format!("{label} witness re-evaluates"), v, Relation::Eq, c.lower.clone());
    }
    Ok(())
}

fn chain_checks(report: &mut RunReport, box_c: &ConstantReport, carl: &ConstantReport, rec: &ConstantReport, emb: Option<&Rational>) {
    report.check("box <= carleson", box_c.lower.clone(), Relation::Le, carl.lower.clone());
    report.check("carleson <= rec", carl.lower.clone(), Relation::Le, rec.lower.clone());
    if let Some(e) = emb {
        report.check("rec <= embedding lower bound", rec.lower.clone(), Relation::Le, e.clone());
    }
}

/// Box, Carleson, REC with hints, embedding (when tractable) and the chain.
pub fn constants_report(
    report: &mut RunReport,
    alpha: &Weight,
    mu: &Measure,
    hints: &[BoundarySet],
    with_embedding: bool,
) -> Result<[ConstantReport; 3]> {
    let b = report.timed("box", || box_constant(alpha, mu));
    let c = report.timed("carleson", || carleson_constant(alpha, mu))?;
    let r = report.timed("rec", || rec_constant_with(alpha, mu, hints))?;
    add_witness_check(report, &b, alpha, mu, "box")?;
    add_witness_check(report, &c, alpha, mu, "carleson")?;
    add_witness_check(report, &r, alpha, mu, "rec")?;
    let emb = if with_embedding {
        let e = report.timed("embedding", || embedding_constant_with(alpha, mu, EMBEDDING_TOL, hints.first()))?;
        add_witness_check(report, &e, alpha, mu, "embedding")?;
        Some(e)
    } else {
        None
    };
    chain_checks(report, &b, &c, &r, emb.as_ref().map(|e| &e.lower));
    report.constant(b.clone());
    report.constant(c.clone());
    report.constant(r.clone());
    if let Some(e) = emb {
        report.constant(e);
    }
    Ok([b, c, r])
}

pub fn verify_simple(n: u64) -> Result<RunReport> {
    let inst = simple_example(n)?;
    let mut report = RunReport::new("verify simple", params_value(&inst.params), None);
    let omega = inst.set("omega").expect("simple example names omega").clone();
    let [_, c, r] = constants_report(&mut report, &inst.alpha, &inst.mu, &[omega.clone()], false)?;
    let sqrt_n = int(1i64 << (n.trailing_zeros() / 2));
    report.check("carleson < 1", c.lower.clone(), Relation::Lt, int(1));
    report.check("rec >= (N+1)/sqrt(N)", r.lower.clone(), Relation::Ge, int(n as i64 + 1) / sqrt_n);
    let at_omega = ratio_or_zero(&rec_energy(&inst.alpha, &inst.mu, &omega), &inst.mu.mass_of(&omega));
    report.value("rec ratio on omega", &at_omega);
    report.check("rec/carleson > 4", r.lower.clone(), Relation::Gt, c.lower.clone() * int(4));
    Ok(report)
}

fn cell_index(level: u32, start: &BigUint, shift: u32, offset: &BigUint) -> DyadicInterval {
    DyadicInterval::new(level, (start << shift) + offset).expect("index inside the parent")
}

/// Corner cells of every atom, plus `count` seeded random cells inside atoms.
pub fn support_sample_cells(mu: &Measure, seed: u64, count: usize) -> Vec<DyadicRect> {
    let depth = mu.geometry().depth;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms: Vec<_> = mu.atoms().iter().filter(|a| !a.mass.is_zero()).collect();
    let mut out = Vec::new();
    let side = |lvl: u32| BigUint::one() << (depth - lvl);
    for a in &atoms {
        let (sx, sy) = (side(a.support.x.level()), side(a.support.y.level()));
        for ox in [BigUint::zero(), &sx - 1u32] {
            for oy in [BigUint::zero(), &sy - 1u32] {
                out.push(DyadicRect::new(
                    cell_index(depth, a.support.x.index(), depth - a.support.x.level(), &ox),
                    cell_index(depth, a.support.y.index(), depth - a.support.y.level(), &oy),
                ));
            }
        }
    }
    if atoms.is_empty() {
        return out;
    }
    for _ in 0..count {
        let a = atoms[rng.gen_range(0..atoms.len())];
        let (sx, sy) = (side(a.support.x.level()), side(a.support.y.level()));
        let ox = rng.gen_biguint_below(&sx);
        let oy = rng.gen_biguint_below(&sy);
        out.push(DyadicRect::new(
            cell_index(depth, a.support.x.index(), depth - a.support.x.level(), &ox),
            cell_index(depth, a.support.y.index(), depth - a.support.y.level(), &oy),
        ));
    }
    out.sort();
    out.dedup();
    out
}

/// Largest `𝕍^μ` over the sampled support cells.
pub fn sampled_potential_sup(alpha: &Weight, mu: &Measure, seed: u64) -> Rational {
    support_sample_cells(mu, seed, SUPPORT_SAMPLES)
        .iter()
        .map(|c| potential(alpha, mu, c))
        .max()
        .unwrap_or_else(Rational::zero)
}

/// The potential example's three quantities: `𝕍^μ(ω₀)`, sampled sup on the support, `δ(M−4)/8`.
pub fn potential_quantities(inst: &Instance, seed: u64) -> (Rational, Rational, Rational) {
    let omega0 = &inst.set("omega0").expect("named by the construction").members()[0];
    let at = potential(&inst.alpha, &inst.mu, omega0);
    let sup = sampled_potential_sup(&inst.alpha, &inst.mu, seed);
    let m = inst.params.m.expect("staircase parameter") as i64;
    let delta = inst.params.delta.clone().expect("staircase parameter");
    (at, sup, delta * int(m - 4) / int(8))
}

pub fn verify_potential(n: u64, delta: Option<Rational>, seed: u64, fits: &Fits) -> Result<RunReport> {
    let delta = delta.unwrap_or_else(|| default_rec_delta(n));
    let inst = potential_example(n, &delta)?;
    let mut report = RunReport::new("verify potential", params_value(&inst.params), Some(seed));
    let (at, sup, lower) = report.timed("potential", || potential_quantities(&inst, seed));
    report.value("V(omega0)", &at);
    report.value("sampled sup on support", &sup);
    report.value("V(omega0)/sup", &ratio_or_zero(&at, &sup));
    report.check("sampled sup <= C_fit*delta", sup, Relation::Le, &fits.potential * &delta);
    report.check("V(omega0) >= delta(M-4)/8", at, Relation::Ge, lower);
    Ok(report)
}

pub fn verify_rec(n: u64, delta: Option<Rational>, fits: &Fits) -> Result<RunReport> {
    let delta = delta.unwrap_or_else(|| default_rec_delta(n));
    let inst = rec_example(n, &delta)?;
    let nu = inst.test_measure();
    let f = inst.set("F").expect("named by the construction").clone();
    let mut report = RunReport::new("verify rec", params_value(&inst.params), None);
    let ratio = ratio_or_zero(&rec_energy(&inst.alpha, nu, &f), &nu.mass_of(&f));
    report.value("rec ratio on F", &ratio);
    report.check("rec_energy(F)/nu(F) >= 1/8", ratio, Relation::Ge, rat(1, 8));
    let [_, c, _] = constants_report(&mut report, &inst.alpha, nu, &[f], false)?;
    report.check("carleson <= C_fit*delta", c.lower.clone(), Relation::Le, &fits.carleson * &delta);
    Ok(report)
}

/// `D = ∫(𝕍^{μ₀})² dμ / ∫𝕍^{μ₀} dμ₀` and the Rayleigh quotient of `φ = 𝕍^{μ₀}`.
pub fn dual_quantities(inst: &Instance) -> Result<(Rational, Rational)> {
    let mu0 = &inst.components[0];
    let num = potential_square_integral(&inst.alpha, mu0, &inst.mu)?;
    let den = potential_pair_integral(&inst.alpha, mu0, mu0)?;
    if den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let phi = potential_function(&inst.alpha, mu0, &inst.mu);
    Ok((num / den, embedding_rayleigh(&inst.alpha, &inst.mu, &phi)?))
}

/// Minimum of `𝕍^{μ₀}` over the corner cells of the `Q_{k,j}^{++}`, for `k = 0..=K`.
pub fn quadrant_potential_minima(inst: &Instance) -> Vec<Rational> {
    let mu0 = &inst.components[0];
    let k_max = inst.params.k.unwrap_or(0);
    (0..=k_max)
        .map(|k| {
            let name = if k == 0 { "Q++".to_string() } else { format!("Q{k}++") };
            let quads = Measure::new(
                inst.geometry,
                inst.rect_list(&name).iter().map(|q| crate::measure::Atom::new(q.clone(), int(1))).collect(),
            )
            .expect("quadrants are disjoint");
            support_sample_cells(&quads, 0, 0)
                .iter()
                .map(|c| potential(&inst.alpha, mu0, c))
                .min()
                .unwrap_or_else(Rational::zero)
        })
        .collect()
}

/// Largest `rec_energy(α, μ, A)/(δ μ(A))` over seeded clean systems `A`.
pub fn small_rec_battery(inst: &Instance, seed: u64, count: usize) -> (Rational, usize) {
    let n = inst.params.n.expect("staircase parameter");
    let m = inst.params.m.expect("staircase parameter");
    let delta = inst.params.delta.clone().expect("staircase parameter");
    let mut sampler = Sampler::new(seed);
    let mut worst = Rational::zero();
    let mut evaluated = 0;
    for _ in 0..count {
        let a = BoundarySet::from_rects(sampler.clean_system(n, m));
        let mass = inst.mu.mass_of(&a);
        if mass.is_zero() {
            continue;
        }
        evaluated += 1;
        let c = rec_energy(&inst.alpha, &inst.mu, &a) / (&delta * mass);
        if c > worst {
            worst = c;
        }
    }
    (worst, evaluated)
}

pub fn verify_embedding(n: u64, delta: Option<Rational>, k: u32, seed: u64, fits: &Fits) -> Result<RunReport> {
    let delta = delta.unwrap_or_else(|| default_embedding_delta(n));
    let inst = embedding_example(n, &delta, k)?;
    let mut report = RunReport::new("verify embedding", params_value(&inst.params), Some(seed));
    let (d, rayleigh) = report.timed("dual", || dual_quantities(&inst))?;
    report.value("dual ratio D", &d);
    report.check("rayleigh(V^mu0) >= D", rayleigh.clone(), Relation::Ge, d);
    let [_, _, r] = constants_report(&mut report, &inst.alpha, &inst.mu, &[], false)?;
    report.check("rec <= rayleigh(V^mu0)", r.lower.clone(), Relation::Le, rayleigh);
    let (worst, evaluated) = report.timed("small rec", || small_rec_battery(&inst, seed, CLEAN_SYSTEMS));
    report.value("small rec fitted C", &worst);
    report.value("clean systems evaluated", &int(evaluated as i64));
    report.check("small rec C <= C_fit", worst, Relation::Le, fits.small_rec.clone());
    let minima = quadrant_potential_minima(&inst);
    for (k, v) in minima.iter().enumerate() {
        report.value(format!("min V^mu0 on Q{k}++"), v);
    }
    Ok(report)
}

/// One seeded maximal-function instance, tallied into `report`.
fn dor_instance(sampler: &mut Sampler, g: &Geometry, report: &mut DorTally) -> Result<()> {
    let mu = sampler.measure(g)?;
    let psi = sampler.step_function(g);
    if psi.square().integrate(&mu).is_zero() {
        report.skipped += 1;
        return Ok(());
    }
    report.instances += 1;
    let (lhs, rhs) = backward_identity(&mu, &psi, g)?;
    report.identity += usize::from(lhs == rhs);
    let alpha = weight_from_function(&mu, &psi, g)?;
    let c = carleson_constant(&alpha, &mu)?;
    report.carleson += usize::from(c.lower <= int(1));
    let feasible = sparse_selection(&alpha, &mu)?.is_feasible();
    report.feasible += usize::from(feasible);
    // a random weight normalized to Carleson constant 1
    let raw = sampler.weight(g, 8);
    let cr = carleson_constant(&raw, &mu)?.lower;
    let normalized = if cr.is_zero() { raw } else { raw.scaled(&(Rational::one() / cr)) };
    let chains = [(feasible, &alpha), (true, &normalized)];
    let mut ok = true;
    for (feasible, a) in chains {
        ok &= feasible && forward_chain_verify(a, &mu, &psi, g)?.holds();
    }
    report.chain += usize::from(ok);
    let seq = maximal_norm_lower_bound(&mu, &psi, g, 6)?;
    report.ascent += usize::from(seq.windows(2).all(|w| w[0] <= w[1]));
    Ok(())
}

#[derive(Default)]
struct DorTally {
    instances: usize,
    skipped: usize,
    identity: usize,
    carleson: usize,
    feasible: usize,
    chain: usize,
    ascent: usize,
}

pub fn verify_dor(n: u32, seed: u64, count: usize) -> Result<RunReport> {
    let g = Geometry::new(n);
    let params = serde_json::json!({ "N": n, "instances": count });
    let mut report = RunReport::new("verify dor", params, Some(seed));
    let mut sampler = Sampler::new(seed);
    let mut tally = DorTally::default();
    let start = std::time::Instant::now();
    while tally.instances < count {
        dor_instance(&mut sampler, &g, &mut tally)?;
    }
    report.timings.push(("dor battery".into(), start.elapsed().as_secs_f64()));
    let total = int(tally.instances as i64);
    let count_of = |k: usize| int(k as i64);
    report.check("backward identity exact", count_of(tally.identity), Relation::Eq, total.clone());
    report.check("constructed weight has carleson <= 1", count_of(tally.carleson), Relation::Eq, total.clone());
    report.check("sparse selection feasible", count_of(tally.feasible), Relation::Eq, total.clone());
    report.check("forward chain holds", count_of(tally.chain), Relation::Eq, total.clone());
    report.check("ascent nondecreasing", count_of(tally.ascent), Relation::Eq, total);
    Ok(report)
}

pub fn verify_family(family: &[DyadicRect]) -> Result<RunReport> {
    let inst = carleson_family_weight(family)?;
    let mut report = RunReport::new("verify family", params_value(&inst.params), None);
    let hints: Vec<BoundarySet> = inst.set("U").into_iter().cloned().collect();
    let with_embedding = inst.alpha.len() <= 64;
    constants_report(&mut report, &inst.alpha, &inst.mu, &hints, with_embedding)?;
    Ok(report)
}
