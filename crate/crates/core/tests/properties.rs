//! Invariants over seeded random instances. Each case draws its instance from
//! a `Sampler` seeded by proptest, so failures shrink to a reproducible seed.

use bicarleson::bigrid::{DyadicRect, Geometry};
use bicarleson::functionals::oracle::{brute_carleson, brute_rec, oracle_energy};
use bicarleson::functionals::{
    box_constant, carleson_constant, carleson_energy, embedding_constant, embedding_rayleigh, energy,
    potential_pair_integral, rec_constant, rec_energy, ConstantReport,
};
use bicarleson::maximal::{
    argmax_decomposition, backward_identity, forward_chain_verify, maximal_function, maximal_norm_lower_bound,
    sparse_selection, weight_from_function, SelectionOutcome,
};
use bicarleson::measure::{integrate, Atom, BoundarySet, Measure, StepFunction};
use bicarleson::rational::{int, to_f64, Rational};
use bicarleson::sampling::Sampler;
use bicarleson::weight::Weight;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn instance(seed: u64, depth: u32, entries: usize) -> (Geometry, Weight, Measure) {
    let g = Geometry::new(depth);
    let mut s = Sampler::new(seed);
    let mu = s.measure(&g).unwrap();
    let alpha = s.weight(&g, entries);
    (g, alpha, mu)
}

fn cells_with_mass(mu: &Measure, g: &Geometry) -> Vec<DyadicRect> {
    g.cells(g.depth).unwrap().into_iter().filter(|c| !mu.mass(c).is_zero()).collect()
}

/// The weight scaled so its Carleson constant is at most one.
fn normalized(alpha: &Weight, mu: &Measure) -> Weight {
    let c = carleson_constant(alpha, mu).unwrap().lower;
    if c > int(1) {
        alpha.scaled(&(int(1) / c))
    } else {
        alpha.clone()
    }
}

/// Exact comparison against the Collatz bound when one exists, else the float bracket.
fn below_embedding_upper(v: &Rational, emb: &ConstantReport) -> bool {
    match &emb.upper {
        Some(u) => v <= u,
        None => to_f64(v) <= emb.approx.unwrap().1 * (1.0 + 1e-9),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn intersection_is_the_common_part(seed in any::<u64>()) {
        let g = Geometry::new(4);
        let mut s = Sampler::new(seed);
        let (a, b) = (s.rect(&g), s.rect(&g));
        prop_assert_eq!(a.intersect(&b), b.intersect(&a));
        match a.intersect(&b) {
            Some(i) => {
                prop_assert!(a.contains(&i) && b.contains(&i));
                prop_assert_eq!(i.area() <= a.area(), true);
            }
            None => prop_assert!(!a.intersects(&b)),
        }
        prop_assert_eq!(a.contains(&b), a.intersect(&b).as_ref() == Some(&b));
        prop_assert!(a.join(&b).contains(&a) && a.join(&b).contains(&b));
    }

    #[test]
    fn ancestors_are_exactly_the_containing_rectangles(seed in any::<u64>()) {
        let g = Geometry::new(3);
        let q = Sampler::new(seed).rect(&g);
        let anc = g.ancestors(&q);
        let (lx, ly) = q.levels();
        prop_assert_eq!(anc.len() as u32, (lx + 1) * (ly + 1));
        let brute: Vec<_> = g.enumerate_all().unwrap().filter(|r| r.contains(&q)).collect();
        prop_assert_eq!(anc.len(), brute.len());
        prop_assert!(anc.iter().all(|r| r.contains(&q)));
    }

    #[test]
    fn mass_is_additive_and_restriction_consistent(seed in any::<u64>()) {
        let g = Geometry::new(3);
        let mut s = Sampler::new(seed);
        let mu = s.measure(&g).unwrap();
        let r = s.rect(&g);
        if r.x.level() < g.depth {
            let (a, b) = r.x_halves();
            prop_assert_eq!(mu.mass(&r), mu.mass(&a) + mu.mass(&b));
        }
        if r.y.level() < g.depth {
            let (a, b) = r.y_halves();
            prop_assert_eq!(mu.mass(&r), mu.mass(&a) + mu.mass(&b));
        }
        let e = s.boundary_set(&g);
        let restricted = mu.restrict(&e);
        prop_assert_eq!(restricted.total(), mu.mass_of(&e));
        prop_assert_eq!(restricted.restrict(&e), restricted.clone());
        prop_assert!(restricted.mass(&r) <= mu.mass(&r));
    }

    #[test]
    fn generated_upsets_are_upsets(seed in any::<u64>()) {
        let g = Geometry::new(3);
        let mut s = Sampler::new(seed);
        let gens: Vec<DyadicRect> = (0..1 + s.below(3)).map(|_| s.rect(&g)).collect();
        let w = Weight::from_upset_generators(&gens, &g).unwrap();
        prop_assert!(w.is_upset());
        for q in w.rects() {
            prop_assert!(gens.iter().any(|gen| q.contains(gen)));
        }
    }

    #[test]
    fn energy_is_bilinear(seed in any::<u64>()) {
        let g = Geometry::new(3);
        let mut s = Sampler::new(seed);
        let alpha = s.weight(&g, 8);
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for piece in s.partition(&g, 0.7) {
            let atom = Atom::new(piece, s.rational(4, 3));
            if s.chance(0.5) { left.push(atom) } else { right.push(atom) }
        }
        let mu1 = Measure::new(g, left).unwrap();
        let mu2 = Measure::new(g, right).unwrap();
        let nu = s.measure(&g).unwrap();
        let (a, b) = (s.rational(5, 3), s.rational(5, 3));
        let mixed = mu1.scaled(&a).plus(&mu2.scaled(&b)).unwrap();
        prop_assert_eq!(
            energy(&alpha, &mixed, &nu),
            &a * energy(&alpha, &mu1, &nu) + &b * energy(&alpha, &mu2, &nu)
        );
    }

    #[test]
    fn pair_integral_is_symmetric(seed in any::<u64>()) {
        let (g, alpha, mu) = instance(seed, 3, 8);
        let nu = Sampler::new(seed.wrapping_add(1)).measure(&g).unwrap();
        prop_assert_eq!(
            potential_pair_integral(&alpha, &mu, &nu).unwrap(),
            potential_pair_integral(&alpha, &nu, &mu).unwrap()
        );
        prop_assert_eq!(potential_pair_integral(&alpha, &mu, &nu).unwrap(), energy(&alpha, &mu, &nu));
    }

    #[test]
    fn energy_matches_full_enumeration(seed in any::<u64>()) {
        let (g, alpha, mu) = instance(seed, 3, 10);
        let nu = Sampler::new(!seed).measure(&g).unwrap();
        prop_assert_eq!(energy(&alpha, &mu, &nu), oracle_energy(&alpha, &mu, &nu, &g).unwrap());
    }

    #[test]
    fn set_energies_grow_with_the_set(seed in any::<u64>()) {
        let (g, alpha, mu) = instance(seed, 3, 10);
        let mut s = Sampler::new(seed ^ 0xabcd);
        let small = s.boundary_set(&g);
        let big = small.union(&s.boundary_set(&g));
        prop_assert!(carleson_energy(&alpha, &mu, &small) <= carleson_energy(&alpha, &mu, &big));
        prop_assert!(rec_energy(&alpha, &mu, &small) <= rec_energy(&alpha, &mu, &big));
        prop_assert!(carleson_energy(&alpha, &mu, &big) <= rec_energy(&alpha, &mu, &big));
    }

    #[test]
    fn rayleigh_stays_below_the_embedding_bound(seed in any::<u64>()) {
        let (g, alpha, mu) = instance(seed, 3, 10);
        let phi = Sampler::new(seed ^ 0x5555).step_function(&g);
        prop_assume!(!integrate(&phi.square(), &mu).is_zero());
        let emb = embedding_constant(&alpha, &mu, 1e-9).unwrap();
        let ray = embedding_rayleigh(&alpha, &mu, &phi).unwrap();
        prop_assert!(below_embedding_upper(&ray, &emb));
    }

    #[test]
    fn maximal_function_dominates_and_is_sublinear(seed in any::<u64>()) {
        let g = Geometry::new(3);
        let mut s = Sampler::new(seed);
        let mu = s.measure(&g).unwrap();
        let (p1, p2) = (s.step_function(&g), s.step_function(&g));
        let m1 = maximal_function(&mu, &p1, &g).unwrap();
        let m2 = maximal_function(&mu, &p2, &g).unwrap();
        let m12 = maximal_function(&mu, &p1.add(&p2), &g).unwrap();
        for c in cells_with_mass(&mu, &g) {
            prop_assert!(m1.value_on(&c) >= p1.value_on(&c));
            prop_assert!(m12.value_on(&c) <= m1.value_on(&c) + m2.value_on(&c));
        }
        let c = s.rational(4, 1);
        let mc = maximal_function(&mu, &StepFunction::constant(c.clone()), &g).unwrap();
        for cell in cells_with_mass(&mu, &g) {
            prop_assert_eq!(mc.value_on(&cell), c.clone());
        }
    }

    #[test]
    fn argmax_classes_partition_the_positive_cells(seed in any::<u64>()) {
        let g = Geometry::new(3);
        let mut s = Sampler::new(seed);
        let mu = s.measure(&g).unwrap();
        let psi = s.step_function(&g);
        let m = maximal_function(&mu, &psi, &g).unwrap();
        let d = argmax_decomposition(&mu, &psi, &g).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for (q, cells) in &d.classes {
            for c in cells {
                prop_assert!(seen.insert(c.clone()));
                prop_assert!(q.contains(c));
                prop_assert_eq!(&d.assignment[c], q);
                let avg = psi.integral_over(q, &mu) / mu.mass(q);
                prop_assert_eq!(avg, m.value_on(c));
            }
        }
        for c in g.cells(3).unwrap() {
            prop_assert_eq!(seen.contains(&c), !m.value_on(&c).is_zero());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn reduced_searches_equal_cell_subset_brute_force(seed in any::<u64>()) {
        let (g, alpha, mu) = instance(seed, 2, 8);
        let c = carleson_constant(&alpha, &mu).unwrap();
        prop_assert!(c.exact);
        prop_assert_eq!(&c.lower, &brute_carleson(&alpha, &mu, &g).unwrap().0);
        let rc = rec_constant(&alpha, &mu).unwrap();
        prop_assert!(rc.exact);
        prop_assert_eq!(&rc.lower, &brute_rec(&alpha, &mu, &g).unwrap().0);
    }

    #[test]
    fn constants_are_ordered(seed in any::<u64>()) {
        let (_, alpha, mu) = instance(seed, 2, 8);
        let b = box_constant(&alpha, &mu).lower;
        let c = carleson_constant(&alpha, &mu).unwrap().lower;
        let r = rec_constant(&alpha, &mu).unwrap().lower;
        let e = embedding_constant(&alpha, &mu, 1e-9).unwrap();
        prop_assert!(b <= c && c <= r);
        prop_assert!(below_embedding_upper(&r, &e));
    }

    #[test]
    fn constructed_weight_reproduces_the_maximal_norm(seed in any::<u64>()) {
        let g = Geometry::new(3);
        let mut s = Sampler::new(seed);
        let mu = s.measure(&g).unwrap();
        let psi = s.step_function(&g);
        prop_assume!(!integrate(&psi.square(), &mu).is_zero());
        let (lhs, rhs) = backward_identity(&mu, &psi, &g).unwrap();
        prop_assert_eq!(lhs, rhs);
        let w = weight_from_function(&mu, &psi, &g).unwrap();
        prop_assert!(carleson_constant(&w, &mu).unwrap().lower <= int(1));
        prop_assert!(sparse_selection(&w, &mu).unwrap().is_feasible());
    }

    #[test]
    fn forward_chain_holds_for_normalized_weights(seed in any::<u64>()) {
        let (g, alpha, mu) = instance(seed, 3, 8);
        let psi = Sampler::new(seed ^ 0x77).step_function(&g);
        let alpha = normalized(&alpha, &mu);
        let chain = forward_chain_verify(&alpha, &mu, &psi, &g).unwrap();
        prop_assert!(chain.left <= chain.middle);
        prop_assert!(chain.middle <= chain.right);
    }

    #[test]
    fn maximal_ascent_never_decreases(seed in any::<u64>()) {
        let g = Geometry::new(3);
        let mut s = Sampler::new(seed);
        let mu = s.measure(&g).unwrap();
        let psi = s.step_function(&g);
        prop_assume!(!integrate(&psi.square(), &mu).is_zero());
        let seq = maximal_norm_lower_bound(&mu, &psi, &g, 20).unwrap();
        prop_assert!(seq.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(seq[0] >= Rational::one());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn selection_is_feasible_iff_carleson_at_most_one(seed in any::<u64>()) {
        let (g, alpha, mu) = instance(seed, 2, 6);
        let (brute, _) = brute_carleson(&alpha, &mu, &g).unwrap();
        match sparse_selection(&alpha, &mu).unwrap() {
            SelectionOutcome::Feasible(sel) => {
                prop_assert!(brute <= int(1));
                for (q, a) in alpha.iter() {
                    let m = mu.mass(q);
                    prop_assert!(sel.selected_mass(q) >= a * &m * &m);
                }
            }
            SelectionOutcome::Infeasible(cert) => {
                prop_assert!(brute > int(1));
                let e = BoundarySet::from_rects(cert.rects.iter().cloned());
                prop_assert!(carleson_energy(&alpha, &mu, &e) > mu.mass_of(&e));
            }
        }
    }
}
