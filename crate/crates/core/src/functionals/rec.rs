use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{energy, ConstantKind, ConstantReport, Witness};
use crate::error::Result;
use crate::measure::{BoundarySet, Measure};
use crate::rational::{ratio_or_zero, Rational};
use crate::refine::{Refinement, DEFAULT_PIECE_CAP};
use crate::weight::Weight;

/// Class count up to which every class subset is enumerated.
pub const REC_EXACT_CLASS_CAP: usize = 20;

/// `Σ_Q α_Q μ(Q ∩ E)²`.
pub fn rec_energy(alpha: &Weight, mu: &Measure, e: &BoundarySet) -> Rational {
    let r = mu.restrict(e);
    energy(alpha, &r, &r)
}

pub fn rec_constant(alpha: &Weight, mu: &Measure) -> Result<ConstantReport> {
    rec_constant_with(alpha, mu, &[])
}

/// As `rec_constant`; `hints` are extra candidate sets scored on the lower-bound path.
pub fn rec_constant_with(alpha: &Weight, mu: &Measure, hints: &[BoundarySet]) -> Result<ConstantReport> {
    if alpha.is_empty() {
        return Ok(ConstantReport::exact(ConstantKind::Rec, Rational::zero(), Witness::Set(BoundarySet::empty()), "empty-support"));
    }
    let sys = Groups::new(alpha, mu)?;
    if sys.m.len() <= REC_EXACT_CLASS_CAP {
        let (value, u) = sys.enumerate();
        return Ok(ConstantReport::exact(ConstantKind::Rec, value, Witness::Set(sys.set(&u)), "class-subset-enumeration"));
    }
    let (mut value, u) = sys.local_search();
    let mut set = sys.set(&u);
    for h in hints {
        let v = ratio_or_zero(&rec_energy(alpha, mu, h), &mu.mass_of(h));
        if v > value {
            value = v;
            set = h.clone();
        }
    }
    Ok(ConstantReport::lower_bound(ConstantKind::Rec, value, Witness::Set(set), "class-local-search"))
}

/// Support rectangles grouped by the classes they contain, weights summed.
struct Groups {
    refn: Refinement,
    /// (classes inside, summed α)
    groups: Vec<(Vec<usize>, Rational)>,
    /// groups containing each class
    member_of: Vec<Vec<usize>>,
    m: Vec<Rational>,
}

impl Groups {
    fn new(alpha: &Weight, mu: &Measure) -> Result<Self> {
        let refn = Refinement::new(alpha, mu, DEFAULT_PIECE_CAP)?;
        let mut by: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        for (cs, (_, a)) in refn.inside.iter().zip(&refn.support) {
            if !cs.is_empty() {
                *by.entry(cs.clone()).or_insert_with(Rational::zero) += a;
            }
        }
        let groups: Vec<(Vec<usize>, Rational)> = by.into_iter().collect();
        let m = refn.class_masses();
        let mut member_of = vec![Vec::new(); m.len()];
        for (g, (cs, _)) in groups.iter().enumerate() {
            for &c in cs {
                member_of[c].push(g);
            }
        }
        Ok(Self { refn, groups, member_of, m })
    }

    fn set(&self, u: &[bool]) -> BoundarySet {
        self.refn.set_of((0..u.len()).filter(|&c| u[c]))
    }

    fn ratio(&self, u: &[bool]) -> Rational {
        let num = self.groups.iter().fold(Rational::zero(), |acc, (cs, a)| {
            let s = cs.iter().filter(|&&c| u[c]).fold(Rational::zero(), |s, &c| s + &self.m[c]);
            acc + a * &s * &s
        });
        let den = self.m.iter().zip(u).filter(|(_, &b)| b).fold(Rational::zero(), |acc, (m, _)| acc + m);
        ratio_or_zero(&num, &den)
    }

    /// Gray-code walk over all class subsets in integer arithmetic.
    fn enumerate(&self) -> (Rational, Vec<bool>) {
        let k = self.m.len();
        let dm = self.m.iter().fold(BigInt::one(), |acc, m| acc.lcm(m.denom()));
        let da = self.groups.iter().fold(BigInt::one(), |acc, (_, a)| acc.lcm(a.denom()));
        let mi: Vec<BigInt> = self.m.iter().map(|m| m.numer() * (&dm / m.denom())).collect();
        let ai: Vec<BigInt> = self.groups.iter().map(|(_, a)| a.numer() * (&da / a.denom())).collect();
        let mut s = vec![BigInt::zero(); self.groups.len()];
        let mut num = BigInt::zero();
        let mut den = BigInt::zero();
        let mut u = vec![false; k];
        let mut best_num = BigInt::zero();
        let mut best_den = BigInt::one();
        let mut best_code: u64 = 0;
        let mut code: u64 = 0;
        for i in 1u64..(1u64 << k) {
            let c = i.trailing_zeros() as usize;
            code ^= 1 << c;
            let adding = !u[c];
            u[c] = adding;
            for &g in &self.member_of[c] {
                let old = s[g].clone();
                if adding {
                    s[g] += &mi[c];
                } else {
                    s[g] -= &mi[c];
                }
                num += &ai[g] * (&s[g] * &s[g] - &old * &old);
            }
            if adding {
                den += &mi[c];
            } else {
                den -= &mi[c];
            }
            if !den.is_zero() && &num * &best_den > &best_num * &den {
                best_num = num.clone();
                best_den = den.clone();
                best_code = code;
            }
        }
        let best_u: Vec<bool> = (0..k).map(|c| best_code >> c & 1 == 1).collect();
        if best_num.is_zero() {
            return (Rational::zero(), best_u);
        }
        let value = Rational::new(best_num, best_den * da * dm);
        (value, best_u)
    }

    /// Best of single classes and single support rectangles, then toggle-improvement.
    fn local_search(&self) -> (Rational, Vec<bool>) {
        let k = self.m.len();
        let mut starts: Vec<Vec<bool>> = (0..k)
            .map(|c| {
                let mut u = vec![false; k];
                u[c] = true;
                u
            })
            .collect();
        for (cs, _) in &self.groups {
            let mut u = vec![false; k];
            cs.iter().for_each(|&c| u[c] = true);
            starts.push(u);
        }
        let mut u = vec![false; k];
        let mut best = Rational::zero();
        for s in starts {
            let v = self.ratio(&s);
            if v > best {
                best = v;
                u = s;
            }
        }
        loop {
            let mut improved = None;
            for c in 0..k {
                u[c] = !u[c];
                let v = self.ratio(&u);
                u[c] = !u[c];
                if v > best && improved.as_ref().map_or(true, |(b, _)| v > *b) {
                    improved = Some((v, c));
                }
            }
            let Some((v, c)) = improved else { break };
            u[c] = !u[c];
            best = v;
        }
        (best, u)
    }
}
