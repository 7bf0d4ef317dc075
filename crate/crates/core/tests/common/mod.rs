//! Seeded random instances shared by the integration tests.

#![allow(dead_code)]

use std::collections::VecDeque;

use flowtoll::{Network, Rational, Scalar, SchedulingCost, Target};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORPUS_SIZE: usize = 200;
pub const CORPUS_SEED: u64 = 20_240_611;

pub fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

pub fn r(n: i64, d: i64) -> Rational {
    Rational::ratio(n, d)
}

#[derive(Clone, Debug)]
pub struct Case {
    pub index: usize,
    pub network: Network,
    pub cost: SchedulingCost,
    pub target: Target<Rational>,
    pub beta: Rational,
    pub gamma: Rational,
}

fn reachable(n: usize, arcs: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &(a, b) in arcs {
            if a == u && !seen[b] {
                seen[b] = true;
                queue.push_back(b);
            }
        }
    }
    seen[1]
}

/// Up to 6 nodes and 10 arcs, integer capacities in 1..=5 and delays in
/// 0..=5, α = 1, standard cost with rational β and γ, sink reachable.
pub fn random_case(rng: &mut ChaCha8Rng, index: usize) -> Case {
    let n = rng.gen_range(2..=6);
    let arcs = loop {
        let m = rng.gen_range(1..=10);
        let arcs: Vec<(usize, usize)> = (0..m)
            .map(|_| {
                let a = rng.gen_range(0..n);
                let mut b = rng.gen_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                (a, b)
            })
            .collect();
        if reachable(n, &arcs) {
            break arcs;
        }
    };
    let names: Vec<String> = (0..n)
        .map(|i| match i {
            0 => "s".to_string(),
            1 => "t".to_string(),
            _ => format!("v{i}"),
        })
        .collect();
    let arc_list = arcs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            (
                format!("e{i}"),
                names[a].clone(),
                names[b].clone(),
                q(rng.gen_range(1..=5)),
                q(rng.gen_range(0..=5)),
            )
        })
        .collect();
    let network = Network::new(names, arc_list, "s", "t").expect("generated network is valid");
    let beta = [r(1, 4), r(1, 3), r(1, 2), r(2, 3), r(3, 4), r(3, 2)]
        .choose(rng)
        .unwrap()
        .clone();
    let gamma = [r(3, 2), q(2), q(3), r(5, 2)].choose(rng).unwrap().clone();
    let cost = SchedulingCost::standard(q(1), beta.clone(), Some(gamma.clone())).unwrap();
    let target = Target::Demand(r(rng.gen_range(1..=12), 2));
    Case {
        index,
        network,
        cost,
        target,
        beta,
        gamma,
    }
}

pub fn corpus() -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE).map(|i| random_case(&mut rng, i)).collect()
}

/// Random rational in `[lo, hi]` with denominator up to 997.
pub fn random_rational(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational) -> Rational {
    let den = rng.gen_range(1..=997);
    let k = rng.gen_range(0..=den);
    lo.clone() + (hi.clone() - lo.clone()) * r(k, den)
}
