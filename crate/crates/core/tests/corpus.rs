//! Whole pipeline on the seeded random corpus.

mod common;

use std::time::Instant;

use common::{corpus, random_rational};
use flowtoll::duals::certify;
use flowtoll::solve;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn corpus_solves_and_certifies_exactly() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in corpus() {
        let s = solve(&case.network, &case.cost, &case.target).unwrap_or_else(|e| panic!("case {}: {e}", case.index));
        let c = certify(&case.network, &s).unwrap();
        assert!(c.report.passed(), "case {}: {:?}", case.index, c.report.witnesses);
        assert_eq!(c.gap, common::q(0), "case {}", case.index);
        let breaks: Vec<_> = s.flow.rates().iter().flat_map(|f| f.breaks().to_vec()).collect();
        let lo = breaks.iter().min().cloned().unwrap_or_else(|| common::q(0)) - common::q(2);
        let hi = breaks.iter().max().cloned().unwrap_or_else(|| common::q(0)) + common::q(2);
        let samples: Vec<_> = (0..100).map(|_| random_rational(&mut rng, &lo, &hi)).collect();
        s.flow
            .check_j_characterization(&case.network, &s.decomposition, &s.schedule, &samples)
            .unwrap_or_else(|e| panic!("case {}: {e}", case.index));
    }
    eprintln!("corpus pipeline: {:?}", started.elapsed());
}
