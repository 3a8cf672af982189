use pmt::axioms::{check_partial_metric_axioms, Axiom, CheckConfig};
use pmt::series::{certify_alpha_series, CertificateStatus, RateSequence, DEFAULT_GRID};
use pmt::solvers::{solve_pair_banach, SolverConfig};
use pmt::spaces::{eval_distance, Domain, Oracle, Point, Sampler, SelfMap, SpaceClass, SpaceDescriptor};
use proptest::prelude::*;

fn max_space() -> SpaceDescriptor {
    SpaceDescriptor::builder(Oracle::Max, Domain::unit()).class(SpaceClass::Kpms).build().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn max_distance_is_symmetric_and_dominates_self_distance(x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
        let s = max_space();
        let (px, py) = (Point::scalar(x), Point::scalar(y));
        let pxy = eval_distance(&s, &px, &py).unwrap();
        prop_assert_eq!(pxy, eval_distance(&s, &py, &px).unwrap());
        prop_assert!(eval_distance(&s, &px, &px).unwrap() <= pxy);
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>()) {
        let a = Sampler::new(seed, Domain::unit()).with_budget(200).pairs();
        let b = Sampler::new(seed, Domain::unit()).with_budget(200).pairs();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn scaled_max_keeps_partial_metric_axioms(scale in 0.1f64..10.0, seed in 0u64..1000) {
        let s = SpaceDescriptor::builder(Oracle::affine(scale, 0.0, Oracle::Max), Domain::unit()).build().unwrap();
        let sampler = Sampler::new(seed, Domain::unit()).with_budget(400);
        let r = check_partial_metric_axioms(&s, &sampler, &CheckConfig::default()).unwrap();
        prop_assert!(r.passes(&[Axiom::Pm1, Axiom::Pm2, Axiom::Pm3, Axiom::Pm4]));
    }

    #[test]
    fn contraction_orbits_stay_within_the_geometric_bound(d in 2.0f64..10.0, slack in 0.0f64..0.2, x0 in 0.0f64..=1.0) {
        let space = SpaceDescriptor::builder(Oracle::AbsDiff, Domain::unit()).complete(true).build().unwrap();
        let t = SelfMap::divide_by(d);
        let k = (1.0 / d + slack).min(0.99);
        let r = solve_pair_banach(
            &space,
            &t,
            &t,
            k,
            &Point::scalar(x0),
            &SolverConfig::default(),
        )
        .unwrap();
        prop_assert!(r.converged());
        prop_assert!(r.point.x() <= 1e-9);
        prop_assert!(r.bound_check.is_none_or(|b| b.satisfied));
    }

    #[test]
    fn certificate_threshold_is_a_real_threshold(terms in prop::collection::vec(0.0f64..2.0, 2..300)) {
        let seq = RateSequence::new(terms.clone()).unwrap();
        let cert = certify_alpha_series(&seq, &DEFAULT_GRID).unwrap();
        let sums = seq.partial_sums();
        if cert.status == CertificateStatus::Certified {
            prop_assert!(cert.n_lambda <= terms.len() / 2);
            for l in cert.n_lambda..=terms.len() {
                prop_assert!(sums[l - 1] <= cert.lambda * l as f64);
            }
        }
        for c in &cert.per_lambda {
            if c.n_lambda > 1 && c.n_lambda <= terms.len() {
                prop_assert!(sums[c.n_lambda - 2] > c.lambda * (c.n_lambda - 1) as f64);
            }
        }
    }
}
