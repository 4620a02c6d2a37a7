use std::sync::Arc;

use proptest::prelude::*;
use stackchern::gring::{rat, Generator, GradedPoly, Monomial, RingSpec, Rule, Universe};
use stackchern::stablemaps::{Admissibility, ClassContext};
use stackchern::stratnet::StratumNetwork;
use stackchern::wblow::{fibration_ring, Block, WeightedBundleData};

const CAP: u32 = 4;

fn xyz() -> Arc<Universe> {
    Universe::new(vec![Generator::new("x", 1), Generator::new("y", 1), Generator::new("z", 2)]).unwrap()
}

type RawTerm = ((u32, u32, u32), i64, i64);

fn raw_terms() -> impl Strategy<Value = Vec<RawTerm>> {
    prop::collection::vec(((0..=3u32, 0..=3u32, 0..=2u32), -6..=6i64, 1..=4i64), 0..7)
}

fn build(u: &Arc<Universe>, cap: u32, raw: &[RawTerm]) -> GradedPoly {
    GradedPoly::from_terms(
        u,
        cap,
        raw.iter().map(|&((a, b, c), n, d)| {
            let pairs = [(0, a), (1, b), (2, c)].into_iter().filter(|&(i, _)| i < u.len());
            (Monomial::from_exponents(u, pairs), rat(n, d))
        }),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_axioms(a in raw_terms(), b in raw_terms(), c in raw_terms()) {
        let u = xyz();
        let (a, b, c) = (build(&u, CAP, &a), build(&u, CAP, &b), build(&u, CAP, &c));
        let one = GradedPoly::one(&u, CAP);
        let zero = GradedPoly::zero(&u, CAP);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &one, a.clone());
        prop_assert_eq!(&a + &zero, a.clone());
        prop_assert!((&a - &a).is_zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn units_invert(raw in raw_terms(), c in 1..=5i64, sign in prop::bool::ANY) {
        let u = xyz();
        let lead = if sign { rat(c, 2) } else { rat(-c, 3) };
        let raw = build(&u, CAP, &raw);
        let p = &raw + &GradedPoly::constant(&u, CAP, lead - raw.constant_term());
        let inv = p.inv_unit().unwrap();
        prop_assert!((&p * &inv).is_one());
    }

    #[test]
    fn truncation_is_a_ring_map(a in raw_terms(), b in raw_terms(), low in 0..=CAP) {
        let u = xyz();
        let (a, b) = (build(&u, CAP, &a), build(&u, CAP, &b));
        prop_assert_eq!((&a * &b).truncate(low), &a.truncate(low) * &b.truncate(low));
        prop_assert_eq!((&a + &b).truncate(low), &a.truncate(low) + &b.truncate(low));
    }

    #[test]
    fn normal_form_is_idempotent_and_multiplicative(a in raw_terms(), b in raw_terms()) {
        let ring = bundle_ring();
        let u = ring.universe();
        let (a, b) = (build(u, CAP, &a), build(u, CAP, &b));
        let na = ring.normal_form(&a).unwrap();
        let nb = ring.normal_form(&b).unwrap();
        prop_assert_eq!(ring.normal_form(&na).unwrap(), na.clone());
        prop_assert_eq!(ring.normal_form(&(&a * &b)).unwrap(), ring.normal_form(&(&na * &nb)).unwrap());
    }

    #[test]
    fn homogeneous_networks_satisfy_the_degree_ratio(
        tops in prop::collection::vec(prop::collection::btree_set(1..=5u32, 0..=3), 1..5),
        degree in 1..=4i64,
        boolean in 0..=3u32,
    ) {
        let tops: Vec<Vec<u32>> = tops.into_iter().map(|t| t.into_iter().collect()).collect();
        let nets = [
            StratumNetwork::down_closure(&tops, rat(degree, 1)).unwrap(),
            StratumNetwork::boolean_lattice(boolean, rat(degree, 1)).unwrap(),
        ];
        for net in nets {
            if net.homogeneity().homogeneous {
                let sweep = net.degree_ratio_sweep();
                prop_assert!(sweep.failures.is_empty(), "{net}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn closed_form_is_deterministic(n in 1..=2u32, m in 1..=3u32, d in 1..=3u32, cap in 1..=2u32) {
        let ctx = ClassContext::for_marked(n, m, d, cap, Admissibility::default()).unwrap();
        let serial = serde_json::to_string(&ctx.chern_stratum_closed_form(0).unwrap().to_json()).unwrap();
        let par = ctx.clone().with_parallel(true);
        for _ in 0..2 {
            let again = serde_json::to_string(&par.chern_stratum_closed_form(0).unwrap().to_json()).unwrap();
            prop_assert_eq!(&again, &serial);
        }
    }
}

/// `x³ = 0` with a rank-3 weighted bundle on top, giving a relation in `y`.
fn bundle_ring() -> RingSpec {
    let base_u = Universe::new(vec![Generator::new("x", 1)]).unwrap();
    let lhs = Monomial::from_exponents(&base_u, [(0, 3)]);
    let base = RingSpec::new(&base_u, CAP, vec![Rule { lhs, rhs: GradedPoly::zero(&base_u, CAP) }], None).unwrap();
    let data = WeightedBundleData::new(vec![Block::trivial(&base_u, CAP, 1, 2), Block::trivial(&base_u, CAP, 2, 1)]).unwrap();
    fibration_ring(&base, &data, "y", CAP).unwrap()
}
