mod common;

use daleq_core::engine::evaluate;
use daleq_core::rulelang::parse_rule_source;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn semi_naive_matches_naive(seed in any::<u64>()) {
        let p = common::random_program(&mut ChaCha8Rng::seed_from_u64(seed));
        let src = p.source();
        let rules = parse_rule_source(&src).unwrap();
        let edb = p.edb_database();
        let idb = evaluate(&edb, &rules).unwrap();
        prop_assert_eq!(common::tuples(&idb), common::naive(&p), "{}", src);
        let ctx = common::merged(&edb, &idb);
        let v = common::validate_provenance(&rules, &ctx, &idb);
        prop_assert!(v.is_ok(), "{:?}\n{}", v, src);
    }
}

#[test]
fn oracle_sees_recursion() {
    // Make sure the generator exercises recursive and negated rules.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut rec, mut neg, mut nonempty) = (0, 0, 0);
    for _ in 0..200 {
        let p = common::random_program(&mut rng);
        rec += p.rules.iter().filter(|r| matches!(r.id, common::HeadId::Copy(_))).count();
        neg += p.rules.iter().filter(|r| r.body.iter().any(|l| matches!(l, common::GLit::Neg(_)))).count();
        nonempty += usize::from(!common::naive(&p).is_empty());
    }
    assert!(rec > 20 && neg > 20 && nonempty > 50, "{rec} {neg} {nonempty}");
}
