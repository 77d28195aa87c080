use daleq_core::classfile::parse_class;
use daleq_core::equivalence::{classify_diff, parse_derivation, DerivationTree};
use daleq_core::extractor::{
    extract_edb, parse_database, parse_schema, serialize_database, ExtractionConfig, FactDatabase, SCHEMA_FILE,
};
use daleq_core::rulelang::parse_rule_source;
use daleq_core::rules_library::{canonical_rulesets, SoundnessMode};
use daleq_testkit::fixtures::{corpus, decorate, ClassSpec};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn edb(bytes: &[u8]) -> FactDatabase {
    extract_edb(&parse_class(bytes).unwrap(), &ExtractionConfig::default()).unwrap()
}

fn spec(seed: u64) -> ClassSpec {
    corpus(&mut ChaCha8Rng::seed_from_u64(seed), 1).remove(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn line_numbers_and_spare_labels_leave_edb_unchanged(seed in any::<u64>(), deco in any::<u64>()) {
        let s = spec(seed);
        let d = decorate(&s, &mut ChaCha8Rng::seed_from_u64(deco));
        let (a, b) = (s.build(), d.build());
        prop_assert_eq!(edb(&a), edb(&b));
    }

    #[test]
    fn tsv_round_trip(seed in any::<u64>()) {
        let db = edb(&spec(seed).build());
        let dir = tempfile::tempdir().unwrap();
        serialize_database(&db, dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join(SCHEMA_FILE)).unwrap();
        let schema = parse_schema(&text, &dir.path().join(SCHEMA_FILE)).unwrap();
        prop_assert_eq!(&schema, &db.schema);
        let back = parse_database(dir.path(), &schema, db.kind).unwrap();
        prop_assert_eq!(back, db);
    }

    #[test]
    fn derivation_round_trip(t in tree()) {
        prop_assert_eq!(parse_derivation(&t.render()).unwrap(), t);
    }

    #[test]
    fn classification_ignores_line_order(lines in prop::collection::vec(diff_line(), 0..12), seed in any::<u64>()) {
        let diff = format!("--- a\n+++ b\n@@ -1,9 +1,9 @@\n{}", lines.iter().map(|l| format!("{l}\n")).collect::<String>());
        let mut shuffled = lines.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let diff2 = format!("--- a\n+++ b\n@@ -1,9 +1,9 @@\n{}", shuffled.iter().map(|l| format!("{l}\n")).collect::<String>());
        prop_assert_eq!(classify_diff(&diff), classify_diff(&diff2));
    }
}

fn tree() -> impl Strategy<Value = DerivationTree> {
    let leaf = (1u32..100_000).prop_map(|n| DerivationTree::Leaf(format!("F{n}")));
    leaf.prop_recursive(5, 64, 4, |inner| {
        ("R_[A-Z][A-Z0-9_]{0,12}", prop::collection::vec(inner, 1..4))
            .prop_map(|(r, kids)| DerivationTree::Node(r, kids))
    })
}

fn diff_line() -> impl Strategy<Value = String> {
    let body = prop_oneof![
        "[a-z/]{1,8}".prop_map(|v| format!("IDB_LDC\tm()V\tString\t{v}")),
        "[a-z/]{1,8}".prop_map(|v| format!("IDB_CHECKCAST\tm()V\t{v}")),
        prop_oneof![Just("()V"), Just("(I)V")]
            .prop_map(|d| format!("IDB_INVOKESPECIAL\tm()V\tjava/lang/StringBuilder\t<init>\t{d}\t-")),
        "[a-z]{1,3}".prop_map(|e| format!("IDB_SIGNATURE\t{e}\tLx;")),
        "[a-z]{1,3}".prop_map(|e| format!("ACC_SYNTHETIC\t{e}()V")),
        "[a-z]{1,3}".prop_map(|e| format!("ACC_SYNTHETIC\t{e}:I")),
        "[A-Z]{1,3}".prop_map(|e| format!("IDB_ANNOTATION\tC\tL{e};\t{{}}")),
        ("[a-c]", 0..4u8).prop_map(|(e, f)| format!("IDB_ACCESS\t{e}\t{f}")),
    ];
    (prop_oneof![Just('+'), Just('-'), Just(' ')], body).prop_map(|(p, b)| format!("{p}{b}"))
}

#[test]
fn rule_render_round_trip() {
    for mode in [SoundnessMode::SoundOnly, SoundnessMode::WithSoundy] {
        let set = canonical_rulesets(mode);
        let back = parse_rule_source(&set.render()).unwrap();
        assert_eq!(back, set);
    }
}

#[test]
fn stride_changes_counters_only() {
    let s = spec(11).build();
    let model = parse_class(&s).unwrap();
    let one = extract_edb(&model, &ExtractionConfig::default()).unwrap();
    let ten = extract_edb(&model, &ExtractionConfig { counter_stride: 10, ..Default::default() }).unwrap();
    assert_ne!(one, ten);
    assert_eq!(one.len(), ten.len());
}
