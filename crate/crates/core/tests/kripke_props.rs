use epistemod_core::kripke::{export_model, import_model};
use epistemod_core::sample::{random_formula, random_model, rng, FormulaShape};
use epistemod_core::{Formula, Signature};
use proptest::prelude::*;

fn sig() -> Signature {
    Signature::new(["p", "q"], 2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bisimilar_states_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_model(&mut r, &sig(), 5);
        let classes = m.refinement();
        let classes = classes.stable();
        let shape = FormulaShape { max_depth: 3, max_size: 14 };
        for _ in 0..20 {
            let f = random_formula(&mut r, &sig(), shape);
            let ext = m.extension(&f);
            for s in 0..m.len() {
                for t in 0..m.len() {
                    if classes[s] == classes[t] {
                        prop_assert_eq!(ext[s], ext[t], "{} at {} vs {}", f, s, t);
                    }
                }
            }
        }
    }

    #[test]
    fn knowledge_is_reflexive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_model(&mut r, &sig(), 5);
        for _ in 0..10 {
            let f = random_formula(&mut r, &sig(), FormulaShape::default());
            for i in 1..=2 {
                let t = Formula::implies(Formula::know(i, f.clone()), f.clone());
                prop_assert!(m.extension(&t).iter().all(|&b| b));
            }
        }
    }

    #[test]
    fn document_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_model(&mut r, &sig(), 5);
        let text = export_model(&m);
        let back = import_model(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(export_model(&back), text);
    }
}
