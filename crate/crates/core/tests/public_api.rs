use ontolab_core::io::{parse_model_file, to_file_string, Model};
use ontolab_core::localdecide::{decide_local, verify_certificate, verify_witness, LocalDecision};
use ontolab_core::ontomodel::{canonicalize, is_local};
use ontolab_core::prepscen::{
    is_no_preparation_signalling, is_preparation_independent, measurement_form_factorizes, product_preparation_model,
    to_measurement_form, SiteModel,
};
use ontolab_core::probcore::EmpiricalModel;
use ontolab_core::random::{self, Family, FAMILIES};
use ontolab_core::rational::Rational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn round_trip(m: Model) {
    let text = to_file_string(&m);
    let back = parse_model_file(text.as_bytes()).unwrap();
    assert_eq!(back, m);
    assert_eq!(to_file_string(&back), text);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_models_round_trip(seed in any::<u64>(), family in 0..FAMILIES.len()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        round_trip(Model::Ontological(random::ontological_model(&mut rng, FAMILIES[family])));
        round_trip(Model::Property(random::property(&mut rng)));
        round_trip(Model::Empirical(random::no_signalling_empirical(&mut rng)));
        round_trip(Model::Empirical(random::signalling_empirical(&mut rng)));
    }

    /// Local model, its canonical form and the LP all tell the same story.
    #[test]
    fn local_model_pipeline(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random::ontological_model(&mut rng, Family::DeterministicLocal);
        prop_assert!(is_local(&h).is_ok());
        let c = canonicalize(&h).unwrap();
        for p in h.preparations() {
            let op = h.operational_probabilities(p).unwrap();
            prop_assert_eq!(&c.operational_probabilities(p).unwrap(), &op);
            let LocalDecision::Local { witness } = decide_local(&op).unwrap() else {
                return Err(TestCaseError::fail("local model judged non-local"));
            };
            prop_assert!(verify_witness(&op, &witness));
        }
    }

    /// Product preparations pass both preparation checks, and their
    /// measurement form factorizes.
    #[test]
    fn product_preparations(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let site = |rng: &mut ChaCha8Rng, name: &str| {
            let space = vec![format!("{name}0"), format!("{name}1"), format!("{name}2")];
            let preparations = (0..2)
                .map(|i| (format!("p{i}"), random::rational_dist(rng, &space, 6)))
                .collect();
            (name.to_string(), SiteModel { ontic_space: space, preparations })
        };
        let sites = [site(&mut rng, "A"), site(&mut rng, "B")];
        let m = product_preparation_model(&sites).unwrap();
        prop_assert!(is_no_preparation_signalling(&m).is_ok());
        prop_assert!(is_preparation_independent(&m).is_ok());
        let e: EmpiricalModel = to_measurement_form(&m).unwrap();
        prop_assert!(measurement_form_factorizes(&e));
        round_trip(Model::Preparation(m));
    }
}

#[test]
fn pr_box_mixtures_flip_at_one_half() {
    use ontolab_core::rational::ratio;
    use ontolab_core::zoo::{deterministic_box, global_assignment, prbox_variant};
    // white noise is the uniform mixture of all 16 deterministic boxes; with
    // PR weight w the CHSH value is 4w, so the mixture is local iff w <= 1/2
    let boxes: Vec<EmpiricalModel> = (0..16u8).map(|i| deterministic_box(&global_assignment(i))).collect();
    let sixteenth = ratio(1, 16);
    let noise = EmpiricalModel::mixture(&boxes.iter().map(|e| (sixteenth.clone(), e)).collect::<Vec<_>>()).unwrap();
    let pr = prbox_variant(0);
    for (num, local) in [(1, true), (2, true), (3, false), (4, false)] {
        let w = ratio(num, 4);
        let rest = Rational::from_integer(1.into()) - &w;
        let e = EmpiricalModel::mixture(&[(w, &pr), (rest, &noise)]).unwrap();
        match decide_local(&e).unwrap() {
            LocalDecision::Local { witness } => {
                assert!(local, "weight {num}/4");
                assert!(verify_witness(&e, &witness));
            }
            LocalDecision::Nonlocal { certificate } => {
                assert!(!local, "weight {num}/4");
                assert!(verify_certificate(&e, &certificate));
            }
        }
    }
}
