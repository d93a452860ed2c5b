mod common;

use ks_forge_core::assignments::{
    boolean_frame_function_exists, check_admissible, check_value_indefinite, count_boolean_frame_functions,
    exists_admissible, propagate, Premise, Propagation, SolverConfig, Value,
};
use ks_forge_core::data;
use ks_forge_core::diagram::Diagram;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn case(seed: u64) -> (Diagram, Vec<Premise>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = common::random_diagram(&mut rng, 9, 6);
    let p = common::random_premises(&mut rng, &d, 4);
    (d, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn propagation_is_sound(seed in any::<u64>()) {
        let (d, premises) = case(seed);
        let mut completions = Vec::new();
        common::brute_force(&d, &premises, false, |v| { completions.push(v.to_vec()); false });
        match propagate(&d, &premises).unwrap() {
            Propagation::Closure { assignment, .. } => {
                for (id, v) in assignment.iter() {
                    let i = d.index_of(id).unwrap();
                    prop_assert!(completions.iter().all(|c| c[i] == v.as_u8()), "{id} not forced");
                }
            }
            Propagation::Conflict(_) => prop_assert!(completions.is_empty()),
        }
    }

    #[test]
    fn admissible_search_matches_enumeration(seed in any::<u64>()) {
        let (d, premises) = case(seed);
        let v = exists_admissible(&d, &premises, &SolverConfig::default()).unwrap();
        prop_assert_eq!(v.is_satisfiable(), common::brute_force_exists(&d, &premises, false));
        if let Some(w) = v.witness() {
            prop_assert!(check_admissible(&d, w).unwrap());
            prop_assert!(w.satisfies(&premises));
        }
    }

    #[test]
    fn frame_functions_match_enumeration(seed in any::<u64>()) {
        let (d, premises) = case(seed);
        let fixed: Vec<Premise> = premises
            .into_iter()
            .filter(|p| p.req != ks_forge_core::assignments::Requirement::Definite)
            .collect();
        let cfg = SolverConfig::default();
        let v = boolean_frame_function_exists(&d, &fixed, &cfg).unwrap();
        let mut count = 0u64;
        common::brute_force(&d, &fixed, true, |_| { count += 1; false });
        prop_assert_eq!(v.is_satisfiable(), count > 0);
        prop_assert_eq!(count_boolean_frame_functions(&d, &fixed, u64::MAX, &cfg).unwrap(), count);
    }

    #[test]
    fn more_premises_never_help(seed in any::<u64>(), extra in 0usize..9, one in any::<bool>()) {
        let (d, premises) = case(seed);
        let id = d.id(extra % d.len()).to_string();
        if premises.iter().any(|p| p.id == id) {
            return Ok(());
        }
        let cfg = SolverConfig::default();
        let base = exists_admissible(&d, &premises, &cfg).unwrap().is_satisfiable();
        let mut more = premises.clone();
        more.push(Premise::value(id, if one { Value::One } else { Value::Zero }));
        let after = exists_admissible(&d, &more, &cfg).unwrap().is_satisfiable();
        prop_assert!(base || !after);
    }

    #[test]
    fn parallel_branches_agree(seed in any::<u64>()) {
        let (d, premises) = case(seed);
        let seq = exists_admissible(&d, &premises, &SolverConfig::default()).unwrap();
        let par = exists_admissible(&d, &premises, &SolverConfig { parallel_branches: true, ..Default::default() }).unwrap();
        prop_assert_eq!(seq.is_satisfiable(), par.is_satisfiable());
    }
}

#[test]
fn indefiniteness_matches_enumeration() {
    for seed in 0..300 {
        let (d, _) = case(seed);
        let (a, b) = (d.id(0).to_string(), d.id(1).to_string());
        let oracle = !common::brute_force_exists(&d, &[Premise::one(&a), Premise::definite(&b)], false);
        let got = check_value_indefinite(&d, &a, &b, &SolverConfig::default()).unwrap();
        assert_eq!(got, oracle, "seed {seed}");
    }
}

#[test]
fn peres_set_has_no_frame_function() {
    let d = data::load_diagram("peres_completed").unwrap();
    assert_eq!(d.len(), 57);
    let mut found = 0;
    common::pruned_enumeration(&d, &[], true, &mut |_| found += 1);
    assert_eq!(found, 0);
    let v = boolean_frame_function_exists(&d, &[], &SolverConfig::default()).unwrap();
    assert!(!v.is_satisfiable());
}

#[test]
fn peres_core_alone_is_colourable() {
    // the 33 original rays with only their own orthogonal triads
    let full = data::load_diagram("peres_completed").unwrap();
    let rays: Vec<(String, _)> = full.observables()[..33]
        .iter()
        .map(|o| (o.id.clone(), o.realization.unwrap()))
        .collect();
    let d = Diagram::from_rays(&rays, 1e-9).unwrap();
    let v = boolean_frame_function_exists(&d, &[], &SolverConfig::default()).unwrap();
    let w = v.witness().expect("colourable");
    assert_eq!(w.len(), 33);
    assert!(check_admissible(&d, w).unwrap());
}

#[test]
fn peres_set_still_has_partial_assignments() {
    let d = data::load_diagram("peres_completed").unwrap();
    let cfg = SolverConfig::default();
    let v = exists_admissible(&d, &[Premise::one("r01")], &cfg).unwrap();
    assert!(check_admissible(&d, v.witness().unwrap()).unwrap());
}
