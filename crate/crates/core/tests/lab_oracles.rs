use std::sync::Arc;

use invforge::constructions::{self, CaseSpec};
use invforge::gf::FieldSpec;
use invforge::groups::{ActionSpace, GroupKind};
use invforge::lab::{self, BasisMode, VerifyOptions};
use invforge::mpoly::Poly;
use proptest::prelude::*;

fn field(q: u64) -> Arc<FieldSpec> {
    Arc::new(FieldSpec::of_order(q).unwrap())
}

fn case(group: GroupKind, space: ActionSpace, q: u64) -> CaseSpec {
    CaseSpec::new(group, space, field(q)).unwrap()
}

#[test]
fn generator_mode_matches_full_enumeration() {
    for q in [2u64, 3] {
        for c in CaseSpec::all(&field(q)) {
            let a = c.action().unwrap();
            for d in 0..=6 {
                let gens = lab::invariant_basis(&a, d, BasisMode::Generators).unwrap();
                let all = lab::invariant_basis(&a, d, BasisMode::AllElements).unwrap();
                assert_eq!(gens, all, "{c} degree {d}");
            }
        }
    }
}

#[test]
fn frozen_series() {
    let c = case(GroupKind::Gl2, ActionSpace::Gl2, 3);
    assert_eq!(lab::expected_series(&c, 4), vec![1, 1, 2, 2, 4]);
    assert_eq!(lab::invariant_dims(&c.action().unwrap(), 4, BasisMode::AllElements).unwrap(), vec![1, 1, 2, 2, 4]);
    let c = case(GroupKind::O2, ActionSpace::Symmetric, 2);
    assert_eq!(lab::expected_series(&c, 3), vec![1, 2, 4, 6]);
    let c = case(GroupKind::O2, ActionSpace::Alternating, 3);
    assert_eq!(lab::expected_series(&c, 6), vec![1, 0, 1, 0, 1, 0, 1]);
    let c = case(GroupKind::Gl2, ActionSpace::Gl2, 2);
    assert_eq!(lab::expected_series(&c, 6), vec![1, 1, 3, 4, 8, 10, 17]);
}

#[test]
fn membership_examples() {
    let c = case(GroupKind::Gl2, ActionSpace::Gl2, 3);
    let s = constructions::build_suite(&c, &c.field.irreducible_quadratic()).unwrap();
    let r = s.primary_polys();
    let h = &s.secondary.as_ref().unwrap().poly;
    assert!(lab::subring_membership(&(h * h), &r).unwrap());
    assert!(!lab::subring_membership(h, &r).unwrap());
    let f1 = &r[0];
    assert!(lab::subring_membership(&(&(&(f1 * f1) * &r[1]) + &r[2]), &r).unwrap());
    let a = Poly::var(f1.ring(), "a").unwrap();
    assert!(!lab::subring_membership(&a, &r).unwrap());
}

#[test]
fn every_small_case_verifies() {
    for q in [2u64, 3] {
        for c in CaseSpec::all(&field(q)) {
            let r = lab::verify_case(&c, &VerifyOptions::default());
            assert!(r.passed(), "{}", r.to_text());
            assert_eq!(r.dims, r.expected_dims);
        }
    }
}

#[test]
fn report_json_shape() {
    let c = case(GroupKind::O2, ActionSpace::Symmetric, 3);
    let r = lab::verify_case(&c, &VerifyOptions { max_degree: Some(5), quadratic: None });
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["case"]["group"], "o2");
    assert_eq!(v["case"]["space"], "symmetric");
    assert_eq!(v["case"]["q"], 3);
    for c in v["checks"].as_array().unwrap() {
        let keys: Vec<&String> = c.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 4);
        assert!(c["pass"].is_boolean());
    }
    assert_eq!(v["dims"].as_array().unwrap().len(), 6);
    let again = lab::verify_case(&c, &VerifyOptions { max_degree: Some(5), quadratic: None });
    assert_eq!(again.to_json(), r.to_json());
}

#[test]
fn size_cap_is_reported() {
    let a = case(GroupKind::Gl2, ActionSpace::Gl2, 2).action().unwrap();
    assert!(matches!(lab::invariant_basis(&a, 60, BasisMode::Generators), Err(lab::LabError::SizeCap { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn basis_elements_are_invariant(q in prop::sample::select(vec![2u64, 3, 4]), k in 0usize..7, d in 0u32..6) {
        let cases = CaseSpec::all(&field(q));
        let c = &cases[k];
        let a = c.action().unwrap();
        let basis = lab::invariant_basis(&a, d, BasisMode::Generators).unwrap();
        prop_assert_eq!(basis.len() as u64, lab::expected_series(c, d)[d as usize]);
        for p in &basis {
            prop_assert!(a.fixes_all(p));
            prop_assert_eq!(p.homogeneous_degree(), Some(d));
        }
    }

    #[test]
    fn decomposition_count_holds(q in prop::sample::select(vec![2u64, 3, 4, 5]), k in 0usize..7, top in 0u32..30) {
        let c = &CaseSpec::all(&field(q))[k];
        let form = constructions::closed_form(c);
        let s = constructions::build_suite(c, &c.field.irreducible_quadratic()).unwrap();
        let r = constructions::ClosedForm { numerator: vec![0], denominator: s.primary_degrees() }.expand(top);
        let total = form.expand(top);
        match s.expected_secondary_degree {
            Some(k) => {
                for d in 0..=top as usize {
                    let shifted = if d >= k as usize { r[d - k as usize] } else { 0 };
                    prop_assert_eq!(total[d], r[d] + shifted);
                }
            }
            None => prop_assert_eq!(total, r),
        }
    }

    #[test]
    fn hsop_invariant_under_scaling(q in prop::sample::select(vec![3u64, 5]), c in 1u16..5) {
        let f = field(q);
        let s = constructions::gl2_primaries(&f, &f.irreducible_quadratic());
        let scalar = invforge::gf::Felt(c % q as u16);
        prop_assume!(!scalar.is_zero());
        let scaled: Vec<Poly> = s.primary_polys().iter().map(|p| p.scale(scalar)).collect();
        prop_assert!(lab::hsop_check(&scaled).unwrap().pass);
    }
}
