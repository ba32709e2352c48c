mod common;

use common::*;
use proptest::prelude::*;
use symdef_core::density::*;
use symdef_core::Polynomial;

fn bracket(a: &Polynomial, b: &Polynomial) -> Polynomial {
    &compose_sym(a, b, N) - &compose_sym(b, a, N)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn composition_is_associative(a in symbol(2, 2), b in symbol(2, 2), c in symbol(2, 2)) {
        let l = compose_sym(&compose_sym(&a, &b, N), &c, N);
        let r = compose_sym(&a, &compose_sym(&b, &c, N), N);
        prop_assert_eq!(l, r);
    }

    #[test]
    fn weyl_transform_inverts(a in symbol(3, 3)) {
        let there = weyl_transform(&a, N);
        prop_assert_eq!(weyl_transform_with(&there, &-&lam(), N), a);
    }

    #[test]
    fn embedding_is_a_homomorphism(x in field(2), y in field(2)) {
        let xy = x.bracket(&y).unwrap();
        let lhs = embed_lambda(&xy);
        let rhs = bracket(&embed_lambda(&x), &embed_lambda(&y));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn action_is_a_representation(x in field(2), y in field(2), a in symbol(2, 3)) {
        let xy = x.bracket(&y).unwrap();
        let lhs = dlm_action(&xy, &a);
        let rhs = &dlm_action(&x, &dlm_action(&y, &a)) - &dlm_action(&y, &dlm_action(&x, &a));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn operator_form_matches_action(x in field(3), a in symbol(3, 3)) {
        prop_assert_eq!(dlm_operator(&x).apply(&a), dlm_action(&x, &a));
    }

    #[test]
    fn conjugated_action_is_a_representation(x in field(2), y in field(2)) {
        let xy = x.bracket(&y).unwrap();
        let lhs = conjugated_operator(&xy);
        let rhs = conjugated_operator(&x).commutator(&conjugated_operator(&y));
        prop_assert!((&lhs - &rhs).is_zero());
    }
}
