mod common;

use common::{criteria, shunting_yard, Oracle};
use ised::blackbox::hwf::evaluate_symbols;
use ised::blackbox::ProgramErrorKind;

#[test]
fn matches_shunting_yard_on_random_formulas() {
    let detail = criteria::hwf_agreement(1000).unwrap();
    assert!(detail.contains("division errors"), "{detail}");
}

#[test]
fn malformed_formulas_agree() {
    for f in [vec![], vec![10], vec![1, 2], vec![1, 10], vec![10, 1, 10]] {
        assert_eq!(shunting_yard(&f), Oracle::Syntax);
        let e = evaluate_symbols(&f).unwrap_err();
        assert_eq!(e.kind, ProgramErrorKind::InvalidInput, "{f:?}");
    }
}
