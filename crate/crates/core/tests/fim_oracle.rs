mod common;

use common::fim::closed_form_gap;

#[test]
fn closed_form_matches_finite_difference_white() {
    let gap = closed_form_gap(false);
    assert!(gap < 1e-3, "relative FIM mismatch {gap}");
}

#[test]
fn closed_form_matches_finite_difference_colored() {
    let gap = closed_form_gap(true);
    assert!(gap < 1e-3, "relative FIM mismatch {gap}");
}
