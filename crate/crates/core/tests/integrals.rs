use strong_taylor::coeff::{CoeffConfig, CoeffStore, WeightProfile};
use strong_taylor::noise::{validate_family, Route};
use strong_taylor::oracle::{exact_mse, IndexPattern};

#[test]
fn fine_grid_agrees_with_exact_error_on_coincident_triple() {
    let store = CoeffStore::new(CoeffConfig::default());
    let comps = [0, 1, 0];
    let q = 2;
    let exact = exact_mse(&store, WeightProfile::P000, &IndexPattern::of(&comps), q, 1.0).unwrap();
    let r = validate_family(&store, WeightProfile::P000, &comps, Route::ItoDirect, q, 4000, 2000, 12).unwrap();
    // The fine grid itself carries an O(1/substeps) bias on top of sampling noise.
    assert!(r.z_score(exact).abs() <= 4.0, "{} vs {exact}", r.mse);
}

#[test]
fn fine_grid_error_falls_with_q() {
    let store = CoeffStore::new(CoeffConfig::default());
    let mse = |q| validate_family(&store, WeightProfile::P00, &[0, 1], Route::ItoDirect, q, 2000, 1000, 5).unwrap().mse;
    assert!(mse(1) > mse(6));
}
