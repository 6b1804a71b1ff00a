use fluxon_core::config::{
    count_modes, cut_order, nu, validate, validate_with, ConfigError, FluxConfig, ValidationOptions,
};
use fluxon_core::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Number of integers k ≥ 1 strictly below x, counted one by one.
fn integers_below(x: f64) -> usize {
    let mut k = 0;
    while ((k + 1) as f64) < x {
        k += 1;
    }
    k
}

#[test]
fn spec_examples() {
    let v = validate(FluxConfig::new(vec![2.5], vec![c(0., 0.)])).unwrap();
    assert_eq!((v.counts().d, v.d_f(), v.counts().n[0]), (2, 0, 2));
    let v = validate(FluxConfig::new(vec![1.5, 1.5, -1.4], vec![c(0., 0.), c(1., 0.5), c(2., 1.)])).unwrap();
    assert_eq!((v.counts().d, v.d_f()), (1, 0));
    assert!(!v.warnings().is_empty());
    let e = validate(FluxConfig::new(vec![0.5, 0.5], vec![c(0., 0.), c(0., 0.)])).unwrap_err();
    assert!(matches!(e, ConfigError::CoincidentFluxons { .. }));
    let e = validate(FluxConfig::new(vec![0.6, 0.4005], vec![c(0., 0.), c(1., 1.)])).unwrap_err();
    assert!(matches!(e, ConfigError::NearIntegerTotalFlux { .. }));
    assert!(validate_with(FluxConfig::new(vec![1.0; 7], (0..7).map(|k| c(k as f64, 0.1 * k as f64)).collect()), ValidationOptions::counting())
        .is_ok_and(|v| v.counts().d == 6));
}

#[test]
fn cut_order_examples() {
    let v = validate(FluxConfig::new(vec![0.4; 3], vec![c(0., 2.), c(0., 0.), c(0., 1.)])).unwrap();
    assert_eq!(cut_order(&v).unwrap().order, vec![1, 2, 0]);
    let v = validate(FluxConfig::new(vec![0.7, 0.8], vec![c(0., 0.), c(1., 0.)])).unwrap();
    assert!(matches!(cut_order(&v), Err(ConfigError::AmbiguousOrdering { .. })));
}

#[test]
fn json_round_trip() {
    let cfg = FluxConfig::new(vec![0.5, 0.7], vec![c(0.0, -1.0), c(2.5, 0.25)]);
    let text = serde_json::to_string(&cfg).unwrap();
    assert_eq!(text, r#"{"fluxes":[0.5,0.7],"positions":[[0.0,-1.0],[2.5,0.25]]}"#);
    assert_eq!(serde_json::from_str::<FluxConfig>(&text).unwrap(), cfg);
}

fn fluxes(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..3.0f64, 1..=max_n)
}

proptest! {
    #[test]
    fn counts_match_direct_enumeration(f in fluxes(5)) {
        let m = count_modes(&f);
        let total: f64 = f.iter().sum();
        prop_assert_eq!(m.d, integers_below(total));
        for (a, &x) in f.iter().enumerate() {
            prop_assert_eq!(m.n[a], integers_below(x));
        }
        let reduced: f64 = f.iter().map(|&x| x - integers_below(x) as f64).sum();
        prop_assert_eq!(m.d_f, integers_below(reduced));
        prop_assert!(m.d_f < f.len().max(1));
    }

    #[test]
    fn bookkeeping_for_positive_fluxes(f in prop::collection::vec(0.01..3.0f64, 1..6)) {
        let m = count_modes(&f);
        prop_assert_eq!(m.d, m.n.iter().sum::<usize>() + m.d_f);
        prop_assert!(m.phi_prime.iter().all(|&p| p > 0.0 && p <= 1.0));
    }

    #[test]
    fn counts_invariant_under_permutation_and_translation(
        f in prop::collection::vec(0.05..2.5f64, 2..6),
        shift in (-5.0..5.0f64, -5.0..5.0f64),
        seed in any::<u64>(),
    ) {
        let n = f.len();
        let pos: Vec<Complex64> = (0..n).map(|k| c(k as f64, 0.37 * (k * k) as f64)).collect();
        let opts = ValidationOptions::counting();
        let base = validate_with(FluxConfig::new(f.clone(), pos.clone()), opts).unwrap();
        let moved: Vec<Complex64> = pos.iter().map(|z| z + c(shift.0, shift.1)).collect();
        let shifted = validate_with(FluxConfig::new(f.clone(), moved), opts).unwrap();
        prop_assert_eq!(base.counts(), shifted.counts());
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left((seed % n as u64) as usize);
        let pf: Vec<f64> = perm.iter().map(|&k| f[k]).collect();
        let pp: Vec<Complex64> = perm.iter().map(|&k| pos[k]).collect();
        let permuted = validate_with(FluxConfig::new(pf, pp), opts).unwrap();
        prop_assert_eq!(base.counts().d, permuted.counts().d);
        prop_assert_eq!(base.counts().d_f, permuted.counts().d_f);
        for (k, &p) in perm.iter().enumerate() {
            prop_assert_eq!(permuted.counts().n[k], base.counts().n[p]);
        }
    }

    // Kept to |Φ| < 4 so that the rounding of phi + 1 itself stays below 1e-15.
    #[test]
    fn nu_is_periodic_and_unimodular(phi in -4.0..4.0f64) {
        prop_assert!((nu(phi + 1.0) - nu(phi)).norm() < 1e-14);
        prop_assert!((nu(phi).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cut_order_sorts_by_imaginary_part(ys in prop::collection::vec(-5.0..5.0f64, 2..6)) {
        let n = ys.len();
        let pos: Vec<Complex64> = ys.iter().enumerate().map(|(k, &y)| c(k as f64 * 0.3, y)).collect();
        let v = validate_with(FluxConfig::new(vec![0.3; n], pos), ValidationOptions::counting()).unwrap();
        if let Ok(cut) = cut_order(&v) {
            let mut sorted = cut.order.clone();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
            prop_assert!(cut.order.windows(2).all(|w| ys[w[0]] < ys[w[1]]));
        }
    }
}
