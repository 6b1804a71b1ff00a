use fluxon_core::config::{nu, validate, FluxConfig};
use fluxon_core::linalg::{eigenvalues, inverse, CMatrix};
use fluxon_core::metric::g_matrix;
use fluxon_core::monodromy::{
    confined_phase, encircle_block, exchange_block, holonomy_analytic, reduce, reduce_form, rigid_rotation_phase,
    word_to_monodromy, word_to_monodromy_ordered, BraidWord, MonodromyError, Move,
};
use fluxon_core::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn identity_order(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn mono(moves: Vec<Move>, fluxes: &[f64]) -> CMatrix {
    word_to_monodromy_ordered(&BraidWord::new(moves), fluxes, &identity_order(fluxes.len())).unwrap().m
}

fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

/// Eigenvalues matched greedily; returns the largest mismatch.
fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut rest = b.to_vec();
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = rest
            .iter()
            .enumerate()
            .map(|(k, y)| (k, (x - y).norm()))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        worst = worst.max(d);
        rest.remove(k);
    }
    worst
}

#[test]
fn block_examples() {
    let one = c(1., 0.);
    assert_eq!(encircle_block(one, one), CMatrix::identity(2, 2));
    assert_eq!(exchange_block(one), sigma_x());
    let (na, nb) = (nu(0.3), nu(0.55));
    let lhs = encircle_block(nb, na);
    let rhs = sigma_x() * inverse(&encircle_block(na.conj(), nb.conj())).unwrap() * sigma_x();
    assert!((lhs - rhs).norm() < 1e-14);
}

#[test]
fn word_examples() {
    let f = [0.4, 0.7, 0.9];
    assert_eq!(mono(vec![], &f), CMatrix::identity(3, 3));
    let m = mono(vec![Move::Encircle { a: 0, b: 1, power: 1 }], &f);
    assert_eq!(m[(2, 2)], c(1., 0.));
    assert_eq!((m[(0, 2)], m[(1, 2)], m[(2, 0)], m[(2, 1)]), (c(0., 0.), c(0., 0.), c(0., 0.), c(0., 0.)));
    let err = word_to_monodromy_ordered(&BraidWord::new(vec![Move::Encircle { a: 0, b: 2, power: 1 }]), &f, &[0, 1, 2]);
    assert!(matches!(err, Err(MonodromyError::NonAdjacentEncircle { .. })));
    let err = word_to_monodromy_ordered(&BraidWord::new(vec![Move::Exchange { strand: 0, power: 1 }]), &f, &[0, 1, 2]);
    assert!(matches!(err, Err(MonodromyError::ExchangeOnDistinctFluxes)));
}

#[test]
fn braid_relations() {
    let f = [0.37; 4];
    let s = |i: usize, p: i32| Move::Exchange { strand: i, power: p };
    let yb = mono(vec![s(0, 1), s(1, 1), s(0, 1)], &f) - mono(vec![s(1, 1), s(0, 1), s(1, 1)], &f);
    assert!(yb.norm() < 1e-14, "Yang–Baxter residual {:e}", yb.norm());
    let far = mono(vec![s(0, 1), s(2, 1)], &f) - mono(vec![s(2, 1), s(0, 1)], &f);
    assert!(far.norm() < 1e-14);
    let sq = mono(vec![s(1, 2)], &f) - mono(vec![Move::Encircle { a: 1, b: 2, power: 1 }], &f);
    assert!(sq.norm() < 1e-14, "exchange² vs encircle {:e}", sq.norm());
}

#[test]
fn encircle_eigenvalues() {
    let (fa, fb) = (0.3, 0.45);
    let ev = eigenvalues(&encircle_block(nu(fa), nu(fb)));
    assert!(spectrum_distance(&ev, &[c(1., 0.), nu(fa) * nu(fb)]) < 1e-14);
}

#[test]
fn analytic_holonomy_examples() {
    let cfg = validate(FluxConfig::new(vec![0.7, 0.8], vec![c(0., 0.), c(1., 0.3)])).unwrap();
    let h = holonomy_analytic(&cfg, &BraidWord::new(vec![Move::Encircle { a: 0, b: 1, power: 1 }]), 1e-10).unwrap();
    assert!((h.u[(0, 0)] + 1.0).norm() < 1e-10);
    let cfg = validate(FluxConfig::new(vec![0.9; 3], vec![c(0., 0.), c(1., 0.4), c(-0.5, 1.2)])).unwrap();
    let h = holonomy_analytic(&cfg, &BraidWord::new(vec![Move::Encircle { a: 0, b: 1, power: 1 }]), 1e-10).unwrap();
    let nb = nu(0.9).conj();
    assert!(spectrum_distance(&h.eigenvalues, &[c(1., 0.), nb * nb]) < 1e-10);
    assert!(h.drift < 1e-9);
    // Eigenvalues of u are the conjugates of those of the reduced monodromy.
    let m = word_to_monodromy(&BraidWord::new(vec![Move::Encircle { a: 0, b: 1, power: 1 }]), &cfg).unwrap();
    let conj: Vec<Complex64> = eigenvalues(&reduce(&m.m)).iter().map(|z| z.conj()).collect();
    assert!(spectrum_distance(&h.eigenvalues, &conj) < 1e-10);
    let err = holonomy_analytic(
        &validate(FluxConfig::new(vec![0.4, 0.3, 0.4], vec![c(0., 0.), c(1., 0.4), c(-0.5, 1.2)])).unwrap(),
        &BraidWord::default(),
        1e-10,
    );
    assert!(matches!(err, Err(MonodromyError::NotMaximalFreeModes { .. })));
}

#[test]
fn closed_form_phases() {
    let f = [1.7, 0.3, 0.45];
    assert!((confined_phase(&[0, 1, 0], 0, &f).unwrap() - 2.0 * PI * 0.3).abs() < 1e-15);
    assert_eq!(confined_phase(&[0, 0, 0], 0, &f).unwrap(), 0.0);
    assert!((confined_phase(&[0, 2, 0], 0, &f).unwrap() - 1.2 * PI).abs() < 1e-14);
    assert!(matches!(confined_phase(&[1, 0, 0], 1, &f), Err(MonodromyError::NotConfined(1))));
    assert!((rigid_rotation_phase(0, 1.5) - PI).abs() < 1e-15);
    let d = rigid_rotation_phase(0, 1.37) - rigid_rotation_phase(1, 1.37);
    assert!((d - 2.0 * PI).abs() < 1e-14);
}

#[derive(Debug, Clone)]
struct Case {
    fluxes: Vec<f64>,
    moves: Vec<Move>,
}

fn case() -> impl Strategy<Value = Case> {
    (2usize..=5, any::<bool>(), prop::collection::vec(0.05..0.95f64, 5)).prop_flat_map(|(n, identical, f)| {
        let fluxes: Vec<f64> = if identical { vec![f[0]; n] } else { f[..n].to_vec() };
        let mv = (0..n - 1, prop::sample::select(vec![-2, -1, 1, 2]), any::<bool>()).prop_map(move |(i, p, ex)| {
            if ex && identical {
                Move::Exchange { strand: i, power: p }
            } else {
                Move::Encircle { a: i, b: i + 1, power: p }
            }
        });
        (Just(fluxes), prop::collection::vec(mv, 0..=8)).prop_map(|(fluxes, moves)| {
            // Encircle moves are generated by position; relabel them as exchanges permute strands.
            let mut assign: Vec<usize> = (0..fluxes.len()).collect();
            let moves = moves
                .into_iter()
                .map(|m| match m {
                    Move::Encircle { a, b, power } => Move::Encircle { a: assign[a], b: assign[b], power },
                    Move::Exchange { strand, power } => {
                        if power % 2 != 0 {
                            assign.swap(strand, strand + 1);
                        }
                        m
                    }
                })
                .collect();
            Case { fluxes, moves }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn monodromy_preserves_the_hermitian_form(k in case()) {
        prop_assume!((k.fluxes.iter().sum::<f64>() - k.fluxes.iter().sum::<f64>().round()).abs() > 1e-2);
        let m = mono(k.moves.clone(), &k.fluxes);
        let g = g_matrix(&k.fluxes).unwrap().g;
        // The form is indefinite, so ‖M‖ grows along a word; rounding in M*GM
        // scales with ‖M‖²‖G‖.
        let scale = m.norm().powi(2) * g.norm();
        let defect = (m.adjoint() * &g * &m - &g).norm();
        prop_assert!(defect < 1e-12 * scale, "defect {:e} at scale {:e}", defect, scale);
        let ones = CMatrix::from_element(k.fluxes.len(), 1, c(1., 0.));
        prop_assert!((&m * &ones - &ones).norm() < 1e-14, "row sums {:e} for {:?}", (&m * &ones - &ones).norm(), k);
        let r = reduce(&m);
        let gr = reduce_form(&g);
        prop_assert!((r.adjoint() * &gr * &r - &gr).norm() < 1e-12 * r.norm().powi(2) * gr.norm());
    }

    /// The inverse word continues from the strand assignment the word leaves
    /// behind, so the group property is checked on the concatenation.
    #[test]
    fn inverse_word_gives_inverse_matrix(k in case()) {
        let word = BraidWord::new(k.moves.clone());
        let mut both = k.moves.clone();
        both.extend(word.inverse().moves);
        let n = k.fluxes.len();
        let m = mono(k.moves.clone(), &k.fluxes);
        let id = mono(both, &k.fluxes);
        prop_assert!((&id - CMatrix::identity(n, n)).norm() < 1e-14 * m.norm().max(1.0).powi(2));
    }

    #[test]
    fn reduce_is_a_homomorphism(a in case(), b in case()) {
        prop_assume!(a.fluxes == b.fluxes || a.fluxes.len() == b.fluxes.len());
        let m1 = mono(a.moves.clone(), &a.fluxes);
        let m2 = mono(b.moves.clone(), &b.fluxes);
        let scale = m1.norm() * m2.norm();
        prop_assert!((reduce(&(&m1 * &m2)) - reduce(&m1) * reduce(&m2)).norm() < 1e-13 * scale);
        let n = a.fluxes.len();
        prop_assert_eq!(reduce(&CMatrix::identity(n, n)), CMatrix::identity(n - 1, n - 1));
    }

    #[test]
    fn eigenvalue_dictionary(k in case()) {
        let m = mono(k.moves.clone(), &k.fluxes);
        let mut reduced = eigenvalues(&reduce(&m));
        reduced.push(c(1., 0.));
        // Defective Jordan blocks perturb eigenvalues like √ε, hence the looser bound.
        prop_assert!(spectrum_distance(&eigenvalues(&m), &reduced) < 1e-6);
    }
}
