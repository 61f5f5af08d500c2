use num_complex::Complex64;
use proptest::prelude::*;

use levy_nfl::arbitrage::{find_immediate_arbitrage_with, Horizon, SearchMethod, Verdict};
use levy_nfl::constraints::{null_space, ConstraintSet};
use levy_nfl::esscher::{transform_triplet, EsscherParams, GTag};
use levy_nfl::exec::ExecConfig;
use levy_nfl::levy::{char_exponent, Atom, JumpMeasure, LevyTriplet};
use levy_nfl::numeraire::{rel_rate, solve_numeraire};
use levy_nfl::spec_file::MarketSpecFile;

fn atom_market(b: f64, c: f64, atoms: &[(f64, f64)]) -> LevyTriplet {
    LevyTriplet::new(
        vec![b],
        vec![vec![c]],
        JumpMeasure::from_atoms(atoms.iter().map(|&(x, r)| Atom::new(vec![x], r)).collect()),
    )
    .unwrap()
}

fn jump() -> impl Strategy<Value = (f64, f64)> {
    (prop_oneof![-0.9..-0.05f64, 0.05..3.0f64], 0.1..3.0f64)
}

fn verdict(t: &LevyTriplet, method: SearchMethod) -> Option<Vec<f64>> {
    let cert =
        find_immediate_arbitrage_with(t, &ConstraintSet::Full, &null_space(t), method, ExecConfig::sequential()).unwrap();
    match cert.verdict {
        Verdict::Found { xi } => Some(xi),
        Verdict::Empty { .. } => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_and_grid_agree(b in -2.0..2.0f64, atoms in prop::collection::vec(jump(), 1..4)) {
        let t = atom_market(b, 0.0, &atoms);
        let lp = verdict(&t, SearchMethod::ExactLp);
        let grid = verdict(&t, SearchMethod::SphereGrid { resolution: 32 });
        prop_assert_eq!(lp.is_some(), grid.is_some());
        if let (Some(a), Some(g)) = (lp, grid) {
            prop_assert!((a[0] - g[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn time_scaling_keeps_the_verdict(
        b in -2.0..2.0f64,
        atoms in prop::collection::vec(jump(), 1..4),
        k in 0.01..100.0f64,
    ) {
        let t = atom_market(b, 0.0, &atoms);
        let scaled: Vec<(f64, f64)> = atoms.iter().map(|&(x, r)| (x, k * r)).collect();
        let s = atom_market(k * b, 0.0, &scaled);
        prop_assert_eq!(verdict(&t, SearchMethod::Auto), verdict(&s, SearchMethod::Auto));
    }

    #[test]
    fn esscher_tilt_keeps_the_verdict(
        b in -2.0..2.0f64,
        atoms in prop::collection::vec(jump(), 1..4),
        eta in -1.0..1.0f64,
    ) {
        let t = atom_market(b, 0.0, &atoms);
        let p = EsscherParams::new(&t, vec![eta], GTag::QuadraticTail).unwrap();
        let tt = transform_triplet(&t, &p).unwrap();
        prop_assert_eq!(verdict(&t, SearchMethod::Auto).is_some(), verdict(&tt.triplet, SearchMethod::Auto).is_some());
    }

    #[test]
    fn characteristic_exponent_is_hermitian(
        b in -1.0..1.0f64,
        c in 0.0..0.5f64,
        atoms in prop::collection::vec(jump(), 0..4),
        u in -20.0..20.0f64,
    ) {
        let t = atom_market(b, c, &atoms);
        let a: Complex64 = char_exponent(&t, &[u]).unwrap();
        let m: Complex64 = char_exponent(&t, &[-u]).unwrap();
        prop_assert!((a - m.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
        prop_assert!(a.re <= 1e-12);
    }

    #[test]
    fn numeraire_dominates_random_portfolios(
        b in -0.3..0.3f64,
        c in 0.01..0.2f64,
        atoms in prop::collection::vec(jump(), 0..3),
        pi in -0.5..0.5f64,
    ) {
        let t = atom_market(b, c, &atoms);
        let r = solve_numeraire(&t, &ConstraintSet::Full).unwrap();
        // Keep 1 + πx > 0 on the atoms.
        let admissible = atoms.iter().all(|&(x, _)| 1.0 + pi * x > 0.0);
        prop_assume!(admissible);
        prop_assert!(rel_rate(&t, &[pi], &r.rho).unwrap().to_f64() <= 1e-8);
        prop_assert!(rel_rate(&t, &r.rho, &r.rho).unwrap().to_f64().abs() <= 1e-12);
    }

    #[test]
    fn spec_files_round_trip(
        b in prop::collection::vec(-1.0..1.0f64, 2),
        diag in prop::collection::vec(0.01..0.5f64, 2),
        corr in -0.9..0.9f64,
        horizon in prop_oneof![Just(None), (0.1..10.0f64).prop_map(Some)],
    ) {
        let off = corr * (diag[0] * diag[1]).sqrt();
        let t = LevyTriplet::gaussian(b, vec![vec![diag[0], off], vec![off, diag[1]]]).unwrap();
        let h = horizon.map_or(Horizon::Infinite, Horizon::Finite);
        let spec = MarketSpecFile::new(t, ConstraintSet::Orthant, h);
        let back = MarketSpecFile::from_json(&spec.to_json()).unwrap();
        prop_assert_eq!(back, spec);
    }
}
