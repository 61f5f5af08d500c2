//! Exit criteria, one line each. Runs as a plain binary so every line is
//! printed even when an earlier criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use levy_nfl::arbitrage::{
    find_immediate_arbitrage, find_immediate_arbitrage_with, nfl_report, ArbitrageCertificate, Condition, Horizon,
    SearchMethod, Status, Verdict,
};
use levy_nfl::constraints::{null_space, ConstraintSet};
use levy_nfl::esscher::{
    check_completeness, find_esmm, is_supermartingale_measure, transform_triplet, Completeness, EsmmOutcome,
    EsscherParams, GTag, IncompletenessReason, MeasureGrade,
};
use levy_nfl::exec::ExecConfig;
use levy_nfl::levy::{
    approximate, char_exponent, Atom, DensitySegment, Family, JumpMeasure, LevyTriplet, SupportRegion,
};
use levy_nfl::numeraire::{growth_rate, growth_rate_derivative, rel_rate, solve_numeraire};
use levy_nfl::simulate::{
    esscher_martingale_test, infinite_horizon_free_lunch_demo, random_portfolios, relative_wealth_tests, SimSettings,
};
use levy_nfl::spec_file::MarketSpecFile;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn fixture(name: &str) -> MarketSpecFile {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    MarketSpecFile::load(&p).unwrap_or_else(|e| panic!("{name}: {e}"))
}

const FIXTURES: [&str; 9] = [
    "bsm.json",
    "bsm1d.json",
    "bsm2d.json",
    "infinite_horizon.json",
    "loginfinite.json",
    "monotone_poisson.json",
    "poly_1d.json",
    "parabola.json",
    "heavy_tail_esmm.json",
];

fn poly_market() -> LevyTriplet {
    fixture("poly_1d.json").market
}

fn atoms_1d(b: f64, c: f64, atoms: &[(f64, f64)]) -> LevyTriplet {
    LevyTriplet::new(
        vec![b],
        vec![vec![c]],
        JumpMeasure::from_atoms(atoms.iter().map(|&(x, r)| Atom::new(vec![x], r)).collect()),
    )
    .unwrap()
}

fn witness(cert: &ArbitrageCertificate) -> Option<Vec<f64>> {
    match &cert.verdict {
        Verdict::Found { xi } => Some(xi.clone()),
        Verdict::Empty { .. } => None,
    }
}

fn c1_growth_anchor() -> Check {
    let t = poly_market();
    let g1 = growth_rate_derivative(&t, &[1.0], &[1.0]).map_err(e2s)?.to_f64();
    let rel = rel_rate(&t, &[0.0], &[1.0]).map_err(e2s)?.to_f64();
    ensure((g1 - 1.0 / 3.0).abs() <= 1e-8, format!("g'(1) = {g1}"))?;
    ensure((rel + 1.0 / 3.0).abs() <= 1e-8, format!("rel(0|1) = {rel}"))?;
    Ok(format!("g'(1) = {g1:.12}, rel(0|1) = {rel:.12}"))
}

fn c2_numeraire_anchor() -> Check {
    let r = solve_numeraire(&poly_market(), &ConstraintSet::Full).map_err(e2s)?;
    ensure((r.rho[0] - 1.0).abs() <= 1e-6, format!("rho = {}", r.rho[0]))?;
    ensure(r.kkt_residual <= 1e-6, format!("kkt = {:e}", r.kkt_residual))?;
    Ok(format!("rho = {:.9}, kkt = {:.1e}", r.rho[0], r.kkt_residual))
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

fn c3_bsm_closed_form() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst_rho = 0.0f64;
    let mut worst_rel = 0.0f64;
    for d in 1..=3 {
        for _ in 0..3 {
            let m: Vec<Vec<f64>> = (0..d).map(|_| (0..d).map(|_| rng.random_range(-0.4..0.4)).collect()).collect();
            let c: Vec<Vec<f64>> = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| (0..d).map(|k| m[i][k] * m[j][k]).sum::<f64>() + if i == j { 0.02 } else { 0.0 })
                        .collect()
                })
                .collect();
            let b: Vec<f64> = (0..d).map(|_| rng.random_range(-0.2..0.2)).collect();
            let want = solve_dense(c.clone(), b.clone());
            let t = LevyTriplet::gaussian(b, c).map_err(e2s)?;
            let r = solve_numeraire(&t, &ConstraintSet::Full).map_err(e2s)?;
            for (x, y) in r.rho.iter().zip(&want) {
                worst_rho = worst_rho.max((x - y).abs());
            }
            for _ in 0..100 {
                let pi: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
                worst_rel = worst_rel.max(rel_rate(&t, &pi, &r.rho).map_err(e2s)?.to_f64().abs());
            }
        }
    }
    ensure(worst_rho <= 1e-7, format!("|rho - c^-1 b| = {worst_rho:e}"))?;
    ensure(worst_rel <= 1e-9, format!("|rel| = {worst_rel:e}"))?;
    Ok(format!("max |rho - c^-1 b| = {worst_rho:.1e}, max |rel| = {worst_rel:.1e}"))
}

fn c4_iao_matrix() -> Check {
    let regimes: [(&str, LevyTriplet, Option<f64>); 4] = [
        ("c>0", atoms_1d(0.3, 0.04, &[(0.5, 1.0), (-0.2, 2.0)]), None),
        ("up", atoms_1d(1.0, 0.0, &[(0.5, 1.0), (2.0, 0.5)]), Some(1.0)),
        ("down", atoms_1d(-1.0, 0.0, &[(-0.5, 1.0), (-0.3, 0.5)]), Some(-1.0)),
        ("two-sided", atoms_1d(0.0, 0.0, &[(0.5, 1.0), (-0.5, 1.0)]), None),
    ];
    let mut notes = Vec::new();
    for (name, t, want) in regimes {
        let start = Instant::now();
        let null = null_space(&t);
        let lp = find_immediate_arbitrage_with(&t, &ConstraintSet::Full, &null, SearchMethod::ExactLp, ExecConfig::default())
            .map_err(e2s)?;
        let grid = find_immediate_arbitrage_with(
            &t,
            &ConstraintSet::Full,
            &null,
            SearchMethod::SphereGrid { resolution: 64 },
            ExecConfig::default(),
        )
        .map_err(e2s)?;
        let (a, b) = (witness(&lp), witness(&grid));
        ensure(a == want.map(|x| vec![x]), format!("{name}: LP gave {a:?}"))?;
        ensure(
            match (&a, &b) {
                (None, None) => true,
                (Some(x), Some(y)) => (x[0] - y[0]).abs() < 1e-9,
                _ => false,
            },
            format!("{name}: LP {a:?} vs grid {b:?}"),
        )?;
        ensure(start.elapsed() < Duration::from_secs(1), format!("{name} took {:?}", start.elapsed()))?;
        notes.push(format!("{name}: {a:?}"));
    }
    Ok(notes.join(", "))
}

const RHO_STAR: f64 = 0.915_822_291_494_887;

fn c5_approximation() -> Check {
    let r = solve_numeraire(&fixture("loginfinite.json").market, &ConstraintSet::Full).map_err(e2s)?;
    let at = |n: u32| r.approx_trace.iter().find(|s| s.n == n).map(|s| s.rho[0]);
    let (r4, r8) = (at(4).ok_or("no n = 4 step")?, at(8).ok_or("no n = 8 step")?);
    let gap = (r8 - r4).abs();
    let err = (r.rho[0] - RHO_STAR).abs();
    let detail = format!("|rho_8 - rho_4| = {gap:.3e} (need < 1e-5), |rho - rho*| = {err:.1e} (need <= 1e-4)");
    ensure(err <= 1e-4, detail.clone())?;
    ensure(gap < 1e-5, detail.clone())?;
    Ok(detail)
}

fn c6_esscher() -> Check {
    let nu = JumpMeasure::from_atoms(vec![Atom::new(vec![1.5], 0.5), Atom::new(vec![-0.4], 1.0)]).with_density(
        DensitySegment::new(
            Family::PowerLawTail { scale: 0.5, exponent: 3.5 },
            SupportRegion::interval(1.0, f64::INFINITY),
        ),
    );
    let t = LevyTriplet::new(vec![0.1], vec![vec![0.04]], nu).map_err(e2s)?;
    let p = EsscherParams::new(&t, vec![0.7], GTag::QuadraticTail).map_err(e2s)?;
    let s = SimSettings {
        n_paths: 100_000,
        seed: 6,
        ..SimSettings::default()
    };
    let r = esscher_martingale_test(&t, &p, &s).map_err(e2s)?;
    ensure(
        (r.estimate - 1.0).abs() <= 3.0 * r.std_error,
        format!("E Z_T = {} ± {}", r.estimate, r.std_error),
    )?;

    // (0, g) then (η, 0) against (η, g) in one step.
    let eta = vec![0.7];
    let light = transform_triplet(&t, &EsscherParams::new(&t, vec![0.0], GTag::QuadraticTail).map_err(e2s)?).map_err(e2s)?;
    let two = transform_triplet(
        &light.triplet,
        &EsscherParams::new(&light.triplet, eta.clone(), GTag::Zero).map_err(e2s)?,
    )
    .map_err(e2s)?;
    let one = transform_triplet(&t, &p).map_err(e2s)?;
    let mut worst = (two.triplet.b[0] - one.triplet.b[0]).abs();
    ensure(two.triplet.c == one.triplet.c, "c changed")?;
    for (a, b) in two.triplet.nu.atoms.iter().zip(&one.triplet.nu.atoms) {
        worst = worst.max((a.rate - b.rate).abs()).max((a.x[0] - b.x[0]).abs());
    }
    for (a, b) in two.triplet.nu.densities.iter().zip(&one.triplet.nu.densities) {
        for x in [1.0, 1.3, 2.0, 5.0, 40.0] {
            let (da, db) = (a.family.density_at(x, &[x]), b.family.density_at(x, &[x]));
            worst = worst.max((da - db).abs() / db.abs().max(1e-300));
        }
    }
    ensure(worst <= 1e-10, format!("two-step mismatch {worst:e}"))?;

    let heavy = fixture("heavy_tail_esmm.json").market;
    match find_esmm(&heavy, &ConstraintSet::Full, Some(1.0)).map_err(e2s)? {
        EsmmOutcome::Found {
            params,
            grade,
            transformed_mean,
            ..
        } => {
            ensure(params.eta == vec![0.0], format!("eta = {:?}", params.eta))?;
            ensure(grade == MeasureGrade::StrictEsmm, format!("{grade:?}"))?;
            let m = transformed_mean.finite().ok_or("divergent transformed mean")?[0];
            ensure(m < 0.0, format!("transformed mean {m}"))?;
            Ok(format!(
                "E Z_T = {:.4} ± {:.4}, two-step gap {worst:.1e}, heavy tail: eta = 0, mean' = {m:.4}",
                r.estimate, r.std_error
            ))
        }
        other => Err(format!("heavy-tail market: {other:?}")),
    }
}

fn c7_deflator() -> Check {
    let mut notes = Vec::new();
    for name in FIXTURES {
        let spec = fixture(name);
        let t = &spec.market;
        let rho = match solve_numeraire(t, &spec.constraints) {
            Ok(r) => r.rho,
            Err(levy_nfl::Error::IaoPresent { .. }) => continue,
            Err(e) => return Err(format!("{name}: {e}")),
        };
        let mut pis = random_portfolios(t, &spec.constraints, &rho, 20, 70).map_err(e2s)?;
        if name == "poly_1d.json" {
            pis.insert(0, vec![0.0]);
        }
        let s = SimSettings {
            n_paths: 100_000,
            seed: 7,
            ..SimSettings::default()
        };
        let reports = relative_wealth_tests(t, &pis, &rho, &s).map_err(|e| format!("{name}: {e}"))?;
        if let Some((pi, r)) = pis.iter().zip(&reports).find(|(_, r)| !r.consistent()) {
            return Err(format!("{name}: pi = {pi:?} gives {} ± {}", r.estimate, r.std_error));
        }
        if name == "poly_1d.json" {
            let r = &reports[0];
            let want = (-1.0f64 / 3.0).exp();
            ensure(
                (r.estimate - want).abs() <= 3.0 * r.std_error,
                format!("poly_1d pi = 0: {} ± {} vs {want}", r.estimate, r.std_error),
            )?;
            notes.push(format!("pi=0 on poly_1d: {:.4} ± {:.4}", r.estimate, r.std_error));
        }
        notes.push(name.trim_end_matches(".json").to_string());
    }
    Ok(notes.join(", "))
}

fn c8_parabola() -> Check {
    let spec = fixture("parabola.json");
    let t = &spec.market;
    let r = nfl_report(t, &spec.constraints, Horizon::Finite(1.0)).map_err(e2s)?;
    ensure(r.status(Condition::Nupbr) == Status::Holds, "NUPBR does not hold")?;
    ensure(r.status(Condition::EsmmExists) == Status::Fails, "ESMM not reported failing")?;
    let null = null_space(t);
    let check = ConstraintSet::Cone { rays: vec![vec![0.0, 1.0]] };
    let e = find_immediate_arbitrage(t, &check, &null).map_err(e2s)?;
    ensure(e.is_empty(), format!("found over the recession cone: {:?}", e.verdict))?;
    let half = ConstraintSet::Cone {
        rays: vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
    };
    let f = find_immediate_arbitrage(t, &half, &null).map_err(e2s)?;
    let xi = witness(&f).ok_or("nothing found over R+ x R")?;
    Ok(format!("NUPBR holds, ESMM fails, witness over R+ x R = {xi:?}"))
}

fn c9_infinite_horizon() -> Check {
    let heavy = LevyTriplet::new(
        vec![-10.0],
        vec![vec![0.0]],
        JumpMeasure::zero().with_density(DensitySegment::new(
            Family::PowerLawTail { scale: 1.0, exponent: 2.0 },
            SupportRegion::interval(1.0, f64::INFINITY),
        )),
    )
    .map_err(e2s)?;
    // (market, constraints, drift condition holds?)
    let cases: Vec<(&str, LevyTriplet, ConstraintSet, bool)> = vec![
        ("b=1 long-only", LevyTriplet::gaussian(vec![1.0], vec![vec![0.0]]).map_err(e2s)?, ConstraintSet::Orthant, false),
        ("b=-1 long-only", LevyTriplet::gaussian(vec![-1.0], vec![vec![0.04]]).map_err(e2s)?, ConstraintSet::Orthant, true),
        ("bsm unconstrained", fixture("bsm1d.json").market, ConstraintSet::Full, false),
        ("driftless", LevyTriplet::gaussian(vec![0.0], vec![vec![0.04]]).map_err(e2s)?, ConstraintSet::Full, true),
        ("negative mean heavy tail", fixture("heavy_tail_esmm.json").market, ConstraintSet::Full, true),
        ("poly market", poly_market(), ConstraintSet::Full, false),
        ("infinite mean", heavy, ConstraintSet::Orthant, false),
    ];
    for (name, t, c, want) in &cases {
        let got = is_supermartingale_measure(t, c).map_err(e2s)?.holds;
        ensure(got == *want, format!("{name}: drift condition {got}, expected {want}"))?;
    }
    let mut notes = vec![format!("{} drift signs match", cases.len())];
    for (name, paths) in [("infinite_horizon.json", 10_000), ("bsm1d.json", 2_000)] {
        let spec = fixture(name);
        let s = SimSettings {
            n_paths: paths,
            seed: 9,
            ..SimSettings::default()
        };
        let r = infinite_horizon_free_lunch_demo(&spec.market, &spec.constraints, 2.0, &s).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.estimate >= 0.99, format!("{name}: hit fraction {}", r.estimate))?;
        let h = r.notes.iter().find(|(k, _)| k == "horizon").map_or(f64::NAN, |(_, v)| *v);
        notes.push(format!("{}: hit {:.3} by T = {h}", name.trim_end_matches(".json"), r.estimate));
    }
    Ok(notes.join(", "))
}

fn c10_completeness() -> Check {
    let bsm = LevyTriplet::gaussian(vec![0.05], vec![vec![0.04]]).map_err(e2s)?;
    let one = atoms_1d(0.0, 0.0, &[(-0.5, 1.0)]);
    let two = atoms_1d(0.0, 0.0, &[(-0.5, 1.0), (0.5, 1.0)]);
    let other = atoms_1d(0.1, 0.0, &[(0.5, 1.0), (-0.3, 2.0)]);
    ensure(check_completeness(&bsm, &ConstraintSet::Full).map_err(e2s)?.is_complete(), "BSM incomplete")?;
    ensure(check_completeness(&one, &ConstraintSet::Full).map_err(e2s)?.is_complete(), "one atom incomplete")?;
    for t in [two, other] {
        let v = check_completeness(&t, &ConstraintSet::Full).map_err(e2s)?;
        ensure(
            matches!(
                v,
                Completeness::Incomplete {
                    reason: IncompletenessReason::TooManyJumpPoints,
                    ..
                }
            ),
            format!("two atoms: {v:?}"),
        )?;
    }
    Ok("bsm complete, one atom complete, two atoms tooManyJumpPoints".into())
}

fn arbitrage_verdict(t: &LevyTriplet, c: &ConstraintSet) -> Result<bool, String> {
    let cone = c.recession_cone(t.dim).map_err(e2s)?;
    Ok(find_immediate_arbitrage(t, &cone, &null_space(t)).map_err(e2s)?.is_empty())
}

fn c11_invariance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut count = 0;
    for name in FIXTURES {
        let spec = fixture(name);
        let t = &spec.market;
        let base = arbitrage_verdict(t, &spec.constraints)?;
        for _ in 0..3 {
            let eta: Vec<f64> = (0..t.dim).map(|_| rng.random_range(-0.5..0.5)).collect();
            let p = EsscherParams::new(t, eta, GTag::QuadraticTail).map_err(e2s)?;
            let tt = transform_triplet(t, &p).map_err(e2s)?;
            ensure(
                arbitrage_verdict(&tt.triplet, &spec.constraints)? == base,
                format!("{name}: verdict changed under tilt {:?}", p.eta),
            )?;
        }
        for n in [1, 4] {
            let mut a = t.clone();
            a.nu = approximate(&t.nu, n);
            ensure(
                arbitrage_verdict(&a, &spec.constraints)? == base,
                format!("{name}: verdict changed under approximation n = {n}"),
            )?;
        }
        for _ in 0..3 {
            let u: Vec<f64> = (0..t.dim).map(|_| rng.random_range(-3.0..3.0)).collect();
            let neg: Vec<f64> = u.iter().map(|v| -v).collect();
            let (a, b): (Complex64, Complex64) = (
                char_exponent(t, &u).map_err(|e| format!("{name}: {e}"))?,
                char_exponent(t, &neg).map_err(|e| format!("{name}: {e}"))?,
            );
            ensure(
                (a - b.conj()).norm() <= 1e-9 * (1.0 + a.norm()),
                format!("{name}: phi(-u) != conj phi(u) at {u:?}"),
            )?;
        }
        count += 1;
    }

    // ζ = (0, 1) is a null direction: no variance, no jumps, no drift along it.
    let nu = JumpMeasure::from_atoms(vec![Atom::new(vec![0.5, 0.0], 1.0), Atom::new(vec![-0.3, 0.0], 2.0)]);
    let t = LevyTriplet::new(vec![0.1, 0.0], vec![vec![0.04, 0.0], vec![0.0, 0.0]], nu).map_err(e2s)?;
    ensure(null_space(&t).basis.len() == 1, "expected a one-dimensional null space")?;
    for _ in 0..20 {
        let pi = vec![rng.random_range(-1.0..1.0), rng.random_range(-3.0..3.0)];
        let rho = vec![rng.random_range(-1.0..1.0), rng.random_range(-3.0..3.0)];
        let z = rng.random_range(-10.0..10.0);
        let shift = |p: &[f64]| vec![p[0], p[1] + z];
        let g0 = growth_rate(&t, &pi).map_err(e2s)?.to_f64();
        let g1 = growth_rate(&t, &shift(&pi)).map_err(e2s)?.to_f64();
        let r0 = rel_rate(&t, &pi, &rho).map_err(e2s)?.to_f64();
        let r1 = rel_rate(&t, &shift(&pi), &rho).map_err(e2s)?.to_f64();
        ensure((g0 - g1).abs() <= 1e-12 && (r0 - r1).abs() <= 1e-12, "null shift changed g or rel")?;
    }

    let mut worst = 0.0f64;
    for (t, points) in [
        (poly_market(), vec![vec![0.3], vec![0.8], vec![-0.4]]),
        (fixture("bsm2d.json").market, vec![vec![0.5, -0.2], vec![2.0, 1.0]]),
        (fixture("parabola.json").market, vec![vec![0.2, 0.3], vec![0.5, 0.4]]),
    ] {
        let d = t.dim;
        for pi in points {
            for i in 0..d {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                let h = 1e-4;
                let mut up = pi.clone();
                let mut dn = pi.clone();
                up[i] += h;
                dn[i] -= h;
                let fd = (growth_rate(&t, &up).map_err(e2s)?.to_f64() - growth_rate(&t, &dn).map_err(e2s)?.to_f64())
                    / (2.0 * h);
                let an = growth_rate_derivative(&t, &pi, &e).map_err(e2s)?.to_f64();
                worst = worst.max((fd - an).abs());
            }
        }
    }
    ensure(worst <= 1e-6, format!("gradient vs finite difference {worst:e}"))?;
    Ok(format!("{count} fixtures invariant, null shifts exact, gradient gap {worst:.1e}"))
}

struct Criterion {
    id: u8,
    title: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, title: "growth-rate anchors", budget: Duration::from_secs(1), run: c1_growth_anchor },
        Criterion { id: 2, title: "numeraire anchor", budget: Duration::from_secs(5), run: c2_numeraire_anchor },
        Criterion { id: 3, title: "Gaussian closed form", budget: Duration::from_secs(10), run: c3_bsm_closed_form },
        Criterion { id: 4, title: "arbitrage detection matrix", budget: Duration::from_secs(4), run: c4_iao_matrix },
        Criterion { id: 5, title: "approximating scheme", budget: Duration::from_secs(60), run: c5_approximation },
        Criterion { id: 6, title: "Esscher contracts", budget: Duration::from_secs(60), run: c6_esscher },
        Criterion { id: 7, title: "supermartingale deflator", budget: Duration::from_secs(180), run: c7_deflator },
        Criterion { id: 8, title: "parabola constraints", budget: Duration::from_secs(5), run: c8_parabola },
        Criterion { id: 9, title: "infinite-horizon dichotomy", budget: Duration::from_secs(120), run: c9_infinite_horizon },
        Criterion { id: 10, title: "completeness", budget: Duration::from_secs(1), run: c10_completeness },
        Criterion { id: 11, title: "invariance suite", budget: Duration::from_secs(30), run: c11_invariance },
    ];
    let only: Option<u8> = std::env::args().nth(1).and_then(|a| a.parse().ok());
    let mut failed = Vec::new();
    for c in criteria.iter().filter(|c| only.is_none_or(|k| k == c.id)) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > c.budget => Err(format!("{msg}; took {took:.1?}, budget {:?}", c.budget)),
            other => other,
        };
        let (tag, msg) = match &outcome {
            Ok(m) => ("PASS", m),
            Err(m) => ("FAIL", m),
        };
        println!("criterion {:>2} {tag} [{:>7.2}s] {}: {msg}", c.id, took.as_secs_f64(), c.title);
        if outcome.is_err() {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
