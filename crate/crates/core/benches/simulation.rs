use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use levy_nfl::exec::ExecConfig;
use levy_nfl::levy::{Atom, DensitySegment, Family, JumpMeasure, LevyTriplet, SupportRegion};
use levy_nfl::simulate::{relative_wealth_tests, sample_paths, SimSettings};

fn market() -> LevyTriplet {
    let nu = JumpMeasure::from_atoms(vec![Atom::new(vec![0.4], 0.5)]).with_density(DensitySegment::new(
        Family::PolynomialOnInterval { coeffs: vec![1.0, 1.0] },
        SupportRegion::interval(-1.0, 1.0),
    ));
    LevyTriplet::new(vec![1.0], vec![vec![0.04]], nu).unwrap()
}

fn bench(c: &mut Criterion) {
    let t = market();
    let modes = [
        ("sequential", ExecConfig::sequential()),
        ("parallel", ExecConfig::parallel(None)),
    ];
    let mut g = c.benchmark_group("sample_paths");
    g.sample_size(10);
    for (name, exec) in modes {
        g.bench_with_input(BenchmarkId::new(name, 20_000), &exec, |b, &exec| {
            b.iter(|| sample_paths(&t, 1.0, 16, 20_000, 1, 1e-3, exec).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("relative_wealth");
    g.sample_size(10);
    let pis = vec![vec![0.0], vec![0.5], vec![0.9]];
    for (name, exec) in modes {
        let s = SimSettings {
            n_paths: 20_000,
            exec,
            ..SimSettings::default()
        };
        g.bench_with_input(BenchmarkId::new(name, 20_000), &s, |b, s| {
            b.iter(|| relative_wealth_tests(&t, &pis, &[1.0], s).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
