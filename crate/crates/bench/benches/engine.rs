use criterion::{criterion_group, criterion_main, Criterion};
use osc_bench::{procurement_problem, shocked};
use osc_core::economics::{best_response, optimal_procurement};
use osc_core::netdyn::{build_transition_matrix, stationary_distribution, ErgodicityConfig, LologParams, TinyNetSpec};
use osc_core::{run_simulation, Preset, RngStream};

fn simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_simulation");
    for p in Preset::ALL {
        let cfg = shocked(p);
        g.bench_function(p.name(), |b| b.iter(|| run_simulation(&cfg).unwrap()));
    }
    g.finish();
}

fn procurement(c: &mut Criterion) {
    let problem = procurement_problem(14);
    c.bench_function("optimal_procurement", |b| b.iter(|| optimal_procurement(&problem).unwrap()));
    c.bench_function("best_response", |b| b.iter(|| best_response(&problem)));
}

fn ergodicity(c: &mut Criterion) {
    let params = LologParams::new(2.0, 0.3, 0.15);
    let spec = TinyNetSpec::random_sd(3, 3, &params, 0.5, &mut RngStream::new(1)).unwrap();
    let cfg = ErgodicityConfig { eta: 0.05, max_states: 4096 };
    c.bench_function("stationary_512_states", |b| {
        b.iter(|| stationary_distribution(&build_transition_matrix(&spec, &cfg).unwrap()).unwrap())
    });
}

criterion_group!(benches, simulation, procurement, ergodicity);
criterion_main!(benches);
