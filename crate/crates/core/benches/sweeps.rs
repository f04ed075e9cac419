use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mnw_core::exec::sweep_profiles;
use mnw_core::fairness::is_mnw;
use mnw_core::oracle::{fuzz_strategyproofness, FuzzConfig, FuzzMode, Rule};
use mnw_core::{mnw_tie, Execution};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn sweep_mnw_tie(c: &mut Criterion) {
    let mut group = c.benchmark_group("mnw_tie_sweep_3x4");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                sweep_profiles(exec, 3, 4, |inst| {
                    let a = mnw_tie(&inst);
                    is_mnw(&inst, &a).unwrap().holds()
                })
            })
        });
    }
    group.finish();
}

fn fuzz(c: &mut Criterion) {
    let mut group = c.benchmark_group("gsp_fuzz");
    group.sample_size(10);
    for (rule, label) in [(Rule::MnwTie, "mnw_tie_2x3"), (Rule::FracMnw, "frac_mnw_2x3")] {
        for (name, exec) in MODES {
            let mut cfg = FuzzConfig::new(rule, 2, 3, FuzzMode::Exhaustive, 2);
            cfg.execution = exec;
            group.bench_function(BenchmarkId::new(label, name), |b| {
                b.iter(|| fuzz_strategyproofness(&cfg).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sweep_mnw_tie, fuzz);
criterion_main!(benches);
