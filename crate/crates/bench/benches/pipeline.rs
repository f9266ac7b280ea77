use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use dismantle_bench::Fixture;
use dismantle_core::dspace::{build_graph, disassembly_space, sample_sphere};
use dismantle_core::exec::{execute_once, ExecConfig};
use dismantle_core::planner::plan_task;
use dismantle_core::skill::decompose_plan;

fn disassembly_space_scaling(c: &mut Criterion) {
    let valve = Fixture::load("valve.json", 10_000);
    let mut group = c.benchmark_group("disassembly_space");
    for exp in [12u32, 14, 16, 18] {
        let n = 1usize << exp;
        let dirs = sample_sphere(n, 0);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &dirs, |b, dirs| {
            b.iter(|| disassembly_space(&valve.model, black_box("hose"), dirs).unwrap())
        });
    }
    group.finish();
}

fn planning(c: &mut Criterion) {
    let valve = Fixture::load("valve.json", 10_000);
    c.bench_function("sample_sphere/10000", |b| b.iter(|| sample_sphere(black_box(10_000), 0)));
    c.bench_function("build_graph/valve", |b| b.iter(|| build_graph(&valve.model, &valve.dirs).unwrap()));
    c.bench_function("plan_task/valve", |b| b.iter(|| plan_task(&valve.model, &valve.dirs).unwrap()));
    let state = valve.nominal_state();
    c.bench_function("decompose_plan/valve", |b| {
        b.iter(|| decompose_plan(&valve.plan, &state, &valve.model).unwrap())
    });
}

fn execution(c: &mut Criterion) {
    let valve = Fixture::load("valve.json", 10_000);
    let config = ExecConfig::default();
    let mut group = c.benchmark_group("execute_once");
    group.sample_size(10);
    group.bench_function("valve", |b| {
        b.iter(|| execute_once(&valve.plan, &valve.model, &valve.dirs, &config, 1, &[]))
    });
    group.finish();
}

criterion_group!(benches, disassembly_space_scaling, planning, execution);
criterion_main!(benches);
