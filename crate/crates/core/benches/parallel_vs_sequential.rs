use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use crestwave::bracket::{
    compose_map_apply, invert_map, triple_bracket_periodic, BracketKernelConfig, MonotoneMap,
};
use crestwave::energies::energy_delta;
use crestwave::initial_data::{crest_data, mollify_data, CrestSpec};
use crestwave::pair::{co_step, init_pair};
use crestwave::waterwave::StepperConfig;
use crestwave::{make_grid, Exec, Field};

const POLICIES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn interpolation(c: &mut Criterion) {
    let mut group = c.benchmark_group("compose_and_invert");
    for n in [256usize, 1024] {
        let g = make_grid(n, 2.0 * PI).unwrap();
        let f = Field::from_fn(&g, |x| Complex64::new(x.sin().exp(), (3.0 * x).cos()));
        let map = MonotoneMap::from_fn(&g, |x| x + 0.2 * x.sin()).unwrap();
        for (name, exec) in POLICIES {
            group.bench_with_input(
                BenchmarkId::new(format!("compose/{name}"), n),
                &n,
                |b, _| b.iter(|| compose_map_apply(black_box(&f), &map, exec).unwrap()),
            );
            group.bench_with_input(BenchmarkId::new(format!("invert/{name}"), n), &n, |b, _| {
                b.iter(|| invert_map(black_box(&map), exec).unwrap())
            });
        }
    }
    group.finish();
}

fn triple_bracket(c: &mut Criterion) {
    let mut group = c.benchmark_group("triple_bracket");
    let cfg = BracketKernelConfig::default();
    for n in [256usize, 512] {
        let g = make_grid(n, 2.0 * PI).unwrap();
        let f1 = Field::from_fn(&g, |x| Complex64::new(x.sin(), 0.0));
        let f2 = Field::from_fn(&g, |x| Complex64::new(x.cos(), (2.0 * x).sin()));
        let f3 = Field::from_fn(&g, |x| Complex64::new(1.0 / (2.0 + x.cos()), 0.0));
        for (name, exec) in POLICIES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| triple_bracket_periodic(black_box(&f1), &f2, &f3, &cfg, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn pair_step_and_energy(c: &mut Criterion) {
    let mut group = c.benchmark_group("pair");
    group.sample_size(10);
    let g = make_grid(512, 2.0 * PI).unwrap();
    let data = mollify_data(&crest_data(&CrestSpec::default(), &g, 0.0).unwrap(), 0.1).unwrap();
    let mut a = data.clone();
    a.sigma = 1e-3;
    let pair = init_pair(a, data).unwrap();
    let cfg = StepperConfig::default();
    let dt = 1e-3;
    let (stepped, _) = co_step(&pair, dt, &cfg, Exec::Sequential).unwrap();
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::new("co_step", name), |b| {
            b.iter(|| co_step(black_box(&pair), dt, &cfg, exec).unwrap())
        });
        group.bench_function(BenchmarkId::new("energy_delta", name), |b| {
            b.iter(|| energy_delta(black_box(&stepped), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, interpolation, triple_bracket, pair_step_and_energy);
criterion_main!(benches);
