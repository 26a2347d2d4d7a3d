use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};

use pxmap_core::brdf::eval_disney;
use pxmap_core::datagen::{sample_record, EffectsConfig, Light};
use pxmap_core::geom::sample_hemisphere_uniform;
use pxmap_core::pstereo::{render_sphere, woodham_solve};
use pxmap_core::{
    build_map, DisneyParams, GenConfig, LightSample, MaterialSpec, MerlLibrary, Preset, RandomStream, Rgb,
};

fn disney(c: &mut Criterion) {
    let mut rng = RandomStream::new(1, 0, 0);
    let tuples: Vec<_> = (0..1024)
        .map(|_| {
            let n = sample_hemisphere_uniform(&mut rng, 1.4);
            let l = sample_hemisphere_uniform(&mut rng, 1.4);
            let v = sample_hemisphere_uniform(&mut rng, 1.4);
            (n, l, v)
        })
        .collect();
    let p = DisneyParams {
        metallic: 0.3,
        roughness: 0.4,
        sheen: 0.5,
        clearcoat: 0.2,
        ..Default::default()
    };
    let albedo = Rgb::new(0.7, 0.5, 0.3);
    let mut g = c.benchmark_group("disney");
    g.throughput(Throughput::Elements(tuples.len() as u64));
    g.bench_function("eval_1024", |b| {
        b.iter(|| {
            let mut acc = Rgb::ZERO;
            for &(n, l, v) in &tuples {
                acc += eval_disney(n, l, v, albedo, &p);
            }
            black_box(acc)
        })
    });
    g.finish();
}

fn obsmap(c: &mut Criterion) {
    let mut rng = RandomStream::new(2, 0, 0);
    let samples: Vec<LightSample> = (0..1000)
        .map(|_| LightSample {
            direction: sample_hemisphere_uniform(&mut rng, 70f64.to_radians()),
            brightness: Rgb::new(1.0, 1.2, 0.9),
            intensity: Rgb::new(rng.unit(), rng.unit(), rng.unit()),
        })
        .collect();
    c.bench_function("build_map_1000_lights_d32", |b| b.iter(|| build_map(black_box(&samples), 32).unwrap()));
}

fn records(c: &mut Criterion) {
    let lib = MerlLibrary::default();
    let mut g = c.benchmark_group("sample_record");
    for preset in [Preset::Dense, Preset::Sparse] {
        let cfg = GenConfig::preset(preset);
        let mut index = 0u64;
        g.bench_function(format!("{preset:?}").to_lowercase(), |b| {
            b.iter(|| {
                index += 1;
                black_box(sample_record(&cfg, &lib, index).unwrap())
            })
        });
    }
    g.finish();
}

fn woodham(c: &mut Criterion) {
    let mut rng = RandomStream::new(3, 0, 0);
    let lights: Vec<Light> = (0..32)
        .map(|_| Light {
            direction: sample_hemisphere_uniform(&mut rng, 70f64.to_radians()),
            brightness: Rgb::ONE,
        })
        .collect();
    let lib = MerlLibrary::default();
    let (stack, _) = render_sphere(
        &MaterialSpec::Lambertian,
        &lib,
        Rgb::new(0.6, 0.5, 0.4),
        &lights,
        64,
        &EffectsConfig::off(),
        0,
    )
    .unwrap();
    c.bench_function("woodham_64px_32_lights", |b| {
        b.iter_batched(|| stack.clone(), |s| woodham_solve(&s).unwrap(), BatchSize::LargeInput)
    });
}

criterion_group!(benches, disney, obsmap, records, woodham);
criterion_main!(benches);
