//! End-to-end acceptance checks. Prints one PASS/FAIL/SKIP line per
//! criterion and exits non-zero if any criterion fails.
//!
//! Optional environment:
//! - `PXMAP_DILIGENT_DIR`: DiLiGenT `pmsData` directory (criterion 8).

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::FRAC_PI_2;
use std::hash::{Hash, Hasher};
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pxmap_core::brdf::{eval_disney, BINS_PER_CHANNEL};
use pxmap_core::datagen::{generate, DatasetWriter, EffectsConfig, Light};
use pxmap_core::effects::{quantize16_scalar, SATURATION};
use pxmap_core::geom::sample_hemisphere_uniform;
use pxmap_core::obsmap::{cell_of, GRAY};
use pxmap_core::pstereo::{evaluate, load_stack_dir, render_sphere, woodham_solve, NormalMap};
use pxmap_core::{
    build_map, DisneyParams, Direction, GenConfig, LightSample, MaterialSpec, MerlLibrary, MerlTable, Preset,
    RandomStream, Rgb, Vec3,
};

// criterion 1
const SPHERE_RES: usize = 128;
const SPHERE_LIGHTS: usize = 96;
const SPHERE_MAX_POLAR_DEG: f64 = 70.0;
const MAE_EXACT_DEG: f64 = 0.01;
const MAE_QUANTIZED_DEG: f64 = 0.2;
const SPHERE_SECONDS: f64 = 10.0;
// criterion 2
const STAT_RECORDS: u64 = 100_000;
const AMBIENT: (f64, f64) = (0.75, 0.02);
const DISCONTINUITY: (f64, f64) = (0.15, 0.01);
const MERL: (f64, f64) = (0.25, 0.015);
const EMPTY_WALL: (f64, f64) = (0.25, 0.02);
// criterion 3
const DETERMINISM_RECORDS: u64 = 10_000;
const DETERMINISM_WORKERS: [usize; 3] = [1, 4, 16];
const DETERMINISM_SEED: u64 = 20_240_611;
// criterion 4
const RECIPROCITY_TUPLES: usize = 100_000;
const RECIPROCITY_REL: f64 = 1e-6;
// criterion 5
const MAP_LIGHTS: usize = 96;
const MAP_TRIALS: usize = 2_000;
// criterion 6
const QUANTIZE_POINTS: usize = 1_000_000;
// criterion 7
const THROUGHPUT_FLOOR: f64 = 2_000.0;
const THROUGHPUT_RECORDS: u64 = 4_000;
// criterion 8
const BALL_MAE_DEG: f64 = 4.1;
const BALL_TOL_DEG: f64 = 0.4;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn sphere_lights(seed: u64) -> Vec<Light> {
    let mut rng = RandomStream::new(seed, 0, 0);
    (0..SPHERE_LIGHTS)
        .map(|_| Light {
            direction: sample_hemisphere_uniform(&mut rng, SPHERE_MAX_POLAR_DEG.to_radians()),
            brightness: Rgb::new(rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)),
        })
        .collect()
}

/// Mean error over pixels lit by at least three lights.
fn lambert_sphere_mae(quantize: bool) -> (f64, usize) {
    let lights = sphere_lights(1);
    let effects = EffectsConfig {
        quantize,
        ..EffectsConfig::off()
    };
    let lib = MerlLibrary::default();
    let albedo = Rgb::new(0.6, 0.5, 0.4);
    let (stack, truth) = render_sphere(&MaterialSpec::Lambertian, &lib, albedo, &lights, SPHERE_RES, &effects, 0)
        .expect("render");
    let pred = woodham_solve(&stack).expect("solve");
    let mut scored = NormalMap::empty(SPHERE_RES, SPHERE_RES);
    for (r, c) in stack.masked_pixels() {
        let n = truth.get(r, c).unwrap();
        if lights.iter().filter(|l| n.dot(l.direction) > 0.0).count() >= 3 {
            scored.set(r, c, Some(n));
        }
    }
    let e = evaluate(&pred, &scored).expect("evaluate");
    (e.mae, e.pixels)
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let (exact, px) = lambert_sphere_mae(false);
    let secs = start.elapsed().as_secs_f64();
    let (quant, _) = lambert_sphere_mae(true);
    check(
        exact < MAE_EXACT_DEG && quant < MAE_QUANTIZED_DEG && secs < SPHERE_SECONDS,
        format!(
            "{px} px, noise-free MAE {exact:.2e} deg (< {MAE_EXACT_DEG}), 16-bit MAE {quant:.4} deg (< {MAE_QUANTIZED_DEG}), render+solve {secs:.2} s (< {SPHERE_SECONDS})"
        ),
    )
}

fn synthetic_merl() -> MerlLibrary {
    let data = (0..3 * BINS_PER_CHANNEL).map(|i| 200.0 + (i % 1009) as f64).collect();
    MerlLibrary::new(vec![MerlTable::from_raw("synthetic", data).unwrap()])
}

fn criterion_2() -> Verdict {
    let mut cfg = GenConfig::preset(Preset::Dense);
    cfg.seed = 2;
    let lib = synthetic_merl();
    let mut w = DatasetWriter::new(io::sink(), cfg.grid, STAT_RECORDS).unwrap();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let stats = generate(&cfg, &lib, STAT_RECORDS, workers, &mut w).expect("generate");
    let within = |v: f64, (target, tol): (f64, f64)| (v - target).abs() <= tol;
    let (a, d, m, e) = (
        stats.ambient_fraction(),
        stats.discontinuity_fraction(),
        stats.merl_fraction(),
        stats.empty_wall_fraction(),
    );
    check(
        within(a, AMBIENT) && within(d, DISCONTINUITY) && within(m, MERL) && within(e, EMPTY_WALL),
        format!(
            "{} attempts: ambient {a:.4}, discontinuity {d:.4}, MERL {m:.4}, empty wall {e:.4}",
            stats.attempts
        ),
    )
}

fn digest(bytes: &[u8]) -> u64 {
    let mut h = DefaultHasher::new();
    bytes.hash(&mut h);
    h.finish()
}

fn criterion_3() -> Verdict {
    let mut cfg = GenConfig::preset(Preset::Dense);
    cfg.seed = DETERMINISM_SEED;
    let lib = MerlLibrary::default();
    let mut outputs = Vec::new();
    for workers in DETERMINISM_WORKERS {
        let mut w = DatasetWriter::new(Vec::new(), cfg.grid, DETERMINISM_RECORDS).unwrap();
        generate(&cfg, &lib, DETERMINISM_RECORDS, workers, &mut w).expect("generate");
        outputs.push(w.finish().unwrap());
    }
    let same = outputs.windows(2).all(|p| p[0] == p[1]);
    check(
        same,
        format!(
            "{DETERMINISM_RECORDS} records, workers {DETERMINISM_WORKERS:?}: {} bytes, digests {:x?}",
            outputs[0].len(),
            outputs.iter().map(|o| digest(o)).collect::<Vec<_>>()
        ),
    )
}

fn criterion_4() -> Verdict {
    let mut rng = RandomStream::new(4, 0, 0);
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for _ in 0..RECIPROCITY_TUPLES {
        let n = sample_hemisphere_uniform(&mut rng, FRAC_PI_2);
        let l = sample_hemisphere_uniform(&mut rng, FRAC_PI_2);
        let v = sample_hemisphere_uniform(&mut rng, FRAC_PI_2);
        let rho = Rgb::new(rng.unit(), rng.unit(), rng.unit());
        let p = DisneyParams::from_array([(); 8].map(|_| rng.unit()));
        let a = eval_disney(n, l, v, rho, &p);
        let b = eval_disney(n, v, l, rho, &p);
        if !(a.to_array().iter().chain(&b.to_array()).all(|x| x.is_finite() && *x >= 0.0)) {
            bad += 1;
            continue;
        }
        let (nl, nv) = (n.dot(l), n.dot(v));
        if nl <= 0.0 || nv <= 0.0 {
            continue;
        }
        for (x, y) in (a / nl).to_array().iter().zip((b / nv).to_array()) {
            let scale = x.abs().max(y.abs());
            if scale > 0.0 {
                worst = worst.max((x - y).abs() / scale);
            }
        }
    }
    check(
        bad == 0 && worst <= RECIPROCITY_REL,
        format!("{RECIPROCITY_TUPLES} tuples, worst relative asymmetry {worst:.2e}, invalid outputs {bad}"),
    )
}

/// Cell index from exact rational arithmetic on the component, clamped.
fn reference_cell(c: f64, d: usize) -> usize {
    let raw = ((c + 1.0) * d as f64 / 2.0).floor();
    if raw < 0.0 {
        0
    } else if raw >= d as f64 {
        d - 1
    } else {
        raw as usize
    }
}

fn criterion_5() -> Verdict {
    let mut rng = RandomStream::new(5, 0, 0);
    let mut lights: Vec<Direction> = (0..MAP_LIGHTS - 2)
        .map(|_| sample_hemisphere_uniform(&mut rng, FRAC_PI_2))
        .collect();
    // boundary directions where the unclamped index would be d
    lights.push(Direction::new(1.0, 0.0, 0.0));
    lights.push(Direction::new(0.0, 1.0, 0.0));
    let mut failures = Vec::new();
    let mut nonzero_maps = 0;
    for d in [1, 8, 16, 32] {
        for l in &lights {
            let got = cell_of(*l, d);
            let want = (reference_cell(l.x(), d), reference_cell(l.y(), d));
            if got != want {
                failures.push(format!("cell {got:?} != {want:?} at d={d}"));
            }
        }
    }
    let d = 32;
    for trial in 0..MAP_TRIALS {
        let samples: Vec<LightSample> = lights
            .iter()
            .map(|&direction| {
                // a share of dark observations exercises the zero path
                let i = if rng.bernoulli(0.2) { Rgb::ZERO } else { Rgb::new(rng.unit(), rng.unit(), rng.unit()) };
                LightSample {
                    direction,
                    brightness: Rgb::new(rng.uniform(0.28, 3.2), rng.uniform(0.28, 3.2), rng.uniform(0.28, 3.2)),
                    intensity: if trial == 0 { Rgb::ZERO } else { i },
                }
            })
            .collect();
        let m = build_map(&samples, d).unwrap();
        let mut last = std::collections::HashMap::new();
        for s in &samples {
            last.insert(cell_of(s.direction, d), s);
        }
        for (&(u, v), s) in &last {
            let want = [s.intensity.r / s.brightness.r, s.intensity.g / s.brightness.g, s.intensity.b / s.brightness.b];
            if m.rgb(u, v) != want.map(|x| x as f32) {
                failures.push(format!("rgb mismatch at ({u},{v}) in trial {trial}"));
            }
        }
        let max_sum = last
            .values()
            .map(|s| s.intensity.zip(s.brightness, |i, p| i / p).sum())
            .fold(0.0, f64::max);
        for (&(u, v), s) in &last {
            let g = s.intensity.zip(s.brightness, |i, p| i / p).sum();
            let want = if max_sum > 0.0 { (g / max_sum) as f32 } else { 0.0 };
            if m.gray(u, v) != want {
                failures.push(format!("O_n mismatch at ({u},{v}) in trial {trial}"));
            }
        }
        let max_gray = (0..d * d).map(|k| m.value(k / d, k % d, GRAY)).fold(0f32, f32::max);
        if m.grid().iter().any(|v| *v != 0.0) {
            nonzero_maps += 1;
            if max_gray != 1.0 {
                failures.push(format!("max O_n = {max_gray} in trial {trial}"));
            }
        } else if max_gray != 0.0 {
            failures.push("dark map with nonzero gray".into());
        }
    }
    check(
        failures.is_empty(),
        format!(
            "{} lights, {MAP_TRIALS} maps ({nonzero_maps} nonzero), {} violations{}",
            lights.len(),
            failures.len(),
            failures.first().map(|f| format!(", first: {f}")).unwrap_or_default()
        ),
    )
}

fn criterion_6() -> Verdict {
    let step = 2f64.powi(-16);
    let mut prev = f64::NEG_INFINITY;
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for k in 0..QUANTIZE_POINTS {
        let x = SATURATION * k as f64 / (QUANTIZE_POINTS - 1) as f64;
        let q = quantize16_scalar(x);
        if quantize16_scalar(q) != q || q < prev || (x - q).abs() >= step {
            violations += 1;
        }
        worst = worst.max((x - q).abs());
        prev = q;
    }
    check(
        violations == 0,
        format!("{QUANTIZE_POINTS} points on [0, 65535/65536], max |q(x)-x| = {worst:.3e} (< 2^-16), {violations} violations"),
    )
}

fn criterion_7() -> Verdict {
    // the floor is stated for 8 cores; it is applied unscaled on any machine
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut cfg = GenConfig::preset(Preset::Dense);
    cfg.seed = 7;
    let mut w = DatasetWriter::new(io::sink(), cfg.grid, THROUGHPUT_RECORDS).unwrap();
    let stats = generate(&cfg, &MerlLibrary::default(), THROUGHPUT_RECORDS, cores, &mut w).expect("generate");
    let rate = stats.records_per_second();
    check(
        rate >= THROUGHPUT_FLOOR,
        format!("{rate:.0} records/s on {cores} core(s), d={}, dense preset (>= {THROUGHPUT_FLOOR})", cfg.grid),
    )
}

fn find_ball(root: &Path) -> Option<PathBuf> {
    ["ballPNG", "pmsData/ballPNG", "DiLiGenT/pmsData/ballPNG"]
        .iter()
        .map(|p| root.join(p))
        .find(|p| p.is_dir())
}

/// Ground truth as `Normal_gt.pxnm`, or DiLiGenT's `normal.txt`
/// (row-major `x y z` per pixel).
fn load_truth(dir: &Path, width: usize, height: usize, mask: &[bool]) -> Result<NormalMap, String> {
    let pxnm = dir.join("Normal_gt.pxnm");
    if pxnm.exists() {
        return NormalMap::load(&pxnm).map_err(|e| e.to_string());
    }
    let text = std::fs::read_to_string(dir.join("normal.txt")).map_err(|e| format!("normal.txt: {e}"))?;
    let vals: Vec<f64> = text.split_whitespace().map(|t| t.parse().unwrap_or(f64::NAN)).collect();
    if vals.len() != width * height * 3 {
        return Err(format!("normal.txt holds {} values, expected {}", vals.len(), width * height * 3));
    }
    let normals = vals
        .chunks_exact(3)
        .zip(mask)
        .map(|(c, &m)| if m { Vec3::new(c[0], c[1], c[2]).normalized() } else { None })
        .collect();
    Ok(NormalMap::from_vec(width, height, normals))
}

fn criterion_8() -> Verdict {
    let Some(root) = std::env::var_os("PXMAP_DILIGENT_DIR") else {
        return Verdict::Skip("PXMAP_DILIGENT_DIR not set".into());
    };
    let Some(dir) = find_ball(Path::new(&root)) else {
        return Verdict::Skip(format!("no ballPNG under {}", Path::new(&root).display()));
    };
    let result = (|| -> Result<f64, String> {
        let stack = load_stack_dir(&dir).map_err(|e| e.to_string())?;
        let truth = load_truth(&dir, stack.width(), stack.height(), stack.mask())?;
        let pred = woodham_solve(&stack).map_err(|e| e.to_string())?;
        Ok(evaluate(&pred, &truth).map_err(|e| e.to_string())?.mae)
    })();
    match result {
        Ok(mae) => check(
            (mae - BALL_MAE_DEG).abs() <= BALL_TOL_DEG,
            format!("Ball baseline MAE {mae:.3} deg, expected {BALL_MAE_DEG} ± {BALL_TOL_DEG}"),
        ),
        Err(e) => Verdict::Fail(format!("could not evaluate {}: {e}", dir.display())),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("1 closed-loop Lambertian recovery", criterion_1),
        ("2 sampling statistics", criterion_2),
        ("3 determinism across worker counts", criterion_3),
        ("4 Disney reciprocity", criterion_4),
        ("5 observation-map construction", criterion_5),
        ("6 quantization operator", criterion_6),
        ("7 generation throughput", criterion_7),
        ("8 DiLiGenT Ball baseline", criterion_8),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match verdict {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("criterion {name}: {tag} ({secs:.1} s) {detail}");
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
