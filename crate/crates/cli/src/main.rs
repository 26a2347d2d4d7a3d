use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use pxmap_core::datagen::{generate, DatasetReader, DatasetWriter, EffectsConfig, Light};
use pxmap_core::geom::sample_hemisphere_uniform;
use pxmap_core::pstereo::{
    evaluate, extract_map, extract_rotated, k_rotation_predict, load_lights, load_stack_dir, map_baseline,
    render_sphere, sample_light_subsets, woodham_solve, ImageStack, MapBaseline, NormalMap, NormalPredictor,
    SubprocessPredictor, SUBSET_SEED,
};
use pxmap_core::{
    DisneyParams, GenConfig, MaterialSpec, MerlLibrary, MerlTable, Preset, RandomStream, Rgb,
};

/// Pixelwise photometric-stereo data synthesis and evaluation.
#[derive(Parser)]
#[command(name = "pxmap", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a PXOM training dataset.
    Generate(GenerateArgs),
    /// Render a sphere image stack plus its ground-truth normal map.
    RenderSphere(RenderArgs),
    /// Least-squares Lambertian normals for an image stack.
    SolveBaseline(SolveArgs),
    /// Write per-pixel observation maps of an image stack as PXOM.
    ExtractMaps(ExtractArgs),
    /// Predict normals through an external predictor with K-rotation averaging.
    Predict(PredictArgs),
    /// Built-in map-space least-squares predictor (PXOM in, PXNM out).
    MapBaseline {
        input: PathBuf,
        output: PathBuf,
    },
    /// Score a normal map against ground truth.
    Evaluate(EvaluateArgs),
    /// Summarize MERL tables.
    MerlInfo {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Dense,
    Sparse,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Dense => Preset::Dense,
            PresetArg::Sparse => Preset::Sparse,
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Args)]
struct GenerateArgs {
    /// Light configuration preset.
    #[arg(long, value_enum, default_value = "dense")]
    preset: PresetArg,
    /// Number of records to write.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; output does not depend on it.
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    /// `key = value` overrides applied on top of the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory of MERL `*.binary` tables.
    #[arg(long, env = "PXMAP_MERL_DIR")]
    merl_dir: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MaterialArg {
    Lambertian,
    Disney,
    Merl,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 128)]
    resolution: usize,
    #[arg(long, value_enum, default_value = "lambertian")]
    material: MaterialArg,
    /// Eight comma-separated Disney parameters: metallic, specular,
    /// roughness, specularTint, sheen, sheenTint, clearcoat, clearcoatRoughness.
    #[arg(long, default_value = "0,0.5,0.5,0,0,0,0,0")]
    disney: String,
    #[arg(long, env = "PXMAP_MERL_DIR")]
    merl_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    merl_index: usize,
    /// MERL mixing weight.
    #[arg(long, default_value_t = 1.0)]
    merl_weight: f64,
    #[arg(long, default_value = "0.8,0.8,0.8")]
    albedo: String,
    /// Directory holding light_directions.txt and light_intensities.txt.
    #[arg(long, conflicts_with = "num_lights")]
    lights_dir: Option<PathBuf>,
    /// Number of random lights when no light files are given.
    #[arg(long, default_value_t = 96)]
    num_lights: usize,
    /// Largest angle of random lights from the view axis, degrees.
    #[arg(long, default_value_t = 70.0)]
    max_elevation: f64,
    /// Range of random per-channel light brightness.
    #[arg(long, default_value = "1,1")]
    brightness: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Enable cast shadows.
    #[arg(long)]
    shadows: bool,
    /// Enable self-reflections (needs --shadows to have any effect).
    #[arg(long)]
    reflections: bool,
    #[arg(long)]
    ambient: bool,
    #[arg(long)]
    noise: bool,
    /// 16-bit discretization of rendered values.
    #[arg(long)]
    quantize: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// Stack directory (PNGs, light files, optional mask.png).
    stack: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ground truth for sparse-subset scoring.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Solve on random light subsets of this size (requires --truth).
    #[arg(long, requires = "truth")]
    subset_size: Option<usize>,
    #[arg(long, default_value_t = 10)]
    subsets: usize,
    #[arg(long, default_value_t = SUBSET_SEED)]
    subset_seed: u64,
}

#[derive(Args)]
struct ExtractArgs {
    stack: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 32)]
    grid: usize,
    /// `row,col` pixels separated by `;`. Defaults to every masked pixel.
    #[arg(long)]
    pixels: Option<String>,
    /// Rotate the light configuration about z, degrees.
    #[arg(long, default_value_t = 0.0)]
    rotation: f64,
    /// Label records with normals from this PXNM instead of zeros.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    stack: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(short = 'k', long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    rotations: u64,
    #[arg(long, default_value_t = 32)]
    grid: usize,
    /// Predictor command, called as `CMD ARGS.. <in.pxom> <out.pxnm>`.
    /// Without a command the built-in map baseline is used.
    #[arg(last = true)]
    predictor: Vec<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    pred: PathBuf,
    truth: PathBuf,
    /// Summary metrics as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Per-pixel errors as CSV.
    #[arg(long)]
    errors_csv: Option<PathBuf>,
    /// Error heatmap PNG (0 to 90 degrees).
    #[arg(long)]
    heatmap: Option<PathBuf>,
}

fn parse_floats<const N: usize>(s: &str, what: &str) -> Result<[f64; N]> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("{what}: cannot parse {s:?}"))?;
    vals.try_into()
        .map_err(|v: Vec<f64>| anyhow::anyhow!("{what}: expected {N} values, got {}", v.len()))
}

fn load_library(dir: Option<&Path>) -> Result<MerlLibrary> {
    match dir {
        Some(d) => {
            let lib = MerlLibrary::load_dir(d).with_context(|| format!("loading MERL tables from {}", d.display()))?;
            info!("loaded {} MERL tables", lib.len());
            Ok(lib)
        }
        None => Ok(MerlLibrary::default()),
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let mut cfg = GenConfig::preset(a.preset.into());
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_text(&text)?;
    }
    cfg.seed = a.seed;
    if a.print_config {
        print!("{}", cfg.to_text());
        return Ok(());
    }
    cfg.validate()?;
    let lib = load_library(a.merl_dir.as_deref())?;
    let file = File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut w = DatasetWriter::new(BufWriter::new(file), cfg.grid, a.count)?;
    let stats = generate(&cfg, &lib, a.count, a.workers, &mut w)?;
    w.finish()?;
    println!(
        "wrote {} records to {} ({:.0} records/s)",
        stats.generated,
        a.out.display(),
        stats.records_per_second()
    );
    println!(
        "attempts {} discarded {:.4} shadowed {:.4} reflections {:.4} ambient {:.4} discontinuity {:.4} merl {:.4}",
        stats.attempts,
        stats.discard_fraction(),
        stats.shadowed_fraction(),
        stats.reflection_fraction(),
        stats.ambient_fraction(),
        stats.discontinuity_fraction(),
        stats.merl_fraction()
    );
    Ok(())
}

fn cmd_render(a: RenderArgs) -> Result<()> {
    let albedo = Rgb::from_array(parse_floats::<3>(&a.albedo, "--albedo")?);
    let lib = match a.material {
        MaterialArg::Merl => {
            let lib = load_library(a.merl_dir.as_deref())?;
            if lib.is_empty() {
                bail!("--material merl needs --merl-dir with at least one table");
            }
            lib
        }
        _ => MerlLibrary::default(),
    };
    let material = match a.material {
        MaterialArg::Lambertian => MaterialSpec::Lambertian,
        MaterialArg::Disney => {
            let p = DisneyParams::from_array(parse_floats::<8>(&a.disney, "--disney")?);
            if !p.is_valid() {
                bail!("--disney parameters must lie in [0, 1]");
            }
            MaterialSpec::Disney(p)
        }
        MaterialArg::Merl => {
            if !(0.0..=1.0).contains(&a.merl_weight) {
                bail!("--merl-weight must lie in [0, 1]");
            }
            MaterialSpec::MerlMix {
                table_id: a.merl_index,
                w: a.merl_weight,
            }
        }
    };
    let lights = match &a.lights_dir {
        Some(dir) => load_lights(
            dir.join(pxmap_core::pstereo::DIRECTIONS_FILE),
            dir.join(pxmap_core::pstereo::INTENSITIES_FILE),
        )?,
        None => {
            let [lo, hi] = parse_floats::<2>(&a.brightness, "--brightness")?;
            if !(lo > 0.0 && lo <= hi) {
                bail!("--brightness must satisfy 0 < lo <= hi");
            }
            if !(a.max_elevation > 0.0 && a.max_elevation <= 90.0) {
                bail!("--max-elevation must lie in (0, 90]");
            }
            let mut rng = RandomStream::new(a.seed, u64::MAX, 0);
            (0..a.num_lights)
                .map(|_| Light {
                    direction: sample_hemisphere_uniform(&mut rng, a.max_elevation.to_radians()),
                    brightness: Rgb::new(rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)),
                })
                .collect()
        }
    };
    if lights.is_empty() {
        bail!("no lights");
    }
    let dense = GenConfig::preset(Preset::Dense).effects();
    let mut wall = dense.wall;
    if !a.shadows {
        wall.p_empty = 1.0;
    }
    let effects = EffectsConfig {
        wall,
        reflections: a.reflections,
        p_ambient: if a.ambient { dense.p_ambient } else { 0.0 },
        ambient_max: dense.ambient_max,
        noise: if a.noise { dense.noise } else { None },
        quantize: a.quantize,
    };
    let (stack, truth) = render_sphere(&material, &lib, albedo, &lights, a.resolution, &effects, a.seed)?;
    stack.save_dir(&a.out)?;
    truth.save(a.out.join("normal_gt.pxnm"))?;
    println!(
        "rendered {} images of {}x{} to {}",
        stack.len(),
        a.resolution,
        a.resolution,
        a.out.display()
    );
    Ok(())
}

fn load_stack(dir: &Path) -> Result<ImageStack> {
    load_stack_dir(dir).with_context(|| format!("loading stack {}", dir.display()))
}

fn load_normals(path: &Path) -> Result<NormalMap> {
    NormalMap::load(path).with_context(|| format!("reading {}", path.display()))
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let stack = load_stack(&a.stack)?;
    if let Some(size) = a.subset_size {
        let truth = load_normals(a.truth.as_deref().expect("clap enforces --truth"))?;
        let mut maes = Vec::new();
        for subset in sample_light_subsets(stack.len(), size, a.subsets, a.subset_seed) {
            let pred = woodham_solve(&stack.subset(&subset))?;
            maes.push(evaluate(&pred, &truth)?.mae);
        }
        let mean = maes.iter().sum::<f64>() / maes.len() as f64;
        let var = maes.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / maes.len() as f64;
        println!(
            "subsets {} of {} lights: MAE {:.3} ± {:.3} deg",
            maes.len(),
            size.min(stack.len()),
            mean,
            var.sqrt()
        );
        return Ok(());
    }
    let pred = woodham_solve(&stack)?;
    if let Some(out) = &a.out {
        pred.save(out)?;
    }
    match &a.truth {
        Some(t) => println!("MAE {:.3} deg", evaluate(&pred, &load_normals(t)?)?.mae),
        None => println!("solved {} of {} masked pixels", pred.valid_count(), stack.masked_pixels().count()),
    }
    Ok(())
}

fn parse_pixels(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (r, c) = p.split_once(',').with_context(|| format!("pixel {p:?} is not `row,col`"))?;
            Ok((r.trim().parse()?, c.trim().parse()?))
        })
        .collect()
}

fn cmd_extract(a: ExtractArgs) -> Result<()> {
    let stack = load_stack(&a.stack)?;
    let pixels = match &a.pixels {
        Some(p) => parse_pixels(p)?,
        None => stack.masked_pixels().collect(),
    };
    let truth = a.truth.as_deref().map(load_normals).transpose()?;
    let file = File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut w = DatasetWriter::new(BufWriter::new(file), a.grid, pixels.len() as u64)?;
    let theta = a.rotation.to_radians();
    for &(r, c) in &pixels {
        let map = if theta == 0.0 {
            extract_map(&stack, (r, c), a.grid)?
        } else {
            extract_rotated(&stack, (r, c), a.grid, theta)?
        };
        let normal = truth
            .as_ref()
            .and_then(|t| t.get(r, c))
            .map_or([0.0; 3], |n| n.to_array());
        w.write_parts(&map, normal)?;
    }
    w.finish()?;
    println!("wrote {} maps to {}", pixels.len(), a.out.display());
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    let stack = load_stack(&a.stack)?;
    let mut predictor: Box<dyn NormalPredictor> = match a.predictor.split_first() {
        Some((cmd, args)) => Box::new(SubprocessPredictor::new(cmd, args.to_vec())),
        None => Box::new(MapBaseline),
    };
    let normals = k_rotation_predict(&stack, a.rotations as usize, a.grid, predictor.as_mut())?;
    normals.save(&a.out)?;
    println!("predicted {} normals to {}", normals.valid_count(), a.out.display());
    Ok(())
}

fn cmd_map_baseline(input: &Path, output: &Path) -> Result<()> {
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let mut reader = DatasetReader::new(BufReader::new(file))?;
    let mut normals = Vec::new();
    while let Some(rec) = reader.next_parts() {
        normals.push(map_baseline(&rec?.0));
    }
    reader.expect_end()?;
    NormalMap::from_vec(normals.len(), 1, normals).save(output)?;
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let e = evaluate(&load_normals(&a.pred)?, &load_normals(&a.truth)?)?;
    print!("{}", e.summary());
    if let Some(p) = &a.csv {
        fs::write(p, e.metrics_csv()).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &a.errors_csv {
        fs::write(p, e.errors_csv()).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &a.heatmap {
        e.save_heatmap(p)?;
    }
    Ok(())
}

fn cmd_merl_info(files: &[PathBuf]) -> Result<()> {
    println!("name,invalid_r,invalid_g,invalid_b,mean_r,mean_g,mean_b");
    for f in files {
        let t = MerlTable::load_file(f).with_context(|| format!("loading {}", f.display()))?;
        let inv = t.invalid_counts();
        let m = t.mean_reflectance();
        println!(
            "{},{},{},{},{:.6},{:.6},{:.6}",
            t.name(),
            inv[0],
            inv[1],
            inv[2],
            m.r,
            m.g,
            m.b
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::RenderSphere(a) => cmd_render(a),
        Command::SolveBaseline(a) => cmd_solve(a),
        Command::ExtractMaps(a) => cmd_extract(a),
        Command::Predict(a) => cmd_predict(a),
        Command::MapBaseline { input, output } => cmd_map_baseline(&input, &output),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::MerlInfo { files } => cmd_merl_info(&files),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
