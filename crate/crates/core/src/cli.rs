//! The `rrq` command line.
//!
//! Exit codes: 0 on success, 2 for usage and input errors, 3 when a
//! model or stream fails an integrity check. Every experiment writes a
//! `<name>.manifest.json` next to its output holding the full
//! configuration, seeds and model hash.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use regex::Regex;
use serde_json::{json, Value};

use crate::codec::{self, ModelBundle};
use crate::error::Error;
use crate::eval::{self, DenoiseOptions, DenoiseRow, SynthConfig};
use crate::image::ImageGray;
use crate::normal::mix;
use crate::pgm;
use crate::preprocess::PreprocessModel;
use crate::rrq::{self, ResidualQuantizer, TrainConfig};

#[derive(Debug, Parser)]
#[command(
    name = "rrq",
    version,
    about = "Regularized residual quantization of grayscale image sets"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the transform and train the layer stack on a PGM directory.
    Train(TrainArgs),
    /// Encode PGM images into a bitstream.
    Compress(CompressArgs),
    /// Decode a bitstream back into PGM images.
    Decompress(DecompressArgs),
    /// Distortion-rate curves on the train and test splits.
    EvalDr(EvalDrArgs),
    /// Denoise by truncating the layer stack.
    Denoise(DenoiseArgs),
    /// Write a synthetic corpus as train/ and test/ PGM directories.
    Synth(SynthArgs),
}

#[derive(Debug, Args, Clone)]
struct SplitArgs {
    /// Fraction of images (per subject, if grouped) used for training.
    #[arg(long, default_value_t = 0.5)]
    split_fraction: f64,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    /// Groups files into subjects by the first capture group (or the
    /// whole match) of this pattern applied to the file name.
    #[arg(long)]
    subject_regex: Option<String>,
    /// Use every input image for training instead of splitting.
    #[arg(long)]
    no_split: bool,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Directory of PGM images.
    #[arg(long)]
    input: PathBuf,
    /// Model file to write (`.rrqm`).
    #[arg(long)]
    output: PathBuf,
    /// Number of PCA sub-bands.
    #[arg(long = "M")]
    subbands: usize,
    /// Number of layers.
    #[arg(long = "L")]
    layers: usize,
    /// Codewords per layer; one value, or one per layer separated by commas.
    #[arg(long = "K", value_delimiter = ',', required = true)]
    k: Vec<u32>,
    #[arg(long, default_value_t = 0)]
    model_seed: u64,
    #[command(flatten)]
    split: SplitArgs,
}

#[derive(Debug, Args)]
struct CompressArgs {
    #[arg(long)]
    model: PathBuf,
    /// A PGM file or a directory of them.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Layers to use (default: all).
    #[arg(long)]
    layers: Option<usize>,
}

#[derive(Debug, Args)]
struct DecompressArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args, Clone)]
struct GridArgs {
    /// Layer depths to evaluate, comma separated (default 1, 2, 4, …, L).
    #[arg(long, value_delimiter = ',', conflicts_with = "dense")]
    layer_grid: Option<Vec<usize>>,
    /// Evaluate every depth 1..=L.
    #[arg(long)]
    dense: bool,
}

impl GridArgs {
    fn resolve(&self, depth: usize) -> Vec<usize> {
        if self.dense {
            eval::dense_grid(depth)
        } else if let Some(g) = &self.layer_grid {
            g.clone()
        } else {
            eval::geometric_grid(depth)
        }
    }
}

#[derive(Debug, Args)]
struct EvalDrArgs {
    #[arg(long)]
    model: PathBuf,
    /// Image directory split as at training time.
    #[arg(long)]
    input: PathBuf,
    /// Separate test directory instead of the held-out part of `--input`.
    #[arg(long)]
    test_input: Option<PathBuf>,
    #[command(flatten)]
    split: SplitArgs,
    /// Evaluate a seeded random subset of this many images per split.
    #[arg(long)]
    sample: Option<usize>,
    #[command(flatten)]
    grid: GridArgs,
    /// Output directory for `dr_curve.csv`.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct DenoiseArgs {
    #[arg(long)]
    model: PathBuf,
    /// Clean reference images (or already noisy ones with `--noisy-input`).
    #[arg(long)]
    input: PathBuf,
    /// Noise variance; repeat for several levels.
    #[arg(long = "sigma2", required = true)]
    sigma2: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
    /// Denoise a seeded random subset of this many images.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    #[command(flatten)]
    grid: GridArgs,
    /// Inputs are already noisy: no reference, reconstructions are written
    /// at the heuristic depth (or `--layers`).
    #[arg(long)]
    noisy_input: bool,
    #[arg(long, requires = "noisy_input")]
    layers: Option<usize>,
    /// Output directory for `denoise.csv` (and images with `--noisy-input`).
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 200)]
    n_train: usize,
    #[arg(long, default_value_t = 200)]
    n_test: usize,
    #[arg(long, default_value_t = 64)]
    height: usize,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 2.0)]
    decay_alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    pixel_std: Option<f64>,
}

/// Runs the command line with the process arguments; returns the exit code.
pub fn main() -> i32 {
    run(std::env::args_os())
}

/// Runs the command line with explicit arguments (the first is the program name).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("warning: {e}");
        }
    }
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Compress(a) => cmd_compress(a),
        Command::Decompress(a) => cmd_decompress(a),
        Command::EvalDr(a) => cmd_eval_dr(a),
        Command::Denoise(a) => cmd_denoise(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<Error>() {
        Some(inner) if inner.is_integrity() => 3,
        _ => 2,
    }
}

/// `(file name, image)` pairs from a PGM file or directory, sorted by name.
fn load_images(path: &Path) -> anyhow::Result<Vec<(String, ImageGray)>> {
    let files = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .with_context(|| format!("reading {}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
            .collect();
        files.sort();
        files
    } else if path.is_file() {
        vec![path.to_path_buf()]
    } else {
        bail!("{} does not exist", path.display());
    };
    if files.is_empty() {
        bail!("no .pgm files in {}", path.display());
    }
    let images = files
        .par_iter()
        .map(|f| {
            let name = f
                .file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            pgm::read(f)
                .map(|im| (name, im))
                .with_context(|| format!("reading {}", f.display()))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let (h, w) = (images[0].1.height(), images[0].1.width());
    if let Some((name, im)) = images
        .iter()
        .find(|(_, im)| !im.same_geometry(&images[0].1))
    {
        return Err(Error::Geometry(format!(
            "{name} is {}x{}, expected {h}x{w} like {}",
            im.height(),
            im.width(),
            images[0].0
        ))
        .into());
    }
    Ok(images)
}

/// Deterministic split by image, or per subject when a pattern is given.
/// Returns indices of the training and test images in input order.
fn split_indices(names: &[String], args: &SplitArgs) -> anyhow::Result<(Vec<usize>, Vec<usize>)> {
    if args.no_split {
        return Ok(((0..names.len()).collect(), Vec::new()));
    }
    if !(args.split_fraction > 0.0 && args.split_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split fraction must be in (0, 1), got {}",
            args.split_fraction
        ))
        .into());
    }
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    match &args.subject_regex {
        Some(pattern) => {
            let re = Regex::new(pattern).context("invalid --subject-regex")?;
            for (i, name) in names.iter().enumerate() {
                let key = re
                    .captures(name)
                    .map(|c| {
                        c.get(1)
                            .unwrap_or_else(|| c.get(0).expect("match"))
                            .as_str()
                            .to_string()
                    })
                    .unwrap_or_default();
                groups.entry(key).or_default().push(i);
            }
        }
        None => {
            groups.insert(String::new(), (0..names.len()).collect());
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (g, (_, mut members)) in groups.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(args.split_seed, g as u64));
        members.shuffle(&mut rng);
        let cut = ((members.len() as f64 * args.split_fraction).round() as usize)
            .clamp(1.min(members.len()), members.len());
        train.extend_from_slice(&members[..cut]);
        test.extend_from_slice(&members[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Seeded subset of `count` indices, kept in input order.
fn sample_indices(
    mut indices: Vec<usize>,
    count: Option<usize>,
    seed: u64,
    stream: u64,
) -> Vec<usize> {
    if let Some(n) = count {
        if n < indices.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, stream));
            indices.shuffle(&mut rng);
            indices.truncate(n);
            indices.sort_unstable();
        }
    }
    indices
}

fn split_json(args: &SplitArgs) -> Value {
    json!({
        "split_fraction": args.split_fraction,
        "split_seed": args.split_seed,
        "subject_regex": args.subject_regex,
        "no_split": args.no_split,
    })
}

fn write_manifest(path: &Path, mut body: Value) -> anyhow::Result<()> {
    body["tool"] = json!(format!("rrq {}", env!("CARGO_PKG_VERSION")));
    let text = serde_json::to_string_pretty(&body)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

fn load_bundle(path: &Path) -> anyhow::Result<ModelBundle> {
    codec::load_model(path)
        .map_err(anyhow::Error::from)
        .with_context(|| format!("loading model {}", path.display()))
}

fn cmd_train(args: TrainArgs) -> anyhow::Result<()> {
    if args.layers == 0 {
        return Err(Error::InvalidArgument("--L must be at least 1".into()).into());
    }
    let layer_sizes = match args.k.len() {
        1 => vec![args.k[0]; args.layers],
        n if n == args.layers => args.k.clone(),
        n => {
            return Err(Error::InvalidArgument(format!(
                "--K lists {n} sizes for {} layers",
                args.layers
            ))
            .into())
        }
    };
    let images = load_images(&args.input)?;
    let names: Vec<String> = images.iter().map(|(n, _)| n.clone()).collect();
    let (train_idx, _) = split_indices(&names, &args.split)?;
    let train: Vec<ImageGray> = train_idx.iter().map(|&i| images[i].1.clone()).collect();
    let pre = PreprocessModel::fit(&train, args.subbands)?;
    let xs = train
        .par_iter()
        .map(|im| pre.forward(im))
        .collect::<Result<Vec<_>, _>>()?;
    let config = TrainConfig {
        layer_sizes,
        model_seed: args.model_seed,
    };
    let (model, report) = rrq::train(&xs, &config)?;
    let bundle = ModelBundle::new(pre, model)?;
    codec::save_model(&args.output, &bundle)?;

    println!("layer\tK\tgamma\tactive\tdistortion");
    println!("0\t-\t-\t-\t{:.6e}", report.initial_distortion);
    for (spec, d) in bundle
        .quantizer()
        .layers()
        .iter()
        .zip(&report.layer_distortion)
    {
        println!(
            "{}\t{}\t{:.6e}\t{}\t{:.6e}",
            spec.index,
            spec.k,
            spec.gamma,
            spec.active.len(),
            d
        );
    }
    if report.early_stopped {
        println!(
            "stopped after {} of {} layers: residual variance vanished",
            report.layer_distortion.len(),
            report.requested_layers
        );
    }
    write_manifest(
        &manifest_path(&args.output),
        json!({
            "command": "train",
            "input": args.input,
            "train_images": train_idx.iter().map(|&i| &names[i]).collect::<Vec<_>>(),
            "subbands": args.subbands,
            "layers_requested": args.layers,
            "layers_trained": bundle.quantizer().depth(),
            "layer_sizes": config.layer_sizes,
            "model_seed": args.model_seed,
            "split": split_json(&args.split),
            "model_sha256": hex::encode(bundle.digest()),
        }),
    )
}

fn cmd_compress(args: CompressArgs) -> anyhow::Result<()> {
    let bundle = load_bundle(&args.model)?;
    let layers = args.layers.unwrap_or(bundle.quantizer().depth());
    let images = load_images(&args.input)?;
    let ims: Vec<ImageGray> = images.iter().map(|(_, im)| im.clone()).collect();
    let bytes = codec::compress_to_bytes(&ims, &bundle, layers)?;
    fs::write(&args.output, &bytes)
        .with_context(|| format!("writing {}", args.output.display()))?;
    let bpp = codec::bits_per_pixel(bundle.quantizer(), layers, bundle.preprocess().dim());
    println!(
        "{} images, {layers} layers, {bpp} bpp payload, {} bytes written",
        ims.len(),
        bytes.len()
    );
    write_manifest(
        &manifest_path(&args.output),
        json!({
            "command": "compress",
            "model": args.model,
            "model_sha256": hex::encode(bundle.digest()),
            "images": images.iter().map(|(n, _)| n).collect::<Vec<_>>(),
            "layers": layers,
            "bits_per_pixel": bpp,
        }),
    )
}

fn cmd_decompress(args: DecompressArgs) -> anyhow::Result<()> {
    let bundle = load_bundle(&args.model)?;
    let bytes =
        fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    // decode fully before touching the output directory
    let images = codec::decompress_bytes(&bytes, &bundle)?;
    fs::create_dir_all(&args.output)?;
    let width = images.len().to_string().len().max(4);
    for (i, im) in images.iter().enumerate() {
        pgm::write(args.output.join(format!("{i:0width$}.pgm")), im)?;
    }
    println!(
        "{} images written to {}",
        images.len(),
        args.output.display()
    );
    Ok(())
}

fn cmd_eval_dr(args: EvalDrArgs) -> anyhow::Result<()> {
    let bundle = load_bundle(&args.model)?;
    let (pre, model) = (bundle.preprocess(), bundle.quantizer());
    let grid = args.grid.resolve(model.depth());
    let images = load_images(&args.input)?;
    let names: Vec<String> = images.iter().map(|(n, _)| n.clone()).collect();
    let mut splits: Vec<(&str, Vec<(String, ImageGray)>)> = Vec::new();
    let pick = |set: &[(String, ImageGray)], idx: Vec<usize>, stream: u64| {
        sample_indices(idx, args.sample, args.split.split_seed, stream)
            .into_iter()
            .map(|i| set[i].clone())
            .collect::<Vec<_>>()
    };
    let (tr, te) = split_indices(&names, &args.split)?;
    splits.push(("train", pick(&images, tr, 1)));
    match &args.test_input {
        Some(dir) => {
            let test = load_images(dir)?;
            splits.push(("test", pick(&test, (0..test.len()).collect(), 2)));
        }
        None if !te.is_empty() => splits.push(("test", pick(&images, te, 2))),
        None => {}
    }
    let mut curves = Vec::new();
    for (split, set) in &splits {
        let ims: Vec<ImageGray> = set.iter().map(|(_, im)| im.clone()).collect();
        curves.push((*split, eval::dr_sweep(&ims, pre, model, &grid)?));
    }
    fs::create_dir_all(&args.output)?;
    let csv_path = args.output.join("dr_curve.csv");
    let file = fs::File::create(&csv_path)?;
    let refs: Vec<(&str, &[eval::RateDistortionPoint])> =
        curves.iter().map(|(s, c)| (*s, c.as_slice())).collect();
    eval::write_dr_csv(file, &refs)?;
    for (split, points) in &curves {
        for p in points {
            println!(
                "{split}\t{}\t{:.5} bpp\t{:.3} dB",
                p.layers, p.bits_per_pixel, p.psnr_db
            );
        }
    }
    write_manifest(
        &manifest_path(&csv_path),
        json!({
            "command": "eval-dr",
            "model": args.model,
            "model_sha256": hex::encode(bundle.digest()),
            "input": args.input,
            "test_input": args.test_input,
            "split": split_json(&args.split),
            "sample": args.sample,
            "layer_grid": grid,
            "images": splits.iter().map(|(s, set)| (s.to_string(), set.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>())).collect::<BTreeMap<_, _>>(),
        }),
    )
}

fn cmd_denoise(args: DenoiseArgs) -> anyhow::Result<()> {
    let bundle = load_bundle(&args.model)?;
    let (pre, model) = (bundle.preprocess(), bundle.quantizer());
    let images = load_images(&args.input)?;
    let chosen = sample_indices((0..images.len()).collect(), args.sample, args.split_seed, 3);
    let set: Vec<&(String, ImageGray)> = chosen.iter().map(|&i| &images[i]).collect();
    if let Some(s) = args.sigma2.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        return Err(Error::InvalidArgument(format!("invalid noise variance {s}")).into());
    }
    fs::create_dir_all(&args.output)?;
    let grid = args.grid.resolve(model.depth());
    let mut rows = Vec::new();
    let mut summary = Vec::new();

    if args.noisy_input {
        let [sigma2] = args.sigma2[..] else {
            bail!("--noisy-input takes exactly one --sigma2");
        };
        let layers = args
            .layers
            .unwrap_or_else(|| eval::heuristic_layer(model, sigma2));
        if layers > model.depth() {
            return Err(Error::InvalidArgument(format!(
                "--layers {layers} exceeds model depth {}",
                model.depth()
            ))
            .into());
        }
        let opts = DenoiseOptions {
            grid: vec![layers],
            sigma2_hint: Some(sigma2),
            heuristic: false,
        };
        for (name, im) in &set {
            let (_, out) = eval::denoise(im, None, pre, model, &opts)?;
            pgm::write(args.output.join(name), &out[0])?;
        }
        println!("{} images denoised at {layers} layers", set.len());
        summary.push(json!({ "sigma2": sigma2, "layers": layers }));
    } else {
        for (s_idx, &sigma2) in args.sigma2.iter().enumerate() {
            let heuristic = eval::heuristic_layer(model, sigma2);
            let mut full = grid.clone();
            if !full.contains(&heuristic) {
                full.push(heuristic);
                full.sort_unstable();
            }
            let opts = DenoiseOptions {
                grid: full.clone(),
                sigma2_hint: Some(sigma2),
                heuristic: false,
            };
            let per_image = set
                .iter()
                .zip(&chosen)
                .map(|((_, clean), &i)| {
                    // one noise stream per image, shared across noise levels
                    let noisy = eval::add_noise(clean, sigma2, mix(args.noise_seed, i as u64))?;
                    eval::denoise(&noisy, Some(clean), pre, model, &opts).map(|r| r.0)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mean: Vec<f64> = (0..full.len())
                .map(|g| {
                    per_image.iter().map(|r| r.psnr_db[g]).sum::<f64>() / per_image.len() as f64
                })
                .collect();
            let best = (0..full.len())
                .filter(|&g| grid.contains(&full[g]))
                .fold(None, |b: Option<usize>, g| match b {
                    Some(b) if mean[b] >= mean[g] => Some(b),
                    _ => Some(g),
                })
                .expect("non-empty grid");
            for (g, &layers) in full.iter().enumerate() {
                rows.push(DenoiseRow {
                    sigma2,
                    layers,
                    psnr_db: mean[g],
                    is_best: g == best,
                    is_heuristic: layers == heuristic,
                });
            }
            println!(
                "sigma2 {sigma2}: best {} layers ({:.3} dB), heuristic {heuristic} layers ({:.3} dB)",
                full[best],
                mean[best],
                mean[full.iter().position(|&l| l == heuristic).expect("on grid")]
            );
            summary.push(json!({
                "sigma2": sigma2,
                "noise_stream": s_idx,
                "best_layer": full[best],
                "heuristic_layer": heuristic,
                "per_image_best_layer": per_image.iter().map(|r| r.best_layer).collect::<Vec<_>>(),
            }));
        }
        eval::write_denoise_csv(fs::File::create(args.output.join("denoise.csv"))?, &rows)?;
    }
    write_manifest(
        &args.output.join("denoise.manifest.json"),
        json!({
            "command": "denoise",
            "model": args.model,
            "model_sha256": hex::encode(bundle.digest()),
            "input": args.input,
            "images": set.iter().map(|(n, _)| n).collect::<Vec<_>>(),
            "sigma2": args.sigma2,
            "noise_seed": args.noise_seed,
            "split_seed": args.split_seed,
            "sample": args.sample,
            "layer_grid": grid,
            "noisy_input": args.noisy_input,
            "results": summary,
        }),
    )
}

fn cmd_synth(args: SynthArgs) -> anyhow::Result<()> {
    let mut cfg = SynthConfig::new(
        args.n_train,
        args.n_test,
        args.height,
        args.width,
        args.decay_alpha,
        args.seed,
    );
    if let Some(p) = args.pixel_std {
        cfg.pixel_std = p;
    }
    let corpus = eval::synth_corpus(&cfg)?;
    for (dir, set) in [("train", &corpus.train), ("test", &corpus.test)] {
        let path = args.output.join(dir);
        fs::create_dir_all(&path)?;
        let width = set.len().to_string().len().max(4);
        set.par_iter()
            .enumerate()
            .try_for_each(|(i, im)| pgm::write(path.join(format!("{i:0width$}.pgm")), im))?;
    }
    println!(
        "{} train and {} test images of {}x{} in {}",
        corpus.train.len(),
        corpus.test.len(),
        args.height,
        args.width,
        args.output.display()
    );
    write_manifest(
        &args.output.join("synth.manifest.json"),
        json!({
            "command": "synth",
            "n_train": cfg.n_train,
            "n_test": cfg.n_test,
            "height": cfg.height,
            "width": cfg.width,
            "decay_alpha": cfg.decay_alpha,
            "seed": cfg.seed,
            "subbands": cfg.subbands,
            "pixel_std": cfg.pixel_std,
            "mean_level": cfg.mean_level,
        }),
    )
}
