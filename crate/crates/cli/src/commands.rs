//! The five subcommands.

use std::path::PathBuf;
use std::time::Instant;

use image::{GrayImage, Luma, Rgb, RgbImage};
use log::info;
use pmac::datapipe::{
    images_to_features, load_rgb_png, sample_label_mask, sbm_generate, LabelFraction, SbmLayer,
    SbmSpec,
};
use pmac::fastsum::{direct_apply, fastsum_apply, FastsumPlan, PointSet};
use pmac::kernel::{KernelFamily, KernelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{GroupConfig, RunConfig, SbmPreset, ScalingMode, VariantConfig};
use crate::error::{CliError, CliResult, Stage};
use crate::pipeline::{
    accuracies, class_count, classify, graph_from_features, load_graph, load_optional_classes,
    misclassification, resolve_labels, spectral_basis, Timings,
};
use crate::report::{
    aligned_table, csv_table, ensure_dir, matrix_csv, write_json, write_run, write_text, RunReport,
};

/// Everything a command needs besides its configuration section.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub seed: u64,
    pub out: PathBuf,
    pub threads: Option<usize>,
}

fn load_truth(cfg: &RunConfig, n: usize) -> CliResult<Option<Vec<Option<usize>>>> {
    let Some(path) = &cfg.input.truth else {
        return Ok(None);
    };
    let truth = load_optional_classes(path, "reading truth")?;
    if truth.len() != n {
        return Err(CliError::config(format!(
            "input.truth has {} rows for {n} nodes",
            truth.len()
        )));
    }
    Ok(Some(truth))
}

#[allow(clippy::too_many_arguments)]
fn run_report(
    ctx: &Context,
    command: &str,
    layers: usize,
    labels: &[Option<usize>],
    truth: Option<&[Option<usize>]>,
    m: usize,
    c: crate::pipeline::Classification,
    graph_time: f64,
) -> RunReport {
    let (accuracy, accuracy_unlabeled) = match truth {
        Some(t) => accuracies(&c.predictions, t, labels),
        None => (None, None),
    };
    RunReport {
        command: command.into(),
        seed: ctx.seed,
        nodes: labels.len(),
        classes: m,
        layers,
        labeled: labels.iter().flatten().count(),
        p: ctx.config.power.p,
        k: ctx.config.eig.k,
        eigenvalues: c.eigenvalues,
        iterations: c.iterations,
        converged: c.converged,
        accuracy,
        accuracy_unlabeled,
        misclassification: accuracy.map(|a| 1.0 - a),
        timings: Timings {
            graph: graph_time,
            total: graph_time + c.timings.total,
            ..c.timings
        },
        outputs: Vec::new(),
        config: ctx.config.clone(),
        predictions: c.predictions,
        scores: Some(c.scores),
    }
}

/// Builds the graph, classifies and writes predictions, scores and the report.
pub fn cmd_classify(ctx: &Context) -> CliResult<RunReport> {
    let cfg = &ctx.config;
    let t = Instant::now();
    let graph = load_graph(cfg)?;
    let graph_time = t.elapsed().as_secs_f64();
    let n = graph.n();
    let truth = load_truth(cfg, n)?;
    let labels = resolve_labels(cfg, n, truth.as_deref(), ctx.seed)?;
    let m = class_count(&labels, truth.as_deref());
    let c = classify(cfg, &graph, &labels, m, cfg.power.p, cfg.eig.k, ctx.seed)?;
    let report = run_report(
        ctx,
        "classify",
        graph.num_layers(),
        &labels,
        truth.as_deref(),
        m,
        c,
        graph_time,
    );
    write_run(&ctx.out, report)
}

const PALETTE: [[u8; 3]; 10] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [255, 225, 25],
    [145, 30, 180],
    [70, 240, 240],
    [245, 130, 48],
    [240, 50, 230],
    [128, 128, 128],
    [0, 0, 0],
];

fn image_groups(images: usize) -> Vec<GroupConfig> {
    let group = |columns: Vec<usize>, sigma_box: f64, per_component: bool| GroupConfig {
        columns,
        kernel: "gaussian".into(),
        sigma: None,
        sigma_box: Some(sigma_box),
        scaling: ScalingMode::FastsumBox,
        per_component,
    };
    vec![
        group(vec![0, 1, 2], 1.0, false),
        group(vec![3, 4], 4.0, images > 1),
    ]
}

/// Classifies the pixels of one or more images with `[r, g, b]` and `[x, y]`
/// layers and writes one mask per image and class plus a color composite.
pub fn cmd_segment_image(ctx: &Context) -> CliResult<RunReport> {
    let cfg = &ctx.config;
    if cfg.input.images.is_empty() {
        return Err(CliError::config("input.images: at least one PNG required"));
    }
    let t = Instant::now();
    let imgs = cfg
        .input
        .images
        .iter()
        .map(load_rgb_png)
        .collect::<pmac::Result<Vec<_>>>()
        .stage("reading images")?;
    let feats = images_to_features(&imgs).stage("image features")?;
    let graph = graph_from_features(
        cfg,
        &feats.combined(),
        &image_groups(imgs.len()),
        Some(&feats.components),
    )?;
    let graph_time = t.elapsed().as_secs_f64();
    let n = graph.n();
    let truth = load_truth(cfg, n)?;
    let labels = resolve_labels(cfg, n, truth.as_deref(), ctx.seed)?;
    let m = class_count(&labels, truth.as_deref());
    let c = classify(cfg, &graph, &labels, m, cfg.power.p, cfg.eig.k, ctx.seed)?;
    let mut report = run_report(
        ctx,
        "segment-image",
        graph.num_layers(),
        &labels,
        truth.as_deref(),
        m,
        c,
        graph_time,
    );

    ensure_dir(&ctx.out)?;
    let per_image = feats
        .split(&report.predictions)
        .expect("one prediction per pixel");
    for (img, (pred, shape)) in per_image.iter().zip(&feats.shapes).enumerate() {
        let (w, h) = (shape.width as u32, shape.height as u32);
        for class in 0..m {
            let mask = GrayImage::from_fn(w, h, |x, y| {
                Luma([if pred[(y * w + x) as usize] == class {
                    255
                } else {
                    0
                }])
            });
            let path = ctx
                .out
                .join(format!("mask_image{img}_class{}.png", class + 1));
            mask.save(&path)
                .map_err(|e| CliError::io("writing masks", format!("{}: {e}", path.display())))?;
            report.outputs.push(path);
        }
        let comp = RgbImage::from_fn(w, h, |x, y| {
            Rgb(PALETTE[pred[(y * w + x) as usize] % PALETTE.len()])
        });
        let path = ctx.out.join(format!("segmentation_image{img}.png"));
        comp.save(&path)
            .map_err(|e| CliError::io("writing masks", format!("{}: {e}", path.display())))?;
        report.outputs.push(path);
    }
    write_run(&ctx.out, report)
}

#[derive(Debug, Clone, Serialize)]
pub struct EigReport {
    pub nodes: usize,
    pub layers: usize,
    pub p: f64,
    pub k: usize,
    pub eigenvalues: Vec<f64>,
    pub seconds: f64,
    pub outputs: Vec<PathBuf>,
    pub config: RunConfig,
}

/// Writes the `k` smallest eigenvalues (ascending) and optionally the eigenvectors.
pub fn cmd_eig(ctx: &Context) -> CliResult<EigReport> {
    let cfg = &ctx.config;
    let graph = load_graph(cfg)?;
    let t = Instant::now();
    let basis = spectral_basis(cfg, &graph, cfg.power.p, cfg.eig.k, ctx.seed)?;
    let seconds = t.elapsed().as_secs_f64();
    ensure_dir(&ctx.out)?;
    let mut outputs = Vec::new();
    let values: Vec<f64> = basis.values.iter().copied().collect();
    let path = ctx.out.join("eigenvalues.csv");
    let mut text = String::from("eigenvalue\n");
    for v in &values {
        text += &format!("{v}\n");
    }
    write_text(&path, &text)?;
    outputs.push(path);
    if cfg.eig.write_vectors {
        let path = ctx.out.join("eigenvectors.csv");
        write_text(&path, &matrix_csv(&basis.vectors))?;
        outputs.push(path);
    }
    let json = ctx.out.join("eig.json");
    outputs.push(json.clone());
    let report = EigReport {
        nodes: graph.n(),
        layers: graph.num_layers(),
        p: cfg.power.p,
        k: cfg.eig.k,
        eigenvalues: values,
        seconds,
        outputs,
        config: cfg.clone(),
    };
    write_json(&json, &report)?;
    Ok(report)
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BenchRow {
    pub variant: String,
    pub p: f64,
    /// misclassification over all nodes, in percent
    pub mean_error: f64,
    pub std_error: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SbmBenchReport {
    pub rows: Vec<BenchRow>,
    pub seconds: f64,
    pub outputs: Vec<PathBuf>,
    pub config: RunConfig,
}

impl SbmBenchReport {
    pub fn row(&self, variant: &str, p: f64) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.variant == variant && r.p == p)
    }
}

struct SbmSetup {
    classes: Vec<usize>,
    layers: Vec<SbmLayer>,
    variants: Vec<VariantConfig>,
    p_values: Vec<f64>,
}

fn variant(name: &str, layers: &[usize]) -> VariantConfig {
    VariantConfig {
        name: name.into(),
        layers: layers.to_vec(),
    }
}

fn sbm_setup(cfg: &RunConfig) -> CliResult<SbmSetup> {
    let b = &cfg.bench;
    let uniform = |p_in, p_out| SbmLayer {
        partition: vec![Some(0), Some(1)],
        p_in,
        p_out,
    };
    let mut s = match b.preset {
        SbmPreset::TwoLayer | SbmPreset::TwoLayerNoisy => SbmSetup {
            classes: vec![50, 50],
            layers: vec![
                uniform(0.7, 0.3),
                if b.preset == SbmPreset::TwoLayer {
                    uniform(0.7, 0.3)
                } else {
                    uniform(0.5, 0.5)
                },
            ],
            variants: vec![variant("full", &[0, 1])],
            p_values: vec![-20.0, 1.0, 10.0],
        },
        SbmPreset::ThreeLayer => {
            let spec = SbmSpec::one_vs_rest(vec![50, 50, 50], 0.7, 0.3, 0);
            SbmSetup {
                classes: spec.class_sizes,
                layers: spec.layers,
                variants: vec![
                    variant("L1", &[0]),
                    variant("L2", &[1]),
                    variant("L3", &[2]),
                    variant("L12", &[0, 1]),
                    variant("L13", &[0, 2]),
                    variant("L23", &[1, 2]),
                    variant("full", &[0, 1, 2]),
                ],
                p_values: vec![10.0, 5.0, 1.0, -1.0, -5.0, -10.0, -20.0],
            }
        }
    };
    if !b.classes.is_empty() {
        s.classes = b.classes.clone();
    }
    if !b.layers.is_empty() {
        s.layers = b
            .layers
            .iter()
            .map(|l| SbmLayer {
                partition: l
                    .partition
                    .iter()
                    .map(|&c| usize::try_from(c).ok())
                    .collect(),
                p_in: l.p_in,
                p_out: l.p_out,
            })
            .collect();
        if b.variants.is_empty() {
            s.variants = vec![variant("full", &(0..s.layers.len()).collect::<Vec<_>>())];
        }
    }
    if !b.variants.is_empty() {
        s.variants = b.variants.clone();
    }
    if !b.p_values.is_empty() {
        s.p_values = b.p_values.clone();
    }
    for v in &s.variants {
        if v.layers.is_empty() || v.layers.iter().any(|&l| l >= s.layers.len()) {
            return Err(CliError::config(format!(
                "bench.variants '{}' refers to missing layers",
                v.name
            )));
        }
    }
    Ok(s)
}

/// Error (in percent) of every variant and power on one SBM draw.
fn sbm_rep(cfg: &RunConfig, setup: &SbmSetup, seed: u64, k: usize) -> CliResult<Vec<f64>> {
    let spec = SbmSpec {
        class_sizes: setup.classes.clone(),
        layers: setup.layers.clone(),
        seed,
        max_retries: 100,
    };
    spec.validate()
        .map_err(|e| CliError::config(format!("bench: {e}")))?;
    let (graph, truth) = sbm_generate(&spec).stage("sbm generation")?;
    let fraction = LabelFraction::Uniform(cfg.bench.label_fraction);
    let labels = sample_label_mask(&truth, &fraction, seed ^ 0x1abe1)
        .map_err(|e| CliError::config(format!("bench.label_fraction: {e}")))?;
    let m = setup.classes.len();
    let mut out = Vec::new();
    for v in &setup.variants {
        let sub = graph.select(&v.layers).stage("sbm generation")?;
        let mut single = None;
        for &p in &setup.p_values {
            // a single layer is compared through its plain normalized Laplacian at every p
            let err = match (v.layers.len(), single) {
                (1, Some(e)) => e,
                _ => {
                    let pp = if v.layers.len() == 1 { 1.0 } else { p };
                    let c = classify(cfg, &sub, &labels, m, pp, k, seed)?;
                    misclassification(&c.predictions, &truth) * 100.0
                }
            };
            if v.layers.len() == 1 {
                single = Some(err);
            }
            out.push(err);
        }
    }
    Ok(out)
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::config(format!("--threads: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Mean and standard deviation of the misclassification over `reps` seeded SBM draws.
pub fn cmd_sbm_bench(ctx: &Context) -> CliResult<SbmBenchReport> {
    let cfg = &ctx.config;
    let setup = sbm_setup(cfg)?;
    let reps = cfg.bench.reps.unwrap_or(100);
    if reps == 0 {
        return Err(CliError::config("bench.reps must be at least 1"));
    }
    let k = cfg.bench.k.unwrap_or(setup.classes.len());
    let t = Instant::now();
    let results: Vec<CliResult<Vec<f64>>> = with_pool(ctx.threads, || {
        (0..reps as u64)
            .into_par_iter()
            .map(|r| sbm_rep(cfg, &setup, ctx.seed.wrapping_add(r), k))
            .collect()
    })?;
    let results = results.into_iter().collect::<CliResult<Vec<_>>>()?;
    let seconds = t.elapsed().as_secs_f64();
    let mut rows = Vec::new();
    let mut col = 0;
    for v in &setup.variants {
        for &p in &setup.p_values {
            let errs: Vec<f64> = results.iter().map(|r| r[col]).collect();
            let (mean, std) = mean_std(&errs);
            rows.push(BenchRow {
                variant: v.name.clone(),
                p,
                mean_error: mean,
                std_error: std,
                reps,
            });
            col += 1;
        }
    }
    info!("sbm-bench: {reps} repetitions in {seconds:.1} s");
    let header = ["variant", "p", "mean_error_pct", "std_error_pct", "reps"];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.variant.clone(),
                r.p.to_string(),
                format!("{:.4}", r.mean_error),
                format!("{:.4}", r.std_error),
                r.reps.to_string(),
            ]
        })
        .collect();
    ensure_dir(&ctx.out)?;
    let csv = ctx.out.join("sbm_bench.csv");
    let txt = ctx.out.join("sbm_bench.txt");
    let json = ctx.out.join("sbm_bench.json");
    write_text(&csv, &csv_table(&header, &cells))?;
    let table = aligned_table(&header, &cells);
    write_text(&txt, &table)?;
    println!("{table}");
    let report = SbmBenchReport {
        rows,
        seconds,
        outputs: vec![csv, txt, json.clone()],
        config: cfg.clone(),
    };
    write_json(&json, &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FastsumRow {
    pub d: usize,
    pub sigma: f64,
    pub n: usize,
    /// median seconds of one fast product
    pub fast_seconds: f64,
    /// median seconds of one direct product, when run
    pub direct_seconds: Option<f64>,
    pub rel_error: Option<f64>,
    /// fast time over the fast time of the previous size in the sweep
    pub time_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FastsumBenchReport {
    pub rows: Vec<FastsumRow>,
    pub outputs: Vec<PathBuf>,
    pub config: RunConfig,
}

/// Median wall time of `reps` calls.
pub fn median_seconds<T>(reps: usize, mut f: impl FnMut() -> T) -> (f64, T) {
    let mut times = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps.max(1) {
        let t = Instant::now();
        last = Some(f());
        times.push(t.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    (
        times[times.len() / 2],
        last.expect("at least one repetition"),
    )
}

/// Uniform random points in the fast summation box and a random coefficient vector.
pub fn random_problem(n: usize, d: usize, eps_b: f64, seed: u64) -> (PointSet, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = PointSet::box_bound(eps_b);
    let coords: Vec<f64> = (0..n * d).map(|_| rng.random_range(-b..=b)).collect();
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    (PointSet::new(coords, d).expect("finite"), v)
}

pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Fast versus direct kernel products over a sweep of sizes.
pub fn cmd_fastsum_bench(ctx: &Context) -> CliResult<FastsumBenchReport> {
    let cfg = &ctx.config;
    let fb = &cfg.bench.fastsum;
    let reps = cfg.bench.reps.unwrap_or(5);
    let family: KernelFamily = fb
        .kernel
        .parse()
        .map_err(|e: pmac::Error| CliError::config(format!("bench.fastsum.kernel: {e}")))?;
    let params = cfg.fastsum_params();
    let mut rows = Vec::new();
    for &d in &fb.dims {
        for &sigma in &fb.sigmas {
            let kernel = KernelSpec::new(family, sigma)
                .map_err(|e| CliError::config(format!("bench.fastsum.sigmas: {e}")))?;
            let plan = FastsumPlan::new(kernel, d, params)
                .map_err(|e| CliError::config(format!("fastsum: {e}")))?;
            let mut prev: Option<f64> = None;
            for &n in &fb.sizes {
                let (points, v) = random_problem(n, d, params.eps_b, ctx.seed ^ n as u64);
                let (fast_seconds, fast) =
                    median_seconds(reps, || fastsum_apply(&points, &v, &plan));
                let fast = fast.stage("fast summation")?;
                let (direct_seconds, rel_error) = if n <= fb.direct_max_n {
                    let (secs, exact) = median_seconds(reps, || direct_apply(&points, &v, &kernel));
                    (
                        Some(secs),
                        Some(rel_l2(&fast, &exact.stage("direct summation")?)),
                    )
                } else {
                    (None, None)
                };
                info!("fastsum-bench d={d} sigma={sigma} n={n}: fast {fast_seconds:.4} s");
                rows.push(FastsumRow {
                    d,
                    sigma,
                    n,
                    fast_seconds,
                    direct_seconds,
                    rel_error,
                    time_ratio: prev.map(|p| fast_seconds / p),
                });
                prev = Some(fast_seconds);
            }
        }
    }
    let opt = |x: Option<f64>, prec: usize| x.map_or(String::new(), |v| format!("{v:.prec$e}"));
    let header = [
        "d",
        "sigma",
        "n",
        "fast_s",
        "direct_s",
        "rel_error",
        "time_ratio",
    ];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.d.to_string(),
                r.sigma.to_string(),
                r.n.to_string(),
                format!("{:.4e}", r.fast_seconds),
                opt(r.direct_seconds, 4),
                opt(r.rel_error, 3),
                r.time_ratio.map_or(String::new(), |v| format!("{v:.3}")),
            ]
        })
        .collect();
    ensure_dir(&ctx.out)?;
    let csv = ctx.out.join("fastsum_bench.csv");
    let json = ctx.out.join("fastsum_bench.json");
    write_text(&csv, &csv_table(&header, &cells))?;
    println!("{}", aligned_table(&header, &cells));
    let report = FastsumBenchReport {
        rows,
        outputs: vec![csv, json.clone()],
        config: cfg.clone(),
    };
    write_json(&json, &report)?;
    Ok(report)
}
