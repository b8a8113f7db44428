//! Graph construction, label resolution and the eigenbasis plus Allen-Cahn classifier.

use std::path::Path;
use std::time::Instant;

use log::info;
use pmac::allencahn::{allen_cahn_solve, predict_labels, LabelData, ScoreMatrix};
use pmac::datapipe::{
    feature_group, load_class_csv, sample_label_mask, FeatureGroup, FeatureMatrix, GroupScaling,
    GroupingSpec, LabelFraction,
};
use pmac::graph::{load_edge_list, Layer, MultilayerGraph};
use pmac::kernel::{KernelFamily, KernelSpec};
use pmac::powermean::{power_mean_eigs, SpectralBasis};
use serde::Serialize;

use crate::config::{GroupConfig, RunConfig, ScalingMode};
use crate::error::{CliError, CliResult, ErrorKind, Stage};

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timings {
    pub graph: f64,
    pub eig: f64,
    pub allen_cahn: f64,
    pub total: f64,
}

/// Class ids read from a 1-based file, 0 meaning none.
pub fn load_optional_classes(path: &Path, what: &str) -> CliResult<Vec<Option<usize>>> {
    let raw = load_class_csv(path).stage(what)?;
    raw.iter()
        .enumerate()
        .map(|(i, &c)| match c {
            0 => Ok(None),
            c if c > 0 => Ok(Some(c as usize - 1)),
            c => Err(CliError::io(
                what,
                format!("{}: row {i} has negative class id {c}", path.display()),
            )),
        })
        .collect()
}

fn group_spec(
    cfg: &RunConfig,
    x: &FeatureMatrix,
    groups: &[GroupConfig],
) -> CliResult<GroupingSpec> {
    let mut out = Vec::with_capacity(groups.len());
    for (g, gc) in groups.iter().enumerate() {
        let family: KernelFamily = gc.kernel.parse().map_err(|e: pmac::Error| {
            CliError::config(format!("grouping.groups[{g}].kernel: {e}"))
        })?;
        let sigma = match (gc.sigma, gc.sigma_box) {
            (Some(s), None) => s,
            (None, sb) => {
                // relative to the group centered and scaled into [-1, 1]
                let cols = x.columns(&gc.columns).stage("grouping")?;
                let half = cols
                    .column_iter()
                    .map(|c| (c.max() - c.min()) / 2.0)
                    .fold(0.0, f64::max);
                sb.unwrap_or(1.0) * if half > 0.0 { half } else { 1.0 }
            }
            (Some(_), Some(_)) => {
                return Err(CliError::config(format!(
                    "grouping.groups[{g}]: give either sigma or sigma_box, not both"
                )))
            }
        };
        let kernel = KernelSpec::new(family, sigma)
            .map_err(|e| CliError::config(format!("grouping.groups[{g}]: {e}")))?;
        let scaling = match gc.scaling {
            ScalingMode::FastsumBox => GroupScaling::FastsumBox,
            ScalingMode::UnitBox => GroupScaling::UnitBox,
            ScalingMode::None => GroupScaling::None,
        };
        out.push(
            FeatureGroup::new(gc.columns.clone(), kernel, scaling).per_component(gc.per_component),
        );
    }
    let mut spec = GroupingSpec::new(out);
    spec.fastsum = cfg.fastsum_params();
    spec.materialize_limit = cfg.grouping.materialize_limit;
    Ok(spec)
}

/// Default grouping: everything in one group, fast summation when at most three columns.
pub fn default_feature_groups(d: usize) -> Vec<GroupConfig> {
    vec![GroupConfig {
        columns: (0..d).collect(),
        kernel: "gaussian".into(),
        sigma: None,
        sigma_box: Some(1.0),
        scaling: if d <= 3 {
            ScalingMode::FastsumBox
        } else {
            ScalingMode::None
        },
        per_component: false,
    }]
}

/// Kernel layers from feature groups.
pub fn graph_from_features(
    cfg: &RunConfig,
    x: &FeatureMatrix,
    default_groups: &[GroupConfig],
    components: Option<&[usize]>,
) -> CliResult<MultilayerGraph> {
    let groups = if cfg.grouping.groups.is_empty() {
        default_groups
    } else {
        &cfg.grouping.groups
    };
    let spec = group_spec(cfg, x, groups)?;
    Ok(feature_group(x, &spec, components)
        .stage("graph construction")?
        .graph)
}

/// Graph from `input.features` or `input.edge_lists`.
pub fn load_graph(cfg: &RunConfig) -> CliResult<MultilayerGraph> {
    let i = &cfg.input;
    match (&i.features, i.edge_lists.is_empty()) {
        (Some(path), true) => {
            let x = pmac::datapipe::load_features_csv(path).stage("reading features")?;
            graph_from_features(cfg, &x, &default_feature_groups(x.d()), None)
        }
        (None, false) => {
            let mut n = i.nodes;
            let mut weights = Vec::new();
            for path in &i.edge_lists {
                let w = load_edge_list(path, n).stage("reading edge list")?;
                n = Some(w.n());
                weights.push(w);
            }
            let layers = weights
                .into_iter()
                .map(Layer::new)
                .collect::<pmac::Result<Vec<_>>>()
                .stage("graph construction")?;
            MultilayerGraph::new(layers).stage("graph construction")
        }
        (Some(_), false) => Err(CliError::config(
            "input: give either features or edge_lists, not both",
        )),
        (None, true) => Err(CliError::config("input: features or edge_lists required")),
    }
}

/// Known labels from `input.labels`, or drawn from the ground truth with `input.label_fraction`.
pub fn resolve_labels(
    cfg: &RunConfig,
    n: usize,
    truth: Option<&[Option<usize>]>,
    seed: u64,
) -> CliResult<Vec<Option<usize>>> {
    if let Some(path) = &cfg.input.labels {
        let labels = load_optional_classes(path, "reading labels")?;
        if labels.len() != n {
            return Err(CliError::config(format!(
                "input.labels has {} rows for {n} nodes",
                labels.len()
            )));
        }
        return Ok(labels);
    }
    let (Some(fraction), Some(truth)) = (cfg.input.label_fraction, truth) else {
        return Err(CliError::config(
            "input: give labels, or truth together with label_fraction",
        ));
    };
    let known: Vec<usize> = (0..n).filter(|&i| truth[i].is_some()).collect();
    let sub: Vec<usize> = known.iter().map(|&i| truth[i].unwrap()).collect();
    let mask = sample_label_mask(&sub, &LabelFraction::Uniform(fraction), seed)
        .map_err(|e| CliError::config(format!("input.label_fraction: {e}")))?;
    let mut out = vec![None; n];
    for (k, &i) in known.iter().enumerate() {
        out[i] = mask[k];
    }
    Ok(out)
}

/// Number of classes seen in labels or truth.
pub fn class_count(labels: &[Option<usize>], truth: Option<&[Option<usize>]>) -> usize {
    let top = labels.iter().chain(truth.unwrap_or(&[])).flatten().max();
    top.map_or(0, |&c| c + 1)
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub eigenvalues: Vec<f64>,
    pub scores: ScoreMatrix,
    pub predictions: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    pub timings: Timings,
}

pub fn spectral_basis(
    cfg: &RunConfig,
    graph: &MultilayerGraph,
    p: f64,
    k: usize,
    seed: u64,
) -> CliResult<SpectralBasis> {
    if k == 0 || k >= graph.n() {
        return Err(CliError {
            kind: ErrorKind::Config,
            stage: "eigensolver".into(),
            message: format!("need 1 <= k < n, got k = {k} for n = {}", graph.n()),
        });
    }
    let pm = cfg.power_mean_config(p, seed)?;
    power_mean_eigs(graph, &pm, k, cfg.eig.tol).stage("eigensolver")
}

/// Eigenbasis, Allen-Cahn iteration and argmax prediction.
pub fn classify(
    cfg: &RunConfig,
    graph: &MultilayerGraph,
    labels: &[Option<usize>],
    m: usize,
    p: f64,
    k: usize,
    seed: u64,
) -> CliResult<Classification> {
    let params = cfg.allen_cahn_params()?;
    let data = LabelData::from_labels(labels, m, params.omega0)
        .map_err(|e| CliError::config(format!("labels: {e}")))?;
    if data.n() != graph.n() {
        return Err(CliError::config(format!(
            "{} labels for {} nodes",
            data.n(),
            graph.n()
        )));
    }
    let t = Instant::now();
    let basis = spectral_basis(cfg, graph, p, k, seed)?;
    let eig = t.elapsed().as_secs_f64();
    info!("eigenvalues {:?}", basis.values.as_slice());
    let t = Instant::now();
    let result = allen_cahn_solve(&basis, &data, &params).stage("allen-cahn")?;
    let ac = t.elapsed().as_secs_f64();
    info!(
        "allen-cahn: {} iterations, converged = {}",
        result.iterations, result.converged
    );
    Ok(Classification {
        eigenvalues: basis.values.iter().copied().collect(),
        predictions: predict_labels(&result.scores),
        scores: result.scores,
        iterations: result.iterations,
        converged: result.converged,
        timings: Timings {
            graph: 0.0,
            eig,
            allen_cahn: ac,
            total: eig + ac,
        },
    })
}

/// Accuracy over nodes with known truth, and over those among them that were not labeled.
pub fn accuracies(
    pred: &[usize],
    truth: &[Option<usize>],
    labels: &[Option<usize>],
) -> (Option<f64>, Option<f64>) {
    let mut all = (0usize, 0usize);
    let mut unl = (0usize, 0usize);
    for i in 0..pred.len() {
        if let Some(t) = truth[i] {
            let hit = usize::from(pred[i] == t);
            all = (all.0 + hit, all.1 + 1);
            if labels[i].is_none() {
                unl = (unl.0 + hit, unl.1 + 1);
            }
        }
    }
    let ratio = |(a, b): (usize, usize)| (b > 0).then(|| a as f64 / b as f64);
    (ratio(all), ratio(unl))
}

/// Misclassification rate over all nodes.
pub fn misclassification(pred: &[usize], truth: &[usize]) -> f64 {
    let wrong = pred.iter().zip(truth).filter(|(a, b)| a != b).count();
    wrong as f64 / truth.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_split() {
        let pred = [0, 1, 1, 0];
        let truth = [Some(0), Some(1), Some(0), None];
        let labels = [Some(0), None, None, None];
        let (a, u) = accuracies(&pred, &truth, &labels);
        assert_eq!(a, Some(2.0 / 3.0));
        assert_eq!(u, Some(0.5));
        assert_eq!(misclassification(&[0, 1], &[0, 0]), 0.5);
    }

    #[test]
    fn labels_drawn_only_from_known_truth() {
        let mut cfg = RunConfig::default();
        cfg.input.label_fraction = Some(1.0);
        let truth = vec![Some(0), None, Some(1), None];
        let l = resolve_labels(&cfg, 4, Some(&truth), 1).unwrap();
        assert_eq!(l, truth);
        assert_eq!(class_count(&l, Some(&truth)), 2);
        cfg.input.label_fraction = None;
        assert!(resolve_labels(&cfg, 4, Some(&truth), 1).is_err());
    }
}
