use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Layer, MultilayerGraph, SparseSymmetric, WeightOperator};

/// One layer of a multilayer stochastic block model.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmLayer {
    /// block of each class in this layer; `None` puts the class in no block,
    /// so all of its pairs use `p_out`
    pub partition: Vec<Option<usize>>,
    pub p_in: f64,
    pub p_out: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbmSpec {
    /// nodes per class; classes occupy consecutive node ranges
    pub class_sizes: Vec<usize>,
    pub layers: Vec<SbmLayer>,
    pub seed: u64,
    /// redraws allowed per layer when a node ends up isolated
    pub max_retries: usize,
}

impl SbmSpec {
    /// `layers` copies of the class partition with the same probabilities.
    pub fn uniform(
        class_sizes: Vec<usize>,
        layers: usize,
        p_in: f64,
        p_out: f64,
        seed: u64,
    ) -> Self {
        let m = class_sizes.len();
        let layer = SbmLayer {
            partition: (0..m).map(Some).collect(),
            p_in,
            p_out,
        };
        Self {
            class_sizes,
            layers: vec![layer; layers],
            seed,
            max_retries: 100,
        }
    }

    /// Layer `i` separates class `i` (block 0) from the union of all other classes (block 1).
    pub fn one_vs_rest(class_sizes: Vec<usize>, p_in: f64, p_out: f64, seed: u64) -> Self {
        let m = class_sizes.len();
        let layers = (0..m)
            .map(|i| SbmLayer {
                partition: (0..m).map(|c| Some(usize::from(c != i))).collect(),
                p_in,
                p_out,
            })
            .collect();
        Self {
            class_sizes,
            layers,
            seed,
            max_retries: 100,
        }
    }

    pub fn n(&self) -> usize {
        self.class_sizes.iter().sum()
    }

    pub fn truth(&self) -> Vec<usize> {
        self.class_sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &s)| std::iter::repeat_n(c, s))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.class_sizes.is_empty() || self.class_sizes.contains(&0) {
            return bad("every class needs at least one node".into());
        }
        if self.layers.is_empty() {
            return bad("SBM needs at least one layer".into());
        }
        for (l, layer) in self.layers.iter().enumerate() {
            if layer.partition.len() != self.class_sizes.len() {
                return bad(format!(
                    "layer {l} partition has {} entries for {} classes",
                    layer.partition.len(),
                    self.class_sizes.len()
                ));
            }
            for p in [layer.p_in, layer.p_out] {
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("layer {l} probability {p} outside [0, 1]"));
                }
            }
        }
        Ok(())
    }
}

fn draw_layer(
    rng: &mut ChaCha8Rng,
    blocks: &[Option<usize>],
    layer: &SbmLayer,
) -> (Vec<(usize, usize, f64)>, bool) {
    let n = blocks.len();
    let mut edges = Vec::new();
    let mut degree = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            let p = if blocks[i].is_some() && blocks[i] == blocks[j] {
                layer.p_in
            } else {
                layer.p_out
            };
            if rng.random_bool(p) {
                edges.push((i, j, 1.0));
                degree[i] += 1;
                degree[j] += 1;
            }
        }
    }
    let ok = degree.iter().all(|&d| d > 0);
    (edges, ok)
}

/// Draws a binary multilayer graph; returns it with the class of every node.
pub fn sbm_generate(spec: &SbmSpec) -> Result<(MultilayerGraph, Vec<usize>)> {
    spec.validate()?;
    let truth = spec.truth();
    let n = truth.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut layers = Vec::with_capacity(spec.layers.len());
    for (l, layer) in spec.layers.iter().enumerate() {
        let blocks: Vec<Option<usize>> = truth.iter().map(|&c| layer.partition[c]).collect();
        let mut attempt = 0;
        let edges = loop {
            let (edges, ok) = draw_layer(&mut rng, &blocks, layer);
            if ok {
                break edges;
            }
            attempt += 1;
            debug!("SBM layer {l}: isolated node in draw {attempt}, redrawing");
            if attempt > spec.max_retries {
                return Err(Error::Sbm(format!(
                    "layer {l} still has an isolated node after {} redraws",
                    spec.max_retries
                )));
            }
        };
        let w = SparseSymmetric::from_edges(n, edges)?;
        layers.push(Layer::new(WeightOperator::Sparse(w))?);
    }
    Ok((MultilayerGraph::new(layers)?, truth))
}
