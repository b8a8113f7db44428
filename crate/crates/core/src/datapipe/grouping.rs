use std::ops::Range;
use std::sync::Arc;

use log::info;
use nalgebra::DMatrix;

use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::fastsum::{FastsumParams, FastsumPlan, PointSet};
use crate::graph::{KernelWeights, Layer, MultilayerGraph, WeightOperator};
use crate::kernel::KernelSpec;

/// How a group's columns are mapped before kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupScaling {
    /// into the fast summation box `|x| <= 1/4 - eps_b/2`, with a plan attached
    FastsumBox,
    /// into `[-1, 1]`, evaluated directly
    UnitBox,
    /// raw features, evaluated directly
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGroup {
    pub columns: Vec<usize>,
    /// kernel with its scale in the units of the raw features
    pub kernel: KernelSpec,
    pub scaling: GroupScaling,
    /// zero the weights between rows of different components
    pub per_component: bool,
}

impl FeatureGroup {
    pub fn new(columns: Vec<usize>, kernel: KernelSpec, scaling: GroupScaling) -> Self {
        Self {
            columns,
            kernel,
            scaling,
            per_component: false,
        }
    }

    pub fn per_component(mut self, yes: bool) -> Self {
        self.per_component = yes;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupingSpec {
    pub groups: Vec<FeatureGroup>,
    pub fastsum: FastsumParams,
    /// direct kernel layers with at most this many nodes are stored as dense matrices
    pub materialize_limit: usize,
}

impl GroupingSpec {
    pub fn new(groups: Vec<FeatureGroup>) -> Self {
        Self {
            groups,
            fastsum: FastsumParams::default(),
            materialize_limit: 2048,
        }
    }

    pub fn validate(&self, width: usize) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::InvalidArgument("grouping has no groups".into()));
        }
        let mut used = vec![false; width];
        for (g, group) in self.groups.iter().enumerate() {
            if group.columns.is_empty() {
                return Err(Error::InvalidArgument(format!("group {g} is empty")));
            }
            if group.scaling == GroupScaling::FastsumBox && group.columns.len() > 3 {
                return Err(Error::InvalidArgument(format!(
                    "group {g} has {} columns; fast summation supports at most 3",
                    group.columns.len()
                )));
            }
            for &c in &group.columns {
                if c >= width {
                    return Err(Error::InvalidArgument(format!(
                        "group {g} uses column {c} of a {width}-column matrix"
                    )));
                }
                if std::mem::replace(&mut used[c], true) {
                    return Err(Error::InvalidArgument(format!(
                        "column {c} appears in more than one group"
                    )));
                }
            }
        }
        let dropped = used.iter().filter(|u| !**u).count();
        if dropped > 0 {
            info!("{dropped} feature columns are not in any group and are ignored");
        }
        Ok(())
    }
}

/// Result of an isotropic centering and scaling: `scaled = (x - center) * factor`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledGroup {
    pub points: DMatrix<f64>,
    pub center: Vec<f64>,
    pub factor: f64,
}

fn scale_into(x: &DMatrix<f64>, bound: f64) -> Result<ScaledGroup> {
    if let Some(k) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("feature entry {k}")));
    }
    let (n, d) = x.shape();
    let mut center = vec![0.0; d];
    let mut half = 0.0f64;
    for (j, col) in x.column_iter().enumerate() {
        if n == 0 {
            break;
        }
        let lo = col.min();
        let hi = col.max();
        center[j] = lo + (hi - lo) / 2.0;
        half = half.max((hi - lo) / 2.0);
    }
    let factor = if half > 0.0 { bound / half } else { 1.0 };
    let points = DMatrix::from_fn(n, d, |i, j| {
        ((x[(i, j)] - center[j]) * factor).clamp(-bound, bound)
    });
    Ok(ScaledGroup {
        points,
        center,
        factor,
    })
}

/// Centers every column at the midpoint of its range and applies one common
/// factor so that all coordinates satisfy `|x| <= 1/4 - eps_b/2`.
pub fn scale_for_fastsum(x: &DMatrix<f64>, eps_b: f64) -> Result<ScaledGroup> {
    scale_into(x, PointSet::box_bound(eps_b))
}

/// Multilayer graph built from feature groups, with the per-group scale factors.
#[derive(Debug, Clone)]
pub struct GroupedGraph {
    pub graph: MultilayerGraph,
    /// multiplier from raw to scaled coordinates, 1 for unscaled groups
    pub factors: Vec<f64>,
    /// kernels as applied to the scaled coordinates
    pub kernels: Vec<KernelSpec>,
}

fn component_blocks(components: &[usize]) -> Result<Vec<Range<usize>>> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 1..=components.len() {
        if i == components.len() || components[i] != components[i - 1] {
            if i < components.len() && components[i] < components[i - 1] {
                return Err(Error::InvalidArgument(
                    "component indices must be nondecreasing".into(),
                ));
            }
            blocks.push(start..i);
            start = i;
        }
    }
    Ok(blocks)
}

/// One kernel layer per group, in group order.
pub fn feature_group(
    x: &FeatureMatrix,
    spec: &GroupingSpec,
    components: Option<&[usize]>,
) -> Result<GroupedGraph> {
    spec.validate(x.d())?;
    let n = x.n();
    if let Some(c) = components {
        if c.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.len(),
            });
        }
    }
    let mut layers = Vec::with_capacity(spec.groups.len());
    let mut factors = Vec::with_capacity(spec.groups.len());
    let mut kernels = Vec::with_capacity(spec.groups.len());
    for group in &spec.groups {
        let raw = x.columns(&group.columns)?;
        let (coords, factor) = match group.scaling {
            GroupScaling::FastsumBox => {
                let s = scale_for_fastsum(&raw, spec.fastsum.eps_b)?;
                (s.points, s.factor)
            }
            GroupScaling::UnitBox => {
                let s = scale_into(&raw, 1.0)?;
                (s.points, s.factor)
            }
            GroupScaling::None => (raw, 1.0),
        };
        let kernel = group.kernel.rescaled(factor)?;
        let d = coords.ncols();
        let flat: Vec<f64> = coords.transpose().iter().copied().collect();
        let points = PointSet::new(flat, d)?;
        let plan = match group.scaling {
            GroupScaling::FastsumBox => Some(Arc::new(FastsumPlan::new(kernel, d, spec.fastsum)?)),
            _ => None,
        };
        let blocks = match (group.per_component, components) {
            (true, Some(c)) => component_blocks(c)?,
            _ => vec![0..n],
        };
        let fast = plan.is_some();
        let kw = KernelWeights::with_blocks(points, kernel, plan, blocks)?;
        let weights = if !fast && n <= spec.materialize_limit {
            WeightOperator::dense(WeightOperator::Kernel(kw).to_dense())?
        } else {
            WeightOperator::Kernel(kw)
        };
        layers.push(Layer::new(weights)?);
        factors.push(factor);
        kernels.push(kernel);
    }
    Ok(GroupedGraph {
        graph: MultilayerGraph::new(layers)?,
        factors,
        kernels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fastsum::direct_apply;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_features(n: usize, d: usize, seed: u64, scale: f64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FeatureMatrix::new(DMatrix::from_fn(n, d, |_, _| rng.random_range(0.0..scale))).unwrap()
    }

    #[test]
    fn endpoints_and_constant_columns() {
        let eps = 1.0 / 16.0;
        let b = PointSet::box_bound(eps);
        let x = DMatrix::from_column_slice(3, 2, &[0.0, 255.0, 100.0, 7.0, 7.0, 7.0]);
        let s = scale_for_fastsum(&x, eps).unwrap();
        assert!((s.points[(0, 0)] + b).abs() < 1e-15);
        assert!((s.points[(1, 0)] - b).abs() < 1e-15);
        assert!(s.points.column(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn isotropic_aspect_ratio() {
        let eps = 1.0 / 16.0;
        let b = PointSet::box_bound(eps);
        let x = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 10.0, 2.0, 4.0, 1.0]);
        let s = scale_for_fastsum(&x, eps).unwrap();
        assert!((s.points.column(0).amax() - b).abs() < 1e-15);
        assert!(s.points.column(1).amax() < b);
        let ratio = (s.points[(1, 1)] - s.points[(0, 1)]) / (s.points[(1, 0)] - s.points[(0, 0)]);
        assert!((ratio - 0.2).abs() < 1e-14);
    }

    #[test]
    fn identity_grouping_matches_direct_kernel() {
        let fm = random_features(40, 2, 1, 3.0);
        let k = KernelSpec::gaussian(1.5).unwrap();
        let spec = GroupingSpec::new(vec![FeatureGroup::new(vec![0, 1], k, GroupScaling::None)]);
        let g = feature_group(&fm, &spec, None).unwrap();
        let w = g.graph.layers()[0].weights().to_dense();
        for i in 0..40 {
            for j in 0..40 {
                let a: Vec<f64> = fm.matrix().row(i).iter().copied().collect();
                let b: Vec<f64> = fm.matrix().row(j).iter().copied().collect();
                let expect = if i == j { 0.0 } else { k.eval_pair(&a, &b) };
                assert!((w[(i, j)] - expect).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn fastsum_box_layer_matches_original_units() {
        let fm = random_features(80, 5, 2, 255.0);
        let rgb = KernelSpec::gaussian(90.0).unwrap();
        let xy = KernelSpec::gaussian(60.0).unwrap();
        let spec = GroupingSpec::new(vec![
            FeatureGroup::new(vec![0, 1, 2], rgb, GroupScaling::FastsumBox),
            FeatureGroup::new(vec![3, 4], xy, GroupScaling::FastsumBox),
        ]);
        let g = feature_group(&fm, &spec, None).unwrap();
        assert_eq!(g.graph.num_layers(), 2);
        for (l, (cols, k)) in [(vec![0, 1, 2], rgb), (vec![3, 4], xy)]
            .into_iter()
            .enumerate()
        {
            let layer = &g.graph.layers()[l];
            assert!(layer.weights().is_fast());
            let w = layer.weights().to_dense();
            for i in 0..80 {
                for j in 0..i {
                    let a: Vec<f64> = cols.iter().map(|&c| fm.matrix()[(i, c)]).collect();
                    let b: Vec<f64> = cols.iter().map(|&c| fm.matrix()[(j, c)]).collect();
                    assert!((w[(i, j)] - k.eval_pair(&a, &b)).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn many_layers_and_component_blocks() {
        let fm = random_features(30, 104, 3, 1.0);
        let k = KernelSpec::gaussian(0.5).unwrap();
        let mut groups: Vec<FeatureGroup> = (0..51)
            .map(|b| FeatureGroup::new(vec![2 * b, 2 * b + 1], k, GroupScaling::None))
            .collect();
        groups.push(FeatureGroup::new(vec![102, 103], k, GroupScaling::None).per_component(true));
        let comps: Vec<usize> = (0..30).map(|i| i / 15).collect();
        let g = feature_group(&fm, &GroupingSpec::new(groups), Some(&comps)).unwrap();
        assert_eq!(g.graph.num_layers(), 52);
        let w = g.graph.layers()[51].weights().to_dense();
        assert_eq!(w[(0, 20)], 0.0);
        assert!(w[(0, 10)] > 0.0);
        assert!(g.graph.layers()[0].weights().to_dense()[(0, 20)] > 0.0);
    }

    #[test]
    fn bad_groupings() {
        let fm = random_features(10, 4, 4, 1.0);
        let k = KernelSpec::gaussian(0.5).unwrap();
        let wide = GroupingSpec::new(vec![FeatureGroup::new(
            vec![0, 1, 2, 3],
            k,
            GroupScaling::FastsumBox,
        )]);
        assert!(feature_group(&fm, &wide, None).is_err());
        let empty = GroupingSpec::new(vec![FeatureGroup::new(vec![], k, GroupScaling::None)]);
        assert!(feature_group(&fm, &empty, None).is_err());
        let overlap = GroupingSpec::new(vec![
            FeatureGroup::new(vec![0, 1], k, GroupScaling::None),
            FeatureGroup::new(vec![1], k, GroupScaling::None),
        ]);
        assert!(feature_group(&fm, &overlap, None).is_err());
        assert!(scale_for_fastsum(&DMatrix::from_element(1, 1, f64::INFINITY), 0.1).is_err());
    }

    proptest! {
        #[test]
        fn scaled_points_satisfy_box(
            vals in prop::collection::vec(-1e6f64..1e6, 3..60),
            d in 1usize..4,
            eps in 0.01f64..0.2,
        ) {
            let n = vals.len() / d;
            let x = DMatrix::from_row_slice(n, d, &vals[..n * d]);
            let s = scale_for_fastsum(&x, eps).unwrap();
            let pts = PointSet::new(s.points.transpose().iter().copied().collect(), d).unwrap();
            prop_assert!(pts.check_box(eps).is_ok());
        }
    }

    #[test]
    fn fastsum_layer_apply_close_to_direct() {
        let fm = random_features(500, 2, 5, 1.0);
        let k = KernelSpec::gaussian(0.3).unwrap();
        let spec = GroupingSpec::new(vec![FeatureGroup::new(
            vec![0, 1],
            k,
            GroupScaling::FastsumBox,
        )]);
        let g = feature_group(&fm, &spec, None).unwrap();
        let v: Vec<f64> = (0..500).map(|i| (i as f64).sin()).collect();
        let fast = g.graph.layers()[0].apply_weight(&v).unwrap();
        let flat: Vec<f64> = fm.matrix().transpose().iter().copied().collect();
        let exact = direct_apply(&PointSet::new(flat, 2).unwrap(), &v, &k).unwrap();
        let err: f64 = fast
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = exact.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(err / norm <= 1e-4);
    }
}
