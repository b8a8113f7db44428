//! Graph layers, weight operators and the symmetric normalized Laplacian.

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::fastsum::{direct_apply, fastsum_apply, FastsumPlan, PointSet};
use crate::kernel::KernelSpec;

/// Symmetric sparse matrix in compressed-row form with an empty diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymmetric {
    /// Builds from undirected edges `(i, j, w)`. Repeated or reversed entries
    /// for the same pair are merged by taking the maximum weight.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i}, {j}) out of range for {n} nodes"
                )));
            }
            check_weight(i, j, w)?;
            if i == j {
                if w != 0.0 {
                    return Err(Error::InvalidWeight {
                        row: i,
                        col: j,
                        value: w,
                    });
                }
                continue;
            }
            for key in [(i, j), (j, i)] {
                let slot = merged.entry(key).or_insert(w);
                *slot = slot.max(w);
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(merged.len());
        let mut vals = Vec::with_capacity(merged.len());
        for (&(i, j), &w) in &merged {
            row_ptr[i + 1] += 1;
            cols.push(j);
            vals.push(w);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            n,
            row_ptr,
            cols,
            vals,
        })
    }

    /// Builds from a dense matrix, keeping nonzero entries; the input must be
    /// exactly symmetric.
    pub fn from_dense(w: &DMatrix<f64>) -> Result<Self> {
        validate_dense(w)?;
        let n = w.nrows();
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Self::from_edges(
            n,
            edges
                .filter(|&(i, j)| w[(i, j)] != 0.0)
                .map(|(i, j)| (i, j, w[(i, j)])),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).map(|(j, w)| w * v[j]).sum();
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, w) in self.row(i) {
                m[(i, j)] = w;
            }
        }
        m
    }
}

/// Kernel-implicit weights `W_ij = K(x_i - x_j)`, `i != j`, optionally
/// restricted to diagonal blocks (entries between blocks are zero).
#[derive(Debug, Clone)]
pub struct KernelWeights {
    points: PointSet,
    kernel: KernelSpec,
    plan: Option<Arc<FastsumPlan>>,
    blocks: Vec<(Range<usize>, PointSet)>,
}

impl KernelWeights {
    pub fn new(
        points: PointSet,
        kernel: KernelSpec,
        plan: Option<Arc<FastsumPlan>>,
    ) -> Result<Self> {
        let n = points.len();
        Self::with_blocks(points, kernel, plan, vec![0..n])
    }

    /// `blocks` must be contiguous, in order, and cover `0..n`.
    pub fn with_blocks(
        points: PointSet,
        kernel: KernelSpec,
        plan: Option<Arc<FastsumPlan>>,
        blocks: Vec<Range<usize>>,
    ) -> Result<Self> {
        let mut next = 0;
        for b in &blocks {
            if b.start != next || b.end < b.start {
                return Err(Error::InvalidArgument(
                    "kernel blocks must tile 0..n in order".into(),
                ));
            }
            next = b.end;
        }
        if next != points.len() {
            return Err(Error::InvalidArgument(
                "kernel blocks must tile 0..n in order".into(),
            ));
        }
        if let Some(plan) = &plan {
            if plan.dim() != points.dim() {
                return Err(Error::DimensionMismatch {
                    expected: plan.dim(),
                    got: points.dim(),
                });
            }
            if plan.kernel() != &kernel {
                return Err(Error::InvalidArgument(
                    "fast summation plan built for another kernel".into(),
                ));
            }
            points.check_box(plan.params().eps_b)?;
        }
        let blocks = blocks
            .into_iter()
            .map(|r| {
                let sub = points.slice(r.clone());
                (r, sub)
            })
            .collect();
        Ok(Self {
            points,
            kernel,
            plan,
            blocks,
        })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn plan(&self) -> Option<&FastsumPlan> {
        self.plan.as_deref()
    }

    pub fn blocks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.blocks.iter().map(|(r, _)| r.clone())
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        for (range, pts) in &self.blocks {
            let vb = &v[range.clone()];
            let wb = match &self.plan {
                Some(plan) => fastsum_apply(pts, vb, plan)?,
                None => direct_apply(pts, vb, &self.kernel)?,
            };
            out[range.clone()].copy_from_slice(&wb);
        }
        Ok(())
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.points.len();
        let mut m = DMatrix::zeros(n, n);
        for (range, _) in &self.blocks {
            for i in range.clone() {
                for j in range.start..i {
                    let w = self
                        .kernel
                        .eval_pair(self.points.point(i), self.points.point(j));
                    m[(i, j)] = w;
                    m[(j, i)] = w;
                }
            }
        }
        m
    }
}

/// A symmetric, nonnegative, zero-diagonal weight matrix in one of three forms.
#[derive(Debug, Clone)]
pub enum WeightOperator {
    Dense(DMatrix<f64>),
    Sparse(SparseSymmetric),
    Kernel(KernelWeights),
}

fn check_weight(i: usize, j: usize, w: f64) -> Result<()> {
    if !w.is_finite() || w < 0.0 {
        return Err(Error::InvalidWeight {
            row: i,
            col: j,
            value: w,
        });
    }
    Ok(())
}

fn validate_dense(w: &DMatrix<f64>) -> Result<()> {
    if w.nrows() != w.ncols() {
        return Err(Error::DimensionMismatch {
            expected: w.nrows(),
            got: w.ncols(),
        });
    }
    let n = w.nrows();
    for i in 0..n {
        if w[(i, i)] != 0.0 {
            return Err(Error::InvalidWeight {
                row: i,
                col: i,
                value: w[(i, i)],
            });
        }
        for j in 0..n {
            check_weight(i, j, w[(i, j)])?;
            if j > i && w[(i, j)] != w[(j, i)] {
                return Err(Error::Asymmetric(i, j));
            }
        }
    }
    Ok(())
}

impl WeightOperator {
    /// Validated dense weights.
    pub fn dense(w: DMatrix<f64>) -> Result<Self> {
        validate_dense(&w)?;
        Ok(Self::Dense(w))
    }

    pub fn kernel(
        points: PointSet,
        kernel: KernelSpec,
        plan: Option<Arc<FastsumPlan>>,
    ) -> Result<Self> {
        Ok(Self::Kernel(KernelWeights::new(points, kernel, plan)?))
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Dense(m) => m.nrows(),
            Self::Sparse(s) => s.n(),
            Self::Kernel(k) => k.points.len(),
        }
    }

    /// `out = W v`
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.n();
        check_len(n, v.len())?;
        check_len(n, out.len())?;
        match self {
            Self::Dense(m) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = m.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
                }
                Ok(())
            }
            Self::Sparse(s) => {
                s.matvec(v, out);
                Ok(())
            }
            Self::Kernel(k) => k.apply(v, out),
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n()];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    /// Explicit matrix; kernel weights are evaluated exactly.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Self::Dense(m) => m.clone(),
            Self::Sparse(s) => s.to_dense(),
            Self::Kernel(k) => k.to_dense(),
        }
    }

    pub fn is_fast(&self) -> bool {
        matches!(self, Self::Kernel(k) if k.plan.is_some())
    }
}

/// One graph layer: weights, cached degrees and a diagonal shift `delta`.
#[derive(Debug, Clone)]
pub struct Layer {
    weights: Arc<WeightOperator>,
    degrees: Arc<Vec<f64>>,
    inv_sqrt_deg: Arc<Vec<f64>>,
    shift: f64,
}

impl Layer {
    /// Computes and validates the degree vector `W 1`.
    pub fn new(weights: WeightOperator) -> Result<Self> {
        let n = weights.n();
        if n == 0 {
            return Err(Error::InvalidArgument("layer has no nodes".into()));
        }
        let degrees = weights.apply(&vec![1.0; n])?;
        if let Some(i) = degrees.iter().position(|&d| !(d.is_finite() && d > 0.0)) {
            return Err(Error::ZeroDegree(i));
        }
        let inv_sqrt_deg = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
        Ok(Self {
            weights: Arc::new(weights),
            degrees: Arc::new(degrees),
            inv_sqrt_deg: Arc::new(inv_sqrt_deg),
            shift: 0.0,
        })
    }

    /// Same weights with shift `delta` (shares the weight storage).
    pub fn with_shift(&self, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "shift must be finite and >= 0, got {delta}"
            )));
        }
        Ok(Self {
            shift: delta,
            ..self.clone()
        })
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn weights(&self) -> &WeightOperator {
        &self.weights
    }

    pub fn apply_weight(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.weights.apply(v)
    }

    /// `D^{-1/2} W D^{-1/2} v`
    pub fn apply_normalized_adjacency(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), v.len())?;
        let scaled: Vec<f64> = v
            .iter()
            .zip(self.inv_sqrt_deg.iter())
            .map(|(a, s)| a * s)
            .collect();
        let mut w = self.weights.apply(&scaled)?;
        for (x, s) in w.iter_mut().zip(self.inv_sqrt_deg.iter()) {
            *x *= s;
        }
        Ok(w)
    }

    /// `(1 + delta) v - D^{-1/2} W D^{-1/2} v`
    pub fn apply_sym_laplacian(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut a = self.apply_normalized_adjacency(v)?;
        for (x, &vi) in a.iter_mut().zip(v) {
            *x = (1.0 + self.shift) * vi - *x;
        }
        Ok(a)
    }

    /// Explicit `L_sym + delta I`.
    pub fn dense_sym_laplacian(&self) -> DMatrix<f64> {
        let n = self.n();
        let w = self.weights.to_dense();
        DMatrix::from_fn(n, n, |i, j| {
            let id = if i == j { 1.0 + self.shift } else { 0.0 };
            id - self.inv_sqrt_deg[i] * w[(i, j)] * self.inv_sqrt_deg[j]
        })
    }
}

pub fn build_layer(weights: WeightOperator) -> Result<Layer> {
    Layer::new(weights)
}

pub fn apply_weight(layer: &Layer, v: &[f64]) -> Result<Vec<f64>> {
    layer.apply_weight(v)
}

pub fn apply_sym_laplacian(layer: &Layer, v: &[f64]) -> Result<Vec<f64>> {
    layer.apply_sym_laplacian(v)
}

/// Ordered layers over a common node set.
#[derive(Debug, Clone)]
pub struct MultilayerGraph {
    layers: Vec<Layer>,
}

impl MultilayerGraph {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let first = layers.first().ok_or_else(|| {
            Error::InvalidArgument("a multilayer graph needs at least one layer".into())
        })?;
        let n = first.n();
        for layer in &layers {
            check_len(n, layer.n())?;
        }
        Ok(Self { layers })
    }

    pub fn n(&self) -> usize {
        self.layers[0].n()
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Copy with every layer shifted by `delta`.
    pub fn with_shift(&self, delta: f64) -> Result<Self> {
        let layers = self
            .layers
            .iter()
            .map(|l| l.with_shift(delta))
            .collect::<Result<_>>()?;
        Ok(Self { layers })
    }

    /// Sub-graph made of the layers at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let layers = indices
            .iter()
            .map(|&i| {
                self.layers
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::InvalidArgument(format!("no layer {i}")))
            })
            .collect::<Result<_>>()?;
        Self::new(layers)
    }
}

/// Reads `i j w` lines (0-based, `#` comments, blank lines ignored). A missing
/// weight column means weight 1. `n` defaults to the largest index plus one.
pub fn load_edge_list(path: impl AsRef<Path>, n: Option<usize>) -> Result<WeightOperator> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut edges = Vec::new();
    let mut max_index = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(parse_err(
                lineno + 1,
                format!("expected 'i j w', got '{line}'"),
            ));
        }
        let idx = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| parse_err(lineno + 1, format!("bad node index '{s}': {e}")))
        };
        let (i, j) = (idx(fields[0])?, idx(fields[1])?);
        let w = match fields.get(2) {
            Some(s) => s
                .parse::<f64>()
                .map_err(|e| parse_err(lineno + 1, format!("bad weight '{s}': {e}")))?,
            None => 1.0,
        };
        if i == j {
            return Err(parse_err(lineno + 1, format!("self-loop at node {i}")));
        }
        max_index = max_index.max(i).max(j);
        edges.push((i, j, w));
    }
    let n = n.unwrap_or(if edges.is_empty() { 0 } else { max_index + 1 });
    Ok(WeightOperator::Sparse(SparseSymmetric::from_edges(
        n, edges,
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, sym_eigen_ascending};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p3() -> WeightOperator {
        WeightOperator::dense(DMatrix::from_row_slice(
            3,
            3,
            &[0., 1., 0., 1., 0., 1., 0., 1., 0.],
        ))
        .unwrap()
    }

    fn random_dense(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let x: f64 = rng.random_range(0.0..1.0);
                w[(i, j)] = x;
                w[(j, i)] = x;
            }
        }
        w
    }

    #[test]
    fn path_graph_degrees_and_products() {
        let layer = Layer::new(p3()).unwrap();
        assert_eq!(layer.degrees(), &[1.0, 2.0, 1.0]);
        assert_eq!(
            layer.apply_weight(&[1.0, 1.0, 1.0]).unwrap(),
            vec![1.0, 2.0, 1.0]
        );
        let h = 1.0 / 2f64.sqrt();
        let l = layer.apply_sym_laplacian(&[0.0, 1.0, 0.0]).unwrap();
        // oracle: explicit I - D^{-1/2} W D^{-1/2}
        let dense = layer.dense_sym_laplacian();
        for i in 0..3 {
            assert!((l[i] - dense[(i, 1)]).abs() < 1e-15);
        }
        assert!((l[0] + h).abs() < 1e-15 && (l[1] - 1.0).abs() < 1e-15 && (l[2] + h).abs() < 1e-15);
    }

    #[test]
    fn shift_acts_on_the_null_vector() {
        let delta = 2f64.ln();
        let layer = Layer::new(p3()).unwrap().with_shift(delta).unwrap();
        let v: Vec<f64> = layer.degrees().iter().map(|d| d.sqrt()).collect();
        let out = layer.apply_sym_laplacian(&v).unwrap();
        for (o, x) in out.iter().zip(&v) {
            assert!((o - delta * x).abs() < 1e-14);
        }
    }

    #[test]
    fn coincident_kernel_points() {
        let pts = PointSet::new(vec![0.3, 0.3], 1).unwrap();
        let layer = Layer::new(
            WeightOperator::kernel(pts, KernelSpec::gaussian(1.0).unwrap(), None).unwrap(),
        )
        .unwrap();
        assert_eq!(layer.degrees(), &[1.0, 1.0]);
    }

    #[test]
    fn single_kernel_node_has_zero_product_and_degree() {
        let pts = PointSet::new(vec![0.1, 0.2], 2).unwrap();
        let w = WeightOperator::kernel(pts, KernelSpec::gaussian(1.0).unwrap(), None).unwrap();
        assert_eq!(w.apply(&[5.0]).unwrap(), vec![0.0]);
        assert!(matches!(Layer::new(w), Err(Error::ZeroDegree(0))));
    }

    #[test]
    fn rejects_bad_dense_input() {
        let iso = DMatrix::from_row_slice(3, 3, &[0., 1., 0., 1., 0., 0., 0., 0., 0.]);
        assert!(matches!(
            Layer::new(WeightOperator::dense(iso).unwrap()),
            Err(Error::ZeroDegree(2))
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[0., 1., 0.5, 0.]);
        assert!(matches!(
            WeightOperator::dense(asym),
            Err(Error::Asymmetric(0, 1))
        ));
        let neg = DMatrix::from_row_slice(2, 2, &[0., -1., -1., 0.]);
        assert!(WeightOperator::dense(neg).is_err());
        let diag = DMatrix::from_row_slice(2, 2, &[1., 1., 1., 0.]);
        assert!(WeightOperator::dense(diag).is_err());
    }

    #[test]
    fn dense_product_matches_hand_multiply() {
        let w = random_dense(5, 3);
        let v = [0.3, -1.0, 2.0, 0.5, -0.7];
        let out = WeightOperator::dense(w.clone()).unwrap().apply(&v).unwrap();
        for i in 0..5 {
            let mut acc = 0.0;
            for j in 0..5 {
                acc += w[(i, j)] * v[j];
            }
            assert!((out[i] - acc).abs() < 1e-14);
        }
    }

    #[test]
    fn sparse_agrees_with_dense() {
        let w = random_dense(12, 9);
        let s = SparseSymmetric::from_dense(&w).unwrap();
        assert_eq!(s.to_dense(), w);
        let v: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let a = WeightOperator::Sparse(s).apply(&v).unwrap();
        let b = WeightOperator::Dense(w).apply(&v).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn laplacian_spectrum_bounds() {
        for seed in 0..5 {
            let layer = Layer::new(
                WeightOperator::dense(random_dense(40 + seed as usize * 30, seed)).unwrap(),
            )
            .unwrap();
            let (vals, _) = sym_eigen_ascending(layer.dense_sym_laplacian());
            assert!(vals[0].abs() < 1e-10);
            assert!(vals.iter().all(|&l| (-1e-10..=2.0 + 1e-10).contains(&l)));
        }
    }

    #[test]
    fn blocked_kernel_has_no_cross_weights() {
        let pts = PointSet::new(vec![0.0, 0.01, 0.02, 0.03], 1).unwrap();
        let k = KernelSpec::gaussian(1.0).unwrap();
        let w = KernelWeights::with_blocks(pts, k, None, vec![0..2, 2..4]).unwrap();
        let dense = WeightOperator::Kernel(w.clone()).to_dense();
        assert_eq!(dense[(0, 2)], 0.0);
        assert!(dense[(0, 1)] > 0.9);
        let v = [1.0, 2.0, 3.0, 4.0];
        let out = WeightOperator::Kernel(w).apply(&v).unwrap();
        let expect = &dense * nalgebra::DVector::from_column_slice(&v);
        for i in 0..4 {
            assert!((out[i] - expect[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        std::fs::write(&path, "# path\n0 1 1.0\n1 2 0.5\n2 1 2.0\n\n").unwrap();
        let w = load_edge_list(&path, None).unwrap();
        let d = w.to_dense();
        assert_eq!(d[(1, 2)], 2.0);
        assert_eq!(d[(2, 1)], 2.0);
        assert_eq!(d[(0, 1)], 1.0);
        std::fs::write(&path, "0 0 1\n").unwrap();
        assert!(matches!(
            load_edge_list(&path, None),
            Err(Error::Parse { line: 1, .. })
        ));
        std::fs::write(&path, "0 1 abc\n").unwrap();
        assert!(load_edge_list(&path, None).is_err());
    }

    #[test]
    fn multilayer_requires_common_size() {
        let a = Layer::new(p3()).unwrap();
        let b = Layer::new(WeightOperator::dense(random_dense(4, 1)).unwrap()).unwrap();
        assert!(MultilayerGraph::new(vec![a.clone(), b]).is_err());
        assert!(MultilayerGraph::new(vec![]).is_err());
        let g = MultilayerGraph::new(vec![a.clone(), a]).unwrap();
        assert_eq!(g.num_layers(), 2);
        assert_eq!(g.with_shift(0.5).unwrap().layers()[1].shift(), 0.5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn null_vector_is_annihilated(seed in 0u64..1000, n in 2usize..30) {
            let layer = Layer::new(WeightOperator::dense(random_dense(n, seed)).unwrap()).unwrap();
            let v: Vec<f64> = layer.degrees().iter().map(|d| d.sqrt()).collect();
            let out = layer.apply_sym_laplacian(&v).unwrap();
            prop_assert!(crate::linalg::norm(&out) <= 1e-12 * crate::linalg::norm(&v));
        }

        #[test]
        fn weight_product_is_linear_and_symmetric(
            seed in 0u64..1000,
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
            sparse in any::<bool>(),
        ) {
            let n = 15;
            let dense = random_dense(n, seed);
            let w = if sparse {
                WeightOperator::Sparse(SparseSymmetric::from_dense(&dense).unwrap())
            } else {
                WeightOperator::Dense(dense)
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let comb: Vec<f64> = u.iter().zip(&v).map(|(a, b)| alpha * a + beta * b).collect();
            let wu = w.apply(&u).unwrap();
            let wv = w.apply(&v).unwrap();
            let wc = w.apply(&comb).unwrap();
            let expect: Vec<f64> = wu.iter().zip(&wv).map(|(a, b)| alpha * a + beta * b).collect();
            let diff: Vec<f64> = wc.iter().zip(&expect).map(|(a, b)| a - b).collect();
            prop_assert!(crate::linalg::norm(&diff) <= 1e-10 * crate::linalg::norm(&expect).max(1e-300));
            let (a, b) = (dot(&u, &wv), dot(&wu, &v));
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()));
        }
    }
}
