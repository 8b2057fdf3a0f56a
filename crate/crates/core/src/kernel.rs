//! Kernel evaluation and Gram matrix access.
//!
//! The bias term of the separating function is folded into the weight
//! vector by augmenting the kernel with a constant +1 (`augment_bias`),
//! so no model in this crate stores an explicit intercept. Supervised
//! oracles serve `Q[i][j] = y_i y_j k(x_i, x_j)`, one-class oracles serve
//! the raw `H[i][j] = k(x_i, x_j)`.

use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::qp::access::QuadAccess;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf { sigma: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    #[serde(flatten)]
    pub kind: KernelKind,
    pub augment_bias: bool,
}

impl KernelSpec {
    pub fn linear(augment_bias: bool) -> Self {
        KernelSpec { kind: KernelKind::Linear, augment_bias }
    }

    pub fn rbf(sigma: f64, augment_bias: bool) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::input(format!("rbf sigma must be positive, got {sigma}")));
        }
        Ok(KernelSpec { kind: KernelKind::Rbf { sigma }, augment_bias })
    }
}

/// k(a, b), plus 1 when `spec.augment_bias` folds the bias in.
pub fn kernel_eval(spec: &KernelSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::input(format!("kernel arguments have dimensions {} and {}", a.len(), b.len())));
    }
    let base = match spec.kind {
        KernelKind::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        KernelKind::Rbf { sigma } => {
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            (-d2 / (2.0 * sigma * sigma)).exp()
        }
    };
    Ok(base + if spec.augment_bias { 1.0 } else { 0.0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GramMode {
    /// Label-signed matrix Q for supervised training.
    Supervised,
    /// Raw kernel matrix H for one-class training.
    OneClass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CachePolicy {
    /// Materialize the whole l x l matrix up front.
    FullMatrix,
    /// Keep at most this many rows, recomputing on miss.
    RowLru { rows: usize },
}

/// Samples above this count switch the default policy to row caching;
/// below it the full matrix fits comfortably in memory.
pub const FULL_MATRIX_MAX_SAMPLES: usize = 8000;
const DEFAULT_LRU_ROWS: usize = 512;

struct LruState {
    map: std::collections::HashMap<usize, (Arc<Vec<f64>>, u64)>,
    tick: u64,
    capacity: usize,
}

enum GramStore {
    Full(Vec<f64>),
    Lru(Mutex<LruState>),
}

/// Shared, read-only Gram access for one dataset/kernel pair.
///
/// Row computation is pure, so concurrent cache fills are benign: two
/// threads racing on the same row insert identical values.
pub struct GramOracle {
    data: Arc<Dataset>,
    spec: KernelSpec,
    labels: Option<Vec<f64>>,
    diag: Vec<f64>,
    store: GramStore,
}

/// A Gram row, either borrowed from the full matrix or shared out of the
/// row cache.
pub enum Row<'a> {
    Slice(&'a [f64]),
    Shared(Arc<Vec<f64>>),
}

impl std::ops::Deref for Row<'_> {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        match self {
            Row::Slice(s) => s,
            Row::Shared(v) => v,
        }
    }
}

impl GramOracle {
    pub fn new(data: Arc<Dataset>, spec: KernelSpec, mode: GramMode) -> Result<Self> {
        let policy = if data.len() <= FULL_MATRIX_MAX_SAMPLES {
            CachePolicy::FullMatrix
        } else {
            CachePolicy::RowLru { rows: DEFAULT_LRU_ROWS }
        };
        Self::with_policy(data, spec, mode, policy)
    }

    pub fn with_policy(data: Arc<Dataset>, spec: KernelSpec, mode: GramMode, policy: CachePolicy) -> Result<Self> {
        if let KernelKind::Rbf { sigma } = spec.kind {
            if !(sigma > 0.0) {
                return Err(Error::input("rbf sigma must be positive"));
            }
        }
        let labels = match mode {
            GramMode::Supervised => {
                let ls = data
                    .labels()
                    .ok_or_else(|| Error::input("supervised gram oracle needs labels"))?;
                Some(ls.to_vec())
            }
            GramMode::OneClass => None,
        };
        let l = data.len();
        let mut oracle = GramOracle {
            data,
            spec,
            labels,
            diag: Vec::new(),
            store: GramStore::Lru(Mutex::new(LruState {
                map: std::collections::HashMap::new(),
                tick: 0,
                capacity: 0,
            })),
        };
        oracle.diag = (0..l).map(|i| oracle.compute_entry(i, i)).collect();
        oracle.store = match policy {
            CachePolicy::FullMatrix => GramStore::Full(oracle.build_full()),
            CachePolicy::RowLru { rows } => GramStore::Lru(Mutex::new(LruState {
                map: std::collections::HashMap::new(),
                tick: 0,
                capacity: rows.max(2),
            })),
        };
        Ok(oracle)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.len() == 0
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.data
    }

    pub fn mode(&self) -> GramMode {
        if self.labels.is_some() {
            GramMode::Supervised
        } else {
            GramMode::OneClass
        }
    }

    /// Diagonal of Q (equals the self-kernel values: labels square away).
    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    fn compute_entry(&self, i: usize, j: usize) -> f64 {
        let k = kernel_eval(&self.spec, self.data.row(i), self.data.row(j))
            .expect("rows of one dataset have equal dimension");
        match &self.labels {
            Some(y) => y[i] * y[j] * k,
            None => k,
        }
    }

    fn compute_row(&self, i: usize) -> Vec<f64> {
        (0..self.len()).map(|j| self.compute_entry(i, j)).collect()
    }

    fn build_full(&self) -> Vec<f64> {
        let l = self.len();
        let mut buf = vec![0.0; l * l];
        crate::par::for_each_chunk(&mut buf, l, |i, chunk| {
            for (j, slot) in chunk.iter_mut().enumerate() {
                *slot = self.compute_entry(i, j);
            }
        });
        buf
    }

    /// Row `i` of Q (or H in one-class mode).
    pub fn row(&self, i: usize) -> Row<'_> {
        assert!(i < self.len(), "row index {i} out of range for {} samples", self.len());
        match &self.store {
            GramStore::Full(buf) => Row::Slice(&buf[i * self.len()..(i + 1) * self.len()]),
            GramStore::Lru(state) => {
                {
                    let mut st = state.lock().unwrap();
                    st.tick += 1;
                    let tick = st.tick;
                    if let Some(entry) = st.map.get_mut(&i) {
                        entry.1 = tick;
                        return Row::Shared(entry.0.clone());
                    }
                }
                // compute outside the lock; values are deterministic
                let row = Arc::new(self.compute_row(i));
                let mut st = state.lock().unwrap();
                st.tick += 1;
                let tick = st.tick;
                if st.map.len() >= st.capacity {
                    if let Some((&victim, _)) = st.map.iter().min_by_key(|(_, (_, t))| *t) {
                        st.map.remove(&victim);
                    }
                }
                st.map.insert(i, (row.clone(), tick));
                Row::Shared(row)
            }
        }
    }

    /// Checked variant of `row` for callers handing through user indices.
    pub fn gram_row(&self, i: usize) -> Result<Vec<f64>> {
        if i >= self.len() {
            return Err(Error::input(format!("row index {i} out of range for {} samples", self.len())));
        }
        Ok(self.row(i).to_vec())
    }

    /// aᵀ Q b without materializing Q. Terms with a_i = 0 contribute
    /// nothing, so only rows at nonzero coordinates of the sparser vector
    /// are touched.
    pub fn quad_form(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        let l = self.len();
        if a.len() != l || b.len() != l {
            return Err(Error::input(format!("quad_form expects vectors of length {l}")));
        }
        let (outer, inner) = {
            let nz = |v: &[f64]| v.iter().filter(|x| **x != 0.0).count();
            if nz(a) <= nz(b) {
                (a, b)
            } else {
                (b, a)
            }
        };
        let mut total = 0.0;
        for (i, &w) in outer.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let row = self.row(i);
            let dot: f64 = row.iter().zip(inner).map(|(q, v)| q * v).sum();
            total += w * dot;
        }
        Ok(total)
    }
}

impl QuadAccess for GramOracle {
    fn dim(&self) -> usize {
        self.len()
    }

    fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.compute_entry(i, j)
    }

    fn dot_row(&self, i: usize, v: &[f64]) -> f64 {
        let row = self.row(i);
        row.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    fn add_scaled_row(&self, i: usize, scale: f64, out: &mut [f64]) {
        let row = self.row(i);
        for (o, a) in out.iter_mut().zip(row.iter()) {
            *o += scale * a;
        }
    }

    fn mat_vec(&self, v: &[f64], out: &mut [f64]) {
        let nnz = v.iter().filter(|x| **x != 0.0).count();
        match &self.store {
            GramStore::Full(buf) => {
                if 4 * nnz < self.len() {
                    // column accumulation beats full dots for sparse v
                    out.fill(0.0);
                    for (j, &w) in v.iter().enumerate() {
                        if w == 0.0 {
                            continue;
                        }
                        let row = &buf[j * self.len()..(j + 1) * self.len()];
                        for (o, q) in out.iter_mut().zip(row) {
                            *o += w * q;
                        }
                    }
                } else {
                    crate::par::for_each_chunk(out, 1, |i, slot| {
                        slot[0] = self.dot_row(i, v);
                    });
                }
            }
            GramStore::Lru(_) => {
                // only rows at nonzero v are computed, bypassing the cache
                // to avoid churning it
                out.fill(0.0);
                for (j, &w) in v.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let row = self.compute_row(j);
                    for (o, q) in out.iter_mut().zip(&row) {
                        *o += w * q;
                    }
                }
            }
        }
    }
}

/// Principal submatrix view `Q[idx, idx]` over a shared oracle. Survivor
/// problems after screening run their solver against this without any
/// copying of the base matrix.
pub struct GramSubset<'a> {
    oracle: &'a GramOracle,
    idx: Vec<usize>,
}

impl<'a> GramSubset<'a> {
    pub fn new(oracle: &'a GramOracle, idx: Vec<usize>) -> Self {
        GramSubset { oracle, idx }
    }

    pub fn indices(&self) -> &[usize] {
        &self.idx
    }
}

impl QuadAccess for GramSubset<'_> {
    fn dim(&self) -> usize {
        self.idx.len()
    }

    fn diag(&self, i: usize) -> f64 {
        self.oracle.diag[self.idx[i]]
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.oracle.compute_entry(self.idx[i], self.idx[j])
    }

    fn dot_row(&self, i: usize, v: &[f64]) -> f64 {
        let row = self.oracle.row(self.idx[i]);
        self.idx.iter().zip(v).map(|(&j, &vj)| row[j] * vj).sum()
    }

    fn add_scaled_row(&self, i: usize, scale: f64, out: &mut [f64]) {
        let row = self.oracle.row(self.idx[i]);
        for (o, &j) in out.iter_mut().zip(&self.idx) {
            *o += scale * row[j];
        }
    }
}
