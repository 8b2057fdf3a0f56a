//! Access trait for the symmetric PSD matrix behind a dual QP.
//!
//! Solvers only ever need row-times-vector products, single diagonal
//! entries and rank-one row updates, so the Gram matrix can sit behind a
//! cache, a dense buffer, or an index-selected view without the solver
//! noticing.

/// Read access to a symmetric matrix, enough for coordinate-type solvers.
pub trait QuadAccess: Sync {
    fn dim(&self) -> usize;

    fn diag(&self, i: usize) -> f64;

    /// Single entry `M[i][j]`.
    fn entry(&self, i: usize, j: usize) -> f64;

    /// ⟨row i, v⟩ with `v.len() == dim()`.
    fn dot_row(&self, i: usize, v: &[f64]) -> f64;

    /// `out += scale * row(i)`.
    fn add_scaled_row(&self, i: usize, scale: f64, out: &mut [f64]);

    /// `out = M v`. The default walks rows; implementations may override.
    fn mat_vec(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.dot_row(i, v);
        }
    }
}

/// Plain dense symmetric matrix, row-major. Used by tests and for small
/// reduced problems.
#[derive(Clone, Debug)]
pub struct DenseMatrix {
    n: usize,
    a: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(n: usize, a: Vec<f64>) -> Self {
        assert_eq!(a.len(), n * n);
        DenseMatrix { n, a }
    }

    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    /// M^T M for a row-major `rows x n` factor: always PSD.
    pub fn gram_of_factor(rows: usize, n: usize, factor: &[f64]) -> Self {
        assert_eq!(factor.len(), rows * n);
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for r in 0..rows {
                    s += factor[r * n + i] * factor[r * n + j];
                }
                m.a[i * n + j] = s;
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }
}

impl QuadAccess for DenseMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn diag(&self, i: usize) -> f64 {
        self.a[i * self.n + i]
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    fn dot_row(&self, i: usize, v: &[f64]) -> f64 {
        self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    fn add_scaled_row(&self, i: usize, scale: f64, out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(self.row(i)) {
            *o += scale * a;
        }
    }
}

/// Objective value ½ αᵀMα + fᵀα.
pub fn qp_objective<Q: QuadAccess + ?Sized>(q: &Q, linear: Option<&[f64]>, alpha: &[f64]) -> f64 {
    let mut out = vec![0.0; alpha.len()];
    q.mat_vec(alpha, &mut out);
    let quad: f64 = alpha.iter().zip(&out).map(|(a, m)| a * m).sum();
    let lin: f64 = match linear {
        Some(f) => alpha.iter().zip(f).map(|(a, b)| a * b).sum(),
        None => 0.0,
    };
    0.5 * quad + lin
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_roundtrip() {
        let m = DenseMatrix::new(2, vec![2.0, -1.0, -1.0, 2.0]);
        assert_eq!(m.dot_row(0, &[1.0, 1.0]), 1.0);
        let mut out = vec![0.0; 2];
        m.mat_vec(&[1.0, 0.0], &mut out);
        assert_eq!(out, vec![2.0, -1.0]);
        let mut acc = vec![1.0, 1.0];
        m.add_scaled_row(1, 2.0, &mut acc);
        assert_eq!(acc, vec![-1.0, 5.0]);
    }

    #[test]
    fn factor_gram_is_psd_on_random_vectors() {
        let factor: Vec<f64> = (0..20).map(|i| ((i * 37 + 11) % 17) as f64 - 8.0).collect();
        let m = DenseMatrix::gram_of_factor(4, 5, &factor);
        let mut out = vec![0.0; 5];
        for t in 0..50 {
            let v: Vec<f64> = (0..5).map(|i| ((i * 7 + t * 13) % 9) as f64 - 4.0).collect();
            m.mat_vec(&v, &mut out);
            let q: f64 = v.iter().zip(&out).map(|(a, b)| a * b).sum();
            assert!(q >= -1e-9, "v^T M v = {q}");
        }
    }

    #[test]
    fn objective_matches_hand_value() {
        let m = DenseMatrix::identity(2);
        let f = vec![1.0, -1.0];
        let v = qp_objective(&m, Some(&f), &[3.0, 4.0]);
        assert!((v - (0.5 * 25.0 + 3.0 - 4.0)).abs() < 1e-12);
    }
}
