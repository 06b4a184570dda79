//! `f(x) = ½ xᵀQᵀDQx − qᵀx` with a residual cache.
//!
//! The Hessian `QᵀDQ` is never formed. The cache holds `Qx` (and `DQx` when
//! `D ≠ I`), so each partial derivative `∇_i f(x) = Q_iᵀ r(x) − q_i` costs one
//! column inner product and each pair move touches only two columns.

use crate::problem::Objective;

/// An `m × n` matrix accessed by columns.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnMatrix {
    /// Column-major dense storage.
    Dense { rows: usize, cols: usize, data: Vec<f64> },
    /// Compressed sparse columns with strictly increasing row indices.
    Sparse { rows: usize, cols: usize, col_ptr: Vec<usize>, row_idx: Vec<usize>, values: Vec<f64> },
}

impl ColumnMatrix {
    pub fn dense(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "dense payload has wrong length");
        ColumnMatrix::Dense { rows, cols, data }
    }

    /// Builds a sparse matrix from per-column `(row, value)` lists.
    pub fn sparse_from_columns(rows: usize, columns: Vec<Vec<(usize, f64)>>) -> Self {
        let cols = columns.len();
        let mut col_ptr = Vec::with_capacity(cols + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for col in columns {
            for (r, v) in col {
                assert!(r < rows, "row index {r} out of range");
                row_idx.push(r);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        ColumnMatrix::Sparse { rows, cols, col_ptr, row_idx, values }
    }

    pub fn rows(&self) -> usize {
        match self {
            ColumnMatrix::Dense { rows, .. } | ColumnMatrix::Sparse { rows, .. } => *rows,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            ColumnMatrix::Dense { cols, .. } | ColumnMatrix::Sparse { cols, .. } => *cols,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, ColumnMatrix::Sparse { .. })
    }

    /// Nonzero entries of column `j` as `(row, value)`.
    pub fn column(&self, j: usize) -> Vec<(usize, f64)> {
        match self {
            ColumnMatrix::Dense { rows, data, .. } => {
                data[j * rows..(j + 1) * rows].iter().copied().enumerate().collect()
            }
            ColumnMatrix::Sparse { col_ptr, row_idx, values, .. } => {
                let (a, b) = (col_ptr[j], col_ptr[j + 1]);
                row_idx[a..b].iter().copied().zip(values[a..b].iter().copied()).collect()
            }
        }
    }

    /// `Q_jᵀ v`.
    #[inline]
    pub fn col_dot(&self, j: usize, v: &[f64]) -> f64 {
        match self {
            ColumnMatrix::Dense { rows, data, .. } => {
                let col = &data[j * rows..(j + 1) * rows];
                col.iter().zip(v).map(|(a, b)| a * b).sum()
            }
            ColumnMatrix::Sparse { col_ptr, row_idx, values, .. } => {
                let (a, b) = (col_ptr[j], col_ptr[j + 1]);
                row_idx[a..b].iter().zip(&values[a..b]).map(|(&r, &q)| q * v[r]).sum()
            }
        }
    }

    /// `out += alpha · Q_j`, optionally weighted row-wise.
    #[inline]
    pub fn add_col_scaled(&self, j: usize, alpha: f64, weights: Option<&[f64]>, out: &mut [f64]) {
        match self {
            ColumnMatrix::Dense { rows, data, .. } => {
                let col = &data[j * rows..(j + 1) * rows];
                match weights {
                    None => out.iter_mut().zip(col).for_each(|(o, q)| *o += alpha * q),
                    Some(w) => {
                        for ((o, q), wk) in out.iter_mut().zip(col).zip(w) {
                            *o += alpha * wk * q;
                        }
                    }
                }
            }
            ColumnMatrix::Sparse { col_ptr, row_idx, values, .. } => {
                let (a, b) = (col_ptr[j], col_ptr[j + 1]);
                for (&r, &q) in row_idx[a..b].iter().zip(&values[a..b]) {
                    let wk = weights.map_or(1.0, |w| w[r]);
                    out[r] += alpha * wk * q;
                }
            }
        }
    }

    /// `Σ_k w_k (Q_ki − Q_kj)²`, with `w ≡ 1` when no weights are given.
    pub fn weighted_column_distance(&self, i: usize, j: usize, weights: Option<&[f64]>) -> f64 {
        match self {
            ColumnMatrix::Dense { rows, data, .. } => {
                let ci = &data[i * rows..(i + 1) * rows];
                let cj = &data[j * rows..(j + 1) * rows];
                match weights {
                    None => ci.iter().zip(cj).map(|(a, b)| (a - b) * (a - b)).sum(),
                    Some(w) => ci.iter().zip(cj).zip(w).map(|((a, b), wk)| wk * (a - b) * (a - b)).sum(),
                }
            }
            ColumnMatrix::Sparse { col_ptr, row_idx, values, .. } => {
                let (mut a, ae) = (col_ptr[i], col_ptr[i + 1]);
                let (mut b, be) = (col_ptr[j], col_ptr[j + 1]);
                let w = |r: usize| weights.map_or(1.0, |w| w[r]);
                let mut acc = 0.0;
                while a < ae || b < be {
                    let ra = if a < ae { row_idx[a] } else { usize::MAX };
                    let rb = if b < be { row_idx[b] } else { usize::MAX };
                    let (r, diff) = if ra == rb {
                        let d = values[a] - values[b];
                        a += 1;
                        b += 1;
                        (ra, d)
                    } else if ra < rb {
                        a += 1;
                        (ra, values[a - 1])
                    } else {
                        b += 1;
                        (rb, -values[b - 1])
                    };
                    acc += w(r) * diff * diff;
                }
                acc
            }
        }
    }

    /// `Qx`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                self.add_col_scaled(j, xj, None, &mut out);
            }
        }
        out
    }
}

/// Residual cache for [`StructuredQuadratic`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadCache {
    /// `Qx`.
    pub image: Vec<f64>,
    /// `DQx`; absent when `D = I`.
    pub weighted: Option<Vec<f64>>,
}

impl QuadCache {
    /// The residual `r(x) = DQx` used by partial derivatives.
    pub fn residual(&self) -> &[f64] {
        self.weighted.as_deref().unwrap_or(&self.image)
    }
}

/// `½ xᵀQᵀDQx − qᵀx`; `D = I` when `diag` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredQuadratic {
    q: ColumnMatrix,
    diag: Option<Vec<f64>>,
    linear: Vec<f64>,
}

impl StructuredQuadratic {
    pub fn new(q: ColumnMatrix, diag: Option<Vec<f64>>, linear: Vec<f64>) -> Self {
        assert_eq!(q.cols(), linear.len(), "linear term length must match column count");
        if let Some(d) = &diag {
            assert_eq!(d.len(), q.rows(), "diagonal length must match row count");
        }
        Self { q, diag, linear }
    }

    pub fn matrix(&self) -> &ColumnMatrix {
        &self.q
    }

    pub fn diag(&self) -> Option<&[f64]> {
        self.diag.as_deref()
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    /// Dense Hessian `QᵀDQ`, for small verification instances only.
    pub fn dense_hessian(&self) -> Vec<Vec<f64>> {
        let n = self.q.cols();
        let cols: Vec<Vec<(usize, f64)>> = (0..n).map(|j| self.q.column(j)).collect();
        let mut weighted = vec![0.0; self.q.rows()];
        let mut h = vec![vec![0.0; n]; n];
        for i in 0..n {
            weighted.iter_mut().for_each(|w| *w = 0.0);
            self.q.add_col_scaled(i, 1.0, self.diag.as_deref(), &mut weighted);
            for (j, col) in cols.iter().enumerate() {
                h[i][j] = col.iter().map(|&(r, v)| v * weighted[r]).sum();
            }
        }
        h
    }

    /// Largest relative difference between a cache and a fresh recompute at `x`.
    pub fn cache_drift(&self, cache: &QuadCache, x: &[f64]) -> f64 {
        let fresh = self.build_cache(x);
        let (a, b) = (cache.residual(), fresh.residual());
        let scale = b.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        a.iter().zip(b).fold(0.0_f64, |m, (u, v)| m.max((u - v).abs())) / scale
    }
}

impl Objective for StructuredQuadratic {
    type Cache = QuadCache;

    fn dim(&self) -> usize {
        self.q.cols()
    }

    fn build_cache(&self, x: &[f64]) -> QuadCache {
        let image = self.q.matvec(x);
        let weighted = self
            .diag
            .as_ref()
            .map(|d| image.iter().zip(d).map(|(s, dk)| s * dk).collect());
        QuadCache { image, weighted }
    }

    fn cached_value(&self, cache: &QuadCache, x: &[f64]) -> f64 {
        let quad: f64 = cache.image.iter().zip(cache.residual()).map(|(s, r)| s * r).sum();
        let lin: f64 = self.linear.iter().zip(x).map(|(q, v)| q * v).sum();
        0.5 * quad - lin
    }

    #[inline]
    fn cached_partial(&self, cache: &QuadCache, _x: &[f64], i: usize) -> f64 {
        self.q.col_dot(i, cache.residual()) - self.linear[i]
    }

    fn cached_pair_delta(&self, cache: &QuadCache, x: &[f64], i: usize, j: usize, t: f64) -> f64 {
        let slope0 = self.cached_partial(cache, x, i) - self.cached_partial(cache, x, j);
        let kappa = self.q.weighted_column_distance(i, j, self.diag.as_deref());
        t * slope0 + 0.5 * t * t * kappa
    }

    fn cached_pair_slope(&self, cache: &QuadCache, x: &[f64], i: usize, j: usize, t: f64) -> f64 {
        let slope0 = self.cached_partial(cache, x, i) - self.cached_partial(cache, x, j);
        let kappa = self.q.weighted_column_distance(i, j, self.diag.as_deref());
        slope0 + t * kappa
    }

    fn apply_pair_move(&self, cache: &mut QuadCache, _x: &[f64], i: usize, j: usize, t: f64) {
        if t == 0.0 {
            return;
        }
        self.q.add_col_scaled(i, t, None, &mut cache.image);
        self.q.add_col_scaled(j, -t, None, &mut cache.image);
        if let Some(w) = cache.weighted.as_mut() {
            let d = self.diag.as_deref();
            self.q.add_col_scaled(i, t, d, w);
            self.q.add_col_scaled(j, -t, d, w);
        }
    }

    fn pair_lipschitz(&self, i: usize, j: usize) -> Option<f64> {
        Some(self.q.weighted_column_distance(i, j, self.diag.as_deref()).abs())
    }

    fn coordinate_lipschitz(&self, i: usize) -> Option<f64> {
        let d = self.diag.as_deref();
        Some(self.q.column(i).iter().map(|&(r, v)| d.map_or(1.0, |d| d[r]) * v * v).sum::<f64>().abs())
    }

    fn pair_curvature(&self, i: usize, j: usize) -> Option<f64> {
        Some(self.q.weighted_column_distance(i, j, self.diag.as_deref()))
    }
}
