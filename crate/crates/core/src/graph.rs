//! Cosine affinity matrices and their graph Laplacians.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Absolute tolerance for symmetry and row-sum checks.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Which axis of the data matrix an affinity was computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AffinityAxis {
    Rows,
    Columns,
}

/// Divides every nonzero row by its Euclidean norm. Zero rows are kept.
pub fn row_normalize(x: ArrayView2<f64>) -> Array2<f64> {
    let mut out = x.to_owned();
    for mut row in out.rows_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row /= norm;
        }
    }
    out
}

/// Column-wise analogue of [`row_normalize`].
pub fn col_normalize(x: ArrayView2<f64>) -> Array2<f64> {
    let mut out = x.to_owned();
    for mut col in out.columns_mut() {
        let norm = col.dot(&col).sqrt();
        if norm > 0.0 {
            col /= norm;
        }
    }
    out
}

/// Symmetric matrix of pairwise cosine similarities.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    entries: Array2<f64>,
    axis: AffinityAxis,
}

impl AffinityMatrix {
    /// Wraps a caller-supplied affinity after checking symmetry.
    pub fn from_dense(entries: Array2<f64>, axis: AffinityAxis) -> Result<Self> {
        check_symmetric(entries.view())?;
        Ok(AffinityMatrix { entries, axis })
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn axis(&self) -> AffinityAxis {
        self.axis
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Row sums; the diagonal of the degree matrix.
    pub fn degrees(&self) -> Array1<f64> {
        self.entries.sum_axis(Axis(1))
    }
}

/// `Rn(X) Rn(X)^T`: cosine similarity between every pair of rows.
pub fn affinity_rows(x: ArrayView2<f64>) -> AffinityMatrix {
    let rn = row_normalize(x);
    let mut s = rn.dot(&rn.t());
    symmetrize(&mut s);
    AffinityMatrix {
        entries: s,
        axis: AffinityAxis::Rows,
    }
}

/// `Cn(X)^T Cn(X)`: cosine similarity between every pair of columns.
pub fn affinity_cols(x: ArrayView2<f64>) -> AffinityMatrix {
    let cn = col_normalize(x);
    let mut s = cn.t().dot(&cn);
    symmetrize(&mut s);
    AffinityMatrix {
        entries: s,
        axis: AffinityAxis::Columns,
    }
}

// Floating products can leave the two triangles a few ulps apart.
fn symmetrize(s: &mut Array2<f64>) {
    let p = s.nrows();
    for i in 0..p {
        for j in (i + 1)..p {
            let v = 0.5 * (s[[i, j]] + s[[j, i]]);
            s[[i, j]] = v;
            s[[j, i]] = v;
        }
    }
}

/// Rejects non-square input and asymmetry beyond [`SYMMETRY_TOL`].
pub fn check_symmetric(w: ArrayView2<f64>) -> Result<()> {
    let (r, c) = w.dim();
    if r != c {
        return Err(Error::DimensionMismatch(format!("expected square matrix, got {r}x{c}")));
    }
    let mut worst = 0.0f64;
    for i in 0..r {
        for j in (i + 1)..r {
            worst = worst.max((w[[i, j]] - w[[j, i]]).abs());
        }
    }
    if worst > SYMMETRY_TOL || worst.is_nan() {
        return Err(Error::NotSymmetric {
            max_asymmetry: worst,
        });
    }
    Ok(())
}

/// Graph Laplacian `L = D - W`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    entries: Array2<f64>,
    degree: Array1<f64>,
}

impl LaplacianMatrix {
    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn degree(&self) -> &Array1<f64> {
        &self.degree
    }

    pub fn size(&self) -> usize {
        self.degree.len()
    }

    /// `tr(F^T L F)`.
    pub fn quadratic_trace(&self, f: ArrayView2<f64>) -> f64 {
        let lf = self.entries.dot(&f);
        (&f * &lf).sum()
    }
}

/// Builds `D - W` from a symmetric affinity (any square matrix view).
pub fn laplacian(w: ArrayView2<f64>) -> Result<LaplacianMatrix> {
    check_symmetric(w)?;
    let degree = w.sum_axis(Axis(1));
    let mut entries = w.mapv(|x| -x);
    for (i, &d) in degree.iter().enumerate() {
        entries[[i, i]] += d;
    }
    Ok(LaplacianMatrix { entries, degree })
}
