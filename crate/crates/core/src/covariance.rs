//! Time-domain machinery: sample matrix arrangement, sample covariance and
//! correlation matrices, Hermitian eigenvalues, whitening matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::IqBuffer;

pub type CMatrix = DMatrix<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues in `[-EIGEN_FLOOR·λ₁, 0)` are treated as numerical zeros.
pub const EIGEN_FLOOR: f64 = 1e-9;

/// Smallest admissible λ_min/λ_max for a matrix to count as positive definite.
pub const PD_RATIO: f64 = 1e-12;

/// The received vector arranged as a p×q matrix, column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: CMatrix,
}

impl SampleMatrix {
    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }
}

/// Column `j` holds samples `j·p .. (j+1)·p`; q = ⌊N/p⌋ and trailing samples are dropped.
pub fn arrange_matrix(y: &IqBuffer, p: usize) -> Result<SampleMatrix> {
    if p < 1 {
        return Err(Error::invalid("p must be >= 1"));
    }
    if y.len() < p {
        return Err(Error::invalid(format!("need at least p={p} samples, got {}", y.len())));
    }
    let q = y.len() / p;
    Ok(SampleMatrix {
        data: CMatrix::from_column_slice(p, q, &y.samples()[..p * q]),
    })
}

/// Square complex matrix that is conjugate-symmetric with a real diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: CMatrix,
}

impl HermitianMatrix {
    /// Validates Hermitian symmetry within 1e-12 (relative to the largest
    /// entry), then stores the exactly symmetrized matrix.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::invalid("Hermitian matrix must be square and non-empty"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let scale = m.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        let n = m.nrows();
        for i in 0..n {
            for j in i..n {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > HERMITIAN_TOL * scale {
                    return Err(Error::invalid(format!("matrix is not Hermitian at ({i}, {j})")));
                }
            }
        }
        Ok(Self::symmetrized(m))
    }

    fn symmetrized(m: CMatrix) -> Self {
        let n = m.nrows();
        let mut out = m.clone();
        for i in 0..n {
            out[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for j in i + 1..n {
                let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        Self { data: out }
    }

    pub fn identity(p: usize) -> Self {
        Self {
            data: CMatrix::identity(p, p),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.data[(i, i)].re).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            data: self.data.map(|z| z * c),
        }
    }

    /// `T · self · Tᴴ`, re-symmetrized.
    pub fn congruence(&self, t: &CMatrix) -> Result<Self> {
        if t.ncols() != self.dim() {
            return Err(Error::invalid(format!(
                "dimension mismatch: transform has {} columns, matrix is {}x{}",
                t.ncols(),
                self.dim(),
                self.dim()
            )));
        }
        Ok(Self::symmetrized(t * &self.data * t.adjoint()))
    }
}

/// `Y·Yᴴ / q`.
pub fn scm(y: &SampleMatrix) -> HermitianMatrix {
    let q = y.cols() as f64;
    let s = (&y.data * y.data.adjoint()).map(|z| z / q);
    HermitianMatrix::symmetrized(s)
}

/// `D^{-1/2} S D^{-1/2}` with D the diagonal of S.
pub fn sample_correlation(s: &HermitianMatrix) -> Result<HermitianMatrix> {
    let d: Vec<f64> = (0..s.dim()).map(|i| s.data[(i, i)].re).collect();
    if let Some(i) = d.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::degenerate(format!("diagonal entry {i} is not positive")));
    }
    let inv_sqrt: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
    let mut r = s.data.clone();
    for i in 0..s.dim() {
        for j in 0..s.dim() {
            r[(i, j)] = s.data[(i, j)] * (inv_sqrt[i] * inv_sqrt[j]);
        }
        r[(i, i)] = Complex64::new(1.0, 0.0);
    }
    Ok(HermitianMatrix::symmetrized(r))
}

/// Real eigenvalues sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    values: Vec<f64>,
}

impl EigenSpectrum {
    /// Sorts `values` descending.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("eigenvalues must be finite and non-empty"));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values with numerical negatives (down to `-EIGEN_FLOOR·λ₁`) set to zero.
    /// Anything more negative is reported as degenerate.
    pub fn clamped(&self) -> Result<Vec<f64>> {
        let top = self.values[0].max(0.0);
        self.values
            .iter()
            .map(|&v| {
                if v >= 0.0 {
                    Ok(v)
                } else if v >= -EIGEN_FLOOR * top {
                    Ok(0.0)
                } else {
                    Err(Error::degenerate(format!("negative eigenvalue {v} (λ₁ = {top})")))
                }
            })
            .collect()
    }
}

pub fn eigvals_hermitian(h: &HermitianMatrix) -> Result<EigenSpectrum> {
    let values = h.data.clone().symmetric_eigenvalues();
    EigenSpectrum::new(values.iter().copied().collect())
}

/// B with `B · S0 · Bᴴ = I`: the inverse of the lower Cholesky factor of S0.
pub fn whitening_matrix(s0: &HermitianMatrix) -> Result<CMatrix> {
    let eig = eigvals_hermitian(s0)?;
    let (max, min) = (eig.values()[0], *eig.values().last().unwrap());
    if !(max > 0.0 && min > PD_RATIO * max) {
        return Err(Error::CalibrationFailed(format!(
            "covariance is not positive definite (λ_max = {max:e}, λ_min = {min:e})"
        )));
    }
    let chol = s0
        .data
        .clone()
        .cholesky()
        .ok_or_else(|| Error::CalibrationFailed("Cholesky factorization failed".into()))?;
    let p = s0.dim();
    let l = chol.l();
    l.solve_lower_triangular(&CMatrix::identity(p, p))
        .ok_or_else(|| Error::CalibrationFailed("Cholesky factor is singular".into()))
}
