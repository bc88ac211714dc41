//! Covariance-based statistics: eigenvalue tests on the SCM and on the sample
//! correlation matrix, the covariance detector, and their whitened variants.

use crate::calibration::CalibrationProfile;
use crate::covariance::{eigvals_hermitian, sample_correlation, EigenSpectrum, HermitianMatrix};
use crate::error::{Error, Result};

/// Eigenvalue test. `Sph`..`Lbi` read SCM eigenvalues λ; `Ind`, `Fro`, `Max`
/// read sample-correlation eigenvalues μ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EigenTest {
    /// Geometric over arithmetic mean.
    Sph,
    /// λ₁ / λ_p.
    Mme,
    /// λ₁ / Σλ.
    Met,
    /// Σλ² / (Σλ)².
    Lbi,
    /// Πμ.
    Ind,
    /// Σμ².
    Fro,
    /// μ₁.
    Max,
}

impl EigenTest {
    /// True for tests defined on the sample correlation matrix.
    pub fn uses_correlation(self) -> bool {
        matches!(self, EigenTest::Ind | EigenTest::Fro | EigenTest::Max)
    }
}

pub fn eigen_statistic(test: EigenTest, e: &EigenSpectrum) -> Result<f64> {
    if e.len() < 2 {
        return Err(Error::invalid("eigenvalue tests need p >= 2"));
    }
    let v = e.clamped()?;
    let p = v.len() as f64;
    let sum: f64 = v.iter().sum();
    let nonzero_sum = || {
        if sum > 0.0 {
            Ok(sum)
        } else {
            Err(Error::degenerate("eigenvalues sum to zero"))
        }
    };
    match test {
        EigenTest::Sph => {
            if v.iter().any(|&x| x <= 0.0) {
                return Err(Error::degenerate("sphericity needs positive eigenvalues"));
            }
            let log_gm = v.iter().map(|x| x.ln()).sum::<f64>() / p;
            Ok((log_gm - (sum / p).ln()).exp().min(1.0))
        }
        EigenTest::Mme => {
            let last = v[v.len() - 1];
            if last <= 0.0 {
                return Err(Error::degenerate("smallest eigenvalue is zero"));
            }
            Ok(v[0] / last)
        }
        EigenTest::Met => Ok(v[0] / nonzero_sum()?),
        EigenTest::Lbi => {
            let s = nonzero_sum()?;
            Ok(v.iter().map(|x| x * x).sum::<f64>() / (s * s))
        }
        EigenTest::Ind => {
            if v.iter().any(|&x| x <= 0.0) {
                return Err(Error::degenerate("independence test needs positive eigenvalues"));
            }
            Ok(v.iter().product())
        }
        EigenTest::Fro => Ok(v.iter().map(|x| x * x).sum()),
        EigenTest::Max => Ok(v[0]),
    }
}

/// Eigenvalue test applied to the SCM `s`, routing correlation-based tests
/// through the sample correlation matrix.
pub fn eigen_statistic_from_scm(test: EigenTest, s: &HermitianMatrix) -> Result<f64> {
    let e = if test.uses_correlation() {
        eigvals_hermitian(&sample_correlation(s)?)?
    } else {
        eigvals_hermitian(s)?
    };
    eigen_statistic(test, &e)
}

/// `Σ|s_nm| / tr(S)`.
pub fn t_cov(s: &HermitianMatrix) -> Result<f64> {
    let tr = s.trace();
    if tr <= 0.0 {
        return Err(Error::degenerate("covariance trace is not positive"));
    }
    Ok(s.matrix().iter().map(|z| z.norm()).sum::<f64>() / tr)
}

/// Eigenvalue tests after time-domain whitening with calibrated matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WhitenedTest {
    Sph,
    Lbi,
    Ind,
    Max,
}

impl WhitenedTest {
    fn base(self) -> EigenTest {
        match self {
            WhitenedTest::Sph => EigenTest::Sph,
            WhitenedTest::Lbi => EigenTest::Lbi,
            WhitenedTest::Ind => EigenTest::Ind,
            WhitenedTest::Max => EigenTest::Max,
        }
    }
}

/// SCM-based kinds use the eigenvalues of `B·S·Bᴴ`; correlation-based kinds
/// use those of `K·R·Kᴴ` with R the sample correlation of S.
pub fn whitened_eigen_statistic(
    test: WhitenedTest,
    s: &HermitianMatrix,
    profile: &CalibrationProfile,
) -> Result<f64> {
    if s.dim() != profile.p() {
        return Err(Error::invalid(format!(
            "SCM is {0}x{0} but calibration profile has p = {1}",
            s.dim(),
            profile.p()
        )));
    }
    let base = test.base();
    let whitened = if base.uses_correlation() {
        sample_correlation(s)?.congruence(profile.k_whiten())?
    } else {
        s.congruence(profile.b_whiten())?
    };
    eigen_statistic(base, &eigvals_hermitian(&whitened)?)
}
