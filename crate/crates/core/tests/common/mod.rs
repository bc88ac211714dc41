//! Independent oracles and property checks shared by the `properties` and
//! `acceptance` test targets. Every property runs `PROPERTY_CASES` cases from
//! a fixed-seed generator.
#![allow(dead_code)]

use num_complex::Complex64;
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

use specsense::calibration::{calibrate, CalibrationProfile, ProfileBank};
use specsense::cli::iq::decode_iq_u8;
use specsense::covariance::{
    arrange_matrix, eigvals_hermitian, sample_correlation, scm, whitening_matrix, CMatrix,
    EigenSpectrum, HermitianMatrix,
};
use specsense::detectors::*;
use specsense::roc::{
    empirical_roc, run_trials, run_trials_with, threshold_for_pfa, RunOptions, TrialBatch,
};
use specsense::signal::{
    gen_colored_noise, gen_ofdm, gen_white_noise, make_trial, Hypothesis, IqBuffer, NoisePsdShape,
    ScenarioConfig,
};
use specsense::spectral::{band_bins, bartlett_periodogram, whiten_periodogram, Periodogram};
use specsense::validation::{anderson_darling, jarque_bera};

pub const PROPERTY_CASES: u32 = 1000;

type Check = Result<(), String>;

fn check<S>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Check
where
    S: Strategy,
    S::Value: std::fmt::Debug,
{
    let config = Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner =
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-300
}

fn ensure_close(what: &str, a: f64, b: f64, rel: f64) -> Result<(), TestCaseError> {
    ensure(close(a, b, rel), || format!("{what}: {a} vs {b} (rel tol {rel:e})"))
}

fn to_complex(pairs: Vec<(f64, f64)>) -> Vec<Complex64> {
    pairs.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()
}

fn complex_vec(len: impl Into<proptest::collection::SizeRange>) -> impl Strategy<Value = Vec<Complex64>> {
    vec((-5.0f64..5.0, -5.0f64..5.0), len).prop_map(to_complex)
}

/// Log-uniform scale factor in [1e-3, 1e3].
fn scale() -> impl Strategy<Value = f64> {
    (-3.0f64..3.0).prop_map(|e| 10f64.powf(e))
}

fn positive_bins(len: impl Into<proptest::collection::SizeRange>) -> impl Strategy<Value = Periodogram> {
    vec(1e-3f64..10.0, len).prop_map(|v| Periodogram::from_bins(v, 1).unwrap())
}

/// Frequency-ordered band with room for bins on both sides.
fn band() -> impl Strategy<Value = (f64, f64)> {
    (-0.45f64..0.3, 0.05f64..0.3).prop_map(|(lo, w)| (lo, (lo + w).min(0.45)))
}

// ---------------------------------------------------------------- oracles

/// Textbook O(n²) DFT.
pub fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            (0..n)
                .map(|t| {
                    let ang = -2.0 * std::f64::consts::PI * ((k * t) % n) as f64 / n as f64;
                    x[t] * Complex64::from_polar(1.0, ang)
                })
                .sum()
        })
        .collect()
}

pub fn naive_periodogram(y: &[Complex64], n_fft: usize, n_avg: usize) -> Vec<f64> {
    let mut acc = vec![0.0; n_fft];
    for k in 0..n_avg {
        for (a, z) in acc.iter_mut().zip(naive_dft(&y[k * n_fft..(k + 1) * n_fft])) {
            *a += z.norm_sqr();
        }
    }
    acc.iter().map(|a| a / (n_fft * n_avg) as f64).collect()
}

fn bin_in_band(i: usize, n: usize, lo: f64, hi: f64) -> bool {
    let f = if 2 * i < n { i as f64 / n as f64 } else { i as f64 / n as f64 - 1.0 };
    f >= lo - 1e-12 && f <= hi + 1e-12
}

/// Ratio of in-band to out-of-band diagonal entries of the frequency-domain
/// SCM built from block DFTs.
pub fn glrt_sufficient_statistic(y: &[Complex64], n_fft: usize, n_avg: usize, lo: f64, hi: f64) -> f64 {
    let blocks: Vec<Vec<Complex64>> =
        (0..n_avg).map(|k| naive_dft(&y[k * n_fft..(k + 1) * n_fft])).collect();
    let diag = |i: usize| blocks.iter().map(|b| (b[i] * b[i].conj()).re).sum::<f64>() / n_avg as f64;
    let (mut inside, mut outside) = (0.0, 0.0);
    for i in 0..n_fft {
        if bin_in_band(i, n_fft, lo, hi) {
            inside += diag(i);
        } else {
            outside += diag(i);
        }
    }
    inside / outside
}

/// Y·Yᴴ/q by explicit triple loop.
pub fn naive_scm(y: &[Complex64], p: usize) -> Vec<Vec<Complex64>> {
    let q = y.len() / p;
    let mut s = vec![vec![Complex64::new(0.0, 0.0); p]; p];
    for (i, row) in s.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            for k in 0..q {
                *v += y[k * p + i] * y[k * p + j].conj();
            }
            *v /= q as f64;
        }
    }
    s
}

/// Eigenvalues as roots of the characteristic polynomial: coefficients from
/// the Faddeev–LeVerrier recursion, roots by Durand–Kerner iteration.
pub fn charpoly_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let n = a.nrows();
    let id = CMatrix::identity(n, n);
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    c[n] = Complex64::new(1.0, 0.0);
    let mut m = CMatrix::zeros(n, n);
    for k in 1..=n {
        m = a * &m + &id * c[n - k + 1];
        c[n - k] = -(a * &m).trace() / k as f64;
    }
    let eval = |z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * z + ck);
    let radius = 1.0 + c[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..2000 {
        for k in 0..n {
            let denom: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| z[k] - z[j])
                .product();
            let step = eval(z[k]) / denom;
            z[k] -= step;
        }
    }
    let mut r: Vec<f64> = z.iter().map(|v| v.re).collect();
    r.sort_by(|a, b| b.total_cmp(a));
    r
}

/// Largest circular window sum by building each rotation explicitly.
pub fn window_enumeration(bins: &[f64], w: usize) -> f64 {
    let n = bins.len();
    let total: f64 = bins.iter().sum();
    let mut best = 0.0f64;
    for start in 0..n {
        let rotated: Vec<f64> = bins[start..].iter().chain(&bins[..start]).copied().collect();
        best = best.max(rotated[..w].iter().sum::<f64>());
    }
    best / total
}

/// `(pfa, pd)` at `xi` by counting every sample.
pub fn roc_count(b: &TrialBatch, xi: f64) -> (f64, f64) {
    let mut above0 = 0;
    for &v in &b.h0_stats {
        if v > xi {
            above0 += 1;
        }
    }
    let mut above1 = 0;
    for &v in &b.h1_stats {
        if v > xi {
            above1 += 1;
        }
    }
    (above0 as f64 / b.n_h0() as f64, above1 as f64 / b.n_h1() as f64)
}

fn random_pd(p: usize, entries: &[f64]) -> CMatrix {
    let x = CMatrix::from_fn(p, p, |i, j| Complex64::new(entries[2 * (i * p + j)], entries[2 * (i * p + j) + 1]));
    &x * x.adjoint() + CMatrix::identity(p, p) * Complex64::new(0.1, 0.0)
}

fn pd_strategy() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (2usize..=5).prop_flat_map(|p| (Just(p), vec(-1.0f64..1.0, 2 * p * p)))
}

fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn profile_for(s0: HermitianMatrix, b: CMatrix, k: CMatrix) -> Result<CalibrationProfile, String> {
    let r0 = sample_correlation(&s0).map_err(|e| e.to_string())?;
    let psd = Periodogram::from_bins(vec![1.0; 8], 1).unwrap();
    CalibrationProfile::from_parts(psd, s0, r0, b, k, 100_000).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- spectral

fn periodogram_case() -> impl Strategy<Value = (usize, usize, Vec<Complex64>)> {
    (2usize..=24, 1usize..=5, 0usize..5).prop_flat_map(|(n_fft, n_avg, extra)| {
        (Just(n_fft), Just(n_avg), complex_vec(n_fft * n_avg + extra))
    })
}

pub fn periodogram_matches_naive_dft() -> Check {
    check(periodogram_case(), |(n_fft, n_avg, y)| {
        let got = bartlett_periodogram(&IqBuffer::from_samples(y.clone()).unwrap(), n_fft, n_avg).unwrap();
        let want = naive_periodogram(&y, n_fft, n_avg);
        let scale = want.iter().copied().fold(1.0, f64::max);
        for (g, w) in got.bins().iter().zip(&want) {
            ensure((g - w).abs() <= 1e-9 * scale, || format!("bin {g} vs {w}"))?;
        }
        Ok(())
    })
}

pub fn parseval_energy() -> Check {
    check(periodogram_case(), |(n_fft, n_avg, y)| {
        let p = bartlett_periodogram(&IqBuffer::from_samples(y.clone()).unwrap(), n_fft, n_avg).unwrap();
        let energy: f64 = y[..n_fft * n_avg].iter().map(|z| z.norm_sqr()).sum::<f64>() / n_avg as f64;
        ensure_close("ed_all vs block energy", t_ed_all(&p), energy, 1e-9)
    })
}

pub fn periodogram_linear_in_power() -> Check {
    check((periodogram_case(), -3.0f64..3.0, 0.0f64..6.3), |((n_fft, n_avg, y), e, phase)| {
        let c = Complex64::from_polar(10f64.powf(e), phase);
        let a = bartlett_periodogram(&IqBuffer::from_samples(y.clone()).unwrap(), n_fft, n_avg).unwrap();
        let scaled: Vec<Complex64> = y.iter().map(|z| z * c).collect();
        let b = bartlett_periodogram(&IqBuffer::from_samples(scaled).unwrap(), n_fft, n_avg).unwrap();
        let c2 = c.norm_sqr();
        let top = a.bins().iter().copied().fold(0.0, f64::max) * c2;
        for (x, z) in a.bins().iter().zip(b.bins()) {
            ensure((z - c2 * x).abs() <= 1e-12 * top.max(1e-300), || format!("{z} vs {}", c2 * x))?;
        }
        Ok(())
    })
}

pub fn band_partition() -> Check {
    check((2usize..300, -0.5f64..0.5, -0.5f64..0.5), |(n, a, b)| {
        if a == b {
            return Ok(());
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let set = band_bins(lo, hi, n).unwrap();
        let mut all: Vec<usize> = set.in_band().iter().chain(set.out_band()).copied().collect();
        all.sort_unstable();
        ensure(all == (0..n).collect::<Vec<_>>(), || "not a partition".into())?;
        for &i in set.in_band() {
            ensure(bin_in_band(i, n, lo, hi), || format!("bin {i} wrongly in band"))?;
        }
        for &i in set.out_band() {
            ensure(!bin_in_band(i, n, lo, hi), || format!("bin {i} wrongly out of band"))?;
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- covariance

fn scm_case() -> impl Strategy<Value = (usize, Vec<Complex64>)> {
    (1usize..=6, 1usize..=20, 0usize..6).prop_flat_map(|(p, q, extra)| (Just(p), complex_vec(p * q + extra)))
}

pub fn scm_matches_naive() -> Check {
    check(scm_case(), |(p, y)| {
        let s = scm(&arrange_matrix(&IqBuffer::from_samples(y.clone()).unwrap(), p).unwrap());
        let want = naive_scm(&y, p);
        let scale = (0..p).map(|i| want[i][i].re).fold(1.0, f64::max);
        for i in 0..p {
            for j in 0..p {
                let d = (s.matrix()[(i, j)] - want[i][j]).norm();
                ensure(d <= 1e-12 * scale, || format!("entry ({i},{j}) off by {d}"))?;
            }
        }
        Ok(())
    })
}

pub fn scm_is_positive_semidefinite() -> Check {
    check(scm_case(), |(p, y)| {
        let s = scm(&arrange_matrix(&IqBuffer::from_samples(y).unwrap(), p).unwrap());
        let e = eigvals_hermitian(&s).unwrap();
        let top = e.values()[0];
        ensure(e.values().iter().all(|&v| v >= -1e-9 * top), || format!("{:?}", e.values()))
    })
}

fn hermitian_strategy() -> impl Strategy<Value = CMatrix> {
    (2usize..=4).prop_flat_map(|p| vec(-3.0f64..3.0, 2 * p * p)).prop_map(|v| {
        let p = ((v.len() / 2) as f64).sqrt() as usize;
        let x = CMatrix::from_fn(p, p, |i, j| Complex64::new(v[2 * (i * p + j)], v[2 * (i * p + j) + 1]));
        (&x + x.adjoint()) * Complex64::new(0.5, 0.0)
    })
}

pub fn eigenvalues_match_characteristic_polynomial() -> Check {
    check(hermitian_strategy(), |a| {
        let got = eigvals_hermitian(&HermitianMatrix::new(a.clone()).unwrap()).unwrap();
        let want = charpoly_eigenvalues(&a);
        let scale = 1.0 + want.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (g, w) in got.values().iter().zip(&want) {
            ensure((g - w).abs() <= 1e-6 * scale, || format!("{:?} vs {want:?}", got.values()))?;
        }
        Ok(())
    })
}

pub fn eigenvalues_scale_with_matrix() -> Check {
    check((hermitian_strategy(), scale()), |(a, c)| {
        let h = HermitianMatrix::new(a).unwrap();
        let e1 = eigvals_hermitian(&h).unwrap();
        let e2 = eigvals_hermitian(&h.scaled(c)).unwrap();
        let top = e1.values().iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (x, y) in e1.values().iter().zip(e2.values()) {
            ensure((y - c * x).abs() <= 1e-12 * c * top, || format!("{y} vs {}", c * x))?;
        }
        Ok(())
    })
}

pub fn correlation_is_scale_invariant() -> Check {
    check((pd_strategy(), scale()), |((p, v), c)| {
        let s = HermitianMatrix::new(random_pd(p, &v)).unwrap();
        let r1 = sample_correlation(&s).unwrap();
        let r2 = sample_correlation(&s.scaled(c)).unwrap();
        let d = max_abs_diff(r1.matrix(), r2.matrix());
        ensure(d <= 1e-12, || format!("differs by {d}"))
    })
}

pub fn whitening_identity() -> Check {
    check(pd_strategy(), |(p, v)| {
        let s = HermitianMatrix::new(random_pd(p, &v)).unwrap();
        let b = whitening_matrix(&s).unwrap();
        let w = &b * s.matrix() * b.adjoint();
        let d = max_abs_diff(&w, &CMatrix::identity(p, p));
        ensure(d <= 1e-9, || format!("B S Bᴴ deviates from I by {d}"))
    })
}

pub fn whitened_statistics_ignore_whitening_choice() -> Check {
    let strategy = pd_strategy().prop_flat_map(|(p, v)| {
        (Just(p), Just(v), vec(-1.0f64..1.0, 2 * p * p), vec(-1.0f64..1.0, 2 * p * p), vec(-1.0f64..1.0, 2 * p * p))
    });
    check(strategy, |(p, v, sv, uv, kv)| {
        let s0 = HermitianMatrix::new(random_pd(p, &v)).unwrap();
        let s = HermitianMatrix::new(random_pd(p, &sv)).unwrap();
        let b = whitening_matrix(&s0).unwrap();
        let k = whitening_matrix(&sample_correlation(&s0).unwrap()).unwrap();
        let unitary = |e: &[f64]| {
            CMatrix::from_fn(p, p, |i, j| Complex64::new(e[2 * (i * p + j)], e[2 * (i * p + j) + 1])).qr().q()
        };
        let base = profile_for(s0.clone(), b.clone(), k.clone()).map_err(TestCaseError::fail)?;
        let rotated =
            profile_for(s0, unitary(&uv) * b, unitary(&kv) * k).map_err(TestCaseError::fail)?;
        for test in [WhitenedTest::Sph, WhitenedTest::Lbi, WhitenedTest::Ind, WhitenedTest::Max] {
            let a = whitened_eigen_statistic(test, &s, &base).unwrap();
            let r = whitened_eigen_statistic(test, &s, &rotated).unwrap();
            ensure_close(&format!("{test:?}"), a, r, 1e-9)?;
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- detectors

fn frequency_case() -> impl Strategy<Value = (Periodogram, Periodogram, (f64, f64), f64)> {
    (4usize..=64).prop_flat_map(|n| (positive_bins(n), positive_bins(n), band(), scale()))
}

pub fn frequency_statistics_scale_invariant() -> Check {
    check(frequency_case(), |(p, w, (lo, hi), c)| {
        let n = p.n_fft();
        let band = band_bins(lo, hi, n).unwrap();
        let win = search_window_bins(hi - lo, n).min(n - 1);
        let pc = p.scaled(c);
        let q = whiten_periodogram(&p, &w).unwrap();
        let qc = whiten_periodogram(&pc, &w).unwrap();
        if !band.is_degenerate() {
            ensure_close("enp_ed", t_enp_ed(&p, &band).unwrap(), t_enp_ed(&pc, &band).unwrap(), 1e-12)?;
            ensure_close("w_enp_ed", t_w_enp_ed(&q, &band).unwrap(), t_w_enp_ed(&qc, &band).unwrap(), 1e-12)?;
        }
        ensure_close("sf", t_sf(&p).unwrap(), t_sf(&pc).unwrap(), 1e-12)?;
        ensure_close("f_agm", t_f_agm(&p).unwrap(), t_f_agm(&pc).unwrap(), 1e-12)?;
        ensure_close("search_b", t_search_b(&p, win).unwrap(), t_search_b(&pc, win).unwrap(), 1e-12)?;
        ensure_close("wf_agm", t_wf_agm(&q).unwrap(), t_wf_agm(&qc).unwrap(), 1e-12)?;
        ensure_close("fc", t_fc(&p, &w).unwrap(), t_fc(&pc, &w).unwrap(), 1e-12)?;
        // Divergence values near zero lose relative precision; compare on an
        // absolute floor as well.
        let (a, b) = (t_fkl(&p, &w).unwrap(), t_fkl(&pc, &w).unwrap());
        ensure((a - b).abs() <= 1e-12 * a.max(1e-3), || format!("fkl {a} vs {b}"))?;
        ensure_close("ed_all", t_ed_all(&pc), c * t_ed_all(&p), 1e-12)?;
        if !band.in_band().is_empty() {
            ensure_close("ed", t_ed(&pc, &band).unwrap(), c * t_ed(&p, &band).unwrap(), 1e-12)?;
        }
        Ok(())
    })
}

const EIGEN_TESTS: [EigenTest; 7] = [
    EigenTest::Sph,
    EigenTest::Mme,
    EigenTest::Met,
    EigenTest::Lbi,
    EigenTest::Ind,
    EigenTest::Fro,
    EigenTest::Max,
];

pub fn eigen_statistics_scale_invariant() -> Check {
    let strategy = pd_strategy()
        .prop_flat_map(|(p, v)| (Just(p), Just(v), vec(-1.0f64..1.0, 2 * p * p), scale()));
    check(strategy, |(p, v, v0, c)| {
        let lambdas: Vec<f64> = v.iter().take(p).map(|x| 0.05 + x.abs()).collect();
        let e = EigenSpectrum::new(lambdas.clone()).unwrap();
        let ec = EigenSpectrum::new(lambdas.iter().map(|x| x * c).collect()).unwrap();
        for t in [EigenTest::Sph, EigenTest::Mme, EigenTest::Met, EigenTest::Lbi] {
            ensure_close(&format!("{t:?} on λ"), eigen_statistic(t, &e).unwrap(), eigen_statistic(t, &ec).unwrap(), 1e-12)?;
        }
        let s = HermitianMatrix::new(random_pd(p, &v)).unwrap();
        let sc = s.scaled(c);
        for t in EIGEN_TESTS {
            ensure_close(
                &format!("{t:?} on S"),
                eigen_statistic_from_scm(t, &s).unwrap(),
                eigen_statistic_from_scm(t, &sc).unwrap(),
                1e-9,
            )?;
        }
        ensure_close("cov", t_cov(&s).unwrap(), t_cov(&sc).unwrap(), 1e-12)?;
        let s0 = HermitianMatrix::new(random_pd(p, &v0)).unwrap();
        let prof = profile_for(
            s0.clone(),
            whitening_matrix(&s0).unwrap(),
            whitening_matrix(&sample_correlation(&s0).unwrap()).unwrap(),
        )
        .map_err(TestCaseError::fail)?;
        for t in [WhitenedTest::Sph, WhitenedTest::Lbi, WhitenedTest::Ind, WhitenedTest::Max] {
            ensure_close(
                &format!("whitened {t:?}"),
                whitened_eigen_statistic(t, &s, &prof).unwrap(),
                whitened_eigen_statistic(t, &sc, &prof).unwrap(),
                1e-9,
            )?;
        }
        Ok(())
    })
}

pub fn statistic_bounds() -> Check {
    check((frequency_case(), pd_strategy()), |((p, w, (lo, hi), _), (dim, v))| {
        let n = p.n_fft();
        let eps = 1e-12;
        let sf = t_sf(&p).unwrap();
        ensure(sf > 0.0 && sf <= 1.0, || format!("sf {sf}"))?;
        let agm = t_f_agm(&p).unwrap();
        ensure(agm >= 1.0 - eps, || format!("f_agm {agm}"))?;
        let kl = t_fkl(&p, &w).unwrap();
        ensure(kl >= 0.0, || format!("fkl {kl}"))?;
        let fc = t_fc(&p, &w).unwrap();
        ensure((0.0..=1.0).contains(&fc), || format!("fc {fc}"))?;
        let sb = t_search_b(&p, search_window_bins(hi - lo, n).min(n - 1)).unwrap();
        ensure(sb > 0.0 && sb <= 1.0, || format!("search_b {sb}"))?;

        let lambdas: Vec<f64> = v.iter().take(dim).map(|x| x.abs()).collect();
        let e = EigenSpectrum::new(lambdas).unwrap();
        let inv = 1.0 / dim as f64;
        if e.values()[dim - 1] > 0.0 {
            let sph = eigen_statistic(EigenTest::Sph, &e).unwrap();
            ensure(sph > 0.0 && sph <= 1.0, || format!("sph {sph}"))?;
        }
        if e.values()[0] > 0.0 {
            let met = eigen_statistic(EigenTest::Met, &e).unwrap();
            ensure(met >= inv - eps && met <= 1.0 + eps, || format!("met {met}"))?;
            let lbi = eigen_statistic(EigenTest::Lbi, &e).unwrap();
            ensure(lbi >= inv - eps && lbi <= 1.0 + eps, || format!("lbi {lbi}"))?;
        }
        Ok(())
    })
}

pub fn whitened_reduce_under_white_calibration() -> Check {
    check((frequency_case(), pd_strategy()), |((p, _, (lo, hi), _), (dim, v))| {
        let ones = Periodogram::from_bins(vec![1.0; p.n_fft()], 1).unwrap();
        let q = whiten_periodogram(&p, &ones).unwrap();
        let band = band_bins(lo, hi, p.n_fft()).unwrap();
        if !band.is_degenerate() {
            ensure(t_w_enp_ed(&q, &band).unwrap() == t_enp_ed(&p, &band).unwrap(), || "w_enp_ed".into())?;
        }
        ensure(t_wf_agm(&q).unwrap() == t_f_agm(&p).unwrap(), || "wf_agm".into())?;

        let id = CMatrix::identity(dim, dim);
        let prof = profile_for(HermitianMatrix::identity(dim), id.clone(), id).map_err(TestCaseError::fail)?;
        let s = HermitianMatrix::new(random_pd(dim, &v)).unwrap();
        for (w, plain) in [
            (WhitenedTest::Sph, EigenTest::Sph),
            (WhitenedTest::Lbi, EigenTest::Lbi),
            (WhitenedTest::Ind, EigenTest::Ind),
            (WhitenedTest::Max, EigenTest::Max),
        ] {
            let a = whitened_eigen_statistic(w, &s, &prof).unwrap();
            let b = eigen_statistic_from_scm(plain, &s).unwrap();
            ensure(a == b, || format!("{w:?}: {a} vs {b}"))?;
        }
        Ok(())
    })
}

pub fn search_b_matches_window_enumeration() -> Check {
    let strategy = (2usize..=40).prop_flat_map(|n| (positive_bins(n), 1..n));
    check(strategy, |(p, w)| {
        ensure_close("search_b", t_search_b(&p, w).unwrap(), window_enumeration(p.bins(), w), 1e-12)
    })
}

pub fn enp_ed_equals_glrt_statistic() -> Check {
    let strategy = (prop::sample::select(vec![4usize, 8, 16, 32]), 1usize..=6, band())
        .prop_flat_map(|(n_fft, n_avg, b)| (Just(n_fft), Just(n_avg), Just(b), complex_vec(n_fft * n_avg)));
    check(strategy, |(n_fft, n_avg, (lo, hi), y)| {
        let band = band_bins(lo, hi, n_fft).unwrap();
        if band.is_degenerate() {
            return Ok(());
        }
        let p = bartlett_periodogram(&IqBuffer::from_samples(y.clone()).unwrap(), n_fft, n_avg).unwrap();
        ensure_close(
            "enp_ed vs GLRT",
            t_enp_ed(&p, &band).unwrap(),
            glrt_sufficient_statistic(&y, n_fft, n_avg, lo, hi),
            1e-9,
        )
    })
}

pub fn lag_product_matches_explicit_shift() -> Check {
    check((complex_vec(1..60), 0usize..8), |(y, lag)| {
        let n = y.len();
        let shifted: Vec<Complex64> = (0..n).map(|k| y[(k + n * 8 - lag) % n]).collect();
        let want: Complex64 = shifted.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        let got = lag_product(&y, lag);
        let scale: f64 = y.iter().map(|z| z.norm_sqr()).sum::<f64>().max(1.0);
        ensure((got - want).norm() <= 1e-12 * scale, || format!("{got} vs {want}"))
    })
}

// ---------------------------------------------------------------- roc

fn batch_strategy() -> impl Strategy<Value = TrialBatch> {
    (vec(0u8..20, 1..60), vec(0u8..25, 1..60), 0usize..4, 0usize..4).prop_map(|(h0, h1, x0, x1)| TrialBatch {
        detector: Detector::periodogram(DetectorKind::EnpEd, 16, 1),
        h0_stats: h0.into_iter().map(|v| v as f64 * 0.5).collect(),
        h1_stats: h1.into_iter().map(|v| v as f64 * 0.5).collect(),
        excluded_h0: x0,
        excluded_h1: x1,
        config: ScenarioConfig::white(16, 1, 0.0),
        seed: 0,
    })
}

pub fn roc_matches_counting() -> Check {
    check(batch_strategy(), |b| {
        let roc = empirical_roc(&b);
        for pt in &roc.points {
            let (pfa, pd) = roc_count(&b, pt.threshold);
            ensure(pt.pfa == pfa && pt.pd == pd, || format!("{pt:?} vs ({pfa}, {pd})"))?;
        }
        let mut uniq = b.h0_stats.clone();
        uniq.sort_by(f64::total_cmp);
        uniq.dedup();
        ensure(roc.points.len() == uniq.len() + 1, || "one point per distinct H0 value".into())
    })
}

pub fn roc_is_monotone() -> Check {
    check(batch_strategy(), |b| {
        let roc = empirical_roc(&b);
        for w in roc.points.windows(2) {
            ensure(w[0].threshold < w[1].threshold, || "thresholds not increasing".into())?;
            ensure(w[1].pfa <= w[0].pfa && w[1].pd <= w[0].pd, || format!("{:?} -> {:?}", w[0], w[1]))?;
        }
        let first = roc.points[0];
        let full0 = b.h0_stats.len() as f64 / b.n_h0() as f64;
        let full1 = b.h1_stats.len() as f64 / b.n_h1() as f64;
        ensure(first.pfa == full0 && first.pd == full1, || format!("{first:?}"))?;
        if b.excluded_h0 == 0 && b.excluded_h1 == 0 {
            ensure(first.pfa == 1.0 && first.pd == 1.0, || format!("{first:?}"))?;
        }
        Ok(())
    })
}

pub fn threshold_realizes_target() -> Check {
    check((vec(0u8..30, 1..200), 0.01f64..0.99), |(h0, target)| {
        let h0: Vec<f64> = h0.into_iter().map(f64::from).collect();
        let xi = threshold_for_pfa(&h0, target).unwrap();
        let n = h0.len() as f64;
        let realized = h0.iter().filter(|&&v| v > xi).count() as f64 / n;
        ensure(realized <= target + 1e-12, || format!("realized {realized} > {target}"))?;
        // No lower sample value would still meet the target.
        let lower = h0.iter().copied().filter(|&v| v < xi).fold(f64::NEG_INFINITY, f64::max);
        if lower.is_finite() {
            let r = h0.iter().filter(|&&v| v > lower).count() as f64 / n;
            ensure(r > target, || format!("threshold {lower} would also do"))?;
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- validation, calibration, io

pub fn gof_location_scale_invariant() -> Check {
    let strategy = (vec(-10.0f64..10.0, 20..200), 0.1f64..10.0, any::<bool>(), -100.0f64..100.0);
    check(strategy, |(x, a, neg, b)| {
        let a = if neg { -a } else { a };
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        for (name, f) in [("jb", jarque_bera as fn(&[f64], f64) -> _), ("ad", anderson_darling)] {
            let (s1, s2) = (f(&x, 0.05).unwrap().statistic, f(&y, 0.05).unwrap().statistic);
            ensure((s1 - s2).abs() <= 1e-9 * s1.abs().max(1.0), || format!("{name}: {s1} vs {s2}"))?;
        }
        Ok(())
    })
}

pub fn profile_round_trip() -> Check {
    check((any::<u64>(), 2usize..=4), |(seed, p)| {
        let y = gen_white_noise(800, 1.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let prof = calibrate(&y, 8, 100, p).unwrap();
        let back = CalibrationProfile::from_json(&prof.to_json()).unwrap();
        ensure(back == prof, || "round trip changed the profile".into())
    })
}

pub fn calibration_scales_with_input() -> Check {
    check((any::<u64>(), scale()), |(seed, c)| {
        let y = gen_white_noise(800, 1.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let a = calibrate(&y, 8, 100, 3).unwrap();
        let b = calibrate(&y.clone().scaled(c), 8, 100, 3).unwrap();
        for (x, z) in a.noise_psd().bins().iter().zip(b.noise_psd().bins()) {
            ensure_close("psd", *z, c * c * x, 1e-9)?;
        }
        let top = a.b_whiten().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let d = max_abs_diff(&(b.b_whiten() * Complex64::new(c, 0.0)), a.b_whiten());
        ensure(d <= 1e-9 * top, || format!("B scaling off by {d}"))
    })
}

/// Every byte pair against the documented mapping.
pub fn iq_byte_mapping() -> Check {
    let mut bytes = Vec::with_capacity(2 * 65536);
    for i in 0..=255u8 {
        for q in 0..=255u8 {
            bytes.extend([i, q]);
        }
    }
    let y = decode_iq_u8(&bytes).map_err(|e| e.to_string())?;
    for (k, z) in y.samples().iter().enumerate() {
        let (i, q) = (bytes[2 * k] as f64, bytes[2 * k + 1] as f64);
        if z.re != (i - 127.5) / 127.5 || z.im != (q - 127.5) / 127.5 {
            return Err(format!("pair {k} maps to {z}"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- signal

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

pub fn flat_colored_noise_is_white() -> Check {
    let n = 10_000;
    let flat = NoisePsdShape::white(128).unwrap();
    let c = gen_colored_noise(n, &flat, 1.0, &mut ChaCha8Rng::seed_from_u64(21)).map_err(|e| e.to_string())?;
    let w = gen_white_noise(n, 1.0, &mut ChaCha8Rng::seed_from_u64(22)).map_err(|e| e.to_string())?;
    let re = |y: &IqBuffer| y.samples().iter().map(|z| z.re).collect::<Vec<_>>();
    let d = ks_two_sample(&re(&c), &re(&w));
    // c(0.01) = 1.628 for the two-sample statistic.
    let crit = 1.628 * (2.0 / n as f64).sqrt();
    // Also against the exact marginal N(0, 1/2).
    let mut x = re(&c);
    x.sort_by(f64::total_cmp);
    let d1 = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = 0.5 * erfc(-v);
            (f - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - f)
        })
        .fold(0.0, f64::max);
    if d > crit || d1 > 1.628 / (n as f64).sqrt() {
        return Err(format!("KS rejects: two-sample D={d:.4} (crit {crit:.4}), one-sample D={d1:.4}"));
    }
    Ok(())
}

pub fn generators_are_deterministic() -> Check {
    check((any::<u64>(), 1usize..=8, -20.0f64..20.0, any::<bool>()), |(seed, osf, snr, h1)| {
        let mut cfg = ScenarioConfig::white(64 * osf, osf, snr);
        cfg.uncertainty_db = 2.0;
        let h = if h1 { Hypothesis::H1 } else { Hypothesis::H0 };
        let a = make_trial(&cfg, h, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = make_trial(&cfg, h, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        ensure(a == b, || "buffers differ".into())
    })
}

pub fn power_calibration() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 100_000;
    let s = gen_ofdm(n, 4, &mut rng).map_err(|e| e.to_string())?.scaled(0.1f64.sqrt());
    let w = gen_white_noise(n, 1.0, &mut rng).map_err(|e| e.to_string())?;
    let lowpass = NoisePsdShape::default_lowpass(128).unwrap();
    let c = gen_colored_noise(n, &lowpass, 1.0, &mut rng).map_err(|e| e.to_string())?;
    for (name, got, want) in [("signal", s.power(), 0.1), ("white", w.power(), 1.0), ("colored", c.power(), 1.0)] {
        if (got / want - 1.0).abs() > 0.02 {
            return Err(format!("{name} power {got} vs {want}"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- harness

pub const ALL_DETECTORS: &str = "ed_all@128x12,ed@128x12,enp_ed@128x12,f_agm@16x100,sf@16x100,search_b@16x100,\
w_enp_ed@128x12,wf_agm@16x100,fc@16x100,fkl@16x100,sph@4,mme@4,met@4,lbi@4,ind@4,fro@4,max@4,cov@4,\
ac@0,ac1@0,w_sph@4,w_lbi@4,w_ind@4,w_max@4";

/// Large scores must mean H1 for every registered detector.
pub fn orientation_at_0db() -> Check {
    let cfg = ScenarioConfig::white(1600, 4, 0.0);
    let dets = Detector::parse_list(ALL_DETECTORS, &cfg).map_err(|e| e.to_string())?;
    for k in DetectorKind::ALL {
        if !dets.iter().any(|d| d.kind == k) {
            return Err(format!("{k} missing from the orientation check"));
        }
    }
    let bank = ProfileBank::synthesize(&cfg, &dets, 41).map_err(|e| e.to_string())?;
    let batches = run_trials(&cfg, &dets, 1000, 42, &bank).map_err(|e| e.to_string())?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    for b in &batches {
        let (m0, m1) = (mean(&b.h0_stats), mean(&b.h1_stats));
        if m1 < m0 {
            return Err(format!("{}: mean H1 score {m1} below mean H0 score {m0}", b.detector.label()));
        }
    }
    Ok(())
}

pub fn worker_count_independent() -> Check {
    let cfg = ScenarioConfig::white(800, 4, -5.0);
    let dets = Detector::parse_list("enp_ed@64x12,sph@4,ac1@-5,search_b@16x50", &cfg).map_err(|e| e.to_string())?;
    let bank = ProfileBank::default();
    let run = |w| {
        run_trials_with(&cfg, &dets, 200, 51, &bank, &RunOptions {
            shared_randomness: true,
            workers: Some(w),
        })
        .map_err(|e| e.to_string())
    };
    if run(1)? != run(3)? {
        return Err("results depend on the worker count".into());
    }
    Ok(())
}

/// Name and outcome of every check, in a stable order.
pub fn invariant_suite() -> Vec<(&'static str, Check)> {
    let checks: [(&'static str, fn() -> Check); 30] = [
        ("periodogram_matches_naive_dft", periodogram_matches_naive_dft),
        ("parseval_energy", parseval_energy),
        ("periodogram_linear_in_power", periodogram_linear_in_power),
        ("band_partition", band_partition),
        ("scm_matches_naive", scm_matches_naive),
        ("scm_is_positive_semidefinite", scm_is_positive_semidefinite),
        ("eigenvalues_match_characteristic_polynomial", eigenvalues_match_characteristic_polynomial),
        ("eigenvalues_scale_with_matrix", eigenvalues_scale_with_matrix),
        ("correlation_is_scale_invariant", correlation_is_scale_invariant),
        ("whitening_identity", whitening_identity),
        ("whitened_statistics_ignore_whitening_choice", whitened_statistics_ignore_whitening_choice),
        ("frequency_statistics_scale_invariant", frequency_statistics_scale_invariant),
        ("eigen_statistics_scale_invariant", eigen_statistics_scale_invariant),
        ("statistic_bounds", statistic_bounds),
        ("whitened_reduce_under_white_calibration", whitened_reduce_under_white_calibration),
        ("search_b_matches_window_enumeration", search_b_matches_window_enumeration),
        ("enp_ed_equals_glrt_statistic", enp_ed_equals_glrt_statistic),
        ("lag_product_matches_explicit_shift", lag_product_matches_explicit_shift),
        ("roc_matches_counting", roc_matches_counting),
        ("roc_is_monotone", roc_is_monotone),
        ("threshold_realizes_target", threshold_realizes_target),
        ("gof_location_scale_invariant", gof_location_scale_invariant),
        ("profile_round_trip", profile_round_trip),
        ("calibration_scales_with_input", calibration_scales_with_input),
        ("iq_byte_mapping", iq_byte_mapping),
        ("flat_colored_noise_is_white", flat_colored_noise_is_white),
        ("generators_are_deterministic", generators_are_deterministic),
        ("power_calibration", power_calibration),
        ("orientation_at_0db", orientation_at_0db),
        ("worker_count_independent", worker_count_independent),
    ];
    checks.iter().map(|&(name, f)| (name, f())).collect()
}
