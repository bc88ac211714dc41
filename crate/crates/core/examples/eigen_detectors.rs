//! Sample covariance eigenvalues under noise only and under signal plus
//! noise, and every eigenvalue statistic computed from them.
//!
//! cargo run --release --example eigen_detectors

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specsense::covariance::{arrange_matrix, eigvals_hermitian, scm};
use specsense::detectors::{eigen_statistic_from_scm, t_cov, EigenTest};
use specsense::signal::{make_trial, ScenarioConfig};
use specsense::Hypothesis;

fn main() -> specsense::Result<()> {
    let cfg = ScenarioConfig::white(1600, 4, -5.0);
    let p = 4;
    for h in [Hypothesis::H0, Hypothesis::H1] {
        let y = make_trial(&cfg, h, &mut ChaCha8Rng::seed_from_u64(11))?;
        let s = scm(&arrange_matrix(&y, p)?);
        let e = eigvals_hermitian(&s)?;
        println!("{h:?}: eigenvalues {:.3?}", e.values());
        for t in [
            EigenTest::Sph,
            EigenTest::Mme,
            EigenTest::Met,
            EigenTest::Lbi,
            EigenTest::Ind,
            EigenTest::Fro,
            EigenTest::Max,
        ] {
            println!("  {:<4} {:.4}", format!("{t:?}").to_lowercase(), eigen_statistic_from_scm(t, &s)?);
        }
        println!("  cov  {:.4}", t_cov(&s)?);
    }
    Ok(())
}
