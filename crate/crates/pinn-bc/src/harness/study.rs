//! Convergence studies: per-level errors, a log-log rate fit, and a noise
//! flag for non-monotone error decay.

use crate::error::{Error, Result};
use crate::mesh::generate_mesh;
use crate::residual::BcMethod;

use super::config::{ExperimentConfig, ModelKind};
use super::oracle::least_squares_oracle;
use super::run::run_experiment;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyMode {
    /// Training-free least-squares minimizer per level.
    Oracle,
    /// Full training run per level.
    Trained,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StudyResult {
    pub levels: Vec<u32>,
    pub meshsizes: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log(error)` vs `log(h)`; present with >= 3
    /// levels.
    pub rate: Option<f64>,
    /// Set when any refinement increases the error by more than 10%.
    pub noisy: bool,
    pub config_hash: String,
    pub seed: u64,
}

/// Least-squares slope of `log(e)` against `log(h)`.
pub fn fit_rate(h: &[f64], e: &[f64]) -> f64 {
    assert_eq!(h.len(), e.len());
    assert!(h.len() >= 2);
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let den: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    num / den
}

fn is_noisy(errors: &[f64]) -> bool {
    errors.windows(2).any(|w| w[1] > 1.1 * w[0])
}

/// Run the configured experiment once per mesh level and fit the decay rate.
/// VPINN rate studies require the rate-optimal quadrature order
/// `q = k_int + k_test - 2`.
pub fn convergence_study(
    cfg: &ExperimentConfig,
    levels: &[u32],
    mode: StudyMode,
) -> Result<StudyResult> {
    cfg.validate()?;
    if levels.len() < 3 {
        return Err(Error::config("a convergence study needs at least 3 levels"));
    }
    if matches!(cfg.model, ModelKind::Vpinn) || mode == StudyMode::Oracle {
        let expect = (cfg.k_int + cfg.k_test).saturating_sub(2).max(1);
        if cfg.q_value() != expect {
            return Err(Error::config(format!(
                "rate studies need q = k_int + k_test - 2 = {expect}, got {}",
                cfg.q_value()
            )));
        }
    }
    let problem = cfg.resolve_problem()?;
    let method = cfg.bc_method()?;
    let mut meshsizes = Vec::with_capacity(levels.len());
    let mut errors = Vec::with_capacity(levels.len());
    for &level in levels {
        meshsizes.push(generate_mesh(problem.domain, level)?.meshsize());
        let err = match mode {
            StudyMode::Oracle => {
                let sol = least_squares_oracle(
                    &problem,
                    &method,
                    level,
                    cfg.k_int,
                    cfg.k_test,
                    cfg.q_value(),
                    cfg.test_refines,
                )?;
                sol.h1_error.ok_or_else(|| {
                    Error::config("oracle studies need a problem with an exact solution")
                })?
            }
            StudyMode::Trained => {
                let mut level_cfg = cfg.clone();
                level_cfg.level = level;
                level_cfg.out_dir = cfg
                    .out_dir
                    .as_ref()
                    .map(|d| d.join(format!("level{level}")));
                let rec = run_experiment(&level_cfg)?;
                rec.final_h1.ok_or_else(|| {
                    Error::config("trained studies need a measurable H1 error")
                })?
            }
        };
        errors.push(err);
    }
    let rate = (levels.len() >= 3).then(|| fit_rate(&meshsizes, &errors));
    Ok(StudyResult {
        levels: levels.to_vec(),
        meshsizes,
        noisy: is_noisy(&errors),
        errors,
        rate,
        config_hash: cfg.hash(),
        seed: cfg.seed,
    })
}

/// Nitsche needs an elliptic problem; other methods work for any oracle case.
pub fn method_applies(method: &BcMethod, elliptic: bool) -> bool {
    elliptic || !matches!(method, BcMethod::Nitsche { .. })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_log_linear_data() {
        let h = [1.0, 0.5, 0.25];
        let e = [1.0, 1.0 / 16.0, 1.0 / 256.0];
        assert!((fit_rate(&h, &e) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn constant_errors_give_zero_rate() {
        let h = [1.0, 0.5, 0.25, 0.125];
        let e = [0.3; 4];
        assert!(fit_rate(&h, &e).abs() < 1e-12);
    }

    #[test]
    fn noise_flag_threshold() {
        assert!(!is_noisy(&[1.0, 0.5, 0.54]));
        assert!(is_noisy(&[1.0, 0.5, 0.56]));
        assert!(!is_noisy(&[1.0, 0.2, 0.04]));
    }

    #[test]
    fn too_few_levels_rejected() {
        let mut cfg = ExperimentConfig::default();
        cfg.domain = Some("unit-square".into());
        assert!(convergence_study(&cfg, &[0, 1], StudyMode::Oracle).is_err());
    }

    #[test]
    fn off_relation_quadrature_rejected_for_rate_studies() {
        let mut cfg = ExperimentConfig::default();
        cfg.domain = Some("unit-square".into());
        cfg.q = Some(7);
        assert!(convergence_study(&cfg, &[0, 1, 2], StudyMode::Oracle).is_err());
    }

    #[test]
    fn oracle_study_converges_on_a_small_case() {
        let mut cfg = ExperimentConfig::default();
        cfg.domain = Some("unit-square".into());
        cfg.k_int = 2;
        cfg.k_test = 1;
        cfg.q = None;
        cfg.test_refines = 1;
        let study = convergence_study(&cfg, &[0, 1, 2], StudyMode::Oracle).unwrap();
        assert_eq!(study.errors.len(), 3);
        assert!(study.errors[2] < study.errors[0]);
        let rate = study.rate.unwrap();
        assert!(rate > 1.0, "rate {rate}");
        assert_eq!(study.config_hash, cfg.hash());
    }
}
