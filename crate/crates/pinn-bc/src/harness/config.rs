//! Experiment configuration: a flat TOML-serializable record with defaults
//! for every field, plus the mapping onto problem specs and methods.

use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::network::MlpArchitecture;
use crate::problems::{catalog, elliptic_on, parametric_instance, ParameterRange, ProblemSpec};
use crate::residual::BcMethod;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Pinn,
    Vpinn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlacementKind {
    MeshNodes,
    UniformDraw,
}

/// One experiment, fully determined up to the seed ensemble.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Catalog case id.
    pub problem: String,
    /// Domain override for the elliptic cases: `unit-square`, `l-shape`,
    /// `square-with-hole`, or `rect`.
    pub domain: Option<String>,
    /// Parameter value for the parametric case.
    pub param_p: Option<f64>,
    pub model: ModelKind,
    /// Method tag: `ma`, `mb`, `mc`, or `md`.
    pub method: String,
    pub lambda: f64,
    pub m: u32,
    pub gamma: f64,
    pub level: u32,
    pub k_int: usize,
    pub k_test: usize,
    /// Quadrature order; defaults to `k_int + k_test - 2`.
    pub q: Option<usize>,
    /// Red refinements from the trial mesh to the test mesh.
    pub test_refines: u32,
    pub hidden_layers: usize,
    pub width: usize,
    pub seed: u64,
    /// Ensemble size; seeds `seed..seed + n_seeds`, best final error kept.
    pub n_seeds: usize,
    pub adam_epochs: usize,
    pub adam_lr: f64,
    pub qn_iters: usize,
    pub lambda_reg: f64,
    pub placement: PlacementKind,
    /// Interior collocation count for PINNs; defaults to the interior trial
    /// dimension at (`level`, `k_int`).
    pub n_collocation: Option<usize>,
    /// Boundary control count for the penalty method; defaults to about the
    /// square root of the trial dimension.
    pub n_control: Option<usize>,
    /// Epoch interval between H1 measurements during training.
    pub probe_interval: usize,
    /// External reference solution (mesh text file plus nodal coefficients)
    /// used as the error target when no exact solution exists.
    pub reference_mesh: Option<PathBuf>,
    pub reference_coeffs: Option<PathBuf>,
    pub reference_degree: usize,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem: "elliptic_sol2".into(),
            domain: None,
            param_p: None,
            model: ModelKind::Vpinn,
            method: "mb".into(),
            lambda: 1e3,
            m: 1,
            gamma: 1.0,
            level: 2,
            k_int: 4,
            k_test: 1,
            q: None,
            test_refines: 2,
            hidden_layers: 2,
            width: 20,
            seed: 0,
            n_seeds: 1,
            adam_epochs: 2000,
            adam_lr: 1e-2,
            qn_iters: 500,
            lambda_reg: 0.0,
            placement: PlacementKind::MeshNodes,
            n_collocation: None,
            n_control: None,
            probe_interval: 100,
            reference_mesh: None,
            reference_coeffs: None,
            reference_degree: 1,
            out_dir: None,
        }
    }
}

fn parse_domain(s: &str) -> Result<Domain> {
    match s {
        "unit-square" => Ok(Domain::UnitSquare),
        "l-shape" => Ok(Domain::LShape),
        "square-with-hole" => Ok(Domain::SquareWithHole),
        "rect" => Ok(Domain::Rect),
        other => Err(Error::config(format!("unknown domain '{other}'"))),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.bc_method()?.validate()?;
        if self.k_int < 1 || self.k_test < 1 {
            return Err(Error::config("polynomial degrees must be at least 1"));
        }
        if self.hidden_layers < 1 || self.width < 1 {
            return Err(Error::config("network must have at least one hidden neuron"));
        }
        if self.n_seeds < 1 {
            return Err(Error::config("seed ensemble must be nonempty"));
        }
        if self.q == Some(0) {
            return Err(Error::config("quadrature order must be at least 1"));
        }
        if self.reference_mesh.is_some() != self.reference_coeffs.is_some() {
            return Err(Error::config(
                "reference mesh and coefficients must be supplied together",
            ));
        }
        Ok(())
    }

    pub fn bc_method(&self) -> Result<BcMethod> {
        match self.method.as_str() {
            "ma" => Ok(BcMethod::Penalty {
                lambda: self.lambda,
            }),
            "mb" => Ok(BcMethod::ExactNormalized { m: self.m }),
            "mc" => Ok(BcMethod::ExactProduct),
            "md" => Ok(BcMethod::Nitsche { gamma: self.gamma }),
            other => Err(Error::config(format!(
                "unknown method tag '{other}' (expected ma, mb, mc, or md)"
            ))),
        }
    }

    /// Quadrature order, defaulting to the rate-optimal `k_int + k_test - 2`.
    pub fn q_value(&self) -> usize {
        self.q.unwrap_or((self.k_int + self.k_test).saturating_sub(2).max(1))
    }

    /// Build the problem this configuration refers to.
    pub fn resolve_problem(&self) -> Result<ProblemSpec> {
        if let Some(p) = self.param_p {
            if self.problem != "parametric" {
                return Err(Error::config(
                    "param_p applies to the parametric case only",
                ));
            }
            return parametric_instance(p, &ParameterRange::default());
        }
        match (&self.domain, self.problem.as_str()) {
            (None, id) => catalog(id),
            (Some(d), "elliptic_sol2") => elliptic_on(parse_domain(d)?, 2),
            (Some(d), "elliptic_sol5") => elliptic_on(parse_domain(d)?, 5),
            (Some(_), id) => Err(Error::config(format!(
                "domain overrides apply to the elliptic cases only, not '{id}'"
            ))),
        }
    }

    pub fn architecture(&self, n_out: usize) -> Result<MlpArchitecture> {
        let mut widths = vec![2];
        widths.extend(std::iter::repeat(self.width).take(self.hidden_layers));
        widths.push(n_out);
        MlpArchitecture::new(widths)
    }

    /// Hex SHA-256 of the canonical TOML form; embedded in every output file.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_toml() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.q_value(), 3);
        assert!(matches!(
            cfg.bc_method().unwrap(),
            BcMethod::ExactNormalized { m: 1 }
        ));
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.problem = "convection".into();
        cfg.model = ModelKind::Pinn;
        cfg.method = "mc".into();
        cfg.q = Some(5);
        cfg.out_dir = Some(PathBuf::from("/tmp/xyz"));
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("not_a_key = 1").is_err());
    }

    #[test]
    fn bad_method_rejected() {
        let mut cfg = ExperimentConfig::default();
        cfg.method = "me".into();
        assert!(cfg.validate().is_err());
        cfg.method = "ma".into();
        cfg.lambda = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn domain_override_resolution() {
        let mut cfg = ExperimentConfig::default();
        cfg.domain = Some("unit-square".into());
        let p = cfg.resolve_problem().unwrap();
        assert_eq!(p.domain, Domain::UnitSquare);
        cfg.problem = "convection".into();
        assert!(cfg.resolve_problem().is_err());
    }

    #[test]
    fn parametric_resolution() {
        let mut cfg = ExperimentConfig::default();
        cfg.problem = "parametric".into();
        cfg.param_p = Some(1.5);
        let p = cfg.resolve_problem().unwrap();
        assert!(p.id.contains("1.5"));
        cfg.param_p = Some(3.0);
        assert!(cfg.resolve_problem().is_err());
    }

    #[test]
    fn architecture_shape() {
        let cfg = ExperimentConfig::default();
        let arch = cfg.architecture(1).unwrap();
        assert_eq!(arch.layer_widths, vec![2, 20, 20, 1]);
    }
}
