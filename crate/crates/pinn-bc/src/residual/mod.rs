//! PINN and interpolated-VPINN losses under the four boundary-condition
//! methods: penalty (M_A), exact via normalized ADF (M_B), exact via product
//! ADF (M_C), and Nitsche (M_D, VPINN only).

pub mod pinn;
pub mod vpinn;

use std::sync::Arc;

use crate::autodiff::{Jet2, Scalar};
use crate::error::{Error, Result};
use crate::field::Field2;
use crate::geometry::adf::{AdfField, AdfMode};
use crate::geometry::{Point, TransfiniteExtension};
use crate::problems::{Family, ProblemSpec};

pub use pinn::{build_pinn_loss, pinn_residuals, PinnModel};
pub use vpinn::{
    assemble_vpinn, build_spaces, build_vpinn_loss, trial_coefficients, vpinn_residuals,
    vpinn_residuals_loop, VpinnModel, VpinnSpaces, VpinnSystem,
};

/// How Dirichlet conditions enter the loss.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum BcMethod {
    /// M_A: quadratic penalty of weight `lambda` at boundary control points.
    Penalty { lambda: f64 },
    /// M_B: exact imposition through the normalized ADF of order `m`.
    ExactNormalized { m: u32 },
    /// M_C: exact imposition through the plain product ADF.
    ExactProduct,
    /// M_D: Nitsche's weak imposition with stabilization `gamma`.
    Nitsche { gamma: f64 },
}

impl BcMethod {
    pub fn is_exact(&self) -> bool {
        matches!(self, BcMethod::ExactNormalized { .. } | BcMethod::ExactProduct)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BcMethod::Penalty { lambda } if lambda <= 0.0 => {
                Err(Error::config("penalty weight lambda must be positive"))
            }
            BcMethod::ExactNormalized { m } if m == 0 => {
                Err(Error::config("ADF normalization order m must be positive"))
            }
            BcMethod::Nitsche { gamma } if gamma <= 0.0 => {
                Err(Error::config("Nitsche stabilization gamma must be positive"))
            }
            _ => Ok(()),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            BcMethod::Penalty { .. } => "ma",
            BcMethod::ExactNormalized { .. } => "mb",
            BcMethod::ExactProduct => "mc",
            BcMethod::Nitsche { .. } => "md",
        }
    }
}

/// Lift a plain jet into another scalar context as constants.
pub fn lift_jet<S: Scalar>(like: S, j: Jet2<f64>) -> Jet2<S> {
    Jet2 {
        v: like.lift(j.v),
        dx: like.lift(j.dx),
        dy: like.lift(j.dy),
        dxx: like.lift(j.dxx),
        dxy: like.lift(j.dxy),
        dyy: like.lift(j.dyy),
    }
}

/// The non-trainable output layer `(Bw)(x) = gbar(x) + phi(x) w(x)` that makes
/// any network satisfy the Dirichlet data exactly.
pub struct BLayer {
    pub adf: Arc<AdfField>,
    pub gbar: Arc<TransfiniteExtension>,
}

impl BLayer {
    /// Wrap a network output jet at a fixed point; derivatives follow the
    /// product rule through the ADF and extension jets.
    pub fn wrap<S: Scalar>(&self, p: Point, w: Jet2<S>) -> Result<Jet2<S>> {
        let (x, y) = Jet2::at_point(p);
        let phi = self.adf.eval_jet(x, y);
        let g = self.gbar.try_jet(x, y)?;
        Ok(lift_jet(w.v, g) + lift_jet(w.v, phi) * w)
    }

    /// Value-and-gradient factors at a point: `(gbar, phi)` as plain jets.
    pub fn factors(&self, p: Point) -> Result<(Jet2<f64>, Jet2<f64>)> {
        let (x, y) = Jet2::at_point(p);
        Ok((self.gbar.try_jet(x, y)?, self.adf.eval_jet(x, y)))
    }
}

/// Construct the B-layer for an exact method, or `None` for penalty/Nitsche.
/// The convection problem uses the space-time ADF `phi(x, t) = x t`, for which
/// the normalized and product constructions coincide.
pub fn exact_bc_layer(problem: &ProblemSpec, method: &BcMethod) -> Result<Option<BLayer>> {
    method.validate()?;
    if !method.is_exact() {
        return Ok(None);
    }
    let adf = if matches!(problem.family, Family::Convection { .. }) {
        let phi_x: Arc<dyn Field2> = Arc::new(|x: Jet2<f64>, _y: Jet2<f64>| x);
        let phi_t: Arc<dyn Field2> = Arc::new(|_x: Jet2<f64>, y: Jet2<f64>| y);
        AdfField::from_custom(vec![phi_x, phi_t], AdfMode::Product)
    } else {
        let mode = match *method {
            BcMethod::ExactNormalized { m } => AdfMode::Normalized { m },
            _ => AdfMode::Product,
        };
        AdfField::from_boundary(&problem.boundary, mode)
    };
    let gbar = TransfiniteExtension::new(problem.boundary.clone())?;
    Ok(Some(BLayer {
        adf: Arc::new(adf),
        gbar: Arc::new(gbar),
    }))
}

/// Where collocation and control points come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum PointPlacement {
    /// Interpolation nodes of the trial space (interior or boundary subset).
    MeshNodes,
    /// Seeded uniform draw over the domain (or its Dirichlet boundary).
    Random { seed: u64 },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{forward_jets, init_weights, MlpArchitecture};
    use crate::problems::catalog;

    #[test]
    fn method_validation() {
        assert!(BcMethod::Penalty { lambda: 1e3 }.validate().is_ok());
        assert!(BcMethod::Penalty { lambda: 0.0 }.validate().is_err());
        assert!(BcMethod::Nitsche { gamma: -1.0 }.validate().is_err());
        assert!(BcMethod::ExactNormalized { m: 1 }.validate().is_ok());
        assert_eq!(BcMethod::ExactProduct.tag(), "mc");
    }

    #[test]
    fn b_layer_matches_data_on_boundary() {
        let problem = catalog("elliptic_sol2").unwrap();
        let layer = exact_bc_layer(&problem, &BcMethod::ExactNormalized { m: 1 })
            .unwrap()
            .unwrap();
        let arch = MlpArchitecture::scalar_net(2, 1, 8);
        let w = init_weights(&arch, 5);
        let u = problem.exact.as_ref().unwrap();
        for p in problem.boundary.sample_dirichlet(60) {
            let (x, y) = Jet2::at_point(p);
            let net = forward_jets(&arch, &w, &[x, y])[0];
            let b = layer.wrap(p, net).unwrap();
            assert!((b.v - u.value(p)).abs() < 1e-10, "{p:?}");
        }
    }

    #[test]
    fn b_layer_reduces_to_extension_for_zero_network() {
        let problem = catalog("elliptic_sol5").unwrap();
        let layer = exact_bc_layer(&problem, &BcMethod::ExactProduct)
            .unwrap()
            .unwrap();
        for p in [[0.7, -0.3], [-0.9, 0.9], [0.25, 0.75]] {
            let b = layer.wrap(p, Jet2::<f64>::constant(0.0)).unwrap();
            assert!((b.v - layer.gbar.value(p).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn b_layer_componentwise_recomputation() {
        let problem = catalog("elliptic_sol2").unwrap();
        let layer = exact_bc_layer(&problem, &BcMethod::ExactNormalized { m: 2 })
            .unwrap()
            .unwrap();
        let arch = MlpArchitecture::scalar_net(2, 2, 6);
        let w = init_weights(&arch, 17);
        for p in [[0.6, 0.8], [-0.4, -0.2], [0.9, -0.9]] {
            let (x, y) = Jet2::at_point(p);
            let net = forward_jets(&arch, &w, &[x, y])[0];
            let b = layer.wrap(p, net).unwrap();
            let expect = layer.gbar.value(p).unwrap() + layer.adf.value(p) * net.v;
            assert!((b.v - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn convection_layer_is_product_of_coordinates() {
        let problem = catalog("convection").unwrap();
        for method in [BcMethod::ExactNormalized { m: 1 }, BcMethod::ExactProduct] {
            let layer = exact_bc_layer(&problem, &method).unwrap().unwrap();
            let p = [0.3, 0.8];
            assert!((layer.adf.value(p) - 0.24).abs() < 1e-14);
        }
    }
}
