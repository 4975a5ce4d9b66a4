//! Strong-form residuals at collocation points and the PINN loss program.

use crate::autodiff::{Graph, Jet2, Program, Scalar};
use crate::error::{Error, Result};
use crate::geometry::{Point, PolygonalBoundary};
use crate::network::{forward, forward_jets, MlpArchitecture};
use crate::problems::{Family, ProblemSpec};

use super::{exact_bc_layer, BLayer, BcMethod};

/// Dirichlet datum at a boundary point, looked up on the segment carrying it.
pub fn dirichlet_value(boundary: &PolygonalBoundary, p: Point) -> Result<f64> {
    for (i, s) in boundary.segments().iter().enumerate() {
        if boundary.is_dirichlet(i) && s.distance(p) < 1e-9 {
            return boundary.segment_data_value(i, p);
        }
    }
    Err(Error::Geometry(format!(
        "point ({}, {}) is not on the Dirichlet boundary",
        p[0], p[1]
    )))
}

/// Strong-form residual of a scalar problem at a point, from the solution jet.
/// Coefficients enter as constants of the ambient scalar type, so the same
/// code evaluates numbers and records programs.
pub fn strong_residual<S: Scalar>(family: &Family, p: Point, w: Jet2<S>) -> Result<S> {
    let like = w.v;
    Ok(match family {
        Family::Elliptic(c) => {
            let mj = c.mu.jet_at(p);
            let [b0, b1] = {
                let (x, y) = Jet2::at_point(p);
                c.beta.jet(x, y)
            };
            let s = c.sigma.value(p);
            -(like.lift(mj.v) * w.laplacian()
                + like.lift(mj.dx) * w.dx
                + like.lift(mj.dy) * w.dy)
                + like.lift(b0.v) * w.dx
                + like.lift(b1.v) * w.dy
                + like.lift(s) * w.v
                - like.lift((c.f)(p))
        }
        Family::ParametricNonlinear { coeffs: c, p: pp } => {
            let mj = c.mu.jet_at(p);
            let [b0, b1] = {
                let (x, y) = Jet2::at_point(p);
                c.beta.jet(x, y)
            };
            let s = c.sigma.value(p);
            -(like.lift(mj.v) * w.laplacian()
                + like.lift(mj.dx) * w.dx
                + like.lift(mj.dy) * w.dy)
                + like.lift(b0.v) * w.dx
                + like.lift(b1.v) * w.dy
                + like.lift(s) * (like.lift(*pp) * w.v).sin() * w.v
                - like.lift((c.f)(p))
        }
        Family::Eikonal { eps, f } => {
            let norm = (w.dx * w.dx + w.dy * w.dy + like.lift(1e-12)).sqrt();
            -(like.lift(*eps) * w.laplacian()) + norm - like.lift(f(p))
        }
        Family::Convection { beta } => w.dy + like.lift(*beta) * w.dx,
        Family::Elasticity { .. } => {
            return Err(Error::config(
                "elasticity is vector-valued; use strong_residual_vector",
            ))
        }
    })
}

/// Strong-form residual `div(sigma(w)) + f` of the elasticity problem.
pub fn strong_residual_vector<S: Scalar>(
    family: &Family,
    p: Point,
    w: [Jet2<S>; 2],
) -> Result<[S; 2]> {
    let Family::Elasticity {
        lame_mu,
        lame_lambda,
        f,
        ..
    } = family
    else {
        return Err(Error::config("vector residuals require the elasticity family"));
    };
    let like = w[0].v;
    let fv = {
        let (x, y) = Jet2::at_point(p);
        f.jet(x, y)
    };
    let (mu, la) = (*lame_mu, *lame_lambda);
    let [u, v] = w;
    let rx = like.lift(2.0 * mu + la) * u.dxx
        + like.lift(mu) * u.dyy
        + like.lift(mu + la) * v.dxy
        + like.lift(fv[0].v);
    let ry = like.lift(2.0 * mu + la) * v.dyy
        + like.lift(mu) * v.dxx
        + like.lift(mu + la) * u.dxy
        + like.lift(fv[1].v);
    Ok([rx, ry])
}

/// Residuals of a scalar solution evaluator at the given points.
pub fn pinn_residuals(
    problem: &ProblemSpec,
    w: &dyn Fn(Point) -> Jet2<f64>,
    points: &[Point],
) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|&p| strong_residual(&problem.family, p, w(p)))
        .collect()
}

/// A fully specified PINN: network, method, point sets and regularization.
pub struct PinnModel {
    pub problem: ProblemSpec,
    pub arch: MlpArchitecture,
    pub method: BcMethod,
    pub collocation: Vec<Point>,
    /// Boundary control points; used by the penalty method only.
    pub control_points: Vec<Point>,
    pub blayer: Option<BLayer>,
    pub lambda_reg: f64,
}

impl PinnModel {
    pub fn new(
        problem: ProblemSpec,
        arch: MlpArchitecture,
        method: BcMethod,
        collocation: Vec<Point>,
        control_points: Vec<Point>,
        lambda_reg: f64,
    ) -> Result<Self> {
        method.validate()?;
        if matches!(method, BcMethod::Nitsche { .. }) {
            return Err(Error::config("Nitsche's method is variational; use a VPINN"));
        }
        let n_out = if problem.is_vector_valued() { 2 } else { 1 };
        if arch.n_out() != n_out {
            return Err(Error::config(format!(
                "problem needs {} network output(s), architecture has {}",
                n_out,
                arch.n_out()
            )));
        }
        if problem.is_vector_valued() && method.is_exact() {
            return Err(Error::config(
                "exact boundary imposition for vector problems is wired for VPINNs only",
            ));
        }
        let blayer = exact_bc_layer(&problem, &method)?;
        if let Some(layer) = &blayer {
            for &p in &collocation {
                if !layer.adf.laplacian_available_at(p) {
                    return Err(Error::config(format!(
                        "collocation point ({}, {}) lies inside the vertex-exclusion zone",
                        p[0], p[1]
                    )));
                }
            }
        }
        if matches!(method, BcMethod::Penalty { .. }) {
            for &p in &control_points {
                if !problem.boundary.on_dirichlet(p, 1e-9) {
                    return Err(Error::config(format!(
                        "control point ({}, {}) is not on the Dirichlet boundary",
                        p[0], p[1]
                    )));
                }
            }
        }
        Ok(PinnModel {
            problem,
            arch,
            method,
            collocation,
            control_points,
            blayer,
            lambda_reg,
        })
    }

    /// Residual values for a concrete weight vector (direct f64 path).
    pub fn residual_values(&self, weights: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for &p in &self.collocation {
            let (x, y) = Jet2::at_point(p);
            let nets = forward_jets(&self.arch, weights, &[x, y]);
            if self.problem.is_vector_valued() {
                let r = strong_residual_vector(&self.problem.family, p, [nets[0], nets[1]])?;
                out.extend(r);
            } else {
                let w = match &self.blayer {
                    Some(layer) => layer.wrap(p, nets[0])?,
                    None => nets[0],
                };
                out.push(strong_residual(&self.problem.family, p, w)?);
            }
        }
        Ok(out)
    }
}

/// Record the PINN loss as a program over the flat weight vector:
/// sum of squared residuals, plus the penalty term under M_A, plus L2
/// weight regularization.
pub fn build_pinn_loss(model: &PinnModel) -> Result<Program> {
    let g = Graph::new();
    let winputs = g.inputs(model.arch.n_weights());
    let mut residuals = Vec::new();
    for &p in &model.collocation {
        let xj = Jet2::var(g.constant(p[0]), 0);
        let yj = Jet2::var(g.constant(p[1]), 1);
        let nets = forward_jets(&model.arch, &winputs, &[xj, yj]);
        if model.problem.is_vector_valued() {
            let r = strong_residual_vector(&model.problem.family, p, [nets[0], nets[1]])?;
            residuals.extend(r);
        } else {
            let w = match &model.blayer {
                Some(layer) => layer.wrap(p, nets[0])?,
                None => nets[0],
            };
            residuals.push(strong_residual(&model.problem.family, p, w)?);
        }
    }
    let mut loss = g.sum_squares(&residuals);
    if let BcMethod::Penalty { lambda } = model.method {
        let mut misfits = Vec::new();
        for &p in &model.control_points {
            let x = [g.constant(p[0]), g.constant(p[1])];
            let vals = forward(&model.arch, &winputs, &x);
            if model.problem.is_vector_valued() {
                let Family::Elasticity { g: gd, .. } = &model.problem.family else {
                    unreachable!()
                };
                let (xj, yj) = Jet2::at_point(p);
                let gv = gd.jet(xj, yj);
                misfits.push(vals[0] - gv[0].v);
                misfits.push(vals[1] - gv[1].v);
            } else {
                let gv = dirichlet_value(&model.problem.boundary, p)?;
                misfits.push(vals[0] - gv);
            }
        }
        loss = loss + g.sum_squares(&misfits) * lambda;
    }
    if model.lambda_reg > 0.0 {
        loss = loss + g.sum_squares(&winputs) * model.lambda_reg;
    }
    Ok(g.finish(loss))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Workspace;
    use crate::network::{init_weights, input_jet};
    use crate::problems::{catalog, interior_samples};
    use crate::geometry::domains::Domain;

    #[test]
    fn manufactured_solution_zeroes_residuals() {
        let problem = catalog("elliptic_sol2").unwrap();
        let u = problem.exact.clone().unwrap();
        let points = interior_samples(problem.domain, 50);
        let w = |p: Point| u.jet_at(p);
        let r = pinn_residuals(&problem, &w, &points).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-8), "{r:?}");
    }

    #[test]
    fn linear_function_is_harmonic() {
        use crate::field::constant;
        use crate::problems::{EllipticCoefficients, Family};
        use std::sync::Arc;
        let family = Family::Elliptic(EllipticCoefficients {
            mu: Arc::new(constant(1.0)),
            beta: Arc::new(|x: Jet2<f64>, _y: Jet2<f64>| {
                [Jet2::constant_like(x.v, 0.0), Jet2::constant_like(x.v, 0.0)]
            }),
            sigma: Arc::new(constant(0.0)),
            f: Arc::new(|_| 0.0),
            psi: None,
        });
        let w = |p: Point| {
            let (x, y) = Jet2::at_point(p);
            x.scale(2.0) - y + 0.5
        };
        for p in [[0.1, 0.2], [0.9, 0.4], [0.5, 0.5]] {
            let r = strong_residual(&family, p, w(p)).unwrap();
            assert!(r.abs() < 1e-14);
        }
    }

    #[test]
    fn network_residual_matches_finite_differences() {
        let problem = catalog("elliptic_sol2").unwrap();
        let arch = MlpArchitecture::scalar_net(2, 2, 8);
        let wts = init_weights(&arch, 21);
        let points = interior_samples(problem.domain, 5);
        let w = |p: Point| {
            let (x, y) = Jet2::at_point(p);
            forward_jets(&arch, &wts, &[x, y])[0]
        };
        let r = pinn_residuals(&problem, &w, &points).unwrap();
        // Finite-difference Laplacian oracle for the leading term.
        let h = 1e-5;
        for (i, &p) in points.iter().enumerate() {
            let f = |p: [f64; 2]| forward(&arch, &wts, &p)[0];
            let fp = f(p);
            let lap = (f([p[0] + h, p[1]]) + f([p[0] - h, p[1]]) + f([p[0], p[1] + h])
                + f([p[0], p[1] - h])
                - 4.0 * fp)
                / (h * h);
            let jet = input_jet(&arch, &wts, p, 2).unwrap();
            let hess = &jet.hessian.unwrap()[0];
            assert!((hess[0] + hess[2] - lap).abs() < 1e-4 * (1.0 + lap.abs()), "point {i}");
            assert!(r[i].is_finite());
        }
    }

    #[test]
    fn nitsche_with_pinn_is_rejected() {
        let problem = catalog("elliptic_sol2").unwrap();
        let arch = MlpArchitecture::scalar_net(2, 1, 4);
        let err = PinnModel::new(
            problem,
            arch,
            BcMethod::Nitsche { gamma: 1.0 },
            vec![],
            vec![],
            0.0,
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn penalty_scales_linearly_in_lambda() {
        let problem = catalog("elliptic_sol2").unwrap();
        let arch = MlpArchitecture::scalar_net(2, 1, 6);
        let wts = init_weights(&arch, 3);
        let coll = interior_samples(problem.domain, 10);
        let ctrl = problem.boundary.sample_dirichlet(8);
        let loss_at = |lambda: f64| -> f64 {
            let model = PinnModel::new(
                catalog("elliptic_sol2").unwrap(),
                arch.clone(),
                BcMethod::Penalty { lambda },
                coll.clone(),
                ctrl.clone(),
                0.0,
            )
            .unwrap();
            let prog = build_pinn_loss(&model).unwrap();
            prog.eval(&wts, &mut Workspace::default())
        };
        let base = {
            let model = PinnModel::new(
                problem,
                arch.clone(),
                BcMethod::Penalty { lambda: 1.0 },
                coll.clone(),
                vec![],
                0.0,
            )
            .unwrap();
            let prog = build_pinn_loss(&model).unwrap();
            prog.eval(&wts, &mut Workspace::default())
        };
        let l1 = loss_at(1.0);
        let l1000 = loss_at(1000.0);
        let penalty = l1 - base;
        assert!(penalty > 0.0);
        assert!((l1000 - base - 1000.0 * penalty).abs() < 1e-9 * (1.0 + l1000.abs()));
    }

    #[test]
    fn exact_mode_loss_program_matches_direct_residuals() {
        let problem = catalog("elliptic_sol2").unwrap();
        let arch = MlpArchitecture::scalar_net(2, 1, 6);
        let wts = init_weights(&arch, 9);
        let coll = interior_samples(problem.domain, 12);
        let model = PinnModel::new(
            problem,
            arch,
            BcMethod::ExactNormalized { m: 1 },
            coll,
            vec![],
            0.0,
        )
        .unwrap();
        let prog = build_pinn_loss(&model).unwrap();
        let loss = prog.eval(&wts, &mut Workspace::default());
        let direct: f64 = model
            .residual_values(&wts)
            .unwrap()
            .iter()
            .map(|r| r * r)
            .sum();
        assert!((loss - direct).abs() < 1e-12 * (1.0 + direct.abs()));
    }

    #[test]
    fn loss_gradient_matches_finite_differences() {
        let problem = catalog("convection").unwrap();
        let arch = MlpArchitecture::scalar_net(2, 1, 5);
        let wts = init_weights(&arch, 4);
        let coll = interior_samples(Domain::Rect, 8);
        let model = PinnModel::new(
            problem,
            arch.clone(),
            BcMethod::ExactProduct,
            coll,
            vec![],
            1e-6,
        )
        .unwrap();
        let prog = build_pinn_loss(&model).unwrap();
        let mut ws = Workspace::default();
        let mut grad = vec![0.0; arch.n_weights()];
        prog.eval_with_gradient(&wts, &mut ws, &mut grad);
        let h = 1e-6;
        for &i in &[0usize, 3, 10, arch.n_weights() - 1] {
            let mut wp = wts.clone();
            let mut wm = wts.clone();
            wp[i] += h;
            wm[i] -= h;
            let fd = (prog.eval(&wp, &mut ws) - prog.eval(&wm, &mut ws)) / (2.0 * h);
            assert!(
                (grad[i] - fd).abs() < 1e-5 * (1.0 + fd.abs()),
                "w[{i}]: {} vs {fd}",
                grad[i]
            );
        }
    }

    #[test]
    fn convection_exact_solution_residual_vanishes() {
        let problem = catalog("convection").unwrap();
        let u = problem.exact.clone().unwrap();
        let points = interior_samples(Domain::Rect, 40);
        let w = |p: Point| u.jet_at(p);
        let r = pinn_residuals(&problem, &w, &points).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-10));
    }
}
