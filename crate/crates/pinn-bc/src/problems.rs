//! Benchmark problem catalog: second-order elliptic cases with manufactured
//! solutions, a parametric nonlinear reaction problem, linear elasticity,
//! the stabilized eikonal equation and a space-time convection problem.

use std::sync::Arc;

use crate::autodiff::Jet2;
use crate::error::{Error, Result};
use crate::field::{Field2, VectorField2};
use crate::geometry::domains::{self, Domain};
use crate::geometry::{Point, PolygonalBoundary};

/// Pointwise source term; only values are ever needed.
pub type SourceFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct EllipticCoefficients {
    pub mu: Arc<dyn Field2>,
    pub beta: Arc<dyn VectorField2>,
    pub sigma: Arc<dyn Field2>,
    pub f: SourceFn,
    /// Neumann datum on non-Dirichlet segments, if any.
    pub psi: Option<SourceFn>,
}

#[derive(Clone)]
pub enum Family {
    /// `-div(mu grad u) + beta . grad u + sigma u = f`
    Elliptic(EllipticCoefficients),
    /// `-div(mu grad u) + beta . grad u + sigma sin(p u) u = f`
    ParametricNonlinear {
        coeffs: EllipticCoefficients,
        p: f64,
    },
    /// `-div sigma(u) = f` with isotropic linear elasticity; vector-valued.
    Elasticity {
        lame_mu: f64,
        lame_lambda: f64,
        f: Arc<dyn VectorField2>,
        g: Arc<dyn VectorField2>,
    },
    /// `-eps lap u + |grad u| = f`
    Eikonal { eps: f64, f: SourceFn },
    /// `u_t + beta u_x = 0` on the space-time square; `y` plays time.
    Convection { beta: f64 },
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub id: String,
    pub domain: Domain,
    /// Boundary with Dirichlet data attached to every Dirichlet segment.
    pub boundary: Arc<PolygonalBoundary>,
    pub family: Family,
    /// Known exact solution (scalar problems only).
    pub exact: Option<Arc<dyn Field2>>,
}

impl ProblemSpec {
    pub fn exact_value_grad(&self) -> Option<impl Fn(Point) -> (f64, [f64; 2]) + '_> {
        let u = self.exact.as_ref()?;
        Some(move |p: Point| u.value_grad(p))
    }

    pub fn is_vector_valued(&self) -> bool {
        matches!(self.family, Family::Elasticity { .. })
    }
}

/// Manufacture the elliptic source from an exact solution:
/// `f = -(mu lap u + grad mu . grad u) + beta . grad u + sigma u`.
fn manufacture_elliptic_source(
    mu: Arc<dyn Field2>,
    beta: Arc<dyn VectorField2>,
    sigma: Arc<dyn Field2>,
    u: Arc<dyn Field2>,
) -> SourceFn {
    Arc::new(move |p: Point| {
        let (x, y) = Jet2::at_point(p);
        let uj = u.jet(x, y);
        let mj = mu.jet(x, y);
        let sj = sigma.jet(x, y);
        let [b0, b1] = beta.jet(x, y);
        -(mj.v * uj.laplacian() + mj.dx * uj.dx + mj.dy * uj.dy)
            + b0.v * uj.dx
            + b1.v * uj.dy
            + sj.v * uj.v
    })
}

/// Same, with the nonlinear reaction `sigma sin(p u) u`.
fn manufacture_parametric_source(
    mu: Arc<dyn Field2>,
    beta: Arc<dyn VectorField2>,
    sigma: Arc<dyn Field2>,
    u: Arc<dyn Field2>,
    p_par: f64,
) -> SourceFn {
    Arc::new(move |p: Point| {
        let (x, y) = Jet2::at_point(p);
        let uj = u.jet(x, y);
        let mj = mu.jet(x, y);
        let sj = sigma.jet(x, y);
        let [b0, b1] = beta.jet(x, y);
        -(mj.v * uj.laplacian() + mj.dx * uj.dx + mj.dy * uj.dy)
            + b0.v * uj.dx
            + b1.v * uj.dy
            + sj.v * (p_par * uj.v).sin() * uj.v
    })
}

fn with_data(mut boundary: PolygonalBoundary, g: Arc<dyn Field2>) -> Arc<PolygonalBoundary> {
    for i in 0..boundary.segments().len() {
        if boundary.is_dirichlet(i) {
            boundary.set_segment_data(i, g.clone());
        }
    }
    Arc::new(boundary)
}

/// Coefficients of the first elliptic test family:
/// `mu = 2 + sin(x + 2y)`, `beta = (sqrt(x - y^2 + 5), sqrt(y - x^2 + 5))`,
/// `sigma = e^{x/2 - y/3} + 2`.
pub fn elliptic_coefficient_fields() -> (Arc<dyn Field2>, Arc<dyn VectorField2>, Arc<dyn Field2>) {
    let mu: Arc<dyn Field2> = Arc::new(|x: Jet2<f64>, y: Jet2<f64>| (x + y.scale(2.0)).sin() + 2.0);
    let beta: Arc<dyn VectorField2> = Arc::new(|x: Jet2<f64>, y: Jet2<f64>| {
        [(x - y * y + 5.0).sqrt(), (y - x * x + 5.0).sqrt()]
    });
    let sigma: Arc<dyn Field2> =
        Arc::new(|x: Jet2<f64>, y: Jet2<f64>| (x.scale(0.5) - y.scale(1.0 / 3.0)).exp() + 2.0);
    (mu, beta, sigma)
}

/// `u = cos(5(x + y/2)) + (x + y/2)^2`
pub fn sol2() -> Arc<dyn Field2> {
    Arc::new(|x: Jet2<f64>, y: Jet2<f64>| {
        let s = x + y.scale(0.5);
        s.scale(5.0).cos() + s * s
    })
}

/// `u = sin(3x(x - y)) cos(4y + x) + sin(5(x + 2y)) cos(3(y - 2x))`
pub fn sol5() -> Arc<dyn Field2> {
    Arc::new(|x: Jet2<f64>, y: Jet2<f64>| {
        let a = (x * (x - y)).scale(3.0).sin() * (y.scale(4.0) + x).cos();
        let b = (x + y.scale(2.0)).scale(5.0).sin() * ((y - x.scale(2.0)).scale(3.0)).cos();
        a + b
    })
}

/// `u(x, y; p) = sin(p pi x) sin(pi y / p)`
pub fn sol8(p: f64) -> Arc<dyn Field2> {
    use std::f64::consts::PI;
    Arc::new(move |x: Jet2<f64>, y: Jet2<f64>| x.scale(p * PI).sin() * y.scale(PI / p).sin())
}

/// Elliptic case with the catalog coefficients and a manufactured solution,
/// on a caller-chosen domain.
pub fn elliptic_on(domain: Domain, solution: u32) -> Result<ProblemSpec> {
    let u = match solution {
        2 => sol2(),
        5 => sol5(),
        other => return Err(Error::config(format!("no elliptic solution {other}"))),
    };
    let (mu, beta, sigma) = elliptic_coefficient_fields();
    let f = manufacture_elliptic_source(mu.clone(), beta.clone(), sigma.clone(), u.clone());
    Ok(ProblemSpec {
        id: format!("elliptic_sol{solution}"),
        domain,
        boundary: with_data(domains::boundary_for(domain), u.clone()),
        family: Family::Elliptic(EllipticCoefficients {
            mu,
            beta,
            sigma,
            f,
            psi: None,
        }),
        exact: Some(u),
    })
}

/// Admissible range and sampling sizes for the parametric problem.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct ParameterRange {
    pub lo: f64,
    pub hi: f64,
    pub n_train: usize,
    pub n_test: usize,
}

impl Default for ParameterRange {
    fn default() -> Self {
        ParameterRange {
            lo: 0.5,
            hi: 2.0,
            n_train: 13,
            n_test: 100,
        }
    }
}

impl ParameterRange {
    pub fn contains(&self, p: f64) -> bool {
        (self.lo..=self.hi).contains(&p)
    }

    /// Uniformly spaced training values, endpoints included.
    pub fn train_values(&self) -> Vec<f64> {
        let n = self.n_train;
        (0..n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn test_values(&self) -> Vec<f64> {
        let n = self.n_test;
        (0..n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Parametric nonlinear problem at parameter `p`: `mu = 1`, `beta = [2, 3]`,
/// `sigma = 4`, reaction `sigma sin(p u) u`, on the unit square.
pub fn parametric_instance(p: f64, range: &ParameterRange) -> Result<ProblemSpec> {
    if !range.contains(p) {
        return Err(Error::config(format!(
            "parameter {p} outside [{}, {}]",
            range.lo, range.hi
        )));
    }
    let mu: Arc<dyn Field2> = Arc::new(crate::field::constant(1.0));
    let beta: Arc<dyn VectorField2> = Arc::new(|x: Jet2<f64>, _y: Jet2<f64>| {
        [
            Jet2::constant_like(x.v, 2.0),
            Jet2::constant_like(x.v, 3.0),
        ]
    });
    let sigma: Arc<dyn Field2> = Arc::new(crate::field::constant(4.0));
    let u = sol8(p);
    let f = manufacture_parametric_source(mu.clone(), beta.clone(), sigma.clone(), u.clone(), p);
    Ok(ProblemSpec {
        id: format!("parametric_p{p}"),
        domain: Domain::UnitSquare,
        boundary: with_data(domains::unit_square_boundary(), u.clone()),
        family: Family::ParametricNonlinear {
            coeffs: EllipticCoefficients {
                mu,
                beta,
                sigma,
                f,
                psi: None,
            },
            p,
        },
        exact: Some(u),
    })
}

/// Lame parameters from Young modulus and Poisson ratio.
pub fn lame_parameters(young: f64, poisson: f64) -> (f64, f64) {
    let mu = young / (2.0 * (1.0 + poisson));
    let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    (mu, lambda)
}

fn elasticity() -> ProblemSpec {
    let (lame_mu, lame_lambda) = lame_parameters(117.0, 1.0 / 3.0);
    let scale = lame_mu + lame_lambda;
    let f: Arc<dyn VectorField2> = Arc::new(move |x: Jet2<f64>, y: Jet2<f64>| {
        [(x * y.exp()).scale(scale), (y * (x + 2.0).sqrt()).scale(scale)]
    });
    let g: Arc<dyn VectorField2> = Arc::new(|x: Jet2<f64>, y: Jet2<f64>| {
        use std::f64::consts::PI;
        let xy = x * y;
        [((x + y).scale(PI)).sin() * xy, (x - y).exp() * xy]
    });
    // The scalar data slot carries the x-component; vector problems read g
    // from the family instead.
    let gx: Arc<dyn Field2> = {
        let g = g.clone();
        Arc::new(move |x: Jet2<f64>, y: Jet2<f64>| g.jet(x, y)[0])
    };
    ProblemSpec {
        id: "elasticity".into(),
        domain: Domain::LShape,
        boundary: with_data(domains::l_shape_boundary(), gx),
        family: Family::Elasticity {
            lame_mu,
            lame_lambda,
            f,
            g,
        },
        exact: None,
    }
}

fn eikonal() -> ProblemSpec {
    let g: Arc<dyn Field2> = Arc::new(crate::field::constant(0.0));
    ProblemSpec {
        id: "eikonal".into(),
        domain: Domain::LShape,
        boundary: with_data(domains::l_shape_boundary(), g),
        family: Family::Eikonal {
            eps: 0.1,
            f: Arc::new(|_| 1.0),
        },
        exact: None,
    }
}

fn convection() -> ProblemSpec {
    let beta = 30.0;
    // u(x, t) = sin(x - beta t); the Dirichlet data on x = 0 and t = 0 are
    // its restrictions g(t) = -sin(beta t), h(x) = sin(x).
    let u: Arc<dyn Field2> =
        Arc::new(move |x: Jet2<f64>, t: Jet2<f64>| (x - t.scale(beta)).sin());
    ProblemSpec {
        id: "convection".into(),
        domain: Domain::Rect,
        boundary: with_data(domains::rect_boundary(), u.clone()),
        family: Family::Convection { beta },
        exact: Some(u),
    }
}

/// Look up a catalog case by id.
pub fn catalog(id: &str) -> Result<ProblemSpec> {
    match id {
        "elliptic_sol2" => elliptic_on(Domain::SquareWithHole, 2),
        "elliptic_sol5" => elliptic_on(Domain::SquareWithHole, 5),
        "parametric" => parametric_instance(1.0, &ParameterRange::default()),
        "elasticity" => Ok(elasticity()),
        "eikonal" => Ok(eikonal()),
        "convection" => Ok(convection()),
        other => Err(Error::config(format!("unknown problem case '{other}'"))),
    }
}

pub fn catalog_ids() -> &'static [&'static str] {
    &[
        "elliptic_sol2",
        "elliptic_sol5",
        "parametric",
        "elasticity",
        "eikonal",
        "convection",
    ]
}

/// Deterministic interior sample points for validation checks.
pub fn interior_samples(domain: Domain, n: usize) -> Vec<Point> {
    use crate::mesh::tri::generate_mesh;
    let mesh = generate_mesh(domain, 2).expect("catalog domains mesh cleanly");
    let mut out = Vec::with_capacity(n);
    let mut k = 0usize;
    'outer: loop {
        for e in 0..mesh.n_elements() {
            if out.len() >= n {
                break 'outer;
            }
            // Low-discrepancy barycentric coordinates.
            let a = (0.5 + 0.754_877_666_2 * k as f64).fract();
            let b = (0.5 + 0.569_840_290_9 * k as f64).fract();
            k += 1;
            let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
            let [v0, v1, v2] = mesh.element_vertices(e);
            out.push([
                v0[0] + a * (v1[0] - v0[0]) + b * (v2[0] - v0[0]),
                v0[1] + a * (v1[1] - v0[1]) + b * (v2[1] - v0[1]),
            ]);
        }
    }
    out
}

impl EllipticCoefficients {
    /// Sampled well-posedness: `mu >= mu0 > 0` and
    /// `sigma - div(beta)/2 >= -1e-10` (divergence by finite differences).
    pub fn check_well_posedness(&self, domain: Domain) -> Result<()> {
        let h = 1e-6;
        for p in interior_samples(domain, 1000) {
            let mu = self.mu.value(p);
            if mu < 1e-10 {
                return Err(Error::numerical(format!(
                    "mu = {mu} at ({}, {}) violates positivity",
                    p[0], p[1]
                )));
            }
            let bxp = self.beta.value([p[0] + h, p[1]])[0];
            let bxm = self.beta.value([p[0] - h, p[1]])[0];
            let byp = self.beta.value([p[0], p[1] + h])[1];
            let bym = self.beta.value([p[0], p[1] - h])[1];
            let div = (bxp - bxm + byp - bym) / (2.0 * h);
            if self.sigma.value(p) - 0.5 * div < -1e-10 {
                return Err(Error::numerical(format!(
                    "sigma - div(beta)/2 negative at ({}, {})",
                    p[0], p[1]
                )));
            }
        }
        Ok(())
    }
}

/// Strong-form residual of a scalar exact-solution candidate at a point;
/// used by the manufactured-source checks.
pub fn strong_residual_at(spec: &ProblemSpec, u: &dyn Field2, p: Point) -> Result<f64> {
    let (x, y) = Jet2::at_point(p);
    let uj = u.jet(x, y);
    Ok(match &spec.family {
        Family::Elliptic(c) => {
            let mj = c.mu.jet(x, y);
            let [b0, b1] = c.beta.jet(x, y);
            let sj = c.sigma.jet(x, y);
            -(mj.v * uj.laplacian() + mj.dx * uj.dx + mj.dy * uj.dy)
                + b0.v * uj.dx
                + b1.v * uj.dy
                + sj.v * uj.v
                - (c.f)(p)
        }
        Family::ParametricNonlinear { coeffs: c, p: pp } => {
            let mj = c.mu.jet(x, y);
            let [b0, b1] = c.beta.jet(x, y);
            let sj = c.sigma.jet(x, y);
            -(mj.v * uj.laplacian() + mj.dx * uj.dx + mj.dy * uj.dy)
                + b0.v * uj.dx
                + b1.v * uj.dy
                + sj.v * (pp * uj.v).sin() * uj.v
                - (c.f)(p)
        }
        Family::Eikonal { eps, f } => {
            -eps * uj.laplacian() + (uj.dx * uj.dx + uj.dy * uj.dy).sqrt() - f(p)
        }
        Family::Convection { beta } => uj.dy + beta * uj.dx,
        Family::Elasticity { .. } => {
            return Err(Error::config(
                "elasticity is vector-valued; use the vector residuals",
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_spot_values() {
        let e2 = catalog("elliptic_sol2").unwrap();
        let u = e2.exact.as_ref().unwrap();
        assert!((u.value([0.0, 0.0]) - 1.0).abs() < 1e-15);
        let conv = catalog("convection").unwrap();
        assert!(conv.exact.as_ref().unwrap().value([0.0, 0.0]).abs() < 1e-15);
        let par = parametric_instance(1.0, &ParameterRange::default()).unwrap();
        let u = par.exact.as_ref().unwrap();
        use std::f64::consts::PI;
        let p = [0.3, 0.7];
        assert!((u.value(p) - (PI * p[0]).sin() * (PI * p[1]).sin()).abs() < 1e-14);
        // Zero on the unit square boundary at p = 1.
        for t in [0.0, 0.25, 0.9] {
            assert!(u.value([t, 0.0]).abs() < 1e-13);
            assert!(u.value([1.0, t]).abs() < 1e-13);
        }
        assert!(catalog("nope").is_err());
    }

    #[test]
    fn manufactured_sources_cancel_exactly() {
        for id in ["elliptic_sol2", "elliptic_sol5", "convection"] {
            let spec = catalog(id).unwrap();
            let u = spec.exact.clone().unwrap();
            for p in interior_samples(spec.domain, 200) {
                let r = strong_residual_at(&spec, u.as_ref(), p).unwrap();
                assert!(r.abs() < 1e-8, "{id} residual {r} at {p:?}");
            }
        }
        for p_par in [0.5, 1.0, 1.37, 2.0] {
            let spec = parametric_instance(p_par, &ParameterRange::default()).unwrap();
            let u = spec.exact.clone().unwrap();
            for p in interior_samples(Domain::UnitSquare, 200) {
                let r = strong_residual_at(&spec, u.as_ref(), p).unwrap();
                assert!(r.abs() < 1e-8, "p={p_par} residual {r} at {p:?}");
            }
        }
    }

    #[test]
    fn elliptic_coefficients_are_well_posed() {
        let spec = catalog("elliptic_sol2").unwrap();
        let Family::Elliptic(c) = &spec.family else {
            panic!()
        };
        c.check_well_posedness(spec.domain).unwrap();
        // mu = 2 + sin >= 1 everywhere.
        for p in interior_samples(spec.domain, 100) {
            assert!(c.mu.value(p) >= 1.0);
        }
    }

    #[test]
    fn boundary_data_match_exact_solution() {
        let spec = catalog("elliptic_sol5").unwrap();
        let u = spec.exact.clone().unwrap();
        for p in spec.boundary.sample_dirichlet(200) {
            for (i, s) in spec.boundary.segments().iter().enumerate() {
                if s.distance(p) < 1e-12 {
                    let g = spec.boundary.segment_data_value(i, p).unwrap();
                    assert!((g - u.value(p)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn parameter_range_validation() {
        let r = ParameterRange::default();
        assert!(parametric_instance(0.5, &r).is_ok());
        assert!(parametric_instance(2.0, &r).is_ok());
        assert!(parametric_instance(0.49, &r).is_err());
        assert!(parametric_instance(2.01, &r).is_err());
        let train = r.train_values();
        assert_eq!(train.len(), 13);
        assert_eq!(train[0], 0.5);
        assert_eq!(*train.last().unwrap(), 2.0);
        assert_eq!(r.test_values().len(), 100);
    }

    #[test]
    fn lame_values() {
        let (mu, lambda) = lame_parameters(117.0, 1.0 / 3.0);
        assert!((mu - 43.875).abs() < 1e-12);
        assert!((lambda - 87.75).abs() < 1e-10);
    }
}
