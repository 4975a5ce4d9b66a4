//! H1-norm error measurement by elementwise quadrature.

use crate::geometry::Point;

use super::lagrange::TrialFunction;
use super::quadrature::{rule_for_degree, QuadratureRule};
use super::tri::TriMesh;

/// `sqrt( sum_K sum_q w_q [ (w - u)^2 + |grad w - grad u|^2 ] )` over the
/// given mesh. `w` is evaluated per element with the physical point supplied,
/// `u` by physical point alone.
pub fn h1_error_on_mesh(
    mesh: &TriMesh,
    rule: &QuadratureRule,
    w: impl Fn(usize, Point) -> (f64, [f64; 2]),
    u: impl Fn(Point) -> (f64, [f64; 2]),
) -> f64 {
    let mut acc = 0.0;
    for e in 0..mesh.n_elements() {
        let (v0, j, det) = mesh.affine(e);
        let jac = det.abs();
        for (xi, &wq) in rule.points.iter().zip(&rule.weights) {
            let p = [
                v0[0] + j[0][0] * xi[0] + j[1][0] * xi[1],
                v0[1] + j[0][1] * xi[0] + j[1][1] * xi[1],
            ];
            let (wv, wg) = w(e, p);
            let (uv, ug) = u(p);
            let dv = wv - uv;
            let gx = wg[0] - ug[0];
            let gy = wg[1] - ug[1];
            acc += wq * jac * (dv * dv + gx * gx + gy * gy);
        }
    }
    acc.sqrt()
}

/// Quadrature degree used for error measurement with trial degree `k`.
pub fn error_rule_for_degree(k: usize) -> QuadratureRule {
    rule_for_degree((2 * k).max(8))
}

/// H1 error of a finite element function against an analytic field, measured
/// on the function's own mesh.
pub fn h1_error(w: &TrialFunction, u: impl Fn(Point) -> (f64, [f64; 2])) -> f64 {
    let rule = error_rule_for_degree(w.space.degree());
    h1_error_on_mesh(
        &w.space.mesh.clone(),
        &rule,
        |e, p| {
            let [_, xi, eta] = w.space.mesh.barycentric(e, p);
            w.eval_element(e, [xi, eta])
        },
        u,
    )
}

/// H1 norm of an analytic field over a mesh.
pub fn h1_norm(mesh: &TriMesh, rule: &QuadratureRule, u: impl Fn(Point) -> (f64, [f64; 2])) -> f64 {
    h1_error_on_mesh(mesh, rule, |_, _| (0.0, [0.0, 0.0]), u)
}
