//! Mesh and Lagrange-space sanity: H1 interpolation error rates.
//!
//! Interpolates a smooth function into degree-k spaces on nested refinements
//! of the unit square and fits the error decay; the expected H1 rate is k.

use std::sync::Arc;

use pinn_bc::geometry::domains;
use pinn_bc::harness::fit_rate;
use pinn_bc::mesh::{generate_mesh, h1_error, interpolate, LagrangeSpace};

fn main() {
    let u = |p: [f64; 2]| (3.0 * p[0]).sin() * (2.0 * p[1]).cos();
    let grad = |p: [f64; 2]| {
        [
            3.0 * (3.0 * p[0]).cos() * (2.0 * p[1]).cos(),
            -2.0 * (3.0 * p[0]).sin() * (2.0 * p[1]).sin(),
        ]
    };
    let boundary = domains::unit_square_boundary();

    for degree in [1usize, 2, 3] {
        let mut hs = Vec::new();
        let mut errs = Vec::new();
        println!("degree {degree}:");
        for level in 0..4 {
            let mesh = Arc::new(generate_mesh(pinn_bc::geometry::Domain::UnitSquare, level).unwrap());
            let space = Arc::new(LagrangeSpace::new(mesh.clone(), degree, &boundary).unwrap());
            let w = interpolate(space, u);
            let err = h1_error(&w, |p| (u(p), grad(p)));
            println!("  level {level}: h {:.4}, H1 error {err:.4e}", mesh.meshsize());
            hs.push(mesh.meshsize());
            errs.push(err);
        }
        println!("  fitted rate {:.2}", fit_rate(&hs, &errs));
    }
}
