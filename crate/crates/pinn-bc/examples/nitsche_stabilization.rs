//! Stabilization sweep for Nitsche's method.
//!
//! The weak boundary terms carry a penalty gamma / h; too small risks losing
//! coercivity on coarse meshes, larger values are safe because the added
//! terms are consistent. The oracle shows the effect without training noise.

use pinn_bc::geometry::Domain;
use pinn_bc::harness::least_squares_oracle;
use pinn_bc::problems::elliptic_on;
use pinn_bc::residual::BcMethod;

fn main() {
    let problem = elliptic_on(Domain::UnitSquare, 2).unwrap();
    let (k_int, k_test, q, refines) = (4, 1, 3, 2);
    let exact = least_squares_oracle(
        &problem,
        &BcMethod::ExactNormalized { m: 1 },
        3,
        k_int,
        k_test,
        q,
        refines,
    )
    .unwrap();
    println!("exact-imposition reference at level 3: {:.4e}", exact.h1_error.unwrap());

    println!("{:>10} {:>12} {:>12} {:>12}", "gamma", "level 1", "level 2", "level 3");
    for gamma in [0.1, 1.0, 10.0, 100.0, 1000.0] {
        let errs: Vec<f64> = [1u32, 2, 3]
            .iter()
            .map(|&l| {
                least_squares_oracle(
                    &problem,
                    &BcMethod::Nitsche { gamma },
                    l,
                    k_int,
                    k_test,
                    q,
                    refines,
                )
                .unwrap()
                .h1_error
                .unwrap()
            })
            .collect();
        println!("{gamma:>10} {:>12.4e} {:>12.4e} {:>12.4e}", errs[0], errs[1], errs[2]);
    }
}
