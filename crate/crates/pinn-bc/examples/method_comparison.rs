//! Boundary-condition methods on an oscillatory solution.
//!
//! On the oscillatory manufactured case a weak penalty cannot hold the
//! boundary, while the exact and Nitsche impositions stay robust. The oracle
//! makes the comparison deterministic: no training noise, just the methods.

use pinn_bc::geometry::Domain;
use pinn_bc::harness::least_squares_oracle;
use pinn_bc::problems::elliptic_on;
use pinn_bc::residual::BcMethod;

fn main() {
    let problem = elliptic_on(Domain::UnitSquare, 5).unwrap();
    let (k_int, k_test, q, refines) = (4, 1, 3, 3);
    let methods = [
        ("penalty lambda=1e-3", BcMethod::Penalty { lambda: 1e-3 }),
        ("penalty lambda=1e3", BcMethod::Penalty { lambda: 1e3 }),
        ("exact normalized m=1", BcMethod::ExactNormalized { m: 1 }),
        ("exact product", BcMethod::ExactProduct),
        ("nitsche gamma=1", BcMethod::Nitsche { gamma: 1.0 }),
    ];

    println!("{:<22} {:>12} {:>12}", "method", "level 2", "level 3");
    for (label, method) in methods {
        let errs: Vec<f64> = [2u32, 3]
            .iter()
            .map(|&l| {
                least_squares_oracle(&problem, &method, l, k_int, k_test, q, refines)
                    .unwrap()
                    .h1_error
                    .unwrap()
            })
            .collect();
        println!("{label:<22} {:>12.4e} {:>12.4e}", errs[0], errs[1]);
    }
}
