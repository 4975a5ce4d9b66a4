//! First-quadrant fixture: distances to the half-lines `x = 0` and `y = 0`
//! are exactly `x` and `y`, so the normalized combinations have closed forms
//! that pin down the ADF implementation.

use std::sync::Arc;

use crate::autodiff::Jet2;
use crate::error::{Error, Result};
use crate::field::Field2;
use crate::geometry::adf::{AdfField, AdfMode, FieldSample};
use crate::geometry::segment::Point;

/// Quadrant ADF built from the exact per-wall distances `phi_1 = x`,
/// `phi_2 = y`.
pub fn quadrant_adf(mode: AdfMode) -> AdfField {
    let phi_x: Arc<dyn Field2> = Arc::new(|x: Jet2<f64>, _y: Jet2<f64>| x);
    let phi_y: Arc<dyn Field2> = Arc::new(|_x: Jet2<f64>, y: Jet2<f64>| y);
    AdfField::from_custom(vec![phi_x, phi_y], mode)
}

/// Closed-form value, gradient and Laplacian of the normalized quadrant ADF.
///
/// For `m = 1`: `phi = xy / (x + y)`, `grad = [y^2, x^2] / (x + y)^2`,
/// `lap = -2 (x^2 + y^2) / (x + y)^3`.
///
/// For `m = 2`: `phi = xy / sqrt(x^2 + y^2)`; in polar coordinates
/// `lap = -3 cos(theta) sin(theta) / rho`.
///
/// Both are singular at the origin, where the two walls meet.
pub fn quadrant_reference(m: u32, p: Point) -> Result<FieldSample> {
    let [x, y] = p;
    if x == 0.0 && y == 0.0 {
        return Err(Error::numerical(
            "quadrant reference is singular at the origin",
        ));
    }
    match m {
        1 => {
            let s = x + y;
            Ok(FieldSample {
                value: x * y / s,
                gradient: [y * y / (s * s), x * x / (s * s)],
                laplacian: Some(-2.0 * (x * x + y * y) / (s * s * s)),
            })
        }
        2 => {
            let r2 = x * x + y * y;
            let r = r2.sqrt();
            let value = x * y / r;
            let gradient = [y * y * y / (r2 * r), x * x * x / (r2 * r)];
            let (rho, theta) = (r, y.atan2(x));
            let laplacian = -3.0 * theta.cos() * theta.sin() / rho;
            Ok(FieldSample {
                value,
                gradient,
                laplacian: Some(laplacian),
            })
        }
        other => Err(Error::config(format!(
            "no closed-form quadrant reference for m = {other}"
        ))),
    }
}
