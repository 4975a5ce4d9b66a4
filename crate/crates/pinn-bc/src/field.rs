//! Scalar fields over the plane, evaluable with second-order jets.

use crate::autodiff::Jet2;

/// A scalar field `f(x, y)` that propagates second-order jets, so callers can
/// read off values, gradients and Laplacians from a single evaluation.
pub trait Field2: Send + Sync {
    fn jet(&self, x: Jet2<f64>, y: Jet2<f64>) -> Jet2<f64>;

    fn value(&self, p: [f64; 2]) -> f64 {
        let (x, y) = Jet2::at_point(p);
        self.jet(x, y).v
    }

    fn value_grad(&self, p: [f64; 2]) -> (f64, [f64; 2]) {
        let (x, y) = Jet2::at_point(p);
        let j = self.jet(x, y);
        (j.v, [j.dx, j.dy])
    }

    fn jet_at(&self, p: [f64; 2]) -> Jet2<f64> {
        let (x, y) = Jet2::at_point(p);
        self.jet(x, y)
    }
}

impl<F> Field2 for F
where
    F: Fn(Jet2<f64>, Jet2<f64>) -> Jet2<f64> + Send + Sync,
{
    fn jet(&self, x: Jet2<f64>, y: Jet2<f64>) -> Jet2<f64> {
        self(x, y)
    }
}

/// A constant field.
pub fn constant(c: f64) -> impl Field2 {
    move |x: Jet2<f64>, _y: Jet2<f64>| Jet2::constant_like(x.v, c)
}

/// A two-component vector field, used for convection coefficients.
pub trait VectorField2: Send + Sync {
    fn jet(&self, x: Jet2<f64>, y: Jet2<f64>) -> [Jet2<f64>; 2];

    fn value(&self, p: [f64; 2]) -> [f64; 2] {
        let (x, y) = Jet2::at_point(p);
        let [u, v] = self.jet(x, y);
        [u.v, v.v]
    }
}

impl<F> VectorField2 for F
where
    F: Fn(Jet2<f64>, Jet2<f64>) -> [Jet2<f64>; 2] + Send + Sync,
{
    fn jet(&self, x: Jet2<f64>, y: Jet2<f64>) -> [Jet2<f64>; 2] {
        self(x, y)
    }
}
