//! Segments of a polygonal boundary and the building blocks of their
//! approximate distance functions.

use crate::autodiff::Jet2;
use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Clone, Copy, Debug)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
    pub id: usize,
    length: f64,
}

impl Segment {
    pub fn new(a: Point, b: Point, id: usize) -> Result<Self> {
        let length = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        if length <= 0.0 {
            return Err(Error::Geometry(format!(
                "degenerate segment {id}: endpoints coincide at ({}, {})",
                a[0], a[1]
            )));
        }
        Ok(Segment { a, b, id, length })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn midpoint(&self) -> Point {
        [(self.a[0] + self.b[0]) / 2.0, (self.a[1] + self.b[1]) / 2.0]
    }

    /// Point at parameter `t in [0, 1]` along the segment.
    pub fn at(&self, t: f64) -> Point {
        [
            self.a[0] + t * (self.b[0] - self.a[0]),
            self.a[1] + t * (self.b[1] - self.a[1]),
        ]
    }

    /// Unit normal pointing to the left of the direction `a -> b`. For a
    /// counterclockwise-ordered boundary this is the inward normal.
    pub fn left_normal(&self) -> [f64; 2] {
        [
            -(self.b[1] - self.a[1]) / self.length,
            (self.b[0] - self.a[0]) / self.length,
        ]
    }

    /// Signed distance from `(x, y)` to the infinite line through the segment.
    pub fn signed_distance_jet(&self, x: Jet2<f64>, y: Jet2<f64>) -> Jet2<f64> {
        let dxab = self.b[0] - self.a[0];
        let dyab = self.b[1] - self.a[1];
        ((x - self.a[0]).scale(dyab) - (y - self.a[1]).scale(dxab)).scale(1.0 / self.length)
    }

    pub fn signed_distance(&self, p: Point) -> f64 {
        let (x, y) = Jet2::at_point(p);
        self.signed_distance_jet(x, y).v
    }

    /// The trimming function `t(x) = [(L/2)^2 - |x - c|^2] / L`; its zero set
    /// is the circle through both endpoints centered at the midpoint.
    pub fn trimming_jet(&self, x: Jet2<f64>, y: Jet2<f64>) -> Jet2<f64> {
        let c = self.midpoint();
        let half = self.length / 2.0;
        let dx = x - c[0];
        let dy = y - c[1];
        let r2 = dx * dx + dy * dy;
        (-r2 + half * half).scale(1.0 / self.length)
    }

    pub fn trimming(&self, p: Point) -> f64 {
        let (x, y) = Jet2::at_point(p);
        self.trimming_jet(x, y).v
    }

    /// Approximate distance function to the (finite) segment:
    /// `phi = sqrt(d^2 + ((sqrt(t^2 + d^4) - t) / 2)^2)`.
    pub fn adf_jet(&self, x: Jet2<f64>, y: Jet2<f64>) -> Jet2<f64> {
        let d = self.signed_distance_jet(x, y);
        let t = self.trimming_jet(x, y);
        let d2 = d * d;
        let inner = (t * t + d2 * d2).sqrt() - t;
        let corner = inner.scale(0.5);
        (d2 + corner * corner).sqrt()
    }

    pub fn adf(&self, p: Point) -> f64 {
        let (x, y) = Jet2::at_point(p);
        self.adf_jet(x, y).v
    }

    /// Orthogonal projection of `p` onto the segment, clamped to the
    /// endpoints, returned with jets so boundary data can be differentiated.
    pub fn project_clamped_jet(&self, x: Jet2<f64>, y: Jet2<f64>) -> (Jet2<f64>, Jet2<f64>) {
        let dxab = self.b[0] - self.a[0];
        let dyab = self.b[1] - self.a[1];
        let l2 = self.length * self.length;
        let s = ((x - self.a[0]).scale(dxab) + (y - self.a[1]).scale(dyab)).scale(1.0 / l2);
        // Clamping freezes the projection at an endpoint.
        let s = if s.v <= 0.0 {
            Jet2::constant(0.0)
        } else if s.v >= 1.0 {
            Jet2::constant(1.0)
        } else {
            s
        };
        (s.scale(dxab) + self.a[0], s.scale(dyab) + self.a[1])
    }

    pub fn project_clamped(&self, p: Point) -> Point {
        let (x, y) = Jet2::at_point(p);
        let (px, py) = self.project_clamped_jet(x, y);
        [px.v, py.v]
    }

    /// True distance from `p` to the segment.
    pub fn distance(&self, p: Point) -> f64 {
        let q = self.project_clamped(p);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    }
}
