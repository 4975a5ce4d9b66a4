//! Approximate distance functions to the Dirichlet part of a polygonal
//! boundary, combined from per-segment ADFs either with R-function style
//! normalization or as a plain product.

use std::sync::Arc;

use crate::autodiff::Jet2;
use crate::field::Field2;

use super::boundary::PolygonalBoundary;
use super::segment::{Point, Segment};

/// One field sample: value, gradient and (when available) Laplacian.
#[derive(Clone, Copy, Debug)]
pub struct FieldSample {
    pub value: f64,
    pub gradient: [f64; 2],
    /// `None` inside the vertex-exclusion zone of a normalized ADF, where the
    /// Laplacian blows up.
    pub laplacian: Option<f64>,
}

impl FieldSample {
    pub fn from_jet(j: Jet2<f64>) -> Self {
        FieldSample {
            value: j.v,
            gradient: [j.dx, j.dy],
            laplacian: Some(j.dxx + j.dyy),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdfMode {
    /// First normal derivative 1, normal derivatives `2..=m` vanish at
    /// regular boundary points.
    Normalized { m: u32 },
    /// Plain product of segment ADFs; bounded derivatives everywhere.
    Product,
}

enum SegmentPhi {
    Adf(Segment),
    Custom(Arc<dyn Field2>),
}

impl SegmentPhi {
    fn jet(&self, x: Jet2<f64>, y: Jet2<f64>) -> Jet2<f64> {
        match self {
            SegmentPhi::Adf(s) => s.adf_jet(x, y),
            SegmentPhi::Custom(f) => f.jet(x, y),
        }
    }
}

/// ADF to a Dirichlet boundary: zero exactly on it, positive elsewhere.
pub struct AdfField {
    phis: Vec<SegmentPhi>,
    mode: AdfMode,
    vertices: Vec<Point>,
    vertex_exclusion: f64,
}

impl AdfField {
    /// Build from the Dirichlet segments of a boundary. Neumann segments do
    /// not contribute.
    pub fn from_boundary(boundary: &PolygonalBoundary, mode: AdfMode) -> Self {
        let phis = boundary
            .dirichlet_segments()
            .map(|s| SegmentPhi::Adf(*s))
            .collect();
        let vertices = boundary.dirichlet_vertices();
        let vertex_exclusion = 1e-2 * boundary.shortest_dirichlet_segment();
        AdfField {
            phis,
            mode,
            vertices,
            vertex_exclusion,
        }
    }

    /// Build from arbitrary per-piece distance fields (used for analytic
    /// fixtures and for simple factorized geometries).
    pub fn from_custom(phis: Vec<Arc<dyn Field2>>, mode: AdfMode) -> Self {
        AdfField {
            phis: phis.into_iter().map(SegmentPhi::Custom).collect(),
            mode,
            vertices: Vec::new(),
            vertex_exclusion: 0.0,
        }
    }

    pub fn with_vertex_exclusion(mut self, radius: f64) -> Self {
        self.vertex_exclusion = radius;
        self
    }

    pub fn mode(&self) -> AdfMode {
        self.mode
    }

    pub fn vertex_exclusion(&self) -> f64 {
        self.vertex_exclusion
    }

    pub fn distance_to_vertices(&self, p: Point) -> f64 {
        self.vertices
            .iter()
            .map(|v| ((p[0] - v[0]).powi(2) + (p[1] - v[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min)
    }

    /// Is `p` acceptable as a collocation point when second derivatives of
    /// the ADF are required?
    pub fn laplacian_available_at(&self, p: Point) -> bool {
        match self.mode {
            AdfMode::Product => true,
            AdfMode::Normalized { .. } => self.distance_to_vertices(p) >= self.vertex_exclusion,
        }
    }

    /// Combined ADF with jets.
    ///
    /// The normalized combination is evaluated in the multiplied-through form
    /// `phi = prod(phi_i) / (sum_k prod_{j != k} phi_j^m)^(1/m)`, which is
    /// algebraically identical to the reciprocal-sum formula but returns an
    /// exact zero on the boundary instead of dividing by zero.
    pub fn eval_jet(&self, x: Jet2<f64>, y: Jet2<f64>) -> Jet2<f64> {
        let phis: Vec<Jet2<f64>> = self.phis.iter().map(|p| p.jet(x, y)).collect();
        match self.mode {
            AdfMode::Product => {
                let mut acc = Jet2::constant(1.0);
                for p in &phis {
                    acc = acc * *p;
                }
                acc
            }
            AdfMode::Normalized { m } => {
                if phis.len() == 1 {
                    return phis[0];
                }
                let mut num = Jet2::constant(1.0);
                for p in &phis {
                    num = num * *p;
                }
                let mut den = Jet2::constant(0.0);
                for k in 0..phis.len() {
                    let mut prod = Jet2::constant(1.0);
                    for (j, p) in phis.iter().enumerate() {
                        if j != k {
                            prod = prod * p.powi(m as i32);
                        }
                    }
                    den = den + prod;
                }
                if den.v == 0.0 {
                    // Two or more segment ADFs vanish: a boundary vertex. The
                    // limit value is zero; derivatives are not defined there.
                    return Jet2::constant(0.0);
                }
                match m {
                    1 => num / den,
                    2 => num / den.sqrt(),
                    _ => num / den.powf(1.0 / m as f64),
                }
            }
        }
    }

    pub fn sample(&self, p: Point) -> FieldSample {
        let (x, y) = Jet2::at_point(p);
        let j = self.eval_jet(x, y);
        let laplacian = self.laplacian_available_at(p).then(|| j.dxx + j.dyy);
        FieldSample {
            value: j.v,
            gradient: [j.dx, j.dy],
            laplacian,
        }
    }

    pub fn value(&self, p: Point) -> f64 {
        let (x, y) = Jet2::at_point(p);
        self.eval_jet(x, y).v
    }
}

impl Field2 for AdfField {
    fn jet(&self, x: Jet2<f64>, y: Jet2<f64>) -> Jet2<f64> {
        self.eval_jet(x, y)
    }
}

impl Jet2<f64> {
    /// Real power with a positive base, used for normalization orders beyond 2.
    pub fn powf(self, alpha: f64) -> Self {
        let v = self.v.powf(alpha);
        let d1 = alpha * self.v.powf(alpha - 1.0);
        let d2 = alpha * (alpha - 1.0) * self.v.powf(alpha - 2.0);
        self.chain(v, d1, d2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domains;

    fn unit_square_adf(mode: AdfMode) -> AdfField {
        let b = domains::unit_square_boundary();
        AdfField::from_boundary(&b, mode)
    }

    #[test]
    fn zero_on_boundary_positive_inside() {
        for mode in [
            AdfMode::Normalized { m: 1 },
            AdfMode::Normalized { m: 2 },
            AdfMode::Product,
        ] {
            let adf = unit_square_adf(mode);
            for p in domains::unit_square_boundary().sample_dirichlet(40) {
                assert!(adf.value(p).abs() < 1e-12, "{mode:?} at {p:?}");
            }
            for p in [[0.3, 0.4], [0.5, 0.5], [0.9, 0.1]] {
                assert!(adf.value(p) > 0.0, "{mode:?} at {p:?}");
            }
        }
    }

    #[test]
    fn vertex_evaluation_is_zero_without_panic() {
        let adf = unit_square_adf(AdfMode::Normalized { m: 1 });
        let s = adf.sample([0.0, 0.0]);
        assert_eq!(s.value, 0.0);
        assert!(s.laplacian.is_none());
    }

    #[test]
    fn normal_derivative_is_one_for_normalized() {
        for m in [1u32, 2] {
            let adf = unit_square_adf(AdfMode::Normalized { m });
            // Regular point on the bottom edge; inward normal is +y.
            let eps = 1e-6;
            let d = (adf.value([0.37, eps]) - adf.value([0.37, 0.0])) / eps;
            assert!((d - 1.0).abs() < 1e-4, "m={m}: {d}");
        }
    }

    #[test]
    fn product_mode_stays_bounded_near_vertices() {
        let prod = unit_square_adf(AdfMode::Product);
        let norm = unit_square_adf(AdfMode::Normalized { m: 1 });
        let mut prod_lap = Vec::new();
        let mut norm_lap = Vec::new();
        for k in 1..=4 {
            let r = 10f64.powi(-k);
            let p = [r, r];
            let (x, y) = Jet2::at_point(p);
            prod_lap.push(prod.eval_jet(x, y).laplacian().abs());
            norm_lap.push(norm.eval_jet(x, y).laplacian().abs());
        }
        // Product Laplacian bounded, normalized Laplacian grows without bound.
        assert!(prod_lap.iter().all(|&l| l < 10.0 * prod_lap[0].max(1.0)));
        assert!(norm_lap[3] > 100.0 * norm_lap[0]);
    }
}
