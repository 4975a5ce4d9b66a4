//! Transfinite interpolation: extend per-segment Dirichlet data `g_i` into
//! the whole plane as `gbar = sum_i w_i g_i` with inverse-distance weights
//! built from the segment ADFs.

use crate::autodiff::Jet2;
use crate::error::{Error, Result};
use crate::field::Field2;
use crate::geometry::boundary::PolygonalBoundary;
use crate::geometry::segment::Point;
use std::sync::Arc;

/// Smooth extension of Dirichlet boundary data.
///
/// The weights are evaluated in the multiplied-through form
/// `w_i = prod_{j != i} phi_j / sum_k prod_{j != k} phi_j`, which stays finite
/// on the boundary. At a vertex shared by two Dirichlet segments every
/// product vanishes; there the common limit of the two data values is
/// returned, provided they agree within `vertex_tolerance`.
pub struct TransfiniteExtension {
    boundary: Arc<PolygonalBoundary>,
    /// Indices of the Dirichlet segments within the boundary.
    seg_indices: Vec<usize>,
    vertex_tolerance: f64,
}

impl TransfiniteExtension {
    /// Checks at construction that the data of every pair of Dirichlet
    /// segments sharing a vertex agree there.
    pub fn new(boundary: Arc<PolygonalBoundary>) -> Result<Self> {
        Self::with_tolerance(boundary, 1e-10)
    }

    pub fn with_tolerance(boundary: Arc<PolygonalBoundary>, vertex_tolerance: f64) -> Result<Self> {
        let seg_indices: Vec<usize> = (0..boundary.segments().len())
            .filter(|&i| boundary.is_dirichlet(i))
            .collect();
        let ext = TransfiniteExtension {
            boundary,
            seg_indices,
            vertex_tolerance,
        };
        ext.check_vertex_consistency()?;
        Ok(ext)
    }

    fn check_vertex_consistency(&self) -> Result<()> {
        let segs = self.boundary.segments();
        for (a_pos, &ia) in self.seg_indices.iter().enumerate() {
            for &ib in &self.seg_indices[a_pos + 1..] {
                for va in [segs[ia].a, segs[ia].b] {
                    for vb in [segs[ib].a, segs[ib].b] {
                        let shared = (va[0] - vb[0]).abs() < 1e-12 && (va[1] - vb[1]).abs() < 1e-12;
                        if !shared {
                            continue;
                        }
                        let ga = self.boundary.segment_data_value(ia, va)?;
                        let gb = self.boundary.segment_data_value(ib, va)?;
                        if (ga - gb).abs() > self.vertex_tolerance {
                            return Err(Error::InconsistentBoundaryData(va[0], va[1]));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Inverse-distance weights at `p`, in the order of the Dirichlet
    /// segments. Returns `None` where the weights degenerate (shared vertex).
    pub fn weights(&self, p: Point) -> Option<Vec<f64>> {
        let (x, y) = Jet2::at_point(p);
        let segs = self.boundary.segments();
        let phis: Vec<f64> = self
            .seg_indices
            .iter()
            .map(|&i| segs[i].adf_jet(x, y).v)
            .collect();
        let mut products = Vec::with_capacity(phis.len());
        let mut den = 0.0;
        for k in 0..phis.len() {
            let mut prod = 1.0;
            for (j, &phi) in phis.iter().enumerate() {
                if j != k {
                    prod *= phi;
                }
            }
            products.push(prod);
            den += prod;
        }
        if den == 0.0 {
            return None;
        }
        Some(products.into_iter().map(|p| p / den).collect())
    }

    /// Evaluate the extension with jets. Fails with
    /// [`Error::InconsistentBoundaryData`] if the point sits on a vertex where
    /// the incident data disagree beyond the tolerance.
    pub fn try_jet(&self, x: Jet2<f64>, y: Jet2<f64>) -> Result<Jet2<f64>> {
        let segs = self.boundary.segments();
        if self.seg_indices.len() == 1 {
            return self.boundary.segment_data_jet(self.seg_indices[0], x, y);
        }
        let phis: Vec<Jet2<f64>> = self
            .seg_indices
            .iter()
            .map(|&i| segs[i].adf_jet(x, y))
            .collect();
        let mut den = Jet2::constant(0.0);
        let mut num = Jet2::constant(0.0);
        let mut products = Vec::with_capacity(phis.len());
        for k in 0..phis.len() {
            let mut prod = Jet2::constant(1.0);
            for (j, p) in phis.iter().enumerate() {
                if j != k {
                    prod = prod * *p;
                }
            }
            den = den + prod;
            products.push(prod);
        }
        if den.v == 0.0 {
            return self.vertex_limit([x.v, y.v]);
        }
        for (k, prod) in products.into_iter().enumerate() {
            let g = self.boundary.segment_data_jet(self.seg_indices[k], x, y)?;
            num = num + prod * g;
        }
        Ok(num / den)
    }

    /// Common limit at a vertex where two or more segment ADFs vanish.
    fn vertex_limit(&self, p: Point) -> Result<Jet2<f64>> {
        let segs = self.boundary.segments();
        let incident: Vec<usize> = self
            .seg_indices
            .iter()
            .copied()
            .filter(|&i| segs[i].adf(p) < 1e-12)
            .collect();
        let mut value = None;
        for &i in &incident {
            let g = self.boundary.segment_data_value(i, p)?;
            match value {
                None => value = Some(g),
                Some(v) if (v - g).abs() > self.vertex_tolerance => {
                    return Err(Error::InconsistentBoundaryData(p[0], p[1]));
                }
                Some(_) => {}
            }
        }
        let v = value
            .ok_or_else(|| Error::Geometry(format!("degenerate weights off-vertex at {p:?}")))?;
        // The limit value is well defined; derivatives at the corner are not,
        // so the jet is frozen there.
        Ok(Jet2::constant(v))
    }

    pub fn sample(&self, p: Point) -> Result<super::adf::FieldSample> {
        let (x, y) = Jet2::at_point(p);
        Ok(super::adf::FieldSample::from_jet(self.try_jet(x, y)?))
    }

    pub fn value(&self, p: Point) -> Result<f64> {
        let (x, y) = Jet2::at_point(p);
        Ok(self.try_jet(x, y)?.v)
    }
}

impl Field2 for TransfiniteExtension {
    fn jet(&self, x: Jet2<f64>, y: Jet2<f64>) -> Jet2<f64> {
        // Construction verified vertex consistency, so this cannot fail on
        // points of the closed domain.
        self.try_jet(x, y)
            .expect("transfinite extension evaluation failed")
    }
}
