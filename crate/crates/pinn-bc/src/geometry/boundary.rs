//! Polygonal Dirichlet/Neumann boundary descriptions with attached data.

use std::path::Path;
use std::sync::Arc;

use crate::autodiff::Jet2;
use crate::error::{Error, Result};
use crate::field::Field2;

use super::segment::{Point, Segment};

/// A boundary made of straight segments, each flagged Dirichlet or not, with
/// per-segment boundary data `g_i`. A `g_i` is defined away from its segment
/// by evaluating the raw datum at the clamped orthogonal projection.
pub struct PolygonalBoundary {
    segments: Vec<Segment>,
    dirichlet_mask: Vec<bool>,
    data: Vec<Option<Arc<dyn Field2>>>,
}

impl PolygonalBoundary {
    pub fn new(segments: Vec<Segment>, dirichlet_mask: Vec<bool>) -> Result<Self> {
        if segments.len() != dirichlet_mask.len() {
            return Err(Error::Geometry(
                "segment list and dirichlet mask length mismatch".into(),
            ));
        }
        if !dirichlet_mask.iter().any(|&d| d) {
            return Err(Error::Geometry(
                "boundary needs at least one Dirichlet segment".into(),
            ));
        }
        let data = vec![None; segments.len()];
        Ok(PolygonalBoundary {
            segments,
            dirichlet_mask,
            data,
        })
    }

    /// Closed polygon from a vertex loop; all segments Dirichlet.
    pub fn closed_polygon(vertices: &[Point]) -> Result<Self> {
        let n = vertices.len();
        let segments = (0..n)
            .map(|i| Segment::new(vertices[i], vertices[(i + 1) % n], i))
            .collect::<Result<Vec<_>>>()?;
        PolygonalBoundary::new(segments, vec![true; n])
    }

    /// Attach the same Dirichlet datum to every segment.
    pub fn with_data(mut self, g: Arc<dyn Field2>) -> Self {
        for slot in self.data.iter_mut() {
            *slot = Some(g.clone());
        }
        self
    }

    pub fn set_segment_data(&mut self, seg: usize, g: Arc<dyn Field2>) {
        self.data[seg] = Some(g);
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_dirichlet(&self, seg: usize) -> bool {
        self.dirichlet_mask[seg]
    }

    pub fn dirichlet_segments(&self) -> impl Iterator<Item = &Segment> + '_ {
        self.segments
            .iter()
            .zip(&self.dirichlet_mask)
            .filter_map(|(s, &d)| d.then_some(s))
    }

    /// Endpoints of Dirichlet segments, deduplicated.
    pub fn dirichlet_vertices(&self) -> Vec<Point> {
        let mut verts: Vec<Point> = Vec::new();
        for s in self.dirichlet_segments() {
            for p in [s.a, s.b] {
                if !verts
                    .iter()
                    .any(|q| (q[0] - p[0]).abs() < 1e-12 && (q[1] - p[1]).abs() < 1e-12)
                {
                    verts.push(p);
                }
            }
        }
        verts
    }

    pub fn distance_to_dirichlet_vertices(&self, p: Point) -> f64 {
        self.dirichlet_vertices()
            .iter()
            .map(|v| ((p[0] - v[0]).powi(2) + (p[1] - v[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn shortest_dirichlet_segment(&self) -> f64 {
        self.dirichlet_segments()
            .map(|s| s.length())
            .fold(f64::INFINITY, f64::min)
    }

    /// Evaluate `g_i` at an arbitrary point (datum composed with the clamped
    /// projection onto segment `seg`).
    pub fn segment_data_jet(&self, seg: usize, x: Jet2<f64>, y: Jet2<f64>) -> Result<Jet2<f64>> {
        let g = self.data[seg]
            .as_ref()
            .ok_or_else(|| Error::Geometry(format!("segment {seg} has no boundary data")))?;
        let (px, py) = self.segments[seg].project_clamped_jet(x, y);
        Ok(g.jet(px, py))
    }

    pub fn segment_data_value(&self, seg: usize, p: Point) -> Result<f64> {
        let (x, y) = Jet2::at_point(p);
        Ok(self.segment_data_jet(seg, x, y)?.v)
    }

    /// Deterministic sample points on the Dirichlet part, roughly `n` in
    /// total, distributed per segment proportionally to length and excluding
    /// the segment endpoints.
    pub fn sample_dirichlet(&self, n: usize) -> Vec<Point> {
        let total: f64 = self.dirichlet_segments().map(|s| s.length()).sum();
        let mut out = Vec::with_capacity(n);
        for s in self.dirichlet_segments() {
            let k = ((n as f64 * s.length() / total).round() as usize).max(1);
            for i in 0..k {
                out.push(s.at((i as f64 + 0.5) / k as f64));
            }
        }
        out
    }

    /// Is `p` on a Dirichlet segment (within `tol`)?
    pub fn on_dirichlet(&self, p: Point, tol: f64) -> bool {
        self.dirichlet_segments().any(|s| s.distance(p) <= tol)
    }

    /// Load from a plain-text polygon file: one segment per line,
    /// `x_a y_a x_b y_b dirichlet_flag`, `#` starts a comment.
    pub fn from_polygon_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_polygon_text(&text)
    }

    pub fn from_polygon_text(text: &str) -> Result<Self> {
        let mut segments = Vec::new();
        let mut mask = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(Error::Parse(format!(
                    "polygon line {}: expected 5 fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let nums: Vec<f64> = fields[..4]
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("polygon line {}: {e}", lineno + 1)))
                })
                .collect::<Result<_>>()?;
            let flag = match fields[4] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Parse(format!(
                        "polygon line {}: dirichlet flag must be 0 or 1, got {other}",
                        lineno + 1
                    )))
                }
            };
            segments.push(Segment::new(
                [nums[0], nums[1]],
                [nums[2], nums[3]],
                segments.len(),
            )?);
            mask.push(flag);
        }
        PolygonalBoundary::new(segments, mask)
    }

    pub fn to_polygon_text(&self) -> String {
        let mut out = String::new();
        for (s, &d) in self.segments.iter().zip(&self.dirichlet_mask) {
            out.push_str(&format!(
                "{} {} {} {} {}\n",
                s.a[0],
                s.a[1],
                s.b[0],
                s.b[1],
                if d { 1 } else { 0 }
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::constant;

    #[test]
    fn requires_a_dirichlet_segment() {
        let segs = vec![Segment::new([0.0, 0.0], [1.0, 0.0], 0).unwrap()];
        assert!(PolygonalBoundary::new(segs, vec![false]).is_err());
    }

    #[test]
    fn polygon_file_round_trip() {
        let text = "0 0 1 0 1\n1 0 1 1 0\n# comment\n1 1 0 1 1\n0 1 0 0 1\n";
        let b = PolygonalBoundary::from_polygon_text(text).unwrap();
        assert_eq!(b.segments().len(), 4);
        assert!(!b.is_dirichlet(1));
        let again = PolygonalBoundary::from_polygon_text(&b.to_polygon_text()).unwrap();
        assert_eq!(again.segments().len(), 4);
        assert_eq!(again.is_dirichlet(2), b.is_dirichlet(2));
    }

    #[test]
    fn segment_data_uses_clamped_projection() {
        let b = PolygonalBoundary::closed_polygon(&[[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]])
            .unwrap()
            .with_data(Arc::new(
                |x: crate::autodiff::Jet2<f64>, _y: crate::autodiff::Jet2<f64>| x,
            ));
        // Projection of (1, 1) onto the bottom edge is (1, 0); datum returns x.
        assert!((b.segment_data_value(0, [1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        // Beyond endpoint: clamped to (2, 0).
        assert!((b.segment_data_value(0, [5.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
        let _ = constant(1.0);
    }
}
