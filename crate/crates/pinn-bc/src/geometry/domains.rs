//! Boundary polygons of the built-in computational domains.
//!
//! Outer boundaries are ordered counterclockwise and hole boundaries
//! clockwise, so the left normal of every segment points into the domain.

use super::boundary::PolygonalBoundary;
use super::segment::{Point, Segment};

/// Domains with built-in structured meshes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Domain {
    /// `(0,1)^2`
    UnitSquare,
    /// `(-1,1)^2` minus the closed square `[-1,0]^2`
    LShape,
    /// `(-1,1)^2` minus the square `(0,0.5)^2`
    SquareWithHole,
    /// `(0,1)^2` read as space-time `(x,t)`; Dirichlet on `x=0` and `t=0`
    Rect,
}

fn chain(vertices: &[Point], first_id: usize) -> Vec<Segment> {
    let n = vertices.len();
    (0..n)
        .map(|i| Segment::new(vertices[i], vertices[(i + 1) % n], first_id + i).unwrap())
        .collect()
}

pub fn unit_square_boundary() -> PolygonalBoundary {
    let segs = chain(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], 0);
    PolygonalBoundary::new(segs, vec![true; 4]).unwrap()
}

pub fn l_shape_boundary() -> PolygonalBoundary {
    let segs = chain(
        &[
            [0.0, -1.0],
            [1.0, -1.0],
            [1.0, 1.0],
            [-1.0, 1.0],
            [-1.0, 0.0],
            [0.0, 0.0],
        ],
        0,
    );
    PolygonalBoundary::new(segs, vec![true; 6]).unwrap()
}

pub fn square_with_hole_boundary() -> PolygonalBoundary {
    let mut segs = chain(&[[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]], 0);
    segs.extend(chain(
        &[[0.0, 0.0], [0.0, 0.5], [0.5, 0.5], [0.5, 0.0]],
        4,
    ));
    PolygonalBoundary::new(segs, vec![true; 8]).unwrap()
}

/// Space-time rectangle: Dirichlet on the inflow edge `x = 0` and the initial
/// edge `t = 0`, outflow and final edges free.
pub fn rect_boundary() -> PolygonalBoundary {
    let segs = chain(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], 0);
    PolygonalBoundary::new(segs, vec![true, false, false, true]).unwrap()
}

pub fn boundary_for(domain: Domain) -> PolygonalBoundary {
    match domain {
        Domain::UnitSquare => unit_square_boundary(),
        Domain::LShape => l_shape_boundary(),
        Domain::SquareWithHole => square_with_hole_boundary(),
        Domain::Rect => rect_boundary(),
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Domain::UnitSquare => "unit-square",
            Domain::LShape => "l-shape",
            Domain::SquareWithHole => "square-with-hole",
            Domain::Rect => "rect",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Domain {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unit-square" | "unit_square" => Ok(Domain::UnitSquare),
            "l-shape" | "l_shape" => Ok(Domain::LShape),
            "square-with-hole" | "square_with_hole" => Ok(Domain::SquareWithHole),
            "rect" => Ok(Domain::Rect),
            other => Err(crate::error::Error::config(format!(
                "unknown domain '{other}'"
            ))),
        }
    }
}
