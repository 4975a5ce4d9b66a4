//! Conforming structured triangulations of the built-in domains, uniform red
//! refinement, and a plain-text mesh format.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::domains::{self, Domain};
use crate::geometry::{Point, PolygonalBoundary};

/// Boundary edge of a mesh, tagged with the polygon segment it lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub segment: usize,
}

#[derive(Clone, Debug)]
pub struct TriMesh {
    pub vertices: Vec<Point>,
    /// Positively oriented vertex-index triples.
    pub elements: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    meshsize: f64,
}

/// Quantized coordinate key for vertex deduplication; mesh vertices are
/// dyadic rationals, so a 1e-9 grid is far below their separation.
fn key(p: Point) -> (i64, i64) {
    ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64)
}

struct VertexPool {
    vertices: Vec<Point>,
    index: HashMap<(i64, i64), usize>,
}

impl VertexPool {
    fn new() -> Self {
        VertexPool {
            vertices: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn insert(&mut self, p: Point) -> usize {
        *self.index.entry(key(p)).or_insert_with(|| {
            self.vertices.push(p);
            self.vertices.len() - 1
        })
    }
}

fn edge_len(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

impl TriMesh {
    fn from_parts(
        vertices: Vec<Point>,
        elements: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Self {
        let meshsize = elements
            .iter()
            .map(|e| {
                let [a, b, c] = e.map(|i| vertices[i]);
                edge_len(a, b).max(edge_len(b, c)).max(edge_len(c, a))
            })
            .fold(0.0, f64::max);
        TriMesh {
            vertices,
            elements,
            boundary_edges,
            meshsize,
        }
    }

    /// Maximum element diameter.
    pub fn meshsize(&self) -> f64 {
        self.meshsize
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    /// Vertices of element `e`.
    pub fn element_vertices(&self, e: usize) -> [Point; 3] {
        self.elements[e].map(|i| self.vertices[i])
    }

    /// Affine map of element `e`: `x = v0 + J xi`, returned as
    /// `(v0, J, det J)` with `J` column-major `[col0, col1]`.
    pub fn affine(&self, e: usize) -> (Point, [[f64; 2]; 2], f64) {
        let [a, b, c] = self.element_vertices(e);
        let j = [[b[0] - a[0], b[1] - a[1]], [c[0] - a[0], c[1] - a[1]]];
        let det = j[0][0] * j[1][1] - j[1][0] * j[0][1];
        (a, j, det)
    }

    pub fn element_area(&self, e: usize) -> f64 {
        self.affine(e).2.abs() / 2.0
    }

    /// Barycentric coordinates of `p` with respect to element `e`.
    pub fn barycentric(&self, e: usize, p: Point) -> [f64; 3] {
        let (a, j, det) = self.affine(e);
        let dx = p[0] - a[0];
        let dy = p[1] - a[1];
        let xi = (j[1][1] * dx - j[1][0] * dy) / det;
        let eta = (-j[0][1] * dx + j[0][0] * dy) / det;
        [1.0 - xi - eta, xi, eta]
    }

    /// Element containing `p`, with its reference coordinates.
    pub fn locate(&self, p: Point) -> Result<(usize, [f64; 2])> {
        let tol = -1e-10;
        for e in 0..self.elements.len() {
            let [l0, l1, l2] = self.barycentric(e, p);
            if l0 >= tol && l1 >= tol && l2 >= tol {
                return Ok((e, [l1, l2]));
            }
        }
        Err(Error::OutOfDomain(p[0], p[1]))
    }

    /// One uniform red refinement: each triangle splits into 4 via its edge
    /// midpoints; boundary edges split in two and keep their tags.
    pub fn refine(&self) -> TriMesh {
        let mut pool = VertexPool::new();
        for &v in &self.vertices {
            pool.insert(v);
        }
        let mut elements = Vec::with_capacity(4 * self.elements.len());
        for e in 0..self.elements.len() {
            let [i0, i1, i2] = self.elements[e];
            let [a, b, c] = self.element_vertices(e);
            let m01 = pool.insert([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]);
            let m12 = pool.insert([(b[0] + c[0]) / 2.0, (b[1] + c[1]) / 2.0]);
            let m20 = pool.insert([(c[0] + a[0]) / 2.0, (c[1] + a[1]) / 2.0]);
            elements.push([i0, m01, m20]);
            elements.push([m01, i1, m12]);
            elements.push([m20, m12, i2]);
            elements.push([m01, m12, m20]);
        }
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for be in &self.boundary_edges {
            let a = self.vertices[be.v[0]];
            let b = self.vertices[be.v[1]];
            let m = pool.insert([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]);
            let ia = pool.insert(a);
            let ib = pool.insert(b);
            boundary_edges.push(BoundaryEdge {
                v: [ia, m],
                segment: be.segment,
            });
            boundary_edges.push(BoundaryEdge {
                v: [m, ib],
                segment: be.segment,
            });
        }
        TriMesh::from_parts(pool.vertices, elements, boundary_edges)
    }

    /// Checks element orientation, edge conformity and boundary coverage.
    pub fn validate(&self) -> Result<()> {
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for (e, tri) in self.elements.iter().enumerate() {
            let (_, _, det) = self.affine(e);
            if det <= 0.0 {
                return Err(Error::Geometry(format!(
                    "element {e} is not positively oriented"
                )));
            }
            for k in 0..3 {
                let (i, j) = (tri[k], tri[(k + 1) % 3]);
                *edge_count.entry((i.min(j), i.max(j))).or_insert(0) += 1;
            }
        }
        for (&(i, j), &n) in &edge_count {
            if n > 2 {
                return Err(Error::Geometry(format!(
                    "edge ({i}, {j}) shared by {n} elements"
                )));
            }
        }
        let tagged: std::collections::HashSet<(usize, usize)> = self
            .boundary_edges
            .iter()
            .map(|be| (be.v[0].min(be.v[1]), be.v[0].max(be.v[1])))
            .collect();
        for (&e, &n) in &edge_count {
            let on_boundary = n == 1;
            if on_boundary != tagged.contains(&e) {
                return Err(Error::Geometry(format!(
                    "boundary tagging mismatch on edge {e:?}"
                )));
            }
        }
        Ok(())
    }

    /// Plain-text format: `nv ne nb`, then `x y` per vertex, `i j k` per
    /// element, `i j segment` per boundary edge.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{} {} {}\n",
            self.vertices.len(),
            self.elements.len(),
            self.boundary_edges.len()
        );
        for v in &self.vertices {
            s.push_str(&format!("{} {}\n", v[0], v[1]));
        }
        for e in &self.elements {
            s.push_str(&format!("{} {} {}\n", e[0], e[1], e[2]));
        }
        for be in &self.boundary_edges {
            s.push_str(&format!("{} {} {}\n", be.v[0], be.v[1], be.segment));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<TriMesh> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty mesh file".into()))?;
        let counts: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|e| Error::Parse(format!("mesh header: {e}"))))
            .collect::<Result<_>>()?;
        if counts.len() != 3 {
            return Err(Error::Parse("mesh header needs 'nv ne nb'".into()));
        }
        let (nv, ne, nb) = (counts[0], counts[1], counts[2]);
        let mut nums = |n: usize, what: &str| -> Result<Vec<Vec<f64>>> {
            (0..n)
                .map(|_| {
                    let line = lines
                        .next()
                        .ok_or_else(|| Error::Parse(format!("truncated mesh file in {what}")))?;
                    line.split_whitespace()
                        .map(|t| {
                            t.parse::<f64>()
                                .map_err(|e| Error::Parse(format!("{what}: {e}")))
                        })
                        .collect()
                })
                .collect()
        };
        let vs = nums(nv, "vertices")?;
        let es = nums(ne, "elements")?;
        let bs = nums(nb, "boundary edges")?;
        let vertices = vs
            .into_iter()
            .map(|r| {
                if r.len() == 2 {
                    Ok([r[0], r[1]])
                } else {
                    Err(Error::Parse("vertex line needs 'x y'".into()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let elements = es
            .into_iter()
            .map(|r| {
                if r.len() == 3 {
                    Ok([r[0] as usize, r[1] as usize, r[2] as usize])
                } else {
                    Err(Error::Parse("element line needs 'i j k'".into()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let boundary_edges = bs
            .into_iter()
            .map(|r| {
                if r.len() == 3 {
                    Ok(BoundaryEdge {
                        v: [r[0] as usize, r[1] as usize],
                        segment: r[2] as usize,
                    })
                } else {
                    Err(Error::Parse("boundary line needs 'i j segment'".into()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mesh = TriMesh::from_parts(vertices, elements, boundary_edges);
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn to_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<TriMesh> {
        TriMesh::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Counterclockwise corner lists of the axis-aligned base quads per domain.
fn base_quads(domain: Domain) -> Vec<[Point; 4]> {
    let quad = |x0: f64, y0: f64, s: f64| {
        [
            [x0, y0],
            [x0 + s, y0],
            [x0 + s, y0 + s],
            [x0, y0 + s],
        ]
    };
    match domain {
        Domain::UnitSquare | Domain::Rect => vec![quad(0.0, 0.0, 1.0)],
        Domain::LShape => vec![
            quad(0.0, -1.0, 1.0),
            quad(0.0, 0.0, 1.0),
            quad(-1.0, 0.0, 1.0),
        ],
        Domain::SquareWithHole => {
            let mut quads = Vec::new();
            for i in 0..4 {
                for j in 0..4 {
                    let (x0, y0) = (-1.0 + 0.5 * i as f64, -1.0 + 0.5 * j as f64);
                    // Skip the hole cell (0, 0.5)^2.
                    if (x0, y0) == (0.0, 0.0) {
                        continue;
                    }
                    quads.push(quad(x0, y0, 0.5));
                }
            }
            quads
        }
    }
}

/// Structured triangulation at refinement `level`: every base quad is split
/// into a `2^level` by `2^level` grid of cells, each cut along one diagonal.
pub fn generate_mesh(domain: Domain, level: u32) -> Result<TriMesh> {
    let boundary = domains::boundary_for(domain);
    let n = 1usize << level;
    let mut pool = VertexPool::new();
    let mut elements = Vec::new();
    for q in base_quads(domain) {
        let [p00, p10, _p11, p01] = q;
        let ex = [(p10[0] - p00[0]) / n as f64, (p10[1] - p00[1]) / n as f64];
        let ey = [(p01[0] - p00[0]) / n as f64, (p01[1] - p00[1]) / n as f64];
        let at = |i: usize, j: usize| -> Point {
            [
                p00[0] + i as f64 * ex[0] + j as f64 * ey[0],
                p00[1] + i as f64 * ex[1] + j as f64 * ey[1],
            ]
        };
        for i in 0..n {
            for j in 0..n {
                let v00 = pool.insert(at(i, j));
                let v10 = pool.insert(at(i + 1, j));
                let v11 = pool.insert(at(i + 1, j + 1));
                let v01 = pool.insert(at(i, j + 1));
                elements.push([v00, v10, v11]);
                elements.push([v00, v11, v01]);
            }
        }
    }
    let mesh_boundary = tag_boundary(&pool.vertices, &elements, &boundary)?;
    let mesh = TriMesh::from_parts(pool.vertices, elements, mesh_boundary);
    mesh.validate()?;
    Ok(mesh)
}

/// Find edges belonging to exactly one element and match them to polygon
/// segments.
fn tag_boundary(
    vertices: &[Point],
    elements: &[[usize; 3]],
    boundary: &PolygonalBoundary,
) -> Result<Vec<BoundaryEdge>> {
    let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in elements {
        for k in 0..3 {
            let (i, j) = (tri[k], tri[(k + 1) % 3]);
            *edge_count.entry((i.min(j), i.max(j))).or_insert(0) += 1;
        }
    }
    let mut out = Vec::new();
    let mut edges: Vec<_> = edge_count
        .iter()
        .filter(|&(_, &n)| n == 1)
        .map(|(&e, _)| e)
        .collect();
    edges.sort_unstable();
    for (i, j) in edges {
        let (a, b) = (vertices[i], vertices[j]);
        let seg = boundary
            .segments()
            .iter()
            .find(|s| s.distance(a) < 1e-12 && s.distance(b) < 1e-12)
            .ok_or_else(|| {
                Error::Geometry(format!(
                    "boundary edge ({a:?}, {b:?}) lies on no polygon segment"
                ))
            })?;
        out.push(BoundaryEdge {
            v: [i, j],
            segment: seg.id,
        });
    }
    Ok(out)
}

/// Nested coarse/fine mesh pair: `fine` is one red refinement of `coarse`.
pub struct NestedMeshPair {
    pub coarse: TriMesh,
    pub fine: TriMesh,
    /// Fine element index -> coarse parent element index.
    pub containment: Vec<usize>,
}

pub fn refine_to_pair(coarse: TriMesh) -> NestedMeshPair {
    let fine = coarse.refine();
    // refine() emits the 4 children of coarse element e consecutively.
    let containment = (0..fine.n_elements()).map(|f| f / 4).collect();
    NestedMeshPair {
        coarse,
        fine,
        containment,
    }
}
