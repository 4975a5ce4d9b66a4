//! Lagrange finite element spaces on triangle meshes: nodal bases of degree
//! 1..=6 on the uniform barycentric lattice, global dof numbering, the
//! interpolation operator and point evaluation.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::adf::FieldSample;
use crate::geometry::{Point, PolygonalBoundary};

use super::tri::TriMesh;

/// Nodal basis on the reference triangle, stored as monomial coefficients:
/// `phi_m(x, y) = sum_a coeff[a][m] x^p y^q` over monomials `(p, q)`.
pub struct ReferenceBasis {
    pub degree: usize,
    /// Lattice nodes `(i/k, j/k)`, `i + j <= k`, ordered j-major.
    pub nodes: Vec<[f64; 2]>,
    monomials: Vec<(u32, u32)>,
    /// `coeff[monomial][basis]`.
    coeff: DMatrix<f64>,
}

fn mono_eval(p: u32, q: u32, x: f64, y: f64) -> f64 {
    x.powi(p as i32) * y.powi(q as i32)
}

impl ReferenceBasis {
    pub fn new(degree: usize) -> Result<Self> {
        if !(1..=6).contains(&degree) {
            return Err(Error::config(format!(
                "Lagrange degree {degree} unsupported (1..=6)"
            )));
        }
        let k = degree as u32;
        let mut nodes = Vec::new();
        let mut monomials = Vec::new();
        for j in 0..=k {
            for i in 0..=(k - j) {
                nodes.push([f64::from(i) / f64::from(k), f64::from(j) / f64::from(k)]);
                monomials.push((i, j));
            }
        }
        let n = nodes.len();
        let v = DMatrix::from_fn(n, n, |r, c| {
            let (p, q) = monomials[c];
            mono_eval(p, q, nodes[r][0], nodes[r][1])
        });
        let coeff = v
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::numerical("singular Vandermonde matrix"))?;
        Ok(ReferenceBasis {
            degree,
            nodes,
            monomials,
            coeff,
        })
    }

    pub fn n_local(&self) -> usize {
        self.nodes.len()
    }

    /// Values of all basis functions at a reference point.
    pub fn values(&self, xi: [f64; 2]) -> Vec<f64> {
        let n = self.n_local();
        let mut out = vec![0.0; n];
        for (a, &(p, q)) in self.monomials.iter().enumerate() {
            let m = mono_eval(p, q, xi[0], xi[1]);
            if m != 0.0 {
                for b in 0..n {
                    out[b] += self.coeff[(a, b)] * m;
                }
            }
        }
        out
    }

    /// Values and reference-coordinate gradients of all basis functions.
    pub fn values_grads(&self, xi: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
        let n = self.n_local();
        let mut vals = vec![0.0; n];
        let mut grads = vec![[0.0; 2]; n];
        for (a, &(p, q)) in self.monomials.iter().enumerate() {
            let m = mono_eval(p, q, xi[0], xi[1]);
            let mx = if p == 0 {
                0.0
            } else {
                f64::from(p) * mono_eval(p - 1, q, xi[0], xi[1])
            };
            let my = if q == 0 {
                0.0
            } else {
                f64::from(q) * mono_eval(p, q - 1, xi[0], xi[1])
            };
            for b in 0..n {
                let c = self.coeff[(a, b)];
                vals[b] += c * m;
                grads[b][0] += c * mx;
                grads[b][1] += c * my;
            }
        }
        (vals, grads)
    }
}

/// A global Lagrange space on a mesh, with dofs deduplicated across elements
/// and flagged when they sit on a Dirichlet segment.
pub struct LagrangeSpace {
    pub mesh: Arc<TriMesh>,
    pub basis: ReferenceBasis,
    pub dof_points: Vec<Point>,
    /// `elem_dofs[e][local]` = global dof index.
    pub elem_dofs: Vec<Vec<usize>>,
    pub boundary_dof_mask: Vec<bool>,
}

impl LagrangeSpace {
    pub fn new(mesh: Arc<TriMesh>, degree: usize, boundary: &PolygonalBoundary) -> Result<Self> {
        let basis = ReferenceBasis::new(degree)?;
        let mut dof_points: Vec<Point> = Vec::new();
        let mut index: HashMap<(i64, i64), usize> = HashMap::new();
        let mut elem_dofs = Vec::with_capacity(mesh.n_elements());
        for e in 0..mesh.n_elements() {
            let (v0, j, _) = mesh.affine(e);
            let mut dofs = Vec::with_capacity(basis.n_local());
            for node in &basis.nodes {
                let p = [
                    v0[0] + j[0][0] * node[0] + j[1][0] * node[1],
                    v0[1] + j[0][1] * node[0] + j[1][1] * node[1],
                ];
                let key = ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
                let idx = *index.entry(key).or_insert_with(|| {
                    dof_points.push(p);
                    dof_points.len() - 1
                });
                dofs.push(idx);
            }
            elem_dofs.push(dofs);
        }
        let boundary_dof_mask = dof_points
            .iter()
            .map(|&p| boundary.on_dirichlet(p, 1e-12))
            .collect();
        Ok(LagrangeSpace {
            mesh,
            basis,
            dof_points,
            elem_dofs,
            boundary_dof_mask,
        })
    }

    pub fn dim(&self) -> usize {
        self.dof_points.len()
    }

    pub fn degree(&self) -> usize {
        self.basis.degree
    }

    pub fn n_interior(&self) -> usize {
        self.boundary_dof_mask.iter().filter(|&&b| !b).count()
    }

    /// Physical-coordinate basis values and gradients on element `e` at
    /// reference point `xi`.
    pub fn element_basis(&self, e: usize, xi: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
        let (vals, ref_grads) = self.basis.values_grads(xi);
        let (_, j, det) = self.mesh.affine(e);
        // grad_phys = J^{-T} grad_ref, with J stored column-major.
        let inv_t = [
            [j[1][1] / det, -j[0][1] / det],
            [-j[1][0] / det, j[0][0] / det],
        ];
        let grads = ref_grads
            .into_iter()
            .map(|g| {
                [
                    inv_t[0][0] * g[0] + inv_t[0][1] * g[1],
                    inv_t[1][0] * g[0] + inv_t[1][1] * g[1],
                ]
            })
            .collect();
        (vals, grads)
    }
}

/// A function in a Lagrange space: nodal coefficients over the space's dofs.
pub struct TrialFunction {
    pub space: Arc<LagrangeSpace>,
    pub coeffs: Vec<f64>,
}

impl TrialFunction {
    pub fn new(space: Arc<LagrangeSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(Error::config(format!(
                "coefficient length {} does not match space dimension {}",
                coeffs.len(),
                space.dim()
            )));
        }
        Ok(TrialFunction { space, coeffs })
    }

    /// Value and gradient on element `e` at reference point `xi`.
    pub fn eval_element(&self, e: usize, xi: [f64; 2]) -> (f64, [f64; 2]) {
        let (vals, grads) = self.space.element_basis(e, xi);
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for (local, &dof) in self.space.elem_dofs[e].iter().enumerate() {
            let c = self.coeffs[dof];
            v += c * vals[local];
            g[0] += c * grads[local][0];
            g[1] += c * grads[local][1];
        }
        (v, g)
    }

    /// Evaluate at a physical point (locating the element by search).
    pub fn sample(&self, p: Point) -> Result<FieldSample> {
        let (e, xi) = self.space.mesh.locate(p)?;
        let (v, g) = self.eval_element(e, xi);
        Ok(FieldSample {
            value: v,
            gradient: g,
            laplacian: None,
        })
    }

    pub fn value(&self, p: Point) -> Result<f64> {
        Ok(self.sample(p)?.value)
    }
}

/// Nodal interpolation: coefficients are the field values at the dof points.
pub fn interpolate(space: Arc<LagrangeSpace>, f: impl Fn(Point) -> f64) -> TrialFunction {
    let coeffs = space.dof_points.iter().map(|&p| f(p)).collect();
    TrialFunction { space, coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domains::{self, Domain};
    use crate::mesh::tri::generate_mesh;

    fn space(domain: Domain, level: u32, degree: usize) -> Arc<LagrangeSpace> {
        let mesh = Arc::new(generate_mesh(domain, level).unwrap());
        let b = domains::boundary_for(domain);
        Arc::new(LagrangeSpace::new(mesh, degree, &b).unwrap())
    }

    #[test]
    fn lagrange_delta_property() {
        for degree in 1..=6 {
            let rb = ReferenceBasis::new(degree).unwrap();
            for (i, &node) in rb.nodes.iter().enumerate() {
                let vals = rb.values(node);
                for (j, &v) in vals.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-10, "k={degree} phi_{j}(x_{i})");
                }
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        let rb = ReferenceBasis::new(4).unwrap();
        let mut xi = [0.123f64, 0.456];
        for _ in 0..100 {
            // Low-discrepancy walk inside the reference triangle.
            xi = [(xi[0] + 0.345_678).fract(), (xi[1] + 0.567_891).fract()];
            if xi[0] + xi[1] > 1.0 {
                xi = [1.0 - xi[0], 1.0 - xi[1]];
            }
            let s: f64 = rb.values(xi).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn space_dimension_matches_node_count() {
        // P2 on unit square level 1: (2*2+1)^2 = 25 nodes.
        let s = space(Domain::UnitSquare, 1, 2);
        assert_eq!(s.dim(), 25);
        // P1 dofs are the vertices.
        let s1 = space(Domain::UnitSquare, 2, 1);
        assert_eq!(s1.dim(), s1.mesh.n_vertices());
        // Interior dof count on the unit square, P1 level 2: (5-2)^2.
        assert_eq!(s1.n_interior(), 9);
    }

    #[test]
    fn boundary_mask_respects_dirichlet_flags() {
        let mesh = Arc::new(generate_mesh(Domain::Rect, 1).unwrap());
        let b = domains::rect_boundary();
        let s = LagrangeSpace::new(mesh, 2, &b).unwrap();
        for (p, &m) in s.dof_points.iter().zip(&s.boundary_dof_mask) {
            let on_dirichlet = p[0].abs() < 1e-12 || p[1].abs() < 1e-12;
            assert_eq!(m, on_dirichlet, "{p:?}");
        }
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let s = space(Domain::LShape, 1, 3);
        let f = |p: Point| 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1] * p[1] - p[0].powi(3);
        let w = interpolate(s.clone(), f);
        for p in [[0.3, 0.4], [-0.5, 0.7], [0.9, -0.9], [0.1, 0.05]] {
            assert!((w.value(p).unwrap() - f(p)).abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn constant_and_linear_fields() {
        let s = space(Domain::UnitSquare, 1, 2);
        let c = interpolate(s.clone(), |_| 3.7);
        assert!(c.coeffs.iter().all(|&v| v == 3.7));
        let lin = interpolate(s, |p| p[0] + 2.0 * p[1]);
        let smp = lin.sample([0.3, 0.6]).unwrap();
        assert!((smp.gradient[0] - 1.0).abs() < 1e-12);
        assert!((smp.gradient[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn interpolation_error_decays_at_degree_plus_one() {
        let f = |p: Point| (p[0] + p[1]).tanh();
        let mut sup = Vec::new();
        for level in 1..=4 {
            let s = space(Domain::UnitSquare, level, 4);
            let w = interpolate(s, f);
            let mut worst: f64 = 0.0;
            let n = 37;
            for i in 0..=n {
                for j in 0..=n {
                    let p = [i as f64 / n as f64, j as f64 / n as f64];
                    worst = worst.max((w.value(p).unwrap() - f(p)).abs());
                }
            }
            sup.push(worst);
        }
        let rate = (sup[2] / sup[3]).log2();
        assert!((rate - 5.0).abs() < 0.6, "sup errors {sup:?}, rate {rate}");
    }
}
