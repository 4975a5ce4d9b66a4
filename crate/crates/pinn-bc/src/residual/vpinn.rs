//! Interpolated-VPINN residual assembly and losses.
//!
//! The trial function is the interpolation of the (possibly B-wrapped)
//! network into the coarse Lagrange space `U_H`; test functions live in a
//! finer space `V_h`. For linear problems the residuals `r = F - A c` are
//! affine in the trial coefficients, so the assembled sparse form and a
//! direct quadrature loop must agree; the nonlinear catalog problems add a
//! pointwise term evaluated at stored quadrature data.

use std::collections::HashMap;
use std::sync::Arc;

use crate::autodiff::{Graph, Jet2, Program, Scalar};
use crate::error::{Error, Result};
use crate::field::Field2;
use crate::geometry::{Point, PolygonalBoundary, TransfiniteExtension};
use crate::mesh::quadrature::gauss_legendre_01;
use crate::mesh::{generate_mesh, quadrature_for_order, LagrangeSpace, TriMesh};
use crate::network::{forward, MlpArchitecture};
use crate::problems::{Family, ProblemSpec};

use super::pinn::dirichlet_value;
use super::{exact_bc_layer, BLayer, BcMethod};

/// Nested trial/test spaces for an interpolated VPINN.
pub struct VpinnSpaces {
    pub coarse: Arc<TriMesh>,
    pub fine: Arc<TriMesh>,
    /// Fine element index -> coarse parent element index.
    pub containment: Vec<usize>,
    pub trial: Arc<LagrangeSpace>,
    pub test: Arc<LagrangeSpace>,
    pub q: usize,
}

/// Build the nested spaces: trial of degree `k_int` on the level mesh, test
/// of degree `k_test` on `test_refines` red refinements of it.
pub fn build_spaces(
    problem: &ProblemSpec,
    level: u32,
    k_int: usize,
    k_test: usize,
    q: usize,
    test_refines: u32,
) -> Result<VpinnSpaces> {
    if q < 1 {
        return Err(Error::config("quadrature order must be at least 1"));
    }
    if test_refines < 1 {
        return Err(Error::config("the test mesh must refine the trial mesh"));
    }
    let coarse = Arc::new(generate_mesh(problem.domain, level)?);
    let mut fine = coarse.as_ref().clone();
    for _ in 0..test_refines {
        fine = fine.refine();
    }
    let fine = Arc::new(fine);
    let shrink = 4usize.pow(test_refines);
    let containment = (0..fine.n_elements()).map(|f| f / shrink).collect();
    let trial = Arc::new(LagrangeSpace::new(coarse.clone(), k_int, &problem.boundary)?);
    let test = Arc::new(LagrangeSpace::new(fine.clone(), k_test, &problem.boundary)?);
    Ok(VpinnSpaces {
        coarse,
        fine,
        containment,
        trial,
        test,
        q,
    })
}

/// Pointwise nonlinearity applied at stored quadrature data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NonlinearKind {
    None,
    /// `scale * sin(p w) w` from the trial value.
    Reaction { p: f64 },
    /// `sqrt(|grad w|^2 + floor)` from the trial gradient.
    GradNorm { floor: f64 },
}

/// Assembled residual data: `r = F - A c - N(c)`, rows over active test dofs.
pub struct VpinnSystem {
    /// Active test dof ids (interior dofs, or all dofs under Nitsche).
    pub test_index: Vec<usize>,
    pub n_trial: usize,
    /// Sparse rows of `A`, columns sorted.
    pub a_rows: Vec<Vec<(usize, f64)>>,
    pub f_vec: Vec<f64>,
    pub nonlinearity: NonlinearKind,
    /// Per quadrature point: trial-value combination `w_q = sum coeff * c_j`.
    pub quad_val_rows: Vec<Vec<(usize, f64)>>,
    /// Per quadrature point: trial-gradient combination.
    pub quad_grad_rows: Vec<Vec<(usize, [f64; 2])>>,
    /// Premultiplier of the nonlinearity at each quadrature point.
    pub quad_scale: Vec<f64>,
    /// Per active row: `(quad index, test value * weight * det)`.
    pub nl_rows: Vec<Vec<(usize, f64)>>,
    pub vector_valued: bool,
    pub fine_meshsize: f64,
}

impl VpinnSystem {
    pub fn n_residuals(&self) -> usize {
        self.test_index.len()
    }

    /// Nonlinear point values `n_q(c)` for a concrete coefficient vector.
    fn nonlinear_values(&self, c: &[f64]) -> Vec<f64> {
        match self.nonlinearity {
            NonlinearKind::None => Vec::new(),
            NonlinearKind::Reaction { p } => self
                .quad_val_rows
                .iter()
                .zip(&self.quad_scale)
                .map(|(row, s)| {
                    let w: f64 = row.iter().map(|&(j, a)| a * c[j]).sum();
                    s * (p * w).sin() * w
                })
                .collect(),
            NonlinearKind::GradNorm { floor } => self
                .quad_grad_rows
                .iter()
                .zip(&self.quad_scale)
                .map(|(row, s)| {
                    let mut g = [0.0; 2];
                    for &(j, a) in row {
                        g[0] += a[0] * c[j];
                        g[1] += a[1] * c[j];
                    }
                    s * (g[0] * g[0] + g[1] * g[1] + floor).sqrt()
                })
                .collect(),
        }
    }
}

/// Residuals from the assembled form: `r = F - A c - N(c)`.
pub fn vpinn_residuals(system: &VpinnSystem, c: &[f64]) -> Result<Vec<f64>> {
    if c.len() != system.n_trial {
        return Err(Error::config(format!(
            "coefficient length {} does not match trial dimension {}",
            c.len(),
            system.n_trial
        )));
    }
    let nl = system.nonlinear_values(c);
    let mut r = system.f_vec.clone();
    for (row, (a_row, nl_row)) in system.a_rows.iter().zip(&system.nl_rows).enumerate() {
        for &(j, a) in a_row {
            r[row] -= a * c[j];
        }
        for &(qi, k) in nl_row {
            r[row] -= k * nl[qi];
        }
    }
    Ok(r)
}

fn edge_adjacency(mesh: &TriMesh) -> HashMap<(usize, usize), usize> {
    let mut map = HashMap::new();
    for (e, tri) in mesh.elements.iter().enumerate() {
        for k in 0..3 {
            let (i, j) = (tri[k], tri[(k + 1) % 3]);
            map.insert((i.min(j), i.max(j)), e);
        }
    }
    map
}

/// Outward unit normal of a boundary edge of element `e`.
fn outward_normal(mesh: &TriMesh, e: usize, a: Point, b: Point) -> [f64; 2] {
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let mut n = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
    let [p, q, r] = mesh.element_vertices(e);
    let centroid = [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0];
    let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    if n[0] * (mid[0] - centroid[0]) + n[1] * (mid[1] - centroid[1]) < 0.0 {
        n = [-n[0], -n[1]];
    }
    n
}

fn gauss_rule_1d(q: usize) -> Vec<(f64, f64)> {
    gauss_legendre_01((q / 2 + 1).clamp(1, 7))
}

/// Elastic strain contraction `eps(a e_k) : eps(b e_l)` from scalar gradients.
fn eps_dot(ag: [f64; 2], k: usize, bg: [f64; 2], l: usize) -> f64 {
    match (k, l) {
        (0, 0) => ag[0] * bg[0] + 0.5 * ag[1] * bg[1],
        (0, 1) => 0.5 * ag[1] * bg[0],
        (1, 0) => 0.5 * ag[0] * bg[1],
        (1, 1) => ag[1] * bg[1] + 0.5 * ag[0] * bg[0],
        _ => unreachable!(),
    }
}

/// Assemble the residual system `r = F - A c - N(c)` for a problem, method
/// and space pair. Nitsche enlarges the test index set to all dofs and adds
/// the consistency and stabilization boundary terms.
pub fn assemble_vpinn(
    problem: &ProblemSpec,
    spaces: &VpinnSpaces,
    method: &BcMethod,
) -> Result<VpinnSystem> {
    method.validate()?;
    let nitsche_gamma = match method {
        BcMethod::Nitsche { gamma } => {
            if !matches!(problem.family, Family::Elliptic(_)) {
                return Err(Error::config(
                    "Nitsche's method is implemented for the elliptic family",
                ));
            }
            Some(*gamma)
        }
        _ => None,
    };
    let vector = problem.is_vector_valued();
    let comp = if vector { 2 } else { 1 };
    let test = &spaces.test;
    let trial = &spaces.trial;
    let n_trial = comp * trial.dim();

    // Active rows: test dofs vanishing on Gamma_D, or all of them for Nitsche.
    let active: Vec<usize> = (0..test.dim())
        .filter(|&i| nitsche_gamma.is_some() || !test.boundary_dof_mask[i])
        .collect();
    let mut row_of = vec![usize::MAX; test.dim()];
    for (r, &i) in active.iter().enumerate() {
        row_of[i] = r;
    }
    let n_rows = comp * active.len();
    let mut a_maps: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n_rows];
    let mut f_vec = vec![0.0; n_rows];

    let nonlinearity = match &problem.family {
        Family::ParametricNonlinear { p, .. } => NonlinearKind::Reaction { p: *p },
        Family::Eikonal { .. } => NonlinearKind::GradNorm { floor: 1e-12 },
        _ => NonlinearKind::None,
    };
    let mut quad_val_rows = Vec::new();
    let mut quad_grad_rows = Vec::new();
    let mut quad_scale = Vec::new();
    let mut nl_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_rows];

    let rule = quadrature_for_order(spaces.q)?;
    for fe in 0..spaces.fine.n_elements() {
        let ce = spaces.containment[fe];
        let (v0, jf, detf) = spaces.fine.affine(fe);
        for (k, &xi) in rule.points.iter().enumerate() {
            let x = [
                v0[0] + jf[0][0] * xi[0] + jf[1][0] * xi[1],
                v0[1] + jf[0][1] * xi[0] + jf[1][1] * xi[1],
            ];
            let wdet = rule.weights[k] * detf;
            let (tvals, tgrads) = test.element_basis(fe, xi);
            let bary = spaces.coarse.barycentric(ce, x);
            let (uvals, ugrads) = trial.element_basis(ce, [bary[1], bary[2]]);
            let tdofs = &test.elem_dofs[fe];
            let udofs = &trial.elem_dofs[ce];

            match &problem.family {
                Family::Elliptic(c) => {
                    let mu = c.mu.value(x);
                    let beta = c.beta.value(x);
                    let sigma = c.sigma.value(x);
                    let fx = (c.f)(x);
                    for (il, &i) in tdofs.iter().enumerate() {
                        if row_of[i] == usize::MAX {
                            continue;
                        }
                        let row = row_of[i];
                        f_vec[row] += fx * tvals[il] * wdet;
                        for (jl, &j) in udofs.iter().enumerate() {
                            let a = mu
                                * (ugrads[jl][0] * tgrads[il][0] + ugrads[jl][1] * tgrads[il][1])
                                + (beta[0] * ugrads[jl][0] + beta[1] * ugrads[jl][1]) * tvals[il]
                                + sigma * uvals[jl] * tvals[il];
                            *a_maps[row].entry(j).or_insert(0.0) += a * wdet;
                        }
                    }
                }
                Family::ParametricNonlinear { coeffs: c, .. } => {
                    let mu = c.mu.value(x);
                    let beta = c.beta.value(x);
                    let sigma = c.sigma.value(x);
                    let fx = (c.f)(x);
                    let qi = quad_val_rows.len();
                    quad_val_rows
                        .push(udofs.iter().zip(&uvals).map(|(&j, &v)| (j, v)).collect());
                    quad_scale.push(sigma);
                    for (il, &i) in tdofs.iter().enumerate() {
                        if row_of[i] == usize::MAX {
                            continue;
                        }
                        let row = row_of[i];
                        f_vec[row] += fx * tvals[il] * wdet;
                        for (jl, &j) in udofs.iter().enumerate() {
                            let a = mu
                                * (ugrads[jl][0] * tgrads[il][0] + ugrads[jl][1] * tgrads[il][1])
                                + (beta[0] * ugrads[jl][0] + beta[1] * ugrads[jl][1]) * tvals[il];
                            *a_maps[row].entry(j).or_insert(0.0) += a * wdet;
                        }
                        nl_rows[row].push((qi, tvals[il] * wdet));
                    }
                }
                Family::Eikonal { eps, f } => {
                    let fx = f(x);
                    let qi = quad_grad_rows.len();
                    quad_grad_rows
                        .push(udofs.iter().zip(&ugrads).map(|(&j, &g)| (j, g)).collect());
                    quad_scale.push(1.0);
                    for (il, &i) in tdofs.iter().enumerate() {
                        if row_of[i] == usize::MAX {
                            continue;
                        }
                        let row = row_of[i];
                        f_vec[row] += fx * tvals[il] * wdet;
                        for (jl, &j) in udofs.iter().enumerate() {
                            let a = eps
                                * (ugrads[jl][0] * tgrads[il][0] + ugrads[jl][1] * tgrads[il][1]);
                            *a_maps[row].entry(j).or_insert(0.0) += a * wdet;
                        }
                        nl_rows[row].push((qi, tvals[il] * wdet));
                    }
                }
                Family::Convection { beta } => {
                    for (il, &i) in tdofs.iter().enumerate() {
                        if row_of[i] == usize::MAX {
                            continue;
                        }
                        let row = row_of[i];
                        for (jl, &j) in udofs.iter().enumerate() {
                            let a = (ugrads[jl][1] + beta * ugrads[jl][0]) * tvals[il];
                            *a_maps[row].entry(j).or_insert(0.0) += a * wdet;
                        }
                    }
                }
                Family::Elasticity {
                    lame_mu,
                    lame_lambda,
                    f,
                    ..
                } => {
                    let fv = {
                        let (xj, yj) = Jet2::at_point(x);
                        f.jet(xj, yj)
                    };
                    let nt = trial.dim();
                    let na = active.len();
                    for (il, &i) in tdofs.iter().enumerate() {
                        if row_of[i] == usize::MAX {
                            continue;
                        }
                        for l in 0..2 {
                            let row = l * na + row_of[i];
                            f_vec[row] += fv[l].v * tvals[il] * wdet;
                            for (jl, &j) in udofs.iter().enumerate() {
                                for kc in 0..2 {
                                    let a = 2.0 * lame_mu
                                        * eps_dot(ugrads[jl], kc, tgrads[il], l)
                                        + lame_lambda * ugrads[jl][kc] * tgrads[il][l];
                                    *a_maps[row].entry(kc * nt + j).or_insert(0.0) += a * wdet;
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // Neumann data on non-Dirichlet segments (elliptic only).
    if let Family::Elliptic(c) = &problem.family {
        if let Some(psi) = &c.psi {
            let adjacency = edge_adjacency(&spaces.fine);
            let rule1 = gauss_rule_1d(spaces.q);
            for be in &spaces.fine.boundary_edges {
                if problem.boundary.is_dirichlet(be.segment) {
                    continue;
                }
                let fe = adjacency[&(be.v[0].min(be.v[1]), be.v[0].max(be.v[1]))];
                let a = spaces.fine.vertices[be.v[0]];
                let b = spaces.fine.vertices[be.v[1]];
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                for &(t, wt) in &rule1 {
                    let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                    let bary = spaces.fine.barycentric(fe, x);
                    let (tvals, _) = test.element_basis(fe, [bary[1], bary[2]]);
                    for (il, &i) in test.elem_dofs[fe].iter().enumerate() {
                        if row_of[i] == usize::MAX {
                            continue;
                        }
                        f_vec[row_of[i]] += psi(x) * tvals[il] * wt * len;
                    }
                }
            }
        }
    }

    // Nitsche boundary terms on the Dirichlet part of the fine mesh. For
    // test functions with boundary support, a_h is extended consistently
    // with the strong form and carries the flux term -int mu dn(w) psi.
    if let Some(gamma) = nitsche_gamma {
        let Family::Elliptic(ell) = &problem.family else {
            unreachable!()
        };
        let h = spaces.fine.meshsize();
        let adjacency = edge_adjacency(&spaces.fine);
        let rule1 = gauss_rule_1d(spaces.q);
        for be in &spaces.fine.boundary_edges {
            if !problem.boundary.is_dirichlet(be.segment) {
                continue;
            }
            let fe = adjacency[&(be.v[0].min(be.v[1]), be.v[0].max(be.v[1]))];
            let ce = spaces.containment[fe];
            let a = spaces.fine.vertices[be.v[0]];
            let b = spaces.fine.vertices[be.v[1]];
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            let n = outward_normal(&spaces.fine, fe, a, b);
            for &(t, wt) in &rule1 {
                let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let ws = wt * len;
                let bary = spaces.fine.barycentric(fe, x);
                let (tvals, tgrads) = test.element_basis(fe, [bary[1], bary[2]]);
                let cb = spaces.coarse.barycentric(ce, x);
                let (uvals, ugrads) = trial.element_basis(ce, [cb[1], cb[2]]);
                let gx = problem.boundary.segment_data_value(be.segment, x)?;
                let mu = ell.mu.value(x);
                for (il, &i) in test.elem_dofs[fe].iter().enumerate() {
                    let row = row_of[i];
                    let dn = tgrads[il][0] * n[0] + tgrads[il][1] * n[1];
                    f_vec[row] += (-gx * dn + gamma / h * gx * tvals[il]) * ws;
                    for (jl, &j) in trial.elem_dofs[ce].iter().enumerate() {
                        let un = ugrads[jl][0] * n[0] + ugrads[jl][1] * n[1];
                        let add = -mu * un * tvals[il] - uvals[jl] * dn
                            + gamma / h * uvals[jl] * tvals[il];
                        *a_maps[row].entry(j).or_insert(0.0) += add * ws;
                    }
                }
            }
        }
    }

    let a_rows = a_maps
        .into_iter()
        .map(|m| {
            let mut row: Vec<(usize, f64)> = m.into_iter().collect();
            row.sort_unstable_by_key(|&(j, _)| j);
            row
        })
        .collect();
    let test_index = if vector {
        let mut idx = active.clone();
        idx.extend(active.iter().map(|&i| test.dim() + i));
        idx
    } else {
        active
    };
    Ok(VpinnSystem {
        test_index,
        n_trial,
        a_rows,
        f_vec,
        nonlinearity,
        quad_val_rows,
        quad_grad_rows,
        quad_scale,
        nl_rows,
        vector_valued: vector,
        fine_meshsize: spaces.fine.meshsize(),
    })
}

/// Residuals by a direct quadrature loop, independent of the assembled
/// matrix: trial values are evaluated at every quadrature point from the
/// coefficient vector. Used as the second path of the dual-path check.
pub fn vpinn_residuals_loop(
    problem: &ProblemSpec,
    spaces: &VpinnSpaces,
    method: &BcMethod,
    c: &[f64],
) -> Result<Vec<f64>> {
    method.validate()?;
    let nitsche_gamma = match method {
        BcMethod::Nitsche { gamma } => Some(*gamma),
        _ => None,
    };
    let vector = problem.is_vector_valued();
    let comp = if vector { 2 } else { 1 };
    let test = &spaces.test;
    let trial = &spaces.trial;
    if c.len() != comp * trial.dim() {
        return Err(Error::config("coefficient length mismatch"));
    }
    let active: Vec<usize> = (0..test.dim())
        .filter(|&i| nitsche_gamma.is_some() || !test.boundary_dof_mask[i])
        .collect();
    let mut row_of = vec![usize::MAX; test.dim()];
    for (r, &i) in active.iter().enumerate() {
        row_of[i] = r;
    }
    let mut res = vec![0.0; comp * active.len()];

    let rule = quadrature_for_order(spaces.q)?;
    for fe in 0..spaces.fine.n_elements() {
        let ce = spaces.containment[fe];
        let (v0, jf, detf) = spaces.fine.affine(fe);
        for (k, &xi) in rule.points.iter().enumerate() {
            let x = [
                v0[0] + jf[0][0] * xi[0] + jf[1][0] * xi[1],
                v0[1] + jf[0][1] * xi[0] + jf[1][1] * xi[1],
            ];
            let wdet = rule.weights[k] * detf;
            let (tvals, tgrads) = test.element_basis(fe, xi);
            let bary = spaces.coarse.barycentric(ce, x);
            let (uvals, ugrads) = trial.element_basis(ce, [bary[1], bary[2]]);
            let udofs = &trial.elem_dofs[ce];
            // Trial value and gradient at the quadrature point per component.
            let mut wv = [0.0; 2];
            let mut wg = [[0.0; 2]; 2];
            for kc in 0..comp {
                for (jl, &j) in udofs.iter().enumerate() {
                    let cj = c[kc * trial.dim() + j];
                    wv[kc] += cj * uvals[jl];
                    wg[kc][0] += cj * ugrads[jl][0];
                    wg[kc][1] += cj * ugrads[jl][1];
                }
            }
            let tdofs = &test.elem_dofs[fe];
            match &problem.family {
                Family::Elliptic(cf) => {
                    let mu = cf.mu.value(x);
                    let beta = cf.beta.value(x);
                    let sigma = cf.sigma.value(x);
                    let fx = (cf.f)(x);
                    for (il, &i) in tdofs.iter().enumerate() {
                        if row_of[i] == usize::MAX {
                            continue;
                        }
                        let integrand = fx * tvals[il]
                            - (mu * (wg[0][0] * tgrads[il][0] + wg[0][1] * tgrads[il][1])
                                + (beta[0] * wg[0][0] + beta[1] * wg[0][1]) * tvals[il]
                                + sigma * wv[0] * tvals[il]);
                        res[row_of[i]] += integrand * wdet;
                    }
                }
                Family::ParametricNonlinear { coeffs: cf, p } => {
                    let mu = cf.mu.value(x);
                    let beta = cf.beta.value(x);
                    let sigma = cf.sigma.value(x);
                    let fx = (cf.f)(x);
                    let nl = sigma * (p * wv[0]).sin() * wv[0];
                    for (il, &i) in tdofs.iter().enumerate() {
                        if row_of[i] == usize::MAX {
                            continue;
                        }
                        let integrand = fx * tvals[il]
                            - (mu * (wg[0][0] * tgrads[il][0] + wg[0][1] * tgrads[il][1])
                                + (beta[0] * wg[0][0] + beta[1] * wg[0][1]) * tvals[il]
                                + nl * tvals[il]);
                        res[row_of[i]] += integrand * wdet;
                    }
                }
                Family::Eikonal { eps, f } => {
                    let fx = f(x);
                    let norm = (wg[0][0] * wg[0][0] + wg[0][1] * wg[0][1] + 1e-12).sqrt();
                    for (il, &i) in tdofs.iter().enumerate() {
                        if row_of[i] == usize::MAX {
                            continue;
                        }
                        let integrand = fx * tvals[il]
                            - eps * (wg[0][0] * tgrads[il][0] + wg[0][1] * tgrads[il][1])
                            - norm * tvals[il];
                        res[row_of[i]] += integrand * wdet;
                    }
                }
                Family::Convection { beta } => {
                    for (il, &i) in tdofs.iter().enumerate() {
                        if row_of[i] == usize::MAX {
                            continue;
                        }
                        res[row_of[i]] -= (wg[0][1] + beta * wg[0][0]) * tvals[il] * wdet;
                    }
                }
                Family::Elasticity {
                    lame_mu,
                    lame_lambda,
                    f,
                    ..
                } => {
                    let fv = {
                        let (xj, yj) = Jet2::at_point(x);
                        f.jet(xj, yj)
                    };
                    let na = active.len();
                    let div_w = wg[0][0] + wg[1][1];
                    for (il, &i) in tdofs.iter().enumerate() {
                        if row_of[i] == usize::MAX {
                            continue;
                        }
                        for l in 0..2 {
                            let mut a = lame_lambda * div_w * tgrads[il][l];
                            for kc in 0..2 {
                                a += 2.0 * lame_mu * eps_dot(wg[kc], kc, tgrads[il], l);
                            }
                            res[l * na + row_of[i]] += (fv[l].v * tvals[il] - a) * wdet;
                        }
                    }
                }
            }
        }
    }

    if let Some(gamma) = nitsche_gamma {
        let Family::Elliptic(ell) = &problem.family else {
            return Err(Error::config(
                "Nitsche's method is implemented for the elliptic family",
            ));
        };
        let h = spaces.fine.meshsize();
        let adjacency = edge_adjacency(&spaces.fine);
        let rule1 = gauss_rule_1d(spaces.q);
        for be in &spaces.fine.boundary_edges {
            if !problem.boundary.is_dirichlet(be.segment) {
                continue;
            }
            let fe = adjacency[&(be.v[0].min(be.v[1]), be.v[0].max(be.v[1]))];
            let ce = spaces.containment[fe];
            let a = spaces.fine.vertices[be.v[0]];
            let b = spaces.fine.vertices[be.v[1]];
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            let n = outward_normal(&spaces.fine, fe, a, b);
            for &(t, wt) in &rule1 {
                let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let ws = wt * len;
                let bary = spaces.fine.barycentric(fe, x);
                let (tvals, tgrads) = test.element_basis(fe, [bary[1], bary[2]]);
                let cb = spaces.coarse.barycentric(ce, x);
                let (uvals, ugrads) = trial.element_basis(ce, [cb[1], cb[2]]);
                let gx = problem.boundary.segment_data_value(be.segment, x)?;
                let mu = ell.mu.value(x);
                let mut wv = 0.0;
                let mut wn = 0.0;
                for (jl, &j) in trial.elem_dofs[ce].iter().enumerate() {
                    wv += c[j] * uvals[jl];
                    wn += c[j] * (ugrads[jl][0] * n[0] + ugrads[jl][1] * n[1]);
                }
                for (il, &i) in test.elem_dofs[fe].iter().enumerate() {
                    let dn = tgrads[il][0] * n[0] + tgrads[il][1] * n[1];
                    res[row_of[i]] += (mu * wn * tvals[il] + (wv - gx) * dn
                        + gamma / h * (gx - wv) * tvals[il])
                        * ws;
                }
            }
        }
    }
    Ok(res)
}

/// Per-component B-layer for vector problems: shared ADF, one transfinite
/// extension per displacement component.
pub struct VectorBLayer {
    pub adf: Arc<crate::geometry::AdfField>,
    pub gbars: [Arc<TransfiniteExtension>; 2],
}

fn boundary_with_data(
    base: &PolygonalBoundary,
    g: Arc<dyn Field2>,
) -> Result<PolygonalBoundary> {
    let n = base.segments().len();
    let mut b = PolygonalBoundary::new(
        base.segments().to_vec(),
        (0..n).map(|i| base.is_dirichlet(i)).collect(),
    )?;
    for i in 0..n {
        if b.is_dirichlet(i) {
            b.set_segment_data(i, g.clone());
        }
    }
    Ok(b)
}

/// Exact-BC layer for the elasticity problem.
pub fn exact_bc_layer_vector(
    problem: &ProblemSpec,
    method: &BcMethod,
) -> Result<Option<VectorBLayer>> {
    method.validate()?;
    if !method.is_exact() {
        return Ok(None);
    }
    let Family::Elasticity { g, .. } = &problem.family else {
        return Err(Error::config("vector B-layer requires the elasticity family"));
    };
    let mode = match *method {
        BcMethod::ExactNormalized { m } => crate::geometry::AdfMode::Normalized { m },
        _ => crate::geometry::AdfMode::Product,
    };
    let adf = Arc::new(crate::geometry::AdfField::from_boundary(
        &problem.boundary,
        mode,
    ));
    let mk = |k: usize| -> Result<Arc<TransfiniteExtension>> {
        let g = g.clone();
        let comp: Arc<dyn Field2> = Arc::new(move |x: Jet2<f64>, y: Jet2<f64>| g.jet(x, y)[k]);
        let b = boundary_with_data(&problem.boundary, comp)?;
        Ok(Arc::new(TransfiniteExtension::new(Arc::new(b))?))
    };
    Ok(Some(VectorBLayer {
        adf,
        gbars: [mk(0)?, mk(1)?],
    }))
}

/// A fully specified interpolated VPINN.
pub struct VpinnModel {
    pub problem: ProblemSpec,
    pub arch: MlpArchitecture,
    pub method: BcMethod,
    pub spaces: VpinnSpaces,
    pub system: VpinnSystem,
    pub blayer: Option<BLayer>,
    pub vblayer: Option<VectorBLayer>,
    pub lambda_reg: f64,
}

impl VpinnModel {
    pub fn new(
        problem: ProblemSpec,
        arch: MlpArchitecture,
        method: BcMethod,
        spaces: VpinnSpaces,
        lambda_reg: f64,
    ) -> Result<Self> {
        method.validate()?;
        let n_out = if problem.is_vector_valued() { 2 } else { 1 };
        if arch.n_out() != n_out {
            return Err(Error::config(format!(
                "problem needs {} network output(s), architecture has {}",
                n_out,
                arch.n_out()
            )));
        }
        let system = assemble_vpinn(&problem, &spaces, &method)?;
        let (blayer, vblayer) = if problem.is_vector_valued() {
            (None, exact_bc_layer_vector(&problem, &method)?)
        } else {
            (exact_bc_layer(&problem, &method)?, None)
        };
        Ok(VpinnModel {
            problem,
            arch,
            method,
            spaces,
            system,
            blayer,
            vblayer,
            lambda_reg,
        })
    }

    /// Boundary control points for the penalty method: exactly the trial
    /// interpolation nodes on Gamma_D.
    pub fn control_points(&self) -> Vec<Point> {
        self.spaces
            .trial
            .dof_points
            .iter()
            .zip(&self.spaces.trial.boundary_dof_mask)
            .filter(|&(_, &m)| m)
            .map(|(&p, _)| p)
            .collect()
    }

    /// Trial coefficients for a concrete weight vector (direct f64 path).
    pub fn coefficients(&self, weights: &[f64]) -> Result<Vec<f64>> {
        trial_coefficients(self, weights)
    }

    /// Residuals for a concrete weight vector.
    pub fn residual_values(&self, weights: &[f64]) -> Result<Vec<f64>> {
        vpinn_residuals(&self.system, &self.coefficients(weights)?)
    }
}

/// Interpolate the (possibly B-wrapped) network into the trial space:
/// `c_j = gbar(x_j) + phi(x_j) net(x_j)` under exact methods, else the plain
/// network values.
pub fn trial_coefficients(model: &VpinnModel, weights: &[f64]) -> Result<Vec<f64>> {
    let trial = &model.spaces.trial;
    let nd = trial.dim();
    let comp = if model.problem.is_vector_valued() { 2 } else { 1 };
    let mut c = vec![0.0; comp * nd];
    for (j, &p) in trial.dof_points.iter().enumerate() {
        let vals = forward(&model.arch, weights, &p);
        if let Some(layer) = &model.blayer {
            let (g, phi) = layer.factors(p)?;
            c[j] = g.v + phi.v * vals[0];
        } else if let Some(layer) = &model.vblayer {
            let phi = layer.adf.value(p);
            for k in 0..2 {
                let (x, y) = Jet2::at_point(p);
                let g = layer.gbars[k].try_jet(x, y)?;
                c[k * nd + j] = g.v + phi * vals[k];
            }
        } else {
            for k in 0..comp {
                c[k * nd + j] = vals[k];
            }
        }
    }
    Ok(c)
}

/// Record the VPINN loss as a program over the flat weight vector: the sum of
/// squared residuals, plus the penalty term under M_A at the boundary
/// interpolation nodes, plus L2 weight regularization.
pub fn build_vpinn_loss(model: &VpinnModel) -> Result<Program> {
    let g = Graph::new();
    let winputs = g.inputs(model.arch.n_weights());
    let trial = &model.spaces.trial;
    let nd = trial.dim();
    let comp = if model.problem.is_vector_valued() { 2 } else { 1 };

    // Network values and trial coefficients per dof, as expressions.
    let mut nets = Vec::with_capacity(nd);
    let mut coeffs = vec![None; comp * nd];
    for (j, &p) in trial.dof_points.iter().enumerate() {
        let x = [g.constant(p[0]), g.constant(p[1])];
        let vals = forward(&model.arch, &winputs, &x);
        if let Some(layer) = &model.blayer {
            let (gb, phi) = layer.factors(p)?;
            coeffs[j] = Some(vals[0] * phi.v + gb.v);
        } else if let Some(layer) = &model.vblayer {
            let phi = layer.adf.value(p);
            for k in 0..2 {
                let (xj, yj) = Jet2::at_point(p);
                let gb = layer.gbars[k].try_jet(xj, yj)?;
                coeffs[k * nd + j] = Some(vals[k] * phi + gb.v);
            }
        } else {
            for k in 0..comp {
                coeffs[k * nd + j] = Some(vals[k]);
            }
        }
        nets.push(vals);
    }
    let coeffs: Vec<_> = coeffs.into_iter().map(|c| c.unwrap()).collect();

    // Nonlinear point values.
    let nl: Vec<_> = match model.system.nonlinearity {
        NonlinearKind::None => Vec::new(),
        NonlinearKind::Reaction { p } => model
            .system
            .quad_val_rows
            .iter()
            .zip(&model.system.quad_scale)
            .map(|(row, &s)| {
                let terms: Vec<_> = row.iter().map(|&(j, a)| (a, coeffs[j])).collect();
                let w = g.affine_comb(0.0, &terms);
                (w * p).sin() * w * s
            })
            .collect(),
        NonlinearKind::GradNorm { floor } => model
            .system
            .quad_grad_rows
            .iter()
            .zip(&model.system.quad_scale)
            .map(|(row, &s)| {
                let tx: Vec<_> = row.iter().map(|&(j, a)| (a[0], coeffs[j])).collect();
                let ty: Vec<_> = row.iter().map(|&(j, a)| (a[1], coeffs[j])).collect();
                let gx = g.affine_comb(0.0, &tx);
                let gy = g.affine_comb(0.0, &ty);
                (gx.square() + gy.square() + floor).sqrt() * s
            })
            .collect(),
    };

    let mut residuals = Vec::with_capacity(model.system.f_vec.len());
    for (row, (a_row, nl_row)) in model
        .system
        .a_rows
        .iter()
        .zip(&model.system.nl_rows)
        .enumerate()
    {
        let terms: Vec<_> = a_row.iter().map(|&(j, a)| (-a, coeffs[j])).collect();
        let mut r = g.affine_comb(model.system.f_vec[row], &terms);
        if !nl_row.is_empty() {
            let nterms: Vec<_> = nl_row.iter().map(|&(qi, k)| (k, nl[qi])).collect();
            r = r - g.affine_comb(0.0, &nterms);
        }
        residuals.push(r);
    }
    let mut loss = g.sum_squares(&residuals);

    if let BcMethod::Penalty { lambda } = model.method {
        let mut misfits = Vec::new();
        for (j, &p) in trial.dof_points.iter().enumerate() {
            if !trial.boundary_dof_mask[j] {
                continue;
            }
            if model.problem.is_vector_valued() {
                let Family::Elasticity { g: gd, .. } = &model.problem.family else {
                    unreachable!()
                };
                let (xj, yj) = Jet2::at_point(p);
                let gv = gd.jet(xj, yj);
                misfits.push(nets[j][0] - gv[0].v);
                misfits.push(nets[j][1] - gv[1].v);
            } else {
                let gv = dirichlet_value(&model.problem.boundary, p)?;
                misfits.push(nets[j][0] - gv);
            }
        }
        loss = loss + g.sum_squares(&misfits) * lambda;
    }
    if model.lambda_reg > 0.0 {
        loss = loss + g.sum_squares(&winputs) * model.lambda_reg;
    }
    Ok(g.finish(loss))
}
