//! Training-free least-squares minimizer of the variational loss over the
//! trial coefficients, valid for problem families whose residuals are affine
//! in the coefficients.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::{h1_error, TrialFunction};
use crate::problems::{Family, ProblemSpec};
use crate::residual::pinn::dirichlet_value;
use crate::residual::{assemble_vpinn, build_spaces, BcMethod};

/// Sparse residual row: `r = rhs - sum a_j c_j`.
pub type LsRow = (Vec<(usize, f64)>, f64);

/// The exact minimizer and its quality measures.
pub struct OracleSolution {
    pub trial: TrialFunction,
    /// Euclidean norm of the full residual vector at the minimizer,
    /// including penalty rows.
    pub residual_norm: f64,
    /// H1 error against the exact solution, when one exists.
    pub h1_error: Option<f64>,
}

/// Minimize `sum_i (rhs_i - sum_j a_ij c_j)^2` over the columns not pinned by
/// `fixed`, via the normal equations. Returns the full coefficient vector.
pub fn solve_least_squares(rows: &[LsRow], n_cols: usize, fixed: &[Option<f64>]) -> Result<Vec<f64>> {
    if fixed.len() != n_cols {
        return Err(Error::config("fixed mask length must match column count"));
    }
    let mut col_of = vec![usize::MAX; n_cols];
    let mut free = Vec::new();
    for (j, f) in fixed.iter().enumerate() {
        if f.is_none() {
            col_of[j] = free.len();
            free.push(j);
        }
    }
    let n = free.len();
    if n == 0 {
        return Ok(fixed.iter().map(|f| f.unwrap()).collect());
    }
    let mut ata = DMatrix::<f64>::zeros(n, n);
    let mut atb = DVector::<f64>::zeros(n);
    let mut row_free: Vec<(usize, f64)> = Vec::new();
    for (entries, rhs) in rows {
        row_free.clear();
        let mut b = *rhs;
        for &(j, a) in entries {
            match fixed[j] {
                Some(v) => b -= a * v,
                None => row_free.push((col_of[j], a)),
            }
        }
        for &(c1, a1) in &row_free {
            atb[c1] += a1 * b;
            for &(c2, a2) in &row_free {
                ata[(c1, c2)] += a1 * a2;
            }
        }
    }
    let x = match ata.clone().cholesky() {
        Some(chol) => chol.solve(&atb),
        None => ata
            .lu()
            .solve(&atb)
            .ok_or_else(|| Error::numerical("normal equations are singular"))?,
    };
    let mut c = vec![0.0; n_cols];
    for (j, f) in fixed.iter().enumerate() {
        c[j] = match f {
            Some(v) => *v,
            None => x[col_of[j]],
        };
    }
    Ok(c)
}

/// Euclidean norm of the residual vector of `rows` at `c`.
pub fn residual_norm_at(rows: &[LsRow], c: &[f64]) -> f64 {
    rows.iter()
        .map(|(entries, rhs)| {
            let r = rhs - entries.iter().map(|&(j, a)| a * c[j]).sum::<f64>();
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Residual rows of the assembled system under `method`, with the penalty
/// misfit rows appended, and the coefficient pins for exact methods.
pub fn oracle_rows(
    problem: &ProblemSpec,
    method: &BcMethod,
    level: u32,
    k_int: usize,
    k_test: usize,
    q: usize,
    test_refines: u32,
) -> Result<(Vec<LsRow>, Vec<Option<f64>>, std::sync::Arc<crate::mesh::LagrangeSpace>)> {
    match problem.family {
        Family::Elliptic(_) | Family::Convection { .. } => {}
        _ => {
            return Err(Error::config(
                "the least-squares oracle needs residuals affine in the trial coefficients",
            ))
        }
    }
    let spaces = build_spaces(problem, level, k_int, k_test, q, test_refines)?;
    let system = assemble_vpinn(problem, &spaces, method)?;
    let trial = spaces.trial.clone();
    let mut rows: Vec<LsRow> = system
        .a_rows
        .iter()
        .zip(&system.f_vec)
        .map(|(r, &f)| (r.clone(), f))
        .collect();
    let mut fixed = vec![None; system.n_trial];
    match *method {
        BcMethod::Penalty { lambda } => {
            let s = lambda.sqrt();
            for (j, &on_bdry) in trial.boundary_dof_mask.iter().enumerate() {
                if on_bdry {
                    let g = dirichlet_value(&problem.boundary, trial.dof_points[j])?;
                    rows.push((vec![(j, s)], s * g));
                }
            }
        }
        BcMethod::ExactNormalized { .. } | BcMethod::ExactProduct => {
            for (j, &on_bdry) in trial.boundary_dof_mask.iter().enumerate() {
                if on_bdry {
                    fixed[j] = Some(dirichlet_value(&problem.boundary, trial.dof_points[j])?);
                }
            }
        }
        BcMethod::Nitsche { .. } => {}
    }
    Ok((rows, fixed, trial))
}

/// Exact minimizer of the variational loss over the free nodal values.
/// Exact-BC methods pin the boundary nodes to the Dirichlet data; the penalty
/// method appends weighted misfit rows; Nitsche keeps every node free.
pub fn least_squares_oracle(
    problem: &ProblemSpec,
    method: &BcMethod,
    level: u32,
    k_int: usize,
    k_test: usize,
    q: usize,
    test_refines: u32,
) -> Result<OracleSolution> {
    method.validate()?;
    let (rows, fixed, trial) =
        oracle_rows(problem, method, level, k_int, k_test, q, test_refines)?;
    let c = solve_least_squares(&rows, trial.dim(), &fixed)?;
    let residual_norm = residual_norm_at(&rows, &c);
    let trial = TrialFunction::new(trial, c)?;
    let h1 = problem
        .exact_value_grad()
        .map(|u| h1_error(&trial, u));
    Ok(OracleSolution {
        trial,
        residual_norm,
        h1_error: h1,
    })
}
