//! Small dense semidefinite programs in standard form:
//!
//! ```text
//! minimize    tr(C U)
//! subject to  tr(A_k U) = b_k,   k = 1..m
//!             U symmetric positive semidefinite
//! ```
//!
//! Solved by an infeasible-start primal-dual path-following method with the
//! HKM (symmetrized `X ΔZ Z⁻¹`) direction and a Mehrotra predictor-corrector.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, parse_err, Error, Result};

/// Corrected steps shorter than this trigger a centering retry.
const SHORT_STEP: f64 = 0.3;
/// Centering weight of the retry direction.
const CENTERING_SIGMA: f64 = 0.5;
/// Minimum `λ_min(XZ) / μ` accepted after a step.
const NEIGHBORHOOD: f64 = 1e-2;
const BACKTRACK: f64 = 0.8;
const STEP_TO_BOUNDARY: f64 = 0.98;
const SCHUR_SHIFT: f64 = 1e-10;
const DIVERGENCE: f64 = 1e12;
const EIGEN_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SdpConstraint {
    pub a: DMatrix<f64>,
    pub b: f64,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    dim: usize,
    objective: DMatrix<f64>,
    constraints: Vec<SdpConstraint>,
    // Nonzeros of each A_k, both triangles listed.
    sparse: Vec<Vec<(usize, usize, f64)>>,
}

fn check_symmetric(name: &str, m: &DMatrix<f64>) -> Result<()> {
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::NotSymmetric(name.to_owned()));
            }
        }
    }
    Ok(())
}

impl SdpProblem {
    pub fn new(objective: DMatrix<f64>, constraints: Vec<SdpConstraint>) -> Result<Self> {
        let dim = objective.nrows();
        if dim == 0 || objective.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "objective is {}x{}",
                objective.nrows(),
                objective.ncols()
            )));
        }
        if constraints.is_empty() {
            return Err(invalid("at least one constraint is required"));
        }
        check_symmetric("C", &objective)?;
        for (k, c) in constraints.iter().enumerate() {
            if c.a.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch(format!(
                    "A_{k} is {}x{}, expected {dim}x{dim}",
                    c.a.nrows(),
                    c.a.ncols()
                )));
            }
            check_symmetric(&format!("A_{k}"), &c.a)?;
            if !c.b.is_finite() {
                return Err(invalid(format!("b_{k} is not finite")));
            }
        }
        let sparse = constraints
            .iter()
            .map(|c| {
                let mut nz = Vec::new();
                for j in 0..dim {
                    for i in 0..dim {
                        let v = c.a[(i, j)];
                        if v != 0.0 {
                            nz.push((i, j, v));
                        }
                    }
                }
                nz
            })
            .collect();
        Ok(Self {
            dim,
            objective,
            constraints,
            sparse,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objective(&self) -> &DMatrix<f64> {
        &self.objective
    }

    pub fn constraints(&self) -> &[SdpConstraint] {
        &self.constraints
    }

    /// Multiplies the objective by `alpha`.
    pub fn scale_objective(&self, alpha: f64) -> Self {
        let mut p = self.clone();
        p.objective *= alpha;
        p
    }

    /// `[tr(A_k W)]_k` for any square `W`.
    fn apply(&self, w: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.sparse.len(),
            self.sparse
                .iter()
                .map(|nz| nz.iter().map(|&(i, j, v)| v * w[(j, i)]).sum()),
        )
    }

    /// `sum_k y_k A_k`.
    fn adjoint(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (nz, &yk) in self.sparse.iter().zip(y.iter()) {
            if yk == 0.0 {
                continue;
            }
            for &(i, j, v) in nz {
                out[(i, j)] += yk * v;
            }
        }
        out
    }

    fn rhs(&self) -> DVector<f64> {
        DVector::from_iterator(self.constraints.len(), self.constraints.iter().map(|c| c.b))
    }

    /// Text dump: `dim`, then `C` row-major, then each `A_k` row-major followed by `b_k`.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        let write_matrix = |out: &mut String, m: &DMatrix<f64>| {
            for row in m.row_iter() {
                let vals: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
                writeln!(out, "{}", vals.join(" ")).unwrap();
            }
        };
        writeln!(out, "{}", self.dim).unwrap();
        write_matrix(&mut out, &self.objective);
        for c in &self.constraints {
            write_matrix(&mut out, &c.a);
            writeln!(out, "{:?}", c.b).unwrap();
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (l0, first) = lines.next().ok_or_else(|| parse_err(0, "empty dump"))?;
        let dim: usize = first
            .parse()
            .map_err(|_| parse_err(l0, format!("bad dimension `{first}`")))?;
        let numbers = |(ln, line): (usize, &str)| -> Result<Vec<f64>> {
            line.split_whitespace()
                .map(|x| {
                    x.parse::<f64>()
                        .map_err(|_| parse_err(ln, format!("bad number `{x}`")))
                })
                .collect()
        };
        let rest: Vec<(usize, Vec<f64>)> = lines
            .map(|item| numbers(item).map(|v| (item.0, v)))
            .collect::<Result<_>>()?;
        let read_matrix = |rows: &[(usize, Vec<f64>)]| -> Result<DMatrix<f64>> {
            let mut data = Vec::with_capacity(dim * dim);
            for (ln, row) in rows {
                if row.len() != dim {
                    return Err(parse_err(
                        *ln,
                        format!("expected {dim} entries, found {}", row.len()),
                    ));
                }
                data.extend_from_slice(row);
            }
            Ok(DMatrix::from_row_slice(dim, dim, &data))
        };
        if rest.len() < dim || !(rest.len() - dim).is_multiple_of(dim + 1) {
            return Err(parse_err(
                0,
                "dump does not split into C and (A_k, b_k) groups",
            ));
        }
        let objective = read_matrix(&rest[..dim])?;
        let constraints = rest[dim..]
            .chunks(dim + 1)
            .map(|chunk| {
                let a = read_matrix(&chunk[..dim])?;
                let (ln, bl) = &chunk[dim];
                match bl.as_slice() {
                    [b] => Ok(SdpConstraint { a, b: *b }),
                    _ => Err(parse_err(*ln, "expected a single right-hand side")),
                }
            })
            .collect::<Result<_>>()?;
        Self::new(objective, constraints)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub eig_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            gap_tol: 1e-6,
            eig_tol: 1e-8,
            max_iterations: 100,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("feas_tol", self.feas_tol),
            ("gap_tol", self.gap_tol),
            ("eig_tol", self.eig_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive")));
            }
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Primal matrix.
    pub u: DMatrix<f64>,
    /// Dual multipliers, one per constraint.
    pub y: DVector<f64>,
    /// Dual slack `C - sum y_k A_k`.
    pub slack: DMatrix<f64>,
    pub status: SdpStatus,
    /// `max_k |tr(A_k U) - b_k|`.
    pub primal_residual: f64,
    /// `max |C - sum y_k A_k - Z|`.
    pub dual_residual: f64,
    /// `max(tr(U Z), |tr(C U) - bᵀy|)`.
    pub duality_gap: f64,
    pub objective: f64,
    pub iterations: usize,
    /// Explanation attached to an infeasible status.
    pub certificate: Option<String>,
}

struct Iterate {
    x: DMatrix<f64>,
    y: DVector<f64>,
    z: DMatrix<f64>,
}

struct Direction {
    dx: DMatrix<f64>,
    dy: DVector<f64>,
    dz: DMatrix<f64>,
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigen decomposition of the symmetric part, `None` if the QR sweeps do not converge.
pub(crate) fn sym_eigen(m: &DMatrix<f64>) -> Option<SymmetricEigen<f64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(sym(m), f64::EPSILON, EIGEN_MAX_SWEEPS)
}

fn eigenvalues(m: &DMatrix<f64>) -> Option<DVector<f64>> {
    sym_eigen(m).map(|e| e.eigenvalues)
}

/// `λ_min(Lᵀ Z L) / μ` with `X = L Lᵀ`; `None` when `X` is not positive definite.
fn centrality(x: &DMatrix<f64>, z: &DMatrix<f64>) -> Option<f64> {
    let l = x.clone().cholesky()?.l();
    let w = l.transpose() * z * &l;
    let mu = w.trace() / x.nrows() as f64;
    if !(mu > 0.0) {
        return None;
    }
    Some(eigenvalues(&w)?.min() / mu)
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

/// Largest `alpha` with `X + alpha dX` PSD (infinite if `dX` is PSD).
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let Some(chol) = x.clone().cholesky() else {
        return 0.0;
    };
    let l = chol.l();
    let Some(left) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(s) = l.solve_lower_triangular(&left.transpose()) else {
        return 0.0;
    };
    let Some(lambda_min) = eigenvalues(&s).map(|e| e.min()) else {
        return 0.0;
    };
    if lambda_min >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lambda_min
    }
}

/// Looks for `y` with `sum y_k A_k = 0` but `bᵀy != 0`.
fn linear_inconsistency(p: &SdpProblem) -> Option<String> {
    let m = p.constraints.len();
    let gram = DMatrix::from_fn(m, m, |k, l| inner(&p.constraints[k].a, &p.constraints[l].a));
    let eig = sym_eigen(&gram)?;
    let top = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let b = p.rhs();
    let bscale = b.amax().max(1.0);
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > 1e-12 * top {
            continue;
        }
        let v = eig.eigenvectors.column(idx);
        let by = b.dot(&v);
        if by.abs() > 1e-9 * bscale {
            let coeffs: Vec<String> = v.iter().map(|c| format!("{c:.6}")).collect();
            return Some(format!(
                "y = [{}] annihilates every A_k but bᵀy = {by:.3e}",
                coeffs.join(", ")
            ));
        }
    }
    None
}

struct SchurFactor {
    matrix: DMatrix<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl SchurFactor {
    /// Cholesky solve with two rounds of iterative refinement.
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = self.chol.solve(rhs);
        for _ in 0..2 {
            let r = rhs - &self.matrix * &x;
            x += self.chol.solve(&r);
        }
        x
    }
}

struct Solver<'a> {
    p: &'a SdpProblem,
    b: DVector<f64>,
}

impl Solver<'_> {
    fn schur(&self, it: &Iterate, zinv: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.p.constraints.len();
        let mut schur = DMatrix::zeros(m, m);
        for l in 0..m {
            let t = &it.x * &self.p.constraints[l].a * zinv;
            for k in 0..m {
                schur[(k, l)] = self.p.sparse[k]
                    .iter()
                    .map(|&(i, j, v)| v * t[(j, i)])
                    .sum();
            }
        }
        sym(&schur)
    }

    /// Factors the Schur matrix, shifting the diagonal only if it is numerically singular.
    fn factor(schur: &DMatrix<f64>) -> Option<SchurFactor> {
        if let Some(ch) = schur.clone().cholesky() {
            return Some(SchurFactor {
                matrix: schur.clone(),
                chol: ch,
            });
        }
        let mut shifted = schur.clone();
        let shift = SCHUR_SHIFT * schur.diagonal().amax().max(1.0);
        for k in 0..shifted.nrows() {
            shifted[(k, k)] += shift;
        }
        shifted.clone().cholesky().map(|ch| SchurFactor {
            matrix: shifted,
            chol: ch,
        })
    }

    /// Solves the HKM system with complementarity target `h = (sigma mu I - corr) Z⁻¹`.
    fn direction(
        &self,
        it: &Iterate,
        zinv: &DMatrix<f64>,
        schur: &SchurFactor,
        rd: &DMatrix<f64>,
        h: &DMatrix<f64>,
    ) -> Direction {
        let rhs = &self.b - self.p.apply(h) + self.p.apply(&(&it.x * rd * zinv));
        let dy = schur.solve(&rhs);
        let dz = rd - self.p.adjoint(&dy);
        let dx = sym(&(h - &it.x * &dz * zinv)) - &it.x;
        Direction { dx, dy, dz }
    }
}

pub fn solve_sdp(problem: &SdpProblem, settings: &SolverSettings) -> Result<SdpSolution> {
    settings.validate()?;
    let n = problem.dim;
    let c = &problem.objective;
    let b = problem.rhs();

    let xi = b.amax().max(1.0);
    let eta = c.amax().max(1.0);
    let mut it = Iterate {
        x: DMatrix::identity(n, n) * xi,
        y: DVector::zeros(b.len()),
        z: DMatrix::identity(n, n) * eta,
    };

    if let Some(cert) = linear_inconsistency(problem) {
        return Ok(finish(problem, it, SdpStatus::Infeasible, 0, Some(cert)));
    }

    let solver = Solver {
        p: problem,
        b: b.clone(),
    };
    let mut stalled = 0;
    for iter in 0..=settings.max_iterations {
        let rp = &b - problem.apply(&it.x);
        let rd = c - &it.z - problem.adjoint(&it.y);
        let xz = inner(&it.x, &it.z);
        let pobj = inner(c, &it.x);
        let dobj = b.dot(&it.y);
        let gap = xz.max((pobj - dobj).abs());
        if rp.amax() <= settings.feas_tol
            && rd.amax() <= settings.feas_tol
            && gap <= settings.gap_tol
        {
            return Ok(finish(problem, it, SdpStatus::Optimal, iter, None));
        }
        if iter == settings.max_iterations || stalled >= 5 {
            return Ok(finish(problem, it, SdpStatus::MaxIterations, iter, None));
        }
        if it.y.amax() > DIVERGENCE * eta {
            let cert = format!(
                "dual multipliers diverge (|y| = {:.3e}) while the primal residual stays at {:.3e}",
                it.y.amax(),
                rp.amax()
            );
            return Ok(finish(problem, it, SdpStatus::Infeasible, iter, Some(cert)));
        }
        if it.x.amax() > DIVERGENCE * xi {
            let cert = format!(
                "primal iterate diverges (|U| = {:.3e}); dual infeasible",
                it.x.amax()
            );
            return Ok(finish(problem, it, SdpStatus::Infeasible, iter, Some(cert)));
        }

        let mu = xz / n as f64;
        let Some(zinv) = it.z.clone().cholesky().map(|ch| ch.inverse()) else {
            return Ok(finish(problem, it, SdpStatus::MaxIterations, iter, None));
        };
        let Some(schur) = Solver::factor(&solver.schur(&it, &zinv)) else {
            return Ok(finish(problem, it, SdpStatus::MaxIterations, iter, None));
        };

        // Predictor.
        let zero = DMatrix::zeros(n, n);
        let aff = solver.direction(&it, &zinv, &schur, &rd, &zero);
        let ap = max_step(&it.x, &aff.dx).min(1.0);
        let ad = max_step(&it.z, &aff.dz).min(1.0);
        let mu_aff = inner(&(&it.x + &aff.dx * ap), &(&it.z + &aff.dz * ad)) / n as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let target = DMatrix::identity(n, n) * (sigma * mu) - &aff.dx * &aff.dz;
        let h = target * &zinv;
        let mut dir = solver.direction(&it, &zinv, &schur, &rd, &h);
        let mut ap = (STEP_TO_BOUNDARY * max_step(&it.x, &dir.dx)).min(1.0);
        let mut ad = (STEP_TO_BOUNDARY * max_step(&it.z, &dir.dz)).min(1.0);
        if ap.min(ad) < SHORT_STEP {
            // The second-order correction can push the iterate off the central
            // path; retry with a plain centering direction and keep the better one.
            let sigma_c = sigma.max(CENTERING_SIGMA);
            let h = DMatrix::identity(n, n) * (sigma_c * mu) * &zinv;
            let alt = solver.direction(&it, &zinv, &schur, &rd, &h);
            let bp = (STEP_TO_BOUNDARY * max_step(&it.x, &alt.dx)).min(1.0);
            let bd = (STEP_TO_BOUNDARY * max_step(&it.z, &alt.dz)).min(1.0);
            if bp.min(bd) > ap.min(ad) {
                dir = alt;
                ap = bp;
                ad = bd;
            }
        }
        // Backtrack until the new iterate stays in a wide neighborhood of the
        // central path; losing centrality stalls later iterations.
        let mut shrink = 1.0;
        while shrink > 1e-6 {
            let x_new = sym(&(&it.x + &dir.dx * (ap * shrink)));
            let z_new = sym(&(&it.z + &dir.dz * (ad * shrink)));
            if centrality(&x_new, &z_new).is_some_and(|c| c >= NEIGHBORHOOD) {
                break;
            }
            shrink *= BACKTRACK;
        }
        ap *= shrink;
        ad *= shrink;
        if ap < 1e-10 && ad < 1e-10 {
            stalled += 1;
        } else {
            stalled = 0;
        }

        it.x = sym(&(&it.x + &dir.dx * ap));
        it.y += &dir.dy * ad;
        it.z = sym(&(&it.z + &dir.dz * ad));
    }
    unreachable!("loop returns on the final iteration")
}

fn finish(
    p: &SdpProblem,
    it: Iterate,
    status: SdpStatus,
    iterations: usize,
    certificate: Option<String>,
) -> SdpSolution {
    let b = p.rhs();
    let rp = &b - p.apply(&it.x);
    let rd = &p.objective - &it.z - p.adjoint(&it.y);
    let objective = inner(&p.objective, &it.x);
    let gap = inner(&it.x, &it.z).max((objective - b.dot(&it.y)).abs());
    SdpSolution {
        primal_residual: rp.amax(),
        dual_residual: rd.amax(),
        duality_gap: gap,
        objective,
        iterations,
        status,
        certificate,
        u: it.x,
        y: it.y,
        slack: it.z,
    }
}

/// Independent recomputation of a candidate solution's quality.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// `tr(A_k U) - b_k` per constraint.
    pub residuals: Vec<f64>,
    pub max_abs_residual: f64,
    pub min_eigenvalue: f64,
    pub objective: f64,
}

pub fn check_solution(problem: &SdpProblem, u: &DMatrix<f64>) -> Result<ResidualReport> {
    if u.shape() != (problem.dim, problem.dim) {
        return Err(Error::DimensionMismatch(format!(
            "U is {}x{}, problem has dimension {}",
            u.nrows(),
            u.ncols(),
            problem.dim
        )));
    }
    let trace = |a: &DMatrix<f64>| (a * u).trace();
    let residuals: Vec<f64> = problem
        .constraints
        .iter()
        .map(|c| trace(&c.a) - c.b)
        .collect();
    let max_abs_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let min_eigenvalue = eigenvalues(u)
        .ok_or_else(|| invalid("eigenvalues of the candidate did not converge"))?
        .min();
    Ok(ResidualReport {
        residuals,
        max_abs_residual,
        min_eigenvalue,
        objective: trace(&problem.objective),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(dim: usize, i: usize, j: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(dim, dim);
        m[(i, j)] = 0.5;
        m[(j, i)] = 0.5;
        if i == j {
            m[(i, i)] = 1.0;
        }
        m
    }

    fn two_by_two() -> SdpProblem {
        let c = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        SdpProblem::new(
            c,
            vec![
                SdpConstraint {
                    a: unit(2, 0, 0),
                    b: 1.0,
                },
                SdpConstraint {
                    a: unit(2, 1, 1),
                    b: 1.0,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn unit_diagonal_max_correlation() {
        let sol = solve_sdp(&two_by_two(), &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.objective + 2.0).abs() < 1e-6);
        let want = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!((&sol.u - want).amax() < 1e-4);
        assert!(sol.primal_residual <= 1e-7 && sol.duality_gap <= 1e-6);
    }

    #[test]
    fn trivial_one_by_one() {
        let p = SdpProblem::new(
            DMatrix::zeros(1, 1),
            vec![SdpConstraint {
                a: unit(1, 0, 0),
                b: 1.0,
            }],
        )
        .unwrap();
        let sol = solve_sdp(&p, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(sol.objective.abs() < 1e-9);
        assert!((sol.u[(0, 0)] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn contradictory_equalities_are_infeasible() {
        let p = SdpProblem::new(
            DMatrix::zeros(1, 1),
            vec![
                SdpConstraint {
                    a: unit(1, 0, 0),
                    b: 1.0,
                },
                SdpConstraint {
                    a: unit(1, 0, 0),
                    b: 2.0,
                },
            ],
        )
        .unwrap();
        let sol = solve_sdp(&p, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
        assert!(sol.certificate.is_some());
    }

    #[test]
    fn psd_cone_infeasibility_is_detected() {
        // U_11 = -1 has no PSD solution even though the equalities are consistent.
        let p = SdpProblem::new(
            DMatrix::identity(2, 2),
            vec![SdpConstraint {
                a: unit(2, 0, 0),
                b: -1.0,
            }],
        )
        .unwrap();
        let sol = solve_sdp(&p, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible, "{sol:?}");
    }

    #[test]
    fn input_validation() {
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            SdpProblem::new(
                bad,
                vec![SdpConstraint {
                    a: unit(2, 0, 0),
                    b: 1.0
                }]
            ),
            Err(Error::NotSymmetric(_))
        ));
        assert!(matches!(
            SdpProblem::new(
                DMatrix::zeros(2, 2),
                vec![SdpConstraint {
                    a: unit(3, 0, 0),
                    b: 1.0
                }]
            ),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(SdpProblem::new(DMatrix::zeros(2, 2), vec![]).is_err());
        let s = SolverSettings {
            feas_tol: 0.0,
            ..Default::default()
        };
        assert!(solve_sdp(&two_by_two(), &s).is_err());
    }

    #[test]
    fn check_solution_reports_residuals() {
        let p = two_by_two();
        let u = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let r = check_solution(&p, &u).unwrap();
        assert!(r.max_abs_residual <= 1e-12);
        assert!((r.objective + 2.0).abs() < 1e-12);
        assert!(r.min_eigenvalue.abs() < 1e-12);

        let mut bumped = u.clone();
        bumped[(1, 1)] += 1e-3;
        let r = check_solution(&p, &bumped).unwrap();
        assert!(r.residuals[0].abs() < 1e-15);
        assert!((r.residuals[1] - 1e-3).abs() < 1e-15);

        let trace = SdpProblem::new(
            DMatrix::zeros(3, 3),
            vec![SdpConstraint {
                a: DMatrix::identity(3, 3),
                b: 3.0,
            }],
        )
        .unwrap();
        let r = check_solution(&trace, &DMatrix::identity(3, 3)).unwrap();
        assert_eq!(r.max_abs_residual, 0.0);
        assert!(check_solution(&trace, &DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn objective_scaling() {
        let p = two_by_two();
        let s = SolverSettings::default();
        let base = solve_sdp(&p, &s).unwrap();
        let scaled = solve_sdp(&p.scale_objective(4.0), &s).unwrap();
        assert!((scaled.objective - 4.0 * base.objective).abs() < 1e-5);
        assert!((&scaled.u - &base.u).amax() < 1e-4);
    }

    #[test]
    fn max_iterations_status() {
        let s = SolverSettings {
            max_iterations: 2,
            ..Default::default()
        };
        let sol = solve_sdp(&two_by_two(), &s).unwrap();
        assert_eq!(sol.status, SdpStatus::MaxIterations);
        assert_eq!(sol.iterations, 2);
    }

    #[test]
    fn dump_round_trip() {
        let p = two_by_two();
        let text = p.to_dump();
        let q = SdpProblem::from_dump(&text).unwrap();
        assert_eq!(q.objective(), p.objective());
        assert_eq!(q.constraints(), p.constraints());
        assert!(SdpProblem::from_dump("2\n0 1\n1 0\n1 0\n").is_err());
    }
}
