//! Joint demodulation and equalization.
//!
//! The nearest-neighbor criterion
//! `sum_n (z[n] - (r + P d)ᵀ Qᵀ B[n] Q (r + P d))²` is minimized either by
//! enumeration or through its semidefinite relaxation: the lifted matrix
//! `U = u uᵀ`, `u = [1, s_0..s_{N_b-1}, d_0..d_{N_b-1}]`, with the rank-one
//! requirement dropped, followed by rounding of the first-row `d` block.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::sdp::{solve_sdp, SdpConstraint, SdpProblem, SdpSolution, SdpStatus, SolverSettings};
use crate::system_model::VolterraModel;

/// Largest block the exhaustive decoder accepts.
pub const MAX_EXHAUSTIVE_SYMBOLS: usize = 20;

/// First-row entries this close to zero are treated as undecided.
const AMBIGUITY_TOL: f64 = 1e-6;

/// Per-symbol model output as a quadratic in `d`: `c + vᵀd + dᵀ G d`.
#[derive(Debug, Clone)]
pub struct SymbolForm {
    pub constant: f64,
    pub linear: DVector<f64>,
    pub quadratic: DMatrix<f64>,
}

impl SymbolForm {
    fn eval(&self, d: &[f64]) -> f64 {
        let mut acc = self.constant;
        for (j, &dj) in d.iter().enumerate() {
            let row: f64 = self
                .quadratic
                .row(j)
                .iter()
                .zip(d)
                .map(|(g, dk)| g * dk)
                .sum();
            acc += dj * (self.linear[j] + row);
        }
        acc
    }
}

/// Observed decision variables together with the model they are matched against.
#[derive(Debug, Clone)]
pub struct DecodingProblem<'a> {
    pub z: Vec<f64>,
    pub model: &'a VolterraModel,
    forms: Vec<SymbolForm>,
}

impl<'a> DecodingProblem<'a> {
    pub fn new(z: Vec<f64>, model: &'a VolterraModel) -> Result<Self> {
        let nb = model.config.n_symbols();
        if z.len() != nb || model.b.len() != nb {
            return Err(Error::DimensionMismatch(format!(
                "{} observations for a {nb}-symbol model",
                z.len()
            )));
        }
        let codes = &model.codes;
        let q = codes.q();
        let forms = model
            .b
            .iter()
            .map(|bn| {
                let m = &q * bn * &q;
                let mr = &m * &codes.r;
                let mtr = m.transpose() * &codes.r;
                SymbolForm {
                    constant: codes.r.dot(&mr),
                    linear: codes.p.transpose() * (mr + mtr),
                    quadratic: codes.p.transpose() * &m * &codes.p,
                }
            })
            .collect();
        Ok(Self { z, model, forms })
    }

    pub fn n_symbols(&self) -> usize {
        self.z.len()
    }

    pub fn forms(&self) -> &[SymbolForm] {
        &self.forms
    }

    /// Model residuals `s_n = z[n] - model_n(d)`.
    pub fn residuals(&self, d: &[i8]) -> Vec<f64> {
        let df: Vec<f64> = d.iter().map(|&v| f64::from(v)).collect();
        self.z
            .iter()
            .zip(&self.forms)
            .map(|(z, f)| z - f.eval(&df))
            .collect()
    }
}

/// Nearest-neighbor objective at `d`.
pub fn nn_objective(d: &[i8], prob: &DecodingProblem) -> f64 {
    assert_eq!(d.len(), prob.n_symbols());
    prob.residuals(d).iter().map(|s| s * s).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecodeMethod {
    Exhaustive,
    SdpSign,
    SdpRandomized,
}

impl DecodeMethod {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Exhaustive => "exhaustive",
            Self::SdpSign => "sdp_sign",
            Self::SdpRandomized => "sdp_randomized",
        }
    }
}

impl std::str::FromStr for DecodeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exhaustive" => Ok(Self::Exhaustive),
            "sdp_sign" => Ok(Self::SdpSign),
            "sdp_randomized" => Ok(Self::SdpRandomized),
            other => Err(Error::InvalidParameter(format!(
                "unknown decoder `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for DecodeMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpDiagnostics {
    pub status: SdpStatus,
    /// Relaxation optimum in the units of the nearest-neighbor objective.
    pub sdp_value: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    /// Bits whose first-row entry was within rounding ambiguity of zero.
    pub ambiguous_bits: usize,
}

impl SdpDiagnostics {
    pub fn degenerate(&self) -> bool {
        self.ambiguous_bits > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub d_hat: Vec<i8>,
    pub objective: f64,
    pub method: DecodeMethod,
    pub diagnostics: Option<SdpDiagnostics>,
}

fn candidate(index: u64, nb: usize, out: &mut [f64]) {
    for (j, v) in out.iter_mut().enumerate().take(nb) {
        *v = if index >> (nb - 1 - j) & 1 == 0 {
            1.0
        } else {
            -1.0
        };
    }
}

/// Global minimizer by enumeration; ties go to the lexicographically smallest
/// `d` with `+1 < -1`.
pub fn decode_exhaustive(prob: &DecodingProblem) -> Result<DecodeResult> {
    let nb = prob.n_symbols();
    if nb > MAX_EXHAUSTIVE_SYMBOLS {
        return Err(Error::BlockTooLarge(nb));
    }
    let mut d = vec![0.0; nb];
    let mut best = (f64::INFINITY, 0u64);
    for index in 0..1u64 << nb {
        candidate(index, nb, &mut d);
        let mut obj = 0.0;
        for (z, f) in prob.z.iter().zip(&prob.forms) {
            let s = z - f.eval(&d);
            obj += s * s;
            if obj >= best.0 {
                break;
            }
        }
        if obj < best.0 {
            best = (obj, index);
        }
    }
    candidate(best.1, nb, &mut d);
    let d_hat: Vec<i8> = d.iter().map(|&v| v as i8).collect();
    Ok(DecodeResult {
        objective: nn_objective(&d_hat, prob),
        d_hat,
        method: DecodeMethod::Exhaustive,
        diagnostics: None,
    })
}

/// The relaxed matrix program for one block.
#[derive(Debug, Clone)]
pub struct LiftedInstance {
    pub sdp: SdpProblem,
    /// `z[n] - rᵀQᵀB[n]Qr` per symbol, in original units.
    pub constants: Vec<f64>,
    /// Factor applied to `z` and every `B[n]` before lifting; objective values
    /// of the SDP are `scale²` times the nearest-neighbor objective.
    pub scale: f64,
    n_symbols: usize,
}

impl LiftedInstance {
    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn dim(&self) -> usize {
        2 * self.n_symbols + 1
    }

    /// Position of `s_n` in `u` (0-based; position 0 holds the constant 1).
    pub fn s_index(&self, n: usize) -> usize {
        1 + n
    }

    /// Position of `d_n` in `u`.
    pub fn d_index(&self, n: usize) -> usize {
        1 + self.n_symbols + n
    }

    /// `u = [1, s(d), d]` in the scaled units of the SDP.
    pub fn lift_vector(&self, d: &[i8], prob: &DecodingProblem) -> DVector<f64> {
        let mut u = DVector::zeros(self.dim());
        u[0] = 1.0;
        for (n, s) in prob.residuals(d).into_iter().enumerate() {
            u[self.s_index(n)] = self.scale * s;
            u[self.d_index(n)] = f64::from(d[n]);
        }
        u
    }

    /// Converts an SDP objective value to nearest-neighbor units.
    pub fn unscale(&self, value: f64) -> f64 {
        value / (self.scale * self.scale)
    }
}

pub fn lift_to_sdp(prob: &DecodingProblem) -> LiftedInstance {
    let nb = prob.n_symbols();
    let dim = 2 * nb + 1;
    let s_idx = |n: usize| 1 + n;
    let d_idx = |n: usize| 1 + nb + n;

    let magnitude = prob
        .forms
        .iter()
        .map(|f| {
            f.constant
                .abs()
                .max(f.linear.amax())
                .max(f.quadratic.amax())
        })
        .chain(prob.z.iter().map(|z| z.abs()))
        .fold(0.0f64, f64::max);
    let scale = if magnitude > 0.0 {
        1.0 / magnitude
    } else {
        1.0
    };

    let mut objective = DMatrix::zeros(dim, dim);
    for n in 0..nb {
        objective[(s_idx(n), s_idx(n))] = 1.0;
    }

    let mut constraints = Vec::with_capacity(dim);
    let mut e00 = DMatrix::zeros(dim, dim);
    e00[(0, 0)] = 1.0;
    constraints.push(SdpConstraint { a: e00, b: 1.0 });

    let mut constants = Vec::with_capacity(nb);
    for (n, (z, f)) in prob.z.iter().zip(&prob.forms).enumerate() {
        let mut a = DMatrix::zeros(dim, dim);
        a[(0, s_idx(n))] = 0.5;
        a[(s_idx(n), 0)] = 0.5;
        for j in 0..nb {
            let v = 0.5 * scale * f.linear[j];
            a[(0, d_idx(j))] = v;
            a[(d_idx(j), 0)] = v;
            for k in 0..nb {
                a[(d_idx(j), d_idx(k))] = 0.5 * scale * (f.quadratic[(j, k)] + f.quadratic[(k, j)]);
            }
        }
        let c = z - f.constant;
        constants.push(c);
        constraints.push(SdpConstraint { a, b: scale * c });
    }

    for n in 0..nb {
        let mut a = DMatrix::zeros(dim, dim);
        a[(d_idx(n), d_idx(n))] = 1.0;
        constraints.push(SdpConstraint { a, b: 1.0 });
    }

    LiftedInstance {
        sdp: SdpProblem::new(objective, constraints).expect("lifted instance is well formed"),
        constants,
        scale,
        n_symbols: nb,
    }
}

#[inline]
fn sign(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// `d_n = sign(U[0, d_index(n)])`, with `sign(0) = +1`.
pub fn round_sign(u: &DMatrix<f64>, inst: &LiftedInstance) -> Vec<i8> {
    (0..inst.n_symbols)
        .map(|n| sign(u[(0, inst.d_index(n))]))
        .collect()
}

/// Random-hyperplane refinement: factor `U ≈ V Vᵀ`, draw `trials` Gaussian
/// directions, sign the `d` rows relative to row 0, keep the best candidate
/// under the nearest-neighbor objective. The sign-rounded candidate always
/// competes and wins ties.
pub fn round_randomized<R: Rng + ?Sized>(
    u: &DMatrix<f64>,
    prob: &DecodingProblem,
    inst: &LiftedInstance,
    trials: usize,
    rng: &mut R,
) -> Vec<i8> {
    let mut best_d = round_sign(u, inst);
    let mut best = nn_objective(&best_d, prob);

    let Some(eig) = crate::sdp::sym_eigen(u) else {
        return best_d;
    };
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let factor = &eig.eigenvectors * DMatrix::from_diagonal(&roots);
    let dim = inst.dim();
    for _ in 0..trials {
        let r = DVector::from_fn(dim, |_, _| StandardNormal.sample(rng));
        let proj = &factor * r;
        let anchor = sign(proj[0]);
        let d: Vec<i8> = (0..inst.n_symbols)
            .map(|n| sign(proj[inst.d_index(n)]) * anchor)
            .collect();
        let obj = nn_objective(&d, prob);
        if obj < best {
            best = obj;
            best_d = d;
        }
    }
    best_d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Sign,
    Randomized { trials: usize, seed: u64 },
}

/// Lift, solve, round.
///
/// An infeasible relaxation is an error. A solve that stops at the iteration
/// limit still rounds its last iterate; the status is kept in the diagnostics.
pub fn decode_sdp(
    prob: &DecodingProblem,
    settings: &SolverSettings,
    rounding: Rounding,
) -> Result<DecodeResult> {
    let inst = lift_to_sdp(prob);
    let sol = solve_sdp(&inst.sdp, settings)?;
    decode_from_solution(prob, &inst, &sol, rounding)
}

/// Rounding half of [`decode_sdp`] for an already solved instance.
pub fn decode_from_solution(
    prob: &DecodingProblem,
    inst: &LiftedInstance,
    sol: &SdpSolution,
    rounding: Rounding,
) -> Result<DecodeResult> {
    if sol.status == SdpStatus::Infeasible {
        return Err(Error::Infeasible(
            sol.certificate
                .clone()
                .unwrap_or_else(|| "no certificate".into()),
        ));
    }
    let mut u = sol.u.clone();
    let mut ambiguous_bits = 0;
    for n in 0..inst.n_symbols {
        let j = inst.d_index(n);
        if u[(0, j)].abs() <= AMBIGUITY_TOL {
            u[(0, j)] = 0.0;
            u[(j, 0)] = 0.0;
            ambiguous_bits += 1;
        }
    }
    let (d_hat, method) = match rounding {
        Rounding::Sign => (round_sign(&u, inst), DecodeMethod::SdpSign),
        Rounding::Randomized { trials, seed } => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (
                round_randomized(&u, prob, inst, trials, &mut rng),
                DecodeMethod::SdpRandomized,
            )
        }
    };
    Ok(DecodeResult {
        objective: nn_objective(&d_hat, prob),
        d_hat,
        method,
        diagnostics: Some(SdpDiagnostics {
            status: sol.status,
            sdp_value: inst.unscale(sol.objective),
            primal_residual: sol.primal_residual,
            dual_residual: sol.dual_residual,
            duality_gap: sol.duality_gap,
            iterations: sol.iterations,
            ambiguous_bits,
        }),
    })
}
