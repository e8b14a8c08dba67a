//! Minimal Schatten-`p` dominants: `inf { ||a||_p : a >= x_n for all n }`.
//!
//! Every solver returns a [`DominantSolution`] carrying a feasible dominant
//! (upper bound) and a positive dual sequence `(y_n)` with
//! `||sum y_n||_q <= 1` whose pairing with the constraints is a lower bound:
//! for feasible `a`, `sum tr(x_n y_n) <= tr(a sum y_n) <= ||a||_p`.
//!
//! Solvers work on the normalised family `x_n / ||sum x_n||_inf` and scale
//! the result back.

mod barrier;
mod dykstra;
mod gradient;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcore::{lp_of, power_from_eigen, Exponent, HermitianOperator, Operator};
use crate::vvnorms::{l1_pos_norm, pairing, OperatorSequence};

pub use dykstra::{dykstra_project, DykstraProjection};
pub use oracle::brute_force_oracle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    Fixed,
    Backtracking,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedFormInf,
    DykstraP2,
    ProjectedGradient,
    InteriorPoint,
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Target for the certified gap, relative to `1 + value`.
    pub tol: f64,
    pub max_iter: usize,
    pub step_rule: StepRule,
    /// Spectral floor applied before `a^{p-1}` when `p < 2`.
    pub epsilon_reg: f64,
    pub method: Method,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 20_000,
            step_rule: StepRule::Backtracking,
            epsilon_reg: 1e-9,
            method: Method::Auto,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("solver tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("solver max_iter must be >= 1".into()));
        }
        if !(self.epsilon_reg >= 0.0) {
            return Err(Error::InvalidArgument("solver epsilon_reg must be >= 0".into()));
        }
        Ok(())
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DominantSolution {
    pub dominant: HermitianOperator,
    pub primal_value: f64,
    pub dual_sequence: OperatorSequence,
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl DominantSolution {
    pub fn relative_gap(&self) -> f64 {
        self.gap / (1.0 + self.primal_value)
    }
}

/// Dispatches on `config.method`; `Auto` picks the closed form for
/// `p = inf` and the interior-point solver otherwise.
pub fn solve_dominant(seq: &OperatorSequence, p: Exponent, config: &SolverConfig) -> Result<DominantSolution> {
    config.validate()?;
    match (config.method, p) {
        (_, Exponent::Infinity) => solve_dominant_inf(seq),
        (Method::ClosedFormInf, _) => Err(Error::InvalidArgument(
            "closed_form_inf only applies to p = inf".into(),
        )),
        (Method::DykstraP2, Exponent::Finite(pv)) if pv == 2.0 => solve_dominant_p2(seq, config),
        (Method::DykstraP2, _) => Err(Error::InvalidArgument("dykstra_p2 only applies to p = 2".into())),
        _ => solve_dominant_general(seq, p, config),
    }
}

/// Closed form at `p = inf`: `a = (max_n lambda_max(x_n)) I`.
pub fn solve_dominant_inf(seq: &OperatorSequence) -> Result<DominantSolution> {
    require_positive(seq)?;
    let d = seq.dim();
    let mut best = (0usize, f64::NEG_INFINITY);
    for (n, x) in seq.items().iter().enumerate() {
        let top = x.max_eigenvalue()?;
        if top > best.1 {
            best = (n, top);
        }
    }
    let value = best.1.max(0.0);
    let dominant = HermitianOperator::scalar_identity(d, value);
    let witness = item_witness(&seq.items()[best.0], Exponent::Infinity)?;
    let mut dual = vec![HermitianOperator::zeros(d); seq.len()];
    dual[best.0] = witness;
    let dual_sequence = OperatorSequence::positive(dual)?;
    let dual_value = pairing(seq, &dual_sequence)?;
    Ok(DominantSolution {
        dominant,
        primal_value: value,
        gap: value - dual_value,
        dual_sequence,
        dual_value,
        iterations: 0,
        converged: true,
    })
}

/// Frobenius projection of `a` onto `{m : m >= x}`: `x + clip_psd(a - x)`.
pub fn project_cone(a: &HermitianOperator, x: &HermitianOperator) -> Result<HermitianOperator> {
    let diff = a.sub(x)?;
    let eig = diff.eigen()?;
    if eig.eigenvalues[0] >= 0.0 {
        return Ok(a.clone());
    }
    x.add(&eig.apply(|l| l.max(0.0)))
}

/// Minimum Frobenius-norm dominant (`p = 2`) by Dykstra's cyclic projections.
pub fn solve_dominant_p2(seq: &OperatorSequence, config: &SolverConfig) -> Result<DominantSolution> {
    config.validate()?;
    require_positive(seq)?;
    normalised(seq, Exponent::Finite(2.0), |norm| dykstra::solve_p2(norm, config), config)
}

/// General `1 <= p < inf`: projected gradient when requested, otherwise the
/// interior-point solver.
pub fn solve_dominant_general(
    seq: &OperatorSequence,
    p: Exponent,
    config: &SolverConfig,
) -> Result<DominantSolution> {
    config.validate()?;
    require_positive(seq)?;
    let pv = match p {
        Exponent::Finite(pv) => pv,
        Exponent::Infinity => return solve_dominant_inf(seq),
    };
    match config.method {
        Method::ProjectedGradient => {
            normalised(seq, p, |norm| gradient::solve(norm, pv, config), config)
        }
        _ => normalised(seq, p, |norm| barrier::solve(norm, pv, config), config),
    }
}

fn require_positive(seq: &OperatorSequence) -> Result<()> {
    if seq.is_positive() {
        Ok(())
    } else {
        l1_pos_norm(seq, Exponent::one()).map(|_| ())
    }
}

/// Raw output of a solver on the normalised family.
pub(crate) struct RawSolution {
    pub dominant: HermitianOperator,
    /// Unnormalised positive multipliers, one per constraint.
    pub multipliers: Vec<HermitianOperator>,
    pub iterations: usize,
    /// The solver's own stopping rule was met.
    pub stopped: bool,
}

fn normalised(
    seq: &OperatorSequence,
    p: Exponent,
    solve: impl FnOnce(&OperatorSequence) -> Result<RawSolution>,
    config: &SolverConfig,
) -> Result<DominantSolution> {
    let scale = seq.sum().max_eigenvalue()?;
    if !(scale > 0.0) {
        return zero_solution(seq);
    }
    let norm = seq.scale(1.0 / scale)?;
    let raw = solve(&norm)?;
    let mut dominant = repair_feasibility(&raw.dominant.scale(scale), seq)?;
    // the sum is always feasible, so the result never exceeds its norm
    let total = seq.sum();
    if lp_of(total.eigenvalues()?, p) < lp_of(dominant.eigenvalues()?, p) {
        dominant = total;
    }
    certify(seq, p, dominant, raw.multipliers, raw.iterations, raw.stopped, config.tol)
}

fn zero_solution(seq: &OperatorSequence) -> Result<DominantSolution> {
    let d = seq.dim();
    Ok(DominantSolution {
        dominant: HermitianOperator::zeros(d),
        primal_value: 0.0,
        dual_sequence: OperatorSequence::positive(vec![HermitianOperator::zeros(d); seq.len()])?,
        dual_value: 0.0,
        gap: 0.0,
        iterations: 0,
        converged: true,
    })
}

/// Smallest `t >= 0` with `a + t I >= x_n` for all `n`.
pub fn feasibility_shift(a: &HermitianOperator, seq: &OperatorSequence) -> Result<f64> {
    let mut shift = 0.0_f64;
    for x in seq.items() {
        shift = shift.max(-a.sub(x)?.min_eigenvalue()?);
    }
    Ok(shift)
}

pub(crate) fn repair_feasibility(a: &HermitianOperator, seq: &OperatorSequence) -> Result<HermitianOperator> {
    let t = feasibility_shift(a, seq)?;
    if t > 0.0 {
        // a hair above the exact shift so the eigensolver sees a PSD slack
        Ok(a.shift(t * (1.0 + 1e-12) + f64::EPSILON * (1.0 + a.frobenius_norm())))
    } else {
        Ok(a.clone())
    }
}

/// `y = x^{p-1} / ||x^{p-1}||_q`, so that `tr(x y) = ||x||_p`.
/// At `p = 1` this is `I`; at `p = inf` the top eigenprojection.
pub(crate) fn item_witness(x: &HermitianOperator, p: Exponent) -> Result<HermitianOperator> {
    let d = x.dim();
    let eig = x.eigen()?;
    let w = match p {
        Exponent::Finite(pv) if pv == 1.0 => HermitianOperator::identity(d),
        Exponent::Finite(pv) => power_from_eigen(&eig, pv - 1.0)?,
        Exponent::Infinity => {
            let top = eig.eigenvalues[d - 1];
            eig.apply(|l| if l == top { 1.0 } else { 0.0 })
        }
    };
    let norm = lp_of(w.eigenvalues()?, p.conjugate());
    Ok(if norm > 0.0 { w.scale(1.0 / norm) } else { HermitianOperator::zeros(d) })
}

/// Normalises multipliers into the unit `q`-ball and keeps the better of the
/// solver certificate and the single-item witnesses.
pub(crate) fn certify(
    seq: &OperatorSequence,
    p: Exponent,
    dominant: HermitianOperator,
    multipliers: Vec<HermitianOperator>,
    iterations: usize,
    stopped: bool,
    tol: f64,
) -> Result<DominantSolution> {
    let q = p.conjugate();
    let d = seq.dim();
    let primal_value = lp_of(dominant.eigenvalues()?, p);

    let mut best: Option<(f64, OperatorSequence)> = None;
    let mut consider = |cand: OperatorSequence| -> Result<()> {
        let v = pairing(seq, &cand)?;
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, cand));
        }
        Ok(())
    };

    let clipped: Vec<HermitianOperator> = multipliers
        .iter()
        .map(|m| m.eigen().map(|e| e.apply(|l| l.max(0.0))))
        .collect::<Result<_>>()?;
    if clipped.len() == seq.len() {
        let total = clipped.iter().fold(HermitianOperator::zeros(d), |acc, m| acc.add(m).expect("dim"));
        let norm = lp_of(total.eigenvalues()?, q);
        if norm > 0.0 {
            consider(OperatorSequence::positive(clipped.iter().map(|m| m.scale(1.0 / norm)).collect())?)?;
        }
    }
    for (m, x) in seq.items().iter().enumerate() {
        let mut y = vec![HermitianOperator::zeros(d); seq.len()];
        y[m] = item_witness(x, p)?;
        consider(OperatorSequence::positive(y)?)?;
    }

    let (dual_value, dual_sequence) = best.expect("at least one witness");
    let gap = primal_value - dual_value;
    let converged = stopped && gap <= tol * (1.0 + primal_value);
    Ok(DominantSolution { dominant, primal_value, dual_sequence, dual_value, gap, iterations, converged })
}
