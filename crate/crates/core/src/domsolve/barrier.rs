//! Log-barrier interior-point method for `min tr(a^p)/p` s.t. `a > x_n`.
//!
//! Centering minimises `t tr(a^p)/p - sum_n log det(a - x_n)` by damped Newton
//! steps in an orthonormal real basis of the Hermitian matrices. At a centre,
//! `Lambda_n = (a - x_n)^{-1} / t` satisfies `a^{p-1} = sum Lambda_n` and gives a
//! dual certificate whose gap is `N d / (t ||a||_p^{p-1})`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{RawSolution, SolverConfig};
use crate::error::{Error, Result};
use crate::opcore::{lp_of, CMatrix, Exponent, HermitianOperator, Operator, C64};
use crate::vvnorms::OperatorSequence;

const T_GROWTH: f64 = 8.0;
const T_MAX: f64 = 1e15;
const NEWTON_TOL: f64 = 1e-14;
const QUADRATIC_REGION: f64 = 0.05;
const MAX_CENTRING: usize = 60;
const ARMIJO: f64 = 0.25;

/// Orthonormal basis of `d x d` Hermitian matrices for `Re tr(A B)`.
pub(crate) fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(d * d);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        let mut e = CMatrix::zeros(d, d);
        e[(i, i)] = C64::new(1.0, 0.0);
        basis.push(e);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut e = CMatrix::zeros(d, d);
            e[(i, j)] = C64::new(r, 0.0);
            e[(j, i)] = C64::new(r, 0.0);
            basis.push(e);
            let mut e = CMatrix::zeros(d, d);
            e[(i, j)] = C64::new(0.0, r);
            e[(j, i)] = C64::new(0.0, -r);
            basis.push(e);
        }
    }
    basis
}

fn re_trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a.nrows();
    let mut acc = 0.0;
    for i in 0..d {
        for k in 0..d {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// Nonzero entries `(row, col, value)` of a basis element.
type SparseBasis = Vec<Vec<(usize, usize, C64)>>;

fn sparse_basis(basis: &[CMatrix]) -> SparseBasis {
    basis
        .iter()
        .map(|e| {
            let d = e.nrows();
            (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .filter(|&(i, j)| e[(i, j)] != C64::new(0.0, 0.0))
                .map(|(i, j)| (i, j, e[(i, j)]))
                .collect()
        })
        .collect()
}

/// `Re tr(E x)` for a sparse `E`.
fn sparse_trace(e: &[(usize, usize, C64)], x: &CMatrix) -> f64 {
    e.iter().map(|&(i, j, v)| (v * x[(j, i)]).re).sum()
}

/// `Re tr(E_k x E_l x)` for sparse `E_k`, `E_l`.
fn sparse_sandwich(ek: &[(usize, usize, C64)], el: &[(usize, usize, C64)], x: &CMatrix) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for &(a, b, u) in ek {
        for &(c, e, v) in el {
            acc += u * v * x[(b, c)] * x[(e, a)];
        }
    }
    acc.re
}

struct Problem<'a> {
    constraints: &'a [HermitianOperator],
    p: f64,
    floor: f64,
    basis: Vec<CMatrix>,
    sparse: SparseBasis,
}

/// Slacks `a - x_n` with their inverses and log-determinants; `None` when some
/// slack is not positive definite.
struct Slacks {
    inverses: Vec<CMatrix>,
    log_det: f64,
}

impl Problem<'_> {
    fn slacks(&self, a: &CMatrix) -> Option<Slacks> {
        let mut inverses = Vec::with_capacity(self.constraints.len());
        let log_det = self.factor_slacks(a, |chol| inverses.push(chol.inverse()))?;
        Some(Slacks { inverses, log_det })
    }

    /// Sum of slack log-determinants, handing each factorisation to `each`.
    fn factor_slacks(&self, a: &CMatrix, mut each: impl FnMut(Cholesky<C64, Dyn>)) -> Option<f64> {
        let mut log_det = 0.0;
        for x in self.constraints {
            let chol = Cholesky::new(a - x.matrix())?;
            let l = chol.l_dirty();
            for i in 0..l.nrows() {
                let diag = l[(i, i)].re;
                if !(diag > 0.0) || !diag.is_finite() {
                    return None;
                }
                log_det += 2.0 * diag.ln();
            }
            each(chol);
        }
        Some(log_det)
    }

    /// `tr(a^p) / p` (or `tr(a)` at `p = 1`).
    fn objective(&self, eig: &[f64]) -> f64 {
        if self.p == 1.0 {
            eig.iter().sum()
        } else {
            eig.iter().map(|l| l.max(0.0).powf(self.p)).sum::<f64>() / self.p
        }
    }

    fn barrier_value(&self, a: &CMatrix, t: f64) -> Option<(f64, Slacks)> {
        let slacks = self.slacks(a)?;
        let value = self.value_given(a, t, slacks.log_det)?;
        Some((value, slacks))
    }

    fn value_given(&self, a: &CMatrix, t: f64, log_det: f64) -> Option<f64> {
        let h = HermitianOperator::new(a.clone()).ok()?;
        let eig = h.eigenvalues().ok()?;
        Some(t * self.objective(&eig) - log_det)
    }

    /// Barrier value at a line-search candidate without forming inverses;
    /// `None` when infeasible. With `feasibility_only` the value is not computed.
    fn trial_value(&self, a: &CMatrix, t: f64, feasibility_only: bool) -> Option<f64> {
        let log_det = self.factor_slacks(a, |_| ())?;
        if feasibility_only {
            return Some(f64::NAN);
        }
        self.value_given(a, t, log_det)
    }

    /// Gradient and Hessian of the barrier function in basis coordinates.
    fn derivatives(&self, a: &CMatrix, slacks: &Slacks, t: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let m = self.basis.len();
        let h = HermitianOperator::new(a.clone())?;
        let eig = h.eigen()?;
        let d = eig.dim();
        let u = &eig.eigenvectors;
        let lam: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(self.floor)).collect();
        let p = self.p;
        let f = |l: f64| if p == 1.0 { 1.0 } else { l.powf(p - 1.0) };
        let df = |l: f64| if p == 1.0 { 0.0 } else { (p - 1.0) * l.powf(p - 2.0) };

        // Daleckii-Krein divided differences of t -> t^{p-1}
        let mut gamma = DMatrix::<f64>::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let (li, lj) = (lam[i], lam[j]);
                gamma[(i, j)] = if (li - lj).abs() > 1e-10 * li.max(lj) {
                    (f(li) - f(lj)) / (li - lj)
                } else {
                    df(0.5 * (li + lj))
                };
            }
        }

        let mut grad_mat = u.clone();
        for j in 0..d {
            let fj = f(lam[j]);
            for i in 0..d {
                grad_mat[(i, j)] *= fj;
            }
        }
        let mut grad_mat = (grad_mat * u.adjoint()) * C64::new(t, 0.0);
        for inv in &slacks.inverses {
            grad_mat -= inv;
        }

        // U^* E_k U from the sparse entries of E_k
        let rotated: Vec<CMatrix> = self
            .sparse
            .iter()
            .map(|e| {
                CMatrix::from_fn(d, d, |i, j| e.iter().map(|&(a, b, v)| u[(a, i)].conj() * v * u[(b, j)]).sum())
            })
            .collect();
        let mut grad = DVector::zeros(m);
        let mut hess = DMatrix::zeros(m, m);
        for k in 0..m {
            grad[k] = sparse_trace(&self.sparse[k], &grad_mat);
        }
        for l in 0..m {
            let mut dl = rotated[l].clone();
            for i in 0..d {
                for j in 0..d {
                    dl[(i, j)] *= gamma[(i, j)];
                }
            }
            for k in 0..=l {
                let mut v = t * re_trace_product(&rotated[k], &dl);
                for inv in &slacks.inverses {
                    v += sparse_sandwich(&self.sparse[k], &self.sparse[l], inv);
                }
                hess[(k, l)] = v;
                hess[(l, k)] = v;
            }
        }
        Ok((grad, hess))
    }

    fn direction(&self, coords: &DVector<f64>) -> CMatrix {
        let d = self.basis[0].nrows();
        let mut out = CMatrix::zeros(d, d);
        for (c, e) in coords.iter().zip(&self.basis) {
            out += e * C64::new(*c, 0.0);
        }
        out
    }
}

fn solve_newton(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let rhs = -grad;
    if let Some(ch) = Cholesky::new(hess.clone()) {
        return Some(ch.solve(&rhs));
    }
    // small diagonal lift for near-singular Hessians
    let lift = 1e-12 * hess.diagonal().amax().max(1.0);
    let lifted = hess + DMatrix::identity(hess.nrows(), hess.ncols()) * lift;
    if let Some(ch) = Cholesky::new(lifted.clone()) {
        return Some(ch.solve(&rhs));
    }
    lifted.lu().solve(&rhs)
}

/// Certificate quality at the current centre: `(primal, lower bound)`.
fn certificate_gap(problem: &Problem<'_>, a: &CMatrix, slacks: &Slacks) -> Result<(f64, f64)> {
    let p = Exponent::Finite(problem.p);
    let q = p.conjugate();
    let h = HermitianOperator::new(a.clone())?;
    let primal = lp_of(h.eigenvalues()?, p);
    let d = a.nrows();
    let total = slacks.inverses.iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m);
    let total = HermitianOperator::new(total)?;
    let norm = lp_of(total.eigenvalues()?, q);
    let mut pair = 0.0;
    for (x, inv) in problem.constraints.iter().zip(&slacks.inverses) {
        pair += re_trace_product(x.matrix(), inv);
    }
    Ok((primal, if norm > 0.0 { pair / norm } else { 0.0 }))
}

pub(crate) fn solve(seq: &OperatorSequence, p: f64, config: &SolverConfig) -> Result<RawSolution> {
    let d = seq.dim();
    let problem = Problem {
        constraints: seq.items(),
        p,
        floor: if p < 2.0 { config.epsilon_reg } else { 0.0 },
        basis: hermitian_basis(d),
        sparse: Vec::new(),
    };
    let problem = Problem { sparse: sparse_basis(&problem.basis), ..problem };
    // strictly feasible start: sum x_n + I (the family is normalised)
    let mut a = seq.sum().shift(1.0).into_matrix();
    let mut t = 1.0;
    let mut iterations = 0usize;
    let mut stopped = false;
    let mut last_slacks: Option<Slacks>;
    let mut best_primal = (f64::INFINITY, a.clone());
    let mut best_dual: (f64, Vec<CMatrix>) = (f64::NEG_INFINITY, Vec::new());
    let mut worse_rounds = 0usize;

    'outer: while iterations < config.max_iter {
        let mut centring_steps = 0usize;
        loop {
            if iterations >= config.max_iter {
                break 'outer;
            }
            let Some((value, slacks)) = problem.barrier_value(&a, t) else {
                return Err(Error::InvalidArgument("interior point left the feasible region".into()));
            };
            let (grad, hess) = problem.derivatives(&a, &slacks, t)?;
            let Some(step) = solve_newton(&hess, &grad) else {
                last_slacks = Some(slacks);
                break;
            };
            iterations += 1;
            let decrement = -grad.dot(&step);
            if !(decrement.is_finite()) || decrement <= NEWTON_TOL {
                last_slacks = Some(slacks);
                break;
            }
            let dir = problem.direction(&step);
            // inside the quadratic region full steps are taken and only
            // feasibility is enforced; barrier values are too large to compare
            let quadratic = decrement < QUADRATIC_REGION;
            let mut alpha = 1.0;
            let mut accepted = None;
            while alpha > 1e-14 {
                let cand = &a + &dir * C64::new(alpha, 0.0);
                if let Some(v) = problem.trial_value(&cand, t, quadratic) {
                    if quadratic || v <= value - ARMIJO * alpha * decrement {
                        accepted = Some(cand);
                        break;
                    }
                }
                alpha *= 0.5;
            }
            match accepted {
                Some(cand) => {
                    a = cand;
                    centring_steps += 1;
                    if decrement < NEWTON_TOL || centring_steps >= MAX_CENTRING {
                        last_slacks = problem.slacks(&a);
                        break;
                    }
                }
                None => {
                    last_slacks = problem.slacks(&a);
                    break;
                }
            }
        }

        let Some(slacks) = last_slacks.as_ref() else { break };
        let (primal, lower) = certificate_gap(&problem, &a, slacks)?;
        // primal and dual bounds are valid independently; keep the best of each
        if primal < best_primal.0 {
            best_primal = (primal, a.clone());
        }
        if lower >= best_dual.0 {
            best_dual = (lower, slacks.inverses.clone());
        }
        // drift well below the current gap is round-off, not degradation
        let margin = 0.1 * (best_primal.0 - best_dual.0) + 1e-12 * best_primal.0;
        if lower >= best_dual.0 - margin {
            worse_rounds = 0;
        } else {
            // centring accuracy is exhausted once the certificate degrades
            worse_rounds += 1;
        }
        // purely relative, hence scale-free
        let gap = best_primal.0 - best_dual.0;
        if gap <= 0.5 * config.tol * best_primal.0 {
            stopped = true;
            break;
        }
        if worse_rounds >= 2 || t >= T_MAX {
            stopped = gap <= config.tol * best_primal.0;
            break;
        }
        t *= T_GROWTH;
    }

    let (dominant, inverses) = if best_dual.1.is_empty() {
        let slacks = problem
            .slacks(&a)
            .ok_or_else(|| Error::InvalidArgument("interior point left the feasible region".into()))?;
        (a, slacks.inverses)
    } else {
        (best_primal.1, best_dual.1)
    };
    let multipliers = inverses.into_iter().map(HermitianOperator::new).collect::<Result<Vec<_>>>()?;
    Ok(RawSolution { dominant: HermitianOperator::new(dominant)?, multipliers, iterations, stopped })
}
