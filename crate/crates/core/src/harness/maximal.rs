//! The maximal dominant `F`: at every grid point the minimal Schatten-`p`
//! dominant of the averages `(T_n |f|)(j)`, `n = 0..=n_max`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SolverStats;
use crate::avgops::{abs_grid, avg_apply, grid_lp_norm, DyadicLevel, GridFunction};
use crate::domsolve::{solve_dominant, DominantSolution, SolverConfig};
use crate::error::{Error, Result};
use crate::opcore::{Exponent, GeneralOperator, HermitianOperator};
use crate::vvnorms::OperatorSequence;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalSummary {
    pub f_norm: f64,
    pub dominant_norm: f64,
    pub ratio: f64,
    pub bound: f64,
    /// `min_{j,n} lambda_min(F(j) - (T_n |f|)(j))`.
    pub feasibility_min_eig: f64,
    pub all_converged: bool,
}

#[derive(Clone, Debug)]
pub struct MaximalResult {
    pub abs: GridFunction,
    /// `T_n |f|` for `n = 0..=n_max`.
    pub averages: Vec<GridFunction>,
    pub dominant: GridFunction,
    pub solutions: Vec<DominantSolution>,
    pub stats: SolverStats,
    pub summary: MaximalSummary,
}

/// `4^{1 + 2/p}`.
pub fn theorem_bound(p: f64) -> f64 {
    4f64.powf(1.0 + 2.0 / p)
}

/// Builds `F` for `2 <= p < inf`. Points are solved independently and in
/// parallel.
pub fn maximal_dominant(f: &GridFunction, p: Exponent, levels: u32, solver: &SolverConfig) -> Result<MaximalResult> {
    let pv = match p {
        Exponent::Finite(v) if v >= 2.0 => v,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "the maximal inequality is established for 2 <= p < inf; got p = {p}"
            )))
        }
    };
    let abs = abs_grid(f)?;
    let averages = (0..=levels)
        .map(|n| avg_apply(&abs, DyadicLevel::new(n)?))
        .collect::<Result<Vec<_>>>()?;
    let per_level: Vec<Vec<HermitianOperator>> =
        averages.iter().map(GridFunction::hermitian_values).collect::<Result<_>>()?;

    let l = f.grid_size();
    let solutions = (0..l)
        .into_par_iter()
        .map(|j| {
            let items = per_level.iter().map(|lv| lv[j].clone()).collect();
            solve_dominant(&OperatorSequence::positive(items)?, p, solver)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut stats = SolverStats::default();
    let mut min_eig = f64::INFINITY;
    for (j, sol) in solutions.iter().enumerate() {
        stats.record(sol);
        for lv in &per_level {
            min_eig = min_eig.min(sol.dominant.sub(&lv[j])?.min_eigenvalue()?);
        }
    }
    let dominant = GridFunction::new(solutions.iter().map(|s| GeneralOperator::from(&s.dominant)).collect())?;
    let f_norm = grid_lp_norm(f, p);
    let dominant_norm = grid_lp_norm(&dominant, p);
    let ratio = if f_norm > 0.0 { dominant_norm / f_norm } else { 0.0 };
    let summary = MaximalSummary {
        f_norm,
        dominant_norm,
        ratio,
        bound: theorem_bound(pv),
        feasibility_min_eig: min_eig,
        all_converged: stats.converged == stats.solves,
    };
    Ok(MaximalResult { abs, averages, dominant, solutions, stats, summary })
}
