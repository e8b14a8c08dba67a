//! Brute-force reference for 2x2 instances, independent of the solvers.
//!
//! A Hermitian `a = [[u, v + iw], [v - iw, s]]` is searched on a uniform grid
//! over the box that must contain the optimum, then refined by a pattern
//! search. The refinement minimises `||b + t(b) I||_p` over unconstrained `b`,
//! where `t(b) = max(0, max_n lambda_max(x_n - b))` is the smallest feasible
//! shift; on feasible points this is the objective itself.

use rand::Rng;

use crate::error::{Error, Result};
use crate::opcore::{Exponent, Operator};
use crate::random::rng_from_seed;
use crate::vvnorms::OperatorSequence;

const GRID_POINTS: usize = 17;
const SEEDS: usize = 6;

#[derive(Clone, Copy, Debug)]
struct Herm2 {
    u: f64,
    s: f64,
    v: f64,
    w: f64,
}

impl Herm2 {
    fn from_params(x: [f64; 4]) -> Self {
        Herm2 { u: x[0], s: x[1], v: x[2], w: x[3] }
    }

    fn params(self) -> [f64; 4] {
        [self.u, self.s, self.v, self.w]
    }

    fn eig(self) -> (f64, f64) {
        let mid = 0.5 * (self.u + self.s);
        let half = 0.5 * (self.u - self.s);
        let r = (half * half + self.v * self.v + self.w * self.w).sqrt();
        (mid - r, mid + r)
    }

    fn sub(self, o: Herm2) -> Herm2 {
        Herm2 { u: self.u - o.u, s: self.s - o.s, v: self.v - o.v, w: self.w - o.w }
    }

    fn shifted(self, t: f64) -> Herm2 {
        Herm2 { u: self.u + t, s: self.s + t, ..self }
    }
}

fn norm_of(eig: (f64, f64), p: Exponent) -> f64 {
    let (a, b) = (eig.0.abs(), eig.1.abs());
    match p {
        Exponent::Infinity => a.max(b),
        Exponent::Finite(p) => (a.powf(p) + b.powf(p)).powf(1.0 / p),
    }
}

struct Instance {
    items: Vec<Herm2>,
    p: Exponent,
}

impl Instance {
    fn min_slack(&self, a: Herm2) -> f64 {
        self.items.iter().map(|x| a.sub(*x).eig().0).fold(f64::INFINITY, f64::min)
    }

    /// Objective after the minimal feasibility shift.
    fn restored(&self, b: Herm2) -> f64 {
        let t = (-self.min_slack(b)).max(0.0);
        norm_of(b.shifted(t).eig(), self.p)
    }
}

/// Grid search plus pattern-search refinement for `dim = 2`, `len <= 3`.
/// Returns the best feasible value found; `resolution` is the final step of
/// the refinement.
pub fn brute_force_oracle(seq: &OperatorSequence, p: Exponent, resolution: f64) -> Result<f64> {
    if seq.dim() != 2 {
        return Err(Error::InvalidArgument(format!("oracle supports dim 2 only, got {}", seq.dim())));
    }
    if seq.len() > 3 {
        return Err(Error::InvalidArgument(format!("oracle supports length <= 3, got {}", seq.len())));
    }
    if !(resolution > 0.0) {
        return Err(Error::InvalidArgument("oracle resolution must be > 0".into()));
    }
    let items: Vec<Herm2> = seq
        .items()
        .iter()
        .map(|x| {
            let m = x.matrix();
            Herm2 { u: m[(0, 0)].re, s: m[(1, 1)].re, v: m[(0, 1)].re, w: m[(0, 1)].im }
        })
        .collect();
    let total = items.iter().fold(Herm2 { u: 0.0, s: 0.0, v: 0.0, w: 0.0 }, |acc, x| Herm2 {
        u: acc.u + x.u,
        s: acc.s + x.s,
        v: acc.v + x.v,
        w: acc.w + x.w,
    });
    let inst = Instance { items, p };
    // sum x_n is feasible, so the optimum a satisfies ||a||_inf <= ||a||_p <= r
    let r = norm_of(total.eig(), p);
    if r == 0.0 {
        return Ok(0.0);
    }

    // grid over diagonal in [0, r] and off-diagonal in [-r/2, r/2]
    let g = GRID_POINTS;
    let diag_step = r / (g - 1) as f64;
    let off_step = r / (g - 1) as f64;
    let mut seeds: Vec<(f64, Herm2)> = vec![(r, total)];
    for iu in 0..g {
        for is in 0..g {
            for iv in 0..g {
                for iw in 0..g {
                    let a = Herm2 {
                        u: iu as f64 * diag_step,
                        s: is as f64 * diag_step,
                        v: -0.5 * r + iv as f64 * off_step,
                        w: -0.5 * r + iw as f64 * off_step,
                    };
                    if inst.min_slack(a) < 0.0 {
                        continue;
                    }
                    let val = norm_of(a.eig(), p);
                    if seeds.len() < SEEDS || val < seeds[seeds.len() - 1].0 {
                        seeds.push((val, a));
                        seeds.sort_by(|x, y| x.0.total_cmp(&y.0));
                        seeds.truncate(SEEDS);
                    }
                }
            }
        }
    }

    let directions = poll_directions();
    let mut rng = rng_from_seed(0x0bac1e);
    let mut best = seeds[0].0;
    for &(_, seed) in &seeds {
        let mut x = seed.params();
        let mut fx = inst.restored(seed);
        let mut h = diag_step.max(off_step);
        while h >= 0.1 * resolution {
            let mut improved = false;
            let random_dirs: Vec<[f64; 4]> = (0..16)
                .map(|_| {
                    let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
                    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-12);
                    v.map(|c| c / n)
                })
                .collect();
            for dir in directions.iter().chain(&random_dirs) {
                let cand: [f64; 4] = std::array::from_fn(|k| x[k] + h * dir[k]);
                let fc = inst.restored(Herm2::from_params(cand));
                if fc < fx {
                    x = cand;
                    fx = fc;
                    improved = true;
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        best = best.min(fx);
    }
    Ok(best)
}

/// Coordinate directions and their pairwise combinations.
fn poll_directions() -> Vec<[f64; 4]> {
    let mut dirs = Vec::new();
    for k in 0..4 {
        for sign in [-1.0, 1.0] {
            let mut d = [0.0; 4];
            d[k] = sign;
            dirs.push(d);
        }
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..4 {
        for j in i + 1..4 {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut d = [0.0; 4];
                d[i] = si * r;
                d[j] = sj * r;
                dirs.push(d);
            }
        }
    }
    dirs
}
