//! Matrix-valued functions on a periodic unit-spaced grid and the dyadic
//! averaging operators `T_n`.
//!
//! `T_n` averages over the `2^{n+1} + 1` points `j - 2^n ..= j + 2^n` with
//! weight `1 / (2^{n+1} + 1)`. Kernels are handled both in floating point and
//! as exact integer counts, so the factor-2 dominations can be checked
//! without rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcore::{abs_op, lp_of, singular_values, Exponent, GeneralOperator, HermitianOperator, Operator, C64};

/// `L` matrix values on the circle `Z / L`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    dim: usize,
    values: Vec<GeneralOperator>,
}

impl GridFunction {
    pub fn new(values: Vec<GeneralOperator>) -> Result<Self> {
        let first = values.first().ok_or_else(|| Error::InvalidArgument("grid must have at least one point".into()))?;
        let dim = first.dim();
        for v in &values {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: v.dim() });
            }
        }
        Ok(GridFunction { dim, values })
    }

    pub fn from_hermitian(values: Vec<HermitianOperator>) -> Result<Self> {
        Self::new(values.into_iter().map(GeneralOperator::from).collect())
    }

    pub fn constant(value: GeneralOperator, grid_size: usize) -> Result<Self> {
        Self::new(vec![value; grid_size])
    }

    pub fn zeros(dim: usize, grid_size: usize) -> Result<Self> {
        Self::constant(GeneralOperator::zeros(dim), grid_size)
    }

    /// `value` at `at`, zero elsewhere.
    pub fn delta(value: GeneralOperator, at: usize, grid_size: usize) -> Result<Self> {
        if at >= grid_size {
            return Err(Error::InvalidArgument(format!("delta position {at} outside grid of size {grid_size}")));
        }
        let mut values = vec![GeneralOperator::zeros(value.dim()); grid_size];
        values[at] = value;
        Self::new(values)
    }

    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| GeneralOperator::from_real_rows(&[&[v]])).collect::<Result<_>>()?)
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[GeneralOperator] {
        &self.values
    }

    pub fn into_values(self) -> Vec<GeneralOperator> {
        self.values
    }

    pub fn value(&self, j: usize) -> &GeneralOperator {
        &self.values[j % self.values.len()]
    }

    /// Hermitian parts of the values; exact for Hermitian-valued functions.
    pub fn hermitian_values(&self) -> Result<Vec<HermitianOperator>> {
        self.values.iter().map(|v| HermitianOperator::new(v.matrix().clone())).collect()
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        GridFunction::new(values)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?;
        GridFunction::new(values)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        GridFunction { dim: self.dim, values: self.values.iter().map(|v| v.scale(c)).collect() }
    }

    /// Sum of the traces over the grid.
    pub fn total_trace(&self) -> C64 {
        self.values.iter().map(|v| v.trace()).sum()
    }

    fn check_shape(&self, other: &GridFunction) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        if self.grid_size() != other.grid_size() {
            return Err(Error::DimensionMismatch { left: self.grid_size(), right: other.grid_size() });
        }
        Ok(())
    }
}

/// Level `n` of the dyadic family: radius `2^n`, weight `1 / (2^{n+1} + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicLevel {
    n: u32,
}

impl DyadicLevel {
    /// Largest supported level; keeps window widths well inside `u64`.
    pub const MAX_LEVEL: u32 = 30;

    pub fn new(n: u32) -> Result<Self> {
        if n > Self::MAX_LEVEL {
            return Err(Error::InvalidArgument(format!("level {n} exceeds {}", Self::MAX_LEVEL)));
        }
        Ok(DyadicLevel { n })
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn radius(self) -> usize {
        1 << self.n
    }

    /// Number of points in the window, `2^{n+1} + 1`.
    pub fn width(self) -> usize {
        2 * self.radius() + 1
    }

    pub fn weight(self) -> f64 {
        1.0 / self.width() as f64
    }

    pub fn check_fits(self, grid_size: usize) -> Result<()> {
        check_window(self.radius(), grid_size)
    }
}

fn check_window(radius: usize, grid_size: usize) -> Result<()> {
    if 2 * radius + 1 > grid_size {
        return Err(Error::WindowTooLarge { radius, grid_size });
    }
    Ok(())
}

fn box_average(f: &GridFunction, radius: usize) -> Result<GridFunction> {
    let l = f.grid_size();
    check_window(radius, l)?;
    let weight = 1.0 / (2 * radius + 1) as f64;
    let values = (0..l)
        .map(|j| {
            let mut acc = f.values[(j + l - radius) % l].matrix().clone();
            for i in 1..=2 * radius {
                acc += f.values[(j + l - radius + i) % l].matrix();
            }
            GeneralOperator::new(acc * C64::new(weight, 0.0))
        })
        .collect::<Result<_>>()?;
    GridFunction::new(values)
}

/// `(T_n f)(j) = weight * sum_{|i| <= 2^n} f(j + i mod L)`.
pub fn avg_apply(f: &GridFunction, level: DyadicLevel) -> Result<GridFunction> {
    level.check_fits(f.grid_size())?;
    box_average(f, level.radius())
}

/// Uniform average over `{-r, ..., r}`.
pub fn window_average(f: &GridFunction, r: usize) -> Result<GridFunction> {
    if r == 0 {
        return Err(Error::InvalidArgument("window radius must be >= 1".into()));
    }
    box_average(f, r)
}

/// Pointwise `|f(j)| = (f(j)* f(j))^{1/2}`.
pub fn abs_grid(f: &GridFunction) -> Result<GridFunction> {
    let values = f.values.iter().map(|v| abs_op(v).map(GeneralOperator::from)).collect::<Result<_>>()?;
    GridFunction::new(values)
}

/// `(sum_j tr |f(j)|^p)^{1/p}`; `p = inf` gives `max_j ||f(j)||_inf`.
pub fn grid_lp_norm(f: &GridFunction, p: Exponent) -> f64 {
    lp_of(f.values.iter().flat_map(|v| singular_values(v.matrix())), p)
}

/// `sum_j Re tr(f(j)* g(j))`.
pub fn nu_pairing(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    f.check_shape(g)?;
    let mut acc = 0.0;
    for (a, b) in f.values.iter().zip(&g.values) {
        acc += a.matrix().zip_fold(b.matrix(), 0.0, |s, x, y| s + (x.conj() * y).re);
    }
    Ok(acc)
}

/// `|<T_n f, g> - <f, T_n g>|` for the `nu`-pairing.
pub fn selfadjoint_check(level: DyadicLevel, f: &GridFunction, g: &GridFunction) -> Result<f64> {
    let left = nu_pairing(&avg_apply(f, level)?, g)?;
    let right = nu_pairing(f, &avg_apply(g, level)?)?;
    Ok((left - right).abs())
}

/// Integer indicator of the circular box of the given radius, indexed by
/// offset mod `L`.
fn box_counts(radius: usize, grid_size: usize) -> Vec<u64> {
    let mut k = vec![0u64; grid_size];
    for i in 0..=2 * radius {
        k[(grid_size + i - radius) % grid_size] += 1;
    }
    k
}

fn circular_convolution(a: &[u64], b: &[u64]) -> Vec<u64> {
    let l = a.len();
    let mut out = vec![0u64; l];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[(i + j) % l] += x * y;
        }
    }
    out
}

/// Circular kernel of `T_n` on `L` points, indexed by offset mod `L`.
pub fn kernel_of(level: DyadicLevel, grid_size: usize) -> Result<Vec<f64>> {
    level.check_fits(grid_size)?;
    let w = level.weight();
    Ok(box_counts(level.radius(), grid_size).into_iter().map(|c| c as f64 * w).collect())
}

/// Kernel of `T_n T_m`: the circular convolution of the two box kernels.
pub fn kernel_compose(n: DyadicLevel, m: DyadicLevel, grid_size: usize) -> Result<Vec<f64>> {
    let counts = compose_counts(n, m, grid_size)?;
    let w = n.weight() * m.weight();
    Ok(counts.into_iter().map(|c| c as f64 * w).collect())
}

fn compose_counts(n: DyadicLevel, m: DyadicLevel, grid_size: usize) -> Result<Vec<u64>> {
    n.check_fits(grid_size)?;
    m.check_fits(grid_size)?;
    Ok(circular_convolution(&box_counts(n.radius(), grid_size), &box_counts(m.radius(), grid_size)))
}

/// Exact check of `2 K_{m+1} - K_n * K_m >= 0` entrywise, for `n <= m`.
///
/// With overlap counts `c(j)` and window widths `w`, the inequality reads
/// `2 w_n w_m [j in box_{m+1}] >= c(j) w_{m+1}` in integers.
pub fn kernel_domination_exact(n: DyadicLevel, m: DyadicLevel, grid_size: usize) -> Result<bool> {
    if n.n() > m.n() {
        return Err(Error::InvalidArgument(format!("kernel domination needs n <= m, got n = {}, m = {}", n.n(), m.n())));
    }
    let next = DyadicLevel::new(m.n() + 1)?;
    next.check_fits(grid_size)?;
    let compose = compose_counts(n, m, grid_size)?;
    let outer = box_counts(next.radius(), grid_size);
    let (wn, wm, wnext) = (n.width() as u128, m.width() as u128, next.width() as u128);
    Ok(compose
        .iter()
        .zip(&outer)
        .all(|(&c, &o)| 2 * wn * wm * o as u128 >= c as u128 * wnext))
}

/// Smallest entry of `2 K_{m+1} - K_n * K_m` in floating point.
pub fn kernel_domination_margin(n: DyadicLevel, m: DyadicLevel, grid_size: usize) -> Result<f64> {
    let next = DyadicLevel::new(m.n() + 1)?;
    let outer = kernel_of(next, grid_size)?;
    let compose = kernel_compose(n, m, grid_size)?;
    Ok(outer.iter().zip(&compose).map(|(o, c)| 2.0 * o - c).fold(f64::INFINITY, f64::min))
}

/// Exact check that the radius-`r` box average is at most `2 T_n` as a kernel:
/// support inclusion `r <= 2^n` and `2 (2r + 1) >= 2^{n+1} + 1`.
pub fn window_domination_exact(r: usize, level: DyadicLevel) -> bool {
    r >= 1 && r <= level.radius() && 2 * (2 * r + 1) >= level.width()
}

/// The level `n` with `2^{n-1} <= r < 2^n`, i.e. `n = floor(log2 r) + 1`.
pub fn dyadic_level_for_radius(r: usize) -> Result<DyadicLevel> {
    if r == 0 {
        return Err(Error::InvalidArgument("radius must be >= 1".into()));
    }
    DyadicLevel::new(usize::BITS - r.leading_zeros())
}
