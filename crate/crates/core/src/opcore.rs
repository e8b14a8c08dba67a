//! Hermitian matrix arithmetic, functional calculus, Schatten norms and the
//! Loewner order: the `L_p(M)` substrate for `M = M_d(C)` with the usual trace.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;
pub type CMatrix = DMatrix<C64>;

/// Default absolute and relative tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Eigenvalues in `[-PSD_CLIP * ||x||_inf, 0]` are treated as exact zeros by
/// the functional calculus.
pub const PSD_CLIP: f64 = 1e-10;

const EIG_MAX_ITER: usize = 10_000;

/// Schatten exponent `p` in `[1, inf]`. Infinity is a distinct variant so that
/// `p = inf` never degrades into a large float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    pub fn one() -> Self {
        Exponent::Finite(1.0)
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// Hoelder conjugate `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Self {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    /// `2p`, the exponent of the outer factors in a factorization.
    pub fn doubled(self) -> Self {
        match self {
            Exponent::Infinity => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(2.0 * p),
        }
    }

    /// `1/p`, zero for `p = inf`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Infinity => 0.0,
            Exponent::Finite(p) => 1.0 / p,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" | "∞" => Ok(Exponent::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("cannot parse exponent {s:?}")))?;
                Exponent::new(p)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => serializer.serialize_f64(*p),
            Exponent::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(p) => Exponent::new(p).map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Anything backed by a square complex matrix.
pub trait Operator {
    fn matrix(&self) -> &CMatrix;

    fn dim(&self) -> usize {
        self.matrix().nrows()
    }
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(())
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

/// A square complex matrix with no symmetry constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralOperator(CMatrix);

impl GeneralOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        Ok(Self(m))
    }

    pub fn zeros(d: usize) -> Self {
        Self(CMatrix::zeros(d, d))
    }

    pub fn identity(d: usize) -> Self {
        Self(CMatrix::identity(d, d))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::NotSquare { rows: d, cols: rows.first().map_or(0, |r| r.len()) });
        }
        Self::new(CMatrix::from_fn(d, d, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::NotSquare { rows: d, cols: rows.first().map_or(0, |r| r.len()) });
        }
        Self::new(CMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn mul(&self, other: &impl Operator) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 * other.matrix()))
    }

    pub fn add(&self, other: &impl Operator) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 + other.matrix()))
    }

    pub fn sub(&self, other: &impl Operator) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 - other.matrix()))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.map(|z| z * c))
    }

    pub fn scale_complex(&self, c: C64) -> Self {
        Self(self.0.map(|z| z * c))
    }

    /// Operator norm `||x||_inf`.
    pub fn operator_norm(&self) -> f64 {
        singular_values(&self.0).into_iter().fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }
}

impl Operator for GeneralOperator {
    fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

impl From<HermitianOperator> for GeneralOperator {
    fn from(h: HermitianOperator) -> Self {
        GeneralOperator(h.0)
    }
}

impl From<&HermitianOperator> for GeneralOperator {
    fn from(h: &HermitianOperator) -> Self {
        GeneralOperator(h.0.clone())
    }
}

/// A complex Hermitian matrix. Construction always symmetrizes, so the stored
/// entries satisfy `m[i][j] == conj(m[j][i])` exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(CMatrix);

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        Ok(Self::symmetrized(m))
    }

    fn symmetrized(m: CMatrix) -> Self {
        let adj = m.adjoint();
        Self((m + adj) * C64::new(0.5, 0.0))
    }

    pub fn zeros(d: usize) -> Self {
        Self(CMatrix::zeros(d, d))
    }

    pub fn identity(d: usize) -> Self {
        Self(CMatrix::identity(d, d))
    }

    pub fn scalar_identity(d: usize, c: f64) -> Self {
        Self(CMatrix::from_diagonal_element(d, d, C64::new(c, 0.0)))
    }

    pub fn from_real_diag(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        if d == 0 {
            return Err(Error::NotSquare { rows: 0, cols: 0 });
        }
        Ok(Self(CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        GeneralOperator::from_real_rows(rows).map(|g| hermitize(&g))
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn to_general(&self) -> GeneralOperator {
        GeneralOperator(self.0.clone())
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &HermitianOperator) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 - &other.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.map(|z| z * c))
    }

    /// `x + c I`.
    pub fn shift(&self, c: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)].re += c;
        }
        Self(m)
    }

    /// `b^* x b`, Hermitian for any square `b`.
    pub fn congruence(&self, b: &impl Operator) -> Result<Self> {
        check_dims(self.dim(), b.dim())?;
        let m = b.matrix().adjoint() * &self.0 * b.matrix();
        Ok(Self::symmetrized(m))
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        Ok(ev.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = SymmetricEigen::try_new(self.0.clone(), f64::EPSILON, EIG_MAX_ITER)
            .ok_or(Error::Eigensolver)?;
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().expect("dim >= 1"))
    }

    pub fn eigen(&self) -> Result<SpectralDecomposition> {
        SpectralDecomposition::new(self)
    }
}

impl Operator for HermitianOperator {
    fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

/// `x = U diag(lambda) U^*` with ascending eigenvalues and unitary `U`.
///
/// Each eigenvector column is normalised so that its first non-negligible
/// component is real and positive.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn new(x: &HermitianOperator) -> Result<Self> {
        let d = x.dim();
        let eig = SymmetricEigen::try_new(x.0.clone(), f64::EPSILON, EIG_MAX_ITER)
            .ok_or(Error::Eigensolver)?;
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let mut vectors = CMatrix::zeros(d, d);
        let mut values = Vec::with_capacity(d);
        for (col, &src) in order.iter().enumerate() {
            values.push(eig.eigenvalues[src]);
            let v = eig.eigenvectors.column(src);
            let phase = v
                .iter()
                .find(|z| z.norm() > 1e-12)
                .map(|z| z.conj() / z.norm())
                .unwrap_or(C64::new(1.0, 0.0));
            vectors.set_column(col, &(v * phase));
        }
        Ok(Self { eigenvalues: values, eigenvectors: vectors })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U diag(f(lambda_i)) U^*`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let d = self.dim();
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for j in 0..d {
            let fj = f(self.eigenvalues[j]);
            for i in 0..d {
                scaled[(i, j)] *= fj;
            }
        }
        HermitianOperator::symmetrized(scaled * u.adjoint())
    }

    pub fn reconstruct(&self) -> HermitianOperator {
        self.apply(|l| l)
    }
}

/// Singular values of a square matrix.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    match SVD::try_new(m.clone(), false, false, f64::EPSILON, EIG_MAX_ITER) {
        Some(svd) => svd.singular_values.iter().copied().collect(),
        None => {
            // fall back to the Gram spectrum
            let g = HermitianOperator::symmetrized(m.adjoint() * m);
            g.eigenvalues()
                .map(|ev| ev.into_iter().map(|l| l.max(0.0).sqrt()).collect())
                .unwrap_or_default()
        }
    }
}

/// `l_p` norm of a list of non-negative numbers, computed with max-scaling.
pub fn lp_of(values: impl IntoIterator<Item = f64>, p: Exponent) -> f64 {
    let values: Vec<f64> = values.into_iter().map(f64::abs).collect();
    let max = values.iter().copied().fold(0.0, f64::max);
    match p {
        Exponent::Infinity => max,
        Exponent::Finite(_) if max == 0.0 => 0.0,
        Exponent::Finite(p) if p == 1.0 => values.iter().sum(),
        Exponent::Finite(p) => {
            let s: f64 = values.iter().map(|v| (v / max).powf(p)).sum();
            max * s.powf(1.0 / p)
        }
    }
}

/// `(m + m^*) / 2`.
pub fn hermitize(m: &GeneralOperator) -> HermitianOperator {
    HermitianOperator::symmetrized(m.0.clone())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdStatus {
    pub is_psd: bool,
    pub min_eig: f64,
}

/// Positive semidefiniteness up to `tol`: `is_psd` iff the smallest eigenvalue
/// is at least `-tol`.
pub fn psd_check(x: &HermitianOperator, tol: f64) -> Result<PsdStatus> {
    let min_eig = x.min_eigenvalue()?;
    Ok(PsdStatus { is_psd: min_eig >= -tol, min_eig })
}

/// `x <= y` in the Loewner order, i.e. `y - x` is PSD up to `tol`.
pub fn loewner_leq(x: &HermitianOperator, y: &HermitianOperator, tol: f64) -> Result<bool> {
    Ok(psd_check(&y.sub(x)?, tol)?.is_psd)
}

fn clip_threshold(ev: &[f64]) -> f64 {
    let scale = ev.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    PSD_CLIP * scale
}

/// `x^s` for PSD `x` through the spectral decomposition, with `0^s = 0` for
/// `s > 0` and `x^0 = I`.
pub fn matrix_power(x: &HermitianOperator, s: f64) -> Result<HermitianOperator> {
    let eig = x.eigen()?;
    power_from_eigen(&eig, s)
}

pub(crate) fn power_from_eigen(eig: &SpectralDecomposition, s: f64) -> Result<HermitianOperator> {
    let thr = clip_threshold(&eig.eigenvalues);
    let min = eig.eigenvalues[0];
    if min < -thr {
        return Err(Error::NotPositive { min_eig: min });
    }
    if s < 0.0 && min <= thr {
        return Err(Error::SingularPower { power: s });
    }
    Ok(eig.apply(|l| {
        let l = l.max(0.0);
        if s == 0.0 {
            1.0
        } else if l == 0.0 {
            0.0
        } else {
            l.powf(s)
        }
    }))
}

/// Clip negative eigenvalues to zero (Frobenius projection onto the PSD cone).
pub fn clip_psd(x: &HermitianOperator) -> Result<HermitianOperator> {
    Ok(x.eigen()?.apply(|l| l.max(0.0)))
}

/// `|x| = (x^* x)^{1/2}`, computed from the SVD `x = U S V^*` as `V S V^*`.
pub fn abs_op(x: &impl Operator) -> Result<HermitianOperator> {
    let m = x.matrix();
    let svd = SVD::try_new(m.clone(), false, true, f64::EPSILON, EIG_MAX_ITER)
        .ok_or(Error::Eigensolver)?;
    let v_t = svd.v_t.expect("requested V^*");
    let mut weighted = v_t.adjoint();
    for (j, s) in svd.singular_values.iter().enumerate() {
        for i in 0..weighted.nrows() {
            weighted[(i, j)] *= *s;
        }
    }
    Ok(HermitianOperator::symmetrized(weighted * v_t))
}

/// Schatten norm `(tr |x|^p)^{1/p}`; `p = inf` is the operator norm.
pub fn schatten_norm(x: &impl Operator, p: Exponent) -> f64 {
    lp_of(singular_values(x.matrix()), p)
}

/// Schatten norm of a Hermitian matrix from its eigenvalues.
pub fn schatten_norm_hermitian(x: &HermitianOperator, p: Exponent) -> Result<f64> {
    Ok(lp_of(x.eigenvalues()?, p))
}

/// Rejects `p < 1` before computing the norm.
pub fn schatten_norm_checked(x: &impl Operator, p: f64) -> Result<f64> {
    Ok(schatten_norm(x, Exponent::new(p)?))
}

/// `tr(x y)`.
pub fn trace_pair(x: &impl Operator, y: &impl Operator) -> Result<C64> {
    check_dims(x.dim(), y.dim())?;
    let (a, b) = (x.matrix(), y.matrix());
    let d = x.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    Ok(acc)
}

/// `Re tr(x y)` for Hermitian arguments.
pub fn real_trace_pair(x: &HermitianOperator, y: &HermitianOperator) -> Result<f64> {
    trace_pair(x, y).map(|z| z.re)
}
