//! Vector-valued noncommutative norms on finite operator sequences.
//!
//! For positive sequences `(x_n)` the two norms are
//!
//! * `||(x_n)||_{L_p(l_inf^+)} = inf { ||a||_p : x_n <= a for all n }`
//! * `||(x_n)||_{L_p(l_1^+)}   = ||sum_n x_n||_p`
//!
//! General (non-positive) sequences enter only through explicit
//! factorizations `x_n = a z_n b` and `x_n = a_n b_n`, whose values are upper
//! bounds for the corresponding factorization norms.


use crate::domsolve::{self, SolverConfig};
use crate::error::{Error, Result};
use crate::opcore::{
    hermitize, lp_of, matrix_power, power_from_eigen, psd_check, real_trace_pair, schatten_norm,
    schatten_norm_hermitian, Exponent, GeneralOperator, HermitianOperator, Operator, DEFAULT_TOL,
};
use crate::random;

/// Items of a positive sequence must pass `psd_check` at
/// `DEFAULT_TOL * (1 + ||x||_inf)`.
pub fn positivity_tol(x: &HermitianOperator) -> f64 {
    DEFAULT_TOL * (1.0 + x.frobenius_norm())
}

/// Tolerance used when checking `x_n <= a` for a candidate dominant.
pub const DOMINATION_TOL: f64 = 1e-7;

/// A finite tuple of same-dimension Hermitian matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSequence {
    dim: usize,
    items: Vec<HermitianOperator>,
    positive: bool,
}

impl OperatorSequence {
    /// Sequence without a positivity claim.
    pub fn general(items: Vec<HermitianOperator>) -> Result<Self> {
        let dim = items.first().ok_or(Error::EmptySequence)?.dim();
        if let Some(bad) = items.iter().find(|x| x.dim() != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: bad.dim() });
        }
        Ok(Self { dim, items, positive: false })
    }

    /// Sequence of positive items; each item is checked.
    pub fn positive(items: Vec<HermitianOperator>) -> Result<Self> {
        let mut seq = Self::general(items)?;
        for x in &seq.items {
            let st = psd_check(x, positivity_tol(x))?;
            if !st.is_psd {
                return Err(Error::NotPositive { min_eig: st.min_eig });
            }
        }
        seq.positive = true;
        Ok(seq)
    }

    /// `len` copies of `x`.
    pub fn constant(x: HermitianOperator, len: usize, positive: bool) -> Result<Self> {
        let items = vec![x; len];
        if positive {
            Self::positive(items)
        } else {
            Self::general(items)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn items(&self) -> &[HermitianOperator] {
        &self.items
    }

    pub fn into_items(self) -> Vec<HermitianOperator> {
        self.items
    }

    pub fn sum(&self) -> HermitianOperator {
        self.items
            .iter()
            .fold(HermitianOperator::zeros(self.dim), |acc, x| acc.add(x).expect("same dim"))
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        let items = self.items.iter().map(|x| x.scale(c)).collect();
        if self.positive && c >= 0.0 {
            Ok(Self { dim: self.dim, items, positive: true })
        } else {
            Self::general(items)
        }
    }

    /// Appends an item, keeping the positivity flag only if the new item is
    /// positive too.
    pub fn push(&mut self, x: HermitianOperator) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: x.dim() });
        }
        if self.positive && !psd_check(&x, positivity_tol(&x))?.is_psd {
            self.positive = false;
        }
        self.items.push(x);
        Ok(())
    }

    fn require_positive(&self) -> Result<()> {
        if self.positive {
            return Ok(());
        }
        for x in &self.items {
            let st = psd_check(x, positivity_tol(x))?;
            if !st.is_psd {
                return Err(Error::NotPositive { min_eig: st.min_eig });
            }
        }
        Ok(())
    }
}

/// `x_n = a z_n b` with a shared pair of outer factors.
#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    pub left: GeneralOperator,
    pub middles: Vec<GeneralOperator>,
    pub right: GeneralOperator,
}

impl Factorization {
    pub fn reconstruct(&self) -> Vec<GeneralOperator> {
        self.middles
            .iter()
            .map(|z| self.left.mul(z).and_then(|az| az.mul(&self.right)).expect("same dim"))
            .collect()
    }

    /// `sup_n ||z_n||_inf`.
    pub fn middle_norm(&self) -> f64 {
        self.middles.iter().map(GeneralOperator::operator_norm).fold(0.0, f64::max)
    }

    /// Largest Frobenius distance between `a z_n b` and the target items.
    pub fn reconstruction_error(&self, target: &OperatorSequence) -> f64 {
        self.reconstruct()
            .iter()
            .zip(target.items())
            .map(|(r, x)| r.sub(x).map(|e| e.frobenius_norm()).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

/// `x_n = a_n b_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct L1Factorization {
    pub lefts: Vec<GeneralOperator>,
    pub rights: Vec<GeneralOperator>,
}

impl L1Factorization {
    pub fn reconstruct(&self) -> Vec<GeneralOperator> {
        self.lefts
            .iter()
            .zip(&self.rights)
            .map(|(a, b)| a.mul(b).expect("same dim"))
            .collect()
    }

    pub fn reconstruction_error(&self, target: &OperatorSequence) -> f64 {
        self.reconstruct()
            .iter()
            .zip(target.items())
            .map(|(r, x)| r.sub(x).map(|e| e.frobenius_norm()).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    Dominant(HermitianOperator),
    Factorization(Factorization),
}

/// A norm value together with its certified lower bound.
#[derive(Clone, Debug, PartialEq)]
pub struct NormResult {
    pub value: f64,
    pub certificate: Option<Certificate>,
    pub lower_bound: f64,
    pub gap: f64,
    pub converged: bool,
}

/// `||sum_n x_n||_p`.
pub fn l1_pos_norm(seq: &OperatorSequence, p: Exponent) -> Result<f64> {
    seq.require_positive()?;
    schatten_norm_hermitian(&seq.sum(), p)
}

/// `inf { ||a||_p : a >= x_n }`, solved by [`domsolve::solve_dominant`].
pub fn linf_pos_norm(seq: &OperatorSequence, p: Exponent, config: &SolverConfig) -> Result<NormResult> {
    seq.require_positive()?;
    let sol = domsolve::solve_dominant(seq, p, config)?;
    Ok(NormResult {
        value: sol.primal_value,
        lower_bound: sol.dual_value.max(0.0),
        gap: sol.gap,
        converged: sol.converged,
        certificate: Some(Certificate::Dominant(sol.dominant)),
    })
}

/// `||a||_{2p} sup_n ||z_n||_inf ||b||_{2p}`.
pub fn factorization_value(fac: &Factorization, p: Exponent) -> f64 {
    let outer = p.doubled();
    schatten_norm(&fac.left, outer) * fac.middle_norm() * schatten_norm(&fac.right, outer)
}

/// `||(sum a_j a_j^*)^{1/2}||_{2p} ||(sum b_j^* b_j)^{1/2}||_{2p}`.
pub fn l1_factorization_value(fac: &L1Factorization, p: Exponent) -> Result<f64> {
    let Some(first) = fac.lefts.first() else {
        return Ok(0.0);
    };
    let d = first.dim();
    let mut left = HermitianOperator::zeros(d);
    for a in &fac.lefts {
        left = left.add(&HermitianOperator::identity(d).congruence(&a.adjoint())?)?;
    }
    let mut right = HermitianOperator::zeros(d);
    for b in &fac.rights {
        right = right.add(&HermitianOperator::identity(d).congruence(b)?)?;
    }
    let outer = p.doubled();
    let l = schatten_norm_hermitian(&matrix_power(&left, 0.5)?, outer)?;
    let r = schatten_norm_hermitian(&matrix_power(&right, 0.5)?, outer)?;
    Ok(l * r)
}

/// The split `a_n = b_n = x_n^{1/2}` of a positive sequence.
pub fn l1_square_root_split(seq: &OperatorSequence) -> Result<L1Factorization> {
    seq.require_positive()?;
    let roots: Vec<GeneralOperator> = seq
        .items()
        .iter()
        .map(|x| matrix_power(x, 0.5).map(GeneralOperator::from))
        .collect::<Result<_>>()?;
    Ok(L1Factorization { lefts: roots.clone(), rights: roots })
}

/// Factorization `x_n = a^{1/2} z_n a^{1/2}` induced by a dominant `a >= x_n`,
/// with `z_n = (P + a^{1/2})^{-1} x_n (P + a^{1/2})^{-1}` and `P` the kernel
/// projection of `a`.
pub fn factorize_from_dominant(seq: &OperatorSequence, a: &HermitianOperator) -> Result<Factorization> {
    seq.require_positive()?;
    if a.dim() != seq.dim() {
        return Err(Error::DimensionMismatch { left: seq.dim(), right: a.dim() });
    }
    let eig = a.eigen()?;
    let scale = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for (index, x) in seq.items().iter().enumerate() {
        let st = psd_check(&a.sub(x)?, DOMINATION_TOL * (1.0 + scale))?;
        if !st.is_psd {
            return Err(Error::DominationViolated { index, min_eig: st.min_eig });
        }
    }
    // kernel: eigenvalues below 1e-10 ||a||_inf
    let thr = 1e-10 * scale;
    let root = eig.apply(|l| if l > thr { l.sqrt() } else { 0.0 });
    let inv = eig.apply(|l| if l > thr { 1.0 / l.sqrt() } else { 1.0 });
    let middles = seq
        .items()
        .iter()
        .map(|x| x.congruence(&inv).map(GeneralOperator::from))
        .collect::<Result<Vec<_>>>()?;
    let root = GeneralOperator::from(root);
    Ok(Factorization { left: root.clone(), middles, right: root })
}

/// Dominant `2 (a a^* + b^* b)` for a factorization with contractive middles.
///
/// For any contraction `z`, `(a^* - z b)^* (a^* - z b) >= 0` gives
/// `a z b + (a z b)^* <= a a^* + b^* b`; splitting `z_n` into four positive
/// contractions multiplies the bound by four.
pub fn dominant_from_factorization(fac: &Factorization) -> Result<HermitianOperator> {
    for (index, z) in fac.middles.iter().enumerate() {
        let norm = z.operator_norm();
        if norm > 1.0 + DEFAULT_TOL {
            return Err(Error::NotContractive { index, norm });
        }
    }
    let d = fac.left.dim();
    let id = HermitianOperator::identity(d);
    let aa = id.congruence(&fac.left.adjoint())?;
    let bb = id.congruence(&fac.right)?;
    Ok(aa.add(&bb)?.scale(2.0))
}

/// The constant sequence `x_n = (sum_k y_k)^{p-1}`, which attains the pairing
/// norm of `(y_n)` in `L_p(l_1)`.
pub fn dual_witness_linf(yseq: &OperatorSequence, p: Exponent) -> Result<OperatorSequence> {
    let pv = match p {
        Exponent::Finite(pv) if pv > 1.0 => pv,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "witness requires 1 < p < inf, got p = {p}"
            )))
        }
    };
    yseq.require_positive()?;
    let w = matrix_power(&yseq.sum(), pv - 1.0)?;
    OperatorSequence::constant(w, yseq.len(), true)
}

/// `sum_j Re tr(x_j y_j)`, zero-padding the shorter sequence.
pub fn pairing(xseq: &OperatorSequence, yseq: &OperatorSequence) -> Result<f64> {
    if xseq.dim() != yseq.dim() {
        return Err(Error::DimensionMismatch { left: xseq.dim(), right: yseq.dim() });
    }
    xseq.items()
        .iter()
        .zip(yseq.items())
        .map(|(x, y)| real_trace_pair(x, y))
        .sum()
}

#[derive(Clone, Debug)]
pub struct SamplerConfig {
    pub samples: usize,
    pub seed: u64,
    /// Also try the dual certificate of a dominant solve.
    pub include_certificate: bool,
    pub solver: SolverConfig,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { samples: 200, seed: 0, include_certificate: true, solver: SolverConfig::default() }
    }
}

/// Sampled lower bound for `||(x_n)||_{L_p(l_inf^+)}`:
/// `max pairing(x, y)` over positive `y` with `||sum y_n||_q = 1`.
///
/// Candidates are Wishart sequences, the single-item witnesses
/// `y_m = x_m^{p-1}` and optionally the dual certificate of the solver.
pub fn duality_lower_bound(xseq: &OperatorSequence, p: Exponent, sampler: &SamplerConfig) -> Result<f64> {
    if p.is_infinite() {
        return Err(Error::InvalidArgument("duality_lower_bound needs p < inf".into()));
    }
    xseq.require_positive()?;
    let q = p.conjugate();
    let (d, n) = (xseq.dim(), xseq.len());
    let zero = HermitianOperator::zeros(d);

    let score = |y: Vec<HermitianOperator>| -> Result<f64> {
        let y = OperatorSequence::positive(y)?;
        let norm = l1_pos_norm(&y, q)?;
        if norm <= 0.0 {
            return Ok(0.0);
        }
        Ok(pairing(xseq, &y)? / norm)
    };

    let mut best = 0.0_f64;
    for m in 0..n {
        let x = &xseq.items()[m];
        let eig = x.eigen()?;
        let w = match p {
            Exponent::Finite(pv) if pv == 1.0 => HermitianOperator::identity(d),
            Exponent::Finite(pv) => power_from_eigen(&eig, pv - 1.0)?,
            Exponent::Infinity => unreachable!(),
        };
        let mut y = vec![zero.clone(); n];
        y[m] = w;
        best = best.max(score(y)?);
    }

    let mut rng = random::rng_from_seed(sampler.seed);
    for _ in 0..sampler.samples {
        let y = (0..n).map(|_| random::wishart(&mut rng, d, d)).collect();
        best = best.max(score(y)?);
    }

    if sampler.include_certificate {
        let sol = domsolve::solve_dominant(xseq, p, &sampler.solver)?;
        best = best.max(score(sol.dual_sequence.into_items())?);
    }
    Ok(best.max(0.0))
}

/// `max_n ||x_n||_p`, the trivial lower bound of the `l_inf` norm.
pub fn max_item_norm(seq: &OperatorSequence, p: Exponent) -> Result<f64> {
    let mut best = 0.0_f64;
    for x in seq.items() {
        best = best.max(lp_of(x.eigenvalues()?, p));
    }
    Ok(best)
}

/// `hermitize(a z_n b)` for every index.
pub fn hermitian_parts(fac: &Factorization) -> Vec<HermitianOperator> {
    fac.reconstruct().iter().map(hermitize).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{loewner_leq, CMatrix, C64};
    use crate::random::{near_identity, random_contraction, random_positive_sequence, rng_from_seed};

    fn diag(v: &[f64]) -> HermitianOperator {
        HermitianOperator::from_real_diag(v).unwrap()
    }

    fn p1() -> HermitianOperator {
        diag(&[1.0, 0.0])
    }

    fn p2() -> HermitianOperator {
        HermitianOperator::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap()
    }

    fn pos(items: Vec<HermitianOperator>) -> OperatorSequence {
        OperatorSequence::positive(items).unwrap()
    }

    const TWO: Exponent = Exponent::Finite(2.0);

    #[test]
    fn sequence_validation() {
        assert!(matches!(OperatorSequence::general(vec![]), Err(Error::EmptySequence)));
        assert!(matches!(
            OperatorSequence::general(vec![diag(&[1.0]), diag(&[1.0, 2.0])]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            OperatorSequence::positive(vec![diag(&[1.0, -1.0])]),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn l1_pos_examples() {
        let s = pos(vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]);
        assert!((l1_pos_norm(&s, Exponent::one()).unwrap() - 2.0).abs() < 1e-12);
        assert!((l1_pos_norm(&s, TWO).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let x = HermitianOperator::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]]).unwrap();
        let single = pos(vec![x.clone()]);
        for p in [1.0, 1.5, 3.0] {
            let p = Exponent::Finite(p);
            assert!((l1_pos_norm(&single, p).unwrap() - schatten_norm(&x, p)).abs() < 1e-12);
        }
    }

    #[test]
    fn l1_pos_rejects_non_positive() {
        let s = OperatorSequence::general(vec![diag(&[1.0, -1.0])]).unwrap();
        assert!(matches!(l1_pos_norm(&s, TWO), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn linf_pos_examples() {
        let cfg = SolverConfig::default();
        let s = pos(vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]);
        let r = linf_pos_norm(&s, TWO, &cfg).unwrap();
        assert!((r.value - 2f64.sqrt()).abs() < 1e-6);
        let Some(Certificate::Dominant(a)) = &r.certificate else { panic!() };
        assert!((a.matrix() - CMatrix::identity(2, 2)).norm() < 1e-5);
        for x in s.items() {
            assert!(loewner_leq(x, a, 1e-7).unwrap());
        }

        let s = pos(vec![p1(), p2()]);
        let r = linf_pos_norm(&s, Exponent::Infinity, &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn factorization_value_examples() {
        let id = GeneralOperator::identity(2);
        let fac = Factorization {
            left: id.clone(),
            middles: vec![diag(&[1.0, 0.0]).to_general()],
            right: id.clone(),
        };
        assert!((factorization_value(&fac, TWO) - 2f64.sqrt()).abs() < 1e-12);

        let zero = Factorization {
            left: GeneralOperator::zeros(2),
            middles: vec![id.clone()],
            right: GeneralOperator::zeros(2),
        };
        assert_eq!(factorization_value(&zero, TWO), 0.0);

        let fac = Factorization { left: id.scale(2f64.sqrt()), middles: vec![id.clone()], right: id };
        assert!((factorization_value(&fac, Exponent::Infinity) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn l1_factorization_examples() {
        let s = random_positive_sequence(5, 3, 3, 1.0);
        let split = l1_square_root_split(&s).unwrap();
        assert!(split.reconstruction_error(&s) < 1e-10);
        for p in [1.0, 2.0, 3.5] {
            let p = Exponent::Finite(p);
            let v = l1_factorization_value(&split, p).unwrap();
            let w = l1_pos_norm(&s, p).unwrap();
            assert!((v - w).abs() <= 1e-10 * w);
        }

        let id = GeneralOperator::identity(2);
        let fac = L1Factorization { lefts: vec![id.clone()], rights: vec![id] };
        assert!((l1_factorization_value(&fac, Exponent::one()).unwrap() - 2.0).abs() < 1e-12);

        let z = GeneralOperator::zeros(2);
        let fac = L1Factorization { lefts: vec![z.clone(), z.clone()], rights: vec![z.clone(), z] };
        assert_eq!(l1_factorization_value(&fac, TWO).unwrap(), 0.0);
    }

    #[test]
    fn factorize_from_dominant_examples() {
        let s = pos(vec![diag(&[1.0, 0.0])]);
        let fac = factorize_from_dominant(&s, &diag(&[2.0, 1.0])).unwrap();
        assert!((fac.middles[0].matrix() - diag(&[0.5, 0.0]).matrix()).norm() < 1e-12);
        assert!(fac.reconstruction_error(&s) < 1e-12);

        let x = HermitianOperator::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let s = pos(vec![x.clone()]);
        let fac = factorize_from_dominant(&s, &x).unwrap();
        assert!((fac.middles[0].matrix() - CMatrix::identity(2, 2)).norm() < 1e-8);

        // singular dominant: kernel projection branch
        let s = pos(vec![diag(&[1.0, 0.0])]);
        let fac = factorize_from_dominant(&s, &diag(&[1.0, 0.0])).unwrap();
        assert!((fac.middles[0].matrix() - diag(&[1.0, 0.0]).matrix()).norm() < 1e-12);
        assert!(fac.reconstruction_error(&s) < 1e-12);
    }

    #[test]
    fn factorize_from_dominant_rejects_non_dominant() {
        let s = pos(vec![diag(&[2.0, 0.0])]);
        assert!(matches!(
            factorize_from_dominant(&s, &diag(&[1.0, 1.0])),
            Err(Error::DominationViolated { index: 0, .. })
        ));
    }

    #[test]
    fn factorize_from_dominant_value_matches_dominant_norm() {
        let s = random_positive_sequence(11, 3, 4, 1.0);
        let a = s.sum();
        let fac = factorize_from_dominant(&s, &a).unwrap();
        assert!(fac.reconstruction_error(&s) < 1e-9);
        assert!(fac.middle_norm() <= 1.0 + 1e-7);
        for p in [1.0, 2.0, 3.0] {
            let p = Exponent::Finite(p);
            let v = factorization_value(&fac, p);
            // sup ||z_n|| < 1 here, so the induced value can only be smaller
            assert!(v <= schatten_norm(&a, p) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn dominant_from_factorization_examples() {
        let id = GeneralOperator::identity(2);
        let fac = Factorization { left: id.clone(), middles: vec![p1().to_general()], right: id };
        let dom = dominant_from_factorization(&fac).unwrap();
        assert!((dom.matrix() - CMatrix::identity(2, 2) * C64::new(4.0, 0.0)).norm() < 1e-12);
        assert!(loewner_leq(&p1(), &dom, 1e-12).unwrap());

        let z = GeneralOperator::zeros(2);
        let fac = Factorization { left: z.clone(), middles: vec![GeneralOperator::identity(2)], right: z };
        assert_eq!(dominant_from_factorization(&fac).unwrap(), HermitianOperator::zeros(2));

        let fac = Factorization {
            left: GeneralOperator::identity(2),
            middles: vec![GeneralOperator::identity(2).scale(1.5)],
            right: GeneralOperator::identity(2),
        };
        assert!(matches!(dominant_from_factorization(&fac), Err(Error::NotContractive { .. })));
    }

    #[test]
    fn dominant_from_factorization_non_commuting_outer_factors() {
        // a = e12, b = t e21: a b = t e11 is Hermitian but is not below
        // 2 (a^* a + b b^*) = diag(0, 2 + 2t^2).
        let t = 0.7;
        let a = GeneralOperator::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let b = GeneralOperator::from_real_rows(&[&[0.0, 0.0], &[t, 0.0]]).unwrap();
        let fac = Factorization { left: a, middles: vec![GeneralOperator::identity(2)], right: b };
        let dom = dominant_from_factorization(&fac).unwrap();
        let x = hermitian_parts(&fac).remove(0);
        assert!((x.matrix() - diag(&[t, 0.0]).matrix()).norm() < 1e-15);
        assert!(loewner_leq(&x, &dom, 1e-12).unwrap());
    }

    #[test]
    fn dominant_from_factorization_random_instances() {
        let mut rng = rng_from_seed(2024);
        for _ in 0..100 {
            let d = 3;
            let a = crate::random::gaussian_operator(&mut rng, d);
            let b = crate::random::gaussian_operator(&mut rng, d);
            let middles = (0..3).map(|_| random_contraction(&mut rng, d)).collect();
            let fac = Factorization { left: a, middles, right: b };
            let dom = dominant_from_factorization(&fac).unwrap();
            for x in hermitian_parts(&fac) {
                let slack = dom.sub(&x).unwrap();
                assert!(psd_check(&slack, 1e-9 * (1.0 + dom.frobenius_norm())).unwrap().is_psd);
            }
        }
    }

    #[test]
    fn dual_witness_examples() {
        let y = pos(vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]);
        let w = dual_witness_linf(&y, TWO).unwrap();
        assert_eq!(w.len(), 2);
        for x in w.items() {
            assert!((x.matrix() - CMatrix::identity(2, 2)).norm() < 1e-12);
        }
        let y = pos(vec![HermitianOperator::identity(2)]);
        let w = dual_witness_linf(&y, Exponent::Finite(3.0)).unwrap();
        assert!((w.items()[0].matrix() - CMatrix::identity(2, 2)).norm() < 1e-12);
        let y = pos(vec![diag(&[2.0, 0.0])]);
        let w = dual_witness_linf(&y, TWO).unwrap();
        assert!((w.items()[0].matrix() - diag(&[2.0, 0.0]).matrix()).norm() < 1e-12);

        assert!(dual_witness_linf(&y, Exponent::one()).is_err());
        assert!(dual_witness_linf(&y, Exponent::Infinity).is_err());
    }

    #[test]
    fn pairing_examples() {
        let id = HermitianOperator::identity(2);
        let x = pos(vec![id.clone(), id.clone()]);
        let y = pos(vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]);
        assert!((pairing(&x, &y).unwrap() - 2.0).abs() < 1e-15);
        let zero = pos(vec![HermitianOperator::zeros(2); 3]);
        assert_eq!(pairing(&x, &zero).unwrap(), 0.0);
        // zero padding: the third item of `zero` has no partner
        let short = pos(vec![id.clone()]);
        assert!((pairing(&short, &y).unwrap() - 1.0).abs() < 1e-15);
        let other = pos(vec![HermitianOperator::identity(3)]);
        assert!(pairing(&x, &other).is_err());
    }

    #[test]
    fn witness_pairing_identity() {
        for seed in 0..10 {
            let y = random_positive_sequence(seed, 3, 3, 1.0);
            for p in [1.5, 2.0, 3.0] {
                let p = Exponent::Finite(p);
                let w = dual_witness_linf(&y, p).unwrap();
                let lhs = pairing(&w, &y).unwrap();
                let rhs = l1_pos_norm(&y, p).unwrap().powf(p.value());
                assert!((lhs - rhs).abs() <= 1e-8 * rhs);
            }
        }
    }

    #[test]
    fn duality_lower_bound_examples() {
        let sampler = SamplerConfig::default();
        let x = pos(vec![HermitianOperator::identity(2)]);
        let lb = duality_lower_bound(&x, TWO, &sampler).unwrap();
        assert!(lb >= 2f64.sqrt() - 1e-12);
        assert!(lb <= 2f64.sqrt() + 1e-6);

        let zero = pos(vec![HermitianOperator::zeros(2); 2]);
        assert_eq!(duality_lower_bound(&zero, TWO, &sampler).unwrap(), 0.0);
    }

    #[test]
    fn random_l1_factorizations_never_beat_the_sum() {
        let mut rng = rng_from_seed(99);
        for seed in 0..10 {
            let s = random_positive_sequence(seed, 2, 3, 1.0);
            let split = l1_square_root_split(&s).unwrap();
            for p in [1.0, 1.5, 2.0, 4.0] {
                let p = Exponent::Finite(p);
                let floor = l1_pos_norm(&s, p).unwrap();
                for _ in 0..20 {
                    let gs: Vec<GeneralOperator> =
                        (0..s.len()).map(|_| near_identity(&mut rng, 2, 0.5)).collect();
                    let fac = L1Factorization {
                        lefts: split.lefts.iter().zip(&gs).map(|(a, g)| a.mul(g).unwrap()).collect(),
                        rights: split
                            .rights
                            .iter()
                            .zip(&gs)
                            .map(|(b, g)| inverse(g).mul(b).unwrap())
                            .collect(),
                    };
                    assert!(fac.reconstruction_error(&s) < 1e-9);
                    assert!(l1_factorization_value(&fac, p).unwrap() >= floor - 1e-8);
                }
            }
        }
    }

    fn inverse(g: &GeneralOperator) -> GeneralOperator {
        GeneralOperator::new(g.matrix().clone().try_inverse().unwrap()).unwrap()
    }
}
