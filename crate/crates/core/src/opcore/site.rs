use std::ops::{Add, Mul, Neg, Sub};

use crate::error::domain;
use crate::{CMat, Error, Result, C64};

/// Tolerance for asserting `A = A†`.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// A p×p complex matrix acting on one site of the chain.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteOperator(CMat);

impl SiteOperator {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return domain(format!(
                "site operator must be square and non-empty, got {}×{}",
                m.nrows(),
                m.ncols()
            ));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("site operator has non-finite entries");
        }
        Ok(SiteOperator(m))
    }

    /// Build from row-major `(re, im)` pairs.
    pub fn from_rows(rows: &[Vec<(f64, f64)>]) -> Result<Self> {
        let p = rows.len();
        if rows.iter().any(|r| r.len() != p) {
            return domain("ragged matrix rows");
        }
        Self::new(CMat::from_fn(p, p, |i, j| {
            let (re, im) = rows[i][j];
            C64::new(re, im)
        }))
    }

    pub(crate) fn from_matrix_unchecked(m: CMat) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        SiteOperator(m)
    }

    pub fn identity(p: usize) -> Self {
        SiteOperator(CMat::identity(p, p))
    }

    pub fn zeros(p: usize) -> Self {
        SiteOperator(CMat::zeros(p, p))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn dagger(&self) -> Self {
        SiteOperator(self.0.adjoint())
    }

    /// `max |A − A†|` entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        let p = self.dim();
        let mut worst = 0.0f64;
        for i in 0..p {
            for j in i..p {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, c: C64) -> Self {
        SiteOperator(self.0.scale_c(c))
    }

    pub fn scale_re(&self, c: f64) -> Self {
        SiteOperator(&self.0 * C64::new(c, 0.0))
    }

    /// Largest singular value.
    pub fn norm(&self) -> f64 {
        spectral_norm(&self.0)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    pub fn commutator(&self, other: &SiteOperator) -> Self {
        SiteOperator(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn anticommutator(&self, other: &SiteOperator) -> Self {
        SiteOperator(&self.0 * &other.0 + &other.0 * &self.0)
    }

    pub fn expm(&self) -> Self {
        SiteOperator(super::expm(&self.0))
    }

    /// `e^{iA}`.
    pub fn exp_i(&self) -> Self {
        SiteOperator(super::expm(&self.0.scale_c(C64::i())))
    }

    pub fn max_abs_diff(&self, other: &SiteOperator) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_same_dim(&self, other: &SiteOperator) -> Result<()> {
        if self.dim() != other.dim() {
            return domain(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            ));
        }
        Ok(())
    }
}

trait ScaleC {
    fn scale_c(&self, c: C64) -> CMat;
}

impl ScaleC for CMat {
    fn scale_c(&self, c: C64) -> CMat {
        self.map(|z| z * c)
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr<&SiteOperator> for &SiteOperator {
            type Output = SiteOperator;
            fn $f(self, rhs: &SiteOperator) -> SiteOperator {
                SiteOperator(&self.0 $op &rhs.0)
            }
        }
        impl $tr<SiteOperator> for SiteOperator {
            type Output = SiteOperator;
            fn $f(self, rhs: SiteOperator) -> SiteOperator {
                SiteOperator(self.0 $op rhs.0)
            }
        }
    };
}
binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for SiteOperator {
    type Output = SiteOperator;
    fn neg(self) -> SiteOperator {
        SiteOperator(-self.0)
    }
}

/// Spin-j matrices `(J_1, J_2, J_3)` with `p = 2j+1`, in the eigenbasis of
/// `J_3` ordered `m = j, j−1, …, −j`. For `p = 3` this is the spin-1 triple
/// with `J_3 = diag(1, 0, −1)`.
pub fn spin_matrices(p: usize) -> [SiteOperator; 3] {
    assert!(p >= 2, "spin matrices need p ≥ 2");
    let j = (p as f64 - 1.0) / 2.0;
    let m = |i: usize| j - i as f64;
    // J_+ |m> = sqrt(j(j+1) − m(m+1)) |m+1>; index i ↔ m(i), m+1 ↔ i−1.
    let mut jp = CMat::zeros(p, p);
    for i in 1..p {
        let mi = m(i);
        jp[(i - 1, i)] = C64::new((j * (j + 1.0) - mi * (mi + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.adjoint();
    let half = C64::new(0.5, 0.0);
    let j1 = (&jp + &jm) * half;
    let j2 = (&jp - &jm) * C64::new(0.0, -0.5);
    let j3 = CMat::from_fn(p, p, |a, b| {
        if a == b {
            C64::new(m(a), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    [
        SiteOperator(j1),
        SiteOperator(j2),
        SiteOperator(j3),
    ]
}

/// Pauli matrices `(σ_1, σ_2, σ_3)`.
pub fn pauli() -> [SiteOperator; 3] {
    let [a, b, c] = spin_matrices(2);
    [a.scale_re(2.0), b.scale_re(2.0), c.scale_re(2.0)]
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Largest singular value of a dense matrix.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Smallest eigenvalue of a hermitian matrix (the hermitian part is used).
pub fn hermitian_min_eigenvalue(m: &CMat) -> f64 {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// `K^0 = z`, `K^n = [q, K^{n−1}]`.
pub fn multicommutator(q: &SiteOperator, z: &SiteOperator, n: usize) -> Result<SiteOperator> {
    q.check_same_dim(z)?;
    let mut k = z.clone();
    for _ in 0..n {
        k = q.commutator(&k);
    }
    Ok(k)
}

/// Generator `O` of the derivative of `N = e^{iM}` along a hermitian path:
/// `dN/dt = O·N` with `O = Σ_{k≥1} (i^k/k!) K_M^{k−1}[Ṁ]`.
///
/// The series is cut once the tail bound `(2‖M‖)^k ‖Ṁ‖ / k!` drops below
/// `tol`.
pub fn herm_exp_derivative(
    m: &SiteOperator,
    mdot: &SiteOperator,
    tol: f64,
) -> Result<SiteOperator> {
    m.check_same_dim(mdot)?;
    for (name, a) in [("M", m), ("Mdot", mdot)] {
        let scale = a.frobenius().max(1.0);
        if !a.is_hermitian(HERMITICITY_TOL * scale) {
            return domain(format!("{name} is not hermitian"));
        }
    }
    let two_norm_m = 2.0 * m.norm();
    let mdot_norm = mdot.norm();
    let mut out = SiteOperator::zeros(m.dim());
    if mdot_norm == 0.0 {
        return Ok(out);
    }
    let mut kterm = mdot.clone(); // K^{k−1}[Ṁ]
    let mut coeff = C64::new(1.0, 0.0); // i^k / k!
    let mut bound = mdot_norm; // (2‖M‖)^{k−1}‖Ṁ‖/(k−1)!
    const MAX_TERMS: usize = 400;
    for k in 1..=MAX_TERMS {
        coeff = coeff * C64::i() / k as f64;
        out = out + kterm.scale(coeff);
        bound *= two_norm_m / k as f64;
        if bound < tol {
            return Ok(out);
        }
        kterm = m.commutator(&kterm);
    }
    Err(Error::Numerical(format!(
        "exponential-derivative series did not reach tol {tol:e} within {MAX_TERMS} terms"
    )))
}
