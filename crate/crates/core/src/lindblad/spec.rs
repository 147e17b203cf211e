use crate::error::domain;
use crate::opcore::{hermitian_min_eigenvalue, Site, SiteOperator, HERMITICITY_TOL};
use crate::{CMat, Result, C64};

const PROFILE_CUTOFF: usize = 32;
const PROFILE_FLOOR: f64 = 1e-15;

/// Translation-invariant coupling `J_{kl} = J(k − l)` with `J(−p) = J(p)*`.
#[derive(Clone, Debug, PartialEq)]
pub enum CouplingProfile {
    /// `J(p) = λ δ_{p0}`.
    Onsite { lambda: f64 },
    /// `J(p) = λ q^{|p|}`, cut at `|p| ≤ 32` or once below 1e−15.
    Geometric { lambda: f64, q: f64 },
    /// `values[p] = J(p)` for `p ≥ 0`.
    Custom { values: Vec<C64> },
}

impl CouplingProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            CouplingProfile::Onsite { lambda } if !lambda.is_finite() => {
                domain("onsite coupling must be finite")
            }
            CouplingProfile::Geometric { lambda, q } => {
                if !lambda.is_finite() || !q.is_finite() || q.abs() >= 1.0 {
                    return domain("geometric coupling needs finite λ and |q| < 1");
                }
                Ok(())
            }
            CouplingProfile::Custom { values } => {
                if values.is_empty() {
                    return domain("custom coupling needs J(0)");
                }
                if values[0].im.abs() > 1e-14 {
                    return domain("J(0) must be real");
                }
                if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return domain("custom coupling has non-finite values");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Largest `|p|` carrying a stored coupling.
    pub fn range(&self) -> usize {
        match self {
            CouplingProfile::Onsite { .. } => 0,
            CouplingProfile::Geometric { lambda, q } => {
                let mut p = 0;
                while p < PROFILE_CUTOFF && (lambda * q.abs().powi(p as i32 + 1)).abs() >= PROFILE_FLOOR {
                    p += 1;
                }
                p
            }
            CouplingProfile::Custom { values } => values.len() - 1,
        }
    }

    pub fn value(&self, p: i64) -> C64 {
        let a = p.unsigned_abs() as usize;
        if a > self.range() {
            return C64::new(0.0, 0.0);
        }
        let v = match self {
            CouplingProfile::Onsite { lambda } => C64::new(*lambda, 0.0),
            CouplingProfile::Geometric { lambda, q } => C64::new(lambda * q.powi(a as i32), 0.0),
            CouplingProfile::Custom { values } => values[a],
        };
        if p < 0 {
            v.conj()
        } else {
            v
        }
    }

    pub fn coupling(&self, k: Site, l: Site) -> C64 {
        self.value(k - l)
    }

    pub fn j0(&self) -> f64 {
        self.value(0).re
    }

    /// `Σ_p |J(p)|` over the stored range.
    pub fn abs_sum(&self) -> f64 {
        let r = self.range() as i64;
        (-r..=r).map(|p| self.value(p).norm()).sum()
    }

    /// `Σ_{p≠0} J(p)`.
    pub fn off_site_sum(&self) -> C64 {
        let r = self.range() as i64;
        (-r..=r).filter(|&p| p != 0).map(|p| self.value(p)).sum()
    }

    pub fn is_onsite(&self) -> bool {
        let r = self.range() as i64;
        (1..=r).all(|p| self.value(p).norm() == 0.0)
    }

    /// Toeplitz matrix `J_{kl}` on `n_t` sites.
    pub fn toeplitz(&self, n_t: usize) -> CMat {
        CMat::from_fn(n_t, n_t, |k, l| self.value(k as i64 - l as i64))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DissipatorForm {
    /// `Σ J_{kl} D_{μν} (v_μ^{(k)} X v_ν^{†(l)} − ½{v_μ^{(k)} v_ν^{†(l)}, X})`.
    Standard,
    /// `Σ J_{kl} (D_{μν}/2) [[v_μ^{(k)}, X], v_ν^{†(l)}]`.
    DoubleCommutator,
}

#[derive(Clone, Debug)]
pub struct LindbladSpec {
    pub h: SiteOperator,
    pub kraus: Vec<SiteOperator>,
    pub d: CMat,
    pub coupling: CouplingProfile,
    pub form: DissipatorForm,
}

impl LindbladSpec {
    pub fn new(
        h: SiteOperator,
        kraus: Vec<SiteOperator>,
        d: CMat,
        coupling: CouplingProfile,
        form: DissipatorForm,
    ) -> Result<Self> {
        let p = h.dim();
        if !h.is_hermitian(HERMITICITY_TOL * h.frobenius().max(1.0)) {
            return domain("Hamiltonian h is not hermitian");
        }
        if kraus.iter().any(|v| v.dim() != p) {
            return domain("Kraus operators must match the site dimension");
        }
        let m = kraus.len();
        if d.shape() != (m, m) {
            return domain(format!("D must be {m}×{m}, got {}×{}", d.nrows(), d.ncols()));
        }
        if m > 0 {
            if (&d - d.adjoint()).iter().any(|z| z.norm() > 1e-12) {
                return domain("D is not hermitian");
            }
            let min = hermitian_min_eigenvalue(&d);
            if min < -1e-12 {
                return domain(format!("D is not positive semidefinite (min eigenvalue {min:e})"));
            }
        }
        coupling.validate()?;
        if coupling.j0() <= 0.0 {
            return domain("J(0) must be positive");
        }
        Ok(LindbladSpec {
            h,
            kraus,
            d,
            coupling,
            form,
        })
    }

    pub fn site_dim(&self) -> usize {
        self.h.dim()
    }

    /// `‖L_N‖` estimate used to seed Krylov step sizes.
    pub fn norm_bound(&self, n_t: usize) -> f64 {
        let vn: Vec<f64> = self.kraus.iter().map(SiteOperator::norm).collect();
        let mut dsum = 0.0;
        for (mu, a) in vn.iter().enumerate() {
            for (nu, b) in vn.iter().enumerate() {
                dsum += self.d[(mu, nu)].norm() * a * b;
            }
        }
        let jsum: f64 = self.coupling.toeplitz(n_t).iter().map(|z| z.norm()).sum();
        2.0 * n_t as f64 * self.h.norm() + 2.0 * jsum * dsum
    }
}
