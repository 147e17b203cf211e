//! The emergent mesoscopic semigroup on Weyl operators.
//!
//! `Φ_t[W(r)] = e^{f_r(t)} W(𝒳_tᵀ r)` with `𝒳_t = e^{tℒ}`,
//! `𝒴_t = ½(Σ_ω − 𝒳_t Σ_ω 𝒳_tᵀ)` and `f_r(t) = −(r, 𝒴_t r)`.
//!
//! `𝒴_t` is positive semidefinite here, so `f_r(t) ≤ 0`; see
//! [`MesoSemigroup::propagator`].

use crate::error::domain;
use crate::fluct::{admissibility_min_eig, FluctuationKinematics, WeylElement, ADMISSIBILITY_TOL};
use crate::lindblad::ReducedGenerator;
use crate::opcore::{expm_real, hermitian_min_eigenvalue};
use crate::{CMat, RMat, RVec, Result, C64};

/// Floor for the CP certificate eigenvalue.
pub const CP_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct MesoSemigroup {
    reduced: ReducedGenerator,
    kin: FluctuationKinematics,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CpReport {
    pub passed: bool,
    pub min_eig: f64,
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return domain(format!("the semigroup runs forward only, got t = {t}"));
    }
    Ok(())
}

impl MesoSemigroup {
    pub fn new(reduced: ReducedGenerator, kin: FluctuationKinematics) -> Result<Self> {
        if reduced.dim() != kin.dim() {
            return domain("reduced generator and kinematics differ in dimension");
        }
        Ok(MesoSemigroup { reduced, kin })
    }

    pub fn reduced(&self) -> &ReducedGenerator {
        &self.reduced
    }

    pub fn kinematics(&self) -> &FluctuationKinematics {
        &self.kin
    }

    pub fn dim(&self) -> usize {
        self.kin.dim()
    }

    /// `(𝒳_t, 𝒴_t)`. `𝒴_t` is symmetrised and is positive semidefinite for
    /// models whose state is invariant, which makes `e^{f_r(t)} ≤ 1`.
    pub fn propagator(&self, t: f64) -> Result<(RMat, RMat)> {
        check_time(t)?;
        let x = expm_real(&(self.reduced.l_mat() * t));
        let s = &self.kin.big_sigma;
        let y = (s - &x * s * x.transpose()) * 0.5;
        let y = (&y + y.transpose()) * 0.5;
        Ok((x, y))
    }

    /// `f_r(t)` and `W(r_t)`; the phase of `w` is carried along.
    pub fn meso_apply(&self, t: f64, w: &WeylElement) -> Result<(f64, WeylElement)> {
        if w.r.len() != self.dim() {
            return domain("Weyl element dimension does not match the semigroup");
        }
        let (x, y) = self.propagator(t)?;
        let f = -w.r.dot(&(&y * &w.r));
        Ok((
            f,
            WeylElement {
                r: x.transpose() * &w.r,
                phase: w.phase,
            },
        ))
    }

    /// `max(|f_{Φ_s∘Φ_t} − f_{t+s}|, ‖r_{Φ_s∘Φ_t} − r_{t+s}‖_∞)` on `W(r)`.
    pub fn semigroup_residual(&self, s: f64, t: f64, r: &RVec) -> Result<f64> {
        let w = WeylElement {
            r: r.clone(),
            phase: 0.0,
        };
        let (f1, w1) = self.meso_apply(t, &w)?;
        let (f2, w2) = self.meso_apply(s, &w1)?;
        let (f, wf) = self.meso_apply(s + t, &w)?;
        Ok(((f1 + f2) - f).abs().max((&w2.r - &wf.r).amax()))
    }

    /// `Σ_t = 𝒳_t Σ_init 𝒳_tᵀ + 2𝒴_t`.
    pub fn evolve_gaussian(&self, sigma_init: &RMat, t: f64) -> Result<RMat> {
        if sigma_init.shape() != (self.dim(), self.dim()) {
            return domain("initial covariance has the wrong size");
        }
        let min = admissibility_min_eig(sigma_init, &self.kin.sigma);
        if min < -ADMISSIBILITY_TOL {
            return domain(format!("initial covariance is not admissible (min eigenvalue {min:e})"));
        }
        let (x, y) = self.propagator(t)?;
        Ok(&x * sigma_init * x.transpose() + y * 2.0)
    }

    /// Gaussian-channel criterion `2𝒴_t + (i/2)(σ − 𝒳_t σ 𝒳_tᵀ) ⪰ 0`.
    pub fn cp_certificate(&self, t: f64) -> Result<CpReport> {
        let (x, y) = self.propagator(t)?;
        let sigma = &self.kin.sigma;
        let skew = sigma - &x * sigma * x.transpose();
        let d = self.dim();
        let m = CMat::from_fn(d, d, |i, j| C64::new(2.0 * y[(i, j)], 0.5 * skew[(i, j)]));
        let min_eig = hermitian_min_eigenvalue(&m);
        Ok(CpReport {
            passed: min_eig >= -CP_TOL,
            min_eig,
        })
    }
}

/// Logarithmic negativity of a two-mode Gaussian state across the split
/// `(x_1, x_2) | (x_3, x_4)`.
///
/// Symplectic eigenvalues are normalised so that the uncertainty bound reads
/// `ν ≥ 1`; the partial transpose flips the sign of `x_4`.
pub fn log_negativity(big_sigma: &RMat, sigma: &RMat) -> Result<f64> {
    if big_sigma.shape() != (4, 4) || sigma.shape() != (4, 4) {
        return domain("log-negativity needs 4×4 matrices");
    }
    for i in 0..2 {
        for j in 2..4 {
            if sigma[(i, j)].abs() > 1e-12 || sigma[(j, i)].abs() > 1e-12 {
                return domain("σ must be block diagonal across the 2|2 split");
            }
        }
    }
    let inv = sigma
        .clone()
        .try_inverse()
        .ok_or_else(|| crate::Error::Domain("σ is singular".into()))?;
    let p = RMat::from_diagonal(&RVec::from_vec(vec![1.0, 1.0, 1.0, -1.0]));
    let pt = &p * big_sigma * &p;
    let m = (inv * pt).map(|v| C64::new(0.0, v));
    let nu_min = m
        .eigenvalues()
        .map(|ev| ev.iter().map(|z| 2.0 * z.norm()).fold(f64::INFINITY, f64::min))
        .ok_or_else(|| crate::Error::Numerical("eigenvalue computation failed".into()))?;
    Ok((-nu_min.ln()).max(0.0))
}
