use nalgebra::DVector;

use crate::{CMat, Error, RMat, Result, C64};

pub type CVec = DVector<C64>;

/// Dense `e^A` (scaling-and-squaring Padé).
pub fn expm(a: &CMat) -> CMat {
    a.clone().exp()
}

pub fn expm_real(a: &RMat) -> RMat {
    a.clone().exp()
}

#[derive(Clone, Debug)]
pub struct KrylovOptions {
    /// Arnoldi subspace dimension.
    pub subspace_dim: usize,
    /// Local error tolerance per unit time, relative to `‖v‖`.
    pub tol: f64,
    pub max_substeps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            subspace_dim: 30,
            tol: 1e-11,
            max_substeps: 10_000,
        }
    }
}

fn round_two_digits(x: f64) -> f64 {
    let s = 10f64.powi(x.log10().floor() as i32 - 1);
    (x / s).ceil() * s
}

/// `e^{tA} v` for a matrix given only through its action `apply`.
///
/// Adaptive Arnoldi time stepping; `anorm` is an estimate of `‖A‖` used for
/// the first step size.
pub fn expm_action<F>(apply: F, v: &CVec, t: f64, anorm: f64, opts: &KrylovOptions) -> Result<CVec>
where
    F: Fn(&CVec) -> CVec,
{
    let n = v.len();
    let mut w = v.clone();
    let v_norm = v.norm();
    if v_norm == 0.0 || t == 0.0 {
        return Ok(w);
    }
    if t < 0.0 {
        return Err(Error::Domain("Krylov propagation needs t ≥ 0".into()));
    }
    let m = opts.subspace_dim.min(n).max(1);
    let tol = opts.tol * v_norm;
    let anorm = anorm.max(1e-300);
    let btol = 1e-14 * anorm.max(1.0);
    let (gamma, delta) = (0.9, 1.2);
    let xm = 1.0 / m as f64;
    let mf = m as f64;
    let fact = ((mf + 1.0) / std::f64::consts::E).powf(mf + 1.0)
        * (2.0 * std::f64::consts::PI * (mf + 1.0)).sqrt();
    let mut beta = v_norm;
    let mut t_new = (1.0 / anorm) * ((fact * tol) / (4.0 * beta * anorm)).powf(xm);
    t_new = round_two_digits(t_new);
    let mut t_now = 0.0;
    let mut steps = 0;
    while t_now < t {
        steps += 1;
        if steps > opts.max_substeps {
            return Err(Error::Numerical(format!(
                "Krylov propagation exceeded {} substeps",
                opts.max_substeps
            )));
        }
        let mut tau = (t - t_now).min(t_new);
        let mut basis: Vec<CVec> = Vec::with_capacity(m + 1);
        basis.push(&w / C64::new(beta, 0.0));
        let mut h = CMat::zeros(m + 2, m + 2);
        let mut mb = m;
        let mut happy = false;
        for j in 0..m {
            let mut p = apply(&basis[j]);
            for _pass in 0..2 {
                for (i, vi) in basis.iter().enumerate() {
                    let hij = vi.dotc(&p);
                    h[(i, j)] += hij;
                    p.axpy(-hij, vi, C64::new(1.0, 0.0));
                }
            }
            let s = p.norm();
            if s < btol {
                happy = true;
                mb = j + 1;
                tau = t - t_now;
                break;
            }
            h[(j + 1, j)] = C64::new(s, 0.0);
            basis.push(p / C64::new(s, 0.0));
        }
        let avnorm = if happy {
            0.0
        } else {
            h[(m + 1, m)] = C64::new(1.0, 0.0);
            apply(&basis[m]).norm()
        };
        let mut rejects = 0;
        let (f, err_loc) = loop {
            let mx = if happy { mb } else { m + 2 };
            let f = expm(&(h.view((0, 0), (mx, mx)) * C64::new(tau, 0.0)));
            if happy {
                break (f, btol);
            }
            let phi1 = (f[(m, 0)] * beta).norm();
            let phi2 = (f[(m + 1, 0)] * beta * avnorm).norm();
            let err = if phi1 > 10.0 * phi2 {
                phi2
            } else if phi1 > phi2 {
                phi1 * phi2 / (phi1 - phi2)
            } else {
                phi1
            };
            if err <= delta * tau * tol {
                break (f, err);
            }
            rejects += 1;
            if rejects > 60 {
                return Err(Error::Numerical(
                    "Krylov step size could not meet tolerance".into(),
                ));
            }
            tau = round_two_digits(gamma * tau * (tau * tol / err).powf(xm));
        };
        let mx = if happy { mb } else { m + 1 };
        let mut next = CVec::zeros(n);
        for (i, vi) in basis.iter().take(mx).enumerate() {
            next.axpy(f[(i, 0)] * beta, vi, C64::new(1.0, 0.0));
        }
        w = next;
        beta = w.norm();
        t_now += tau;
        if beta == 0.0 {
            break;
        }
        let err = err_loc.max(1e-300);
        t_new = round_two_digits(gamma * tau * (tau * tol / err).powf(xm));
    }
    Ok(w)
}
