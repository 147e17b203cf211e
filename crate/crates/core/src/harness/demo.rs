use super::model::Model;
use crate::fluct::{gaussian_char, WeylElement};
use crate::{Error, RMat, RVec, Result};

const DEMO_TOL: f64 = 1e-12;
/// Bound on the neglected tail of the Fock-space sum.
const TAIL_TOL: f64 = 1e-15;

/// One computed quantity against its closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
}

impl Comparison {
    fn new(name: impl Into<String>, computed: f64, expected: f64) -> Self {
        Comparison {
            name: name.into(),
            computed,
            expected,
        }
    }

    pub fn error(&self) -> f64 {
        (self.computed - self.expected).abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spin1Report {
    pub beta_omega: f64,
    pub omega: f64,
    pub lambda: f64,
    pub comparisons: Vec<Comparison>,
    pub tol: f64,
}

impl Spin1Report {
    pub fn max_error(&self) -> f64 {
        self.comparisons.iter().map(Comparison::error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.comparisons.iter().all(|c| c.error() <= self.tol)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Comparison> {
        self.comparisons.iter().filter(|c| c.error() > self.tol)
    }
}

fn push_matrix(out: &mut Vec<Comparison>, name: &str, computed: &RMat, expected: &RMat) {
    for i in 0..computed.nrows() {
        for j in 0..computed.ncols() {
            out.push(Comparison::new(
                format!("{name}[{i}{j}]"),
                computed[(i, j)],
                expected[(i, j)],
            ));
        }
    }
}

/// Builds the spin-1 model and compares every derived quantity with its
/// closed form: `ω_3`, `σ_β`, `Σ_β`, `ℒ`, `r_t`, `𝒴_t`, `Ω_β`, `η` and the
/// thermal characteristic function.
pub fn spin1_demo(beta_omega: f64, omega: f64, lambda: f64, times: &[f64]) -> Result<Spin1Report> {
    let model = Model::spin1(beta_omega, omega, lambda)?;
    let cert = model.certify()?;
    let kin = cert.meso.kinematics();
    let (ch, sh) = (beta_omega.cosh(), beta_omega.sinh());
    let w3 = -2.0 * sh / (1.0 + 2.0 * ch);
    let sb = (1.0 + ch) / (1.0 + 2.0 * ch);
    let eta = (sh / (1.0 + 2.0 * ch)).sqrt();
    let mut cmp = Vec::new();

    let [_, _, j3] = crate::opcore::spin_matrices(3);
    cmp.push(Comparison::new("omega_3", model.state.site_expect(&j3).re, w3));
    push_matrix(
        &mut cmp,
        "sigma_beta",
        &kin.sigma,
        &RMat::from_row_slice(2, 2, &[0.0, w3, -w3, 0.0]),
    );
    push_matrix(&mut cmp, "Sigma_beta", &kin.big_sigma, &(RMat::identity(2, 2) * sb));
    push_matrix(
        &mut cmp,
        "L",
        cert.reduced.l_mat(),
        &RMat::from_row_slice(2, 2, &[-lambda / 2.0, -omega, omega, -lambda / 2.0]),
    );
    cmp.push(Comparison::new("eta", (-kin.sigma[(0, 1)] / 2.0).max(0.0).sqrt(), eta));

    let probes = [[1.0, 0.0], [0.3, -1.1]];
    for &t in times {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("times must be ≥ 0, got {t}")));
        }
        let (_, y) = cert.meso.propagator(t)?;
        let yw = sb / 2.0 * (1.0 - (-lambda * t).exp());
        push_matrix(&mut cmp, &format!("Y_t(t={t})"), &y, &(RMat::identity(2, 2) * yw));
        let (c, s) = ((omega * t).cos(), (omega * t).sin());
        let e = (-lambda * t / 2.0).exp();
        for r in &probes {
            let (f, w) = cert.meso.meso_apply(t, &WeylElement::from_slice(r))?;
            let want = [e * (r[0] * c + r[1] * s), e * (-r[0] * s + r[1] * c)];
            for k in 0..2 {
                cmp.push(Comparison::new(format!("r_t[{k}](t={t},r={r:?})"), w.r[k], want[k]));
            }
            let norm2 = r[0] * r[0] + r[1] * r[1];
            cmp.push(Comparison::new(format!("f_r(t={t},r={r:?})"), f, -yw * norm2));
        }
    }

    for r in thermal_grid() {
        let rv = RVec::from_column_slice(&r);
        let omega_b = gaussian_char(&kin.big_sigma, &rv);
        cmp.push(Comparison::new(
            format!("Omega_beta(r={r:?})"),
            omega_b,
            (-0.5 * sb * rv.norm_squared()).exp(),
        ));
        if beta_omega > 0.0 {
            let (thermal, _) = thermal_cross_check(beta_omega, &r)?;
            cmp.push(Comparison::new(format!("thermal(r={r:?})"), thermal, omega_b));
        }
    }

    Ok(Spin1Report {
        beta_omega,
        omega,
        lambda,
        comparisons: cmp,
        tol: DEMO_TOL,
    })
}

/// 5×5 grid of `r` over `[−1, 1]²`.
fn thermal_grid() -> Vec<[f64; 2]> {
    let axis = [-1.0, -0.5, 0.0, 0.5, 1.0];
    axis.iter()
        .flat_map(|&a| axis.iter().map(move |&b| [a, b]))
        .collect()
}

/// `Tr(R e^{za†−z*a})` for the thermal state `R ∝ e^{−βω a†a}`, as a function
/// of `|z|²`.
///
/// Uses `⟨n|D(z)|n⟩ = e^{−|z|²/2} L_n(|z|²)` and truncates the Fock sum once
/// the tail bound `x^M` (with `x = e^{−βω}` and `|e^{−y/2}L_n(y)| ≤ 1`) drops
/// below 1e−15.
pub fn thermal_characteristic(beta_omega: f64, z_abs2: f64) -> Result<f64> {
    if !(beta_omega > 0.0) || !beta_omega.is_finite() {
        return Err(Error::Domain(format!("βω must be positive, got {beta_omega}")));
    }
    if !(z_abs2 >= 0.0) {
        return Err(Error::Domain(format!("|z|² must be ≥ 0, got {z_abs2}")));
    }
    let x = (-beta_omega).exp();
    let m = (TAIL_TOL.ln() / x.ln()).ceil() as usize + 1;
    let y = z_abs2;
    let (mut l_prev, mut l_cur) = (0.0, 1.0);
    let (mut sum, mut xn) = (0.0, 1.0);
    for n in 0..m {
        sum += xn * l_cur;
        let next = ((2 * n + 1) as f64 - y) * l_cur - n as f64 * l_prev;
        l_prev = l_cur;
        l_cur = next / (n + 1) as f64;
        xn *= x;
    }
    Ok((1.0 - x) * (-y / 2.0).exp() * sum)
}

/// The thermal characteristic function at `z = iη(r_1 + ir_2)` next to the
/// closed-form mesoscopic state `exp(−½ Σ_β |r|²)`.
pub fn thermal_cross_check(beta_omega: f64, r: &[f64]) -> Result<(f64, f64)> {
    if r.len() != 2 {
        return Err(Error::Domain("thermal cross-check needs r ∈ ℝ²".into()));
    }
    let (ch, sh) = (beta_omega.cosh(), beta_omega.sinh());
    let eta2 = sh / (1.0 + 2.0 * ch);
    let norm2 = r[0] * r[0] + r[1] * r[1];
    let lhs = thermal_characteristic(beta_omega, eta2 * norm2)?;
    let sb = (1.0 + ch) / (1.0 + 2.0 * ch);
    Ok((lhs, (-0.5 * sb * norm2).exp()))
}
