use std::time::Instant;

use super::model::{Certified, Model};
use super::stats::{loglog_slope, strictly_decreasing, CONVERGED_FLOOR};
use crate::fluct::{
    gaussian_product, local_weyl, local_weyl_factor, site_power, weyl_product_expectation,
    ObservableSet, WeylElement,
};
use crate::lindblad::{
    apply_site_propagator, generator_action_residual, micro_evolve, rn_commutator_norm,
    rn_statistics, s_operator, single_site_propagator, PropagationOptions, RnStat,
};
use crate::opcore::SiteOperator;
use crate::par::Execution;
use crate::{Error, Result, RVec, C64};

/// How the microscopic side of a convergence row is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MicroPath {
    /// Factorised for on-site couplings, dense otherwise.
    #[default]
    Auto,
    /// Per-site propagator; exact for any `N_T`, on-site couplings only.
    Factorized,
    /// Dense superoperator or Krylov evolution on the whole chain.
    Dense,
}

#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub scenario: String,
    pub model: Model,
    pub a: Vec<f64>,
    pub r: Vec<f64>,
    pub b: Vec<f64>,
    pub times: Vec<f64>,
    pub n_list: Vec<usize>,
    /// Threshold on the final deviation of a convergence table.
    pub tol: f64,
    pub path: MicroPath,
    pub exec: Execution,
    pub propagation: PropagationOptions,
}

impl ExperimentPlan {
    /// Plan with `a = b = 0`, `r = e_1`, `t = 1` and the default `N` list for
    /// the path the model admits.
    pub fn new(scenario: impl Into<String>, model: Model) -> Self {
        let d = model.dim();
        let mut r = vec![0.0; d];
        if d > 0 {
            r[0] = 1.0;
        }
        let n_list = if model.spec.coupling.is_onsite() {
            super::FACTORIZED_N_LIST.to_vec()
        } else {
            super::DENSE_N_LIST.to_vec()
        };
        ExperimentPlan {
            scenario: scenario.into(),
            model,
            a: vec![0.0; d],
            r,
            b: vec![0.0; d],
            times: vec![1.0],
            n_list,
            tol: 1e-2,
            path: MicroPath::Auto,
            exec: Execution::default(),
            propagation: PropagationOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.model.dim();
        for (name, v) in [("a", &self.a), ("r", &self.r), ("b", &self.b)] {
            if v.len() != d {
                return Err(Error::Config(format!(
                    "vector {name} has length {}, expected {d}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config(format!("vector {name} has non-finite entries")));
            }
        }
        if self.n_list.is_empty() || self.n_list[0] == 0 {
            return Err(Error::Config("N list must be non-empty with N_T ≥ 1".into()));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("N list must be strictly increasing".into()));
        }
        if let Some(t) = self.times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
            return Err(Error::Config(format!("times must be finite and ≥ 0, got {t}")));
        }
        Ok(())
    }

    fn resolved_path(&self) -> Result<MicroPath> {
        let onsite = self.model.spec.coupling.is_onsite();
        match self.path {
            MicroPath::Auto if onsite => Ok(MicroPath::Factorized),
            MicroPath::Auto => Ok(MicroPath::Dense),
            MicroPath::Factorized if !onsite => Err(Error::Config(
                "the factorised path needs an on-site coupling profile".into(),
            )),
            p => Ok(p),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n_t: usize,
    pub t: f64,
    pub micro: C64,
    pub meso: C64,
    pub abs_dev: f64,
    pub seconds: f64,
}

/// `ω(W_N(a) Φ_t^N[W_N(r)] W_N(b))` against `Ω(W(a) Φ_t[W(r)] W(b))` over the
/// plan's `(N_T, t)` grid, rows sorted by `(N_T, t)`.
pub fn converge_theorem2(plan: &ExperimentPlan) -> Result<Vec<ConvergenceRow>> {
    plan.validate()?;
    let path = plan.resolved_path()?;
    let cert = plan.model.certify()?;
    let mut times = plan.times.clone();
    times.sort_by(f64::total_cmp);
    let grid: Vec<(usize, f64)> = plan
        .n_list
        .iter()
        .flat_map(|&n| times.iter().map(move |&t| (n, t)))
        .collect();
    plan.exec
        .map(&grid, |&(n, t)| {
            let start = Instant::now();
            let micro = match path {
                MicroPath::Dense => micro_dense(plan, n, t)?,
                _ => micro_factorized(plan, n, t)?,
            };
            let meso = meso_value(plan, &cert, t)?;
            Ok(ConvergenceRow {
                n_t: n,
                t,
                micro,
                meso,
                abs_dev: (micro - meso).norm(),
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .into_iter()
        .collect()
}

fn micro_factorized(plan: &ExperimentPlan, n: usize, t: f64) -> Result<C64> {
    let (state, chi) = (&plan.model.state, &plan.model.chi);
    if t == 0.0 {
        return weyl_product_expectation(state, chi, &[&plan.a, &plan.r, &plan.b], n);
    }
    let prop = single_site_propagator(&plan.model.spec, t)?;
    let wa = local_weyl_factor(chi, &plan.a, n)?;
    let wr = apply_site_propagator(&prop, &local_weyl_factor(chi, &plan.r, n)?);
    let wb = local_weyl_factor(chi, &plan.b, n)?;
    let m = &(&wa * &wr) * &wb;
    Ok(site_power(state.site_expect(&m), n))
}

fn micro_dense(plan: &ExperimentPlan, n: usize, t: f64) -> Result<C64> {
    let (state, chi) = (&plan.model.state, &plan.model.chi);
    if t == 0.0 {
        return weyl_product_expectation(state, chi, &[&plan.a, &plan.r, &plan.b], n);
    }
    let cap = plan.propagation.hilbert_cap;
    let evolved = micro_evolve(
        &plan.model.spec,
        n,
        &local_weyl(chi, &plan.r, n)?,
        t,
        &plan.propagation,
    )?;
    let wa = local_weyl(chi, &plan.a, n)?.to_dense(cap)?;
    let wb = local_weyl(chi, &plan.b, n)?.to_dense(cap)?;
    Ok(state.expect_dense(&wa.mul(&evolved)?.mul(&wb)?))
}

fn meso_value(plan: &ExperimentPlan, cert: &Certified, t: f64) -> Result<C64> {
    let (f, wr) = cert.meso.meso_apply(t, &WeylElement::from_slice(&plan.r))?;
    let kin = cert.meso.kinematics();
    let ws = [WeylElement::from_slice(&plan.a), wr, WeylElement::from_slice(&plan.b)];
    Ok(gaussian_product(&kin.big_sigma, &kin.sigma, &ws)? * f.exp())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prop1Report {
    /// `(N_T, residual)` in plan order.
    pub rows: Vec<(usize, f64)>,
    /// Least-squares slope of `ln residual` against `ln N_T`.
    pub slope: Option<f64>,
    /// `‖q_r‖`.
    pub q_norm: f64,
    /// Smallest `C` with `residual ≤ C e^{2‖q_r‖} / √N_T` at every point.
    pub c_fit: f64,
}

impl Prop1Report {
    pub fn envelope(&self, n_t: usize) -> f64 {
        self.c_fit * (2.0 * self.q_norm).exp() / (n_t as f64).sqrt()
    }

    pub fn strictly_decreasing(&self) -> bool {
        let v: Vec<f64> = self.rows.iter().map(|r| r.1).collect();
        strictly_decreasing(&v, 0.0)
    }
}

/// Distance between `𝕃_N[W_N(r)]` and its leading-order form over the plan's
/// dense-capable `N` list.
pub fn prop1_scaling(plan: &ExperimentPlan) -> Result<Prop1Report> {
    plan.validate()?;
    let cert = plan.model.certify()?;
    let m = &plan.model;
    let cap = plan.propagation.hilbert_cap;
    let residuals: Vec<f64> = plan
        .exec
        .map(&plan.n_list, |&n| {
            generator_action_residual(&m.spec, &m.chi, &cert.reduced, &plan.r, n, cap)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let q_norm = m.chi.q(&plan.r)?.norm();
    let c_fit = plan
        .n_list
        .iter()
        .zip(&residuals)
        .map(|(&n, res)| res * (n as f64).sqrt() / (2.0 * q_norm).exp())
        .fold(0.0, f64::max);
    let ns: Vec<f64> = plan.n_list.iter().map(|&n| n as f64).collect();
    Ok(Prop1Report {
        slope: loglog_slope(&ns, &residuals),
        rows: plan.n_list.iter().copied().zip(residuals).collect(),
        q_norm,
        c_fit,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Eq36Row {
    pub n_t: usize,
    /// `ω(S(r;N))`.
    pub mean: f64,
    /// `(r, ℒΣ_ω r)`.
    pub target: f64,
    pub deviation: f64,
}

/// `ω(S(r;N))` against `(r, ℒΣ_ω r)` over the plan's `N` list.
pub fn eq36_limit(plan: &ExperimentPlan) -> Result<Vec<Eq36Row>> {
    plan.validate()?;
    let cert = plan.model.certify()?;
    let m = &plan.model;
    let r = RVec::from_column_slice(&plan.r);
    let target = r.dot(&(cert.reduced.l_mat() * &cert.meso.kinematics().big_sigma * &r));
    plan.exec
        .map(&plan.n_list, |&n| {
            let s = s_operator(&m.spec, &m.chi, &plan.r, n)?;
            let mean = m.state.expect_with(&s, Execution::Sequential).re;
            Ok(Eq36Row {
                n_t: n,
                mean,
                target,
                deviation: (mean - target).abs(),
            })
        })
        .into_iter()
        .collect()
}

/// Whether the deviations decrease (up to the converged floor) and end
/// below `tol`.
pub fn eq36_passed(rows: &[Eq36Row], tol: f64) -> bool {
    let v: Vec<f64> = rows.iter().map(|r| r.deviation).collect();
    super::stats::monotone_decreasing(&v, 0.0, CONVERGED_FLOOR)
        && v.last().is_some_and(|&d| d < tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma4Report {
    pub stats: Vec<RnStat>,
    /// `(N_T, ‖[W_N(r), R_N]‖)` at dense-capable sizes.
    pub commutator_norms: Vec<(usize, f64)>,
}

impl Lemma4Report {
    pub fn variance_strictly_decreasing(&self) -> bool {
        let v: Vec<f64> = self.stats.iter().map(|s| s.variance).collect();
        strictly_decreasing(&v, 0.0)
    }

    /// Every variance below `scale / N_T`.
    pub fn variance_below(&self, scale: f64) -> bool {
        self.stats.iter().all(|s| s.variance < scale / s.n_t as f64)
    }

    pub fn commutator_decreasing(&self) -> bool {
        let v: Vec<f64> = self.commutator_norms.iter().map(|c| c.1).collect();
        strictly_decreasing(&v, CONVERGED_FLOOR)
    }
}

/// Statistics of `R_N = (1/N_T) Σ J_{kl} a^{(k)} b^{(l)}` under the plan's
/// state and coupling profile, plus commutator norms at `dense_n`.
pub fn lemma4_decay(
    plan: &ExperimentPlan,
    a: &SiteOperator,
    b: &SiteOperator,
    dense_n: &[usize],
) -> Result<Lemma4Report> {
    plan.validate()?;
    let m = &plan.model;
    let profile = &m.spec.coupling;
    let stats = rn_statistics(&m.state, a, b, profile, &plan.n_list)?;
    let cap = plan.propagation.hilbert_cap;
    let chi: &ObservableSet = &m.chi;
    let norms: Vec<f64> = plan
        .exec
        .map(dense_n, |&n| rn_commutator_norm(chi, &plan.r, a, b, profile, n, cap))
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(Lemma4Report {
        stats,
        commutator_norms: dense_n.iter().copied().zip(norms).collect(),
    })
}
