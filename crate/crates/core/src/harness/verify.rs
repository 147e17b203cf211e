use super::demo::spin1_demo;
use super::experiments::{eq36_limit, eq36_passed, lemma4_decay, prop1_scaling, ExperimentPlan};
use super::model::{Certified, Model};
use crate::meso::CP_TOL;
use crate::par::Execution;
use crate::{Error, RVec};

const SEMIGROUP_TOL: f64 = 1e-10;
const GAUSSIAN_TOL: f64 = 1e-12;
/// Largest chain Hilbert dimension used by the dense suites.
const DENSE_SUITE_CAP: usize = 256;

/// One line of the verification summary.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    /// Named figures of merit, in a fixed order.
    pub metrics: Vec<(String, f64)>,
    pub note: Option<String>,
}

impl SuiteResult {
    fn new(name: &'static str, passed: bool) -> Self {
        SuiteResult {
            name,
            passed,
            metrics: Vec::new(),
            note: None,
        }
    }

    fn metric(mut self, key: impl Into<String>, v: f64) -> Self {
        self.metrics.push((key.into(), v));
        self
    }

    fn note(mut self, n: impl Into<String>) -> Self {
        self.note = Some(n.into());
        self
    }

    fn failed(name: &'static str, e: &Error) -> Self {
        SuiteResult::new(name, false).note(e.to_string())
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub r: Vec<f64>,
    pub eq36_n: Vec<usize>,
    pub lemma4_n: Vec<usize>,
    /// Chain lengths for the dense suites (commutator norms, generator action).
    pub dense_n: Vec<usize>,
    pub tol: f64,
    pub exec: Execution,
}

impl VerifyOptions {
    /// Defaults sized to the model's site dimension.
    pub fn for_model(model: &Model) -> Self {
        let p = model.spec.site_dim();
        let d = model.dim();
        let mut r = vec![0.0; d];
        if d > 0 {
            r[0] = 1.0;
        }
        let dense_n = [1usize, 3, 5, 7]
            .into_iter()
            .filter(|&n| (p as f64).powi(n as i32) <= DENSE_SUITE_CAP as f64)
            .collect();
        VerifyOptions {
            r,
            eq36_n: vec![1, 3, 5, 9],
            lemma4_n: vec![10, 100, 1000],
            dense_n,
            tol: 1e-2,
            exec: Execution::default(),
        }
    }
}

/// Runs every suite against `model`; results come back in a fixed order.
pub fn run_verification(model: &Model, opts: &VerifyOptions) -> Vec<SuiteResult> {
    let cert = model.certificates();
    let mut out = Vec::new();

    out.push(match &cert.locality {
        Ok(red) => SuiteResult::new("check_locality", true)
            .metric("l_max", red.l_mat().amax()),
        Err(e) => SuiteResult::failed("check_locality", e),
    });
    out.push(
        SuiteResult::new("kossakowski_check", cert.kossakowski.passed)
            .metric("j_min_eig", cert.kossakowski.j_min_eig)
            .metric("d_min_eig", cert.kossakowski.d_min_eig),
    );
    out.push(match &cert.invariance {
        Ok(res) => SuiteResult::new("invariance_probe", cert.invariance_passed())
            .metric("residual", *res),
        Err(e) => SuiteResult::failed("invariance_probe", e),
    });
    out.push(match &cert.cp_min_eig {
        Some(Ok(m)) => SuiteResult::new("cp_certificate", *m >= -CP_TOL).metric("min_eig", *m),
        Some(Err(e)) => SuiteResult::failed("cp_certificate", e),
        None => SuiteResult::new("cp_certificate", false).note("skipped: no reduced generator"),
    });

    let certified = model.certify();
    match &certified {
        Ok(c) => {
            out.push(semigroup_suite(c, opts));
            out.push(psd_suite(c));
        }
        Err(e) => {
            out.push(SuiteResult::failed("semigroup", e));
            out.push(SuiteResult::failed("psd", e));
        }
    }

    let plan = |n_list: &[usize]| {
        let mut p = ExperimentPlan::new("verify", model.clone());
        p.r = opts.r.clone();
        p.n_list = n_list.to_vec();
        p.tol = opts.tol;
        p.exec = opts.exec;
        p
    };

    out.push(match eq36_limit(&plan(&opts.eq36_n)) {
        Ok(rows) => {
            let last = rows.last().map_or(f64::NAN, |r| r.deviation);
            SuiteResult::new("eq36", eq36_passed(&rows, opts.tol))
                .metric("target", rows.first().map_or(f64::NAN, |r| r.target))
                .metric("final_deviation", last)
        }
        Err(e) => SuiteResult::failed("eq36", &e),
    });

    // a = h, b = x_1
    let (a, b) = (&model.spec.h, &model.chi.observables()[0]);
    let dense = opts.dense_n.get(1..).unwrap_or(&[]);
    out.push(match lemma4_decay(&plan(&opts.lemma4_n), a, b, dense) {
        Ok(rep) => {
            let mut s = SuiteResult::new(
                "lemma4",
                rep.variance_strictly_decreasing()
                    && rep.variance_below(10.0)
                    && rep.commutator_decreasing(),
            );
            for st in &rep.stats {
                s = s.metric(format!("variance_n{}", st.n_t), st.variance);
            }
            for (n, c) in &rep.commutator_norms {
                s = s.metric(format!("commutator_n{n}"), *c);
            }
            s
        }
        Err(e) => SuiteResult::failed("lemma4", &e),
    });

    out.push(match prop1_scaling(&plan(&opts.dense_n)) {
        Ok(rep) => {
            let mut s = SuiteResult::new("prop1", rep.strictly_decreasing());
            for (n, res) in &rep.rows {
                s = s.metric(format!("residual_n{n}"), *res);
            }
            s.metric("slope", rep.slope.unwrap_or(f64::NAN))
                .metric("c_fit", rep.c_fit)
        }
        Err(e) => SuiteResult::failed("prop1", &e),
    });

    out.push(spin1_suite());
    out
}

fn semigroup_suite(c: &Certified, opts: &VerifyOptions) -> SuiteResult {
    let r = RVec::from_column_slice(&opts.r);
    let grid: Vec<f64> = (1..=10).map(|k| 0.5 * k as f64).collect();
    let mut worst = 0.0f64;
    for &s in &grid {
        for &t in &grid {
            match c.meso.semigroup_residual(s, t, &r) {
                Ok(v) => worst = worst.max(v),
                Err(e) => return SuiteResult::failed("semigroup", &e),
            }
        }
    }
    SuiteResult::new("semigroup", worst < SEMIGROUP_TOL).metric("max_residual", worst)
}

fn psd_suite(c: &Certified) -> SuiteResult {
    let sigma = &c.meso.kinematics().big_sigma;
    let mut y_min = f64::INFINITY;
    let mut drift = 0.0f64;
    for k in 1..=10 {
        let t = 0.5 * k as f64;
        let (y, evolved) = match c.meso.propagator(t).and_then(|(_, y)| {
            Ok((y, c.meso.evolve_gaussian(sigma, t)?))
        }) {
            Ok(v) => v,
            Err(e) => return SuiteResult::failed("psd", &e),
        };
        y_min = y_min.min(y.symmetric_eigen().eigenvalues.min());
        drift = drift.max((evolved - sigma).amax());
    }
    SuiteResult::new("psd", y_min >= -CP_TOL && drift <= GAUSSIAN_TOL)
        .metric("y_min_eig", y_min)
        .metric("gaussian_drift", drift)
}

fn spin1_suite() -> SuiteResult {
    let times = [0.0, 0.5, 1.0, 2.0, 5.0];
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for bw in [0.0, 1.0, 2.0] {
        for omega in [1.0, 2.0] {
            for lambda in [0.5, 1.0] {
                match spin1_demo(bw, omega, lambda, &times) {
                    Ok(rep) => {
                        worst = worst.max(rep.max_error());
                        failures.extend(rep.failures().map(|c| c.name.clone()));
                    }
                    Err(e) => return SuiteResult::failed("spin1_closed_form", &e),
                }
            }
        }
    }
    let s = SuiteResult::new("spin1_closed_form", failures.is_empty()).metric("max_error", worst);
    if failures.is_empty() {
        s
    } else {
        s.note(failures.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::CouplingProfile;
    use crate::C64;

    #[test]
    fn bundled_scenarios_verify() {
        for m in [Model::scenario_a(), Model::scenario_b()] {
            let res = run_verification(&m, &VerifyOptions::for_model(&m));
            let failed: Vec<_> = res.iter().filter(|s| !s.passed).collect();
            assert!(failed.is_empty(), "{}: {failed:?}", m.name);
        }
    }

    #[test]
    fn broken_coupling_fails_kossakowski() {
        let mut m = Model::scenario_b();
        m.spec.coupling = CouplingProfile::Custom {
            values: vec![C64::new(0.5, 0.0), C64::new(1.0, 0.0)],
        };
        let res = run_verification(&m, &VerifyOptions::for_model(&m));
        let k = res.iter().find(|s| s.name == "kossakowski_check").unwrap();
        assert!(!k.passed);
        assert!(res.iter().find(|s| s.name == "check_locality").unwrap().passed);
    }
}
