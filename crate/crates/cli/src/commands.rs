use std::io::Write;

use qfluct::fluct::WeylElement;
use qfluct::harness::{
    converge_theorem2, run_verification, spin1_demo, ExperimentPlan, Model, SuiteResult,
    VerifyOptions,
};
use qfluct::{Error, RMat, RVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ModelConfig;
use crate::output::{csv_writer, fmt, open};
use crate::Common;

pub const CONVERGE_HEADER: [&str; 9] = [
    "scenario", "N_T", "t", "micro_re", "micro_im", "meso_re", "meso_im", "abs_dev", "seconds",
];

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::new(1, e.to_string())
    }
}

fn io_error(e: std::io::Error) -> CliError {
    CliError::new(3, format!("cannot write output: {e}"))
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::new(3, format!("cannot write output: {e}"))
}

type CmdResult = Result<u8, CliError>;

fn load(c: &Common) -> Result<(ModelConfig, Model), CliError> {
    let path = c
        .config
        .as_deref()
        .ok_or_else(|| CliError::new(2, "--config <path> is required"))?;
    let cfg = ModelConfig::load(path)
        .map_err(|e| CliError::new(2, format!("{}: {e}", path.display())))?;
    let model = cfg
        .to_model()
        .map_err(|e| CliError::new(2, format!("{}: {e}", path.display())))?;
    Ok((cfg, model))
}

fn plan(cfg: &ModelConfig, model: Model, c: &Common) -> ExperimentPlan {
    let mut p = ExperimentPlan::new(cfg.name.clone(), model);
    let run = &cfg.run;
    if let Some(v) = c.r.clone().or_else(|| run.r.clone()) {
        p.r = v;
    }
    if let Some(v) = c.a.clone().or_else(|| run.a.clone()) {
        p.a = v;
    }
    if let Some(v) = c.b.clone().or_else(|| run.b.clone()) {
        p.b = v;
    }
    if let Some(v) = c.t_list.clone() {
        p.times = v;
    } else if !run.times.is_empty() {
        p.times = run.times.clone();
    }
    if let Some(v) = c.n_list.clone() {
        p.n_list = v;
    } else if !run.n_list.is_empty() {
        p.n_list = run.n_list.clone();
    }
    p.tol = c.tol.unwrap_or(run.tol);
    p.path = run.path.into();
    p
}

fn print_matrix(w: &mut impl Write, name: &str, m: &RMat) -> std::io::Result<()> {
    writeln!(w, "{name} =")?;
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt(m[(i, j)])).collect();
        writeln!(w, "  [{}]", row.join(", "))?;
    }
    Ok(())
}

pub fn check(c: &Common) -> CmdResult {
    let (_, model) = load(c)?;
    let cert = model.certificates();
    let mut w = open(c.out.as_deref()).map_err(io_error)?;
    let status = |ok: bool| if ok { "PASS" } else { "FAIL" };
    writeln!(w, "model {} (site dimension {}, {} observables)", model.name, model.spec.site_dim(), model.dim())
        .map_err(io_error)?;
    match &cert.locality {
        Ok(red) => {
            print_matrix(&mut w, "H", red.h_mat()).map_err(io_error)?;
            print_matrix(&mut w, "D", red.d_mat()).map_err(io_error)?;
            print_matrix(&mut w, "L", red.l_mat()).map_err(io_error)?;
            writeln!(w, "check_locality: PASS").map_err(io_error)?;
        }
        Err(e) => {
            let residual = match e {
                Error::LocalityViolation { residual, .. } => format!(" residual={}", fmt(*residual)),
                _ => String::new(),
            };
            writeln!(w, "check_locality: FAIL{residual} ({e})").map_err(io_error)?;
        }
    }
    writeln!(
        w,
        "kossakowski_check: {} j_min_eig={} d_min_eig={}",
        status(cert.kossakowski.passed),
        fmt(cert.kossakowski.j_min_eig),
        fmt(cert.kossakowski.d_min_eig)
    )
    .map_err(io_error)?;
    match &cert.invariance {
        Ok(r) => writeln!(w, "invariance_probe: {} residual={}", status(cert.invariance_passed()), fmt(*r)),
        Err(e) => writeln!(w, "invariance_probe: FAIL ({e})"),
    }
    .map_err(io_error)?;
    match &cert.admissibility {
        Ok(k) => {
            print_matrix(&mut w, "sigma", &k.sigma).map_err(io_error)?;
            print_matrix(&mut w, "Sigma", &k.big_sigma).map_err(io_error)?;
            writeln!(w, "admissibility: PASS min_eig={}", fmt(k.admissibility_min_eig()))
        }
        Err(e) => writeln!(w, "admissibility: FAIL ({e})"),
    }
    .map_err(io_error)?;
    match &cert.cp_min_eig {
        Some(Ok(m)) => writeln!(w, "cp_certificate: {} min_eig={}", status(cert.cp_passed()), fmt(*m)),
        Some(Err(e)) => writeln!(w, "cp_certificate: FAIL ({e})"),
        None => writeln!(w, "cp_certificate: FAIL (no reduced generator)"),
    }
    .map_err(io_error)?;
    let failed = cert.failures();
    if failed.is_empty() {
        writeln!(w, "all certificates passed").map_err(io_error)?;
    } else {
        writeln!(w, "failed: {}", failed.join(",")).map_err(io_error)?;
    }
    w.flush().map_err(io_error)?;
    Ok(if failed.is_empty() { 0 } else { 1 })
}

pub fn converge(c: &Common, timing: bool) -> CmdResult {
    let (cfg, model) = load(c)?;
    let p = plan(&cfg, model, c);
    p.validate().map_err(|e| CliError::new(2, e.to_string()))?;
    let w = open(c.out.as_deref()).map_err(io_error)?;
    let rows = converge_theorem2(&p)?;
    let mut out = csv_writer(w);
    out.write_record(CONVERGE_HEADER).map_err(csv_error)?;
    for row in rows {
        out.write_record([
            p.scenario.clone(),
            row.n_t.to_string(),
            fmt(row.t),
            fmt(row.micro.re),
            fmt(row.micro.im),
            fmt(row.meso.re),
            fmt(row.meso.im),
            fmt(row.abs_dev),
            fmt(if timing { row.seconds } else { 0.0 }),
        ])
        .map_err(csv_error)?;
    }
    out.flush().map_err(io_error)?;
    Ok(0)
}

pub fn meso(c: &Common) -> CmdResult {
    let (cfg, model) = load(c)?;
    let p = plan(&cfg, model, c);
    if let Some(t) = p.times.iter().find(|t| !(**t >= 0.0)) {
        return Err(CliError::new(1, format!("times must be ≥ 0, got {t}")));
    }
    p.validate().map_err(|e| CliError::new(2, e.to_string()))?;
    let cert = p.model.certify()?;
    let d = p.model.dim();
    let w = open(c.out.as_deref()).map_err(io_error)?;
    let mut out = csv_writer(w);
    let mut header = vec!["t".to_string(), "f_r".to_string()];
    header.extend((1..=d).map(|i| format!("r_t_{i}")));
    for i in 1..=d {
        header.extend((1..=d).map(|j| format!("Y_{i}{j}")));
    }
    header.push("cp_min_eig".into());
    out.write_record(&header).map_err(csv_error)?;
    for &t in &p.times {
        let (f, wr) = cert.meso.meso_apply(t, &WeylElement::from_slice(&p.r))?;
        let (_, y) = cert.meso.propagator(t)?;
        let cp = cert.meso.cp_certificate(t)?;
        let mut rec = vec![fmt(t), fmt(f)];
        rec.extend(wr.r.iter().map(|&x| fmt(x)));
        for i in 0..d {
            rec.extend((0..d).map(|j| fmt(y[(i, j)])));
        }
        rec.push(fmt(cp.min_eig));
        out.write_record(&rec).map_err(csv_error)?;
    }
    out.flush().map_err(io_error)?;
    Ok(0)
}

/// Semigroup law on seeded random `(r, s, t)`.
fn random_semigroup(model: &Model, seed: u64) -> SuiteResult {
    let name = "semigroup_random";
    let cert = match model.certify() {
        Ok(c) => c,
        Err(e) => {
            return SuiteResult {
                name,
                passed: false,
                metrics: Vec::new(),
                note: Some(e.to_string()),
            }
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..64 {
        let r = RVec::from_fn(model.dim(), |_, _| rng.random_range(-2.0..2.0));
        let (s, t) = (rng.random_range(0.0..5.0), rng.random_range(0.0..5.0));
        match cert.meso.semigroup_residual(s, t, &r) {
            Ok(v) => worst = worst.max(v),
            Err(e) => {
                return SuiteResult {
                    name,
                    passed: false,
                    metrics: Vec::new(),
                    note: Some(e.to_string()),
                }
            }
        }
    }
    SuiteResult {
        name,
        passed: worst < 1e-10,
        metrics: vec![("max_residual".into(), worst), ("seed".into(), seed as f64)],
        note: None,
    }
}

pub fn verify(c: &Common) -> CmdResult {
    let (cfg, model) = load(c)?;
    let mut opts = VerifyOptions::for_model(&model);
    if let Some(r) = c.r.clone().or_else(|| cfg.run.r.clone()) {
        if r.len() != model.dim() {
            return Err(CliError::new(2, format!("--r needs {} components", model.dim())));
        }
        opts.r = r;
    }
    opts.tol = c.tol.unwrap_or(cfg.run.tol);
    let mut suites = run_verification(&model, &opts);
    suites.push(random_semigroup(&model, c.seed.unwrap_or(cfg.run.seed)));

    let mut w = open(c.out.as_deref()).map_err(io_error)?;
    for s in &suites {
        let mut line = format!("suite={} status={}", s.name, if s.passed { "PASS" } else { "FAIL" });
        for (k, v) in &s.metrics {
            line.push_str(&format!(" {k}={}", fmt(*v)));
        }
        if let Some(n) = &s.note {
            line.push_str(&format!(" note={n:?}"));
        }
        writeln!(w, "{line}").map_err(io_error)?;
    }
    let failed: Vec<&str> = suites.iter().filter(|s| !s.passed).map(|s| s.name).collect();
    writeln!(
        w,
        "summary status={} suites={} failed={}",
        if failed.is_empty() { "PASS" } else { "FAIL" },
        suites.len(),
        failed.join(",")
    )
    .map_err(io_error)?;
    w.flush().map_err(io_error)?;
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("verification failed: {}", failed.join(", "));
        Ok(1)
    }
}

pub fn demo_spin1(c: &Common) -> CmdResult {
    let times = c.t_list.clone().unwrap_or_else(|| vec![0.0, 0.5, 1.0, 2.0, 5.0]);
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0)) {
        return Err(CliError::new(1, format!("times must be ≥ 0, got {t}")));
    }
    let w = open(c.out.as_deref()).map_err(io_error)?;
    let mut out = csv_writer(w);
    out.write_record(["beta_omega", "omega", "lambda", "quantity", "computed", "expected", "abs_err"])
        .map_err(csv_error)?;
    let mut failed = Vec::new();
    for bw in [0.0, 1.0, 2.0] {
        for omega in [1.0, 2.0] {
            for lambda in [0.5, 1.0] {
                let rep = spin1_demo(bw, omega, lambda, &times)?;
                for cmp in &rep.comparisons {
                    out.write_record([
                        fmt(bw),
                        fmt(omega),
                        fmt(lambda),
                        cmp.name.clone(),
                        fmt(cmp.computed),
                        fmt(cmp.expected),
                        fmt(cmp.error()),
                    ])
                    .map_err(csv_error)?;
                }
                eprintln!(
                    "beta_omega={bw} omega={omega} lambda={lambda} comparisons={} max_error={} status={}",
                    rep.comparisons.len(),
                    fmt(rep.max_error()),
                    if rep.passed() { "PASS" } else { "FAIL" }
                );
                if !rep.passed() {
                    failed.push(format!("({bw},{omega},{lambda})"));
                }
            }
        }
    }
    out.flush().map_err(io_error)?;
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("closed-form mismatches at {}", failed.join(" "));
        Ok(1)
    }
}
