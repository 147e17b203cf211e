//! Acceptance run: one PASS/FAIL line per criterion, with wall time against
//! its budget. Exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use qfluct::chainstate::ProductState;
use qfluct::harness::{
    converge_theorem2, eq36_limit, lemma4_decay, monotone_decreasing, prop1_scaling,
    spin1_demo, strictly_decreasing, thermal_cross_check, ConvergenceRow, ExperimentPlan,
    MicroPath, Model, CONVERGED_FLOOR,
};
use qfluct::lindblad::{
    micro_evolve, micro_evolve_factorized, CouplingProfile, PropagationOptions,
};
use qfluct::meso::CP_TOL;
use qfluct::opcore::{chain_sites, herm_exp_derivative, pauli, ChainOperator, ProductTerm, SiteOperator};
use qfluct::{CMat, RMat, RVec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

const LIMIT_N: [usize; 6] = [9, 27, 81, 243, 729, 10_000];
const TRIPLES_A: [([f64; 2], [f64; 2], [f64; 2]); 3] = [
    ([0.0, 0.0], [1.0, 0.0], [0.0, 0.0]),
    ([0.5, 0.0], [0.0, 1.0], [-0.3, 0.2]),
    ([1.0, -0.5], [0.5, 0.5], [0.2, 1.0]),
];
const TRIPLES_B: [([f64; 2], [f64; 2], [f64; 2]); 3] = [
    ([0.0, 0.0], [1.0, 0.0], [0.0, 0.0]),
    ([0.5, 0.0], [0.0, 1.0], [-0.3, 0.2]),
    ([0.3, -0.2], [0.5, 0.5], [0.2, 0.4]),
];

fn sigma_beta(bw: f64) -> f64 {
    (1.0 + bw.cosh()) / (1.0 + 2.0 * bw.cosh())
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn plan_for(model: Model, a: [f64; 2], r: [f64; 2], b: [f64; 2]) -> ExperimentPlan {
    let mut p = ExperimentPlan::new("acceptance", model);
    p.a = a.to_vec();
    p.r = r.to_vec();
    p.b = b.to_vec();
    p
}

fn deviations_at(rows: &[ConvergenceRow], t: f64) -> Vec<f64> {
    rows.iter().filter(|r| r.t == t).map(|r| r.abs_dev).collect()
}

fn c1_closed_forms() -> Outcome {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for bw in [0.0, 1.0, 2.0] {
        for omega in [1.0, 2.0] {
            for lambda in [0.5, 1.0] {
                match spin1_demo(bw, omega, lambda, &[0.0, 0.5, 1.0, 2.0, 5.0]) {
                    Ok(rep) => {
                        worst = worst.max(rep.max_error());
                        failures.extend(rep.failures().map(|c| format!("{}@({bw},{omega},{lambda})", c.name)));
                    }
                    Err(e) => failures.push(format!("({bw},{omega},{lambda}): {e}")),
                }
            }
        }
    }
    (
        failures.is_empty() && worst <= 1e-12,
        format!("12 parameter sets, max error {worst:.3e} (tol 1e-12) {}", failures.join(" ")),
    )
}

fn c2_thermal() -> Outcome {
    let axis = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut worst = 0.0f64;
    for bw in [1.0, 2.0] {
        for &r1 in &axis {
            for &r2 in &axis {
                match thermal_cross_check(bw, &[r1, r2]) {
                    Ok((lhs, rhs)) => worst = worst.max((lhs - rhs).abs()),
                    Err(e) => return (false, e.to_string()),
                }
            }
        }
    }
    (worst < 1e-10, format!("βω ∈ {{1,2}}, 5×5 grid, max error {worst:.3e} (tol 1e-10, tail < 1e-15)"))
}

fn c3_static_limits() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (a, r, b) in TRIPLES_A {
        let mut plan = plan_for(Model::scenario_a(), a, r, b);
        plan.n_list = LIMIT_N.to_vec();
        plan.times = vec![0.0];
        match converge_theorem2(&plan) {
            Ok(rows) => {
                let dev = deviations_at(&rows, 0.0);
                let pass = monotone_decreasing(&dev, 0.05, CONVERGED_FLOOR) && *dev.last().unwrap() < 1e-2;
                ok &= pass;
                detail.push(format!("{:?}/{:?}/{:?} final {:.3e}", a, r, b, dev.last().unwrap()));
            }
            Err(e) => return (false, e.to_string()),
        }
    }
    (ok, detail.join("; "))
}

fn c4_dynamics() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    let times = [0.5, 1.0, 2.0];
    for (a, r, b) in TRIPLES_A {
        let mut plan = plan_for(Model::scenario_a(), a, r, b);
        plan.n_list = LIMIT_N.to_vec();
        plan.times = times.to_vec();
        plan.path = MicroPath::Factorized;
        let rows = match converge_theorem2(&plan) {
            Ok(r) => r,
            Err(e) => return (false, e.to_string()),
        };
        for t in times {
            let dev = deviations_at(&rows, t);
            let pass = monotone_decreasing(&dev, 0.05, CONVERGED_FLOOR) && *dev.last().unwrap() < 1e-2;
            if !pass {
                detail.push(format!("A {:?}/{:?}/{:?} t={t}: {}", a, r, b, sci(&dev)));
            }
            ok &= pass;
        }
    }
    let mut b_final = Vec::new();
    for (a, r, b) in TRIPLES_B {
        let mut plan = plan_for(Model::scenario_b(), a, r, b);
        plan.n_list = vec![1, 3, 5];
        plan.times = times.to_vec();
        plan.path = MicroPath::Dense;
        let rows = match converge_theorem2(&plan) {
            Ok(r) => r,
            Err(e) => return (false, e.to_string()),
        };
        for t in times {
            let dev = deviations_at(&rows, t);
            let pass = strictly_decreasing(&dev, 0.0);
            if !pass {
                detail.push(format!("B {:?}/{:?}/{:?} t={t}: {}", a, r, b, sci(&dev)));
            }
            b_final.push(*dev.last().unwrap());
            ok &= pass;
        }
    }
    detail.insert(
        0,
        format!(
            "A: 9 (triple, t) tables over N_T up to 1e4; B: 9 tables over N_T ∈ {{1,3,5}}, N_T=5 deviations {}",
            sci(&b_final)
        ),
    );
    (ok, detail.join("; "))
}

fn c5_meso_structure() -> Outcome {
    let grid: Vec<f64> = (1..=10).map(|k| 0.5 * k as f64).collect();
    let mut worst_sg = 0.0f64;
    let mut y_min = f64::INFINITY;
    let mut drift = 0.0f64;
    let mut cp_min = f64::INFINITY;
    for model in [Model::scenario_a(), Model::scenario_b()] {
        let cert = match model.certify() {
            Ok(c) => c,
            Err(e) => return (false, e.to_string()),
        };
        let sigma = cert.meso.kinematics().big_sigma.clone();
        for r in [[1.0, 0.0], [0.3, -1.1]] {
            let rv = RVec::from_column_slice(&r);
            for &s in &grid {
                for &t in &grid {
                    worst_sg = worst_sg.max(cert.meso.semigroup_residual(s, t, &rv).unwrap());
                }
            }
        }
        for &t in &grid {
            let (_, y) = cert.meso.propagator(t).unwrap();
            y_min = y_min.min(y.symmetric_eigen().eigenvalues.min());
            let ev: RMat = cert.meso.evolve_gaussian(&sigma, t).unwrap();
            drift = drift.max((ev - &sigma).amax());
            cp_min = cp_min.min(cert.meso.cp_certificate(t).unwrap().min_eig);
        }
    }
    (
        worst_sg < 1e-10 && y_min >= -1e-10 && drift <= 1e-12 && cp_min >= -CP_TOL,
        format!(
            "semigroup {worst_sg:.3e} (tol 1e-10), min eig Y_t {y_min:.3e}, Σ drift {drift:.3e} (tol 1e-12), CP min eig {cp_min:.3e}"
        ),
    )
}

fn c6_eq36() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    // arithmetic oracles for (r, ℒΣr) at r = (1,0)
    let cases = [
        (Model::scenario_a(), vec![1, 3, 9, 27, 81], -0.5 * sigma_beta(1.0)),
        (Model::scenario_b(), vec![1, 3, 5, 7, 9], -2.0 * 0.5),
    ];
    for (model, n_list, oracle) in cases {
        let name = model.name.clone();
        let mut plan = plan_for(model, [0.0, 0.0], [1.0, 0.0], [0.0, 0.0]);
        plan.n_list = n_list;
        let rows = match eq36_limit(&plan) {
            Ok(r) => r,
            Err(e) => return (false, e.to_string()),
        };
        let dev: Vec<f64> = rows.iter().map(|r| r.deviation).collect();
        let target = rows[0].target;
        let pass = (target - oracle).abs() < 1e-12
            && monotone_decreasing(&dev, 0.0, CONVERGED_FLOOR)
            && *dev.last().unwrap() < 1e-2;
        ok &= pass;
        detail.push(format!("{name}: target {target:.7} (oracle {oracle:.7}), deviations {}", sci(&dev)));
    }
    (ok, detail.join("; "))
}

fn c7_lemma4() -> Outcome {
    let [x, _, z] = pauli();
    let mut ok = true;
    let mut detail = Vec::new();
    let profiles = [
        ("nearest-neighbour", CouplingProfile::Custom {
            values: vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        }),
        ("geometric", CouplingProfile::Geometric { lambda: 0.5, q: 0.3 }),
    ];
    for (name, profile) in profiles {
        let mut model = Model::scenario_b();
        model.state = ProductState::maximally_mixed(2);
        model.spec.coupling = profile.clone();
        let mut plan = plan_for(model, [0.0, 0.0], [1.0, 0.0], [0.0, 0.0]);
        plan.n_list = vec![10, 100, 1000];
        let var = match lemma4_decay(&plan, &z, &z, &[]) {
            Ok(r) => r,
            Err(e) => return (false, e.to_string()),
        };
        let comm = match lemma4_decay(&plan, &z, &x, &[3, 5, 7]) {
            Ok(r) => r,
            Err(e) => return (false, e.to_string()),
        };
        let pass = var.variance_strictly_decreasing() && var.variance_below(10.0) && comm.commutator_decreasing();
        ok &= pass;
        let v: Vec<f64> = var.stats.iter().map(|s| s.variance).collect();
        let c: Vec<f64> = comm.commutator_norms.iter().map(|c| c.1).collect();
        detail.push(format!("{name}: variance {} commutator {}", sci(&v), sci(&c)));
    }
    (ok, detail.join("; "))
}

fn c8_prop1() -> Outcome {
    let mut plan = plan_for(Model::scenario_b(), [0.0, 0.0], [1.0, 0.0], [0.0, 0.0]);
    plan.n_list = vec![1, 3, 5];
    let rep = match prop1_scaling(&plan) {
        Ok(r) => r,
        Err(e) => return (false, e.to_string()),
    };
    let bounded = rep.rows.iter().all(|&(n, res)| res <= rep.envelope(n) * (1.0 + 1e-12));
    let res: Vec<f64> = rep.rows.iter().map(|r| r.1).collect();
    (
        rep.strictly_decreasing() && bounded,
        format!(
            "residuals {} slope {:.3} fitted C {:.6e} (‖q_r‖ = {:.3})",
            sci(&res),
            rep.slope.unwrap_or(f64::NAN),
            rep.c_fit,
            rep.q_norm
        ),
    )
}

fn random_hermitian(rng: &mut ChaCha8Rng, p: usize) -> SiteOperator {
    let m = CMat::from_fn(p, p, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    SiteOperator::new((&m + m.adjoint()) * C64::new(0.5, 0.0)).unwrap()
}

fn c9_exp_derivative() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (a, b) = (random_hermitian(&mut rng, 4), random_hermitian(&mut rng, 4));
        let o = match herm_exp_derivative(&a, &b, 1e-14) {
            Ok(o) => o,
            Err(e) => return (false, e.to_string()),
        };
        let analytic = o.matrix() * a.exp_i().matrix();
        let at = |s: f64| (&a + &b.scale_re(s)).exp_i().into_matrix();
        let fd = (at(h) - at(-h)) / C64::new(2.0 * h, 0.0);
        worst = worst.max((analytic - fd).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    (worst < 1e-6, format!("50 random 4×4 paths, step 1e-5, max error {worst:.3e} (tol 1e-6)"))
}

fn c10_oracle_equivalence() -> Outcome {
    let model = Model::scenario_a();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sites = chain_sites(3);
    let factors: Vec<_> = sites
        .iter()
        .map(|&k| {
            let m = CMat::from_fn(3, 3, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            (k, SiteOperator::new(m).unwrap())
        })
        .collect();
    let x = ChainOperator::from_terms(
        3,
        sites.clone(),
        vec![ProductTerm::new(C64::new(1.0, 0.0), factors.clone()).unwrap()],
    )
    .unwrap();
    let opts = PropagationOptions::default();
    let mut worst = 0.0f64;
    for t in [0.1, 1.0, 2.0] {
        let dense = micro_evolve(&model.spec, 3, &x, t, &opts).unwrap();
        let fact = micro_evolve_factorized(&model.spec, &factors, t).unwrap();
        let fact = ChainOperator::from_terms(
            3,
            sites.clone(),
            vec![ProductTerm::new(C64::new(1.0, 0.0), fact).unwrap()],
        )
        .unwrap()
        .to_dense(4096)
        .unwrap();
        worst = worst.max((dense.matrix() - fact.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    (worst < 1e-10, format!("N_T = 3, t ∈ {{0.1,1,2}}, max difference {worst:.3e} (tol 1e-10)"))
}

fn main() {
    qfluct::par::configure_workers();
    let criteria: [(u32, &str, u64, fn() -> Outcome); 10] = [
        (1, "closed forms of the spin-1 model", 5, c1_closed_forms),
        (2, "thermal-state cross-check", 5, c2_thermal),
        (3, "static Weyl-product limits", 30, c3_static_limits),
        (4, "time-evolved correlation limits", 300, c4_dynamics),
        (5, "mesoscopic semigroup structure", 10, c5_meso_structure),
        (6, "S(r;N) mean limit", 60, c6_eq36),
        (7, "mean-field operator decay", 60, c7_lemma4),
        (8, "generator action on Weyl operators", 120, c8_prop1),
        (9, "exponential derivative vs finite differences", 5, c9_exp_derivative),
        (10, "factorised vs dense evolution", 30, c10_oracle_equivalence),
    ];
    let mut failed = Vec::new();
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let (ok, detail) = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let pass = ok && in_time;
        println!(
            "criterion {id:>2} {}: {name} ({:.2} s, budget {budget} s) {detail}{}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { " [over budget]" }
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
