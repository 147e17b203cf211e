use crate::chainstate::{gibbs_single_site, ProductState};
use crate::fluct::{FluctuationKinematics, ObservableSet};
use crate::lindblad::{
    check_locality, invariance_probe, kossakowski_check, CouplingProfile, DissipatorForm,
    KossakowskiReport, LindbladSpec, ReducedGenerator,
};
use crate::meso::{MesoSemigroup, CP_TOL};
use crate::opcore::{pauli, spin_matrices};
use crate::{CMat, Error, Result};

/// Chain length used when extracting the reduced generator.
const LOCALITY_N: usize = 5;
const INVARIANCE_TOL: f64 = 1e-10;
/// Times at which the CP certificate is sampled, `t ∈ (0, 5]`.
const CP_TIMES: [f64; 10] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0];

/// A microscopic model: generator, invariant product state and observables.
#[derive(Clone, Debug)]
pub struct Model {
    pub name: String,
    pub spec: LindbladSpec,
    pub state: ProductState,
    pub chi: ObservableSet,
}

/// Outcome of every certificate, recorded separately so that a report can
/// show all of them even when one fails.
#[derive(Clone, Debug)]
pub struct Certificates {
    pub locality: Result<ReducedGenerator>,
    pub kossakowski: KossakowskiReport,
    /// Largest `|ω(L_N[o])|` over the probe set.
    pub invariance: Result<f64>,
    pub admissibility: Result<FluctuationKinematics>,
    /// Smallest CP-certificate eigenvalue over `t ∈ (0, 5]`.
    pub cp_min_eig: Option<Result<f64>>,
}

impl Certificates {
    pub fn invariance_passed(&self) -> bool {
        matches!(self.invariance, Ok(r) if r <= INVARIANCE_TOL)
    }

    pub fn cp_passed(&self) -> bool {
        matches!(self.cp_min_eig, Some(Ok(m)) if m >= -CP_TOL)
    }

    /// Names of the failed certificates, in a fixed order.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.locality.is_err() {
            out.push("check_locality");
        }
        if !self.kossakowski.passed {
            out.push("kossakowski_check");
        }
        if !self.invariance_passed() {
            out.push("invariance_probe");
        }
        if self.admissibility.is_err() {
            out.push("admissibility");
        }
        if !self.cp_passed() {
            out.push("cp_certificate");
        }
        out
    }
}

/// A model whose certificates all passed.
#[derive(Clone, Debug)]
pub struct Certified {
    pub reduced: ReducedGenerator,
    pub meso: MesoSemigroup,
    pub kossakowski: KossakowskiReport,
    pub invariance: f64,
    pub cp_min_eig: f64,
}

impl Model {
    pub fn new(
        name: impl Into<String>,
        spec: LindbladSpec,
        state: ProductState,
        chi: ObservableSet,
    ) -> Result<Self> {
        if state.dim() != spec.site_dim() || chi.site_dim() != spec.site_dim() {
            return Err(Error::Domain(
                "generator, state and observables disagree on the site dimension".into(),
            ));
        }
        Ok(Model {
            name: name.into(),
            spec,
            state,
            chi,
        })
    }

    /// Spin-1 chain with `h = ωJ_3`, on-site dephasing of strength `λ` and the
    /// Gibbs state of `h` at inverse temperature `βω/ω`; `χ = {J_1, J_2}`.
    pub fn spin1(beta_omega: f64, omega: f64, lambda: f64) -> Result<Self> {
        if !(omega > 0.0) || !(lambda > 0.0) || !(beta_omega >= 0.0) {
            return Err(Error::Domain(format!(
                "spin-1 model needs ω > 0, λ > 0, βω ≥ 0 (got {omega}, {lambda}, {beta_omega})"
            )));
        }
        let [j1, j2, j3] = spin_matrices(3);
        let h = j3.scale_re(omega);
        let state = gibbs_single_site(&h, beta_omega / omega)?;
        let spec = LindbladSpec::new(
            h,
            vec![j3],
            CMat::identity(1, 1),
            CouplingProfile::Onsite { lambda },
            DissipatorForm::DoubleCommutator,
        )?;
        let chi = ObservableSet::bind(vec![j1, j2], &state)?;
        Model::new("spin1", spec, state, chi)
    }

    /// Qubit chain with `h = (ω/2)σ_3`, double-commutator dephasing with a
    /// geometric coupling profile, Gibbs state of `h`; `χ = {σ_1, σ_2}`.
    pub fn qubit_dephasing(beta_omega: f64, omega: f64, lambda: f64, q: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::Domain(format!("ω must be positive, got {omega}")));
        }
        let [x, y, z] = pauli();
        let h = z.scale_re(omega / 2.0);
        let state = gibbs_single_site(&h, beta_omega / omega)?;
        let spec = LindbladSpec::new(
            h,
            vec![z],
            CMat::identity(1, 1),
            CouplingProfile::Geometric { lambda, q },
            DissipatorForm::DoubleCommutator,
        )?;
        let chi = ObservableSet::bind(vec![x, y], &state)?;
        Model::new("qubit_dephasing", spec, state, chi)
    }

    /// Scenario A: spin-1 at `βω = ω = λ = 1`.
    pub fn scenario_a() -> Self {
        Model::spin1(1.0, 1.0, 1.0).expect("bundled spin-1 parameters are valid")
    }

    /// Scenario B: qubit dephasing, `βω = ω = 1`, `λ = 0.5`, `q = 0.3`.
    pub fn scenario_b() -> Self {
        Model::qubit_dephasing(1.0, 1.0, 0.5, 0.3).expect("bundled qubit parameters are valid")
    }

    pub fn dim(&self) -> usize {
        self.chi.len()
    }

    /// Toeplitz size used for the Kossakowski check: large enough to cover the
    /// coupling range several times over.
    fn kossakowski_n(&self) -> usize {
        (4 * self.spec.coupling.range() + 1).clamp(64, 512)
    }

    pub fn certificates(&self) -> Certificates {
        let locality = check_locality(&self.spec, &self.chi, LOCALITY_N);
        let kossakowski = kossakowski_check(&self.spec, self.kossakowski_n());
        let invariance = invariance_probe(&self.spec, &self.state, LOCALITY_N);
        let admissibility = FluctuationKinematics::from_state(&self.state, &self.chi);
        let cp_min_eig = match (&locality, &admissibility) {
            (Ok(red), Ok(kin)) => Some(
                MesoSemigroup::new(red.clone(), kin.clone()).and_then(|m| {
                    CP_TIMES.iter().try_fold(f64::INFINITY, |acc, &t| {
                        Ok(acc.min(m.cp_certificate(t)?.min_eig))
                    })
                }),
            ),
            _ => None,
        };
        Certificates {
            locality,
            kossakowski,
            invariance,
            admissibility,
            cp_min_eig,
        }
    }

    /// All certificates, or a configuration error naming the failed ones.
    pub fn certify(&self) -> Result<Certified> {
        let c = self.certificates();
        let failed = c.failures();
        if !failed.is_empty() {
            let mut detail = Vec::new();
            if let Err(e) = &c.locality {
                detail.push(e.to_string());
            }
            if !c.kossakowski.passed {
                detail.push(format!("Kossakowski min eigenvalue {:e}", c.kossakowski.min_eig()));
            }
            return Err(Error::Config(format!(
                "model {} failed {}{}",
                self.name,
                failed.join(", "),
                if detail.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", detail.join("; "))
                }
            )));
        }
        let reduced = c.locality?;
        let kin = c.admissibility?;
        Ok(Certified {
            meso: MesoSemigroup::new(reduced.clone(), kin)?,
            reduced,
            kossakowski: c.kossakowski,
            invariance: c.invariance?,
            cp_min_eig: c.cp_min_eig.expect("present when locality passed")?,
        })
    }
}
