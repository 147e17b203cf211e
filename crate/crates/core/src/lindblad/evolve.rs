use super::{DenseGenerator, LindbladSpec};
use crate::error::domain;
use crate::opcore::{
    chain_sites, expm, expm_action, ChainOperator, CVec, DenseChainOperator, KrylovOptions,
    Site, SiteOperator,
};
use crate::{CMat, Error, Result, C64};

#[derive(Clone, Debug)]
pub struct PropagationOptions {
    /// Largest chain Hilbert dimension materialised densely.
    pub hilbert_cap: usize,
    /// Superoperator dimension up to which `e^{t𝕃}` is formed densely.
    pub dense_superop_cap: usize,
    /// Superoperator dimension up to which the Krylov action is used.
    pub krylov_superop_cap: usize,
    pub krylov: KrylovOptions,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions {
            hilbert_cap: 4096,
            dense_superop_cap: 256,
            krylov_superop_cap: 60_000,
            krylov: KrylovOptions::default(),
        }
    }
}

fn vec_of(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

fn unvec(v: &CVec, d: usize) -> CMat {
    CMat::from_column_slice(d, d, v.as_slice())
}

impl DenseGenerator {
    /// `e^{t𝕃_N}[X]` for a dense `X` on the full chain.
    pub fn evolve(&self, x: &CMat, t: f64, opts: &PropagationOptions) -> Result<CMat> {
        if t < 0.0 || !t.is_finite() {
            return domain(format!("evolution time must be ≥ 0, got {t}"));
        }
        let d = self.hilbert_dim();
        let sd = d * d;
        if sd > opts.krylov_superop_cap {
            return Err(Error::Resource(format!(
                "superoperator dimension {sd} exceeds cap {}; use the factorised path",
                opts.krylov_superop_cap
            )));
        }
        if t == 0.0 {
            return Ok(x.clone());
        }
        if sd <= opts.dense_superop_cap {
            let l = self.superoperator_matrix(opts.dense_superop_cap)?;
            let prop = expm(&(l * C64::new(t, 0.0)));
            return Ok(unvec(&(prop * vec_of(x)), d));
        }
        let out = expm_action(
            |v| vec_of(&self.apply(&unvec(v, d))),
            &vec_of(x),
            t,
            self.norm_bound(),
            &opts.krylov,
        )?;
        Ok(unvec(&out, d))
    }
}

/// `Φ_t^N[X] = e^{t𝕃_N}[X]` on the full chain, dense.
pub fn micro_evolve(
    spec: &LindbladSpec,
    n_t: usize,
    x: &ChainOperator,
    t: f64,
    opts: &PropagationOptions,
) -> Result<DenseChainOperator> {
    let sites = chain_sites(n_t);
    let full = x.clone().with_support(sites.clone())?;
    if full.support().len() != n_t {
        return domain("operator support leaves the chain");
    }
    let p = spec.site_dim() as u64;
    let sd = p.checked_pow(2 * n_t as u32).unwrap_or(u64::MAX);
    if sd > opts.krylov_superop_cap as u64 {
        return Err(Error::Resource(format!(
            "superoperator dimension {p}^{} exceeds cap {}; use the factorised path",
            2 * n_t,
            opts.krylov_superop_cap
        )));
    }
    let gen = DenseGenerator::new(spec, n_t, opts.hilbert_cap)?;
    let dense = full.to_dense(opts.hilbert_cap)?;
    let out = gen.evolve(dense.matrix(), t, opts)?;
    DenseChainOperator::new(spec.site_dim(), sites, out)
}

/// `e^{t𝕃_1}` on column-major `vec` of a single-site operator.
pub fn single_site_propagator(spec: &LindbladSpec, t: f64) -> Result<CMat> {
    if !spec.coupling.is_onsite() {
        return domain("the factorised path needs an on-site coupling profile");
    }
    if t < 0.0 || !t.is_finite() {
        return domain(format!("evolution time must be ≥ 0, got {t}"));
    }
    let gen = DenseGenerator::new(spec, 1, spec.site_dim())?;
    let p = spec.site_dim();
    let l = gen.superoperator_matrix(p * p)?;
    Ok(expm(&(l * C64::new(t, 0.0))))
}

pub fn apply_site_propagator(prop: &CMat, a: &SiteOperator) -> SiteOperator {
    let p = a.dim();
    SiteOperator::from_matrix_unchecked(unvec(&(prop * vec_of(a.matrix())), p))
}

/// Per-site evolution of a product operator under an on-site generator,
/// where `e^{t𝕃_N} = ⊗_k e^{t𝕃_1}`.
pub fn micro_evolve_factorized(
    spec: &LindbladSpec,
    factors: &[(Site, SiteOperator)],
    t: f64,
) -> Result<Vec<(Site, SiteOperator)>> {
    if factors.iter().any(|(_, f)| f.dim() != spec.site_dim()) {
        return domain("factor dimension does not match the generator");
    }
    let prop = single_site_propagator(spec, t)?;
    Ok(factors
        .iter()
        .map(|(s, f)| (*s, apply_site_propagator(&prop, f)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{CouplingProfile, DissipatorForm};
    use crate::opcore::{embed, pauli, spin_matrices, ProductTerm};

    fn spin1_spec(omega: f64, lambda: f64) -> LindbladSpec {
        let [_, _, j3] = spin_matrices(3);
        LindbladSpec::new(
            j3.scale_re(omega),
            vec![j3],
            CMat::identity(1, 1),
            CouplingProfile::Onsite { lambda },
            DissipatorForm::DoubleCommutator,
        )
        .unwrap()
    }

    fn max_diff(a: &CMat, b: &CMat) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn single_site_closed_form() {
        let (omega, lambda) = (1.0, 1.0);
        let spec = spin1_spec(omega, lambda);
        let [j1, j2, _] = spin_matrices(3);
        for t in [0.0, 0.3, 1.7] {
            let out = micro_evolve(&spec, 1, &embed(&j1, 0, &[0]).unwrap(), t, &Default::default()).unwrap();
            let want = (j1.scale_re((omega * t).cos()) - j2.scale_re((omega * t).sin()))
                .scale_re((-lambda * t / 2.0).exp());
            assert!(max_diff(out.matrix(), want.matrix()) < 1e-12);
        }
    }

    #[test]
    fn unital_and_semigroup() {
        let [_, _, z] = pauli();
        let [x, y, _] = pauli();
        let spec = LindbladSpec::new(
            z.scale_re(0.5),
            vec![z.clone(), (&x + &y.scale(C64::i())).scale_re(0.5)],
            CMat::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.3, 0.0)]),
            CouplingProfile::Geometric { lambda: 0.5, q: 0.3 },
            DissipatorForm::Standard,
        )
        .unwrap();
        let opts = PropagationOptions::default();
        let id = ChainOperator::identity(2, chain_sites(3)).unwrap();
        let out = micro_evolve(&spec, 3, &id, 1.3, &opts).unwrap();
        assert!(max_diff(out.matrix(), &CMat::identity(8, 8)) < 1e-12);
        let x0 = embed(&x, 0, &chain_sites(3)).unwrap().mul(&embed(&y, 1, &chain_sites(3)).unwrap()).unwrap();
        let gen = DenseGenerator::new(&spec, 3, 4096).unwrap();
        let xd = x0.with_support(chain_sites(3)).unwrap().to_dense(64).unwrap().into_matrix();
        let a = gen.evolve(&gen.evolve(&xd, 0.4, &opts).unwrap(), 0.9, &opts).unwrap();
        let b = gen.evolve(&xd, 1.3, &opts).unwrap();
        assert!(max_diff(&a, &b) < 1e-10);
        assert_eq!(gen.evolve(&xd, 0.0, &opts).unwrap(), xd);
        assert!(gen.evolve(&xd, -1.0, &opts).is_err());
    }

    #[test]
    fn krylov_and_dense_routes_agree() {
        let [_, _, z] = pauli();
        let [x, _, _] = pauli();
        let spec = LindbladSpec::new(
            z.scale_re(0.5) + x.scale_re(0.2),
            vec![z],
            CMat::identity(1, 1),
            CouplingProfile::Geometric { lambda: 0.5, q: 0.3 },
            DissipatorForm::DoubleCommutator,
        )
        .unwrap();
        let n = 4;
        let sites = chain_sites(n);
        let op = embed(&x, 0, &sites).unwrap().with_support(sites.clone()).unwrap();
        let krylov = micro_evolve(&spec, n, &op, 1.1, &PropagationOptions::default()).unwrap();
        let dense_opts = PropagationOptions { dense_superop_cap: 256 * 256, ..Default::default() };
        let dense = micro_evolve(&spec, n, &op, 1.1, &dense_opts).unwrap();
        assert!(max_diff(krylov.matrix(), dense.matrix()) < 1e-10);
    }

    #[test]
    fn factorised_agrees_with_dense() {
        let spec = spin1_spec(1.0, 1.0);
        let [j1, j2, j3] = spin_matrices(3);
        let sites = chain_sites(3);
        let factors = vec![(-1, j1.clone()), (0, (&j2 + &j3).exp_i()), (1, j3.clone())];
        let op = ChainOperator::from_terms(3, sites.clone(), vec![ProductTerm::new(C64::new(1.0, 0.0), factors.clone()).unwrap()]).unwrap();
        for t in [0.1, 1.0, 2.0] {
            let dense = micro_evolve(&spec, 3, &op, t, &Default::default()).unwrap();
            let fac = micro_evolve_factorized(&spec, &factors, t).unwrap();
            let fop = ChainOperator::from_terms(3, sites.clone(), vec![ProductTerm::new(C64::new(1.0, 0.0), fac).unwrap()]).unwrap();
            let fd = fop.to_dense(4096).unwrap();
            assert!(max_diff(fd.matrix(), dense.matrix()) < 1e-10);
        }
        let same = micro_evolve_factorized(&spec, &factors, 0.0).unwrap();
        assert_eq!(same, factors);
    }

    #[test]
    fn caps_and_domains() {
        let spec = spin1_spec(1.0, 1.0);
        let [j1, _, _] = spin_matrices(3);
        let op = embed(&j1, 0, &[0]).unwrap();
        assert!(matches!(
            micro_evolve(&spec, 7, &op, 1.0, &Default::default()),
            Err(Error::Resource(_))
        ));
        let [_, _, z] = pauli();
        let off = LindbladSpec::new(
            z.clone(),
            vec![z.clone()],
            CMat::identity(1, 1),
            CouplingProfile::Geometric { lambda: 1.0, q: 0.3 },
            DissipatorForm::DoubleCommutator,
        )
        .unwrap();
        assert!(matches!(micro_evolve_factorized(&off, &[(0, z)], 1.0), Err(Error::Domain(_))));
    }
}
