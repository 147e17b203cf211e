use std::collections::BTreeSet;

use super::{apply_generator, apply_generator_parts, LindbladSpec};
use crate::chainstate::ProductState;
use crate::fluct::ObservableSet;
use crate::opcore::{
    chain_sites, embed, hermitian_min_eigenvalue, ChainOperator, MatrixBasis, ProductTerm, Site,
    SiteOperator, DEFAULT_DENSE_CAP,
};
use crate::{Error, RMat, Result, C64};

/// Residual (operator norm) above which the locality condition fails.
pub const LOCALITY_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-12;

/// The reduced matrices `ℋ`, `𝒟` and `ℒ = ℋ + 𝒟` with
/// `𝕃_N[x_i] = Σ_j ℒ_{ij} x_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedGenerator {
    h_mat: RMat,
    d_mat: RMat,
    l_mat: RMat,
}

impl ReducedGenerator {
    pub fn new(h_mat: RMat, d_mat: RMat) -> Result<Self> {
        let d = h_mat.nrows();
        if h_mat.shape() != (d, d) || d_mat.shape() != (d, d) {
            return Err(Error::Domain("ℋ and 𝒟 must be square and equal in size".into()));
        }
        let l_mat = &h_mat + &d_mat;
        Ok(ReducedGenerator { h_mat, d_mat, l_mat })
    }

    pub fn dim(&self) -> usize {
        self.l_mat.nrows()
    }

    pub fn h_mat(&self) -> &RMat {
        &self.h_mat
    }

    pub fn d_mat(&self) -> &RMat {
        &self.d_mat
    }

    pub fn l_mat(&self) -> &RMat {
        &self.l_mat
    }
}

/// Projection of a chain operator onto `span{x_j^{(k)}}` in the
/// Hilbert–Schmidt inner product. Returns coefficients and the
/// operator-norm residual.
fn project(
    y: &ChainOperator,
    chi: &ObservableSet,
    gram_inv: &RMat,
    k: Site,
) -> Result<(Vec<f64>, f64)> {
    let p = chi.site_dim() as f64;
    let xs = chi.observables();
    let d = xs.len();
    let mut b = vec![C64::new(0.0, 0.0); d];
    for t in y.terms() {
        // normalised trace over every site but k
        let mut rest = t.coeff();
        let mut at_k: Option<&SiteOperator> = None;
        for (s, f) in t.factors() {
            if *s == k {
                at_k = Some(f);
            } else {
                rest *= f.trace() / p;
            }
        }
        for (j, x) in xs.iter().enumerate() {
            let tr = match at_k {
                Some(f) => (x.matrix() * f.matrix()).trace(),
                None => x.trace(),
            };
            b[j] += rest * tr;
        }
    }
    let mut coeffs = vec![0.0; d];
    for i in 0..d {
        let c: C64 = (0..d).map(|j| b[j] * gram_inv[(i, j)]).sum();
        if c.im.abs() > LOCALITY_TOL {
            return Err(Error::Numerical(format!(
                "reduced coefficient has imaginary residue {:e}",
                c.im
            )));
        }
        coeffs[i] = c.re;
    }
    let mut diff = y.clone();
    for (j, x) in xs.iter().enumerate() {
        if coeffs[j] != 0.0 {
            diff.push_term(ProductTerm::new(C64::new(-coeffs[j], 0.0), vec![(k, x.clone())])?)?;
        }
    }
    Ok((coeffs, residual_norm(&diff.simplify())?))
}

/// Operator norm of what is left after projection; the sum of term weights
/// bounds it when the support is too large to densify.
fn residual_norm(diff: &ChainOperator) -> Result<f64> {
    if diff.n_terms() == 0 {
        return Ok(0.0);
    }
    let used: BTreeSet<Site> = diff.terms().iter().flat_map(|t| t.sites()).collect();
    let small = ChainOperator::from_terms(diff.dim(), used.into_iter().collect(), diff.terms().to_vec())?;
    match small.to_dense(DEFAULT_DENSE_CAP) {
        Ok(m) => Ok(m.norm()),
        Err(Error::Resource(_)) => Ok(small.terms().iter().map(ProductTerm::weight).sum()),
        Err(e) => Err(e),
    }
}

fn gram_inverse(chi: &ObservableSet) -> Result<RMat> {
    let xs = chi.observables();
    let d = xs.len();
    let g = RMat::from_fn(d, d, |i, j| (xs[i].matrix() * xs[j].matrix()).trace().re);
    g.try_inverse()
        .ok_or_else(|| Error::Domain("observables in χ are linearly dependent".into()))
}

/// Extract `ℋ` and `𝒟` from `𝕃_N` acting on `x_i` at the centre site and
/// verify the reconstruction at both chain ends.
pub fn check_locality(
    spec: &LindbladSpec,
    chi: &ObservableSet,
    n_t: usize,
) -> Result<ReducedGenerator> {
    if chi.site_dim() != spec.site_dim() {
        return Err(Error::Domain("χ and generator act on different site dimensions".into()));
    }
    let sites = chain_sites(n_t);
    let gram_inv = gram_inverse(chi)?;
    let d = chi.len();
    let mut h_mat = RMat::zeros(d, d);
    let mut d_mat = RMat::zeros(d, d);
    for (i, x) in chi.observables().iter().enumerate() {
        let xi = embed(x, 0, &[0])?;
        let parts = apply_generator_parts(spec, n_t, &xi)?;
        let (hc, hres) = project(&parts.hamiltonian, chi, &gram_inv, 0)?;
        let (dc, dres) = project(&parts.dissipator, chi, &gram_inv, 0)?;
        let residual = hres.max(dres);
        if residual > LOCALITY_TOL {
            return Err(Error::LocalityViolation { index: i, residual });
        }
        for j in 0..d {
            h_mat[(i, j)] = hc[j];
            d_mat[(i, j)] = dc[j];
        }
    }
    let reduced = ReducedGenerator::new(h_mat, d_mat)?;
    let mut probe: Vec<Site> = vec![sites[0], 0, sites[n_t - 1]];
    probe.dedup();
    for &k in &probe {
        for (i, x) in chi.observables().iter().enumerate() {
            let out = apply_generator(spec, n_t, &embed(x, k, &[k])?)?;
            let mut diff = out;
            for (j, xj) in chi.observables().iter().enumerate() {
                let c = reduced.l_mat[(i, j)];
                if c != 0.0 {
                    diff.push_term(ProductTerm::new(C64::new(-c, 0.0), vec![(k, xj.clone())])?)?;
                }
            }
            let residual = residual_norm(&diff.simplify())?;
            if residual > LOCALITY_TOL {
                return Err(Error::LocalityViolation { index: i, residual });
            }
        }
    }
    Ok(reduced)
}

#[derive(Clone, Debug, PartialEq)]
pub struct KossakowskiReport {
    pub passed: bool,
    /// Smallest eigenvalue of the Toeplitz matrix `J_{kl}`.
    pub j_min_eig: f64,
    /// Smallest eigenvalue of `D`.
    pub d_min_eig: f64,
}

impl KossakowskiReport {
    pub fn min_eig(&self) -> f64 {
        self.j_min_eig.min(self.d_min_eig)
    }
}

/// `J ⪰ 0` and `D ⪰ 0` on `n_t` sites, hence `J ⊗ D ⪰ 0`.
pub fn kossakowski_check(spec: &LindbladSpec, n_t: usize) -> KossakowskiReport {
    let j_min_eig = hermitian_min_eigenvalue(&spec.coupling.toeplitz(n_t.max(1)));
    let d_min_eig = if spec.d.is_empty() {
        0.0
    } else {
        hermitian_min_eigenvalue(&spec.d)
    };
    KossakowskiReport {
        passed: j_min_eig >= -PSD_TOL && d_min_eig >= -PSD_TOL,
        j_min_eig,
        d_min_eig,
    }
}

/// `max |ω(𝕃_N[X])|` over basis products `X` on `{0}`, `{0,1}` and `{0,2}`
/// (pairs that fit in the chain).
pub fn invariance_probe(spec: &LindbladSpec, state: &ProductState, n_t: usize) -> Result<f64> {
    let p = spec.site_dim();
    if state.dim() != p {
        return Err(Error::Domain("state and generator act on different site dimensions".into()));
    }
    let basis = MatrixBasis::gell_mann(p)?;
    let sites = chain_sites(n_t);
    let mut worst = 0.0f64;
    for o in basis.elements() {
        let x = embed(o, 0, &[0])?;
        worst = worst.max(state.expect(&apply_generator(spec, n_t, &x)?).norm());
    }
    for far in [1, 2] {
        if !sites.contains(&far) {
            continue;
        }
        for oa in basis.elements() {
            for ob in basis.elements() {
                let x = ChainOperator::from_terms(
                    p,
                    vec![0, far],
                    vec![ProductTerm::new(C64::new(1.0, 0.0), vec![(0, oa.clone()), (far, ob.clone())])?],
                )?;
                worst = worst.max(state.expect(&apply_generator(spec, n_t, &x)?).norm());
            }
        }
    }
    Ok(worst)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::chainstate::gibbs_single_site;
    use crate::lindblad::{CouplingProfile, DissipatorForm};
    use crate::opcore::{pauli, spin_matrices};
    use crate::CMat;
    use nalgebra::DVector;

    fn spin1(omega: f64, lambda: f64, bw: f64) -> (LindbladSpec, ProductState, ObservableSet) {
        let [j1, j2, j3] = spin_matrices(3);
        let spec = LindbladSpec::new(
            j3.scale_re(omega),
            vec![j3.clone()],
            CMat::identity(1, 1),
            CouplingProfile::Onsite { lambda },
            DissipatorForm::DoubleCommutator,
        )
        .unwrap();
        let state = gibbs_single_site(&j3.scale_re(omega), bw / omega).unwrap();
        let chi = ObservableSet::bind(vec![j1, j2], &state).unwrap();
        (spec, state, chi)
    }

    fn qubit(q: f64, form: DissipatorForm) -> (LindbladSpec, ProductState, ObservableSet) {
        let [x, y, z] = pauli();
        let spec = LindbladSpec::new(
            z.scale_re(0.5),
            vec![z.clone()],
            CMat::identity(1, 1),
            CouplingProfile::Geometric { lambda: 0.5, q },
            form,
        )
        .unwrap();
        let state = gibbs_single_site(&z.scale_re(0.5), 1.0).unwrap();
        let chi = ObservableSet::bind(vec![x, y], &state).unwrap();
        (spec, state, chi)
    }

    #[test]
    fn spin_one_reduced_matrix() {
        for (omega, lambda) in [(1.0, 0.5), (2.0, 1.0)] {
            let (spec, _, chi) = spin1(omega, lambda, 1.0);
            let red = check_locality(&spec, &chi, 3).unwrap();
            let want = RMat::from_row_slice(2, 2, &[-lambda / 2.0, -omega, omega, -lambda / 2.0]);
            assert!((red.l_mat() - &want).amax() < 1e-12);
            assert!((red.d_mat() - RMat::identity(2, 2) * (-lambda / 2.0)).amax() < 1e-12);
        }
    }

    #[test]
    fn qubit_reduced_matrices() {
        for form in [DissipatorForm::DoubleCommutator, DissipatorForm::Standard] {
            let (spec, _, chi) = qubit(0.3, form);
            let red = check_locality(&spec, &chi, 5).unwrap();
            assert!((red.d_mat() - RMat::identity(2, 2) * (-2.0 * 0.5)).amax() < 1e-12);
            let h = RMat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
            assert!((red.h_mat() - h).amax() < 1e-12);
        }
    }

    #[test]
    fn non_closed_span_is_a_violation() {
        let [x, _, z] = pauli();
        let spec = LindbladSpec::new(
            z.clone(),
            vec![z],
            CMat::identity(1, 1),
            CouplingProfile::Onsite { lambda: 1.0 },
            DissipatorForm::DoubleCommutator,
        )
        .unwrap();
        let chi = ObservableSet::bind(vec![x], &ProductState::maximally_mixed(2)).unwrap();
        match check_locality(&spec, &chi, 1) {
            Err(Error::LocalityViolation { index, residual }) => {
                assert_eq!(index, 0);
                assert!((residual - 2.0).abs() < 1e-12);
            }
            other => panic!("expected a locality violation, got {other:?}"),
        }
    }

    #[test]
    fn kossakowski_examples() {
        let (spec, _, _) = spin1(1.0, 0.7, 1.0);
        let r = kossakowski_check(&spec, 5);
        assert!(r.passed && (r.j_min_eig - 0.7).abs() < 1e-14);
        let (mut spec, _, _) = qubit(0.5, DissipatorForm::DoubleCommutator);
        spec.coupling = CouplingProfile::Geometric { lambda: 1.0, q: 0.5 };
        assert!(kossakowski_check(&spec, 5).passed);
        spec.coupling = CouplingProfile::Custom {
            values: vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
        };
        let r = kossakowski_check(&spec, 3);
        assert!(!r.passed);
        assert!((r.j_min_eig - (1.0 - 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn invariance_examples() {
        let (spec, state, _) = spin1(1.0, 1.0, 1.0);
        assert!(invariance_probe(&spec, &state, 3).unwrap() < 1e-12);
        let (spec, state, _) = qubit(0.3, DissipatorForm::DoubleCommutator);
        assert!(invariance_probe(&spec, &state, 5).unwrap() < 1e-12);
        let [x, _, _] = pauli();
        let rho = &SiteOperator::identity(2).scale_re(0.5) + &x.scale_re(0.2);
        let coherent = ProductState::new(rho).unwrap();
        assert!(invariance_probe(&spec, &coherent, 5).unwrap() > 0.1);
    }

    #[test]
    fn scalar_constraint_under_invariance() {
        // (r, ℒ x_ω) = 0 whenever the state is invariant
        let (spec, state, chi) = spin1(1.0, 1.0, 1.5);
        let red = check_locality(&spec, &chi, 1).unwrap();
        assert!(invariance_probe(&spec, &state, 3).unwrap() < 1e-10);
        let xw = DVector::from_column_slice(chi.means());
        let lx = red.l_mat() * xw;
        assert!(lx.amax() < 1e-10);
    }
}
