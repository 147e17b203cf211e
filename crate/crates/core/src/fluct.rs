//! Fluctuation kinematics.
//!
//! Local fluctuation operators `(r, F_N)`, their Weyl-like exponentials kept
//! in per-site factorised form, the symplectic form `σ_ω`, the covariance
//! `Σ_ω`, abstract Weyl elements composed with CCR phases, and quasi-free
//! characteristic functions.

use nalgebra::DVector;

use crate::chainstate::ProductState;
use crate::error::domain;
use crate::opcore::{
    chain_sites, hermitian_min_eigenvalue, ChainOperator, ProductTerm, Site, SiteOperator,
    HERMITICITY_TOL,
};
use crate::{CMat, Error, RMat, RVec, Result, C64};

const RESIDUE_TOL: f64 = 1e-12;
/// Floor for `min eig(Σ + (i/2)σ)`.
pub const ADMISSIBILITY_TOL: f64 = 1e-10;

/// A set `χ = {x_1, …, x_d}` of hermitian single-site observables bound to
/// a state, with cached means `ω(x_i)`.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    chi: Vec<SiteOperator>,
    means: Vec<f64>,
}

impl ObservableSet {
    pub fn bind(chi: Vec<SiteOperator>, state: &ProductState) -> Result<Self> {
        if chi.is_empty() {
            return domain("observable set is empty");
        }
        let mut means = Vec::with_capacity(chi.len());
        for (i, x) in chi.iter().enumerate() {
            if x.dim() != state.dim() {
                return domain(format!("x_{} has dimension {}, state has {}", i + 1, x.dim(), state.dim()));
            }
            if !x.is_hermitian(HERMITICITY_TOL * x.frobenius().max(1.0)) {
                return domain(format!("x_{} is not hermitian", i + 1));
            }
            means.push(state.site_expect(x).re);
        }
        Ok(ObservableSet { chi, means })
    }

    pub fn len(&self) -> usize {
        self.chi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chi.is_empty()
    }

    pub fn site_dim(&self) -> usize {
        self.chi[0].dim()
    }

    pub fn observables(&self) -> &[SiteOperator] {
        &self.chi
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// `x_i − ω(x_i)`.
    pub fn centred(&self, i: usize) -> SiteOperator {
        let p = self.site_dim();
        &self.chi[i] - &SiteOperator::identity(p).scale_re(self.means[i])
    }

    fn check_len(&self, r: &[f64]) -> Result<()> {
        if r.len() != self.len() {
            return domain(format!("vector has length {}, expected {}", r.len(), self.len()));
        }
        if r.iter().any(|v| !v.is_finite()) {
            return domain("vector has non-finite entries");
        }
        Ok(())
    }

    /// `Σ_i r_i x_i` (uncentred).
    pub fn combination(&self, r: &[f64]) -> Result<SiteOperator> {
        self.check_len(r)?;
        let p = self.site_dim();
        Ok(self
            .chi
            .iter()
            .zip(r)
            .fold(SiteOperator::zeros(p), |acc, (x, &c)| acc + x.scale_re(c)))
    }

    /// `q_r = Σ_i r_i (x_i − ω(x_i))`.
    pub fn q(&self, r: &[f64]) -> Result<SiteOperator> {
        let mean: f64 = r.iter().zip(&self.means).map(|(a, b)| a * b).sum();
        let p = self.site_dim();
        Ok(self.combination(r)? - SiteOperator::identity(p).scale_re(mean))
    }

    /// Check that the cached means agree with `state`.
    pub fn means_consistent(&self, state: &ProductState, tol: f64) -> bool {
        self.chi
            .iter()
            .zip(&self.means)
            .all(|(x, m)| (state.site_expect(x).re - m).abs() <= tol)
    }
}

/// `(r, F_N) = Σ_k q_r^{(k)} / √N_T` on a chain of `n_t` sites.
pub fn local_fluctuation(chi: &ObservableSet, r: &[f64], n_t: usize) -> Result<ChainOperator> {
    check_chain(n_t)?;
    let q = chi.q(r)?.scale_re(1.0 / (n_t as f64).sqrt());
    let sites = chain_sites(n_t);
    let terms = sites
        .iter()
        .map(|&k| ProductTerm::new(C64::new(1.0, 0.0), vec![(k, q.clone())]))
        .collect::<Result<Vec<_>>>()?;
    ChainOperator::from_terms(chi.site_dim(), sites, terms)
}

fn check_chain(n_t: usize) -> Result<()> {
    if n_t == 0 {
        return domain("chain must have at least one site");
    }
    Ok(())
}

/// Single-site factor `e^{i q_r/√N_T}` of `W_N(r)`.
pub fn local_weyl_factor(chi: &ObservableSet, r: &[f64], n_t: usize) -> Result<SiteOperator> {
    check_chain(n_t)?;
    Ok(chi.q(r)?.scale_re(1.0 / (n_t as f64).sqrt()).exp_i())
}

/// `W_N(r) = ⊗_k e^{i q_r^{(k)}/√N_T}`, a single product term.
pub fn local_weyl(chi: &ObservableSet, r: &[f64], n_t: usize) -> Result<ChainOperator> {
    let w = local_weyl_factor(chi, r, n_t)?;
    let sites = chain_sites(n_t);
    let factors: Vec<(Site, SiteOperator)> = sites.iter().map(|&k| (k, w.clone())).collect();
    ChainOperator::from_terms(
        chi.site_dim(),
        sites,
        vec![ProductTerm::new(C64::new(1.0, 0.0), factors)?],
    )
}

/// `ω(W_N(r_1)⋯W_N(r_n))` for a product state, evaluated as the `N_T`-th
/// power of the single-site expectation.
pub fn weyl_product_expectation(
    state: &ProductState,
    chi: &ObservableSet,
    rs: &[&[f64]],
    n_t: usize,
) -> Result<C64> {
    let p = chi.site_dim();
    let mut m = SiteOperator::identity(p);
    for r in rs {
        m = &m * &local_weyl_factor(chi, r, n_t)?;
    }
    Ok(site_power(state.site_expect(&m), n_t))
}

/// `z^n` through repeated squaring, exact for moderate `n`.
pub(crate) fn site_power(z: C64, n: usize) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    let mut base = z;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// `σ^{kl} = −i ω([x_k, x_l])`.
pub fn symplectic_form(state: &ProductState, chi: &ObservableSet) -> Result<RMat> {
    let d = chi.len();
    let x = chi.observables();
    let mut sigma = RMat::zeros(d, d);
    for k in 0..d {
        for l in 0..d {
            let v = -C64::i() * state.site_expect(&x[k].commutator(&x[l]));
            if v.im.abs() > RESIDUE_TOL {
                return Err(Error::Numerical(format!(
                    "symplectic entry ({k},{l}) has imaginary residue {:e}",
                    v.im
                )));
            }
            sigma[(k, l)] = v.re;
        }
    }
    Ok(sigma)
}

/// `Σ^{ij} = Σ_{|k|≤cutoff} ½ω({x_i − ω_i, τ^k(x_j − ω_j)})`.
pub fn covariance(state: &ProductState, chi: &ObservableSet, cutoff: usize) -> Result<RMat> {
    let d = chi.len();
    let mut big = RMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let (a, b) = (chi.centred(i), chi.centred(j));
            let mut v = state.site_expect(&a.anticommutator(&b)) * 0.5;
            // separated sites factorise into ω(a)ω(b) = 0 for centred a, b
            for _ in 1..=cutoff {
                v += state.site_expect(&a) * state.site_expect(&b);
            }
            if v.im.abs() > RESIDUE_TOL {
                return Err(Error::Numerical(format!(
                    "covariance entry ({i},{j}) has imaginary residue {:e}",
                    v.im
                )));
            }
            big[(i, j)] = v.re;
        }
    }
    Ok(big)
}

/// `min eig(Σ + (i/2)σ)`.
pub fn admissibility_min_eig(big_sigma: &RMat, sigma: &RMat) -> f64 {
    let m = CMat::from_fn(big_sigma.nrows(), big_sigma.ncols(), |i, j| {
        C64::new(big_sigma[(i, j)], 0.5 * sigma[(i, j)])
    });
    hermitian_min_eigenvalue(&m)
}

/// `(σ_ω, Σ_ω)` for a set χ under a product state.
#[derive(Clone, Debug)]
pub struct FluctuationKinematics {
    pub sigma: RMat,
    pub big_sigma: RMat,
}

impl FluctuationKinematics {
    pub fn from_state(state: &ProductState, chi: &ObservableSet) -> Result<Self> {
        Self::new(symplectic_form(state, chi)?, covariance(state, chi, 0)?)
    }

    pub fn new(sigma: RMat, big_sigma: RMat) -> Result<Self> {
        let d = sigma.nrows();
        if sigma.ncols() != d || big_sigma.shape() != (d, d) {
            return domain("kinematics matrices must be square and of equal size");
        }
        if (&sigma + sigma.transpose()).amax() > RESIDUE_TOL {
            return domain("symplectic form is not antisymmetric");
        }
        if (&big_sigma - big_sigma.transpose()).amax() > RESIDUE_TOL {
            return domain("covariance is not symmetric");
        }
        let k = FluctuationKinematics { sigma, big_sigma };
        let min = k.admissibility_min_eig();
        if min < -ADMISSIBILITY_TOL {
            return domain(format!("Σ + (i/2)σ has eigenvalue {min:e}"));
        }
        Ok(k)
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn admissibility_min_eig(&self) -> f64 {
        admissibility_min_eig(&self.big_sigma, &self.sigma)
    }
}

/// Centred quasi-free state on the Weyl algebra.
#[derive(Clone, Debug)]
pub struct GaussianState {
    pub big_sigma: RMat,
}

impl GaussianState {
    pub fn new(big_sigma: RMat, sigma: &RMat) -> Result<Self> {
        if big_sigma.shape() != sigma.shape() {
            return domain("covariance and symplectic form differ in size");
        }
        let min = admissibility_min_eig(&big_sigma, sigma);
        if min < -ADMISSIBILITY_TOL {
            return domain(format!("inadmissible covariance, min eigenvalue {min:e}"));
        }
        Ok(GaussianState { big_sigma })
    }

    pub fn mean(&self) -> RVec {
        RVec::zeros(self.big_sigma.nrows())
    }

    /// `Ω(e^{iφ}W(r))`.
    pub fn expect(&self, w: &WeylElement) -> C64 {
        C64::from_polar(gaussian_char(&self.big_sigma, &w.r), w.phase)
    }
}

/// `e^{iφ} W(r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylElement {
    pub r: RVec,
    pub phase: f64,
}

impl WeylElement {
    pub fn new(r: RVec, phase: f64) -> Result<Self> {
        if !phase.is_finite() || r.iter().any(|v| !v.is_finite()) {
            return domain("Weyl element has non-finite entries");
        }
        Ok(WeylElement { r, phase })
    }

    pub fn from_slice(r: &[f64]) -> Self {
        WeylElement {
            r: DVector::from_column_slice(r),
            phase: 0.0,
        }
    }

    pub fn identity(d: usize) -> Self {
        WeylElement {
            r: RVec::zeros(d),
            phase: 0.0,
        }
    }

    pub fn inverse(&self) -> Self {
        WeylElement {
            r: -&self.r,
            phase: -self.phase,
        }
    }
}

/// `σ(r_1, r_2) = r_1ᵀ σ r_2`.
pub fn symplectic_pairing(sigma: &RMat, r1: &RVec, r2: &RVec) -> f64 {
    r1.dot(&(sigma * r2))
}

/// CCR product `W(r_1)W(r_2) = e^{−(i/2)σ(r_1,r_2)} W(r_1 + r_2)`.
pub fn weyl_compose(w1: &WeylElement, w2: &WeylElement, sigma: &RMat) -> Result<WeylElement> {
    if w1.r.len() != w2.r.len() || sigma.nrows() != w1.r.len() {
        return domain("Weyl elements of different dimension");
    }
    Ok(WeylElement {
        r: &w1.r + &w2.r,
        phase: w1.phase + w2.phase - 0.5 * symplectic_pairing(sigma, &w1.r, &w2.r),
    })
}

/// `e^{−½ rᵀΣr}`.
pub fn gaussian_char(big_sigma: &RMat, r: &RVec) -> f64 {
    (-0.5 * r.dot(&(big_sigma * r))).exp()
}

/// `Ω(W(r_1)W(r_2))`.
pub fn gaussian_two_point(big_sigma: &RMat, sigma: &RMat, r1: &RVec, r2: &RVec) -> C64 {
    let s = r1 + r2;
    C64::from_polar(
        gaussian_char(big_sigma, &s),
        -0.5 * symplectic_pairing(sigma, r1, r2),
    )
}

/// `Ω(w_1 w_2 ⋯ w_n)` by iterated composition.
pub fn gaussian_product(big_sigma: &RMat, sigma: &RMat, ws: &[WeylElement]) -> Result<C64> {
    let d = big_sigma.nrows();
    let mut acc = WeylElement::identity(d);
    for w in ws {
        acc = weyl_compose(&acc, w, sigma)?;
    }
    Ok(C64::from_polar(gaussian_char(big_sigma, &acc.r), acc.phase))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chainstate::gibbs_single_site;
    use crate::opcore::{expm, pauli, spin_matrices, DEFAULT_DENSE_CAP};
    use proptest::prelude::*;

    fn spin1(bw: f64) -> (ProductState, ObservableSet) {
        let [j1, j2, j3] = spin_matrices(3);
        let s = gibbs_single_site(&j3, bw).unwrap();
        let chi = ObservableSet::bind(vec![j1, j2], &s).unwrap();
        (s, chi)
    }

    fn sigma_beta(bw: f64) -> f64 {
        (1.0 + bw.cosh()) / (1.0 + 2.0 * bw.cosh())
    }

    #[test]
    fn fluctuation_is_centred() {
        let (s, chi) = spin1(1.0);
        for n in [1, 4, 7] {
            let f = local_fluctuation(&chi, &[0.3, -1.2], n).unwrap();
            assert!(s.expect(&f).norm() < 1e-14);
        }
        let f = local_fluctuation(&chi, &[0.0, 0.0], 3).unwrap();
        assert!(f.simplify().n_terms() == 0);
        let f = local_fluctuation(&chi, &[1.0, 0.0], 1).unwrap();
        let d = f.to_dense(9).unwrap();
        assert!((d.matrix() - spin_matrices(3)[0].matrix()).norm() < 1e-15);
    }

    #[test]
    fn weyl_is_unitary_and_matches_dense_exponential() {
        let (s, chi) = spin1(1.0);
        let w = local_weyl(&chi, &[0.4, 0.9], 3).unwrap();
        let d = w.to_dense(DEFAULT_DENSE_CAP).unwrap();
        let u = d.matrix() * d.matrix().adjoint();
        assert!((u - CMat::identity(27, 27)).camax() < 1e-12);
        let f = local_fluctuation(&chi, &[0.4, 0.9], 3).unwrap();
        let e = expm(&(f.to_dense(DEFAULT_DENSE_CAP).unwrap().matrix() * C64::i()));
        assert!((e - d.matrix()).camax() < 1e-12);
        let one = local_weyl(&chi, &[0.4, 0.9], 1).unwrap().to_dense(9).unwrap();
        let q = chi.q(&[0.4, 0.9]).unwrap();
        assert!((one.matrix() - expm(&(q.matrix() * C64::i()))).camax() < 1e-13);
        let id = local_weyl(&chi, &[0.0, 0.0], 4).unwrap();
        assert!((s.expect(&id) - C64::new(1.0, 0.0)).norm() < 1e-15);
        let direct = s.expect(&w);
        let fast = weyl_product_expectation(&s, &chi, &[&[0.4, 0.9]], 3).unwrap();
        assert!((direct - fast).norm() < 1e-14);
    }

    #[test]
    fn spin_one_kinematics() {
        for bw in [0.0, 1.0, 2.0] {
            let (s, chi) = spin1(bw);
            let k = FluctuationKinematics::from_state(&s, &chi).unwrap();
            let w3 = -2.0 * bw.sinh() / (1.0 + 2.0 * bw.cosh());
            assert!((k.sigma[(0, 1)] - w3).abs() < 1e-14);
            assert!((k.sigma[(1, 0)] + w3).abs() < 1e-14);
            let sb = sigma_beta(bw);
            assert!((&k.big_sigma - RMat::identity(2, 2) * sb).amax() < 1e-14);
            assert!(k.admissibility_min_eig() >= -ADMISSIBILITY_TOL);
        }
        assert!((sigma_beta(0.0) - 2.0 / 3.0).abs() < 1e-15);
        // cutoff does not change a product-state covariance
        let (s, chi) = spin1(1.0);
        assert_eq!(covariance(&s, &chi, 0).unwrap(), covariance(&s, &chi, 5).unwrap());
    }

    #[test]
    fn qubit_kinematics() {
        let [x, y, z] = pauli();
        let m = 0.3;
        let rho = &SiteOperator::identity(2).scale_re(0.5) + &z.scale_re(0.5 * m);
        let s = ProductState::new(rho).unwrap();
        let chi = ObservableSet::bind(vec![x.clone(), y.clone()], &s).unwrap();
        let k = FluctuationKinematics::from_state(&s, &chi).unwrap();
        assert!((k.sigma[(0, 1)] - 2.0 * m).abs() < 1e-14);
        let s = ProductState::maximally_mixed(2);
        let chi = ObservableSet::bind(vec![x, y], &s).unwrap();
        let k = FluctuationKinematics::from_state(&s, &chi).unwrap();
        assert!((&k.big_sigma - RMat::identity(2, 2)).amax() < 1e-15);
        assert!(chi.means_consistent(&s, 1e-12));
    }

    #[test]
    fn characteristic_functions() {
        let sb = RMat::identity(2, 2) * (2.0 / 3.0);
        let r = RVec::from_vec(vec![1.0, 0.0]);
        assert!((gaussian_char(&sb, &r) - (-1.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!((gaussian_char(&sb, &r) - 0.716531).abs() < 1e-6);
        assert_eq!(gaussian_char(&sb, &RVec::zeros(2)), 1.0);
        let e1 = gaussian_char(&sb, &r).ln();
        let e2 = gaussian_char(&sb, &(&r * 2.0)).ln();
        assert!((e2 - 4.0 * e1).abs() < 1e-14);

        let (s, chi) = spin1(1.0);
        let k = FluctuationKinematics::from_state(&s, &chi).unwrap();
        let r1 = RVec::from_vec(vec![1.0, 0.0]);
        let r2 = RVec::from_vec(vec![0.0, 1.0]);
        let v = gaussian_two_point(&k.big_sigma, &k.sigma, &r1, &r2);
        let w3 = k.sigma[(0, 1)];
        assert!((v.norm() - (-sigma_beta(1.0)).exp()).abs() < 1e-14);
        assert!((v.arg() + 0.5 * w3).abs() < 1e-14);
        let w = weyl_compose(&WeylElement::from_slice(&[1.0, 0.0]), &WeylElement::from_slice(&[0.0, 1.0]), &k.sigma).unwrap();
        assert!((w.phase - 0.2876052).abs() < 1e-7);
        let inv = gaussian_two_point(&k.big_sigma, &k.sigma, &r1, &(-&r1));
        assert!((inv - C64::new(1.0, 0.0)).norm() < 1e-15);
        let single = gaussian_two_point(&k.big_sigma, &k.sigma, &r1, &RVec::zeros(2));
        assert!((single.re - gaussian_char(&k.big_sigma, &r1)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (s, _) = spin1(1.0);
        let [x, _, _] = pauli();
        assert!(ObservableSet::bind(vec![x], &s).is_err());
        let [j1, _, _] = spin_matrices(3);
        assert!(ObservableSet::bind(vec![j1.scale(C64::i())], &s).is_err());
        let bad = RMat::identity(2, 2) * 0.1;
        let sigma = RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(GaussianState::new(bad, &sigma).is_err());
    }

    proptest! {
        #[test]
        fn weyl_composition_associative(v in prop::collection::vec(-3.0f64..3.0, 12)) {
            let sigma = RMat::from_row_slice(3, 3, &[0.0, 0.7, -0.2, -0.7, 0.0, 1.1, 0.2, -1.1, 0.0]);
            let w = |i: usize| WeylElement::new(RVec::from_column_slice(&v[4 * i..4 * i + 3]), v[4 * i + 3]).unwrap();
            let (a, b, c) = (w(0), w(1), w(2));
            let left = weyl_compose(&weyl_compose(&a, &b, &sigma).unwrap(), &c, &sigma).unwrap();
            let right = weyl_compose(&a, &weyl_compose(&b, &c, &sigma).unwrap(), &sigma).unwrap();
            prop_assert!((&left.r - &right.r).amax() < 1e-12);
            let dphi = (left.phase - right.phase).rem_euclid(2.0 * std::f64::consts::PI);
            prop_assert!(dphi.min(2.0 * std::f64::consts::PI - dphi) < 1e-12);
            let back = weyl_compose(&a, &a.inverse(), &sigma).unwrap();
            prop_assert!(back.r.amax() == 0.0 && back.phase.abs() < 1e-12);
        }

        #[test]
        fn kinematics_admissible(bw in 0.0f64..3.0, m in -0.95f64..0.95) {
            let (s, chi) = spin1(bw);
            prop_assert!(FluctuationKinematics::from_state(&s, &chi).is_ok());
            let [x, y, z] = pauli();
            let rho = &SiteOperator::identity(2).scale_re(0.5) + &z.scale_re(0.5 * m);
            let s = ProductState::new(rho).unwrap();
            let chi = ObservableSet::bind(vec![x, y, z], &s).unwrap();
            let k = FluctuationKinematics::from_state(&s, &chi).unwrap();
            prop_assert!(k.admissibility_min_eig() >= -ADMISSIBILITY_TOL);
        }
    }
}
