use super::{apply_generator, CouplingProfile, DenseGenerator, LindbladSpec, ReducedGenerator};
use crate::chainstate::ProductState;
use crate::error::domain;
use crate::fluct::{local_fluctuation, local_weyl, ObservableSet};
use crate::opcore::{chain_sites, spectral_norm, ChainOperator, ProductTerm, SiteOperator};
use crate::{CMat, Result, C64};

/// `S(r;N) = ½(𝕃[F]F + F𝕃[F] − 𝕃[F²])` with `F = (r, F_N)`.
pub fn s_operator(
    spec: &LindbladSpec,
    chi: &ObservableSet,
    r: &[f64],
    n_t: usize,
) -> Result<ChainOperator> {
    let f = local_fluctuation(chi, r, n_t)?;
    let lf = apply_generator(spec, n_t, &f)?;
    let f2 = f.mul(&f)?.simplify();
    let lf2 = apply_generator(spec, n_t, &f2)?;
    let sum = lf.mul(&f)?.add(&f.mul(&lf)?)?.sub(&lf2)?;
    Ok(sum.scale(C64::new(0.5, 0.0)).simplify())
}

/// `(ω(S), ω(S²))`, real parts.
pub fn s_operator_moments(
    spec: &LindbladSpec,
    chi: &ObservableSet,
    state: &ProductState,
    r: &[f64],
    n_t: usize,
) -> Result<(f64, f64)> {
    let s = s_operator(spec, chi, r, n_t)?;
    Ok((state.expect(&s).re, state.expect_product(&s, &s).re))
}

/// `R_N = (1/N_T) Σ_{kl} J_{kl} a^{(k)} b^{(l)}`.
pub fn rn_operator(
    a: &SiteOperator,
    b: &SiteOperator,
    profile: &CouplingProfile,
    n_t: usize,
) -> Result<ChainOperator> {
    a.check_same_dim(b)?;
    let sites = chain_sites(n_t);
    let mut terms = Vec::new();
    for &k in &sites {
        for &l in &sites {
            let j = profile.coupling(k, l) / n_t as f64;
            if j.norm() == 0.0 {
                continue;
            }
            let t = if k == l {
                ProductTerm::new(j, vec![(k, a * b)])?
            } else {
                ProductTerm::new(j, vec![(k, a.clone()), (l, b.clone())])?
            };
            terms.push(t);
        }
    }
    ChainOperator::from_terms(a.dim(), sites, terms)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RnStat {
    pub n_t: usize,
    /// `ω(R_N)`.
    pub mean: C64,
    /// `R = J(0)ω(ab) + ω(a)ω(b) Σ_{p≠0} J(p)`.
    pub limit: C64,
    /// `ω((R_N − R)†(R_N − R))`.
    pub variance: f64,
}

/// Exact mean and variance of `R_N` under a product state in
/// `O(N_T · range)` scalar work.
///
/// Writing `a = α + ã`, `b = β + b̃`, `ab = ω(ab) + c̃`, the centred part of
/// `N_T R_N` is `Σ_s L_s^{(s)} + Σ_{k≠l} J_{kl} ã^{(k)} b̃^{(l)}` with
/// `L_s = J(0)c̃ + α u_s b̃ + β w_s ã`; linear and bilinear pieces are
/// uncorrelated and the bilinear one pairs only `(k,l)` with `(k,l)` or
/// `(l,k)`.
pub fn rn_statistics(
    state: &ProductState,
    a: &SiteOperator,
    b: &SiteOperator,
    profile: &CouplingProfile,
    n_list: &[usize],
) -> Result<Vec<RnStat>> {
    a.check_same_dim(b)?;
    if a.dim() != state.dim() {
        return domain("operators and state have different site dimensions");
    }
    profile.validate()?;
    let p = a.dim();
    let id = SiteOperator::identity(p);
    let ev = |x: &SiteOperator| state.site_expect(x);
    let (alpha, beta) = (ev(a), ev(b));
    let ab = a * b;
    let mab = ev(&ab);
    let at = a - &id.scale(alpha);
    let bt = b - &id.scale(beta);
    let ct = &ab - &id.scale(mab);
    let j0 = profile.value(0);
    let limit = j0 * mab + alpha * beta * profile.off_site_sum();
    let aa = ev(&(&at.dagger() * &at)).re;
    let bb = ev(&(&bt.dagger() * &bt)).re;
    let ab_mix = ev(&(&at.dagger() * &bt));
    let ba_mix = ev(&(&bt.dagger() * &at));
    let range = profile.range() as i64;
    let mut out = Vec::with_capacity(n_list.len());
    for &n_t in n_list {
        if n_t == 0 {
            return domain("chain must have at least one site");
        }
        let nf = n_t as f64;
        let n = n_t as i64;
        let mut off_sum = C64::new(0.0, 0.0);
        let mut linear = 0.0;
        let mut bilinear = C64::new(0.0, 0.0);
        for s in 0..n {
            let mut u = C64::new(0.0, 0.0);
            let mut w = C64::new(0.0, 0.0);
            for o in (s - range).max(0)..=(s + range).min(n - 1) {
                if o == s {
                    continue;
                }
                let jos = profile.value(o - s);
                let jso = profile.value(s - o);
                u += jos;
                w += jso;
                bilinear += jso.norm_sqr() * aa * bb + jso.conj() * jos * ab_mix * ba_mix;
            }
            off_sum += w;
            let ls = &(&ct.scale(j0) + &bt.scale(alpha * u)) + &at.scale(beta * w);
            linear += ev(&(&ls.dagger() * &ls)).re;
        }
        let mean = (j0 * nf * mab + alpha * beta * off_sum) / nf;
        let variance = (mean - limit).norm_sqr() + (linear + bilinear.re) / (nf * nf);
        out.push(RnStat {
            n_t,
            mean,
            limit,
            variance,
        });
    }
    Ok(out)
}

/// `‖[W_N(r), R_N]‖`, dense.
pub fn rn_commutator_norm(
    chi: &ObservableSet,
    r: &[f64],
    a: &SiteOperator,
    b: &SiteOperator,
    profile: &CouplingProfile,
    n_t: usize,
    cap: usize,
) -> Result<f64> {
    let w = local_weyl(chi, r, n_t)?.to_dense(cap)?;
    let rn = rn_operator(a, b, profile, n_t)?.to_dense(cap)?;
    Ok(w.commutator(&rn)?.norm())
}

/// `‖𝕃_N[W_N(r)] − (i𝕃_N[(r,F_N)] − ½[(r,F_N), (r,ℒF_N)] + S(r;N)) W_N(r)‖`,
/// evaluated densely on the whole chain.
pub fn generator_action_residual(
    spec: &LindbladSpec,
    chi: &ObservableSet,
    reduced: &ReducedGenerator,
    r: &[f64],
    n_t: usize,
    cap: usize,
) -> Result<f64> {
    let gen = DenseGenerator::new(spec, n_t, cap)?;
    let w = local_weyl(chi, r, n_t)?.to_dense(cap)?.into_matrix();
    let f = local_fluctuation(chi, r, n_t)?.to_dense(cap)?.into_matrix();
    let lr: Vec<f64> = (reduced.l_mat().transpose() * nalgebra::DVector::from_column_slice(r))
        .iter()
        .copied()
        .collect();
    let lf_vec = local_fluctuation(chi, &lr, n_t)?.to_dense(cap)?.into_matrix();
    let lw = gen.apply(&w);
    let lf = gen.apply(&f);
    let lf2 = gen.apply(&(&f * &f));
    let half = C64::new(0.5, 0.0);
    let s = (&lf * &f + &f * &lf - lf2) * half;
    let comm = &f * &lf_vec - &lf_vec * &f;
    let approx: CMat = (lf * C64::i() - comm * half + s) * &w;
    Ok(spectral_norm(&(lw - approx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chainstate::gibbs_single_site;
    use crate::lindblad::{check_locality, DissipatorForm};
    use crate::opcore::{pauli, spin_matrices};
    use crate::RMat;

    fn nn() -> CouplingProfile {
        CouplingProfile::Custom {
            values: vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        }
    }

    /// Oracle: ω((R_N − R)†(R_N − R)) from the explicit operator.
    fn brute_variance(state: &ProductState, a: &SiteOperator, b: &SiteOperator, prof: &CouplingProfile, n_t: usize, limit: C64) -> f64 {
        let rn = rn_operator(a, b, prof, n_t).unwrap();
        let id = ChainOperator::identity(a.dim(), chain_sites(n_t)).unwrap();
        let d = rn.sub(&id.scale(limit)).unwrap();
        state.expect_product(&d.dagger(), &d).re
    }

    #[test]
    fn rn_closed_form_matches_operator() {
        let [x, y, z] = pauli();
        let rho = &(&SiteOperator::identity(2).scale_re(0.5) + &z.scale_re(0.2)) + &x.scale_re(0.1);
        let state = ProductState::new(rho).unwrap();
        let a = &x + &z.scale_re(0.5);
        let b = &y.scale_re(0.7) + &z;
        let profiles = [
            nn(),
            CouplingProfile::Geometric { lambda: 1.0, q: 0.4 },
            CouplingProfile::Custom { values: vec![C64::new(1.0, 0.0), C64::new(0.3, 0.2), C64::new(-0.1, 0.05)] },
        ];
        for prof in &profiles {
            let stats = rn_statistics(&state, &a, &b, prof, &[1, 2, 5, 8]).unwrap();
            for s in stats {
                let rn = rn_operator(&a, &b, prof, s.n_t).unwrap();
                assert!((state.expect(&rn) - s.mean).norm() < 1e-12);
                let brute = brute_variance(&state, &a, &b, prof, s.n_t, s.limit);
                assert!((brute - s.variance).abs() < 1e-11, "{prof:?} n={} {brute} {}", s.n_t, s.variance);
            }
        }
    }

    #[test]
    fn rn_reference_values() {
        let [_, _, z] = pauli();
        let state = ProductState::maximally_mixed(2);
        let on = rn_statistics(&state, &z, &z, &CouplingProfile::Onsite { lambda: 1.3 }, &[3, 10]).unwrap();
        assert!(on.iter().all(|s| s.variance.abs() < 1e-15 && (s.mean.re - 1.3).abs() < 1e-15));
        for s in rn_statistics(&state, &z, &z, &nn(), &[10, 100, 1000]).unwrap() {
            let n = s.n_t as f64;
            assert!(s.mean.norm() < 1e-15);
            assert!((s.variance - 4.0 * (n - 1.0) / (n * n)).abs() < 1e-14);
        }
    }

    #[test]
    fn s_operator_limits() {
        let [j1, j2, j3] = spin_matrices(3);
        let spec = LindbladSpec::new(
            j3.clone(),
            vec![j3.clone()],
            CMat::identity(1, 1),
            CouplingProfile::Onsite { lambda: 1.0 },
            DissipatorForm::DoubleCommutator,
        )
        .unwrap();
        let state = gibbs_single_site(&j3, 1.0).unwrap();
        let chi = ObservableSet::bind(vec![j1, j2], &state).unwrap();
        let red = check_locality(&spec, &chi, 1).unwrap();
        let sb = (1.0 + 1f64.cosh()) / (1.0 + 2.0 * 1f64.cosh());
        let target = (red.l_mat() * RMat::identity(2, 2) * sb)[(0, 0)];
        assert!((target + 0.5 * sb).abs() < 1e-14);
        let mut prev = f64::INFINITY;
        for n in [3, 9, 27] {
            let (m, m2) = s_operator_moments(&spec, &chi, &state, &[1.0, 0.0], n).unwrap();
            assert!((m - target).abs() < 1e-12);
            let var = m2 - m * m;
            assert!(var < prev && var >= -1e-12);
            prev = var;
        }
        assert_eq!(s_operator_moments(&spec, &chi, &state, &[0.0, 0.0], 3).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn residual_vanishes_at_zero_vector() {
        let [x, y, z] = pauli();
        let spec = LindbladSpec::new(
            z.scale_re(0.5),
            vec![z.clone()],
            CMat::identity(1, 1),
            CouplingProfile::Geometric { lambda: 0.5, q: 0.3 },
            DissipatorForm::DoubleCommutator,
        )
        .unwrap();
        let state = gibbs_single_site(&z.scale_re(0.5), 1.0).unwrap();
        let chi = ObservableSet::bind(vec![x, y], &state).unwrap();
        let red = check_locality(&spec, &chi, 3).unwrap();
        assert_eq!(generator_action_residual(&spec, &chi, &red, &[0.0, 0.0], 3, 4096).unwrap(), 0.0);
        let r1 = generator_action_residual(&spec, &chi, &red, &[1.0, 0.0], 1, 4096).unwrap();
        let r3 = generator_action_residual(&spec, &chi, &red, &[1.0, 0.0], 3, 4096).unwrap();
        assert!(r3 < r1);
    }
}
