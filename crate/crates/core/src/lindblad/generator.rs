use std::collections::BTreeSet;

use super::{DissipatorForm, LindbladSpec};
use crate::error::domain;
use crate::opcore::{
    chain_sites, kron, ChainOperator, DenseChainOperator, ProductTerm, Site, SiteOperator,
};
use crate::{CMat, Error, Result, C64};

/// Hamiltonian and dissipative parts of `𝕃_N[X]`.
#[derive(Clone, Debug)]
pub struct GeneratorParts {
    pub hamiltonian: ChainOperator,
    pub dissipator: ChainOperator,
}

impl GeneratorParts {
    pub fn total(&self) -> Result<ChainOperator> {
        Ok(self.hamiltonian.add(&self.dissipator)?.simplify())
    }
}

fn single(site: Site, f: &SiteOperator) -> ProductTerm {
    ProductTerm::new(C64::new(1.0, 0.0), vec![(site, f.clone())]).expect("single factor")
}

fn check_support(n_t: usize, x: &ChainOperator) -> Result<Vec<Site>> {
    if n_t == 0 {
        return domain("chain must have at least one site");
    }
    let sites = chain_sites(n_t);
    let (lo, hi) = (sites[0], sites[n_t - 1]);
    if x.support().iter().any(|s| *s < lo || *s > hi) {
        return domain(format!("operator support leaves the chain [{lo}, {hi}]"));
    }
    Ok(sites)
}

/// `𝕃_N[X]` on the product-term representation, split into its
/// Hamiltonian and dissipative parts.
pub fn apply_generator_parts(
    spec: &LindbladSpec,
    n_t: usize,
    x: &ChainOperator,
) -> Result<GeneratorParts> {
    if x.dim() != spec.site_dim() {
        return domain("operator and generator act on different site dimensions");
    }
    let sites = check_support(n_t, x)?;
    let (lo, hi) = (sites[0], sites[n_t - 1]);
    let range = spec.coupling.range() as Site;
    let half = C64::new(0.5, 0.0);
    let daggers: Vec<SiteOperator> = spec.kraus.iter().map(SiteOperator::dagger).collect();
    let mut ham = Vec::new();
    let mut dis = Vec::new();
    for t in x.terms() {
        for (s, f) in t.factors() {
            ham.push(t.with_factor(*s, spec.h.commutator(f)).scaled(C64::i()));
        }
        let support: BTreeSet<Site> = t.sites().collect();
        let mut pairs = Vec::new();
        for &k in &support {
            for l in (k - range).max(lo)..=(k + range).min(hi) {
                match spec.form {
                    DissipatorForm::DoubleCommutator if !support.contains(&l) => {}
                    _ => pairs.push((k, l)),
                }
            }
        }
        if spec.form == DissipatorForm::Standard {
            for &l in &support {
                for k in (l - range).max(lo)..=(l + range).min(hi) {
                    if !support.contains(&k) {
                        pairs.push((k, l));
                    }
                }
            }
        }
        for (k, l) in pairs {
            let jkl = spec.coupling.coupling(k, l);
            if jkl.norm() == 0.0 {
                continue;
            }
            for (mu, v) in spec.kraus.iter().enumerate() {
                for (nu, vd) in daggers.iter().enumerate() {
                    let c = jkl * spec.d[(mu, nu)];
                    if c.norm() == 0.0 {
                        continue;
                    }
                    let vk = single(k, v);
                    let vdl = single(l, vd);
                    match spec.form {
                        DissipatorForm::Standard => {
                            let pair = vk.product(&vdl);
                            dis.push(vk.product(t).product(&vdl).scaled(c));
                            dis.push(pair.product(t).scaled(-c * half));
                            dis.push(t.product(&pair).scaled(-c * half));
                        }
                        DissipatorForm::DoubleCommutator => {
                            let c = c * half;
                            dis.push(vk.product(t).product(&vdl).scaled(c));
                            dis.push(t.product(&vk).product(&vdl).scaled(-c));
                            dis.push(vdl.product(&vk).product(t).scaled(-c));
                            dis.push(vdl.product(t).product(&vk).scaled(c));
                        }
                    }
                }
            }
        }
    }
    let wrap = |terms: Vec<ProductTerm>| -> Result<ChainOperator> {
        let mut support: BTreeSet<Site> = x.support().iter().copied().collect();
        for t in &terms {
            support.extend(t.sites());
        }
        Ok(ChainOperator::from_terms(x.dim(), support.into_iter().collect(), terms)?.simplify())
    };
    Ok(GeneratorParts {
        hamiltonian: wrap(ham)?,
        dissipator: wrap(dis)?,
    })
}

/// `𝕃_N[X] = i[H_N, X] + 𝔻_N[X]`.
pub fn apply_generator(spec: &LindbladSpec, n_t: usize, x: &ChainOperator) -> Result<ChainOperator> {
    apply_generator_parts(spec, n_t, x)?.total()
}

/// `𝕃_N` as dense matrices on the full chain Hilbert space `C^{p^{N_T}}`.
///
/// With `V_{kμ} = v_μ^{(k)}` and `B_{kμ} = Σ_{lν} c J_{kl} D_{μν} V_{lν}^†`
/// (`c = 1` standard, `c = ½` double commutator) the dissipator is
/// `Σ V X B − ½{K, X}` or `Σ (V X B + B X V) − X K_1 − K_2 X`.
#[derive(Clone, Debug)]
pub struct DenseGenerator {
    n_t: usize,
    p: usize,
    form: DissipatorForm,
    h: CMat,
    vs: Vec<CMat>,
    bs: Vec<CMat>,
    k1: CMat,
    k2: CMat,
    norm_bound: f64,
}

impl DenseGenerator {
    pub fn new(spec: &LindbladSpec, n_t: usize, cap: usize) -> Result<Self> {
        let p = spec.site_dim();
        let sites = chain_sites(n_t);
        let dim = (p as u64)
            .checked_pow(n_t as u32)
            .filter(|&d| d <= cap as u64)
            .ok_or_else(|| {
                Error::Resource(format!(
                    "chain Hilbert dimension {p}^{n_t} exceeds cap {cap}; use the factorised path"
                ))
            })? as usize;
        let embed = |a: &CMat, k: Site| -> CMat {
            let pos = (k - sites[0]) as u32;
            let left = CMat::identity(p.pow(pos), p.pow(pos));
            let rn = p.pow(n_t as u32 - pos - 1);
            kron(&kron(&left, a), &CMat::identity(rn, rn))
        };
        let mut h = CMat::zeros(dim, dim);
        for &k in &sites {
            h += embed(spec.h.matrix(), k);
        }
        let factor = match spec.form {
            DissipatorForm::Standard => 1.0,
            DissipatorForm::DoubleCommutator => 0.5,
        };
        let m = spec.kraus.len();
        let mut vs = Vec::new();
        let mut vds = Vec::new();
        for &k in &sites {
            for v in &spec.kraus {
                vs.push(embed(v.matrix(), k));
                vds.push(embed(&v.matrix().adjoint(), k));
            }
        }
        let mut bs = Vec::with_capacity(vs.len());
        for &k in &sites {
            for mu in 0..m {
                let mut b = CMat::zeros(dim, dim);
                for (li, &l) in sites.iter().enumerate() {
                    let j = spec.coupling.coupling(k, l);
                    if j.norm() == 0.0 {
                        continue;
                    }
                    for nu in 0..m {
                        let c = j * spec.d[(mu, nu)] * factor;
                        if c.norm() != 0.0 {
                            b += &vds[li * m + nu] * c;
                        }
                    }
                }
                bs.push(b);
            }
        }
        let mut k1 = CMat::zeros(dim, dim);
        let mut k2 = CMat::zeros(dim, dim);
        for (v, b) in vs.iter().zip(&bs) {
            k1 += v * b;
            k2 += b * v;
        }
        Ok(DenseGenerator {
            n_t,
            p,
            form: spec.form,
            h,
            vs,
            bs,
            k1,
            k2,
            norm_bound: spec.norm_bound(n_t),
        })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn site_dim(&self) -> usize {
        self.p
    }

    pub fn hilbert_dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn hamiltonian_part(&self, x: &CMat) -> CMat {
        (&self.h * x - x * &self.h) * C64::i()
    }

    pub fn dissipator_part(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(x.nrows(), x.ncols());
        match self.form {
            DissipatorForm::Standard => {
                for (v, b) in self.vs.iter().zip(&self.bs) {
                    out += v * x * b;
                }
                out -= (&self.k1 * x + x * &self.k1) * C64::new(0.5, 0.0);
            }
            DissipatorForm::DoubleCommutator => {
                for (v, b) in self.vs.iter().zip(&self.bs) {
                    out += v * x * b + b * x * v;
                }
                out -= x * &self.k1 + &self.k2 * x;
            }
        }
        out
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        self.hamiltonian_part(x) + self.dissipator_part(x)
    }

    /// Apply to an operator on the chain, extending its support if needed.
    pub fn apply_op(&self, x: &ChainOperator) -> Result<DenseChainOperator> {
        let full = x.clone().with_support(chain_sites(self.n_t))?;
        if full.support().len() != self.n_t {
            return domain("operator support leaves the chain");
        }
        let d = full.to_dense(self.hilbert_dim())?;
        Ok(d.with_matrix(self.apply(d.matrix())))
    }

    /// Superoperator matrix on column-major `vec(X)`, using
    /// `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.
    pub fn superoperator_matrix(&self, cap: usize) -> Result<CMat> {
        let d = self.hilbert_dim();
        if d * d > cap {
            return Err(Error::Resource(format!(
                "superoperator dimension {} exceeds cap {cap}",
                d * d
            )));
        }
        let id = CMat::identity(d, d);
        let i = C64::i();
        let mut l = (kron(&id, &self.h) - kron(&self.h.transpose(), &id)) * i;
        match self.form {
            DissipatorForm::Standard => {
                for (v, b) in self.vs.iter().zip(&self.bs) {
                    l += kron(&b.transpose(), v);
                }
                l -= (kron(&id, &self.k1) + kron(&self.k1.transpose(), &id)) * C64::new(0.5, 0.0);
            }
            DissipatorForm::DoubleCommutator => {
                for (v, b) in self.vs.iter().zip(&self.bs) {
                    l += kron(&b.transpose(), v) + kron(&v.transpose(), b);
                }
                l -= kron(&self.k1.transpose(), &id) + kron(&id, &self.k2);
            }
        }
        Ok(l)
    }
}
