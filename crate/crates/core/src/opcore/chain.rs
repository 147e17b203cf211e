use std::collections::BTreeMap;

use super::{kron, spectral_norm, SiteOperator};
use crate::error::domain;
use crate::{CMat, Error, Result, C64};

/// Lattice position. Chains of `N_T` sites are centred on 0.
pub type Site = i64;

/// Hilbert-space dimension above which dense materialisation is refused.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Sites of a chain of `n_t` sites: `{−N, …, N}` for `n_t = 2N+1`. Even
/// lengths put the extra site on the left.
pub fn chain_sites(n_t: usize) -> Vec<Site> {
    let lo = -((n_t / 2) as Site);
    (0..n_t as Site).map(|k| lo + k).collect()
}

/// `coeff · ⊗_s a_s` over a sorted set of sites; unlisted sites carry the
/// identity.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductTerm {
    coeff: C64,
    factors: Vec<(Site, SiteOperator)>,
}

impl ProductTerm {
    pub fn scalar(coeff: C64) -> Self {
        ProductTerm {
            coeff,
            factors: Vec::new(),
        }
    }

    pub fn new(coeff: C64, mut factors: Vec<(Site, SiteOperator)>) -> Result<Self> {
        factors.sort_by_key(|(s, _)| *s);
        if factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return domain("product term lists a site twice");
        }
        if let Some((_, f)) = factors.first() {
            let p = f.dim();
            if factors.iter().any(|(_, g)| g.dim() != p) {
                return domain("product term mixes site dimensions");
            }
        }
        Ok(ProductTerm { coeff, factors })
    }

    pub fn coeff(&self) -> C64 {
        self.coeff
    }

    pub fn factors(&self) -> &[(Site, SiteOperator)] {
        &self.factors
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.factors.iter().map(|(s, _)| *s)
    }

    pub fn factor_at(&self, site: Site) -> Option<&SiteOperator> {
        self.factors
            .binary_search_by_key(&site, |(s, _)| *s)
            .ok()
            .map(|i| &self.factors[i].1)
    }

    pub fn scaled(&self, c: C64) -> Self {
        ProductTerm {
            coeff: self.coeff * c,
            factors: self.factors.clone(),
        }
    }

    /// Operator product `self · other`, merging factors site by site.
    pub fn product(&self, other: &ProductTerm) -> ProductTerm {
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.factors, &other.factors);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i].clone());
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push(b[j].clone());
                j += 1;
            } else {
                out.push((a[i].0, &a[i].1 * &b[j].1));
                i += 1;
                j += 1;
            }
        }
        ProductTerm {
            coeff: self.coeff * other.coeff,
            factors: out,
        }
    }

    pub fn dagger(&self) -> Self {
        ProductTerm {
            coeff: self.coeff.conj(),
            factors: self
                .factors
                .iter()
                .map(|(s, f)| (*s, f.dagger()))
                .collect(),
        }
    }

    pub fn shifted(&self, k: Site) -> Self {
        ProductTerm {
            coeff: self.coeff,
            factors: self
                .factors
                .iter()
                .map(|(s, f)| (s + k, f.clone()))
                .collect(),
        }
    }

    /// Replace (or insert) the factor at `site`.
    pub fn with_factor(&self, site: Site, f: SiteOperator) -> Self {
        let mut factors = self.factors.clone();
        match factors.binary_search_by_key(&site, |(s, _)| *s) {
            Ok(i) => factors[i].1 = f,
            Err(i) => factors.insert(i, (site, f)),
        }
        ProductTerm {
            coeff: self.coeff,
            factors,
        }
    }

    /// `|coeff| · Π ‖a_s‖_F`, an upper bound for the operator norm.
    pub fn weight(&self) -> f64 {
        self.coeff.norm() * self.factors.iter().map(|(_, f)| f.frobenius()).product::<f64>()
    }

    /// Pull norms and phases into the coefficient so that each factor has
    /// unit Frobenius norm and a fixed phase. `None` if a factor vanishes.
    fn canonical(&self) -> Option<ProductTerm> {
        let mut coeff = self.coeff;
        let mut factors = Vec::with_capacity(self.factors.len());
        for (s, f) in &self.factors {
            let (c, g) = canonical_factor(f)?;
            coeff *= c;
            factors.push((*s, g));
        }
        Some(ProductTerm { coeff, factors })
    }

    fn dense(&self, support: &[Site], p: usize) -> CMat {
        let mut m = CMat::from_element(1, 1, self.coeff);
        let id = CMat::identity(p, p);
        for s in support {
            m = match self.factor_at(*s) {
                Some(f) => kron(&m, f.matrix()),
                None => kron(&m, &id),
            };
        }
        m
    }
}

/// `f = c · g` with `‖g‖_F = 1` and the first dominant entry of `g` real
/// positive.
fn canonical_factor(f: &SiteOperator) -> Option<(C64, SiteOperator)> {
    let m = f.matrix();
    let n = m.norm();
    if n == 0.0 {
        return None;
    }
    let maxabs = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let anchor = m.iter().find(|z| z.norm() >= 0.5 * maxabs)?;
    let c = anchor / anchor.norm() * n;
    Some((c, f.scale(c.inv())))
}

/// Operator on a finite set of sites, kept as a sum of product terms.
#[derive(Clone, Debug)]
pub struct ChainOperator {
    dim: usize,
    support: Vec<Site>,
    terms: Vec<ProductTerm>,
}

fn normalise_support(mut support: Vec<Site>) -> Vec<Site> {
    support.sort_unstable();
    support.dedup();
    support
}

fn merge_supports(a: &[Site], b: &[Site]) -> Vec<Site> {
    let mut s = a.to_vec();
    s.extend_from_slice(b);
    normalise_support(s)
}

impl ChainOperator {
    pub fn zero(dim: usize, support: Vec<Site>) -> Result<Self> {
        Self::from_terms(dim, support, Vec::new())
    }

    pub fn identity(dim: usize, support: Vec<Site>) -> Result<Self> {
        Self::from_terms(dim, support, vec![ProductTerm::scalar(C64::new(1.0, 0.0))])
    }

    pub fn from_terms(dim: usize, support: Vec<Site>, terms: Vec<ProductTerm>) -> Result<Self> {
        if dim < 1 {
            return domain("site dimension must be positive");
        }
        let support = normalise_support(support);
        for t in &terms {
            for (s, f) in t.factors() {
                if f.dim() != dim {
                    return domain(format!("factor at site {s} has dimension {}", f.dim()));
                }
                if support.binary_search(s).is_err() {
                    return domain(format!("factor at site {s} lies outside the support"));
                }
            }
        }
        Ok(ChainOperator {
            dim,
            support,
            terms,
        })
    }

    /// `a` placed at site `k` of a chain with the given support.
    pub fn embed(a: &SiteOperator, k: Site, support: Vec<Site>) -> Result<Self> {
        let p = a.dim();
        Self::from_terms(
            p,
            support,
            vec![ProductTerm::new(C64::new(1.0, 0.0), vec![(k, a.clone())])?],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &[Site] {
        &self.support
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total Hilbert-space dimension `p^{|support|}`, `None` on overflow.
    pub fn hilbert_dim(&self) -> Option<usize> {
        (self.dim as u64)
            .checked_pow(self.support.len() as u32)
            .and_then(|d| usize::try_from(d).ok())
    }

    pub fn with_support(mut self, support: Vec<Site>) -> Result<Self> {
        let merged = merge_supports(&self.support, &support);
        self.support = merged;
        Ok(self)
    }

    fn check_compatible(&self, other: &ChainOperator) -> Result<()> {
        if self.dim != other.dim {
            return domain(format!(
                "site dimension mismatch: {} vs {}",
                self.dim, other.dim
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &ChainOperator) -> Result<Self> {
        self.check_compatible(other)?;
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Ok(ChainOperator {
            dim: self.dim,
            support: merge_supports(&self.support, &other.support),
            terms,
        })
    }

    pub fn sub(&self, other: &ChainOperator) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        ChainOperator {
            dim: self.dim,
            support: self.support.clone(),
            terms: self.terms.iter().map(|t| t.scaled(c)).collect(),
        }
    }

    pub fn push_term(&mut self, t: ProductTerm) -> Result<()> {
        for (s, f) in t.factors() {
            if f.dim() != self.dim || self.support.binary_search(s).is_err() {
                return domain(format!("term factor at site {s} is incompatible"));
            }
        }
        self.terms.push(t);
        Ok(())
    }

    pub fn mul(&self, other: &ChainOperator) -> Result<Self> {
        self.check_compatible(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.product(b));
            }
        }
        Ok(ChainOperator {
            dim: self.dim,
            support: merge_supports(&self.support, &other.support),
            terms,
        })
    }

    pub fn dagger(&self) -> Self {
        ChainOperator {
            dim: self.dim,
            support: self.support.clone(),
            terms: self.terms.iter().map(ProductTerm::dagger).collect(),
        }
    }

    /// Translate every factor and the support by `k` sites.
    pub fn shift(&self, k: Site) -> Self {
        ChainOperator {
            dim: self.dim,
            support: self.support.iter().map(|s| s + k).collect(),
            terms: self.terms.iter().map(|t| t.shifted(k)).collect(),
        }
    }

    pub fn simplify(&self) -> Self {
        self.simplify_with(1e-14)
    }

    /// Merge terms that agree on all but one factor and drop terms whose
    /// weight falls below `rel_tol` times the largest weight.
    pub fn simplify_with(&self, rel_tol: f64) -> Self {
        let mut groups: BTreeMap<Vec<Site>, Vec<ProductTerm>> = BTreeMap::new();
        for t in &self.terms {
            if t.coeff == C64::new(0.0, 0.0) {
                continue;
            }
            if let Some(c) = t.canonical() {
                groups.entry(c.sites().collect()).or_default().push(c);
            }
        }
        let mut out: Vec<ProductTerm> = Vec::new();
        for (_, group) in groups {
            let mut acc: Vec<ProductTerm> = Vec::new();
            for t in group {
                let mut merged = false;
                for a in acc.iter_mut() {
                    if let Some(m) = merge_terms(a, &t) {
                        *a = m;
                        merged = true;
                        break;
                    }
                }
                if !merged {
                    acc.push(t);
                }
                acc.retain(|a| a.coeff.norm() > 0.0);
            }
            out.extend(acc);
        }
        let wmax = out.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
        out.retain(|t| t.coeff.norm() > rel_tol * wmax);
        ChainOperator {
            dim: self.dim,
            support: self.support.clone(),
            terms: out,
        }
    }

    pub fn to_dense(&self, cap: usize) -> Result<DenseChainOperator> {
        let d = self.hilbert_dim().filter(|&d| d <= cap).ok_or_else(|| {
            Error::Resource(format!(
                "dense dimension {}^{} exceeds cap {cap}",
                self.dim,
                self.support.len()
            ))
        })?;
        let mut mat = CMat::zeros(d, d);
        for t in &self.terms {
            mat += t.dense(&self.support, self.dim);
        }
        Ok(DenseChainOperator {
            dim: self.dim,
            support: self.support.clone(),
            mat,
        })
    }
}

/// Sum two canonical terms with equal site sets if they differ in at most
/// one factor.
fn merge_terms(a: &ProductTerm, b: &ProductTerm) -> Option<ProductTerm> {
    const SAME: f64 = 1e-13;
    let mut diff = None;
    for (i, ((_, fa), (_, fb))) in a.factors.iter().zip(&b.factors).enumerate() {
        if fa.max_abs_diff(fb) > SAME {
            if diff.is_some() {
                return None;
            }
            diff = Some(i);
        }
    }
    match diff {
        None => Some(ProductTerm {
            coeff: a.coeff + b.coeff,
            factors: a.factors.clone(),
        }),
        Some(i) => {
            let sum = &a.factors[i].1.scale(a.coeff) + &b.factors[i].1.scale(b.coeff);
            let mut factors = a.factors.clone();
            match canonical_factor(&sum) {
                Some((c, g)) => {
                    factors[i].1 = g;
                    Some(ProductTerm { coeff: c, factors })
                }
                None => Some(ProductTerm {
                    coeff: C64::new(0.0, 0.0),
                    factors,
                }),
            }
        }
    }
}

/// `a` at site `k` on the given support.
pub fn embed(a: &SiteOperator, k: Site, support: &[Site]) -> Result<ChainOperator> {
    ChainOperator::embed(a, k, support.to_vec())
}

/// `[A, B]` on the merged support.
pub fn commutator(a: &ChainOperator, b: &ChainOperator) -> Result<ChainOperator> {
    a.mul(b)?.sub(&b.mul(a)?)
}

/// Operator norm through dense materialisation, refusing dimensions above
/// `cap`.
pub fn operator_norm(a: &ChainOperator, cap: usize) -> Result<f64> {
    Ok(a.to_dense(cap)?.norm())
}

/// Dense matrix on `⊗_{s ∈ support} C^p`, first support site most
/// significant.
#[derive(Clone, Debug)]
pub struct DenseChainOperator {
    dim: usize,
    support: Vec<Site>,
    mat: CMat,
}

impl DenseChainOperator {
    pub fn new(dim: usize, support: Vec<Site>, mat: CMat) -> Result<Self> {
        let support = normalise_support(support);
        let d = dim.pow(support.len() as u32);
        if mat.nrows() != d || mat.ncols() != d {
            return domain(format!("dense matrix must be {d}×{d}"));
        }
        Ok(DenseChainOperator { dim, support, mat })
    }

    pub fn identity(dim: usize, support: Vec<Site>) -> Self {
        let support = normalise_support(support);
        let d = dim.pow(support.len() as u32);
        DenseChainOperator {
            dim,
            support,
            mat: CMat::identity(d, d),
        }
    }

    /// `I ⊗ … ⊗ a ⊗ … ⊗ I` with `a` at site `k`.
    pub fn embed_site(a: &SiteOperator, k: Site, support: &[Site]) -> Result<Self> {
        let support = normalise_support(support.to_vec());
        let pos = support
            .binary_search(&k)
            .map_err(|_| Error::Domain(format!("site {k} not in support")))?;
        let p = a.dim();
        let left = CMat::identity(p.pow(pos as u32), p.pow(pos as u32));
        let rn = p.pow((support.len() - pos - 1) as u32);
        let right = CMat::identity(rn, rn);
        Ok(DenseChainOperator {
            dim: p,
            mat: kron(&kron(&left, a.matrix()), &right),
            support,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &[Site] {
        &self.support
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn norm(&self) -> f64 {
        spectral_norm(&self.mat)
    }

    pub fn dagger(&self) -> Self {
        DenseChainOperator {
            dim: self.dim,
            support: self.support.clone(),
            mat: self.mat.adjoint(),
        }
    }

    fn check_same(&self, other: &DenseChainOperator) -> Result<()> {
        if self.dim != other.dim || self.support != other.support {
            return domain("dense operators live on different chains");
        }
        Ok(())
    }

    pub fn mul(&self, other: &DenseChainOperator) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.with_matrix(&self.mat * &other.mat))
    }

    pub fn add(&self, other: &DenseChainOperator) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.with_matrix(&self.mat + &other.mat))
    }

    pub fn commutator(&self, other: &DenseChainOperator) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.with_matrix(&self.mat * &other.mat - &other.mat * &self.mat))
    }

    pub fn scale(&self, c: C64) -> Self {
        self.with_matrix(&self.mat * c)
    }

    pub(crate) fn with_matrix(&self, mat: CMat) -> Self {
        DenseChainOperator {
            dim: self.dim,
            support: self.support.clone(),
            mat,
        }
    }
}
