//! Translation-invariant product states `ω = ⊗ρ` on the chain.
//!
//! Expectations are evaluated term by term as products of single-site
//! traces; the chain density matrix is never formed except on explicitly
//! dense operators.

use crate::error::domain;
use crate::opcore::{
    hermitian_min_eigenvalue, kron, ChainOperator, DenseChainOperator, ProductTerm,
    SiteOperator, HERMITICITY_TOL,
};
use crate::par::Execution;
use crate::{CMat, Result, C64};

const STATE_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct ProductState {
    rho: SiteOperator,
}

impl ProductState {
    pub fn new(rho: SiteOperator) -> Result<Self> {
        let scale = rho.frobenius().max(1.0);
        if !rho.is_hermitian(HERMITICITY_TOL * scale) {
            return domain("density matrix is not hermitian");
        }
        let tr = rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > STATE_TOL {
            return domain(format!("density matrix has trace {tr}"));
        }
        let min = hermitian_min_eigenvalue(rho.matrix());
        if min < -STATE_TOL {
            return domain(format!("density matrix has eigenvalue {min:e}"));
        }
        Ok(ProductState { rho })
    }

    /// `ρ = I/p`.
    pub fn maximally_mixed(p: usize) -> Self {
        ProductState {
            rho: SiteOperator::identity(p).scale_re(1.0 / p as f64),
        }
    }

    pub fn rho(&self) -> &SiteOperator {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// `Tr(ρ a)`.
    pub fn site_expect(&self, a: &SiteOperator) -> C64 {
        trace_product(self.rho.matrix(), a.matrix())
    }

    fn term_expect(&self, t: &ProductTerm) -> C64 {
        t.factors()
            .iter()
            .fold(t.coeff(), |acc, (_, f)| acc * self.site_expect(f))
    }

    /// `ω(A)`, summed over the product terms of `A`.
    pub fn expect(&self, a: &ChainOperator) -> C64 {
        self.expect_with(a, Execution::default())
    }

    pub fn expect_with(&self, a: &ChainOperator, exec: Execution) -> C64 {
        let terms = a.terms();
        exec.sum_indexed(terms.len(), |i| self.term_expect(&terms[i]))
    }

    /// `ω(A·B)` without forming the product operator.
    pub fn expect_product(&self, a: &ChainOperator, b: &ChainOperator) -> C64 {
        self.expect_product_with(a, b, Execution::default())
    }

    pub fn expect_product_with(
        &self,
        a: &ChainOperator,
        b: &ChainOperator,
        exec: Execution,
    ) -> C64 {
        let (ta, tb) = (a.terms(), b.terms());
        exec.sum_indexed(ta.len(), |i| {
            tb.iter()
                .map(|t| self.pair_expect(&ta[i], t))
                .sum::<C64>()
        })
    }

    fn pair_expect(&self, a: &ProductTerm, b: &ProductTerm) -> C64 {
        let (fa, fb) = (a.factors(), b.factors());
        let mut acc = a.coeff() * b.coeff();
        let (mut i, mut j) = (0, 0);
        while i < fa.len() || j < fb.len() {
            if j == fb.len() || (i < fa.len() && fa[i].0 < fb[j].0) {
                acc *= self.site_expect(&fa[i].1);
                i += 1;
            } else if i == fa.len() || fb[j].0 < fa[i].0 {
                acc *= self.site_expect(&fb[j].1);
                j += 1;
            } else {
                let m = fa[i].1.matrix() * fb[j].1.matrix();
                acc *= trace_product(self.rho.matrix(), &m);
                i += 1;
                j += 1;
            }
            if acc == C64::new(0.0, 0.0) {
                break;
            }
        }
        acc
    }

    /// Density matrix `ρ^{⊗n}` over `n` sites.
    pub fn dense_density(&self, n: usize) -> CMat {
        let mut m = CMat::from_element(1, 1, C64::new(1.0, 0.0));
        for _ in 0..n {
            m = kron(&m, self.rho.matrix());
        }
        m
    }

    /// `Tr(ρ^{⊗n} A)` for a dense chain operator.
    pub fn expect_dense(&self, a: &DenseChainOperator) -> C64 {
        trace_product(&self.dense_density(a.support().len()), a.matrix())
    }

    /// `Σ_{|k|≤cutoff} [ω(x_i τ^k(x_j)) − ω(x_i)ω(x_j)]` and whether the
    /// terms beyond `k = 0` vanish below 1e−14.
    pub fn two_point_sum(
        &self,
        x_i: &SiteOperator,
        x_j: &SiteOperator,
        cutoff: usize,
    ) -> Result<(C64, bool)> {
        x_i.check_same_dim(x_j)?;
        if x_i.dim() != self.dim() {
            return domain("observable dimension does not match the state");
        }
        let (mi, mj) = (self.site_expect(x_i), self.site_expect(x_j));
        let mut value = C64::new(0.0, 0.0);
        let mut tail = 0.0f64;
        for k in -(cutoff as i64)..=(cutoff as i64) {
            let corr = if k == 0 {
                self.site_expect(&(x_i * x_j))
            } else {
                // distinct sites of a product state
                mi * mj
            };
            let c = corr - mi * mj;
            if k != 0 {
                tail = tail.max(c.norm());
            }
            value += c;
        }
        Ok((value, tail < 1e-14))
    }
}

/// `Tr(A B)` without forming the product.
pub(crate) fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

/// Gibbs state `e^{−βh}/Tr e^{−βh}` for a hermitian single-site `h`.
pub fn gibbs_single_site(h: &SiteOperator, beta: f64) -> Result<ProductState> {
    let scale = h.frobenius().max(1.0);
    if !h.is_hermitian(HERMITICITY_TOL * scale) {
        return domain("single-site Hamiltonian is not hermitian");
    }
    if !beta.is_finite() || beta < 0.0 {
        return domain(format!("inverse temperature must be ≥ 0, got {beta}"));
    }
    let herm = (h.matrix() + h.matrix().adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let emin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|e| (-beta * (e - emin)).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let p = h.dim();
    let u = &eig.eigenvectors;
    let mut rho = CMat::zeros(p, p);
    for (k, w) in weights.iter().enumerate() {
        let col = u.column(k);
        rho += &col * col.adjoint() * C64::new(w / z, 0.0);
    }
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    ProductState::new(SiteOperator::new(rho)?)
}
