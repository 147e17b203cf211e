use super::SiteOperator;
use crate::error::domain;
use crate::{CMat, Result, C64};

/// Orthogonal basis of p×p matrices: identity first, then generalised
/// Gell-Mann matrices (symmetric, antisymmetric, diagonal last).
///
/// `Tr(o_α† o_β) = c_α δ_αβ` with `c_0 = p` and `c_α = 2` otherwise. All
/// elements are hermitian.
#[derive(Clone, Debug)]
pub struct MatrixBasis {
    dim: usize,
    elements: Vec<SiteOperator>,
    norms: Vec<f64>,
}

impl MatrixBasis {
    pub fn gell_mann(p: usize) -> Result<Self> {
        if p < 2 {
            return domain("matrix basis needs p ≥ 2");
        }
        let unit = |i: usize, j: usize, c: C64| {
            let mut m = CMat::zeros(p, p);
            m[(i, j)] = c;
            m
        };
        let one = C64::new(1.0, 0.0);
        let mut elements = vec![SiteOperator::identity(p)];
        for j in 0..p {
            for k in (j + 1)..p {
                elements.push(SiteOperator::from_matrix_unchecked(
                    unit(j, k, one) + unit(k, j, one),
                ));
            }
        }
        for j in 0..p {
            for k in (j + 1)..p {
                elements.push(SiteOperator::from_matrix_unchecked(
                    unit(j, k, -C64::i()) + unit(k, j, C64::i()),
                ));
            }
        }
        for l in 1..p {
            let c = (2.0 / (l * (l + 1)) as f64).sqrt();
            let mut m = CMat::zeros(p, p);
            for j in 0..l {
                m[(j, j)] = C64::new(c, 0.0);
            }
            m[(l, l)] = C64::new(-c * l as f64, 0.0);
            elements.push(SiteOperator::from_matrix_unchecked(m));
        }
        let mut norms = vec![2.0; elements.len()];
        norms[0] = p as f64;
        Ok(MatrixBasis {
            dim: p,
            elements,
            norms,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[SiteOperator] {
        &self.elements
    }

    /// `c_α = Tr(o_α† o_α)`.
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// Expansion coefficients `a_α = Tr(o_α† a) / c_α`.
    pub fn coefficients(&self, a: &SiteOperator) -> Result<Vec<C64>> {
        if a.dim() != self.dim {
            return domain("operator dimension does not match basis");
        }
        Ok(self
            .elements
            .iter()
            .zip(&self.norms)
            .map(|(o, &c)| (o.matrix().adjoint() * a.matrix()).trace() / c)
            .collect())
    }

    pub fn reconstruct(&self, coeffs: &[C64]) -> Result<SiteOperator> {
        if coeffs.len() != self.len() {
            return domain("coefficient count does not match basis");
        }
        let mut m = CMat::zeros(self.dim, self.dim);
        for (o, &c) in self.elements.iter().zip(coeffs) {
            m += o.matrix() * c;
        }
        Ok(SiteOperator::from_matrix_unchecked(m))
    }
}
