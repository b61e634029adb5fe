use crate::error::{Error, Result};
use crate::numkit::ComplexMat;

use super::{ParamHamiltonian, ParamPoint};

/// A partition of four basis indices into two ordered pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pairing(pub [[usize; 2]; 2]);

impl Pairing {
    /// Indices in block order: first pair, then second.
    pub fn order(&self) -> [usize; 4] {
        let [[a, b], [c, d]] = self.0;
        [a, b, c, d]
    }

    pub fn block(&self, index: usize) -> [usize; 2] {
        self.0[index]
    }

    /// Block (0 or 1) that holds basis index `i`.
    pub fn block_of(&self, i: usize) -> Option<usize> {
        self.0.iter().position(|p| p.contains(&i))
    }

    fn validate(&self) -> Result<()> {
        let mut seen = [false; 4];
        for i in self.order() {
            if i >= 4 || seen[i] {
                return Err(Error::InvalidMatrix(format!("{self:?} is not a partition of 0..4")));
            }
            seen[i] = true;
        }
        Ok(())
    }
}

/// Splits a 4×4 Hermitian matrix into the 2×2 blocks selected by `pairing`.
///
/// Fails if any element between the two pairs exceeds `1e-10 · ‖H‖_F`.
pub fn ms_blocks(h: &ComplexMat, pairing: &Pairing) -> Result<(ComplexMat, ComplexMat)> {
    pairing.validate()?;
    if h.rows() != 4 || h.cols() != 4 {
        return Err(Error::InvalidMatrix(format!("expected 4x4, got {}x{}", h.rows(), h.cols())));
    }
    let [p, q] = pairing.0;
    let cross = h.select(&p, &q).max_abs();
    let bound = 1e-10 * h.frobenius();
    if cross > bound {
        return Err(Error::NotBlockDecomposable { coupling: cross, bound });
    }
    Ok((h.select(&p, &p), h.select(&q, &q)))
}

/// Inverse of [`ms_blocks`] for a block-diagonal matrix.
pub fn reassemble(first: &ComplexMat, second: &ComplexMat, pairing: &Pairing) -> ComplexMat {
    let mut h = ComplexMat::zeros(4, 4);
    for (block, m) in [first, second].into_iter().enumerate() {
        let idx = pairing.block(block);
        for a in 0..2 {
            for b in 0..2 {
                h[(idx[a], idx[b])] = m[(a, b)];
            }
        }
    }
    h
}

/// One 2×2 block of a block-diagonal four-level model, as a model in its own right.
#[derive(Debug, Clone)]
pub struct BlockModel<M> {
    pub inner: M,
    pub pairing: Pairing,
    /// 0 or 1.
    pub block: usize,
}

impl<M: ParamHamiltonian> BlockModel<M> {
    pub fn new(inner: M, pairing: Pairing, block: usize) -> Self {
        assert!(block < 2, "block index must be 0 or 1");
        Self { inner, pairing, block }
    }

    fn pick(&self, h: &ComplexMat) -> Result<ComplexMat> {
        let (a, b) = ms_blocks(h, &self.pairing)?;
        Ok(if self.block == 0 { a } else { b })
    }
}

impl<M: ParamHamiltonian> ParamHamiltonian for BlockModel<M> {
    fn dim(&self) -> usize {
        2
    }

    fn param_names(&self) -> &[&'static str] {
        self.inner.param_names()
    }

    fn eval(&self, pt: &ParamPoint) -> Result<ComplexMat> {
        self.pick(&self.inner.eval(pt)?)
    }

    fn analytic_partial(&self, pt: &ParamPoint, mu: &str) -> Option<Result<ComplexMat>> {
        let full = self.inner.analytic_partial(pt, mu)?;
        Some(full.and_then(|d| self.pick(&d)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{bhz_hamiltonian, BhzParams, BHZ_PAIRING};

    #[test]
    fn round_trip_reproduces_input() {
        let p = BhzParams { hxy: 0.9, hz: 1.1, m: 1.5, bg: 0.0 };
        let h = bhz_hamiltonian(0.3, 2.2, &p);
        let (a, b) = ms_blocks(&h, &BHZ_PAIRING).unwrap();
        assert_eq!(reassemble(&a, &b, &BHZ_PAIRING), h);
    }

    #[test]
    fn rejects_bad_pairing() {
        let h = ComplexMat::identity(4);
        assert!(ms_blocks(&h, &Pairing([[0, 1], [1, 3]])).is_err());
        assert!(ms_blocks(&ComplexMat::identity(3), &BHZ_PAIRING).is_err());
    }

    #[test]
    fn block_lookup() {
        assert_eq!(BHZ_PAIRING.block_of(2), Some(0));
        assert_eq!(BHZ_PAIRING.block_of(3), Some(1));
        assert_eq!(BHZ_PAIRING.order(), [0, 2, 1, 3]);
    }
}
