//! Operators that send basis states to phased basis states, and short sums of them.
//!
//! Collective flips, controlled phases and the GHZ entangler are all of this form,
//! so they are applied by index bookkeeping instead of dense matrix products.

use super::linalg::{CMatrix, C64, ONE, ZERO};
use super::state::{DensityOperator, PureState};
use crate::error::{Error, Result};

/// `|i> -> phase[i] |target[i]>`, with `target` a permutation of the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialOp {
    targets: Vec<usize>,
    phases: Vec<C64>,
}

impl MonomialOp {
    pub fn identity(dim: usize) -> Self {
        MonomialOp { targets: (0..dim).collect(), phases: vec![ONE; dim] }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize) -> (usize, C64)) -> Result<Self> {
        let (targets, phases): (Vec<usize>, Vec<C64>) = (0..dim).map(f).unzip();
        let mut seen = vec![false; dim];
        for &t in &targets {
            if t >= dim || std::mem::replace(&mut seen[t], true) {
                return Err(Error::Validation("monomial operator is not a basis permutation".into()));
            }
        }
        Ok(MonomialOp { targets, phases })
    }

    pub fn dim(&self) -> usize {
        self.targets.len()
    }

    pub fn apply_pure(&self, s: &PureState) -> Result<PureState> {
        self.check(s.dim())?;
        let mut out = vec![ZERO; s.dim()];
        for (i, &a) in s.amplitudes().iter().enumerate() {
            out[self.targets[i]] = self.phases[i] * a;
        }
        Ok(PureState::from_raw(out.into(), s.layout().clone()))
    }

    pub fn apply_density(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        OpSum::single(self.clone()).apply_density(rho)
    }

    pub fn to_matrix(&self) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            m[(self.targets[i], i)] = self.phases[i];
        }
        m
    }

    fn check(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::Layout(format!(
                "operator of dimension {} applied to a state of dimension {dim}",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// `sum_k c_k M_k` over monomial operators.
#[derive(Debug, Clone, PartialEq)]
pub struct OpSum {
    terms: Vec<(C64, MonomialOp)>,
}

impl OpSum {
    pub fn single(op: MonomialOp) -> Self {
        OpSum { terms: vec![(ONE, op)] }
    }

    pub fn new(terms: Vec<(C64, MonomialOp)>) -> Result<Self> {
        let dim = terms
            .first()
            .map(|t| t.1.dim())
            .ok_or_else(|| Error::Validation("empty operator sum".into()))?;
        if terms.iter().any(|t| t.1.dim() != dim) {
            return Err(Error::Layout("operator sum terms differ in dimension".into()));
        }
        Ok(OpSum { terms })
    }

    pub fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }

    pub fn apply_pure(&self, s: &PureState) -> Result<PureState> {
        self.terms[0].1.check(s.dim())?;
        let mut out = vec![ZERO; s.dim()];
        for (c, op) in &self.terms {
            for (i, &a) in s.amplitudes().iter().enumerate() {
                out[op.targets[i]] += c * op.phases[i] * a;
            }
        }
        Ok(PureState::from_raw(out.into(), s.layout().clone()))
    }

    pub fn apply_density(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let d = rho.dim();
        self.terms[0].1.check(d)?;
        let src = rho.matrix();
        let mut out = CMatrix::zeros(d, d);
        for (ck, mk) in &self.terms {
            for (cl, ml) in &self.terms {
                let w = ck * cl.conj();
                for j in 0..d {
                    let right = w * ml.phases[j].conj();
                    let tj = ml.targets[j];
                    for i in 0..d {
                        out[(mk.targets[i], tj)] += mk.phases[i] * src[(i, j)] * right;
                    }
                }
            }
        }
        Ok(DensityOperator::from_raw(out, rho.layout().clone()))
    }

    pub fn to_matrix(&self) -> CMatrix {
        let d = self.dim();
        self.terms
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, (c, op)| acc + op.to_matrix().map(|z| z * c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::linalg::{c, pauli_x};
    use crate::qstate::SubsystemLayout;

    #[test]
    fn monomial_matches_matrix_application() {
        let l = SubsystemLayout::qubits(2).unwrap();
        let s = PureState::normalized(
            vec![c(0.1, 0.2), c(0.3, -0.1), c(-0.5, 0.0), c(0.2, 0.4)].into(),
            l,
        )
        .unwrap();
        let op = MonomialOp::from_fn(4, |i| (i ^ 2, if i & 1 == 1 { -ONE } else { ONE })).unwrap();
        let direct = op.apply_pure(&s).unwrap();
        let via_matrix = op.to_matrix() * s.amplitudes();
        assert!((direct.amplitudes() - via_matrix).camax() < 1e-15);

        let rho = s.to_density();
        let m = op.to_matrix();
        let expect = &m * rho.matrix() * m.adjoint();
        assert!((op.apply_density(&rho).unwrap().matrix() - expect).camax() < 1e-15);
    }

    #[test]
    fn sums_match_matrix_conjugation() {
        let l = SubsystemLayout::qubits(1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // (I - iX)/sqrt(2)
        let x = MonomialOp::from_fn(2, |i| (1 - i, ONE)).unwrap();
        let sum = OpSum::new(vec![(c(h, 0.0), MonomialOp::identity(2)), (c(0.0, -h), x)]).unwrap();
        let u = sum.to_matrix();
        let expect = (CMatrix::identity(2, 2) - pauli_x().map(|z| z * c(0.0, 1.0))).map(|z| z * h);
        assert!((&u - &expect).camax() < 1e-15);
        let rho = DensityOperator::from_diagonal(&[0.7, 0.3], l).unwrap();
        let got = sum.apply_density(&rho).unwrap();
        assert!((got.matrix() - &u * rho.matrix() * u.adjoint()).camax() < 1e-15);
    }

    #[test]
    fn non_permutation_rejected() {
        assert!(MonomialOp::from_fn(3, |_| (0, ONE)).is_err());
    }
}
