use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::OutcomeRecord;
use crate::qstate::linalg::{c, hermitian_eig, CVector};
use crate::qstate::{DensityOperator, PureState, SubsystemLayout};
use crate::tolerance;

/// The two Bell states the protocol aims for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BellTarget {
    /// `(|00> + |11>)/sqrt 2`
    EvenPlus,
    /// `(|01> + |10>)/sqrt 2`
    OddPlus,
}

impl BellTarget {
    pub fn amplitudes(self) -> CVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = match self {
            BellTarget::EvenPlus => [h, 0.0, 0.0, h],
            BellTarget::OddPlus => [0.0, h, h, 0.0],
        };
        CVector::from_iterator(4, v.iter().map(|&x| c(x, 0.0)))
    }

    pub fn state(self) -> PureState {
        PureState::new(self.amplitudes(), SubsystemLayout::qubits(2).expect("two qubits"))
            .expect("normalized")
    }
}

/// `<phi| rho |phi>` for a two-qubit state.
pub fn fidelity(rho: &DensityOperator, target: BellTarget) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::Layout(format!("fidelity needs a two-qubit state, got dimension {}", rho.dim())));
    }
    rho.validate()?;
    let phi = target.amplitudes();
    let f = (phi.adjoint() * rho.matrix() * &phi)[(0, 0)].re;
    Ok(f.clamp(0.0, 1.0))
}

/// Probabilities over measurement outcomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::Validation("distribution has a negative or non-finite entry".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tolerance::NORM {
            return Err(Error::Validation(format!("distribution sums to {total}")));
        }
        Ok(OutcomeDistribution { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// `sum_a p_a max(F_o, F_e)` over the outcome records.
pub fn average_fidelity(records: &[OutcomeRecord]) -> f64 {
    records.iter().map(|r| r.probability * r.fidelity_best).sum()
}

/// `1/2 sum_a max(p_o[a], p_e[a])`, the same quantity written through the
/// outcome distributions of the odd and even MS states.
pub fn average_fidelity_from_distributions(p_odd: &OutcomeDistribution, p_even: &OutcomeDistribution) -> Result<f64> {
    same_length(p_odd, p_even)?;
    Ok(0.5 * p_odd.probs.iter().zip(&p_even.probs).map(|(a, b)| a.max(*b)).sum::<f64>())
}

fn same_length(p: &OutcomeDistribution, q: &OutcomeDistribution) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::Validation(format!("distributions have lengths {} and {}", p.len(), q.len())));
    }
    Ok(())
}

/// `1/2 sum |p_i - q_i|`.
pub fn classical_trace_distance(p: &OutcomeDistribution, q: &OutcomeDistribution) -> Result<f64> {
    same_length(p, q)?;
    Ok(0.5 * p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `1/2 sum |lambda_i(rho1 - rho2)|`.
pub fn quantum_trace_distance(rho1: &DensityOperator, rho2: &DensityOperator) -> Result<f64> {
    if rho1.layout() != rho2.layout() {
        return Err(Error::Layout("trace distance between states on different layouts".into()));
    }
    let eig = hermitian_eig(&(rho1.matrix() - rho2.matrix()))?;
    Ok(0.5 * eig.values.iter().map(|l| l.abs()).sum::<f64>())
}

/// Outcome distributions of the projective measurement onto the eigenvectors of
/// `rho1 - rho2`; their classical distance attains the quantum one.
pub fn eigenbasis_distributions(
    rho1: &DensityOperator,
    rho2: &DensityOperator,
) -> Result<(OutcomeDistribution, OutcomeDistribution)> {
    if rho1.layout() != rho2.layout() {
        return Err(Error::Layout("eigenbasis measurement of states on different layouts".into()));
    }
    let eig = hermitian_eig(&(rho1.matrix() - rho2.matrix()))?;
    let probs = |rho: &DensityOperator| -> Vec<f64> {
        eig.vectors
            .column_iter()
            .map(|v| (v.adjoint() * rho.matrix() * v)[(0, 0)].re.max(0.0))
            .collect()
    };
    Ok((renormalized(probs(rho1))?, renormalized(probs(rho2))?))
}

/// Removes round-off from a distribution that is normalized up to float error.
pub(crate) fn renormalized(mut probs: Vec<f64>) -> Result<OutcomeDistribution> {
    let total: f64 = probs.iter().sum();
    if total > 0.0 {
        probs.iter_mut().for_each(|p| *p /= total);
    }
    OutcomeDistribution::new(probs)
}
