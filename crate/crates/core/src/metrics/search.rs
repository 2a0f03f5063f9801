//! Random search for strategies beating the polarization bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bound::{bound_closed_form, optimal_strategy};
use super::fidelity::{
    average_fidelity_from_distributions, classical_trace_distance, eigenbasis_distributions,
    quantum_trace_distance, renormalized, OutcomeDistribution,
};
use crate::collective::MsConfig;
use crate::error::{Error, Result};
use crate::measurement::CollectivePovm;
use crate::qstate::linalg::{haar_unitary, CMatrix};
use crate::qstate::DensityOperator;

/// Largest MS the dense search accepts.
pub const SEARCH_MAX_N: usize = 6;

/// Slack allowed above the bound, and between the classical and quantum distances.
pub const VIOLATION_SLACK: f64 = 1e-9;

/// A strategy evaluated on `rho_eps`: the two branch unitaries and the collective POVM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrategyScore {
    /// `1/2 (1 + D_c)` under the collective POVM.
    pub f_avg: f64,
    pub classical_distance: f64,
    /// `D_q` between the two MS states.
    pub quantum_distance: f64,
    /// `D_c` under the eigenbasis measurement of `rho_o - rho_e`.
    pub eigenbasis_distance: f64,
}

impl StrategyScore {
    /// Average fidelity when any measurement on the MS is allowed.
    pub fn f_avg_unrestricted(&self) -> f64 {
        0.5 * (1.0 + self.quantum_distance)
    }
}

/// Excitation-sector distribution of a dense MS state on `MsSites(N)`.
pub fn sector_distribution(rho: &DensityOperator) -> Vec<f64> {
    let table = rho.layout().excitation_table();
    let mut out = vec![0.0; rho.layout().ms_size() + 1];
    for (i, &m) in table.iter().enumerate() {
        out[m] += rho.matrix()[(i, i)].re;
    }
    out
}

/// POVM outcome distribution of a dense MS state.
pub fn povm_distribution(rho: &DensityOperator, povm: &CollectivePovm) -> Result<OutcomeDistribution> {
    renormalized(povm.distribution(&sector_distribution(rho)).iter().map(|p| p.max(0.0)).collect())
}

/// Scores `(V_o, V_e, povm)` against `rho_eps` on a dense register.
pub fn score_strategy(
    rho_eps: &DensityOperator,
    v_odd: &CMatrix,
    v_even: &CMatrix,
    povm: &CollectivePovm,
) -> Result<StrategyScore> {
    let rho_o = DensityOperator::from_raw(v_odd * rho_eps.matrix() * v_odd.adjoint(), rho_eps.layout().clone());
    let rho_e = DensityOperator::from_raw(v_even * rho_eps.matrix() * v_even.adjoint(), rho_eps.layout().clone());
    let (p_o, p_e) = (povm_distribution(&rho_o, povm)?, povm_distribution(&rho_e, povm)?);
    let (q_o, q_e) = eigenbasis_distributions(&rho_o, &rho_e)?;
    Ok(StrategyScore {
        f_avg: average_fidelity_from_distributions(&p_o, &p_e)?,
        classical_distance: classical_trace_distance(&p_o, &p_e)?,
        quantum_distance: quantum_trace_distance(&rho_o, &rho_e)?,
        eigenbasis_distance: classical_trace_distance(&q_o, &q_e)?,
    })
}

/// Column-stochastic random POVM with `outcomes` outcomes on excitations `0..=n`.
pub fn random_povm<R: Rng + ?Sized>(n: usize, outcomes: usize, rng: &mut R) -> CollectivePovm {
    let mut a: Vec<Vec<f64>> = (0..outcomes).map(|_| (0..=n).map(|_| rng.random::<f64>()).collect()).collect();
    for m in 0..=n {
        let total: f64 = a.iter().map(|row| row[m]).sum();
        for row in a.iter_mut() {
            row[m] /= total;
        }
    }
    CollectivePovm::new(a).expect("column-stochastic by construction")
}

/// RNG for one trial: seeded by `seed`, on stream `trial`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub n: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    pub bound: f64,
    /// Largest `F_avg` over collective POVMs among the samples.
    pub max_found: f64,
    /// `bound - max_found`.
    pub gap: f64,
    pub argmax: Option<usize>,
    /// Largest `1/2 (1 + D_q)` among the samples (any measurement allowed).
    pub max_found_unrestricted: f64,
    /// Samples with `F_avg > bound + slack`.
    pub violations: usize,
    /// Samples with `1/2 (1 + D_q) > bound + slack`.
    pub unrestricted_violations: usize,
    /// Samples with `D_c > D_q + slack`.
    pub chain_violations: usize,
    /// Largest `|D_eig - D_q|` seen.
    pub max_eigenbasis_residual: f64,
    /// Score of the optimal strategy when it was included.
    pub optimal: Option<StrategyScore>,
}

impl SearchReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
            && self.unrestricted_violations == 0
            && self.chain_violations == 0
            && self.max_eigenbasis_residual <= VIOLATION_SLACK
    }
}

fn sample(n: usize, rho_eps: &DensityOperator, seed: u64, trial: u64) -> Result<StrategyScore> {
    let mut rng = trial_rng(seed, trial);
    let dim = 1 << n;
    let v_odd = haar_unitary(dim, &mut rng);
    let v_even = haar_unitary(dim, &mut rng);
    let outcomes = rng.random_range(2..=n + 1);
    let povm = random_povm(n, outcomes, &mut rng);
    score_strategy(rho_eps, &v_odd, &v_even, &povm)
}

/// Scores `trials` random strategies (Haar `V_o`, `V_e` and a random collective
/// POVM each) against the bound. Every trial owns the RNG stream `trial`, so the
/// report does not depend on scheduling.
pub fn bound_violation_search(
    n: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
    include_optimal: bool,
) -> Result<SearchReport> {
    if n > SEARCH_MAX_N {
        return Err(Error::Domain(format!("violation search is dense; N <= {SEARCH_MAX_N} required, got {n}")));
    }
    let ms = MsConfig::new(n, epsilon)?;
    let rho_eps = ms.rho_epsilon_dense()?;
    let bound = bound_closed_form(n, epsilon)?;
    let scores = (0..trials as u64)
        .into_par_iter()
        .map(|t| sample(n, &rho_eps, seed, t))
        .collect::<Result<Vec<_>>>()?;
    let optimal = if include_optimal {
        let s = optimal_strategy(n);
        Some(score_strategy(&rho_eps, &s.v_odd.to_matrix(n), &s.v_even.to_matrix(n), &s.povm)?)
    } else {
        None
    };

    let all: Vec<(Option<usize>, &StrategyScore)> = scores
        .iter()
        .enumerate()
        .map(|(i, s)| (Some(i), s))
        .chain(optimal.iter().map(|s| (None, s)))
        .collect();
    let (mut max_found, mut argmax) = (f64::NEG_INFINITY, None);
    for (i, s) in &all {
        if s.f_avg > max_found {
            max_found = s.f_avg;
            argmax = *i;
        }
    }
    if all.is_empty() {
        max_found = 0.5;
    }
    let count = |f: &dyn Fn(&StrategyScore) -> bool| all.iter().filter(|(_, s)| f(s)).count();
    Ok(SearchReport {
        n,
        epsilon,
        trials,
        seed,
        bound,
        max_found,
        gap: bound - max_found,
        argmax,
        max_found_unrestricted: all.iter().map(|(_, s)| s.f_avg_unrestricted()).fold(0.5, f64::max),
        violations: count(&|s| s.f_avg > bound + VIOLATION_SLACK),
        unrestricted_violations: count(&|s| s.f_avg_unrestricted() > bound + VIOLATION_SLACK),
        chain_violations: count(&|s| s.classical_distance > s.quantum_distance + VIOLATION_SLACK),
        max_eigenbasis_residual: all
            .iter()
            .map(|(_, s)| (s.eigenbasis_distance - s.quantum_distance).abs())
            .fold(0.0, f64::max),
        optimal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::sector_pvm;

    #[test]
    fn identical_unitaries_give_one_half() {
        let rho = MsConfig::new(3, 0.5).unwrap().rho_epsilon_dense().unwrap();
        let mut rng = trial_rng(7, 0);
        let v = haar_unitary(8, &mut rng);
        let povm = random_povm(3, 3, &mut rng);
        let s = score_strategy(&rho, &v, &v, &povm).unwrap();
        assert!((s.f_avg - 0.5).abs() < 1e-12);
        assert!(s.quantum_distance < 1e-12);
    }

    #[test]
    fn optimal_strategy_has_zero_gap() {
        let r = bound_violation_search(3, 0.5, 50, 11, true).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.gap.abs() < 1e-10);
        assert_eq!(r.argmax, None);
        let opt = r.optimal.unwrap();
        assert!((opt.f_avg - r.bound).abs() < 1e-10);
    }

    #[test]
    fn search_is_deterministic() {
        let a = bound_violation_search(2, 0.3, 40, 5, false).unwrap();
        let b = bound_violation_search(2, 0.3, 40, 5, false).unwrap();
        assert_eq!(a, b);
        assert!(a.passed());
        assert!(a.max_found <= a.bound + VIOLATION_SLACK);
    }

    #[test]
    fn sector_distribution_of_rho_eps() {
        let ms = MsConfig::new(4, 0.3).unwrap();
        let rho = ms.rho_epsilon_dense().unwrap();
        let p = povm_distribution(&rho, &sector_pvm(4)).unwrap();
        for (x, y) in p.probs().iter().zip(ms.sector_weights()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn oversized_search_is_rejected() {
        assert!(bound_violation_search(7, 0.5, 1, 0, false).is_err());
    }
}
