//! Upper bound on the average Bell fidelity reachable from a partially
//! polarized MS, in three independent forms.

use serde::Serialize;

use super::binomial::{choose, normalized_pmf_table, CompensatedSum};
use super::fidelity::{renormalized, OutcomeDistribution};
use crate::circuits::{CircuitKind, MsUnitary};
use crate::collective::MsConfig;
use crate::error::Result;
use crate::measurement::{sector_pvm, CollectivePovm};

/// Closed form: `B((N-1)/2; N, eps/2)` for odd `N`,
/// `B(N/2-1; N, eps/2) + b(N/2; N, eps/2)/2` for even `N`.
pub fn bound_closed_form(n: usize, epsilon: f64) -> Result<f64> {
    let ms = MsConfig::new(n, epsilon)?;
    let (n, p) = (n as u64, ms.excitation_probability());
    let b = normalized_pmf_table(n, p);
    let mut s: CompensatedSum = b[..=((n - 1) / 2) as usize].iter().cloned().collect();
    if n % 2 == 0 {
        s.add(0.5 * b[(n / 2) as usize]);
    }
    Ok(s.value())
}

/// `1/2 sum_a max(b(a; N, 1-eps/2), b(a; N, eps/2))`.
pub fn bound_sum_form(n: usize, epsilon: f64) -> Result<f64> {
    let ms = MsConfig::new(n, epsilon)?;
    let (n, p) = (n as u64, ms.excitation_probability());
    let (up, down) = (normalized_pmf_table(n, 1.0 - p), normalized_pmf_table(n, p));
    let s: CompensatedSum = up.iter().zip(&down).map(|(a, b)| 0.5 * a.max(*b)).collect();
    Ok(s.value())
}

/// The coefficient program in multiplicity-compressed form.
///
/// Class `l` holds the `C(N, l)` diagonal entries of `rho_eps` equal to
/// `q^(N-l) (1-q)^l`. `beta[l]` is the per-entry weight; the greedy optimum gives
/// `beta = 2` to the largest half of all `2^N` entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientProgram {
    pub distinct_values: Vec<f64>,
    pub multiplicities: Vec<f64>,
    pub beta: Vec<f64>,
}

impl CoefficientProgram {
    /// `sum_l beta[l] C(N, l)`, which equals `2^N`.
    pub fn total_beta(&self) -> f64 {
        self.beta.iter().zip(&self.multiplicities).map(|(b, m)| b * m).sum()
    }

    /// `total_beta / 2^N`, finite for any `N`.
    pub fn beta_mass(&self) -> f64 {
        let n = (self.beta.len() - 1) as u64;
        self.beta.iter().zip(normalized_pmf_table(n, 0.5)).map(|(b, w)| b * w).collect::<CompensatedSum>().value()
    }

    pub fn total_multiplicity(&self) -> f64 {
        self.multiplicities.iter().sum()
    }

    pub fn is_descending(&self) -> bool {
        self.distinct_values.windows(2).all(|w| w[0] >= w[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResult {
    pub n: usize,
    pub epsilon: f64,
    pub closed_form: f64,
    pub sum_form: f64,
    pub program_form: f64,
}

impl BoundResult {
    pub fn max_disagreement(&self) -> f64 {
        let v = [self.closed_form, self.sum_form, self.program_form];
        let hi = v.iter().cloned().fold(f64::MIN, f64::max);
        let lo = v.iter().cloned().fold(f64::MAX, f64::min);
        hi - lo
    }
}

const SPLIT_SLACK: f64 = 1e-12;

pub fn bound_coefficient_program(n: usize, epsilon: f64) -> Result<(BoundResult, CoefficientProgram)> {
    let ms = MsConfig::new(n, epsilon)?;
    let (nn, p, q) = (n as u64, ms.excitation_probability(), ms.q());
    let distinct_values: Vec<f64> = (0..=nn)
        .map(|l| ((nn - l) as f64 * q.ln() + if l == 0 { 0.0 } else { l as f64 * p.ln() }).exp())
        .collect();
    let multiplicities: Vec<f64> = (0..=nn).map(|l| choose(nn, l)).collect();

    // Greedy fill in units of 2^N so that large N cannot overflow: class l
    // holds the fraction b(l; N, 1/2) of all entries.
    let mut remaining = 0.5;
    let beta: Vec<f64> = normalized_pmf_table(nn, 0.5)
        .into_iter()
        .map(|share| {
            let frac = (remaining / share).min(1.0);
            let frac = if frac >= 1.0 - SPLIT_SLACK {
                1.0
            } else if frac <= SPLIT_SLACK {
                0.0
            } else {
                frac
            };
            remaining = (remaining - frac * share).max(0.0);
            2.0 * frac
        })
        .collect();

    // beta_l C(N,l) c_l / 2 = (beta_l / 2) b(l; N, eps/2)
    let program_form = beta
        .iter()
        .zip(normalized_pmf_table(nn, p))
        .map(|(b, w)| 0.5 * b * w)
        .collect::<CompensatedSum>()
        .value();
    let result = BoundResult {
        n,
        epsilon,
        closed_form: bound_closed_form(n, epsilon)?,
        sum_form: bound_sum_form(n, epsilon)?,
        program_form,
    };
    Ok((result, CoefficientProgram { distinct_values, multiplicities, beta }))
}

/// All three forms at once.
pub fn bound(n: usize, epsilon: f64) -> Result<BoundResult> {
    Ok(bound_coefficient_program(n, epsilon)?.0)
}

/// Strategy attaining the bound: leave the MS alone on the even branch, flip
/// every site on the odd branch, then measure the total excitation.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalStrategy {
    pub n: usize,
    pub v_even: MsUnitary,
    pub v_odd: MsUnitary,
    pub povm: CollectivePovm,
}

impl OptimalStrategy {
    pub fn circuit_kind(&self) -> CircuitKind {
        CircuitKind::ParityConditioned { v_even: self.v_even.clone(), v_odd: self.v_odd.clone() }
    }

    /// Outcome distributions `(p_odd, p_even)` of the sector measurement:
    /// `b(a; N, 1-eps/2)` and `b(a; N, eps/2)`.
    pub fn distributions(&self, epsilon: f64) -> Result<(OutcomeDistribution, OutcomeDistribution)> {
        let ms = MsConfig::new(self.n, epsilon)?;
        let even = ms.sector_weights();
        let odd: Vec<f64> = even.iter().rev().cloned().collect();
        Ok((renormalized(odd)?, renormalized(even)?))
    }
}

pub fn optimal_strategy(n: usize) -> OptimalStrategy {
    OptimalStrategy {
        n,
        v_even: MsUnitary::Identity,
        v_odd: MsUnitary::CollectiveFlip,
        povm: sector_pvm(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::metrics::average_fidelity_from_distributions;

    #[test]
    fn small_hand_values() {
        assert_eq!(bound_closed_form(2, 0.5).unwrap(), 0.75);
        assert_eq!(bound_closed_form(3, 0.5).unwrap(), 0.84375);
        assert_eq!(bound_sum_form(1, 0.5).unwrap(), 0.75);
        assert_eq!(bound_sum_form(2, 0.5).unwrap(), 0.75);
        for n in [1, 2, 7, 50, 1000] {
            assert_eq!(bound_closed_form(n, 0.0).unwrap(), 1.0);
            assert!((bound_sum_form(n, 0.0).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn fifty_sites_at_half_polarization() {
        let b = bound_closed_form(50, 0.5).unwrap();
        assert!((b - 0.9999).abs() < 5e-5, "{b}");
    }

    #[test]
    fn program_classes() {
        let (r, prog) = bound_coefficient_program(2, 0.5).unwrap();
        assert_eq!(prog.distinct_values, vec![0.5625, 0.1875, 0.0625]);
        assert_eq!(prog.multiplicities, vec![1.0, 2.0, 1.0]);
        assert_eq!(prog.beta, vec![2.0, 1.0, 0.0]);
        assert_eq!(r.program_form, 0.75);
        let (r, prog) = bound_coefficient_program(3, 0.5).unwrap();
        assert_eq!(prog.beta, vec![2.0, 2.0, 0.0, 0.0]);
        assert!((r.program_form - 0.84375).abs() < 1e-15);
        assert!(prog.is_descending());
        assert_eq!(prog.total_beta(), 8.0);
    }

    #[test]
    fn large_n_is_stable() {
        for n in [1001, 10_000] {
            let b = bound(n, 0.9).unwrap();
            assert!(b.closed_form.is_finite() && b.closed_form <= 1.0 && b.closed_form >= 0.5, "{b:?}");
            assert!(b.max_disagreement() < 1e-10, "{b:?}");
            let prog = bound_coefficient_program(n, 0.9).unwrap().1;
            assert!((prog.beta_mass() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(bound_closed_form(3, 1.0), Err(Error::Domain(_))));
        assert!(matches!(bound_sum_form(0, 0.5), Err(Error::Domain(_))));
        assert!(matches!(bound_coefficient_program(3, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn optimal_distributions() {
        let s = optimal_strategy(1);
        let (po, pe) = s.distributions(0.5).unwrap();
        assert_eq!(po.probs(), &[0.25, 0.75]);
        assert_eq!(pe.probs(), &[0.75, 0.25]);
        assert_eq!(average_fidelity_from_distributions(&po, &pe).unwrap(), 0.75);
        let s = optimal_strategy(5);
        let (po, pe) = s.distributions(0.0).unwrap();
        assert_eq!(average_fidelity_from_distributions(&po, &pe).unwrap(), 1.0);
    }
}
