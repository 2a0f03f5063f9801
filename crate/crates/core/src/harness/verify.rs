//! Named verification suites with machine-readable results.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::circuits::{compare_branches, run, Backend, CircuitKind, CircuitSpec, JointState, MsUnitary};
use crate::collective::MsConfig;
use crate::error::{Error, Result};
use crate::measurement::{
    measure, povm_from_theta, sector_pvm, threshold_pvm, CollectivePovm, TwoOutcomeTheta,
};
use crate::metrics::search::{povm_distribution, random_povm, trial_rng};
use crate::metrics::{
    average_fidelity, bound_closed_form, bound_coefficient_program, bound_violation_search,
    classical_trace_distance, optimal_strategy,
};
use crate::qstate::linalg::haar_unitary;
use crate::qstate::DensityOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    PovmAxioms,
    BackendAgreement,
    CircuitEquivalence,
    BoundSaturation,
    BoundSearch,
    TraceIdentities,
}

pub const SUITES: [Suite; 6] = [
    Suite::PovmAxioms,
    Suite::BackendAgreement,
    Suite::CircuitEquivalence,
    Suite::BoundSaturation,
    Suite::BoundSearch,
    Suite::TraceIdentities,
];

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::PovmAxioms => "povm-axioms",
            Suite::BackendAgreement => "backend-agreement",
            Suite::CircuitEquivalence => "circuit-equivalence",
            Suite::BoundSaturation => "bound-saturation",
            Suite::BoundSearch => "bound-search",
            Suite::TraceIdentities => "trace-identities",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SUITES
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub tolerance: f64,
    pub residual: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `residual <= tolerance`.
    pub fn new(name: impl Into<String>, tolerance: f64, residual: f64) -> Self {
        Check { name: name.into(), tolerance, residual, passed: residual <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::PovmAxioms => povm_axioms(seed)?,
        Suite::BackendAgreement => backend_agreement()?,
        Suite::CircuitEquivalence => circuit_equivalence()?,
        Suite::BoundSaturation => bound_saturation()?,
        Suite::BoundSearch => bound_search(seed)?,
        Suite::TraceIdentities => trace_identities(seed)?,
    };
    Ok(SuiteReport { suite, seed, passed: checks.iter().all(|c| c.passed), checks })
}

fn axiom_residual(p: &CollectivePovm) -> f64 {
    let a = p.coefficients();
    let range = a.iter().flatten().map(|&x| (-x).max(x - 1.0).max(0.0)).fold(0.0, f64::max);
    let completeness = (0..=p.n())
        .map(|m| (a.iter().map(|row| row[m]).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    range.max(completeness)
}

fn povm_axioms(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut worst = 0.0f64;
    for t in 0..100u64 {
        let mut rng = trial_rng(seed, t);
        let n = rng.random_range(1..=8);
        let k = rng.random_range(2..=n + 1);
        worst = worst.max(axiom_residual(&random_povm(n, k, &mut rng)));
    }
    checks.push(Check::new("random POVMs (100)", 1e-10, worst));
    let mut worst = 0.0f64;
    for n in 1..=8 {
        let theta = TwoOutcomeTheta::new((0..=n).map(|m| 0.7 * m as f64 - 1.3).collect())?;
        for p in [sector_pvm(n), threshold_pvm(n), povm_from_theta(&theta)] {
            worst = worst.max(axiom_residual(&p));
        }
    }
    checks.push(Check::new("constructed POVMs, N=1..8", 1e-10, worst));
    let mut worst = 0.0f64;
    for n in 1..=5 {
        let spec = CircuitSpec::new(
            CircuitKind::ParityConditioned { v_even: MsUnitary::Identity, v_odd: MsUnitary::CollectiveFlip },
            MsConfig::new(n, 0.3)?,
            Backend::Dense,
        )?;
        let state = run(&spec)?;
        let mut rng = trial_rng(seed, 1000 + n as u64);
        let recs = measure(&state, &random_povm(n, 3, &mut rng))?;
        worst = worst.max((recs.iter().map(|r| r.probability).sum::<f64>() - 1.0).abs());
    }
    checks.push(Check::new("probability conservation", 1e-10, worst));
    Ok(checks)
}

fn record_difference(a: &JointState, b: &JointState, povm: &CollectivePovm) -> Result<f64> {
    let ra = measure(a, povm)?;
    let rb = measure(b, povm)?;
    Ok(ra
        .iter()
        .zip(&rb)
        .map(|(x, y)| {
            (x.probability - y.probability)
                .abs()
                .max((x.fidelity_odd - y.fidelity_odd).abs())
                .max((x.fidelity_even - y.fidelity_even).abs())
        })
        .fold(0.0, f64::max))
}

fn backend_agreement() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let conditioned = CircuitKind::ParityConditioned { v_even: MsUnitary::Identity, v_odd: MsUnitary::CollectiveFlip };
    let cases: Vec<(CircuitKind, Vec<usize>, f64)> = vec![
        (CircuitKind::ParityCollective, vec![1, 2, 3, 4, 5], 0.0),
        (CircuitKind::HammingHalf, vec![2, 4, 6], 0.0),
        (CircuitKind::GhzLocal, vec![2, 3, 4], 0.0),
        (conditioned, vec![1, 2, 3, 4, 5], 0.3),
    ];
    for (kind, ns, eps) in cases {
        let mut worst = 0.0f64;
        for n in ns {
            let ms = MsConfig::new(n, eps)?;
            let dense = run(&CircuitSpec::new(kind.clone(), ms, Backend::Dense)?)?;
            let coll = run(&CircuitSpec::new(kind.clone(), ms, Backend::Collective)?)?;
            let (a, b) = (dense.sector_probabilities(), coll.sector_probabilities());
            worst = worst.max(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
            let theta = TwoOutcomeTheta::linear(n, std::f64::consts::PI / (2.0 * n as f64))?;
            for povm in [sector_pvm(n), povm_from_theta(&theta)] {
                worst = worst.max(record_difference(&dense, &coll, &povm)?);
            }
        }
        checks.push(Check::new(format!("{} dense vs collective", kind.name()), 1e-10, worst));
    }
    Ok(checks)
}

/// `1 - min` branch fidelity between the GHZ circuit and the parity circuit.
pub fn ghz_branch_defect(n: usize, backend: Backend) -> Result<f64> {
    let ms = MsConfig::pure(n)?;
    let ghz = run(&CircuitSpec::new(CircuitKind::GhzLocal, ms, backend)?)?;
    let parity = run(&CircuitSpec::new(CircuitKind::ParityCollective, ms, backend)?)?;
    let (a, b) = match (ghz.as_pure(), parity.as_pure()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Representation("branch comparison needs pure states".into())),
    };
    Ok(compare_branches(a, b)?.iter().map(|c| 1.0 - c.fidelity).fold(0.0, f64::max))
}

fn circuit_equivalence() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for backend in [Backend::Dense, Backend::Collective] {
        for n in 2..=4 {
            checks.push(Check::new(
                format!("ghz_local vs parity_collective, N={n}, {backend:?}"),
                1e-10,
                ghz_branch_defect(n, backend)?,
            ));
        }
    }
    Ok(checks)
}

/// `|F_avg - bound|` for the optimal strategy simulated on the dense register.
pub fn saturation_residual(n: usize, epsilon: f64) -> Result<f64> {
    let s = optimal_strategy(n);
    let spec = CircuitSpec::new(s.circuit_kind(), MsConfig::new(n, epsilon)?, Backend::Dense)?;
    let records = measure(&run(&spec)?, &s.povm)?;
    Ok((average_fidelity(&records) - bound_closed_form(n, epsilon)?).abs())
}

fn bound_saturation() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for n in 1..=6 {
        for eps in [0.1, 0.3, 0.5, 0.7] {
            checks.push(Check::new(format!("optimal strategy N={n} eps={eps}"), 1e-10, saturation_residual(n, eps)?));
        }
    }
    let mut worst = 0.0f64;
    for n in 1..=60 {
        for eps in [0.1, 0.5, 0.9] {
            worst = worst.max(bound_coefficient_program(n, eps)?.0.max_disagreement());
        }
    }
    checks.push(Check::new("three bound forms agree, N=1..60", 1e-10, worst));
    Ok(checks)
}

fn bound_search(seed: u64) -> Result<Vec<Check>> {
    let r = bound_violation_search(3, 0.5, 1000, seed, true)?;
    Ok(vec![
        Check::new("collective POVMs stay below the bound", 1e-9, (r.max_found - r.bound).max(0.0)),
        Check::new("any measurement stays below the bound", 1e-9, (r.max_found_unrestricted - r.bound).max(0.0)),
        Check::new("violating samples", 0.0, (r.violations + r.unrestricted_violations + r.chain_violations) as f64),
        Check::new("eigenbasis PVM attains D_q", 1e-9, r.max_eigenbasis_residual),
        Check::new("optimal strategy gap", 1e-10, r.optimal.map_or(f64::INFINITY, |o| (r.bound - o.f_avg).abs())),
    ])
}

/// Simulates a random parity-conditioned strategy on the dense register and
/// returns `(|F_avg - (1 + D_c)/2|, max |F_o + F_e - 1|)`.
pub fn trace_identity_residuals(n: usize, epsilon: f64, seed: u64, trial: u64) -> Result<(f64, f64)> {
    let mut rng = trial_rng(seed, trial);
    let dim = 1 << n;
    let (v_odd, v_even) = (haar_unitary(dim, &mut rng), haar_unitary(dim, &mut rng));
    let outcomes = rng.random_range(2..=n + 1);
    let povm = random_povm(n, outcomes, &mut rng);
    let ms = MsConfig::new(n, epsilon)?;
    let kind = CircuitKind::ParityConditioned {
        v_even: MsUnitary::Matrix(v_even.clone()),
        v_odd: MsUnitary::Matrix(v_odd.clone()),
    };
    let records = measure(&run(&CircuitSpec::new(kind, ms, Backend::Dense)?)?, &povm)?;
    let rho = ms.rho_epsilon_dense()?;
    let conj = |v: &crate::qstate::linalg::CMatrix| {
        DensityOperator::new(v * rho.matrix() * v.adjoint(), rho.layout().clone())
    };
    let (p_o, p_e) = (povm_distribution(&conj(&v_odd)?, &povm)?, povm_distribution(&conj(&v_even)?, &povm)?);
    let identity = (average_fidelity(&records) - 0.5 * (1.0 + classical_trace_distance(&p_o, &p_e)?)).abs();
    let complement = records
        .iter()
        .filter(|r| r.post_state.is_some())
        .map(|r| (r.fidelity_odd + r.fidelity_even - 1.0).abs())
        .fold(0.0, f64::max);
    Ok((identity, complement))
}

fn trace_identities(seed: u64) -> Result<Vec<Check>> {
    let (mut worst_id, mut worst_sum) = (0.0f64, 0.0f64);
    let mut t = 0;
    for n in 1..=3 {
        for eps in [0.0, 0.2, 0.5, 0.8] {
            for _ in 0..5 {
                let (a, b) = trace_identity_residuals(n, eps, seed, t)?;
                worst_id = worst_id.max(a);
                worst_sum = worst_sum.max(b);
                t += 1;
            }
        }
    }
    Ok(vec![
        Check::new("F_avg = (1 + D_c)/2", 1e-10, worst_id),
        Check::new("F_o + F_e = 1 after post-selection", 1e-10, worst_sum),
    ])
}
