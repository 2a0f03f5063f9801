use serde::Serialize;

use super::config::{MeasurementChoice, ScenarioConfig, UnitaryTag};
use crate::circuits::{compare_branches, disentangle, run, Backend, BranchComparison, CircuitKind, CircuitSpec, JointState};
use crate::error::Result;
use crate::measurement::{apparatus_measure_linear, measure, ApparatusSpec, OutcomeRecord};
use crate::metrics::fidelity::renormalized;
use crate::metrics::{average_fidelity, classical_trace_distance, OutcomeDistribution};
use crate::qstate::MatrixParts;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeReport {
    pub id: usize,
    pub p: f64,
    pub f_odd: f64,
    pub f_even: f64,
    pub f_best: f64,
    pub sectors: Vec<f64>,
}

impl From<&OutcomeRecord> for OutcomeReport {
    fn from(r: &OutcomeRecord) -> Self {
        OutcomeReport {
            id: r.outcome,
            p: r.probability,
            f_odd: r.fidelity_odd,
            f_even: r.fidelity_even,
            f_best: r.fidelity_best,
            sectors: r.sectors.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PostSelection {
    pub outcome: usize,
    pub probability: f64,
    pub f_odd: f64,
    pub f_even: f64,
    /// Reduced two-qubit state; `None` for an impossible outcome.
    pub qubit_state: Option<MatrixParts>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub backend: Backend,
    pub probability_sum: f64,
    /// Per-branch overlap and phase against the parity circuit (GHZ circuit only).
    pub branch_phases: Option<Vec<BranchComparison>>,
    /// `F_avg - (1 + D_c)/2` for parity-conditioned scenarios measured without disentangling.
    pub trace_identity_residual: Option<f64>,
    pub postselected: Option<PostSelection>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioConfig,
    pub outcomes: Vec<OutcomeReport>,
    pub f_avg: f64,
    pub diagnostics: Diagnostics,
}

/// Evolves, measures and (optionally) disentangles; returns the evolved state
/// and one record per outcome.
pub fn simulate_records(cfg: &ScenarioConfig) -> Result<(CircuitSpec, JointState, Vec<OutcomeRecord>)> {
    cfg.validate()?;
    let spec = cfg.circuit_spec()?;
    let state = run(&spec)?;
    let mut records = match &cfg.measurement {
        MeasurementChoice::Apparatus { g, t_m } => apparatus_measure_linear(&state, &ApparatusSpec::new(*g, *t_m)?)?,
        m => measure(&state, &m.povm(cfg.n)?)?,
    };
    if cfg.disentangle {
        records = records
            .into_iter()
            .map(|r| {
                let post = r.post_state.as_ref().map(|s| disentangle(&spec, s)).transpose()?;
                OutcomeRecord::from_state(r.outcome, r.probability, post, cfg.n)
            })
            .collect::<Result<_>>()?;
    }
    Ok((spec, state, records))
}

fn branch_phases(spec: &CircuitSpec, state: &JointState) -> Result<Option<Vec<BranchComparison>>> {
    if spec.kind() != &CircuitKind::GhzLocal {
        return Ok(None);
    }
    let reference = CircuitSpec::new(CircuitKind::ParityCollective, *spec.ms(), spec.backend())?;
    match (state.as_pure(), run(&reference)?.as_pure()) {
        (Some(a), Some(b)) => Ok(Some(compare_branches(a, b)?)),
        _ => Ok(None),
    }
}

fn trace_identity_residual(cfg: &ScenarioConfig, f_avg: f64) -> Result<Option<f64>> {
    if cfg.disentangle || cfg.circuit != super::config::CircuitChoice::ParityConditioned {
        return Ok(None);
    }
    let weights = cfg.ms()?.sector_weights();
    let sectors = |tag: UnitaryTag| match tag {
        UnitaryTag::Identity => weights.clone(),
        UnitaryTag::Flip => weights.iter().rev().cloned().collect(),
    };
    let povm = cfg.measurement.povm(cfg.n)?;
    let dist = |tag| renormalized(povm.distribution(&sectors(tag)));
    let (p_o, p_e): (OutcomeDistribution, OutcomeDistribution) = (dist(cfg.v_odd)?, dist(cfg.v_even)?);
    Ok(Some(f_avg - 0.5 * (1.0 + classical_trace_distance(&p_o, &p_e)?)))
}

pub fn simulate(cfg: &ScenarioConfig) -> Result<RunReport> {
    let (spec, state, records) = simulate_records(cfg)?;
    let f_avg = average_fidelity(&records);
    let postselected = match cfg.postselect {
        Some(k) => {
            let r = &records[k];
            Some(PostSelection {
                outcome: k,
                probability: r.probability,
                f_odd: r.fidelity_odd,
                f_even: r.fidelity_even,
                qubit_state: r.qubit_state().transpose()?.map(|q| q.to_parts()),
            })
        }
        None => None,
    };
    Ok(RunReport {
        scenario: cfg.clone(),
        outcomes: records.iter().map(OutcomeReport::from).collect(),
        f_avg,
        diagnostics: Diagnostics {
            backend: spec.backend(),
            probability_sum: records.iter().map(|r| r.probability).sum(),
            branch_phases: branch_phases(&spec, &state)?,
            trace_identity_residual: trace_identity_residual(cfg, f_avg)?,
            postselected,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ConfigSource;

    fn cfg(text: &str) -> ScenarioConfig {
        ScenarioConfig::from_source(&ConfigSource::parse(text).unwrap()).unwrap()
    }

    #[test]
    fn flawless_parity_run() {
        let r = simulate(&cfg("circuit = parity_collective\nn = 3\nmeasurement = two_outcome\ntheta = pi/2n")).unwrap();
        assert_eq!(r.outcomes.len(), 2);
        for o in &r.outcomes {
            assert!((o.p - 0.5).abs() < 1e-12);
            assert!((o.f_best - 1.0).abs() < 1e-12);
        }
        assert!((r.f_avg - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hamming_postselection() {
        let r = simulate(&cfg("circuit = hamming_half\nn = 4\npostselect = 2\ndisentangle = true")).unwrap();
        let p: Vec<f64> = r.outcomes.iter().map(|o| o.p).collect();
        for (x, y) in p.iter().zip([0.25, 0.0, 0.5, 0.0, 0.25]) {
            assert!((x - y).abs() < 1e-12);
        }
        let ps = r.diagnostics.postselected.unwrap();
        assert!((ps.f_odd - 1.0).abs() < 1e-12);
        let q = ps.qubit_state.unwrap();
        assert!((q.re[1][2] - 0.5).abs() < 1e-12 && (q.re[0][0]).abs() < 1e-12);
    }

    #[test]
    fn indistinguishable_branches() {
        let r = simulate(&cfg("circuit = parity_conditioned\nv_odd = identity\nn = 3\nepsilon = 0.4")).unwrap();
        assert!((r.f_avg - 0.5).abs() < 1e-12);
        assert!(r.diagnostics.trace_identity_residual.unwrap().abs() < 1e-12);
    }

    #[test]
    fn ghz_reports_branch_phases() {
        let r = simulate(&cfg("circuit = ghz_local\nn = 3\nmeasurement = two_outcome")).unwrap();
        let phases = r.diagnostics.branch_phases.unwrap();
        assert!(phases.iter().all(|b| (b.fidelity - 1.0).abs() < 1e-10));
        assert!((r.f_avg - 1.0).abs() < 1e-12);
    }
}
