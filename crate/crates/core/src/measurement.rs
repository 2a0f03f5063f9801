//! Collective-excitation measurements of the MS.
//!
//! Every effect is diagonal in the excitation sectors, `E_a = sum_m a[a][m] Pi(m)`,
//! so a POVM is just its coefficient table. Post-measurement states follow the
//! square-root rule `sqrt(E_a) rho sqrt(E_a) / Tr(E_a rho)`.

use serde::Serialize;

use crate::circuits::JointState;
use crate::collective::SectorEnsemble;
use crate::error::{Error, Result};
use crate::metrics::{fidelity, BellTarget};
use crate::qstate::linalg::{c, C64, ONE};
use crate::qstate::{
    DensityOperator, MonomialOp, OpSum, PureState, Slot, SlotRole, SubsystemLayout,
};
use crate::tolerance;

/// Coefficient table `a[outcome][m]` of a collective POVM.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollectivePovm {
    coefficients: Vec<Vec<f64>>,
}

impl CollectivePovm {
    pub fn new(coefficients: Vec<Vec<f64>>) -> Result<Self> {
        let width = coefficients
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Validation("POVM needs at least one outcome".into()))?;
        if width == 0 || coefficients.iter().any(|row| row.len() != width) {
            return Err(Error::Validation("POVM coefficient rows differ in length".into()));
        }
        for (a, row) in coefficients.iter().enumerate() {
            for (m, &x) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::Validation(format!(
                        "POVM coefficient a[{a}][{m}] = {x} is outside [0, 1]"
                    )));
                }
            }
        }
        for m in 0..width {
            let total: f64 = coefficients.iter().map(|row| row[m]).sum();
            if (total - 1.0).abs() > tolerance::POVM_COMPLETENESS {
                return Err(Error::Validation(format!(
                    "POVM is incomplete: coefficients for m={m} sum to {total}"
                )));
            }
        }
        Ok(CollectivePovm { coefficients })
    }

    pub fn outcomes(&self) -> usize {
        self.coefficients.len()
    }

    /// Largest excitation the POVM is defined for (the MS size).
    pub fn n(&self) -> usize {
        self.coefficients[0].len() - 1
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    pub fn coefficient(&self, outcome: usize, m: usize) -> f64 {
        self.coefficients[outcome][m]
    }

    /// Outcome distribution for a given excitation distribution `p(m)`.
    pub fn distribution(&self, sectors: &[f64]) -> Vec<f64> {
        self.coefficients
            .iter()
            .map(|row| row.iter().zip(sectors).map(|(a, p)| a * p).sum())
            .collect()
    }
}

/// `theta(m)` for `m = 0..=N` defining `E_0 = sum cos^2 theta(m) Pi(m)`, `E_1 = sum sin^2 theta(m) Pi(m)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoOutcomeTheta {
    theta: Vec<f64>,
}

impl TwoOutcomeTheta {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.len() < 2 {
            return Err(Error::Validation("theta table needs entries for m = 0..=N with N >= 1".into()));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Validation("theta table has a non-finite entry".into()));
        }
        Ok(TwoOutcomeTheta { theta })
    }

    /// `theta(m) = slope * m`.
    pub fn linear(n: usize, slope: f64) -> Result<Self> {
        Self::new((0..=n).map(|m| slope * m as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.theta
    }

    pub fn n(&self) -> usize {
        self.theta.len() - 1
    }
}

/// Linear coupling `H_M = g J_z (x) sigma_y` between the MS and an apparatus qubit,
/// switched on for a time `t_M`; it realizes `theta(m) = g m t_M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApparatusSpec {
    pub g: f64,
    pub t_m: f64,
}

impl ApparatusSpec {
    pub fn new(g: f64, t_m: f64) -> Result<Self> {
        let gt = g * t_m;
        if !gt.is_finite() || gt < 0.0 {
            return Err(Error::Validation(format!("g * t_M must be finite and nonnegative, got {gt}")));
        }
        Ok(ApparatusSpec { g, t_m })
    }

    pub fn theta(&self, n: usize) -> TwoOutcomeTheta {
        TwoOutcomeTheta::linear(n, self.g * self.t_m).expect("validated coupling")
    }
}

pub fn povm_from_theta(t: &TwoOutcomeTheta) -> CollectivePovm {
    let cos2 = t.theta.iter().map(|x| x.cos().powi(2)).collect();
    let sin2 = t.theta.iter().map(|x| x.sin().powi(2)).collect();
    CollectivePovm { coefficients: vec![cos2, sin2] }
}

/// Two outcomes separating `m <= floor(N/2)` from `m > floor(N/2)`.
pub fn threshold_pvm(n: usize) -> CollectivePovm {
    let low: Vec<f64> = (0..=n).map(|m| if m <= n / 2 { 1.0 } else { 0.0 }).collect();
    let high = low.iter().map(|x| 1.0 - x).collect();
    CollectivePovm { coefficients: vec![low, high] }
}

/// The projective measurement of the total excitation, one outcome per `m`.
pub fn sector_pvm(n: usize) -> CollectivePovm {
    CollectivePovm {
        coefficients: (0..=n).map(|a| (0..=n).map(|m| if a == m { 1.0 } else { 0.0 }).collect()).collect(),
    }
}

/// One measurement outcome and the post-selected state it leaves behind.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeRecord {
    pub outcome: usize,
    pub probability: f64,
    /// `None` when the outcome is (numerically) impossible.
    pub post_state: Option<JointState>,
    pub fidelity_odd: f64,
    pub fidelity_even: f64,
    /// `max(fidelity_odd, fidelity_even)`.
    pub fidelity_best: f64,
    /// Excitation distribution of the post-selected MS.
    pub sectors: Vec<f64>,
}

impl OutcomeRecord {
    /// Builds a record, computing the Bell fidelities of `post_state`.
    pub fn from_state(outcome: usize, probability: f64, post_state: Option<JointState>, n: usize) -> Result<Self> {
        let (fidelity_odd, fidelity_even, sectors) = match &post_state {
            Some(s) => {
                let q = s.partial_trace(&[0, 1])?;
                (fidelity(&q, BellTarget::OddPlus)?, fidelity(&q, BellTarget::EvenPlus)?, s.sector_probabilities())
            }
            None => (0.0, 0.0, vec![0.0; n + 1]),
        };
        Ok(OutcomeRecord {
            outcome,
            probability,
            post_state,
            fidelity_odd,
            fidelity_even,
            fidelity_best: fidelity_odd.max(fidelity_even),
            sectors,
        })
    }

    /// Reduced two-qubit state of the post-selected outcome.
    pub fn qubit_state(&self) -> Option<Result<DensityOperator>> {
        self.post_state.as_ref().map(|s| s.partial_trace(&[0, 1]))
    }
}

fn diagonal_op(dim: usize, f: impl Fn(usize) -> f64) -> MonomialOp {
    MonomialOp::from_fn(dim, |i| (i, c(f(i), 0.0))).expect("diagonal")
}

/// Applies a real diagonal operator and returns the unnormalized weight it leaves.
fn weigh(state: &JointState, factor: impl Fn(usize) -> f64) -> Result<(f64, JointState)> {
    let f: Vec<f64> = (0..state.layout().total_dim()).map(factor).collect();
    let op = OpSum::single(diagonal_op(f.len(), |i| f[i]));
    Ok(match state {
        JointState::Pure(s) => {
            let out = op.apply_pure(s)?;
            (out.norm().powi(2), JointState::Pure(out))
        }
        JointState::Mixed(s) => {
            let out = s.diagonal_sandwich(|i| c(f[i], 0.0));
            (out.trace(), JointState::Mixed(out))
        }
        JointState::Ensemble(e) => {
            let mut total = 0.0;
            let mut members = Vec::new();
            for (w, s) in e.members() {
                let out = op.apply_pure(s)?;
                let p = out.norm().powi(2);
                total += w * p;
                members.push((w * p, out));
            }
            (total, JointState::Ensemble(SectorEnsemble::new(members)?))
        }
    })
}

/// Rescales an unnormalized branch of total weight `p` back to a state.
fn renormalize(state: JointState, p: f64) -> Result<JointState> {
    Ok(match state {
        JointState::Pure(s) => {
            let layout = s.layout().clone();
            JointState::Pure(PureState::normalized(s.amplitudes().clone(), layout)?)
        }
        JointState::Mixed(s) => JointState::Mixed(s.scale(1.0 / p)),
        JointState::Ensemble(e) => {
            let members = e
                .members()
                .iter()
                .filter(|(w, s)| *w > 0.0 && s.norm() > 0.0)
                .map(|(w, s)| {
                    Ok((w / p, PureState::normalized(s.amplitudes().clone(), s.layout().clone())?))
                })
                .collect::<Result<Vec<_>>>()?;
            JointState::Ensemble(SectorEnsemble::new(members)?)
        }
    })
}

fn check_povm_fits(state: &JointState, n: usize) -> Result<()> {
    let ms = state.layout().ms_size();
    if ms != n {
        return Err(Error::Layout(format!(
            "measurement is defined for N={n} but the state's MS has {ms} sites"
        )));
    }
    Ok(())
}

/// Measures the MS with `povm` and returns one record per outcome.
pub fn measure(state: &JointState, povm: &CollectivePovm) -> Result<Vec<OutcomeRecord>> {
    check_povm_fits(state, povm.n())?;
    let table = state.layout().excitation_table();
    (0..povm.outcomes())
        .map(|a| {
            let row = &povm.coefficients[a];
            let (p, branch) = weigh(state, |i| row[table[i]].sqrt())?;
            let post = if p < tolerance::NULL_PROBABILITY { None } else { Some(renormalize(branch, p)?) };
            OutcomeRecord::from_state(a, p.max(0.0), post, povm.n())
        })
        .collect()
}

/// `U_M = sum_m Pi(m) (x) exp(-i theta(m) sigma_y)` on a layout whose last slot is the apparatus.
fn coupling(layout: &SubsystemLayout, theta: &[f64]) -> Result<OpSum> {
    let app = layout.len() - 1;
    let table = layout.excitation_table();
    let dim = layout.total_dim();
    let stride = layout.strides()[app];
    let cos = diagonal_op(dim, |i| theta[table[i]].cos());
    // -i sigma_y sends |0> to |1> and |1> to -|0>.
    let sin = MonomialOp::from_fn(dim, |i| {
        let s = theta[table[i]].sin();
        if layout.digits(i)[app] == 0 {
            (i + stride, c(s, 0.0))
        } else {
            (i - stride, c(-s, 0.0))
        }
    })?;
    OpSum::new(vec![(ONE, cos), (ONE, sin)])
}

fn attach_apparatus(state: &JointState) -> Result<JointState> {
    if state.layout().find(SlotRole::Apparatus).is_some() {
        return Err(Error::Layout("state already carries an apparatus qubit".into()));
    }
    let app_layout = SubsystemLayout::new(vec![Slot::apparatus()])?;
    let zero = PureState::zero(app_layout);
    Ok(match state {
        JointState::Pure(s) => JointState::Pure(s.tensor(&zero)?),
        JointState::Mixed(s) => JointState::Mixed(s.tensor(&zero.to_density())?),
        JointState::Ensemble(e) => JointState::Ensemble(e.map_members(|s| s.tensor(&zero))?),
    })
}

/// Projects the apparatus (last slot) onto `|k>` and drops it.
fn read_apparatus(state: &JointState, k: usize) -> Result<(f64, JointState)> {
    let layout = state.layout();
    let app = layout.len() - 1;
    let keep: Vec<usize> = (0..app).collect();
    let (p, projected) = weigh(state, |i| if layout.digits(i)[app] == k { 1.0 } else { 0.0 })?;
    let reduced_layout = layout.select(&keep)?;
    let drop_pure = |s: &PureState| -> PureState {
        let amps = (0..reduced_layout.total_dim()).map(|i| s.amplitudes()[2 * i + k]);
        PureState::from_raw(amps.collect::<Vec<C64>>().into(), reduced_layout.clone())
    };
    let out = match projected {
        JointState::Pure(s) => JointState::Pure(drop_pure(&s)),
        JointState::Mixed(s) => JointState::Mixed(s.partial_trace(&keep)?),
        JointState::Ensemble(e) => {
            let members = e.members().iter().map(|(w, s)| (*w, drop_pure(s))).collect();
            JointState::Ensemble(SectorEnsemble::new(members)?)
        }
    };
    Ok((p, out))
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Two-outcome measurement realized with an apparatus qubit: attach `|0>`, couple
/// with `U_M`, read the apparatus in the computational basis, discard it.
///
/// The raw branch amplitudes are `cos theta(m)` and `sin theta(m)` with their
/// signs, whereas `sqrt(E)` carries their absolute values; the two differ by the
/// sector-diagonal unitary `sum_m sign(cos theta(m)) Pi(m)` (resp. `sin`), which is
/// undone here so the records coincide with [`measure`] under [`povm_from_theta`].
pub fn apparatus_measure(state: &JointState, theta: &TwoOutcomeTheta) -> Result<Vec<OutcomeRecord>> {
    check_povm_fits(state, theta.n())?;
    let attached = attach_apparatus(state)?;
    let coupled = attached.apply_sum(&coupling(attached.layout(), theta.values())?)?;
    let table = state.layout().excitation_table();
    (0..2)
        .map(|k| {
            let (p, branch) = read_apparatus(&coupled, k)?;
            if p < tolerance::NULL_PROBABILITY {
                return OutcomeRecord::from_state(k, p.max(0.0), None, theta.n());
            }
            let signs = |i: usize| {
                let t = theta.values()[table[i]];
                if k == 0 { sign(t.cos()) } else { sign(t.sin()) }
            };
            let corrected = branch.apply_sum(&OpSum::single(diagonal_op(branch.layout().total_dim(), signs)))?;
            OutcomeRecord::from_state(k, p, Some(renormalize(corrected, p)?), theta.n())
        })
        .collect()
}

/// [`apparatus_measure`] driven by a linear coupling.
pub fn apparatus_measure_linear(state: &JointState, spec: &ApparatusSpec) -> Result<Vec<OutcomeRecord>> {
    apparatus_measure(state, &spec.theta(state.layout().ms_size()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{disentangle, run, Backend, CircuitKind, CircuitSpec, MsUnitary};
    use crate::collective::MsConfig;
    use std::f64::consts::PI;

    fn spec(kind: CircuitKind, n: usize, eps: f64, backend: Backend) -> CircuitSpec {
        CircuitSpec::new(kind, MsConfig::new(n, eps).unwrap(), backend).unwrap()
    }

    #[test]
    fn theta_povms() {
        let n = 4;
        let p = povm_from_theta(&TwoOutcomeTheta::linear(n, PI / (2.0 * n as f64)).unwrap());
        assert_eq!(p.coefficient(0, 0), 1.0);
        assert!(p.coefficient(0, n) < 1e-30);
        let p = povm_from_theta(&TwoOutcomeTheta::linear(n, PI / n as f64).unwrap());
        assert_eq!(p.coefficient(0, 0), 1.0);
        assert!(p.coefficient(0, n / 2) < 1e-30);
        assert!((p.coefficient(0, n) - 1.0).abs() < 1e-15);
        let p = povm_from_theta(&TwoOutcomeTheta::new(vec![0.0; 3]).unwrap());
        assert_eq!(p.coefficients(), &[vec![1.0; 3], vec![0.0; 3]]);
        assert!(CollectivePovm::new(p.coefficients().to_vec()).is_ok());
    }

    #[test]
    fn threshold_and_sector_pvms() {
        assert_eq!(threshold_pvm(2).coefficients(), &[vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        assert_eq!(threshold_pvm(3).coefficients()[0], vec![1.0, 1.0, 0.0, 0.0]);
        assert_eq!(sector_pvm(1).coefficients(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        for n in 1..6 {
            for p in [threshold_pvm(n), sector_pvm(n)] {
                assert!(CollectivePovm::new(p.coefficients().to_vec()).is_ok());
            }
        }
    }

    #[test]
    fn povm_validation() {
        assert!(CollectivePovm::new(vec![vec![0.5, 1.0], vec![0.4, 0.0]]).is_err());
        assert!(CollectivePovm::new(vec![vec![1.5, 1.0], vec![-0.5, 0.0]]).is_err());
        assert!(CollectivePovm::new(vec![vec![1.0], vec![0.0, 1.0]]).is_err());
        assert!(CollectivePovm::new(vec![]).is_err());
    }

    #[test]
    fn flawless_parity_measurement() {
        for backend in [Backend::Dense, Backend::Collective] {
            let n = 3;
            let state = run(&spec(CircuitKind::ParityCollective, n, 0.0, backend)).unwrap();
            let povm = povm_from_theta(&TwoOutcomeTheta::linear(n, PI / (2.0 * n as f64)).unwrap());
            let recs = measure(&state, &povm).unwrap();
            assert_eq!(recs.len(), 2);
            assert!((recs[0].probability - 0.5).abs() < 1e-12);
            assert!((recs[1].probability - 0.5).abs() < 1e-12);
            assert!((recs[0].fidelity_even - 1.0).abs() < 1e-12);
            assert!((recs[1].fidelity_odd - 1.0).abs() < 1e-12);
            assert!((recs[0].sectors[0] - 1.0).abs() < 1e-12);
            assert!((recs[1].sectors[n] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cyclic_povm_on_hamming_state_measures_parity() {
        let n = 4;
        let s = spec(CircuitKind::HammingHalf, n, 0.0, Backend::Collective);
        let state = run(&s).unwrap();
        let povm = povm_from_theta(&TwoOutcomeTheta::linear(n, PI / n as f64).unwrap());
        let recs = measure(&state, &povm).unwrap();
        assert!((recs[0].probability - 0.5).abs() < 1e-12);
        // outcome 0 keeps |00>|0,0> and |11>|2,2> coherently
        let post = recs[0].post_state.as_ref().unwrap().as_pure().unwrap();
        let l = post.layout().clone();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((post.amplitudes()[l.index(&[0, 0, 0, 0])].re - h).abs() < 1e-12);
        assert!((post.amplitudes()[l.index(&[1, 1, 2, 2])].re - h).abs() < 1e-12);
        // disentangling yields the Bell states with a polarized MS
        for rec in &recs {
            let out = disentangle(&s, rec.post_state.as_ref().unwrap()).unwrap();
            let q = out.partial_trace(&[0, 1]).unwrap();
            let best = fidelity(&q, BellTarget::EvenPlus).unwrap().max(fidelity(&q, BellTarget::OddPlus).unwrap());
            assert!((best - 1.0).abs() < 1e-12);
            assert!((out.sector_probabilities()[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_effect_leaves_state() {
        let state = run(&spec(CircuitKind::ParityCollective, 2, 0.0, Backend::Dense)).unwrap();
        let recs = measure(&state, &povm_from_theta(&TwoOutcomeTheta::new(vec![0.0; 3]).unwrap())).unwrap();
        assert_eq!(recs[0].probability, 1.0);
        assert_eq!(recs[0].post_state.as_ref(), Some(&state));
        assert_eq!(recs[1].probability, 0.0);
        assert!(recs[1].post_state.is_none());
    }

    #[test]
    fn leaky_povm_fidelity_law() {
        // a[1][0] = p_e, a[1][N] = p_o both nonzero
        let n = 3;
        let state = run(&spec(CircuitKind::ParityCollective, n, 0.0, Backend::Collective)).unwrap();
        let (pe, po) = (0.7, 0.2);
        let povm = CollectivePovm::new(vec![
            vec![1.0 - pe, 0.5, 0.5, 1.0 - po],
            vec![pe, 0.5, 0.5, po],
        ])
        .unwrap();
        let r = &measure(&state, &povm).unwrap()[1];
        assert!((r.fidelity_even - pe / (pe + po)).abs() < 1e-12);
        assert!((r.probability - 0.5 * (pe + po)).abs() < 1e-12);
    }

    #[test]
    fn apparatus_reproduces_the_flawless_measurement() {
        let n = 3;
        let state = run(&spec(CircuitKind::ParityCollective, n, 0.0, Backend::Dense)).unwrap();
        let g = 2.0;
        let app = ApparatusSpec::new(g, PI / (2.0 * n as f64 * g)).unwrap();
        let a = apparatus_measure_linear(&state, &app).unwrap();
        let m = measure(&state, &povm_from_theta(&app.theta(n))).unwrap();
        for (x, y) in a.iter().zip(&m) {
            assert!((x.probability - y.probability).abs() < 1e-12);
            let d = x.post_state.as_ref().unwrap().as_pure().unwrap().amplitudes()
                - y.post_state.as_ref().unwrap().as_pure().unwrap().amplitudes();
            assert!(d.camax() < 1e-12);
        }
        let zero = apparatus_measure_linear(&state, &ApparatusSpec::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(zero[0].probability, 1.0);
        assert!(zero[1].post_state.is_none());
        assert!(ApparatusSpec::new(1.0, -1.0).is_err());
    }

    #[test]
    fn sign_correction_keeps_even_bell_state() {
        // theta(m) = pi m / N has cos theta(N) = -1 on the m = N branch.
        let n = 4;
        let s = spec(CircuitKind::HammingHalf, n, 0.0, Backend::Dense);
        let state = run(&s).unwrap();
        let theta = TwoOutcomeTheta::linear(n, PI / n as f64).unwrap();
        let a = apparatus_measure(&state, &theta).unwrap();
        let out = disentangle(&s, a[0].post_state.as_ref().unwrap()).unwrap();
        let q = out.partial_trace(&[0, 1]).unwrap();
        assert!((fidelity(&q, BellTarget::EvenPlus).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_and_ensemble_inputs() {
        let kind = CircuitKind::ParityConditioned { v_even: MsUnitary::Identity, v_odd: MsUnitary::CollectiveFlip };
        let n = 3;
        let dense = run(&spec(kind.clone(), n, 0.5, Backend::Dense)).unwrap();
        let coll = run(&spec(kind, n, 0.5, Backend::Collective)).unwrap();
        let theta = TwoOutcomeTheta::new(vec![0.3, 2.0, -1.1, 2.7]).unwrap();
        for state in [&dense, &coll] {
            let a = apparatus_measure(state, &theta).unwrap();
            let m = measure(state, &povm_from_theta(&theta)).unwrap();
            for (x, y) in a.iter().zip(&m) {
                assert!((x.probability - y.probability).abs() < 1e-12);
                assert!((x.fidelity_even - y.fidelity_even).abs() < 1e-12);
            }
        }
        let rd = measure(&dense, &sector_pvm(n)).unwrap();
        let rc = measure(&coll, &sector_pvm(n)).unwrap();
        for (x, y) in rd.iter().zip(&rc) {
            assert!((x.probability - y.probability).abs() < 1e-12);
            assert!((x.fidelity_odd - y.fidelity_odd).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_povm_size_is_rejected() {
        let state = run(&spec(CircuitKind::ParityCollective, 3, 0.0, Backend::Dense)).unwrap();
        assert!(matches!(measure(&state, &sector_pvm(2)), Err(Error::Layout(_))));
    }
}
