use serde::Serialize;

use super::layout::SubsystemLayout;
use super::linalg::{c, hermitian_eig, hermiticity_error, CMatrix, CVector, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::tolerance;

/// Normalized state vector over a declared layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    layout: SubsystemLayout,
}

/// Density matrix over a declared layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    layout: SubsystemLayout,
}

fn check_op(layout: &SubsystemLayout, op: &CMatrix, slots: &[usize]) -> Result<()> {
    layout.check_slots(slots)?;
    let sub: usize = slots.iter().map(|&s| layout.slots()[s].dim).product();
    if op.nrows() != sub || op.ncols() != sub {
        return Err(Error::Layout(format!(
            "operator is {}x{} but the selected slots span dimension {sub}",
            op.nrows(),
            op.ncols()
        )));
    }
    Ok(())
}

/// Applies `op` (acting on the big-endian product of `slots`) to every column of `m`.
fn apply_to_columns(m: &mut CMatrix, layout: &SubsystemLayout, op: &CMatrix, slots: &[usize]) {
    let sel = layout.offsets(slots);
    let rest = layout.offsets(&layout.complement(slots));
    let mut buf = CVector::zeros(sel.len());
    for col in 0..m.ncols() {
        for &base in &rest {
            for (k, &o) in sel.iter().enumerate() {
                buf[k] = m[(base + o, col)];
            }
            let out = op * &buf;
            for (k, &o) in sel.iter().enumerate() {
                m[(base + o, col)] = out[k];
            }
        }
    }
}

impl PureState {
    pub fn new(amplitudes: CVector, layout: SubsystemLayout) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::Layout(format!(
                "{} amplitudes for a layout of dimension {}",
                amplitudes.len(),
                layout.total_dim()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tolerance::NORM {
            return Err(Error::Validation(format!("state norm is {norm}, expected 1")));
        }
        Ok(PureState { amplitudes, layout })
    }

    /// Normalizes `amplitudes`; fails on a zero vector.
    pub fn normalized(amplitudes: CVector, layout: SubsystemLayout) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        Self::new(amplitudes.unscale(norm), layout)
    }

    pub(crate) fn from_raw(amplitudes: CVector, layout: SubsystemLayout) -> Self {
        debug_assert_eq!(amplitudes.len(), layout.total_dim());
        PureState { amplitudes, layout }
    }

    pub fn basis(layout: SubsystemLayout, digits: &[usize]) -> Result<Self> {
        if digits.len() != layout.len() || digits.iter().zip(layout.slots()).any(|(&d, s)| d >= s.dim) {
            return Err(Error::Layout(format!("digits {digits:?} do not fit the layout")));
        }
        let mut amps = CVector::zeros(layout.total_dim());
        amps[layout.index(digits)] = ONE;
        Ok(PureState { amplitudes: amps, layout })
    }

    pub fn zero(layout: SubsystemLayout) -> Self {
        let mut amps = CVector::zeros(layout.total_dim());
        amps[0] = ONE;
        PureState { amplitudes: amps, layout }
    }

    /// Single generic qubit `(|0> + |1>)/sqrt(2)`.
    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState {
            amplitudes: CVector::from_vec(vec![c(h, 0.0), c(h, 0.0)]),
            layout: SubsystemLayout::qubits(1).expect("one qubit"),
        }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn with_layout(self, layout: SubsystemLayout) -> Result<Self> {
        if layout.total_dim() != self.dim() {
            return Err(Error::Layout("relabelled layout has a different dimension".into()));
        }
        Ok(PureState { amplitudes: self.amplitudes, layout })
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|<self|other>|^2`.
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(PureState { amplitudes: self.amplitudes.kronecker(&other.amplitudes), layout })
    }

    /// Applies `op` to `slots` (identity elsewhere).
    pub fn apply(&self, op: &CMatrix, slots: &[usize]) -> Result<Self> {
        check_op(&self.layout, op, slots)?;
        let mut m = CMatrix::from_column_slice(self.dim(), 1, self.amplitudes.as_slice());
        apply_to_columns(&mut m, &self.layout, op, slots);
        Ok(PureState {
            amplitudes: CVector::from_column_slice(m.as_slice()),
            layout: self.layout.clone(),
        })
    }

    pub fn map_amplitudes(&self, f: impl Fn(usize, C64) -> C64) -> Self {
        let amps = CVector::from_iterator(
            self.dim(),
            self.amplitudes.iter().enumerate().map(|(i, &a)| f(i, a)),
        );
        PureState { amplitudes: amps, layout: self.layout.clone() }
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
            layout: self.layout.clone(),
        }
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        self.to_density().partial_trace(keep)
    }
}

impl DensityOperator {
    /// Validated constructor: Hermitian, unit trace, positive within the slack.
    pub fn new(matrix: CMatrix, layout: SubsystemLayout) -> Result<Self> {
        let d = Self::unchecked(matrix, layout)?;
        d.validate()?;
        Ok(d)
    }

    fn unchecked(matrix: CMatrix, layout: SubsystemLayout) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != layout.total_dim() {
            return Err(Error::Layout(format!(
                "{}x{} matrix for a layout of dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                layout.total_dim()
            )));
        }
        Ok(DensityOperator { matrix, layout })
    }

    pub(crate) fn from_raw(matrix: CMatrix, layout: SubsystemLayout) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.total_dim());
        DensityOperator { matrix, layout }
    }

    pub fn validate(&self) -> Result<()> {
        let herm = hermiticity_error(&self.matrix);
        if herm > tolerance::HERMITIAN {
            return Err(Error::Validation(format!("density operator not Hermitian ({herm:.3e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > tolerance::NORM {
            return Err(Error::Validation(format!("density operator trace is {tr}")));
        }
        let min = hermitian_eig(&self.matrix)?.values[0];
        if min < tolerance::POSITIVITY_SLACK {
            return Err(Error::Validation(format!("density operator has eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn from_diagonal(diag: &[f64], layout: SubsystemLayout) -> Result<Self> {
        let m = CMatrix::from_diagonal(&CVector::from_iterator(diag.len(), diag.iter().map(|&x| c(x, 0.0))));
        Self::new(m, layout)
    }

    /// Maximally mixed state.
    pub fn identity(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        DensityOperator {
            matrix: CMatrix::identity(d, d).map(|z| z / d as f64),
            layout,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn with_layout(self, layout: SubsystemLayout) -> Result<Self> {
        if layout.total_dim() != self.dim() {
            return Err(Error::Layout("relabelled layout has a different dimension".into()));
        }
        Ok(DensityOperator { matrix: self.matrix, layout })
    }

    /// Probability-weighted mixture of states on a common layout.
    pub fn mixture(parts: &[(f64, DensityOperator)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Validation("empty mixture".into()))?;
        let mut m = CMatrix::zeros(first.1.dim(), first.1.dim());
        for (w, d) in parts {
            if d.layout != first.1.layout {
                return Err(Error::Layout("mixture components have different layouts".into()));
            }
            m += d.matrix.map(|z| z * *w);
        }
        Ok(DensityOperator { matrix: m, layout: first.1.layout.clone() })
    }

    /// `<phi| rho |phi>` for a vector on the same layout.
    pub fn expectation(&self, phi: &PureState) -> f64 {
        (phi.amplitudes().adjoint() * &self.matrix * phi.amplitudes())[(0, 0)].re
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(DensityOperator { matrix: self.matrix.kronecker(&other.matrix), layout })
    }

    /// `U rho U^dagger` with `U = op` on `slots` and identity elsewhere.
    pub fn apply(&self, op: &CMatrix, slots: &[usize]) -> Result<Self> {
        check_op(&self.layout, op, slots)?;
        Ok(self.conjugate_unchecked(op, slots))
    }

    /// `A rho B^dagger`-style two-sided map with the same operator on both sides.
    pub(crate) fn conjugate_unchecked(&self, op: &CMatrix, slots: &[usize]) -> Self {
        let mut m = self.matrix.clone();
        apply_to_columns(&mut m, &self.layout, op, slots);
        let mut m = m.adjoint();
        apply_to_columns(&mut m, &self.layout, op, slots);
        DensityOperator { matrix: m.adjoint(), layout: self.layout.clone() }
    }

    /// Multiplies entry `(i, j)` by `f(i) * conj(f(j))`: a diagonal operator on both sides.
    pub(crate) fn diagonal_sandwich(&self, f: impl Fn(usize) -> C64) -> Self {
        let d = self.dim();
        let factors: Vec<C64> = (0..d).map(f).collect();
        let m = CMatrix::from_fn(d, d, |i, j| factors[i] * self.matrix[(i, j)] * factors[j].conj());
        DensityOperator { matrix: m, layout: self.layout.clone() }
    }

    pub(crate) fn scale(&self, s: f64) -> Self {
        DensityOperator { matrix: self.matrix.map(|z| z * s), layout: self.layout.clone() }
    }

    /// Reduced state on `keep`; the kept slots retain their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(Error::Layout("partial trace must keep at least one slot".into()));
        }
        self.layout.check_slots(keep)?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        let kept = self.layout.offsets(&keep);
        let traced = self.layout.offsets(&self.layout.complement(&keep));
        let out = CMatrix::from_fn(kept.len(), kept.len(), |i, j| {
            traced
                .iter()
                .fold(ZERO, |acc, &t| acc + self.matrix[(kept[i] + t, kept[j] + t)])
        });
        Ok(DensityOperator { matrix: out, layout: self.layout.select(&keep)? })
    }

    /// Real and imaginary parts, row-major, for reports.
    pub fn to_parts(&self) -> MatrixParts {
        let d = self.dim();
        MatrixParts {
            re: (0..d).map(|i| (0..d).map(|j| self.matrix[(i, j)].re).collect()).collect(),
            im: (0..d).map(|i| (0..d).map(|j| self.matrix[(i, j)].im).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixParts {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}


/// Common surface of the state kinds the protocol pushes through its circuits.
pub trait QuantumState: Clone + Sized {
    fn layout(&self) -> &SubsystemLayout;

    fn apply_sum(&self, op: &super::ops::OpSum) -> Result<Self>;

    /// Diagonal of the state in the computational basis.
    fn populations(&self) -> Vec<f64>;
}

impl QuantumState for PureState {
    fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    fn apply_sum(&self, op: &super::ops::OpSum) -> Result<Self> {
        op.apply_pure(self)
    }

    fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

impl QuantumState for DensityOperator {
    fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    fn apply_sum(&self, op: &super::ops::OpSum) -> Result<Self> {
        op.apply_density(self)
    }

    fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }
}
