//! Small dense complex linear-algebra toolkit on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tolerance;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors, in the same order as `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> CMatrix {
        let diag = CMatrix::from_diagonal(&CVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&v| c(v, 0.0)),
        ));
        &self.vectors * diag * self.vectors.adjoint()
    }
}

/// Largest elementwise deviation of `m` from its conjugate transpose.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEigen> {
    let err = hermiticity_error(m);
    if err > tolerance::HERMITIAN {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian (max deviation {err:.3e})"
        )));
    }
    // Symmetrize so the solver sees an exactly Hermitian input.
    let sym = (m + m.adjoint()).map(|z| z * 0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, col| eig.eigenvectors[(r, order[col])]);
    Ok(HermitianEigen { values, vectors })
}

/// Largest elementwise deviation of `u u^dagger` from the identity.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let prod = u * u.adjoint();
    let n = u.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn check_unitary(u: &CMatrix, what: &str) -> Result<()> {
    let err = unitarity_error(u);
    if err > tolerance::UNITARY {
        return Err(Error::Validation(format!(
            "{what} is not unitary (max deviation {err:.3e})"
        )));
    }
    Ok(())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

pub fn cz() -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, ONE, ONE, -ONE]))
}

/// Haar-distributed unitary from the QR decomposition of a complex Ginibre matrix,
/// with the phases of `R`'s diagonal folded back into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        (&a + a.adjoint()).map(|z| z * 0.5)
    }

    #[test]
    fn diagonal_and_sigma_x() {
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.75, 0.0), c(0.25, 0.0)]));
        let e = hermitian_eig(&d).unwrap();
        assert!((e.values[0] - 0.25).abs() < 1e-15 && (e.values[1] - 0.75).abs() < 1e-15);
        let e = hermitian_eig(&pauli_x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_hermitian(8, &mut rng);
            let e = hermitian_eig(&m).unwrap();
            let resid = (e.reconstruct() - &m).camax();
            assert!(resid < 1e-10, "residual {resid}");
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            let trace: f64 = (0..8).map(|i| m[(i, i)].re).sum();
            assert!((e.values.iter().sum::<f64>() - trace).abs() < 1e-10);
            assert!(unitarity_error(&e.vectors) < 1e-10);
        }
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(hermitian_eig(&m), Err(Error::Validation(_))));
    }

    #[test]
    fn haar_samples_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [1, 2, 5, 16] {
            assert!(unitarity_error(&haar_unitary(dim, &mut rng)) < 1e-12);
        }
    }
}
