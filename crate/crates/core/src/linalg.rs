//! Dense complex linear algebra: density matrices, Hermitian eigenvalues and
//! trace distance.
//!
//! Matrices are `nalgebra` dense matrices of [`C64`]. The eigenvalue backend
//! is nalgebra's Hermitian (complex symmetric) eigensolver.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Dense complex matrix.
pub type ComplexMatrix = DMatrix<C64>;

/// Hermiticity tolerance for inputs.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = -1e-10;

/// Largest `|M - M†|` entry.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_square(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    check_square(m)?;
    let deviation = hermitian_deviation(m);
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    Ok(eigenvalues_unchecked(m))
}

fn eigenvalues_unchecked(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    // Symmetrise away rounding noise so the solver sees an exactly Hermitian input.
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Trace norm `Σ|λ_k|` of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    check_hermitian(m)?;
    Ok(eigenvalues_unchecked(m).iter().map(|l| l.abs()).sum())
}

/// Kronecker product, `a` being the most significant factor.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `|k><k|` in a `dim`-dimensional register.
pub fn basis_projector(dim: usize, k: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    m[(k, k)] = C64::new(1.0, 0.0);
    m
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        check_hermitian(&m)?;
        let trace = m.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::NotDensity(format!("trace is {trace}")));
        }
        if let Some(&lowest) = eigenvalues_unchecked(&m).first() {
            if lowest < PSD_TOL {
                return Err(Error::NotDensity(format!("eigenvalue {lowest:e} is negative")));
            }
        }
        Ok(DensityMatrix(m))
    }

    /// Wraps a matrix known to be a density matrix by construction.
    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        debug_assert!(hermitian_deviation(&m) < 1e-9);
        DensityMatrix(m)
    }

    /// Maximally mixed state of dimension `dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(ComplexMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix(kron(&self.0, &other.0))
    }

    /// Conjugation `U ρ U†`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<DensityMatrix> {
        if u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: u.ncols(),
                right: self.dim(),
            });
        }
        Ok(DensityMatrix(u * &self.0 * u.adjoint()))
    }

    /// Convex mixture `Σ w_i ρ_i`; weights must sum to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<DensityMatrix> {
        let first = parts.first().ok_or(Error::EmptyInput("mixture"))?;
        let dim = first.1.dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: rho.dim(),
                });
            }
            acc += rho.matrix() * C64::new(*w, 0.0);
        }
        DensityMatrix::new(acc)
    }
}

/// `(1/2) Σ |λ_k(a - b)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let diff = a.matrix() - b.matrix();
    Ok(0.5 * eigenvalues_unchecked(&diff).iter().map(|l| l.abs()).sum::<f64>())
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use crate::qsim::{plus_state, pure_to_density};
    use crate::Angle8;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(values: &[f64]) -> ComplexMatrix {
        let n = values.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(*v, 0.0);
        }
        m
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        assert_eq!(
            hermitian_eigenvalues(&ComplexMatrix::identity(2, 2)).unwrap(),
            vec![1.0, 1.0]
        );
        let ev = hermitian_eigenvalues(&diag(&[5.0, -3.0])).unwrap();
        assert!((ev[0] + 3.0).abs() < 1e-14 && (ev[1] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_match_char_poly_oracle_4x4() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_hermitian(&mut rng, 4);
            let ours = hermitian_eigenvalues(&m).unwrap();
            let oracle = char_poly_eigenvalues(&m);
            assert_eq!(oracle.len(), 4, "oracle found {oracle:?}");
            let scale = ours.iter().map(|v| v.abs()).fold(1.0, f64::max);
            for (a, b) in ours.iter().zip(&oracle) {
                assert!((a - b).abs() <= 1e-10 * scale, "{ours:?} vs {oracle:?}");
            }
        }
    }

    #[test]
    fn eigenvalues_match_jacobi_oracle_8x8() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let m = random_hermitian(&mut rng, 8);
            let ours = hermitian_eigenvalues(&m).unwrap();
            let oracle = jacobi_eigenvalues(&m);
            let scale = ours.iter().map(|v| v.abs()).fold(1.0, f64::max);
            for (a, b) in ours.iter().zip(&oracle) {
                assert!((a - b).abs() <= 1e-10 * scale, "{ours:?} vs {oracle:?}");
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eigenvalues(&rect), Err(Error::NotSquare { .. })));
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(hermitian_eigenvalues(&m), Err(Error::NotHermitian { .. })));
        assert!(DensityMatrix::new(m).is_err());
        assert!(DensityMatrix::new(diag(&[0.5, 0.6])).is_err());
        assert!(DensityMatrix::new(diag(&[1.5, -0.5])).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        let plus = pure_to_density(&plus_state(Angle8::new(0)));
        let minus = pure_to_density(&plus_state(Angle8::new(4)));
        assert!(trace_distance(&plus, &plus).unwrap().abs() < 1e-15);
        assert!((trace_distance(&plus, &minus).unwrap() - 1.0).abs() < 1e-12);
        // |+><+| - I/2 has eigenvalues ±1/2.
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((trace_distance(&plus, &mixed).unwrap() - 0.5).abs() < 1e-12);
        let big = DensityMatrix::maximally_mixed(4);
        assert!(matches!(
            trace_distance(&plus, &big),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn trace_distance_metric_laws(seed in any::<u64>(), n in 2usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_density(&mut rng, n);
            let b = random_density(&mut rng, n);
            let c = random_density(&mut rng, n);
            let ab = trace_distance(&a, &b).unwrap();
            prop_assert!(trace_distance(&a, &a).unwrap() < 1e-12);
            prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
            let bc = trace_distance(&b, &c).unwrap();
            let ac = trace_distance(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-10);
        }

        #[test]
        fn trace_distance_unitary_invariance(seed in any::<u64>(), n in 2usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_density(&mut rng, n);
            let b = random_density(&mut rng, n);
            let u = random_unitary(&mut rng, n);
            let before = trace_distance(&a, &b).unwrap();
            let after = trace_distance(&a.conjugate(&u).unwrap(), &b.conjugate(&u).unwrap()).unwrap();
            prop_assert!((before - after).abs() < 1e-10);
        }
    }
}
