use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const HERMITIAN_TOLERANCE: f64 = 1e-10;
const TRACE_TOLERANCE: f64 = 1e-10;
const PSD_TOLERANCE: f64 = 1e-10;
/// Eigenvalues at or below this floor contribute nothing to the entropy.
pub const ENTROPY_EIGEN_FLOOR: f64 = 1e-12;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidDensityMatrix(format!(
                "{}x{} is not square",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let dim = entries.nrows();
        for a in 0..dim {
            for b in a..dim {
                let diff = (entries[(a, b)] - entries[(b, a)].conj()).norm();
                if diff > HERMITIAN_TOLERANCE {
                    return Err(Error::InvalidDensityMatrix(format!(
                        "not Hermitian at ({a},{b}), deviation {diff:.3e}"
                    )));
                }
            }
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > TRACE_TOLERANCE || trace.im.abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace}")));
        }
        let rho = Self { entries };
        if let Some(min) = rho.eigenvalues().into_iter().reduce(f64::min) {
            if min < -PSD_TOLERANCE {
                return Err(Error::InvalidDensityMatrix(format!(
                    "negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(amplitudes);
        Self::new(&v * v.adjoint())
    }

    /// Convex combination `Σ w_k ρ_k`.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let dim = parts
            .first()
            .map(|(_, r)| r.dim())
            .ok_or(Error::EmptyQubitList)?;
        let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
        for (w, r) in parts {
            if r.dim() != dim {
                return Err(Error::DimensionMismatch(dim, r.dim()));
            }
            acc += &r.entries * Complex64::new(*w, 0.0);
        }
        Self::new(acc)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.entries.clone().symmetric_eigenvalues().iter().copied().collect()
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.entries - &other.entries)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `S(ρ) = −Σ λ log₂ λ` in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues()
        .into_iter()
        .filter(|&l| l > ENTROPY_EIGEN_FLOOR)
        .map(|l| -l * l.log2())
        .sum()
}

/// `½ Σ |eig(ρ − σ)|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let diff = &rho.entries - &sigma.entries;
    Ok(0.5 * diff.symmetric_eigenvalues().iter().map(|l| l.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn m(rows: &[&[f64]]) -> DMatrix<Complex64> {
        let n = rows.len();
        DMatrix::from_fn(n, n, |a, b| Complex64::new(rows[a][b], 0.0))
    }

    fn ket(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn entropy_of_pure_and_maximally_mixed() {
        let pure = DensityMatrix::pure(&ket(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2])).unwrap();
        assert!(von_neumann_entropy(&pure).abs() < 1e-12);
        let mixed = DensityMatrix::new(m(&[&[0.5, 0.0], &[0.0, 0.5]])).unwrap();
        assert!((von_neumann_entropy(&mixed) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_matrices() {
        assert!(DensityMatrix::new(m(&[&[0.5, 0.3], &[0.0, 0.5]])).is_err());
        assert!(DensityMatrix::new(m(&[&[0.7, 0.0], &[0.0, 0.5]])).is_err());
        assert!(DensityMatrix::new(m(&[&[1.5, 0.0], &[0.0, -0.5]])).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        let zero = DensityMatrix::pure(&ket(&[1.0, 0.0])).unwrap();
        let one = DensityMatrix::pure(&ket(&[0.0, 1.0])).unwrap();
        assert!(trace_distance(&zero, &zero).unwrap().abs() < 1e-12);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);

        let plus = DensityMatrix::pure(&ket(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2])).unwrap();
        let minus = DensityMatrix::pure(&ket(&[FRAC_1_SQRT_2, -FRAC_1_SQRT_2])).unwrap();
        let a = DensityMatrix::mixture(&[(0.5, &zero), (0.5, &plus)]).unwrap();
        let b = DensityMatrix::mixture(&[(0.5, &one), (0.5, &minus)]).unwrap();
        // ρ−σ = ½[[1,1],[1,−1]] has eigenvalues ±1/√2
        assert!((trace_distance(&a, &b).unwrap() - FRAC_1_SQRT_2).abs() < 1e-12);

        let big = DensityMatrix::new(DMatrix::identity(4, 4) * Complex64::new(0.25, 0.0)).unwrap();
        assert!(matches!(
            trace_distance(&zero, &big),
            Err(Error::DimensionMismatch(2, 4))
        ));
    }
}
