//! Exact small-dimension complex linear algebra: rotations, projectors,
//! tensor products, traces and partial traces on ℂ² and ℂ²⊗ℂ².
//!
//! Matrices are immutable values; every operation returns a fresh value.
//! Dimensions are restricted to 2 and 4 so that every algebraic identity
//! used elsewhere in the crate can be tested exhaustively.
//!
//! The composite index convention on ℂ²⊗ℂ² is (i_A, i_B) ↦ 2·i_A + i_B:
//! the first tensor factor selects the high bit.

use num_complex::Complex;
use thiserror::Error;

use crate::outcome::Outcome;

/// Complex scalar with f64 components.
pub type Complex64 = Complex<f64>;

/// Absolute per-entry tolerance for all algebraic identity checks.
///
/// The underlying identities are exact; double precision leaves residues
/// of order 1e-16 per operation, so 1e-12 gives four digits of headroom.
pub const ENTRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("matrix dimension must be 2 or 4, got {0}")]
    UnsupportedDimension(usize),
    #[error("expected {expected} entries for dimension {dim}, got {found}")]
    EntryCount {
        dim: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite entry at position {0}")]
    NonFiniteEntry(usize),
    #[error("non-finite angle {0}")]
    NonFiniteAngle(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("operation requires dimension {expected}, got {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("state vector norm is {0}, expected 1")]
    NotNormalized(f64),
}

/// A dense complex square matrix of dimension 2 or 4, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl SquareMatrix {
    /// Build a matrix from row-major entries. All entries must be finite
    /// and the dimension must be 2 or 4.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self, MatrixError> {
        if dim != 2 && dim != 4 {
            return Err(MatrixError::UnsupportedDimension(dim));
        }
        if entries.len() != dim * dim {
            return Err(MatrixError::EntryCount {
                dim,
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if let Some(pos) = entries
            .iter()
            .position(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(MatrixError::NonFiniteEntry(pos));
        }
        Ok(SquareMatrix { dim, entries })
    }

    /// Build a matrix from real row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self, MatrixError> {
        Self::new(
            dim,
            entries.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
        )
    }

    pub fn identity(dim: usize) -> Result<Self, MatrixError> {
        let mut entries = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::ONE;
        }
        Self::new(dim, entries)
    }

    pub fn zeros(dim: usize) -> Result<Self, MatrixError> {
        Self::new(dim, vec![Complex64::ZERO; dim * dim])
    }

    /// Diagonal matrix with the given real diagonal.
    pub fn diagonal(diag: &[f64]) -> Result<Self, MatrixError> {
        let dim = diag.len();
        let mut entries = vec![Complex64::ZERO; dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * dim + i] = Complex64::new(d, 0.0);
        }
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        assert!(row < self.dim && col < self.dim, "index out of bounds");
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Matrix product. Panics on dimension mismatch; both operands in this
    /// crate always share a dimension.
    pub fn matmul(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(
            self.dim, other.dim,
            "matmul dimension mismatch: {} vs {}",
            self.dim, other.dim
        );
        let n = self.dim;
        let mut entries = vec![Complex64::ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = self.entries[i * n + k];
                if aik == Complex64::ZERO {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += aik * other.entries[k * n + j];
                }
            }
        }
        SquareMatrix { dim: n, entries }
    }

    pub fn add(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(
            self.dim, other.dim,
            "add dimension mismatch: {} vs {}",
            self.dim, other.dim
        );
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        SquareMatrix {
            dim: self.dim,
            entries,
        }
    }

    pub fn sub(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(
            self.dim, other.dim,
            "sub dimension mismatch: {} vs {}",
            self.dim, other.dim
        );
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        SquareMatrix {
            dim: self.dim,
            entries,
        }
    }

    pub fn scale(&self, factor: Complex64) -> SquareMatrix {
        SquareMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> SquareMatrix {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> SquareMatrix {
        let n = self.dim;
        let mut entries = vec![Complex64::ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        SquareMatrix { dim: n, entries }
    }

    /// Sum of diagonal entries.
    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Kronecker product of two 2×2 matrices under the convention
    /// (i_A, i_B) ↦ 2·i_A + i_B. Other dimensions are out of scope.
    pub fn tensor(&self, other: &SquareMatrix) -> Result<SquareMatrix, MatrixError> {
        if self.dim != 2 {
            return Err(MatrixError::WrongDimension {
                expected: 2,
                found: self.dim,
            });
        }
        if other.dim != 2 {
            return Err(MatrixError::WrongDimension {
                expected: 2,
                found: other.dim,
            });
        }
        let mut entries = vec![Complex64::ZERO; 16];
        for ia in 0..2 {
            for ja in 0..2 {
                let a = self.get(ia, ja);
                for ib in 0..2 {
                    for jb in 0..2 {
                        entries[(2 * ia + ib) * 4 + (2 * ja + jb)] = a * other.get(ib, jb);
                    }
                }
            }
        }
        SquareMatrix::new(4, entries)
    }

    /// Partial trace over the second factor: Σ_j (I ⊗ ⟨f_j|) M (I ⊗ |f_j⟩)
    /// with f_j the standard basis of ℂ². Requires dimension 4.
    pub fn partial_trace_b(&self) -> Result<SquareMatrix, MatrixError> {
        if self.dim != 4 {
            return Err(MatrixError::WrongDimension {
                expected: 4,
                found: self.dim,
            });
        }
        let mut entries = vec![Complex64::ZERO; 4];
        for i in 0..2 {
            for j in 0..2 {
                let mut sum = Complex64::ZERO;
                for k in 0..2 {
                    sum += self.get(2 * i + k, 2 * j + k);
                }
                entries[i * 2 + j] = sum;
            }
        }
        SquareMatrix::new(2, entries)
    }

    /// Partial trace over the first factor; mirror of [`partial_trace_b`].
    ///
    /// [`partial_trace_b`]: SquareMatrix::partial_trace_b
    pub fn partial_trace_a(&self) -> Result<SquareMatrix, MatrixError> {
        if self.dim != 4 {
            return Err(MatrixError::WrongDimension {
                expected: 4,
                found: self.dim,
            });
        }
        let mut entries = vec![Complex64::ZERO; 4];
        for i in 0..2 {
            for j in 0..2 {
                let mut sum = Complex64::ZERO;
                for k in 0..2 {
                    sum += self.get(2 * k + i, 2 * k + j);
                }
                entries[i * 2 + j] = sum;
            }
        }
        SquareMatrix::new(2, entries)
    }

    /// Quadratic form ⟨ψ|M|ψ⟩.
    pub fn expectation(&self, psi: &StateVector) -> Result<Complex64, MatrixError> {
        if self.dim != psi.dim() {
            return Err(MatrixError::DimensionMismatch(self.dim, psi.dim()));
        }
        let amps = psi.amplitudes();
        let mut sum = Complex64::ZERO;
        for i in 0..self.dim {
            for j in 0..self.dim {
                sum += amps[i].conj() * self.get(i, j) * amps[j];
            }
        }
        Ok(sum)
    }

    /// Apply the matrix to a raw amplitude vector.
    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>, MatrixError> {
        if v.len() != self.dim {
            return Err(MatrixError::DimensionMismatch(self.dim, v.len()));
        }
        Ok((0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect())
    }

    /// Largest absolute entry difference to `other`.
    pub fn max_abs_diff(&self, other: &SquareMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Entry-wise equality within an absolute tolerance.
    pub fn approx_eq(&self, other: &SquareMatrix, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_idempotent(&self, tol: f64) -> bool {
        self.matmul(self).max_abs_diff(self) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let id = SquareMatrix::identity(self.dim).expect("dimension already validated");
        self.adjoint().matmul(self).max_abs_diff(&id) <= tol
    }
}

/// A unit-norm complex vector of dimension 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Build a state from amplitudes; requires finite entries and unit
    /// Euclidean norm within [`ENTRY_TOL`].
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, MatrixError> {
        let dim = amplitudes.len();
        if dim != 2 && dim != 4 {
            return Err(MatrixError::UnsupportedDimension(dim));
        }
        if let Some(pos) = amplitudes
            .iter()
            .position(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(MatrixError::NonFiniteEntry(pos));
        }
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > ENTRY_TOL {
            return Err(MatrixError::NotNormalized(norm));
        }
        Ok(StateVector { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Rotation of ℂ² over `angle`: [[cos γ, −sin γ], [sin γ, cos γ]].
pub fn rotation(angle: f64) -> Result<SquareMatrix, MatrixError> {
    if !angle.is_finite() {
        return Err(MatrixError::NonFiniteAngle(angle));
    }
    let (sin, cos) = angle.sin_cos();
    SquareMatrix::from_real(2, &[cos, -sin, sin, cos])
}

/// Projector of the Pauli-Z measurement onto the given outcome:
/// +1 ↦ diag(1, 0), −1 ↦ diag(0, 1).
pub fn pauli_z_projector(outcome: Outcome) -> SquareMatrix {
    match outcome {
        Outcome::Plus => SquareMatrix::diagonal(&[1.0, 0.0]),
        Outcome::Minus => SquareMatrix::diagonal(&[0.0, 1.0]),
    }
    .expect("fixed 2x2 diagonal")
}
