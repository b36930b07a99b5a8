//! SU(N) generator bases, the Bloch-vector bijection, partial transposition
//! and Hermitian eigenvalue helpers.
//!
//! A density matrix of size `N` is written as
//! `rho = I/N + sum_i tau_i lambda_i` where the `lambda_i` are `N^2 - 1`
//! traceless Hermitian matrices orthonormal in the Hilbert-Schmidt inner
//! product, `Tr(lambda_i lambda_j) = delta_ij`. With that normalization the
//! Bloch coordinates `tau` carry the Hilbert-Schmidt geometry verbatim:
//! Euclidean distance between Bloch vectors equals HS distance between the
//! corresponding Hermitian matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Dense complex matrix used throughout this module.
pub type CMatrix = DMatrix<Complex64>;

/// Hermiticity slack: max |H_ij - conj(H_ji)| accepted as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Unit-trace slack for density matrices.
pub const TRACE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("trace must be 1, got {0}")]
    BadTrace(f64),
    #[error("Bloch vector has length {got}, expected {expected}")]
    BlochLength { expected: usize, got: usize },
    #[error("matrix size {n} is not K*K for K = {k}")]
    NotBipartite { n: usize, k: usize },
    #[error("generator basis requires N >= 2, got {0}")]
    MatrixTooSmall(usize),
}

fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// An orthonormal set of `N^2 - 1` traceless Hermitian generators of SU(N).
///
/// Ordering is fixed so Bloch coordinates are reproducible: symmetric pairs
/// `(j,k)` with `j < k` in lexicographic order, then the antisymmetric pairs
/// in the same order, then the `N - 1` diagonal generators. For `N = 2` this
/// yields the Pauli matrices divided by sqrt(2).
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    n: usize,
    generators: Vec<CMatrix>,
}

impl GeneratorBasis {
    /// Matrix size N.
    pub fn matrix_size(&self) -> usize {
        self.n
    }

    /// Number of generators, `N^2 - 1`.
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }
}

/// Builds the generalized Gell-Mann basis of SU(N), rescaled so that
/// `Tr(lambda_i lambda_j) = delta_ij`.
pub fn su_generators(n: usize) -> Result<GeneratorBasis, QuantumError> {
    if n < 2 {
        return Err(QuantumError::MatrixTooSmall(n));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut generators = Vec::with_capacity(n * n - 1);
    let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    // Symmetric family: (E_jk + E_kj) / sqrt(2).
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = CMatrix::from_element(n, n, zero);
            m[(j, k)] = inv_sqrt2;
            m[(k, j)] = inv_sqrt2;
            generators.push(m);
        }
    }
    // Antisymmetric family: -i (E_jk - E_kj) / sqrt(2).
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = CMatrix::from_element(n, n, zero);
            m[(j, k)] = Complex64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2);
            m[(k, j)] = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
            generators.push(m);
        }
    }
    // Diagonal family: diag(1,...,1,-m,0,...,0) / sqrt(m(m+1)) with m ones.
    for m_ones in 1..n {
        let scale = 1.0 / ((m_ones * (m_ones + 1)) as f64).sqrt();
        let mut m = CMatrix::from_element(n, n, zero);
        for i in 0..m_ones {
            m[(i, i)] = Complex64::new(scale, 0.0);
        }
        m[(m_ones, m_ones)] = Complex64::new(-(m_ones as f64) * scale, 0.0);
        generators.push(m);
    }
    Ok(GeneratorBasis { n, generators })
}

/// Hermitian matrix with unit trace. Positivity is *not* part of the type:
/// it is exactly the membership predicate of the `density` body.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity and unit trace.
    pub fn new(entries: CMatrix) -> Result<Self, QuantumError> {
        if entries.nrows() != entries.ncols() {
            return Err(QuantumError::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        let defect = hermiticity_defect(&entries);
        if defect > HERMITICITY_TOL {
            return Err(QuantumError::NotHermitian(defect));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(QuantumError::BadTrace(tr.re));
        }
        Ok(DensityMatrix { entries })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    /// Tr(rho^2); equals 1 exactly for pure states.
    pub fn purity(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.size() {
            for j in 0..self.size() {
                s += (self.entries[(i, j)] * self.entries[(j, i)]).re;
            }
        }
        s
    }
}

/// Builds `I/N + sum_i tau_i lambda_i` without validation; Hermitian and
/// unit-trace hold by construction, so the membership hot path of the
/// spectral bodies skips the checks.
pub(crate) fn bloch_matrix_raw(tau: &[f64], basis: &GeneratorBasis) -> CMatrix {
    let n = basis.matrix_size();
    let mut m = CMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let inv_n = 1.0 / n as f64;
    for i in 0..n {
        m[(i, i)] = Complex64::new(inv_n, 0.0);
    }
    for (coef, gen) in tau.iter().zip(basis.generators()) {
        if *coef != 0.0 {
            let c = Complex64::new(*coef, 0.0);
            m.zip_apply(gen, |out, g| *out += c * g);
        }
    }
    m
}

/// `rho = I/N + sum_i tau_i lambda_i`. Hermitian with unit trace by
/// construction; positivity is the caller's membership test.
pub fn bloch_to_density(
    tau: &[f64],
    basis: &GeneratorBasis,
) -> Result<DensityMatrix, QuantumError> {
    if tau.len() != basis.len() {
        return Err(QuantumError::BlochLength {
            expected: basis.len(),
            got: tau.len(),
        });
    }
    DensityMatrix::new(bloch_matrix_raw(tau, basis))
}

/// Bloch coordinates `tau_i = Tr(lambda_i rho)`; the imaginary parts vanish
/// for Hermitian input (checked by the `DensityMatrix` constructor) and are
/// discarded.
pub fn density_to_bloch(rho: &DensityMatrix, basis: &GeneratorBasis) -> Result<Vec<f64>, QuantumError> {
    if rho.size() != basis.matrix_size() {
        return Err(QuantumError::BlochLength {
            expected: basis.matrix_size(),
            got: rho.size(),
        });
    }
    let n = rho.size();
    let mut tau = Vec::with_capacity(basis.len());
    for gen in basis.generators() {
        let mut t = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                t += gen[(i, j)] * rho.entries()[(j, i)];
            }
        }
        tau.push(t.re);
    }
    Ok(tau)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &CMatrix) -> Result<f64, QuantumError> {
    if h.nrows() != h.ncols() {
        return Err(QuantumError::NotSquare {
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    let defect = hermiticity_defect(h);
    let scale = h.iter().map(|c| c.norm()).fold(0.0f64, f64::max).max(1.0);
    if defect > HERMITICITY_TOL * scale.max(1.0) * 10.0 {
        return Err(QuantumError::NotHermitian(defect));
    }
    let eig = h.clone().symmetric_eigen();
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Result<Vec<f64>, QuantumError> {
    let defect = hermiticity_defect(h);
    if defect > 1e-9 {
        return Err(QuantumError::NotHermitian(defect));
    }
    let eig = h.clone().symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

/// Positive-definiteness of `H + shift*I` by an LDL^H factorization.
///
/// This is the fast membership path of the spectral bodies: it decides the
/// same predicate as `min_eigenvalue(H) > -shift` without a full
/// eigendecomposition. nalgebra's complex Cholesky cannot be used here
/// because complex square roots never fail on negative pivots.
pub(crate) fn is_shifted_positive_definite(h: &CMatrix, shift: f64) -> bool {
    let n = h.nrows();
    let mut a = h.clone();
    for i in 0..n {
        a[(i, i)] += Complex64::new(shift, 0.0);
    }
    for j in 0..n {
        let pivot = a[(j, j)].re;
        if !(pivot > 0.0) {
            return false;
        }
        for i in (j + 1)..n {
            let factor = a[(i, j)] / pivot;
            for k in (j + 1)..=i {
                let update = factor * a[(k, j)].conj();
                a[(i, k)] -= update;
            }
        }
    }
    true
}

/// Partial transposition on the second factor of a K x K bipartite system,
/// `entry((a,b),(c,d)) -> entry((a,d),(c,b))` in the K tensor K convention.
pub fn partial_transpose(rho: &DensityMatrix, k: usize) -> Result<DensityMatrix, QuantumError> {
    let n = rho.size();
    if k < 2 || k * k != n {
        return Err(QuantumError::NotBipartite { n, k });
    }
    let mut out = CMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                for d in 0..k {
                    out[(a * k + b, c * k + d)] = rho.entries()[(a * k + d, c * k + b)];
                }
            }
        }
    }
    DensityMatrix::new(out)
}

/// PPT test: `min_eigenvalue(rho^{T_2}) >= -tol`.
pub fn is_ppt(rho: &DensityMatrix, k: usize, tol: f64) -> Result<bool, QuantumError> {
    let pt = partial_transpose(rho, k)?;
    Ok(min_eigenvalue(pt.entries())? >= -tol)
}
