//! Isometric charts for bodies living in proper affine subspaces.
//!
//! The probability simplex sits in the hyperplane `sum p_i = 1` of `R^N`;
//! bistochastic matrices sit in the affine subspace of `R^{NxN}` with all
//! row and column sums equal to one. Both charts expand around the
//! barycenter in an orthonormal basis of the tangent space, so chart
//! coordinates inherit the ambient Euclidean/Hilbert-Schmidt metric exactly
//! and the catalogued radii `r`, `R` remain valid verbatim.

/// Orthonormal basis (Helmert construction) of the zero-sum hyperplane
/// `{v in R^n : sum v_i = 0}`; returns `n - 1` vectors of length `n`.
pub(crate) fn zero_sum_basis(n: usize) -> Vec<Vec<f64>> {
    assert!(n >= 2);
    (1..n)
        .map(|m| {
            let scale = 1.0 / ((m * (m + 1)) as f64).sqrt();
            let mut v = vec![0.0; n];
            for entry in v.iter_mut().take(m) {
                *entry = scale;
            }
            v[m] = -(m as f64) * scale;
            v
        })
        .collect()
}

/// Chart of the probability simplex `Delta_N`, centered at the barycenter.
#[derive(Debug, Clone)]
pub(crate) struct SimplexChart {
    n: usize,
    /// `n - 1` orthonormal zero-sum vectors of length `n`.
    u: Vec<Vec<f64>>,
}

impl SimplexChart {
    pub fn new(n: usize) -> Self {
        SimplexChart {
            n,
            u: zero_sum_basis(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Chart point -> probability vector `p = p* + U x`.
    pub fn to_ambient(&self, x: &[f64]) -> Vec<f64> {
        let mut p = vec![1.0 / self.n as f64; self.n];
        for (coef, u) in x.iter().zip(&self.u) {
            for (pi, ui) in p.iter_mut().zip(u) {
                *pi += coef * ui;
            }
        }
        p
    }

    /// Probability vector -> chart point, `x_m = <u_m, p>` (the barycenter
    /// offset vanishes because each `u_m` sums to zero).
    pub fn from_ambient(&self, p: &[f64]) -> Vec<f64> {
        self.u.iter().map(|u| super::dot(u, p)).collect()
    }

    /// Half-space rows `a.x <= c` expressing `p_i >= 0`.
    pub fn constraints(&self) -> Vec<(Vec<f64>, f64)> {
        (0..self.n)
            .map(|i| {
                let a: Vec<f64> = self.u.iter().map(|u| -u[i]).collect();
                (a, 1.0 / self.n as f64)
            })
            .collect()
    }

    /// Chart image of the edge direction `(e_i - e_last)/sqrt(2)`; these
    /// `n - 1` unit moves make the simplex `d`-accessible.
    pub fn edge_basis(&self) -> Vec<Vec<f64>> {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        (0..self.n - 1)
            .map(|i| {
                self.u
                    .iter()
                    .map(|u| (u[i] - u[self.n - 1]) * inv_sqrt2)
                    .collect()
            })
            .collect()
    }
}

/// Chart of the Birkhoff polytope, centered at the uniform matrix `B*`.
///
/// The tangent space of bistochastic matrices is the tensor square of the
/// zero-sum hyperplane, so `{u_a u_b^T}` is an orthonormal basis of it and
/// the chart `B = B* + sum tau_{ab} u_a u_b^T` is an isometry. Rows and
/// columns of the reconstructed matrix sum to one by construction.
#[derive(Debug, Clone)]
pub(crate) struct BirkhoffChart {
    n: usize,
    u: Vec<Vec<f64>>,
}

impl BirkhoffChart {
    pub fn new(n: usize) -> Self {
        BirkhoffChart {
            n,
            u: zero_sum_basis(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        (self.n - 1) * (self.n - 1)
    }

    fn index(&self, a: usize, b: usize) -> usize {
        a * (self.n - 1) + b
    }

    /// Chart point -> row-major `N x N` matrix.
    pub fn to_matrix(&self, tau: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![1.0 / n as f64; n * n];
        for a in 0..n - 1 {
            for b in 0..n - 1 {
                let coef = tau[self.index(a, b)];
                if coef != 0.0 {
                    for i in 0..n {
                        let row_factor = coef * self.u[a][i];
                        for j in 0..n {
                            m[i * n + j] += row_factor * self.u[b][j];
                        }
                    }
                }
            }
        }
        m
    }

    /// Row-major matrix -> chart point, `tau_{ab} = <u_a u_b^T, M>`.
    pub fn from_matrix(&self, m: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut tau = vec![0.0; self.dim()];
        for a in 0..n - 1 {
            for b in 0..n - 1 {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += self.u[a][i] * self.u[b][j] * m[i * n + j];
                    }
                }
                tau[self.index(a, b)] = s;
            }
        }
        tau
    }

    /// Half-space rows `a.tau <= c` expressing `B_ij >= 0`.
    pub fn constraints(&self) -> Vec<(Vec<f64>, f64)> {
        let n = self.n;
        let mut rows = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut a = vec![0.0; self.dim()];
                for ai in 0..n - 1 {
                    for bi in 0..n - 1 {
                        a[self.index(ai, bi)] = -self.u[ai][i] * self.u[bi][j];
                    }
                }
                rows.push((a, 1.0 / n as f64));
            }
        }
        rows
    }

    /// Chart coordinates of the normalized exchange move that subtracts mass
    /// on entries `(i, alpha)`, `(gamma, beta)` and adds it on `(i, beta)`,
    /// `(gamma, alpha)`. The move matrix has Frobenius norm 2, so the chart
    /// image below is exactly unit.
    pub fn move_chart(&self, i: usize, gamma: usize, alpha: usize, beta: usize) -> Vec<f64> {
        let n = self.n;
        let row_diff: Vec<f64> = (0..n - 1).map(|a| self.u[a][gamma] - self.u[a][i]).collect();
        let col_diff: Vec<f64> = (0..n - 1).map(|b| self.u[b][alpha] - self.u[b][beta]).collect();
        let mut tau = vec![0.0; self.dim()];
        for a in 0..n - 1 {
            for b in 0..n - 1 {
                tau[self.index(a, b)] = 0.5 * row_diff[a] * col_diff[b];
            }
        }
        tau
    }
}
