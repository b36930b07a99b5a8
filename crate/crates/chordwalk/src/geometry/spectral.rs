//! Spectral bodies: density matrices and PPT states in Bloch coordinates.
//!
//! The chart is the Bloch vector `tau` itself; since the generator basis is
//! orthonormal in the Hilbert-Schmidt inner product, Euclidean geometry on
//! `tau` equals HS geometry on the matrices and the catalogued radii apply
//! unchanged. Membership is a positivity test, so chords come from
//! bisection on the membership predicate rather than a closed form.

use super::{
    check_chord_inputs, chord_bisect, Body, BodyDescriptor, BodyMetadata, Chord, GeometryError,
    BISECT_TOL, SPECTRAL_SLACK,
};
use crate::quantum::{
    bloch_matrix_raw, density_to_bloch, is_shifted_positive_definite, su_generators, CMatrix,
    DensityMatrix, GeneratorBasis,
};
use num_complex::Complex64;

fn catalogue_radii(n: usize) -> (f64, f64) {
    let nf = n as f64;
    (1.0 / (nf * (nf - 1.0)).sqrt(), ((nf - 1.0) / nf).sqrt())
}

fn axis_basis(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| {
            let mut v = vec![0.0; d];
            v[i] = 1.0;
            v
        })
        .collect()
}

/// Frobenius norm; an upper bound for the spectral norm within sqrt(N),
/// used to scale the eigenvalue slack.
fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn matrix_to_interleaved(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
    out
}

fn interleaved_to_matrix(p: &[f64], n: usize) -> Result<CMatrix, GeometryError> {
    if p.len() != 2 * n * n {
        return Err(GeometryError::DimensionMismatch {
            expected: 2 * n * n,
            got: p.len(),
        });
    }
    let mut m = CMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            let base = 2 * (i * n + j);
            m[(i, j)] = Complex64::new(p[base], p[base + 1]);
        }
    }
    Ok(m)
}

/// Quantum states of size `N` in Bloch coordinates: `d = N^2 - 1`,
/// `R = sqrt((N-1)/N)`, `r = 1/sqrt(N(N-1))`, `d`-accessible along the
/// Bloch axes (zeroing a Bloch coefficient never spoils positivity).
pub struct DensityBody {
    n: usize,
    basis: GeneratorBasis,
    meta: BodyMetadata,
}

impl DensityBody {
    pub fn new(n: usize) -> Result<Self, GeometryError> {
        if n < 2 {
            return Err(GeometryError::InvalidParameter("density requires n >= 2".into()));
        }
        let basis = su_generators(n)?;
        let d = n * n - 1;
        let (r, big_r) = catalogue_radii(n);
        let meta = BodyMetadata::new(d, vec![0.0; d], r, big_r, Some(d as u64), Some(axis_basis(d)))?;
        Ok(DensityBody { n, basis, meta })
    }

    pub fn matrix_size(&self) -> usize {
        self.n
    }

    pub fn generator_basis(&self) -> &GeneratorBasis {
        &self.basis
    }

    /// Hermitian unit-trace matrix at chart point `tau` (no positivity
    /// check).
    pub fn matrix_at(&self, tau: &[f64]) -> CMatrix {
        bloch_matrix_raw(tau, &self.basis)
    }

    fn membership(&self, tau: &[f64]) -> bool {
        let m = self.matrix_at(tau);
        is_shifted_positive_definite(&m, SPECTRAL_SLACK * frobenius(&m))
    }
}

impl Body for DensityBody {
    fn metadata(&self) -> &BodyMetadata {
        &self.meta
    }

    fn descriptor(&self) -> BodyDescriptor {
        BodyDescriptor::Density { n: self.n }
    }

    fn contains(&self, x: &[f64]) -> Result<bool, GeometryError> {
        self.expect_dim(x)?;
        Ok(self.membership(x))
    }

    fn chord(&self, x: &[f64], e: &[f64]) -> Result<Chord, GeometryError> {
        check_chord_inputs(self, x, e)?;
        let membership = |tau: &[f64]| self.membership(tau);
        chord_bisect(
            &membership,
            x,
            e,
            self.meta.inner_radius(),
            BISECT_TOL,
            2.0 * self.meta.outer_radius() * (1.0 + 1e-9),
        )
    }

    fn ambient(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        self.expect_dim(x)?;
        Ok(matrix_to_interleaved(&self.matrix_at(x)))
    }

    fn from_ambient(&self, p: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let m = interleaved_to_matrix(p, self.n)?;
        let rho = DensityMatrix::new(m)?;
        Ok(density_to_bloch(&rho, &self.basis)?)
    }
}

/// States of a `K x K` bipartite system with positive partial transpose.
///
/// Same chart and radii as `density(K^2)`; no accessibility constant is
/// catalogued, so only the random-direction chain applies.
pub struct PptBody {
    k: usize,
    n: usize,
    basis: GeneratorBasis,
    meta: BodyMetadata,
}

impl PptBody {
    pub fn new(k: usize) -> Result<Self, GeometryError> {
        if k < 2 {
            return Err(GeometryError::InvalidParameter("ppt requires k >= 2".into()));
        }
        let n = k * k;
        let basis = su_generators(n)?;
        let d = n * n - 1;
        let (r, big_r) = catalogue_radii(n);
        let meta = BodyMetadata::new(d, vec![0.0; d], r, big_r, None, None)?;
        Ok(PptBody { k, n, basis, meta })
    }

    pub fn subsystem_size(&self) -> usize {
        self.k
    }

    pub fn matrix_size(&self) -> usize {
        self.n
    }

    pub fn generator_basis(&self) -> &GeneratorBasis {
        &self.basis
    }

    pub fn matrix_at(&self, tau: &[f64]) -> CMatrix {
        bloch_matrix_raw(tau, &self.basis)
    }

    fn membership(&self, tau: &[f64]) -> bool {
        let m = self.matrix_at(tau);
        let shift = SPECTRAL_SLACK * frobenius(&m);
        if !is_shifted_positive_definite(&m, shift) {
            return false;
        }
        let k = self.k;
        let mut pt = CMatrix::from_element(self.n, self.n, Complex64::new(0.0, 0.0));
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    for d in 0..k {
                        pt[(a * k + b, c * k + d)] = m[(a * k + d, c * k + b)];
                    }
                }
            }
        }
        is_shifted_positive_definite(&pt, shift)
    }
}

impl Body for PptBody {
    fn metadata(&self) -> &BodyMetadata {
        &self.meta
    }

    fn descriptor(&self) -> BodyDescriptor {
        BodyDescriptor::Ppt { k: self.k }
    }

    fn contains(&self, x: &[f64]) -> Result<bool, GeometryError> {
        self.expect_dim(x)?;
        Ok(self.membership(x))
    }

    fn chord(&self, x: &[f64], e: &[f64]) -> Result<Chord, GeometryError> {
        check_chord_inputs(self, x, e)?;
        let membership = |tau: &[f64]| self.membership(tau);
        chord_bisect(
            &membership,
            x,
            e,
            self.meta.inner_radius(),
            BISECT_TOL,
            2.0 * self.meta.outer_radius() * (1.0 + 1e-9),
        )
    }

    fn ambient(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        self.expect_dim(x)?;
        Ok(matrix_to_interleaved(&self.matrix_at(x)))
    }

    fn from_ambient(&self, p: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let m = interleaved_to_matrix(p, self.n)?;
        let rho = DensityMatrix::new(m)?;
        Ok(density_to_bloch(&rho, &self.basis)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::norm;

    #[test]
    fn density_metadata_matches_catalogue() {
        let b = DensityBody::new(2).unwrap();
        let m = b.metadata();
        assert_eq!(m.dim(), 3);
        let want = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m.inner_radius() - want).abs() < 1e-15);
        assert!((m.outer_radius() - want).abs() < 1e-15);
        assert_eq!(m.accessibility(), Some(3));
        assert_eq!(m.moves(), Some(3));

        let b3 = DensityBody::new(3).unwrap();
        assert_eq!(b3.metadata().dim(), 8);
        assert!((b3.metadata().outer_radius() - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ppt_metadata_has_no_accessibility() {
        let b = PptBody::new(2).unwrap();
        assert_eq!(b.metadata().dim(), 15);
        assert!(b.metadata().accessibility().is_none());
        assert!(b.metadata().basis().is_none());
        assert!(PptBody::new(1).is_err());
    }

    #[test]
    fn bloch_ball_boundary_for_n2() {
        // For N = 2 the body is exactly the Bloch ball of radius 1/sqrt(2).
        let b = DensityBody::new(2).unwrap();
        let membership = |tau: &[f64]| b.contains(tau).unwrap();
        let chord = chord_bisect(
            &membership,
            &[0.0; 3],
            &[1.0, 0.0, 0.0],
            0.3,
            1e-10,
            2.0,
        )
        .unwrap();
        let want = std::f64::consts::FRAC_1_SQRT_2;
        assert!((chord.t_max() - want).abs() < 1e-8);
        assert!((chord.t_min() + want).abs() < 1e-8);
        // And the body's own chord oracle agrees.
        let chord2 = b.chord(&[0.0; 3], &[0.0, 1.0, 0.0]).unwrap();
        assert!((chord2.t_max() - want).abs() < 1e-8);
    }

    #[test]
    fn density_chord_endpoints_are_members() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let b = DensityBody::new(3).unwrap();
        for _ in 0..20 {
            let mut e: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = norm(&e);
            e.iter_mut().for_each(|v| *v /= n);
            let chord = b.chord(&[0.0; 8], &e).unwrap();
            assert!(chord.t_max() > 0.0 && chord.t_min() < 0.0);
            let at = |t: f64| -> Vec<f64> { e.iter().map(|v| t * v).collect() };
            assert!(b.contains(&at(chord.t_max())).unwrap());
            assert!(b.contains(&at(chord.t_min())).unwrap());
            assert!(!b.contains(&at(chord.t_max() + 1e-8)).unwrap());
        }
    }

    #[test]
    fn ppt_membership_is_stricter_than_density() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let ppt = PptBody::new(2).unwrap();
        let dens = DensityBody::new(4).unwrap();
        let mut ppt_count = 0;
        let mut dens_count = 0;
        for _ in 0..200 {
            let tau: Vec<f64> = (0..15).map(|_| rng.random_range(-0.15..0.15)).collect();
            let in_dens = dens.contains(&tau).unwrap();
            let in_ppt = ppt.contains(&tau).unwrap();
            if in_ppt {
                assert!(in_dens);
                ppt_count += 1;
            }
            if in_dens {
                dens_count += 1;
            }
        }
        assert!(ppt_count > 0 && dens_count >= ppt_count);
    }

    #[test]
    fn ambient_round_trip() {
        let b = DensityBody::new(2).unwrap();
        let tau = [0.1, -0.2, 0.05];
        let amb = b.ambient(&tau).unwrap();
        assert_eq!(amb.len(), 8);
        let back = b.from_ambient(&amb).unwrap();
        for (a, t) in back.iter().zip(tau) {
            assert!((a - t).abs() < 1e-12);
        }
    }
}
