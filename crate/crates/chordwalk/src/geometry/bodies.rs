//! Euclidean ball and the half-space polytope family (cube, simplex,
//! stochastic matrices, Birkhoff polytope, custom polytopes).

use super::charts::{BirkhoffChart, SimplexChart};
use super::{
    check_chord_inputs, dot, Body, BodyDescriptor, BodyMetadata, Chord, GeometryError,
    LINEAR_SLACK,
};

/// Closed Euclidean unit ball in `R^d`.
#[derive(Debug)]
pub struct Ball {
    meta: BodyMetadata,
}

impl Ball {
    pub fn new(d: usize) -> Result<Self, GeometryError> {
        if d == 0 {
            return Err(GeometryError::InvalidParameter("ball requires d >= 1".into()));
        }
        let basis = axis_basis(d);
        let meta = BodyMetadata::new(d, vec![0.0; d], 1.0, 1.0, Some(d as u64), Some(basis))?;
        Ok(Ball { meta })
    }
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

impl Body for Ball {
    fn metadata(&self) -> &BodyMetadata {
        &self.meta
    }

    fn descriptor(&self) -> BodyDescriptor {
        BodyDescriptor::Ball { d: self.meta.dim() }
    }

    fn contains(&self, x: &[f64]) -> Result<bool, GeometryError> {
        self.expect_dim(x)?;
        Ok(dot(x, x) <= 1.0 + 2.0 * LINEAR_SLACK)
    }

    fn chord(&self, x: &[f64], e: &[f64]) -> Result<Chord, GeometryError> {
        check_chord_inputs(self, x, e)?;
        // |x + t e|^2 = 1 with |e| = 1: t^2 + 2 t <x,e> + |x|^2 - 1 = 0.
        let b = dot(x, e);
        let disc = b * b + 1.0 - dot(x, x);
        if disc <= 0.0 {
            return Ok(Chord::new(0.0, 0.0));
        }
        let root = disc.sqrt();
        Ok(Chord::new(-b - root, -b + root))
    }
}

/// How chart coordinates of a polytope map to its natural representation.
#[derive(Debug)]
enum AmbientMap {
    Identity,
    /// Probability vector of length `n`.
    Simplex(SimplexChart),
    /// Row-major `n x n` column-stochastic matrix; chart blocks are the
    /// columns' simplex charts, concatenated.
    Stochastic { chart: SimplexChart },
    /// Row-major `n x n` bistochastic matrix.
    Birkhoff(BirkhoffChart),
}

/// Bounded intersection of half-spaces `a_j . x <= c_j` with closed-form
/// chords.
#[derive(Debug)]
pub struct Polytope {
    constraints: Vec<(Vec<f64>, f64)>,
    meta: BodyMetadata,
    ambient: AmbientMap,
    descriptor: BodyDescriptor,
}

impl Polytope {
    /// Cube `[-1/2, 1/2]^d`: `r = 1/2`, `R = sqrt(d)/2`, `d`-accessible
    /// along the axes.
    pub fn cube(d: usize) -> Result<Self, GeometryError> {
        if d == 0 {
            return Err(GeometryError::InvalidParameter("box requires d >= 1".into()));
        }
        let mut constraints = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut a = vec![0.0; d];
            a[i] = 1.0;
            constraints.push((a.clone(), 0.5));
            a[i] = -1.0;
            constraints.push((a, 0.5));
        }
        let meta = BodyMetadata::new(
            d,
            vec![0.0; d],
            0.5,
            0.5 * (d as f64).sqrt(),
            Some(d as u64),
            Some(axis_basis(d)),
        )?;
        Ok(Polytope {
            constraints,
            meta,
            ambient: AmbientMap::Identity,
            descriptor: BodyDescriptor::Cube { d },
        })
    }

    /// Probability simplex `Delta_N` in its isometric chart:
    /// `R = sqrt((N-1)/N)`, `r = 1/sqrt(N(N-1))`, `d = N - 1`-accessible
    /// along edge directions.
    pub fn simplex(n: usize) -> Result<Self, GeometryError> {
        if n < 2 {
            return Err(GeometryError::InvalidParameter("simplex requires n >= 2".into()));
        }
        let chart = SimplexChart::new(n);
        let d = n - 1;
        let nf = n as f64;
        let meta = BodyMetadata::new(
            d,
            vec![0.0; d],
            1.0 / (nf * (nf - 1.0)).sqrt(),
            ((nf - 1.0) / nf).sqrt(),
            Some(d as u64),
            Some(chart.edge_basis()),
        )?;
        Ok(Polytope {
            constraints: chart.constraints(),
            meta,
            ambient: AmbientMap::Simplex(chart),
            descriptor: BodyDescriptor::Simplex { n },
        })
    }

    /// Column-stochastic matrices of order `N` as the Cartesian product of
    /// `N` simplices: `d = N(N-1)`, `r = 1/sqrt(N(N-1))`, `R = sqrt(N-1)`,
    /// `d`-accessible along the per-column edge moves.
    pub fn stochastic(n: usize) -> Result<Self, GeometryError> {
        if n < 2 {
            return Err(GeometryError::InvalidParameter("stochastic requires n >= 2".into()));
        }
        let chart = SimplexChart::new(n);
        let block = n - 1;
        let d = n * block;
        let mut constraints = Vec::with_capacity(n * n);
        let mut basis = Vec::with_capacity(d);
        for c in 0..n {
            for (a, cval) in chart.constraints() {
                let mut row = vec![0.0; d];
                row[c * block..(c + 1) * block].copy_from_slice(&a);
                constraints.push((row, cval));
            }
            for v in chart.edge_basis() {
                let mut row = vec![0.0; d];
                row[c * block..(c + 1) * block].copy_from_slice(&v);
                basis.push(row);
            }
        }
        let nf = n as f64;
        let meta = BodyMetadata::new(
            d,
            vec![0.0; d],
            1.0 / (nf * (nf - 1.0)).sqrt(),
            (nf - 1.0).sqrt(),
            Some(d as u64),
            Some(basis),
        )?;
        Ok(Polytope {
            constraints,
            meta,
            ambient: AmbientMap::Stochastic { chart },
            descriptor: BodyDescriptor::Stochastic { n },
        })
    }

    /// Birkhoff polytope of bistochastic matrices: `d = (N-1)^2`,
    /// `(N-1)^3`-accessible with respect to the `N^2 (N-1)^2` exchange
    /// moves.
    ///
    /// The catalogued inscribed radius is `1/sqrt(N-1)`, the distance from
    /// the uniform matrix to the zero-diagonal matrix on the boundary; note
    /// that the nearest facet is closer (at distance `1/(N-1)`), so the ball
    /// of radius `r` about the barycenter pokes out of the polytope for
    /// `N >= 3`. The value is kept because the convergence-bound catalogue
    /// is stated in terms of it.
    pub fn birkhoff(n: usize) -> Result<Self, GeometryError> {
        if n < 2 {
            return Err(GeometryError::InvalidParameter("birkhoff requires n >= 2".into()));
        }
        let chart = BirkhoffChart::new(n);
        let d = chart.dim();
        // Exchange moves over ordered pairs with i != gamma, alpha != beta.
        let mut basis = Vec::with_capacity(n * n * (n - 1) * (n - 1));
        for i in 0..n {
            for gamma in 0..n {
                if i == gamma {
                    continue;
                }
                for alpha in 0..n {
                    for beta in 0..n {
                        if alpha == beta {
                            continue;
                        }
                        basis.push(chart.move_chart(i, gamma, alpha, beta));
                    }
                }
            }
        }
        let nf = n as f64;
        let k = (n as u64 - 1).pow(3);
        let meta = BodyMetadata::new(
            d,
            vec![0.0; d],
            1.0 / (nf - 1.0).sqrt(),
            (nf - 1.0).sqrt(),
            Some(k),
            Some(basis),
        )?;
        Ok(Polytope {
            constraints: chart.constraints(),
            meta,
            ambient: AmbientMap::Birkhoff(chart),
            descriptor: BodyDescriptor::Birkhoff { n },
        })
    }

    /// Arbitrary bounded polytope `{x : a_j . x <= c_j}` with caller-supplied
    /// metadata; chart coordinates are taken at face value.
    pub fn from_halfspaces(
        constraints: Vec<(Vec<f64>, f64)>,
        meta: BodyMetadata,
        label: impl Into<String>,
    ) -> Result<Self, GeometryError> {
        let d = meta.dim();
        for (a, _) in &constraints {
            if a.len() != d {
                return Err(GeometryError::DimensionMismatch {
                    expected: d,
                    got: a.len(),
                });
            }
        }
        Ok(Polytope {
            constraints,
            meta,
            ambient: AmbientMap::Identity,
            descriptor: BodyDescriptor::Custom { label: label.into() },
        })
    }

    pub fn constraints(&self) -> &[(Vec<f64>, f64)] {
        &self.constraints
    }
}

impl Body for Polytope {
    fn metadata(&self) -> &BodyMetadata {
        &self.meta
    }

    fn descriptor(&self) -> BodyDescriptor {
        self.descriptor.clone()
    }

    fn contains(&self, x: &[f64]) -> Result<bool, GeometryError> {
        self.expect_dim(x)?;
        Ok(self
            .constraints
            .iter()
            .all(|(a, c)| dot(a, x) <= c + LINEAR_SLACK))
    }

    fn chord(&self, x: &[f64], e: &[f64]) -> Result<Chord, GeometryError> {
        check_chord_inputs(self, x, e)?;
        // Along x + t e the constraint a.x + t a.e <= c bounds t from above
        // when a.e > 0 and from below when a.e < 0. No slack here: the raw
        // intersection keeps corner chords exactly degenerate.
        let mut t_max = f64::INFINITY;
        let mut t_min = f64::NEG_INFINITY;
        for (a, c) in &self.constraints {
            let speed = dot(a, e);
            if speed == 0.0 {
                continue;
            }
            let gap = c - dot(a, x);
            let bound = gap / speed;
            if speed > 0.0 {
                t_max = t_max.min(bound);
            } else {
                t_min = t_min.max(bound);
            }
        }
        if !t_max.is_finite() || !t_min.is_finite() {
            // Bounded polytopes bound every direction; an unbounded ray
            // means the constraint set was inconsistent with the metadata.
            return Err(GeometryError::BracketExceeded {
                cap: 2.0 * self.meta.outer_radius(),
            });
        }
        Ok(Chord::new(t_min, t_max))
    }

    fn ambient(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        self.expect_dim(x)?;
        Ok(match &self.ambient {
            AmbientMap::Identity => x.to_vec(),
            AmbientMap::Simplex(chart) => chart.to_ambient(x),
            AmbientMap::Stochastic { chart } => {
                let n = chart.n();
                let block = n - 1;
                let mut m = vec![0.0; n * n];
                for c in 0..n {
                    let p = chart.to_ambient(&x[c * block..(c + 1) * block]);
                    for (i, pi) in p.iter().enumerate() {
                        m[i * n + c] = *pi;
                    }
                }
                m
            }
            AmbientMap::Birkhoff(chart) => chart.to_matrix(x),
        })
    }

    fn from_ambient(&self, p: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let expect = |want: usize| {
            if p.len() != want {
                Err(GeometryError::DimensionMismatch {
                    expected: want,
                    got: p.len(),
                })
            } else {
                Ok(())
            }
        };
        Ok(match &self.ambient {
            AmbientMap::Identity => {
                self.expect_dim(p)?;
                p.to_vec()
            }
            AmbientMap::Simplex(chart) => {
                expect(chart.n())?;
                chart.from_ambient(p)
            }
            AmbientMap::Stochastic { chart } => {
                let n = chart.n();
                expect(n * n)?;
                let mut x = Vec::with_capacity(self.dim());
                for c in 0..n {
                    let col: Vec<f64> = (0..n).map(|i| p[i * n + c]).collect();
                    x.extend(chart.from_ambient(&col));
                }
                x
            }
            AmbientMap::Birkhoff(chart) => {
                expect(chart.n() * chart.n())?;
                chart.from_matrix(p)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::chord_bisect;

    #[test]
    fn ball_metadata_matches_catalogue() {
        let ball = Ball::new(3).unwrap();
        let m = ball.metadata();
        assert_eq!(m.dim(), 3);
        assert_eq!(m.inner_radius(), 1.0);
        assert_eq!(m.outer_radius(), 1.0);
        assert_eq!(m.accessibility(), Some(3));
        assert_eq!(m.moves(), Some(3));
    }

    #[test]
    fn ball_membership_and_diameter_chord() {
        let ball = Ball::new(2).unwrap();
        assert!(ball.contains(&[0.0, 0.0]).unwrap());
        assert!(!ball.contains(&[2.0, 0.0]).unwrap());
        let ball3 = Ball::new(3).unwrap();
        let e = [1.0 / 3.0f64.sqrt(); 3];
        let chord = ball3.chord(&[0.0; 3], &e).unwrap();
        assert!((chord.t_min() + 1.0).abs() < 1e-14);
        assert!((chord.t_max() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cube_chord_through_center() {
        let cube = Polytope::cube(2).unwrap();
        let chord = cube.chord(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(chord.t_min(), -0.5);
        assert_eq!(chord.t_max(), 0.5);
    }

    #[test]
    fn cube_metadata_matches_catalogue() {
        let cube = Polytope::cube(8).unwrap();
        let m = cube.metadata();
        assert_eq!(m.inner_radius(), 0.5);
        assert!((m.outer_radius() - 0.5 * 8.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.accessibility(), Some(8));
    }

    #[test]
    fn simplex_metadata_matches_catalogue() {
        for n in [2usize, 3, 5] {
            let s = Polytope::simplex(n).unwrap();
            let m = s.metadata();
            let nf = n as f64;
            assert_eq!(m.dim(), n - 1);
            assert!((m.inner_radius() - 1.0 / (nf * (nf - 1.0)).sqrt()).abs() < 1e-15);
            assert!((m.outer_radius() - ((nf - 1.0) / nf).sqrt()).abs() < 1e-15);
            assert_eq!(m.accessibility(), Some(n as u64 - 1));
            assert_eq!(m.moves(), Some(n - 1));
        }
    }

    #[test]
    fn simplex_chord_at_barycenter_along_edge_direction() {
        // Ambient start (1/3,1/3,1/3), ambient direction (1,-1,0)/sqrt(2):
        // the active constraints p_1 >= 0 and p_2 >= 0 give +-sqrt(2)/3.
        let s = Polytope::simplex(3).unwrap();
        let x = s.from_ambient(&[1.0 / 3.0; 3]).unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let dir_ambient = [inv_sqrt2, -inv_sqrt2, 0.0];
        // Directions map through the linear part of the chart, which equals
        // from_ambient for zero-sum vectors.
        let e = s.from_ambient(&dir_ambient).unwrap();
        assert!((crate::geometry::norm(&e) - 1.0).abs() < 1e-12);
        let chord = s.chord(&x, &e).unwrap();
        let want = 2.0f64.sqrt() / 3.0;
        assert!((chord.t_max() - want).abs() < 1e-12, "{}", chord.t_max());
        assert!((chord.t_min() + want).abs() < 1e-12);
    }

    #[test]
    fn birkhoff_metadata_matches_catalogue() {
        let b = Polytope::birkhoff(3).unwrap();
        let m = b.metadata();
        assert_eq!(m.dim(), 4);
        assert!((m.inner_radius() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((m.outer_radius() - 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.accessibility(), Some(8));
        assert_eq!(m.moves(), Some(36));
    }

    #[test]
    fn birkhoff_barycenter_is_member_and_completes() {
        let b = Polytope::birkhoff(3).unwrap();
        let x = b.from_ambient(&vec![1.0 / 3.0; 9]).unwrap();
        assert!(crate::geometry::norm(&x) < 1e-14);
        assert!(b.contains(&x).unwrap());
        let m = b.ambient(&x).unwrap();
        for v in m {
            assert!((v - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn stochastic_is_product_of_simplices() {
        let st = Polytope::stochastic(3).unwrap();
        let m = st.metadata();
        assert_eq!(m.dim(), 6);
        assert_eq!(m.accessibility(), Some(6));
        assert_eq!(m.moves(), Some(6));
        assert!((m.outer_radius() - 2.0f64.sqrt()).abs() < 1e-15);
        // Column sums of the ambient matrix are 1.
        let amb = st.ambient(&[0.1, 0.05, -0.2, 0.0, 0.12, -0.03]).unwrap();
        for c in 0..3 {
            let s: f64 = (0..3).map(|i| amb[i * 3 + c]).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
        let back = st.from_ambient(&amb).unwrap();
        for (a, b) in back.iter().zip([0.1, 0.05, -0.2, 0.0, 0.12, -0.03]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn polytope_chord_agrees_with_bisection() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let bodies: Vec<Polytope> = vec![
            Polytope::cube(3).unwrap(),
            Polytope::simplex(4).unwrap(),
            Polytope::birkhoff(3).unwrap(),
        ];
        for body in &bodies {
            let d = body.dim();
            let membership = |p: &[f64]| body.contains(p).unwrap_or(false);
            for _ in 0..60 {
                // Random interior point: shrink a random direction inside r.
                let x: Vec<f64> = (0..d)
                    .map(|_| rng.random_range(-0.3..0.3) * body.metadata().inner_radius())
                    .collect();
                if !body.contains(&x).unwrap() {
                    continue;
                }
                let mut e: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let n = crate::geometry::norm(&e);
                if n < 1e-6 {
                    continue;
                }
                e.iter_mut().for_each(|v| *v /= n);
                let exact = body.chord(&x, &e).unwrap();
                let approx = chord_bisect(
                    &membership,
                    &x,
                    &e,
                    body.metadata().inner_radius(),
                    crate::geometry::BISECT_TOL,
                    2.0 * body.metadata().outer_radius() * (1.0 + 1e-9),
                )
                .unwrap();
                let tol = 10.0 * crate::geometry::BISECT_TOL;
                assert!((exact.t_max() - approx.t_max()).abs() < tol);
                assert!((exact.t_min() - approx.t_min()).abs() < tol);
            }
        }
    }
}
