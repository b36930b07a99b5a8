//! Ground-truth samplers used to validate chain output: exact constructions
//! where closed forms exist, conditional rejection otherwise.

use crate::geometry::{Body, BodyDescriptor, GeometryError};
use crate::quantum::{density_to_bloch, su_generators, CMatrix, DensityMatrix, GeneratorBasis};
use crate::sampler::RandomSource;
use num_complex::Complex64;
use thiserror::Error;

/// Proposal budget before a rejection oracle gives up; vanishing acceptance
/// probability in high dimension shows up as this error rather than a hang.
pub const DEFAULT_MAX_TRIES: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("rejection sampler exceeded {tries} proposals without an acceptance")]
    MaxTriesExceeded { tries: u64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Acceptance-rate estimate of a rejection sampler with its binomial
/// standard error.
#[derive(Debug, Clone, Copy)]
pub struct RateEstimate {
    pub rate: f64,
    pub std_error: f64,
    pub accepted: u64,
    pub proposed: u64,
}

/// Uniform draw from the ball of radius `r`: Gaussian direction scaled by
/// `r U^{1/d}`.
pub fn exact_ball(d: usize, r: f64, rng: &mut RandomSource) -> Vec<f64> {
    assert!(d >= 1 && r > 0.0);
    let mut x: Vec<f64>;
    let mut norm;
    loop {
        x = (0..d).map(|_| rng.standard_normal()).collect();
        norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            break;
        }
    }
    let radius = r * rng.uniform().powf(1.0 / d as f64);
    x.iter_mut().for_each(|v| *v *= radius / norm);
    x
}

/// Uniform (Dirichlet(1,...,1)) draw from the probability simplex, in
/// ambient coordinates: `N` standard exponentials normalized by their sum.
pub fn exact_simplex(n: usize, rng: &mut RandomSource) -> Vec<f64> {
    assert!(n >= 2);
    loop {
        let mut x: Vec<f64> = (0..n).map(|_| rng.standard_exponential()).collect();
        let sum: f64 = x.iter().sum();
        if sum > 0.0 {
            x.iter_mut().for_each(|v| *v /= sum);
            return x;
        }
    }
}

/// Random density matrix under the flat (Hilbert-Schmidt) measure:
/// `rho = G G^H / Tr(G G^H)` for a square complex Ginibre matrix `G`.
pub fn hs_random_density(n: usize, rng: &mut RandomSource) -> DensityMatrix {
    assert!(n >= 2);
    let g = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.standard_normal(), rng.standard_normal())
    });
    let mut m = &g * g.adjoint();
    let tr: f64 = (0..n).map(|i| m[(i, i)].re).sum();
    m.iter_mut().for_each(|c| *c /= tr);
    // Symmetrize away the last floating-point crumbs so the constructor's
    // Hermiticity gate never trips.
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    DensityMatrix::new(m).expect("Ginibre construction yields a density matrix")
}

/// First accepted draw of `proposal` under `membership`, with the number of
/// proposals consumed. The proposal must be uniform on a superset of the
/// target for the accepted law to be uniform on it.
pub fn rejection(
    proposal: &mut dyn FnMut(&mut RandomSource) -> Vec<f64>,
    membership: &dyn Fn(&[f64]) -> bool,
    max_tries: u64,
    rng: &mut RandomSource,
) -> Result<(Vec<f64>, u64), OracleError> {
    for tries in 1..=max_tries {
        let candidate = proposal(rng);
        if membership(&candidate) {
            return Ok((candidate, tries));
        }
    }
    Err(OracleError::MaxTriesExceeded { tries: max_tries })
}

enum OracleKind {
    BallExact { d: usize },
    CubeExact { d: usize },
    SimplexExact { n: usize },
    StochasticExact { n: usize },
    BirkhoffReject { n: usize },
    DensityReject { d: usize, radius: f64 },
    PptReject { basis: GeneratorBasis },
}

/// Ground-truth sampler for a catalogued body, drawing in the body's chart
/// coordinates so output is directly comparable with chain output.
pub struct Oracle<'a> {
    body: &'a dyn Body,
    kind: OracleKind,
    accepted: u64,
    proposed: u64,
    max_tries: u64,
}

/// Ground truth for `body`, or `None` when the catalogue has no exact or
/// tractable rejection construction for it (`birkhoff` up to N = 4,
/// `density` up to N = 3, `ppt` only at K = 2).
///
/// Documented proposals: `birkhoff` draws the free (N-1)x(N-1) block
/// uniformly in the unit cube and accepts when the bistochastic completion
/// is non-negative; `density` draws uniformly in the Bloch ball of radius
/// `R` and accepts positive matrices; `ppt` filters exact flat-measure
/// density(4) samples (Ginibre construction) through the partial-transpose
/// test.
pub fn oracle_for(body: &dyn Body) -> Option<Oracle<'_>> {
    let kind = match body.descriptor() {
        BodyDescriptor::Ball { d } => OracleKind::BallExact { d },
        BodyDescriptor::Cube { d } => OracleKind::CubeExact { d },
        BodyDescriptor::Simplex { n } => OracleKind::SimplexExact { n },
        BodyDescriptor::Stochastic { n } => OracleKind::StochasticExact { n },
        BodyDescriptor::Birkhoff { n } if n <= 4 => OracleKind::BirkhoffReject { n },
        BodyDescriptor::Density { n } if n <= 3 => OracleKind::DensityReject {
            d: n * n - 1,
            radius: body.metadata().outer_radius(),
        },
        BodyDescriptor::Ppt { k } if k == 2 => OracleKind::PptReject {
            basis: su_generators(4).expect("N = 4 generator basis"),
        },
        _ => return None,
    };
    Some(Oracle {
        body,
        kind,
        accepted: 0,
        proposed: 0,
        max_tries: DEFAULT_MAX_TRIES,
    })
}

impl<'a> Oracle<'a> {
    pub fn with_max_tries(mut self, max_tries: u64) -> Self {
        self.max_tries = max_tries;
        self
    }

    /// One ground-truth draw in chart coordinates.
    pub fn draw(&mut self, rng: &mut RandomSource) -> Result<Vec<f64>, OracleError> {
        match &self.kind {
            OracleKind::BallExact { d } => Ok(exact_ball(*d, 1.0, rng)),
            OracleKind::CubeExact { d } => {
                Ok((0..*d).map(|_| rng.uniform() - 0.5).collect())
            }
            OracleKind::SimplexExact { n } => {
                let p = exact_simplex(*n, rng);
                Ok(self.body.from_ambient(&p)?)
            }
            OracleKind::StochasticExact { n } => {
                let n = *n;
                let mut matrix = vec![0.0; n * n];
                for c in 0..n {
                    let col = exact_simplex(n, rng);
                    for (i, v) in col.iter().enumerate() {
                        matrix[i * n + c] = *v;
                    }
                }
                Ok(self.body.from_ambient(&matrix)?)
            }
            OracleKind::BirkhoffReject { n } => {
                let n = *n;
                let block = n - 1;
                let body = self.body;
                let mut proposal = |rng: &mut RandomSource| {
                    let free: Vec<f64> = (0..block * block).map(|_| rng.uniform()).collect();
                    complete_bistochastic(&free, n)
                };
                let membership = |m: &[f64]| m.iter().all(|v| *v >= 0.0);
                let (matrix, tries) = rejection(&mut proposal, &membership, self.max_tries, rng)?;
                self.proposed += tries;
                self.accepted += 1;
                Ok(body.from_ambient(&matrix)?)
            }
            OracleKind::DensityReject { d, radius } => {
                let (d, radius) = (*d, *radius);
                let body = self.body;
                let mut proposal = |rng: &mut RandomSource| exact_ball(d, radius, rng);
                let membership = |tau: &[f64]| body.contains(tau).unwrap_or(false);
                let (tau, tries) = rejection(&mut proposal, &membership, self.max_tries, rng)?;
                self.proposed += tries;
                self.accepted += 1;
                Ok(tau)
            }
            OracleKind::PptReject { basis } => {
                let body = self.body;
                let mut proposal = |rng: &mut RandomSource| {
                    let rho = hs_random_density(4, rng);
                    density_to_bloch(&rho, basis).expect("matching basis")
                };
                let membership = |tau: &[f64]| body.contains(tau).unwrap_or(false);
                let (tau, tries) = rejection(&mut proposal, &membership, self.max_tries, rng)?;
                self.proposed += tries;
                self.accepted += 1;
                Ok(tau)
            }
        }
    }

    /// Draws `count` samples.
    pub fn draw_many(
        &mut self,
        count: usize,
        rng: &mut RandomSource,
    ) -> Result<Vec<Vec<f64>>, OracleError> {
        (0..count).map(|_| self.draw(rng)).collect()
    }

    /// Acceptance-rate estimate; `None` for exact (non-rejection) oracles.
    pub fn acceptance(&self) -> Option<RateEstimate> {
        match self.kind {
            OracleKind::BallExact { .. }
            | OracleKind::CubeExact { .. }
            | OracleKind::SimplexExact { .. }
            | OracleKind::StochasticExact { .. } => None,
            _ => {
                if self.proposed == 0 {
                    return None;
                }
                let rate = self.accepted as f64 / self.proposed as f64;
                Some(RateEstimate {
                    rate,
                    std_error: (rate * (1.0 - rate) / self.proposed as f64).sqrt(),
                    accepted: self.accepted,
                    proposed: self.proposed,
                })
            }
        }
    }
}

/// Completes a row-major free block to the full `n x n` matrix with all row
/// and column sums equal to one (entries may be negative; that is what the
/// rejection step tests).
fn complete_bistochastic(free: &[f64], n: usize) -> Vec<f64> {
    let block = n - 1;
    let mut m = vec![0.0; n * n];
    let mut total = 0.0;
    for i in 0..block {
        let mut row_sum = 0.0;
        for j in 0..block {
            let v = free[i * block + j];
            m[i * n + j] = v;
            row_sum += v;
            total += v;
        }
        m[i * n + block] = 1.0 - row_sum;
    }
    for j in 0..block {
        let col_sum: f64 = (0..block).map(|i| free[i * block + j]).sum();
        m[block * n + j] = 1.0 - col_sum;
    }
    m[block * n + block] = total - (n as f64 - 2.0);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_body;
    use crate::quantum::{is_ppt, min_eigenvalue};

    #[test]
    fn ball_draws_live_inside_with_the_right_second_moment() {
        let mut rng = RandomSource::from_seed(2);
        let d = 3;
        let n = 1_000_000;
        let mut sum_r2 = 0.0;
        for _ in 0..n {
            let x = exact_ball(d, 1.0, &mut rng);
            let r2: f64 = x.iter().map(|v| v * v).sum();
            assert!(r2 <= 1.0 + 1e-12);
            sum_r2 += r2;
        }
        // E|x|^2 = d/(d+2); sd of the estimate from Var(R^2) = d/(d+4) - (d/(d+2))^2.
        let want = d as f64 / (d as f64 + 2.0);
        let var = d as f64 / (d as f64 + 4.0) - want * want;
        let band = 3.0 * (var / n as f64).sqrt();
        assert!((sum_r2 / n as f64 - want).abs() < band);
    }

    #[test]
    fn one_dimensional_ball_is_uniform_by_ks() {
        let mut rng = RandomSource::from_seed(4);
        let n = 1_000_000;
        let mut xs: Vec<f64> = (0..n).map(|_| exact_ball(1, 1.0, &mut rng)[0]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks: f64 = 0.0;
        for (i, x) in xs.iter().enumerate() {
            let cdf = (x + 1.0) / 2.0;
            let hi = (i + 1) as f64 / n as f64;
            let lo = i as f64 / n as f64;
            ks = ks.max((cdf - lo).abs()).max((hi - cdf).abs());
        }
        assert!(ks <= 0.002, "KS = {ks}");
    }

    #[test]
    fn simplex_draws_have_dirichlet_moments() {
        let mut rng = RandomSource::from_seed(6);
        let n = 4usize;
        let draws = 1_000_000;
        let mut mean = vec![0.0; n];
        let mut mean_sq = vec![0.0; n];
        for _ in 0..draws {
            let p = exact_simplex(n, &mut rng);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for i in 0..n {
                mean[i] += p[i];
                mean_sq[i] += p[i] * p[i];
            }
        }
        let nf = n as f64;
        let want_var = (nf - 1.0) / (nf * nf * (nf + 1.0));
        for i in 0..n {
            let m = mean[i] / draws as f64;
            let v = mean_sq[i] / draws as f64 - m * m;
            // 3 sigma on the mean; a generous relative band on the variance.
            assert!((m - 1.0 / nf).abs() < 3.0 * (want_var / draws as f64).sqrt());
            assert!((v - want_var).abs() < 0.02 * want_var, "var {v} vs {want_var}");
        }
    }

    #[test]
    fn rejection_with_trivial_membership_accepts_first_draw() {
        let mut rng = RandomSource::from_seed(8);
        let mut proposal = |rng: &mut RandomSource| vec![rng.uniform()];
        let (x, tries) = rejection(&mut proposal, &|_| true, 10, &mut rng).unwrap();
        assert_eq!(tries, 1);
        assert!(x[0] >= 0.0 && x[0] < 1.0);
    }

    #[test]
    fn rejection_reports_exhaustion() {
        let mut rng = RandomSource::from_seed(8);
        let mut proposal = |rng: &mut RandomSource| vec![rng.uniform()];
        let err = rejection(&mut proposal, &|_| false, 100, &mut rng).unwrap_err();
        assert!(matches!(err, OracleError::MaxTriesExceeded { tries: 100 }));
    }

    #[test]
    fn every_available_oracle_emits_members() {
        let mut rng = RandomSource::from_seed(10);
        for desc in [
            "ball:d=3",
            "box:d=4",
            "simplex:n=4",
            "stochastic:n=3",
            "birkhoff:n=3",
            "density:n=2",
            "density:n=3",
            "ppt:k=2",
        ] {
            let body = make_body(&desc.parse().unwrap()).unwrap();
            let mut oracle = oracle_for(body.as_ref()).unwrap_or_else(|| panic!("{desc}"));
            for _ in 0..50 {
                let x = oracle.draw(&mut rng).unwrap();
                assert!(body.contains(&x).unwrap(), "{desc}");
            }
        }
    }

    #[test]
    fn catalogue_edges_have_no_oracle() {
        for desc in ["birkhoff:n=5", "density:n=4", "ppt:k=3"] {
            let body = make_body(&desc.parse().unwrap()).unwrap();
            assert!(oracle_for(body.as_ref()).is_none(), "{desc}");
        }
    }

    #[test]
    fn density_2_rejection_accepts_everything() {
        // At N = 2 the Bloch ball equals the body, so the acceptance rate is 1.
        let body = make_body(&"density:n=2".parse().unwrap()).unwrap();
        let mut oracle = oracle_for(body.as_ref()).unwrap();
        let mut rng = RandomSource::from_seed(12);
        oracle.draw_many(2000, &mut rng).unwrap();
        let est = oracle.acceptance().unwrap();
        assert_eq!(est.rate, 1.0);
        assert_eq!(est.proposed, 2000);
    }

    #[test]
    fn birkhoff_oracle_records_its_acceptance_rate() {
        let body = make_body(&"birkhoff:n=3".parse().unwrap()).unwrap();
        let mut oracle = oracle_for(body.as_ref()).unwrap();
        let mut rng = RandomSource::from_seed(14);
        oracle.draw_many(2000, &mut rng).unwrap();
        let est = oracle.acceptance().unwrap();
        assert!(est.rate > 0.05 && est.rate < 1.0, "rate {}", est.rate);
        assert!(est.std_error > 0.0);
    }

    #[test]
    fn ppt_oracle_draws_pass_both_positivity_tests() {
        let body = make_body(&"ppt:k=2".parse().unwrap()).unwrap();
        let mut oracle = oracle_for(body.as_ref()).unwrap();
        let mut rng = RandomSource::from_seed(16);
        let basis = su_generators(4).unwrap();
        for _ in 0..200 {
            let tau = oracle.draw(&mut rng).unwrap();
            let rho = crate::quantum::bloch_to_density(&tau, &basis).unwrap();
            assert!(min_eigenvalue(rho.entries()).unwrap() >= -1e-10);
            assert!(is_ppt(&rho, 2, 1e-10).unwrap());
        }
        let est = oracle.acceptance().unwrap();
        // About a quarter of flat-measure two-qubit states are PPT.
        assert!(est.rate > 0.1 && est.rate < 0.5, "rate {}", est.rate);
    }

    #[test]
    fn ginibre_density_matrices_have_flat_measure_mean() {
        let mut rng = RandomSource::from_seed(18);
        let n = 3;
        let draws = 20_000;
        let mut diag_mean = vec![0.0; n];
        for _ in 0..draws {
            let rho = hs_random_density(n, &mut rng);
            for i in 0..n {
                diag_mean[i] += rho.entries()[(i, i)].re;
            }
        }
        for m in diag_mean {
            assert!((m / draws as f64 - 1.0 / n as f64).abs() < 0.01);
        }
    }
}
