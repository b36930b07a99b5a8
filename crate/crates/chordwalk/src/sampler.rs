//! The two chord-walk Markov kernels and the chain runner.
//!
//! Draw order is fixed so streams are reproducible: each step first draws
//! the direction (one uniform index for the fixed-basis kernel, `d`
//! standard-normal variates for the random-direction kernel), then exactly
//! one uniform for the chord parameter. A degenerate chord still consumes
//! the chord uniform and leaves the point unchanged, so randomness
//! consumption per step is constant.

use crate::geometry::{Body, Chord, GeometryError};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("start point lies outside the body")]
    StartOutsideBody,
    #[error("fixed-basis sampling requires a body with a catalogued move set")]
    MissingBasis,
    #[error("invalid chain configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Stable seed derivation for parallel chains:
/// `child = splitmix64(parent ^ splitmix64(index + 1))`.
pub fn child_seed(parent: u64, chain_index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(chain_index.wrapping_add(1)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seedable random stream; identical seeds give identical variate streams
/// within one build.
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha8Rng,
    seed: u64,
}

impl RandomSource {
    pub fn from_seed(seed: u64) -> Self {
        RandomSource {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream for chain `index`, derived from the original seed
    /// by [`child_seed`].
    pub fn spawn(&self, index: u64) -> Self {
        RandomSource::from_seed(child_seed(self.seed, index))
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn standard_exponential(&mut self) -> f64 {
        self.rng.sample(rand_distr::Exp1)
    }
}

/// Which kernel drives the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Direction drawn uniformly from the body's catalogued move set.
    FixedBasis,
    /// Direction drawn uniformly on the unit sphere.
    RandomDirection,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algorithm::FixedBasis => write!(f, "fixed_basis"),
            Algorithm::RandomDirection => write!(f, "random_direction"),
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed_basis" => Ok(Algorithm::FixedBasis),
            "random_direction" => Ok(Algorithm::RandomDirection),
            other => Err(format!(
                "unknown algorithm {other:?}; expected fixed_basis or random_direction"
            )),
        }
    }
}

/// Chain parameters. `steps` counts kernel applications after burn-in;
/// every `thin`-th point is emitted, for `steps / thin` points in total.
#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub algorithm: Algorithm,
    pub steps: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub seed: u64,
    /// Start point; defaults to the body's interior reference point `x*`.
    pub start: Option<Vec<f64>>,
}

impl ChainConfig {
    pub fn new(algorithm: Algorithm, steps: u64, seed: u64) -> Self {
        ChainConfig {
            algorithm,
            steps,
            burn_in: 0,
            thin: 1,
            seed,
            start: None,
        }
    }

    pub fn with_burn_in(mut self, burn_in: u64) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_thin(mut self, thin: u64) -> Self {
        self.thin = thin;
        self
    }

    pub fn with_start(mut self, start: Vec<f64>) -> Self {
        self.start = Some(start);
        self
    }

    fn validate(&self, body: &dyn Body) -> Result<(), SamplerError> {
        if self.steps == 0 {
            return Err(SamplerError::BadConfig("steps must be >= 1".into()));
        }
        if self.thin == 0 {
            return Err(SamplerError::BadConfig("thin must be >= 1".into()));
        }
        if self.algorithm == Algorithm::FixedBasis && body.metadata().basis().is_none() {
            return Err(SamplerError::MissingBasis);
        }
        Ok(())
    }
}

/// Uniform direction on the unit sphere `S^{d-1}`: `d` independent standard
/// normals, normalized. Consumes exactly `d` normal variates (a zero norm
/// would trigger a redraw, but has probability zero).
pub fn sample_direction(d: usize, rng: &mut RandomSource) -> Vec<f64> {
    assert!(d >= 1, "direction dimension must be positive");
    loop {
        let e: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            return e.into_iter().map(|v| v / norm).collect();
        }
    }
}

fn move_along(x: &[f64], e: &[f64], chord: Chord, rng: &mut RandomSource) -> Vec<f64> {
    // t = t_min + u (t_max - t_min), u in [0, 1); exactly zero on a
    // degenerate chord, so the hold step reproduces x bit for bit.
    let u = rng.uniform();
    let t = chord.t_min() + u * chord.width();
    x.iter().zip(e).map(|(xi, ei)| xi + t * ei).collect()
}

/// One step of the fixed-basis kernel: uniform move index, then uniform
/// resampling on the chord through `x` along that move.
pub fn step_fixed_basis(
    body: &dyn Body,
    x: &[f64],
    rng: &mut RandomSource,
) -> Result<Vec<f64>, SamplerError> {
    let basis = body.metadata().basis().ok_or(SamplerError::MissingBasis)?;
    let i = rng.index(basis.len());
    let e = &basis[i];
    let chord = body.chord(x, e)?;
    Ok(move_along(x, e, chord, rng))
}

/// One step of the random-direction kernel: uniform sphere direction, then
/// uniform resampling on the chord.
pub fn step_random_direction(
    body: &dyn Body,
    x: &[f64],
    rng: &mut RandomSource,
) -> Result<Vec<f64>, SamplerError> {
    let e = sample_direction(body.dim(), rng);
    let chord = body.chord(x, &e)?;
    Ok(move_along(x, &e, chord, rng))
}

/// Lazily yields the thinned chain as `Result` items; burn-in runs in the
/// constructor.
pub struct Chain<'a> {
    body: &'a dyn Body,
    algorithm: Algorithm,
    thin: u64,
    remaining: u64,
    x: Vec<f64>,
    rng: RandomSource,
    failed: bool,
}

impl<'a> Chain<'a> {
    pub fn new(body: &'a dyn Body, config: &ChainConfig) -> Result<Self, SamplerError> {
        config.validate(body)?;
        let x = match &config.start {
            Some(x) => x.clone(),
            None => body.metadata().x_star().to_vec(),
        };
        if !body.contains(&x)? {
            return Err(SamplerError::StartOutsideBody);
        }
        let mut chain = Chain {
            body,
            algorithm: config.algorithm,
            thin: config.thin,
            remaining: config.steps / config.thin,
            x,
            rng: RandomSource::from_seed(config.seed),
            failed: false,
        };
        for _ in 0..config.burn_in {
            chain.advance()?;
        }
        Ok(chain)
    }

    fn advance(&mut self) -> Result<(), SamplerError> {
        self.x = match self.algorithm {
            Algorithm::FixedBasis => step_fixed_basis(self.body, &self.x, &mut self.rng)?,
            Algorithm::RandomDirection => step_random_direction(self.body, &self.x, &mut self.rng)?,
        };
        Ok(())
    }

    /// Current position (after burn-in and any emitted points).
    pub fn position(&self) -> &[f64] {
        &self.x
    }
}

impl Iterator for Chain<'_> {
    type Item = Result<Vec<f64>, SamplerError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.remaining == 0 {
            return None;
        }
        for _ in 0..self.thin {
            if let Err(e) = self.advance() {
                self.failed = true;
                return Some(Err(e));
            }
        }
        self.remaining -= 1;
        Some(Ok(self.x.clone()))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.remaining as usize;
        (if self.failed { 0 } else { n }, Some(n))
    }
}

/// Runs a chain to completion and collects the emitted points.
pub fn run_chain(body: &dyn Body, config: &ChainConfig) -> Result<Vec<Vec<f64>>, SamplerError> {
    Chain::new(body, config)?.collect()
}
