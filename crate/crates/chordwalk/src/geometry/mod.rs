//! Convex-body contract and the body catalogue.
//!
//! Every body is presented in an intrinsic chart of `R^d` that is an
//! isometry onto the body's affine hull, so Euclidean geometry in chart
//! coordinates (chord lengths, inscribed radius `r`, outscribed radius `R`)
//! agrees with the natural ambient metric of the body. Polytope bodies
//! compute chords in closed form from their half-space description; spectral
//! bodies (density matrices, PPT states) fall back to bisection on the
//! membership predicate.

mod bodies;
mod charts;
mod lifted;
mod spectral;

pub use bodies::{Ball, Polytope};
pub use lifted::{lift_density, LiftedBody};
pub use spectral::{DensityBody, PptBody};

use crate::quantum::QuantumError;
use thiserror::Error;

/// Slack accepted on polytope constraints `a.x <= c` during membership.
pub const LINEAR_SLACK: f64 = 1e-12;
/// Eigenvalue slack for spectral bodies, relative to the matrix norm.
pub const SPECTRAL_SLACK: f64 = 1e-11;
/// Absolute tolerance of bisection chord endpoints.
pub const BISECT_TOL: f64 = 1e-10;
/// Iteration cap per bisected endpoint.
pub const BISECT_MAX_ITERS: usize = 200;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point lies outside the body")]
    OutsideBody,
    #[error("direction must have unit norm, got {0}")]
    NotUnitDirection(f64),
    #[error("direction is zero")]
    ZeroDirection,
    #[error("bisection bracket exceeded cap {cap:.3e}; membership set unbounded or inconsistent")]
    BracketExceeded { cap: f64 },
    #[error("invalid body descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("density must be positive at the reference point, got {0}")]
    NonPositiveDensity(f64),
    #[error("invalid body metadata: {0}")]
    InvalidMetadata(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// Parameter interval of a chord: `x + t e` lies in the body exactly for
/// `t` in `[t_min, t_max]`, and the current point `x` sits at `t = 0`.
///
/// A degenerate chord (`t_min = t_max = 0`) is a legal value, produced e.g.
/// at a polytope corner whose tangent cone contains no basis direction; the
/// samplers treat it as a hold step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chord {
    t_min: f64,
    t_max: f64,
}

impl Chord {
    /// Clamps so that `t_min <= 0 <= t_max` holds even under floating-point
    /// noise at the boundary.
    pub fn new(t_min: f64, t_max: f64) -> Self {
        Chord {
            t_min: t_min.min(0.0),
            t_max: t_max.max(0.0),
        }
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn width(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn is_degenerate(&self) -> bool {
        self.t_max == self.t_min
    }
}

/// Geometric constants of a body: intrinsic dimension, interior reference
/// point `x*`, inscribed/outscribed radii about `x*`, the accessibility
/// constant `k` (when known) and the finite move set for the fixed-basis
/// chain (when one is catalogued).
#[derive(Debug, Clone)]
pub struct BodyMetadata {
    dim: usize,
    x_star: Vec<f64>,
    inner_radius: f64,
    outer_radius: f64,
    accessibility: Option<u64>,
    basis: Option<Vec<Vec<f64>>>,
}

impl BodyMetadata {
    pub fn new(
        dim: usize,
        x_star: Vec<f64>,
        inner_radius: f64,
        outer_radius: f64,
        accessibility: Option<u64>,
        basis: Option<Vec<Vec<f64>>>,
    ) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::InvalidMetadata("dimension must be positive".into()));
        }
        if x_star.len() != dim {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                got: x_star.len(),
            });
        }
        if !(inner_radius > 0.0) || !(outer_radius >= inner_radius) {
            return Err(GeometryError::InvalidMetadata(format!(
                "radii must satisfy 0 < r <= R, got r={inner_radius}, R={outer_radius}"
            )));
        }
        if let Some(b) = &basis {
            if b.len() < dim {
                return Err(GeometryError::InvalidMetadata(format!(
                    "basis has {} moves, fewer than the dimension {dim}",
                    b.len()
                )));
            }
            for v in b {
                if v.len() != dim {
                    return Err(GeometryError::DimensionMismatch {
                        expected: dim,
                        got: v.len(),
                    });
                }
                let norm = norm(v);
                if (norm - 1.0).abs() > 1e-9 {
                    return Err(GeometryError::InvalidMetadata(format!(
                        "basis vectors must be unit, got norm {norm}"
                    )));
                }
            }
            if rank(b) < dim {
                return Err(GeometryError::InvalidMetadata(
                    "basis does not span the full space".into(),
                ));
            }
        }
        Ok(BodyMetadata {
            dim,
            x_star,
            inner_radius,
            outer_radius,
            accessibility,
            basis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x_star(&self) -> &[f64] {
        &self.x_star
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    /// `mu = r/R`, the ratio driving every convergence bound.
    pub fn radius_ratio(&self) -> f64 {
        self.inner_radius / self.outer_radius
    }

    pub fn accessibility(&self) -> Option<u64> {
        self.accessibility
    }

    pub fn basis(&self) -> Option<&[Vec<f64>]> {
        self.basis.as_deref()
    }

    /// Number of fixed-basis moves `l`.
    pub fn moves(&self) -> Option<usize> {
        self.basis.as_ref().map(|b| b.len())
    }
}

/// Named lifted-body presets reachable from the descriptor grammar.
///
/// Arbitrary densities are available programmatically through
/// [`lift_density`]; the text grammar only carries this fixed catalogue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftedPreset {
    /// `f == 1` on the unit cube of dimension 1 (sanity preset).
    Const,
    /// `f(x) = 1 - |x|` on `[-1, 1]`.
    Triangular,
    /// `f(x) = 1 - |x|_2` on the unit ball of dimension `d`.
    Cone { d: usize },
}

/// Text-addressable description of a catalogued body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BodyDescriptor {
    Ball { d: usize },
    Cube { d: usize },
    Simplex { n: usize },
    Stochastic { n: usize },
    Birkhoff { n: usize },
    Density { n: usize },
    Ppt { k: usize },
    Lifted { preset: LiftedPreset },
    /// Programmatically-built body with no grammar entry.
    Custom { label: String },
}

impl std::fmt::Display for BodyDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BodyDescriptor::Ball { d } => write!(f, "ball:d={d}"),
            BodyDescriptor::Cube { d } => write!(f, "box:d={d}"),
            BodyDescriptor::Simplex { n } => write!(f, "simplex:n={n}"),
            BodyDescriptor::Stochastic { n } => write!(f, "stochastic:n={n}"),
            BodyDescriptor::Birkhoff { n } => write!(f, "birkhoff:n={n}"),
            BodyDescriptor::Density { n } => write!(f, "density:n={n}"),
            BodyDescriptor::Ppt { k } => write!(f, "ppt:k={k}"),
            BodyDescriptor::Lifted { preset } => match preset {
                LiftedPreset::Const => write!(f, "lifted:f=const"),
                LiftedPreset::Triangular => write!(f, "lifted:f=triangular"),
                LiftedPreset::Cone { d } => write!(f, "lifted:f=cone,d={d}"),
            },
            BodyDescriptor::Custom { label } => write!(f, "custom:{label}"),
        }
    }
}

impl std::str::FromStr for BodyDescriptor {
    type Err = GeometryError;

    /// Grammar (v1): `ball:d=3`, `box:d=8`, `simplex:n=5`, `stochastic:n=4`,
    /// `birkhoff:n=3`, `density:n=3`, `ppt:k=2`, `lifted:f=<const|triangular|cone>[,d=<d>]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| GeometryError::InvalidDescriptor(format!("{msg} in {s:?}"));
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| bad("missing ':' separator"))?;
        let mut params = std::collections::BTreeMap::new();
        for pair in rest.split(',') {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| bad("parameters must be key=value"))?;
            params.insert(key.trim().to_string(), value.trim().to_string());
        }
        let int = |params: &std::collections::BTreeMap<String, String>, key: &str| {
            params
                .get(key)
                .ok_or_else(|| bad(&format!("missing parameter {key}")))?
                .parse::<usize>()
                .map_err(|_| bad(&format!("parameter {key} must be a positive integer")))
        };
        match kind.trim() {
            "ball" => Ok(BodyDescriptor::Ball { d: int(&params, "d")? }),
            "box" => Ok(BodyDescriptor::Cube { d: int(&params, "d")? }),
            "simplex" => Ok(BodyDescriptor::Simplex { n: int(&params, "n")? }),
            "stochastic" => Ok(BodyDescriptor::Stochastic { n: int(&params, "n")? }),
            "birkhoff" => Ok(BodyDescriptor::Birkhoff { n: int(&params, "n")? }),
            "density" => Ok(BodyDescriptor::Density { n: int(&params, "n")? }),
            "ppt" => Ok(BodyDescriptor::Ppt { k: int(&params, "k")? }),
            "lifted" => {
                let preset = match params.get("f").map(String::as_str) {
                    Some("const") => LiftedPreset::Const,
                    Some("triangular") => LiftedPreset::Triangular,
                    Some("cone") => LiftedPreset::Cone { d: int(&params, "d")? },
                    _ => return Err(bad("lifted requires f=const|triangular|cone")),
                };
                Ok(BodyDescriptor::Lifted { preset })
            }
            other => Err(bad(&format!("unknown body kind {other:?}"))),
        }
    }
}

/// Behavioral contract of a convex body in its intrinsic chart.
///
/// Bodies are immutable after construction and safe to share across
/// concurrently running chains.
pub trait Body: Send + Sync {
    fn metadata(&self) -> &BodyMetadata;

    fn descriptor(&self) -> BodyDescriptor;

    /// Closed membership up to the documented tolerances.
    fn contains(&self, x: &[f64]) -> Result<bool, GeometryError>;

    /// Maximal interval `[t_min, t_max]` with `x + t e` inside the body.
    /// Requires `contains(x)` and a unit direction; degenerate chords are
    /// returned, not errors.
    fn chord(&self, x: &[f64], e: &[f64]) -> Result<Chord, GeometryError>;

    /// Natural (ambient) coordinates of a chart point: simplex probabilities,
    /// row-major matrix entries for stochastic/Birkhoff bodies, row-major
    /// `re, im` pairs for spectral bodies. Identity for ball and cube.
    fn ambient(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        self.expect_dim(x)?;
        Ok(x.to_vec())
    }

    /// Inverse of [`Body::ambient`].
    fn from_ambient(&self, p: &[f64]) -> Result<Vec<f64>, GeometryError> {
        self.expect_dim(p)?;
        Ok(p.to_vec())
    }

    fn dim(&self) -> usize {
        self.metadata().dim()
    }

    fn expect_dim(&self, x: &[f64]) -> Result<(), GeometryError> {
        if x.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rank of a set of row vectors by Gaussian elimination with partial pivoting.
fn rank(rows: &[Vec<f64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..m.len()).max_by(|&a, &b| {
            m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap()
        }) else {
            break;
        };
        if m[pivot][col].abs() < 1e-9 {
            continue;
        }
        m.swap(rank, pivot);
        for row in (rank + 1)..m.len() {
            let f = m[row][col] / m[rank][col];
            for c2 in col..ncols {
                m[row][c2] -= f * m[rank][c2];
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Shared precondition checks for chord oracles.
pub(crate) fn check_chord_inputs(
    body: &dyn Body,
    x: &[f64],
    e: &[f64],
) -> Result<(), GeometryError> {
    body.expect_dim(x)?;
    body.expect_dim(e)?;
    let n = norm(e);
    if n == 0.0 {
        return Err(GeometryError::ZeroDirection);
    }
    if (n - 1.0).abs() > 1e-8 {
        return Err(GeometryError::NotUnitDirection(n));
    }
    if !body.contains(x)? {
        return Err(GeometryError::OutsideBody);
    }
    Ok(())
}

/// Chord endpoints of an interval membership set along `x + t e` by
/// bracketing and bisection.
///
/// Each endpoint is bracketed by doubling from `t_hint` until membership
/// fails (capped at `cap`, normally `2R`), then bisected to width `<= tol`;
/// the returned endpoint is the inner end of the final bracket, so
/// membership holds at the returned parameters themselves. `membership(x)`
/// must hold, and the set's intersection with the line must be an interval
/// (true for convex bodies and for lifted bodies of quasi-concave
/// densities).
pub fn chord_bisect(
    membership: &dyn Fn(&[f64]) -> bool,
    x: &[f64],
    e: &[f64],
    t_hint: f64,
    tol: f64,
    cap: f64,
) -> Result<Chord, GeometryError> {
    assert!(t_hint > 0.0 && tol > 0.0 && cap > 0.0, "hint, tol and cap must be positive");
    let mut point = vec![0.0; x.len()];
    let mut inside_at = |t: f64| {
        for ((p, &xi), &ei) in point.iter_mut().zip(x).zip(e) {
            *p = xi + t * ei;
        }
        membership(&point)
    };
    let endpoint = |sign: f64, inside_at: &mut dyn FnMut(f64) -> bool| {
        let mut lo = 0.0f64;
        let mut hi = t_hint.max(4.0 * tol);
        loop {
            if hi >= cap {
                if inside_at(sign * cap) {
                    return Err(GeometryError::BracketExceeded { cap });
                }
                hi = cap;
                break;
            }
            if !inside_at(sign * hi) {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        let mut iters = 0;
        while hi - lo > tol && iters < BISECT_MAX_ITERS {
            let mid = 0.5 * (lo + hi);
            if inside_at(sign * mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            iters += 1;
        }
        Ok(sign * lo)
    };
    let t_max = endpoint(1.0, &mut inside_at)?;
    let t_min = endpoint(-1.0, &mut inside_at)?;
    Ok(Chord::new(t_min, t_max))
}

/// Builds a catalogued body. Metadata follows the body table: radii, the
/// accessibility constant `k` and the fixed move set are set per kind.
pub fn make_body(descriptor: &BodyDescriptor) -> Result<Box<dyn Body>, GeometryError> {
    match descriptor {
        BodyDescriptor::Ball { d } => Ok(Box::new(Ball::new(*d)?)),
        BodyDescriptor::Cube { d } => Ok(Box::new(Polytope::cube(*d)?)),
        BodyDescriptor::Simplex { n } => Ok(Box::new(Polytope::simplex(*n)?)),
        BodyDescriptor::Stochastic { n } => Ok(Box::new(Polytope::stochastic(*n)?)),
        BodyDescriptor::Birkhoff { n } => Ok(Box::new(Polytope::birkhoff(*n)?)),
        BodyDescriptor::Density { n } => Ok(Box::new(DensityBody::new(*n)?)),
        BodyDescriptor::Ppt { k } => Ok(Box::new(PptBody::new(*k)?)),
        BodyDescriptor::Lifted { preset } => lifted::make_preset(*preset),
        BodyDescriptor::Custom { label } => Err(GeometryError::InvalidDescriptor(format!(
            "custom body {label:?} cannot be built from a descriptor"
        ))),
    }
}
