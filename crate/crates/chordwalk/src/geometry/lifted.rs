//! Lifted bodies: the region under the graph of a density.
//!
//! For a density `f` on a body `K`, uniform samples on
//! `{(x, y) : x in K, 0 < y <= f(x)}` project to `f`-distributed samples on
//! `K`; `f` only needs to be known up to a constant multiple. The lifted
//! region is convex only for concave `f`, and its chords are intervals only
//! for quasi-concave `f`; the chord oracle assumes the latter.

use super::{
    check_chord_inputs, chord_bisect, Body, BodyDescriptor, BodyMetadata, Chord, GeometryError,
    LiftedPreset, BISECT_TOL, LINEAR_SLACK,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Density = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `(d+1)`-dimensional body `{(x, y) : x in inner, 0 < y <= f(x)}`.
pub struct LiftedBody {
    inner: Box<dyn Body>,
    f: Density,
    f_max: f64,
    meta: BodyMetadata,
    descriptor: BodyDescriptor,
    ambient_len: usize,
}

/// Lifts `inner` under the density `f` bounded by `f_max`.
///
/// The reference point is `(x*, m/2)` where `m` estimates the minimum of
/// `f` over the ball of radius `r/2` about `x*` from a fixed deterministic
/// probe set; the inscribed radius `min(r, m)/4` is then valid whenever the
/// probe minimum is within 25% of the true one. `f` must be positive at
/// `x*` and quasi-concave for the chord oracle to be exact.
pub fn lift_density(
    inner: Box<dyn Body>,
    f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    f_max: f64,
) -> Result<LiftedBody, GeometryError> {
    let label = format!("lifted({})", inner.descriptor());
    lift_named(inner, Box::new(f), f_max, BodyDescriptor::Custom { label })
}

fn lift_named(
    inner: Box<dyn Body>,
    f: Density,
    f_max: f64,
    descriptor: BodyDescriptor,
) -> Result<LiftedBody, GeometryError> {
    if !(f_max > 0.0) {
        return Err(GeometryError::InvalidParameter(format!(
            "f_max must be positive, got {f_max}"
        )));
    }
    let x_star = inner.metadata().x_star().to_vec();
    let at_ref = f(&x_star);
    if !(at_ref > 0.0) {
        return Err(GeometryError::NonPositiveDensity(at_ref));
    }
    let d = inner.dim();
    let probe_radius = 0.4995 * inner.metadata().inner_radius();
    let mut low = at_ref;
    let mut probe = |point: &[f64]| {
        let v = f(point);
        if v < low {
            low = v;
        }
    };
    // Axis-aligned probes plus a fixed pseudo-random sphere sweep.
    let mut point = x_star.clone();
    for i in 0..d {
        for sign in [-1.0, 1.0] {
            point.copy_from_slice(&x_star);
            point[i] += sign * probe_radius;
            probe(&point);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x11F7ED);
    for _ in 0..256 {
        let mut dir: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = super::norm(&dir);
        if n == 0.0 {
            continue;
        }
        dir.iter_mut().for_each(|v| *v *= probe_radius / n);
        for (p, (xs, dv)) in point.iter_mut().zip(x_star.iter().zip(&dir)) {
            *p = xs + dv;
        }
        probe(&point);
    }
    if !(low > 0.0) {
        return Err(GeometryError::NonPositiveDensity(low));
    }
    let y_star = 0.5 * low;
    let r = 0.25 * inner.metadata().inner_radius().min(low);
    let vertical = y_star.max(f_max - y_star);
    let big_r = (inner.metadata().outer_radius().powi(2) + vertical * vertical).sqrt();
    let mut x_star_lifted = x_star;
    x_star_lifted.push(y_star);
    let ambient_len = inner.ambient(inner.metadata().x_star())?.len() + 1;
    let meta = BodyMetadata::new(d + 1, x_star_lifted, r, big_r, None, None)?;
    Ok(LiftedBody {
        inner,
        f,
        f_max,
        meta,
        descriptor,
        ambient_len,
    })
}

impl std::fmt::Debug for LiftedBody {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LiftedBody")
            .field("descriptor", &self.descriptor.to_string())
            .field("f_max", &self.f_max)
            .finish_non_exhaustive()
    }
}

impl LiftedBody {
    pub fn inner(&self) -> &dyn Body {
        self.inner.as_ref()
    }

    pub fn density_at(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn f_max(&self) -> f64 {
        self.f_max
    }
}

impl Body for LiftedBody {
    fn metadata(&self) -> &BodyMetadata {
        &self.meta
    }

    fn descriptor(&self) -> BodyDescriptor {
        self.descriptor.clone()
    }

    fn contains(&self, x: &[f64]) -> Result<bool, GeometryError> {
        self.expect_dim(x)?;
        let (base, y) = x.split_at(self.inner.dim());
        let y = y[0];
        if !(y > 0.0) || y > self.f_max * (1.0 + LINEAR_SLACK) {
            return Ok(false);
        }
        if !self.inner.contains(base)? {
            return Ok(false);
        }
        Ok(y <= (self.f)(base) + LINEAR_SLACK * self.f_max.max(1.0))
    }

    fn chord(&self, x: &[f64], e: &[f64]) -> Result<Chord, GeometryError> {
        check_chord_inputs(self, x, e)?;
        let membership = |p: &[f64]| self.contains(p).unwrap_or(false);
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
        let (base, y) = x.split_at(self.inner.dim());
        let mut out = self.inner.ambient(base)?;
        out.push(y[0]);
        Ok(out)
    }

    fn from_ambient(&self, p: &[f64]) -> Result<Vec<f64>, GeometryError> {
        if p.len() != self.ambient_len {
            return Err(GeometryError::DimensionMismatch {
                expected: self.ambient_len,
                got: p.len(),
            });
        }
        let (base, y) = p.split_at(self.ambient_len - 1);
        let mut out = self.inner.from_ambient(base)?;
        out.push(y[0]);
        Ok(out)
    }
}

pub(super) fn make_preset(preset: LiftedPreset) -> Result<Box<dyn Body>, GeometryError> {
    let descriptor = BodyDescriptor::Lifted { preset };
    let body = match preset {
        LiftedPreset::Const => lift_named(
            Box::new(super::Polytope::cube(1)?),
            Box::new(|_: &[f64]| 1.0),
            1.0,
            descriptor,
        )?,
        LiftedPreset::Triangular => lift_named(
            Box::new(super::Ball::new(1)?),
            Box::new(|x: &[f64]| 1.0 - x[0].abs()),
            1.0,
            descriptor,
        )?,
        LiftedPreset::Cone { d } => {
            if d == 0 {
                return Err(GeometryError::InvalidParameter("cone requires d >= 1".into()));
            }
            lift_named(
                Box::new(super::Ball::new(d)?),
                Box::new(|x: &[f64]| 1.0 - super::norm(x)),
                1.0,
                descriptor,
            )?
        }
    };
    Ok(Box::new(body))
}
