//! Doeblin minorization constants and the total-variation decay envelope.
//!
//! A kernel satisfying `Q^M(x, .) >= theta nu(.)` for all `x` converges to
//! its unique invariant measure at rate `alpha = (1 - theta)^{1/M}` with
//! prefactor `C = 2/(1 - theta)` in total variation. The fixed-basis chain
//! on a `k`-accessible body with moves `e_1..e_l` and radius ratio
//! `mu = r/R` has `M = k + d` and `theta = b_d l^{-(k+d)} mu^{k+d}`; the
//! random-direction chain has `M = 1` and
//! `theta = (2/d) [(1/mu + 1)^{d-1} (1/mu)]^{-1}`.
//!
//! The `2/d` prefactor is the published constant; its own derivation via
//! `b_d / c_d` with `c_d = d b_d` yields `1/d`, so both are exposed as
//! variants and the halved one is the default (a minorization constant may
//! be understated, never overstated).
//!
//! All evaluation runs in log space: `theta` underflows `f64` long before
//! the formulas stop being meaningful (e.g. the Birkhoff polytope at
//! `N = 6` has `theta ~ 1e-548`), so [`RateBound`] carries `log_theta`
//! alongside the possibly-flushed-to-zero `theta`.

use crate::geometry::BodyMetadata;
use crate::sampler::Algorithm;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("invalid bound input: {0}")]
    InvalidInput(String),
    #[error("minorization constant is not contracting (theta = {theta:.3e} >= 1)")]
    NotContracting { theta: f64 },
    #[error("body has no catalogued accessibility constant; only the random-direction bound applies")]
    MissingAccessibility,
    #[error("body has no catalogued move set; only the random-direction bound applies")]
    MissingBasis,
    #[error("random-direction bound requires d >= 2, got {0}")]
    DimensionTooSmall(usize),
}

/// Which prefactor the random-direction bound uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundVariant {
    /// The published `2/d` prefactor.
    AsStated,
    /// The rederived `1/d` prefactor (half of `AsStated`), the default.
    #[default]
    Conservative,
}

impl std::str::FromStr for BoundVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "as_stated" => Ok(BoundVariant::AsStated),
            "conservative" => Ok(BoundVariant::Conservative),
            other => Err(format!("unknown variant {other:?}; expected as_stated or conservative")),
        }
    }
}

/// Doeblin constants `(M, theta)` and the derived decay rate
/// `alpha = (1 - theta)^{1/M}` and prefactor `C = 2/(1 - theta)`.
///
/// `log_theta` is the natural logarithm of `theta`, exact even when
/// `theta` itself underflows to zero; `alpha` then rounds to exactly 1.0.
#[derive(Debug, Clone)]
pub struct RateBound {
    pub m: u64,
    pub theta: f64,
    pub log_theta: f64,
    pub alpha: f64,
    pub c: f64,
    pub variant: BoundVariant,
}

impl RateBound {
    /// `theta` is the directly-evaluated constant (zero if it underflows);
    /// `log_theta` the exact log-space value.
    fn from_parts(
        m: u64,
        theta: f64,
        log_theta: f64,
        variant: BoundVariant,
    ) -> Result<Self, BoundsError> {
        if m == 0 {
            return Err(BoundsError::InvalidInput("M must be >= 1".into()));
        }
        if !log_theta.is_finite() || log_theta >= 0.0 || theta >= 1.0 {
            return Err(BoundsError::NotContracting {
                theta: if theta > 0.0 { theta } else { log_theta.exp() },
            });
        }
        let alpha = if m == 1 {
            1.0 - theta
        } else {
            (1.0 - theta).powf(1.0 / m as f64)
        };
        let c = 2.0 / (1.0 - theta);
        Ok(RateBound {
            m,
            theta,
            log_theta,
            alpha,
            c,
            variant,
        })
    }

    /// `ln alpha`, computed as `ln(1 - theta)/M` without forming `alpha`.
    pub fn ln_alpha(&self) -> f64 {
        (-self.theta).ln_1p() / self.m as f64
    }
}

/// Volume of the unit ball in `R^d`: `b_d = pi^{d/2} / Gamma(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    ln_unit_ball_volume(d).exp()
}

fn ln_unit_ball_volume(d: usize) -> f64 {
    assert!(d >= 1);
    let half = d as f64 / 2.0;
    half * std::f64::consts::PI.ln() - ln_gamma(half + 1.0)
}

/// Surface of the unit sphere `S^{d-1}` in `R^d`:
/// `c_d = 2 pi^{d/2} / Gamma(d/2)`; satisfies `c_d = d b_d`.
pub fn sphere_surface(d: usize) -> f64 {
    assert!(d >= 2);
    let half = d as f64 / 2.0;
    (std::f64::consts::LN_2 + half * std::f64::consts::PI.ln() - ln_gamma(half)).exp()
}

/// Fixed-basis bound: `M = k + d`, `theta = b_d l^{-(k+d)} mu^{k+d}`.
pub fn bound_fixed_basis(d: usize, k: u64, l: usize, mu: f64) -> Result<RateBound, BoundsError> {
    if d == 0 || k == 0 {
        return Err(BoundsError::InvalidInput(format!(
            "d and k must be positive, got d={d}, k={k}"
        )));
    }
    if l < d {
        return Err(BoundsError::InvalidInput(format!(
            "the move set must span: l >= d, got l={l}, d={d}"
        )));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(BoundsError::InvalidInput(format!("mu must lie in (0, 1], got {mu}")));
    }
    let exponent = (k as f64) + (d as f64);
    let log_theta = ln_unit_ball_volume(d) - exponent * (l as f64).ln() + exponent * mu.ln();
    // Direct product where it is representable: one powi keeps the value
    // within a few ulps, where a long exp/ln chain would not.
    let theta = if log_theta <= -700.0 {
        0.0
    } else if k + d as u64 <= i32::MAX as u64 {
        unit_ball_volume(d) * (mu / l as f64).powi((k + d as u64) as i32)
    } else {
        log_theta.exp()
    };
    RateBound::from_parts(k + d as u64, theta, log_theta, BoundVariant::AsStated)
}

/// Raw random-direction minorization exponent
/// `ln(pref) - [(d-1) ln(1/mu + 1) + ln(1/mu)]` with `pref = 2/d` or `1/d`.
///
/// No domain checks beyond positivity: this is the bare published formula,
/// which leaves `(0, 1)` at `d = 1` (e.g. `theta = 2` for the unit
/// interval). [`bound_random_direction`] validates on top of it.
pub fn random_direction_log_theta(d: usize, mu: f64, variant: BoundVariant) -> f64 {
    assert!(d >= 1 && mu > 0.0);
    let pref = match variant {
        BoundVariant::AsStated => 2.0 / d as f64,
        BoundVariant::Conservative => 1.0 / d as f64,
    };
    let inv_mu = 1.0 / mu;
    pref.ln() - ((d as f64 - 1.0) * (inv_mu + 1.0).ln() + inv_mu.ln())
}

/// Raw `theta = pref * [(1/mu + 1)^{d-1} (1/mu)]^{-1}`, evaluated as a
/// direct product when representable (log-space fallback otherwise).
/// Like [`random_direction_log_theta`], unvalidated.
pub fn random_direction_theta(d: usize, mu: f64, variant: BoundVariant) -> f64 {
    assert!(d >= 1 && mu > 0.0);
    let pref = match variant {
        BoundVariant::AsStated => 2.0 / d as f64,
        BoundVariant::Conservative => 1.0 / d as f64,
    };
    let inv_mu = 1.0 / mu;
    if d - 1 <= i32::MAX as usize {
        let denom = (inv_mu + 1.0).powi((d - 1) as i32) * inv_mu;
        if denom.is_finite() {
            return pref / denom;
        }
    }
    random_direction_log_theta(d, mu, variant).exp()
}

/// Random-direction bound: `M = 1`,
/// `theta = pref * [(1/mu + 1)^{d-1} (1/mu)]^{-1}`.
pub fn bound_random_direction(
    d: usize,
    mu: f64,
    variant: BoundVariant,
) -> Result<RateBound, BoundsError> {
    if d < 2 {
        return Err(BoundsError::DimensionTooSmall(d));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(BoundsError::InvalidInput(format!("mu must lie in (0, 1], got {mu}")));
    }
    RateBound::from_parts(
        1,
        random_direction_theta(d, mu, variant),
        random_direction_log_theta(d, mu, variant),
        variant,
    )
}

/// Bound for a catalogued body: dispatches on the algorithm using the
/// body's metadata (`d`, `r/R`, and for the fixed-basis chain `k` and `l`).
pub fn body_bound(
    meta: &BodyMetadata,
    algorithm: Algorithm,
    variant: BoundVariant,
) -> Result<RateBound, BoundsError> {
    let mu = meta.radius_ratio();
    match algorithm {
        Algorithm::FixedBasis => {
            let k = meta.accessibility().ok_or(BoundsError::MissingAccessibility)?;
            let l = meta.moves().ok_or(BoundsError::MissingBasis)?;
            bound_fixed_basis(meta.dim(), k, l, mu)
        }
        Algorithm::RandomDirection => bound_random_direction(meta.dim(), mu, variant),
    }
}

/// Certified envelope `min(C alpha^n, 2)`: the TV distance of two
/// probability measures never exceeds 2.
pub fn tv_envelope(bound: &RateBound, n: u64) -> f64 {
    let ln_value = bound.c.ln() + n as f64 * bound.ln_alpha();
    ln_value.exp().min(2.0)
}

/// `log10` of the number of steps needed for `tv_envelope <= eps`;
/// stays finite (as a logarithm) even when the step count itself
/// overflows every integer type.
pub fn log10_steps_for_tv(bound: &RateBound, eps: f64) -> Result<f64, BoundsError> {
    if !(eps > 0.0) {
        return Err(BoundsError::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let ln_ratio = bound.c.ln() - eps.ln();
    if ln_ratio <= 0.0 {
        return Ok(0.0);
    }
    // -ln(alpha) = -ln(1 - theta)/M ~ theta/M once theta is tiny.
    let ln_decay = if bound.theta > 1e-12 {
        (-bound.ln_alpha()).ln()
    } else {
        bound.log_theta - (bound.m as f64).ln()
    };
    Ok(((ln_ratio.ln() - ln_decay) / std::f64::consts::LN_10).max(0.0))
}

/// Exact minimal step count when it fits comfortably in integer range.
pub fn steps_for_tv(bound: &RateBound, eps: f64) -> Result<Option<u64>, BoundsError> {
    let log10_n = log10_steps_for_tv(bound, eps)?;
    if log10_n > 18.0 {
        return Ok(None);
    }
    let ln_ratio = (bound.c.ln() - eps.ln()).max(0.0);
    let decay = -bound.ln_alpha();
    if decay == 0.0 {
        return Ok(None);
    }
    let mut n = (ln_ratio / decay).ceil() as u64;
    while tv_envelope(bound, n) > eps {
        n += 1;
    }
    Ok(Some(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_body, BodyDescriptor};

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(a.abs())
    }

    #[test]
    fn unit_ball_volumes() {
        assert!(rel_close(unit_ball_volume(1), 2.0, 1e-14));
        assert!(rel_close(unit_ball_volume(2), std::f64::consts::PI, 1e-14));
        assert!(rel_close(unit_ball_volume(3), 4.0 * std::f64::consts::PI / 3.0, 1e-14));
    }

    #[test]
    fn sphere_surfaces_and_the_ratio_identity() {
        assert!(rel_close(sphere_surface(2), 2.0 * std::f64::consts::PI, 1e-14));
        assert!(rel_close(sphere_surface(3), 4.0 * std::f64::consts::PI, 1e-14));
        for d in 2..=50 {
            assert!(
                rel_close(sphere_surface(d), d as f64 * unit_ball_volume(d), 1e-12),
                "c_d = d b_d fails at d={d}"
            );
        }
    }

    #[test]
    fn fixed_basis_ball_value() {
        // Ball: d = k = l, mu = 1 -> M = 2d, theta = b_d d^{-2d}.
        let bound = bound_fixed_basis(3, 3, 3, 1.0).unwrap();
        assert_eq!(bound.m, 6);
        let want = (4.0 * std::f64::consts::PI / 3.0) / 729.0;
        assert!(rel_close(bound.theta, want, 1e-14), "{} vs {want}", bound.theta);
        assert!((bound.theta - 5.745e-3).abs() < 1e-5);
        assert!(rel_close(bound.alpha, (1.0 - want).powf(1.0 / 6.0), 1e-14));
        assert!(rel_close(bound.c, 2.0 / (1.0 - want), 1e-14));
    }

    #[test]
    fn fixed_basis_rejects_non_contracting_edge() {
        // d = 1, l = 1, mu = 1 gives theta = b_1 = 2 >= 1.
        assert!(matches!(
            bound_fixed_basis(1, 1, 1, 1.0),
            Err(BoundsError::NotContracting { .. })
        ));
    }

    #[test]
    fn random_direction_disc_is_one_half() {
        let bound = bound_random_direction(2, 1.0, BoundVariant::AsStated).unwrap();
        assert_eq!(bound.m, 1);
        assert!(rel_close(bound.theta, 0.5, 1e-14));
        assert!(rel_close(bound.alpha, 0.5, 1e-14));
        assert!(rel_close(bound.c, 4.0, 1e-14));
    }

    #[test]
    fn conservative_variant_is_exactly_half() {
        for (d, mu) in [(2, 1.0), (5, 0.3), (9, 0.5), (24, 0.2)] {
            let stated = bound_random_direction(d, mu, BoundVariant::AsStated).unwrap();
            let cons = bound_random_direction(d, mu, BoundVariant::Conservative).unwrap();
            assert!(rel_close(cons.theta, 0.5 * stated.theta, 1e-14));
        }
    }

    #[test]
    fn body_dispatch_matches_catalogue_formulas() {
        // Simplex: d = k = l = N - 1, mu = 1/d -> theta = b_d d^{-4d}.
        let simplex = make_body(&BodyDescriptor::Simplex { n: 3 }).unwrap();
        let bound = body_bound(simplex.metadata(), Algorithm::FixedBasis, BoundVariant::default())
            .unwrap();
        assert_eq!(bound.m, 4);
        let want = std::f64::consts::PI / 256.0; // b_2 * 2^-8
        assert!(rel_close(bound.theta, want, 1e-13), "{} vs {want}", bound.theta);

        // PPT has no accessibility constant.
        let ppt = make_body(&BodyDescriptor::Ppt { k: 2 }).unwrap();
        assert!(matches!(
            body_bound(ppt.metadata(), Algorithm::FixedBasis, BoundVariant::default()),
            Err(BoundsError::MissingAccessibility)
        ));

        // Density, random direction: alpha = 1 - (2/d) [N^{d-1} (N-1)]^{-1}.
        let density = make_body(&BodyDescriptor::Density { n: 3 }).unwrap();
        let bound = body_bound(
            density.metadata(),
            Algorithm::RandomDirection,
            BoundVariant::AsStated,
        )
        .unwrap();
        let d = 8.0f64;
        let want_alpha = 1.0 - (2.0 / d) / (3.0f64.powf(d - 1.0) * 2.0);
        assert!(rel_close(bound.alpha, want_alpha, 1e-14));
    }

    #[test]
    fn birkhoff_fixed_basis_uses_exact_move_count() {
        let birkhoff = make_body(&BodyDescriptor::Birkhoff { n: 3 }).unwrap();
        let bound = body_bound(birkhoff.metadata(), Algorithm::FixedBasis, BoundVariant::default())
            .unwrap();
        assert_eq!(bound.m, 12);
        // theta = b_4 36^-12 2^-12 evaluated in logs.
        let want_log = unit_ball_volume(4).ln() - 12.0 * 36.0f64.ln() - 12.0 * 2.0f64.ln();
        assert!((bound.log_theta - want_log).abs() < 1e-12);
    }

    #[test]
    fn log_theta_survives_underflow() {
        // Birkhoff N = 6: d = 25, k = 125, l = 900, mu = 1/5.
        let bound = bound_fixed_basis(25, 125, 900, 0.2).unwrap();
        assert_eq!(bound.theta, 0.0);
        assert!(bound.log_theta.is_finite() && bound.log_theta < -1000.0);
        assert_eq!(bound.alpha, 1.0);
        let log10_n = log10_steps_for_tv(&bound, 1e-2).unwrap();
        assert!(log10_n > 400.0, "{log10_n}");
    }

    #[test]
    fn tv_envelope_clamps_and_decays() {
        let bound = bound_random_direction(2, 1.0, BoundVariant::AsStated).unwrap();
        assert_eq!(tv_envelope(&bound, 0), 2.0);
        // C alpha^10 = 4 * 2^-10 = 2^-8.
        assert!(rel_close(tv_envelope(&bound, 10), 2.0f64.powi(-8), 1e-12));
        let mut prev = f64::INFINITY;
        for n in 0..200 {
            let v = tv_envelope(&bound, n);
            assert!(v <= prev && v <= 2.0);
            prev = v;
        }
    }

    #[test]
    fn steps_for_tv_matches_envelope() {
        let bound = bound_random_direction(2, 1.0, BoundVariant::AsStated).unwrap();
        let n = steps_for_tv(&bound, 1e-6).unwrap().unwrap();
        assert!(tv_envelope(&bound, n) <= 1e-6);
        assert!(tv_envelope(&bound, n - 1) > 1e-6);
    }
}
