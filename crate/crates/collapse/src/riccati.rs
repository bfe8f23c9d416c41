//! Comparison curves for the divergence of a collapsing flow.
//!
//! Two closed-form families bound the volume-integrated and pointwise
//! divergence from above:
//!
//! * integration kind: solutions of `H' = -H^2/V - F` with constant forcing
//!   `F > 0`, which reach `-inf` in finite time
//!   `T = sqrt(V/F) * (atan(H0/sqrt(V*F)) + pi/2)`, itself always below the
//!   universal cap `sqrt(V/F) * pi`;
//! * pointwise kind: the forcing-free envelope `N*H0 / (N + H0*t)`, singular
//!   at `-N/H0` when `H0 < 0`.
//!
//! [`integrate_comparison`] integrates the same right-hand sides with fixed-
//! step RK4 so the closed forms can be validated (and perturbed) numerically.

use crate::error::{Error, Result};
use crate::numerics;

/// Closed-form evaluators reject times this close to their singularity:
/// tan is already catastrophically ill-conditioned there.
pub const SINGULARITY_MARGIN: f64 = 1e-12;

/// Default threshold at which the numeric integrator declares escape.
pub const DEFAULT_ESCAPE_THRESHOLD: f64 = 1e9;

/// A comparison curve: either the volume-integrated kind with constant
/// forcing, or the pointwise kind in a given dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiccatiBound {
    Integration { h0: f64, volume: f64, forcing: f64 },
    Pointwise { h0: f64, dim: usize },
}

impl RiccatiBound {
    pub fn integration(h0: f64, volume: f64, forcing: f64) -> Result<Self> {
        if !h0.is_finite() {
            return Err(Error::domain("comparison curve", "h0 must be finite"));
        }
        if !volume.is_finite() || volume <= 0.0 {
            return Err(Error::domain(
                "comparison curve",
                format!("volume must be positive, got {volume}"),
            ));
        }
        if !forcing.is_finite() || forcing <= 0.0 {
            return Err(Error::domain(
                "comparison curve",
                format!("forcing must be positive, got {forcing}"),
            ));
        }
        Ok(RiccatiBound::Integration {
            h0,
            volume,
            forcing,
        })
    }

    pub fn pointwise(h0: f64, dim: usize) -> Result<Self> {
        if !h0.is_finite() {
            return Err(Error::domain("comparison curve", "h0 must be finite"));
        }
        if dim == 0 || dim > crate::model::MAX_DIM {
            return Err(Error::InvalidDimension {
                dim,
                max: crate::model::MAX_DIM,
            });
        }
        Ok(RiccatiBound::Pointwise { h0, dim })
    }

    pub fn initial_value(&self) -> f64 {
        match *self {
            RiccatiBound::Integration { h0, .. } => h0,
            RiccatiBound::Pointwise { h0, .. } => h0,
        }
    }

    /// Time at which the curve reaches `-inf`, when it does.
    ///
    /// The integration kind always blows up; the pointwise kind only for
    /// negative initial data.
    pub fn blowup_time(&self) -> Option<f64> {
        match *self {
            RiccatiBound::Integration {
                h0,
                volume,
                forcing,
            } => {
                let scale = (volume * forcing).sqrt();
                let rate = (forcing / volume).sqrt();
                Some(((h0 / scale).atan() + std::f64::consts::FRAC_PI_2) / rate)
            }
            RiccatiBound::Pointwise { h0, dim } => {
                if h0 < 0.0 {
                    Some(-(dim as f64) / h0)
                } else {
                    None
                }
            }
        }
    }

    /// Closed-form value at time `t` in `[0, blowup)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::domain(
                "comparison curve",
                format!("time must be finite and nonnegative, got {t}"),
            ));
        }
        if let Some(blowup) = self.blowup_time() {
            if t > blowup - SINGULARITY_MARGIN {
                return Err(Error::PastSingularity { t, blowup });
            }
        }
        Ok(match *self {
            RiccatiBound::Integration {
                h0,
                volume,
                forcing,
            } => {
                let scale = (volume * forcing).sqrt();
                let rate = (forcing / volume).sqrt();
                let phase = (h0 / scale).atan();
                -scale * (rate * t - phase).tan()
            }
            RiccatiBound::Pointwise { h0, dim } => {
                let n = dim as f64;
                n * h0 / (n + h0 * t)
            }
        })
    }

    /// Right-hand side of the ODE this curve solves, with the default
    /// (constant or zero) forcing.
    fn rhs(&self, h: f64, extra_forcing: Option<f64>) -> f64 {
        match *self {
            RiccatiBound::Integration {
                volume, forcing, ..
            } => {
                let f = extra_forcing.unwrap_or(forcing);
                -h * h / volume - f
            }
            RiccatiBound::Pointwise { dim, .. } => {
                let f = extra_forcing.unwrap_or(0.0);
                -h * h / dim as f64 - f
            }
        }
    }
}

/// Blowup times of the integration kind never reach this cap, whatever the
/// initial divergence: `sqrt(volume/forcing) * pi`.
pub fn universal_cap(volume: f64, forcing: f64) -> Result<f64> {
    if !volume.is_finite() || volume <= 0.0 || !forcing.is_finite() || forcing <= 0.0 {
        return Err(Error::domain(
            "universal cap",
            "volume and forcing must be positive",
        ));
    }
    Ok((volume / forcing).sqrt() * std::f64::consts::PI)
}

/// A fixed-step numeric trace of a comparison ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Refined time at which |H| crossed the escape threshold, if it did.
    pub escape_time: Option<f64>,
}

/// Integrate the comparison ODE with classical RK4 at fixed step `dt`.
///
/// `forcing_samples`, when given, replace the curve's built-in forcing with a
/// time series (linearly interpolated, clamped at the ends). Integration
/// halts once |H| exceeds `escape_threshold`; the crossing time is then
/// refined by marching bisection over the last step and reported in
/// [`OdeTrace::escape_time`]. The trace itself only contains pre-escape
/// samples.
pub fn integrate_comparison(
    bound: &RiccatiBound,
    forcing_samples: Option<&[(f64, f64)]>,
    dt: f64,
    t_end: f64,
    escape_threshold: f64,
) -> Result<OdeTrace> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::domain(
            "comparison integration",
            format!("step must be positive, got {dt}"),
        ));
    }
    if !t_end.is_finite() || t_end < 0.0 {
        return Err(Error::domain(
            "comparison integration",
            format!("end time must be nonnegative, got {t_end}"),
        ));
    }
    if !escape_threshold.is_finite() || escape_threshold <= 0.0 {
        return Err(Error::domain(
            "comparison integration",
            format!("escape threshold must be positive, got {escape_threshold}"),
        ));
    }
    let (times, values): (Vec<f64>, Vec<f64>) = match forcing_samples {
        Some(samples) => {
            if samples.is_empty() {
                return Err(Error::domain(
                    "comparison integration",
                    "forcing sample list must not be empty",
                ));
            }
            if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::domain(
                    "comparison integration",
                    "forcing sample times must be strictly increasing",
                ));
            }
            samples.iter().copied().unzip()
        }
        None => (Vec::new(), Vec::new()),
    };
    let forcing_at = |t: f64| -> Option<f64> {
        if times.is_empty() {
            None
        } else {
            Some(numerics::interp_clamped(&times, &values, t))
        }
    };
    let rhs = |t: f64, h: f64| bound.rhs(h, forcing_at(t));

    let mut trace = OdeTrace {
        times: vec![0.0],
        values: vec![bound.initial_value()],
        escape_time: None,
    };
    if bound.initial_value().abs() > escape_threshold {
        trace.escape_time = Some(0.0);
        return Ok(trace);
    }

    let mut t = 0.0;
    let mut h = bound.initial_value();
    let steps = (t_end / dt).ceil() as usize;
    for k in 0..steps {
        let step = (t_end - t).min(dt);
        if step <= 0.0 {
            break;
        }
        let next = numerics::rk4_scalar(t, h, step, rhs);
        let t_next = if k + 1 == steps { t_end } else { t + step };
        if !next.is_finite() {
            return Err(Error::NumericFailure { time: t_next });
        }
        if next.abs() > escape_threshold {
            let advance = |t0: f64, y: &f64, hh: f64| numerics::rk4_scalar(t0, *y, hh, rhs);
            let hit = |_t: f64, y: &f64| y.abs() > escape_threshold;
            if let Some((t_escape, _)) =
                numerics::locate_event(&h, t, step, &advance, &hit, step * 1e-12)
            {
                trace.escape_time = Some(t_escape);
                return Ok(trace);
            }
        }
        t = t_next;
        h = next;
        trace.times.push(t);
        trace.values.push(h);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn integration_curve_matches_tan_values() {
        let b = RiccatiBound::integration(0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            b.eval(std::f64::consts::FRAC_PI_4).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(b.eval(1.0).unwrap(), -(1.0f64.tan()), epsilon = 1e-12);
        assert_relative_eq!(b.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn blowup_time_examples() {
        let b = RiccatiBound::integration(0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(b.blowup_time().unwrap(), std::f64::consts::FRAC_PI_2);
        // starting at -sqrt(V*F) knocks a quarter period off the lifetime
        let c = RiccatiBound::integration(-2.0, 4.0, 1.0).unwrap();
        assert_relative_eq!(
            c.blowup_time().unwrap(),
            std::f64::consts::FRAC_PI_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn pointwise_curve_values_and_blowup() {
        let b = RiccatiBound::pointwise(-3.0, 3).unwrap();
        assert_relative_eq!(b.blowup_time().unwrap(), 1.0);
        assert_relative_eq!(
            b.eval(0.5).unwrap(),
            3.0 * -3.0 / (3.0 - 1.5),
            epsilon = 1e-12
        );
        // positive initial data decays and never blows up
        let d = RiccatiBound::pointwise(2.0, 2).unwrap();
        assert_eq!(d.blowup_time(), None);
        assert_relative_eq!(d.eval(0.5).unwrap(), 4.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(d.eval(1.0).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn evaluators_reject_times_at_or_past_the_singularity() {
        let b = RiccatiBound::integration(0.0, 1.0, 1.0).unwrap();
        let blowup = b.blowup_time().unwrap();
        assert!(matches!(b.eval(blowup), Err(Error::PastSingularity { .. })));
        assert!(matches!(
            b.eval(blowup + 1.0),
            Err(Error::PastSingularity { .. })
        ));
        assert!(matches!(
            b.eval(blowup - 1e-15),
            Err(Error::PastSingularity { .. })
        ));
        assert!(b.eval(blowup - 1e-6).is_ok());
        assert!(b.eval(-0.1).is_err());

        let p = RiccatiBound::pointwise(-2.0, 3).unwrap();
        assert!(matches!(p.eval(1.5), Err(Error::PastSingularity { .. })));
    }

    #[test]
    fn constructors_validate_inputs() {
        assert!(RiccatiBound::integration(0.0, 0.0, 1.0).is_err());
        assert!(RiccatiBound::integration(0.0, 1.0, -1.0).is_err());
        assert!(RiccatiBound::integration(f64::NAN, 1.0, 1.0).is_err());
        assert!(RiccatiBound::pointwise(0.0, 0).is_err());
        assert!(universal_cap(1.0, 0.0).is_err());
    }

    #[test]
    fn numeric_integration_tracks_the_closed_form() {
        let b = RiccatiBound::integration(0.0, 1.0, 1.0).unwrap();
        let trace = integrate_comparison(&b, None, 1e-3, 1.5, 1e12).unwrap();
        for (&t, &h) in trace.times.iter().zip(&trace.values) {
            let exact = b.eval(t).unwrap();
            let err = (h - exact).abs() / (1.0 + exact.abs());
            assert!(err < 1e-9, "at t = {t}: numeric {h} vs closed {exact}");
        }
    }

    #[test]
    fn numeric_pointwise_matches_rational_form_without_forcing() {
        let b = RiccatiBound::pointwise(-3.0, 3).unwrap();
        let trace = integrate_comparison(&b, None, 1e-4, 0.9, 1e12).unwrap();
        let last_t = *trace.times.last().unwrap();
        let last_h = *trace.values.last().unwrap();
        assert_relative_eq!(last_t, 0.9);
        assert_relative_eq!(last_h, b.eval(0.9).unwrap(), epsilon = 1e-7);
    }

    #[test]
    fn escape_is_detected_near_the_closed_form_blowup() {
        let b = RiccatiBound::integration(0.0, 1.0, 1.0).unwrap();
        let blowup = b.blowup_time().unwrap();
        let trace = integrate_comparison(&b, None, 1e-4, 2.0, 1e6).unwrap();
        let escape = trace.escape_time.expect("must escape before t = 2");
        assert!(
            escape > 0.99 * blowup && escape < 1.01 * blowup,
            "escape at {escape}, blowup at {blowup}"
        );
        assert!(trace.values.iter().all(|v| v.abs() <= 1e6));
        assert!(*trace.times.last().unwrap() < 2.0);
    }

    #[test]
    fn stronger_forcing_pushes_the_numeric_trace_below_the_closed_form() {
        let b = RiccatiBound::integration(0.0, 1.0, 1.0).unwrap();
        let samples = [(0.0, 1.5), (2.0, 1.5)];
        let trace = integrate_comparison(&b, Some(&samples), 1e-3, 1.0, 1e12).unwrap();
        for (&t, &h) in trace.times.iter().zip(&trace.values).skip(1) {
            let reference = b.eval(t).unwrap();
            assert!(
                h < reference,
                "over-forced trace must stay below the closed form: t = {t}, {h} vs {reference}"
            );
        }
    }

    #[test]
    fn plug_back_residual_shrinks_at_second_order() {
        // Centered differences of the closed form must satisfy the ODE with a
        // residual that drops ~4x when the sampling step halves.
        let b = RiccatiBound::integration(1.0, 2.0, 3.0).unwrap();
        let residual = |dt: f64| -> f64 {
            let mut worst: f64 = 0.0;
            let t_max = 0.8 * b.blowup_time().unwrap();
            let steps = (t_max / dt) as usize;
            for k in 1..steps {
                let t = k as f64 * dt;
                let hm = b.eval(t - dt).unwrap();
                let h0 = b.eval(t).unwrap();
                let hp = b.eval(t + dt).unwrap();
                let lhs = (hp - hm) / (2.0 * dt);
                let rhs = -h0 * h0 / 2.0 - 3.0;
                worst = worst.max((lhs - rhs).abs());
            }
            worst
        };
        let coarse = residual(1e-3);
        let fine = residual(5e-4);
        assert!(
            coarse / fine >= 3.5,
            "second-order residual decay violated: {coarse} vs {fine}"
        );
    }

    #[test]
    fn integration_rejects_bad_numeric_arguments() {
        let b = RiccatiBound::integration(0.0, 1.0, 1.0).unwrap();
        assert!(integrate_comparison(&b, None, 0.0, 1.0, 1e9).is_err());
        assert!(integrate_comparison(&b, None, 1e-3, -1.0, 1e9).is_err());
        assert!(integrate_comparison(&b, None, 1e-3, 1.0, 0.0).is_err());
        let unsorted = [(0.0, 1.0), (0.0, 2.0)];
        assert!(integrate_comparison(&b, Some(&unsorted), 1e-3, 1.0, 1e9).is_err());
        assert!(integrate_comparison(&b, Some(&[]), 1e-3, 1.0, 1e9).is_err());
    }

    proptest! {
        #[test]
        fn closed_forms_start_at_h0(
            h0 in -10.0f64..10.0,
            volume in 0.1f64..10.0,
            forcing in 0.1f64..20.0,
        ) {
            let b = RiccatiBound::integration(h0, volume, forcing).unwrap();
            prop_assert!((b.eval(0.0).unwrap() - h0).abs() <= 1e-12 * (1.0 + h0.abs()));
        }

        #[test]
        fn blowup_time_stays_strictly_below_the_universal_cap(
            h0 in -10.0f64..10.0,
            volume in 0.1f64..10.0,
            forcing in 0.1f64..20.0,
        ) {
            let b = RiccatiBound::integration(h0, volume, forcing).unwrap();
            let t = b.blowup_time().unwrap();
            let cap = universal_cap(volume, forcing).unwrap();
            prop_assert!(t > 0.0, "blowup time must be positive, got {t}");
            prop_assert!(t < cap, "blowup time {t} must stay below the cap {cap}");
        }

        #[test]
        fn pointwise_negative_branch_is_monotone_decreasing(
            h0 in -10.0f64..-0.1,
            dim in 1usize..6,
            split in 0.05f64..0.95,
        ) {
            let b = RiccatiBound::pointwise(h0, dim).unwrap();
            let blowup = b.blowup_time().unwrap();
            let t1 = split * 0.5 * blowup;
            let t2 = split * 0.9 * blowup;
            let v1 = b.eval(t1).unwrap();
            let v2 = b.eval(t2).unwrap();
            prop_assert!(v2 <= v1, "head toward the singularity: {v1} then {v2}");
        }
    }
}
