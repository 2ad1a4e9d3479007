//! Driven pendulum whose length varies with angle: `theta' = omega - F_a(theta)`.
//!
//! The wave `F_a` rises from 0 at `theta = 0` to 1 at `pi/2` and back to 0
//! at `pi`, odd on the negative half, with the shape exponent `a`
//! controlling how flat the peak is. Rotation exists for `omega > 1`; at
//! `omega = 1` the rate vanishes at `theta = pi/2` and a bottleneck forms
//! whose passage time scales in `r = omega - 1` exactly like the abstract
//! families: constant for `a < 1`, logarithmic at `a = 1`, a power law
//! with exponent `(a - 1)/a` beyond.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;

use crate::passage::{
    self, EngineConfig, Interval, OdeConfig, PassageError, PassageResult, QuadratureConfig,
};
use crate::scaling::{ScalingError, ScalingSample, SweepEngine, SweepSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PendulumError {
    #[error("wave exponent must be positive and finite, got {0}")]
    InvalidShape(f64),
    #[error("drive must be finite, got {0}")]
    NonFiniteDrive(f64),
    #[error("angle {0} outside the wave domain [-pi, pi]")]
    OutOfDomain(f64),
    #[error("elongation is undefined at theta = {0}; use the capping policy")]
    SingularPoint(f64),
    #[error("elongation cap must be finite and at least 1, got {0}")]
    InvalidCap(f64),
}

/// Wave exponent and drive strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumParams {
    a: f64,
    omega: f64,
}

impl PendulumParams {
    pub fn new(a: f64, omega: f64) -> Result<Self, PendulumError> {
        if !a.is_finite() || a <= 0.0 {
            return Err(PendulumError::InvalidShape(a));
        }
        if !omega.is_finite() {
            return Err(PendulumError::NonFiniteDrive(omega));
        }
        Ok(PendulumParams { a, omega })
    }

    pub fn a(self) -> f64 {
        self.a
    }

    pub fn omega(self) -> f64 {
        self.omega
    }
}

/// What to do where the elongation `F_a(theta)/sin(theta)` is 0/0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityMode {
    /// Report an error at `theta` in `{0, -pi, pi}`.
    Exclude,
    /// Return the cap there, and clamp the ratio to the cap elsewhere.
    Cap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElongationPolicy {
    mode: SingularityMode,
    l_max: f64,
}

impl ElongationPolicy {
    pub fn new(mode: SingularityMode, l_max: f64) -> Result<Self, PendulumError> {
        if !l_max.is_finite() || l_max < 1.0 {
            return Err(PendulumError::InvalidCap(l_max));
        }
        Ok(ElongationPolicy { mode, l_max })
    }

    pub fn mode(self) -> SingularityMode {
        self.mode
    }

    pub fn l_max(self) -> f64 {
        self.l_max
    }
}

impl Default for ElongationPolicy {
    fn default() -> Self {
        ElongationPolicy {
            mode: SingularityMode::Exclude,
            l_max: 100.0,
        }
    }
}

/// Wave on `[-pi, pi]`, no validation. The scaled distance to the peak is
/// computed as `|theta/(pi/2) - 1|` so that the junction values at
/// `theta = 0, ±pi/2, ±pi` come out exactly `0, ±1, 0`.
fn wave_raw(a: f64, theta: f64) -> f64 {
    if theta >= 0.0 {
        let u = (theta / FRAC_PI_2 - 1.0).abs();
        1.0 - u.powf(a)
    } else {
        let u = (-theta / FRAC_PI_2 - 1.0).abs();
        -(1.0 - u.powf(a))
    }
}

/// Wave extended over the whole line by `2 pi` periodicity, for
/// integration stages that sample slightly past the domain.
pub(crate) fn wave_periodic(a: f64, theta: f64) -> f64 {
    if (-PI..=PI).contains(&theta) {
        return wave_raw(a, theta);
    }
    let wrapped = (theta + PI).rem_euclid(2.0 * PI) - PI;
    wave_raw(a, wrapped)
}

/// The four-branch wave `F_a(theta)` on `[-pi, pi]`.
pub fn wave(a: f64, theta: f64) -> Result<f64, PendulumError> {
    if !a.is_finite() || a <= 0.0 {
        return Err(PendulumError::InvalidShape(a));
    }
    if !theta.is_finite() || theta.abs() > PI {
        return Err(PendulumError::OutOfDomain(theta));
    }
    Ok(wave_raw(a, theta))
}

/// Length profile `L(theta) = F_a(theta)/sin(theta)`, the physical
/// elongation that realizes the wave. Even in `theta`, equal to 1 at
/// `theta = ±pi/2` for every `a`. At `theta` in `{0, ±pi}` both numerator
/// and denominator vanish; the policy decides between an error and the cap.
pub fn elongation(a: f64, theta: f64, policy: ElongationPolicy) -> Result<f64, PendulumError> {
    if !a.is_finite() || a <= 0.0 {
        return Err(PendulumError::InvalidShape(a));
    }
    if !theta.is_finite() || theta.abs() > PI {
        return Err(PendulumError::OutOfDomain(theta));
    }
    if theta == 0.0 || theta.abs() == PI {
        return match policy.mode {
            SingularityMode::Exclude => Err(PendulumError::SingularPoint(theta)),
            SingularityMode::Cap => Ok(policy.l_max),
        };
    }
    let l = wave_raw(a, theta) / theta.sin();
    Ok(match policy.mode {
        SingularityMode::Exclude => l,
        SingularityMode::Cap => l.min(policy.l_max),
    })
}

/// Angular rate `omega - F_a(theta)`. Total in `theta`: the wave lives on
/// the circle.
pub fn rhs(p: PendulumParams, theta: f64) -> f64 {
    p.omega - wave_periodic(p.a, theta)
}

/// The rate on the upper half-circle, rearranged as `(omega - 1) + u^a`
/// with `u = |theta/(pi/2) - 1|`. Inside the bottleneck both `omega` and
/// `F_a` sit next to 1 and the naive subtraction in [`rhs`] loses eight
/// digits at `omega - 1 = 1e-8`; this form adds two nonnegative terms
/// instead. Identical to `rhs` on `[0, pi]` up to rounding, and smooth
/// past `pi` for integration stages that overshoot.
fn upper_rate(p: PendulumParams, theta: f64) -> f64 {
    (p.omega - 1.0) + (theta / FRAC_PI_2 - 1.0).abs().powf(p.a)
}

/// The conventional bottleneck window, symmetric about the stall angle
/// `pi/2`. Like every window choice it moves prefactors only, never the
/// fitted exponents.
pub fn default_bottleneck_interval() -> Interval {
    Interval::new(FRAC_PI_4, 3.0 * FRAC_PI_4).expect("constant window is valid")
}

/// Time for `theta` to cross `iv` (a window inside `[0, pi]`) under
/// `theta' = omega - F_a(theta)`.
///
/// On `[0, pi]` the rate is bounded below by `omega - 1`, so the transit
/// exists exactly when `omega > 1`; the rate minimum sits at `pi/2`.
pub fn bottleneck_time(
    p: PendulumParams,
    iv: Interval,
    engine: EngineConfig<'_>,
) -> Result<PassageResult, PassageError> {
    if iv.lo() < 0.0 || iv.hi() > PI {
        return Err(PassageError::InvalidInterval {
            lo: iv.lo(),
            hi: iv.hi(),
        });
    }
    let r = p.omega - 1.0;
    if r <= 0.0 {
        return Err(PassageError::NoTransit {
            x: FRAC_PI_2,
            rate: r,
        });
    }
    let rate = move |theta: f64| upper_rate(p, theta);
    match engine {
        EngineConfig::Quadrature(cfg) => {
            let cuts: Vec<f64> = [FRAC_PI_2]
                .into_iter()
                .filter(|&c| iv.lo() < c && c < iv.hi())
                .collect();
            passage::run_quadrature(rate, iv.lo(), iv.hi(), &cuts, cfg)
        }
        EngineConfig::Ode(cfg) => passage::run_ode(rate, iv.lo(), iv.hi(), cfg),
    }
}

/// Period of one full revolution, `integral over [-pi, pi] of
/// d theta / (omega - F_a(theta))`. Finite exactly when `omega > 1`.
pub fn rotation_period(p: PendulumParams, cfg: &QuadratureConfig) -> Result<f64, PassageError> {
    let r = p.omega - 1.0;
    if r <= 0.0 {
        return Err(PassageError::NoTransit {
            x: FRAC_PI_2,
            rate: r,
        });
    }
    // Lower half: F_a <= 0, the rate stays above omega and the naive form
    // is safe. Upper half: switch to the cancellation-free arrangement.
    let rate = move |theta: f64| {
        if theta >= 0.0 {
            upper_rate(p, theta)
        } else {
            rhs(p, theta)
        }
    };
    let cuts = [-FRAC_PI_2, 0.0, FRAC_PI_2];
    Ok(passage::run_quadrature(rate, -PI, PI, &cuts, cfg)?.time)
}

/// Bottleneck times over the plan's `r` grid with `omega = 1 + r`,
/// producing samples ready for the scaling fits.
pub fn bottleneck_sweep(a: f64, spec: &SweepSpec) -> Result<Vec<ScalingSample>, ScalingError> {
    if !a.is_finite() || a <= 0.0 {
        return Err(ScalingError::InvalidSpec {
            detail: "pendulum wave exponent must be positive and finite",
        });
    }
    let quad_cfg = QuadratureConfig::default();
    let ode_cfg = OdeConfig::default();
    let results: Vec<Result<ScalingSample, ScalingError>> = spec
        .grid()
        .par_iter()
        .map(|&r| {
            let p = PendulumParams { a, omega: 1.0 + r };
            let engine = match spec.engine() {
                SweepEngine::Quadrature => EngineConfig::Quadrature(&quad_cfg),
                SweepEngine::Ode => EngineConfig::Ode(&ode_cfg),
            };
            match bottleneck_time(p, spec.interval(), engine) {
                Ok(out) => Ok(ScalingSample { r, t: out.time }),
                Err(source) => Err(ScalingError::SweepPoint { r, source }),
            }
        })
        .collect();
    results.into_iter().collect()
}
