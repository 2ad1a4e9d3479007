//! Passage time through a bottleneck window, by two independent engines
//! plus exact formulas for the solvable families.
//!
//! The quadrature route evaluates `t = integral of dx / rate(x)`
//! (separation of variables); the time-domain route integrates
//! `x' = rate(x)` and locates the exit crossing. Scaling studies lean on
//! both: agreement of two unrelated discretizations is the main defense
//! against a silently wrong bottleneck time.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::fields::{FieldError, VectorField1D};
use crate::ode::{self, OdeFailure};
use crate::quad::{self, QuadFailure};

/// A bounded transit window `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, PassageError> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Interval { lo, hi })
        } else {
            Err(PassageError::InvalidInterval { lo, hi })
        }
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn hi(self) -> f64 {
        self.hi
    }
}

impl Default for Interval {
    /// The conventional window `[-1, 1]`. Widening or shifting a window
    /// changes scaling prefactors, never exponents.
    fn default() -> Self {
        Interval { lo: -1.0, hi: 1.0 }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Which computation produced a passage time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Quadrature,
    Ode,
    ClosedForm,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::Quadrature => write!(f, "quadrature"),
            Engine::Ode => write!(f, "ode"),
            Engine::ClosedForm => write!(f, "closed_form"),
        }
    }
}

impl FromStr for Engine {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quadrature" => Ok(Engine::Quadrature),
            "ode" => Ok(Engine::Ode),
            "closed_form" => Ok(Engine::ClosedForm),
            _ => Err(FieldError::Parse {
                kind: "engine",
                text: s.to_owned(),
            }),
        }
    }
}

/// A measured passage time with its provenance and cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassageResult {
    pub time: f64,
    pub engine: Engine,
    /// Engine's own bound on the absolute error of `time`.
    pub error_estimate: f64,
    /// Integrand or right-hand-side calls spent.
    pub evaluations: u64,
}

/// Tolerances for the adaptive quadrature engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 1_000_000,
        }
    }
}

impl QuadratureConfig {
    pub(crate) fn validate(&self) -> Result<(), PassageError> {
        for (tol, detail) in [
            (self.rel_tol, "rel_tol must be positive and finite"),
            (self.abs_tol, "abs_tol must be positive and finite"),
        ] {
            if !tol.is_finite() || tol <= 0.0 {
                return Err(PassageError::InvalidConfig { detail });
            }
        }
        Ok(())
    }
}

/// Tolerances for the time-domain engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: u64,
    /// Exit-crossing tolerance in the state variable; it converts to a
    /// time tolerance of `event_tol / rate(x_exit)`.
    pub event_tol: f64,
}

impl Default for OdeConfig {
    fn default() -> Self {
        OdeConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_steps: 100_000_000,
            event_tol: 1e-12,
        }
    }
}

impl OdeConfig {
    pub(crate) fn validate(&self) -> Result<(), PassageError> {
        for (tol, detail) in [
            (self.rel_tol, "rel_tol must be positive and finite"),
            (self.abs_tol, "abs_tol must be positive and finite"),
            (self.event_tol, "event_tol must be positive and finite"),
        ] {
            if !tol.is_finite() || tol <= 0.0 {
                return Err(PassageError::InvalidConfig { detail });
            }
        }
        Ok(())
    }
}

/// Engine choice bundled with its tolerances.
#[derive(Debug, Clone, Copy)]
pub enum EngineConfig<'a> {
    Quadrature(&'a QuadratureConfig),
    Ode(&'a OdeConfig),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PassageError {
    /// The rate vanishes or reverses at `x`: an equilibrium (or its
    /// blocking remnant) stops the transit.
    #[error("no transit: rate {rate} at x = {x} blocks the passage")]
    NoTransit { x: f64, rate: f64 },
    #[error("tolerance not met: error estimate {achieved} exceeds requested {requested}")]
    ToleranceNotMet { achieved: f64, requested: f64 },
    #[error("step limit exceeded after {steps} steps")]
    StepLimitExceeded { steps: u64 },
    #[error("parameter must be positive, got {value}")]
    NonpositiveParameter { value: f64 },
    #[error("one-sided passage time diverges as r -> 0 for exponent {alpha}")]
    DivergentLimit { alpha: f64 },
    #[error("bad auxiliary argument: {detail}")]
    BadAux { detail: &'static str },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("invalid engine configuration: {detail}")]
    InvalidConfig { detail: &'static str },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Geometric refinement shells around every segment boundary.
///
/// A Kronrod rule sees only its 15 interior nodes, so a peak of `1/rate`
/// much narrower than the node spacing is invisible to both the value and
/// the error estimate of a seed segment. The lie is harmless while the
/// tolerance stays proportional to that segment's own mass, but on a
/// symmetric window the first half-axis to resolve its peak inflates the
/// relative budget by the whole peak mass, and the mirror segment's bogus
/// estimate can then slip underneath it: half the integral silently
/// vanishes. Walking shells from each boundary until the rate stops
/// halving bounds the integrand variation per seed segment, which keeps
/// every seed estimate honest; the scan is self-limiting where the rate
/// is not collapsing (one probe, no shells).
fn shell_cuts<F: Fn(f64) -> f64>(rate: &F, lo: f64, hi: f64, cuts: &[f64]) -> (Vec<f64>, u64) {
    let mut anchors: Vec<f64> = Vec::with_capacity(cuts.len() + 2);
    anchors.push(lo);
    anchors.extend_from_slice(cuts);
    anchors.push(hi);

    let mut probes = 0u64;
    let mut out: Vec<f64> = cuts.to_vec();
    for (idx, &b) in anchors.iter().enumerate() {
        probes += 1;
        let floor = 2.0 * rate(b);
        // Into the right-hand neighbor for every anchor but `hi`.
        if idx + 1 < anchors.len() {
            let mut w = 0.5 * (anchors[idx + 1] - b);
            while b + w > b {
                probes += 1;
                if rate(b + w) <= floor {
                    break;
                }
                out.push(b + w);
                w *= 0.5;
            }
        }
        // Into the left-hand neighbor for every anchor but `lo`.
        if idx > 0 {
            let mut w = 0.5 * (b - anchors[idx - 1]);
            while b - w < b {
                probes += 1;
                if rate(b - w) <= floor {
                    break;
                }
                out.push(b - w);
                w *= 0.5;
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    (out, probes)
}

/// Run the quadrature engine on a raw rate function. The caller has
/// already established that the rate is positive on `[lo, hi]`.
pub(crate) fn run_quadrature<F: Fn(f64) -> f64>(
    rate: F,
    lo: f64,
    hi: f64,
    cuts: &[f64],
    cfg: &QuadratureConfig,
) -> Result<PassageResult, PassageError> {
    cfg.validate()?;
    let (seeded, probes) = shell_cuts(&rate, lo, hi, cuts);
    match quad::integrate(move |x| 1.0 / rate(x), lo, hi, &seeded, cfg) {
        Ok(out) => Ok(PassageResult {
            time: out.value,
            engine: Engine::Quadrature,
            error_estimate: out.error_estimate,
            evaluations: out.evaluations + probes,
        }),
        Err(QuadFailure::ToleranceNotMet {
            achieved,
            requested,
        }) => Err(PassageError::ToleranceNotMet {
            achieved,
            requested,
        }),
    }
}

/// Run the time-domain engine on a raw rate function. Same positivity
/// contract as [`run_quadrature`].
pub(crate) fn run_ode<F: Fn(f64) -> f64>(
    rate: F,
    x_enter: f64,
    x_exit: f64,
    cfg: &OdeConfig,
) -> Result<PassageResult, PassageError> {
    cfg.validate()?;
    if x_enter == x_exit {
        return Ok(PassageResult {
            time: 0.0,
            engine: Engine::Ode,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    match ode::crossing_time(&rate, x_enter, x_exit, cfg, None) {
        Ok(out) => Ok(PassageResult {
            time: out.time,
            engine: Engine::Ode,
            error_estimate: out.time * cfg.rel_tol + cfg.event_tol / out.exit_rate,
            evaluations: out.evaluations,
        }),
        Err(OdeFailure::StepLimitExceeded { steps }) => {
            Err(PassageError::StepLimitExceeded { steps })
        }
        Err(OdeFailure::NonPositiveRate { x, rate }) => Err(PassageError::NoTransit { x, rate }),
        Err(OdeFailure::StepUnderflow) => Err(PassageError::ToleranceNotMet {
            achieved: f64::INFINITY,
            requested: cfg.rel_tol,
        }),
    }
}

/// Reject the transit unless the rate is positive at every checkpoint:
/// both window endpoints plus the field's interior rate minima. For the
/// implemented families these are the only places a nonpositive rate can
/// hide.
fn check_transit(field: &VectorField1D, r: f64, iv: Interval) -> Result<Vec<f64>, PassageError> {
    let interior = field.transit_checkpoints(iv)?;
    let endpoint_then_interior = [iv.lo(), iv.hi()]
        .into_iter()
        .chain(interior.iter().copied());
    for x in endpoint_then_interior {
        let rate = field.rate(r, x)?;
        if rate <= 0.0 {
            return Err(PassageError::NoTransit { x, rate });
        }
    }
    Ok(interior)
}

/// Passage time as the separation-of-variables integral
/// `t = integral over iv of dx / (R(r) + F(x))`, split at the interior
/// rate minima where the integrand peaks (and, for sub-linear phases,
/// loses smoothness).
pub fn passage_time_quadrature(
    field: &VectorField1D,
    r: f64,
    iv: Interval,
    cfg: &QuadratureConfig,
) -> Result<PassageResult, PassageError> {
    let cuts = check_transit(field, r, iv)?;
    run_quadrature(field.rate_fn(r), iv.lo(), iv.hi(), &cuts, cfg)
}

/// Passage time by direct integration of `x' = R(r) + F(x)` from
/// `x_enter`, stopping at the detected crossing of `x_exit`.
///
/// Requires `R(r) > 0`: the trajectory must drift forward even through
/// `x = 0` where `F` vanishes (and, for sub-linear phases, the right-hand
/// side is not Lipschitz).
pub fn passage_time_ode(
    field: &VectorField1D,
    r: f64,
    x_enter: f64,
    x_exit: f64,
    cfg: &OdeConfig,
) -> Result<PassageResult, PassageError> {
    cfg.validate()?;
    if !x_enter.is_finite() || !x_exit.is_finite() || x_enter > x_exit {
        return Err(PassageError::InvalidInterval {
            lo: x_enter,
            hi: x_exit,
        });
    }
    if x_enter == x_exit {
        return Ok(PassageResult {
            time: 0.0,
            engine: Engine::Ode,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let drift = field.param().eval(r)?;
    if drift <= 0.0 {
        return Err(PassageError::NoTransit {
            x: 0.0,
            rate: drift,
        });
    }
    let iv = Interval::new(x_enter, x_exit)?;
    check_transit(field, r, iv)?;
    run_ode(field.rate_fn(r), x_enter, x_exit, cfg)
}

/// One passage-time computation with the engine chosen at runtime.
pub fn passage_time(
    field: &VectorField1D,
    r: f64,
    iv: Interval,
    engine: EngineConfig<'_>,
) -> Result<PassageResult, PassageError> {
    match engine {
        EngineConfig::Quadrature(cfg) => passage_time_quadrature(field, r, iv, cfg),
        EngineConfig::Ode(cfg) => passage_time_ode(field, r, iv.lo(), iv.hi(), cfg),
    }
}

/// The families whose passage time has an elementary antiderivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormKind {
    /// `F(x) = sqrt(|x|)` over `[0, 1]`: `2 + 2 r ln r - 2 r ln(1 + r)`.
    SqrtPhase,
    /// `F(x) = |x|` over `[0, 1]`: `ln(1 + 1/r)`.
    LinearPhase,
    /// `F(x) = x^2` over `[0, 1]`: `arctan(1/sqrt r)/sqrt r`.
    QuadraticPhase,
    /// `F(x) = x^2` over `[-1, 1]`: twice [`ClosedFormKind::QuadraticPhase`].
    QuadraticPhaseSym,
    /// `F(x) = x^2` over `[-1, 1]` with the drift written as `1/aux^2`:
    /// `2 aux arctan(aux)`. Requires the auxiliary argument.
    ScaledArctan,
}

/// Exact passage times for [`ClosedFormKind`] families, used as oracles
/// for both engines. `aux` applies to `ScaledArctan` only.
pub fn closed_form_passage(
    kind: ClosedFormKind,
    r: f64,
    aux: Option<f64>,
) -> Result<f64, PassageError> {
    if !r.is_finite() || r <= 0.0 {
        return Err(PassageError::NonpositiveParameter { value: r });
    }
    if kind != ClosedFormKind::ScaledArctan && aux.is_some() {
        return Err(PassageError::BadAux {
            detail: "aux applies only to the scaled-arctan form",
        });
    }
    Ok(match kind {
        // 2 + 2 r ln r - 2 r ln(1+r), rewritten to avoid cancellation.
        ClosedFormKind::SqrtPhase => 2.0 - 2.0 * r * (1.0 / r).ln_1p(),
        ClosedFormKind::LinearPhase => (1.0 / r).ln_1p(),
        ClosedFormKind::QuadraticPhase => {
            let s = r.sqrt();
            (1.0 / s).atan() / s
        }
        ClosedFormKind::QuadraticPhaseSym => {
            let s = r.sqrt();
            2.0 * (1.0 / s).atan() / s
        }
        ClosedFormKind::ScaledArctan => {
            let a = aux.ok_or(PassageError::BadAux {
                detail: "the scaled-arctan form requires aux",
            })?;
            if !a.is_finite() || a <= 0.0 {
                return Err(PassageError::BadAux {
                    detail: "aux must be positive and finite",
                });
            }
            2.0 * a * a.atan()
        }
    })
}

/// Limit of the one-sided passage time over `[0, 1]` as `r -> 0+` for the
/// phase `F(x) = |x|^alpha`: finite exactly when `alpha < 1`, where it
/// equals `1 / (1 - alpha)`.
pub fn limit_passage_alpha(alpha: f64) -> Result<f64, PassageError> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(PassageError::NonpositiveParameter { value: alpha });
    }
    if alpha >= 1.0 {
        return Err(PassageError::DivergentLimit { alpha });
    }
    Ok(1.0 / (1.0 - alpha))
}
