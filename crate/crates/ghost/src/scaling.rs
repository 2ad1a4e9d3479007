//! Sweeps of the passage time against `r` and classification of the
//! resulting scaling law.
//!
//! A sweep walks a log-spaced grid from `r_hi` down toward `r_lo`. Three
//! candidate laws are fitted to the samples: a constant, `c1 ln(1/r) + c0`,
//! and the power law `C r^(-p)` (a line in log-log coordinates). Each fit
//! reports a relative rmse so the three are comparable, and selection
//! applies a simplicity preference: a constant within the band wins, then
//! the better of constant/logarithmic/power with a margin that favors the
//! logarithmic model over a marginally better power law.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fields::{FieldError, ParamMap, PhaseFn, VectorField1D};
use crate::passage::{
    passage_time_ode, passage_time_quadrature, Engine, Interval, OdeConfig, PassageError,
    QuadratureConfig,
};

/// Grid spacing for sweeps. Power laws are lines under log spacing, so it
/// is the only spacing offered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spacing {
    #[default]
    Log,
}

/// Which passage-time engine a sweep drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepEngine {
    #[default]
    Quadrature,
    Ode,
}

impl From<SweepEngine> for Engine {
    fn from(engine: SweepEngine) -> Engine {
        match engine {
            SweepEngine::Quadrature => Engine::Quadrature,
            SweepEngine::Ode => Engine::Ode,
        }
    }
}

impl fmt::Display for SweepEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepEngine::Quadrature => write!(f, "quadrature"),
            SweepEngine::Ode => write!(f, "ode"),
        }
    }
}

impl FromStr for SweepEngine {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quadrature" => Ok(SweepEngine::Quadrature),
            "ode" => Ok(SweepEngine::Ode),
            _ => Err(FieldError::Parse {
                kind: "engine",
                text: s.to_owned(),
            }),
        }
    }
}

/// A validated sweep plan: `points` log-spaced values from `r_hi` down to
/// `r_lo`, each measured over `interval` by `engine`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    r_lo: f64,
    r_hi: f64,
    points: u32,
    spacing: Spacing,
    engine: SweepEngine,
    interval: Interval,
}

impl SweepSpec {
    pub fn new(
        r_lo: f64,
        r_hi: f64,
        points: u32,
        spacing: Spacing,
        engine: SweepEngine,
        interval: Interval,
    ) -> Result<Self, ScalingError> {
        if !r_lo.is_finite() || r_lo <= 0.0 {
            return Err(ScalingError::InvalidSpec {
                detail: "r_lo must be positive and finite",
            });
        }
        if !r_hi.is_finite() || r_hi <= r_lo {
            return Err(ScalingError::InvalidSpec {
                detail: "r_hi must be finite and exceed r_lo",
            });
        }
        if points < 3 {
            return Err(ScalingError::InvalidSpec {
                detail: "a sweep needs at least 3 points",
            });
        }
        Ok(SweepSpec {
            r_lo,
            r_hi,
            points,
            spacing,
            engine,
            interval,
        })
    }

    /// Grid pushed deeper toward `r = 0` for classifier studies. Near the
    /// break the constant, logarithmic and shallow-power shapes separate
    /// only once `r` spans well below `1e-5`; the selection thresholds
    /// were calibrated on this range.
    pub fn regime_default() -> Self {
        SweepSpec {
            r_lo: 1e-10,
            r_hi: 1e-5,
            ..SweepSpec::default()
        }
    }

    pub fn with_engine(mut self, engine: SweepEngine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_interval(mut self, interval: Interval) -> Self {
        self.interval = interval;
        self
    }

    pub fn r_lo(&self) -> f64 {
        self.r_lo
    }

    pub fn r_hi(&self) -> f64 {
        self.r_hi
    }

    pub fn points(&self) -> u32 {
        self.points
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn engine(&self) -> SweepEngine {
        self.engine
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    /// The descending grid, endpoints exact.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points as usize;
        let hi_ln = self.r_hi.ln();
        let lo_ln = self.r_lo.ln();
        (0..n)
            .map(|i| {
                if i == 0 {
                    self.r_hi
                } else if i == n - 1 {
                    self.r_lo
                } else {
                    let frac = i as f64 / (n - 1) as f64;
                    (hi_ln + (lo_ln - hi_ln) * frac).exp()
                }
            })
            .collect()
    }
}

impl Default for SweepSpec {
    /// `[1e-8, 1e-3]`, 25 points, quadrature over `[-1, 1]`: deep enough
    /// in the asymptotic regime for exponent fits, cheap to integrate.
    fn default() -> Self {
        SweepSpec {
            r_lo: 1e-8,
            r_hi: 1e-3,
            points: 25,
            spacing: Spacing::Log,
            engine: SweepEngine::Quadrature,
            interval: Interval::default(),
        }
    }
}

/// One sweep measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingSample {
    pub r: f64,
    pub t: f64,
}

/// The three law classes a sweep can exhibit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingModel {
    #[serde(rename = "constant")]
    Constant,
    #[serde(rename = "logarithmic")]
    Logarithmic,
    #[serde(rename = "power")]
    PowerLaw,
}

impl fmt::Display for ScalingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalingModel::Constant => write!(f, "constant"),
            ScalingModel::Logarithmic => write!(f, "logarithmic"),
            ScalingModel::PowerLaw => write!(f, "power"),
        }
    }
}

/// A fitted law. Fields beyond the chosen model's are `None`:
/// constant `t ~ prefactor`; logarithmic `t ~ prefactor ln(1/r) +
/// intercept`; power `t ~ prefactor r^(-exponent)` with `exponent > 0`
/// for growth.
///
/// `rmse` is relative to the data scale in the model's own fitting
/// coordinates, so the three candidates are directly comparable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub model: ScalingModel,
    pub exponent: Option<f64>,
    pub prefactor: f64,
    pub intercept: Option<f64>,
    pub rmse: f64,
    pub r_squared: f64,
}

/// Thresholds for [`select_model`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectConfig {
    /// A constant fit whose relative spread is inside this band wins
    /// outright.
    pub constant_band: f64,
    /// The logarithmic model wins over power when within this relative
    /// rmse margin of it.
    pub log_margin: f64,
}

impl Default for SelectConfig {
    fn default() -> Self {
        SelectConfig {
            constant_band: 0.01,
            log_margin: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScalingError {
    #[error("need at least 3 samples, got {got}")]
    InsufficientData { got: usize },
    #[error("regressor has zero variance; samples must span distinct r")]
    DegenerateData,
    #[error("samples must have finite positive r and t, got r = {r}, t = {t}")]
    InvalidSample { r: f64, t: f64 },
    #[error("invalid sweep spec: {detail}")]
    InvalidSpec { detail: &'static str },
    #[error("sweep failed at r = {r}: {source}")]
    SweepPoint { r: f64, source: PassageError },
    #[error("no scaling prediction for this phase/param combination")]
    UnknownFamily,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Measure the passage time at every grid point of `spec`. Points run in
/// parallel; results keep grid order, and the first failing point (in grid
/// order) aborts the sweep with its `r` attached.
pub fn sweep(field: &VectorField1D, spec: &SweepSpec) -> Result<Vec<ScalingSample>, ScalingError> {
    let quad_cfg = QuadratureConfig::default();
    let ode_cfg = OdeConfig::default();
    let results: Vec<Result<ScalingSample, ScalingError>> = spec
        .grid()
        .par_iter()
        .map(|&r| {
            let measured = match spec.engine {
                SweepEngine::Quadrature => {
                    passage_time_quadrature(field, r, spec.interval, &quad_cfg)
                }
                SweepEngine::Ode => {
                    passage_time_ode(field, r, spec.interval.lo(), spec.interval.hi(), &ode_cfg)
                }
            };
            match measured {
                Ok(out) if out.time.is_finite() && out.time > 0.0 => {
                    Ok(ScalingSample { r, t: out.time })
                }
                Ok(out) => Err(ScalingError::InvalidSample { r, t: out.time }),
                Err(source) => Err(ScalingError::SweepPoint { r, source }),
            }
        })
        .collect();
    results.into_iter().collect()
}

fn check_samples(samples: &[ScalingSample]) -> Result<(), ScalingError> {
    if samples.len() < 3 {
        return Err(ScalingError::InsufficientData { got: samples.len() });
    }
    for s in samples {
        if !s.r.is_finite() || s.r <= 0.0 || !s.t.is_finite() || s.t <= 0.0 {
            return Err(ScalingError::InvalidSample { r: s.r, t: s.t });
        }
    }
    Ok(())
}

struct Ols {
    slope: f64,
    intercept: f64,
    rmse_abs: f64,
    r_squared: f64,
}

fn ols(xs: &[f64], ys: &[f64]) -> Result<Ols, ScalingError> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(ScalingError::DegenerateData);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ssr = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let resid = y - (slope * x + intercept);
        ssr += resid * resid;
    }
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ssr / syy).clamp(0.0, 1.0)
    };
    Ok(Ols {
        slope,
        intercept,
        rmse_abs: (ssr / n).sqrt(),
        r_squared,
    })
}

/// Fit `t ~ c`. The rmse is the relative spread `std(t) / mean(t)`.
pub fn fit_constant(samples: &[ScalingSample]) -> Result<ScalingFit, ScalingError> {
    check_samples(samples)?;
    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s.t).sum::<f64>() / n;
    let var = samples
        .iter()
        .map(|s| (s.t - mean) * (s.t - mean))
        .sum::<f64>()
        / n;
    let spread = var.sqrt();
    Ok(ScalingFit {
        model: ScalingModel::Constant,
        exponent: None,
        prefactor: mean,
        intercept: None,
        rmse: spread / mean,
        r_squared: if spread == 0.0 { 1.0 } else { 0.0 },
    })
}

/// Fit `t ~ c1 ln(1/r) + c0` by least squares; rmse is the residual rms
/// normalized by `mean(t)`.
pub fn fit_log(samples: &[ScalingSample]) -> Result<ScalingFit, ScalingError> {
    check_samples(samples)?;
    let xs: Vec<f64> = samples.iter().map(|s| -s.r.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let fit = ols(&xs, &ys)?;
    let mean_t = ys.iter().sum::<f64>() / ys.len() as f64;
    Ok(ScalingFit {
        model: ScalingModel::Logarithmic,
        exponent: None,
        prefactor: fit.slope,
        intercept: Some(fit.intercept),
        rmse: fit.rmse_abs / mean_t,
        r_squared: fit.r_squared,
    })
}

/// Fit `t ~ C r^(-p)` by least squares on `(ln r, ln t)`; `exponent = p`
/// is reported positive for times that grow as `r` shrinks. Log-space
/// residuals are already relative, so the rmse needs no normalization.
pub fn fit_power(samples: &[ScalingSample]) -> Result<ScalingFit, ScalingError> {
    check_samples(samples)?;
    let xs: Vec<f64> = samples.iter().map(|s| s.r.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.t.ln()).collect();
    let fit = ols(&xs, &ys)?;
    Ok(ScalingFit {
        model: ScalingModel::PowerLaw,
        exponent: Some(-fit.slope),
        prefactor: fit.intercept.exp(),
        intercept: None,
        rmse: fit.rmse_abs,
        r_squared: fit.r_squared,
    })
}

/// Choose among the three candidate fits (computed on the same samples).
///
/// Order of precedence: a constant inside the band; otherwise the minimal
/// relative rmse, with ties and the configured margin resolving toward
/// the simpler model (constant over logarithmic over power).
pub fn select_model(
    constant: &ScalingFit,
    logarithmic: &ScalingFit,
    power: &ScalingFit,
    cfg: &SelectConfig,
) -> ScalingFit {
    if constant.rmse <= cfg.constant_band {
        return constant.clone();
    }
    if constant.rmse <= logarithmic.rmse && constant.rmse <= power.rmse {
        return constant.clone();
    }
    if logarithmic.rmse <= (1.0 + cfg.log_margin) * power.rmse {
        return logarithmic.clone();
    }
    power.clone()
}

/// Fit all three candidates and select.
pub fn classify(samples: &[ScalingSample], cfg: &SelectConfig) -> Result<ScalingFit, ScalingError> {
    let constant = fit_constant(samples)?;
    let logarithmic = fit_log(samples)?;
    let power = fit_power(samples)?;
    Ok(select_model(&constant, &logarithmic, &power, cfg))
}

/// The law a field family must exhibit as `r -> 0+`, with constants
/// normalized to the default window `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PredictedLaw {
    /// `t -> value`.
    Constant { value: f64 },
    /// `t ~ slope * ln(1/r)`.
    Logarithmic { slope: f64 },
    /// `t ~ C r^(-exponent)`.
    PowerLaw { exponent: f64 },
    /// Grows faster than any power of `1/r`.
    NonPower { description: &'static str },
}

/// Predict the scaling class of a field from its family parameters.
pub fn predicted_law(field: &VectorField1D) -> Result<PredictedLaw, ScalingError> {
    Ok(match (field.param(), field.phase()) {
        (ParamMap::Identity, PhaseFn::Quadratic) => PredictedLaw::PowerLaw { exponent: 0.5 },
        (ParamMap::Identity, PhaseFn::Power { alpha }) => {
            if alpha > 1.0 {
                PredictedLaw::PowerLaw {
                    exponent: (alpha - 1.0) / alpha,
                }
            } else if alpha == 1.0 {
                // ln(1/r) from each side of the window.
                PredictedLaw::Logarithmic { slope: 2.0 }
            } else {
                // Twice the one-sided limit 1/(1 - alpha).
                PredictedLaw::Constant {
                    value: 2.0 / (1.0 - alpha),
                }
            }
        }
        (ParamMap::Identity, PhaseFn::Monomial { m }) => PredictedLaw::PowerLaw {
            exponent: (f64::from(m) - 1.0) / f64::from(m),
        },
        (ParamMap::EvenPower { k }, PhaseFn::Quadratic) => PredictedLaw::PowerLaw {
            exponent: f64::from(k),
        },
        (ParamMap::InverseSquareExp, PhaseFn::Quadratic) => PredictedLaw::NonPower {
            description: "exponential bottleneck: t ~ pi exp(1/r) outgrows every power of 1/r",
        },
        _ => return Err(ScalingError::UnknownFamily),
    })
}

/// One row of the regime map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeEntry {
    pub alpha: f64,
    pub fit: ScalingFit,
}

/// The classified law per phase exponent `alpha`. Exhibits the break at
/// `alpha = 1`: constant below, logarithmic at, power law above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeMap {
    pub entries: Vec<RegimeEntry>,
}

/// Sweep and classify the phase family `|x|^alpha` for each grid value.
pub fn regime_scan(alphas: &[f64], spec: &SweepSpec) -> Result<RegimeMap, ScalingError> {
    if alphas.is_empty() {
        return Err(ScalingError::InvalidSpec {
            detail: "alpha grid must be nonempty",
        });
    }
    if alphas.iter().any(|a| !a.is_finite() || *a <= 0.0) {
        return Err(ScalingError::InvalidSpec {
            detail: "alpha values must be positive and finite",
        });
    }
    if alphas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ScalingError::InvalidSpec {
            detail: "alpha grid must be strictly increasing",
        });
    }
    let select = SelectConfig::default();
    let entries = alphas
        .iter()
        .map(|&alpha| {
            let field = VectorField1D::new(PhaseFn::power(alpha)?, ParamMap::Identity)?;
            let samples = sweep(&field, spec)?;
            let fit = classify(&samples, &select)?;
            Ok(RegimeEntry { alpha, fit })
        })
        .collect::<Result<Vec<_>, ScalingError>>()?;
    Ok(RegimeMap { entries })
}
