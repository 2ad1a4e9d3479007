//! Scalar fields `x' = R(r) + F(x)` with even state nonlinearity.
//!
//! `F` is always an even extension (`F(x) = F(-x)`), so the slow region
//! sits symmetrically around `x = 0` and disappears together with the two
//! equilibria `x = ±(-R)^(1/alpha)` as `R` crosses zero. The parameter map
//! `R` controls whether that crossing is an honest sign change (a
//! saddle-node) or a degenerate touch from above.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::passage::Interval;

/// State nonlinearity `F(x)`. Every variant is even in `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseFn {
    /// `F(x) = x^2`, the normal-form nonlinearity.
    Quadratic,
    /// `F(x) = |x|^alpha` for any real exponent `alpha > 0`.
    Power { alpha: f64 },
    /// `F(x) = |x|^m` for an integer degree `m >= 2`.
    Monomial { m: u32 },
    /// The piecewise wave `F_a` driving the pendulum application, defined
    /// on `[-pi, pi]`. Odd around 0, peaks at `F(pi/2) = 1`, kinks for
    /// `a < 1` at `theta = ±pi/2`.
    PendulumWave { a: f64 },
}

/// Parameter nonlinearity `R(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamMap {
    /// `R(r) = r`.
    Identity,
    /// `R(r) = r^(2k)`, nonnegative on both sides of `r = 0`.
    EvenPower { k: u32 },
    /// `R(r) = exp(-2/r)` for `r > 0`, identically `0` for `r <= 0`.
    /// Smooth but flatter than any polynomial at `r = 0`.
    InverseSquareExp,
}

/// How the equilibrium pair behaves as `r` crosses zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BifurcationClass {
    /// `R` changes sign: two equilibria collide and annihilate.
    SaddleNode,
    /// `R >= 0` on both sides: the pair exists for no `r != 0` (or
    /// reappears on both sides), so the crossing is not a saddle-node
    /// even though the passage-time scaling may still be nontrivial.
    TopologicallyDegenerate,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("phase exponent must be positive and finite, got {0}")]
    InvalidExponent(f64),
    #[error("monomial degree must be at least 2, got {0}")]
    InvalidDegree(u32),
    #[error("even power must have k >= 1, got {0}")]
    InvalidEvenPower(u32),
    #[error("pendulum wave shape must be positive and finite, got {0}")]
    InvalidWaveShape(f64),
    #[error("argument must be finite, got {0}")]
    NonFinite(f64),
    #[error("angle {0} outside the pendulum wave domain [-pi, pi]")]
    DomainViolation(f64),
    #[error("fixed points have no closed form for the pendulum wave phase")]
    UnsupportedPhase,
    #[error("search box must be positive and finite, got {0}")]
    InvalidSearchBox(f64),
    #[error("unrecognized {kind} spec `{text}`")]
    Parse { kind: &'static str, text: String },
}

impl PhaseFn {
    pub fn power(alpha: f64) -> Result<Self, FieldError> {
        let p = PhaseFn::Power { alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn monomial(m: u32) -> Result<Self, FieldError> {
        let p = PhaseFn::Monomial { m };
        p.validate()?;
        Ok(p)
    }

    pub fn pendulum_wave(a: f64) -> Result<Self, FieldError> {
        let p = PhaseFn::PendulumWave { a };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        match *self {
            PhaseFn::Quadratic => Ok(()),
            PhaseFn::Power { alpha } => {
                if alpha.is_finite() && alpha > 0.0 {
                    Ok(())
                } else {
                    Err(FieldError::InvalidExponent(alpha))
                }
            }
            PhaseFn::Monomial { m } => {
                if m >= 2 {
                    Ok(())
                } else {
                    Err(FieldError::InvalidDegree(m))
                }
            }
            PhaseFn::PendulumWave { a } => {
                if a.is_finite() && a > 0.0 {
                    Ok(())
                } else {
                    Err(FieldError::InvalidWaveShape(a))
                }
            }
        }
    }

    /// Evaluate `F(x)`, checking the argument.
    pub fn eval(&self, x: f64) -> Result<f64, FieldError> {
        if !x.is_finite() {
            return Err(FieldError::NonFinite(x));
        }
        if let PhaseFn::PendulumWave { .. } = self {
            if x.abs() > std::f64::consts::PI {
                return Err(FieldError::DomainViolation(x));
            }
        }
        Ok(self.eval_raw(x))
    }

    /// Unchecked evaluation. The pendulum wave is extended periodically so
    /// integration stages may sample slightly past `±pi`.
    pub(crate) fn eval_raw(&self, x: f64) -> f64 {
        match *self {
            PhaseFn::Quadratic => x * x,
            PhaseFn::Power { alpha } => x.abs().powf(alpha),
            PhaseFn::Monomial { m } => x.abs().powi(m as i32),
            PhaseFn::PendulumWave { a } => crate::pendulum::wave_periodic(a, x),
        }
    }

    /// The homogeneity exponent of `F` near `x = 0`, where defined.
    pub(crate) fn exponent(&self) -> Option<f64> {
        match *self {
            PhaseFn::Quadratic => Some(2.0),
            PhaseFn::Power { alpha } => Some(alpha),
            PhaseFn::Monomial { m } => Some(f64::from(m)),
            PhaseFn::PendulumWave { .. } => None,
        }
    }

    /// Interior points where `F` attains a local rate minimum or loses
    /// smoothness. Used both as no-transit witnesses and as mandatory
    /// quadrature split points.
    pub(crate) fn critical_points(&self) -> &'static [f64] {
        const ORIGIN: [f64; 1] = [0.0];
        const WAVE: [f64; 3] = [
            -std::f64::consts::FRAC_PI_2,
            0.0,
            std::f64::consts::FRAC_PI_2,
        ];
        match self {
            PhaseFn::PendulumWave { .. } => &WAVE,
            _ => &ORIGIN,
        }
    }

    /// Admissible state interval, if the phase restricts one.
    pub(crate) fn domain(&self) -> Option<(f64, f64)> {
        match self {
            PhaseFn::PendulumWave { .. } => Some((-std::f64::consts::PI, std::f64::consts::PI)),
            _ => None,
        }
    }
}

impl ParamMap {
    pub fn even_power(k: u32) -> Result<Self, FieldError> {
        let p = ParamMap::EvenPower { k };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        match *self {
            ParamMap::EvenPower { k } if k < 1 => Err(FieldError::InvalidEvenPower(k)),
            _ => Ok(()),
        }
    }

    /// Evaluate `R(r)`, checking the argument.
    pub fn eval(&self, r: f64) -> Result<f64, FieldError> {
        if !r.is_finite() {
            return Err(FieldError::NonFinite(r));
        }
        Ok(self.eval_raw(r))
    }

    pub(crate) fn eval_raw(&self, r: f64) -> f64 {
        match *self {
            ParamMap::Identity => r,
            ParamMap::EvenPower { k } => r.powi(2 * k as i32),
            ParamMap::InverseSquareExp => {
                if r > 0.0 {
                    (-2.0 / r).exp()
                } else {
                    0.0
                }
            }
        }
    }
}

/// A one-dimensional field `rate(r, x) = R(r) + F(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorField1D {
    phase: PhaseFn,
    param: ParamMap,
}

impl VectorField1D {
    pub fn new(phase: PhaseFn, param: ParamMap) -> Result<Self, FieldError> {
        phase.validate()?;
        param.validate()?;
        Ok(VectorField1D { phase, param })
    }

    pub fn phase(&self) -> PhaseFn {
        self.phase
    }

    pub fn param(&self) -> ParamMap {
        self.param
    }

    /// `R(r) + F(x)` with argument checking.
    pub fn rate(&self, r: f64, x: f64) -> Result<f64, FieldError> {
        Ok(self.param.eval(r)? + self.phase.eval(x)?)
    }

    /// Rate as a closure over `x` for a fixed `r`, for the engines.
    pub(crate) fn rate_fn(&self, r: f64) -> impl Fn(f64) -> f64 + Copy + '_ {
        let big_r = self.param.eval_raw(r);
        let phase = self.phase;
        move |x| big_r + phase.eval_raw(x)
    }

    /// All equilibria in `[-search_box, search_box]`, ascending.
    ///
    /// Closed form: none for `R(r) > 0`, the single root `x = 0` for
    /// `R(r) = 0`, and the pair `±(-R)^(1/alpha)` for `R(r) < 0` where
    /// `alpha` is the phase exponent. The pendulum wave has no such form
    /// and is rejected.
    pub fn fixed_points(&self, r: f64, search_box: f64) -> Result<Vec<f64>, FieldError> {
        if !r.is_finite() {
            return Err(FieldError::NonFinite(r));
        }
        if !search_box.is_finite() || search_box <= 0.0 {
            return Err(FieldError::InvalidSearchBox(search_box));
        }
        let alpha = self.phase.exponent().ok_or(FieldError::UnsupportedPhase)?;
        let big_r = self.param.eval_raw(r);
        if big_r > 0.0 {
            return Ok(Vec::new());
        }
        if big_r == 0.0 {
            return Ok(vec![0.0]);
        }
        let root = match self.phase {
            PhaseFn::Quadratic => (-big_r).sqrt(),
            _ => (-big_r).powf(1.0 / alpha),
        };
        if root <= search_box {
            Ok(vec![-root, root])
        } else {
            Ok(Vec::new())
        }
    }

    /// Classify how the equilibrium pair is created or destroyed at `r = 0`.
    pub fn classify(&self) -> BifurcationClass {
        match self.param {
            ParamMap::Identity => BifurcationClass::SaddleNode,
            ParamMap::EvenPower { .. } | ParamMap::InverseSquareExp => {
                BifurcationClass::TopologicallyDegenerate
            }
        }
    }

    /// Check an interval against the phase domain and collect the interior
    /// checkpoints where the rate can attain its minimum.
    pub(crate) fn transit_checkpoints(&self, iv: Interval) -> Result<Vec<f64>, FieldError> {
        if let Some((lo, hi)) = self.phase.domain() {
            if iv.lo() < lo || iv.hi() > hi {
                let bad = if iv.lo() < lo { iv.lo() } else { iv.hi() };
                return Err(FieldError::DomainViolation(bad));
            }
        }
        Ok(self
            .phase
            .critical_points()
            .iter()
            .copied()
            .filter(|&p| p > iv.lo() && p < iv.hi())
            .collect())
    }
}

impl fmt::Display for PhaseFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PhaseFn::Quadratic => write!(f, "quadratic"),
            PhaseFn::Power { alpha } => write!(f, "power:{alpha}"),
            PhaseFn::Monomial { m } => write!(f, "monomial:{m}"),
            PhaseFn::PendulumWave { a } => write!(f, "pendulum:{a}"),
        }
    }
}

impl FromStr for PhaseFn {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_err = || FieldError::Parse {
            kind: "phase",
            text: s.to_string(),
        };
        if s == "quadratic" {
            return Ok(PhaseFn::Quadratic);
        }
        if let Some(v) = s.strip_prefix("power:") {
            let alpha: f64 = v.parse().map_err(|_| parse_err())?;
            return PhaseFn::power(alpha);
        }
        if let Some(v) = s.strip_prefix("monomial:") {
            let m: u32 = v.parse().map_err(|_| parse_err())?;
            return PhaseFn::monomial(m);
        }
        if let Some(v) = s.strip_prefix("pendulum:") {
            let a: f64 = v.parse().map_err(|_| parse_err())?;
            return PhaseFn::pendulum_wave(a);
        }
        Err(parse_err())
    }
}

impl fmt::Display for ParamMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ParamMap::Identity => write!(f, "identity"),
            ParamMap::EvenPower { k } => write!(f, "evenpower:{k}"),
            ParamMap::InverseSquareExp => write!(f, "invsqexp"),
        }
    }
}

impl FromStr for ParamMap {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(ParamMap::Identity),
            "invsqexp" => Ok(ParamMap::InverseSquareExp),
            _ => {
                if let Some(v) = s.strip_prefix("evenpower:") {
                    let k: u32 = v.parse().map_err(|_| FieldError::Parse {
                        kind: "param",
                        text: s.to_string(),
                    })?;
                    return ParamMap::even_power(k);
                }
                Err(FieldError::Parse {
                    kind: "param",
                    text: s.to_string(),
                })
            }
        }
    }
}

impl Serialize for PhaseFn {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PhaseFn {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

impl Serialize for ParamMap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ParamMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

impl Serialize for VectorField1D {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("VectorField1D", 2)?;
        st.serialize_field("phase", &self.phase)?;
        st.serialize_field("param", &self.param)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for VectorField1D {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            phase: PhaseFn,
            param: ParamMap,
        }
        let raw = Raw::deserialize(d)?;
        VectorField1D::new(raw.phase, raw.param).map_err(D::Error::custom)
    }
}
