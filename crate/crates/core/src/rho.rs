//! The volumetric penalty `rho`: zero up to a lift-off point, affine with
//! slope `gamma` beyond the knee `s0`, joined by a convex C^2 bridge.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Value and first two derivatives of `rho` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoValue {
    pub rho: f64,
    pub drho: f64,
    pub ddrho: f64,
}

/// Input record for [`build_rho`], as read from JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoConfig {
    pub gamma: f64,
    pub s0: f64,
    #[serde(default)]
    pub delay: f64,
}

/// Piecewise penalty with slope `gamma`, knee `s0`, lift-off `delay` and
/// derived offset `kappa`.
///
/// On `[delay, s0]` the second derivative is `30 gamma / L * t^2 (1-t)^2` with
/// `L = s0 - delay` and `t = (s - delay) / L`, which makes every junction C^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RhoConfig")]
pub struct RhoSpec {
    gamma: f64,
    s0: f64,
    delay: f64,
    kappa: f64,
}

impl TryFrom<RhoConfig> for RhoSpec {
    type Error = Error;
    fn try_from(c: RhoConfig) -> Result<Self> {
        build_rho(c.gamma, c.s0, c.delay)
    }
}

/// Validated constructor; `kappa` is derived so the affine tail continues the bridge.
pub fn build_rho(gamma: f64, s0: f64, delay: f64) -> Result<RhoSpec> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid(format!("gamma must be positive, got {gamma}")));
    }
    if !(delay >= 0.0) || !s0.is_finite() {
        return Err(invalid(format!("delay must be nonnegative, got {delay}")));
    }
    if !(delay < s0) {
        return Err(invalid(format!("delay ({delay}) must be below s0 ({s0})")));
    }
    // The bridge integrates to rho(s0) = gamma (s0 - delay) / 2.
    let kappa = -0.5 * gamma * (s0 + delay);
    Ok(RhoSpec {
        gamma,
        s0,
        delay,
        kappa,
    })
}

impl RhoSpec {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn config(&self) -> RhoConfig {
        RhoConfig {
            gamma: self.gamma,
            s0: self.s0,
            delay: self.delay,
        }
    }

    /// True when `rho(s) > 0` for every `s > 0`.
    pub fn is_immediate(&self) -> bool {
        self.delay == 0.0
    }

    /// `rho`, `rho'` and `rho''` at `s`.
    pub fn eval(&self, s: f64) -> RhoValue {
        if s <= self.delay {
            return RhoValue {
                rho: 0.0,
                drho: 0.0,
                ddrho: 0.0,
            };
        }
        if s >= self.s0 {
            return RhoValue {
                rho: self.gamma * s + self.kappa,
                drho: self.gamma,
                ddrho: 0.0,
            };
        }
        let len = self.s0 - self.delay;
        let t = (s - self.delay) / len;
        let t2 = t * t;
        let t3 = t2 * t;
        let u = 1.0 - t;
        RhoValue {
            rho: self.gamma * len * t2 * t2 * (2.5 - 3.0 * t + t2),
            drho: self.gamma * t3 * (10.0 - 15.0 * t + 6.0 * t2),
            ddrho: 30.0 * self.gamma / len * t2 * u * u,
        }
    }

    pub fn rho(&self, s: f64) -> f64 {
        self.eval(s).rho
    }

    pub fn drho(&self, s: f64) -> f64 {
        self.eval(s).drho
    }

    pub fn ddrho(&self, s: f64) -> f64 {
        self.eval(s).ddrho
    }

    /// `f(d) = d rho'(d) - rho(d)`.
    pub fn f_aux(&self, d: f64) -> f64 {
        let v = self.eval(d);
        d * v.drho - v.rho
    }
}

/// `rho`, `rho'`, `rho''` at `s`.
pub fn rho_eval(spec: &RhoSpec, s: f64) -> RhoValue {
    spec.eval(s)
}

/// `f(d) = d rho'(d) - rho(d)`.
pub fn f_aux(spec: &RhoSpec, d: f64) -> f64 {
    spec.f_aux(d)
}

impl Serialize for RhoSpecReport<'_> {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("RhoSpec", 4)?;
        st.serialize_field("gamma", &self.0.gamma)?;
        st.serialize_field("s0", &self.0.s0)?;
        st.serialize_field("delay", &self.0.delay)?;
        st.serialize_field("kappa", &self.0.kappa)?;
        st.end()
    }
}

/// Serialization wrapper that echoes the derived `kappa`.
pub struct RhoSpecReport<'a>(pub &'a RhoSpec);
