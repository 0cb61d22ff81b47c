//! Physical parameters and the position-dependent force field.
//!
//! Both cylinders follow a polytropic law `P·V^n = const`, so each pressure
//! is a reference value times a volume ratio raised to `n`. With the piston
//! at displacement `x` (positive left-to-right) the left gas column has
//! length `x_m + x` and the right one `x_m − x`, where `x_m` is the
//! geometric half-stroke limit at which a cylinder volume would vanish.
//! All forces depend on `x` only, which is what makes the closed-form work
//! integral an exact energy oracle for the dynamics.

use crate::error::EngineError;

/// Physical description of the engine. Strict SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineParams {
    /// Left-cylinder reference pressure, Pa. The left pressure equals this
    /// value exactly at `x = 0`.
    pub p1_left: f64,
    /// Right-cylinder reference pressure, Pa, referenced to the piston at
    /// `x = −x_s` (where the right volume ratio is exactly 1).
    pub p1_right: f64,
    /// Heat added per cycle, J.
    pub q_in: f64,
    /// Design half-stroke, m: the piston should traverse from `−x_s` to `+x_s`.
    pub x_s: f64,
    /// Maximum theoretical half-stroke, m: pressures diverge as `|x| → x_m`.
    pub x_m: f64,
    /// Combustion-cylinder bore, m.
    pub bore_left: f64,
    /// Kickback bore scale; the kickback bore is `lambda · bore_left`.
    pub lambda: f64,
    /// Polytropic exponent, dimensionless, > 1.
    pub n_poly: f64,
    /// Slider mass, kg.
    pub mass: f64,
    /// Constant-magnitude friction force, N, opposing the motion. For the
    /// left-to-right stroke simulated here it acts as a constant `−friction`.
    pub friction: f64,
}

impl EngineParams {
    /// Kickback bore, m (derived, not stored).
    pub fn bore_right(&self) -> f64 {
        self.lambda * self.bore_left
    }

    /// Same parameters with a different bore scale.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..*self }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let finite = |name, value: f64| {
            if value.is_finite() {
                Ok(())
            } else {
                Err(EngineError::invalid(name, value, "must be finite"))
            }
        };
        finite("p1_left", self.p1_left)?;
        finite("p1_right", self.p1_right)?;
        finite("q_in", self.q_in)?;
        finite("x_s", self.x_s)?;
        finite("x_m", self.x_m)?;
        finite("bore_left", self.bore_left)?;
        finite("lambda", self.lambda)?;
        finite("n_poly", self.n_poly)?;
        finite("mass", self.mass)?;
        finite("friction", self.friction)?;

        if self.p1_left <= 0.0 {
            return Err(EngineError::invalid(
                "p1_left",
                self.p1_left,
                "must be positive",
            ));
        }
        if self.p1_right <= 0.0 {
            return Err(EngineError::invalid(
                "p1_right",
                self.p1_right,
                "must be positive",
            ));
        }
        if self.q_in < 0.0 {
            return Err(EngineError::invalid(
                "q_in",
                self.q_in,
                "must be non-negative",
            ));
        }
        if self.x_s <= 0.0 {
            return Err(EngineError::invalid("x_s", self.x_s, "must be positive"));
        }
        if self.x_m <= self.x_s {
            return Err(EngineError::invalid(
                "x_m",
                self.x_m,
                "must exceed the design half-stroke x_s",
            ));
        }
        if self.bore_left <= 0.0 {
            return Err(EngineError::invalid(
                "bore_left",
                self.bore_left,
                "must be positive",
            ));
        }
        if self.lambda <= 0.0 {
            return Err(EngineError::invalid(
                "lambda",
                self.lambda,
                "must be positive",
            ));
        }
        if self.n_poly <= 1.0 {
            return Err(EngineError::invalid(
                "n_poly",
                self.n_poly,
                "must exceed 1 (the work integral divides by n - 1)",
            ));
        }
        if self.mass <= 0.0 {
            return Err(EngineError::invalid("mass", self.mass, "must be positive"));
        }
        if self.friction < 0.0 {
            return Err(EngineError::invalid(
                "friction",
                self.friction,
                "must be non-negative",
            ));
        }
        Ok(())
    }
}

/// The four force components acting on the piston at one position, N.
///
/// `net` is always the signed sum
/// `left_pressure_force − right_pressure_force + heat_force − friction_force`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceBreakdown {
    pub left_pressure_force: f64,
    pub right_pressure_force: f64,
    pub heat_force: f64,
    pub friction_force: f64,
    pub net: f64,
}

/// Piston face area `π·bore²/4`, m².
pub fn piston_area(bore: f64) -> Result<f64, EngineError> {
    if !bore.is_finite() || bore <= 0.0 {
        return Err(EngineError::invalid("bore", bore, "must be positive"));
    }
    Ok(std::f64::consts::PI * bore * bore / 4.0)
}

/// Left (combustion-side) cylinder pressure at displacement `x`, Pa.
///
/// `p1_left · (x_m / (x_m + x))^n`; strictly decreasing in `x`, equal to
/// `p1_left` exactly at `x = 0`. Defined for `x > −x_m` (the left volume
/// must stay positive).
pub fn pressure_left(x: f64, p: &EngineParams) -> Result<f64, EngineError> {
    if !x.is_finite() || x <= -p.x_m {
        return Err(EngineError::OutOfDomain {
            x,
            lo: -p.x_m,
            hi: f64::INFINITY,
        });
    }
    Ok(p.p1_left * (p.x_m / (p.x_m + x)).powf(p.n_poly))
}

/// Right (kickback-side) cylinder pressure at displacement `x`, Pa.
///
/// `p1_right · ((x_m + x_s) / (x_m − x))^n`; strictly increasing in `x`,
/// equal to `p1_right` exactly at `x = −x_s`. Defined for `x < x_m`.
pub fn pressure_right(x: f64, p: &EngineParams) -> Result<f64, EngineError> {
    if !x.is_finite() || x >= p.x_m {
        return Err(EngineError::OutOfDomain {
            x,
            lo: f64::NEG_INFINITY,
            hi: p.x_m,
        });
    }
    Ok(p.p1_right * ((p.x_m + p.x_s) / (p.x_m - x)).powf(p.n_poly))
}

fn check_open_interval(x: f64, p: &EngineParams) -> Result<(), EngineError> {
    if !x.is_finite() || x <= -p.x_m || x >= p.x_m {
        return Err(EngineError::OutOfDomain {
            x,
            lo: -p.x_m,
            hi: p.x_m,
        });
    }
    Ok(())
}

/// Net force on the piston at displacement `x` for a left-to-right stroke.
///
/// The kickback pressure force carries the `λ²` bore-area scaling; the heat
/// term is `q_in·(n−1)·(x_m−x_s)^{n−1}/(x_m+x)^n`; friction enters with
/// constant magnitude opposing the forward motion. Valid on the open
/// interval `(−x_m, x_m)`.
pub fn net_force(x: f64, p: &EngineParams) -> Result<ForceBreakdown, EngineError> {
    check_open_interval(x, p)?;
    let area = std::f64::consts::PI * p.bore_left * p.bore_left / 4.0;
    let left = pressure_left(x, p)? * area;
    let right = p.lambda * p.lambda * pressure_right(x, p)? * area;
    let heat =
        p.q_in * (p.n_poly - 1.0) * (p.x_m - p.x_s).powf(p.n_poly - 1.0) / (p.x_m + x).powf(p.n_poly);
    let friction = p.friction;
    Ok(ForceBreakdown {
        left_pressure_force: left,
        right_pressure_force: right,
        heat_force: heat,
        friction_force: friction,
        net: left - right + heat - friction,
    })
}

/// Piston acceleration `net_force(x)/mass`, m/s².
pub fn acceleration(x: f64, p: &EngineParams) -> Result<f64, EngineError> {
    Ok(net_force(x, p)?.net / p.mass)
}

/// Work done by the net force from `0` to `x`, J (closed form).
///
/// Each pressure/heat term integrates to a `(x_m ± x)^{1−n}` expression and
/// friction contributes `−friction·x`. Because the force field depends on
/// position only, `work_integral(x)` equals the kinetic energy the slider
/// has at `x` when released from rest at `0`, so its first positive root is
/// `x_max`. Valid for `0 ≤ x < x_m`; `work_integral(0) = 0` and
/// `dW/dx = net_force(x).net`.
pub fn work_integral(x: f64, p: &EngineParams) -> Result<f64, EngineError> {
    if !x.is_finite() || x < 0.0 || x >= p.x_m {
        return Err(EngineError::OutOfDomain {
            x,
            lo: 0.0,
            hi: p.x_m,
        });
    }
    let area = std::f64::consts::PI * p.bore_left * p.bore_left / 4.0;
    let n = p.n_poly;
    let om = 1.0 - n;
    let xm = p.x_m;
    let xs = p.x_s;

    // ∫ (x_m + u)^{-n} du over [0, x], positive for x > 0.
    let grow = (xm.powf(om) - (xm + x).powf(om)) / (n - 1.0);
    // ∫ (x_m - u)^{-n} du over [0, x], positive for x > 0.
    let shrink = ((xm - x).powf(om) - xm.powf(om)) / (n - 1.0);

    let left = p.p1_left * area * xm.powf(n) * grow;
    let right = p.lambda * p.lambda * p.p1_right * area * (xm + xs).powf(n) * shrink;
    let heat = p.q_in * (xm - xs).powf(n - 1.0) * (n - 1.0) * grow;
    let friction = p.friction * x;
    Ok(left - right + heat - friction)
}
