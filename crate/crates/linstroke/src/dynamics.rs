//! Stroke integration: the force balance as a first-order system, solved
//! with an adaptive Dormand-Prince 5(4) pair, plus detection of the first
//! `v = 0` event.
//!
//! The state is `(x, v)` with `x' = v`, `v' = net_force(x)/mass`, started
//! from rest at `x = 0`. The right cylinder pressure diverges as
//! `x → x_m`, so the integrator never evaluates the force inside a guard
//! band of width `guard_eps` next to either limit; a stroke that reaches
//! the band while still moving forward terminates as [`Termination::Overtravel`].

use crate::error::EngineError;
use crate::model::{net_force, EngineParams};

/// Tunables for the adaptive integrator and the event localizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Initial step size, s.
    pub dt_init: f64,
    /// Relative error tolerance of the embedded pair.
    pub rel_tol: f64,
    /// Absolute error tolerance of the embedded pair (state units).
    pub abs_tol: f64,
    /// Integration horizon, s.
    pub t_max: f64,
    /// Singularity guard width, m: forces are never evaluated at
    /// `x ≥ x_m − guard_eps` or `x ≤ −x_m + guard_eps`.
    pub guard_eps: f64,
    /// Localization tolerance for the `v = 0` event, in x, m.
    pub event_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt_init: 1e-6,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            t_max: 1.0,
            guard_eps: 1e-5,
            event_tol: 1e-9,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let positive = |name, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(EngineError::invalid(name, value, "must be strictly positive"))
            }
        };
        positive("dt_init", self.dt_init)?;
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        positive("t_max", self.t_max)?;
        positive("guard_eps", self.guard_eps)?;
        positive("event_tol", self.event_tol)?;
        Ok(())
    }

    /// Full validation against the geometry the config will be used with.
    pub fn validate_for(&self, p: &EngineParams) -> Result<(), EngineError> {
        self.validate()?;
        p.validate()?;
        if self.guard_eps >= (p.x_m - p.x_s) / 2.0 {
            return Err(EngineError::invalid(
                "guard_eps",
                self.guard_eps,
                "must be smaller than (x_m - x_s)/2",
            ));
        }
        Ok(())
    }
}

/// One accepted integration point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub v: f64,
    pub a: f64,
}

/// Time series of one simulated stroke. `t` is strictly increasing and
/// starts at `t = 0` with `x = v = 0`; `|x| < x_m` at every sample.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

/// Why a stroke simulation ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The velocity returned to zero at an interior position.
    PeakFound,
    /// The net force at rest is non-positive; the piston never starts.
    NoMotion,
    /// The piston reached the guard band at `x_m − guard_eps` still moving
    /// forward; `x_max` is reported as the band edge.
    Overtravel,
    /// No event before `t_max`.
    HorizonExceeded,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::PeakFound => "peak_found",
            Termination::NoMotion => "no_motion",
            Termination::Overtravel => "overtravel",
            Termination::HorizonExceeded => "horizon_exceeded",
        }
    }
}

/// Result of simulating one left-to-right stroke.
#[derive(Debug, Clone, PartialEq)]
pub struct StrokeResult {
    /// Displacement at the event (or the reported substitute, see
    /// [`Termination`]), m.
    pub x_max: f64,
    /// Time of the event, s.
    pub t_peak: f64,
    pub trajectory: Trajectory,
    pub termination: Termination,
}

// Dormand-Prince 5(4) tableau. The force field is autonomous, so the stage
// abscissae never enter the evaluations.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Error coefficients: 5th-order weights minus the embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense-output coefficients (4th-order interpolant).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const MAX_STEPS: usize = 2_000_000;

enum StageFailure {
    /// A stage position entered a guard band; the step must shrink.
    Guard,
    Engine(EngineError),
}

struct OdeField<'a> {
    p: &'a EngineParams,
    x_lo: f64,
    x_hi: f64,
}

impl OdeField<'_> {
    fn accel(&self, x: f64) -> Result<f64, StageFailure> {
        if x <= self.x_lo || x >= self.x_hi {
            return Err(StageFailure::Guard);
        }
        match net_force(x, self.p) {
            Ok(f) => Ok(f.net / self.p.mass),
            Err(e) => Err(StageFailure::Engine(e)),
        }
    }

    fn eval(&self, y: [f64; 2]) -> Result<[f64; 2], StageFailure> {
        Ok([y[1], self.accel(y[0])?])
    }
}

struct StepOutcome {
    y1: [f64; 2],
    err: f64,
    k: [[f64; 2]; 7],
}

fn attempt_step(
    field: &OdeField,
    y: [f64; 2],
    k1: [f64; 2],
    h: f64,
    cfg: &IntegratorConfig,
) -> Result<StepOutcome, StageFailure> {
    let lin = |coeffs: &[(f64, [f64; 2])]| {
        let mut out = y;
        for &(c, k) in coeffs {
            out[0] += h * c * k[0];
            out[1] += h * c * k[1];
        }
        out
    };

    let k2 = field.eval(lin(&[(A21, k1)]))?;
    let k3 = field.eval(lin(&[(A31, k1), (A32, k2)]))?;
    let k4 = field.eval(lin(&[(A41, k1), (A42, k2), (A43, k3)]))?;
    let k5 = field.eval(lin(&[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]))?;
    let k6 = field.eval(lin(&[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]))?;
    let y1 = lin(&[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)]);
    // FSAL: the last stage is the derivative at the step end.
    let k7 = field.eval(y1)?;

    let mut err_sq = 0.0;
    for i in 0..2 {
        let e = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y1[i].abs());
        err_sq += (e / scale) * (e / scale);
    }
    let err = (err_sq / 2.0).sqrt();

    Ok(StepOutcome {
        y1,
        err,
        k: [k1, k2, k3, k4, k5, k6, k7],
    })
}

/// Dense-output interpolant over one accepted step, evaluable at any
/// `t ∈ [t0, t0 + h]` without further force evaluations.
struct DenseStep {
    t0: f64,
    h: f64,
    y0: [f64; 2],
    dy: [f64; 2],
    r3: [f64; 2],
    r4: [f64; 2],
    r5: [f64; 2],
}

impl DenseStep {
    fn new(t0: f64, h: f64, y0: [f64; 2], y1: [f64; 2], k: &[[f64; 2]; 7]) -> Self {
        let mut dy = [0.0; 2];
        let mut r3 = [0.0; 2];
        let mut r4 = [0.0; 2];
        let mut r5 = [0.0; 2];
        for i in 0..2 {
            dy[i] = y1[i] - y0[i];
            r3[i] = h * k[0][i] - dy[i];
            r4[i] = dy[i] - h * k[6][i] - r3[i];
            r5[i] = h
                * (D1 * k[0][i]
                    + D3 * k[2][i]
                    + D4 * k[3][i]
                    + D5 * k[4][i]
                    + D6 * k[5][i]
                    + D7 * k[6][i]);
        }
        Self {
            t0,
            h,
            y0,
            dy,
            r3,
            r4,
            r5,
        }
    }

    fn eval(&self, t: f64) -> (f64, f64) {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let comp = |i: usize| {
            self.y0[i] + th * (self.dy[i] + th1 * (self.r3[i] + th * (self.r4[i] + th1 * self.r5[i])))
        };
        (comp(0), comp(1))
    }
}

/// One end of an event bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketPoint {
    pub t: f64,
    pub x: f64,
    pub v: f64,
}

fn bracket_uncertainty(lo: &BracketPoint, hi: &BracketPoint) -> f64 {
    // The bracket may contain the displacement peak, so the x spread alone
    // underestimates the uncertainty; bound the interior excursion by
    // half the time width times the larger endpoint speed.
    let spread = (hi.x - lo.x).abs();
    let excursion = 0.5 * (hi.t - lo.t) * lo.v.abs().max(hi.v.abs());
    spread.max(excursion)
}

/// Refines a `v = 0` crossing on a dense output until the x-uncertainty is
/// at most `event_tol`, returning `(t_peak, x_max)`.
///
/// `dense` maps `t` to `(x, v)` on the bracketing step. The bracket must go
/// from `v > 0` at `lo` to `v ≤ 0` at `hi`; a bracket already within
/// tolerance is accepted as-is (the endpoint with the smaller `|v|` wins).
pub fn locate_event<F>(
    dense: F,
    lo: BracketPoint,
    hi: BracketPoint,
    event_tol: f64,
) -> Result<(f64, f64), EngineError>
where
    F: Fn(f64) -> (f64, f64),
{
    let valid = lo.v > 0.0 && hi.v <= 0.0 && hi.t > lo.t;
    if !valid {
        return Err(EngineError::InvalidBracket {
            v_lo: lo.v,
            v_hi: hi.v,
        });
    }
    if bracket_uncertainty(&lo, &hi) <= event_tol {
        return if hi.v.abs() <= lo.v.abs() {
            Ok((hi.t, hi.x))
        } else {
            Ok((lo.t, lo.x))
        };
    }

    let mut lo = lo;
    let mut hi = hi;
    // Refine past the x tolerance down to ~1e-12 relative in t; the event
    // time is what downstream mass-scaling checks consume, and dense-output
    // bisection costs no force evaluations.
    let t_floor = 1e-12 * hi.t.abs().max(1e-9);
    for _ in 0..256 {
        let within_x = bracket_uncertainty(&lo, &hi) <= event_tol;
        let within_t = (hi.t - lo.t) <= t_floor;
        if within_x && within_t {
            break;
        }
        let mid = 0.5 * (lo.t + hi.t);
        if mid <= lo.t || mid >= hi.t {
            break; // no representable interior point left
        }
        let (x, v) = dense(mid);
        let point = BracketPoint { t: mid, x, v };
        if v == 0.0 {
            return Ok((mid, x));
        }
        if v > 0.0 {
            lo = point;
        } else {
            hi = point;
        }
    }
    // Final secant on v across the remaining bracket.
    let t_hit = lo.t + (hi.t - lo.t) * lo.v / (lo.v - hi.v);
    let (x_hit, _) = dense(t_hit);
    Ok((t_hit, x_hit))
}

/// Integrates one left-to-right stroke from rest at `x = 0` and reports the
/// first velocity zero crossing.
///
/// If the net force at rest is non-positive the piston never starts and the
/// result is [`Termination::NoMotion`] with `x_max = 0`. Otherwise the
/// stroke either peaks ([`Termination::PeakFound`], event localized to
/// within `event_tol` in x), reaches the guard band while still moving
/// forward ([`Termination::Overtravel`], `x_max` reported as
/// `x_m − guard_eps`), or runs out of horizon.
pub fn simulate_stroke(
    p: &EngineParams,
    cfg: &IntegratorConfig,
) -> Result<StrokeResult, EngineError> {
    cfg.validate_for(p)?;
    let x_hi = p.x_m - cfg.guard_eps;
    let x_lo = -p.x_m + cfg.guard_eps;
    let field = OdeField { p, x_lo, x_hi };

    let a0 = net_force(0.0, p)?.net / p.mass;
    let start = Sample {
        t: 0.0,
        x: 0.0,
        v: 0.0,
        a: a0,
    };
    if a0 <= 0.0 {
        return Ok(StrokeResult {
            x_max: 0.0,
            t_peak: 0.0,
            trajectory: Trajectory {
                samples: vec![start],
            },
            termination: Termination::NoMotion,
        });
    }

    let mut t = 0.0_f64;
    let mut y = [0.0_f64, 0.0_f64];
    let mut k1 = [0.0, a0];
    let mut h = cfg.dt_init;
    let mut samples = vec![start];

    let finish = |samples: Vec<Sample>, x_max: f64, t_peak: f64, termination: Termination| {
        Ok(StrokeResult {
            x_max,
            t_peak,
            trajectory: Trajectory { samples },
            termination,
        })
    };

    for _ in 0..MAX_STEPS {
        let step_floor = 1e-14 * t.max(cfg.dt_init) + 4.0 * t * f64::EPSILON;

        // Horizon: nothing meaningful left to integrate.
        if cfg.t_max - t <= step_floor {
            let last = *samples.last().expect("trajectory is never empty");
            return finish(samples, last.x, last.t, Termination::HorizonExceeded);
        }

        // Forward motion towards the right guard band: cap the step so no
        // stage can jump past the band. When the cap itself underflows the
        // piston has effectively reached the band edge (the accepted samples
        // approach it geometrically, so the last one already sits within
        // rounding of x_m − guard_eps).
        if y[1] > 0.0 {
            let gap = x_hi - y[0];
            let cap = 0.9 * gap / y[1];
            if cap <= step_floor {
                return finish(samples, x_hi, t, Termination::Overtravel);
            }
            h = h.min(cap);
        }
        h = h.min(cfg.t_max - t);

        if h <= step_floor {
            return Err(EngineError::StepUnderflow { t, x: y[0] });
        }

        let outcome = match attempt_step(&field, y, k1, h, cfg) {
            Ok(outcome) => outcome,
            Err(StageFailure::Guard) => {
                h *= 0.5;
                continue;
            }
            Err(StageFailure::Engine(e)) => return Err(e),
        };

        if outcome.err > 1.0 {
            h *= (SAFETY * outcome.err.powf(-0.2)).clamp(FAC_MIN, 0.9);
            continue;
        }

        let t1 = t + h;
        let y1 = outcome.y1;

        // The first accepted step must leave the rest state moving forward;
        // otherwise the peak would be unresolvable inside a single step.
        if t == 0.0 && y1[1] <= 0.0 {
            h *= 0.5;
            continue;
        }

        if y[1] > 0.0 && y1[1] <= 0.0 {
            // Event inside this step: refine on the dense output.
            let dense = DenseStep::new(t, h, y, y1, &outcome.k);
            let (t_peak, x_max) = locate_event(
                |tq| dense.eval(tq),
                BracketPoint {
                    t,
                    x: y[0],
                    v: y[1],
                },
                BracketPoint {
                    t: t1,
                    x: y1[0],
                    v: y1[1],
                },
                cfg.event_tol,
            )?;
            let (_, v_peak) = dense.eval(t_peak);
            let a_peak = net_force(x_max, p)?.net / p.mass;
            samples.push(Sample {
                t: t_peak,
                x: x_max,
                v: v_peak,
                a: a_peak,
            });
            return finish(samples, x_max, t_peak, Termination::PeakFound);
        }

        samples.push(Sample {
            t: t1,
            x: y1[0],
            v: y1[1],
            a: outcome.k[6][1],
        });
        t = t1;
        y = y1;
        k1 = outcome.k[6];
        h *= (SAFETY * outcome.err.max(1e-300).powf(-0.2)).clamp(FAC_MIN, FAC_MAX);
    }

    Err(EngineError::StepUnderflow { t, x: y[0] })
}
