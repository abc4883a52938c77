//! Catalog of density fields ρ(x,t) with sign-region predicates and
//! singular-set geometry.
//!
//! Each variant owns its defining formula, the closed-form sign
//! classification, and the geometry of the set where |ρ| diverges. Two
//! evaluation paths exist on purpose:
//!
//! - [`DensityField::eval`] is the analysis path: exact values inside the
//!   field's domain, an error on the singular set.
//! - [`DensityField::eval_clamped`] is the integration path: total on ℝⁿ,
//!   magnitude-clamped, and continued past the singular set with the sign of
//!   the one-sided limit so the barrier keeps pushing in the same direction
//!   even when a Runge–Kutta stage oversteps the wall.

use crate::signal::TimeSignal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DensityError {
    #[error("singular evaluation on {set}")]
    SingularEvaluation { set: &'static str },
}

/// Closed-form sign classification of ρ at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignRegion {
    Positive,
    Negative,
    Zero,
    /// On the singular set or outside the open domain of the formula.
    Singular,
}

impl SignRegion {
    pub fn of(v: f64) -> SignRegion {
        if v > 0.0 {
            SignRegion::Positive
        } else if v < 0.0 {
            SignRegion::Negative
        } else {
            SignRegion::Zero
        }
    }
}

/// sign(v) with sign(0) = 0 (Filippov convex-selection midpoint).
pub fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// One obstacle term `ln(|x₁−c₁|^q + |x₂−c₂|^q − b)` of an obstacle field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleTerm {
    pub center: (f64, f64),
    pub exponent: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityField {
    /// ρ = α
    Constant { alpha: f64 },
    /// ρ = α / (b(t) − |x|), defined on |x| < b(t)
    Funnel { alpha: f64, b: TimeSignal },
    /// ρ = α·(x − z(t))·sign(x)
    SignShift { alpha: f64, z: TimeSignal },
    /// ρ = −α·ln((b̄ − x)/(x − b̲)), the plant-side tube barrier: positive
    /// above the midline so that −ρx pushes back toward it.
    LogRatio { alpha: f64, b_hi: TimeSignal, b_lo: TimeSignal },
    /// ρ = α·ln((b̄ − y)/(y − b̲)), the controller-side tube barrier used
    /// additively (u = … + τρ): negative above the midline. Kept distinct
    /// from [`DensityField::LogRatio`] because the D₊/D₋ algebra flips.
    LogRatioControl { alpha: f64, b_hi: TimeSignal, b_lo: TimeSignal },
    /// ρ = α·ln((b − y)/(b + y)), symmetric tube barrier on |y| < b
    LogSym { alpha: f64, b: TimeSignal },
    /// ρ = −α·y
    Linear { alpha: f64 },
    /// ρ = −α·(y − z(t))
    LinearTrack { alpha: f64, z: TimeSignal },
    /// ρ = −α·ln(y − b(t)), defined on y > b: a one-sided sliding barrier
    LogSurface { alpha: f64, b: TimeSignal },
    /// ρ = ln((b̄ − s)/(s − b̲)) with s = |x₁|^q + |x₂|^q, on b̲ < s < b̄
    AnnulusLog { q: f64, b_hi: TimeSignal, b_lo: TimeSignal },
    /// ρ = Σᵢ ln(|x₁−x₁ᵢ|^{qᵢ} + |x₂−x₂ᵢ|^{qᵢ} − bᵢ)
    ObstacleLog { terms: Vec<ObstacleTerm> },
    /// ρ = α·ln(|x₁|^q + |x₂|^q − 1), on s > 1
    NormLog { alpha: f64, q: f64 },
    /// ρ = σ·e^{(x₁²+x₂²−1)^{−e}}, on r² > 1
    ExpBarrier {
        sigma: f64,
        #[serde(default = "default_barrier_exponent")]
        exponent: f64,
    },
    /// ρ = σ·ln(x₁²+x₂²−1), on r² > 1
    DiskLog { sigma: f64 },
}

fn default_barrier_exponent() -> f64 {
    0.98
}

/// Raw evaluation outcome: a finite in-domain value, or the sign of the
/// one-sided limit when the point lies on or beyond the singular set.
enum Raw {
    Value(f64),
    Outside { limit_sign: f64, set: &'static str },
}

impl DensityField {
    /// State dimension the field acts on.
    pub fn dim(&self) -> usize {
        match self {
            DensityField::AnnulusLog { .. }
            | DensityField::ObstacleLog { .. }
            | DensityField::NormLog { .. }
            | DensityField::ExpBarrier { .. }
            | DensityField::DiskLog { .. } => 2,
            _ => 1,
        }
    }

    fn raw(&self, x: &[f64], t: f64) -> Raw {
        match self {
            DensityField::Constant { alpha } => Raw::Value(*alpha),
            DensityField::Funnel { alpha, b } => {
                let gap = b.eval(t) - x[0].abs();
                if gap > 0.0 {
                    Raw::Value(alpha / gap)
                } else {
                    Raw::Outside { limit_sign: sign0(*alpha), set: "|x| = b(t)" }
                }
            }
            DensityField::SignShift { alpha, z } => {
                Raw::Value(alpha * (x[0] - z.eval(t)) * sign0(x[0]))
            }
            DensityField::LogRatio { alpha, b_hi, b_lo } => {
                match tube_ratio(x[0], b_hi.eval(t), b_lo.eval(t)) {
                    TubeSide::Inside(r) => Raw::Value(-alpha * r.ln()),
                    TubeSide::AtOrAbove => {
                        Raw::Outside { limit_sign: sign0(*alpha), set: "x = b_hi(t)" }
                    }
                    TubeSide::AtOrBelow => {
                        Raw::Outside { limit_sign: -sign0(*alpha), set: "x = b_lo(t)" }
                    }
                }
            }
            DensityField::LogRatioControl { alpha, b_hi, b_lo } => {
                match tube_ratio(x[0], b_hi.eval(t), b_lo.eval(t)) {
                    TubeSide::Inside(r) => Raw::Value(alpha * r.ln()),
                    TubeSide::AtOrAbove => {
                        Raw::Outside { limit_sign: -sign0(*alpha), set: "y = b_hi(t)" }
                    }
                    TubeSide::AtOrBelow => {
                        Raw::Outside { limit_sign: sign0(*alpha), set: "y = b_lo(t)" }
                    }
                }
            }
            DensityField::LogSym { alpha, b } => {
                let b = b.eval(t);
                match tube_ratio(x[0], b, -b) {
                    TubeSide::Inside(r) => Raw::Value(alpha * r.ln()),
                    TubeSide::AtOrAbove => {
                        Raw::Outside { limit_sign: -sign0(*alpha), set: "y = b(t)" }
                    }
                    TubeSide::AtOrBelow => {
                        Raw::Outside { limit_sign: sign0(*alpha), set: "y = -b(t)" }
                    }
                }
            }
            DensityField::Linear { alpha } => Raw::Value(-alpha * x[0]),
            DensityField::LinearTrack { alpha, z } => Raw::Value(-alpha * (x[0] - z.eval(t))),
            DensityField::LogSurface { alpha, b } => {
                let gap = x[0] - b.eval(t);
                if gap > 0.0 {
                    Raw::Value(-alpha * gap.ln())
                } else {
                    Raw::Outside { limit_sign: sign0(*alpha), set: "y = b(t)" }
                }
            }
            DensityField::AnnulusLog { q, b_hi, b_lo } => {
                let s = lq_sum(x[0], x[1], *q);
                let (hi, lo) = (b_hi.eval(t), b_lo.eval(t));
                if s >= hi {
                    Raw::Outside { limit_sign: -1.0, set: "|x1|^q + |x2|^q = b_hi" }
                } else if s <= lo {
                    Raw::Outside { limit_sign: 1.0, set: "|x1|^q + |x2|^q = b_lo" }
                } else {
                    Raw::Value(((hi - s) / (s - lo)).ln())
                }
            }
            DensityField::ObstacleLog { terms } => {
                let mut sum = 0.0;
                for term in terms {
                    let s = lq_sum(x[0] - term.center.0, x[1] - term.center.1, term.exponent);
                    let gap = s - term.offset;
                    if gap <= 0.0 {
                        return Raw::Outside {
                            limit_sign: -1.0,
                            set: "|x1-c1|^q + |x2-c2|^q = b_i",
                        };
                    }
                    sum += gap.ln();
                }
                Raw::Value(sum)
            }
            DensityField::NormLog { alpha, q } => {
                let gap = lq_sum(x[0], x[1], *q) - 1.0;
                if gap > 0.0 {
                    Raw::Value(alpha * gap.ln())
                } else {
                    Raw::Outside { limit_sign: -sign0(*alpha), set: "|x1|^q + |x2|^q = 1" }
                }
            }
            DensityField::ExpBarrier { sigma, exponent } => {
                let gap = x[0] * x[0] + x[1] * x[1] - 1.0;
                if gap > 0.0 {
                    Raw::Value(sigma * gap.powf(-exponent).exp())
                } else {
                    Raw::Outside { limit_sign: *sigma, set: "x1^2 + x2^2 = 1" }
                }
            }
            DensityField::DiskLog { sigma } => {
                let gap = x[0] * x[0] + x[1] * x[1] - 1.0;
                if gap > 0.0 {
                    Raw::Value(sigma * gap.ln())
                } else {
                    Raw::Outside { limit_sign: -sigma, set: "x1^2 + x2^2 = 1" }
                }
            }
        }
    }

    /// Exact formula value; errors on the singular set / outside the open
    /// domain. This is the analysis path — no clamping.
    pub fn eval(&self, x: &[f64], t: f64) -> Result<f64, DensityError> {
        debug_assert_eq!(x.len(), self.dim());
        match self.raw(x, t) {
            Raw::Value(v) => Ok(v),
            Raw::Outside { set, .. } => Err(DensityError::SingularEvaluation { set }),
        }
    }

    /// Total evaluation for the integration path: in-domain values clamped
    /// to [−m, m], out-of-domain points continued with ±m in the direction
    /// of the one-sided limit.
    pub fn eval_clamped(&self, x: &[f64], t: f64, m: f64) -> f64 {
        match self.raw(x, t) {
            Raw::Value(v) => v.clamp(-m, m),
            Raw::Outside { limit_sign, .. } => limit_sign * m,
        }
    }

    /// Sign classification from the closed-form inequalities of each
    /// variant (zero loci included), never from a clamped value.
    pub fn sign_region(&self, x: &[f64], t: f64) -> SignRegion {
        match self {
            DensityField::Constant { alpha } => SignRegion::of(*alpha),
            DensityField::SignShift { alpha, z } => {
                SignRegion::of(alpha * (x[0] - z.eval(t)) * sign0(x[0]))
            }
            DensityField::Linear { alpha } => SignRegion::of(-alpha * x[0]),
            DensityField::LinearTrack { alpha, z } => {
                SignRegion::of(-alpha * (x[0] - z.eval(t)))
            }
            DensityField::Funnel { alpha, b } => {
                if x[0].abs() < b.eval(t) {
                    SignRegion::of(*alpha)
                } else {
                    SignRegion::Singular
                }
            }
            DensityField::LogRatio { alpha, b_hi, b_lo } => {
                let (hi, lo) = (b_hi.eval(t), b_lo.eval(t));
                if x[0] <= lo || x[0] >= hi {
                    SignRegion::Singular
                } else {
                    // positive above the midline z = (b̄+b̲)/2
                    SignRegion::of(alpha * (x[0] - 0.5 * (hi + lo)))
                }
            }
            DensityField::LogRatioControl { alpha, b_hi, b_lo } => {
                let (hi, lo) = (b_hi.eval(t), b_lo.eval(t));
                if x[0] <= lo || x[0] >= hi {
                    SignRegion::Singular
                } else {
                    SignRegion::of(alpha * (0.5 * (hi + lo) - x[0]))
                }
            }
            DensityField::LogSym { alpha, b } => {
                let b = b.eval(t);
                if x[0].abs() >= b {
                    SignRegion::Singular
                } else {
                    SignRegion::of(-alpha * x[0])
                }
            }
            DensityField::LogSurface { alpha, b } => {
                let gap = x[0] - b.eval(t);
                if gap <= 0.0 {
                    SignRegion::Singular
                } else {
                    SignRegion::of(alpha * (1.0 - gap))
                }
            }
            DensityField::AnnulusLog { q, b_hi, b_lo } => {
                let s = lq_sum(x[0], x[1], *q);
                let (hi, lo) = (b_hi.eval(t), b_lo.eval(t));
                if s <= lo || s >= hi {
                    SignRegion::Singular
                } else {
                    SignRegion::of(0.5 * (hi + lo) - s)
                }
            }
            DensityField::ObstacleLog { .. } => match self.raw(x, t) {
                Raw::Value(v) => SignRegion::of(v),
                Raw::Outside { .. } => SignRegion::Singular,
            },
            DensityField::NormLog { alpha, q } => {
                let s = lq_sum(x[0], x[1], *q);
                if s <= 1.0 {
                    SignRegion::Singular
                } else {
                    SignRegion::of(alpha * (s - 2.0))
                }
            }
            DensityField::ExpBarrier { sigma, .. } => {
                if x[0] * x[0] + x[1] * x[1] <= 1.0 {
                    SignRegion::Singular
                } else {
                    SignRegion::of(*sigma)
                }
            }
            DensityField::DiskLog { sigma } => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                if r2 <= 1.0 {
                    SignRegion::Singular
                } else {
                    SignRegion::of(sigma * (r2 - 2.0))
                }
            }
        }
    }

    /// Euclidean distance from `x` to the singular set at time `t`;
    /// +∞ for fields without one. Exact for lines, circles and ℓ₁ balls;
    /// a parametric projection estimate (relative error ≤ 1e-3) otherwise.
    pub fn singular_distance(&self, x: &[f64], t: f64) -> f64 {
        match self {
            DensityField::Constant { .. }
            | DensityField::SignShift { .. }
            | DensityField::Linear { .. }
            | DensityField::LinearTrack { .. } => f64::INFINITY,
            DensityField::Funnel { b, .. } | DensityField::LogSym { b, .. } => {
                (b.eval(t) - x[0].abs()).abs()
            }
            DensityField::LogRatio { b_hi, b_lo, .. }
            | DensityField::LogRatioControl { b_hi, b_lo, .. } => {
                let (hi, lo) = (b_hi.eval(t), b_lo.eval(t));
                (hi - x[0]).abs().min((x[0] - lo).abs())
            }
            DensityField::LogSurface { b, .. } => (x[0] - b.eval(t)).abs(),
            DensityField::AnnulusLog { q, b_hi, b_lo } => {
                let p = (x[0], x[1]);
                lq_level_distance(p, *q, b_hi.eval(t))
                    .min(lq_level_distance(p, *q, b_lo.eval(t)))
            }
            DensityField::ObstacleLog { terms } => terms
                .iter()
                .map(|term| {
                    lq_level_distance(
                        (x[0] - term.center.0, x[1] - term.center.1),
                        term.exponent,
                        term.offset,
                    )
                })
                .fold(f64::INFINITY, f64::min),
            DensityField::NormLog { q, .. } => lq_level_distance((x[0], x[1]), *q, 1.0),
            DensityField::ExpBarrier { .. } | DensityField::DiskLog { .. } => {
                ((x[0] * x[0] + x[1] * x[1]).sqrt() - 1.0).abs()
            }
        }
    }

    /// True when the point is on/beyond the singular set or within
    /// `eps` of it — the integrator's truncation predicate. Uses rigorous
    /// cheap lower bounds before paying for an exact distance.
    pub fn singular_guard(&self, x: &[f64], t: f64, eps: f64) -> bool {
        if self.sign_region(x, t) == SignRegion::Singular {
            return true;
        }
        match self {
            DensityField::Constant { .. }
            | DensityField::SignShift { .. }
            | DensityField::Linear { .. }
            | DensityField::LinearTrack { .. } => false,
            DensityField::AnnulusLog { q, b_hi, b_lo } => {
                let p = (x[0], x[1]);
                within_lq_level(p, *q, b_hi.eval(t), eps)
                    || within_lq_level(p, *q, b_lo.eval(t), eps)
            }
            DensityField::ObstacleLog { terms } => terms.iter().any(|term| {
                within_lq_level(
                    (x[0] - term.center.0, x[1] - term.center.1),
                    term.exponent,
                    term.offset,
                    eps,
                )
            }),
            DensityField::NormLog { q, .. } => within_lq_level((x[0], x[1]), *q, 1.0, eps),
            _ => self.singular_distance(x, t) < eps,
        }
    }

    /// Load-time parameter validation over a time horizon; signals are
    /// sampled densely because the constraints are pointwise in t.
    pub fn validate(&self, horizon: f64) -> Result<(), String> {
        let grid = |f: &dyn Fn(f64) -> bool, msg: &str| -> Result<(), String> {
            for i in 0..=2000 {
                let t = horizon * i as f64 / 2000.0;
                if !f(t) {
                    return Err(format!("{msg} violated at t = {t}"));
                }
            }
            Ok(())
        };
        match self {
            DensityField::Funnel { b, .. } | DensityField::LogSym { b, .. } => {
                grid(&|t| b.eval(t) > 0.0, "funnel/tube bound b(t) > 0")
            }
            DensityField::LogRatio { b_hi, b_lo, .. }
            | DensityField::LogRatioControl { b_hi, b_lo, .. } => {
                grid(&|t| b_hi.eval(t) > b_lo.eval(t), "tube bounds b_hi(t) > b_lo(t)")
            }
            DensityField::AnnulusLog { q, b_hi, b_lo } => {
                if *q <= 0.0 {
                    return Err("exponent q must be positive".into());
                }
                grid(
                    &|t| b_hi.eval(t) > b_lo.eval(t) && b_lo.eval(t) > 0.0,
                    "annulus bounds b_hi(t) > b_lo(t) > 0",
                )
            }
            DensityField::ObstacleLog { terms } => {
                if terms.iter().all(|term| term.offset >= 0.0 && term.exponent > 0.0) {
                    Ok(())
                } else {
                    Err("obstacle offsets must be >= 0 and exponents > 0".into())
                }
            }
            DensityField::NormLog { q, .. } => {
                if *q > 0.0 {
                    Ok(())
                } else {
                    Err("exponent q must be positive".into())
                }
            }
            DensityField::ExpBarrier { sigma, exponent } => {
                if (sigma.abs() - 1.0).abs() < 1e-12 && *exponent > 0.0 && *exponent < 1.0 {
                    Ok(())
                } else {
                    Err("exp barrier needs sigma = ±1 and exponent in (0, 1)".into())
                }
            }
            DensityField::DiskLog { sigma } => {
                if (sigma.abs() - 1.0).abs() < 1e-12 {
                    Ok(())
                } else {
                    Err("disk log needs sigma = ±1".into())
                }
            }
            _ => Ok(()),
        }
    }
}

enum TubeSide {
    /// Inside the tube: carries (b̄ − x)/(x − b̲) > 0.
    Inside(f64),
    AtOrAbove,
    AtOrBelow,
}

fn tube_ratio(x: f64, hi: f64, lo: f64) -> TubeSide {
    if x >= hi {
        TubeSide::AtOrAbove
    } else if x <= lo {
        TubeSide::AtOrBelow
    } else {
        TubeSide::Inside((hi - x) / (x - lo))
    }
}

/// |x₁|^q + |x₂|^q, real-valued on all of ℝ² for any q > 0.
pub fn lq_sum(x1: f64, x2: f64, q: f64) -> f64 {
    x1.abs().powf(q) + x2.abs().powf(q)
}

/// Points of the level curve {|x₁|^q + |x₂|^q = c} around `center`,
/// suitable for plotting and distance projection.
pub fn lq_contour(q: f64, c: f64, center: (f64, f64), n: usize) -> Vec<(f64, f64)> {
    let radius = c.powf(1.0 / q);
    let mut pts = Vec::with_capacity(n);
    for i in 0..n {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let (s, co) = theta.sin_cos();
        let x = radius * co.abs().powf(2.0 / q) * sign0(co);
        let y = radius * s.abs().powf(2.0 / q) * sign0(s);
        pts.push((center.0 + x, center.1 + y));
    }
    pts
}

/// Euclidean distance from `p` to the level curve {|x₁|^q + |x₂|^q = c}.
fn lq_level_distance(p: (f64, f64), q: f64, c: f64) -> f64 {
    if c <= 0.0 {
        // Degenerate level set: the origin.
        return (p.0 * p.0 + p.1 * p.1).sqrt();
    }
    let (px, py) = (p.0.abs(), p.1.abs());
    if q == 1.0 {
        return dist_to_segment((px, py), (c, 0.0), (0.0, c));
    }
    if q == 2.0 {
        return ((px * px + py * py).sqrt() - c.sqrt()).abs();
    }
    // First-quadrant parametrization z(θ) = c^{1/q}(cos²θ, sin²θ)^{1/q};
    // coarse scan then ternary refinement around the best bracket.
    let radius = c.powf(1.0 / q);
    let d2 = |theta: f64| -> f64 {
        let (s, co) = theta.sin_cos();
        let zx = radius * co.abs().powf(2.0 / q);
        let zy = radius * s.abs().powf(2.0 / q);
        (px - zx) * (px - zx) + (py - zy) * (py - zy)
    };
    const COARSE: usize = 128;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..=COARSE {
        let v = d2(half_pi * i as f64 / COARSE as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let mut lo = half_pi * best_i.saturating_sub(1) as f64 / COARSE as f64;
    let mut hi = half_pi * (best_i + 1).min(COARSE) as f64 / COARSE as f64;
    for _ in 0..60 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if d2(m1) <= d2(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    d2(0.5 * (lo + hi)).sqrt().min(best.sqrt())
}

/// Rigorous quick test "is p within eps of {s = c}" that only computes the
/// exact distance when a Hölder/Lipschitz lower bound cannot rule it out.
fn within_lq_level(p: (f64, f64), q: f64, c: f64, eps: f64) -> bool {
    let s = lq_sum(p.0, p.1, q);
    let gap = (s - c).abs();
    let lower = if q < 1.0 {
        // | |a|^q − |b|^q | ≤ |a − b|^q per component.
        (gap / 2.0).powf(1.0 / q)
    } else {
        // Lipschitz constant q·M^{q−1} per component on the segment.
        let m = p.0.abs().max(p.1.abs()).max(c.max(1.0).powf(1.0 / q)).max(1e-12);
        gap / (2.0 * q * m.powf(q - 1.0))
    };
    if lower >= eps {
        return false;
    }
    lq_level_distance(p, q, c) < eps
}

fn dist_to_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (abx, aby) = (b.0 - a.0, b.1 - a.1);
    let (apx, apy) = (p.0 - a.0, p.1 - a.1);
    let len2 = abx * abx + aby * aby;
    let t = ((apx * abx + apy * aby) / len2).clamp(0.0, 1.0);
    let (cx, cy) = (a.0 + t * abx, a.1 + t * aby);
    ((p.0 - cx) * (p.0 - cx) + (p.1 - cy) * (p.1 - cy)).sqrt()
}
