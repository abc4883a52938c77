//! Catalog of bounded scalar time signals.
//!
//! These cover every disturbance d(t), bound b(t), b̄(t), b̲(t) and target
//! locus z(t), g(t) the scenario bank needs. Each variant evaluates finitely
//! for all t ≥ 0 and knows a tight upper bound of sup|s(t)|, which feeds the
//! disturbance level d̄ of the region formulas.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SignalError {
    #[error("unbounded signal: {0}")]
    Unbounded(&'static str),
}

/// One `a·sin(ω t + φ)` term of a sinusoid sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinTerm {
    pub amplitude: f64,
    pub omega: f64,
    #[serde(default)]
    pub phase: f64,
}

/// A breakpoint of a piecewise-linear signal. Repeating a time value
/// produces a jump; evaluation is right-continuous at jumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TimeSignal {
    Zero,
    Constant { value: f64 },
    /// `offset + Σ aᵢ·sin(ωᵢ t + φᵢ)`
    SinusoidSum { offset: f64, terms: Vec<SinTerm> },
    /// `a·atan(k·sin(ω t))` — a smooth square-wave-like chatter signal.
    AtanChatter { amplitude: f64, gain: f64, omega: f64 },
    /// `a·e^(−λ t)·(c + sin(ω t + φ)) + offset`
    ExpDecayMix {
        amplitude: f64,
        decay: f64,
        bias: f64,
        #[serde(default = "one")]
        omega: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `a·e^(−λ t) + b·sin(ω t) + offset`
    ExpPlusSin {
        amp_exp: f64,
        decay: f64,
        #[serde(default)]
        amp_sin: f64,
        #[serde(default)]
        omega: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Linear interpolation through sorted breakpoints; held before the
    /// first and continued with `tail_slope` after the last.
    PiecewiseLinear {
        points: Vec<Breakpoint>,
        #[serde(default)]
        tail_slope: f64,
    },
    /// `offset + sin(t) + atan(k·sin(ω t))`
    AtanSquareMix { offset: f64, gain: f64, omega: f64 },
}

fn one() -> f64 {
    1.0
}

impl TimeSignal {
    pub fn constant(value: f64) -> Self {
        TimeSignal::Constant { value }
    }

    /// `offset + a·sin(ω t)`
    pub fn offset_sin(offset: f64, amplitude: f64, omega: f64) -> Self {
        TimeSignal::SinusoidSum {
            offset,
            terms: vec![SinTerm { amplitude, omega, phase: 0.0 }],
        }
    }

    /// `offset + a·cos(ω t)`
    pub fn offset_cos(offset: f64, amplitude: f64, omega: f64) -> Self {
        TimeSignal::SinusoidSum {
            offset,
            terms: vec![SinTerm { amplitude, omega, phase: std::f64::consts::FRAC_PI_2 }],
        }
    }

    /// Evaluates the signal at `t ≥ 0`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeSignal::Zero => 0.0,
            TimeSignal::Constant { value } => *value,
            TimeSignal::SinusoidSum { offset, terms } => {
                offset
                    + terms
                        .iter()
                        .map(|s| s.amplitude * (s.omega * t + s.phase).sin())
                        .sum::<f64>()
            }
            TimeSignal::AtanChatter { amplitude, gain, omega } => {
                amplitude * (gain * (omega * t).sin()).atan()
            }
            TimeSignal::ExpDecayMix { amplitude, decay, bias, omega, phase, offset } => {
                amplitude * (-decay * t).exp() * (bias + (omega * t + phase).sin()) + offset
            }
            TimeSignal::ExpPlusSin { amp_exp, decay, amp_sin, omega, offset } => {
                amp_exp * (-decay * t).exp() + amp_sin * (omega * t).sin() + offset
            }
            TimeSignal::PiecewiseLinear { points, tail_slope } => {
                eval_piecewise(points, *tail_slope, t)
            }
            TimeSignal::AtanSquareMix { offset, gain, omega } => {
                offset + t.sin() + (gain * (omega * t).sin()).atan()
            }
        }
    }

    /// An upper bound B of sup_{t≥0} |s(t)|, tight to dense-grid resolution.
    ///
    /// Analytic where the variant allows it, otherwise the maximum over a
    /// dense grid spanning one quasi-period plus the decay window, inflated
    /// by a relative 1e-6.
    pub fn sup_bound(&self) -> Result<f64, SignalError> {
        match self {
            TimeSignal::Zero => Ok(0.0),
            TimeSignal::Constant { value } => Ok(value.abs()),
            TimeSignal::SinusoidSum { offset, terms } => {
                Ok(offset.abs() + terms.iter().map(|s| s.amplitude.abs()).sum::<f64>())
            }
            TimeSignal::AtanChatter { amplitude, gain, .. } => {
                Ok(amplitude.abs() * gain.abs().atan())
            }
            TimeSignal::AtanSquareMix { offset, gain, .. } => {
                Ok(offset.abs() + 1.0 + gain.abs().atan())
            }
            TimeSignal::ExpDecayMix { amplitude, decay, omega, offset, .. } => {
                if *decay < 0.0 && *amplitude != 0.0 {
                    return Err(SignalError::Unbounded("exp-decay-mix with negative decay"));
                }
                let tail = offset.abs();
                Ok(self.grid_sup(window(*decay, *omega)).max(tail) * (1.0 + 1e-6))
            }
            TimeSignal::ExpPlusSin { amp_exp, decay, amp_sin, omega, offset } => {
                if *decay < 0.0 && *amp_exp != 0.0 {
                    return Err(SignalError::Unbounded("exp-plus-sin with negative decay"));
                }
                // Once the exponential has died, the sup of the residual
                // oscillation is reached over and over again.
                let tail = offset.abs() + if *omega != 0.0 { amp_sin.abs() } else { 0.0 };
                Ok(self.grid_sup(window(*decay, *omega)).max(tail) * (1.0 + 1e-6))
            }
            TimeSignal::PiecewiseLinear { points, tail_slope } => {
                if *tail_slope != 0.0 {
                    return Err(SignalError::Unbounded("piecewise-linear with growing tail"));
                }
                Ok(points.iter().map(|p| p.value.abs()).fold(0.0, f64::max))
            }
        }
    }

    fn grid_sup(&self, t_max: f64) -> f64 {
        const N: usize = 200_000;
        let mut best = 0.0f64;
        for i in 0..=N {
            let t = t_max * i as f64 / N as f64;
            best = best.max(self.eval(t).abs());
        }
        best
    }
}

/// Grid window covering the decay transient plus one oscillation period.
fn window(decay: f64, omega: f64) -> f64 {
    let period = if omega.abs() > 1e-12 { 2.0 * std::f64::consts::PI / omega.abs() } else { 1.0 };
    let settle = if decay > 1e-12 { 16.0 / decay } else { 0.0 };
    settle + 2.0 * period
}

fn eval_piecewise(points: &[Breakpoint], tail_slope: f64, t: f64) -> f64 {
    assert!(!points.is_empty(), "piecewise-linear signal needs breakpoints");
    if t <= points[0].t {
        return points[0].value;
    }
    let last = points[points.len() - 1];
    if t >= last.t {
        return last.value + tail_slope * (t - last.t);
    }
    // Right-continuous at duplicated abscissae.
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if t >= a.t && t < b.t {
            if b.t == a.t {
                continue;
            }
            let frac = (t - a.t) / (b.t - a.t);
            return a.value + frac * (b.value - a.value);
        }
    }
    last.value
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_signal_is_zero() {
        assert_eq!(TimeSignal::Zero.eval(3.7), 0.0);
    }

    #[test]
    fn chatter_starts_at_zero() {
        let s = TimeSignal::AtanChatter { amplitude: 0.5, gain: 100.0, omega: 0.8 };
        assert_eq!(s.eval(0.0), 0.0);
    }

    #[test]
    fn exp_plus_sin_at_zero() {
        // b(t) = 2e^{-t} + 0.1
        let s = TimeSignal::ExpPlusSin { amp_exp: 2.0, decay: 1.0, amp_sin: 0.0, omega: 0.0, offset: 0.1 };
        assert_relative_eq!(s.eval(0.0), 2.1);
    }

    #[test]
    fn sup_bound_analytic_variants() {
        assert_eq!(TimeSignal::constant(5.0).sup_bound().unwrap(), 5.0);
        assert_eq!(TimeSignal::constant(-5.0).sup_bound().unwrap(), 5.0);

        let chatter = TimeSignal::AtanChatter { amplitude: 0.5, gain: 100.0, omega: 0.8 };
        let b = chatter.sup_bound().unwrap();
        assert_relative_eq!(b, 0.780398330054116, epsilon = 1e-12);
        // Cross-check against a dense grid over a window of periods.
        let mut grid_max = 0.0f64;
        for i in 0..=80_000 {
            let t = i as f64 * 1e-4;
            grid_max = grid_max.max(chatter.eval(t).abs());
        }
        assert!(grid_max <= b && b <= grid_max + 1e-4);

        let d = TimeSignal::offset_sin(5.0, 10.0, 7.0);
        assert_eq!(d.sup_bound().unwrap(), 15.0);
    }

    #[test]
    fn sup_bound_decaying_variants_are_tight() {
        // 2e^{-t} + 0.1: sup is 2.1 at t = 0.
        let s = TimeSignal::ExpPlusSin { amp_exp: 2.0, decay: 1.0, amp_sin: 0.0, omega: 0.0, offset: 0.1 };
        let b = s.sup_bound().unwrap();
        assert!(b >= 2.1 && b <= 2.1 * (1.0 + 1e-5));

        // 4e^{-0.09t}·sin(t): first peak near t = π/2.
        let s = TimeSignal::ExpDecayMix {
            amplitude: 4.0,
            decay: 0.09,
            bias: 0.0,
            omega: 1.0,
            phase: 0.0,
            offset: 0.0,
        };
        let b = s.sup_bound().unwrap();
        let mut grid_max = 0.0f64;
        for i in 0..=100_000 {
            let t = i as f64 * 4e-4;
            grid_max = grid_max.max(s.eval(t).abs());
        }
        assert!(grid_max <= b, "bound {b} below grid max {grid_max}");
        assert!(b <= grid_max + 1e-6 * grid_max + 1e-9, "bound {b} loose vs {grid_max}");
    }

    #[test]
    fn piecewise_tube_bound_from_tube_presets() {
        // b = 1 on [0, 0.5], jump per -9t + 9.5 on (0.5, 1], then 0.5.
        let b = TimeSignal::PiecewiseLinear {
            points: vec![
                Breakpoint { t: 0.0, value: 1.0 },
                Breakpoint { t: 0.5, value: 1.0 },
                Breakpoint { t: 0.5, value: 5.0 },
                Breakpoint { t: 1.0, value: 0.5 },
            ],
            tail_slope: 0.0,
        };
        assert_eq!(b.eval(0.25), 1.0);
        assert_eq!(b.eval(0.5), 5.0); // right-continuous at the jump
        assert_relative_eq!(b.eval(0.75), 2.75);
        assert_eq!(b.eval(2.0), 0.5);
        assert_eq!(b.sup_bound().unwrap(), 5.0);
    }

    #[test]
    fn growing_tail_is_rejected() {
        let s = TimeSignal::PiecewiseLinear {
            points: vec![Breakpoint { t: 0.0, value: 1.0 }],
            tail_slope: 0.5,
        };
        assert_eq!(
            s.sup_bound(),
            Err(SignalError::Unbounded("piecewise-linear with growing tail"))
        );
    }

    fn arb_signal() -> impl Strategy<Value = TimeSignal> {
        prop_oneof![
            Just(TimeSignal::Zero),
            (-10.0..10.0f64).prop_map(TimeSignal::constant),
            (-5.0..5.0f64, 0.1..8.0f64, -5.0..5.0f64)
                .prop_map(|(o, w, a)| TimeSignal::offset_sin(o, a, w)),
            (0.1..4.0f64, 1.0..200.0f64, 0.1..4.0f64).prop_map(|(a, k, w)| {
                TimeSignal::AtanChatter { amplitude: a, gain: k, omega: w }
            }),
            (0.1..4.0f64, 0.05..2.0f64, -2.0..2.0f64, 0.2..4.0f64, -3.0..3.0f64).prop_map(
                |(a, l, c, w, o)| TimeSignal::ExpDecayMix {
                    amplitude: a,
                    decay: l,
                    bias: c,
                    omega: w,
                    phase: 0.0,
                    offset: o,
                }
            ),
            (0.1..4.0f64, 0.05..2.0f64, -3.0..3.0f64, 0.2..8.0f64, -3.0..3.0f64).prop_map(
                |(a, l, b, w, o)| TimeSignal::ExpPlusSin {
                    amp_exp: a,
                    decay: l,
                    amp_sin: b,
                    omega: w,
                    offset: o,
                }
            ),
            (-3.0..3.0f64, 1.0..100.0f64, 0.1..4.0f64)
                .prop_map(|(o, k, w)| TimeSignal::AtanSquareMix { offset: o, gain: k, omega: w }),
        ]
    }

    proptest! {
        // The declared bound dominates dense grid sampling for every
        // catalog variant.
        #[test]
        fn sup_bound_dominates_dense_grid(s in arb_signal()) {
            let b = s.sup_bound().unwrap();
            for i in 0..100_000u32 {
                let t = i as f64 * 4e-4; // [0, 40]
                let v = s.eval(t).abs();
                prop_assert!(v <= b + 1e-12, "signal exceeds bound: |s({t})| = {v} > {b}");
            }
        }
    }
}
