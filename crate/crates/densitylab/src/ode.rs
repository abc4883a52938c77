//! Deterministic fixed-step integration with guard rails for singular
//! barriers.
//!
//! The right-hand sides here are only piecewise continuous (sign terms,
//! clamped density values), so the integrator makes no smoothness
//! assumptions beyond what explicit stepping needs: it evaluates sign(·)
//! exactly, clamps density magnitudes on the integration path, and truncates
//! the trajectory rather than storing a non-finite or forbidden state.
//! Two runs with the same inputs produce bit-identical trajectories.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{self, Write};

/// Region membership of a sample, when the scenario declares region
/// parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionClass {
    Ds,
    Du,
    Neither,
    Forbidden,
}

/// Why integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// Ran to the configured duration.
    Completed,
    /// A step produced a non-finite component.
    NumericalBlowup,
    /// The state crossed into a declared singular/forbidden set.
    ForbiddenEntry,
    /// A controller could not evaluate its density field.
    SingularEvaluation,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StopReason::Completed => "completed",
            StopReason::NumericalBlowup => "numerical-blowup",
            StopReason::ForbiddenEntry => "forbidden-entry",
            StopReason::SingularEvaluation => "singular-evaluation",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Euler,
}

/// Fixed-step integration settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Step size in seconds.
    pub h: f64,
    pub method: Method,
    /// Magnitude clamp for density evaluations on the integration path.
    pub rho_clamp: f64,
    /// Minimum allowed distance to a singular set before truncation.
    pub eps_sing: f64,
    /// Total duration in seconds.
    pub duration: f64,
    /// Record every `record_stride`-th step (1 = every step).
    pub record_stride: usize,
}

impl IntegratorConfig {
    pub fn new(h: f64, duration: f64) -> Self {
        IntegratorConfig {
            h,
            method: Method::Rk4,
            rho_clamp: 1e6,
            eps_sing: 1e-6,
            duration,
            record_stride: 1,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn with_clamp(mut self, m: f64) -> Self {
        self.rho_clamp = m;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.h > 0.0) {
            return Err(format!("step h must be positive, got {}", self.h));
        }
        if !(self.rho_clamp >= 1.0) {
            return Err(format!("rho clamp must be >= 1, got {}", self.rho_clamp));
        }
        if !(self.eps_sing > 0.0 && self.eps_sing < 1.0) {
            return Err(format!("eps_sing must be in (0, 1), got {}", self.eps_sing));
        }
        if self.duration < 0.0 {
            return Err(format!("duration must be non-negative, got {}", self.duration));
        }
        if self.record_stride == 0 {
            return Err("record_stride must be at least 1".into());
        }
        Ok(())
    }
}

/// Per-sample diagnostics attached by the system's probe.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleDiag {
    /// Control value, for closed-loop systems.
    pub u: Option<f64>,
    /// Density value on the integration path (clamped).
    pub rho: Option<f64>,
    /// Lyapunov-function value.
    pub v: Option<f64>,
    pub region: Option<RegionClass>,
}

/// A dynamical system under fixed-step integration.
pub trait Ode {
    fn dim(&self) -> usize;

    /// Writes dx/dt into `dx`.
    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]);

    /// Checked after every accepted step; returning a reason truncates the
    /// trajectory at the previous sample.
    fn guard(&self, _t: f64, _x: &[f64]) -> Option<StopReason> {
        None
    }

    /// Diagnostics recorded with each stored sample.
    fn probe(&self, _t: f64, _x: &[f64]) -> SampleDiag {
        SampleDiag::default()
    }
}

/// Uniformly sampled trajectory with diagnostics.
///
/// Samples are spaced `dt = h · record_stride`; the guard still runs at
/// every integration step, so forbidden-set crossings between samples
/// truncate the run even when they would not be recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    t0: f64,
    dt: f64,
    dim: usize,
    data: Vec<f64>,
    diag: Vec<SampleDiag>,
    stop: StopReason,
}

impl Trajectory {
    /// Assembles a trajectory from raw parts (uniform sampling assumed);
    /// used by tests and by readers of exported trajectories.
    pub fn from_parts(
        t0: f64,
        dt: f64,
        dim: usize,
        data: Vec<f64>,
        diag: Vec<SampleDiag>,
        stop: StopReason,
    ) -> Trajectory {
        assert_eq!(data.len(), diag.len() * dim, "sample storage mismatch");
        Trajectory { t0, dt, dim, data, diag, stop }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Recorded sample spacing in seconds.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop
    }

    pub fn completed(&self) -> bool {
        self.stop == StopReason::Completed
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + self.dt * i as f64
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diag(&self, i: usize) -> &SampleDiag {
        &self.diag[i]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Central-difference estimate (V_{i+1} − V_{i−1})/(2·dt) of V̇ at an
    /// interior sample, when V diagnostics are present.
    pub fn vdot_central(&self, i: usize) -> Option<f64> {
        if i == 0 || i + 1 >= self.len() {
            return None;
        }
        let vp = self.diag[i + 1].v?;
        let vm = self.diag[i - 1].v?;
        Some((vp - vm) / (2.0 * self.dt))
    }

    /// Second-difference estimate of |V̈|, used for discretization
    /// allowances in the V̇ checks.
    pub fn vddot_magnitude(&self, i: usize) -> Option<f64> {
        if i == 0 || i + 1 >= self.len() {
            return None;
        }
        let vp = self.diag[i + 1].v?;
        let v0 = self.diag[i].v?;
        let vm = self.diag[i - 1].v?;
        Some(((vp - 2.0 * v0 + vm) / (self.dt * self.dt)).abs())
    }

    /// Writes the trajectory as CSV:
    /// `t,x1..xn,u,rho,V,Vdot,in_DS,in_DU,in_forbidden,stop_reason`.
    ///
    /// Floats carry 9 significant digits; inapplicable fields stay empty;
    /// the stop reason appears on the final row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "t")?;
        for k in 1..=self.dim {
            write!(w, ",x{k}")?;
        }
        writeln!(w, ",u,rho,V,Vdot,in_DS,in_DU,in_forbidden,stop_reason")?;
        for i in 0..self.len() {
            write!(w, "{}", fmt_g9(self.time(i)))?;
            for &x in self.state(i) {
                write!(w, ",{}", fmt_g9(x))?;
            }
            let d = &self.diag[i];
            write_opt(&mut w, d.u)?;
            write_opt(&mut w, d.rho)?;
            write_opt(&mut w, d.v)?;
            write_opt(&mut w, self.vdot_central(i))?;
            match d.region {
                Some(r) => write!(
                    w,
                    ",{},{},{}",
                    (r == RegionClass::Ds) as u8,
                    (r == RegionClass::Du) as u8,
                    (r == RegionClass::Forbidden) as u8
                )?,
                None => write!(w, ",,,")?,
            }
            if i + 1 == self.len() {
                writeln!(w, ",{}", self.stop)?;
            } else {
                writeln!(w, ",")?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Maximum |Δstate| between consecutive samples, per component; a cheap
    /// chatter/jerk diagnostic for discontinuous right-hand sides.
    pub fn max_step_delta(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 1..self.len() {
            for (a, b) in self.state(i - 1).iter().zip(self.state(i)) {
                best = best.max((b - a).abs());
            }
        }
        best
    }
}

fn write_opt<W: Write>(w: &mut W, v: Option<f64>) -> io::Result<()> {
    match v {
        Some(v) => write!(w, ",{}", fmt_g9(v)),
        None => write!(w, ","),
    }
}

/// 9 significant digits, locale-free.
pub fn fmt_g9(v: f64) -> String {
    format!("{v:.8e}")
}

/// One classical Runge–Kutta step of `sys` from `(t, x)` with step `h`.
pub fn rk4_step(sys: &dyn Ode, t: f64, x: &[f64], h: f64) -> Vec<f64> {
    let dim = sys.dim();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut stage = vec![0.0; dim];
    sys.rhs(t, x, &mut k1);
    for i in 0..dim {
        stage[i] = x[i] + 0.5 * h * k1[i];
    }
    sys.rhs(t + 0.5 * h, &stage, &mut k2);
    for i in 0..dim {
        stage[i] = x[i] + 0.5 * h * k2[i];
    }
    sys.rhs(t + 0.5 * h, &stage, &mut k3);
    for i in 0..dim {
        stage[i] = x[i] + h * k3[i];
    }
    sys.rhs(t + h, &stage, &mut k4);
    (0..dim)
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Integrates `sys` from `x0` at `t0` under `cfg`.
///
/// The trajectory is truncated (never poisoned) on blowup or guard
/// violations; the initial sample is always recorded.
pub fn integrate(sys: &dyn Ode, x0: &[f64], t0: f64, cfg: &IntegratorConfig) -> Trajectory {
    cfg.validate().expect("invalid integrator config");
    let dim = sys.dim();
    assert_eq!(x0.len(), dim, "initial state dimension mismatch");

    let n_steps = (cfg.duration / cfg.h).round() as usize;
    let mut traj = Trajectory {
        t0,
        dt: cfg.h * cfg.record_stride as f64,
        dim,
        data: Vec::with_capacity((n_steps / cfg.record_stride + 2) * dim),
        diag: Vec::with_capacity(n_steps / cfg.record_stride + 2),
        stop: StopReason::Completed,
    };

    let mut x = x0.to_vec();
    record(&mut traj, sys, t0, &x);
    if let Some(reason) = sys.guard(t0, &x) {
        traj.stop = reason;
        return traj;
    }

    let mut next = vec![0.0; dim];
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut stage = vec![0.0; dim];

    for step in 1..=n_steps {
        let t = t0 + cfg.h * (step - 1) as f64;
        match cfg.method {
            Method::Rk4 => {
                let h = cfg.h;
                sys.rhs(t, &x, &mut k1);
                for i in 0..dim {
                    stage[i] = x[i] + 0.5 * h * k1[i];
                }
                sys.rhs(t + 0.5 * h, &stage, &mut k2);
                for i in 0..dim {
                    stage[i] = x[i] + 0.5 * h * k2[i];
                }
                sys.rhs(t + 0.5 * h, &stage, &mut k3);
                for i in 0..dim {
                    stage[i] = x[i] + h * k3[i];
                }
                sys.rhs(t + h, &stage, &mut k4);
                for i in 0..dim {
                    next[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            Method::Euler => {
                sys.rhs(t, &x, &mut k1);
                for i in 0..dim {
                    next[i] = x[i] + cfg.h * k1[i];
                }
            }
        }

        let t_next = t0 + cfg.h * step as f64;
        if next.iter().any(|v| !v.is_finite()) {
            traj.stop = StopReason::NumericalBlowup;
            return traj;
        }
        if let Some(reason) = sys.guard(t_next, &next) {
            traj.stop = reason;
            return traj;
        }
        x.copy_from_slice(&next);
        if step % cfg.record_stride == 0 {
            record(&mut traj, sys, t_next, &x);
        }
    }
    traj
}

fn record(traj: &mut Trajectory, sys: &dyn Ode, t: f64, x: &[f64]) {
    traj.data.extend_from_slice(x);
    traj.diag.push(sys.probe(t, x));
}
