//! Density-based adaptive output control for the SISO plant.
//!
//! The controller measures only y, runs two companion-form filters
//!
//! ```text
//! V̇_y = F·V_y + b·y,    V̇_u = F·V_u + b·u,
//! ```
//!
//! stacks the regressor w = col{V_y, V_u, y}, and commands
//!
//! ```text
//! u = cᵀw + τ·ρ(y,t),       ċ = −β·y·w − γ·c·|y|·sign(ρ(y,t)·y).
//! ```
//!
//! The density field ρ carries the control goal: a linear ρ gives plain
//! adaptive stabilization, tube barriers keep y inside time-varying bounds,
//! a tracking field pins y to a target locus. The closed loop couples the
//! plant realization, both filters and the parameter vector into one ODE
//! and integrates it jointly, re-evaluating u at every Runge–Kutta stage.

use crate::analysis::LyapunovForm;
use crate::analysis::RegionOracle;
use crate::density::{sign0, DensityField, SignRegion};
use crate::ode::{Ode, SampleDiag, StopReason};
use crate::plant::{decompose, realize, PlantError, PolyPlant, StateSpaceRealization};
use crate::poly::Polynomial;
use crate::signal::TimeSignal;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AdaptiveError {
    #[error("{0} must be positive")]
    NonPositiveGain(&'static str),
    #[error("controller density field must be scalar (dim 1)")]
    RhoNotScalar,
    #[error("reference polynomial R_m: {0}")]
    BadReference(String),
    #[error("goal sign condition fails at y = {y}, t = {t}: rho*(y-g) = {value}")]
    SignCondition { y: f64, t: f64, value: f64 },
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error("initial parameter vector needs length {expected}, got {got}")]
    ParameterDimension { expected: usize, got: usize },
}

/// Gains, filters and the goal-carrying density field of the controller.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub tau: f64,
    pub beta: f64,
    pub gamma: f64,
    pub r_m: Polynomial,
    /// Companion matrix with characteristic polynomial R_m.
    pub f: DMatrix<f64>,
    /// Input vector col{0,…,0,1} of the filters.
    pub b: DVector<f64>,
    /// Scalar density field over y.
    pub rho: DensityField,
    /// Goal locus g(t): ρ(y,t)·(y − g) must be negative on both sides.
    pub goal: TimeSignal,
    /// c(0) for the adaptation law.
    pub c_init: DVector<f64>,
}

impl ControllerConfig {
    pub fn new(
        tau: f64,
        beta: f64,
        gamma: f64,
        r_m: Polynomial,
        rho: DensityField,
        goal: TimeSignal,
    ) -> Result<Self, AdaptiveError> {
        if !(tau > 0.0) {
            return Err(AdaptiveError::NonPositiveGain("tau"));
        }
        if !(beta > 0.0) {
            return Err(AdaptiveError::NonPositiveGain("beta"));
        }
        if !(gamma > 0.0) {
            return Err(AdaptiveError::NonPositiveGain("gamma"));
        }
        if rho.dim() != 1 {
            return Err(AdaptiveError::RhoNotScalar);
        }
        if !r_m.is_monic() || r_m.degree() < 1 {
            return Err(AdaptiveError::BadReference("must be monic of degree >= 1".into()));
        }
        if !r_m.is_hurwitz() {
            return Err(AdaptiveError::BadReference("must be Hurwitz".into()));
        }
        let f = r_m.companion();
        let m = r_m.degree();
        let mut b = DVector::zeros(m);
        b[m - 1] = 1.0;
        let c_init = DVector::zeros(2 * (m + 1) - 1);
        Ok(ControllerConfig { tau, beta, gamma, r_m, f, b, rho, goal, c_init })
    }

    pub fn with_c_init(mut self, c: Vec<f64>) -> Result<Self, AdaptiveError> {
        if c.len() != self.param_dim() {
            return Err(AdaptiveError::ParameterDimension {
                expected: self.param_dim(),
                got: c.len(),
            });
        }
        self.c_init = DVector::from_vec(c);
        Ok(self)
    }

    /// Filter order n−1.
    pub fn filter_order(&self) -> usize {
        self.r_m.degree()
    }

    /// Dimension 2n−1 of the adaptive parameter vector.
    pub fn param_dim(&self) -> usize {
        2 * (self.filter_order() + 1) - 1
    }

    /// Samples the goal sign condition ρ(y,t)·(y − g(t)) < 0 over the given
    /// grids, ignoring out-of-domain points and the goal locus itself.
    pub fn check_sign_condition(&self, y_grid: &[f64], t_grid: &[f64]) -> Result<(), AdaptiveError> {
        for &t in t_grid {
            let g = self.goal.eval(t);
            for &y in y_grid {
                if (y - g).abs() < 1e-9 {
                    continue;
                }
                if self.rho.sign_region(&[y], t) == SignRegion::Singular {
                    continue;
                }
                let rho = self.rho.eval(&[y], t).expect("non-singular by the check above");
                let value = rho * (y - g);
                if value >= 0.0 && rho.abs() >= 1e-12 {
                    return Err(AdaptiveError::SignCondition { y, t, value });
                }
            }
        }
        Ok(())
    }

    /// `F + b·c₀ᵤᵀ`, whose characteristic polynomial must be the plant's R
    /// for the filter-boundedness argument.
    pub fn filter_matrix_with_feedback(&self, c0u: &[f64]) -> DMatrix<f64> {
        let mut m = self.f.clone();
        let last = m.nrows() - 1;
        for j in 0..m.ncols() {
            m[(last, j)] += c0u[j];
        }
        m
    }
}

/// Filter states and adaptive parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub c: DVector<f64>,
    pub v_y: DVector<f64>,
    pub v_u: DVector<f64>,
}

impl ControllerState {
    pub fn zeroed(cfg: &ControllerConfig) -> Self {
        let m = cfg.filter_order();
        ControllerState {
            c: cfg.c_init.clone(),
            v_y: DVector::zeros(m),
            v_u: DVector::zeros(m),
        }
    }

    /// w = col{V_y, V_u, y}
    pub fn regressor(&self, y: f64) -> DVector<f64> {
        let m = self.v_y.len();
        let mut w = DVector::zeros(2 * m + 1);
        w.rows_mut(0, m).copy_from(&self.v_y);
        w.rows_mut(m, m).copy_from(&self.v_u);
        w[2 * m] = y;
        w
    }
}

/// (V̇_y, V̇_u) = (F·V_y + b·y, F·V_u + b·u).
pub fn filter_derivatives(
    state: &ControllerState,
    y: f64,
    u: f64,
    cfg: &ControllerConfig,
) -> (DVector<f64>, DVector<f64>) {
    let dv_y = &cfg.f * &state.v_y + &cfg.b * y;
    let dv_u = &cfg.f * &state.v_u + &cfg.b * u;
    (dv_y, dv_u)
}

/// u = cᵀw + τ·ρ(y,t). With `clamp` the density evaluation is total
/// (integration path); without it a singular evaluation is a controller
/// fault.
pub fn control(
    state: &ControllerState,
    y: f64,
    t: f64,
    cfg: &ControllerConfig,
    clamp: Option<f64>,
) -> Result<f64, crate::density::DensityError> {
    let rho = match clamp {
        Some(m) => cfg.rho.eval_clamped(&[y], t, m),
        None => cfg.rho.eval(&[y], t)?,
    };
    Ok(state.c.dot(&state.regressor(y)) + cfg.tau * rho)
}

/// ċ = −β·y·w − γ·c·|y|·sign(ρ(y,t)·y), with sign(0) = 0.
pub fn adapt_derivative(
    state: &ControllerState,
    y: f64,
    t: f64,
    cfg: &ControllerConfig,
    clamp: Option<f64>,
) -> Result<DVector<f64>, crate::density::DensityError> {
    let rho = match clamp {
        Some(m) => cfg.rho.eval_clamped(&[y], t, m),
        None => cfg.rho.eval(&[y], t)?,
    };
    let w = state.regressor(y);
    Ok(w * (-cfg.beta * y) - &state.c * (cfg.gamma * y.abs() * sign0(rho * y)))
}

/// Plant + controller as one stacked ODE with state
/// `[x_p (n) | V_y (n−1) | V_u (n−1) | c (2n−1)]`.
///
/// The commanded u enters the u-filter directly and reaches the plant
/// scaled by 1/k, so the loop behaves as the unit-gain plant the
/// decomposition describes.
pub struct ClosedLoop {
    pub plant: PolyPlant,
    pub ss: StateSpaceRealization,
    pub cfg: ControllerConfig,
    pub disturbance: TimeSignal,
    pub rho_clamp: f64,
    pub eps_sing: f64,
    /// True parameter vector of the (unit-gain) plant.
    pub c0: DVector<f64>,
    /// ½y² + (1/2β)|c − c₀|², recorded per sample.
    pub lyap: LyapunovForm,
    /// Region flags recorded per sample when configured.
    pub oracle: Option<RegionOracle>,
}

impl ClosedLoop {
    pub fn new(
        plant: PolyPlant,
        cfg: ControllerConfig,
        disturbance: TimeSignal,
        rho_clamp: f64,
        eps_sing: f64,
        oracle: Option<RegionOracle>,
    ) -> Result<Self, AdaptiveError> {
        if cfg.filter_order() != plant.order() - 1 {
            return Err(AdaptiveError::BadReference(format!(
                "R_m degree {} does not match plant order {}",
                cfg.filter_order(),
                plant.order()
            )));
        }
        // The decomposition always sees the unit-gain plant; k is known and
        // compensated at the plant input.
        let unit = PolyPlant::new(
            plant.q().clone(),
            plant.r().clone(),
            1.0,
            plant.y0_derivs().to_vec(),
        )?;
        let c0 = decompose(&unit, &cfg.r_m)?.c0;
        let ss = realize(&plant);
        let lyap = LyapunovForm::half_norm_squared(1)
            .with_param_term(cfg.beta)
            .expect("beta validated by ControllerConfig");
        Ok(ClosedLoop { plant, ss, cfg, disturbance, rho_clamp, eps_sing, c0, lyap, oracle })
    }

    pub fn plant_order(&self) -> usize {
        self.plant.order()
    }

    /// Stacked initial state from the realization, zero filters, c(0).
    pub fn initial_state(&self) -> Vec<f64> {
        let n = self.plant_order();
        let mut x = vec![0.0; self.dim()];
        x[..n].copy_from_slice(self.ss.x0.as_slice());
        x[n + 2 * (n - 1)..].copy_from_slice(self.cfg.c_init.as_slice());
        x
    }

    pub fn split<'a>(&self, x: &'a [f64]) -> LoopView<'a> {
        let n = self.plant_order();
        let m = n - 1;
        LoopView {
            x_p: &x[..n],
            v_y: &x[n..n + m],
            v_u: &x[n + m..n + 2 * m],
            c: &x[n + 2 * m..],
        }
    }

    pub fn output(&self, x: &[f64]) -> f64 {
        x[0]
    }

    fn u_and_rho(&self, t: f64, x: &[f64]) -> (f64, f64) {
        let view = self.split(x);
        let y = x[0];
        let rho = self.cfg.rho.eval_clamped(&[y], t, self.rho_clamp);
        let mut u = self.cfg.tau * rho;
        let m = self.plant_order() - 1;
        for i in 0..m {
            u += view.c[i] * view.v_y[i] + view.c[m + i] * view.v_u[i];
        }
        u += view.c[2 * m] * y;
        (u, rho)
    }
}

/// Borrowed view of the stacked closed-loop state.
pub struct LoopView<'a> {
    pub x_p: &'a [f64],
    pub v_y: &'a [f64],
    pub v_u: &'a [f64],
    pub c: &'a [f64],
}

impl Ode for ClosedLoop {
    fn dim(&self) -> usize {
        let n = self.plant_order();
        n + 2 * (n - 1) + (2 * n - 1)
    }

    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        let n = self.plant_order();
        let m = n - 1;
        let y = x[0];
        let (u, rho) = self.u_and_rho(t, x);
        let d = self.disturbance.eval(t);
        let u_plant = u / self.plant.k();

        // Plant block: A x_p + B_u·(u/k) + B_d·d.
        for i in 0..n {
            let mut acc = self.ss.b_u[i] * u_plant + self.ss.b_d[i] * d;
            for j in 0..n {
                acc += self.ss.a[(i, j)] * x[j];
            }
            dx[i] = acc;
        }
        // Filters: companion structure, written out to avoid allocation.
        let (v_y, v_u) = (&x[n..n + m], &x[n + m..n + 2 * m]);
        for i in 0..m {
            let mut ay = 0.0;
            let mut au = 0.0;
            for j in 0..m {
                ay += self.cfg.f[(i, j)] * v_y[j];
                au += self.cfg.f[(i, j)] * v_u[j];
            }
            dx[n + i] = ay + self.cfg.b[i] * y;
            dx[n + m + i] = au + self.cfg.b[i] * u;
        }
        // Adaptation: ċ = −βyw − γc|y|·sign(ρy).
        let c = &x[n + 2 * m..];
        let leak = self.cfg.gamma * y.abs() * sign0(rho * y);
        let by = self.cfg.beta * y;
        for i in 0..m {
            dx[n + 2 * m + i] = -by * v_y[i] - leak * c[i];
            dx[n + 2 * m + m + i] = -by * v_u[i] - leak * c[m + i];
        }
        dx[n + 2 * m + 2 * m] = -by * y - leak * c[2 * m];
    }

    fn guard(&self, t: f64, x: &[f64]) -> Option<StopReason> {
        let y = x[0];
        self.cfg
            .rho
            .singular_guard(&[y], t, self.eps_sing)
            .then_some(StopReason::SingularEvaluation)
    }

    fn probe(&self, t: f64, x: &[f64]) -> SampleDiag {
        let (u, rho) = self.u_and_rho(t, x);
        let view = self.split(x);
        let c_err: Vec<f64> =
            view.c.iter().zip(self.c0.iter()).map(|(c, c0)| c - c0).collect();
        let v = self.lyap.eval(&[x[0]], Some(&c_err)).ok();
        let region = self
            .oracle
            .as_ref()
            .and_then(|oracle| oracle.classify(&[x[0]], t).ok());
        SampleDiag { u: Some(u), rho: Some(rho), v, region }
    }
}

/// One RK4 step of the joint closed-loop ODE, with u and ċ re-evaluated at
/// every internal stage.
pub fn closed_loop_step(cl: &ClosedLoop, x: &[f64], t: f64, h: f64) -> Vec<f64> {
    crate::ode::rk4_step(cl, t, x, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn filter_config(rho: DensityField, goal: TimeSignal) -> ControllerConfig {
        // R_m = (λ+1)² gives F = [0 1; −1 −2].
        ControllerConfig::new(
            1.0,
            0.1,
            0.01,
            Polynomial::new(vec![1.0, 2.0, 1.0]),
            rho,
            goal,
        )
        .unwrap()
    }

    fn demo_plant() -> PolyPlant {
        PolyPlant::new(
            Polynomial::from_roots(&[1.0, 1.0, 1.0]),
            Polynomial::from_roots(&[-1.0, -1.0]),
            1.0,
            vec![4.0, 0.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn companion_filter_matches_reference() {
        let cfg = filter_config(DensityField::Linear { alpha: 4.0 }, TimeSignal::Zero);
        assert_eq!(cfg.f[(0, 0)], 0.0);
        assert_eq!(cfg.f[(0, 1)], 1.0);
        assert_eq!(cfg.f[(1, 0)], -1.0);
        assert_eq!(cfg.f[(1, 1)], -2.0);
        assert_eq!(cfg.b.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn filter_derivative_arithmetic() {
        let cfg = filter_config(DensityField::Linear { alpha: 4.0 }, TimeSignal::Zero);
        let mut state = ControllerState::zeroed(&cfg);
        let (dv_y, _) = filter_derivatives(&state, 4.0, 0.0, &cfg);
        assert_eq!(dv_y.as_slice(), &[0.0, 4.0]);

        state.v_u = DVector::from_vec(vec![1.0, 0.0]);
        let (_, dv_u) = filter_derivatives(&state, 0.0, 0.0, &cfg);
        assert_eq!(dv_u.as_slice(), &[0.0, -1.0]);

        state.v_y = DVector::from_vec(vec![1.0, 1.0]);
        let (dv_y, _) = filter_derivatives(&state, 0.0, 0.0, &cfg);
        assert_eq!(dv_y.as_slice(), &[1.0, -3.0]);
    }

    #[test]
    fn control_law_examples() {
        // Symmetric tube at its center: ln(1) = 0.
        let cfg = filter_config(
            DensityField::LogSym { alpha: 4.0, b: TimeSignal::constant(1.0) },
            TimeSignal::Zero,
        );
        let state = ControllerState::zeroed(&cfg);
        assert_eq!(control(&state, 0.0, 0.0, &cfg, None).unwrap(), 0.0);

        // cᵀw arithmetic with the density term silenced at y = z = 3.
        let cfg = filter_config(
            DensityField::LinearTrack { alpha: 1.0, z: TimeSignal::constant(3.0) },
            TimeSignal::constant(3.0),
        );
        let mut state = ControllerState::zeroed(&cfg);
        state.c = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0, 1.0]);
        state.v_y = DVector::from_vec(vec![2.0, 0.0]);
        assert_eq!(control(&state, 3.0, 0.0, &cfg, None).unwrap(), 5.0);

        // Stabilizing density: u = τ·(−αy).
        let cfg = filter_config(DensityField::Linear { alpha: 4.0 }, TimeSignal::Zero);
        let state = ControllerState::zeroed(&cfg);
        assert_eq!(control(&state, 2.0, 0.0, &cfg, None).unwrap(), -8.0);
    }

    #[test]
    fn adaptation_law_examples() {
        let cfg = filter_config(DensityField::Linear { alpha: 4.0 }, TimeSignal::Zero);
        let mut state = ControllerState::zeroed(&cfg);
        state.v_y = DVector::from_vec(vec![1.0, 0.0]);
        // w = (1, 0, 0, 0, 1), c = 0: pure gradient term.
        let dc = adapt_derivative(&state, 1.0, 0.0, &cfg, None).unwrap();
        assert_relative_eq!(dc[0], -0.1);
        assert_relative_eq!(dc[4], -0.1);
        assert_eq!(dc[1], 0.0);

        // y = 0 kills both terms.
        let dc = adapt_derivative(&state, 0.0, 0.0, &cfg, None).unwrap();
        assert!(dc.iter().all(|v| *v == 0.0));

        // ρy = −4y² < 0 flips the leakage sign: +γ·c·|y|.
        let mut state = ControllerState::zeroed(&cfg);
        state.c = DVector::from_vec(vec![10.0, 0.0, 0.0, 0.0, 0.0]);
        let dc = adapt_derivative(&state, 1.0, 0.0, &cfg, None).unwrap();
        // w[0] = V_y1 = 0, so the first component is leakage only.
        assert_relative_eq!(dc[0], 0.1);
        assert_relative_eq!(dc[4], -0.1); // −βy·y with c[4] = 0
    }

    #[test]
    fn goal_sign_condition_checks() {
        let tube = filter_config(
            DensityField::LogSym { alpha: 4.0, b: TimeSignal::constant(1.0) },
            TimeSignal::Zero,
        );
        let grid: Vec<f64> = (1..100).map(|i| -0.99 + 0.02 * i as f64).collect();
        tube.check_sign_condition(&grid, &[0.0, 1.0, 5.0]).unwrap();

        // A plant-side funnel density is positive on both sides of 0 and
        // must be rejected as a control goal.
        let bad = filter_config(
            DensityField::Funnel { alpha: 1.0, b: TimeSignal::constant(1.0) },
            TimeSignal::Zero,
        );
        assert!(matches!(
            bad.check_sign_condition(&grid, &[0.0]),
            Err(AdaptiveError::SignCondition { .. })
        ));
    }

    #[test]
    fn filter_feedback_matrix_recovers_plant_numerator() {
        // Plant with ΔR ≠ 0: R = (λ+1)(λ+2), R_m = (λ+1)².
        let plant = PolyPlant::new(
            Polynomial::from_roots(&[1.0, 1.0, 1.0]),
            Polynomial::from_roots(&[-1.0, -2.0]),
            1.0,
            vec![0.0; 3],
        )
        .unwrap();
        let cfg = filter_config(DensityField::Linear { alpha: 4.0 }, TimeSignal::Zero);
        let dec = decompose(&plant, &cfg.r_m).unwrap();
        let closed = cfg.filter_matrix_with_feedback(dec.c0u());
        let cp = crate::poly::char_poly(&closed);
        for k in 0..=2 {
            assert_relative_eq!(cp.coeff(k), plant.r().coeff(k), epsilon = 1e-12);
        }
        assert!(cp.is_hurwitz());
    }

    #[test]
    fn origin_is_an_equilibrium_of_the_loop() {
        let plant = PolyPlant::new(
            Polynomial::from_roots(&[1.0, 1.0, 1.0]),
            Polynomial::from_roots(&[-1.0, -1.0]),
            1.0,
            vec![0.0, 0.0, 0.0],
        )
        .unwrap();
        let cfg = filter_config(
            DensityField::LogSym { alpha: 4.0, b: TimeSignal::constant(1.0) },
            TimeSignal::Zero,
        );
        let cl = ClosedLoop::new(plant, cfg, TimeSignal::Zero, 1e6, 1e-9, None).unwrap();
        let mut x = cl.initial_state();
        assert!(x.iter().all(|v| *v == 0.0));
        for k in 0..100 {
            x = closed_loop_step(&cl, &x, k as f64 * 1e-3, 1e-3);
        }
        assert!(x.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn gain_compensation_matches_unit_gain_loop() {
        // A known k = 2 compensated at the plant input reproduces the k = 1
        // closed loop exactly.
        let mk = |k: f64| {
            PolyPlant::new(
                Polynomial::from_roots(&[1.0, 1.0, 1.0]),
                Polynomial::from_roots(&[-1.0, -1.0]),
                k,
                vec![0.5, 0.0, 0.0],
            )
            .unwrap()
        };
        let cfg = filter_config(
            DensityField::LogSym { alpha: 4.0, b: TimeSignal::constant(1.0) },
            TimeSignal::Zero,
        );
        let d = TimeSignal::offset_sin(0.5, 1.0, 7.0);
        let a = ClosedLoop::new(mk(1.0), cfg.clone(), d.clone(), 1e6, 1e-9, None).unwrap();
        let b = ClosedLoop::new(mk(2.0), cfg, d, 1e6, 1e-9, None).unwrap();
        let mut xa = a.initial_state();
        let mut xb = b.initial_state();
        for k in 0..2000 {
            let t = k as f64 * 1e-4;
            xa = closed_loop_step(&a, &xa, t, 1e-4);
            xb = closed_loop_step(&b, &xb, t, 1e-4);
        }
        assert_relative_eq!(xa[0], xb[0], epsilon = 1e-9);
        // Parameter trajectories agree too.
        for i in 0..xa.len() {
            assert_relative_eq!(xa[i], xb[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn c0_of_the_demo_loop_matches_decomposition() {
        let cfg = filter_config(DensityField::Linear { alpha: 4.0 }, TimeSignal::Zero);
        let cl =
            ClosedLoop::new(demo_plant(), cfg, TimeSignal::Zero, 1e6, 1e-9, None).unwrap();
        assert_eq!(cl.c0.as_slice(), &[4.0, 12.0, 0.0, 0.0, -5.0]);
        assert_eq!(cl.dim(), 12);
        let x0 = cl.initial_state();
        assert_relative_eq!(cl.output(&x0), 4.0, epsilon = 1e-12);
    }
}
