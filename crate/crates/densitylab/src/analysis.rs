//! Lyapunov machinery: V and V̇ evaluation, density-system classification,
//! closed-form stable/unstable region membership per catalog case, the
//! disturbance level η, and the attraction metric.
//!
//! V̇ along a trajectory is always estimated by central differences on the
//! recorded grid — never by evaluating the vector field analytically — so
//! the same checkers work for closed-loop runs where the field includes the
//! controller. Discretization error is absorbed by a per-sample allowance
//! `10·dt·|V̈|` with |V̈| estimated from second differences.

use crate::density::{DensityField, SignRegion};
use crate::ode::{RegionClass, Trajectory};
use crate::signal::TimeSignal;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("quadratic form matrix must be symmetric positive definite")]
    NotPositiveDefinite,
    #[error("region case {case} does not apply to density field {field}")]
    CaseFieldMismatch { case: &'static str, field: &'static str },
    #[error("missing parameter: {0}")]
    MissingParameter(&'static str),
}

/// Outcome of a single verification check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    InsufficientCoverage,
}

/// Quadratic Lyapunov candidate `V(x) = ½·xᵀPx`, optionally augmented with
/// a parameter-error term `(1/(2β))·|c − c₀|²` for the adaptive loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovForm {
    p: DMatrix<f64>,
    beta: Option<f64>,
}

impl LyapunovForm {
    pub fn quadratic(p: DMatrix<f64>) -> Result<Self, AnalysisError> {
        if p.nrows() != p.ncols() {
            return Err(AnalysisError::DimensionMismatch("P must be square".into()));
        }
        if (&p - p.transpose()).amax() > 1e-12 {
            return Err(AnalysisError::NotPositiveDefinite);
        }
        // Positive definiteness via leading principal minors.
        for k in 1..=p.nrows() {
            let minor = p.view((0, 0), (k, k)).determinant();
            if minor <= 0.0 {
                return Err(AnalysisError::NotPositiveDefinite);
            }
        }
        Ok(LyapunovForm { p, beta: None })
    }

    /// `V = ½·|x|²` in n state variables.
    pub fn half_norm_squared(n: usize) -> Self {
        LyapunovForm { p: DMatrix::identity(n, n), beta: None }
    }

    /// Adds the `(1/(2β))·|c_err|²` augmentation.
    pub fn with_param_term(mut self, beta: f64) -> Result<Self, AnalysisError> {
        if !(beta > 0.0) {
            return Err(AnalysisError::MissingParameter("beta > 0"));
        }
        self.beta = Some(beta);
        Ok(self)
    }

    /// V(x) (+ parameter-error term when configured and supplied).
    pub fn eval(&self, x: &[f64], c_err: Option<&[f64]>) -> Result<f64, AnalysisError> {
        if x.len() != self.p.nrows() {
            return Err(AnalysisError::DimensionMismatch(format!(
                "state has {} components, P is {}x{}",
                x.len(),
                self.p.nrows(),
                self.p.ncols()
            )));
        }
        let mut v = 0.0;
        for i in 0..x.len() {
            for j in 0..x.len() {
                v += 0.5 * x[i] * self.p[(i, j)] * x[j];
            }
        }
        if let Some(c) = c_err {
            let beta = self.beta.ok_or(AnalysisError::MissingParameter("beta"))?;
            v += c.iter().map(|e| e * e).sum::<f64>() / (2.0 * beta);
        }
        Ok(v)
    }
}

/// Inputs of the disturbance level η.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaParams {
    /// Split weight μ ∈ (0, 1).
    pub mu: f64,
    /// Density gain τ > 0.
    pub tau: f64,
    /// Disturbance sup bound d̄ ≥ 0.
    pub d_bar: f64,
    /// Leakage gain γ > 0.
    pub gamma: f64,
    /// Adaptation gain β > 0.
    pub beta: f64,
    /// Parameter-norm bound c̄₀ over the admissible plant set.
    pub c0_bar: f64,
}

impl EtaParams {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(AnalysisError::MissingParameter("mu in (0,1)"));
        }
        if !(self.tau > 0.0 && self.gamma > 0.0 && self.beta > 0.0) {
            return Err(AnalysisError::MissingParameter("tau, gamma, beta > 0"));
        }
        if self.d_bar < 0.0 || self.c0_bar < 0.0 {
            return Err(AnalysisError::MissingParameter("d_bar, c0_bar >= 0"));
        }
        Ok(())
    }
}

/// η = (d̄ + (γ/2β)·c̄₀²) / ((1−μ)·τ): densities with |ρ| above this level
/// certify the stable/unstable domains of the adaptive loop.
pub fn eta(p: &EtaParams) -> f64 {
    (p.d_bar + p.gamma / (2.0 * p.beta) * p.c0_bar * p.c0_bar) / ((1.0 - p.mu) * p.tau)
}

/// Comparison functions W(x) paired with ρ in the V̇ bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "w", rename_all = "snake_case")]
pub enum WForm {
    /// W = −μ·|x|²
    NegMuNormSq { mu: f64 },
    /// W = −μ·x₁²
    NegMuX1Sq { mu: f64 },
    /// W = −x₂² (damped-oscillator energy decay)
    NegX2Sq,
    /// W = τμ·y with y the first state component (closed-loop bounds)
    TauMuY { tau: f64, mu: f64 },
}

impl WForm {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            WForm::NegMuNormSq { mu } => -mu * x.iter().map(|v| v * v).sum::<f64>(),
            WForm::NegMuX1Sq { mu } => -mu * x[0] * x[0],
            WForm::NegX2Sq => -x[1] * x[1],
            WForm::TauMuY { tau, mu } => tau * mu * x[0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSide {
    /// V̇ ≤ ρ·W
    Upper,
    /// V̇ ≥ ρ·W
    Lower,
}

/// Which samples of a trajectory a V̇ check runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionSelect {
    All,
    SignPositive,
    SignNegative,
    /// Samples whose recorded region flag is D_S.
    StoredDs,
    /// Samples whose recorded region flag is D_U.
    StoredDu,
}

impl RegionSelect {
    pub fn label(&self) -> &'static str {
        match self {
            RegionSelect::All => "all",
            RegionSelect::SignPositive => "D+",
            RegionSelect::SignNegative => "D-",
            RegionSelect::StoredDs => "D_S",
            RegionSelect::StoredDu => "D_U",
        }
    }
}

/// Result of a V̇-versus-ρW check over one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub check: String,
    pub region: String,
    /// In-region interior samples actually compared.
    pub samples: usize,
    pub violations: usize,
    /// Minimum slack over compared samples (negative on violation);
    /// +∞ when nothing was compared.
    pub worst_margin: f64,
    pub verdict: Verdict,
    /// First few offending sample indices.
    pub violation_indices: Vec<usize>,
}

/// Checks the central-difference V̇ estimate against ρ(x,t)·W(x) on one
/// side, over the selected region, with `tol` plus a per-sample
/// discretization allowance 10·dt·|V̈|.
pub fn vdot_bound_check(
    traj: &Trajectory,
    field: &DensityField,
    w: &WForm,
    side: BoundSide,
    region: RegionSelect,
    tol: f64,
) -> BoundReport {
    let mut samples = 0usize;
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    let mut indices = Vec::new();
    let fd = field.dim();
    for i in 1..traj.len().saturating_sub(1) {
        let x = traj.state(i);
        let t = traj.time(i);
        let in_region = match region {
            RegionSelect::All => true,
            RegionSelect::SignPositive => field.sign_region(&x[..fd], t) == SignRegion::Positive,
            RegionSelect::SignNegative => field.sign_region(&x[..fd], t) == SignRegion::Negative,
            RegionSelect::StoredDs => traj.diag(i).region == Some(RegionClass::Ds),
            RegionSelect::StoredDu => traj.diag(i).region == Some(RegionClass::Du),
        };
        if !in_region {
            continue;
        }
        let (Some(vdot), Some(vddot)) = (traj.vdot_central(i), traj.vddot_magnitude(i)) else {
            continue;
        };
        let Ok(rho) = field.eval(&x[..fd], t) else {
            continue;
        };
        samples += 1;
        let bound = rho * w.eval(x);
        let allowance = 10.0 * traj.dt() * vddot;
        let margin = match side {
            BoundSide::Upper => bound + tol + allowance - vdot,
            BoundSide::Lower => vdot - (bound - tol - allowance),
        };
        worst = worst.min(margin);
        if margin < 0.0 {
            violations += 1;
            if indices.len() < 16 {
                indices.push(i);
            }
        }
    }
    let verdict = if samples < 3 {
        Verdict::InsufficientCoverage
    } else if violations > 0 {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    BoundReport {
        check: format!("vdot-{}-bound", match side {
            BoundSide::Upper => "upper",
            BoundSide::Lower => "lower",
        }),
        region: region.label().to_string(),
        samples,
        violations,
        worst_margin: worst,
        verdict,
        violation_indices: indices,
    }
}

/// Case selector for the closed-form D_S/D_U membership formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionCase {
    ScalarConstant,
    ScalarFunnel,
    ScalarSignShift,
    ScalarLogRatio,
    PlanarAnnulus,
    PlanarObstacles,
    PlanarNormLog,
    /// Solution-free unit disk of the planar barrier examples; no D_S/D_U
    /// is certified under nonzero disturbances.
    UnitDiskBarrier,
    AdaptiveLinear,
    AdaptiveSymTube,
    AdaptiveAsymTube,
    AdaptiveTracking,
    AdaptiveSliding,
    /// Generic goal-relative regions: D_S = {y > g, |ρ| > η},
    /// D_U = {y < g, |ρ| > η}.
    TheoremGoal,
}

impl RegionCase {
    pub fn label(&self) -> &'static str {
        match self {
            RegionCase::ScalarConstant => "scalar-constant",
            RegionCase::ScalarFunnel => "scalar-funnel",
            RegionCase::ScalarSignShift => "scalar-sign-shift",
            RegionCase::ScalarLogRatio => "scalar-log-ratio",
            RegionCase::PlanarAnnulus => "planar-annulus",
            RegionCase::PlanarObstacles => "planar-obstacles",
            RegionCase::PlanarNormLog => "planar-norm-log",
            RegionCase::UnitDiskBarrier => "unit-disk-barrier",
            RegionCase::AdaptiveLinear => "adaptive-linear",
            RegionCase::AdaptiveSymTube => "adaptive-sym-tube",
            RegionCase::AdaptiveAsymTube => "adaptive-asym-tube",
            RegionCase::AdaptiveTracking => "adaptive-tracking",
            RegionCase::AdaptiveSliding => "adaptive-sliding",
            RegionCase::TheoremGoal => "theorem-goal",
        }
    }

    /// Whether the case certifies an unstable domain at all.
    pub fn has_unstable_region(&self) -> bool {
        !matches!(
            self,
            RegionCase::ScalarConstant
                | RegionCase::AdaptiveLinear
                | RegionCase::AdaptiveSymTube
                | RegionCase::UnitDiskBarrier
        )
    }
}

/// Closed-form membership oracle for one scenario: the case formula, the
/// density field it reads its parameters from, and the disturbance levels.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionOracle {
    pub case: RegionCase,
    pub field: DensityField,
    /// Split weight μ ∈ (0,1).
    pub mu: f64,
    /// Per-channel disturbance sup bounds (second entry ignored for scalar
    /// cases).
    pub d_bar: (f64, f64),
    /// Level η for the adaptive/theorem cases.
    pub eta: Option<f64>,
    /// Goal locus g(t) for [`RegionCase::TheoremGoal`].
    pub goal: Option<TimeSignal>,
}

impl RegionOracle {
    /// Evaluates the published inequalities for the configured case.
    pub fn classify(&self, x: &[f64], t: f64) -> Result<RegionClass, AnalysisError> {
        use DensityField as F;
        use RegionCase as C;
        let mu = self.mu;
        let need_eta = || self.eta.ok_or(AnalysisError::MissingParameter("eta"));
        let class = match (&self.case, &self.field) {
            (C::ScalarConstant, F::Constant { alpha }) => {
                let thr = self.d_bar.0 / (alpha * (1.0 - mu));
                if x[0].abs() > thr {
                    RegionClass::Ds
                } else {
                    RegionClass::Neither
                }
            }
            (C::ScalarFunnel, F::Funnel { alpha, b }) => {
                let b = b.eval(t);
                let thr = self.d_bar.0 * b / (self.d_bar.0 + alpha * (1.0 - mu));
                if x[0].abs() >= b {
                    RegionClass::Forbidden
                } else if x[0].abs() > thr {
                    RegionClass::Ds
                } else {
                    RegionClass::Neither
                }
            }
            (C::ScalarSignShift, F::SignShift { alpha, z }) => {
                let z = z.eval(t);
                let thr = (self.d_bar.0 / ((1.0 - mu) * alpha)).sqrt();
                let v = x[0];
                if z > 0.0 {
                    if v < -thr || v > z + thr {
                        RegionClass::Ds
                    } else if v > thr && v < z {
                        RegionClass::Du
                    } else {
                        RegionClass::Neither
                    }
                } else if z < 0.0 {
                    if v < z - thr || v > thr {
                        RegionClass::Ds
                    } else if v > z + thr && v < -thr {
                        RegionClass::Du
                    } else {
                        RegionClass::Neither
                    }
                } else if v.abs() > thr {
                    RegionClass::Ds
                } else {
                    RegionClass::Neither
                }
            }
            (C::ScalarLogRatio, F::LogRatio { alpha, b_hi, b_lo }) => {
                let (hi, lo) = (b_hi.eval(t), b_lo.eval(t));
                let z = 0.5 * (hi + lo);
                let gap = ((hi - lo) * self.d_bar.0 / (4.0 * (1.0 - mu) * alpha)).sqrt();
                let v = x[0];
                if v <= lo || v >= hi {
                    RegionClass::Forbidden
                } else if v > z + gap {
                    RegionClass::Ds
                } else {
                    RegionClass::Du
                }
            }
            (C::PlanarAnnulus, F::AnnulusLog { .. })
            | (C::PlanarObstacles, F::ObstacleLog { .. }) => {
                self.planar_rho_regions(x, t, true)?
            }
            (C::PlanarNormLog, F::NormLog { .. }) => self.planar_rho_regions(x, t, false)?,
            (C::UnitDiskBarrier, F::ExpBarrier { .. }) | (C::UnitDiskBarrier, F::DiskLog { .. }) => {
                if x[0] * x[0] + x[1] * x[1] <= 1.0 {
                    RegionClass::Forbidden
                } else {
                    RegionClass::Neither
                }
            }
            (C::AdaptiveLinear, F::Linear { alpha }) => {
                if x[0].abs() > need_eta()? / alpha {
                    RegionClass::Ds
                } else {
                    RegionClass::Neither
                }
            }
            (C::AdaptiveSymTube, F::LogSym { alpha, b }) => {
                let b = b.eval(t);
                let e = (need_eta()? / alpha).exp();
                let thr = b * (e - 1.0) / (1.0 + e);
                let v = x[0].abs();
                if v >= b {
                    RegionClass::Forbidden
                } else if v > thr {
                    RegionClass::Ds
                } else {
                    RegionClass::Neither
                }
            }
            (C::AdaptiveAsymTube, F::LogRatioControl { alpha, b_hi, b_lo }) => {
                let (hi, lo) = (b_hi.eval(t), b_lo.eval(t));
                let e = (need_eta()? / alpha).exp();
                // Upper/lower certified strips hug the barriers: the |ρ| > η
                // condition solves to these thresholds on each side of the
                // midline.
                let thr_hi = (hi * e + lo) / (1.0 + e);
                let thr_lo = (hi + lo * e) / (1.0 + e);
                let v = x[0];
                if v <= lo || v >= hi {
                    RegionClass::Forbidden
                } else if (v > 0.0 && v > thr_hi) || (v < 0.0 && v < thr_lo) {
                    RegionClass::Ds
                } else if (v > 0.0 && v < thr_lo) || (v < 0.0 && v > thr_hi) {
                    RegionClass::Du
                } else {
                    RegionClass::Neither
                }
            }
            (C::AdaptiveTracking, F::LinearTrack { alpha, z }) => {
                let z = z.eval(t);
                let thr = need_eta()? / alpha;
                let v = x[0];
                if (v > 0.0 && v > z + thr) || (v < 0.0 && v < z - thr) {
                    RegionClass::Ds
                } else if (v > 0.0 && v < z - thr) || (v < 0.0 && v > z + thr) {
                    RegionClass::Du
                } else {
                    RegionClass::Neither
                }
            }
            (C::AdaptiveSliding, F::LogSurface { alpha, b }) => {
                let b = b.eval(t);
                let level = need_eta()? / alpha;
                let (far, near) = (b + level.exp(), b + (-level).exp());
                let v = x[0];
                if v <= b {
                    RegionClass::Forbidden
                } else if (v > 0.0 && v > far) || (v < 0.0 && v < near) {
                    RegionClass::Ds
                } else if (v > 0.0 && v < near) || (v < 0.0 && v > far) {
                    RegionClass::Du
                } else {
                    RegionClass::Neither
                }
            }
            (C::TheoremGoal, field) => {
                let g = self
                    .goal
                    .as_ref()
                    .ok_or(AnalysisError::MissingParameter("goal signal"))?
                    .eval(t);
                let lvl = need_eta()?;
                match field.eval(&x[..field.dim()], t) {
                    Err(_) => RegionClass::Forbidden,
                    Ok(rho) => {
                        if x[0] > g && rho.abs() > lvl {
                            RegionClass::Ds
                        } else if x[0] < g && rho.abs() > lvl {
                            RegionClass::Du
                        } else {
                            RegionClass::Neither
                        }
                    }
                }
            }
            (case, field) => {
                return Err(AnalysisError::CaseFieldMismatch {
                    case: case.label(),
                    field: field_kind(field),
                })
            }
        };
        Ok(class)
    }

    /// Shared structure of the planar cases: D_S in the positive-sign set
    /// and D_U in the negative-sign set, gated by |ρ|·|xᵢ| > d̄ᵢ/(1−μ) on
    /// the disturbed channels.
    fn planar_rho_regions(
        &self,
        x: &[f64],
        t: f64,
        both_channels: bool,
    ) -> Result<RegionClass, AnalysisError> {
        let rho = match self.field.eval(x, t) {
            Ok(v) => v,
            Err(_) => return Ok(RegionClass::Forbidden),
        };
        let lvl1 = self.d_bar.0 / (1.0 - self.mu);
        let lvl2 = self.d_bar.1 / (1.0 - self.mu);
        let strong = rho.abs() * x[0].abs() > lvl1
            && (!both_channels || rho.abs() * x[1].abs() > lvl2);
        Ok(if rho > 0.0 && strong {
            RegionClass::Ds
        } else if rho < 0.0 && strong {
            RegionClass::Du
        } else {
            RegionClass::Neither
        })
    }
}

fn field_kind(f: &DensityField) -> &'static str {
    match f {
        DensityField::Constant { .. } => "constant",
        DensityField::Funnel { .. } => "funnel",
        DensityField::SignShift { .. } => "sign_shift",
        DensityField::LogRatio { .. } => "log_ratio",
        DensityField::LogRatioControl { .. } => "log_ratio_control",
        DensityField::LogSym { .. } => "log_sym",
        DensityField::Linear { .. } => "linear",
        DensityField::LinearTrack { .. } => "linear_track",
        DensityField::LogSurface { .. } => "log_surface",
        DensityField::AnnulusLog { .. } => "annulus_log",
        DensityField::ObstacleLog { .. } => "obstacle_log",
        DensityField::NormLog { .. } => "norm_log",
        DensityField::ExpBarrier { .. } => "exp_barrier",
        DensityField::DiskLog { .. } => "disk_log",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityVerdict {
    NotDensity,
    WeakDensity,
    Density,
    StrictDensity,
    InsufficientCoverage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideWitness {
    pub region: String,
    pub samples: usize,
    pub violations: usize,
    /// ρ·W kept the required strict sign at every sample.
    pub strict_sign: bool,
    /// W stayed nonzero at every sample.
    pub nonzero_w: bool,
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityClassification {
    pub verdict: DensityVerdict,
    pub stable: Option<SideWitness>,
    pub unstable: Option<SideWitness>,
}

/// Classifies an ensemble of trajectories against the density definitions:
/// condition (a) `V̇ ≤ ρW₁ ≤ 0` over stored D_S samples and condition (b)
/// `V̇ ≥ ρW₂ ≥ 0` over stored D_U samples, strict variants when the
/// inequalities hold strictly.
///
/// `require_unstable` demands D_U coverage (≥ 100 samples) as well; cases
/// without an unstable domain pass `false`.
pub fn classify_density(
    trajs: &[Trajectory],
    field: &DensityField,
    w1: &WForm,
    w2: &WForm,
    tol: f64,
    require_unstable: bool,
) -> DensityClassification {
    let stable = side_witness(trajs, field, w1, BoundSide::Upper, RegionSelect::StoredDs, tol);
    let unstable = side_witness(trajs, field, w2, BoundSide::Lower, RegionSelect::StoredDu, tol);

    const MIN_SAMPLES: usize = 100;
    if stable.samples < MIN_SAMPLES || (require_unstable && unstable.samples < MIN_SAMPLES) {
        return DensityClassification {
            verdict: DensityVerdict::InsufficientCoverage,
            stable: Some(stable.into_public()),
            unstable: Some(unstable.into_public()),
        };
    }

    let with_unstable = require_unstable || unstable.samples >= MIN_SAMPLES;
    let both = [&stable, &unstable];
    let sides: &[&SideAccum] = if with_unstable { &both } else { &both[..1] };
    let verdict = if sides.iter().any(|s| s.violations > 0) || sides.iter().all(|s| !s.nonzero_rho)
    {
        DensityVerdict::NotDensity
    } else if sides.iter().all(|s| s.strict_sign) {
        DensityVerdict::StrictDensity
    } else if sides.iter().all(|s| s.nonzero_w) {
        DensityVerdict::Density
    } else {
        DensityVerdict::WeakDensity
    };
    DensityClassification {
        verdict,
        stable: Some(stable.into_public()),
        unstable: Some(unstable.into_public()),
    }
}

struct SideAccum {
    region: &'static str,
    samples: usize,
    violations: usize,
    strict_sign: bool,
    nonzero_w: bool,
    nonzero_rho: bool,
    worst_margin: f64,
}

impl SideAccum {
    fn into_public(self) -> SideWitness {
        SideWitness {
            region: self.region.to_string(),
            samples: self.samples,
            violations: self.violations,
            strict_sign: self.strict_sign,
            nonzero_w: self.nonzero_w,
            worst_margin: self.worst_margin,
        }
    }
}

fn side_witness(
    trajs: &[Trajectory],
    field: &DensityField,
    w: &WForm,
    side: BoundSide,
    region: RegionSelect,
    tol: f64,
) -> SideAccum {
    let mut acc = SideAccum {
        region: region.label(),
        samples: 0,
        violations: 0,
        strict_sign: true,
        nonzero_w: true,
        nonzero_rho: false,
        worst_margin: f64::INFINITY,
    };
    let fd = field.dim();
    for traj in trajs {
        let report = vdot_bound_check(traj, field, w, side, region, tol);
        acc.samples += report.samples;
        acc.violations += report.violations;
        acc.worst_margin = acc.worst_margin.min(report.worst_margin);
        // Sign conditions of the definitions, sample by sample.
        for i in 1..traj.len().saturating_sub(1) {
            let member = match region {
                RegionSelect::StoredDs => traj.diag(i).region == Some(RegionClass::Ds),
                RegionSelect::StoredDu => traj.diag(i).region == Some(RegionClass::Du),
                _ => true,
            };
            if !member {
                continue;
            }
            let x = traj.state(i);
            let Ok(rho) = field.eval(&x[..fd], traj.time(i)) else { continue };
            if rho.abs() >= 1e-12 {
                acc.nonzero_rho = true;
            }
            let wv = w.eval(x);
            if wv.abs() < 1e-12 {
                acc.nonzero_w = false;
            }
            let rw = rho * wv;
            match side {
                BoundSide::Upper => {
                    if rw > 1e-12 {
                        // ρW₁ must be ≤ 0 for condition (a) at all.
                        acc.violations += 1;
                    }
                    if rw > -1e-12 {
                        acc.strict_sign = false;
                    }
                }
                BoundSide::Lower => {
                    if rw < -1e-12 {
                        acc.violations += 1;
                    }
                    if rw < 1e-12 {
                        acc.strict_sign = false;
                    }
                }
            }
        }
    }
    acc
}

/// Distance target for the attraction metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "kebab-case")]
pub enum AttractionTarget {
    /// |x[component] − g(t)|
    Signal { signal: TimeSignal, component: usize },
    /// | ‖(x₁,x₂)‖ − radius |
    Circle { radius: f64 },
    /// Distance of x[component] to the midline (b̄(t)+b̲(t))/2.
    TubeMidline { b_hi: TimeSignal, b_lo: TimeSignal, component: usize },
}

impl AttractionTarget {
    pub fn distance(&self, x: &[f64], t: f64) -> f64 {
        match self {
            AttractionTarget::Signal { signal, component } => (x[*component] - signal.eval(t)).abs(),
            AttractionTarget::Circle { radius } => {
                ((x[0] * x[0] + x[1] * x[1]).sqrt() - radius).abs()
            }
            AttractionTarget::TubeMidline { b_hi, b_lo, component } => {
                (x[*component] - 0.5 * (b_hi.eval(t) + b_lo.eval(t))).abs()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractionReport {
    /// Max distance to the target over the tail fraction of samples.
    pub tail_limsup: f64,
    /// Whether the per-window distance envelope never increases across the
    /// tail windows.
    pub monotone_approach: bool,
    /// Set when the trajectory was truncated and the tail is shorter than
    /// requested.
    pub truncated: bool,
    pub window_maxima: Vec<f64>,
}

/// Max distance to `target` over the final `tail_fraction` of the
/// trajectory, plus a monotonicity flag over four tail windows.
pub fn attraction_metric(
    traj: &Trajectory,
    target: &AttractionTarget,
    tail_fraction: f64,
) -> AttractionReport {
    let n = traj.len();
    let tail_len = ((n as f64 * tail_fraction).ceil() as usize).clamp(1, n);
    let start = n - tail_len;
    let mut window_maxima = vec![0.0f64; 4.min(tail_len)];
    let windows = window_maxima.len().max(1);
    let mut tail_limsup = 0.0f64;
    for i in start..n {
        let d = target.distance(traj.state(i), traj.time(i));
        tail_limsup = tail_limsup.max(d);
        let w = ((i - start) * windows / tail_len).min(windows - 1);
        window_maxima[w] = window_maxima[w].max(d);
    }
    let monotone_approach =
        window_maxima.windows(2).all(|pair| pair[1] <= pair[0] + 1e-12);
    AttractionReport {
        tail_limsup,
        monotone_approach,
        truncated: !traj.completed(),
        window_maxima,
    }
}

/// Samples V over the stable and unstable regions on a bounding box and
/// time grid: returns (inf over D_S, sup over D_U) when both regions were
/// hit. The comparison `inf > sup` is the decidable proxy for the
/// attraction hypothesis of the region-sandwich proposition.
pub fn lyapunov_gap(
    oracle: &RegionOracle,
    v: &LyapunovForm,
    bbox: &[(f64, f64)],
    t_grid: &[f64],
    n_per_axis: usize,
) -> Option<(f64, f64)> {
    let dim = bbox.len();
    let mut inf_ds = f64::INFINITY;
    let mut sup_du = f64::NEG_INFINITY;
    let mut seen_ds = false;
    let mut seen_du = false;
    let mut x = vec![0.0; dim];
    let total = n_per_axis.pow(dim as u32);
    for &t in t_grid {
        for idx in 0..total {
            let mut rem = idx;
            for d in 0..dim {
                let i = rem % n_per_axis;
                rem /= n_per_axis;
                x[d] = bbox[d].0 + (bbox[d].1 - bbox[d].0) * i as f64 / (n_per_axis - 1) as f64;
            }
            let Ok(class) = oracle.classify(&x, t) else { continue };
            match class {
                RegionClass::Ds => {
                    seen_ds = true;
                    inf_ds = inf_ds.min(v.eval(&x, None).ok()?);
                }
                RegionClass::Du => {
                    seen_du = true;
                    sup_du = sup_du.max(v.eval(&x, None).ok()?);
                }
                _ => {}
            }
        }
    }
    (seen_ds && seen_du).then_some((inf_ds, sup_du))
}
