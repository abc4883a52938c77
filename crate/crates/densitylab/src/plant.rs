//! SISO polynomial plant `Q(p)·y = k·R(p)·u + d` with relative degree 1.
//!
//! Provides validation, an observer-canonical state-space realization with
//! prescribed output-derivative initial conditions, and the
//! `Q = λ·R_m + k₀ᵧ·R_m + Δ̃Q`, `R = R_m + ΔR` decomposition whose
//! coefficients form the unknown-parameter vector c₀ = col{c₀ᵧ, c₀ᵤ, k₀ᵧ}
//! that the adaptive controller estimates.

use crate::poly::Polynomial;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlantError {
    #[error("{0} must be monic")]
    NotMonic(&'static str),
    #[error("{0} must be Hurwitz")]
    NotHurwitz(&'static str),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("gain k must be positive, got {0}")]
    GainNotPositive(f64),
    #[error("decomposition requires k = 1: rescale-input-first")]
    RescaleInputFirst,
    #[error("initial conditions need {expected} output derivatives, got {got}")]
    InitialConditionDimension { expected: usize, got: usize },
    #[error("empty plant set")]
    EmptySet,
}

/// The plant `Q(p)y = kR(p)u + d` with prescribed output derivatives at
/// t = 0. `Q` is monic of degree n, `R` monic Hurwitz of degree n−1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyPlant {
    q: Polynomial,
    r: Polynomial,
    k: f64,
    y0_derivs: Vec<f64>,
}

impl PolyPlant {
    pub fn new(
        q: Polynomial,
        r: Polynomial,
        k: f64,
        y0_derivs: Vec<f64>,
    ) -> Result<Self, PlantError> {
        if !q.is_monic() {
            return Err(PlantError::NotMonic("Q"));
        }
        if !r.is_monic() {
            return Err(PlantError::NotMonic("R"));
        }
        if q.degree() != r.degree() + 1 {
            return Err(PlantError::DegreeMismatch(format!(
                "relative degree must be 1: deg Q = {}, deg R = {}",
                q.degree(),
                r.degree()
            )));
        }
        if !r.is_hurwitz() {
            return Err(PlantError::NotHurwitz("R"));
        }
        if !(k > 0.0) {
            return Err(PlantError::GainNotPositive(k));
        }
        if y0_derivs.len() != q.degree() {
            return Err(PlantError::InitialConditionDimension {
                expected: q.degree(),
                got: y0_derivs.len(),
            });
        }
        Ok(PolyPlant { q, r, k, y0_derivs })
    }

    /// Plant order n = deg Q.
    pub fn order(&self) -> usize {
        self.q.degree()
    }

    pub fn q(&self) -> &Polynomial {
        &self.q
    }

    pub fn r(&self) -> &Polynomial {
        &self.r
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn y0_derivs(&self) -> &[f64] {
        &self.y0_derivs
    }
}

/// Result of extracting the integer part of ΔQ/R_m: all pieces of
/// `Q = λ·R_m + k₀ᵧ·R_m + Δ̃Q` and `R = R_m + ΔR`, plus the stacked
/// parameter vector c₀.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub r_m: Polynomial,
    /// Q_m = λ·R_m (degree n)
    pub q_m: Polynomial,
    /// ΔQ = Q − Q_m (degree ≤ n−1)
    pub delta_q: Polynomial,
    /// ΔR = R − R_m (degree ≤ n−2)
    pub delta_r: Polynomial,
    /// Constant integer part of ΔQ/R_m.
    pub k0y: f64,
    /// Δ̃Q = ΔQ − k₀ᵧ·R_m (degree ≤ n−2)
    pub delta_q_tilde: Polynomial,
    /// col{c₀ᵧ, c₀ᵤ, k₀ᵧ} ∈ ℝ^{2n−1}, coefficients ascending in the basis
    /// [1, p, …, p^{n−2}]. The c₀ᵤ block is −ΔR so that the reduced output
    /// dynamics read ẏ = u − c₀ᵀw + d̂ and F + b·c₀ᵤᵀ has characteristic
    /// polynomial R.
    pub c0: DVector<f64>,
}

impl Decomposition {
    /// Rebuilds (Q, R) from the parts; the round-trip is exact up to float
    /// addition.
    pub fn reconstruct(&self) -> (Polynomial, Polynomial) {
        let q = self
            .r_m
            .shift_up()
            .add(&self.r_m.scale(self.k0y))
            .add(&self.delta_q_tilde);
        let r = self.r_m.add(&self.delta_r);
        (q, r)
    }

    pub fn c0_norm(&self) -> f64 {
        self.c0.norm()
    }

    /// c₀ᵧ block (first n−1 entries).
    pub fn c0y(&self) -> &[f64] {
        let m = (self.c0.len() - 1) / 2;
        &self.c0.as_slice()[..m]
    }

    /// c₀ᵤ block (second n−1 entries).
    pub fn c0u(&self) -> &[f64] {
        let m = (self.c0.len() - 1) / 2;
        &self.c0.as_slice()[m..2 * m]
    }
}

/// Splits the plant against a reference Hurwitz polynomial R_m.
///
/// Requires k = 1; a known k ≠ 1 is handled upstream by scaling the
/// commanded input, so the decomposition always sees the unit-gain plant.
pub fn decompose(plant: &PolyPlant, r_m: &Polynomial) -> Result<Decomposition, PlantError> {
    if plant.k != 1.0 {
        return Err(PlantError::RescaleInputFirst);
    }
    if !r_m.is_monic() {
        return Err(PlantError::NotMonic("R_m"));
    }
    if r_m.degree() != plant.order() - 1 {
        return Err(PlantError::DegreeMismatch(format!(
            "R_m must have degree n-1 = {}, got {}",
            plant.order() - 1,
            r_m.degree()
        )));
    }
    if !r_m.is_hurwitz() {
        return Err(PlantError::NotHurwitz("R_m"));
    }

    let n = plant.order();
    let q_m = r_m.shift_up();
    let delta_q = plant.q.sub(&q_m);
    let delta_r = plant.r.sub(r_m);
    // deg ΔQ ≤ n−1 and deg R_m = n−1, so the quotient is the constant k₀ᵧ.
    let (quot, delta_q_tilde) = delta_q.div_rem(r_m);
    debug_assert!(quot.degree() == 0);
    let k0y = quot.coeff(0);

    let mut c0 = DVector::zeros(2 * n - 1);
    for i in 0..n - 1 {
        c0[i] = delta_q_tilde.coeff(i);
        c0[n - 1 + i] = -delta_r.coeff(i);
    }
    c0[2 * n - 2] = k0y;

    Ok(Decomposition { r_m: r_m.clone(), q_m, delta_q, delta_r, k0y, delta_q_tilde, c0 })
}

/// Observer-canonical realization of the plant:
///
/// ```text
/// ẋ = A·x + B_u·u + B_d·d,    y = C·x
/// ```
///
/// with `C·(sI − A)⁻¹·B_u = kR(s)/Q(s)` and `C·(sI − A)⁻¹·B_d = 1/Q(s)`.
/// The initial state reproduces the plant's prescribed output derivatives
/// under u(0) = d(0) = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceRealization {
    pub a: DMatrix<f64>,
    pub b_u: DVector<f64>,
    pub b_d: DVector<f64>,
    /// Output row (y = cᵀx).
    pub c: DVector<f64>,
    pub x0: DVector<f64>,
}

impl StateSpaceRealization {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn output(&self, x: &[f64]) -> f64 {
        // C = e₁ in observer canonical form.
        x[0]
    }

    /// Markov parameters C·Aⁱ·B for i = 0..count.
    pub fn markov(&self, b: &DVector<f64>, count: usize) -> Vec<f64> {
        let mut v = b.clone();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(v[0]);
            v = &self.a * v;
        }
        out
    }
}

pub fn realize(plant: &PolyPlant) -> StateSpaceRealization {
    let n = plant.order();
    // Row i carries −q_{n−1−i} in column 0 and a superdiagonal 1.
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, 0)] = -plant.q.coeff(n - 1 - i);
        if i + 1 < n {
            a[(i, i + 1)] = 1.0;
        }
    }
    let mut b_u = DVector::zeros(n);
    let mut b_d = DVector::zeros(n);
    for i in 0..n {
        let power = n - 1 - i;
        b_u[i] = plant.k * plant.r.coeff(power);
        b_d[i] = if power == 0 { 1.0 } else { 0.0 };
    }
    let mut c = DVector::zeros(n);
    c[0] = 1.0;

    // x(0) from the output-derivative chain with zero inputs: rows C·Aⁱ.
    let mut obs = DMatrix::zeros(n, n);
    let mut row = c.transpose();
    for i in 0..n {
        obs.set_row(i, &row);
        row = &row * &a;
    }
    let rhs = DVector::from_column_slice(&plant.y0_derivs);
    let x0 = obs
        .lu()
        .solve(&rhs)
        .expect("observer-canonical observability matrix is always invertible");

    StateSpaceRealization { a, b_u, b_d, c, x0 }
}

/// Markov parameters of num(s)/den(s) (den monic) by series long division:
/// the independent oracle for realization checks.
pub fn markov_from_polys(num: &Polynomial, den: &Polynomial, count: usize) -> Vec<f64> {
    let n = den.degree();
    let mut m = Vec::with_capacity(count);
    for k in 0..count {
        let lead = if n >= k + 1 { num.coeff(n - 1 - k) } else { 0.0 };
        let mut acc = lead;
        for j in 1..=k.min(n) {
            acc -= den.coeff(n - j) * m[k - j];
        }
        m.push(acc);
    }
    m
}

/// Largest |c₀| over an explicit family of plants (exact maximum).
pub fn c0_norm_bound(plants: &[PolyPlant], r_m: &Polynomial) -> Result<f64, PlantError> {
    if plants.is_empty() {
        return Err(PlantError::EmptySet);
    }
    let mut best = 0.0f64;
    for p in plants {
        best = best.max(decompose(p, r_m)?.c0_norm());
    }
    Ok(best)
}

/// Interval box over the non-leading coefficients of Q (length n) and R
/// (length n−1), both monic, k = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffBox {
    pub q_lo: Vec<f64>,
    pub q_hi: Vec<f64>,
    pub r_lo: Vec<f64>,
    pub r_hi: Vec<f64>,
}

/// Upper bound on max |c₀|₂ over a coefficient box.
///
/// Every c₀ component is affine in the plant coefficients, so its extreme
/// values sit at box vertices; taking per-coordinate maxima of |c₀ᵢ| over
/// all vertices and then the ℓ₂ norm gives a valid (possibly conservative)
/// bound.
pub fn c0_norm_bound_box(cbox: &CoeffBox, r_m: &Polynomial) -> Result<f64, PlantError> {
    let n = cbox.q_lo.len();
    if n == 0 || cbox.q_hi.len() != n || cbox.r_lo.len() != n - 1 || cbox.r_hi.len() != n - 1 {
        return Err(PlantError::DegreeMismatch(
            "coefficient box needs n entries for Q and n-1 for R".into(),
        ));
    }
    let free = n + (n - 1);
    assert!(free <= 20, "vertex enumeration limited to 2^20 corners");
    let mut coord_max = vec![0.0f64; 2 * n - 1];
    for mask in 0..(1usize << free) {
        let mut qc: Vec<f64> = (0..n)
            .map(|i| if mask >> i & 1 == 1 { cbox.q_hi[i] } else { cbox.q_lo[i] })
            .collect();
        qc.push(1.0);
        let mut rc: Vec<f64> = (0..n - 1)
            .map(|i| if mask >> (n + i) & 1 == 1 { cbox.r_hi[i] } else { cbox.r_lo[i] })
            .collect();
        rc.push(1.0);
        // Vertex plants need not be Hurwitz; only the affine c₀ map matters
        // here, so bypass the full constructor.
        let q = Polynomial::new(qc);
        let delta_q = q.sub(&r_m.shift_up());
        let (quot, delta_q_tilde) = delta_q.div_rem(r_m);
        let k0y = quot.coeff(0);
        let delta_r = Polynomial::new(rc).sub(r_m);
        for i in 0..n - 1 {
            coord_max[i] = coord_max[i].max(delta_q_tilde.coeff(i).abs());
            coord_max[n - 1 + i] = coord_max[n - 1 + i].max(delta_r.coeff(i).abs());
        }
        coord_max[2 * n - 2] = coord_max[2 * n - 2].max(k0y.abs());
    }
    Ok(coord_max.iter().map(|v| v * v).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{integrate, IntegratorConfig, Ode};
    use crate::poly::char_poly;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn demo_plant() -> PolyPlant {
        // Q = (λ−1)³, R = (λ+1)², k = 1, y(0) = 4, ẏ(0) = ÿ(0) = 0
        PolyPlant::new(
            Polynomial::from_roots(&[1.0, 1.0, 1.0]),
            Polynomial::from_roots(&[-1.0, -1.0]),
            1.0,
            vec![4.0, 0.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn decomposition_of_the_demo_plant() {
        let plant = demo_plant();
        let r_m = Polynomial::from_roots(&[-1.0, -1.0]);
        let d = decompose(&plant, &r_m).unwrap();
        assert_eq!(d.k0y, -5.0);
        assert_eq!(d.delta_q_tilde, Polynomial::new(vec![4.0, 12.0]));
        assert!(d.delta_r.is_zero());
        assert_eq!(d.c0.as_slice(), &[4.0, 12.0, 0.0, 0.0, -5.0]);
        assert_relative_eq!(d.c0.norm_squared(), 185.0, epsilon = 1e-9);

        let (q, r) = d.reconstruct();
        for k in 0..=3 {
            assert_relative_eq!(q.coeff(k), plant.q().coeff(k), epsilon = 1e-12);
            assert_relative_eq!(r.coeff(k), plant.r().coeff(k), epsilon = 1e-12);
        }
        assert!(d.delta_q_tilde.degree() <= plant.order() - 2);
        assert!(d.delta_r.degree() <= plant.order() - 2 || d.delta_r.is_zero());
    }

    #[test]
    fn exact_cancellation_yields_zero_parameters() {
        // Q = λ·R_m with R_m = λ + 1, n = 2
        let plant = PolyPlant::new(
            Polynomial::new(vec![0.0, 1.0, 1.0]),
            Polynomial::new(vec![1.0, 1.0]),
            1.0,
            vec![0.0, 0.0],
        )
        .unwrap();
        let r_m = Polynomial::new(vec![1.0, 1.0]);
        let d = decompose(&plant, &r_m).unwrap();
        assert_eq!(d.k0y, 0.0);
        assert!(d.delta_q_tilde.is_zero());
        assert_eq!(d.c0.as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn decompose_rejects_bad_inputs() {
        let plant = demo_plant();
        let scaled =
            PolyPlant::new(plant.q().clone(), plant.r().clone(), 2.0, vec![4.0, 0.0, 0.0])
                .unwrap();
        assert_eq!(
            decompose(&scaled, &Polynomial::from_roots(&[-1.0, -1.0])),
            Err(PlantError::RescaleInputFirst)
        );
        assert_eq!(
            decompose(&plant, &Polynomial::from_roots(&[1.0, -1.0])),
            Err(PlantError::NotHurwitz("R_m"))
        );
        assert!(matches!(
            decompose(&plant, &Polynomial::from_roots(&[-1.0])),
            Err(PlantError::DegreeMismatch(_))
        ));
    }

    #[test]
    fn plant_invariants_are_enforced() {
        assert_eq!(
            PolyPlant::new(
                Polynomial::from_roots(&[1.0, 1.0, 1.0]),
                Polynomial::from_roots(&[1.0, -1.0]),
                1.0,
                vec![0.0; 3],
            ),
            Err(PlantError::NotHurwitz("R"))
        );
        assert!(matches!(
            PolyPlant::new(
                Polynomial::from_roots(&[-1.0, -2.0, -3.0]),
                Polynomial::from_roots(&[-1.0]),
                1.0,
                vec![0.0; 3],
            ),
            Err(PlantError::DegreeMismatch(_))
        ));
        assert_eq!(
            PolyPlant::new(
                Polynomial::from_roots(&[-1.0, -2.0]),
                Polynomial::from_roots(&[-1.0]),
                -1.0,
                vec![0.0; 2],
            ),
            Err(PlantError::GainNotPositive(-1.0))
        );
    }

    struct OpenLoop {
        ss: StateSpaceRealization,
        u: f64,
    }
    impl Ode for OpenLoop {
        fn dim(&self) -> usize {
            self.ss.dim()
        }
        fn rhs(&self, _t: f64, x: &[f64], dx: &mut [f64]) {
            for i in 0..self.ss.dim() {
                let mut acc = self.ss.b_u[i] * self.u;
                for j in 0..self.ss.dim() {
                    acc += self.ss.a[(i, j)] * x[j];
                }
                dx[i] = acc;
            }
        }
    }

    #[test]
    fn realization_reproduces_initial_derivatives_and_char_poly() {
        let plant = demo_plant();
        let ss = realize(&plant);
        assert_relative_eq!(ss.output(ss.x0.as_slice()), 4.0, epsilon = 1e-12);
        let cp = char_poly(&ss.a);
        for k in 0..=3 {
            assert_relative_eq!(cp.coeff(k), plant.q().coeff(k), epsilon = 1e-10);
        }
        // u-channel Markov parameters against the series oracle, d-channel
        // against 1/Q.
        let mu = ss.markov(&ss.b_u, 6);
        let want_u = markov_from_polys(&plant.r().scale(plant.k()), plant.q(), 6);
        let md = ss.markov(&ss.b_d, 6);
        let want_d = markov_from_polys(&Polynomial::constant(1.0), plant.q(), 6);
        for i in 0..6 {
            assert_relative_eq!(mu[i], want_u[i], epsilon = 1e-9);
            assert_relative_eq!(md[i], want_d[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn open_loop_matches_analytic_solution() {
        // (p−1)³y = 0 with y(0)=4, ẏ(0)=ÿ(0)=0 → y(t) = 4e^t(1 − t + t²/2)
        let ss = realize(&demo_plant());
        let x0 = ss.x0.as_slice().to_vec();
        let traj = integrate(&OpenLoop { ss, u: 0.0 }, &x0, 0.0, &IntegratorConfig::new(1e-4, 1.0));
        let y1 = traj.last_state()[0];
        let want = 4.0 * std::f64::consts::E * 0.5;
        assert!((y1 - want).abs() / want.abs() < 1e-6, "y(1) = {y1}, analytic {want}");
    }

    #[test]
    fn zero_initial_conditions_stay_at_rest() {
        let plant = PolyPlant::new(
            Polynomial::from_roots(&[1.0, 1.0, 1.0]),
            Polynomial::from_roots(&[-1.0, -1.0]),
            1.0,
            vec![0.0, 0.0, 0.0],
        )
        .unwrap();
        let ss = realize(&plant);
        let x0 = ss.x0.as_slice().to_vec();
        let traj = integrate(&OpenLoop { ss, u: 0.0 }, &x0, 0.0, &IntegratorConfig::new(1e-3, 1.0));
        assert!(traj.last_state().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn first_order_step_response() {
        // Q = λ + 1, R = 1, k = 1, u ≡ 1: y(1) = 1 − e⁻¹
        let plant = PolyPlant::new(
            Polynomial::new(vec![1.0, 1.0]),
            Polynomial::new(vec![1.0]),
            1.0,
            vec![0.0],
        )
        .unwrap();
        let ss = realize(&plant);
        let x0 = ss.x0.as_slice().to_vec();
        let traj = integrate(&OpenLoop { ss, u: 1.0 }, &x0, 0.0, &IntegratorConfig::new(1e-4, 1.0));
        assert_relative_eq!(traj.last_state()[0], 0.6321205588285577, epsilon = 1e-6);
    }

    #[test]
    fn c0_bounds_over_sets() {
        let r_m = Polynomial::from_roots(&[-1.0, -1.0]);
        let single = c0_norm_bound(&[demo_plant()], &r_m).unwrap();
        assert_relative_eq!(single, 185.0f64.sqrt(), epsilon = 1e-9);

        let trivial =
            PolyPlant::new(r_m.shift_up(), r_m.clone(), 1.0, vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(c0_norm_bound(&[trivial.clone()], &r_m).unwrap(), 0.0);
        let both = c0_norm_bound(&[trivial, demo_plant()], &r_m).unwrap();
        assert_relative_eq!(both, 185.0f64.sqrt(), epsilon = 1e-9);
        assert_eq!(c0_norm_bound(&[], &r_m), Err(PlantError::EmptySet));
    }

    #[test]
    fn box_bound_dominates_sampled_plants() {
        let r_m = Polynomial::from_roots(&[-1.0, -1.0]);
        let cbox = CoeffBox {
            q_lo: vec![-1.5, 2.5, -3.5],
            q_hi: vec![-0.5, 3.5, -2.5],
            r_lo: vec![0.5, 1.5],
            r_hi: vec![1.5, 2.5],
        };
        let bound = c0_norm_bound_box(&cbox, &r_m).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let qc: Vec<f64> = (0..3)
                .map(|i| rng.gen_range(cbox.q_lo[i]..=cbox.q_hi[i]))
                .chain(std::iter::once(1.0))
                .collect();
            let rc: Vec<f64> = (0..2)
                .map(|i| rng.gen_range(cbox.r_lo[i]..=cbox.r_hi[i]))
                .chain(std::iter::once(1.0))
                .collect();
            let q = Polynomial::new(qc);
            let delta_q = q.sub(&r_m.shift_up());
            let (quot, dqt) = delta_q.div_rem(&r_m);
            let delta_r = Polynomial::new(rc).sub(&r_m);
            let norm2: f64 = (0..2)
                .map(|i| dqt.coeff(i) * dqt.coeff(i) + delta_r.coeff(i) * delta_r.coeff(i))
                .sum::<f64>()
                + quot.coeff(0) * quot.coeff(0);
            assert!(norm2.sqrt() <= bound + 1e-12);
        }
    }

    #[test]
    fn random_decompositions_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let n = rng.gen_range(2..=5usize);
            let roots: Vec<f64> = (0..n - 1).map(|_| -rng.gen_range(0.2..3.0)).collect();
            let r = Polynomial::from_roots(&roots);
            let q_coeffs: Vec<f64> =
                (0..n).map(|_| rng.gen_range(-4.0..4.0)).chain(std::iter::once(1.0)).collect();
            let q = Polynomial::new(q_coeffs);
            if q.degree() != n {
                continue;
            }
            let plant = PolyPlant::new(q.clone(), r.clone(), 1.0, vec![0.0; n]).unwrap();
            let rm_roots: Vec<f64> = (0..n - 1).map(|_| -rng.gen_range(0.2..3.0)).collect();
            let r_m = Polynomial::from_roots(&rm_roots);
            let d = decompose(&plant, &r_m).unwrap();
            let (qb, rb) = d.reconstruct();
            let scale = q.coeffs().iter().map(|c| c.abs()).fold(1.0, f64::max);
            for k in 0..=n {
                assert!((qb.coeff(k) - q.coeff(k)).abs() <= 1e-12 * scale);
                assert!((rb.coeff(k) - r.coeff(k)).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn realization_markov_match_on_random_plants() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let n = rng.gen_range(2..=5usize);
            let roots: Vec<f64> = (0..n - 1).map(|_| -rng.gen_range(0.2..3.0)).collect();
            let r = Polynomial::from_roots(&roots);
            let q_coeffs: Vec<f64> =
                (0..n).map(|_| rng.gen_range(-4.0..4.0)).chain(std::iter::once(1.0)).collect();
            let q = Polynomial::new(q_coeffs);
            if q.degree() != n {
                continue;
            }
            let plant = PolyPlant::new(q.clone(), r.clone(), 1.0, vec![0.0; n]).unwrap();
            let ss = realize(&plant);
            let got = ss.markov(&ss.b_u, 2 * n);
            let want = markov_from_polys(&r, &q, 2 * n);
            for i in 0..2 * n {
                assert!(
                    (got[i] - want[i]).abs() <= 1e-9 * want[i].abs().max(1.0),
                    "markov {i}: {} vs {}",
                    got[i],
                    want[i]
                );
            }
        }
    }
}
