//! Real univariate polynomials with ascending coefficient storage.
//!
//! Everything the plant machinery needs: arithmetic, long division, the
//! Routh–Hurwitz stability test and the companion (Frobenius) matrix used to
//! realize filters with a prescribed characteristic polynomial.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Coefficients below this magnitude are treated as zero when trimming
/// degrees after subtraction.
const TRIM_EPS: f64 = 1e-12;

/// A real polynomial `c[0] + c[1]·λ + … + c[n]·λⁿ` with `c[n] ≠ 0`.
///
/// The zero polynomial is stored as a single `0.0` coefficient and has
/// degree 0 by convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients, trimming trailing
    /// (near-)zero terms.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.len() > 1 && coeffs.last().copied().unwrap_or(0.0).abs() <= TRIM_EPS {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// `(λ - r₀)(λ - r₁)…` for the given roots.
    pub fn from_roots(roots: &[f64]) -> Self {
        let mut p = Polynomial::new(vec![1.0]);
        for &r in roots {
            p = p.mul(&Polynomial::new(vec![-r, 1.0]));
        }
        p
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of λ^k (0 beyond the stored degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().expect("non-empty by construction")
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1.0
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs: Vec<f64> = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Polynomial::new(coeffs)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs: Vec<f64> = (0..n).map(|k| self.coeff(k) - other.coeff(k)).collect();
        Polynomial::new(coeffs)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect::<Vec<_>>())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial::new(coeffs)
    }

    /// Multiplies by λ (degree shift).
    pub fn shift_up(&self) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![0.0];
        coeffs.extend_from_slice(&self.coeffs);
        Polynomial::new(coeffs)
    }

    /// Euclidean long division: returns `(quotient, remainder)` with
    /// `self = q·divisor + r` and `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Polynomial) -> (Polynomial, Polynomial) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        if self.degree() < dd || self.is_zero() {
            return (Polynomial::zero(), self.clone());
        }
        let mut quot = vec![0.0; self.degree() - dd + 1];
        let lead = divisor.leading();
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for j in 0..=dd {
                rem[k + j] -= q * divisor.coeff(j);
            }
        }
        rem.truncate(dd.max(1));
        (Polynomial::new(quot), Polynomial::new(rem))
    }

    /// Strict Hurwitz test: every root in the open left half-plane.
    ///
    /// Classic Routh array. Necessary condition first (all coefficients of
    /// one sign), then positivity of the first column; any degenerate row is
    /// reported as not strictly Hurwitz.
    pub fn is_hurwitz(&self) -> bool {
        let n = self.degree();
        if self.is_zero() {
            return false;
        }
        if n == 0 {
            // A nonzero constant has no roots.
            return true;
        }
        let sign = self.leading().signum();
        if self.coeffs.iter().any(|&c| c * sign <= 0.0) {
            return false;
        }
        // Rows hold descending-power coefficients: row0 = aₙ, aₙ₋₂, …
        let mut row0: Vec<f64> = self.coeffs.iter().rev().step_by(2).copied().collect();
        let mut row1: Vec<f64> = self.coeffs.iter().rev().skip(1).step_by(2).copied().collect();
        for _ in 0..n.saturating_sub(1) {
            if row1.is_empty() || row1[0] == 0.0 {
                return false;
            }
            let m = row0[0] / row1[0];
            let next_len = row1.len().max(row0.len().saturating_sub(1));
            let mut next = Vec::with_capacity(next_len);
            for j in 0..next_len {
                let a = row0.get(j + 1).copied().unwrap_or(0.0);
                let b = row1.get(j + 1).copied().unwrap_or(0.0);
                next.push(a - m * b);
            }
            while next.len() > 1 && *next.last().unwrap() == 0.0 {
                next.pop();
            }
            row0 = row1;
            row1 = next;
            if row0[0] * sign <= 0.0 {
                return false;
            }
        }
        row1.first().map_or(false, |&c| c * sign > 0.0)
    }

    /// Companion (Frobenius) matrix in controllable-canonical orientation:
    /// the characteristic polynomial of the returned matrix equals `self`.
    ///
    /// For λ² + 2λ + 1 this is `[0 1; -1 -2]`.
    pub fn companion(&self) -> DMatrix<f64> {
        assert!(self.is_monic(), "companion matrix requires a monic polynomial");
        let n = self.degree();
        assert!(n >= 1, "companion matrix requires degree >= 1");
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            a[(i, i + 1)] = 1.0;
        }
        for j in 0..n {
            a[(n - 1, j)] = -self.coeff(j);
        }
        a
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 && self.degree() > 0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0.0 { "-" } else { "+" })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 if a == 1.0 => write!(f, "λ")?,
                1 => write!(f, "{a}·λ")?,
                _ if a == 1.0 => write!(f, "λ^{k}")?,
                _ => write!(f, "{a}·λ^{k}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Characteristic polynomial of a square matrix by Faddeev–LeVerrier,
/// returned monic in ascending order. Used to cross-check realizations.
pub fn char_poly(a: &DMatrix<f64>) -> Polynomial {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "char_poly requires a square matrix");
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m;
        for i in 0..n {
            m[(i, i)] += coeffs[n - k + 1];
        }
        let am = a * &m;
        coeffs[n - k] = -am.trace() / k as f64;
        if k == n {
            m = am.clone();
            for i in 0..n {
                m[(i, i)] += coeffs[0];
            }
        }
    }
    Polynomial::new(coeffs)
}
