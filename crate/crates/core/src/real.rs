//! Scalar abstraction over `f64` and double-double (`qd::Quad`) arithmetic.
//!
//! Leaf transforms, the adaptive quadrature and the remainder cross-check path are
//! generic over [`Real`], so the same code runs at ~16 or ~32 significant digits.

use std::fmt::Debug;
use std::ops::Neg;
use std::sync::OnceLock;

use num_complex::{Complex, Complex64};
use num_traits::Num;
use qd::Quad;
use serde::{Deserialize, Serialize};

/// Working precision selector exposed through the public API and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    Extended,
}

impl Precision {
    /// Unit roundoff of the working precision.
    pub fn epsilon(self) -> f64 {
        match self {
            Precision::Double => f64::EPSILON,
            Precision::Extended => Quad::EPSILON.0,
        }
    }

    /// Default relative quadrature tolerance.
    pub fn quad_tol(self) -> f64 {
        match self {
            Precision::Double => 1e-13,
            Precision::Extended => 1e-28,
        }
    }
}

impl std::str::FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(format!("unknown precision '{other}' (expected double or extended)")),
        }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule<R> {
    pub nodes: Vec<R>,
    pub weights: Vec<R>,
}

pub trait Real:
    Copy + Send + Sync + Debug + PartialOrd + Num + Neg<Output = Self> + 'static
{
    /// Points per Gauss–Legendre panel.
    const GAUSS_POINTS: usize;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn atan2(self, x: Self) -> Self;
    fn pi() -> Self;
    fn epsilon() -> f64;
    fn gauss_rule() -> &'static GaussRule<Self>;

    /// `self^e` for `self > 0`.
    fn powf(self, e: Self) -> Self {
        (e * self.ln()).exp()
    }

    fn powi(self, n: i32) -> Self {
        let mut acc = Self::one();
        let mut base = if n < 0 { Self::one() / self } else { self };
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }
}

impl Real for f64 {
    const GAUSS_POINTS: usize = 15;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn epsilon() -> f64 {
        f64::EPSILON
    }
    fn powf(self, e: Self) -> Self {
        f64::powf(self, e)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn gauss_rule() -> &'static GaussRule<Self> {
        static RULE: OnceLock<GaussRule<f64>> = OnceLock::new();
        RULE.get_or_init(|| gauss_legendre(Self::GAUSS_POINTS))
    }
}

impl Real for Quad {
    const GAUSS_POINTS: usize = 24;

    fn from_f64(x: f64) -> Self {
        Quad::from_f64(x)
    }
    fn to_f64(self) -> f64 {
        self.0 + self.1
    }
    fn abs(self) -> Self {
        Quad::abs(self)
    }
    fn sqrt(self) -> Self {
        if self.0 <= 0.0 {
            return Quad::ZERO;
        }
        Quad::sqrt(self)
    }
    fn exp(self) -> Self {
        Quad::exp(self)
    }
    fn ln(self) -> Self {
        Quad::ln(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        quad_sin_cos(self)
    }
    fn atan2(self, x: Self) -> Self {
        if self.0 == 0.0 && x.0 == 0.0 {
            return Quad::ZERO;
        }
        // Newton on y cos t - x sin t = 0, seeded by the f64 angle.
        let mut t = Quad::from_f64(self.0.atan2(x.0));
        for _ in 0..2 {
            let (s, c) = quad_sin_cos(t);
            t = t + (self * c - x * s) / (self * s + x * c);
        }
        t
    }
    fn pi() -> Self {
        Quad::PI
    }
    fn epsilon() -> f64 {
        Quad::EPSILON.0
    }
    fn gauss_rule() -> &'static GaussRule<Self> {
        static RULE: OnceLock<GaussRule<Quad>> = OnceLock::new();
        RULE.get_or_init(|| gauss_legendre(Self::GAUSS_POINTS))
    }
}

fn quad_sin_cos(x: Quad) -> (Quad, Quad) {
    let half_pi = Quad::PI * Quad::from_f64(0.5);
    let k = (x.0 / half_pi.0).round();
    let r = x - half_pi * Quad::from_f64(k);
    // Taylor series on |r| <= pi/4.
    let r2 = r * r;
    let mut sin = r;
    let mut cos = Quad::ONE;
    let mut term_s = r;
    let mut term_c = Quad::ONE;
    for n in 1..40 {
        let a = (2 * n) as f64;
        term_s = -term_s * r2 / Quad::from_f64(a * (a + 1.0));
        term_c = -term_c * r2 / Quad::from_f64((a - 1.0) * a);
        sin = sin + term_s;
        cos = cos + term_c;
        if term_s.0.abs() < 1e-34 && term_c.0.abs() < 1e-34 {
            break;
        }
    }
    match (k as i64).rem_euclid(4) {
        0 => (sin, cos),
        1 => (cos, -sin),
        2 => (-sin, -cos),
        _ => (-cos, sin),
    }
}

/// Gauss–Legendre rule of order `n` computed by Newton iteration in the target precision.
pub fn gauss_legendre<R: Real>(n: usize) -> GaussRule<R> {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let one = R::one();
    let two = R::from_f64(2.0);
    for i in 0..n {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = R::from_f64(guess);
        let mut deriv = one;
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            deriv = dp;
            let dx = p / dp;
            x = x - dx;
            if dx.abs().to_f64() < R::epsilon() * 4.0 {
                let (_, dp) = legendre(n, x);
                deriv = dp;
                break;
            }
        }
        nodes.push(x);
        weights.push(two / ((one - x * x) * deriv * deriv));
    }
    GaussRule { nodes, weights }
}

fn legendre<R: Real>(n: usize, x: R) -> (R, R) {
    let one = R::one();
    let mut p0 = one;
    let mut p1 = x;
    for k in 2..=n {
        let kf = R::from_f64(k as f64);
        let p2 = ((R::from_f64(2.0) * kf - one) * x * p1 - (kf - one) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = R::from_f64(n as f64);
    let dp = nf * (x * p1 - p0) / (x * x - one);
    (p1, dp)
}

pub fn to_c64<R: Real>(z: Complex<R>) -> Complex64 {
    Complex64::new(z.re.to_f64(), z.im.to_f64())
}

pub fn from_c64<R: Real>(z: Complex64) -> Complex<R> {
    Complex::new(R::from_f64(z.re), R::from_f64(z.im))
}

pub fn cabs<R: Real>(z: Complex<R>) -> R {
    let (a, b) = (z.re.abs(), z.im.abs());
    let (big, small) = if a > b { (a, b) } else { (b, a) };
    if big == R::zero() {
        return R::zero();
    }
    let q = small / big;
    big * (R::one() + q * q).sqrt()
}

/// Principal complex logarithm.
pub fn cln<R: Real>(z: Complex<R>) -> Complex<R> {
    Complex::new(cabs(z).ln(), z.im.atan2(z.re))
}

/// `ln(1 + u)` without cancellation for small `|u|`.
pub fn cln_1p<R: Real>(u: Complex<R>) -> Complex<R> {
    if cabs(u).to_f64() < 0.1 {
        let mut sum = Complex::new(R::zero(), R::zero());
        let mut power = u;
        for k in 1..200 {
            let term = power / R::from_f64(k as f64);
            sum = if k % 2 == 1 { sum + term } else { sum - term };
            if cabs(term).to_f64() <= R::epsilon() * cabs(sum).to_f64() * 0.1 {
                break;
            }
            power = power * u;
        }
        sum
    } else {
        cln(Complex::new(R::one(), R::zero()) + u)
    }
}

/// Principal complex square root.
pub fn csqrt<R: Real>(z: Complex<R>) -> Complex<R> {
    let r = cabs(z);
    if r == R::zero() {
        return z;
    }
    let half = R::from_f64(0.5);
    if z.re >= R::zero() {
        let t = (half * (r + z.re)).sqrt();
        Complex::new(t, z.im / (t + t))
    } else {
        let t = (half * (r - z.re)).sqrt();
        let t = if z.im < R::zero() { -t } else { t };
        Complex::new(z.im / (t + t), t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials_exactly() {
        let rule = f64::gauss_rule();
        // degree 2n-1 = 29 exact
        let integral: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(28))
            .sum();
        assert!((integral - 2.0 / 29.0).abs() < 1e-14);
    }

    #[test]
    fn quad_rule_reaches_double_double_accuracy() {
        let rule = Quad::gauss_rule();
        let mut sum = Quad::ZERO;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            sum = sum + *w * x.powi(10);
        }
        let err = sum - Quad::from_f64(2.0) / Quad::from_f64(11.0);
        assert!(err.0.abs() < 1e-30, "{err:?}");
    }

    #[test]
    fn quad_trig_and_atan2() {
        let x = Quad::from_f64(0.3);
        let (s, c) = x.sin_cos();
        let one = s * s + c * c - Quad::ONE;
        assert!(one.0.abs() < 1e-31);
        let t = s.atan2(c);
        assert!((t - x).0.abs() < 1e-31);
        let (s, c) = Quad::from_f64(2.5).sin_cos();
        assert!((s.0 - 2.5f64.sin()).abs() < 1e-15 && (c.0 - 2.5f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn complex_sqrt_branch() {
        let z = Complex64::new(-4.0, 1e-30);
        let r = csqrt(z);
        assert!((r.im - 2.0).abs() < 1e-14);
        let z = Complex64::new(-4.0, -1e-30);
        assert!((csqrt(z).im + 2.0).abs() < 1e-14);
    }

    #[test]
    fn log1p_matches_log_for_moderate_arguments() {
        let u = Complex64::new(0.05, -0.02);
        let a = cln_1p(u);
        let b = (Complex64::new(1.0, 0.0) + u).ln();
        assert!((a - b).norm() < 1e-15);
    }
}
