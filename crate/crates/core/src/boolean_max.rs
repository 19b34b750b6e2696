//! Max convolutions at the level of distribution functions: Boolean, free and
//! classical max powers, and the maps `X(F) = exp(1 - 1/F)` and
//! `X⁻¹(F) = 1/(1 - log F)`.
//!
//! Every [`DistFunction`] carries the pair `(F(y), 1 - F(y))`. The operations
//! are written in terms of the survival part so that tails of order `1e-12`
//! keep full relative accuracy.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::Measure;

type Eval = dyn Fn(f64) -> (f64, f64) + Send + Sync;

/// A distribution function, evaluated as `(F(y), F̄(y))`.
#[derive(Clone)]
pub struct DistFunction {
    eval: Arc<Eval>,
    label: String,
}

impl std::fmt::Debug for DistFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DistFunction").field("label", &self.label).finish()
    }
}

impl DistFunction {
    /// Wraps a closure returning the survival function `F̄(y)`.
    pub fn from_survival(label: impl Into<String>, sf: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        DistFunction::from_pair(label, move |y| {
            let s = sf(y).clamp(0.0, 1.0);
            (1.0 - s, s)
        })
    }

    pub fn from_cdf(label: impl Into<String>, cdf: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        DistFunction::from_pair(label, move |y| {
            let c = cdf(y).clamp(0.0, 1.0);
            (c, 1.0 - c)
        })
    }

    fn from_pair(label: impl Into<String>, f: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        DistFunction { eval: Arc::new(f), label: label.into() }
    }

    /// `F(y) = μ(-∞, y]`.
    pub fn from_measure(m: &Measure) -> Self {
        let m = m.clone();
        DistFunction::from_survival(format!("{m:?}"), move |y| m.tail(y))
    }

    /// Distribution function of the point mass at `a`.
    pub fn dirac(a: f64) -> Self {
        DistFunction::from_survival(format!("dirac({a})"), move |y| if y >= a { 0.0 } else { 1.0 })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn cdf(&self, y: f64) -> f64 {
        (self.eval)(y).0
    }

    /// `1 - F(y)`, computed without cancellation.
    pub fn sf(&self, y: f64) -> f64 {
        (self.eval)(y).1
    }

    pub fn eval(&self, y: f64) -> (f64, f64) {
        (self.eval)(y)
    }
}

/// `x ∧∪ y` with `(x ∧∪ y)⁻¹ - 1 = (x⁻¹ - 1) + (y⁻¹ - 1)`; zero absorbs.
pub fn bool_min_scalar(x: f64, y: f64) -> f64 {
    bool_min_pair((x, 1.0 - x), (y, 1.0 - y)).0
}

fn bool_min_pair((x, xs): (f64, f64), (y, ys): (f64, f64)) -> (f64, f64) {
    if x <= 0.0 || y <= 0.0 {
        return (0.0, 1.0);
    }
    let s = xs / x + ys / y;
    (1.0 / (1.0 + s), s / (1.0 + s))
}

/// Boolean max convolution, pointwise `F₁(t) ∧∪ F₂(t)`.
pub fn bool_max_conv(f1: &DistFunction, f2: &DistFunction) -> DistFunction {
    let (a, b) = (f1.clone(), f2.clone());
    DistFunction::from_pair(format!("bmax({}, {})", f1.label, f2.label), move |y| bool_min_pair(a.eval(y), b.eval(y)))
}

/// `F^{∨∪ n} = F / (n - (n-1)F)`, tail `n F̄ / (1 + (n-1) F̄)`.
pub fn bool_max_power(f: &DistFunction, n: u32) -> Result<DistFunction> {
    check_n(n)?;
    let g = f.clone();
    let n = n as f64;
    Ok(DistFunction::from_pair(format!("bmax_pow({}, {n})", f.label), move |y| {
        let (c, s) = g.eval(y);
        if c <= 0.0 {
            return (0.0, 1.0);
        }
        let d = 1.0 + (n - 1.0) * s;
        (c / d, n * s / d)
    }))
}

/// Scalar form of `X`; rejects `F = 0`.
pub fn x_map_scalar(f: f64) -> Result<f64> {
    if !(f > 0.0 && f <= 1.0) {
        return Err(Error::Domain { re: f, im: 0.0, reason: "X needs F in (0, 1]".into() });
    }
    Ok(x_map_pair((f, 1.0 - f)).0)
}

fn x_map_pair((c, s): (f64, f64)) -> (f64, f64) {
    if c <= 0.0 {
        return (0.0, 1.0);
    }
    let e = -s / c;
    (e.exp(), -e.exp_m1())
}

/// `X(F)(t) = exp(1 - 1/F(t))`, with `X(F) = 0` where `F = 0`.
pub fn x_map(f: &DistFunction) -> DistFunction {
    let g = f.clone();
    DistFunction::from_pair(format!("X({})", f.label), move |y| x_map_pair(g.eval(y)))
}

/// Scalar form of `X⁻¹`.
pub fn x_inv_scalar(f: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::Domain { re: f, im: 0.0, reason: "X⁻¹ needs F in [0, 1]".into() });
    }
    Ok(x_inv_pair((f, 1.0 - f)).0)
}

fn x_inv_pair((c, s): (f64, f64)) -> (f64, f64) {
    if c <= 0.0 {
        return (0.0, 1.0);
    }
    // -log F, accurate for F near 1
    let l = if s < 0.5 { -(-s).ln_1p() } else { -c.ln() };
    (1.0 / (1.0 + l), l / (1.0 + l))
}

/// `X⁻¹(F)(t) = 1 / (1 - log F(t))`.
pub fn x_inv(f: &DistFunction) -> DistFunction {
    let g = f.clone();
    DistFunction::from_pair(format!("Xinv({})", f.label), move |y| x_inv_pair(g.eval(y)))
}

/// Free max power `max(nF - (n-1), 0)`.
pub fn free_max_power(f: &DistFunction, n: u32) -> Result<DistFunction> {
    check_n(n)?;
    let g = f.clone();
    let n = n as f64;
    Ok(DistFunction::from_pair(format!("fmax_pow({}, {n})", f.label), move |y| {
        let s = (n * g.sf(y)).min(1.0);
        (1.0 - s, s)
    }))
}

/// Classical max power `F^n`.
pub fn classical_max_power(f: &DistFunction, n: u32) -> Result<DistFunction> {
    check_n(n)?;
    let g = f.clone();
    let n = n as f64;
    Ok(DistFunction::from_pair(format!("cmax_pow({}, {n})", f.label), move |y| {
        let (c, s) = g.eval(y);
        if c <= 0.0 {
            return (0.0, 1.0);
        }
        let l = if s < 0.5 { n * (-s).ln_1p() } else { n * c.ln() };
        (l.exp(), -l.exp_m1())
    }))
}

/// Pointwise product `F·G` (classical max convolution of two laws).
pub fn product(f: &DistFunction, g: &DistFunction) -> DistFunction {
    let (a, b) = (f.clone(), g.clone());
    DistFunction::from_pair(format!("({})*({})", f.label, g.label), move |y| {
        let (c1, s1) = a.eval(y);
        let (c2, s2) = b.eval(y);
        (c1 * c2, s1 + s2 - s1 * s2)
    })
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("max powers need n >= 1".into()));
    }
    Ok(())
}
