//! The transform stack `G, F = 1/G, K = z - F, Ψ, η = Ψ/(1+Ψ), B = z/η` for leaf
//! measures, the η-series coefficients, and the remainder terms of `G, Ψ, η, 1/B, K`.
//!
//! Every leaf evaluation reduces to the moment resolvent
//! `I_k(w) = ∫ t^k / (w - t) dμ(t)`: `G = I_0`, `Ψ(z) = I_1(1/z)`, and the
//! remainders `r_G(w) = I_{p+1}(w)`, `r_Ψ(z) = I_{p+1}(1/z)` need no subtraction.

use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Measure, MomentCount};
use crate::quadrature::{integrate, QuadOptions};
use crate::real::{cabs, cln, csqrt, from_c64, to_c64, Precision, Real};
use qd::Quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfPlane {
    Upper,
    Lower,
    NegativeRealAxis,
}

/// A complex evaluation point tagged with its half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub re: f64,
    pub im: f64,
    pub half_plane: HalfPlane,
}

impl ComplexPoint {
    pub fn new(re: f64, im: f64) -> Result<ComplexPoint> {
        let half_plane = if im > 0.0 {
            HalfPlane::Upper
        } else if im < 0.0 {
            HalfPlane::Lower
        } else if re < 0.0 {
            HalfPlane::NegativeRealAxis
        } else {
            return Err(Error::domain(Complex64::new(re, im), "point on [0, ∞) has no half-plane tag"));
        };
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::domain(Complex64::new(re, im), "non-finite coordinate"));
        }
        Ok(ComplexPoint { re, im, half_plane })
    }

    /// `-i/y`, the evaluation point used by the remainder asymptotics.
    pub fn cone(y: f64) -> ComplexPoint {
        ComplexPoint { re: 0.0, im: -1.0 / y, half_plane: HalfPlane::Lower }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// Membership in `{z ∈ ℂ⁻ : |Re z| < -κ Im z}`.
    pub fn in_cone(&self, kappa: f64) -> bool {
        self.im < 0.0 && self.re.abs() < -kappa * self.im
    }
}

impl TryFrom<Complex64> for ComplexPoint {
    type Error = Error;
    fn try_from(z: Complex64) -> Result<ComplexPoint> {
        ComplexPoint::new(z.re, z.im)
    }
}

impl From<ComplexPoint> for Complex64 {
    fn from(p: ComplexPoint) -> Complex64 {
        p.z()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RemainderKind {
    #[serde(rename = "rG")]
    RG,
    #[serde(rename = "rPsi")]
    RPsi,
    #[serde(rename = "rEta")]
    REta,
    #[serde(rename = "rInvB")]
    RInvB,
    #[serde(rename = "rK")]
    RK,
}

impl std::str::FromStr for RemainderKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rG" => Ok(RemainderKind::RG),
            "rPsi" => Ok(RemainderKind::RPsi),
            "rEta" => Ok(RemainderKind::REta),
            "rInvB" => Ok(RemainderKind::RInvB),
            "rK" => Ok(RemainderKind::RK),
            _ => Err(format!("unknown remainder kind '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderValue {
    pub kind: RemainderKind,
    pub p: u32,
    pub at: ComplexPoint,
    pub value: Complex64,
    /// The subtracted Taylor polynomial dominated the value by more than
    /// `1e3 * eps`; digits were lost.
    pub cancellation: bool,
}

fn czero<R: Real>() -> Complex<R> {
    Complex::new(R::zero(), R::zero())
}

fn creal<R: Real>(x: R) -> Complex<R> {
    Complex::new(x, R::zero())
}

/// `I_k(w) = ∫ t^k / (w - t) dμ(t)` in precision `R`.
pub fn moment_resolvent<R: Real>(m: &Measure, k: u32, w: Complex<R>, opts: &QuadOptions) -> Result<Complex<R>> {
    match m {
        Measure::Atomic(atoms) => {
            let mut acc: Complex<R> = czero();
            for &(a, mass) in atoms {
                let a = R::from_f64(a);
                let d = w - creal(a);
                if d.re == R::zero() && d.im == R::zero() {
                    return Err(Error::domain(to_c64(w), "evaluation point sits on an atom"));
                }
                acc = acc + creal(R::from_f64(mass) * a.powi(k as i32)) / d;
            }
            Ok(acc)
        }
        Measure::GridDensity { xs, ws } => grid_resolvent(xs, ws, k, w, opts),
        Measure::ParetoTail { alpha, xm } => pareto_resolvent(*alpha, *xm, k, w, opts),
        Measure::StandardCauchy => {
            let g = if w.im >= R::zero() {
                creal(R::one()) / (w + Complex::new(R::zero(), R::one()))
            } else {
                creal(R::one()) / (w - Complex::new(R::zero(), R::one()))
            };
            match k {
                0 => Ok(g),
                1 => Ok(w * g - creal(R::one())),
                _ => Err(Error::Moment(format!("Cauchy measure has no moment of order {}", k - 1))),
            }
        }
        Measure::Semicircle { variance } => semicircle_resolvent(*variance, k, w, opts),
        Measure::Mixture(cs) => {
            let mut acc: Complex<R> = czero();
            for (wt, c) in cs {
                acc = acc + moment_resolvent(c, k, w, opts)? * R::from_f64(*wt);
            }
            Ok(acc)
        }
    }
}

fn grid_resolvent<R: Real>(xs: &[f64], ws: &[f64], k: u32, w: Complex<R>, opts: &QuadOptions) -> Result<Complex<R>> {
    if k == 0 {
        let mut acc: Complex<R> = czero();
        for (i, wt) in ws.iter().enumerate() {
            if *wt == 0.0 {
                continue;
            }
            let (a, b) = (R::from_f64(xs[i]), R::from_f64(xs[i + 1]));
            let dens = R::from_f64(*wt) / (b - a);
            let za = w - creal(a);
            let zb = w - creal(b);
            if cabs(zb).to_f64() == 0.0 || cabs(za).to_f64() == 0.0 {
                return Err(Error::domain(to_c64(w), "evaluation point on a grid edge"));
            }
            // log((w-a)/(w-b)) = log1p((b-a)/(w-b)); the series branch is exact far away
            let u = creal(b - a) / zb;
            let lg = if cabs(u).to_f64() < 0.1 { crate::real::cln_1p(u) } else { cln(za) - cln(zb) };
            acc = acc + lg * dens;
        }
        return Ok(acc);
    }
    let dens: Vec<R> = ws
        .iter()
        .enumerate()
        .map(|(i, wt)| R::from_f64(*wt) / (R::from_f64(xs[i + 1]) - R::from_f64(xs[i])))
        .collect();
    let edges: Vec<R> = xs.iter().map(|x| R::from_f64(*x)).collect();
    let f = |t: R| {
        let idx = match edges.iter().position(|e| *e > t) {
            Some(0) | None => return czero(),
            Some(j) => j - 1,
        };
        creal(dens[idx] * t.powi(k as i32)) / (w - creal(t))
    };
    Ok(integrate(f, &edges, opts)?.value)
}

fn semicircle_resolvent<R: Real>(variance: f64, k: u32, w: Complex<R>, opts: &QuadOptions) -> Result<Complex<R>> {
    let v = R::from_f64(variance);
    let r = R::from_f64(2.0) * v.sqrt();
    if k == 0 {
        // product of principal roots selects the branch with G ~ 1/w at infinity
        let s = csqrt(w - creal(r)) * csqrt(w + creal(r));
        let denom = w + s;
        if cabs(denom).to_f64() == 0.0 {
            return Err(Error::domain(to_c64(w), "semicircle resolvent singular"));
        }
        return Ok(creal(R::from_f64(2.0)) / denom);
    }
    let two_over_pi = R::from_f64(2.0) / R::pi();
    let f = |th: R| {
        let (s, c) = th.sin_cos();
        let t = r * c;
        creal(t.powi(k as i32) * two_over_pi * s * s) / (w - creal(t))
    };
    let pi = R::pi();
    let half = R::from_f64(0.5) * pi;
    Ok(integrate(f, &[R::zero(), half, pi], opts)?.value)
}

/// `∫_xm^∞ t^k α xm^α t^{-α-1} / (w - t) dt`.
fn pareto_resolvent<R: Real>(alpha: f64, xm: f64, k: u32, w: Complex<R>, opts: &QuadOptions) -> Result<Complex<R>> {
    if (k as f64) >= alpha + 1.0 {
        return Err(Error::Moment(format!(
            "resolvent of order {k} needs moment {} of a Pareto({alpha}) law",
            k as i32 - 1
        )));
    }
    let a = R::from_f64(alpha);
    let kk = R::from_f64(k as f64);
    let xmr = R::from_f64(xm);
    let wn = w / xmr;
    let one = R::one();
    let x = wn.re;
    let yv = wn.im.abs();
    if yv == R::zero() && x >= one {
        return Err(Error::domain(to_c64(w), "evaluation point on the Pareto support"));
    }
    // beyond M the kernel expands geometrically in w/t
    let mag = cabs(wn).to_f64().max(1.0);
    let big_m = R::from_f64(64.0 * mag);
    let mut tail: Complex<R> = czero();
    let mut wpow = creal(one);
    let mut mpow = (kk - a - one) * big_m.ln();
    let mpow_step = big_m.ln();
    for j in 0..200 {
        let term = wpow * (a * mpow.exp() / (a + R::from_f64(j as f64) + one - kk));
        tail = tail - term;
        if j > 2 && cabs(term).to_f64() <= R::epsilon() * 0.01 * cabs(tail).to_f64() {
            break;
        }
        wpow = wpow * wn;
        mpow = mpow - mpow_step;
    }

    // density times t^k in the scaled variable s = t/xm
    let f = move |s: R| a * ((kk - a - one) * s.ln()).exp();
    let upper = big_m;
    let near_axis = x.to_f64() > 0.5 && yv.to_f64() < 0.5 * x.to_f64();
    let (wa, wb) = if near_axis {
        let lo = if x * R::from_f64(0.5) > one { x * R::from_f64(0.5) } else { one };
        let hi_c = if x * R::from_f64(1.5) > R::from_f64(1.5) { x * R::from_f64(1.5) } else { R::from_f64(1.5) };
        let hi = if hi_c < upper { hi_c } else { upper };
        (lo, hi)
    } else {
        (one, one)
    };

    let mut body: Complex<R> = czero();
    let log_part = |lo: R, hi: R| -> Result<Complex<R>> {
        if !(hi > lo) {
            return Ok(czero());
        }
        let (ul, uh) = (lo.ln(), hi.ln());
        let mut bps = vec![ul];
        let steps = ((uh - ul).to_f64().ceil() as usize).max(1);
        for i in 1..steps {
            bps.push(ul + (uh - ul) * R::from_f64(i as f64 / steps as f64));
        }
        bps.push(uh);
        let integrand = |u: R| {
            let s = u.exp();
            creal(a * ((kk - a) * u).exp()) / (wn - creal(s))
        };
        Ok(integrate(integrand, &bps, opts)?.value)
    };
    if near_axis && wb > wa {
        let fx = f(x);
        let sub = |s: R| (creal(f(s) - fx)) / (wn - creal(s));
        let mut bps = vec![wa];
        if x > wa && x < wb {
            bps.push(x);
        }
        bps.push(wb);
        body = body + integrate(sub, &bps, opts)?.value;
        body = body + creal(fx) * (cln(wn - creal(wa)) - cln(wn - creal(wb)));
        body = body + log_part(one, wa)?;
        body = body + log_part(wb, upper)?;
    } else {
        body = body + log_part(one, upper)?;
    }
    let scale = xmr.powi(k as i32 - 1);
    Ok((body + tail) * scale)
}

fn quad_opts<R: Real>(prec_tol: Option<f64>) -> QuadOptions {
    let o = QuadOptions::for_real::<R>();
    match prec_tol {
        Some(t) => o.with_rel_tol(t),
        None => o,
    }
}

/// `G_μ(z)` in precision `R`.
pub fn cauchy_r<R: Real>(m: &Measure, z: Complex<R>, opts: &QuadOptions) -> Result<Complex<R>> {
    moment_resolvent(m, 0, z, opts)
}

/// Runs `f` in the requested precision and returns a double result.
pub fn with_precision<T>(
    prec: Precision,
    f64_path: impl FnOnce(&QuadOptions) -> Result<T>,
    quad_path: impl FnOnce(&QuadOptions) -> Result<T>,
) -> Result<T> {
    match prec {
        Precision::Double => f64_path(&quad_opts::<f64>(None)),
        Precision::Extended => quad_path(&quad_opts::<Quad>(None)),
    }
}

pub fn cauchy_at(m: &Measure, z: impl Into<Complex64>, prec: Precision) -> Result<Complex64> {
    let z = z.into();
    with_precision(
        prec,
        |o| cauchy_r::<f64>(m, z, o),
        |o| cauchy_r::<Quad>(m, from_c64(z), o).map(to_c64),
    )
}

/// Cauchy transform `G_μ(z) = ∫ 1/(z-t) dμ(t)`.
pub fn cauchy(m: &Measure, z: impl Into<Complex64>) -> Result<Complex64> {
    cauchy_at(m, z, Precision::Double)
}

/// `F_μ = 1/G_μ`.
pub fn f_transform(m: &Measure, z: impl Into<Complex64>) -> Result<Complex64> {
    let z = z.into();
    let g = cauchy(m, z)?;
    if g.norm() == 0.0 {
        return Err(Error::domain(z, "G vanishes"));
    }
    Ok(1.0 / g)
}

/// `K_μ(z) = z - F_μ(z)`.
pub fn k_transform(m: &Measure, z: impl Into<Complex64>) -> Result<Complex64> {
    let z = z.into();
    Ok(z - f_transform(m, z)?)
}

fn check_psi_domain(z: Complex64) -> Result<()> {
    if z.im == 0.0 && z.re > 0.0 {
        return Err(Error::domain(z, "Ψ is not defined on the positive real axis"));
    }
    Ok(())
}

/// `Ψ_μ(z) = ∫ zt/(1-zt) dμ(t)` in precision `R`, evaluated directly as `I_1(1/z)`.
pub fn psi_r<R: Real>(m: &Measure, z: Complex<R>, opts: &QuadOptions) -> Result<Complex<R>> {
    check_psi_domain(to_c64(z))?;
    if z.re == R::zero() && z.im == R::zero() {
        return Ok(czero());
    }
    let w = creal(R::one()) / z;
    match m {
        Measure::StandardCauchy => Ok(w * cauchy_r(m, w, opts)? - creal(R::one())),
        _ => moment_resolvent(m, 1, w, opts),
    }
}

pub fn psi_at(m: &Measure, z: impl Into<Complex64>, prec: Precision) -> Result<Complex64> {
    let z = z.into();
    with_precision(prec, |o| psi_r::<f64>(m, z, o), |o| psi_r::<Quad>(m, from_c64(z), o).map(to_c64))
}

/// `Ψ_μ(z)`, by direct quadrature of the defining integral.
pub fn psi(m: &Measure, z: impl Into<Complex64>) -> Result<Complex64> {
    psi_at(m, z, Precision::Double)
}

/// `Ψ_μ(z) = (1/z) G_μ(1/z) - 1`; loses digits as `z → 0`.
pub fn psi_via_cauchy(m: &Measure, z: impl Into<Complex64>, prec: Precision) -> Result<Complex64> {
    let z = z.into();
    check_psi_domain(z)?;
    if z.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let w = 1.0 / z;
    with_precision(
        prec,
        |o| Ok(w * cauchy_r::<f64>(m, w, o)? - 1.0),
        |o| {
            let wq: Complex<Quad> = from_c64(w);
            let g = cauchy_r::<Quad>(m, wq, o)?;
            Ok(to_c64(wq * g - creal(Quad::ONE)))
        },
    )
}

pub fn eta_r<R: Real>(m: &Measure, z: Complex<R>, opts: &QuadOptions) -> Result<Complex<R>> {
    let p = psi_r(m, z, opts)?;
    let d = creal(R::one()) + p;
    if cabs(d).to_f64() == 0.0 {
        return Err(Error::domain(to_c64(z), "1 + Ψ vanishes"));
    }
    Ok(p / d)
}

pub fn eta_at(m: &Measure, z: impl Into<Complex64>, prec: Precision) -> Result<Complex64> {
    let z = z.into();
    with_precision(prec, |o| eta_r::<f64>(m, z, o), |o| eta_r::<Quad>(m, from_c64(z), o).map(to_c64))
}

/// `η_μ = Ψ_μ / (1 + Ψ_μ)`.
pub fn eta(m: &Measure, z: impl Into<Complex64>) -> Result<Complex64> {
    eta_at(m, z, Precision::Double)
}

/// `B_μ(z) = z / η_μ(z)`.
pub fn b_transform(m: &Measure, z: impl Into<Complex64>) -> Result<Complex64> {
    let z = z.into();
    let e = eta(m, z)?;
    if e.norm() == 0.0 {
        return Err(Error::domain(z, "η vanishes"));
    }
    Ok(z / e)
}

/// Taylor coefficients `e_1..e_p` of `η = Ψ/(1+Ψ)` from the moments `m_1..m_p`.
pub fn eta_series_coeffs(moments: &[f64]) -> Vec<f64> {
    eta_series_coeffs_r(moments)
}

pub fn eta_series_coeffs_r<R: Real>(moments: &[R]) -> Vec<R> {
    let mut e: Vec<R> = Vec::with_capacity(moments.len());
    for n in 0..moments.len() {
        let mut v = moments[n];
        for k in 0..n {
            v = v - e[k] * moments[n - 1 - k];
        }
        e.push(v);
    }
    e
}

/// Moments `m_1..m_p` inverted from `e_1..e_p`.
pub fn moments_from_eta_coeffs(e: &[f64]) -> Vec<f64> {
    let mut m: Vec<f64> = Vec::with_capacity(e.len());
    for n in 0..e.len() {
        let mut v = e[n];
        for k in 0..n {
            v += e[k] * m[n - 1 - k];
        }
        m.push(v);
    }
    m
}

/// Integer moments `m_1..m_p` in precision `R`.
pub fn moments_r<R: Real>(m: &Measure, p: u32) -> Result<Vec<R>> {
    (1..=p).map(|k| moment_r(m, k)).collect()
}

fn moment_r<R: Real>(m: &Measure, k: u32) -> Result<R> {
    let div = || Error::Moment(format!("moment of order {k} diverges"));
    match m {
        Measure::Atomic(atoms) => {
            Ok(atoms.iter().fold(R::zero(), |acc, (a, w)| acc + R::from_f64(*w) * R::from_f64(*a).powi(k as i32)))
        }
        Measure::GridDensity { xs, ws } => {
            let mut acc = R::zero();
            for (i, w) in ws.iter().enumerate() {
                let (a, b) = (R::from_f64(xs[i]), R::from_f64(xs[i + 1]));
                let kk = k as i32 + 1;
                acc = acc + R::from_f64(*w) * (b.powi(kk) - a.powi(kk)) / (R::from_f64(kk as f64) * (b - a));
            }
            Ok(acc)
        }
        Measure::ParetoTail { alpha, xm } => {
            if (k as f64) < *alpha {
                let a = R::from_f64(*alpha);
                Ok(a * R::from_f64(*xm).powi(k as i32) / (a - R::from_f64(k as f64)))
            } else {
                Err(div())
            }
        }
        Measure::StandardCauchy => Err(div()),
        Measure::Semicircle { .. } => Ok(R::from_f64(m.moment(k).finite().ok_or_else(div)?)),
        Measure::Mixture(cs) => {
            let mut acc = R::zero();
            for (w, c) in cs {
                acc = acc + R::from_f64(*w) * moment_r::<R>(c, k)?;
            }
            Ok(acc)
        }
    }
}

fn poly_eval<R: Real>(coeffs: &[R], z: Complex<R>, first_power: i32) -> Complex<R> {
    // Σ c_i z^{first_power + i}
    let mut acc: Complex<R> = czero();
    for c in coeffs.iter().rev() {
        acc = acc * z + creal(*c);
    }
    acc * complex_powi(z, first_power)
}

fn complex_powi<R: Real>(z: Complex<R>, n: i32) -> Complex<R> {
    let mut acc = creal(R::one());
    let mut base = if n < 0 { creal(R::one()) / z } else { z };
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

fn check_p(m: &Measure, p: u32) -> Result<()> {
    if let MomentCount::Finite(q) = m.moment_count() {
        if p > q {
            return Err(Error::Moment(format!("p = {p} exceeds the moment count {q}")));
        }
    }
    Ok(())
}

/// Remainder of kind `kind` at `z` with moment order `p`, in precision `R`.
///
/// Returns the value and the cancellation flag. `rK` is evaluated as `r_{1/B}(1/z)`.
pub fn remainder_r<R: Real>(
    kind: RemainderKind,
    m: &Measure,
    z: Complex<R>,
    p: u32,
    opts: &QuadOptions,
) -> Result<(Complex<R>, bool)> {
    check_p(m, p)?;
    let one = creal(R::one());
    match kind {
        RemainderKind::RG => {
            let v = moment_resolvent(m, p + 1, z, opts)?;
            let w = one / z;
            let flag = cancellation_flag(m, p, w, v)?;
            Ok((v, flag))
        }
        RemainderKind::RK => remainder_r(RemainderKind::RInvB, m, one / z, p, opts),
        RemainderKind::RPsi | RemainderKind::REta | RemainderKind::RInvB => {
            check_psi_domain(to_c64(z))?;
            let r_psi = moment_resolvent(m, p + 1, one / z, opts)?;
            let flag = cancellation_flag(m, p, z, r_psi)?;
            if kind == RemainderKind::RPsi {
                return Ok((r_psi, flag));
            }
            if p == 0 {
                let eta = r_psi / (one + r_psi);
                let v = if kind == RemainderKind::RInvB { eta / z } else { eta };
                return Ok((v, false));
            }
            let mom = moments_r::<R>(m, p)?;
            let e = eta_series_coeffs_r(&mom);
            let pz = poly_eval(&mom, z, 1);
            let psi = pz + r_psi * complex_powi(z, p as i32);
            // Q = P - E(1+P) has no terms below z^{p+1}
            let pp = p as usize;
            let mut q = vec![R::zero(); pp];
            for j in (pp + 1)..=(2 * pp) {
                let mut s = R::zero();
                for a in 1..=pp {
                    let b = j - a;
                    if b >= 1 && b <= pp {
                        s = s + e[a - 1] * mom[b - 1];
                    }
                }
                q[j - pp - 1] = -s;
            }
            let q_over = poly_eval(&q, z, 1);
            let v = q_over / (one + pz) + r_psi / ((one + pz) * (one + psi));
            Ok((v, flag))
        }
    }
}

fn cancellation_flag<R: Real>(m: &Measure, p: u32, z: Complex<R>, r_psi: Complex<R>) -> Result<bool> {
    if p == 0 {
        return Ok(false);
    }
    let mom = moments_r::<R>(m, p)?;
    let poly = cabs(poly_eval(&mom, z, 1)).to_f64();
    let diff = cabs(r_psi * complex_powi(z, p as i32)).to_f64();
    Ok(diff < 1e3 * R::epsilon() * poly)
}

pub fn remainder_at(
    kind: RemainderKind,
    m: &Measure,
    at: ComplexPoint,
    p: u32,
    prec: Precision,
) -> Result<RemainderValue> {
    let z = at.z();
    let (value, cancellation) = with_precision(
        prec,
        |o| remainder_r::<f64>(kind, m, z, p, o),
        |o| remainder_r::<Quad>(kind, m, from_c64(z), p, o).map(|(v, f)| (to_c64(v), f)),
    )?;
    Ok(RemainderValue { kind, p, at, value, cancellation })
}

/// Remainder term in double precision.
pub fn remainder(kind: RemainderKind, m: &Measure, at: ComplexPoint, p: u32) -> Result<RemainderValue> {
    remainder_at(kind, m, at, p, Precision::Double)
}

/// `r_K(w) = w^{p-1}(K(w) - Σ e_i w^{1-i})` by explicit subtraction, `K(w)` itself for `p = 0`.
pub fn remainder_k_direct_r<R: Real>(m: &Measure, w: Complex<R>, p: u32, opts: &QuadOptions) -> Result<Complex<R>> {
    check_p(m, p)?;
    let g = cauchy_r(m, w, opts)?;
    let k = w - creal(R::one()) / g;
    if p == 0 {
        return Ok(k);
    }
    let e = eta_series_coeffs_r(&moments_r::<R>(m, p)?);
    let inv = creal(R::one()) / w;
    let series = poly_eval(&e, inv, 0);
    Ok((k - series) * complex_powi(w, p as i32 - 1))
}

pub fn remainder_k_direct(m: &Measure, w: impl Into<Complex64>, p: u32, prec: Precision) -> Result<Complex64> {
    let w = w.into();
    with_precision(
        prec,
        |o| remainder_k_direct_r::<f64>(m, w, p, o),
        |o| remainder_k_direct_r::<Quad>(m, from_c64(w), p, o).map(to_c64),
    )
}

/// `z^{-p}(Ψ(z) - Σ m_i z^i)` by explicit subtraction in the requested precision.
pub fn remainder_psi_direct(m: &Measure, z: impl Into<Complex64>, p: u32, prec: Precision) -> Result<Complex64> {
    let z = z.into();
    fn go<R: Real>(m: &Measure, z: Complex<R>, p: u32, o: &QuadOptions) -> Result<Complex<R>> {
        let psi = psi_r(m, z, o)?;
        if p == 0 {
            return Ok(psi);
        }
        let mom = moments_r::<R>(m, p)?;
        Ok((psi - poly_eval(&mom, z, 1)) * complex_powi(z, -(p as i32)))
    }
    with_precision(prec, |o| go::<f64>(m, z, p, o), |o| go::<Quad>(m, from_c64(z), p, o).map(to_c64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dirac_and_bernoulli_resolvents() {
        let g = cauchy(&Measure::dirac(0.0), c(0.0, 1.0)).unwrap();
        assert!((g - c(0.0, -1.0)).norm() < 1e-15);
        let g = cauchy(&Measure::bernoulli(), c(0.0, 2.0)).unwrap();
        assert!((g - c(0.0, -0.4)).norm() < 1e-15);
    }

    #[test]
    fn cauchy_law_resolvent() {
        for y in [1.5, 3.0, 10.0] {
            let g = cauchy(&Measure::StandardCauchy, c(0.0, y)).unwrap();
            assert!((g - c(0.0, -1.0 / (y + 1.0))).norm() < 1e-15);
        }
        let k = k_transform(&Measure::StandardCauchy, c(0.3, 0.7)).unwrap();
        assert!((k - c(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn semicircle_reciprocal_at_2i() {
        let f = f_transform(&Measure::semicircle(1.0).unwrap(), c(0.0, 2.0)).unwrap();
        let expected = c(0.0, 1.0 / (2f64.sqrt() - 1.0));
        assert!((f - expected).norm() < 1e-13, "{f}");
    }

    #[test]
    fn semicircle_branch_below_axis_and_far() {
        let m = Measure::semicircle(1.0).unwrap();
        let z = c(0.5, -0.2);
        let g = cauchy(&m, z).unwrap();
        let gc = cauchy(&m, z.conj()).unwrap();
        assert!((g - gc.conj()).norm() < 1e-15);
        let far = cauchy(&m, c(1e8, 1.0)).unwrap();
        assert!((far * c(1e8, 1.0) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn pareto_resolvent_matches_series_oracle() {
        // for |z| < xm: G(z) = -Σ z^j α/(α+j+1)
        let m = Measure::pareto(1.5, 1.0).unwrap();
        let z = c(-0.3, 0.2);
        let mut oracle = c(0.0, 0.0);
        let mut zp = c(1.0, 0.0);
        for j in 0..200 {
            oracle -= zp * (1.5 / (1.5 + j as f64 + 1.0));
            zp *= z;
        }
        let g = cauchy(&m, z).unwrap();
        assert!((g - oracle).norm() < 1e-13, "{g} vs {oracle}");
    }

    #[test]
    fn pareto_resolvent_near_axis_matches_density() {
        let m = Measure::pareto(1.5, 1.0).unwrap();
        for x in [1.2, 3.0, 40.0] {
            let eps = 1e-7 * x;
            let g = cauchy(&m, c(x, eps)).unwrap();
            let d = -g.im / std::f64::consts::PI;
            assert!((d / m.density(x) - 1.0).abs() < 1e-5, "x={x} d={d}");
        }
    }

    #[test]
    fn extended_precision_agrees_with_double() {
        let m = Measure::pareto(1.5, 2.0).unwrap();
        let z = c(3.0, 0.5);
        let a = cauchy_at(&m, z, Precision::Double).unwrap();
        let b = cauchy_at(&m, z, Precision::Extended).unwrap();
        assert!((a - b).norm() < 1e-13 * b.norm());
    }

    #[test]
    fn grid_resolvent_matches_quadrature() {
        let m = Measure::grid(vec![0.0, 1.0, 2.5], vec![0.3, 0.7]).unwrap();
        let z = c(1.2, 0.4);
        let g = cauchy(&m, z).unwrap();
        let mut q = c(0.0, 0.0);
        let n = 200000;
        for i in 0..n {
            let t = 2.5 * (i as f64 + 0.5) / n as f64;
            q += m.density(t) * 2.5 / n as f64 / (z - t);
        }
        assert!((g - q).norm() < 1e-8);
    }

    #[test]
    fn psi_of_atoms() {
        let p = psi(&Measure::dirac(1.0), c(-1.0, 0.0)).unwrap();
        assert!((p - c(-0.5, 0.0)).norm() < 1e-15);
        let z = c(0.2, 0.3);
        let p = psi(&Measure::dirac(2.5), z).unwrap();
        assert!((p - 2.5 * z / (1.0 - 2.5 * z)).norm() < 1e-15);
        assert!(psi(&Measure::dirac(1.0), c(0.5, 0.0)).is_err());
    }

    #[test]
    fn psi_paths_agree_for_pareto() {
        let m = Measure::pareto(1.5, 1.0).unwrap();
        let z = c(0.0, -1e-2);
        let a = psi(&m, z).unwrap();
        let b = psi_via_cauchy(&m, z, Precision::Double).unwrap();
        assert!((a - b).norm() < 1e-8, "{a} {b}");
    }

    #[test]
    fn eta_and_b_of_atoms() {
        let z = c(-0.4, 0.3);
        assert!((eta(&Measure::dirac(1.0), z).unwrap() - z).norm() < 1e-15);
        assert!((eta(&Measure::dirac(3.0), z).unwrap() - 3.0 * z).norm() < 1e-14);
        assert!((b_transform(&Measure::dirac(2.0), z).unwrap() - 0.5).norm() < 1e-15);
    }

    #[test]
    fn eta_negative_on_negative_axis() {
        for m in [Measure::pareto(1.5, 1.0).unwrap(), Measure::pareto(0.5, 2.0).unwrap(), Measure::dirac(3.0)] {
            let e = eta(&m, c(-1e-3, 0.0)).unwrap();
            assert!(e.re < 0.0 && e.im.abs() < 1e-15);
        }
    }

    #[test]
    fn eta_series_examples() {
        assert_eq!(eta_series_coeffs(&[0.7]), vec![0.7]);
        let e = eta_series_coeffs(&[2.0, 5.0]);
        assert_eq!(e, vec![2.0, 1.0]);
        assert_eq!(eta_series_coeffs(&[1.0, 1.0, 1.0]), vec![1.0, 0.0, 0.0]);
        let m = moments_from_eta_coeffs(&e);
        assert_eq!(m, vec![2.0, 5.0]);
    }

    #[test]
    fn cauchy_remainder_of_dirac() {
        // r_G(w) = a^2/(w - a) for p = 1
        let a = 0.7;
        let w = c(3.0, 2.0);
        let r = remainder_r::<f64>(RemainderKind::RG, &Measure::dirac(a), w, 1, &QuadOptions::for_real::<f64>())
            .unwrap()
            .0;
        assert!((r - a * a / (w - a)).norm() < 1e-15);
        let naive = w * w * (cauchy(&Measure::dirac(a), w).unwrap() - 1.0 / w - a / (w * w));
        assert!((r - naive).norm() < 1e-12);
    }

    #[test]
    fn eta_and_inverse_b_remainders_coincide() {
        let m = Measure::pareto(2.5, 1.0).unwrap();
        let at = ComplexPoint::cone(50.0);
        let a = remainder(RemainderKind::REta, &m, at, 2).unwrap();
        let b = remainder(RemainderKind::RInvB, &m, at, 2).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn analytic_eta_remainder_matches_subtraction() {
        let m = Measure::pareto(1.5, 1.0).unwrap();
        let z = c(-0.05, -0.1);
        let at = ComplexPoint::new(z.re, z.im).unwrap();
        let r = remainder_at(RemainderKind::REta, &m, at, 1, Precision::Extended).unwrap().value;
        let e = eta_at(&m, z, Precision::Extended).unwrap();
        let naive = (e - 3.0 * z) / z;
        assert!((r - naive).norm() < 1e-10 * r.norm(), "{r} {naive}");
    }

    #[test]
    fn k_remainder_paths_agree() {
        let m = Measure::pareto(1.5, 1.0).unwrap();
        let z = c(0.0, -0.05);
        let at = ComplexPoint::new(z.re, z.im).unwrap();
        let a = remainder_at(RemainderKind::RInvB, &m, at, 1, Precision::Extended).unwrap().value;
        let b = remainder_k_direct(&m, 1.0 / z, 1, Precision::Extended).unwrap();
        assert!((a - b).norm() < 1e-10 * a.norm());
    }

    #[test]
    fn remainder_rejects_excess_order() {
        let m = Measure::pareto(1.5, 1.0).unwrap();
        assert!(matches!(remainder(RemainderKind::RPsi, &m, ComplexPoint::cone(10.0), 2), Err(Error::Moment(_))));
    }

    #[test]
    fn tagged_points() {
        assert_eq!(ComplexPoint::new(-1.0, 0.0).unwrap().half_plane, HalfPlane::NegativeRealAxis);
        assert!(ComplexPoint::new(1.0, 0.0).is_err());
        assert!(ComplexPoint::cone(10.0).in_cone(1.0));
    }
}
