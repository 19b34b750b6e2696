//! Stieltjes inversion of transform handles: densities, atoms, tail masses and
//! total mass.
//!
//! Densities come from `-Im G(x + iε)/π` on a decreasing ε schedule,
//! extrapolated to `ε = 0` with Neville's scheme. Tail masses use the contour
//! identity
//!
//! ```text
//! μ(y, ∞) = -(1/π) ∫_0^∞ Re[G(y + is) - 1/(y - c + is)] ds,   c < y,
//! ```
//!
//! which needs no density extrapolation and keeps relative accuracy far out in
//! the tail. A density-integral-plus-power-law fit is available as
//! [`TailMethod::DensityFit`].

use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolean_conv::TransformHandle;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::real::Precision;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    /// Line integral of `Re G` above `y`.
    Contour,
    /// `∫_y^{Y} density` plus a power law fitted on `[Y/10, Y]`, `Y = upper_factor · y`.
    DensityFit { upper_factor: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionProfile {
    /// Strictly decreasing imaginary offsets.
    pub eps_schedule: Vec<f64>,
    /// Degree of the extrapolating polynomial in ε (uses the `order + 1` smallest levels).
    pub order: usize,
    /// Abscissae for density tables.
    pub x_grid: Vec<f64>,
    pub clip_negative: bool,
    pub precision: Precision,
    pub tail_method: TailMethod,
    /// Relative tolerance for tail and mass quadratures.
    pub quad_tol: f64,
    /// Points in the sign-change scan used by [`atoms`].
    pub scan_points: usize,
    /// Offset used by [`total_mass`].
    pub mass_eps: f64,
}

impl Default for InversionProfile {
    fn default() -> Self {
        InversionProfile {
            eps_schedule: vec![1e-2, 1e-3, 1e-4],
            order: 2,
            x_grid: Vec::new(),
            clip_negative: true,
            precision: Precision::Double,
            tail_method: TailMethod::Contour,
            quad_tol: 1e-10,
            scan_points: 2001,
            mass_eps: 1.0,
        }
    }
}

impl InversionProfile {
    pub fn validate(&self) -> Result<()> {
        let e = &self.eps_schedule;
        if e.len() < 2 || e.iter().any(|v| !(*v > 0.0 && v.is_finite())) || e.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParameter(
                "eps schedule needs at least two strictly decreasing positive levels".into(),
            ));
        }
        if self.order == 0 || self.order >= e.len() {
            return Err(Error::InvalidParameter(format!(
                "extrapolation order must lie in 1..{} (got {})",
                e.len(),
                self.order
            )));
        }
        if !(self.mass_eps > 0.0) || !(self.quad_tol > 0.0) || self.scan_points < 3 {
            return Err(Error::InvalidParameter("mass_eps, quad_tol must be positive and scan_points >= 3".into()));
        }
        if let TailMethod::DensityFit { upper_factor } = self.tail_method {
            if !(upper_factor > 10.0) {
                return Err(Error::InvalidParameter("density-fit upper_factor must exceed 10".into()));
            }
        }
        Ok(())
    }

    fn levels(&self) -> &[f64] {
        &self.eps_schedule[self.eps_schedule.len() - self.order - 1..]
    }
}

/// Value of the interpolating polynomial through `(xs, ys)` at `x0`.
pub fn neville(xs: &[f64], ys: &[f64], x0: f64) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = ((x0 - xs[i + k]) * p[i] + (xs[i] - x0) * p[i + 1]) / (xs[i] - xs[i + k]);
        }
    }
    p[0]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityDetail {
    pub x: f64,
    pub value: f64,
    /// `-Im G(x + iε)/π` per level, after subtracting known atoms.
    pub raw: Vec<f64>,
    /// Magnitude removed by clipping a negative extrapolation.
    pub clipped: f64,
    /// `ε · (-Im G)` at the smallest level.
    pub atom_indicator: f64,
}

/// Extrapolated density at `x`.
pub fn density_at(h: &TransformHandle, x: f64, prof: &InversionProfile) -> Result<f64> {
    Ok(density_detail(h, x, prof, &[])?.value)
}

/// Density with diagnostics; `known_atoms` are removed analytically first.
pub fn density_detail(
    h: &TransformHandle,
    x: f64,
    prof: &InversionProfile,
    known_atoms: &[(f64, f64)],
) -> Result<DensityDetail> {
    prof.validate()?;
    let eps = prof.levels();
    let mut raw = Vec::with_capacity(eps.len());
    let mut indicator = Vec::with_capacity(eps.len());
    for &e in eps {
        let g = h.g_at(Complex64::new(x, e), prof.precision)?;
        let mut v = -g.im;
        for &(a, w) in known_atoms {
            v -= w * e / ((x - a) * (x - a) + e * e);
        }
        indicator.push(e * v);
        raw.push(v / PI);
    }
    let n = indicator.len();
    let last = indicator[n - 1];
    if last > 1e-10 && last / indicator[n - 2] > 0.5 {
        return Err(Error::AtomProximity { x, weight: last });
    }
    let mut value = neville(eps, &raw, 0.0);
    let mut clipped = 0.0;
    if value < 0.0 && prof.clip_negative {
        clipped = -value;
        value = 0.0;
    }
    Ok(DensityDetail { x, value, raw, clipped, atom_indicator: last })
}

/// Densities over `prof.x_grid`, evaluated in parallel.
pub fn density_table(h: &TransformHandle, prof: &InversionProfile) -> Result<Vec<DensityDetail>> {
    prof.validate()?;
    prof.x_grid.par_iter().map(|&x| density_detail(h, x, prof, &[])).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

fn bisect_re_f(h: &TransformHandle, lo: f64, hi: f64, e: f64, prec: Precision) -> Result<Option<f64>> {
    let re = |x: f64| -> Result<f64> { Ok(h.f_at(Complex64::new(x, e), prec)?.re) };
    let (mut a, mut b) = (lo, hi);
    if !(re(a)? <= 0.0 && re(b)? >= 0.0) {
        return Ok(None);
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = re(m)?;
        if fm < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

/// Atoms in `[window.0, window.1]`: zeros of `Re F(x + iε)` whose mass
/// estimate `ε / Im F` is stable across the schedule.
pub fn atoms(h: &TransformHandle, window: (f64, f64), prof: &InversionProfile) -> Result<Vec<Atom>> {
    prof.validate()?;
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidParameter(format!("atom window [{lo}, {hi}] must be bounded and non-empty")));
    }
    let eps = prof.levels();
    let e_min = eps[eps.len() - 1];
    let n = prof.scan_points;
    let step = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    let vals: Vec<f64> = xs
        .par_iter()
        .map(|&x| h.f_at(Complex64::new(x, e_min), prof.precision).map(|f| f.re))
        .collect::<Result<_>>()?;
    let mut found = Vec::new();
    for i in 0..n - 1 {
        if !(vals[i] < 0.0 && vals[i + 1] >= 0.0) {
            continue;
        }
        let mut locs = Vec::with_capacity(eps.len());
        let mut masses = Vec::with_capacity(eps.len());
        for &e in eps {
            let mut bracket = (xs[i], xs[i + 1]);
            let mut root = None;
            for _ in 0..4 {
                root = bisect_re_f(h, bracket.0, bracket.1, e, prof.precision)?;
                if root.is_some() {
                    break;
                }
                bracket = (bracket.0 - step, bracket.1 + step);
            }
            let Some(x) = root else { break };
            let f = h.f_at(Complex64::new(x, e), prof.precision)?;
            locs.push(x);
            masses.push(e / f.im);
        }
        if masses.len() != eps.len() {
            continue;
        }
        let k = masses.len();
        let (w_last, w_prev, w_first) = (masses[k - 1], masses[k - 2], masses[0]);
        let stable = w_last > 1e-12 && (w_last - w_prev).abs() <= 0.05 * w_last && w_first > 0.5 * w_last;
        if !stable {
            continue;
        }
        let mass = neville(eps, &masses, 0.0).clamp(0.0, 1.0);
        let location = neville(eps, &locs, 0.0);
        found.push(Atom { location, mass });
    }
    Ok(found)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub y: f64,
    pub value: f64,
    pub error: f64,
}

/// `μ(y, ∞)` for the measure encoded by `h`.
pub fn tail_mass(h: &TransformHandle, y: f64, prof: &InversionProfile) -> Result<TailEstimate> {
    prof.validate()?;
    if !y.is_finite() {
        return Err(Error::InvalidParameter(format!("tail level must be finite (got {y})")));
    }
    if let Some(m) = h.as_leaf() {
        return Ok(TailEstimate { y, value: m.tail(y), error: 0.0 });
    }
    match prof.tail_method {
        TailMethod::Contour => contour_tail(h, y, prof),
        TailMethod::DensityFit { upper_factor } => density_fit_tail(h, y, upper_factor, prof),
    }
}

/// Tail masses at several levels, in parallel.
pub fn tail_table(h: &TransformHandle, ys: &[f64], prof: &InversionProfile) -> Result<Vec<TailEstimate>> {
    ys.par_iter().map(|&y| tail_mass(h, y, prof)).collect()
}

fn contour_tail(h: &TransformHandle, y: f64, prof: &InversionProfile) -> Result<TailEstimate> {
    let c = if y > 0.0 { 0.0 } else { y - 1.0 };
    let d = y - c;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |s: f64| -> f64 {
        let z = Complex64::new(y, s);
        match h.g_at(z, prof.precision) {
            Ok(g) => (g - 1.0 / Complex64::new(d, s)).re,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let opts = QuadOptions::for_real::<f64>().with_rel_tol(prof.quad_tol).with_abs_tol(1e-300);
    let mut near = vec![0.0];
    near.extend([1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.03, 0.1, 0.3, 1.0].iter().map(|f| f * d));
    let lower = integrate(|s: f64| Complex64::new(integrand(s), 0.0), &near, &opts);
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    // s = d/u on [d, ∞)
    let far_bps = [0.0, 1e-8, 1e-6, 1e-4, 1e-2, 0.1, 0.3, 1.0];
    let upper = integrate(
        |u: f64| {
            if u <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let s = d / u;
            Complex64::new(integrand(s) * d / (u * u), 0.0)
        },
        &far_bps,
        &opts,
    );
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let (lower, upper) = (lower?, upper?);
    let value = -(lower.value.re + upper.value.re) / PI;
    Ok(TailEstimate { y, value, error: (lower.error + upper.error) / PI })
}

fn density_fit_tail(h: &TransformHandle, y: f64, upper_factor: f64, prof: &InversionProfile) -> Result<TailEstimate> {
    if !(y > 0.0) {
        return Err(Error::InvalidParameter("density-fit tails need y > 0".into()));
    }
    let big_y = upper_factor * y;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let (la, lb) = (y.ln(), big_y.ln());
    let decades = ((lb - la) / std::f64::consts::LN_10).ceil().max(1.0) as usize;
    let bps: Vec<f64> = (0..=decades).map(|i| la + (lb - la) * i as f64 / decades as f64).collect();
    let body = integrate(
        |u: f64| {
            let x = u.exp();
            match density_at(h, x, prof) {
                Ok(v) => Complex64::new(v * x, 0.0),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        },
        &bps,
        &QuadOptions::for_real::<f64>().with_rel_tol(1e-6).with_abs_tol(1e-300),
    );
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let body = body?;

    let pts = 6;
    let mut lx = Vec::with_capacity(pts);
    let mut lf = Vec::with_capacity(pts);
    for i in 0..pts {
        let x = big_y * 10f64.powf(-1.0 + i as f64 / (pts - 1) as f64);
        let f = density_at(h, x, prof)?;
        if !(f > 0.0) {
            return Err(Error::Fit(format!("density vanishes at x = {x}; no power law to fit")));
        }
        lx.push(x.ln());
        lf.push(f.ln());
    }
    let fit = linear_fit(&lx, &lf);
    if fit.slope >= 0.0 {
        return Err(Error::Fit(format!("tail slope {:.4} is non-negative", fit.slope)));
    }
    if fit.slope >= -1.0 {
        return Err(Error::Fit(format!("tail slope {:.4} is not integrable", fit.slope)));
    }
    let f_big = (fit.intercept + fit.slope * big_y.ln()).exp();
    let k = -fit.slope - 1.0;
    let beyond = f_big * big_y / k;
    let err_beyond = beyond / k * fit.slope_stderr;
    Ok(TailEstimate { y, value: body.value.re + beyond, error: body.error + err_beyond })
}

/// Least-squares line with the standard error of the slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = if n > 2.0 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    LinearFit { slope, intercept, slope_stderr }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassReport {
    pub total: f64,
    pub error: f64,
    pub eps: f64,
}

/// Total mass as the integral of the Poisson-smoothed measure `-Im G(x + iε)/π`
/// at a fixed `ε = prof.mass_eps`. Atoms are included automatically.
pub fn total_mass(h: &TransformHandle, prof: &InversionProfile) -> Result<MassReport> {
    prof.validate()?;
    let e = prof.mass_eps;
    let center = h.meta().mean.unwrap_or(0.0);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |th: f64| -> Complex64 {
        let t = th.tan();
        let x = center + e * t;
        match h.g_at(Complex64::new(x, e), prof.precision) {
            Ok(g) => Complex64::new(-g.im * e * (1.0 + t * t) / PI, 0.0),
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let mut bps: Vec<f64> = vec![-1.0, -0.5, 0.0, 0.5, 1.0];
    for k in 1..=10 {
        let d = 10f64.powi(-k);
        bps.push(FRAC_PI_2 - d);
        bps.push(-(FRAC_PI_2 - d));
    }
    bps.push(FRAC_PI_2);
    bps.push(-FRAC_PI_2);
    bps.sort_by(f64::total_cmp);
    let opts = QuadOptions::for_real::<f64>().with_rel_tol(prof.quad_tol.max(1e-12));
    let r = integrate(integrand, &bps, &opts);
    if let Some(err) = failure.borrow_mut().take() {
        return Err(err);
    }
    let r = r?;
    Ok(MassReport { total: r.value.re, error: r.error, eps: e })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean_conv::{bool_add, bool_add_n};
    use crate::measure::Measure;

    fn leaf(m: Measure) -> TransformHandle {
        TransformHandle::leaf(m)
    }

    #[test]
    fn neville_reproduces_polynomials() {
        let xs = [0.3, 0.1, 0.01];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 3.0 * x + 0.5 * x * x).collect();
        assert!((neville(&xs, &ys, 0.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn semicircle_and_cauchy_densities_at_zero() {
        let p = InversionProfile::default();
        let s = density_at(&leaf(Measure::semicircle(1.0).unwrap()), 0.0, &p).unwrap();
        assert!((s - 1.0 / PI).abs() < 1e-6, "{s}");
        let c = density_at(&leaf(Measure::StandardCauchy), 0.0, &p).unwrap();
        assert!((c - 1.0 / PI).abs() < 1e-6, "{c}");
    }

    #[test]
    fn purely_atomic_convolution_has_zero_density_between_atoms() {
        let b = leaf(Measure::bernoulli());
        let h = bool_add(&b, &b);
        let d = density_detail(&h, 0.0, &InversionProfile::default(), &[]).unwrap();
        assert!(d.value.abs() < 1e-9, "{d:?}");
    }

    #[test]
    fn density_next_to_an_atom_is_refused() {
        let h = bool_add(&leaf(Measure::bernoulli()), &leaf(Measure::bernoulli()));
        let err = density_at(&h, 2f64.sqrt(), &InversionProfile::default()).unwrap_err();
        assert!(matches!(err, Error::AtomProximity { .. }));
    }

    #[test]
    fn atom_detection() {
        let p = InversionProfile::default();
        let h = bool_add(&leaf(Measure::dirac(0.4)), &leaf(Measure::dirac(1.1)));
        let a = atoms(&h, (-3.0, 3.0), &p).unwrap();
        assert_eq!(a.len(), 1);
        assert!((a[0].location - 1.5).abs() < 1e-8 && (a[0].mass - 1.0).abs() < 1e-8, "{a:?}");

        let b = leaf(Measure::bernoulli());
        let a = atoms(&bool_add(&b, &b), (-3.0, 3.0), &p).unwrap();
        assert_eq!(a.len(), 2, "{a:?}");
        for at in &a {
            assert!((at.location.abs() - 2f64.sqrt()).abs() < 1e-6);
            assert!((at.mass - 0.5).abs() < 1e-6);
        }
        assert!(atoms(&leaf(Measure::semicircle(1.0).unwrap()), (-3.0, 3.0), &p).unwrap().is_empty());
    }

    #[test]
    fn tail_mass_of_atomic_convolution() {
        let b = leaf(Measure::bernoulli());
        let h = bool_add(&b, &b);
        let t = tail_mass(&h, 1.0, &InversionProfile::default()).unwrap();
        assert!((t.value - 0.5).abs() < 1e-6, "{t:?}");
        let t = tail_mass(&h, -2.0, &InversionProfile::default()).unwrap();
        assert!((t.value - 1.0).abs() < 1e-6, "{t:?}");
        let t = tail_mass(&h, 2.0, &InversionProfile::default()).unwrap();
        assert!(t.value.abs() < 1e-6, "{t:?}");
    }

    #[test]
    fn contour_tail_matches_semicircle_closed_form() {
        // route the leaf through a trivial composite so the contour path runs
        let s = leaf(Measure::semicircle(1.0).unwrap());
        let h = crate::boolean_conv::bool_add_power(&s, 1.0).unwrap();
        let m = Measure::semicircle(1.0).unwrap();
        for y in [-1.5, -0.3, 0.2, 1.0, 1.9] {
            let t = tail_mass(&h, y, &InversionProfile::default()).unwrap();
            assert!((t.value - m.tail(y)).abs() < 1e-8, "y={y}: {t:?} vs {}", m.tail(y));
        }
    }

    #[test]
    fn pareto_boolean_square_tail() {
        let p = leaf(Measure::pareto(1.5, 1.0).unwrap());
        let h = bool_add_n(&p, 2).unwrap();
        let t = tail_mass(&h, 100.0, &InversionProfile::default()).unwrap();
        assert!((t.value / 2e-3 - 1.0).abs() < 0.1, "{t:?}");
        assert_eq!(tail_mass(&p, 4.0, &InversionProfile::default()).unwrap().value, 0.125);
    }

    #[test]
    fn total_mass_is_one() {
        let p = InversionProfile::default();
        let b = leaf(Measure::bernoulli());
        for h in [
            leaf(Measure::semicircle(1.0).unwrap()),
            leaf(Measure::StandardCauchy),
            bool_add(&b, &b),
            bool_add(&leaf(Measure::pareto(1.5, 1.0).unwrap()), &b),
        ] {
            let r = total_mass(&h, &p).unwrap();
            assert!((r.total - 1.0).abs() < 1e-3, "{h:?}: {r:?}");
        }
    }

    #[test]
    fn profile_validation() {
        let mut p = InversionProfile::default();
        p.eps_schedule = vec![1e-3, 1e-2];
        assert!(p.validate().is_err());
        let mut p = InversionProfile::default();
        p.order = 3;
        assert!(p.validate().is_err());
    }
}
