//! Free additive powers `μ^{⊞t}` by subordination, the Belinschi–Nica map
//! `B_t(μ) = (μ^{⊞(1+t)})^{⊎ 1/(1+t)}`, and the complex Burgers residual of
//! `h(t, z) = F_{B_t(μ)}(z) - z`.

use num_complex::Complex64;
use serde::Serialize;

use crate::boolean_conv::{HandleMeta, Node, TransformHandle};
use crate::error::{Error, Result};
use crate::real::Precision;

#[derive(Debug, Clone, Copy)]
pub struct FixedPointOptions {
    /// Relative residual target.
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the new iterate once damping switches on (after `max_iter / 2` steps).
    pub damping: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions { tol: 1e-15, max_iter: 4000, damping: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointResult {
    pub omega: Complex64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn check_power(t: f64) -> Result<()> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("free powers need t >= 1 (got {t})")));
    }
    Ok(())
}

/// Solves `ω = (z + (t-1) F_μ(ω)) / t` starting from `ω = z`.
pub fn subordinator(h: &TransformHandle, t: f64, z: Complex64, opts: &FixedPointOptions) -> Result<FixedPointResult> {
    subordinator_at(h, t, z, Precision::Double, opts)
}

pub fn subordinator_at(
    h: &TransformHandle,
    t: f64,
    z: Complex64,
    prec: Precision,
    opts: &FixedPointOptions,
) -> Result<FixedPointResult> {
    check_power(t)?;
    if z.im < 0.0 {
        let r = subordinator_at(h, t, z.conj(), prec, opts)?;
        return Ok(FixedPointResult { omega: r.omega.conj(), ..r });
    }
    if t == 1.0 {
        return Ok(FixedPointResult { omega: z, iterations: 0, residual: 0.0, converged: true });
    }
    let step = |w: Complex64| -> Result<Complex64> { Ok((z + (t - 1.0) * h.f_direct(w, prec)?) / t) };
    let mut omega = z;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let next = step(omega)?;
        residual = (next - omega).norm() / omega.norm().max(1.0);
        omega = if it > opts.max_iter / 2 { (1.0 - opts.damping) * omega + opts.damping * next } else { next };
        if residual <= opts.tol {
            let final_res = (step(omega)? - omega).norm() / omega.norm().max(1.0);
            if final_res <= opts.tol {
                return Ok(FixedPointResult { omega, iterations: it, residual: final_res, converged: true });
            }
        }
    }
    Err(Error::NoConvergence { max_iter: opts.max_iter, residual })
}

/// `F_{μ^{⊞t}}(z) = F_μ(ω(z))`.
pub fn free_power_f(h: &TransformHandle, t: f64, z: Complex64) -> Result<Complex64> {
    free_power_f_at(h, t, z, Precision::Double, &FixedPointOptions::default())
}

pub fn free_power_f_at(
    h: &TransformHandle,
    t: f64,
    z: Complex64,
    prec: Precision,
    opts: &FixedPointOptions,
) -> Result<Complex64> {
    let r = subordinator_at(h, t, z, prec, opts)?;
    if t == 1.0 {
        return h.f_at(z, prec);
    }
    // at the fixed point F_μ(ω) = (tω - z)/(t-1); evaluating F once more is cleaner
    h.f_direct(r.omega, prec)
}

/// Handle for `μ^{⊞t}`, `t >= 1`.
pub fn free_power(h: &TransformHandle, t: f64) -> Result<TransformHandle> {
    check_power(t)?;
    let m = h.meta();
    let meta = HandleMeta {
        positive: m.positive,
        moment_count: m.moment_count,
        mean: m.mean.map(|v| t * v),
        cumulants: None,
    };
    Ok(TransformHandle::new_node(Node::FreePower(h.clone(), t), meta))
}

/// Handle for `B_t(μ)`, `t >= 0`.
pub fn belinschi_nica(h: &TransformHandle, t: f64) -> Result<TransformHandle> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("Belinschi–Nica map needs t >= 0 (got {t})")));
    }
    let m = h.meta();
    let meta = HandleMeta { positive: m.positive, moment_count: m.moment_count, mean: m.mean, cumulants: None };
    Ok(TransformHandle::new_node(Node::BnMap(h.clone(), t), meta))
}

/// `h(t, z) = F_{B_t(μ)}(z) - z = (F_{μ^{⊞(1+t)}}(z) - z) / (1+t)`.
pub fn burgers_h(h: &TransformHandle, t: f64, z: Complex64, prec: Precision) -> Result<Complex64> {
    let fp = free_power_f_at(h, 1.0 + t, z, prec, &FixedPointOptions::default())?;
    Ok((fp - z) / (1.0 + t))
}

/// `|∂h/∂t - h ∂h/∂z|` with central differences of steps `dt` and `dz`.
pub fn burgers_residual(h: &TransformHandle, t: f64, z: Complex64, dt: f64, dz: f64) -> Result<f64> {
    burgers_residual_at(h, t, z, dt, dz, Precision::Double)
}

pub fn burgers_residual_at(
    h: &TransformHandle,
    t: f64,
    z: Complex64,
    dt: f64,
    dz: f64,
    prec: Precision,
) -> Result<f64> {
    if !(dt > 0.0 && dz > 0.0) || t - dt < 0.0 {
        return Err(Error::InvalidParameter(format!("need 0 < dt <= t and dz > 0 (t={t}, dt={dt}, dz={dz})")));
    }
    let ht = (burgers_h(h, t + dt, z, prec)? - burgers_h(h, t - dt, z, prec)?) / (2.0 * dt);
    let dzc = Complex64::new(dz, 0.0);
    let hz = (burgers_h(h, t, z + dzc, prec)? - burgers_h(h, t, z - dzc, prec)?) / (2.0 * dz);
    let h0 = burgers_h(h, t, z, prec)?;
    Ok((ht - h0 * hz).norm())
}

/// Residuals under repeated step halving and the observed convergence orders.
#[derive(Debug, Clone, Serialize)]
pub struct BurgersConvergence {
    pub steps: Vec<f64>,
    pub residuals: Vec<f64>,
    pub orders: Vec<f64>,
}

pub fn burgers_convergence(
    h: &TransformHandle,
    t: f64,
    z: Complex64,
    first_step: f64,
    levels: usize,
) -> Result<BurgersConvergence> {
    let mut steps = Vec::with_capacity(levels);
    let mut residuals = Vec::with_capacity(levels);
    let mut s = first_step;
    for _ in 0..levels {
        steps.push(s);
        residuals.push(burgers_residual(h, t, z, s, s)?);
        s *= 0.5;
    }
    let orders = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(BurgersConvergence { steps, residuals, orders })
}
