//! Transform-level handles for Boolean additive convolutions and powers, Boolean
//! multiplicative convolution, and (via [`crate::free_additive`]) free powers and
//! the Belinschi–Nica map.
//!
//! A handle is an immutable expression tree. Evaluating it at `z` yields
//! `F(z) = 1/G(z)` of the measure it encodes. Per-node results are memoized in a
//! mutex-guarded map, so handles may be shared freely across threads.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::free_additive::{self, FixedPointOptions};
use crate::measure::{Measure, MomentCount};
use crate::real::Precision;
use crate::transforms::{self, eta_series_coeffs, ComplexPoint, HalfPlane};

/// Number of Boolean cumulants tracked in handle metadata.
const MAX_CUMULANTS: u32 = 6;
const CACHE_LIMIT: usize = 1 << 18;

#[derive(Debug, Clone)]
pub enum Node {
    Leaf(Measure),
    BoolAdd(Vec<TransformHandle>),
    BoolAddPower(TransformHandle, f64),
    BoolMult(TransformHandle, TransformHandle),
    FreePower(TransformHandle, f64),
    BnMap(TransformHandle, f64),
}

/// Cached structural information about the encoded measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HandleMeta {
    pub positive: bool,
    pub moment_count: MomentCount,
    pub mean: Option<f64>,
    /// Boolean cumulants `e_1, e_2, ...` (coefficients of `K(z) = Σ e_i z^{1-i}`), when known.
    pub cumulants: Option<Vec<f64>>,
}

struct Inner {
    node: Node,
    meta: HandleMeta,
    cache: Mutex<HashMap<(u64, u64, bool), Complex64>>,
}

#[derive(Clone)]
pub struct TransformHandle(Arc<Inner>);

impl std::fmt::Debug for TransformHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformHandle").field("node", &self.0.node).field("meta", &self.0.meta).finish()
    }
}

impl From<Measure> for TransformHandle {
    fn from(m: Measure) -> Self {
        TransformHandle::leaf(m)
    }
}

impl TransformHandle {
    pub fn leaf(m: Measure) -> TransformHandle {
        let moment_count = m.moment_count();
        let mean = m.moment(1).finite();
        let order = match moment_count {
            MomentCount::Finite(p) => p.min(MAX_CUMULANTS),
            MomentCount::Infinite => MAX_CUMULANTS,
        };
        let cumulants = m.moments(order).map(|mom| eta_series_coeffs(&mom));
        let meta = HandleMeta { positive: m.support_positive(), moment_count, mean, cumulants };
        TransformHandle::from_parts(Node::Leaf(m), meta)
    }

    fn from_parts(node: Node, meta: HandleMeta) -> TransformHandle {
        TransformHandle(Arc::new(Inner { node, meta, cache: Mutex::new(HashMap::new()) }))
    }

    pub(crate) fn new_node(node: Node, meta: HandleMeta) -> TransformHandle {
        TransformHandle::from_parts(node, meta)
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn meta(&self) -> &HandleMeta {
        &self.0.meta
    }

    pub fn as_leaf(&self) -> Option<&Measure> {
        match &self.0.node {
            Node::Leaf(m) => Some(m),
            _ => None,
        }
    }

    /// `F(z)` in double precision.
    pub fn f(&self, z: impl Into<Complex64>) -> Result<Complex64> {
        self.f_at(z, Precision::Double)
    }

    /// `F(z)`; leaves are integrated in `prec`, compositions run in double.
    pub fn f_at(&self, z: impl Into<Complex64>, prec: Precision) -> Result<Complex64> {
        let z = z.into();
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::domain(z, "non-finite evaluation point"));
        }
        if z.im < 0.0 {
            return Ok(self.f_at(z.conj(), prec)?.conj());
        }
        let key = (z.re.to_bits(), z.im.to_bits(), prec == Precision::Extended);
        if let Some(v) = self.0.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(*v);
        }
        let v = self.eval_uncached(z, prec)?;
        let mut cache = self.0.cache.lock().expect("cache poisoned");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, v);
        Ok(v)
    }

    /// `F(z)` without touching this node's memo; used for transient iterates.
    pub(crate) fn f_direct(&self, z: Complex64, prec: Precision) -> Result<Complex64> {
        if z.im < 0.0 {
            return Ok(self.eval_uncached(z.conj(), prec)?.conj());
        }
        self.eval_uncached(z, prec)
    }

    fn eval_uncached(&self, z: Complex64, prec: Precision) -> Result<Complex64> {
        match &self.0.node {
            Node::Leaf(m) => {
                let g = transforms::cauchy_at(m, z, prec)?;
                if g.norm() == 0.0 {
                    return Err(Error::domain(z, "G vanishes"));
                }
                Ok(1.0 / g)
            }
            Node::BoolAdd(hs) => {
                let mut acc = -(hs.len() as f64 - 1.0) * z;
                for h in hs {
                    acc += h.f_at(z, prec)?;
                }
                Ok(acc)
            }
            Node::BoolAddPower(h, t) => Ok((1.0 - t) * z + t * h.f_at(z, prec)?),
            Node::BoolMult(a, b) => {
                let ka = z - a.f_at(z, prec)?;
                let kb = z - b.f_at(z, prec)?;
                Ok(z - ka * kb)
            }
            Node::FreePower(h, t) => free_additive::free_power_f_at(h, *t, z, prec, &FixedPointOptions::default()),
            Node::BnMap(h, t) => {
                let fp = free_additive::free_power_f_at(h, 1.0 + t, z, prec, &FixedPointOptions::default())?;
                Ok(z + (fp - z) / (1.0 + t))
            }
        }
    }

    /// `G(z) = 1/F(z)`.
    pub fn g(&self, z: impl Into<Complex64>) -> Result<Complex64> {
        self.g_at(z, Precision::Double)
    }

    pub fn g_at(&self, z: impl Into<Complex64>, prec: Precision) -> Result<Complex64> {
        let z = z.into();
        if let Node::Leaf(m) = &self.0.node {
            return transforms::cauchy_at(m, z, prec);
        }
        let f = self.f_at(z, prec)?;
        if f.norm() == 0.0 {
            return Err(Error::domain(z, "F vanishes"));
        }
        Ok(1.0 / f)
    }

    /// `K(z) = z - F(z)`.
    pub fn k(&self, z: impl Into<Complex64>) -> Result<Complex64> {
        let z = z.into();
        Ok(z - self.f(z)?)
    }

    /// `η(z) = 1 - z F(1/z)`.
    pub fn eta_at(&self, z: impl Into<Complex64>, prec: Precision) -> Result<Complex64> {
        let z = z.into();
        if z.im == 0.0 && z.re >= 0.0 {
            return Err(Error::domain(z, "η is evaluated off [0, ∞)"));
        }
        if let Node::Leaf(m) = &self.0.node {
            return transforms::eta_at(m, z, prec);
        }
        Ok(1.0 - z * self.f_at(1.0 / z, prec)?)
    }

    pub fn eta(&self, z: impl Into<Complex64>) -> Result<Complex64> {
        self.eta_at(z, Precision::Double)
    }

    /// `Ψ = η/(1-η)`.
    pub fn psi(&self, z: impl Into<Complex64>) -> Result<Complex64> {
        let e = self.eta(z)?;
        Ok(e / (1.0 - e))
    }

    /// `B(z) = z/η(z)`.
    pub fn b(&self, z: impl Into<Complex64>) -> Result<Complex64> {
        let z = z.into();
        Ok(z / self.eta(z)?)
    }
}

fn combine_cumulants(parts: &[Option<&Vec<f64>>], f: impl Fn(usize) -> f64) -> Option<Vec<f64>> {
    let mut len = usize::MAX;
    for p in parts {
        len = len.min((*p)?.len());
    }
    Some((0..len).map(f).collect())
}

/// Boolean additive convolution `a ⊎ b`: `F = F_a + F_b - z`.
pub fn bool_add(a: &TransformHandle, b: &TransformHandle) -> TransformHandle {
    bool_add_all(&[a.clone(), b.clone()])
}

/// Boolean convolution of several handles.
pub fn bool_add_all(hs: &[TransformHandle]) -> TransformHandle {
    if hs.len() == 1 {
        return hs[0].clone();
    }
    let metas: Vec<&HandleMeta> = hs.iter().map(|h| h.meta()).collect();
    let cs: Vec<Option<&Vec<f64>>> = metas.iter().map(|m| m.cumulants.as_ref()).collect();
    let cumulants = combine_cumulants(&cs, |i| cs.iter().map(|c| c.unwrap()[i]).sum());
    let mean = metas.iter().map(|m| m.mean).sum::<Option<f64>>();
    let meta = HandleMeta {
        positive: metas.iter().all(|m| m.positive),
        moment_count: metas.iter().map(|m| m.moment_count).min().unwrap_or(MomentCount::Infinite),
        mean,
        cumulants,
    };
    TransformHandle::from_parts(Node::BoolAdd(hs.to_vec()), meta)
}

/// `n`-fold Boolean convolution power of a handle.
pub fn bool_add_n(a: &TransformHandle, n: usize) -> Result<TransformHandle> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    Ok(bool_add_all(&vec![a.clone(); n]))
}

/// Boolean power `a^{⊎t}`: `F = (1-t) z + t F_a`.
pub fn bool_add_power(a: &TransformHandle, t: f64) -> Result<TransformHandle> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("Boolean power needs t >= 0 (got {t})")));
    }
    let m = a.meta();
    let meta = HandleMeta {
        positive: m.positive,
        moment_count: if t == 0.0 { MomentCount::Infinite } else { m.moment_count },
        mean: m.mean.map(|v| t * v),
        cumulants: m.cumulants.as_ref().map(|c| c.iter().map(|e| t * e).collect()),
    };
    Ok(TransformHandle::from_parts(Node::BoolAddPower(a.clone(), t), meta))
}

/// Per-point margins of the argument condition `arg η_a + arg η_b - arg z < π`.
#[derive(Debug, Clone, Serialize)]
pub struct ValidityReport {
    pub points: Vec<ComplexPoint>,
    pub margins: Vec<f64>,
    pub pass: bool,
    pub min_margin: f64,
}

fn arg_of(z: Complex64) -> f64 {
    if z.im == 0.0 && z.re < 0.0 {
        PI
    } else {
        z.im.atan2(z.re)
    }
}

/// Default sample: 8 rays with `arg z` evenly spaced in `[π/8, 7π/8]`, 8 radii in `[1e-3, 10]`.
pub fn default_validity_sample() -> Vec<ComplexPoint> {
    let mut pts = Vec::with_capacity(64);
    for i in 0..8 {
        let th = PI / 8.0 + (6.0 * PI / 8.0) * i as f64 / 7.0;
        for j in 0..8 {
            let r = 10f64.powf(-3.0 + 4.0 * j as f64 / 7.0);
            let (s, c) = th.sin_cos();
            pts.push(ComplexPoint { re: r * c, im: r * s, half_plane: HalfPlane::Upper });
        }
    }
    pts
}

pub fn validate_mult_args(a: &TransformHandle, b: &TransformHandle, sample: &[ComplexPoint]) -> Result<ValidityReport> {
    let mut margins = Vec::with_capacity(sample.len());
    for p in sample {
        let z = p.z();
        let ea = a.eta(z)?;
        let eb = b.eta(z)?;
        margins.push(PI - (arg_of(ea) + arg_of(eb) - arg_of(z)));
    }
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ValidityReport { points: sample.to_vec(), pass: margins.iter().all(|m| *m > 0.0), margins, min_margin })
}

/// Boolean multiplicative convolution `a ⨃ b`; `b` must have a finite mean.
///
/// Realized as `K_out = K_a K_b`, which is `B_out = B_a B_b` read through `K(1/z) = 1/B(z)`.
pub fn bool_mult(a: &TransformHandle, b: &TransformHandle) -> Result<TransformHandle> {
    bool_mult_checked(a, b, &default_validity_sample())
}

pub fn bool_mult_checked(a: &TransformHandle, b: &TransformHandle, sample: &[ComplexPoint]) -> Result<TransformHandle> {
    let (ma, mb) = (a.meta(), b.meta());
    if !ma.positive || !mb.positive {
        return Err(Error::Validity("both operands must be supported on [0, ∞)".into()));
    }
    let mean_b = match mb.mean {
        Some(v) if v.is_finite() => v,
        _ => return Err(Error::Moment("the second operand must have a finite mean".into())),
    };
    let report = validate_mult_args(a, b, sample)?;
    if !report.pass {
        return Err(Error::Validity(format!("argument condition fails (minimum margin {:e})", report.min_margin)));
    }
    let cumulants = match (&ma.cumulants, &mb.cumulants) {
        (Some(ca), Some(cb)) => {
            let len = ca.len().min(cb.len());
            Some(
                (1..=len)
                    .map(|n| (1..=n).map(|i| ca[i - 1] * cb[n - i]).sum())
                    .collect::<Vec<f64>>(),
            )
        }
        _ => None,
    };
    let meta = HandleMeta {
        positive: true,
        moment_count: ma.moment_count.min(mb.moment_count),
        mean: ma.mean.map(|m| m * mean_b),
        cumulants,
    };
    Ok(TransformHandle::from_parts(Node::BoolMult(a.clone(), b.clone()), meta))
}
