//! Probability measures in closed parametric or discretized form.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MASS_TOL: f64 = 1e-12;
const ATOM_SEPARATION: f64 = 1e-12;

/// A probability measure on the real line.
///
/// Construct through the checked constructors ([`Measure::atomic`],
/// [`Measure::grid`], ...). The enum is public so callers can match on it, but
/// a hand-built value skips validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// Point masses `(location, mass)`.
    Atomic(Vec<(f64, f64)>),
    /// Piecewise-constant density: cell `i` is `[xs[i], xs[i+1]]` with mass `ws[i]`.
    GridDensity { xs: Vec<f64>, ws: Vec<f64> },
    /// `μ(y,∞) = (xm/y)^alpha` for `y >= xm`.
    ParetoTail { alpha: f64, xm: f64 },
    StandardCauchy,
    Semicircle { variance: f64 },
    Mixture(Vec<(f64, Measure)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MomentValue {
    Finite(f64),
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentInfo {
    pub order: u32,
    pub value: MomentValue,
}

impl MomentInfo {
    pub fn finite(&self) -> Option<f64> {
        match self.value {
            MomentValue::Finite(v) => Some(v),
            MomentValue::Divergent => None,
        }
    }
}

/// The `p` such that moments up to order `p` are finite and order `p+1` diverges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MomentCount {
    Finite(u32),
    Infinite,
}

impl MomentCount {
    pub fn min(self, other: MomentCount) -> MomentCount {
        std::cmp::min(self, other)
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            MomentCount::Finite(p) => Some(p),
            MomentCount::Infinite => None,
        }
    }
}

impl std::fmt::Display for MomentCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MomentCount::Finite(p) => write!(f, "{p}"),
            MomentCount::Infinite => write!(f, "inf"),
        }
    }
}

impl Measure {
    pub fn dirac(a: f64) -> Measure {
        Measure::Atomic(vec![(a, 1.0)])
    }

    /// Symmetric Bernoulli measure with atoms at `±1`.
    pub fn bernoulli() -> Measure {
        Measure::Atomic(vec![(-1.0, 0.5), (1.0, 0.5)])
    }

    pub fn atomic(atoms: Vec<(f64, f64)>) -> Result<Measure> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("atomic measure needs at least one atom".into()));
        }
        for &(x, w) in &atoms {
            if !x.is_finite() || !(w > 0.0 && w <= 1.0) {
                return Err(Error::InvalidMeasure(format!("atom ({x}, {w}) has bad location or mass")));
            }
        }
        let mut locs: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        locs.sort_by(f64::total_cmp);
        if locs.windows(2).any(|w| (w[1] - w[0]).abs() <= ATOM_SEPARATION) {
            return Err(Error::InvalidMeasure("atom locations must be distinct".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        check_total(total)?;
        Ok(Measure::Atomic(atoms))
    }

    pub fn grid(xs: Vec<f64>, ws: Vec<f64>) -> Result<Measure> {
        if xs.len() != ws.len() + 1 || ws.is_empty() {
            return Err(Error::InvalidMeasure(format!(
                "grid needs n+1 edges for n cells (got {} edges, {} cells)",
                xs.len(),
                ws.len()
            )));
        }
        if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMeasure("grid edges must be finite and strictly increasing".into()));
        }
        if ws.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidMeasure("grid weights must be non-negative".into()));
        }
        check_total(ws.iter().sum())?;
        Ok(Measure::GridDensity { xs, ws })
    }

    pub fn pareto(alpha: f64, xm: f64) -> Result<Measure> {
        if !(alpha > 0.0 && alpha.is_finite() && xm > 0.0 && xm.is_finite()) {
            return Err(Error::InvalidMeasure(format!("pareto needs alpha > 0, xm > 0 (got {alpha}, {xm})")));
        }
        Ok(Measure::ParetoTail { alpha, xm })
    }

    pub fn semicircle(variance: f64) -> Result<Measure> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::InvalidMeasure(format!("semicircle variance must be positive (got {variance})")));
        }
        Ok(Measure::Semicircle { variance })
    }

    pub fn mixture(components: Vec<(f64, Measure)>) -> Result<Measure> {
        if components.is_empty() {
            return Err(Error::InvalidMeasure("mixture needs at least one component".into()));
        }
        if components.iter().any(|(w, _)| !(*w > 0.0 && *w <= 1.0)) {
            return Err(Error::InvalidMeasure("mixture weights must lie in (0, 1]".into()));
        }
        check_total(components.iter().map(|c| c.0).sum())?;
        Ok(Measure::Mixture(components))
    }

    /// `μ(y, ∞)`.
    pub fn tail(&self, y: f64) -> f64 {
        match self {
            Measure::Atomic(atoms) => atoms.iter().filter(|a| a.0 > y).map(|a| a.1).sum::<f64>().min(1.0),
            Measure::GridDensity { xs, ws } => {
                let mut acc = 0.0;
                for (i, w) in ws.iter().enumerate() {
                    let (a, b) = (xs[i], xs[i + 1]);
                    if y <= a {
                        acc += w;
                    } else if y < b {
                        acc += w * (b - y) / (b - a);
                    }
                }
                acc.clamp(0.0, 1.0)
            }
            Measure::ParetoTail { alpha, xm } => {
                if y <= *xm {
                    1.0
                } else {
                    (xm / y).powf(*alpha)
                }
            }
            Measure::StandardCauchy => {
                // atan(1/|y|) keeps relative accuracy far out
                if y > 0.0 {
                    (1.0 / y).atan() / PI
                } else if y < 0.0 {
                    1.0 - (1.0 / -y).atan() / PI
                } else {
                    0.5
                }
            }
            Measure::Semicircle { variance } => {
                let s = y / (2.0 * variance.sqrt());
                if s >= 1.0 {
                    0.0
                } else if s <= -1.0 {
                    1.0
                } else {
                    ((s.acos() - s * (1.0 - s * s).sqrt()) / PI).clamp(0.0, 1.0)
                }
            }
            Measure::Mixture(cs) => cs.iter().map(|(w, m)| w * m.tail(y)).sum::<f64>().clamp(0.0, 1.0),
        }
    }

    /// Distribution function `μ(-∞, y]`.
    pub fn cdf(&self, y: f64) -> f64 {
        1.0 - self.tail(y)
    }

    /// Lebesgue density of the absolutely continuous part.
    pub fn density(&self, x: f64) -> f64 {
        match self {
            Measure::Atomic(_) => 0.0,
            Measure::GridDensity { xs, ws } => {
                for (i, w) in ws.iter().enumerate() {
                    if x >= xs[i] && x < xs[i + 1] {
                        return w / (xs[i + 1] - xs[i]);
                    }
                }
                0.0
            }
            Measure::ParetoTail { alpha, xm } => {
                if x < *xm {
                    0.0
                } else {
                    alpha / xm * (xm / x).powf(alpha + 1.0)
                }
            }
            Measure::StandardCauchy => 1.0 / (PI * (1.0 + x * x)),
            Measure::Semicircle { variance } => {
                let r2 = 4.0 * variance;
                if x * x >= r2 {
                    0.0
                } else {
                    (r2 - x * x).sqrt() / (2.0 * PI * variance)
                }
            }
            Measure::Mixture(cs) => cs.iter().map(|(w, m)| w * m.density(x)).sum(),
        }
    }

    /// `∫ t^k dμ(t)`.
    pub fn moment(&self, k: u32) -> MomentInfo {
        let value = match self.moment_value(k as f64, true) {
            Some(v) => MomentValue::Finite(v),
            None => MomentValue::Divergent,
        };
        MomentInfo { order: k, value }
    }

    /// Fractional moment `∫ t^s dμ(t)` for positively supported measures.
    pub fn moment_real(&self, s: f64) -> Option<f64> {
        if !self.support_positive() {
            return None;
        }
        self.moment_value(s, false)
    }

    fn moment_value(&self, s: f64, integer: bool) -> Option<f64> {
        if s == 0.0 {
            return Some(1.0);
        }
        let pow = |t: f64| if integer { t.powi(s as i32) } else { t.powf(s) };
        match self {
            Measure::Atomic(atoms) => Some(atoms.iter().map(|(a, w)| w * pow(*a)).sum()),
            Measure::GridDensity { xs, ws } => Some(
                ws.iter()
                    .enumerate()
                    .map(|(i, w)| {
                        let (a, b) = (xs[i], xs[i + 1]);
                        if integer {
                            let k = s as i32;
                            w * (b.powi(k + 1) - a.powi(k + 1)) / ((s + 1.0) * (b - a))
                        } else {
                            w * (b.powf(s + 1.0) - a.powf(s + 1.0)) / ((s + 1.0) * (b - a))
                        }
                    })
                    .sum(),
            ),
            Measure::ParetoTail { alpha, xm } => {
                if s < *alpha {
                    Some(alpha * xm.powf(s) / (alpha - s))
                } else {
                    None
                }
            }
            Measure::StandardCauchy => None,
            Measure::Semicircle { variance } => {
                if !integer {
                    return None;
                }
                let k = s as u32;
                if k % 2 == 1 {
                    Some(0.0)
                } else {
                    Some(catalan(k / 2) * variance.powi((k / 2) as i32))
                }
            }
            Measure::Mixture(cs) => {
                let mut acc = 0.0;
                for (w, m) in cs {
                    acc += w * m.moment_value(s, integer)?;
                }
                Some(acc)
            }
        }
    }

    /// Moments `m_1..m_p` as a vector, `None` if any diverges.
    pub fn moments(&self, p: u32) -> Option<Vec<f64>> {
        (1..=p).map(|k| self.moment(k).finite()).collect()
    }

    pub fn moment_count(&self) -> MomentCount {
        match self {
            Measure::Atomic(_) | Measure::GridDensity { .. } | Measure::Semicircle { .. } => MomentCount::Infinite,
            Measure::ParetoTail { alpha, .. } => MomentCount::Finite((alpha.ceil() - 1.0).max(0.0) as u32),
            Measure::StandardCauchy => MomentCount::Finite(0),
            Measure::Mixture(cs) => cs.iter().map(|(_, m)| m.moment_count()).min().unwrap_or(MomentCount::Infinite),
        }
    }

    /// Index `α` of the regularly varying right tail, `None` for bounded support.
    pub fn tail_index(&self) -> Option<f64> {
        match self {
            Measure::ParetoTail { alpha, .. } => Some(*alpha),
            Measure::StandardCauchy => Some(1.0),
            Measure::Mixture(cs) => cs.iter().filter_map(|(_, m)| m.tail_index()).min_by(f64::total_cmp),
            _ => None,
        }
    }

    pub fn support_positive(&self) -> bool {
        match self {
            Measure::ParetoTail { .. } => true,
            Measure::Atomic(atoms) => atoms.iter().all(|a| a.0 >= 0.0),
            Measure::GridDensity { xs, .. } => xs[0] >= 0.0,
            Measure::StandardCauchy | Measure::Semicircle { .. } => false,
            Measure::Mixture(cs) => cs.iter().all(|(_, m)| m.support_positive()),
        }
    }

    /// Closed hull of the support; the upper end is `+∞` for unbounded tails.
    pub fn support_hull(&self) -> (f64, f64) {
        match self {
            Measure::Atomic(atoms) => atoms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
                (lo.min(a.0), hi.max(a.0))
            }),
            Measure::GridDensity { xs, .. } => (xs[0], xs[xs.len() - 1]),
            Measure::ParetoTail { xm, .. } => (*xm, f64::INFINITY),
            Measure::StandardCauchy => (f64::NEG_INFINITY, f64::INFINITY),
            Measure::Semicircle { variance } => {
                let r = 2.0 * variance.sqrt();
                (-r, r)
            }
            Measure::Mixture(cs) => cs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, m)| {
                let (a, b) = m.support_hull();
                (lo.min(a), hi.max(b))
            }),
        }
    }

    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            Measure::Atomic(a) => a.clone(),
            Measure::Mixture(cs) => cs
                .iter()
                .flat_map(|(w, m)| m.atoms().into_iter().map(move |(x, v)| (x, w * v)))
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Measure::Atomic(atoms) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (x, w) in atoms {
                    acc += w;
                    if u < acc {
                        return *x;
                    }
                }
                atoms[atoms.len() - 1].0
            }
            Measure::GridDensity { xs, ws } => {
                let u: f64 = rng.gen::<f64>() * ws.iter().sum::<f64>();
                let mut acc = 0.0;
                for (i, w) in ws.iter().enumerate() {
                    if u < acc + w && *w > 0.0 {
                        let frac = (u - acc) / w;
                        return xs[i] + frac * (xs[i + 1] - xs[i]);
                    }
                    acc += w;
                }
                xs[xs.len() - 1]
            }
            Measure::ParetoTail { alpha, xm } => {
                let u: f64 = 1.0 - rng.gen::<f64>();
                xm * u.powf(-1.0 / alpha)
            }
            Measure::StandardCauchy => (PI * (rng.gen::<f64>() - 0.5)).tan(),
            Measure::Semicircle { variance } => {
                let r = 2.0 * variance.sqrt();
                loop {
                    let x: f64 = rng.gen_range(-1.0..1.0);
                    let y: f64 = rng.gen();
                    if y * y + x * x <= 1.0 {
                        return r * x;
                    }
                }
            }
            Measure::Mixture(cs) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (w, m) in cs {
                    acc += w;
                    if u < acc {
                        return m.sample(rng);
                    }
                }
                cs[cs.len() - 1].1.sample(rng)
            }
        }
    }
}

fn check_total(total: f64) -> Result<()> {
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::InvalidMeasure(format!("total mass {total} differs from 1")));
    }
    Ok(())
}

fn catalan(n: u32) -> f64 {
    let mut c = 1.0;
    for k in 0..n {
        c = c * 2.0 * (2.0 * k as f64 + 1.0) / (k as f64 + 2.0);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn pareto_tail_value() {
        let m = Measure::pareto(1.5, 1.0).unwrap();
        assert!((m.tail(4.0) - 0.125).abs() < 1e-15);
        assert_eq!(m.tail(0.5), 1.0);
    }

    #[test]
    fn symmetric_atoms_tail_at_zero() {
        assert_eq!(Measure::bernoulli().tail(0.0), 0.5);
    }

    #[test]
    fn cauchy_tail_matches_quadrature() {
        // ∫_1^∞ dx/(π(1+x²)) with x = tan θ
        let q = simpson(|_th: f64| 1.0 / PI, (1.0f64).atan(), PI / 2.0, 200);
        assert!((Measure::StandardCauchy.tail(1.0) - q).abs() < 1e-14);
        assert!((Measure::StandardCauchy.tail(1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn pareto_first_moment_matches_quadrature() {
        let m = Measure::pareto(3.0, 1.0).unwrap();
        // t = 1/u maps [1,∞) onto (0,1]: ∫ 3 u du
        let q = simpson(|u: f64| 3.0 * u, 0.0, 1.0, 100);
        let v = m.moment(1).finite().unwrap();
        assert!((v - 1.5).abs() < 1e-15 && (v - q).abs() < 1e-12);
    }

    #[test]
    fn divergent_and_atom_moments() {
        assert_eq!(Measure::pareto(1.5, 1.0).unwrap().moment(2).value, MomentValue::Divergent);
        assert_eq!(Measure::dirac(2.0).moment(3).finite(), Some(8.0));
        assert_eq!(Measure::StandardCauchy.moment(0).finite(), Some(1.0));
    }

    #[test]
    fn moment_counts() {
        assert_eq!(Measure::pareto(1.5, 1.0).unwrap().moment_count(), MomentCount::Finite(1));
        assert_eq!(Measure::pareto(2.0, 1.0).unwrap().moment_count(), MomentCount::Finite(1));
        assert_eq!(Measure::pareto(0.5, 1.0).unwrap().moment_count(), MomentCount::Finite(0));
        assert_eq!(Measure::semicircle(1.0).unwrap().moment_count(), MomentCount::Infinite);
    }

    #[test]
    fn semicircle_moments_and_tail() {
        let m = Measure::semicircle(2.0).unwrap();
        assert_eq!(m.moment(2).finite(), Some(2.0));
        assert_eq!(m.moment(4).finite(), Some(8.0));
        assert!((m.tail(0.0) - 0.5).abs() < 1e-15);
        let r = 2.0 * 2f64.sqrt();
        let q = simpson(|x| m.density(x), 1.0, r, 20000);
        assert!((m.tail(1.0) - q).abs() < 1e-6);
    }

    #[test]
    fn grid_tail_interpolates_cells() {
        let g = Measure::grid(vec![0.0, 1.0, 3.0], vec![0.5, 0.5]).unwrap();
        assert!((g.tail(2.0) - 0.25).abs() < 1e-15);
        assert!((g.tail(0.5) - 0.75).abs() < 1e-15);
        assert_eq!(g.tail(5.0), 0.0);
        assert!((g.moment(1).finite().unwrap() - (0.25 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(Measure::atomic(vec![(0.0, 0.5), (0.0, 0.5)]).is_err());
        assert!(Measure::atomic(vec![(0.0, 0.6)]).is_err());
        assert!(Measure::grid(vec![0.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(Measure::pareto(-1.0, 1.0).is_err());
        assert!(Measure::mixture(vec![(0.4, Measure::dirac(0.0))]).is_err());
    }

    #[test]
    fn positivity_flags() {
        assert!(Measure::pareto(1.5, 1.0).unwrap().support_positive());
        assert!(!Measure::bernoulli().support_positive());
        assert!(!Measure::StandardCauchy.support_positive());
    }
}
