//! Evaluates the transform family of a few measures at one point.

use boolrv::{Measure, TransformHandle};
use num_complex::Complex64;

fn main() -> boolrv::Result<()> {
    let z = Complex64::new(0.5, 1.0);
    let measures = [
        ("dirac(2)", Measure::dirac(2.0)),
        ("bernoulli", Measure::bernoulli()),
        ("semicircle(1)", Measure::semicircle(1.0)?),
        ("pareto(1.5)", Measure::pareto(1.5, 1.0)?),
    ];
    println!("z = {z}");
    for (name, m) in measures {
        let h = TransformHandle::leaf(m.clone());
        println!("{name:>14}: G = {:.6}  F = {:.6}  K = {:.6}", h.g(z)?, h.f(z)?, h.k(z)?);
        if m.support_positive() {
            println!("{:>14}  psi = {:.6}  eta = {:.6}  B = {:.6}", "", h.psi(z)?, h.eta(z)?, h.b(z)?);
        }
    }
    Ok(())
}
