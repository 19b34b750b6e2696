//! Free additive powers, the Belinschi–Nica map and the Burgers equation.

use boolrv::free_additive::{self, belinschi_nica};
use boolrv::inversion::{self, InversionProfile};
use boolrv::{Measure, TransformHandle};
use num_complex::Complex64;

fn main() -> boolrv::Result<()> {
    let z = Complex64::new(0.3, 1.0);

    let sc = TransformHandle::leaf(Measure::semicircle(1.0)?);
    let sc2 = free_additive::free_power(&sc, 2.0)?;
    // the semicircle law is free stable: its free square is the semicircle of variance 2
    let direct = TransformHandle::leaf(Measure::semicircle(2.0)?);
    println!("free square of semicircle(1): G = {:.12}, semicircle(2): G = {:.12}", sc2.g(z)?, direct.g(z)?);

    let cauchy = belinschi_nica(&TransformHandle::leaf(Measure::StandardCauchy), 1.0)?;
    println!("B_1(cauchy): F(z) - z = {:.12}", cauchy.f(z)? - z);

    let p = TransformHandle::leaf(Measure::pareto(1.5, 1.0)?);
    let bn = belinschi_nica(&p, 0.5)?;
    let prof = InversionProfile::default();
    println!("B_0.5(pareto(1.5)) total mass {:.6}", inversion::total_mass(&bn, &prof)?.total);

    let conv = free_additive::burgers_convergence(&sc, 1.0, Complex64::new(0.0, 2.0), 0.2, 4)?;
    for (s, r) in conv.steps.iter().zip(&conv.residuals) {
        println!("burgers step {s:.4}: residual {r:.3e}");
    }
    println!("observed orders {:?}", conv.orders);
    Ok(())
}
