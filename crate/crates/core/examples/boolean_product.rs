//! Boolean multiplicative convolution of point masses and of Pareto laws.

use boolrv::inversion::{self, InversionProfile};
use boolrv::{bool_mult, Measure, TransformHandle};

fn main() -> boolrv::Result<()> {
    let prof = InversionProfile::default();
    let (a, b) = (TransformHandle::leaf(Measure::dirac(1.5)), TransformHandle::leaf(Measure::dirac(2.0)));
    for at in inversion::atoms(&bool_mult(&a, &b)?, (0.0, 5.0), &prof)? {
        println!("dirac(1.5) x dirac(2): atom at {:.12}, mass {:.12}", at.location, at.mass);
    }

    let mu = Measure::pareto(1.5, 1.0)?;
    let nu = Measure::pareto(3.0, 1.0)?;
    let h = bool_mult(&TransformHandle::leaf(mu.clone()), &TransformHandle::leaf(nu.clone()))?;
    let mean = nu.moment(1).finite().unwrap();
    for y in [1e2, 3e2, 1e3] {
        let t = inversion::tail_mass(&h, y, &prof)?.value;
        println!("y = {y:>6}: product tail {t:.6e}, mean(nu) * mu tail {:.6e}", mean * mu.tail(y));
    }
    Ok(())
}
