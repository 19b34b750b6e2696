//! Recovering densities, atoms and total mass from a transform.

use boolrv::inversion::{self, InversionProfile};
use boolrv::{bool_add, Measure, TransformHandle};

fn main() -> boolrv::Result<()> {
    let prof = InversionProfile { x_grid: vec![-1.5, -1.0, 0.0, 1.0, 1.5], ..InversionProfile::default() };
    let m = Measure::mixture(vec![(0.7, Measure::semicircle(1.0)?), (0.3, Measure::dirac(3.0))])?;
    // a Boolean shift, so nothing short-circuits to the closed forms
    let h = bool_add(&TransformHandle::leaf(m), &TransformHandle::leaf(Measure::dirac(0.5)));
    for d in inversion::density_table(&h, &prof)? {
        println!("density at {:+.2}: {:.8} (clipped {:.1e})", d.x, d.value, d.clipped);
    }
    for a in inversion::atoms(&h, (-4.0, 4.0), &prof)? {
        println!("atom at {:.6} with mass {:.6}", a.location, a.mass);
    }
    println!("total mass {:.6}", inversion::total_mass(&h, &prof)?.total);
    Ok(())
}
