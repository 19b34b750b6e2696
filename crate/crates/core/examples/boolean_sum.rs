//! Boolean sums: the Bernoulli square and tails of Boolean powers of a Pareto law.

use boolrv::inversion::{self, InversionProfile};
use boolrv::{bool_add, bool_add_power, Measure, TransformHandle};

fn main() -> boolrv::Result<()> {
    let prof = InversionProfile::default();
    let b = TransformHandle::leaf(Measure::bernoulli());
    for a in inversion::atoms(&bool_add(&b, &b), (-3.0, 3.0), &prof)? {
        println!("bernoulli square: atom at {:+.12} with mass {:.12}", a.location, a.mass);
    }

    let m = Measure::pareto(1.5, 1.0)?;
    let h = TransformHandle::leaf(m.clone());
    for n in [2.0, 3.0] {
        let hn = bool_add_power(&h, n)?;
        for y in [1e2, 1e3] {
            let t = inversion::tail_mass(&hn, y, &prof)?;
            println!("n = {n}, y = {y:>6}: tail {:.6e}, n * leaf tail {:.6e}", t.value, n * m.tail(y));
        }
    }
    Ok(())
}
