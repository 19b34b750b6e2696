//! Boolean, free and classical max powers of a Pareto law, and the map X.

use boolrv::boolean_max::{self, DistFunction};
use boolrv::Measure;

fn main() -> boolrv::Result<()> {
    let f = DistFunction::from_measure(&Measure::pareto(1.5, 1.0)?);
    let n = 3;
    let (b, fr, c) = (
        boolean_max::bool_max_power(&f, n)?,
        boolean_max::free_max_power(&f, n)?,
        boolean_max::classical_max_power(&f, n)?,
    );
    println!("{:>8} {:>14} {:>14} {:>14} {:>14}", "y", "n * tail", "boolean", "free", "classical");
    for y in [10.0, 100.0, 1000.0] {
        println!("{y:>8} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}", n as f64 * f.sf(y), b.sf(y), fr.sf(y), c.sf(y));
    }

    let (p, q) = (0.3, 0.8);
    let boolean = boolean_max::bool_min_scalar(p, q);
    let lhs = boolean_max::x_map_scalar(boolean)?;
    let rhs = boolean_max::x_map_scalar(p)? * boolean_max::x_map_scalar(q)?;
    println!("X({p} v {q}) = {lhs:.15}, X({p}) X({q}) = {rhs:.15}");
    Ok(())
}
