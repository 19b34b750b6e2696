//! Tail tables of a Boolean square and a fitted index of regular variation.

use boolrv::asymptotics::{logspace, rv_index};
use boolrv::inversion::{self, InversionProfile};
use boolrv::{bool_add, Measure, TransformHandle};

fn main() -> boolrv::Result<()> {
    let p = TransformHandle::leaf(Measure::pareto(1.5, 1.0)?);
    let h = bool_add(&p, &p);
    let ys = logspace(1.0, 4.0, 7);
    let table = inversion::tail_table(&h, &ys, &InversionProfile::default())?;
    for t in &table {
        println!("y = {:>10.3}: tail {:.6e} +- {:.1e}", t.y, t.value, t.error);
    }
    let samples: Vec<(f64, f64)> = table.iter().map(|t| (t.y, t.value)).collect();
    println!("fitted index {:.4}", rv_index(&samples)?);
    Ok(())
}
