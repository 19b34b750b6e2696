//! Runs the built-in scenarios of one result, `T3.4` unless another id is given.
//!
//! `cargo run --release --example verify -- T2.5`

use boolrv::asymptotics::{default_scenarios, TheoremId, VerifyOptions};

fn main() -> boolrv::Result<()> {
    let id: TheoremId = std::env::args().nth(1).unwrap_or_else(|| "T3.4".into()).parse()?;
    for r in default_scenarios(id, &VerifyOptions::default())? {
        println!("{} [{}] {:?}, max deviation {:.3e}", r.theorem, r.scenario, r.verdict, r.max_deviation);
        r.write_csv(std::io::stdout())?;
    }
    Ok(())
}
