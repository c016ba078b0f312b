//! Building a map spec, writing it as JSON and running the `classify` command on it.

use fibred_flower::cli::{run, Command, RunFlags};
use fibred_flower::spec::{emit_spec, AlphaSpec, MapSpec};
use fibred_flower::TrigPoly;

fn main() -> fibred_flower::Result<()> {
    let spec = MapSpec::new(AlphaSpec::Golden, 8, [(2, TrigPoly::sin()), (3, TrigPoly::constant(0.25))]);
    let text = emit_spec(&spec);
    println!("{text}");
    let outcome = run(Command::Classify, &text, &RunFlags::default())?;
    println!("exit code {}", outcome.exit_code);
    println!("{}", outcome.report.to_json());
    Ok(())
}
