//! Cross-checking both simulators against the state-vector oracle on a
//! random batch of adaptive circuits.

use matchsim::cli::{cmd_xcheck, random_batch, Options};

fn main() -> matchsim::Result<()> {
    let batch: Vec<_> = random_batch(5, 30, 8, 3)
        .into_iter()
        .enumerate()
        .map(|(i, c)| (format!("random[{i}]"), c))
        .collect();
    let report = cmd_xcheck(&batch, 50_000, &Options::default())?;
    print!("{}", report.to_text());
    println!("breached: {}", report.breached());
    Ok(())
}
