//! Loads an experiment config and runs one command through the library,
//! as the `melchaos` binary does.
//!
//! `cargo run --release --example run_config -- examples/configs/fixture.toml check`

use melnikov_chaos::cli::{run, Command};
use melnikov_chaos::config::ExperimentConfig;

fn main() -> melnikov_chaos::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "examples/configs/fixture.toml".into());
    let cmd = match args.next().as_deref().unwrap_or("check") {
        "check" => Command::Check,
        "melnikov" => Command::Melnikov,
        "zeros" => Command::Zeros,
        "endpoints" => Command::Endpoints,
        "construct" => Command::Construct,
        other => panic!("unsupported command {other}"),
    };
    let cfg = ExperimentConfig::load(path.as_ref())?;
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let outcome = run(cmd, &cfg)?;
    println!("{}", serde_json::to_string_pretty(&outcome.result).expect("result is valid JSON"));
    for a in &outcome.artifacts {
        println!("wrote {}", a.display());
    }
    println!("pass {}", outcome.pass);
    Ok(())
}
