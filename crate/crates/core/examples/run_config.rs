//! Driving a run from a JSON config, the same way the `ima-lab` binary does,
//! and replaying it from its manifest.
//!
//! Run with:
//!   cargo run --example run_config

use ima_lab::cli::{run, RunConfig};

fn main() -> ima_lab::error::Result<()> {
    let dir = std::env::temp_dir().join("ima-lab-run-config");
    let text = format!(
        r#"{{
            "command": "contrast",
            "params": {{
                "map": {{"family": "grid", "m": 10, "d": 2, "delta": 0.5, "eps": 0.02}},
                "sources": [{{"kind": "uniform", "params": {{"low": 0.0, "high": 1.0}}}},
                            {{"kind": "uniform", "params": {{"low": 0.0, "high": 1.0}}}}],
                "n": 2000
            }},
            "master_seed": 3,
            "output_dir": {:?}
        }}"#,
        dir.display().to_string()
    );
    let cfg = RunConfig::from_json(&text)?;
    let out = run(&cfg)?;
    println!("{}", out.summary);
    println!("{}", std::fs::read_to_string(&out.csv)?);

    let replay = RunConfig::from_json(&std::fs::read_to_string(&out.manifest)?)?;
    let again = run(&replay)?;
    println!("replayed from manifest: {}", again.summary);
    Ok(())
}
