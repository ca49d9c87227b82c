// Config files and CSV output through the same entry point the `sml`
// binary uses.

use std::path::Path;

use sml_volterra::experiments::{run_to_dir, ScenarioConfig};

const CONFIG: &str = "\
# identification on a decomposable plant
kind = identification
order = 2
memory = 4
mu_factor = 0.5
realizations = 8
iterations = 1500
filters = sml-lms, sml-true-lms(4)
trace_realization = 0
";

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig::parse(CONFIG, Path::new("inline.cfg"))?;
    print!("resolved config:\n{}", cfg.to_config_string());
    let dir = std::env::temp_dir().join(format!("sml-config-example-{}", std::process::id()));
    let (files, warnings) = run_to_dir(&cfg, &dir)?;
    for f in &files {
        let text = std::fs::read_to_string(f)?;
        println!("{}: {} lines, header {:?}", f.display(), text.lines().count(), text.lines().next());
    }
    for w in warnings {
        println!("warning: {w}");
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
