//! A complete resumable sweep driven by a TOML config, written to a
//! temporary output directory. Running it twice reuses every cell.

use copysample::harness::{run_experiment, ExperimentConfig};

const CONFIG: &str = r#"
n_grid = [100, 400]
repetitions = 3
archs = ["dt", "lr"]
seed = 1

[oracle]
name = "two-rings"
source = "analytic"
dim = 2
variant = { kind = "concentric_circles", center = [0.5, 0.5], radii = [0.2, 0.4] }

[reference]
size = 5000
"#;

fn main() -> copysample::Result<()> {
    let cfg = ExperimentConfig::parse(CONFIG)?;
    let out = std::env::temp_dir().join("copysample-full-run");
    let first = run_experiment(&cfg, &out)?;
    println!(
        "first run: {} cells computed, {} skipped",
        first.computed, first.skipped
    );
    let second = run_experiment(&cfg, &out)?;
    println!(
        "second run: {} cells computed, {} skipped",
        second.computed, second.skipped
    );
    println!("{}", std::fs::read_to_string(out.join("comparison.csv"))?);
    println!("outputs in {}", out.display());
    Ok(())
}
