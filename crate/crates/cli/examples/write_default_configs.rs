//! Regenerate the shipped example configs from the built-in presets.
//!
//! Run from the workspace root:
//! `cargo run -p lsdml-cli --example write_default_configs`

use lsdml_cli::presets;
use lsdml_cli::ExperimentKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kinds = [
        ExperimentKind::OracleInspect,
        ExperimentKind::BiasIdentity,
        ExperimentKind::TikhonovRates,
        ExperimentKind::LearnerRates,
        ExperimentKind::Coverage,
        ExperimentKind::SingleEstimate,
    ];
    std::fs::create_dir_all("configs")?;
    for kind in kinds {
        let config = presets::default_config(kind);
        let path = format!("configs/{}.toml", kind.name());
        std::fs::write(&path, toml::to_string_pretty(&config)?)?;
        println!("wrote {path}");
    }
    Ok(())
}
