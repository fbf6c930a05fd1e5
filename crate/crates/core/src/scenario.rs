//! Scenario files (TOML) and the bundled scenarios.

use std::path::Path;

use crate::mission::MissionConfig;
use crate::{Error, Result};

const PAPER_FIG3: &str = include_str!("../scenarios/paper_fig3.toml");
const PAPER_FIG3_COARSE: &str = include_str!("../scenarios/paper_fig3_coarse.toml");

/// Names accepted by [`bundled`].
pub const BUNDLED: [&str; 2] = ["paper_fig3", "paper_fig3_coarse"];

/// Reads and validates a scenario file. Unknown keys are rejected.
pub fn parse_scenario(path: impl AsRef<Path>) -> Result<MissionConfig> {
    let text = std::fs::read_to_string(path.as_ref())?;
    from_str(&text)
}

pub fn from_str(text: &str) -> Result<MissionConfig> {
    let cfg: MissionConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn to_string(cfg: &MissionConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::Parse(e.to_string()))
}

/// A bundled scenario by name.
pub fn bundled(name: &str) -> Result<MissionConfig> {
    match name {
        "paper_fig3" => from_str(PAPER_FIG3),
        "paper_fig3_coarse" => from_str(PAPER_FIG3_COARSE),
        _ => Err(Error::param("scenario", format!("unknown bundled scenario `{name}`"))),
    }
}

/// A path to a file, or the name of a bundled scenario when no such file
/// exists.
pub fn load(spec: &str) -> Result<MissionConfig> {
    let path = Path::new(spec);
    if !path.exists() && BUNDLED.contains(&spec) {
        return bundled(spec);
    }
    parse_scenario(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_parameters() {
        let cfg = bundled("paper_fig3").unwrap();
        let k = cfg.agents.kernel;
        assert_eq!((k.capacity, k.lambda, k.r), (6.0, 1.0, 0.5));
        assert_eq!((cfg.field.alpha, cfg.field.beta), (1.0, 1.0));
        assert_eq!(cfg.agents.speed, 0.5);
        assert_eq!(cfg.mission.t_u, 500.0);
        assert_eq!(cfg.mission.k_max, 7);
        assert_eq!(cfg.num_agents(), 5);
        assert_eq!(cfg.workload.len(), 5);
    }

    #[test]
    fn coarse_differs_only_in_spacing() {
        let fine = bundled("paper_fig3").unwrap();
        let mut coarse = bundled("paper_fig3_coarse").unwrap();
        assert_eq!(coarse.region.spacing, 0.25);
        coarse.region.spacing = fine.region.spacing;
        coarse.output.directory = fine.output.directory.clone();
        assert_eq!(coarse, fine);
    }

    #[test]
    fn minimal_uses_defaults() {
        let cfg = from_str(
            "[region]\nouter = { x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0 }\n\
             [agents]\npositions = [[0.5, 0.5]]\nspeed = 0.5\n\
             kernel = { P = 6.0, lambda = 1.0, r = 0.5 }\n",
        )
        .unwrap();
        assert_eq!(cfg.region.spacing, 0.1);
        assert_eq!(cfg.mission.dt, 0.1);
        assert_eq!(cfg.mission.eps_m, 1e-3);
    }

    #[test]
    fn zero_radius_rejected() {
        let text = to_string(&bundled("paper_fig3").unwrap()).unwrap().replace("r = 0.5", "r = 0.0");
        let err = from_str(&text).unwrap_err().to_string();
        assert!(err.contains("r must be positive"), "{err}");
    }

    #[test]
    fn unknown_key_has_line() {
        let err = from_str("[region]\nouter = { x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0 }\nspacing_typo = 1\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("spacing_typo") && err.contains("line 3"), "{err}");
    }

    #[test]
    fn round_trip() {
        let cfg = bundled("paper_fig3").unwrap();
        assert_eq!(from_str(&to_string(&cfg).unwrap()).unwrap(), cfg);
    }
}
