//! Report generation behind the `capa-isac` binary.
//!
//! Every command renders to a `String` so that it can be tested without
//! spawning a process. CSV numbers carry 12 significant digits and lines end
//! in `\n`.

pub mod report;
pub mod validate;

use std::path::Path;

use capa_isac::{Scene, SceneParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("computation failed: {0}")]
    Compute(#[from] capa_isac::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("validation failed: {failed} of {total} checks")]
    Validation { failed: usize, total: usize },
}

impl CliError {
    /// 0 success, 1 validation or computation failure, 2 config or usage error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Compute(_) | CliError::Validation { .. } => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Angle overrides given on the command line, in degrees.
#[derive(Debug, Clone, Copy, Default)]
pub struct AngleOverrides {
    pub cu_deg: Option<(f64, f64)>,
    pub target_deg: Option<(f64, f64)>,
}

/// Reads the config at `path`, or the built-in defaults when `None`, and
/// applies any degree overrides.
pub fn load_scene(path: Option<&Path>, angles: AngleOverrides) -> CliResult<Scene> {
    let scene = match path {
        Some(p) => Scene::from_config_file(p).map_err(|e| CliError::Config(e.to_string()))?,
        None => capa_isac::default_scene(),
    };
    let mut params: SceneParams = scene.params();
    let pos = |old: capa_isac::PolarPosition, (theta, phi): (f64, f64)| {
        capa_isac::PolarPosition::new(old.r(), theta.to_radians(), phi.to_radians())
            .map_err(|e| CliError::Config(e.to_string()))
    };
    if let Some(a) = angles.cu_deg {
        params.cu = pos(params.cu, a)?;
    }
    if let Some(a) = angles.target_deg {
        params.target = pos(params.target, a)?;
    }
    Scene::new(params).map_err(|e| CliError::Config(e.to_string()))
}

/// `"THETA,PHI"` in degrees.
pub fn parse_angle_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected THETA,PHI in degrees, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok((parse(a)?, parse(b)?))
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_pairs() {
        assert_eq!(parse_angle_pair("60, 45").unwrap(), (60.0, 45.0));
        assert!(parse_angle_pair("60").is_err());
        assert!(parse_angle_pair("a,1").is_err());
    }

    #[test]
    fn degree_overrides_convert_to_radians() {
        let angles = AngleOverrides { cu_deg: Some((60.0, 60.0)), target_deg: Some((45.0, 45.0)) };
        let scene = load_scene(None, angles).unwrap();
        let d = capa_isac::default_scene();
        assert!((scene.cu().theta() - d.cu().theta()).abs() < 1e-15);
        assert!((scene.target().phi() - d.target().phi()).abs() < 1e-15);
        let bad = AngleOverrides { cu_deg: Some((200.0, 10.0)), ..Default::default() };
        assert_eq!(load_scene(None, bad).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Validation { failed: 1, total: 2 }.exit_code(), 1);
    }
}
