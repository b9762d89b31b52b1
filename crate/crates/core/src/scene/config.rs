//! Flat key-value scene config (TOML syntax, dotted keys).
//!
//! ```toml
//! lambda_m = 0.125
//! lx_m = 0.5
//! lz_m = 0.5
//! cu.r_m = 20.0
//! cu.theta_rad = 1.0471975511965976
//! cu.phi_rad = 1.0471975511965976
//! target.r_m = 10.0
//! target.theta_rad = 0.7853981633974483
//! target.phi_rad = 0.7853981633974483
//! snr_dl_c_db = 10.0
//! snr_dl_s_db = 10.0
//! snr_ul_c_db = 10.0
//! snr_ul_s_db = 10.0
//! frame_len = 8
//! alpha_s = 1.0
//! # cu_aperture_area_m2 = 1.2433981132056603e-3   (optional, default λ²/4π)
//! ```
//!
//! Every key except `cu_aperture_area_m2` is required and unknown keys are
//! rejected.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use super::{PolarPosition, Scene, SceneParams, ETA_FREE_SPACE};
use crate::error::{Error, Result};

pub const REQUIRED_KEYS: [&str; 15] = [
    "lambda_m",
    "lx_m",
    "lz_m",
    "cu.r_m",
    "cu.theta_rad",
    "cu.phi_rad",
    "target.r_m",
    "target.theta_rad",
    "target.phi_rad",
    "snr_dl_c_db",
    "snr_dl_s_db",
    "snr_ul_c_db",
    "snr_ul_s_db",
    "frame_len",
    "alpha_s",
];

pub const OPTIONAL_KEYS: [&str; 1] = ["cu_aperture_area_m2"];

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Parses a config document into a validated scene.
pub fn parse_scene(src: &str) -> Result<Scene> {
    let table: toml::Table = src.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let mut flat = BTreeMap::new();
    flatten("", &table, &mut flat);

    for key in flat.keys() {
        if !REQUIRED_KEYS.contains(&key.as_str()) && !OPTIONAL_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown key `{key}`{}", line_suffix(src, key))));
        }
    }
    for key in REQUIRED_KEYS {
        if !flat.contains_key(key) {
            return Err(Error::Config(format!("missing required key `{key}`")));
        }
    }

    let float = |key: &str| -> Result<f64> {
        match flat[key] {
            toml::Value::Float(v) => Ok(*v),
            toml::Value::Integer(v) => Ok(*v as f64),
            other => Err(Error::Config(format!(
                "key `{key}` must be a number, got {}{}",
                other.type_str(),
                line_suffix(src, key)
            ))),
        }
    };
    let position = |prefix: &str| -> Result<PolarPosition> {
        let r = float(&format!("{prefix}.r_m"))?;
        let theta = float(&format!("{prefix}.theta_rad"))?;
        let phi = float(&format!("{prefix}.phi_rad"))?;
        PolarPosition::new(r, theta, phi)
            .map_err(|e| Error::Config(format!("`{prefix}` position: {e}{}", line_suffix(src, &format!("{prefix}.r_m")))))
    };

    let frame_len = match flat["frame_len"] {
        toml::Value::Integer(v) if *v >= 1 && *v <= u32::MAX as i64 => *v as u32,
        other => {
            return Err(Error::Config(format!(
                "key `frame_len` must be a positive integer, got {other}{}",
                line_suffix(src, "frame_len")
            )))
        }
    };

    let lambda = float("lambda_m")?;
    let cu_aperture_area = match flat.get("cu_aperture_area_m2") {
        Some(_) => float("cu_aperture_area_m2")?,
        None => lambda * lambda / (4.0 * PI),
    };

    let params = SceneParams {
        lambda,
        lx: float("lx_m")?,
        lz: float("lz_m")?,
        cu: position("cu")?,
        target: position("target")?,
        cu_aperture_area,
        snr_dl_c: db_to_linear(float("snr_dl_c_db")?),
        snr_dl_s: db_to_linear(float("snr_dl_s_db")?),
        snr_ul_c: db_to_linear(float("snr_ul_c_db")?),
        snr_ul_s: db_to_linear(float("snr_ul_s_db")?),
        frame_len,
        alpha_s: float("alpha_s")?,
        eta: ETA_FREE_SPACE,
    };
    Scene::new(params).map_err(|e| Error::Config(e.to_string()))
}

/// Writes the scene in the same format [`parse_scene`] reads. The CU aperture
/// area is always written explicitly.
pub fn write_scene(scene: &Scene) -> String {
    let p = scene.params();
    let mut out = String::new();
    let mut line = |key: &str, value: String| {
        let _ = writeln!(out, "{key} = {value}");
    };
    line("lambda_m", format!("{:?}", p.lambda));
    line("lx_m", format!("{:?}", p.lx));
    line("lz_m", format!("{:?}", p.lz));
    for (prefix, pos) in [("cu", p.cu), ("target", p.target)] {
        line(&format!("{prefix}.r_m"), format!("{:?}", pos.r()));
        line(&format!("{prefix}.theta_rad"), format!("{:?}", pos.theta()));
        line(&format!("{prefix}.phi_rad"), format!("{:?}", pos.phi()));
    }
    line("snr_dl_c_db", format!("{:?}", linear_to_db(p.snr_dl_c)));
    line("snr_dl_s_db", format!("{:?}", linear_to_db(p.snr_dl_s)));
    line("snr_ul_c_db", format!("{:?}", linear_to_db(p.snr_ul_c)));
    line("snr_ul_s_db", format!("{:?}", linear_to_db(p.snr_ul_s)));
    line("frame_len", p.frame_len.to_string());
    line("alpha_s", format!("{:?}", p.alpha_s));
    line("cu_aperture_area_m2", format!("{:?}", p.cu_aperture_area));
    out
}

impl Scene {
    /// Parses a config document. See the module docs for the key set.
    pub fn from_config_str(src: &str) -> Result<Scene> {
        parse_scene(src)
    }

    pub fn from_config_file(path: impl AsRef<std::path::Path>) -> Result<Scene> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        parse_scene(&src)
    }

    pub fn to_config_string(&self) -> String {
        write_scene(self)
    }
}

fn flatten<'a>(prefix: &str, table: &'a toml::Table, out: &mut BTreeMap<String, &'a toml::Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            _ => {
                out.insert(key, v);
            }
        }
    }
}

/// Best-effort 1-based line lookup for a dotted key, honouring `[section]` headers.
fn locate_key(src: &str, dotted: &str) -> Option<usize> {
    let mut section = String::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            section = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        let Some((lhs, _)) = line.split_once('=') else { continue };
        let lhs: String = lhs.split('.').map(|s| s.trim().trim_matches('"')).collect::<Vec<_>>().join(".");
        let full = if section.is_empty() { lhs } else { format!("{section}.{lhs}") };
        if full == dotted {
            return Some(i + 1);
        }
    }
    None
}

fn line_suffix(src: &str, key: &str) -> String {
    locate_key(src, key).map(|l| format!(" (line {l})")).unwrap_or_default()
}
