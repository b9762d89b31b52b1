//! Physical scene: wavelength, aperture geometry, CU and target placement,
//! and the link SNRs.
//!
//! Two equally sized rectangular apertures sit edge-to-edge on the xz plane.
//! The transmit aperture covers `x ∈ [0, Lx]`, the receive aperture
//! `x ∈ [-Lx, 0]`, both with `z ∈ [-Lz/2, Lz/2]`. Angles are radians and SNRs
//! are linear power ratios everywhere inside the library; dB only appears in
//! the config file.

pub mod config;

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Endpoints closer to the array plane than this are rejected.
pub const MIN_PSI: f64 = 1e-9;

/// Free-space wave impedance, 120π Ω.
pub const ETA_FREE_SPACE: f64 = 120.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Endpoint {
    Cu,
    Target,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Cu => f.write_str("cu"),
            Endpoint::Target => f.write_str("target"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ApertureId {
    TransmitCapa,
    ReceiveCapa,
}

impl ApertureId {
    /// x-extent of the aperture for an edge length `lx`.
    pub fn x_range(self, lx: f64) -> (f64, f64) {
        match self {
            ApertureId::TransmitCapa => (0.0, lx),
            ApertureId::ReceiveCapa => (-lx, 0.0),
        }
    }

    pub fn z_range(lz: f64) -> (f64, f64) {
        (-0.5 * lz, 0.5 * lz)
    }
}

impl fmt::Display for ApertureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApertureId::TransmitCapa => f.write_str("tx"),
            ApertureId::ReceiveCapa => f.write_str("rx"),
        }
    }
}

/// Spherical position of an endpoint relative to the array origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPosition {
    r: f64,
    theta: f64,
    phi: f64,
}

impl PolarPosition {
    /// `r > 0`, elevation `theta ∈ [0, π]`, azimuth `phi ∈ [0, π]`.
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidScene(format!("distance must be positive, got {r}")));
        }
        for (name, angle) in [("theta", theta), ("phi", phi)] {
            if !(angle.is_finite() && (0.0..=PI).contains(&angle)) {
                return Err(Error::InvalidScene(format!("{name} must lie in [0, pi], got {angle}")));
            }
        }
        Ok(Self { r, theta, phi })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn direction_cosines(&self) -> DirectionCosines {
        direction_cosines(self)
    }

    pub fn cartesian_center(&self) -> [f64; 3] {
        cartesian_center(self)
    }
}

/// `(Φ, Ψ, Θ) = (cos φ sin θ, sin φ sin θ, cos θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionCosines {
    pub phi: f64,
    pub psi: f64,
    pub theta: f64,
}

pub fn direction_cosines(p: &PolarPosition) -> DirectionCosines {
    let (sin_t, cos_t) = p.theta.sin_cos();
    let (sin_p, cos_p) = p.phi.sin_cos();
    DirectionCosines {
        phi: cos_p * sin_t,
        psi: sin_p * sin_t,
        theta: cos_t,
    }
}

pub fn cartesian_center(p: &PolarPosition) -> [f64; 3] {
    let c = direction_cosines(p);
    [p.r * c.phi, p.r * c.psi, p.r * c.theta]
}

/// Plain, unvalidated scene description. Turn it into a [`Scene`] with
/// [`Scene::new`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    pub lambda: f64,
    pub lx: f64,
    pub lz: f64,
    pub cu: PolarPosition,
    pub target: PolarPosition,
    /// CU antenna aperture |A| in m².
    pub cu_aperture_area: f64,
    /// P / σ_c²
    pub snr_dl_c: f64,
    /// P / σ_s²
    pub snr_dl_s: f64,
    /// P_c / σ²
    pub snr_ul_c: f64,
    /// P_s / σ²
    pub snr_ul_s: f64,
    pub frame_len: u32,
    pub alpha_s: f64,
    pub eta: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        let lambda = 0.125;
        Self {
            lambda,
            lx: 0.5,
            lz: 0.5,
            cu: PolarPosition { r: 20.0, theta: PI / 3.0, phi: PI / 3.0 },
            target: PolarPosition { r: 10.0, theta: PI / 4.0, phi: PI / 4.0 },
            cu_aperture_area: lambda * lambda / (4.0 * PI),
            snr_dl_c: 10.0,
            snr_dl_s: 10.0,
            snr_ul_c: 10.0,
            snr_ul_s: 10.0,
            frame_len: 8,
            alpha_s: 1.0,
            eta: ETA_FREE_SPACE,
        }
    }
}

/// Validated, immutable scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scene {
    params: SceneParams,
}

impl Scene {
    pub fn new(params: SceneParams) -> Result<Self> {
        let positive = [
            ("lambda", params.lambda),
            ("lx", params.lx),
            ("lz", params.lz),
            ("cu_aperture_area", params.cu_aperture_area),
            ("snr_dl_c", params.snr_dl_c),
            ("snr_dl_s", params.snr_dl_s),
            ("snr_ul_c", params.snr_ul_c),
            ("snr_ul_s", params.snr_ul_s),
            ("alpha_s", params.alpha_s),
            ("eta", params.eta),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidScene(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if params.frame_len == 0 {
            return Err(Error::InvalidScene("frame_len must be at least 1".into()));
        }
        // Re-run position validation in case the params were built by hand.
        for (endpoint, p) in [(Endpoint::Cu, params.cu), (Endpoint::Target, params.target)] {
            PolarPosition::new(p.r, p.theta, p.phi)?;
            let psi = direction_cosines(&p).psi;
            if psi < MIN_PSI {
                return Err(Error::DegenerateScene { endpoint, psi });
            }
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> SceneParams {
        self.params
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda
    }

    /// Wavenumber 2π/λ.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.params.lambda
    }

    pub fn lx(&self) -> f64 {
        self.params.lx
    }

    pub fn lz(&self) -> f64 {
        self.params.lz
    }

    pub fn eta(&self) -> f64 {
        self.params.eta
    }

    pub fn position(&self, endpoint: Endpoint) -> &PolarPosition {
        match endpoint {
            Endpoint::Cu => &self.params.cu,
            Endpoint::Target => &self.params.target,
        }
    }

    pub fn cu(&self) -> &PolarPosition {
        &self.params.cu
    }

    pub fn target(&self) -> &PolarPosition {
        &self.params.target
    }

    pub fn cu_aperture_area(&self) -> f64 {
        self.params.cu_aperture_area
    }

    pub fn snr_dl_c(&self) -> f64 {
        self.params.snr_dl_c
    }

    pub fn snr_dl_s(&self) -> f64 {
        self.params.snr_dl_s
    }

    pub fn snr_ul_c(&self) -> f64 {
        self.params.snr_ul_c
    }

    pub fn snr_ul_s(&self) -> f64 {
        self.params.snr_ul_s
    }

    pub fn frame_len(&self) -> u32 {
        self.params.frame_len
    }

    pub fn alpha_s(&self) -> f64 {
        self.params.alpha_s
    }

    /// Same scene with a square aperture of the given side.
    pub fn with_aperture_side(&self, side: f64) -> Result<Self> {
        Scene::new(SceneParams { lx: side, lz: side, ..self.params })
    }

    /// Same scene with all four SNRs set to `linear`.
    pub fn with_all_snrs(&self, linear: f64) -> Result<Self> {
        Scene::new(SceneParams {
            snr_dl_c: linear,
            snr_dl_s: linear,
            snr_ul_c: linear,
            snr_ul_s: linear,
            ..self.params
        })
    }
}

impl Default for Scene {
    fn default() -> Self {
        default_scene()
    }
}

/// λ = 0.125 m, 0.5 m × 0.5 m apertures, 10 dB on every link, L = 8, α_s = 1,
/// target at (10 m, π/4, π/4) and CU at (20 m, π/3, π/3).
pub fn default_scene() -> Scene {
    Scene::new(SceneParams::default()).expect("default scene is valid")
}

/// Draws a scene with both endpoints in r ∈ [5, 50] m, θ, φ ∈ [π/6, 5π/6]
/// and a square aperture with side in [0.1, 0.5] m. Everything else keeps the
/// default values.
pub fn random_scene<R: Rng + ?Sized>(rng: &mut R) -> Scene {
    let draw_position = |rng: &mut R| {
        let r = rng.gen_range(5.0..=50.0);
        let theta = rng.gen_range(PI / 6.0..=5.0 * PI / 6.0);
        let phi = rng.gen_range(PI / 6.0..=5.0 * PI / 6.0);
        PolarPosition::new(r, theta, phi).expect("sampled inside the valid ranges")
    };
    let cu = draw_position(rng);
    let target = draw_position(rng);
    let side = rng.gen_range(0.1..=0.5);
    Scene::new(SceneParams { lx: side, lz: side, cu, target, ..SceneParams::default() })
        .expect("sampled scenes keep psi >= sin^2(pi/6)")
}
