//! Line-of-sight aperture channels.
//!
//! Every endpoint `k` (CU or target) sees the aperture through the kernel
//!
//! ```text
//! ĥ_k(x, z) = j η k0 √(r_k Ψ_k / 4π) · exp(−j k0 √D) / D^{3/4},
//! D = x² + z² − 2 r_k (Φ_k x + Θ_k z) + r_k²
//! ```
//!
//! which folds the radiating Green's function and the projected-aperture
//! loss into one expression. The four gains are `∫|ĥ|²` over one aperture and
//! have closed forms; the two correlations `∫ ĥ_c* ĥ_s` do not and are
//! evaluated by Chebyshev–Gauss quadrature.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quadrature::{adaptive_gl_2d, chebyshev_2d, QuadratureSpec};
use crate::scene::{ApertureId, DirectionCosines, Endpoint, Scene};

/// Per-endpoint constants of the kernel.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    k0: f64,
    amplitude: f64,
    r: f64,
    cos: DirectionCosines,
}

impl Kernel {
    pub fn new(scene: &Scene, endpoint: Endpoint) -> Self {
        let p = scene.position(endpoint);
        let cos = p.direction_cosines();
        let k0 = scene.k0();
        Self {
            k0,
            amplitude: scene.eta() * k0 * (p.r() * cos.psi / (4.0 * PI)).sqrt(),
            r: p.r(),
            cos,
        }
    }

    /// Squared distance from the endpoint to `(x, 0, z)`. Written as a sum of
    /// squares so it never goes negative through cancellation.
    #[inline]
    pub fn distance_sq(&self, x: f64, z: f64) -> f64 {
        let dx = x - self.r * self.cos.phi;
        let dy = self.r * self.cos.psi;
        let dz = z - self.r * self.cos.theta;
        dx * dx + dy * dy + dz * dz
    }

    #[inline]
    pub fn eval(&self, x: f64, z: f64) -> Complex64 {
        let d = self.distance_sq(x, z).sqrt();
        let mag = self.amplitude / (d * d.sqrt());
        let (s, c) = (self.k0 * d).sin_cos();
        // j · e^{−jk0 d} = sin(k0 d) + j cos(k0 d)
        Complex64::new(mag * s, mag * c)
    }

    #[inline]
    pub fn power(&self, x: f64, z: f64) -> f64 {
        let d2 = self.distance_sq(x, z);
        self.amplitude * self.amplitude / (d2 * d2.sqrt())
    }
}

/// `ĥ_k(x, z)` for the endpoint `k`.
pub fn green_kernel(scene: &Scene, endpoint: Endpoint, x: f64, z: f64) -> Complex64 {
    Kernel::new(scene, endpoint).eval(x, z)
}

/// The same channel built from its physical ingredients: the radiating
/// free-space Green's function `−jηk0 e^{−jk0 d}/(4πd)` scaled by the square
/// root of the projected-aperture factor `|e_yᵀ(p − t)| / ‖p − t‖`.
///
/// This normalisation is `1/√(4π)` of [`green_kernel`] in amplitude (and
/// opposite in sign); [`green_kernel`] is the one the closed-form gains
/// integrate.
pub fn green_kernel_physical(scene: &Scene, endpoint: Endpoint, x: f64, z: f64) -> Complex64 {
    let p = scene.position(endpoint).cartesian_center();
    let diff = [p[0] - x, p[1], p[2] - z];
    let dist = (diff[0] * diff[0] + diff[1] * diff[1] + diff[2] * diff[2]).sqrt();
    let projection = (diff[1].abs() / dist).sqrt();
    let k0 = scene.k0();
    let green = Complex64::new(0.0, -scene.eta() * k0) * Complex64::from_polar(1.0, -k0 * dist) / (4.0 * PI * dist);
    green * projection
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GainKind {
    /// CU over the transmit aperture.
    Gd,
    /// Target over the transmit aperture.
    Gt,
    /// Target over the receive aperture.
    Gr,
    /// CU over the receive aperture.
    Gu,
}

impl GainKind {
    pub const ALL: [GainKind; 4] = [GainKind::Gd, GainKind::Gt, GainKind::Gr, GainKind::Gu];

    pub fn endpoint(self) -> Endpoint {
        match self {
            GainKind::Gd | GainKind::Gu => Endpoint::Cu,
            GainKind::Gt | GainKind::Gr => Endpoint::Target,
        }
    }

    pub fn aperture(self) -> ApertureId {
        match self {
            GainKind::Gd | GainKind::Gt => ApertureId::TransmitCapa,
            GainKind::Gr | GainKind::Gu => ApertureId::ReceiveCapa,
        }
    }
}

impl fmt::Display for GainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GainKind::Gd => "g_d",
            GainKind::Gt => "g_t",
            GainKind::Gr => "g_r",
            GainKind::Gu => "g_u",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGains {
    pub g_d: f64,
    pub g_t: f64,
    pub g_r: f64,
    pub g_u: f64,
}

impl ChannelGains {
    pub fn get(&self, kind: GainKind) -> f64 {
        match kind {
            GainKind::Gd => self.g_d,
            GainKind::Gt => self.g_t,
            GainKind::Gr => self.g_r,
            GainKind::Gu => self.g_u,
        }
    }

    pub fn closed(scene: &Scene) -> Self {
        Self {
            g_d: gain_closed(scene, GainKind::Gd),
            g_t: gain_closed(scene, GainKind::Gt),
            g_r: gain_closed(scene, GainKind::Gr),
            g_u: gain_closed(scene, GainKind::Gu),
        }
    }

    pub fn oracle(scene: &Scene, spec: &QuadratureSpec) -> Result<Self> {
        Ok(Self {
            g_d: gain_oracle(scene, GainKind::Gd, spec)?,
            g_t: gain_oracle(scene, GainKind::Gt, spec)?,
            g_r: gain_oracle(scene, GainKind::Gr, spec)?,
            g_u: gain_oracle(scene, GainKind::Gu, spec)?,
        })
    }
}

/// `ζ(x, z) = arctan(xz / (Ψ √(Ψ² + x² + z²)))`, the odd antiderivative of
/// the normalised `|ĥ|²` in scaled coordinates.
pub fn zeta(psi: f64, x: f64, z: f64) -> f64 {
    (x * z / (psi * (psi * psi + x * x + z * z).sqrt())).atan()
}

/// The signed `(x, z)` evaluation points of the closed form, x-outer.
pub fn closed_form_sets(scene: &Scene, kind: GainKind) -> ([f64; 2], [f64; 2]) {
    let p = scene.position(kind.endpoint());
    let c = p.direction_cosines();
    let (lx, lz, r) = (scene.lx(), scene.lz(), p.r());
    let xs = match kind.aperture() {
        ApertureId::TransmitCapa => [c.phi, lx / r - c.phi],
        ApertureId::ReceiveCapa => [-c.phi, lx / r + c.phi],
    };
    let zs = [lz / (2.0 * r) + c.theta, lz / (2.0 * r) - c.theta];
    (xs, zs)
}

/// Closed-form aperture gain, `(η²k0²/4π) Σ_x Σ_z ζ(x, z)`.
pub fn gain_closed(scene: &Scene, kind: GainKind) -> f64 {
    let psi = scene.position(kind.endpoint()).direction_cosines().psi;
    let (xs, zs) = closed_form_sets(scene, kind);
    let mut sum = 0.0;
    let mut carry = 0.0;
    for &x in &xs {
        for &z in &zs {
            let y = zeta(psi, x, z) - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
        }
    }
    let k0 = scene.k0();
    scene.eta() * scene.eta() * k0 * k0 / (4.0 * PI) * sum
}

/// Adaptive Gauss–Legendre integral of `|ĥ|²` over the matching aperture.
pub fn gain_oracle(scene: &Scene, kind: GainKind, spec: &QuadratureSpec) -> Result<f64> {
    let kernel = Kernel::new(scene, kind.endpoint());
    let x_range = kind.aperture().x_range(scene.lx());
    let z_range = ApertureId::z_range(scene.lz());
    let v = adaptive_gl_2d(|x, z| Complex64::new(kernel.power(x, z), 0.0), x_range, z_range, spec)?;
    Ok(v.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorrelationKind {
    /// Over the transmit aperture.
    RhoD,
    /// Over the receive aperture.
    RhoU,
}

impl CorrelationKind {
    pub const ALL: [CorrelationKind; 2] = [CorrelationKind::RhoD, CorrelationKind::RhoU];

    pub fn aperture(self) -> ApertureId {
        match self {
            CorrelationKind::RhoD => ApertureId::TransmitCapa,
            CorrelationKind::RhoU => ApertureId::ReceiveCapa,
        }
    }
}

impl fmt::Display for CorrelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationKind::RhoD => "rho_d",
            CorrelationKind::RhoU => "rho_u",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub rho_d: Complex64,
    pub rho_u: Complex64,
}

impl Correlation {
    pub fn get(&self, kind: CorrelationKind) -> Complex64 {
        match kind {
            CorrelationKind::RhoD => self.rho_d,
            CorrelationKind::RhoU => self.rho_u,
        }
    }
}

/// `∫ ĥ_c* ĥ_s` over the aperture of `kind` with an `n × n` Chebyshev–Gauss rule.
pub fn rho_chebyshev(scene: &Scene, kind: CorrelationKind, n: usize) -> Complex64 {
    let c = Kernel::new(scene, Endpoint::Cu);
    let s = Kernel::new(scene, Endpoint::Target);
    chebyshev_2d(
        |x, z| c.eval(x, z).conj() * s.eval(x, z),
        kind.aperture().x_range(scene.lx()),
        ApertureId::z_range(scene.lz()),
        n.max(2),
    )
}

/// `∫ ĥ_a* ĥ_b` over `aperture` with the adaptive oracle.
pub fn inner_product_oracle(
    scene: &Scene,
    aperture: ApertureId,
    conjugated: Endpoint,
    other: Endpoint,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let a = Kernel::new(scene, conjugated);
    let b = Kernel::new(scene, other);
    adaptive_gl_2d(
        |x, z| a.eval(x, z).conj() * b.eval(x, z),
        aperture.x_range(scene.lx()),
        ApertureId::z_range(scene.lz()),
        spec,
    )
}

pub fn rho_oracle(scene: &Scene, kind: CorrelationKind, spec: &QuadratureSpec) -> Result<Complex64> {
    inner_product_oracle(scene, kind.aperture(), Endpoint::Cu, Endpoint::Target, spec)
}

/// Gains and correlations of one scene: everything the rate formulas need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    pub gains: ChannelGains,
    pub corr: Correlation,
}

impl ChannelState {
    /// Closed-form gains and Chebyshev–Gauss correlations.
    pub fn evaluate(scene: &Scene, spec: &QuadratureSpec) -> Self {
        Self {
            gains: ChannelGains::closed(scene),
            corr: Correlation {
                rho_d: rho_chebyshev(scene, CorrelationKind::RhoD, spec.cheby_n),
                rho_u: rho_chebyshev(scene, CorrelationKind::RhoU, spec.cheby_n),
            },
        }
    }

    /// Everything from the adaptive Gauss–Legendre oracle.
    pub fn evaluate_oracle(scene: &Scene, spec: &QuadratureSpec) -> Result<Self> {
        Ok(Self {
            gains: ChannelGains::oracle(scene, spec)?,
            corr: Correlation {
                rho_d: rho_oracle(scene, CorrelationKind::RhoD, spec)?,
                rho_u: rho_oracle(scene, CorrelationKind::RhoU, spec)?,
            },
        })
    }
}
