//! Quadrature rules for the aperture integrals.
//!
//! Two rules live here: the product Chebyshev–Gauss rule used for the
//! channel correlations, and an adaptive tensor Gauss–Legendre rule used as
//! an independent oracle for every aperture integral.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes per panel edge.
pub const PANEL_ORDER: usize = 16;

/// Default Chebyshev–Gauss node count per axis.
pub const DEFAULT_CHEBY_N: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Chebyshev–Gauss nodes per axis.
    pub cheby_n: usize,
    /// Refinement stops once successive oracle estimates differ by less than
    /// this, relative to the integral of the integrand's modulus.
    pub oracle_rel_tol: f64,
    /// Panel grid is `2^level × 2^level`; refinement gives up past this level.
    pub oracle_max_level: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { cheby_n: DEFAULT_CHEBY_N, oracle_rel_tol: 1e-12, oracle_max_level: 8 }
    }
}

impl QuadratureSpec {
    pub fn new(cheby_n: usize, oracle_rel_tol: f64, oracle_max_level: u32) -> Result<Self> {
        let spec = Self { cheby_n, oracle_rel_tol, oracle_max_level };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cheby_n < 2 {
            return Err(Error::InvalidParameter(format!("cheby_n must be at least 2, got {}", self.cheby_n)));
        }
        if !(self.oracle_rel_tol > 0.0 && self.oracle_rel_tol <= 1e-3) {
            return Err(Error::InvalidParameter(format!(
                "oracle_rel_tol must lie in (0, 1e-3], got {}",
                self.oracle_rel_tol
            )));
        }
        if self.oracle_max_level > 12 {
            return Err(Error::InvalidParameter(format!(
                "oracle_max_level above 12 is not supported, got {}",
                self.oracle_max_level
            )));
        }
        Ok(())
    }

    pub fn with_cheby_n(self, cheby_n: usize) -> Result<Self> {
        Self::new(cheby_n, self.oracle_rel_tol, self.oracle_max_level)
    }
}

/// First-kind Chebyshev nodes `ξ_n = cos((2n − 1)π / 2N)`, `n = 1..=N`.
pub fn chebyshev_nodes(n: usize) -> Vec<f64> {
    (1..=n).map(|k| ((2 * k - 1) as f64 * PI / (2 * n) as f64).cos()).collect()
}

/// Product Chebyshev–Gauss rule on `[x0, x1] × [z0, z1]` for a non-singular
/// integrand. The `√(1 − ξ²)` factors undo the Chebyshev weight, so the rule
/// converges like `N⁻²` rather than spectrally.
pub fn chebyshev_2d<F>(f: F, x_range: (f64, f64), z_range: (f64, f64), n: usize) -> Complex64
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    let xi = chebyshev_nodes(n);
    let map = |(a, b): (f64, f64)| -> Vec<(f64, f64)> {
        xi.iter()
            .map(|&t| (0.5 * (a + b) + 0.5 * (b - a) * t, (1.0 - t * t).sqrt()))
            .collect()
    };
    let xs = map(x_range);
    let zs = map(z_range);
    let sum: Complex64 = xs
        .par_iter()
        .map(|&(x, wx)| {
            let row: Complex64 = zs.iter().map(|&(z, wz)| f(x, z) * wz).sum();
            row * wx
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let scale = PI * PI * (x_range.1 - x_range.0) * (z_range.1 - z_range.0) / (4.0 * (n * n) as f64);
    sum * scale
}

fn reference_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let order = NonZeroUsize::new(PANEL_ORDER).expect("non-zero order");
        GaussLegendre::new(order).as_node_weight_pairs().to_vec()
    })
}

/// Composite Gauss–Legendre nodes and weights on `[a, b]` split into `panels`
/// equal panels.
pub fn composite_gl(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let rule = reference_rule();
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for &(t, w) in rule {
            out.push((mid + 0.5 * h * t, 0.5 * h * w));
        }
    }
    out
}

/// One tensor-product estimate at a fixed panel count. Returns the integral
/// and the integral of the modulus.
pub fn gl_2d_fixed<F>(f: &F, x_range: (f64, f64), z_range: (f64, f64), panels: usize) -> (Complex64, f64)
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    let xs = composite_gl(x_range.0, x_range.1, panels);
    let zs = composite_gl(z_range.0, z_range.1, panels);
    let rows: Vec<(Complex64, f64)> = xs
        .par_iter()
        .map(|&(x, wx)| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut acc_abs = 0.0;
            for &(z, wz) in &zs {
                let v = f(x, z);
                acc += v * wz;
                acc_abs += v.norm() * wz;
            }
            (acc * wx, acc_abs * wx)
        })
        .collect();
    rows.into_iter().fold((Complex64::new(0.0, 0.0), 0.0), |(s, m), (r, a)| (s + r, m + a))
}

/// Adaptive tensor Gauss–Legendre integration over a rectangle.
///
/// Level `ℓ` uses `2^ℓ × 2^ℓ` panels of 16×16 nodes. Refinement stops when
/// two successive levels agree to `spec.oracle_rel_tol` relative to the
/// integral of `|f|`; the finer estimate is returned.
pub fn adaptive_gl_2d<F>(f: F, x_range: (f64, f64), z_range: (f64, f64), spec: &QuadratureSpec) -> Result<Complex64>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    let (mut prev, _) = gl_2d_fixed(&f, x_range, z_range, 1);
    let mut rel_change = f64::INFINITY;
    for level in 1..=spec.oracle_max_level {
        let (est, modulus) = gl_2d_fixed(&f, x_range, z_range, 1usize << level);
        let scale = if modulus > 0.0 { modulus } else { 1.0 };
        rel_change = (est - prev).norm() / scale;
        if rel_change < spec.oracle_rel_tol {
            return Ok(est);
        }
        prev = est;
    }
    Err(Error::NonConvergence { levels: spec.oracle_max_level, rel_change })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(f: impl Fn(f64, f64) -> f64 + Sync) -> impl Fn(f64, f64) -> Complex64 + Sync {
        move |x, z| Complex64::new(f(x, z), 0.0)
    }

    #[test]
    fn rejects_invalid_quadrature_settings() {
        assert!(QuadratureSpec::default().validate().is_ok());
        assert!(QuadratureSpec::new(1, 1e-9, 8).is_err());
        assert!(QuadratureSpec::new(10, 0.0, 8).is_err());
        assert!(QuadratureSpec::new(10, 1e-2, 8).is_err());
    }

    #[test]
    fn chebyshev_nodes_are_roots_of_t_n() {
        let n = 7;
        for xi in chebyshev_nodes(n) {
            let t_n = (n as f64 * xi.acos()).cos();
            assert!(t_n.abs() < 1e-14);
        }
    }

    #[test]
    fn gl_is_exact_for_low_degree_polynomials() {
        let f = real(|x, z| 3.0 * x.powi(5) * z.powi(7) + x * x - 2.0 * z + 1.0);
        let (i, _) = gl_2d_fixed(&f, (0.0, 2.0), (-1.0, 3.0), 1);
        // ∫∫ 3x⁵z⁷ = 3·(64/6)·((3⁸ − 1)/8); ∫∫ x² = (8/3)·4; ∫∫ −2z = −2·2·4; ∫∫ 1 = 8
        let exact = 3.0 * (64.0 / 6.0) * ((6561.0 - 1.0) / 8.0) + 32.0 / 3.0 - 16.0 + 8.0;
        assert!((i.re - exact).abs() < 1e-10 * exact.abs());
    }

    #[test]
    fn adaptive_gl_handles_oscillation() {
        // ∫₀¹∫₀¹ e^{j k (x + z)} = ((e^{jk} − 1)/(jk))²
        let k = 60.0;
        let f = |x: f64, z: f64| Complex64::from_polar(1.0, k * (x + z));
        let i = adaptive_gl_2d(f, (0.0, 1.0), (0.0, 1.0), &QuadratureSpec::default()).unwrap();
        let one = (Complex64::from_polar(1.0, k) - 1.0) / Complex64::new(0.0, k);
        assert!((i - one * one).norm() < 1e-13);
    }

    #[test]
    fn adaptive_gl_reports_non_convergence() {
        let spec = QuadratureSpec { oracle_max_level: 1, ..QuadratureSpec::default() };
        let f = |x: f64, z: f64| Complex64::from_polar(1.0, 2000.0 * x * z);
        let err = adaptive_gl_2d(f, (0.0, 1.0), (0.0, 1.0), &spec).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { levels: 1, .. }));
    }

    #[test]
    fn chebyshev_converges_quadratically() {
        // ∫₀^π∫₀^1 sin(x) e^z = 2(e − 1)
        let f = real(|x, z| x.sin() * z.exp());
        let exact = 2.0 * (1f64.exp() - 1.0);
        let e1 = (chebyshev_2d(&f, (0.0, PI), (0.0, 1.0), 100).re - exact).abs();
        let e2 = (chebyshev_2d(&f, (0.0, PI), (0.0, 1.0), 200).re - exact).abs();
        assert!(e1 < 1e-3);
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn integration_is_linear() {
        let f = |x: f64, z: f64| Complex64::new(x.cos(), z * x);
        let c = Complex64::new(-2.5, 0.75);
        let spec = QuadratureSpec::default();
        let a = adaptive_gl_2d(f, (0.0, 1.0), (-0.5, 0.5), &spec).unwrap();
        let b = adaptive_gl_2d(|x, z| c * f(x, z), (0.0, 1.0), (-0.5, 0.5), &spec).unwrap();
        assert!((b - c * a).norm() < 1e-14 * (c * a).norm().max(1.0));
        let a = chebyshev_2d(f, (0.0, 1.0), (-0.5, 0.5), 50);
        let b = chebyshev_2d(|x, z| c * f(x, z), (0.0, 1.0), (-0.5, 0.5), 50);
        assert!((b - c * a).norm() < 1e-14 * (c * a).norm().max(1.0));
    }
}
