//! Two-dimensional signal-subspace optimisation.
//!
//! Every beamformer that matters lies in the span of the two channel
//! functions, so the optimisation reduces to 2-D complex coordinates. We use
//! the orthonormal basis obtained by Gram–Schmidt with `e1 ∥ u1`, where
//! `u1` is the conjugated communication channel and `u2` the conjugated
//! sensing channel. In that basis `u1 = (√g1, 0)` and
//! `u2 = (ρ*/√g1, √(g2 − |ρ|²/g1))`, with `ρ = ⟨u1, u2⟩`.
//!
//! A weight `w = (υ1 u1 + υ2 e^{jφ} u2)/τ` achieves `γ̂_c = |⟨w, u1⟩|²` and
//! `γ̂_s = |⟨w, u2⟩|²`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative Cauchy–Schwarz overshoot that is clamped rather than rejected.
/// Quadrature-evaluated correlations can exceed `√(g1 g2)` by rounding when
/// the two channels are (nearly) parallel.
pub const CS_CLAMP_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceGeometry {
    g1: f64,
    g2: f64,
    rho: Complex64,
}

impl SubspaceGeometry {
    pub fn new(g1: f64, g2: f64, rho: Complex64) -> Result<Self> {
        if !(g1.is_finite() && g1 > 0.0 && g2.is_finite() && g2 > 0.0) {
            return Err(Error::InvalidGeometry(format!("norms must be positive, got g1 = {g1}, g2 = {g2}")));
        }
        if !(rho.re.is_finite() && rho.im.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite inner product {rho}")));
        }
        let bound = (g1 * g2).sqrt();
        let m = rho.norm();
        let rho = if m <= bound {
            rho
        } else if m <= bound * (1.0 + CS_CLAMP_TOL) {
            rho * (bound / m)
        } else {
            return Err(Error::InvalidGeometry(format!(
                "|rho| = {m} exceeds sqrt(g1 g2) = {bound}"
            )));
        };
        Ok(Self { g1, g2, rho })
    }

    pub fn g1(&self) -> f64 {
        self.g1
    }

    pub fn g2(&self) -> f64 {
        self.g2
    }

    pub fn rho(&self) -> Complex64 {
        self.rho
    }

    pub fn rho_abs(&self) -> f64 {
        self.rho.norm()
    }

    /// `(ε_lo, ε_hi)`; the interior regime is the open interval between them.
    pub fn eps_thresholds(&self) -> (f64, f64) {
        let r2 = self.rho.norm_sqr();
        let lo = r2 / (r2 + self.g2 * self.g2);
        let hi = self.g1 * self.g1 / (self.g1 * self.g1 + r2);
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    SensingEndpoint,
    Interior,
    CommEndpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamWeights {
    pub upsilon1: f64,
    pub upsilon2: f64,
    pub tau: f64,
    /// Rotation `φ` applied to the `u2` component.
    pub phase: f64,
    pub regime: Regime,
}

impl BeamWeights {
    pub fn sensing_endpoint(geo: &SubspaceGeometry) -> Self {
        Self { upsilon1: 0.0, upsilon2: 1.0, tau: geo.g2.sqrt(), phase: 0.0, regime: Regime::SensingEndpoint }
    }

    pub fn comm_endpoint(geo: &SubspaceGeometry) -> Self {
        Self { upsilon1: 1.0, upsilon2: 0.0, tau: geo.g1.sqrt(), phase: 0.0, regime: Regime::CommEndpoint }
    }

    /// `τ² − ‖υ1 u1 + υ2 e^{jφ} u2‖²`, zero for a properly normalised weight.
    pub fn normalization_residual(&self, geo: &SubspaceGeometry) -> f64 {
        let norm_sq = self.upsilon1 * self.upsilon1 * geo.g1
            + self.upsilon2 * self.upsilon2 * geo.g2
            + 2.0 * self.upsilon1 * self.upsilon2 * (Complex64::from_polar(1.0, -self.phase) * geo.rho).re;
        self.tau * self.tau - norm_sq
    }

    /// Coordinates of `w` in the orthonormal basis.
    pub fn coords(&self, geo: &SubspaceGeometry) -> [Complex64; 2] {
        let [u1, u2] = gram_schmidt_coeffs(geo);
        let rot = Complex64::from_polar(self.upsilon2, self.phase);
        [
            (u1[0] * self.upsilon1 + u2[0] * rot) / self.tau,
            (u1[1] * self.upsilon1 + u2[1] * rot) / self.tau,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AchievedGammas {
    pub gamma_c_hat: f64,
    pub gamma_s_hat: f64,
}

/// `min(γ̂_c/ε, γ̂_s/(1 − ε))` with `x/0 = ∞`: the objective of the
/// ε-weighted max-min problem.
pub fn pareto_objective(g: &AchievedGammas, eps: f64) -> f64 {
    let c = if eps > 0.0 { g.gamma_c_hat / eps } else { f64::INFINITY };
    let s = if eps < 1.0 { g.gamma_s_hat / (1.0 - eps) } else { f64::INFINITY };
    c.min(s)
}

/// Interior-regime weights, whether or not `eps` is actually interior.
pub fn interior_weights(eps: f64, geo: &SubspaceGeometry) -> Result<BeamWeights> {
    let (g1, g2, r) = (geo.g1, geo.g2, geo.rho_abs());
    let (se, sc) = (eps.sqrt(), (1.0 - eps).sqrt());
    let den = (1.0 - eps) * g1 + eps * g2 - 2.0 * se * sc * r;
    // Also rejects NaN.
    if den.is_nan() || den <= 0.0 {
        return Err(Error::DegenerateChannels { denominator: den });
    }
    let upsilon1 = (se * g2 - sc * r) / den;
    let upsilon2 = (sc * g1 - se * r) / den;
    let tau_sq = upsilon1 * upsilon1 * g1 + upsilon2 * upsilon2 * g2 + 2.0 * upsilon1 * upsilon2 * r;
    Ok(BeamWeights {
        upsilon1,
        upsilon2,
        tau: tau_sq.sqrt(),
        phase: geo.rho.arg(),
        regime: Regime::Interior,
    })
}

/// Closed-form Pareto-optimal weights for the trade-off parameter `eps`
/// (`0` is pure sensing, `1` pure communication). Threshold intervals are
/// closed on the endpoint side.
pub fn kkt_pareto(eps: f64, geo: &SubspaceGeometry) -> Result<BeamWeights> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps must lie in [0, 1], got {eps}")));
    }
    let (lo, hi) = geo.eps_thresholds();
    if eps <= lo {
        Ok(BeamWeights::sensing_endpoint(geo))
    } else if eps >= hi {
        Ok(BeamWeights::comm_endpoint(geo))
    } else {
        interior_weights(eps, geo)
    }
}

/// [`kkt_pareto`], falling back to whichever endpoint scores higher on the
/// ε-weighted objective when the interior formula degenerates.
pub fn kkt_pareto_or_endpoint(eps: f64, geo: &SubspaceGeometry) -> Result<BeamWeights> {
    match kkt_pareto(eps, geo) {
        Err(Error::DegenerateChannels { .. }) => {
            let s = BeamWeights::sensing_endpoint(geo);
            let c = BeamWeights::comm_endpoint(geo);
            let score = |w: &BeamWeights| pareto_objective(&achieved_gammas(w, geo), eps);
            Ok(if score(&c) > score(&s) { c } else { s })
        }
        other => other,
    }
}

pub fn achieved_gammas(w: &BeamWeights, geo: &SubspaceGeometry) -> AchievedGammas {
    let r = geo.rho_abs();
    let tau_sq = w.tau * w.tau;
    AchievedGammas {
        gamma_c_hat: (w.upsilon1 * geo.g1 + w.upsilon2 * r).powi(2) / tau_sq,
        gamma_s_hat: (w.upsilon1 * r + w.upsilon2 * geo.g2).powi(2) / tau_sq,
    }
}

/// Gammas of an arbitrary unit-norm weight given by basis coordinates.
pub fn gammas_from_coords(coords: [Complex64; 2], geo: &SubspaceGeometry) -> AchievedGammas {
    let [u1, u2] = gram_schmidt_coeffs(geo);
    let inner = |u: [Complex64; 2]| coords[0] * u[0].conj() + coords[1] * u[1].conj();
    AchievedGammas { gamma_c_hat: inner(u1).norm_sqr(), gamma_s_hat: inner(u2).norm_sqr() }
}

/// Basis coordinates of `u1` and `u2`. Parallel channels give a zero second
/// coordinate for `u2`.
pub fn gram_schmidt_coeffs(geo: &SubspaceGeometry) -> [[Complex64; 2]; 2] {
    let s1 = geo.g1.sqrt();
    let perp = (geo.g2 - geo.rho.norm_sqr() / geo.g1).max(0.0).sqrt();
    [
        [Complex64::new(s1, 0.0), Complex64::new(0.0, 0.0)],
        [geo.rho.conj() / s1, Complex64::new(perp, 0.0)],
    ]
}

/// Zoom rounds after the coarse grid. Each round searches `±REFINE_HALF_CELLS`
/// cells of the previous resolution around the incumbent at 10× finer spacing.
pub const GRID_REFINE_ROUNDS: u32 = 3;
pub const REFINE_HALF_CELLS: usize = 50;

fn grid_point(geo: &SubspaceGeometry, eps: f64, a: f64, b: f64) -> (f64, AchievedGammas) {
    let coords = [Complex64::new(a.cos(), 0.0), Complex64::from_polar(a.sin(), b)];
    let g = gammas_from_coords(coords, geo);
    (pareto_objective(&g, eps), g)
}

/// Best `(value, i, j)` over a rectangular lattice, rows in parallel, ties
/// broken towards the smaller `(i, j)`.
fn lattice_argmax<F>(ni: usize, nj: usize, f: F) -> (f64, usize, usize)
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    (0..ni)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::NEG_INFINITY, i, 0usize);
            for j in 0..nj {
                let v = f(i, j);
                if v > best.0 {
                    best = (v, i, j);
                }
            }
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, usize::MAX),
            |x, y| if y.0 > x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) { y } else { x },
        )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptimum {
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub gammas: AchievedGammas,
}

/// Brute-force maximiser of the ε-weighted objective over unit-norm weights
/// `(cos a, sin a · e^{jb})`, `a ∈ [0, π/2]`, `b ∈ [−π, π)`.
///
/// A `grid_n × grid_n` grid is searched first, then the incumbent is refined
/// for [`GRID_REFINE_ROUNDS`] zoom rounds.
pub fn pareto_grid_oracle(eps: f64, geo: &SubspaceGeometry, grid_n: usize) -> Result<GridOptimum> {
    pareto_grid_oracle_with(eps, geo, grid_n, GRID_REFINE_ROUNDS)
}

pub fn pareto_grid_oracle_with(eps: f64, geo: &SubspaceGeometry, grid_n: usize, rounds: u32) -> Result<GridOptimum> {
    if grid_n < 100 {
        return Err(Error::InvalidParameter(format!("grid_n must be at least 100, got {grid_n}")));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps must lie in [0, 1], got {eps}")));
    }
    let mut ha = FRAC_PI_2 / (grid_n - 1) as f64;
    let mut hb = 2.0 * PI / grid_n as f64;
    let (_, bi, bj) = lattice_argmax(grid_n, grid_n, |i, j| {
        grid_point(geo, eps, i as f64 * ha, -PI + j as f64 * hb).0
    });
    let (mut a, mut b) = (bi as f64 * ha, -PI + bj as f64 * hb);
    let n = 2 * 10 * REFINE_HALF_CELLS + 1;
    for _ in 0..rounds {
        let (a0, b0) = (a - (REFINE_HALF_CELLS as f64) * ha, b - (REFINE_HALF_CELLS as f64) * hb);
        ha /= 10.0;
        hb /= 10.0;
        let at = |i: usize| (a0 + i as f64 * ha).clamp(0.0, FRAC_PI_2);
        let bt = |j: usize| b0 + j as f64 * hb;
        let (_, i, j) = lattice_argmax(n, n, |i, j| grid_point(geo, eps, at(i), bt(j)).0);
        a = at(i);
        b = bt(j);
    }
    let b = (b + PI).rem_euclid(2.0 * PI) - PI;
    let (gamma, gammas) = grid_point(geo, eps, a, b);
    Ok(GridOptimum { gamma, a, b, gammas })
}

/// `max_v |aᴴv|² / (vᴴ(s·h hᴴ + I)v) = A − s|c|²/(1 + sH)` for `‖a‖² = A`,
/// `‖h‖² = H` and cross term `aᴴh = c̄`.
pub fn rayleigh_max(a_norm_sq: f64, h_norm_sq: f64, cross: Complex64, gamma_scale: f64) -> f64 {
    a_norm_sq - gamma_scale * cross.norm_sqr() / (1.0 + gamma_scale * h_norm_sq)
}

/// Largest generalised eigenvalue of the pencil `(a aᴴ, s h hᴴ + I)` with
/// `a`, `h` placed in a 2-D orthonormal basis, from the characteristic
/// quadratic `det(a aᴴ − λB) = 0`.
pub fn rayleigh_pencil_oracle(a_norm_sq: f64, h_norm_sq: f64, cross: Complex64, gamma_scale: f64) -> f64 {
    let (m, b) = rayleigh_pencil(a_norm_sq, h_norm_sq, cross, gamma_scale);
    let det = |x: [[Complex64; 2]; 2]| x[0][0] * x[1][1] - x[0][1] * x[1][0];
    // det(M − λB) = λ² det B − λ (m00 b11 + m11 b00 − m01 b10 − m10 b01) + det M
    let qa = det(b).re;
    let qb = -(m[0][0] * b[1][1] + m[1][1] * b[0][0] - m[0][1] * b[1][0] - m[1][0] * b[0][1]).re;
    let qc = det(m).re;
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    // Larger root without cancellation: qb ≤ 0 here since M, B are PSD.
    let q = -0.5 * (qb - disc);
    let r1 = q / qa;
    let r2 = if q != 0.0 { qc / q } else { 0.0 };
    r1.max(r2)
}

/// `(a aᴴ, s h hᴴ + I)` with `a = (√A, 0)`, `h = (c̄/√A, √(H − |c|²/A))`.
pub fn rayleigh_pencil(
    a_norm_sq: f64,
    h_norm_sq: f64,
    cross: Complex64,
    gamma_scale: f64,
) -> ([[Complex64; 2]; 2], [[Complex64; 2]; 2]) {
    let sa = a_norm_sq.sqrt();
    let a = [Complex64::new(sa, 0.0), Complex64::new(0.0, 0.0)];
    let h = [
        cross.conj() / sa,
        Complex64::new((h_norm_sq - cross.norm_sqr() / a_norm_sq).max(0.0).sqrt(), 0.0),
    ];
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut b = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i] * a[j].conj();
            b[i][j] = h[i] * h[j].conj() * gamma_scale;
        }
        b[i][i] += 1.0;
    }
    (m, b)
}
