//! Communication and sensing rates, in bits per channel use.
//!
//! CR is `log2(1 + x)`; SR is the per-symbol sensing mutual information
//! `log2(1 + L x)/L` over a frame of `L` symbols.
//!
//! Downlink: the C-C design beams along the CU channel, the S-C design along
//! the target's, and the Pareto designs interpolate via the subspace solver.
//! Uplink: the receiver decodes one signal first, cancels it, then decodes
//! the other. C-C decodes sensing first so communication is clean; S-C does
//! the reverse. Time sharing between the two orders gives the uplink region.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelGains, ChannelState};
use crate::error::{Error, Result};
use crate::scene::Scene;
use crate::subspace::{achieved_gammas, kkt_pareto, kkt_pareto_or_endpoint, rayleigh_max, SubspaceGeometry};

/// Default number of ε / ς samples per region.
pub const DEFAULT_REGION_GRID: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSnrs {
    /// `P|A|/σ_c²`
    pub gamma_bar_c: f64,
    /// `P α_s/σ_s²`
    pub gamma_bar_s: f64,
    /// `P_c|A|/σ²`
    pub gamma_tilde_c: f64,
    /// `P_s α_s/σ²`
    pub gamma_tilde_s: f64,
}

impl EffectiveSnrs {
    pub fn from_scene(scene: &Scene) -> Self {
        let area = scene.cu_aperture_area();
        let alpha = scene.alpha_s();
        Self {
            gamma_bar_c: scene.snr_dl_c() * area,
            gamma_bar_s: scene.snr_dl_s() * alpha,
            gamma_tilde_c: scene.snr_ul_c() * area,
            gamma_tilde_s: scene.snr_ul_s() * alpha,
        }
    }
}

/// Everything besides the channel that the rate formulas need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    pub snrs: EffectiveSnrs,
    pub frame_len: u32,
}

impl RateModel {
    pub fn from_scene(scene: &Scene) -> Self {
        Self { snrs: EffectiveSnrs::from_scene(scene), frame_len: scene.frame_len() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub sr: f64,
    pub cr: f64,
}

impl RatePair {
    pub fn new(sr: f64, cr: f64) -> Self {
        Self { sr, cr }
    }
}

pub fn comm_rate(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

pub fn sensing_rate(x: f64, frame_len: u32) -> f64 {
    let l = frame_len as f64;
    (l * x).ln_1p() / std::f64::consts::LN_2 / l
}

pub fn dl_cr_cc(m: &RateModel, g: &ChannelGains) -> f64 {
    comm_rate(m.snrs.gamma_bar_c * g.g_d)
}

pub fn dl_sr_cc(m: &RateModel, g: &ChannelGains, rho_d: Complex64) -> f64 {
    sensing_rate(m.snrs.gamma_bar_s * g.g_r * rho_d.norm_sqr() / g.g_d, m.frame_len)
}

pub fn dl_sr_sc(m: &RateModel, g: &ChannelGains) -> f64 {
    sensing_rate(m.snrs.gamma_bar_s * g.g_t * g.g_r, m.frame_len)
}

pub fn dl_cr_sc(m: &RateModel, g: &ChannelGains, rho_d: Complex64) -> f64 {
    comm_rate(m.snrs.gamma_bar_c * rho_d.norm_sqr() / g.g_t)
}

pub fn dl_geometry(ch: &ChannelState) -> Result<SubspaceGeometry> {
    SubspaceGeometry::new(ch.gains.g_d, ch.gains.g_t, ch.corr.rho_d)
}

fn dl_pair_from_weights(m: &RateModel, ch: &ChannelState, geo: &SubspaceGeometry, eps: f64, fallback: bool) -> Result<RatePair> {
    let w = if fallback { kkt_pareto_or_endpoint(eps, geo)? } else { kkt_pareto(eps, geo)? };
    let g = achieved_gammas(&w, geo);
    Ok(RatePair {
        sr: sensing_rate(m.snrs.gamma_bar_s * g.gamma_s_hat * ch.gains.g_r, m.frame_len),
        cr: comm_rate(m.snrs.gamma_bar_c * g.gamma_c_hat),
    })
}

/// Downlink rates of the Pareto-optimal beamformer for trade-off `eps`.
pub fn dl_pareto_pair(m: &RateModel, ch: &ChannelState, eps: f64) -> Result<RatePair> {
    dl_pair_from_weights(m, ch, &dl_geometry(ch)?, eps, false)
}

pub fn ul_sr_cc(m: &RateModel, g: &ChannelGains, rho_u: Complex64) -> f64 {
    let s = &m.snrs;
    sensing_rate(s.gamma_tilde_s * g.g_t * rayleigh_max(g.g_r, g.g_u, rho_u, s.gamma_tilde_c), m.frame_len)
}

pub fn ul_cr_cc(m: &RateModel, g: &ChannelGains) -> f64 {
    comm_rate(m.snrs.gamma_tilde_c * g.g_u)
}

pub fn ul_cr_sc(m: &RateModel, g: &ChannelGains, rho_u: Complex64) -> f64 {
    let s = &m.snrs;
    comm_rate(s.gamma_tilde_c * rayleigh_max(g.g_u, g.g_r, rho_u.conj(), s.gamma_tilde_s * g.g_t))
}

pub fn ul_sr_sc(m: &RateModel, g: &ChannelGains) -> f64 {
    sensing_rate(m.snrs.gamma_tilde_s * g.g_t * g.g_r, m.frame_len)
}

/// S-C order with probability `sigma`, C-C otherwise.
pub fn ul_timeshare_pair(m: &RateModel, ch: &ChannelState, sigma: f64) -> Result<RatePair> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::InvalidParameter(format!("sigma must lie in [0, 1], got {sigma}")));
    }
    let (g, rho) = (&ch.gains, ch.corr.rho_u);
    Ok(RatePair {
        sr: sigma * ul_sr_sc(m, g) + (1.0 - sigma) * ul_sr_cc(m, g, rho),
        cr: sigma * ul_cr_sc(m, g, rho) + (1.0 - sigma) * ul_cr_cc(m, g),
    })
}

/// The eight corner rates of one scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsacRates {
    pub dl_cc_cr: f64,
    pub dl_sc_cr: f64,
    pub dl_cc_sr: f64,
    pub dl_sc_sr: f64,
    pub ul_cc_cr: f64,
    pub ul_sc_cr: f64,
    pub ul_cc_sr: f64,
    pub ul_sc_sr: f64,
}

impl IsacRates {
    pub fn compute(m: &RateModel, ch: &ChannelState) -> Self {
        let (g, c) = (&ch.gains, &ch.corr);
        Self {
            dl_cc_cr: dl_cr_cc(m, g),
            dl_sc_cr: dl_cr_sc(m, g, c.rho_d),
            dl_cc_sr: dl_sr_cc(m, g, c.rho_d),
            dl_sc_sr: dl_sr_sc(m, g),
            ul_cc_cr: ul_cr_cc(m, g),
            ul_sc_cr: ul_cr_sc(m, g, c.rho_u),
            ul_cc_sr: ul_sr_cc(m, g, c.rho_u),
            ul_sc_sr: ul_sr_sc(m, g),
        }
    }

    /// `(name, value)` in a fixed order.
    pub fn labeled(&self) -> [(&'static str, f64); 8] {
        [
            ("dl_cc_cr", self.dl_cc_cr),
            ("dl_sc_cr", self.dl_sc_cr),
            ("dl_cc_sr", self.dl_cc_sr),
            ("dl_sc_sr", self.dl_sc_sr),
            ("ul_cc_cr", self.ul_cc_cr),
            ("ul_sc_cr", self.ul_sc_cr),
            ("ul_cc_sr", self.ul_cc_sr),
            ("ul_sc_sr", self.ul_sc_sr),
        ]
    }

    /// SR + CR under the C-C decoding order.
    pub fn ul_sum_cc(&self) -> f64 {
        self.ul_cc_sr + self.ul_cc_cr
    }

    /// SR + CR under the S-C decoding order.
    pub fn ul_sum_sc(&self) -> f64 {
        self.ul_sc_sr + self.ul_sc_cr
    }

    /// Euclidean distance between the two uplink corners in the SR-CR plane.
    pub fn ul_corner_gap(&self) -> f64 {
        (self.ul_sc_sr - self.ul_cc_sr).hypot(self.ul_cc_cr - self.ul_sc_cr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Corner {
    /// Communications-centric design.
    CommCentric,
    /// Sensing-centric design.
    SensingCentric,
}

impl fmt::Display for Corner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Corner::CommCentric => "C-C",
            Corner::SensingCentric => "S-C",
        })
    }
}

/// A boundary sample with the parameters that produced it. ISAC regions use
/// only `param_a` (ε or ς); FDSAC uses `(κ, ι)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub pair: RatePair,
    pub param_a: f64,
    pub param_b: f64,
}

/// Down-closed SR-CR region described by its sampled upper boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRegion {
    /// Sorted by increasing CR; SR is non-increasing along it.
    pub boundary: Vec<RegionPoint>,
    pub corners: Vec<(Corner, RatePair)>,
}

/// Default relative slack for region membership.
pub const REGION_REL_TOL: f64 = 1e-9;

impl RateRegion {
    /// Builds a region from samples already on the Pareto boundary, sorting
    /// them by CR.
    pub fn from_boundary(mut boundary: Vec<RegionPoint>, corners: Vec<(Corner, RatePair)>) -> Self {
        boundary.sort_by(|a, b| a.pair.cr.total_cmp(&b.pair.cr).then(b.pair.sr.total_cmp(&a.pair.sr)));
        Self { boundary, corners }
    }

    /// Keeps only the Pareto-optimal samples of an arbitrary point cloud.
    pub fn from_cloud(points: Vec<RegionPoint>, corners: Vec<(Corner, RatePair)>) -> Self {
        Self { boundary: pareto_frontier(points), corners }
    }

    pub fn max_cr(&self) -> f64 {
        self.boundary.last().map_or(f64::NEG_INFINITY, |p| p.pair.cr)
    }

    pub fn max_sr(&self) -> f64 {
        self.boundary.iter().map(|p| p.pair.sr).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest SR in the region at communication rate `cr`, interpolating
    /// linearly between boundary samples. `None` past the largest CR.
    pub fn sr_envelope(&self, cr: f64) -> Option<f64> {
        let b = &self.boundary;
        let first = b.first()?;
        if cr <= first.pair.cr {
            return Some(self.max_sr());
        }
        for w in b.windows(2) {
            let (p, q) = (w[0].pair, w[1].pair);
            if cr <= q.cr {
                let span = q.cr - p.cr;
                let t = if span > 0.0 { (cr - p.cr) / span } else { 1.0 };
                return Some(p.sr + t * (q.sr - p.sr));
            }
        }
        None
    }

    /// Whether `p` lies in the region up to relative slack `rel_tol`.
    pub fn contains(&self, p: RatePair, rel_tol: f64) -> bool {
        let slack_cr = rel_tol * self.max_cr().abs().max(1.0);
        let slack_sr = rel_tol * self.max_sr().abs().max(1.0);
        if p.cr > self.max_cr() + slack_cr {
            return false;
        }
        match self.sr_envelope(p.cr.min(self.max_cr())) {
            Some(env) => p.sr <= env + slack_sr,
            None => false,
        }
    }

    /// Boundary dominance: every boundary sample of `other` lies in `self`.
    pub fn contains_region(&self, other: &RateRegion, rel_tol: f64) -> bool {
        other.boundary.iter().all(|p| self.contains(p.pair, rel_tol))
    }
}

/// Pareto frontier of a point cloud, sorted by increasing CR with SR
/// strictly decreasing.
pub fn pareto_frontier(mut points: Vec<RegionPoint>) -> Vec<RegionPoint> {
    points.sort_by(|a, b| b.pair.cr.total_cmp(&a.pair.cr).then(b.pair.sr.total_cmp(&a.pair.sr)));
    let mut out: Vec<RegionPoint> = Vec::new();
    let mut best_sr = f64::NEG_INFINITY;
    for p in points {
        if p.pair.sr > best_sr {
            best_sr = p.pair.sr;
            out.push(p);
        }
    }
    out.reverse();
    out
}

fn uniform(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

fn check_grid(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("region grid needs at least 2 samples, got {n}")));
    }
    Ok(())
}

/// Downlink Pareto boundary over `grid_n` uniform ε samples in `[0, 1]`.
pub fn dl_region(m: &RateModel, ch: &ChannelState, grid_n: usize) -> Result<RateRegion> {
    check_grid(grid_n)?;
    let geo = dl_geometry(ch)?;
    let boundary = uniform(grid_n)
        .into_par_iter()
        .map(|eps| {
            dl_pair_from_weights(m, ch, &geo, eps, true).map(|pair| RegionPoint { pair, param_a: eps, param_b: f64::NAN })
        })
        .collect::<Result<Vec<_>>>()?;
    let corners = vec![
        (Corner::CommCentric, boundary[grid_n - 1].pair),
        (Corner::SensingCentric, boundary[0].pair),
    ];
    Ok(RateRegion::from_boundary(boundary, corners))
}

/// Uplink time-sharing boundary over `grid_n` uniform ς samples in `[0, 1]`.
pub fn ul_region(m: &RateModel, ch: &ChannelState, grid_n: usize) -> Result<RateRegion> {
    check_grid(grid_n)?;
    let boundary = uniform(grid_n)
        .into_par_iter()
        .map(|s| ul_timeshare_pair(m, ch, s).map(|pair| RegionPoint { pair, param_a: s, param_b: f64::NAN }))
        .collect::<Result<Vec<_>>>()?;
    let corners = vec![
        (Corner::CommCentric, boundary[0].pair),
        (Corner::SensingCentric, boundary[grid_n - 1].pair),
    ];
    Ok(RateRegion::from_boundary(boundary, corners))
}
