//! Baselines: spatially discrete arrays (SPDA) and frequency-division
//! sensing and communication (FDSAC).
//!
//! SPDA replaces each aperture by half-wavelength-spaced point elements of
//! area `λ²/4π`. The kernel is sampled at element centres and power is
//! weighted by the element area, so every channel inner product becomes a
//! finite sum and the CAPA rate formulas apply unchanged.
//!
//! FDSAC gives sensing a fraction `κ` of the bandwidth and, on the downlink,
//! a fraction `ι` of the power.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelGains, ChannelState, Correlation, Kernel};
use crate::error::{Error, Result};
use crate::rates::{comm_rate, sensing_rate, Corner, IsacRates, RateModel, RatePair, RateRegion, RegionPoint};
use crate::scene::{ApertureId, Endpoint, Scene};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpdaArray {
    pub aperture: ApertureId,
    pub spacing: f64,
    pub element_area: f64,
    pub nx: usize,
    pub nz: usize,
    /// `(x, z)` of each element, x-major.
    pub centers: Vec<(f64, f64)>,
}

impl SpdaArray {
    /// Half-wavelength spacing, elements of area `λ²/4π`.
    pub fn build(scene: &Scene, aperture: ApertureId) -> Result<Self> {
        let lambda = scene.lambda();
        Self::with_geometry(scene, aperture, lambda / 2.0, lambda * lambda / (4.0 * PI))
    }

    pub fn with_geometry(scene: &Scene, aperture: ApertureId, spacing: f64, element_area: f64) -> Result<Self> {
        if !(spacing > 0.0 && element_area > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "spacing and element area must be positive, got {spacing} and {element_area}"
            )));
        }
        // The small slack keeps exact multiples such as 0.5 / 0.0625 from
        // flooring down through rounding.
        let count = |side: f64| (side / spacing * (1.0 + 1e-12)).floor() as usize;
        let (nx, nz) = (count(scene.lx()), count(scene.lz()));
        if nx == 0 || nz == 0 {
            return Err(Error::EmptyArray(format!(
                "{}: {} x {} m aperture holds no element at spacing {} m",
                aperture,
                scene.lx(),
                scene.lz(),
                spacing
            )));
        }
        let x_offset = aperture.x_range(scene.lx()).0;
        let mut centers = Vec::with_capacity(nx * nz);
        for ix in 1..=nx {
            let x = (2 * ix - 1) as f64 / 2.0 * spacing + x_offset;
            for iz in 1..=nz {
                centers.push((x, (2 * iz - 1) as f64 / 2.0 * spacing - scene.lz() / 2.0));
            }
        }
        Ok(Self { aperture, spacing, element_area, nx, nz, centers })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// `A_s Σ |ĥ(center)|²`.
pub fn spda_gain(scene: &Scene, array: &SpdaArray, endpoint: Endpoint) -> f64 {
    let k = Kernel::new(scene, endpoint);
    array.element_area * array.centers.iter().map(|&(x, z)| k.power(x, z)).sum::<f64>()
}

/// `A_s Σ ĥ_c*(center) ĥ_s(center)`.
pub fn spda_rho(scene: &Scene, array: &SpdaArray) -> Complex64 {
    let c = Kernel::new(scene, Endpoint::Cu);
    let s = Kernel::new(scene, Endpoint::Target);
    array.element_area * array.centers.iter().map(|&(x, z)| c.eval(x, z).conj() * s.eval(x, z)).sum::<Complex64>()
}

/// Gains and correlations of the discrete arrays, ready for the CAPA rate formulas.
pub fn spda_channel_state(scene: &Scene) -> Result<ChannelState> {
    let tx = SpdaArray::build(scene, ApertureId::TransmitCapa)?;
    let rx = SpdaArray::build(scene, ApertureId::ReceiveCapa)?;
    Ok(spda_channel_state_for(scene, &tx, &rx))
}

pub fn spda_channel_state_for(scene: &Scene, tx: &SpdaArray, rx: &SpdaArray) -> ChannelState {
    ChannelState {
        gains: ChannelGains {
            g_d: spda_gain(scene, tx, Endpoint::Cu),
            g_t: spda_gain(scene, tx, Endpoint::Target),
            g_r: spda_gain(scene, rx, Endpoint::Target),
            g_u: spda_gain(scene, rx, Endpoint::Cu),
        },
        corr: Correlation { rho_d: spda_rho(scene, tx), rho_u: spda_rho(scene, rx) },
    }
}

pub fn spda_rates(scene: &Scene) -> Result<IsacRates> {
    Ok(IsacRates::compute(&RateModel::from_scene(scene), &spda_channel_state(scene)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdsacSplit {
    /// Bandwidth fraction given to sensing.
    pub kappa: f64,
    /// Power fraction given to sensing (downlink only).
    pub iota: f64,
}

impl FdsacSplit {
    pub fn new(kappa: f64, iota: f64) -> Result<Self> {
        for (name, v) in [("kappa", kappa), ("iota", iota)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(Self { kappa, iota })
    }
}

impl Default for FdsacSplit {
    fn default() -> Self {
        Self { kappa: 0.5, iota: 0.5 }
    }
}

/// `κ/L · log2(1 + (ι/κ) L x)`, zero for `κ = 0`.
fn split_sensing_rate(kappa: f64, power_share: f64, x: f64, frame_len: u32) -> f64 {
    if kappa == 0.0 {
        0.0
    } else {
        kappa * sensing_rate(power_share / kappa * x, frame_len)
    }
}

/// `(1 − κ) log2(1 + (1 − ι)/(1 − κ) · y)`, zero for `κ = 1`.
fn split_comm_rate(kappa: f64, power_share: f64, y: f64) -> f64 {
    if kappa == 1.0 {
        0.0
    } else {
        (1.0 - kappa) * comm_rate(power_share / (1.0 - kappa) * y)
    }
}

pub fn fdsac_dl(m: &RateModel, g: &ChannelGains, split: FdsacSplit) -> RatePair {
    let s = &m.snrs;
    RatePair {
        sr: split_sensing_rate(split.kappa, split.iota, s.gamma_bar_s * g.g_t * g.g_r, m.frame_len),
        cr: split_comm_rate(split.kappa, 1.0 - split.iota, s.gamma_bar_c * g.g_d),
    }
}

/// Uplink FDSAC: each user keeps its full power on its own band.
pub fn fdsac_ul(m: &RateModel, g: &ChannelGains, kappa: f64) -> Result<RatePair> {
    FdsacSplit::new(kappa, 0.0)?;
    let s = &m.snrs;
    Ok(RatePair {
        sr: split_sensing_rate(kappa, 1.0, s.gamma_tilde_s * g.g_t * g.g_r, m.frame_len),
        cr: split_comm_rate(kappa, 1.0, s.gamma_tilde_c * g.g_u),
    })
}

/// Default `(κ, ι)` grid size per axis for the downlink FDSAC region.
pub const DEFAULT_FDSAC_GRID: usize = 41;

fn uniform(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

/// Pareto frontier of FDSAC pairs over a `grid_n × grid_n` `(κ, ι)` grid.
pub fn fdsac_dl_region(m: &RateModel, g: &ChannelGains, grid_n: usize) -> Result<RateRegion> {
    if grid_n < 2 {
        return Err(Error::InvalidParameter(format!("FDSAC grid needs at least 2 samples, got {grid_n}")));
    }
    let axis = uniform(grid_n);
    let cloud: Vec<RegionPoint> = axis
        .par_iter()
        .flat_map_iter(|&kappa| {
            axis.iter().map(move |&iota| RegionPoint {
                pair: fdsac_dl(m, g, FdsacSplit { kappa, iota }),
                param_a: kappa,
                param_b: iota,
            })
        })
        .collect();
    let corners = vec![
        (Corner::CommCentric, fdsac_dl(m, g, FdsacSplit { kappa: 0.0, iota: 0.0 })),
        (Corner::SensingCentric, fdsac_dl(m, g, FdsacSplit { kappa: 1.0, iota: 1.0 })),
    ];
    Ok(RateRegion::from_cloud(cloud, corners))
}

/// Pareto frontier of uplink FDSAC pairs over `grid_n` uniform `κ` samples.
pub fn fdsac_ul_region(m: &RateModel, g: &ChannelGains, grid_n: usize) -> Result<RateRegion> {
    if grid_n < 2 {
        return Err(Error::InvalidParameter(format!("FDSAC grid needs at least 2 samples, got {grid_n}")));
    }
    let cloud = uniform(grid_n)
        .into_iter()
        .map(|kappa| fdsac_ul(m, g, kappa).map(|pair| RegionPoint { pair, param_a: kappa, param_b: f64::NAN }))
        .collect::<Result<Vec<_>>>()?;
    let corners = vec![(Corner::CommCentric, fdsac_ul(m, g, 0.0)?), (Corner::SensingCentric, fdsac_ul(m, g, 1.0)?)];
    Ok(RateRegion::from_cloud(cloud, corners))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::gain_closed;
    use crate::channel::GainKind;
    use crate::quadrature::QuadratureSpec;
    use crate::rates::{dl_region, ul_region, REGION_REL_TOL};
    use crate::scene::{default_scene, SceneParams};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn capa(scene: &Scene) -> (RateModel, ChannelState) {
        (RateModel::from_scene(scene), ChannelState::evaluate(scene, &QuadratureSpec::default()))
    }

    #[test]
    fn default_array_layout() {
        let scene = default_scene();
        let tx = SpdaArray::build(&scene, ApertureId::TransmitCapa).unwrap();
        assert_eq!((tx.nx, tx.nz, tx.len()), (8, 8, 64));
        assert_eq!(tx.spacing, 0.0625);
        assert_eq!(tx.centers[0], (0.03125, -0.21875));
        let rx = SpdaArray::build(&scene, ApertureId::ReceiveCapa).unwrap();
        assert_eq!(rx.centers[0], (0.03125 - 0.5, -0.21875));
        assert!(rx.centers.iter().all(|&(x, _)| (-0.5..0.0).contains(&x)));
    }

    #[test]
    fn small_and_empty_arrays() {
        let scene = default_scene().with_aperture_side(0.1).unwrap();
        let a = SpdaArray::build(&scene, ApertureId::TransmitCapa).unwrap();
        assert_eq!(a.len(), 1);
        let (x, z) = a.centers[0];
        let k = Kernel::new(&scene, Endpoint::Cu);
        assert_eq!(spda_gain(&scene, &a, Endpoint::Cu), a.element_area * k.power(x, z));
        let scene = default_scene().with_aperture_side(0.05).unwrap();
        assert!(matches!(SpdaArray::build(&scene, ApertureId::ReceiveCapa), Err(Error::EmptyArray(_))));
        assert!(spda_channel_state(&scene).is_err());
    }

    #[test]
    fn spda_gains_below_capa_at_defaults() {
        let scene = default_scene();
        let s = spda_channel_state(&scene).unwrap();
        for kind in GainKind::ALL {
            assert!(s.gains.get(kind) < gain_closed(&scene, kind));
        }
        assert!(s.corr.rho_d.norm_sqr() <= s.gains.g_d * s.gains.g_t);
        assert!(s.corr.rho_u.norm_sqr() <= s.gains.g_u * s.gains.g_r);
    }

    #[test]
    fn coincident_endpoints() {
        let params = SceneParams { target: SceneParams::default().cu, ..SceneParams::default() };
        let scene = Scene::new(params).unwrap();
        let s = spda_channel_state(&scene).unwrap();
        assert!(rel(s.corr.rho_d.re, s.gains.g_d) < 1e-13);
        assert!(s.corr.rho_d.im.abs() < 1e-13 * s.gains.g_d);
        assert_eq!(s.gains.g_d, s.gains.g_t);
    }

    #[test]
    fn shrinking_elements_converge_to_capa() {
        let scene = default_scene();
        let capa_state = capa(&scene).1;
        let m = RateModel::from_scene(&scene);
        let capa_rates = IsacRates::compute(&m, &capa_state);
        let mut prev_gain_err = f64::INFINITY;
        let mut prev_rate_err = f64::INFINITY;
        let mut d = scene.lambda() / 2.0;
        for _ in 0..4 {
            let tx = SpdaArray::with_geometry(&scene, ApertureId::TransmitCapa, d, d * d).unwrap();
            let rx = SpdaArray::with_geometry(&scene, ApertureId::ReceiveCapa, d, d * d).unwrap();
            let s = spda_channel_state_for(&scene, &tx, &rx);
            let gain_err = GainKind::ALL
                .iter()
                .map(|&k| rel(s.gains.get(k), capa_state.gains.get(k)))
                .fold(0.0, f64::max);
            let r = IsacRates::compute(&m, &s);
            let rate_err = r
                .labeled()
                .iter()
                .zip(capa_rates.labeled().iter())
                .map(|((_, a), (_, b))| rel(*a, *b))
                .fold(0.0, f64::max);
            assert!(gain_err < 0.01, "d = {d}: {gain_err}");
            assert!(gain_err < prev_gain_err && rate_err < prev_rate_err);
            prev_gain_err = gain_err;
            prev_rate_err = rate_err;
            d /= 2.0;
        }
    }

    #[test]
    fn spda_rates_below_capa_and_regions_nested() {
        let scene = default_scene();
        let (m, ch) = capa(&scene);
        let c = IsacRates::compute(&m, &ch);
        let s = spda_rates(&scene).unwrap();
        for ((name, a), (_, b)) in s.labeled().iter().zip(c.labeled().iter()) {
            assert!(a <= b, "{name}: spda {a} > capa {b}");
        }
        let spda = spda_channel_state(&scene).unwrap();
        assert!(dl_region(&m, &ch, 101).unwrap().contains_region(&dl_region(&m, &spda, 101).unwrap(), REGION_REL_TOL));
        assert!(ul_region(&m, &ch, 101).unwrap().contains_region(&ul_region(&m, &spda, 101).unwrap(), REGION_REL_TOL));
    }

    #[test]
    fn fdsac_limits_recover_isac_corners() {
        let scene = default_scene();
        let (m, ch) = capa(&scene);
        let r = IsacRates::compute(&m, &ch);
        let g = &ch.gains;
        let p = fdsac_dl(&m, g, FdsacSplit::new(1.0, 1.0).unwrap());
        assert_eq!(p.cr, 0.0);
        assert!(rel(p.sr, r.dl_sc_sr) < 1e-12);
        let p = fdsac_dl(&m, g, FdsacSplit::new(0.0, 0.0).unwrap());
        assert_eq!(p.sr, 0.0);
        assert!(rel(p.cr, r.dl_cc_cr) < 1e-12);
        let p = fdsac_ul(&m, g, 1.0).unwrap();
        assert!(p.cr == 0.0 && rel(p.sr, r.ul_sc_sr) < 1e-12);
        let p = fdsac_ul(&m, g, 0.0).unwrap();
        assert!(p.sr == 0.0 && rel(p.cr, r.ul_cc_cr) < 1e-12);
        assert!(FdsacSplit::new(1.2, 0.0).is_err());
        assert!(fdsac_ul(&m, g, -0.5).is_err());
    }

    #[test]
    fn fdsac_regions_inside_isac_regions() {
        let scene = default_scene();
        let (m, ch) = capa(&scene);
        let fd = fdsac_dl_region(&m, &ch.gains, DEFAULT_FDSAC_GRID).unwrap();
        for w in fd.boundary.windows(2) {
            assert!(w[1].pair.cr > w[0].pair.cr && w[1].pair.sr < w[0].pair.sr);
        }
        assert!(dl_region(&m, &ch, 101).unwrap().contains_region(&fd, REGION_REL_TOL));
        let fu = fdsac_ul_region(&m, &ch.gains, 101).unwrap();
        assert!(ul_region(&m, &ch, 101).unwrap().contains_region(&fu, REGION_REL_TOL));
        let corner_only = fdsac_dl_region(&m, &ch.gains, 2).unwrap();
        assert_eq!(corner_only.boundary.len(), 2);
    }

    #[test]
    fn fdsac_uplink_cr_concave_and_bounded() {
        let scene = default_scene();
        let (m, ch) = capa(&scene);
        let r = IsacRates::compute(&m, &ch);
        let cr: Vec<f64> = (0..=50).map(|k| fdsac_ul(&m, &ch.gains, k as f64 / 50.0).unwrap().cr).collect();
        for w in cr.windows(3) {
            assert!(w[0] + w[2] <= 2.0 * w[1] + 1e-12);
        }
        for k in 0..=50 {
            let p = fdsac_ul(&m, &ch.gains, k as f64 / 50.0).unwrap();
            assert!(p.cr <= r.ul_cc_cr * (1.0 + 1e-12) && p.sr <= r.ul_sc_sr * (1.0 + 1e-12));
        }
    }
}
