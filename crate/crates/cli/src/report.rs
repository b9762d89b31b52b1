//! CSV renderers for the `rates`, `sweep`, `region` and `dump-kernel` commands.

use std::fmt::Write as _;

use capa_isac::baselines::{self, FdsacSplit, DEFAULT_FDSAC_GRID};
use capa_isac::rates::{RateRegion, REGION_REL_TOL};
use capa_isac::scene::config::db_to_linear;
use capa_isac::{
    dl_region, ul_region, ApertureId, ChannelState, Endpoint, IsacRates, QuadratureSpec, RateModel, RatePair, Scene,
};
use rayon::prelude::*;

use crate::{CliError, CliResult};

/// 12 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// All four link SNRs set to the sweep value in dB.
    SnrDb,
    /// Square aperture with the sweep value as side length in metres.
    ApertureSideM,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, start: f64, stop: f64, steps: usize) -> CliResult<Self> {
        if steps < 2 {
            return Err(CliError::Usage(format!("--steps must be at least 2, got {steps}")));
        }
        if !(start.is_finite() && stop.is_finite() && start < stop) {
            return Err(CliError::Usage(format!("need --start < --stop, got {start} and {stop}")));
        }
        if axis == SweepAxis::ApertureSideM && start <= 0.0 {
            return Err(CliError::Usage(format!("aperture side must be positive, got {start}")));
        }
        Ok(Self { axis, start, stop, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps)
            .map(|k| self.start + (self.stop - self.start) * k as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

/// Rate columns of a sweep row, in output order.
pub const SWEEP_COLUMNS: [&str; 22] = [
    "dl_capa_cc_cr",
    "dl_capa_sc_cr",
    "dl_capa_cc_sr",
    "dl_capa_sc_sr",
    "dl_spda_cc_cr",
    "dl_spda_sc_cr",
    "dl_spda_cc_sr",
    "dl_spda_sc_sr",
    "dl_fdsac_cr",
    "dl_fdsac_sr",
    "ul_capa_cc_cr",
    "ul_capa_sc_cr",
    "ul_capa_cc_sr",
    "ul_capa_sc_sr",
    "ul_spda_cc_cr",
    "ul_spda_sc_cr",
    "ul_spda_cc_sr",
    "ul_spda_sc_sr",
    "ul_fdsac_cr",
    "ul_fdsac_sr",
    "ul_capa_sum_cc",
    "ul_capa_sum_sc",
];

/// Every rate reported for one scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneReport {
    pub capa: IsacRates,
    /// `None` when the aperture is smaller than one element.
    pub spda: Option<IsacRates>,
    pub fdsac_dl: RatePair,
    pub fdsac_ul: RatePair,
}

impl SceneReport {
    pub fn compute(scene: &Scene, spec: &QuadratureSpec) -> CliResult<Self> {
        Self::with_channels(scene, &ChannelState::evaluate(scene, spec))
    }

    /// Reuses already evaluated CAPA channels.
    pub fn with_channels(scene: &Scene, capa_ch: &ChannelState) -> CliResult<Self> {
        let m = RateModel::from_scene(scene);
        let spda = match baselines::spda_channel_state(scene) {
            Ok(ch) => Some(IsacRates::compute(&m, &ch)),
            Err(capa_isac::Error::EmptyArray(_)) => None,
            Err(e) => return Err(e.into()),
        };
        let split = FdsacSplit::default();
        Ok(Self {
            capa: IsacRates::compute(&m, capa_ch),
            spda,
            fdsac_dl: baselines::fdsac_dl(&m, &capa_ch.gains, split),
            fdsac_ul: baselines::fdsac_ul(&m, &capa_ch.gains, split.kappa)?,
        })
    }

    pub fn row(&self) -> [f64; 22] {
        let c = &self.capa;
        let s = self.spda.unwrap_or(IsacRates {
            dl_cc_cr: f64::NAN,
            dl_sc_cr: f64::NAN,
            dl_cc_sr: f64::NAN,
            dl_sc_sr: f64::NAN,
            ul_cc_cr: f64::NAN,
            ul_sc_cr: f64::NAN,
            ul_cc_sr: f64::NAN,
            ul_sc_sr: f64::NAN,
        });
        [
            c.dl_cc_cr,
            c.dl_sc_cr,
            c.dl_cc_sr,
            c.dl_sc_sr,
            s.dl_cc_cr,
            s.dl_sc_cr,
            s.dl_cc_sr,
            s.dl_sc_sr,
            self.fdsac_dl.cr,
            self.fdsac_dl.sr,
            c.ul_cc_cr,
            c.ul_sc_cr,
            c.ul_cc_sr,
            c.ul_sc_sr,
            s.ul_cc_cr,
            s.ul_sc_cr,
            s.ul_cc_sr,
            s.ul_sc_sr,
            self.fdsac_ul.cr,
            self.fdsac_ul.sr,
            c.ul_sum_cc(),
            c.ul_sum_sc(),
        ]
    }
}

/// `name,value` CSV for one scene.
pub fn rates_csv(scene: &Scene, spec: &QuadratureSpec) -> CliResult<String> {
    let report = SceneReport::compute(scene, spec)?;
    let mut out = String::from("name,value\n");
    for (name, v) in SWEEP_COLUMNS.iter().zip(report.row()) {
        let _ = writeln!(out, "{name},{}", num(v));
    }
    let _ = writeln!(out, "ul_capa_corner_gap,{}", num(report.capa.ul_corner_gap()));
    Ok(out)
}

/// Aligned plain-text table of the same numbers as [`rates_csv`].
pub fn rates_table(scene: &Scene, spec: &QuadratureSpec) -> CliResult<String> {
    let report = SceneReport::compute(scene, spec)?;
    let mut out = String::new();
    let _ = writeln!(out, "{:<8} {:<6} {:>12} {:>12} {:>12} {:>12}", "link", "array", "C-C CR", "S-C CR", "C-C SR", "S-C SR");
    let rows = [("capa", Some(report.capa)), ("spda", report.spda)];
    for link in ["dl", "ul"] {
        for (array, r) in rows {
            let vals = match r {
                Some(r) if link == "dl" => [r.dl_cc_cr, r.dl_sc_cr, r.dl_cc_sr, r.dl_sc_sr],
                Some(r) => [r.ul_cc_cr, r.ul_sc_cr, r.ul_cc_sr, r.ul_sc_sr],
                None => [f64::NAN; 4],
            };
            let _ = writeln!(
                out,
                "{:<8} {:<6} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
                link, array, vals[0], vals[1], vals[2], vals[3]
            );
        }
    }
    let _ = writeln!(out, "fdsac dl (kappa = iota = 0.5): CR {:.6}  SR {:.6}", report.fdsac_dl.cr, report.fdsac_dl.sr);
    let _ = writeln!(out, "fdsac ul (kappa = 0.5):        CR {:.6}  SR {:.6}", report.fdsac_ul.cr, report.fdsac_ul.sr);
    let _ = writeln!(
        out,
        "ul sums: C-C {:.6}  S-C {:.6}  corner gap {:.6}",
        report.capa.ul_sum_cc(),
        report.capa.ul_sum_sc(),
        report.capa.ul_corner_gap()
    );
    Ok(out)
}

/// One row per sweep point. Sweep points run in parallel; rows keep their order.
pub fn sweep_csv(scene: &Scene, sweep: &SweepSpec, spec: &QuadratureSpec) -> CliResult<String> {
    let x_name = match sweep.axis {
        SweepAxis::SnrDb => "snr_db",
        SweepAxis::ApertureSideM => "aperture_m2",
    };
    // SNRs do not touch the channels, so an SNR sweep evaluates them once.
    let fixed_channels = match sweep.axis {
        SweepAxis::SnrDb => Some(ChannelState::evaluate(scene, spec)),
        SweepAxis::ApertureSideM => None,
    };
    let rows = sweep
        .values()
        .into_par_iter()
        .map(|v| -> CliResult<(f64, [f64; 22])> {
            let (x, point) = match sweep.axis {
                SweepAxis::SnrDb => (v, scene.with_all_snrs(db_to_linear(v))?),
                SweepAxis::ApertureSideM => (v * v, scene.with_aperture_side(v)?),
            };
            let report = match &fixed_channels {
                Some(ch) => SceneReport::with_channels(&point, ch)?,
                None => SceneReport::compute(&point, spec)?,
            };
            Ok((x, report.row()))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut out = String::from(x_name);
    for c in SWEEP_COLUMNS {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (x, row) in rows {
        out.push_str(&num(x));
        for v in row {
            out.push(',');
            out.push_str(&num(v));
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Downlink,
    Uplink,
}

/// The three boundaries of one link direction.
#[derive(Debug, Clone)]
pub struct RegionSet {
    pub capa: RateRegion,
    pub spda: Option<RateRegion>,
    pub fdsac: RateRegion,
    pub capa_rates: IsacRates,
}

impl RegionSet {
    pub fn compute(scene: &Scene, link: Link, grid_n: usize, fdsac_grid: usize, spec: &QuadratureSpec) -> CliResult<Self> {
        let m = RateModel::from_scene(scene);
        let ch = ChannelState::evaluate(scene, spec);
        let spda_ch = match baselines::spda_channel_state(scene) {
            Ok(c) => Some(c),
            Err(capa_isac::Error::EmptyArray(_)) => None,
            Err(e) => return Err(e.into()),
        };
        let (capa, spda, fdsac) = match link {
            Link::Downlink => (
                dl_region(&m, &ch, grid_n)?,
                spda_ch.as_ref().map(|c| dl_region(&m, c, grid_n)).transpose()?,
                baselines::fdsac_dl_region(&m, &ch.gains, fdsac_grid)?,
            ),
            Link::Uplink => (
                ul_region(&m, &ch, grid_n)?,
                spda_ch.as_ref().map(|c| ul_region(&m, c, grid_n)).transpose()?,
                baselines::fdsac_ul_region(&m, &ch.gains, fdsac_grid)?,
            ),
        };
        Ok(Self { capa, spda, fdsac, capa_rates: IsacRates::compute(&m, &ch) })
    }

    pub fn spda_inside(&self) -> Option<bool> {
        self.spda.as_ref().map(|s| self.capa.contains_region(s, REGION_REL_TOL))
    }

    pub fn fdsac_inside(&self) -> bool {
        self.capa.contains_region(&self.fdsac, REGION_REL_TOL)
    }
}

/// Default FDSAC grid for a link: `(κ, ι)` per axis on the downlink, `κ` samples on the uplink.
pub fn default_fdsac_grid(link: Link) -> usize {
    match link {
        Link::Downlink => DEFAULT_FDSAC_GRID,
        Link::Uplink => capa_isac::rates::DEFAULT_REGION_GRID,
    }
}

pub fn region_csv(scene: &Scene, link: Link, grid_n: usize, fdsac_grid: usize, spec: &QuadratureSpec) -> CliResult<String> {
    let set = RegionSet::compute(scene, link, grid_n, fdsac_grid, spec)?;
    let mut out = String::from("series,index,param_a,param_b,sr,cr\n");
    let mut series = |name: &str, region: &RateRegion| {
        for (i, p) in region.boundary.iter().enumerate() {
            let _ = writeln!(
                out,
                "{name},{i},{},{},{},{}",
                num(p.param_a),
                num(p.param_b),
                num(p.pair.sr),
                num(p.pair.cr)
            );
        }
    };
    series("capa", &set.capa);
    if let Some(s) = &set.spda {
        series("spda", s);
    }
    series("fdsac", &set.fdsac);
    let verdict = |v: Option<bool>| v.map_or_else(|| "n/a (empty array)".to_string(), |b| b.to_string());
    let _ = writeln!(out, "# SPDA ⊆ CAPA: {}", verdict(set.spda_inside()));
    let _ = writeln!(out, "# FDSAC ⊆ CAPA: {}", set.fdsac_inside());
    for (corner, pair) in &set.capa.corners {
        let _ = writeln!(out, "# CAPA {corner} corner: sr={} cr={}", num(pair.sr), num(pair.cr));
    }
    if link == Link::Uplink {
        let r = &set.capa_rates;
        let _ = writeln!(out, "# uplink corner gap: {}", num(r.ul_corner_gap()));
        let _ = writeln!(out, "# uplink SR+CR: C-C {} S-C {}", num(r.ul_sum_cc()), num(r.ul_sum_sc()));
    }
    Ok(out)
}

/// Kernel samples on an `n × n` grid over each aperture.
pub fn dump_kernel_csv(scene: &Scene, n: usize) -> CliResult<String> {
    if n < 2 {
        return Err(CliError::Usage(format!("--grid must be at least 2, got {n}")));
    }
    let mut out = String::from("aperture,endpoint,x_m,z_m,re,im,abs2\n");
    for aperture in [ApertureId::TransmitCapa, ApertureId::ReceiveCapa] {
        let (x0, x1) = aperture.x_range(scene.lx());
        let (z0, z1) = ApertureId::z_range(scene.lz());
        for endpoint in [Endpoint::Cu, Endpoint::Target] {
            for i in 0..n {
                let x = x0 + (x1 - x0) * i as f64 / (n - 1) as f64;
                for j in 0..n {
                    let z = z0 + (z1 - z0) * j as f64 / (n - 1) as f64;
                    let h = capa_isac::green_kernel(scene, endpoint, x, z);
                    let _ = writeln!(
                        out,
                        "{aperture},{endpoint},{},{},{},{},{}",
                        num(x),
                        num(z),
                        num(h.re),
                        num(h.im),
                        num(h.norm_sqr())
                    );
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_has_twelve_significant_digits() {
        assert_eq!(num(1.0), "1.00000000000e0");
        assert_eq!(num(-1234.5678901234), "-1.23456789012e3");
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn rejects_invalid_sweeps() {
        assert!(SweepSpec::new(SweepAxis::SnrDb, 0.0, 30.0, 1).is_err());
        assert!(SweepSpec::new(SweepAxis::SnrDb, 3.0, 1.0, 5).is_err());
        assert!(SweepSpec::new(SweepAxis::ApertureSideM, 0.0, 0.5, 5).is_err());
        let s = SweepSpec::new(SweepAxis::SnrDb, 0.0, 30.0, 31).unwrap();
        assert_eq!(s.values()[10], 10.0);
    }

    #[test]
    fn empty_spda_gives_nan_columns() {
        let scene = capa_isac::default_scene().with_aperture_side(0.05).unwrap();
        let spec = QuadratureSpec { cheby_n: 100, ..QuadratureSpec::default() };
        let row = SceneReport::compute(&scene, &spec).unwrap().row();
        assert!(row[4].is_nan() && row[17].is_nan());
        assert!(row[0].is_finite());
    }

    #[test]
    fn region_csv_with_grid_two_has_two_corner_rows() {
        let scene = capa_isac::default_scene();
        let spec = QuadratureSpec { cheby_n: 100, ..QuadratureSpec::default() };
        for link in [Link::Downlink, Link::Uplink] {
            let csv = region_csv(&scene, link, 2, 2, &spec).unwrap();
            assert_eq!(csv.lines().filter(|l| l.starts_with("capa,")).count(), 2);
        }
    }

    #[test]
    fn dump_kernel_shape() {
        let csv = dump_kernel_csv(&capa_isac::default_scene(), 3).unwrap();
        assert_eq!(csv.lines().count(), 1 + 2 * 2 * 9);
        assert!(dump_kernel_csv(&capa_isac::default_scene(), 1).is_err());
    }
}
