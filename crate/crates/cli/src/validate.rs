//! Oracle-equivalence and invariant checks behind the `validate` command.

use std::fmt::{self, Write as _};
use std::time::Instant;

use capa_isac::channel::{gain_closed, gain_oracle, rho_chebyshev, rho_oracle, CorrelationKind, GainKind};
use capa_isac::rates::{self, dl_geometry, sensing_rate, REGION_REL_TOL};
use capa_isac::subspace::{pareto_objective, rayleigh_pencil_oracle};
use capa_isac::{
    achieved_gammas, baselines, dl_pareto_pair, dl_region, kkt_pareto, pareto_grid_oracle, random_scene, rayleigh_max,
    ul_region, ul_timeshare_pair, ChannelState, Correlation, FdsacSplit, IsacRates, QuadratureSpec, RateModel, RatePair,
    Regime, Scene,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// Everything except the brute-force Pareto grid search.
    Fast,
    Full,
}

/// Deliberate corruption used to confirm the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Scales the closed-form `g_d` by `1 + 1e-3` before comparing it with the oracle.
    GainPerturbation,
}

#[derive(Debug, Clone, Copy)]
pub struct ValidateOptions {
    pub level: Level,
    pub seed: u64,
    pub fault: Option<Fault>,
    pub spec: QuadratureSpec,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self { level: Level::Fast, seed: 1, fault: None, spec: QuadratureSpec::default() }
    }
}

/// ε values checked against the grid oracle and the KKT identity.
pub const PARETO_EPS: [f64; 3] = [0.3, 0.5, 0.7];
/// Resolution of the coarse Pareto grid search.
pub const PARETO_GRID_N: usize = 2000;
pub const RAYLEIGH_DRAWS: usize = 1000;
/// Chebyshev orders of the self-convergence ladder.
pub const CONVERGENCE_LADDER: [usize; 5] = [50, 100, 200, 400, 800];
pub const FRAME_LENGTHS: [u32; 5] = [1, 2, 4, 8, 16];

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {} ({:.2} s)", self.name, self.detail, self.seconds)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(out, "{c}");
        }
        let _ = writeln!(out, "{} of {} checks passed", self.checks.len() - self.failed(), self.checks.len());
        out
    }

    pub fn into_result(self) -> CliResult<Self> {
        match self.failed() {
            0 => Ok(self),
            failed => Err(CliError::Validation { failed, total: self.checks.len() }),
        }
    }

    fn run(&mut self, name: &'static str, f: impl FnOnce() -> capa_isac::Result<(bool, String)>) {
        let start = Instant::now();
        let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        self.checks.push(Check { name, passed, detail, seconds: start.elapsed().as_secs_f64() });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Absolute difference scaled by `max(1, |b|)`.
fn diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn pair_diff(a: RatePair, b: RatePair) -> f64 {
    diff(a.sr, b.sr).max(diff(a.cr, b.cr))
}

/// Wrapped phase difference in radians.
fn phase_diff(a: Complex64, b: Complex64) -> f64 {
    (a * b.conj()).arg().abs()
}

/// Largest relative gap between closed-form and oracle gains over `scenes`.
pub fn gain_oracle_error(scenes: &[Scene], spec: &QuadratureSpec, fault: Option<Fault>) -> capa_isac::Result<f64> {
    let mut worst = 0.0_f64;
    for scene in scenes {
        for kind in GainKind::ALL {
            let mut closed = gain_closed(scene, kind);
            if fault == Some(Fault::GainPerturbation) && kind == GainKind::Gd {
                closed *= 1.0 + 1e-3;
            }
            worst = worst.max(rel(closed, gain_oracle(scene, kind, spec)?));
        }
    }
    Ok(worst)
}

/// `(modulus error, phase error)` of the Chebyshev correlations, worst over both kinds.
pub fn rho_quadrature_error(scene: &Scene, n: usize, spec: &QuadratureSpec) -> capa_isac::Result<(f64, f64)> {
    let mut worst = (0.0_f64, 0.0_f64);
    for kind in CorrelationKind::ALL {
        let c = rho_chebyshev(scene, kind, n);
        let o = rho_oracle(scene, kind, spec)?;
        worst.0 = worst.0.max(rel(c.norm(), o.norm()));
        worst.1 = worst.1.max(phase_diff(c, o));
    }
    Ok(worst)
}

/// Increments `|ρ(N_{k+1}) − ρ(N_k)|` along the ladder, per correlation kind.
pub fn self_convergence_increments(scene: &Scene, ladder: &[usize]) -> Vec<(CorrelationKind, Vec<f64>)> {
    CorrelationKind::ALL
        .iter()
        .map(|&kind| {
            let values: Vec<Complex64> = ladder.iter().map(|&n| rho_chebyshev(scene, kind, n)).collect();
            (kind, values.windows(2).map(|w| (w[1] - w[0]).norm()).collect())
        })
        .collect()
}

/// Worst `γ̂_c/ε` vs `γ̂_s/(1 − ε)` mismatch over the interior ε values, and
/// how many of them were interior.
pub fn kkt_identity_error(ch: &ChannelState, eps: &[f64]) -> capa_isac::Result<(f64, usize)> {
    let geo = dl_geometry(ch)?;
    let mut worst = 0.0_f64;
    let mut interior = 0;
    for &e in eps {
        let w = kkt_pareto(e, &geo)?;
        if w.regime == Regime::Interior {
            interior += 1;
            let g = achieved_gammas(&w, &geo);
            worst = worst.max(rel(g.gamma_c_hat / e, g.gamma_s_hat / (1.0 - e)));
        }
    }
    Ok((worst, interior))
}

/// Worst relative gap between the closed-form Pareto objective and the grid search.
pub fn pareto_grid_error(ch: &ChannelState, eps: &[f64], grid_n: usize) -> capa_isac::Result<f64> {
    let geo = dl_geometry(ch)?;
    let mut worst = 0.0_f64;
    for &e in eps {
        let closed = pareto_objective(&achieved_gammas(&kkt_pareto(e, &geo)?, &geo), e);
        let grid = pareto_grid_oracle(e, &geo, grid_n)?;
        worst = worst.max(rel(closed, grid.gamma));
    }
    Ok(worst)
}

/// Worst relative gap between the Rayleigh closed form and the pencil
/// eigenvalue over `draws` admissible inputs.
pub fn rayleigh_error(seed: u64, draws: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..draws {
        let a: f64 = 10f64.powf(rng.gen_range(-3.0..3.0));
        let h: f64 = 10f64.powf(rng.gen_range(-3.0..3.0));
        let frac: f64 = rng.gen_range(0.0..1.0);
        let cross = Complex64::from_polar(frac * (a * h).sqrt(), rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI));
        let s: f64 = 10f64.powf(rng.gen_range(-3.0..3.0));
        worst = worst.max(rel(rayleigh_max(a, h, cross, s), rayleigh_pencil_oracle(a, h, cross, s)));
    }
    worst
}

/// Worst deviation across the endpoint and limit identities.
pub fn endpoint_identity_error(m: &RateModel, ch: &ChannelState) -> capa_isac::Result<f64> {
    let r = IsacRates::compute(m, ch);
    let g = &ch.gains;
    let mut worst = 0.0_f64;
    let mut check = |a: RatePair, b: RatePair| worst = worst.max(pair_diff(a, b));
    check(dl_pareto_pair(m, ch, 0.0)?, RatePair::new(r.dl_sc_sr, r.dl_sc_cr));
    check(dl_pareto_pair(m, ch, 1.0)?, RatePair::new(r.dl_cc_sr, r.dl_cc_cr));
    check(ul_timeshare_pair(m, ch, 0.0)?, RatePair::new(r.ul_cc_sr, r.ul_cc_cr));
    check(ul_timeshare_pair(m, ch, 1.0)?, RatePair::new(r.ul_sc_sr, r.ul_sc_cr));
    check(baselines::fdsac_dl(m, g, FdsacSplit::new(0.0, 0.0)?), RatePair::new(0.0, r.dl_cc_cr));
    check(baselines::fdsac_dl(m, g, FdsacSplit::new(1.0, 1.0)?), RatePair::new(r.dl_sc_sr, 0.0));
    check(baselines::fdsac_ul(m, g, 0.0)?, RatePair::new(0.0, r.ul_cc_cr));
    check(baselines::fdsac_ul(m, g, 1.0)?, RatePair::new(r.ul_sc_sr, 0.0));
    let zero = ChannelState { gains: *g, corr: Correlation { rho_d: Complex64::new(0.0, 0.0), rho_u: Complex64::new(0.0, 0.0) } };
    let z = IsacRates::compute(m, &zero);
    check(RatePair::new(z.ul_cc_sr, z.ul_sc_cr), RatePair::new(z.ul_sc_sr, z.ul_cc_cr));
    Ok(worst)
}

/// Names of SPDA rates that exceed their CAPA counterpart.
pub fn spda_violations(capa: &IsacRates, spda: &IsacRates) -> Vec<&'static str> {
    capa.labeled()
        .iter()
        .zip(spda.labeled())
        .filter(|((_, c), (_, s))| s > c)
        .map(|((name, _), _)| *name)
        .collect()
}

/// `(SPDA ⊆ CAPA, FDSAC ⊆ CAPA)` for downlink and uplink.
pub fn region_containment(scene: &Scene, ch: &ChannelState, grid_n: usize) -> capa_isac::Result<[(bool, bool); 2]> {
    let m = RateModel::from_scene(scene);
    let spda = baselines::spda_channel_state(scene)?;
    let dl = dl_region(&m, ch, grid_n)?;
    let ul = ul_region(&m, ch, grid_n)?;
    Ok([
        (
            dl.contains_region(&dl_region(&m, &spda, grid_n)?, REGION_REL_TOL),
            dl.contains_region(&baselines::fdsac_dl_region(&m, &ch.gains, baselines::DEFAULT_FDSAC_GRID)?, REGION_REL_TOL),
        ),
        (
            ul.contains_region(&ul_region(&m, &spda, grid_n)?, REGION_REL_TOL),
            ul.contains_region(&baselines::fdsac_ul_region(&m, &ch.gains, grid_n)?, REGION_REL_TOL),
        ),
    ])
}

/// Sensing rate at a fixed SNR product for each frame length.
pub fn sr_versus_frame_length(x: f64) -> Vec<f64> {
    FRAME_LENGTHS.iter().map(|&l| sensing_rate(x, l)).collect()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

/// Runs every check for `scene`. Failures are collected, not returned early.
pub fn run(scene: &Scene, opts: &ValidateOptions) -> ValidationReport {
    let spec = &opts.spec;
    let mut report = ValidationReport::default();
    let random_count = match opts.level {
        Level::Fast => 10,
        Level::Full => 100,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let scenes: Vec<Scene> = std::iter::once(*scene).chain((0..random_count).map(|_| random_scene(&mut rng))).collect();

    report.run("gains_vs_oracle", || {
        let err = gain_oracle_error(&scenes, spec, opts.fault)?;
        Ok((err <= 1e-9, format!("{} scenes, max rel err {} (tol 1e-9)", scenes.len(), sci(err))))
    });

    report.run("rho_vs_oracle", || {
        let (m, p) = rho_quadrature_error(scene, spec.cheby_n, spec)?;
        Ok((
            m <= 1e-6 && p <= 1e-6,
            format!("N = {}, modulus err {}, phase err {} rad (tol 1e-6)", spec.cheby_n, sci(m), sci(p)),
        ))
    });

    report.run("rho_self_convergence", || {
        let incs = self_convergence_increments(scene, &CONVERGENCE_LADDER);
        let ok = incs.iter().all(|(_, v)| v.windows(2).all(|w| w[1] <= 0.5 * w[0]));
        let detail = incs
            .iter()
            .map(|(k, v)| format!("{k}: {}", v.iter().map(|x| sci(*x)).collect::<Vec<_>>().join(" ")))
            .collect::<Vec<_>>()
            .join("; ");
        Ok((ok, format!("N = {CONVERGENCE_LADDER:?}, increments {detail}")))
    });

    let ch = ChannelState::evaluate(scene, spec);
    let m = RateModel::from_scene(scene);

    report.run("cauchy_schwarz", || {
        let mut worst = 0.0_f64;
        for s in &scenes {
            let c = if s == scene { ch } else { ChannelState::evaluate(s, spec) };
            let g = &c.gains;
            worst = worst.max(c.corr.rho_d.norm_sqr() / (g.g_d * g.g_t));
            worst = worst.max(c.corr.rho_u.norm_sqr() / (g.g_u * g.g_r));
        }
        Ok((worst <= 1.0 + 1e-9, format!("max |rho|^2/(g g) = {worst:.6} over {} scenes", scenes.len())))
    });

    report.run("kkt_identity", || {
        let (err, interior) = kkt_identity_error(&ch, &PARETO_EPS)?;
        Ok((err <= 1e-9, format!("{interior} interior eps of {}, max rel err {} (tol 1e-9)", PARETO_EPS.len(), sci(err))))
    });

    if opts.level == Level::Full {
        report.run("pareto_vs_grid", || {
            let err = pareto_grid_error(&ch, &PARETO_EPS, PARETO_GRID_N)?;
            Ok((err <= 1e-4, format!("eps = {PARETO_EPS:?}, grid {PARETO_GRID_N}^2, max rel err {} (tol 1e-4)", sci(err))))
        });
    }

    report.run("rayleigh_vs_pencil", || {
        let err = rayleigh_error(opts.seed, RAYLEIGH_DRAWS);
        Ok((err <= 1e-10, format!("{RAYLEIGH_DRAWS} draws, max rel err {} (tol 1e-10)", sci(err))))
    });

    report.run("endpoint_identities", || {
        let err = endpoint_identity_error(&m, &ch)?;
        Ok((err <= 1e-12, format!("max err {} (tol 1e-12)", sci(err))))
    });

    report.run("rates_with_oracle_channels", || {
        let oracle = ChannelState::evaluate_oracle(scene, spec)?;
        let a = IsacRates::compute(&m, &ch);
        let b = IsacRates::compute(&m, &oracle);
        let err = a.labeled().iter().zip(b.labeled()).map(|((_, x), (_, y))| diff(*x, y)).fold(0.0, f64::max);
        Ok((err <= 1e-6, format!("max err {} bits, scaled by max(1, rate) (tol 1e-6)", sci(err))))
    });

    report.run("spda_below_capa", || {
        let spda = baselines::spda_rates(scene)?;
        let bad = spda_violations(&IsacRates::compute(&m, &ch), &spda);
        Ok((bad.is_empty(), if bad.is_empty() { "all 8 rates".to_string() } else { format!("exceeded: {}", bad.join(", ")) }))
    });

    report.run("region_containment", || {
        let [dl, ul] = region_containment(scene, &ch, rates::DEFAULT_REGION_GRID)?;
        Ok((
            dl.0 && dl.1 && ul.0 && ul.1,
            format!("dl SPDA {} FDSAC {}, ul SPDA {} FDSAC {}", dl.0, dl.1, ul.0, ul.1),
        ))
    });

    report.run("sr_decreasing_in_frame_length", || {
        let sr = sr_versus_frame_length(m.snrs.gamma_bar_s * ch.gains.g_t * ch.gains.g_r);
        Ok((strictly_decreasing(&sr), format!("L = {FRAME_LENGTHS:?}")))
    });

    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sensing_rate_decreases_with_frame_length() {
        for x in [1e-3, 1.0, 1e6] {
            assert!(strictly_decreasing(&sr_versus_frame_length(x)));
        }
    }

    #[test]
    fn rayleigh_closed_form_matches_pencil() {
        assert!(rayleigh_error(7, 200) < 1e-10);
    }

    #[test]
    fn injected_fault_breaks_gain_check() {
        let scene = capa_isac::default_scene();
        let spec = QuadratureSpec::default();
        assert!(gain_oracle_error(&[scene], &spec, None).unwrap() < 1e-9);
        let err = gain_oracle_error(&[scene], &spec, Some(Fault::GainPerturbation)).unwrap();
        assert!((err - 1e-3).abs() < 1e-8);
    }

    #[test]
    fn report_counts_failures() {
        let mut r = ValidationReport::default();
        r.run("ok", || Ok((true, String::new())));
        r.run("bad", || Err(capa_isac::Error::EmptyArray("x".into())));
        assert_eq!(r.failed(), 1);
        assert!(r.render().contains("[FAIL] bad"));
        assert_eq!(r.into_result().unwrap_err().exit_code(), 1);
    }
}
