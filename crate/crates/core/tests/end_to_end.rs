use capa_isac::rates::Corner;
use capa_isac::{
    default_scene, dl_region, random_scene, ul_region, ChannelState, IsacRates, QuadratureSpec, RateModel, Scene,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn config_file_reproduces_default_rates() {
    let path = std::env::temp_dir().join(format!("capa-isac-e2e-{}.toml", std::process::id()));
    std::fs::write(&path, default_scene().to_config_string()).unwrap();
    let scene = Scene::from_config_file(&path).unwrap();
    std::fs::remove_file(&path).unwrap();

    let spec = QuadratureSpec::default();
    let a = IsacRates::compute(&RateModel::from_scene(&scene), &ChannelState::evaluate(&scene, &spec));
    let d = default_scene();
    let b = IsacRates::compute(&RateModel::from_scene(&d), &ChannelState::evaluate(&d, &spec));
    for ((name, x), (_, y)) in a.labeled().iter().zip(b.labeled()) {
        assert!(rel(*x, y) < 1e-12, "{name}: {x} vs {y}");
    }
}

/// Chebyshev error scales with the gains, not with |ρ|, so small rates are
/// compared in bits rather than relatively.
#[test]
fn chebyshev_rates_track_oracle_rates_on_random_scenes() {
    let spec = QuadratureSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let scene = random_scene(&mut rng);
        let m = RateModel::from_scene(&scene);
        let fast = IsacRates::compute(&m, &ChannelState::evaluate(&scene, &spec));
        let slow = IsacRates::compute(&m, &ChannelState::evaluate_oracle(&scene, &spec).unwrap());
        for ((name, x), (_, y)) in fast.labeled().iter().zip(slow.labeled()) {
            assert!((x - y).abs() < 1e-6 * y.abs().max(1.0), "{name}: {x} vs {y}");
        }
    }
}

#[test]
fn region_corners_are_the_design_rates() {
    let scene = default_scene();
    let m = RateModel::from_scene(&scene);
    let ch = ChannelState::evaluate(&scene, &QuadratureSpec::default());
    let r = IsacRates::compute(&m, &ch);
    let dl = dl_region(&m, &ch, 11).unwrap();
    let ul = ul_region(&m, &ch, 11).unwrap();
    for (corner, pair) in &dl.corners {
        let (sr, cr) = match corner {
            Corner::CommCentric => (r.dl_cc_sr, r.dl_cc_cr),
            Corner::SensingCentric => (r.dl_sc_sr, r.dl_sc_cr),
        };
        assert!(rel(pair.sr, sr) < 1e-12 && rel(pair.cr, cr) < 1e-12, "dl {corner}");
    }
    for (corner, pair) in &ul.corners {
        let (sr, cr) = match corner {
            Corner::CommCentric => (r.ul_cc_sr, r.ul_cc_cr),
            Corner::SensingCentric => (r.ul_sc_sr, r.ul_sc_cr),
        };
        assert!(rel(pair.sr, sr) < 1e-12 && rel(pair.cr, cr) < 1e-12, "ul {corner}");
    }
    assert!((dl.max_cr() - r.dl_cc_cr).abs() < 1e-12);
    assert!((dl.max_sr() - r.dl_sc_sr).abs() < 1e-12);
}
