//! Rates, beamformers and SR-CR regions for integrated sensing and
//! communication with continuous-aperture arrays (CAPAs).
//!
//! A base station carries two edge-to-edge rectangular CAPAs on the xz
//! plane, one transmitting and one receiving. It serves a single-antenna
//! communication user (CU) and tracks one point target. The crate evaluates
//! the aperture channel integrals, the closed-form beamformers and the
//! resulting communication rate (CR) and sensing rate (SR) in both link
//! directions, and compares them against discrete-array and
//! frequency-division baselines.
//!
//! ```
//! use capa_isac::{ChannelState, IsacRates, QuadratureSpec, RateModel, default_scene};
//!
//! let scene = default_scene();
//! let ch = ChannelState::evaluate(&scene, &QuadratureSpec::default());
//! let rates = IsacRates::compute(&RateModel::from_scene(&scene), &ch);
//! assert!(rates.dl_sc_cr <= rates.dl_cc_cr);
//! ```

pub mod baselines;
pub mod channel;
pub mod error;
pub mod quadrature;
pub mod rates;
pub mod scene;
pub mod subspace;

pub use baselines::{fdsac_dl, fdsac_dl_region, fdsac_ul, fdsac_ul_region, spda_channel_state, spda_rates, FdsacSplit, SpdaArray};
pub use channel::{
    gain_closed, gain_oracle, green_kernel, rho_chebyshev, rho_oracle, ChannelGains, ChannelState, Correlation,
    CorrelationKind, GainKind,
};
pub use error::{Error, Result};
pub use quadrature::QuadratureSpec;
pub use rates::{dl_pareto_pair, dl_region, ul_region, ul_timeshare_pair, EffectiveSnrs, IsacRates, RateModel, RatePair, RateRegion};
pub use scene::{default_scene, random_scene, ApertureId, Endpoint, PolarPosition, Scene, SceneParams};
pub use subspace::{
    achieved_gammas, gram_schmidt_coeffs, kkt_pareto, pareto_grid_oracle, rayleigh_max, AchievedGammas, BeamWeights,
    Regime, SubspaceGeometry,
};
