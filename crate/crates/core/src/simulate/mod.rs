//! Latent price models, sampling-time schemes, noise injection and ground
//! truth for the three benchmark designs.
//!
//! | design | latent model | sampling |
//! |---|---|---|
//! | [`Design::BrownianBridgeHitting`] | constant-vol Brownian bridge | barrier hitting + intensive steps |
//! | [`Design::HestonBridgeHitting`] | Heston bridge (full-truncation Euler) | barrier hitting + intensive steps |
//! | [`Design::BrownianBridgePoisson`] | constant-vol Brownian bridge | independent Poisson arrivals |

mod config;
mod path;
mod sampling;

pub use config::{Design, DesignConfig, HestonParams, NoiseSpec};
pub use path::{simulate_brownian_bridge, simulate_heston_bridge, simulate_latent, true_iv, LatentPath};
pub use sampling::{
    observe_with_noise, sample_hitting_scheme, sample_latent, sample_poisson, HittingSample,
    SparseExit,
};

use crate::error::Result;
use crate::rng::PathSeeds;
use crate::series::TickSeries;

/// One simulated path: latent path, observed series and ground truth.
#[derive(Debug, Clone)]
pub struct SimulatedPath {
    pub latent: TickSeries,
    pub observed: TickSeries,
    pub true_iv: f64,
}

/// Runs the full pipeline for one path of a design.
pub fn simulate_observed(config: &DesignConfig, seeds: &PathSeeds) -> Result<SimulatedPath> {
    config.validate()?;
    let path = simulate_latent(config, seeds.latent)?;
    let latent = match config.design {
        Design::BrownianBridgeHitting | Design::HestonBridgeHitting => {
            sample_hitting_scheme(&path, config, seeds.sampling)?.series
        }
        Design::BrownianBridgePoisson => {
            let end = path.end_time();
            let times: Vec<f64> = sample_poisson(config, seeds.times)
                .into_iter()
                .filter(|&t| t <= end)
                .collect();
            sample_latent(&path, &times, seeds.sampling)?
        }
    };
    let observed = observe_with_noise(
        &latent,
        &NoiseSpec {
            sigma_eps: config.noise_sd,
            seed: seeds.noise,
        },
    )?;
    Ok(SimulatedPath {
        latent,
        observed,
        true_iv: true_iv(&path)?,
    })
}
