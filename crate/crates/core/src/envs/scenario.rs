use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{GridCase, RenewableKind};

/// Noise is truncated at this many standard deviations.
pub const TRUNCATION: f64 = 3.0;

/// Renewables never exceed this multiple of their largest forecast.
const RENEWABLE_CAP: f64 = 1.2;

/// Multiplicative truncated-Gaussian forecast errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioGenerator {
    pub sigma_load: f64,
    pub sigma_pv: f64,
    pub sigma_wind: f64,
    pub seed: u64,
}

/// Realized values indexed `[t][element]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub day: usize,
    pub loads: Vec<Vec<f64>>,
    pub renewables: Vec<Vec<f64>>,
}

/// Standard deviation of `N(0, σ²)` truncated to `±3σ`.
pub fn truncated_normal_std(sigma: f64) -> f64 {
    let c = TRUNCATION;
    let pdf = (-0.5 * c * c).exp() / (2.0 * core::f64::consts::PI).sqrt();
    let mass = libm::erf(c / core::f64::consts::SQRT_2);
    sigma * (1.0 - 2.0 * c * pdf / mass).sqrt()
}

impl ScenarioGenerator {
    pub fn deterministic(seed: u64) -> Self {
        Self {
            sigma_load: 0.0,
            sigma_pv: 0.0,
            sigma_wind: 0.0,
            seed,
        }
    }

    fn rng(&self, day: usize, k: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((day as u64) << 32) | (k & 0xffff_ffff));
        rng
    }

    fn draw(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
        if sigma == 0.0 {
            return 0.0;
        }
        loop {
            let z: f64 = StandardNormal.sample(rng);
            if z.abs() <= TRUNCATION {
                return sigma * z;
            }
        }
    }
}

/// Scenario `k` of `day`. Each `(seed, day, k)` has its own random stream,
/// so realizations do not depend on draw order across scenarios.
pub fn sample_scenario(
    gen: &ScenarioGenerator,
    case: &GridCase,
    day: usize,
    k: u64,
) -> Result<Scenario> {
    let mut rng = gen.rng(day, k);
    let caps: Vec<f64> = case
        .renewables
        .iter()
        .map(|r| RENEWABLE_CAP * r.forecast_profile.iter().copied().fold(0.0, f64::max))
        .collect();
    let mut loads = Vec::with_capacity(case.periods());
    let mut renewables = Vec::with_capacity(case.periods());
    for t in 0..case.periods() {
        let lf = case.load_forecast(day, t)?;
        loads.push(
            lf.iter()
                .map(|p| (p * (1.0 + ScenarioGenerator::draw(&mut rng, gen.sigma_load))).max(0.0))
                .collect(),
        );
        let rf = case.renewable_forecast(day, t)?;
        renewables.push(
            rf.iter()
                .zip(&case.renewables)
                .zip(&caps)
                .map(|((p, r), cap)| {
                    let sigma = match r.kind {
                        RenewableKind::Pv => gen.sigma_pv,
                        RenewableKind::Wind => gen.sigma_wind,
                    };
                    (p * (1.0 + ScenarioGenerator::draw(&mut rng, sigma))).clamp(0.0, *cap)
                })
                .collect(),
        );
    }
    Ok(Scenario {
        day,
        loads,
        renewables,
    })
}

impl Scenario {
    /// The forecast itself as a scenario.
    pub fn forecast(case: &GridCase, day: usize) -> Result<Self> {
        sample_scenario(&ScenarioGenerator::deterministic(0), case, day, 0)
    }
}
