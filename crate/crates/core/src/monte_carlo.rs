//! Seeded Monte Carlo fault injection.
//!
//! Every module of every trial is drawn correct with probability
//! `r_module`, independently. Trial `i` owns its own SplitMix64 stream whose
//! seed is the `i`-th output of a SplitMix64 sequence started at the run
//! seed, so a trial's draws depend only on `(seed, i)` and never on how
//! trials are split across worker threads.

use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{rational_to_f64, Probability};
use crate::reliability::ReliabilityExpr;
use crate::scheme::Scheme;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Two-sided 95% standard normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

const BLOCK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub r_module: Probability,
    pub trials: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(scheme: Scheme, r_module: Probability, trials: u64, seed: u64) -> Result<Self> {
        let config = SimConfig {
            scheme,
            r_module,
            trials,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Domain("at least one trial is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub scheme: Scheme,
    pub r_module: f64,
    pub trials: u64,
    pub seed: u64,
    pub successes: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Exact system reliability from the closed-form polynomial.
    pub analytic: f64,
}

impl SimReport {
    pub fn contains_analytic(&self) -> bool {
        self.ci_low <= self.analytic && self.analytic <= self.ci_high
    }
}

/// SplitMix64 output finalizer (Stafford mix 13).
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `counter`-th output of a SplitMix64 stream started at `base`.
fn splitmix_at(base: u64, counter: u64) -> u64 {
    mix64(base.wrapping_add(GOLDEN_GAMMA.wrapping_mul(counter.wrapping_add(1))))
}

/// Seed of the private stream used by trial `trial`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix_at(seed, trial)
}

/// Seed used for the `index`-th point of a [`sweep`].
pub fn point_seed(seed: u64, index: u64) -> u64 {
    seed ^ splitmix_at(0, index)
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = (center - half).clamp(0.0, 1.0).min(p);
    let high = (center + half).clamp(0.0, 1.0).max(p);
    (low, high)
}

fn run_trial(scheme: &Scheme, draw: &Bernoulli, seed: u64, trial: u64) -> bool {
    let mut rng = SplitMix64::seed_from_u64(trial_seed(seed, trial));
    let mut faulty = 0u64;
    for module in 0..scheme.n_modules() {
        if !draw.sample(&mut rng) {
            faulty |= 1 << module;
        }
    }
    scheme.is_operational_mask(faulty)
}

fn count_successes(config: &SimConfig) -> u64 {
    let draw = Bernoulli::new(config.r_module.to_f64()).expect("probability in [0, 1]");
    let blocks = config.trials.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK;
            let end = (start + BLOCK).min(config.trials);
            (start..end)
                .filter(|&t| run_trial(&config.scheme, &draw, config.seed, t))
                .count() as u64
        })
        .sum()
}

fn report(config: &SimConfig, successes: u64) -> SimReport {
    let analytic = ReliabilityExpr::derive_closed_form(config.scheme)
        .evaluate(&config.r_module)
        .r_system;
    let (ci_low, ci_high) = wilson_interval(successes, config.trials);
    SimReport {
        scheme: config.scheme,
        r_module: config.r_module.to_f64(),
        trials: config.trials,
        seed: config.seed,
        successes,
        estimate: successes as f64 / config.trials as f64,
        ci_low,
        ci_high,
        analytic: rational_to_f64(analytic.exact()),
    }
}

/// Runs the simulation on the global rayon pool.
pub fn simulate(config: &SimConfig) -> Result<SimReport> {
    config.validate()?;
    Ok(report(config, count_successes(config)))
}

/// Runs the simulation on a dedicated pool of `threads` workers. The
/// result is identical to [`simulate`] for any thread count.
pub fn simulate_with_threads(config: &SimConfig, threads: usize) -> Result<SimReport> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| report(config, count_successes(config))))
}

/// One simulation per module reliability. Point `i` runs with
/// [`point_seed`]`(seed, i)`.
pub fn sweep(
    scheme: Scheme,
    r_values: &[Probability],
    trials: u64,
    seed: u64,
) -> Result<Vec<SimReport>> {
    if r_values.is_empty() {
        return Err(Error::Domain(
            "sweep needs at least one module reliability".into(),
        ));
    }
    r_values
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let config = SimConfig::new(scheme, r.clone(), trials, point_seed(seed, i as u64))?;
            simulate(&config)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(s: &str, r: &str, trials: u64, seed: u64) -> SimConfig {
        SimConfig::new(s.parse().unwrap(), r.parse().unwrap(), trials, seed).unwrap()
    }

    #[test]
    fn splitmix_reference_outputs() {
        // First outputs of SplitMix64 seeded with 0 and 1234567.
        assert_eq!(splitmix_at(0, 0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix_at(0, 1), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(splitmix_at(1234567, 0), 6457827717110365317);
        assert_eq!(splitmix_at(1234567, 1), 3203168211198807973);
    }

    #[test]
    fn perfect_modules_always_succeed() {
        let r = simulate(&config("5-of-8", "1", 5000, 3)).unwrap();
        assert_eq!(r.successes, r.trials);
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.ci_high, 1.0);
    }

    #[test]
    fn dead_modules_always_fail() {
        let r = simulate(&config("7MR", "0", 5000, 3)).unwrap();
        assert_eq!(r.successes, 0);
        assert_eq!(r.ci_low, 0.0);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(SimConfig::new("3MR".parse().unwrap(), Probability::one(), 0, 1).is_err());
    }

    #[test]
    fn tmr_at_one_half() {
        let r = simulate(&config("3MR", "0.5", 1_000_000, 11)).unwrap();
        assert_eq!(r.analytic, 0.5);
        assert!(r.contains_analytic(), "{r:?}");
    }

    #[test]
    fn five_of_seven_at_point_nine() {
        let r = simulate(&config("5-of-7", "0.9", 1_000_000, 2024)).unwrap();
        assert_eq!(r.analytic, 0.9815256);
        assert!(r.contains_analytic(), "{r:?}");
        let sigma = (r.analytic * (1.0 - r.analytic) / r.trials as f64).sqrt();
        assert!((r.estimate - r.analytic).abs() <= 4.0 * sigma);
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let c = config("5-of-8", "0.9", 100_000, 77);
        let one = simulate_with_threads(&c, 1).unwrap();
        let four = simulate_with_threads(&c, 4).unwrap();
        assert_eq!(
            serde_json::to_string(&one).unwrap(),
            serde_json::to_string(&four).unwrap()
        );
        assert_eq!(one, simulate(&c).unwrap());
    }

    #[test]
    fn sweep_endpoints_and_seeding() {
        let s: Scheme = "3-of-6".parse().unwrap();
        let pts = sweep(s, &[Probability::zero(), Probability::one()], 2000, 5).unwrap();
        assert_eq!(pts[0].estimate, 0.0);
        assert_eq!(pts[1].estimate, 1.0);

        let p9: Probability = "0.9".parse().unwrap();
        let single = sweep(s, std::slice::from_ref(&p9), 20_000, 5).unwrap();
        let direct =
            simulate(&SimConfig::new(s, p9.clone(), 20_000, point_seed(5, 0)).unwrap()).unwrap();
        assert_eq!(single[0], direct);

        let p5: Probability = "0.5".parse().unwrap();
        let forward = sweep(s, &[p5.clone(), p9.clone()], 20_000, 5).unwrap();
        let reverse = sweep(s, &[p9.clone(), p5.clone()], 20_000, 5).unwrap();
        assert_ne!(forward[1].successes, reverse[0].successes);
        assert_eq!(forward, sweep(s, &[p5, p9], 20_000, 5).unwrap());

        assert!(sweep(s, &[], 10, 0).is_err());
    }

    #[test]
    fn wilson_bounds() {
        for (k, n) in [(0, 10), (10, 10), (5, 10), (99_044, 100_000), (1, 1)] {
            let (lo, hi) = wilson_interval(k, n);
            let p = k as f64 / n as f64;
            assert!(
                0.0 <= lo && lo <= p && p <= hi && hi <= 1.0,
                "{k}/{n}: {lo} {hi}"
            );
        }
        // reference value: 5/10 -> [0.2366, 0.7634]
        let (lo, hi) = wilson_interval(5, 10);
        assert!((lo - 0.236_593).abs() < 1e-5 && (hi - 0.763_407).abs() < 1e-5);
    }
}
