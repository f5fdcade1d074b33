use super::TimestampFeatures;
use crate::nncore::Rng;

/// Parameters of the synthetic contest-history generator.
///
/// Each contestant has a practice intensity `mu` drawn uniformly from
/// `[0.25, 1.75] · mean_ac`, modulated over time by a persistent log-normal
/// AR(1) factor with unit mean and log-scale deviation `intensity_sd`. Per contest:
///
/// * `ac ~ Poisson(intensity)`, `wa ~ Poisson(intensity / 2)`
/// * `rating += practice_effect · ac + noise_sd · N(0, 1)`
/// * the solve rating rises with the contest's performance and the rank is a
///   strictly decreasing function of the solve rating.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub n_users: usize,
    pub length: usize,
    pub seed: u64,
    pub practice_effect: f64,
    pub noise_sd: f64,
    pub mean_ac: f64,
    /// AR(1) coefficient of the log intensity factor.
    pub persistence: f64,
    pub intensity_sd: f64,
}

impl SyntheticConfig {
    pub fn new(n_users: usize, length: usize, seed: u64, practice_effect: f64) -> Self {
        Self { n_users, length, seed, practice_effect, noise_sd: 25.0, mean_ac: 4.0, persistence: 0.8, intensity_sd: 0.5 }
    }

    pub fn generate(&self) -> Vec<Vec<TimestampFeatures>> {
        (0..self.n_users)
            .map(|u| self.generate_user(&mut Rng::derived(self.seed, u as u64)))
            .collect()
    }

    fn generate_user(&self, rng: &mut Rng) -> Vec<TimestampFeatures> {
        let log_sd = self.intensity_sd;
        let innovation_sd = log_sd * (1.0 - self.persistence * self.persistence).max(0.0).sqrt();
        let mu = self.mean_ac * rng.uniform_range(0.25, 1.75);
        let mut log_factor = log_sd * rng.normal();
        let mut rating = rng.uniform_range(1100.0, 2100.0);
        let mut time = 1_500_000_000 + rng.below(86_400 * 30) as i64;
        let base_id = 10_000 + rng.below(1000);

        (0..self.length)
            .map(|t| {
                log_factor = self.persistence * log_factor + innovation_sd * rng.normal();
                let intensity = (mu * (log_factor - log_sd * log_sd / 2.0).exp()).min(60.0);
                let ac = poisson(rng, intensity);
                let wa = poisson(rng, intensity / 2.0);
                let delta = self.practice_effect * ac as f64 + self.noise_sd * rng.normal();
                let prev = rating;
                rating += delta;
                let performance = prev + 4.0 * delta;
                let solve_rating = (1500.0 + 1.5 * (performance - 1500.0) + 60.0 * rng.normal()).max(0.0);
                let rank = 1.0 + (20_000.0 * (-solve_rating / 1200.0).exp()).floor();
                time += 7 * 86_400 + rng.below(7 * 86_400) as i64;
                TimestampFeatures {
                    contest_id: base_id + t as u64,
                    contest_time: time,
                    rating,
                    rank,
                    solve_rating,
                    ac_count: ac as f64,
                    wa_count: wa as f64,
                }
            })
            .collect()
    }
}

/// Generator with default noise and intensity settings.
pub fn generate_synthetic_timelines(
    n_users: usize,
    length: usize,
    seed: u64,
    practice_effect: f64,
) -> Vec<Vec<TimestampFeatures>> {
    SyntheticConfig::new(n_users, length, seed, practice_effect).generate()
}

/// Knuth's multiplication method; fine for the small rates used here.
fn poisson(rng: &mut Rng, lambda: f64) -> u32 {
    if lambda <= 0.0 {
        return 0;
    }
    let limit = (-lambda).exp();
    let mut k = 0;
    let mut p = rng.uniform();
    while p > limit {
        k += 1;
        p *= rng.uniform();
    }
    k
}
