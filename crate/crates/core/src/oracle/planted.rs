use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{check_mask, Oracle, OracleError};
use crate::error::{Error, Result};
use crate::lattice::{InteractionTable, SubsetMask, ValueTable, N_MAX};
use crate::transform::zeta_transform;

pub const DEFAULT_EFFECT_FLOOR: f64 = 0.1;
pub const DEFAULT_EFFECT_CEILING: f64 = 5.0;

/// Recipe for a synthetic oracle with a known sparse interaction table.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    pub n: usize,
    /// Number of salient interactions.
    pub k: usize,
    pub seed: u64,
    /// Standard deviation of Gaussian noise added to every `v(x_S)`.
    pub sigma: f64,
    /// Salient magnitudes are uniform in `[effect_floor, effect_ceiling]`, random sign.
    pub effect_floor: f64,
    pub effect_ceiling: f64,
    /// Additional small interactions, magnitudes uniform in `(0, noise_max]`.
    pub noise_count: usize,
    pub noise_max: f64,
}

impl PlantedConfig {
    pub fn new(n: usize, k: usize, seed: u64) -> Self {
        Self {
            n,
            k,
            seed,
            sigma: 0.0,
            effect_floor: DEFAULT_EFFECT_FLOOR,
            effect_ceiling: DEFAULT_EFFECT_CEILING,
            noise_count: 0,
            noise_max: 0.05,
        }
    }

    pub fn sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn effect_range(mut self, floor: f64, ceiling: f64) -> Self {
        self.effect_floor = floor;
        self.effect_ceiling = ceiling;
        self
    }

    pub fn noise_interactions(mut self, count: usize, max_abs: f64) -> Self {
        self.noise_count = count;
        self.noise_max = max_abs;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n > N_MAX {
            return Err(Error::TooManyPlayers {
                n: self.n,
                max: N_MAX,
            });
        }
        let size = 1usize << self.n;
        if self.k + self.noise_count > size {
            return Err(Error::invalid(format!(
                "cannot plant {} interactions in a lattice of {size} masks",
                self.k + self.noise_count
            )));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::invalid(format!(
                "noise scale {} must be >= 0",
                self.sigma
            )));
        }
        if !(self.effect_floor > 0.0 && self.effect_floor <= self.effect_ceiling)
            || !self.effect_ceiling.is_finite()
        {
            return Err(Error::invalid(format!(
                "effect range [{}, {}] is invalid",
                self.effect_floor, self.effect_ceiling
            )));
        }
        if self.noise_count > 0 && !(self.noise_max > 0.0 && self.noise_max.is_finite()) {
            return Err(Error::invalid(format!(
                "noise interaction bound {} must be > 0",
                self.noise_max
            )));
        }
        Ok(())
    }

    /// Draws the model. Identical configs give identical models.
    pub fn build(&self) -> Result<PlantedModel> {
        self.validate()?;
        let size = 1usize << self.n;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let drawn = index::sample(&mut rng, size, self.k + self.noise_count).into_vec();

        let mut truth = vec![0.0; size];
        let mut support = Vec::with_capacity(self.k);
        for (i, &mask) in drawn.iter().enumerate() {
            let magnitude = if i < self.k {
                support.push(SubsetMask::from_bits(mask as u32));
                rng.random_range(self.effect_floor..=self.effect_ceiling)
            } else {
                // (0, noise_max]
                self.noise_max * (1.0 - rng.random::<f64>())
            };
            truth[mask] = if rng.random_bool(0.5) {
                magnitude
            } else {
                -magnitude
            };
        }
        support.sort_unstable();

        let ground_truth = InteractionTable::new(self.n, truth)?;
        let mut values = zeta_transform(&ground_truth);
        if self.sigma > 0.0 {
            let normal = Normal::new(0.0, self.sigma)
                .map_err(|e| Error::invalid(format!("noise distribution: {e}")))?;
            let noisy = values
                .as_slice()
                .iter()
                .map(|&v| v + normal.sample(&mut rng))
                .collect();
            values = ValueTable::new(self.n, noisy)?;
        }

        Ok(PlantedModel {
            config: self.clone(),
            ground_truth,
            support,
            values,
        })
    }
}

/// Synthetic oracle whose value table is the zeta transform of a sparse
/// ground-truth interaction table, optionally with additive noise.
///
/// The noise is drawn once at construction, so repeated queries agree exactly.
#[derive(Debug, Clone)]
pub struct PlantedModel {
    config: PlantedConfig,
    ground_truth: InteractionTable,
    support: Vec<SubsetMask>,
    values: ValueTable,
}

impl PlantedModel {
    pub fn config(&self) -> &PlantedConfig {
        &self.config
    }

    /// Every planted interaction, salient and noise.
    pub fn ground_truth(&self) -> &InteractionTable {
        &self.ground_truth
    }

    /// Masks of the `k` salient interactions, ascending.
    pub fn salient_support(&self) -> &[SubsetMask] {
        &self.support
    }

    pub fn values(&self) -> &ValueTable {
        &self.values
    }
}

impl Oracle for PlantedModel {
    fn n(&self) -> usize {
        self.config.n
    }

    fn query(&self, mask: SubsetMask) -> Result<f64, OracleError> {
        check_mask(mask, self.config.n)?;
        Ok(self.values.get(mask))
    }
}

/// A planted oracle with `k` salient interactions and its ground truth.
pub fn make_planted(
    n: usize,
    k: usize,
    seed: u64,
    sigma: f64,
) -> Result<(PlantedModel, InteractionTable)> {
    let model = PlantedConfig::new(n, k, seed).sigma(sigma).build()?;
    let truth = model.ground_truth().clone();
    Ok((model, truth))
}
