use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::benchmarks::{product_grid, Benchmark};
use crate::error::{Error, Result};
use crate::risk::EnvDistribution;

#[derive(Debug, Clone, PartialEq)]
pub struct NewsvendorParams {
    pub prices: Vec<f64>,
    pub costs: Vec<f64>,
    pub customers: u32,
    pub gamma_shape: f64,
    pub gamma_scale: f64,
    /// Largest initial inventory per product.
    pub max_inventory: u32,
    /// Spacing of the inventory grid.
    pub inventory_step: u32,
    /// Number of frozen preference draws forming the environment grid.
    pub env_draws: usize,
}

impl Default for NewsvendorParams {
    fn default() -> Self {
        Self {
            prices: vec![1.0, 0.9],
            costs: vec![0.5, 0.4],
            customers: 50,
            gamma_shape: 2.0,
            gamma_scale: 0.5,
            max_inventory: 30,
            inventory_step: 2,
            env_draws: 200,
        }
    }
}

impl NewsvendorParams {
    fn validate(&self) -> Result<()> {
        if self.prices.is_empty() || self.prices.len() != self.costs.len() {
            return Err(Error::invalid("prices and costs must be nonempty and of equal length"));
        }
        if self
            .prices
            .iter()
            .zip(&self.costs)
            .any(|(&p, &c)| !(c > 0.0) || !(p > c))
        {
            return Err(Error::invalid("every product needs price > cost > 0"));
        }
        if !(self.gamma_shape > 0.0 && self.gamma_scale > 0.0) {
            return Err(Error::invalid("gamma shape and scale must be positive"));
        }
        if self.inventory_step == 0 || self.max_inventory == 0 || self.env_draws == 0 {
            return Err(Error::invalid("inventory grid and environment sample must be nonempty"));
        }
        Ok(())
    }
}

/// Profit of one selling season.
///
/// Customers arrive one at a time and buy the in-stock product with the
/// highest utility `preference − price` (lowest index on ties), provided that
/// utility is nonnegative. Profit is revenue minus the cost of the initial stock.
pub fn newsvendor_profit(inventory: &[u32], preferences: &[f64], prices: &[f64], costs: &[f64], customers: u32) -> f64 {
    let mut stock = inventory.to_vec();
    let mut revenue = 0.0;
    for _ in 0..customers {
        let mut choice: Option<(usize, f64)> = None;
        for (j, &s) in stock.iter().enumerate() {
            if s == 0 {
                continue;
            }
            let utility = preferences[j] - prices[j];
            if utility >= 0.0 && choice.is_none_or(|(_, u)| utility > u) {
                choice = Some((j, utility));
            }
        }
        match choice {
            Some((j, _)) => {
                stock[j] -= 1;
                revenue += prices[j];
            }
            None => break,
        }
    }
    let procurement: f64 = inventory.iter().zip(costs).map(|(&q, &c)| q as f64 * c).sum();
    revenue - procurement
}

fn to_inventory(x: f64, max: u32) -> u32 {
    (((x + 1.0) * 0.5 * max as f64).round()).clamp(0.0, max as f64) as u32
}

/// Inventory decisions scaled to `[−1, 1]`; preference draws kept raw.
pub fn newsvendor_benchmark(params: &NewsvendorParams, seed: u64) -> Result<Benchmark> {
    params.validate()?;
    let n = params.prices.len();
    let max = params.max_inventory;
    let levels: Vec<f64> = (0..=max)
        .step_by(params.inventory_step as usize)
        .map(|q| 2.0 * q as f64 / max as f64 - 1.0)
        .collect();
    let design = product_grid(&vec![levels; n]);

    let gamma = Gamma::new(params.gamma_shape, params.gamma_scale)
        .map_err(|e| Error::invalid(format!("gamma distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Vec<f64>> = (0..params.env_draws)
        .map(|_| (0..n).map(|_| gamma.sample(&mut rng)).collect())
        .collect();
    let env = EnvDistribution::uniform(draws)?;

    let prices = params.prices.clone();
    let costs = params.costs.clone();
    let customers = params.customers;
    let oracle = Arc::new(move |x: &[f64], w: &[f64]| {
        let inventory: Vec<u32> = x.iter().map(|&v| to_inventory(v, max)).collect();
        newsvendor_profit(&inventory, w, &prices, &costs, customers)
    });
    Benchmark::new("newsvendor", design, env, oracle)
}
