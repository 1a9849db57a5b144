use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pricing::PriceBand;
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    /// Maximum number of outer iterations.
    pub generations: usize,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    pub crossover_prob: f64,
    /// Mutation standard deviation as a fraction of the band width.
    pub mutation_scale: f64,
    /// Stopping tolerance on profit and user-cost changes, yuan.
    pub convergence_eps: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 40,
            generations: 90,
            mutation_rate: 0.04,
            crossover_prob: 0.8,
            mutation_scale: 0.05,
            convergence_eps: 0.01,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::param("GA population must be at least 2"));
        }
        if self.generations == 0 {
            return Err(Error::param("GA needs at least one generation"));
        }
        for (name, r) in [
            ("mutation_rate", self.mutation_rate),
            ("crossover_prob", self.crossover_prob),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::param(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(self.mutation_scale >= 0.0) {
            return Err(Error::param("mutation_scale must be non-negative"));
        }
        if !(self.convergence_eps > 0.0) {
            return Err(Error::param("convergence_eps must be positive"));
        }
        Ok(())
    }
}

/// Real-coded population of hourly price vectors.
///
/// The first individuals are the band ceiling, the band floor and the band
/// midpoint; the rest are uniform inside the bands.
#[derive(Debug, Clone)]
pub struct Population {
    bands: Vec<PriceBand>,
    cfg: GaConfig,
    rng: SimRng,
    individuals: Vec<Vec<f64>>,
    fitness: Vec<f64>,
}

impl Population {
    pub fn new(bands: Vec<PriceBand>, cfg: GaConfig, mut rng: SimRng) -> Result<Self> {
        cfg.validate()?;
        if bands.is_empty() {
            return Err(Error::param("GA needs at least one gene"));
        }
        let mut individuals = vec![
            bands.iter().map(|b| b.max).collect::<Vec<_>>(),
            bands.iter().map(|b| b.min).collect(),
            bands.iter().map(PriceBand::midpoint).collect(),
        ];
        individuals.truncate(cfg.population);
        while individuals.len() < cfg.population {
            individuals.push(
                bands
                    .iter()
                    .map(|b| b.min + rng.random::<f64>() * b.width())
                    .collect(),
            );
        }
        Ok(Self {
            bands,
            cfg,
            rng,
            fitness: vec![f64::NEG_INFINITY; individuals.len()],
            individuals,
        })
    }

    pub fn individuals(&self) -> &[Vec<f64>] {
        &self.individuals
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn bands(&self) -> &[PriceBand] {
        &self.bands
    }

    /// Scores every individual; evaluation may run in parallel, results are
    /// stored in individual order.
    pub fn evaluate<F>(&mut self, f: F) -> Result<()>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let scores: Vec<Result<f64>> = self.individuals.par_iter().map(|x| f(x)).collect();
        for (slot, s) in self.fitness.iter_mut().zip(scores) {
            let v = s?;
            *slot = if v.is_nan() { f64::NEG_INFINITY } else { v };
        }
        Ok(())
    }

    /// Index of the fittest individual; ties go to the lowest index.
    pub fn best_index(&self) -> usize {
        let mut best = 0;
        for i in 1..self.fitness.len() {
            if self.fitness[i] > self.fitness[best] {
                best = i;
            }
        }
        best
    }

    pub fn best(&self) -> (&[f64], f64) {
        let i = self.best_index();
        (&self.individuals[i], self.fitness[i])
    }

    fn tournament(&mut self) -> usize {
        let n = self.individuals.len();
        let a = self.rng.random_range(0..n);
        let b = self.rng.random_range(0..n);
        if self.fitness[b] > self.fitness[a] {
            b
        } else {
            a
        }
    }

    /// Replaces the population by its offspring: elitism of one, binary
    /// tournaments, arithmetic crossover and clamped Gaussian mutation.
    /// Fitness values are reset until the next [`evaluate`](Self::evaluate).
    pub fn advance(&mut self) {
        let n = self.individuals.len();
        let mut next = Vec::with_capacity(n);
        next.push(self.individuals[self.best_index()].clone());
        while next.len() < n {
            let pa = self.tournament();
            let pb = self.tournament();
            let (mut a, mut b) = (self.individuals[pa].clone(), self.individuals[pb].clone());
            if self.rng.random::<f64>() < self.cfg.crossover_prob {
                for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                    let alpha: f64 = self.rng.random();
                    let (u, v) = (*x, *y);
                    *x = alpha * u + (1.0 - alpha) * v;
                    *y = (1.0 - alpha) * u + alpha * v;
                }
            }
            for child in [&mut a, &mut b] {
                self.mutate(child);
            }
            next.push(a);
            if next.len() < n {
                next.push(b);
            }
        }
        self.individuals = next;
        self.fitness.iter_mut().for_each(|f| *f = f64::NEG_INFINITY);
    }

    fn mutate(&mut self, genes: &mut [f64]) {
        for (g, band) in genes.iter_mut().zip(&self.bands) {
            if self.rng.random::<f64>() < self.cfg.mutation_rate {
                let sd = self.cfg.mutation_scale * band.width();
                if sd > 0.0 {
                    let step = Normal::new(0.0, sd)
                        .expect("positive sd")
                        .sample(&mut self.rng);
                    *g += step;
                }
            }
            *g = band.clamp(*g);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaResult {
    pub best: Vec<f64>,
    pub best_fitness: f64,
    /// Best fitness of each evaluated generation, starting with the initial one.
    pub trace: Vec<f64>,
}

/// Maximises a fixed fitness over price vectors inside `bands`.
pub fn ga_optimize<F>(
    fitness: F,
    bands: &[PriceBand],
    cfg: &GaConfig,
    rng: SimRng,
) -> Result<GaResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let mut pop = Population::new(bands.to_vec(), *cfg, rng)?;
    pop.evaluate(&fitness)?;
    let mut trace = vec![pop.best().1];
    for _ in 0..cfg.generations {
        pop.advance();
        pop.evaluate(&fitness)?;
        trace.push(pop.best().1);
    }
    let (best, best_fitness) = pop.best();
    Ok(GaResult {
        best: best.to_vec(),
        best_fitness,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn bands() -> Vec<PriceBand> {
        (0..24)
            .map(|h| PriceBand::new(0.8 + 0.01 * h as f64, 1.2 + 0.01 * h as f64).unwrap())
            .collect()
    }

    #[test]
    fn stays_inside_bands_and_is_monotone() {
        let b = bands();
        let cfg = GaConfig {
            generations: 30,
            ..Default::default()
        };
        let fit = |x: &[f64]| Ok(-x.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>());
        let mut pop = Population::new(b.clone(), cfg, stream_rng(1, 0)).unwrap();
        pop.evaluate(fit).unwrap();
        let mut last = pop.best().1;
        for _ in 0..cfg.generations {
            pop.advance();
            pop.evaluate(fit).unwrap();
            for ind in pop.individuals() {
                assert!(ind.iter().zip(&b).all(|(g, band)| band.contains(*g)));
            }
            let now = pop.best().1;
            assert!(now >= last);
            last = now;
        }
    }

    #[test]
    fn same_seed_same_trace() {
        let b = bands();
        let cfg = GaConfig {
            generations: 20,
            ..Default::default()
        };
        let fit = |x: &[f64]| {
            Ok(x.iter()
                .enumerate()
                .map(|(i, v)| v * (i as f64 - 11.5))
                .sum::<f64>())
        };
        let r1 = ga_optimize(fit, &b, &cfg, stream_rng(5, 2)).unwrap();
        let r2 = ga_optimize(fit, &b, &cfg, stream_rng(5, 2)).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn monotone_fitness_hits_ceiling_immediately() {
        let b = bands();
        let fit = |x: &[f64]| Ok(x.iter().sum::<f64>());
        let r = ga_optimize(
            fit,
            &b,
            &GaConfig {
                generations: 1,
                ..Default::default()
            },
            stream_rng(0, 0),
        )
        .unwrap();
        assert!(r.best.iter().zip(&b).all(|(g, band)| *g == band.max));
    }
}
