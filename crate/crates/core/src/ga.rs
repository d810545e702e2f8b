//! Genetic-algorithm wavelength selection scored by PLSR leave-one-out
//! RMSECV on the calibration set.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chemometrics::select_lv_loocv;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-gene flip probability; `None` means `1 / B`.
    pub mutation_rate: Option<f64>,
    pub tournament_size: usize,
    pub elitism: usize,
    /// Exact number of selected bands, or `None` for free-size selection
    /// with a per-band `size_penalty`.
    pub target_k: Option<usize>,
    pub size_penalty: f64,
    pub inner_max_lv: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 50,
            generations: 100,
            crossover_rate: 0.8,
            mutation_rate: None,
            tournament_size: 3,
            elitism: 2,
            target_k: Some(15),
            size_penalty: 0.0,
            inner_max_lv: 10,
            seed: 1,
        }
    }
}

impl GaConfig {
    pub fn validate(&self, bands: usize) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("GA: {m}")));
        if self.population < 4 || self.population % 2 != 0 {
            return bad(format!("population must be even and >= 4, got {}", self.population));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad(format!("crossover_rate {} not in [0, 1]", self.crossover_rate));
        }
        if let Some(m) = self.mutation_rate {
            if !(0.0..=1.0).contains(&m) {
                return bad(format!("mutation_rate {m} not in [0, 1]"));
            }
        }
        if self.elitism >= self.population {
            return bad("elitism must be smaller than the population".into());
        }
        if self.tournament_size == 0 {
            return bad("tournament_size must be >= 1".into());
        }
        if self.inner_max_lv == 0 {
            return bad("inner_max_lv must be >= 1".into());
        }
        if let Some(k) = self.target_k {
            if k == 0 || k > bands {
                return bad(format!("target_k {k} outside 1..={bands}"));
            }
        }
        if !(self.size_penalty >= 0.0) {
            return bad("size_penalty must be >= 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub genes: Vec<bool>,
    /// RMSECV (plus size penalty in free-size mode); lower is better.
    pub fitness: f64,
}

impl Chromosome {
    pub fn selected(&self) -> Vec<usize> {
        selected_indices(&self.genes)
    }
}

pub fn selected_indices(genes: &[bool]) -> Vec<usize> {
    genes.iter().enumerate().filter(|(_, &g)| g).map(|(i, _)| i).collect()
}

/// Minimum RMSECV over `1..=min(inner_max_lv, k, n - 2)` latent variables on
/// the selected columns. Rank-deficient subsets score `+inf`.
pub fn fitness(genes: &[bool], x: &Matrix, y: &[f64], config: &GaConfig) -> f64 {
    let cols = selected_indices(genes);
    if cols.is_empty() {
        return f64::INFINITY;
    }
    let k = cols.len();
    let max_lv = config.inner_max_lv.min(k).min(x.rows().saturating_sub(2));
    if max_lv == 0 {
        return f64::INFINITY;
    }
    let sub = x.select_cols(&cols);
    let rmsecv = match select_lv_loocv(&sub, y, max_lv) {
        Ok(sel) => sel.rmsecv.into_iter().fold(f64::INFINITY, f64::min),
        Err(_) => f64::INFINITY,
    };
    if config.target_k.is_none() {
        rmsecv + config.size_penalty * k as f64
    } else {
        rmsecv
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaResult {
    pub selected_indices: Vec<usize>,
    pub selected_wavelengths: Vec<f64>,
    pub best: Chromosome,
    /// Best fitness seen so far, after initialisation and after each
    /// generation (`generations + 1` entries).
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

struct Evaluator<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    config: &'a GaConfig,
    memo: HashMap<Vec<bool>, f64>,
}

impl Evaluator<'_> {
    fn evaluate(&mut self, population: &[Vec<bool>]) -> Vec<f64> {
        let mut fresh: Vec<&Vec<bool>> = Vec::new();
        for g in population {
            if !self.memo.contains_key(g) && !fresh.contains(&g) {
                fresh.push(g);
            }
        }
        let scores: Vec<f64> = fresh
            .par_iter()
            .map(|g| fitness(g, self.x, self.y, self.config))
            .collect();
        for (g, s) in fresh.into_iter().zip(scores) {
            self.memo.insert(g.clone(), s);
        }
        population.iter().map(|g| self.memo[g]).collect()
    }
}

fn repair(genes: &mut [bool], target_k: Option<usize>, rng: &mut ChaCha8Rng) {
    let b = genes.len();
    let want = target_k.unwrap_or(1);
    let mut count = genes.iter().filter(|&&g| g).count();
    match target_k {
        Some(k) => {
            while count > k {
                let on: Vec<usize> = selected_indices(genes);
                genes[on[rng.gen_range(0..on.len())]] = false;
                count -= 1;
            }
            while count < k {
                let off: Vec<usize> = (0..b).filter(|&i| !genes[i]).collect();
                genes[off[rng.gen_range(0..off.len())]] = true;
                count += 1;
            }
        }
        None => {
            if count < want {
                genes[rng.gen_range(0..b)] = true;
            }
        }
    }
}

fn tournament(fitness: &[f64], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut best = rng.gen_range(0..fitness.len());
    for _ in 1..size {
        let c = rng.gen_range(0..fitness.len());
        if fitness[c] < fitness[best] {
            best = c;
        }
    }
    best
}

pub fn ga_select(x: &Matrix, y: &[f64], wavelengths: &[f64], config: &GaConfig) -> Result<GaResult> {
    let (n, b) = (x.rows(), x.cols());
    if n < 10 || b < 4 {
        return Err(Error::InvalidArgument(format!(
            "GA needs n >= 10 and B >= 4, got n = {n}, B = {b}"
        )));
    }
    if y.len() != n || wavelengths.len() != b {
        return Err(Error::ShapeMismatch(format!(
            "X is {n}x{b}, y has {}, wavelengths {}",
            y.len(),
            wavelengths.len()
        )));
    }
    config.validate(b)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mutation = config.mutation_rate.unwrap_or(1.0 / b as f64);
    let init_p = config.target_k.map_or(0.5, |k| k as f64 / b as f64);
    let mut eval = Evaluator {
        x,
        y,
        config,
        memo: HashMap::new(),
    };

    let mut population: Vec<Vec<bool>> = (0..config.population)
        .map(|_| {
            let mut g: Vec<bool> = (0..b).map(|_| rng.gen_bool(init_p)).collect();
            repair(&mut g, config.target_k, &mut rng);
            g
        })
        .collect();
    let mut scores = eval.evaluate(&population);

    let argmin = |s: &[f64]| (0..s.len()).fold(0, |best, i| if s[i] < s[best] { i } else { best });
    let i0 = argmin(&scores);
    let mut best = Chromosome {
        genes: population[i0].clone(),
        fitness: scores[i0],
    };
    let mut trace = vec![best.fitness];

    for _ in 0..config.generations {
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        let mut next: Vec<Vec<bool>> = order[..config.elitism].iter().map(|&i| population[i].clone()).collect();

        while next.len() < config.population {
            let a = &population[tournament(&scores, config.tournament_size, &mut rng)];
            let c = &population[tournament(&scores, config.tournament_size, &mut rng)];
            let (mut child1, mut child2) = (a.clone(), c.clone());
            if rng.gen_bool(config.crossover_rate) {
                for j in 0..b {
                    if rng.gen_bool(0.5) {
                        child1[j] = c[j];
                        child2[j] = a[j];
                    }
                }
            }
            for child in [&mut child1, &mut child2] {
                for gene in child.iter_mut() {
                    if rng.gen_bool(mutation) {
                        *gene = !*gene;
                    }
                }
                repair(child, config.target_k, &mut rng);
            }
            next.push(child1);
            if next.len() < config.population {
                next.push(child2);
            }
        }

        population = next;
        scores = eval.evaluate(&population);
        let i = argmin(&scores);
        if scores[i] < best.fitness {
            best = Chromosome {
                genes: population[i].clone(),
                fitness: scores[i],
            };
        }
        trace.push(best.fitness);
    }

    let selected_indices = best.selected();
    Ok(GaResult {
        selected_wavelengths: selected_indices.iter().map(|&i| wavelengths[i]).collect(),
        selected_indices,
        best,
        trace,
        evaluations: eval.memo.len(),
    })
}

/// Config plus outcome, as written next to the selection CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaRunRecord {
    pub config: GaConfig,
    pub selected_indices: Vec<usize>,
    pub selected_wavelengths: Vec<f64>,
    pub best_fitness: f64,
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

impl GaRunRecord {
    pub fn new(config: &GaConfig, result: &GaResult) -> Self {
        Self {
            config: config.clone(),
            selected_indices: result.selected_indices.clone(),
            selected_wavelengths: result.selected_wavelengths.clone(),
            best_fitness: result.best.fitness,
            trace: result.trace.clone(),
            evaluations: result.evaluations,
        }
    }
}
