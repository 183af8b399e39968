//! Generational GA loop with soft selection and compactness-based stopping.
//!
//! One generation:
//! 1. fit the selection curve to the current fitness quartiles;
//! 2. admit each member to the parent pool by a Bernoulli draw with its
//!    selection probability (top two by fitness when fewer than two get in);
//! 3. pair the pool uniformly at random and apply point crossover;
//! 4. mutate each offspring locus with the configured rate, then evaluate;
//! 5. refill up to the population size with members resampled from the pool.
//!
//! Continuous runs stop once the bounding-box volume of the better half of
//! the population has not reached a new minimum for `stall_generations`
//! generations; discrete runs stop at an evaluation budget.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::crossover::{conserves_pair_distance, conserves_power_sum, crossover, CrossoverMask};
use crate::error::{Error, Result};
use crate::genospace::{Chromosome, Gene, LocusKind, Metric, Schema};
use crate::objective::Objective;
use crate::selection::{quartiles, CurveFactory, CurveRegistry, CurveSpec, Direction, QuartileSummary};

pub type EngineRng = ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub chromosome: Chromosome,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    members: Vec<Member>,
    generation: u64,
}

impl Population {
    pub fn new(members: Vec<Member>, generation: u64) -> Result<Self> {
        let first = members
            .first()
            .ok_or(Error::EmptyInput("population"))?
            .chromosome
            .schema()
            .clone();
        for m in &members {
            if **m.chromosome.schema() != *first {
                return Err(Error::SchemaMismatch {
                    left: first.id().to_owned(),
                    right: m.chromosome.schema().id().to_owned(),
                });
            }
            if !m.fitness.is_finite() {
                return Err(Error::NonFinite("member fitness"));
            }
        }
        Ok(Population {
            members,
            generation,
        })
    }

    /// Evaluates every chromosome with `objective`.
    pub fn evaluate(
        chromosomes: Vec<Chromosome>,
        objective: &dyn Objective,
        generation: u64,
    ) -> Result<Self> {
        let members = chromosomes
            .into_iter()
            .map(|chromosome| {
                let fitness = checked_eval(objective, &chromosome)?;
                Ok(Member {
                    chromosome,
                    fitness,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(members, generation)
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn schema(&self) -> &Arc<Schema> {
        self.members[0].chromosome.schema()
    }

    pub fn fitnesses(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.fitness).collect()
    }

    /// Member indices ordered best first; ties keep population order.
    pub fn ranked(&self, direction: Direction) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.members.len()).collect();
        idx.sort_by(|&a, &b| {
            direction
                .best_first(self.members[a].fitness, self.members[b].fitness)
                .then(a.cmp(&b))
        });
        idx
    }

    pub fn best(&self, direction: Direction) -> &Member {
        &self.members[self.ranked(direction)[0]]
    }
}

fn checked_eval(objective: &dyn Objective, c: &Chromosome) -> Result<f64> {
    let f = objective.evaluate(c)?;
    if f.is_finite() {
        Ok(f)
    } else {
        Err(Error::Objective {
            name: objective.name().to_owned(),
            reason: format!("non-finite fitness {f}"),
        })
    }
}

/// Product over loci of the `max - min` extent of the best
/// `max(2, ceil(n/2))` members (all of them when `n < 2`). Real schemas only.
pub fn better_half_volume(pop: &Population, direction: Direction) -> Result<f64> {
    let schema = pop.schema();
    if !schema.is_continuous() {
        return Err(Error::NotApplicable(format!(
            "better-half volume needs an all-real schema, `{}` is not",
            schema.id()
        )));
    }
    let half = pop.len().div_ceil(2).max(2).min(pop.len());
    let best = &pop.ranked(direction)[..half];
    let mut volume = 1.0;
    for locus in 0..schema.len() {
        let (lo, hi) = best
            .iter()
            .map(|&i| pop.members[i].chromosome.genes()[locus].as_f64())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        volume *= hi - lo;
    }
    Ok(volume)
}

/// `ceil(n^(3/2) * ln n)`.
pub fn default_evaluation_budget(bits: usize) -> u64 {
    let n = bits as f64;
    (n.powf(1.5) * n.ln()).ceil().max(0.0) as u64
}

/// Bits needed to encode a discrete schema: one per bit locus,
/// `ceil(log2(max - min + 1))` per integer locus.
pub fn encoded_bits(schema: &Schema) -> usize {
    schema
        .loci()
        .iter()
        .map(|l| match *l {
            LocusKind::Bit => 1,
            LocusKind::Integer { min, max } => {
                let span = (i128::from(max) - i128::from(min)) as u128 + 1;
                (128 - (span - 1).leading_zeros() as usize).max(1)
            }
            LocusKind::Real { .. } => 0,
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MaskPolicy {
    #[default]
    SinglePoint,
    KPoint {
        k: usize,
    },
}

impl MaskPolicy {
    fn cuts(self) -> usize {
        match self {
            MaskPolicy::SinglePoint => 1,
            MaskPolicy::KPoint { k } => k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub population_size: usize,
    pub curve: CurveSpec,
    /// Overrides the objective's own direction.
    pub direction: Option<Direction>,
    pub mask: MaskPolicy,
    pub mutation_rate: f64,
    pub max_generations: u64,
    pub stall_generations: u64,
    /// Discrete schemas only; defaults to [`default_evaluation_budget`].
    pub evaluation_budget: Option<u64>,
    pub elitism: bool,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            population_size: 50,
            curve: CurveSpec::named("arctan"),
            direction: None,
            mask: MaskPolicy::SinglePoint,
            mutation_rate: 0.0,
            max_generations: 1000,
            stall_generations: 10,
            evaluation_budget: None,
            elitism: false,
            seed: 0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.population_size < 2 {
            return bad(format!("population_size {} < 2", self.population_size));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad(format!("mutation_rate {} outside [0, 1]", self.mutation_rate));
        }
        if self.stall_generations < 1 {
            return bad("stall_generations must be >= 1".into());
        }
        if self.max_generations < 1 {
            return bad("max_generations must be >= 1".into());
        }
        if self.mask.cuts() == 0 {
            return bad("k-point crossover needs k >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: u64,
    pub best_fitness: f64,
    pub median_fitness: f64,
    pub best_so_far_fitness: f64,
    pub quartiles: QuartileSummary,
    /// `None` on schemas with non-real loci.
    pub better_half_volume: Option<f64>,
    pub evaluations: u64,
    /// Size of the parent pool that produced this generation (0 for the
    /// initial one).
    pub parent_pool_size: usize,
    /// Mean fitness of that pool.
    pub parent_pool_mean_fitness: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Stall,
    EvaluationBudget,
    MaxGenerations,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::Stall => "stall",
            StopReason::EvaluationBudget => "evaluation-budget",
            StopReason::MaxGenerations => "max-generations",
        })
    }
}

/// Decides after each generation whether the run is over.
pub trait StoppingRule: Send {
    fn name(&self) -> &'static str;

    fn check(&mut self, stats: &GenerationStats) -> Option<StopReason>;
}

/// Stops when the better-half volume has not set a new minimum for
/// `patience` consecutive generations.
#[derive(Debug, Clone)]
pub struct CompactnessStall {
    patience: u64,
    best: Option<f64>,
    since_improvement: u64,
}

impl CompactnessStall {
    pub fn new(patience: u64) -> Self {
        CompactnessStall {
            patience,
            best: None,
            since_improvement: 0,
        }
    }
}

impl StoppingRule for CompactnessStall {
    fn name(&self) -> &'static str {
        "compactness-stall"
    }

    fn check(&mut self, stats: &GenerationStats) -> Option<StopReason> {
        let volume = stats.better_half_volume?;
        match self.best {
            Some(best) if volume >= best => self.since_improvement += 1,
            _ => {
                self.best = Some(volume);
                self.since_improvement = 0;
            }
        }
        (self.since_improvement >= self.patience).then_some(StopReason::Stall)
    }
}

#[derive(Debug, Clone)]
pub struct EvaluationBudget(pub u64);

impl StoppingRule for EvaluationBudget {
    fn name(&self) -> &'static str {
        "evaluation-budget"
    }

    fn check(&mut self, stats: &GenerationStats) -> Option<StopReason> {
        (stats.evaluations >= self.0).then_some(StopReason::EvaluationBudget)
    }
}

#[derive(Debug, Clone)]
pub struct MaxGenerations(pub u64);

impl StoppingRule for MaxGenerations {
    fn name(&self) -> &'static str {
        "max-generations"
    }

    fn check(&mut self, stats: &GenerationStats) -> Option<StopReason> {
        (stats.generation >= self.0).then_some(StopReason::MaxGenerations)
    }
}

/// Draws initial chromosomes.
pub trait Initializer {
    fn sample(&mut self, schema: &Arc<Schema>, rng: &mut EngineRng) -> Result<Chromosome>;
}

/// Uniform within the schema bounds.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformInitializer;

impl Initializer for UniformInitializer {
    fn sample(&mut self, schema: &Arc<Schema>, rng: &mut EngineRng) -> Result<Chromosome> {
        Ok(Chromosome::random(schema, rng))
    }
}

impl<F> Initializer for F
where
    F: FnMut(&Arc<Schema>, &mut EngineRng) -> Result<Chromosome>,
{
    fn sample(&mut self, schema: &Arc<Schema>, rng: &mut EngineRng) -> Result<Chromosome> {
        self(schema, rng)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub best: Member,
    pub history: Vec<GenerationStats>,
    pub stop_reason: StopReason,
}

impl RunOutcome {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "stop_reason": self.stop_reason,
            "best": {
                "fitness": self.best.fitness,
                "chromosome": self.best.chromosome.to_json(),
            },
            "history": self.history,
        })
    }
}

/// Owns the RNG, the curve factory and the evaluation counter of one run.
pub struct Engine<'a> {
    cfg: EngineConfig,
    objective: &'a dyn Objective,
    factory: Box<dyn CurveFactory>,
    direction: Direction,
    rng: EngineRng,
    evaluations: u64,
    budget: Option<u64>,
    best_so_far: Option<Member>,
}

impl<'a> Engine<'a> {
    pub fn new(cfg: EngineConfig, objective: &'a dyn Objective) -> Result<Self> {
        Self::with_registry(cfg, objective, &CurveRegistry::builtin())
    }

    pub fn with_registry(
        cfg: EngineConfig,
        objective: &'a dyn Objective,
        registry: &CurveRegistry,
    ) -> Result<Self> {
        cfg.validate()?;
        let schema = objective.schema();
        if schema.len() < 2 {
            return Err(Error::InvalidConfig(
                "crossover needs chromosomes with at least 2 loci".into(),
            ));
        }
        if cfg.mask.cuts() > schema.len() - 1 {
            return Err(Error::InvalidConfig(format!(
                "{} cut points do not fit {} loci",
                cfg.mask.cuts(),
                schema.len()
            )));
        }
        let budget = if schema.is_discrete() {
            let budget = cfg
                .evaluation_budget
                .unwrap_or_else(|| default_evaluation_budget(encoded_bits(schema)));
            if (cfg.population_size as u64) > budget {
                return Err(Error::InvalidConfig(format!(
                    "population_size {} exceeds the evaluation budget {budget}",
                    cfg.population_size
                )));
            }
            Some(budget)
        } else {
            None
        };
        Ok(Engine {
            factory: registry.build(&cfg.curve)?,
            direction: cfg.direction.unwrap_or_else(|| objective.direction()),
            rng: EngineRng::seed_from_u64(cfg.seed),
            evaluations: 0,
            budget,
            best_so_far: None,
            objective,
            cfg,
        })
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Evaluation budget in force, for discrete schemas.
    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    /// Draws and evaluates the initial population.
    pub fn initialize(&mut self, init: &mut dyn Initializer) -> Result<(Population, GenerationStats)> {
        let schema = Arc::clone(self.objective.schema());
        let chromosomes = (0..self.cfg.population_size)
            .map(|_| {
                let c = init.sample(&schema, &mut self.rng)?;
                if c.schema() != &schema {
                    return Err(Error::SchemaMismatch {
                        left: c.schema().id().to_owned(),
                        right: schema.id().to_owned(),
                    });
                }
                Ok(c)
            })
            .collect::<Result<Vec<_>>>()?;
        let pop = Population::evaluate(chromosomes, self.objective, 0)?;
        self.evaluations += pop.len() as u64;
        self.track_best(pop.members());
        let stats = self.stats(&pop, 0, None)?;
        Ok((pop, stats))
    }

    fn track_best(&mut self, members: &[Member]) {
        for m in members {
            let better = match &self.best_so_far {
                None => true,
                Some(b) => self.direction.better(m.fitness, b.fitness),
            };
            if better {
                self.best_so_far = Some(m.clone());
            }
        }
    }

    fn stats(&self, pop: &Population, pool_size: usize, pool_mean: Option<f64>) -> Result<GenerationStats> {
        let q = quartiles(&pop.fitnesses())?;
        let volume = if pop.schema().is_continuous() {
            Some(better_half_volume(pop, self.direction)?)
        } else {
            None
        };
        Ok(GenerationStats {
            generation: pop.generation(),
            best_fitness: pop.best(self.direction).fitness,
            median_fitness: q.median,
            best_so_far_fitness: self
                .best_so_far
                .as_ref()
                .map_or(f64::NAN, |m| m.fitness),
            quartiles: q,
            better_half_volume: volume,
            evaluations: self.evaluations,
            parent_pool_size: pool_size,
            parent_pool_mean_fitness: pool_mean,
        })
    }

    fn parent_pool(&mut self, pop: &Population) -> Result<Vec<usize>> {
        let curve = self.factory.fit(&pop.fitnesses(), self.direction)?;
        let mut pool = Vec::with_capacity(pop.len());
        for (i, m) in pop.members().iter().enumerate() {
            let p = curve.select_probability(m.fitness)?;
            if self.rng.random::<f64>() < p {
                pool.push(i);
            }
        }
        if pool.len() < 2 {
            pool = pop.ranked(self.direction)[..2].to_vec();
        }
        Ok(pool)
    }

    fn mutate(&mut self, genes: &mut [Gene], loci: &[LocusKind]) {
        if self.cfg.mutation_rate == 0.0 {
            return;
        }
        for (gene, locus) in genes.iter_mut().zip(loci) {
            if self.rng.random::<f64>() < self.cfg.mutation_rate {
                *gene = match (*gene, locus) {
                    (Gene::Bit(b), _) => Gene::Bit(!b),
                    (_, kind) => kind.sample(&mut self.rng),
                };
            }
        }
    }

    /// Verifies the crossover identities on one offspring pair before
    /// mutation, with the best current member as reference.
    fn check_pair(
        &self,
        parents: (&Chromosome, &Chromosome),
        offspring: (&Chromosome, &Chromosome),
        reference: &Chromosome,
    ) -> Result<()> {
        let metric = if parents.0.schema().is_discrete() {
            Metric::Hamming
        } else {
            Metric::Lp(2)
        };
        let distance_ok = conserves_pair_distance(parents, offspring, metric)?;
        let sum_ok = conserves_power_sum(parents, offspring, reference, 1)?
            && conserves_power_sum(parents, offspring, reference, 2)?;
        if distance_ok && sum_ok {
            Ok(())
        } else {
            Err(Error::InvariantViolation(format!(
                "crossover broke conservation (distance ok: {distance_ok}, power sums ok: {sum_ok})"
            )))
        }
    }

    /// Produces the next generation from `pop`.
    pub fn step(&mut self, pop: &Population) -> Result<(Population, GenerationStats)> {
        let schema = Arc::clone(pop.schema());
        let pool = self.parent_pool(pop)?;
        let pool_mean =
            pool.iter().map(|&i| pop.members()[i].fitness).sum::<f64>() / pool.len() as f64;

        let mut order = pool.clone();
        order.shuffle(&mut self.rng);
        let reference = pop.best(self.direction).chromosome.clone();
        let remaining = self.budget.map(|b| b.saturating_sub(self.evaluations));
        let mut offspring_genes = Vec::with_capacity(pool.len());
        for (pair_index, pair) in order.chunks_exact(2).enumerate() {
            let (pa, pb) = (&pop.members()[pair[0]].chromosome, &pop.members()[pair[1]].chromosome);
            let mask = CrossoverMask::random(schema.len(), self.cfg.mask.cuts(), &mut self.rng)?;
            let (oa, ob) = crossover(pa, pb, &mask)?;
            if pair_index == 0 {
                self.check_pair((pa, pb), (&oa, &ob), &reference)?;
            }
            for child in [oa, ob] {
                let mut genes = child.genes().to_vec();
                self.mutate(&mut genes, schema.loci());
                offspring_genes.push(genes);
            }
        }
        if let Some(left) = remaining {
            offspring_genes.truncate(left.min(usize::MAX as u64) as usize);
        }

        let mut next = Vec::with_capacity(self.cfg.population_size);
        if self.cfg.elitism {
            next.push(pop.best(self.direction).clone());
        }
        let mut evaluated = Vec::with_capacity(offspring_genes.len());
        for genes in offspring_genes {
            let chromosome = Chromosome::new(&schema, genes)?;
            let fitness = checked_eval(self.objective, &chromosome)?;
            self.evaluations += 1;
            evaluated.push(Member {
                chromosome,
                fitness,
            });
        }
        self.track_best(&evaluated);
        next.extend(evaluated);
        next.truncate(self.cfg.population_size);
        while next.len() < self.cfg.population_size {
            let pick = pool[self.rng.random_range(0..pool.len())];
            next.push(pop.members()[pick].clone());
        }

        let next = Population::new(next, pop.generation() + 1)?;
        let stats = self.stats(&next, pool.len(), Some(pool_mean))?;
        Ok((next, stats))
    }

    fn stopping_rules(&self) -> Vec<Box<dyn StoppingRule>> {
        let mut rules: Vec<Box<dyn StoppingRule>> = Vec::new();
        let schema = self.objective.schema();
        if schema.is_continuous() {
            rules.push(Box::new(CompactnessStall::new(self.cfg.stall_generations)));
        }
        if let Some(budget) = self.budget {
            rules.push(Box::new(EvaluationBudget(budget)));
        }
        rules.push(Box::new(MaxGenerations(self.cfg.max_generations)));
        rules
    }

    pub fn best_so_far(&self) -> Option<&Member> {
        self.best_so_far.as_ref()
    }

    /// Runs to completion from a fresh population.
    pub fn run(mut self, init: &mut dyn Initializer) -> Result<RunOutcome> {
        let mut rules = self.stopping_rules();
        let (mut pop, stats) = self.initialize(init)?;
        let mut history = vec![stats];
        let stop_reason = loop {
            let last = history.last().expect("history starts non-empty");
            if let Some(reason) = rules.iter_mut().find_map(|r| r.check(last)) {
                break reason;
            }
            let (next, stats) = self.step(&pop)?;
            pop = next;
            history.push(stats);
        };
        let best = self.best_so_far.take().expect("initial population evaluated");
        Ok(RunOutcome {
            best,
            history,
            stop_reason,
        })
    }
}

/// Convenience wrapper around [`Engine::run`].
pub fn run(
    cfg: EngineConfig,
    objective: &dyn Objective,
    init: &mut dyn Initializer,
) -> Result<RunOutcome> {
    Engine::new(cfg, objective)?.run(init)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genospace::distance;
    use crate::objective::{Flat, OneMax, Sphere};

    fn reals(values: &[&[f64]]) -> Population {
        let schema = Schema::reals(values[0].len(), -10.0, 10.0).unwrap();
        let members = values
            .iter()
            .enumerate()
            .map(|(i, v)| Member {
                chromosome: Chromosome::from_reals(&schema, v).unwrap(),
                fitness: i as f64,
            })
            .collect();
        Population::new(members, 0).unwrap()
    }

    #[test]
    fn volume_examples() {
        let pop = reals(&[&[0.0, 0.0], &[1.0, 2.0]]);
        assert_eq!(better_half_volume(&pop, Direction::Maximize).unwrap(), 2.0);
        let clones = reals(&[&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(better_half_volume(&clones, Direction::Minimize).unwrap(), 0.0);
    }

    #[test]
    fn volume_uses_the_better_half() {
        // fitness = index; maximizing keeps the last two.
        let pop = reals(&[&[-9.0, -9.0], &[0.0, 5.0], &[1.0, 0.0], &[3.0, 1.0]]);
        assert_eq!(better_half_volume(&pop, Direction::Maximize).unwrap(), 2.0);
        assert_eq!(better_half_volume(&pop, Direction::Minimize).unwrap(), 9.0 * 14.0);
    }

    #[test]
    fn volume_rejects_discrete_schemas() {
        let schema = Schema::bits(3).unwrap();
        let c = Chromosome::from_bit_str(&schema, "101").unwrap();
        let pop = Population::new(vec![Member { chromosome: c, fitness: 1.0 }], 0).unwrap();
        assert!(matches!(
            better_half_volume(&pop, Direction::Maximize),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn population_validation() {
        assert!(Population::new(vec![], 0).is_err());
        let a = Chromosome::from_bit_str(&Schema::bits(2).unwrap(), "10").unwrap();
        let b = Chromosome::from_bit_str(&Schema::bits(3).unwrap(), "101").unwrap();
        let mixed = vec![
            Member { chromosome: a.clone(), fitness: 0.0 },
            Member { chromosome: b, fitness: 0.0 },
        ];
        assert!(Population::new(mixed, 0).is_err());
        let nan = vec![Member { chromosome: a, fitness: f64::NAN }];
        assert!(Population::new(nan, 0).is_err());
    }

    #[test]
    fn budget_values() {
        assert_eq!(default_evaluation_budget(10), 73);
        assert_eq!(default_evaluation_budget(4), 12);
        assert_eq!(encoded_bits(&Schema::bits(7).unwrap()), 7);
        assert_eq!(encoded_bits(&Schema::integers(2, 0, 7).unwrap()), 6);
        assert_eq!(encoded_bits(&Schema::integers(1, 0, 8).unwrap()), 4);
        assert_eq!(encoded_bits(&Schema::integers(1, 5, 5).unwrap()), 1);
    }

    #[test]
    fn config_validation() {
        let ok = EngineConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            EngineConfig { population_size: 1, ..ok.clone() },
            EngineConfig { mutation_rate: 1.5, ..ok.clone() },
            EngineConfig { stall_generations: 0, ..ok.clone() },
            EngineConfig { max_generations: 0, ..ok.clone() },
            EngineConfig { mask: MaskPolicy::KPoint { k: 0 }, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
        let sphere = Sphere::new(3).unwrap();
        let too_many_cuts = EngineConfig { mask: MaskPolicy::KPoint { k: 3 }, ..ok.clone() };
        assert!(Engine::new(too_many_cuts, &sphere).is_err());
        let onemax = OneMax::random(10, 0).unwrap();
        let huge = EngineConfig { population_size: 100, ..ok };
        assert!(Engine::new(huge, &onemax).is_err());
    }

    #[test]
    fn clones_without_mutation_stay_clones() {
        let sphere = Sphere::new(3).unwrap();
        let clone = Chromosome::from_reals(sphere.schema(), &[1.0, -2.0, 0.5]).unwrap();
        let cfg = EngineConfig { population_size: 10, ..Default::default() };
        let mut engine = Engine::new(cfg, &sphere).unwrap();
        let c = clone.clone();
        let mut init = move |_: &Arc<Schema>, _: &mut EngineRng| Ok(c.clone());
        let (pop, _) = engine.initialize(&mut init).unwrap();
        let (next, stats) = engine.step(&pop).unwrap();
        assert!(next.members().iter().all(|m| m.chromosome == clone));
        assert_eq!(stats.better_half_volume, Some(0.0));
    }

    #[test]
    fn two_members_conserve_distance() {
        let sphere = Sphere::new(4).unwrap();
        let cfg = EngineConfig { population_size: 2, seed: 17, ..Default::default() };
        let mut engine = Engine::new(cfg, &sphere).unwrap();
        let (pop, _) = engine.initialize(&mut UniformInitializer).unwrap();
        let (next, _) = engine.step(&pop).unwrap();
        let m = Metric::Lp(2);
        let before = distance(&pop.members()[0].chromosome, &pop.members()[1].chromosome, m).unwrap();
        let after = distance(&next.members()[0].chromosome, &next.members()[1].chromosome, m).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn evaluations_grow_by_offspring_count() {
        let sphere = Sphere::new(4).unwrap();
        let cfg = EngineConfig { population_size: 20, seed: 3, ..Default::default() };
        let mut engine = Engine::new(cfg, &sphere).unwrap();
        let (mut pop, stats) = engine.initialize(&mut UniformInitializer).unwrap();
        assert_eq!(stats.evaluations, 20);
        let mut last = stats.evaluations;
        for _ in 0..10 {
            let (next, stats) = engine.step(&pop).unwrap();
            let offspring = 2 * (stats.parent_pool_size as u64 / 2);
            assert_eq!(stats.evaluations - last, offspring);
            last = stats.evaluations;
            pop = next;
        }
    }

    #[test]
    fn flat_clones_stop_after_patience() {
        let flat = Flat::new(Schema::reals(3, -1.0, 1.0).unwrap(), 1.0);
        let cfg = EngineConfig { population_size: 8, stall_generations: 5, ..Default::default() };
        let mut init = |s: &Arc<Schema>, _: &mut EngineRng| Chromosome::from_reals(s, &[0.1, 0.2, 0.3]);
        let out = run(cfg, &flat, &mut init).unwrap();
        assert_eq!(out.stop_reason, StopReason::Stall);
        assert_eq!(out.history.len(), 6);
    }

    #[test]
    fn onemax_stops_at_budget() {
        let onemax = OneMax::random(10, 5).unwrap();
        let cfg = EngineConfig { population_size: 8, seed: 1, ..Default::default() };
        let out = run(cfg, &onemax, &mut UniformInitializer).unwrap();
        let last = out.history.last().unwrap();
        // Stops at the budget unless the generation cap fires first.
        assert_eq!(out.stop_reason, StopReason::EvaluationBudget);
        assert_eq!(last.evaluations, 73);
    }

    #[test]
    fn runs_are_deterministic() {
        let sphere = Sphere::new(4).unwrap();
        let cfg = EngineConfig { population_size: 30, seed: 99, mutation_rate: 0.05, max_generations: 40, ..Default::default() };
        let a = run(cfg.clone(), &sphere, &mut UniformInitializer).unwrap();
        let b = run(cfg, &sphere, &mut UniformInitializer).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.best, b.best);
    }

    #[test]
    fn elitism_keeps_the_best() {
        let sphere = Sphere::new(4).unwrap();
        let cfg = EngineConfig { population_size: 12, seed: 8, elitism: true, mutation_rate: 0.3, ..Default::default() };
        let mut engine = Engine::new(cfg, &sphere).unwrap();
        let (mut pop, _) = engine.initialize(&mut UniformInitializer).unwrap();
        for _ in 0..15 {
            let best = pop.best(Direction::Minimize).fitness;
            let (next, _) = engine.step(&pop).unwrap();
            assert!(next.best(Direction::Minimize).fitness <= best);
            pop = next;
        }
    }

    #[test]
    fn stall_rule_needs_a_new_minimum() {
        let mut rule = CompactnessStall::new(2);
        let stats = |v: f64| GenerationStats {
            generation: 0,
            best_fitness: 0.0,
            median_fitness: 0.0,
            best_so_far_fitness: 0.0,
            quartiles: QuartileSummary::from_quartiles(0.0, 0.0, 0.0).unwrap(),
            better_half_volume: Some(v),
            evaluations: 0,
            parent_pool_size: 0,
            parent_pool_mean_fitness: None,
        };
        assert_eq!(rule.check(&stats(10.0)), None);
        assert_eq!(rule.check(&stats(12.0)), None);
        assert_eq!(rule.check(&stats(9.0)), None);
        assert_eq!(rule.check(&stats(9.5)), None);
        assert_eq!(rule.check(&stats(9.0)), Some(StopReason::Stall));
    }
}
