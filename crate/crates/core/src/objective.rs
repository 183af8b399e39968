//! Objective functions and their name registry.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genospace::{Chromosome, Gene, Schema};
use crate::selection::Direction;

pub trait Objective: Send + Sync {
    fn name(&self) -> &str;

    fn direction(&self) -> Direction;

    fn schema(&self) -> &Arc<Schema>;

    fn evaluate(&self, chromosome: &Chromosome) -> Result<f64>;

    /// A known global optimum, when there is exactly one.
    fn optimum(&self) -> Option<Chromosome> {
        None
    }
}

fn real_values(name: &str, schema: &Arc<Schema>, c: &Chromosome) -> Result<Vec<f64>> {
    if c.schema() != schema {
        return Err(Error::Objective {
            name: name.to_owned(),
            reason: format!("expected schema `{}`, got `{}`", schema.id(), c.schema().id()),
        });
    }
    Ok(c.values())
}

/// `sum x_k^2` on `[-5.12, 5.12]^n`, minimized at the origin.
#[derive(Debug, Clone)]
pub struct Sphere {
    schema: Arc<Schema>,
}

impl Sphere {
    pub const BOUND: f64 = 5.12;

    pub fn new(dimension: usize) -> Result<Self> {
        Ok(Sphere {
            schema: Schema::reals(dimension, -Self::BOUND, Self::BOUND)?,
        })
    }
}

impl Objective for Sphere {
    fn name(&self) -> &str {
        "sphere"
    }

    fn direction(&self) -> Direction {
        Direction::Minimize
    }

    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn evaluate(&self, c: &Chromosome) -> Result<f64> {
        Ok(real_values("sphere", &self.schema, c)?
            .iter()
            .map(|x| x * x)
            .sum())
    }

    fn optimum(&self) -> Option<Chromosome> {
        Chromosome::from_reals(&self.schema, &vec![0.0; self.schema.len()]).ok()
    }
}

/// `min(|x - c|^2, |x + c|^2)` with `c = (2, ..., 2)`: two equal global
/// minima, so a population can split between them and never become compact.
#[derive(Debug, Clone)]
pub struct TwoBasin {
    schema: Arc<Schema>,
}

impl TwoBasin {
    pub const CENTER: f64 = 2.0;
    pub const BOUND: f64 = 5.0;

    pub fn new(dimension: usize) -> Result<Self> {
        Ok(TwoBasin {
            schema: Schema::reals(dimension, -Self::BOUND, Self::BOUND)?,
        })
    }
}

impl Objective for TwoBasin {
    fn name(&self) -> &str {
        "two-basin"
    }

    fn direction(&self) -> Direction {
        Direction::Minimize
    }

    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn evaluate(&self, c: &Chromosome) -> Result<f64> {
        let x = real_values("two-basin", &self.schema, c)?;
        let plus: f64 = x.iter().map(|v| (v - Self::CENTER).powi(2)).sum();
        let minus: f64 = x.iter().map(|v| (v + Self::CENTER).powi(2)).sum();
        Ok(plus.min(minus))
    }
}

/// Number of bits matching a hidden target; maximized at the target.
#[derive(Debug, Clone)]
pub struct OneMax {
    schema: Arc<Schema>,
    target: Vec<bool>,
}

impl OneMax {
    pub fn new(target: Vec<bool>) -> Result<Self> {
        Ok(OneMax {
            schema: Schema::bits(target.len())?,
            target,
        })
    }

    /// Target drawn uniformly from `seed`.
    pub fn random(bits: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new((0..bits).map(|_| rng.random_bool(0.5)).collect())
    }

    pub fn target(&self) -> &[bool] {
        &self.target
    }
}

impl Objective for OneMax {
    fn name(&self) -> &str {
        "onemax"
    }

    fn direction(&self) -> Direction {
        Direction::Maximize
    }

    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn evaluate(&self, c: &Chromosome) -> Result<f64> {
        if c.len() != self.target.len() || c.schema().bit_count().is_none() {
            return Err(Error::Objective {
                name: "onemax".into(),
                reason: format!("expected {} bits", self.target.len()),
            });
        }
        Ok(c.genes()
            .iter()
            .zip(&self.target)
            .filter(|(g, t)| **g == Gene::Bit(**t))
            .count() as f64)
    }

    fn optimum(&self) -> Option<Chromosome> {
        Chromosome::new(&self.schema, self.target.iter().map(|&b| Gene::Bit(b)).collect()).ok()
    }
}

/// Same value everywhere.
#[derive(Debug, Clone)]
pub struct Flat {
    schema: Arc<Schema>,
    value: f64,
}

impl Flat {
    pub fn new(schema: Arc<Schema>, value: f64) -> Self {
        Flat { schema, value }
    }
}

impl Objective for Flat {
    fn name(&self) -> &str {
        "flat"
    }

    fn direction(&self) -> Direction {
        Direction::Maximize
    }

    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn evaluate(&self, _c: &Chromosome) -> Result<f64> {
        Ok(self.value)
    }
}

/// Objective selection as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    pub name: String,
    pub dimension: usize,
    /// Seeds randomized objectives (the OneMax target).
    #[serde(default)]
    pub seed: u64,
}

type ObjectiveCtor = fn(&ObjectiveSpec) -> Result<Box<dyn Objective>>;

pub struct ObjectiveRegistry {
    entries: BTreeMap<String, ObjectiveCtor>,
}

impl ObjectiveRegistry {
    /// `sphere`, `two-basin`, `onemax`, `flat` (real schema on [-1, 1]).
    pub fn builtin() -> Self {
        let mut registry = ObjectiveRegistry {
            entries: BTreeMap::new(),
        };
        registry.register("sphere", |s| Ok(Box::new(Sphere::new(s.dimension)?)));
        registry.register("two-basin", |s| Ok(Box::new(TwoBasin::new(s.dimension)?)));
        registry.register("onemax", |s| Ok(Box::new(OneMax::random(s.dimension, s.seed)?)));
        registry.register("flat", |s| {
            Ok(Box::new(Flat::new(Schema::reals(s.dimension, -1.0, 1.0)?, 0.0)))
        });
        registry
    }

    pub fn register(&mut self, name: &str, ctor: ObjectiveCtor) {
        self.entries.insert(name.to_owned(), ctor);
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn build(&self, spec: &ObjectiveSpec) -> Result<Box<dyn Objective>> {
        let ctor = self.entries.get(&spec.name).ok_or_else(|| Error::UnknownName {
            kind: "objective",
            name: spec.name.clone(),
            known: self.names().join(", "),
        })?;
        ctor(spec)
    }
}

impl Default for ObjectiveRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_values() {
        let s = Sphere::new(2).unwrap();
        let c = Chromosome::from_reals(s.schema(), &[3.0, -4.0]).unwrap();
        assert_eq!(s.evaluate(&c).unwrap(), 25.0);
        assert_eq!(s.evaluate(&s.optimum().unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn two_basin_has_two_zeros() {
        let t = TwoBasin::new(3).unwrap();
        for v in [2.0, -2.0] {
            let c = Chromosome::from_reals(t.schema(), &[v; 3]).unwrap();
            assert_eq!(t.evaluate(&c).unwrap(), 0.0);
        }
        let mid = Chromosome::from_reals(t.schema(), &[0.0; 3]).unwrap();
        assert_eq!(t.evaluate(&mid).unwrap(), 12.0);
    }

    #[test]
    fn onemax_counts_matches() {
        let o = OneMax::new(vec![true, false, true]).unwrap();
        let c = Chromosome::from_bit_str(o.schema(), "100").unwrap();
        assert_eq!(o.evaluate(&c).unwrap(), 2.0);
        assert_eq!(o.evaluate(&o.optimum().unwrap()).unwrap(), 3.0);
        let wrong = Chromosome::from_bit_str(&Schema::bits(2).unwrap(), "10").unwrap();
        assert!(o.evaluate(&wrong).is_err());
        assert_eq!(OneMax::random(12, 4).unwrap().target(), OneMax::random(12, 4).unwrap().target());
    }

    #[test]
    fn registry_lookup() {
        let reg = ObjectiveRegistry::builtin();
        let spec = ObjectiveSpec { name: "onemax".into(), dimension: 8, seed: 1 };
        let o = reg.build(&spec).unwrap();
        assert_eq!(o.schema().len(), 8);
        let bad = ObjectiveSpec { name: "rastrigin".into(), ..spec };
        assert!(matches!(reg.build(&bad), Err(Error::UnknownName { .. })));
    }
}
