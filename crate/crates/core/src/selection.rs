//! Fitness-to-probability maps ("selection curves").
//!
//! A [`SelectionCurve`] turns a fitness value into the probability that the
//! individual is admitted for reproduction. Soft curves are strictly
//! increasing (in the maximizing direction) and never return exactly 0 or 1;
//! hard curves are step functions.
//!
//! Curves that depend on the population (quartile scalings, adaptive
//! thresholds) are produced by a [`CurveFactory`], refitted every generation.
//! Factories are looked up by name in a [`CurveRegistry`].

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest probability a soft curve may return; `1 - SOFT_FLOOR` is the
/// largest.
pub const SOFT_FLOOR: f64 = f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Maximize,
    Minimize,
}

impl Direction {
    /// True when `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Maximize => a > b,
            Direction::Minimize => a < b,
        }
    }

    /// Ordering that sorts best first.
    pub fn best_first(self, a: f64, b: f64) -> std::cmp::Ordering {
        match self {
            Direction::Maximize => b.total_cmp(&a),
            Direction::Minimize => a.total_cmp(&b),
        }
    }

    fn sign(self) -> f64 {
        match self {
            Direction::Maximize => 1.0,
            Direction::Minimize => -1.0,
        }
    }
}

/// Lower quartile, median and upper quartile of a fitness sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuartileSummary {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// `q3 - q1`, or 1 when that is zero.
    pub denom: f64,
}

impl QuartileSummary {
    pub fn from_quartiles(q1: f64, median: f64, q3: f64) -> Result<Self> {
        if !(q1.is_finite() && median.is_finite() && q3.is_finite()) {
            return Err(Error::NonFinite("quartile"));
        }
        if !(q1 <= median && median <= q3) {
            return Err(Error::InvalidConfig(format!(
                "quartiles out of order: {q1}, {median}, {q3}"
            )));
        }
        let spread = q3 - q1;
        Ok(QuartileSummary {
            q1,
            median,
            q3,
            denom: if spread == 0.0 { 1.0 } else { spread },
        })
    }

    fn scaled(&self, fitness: f64, direction: Direction) -> f64 {
        direction.sign() * 2.0 * (fitness - self.median) / self.denom
    }
}

/// Quantile of sorted data by linear interpolation between order
/// statistics at position `q * (n - 1)`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quartiles(fitnesses: &[f64]) -> Result<QuartileSummary> {
    if fitnesses.is_empty() {
        return Err(Error::EmptyInput("fitness list"));
    }
    if fitnesses.iter().any(|f| !f.is_finite()) {
        return Err(Error::NonFinite("fitness"));
    }
    let mut sorted = fitnesses.to_vec();
    sorted.sort_by(f64::total_cmp);
    QuartileSummary::from_quartiles(
        quantile_sorted(&sorted, 0.25),
        quantile_sorted(&sorted, 0.5),
        quantile_sorted(&sorted, 0.75),
    )
}

fn finite(fitness: f64) -> Result<f64> {
    if fitness.is_finite() {
        Ok(fitness)
    } else {
        Err(Error::NonFinite("fitness"))
    }
}

fn soft(p: f64) -> f64 {
    p.clamp(SOFT_FLOOR, 1.0 - SOFT_FLOOR)
}

/// A monotone map from fitness to selection probability.
pub trait SelectionCurve: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn select_probability(&self, fitness: f64) -> Result<f64>;

    /// Strictly monotone with values in the open interval (0, 1).
    fn is_soft(&self) -> bool {
        false
    }
}

/// `1/2 ± (1/π)·atan(2(k - median)/denom)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArctanCurve {
    pub summary: QuartileSummary,
    pub direction: Direction,
}

impl SelectionCurve for ArctanCurve {
    fn name(&self) -> &'static str {
        "arctan"
    }

    fn select_probability(&self, fitness: f64) -> Result<f64> {
        let x = self.summary.scaled(finite(fitness)?, self.direction);
        Ok(soft(0.5 + FRAC_1_PI * x.atan()))
    }

    fn is_soft(&self) -> bool {
        true
    }
}

/// `1/2 ± (1/2)·tanh(2(k - median)/denom)`; steeper than [`ArctanCurve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TanhCurve {
    pub summary: QuartileSummary,
    pub direction: Direction,
}

impl SelectionCurve for TanhCurve {
    fn name(&self) -> &'static str {
        "tanh"
    }

    fn select_probability(&self, fitness: f64) -> Result<f64> {
        let x = self.summary.scaled(finite(fitness)?, self.direction);
        Ok(soft(0.5 + 0.5 * x.tanh()))
    }

    fn is_soft(&self) -> bool {
        true
    }
}

/// Step function: 0 strictly below the threshold, 1 at or above it
/// (mirrored when minimizing).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardThreshold {
    pub threshold: f64,
    pub direction: Direction,
}

impl HardThreshold {
    pub fn new(threshold: f64) -> Result<Self> {
        if !threshold.is_finite() {
            return Err(Error::NonFinite("threshold"));
        }
        Ok(HardThreshold {
            threshold,
            direction: Direction::Maximize,
        })
    }
}

impl SelectionCurve for HardThreshold {
    fn name(&self) -> &'static str {
        "hard"
    }

    fn select_probability(&self, fitness: f64) -> Result<f64> {
        let k = finite(fitness)?;
        let admitted = match self.direction {
            Direction::Maximize => k >= self.threshold,
            Direction::Minimize => k <= self.threshold,
        };
        Ok(if admitted { 1.0 } else { 0.0 })
    }
}

/// `c_k = 1/2 + atan(k)/π`, independent of the population.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArctanSequence;

impl SelectionCurve for ArctanSequence {
    fn name(&self) -> &'static str {
        "arctan-sequence"
    }

    fn select_probability(&self, fitness: f64) -> Result<f64> {
        Ok(soft(0.5 + FRAC_1_PI * finite(fitness)?.atan()))
    }

    fn is_soft(&self) -> bool {
        true
    }
}

/// A finite table `k -> c_k` over integer keys.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitSequence {
    values: BTreeMap<i64, f64>,
}

impl ExplicitSequence {
    /// The table must be strictly increasing in `k` with values in (0, 1).
    pub fn new(values: BTreeMap<i64, f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("explicit sequence"));
        }
        if values.values().any(|&c| !(c > 0.0 && c < 1.0)) {
            return Err(Error::InvalidConfig(
                "explicit sequence values must lie in (0, 1)".into(),
            ));
        }
        let ordered: Vec<f64> = values.values().copied().collect();
        if ordered.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "explicit sequence must be strictly increasing".into(),
            ));
        }
        Ok(ExplicitSequence { values })
    }

    /// Tabulates `f` on `lo..=hi`.
    pub fn tabulate(lo: i64, hi: i64, f: impl Fn(i64) -> f64) -> Result<Self> {
        Self::new((lo..=hi).map(|k| (k, f(k))).collect())
    }
}

impl SelectionCurve for ExplicitSequence {
    fn name(&self) -> &'static str {
        "explicit"
    }

    fn select_probability(&self, fitness: f64) -> Result<f64> {
        let k = finite(fitness)?;
        if k.fract() != 0.0 || k.abs() > i64::MAX as f64 {
            return Err(Error::NotInSupport { value: k });
        }
        self.values
            .get(&(k as i64))
            .copied()
            .ok_or(Error::NotInSupport { value: k })
    }

    fn is_soft(&self) -> bool {
        true
    }
}

/// A flat curve; useful as a control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantCurve(f64);

impl ConstantCurve {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(ConstantCurve(value))
        } else {
            Err(Error::InvalidConfig(format!(
                "constant probability {value} outside [0, 1]"
            )))
        }
    }
}

impl SelectionCurve for ConstantCurve {
    fn name(&self) -> &'static str {
        "constant"
    }

    fn select_probability(&self, fitness: f64) -> Result<f64> {
        finite(fitness)?;
        Ok(self.0)
    }
}

/// Which average an adaptive threshold uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Average {
    #[default]
    Mean,
    Median,
}

/// Hard threshold at the arithmetic mean of `fitnesses`.
pub fn adaptive_threshold(fitnesses: &[f64]) -> Result<HardThreshold> {
    adaptive_threshold_with(fitnesses, Average::Mean, Direction::Maximize)
}

pub fn adaptive_threshold_with(
    fitnesses: &[f64],
    average: Average,
    direction: Direction,
) -> Result<HardThreshold> {
    if fitnesses.is_empty() {
        return Err(Error::EmptyInput("fitness list"));
    }
    let threshold = match average {
        Average::Mean => fitnesses.iter().sum::<f64>() / fitnesses.len() as f64,
        Average::Median => quartiles(fitnesses)?.median,
    };
    Ok(HardThreshold {
        threshold: finite(threshold)?,
        direction,
    })
}

/// Builds a [`SelectionCurve`] from the current generation's fitnesses.
pub trait CurveFactory: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn fit(&self, fitnesses: &[f64], direction: Direction) -> Result<Box<dyn SelectionCurve>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ArctanFactory;

impl CurveFactory for ArctanFactory {
    fn name(&self) -> &'static str {
        "arctan"
    }

    fn fit(&self, fitnesses: &[f64], direction: Direction) -> Result<Box<dyn SelectionCurve>> {
        Ok(Box::new(ArctanCurve {
            summary: quartiles(fitnesses)?,
            direction,
        }))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TanhFactory;

impl CurveFactory for TanhFactory {
    fn name(&self) -> &'static str {
        "tanh"
    }

    fn fit(&self, fitnesses: &[f64], direction: Direction) -> Result<Box<dyn SelectionCurve>> {
        Ok(Box::new(TanhCurve {
            summary: quartiles(fitnesses)?,
            direction,
        }))
    }
}

/// Fixed threshold, ignores the population.
#[derive(Debug, Clone, Copy)]
pub struct HardFactory {
    pub threshold: f64,
}

impl CurveFactory for HardFactory {
    fn name(&self) -> &'static str {
        "hard"
    }

    fn fit(&self, _fitnesses: &[f64], direction: Direction) -> Result<Box<dyn SelectionCurve>> {
        let mut curve = HardThreshold::new(self.threshold)?;
        curve.direction = direction;
        Ok(Box::new(curve))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AdaptiveHardFactory {
    pub average: Average,
}

impl CurveFactory for AdaptiveHardFactory {
    fn name(&self) -> &'static str {
        "adaptive-hard"
    }

    fn fit(&self, fitnesses: &[f64], direction: Direction) -> Result<Box<dyn SelectionCurve>> {
        Ok(Box::new(adaptive_threshold_with(
            fitnesses,
            self.average,
            direction,
        )?))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ArctanSequenceFactory;

impl CurveFactory for ArctanSequenceFactory {
    fn name(&self) -> &'static str {
        "arctan-sequence"
    }

    fn fit(&self, _fitnesses: &[f64], _direction: Direction) -> Result<Box<dyn SelectionCurve>> {
        Ok(Box::new(ArctanSequence))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantFactory {
    pub value: f64,
}

impl CurveFactory for ConstantFactory {
    fn name(&self) -> &'static str {
        "constant"
    }

    fn fit(&self, _fitnesses: &[f64], _direction: Direction) -> Result<Box<dyn SelectionCurve>> {
        Ok(Box::new(ConstantCurve::new(self.value)?))
    }
}

/// Curve selection as it appears in config files, e.g.
/// `{"name": "hard", "threshold": 0.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub average: Option<Average>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl CurveSpec {
    pub fn named(name: impl Into<String>) -> Self {
        CurveSpec {
            name: name.into(),
            threshold: None,
            average: None,
            value: None,
        }
    }

    pub fn hard(threshold: f64) -> Self {
        CurveSpec {
            threshold: Some(threshold),
            ..Self::named("hard")
        }
    }
}

type FactoryCtor = fn(&CurveSpec) -> Result<Box<dyn CurveFactory>>;

/// Name-indexed table of curve factories.
pub struct CurveRegistry {
    entries: BTreeMap<String, FactoryCtor>,
}

impl CurveRegistry {
    pub fn empty() -> Self {
        CurveRegistry {
            entries: BTreeMap::new(),
        }
    }

    /// `arctan`, `tanh`, `hard`, `adaptive-hard`, `arctan-sequence`,
    /// `constant`.
    pub fn builtin() -> Self {
        let mut registry = Self::empty();
        registry.register("arctan", |_| Ok(Box::new(ArctanFactory)));
        registry.register("tanh", |_| Ok(Box::new(TanhFactory)));
        registry.register("hard", |spec| {
            let threshold = spec.threshold.ok_or_else(|| {
                Error::InvalidConfig("curve `hard` needs a `threshold`".into())
            })?;
            HardThreshold::new(threshold)?;
            Ok(Box::new(HardFactory { threshold }))
        });
        registry.register("adaptive-hard", |spec| {
            Ok(Box::new(AdaptiveHardFactory {
                average: spec.average.unwrap_or_default(),
            }))
        });
        registry.register("arctan-sequence", |_| Ok(Box::new(ArctanSequenceFactory)));
        registry.register("constant", |spec| {
            let value = spec.value.unwrap_or(0.5);
            ConstantCurve::new(value)?;
            Ok(Box::new(ConstantFactory { value }))
        });
        registry
    }

    pub fn register(&mut self, name: &str, ctor: FactoryCtor) {
        self.entries.insert(name.to_owned(), ctor);
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn build(&self, spec: &CurveSpec) -> Result<Box<dyn CurveFactory>> {
        let ctor = self
            .entries
            .get(&spec.name)
            .ok_or_else(|| Error::UnknownName {
                kind: "selection curve",
                name: spec.name.clone(),
                known: self.names().join(", "),
            })?;
        ctor(spec)
    }
}

impl Default for CurveRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
