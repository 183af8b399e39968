//! Points of the genotype space and the distances between them.
//!
//! A [`Schema`] fixes the number of loci and the kind (bit, bounded integer,
//! bounded real) of every locus. A [`Chromosome`] is a vector of genes that
//! conforms to a schema. Distances are Hamming, `L_p` for finite integer
//! `p >= 1`, and `L_inf`.
//!
//! Bit and integer loci are handled with exact integer arithmetic in
//! [`distance_pow_exact`], so conservation identities on discrete
//! chromosomes can be checked with `==`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::error::{Error, Result};

/// Kind and bounds of a single locus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LocusKind {
    Bit,
    Integer { min: i64, max: i64 },
    Real { min: f64, max: f64 },
}

impl LocusKind {
    pub fn is_real(&self) -> bool {
        matches!(self, LocusKind::Real { .. })
    }

    /// Uniform draw within the locus bounds.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Gene {
        match *self {
            LocusKind::Bit => Gene::Bit(rng.random_bool(0.5)),
            LocusKind::Integer { min, max } => Gene::Int(rng.random_range(min..=max)),
            LocusKind::Real { min, max } if min == max => Gene::Real(min),
            LocusKind::Real { min, max } => Gene::Real(rng.random_range(min..=max)),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            LocusKind::Bit => Ok(()),
            LocusKind::Integer { min, max } if min <= max => Ok(()),
            LocusKind::Real { min, max } if min.is_finite() && max.is_finite() && min <= max => {
                Ok(())
            }
            other => Err(Error::InvalidSchema(format!("bad locus bounds {other:?}"))),
        }
    }
}

/// Shared description of a genotype space: one [`LocusKind`] per locus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    id: String,
    loci: Vec<LocusKind>,
}

impl Schema {
    pub fn new(id: impl Into<String>, loci: Vec<LocusKind>) -> Result<Arc<Self>> {
        if loci.is_empty() {
            return Err(Error::InvalidSchema("a schema needs at least one locus".into()));
        }
        for locus in &loci {
            locus.validate()?;
        }
        Ok(Arc::new(Schema {
            id: id.into(),
            loci,
        }))
    }

    pub fn bits(len: usize) -> Result<Arc<Self>> {
        Self::new(format!("bits{len}"), vec![LocusKind::Bit; len])
    }

    pub fn integers(len: usize, min: i64, max: i64) -> Result<Arc<Self>> {
        Self::new(
            format!("int{len}[{min},{max}]"),
            vec![LocusKind::Integer { min, max }; len],
        )
    }

    pub fn reals(len: usize, min: f64, max: f64) -> Result<Arc<Self>> {
        Self::new(
            format!("real{len}[{min},{max}]"),
            vec![LocusKind::Real { min, max }; len],
        )
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn loci(&self) -> &[LocusKind] {
        &self.loci
    }

    pub fn len(&self) -> usize {
        self.loci.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loci.is_empty()
    }

    /// True when every locus is bit or integer.
    pub fn is_discrete(&self) -> bool {
        self.loci.iter().all(|l| !l.is_real())
    }

    /// True when every locus is real.
    pub fn is_continuous(&self) -> bool {
        self.loci.iter().all(LocusKind::is_real)
    }

    /// Total number of bits when the schema is all-bit.
    pub fn bit_count(&self) -> Option<usize> {
        self.loci
            .iter()
            .all(|l| matches!(l, LocusKind::Bit))
            .then_some(self.loci.len())
    }

    fn check_gene(&self, locus: usize, gene: Gene) -> Result<()> {
        let bad = |reason: String| Error::InvalidGene { locus, reason };
        match (self.loci[locus], gene) {
            (LocusKind::Bit, Gene::Bit(_)) => Ok(()),
            (LocusKind::Integer { min, max }, Gene::Int(v)) => {
                if (min..=max).contains(&v) {
                    Ok(())
                } else {
                    Err(bad(format!("{v} outside [{min}, {max}]")))
                }
            }
            (LocusKind::Real { min, max }, Gene::Real(v)) => {
                if !v.is_finite() {
                    Err(bad(format!("{v} is not finite")))
                } else if v < min || v > max {
                    Err(bad(format!("{v} outside [{min}, {max}]")))
                } else {
                    Ok(())
                }
            }
            (kind, gene) => Err(bad(format!("{gene:?} does not fit {kind:?}"))),
        }
    }
}

/// A single gene value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gene {
    Bit(bool),
    Int(i64),
    Real(f64),
}

impl Gene {
    pub fn as_f64(self) -> f64 {
        match self {
            Gene::Bit(b) => f64::from(u8::from(b)),
            Gene::Int(v) => v as f64,
            Gene::Real(v) => v,
        }
    }

    fn as_i128(self) -> Option<i128> {
        match self {
            Gene::Bit(b) => Some(i128::from(b)),
            Gene::Int(v) => Some(i128::from(v)),
            Gene::Real(_) => None,
        }
    }
}

/// A fixed-length, schema-conforming sequence of genes.
#[derive(Debug, Clone)]
pub struct Chromosome {
    schema: Arc<Schema>,
    genes: Vec<Gene>,
}

impl PartialEq for Chromosome {
    fn eq(&self, other: &Self) -> bool {
        same_schema(&self.schema, &other.schema) && self.genes == other.genes
    }
}

fn same_schema(a: &Arc<Schema>, b: &Arc<Schema>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Chromosome {
    pub fn new(schema: &Arc<Schema>, genes: Vec<Gene>) -> Result<Self> {
        if genes.len() != schema.len() {
            return Err(Error::InvalidSchema(format!(
                "schema `{}` has {} loci, got {} genes",
                schema.id,
                schema.len(),
                genes.len()
            )));
        }
        for (locus, gene) in genes.iter().enumerate() {
            schema.check_gene(locus, *gene)?;
        }
        Ok(Chromosome {
            schema: Arc::clone(schema),
            genes,
        })
    }

    /// Builds an all-bit chromosome from a string such as `"10110"`.
    pub fn from_bit_str(schema: &Arc<Schema>, bits: &str) -> Result<Self> {
        let genes = bits
            .chars()
            .enumerate()
            .map(|(locus, c)| match c {
                '0' => Ok(Gene::Bit(false)),
                '1' => Ok(Gene::Bit(true)),
                other => Err(Error::InvalidGene {
                    locus,
                    reason: format!("`{other}` is not a bit"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(schema, genes)
    }

    /// Uniform draw: fair bits, integers and reals uniform within bounds.
    pub fn random<R: Rng + ?Sized>(schema: &Arc<Schema>, rng: &mut R) -> Self {
        let genes = schema.loci().iter().map(|l| l.sample(rng)).collect();
        Chromosome::from_parts_unchecked(Arc::clone(schema), genes)
    }

    pub fn from_ints(schema: &Arc<Schema>, values: &[i64]) -> Result<Self> {
        Self::new(schema, values.iter().map(|&v| Gene::Int(v)).collect())
    }

    pub fn from_reals(schema: &Arc<Schema>, values: &[f64]) -> Result<Self> {
        Self::new(schema, values.iter().map(|&v| Gene::Real(v)).collect())
    }

    /// Internal constructor for genes already known to satisfy the schema.
    pub(crate) fn from_parts_unchecked(schema: Arc<Schema>, genes: Vec<Gene>) -> Self {
        debug_assert_eq!(genes.len(), schema.len());
        Chromosome { schema, genes }
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn genes(&self) -> &[Gene] {
        &self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    /// Gene values as `f64`, bits mapped to 0/1.
    pub fn values(&self) -> Vec<f64> {
        self.genes.iter().map(|g| g.as_f64()).collect()
    }

    /// Renders an all-bit chromosome as `"0101..."`.
    pub fn to_bit_string(&self) -> Option<String> {
        self.genes
            .iter()
            .map(|g| match g {
                Gene::Bit(b) => Some(if *b { '1' } else { '0' }),
                _ => None,
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let genes = self
            .genes
            .iter()
            .map(|g| match *g {
                Gene::Bit(b) => Value::from(u8::from(b)),
                Gene::Int(v) => Value::from(v),
                // Finite by construction.
                Gene::Real(v) => Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null),
            })
            .collect();
        serde_json::json!({ "schema": self.schema.id, "genes": Value::Array(genes) })
    }

    /// Parses `{"schema": id, "genes": [...]}` against `schema`.
    pub fn from_json(value: &Value, schema: &Arc<Schema>) -> Result<Self> {
        let id = value
            .get("schema")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Json("missing string field `schema`".into()))?;
        if id != schema.id {
            return Err(Error::SchemaMismatch {
                left: id.to_owned(),
                right: schema.id.clone(),
            });
        }
        let raw = value
            .get("genes")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("missing array field `genes`".into()))?;
        if raw.len() != schema.len() {
            return Err(Error::Json(format!(
                "expected {} genes, got {}",
                schema.len(),
                raw.len()
            )));
        }
        let genes = raw
            .iter()
            .zip(schema.loci())
            .enumerate()
            .map(|(locus, (v, kind))| {
                let bad = || Error::InvalidGene {
                    locus,
                    reason: format!("{v} does not fit {kind:?}"),
                };
                match kind {
                    LocusKind::Bit => match v.as_u64() {
                        Some(0) => Ok(Gene::Bit(false)),
                        Some(1) => Ok(Gene::Bit(true)),
                        _ => Err(bad()),
                    },
                    LocusKind::Integer { .. } => v.as_i64().map(Gene::Int).ok_or_else(bad),
                    LocusKind::Real { .. } => v.as_f64().map(Gene::Real).ok_or_else(bad),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(schema, genes)
    }

    pub fn from_json_str(text: &str, schema: &Arc<Schema>) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        Self::from_json(&value, schema)
    }
}

/// The distance in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Metric {
    Hamming,
    /// `L_p` with finite integer `p >= 1`.
    Lp(u32),
    Linf,
}

impl Metric {
    /// Checks the metric against a schema.
    pub fn validate_for(&self, schema: &Schema) -> Result<()> {
        match *self {
            Metric::Hamming if !schema.is_discrete() => Err(Error::InvalidMetric(format!(
                "Hamming distance needs bit or integer loci; schema `{}` has real loci",
                schema.id
            ))),
            Metric::Lp(0) => Err(Error::InvalidMetric("L_p needs p >= 1".into())),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Hamming => f.write_str("hamming"),
            Metric::Lp(p) => write!(f, "l{p}"),
            Metric::Linf => f.write_str("linf"),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "hamming" => Ok(Metric::Hamming),
            "linf" | "l_inf" | "inf" => Ok(Metric::Linf),
            other => {
                let digits = other
                    .strip_prefix("lp:")
                    .or_else(|| other.strip_prefix('l'))
                    .ok_or_else(|| Error::InvalidMetric(format!("unrecognized metric `{s}`")))?;
                match digits.parse::<u32>() {
                    Ok(p) if p >= 1 => Ok(Metric::Lp(p)),
                    _ => Err(Error::InvalidMetric(format!("unrecognized metric `{s}`"))),
                }
            }
        }
    }
}

impl TryFrom<String> for Metric {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Metric> for String {
    fn from(m: Metric) -> String {
        m.to_string()
    }
}

pub(crate) fn check_same_schema(a: &Chromosome, b: &Chromosome) -> Result<()> {
    if same_schema(&a.schema, &b.schema) {
        Ok(())
    } else {
        Err(Error::SchemaMismatch {
            left: a.schema.id.clone(),
            right: b.schema.id.clone(),
        })
    }
}

/// `|a - b|^p` for one locus, exactly.
pub(crate) fn locus_pow_exact(a: Gene, b: Gene, p: u32) -> Result<u128> {
    let (x, y) = a
        .as_i128()
        .zip(b.as_i128())
        .ok_or_else(|| Error::NotApplicable("exact distance needs bit or integer loci".into()))?;
    (x - y).unsigned_abs().checked_pow(p).ok_or(Error::Overflow)
}

/// `|a - b|^p` for one locus in floating point.
pub(crate) fn locus_pow(a: Gene, b: Gene, p: u32) -> f64 {
    match (a.as_i128(), b.as_i128()) {
        (Some(x), Some(y)) => ((x - y).unsigned_abs() as f64).powi(p as i32),
        _ => (a.as_f64() - b.as_f64()).abs().powi(p as i32),
    }
}

/// Distance between two chromosomes of one schema.
///
/// `Lp(p)` returns the root form `(sum |a_k - b_k|^p)^(1/p)`.
pub fn distance(a: &Chromosome, b: &Chromosome, metric: Metric) -> Result<f64> {
    check_same_schema(a, b)?;
    metric.validate_for(&a.schema)?;
    let pairs = a.genes.iter().zip(&b.genes);
    Ok(match metric {
        Metric::Hamming => pairs.filter(|(x, y)| x != y).count() as f64,
        Metric::Lp(p) => {
            let sum = distance_pow(a, b, p)?;
            match p {
                1 => sum,
                2 => sum.sqrt(),
                _ => sum.powf(1.0 / f64::from(p)),
            }
        }
        Metric::Linf => pairs
            .map(|(x, y)| locus_pow(*x, *y, 1))
            .fold(0.0, f64::max),
    })
}

/// `d_p^p(a, b)`: the sum of `|a_k - b_k|^p` without the root.
///
/// Discrete schemas are summed exactly before conversion to `f64`.
pub fn distance_pow(a: &Chromosome, b: &Chromosome, p: u32) -> Result<f64> {
    check_same_schema(a, b)?;
    Metric::Lp(p).validate_for(&a.schema)?;
    if a.schema.is_discrete() {
        return distance_pow_exact(a, b, p).map(|v| v as f64);
    }
    Ok(a.genes
        .iter()
        .zip(&b.genes)
        .map(|(x, y)| locus_pow(*x, *y, p))
        .sum())
}

/// Exact `d_p^p(a, b)` for bit and integer schemas.
pub fn distance_pow_exact(a: &Chromosome, b: &Chromosome, p: u32) -> Result<u128> {
    check_same_schema(a, b)?;
    Metric::Lp(p).validate_for(&a.schema)?;
    a.genes
        .iter()
        .zip(&b.genes)
        .try_fold(0u128, |acc, (x, y)| {
            acc.checked_add(locus_pow_exact(*x, *y, p)?)
                .ok_or(Error::Overflow)
        })
}
