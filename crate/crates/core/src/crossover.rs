//! Point crossover and the geometry of the triangle `(p_a, p_b, r)`.
//!
//! Every k-point crossover is expressed as a [`CrossoverMask`]: the cut
//! positions split the loci into alternating kept/exchanged segments. The
//! first offspring takes parent `a` on kept loci and parent `b` on exchanged
//! loci; the second offspring is the complement.
//!
//! Because each locus of the offspring pair holds the same two values as the
//! parent pair, the per-locus terms `|x_k - y_k|^p` are permuted, never
//! changed. That gives distance conservation between the pair, conservation
//! of `d_p^p(p_a, r) + d_p^p(p_b, r)` for any reference `r`, and the
//! ordering constraints checked by [`classify_outcome`]. None of this holds
//! for `L_inf`.

use std::fmt;
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genospace::{
    check_same_schema, distance, distance_pow, distance_pow_exact, locus_pow, locus_pow_exact,
    Chromosome, Metric,
};

/// Relative tolerance for identities evaluated on real genes.
pub const REAL_REL_TOL: f64 = 1e-9;

/// `|a - b| <= tol * max(|a|, |b|)`; zero equals zero.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Cut positions of a k-point crossover over `len` loci.
///
/// A cut at `c` separates locus `c - 1` from locus `c`, so `c` ranges over
/// `1..len`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CrossoverMask {
    len: usize,
    cuts: Vec<usize>,
}

impl CrossoverMask {
    pub fn new(len: usize, cuts: Vec<usize>) -> Result<Self> {
        if len < 2 {
            return Err(Error::InvalidMask(format!(
                "crossover needs at least 2 loci, schema has {len}"
            )));
        }
        if cuts.is_empty() {
            return Err(Error::InvalidMask("at least one cut point is required".into()));
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMask(format!(
                "cut points must be strictly increasing: {cuts:?}"
            )));
        }
        if cuts[0] < 1 || cuts[cuts.len() - 1] >= len {
            return Err(Error::InvalidMask(format!(
                "cut points must lie in 1..{len}: {cuts:?}"
            )));
        }
        Ok(CrossoverMask { len, cuts })
    }

    pub fn single_point(len: usize, cut: usize) -> Result<Self> {
        Self::new(len, vec![cut])
    }

    /// `k` distinct interior cuts drawn uniformly.
    pub fn random<R: Rng + ?Sized>(len: usize, k: usize, rng: &mut R) -> Result<Self> {
        if len < 2 || k == 0 || k > len - 1 {
            return Err(Error::InvalidMask(format!(
                "cannot place {k} cuts in a chromosome of length {len}"
            )));
        }
        let mut cuts: Vec<usize> = index::sample(rng, len - 1, k)
            .into_iter()
            .map(|i| i + 1)
            .collect();
        cuts.sort_unstable();
        Self::new(len, cuts)
    }

    /// Every valid mask for `len` loci: each nonempty subset of `1..len`.
    pub fn all(len: usize) -> impl Iterator<Item = CrossoverMask> {
        let interior = len.saturating_sub(1);
        let subsets: u64 = if interior == 0 { 0 } else { 1u64 << interior };
        (1..subsets).map(move |bits| {
            let cuts = (0..interior)
                .filter(|i| bits >> i & 1 == 1)
                .map(|i| i + 1)
                .collect();
            CrossoverMask { len, cuts }
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn cuts(&self) -> &[usize] {
        &self.cuts
    }

    /// Per-locus exchange pattern: `true` where the offspring swap origin.
    pub fn exchange_pattern(&self) -> Vec<bool> {
        let mut pattern = Vec::with_capacity(self.len);
        let mut cuts = self.cuts.iter().peekable();
        let mut exchanged = false;
        for locus in 0..self.len {
            while cuts.next_if(|&&c| c == locus).is_some() {
                exchanged = !exchanged;
            }
            pattern.push(exchanged);
        }
        pattern
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if self.len == n {
            Ok(())
        } else {
            Err(Error::InvalidMask(format!(
                "mask built for {} loci applied to {n}",
                self.len
            )))
        }
    }
}

/// Produces the offspring pair `(o_a, o_b)`.
pub fn crossover(
    parent_a: &Chromosome,
    parent_b: &Chromosome,
    mask: &CrossoverMask,
) -> Result<(Chromosome, Chromosome)> {
    check_same_schema(parent_a, parent_b)?;
    mask.check_len(parent_a.len())?;
    let (mut oa, mut ob) = (Vec::with_capacity(mask.len), Vec::with_capacity(mask.len));
    for ((&x, &y), swap) in parent_a
        .genes()
        .iter()
        .zip(parent_b.genes())
        .zip(mask.exchange_pattern())
    {
        let (u, v) = if swap { (y, x) } else { (x, y) };
        oa.push(u);
        ob.push(v);
    }
    let schema = Arc::clone(parent_a.schema());
    Ok((
        Chromosome::from_parts_unchecked(Arc::clone(&schema), oa),
        Chromosome::from_parts_unchecked(schema, ob),
    ))
}

/// Split of the parent-to-reference power sums into kept (`a1`, `b1`) and
/// exchanged (`a2`, `b2`) loci.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleDecomposition<T = f64> {
    pub a1: T,
    pub a2: T,
    pub b1: T,
    pub b2: T,
}

impl<T: Copy + std::ops::Add<Output = T>> TriangleDecomposition<T> {
    pub fn parent_a(&self) -> T {
        self.a1 + self.a2
    }
    pub fn parent_b(&self) -> T {
        self.b1 + self.b2
    }
    pub fn offspring_a(&self) -> T {
        self.a1 + self.b2
    }
    pub fn offspring_b(&self) -> T {
        self.b1 + self.a2
    }
}

fn check_triangle(
    parent_a: &Chromosome,
    parent_b: &Chromosome,
    reference: &Chromosome,
    mask: &CrossoverMask,
    p: u32,
) -> Result<()> {
    check_same_schema(parent_a, parent_b)?;
    check_same_schema(parent_a, reference)?;
    mask.check_len(parent_a.len())?;
    Metric::Lp(p).validate_for(parent_a.schema())
}

pub fn decompose(
    parent_a: &Chromosome,
    parent_b: &Chromosome,
    reference: &Chromosome,
    mask: &CrossoverMask,
    p: u32,
) -> Result<TriangleDecomposition<f64>> {
    check_triangle(parent_a, parent_b, reference, mask, p)?;
    let mut out = TriangleDecomposition { a1: 0.0, a2: 0.0, b1: 0.0, b2: 0.0 };
    for (((&x, &y), &r), swap) in parent_a
        .genes()
        .iter()
        .zip(parent_b.genes())
        .zip(reference.genes())
        .zip(mask.exchange_pattern())
    {
        let (da, db) = (locus_pow(x, r, p), locus_pow(y, r, p));
        if swap {
            out.a2 += da;
            out.b2 += db;
        } else {
            out.a1 += da;
            out.b1 += db;
        }
    }
    Ok(out)
}

/// Exact variant of [`decompose`] for bit and integer schemas.
pub fn decompose_exact(
    parent_a: &Chromosome,
    parent_b: &Chromosome,
    reference: &Chromosome,
    mask: &CrossoverMask,
    p: u32,
) -> Result<TriangleDecomposition<u128>> {
    check_triangle(parent_a, parent_b, reference, mask, p)?;
    let mut out = TriangleDecomposition { a1: 0u128, a2: 0, b1: 0, b2: 0 };
    for (((&x, &y), &r), swap) in parent_a
        .genes()
        .iter()
        .zip(parent_b.genes())
        .zip(reference.genes())
        .zip(mask.exchange_pattern())
    {
        let (da, db) = (locus_pow_exact(x, r, p)?, locus_pow_exact(y, r, p)?);
        let (sa, sb) = if swap {
            (&mut out.a2, &mut out.b2)
        } else {
            (&mut out.a1, &mut out.b1)
        };
        *sa = sa.checked_add(da).ok_or(Error::Overflow)?;
        *sb = sb.checked_add(db).ok_or(Error::Overflow)?;
    }
    Ok(out)
}

/// Sum of the three pairwise `d_p^p` of a triangle.
pub fn generalized_circumference(
    x: &Chromosome,
    y: &Chromosome,
    z: &Chromosome,
    p: u32,
) -> Result<f64> {
    Ok(distance_pow(x, y, p)? + distance_pow(y, z, p)? + distance_pow(x, z, p)?)
}

pub fn generalized_circumference_exact(
    x: &Chromosome,
    y: &Chromosome,
    z: &Chromosome,
    p: u32,
) -> Result<u128> {
    [
        distance_pow_exact(x, y, p)?,
        distance_pow_exact(y, z, p)?,
        distance_pow_exact(x, z, p)?,
    ]
    .into_iter()
    .try_fold(0u128, |acc, v| acc.checked_add(v).ok_or(Error::Overflow))
}

/// `d(o_a, o_b) == d(p_a, p_b)`: exact on discrete schemas, [`REAL_REL_TOL`]
/// otherwise.
pub fn conserves_pair_distance(
    parents: (&Chromosome, &Chromosome),
    offspring: (&Chromosome, &Chromosome),
    metric: Metric,
) -> Result<bool> {
    let before = distance(parents.0, parents.1, metric)?;
    let after = distance(offspring.0, offspring.1, metric)?;
    Ok(if parents.0.schema().is_discrete() {
        before == after
    } else {
        rel_close(before, after, REAL_REL_TOL)
    })
}

/// `d_p^p(p_a, r) + d_p^p(p_b, r) == d_p^p(o_a, r) + d_p^p(o_b, r)`.
pub fn conserves_power_sum(
    parents: (&Chromosome, &Chromosome),
    offspring: (&Chromosome, &Chromosome),
    reference: &Chromosome,
    p: u32,
) -> Result<bool> {
    if parents.0.schema().is_discrete() {
        let sum = |x, y| -> Result<u128> {
            distance_pow_exact(x, reference, p)?
                .checked_add(distance_pow_exact(y, reference, p)?)
                .ok_or(Error::Overflow)
        };
        Ok(sum(parents.0, parents.1)? == sum(offspring.0, offspring.1)?)
    } else {
        let before = distance_pow(parents.0, reference, p)? + distance_pow(parents.1, reference, p)?;
        let after =
            distance_pow(offspring.0, reference, p)? + distance_pow(offspring.1, reference, p)?;
        Ok(rel_close(before, after, REAL_REL_TOL))
    }
}

/// `L_inf` analogue of the power-sum identity; expected to fail in general.
pub fn linf_sum_preserved(
    parents: (&Chromosome, &Chromosome),
    offspring: (&Chromosome, &Chromosome),
    reference: &Chromosome,
) -> Result<bool> {
    let d = |x| distance(x, reference, Metric::Linf);
    let before = d(parents.0)? + d(parents.1)?;
    let after = d(offspring.0)? + d(offspring.1)?;
    Ok(if parents.0.schema().is_discrete() {
        before == after
    } else {
        rel_close(before, after, REAL_REL_TOL)
    })
}

/// Ordering of the two parents (`p`) and two offspring (`o`) by increasing
/// distance to the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeConfig {
    Oopp,
    Opop,
    Oppo,
    Poop,
    Popo,
    Ppoo,
    /// Some of the four distances coincide.
    Tie,
}

impl OutcomeConfig {
    pub const ALL: [OutcomeConfig; 7] = [
        OutcomeConfig::Oopp,
        OutcomeConfig::Opop,
        OutcomeConfig::Oppo,
        OutcomeConfig::Poop,
        OutcomeConfig::Popo,
        OutcomeConfig::Ppoo,
        OutcomeConfig::Tie,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            OutcomeConfig::Oopp => "oopp",
            OutcomeConfig::Opop => "opop",
            OutcomeConfig::Oppo => "oppo",
            OutcomeConfig::Poop => "poop",
            OutcomeConfig::Popo => "popo",
            OutcomeConfig::Ppoo => "ppoo",
            OutcomeConfig::Tie => "tie",
        }
    }

    /// Row in the table of outcomes (1-6), `None` for ties.
    pub fn row(&self) -> Option<u8> {
        match self {
            OutcomeConfig::Tie => None,
            other => Some(*other as u8 + 1),
        }
    }

    /// Both offspring on the same side of both parents.
    pub fn is_impossible(&self) -> bool {
        matches!(self, OutcomeConfig::Oopp | OutcomeConfig::Ppoo)
    }

    /// `opop` or `popo`. Also unreachable under strict ordering whenever the
    /// sum of `d^p` is conserved: `a < b < c < d` rules out `a^p + c^p = b^p + d^p`.
    pub fn is_interleaved(&self) -> bool {
        matches!(self, OutcomeConfig::Opop | OutcomeConfig::Popo)
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.label() == label)
    }

    fn from_pattern(pattern: [bool; 4]) -> Self {
        // `true` marks an offspring.
        match pattern {
            [true, true, false, false] => OutcomeConfig::Oopp,
            [true, false, true, false] => OutcomeConfig::Opop,
            [true, false, false, true] => OutcomeConfig::Oppo,
            [false, true, true, false] => OutcomeConfig::Poop,
            [false, true, false, true] => OutcomeConfig::Popo,
            [false, false, true, true] => OutcomeConfig::Ppoo,
            _ => unreachable!("two parents and two offspring"),
        }
    }
}

impl fmt::Display for OutcomeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Orders parents and offspring by distance to `reference`.
///
/// Distances are compared exactly; any coincidence yields
/// [`OutcomeConfig::Tie`].
pub fn classify_outcome(
    parent_a: &Chromosome,
    parent_b: &Chromosome,
    offspring_a: &Chromosome,
    offspring_b: &Chromosome,
    reference: &Chromosome,
    metric: Metric,
) -> Result<OutcomeConfig> {
    let mut entries = [
        (distance(parent_a, reference, metric)?, false),
        (distance(parent_b, reference, metric)?, false),
        (distance(offspring_a, reference, metric)?, true),
        (distance(offspring_b, reference, metric)?, true),
    ];
    for i in 0..4 {
        for j in i + 1..4 {
            if entries[i].0 == entries[j].0 {
                return Ok(OutcomeConfig::Tie);
            }
        }
    }
    entries.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(OutcomeConfig::from_pattern(entries.map(|e| e.1)))
}

/// Distance of the second offspring to the reference, given both parent
/// distances `d1`, `d2` and the first offspring's distance `da`, from
/// `d1^p + d2^p = da^p + db^p`.
///
/// `da == d1` returns `d2` exactly. A zero result means the second offspring
/// sits on the reference.
pub fn offspring_distance_tradeoff(d1: f64, d2: f64, da: f64, p: u32) -> Result<f64> {
    if !(d1.is_finite() && d2.is_finite() && da.is_finite()) {
        return Err(Error::NonFinite("tradeoff distances"));
    }
    if d1 <= 0.0 || d2 <= 0.0 || da <= 0.0 {
        return Err(Error::Impossible(format!(
            "distances must be positive: d1={d1}, d2={d2}, da={da}"
        )));
    }
    if p == 0 {
        return Err(Error::InvalidMetric("L_p needs p >= 1".into()));
    }
    if da == d1 {
        return Ok(d2);
    }
    let pi = p as i32;
    let excess = (d1 / d2).powi(pi) - (da / d2).powi(pi);
    if excess < -1.0 {
        return Err(Error::Impossible(format!(
            "offspring at {da} exceeds the combined parent budget (d1={d1}, d2={d2}, p={p})"
        )));
    }
    if excess == -1.0 {
        return Ok(0.0);
    }
    Ok(d2 * (excess.ln_1p() / f64::from(p)).exp())
}
