//! Exact norms on finitely supported coefficient sequences.
//!
//! Supported spaces: `ℓ_p` (including `p = ∞`), `c₀`, an `ℓ_p`-sum of finite
//! dimensional `ℓ_{p_s}^{n_s}` blocks, an interleaved direct sum of two such
//! spaces, and the James space.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::combinatorics::FiniteSet;
use crate::error::{Error, Result};

/// A finitely supported real sequence indexed from 1. Zero coefficients are
/// never stored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(usize, f64)>", into = "Vec<(usize, f64)>")]
pub struct SparseVector {
    entries: BTreeMap<usize, f64>,
}

impl SparseVector {
    pub fn zero() -> Self {
        SparseVector::default()
    }

    pub fn new<I: IntoIterator<Item = (usize, f64)>>(pairs: I) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, c) in pairs {
            if i == 0 {
                return Err(Error::input("vector indices start at 1"));
            }
            if !c.is_finite() {
                return Err(Error::input(format!("non-finite coefficient at index {i}")));
            }
            if entries.insert(i, c).is_some() {
                return Err(Error::input(format!("duplicate index {i}")));
            }
        }
        entries.retain(|_, c| *c != 0.0);
        Ok(SparseVector { entries })
    }

    /// The unit vector `e_i`.
    pub fn unit(i: usize) -> Self {
        assert!(i >= 1, "vector indices start at 1");
        SparseVector { entries: BTreeMap::from([(i, 1.0)]) }
    }

    /// `Σ_{k ∈ set} e_k`.
    pub fn indicator(set: &FiniteSet) -> Self {
        SparseVector { entries: set.elements().iter().map(|&k| (k, 1.0)).collect() }
    }

    pub fn get(&self, i: usize) -> f64 {
        self.entries.get(&i).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&i, &c)| (i, c))
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.entries.values().copied().collect()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_index(&self) -> Option<usize> {
        self.entries.keys().next().copied()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    pub fn scale(&self, factor: f64) -> SparseVector {
        let mut out = SparseVector { entries: self.entries.iter().map(|(&i, &c)| (i, c * factor)).collect() };
        out.entries.retain(|_, c| *c != 0.0);
        out
    }

    pub fn add_scaled(&mut self, factor: f64, other: &SparseVector) {
        for (i, c) in other.iter() {
            let slot = self.entries.entry(i).or_insert(0.0);
            *slot += factor * c;
            if *slot == 0.0 {
                self.entries.remove(&i);
            }
        }
    }

    /// Coordinates with index `<= last`.
    pub fn truncate(&self, last: usize) -> SparseVector {
        SparseVector { entries: self.entries.range(..=last).map(|(&i, &c)| (i, c)).collect() }
    }

    /// Coordinates in `lo..=hi`.
    pub fn restrict(&self, lo: usize, hi: usize) -> SparseVector {
        SparseVector { entries: self.entries.range(lo..=hi).map(|(&i, &c)| (i, c)).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl TryFrom<Vec<(usize, f64)>> for SparseVector {
    type Error = Error;

    fn try_from(v: Vec<(usize, f64)>) -> Result<Self> {
        SparseVector::new(v)
    }
}

impl From<SparseVector> for Vec<(usize, f64)> {
    fn from(v: SparseVector) -> Self {
        v.entries.into_iter().collect()
    }
}

impl fmt::Display for SparseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, (i, c)) in self.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}:{c}")?;
        }
        Ok(())
    }
}

impl FromStr for SparseVector {
    type Err = Error;

    /// `index:coefficient` pairs separated by commas, e.g. `1:1,3:-1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(SparseVector::zero());
        }
        let pairs = s
            .split(',')
            .map(|item| {
                let (i, c) = item
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("expected index:coefficient, got {item:?}")))?;
                let i = i.trim().parse::<usize>().map_err(|e| Error::Parse(format!("bad index {i:?}: {e}")))?;
                // accept the unicode minus sign as well
                let c = c
                    .trim()
                    .replace('\u{2212}', "-")
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad coefficient {c:?}: {e}")))?;
                Ok((i, c))
            })
            .collect::<Result<Vec<_>>>()?;
        SparseVector::new(pairs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outer {
    Max,
    Sum,
}

/// Description of a computable norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceSpec {
    Lp {
        #[serde(with = "exponent")]
        p: f64,
    },
    C0,
    /// `(Σ_s ℓ_{p_s}^{n_s})_p`, basis ordered segment by segment.
    LpSum {
        p: f64,
        ps: Vec<f64>,
        ns: Vec<u64>,
    },
    /// Odd coordinates go to `a`, even coordinates to `b`, each reindexed
    /// densely; the two norms are combined by `outer`.
    Interleave {
        a: Box<SpaceSpec>,
        b: Box<SpaceSpec>,
        outer: Outer,
    },
    James,
}

pub(crate) mod exponent {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() && *p > 0.0 {
            Repr::Text("inf".into()).serialize(s)
        } else {
            Repr::Num(*p).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(p) => Ok(p),
            Repr::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "∞") => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad exponent {t:?}"))),
        }
    }
}

impl SpaceSpec {
    pub fn lp(p: f64) -> Self {
        SpaceSpec::Lp { p }
    }

    pub fn interleave(a: SpaceSpec, b: SpaceSpec, outer: Outer) -> Self {
        SpaceSpec::Interleave { a: Box::new(a), b: Box::new(b), outer }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceSpec::Lp { p } => {
                if p.is_nan() || *p < 1.0 {
                    return Err(Error::spec(format!("p = {p} outside [1, ∞]")));
                }
            }
            SpaceSpec::C0 | SpaceSpec::James => {}
            SpaceSpec::LpSum { p, ps, ns } => {
                if !(p.is_finite() && *p > 1.0) {
                    return Err(Error::spec(format!("lp_sum outer p = {p} outside (1, ∞)")));
                }
                if ps.is_empty() || ps.len() != ns.len() {
                    return Err(Error::spec("lp_sum needs equally many ps and ns (at least one)"));
                }
                if ps.iter().any(|q| !(q.is_finite() && *q >= 1.0 && q < p)) {
                    return Err(Error::spec("every p_s must lie in [1, p)"));
                }
                if ps.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::spec("ps must be strictly increasing"));
                }
                if ns.contains(&0) {
                    return Err(Error::spec("every n_s must be >= 1"));
                }
                if ns.iter().try_fold(0u64, |acc, &n| acc.checked_add(n)).is_none() {
                    return Err(Error::spec("total dimension overflows"));
                }
            }
            SpaceSpec::Interleave { a, b, .. } => {
                for inner in [a, b] {
                    if matches!(**inner, SpaceSpec::Interleave { .. }) {
                        return Err(Error::spec("interleave may not nest another interleave"));
                    }
                    inner.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Validates and evaluates in one go; prefer [`Space`] in loops.
    pub fn norm(&self, v: &SparseVector) -> Result<f64> {
        Space::new(self.clone())?.norm(v)
    }
}

/// Position inside an `ℓ_p`-sum: segment `s` and 1-based offset within it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentIndex {
    pub s: usize,
    pub offset: u64,
}

/// A validated space with precomputed bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct Space {
    spec: SpaceSpec,
    kind: Kind,
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Lp(f64),
    Max,
    LpSum(LpSumLayout),
    Interleave(Box<Space>, Box<Space>, Outer),
    James,
}

#[derive(Clone, Debug, PartialEq)]
struct LpSumLayout {
    p: f64,
    ps: Vec<f64>,
    ns: Vec<u64>,
    /// `ends[s]` = n_1 + ... + n_{s+1}
    ends: Vec<u64>,
}

impl LpSumLayout {
    fn new(p: f64, ps: &[f64], ns: &[u64]) -> Self {
        let ends = ns
            .iter()
            .scan(0u64, |acc, &n| {
                *acc += n;
                Some(*acc)
            })
            .collect();
        LpSumLayout { p, ps: ps.to_vec(), ns: ns.to_vec(), ends }
    }

    fn segment_of(&self, index: u64) -> Result<SegmentIndex> {
        if index == 0 {
            return Err(Error::input("indices start at 1"));
        }
        let s = self.ends.partition_point(|&e| e < index);
        if s == self.ends.len() {
            return Err(Error::input(format!(
                "index {index} exceeds the total dimension {}",
                self.ends.last().copied().unwrap_or(0)
            )));
        }
        let start = if s == 0 { 0 } else { self.ends[s - 1] };
        Ok(SegmentIndex { s: s + 1, offset: index - start })
    }

    fn norm(&self, v: &SparseVector) -> Result<f64> {
        let mut inner = vec![0.0f64; self.ps.len()];
        for (i, c) in v.iter() {
            let seg = self.segment_of(i as u64)?;
            inner[seg.s - 1] += c.abs().powf(self.ps[seg.s - 1]);
        }
        Ok(lp_sum_combine(self.p, &self.ps, &inner))
    }
}

/// `(Σ_s inner_s^{p/p_s})^{1/p}` where `inner_s = Σ |b_l|^{p_s}`.
fn lp_sum_combine(p: f64, ps: &[f64], inner: &[f64]) -> f64 {
    let total: f64 = inner.iter().zip(ps).filter(|(&x, _)| x > 0.0).map(|(&x, &q)| x.powf(p / q)).sum();
    total.powf(1.0 / p)
}

fn lp_norm(p: f64, values: &[f64]) -> f64 {
    let m = values.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if m == 0.0 || p.is_infinite() {
        return m;
    }
    if p == 1.0 {
        return values.iter().map(|c| c.abs()).sum();
    }
    let s: f64 = values.iter().map(|c| (c.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

/// Candidate indices for the James supremum: the support plus one zero
/// coordinate in each gap before, between and after it.
fn james_candidates(v: &SparseVector) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(2 * v.nnz() + 1);
    let mut prev = 0usize;
    for (i, c) in v.iter() {
        if i > prev + 1 {
            out.push((prev + 1, 0.0));
        }
        out.push((i, c));
        prev = i;
    }
    out.push((prev + 1, 0.0));
    out
}

/// `sup (Σ (x_{p_{i+1}} − x_{p_i})²)^{1/2}` over increasing index tuples,
/// by dynamic programming over the best chain ending at each candidate.
fn james_norm(v: &SparseVector) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let cand = james_candidates(v);
    let mut best = vec![0.0f64; cand.len()];
    let mut sup = 0.0f64;
    for j in 1..cand.len() {
        let xj = cand[j].1;
        let mut b = 0.0f64;
        for i in 0..j {
            let d = xj - cand[i].1;
            b = b.max(best[i] + d * d);
        }
        best[j] = b;
        sup = sup.max(b);
    }
    sup.sqrt()
}

impl Space {
    pub fn new(spec: SpaceSpec) -> Result<Self> {
        spec.validate()?;
        let kind = match &spec {
            SpaceSpec::Lp { p } if p.is_infinite() => Kind::Max,
            SpaceSpec::Lp { p } => Kind::Lp(*p),
            SpaceSpec::C0 => Kind::Max,
            SpaceSpec::LpSum { p, ps, ns } => Kind::LpSum(LpSumLayout::new(*p, ps, ns)),
            SpaceSpec::Interleave { a, b, outer } => {
                Kind::Interleave(Box::new(Space::new((**a).clone())?), Box::new(Space::new((**b).clone())?), *outer)
            }
            SpaceSpec::James => Kind::James,
        };
        Ok(Space { spec, kind })
    }

    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    pub fn norm(&self, v: &SparseVector) -> Result<f64> {
        Ok(match &self.kind {
            Kind::Lp(p) => lp_norm(*p, &v.coefficients()),
            Kind::Max => v.max_abs(),
            Kind::LpSum(layout) => layout.norm(v)?,
            Kind::Interleave(a, b, outer) => {
                let (odd, even) = split_parity(v);
                let (na, nb) = (a.norm(&odd)?, b.norm(&even)?);
                match outer {
                    Outer::Max => na.max(nb),
                    Outer::Sum => na + nb,
                }
            }
            Kind::James => james_norm(v),
        })
    }

    /// Total dimension of an `ℓ_p`-sum; `None` for the other kinds.
    pub fn dimension(&self) -> Option<u64> {
        match &self.kind {
            Kind::LpSum(l) => l.ends.last().copied(),
            _ => None,
        }
    }

    pub fn segment_of(&self, index: u64) -> Result<SegmentIndex> {
        match &self.kind {
            Kind::LpSum(l) => l.segment_of(index),
            _ => Err(Error::spec("segment_of needs an lp_sum space")),
        }
    }

    /// `(p, ps, ns)` of an `ℓ_p`-sum.
    pub fn lp_sum_parts(&self) -> Option<(f64, &[f64], &[u64])> {
        match &self.kind {
            Kind::LpSum(l) => Some((l.p, &l.ps, &l.ns)),
            _ => None,
        }
    }

    /// First basis index of segment `s` (1-based) in an `ℓ_p`-sum.
    pub fn segment_start(&self, s: usize) -> Option<u64> {
        match &self.kind {
            Kind::LpSum(l) if s >= 1 && s <= l.ends.len() => Some(if s == 1 { 1 } else { l.ends[s - 2] + 1 }),
            _ => None,
        }
    }
}

fn split_parity(v: &SparseVector) -> (SparseVector, SparseVector) {
    let mut odd = BTreeMap::new();
    let mut even = BTreeMap::new();
    for (i, c) in v.iter() {
        if i % 2 == 1 {
            odd.insert(i.div_ceil(2), c);
        } else {
            even.insert(i / 2, c);
        }
    }
    (SparseVector { entries: odd }, SparseVector { entries: even })
}

/// `segment_of` on a spec, validating it first.
pub fn segment_of(spec: &SpaceSpec, index: u64) -> Result<SegmentIndex> {
    Space::new(spec.clone())?.segment_of(index)
}

/// Least natural strictly greater than `base^exponent`. Powers within a
/// relative 1e-9 of an integer count as that integer.
fn least_natural_above(base: f64, exponent: f64) -> Result<u64> {
    let v = base.powf(exponent);
    if !v.is_finite() || v >= 9.0e15 {
        return Err(Error::spec(format!("{base}^{exponent} is too large to represent exactly")));
    }
    let r = v.round();
    let n = if (v - r).abs() <= 1e-9 * v.max(1.0) { r + 1.0 } else { v.floor() + 1.0 };
    Ok(n as u64)
}

/// The `ℓ_p`-sum whose `n_s` is the least natural exceeding
/// `s^{p·p_s/(p−p_s)}`, for `s = 1..=ps.len()`.
pub fn make_example_space(p: f64, ps: &[f64]) -> Result<SpaceSpec> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::spec(format!("p = {p} must satisfy 1 < p <= 2")));
    }
    if ps.is_empty() {
        return Err(Error::spec("need at least one p_s"));
    }
    if ps.iter().any(|q| !(*q >= 1.0 && *q < p)) || ps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::spec("ps must increase strictly inside [1, p)"));
    }
    let ns = ps
        .iter()
        .enumerate()
        .map(|(i, &q)| least_natural_above((i + 1) as f64, p * q / (p - q)))
        .collect::<Result<Vec<_>>>()?;
    let spec = SpaceSpec::LpSum { p, ps: ps.to_vec(), ns };
    spec.validate()?;
    Ok(spec)
}

/// True iff `n_s^{1/p_s} > C·n_s^{1/p}`: the type-`p` inequality with
/// constant `C` fails on the unit vectors of segment `s`.
pub fn type_p_witness(spec: &SpaceSpec, s: usize, c: f64) -> Result<bool> {
    let SpaceSpec::LpSum { p, ps, ns } = spec else {
        return Err(Error::spec("type_p_witness needs an lp_sum space"));
    };
    spec.validate()?;
    if s == 0 || s > ps.len() {
        return Err(Error::input(format!("segment {s} outside 1..={}", ps.len())));
    }
    let n = ns[s - 1] as f64;
    let lhs = (1.0 / ps[s - 1] - 1.0 / p) * n.ln();
    Ok(lhs > c.ln())
}
