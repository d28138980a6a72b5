//! The asymptotic game, stabilized asymptotic-ℓ_p constants and good-branch
//! extraction from block trees.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    equivalence_constant, goodness_test, EquivalenceReport, GoodnessReport, Reference, ScalarNet, Verdict,
};
use crate::blockseq::{branch, nccb_from_blocking, normalized, BlockSequence, BlockTree};
use crate::combinatorics::{Blocking, FiniteSet};
use crate::error::{Error, Result};
use crate::spaces::{Space, SparseVector};

const TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub cutoff: usize,
    pub vector: SparseVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameTranscript {
    pub subspace_player: String,
    pub vector_player: String,
    pub moves: Vec<Move>,
    pub outcome: BlockSequence,
}

/// Player one: names a cutoff `m_i` given the moves so far.
pub trait SubspacePlayer {
    fn name(&self) -> String;
    fn cutoff(&self, moves: &[Move]) -> usize;
}

/// Player two: answers a cutoff with a vector.
pub trait VectorPlayer {
    fn name(&self) -> String;
    fn respond(&self, space: &Space, moves: &[Move], cutoff: usize) -> Result<SparseVector>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case")]
pub enum SubspaceStrategy {
    /// Always the same cutoff.
    Constant { m: usize },
    /// `m_1 = start`, then one past the last support plus `lead - 1`.
    PastSupport { start: usize, lead: usize },
    /// A fixed list of cutoffs, repeating the last one.
    Fixed { cutoffs: Vec<usize> },
}

impl SubspacePlayer for SubspaceStrategy {
    fn name(&self) -> String {
        match self {
            SubspaceStrategy::Constant { m } => format!("constant(m={m})"),
            SubspaceStrategy::PastSupport { start, lead } => format!("past-support(start={start},lead={lead})"),
            SubspaceStrategy::Fixed { cutoffs } => format!("fixed({cutoffs:?})"),
        }
    }

    fn cutoff(&self, moves: &[Move]) -> usize {
        match self {
            SubspaceStrategy::Constant { m } => *m,
            SubspaceStrategy::PastSupport { start, lead } => match moves.last().and_then(|mv| mv.vector.max_index()) {
                Some(top) => top + lead.max(&1),
                None => *start,
            },
            SubspaceStrategy::Fixed { cutoffs } => cutoffs.get(moves.len()).or(cutoffs.last()).copied().unwrap_or(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case")]
pub enum VectorStrategy {
    /// The first unit vector allowed by the cutoff and the previous support.
    UnitVector,
    /// The normalized indicator of `width` consecutive coordinates.
    FlatBlock { width: usize },
    /// The normalized combination with these consecutive coefficients.
    Combination { coefficients: Vec<f64> },
}

impl VectorPlayer for VectorStrategy {
    fn name(&self) -> String {
        match self {
            VectorStrategy::UnitVector => "unit-vector".into(),
            VectorStrategy::FlatBlock { width } => format!("flat-block(width={width})"),
            VectorStrategy::Combination { coefficients } => format!("combination({coefficients:?})"),
        }
    }

    fn respond(&self, space: &Space, moves: &[Move], cutoff: usize) -> Result<SparseVector> {
        let after = moves.last().and_then(|mv| mv.vector.max_index()).map_or(1, |t| t + 1);
        let start = cutoff.max(after).max(1);
        let coefficients = match self {
            VectorStrategy::UnitVector => vec![1.0],
            VectorStrategy::FlatBlock { width } => vec![1.0; (*width).max(1)],
            VectorStrategy::Combination { coefficients } => coefficients.clone(),
        };
        let v = SparseVector::new(coefficients.iter().enumerate().map(|(i, &c)| (start + i, c)))?;
        normalized(space, v)
    }
}

fn violation(player: String, reason: String) -> Error {
    Error::Protocol { player, reason }
}

/// Plays `n` rounds, checking every move against the rules of the game.
pub fn play(space: &Space, s1: &dyn SubspacePlayer, s2: &dyn VectorPlayer, n: usize) -> Result<GameTranscript> {
    let mut moves: Vec<Move> = Vec::with_capacity(n);
    for round in 1..=n {
        let cutoff = s1.cutoff(&moves);
        if cutoff == 0 {
            return Err(violation(s1.name(), format!("round {round}: cutoff must be a natural >= 1")));
        }
        let vector =
            s2.respond(space, &moves, cutoff).map_err(|e| violation(s2.name(), format!("round {round}: {e}")))?;
        let Some(lo) = vector.min_index() else {
            return Err(violation(s2.name(), format!("round {round}: zero vector")));
        };
        if lo < cutoff {
            return Err(violation(s2.name(), format!("round {round}: support starts at {lo} below cutoff {cutoff}")));
        }
        if let Some(prev) = moves.last().and_then(|mv| mv.vector.max_index()) {
            if lo <= prev {
                return Err(violation(
                    s2.name(),
                    format!("round {round}: support starts at {lo}, not after previous support end {prev}"),
                ));
            }
        }
        let norm = space.norm(&vector)?;
        if (norm - 1.0).abs() > TOL {
            return Err(violation(s2.name(), format!("round {round}: vector has norm {norm}, expected 1")));
        }
        moves.push(Move { cutoff, vector });
    }
    let outcome = BlockSequence::new(moves.iter().map(|m| m.vector.clone()).collect())?;
    Ok(GameTranscript { subspace_player: s1.name(), vector_player: s2.name(), moves, outcome })
}

/// Parameters of the sampled family of normalized block tuples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleParams {
    /// Blocks are successive intervals inside `[N, N+window)`.
    pub window: usize,
    /// Coefficient grid step of the equivalence scan.
    pub net_step: f64,
}

impl Default for SampleParams {
    fn default() -> Self {
        SampleParams { window: 8, net_step: 0.25 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    #[serde(with = "crate::spaces::exponent")]
    pub p: f64,
    pub n: usize,
    pub cutoff: usize,
    pub params: SampleParams,
    pub tuples_sampled: usize,
    pub constant: f64,
    /// Supports of the block tuple attaining the constant.
    pub certificate: Blocking,
    pub equivalence: EquivalenceReport,
}

/// Every `n`-tuple of successive nonempty intervals inside `[lo, hi]`.
fn interval_tuples(lo: usize, hi: usize, n: usize) -> Vec<Blocking> {
    fn rec(next: usize, hi: usize, n: usize, acc: &mut Vec<FiniteSet>, out: &mut Vec<Blocking>) {
        if acc.len() == n {
            out.push(Blocking::new(acc.clone()).expect("successive intervals"));
            return;
        }
        let need = n - acc.len();
        for a in next..=hi {
            if a + need - 1 > hi {
                break;
            }
            for b in a..=hi - (need - 1) {
                acc.push(FiniteSet::interval(a, b).expect("a <= b"));
                rec(b + 1, hi, n, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    if n > 0 && lo <= hi {
        rec(lo, hi, n, &mut Vec::new(), &mut out);
    }
    out
}

/// `C(N, n)`: the largest equivalence constant against `ℓ_p^n` over the
/// normalized interval-block `n`-tuples starting at or after `N`.
pub fn stabilized_constant(
    space: &Space,
    p: f64,
    n: usize,
    cutoff: usize,
    params: SampleParams,
) -> Result<AsymptoticReport> {
    if cutoff == 0 || n == 0 {
        return Err(Error::input("cutoff N and n must be >= 1"));
    }
    let hi = cutoff + params.window - 1;
    if let Some(dim) = space.dimension() {
        if (hi as u64) > dim {
            return Err(Error::input(format!("window [{cutoff}, {hi}] exceeds dimension {dim}")));
        }
    }
    let family = interval_tuples(cutoff, hi, n);
    if family.is_empty() {
        return Err(Error::input(format!("no {n} successive blocks fit in a window of width {}", params.window)));
    }
    let mut best: Option<(Blocking, EquivalenceReport)> = None;
    for e in &family {
        let y = nccb_from_blocking(space, e)?;
        let r = equivalence_constant(space, y.vectors(), Reference::Lp { p, n }, params.net_step)?;
        if best.as_ref().is_none_or(|(_, b)| r.constant > b.constant) {
            best = Some((e.clone(), r));
        }
    }
    let (certificate, equivalence) = best.expect("family is nonempty");
    Ok(AsymptoticReport {
        p,
        n,
        cutoff,
        params,
        tuples_sampled: family.len(),
        constant: equivalence.constant,
        certificate,
        equivalence,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticVerdict {
    /// Always `"empirical"`: the verdict covers a finite net and window only.
    pub label: String,
    #[serde(with = "crate::spaces::exponent")]
    pub p: f64,
    pub n: usize,
    pub epsilon: f64,
    pub table: Vec<AsymptoticReport>,
    pub nonincreasing: bool,
    pub consistent: bool,
}

/// `C(N, n)` over an increasing schedule of cutoffs; consistent iff the last
/// constant is at most `1 + ε`.
pub fn asymptotic_lp_verdict(
    space: &Space,
    p: f64,
    n: usize,
    schedule: &[usize],
    epsilon: f64,
    params: SampleParams,
) -> Result<AsymptoticVerdict> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("cutoff schedule must be a nonempty increasing list"));
    }
    let table =
        schedule.iter().map(|&cutoff| stabilized_constant(space, p, n, cutoff, params)).collect::<Result<Vec<_>>>()?;
    let nonincreasing = table.windows(2).all(|w| w[1].constant <= w[0].constant + TOL);
    let consistent = table.last().is_some_and(|r| r.constant <= 1.0 + epsilon);
    Ok(AsymptoticVerdict { label: "empirical".into(), p, n, epsilon, table, nonincreasing, consistent })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchParams {
    /// Stabilized constants are computed for `min(n, cap)`-tuples.
    pub cap: usize,
    /// How far past the last support to look for a certified cutoff.
    pub span: usize,
    pub sample: SampleParams,
}

impl Default for BranchParams {
    fn default() -> Self {
        BranchParams { cap: 2, span: 64, sample: SampleParams::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchStep {
    pub level: usize,
    pub tolerance: f64,
    pub cutoff: Option<usize>,
    pub constant: Option<f64>,
    pub node: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    /// How player one was realized.
    pub strategy: String,
    pub steps: Vec<BranchStep>,
    pub branch: BlockSequence,
    pub key: Vec<usize>,
    pub partial: bool,
    pub verification: GoodnessReport,
}

/// Walks down `tree`: at level `n` the cutoff is the least `N` past the
/// current support with `C(N, min(n,cap)) <= 1 + 1/n`, and the least
/// successor supported after that cutoff is taken.
pub fn good_branch_extract(
    tree: &BlockTree,
    space: &Space,
    p: f64,
    params: BranchParams,
    net: &ScalarNet,
    window: usize,
) -> Result<BranchReport> {
    if params.cap == 0 {
        return Err(Error::input("cap must be >= 1"));
    }
    let mut cache: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut constant_at = |cutoff: usize, n: usize| -> Result<f64> {
        if let Some(&c) = cache.get(&(cutoff, n)) {
            return Ok(c);
        }
        let c = stabilized_constant(space, p, n, cutoff, params.sample)?.constant;
        cache.insert((cutoff, n), c);
        Ok(c)
    };
    let mut key: Vec<usize> = Vec::new();
    let mut top = 0usize;
    let mut steps = Vec::new();
    let mut partial = false;
    for level in 1..=tree.depth {
        let tolerance = 1.0 / level as f64;
        let n = level.min(params.cap);
        let mut found = None;
        for cutoff in top + 1..=top + 1 + params.span {
            let c = constant_at(cutoff, n)?;
            if c <= 1.0 + tolerance + TOL {
                found = Some((cutoff, c));
                break;
            }
        }
        let Some((cutoff, c)) = found else {
            steps.push(BranchStep { level, tolerance, cutoff: None, constant: None, node: None });
            partial = true;
            break;
        };
        let succ = tree.successors(&key).into_iter().find(|(_, v)| v.min_index().is_some_and(|lo| lo >= cutoff));
        let Some((next, v)) = succ else {
            steps.push(BranchStep { level, tolerance, cutoff: Some(cutoff), constant: Some(c), node: None });
            partial = true;
            break;
        };
        top = v.max_index().unwrap_or(top);
        steps.push(BranchStep { level, tolerance, cutoff: Some(cutoff), constant: Some(c), node: Some(next.clone()) });
        key = next;
    }
    let branch = branch(tree, &key)?;
    let last_tolerance = steps.last().map_or(1.0, |s| s.tolerance);
    let verification = goodness_test(space, branch.vectors(), net, 1, window, last_tolerance)?;
    let partial = partial || verification.verdict == Verdict::Inconclusive;
    Ok(BranchReport {
        strategy: format!(
            "cutoff = least N past the last support with C(N, min(n,{})) <= 1 + 1/n, window {}, net step {}",
            params.cap, params.sample.window, params.sample.net_step
        ),
        steps,
        branch,
        key,
        partial,
        verification,
    })
}
