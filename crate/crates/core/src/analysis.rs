//! Goodness, spreading-model estimates, equivalence constants, extraction,
//! NCCB stabilization and the Krivine-p estimator.

use serde::{Deserialize, Serialize};

use crate::blockseq::{nccb_from_blocking, BlockSequence};
use crate::combinatorics::{
    coarsenings, milliken_taylor_search_joint, ArityColoring, Blocking, FiniteSet, JointCertificate, SearchLimits,
};
use crate::error::{Error, Result};
use crate::spaces::{Space, SparseVector};

const TOL: f64 = 1e-9;

/// A finite set of coefficient tuples.
///
/// Tuples are sign-canonical (first nonzero coordinate positive). The zero
/// tuple is never included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarNet {
    pub tuples: Vec<Vec<f64>>,
    pub granularity: f64,
}

/// `1/step` as an integer, if `step` divides 1.
fn grid_denominator(step: f64) -> Result<u32> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::input(format!("net step must lie in (0,1], got {step}")));
    }
    let q = (1.0 / step).round();
    if ((1.0 / step) - q).abs() > TOL || q > 1e6 {
        return Err(Error::input(format!("net step {step} must be 1/q for a natural q")));
    }
    Ok(q as u32)
}

fn sign_canonical(t: &[f64]) -> bool {
    t.iter().find(|&&x| x != 0.0).is_some_and(|&x| x > 0.0)
}

/// Calls `f` on every tuple of grid levels in `values`, in lexicographic order.
fn for_each_product(values: &[f64], n: usize, f: &mut dyn FnMut(&[f64])) {
    fn rec(values: &[f64], n: usize, acc: &mut Vec<f64>, f: &mut dyn FnMut(&[f64])) {
        if acc.len() == n {
            f(acc);
            return;
        }
        for &v in values {
            acc.push(v);
            rec(values, n, acc, f);
            acc.pop();
        }
    }
    rec(values, n, &mut Vec::with_capacity(n), f);
}

/// Grid levels `1, 1-δ, ..., -1`.
fn levels(q: u32) -> Vec<f64> {
    (0..=2 * q).map(|i| 1.0 - f64::from(i) / f64::from(q)).collect()
}

impl ScalarNet {
    /// Every nonzero sign-canonical tuple of length `1..=max_n` with
    /// coordinates in `{1, 1-δ, ..., -1}`.
    pub fn grid(step: f64, max_n: usize) -> Result<Self> {
        let q = grid_denominator(step)?;
        if max_n == 0 {
            return Err(Error::input("net max n must be >= 1"));
        }
        let values = levels(q);
        let mut tuples = Vec::new();
        for n in 1..=max_n {
            for_each_product(&values, n, &mut |t| {
                if sign_canonical(t) {
                    tuples.push(t.to_vec());
                }
            });
        }
        Ok(ScalarNet { tuples, granularity: 1.0 / f64::from(q) })
    }

    pub fn from_tuples(tuples: Vec<Vec<f64>>, granularity: f64) -> Result<Self> {
        let q = f64::from(grid_denominator(granularity)?);
        for t in &tuples {
            if t.is_empty() || t.iter().all(|&x| x == 0.0) {
                return Err(Error::input("net tuples must be nonempty and nonzero"));
            }
            for &x in t {
                if !(-1.0..=1.0).contains(&x) || ((x * q) - (x * q).round()).abs() > TOL {
                    return Err(Error::input(format!("coordinate {x} not on the {granularity} grid in [-1,1]")));
                }
            }
        }
        Ok(ScalarNet { tuples, granularity })
    }

    pub fn max_len(&self) -> usize {
        self.tuples.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

impl Default for ScalarNet {
    fn default() -> Self {
        ScalarNet::grid(0.25, 4).expect("default net parameters are valid")
    }
}

/// Calls `f` on every increasing `n`-tuple of 1-based positions in `lo..=hi`.
pub(crate) fn for_each_increasing(lo: usize, hi: usize, n: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(next: usize, hi: usize, n: usize, acc: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if acc.len() == n {
            f(acc);
            return;
        }
        let need = n - acc.len();
        let mut k = next;
        while k + need - 1 <= hi {
            acc.push(k);
            rec(k + 1, hi, n, acc, f);
            acc.pop();
            k += 1;
        }
    }
    if n == 0 || lo > hi {
        return;
    }
    rec(lo, hi, n, &mut Vec::with_capacity(n), f);
}

/// `‖Σ a_i x_{k_i}‖` for 1-based positions.
pub(crate) fn combo_norm(space: &Space, seq: &[SparseVector], a: &[f64], ks: &[usize]) -> Result<f64> {
    let mut v = SparseVector::zero();
    for (&c, &k) in a.iter().zip(ks) {
        v.add_scaled(c, &seq[k - 1]);
    }
    space.norm(&v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    GoodWithinTolerance,
    Oscillating,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodnessRecord {
    pub tuple: Vec<f64>,
    pub horizon: usize,
    pub window: usize,
    pub granularity: f64,
    pub evaluations: u64,
    pub sup: f64,
    pub inf: f64,
    pub oscillation: f64,
    pub estimate: f64,
    pub argsup: Vec<usize>,
    pub arginf: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodnessReport {
    pub horizon: usize,
    pub window: usize,
    pub epsilon: f64,
    pub sequence_len: usize,
    pub required_len: usize,
    pub records: Vec<GoodnessRecord>,
    pub max_oscillation: f64,
    pub verdict: Verdict,
    pub diagnostics: Vec<String>,
}

fn tuple_record(
    space: &Space,
    seq: &[SparseVector],
    a: &[f64],
    k: usize,
    h: usize,
    granularity: f64,
) -> Result<GoodnessRecord> {
    let mut rec = GoodnessRecord {
        tuple: a.to_vec(),
        horizon: k,
        window: h,
        granularity,
        evaluations: 0,
        sup: f64::NEG_INFINITY,
        inf: f64::INFINITY,
        oscillation: 0.0,
        estimate: 0.0,
        argsup: Vec::new(),
        arginf: Vec::new(),
    };
    let hi = (k + h).min(seq.len());
    let mut err = None;
    for_each_increasing(k, hi, a.len(), &mut |ks| {
        if err.is_some() {
            return;
        }
        match combo_norm(space, seq, a, ks) {
            Ok(v) => {
                rec.evaluations += 1;
                if v > rec.sup {
                    rec.sup = v;
                    rec.argsup = ks.to_vec();
                }
                if v < rec.inf {
                    rec.inf = v;
                    rec.arginf = ks.to_vec();
                }
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    if rec.evaluations == 0 {
        rec.sup = 0.0;
        rec.inf = 0.0;
    } else {
        rec.oscillation = rec.sup - rec.inf;
        rec.estimate = 0.5 * (rec.sup + rec.inf);
    }
    Ok(rec)
}

/// Oscillation of `‖Σ a_i x_{k_i}‖` over all increasing tuples with
/// `K <= k_1` and `k_n <= K+H`, for every tuple `a` of the net.
pub fn goodness_test(
    space: &Space,
    seq: &[SparseVector],
    net: &ScalarNet,
    horizon: usize,
    window: usize,
    epsilon: f64,
) -> Result<GoodnessReport> {
    if horizon == 0 {
        return Err(Error::input("horizon K is 1-based and must be >= 1"));
    }
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::input(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let required_len = horizon + window + net.max_len();
    let mut diagnostics = Vec::new();
    if seq.len() < required_len {
        diagnostics.push(format!(
            "sequence has {} vectors, horizon {horizon} with window {window} and tuple length {} needs {required_len}",
            seq.len(),
            net.max_len()
        ));
    }
    let records = net
        .tuples
        .iter()
        .map(|a| tuple_record(space, seq, a, horizon, window, net.granularity))
        .collect::<Result<Vec<_>>>()?;
    for r in records.iter().filter(|r| r.evaluations == 0) {
        diagnostics.push(format!("no admissible positions for tuple {:?}", r.tuple));
    }
    let max_oscillation = records.iter().map(|r| r.oscillation).fold(0.0, f64::max);
    let verdict = if !diagnostics.is_empty() {
        Verdict::Inconclusive
    } else if max_oscillation <= epsilon {
        Verdict::GoodWithinTolerance
    } else {
        Verdict::Oscillating
    };
    Ok(GoodnessReport {
        horizon,
        window,
        epsilon,
        sequence_len: seq.len(),
        required_len,
        records,
        max_oscillation,
        verdict,
        diagnostics,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonEstimate {
    pub horizon: usize,
    pub estimate: f64,
    pub sup: f64,
    pub inf: f64,
    pub oscillation: f64,
    pub reference: Option<f64>,
    pub error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleEstimate {
    pub tuple: Vec<f64>,
    pub estimates: Vec<HorizonEstimate>,
    pub oscillation_nonincreasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadingEstimate {
    pub window: usize,
    pub granularity: f64,
    pub reference_p: Option<f64>,
    pub tuples: Vec<TupleEstimate>,
    pub monotone: bool,
    pub inconclusive: bool,
    pub diagnostics: Vec<String>,
}

/// `(Σ|a_i|^p)^{1/p}`, with `p = ∞` the max norm.
pub fn lp_value(a: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        a.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else {
        a.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Per-tuple limit estimates at each horizon `K` (window `H` fixed).
pub fn spreading_model_estimate(
    space: &Space,
    seq: &[SparseVector],
    net: &ScalarNet,
    horizons: &[usize],
    window: usize,
    reference_p: Option<f64>,
) -> Result<SpreadingEstimate> {
    if horizons.is_empty() || horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("horizons must be a nonempty increasing list"));
    }
    let mut diagnostics = Vec::new();
    let reports = horizons
        .iter()
        .map(|&k| goodness_test(space, seq, net, k, window, f64::INFINITY))
        .collect::<Result<Vec<_>>>()?;
    for r in &reports {
        diagnostics.extend(r.diagnostics.iter().map(|d| format!("K={}: {d}", r.horizon)));
    }
    let tuples: Vec<TupleEstimate> = net
        .tuples
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let estimates: Vec<HorizonEstimate> = reports
                .iter()
                .map(|r| {
                    let rec = &r.records[i];
                    let reference = reference_p.map(|p| lp_value(a, p));
                    HorizonEstimate {
                        horizon: r.horizon,
                        estimate: rec.estimate,
                        sup: rec.sup,
                        inf: rec.inf,
                        oscillation: rec.oscillation,
                        reference,
                        error: reference.map(|v| (rec.estimate - v).abs()),
                    }
                })
                .collect();
            let oscillation_nonincreasing = estimates.windows(2).all(|w| w[1].oscillation <= w[0].oscillation + TOL);
            TupleEstimate { tuple: a.clone(), estimates, oscillation_nonincreasing }
        })
        .collect();
    let monotone = tuples.iter().all(|t| t.oscillation_nonincreasing);
    Ok(SpreadingEstimate {
        window,
        granularity: net.granularity,
        reference_p,
        inconclusive: reports.iter().any(|r| r.verdict == Verdict::Inconclusive),
        tuples,
        monotone,
        diagnostics,
    })
}

/// What a sequence is compared against.
#[derive(Clone, Debug)]
pub enum Reference<'a> {
    /// The unit vector basis of `ℓ_p^n`.
    Lp {
        p: f64,
        n: usize,
    },
    Sequence {
        space: &'a Space,
        vectors: &'a [SparseVector],
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub n: usize,
    pub net_step: f64,
    /// `A = max ‖Σ a e_ref‖ / ‖Σ a y‖`.
    pub lower: f64,
    /// `B = max ‖Σ a y‖ / ‖Σ a e_ref‖`.
    pub upper: f64,
    pub constant: f64,
    /// Coefficients attaining `A` and `B`, normalized in the reference norm.
    pub lower_certificate: Vec<f64>,
    pub upper_certificate: Vec<f64>,
    /// ℓ1 mesh of the net on the cube surface.
    pub mesh: f64,
    /// Bounds on the true suprema over all coefficients, from Lipschitz
    /// continuity of both norms; infinite when the mesh is too coarse.
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub constant_bound: f64,
}

struct Side<'a> {
    space: &'a Space,
    vectors: Vec<SparseVector>,
    lipschitz: f64,
}

impl<'a> Side<'a> {
    /// The Lipschitz constant of `a ↦ ‖Σ a_i x_i‖` in the ℓ1 metric is `max ‖x_i‖`.
    fn new(space: &'a Space, vectors: Vec<SparseVector>) -> Result<Self> {
        let mut lipschitz = 0.0f64;
        for v in &vectors {
            lipschitz = lipschitz.max(space.norm(v)?);
        }
        Ok(Side { space, vectors, lipschitz })
    }

    fn eval(&self, a: &[f64]) -> Result<f64> {
        let mut v = SparseVector::zero();
        for (&c, x) in a.iter().zip(&self.vectors) {
            v.add_scaled(c, x);
        }
        self.space.norm(&v)
    }
}

/// Net scan of the equivalence constant between the first `n` vectors of
/// `seq` and the reference.
pub fn equivalence_constant(
    space: &Space,
    seq: &[SparseVector],
    reference: Reference<'_>,
    net_step: f64,
) -> Result<EquivalenceReport> {
    let lp_space;
    let (ref_space, ref_vectors): (&Space, Vec<SparseVector>) = match reference {
        Reference::Lp { p, n } => {
            lp_space = Space::new(crate::spaces::SpaceSpec::lp(p))?;
            (&lp_space, (1..=n).map(SparseVector::unit).collect())
        }
        Reference::Sequence { space, vectors } => (space, vectors.to_vec()),
    };
    let n = ref_vectors.len();
    if n == 0 {
        return Err(Error::input("reference must have at least one vector"));
    }
    if seq.len() < n {
        return Err(Error::input(format!("sequence has {} vectors, reference needs {n}", seq.len())));
    }
    let q = grid_denominator(net_step)?;
    let ys = Side::new(space, seq[..n].to_vec())?;
    let es = Side::new(ref_space, ref_vectors)?;

    let mesh = (n as f64 - 1.0) * net_step / 2.0;
    let mut best_a = (f64::NEG_INFINITY, Vec::new(), f64::NEG_INFINITY);
    let mut best_b = (f64::NEG_INFINITY, Vec::new(), f64::NEG_INFINITY);
    let mut err = None;
    for_each_product(&levels(q), n, &mut |t| {
        if err.is_some() || !sign_canonical(t) || t.iter().all(|x| x.abs() < 1.0) {
            return;
        }
        let (fy, fe) = match (ys.eval(t), es.eval(t)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                err = Some(e);
                return;
            }
        };
        if fy == 0.0 || fe == 0.0 {
            err = Some(Error::input(format!("coefficients {t:?} give a zero vector")));
            return;
        }
        let bound = |num: f64, ln: f64, den: f64, ld: f64| {
            let d = den - ld * mesh;
            if d > 0.0 {
                (num + ln * mesh) / d
            } else {
                f64::INFINITY
            }
        };
        let ra = fe / fy;
        if ra > best_a.0 {
            best_a.0 = ra;
            best_a.1 = t.iter().map(|x| x / fe).collect();
        }
        best_a.2 = best_a.2.max(bound(fe, es.lipschitz, fy, ys.lipschitz));
        let rb = fy / fe;
        if rb > best_b.0 {
            best_b.0 = rb;
            best_b.1 = t.iter().map(|x| x / fe).collect();
        }
        best_b.2 = best_b.2.max(bound(fy, ys.lipschitz, fe, es.lipschitz));
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(EquivalenceReport {
        n,
        net_step,
        lower: best_a.0,
        upper: best_b.0,
        constant: best_a.0 * best_b.0,
        lower_certificate: best_a.1,
        upper_certificate: best_b.1,
        mesh,
        lower_bound: best_a.2,
        upper_bound: best_b.2,
        constant_bound: best_a.2 * best_b.2,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionStage {
    pub epsilon: f64,
    /// 1-based input index frozen as the stage's diagonal element.
    pub frozen: Option<usize>,
    pub pool_len: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionReport {
    /// Selected 1-based indices into the input list.
    pub indices: Vec<usize>,
    pub stages: Vec<ExtractionStage>,
    /// Positions `>= certified_horizon` of the selection lie inside the last
    /// stage's stabilized sub-list.
    pub certified_horizon: usize,
    pub verification: GoodnessReport,
    pub inconclusive: bool,
}

/// Greedy sub-list of `pool` on which every increasing `n`-tuple of `a`
/// evaluates inside `[lo, lo+ε]`.
fn greedy_window(
    space: &Space,
    vectors: &[SparseVector],
    pool: &[usize],
    a: &[f64],
    lo: f64,
    eps: f64,
) -> Result<Vec<usize>> {
    let n = a.len();
    let mut chosen: Vec<usize> = Vec::new();
    for &c in pool {
        let mut ok = true;
        if chosen.len() + 1 >= n {
            let mut err = None;
            for_each_increasing(1, chosen.len(), n - 1, &mut |pos| {
                if !ok || err.is_some() {
                    return;
                }
                let mut ks: Vec<usize> = pos.iter().map(|&p| chosen[p - 1]).collect();
                ks.push(c);
                match combo_norm(space, vectors, a, &ks) {
                    Ok(v) => ok = v >= lo - TOL && v <= lo + eps + TOL,
                    Err(e) => err = Some(e),
                }
            });
            if n == 1 {
                let v = combo_norm(space, vectors, a, &[c])?;
                ok = v >= lo - TOL && v <= lo + eps + TOL;
            }
            if let Some(e) = err {
                return Err(e);
            }
        }
        if ok {
            chosen.push(c);
        }
    }
    Ok(chosen)
}

/// Finite Brunel-Sucheston extraction: per stage, every net tuple refines
/// the pool to a sub-list where its values vary by at most `ε_m`, then the
/// pool's first element is frozen as the stage's diagonal element.
pub fn brunel_sucheston_extract(
    space: &Space,
    vectors: &[SparseVector],
    net: &ScalarNet,
    schedule: &[f64],
    window: usize,
) -> Result<ExtractionReport> {
    if schedule.is_empty()
        || schedule.iter().any(|&e| e.is_nan() || e <= 0.0)
        || schedule.windows(2).any(|w| w[1] > w[0])
    {
        return Err(Error::input("epsilon schedule must be a nonempty nonincreasing list of positive reals"));
    }
    for (i, v) in vectors.iter().enumerate() {
        let nv = space.norm(v)?;
        if (nv - 1.0).abs() > TOL {
            return Err(Error::input(format!("vector {} has norm {nv}, expected 1", i + 1)));
        }
    }
    let max_sum = |a: &[f64]| a.iter().map(|x| x.abs()).sum::<f64>();
    let mut frozen = Vec::new();
    let mut pool: Vec<usize> = (1..=vectors.len()).collect();
    let mut stages = Vec::new();
    for &eps in schedule {
        for a in &net.tuples {
            if pool.len() < a.len() {
                continue;
            }
            let top = max_sum(a);
            let mut best: Option<Vec<usize>> = None;
            let mut j = 0u32;
            loop {
                let lo = f64::from(j) * eps / 2.0;
                if lo > top + TOL {
                    break;
                }
                let cand = greedy_window(space, vectors, &pool, a, lo, eps)?;
                let better = match &best {
                    None => true,
                    Some(b) => cand.len() > b.len() || (cand.len() == b.len() && cand < *b),
                };
                if better {
                    best = Some(cand);
                }
                j += 1;
            }
            pool = best.unwrap_or_default();
        }
        let f = (!pool.is_empty()).then(|| pool.remove(0));
        if let Some(f) = f {
            frozen.push(f);
        }
        stages.push(ExtractionStage { epsilon: eps, frozen: f, pool_len: pool.len() });
    }
    let mut indices = frozen;
    indices.extend(pool);
    let selection: Vec<SparseVector> = indices.iter().map(|&i| vectors[i - 1].clone()).collect();
    let certified_horizon = schedule.len();
    let last = schedule[schedule.len() - 1];
    let verification = goodness_test(space, &selection, net, certified_horizon, window, last)?;
    let inconclusive = verification.verdict != Verdict::GoodWithinTolerance;
    Ok(ExtractionReport { indices, stages, certified_horizon, verification, inconclusive })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleCheck {
    pub tuple: Vec<f64>,
    pub coarsenings: usize,
    pub monochromatic: bool,
    pub color: Option<usize>,
    pub sup: f64,
    pub inf: f64,
    pub oscillation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizeReport {
    pub ground: usize,
    pub target_len: usize,
    pub epsilon: f64,
    pub quantum: f64,
    pub granularity: f64,
    pub search: JointCertificate,
    /// The stabilized blocking, or the singletons prefix when the search failed.
    pub blocking: Blocking,
    pub partial: bool,
    pub checks: Vec<TupleCheck>,
    pub verified: bool,
}

/// Quantization cell of a norm value.
pub fn quantize(value: f64, quantum: f64) -> usize {
    (value / quantum + TOL).floor().max(0.0) as usize
}

type BlockColoring<'a> = Box<dyn Fn(&[FiniteSet]) -> usize + 'a>;

/// Stabilizes NCCB norms for every net tuple at once: searches `⟨{1..M}⟩^L`
/// for `P` on whose coarsenings each tuple's quantized NCCB norm is constant,
/// then re-verifies exhaustively over `⟨P⟩^n`.
pub fn nccb_stabilize(
    space: &Space,
    ground: usize,
    net: &ScalarNet,
    epsilon: f64,
    quantum: f64,
    target_len: usize,
    limits: SearchLimits,
) -> Result<StabilizeReport> {
    if quantum.is_nan() || quantum <= 0.0 {
        return Err(Error::input(format!("quantum must be > 0, got {quantum}")));
    }
    if target_len < net.max_len() {
        return Err(Error::input(format!(
            "target length {target_len} is shorter than the longest net tuple ({})",
            net.max_len()
        )));
    }
    let value = |a: &[f64], blocks: &[FiniteSet]| -> Result<f64> {
        let y = nccb_from_blocking(space, &Blocking::new(blocks.to_vec())?)?;
        let mut v = SparseVector::zero();
        for (&c, x) in a.iter().zip(y.vectors()) {
            v.add_scaled(c, x);
        }
        space.norm(&v)
    };
    let fns: Vec<BlockColoring<'_>> = net
        .tuples
        .iter()
        .map(|a| {
            let value = &value;
            Box::new(move |blocks: &[FiniteSet]| value(a, blocks).map_or(usize::MAX, |v| quantize(v, quantum)))
                as Box<dyn Fn(&[FiniteSet]) -> usize>
        })
        .collect();
    let colorings: Vec<ArityColoring<'_>> =
        net.tuples.iter().zip(&fns).map(|(a, f)| ArityColoring { arity: a.len(), color: f.as_ref() }).collect();
    let search = milliken_taylor_search_joint(&colorings, &Blocking::singletons(ground), target_len, limits)?;
    let partial = !search.found;
    let blocking = search.witness.clone().unwrap_or_else(|| Blocking::singletons(ground).truncate(target_len));

    let mut checks = Vec::with_capacity(net.len());
    for a in &net.tuples {
        let mut colors = Vec::new();
        let (mut sup, mut inf) = (f64::NEG_INFINITY, f64::INFINITY);
        let cs = coarsenings(&blocking, a.len());
        for e in &cs {
            let v = value(a, e.blocks())?;
            sup = sup.max(v);
            inf = inf.min(v);
            colors.push(quantize(v, quantum));
        }
        let monochromatic = colors.windows(2).all(|w| w[0] == w[1]);
        checks.push(TupleCheck {
            tuple: a.clone(),
            coarsenings: cs.len(),
            monochromatic,
            color: colors.first().copied().filter(|_| monochromatic),
            sup,
            inf,
            oscillation: if cs.is_empty() { 0.0 } else { sup - inf },
        });
    }
    let verified = !partial && checks.iter().all(|c| c.monochromatic && c.oscillation <= epsilon + quantum);
    Ok(StabilizeReport {
        ground,
        target_len,
        epsilon,
        quantum,
        granularity: net.granularity,
        search,
        blocking,
        partial,
        checks,
        verified,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrivineEstimate {
    pub max_n: usize,
    pub offset: usize,
    pub norms: Vec<f64>,
    pub slope: f64,
    /// Least-squares estimate of `p`, clamped into `[1, ∞]`.
    #[serde(with = "crate::spaces::exponent")]
    pub p: f64,
    pub r_squared: f64,
    pub monotone: bool,
}

/// Fits `log ‖Σ_{i<=n} y_i‖` against `log n` for NCCB vectors over the
/// singletons `{offset}, {offset+1}, ...` and returns `1/slope`.
pub fn krivine_p_estimate(space: &Space, max_n: usize, offset: usize) -> Result<KrivineEstimate> {
    if max_n < 4 {
        return Err(Error::input(format!("max n must be >= 4, got {max_n}")));
    }
    if offset == 0 {
        return Err(Error::input("offset is 1-based"));
    }
    let blocking = Blocking::new((offset..offset + max_n).map(|i| FiniteSet::singleton(i).expect("i >= 1")).collect())?;
    let y: BlockSequence = nccb_from_blocking(space, &blocking)?;
    let mut sum = SparseVector::zero();
    let mut norms = Vec::with_capacity(max_n);
    for v in y.vectors() {
        sum.add_scaled(1.0, v);
        norms.push(space.norm(&sum)?);
    }
    let xs: Vec<f64> = (1..=max_n).map(|n| (n as f64).ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let m = max_n as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy < 1e-24 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    let p = if slope <= 1e-12 { f64::INFINITY } else { (1.0 / slope).max(1.0) };
    let monotone = norms.windows(2).all(|w| w[1] >= w[0] - TOL);
    Ok(KrivineEstimate { max_n, offset, norms, slope, p, r_squared, monotone })
}
