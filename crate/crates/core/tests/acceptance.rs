//! Acceptance criteria, one test each. Every test writes a single
//! `criterion N: PASS|FAIL` line to stderr, bypassing output capture.

use std::collections::HashSet;
use std::io::Write;
use std::process::Command as Process;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spreadbench::analysis::{
    equivalence_constant, goodness_test, krivine_p_estimate, nccb_stabilize, quantize, spreading_model_estimate,
    Reference, ScalarNet, Verdict,
};
use spreadbench::blockseq::{interleave_array, leftmost_branch, nccb_from_blocking, tree_from_array, BlockSequence};
use spreadbench::cli::{run, Command, RunConfig};
use spreadbench::combinatorics::{
    coarsenings, hindman_search, milliken_taylor_search, ramsey_search, Blocking, FiniteSet, SearchLimits, Witness,
};
use spreadbench::games::{stabilized_constant, SampleParams};
use spreadbench::spaces::{make_example_space, type_p_witness, Outer, Space, SpaceSpec, SparseVector};

fn report(n: u32, name: &str, passed: bool, detail: &str) {
    let status = if passed { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n:>2}: {status} {name} ({detail})");
    assert!(passed, "criterion {n} ({name}) failed: {detail}");
}

const P: f64 = 2.0;
const PS: [f64; 3] = [1.0, 1.5, 1.8];

fn example_space() -> Space {
    Space::new(make_example_space(P, &PS).unwrap()).unwrap()
}

/// Segment ends for `p = 2`, `ps = (1, 1.5, 1.8)`: `n_s = ⌊s^{p·p_s/(p−p_s)}⌋ + 1`.
const NS: [u64; 3] = [2, 65, 387_420_490];

fn segment(i: usize) -> usize {
    let mut end = 0u64;
    for (s, n) in NS.iter().enumerate() {
        end += n;
        if (i as u64) <= end {
            return s;
        }
    }
    panic!("index {i} outside the space");
}

/// Direct evaluation: `ℓ_{p_s}` norm per segment, then `ℓ_p` across segments.
fn example_norm_oracle(v: &SparseVector) -> f64 {
    let mut parts = [0.0f64; 3];
    for (i, c) in v.iter() {
        let s = segment(i);
        parts[s] += c.abs().powf(PS[s]);
    }
    parts.iter().enumerate().map(|(s, x)| x.powf(1.0 / PS[s]).powf(P)).sum::<f64>().powf(1.0 / P)
}

#[test]
fn criterion_01_sandwich() {
    let space = example_space();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let starts = [1usize, 3, 68];
    let cases = 1500;
    let mut failures = 0;
    let mut oracle_gap = 0.0f64;
    for _ in 0..cases {
        let s0 = rng.gen_range(0..3);
        let reach = [2usize, 65, 200][s0];
        let mut at = starts[s0] + rng.gen_range(0..reach);
        let n = rng.gen_range(1..=4);
        let mut blocks = Vec::new();
        for _ in 0..n {
            let len = rng.gen_range(1..=3);
            let v = SparseVector::new(
                (0..len).map(|j| (at + j, rng.gen_range(0.05..=1.0) * if rng.gen() { 1.0 } else { -1.0 })),
            )
            .unwrap();
            at += len + rng.gen_range(0..3);
            let nv = example_norm_oracle(&v);
            blocks.push(v.scale(1.0 / nv));
        }
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mut sum = SparseVector::zero();
        for (c, y) in a.iter().zip(&blocks) {
            sum.add_scaled(*c, y);
        }
        let value = space.norm(&sum).unwrap();
        oracle_gap = oracle_gap.max((value - example_norm_oracle(&sum)).abs());
        let v = value.powf(P);
        let lower: f64 = a.iter().map(|x| x.abs().powf(P)).sum();
        let upper = (n as f64).powf(P / PS[s0] - 1.0) * lower;
        if v < lower - 1e-9 || v > upper + 1e-9 {
            failures += 1;
        }
    }
    report(
        1,
        "sandwich bounds on the segmented lp-sum",
        failures == 0 && oracle_gap < 1e-12,
        &format!("{cases} cases, {failures} violations, max |norm - oracle| = {oracle_gap:.1e}"),
    );
}

#[test]
fn criterion_02_type_failure() {
    let spec = make_example_space(P, &PS).unwrap();
    let SpaceSpec::LpSum { ns, .. } = &spec else { unreachable!() };
    let mut ok = ns.as_slice() == NS && ns[1] == 65;
    for s in 1..=PS.len() {
        let direct = (ns[s - 1] as f64).powf(1.0 / PS[s - 1] - 1.0 / P) > s as f64;
        ok &= type_p_witness(&spec, s, s as f64).unwrap() && direct;
    }
    // n_s is least: one less fails the defining inequality
    for s in 1..=PS.len() {
        let e = P * PS[s - 1] / (P - PS[s - 1]);
        ok &= ((ns[s - 1] - 1) as f64) <= (s as f64).powf(e) + 1e-6 && (ns[s - 1] as f64) > (s as f64).powf(e) - 1e-6;
    }
    report(2, "type-p failure witnessed at every segment", ok, &format!("ns = {ns:?}"));
}

#[test]
fn criterion_03_spreading_limits() {
    let space = example_space();
    let net = ScalarNet::grid(0.5, 3).unwrap();
    let window = 6;
    let seq = BlockSequence::unit_basis(1, 68 + window + 3);
    let horizons = [1usize, 3, 68];
    let est = spreading_model_estimate(&space, seq.vectors(), &net, &horizons, window, Some(P)).unwrap();
    let mut ok = !est.inconclusive;
    let mut worst = [0.0f64; 3];
    for t in &est.tuples {
        let n = t.tuple.len() as f64;
        for (j, h) in t.estimates.iter().enumerate() {
            let s0 = segment(h.horizon);
            let reference = h.reference.unwrap();
            let rel = h.estimate / reference - 1.0;
            let bound = n.powf(1.0 / PS[s0] - 1.0 / P) - 1.0;
            ok &= rel >= -1e-9 && rel <= bound + 1e-9;
            worst[j] = worst[j].max(rel);
        }
    }
    ok &= worst[2] < worst[1] && worst[1] < worst[0];
    report(
        3,
        "spreading estimates converge across segments",
        ok,
        &format!("max relative error by horizon {horizons:?}: {worst:.4?}"),
    );
}

#[test]
fn criterion_04_nccb_isometry() {
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for p in [1.0, 1.5, 2.0, f64::INFINITY] {
        let space = Space::new(SpaceSpec::lp(p)).unwrap();
        for n in 1..=4 {
            let mut at = 1 + rng.gen_range(0..5);
            let blocks: Vec<FiniteSet> = (0..n)
                .map(|_| {
                    let len = rng.gen_range(1..=4);
                    let b = FiniteSet::interval(at, at + len - 1).unwrap();
                    at += len + rng.gen_range(0..3);
                    b
                })
                .collect();
            let y = nccb_from_blocking(&space, &Blocking::new(blocks).unwrap()).unwrap();
            let r = equivalence_constant(&space, y.vectors(), Reference::Lp { p, n }, 0.5).unwrap();
            worst = worst.max(r.constant - 1.0);
        }
    }
    report(4, "NCCB sequences of lp are isometric to lp^n", worst <= 1e-9, &format!("max C - 1 = {worst:.1e}"));
}

#[test]
fn criterion_05_interleave_oscillation() {
    let space = Space::new(SpaceSpec::interleave(SpaceSpec::lp(1.0), SpaceSpec::lp(2.0), Outer::Max)).unwrap();
    let y = BlockSequence::new((0..40).map(|i| SparseVector::unit(2 * i + 1)).collect()).unwrap();
    let z = BlockSequence::new((0..40).map(|i| SparseVector::unit(2 * i + 2)).collect()).unwrap();
    let tree = tree_from_array(&interleave_array(&y, &z, 2, 20).unwrap(), 20, 2).unwrap();
    let b = leftmost_branch(&tree).unwrap();
    let net = ScalarNet::from_tuples(vec![vec![1.0, 1.0]], 1.0).unwrap();
    let r = goodness_test(&space, b.vectors(), &net, 5, 8, 0.1).unwrap();
    let osc = r.records[0].oscillation;
    // closed forms: two same-row ℓ1 vectors give 2, two ℓ2 vectors give √2
    let same_y = space.norm(&SparseVector::new([(1, 1.0), (3, 1.0)]).unwrap()).unwrap();
    let same_z = space.norm(&SparseVector::new([(2, 1.0), (4, 1.0)]).unwrap()).unwrap();
    let ok = osc >= 2.0 - 2f64.sqrt() - 1e-9
        && r.verdict == Verdict::Oscillating
        && (same_y - 2.0).abs() < 1e-12
        && (same_z - 2f64.sqrt()).abs() < 1e-12;
    report(5, "interleave branch oscillates", ok, &format!("oscillation {osc:.6}, verdict {:?}", r.verdict));
}

/// Brute-force James norm: best sum of squared successive differences over
/// every increasing index tuple in `1..=max+1`.
fn james_brute(v: &SparseVector) -> f64 {
    let top = v.max_index().unwrap_or(0) + 1;
    let mut best = 0.0f64;
    for mask in 1u32..(1 << top) {
        let idx: Vec<usize> = (1..=top).filter(|i| mask & (1 << (i - 1)) != 0).collect();
        let s: f64 = idx.windows(2).map(|w| (v.get(w[1]) - v.get(w[0])).powi(2)).sum();
        best = best.max(s);
    }
    best.sqrt()
}

#[test]
fn criterion_06_james_spreading() {
    let space = Space::new(SpaceSpec::James).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut oracle_gap = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(1..=4);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mut values = Vec::new();
        for _ in 0..5 {
            let mut k = 0;
            let ks: Vec<usize> = (0..n)
                .map(|_| {
                    k += rng.gen_range(1..=4);
                    k
                })
                .collect();
            let mut v = SparseVector::zero();
            for (c, &k) in a.iter().zip(&ks) {
                v.add_scaled(*c, &SparseVector::indicator(&FiniteSet::interval(1, k).unwrap()));
            }
            let value = space.norm(&v).unwrap();
            oracle_gap = oracle_gap.max((value - james_brute(&v)).abs());
            values.push(value);
        }
        let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        worst = worst.max(hi - lo);
    }
    report(
        6,
        "James staircase is 1-spreading",
        worst < 1e-9 && oracle_gap < 1e-9,
        &format!("max spread over gap patterns {worst:.1e}, max |DP - brute force| {oracle_gap:.1e}"),
    );
}

/// All nonempty subsets of `{1..=m}` as bitmasks in a random colouring table.
struct RandomColoring {
    table: Vec<usize>,
}

impl RandomColoring {
    fn new(rng: &mut ChaCha8Rng, m: usize, colors: usize) -> Self {
        RandomColoring { table: (0..1usize << m).map(|_| rng.gen_range(0..colors)).collect() }
    }

    fn color(&self, s: &FiniteSet) -> usize {
        self.table[s.elements().iter().fold(0usize, |acc, &i| acc | (1 << (i - 1)))]
    }
}

fn brute_finite_unions(q: &Blocking) -> Vec<FiniteSet> {
    (1u32..(1 << q.len()))
        .map(|mask| {
            let mut e: Vec<usize> =
                (0..q.len()).filter(|i| mask & (1 << i) != 0).flat_map(|i| q.blocks()[i].elements().to_vec()).collect();
            e.sort_unstable();
            FiniteSet::new(e).unwrap()
        })
        .collect()
}

/// Counts length-`k` coarsenings by assigning each block to a group or none.
fn brute_coarsening_count(len: usize, k: usize) -> usize {
    let mut count = 0;
    let total = (k + 1).pow(len as u32);
    'outer: for code in 0..total {
        let mut c = code;
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
        for pos in 0..len {
            let g = c % (k + 1);
            c /= k + 1;
            if g > 0 {
                groups[g - 1].push(pos);
            }
        }
        if k == 0 || groups.iter().any(Vec::is_empty) {
            continue;
        }
        for w in groups.windows(2) {
            if w[0].last() > w[1].first() {
                continue 'outer;
            }
        }
        count += 1;
    }
    count
}

#[test]
fn criterion_07_combinatorics() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut agree = 0;
    let mut verified = 0;
    let mut found = 0;
    for _ in 0..50 {
        let m = rng.gen_range(3..=8);
        let l = rng.gen_range(1..=3);
        let col = RandomColoring::new(&mut rng, m, 2);
        let h = hindman_search(|s| col.color(s), m, l, SearchLimits::default()).unwrap();
        let mt = milliken_taylor_search(|b| col.color(&b[0]), &Blocking::singletons(m), 1, l, SearchLimits::default())
            .unwrap();
        if h.found == mt.found && h.witness == mt.witness {
            agree += 1;
        }
        if let Some(Witness::Blocking(q)) = &h.witness {
            found += 1;
            let colors: HashSet<usize> = brute_finite_unions(q).iter().map(|s| col.color(s)).collect();
            if colors.len() == 1 && q.len() == l {
                verified += 1;
            }
        } else {
            verified += 1;
        }
    }
    // ramsey witnesses against brute-force k-subsets
    let mut ramsey_ok = true;
    for _ in 0..20 {
        let m = rng.gen_range(4..=8);
        let k = rng.gen_range(1..=2);
        let l = rng.gen_range(k..=3);
        let col = RandomColoring::new(&mut rng, m, 2);
        let r = ramsey_search(|s| col.color(s), m, k, l, SearchLimits::default()).unwrap();
        if let Some(Witness::Set(w)) = r.witness {
            let subsets: HashSet<usize> = brute_finite_unions(
                &Blocking::new(w.elements().iter().map(|&i| FiniteSet::singleton(i).unwrap()).collect()).unwrap(),
            )
            .iter()
            .filter(|s| s.len() == k)
            .map(|s| col.color(s))
            .collect();
            ramsey_ok &= subsets.len() == 1 && w.len() == l;
        }
    }
    // milliken-taylor k=2 witnesses against brute-force coarsenings
    let mut mt_ok = true;
    for _ in 0..10 {
        let m = rng.gen_range(4..=7);
        let col = RandomColoring::new(&mut rng, m, 2);
        let c2 = |b: &[FiniteSet]| (col.color(&b[0]) + col.color(&b[1])) % 2;
        let r = milliken_taylor_search(c2, &Blocking::singletons(m), 2, 3, SearchLimits::default()).unwrap();
        if let Some(Witness::Blocking(q)) = r.witness {
            let colors: HashSet<usize> = coarsenings(&q, 2).iter().map(|e| c2(e.blocks())).collect();
            mt_ok &= colors.len() == 1 && coarsenings(&q, 2).len() == brute_coarsening_count(3, 2);
        }
    }
    let mut counts_ok = coarsenings(&Blocking::singletons(3), 2).len() == 5;
    for len in 1..=5 {
        let p = Blocking::new((0..len).map(|i| FiniteSet::interval(2 * i + 1, 2 * i + 2).unwrap()).collect()).unwrap();
        for k in 0..=len + 1 {
            counts_ok &= coarsenings(&p, k).len() == brute_coarsening_count(len, k);
        }
    }
    let ok = agree == 50 && verified == 50 && ramsey_ok && mt_ok && counts_ok;
    report(
        7,
        "combinatorial searches are sound",
        ok,
        &format!("MT(k=1) = Hindman on {agree}/50, {found} witnesses verified, ramsey {ramsey_ok}, MT(k=2) {mt_ok}, counts {counts_ok}"),
    );
}

#[test]
fn criterion_08_stabilization() {
    let space = example_space();
    let net = ScalarNet::grid(0.5, 2).unwrap();
    let (eps, quantum) = (0.0, 0.05);
    let r = nccb_stabilize(&space, 12, &net, eps, quantum, 3, SearchLimits::default()).unwrap();
    let mut ok = !r.partial && r.verified;
    let mut worst = 0.0f64;
    for a in &net.tuples {
        let values: Vec<f64> = coarsenings(&r.blocking, a.len())
            .iter()
            .map(|e| {
                let y = nccb_from_blocking(&space, e).unwrap();
                let mut v = SparseVector::zero();
                for (c, x) in a.iter().zip(y.vectors()) {
                    v.add_scaled(*c, x);
                }
                example_norm_oracle(&v)
            })
            .collect();
        let cells: HashSet<usize> = values.iter().map(|&v| quantize(v, quantum)).collect();
        let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        ok &= cells.len() == 1 && !values.is_empty();
        worst = worst.max(hi - lo);
    }
    ok &= worst <= eps + quantum;
    report(
        8,
        "stabilized blocking is monochromatic on every coarsening",
        ok,
        &format!("P = {}, max oscillation {worst:.4}, {} search nodes", r.blocking, r.search.nodes_explored),
    );
}

#[test]
fn criterion_09_stabilized_constants() {
    let params = SampleParams { window: 8, net_step: 0.25 };
    let cutoffs = [1usize, 10, 100];
    let l2 = Space::new(SpaceSpec::lp(2.0)).unwrap();
    let lp: Vec<f64> = cutoffs.iter().map(|&n| stabilized_constant(&l2, 2.0, 2, n, params).unwrap().constant).collect();
    let inter = Space::new(SpaceSpec::interleave(SpaceSpec::lp(1.0), SpaceSpec::lp(2.0), Outer::Max)).unwrap();
    let il: Vec<f64> =
        cutoffs.iter().map(|&n| stabilized_constant(&inter, 2.0, 2, n, params).unwrap().constant).collect();
    let ex = example_space();
    let reports: Vec<_> = cutoffs.iter().map(|&n| stabilized_constant(&ex, 2.0, 2, n, params).unwrap()).collect();
    let es: Vec<f64> = reports.iter().map(|r| r.constant).collect();
    let last = reports.last().unwrap();
    let net_error = last.equivalence.constant_bound - last.equivalence.constant;
    let bound = 2f64.powf(1.0 / PS[segment(100)] - 0.5);
    let ok = lp.iter().all(|c| (c - 1.0).abs() < 1e-9)
        && il.iter().all(|&c| c >= 2f64.sqrt() - 1e-6)
        && es.windows(2).all(|w| w[1] <= w[0] + 1e-12)
        && es[2] <= bound + net_error.max(0.0) + 1e-12;
    report(9, "stabilized constants", ok, &format!("lp {lp:.6?}, interleave {il:.6?}, segmented {es:.6?}"));
}

#[test]
fn criterion_10_krivine() {
    let mut est = Vec::new();
    let mut ok = true;
    for p in [1.0, 2.0, 3.0] {
        let k = krivine_p_estimate(&Space::new(SpaceSpec::lp(p)).unwrap(), 32, 1).unwrap();
        ok &= (k.p - p).abs() <= 0.01;
        est.push(k.p);
    }
    let c0 = krivine_p_estimate(&Space::new(SpaceSpec::C0).unwrap(), 32, 1).unwrap();
    ok &= c0.p.is_infinite();
    report(10, "Krivine p estimates", ok, &format!("lp(1,2,3) -> {est:?}, c0 -> {}", c0.p));
}

#[test]
fn criterion_11_determinism() {
    let ex = make_example_space(P, &PS).unwrap();
    let mut configs = vec![
        RunConfig::new(Command::VerifySegmented { p: 2.0, ps: PS.to_vec(), trials: 100 }, None),
        RunConfig::new(Command::Stabilized { p: 2.0, n: 2, schedule: vec![1, 10], window: 6 }, Some(ex.clone())),
        RunConfig::new(Command::Hindman { coloring: "min-parity".into(), m: 8, l: 3, max_nodes: None }, None),
        RunConfig::new(Command::KrivineP { terms: 16, offset: 3 }, Some(ex)),
    ];
    configs[0].seed = 11;
    let mut g = RunConfig::new(Command::Goodness { sequence: "unit".into(), length: None }, Some(SpaceSpec::James));
    g.max_n = 2;
    g.format = spreadbench::cli::Format::Csv;
    configs.push(g);
    let mut ok = configs.iter().all(|c| run(c).unwrap().rendered() == run(c).unwrap().rendered());

    let exe = env!("CARGO_BIN_EXE_spreadbench");
    let args = ["verify-example31", "--trials", "50", "--seed", "3"];
    let a = Process::new(exe).args(args).output().unwrap();
    let b = Process::new(exe).args(args).output().unwrap();
    ok &= a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    report(
        11,
        "identical configs give byte-identical reports",
        ok,
        &format!("{} library configs, 1 binary run pair", configs.len()),
    );
}
