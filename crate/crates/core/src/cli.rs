//! Command-line front end. Parsing lives in [`Cli`]; everything after that
//! goes through a [`RunConfig`], so identical configs give identical reports.

use std::cell::RefCell;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    equivalence_constant, goodness_test, krivine_p_estimate, nccb_stabilize, spreading_model_estimate, Reference,
    ScalarNet, Verdict,
};
use crate::blockseq::{interleave_array, leftmost_branch, nccb_from_blocking, tree_from_array, BlockSequence};
use crate::combinatorics::{
    hindman_search, milliken_taylor_search, ramsey_search, verify_hindman, verify_milliken_taylor, verify_ramsey,
    Blocking, FiniteSet, NamedColoring, SearchCertificate, SearchLimits, TableColoring, Witness,
};
use crate::error::{Error, Result};
use crate::games::{asymptotic_lp_verdict, play, SampleParams, SubspaceStrategy, VectorStrategy};
use crate::spaces::{make_example_space, type_p_witness, Space, SpaceSpec, SparseVector};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug, Clone)]
#[command(
    name = "spreadbench",
    version,
    about = "Spreading models, block sequences and asymptotic games on concrete sequence spaces"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Space spec as a JSON file path or inline JSON.
    #[arg(long, global = true)]
    pub space: Option<String>,
    /// Coefficient grid step, 1/q for a natural q.
    #[arg(long, global = true, default_value_t = 0.25)]
    pub net_step: f64,
    /// Longest coefficient tuple in the net.
    #[arg(long, global = true, default_value_t = 4)]
    pub max_n: usize,
    /// Horizon and window as `K,H`.
    #[arg(long, global = true)]
    pub horizon: Option<Horizon>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Horizon {
    pub k: usize,
    pub h: usize,
}

impl FromStr for Horizon {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (k, h) = s.split_once(',').ok_or("expected K,H")?;
        let k: usize = k.trim().parse().map_err(|e| format!("bad K: {e}"))?;
        let h: usize = h.trim().parse().map_err(|e| format!("bad H: {e}"))?;
        if k == 0 {
            return Err("K is 1-based".into());
        }
        Ok(Horizon { k, h })
    }
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Norm of a sparse vector such as `1:1,3:-1`.
    Norm {
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
    },
    /// Sandwich bounds and type-p failures of the segmented ℓ_p-sum.
    #[command(name = "verify-example31")]
    #[serde(rename = "verify-example31")]
    VerifySegmented {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.5, 1.8])]
        ps: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Oscillation of a sequence over the coefficient net.
    Goodness {
        #[arg(long, default_value = "unit")]
        sequence: String,
        #[arg(long)]
        length: Option<usize>,
    },
    /// Limit estimates at several horizons.
    Spreading {
        #[arg(long, default_value = "unit")]
        sequence: String,
        #[arg(long)]
        length: Option<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 10, 20])]
        horizons: Vec<usize>,
        #[arg(long)]
        reference_p: Option<f64>,
    },
    /// Equivalence constant of the first n vectors against ℓ_p^n.
    Equivalence {
        #[arg(long, default_value = "unit")]
        sequence: String,
        #[arg(long, default_value_t = 2.0)]
        #[serde(with = "crate::spaces::exponent")]
        reference_p: f64,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Plays the asymptotic game between two named strategies.
    Game {
        /// `constant:M`, `past-support:START,LEAD` or `fixed:M1,M2,...`.
        #[arg(long, default_value = "constant:1")]
        subspace: String,
        /// `unit`, `flat:W` or `combo:A1,A2,...`.
        #[arg(long, default_value = "unit", allow_hyphen_values = true)]
        vector: String,
        #[arg(long, default_value_t = 4)]
        rounds: usize,
        #[arg(long)]
        reference_p: Option<f64>,
    },
    /// Stabilized constants C(N, n) over a cutoff schedule.
    Stabilized {
        #[arg(long, default_value_t = 2.0)]
        #[serde(with = "crate::spaces::exponent")]
        p: f64,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 10, 100])]
        schedule: Vec<usize>,
        #[arg(long, default_value_t = 8)]
        window: usize,
    },
    /// Monochromatic set for a colouring of k-subsets.
    Ramsey {
        /// `min-parity`, `size-parity`, `constant` or `file:<path>`.
        #[arg(long)]
        coloring: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        max_nodes: Option<u64>,
    },
    /// Blocking with monochromatic finite unions.
    Hindman {
        #[arg(long)]
        coloring: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        max_nodes: Option<u64>,
    },
    /// Blocking with monochromatic k-coarsenings.
    Milliken {
        #[arg(long)]
        coloring: String,
        /// Ground blocking; singletons `1..=m` when absent.
        #[arg(long)]
        blocking: Option<String>,
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        max_nodes: Option<u64>,
    },
    /// Blocking on which quantized NCCB norms stabilize.
    StabilizeNccb {
        #[arg(long, default_value_t = 12)]
        m: usize,
        #[arg(long, default_value_t = 0.05)]
        quantum: f64,
        /// Target blocking length; defaults to the net's max n.
        #[arg(long)]
        length: Option<usize>,
        #[arg(long)]
        max_nodes: Option<u64>,
    },
    /// Least-squares estimate of the Krivine p.
    KrivineP {
        #[arg(long, default_value_t = 64)]
        terms: usize,
        #[arg(long, default_value_t = 1)]
        offset: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Norm { .. } => "norm",
            Command::VerifySegmented { .. } => "verify-example31",
            Command::Goodness { .. } => "goodness",
            Command::Spreading { .. } => "spreading",
            Command::Equivalence { .. } => "equivalence",
            Command::Game { .. } => "game",
            Command::Stabilized { .. } => "stabilized",
            Command::Ramsey { .. } => "ramsey",
            Command::Hindman { .. } => "hindman",
            Command::Milliken { .. } => "milliken",
            Command::StabilizeNccb { .. } => "stabilize-nccb",
            Command::KrivineP { .. } => "krivine-p",
        }
    }
}

/// Contents of files named on the command line, read once up front.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coloring_table: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence_vectors: Option<Vec<SparseVector>>,
}

/// Everything a run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub space: Option<SpaceSpec>,
    pub net_step: f64,
    pub max_n: usize,
    pub horizon: Option<Horizon>,
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub format: Format,
    #[serde(default)]
    pub inputs: Inputs,
}

const DEFAULT_EPSILON: f64 = 0.05;

impl RunConfig {
    /// A config with the command-line defaults.
    pub fn new(command: Command, space: Option<SpaceSpec>) -> Self {
        RunConfig {
            command,
            space,
            net_step: 0.25,
            max_n: 4,
            horizon: None,
            epsilon: None,
            seed: 0,
            format: Format::Json,
            inputs: Inputs::default(),
        }
    }

    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let c = &cli.common;
        let space = c.space.as_deref().map(load_space).transpose()?;
        let mut inputs = Inputs::default();
        match &cli.command {
            Command::Ramsey { coloring, .. }
            | Command::Hindman { coloring, .. }
            | Command::Milliken { coloring, .. } => {
                if let Some(path) = coloring.strip_prefix("file:") {
                    inputs.coloring_table = Some(std::fs::read_to_string(path)?);
                }
            }
            Command::Goodness { sequence, .. }
            | Command::Spreading { sequence, .. }
            | Command::Equivalence { sequence, .. } => {
                if let Some(path) = sequence.strip_prefix("file:") {
                    inputs.sequence_vectors = Some(serde_json::from_str(&std::fs::read_to_string(path)?)?);
                }
            }
            _ => {}
        }
        Ok(RunConfig {
            command: cli.command.clone(),
            space,
            net_step: c.net_step,
            max_n: c.max_n,
            horizon: c.horizon,
            epsilon: c.epsilon,
            seed: c.seed,
            format: c.format,
            inputs,
        })
    }

    fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(DEFAULT_EPSILON)
    }

    fn horizon(&self) -> Horizon {
        self.horizon.unwrap_or(Horizon { k: 1, h: 3 * self.max_n })
    }

    fn space(&self) -> Result<Space> {
        let spec =
            self.space.clone().ok_or_else(|| Error::input(format!("command {} needs --space", self.command.name())))?;
        Space::new(spec)
    }

    fn net(&self) -> Result<ScalarNet> {
        ScalarNet::grid(self.net_step, self.max_n)
    }
}

fn load_space(arg: &str) -> Result<SpaceSpec> {
    let text =
        if arg.trim_start().starts_with('{') { arg.to_string() } else { std::fs::read_to_string(Path::new(arg))? };
    let spec: SpaceSpec = serde_json::from_str(&text)?;
    spec.validate()?;
    Ok(spec)
}

/// A finished run: both renderings plus the check status.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub json: String,
    pub csv: String,
    pub format: Format,
}

impl Outcome {
    pub fn rendered(&self) -> &str {
        match self.format {
            Format::Json => &self.json,
            Format::Csv => &self.csv,
        }
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        u8::from(!self.passed)
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    passed: bool,
    result: &'a T,
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

fn fmt_tuple<T: fmt::Display>(t: &[T]) -> String {
    t.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

fn finish<T: Serialize>(config: &RunConfig, result: &T, table: Table, passed: bool) -> Result<Outcome> {
    let doc =
        Document { tool: "spreadbench", version: VERSION, command: config.command.name(), config, passed, result };
    let mut json = serde_json::to_string_pretty(&doc)?;
    json.push('\n');

    let mut csv_out =
        format!("# spreadbench {VERSION} {} config={}\n", config.command.name(), serde_json::to_string(config)?);
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    csv_out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))?);
    Ok(Outcome { passed, json, csv: csv_out, format: config.format })
}

/// Runs one command.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    match &config.command {
        Command::Norm { vector } => cmd_norm(config, vector),
        Command::VerifySegmented { p, ps, trials } => cmd_verify_segmented(config, *p, ps, *trials),
        Command::Goodness { sequence, length } => cmd_goodness(config, sequence, *length),
        Command::Spreading { sequence, length, horizons, reference_p } => {
            cmd_spreading(config, sequence, *length, horizons, *reference_p)
        }
        Command::Equivalence { sequence, reference_p, n } => cmd_equivalence(config, sequence, *reference_p, *n),
        Command::Game { subspace, vector, rounds, reference_p } => {
            cmd_game(config, subspace, vector, *rounds, *reference_p)
        }
        Command::Stabilized { p, n, schedule, window } => cmd_stabilized(config, *p, *n, schedule, *window),
        Command::Ramsey { coloring, m, k, l, max_nodes } => cmd_ramsey(config, coloring, *m, *k, *l, *max_nodes),
        Command::Hindman { coloring, m, l, max_nodes } => cmd_hindman(config, coloring, *m, *l, *max_nodes),
        Command::Milliken { coloring, blocking, m, k, l, max_nodes } => {
            cmd_milliken(config, coloring, blocking.as_deref(), *m, *k, *l, *max_nodes)
        }
        Command::StabilizeNccb { m, quantum, length, max_nodes } => {
            cmd_stabilize_nccb(config, *m, *quantum, *length, *max_nodes)
        }
        Command::KrivineP { terms, offset } => cmd_krivine_p(config, *terms, *offset),
    }
}

/// Parses, runs and writes the report; returns the process exit status.
pub fn main_with(cli: Cli) -> u8 {
    let result = RunConfig::from_cli(&cli).and_then(|config| run(&config));
    match result {
        Ok(outcome) => {
            let text = outcome.rendered();
            let written = match &cli.common.output {
                Some(path) => std::fs::write(path, text).map_err(Error::from),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => outcome.exit_code(),
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[derive(Serialize)]
struct NormResult {
    vector: SparseVector,
    norm: f64,
}

fn cmd_norm(config: &RunConfig, vector: &str) -> Result<Outcome> {
    let space = config.space()?;
    let vector: SparseVector = vector.parse()?;
    let norm = space.norm(&vector)?;
    let mut t = Table::new(&["vector", "norm"]);
    t.push([vector.to_string(), norm.to_string()]);
    finish(config, &NormResult { vector, norm }, t, true)
}

#[derive(Serialize)]
struct SandwichFailure {
    trial: usize,
    segment: usize,
    blocks: Vec<SparseVector>,
    coefficients: Vec<f64>,
    lower: f64,
    value: f64,
    upper: f64,
}

#[derive(Serialize)]
struct TypeCheck {
    s: usize,
    n_s: u64,
    constant: f64,
    witness: bool,
}

#[derive(Serialize)]
struct SegmentedResult {
    space: SpaceSpec,
    trials: usize,
    sandwich_failures: Vec<SandwichFailure>,
    type_p: Vec<TypeCheck>,
    warnings: Vec<String>,
}

/// Random normalized blocks starting in segment `s0`, clipped to the
/// dimension; at least one block always fits.
fn random_blocks(space: &Space, rng: &mut ChaCha8Rng, s0: usize, n: usize) -> Result<Vec<SparseVector>> {
    let (_, _, ns) = space.lp_sum_parts().expect("lp_sum space");
    let dim = space.dimension().expect("lp_sum space") as usize;
    let seg_start = space.segment_start(s0).expect("valid segment") as usize;
    let reach = (ns[s0 - 1] as usize).min(50);
    let mut at = seg_start + rng.gen_range(0..reach);
    let mut blocks = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            at += rng.gen_range(0..3);
        }
        if at > dim {
            break;
        }
        let len = rng.gen_range(1..=3).min(dim - at + 1);
        let mut pairs = Vec::with_capacity(len);
        for j in 0..len {
            let mut c: f64 = rng.gen_range(-1.0..=1.0);
            if c.abs() < 1e-3 {
                c = 1.0;
            }
            pairs.push((at + j, c));
        }
        at += len;
        let v = SparseVector::new(pairs)?;
        let norm = space.norm(&v)?;
        blocks.push(v.scale(1.0 / norm));
    }
    Ok(blocks)
}

fn cmd_verify_segmented(config: &RunConfig, p: f64, ps: &[f64], trials: usize) -> Result<Outcome> {
    let spec = make_example_space(p, ps)?;
    let space = Space::new(spec.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    if trials == 0 {
        warnings.push("no sandwich trials were run; the sandwich check passes vacuously".to_string());
    }
    let max_n = config.max_n.max(1);
    for trial in 0..trials {
        let s0 = rng.gen_range(1..=ps.len());
        let n = rng.gen_range(1..=max_n);
        let blocks = random_blocks(&space, &mut rng, s0, n)?;
        let a: Vec<f64> = (0..blocks.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mut sum = SparseVector::zero();
        for (c, y) in a.iter().zip(&blocks) {
            sum.add_scaled(*c, y);
        }
        let value = space.norm(&sum)?.powf(p);
        let lower = a.iter().map(|x| x.abs().powf(p)).sum::<f64>();
        let upper = (blocks.len() as f64).powf(p / ps[s0 - 1] - 1.0) * lower;
        let slack = |x: f64| 1e-9 * x.max(1.0);
        if value < lower - slack(lower) || value > upper + slack(upper) {
            failures.push(SandwichFailure { trial, segment: s0, blocks, coefficients: a, lower, value, upper });
        }
    }
    let SpaceSpec::LpSum { ns, .. } = &spec else { unreachable!("example space is an lp_sum") };
    let type_p = (1..=ps.len())
        .map(|s| Ok(TypeCheck { s, n_s: ns[s - 1], constant: s as f64, witness: type_p_witness(&spec, s, s as f64)? }))
        .collect::<Result<Vec<_>>>()?;
    let passed = failures.is_empty() && type_p.iter().all(|t| t.witness);
    let mut t = Table::new(&["check", "s", "n_s", "passed", "detail"]);
    t.push([
        "sandwich".into(),
        String::new(),
        String::new(),
        failures.is_empty().to_string(),
        format!("{trials} trials, {} failures", failures.len()),
    ]);
    for c in &type_p {
        t.push([
            "type_p".into(),
            c.s.to_string(),
            c.n_s.to_string(),
            c.witness.to_string(),
            format!("C={}", c.constant),
        ]);
    }
    let result = SegmentedResult { space: spec.clone(), trials, sandwich_failures: failures, type_p, warnings };
    finish(config, &result, t, passed)
}

/// Sequence named by `--sequence`.
fn build_sequence(config: &RunConfig, space: &Space, source: &str, len: usize) -> Result<Vec<SparseVector>> {
    let (kind, arg) = match source.split_once(['@', ':']) {
        Some((k, a)) => (k, Some(a)),
        None => (source, None),
    };
    let natural = |a: Option<&str>, default: usize| -> Result<usize> {
        match a {
            None => Ok(default),
            Some(a) => match a.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(Error::Parse(format!("expected a natural after '{kind}', got {a:?}"))),
            },
        }
    };
    match kind {
        "unit" => Ok(BlockSequence::unit_basis(natural(arg, 1)?, len).vectors().to_vec()),
        "staircase" => Ok(BlockSequence::staircase(len)),
        "interleave-demo" => {
            let m = natural(arg, 2)?;
            let y = BlockSequence::new((0..2 * len).map(|i| SparseVector::unit(2 * i + 1)).collect())?;
            let z = BlockSequence::new((0..2 * len).map(|i| SparseVector::unit(2 * i + 2)).collect())?;
            let tree = tree_from_array(&interleave_array(&y, &z, m, len)?, len, 1)?;
            Ok(leftmost_branch(&tree)?.vectors().to_vec())
        }
        "nccb" => {
            let blocking: Blocking = arg.ok_or_else(|| Error::Parse("nccb needs a blocking".into()))?.parse()?;
            Ok(nccb_from_blocking(space, &blocking)?.vectors().to_vec())
        }
        "file" => config
            .inputs
            .sequence_vectors
            .clone()
            .ok_or_else(|| Error::input("sequence file was not loaded")),
        _ => Err(Error::Parse(format!(
            "unknown sequence {source:?}; expected unit[@S], staircase, interleave-demo[@m], nccb:<blocking> or file:<path>"
        ))),
    }
}

fn cmd_goodness(config: &RunConfig, sequence: &str, length: Option<usize>) -> Result<Outcome> {
    let space = config.space()?;
    let net = config.net()?;
    let Horizon { k, h } = config.horizon();
    let seq = build_sequence(config, &space, sequence, length.unwrap_or(k + h + net.max_len()))?;
    let report = goodness_test(&space, &seq, &net, k, h, config.epsilon())?;
    let mut t = Table::new(&["tuple", "horizon", "window", "granularity", "sup", "inf", "oscillation", "estimate"]);
    for r in &report.records {
        t.push([
            fmt_tuple(&r.tuple),
            r.horizon.to_string(),
            r.window.to_string(),
            r.granularity.to_string(),
            r.sup.to_string(),
            r.inf.to_string(),
            r.oscillation.to_string(),
            r.estimate.to_string(),
        ]);
    }
    let passed = report.verdict == Verdict::GoodWithinTolerance;
    finish(config, &report, t, passed)
}

fn cmd_spreading(
    config: &RunConfig,
    sequence: &str,
    length: Option<usize>,
    horizons: &[usize],
    reference_p: Option<f64>,
) -> Result<Outcome> {
    let space = config.space()?;
    let net = config.net()?;
    let h = config.horizon.map_or(3 * config.max_n, |hz| hz.h);
    let last = horizons.last().copied().unwrap_or(1);
    let seq = build_sequence(config, &space, sequence, length.unwrap_or(last + h + net.max_len()))?;
    let est = spreading_model_estimate(&space, &seq, &net, horizons, h, reference_p)?;
    let mut t = Table::new(&[
        "tuple",
        "horizon",
        "window",
        "granularity",
        "sup",
        "inf",
        "oscillation",
        "estimate",
        "reference",
        "error",
    ]);
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    for te in &est.tuples {
        for e in &te.estimates {
            t.push([
                fmt_tuple(&te.tuple),
                e.horizon.to_string(),
                est.window.to_string(),
                est.granularity.to_string(),
                e.sup.to_string(),
                e.inf.to_string(),
                e.oscillation.to_string(),
                e.estimate.to_string(),
                opt(e.reference),
                opt(e.error),
            ]);
        }
    }
    let passed = !est.inconclusive;
    finish(config, &est, t, passed)
}

fn cmd_equivalence(config: &RunConfig, sequence: &str, p: f64, n: Option<usize>) -> Result<Outcome> {
    let space = config.space()?;
    let n = n.unwrap_or(config.max_n);
    let seq = build_sequence(config, &space, sequence, n)?;
    let r = equivalence_constant(&space, &seq, Reference::Lp { p, n }, config.net_step)?;
    let mut t = Table::new(&[
        "n",
        "net_step",
        "lower",
        "upper",
        "constant",
        "lower_certificate",
        "upper_certificate",
        "constant_bound",
    ]);
    t.push([
        r.n.to_string(),
        r.net_step.to_string(),
        r.lower.to_string(),
        r.upper.to_string(),
        r.constant.to_string(),
        fmt_tuple(&r.lower_certificate),
        fmt_tuple(&r.upper_certificate),
        r.constant_bound.to_string(),
    ]);
    let passed = config.epsilon.is_none_or(|e| r.constant <= 1.0 + e);
    finish(config, &r, t, passed)
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',').map(|x| x.trim().parse::<T>().map_err(|_| Error::Parse(format!("bad {what} entry {x:?}")))).collect()
}

fn parse_subspace(s: &str) -> Result<SubspaceStrategy> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "constant" => Ok(SubspaceStrategy::Constant { m: parse_list::<usize>(arg, "cutoff")?[0] }),
        "past-support" => match parse_list::<usize>(arg, "past-support")?[..] {
            [start, lead] => Ok(SubspaceStrategy::PastSupport { start, lead }),
            _ => Err(Error::Parse("past-support needs START,LEAD".into())),
        },
        "fixed" => Ok(SubspaceStrategy::Fixed { cutoffs: parse_list(arg, "cutoff")? }),
        _ => Err(Error::Parse(format!("unknown subspace strategy {s:?}"))),
    }
}

fn parse_vector_strategy(s: &str) -> Result<VectorStrategy> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "unit" => Ok(VectorStrategy::UnitVector),
        "flat" => Ok(VectorStrategy::FlatBlock { width: parse_list::<usize>(arg, "width")?[0] }),
        "combo" => Ok(VectorStrategy::Combination { coefficients: parse_list(arg, "coefficient")? }),
        _ => Err(Error::Parse(format!("unknown vector strategy {s:?}"))),
    }
}

#[derive(Serialize)]
struct GameResult {
    transcript: crate::games::GameTranscript,
    equivalence: Option<crate::analysis::EquivalenceReport>,
}

fn cmd_game(
    config: &RunConfig,
    subspace: &str,
    vector: &str,
    rounds: usize,
    reference_p: Option<f64>,
) -> Result<Outcome> {
    let space = config.space()?;
    let s1 = parse_subspace(subspace)?;
    let s2 = parse_vector_strategy(vector)?;
    let transcript = play(&space, &s1, &s2, rounds)?;
    let equivalence = reference_p
        .map(|p| {
            equivalence_constant(&space, transcript.outcome.vectors(), Reference::Lp { p, n: rounds }, config.net_step)
        })
        .transpose()?;
    let mut t = Table::new(&["round", "cutoff", "vector"]);
    for (i, m) in transcript.moves.iter().enumerate() {
        t.push([(i + 1).to_string(), m.cutoff.to_string(), m.vector.to_string()]);
    }
    let passed = match (&equivalence, config.epsilon) {
        (Some(r), Some(e)) => r.constant <= 1.0 + e,
        _ => true,
    };
    finish(config, &GameResult { transcript, equivalence }, t, passed)
}

fn cmd_stabilized(config: &RunConfig, p: f64, n: usize, schedule: &[usize], window: usize) -> Result<Outcome> {
    let space = config.space()?;
    let params = SampleParams { window, net_step: config.net_step };
    let v = asymptotic_lp_verdict(&space, p, n, schedule, config.epsilon(), params)?;
    let mut t = Table::new(&["cutoff", "n", "window", "net_step", "constant", "certificate", "tuples_sampled"]);
    for r in &v.table {
        t.push([
            r.cutoff.to_string(),
            r.n.to_string(),
            window.to_string(),
            config.net_step.to_string(),
            r.constant.to_string(),
            r.certificate.to_string(),
            r.tuples_sampled.to_string(),
        ]);
    }
    let passed = v.consistent;
    finish(config, &v, t, passed)
}

/// A colouring from `--coloring`, with table misses recorded rather than
/// silently coloured.
struct ColoringSource {
    named: Option<NamedColoring>,
    table: Option<TableColoring>,
    miss: RefCell<Option<Error>>,
}

impl ColoringSource {
    fn new(config: &RunConfig, arg: &str) -> Result<Self> {
        if arg.starts_with("file:") {
            let text = config
                .inputs
                .coloring_table
                .as_deref()
                .ok_or_else(|| Error::input("colouring table was not loaded"))?;
            Ok(ColoringSource { named: None, table: Some(TableColoring::parse(text)?), miss: RefCell::new(None) })
        } else {
            Ok(ColoringSource { named: Some(arg.parse()?), table: None, miss: RefCell::new(None) })
        }
    }

    fn record(&self, r: Result<usize>) -> usize {
        r.unwrap_or_else(|e| {
            self.miss.borrow_mut().get_or_insert(e);
            usize::MAX
        })
    }

    fn set(&self, s: &FiniteSet) -> usize {
        match (&self.named, &self.table) {
            (Some(n), _) => n.color_set(s),
            (_, Some(t)) => self.record(t.color_set(s)),
            _ => unreachable!(),
        }
    }

    fn blocking(&self, b: &[FiniteSet]) -> usize {
        match (&self.named, &self.table) {
            (Some(n), _) => n.color_blocking(b),
            (_, Some(t)) => self.record(t.color_blocking(b)),
            _ => unreachable!(),
        }
    }

    fn check(&self) -> Result<()> {
        match self.miss.borrow_mut().take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

#[derive(Serialize)]
struct SearchResult {
    certificate: SearchCertificate,
    verified_color: Option<usize>,
}

fn search_table(r: &SearchResult) -> Table {
    let mut t = Table::new(&["found", "color", "witness", "verified_color", "nodes_explored", "complete"]);
    let witness = match &r.certificate.witness {
        Some(Witness::Set(s)) => s.to_string(),
        Some(Witness::Blocking(b)) => b.to_string(),
        None => String::new(),
    };
    let opt = |x: Option<usize>| x.map_or(String::new(), |v| v.to_string());
    t.push([
        r.certificate.found.to_string(),
        opt(r.certificate.color),
        witness,
        opt(r.verified_color),
        r.certificate.nodes_explored.to_string(),
        r.certificate.complete.to_string(),
    ]);
    t
}

fn finish_search(config: &RunConfig, certificate: SearchCertificate, verified_color: Option<usize>) -> Result<Outcome> {
    let passed = certificate.found && verified_color.is_some() && verified_color == certificate.color;
    let r = SearchResult { certificate, verified_color };
    let t = search_table(&r);
    finish(config, &r, t, passed)
}

fn cmd_ramsey(
    config: &RunConfig,
    coloring: &str,
    m: usize,
    k: usize,
    l: usize,
    max_nodes: Option<u64>,
) -> Result<Outcome> {
    let c = ColoringSource::new(config, coloring)?;
    let cert = ramsey_search(|s| c.set(s), m, k, l, SearchLimits { max_nodes })?;
    c.check()?;
    let verified = match &cert.witness {
        Some(Witness::Set(w)) => verify_ramsey(|s| c.set(s), w, k),
        _ => None,
    };
    c.check()?;
    finish_search(config, cert, verified)
}

fn cmd_hindman(config: &RunConfig, coloring: &str, m: usize, l: usize, max_nodes: Option<u64>) -> Result<Outcome> {
    let c = ColoringSource::new(config, coloring)?;
    let cert = hindman_search(|s| c.set(s), m, l, SearchLimits { max_nodes })?;
    c.check()?;
    let verified = match &cert.witness {
        Some(Witness::Blocking(w)) => verify_hindman(|s| c.set(s), w),
        _ => None,
    };
    c.check()?;
    finish_search(config, cert, verified)
}

fn cmd_milliken(
    config: &RunConfig,
    coloring: &str,
    blocking: Option<&str>,
    m: usize,
    k: usize,
    l: usize,
    max_nodes: Option<u64>,
) -> Result<Outcome> {
    let c = ColoringSource::new(config, coloring)?;
    let p: Blocking = match blocking {
        Some(b) => b.parse()?,
        None => Blocking::singletons(m),
    };
    let cert = milliken_taylor_search(|b| c.blocking(b), &p, k, l, SearchLimits { max_nodes })?;
    c.check()?;
    let verified = match &cert.witness {
        Some(Witness::Blocking(w)) => verify_milliken_taylor(|b| c.blocking(b), w, k),
        _ => None,
    };
    c.check()?;
    finish_search(config, cert, verified)
}

fn cmd_stabilize_nccb(
    config: &RunConfig,
    m: usize,
    quantum: f64,
    length: Option<usize>,
    max_nodes: Option<u64>,
) -> Result<Outcome> {
    let space = config.space()?;
    let net = config.net()?;
    let r = nccb_stabilize(
        &space,
        m,
        &net,
        config.epsilon(),
        quantum,
        length.unwrap_or(net.max_len()),
        SearchLimits { max_nodes },
    )?;
    let mut t = Table::new(&[
        "tuple",
        "coarsenings",
        "monochromatic",
        "color",
        "sup",
        "inf",
        "oscillation",
        "quantum",
        "granularity",
    ]);
    for c in &r.checks {
        t.push([
            fmt_tuple(&c.tuple),
            c.coarsenings.to_string(),
            c.monochromatic.to_string(),
            c.color.map_or(String::new(), |v| v.to_string()),
            c.sup.to_string(),
            c.inf.to_string(),
            c.oscillation.to_string(),
            quantum.to_string(),
            r.granularity.to_string(),
        ]);
    }
    let passed = r.verified;
    finish(config, &r, t, passed)
}

fn cmd_krivine_p(config: &RunConfig, terms: usize, offset: usize) -> Result<Outcome> {
    let space = config.space()?;
    let k = krivine_p_estimate(&space, terms, offset)?;
    let mut t = Table::new(&["n", "norm", "offset", "fit_p", "slope", "r_squared"]);
    let p = if k.p.is_infinite() { "inf".to_string() } else { k.p.to_string() };
    for (i, v) in k.norms.iter().enumerate() {
        t.push([
            (i + 1).to_string(),
            v.to_string(),
            offset.to_string(),
            p.clone(),
            k.slope.to_string(),
            k.r_squared.to_string(),
        ]);
    }
    finish(config, &k, t, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn config(command: Command, spec: Option<SpaceSpec>) -> RunConfig {
        RunConfig::new(command, spec)
    }

    fn result(o: &Outcome) -> serde_json::Value {
        serde_json::from_str::<serde_json::Value>(&o.json).unwrap()["result"].clone()
    }

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn norm_command() {
        let o = run(&config(Command::Norm { vector: "1:1,2:1".into() }, Some(SpaceSpec::lp(2.0)))).unwrap();
        assert!((result(&o)["norm"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let o = run(&config(Command::Norm { vector: "1:1,3:-1".into() }, Some(SpaceSpec::James))).unwrap();
        assert!((result(&o)["norm"].as_f64().unwrap() - 5f64.sqrt()).abs() < 1e-12);
        assert!(run(&config(Command::Norm { vector: "1:x".into() }, Some(SpaceSpec::lp(2.0)))).is_err());
        assert!(run(&config(Command::Norm { vector: "1:1".into() }, None)).is_err());
    }

    #[test]
    fn segment_indicator_norm() {
        let spec = make_example_space(2.0, &[1.0, 1.5]).unwrap();
        let o = run(&config(Command::Norm { vector: "3:1,4:1,5:1".into() }, Some(spec))).unwrap();
        assert!((result(&o)["norm"].as_f64().unwrap() - 3f64.powf(1.0 / 1.5)).abs() < 1e-12);
    }

    #[test]
    fn verify_segmented_passes_and_zero_trials_warns() {
        let cmd = Command::VerifySegmented { p: 2.0, ps: vec![1.0, 1.5], trials: 200 };
        let o = run(&config(cmd, None)).unwrap();
        assert!(o.passed);
        let cmd = Command::VerifySegmented { p: 2.0, ps: vec![1.0, 1.5], trials: 0 };
        let o = run(&config(cmd, None)).unwrap();
        assert!(o.passed);
        assert_eq!(result(&o)["warnings"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn goodness_interleave_demo_oscillates() {
        let spec = SpaceSpec::interleave(SpaceSpec::lp(1.0), SpaceSpec::lp(2.0), crate::spaces::Outer::Max);
        let mut c = config(Command::Goodness { sequence: "interleave-demo".into(), length: None }, Some(spec));
        c.max_n = 2;
        c.net_step = 1.0;
        let o = run(&c).unwrap();
        assert!(!o.passed);
        assert_eq!(result(&o)["verdict"], "oscillating");
    }

    #[test]
    fn stabilized_lp_is_consistent() {
        let cmd = Command::Stabilized { p: 2.0, n: 3, schedule: vec![1, 10, 100], window: 6 };
        let mut c = config(cmd, Some(SpaceSpec::lp(2.0)));
        c.net_step = 0.5;
        let o = run(&c).unwrap();
        assert!(o.passed);
        for row in result(&o)["table"].as_array().unwrap() {
            assert!((row["constant"].as_f64().unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn hindman_min_parity() {
        let cmd = Command::Hindman { coloring: "min-parity".into(), m: 10, l: 3, max_nodes: None };
        let o = run(&config(cmd, None)).unwrap();
        assert!(o.passed);
        assert!(o.csv.lines().nth(1).unwrap().starts_with("found,"));
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!(parse_subspace("past-support:3,2").unwrap(), SubspaceStrategy::PastSupport { start: 3, lead: 2 });
        assert_eq!(
            parse_vector_strategy("combo:1,-0.5").unwrap(),
            VectorStrategy::Combination { coefficients: vec![1.0, -0.5] }
        );
        assert!(parse_subspace("sideways").is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let cmd = Command::VerifySegmented { p: 2.0, ps: vec![1.0, 1.5, 1.8], trials: 50 };
        let mut c = config(cmd, None);
        c.seed = 7;
        assert_eq!(run(&c).unwrap(), run(&c).unwrap());
    }
}
