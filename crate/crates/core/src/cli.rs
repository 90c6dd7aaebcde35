//! Command-line front end. Every command reads its inputs from files, writes
//! its artifacts to files, and reports failures as `ERROR <code>: <message>`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::filters::{apply_filter, FilterSpec, Method};
use crate::formats::{
    format_float, parse_edge_list, parse_signal, write_coordinate, write_dense_csv, write_node_map,
    write_signal,
};
use crate::gcn::{self, Checkpoint, SbmParams};
use crate::graph::Graph;
use crate::lanczos::theorem_bound_check;
use crate::laplacian::{laplacian, LaplacianKind};
use crate::spectral::eigendecompose;

#[derive(Debug, Parser)]
#[command(
    name = "specgraph",
    version,
    about = "Spectral graph filtering and GCN tools"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a graph Laplacian.
    Laplacian(LaplacianArgs),
    /// Write the Laplacian eigenvalues and a component summary.
    Spectrum(SpectrumArgs),
    /// Apply a filter spec to a vertex signal.
    Filter(FilterArgs),
    /// Lanczos error versus the polynomial bound over a range of step counts.
    Lanczos(LanczosArgs),
    /// Generate a stochastic block model dataset.
    GenSbm(GenSbmArgs),
    /// Train a two-layer GCN.
    Train(TrainArgs),
    /// Report accuracy of a trained GCN on one split.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixFormat {
    Dense,
    Coo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FilterMethod {
    Direct,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Args)]
pub struct LaplacianArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value = "combinatorial")]
    pub kind: LaplacianKind,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "dense")]
    pub format: MatrixFormat,
    /// Where to write `id,label` pairs when the edge list uses named nodes.
    #[arg(long)]
    pub node_map: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value = "combinatorial")]
    pub kind: LaplacianKind,
    #[arg(long)]
    pub out: PathBuf,
    /// Optional dense CSV of eigenvectors, one per column.
    #[arg(long)]
    pub basis_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub signal: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "direct")]
    pub method: FilterMethod,
    #[arg(long, default_value = "combinatorial")]
    pub kind: LaplacianKind,
}

#[derive(Debug, Args)]
pub struct LanczosArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// `exp-neg`, `heat:<t>` or `poly:<c0>,<c1>,...`.
    #[arg(long = "g")]
    pub response: String,
    #[arg(long)]
    pub signal: PathBuf,
    /// Inclusive step range such as `1..12`.
    #[arg(long)]
    pub m_sweep: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "combinatorial")]
    pub kind: LaplacianKind,
}

#[derive(Debug, Args)]
pub struct GenSbmArgs {
    #[arg(long, default_value_t = 3)]
    pub blocks: usize,
    #[arg(long, default_value_t = 20)]
    pub nodes_per_block: usize,
    #[arg(long, default_value_t = 0.5)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.05)]
    pub p_out: f64,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub hidden: usize,
    #[arg(long, default_value_t = 0.2)]
    pub lr: f64,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub history: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, value_enum, default_value = "test")]
    pub split: Split,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Process exit status for a library error.
pub fn exit_code(e: &Error) -> i32 {
    use Error::*;
    match e {
        NonSymmetricKind(_)
        | InvalidFilter(_)
        | TooManyCoefficients { .. }
        | NonpositiveLambdaMax(_)
        | WeightedGraphUnsupported
        | BadDimensions(_)
        | DegenerateParameters(_)
        | Io(_) => 2,
        EmptyGraph
        | IdOutOfRange { .. }
        | SelfLoopRejected(_)
        | DuplicateEdge(..)
        | NonpositiveWeight { .. }
        | DimensionMismatch { .. }
        | ShapeMismatch(_)
        | DomainMismatch { .. }
        | ZeroVector
        | EmptyTrainSet
        | EmptyMask
        | InvalidDataset(_)
        | Parse { .. } => 3,
        ConvergenceFailure { .. } | SolveFailure(_) | StaleCache | ConnectivityFailure(_) => 4,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status. Command output goes to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(
                stderr,
                "ERROR Config: {}",
                first.trim_start_matches("error: ")
            );
            return 2;
        }
    };
    match execute(&config.command) {
        Ok(text) => {
            let _ = stdout.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "ERROR {}: {e}", e.code());
            exit_code(&e)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::Io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Graph> {
    parse_edge_list(&read(path)?)?.to_graph()
}

/// Runs one command and returns the text destined for standard output.
pub fn execute(command: &Command) -> Result<String> {
    match command {
        Command::Laplacian(a) => cmd_laplacian(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Filter(a) => cmd_filter(a),
        Command::Lanczos(a) => cmd_lanczos(a),
        Command::GenSbm(a) => cmd_gen_sbm(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
    }
}

fn cmd_laplacian(a: &LaplacianArgs) -> Result<String> {
    let edges = parse_edge_list(&read(&a.graph)?)?;
    let g = edges.to_graph()?;
    let l = laplacian(&g, a.kind);
    let text = match a.format {
        MatrixFormat::Dense => write_dense_csv(&l.to_dense()),
        MatrixFormat::Coo => write_coordinate(l.matrix()),
    };
    write(&a.out, &text)?;
    if let Some(map) = &a.node_map {
        let labels = edges
            .labels
            .clone()
            .unwrap_or_else(|| (0..g.node_count()).map(|i| i.to_string()).collect());
        write(map, &write_node_map(&labels))?;
    }
    Ok(String::new())
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<String> {
    let g = load_graph(&a.graph)?;
    let basis = eigendecompose(&laplacian(&g, a.kind))?;
    let zero = basis.zero_multiplicity();
    let components = g.connected_components().component_count;
    let mut text = write_signal(basis.eigenvalues());
    let summary = format!("# zero_multiplicity={zero},component_count={components}\n");
    text.push_str(&summary);
    write(&a.out, &text)?;
    if let Some(path) = &a.basis_out {
        write(path, &write_dense_csv(basis.eigenvectors()))?;
    }
    Ok(summary.trim_start_matches("# ").to_string())
}

fn cmd_filter(a: &FilterArgs) -> Result<String> {
    let g = load_graph(&a.graph)?;
    let spec = FilterSpec::from_json(&read(&a.spec)?)?;
    let f = parse_signal(&read(&a.signal)?)?;
    let method = match a.method {
        FilterMethod::Direct => Method::Direct,
        FilterMethod::Exact => Method::Exact,
    };
    let y = apply_filter(&spec, &g, a.kind, &f, method)?;
    write(&a.out, &write_signal(&y))?;
    Ok(String::new())
}

/// Scalar response selected by `--g`.
#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    ExpNeg,
    Heat(f64),
    Poly(Vec<f64>),
}

impl Response {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || {
            Error::BadDimensions(format!(
                "unknown response '{s}', expected exp-neg, heat:<t> or poly:<c0>,..."
            ))
        };
        if s == "exp-neg" {
            return Ok(Response::ExpNeg);
        }
        let (head, rest) = s.split_once(':').ok_or_else(bad)?;
        let number = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::BadDimensions(format!("bad number '{t}' in '{s}'")))
        };
        match head {
            "heat" => Ok(Response::Heat(number(rest)?)),
            "poly" => Ok(Response::Poly(
                rest.split(',').map(number).collect::<Result<_>>()?,
            )),
            _ => Err(bad()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Response::ExpNeg => (-x).exp(),
            Response::Heat(t) => (-t * x).exp(),
            Response::Poly(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck),
        }
    }
}

/// Parses an inclusive `a..b` range.
pub fn parse_sweep(s: &str) -> Result<RangeInclusive<usize>> {
    let bad = || Error::BadDimensions(format!("bad sweep '{s}', expected <from>..<to>"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn cmd_lanczos(a: &LanczosArgs) -> Result<String> {
    let g = load_graph(&a.graph)?;
    let response = Response::parse(&a.response)?;
    let sweep = parse_sweep(&a.m_sweep)?;
    if *sweep.end() > g.node_count() {
        return Err(Error::BadDimensions(format!(
            "sweep ends at {} but the graph has {} nodes",
            sweep.end(),
            g.node_count()
        )));
    }
    let f = parse_signal(&read(&a.signal)?)?;
    let l = laplacian(&g, a.kind);
    let mut text = String::from("M,error,bound,satisfied\n");
    for m in sweep {
        let check = theorem_bound_check(&l, |x| response.eval(x), &f, m)?;
        text.push_str(&format!(
            "{m},{},{},{}\n",
            format_float(check.error),
            format_float(check.bound),
            check.satisfied
        ));
    }
    write(&a.out, &text)?;
    Ok(String::new())
}

fn cmd_gen_sbm(a: &GenSbmArgs) -> Result<String> {
    let params = SbmParams {
        blocks: a.blocks,
        nodes_per_block: a.nodes_per_block,
        p_in: a.p_in,
        p_out: a.p_out,
        feature_noise: a.noise,
        seed: a.seed,
    };
    let (g, ds) = gcn::generate_sbm(&params)?;
    gcn::save_dataset(&a.out_dir, &g, &ds)?;
    Ok(format!(
        "nodes={},edges={}\n",
        g.node_count(),
        g.edge_count()
    ))
}

fn cmd_train(a: &TrainArgs) -> Result<String> {
    let (g, ds) = gcn::load_dataset(&a.data)?;
    let model = gcn::init_model(
        ds.features.ncols(),
        a.hidden,
        ds.num_classes,
        gcn::propagation_matrix(&g),
        a.seed,
    )?;
    let (trained, history) = gcn::train(&model, &ds, a.epochs, a.lr)?;
    write(&a.checkpoint, &Checkpoint::from_model(&trained).to_json())?;
    write(&a.history, &gcn::history_csv(&history))?;
    let (z, _) = trained.forward(&ds.features)?;
    Ok(format!(
        "final_loss={}\n",
        format_float(gcn::loss(&z, &ds)?)
    ))
}

fn cmd_eval(a: &EvalArgs) -> Result<String> {
    let (g, ds) = gcn::load_dataset(&a.data)?;
    let model =
        Checkpoint::from_json(&read(&a.checkpoint)?)?.into_model(gcn::propagation_matrix(&g))?;
    let (split, mask) = match a.split {
        Split::Train => ("train", &ds.train_mask),
        Split::Val => ("val", &ds.val_mask),
        Split::Test => ("test", &ds.test_mask),
    };
    let acc = gcn::evaluate(&model, &ds, mask)?;
    let line = format!("{split}_accuracy={}\n", format_float(acc));
    if let Some(out) = &a.out {
        write(
            out,
            &format!("split,accuracy\n{split},{}\n", format_float(acc)),
        )?;
    }
    Ok(line)
}
