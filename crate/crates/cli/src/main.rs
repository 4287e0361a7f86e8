use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use diffset_frames::diffset::{catalog_lookup, search_parameters, verify_difference_set, Catalog, DifferenceSet};
use diffset_frames::experiments::{
    emit_curves, format_curves, measurement_monotonicity_warnings, run_classic_experiment, run_fusion_experiment,
    sparsity_monotonicity_warnings, ClassicExperimentConfig, FusionExperimentConfig, GeneratorChoice, RecoveryCurve,
    DEFAULT_THRESHOLD,
};
use diffset_frames::fusion::{distance_matrix, fusion_report, GaborFusionFrame};
use diffset_frames::gabor::{ambiguity_coherence, family_table, mutual_coherence, Family, GaborFrame, Generator};
use diffset_frames::io::{format_vector, read_matrix, read_vector};
use diffset_frames::solvers::{basis_pursuit, block_basis_pursuit, BlockStructure, SolveResult, SolverConfig};
use diffset_frames::{Error, VERSION};
use serde::Serialize;
use serde_json::{json, Value};

const EXIT_INVALID: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;

#[derive(Parser)]
#[command(name = "dsframes", version, about = "Difference-set Gabor frames, fusion frames and sparse recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cyclic difference sets.
    #[command(subcommand)]
    Diffset(DiffsetCmd),
    /// Gabor frames generated by a window.
    #[command(subcommand)]
    Gabor(GaborCmd),
    /// Fusion frames from difference sets.
    #[command(subcommand)]
    Fusion(FusionCmd),
    /// Equality-constrained l1 and mixed-norm solvers.
    #[command(subcommand)]
    Solve(SolveCmd),
    /// Monte-Carlo recovery experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Subcommand)]
enum DiffsetCmd {
    /// Check whether a subset of Z_N is a difference set.
    Verify {
        n: usize,
        /// Comma-separated residues, e.g. 1,2,4.
        elements: String,
    },
    /// Exhaustive backtracking search for an (N,K,lambda) set.
    Search {
        n: usize,
        k: usize,
        lambda: usize,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
    /// List catalog entries, optionally filtered.
    Catalog {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        /// Catalog file to use instead of the built-in one.
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct WindowChoice {
    /// Catalog difference set N,K.
    #[arg(long)]
    set: Option<String>,
    /// Alltop window for prime N.
    #[arg(long)]
    alltop: Option<usize>,
    /// Random unimodular window of length N.
    #[arg(long)]
    random: Option<usize>,
}

#[derive(Subcommand)]
enum GaborCmd {
    /// Mutual coherence report.
    Coherence {
        #[command(flatten)]
        window: WindowChoice,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scan every column pair instead of the ambiguity-function shortcut.
        #[arg(long)]
        brute: bool,
    },
    /// Coherence across difference-set families.
    Table {
        /// Primes q = 3 mod 4.
        #[arg(long, value_delimiter = ',')]
        quadratic: Vec<usize>,
        /// Primes p for quartic residue sets.
        #[arg(long, value_delimiter = ',')]
        quartic: Vec<usize>,
        /// Prime powers q[:d] for Singer sets (d defaults to 2).
        #[arg(long, value_delimiter = ',')]
        singer: Vec<String>,
    },
}

#[derive(Subcommand)]
enum FusionCmd {
    /// Tightness, distances, packing and sparsity report.
    Report {
        #[arg(long)]
        set: String,
    },
    /// Pairwise squared chordal distances as CSV.
    Distances {
        #[arg(long)]
        set: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    adaptive_rho: bool,
    #[arg(long)]
    allow_rank_deficient: bool,
    /// Certified support refit period; 0 disables.
    #[arg(long, default_value_t = 10)]
    polish_every: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            rho: self.rho,
            max_iters: self.max_iters,
            tol_primal: self.tol,
            tol_dual: self.tol,
            adaptive_rho: self.adaptive_rho,
            allow_rank_deficient: self.allow_rank_deficient,
            polish_every: self.polish_every,
        }
    }
}

#[derive(Subcommand)]
enum SolveCmd {
    /// min ||x||_1 s.t. Ax = y.
    Bp {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// min sum_b ||x_b||_2 s.t. Ax = y over consecutive blocks.
    BlockBp {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        block_size: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Sparse recovery from Gabor measurements for several windows.
    Classic {
        #[arg(long, default_value_t = 43)]
        n: usize,
        /// Catalog difference set N,K for the difference-set window.
        #[arg(long)]
        set: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "alltop,random_torus,difference_set")]
        generators: Vec<String>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        kmin: usize,
        /// Largest sparsity; defaults to N.
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Fusion-sparse recovery for several measurement counts.
    Fusion {
        #[arg(long, default_value = "40,13")]
        set: String,
        #[arg(long, value_delimiter = ',', default_value = "5,10,15,20")]
        measurements: Vec<usize>,
        /// Sparsity levels; defaults to 1..=N.
        #[arg(long, value_delimiter = ',')]
        sparsities: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Complex Gaussian mixing coefficients instead of real.
        #[arg(long)]
        complex_coefficients: bool,
        /// Real Gaussian signal coefficients instead of complex.
        #[arg(long)]
        real_signal: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

enum Failure {
    Invalid(String),
    NotConverged(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CmdResult = std::result::Result<Output, Failure>;

enum Output {
    Json(Value),
    Text(String),
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

fn envelope(command: &str, config: Value, result: impl Serialize) -> Output {
    Output::Json(json!({
        "version": VERSION,
        "command": command,
        "config": config,
        "result": serde_json::to_value(result).expect("reports serialize"),
    }))
}

fn parse_list(s: &str) -> std::result::Result<Vec<usize>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| invalid(format!("not a non-negative integer: {t:?}"))))
        .collect()
}

fn parse_set(s: &str) -> std::result::Result<DifferenceSet, Failure> {
    match parse_list(s)?.as_slice() {
        &[n, k] => catalog_lookup(n, k).ok_or_else(|| invalid(format!("no catalog difference set with N={n}, K={k}"))),
        _ => Err(invalid(format!("expected N,K, got {s:?}"))),
    }
}

fn diffset(cmd: DiffsetCmd) -> CmdResult {
    match cmd {
        DiffsetCmd::Verify { n, elements } => {
            let elems = parse_list(&elements)?;
            let report = verify_difference_set(n, &elems)?;
            let mut result = serde_json::to_value(&report).expect("report serializes");
            result["lambda"] = json!(report.inferred_lambda);
            Ok(envelope("diffset verify", json!({ "n": n, "elements": elems }), result))
        }
        DiffsetCmd::Search { n, k, lambda, budget } => {
            let outcome = search_parameters(n, k, lambda, budget);
            Ok(envelope("diffset search", json!({ "n": n, "k": k, "lambda": lambda, "budget": budget }), outcome))
        }
        DiffsetCmd::Catalog { n, k, file } => {
            let loaded;
            let catalog = match &file {
                Some(path) => {
                    loaded = Catalog::load(path)?;
                    &loaded
                }
                None => Catalog::builtin(),
            };
            let entries: Vec<Value> = catalog
                .entries()
                .iter()
                .filter(|d| n.is_none_or(|n| d.n() == n) && k.is_none_or(|k| d.k() == k))
                .map(|d| json!({ "n": d.n(), "k": d.k(), "lambda": d.lambda(), "elements": d.elements() }))
                .collect();
            Ok(envelope("diffset catalog", json!({ "n": n, "k": k, "file": file }), entries))
        }
    }
}

fn gabor(cmd: GaborCmd) -> CmdResult {
    match cmd {
        GaborCmd::Coherence { window, seed, brute } => {
            let (generator, config) = match (&window.set, window.alltop, window.random) {
                (Some(set), _, _) => {
                    let ds = parse_set(set)?;
                    (Generator::difference_set(&ds), json!({ "window": "difference_set", "set": ds.to_string() }))
                }
                (_, Some(n), _) => (Generator::alltop(n)?, json!({ "window": "alltop", "n": n })),
                (_, _, Some(n)) => {
                    if n == 0 {
                        return Err(invalid("window length must be positive"));
                    }
                    (Generator::random_torus(n, seed), json!({ "window": "random_torus", "n": n, "seed": seed }))
                }
                _ => unreachable!("clap enforces one window"),
            };
            let frame = GaborFrame::new(generator)?;
            let report = if brute { mutual_coherence(&frame) } else { ambiguity_coherence(&frame) };
            let mut result = serde_json::to_value(&report).expect("report serializes");
            result["mu"] = json!(report.mutual_coherence);
            result["welch"] = json!(report.welch_bound);
            if let Some(p) = report.predicted {
                result["matches_prediction"] = json!((p - report.mutual_coherence).abs() < 1e-10);
            }
            let mut config = config;
            config["method"] = json!(if brute { "brute_force" } else { "ambiguity" });
            Ok(envelope("gabor coherence", config, result))
        }
        GaborCmd::Table { quadratic, quartic, singer } => {
            let mut families: Vec<Family> = quadratic.iter().map(|&q| Family::Quadratic { q }).collect();
            families.extend(quartic.iter().map(|&p| Family::Quartic { p }));
            for s in &singer {
                let (q, d) = match s.split_once(':') {
                    Some((q, d)) => (q, d),
                    None => (s.as_str(), "2"),
                };
                let q = q.trim().parse().map_err(|_| invalid(format!("bad Singer q in {s:?}")))?;
                let d = d.trim().parse().map_err(|_| invalid(format!("bad Singer d in {s:?}")))?;
                families.push(Family::Singer { q, d });
            }
            if families.is_empty() {
                return Err(invalid("no families requested"));
            }
            let rows = family_table(&families)?;
            Ok(envelope("gabor table", json!({ "families": families }), rows))
        }
    }
}

fn fusion(cmd: FusionCmd) -> CmdResult {
    match cmd {
        FusionCmd::Report { set } => {
            let ds = parse_set(&set)?;
            let report = fusion_report(&ds, 1e-12)?;
            Ok(envelope("fusion report", json!({ "set": ds.to_string() }), report))
        }
        FusionCmd::Distances { set, out } => {
            let ds = parse_set(&set)?;
            let d = distance_matrix(&GaborFusionFrame::new(&ds))?;
            let mut csv = String::from("i,j,distance_squared\n");
            for (i, row) in d.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    csv.push_str(&format!("{i},{j},{v}\n"));
                }
            }
            match out {
                Some(path) => {
                    std::fs::write(&path, csv).map_err(Error::from)?;
                    Ok(envelope("fusion distances", json!({ "set": ds.to_string(), "out": path }), json!({ "pairs": d.len() * d.len() })))
                }
                None => Ok(Output::Text(csv)),
            }
        }
    }
}

fn solve_output(command: &str, config: Value, res: SolveResult, out: Option<PathBuf>) -> CmdResult {
    if let Some(path) = &out {
        std::fs::write(path, format_vector(&res.solution)).map_err(Error::from)?;
    }
    let out_json = envelope(command, config, &res);
    let Output::Json(v) = out_json else { unreachable!() };
    if res.converged() {
        Ok(Output::Json(v))
    } else {
        Err(Failure::NotConverged(v))
    }
}

fn solve(cmd: SolveCmd) -> CmdResult {
    match cmd {
        SolveCmd::Bp { matrix, y, out, solver } => {
            let a = read_matrix(&matrix)?;
            let yv = read_vector(&y)?;
            let cfg = solver.config();
            let res = basis_pursuit(&a, &yv, &cfg)?;
            let config = json!({ "matrix": matrix, "y": y, "out": out, "solver": cfg });
            solve_output("solve bp", config, res, out)
        }
        SolveCmd::BlockBp { matrix, y, block_size, out, solver } => {
            let a = read_matrix(&matrix)?;
            let yv = read_vector(&y)?;
            let blocks = BlockStructure::uniform(a.ncols(), block_size)?;
            let cfg = solver.config();
            let res = block_basis_pursuit(&a, &yv, &blocks, &cfg)?;
            let config = json!({ "matrix": matrix, "y": y, "block_size": block_size, "out": out, "solver": cfg });
            solve_output("solve block-bp", config, res, out)
        }
    }
}

fn curves_output(command: &str, config: Value, curves: Vec<RecoveryCurve>, warnings: Vec<String>, out: Option<PathBuf>) -> CmdResult {
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    match out {
        Some(path) => {
            emit_curves(&curves, &path)?;
            Ok(envelope(command, config, json!({ "out": path, "curves": curves, "warnings": warnings })))
        }
        None => Ok(Output::Text(format_curves(&curves))),
    }
}

fn experiment(cmd: ExperimentCmd) -> CmdResult {
    match cmd {
        ExperimentCmd::Classic { n, set, generators, trials, kmin, kmax, seed, threshold, out, solver } => {
            let generators = generators.iter().map(|g| g.parse::<GeneratorChoice>()).collect::<Result<Vec<_>, _>>()?;
            let set_k = match &set {
                Some(s) => {
                    let ds = parse_set(s)?;
                    if ds.n() != n {
                        return Err(invalid(format!("set {ds} does not live in Z_{n}")));
                    }
                    ds.k()
                }
                None if generators.contains(&GeneratorChoice::DifferenceSet) => {
                    Catalog::builtin()
                        .entries()
                        .iter()
                        .find(|d| d.n() == n)
                        .map(|d| d.k())
                        .ok_or_else(|| invalid(format!("no catalog difference set with N={n}")))?
                }
                None => 0,
            };
            let kmax = kmax.unwrap_or(n);
            if kmin == 0 || kmin > kmax {
                return Err(invalid(format!("empty sparsity range {kmin}..={kmax}")));
            }
            let cfg = ClassicExperimentConfig {
                n,
                set_k,
                generators,
                sparsities: (kmin..=kmax).collect(),
                trials,
                seed,
                threshold,
                solver: solver.config(),
            };
            let curves = run_classic_experiment(&cfg)?;
            let slack = 2.0 / (trials as f64).sqrt();
            let warnings = curves.iter().flat_map(|c| sparsity_monotonicity_warnings(c, slack)).collect();
            curves_output("experiment classic", serde_json::to_value(&cfg).unwrap(), curves, warnings, out)
        }
        ExperimentCmd::Fusion {
            set,
            measurements,
            sparsities,
            trials,
            seed,
            threshold,
            complex_coefficients,
            real_signal,
            out,
            solver,
        } => {
            let ds = parse_set(&set)?;
            let sparsities = if sparsities.is_empty() { (1..=ds.n()).collect() } else { sparsities };
            let cfg = FusionExperimentConfig {
                n: ds.n(),
                k: ds.k(),
                measurements,
                sparsities,
                trials,
                seed,
                threshold,
                complex_coefficients,
                real_signal,
                solver: SolverConfig { allow_rank_deficient: true, ..solver.config() },
            };
            let curves = run_fusion_experiment(&cfg)?;
            let slack = 2.0 / (trials as f64).sqrt();
            let keyed: Vec<(usize, &RecoveryCurve)> = cfg.measurements.iter().copied().zip(&curves).collect();
            let warnings = measurement_monotonicity_warnings(&keyed, slack)
                .into_iter()
                .chain(curves.iter().flat_map(|c| sparsity_monotonicity_warnings(c, slack)))
                .collect();
            curves_output("experiment fusion", serde_json::to_value(&cfg).unwrap(), curves, warnings, out)
        }
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> ExitCode {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
        _ => ExitCode::SUCCESS,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Diffset(c) => diffset(c),
        Command::Gabor(c) => gabor(c),
        Command::Fusion(c) => fusion(c),
        Command::Solve(c) => solve(c),
        Command::Experiment(c) => experiment(c),
    };
    match result {
        Ok(Output::Json(v)) => emit(&format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))),
        Ok(Output::Text(t)) => emit(&t),
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::NotConverged(partial)) => {
            eprintln!("error: solver did not converge; partial result follows");
            eprintln!("{}", serde_json::to_string_pretty(&partial).expect("json"));
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
    }
}
