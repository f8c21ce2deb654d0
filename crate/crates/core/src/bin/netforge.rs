//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on invalid input or a failed computation
//! (with an error JSON object on stderr), 2 when an optimization diverged.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use netforge::energy::kinetic_energy;
use netforge::io::{
    generate_leaf, load_conductivities, load_network, network_to_json, render_svg, save_conductivities,
    table1_network, write_trace, FlowFile, SvgOptions,
};
use netforge::optimizer::{optimize, sweep_mu, OptimConfig, OptimRun, SummaryRow};
use netforge::trees::{rank_trees, DEFAULT_TREE_LIMIT};
use netforge::{solve_kirchhoff, Conductivities, ModelParams, NetError, Network, Termination};

const SEED_ENV: &str = "NETFORGE_SEED";

#[derive(Parser)]
#[command(name = "netforge", version, about = "Optimal transportation networks with a Fiedler robustness term")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Kirchhoff system and print pressures and fluxes as JSON.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        /// Conductivities JSON; all ones when omitted.
        #[arg(long)]
        conductivities: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize the modified energy by projected subgradient steps.
    Optimize {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        mu: f64,
        #[command(flatten)]
        run: RunArgs,
        /// Directory for best_c.json, trace.csv and summary.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// One optimization per value of mu, run in parallel.
    Sweep {
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated values, e.g. "0,0.2,0.4".
        #[arg(long = "mu-list")]
        mu_list: String,
        #[command(flatten)]
        run: RunArgs,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank all spanning trees by the energy of their tree configuration.
    Trees {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        /// Refuse graphs with more spanning trees than this.
        #[arg(long, default_value_t = DEFAULT_TREE_LIMIT)]
        limit: u64,
        /// Print only the best `top` trees.
        #[arg(long)]
        top: Option<usize>,
    },
    /// Draw a network as SVG, stroke width proportional to the square root
    /// of the conductivity.
    Render {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        conductivities: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a leaf-shaped triangulation with one source at the base.
    GenLeaf {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the built-in 7-vertex network.
    Table1 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 0.1)]
    tau0: f64,
    #[arg(long, default_value_t = 100_000)]
    iters: u64,
    /// Overridden by the NETFORGE_SEED environment variable.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "trace-stride", default_value_t = 1000)]
    trace_stride: u64,
}

impl RunArgs {
    fn config(&self) -> Result<OptimConfig, Failure> {
        let seed = seed_override(self.seed)?;
        let config = OptimConfig {
            tau0: self.tau0,
            iters: self.iters,
            seed,
            trace_stride: self.trace_stride,
            ..OptimConfig::default()
        };
        config.validate()?;
        Ok(config)
    }

    fn params(&self, mu: f64) -> Result<ModelParams, Failure> {
        Ok(ModelParams::new(self.gamma, self.nu, mu)?)
    }
}

#[derive(Debug, Serialize)]
struct Failure {
    error: String,
    message: String,
}

impl Failure {
    fn new(kind: &str, message: impl Into<String>) -> Failure {
        Failure {
            error: kind.to_string(),
            message: message.into(),
        }
    }

    fn io(path: &Path, err: std::io::Error) -> Failure {
        Failure::new("Io", format!("{}: {err}", path.display()))
    }
}

impl From<NetError> for Failure {
    fn from(e: NetError) -> Failure {
        Failure::new(e.kind(), e.to_string())
    }
}

enum Outcome {
    Done,
    Diverged(String),
}

#[derive(Serialize)]
struct RunSummary {
    seed: u64,
    tau0: f64,
    iters: u64,
    best_k: u64,
    restarts: u32,
    termination: Termination,
    #[serde(flatten)]
    row: SummaryRow,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => return fail(&Failure::new("Usage", e.to_string().trim_end())),
    };
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Diverged(message)) => {
            print_error(&Failure::new("Diverged", message));
            ExitCode::from(2)
        }
        Err(f) => fail(&f),
    }
}

fn print_error(f: &Failure) {
    eprintln!("{}", serde_json::to_string(f).expect("error serializes"));
}

fn fail(f: &Failure) -> ExitCode {
    print_error(f);
    ExitCode::from(1)
}

fn run(command: Command) -> Result<Outcome, Failure> {
    match command {
        Command::Solve {
            graph,
            conductivities,
            out,
        } => {
            let net = read_network(&graph)?;
            let c = match conductivities {
                Some(path) => load_conductivities(&path, &net)?,
                None => Conductivities::constant(net.edge_count(), 1.0)?,
            };
            let flow = solve_kirchhoff(&net, &c)?;
            let kinetic = flow.solvable.then(|| kinetic_energy(&net, &c, &flow).to_f64());
            let file = FlowFile::new(&net, &flow, kinetic);
            emit(out.as_deref(), &to_json(&file))?;
        }
        Command::Optimize { graph, mu, run, out } => {
            let net = read_network(&graph)?;
            let params = run.params(mu)?;
            let config = run.config()?;
            let result = optimize(&net, &params, &config)?;
            let row = SummaryRow::from_run(&net, &params, &config, &result)?;
            create_dir(&out)?;
            write_run(&out, &net, &config, &result, row)?;
            if let Termination::Diverged { at } = result.termination {
                return Ok(Outcome::Diverged(format!("mu = {mu}: iterates diverged at k = {at}")));
            }
        }
        Command::Sweep {
            graph,
            mu_list,
            run,
            jobs,
            out,
        } => {
            let net = read_network(&graph)?;
            let mus = parse_list(&mu_list)?;
            let base = run.params(0.0)?;
            let config = run.config()?;
            let entries = sweep_mu(&net, &base, &mus, &config, jobs)?;
            create_dir(&out)?;
            let mut rows = Vec::new();
            let mut diverged = Vec::new();
            for (i, entry) in entries.into_iter().enumerate() {
                let (result, row) = entry.outcome?;
                let dir = out.join(format!("mu_{i:02}"));
                create_dir(&dir)?;
                let cfg = OptimConfig {
                    seed: entry.seed,
                    ..config
                };
                if result.termination.diverged() {
                    diverged.push(entry.mu);
                }
                write_run(&dir, &net, &cfg, &result, row.clone())?;
                rows.push(row);
            }
            write_file(&out.join("summary.csv"), &summary_csv(&rows))?;
            if !diverged.is_empty() {
                return Ok(Outcome::Diverged(format!("iterates diverged for mu in {diverged:?}")));
            }
        }
        Command::Trees {
            graph,
            gamma,
            nu,
            limit,
            top,
        } => {
            let net = read_network(&graph)?;
            let params = ModelParams::new(gamma, nu, 0.0)?;
            let ranked = rank_trees(&net, &params, limit)?;
            let mut s = String::from("rank,energy,edges\n");
            for (rank, (tree, e)) in ranked.iter().take(top.unwrap_or(usize::MAX)).enumerate() {
                let edges: Vec<String> = tree
                    .edges
                    .iter()
                    .map(|&id| {
                        let edge = net.edge(id);
                        format!("{}-{}", edge.u, edge.v)
                    })
                    .collect();
                s.push_str(&format!("{},{e:.16e},{}\n", rank + 1, edges.join(" ")));
            }
            emit(None, &s)?;
        }
        Command::Render {
            graph,
            conductivities,
            out,
        } => {
            let net = read_network(&graph)?;
            let c = load_conductivities(&conductivities, &net)?;
            write_file(&out, &render_svg(&net, &c, &SvgOptions::default()))?;
        }
        Command::GenLeaf { nodes, seed, out } => {
            let leaf = generate_leaf(nodes, seed_override(seed)?)?;
            emit(out.as_deref(), &network_to_json(&leaf.network))?;
        }
        Command::Table1 { out } => emit(out.as_deref(), &network_to_json(&table1_network()))?,
    }
    Ok(Outcome::Done)
}

/// `NETFORGE_SEED` takes precedence over `--seed`.
fn seed_override(seed: u64) -> Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::new("InvalidParameter", format!("{SEED_ENV}={s} is not an unsigned integer"))),
        Err(_) => Ok(seed),
    }
}

fn read_network(path: &Path) -> Result<Network, Failure> {
    if !path.exists() {
        return Err(Failure::new("Io", format!("{}: no such file", path.display())));
    }
    Ok(load_network(path)?)
}

fn parse_list(text: &str) -> Result<Vec<f64>, Failure> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(Failure::new("InvalidParameter", format!("cannot parse mu list {text:?}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::new("Io", e.to_string()))
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path).map_err(|e| Failure::io(path, e))
}

fn write_run(dir: &Path, net: &Network, config: &OptimConfig, run: &OptimRun, row: SummaryRow) -> Result<(), Failure> {
    save_conductivities(&dir.join("best_c.json"), net, &run.best_c)?;
    let trace_path = dir.join("trace.csv");
    let file = fs::File::create(&trace_path).map_err(|e| Failure::io(&trace_path, e))?;
    let mut w = BufWriter::new(file);
    write_trace(&mut w, &run.trace, run.best_k)
        .and_then(|_| w.flush())
        .map_err(|e| Failure::io(&trace_path, e))?;
    let summary = RunSummary {
        seed: config.seed,
        tau0: config.tau0,
        iters: config.iters,
        best_k: run.best_k,
        restarts: run.restarts,
        termination: run.termination,
        row,
    };
    write_file(&dir.join("summary.json"), &to_json(&summary))
}

fn summary_csv(rows: &[SummaryRow]) -> String {
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
    let mut s = String::from("mu,E,F,E_kin,E_met,lambda1,lambda2,lambda3,multiplicity,active_edges\n");
    for r in rows {
        s.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{}\n",
            r.mu,
            r.e,
            r.f,
            r.e_kin,
            r.e_met,
            r.lambda1,
            opt(r.lambda2),
            opt(r.lambda3),
            r.multiplicity,
            r.active_edges
        ));
    }
    s
}
