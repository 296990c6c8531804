use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use ncl_core::experiment::{
    clip_command, graph_command, sdp_experiment, sweep, write_sdp_outputs, write_sweep_csv, SweepAxis,
};
use ncl_core::metrics::AucRow;
use ncl_core::trajectory::fixtures::write_fixture_set;
use ncl_core::{Error, NclConfig, Scheme, SdpParams, Strategy};

/// Collectiveness of crowd motion by node clique learning.
#[derive(Parser)]
#[command(name = "ncl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate self-driven particles and score measured against true order.
    Sdp {
        #[command(flatten)]
        sdp: SdpArgs,
        #[command(flatten)]
        ncl: NclArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Metrics of all four NCL variants along one parameter axis.
    Sweep {
        /// lambda, K or noise_ratio
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        grid: Vec<f64>,
        #[command(flatten)]
        sdp: SdpArgs,
        #[arg(long, default_value_t = 0.7)]
        lambda: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Collectiveness, coherence and clusters of an edge-list graph.
    Graph {
        /// Edge list with header `src,dst,weight`.
        input: PathBuf,
        #[command(flatten)]
        ncl: NclArgs,
        /// Threshold for collective-motion clusters.
        #[arg(long = "c-thre")]
        c_thre: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Per-clip collectiveness of trajectory files, with AUCs when metadata
    /// is given.
    Clip {
        /// Trajectory CSV files or directories of them.
        #[arg(required = true)]
        trajectories: Vec<PathBuf>,
        /// `clip,score,voting` metadata.
        #[arg(long)]
        meta: Option<PathBuf>,
        #[arg(long = "K", default_value_t = 20)]
        k: usize,
        #[command(flatten)]
        ncl: NclArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Write a synthetic set of coherent, mixed and random clips.
    Fixtures {
        #[arg(long, default_value_t = 20)]
        per_kind: usize,
        #[arg(long, default_value_t = 60)]
        points: usize,
        #[arg(long, default_value_t = 6)]
        frames: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "fixtures")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SdpArgs {
    /// Number of particles.
    #[arg(long = "N", default_value_t = 400)]
    n: usize,
    /// Neighbours per node in the motion graph.
    #[arg(long = "K", default_value_t = 20)]
    k: usize,
    /// Side of the periodic square.
    #[arg(long = "L", default_value_t = 7.0)]
    box_side: f64,
    #[arg(long, default_value_t = 0.03)]
    speed: f64,
    /// Alignment radius.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Heading noise amplitude in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    /// Fraction of particles that move randomly.
    #[arg(long = "noise-ratio", default_value_t = 0.0)]
    noise_ratio: f64,
    #[arg(long = "max-frames", default_value_t = 100)]
    max_frames: usize,
    /// Stop once the true order parameter exceeds this.
    #[arg(long = "gt-stop", default_value_t = 0.95, allow_hyphen_values = true)]
    gt_stop: f64,
}

impl SdpArgs {
    fn params(&self) -> SdpParams {
        SdpParams {
            n_particles: self.n,
            k_neighbors: self.k,
            box_side: self.box_side,
            speed: self.speed,
            radius: self.radius,
            eta: self.eta,
            noise_ratio: self.noise_ratio,
            max_frames: self.max_frames,
            gt_stop: self.gt_stop,
        }
    }
}

#[derive(Args)]
struct NclArgs {
    #[arg(long, default_value_t = 0.7)]
    lambda: f64,
    /// avg or min
    #[arg(long, default_value = "avg")]
    strategy: Strategy,
    /// ncl1 or ncl2
    #[arg(long, default_value = "ncl1")]
    scheme: Scheme,
}

impl NclArgs {
    fn config(&self) -> Result<NclConfig, Error> {
        NclConfig::new(self.lambda, self.strategy, self.scheme)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

/// Shortest plain decimal within 1e-10 of `x`.
fn short(x: f64) -> String {
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0');
    s.strip_suffix('.').unwrap_or(s).to_string()
}

fn fmt_cell(c: Option<f64>) -> String {
    c.map_or_else(|| "undefined".to_string(), short)
}

fn print_auc_row(name: &str, row: &AucRow) {
    println!(
        "{name}: high/low {} high/medium {} medium/low {}",
        fmt_cell(row.high_low),
        fmt_cell(row.high_medium),
        fmt_cell(row.medium_low)
    );
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Sdp { sdp, ncl, run } => {
            let params = sdp.params();
            let cfg = ncl.config()?;
            let outcome = sdp_experiment(&params, &cfg, run.runs, run.seed)?;
            write_sdp_outputs(&outcome, &run.out)?;
            let m = &outcome.metrics;
            println!(
                "{}: RC {} PCA {} SD {} over {} runs ({} skipped)",
                cfg.variant(),
                short(m.rc),
                short(m.pca),
                short(m.sd),
                m.n_runs,
                m.n_skipped
            );
        }
        Command::Sweep { axis, grid, sdp, lambda, run } => {
            let params = sdp.params();
            let rows = sweep(axis, &grid, &params, lambda, run.runs, run.seed)?;
            std::fs::create_dir_all(&run.out).map_err(|e| Error::Io { path: run.out.clone(), source: e })?;
            write_sweep_csv(axis, &rows, &run.out.join("sweep.csv"))?;
            println!("{} rows written to {}", rows.len(), run.out.join("sweep.csv").display());
        }
        Command::Graph { input, ncl, c_thre, out } => {
            let outcome = graph_command(&input, &ncl.config()?, c_thre, &out)?;
            println!("Phi = {}", short(outcome.capital_phi));
            if let Some(stats) = outcome.clusters {
                println!("{} clusters, {} with more than one node", stats.n_clusters, stats.n_nontrivial);
            }
        }
        Command::Clip { trajectories, meta, k, ncl, out } => {
            let outcome = clip_command(&trajectories, meta.as_deref(), &ncl.config()?, k, &out)?;
            for (id, c, _) in &outcome.clips {
                println!("{id}: {}", short(*c));
            }
            for id in &outcome.unmatched {
                eprintln!("warning: clip {id} has no metadata row");
            }
            if let Some(auc) = outcome.auc {
                print_auc_row("scores", &auc.scores);
                print_auc_row("voting", &auc.voting);
                let cells = [auc.scores, auc.voting]
                    .iter()
                    .flat_map(|r| [r.high_low, r.high_medium, r.medium_low])
                    .filter(Option::is_none)
                    .count();
                if cells > 0 {
                    eprintln!("warning: {cells} AUC cells undefined (a category pair lacks clips)");
                }
            }
        }
        Command::Fixtures { per_kind, points, frames, seed, out } => {
            if per_kind == 0 || points < 2 || frames == 0 {
                return Err(Error::Parameter("need per-kind >= 1, points >= 2, frames >= 1".into()));
            }
            let meta = write_fixture_set(&out, per_kind, points, frames, seed)?;
            println!("{} clips written under {}", meta.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
