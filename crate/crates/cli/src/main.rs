use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use ordered_bundles::input::GraphInput;
use ordered_bundles::ordering::{count_crossings, order_linear, order_simple, OrderInstance};
use ordered_bundles::pipeline::{run, OrderingAlgorithm, PipelineConfig};
use ordered_bundles::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Ordering {
    Simple,
    Linear,
    Both,
}

impl From<Ordering> for OrderingAlgorithm {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Simple => OrderingAlgorithm::Simple,
            Ordering::Linear => OrderingAlgorithm::Linear,
            Ordering::Both => OrderingAlgorithm::Both,
        }
    }
}

/// Route the edges of a positioned graph as ordered, separated bundles.
#[derive(Debug, Parser)]
#[command(name = "obundle", version)]
struct Args {
    /// Graph file, or an ordering instance with --ordering-only.
    input: PathBuf,

    /// Treat INPUT as an ordering instance and only order its paths.
    #[arg(long)]
    ordering_only: bool,

    /// Start from a resolved configuration, as embedded in a stats file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    #[arg(long)]
    k_ink: Option<f64>,
    #[arg(long)]
    k_len: Option<f64>,
    /// Defaults to 10·(k_ink + k_len).
    #[arg(long)]
    k_cap: Option<f64>,
    /// Default path width; edges may override it.
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    separation: Option<f64>,
    /// Visibility cone aperture in radians.
    #[arg(long)]
    cone_angle: Option<f64>,
    /// Route edges of nodes with at least N edges jointly.
    #[arg(long, value_name = "N", num_args = 0..=1, default_missing_value = "3")]
    multi_dp: Option<usize>,
    #[arg(long, value_enum)]
    ordering: Option<Ordering>,

    /// Print the capacity table after routing to stderr.
    #[arg(long)]
    dump_capacity: bool,
    /// Print every accepted optimizer move to stderr.
    #[arg(long)]
    trace_nudge: bool,
    /// Draw hub circles and shrunk obstacles.
    #[arg(long)]
    debug_layers: bool,

    #[arg(long, value_name = "OUT")]
    svg: Option<PathBuf>,
    #[arg(long, value_name = "OUT")]
    routes: Option<PathBuf>,
    /// Stats file; printed to stdout when absent.
    #[arg(long, value_name = "OUT")]
    stats: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Leave out timings and the drawing's time stamp.
    #[arg(long)]
    no_timestamp: bool,
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(Error::Io)
}

fn resolve_config(args: &Args) -> Result<PipelineConfig, Error> {
    let mut config = match &args.config {
        Some(path) => {
            let value: serde_json::Value = serde_json::from_str(&read(path)?)?;
            // A stats file carries its configuration under "config".
            let inner = value.get("config").cloned().unwrap_or(value);
            serde_json::from_value(inner)?
        }
        None => PipelineConfig::default(),
    };
    let weights_changed = args.k_ink.is_some() || args.k_len.is_some();
    if let Some(k) = args.k_ink {
        config.cost.k_ink = k;
    }
    if let Some(k) = args.k_len {
        config.cost.k_len = k;
    }
    match args.k_cap {
        Some(k) => config.cost.k_cap = k,
        None if weights_changed => config.cost.k_cap = 10.0 * (config.cost.k_ink + config.cost.k_len),
        None => {}
    }
    if let Some(w) = args.width {
        config.cost.width = w;
    }
    if let Some(s) = args.separation {
        config.cost.separation = s;
    }
    if let Some(a) = args.cone_angle {
        config.cone_angle = a;
    }
    if args.multi_dp.is_some() {
        config.multi_dp = args.multi_dp;
    }
    if let Some(o) = args.ordering {
        config.ordering = o.into();
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if args.trace_nudge {
        config.optimizer.trace = true;
    }
    if args.debug_layers {
        config.svg_hubs = true;
        config.svg_obstacles = true;
    }
    if args.no_timestamp {
        config.timestamp = false;
    }
    Ok(config)
}

fn ordering_only(args: &Args) -> Result<(), Error> {
    let inst = OrderInstance::from_json(&read(&args.input)?)?;
    let algo: OrderingAlgorithm = args.ordering.map_or(OrderingAlgorithm::Simple, Into::into);
    let (ordering, crossings) = match algo {
        OrderingAlgorithm::Simple => {
            let o = order_simple(&inst);
            let c = count_crossings(&inst, &o);
            (o, c)
        }
        OrderingAlgorithm::Linear => {
            let o = order_linear(&inst);
            let c = count_crossings(&inst, &o);
            (o, c)
        }
        OrderingAlgorithm::Both => {
            let a = order_simple(&inst);
            let b = order_linear(&inst);
            let (ca, cb) = (count_crossings(&inst, &a), count_crossings(&inst, &b));
            if ca != cb {
                return Err(Error::Invariant(format!("simple gives {ca} crossings, linear gives {cb}")));
            }
            (a, ca)
        }
    };
    let orders: serde_json::Value = serde_json::from_str(&ordering.to_json())?;
    let out = serde_json::json!({ "crossings": crossings, "ordering": orders });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn pipeline(args: &Args) -> Result<(), Error> {
    let config = resolve_config(args)?;
    let input = GraphInput::from_json(&read(&args.input)?)?;
    let out = run(&config, &input)?;
    if args.dump_capacity {
        eprint!("{}", out.capacity_table);
    }
    if args.trace_nudge {
        for t in &out.nudge.trace {
            eprintln!("{}", serde_json::to_string(t)?);
        }
    }
    if let Some(p) = &args.svg {
        write(p, &out.svg)?;
    }
    if let Some(p) = &args.routes {
        write(p, &out.routes_json())?;
    }
    match &args.stats {
        Some(p) => write(p, &out.stats_json())?,
        None => println!("{}", out.stats_json()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = if args.ordering_only { ordering_only(&args) } else { pipeline(&args) };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
