//! `timeatlas` command line: one subcommand per pipeline stage.
//!
//! Data goes to files or standard output, logs to standard error. Exit
//! status is 0 on success, 1 on invalid input and 2 on bad usage.

pub mod demo;
pub mod error;
mod reconstruct;
mod store;
mod tiles;
mod warp;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "timeatlas", version, about = "Spatiotemporal map engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit, apply and evaluate control-point transforms.
    #[command(subcommand)]
    Warp(WarpCommand),
    /// Build and inspect vector tiles.
    #[command(subcommand)]
    Tile(TileCommand),
    /// Ingest and query the temporal feature store.
    #[command(subcommand)]
    Store(StoreCommand),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Build a GLB building from a footprint and facade annotations.
    Reconstruct(ReconstructArgs),
    /// Write the synthetic two-block demo dataset.
    Demo(DemoArgs),
}

#[derive(Debug, Subcommand)]
pub enum WarpCommand {
    /// Least-squares fit of pixel -> Web Mercator from a px,py,lon,lat CSV.
    Fit {
        #[arg(long)]
        pairs: PathBuf,
        /// affine, poly1, poly2 or poly3.
        #[arg(long, default_value = "affine")]
        kind: String,
        /// Output JSON; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Resample a scanned map into a north-up Mercator raster.
    Apply(WarpApplyArgs),
    /// Per-pair residuals (Mercator meters) and RMS of a transform.
    Report {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        transform: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct WarpApplyArgs {
    /// Source PNG.
    #[arg(long)]
    pub image: PathBuf,
    /// Affine pixel -> Mercator transform from `warp fit` (inverted exactly).
    #[arg(long, conflicts_with = "pairs", required_unless_present = "pairs")]
    pub transform: Option<PathBuf>,
    /// Control points; the Mercator -> pixel map is fitted directly.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Transform kind used with --pairs.
    #[arg(long, default_value = "affine")]
    pub kind: String,
    /// Output extent `min_lon,min_lat,max_lon,max_lat`; defaults to the
    /// footprint of the source image.
    #[arg(long, allow_hyphen_values = true)]
    pub bounds: Option<String>,
    /// Output width in pixels; defaults to the source width.
    #[arg(long)]
    pub width: Option<u32>,
    /// Output height in pixels; defaults to keeping square pixels.
    #[arg(long)]
    pub height: Option<u32>,
    /// nearest or bilinear.
    #[arg(long, default_value = "bilinear")]
    pub resampling: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum TileCommand {
    /// Write `{z}/{x}/{y}.mvt` for every tile touching a feature's bounds.
    Build {
        /// GeoJSON Feature, FeatureCollection or array.
        #[arg(long)]
        features: PathBuf,
        /// Zoom or inclusive range, e.g. `14` or `14..16`.
        #[arg(long)]
        zoom: String,
        #[arg(long)]
        out: PathBuf,
        /// Only features standing at this date (per-epoch tiles).
        #[arg(long)]
        time: Option<String>,
    },
    /// Print a decoded tile as JSON.
    Inspect { tile: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum StoreCommand {
    /// Append features to the store log; prints the assigned ids.
    Ingest {
        #[arg(long)]
        data_dir: PathBuf,
        /// GeoJSON files, ingested in order, one batch each.
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print matching features as a FeatureCollection.
    Query {
        #[arg(long)]
        data_dir: PathBuf,
        /// `min_lon,min_lat,max_lon,max_lat`; whole world when omitted.
        #[arg(long, allow_hyphen_values = true)]
        bbox: Option<String>,
        #[arg(long)]
        time: Option<String>,
    },
    /// Print buildings whose footprints overlap while both stand.
    Overlaps {
        #[arg(long)]
        data_dir: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// TOML or JSON service configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub host: Option<String>,
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// GeoJSON polygon Feature; `height_m` or `floors` set the height.
    #[arg(long)]
    pub footprint: PathBuf,
    /// Facade annotation files; each is placed on its `link.edge_index`.
    #[arg(long)]
    pub annotations: Vec<PathBuf>,
    /// TOML reconstruction parameters; defaults when omitted.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Overrides the footprint's height, meters.
    #[arg(long)]
    pub height: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Directory to write the dataset into.
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
/// Standard output of the command goes to `out`; diagnostics to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> CliResult {
    match command {
        Command::Warp(c) => warp::run(c, out),
        Command::Tile(c) => tiles::run(c, out),
        Command::Store(c) => store::run(c, out),
        Command::Serve(a) => serve(a),
        Command::Reconstruct(a) => reconstruct::run(&a, out),
        Command::Demo(a) => {
            let written = demo::write_demo(&a.out)?;
            for p in written {
                writeln!(out, "{}", p.display())?;
            }
            Ok(())
        }
    }
}

fn serve(a: ServeArgs) -> CliResult {
    let overrides = timeatlas_server::ConfigOverrides {
        host: a.host,
        port: a.port,
        data_dir: a.data_dir,
    };
    let config = timeatlas_server::ServiceConfig::load(a.config.as_deref(), |k| std::env::var(k).ok(), &overrides)
        .map_err(CliError::invalid)?;
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime
        .block_on(timeatlas_server::serve(config))
        .map_err(CliError::invalid)
}

/// `min_lon,min_lat,max_lon,max_lat`.
pub(crate) fn parse_bbox(raw: &str) -> CliResult<timeatlas_core::GeoBounds> {
    let v: Vec<f64> = raw
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("bbox {raw:?} must be four comma-separated numbers")))?;
    if v.len() != 4 {
        return Err(CliError::Usage(format!("bbox {raw:?} must be four comma-separated numbers")));
    }
    let b = timeatlas_core::GeoBounds::new(v[0], v[1], v[2], v[3]);
    if !b.is_valid() {
        return Err(CliError::Usage(format!("bbox {raw:?} is not a valid lon/lat box")));
    }
    Ok(b)
}

pub(crate) fn parse_date(raw: &str) -> CliResult<timeatlas_core::Date> {
    raw.parse()
        .map_err(|e| CliError::Usage(format!("date {raw:?}: {e}")))
}
