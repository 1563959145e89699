//! `pdflow`: scalar fields to persistence diagrams to diagram-space
//! geometry, as deterministic scriptable subcommands.
//!
//! Exit codes: 0 on success, 2 on usage errors, 1 on computation errors
//! (one-line diagnostic on stderr).

// `!(x > 0.0)` deliberately rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use output::{fmt_sig, stage_writes, write_text, Content};
use pdflow_core::{
    cloud, cubical, field::FieldSeries, synth, DiagramSet, DistanceMatrix, GridField, GridSpec,
    Matching, Metric,
};

#[derive(Parser)]
#[command(
    name = "pdflow",
    version,
    about = "Persistence diagrams for 2-D scalar field time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute persistence diagrams of a field file or a series directory
    FieldPd {
        /// A `.field` file or a directory of `frame_*.field` frames
        input: PathBuf,
        /// Output directory for `.pdiag` files
        #[arg(long)]
        out: PathBuf,
    },
    /// Rescale a field (or every frame of a series) onto integer levels
    Quantize {
        /// A `.field` file or a series directory
        input: PathBuf,
        /// Number of quantization levels
        #[arg(long, default_value_t = 256)]
        levels: u32,
        /// Output file (for a field) or directory (for a series)
        #[arg(long)]
        out: PathBuf,
    },
    /// Distance between two diagram files
    Dist {
        diag_a: PathBuf,
        diag_b: PathBuf,
        #[arg(long)]
        metric: Metric,
        /// Optionally write the optimal pairing as `k iA iB` lines
        #[arg(long)]
        matching: Option<PathBuf>,
    },
    /// Pairwise distance matrix of a directory of diagrams
    Distmat {
        /// Directory of `.pdiag` files (sorted by name)
        input: PathBuf,
        #[arg(long)]
        metric: Metric,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; the output is independent of this
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Consecutive diagram distances divided by the sampling interval
    Speed {
        /// Directory of `.pdiag` files (sorted by name)
        input: PathBuf,
        #[arg(long)]
        metric: Metric,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Vietoris-Rips persistence of a distance matrix
    Rips {
        /// Distance matrix CSV
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Guard on the number of points
        #[arg(long, default_value_t = cloud::RIPS_MAX_POINTS)]
        max_points: usize,
    },
    /// Connected-component clustering at a scale threshold
    Cluster {
        /// Distance matrix CSV
        input: PathBuf,
        /// Cluster scale: points within distance 2*theta join a cluster
        #[arg(long)]
        theta: f64,
        /// Output CSV of cluster labels, one per point
        #[arg(long)]
        out: PathBuf,
    },
    /// Greedy delta-dense, delta-sparse subsample
    Subsample {
        /// Distance matrix CSV
        input: PathBuf,
        #[arg(long)]
        delta: f64,
        /// Output CSV of kept indices
        #[arg(long)]
        out: PathBuf,
    },
    /// Two-scale change-count estimate from distance readings
    Scales {
        #[arg(long)]
        dbig: f64,
        #[arg(long)]
        dsmall: f64,
        #[arg(long)]
        w1: f64,
        #[arg(long)]
        w2: f64,
    },
    /// Generate synthetic fields, series, or point clouds
    Synth(SynthArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// One of: constant, band, multiwell, linked-bands, periodic, fast-slow,
    /// circle, blobs
    kind: String,
    #[arg(long)]
    seed: u64,
    /// Output path: `.field` file, series directory, or matrix CSV
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Value of the constant field
    #[arg(long, default_value_t = 0.0)]
    value: f64,
    /// Comma-separated well depths for `multiwell`
    #[arg(long, default_value = "-2,-1", allow_hyphen_values = true)]
    depths: String,
    /// Comma-separated saddle levels for `multiwell`
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    saddles: String,
    /// Link count for `linked-bands`
    #[arg(long, default_value_t = 1)]
    n_links: usize,
    /// Frames per period for the orbit series
    #[arg(long, default_value_t = 100)]
    period: usize,
    /// Total frames for the orbit series
    #[arg(long, default_value_t = 300)]
    frames: usize,
    /// Bounded uniform noise amplitude
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Point count for `circle`
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Blob count for `blobs`
    #[arg(long, default_value_t = 3)]
    k_blobs: usize,
    /// Blob center separation (blobs have unit diameter)
    #[arg(long, default_value_t = 10.0)]
    sep: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("pdflow: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::FieldPd { input, out } => field_pd(&input, &out),
        Command::Quantize { input, levels, out } => quantize(&input, levels, &out),
        Command::Dist {
            diag_a,
            diag_b,
            metric,
            matching,
        } => dist(&diag_a, &diag_b, metric, matching.as_deref()),
        Command::Distmat {
            input,
            metric,
            out,
            threads,
        } => distmat(&input, metric, &out, threads),
        Command::Speed {
            input,
            metric,
            dt,
            out,
        } => speed(&input, metric, dt, &out),
        Command::Rips {
            input,
            out,
            max_points,
        } => rips(&input, &out, max_points),
        Command::Cluster { input, theta, out } => cluster_cmd(&input, theta, &out),
        Command::Subsample { input, delta, out } => subsample_cmd(&input, delta, &out),
        Command::Scales {
            dbig,
            dsmall,
            w1,
            w2,
        } => scales(dbig, dsmall, w1, w2),
        Command::Synth(args) => synth_cmd(args),
    }
}

/// Loads either one field or a whole series, normalized to (stem, field).
fn load_frames(input: &Path) -> Result<Vec<(String, GridField)>> {
    if input.is_dir() {
        let series = FieldSeries::load_dir(input)
            .with_context(|| format!("loading series from {}", input.display()))?;
        Ok(series
            .frames()
            .iter()
            .enumerate()
            .map(|(k, f)| (format!("frame_{k:06}"), f.clone()))
            .collect())
    } else {
        let field = GridField::load(input)
            .with_context(|| format!("loading field {}", input.display()))?;
        let stem = input
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("field")
            .to_string();
        Ok(vec![(stem, field)])
    }
}

fn field_pd(input: &Path, out: &Path) -> Result<()> {
    let frames = load_frames(input)?;
    let mut files = Vec::new();
    for (stem, field) in &frames {
        let ds = cubical::field_persistence(field);
        files.push((
            out.join(format!("{stem}.pdiag")),
            Content::Text(ds.to_text()),
        ));
    }
    stage_writes(files)
}

fn quantize(input: &Path, levels: u32, out: &Path) -> Result<()> {
    if input.is_dir() {
        let series = FieldSeries::load_dir(input)
            .with_context(|| format!("loading series from {}", input.display()))?;
        let frames = series
            .frames()
            .iter()
            .map(|f| f.quantize(levels))
            .collect::<Result<Vec<_>, _>>()
            .context("quantizing series")?;
        FieldSeries::new(frames, series.dt())?
            .save_dir(out)
            .with_context(|| format!("writing series to {}", out.display()))?;
    } else {
        let field = GridField::load(input)
            .with_context(|| format!("loading field {}", input.display()))?;
        let q = field.quantize(levels).context("quantizing field")?;
        q.save(out)
            .with_context(|| format!("writing field to {}", out.display()))?;
    }
    Ok(())
}

fn matching_text(matchings: &[Matching]) -> String {
    let mut s = String::new();
    for m in matchings {
        for &(ia, ib) in &m.pairs {
            let _ = writeln!(s, "{} {} {}", m.dim, ia, ib);
        }
        for &ia in &m.diagonal_a {
            let _ = writeln!(s, "{} {} diag", m.dim, ia);
        }
        for &ib in &m.diagonal_b {
            let _ = writeln!(s, "{} diag {}", m.dim, ib);
        }
    }
    s
}

fn dist(diag_a: &Path, diag_b: &Path, metric: Metric, matching: Option<&Path>) -> Result<()> {
    let a = DiagramSet::load(diag_a).with_context(|| format!("loading {}", diag_a.display()))?;
    let b = DiagramSet::load(diag_b).with_context(|| format!("loading {}", diag_b.display()))?;
    let (d, matchings) = match metric {
        Metric::Bottleneck => pdflow_core::bottleneck_matching(&a, &b)?,
        Metric::W1 => pdflow_core::wasserstein_matching(&a, &b, 1)?,
        Metric::W2 => pdflow_core::wasserstein_matching(&a, &b, 2)?,
    };
    if let Some(path) = matching {
        write_text(path, matching_text(&matchings))?;
    }
    println!("{}", fmt_sig(d, 12));
    Ok(())
}

fn load_diagram_dir(input: &Path) -> Result<Vec<DiagramSet>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(input)
        .with_context(|| format!("reading diagram directory {}", input.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "pdiag"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no .pdiag files in {}", input.display());
    }
    paths
        .iter()
        .map(|p| {
            DiagramSet::load(p)
                .map(|d| {
                    let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("");
                    d.with_provenance(stem)
                })
                .map_err(anyhow::Error::from)
        })
        .collect()
}

fn distmat(input: &Path, metric: Metric, out: &Path, threads: Option<usize>) -> Result<()> {
    let series = load_diagram_dir(input)?;
    let dm = match threads {
        Some(t) => cloud::distance_matrix_with_threads(&series, metric, t)?,
        None => cloud::distance_matrix(&series, metric)?,
    };
    dm.save_csv(out)
        .with_context(|| format!("writing matrix to {}", out.display()))?;
    Ok(())
}

fn speed(input: &Path, metric: Metric, dt: f64, out: &Path) -> Result<()> {
    if !(dt > 0.0) {
        bail!("dt must be positive, got {dt}");
    }
    let series = load_diagram_dir(input)?;
    let speeds = cloud::speed_profile(&series, metric, dt)?;
    let mut s = String::new();
    for v in speeds {
        let _ = writeln!(s, "{v}");
    }
    write_text(out, s)
}

fn rips(input: &Path, out: &Path, max_points: usize) -> Result<()> {
    let dm = DistanceMatrix::load_csv(input)
        .with_context(|| format!("loading matrix {}", input.display()))?;
    let filtration = cloud::RipsFiltration::build(&dm, max_points)?;
    write_text(out, filtration.persistence().to_text())
}

fn cluster_cmd(input: &Path, theta: f64, out: &Path) -> Result<()> {
    if !(theta > 0.0) {
        bail!("theta must be positive, got {theta}");
    }
    let dm = DistanceMatrix::load_csv(input)
        .with_context(|| format!("loading matrix {}", input.display()))?;
    let clustering = cloud::cluster(&dm, theta);
    let mut s = String::new();
    for label in &clustering.labels {
        let _ = writeln!(s, "{label}");
    }
    write_text(out, s)?;
    let n_clusters = clustering.labels.iter().max().map_or(0, |m| m + 1);
    println!("clusters {n_clusters}");
    let seps: Vec<String> = clustering
        .separations
        .iter()
        .map(|&v| fmt_sig(v, 12))
        .collect();
    println!("separations {}", seps.join(" "));
    Ok(())
}

fn subsample_cmd(input: &Path, delta: f64, out: &Path) -> Result<()> {
    let dm = DistanceMatrix::load_csv(input)
        .with_context(|| format!("loading matrix {}", input.display()))?;
    let result = cloud::subsample(&dm, delta)?;
    let mut s = String::new();
    for idx in &result.kept {
        let _ = writeln!(s, "{idx}");
    }
    write_text(out, s)?;
    println!("kept {} of {}", result.kept.len(), dm.len());
    Ok(())
}

fn scales(dbig: f64, dsmall: f64, w1: f64, w2: f64) -> Result<()> {
    let est = cloud::estimate_change_counts(dbig, dsmall, w1, w2)?;
    println!(
        "{} {} {}",
        est.n_big,
        est.k_small,
        if est.valid { "valid" } else { "invalid" }
    );
    Ok(())
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number `{tok}`"))
        })
        .collect()
}

fn synth_cmd(args: SynthArgs) -> Result<()> {
    use synth::GeneratorKind as K;
    let grid_or = |default: GridSpec| GridSpec {
        nx: args.nx.unwrap_or(default.nx),
        ny: args.ny.unwrap_or(default.ny),
        boundary: default.boundary,
    };
    let (kind, grid) = match args.kind.as_str() {
        "constant" => (
            K::ConstantField { value: args.value },
            grid_or(GridSpec::torus(16, 16)),
        ),
        "band" => (K::BandField, grid_or(GridSpec::torus(32, 32))),
        "multiwell" => (
            K::MultiWell {
                depths: parse_list(&args.depths)?,
                saddles: parse_list(&args.saddles)?,
            },
            grid_or(GridSpec::bounded(16, 8)),
        ),
        "linked-bands" => (
            K::LinkedBands {
                n_links: args.n_links,
            },
            grid_or(GridSpec::torus(16.max(4 * args.n_links), 16)),
        ),
        "periodic" => (
            K::PeriodicOrbitSeries {
                period: args.period,
                n_frames: args.frames,
                noise_amp: args.noise,
            },
            grid_or(GridSpec::torus(16, 16)),
        ),
        "fast-slow" => (
            K::FastSlowSeries {
                period: args.period,
                n_frames: args.frames,
                noise_amp: args.noise,
            },
            grid_or(GridSpec::torus(16, 16)),
        ),
        "circle" => (
            K::CirclePointCloud {
                n: args.n,
                radius: args.radius,
                noise: args.noise,
            },
            grid_or(GridSpec::bounded(1, 1)),
        ),
        "blobs" => (
            K::BlobCloud {
                k_blobs: args.k_blobs,
                sep: args.sep,
            },
            grid_or(GridSpec::bounded(1, 1)),
        ),
        other => bail!(
            "unknown synth kind `{other}` (expected constant, band, multiwell, \
             linked-bands, periodic, fast-slow, circle, or blobs)"
        ),
    };
    let spec = synth::GeneratorSpec {
        kind,
        seed: args.seed,
        grid,
    };
    match &spec.kind {
        K::ConstantField { .. } | K::BandField | K::MultiWell { .. } | K::LinkedBands { .. } => {
            let (field, _) = synth::gen_field(&spec)?;
            field
                .save(&args.out)
                .with_context(|| format!("writing field to {}", args.out.display()))?;
        }
        K::PeriodicOrbitSeries { .. } | K::FastSlowSeries { .. } => {
            let (series, _) = synth::gen_series(&spec)?;
            series
                .save_dir(&args.out)
                .with_context(|| format!("writing series to {}", args.out.display()))?;
        }
        K::CirclePointCloud { .. } | K::BlobCloud { .. } => {
            let (dm, _) = synth::gen_cloud(&spec)?;
            dm.save_csv(&args.out)
                .with_context(|| format!("writing matrix to {}", args.out.display()))?;
        }
    }
    Ok(())
}
