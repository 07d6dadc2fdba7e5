//! `dsclust`: generate synthetic blobs, cluster points or affinity matrices,
//! and cross-check small instances against brute-force oracles.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dsclust_core::io::{read_affinity_file, read_points_file};
use dsclust_core::oracle::{grid_simplex_maximizer, is_binary, is_maximal_clique};
use dsclust_core::synth::gaussian_blobs;
use dsclust_core::{
    gaussian_kernel, pairwise_distances, peel_clusters, sigma_heuristic, AffinityMatrix,
    ClusterConfig, ClusteringResult, DynamicsConfig, DynamicsKind, Metric, StopCriterion,
};

/// Largest input `verify` accepts.
pub const VERIFY_MAX_NODES: usize = 8;

#[derive(Debug)]
pub enum CliError {
    /// Bad input data or parameters (exit code 2).
    Invalid(String),
    /// Anything else (exit code 1).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Internal(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<dsclust_core::Error> for CliError {
    fn from(e: dsclust_core::Error) -> Self {
        if e.is_invalid_input() {
            CliError::Invalid(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dsclust", version, about = "Dominant-set clustering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write Gaussian blobs around the given centers as a points CSV.
    GenBlobs(GenBlobsArgs),
    /// Cluster a points or affinity CSV.
    Cluster(ClusterArgs),
    /// Compare the first extracted set with brute-force oracles (n <= 8).
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GenBlobsArgs {
    /// Centers as `x,y;x,y;...`.
    #[arg(long, default_value = "1,1;5,5;8,8")]
    pub centers: String,
    /// Points per center.
    #[arg(long = "n", default_value_t = 100)]
    pub per_center: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Append the generating center index as a `label` column.
    #[arg(long)]
    pub with_labels: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Points,
    Affinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DynamicsArg {
    Rd,
    Exprd,
    Inimdyn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StopArg {
    /// L2 distance between successive states.
    Distance,
    /// Change in payoff between successive states.
    Payoff,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sigma {
    Auto,
    Value(f64),
}

impl FromStr for Sigma {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Sigma::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(Sigma::Value(v)),
            _ => Err(format!("expected `auto` or a positive number, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Affinity)]
    pub input_format: InputFormat,
    /// Kernel scale for points input: `auto` (three times the variance of
    /// the pairwise distances) or a positive value. Defaults to `auto`.
    #[arg(long)]
    pub sigma: Option<Sigma>,
    #[arg(long, value_enum, default_value_t = DynamicsArg::Rd)]
    pub dynamics: DynamicsArg,
    /// Selection strength of the exponential replicator.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub theta: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub precision: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, value_enum, default_value_t = StopArg::Distance)]
    pub stop: StopArg,
    /// Zero a nonzero diagonal in affinity input instead of rejecting it.
    #[arg(long)]
    pub repair_diagonal: bool,
    /// Skip the strict-maximizer refinement after convergence.
    #[arg(long)]
    pub no_refine: bool,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Labels CSV destination; standard output when omitted.
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
    /// Stats JSON destination.
    #[arg(long)]
    pub stats_out: Option<PathBuf>,
    /// Mark members of clusters smaller than this as outliers.
    #[arg(long, default_value_t = 1)]
    pub min_size: usize,
    /// Include wall-clock time in the stats (makes the output run-dependent).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Grid denominator for the simplex search.
    #[arg(long, default_value_t = dsclust_core::oracle::DEFAULT_GRID_RESOLUTION)]
    pub grid: u32,
}

impl RunArgs {
    pub fn cluster_config(&self) -> Result<ClusterConfig, CliError> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(CliError::Invalid(format!(
                "--kappa must be positive, got {}",
                self.kappa
            )));
        }
        let kind = match self.dynamics {
            DynamicsArg::Rd => DynamicsKind::Replicator,
            DynamicsArg::Exprd => DynamicsKind::ExponentialReplicator { kappa: self.kappa },
            DynamicsArg::Inimdyn => DynamicsKind::InfectionImmunization,
        };
        let dynamics = DynamicsConfig {
            kind,
            precision: self.precision,
            max_iters: self.max_iters,
            criterion: match self.stop {
                StopArg::Distance => StopCriterion::IterateDistance,
                StopArg::Payoff => StopCriterion::PayoffChange,
            },
        };
        let cfg = ClusterConfig {
            dynamics,
            theta: self.theta,
            refine: !self.no_refine,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Affinity matrix built or read from the input, with the kernel scale used.
pub struct Loaded {
    pub affinity: AffinityMatrix,
    pub sigma: Option<f64>,
}

fn read_error(path: &Path, e: dsclust_core::Error) -> CliError {
    match e {
        dsclust_core::Error::Io(io) => CliError::Invalid(format!("{}: {io}", path.display())),
        e => CliError::Invalid(format!("{}: {e}", path.display())),
    }
}

pub fn load(run: &RunArgs) -> Result<Loaded, CliError> {
    match run.input_format {
        InputFormat::Affinity => {
            if run.sigma.is_some() {
                return Err(CliError::Invalid(
                    "--sigma only applies to --input-format points".into(),
                ));
            }
            let affinity = read_affinity_file(&run.input, run.repair_diagonal)
                .map_err(|e| read_error(&run.input, e))?;
            Ok(Loaded {
                affinity,
                sigma: None,
            })
        }
        InputFormat::Points => {
            let table = read_points_file(&run.input).map_err(|e| read_error(&run.input, e))?;
            let dm = pairwise_distances(&table.cloud, Metric::Euclidean);
            let sigma = match run.sigma.unwrap_or(Sigma::Auto) {
                Sigma::Value(v) => v,
                Sigma::Auto => {
                    let s = sigma_heuristic(&dm)?;
                    if s <= 0.0 {
                        return Err(CliError::Invalid(
                            "all pairwise distances are equal, so `--sigma auto` is undefined; \
                             pass an explicit --sigma"
                                .into(),
                        ));
                    }
                    s
                }
            };
            Ok(Loaded {
                affinity: gaussian_kernel(&dm, sigma)?,
                sigma: Some(sigma),
            })
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ClusterStats {
    pub id: usize,
    pub size: usize,
    pub cohesiveness: f64,
    pub centroid: usize,
    pub iterations: usize,
    pub converged: bool,
    pub outlier: bool,
    pub degenerate: bool,
}

#[derive(Debug, Serialize)]
pub struct RunStats {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub dynamics: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub theta: f64,
    pub precision: f64,
    pub max_iters: usize,
    pub stop: &'static str,
    pub refine: bool,
    pub sigma: Option<f64>,
    pub clusters: Vec<ClusterStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

fn outlier_mask(result: &ClusteringResult, min_size: usize) -> Vec<bool> {
    result
        .labels
        .iter()
        .zip(&result.outliers)
        .map(|(&l, &o)| o || result.clusters[l].len() < min_size)
        .collect()
}

pub fn stats(result: &ClusteringResult, sigma: Option<f64>, min_size: usize) -> RunStats {
    let cfg = &result.config;
    RunStats {
        n: result.n(),
        k: result.num_clusters(),
        dynamics: cfg.dynamics.kind.name(),
        kappa: match cfg.dynamics.kind {
            DynamicsKind::ExponentialReplicator { kappa } => Some(kappa),
            _ => None,
        },
        theta: cfg.theta,
        precision: cfg.dynamics.precision,
        max_iters: cfg.dynamics.max_iters,
        stop: match cfg.dynamics.criterion {
            StopCriterion::IterateDistance => "distance",
            StopCriterion::PayoffChange => "payoff",
        },
        refine: cfg.refine,
        sigma,
        clusters: result
            .clusters
            .iter()
            .map(|ds| ClusterStats {
                id: ds.extraction_order,
                size: ds.len(),
                cohesiveness: ds.cohesiveness,
                centroid: ds.centroid,
                iterations: ds.iterations,
                converged: ds.converged,
                outlier: ds.is_outlier() || ds.len() < min_size,
                degenerate: ds.degenerate,
            })
            .collect(),
        wall_time_ms: None,
    }
}

/// `node_index,cluster_id,is_outlier` with a header row.
pub fn labels_csv(result: &ClusteringResult, min_size: usize) -> String {
    let mut out = String::from("node_index,cluster_id,is_outlier\n");
    for (i, (l, o)) in result
        .labels
        .iter()
        .zip(outlier_mask(result, min_size))
        .enumerate()
    {
        writeln!(out, "{i},{l},{o}").expect("write to string");
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn parse_centers(s: &str) -> Result<Vec<Vec<f64>>, CliError> {
    s.split(';')
        .map(|c| {
            c.split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|_| {
                        CliError::Invalid(format!("center coordinate {v:?} is not a number"))
                    })
                })
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect()
}

pub fn gen_blobs(args: &GenBlobsArgs) -> Result<(), CliError> {
    let centers = parse_centers(&args.centers)?;
    let blobs = gaussian_blobs(&centers, args.per_center, args.seed)?;
    let d = blobs.points.dim();
    let mut out = (0..d)
        .map(|j| format!("x{j}"))
        .collect::<Vec<_>>()
        .join(",");
    if args.with_labels {
        out.push_str(",label");
    }
    out.push('\n');
    for (row, label) in blobs.points.points().rows().into_iter().zip(&blobs.labels) {
        let line = row.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        out.push_str(&line);
        if args.with_labels {
            write!(out, ",{label}").expect("write to string");
        }
        out.push('\n');
    }
    write_file(&args.out, &out)
}

pub fn cluster(args: &ClusterArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    let cfg = args.run.cluster_config()?;
    let loaded = load(&args.run)?;
    let result = peel_clusters(&loaded.affinity, &cfg)?;

    let labels = labels_csv(&result, args.min_size);
    match &args.labels_out {
        Some(p) => write_file(p, &labels)?,
        None => stdout
            .write_all(labels.as_bytes())
            .map_err(|e| CliError::Internal(e.to_string()))?,
    }
    if let Some(p) = &args.stats_out {
        let mut s = stats(&result, loaded.sigma, args.min_size);
        if args.timing {
            s.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        }
        let json =
            serde_json::to_string_pretty(&s).map_err(|e| CliError::Internal(e.to_string()))?;
        write_file(p, &(json + "\n"))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub grid: u32,
    pub first_members: Vec<usize>,
    pub first_cohesiveness: f64,
    pub oracle_payoff: f64,
    pub oracle_point: Vec<f64>,
    /// `first_cohesiveness / oracle_payoff`, 1 when both are zero.
    pub payoff_ratio: f64,
    pub binary_input: bool,
    /// Only for 0/1 symmetric input.
    pub first_is_maximal_clique: Option<bool>,
}

pub fn verify_report(args: &VerifyArgs) -> Result<VerifyReport, CliError> {
    let cfg = args.run.cluster_config()?;
    let loaded = load(&args.run)?;
    let a = &loaded.affinity;
    if a.n() > VERIFY_MAX_NODES {
        return Err(CliError::Invalid(format!(
            "verify supports at most {VERIFY_MAX_NODES} nodes, input has {}",
            a.n()
        )));
    }
    let result = peel_clusters(a, &cfg)?;
    let oracle = grid_simplex_maximizer(a, args.grid)?;
    let first = &result.clusters[0];
    let ratio = if oracle.payoff_best > 0.0 {
        first.cohesiveness / oracle.payoff_best
    } else if first.cohesiveness == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    let binary = is_binary(a) && a.is_symmetric();
    Ok(VerifyReport {
        n: a.n(),
        grid: args.grid,
        first_members: first.members.clone(),
        first_cohesiveness: first.cohesiveness,
        oracle_payoff: oracle.payoff_best,
        oracle_point: oracle.x_best.into_vec(),
        payoff_ratio: ratio,
        binary_input: binary,
        first_is_maximal_clique: binary.then(|| is_maximal_clique(a, &first.members)),
    })
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::GenBlobs(args) => gen_blobs(&args),
        Command::Cluster(args) => cluster(&args, stdout),
        Command::Verify(args) => {
            let report = verify_report(&args)?;
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            writeln!(stdout, "{json}").map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_argument() {
        assert_eq!("auto".parse::<Sigma>().unwrap(), Sigma::Auto);
        assert_eq!("2.5".parse::<Sigma>().unwrap(), Sigma::Value(2.5));
        assert!("0".parse::<Sigma>().is_err());
        assert!("-1".parse::<Sigma>().is_err());
        assert!("abc".parse::<Sigma>().is_err());
    }

    #[test]
    fn centers_parse() {
        assert_eq!(
            parse_centers("1,1;5,5;8,8").unwrap(),
            vec![vec![1.0, 1.0], vec![5.0, 5.0], vec![8.0, 8.0]]
        );
        assert!(parse_centers("1,x").is_err());
    }

    #[test]
    fn defaults_match_reference_call() {
        let cli = Cli::try_parse_from(["dsclust", "cluster", "--input", "a.csv"]).unwrap();
        let Command::Cluster(args) = cli.command else {
            panic!("expected cluster");
        };
        let cfg = args.run.cluster_config().unwrap();
        assert_eq!(cfg.dynamics.kind, DynamicsKind::Replicator);
        assert_eq!(cfg.theta, 1e-5);
        assert_eq!(cfg.dynamics.precision, 1e-6);
        assert_eq!(cfg.dynamics.max_iters, 1000);
        assert_eq!(args.run.input_format, InputFormat::Affinity);
    }
}
