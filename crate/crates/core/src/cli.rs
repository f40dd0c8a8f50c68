//! Command-line entry point.
//!
//! Exit codes: 0 success, 2 config errors (including bad flags), 3 I/O
//! errors, 4 validation errors. Every artifact is computed in memory before
//! the output directory is touched, so a failing run leaves nothing behind.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::estimators::{run_estimator, Algorithm, EstimateRecord, EstimatorConfig};
use crate::harness::config::ImageSource;
use crate::harness::{
    read_pgm, report_resources, run_convergence_sweep, run_supersample, run_value_sweep, sweep_oracle,
    synthetic_test_card, with_jobs, write_csv, write_pgm, Integrand, Region, SupersampleConfig, SweepSpec,
};
use crate::noise::NoiseModel;
use crate::primitives::{qcoin_shot_circuit, qss_circuit, qss_preparation_circuit, Encoding, Layout, OracleSpec};

#[derive(Debug, Parser)]
#[command(name = "qmean", version, about = "Quantum mean estimation on a statevector simulator")]
pub struct Cli {
    /// Worker threads for sweeps and supersampling.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one estimator on a constant or random integrand.
    Estimate(EstimateArgs),
    /// Error against the true mean for every configured f.
    SweepValue(RunArgs),
    /// Error against query count, with fitted slopes and an optimal-k table.
    SweepConvergence(RunArgs),
    /// Estimate every pixel of an image from its subpixels.
    Supersample(RunArgs),
    /// Print the gate listing of a QSS or QCoin circuit.
    DumpCircuit(DumpArgs),
    /// Qubit, gate and connectivity counts for both algorithms.
    Resources(ResourceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    #[value(alias = "mc")]
    MonteCarlo,
    Qss,
    Qcoin,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::MonteCarlo => Algorithm::MonteCarlo,
            AlgorithmArg::Qss => Algorithm::Qss,
            AlgorithmArg::Qcoin => Algorithm::Qcoin,
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, value_enum)]
    pub algorithm: AlgorithmArg,
    /// True mean of the integrand.
    #[arg(long)]
    pub f: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub n_input: usize,
    /// Spread the integrand randomly around `f` instead of keeping it constant.
    #[arg(long)]
    pub random_integrand: bool,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long = "L", default_value_t = 20)]
    pub l: u64,
    #[arg(long = "P", default_value_t = 16)]
    pub p: usize,
    /// Derive trials, P or L from a query budget.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Noise preset: none or hardware.
    #[arg(long, default_value = "none")]
    pub noise: String,
    /// Also write `estimate.csv` here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Replaces the config's seed base.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    #[arg(long, value_enum)]
    pub algorithm: AlgorithmArg,
    #[arg(long, default_value_t = 2)]
    pub n_input: usize,
    /// QSS counting resolution.
    #[arg(long = "P", default_value_t = 4)]
    pub p: usize,
    /// QCoin AA repetitions.
    #[arg(long, default_value_t = 1)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 0.5)]
    pub f: f64,
    /// QCoin offset E.
    #[arg(long, default_value_t = 0.0)]
    pub offset: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ResourceArgs {
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long = "P")]
    pub p: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        Error::Io(_) | Error::Csv(_) => 3,
        _ => 4,
    }
}

/// Parses `args` and runs the command, printing diagnostics to stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let jobs = cli.jobs;
    if jobs == Some(0) {
        return Err(Error::param("--jobs must be at least 1"));
    }
    match cli.command {
        Command::Estimate(args) => estimate(&args),
        Command::SweepValue(args) => {
            let (spec, text) = load_sweep(&args)?;
            let result = with_jobs(jobs, || run_value_sweep(&spec))??;
            let out = prepare_out(&args.out)?;
            fs::write(out.join("effective_config.toml"), text)?;
            write_csv(&out.join("aggregate.csv"), &result.aggregates)?;
            if spec.write_trials {
                write_csv(&out.join("trials.csv"), &result.trials)?;
            }
            Ok(())
        }
        Command::SweepConvergence(args) => {
            let (spec, text) = load_sweep(&args)?;
            let result = with_jobs(jobs, || run_convergence_sweep(&spec))??;
            let out = prepare_out(&args.out)?;
            fs::write(out.join("effective_config.toml"), text)?;
            write_csv(&out.join("aggregate.csv"), &result.aggregates)?;
            write_csv(&out.join("slopes.csv"), &result.slopes)?;
            result.error_table.write_csv(fs::File::create(out.join("optimal_k.csv"))?)?;
            if spec.write_trials {
                write_csv(&out.join("trials.csv"), &result.trials)?;
            }
            let text: String = result
                .slopes
                .iter()
                .map(|s| match s.slope {
                    Some(v) => format!("{}\tslope {v:.3}\n", s.series),
                    None => format!("{}\tslope -\n", s.series),
                })
                .collect();
            emit(&text)
        }
        Command::Supersample(args) => supersample(&args, jobs),
        Command::DumpCircuit(args) => dump_circuit(&args),
        Command::Resources(args) => {
            let reports = report_resources(args.n, args.p)?;
            let text: String = reports.iter().map(|r| format!("{r}\n")).collect();
            if let Some(out) = &args.out {
                fs::write(prepare_out(out)?.join("resources.txt"), &text)?;
            }
            emit(&text)
        }
    }
}

/// Writes `text` to stdout. A closed pipe is not an error.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn read_config(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn load_sweep(args: &RunArgs) -> Result<(SweepSpec, String)> {
    let mut spec = SweepSpec::from_toml(&read_config(&args.config)?)?;
    if let Some(seed) = args.seed {
        spec.seed_base = seed;
    }
    spec.validate()?;
    let text = spec.to_toml();
    Ok((spec, text))
}

fn prepare_out(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.to_path_buf())
}

fn estimate(args: &EstimateArgs) -> Result<()> {
    let mut config = EstimatorConfig::new(args.algorithm.into(), args.seed);
    config.query_budget = args.budget;
    config.qss_p = args.p;
    config.qcoin_k = args.k;
    config.qcoin_l = args.l;
    config.noise = NoiseModel::preset(&args.noise)?;
    config.validate()?;
    if !(0.0..=1.0).contains(&args.f) {
        return Err(Error::param(format!("f = {} outside [0, 1]", args.f)));
    }
    let integrand = if args.random_integrand { Integrand::Random } else { Integrand::Constant };
    let oracle = sweep_oracle(args.f, args.n_input, integrand, false, args.seed)?;
    let est = run_estimator(&config, &oracle)?;
    let record = EstimateRecord::new(&est, args.f, args.seed);
    let line = format!(
        "algorithm={} f_true={} f_est={:.6} queries={} seed={} trace={}\n",
        record.algorithm, record.f_true, record.f_est, record.queries, record.seed, record.trace
    );
    if let Some(out) = &args.out {
        write_csv(&prepare_out(out)?.join("estimate.csv"), &[record])?;
    }
    emit(&line)
}

fn supersample(args: &RunArgs, jobs: Option<usize>) -> Result<()> {
    let mut config = SupersampleConfig::from_toml(&read_config(&args.config)?)?;
    if let Some(seed) = args.seed {
        config.seed_base = seed;
    }
    config.validate()?;
    let (source, default_regions) = match &config.image {
        ImageSource::Synthetic { width, height } => synthetic_test_card(*width, *height, config.block)?,
        ImageSource::File { path } => {
            let img = read_pgm(Path::new(path))?;
            let whole = Region::whole(img.width / config.block.max(1), img.height / config.block.max(1));
            (img, vec![whole])
        }
    };
    let regions = if config.regions.is_empty() { default_regions } else { config.regions.clone() };
    let result = with_jobs(jobs, || run_supersample(&config, &source, &regions))??;

    let out = prepare_out(&args.out)?;
    fs::write(out.join("effective_config.toml"), config.to_toml())?;
    write_pgm(&out.join("ideal.pgm"), &result.ideal)?;
    for (series, img) in &result.images {
        write_pgm(&out.join(format!("{series}.pgm")), img)?;
    }
    write_csv(&out.join("region_mae.csv"), &result.errors)?;
    #[derive(serde::Serialize)]
    struct Summary<'a> {
        series: String,
        region: &'a str,
        queries: u64,
        median_mae: f64,
    }
    let mut summary = Vec::new();
    let mut text = String::new();
    for &(series, queries) in &result.queries {
        for r in &regions {
            let median_mae = result.median_mae(series, &r.name).unwrap_or(f64::NAN);
            summary.push(Summary { series: series.to_string(), region: &r.name, queries, median_mae });
            text.push_str(&format!("{series}\t{}\tmedian MAE {median_mae:.4}\n", r.name));
        }
    }
    write_csv(&out.join("region_summary.csv"), &summary)?;
    emit(&text)
}

fn dump_circuit(args: &DumpArgs) -> Result<()> {
    let circuit = match args.algorithm {
        AlgorithmArg::Qss => {
            let o = OracleSpec::constant(args.f, args.n_input, Encoding::SqrtAmplitude)?;
            qss_circuit(&o, args.p)?.full()
        }
        AlgorithmArg::Qcoin => {
            let o = OracleSpec::new(vec![args.f; 1 << args.n_input], args.offset, Encoding::LinearAmplitude)?;
            qcoin_shot_circuit(&o, args.repetitions)?.0
        }
        AlgorithmArg::MonteCarlo => {
            let o = OracleSpec::constant(args.f, args.n_input, Encoding::SqrtAmplitude)?;
            qss_preparation_circuit(&o, Layout::for_oracle(&o).n_qubits())?
        }
    };
    let text = circuit.dump();
    if let Some(out) = &args.out {
        fs::write(prepare_out(out)?.join("circuit.txt"), &text)?;
    }
    emit(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 3);
        assert_eq!(exit_code(&Error::InvalidOracle("x".into())), 4);
    }

    #[test]
    fn parses_estimate_flags() {
        let cli = Cli::try_parse_from([
            "qmean",
            "estimate",
            "--algorithm",
            "qcoin",
            "--f",
            "0.5",
            "--k",
            "3",
            "--L",
            "20",
            "--seed",
            "1",
        ])
        .unwrap();
        let Command::Estimate(a) = cli.command else { panic!("wrong subcommand") };
        assert_eq!((a.algorithm, a.k, a.l, a.seed), (AlgorithmArg::Qcoin, 3, 20, 1));
        assert!(
            Cli::try_parse_from(["qmean", "estimate", "--algorithm", "vegas", "--f", "0.5", "--seed", "1"]).is_err()
        );
    }
}
