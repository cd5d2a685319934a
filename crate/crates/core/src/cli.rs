//! Command-line front end: policy dumps, simulations and the two sweeps, as
//! CSV or JSON data files.
//!
//! Settings come from flags, then an optional JSON config file, then
//! built-in defaults (N = 20, p_H = 0.004, p_L = 0.02, P_tx = 1).

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::markov::EhChain;
use crate::policy::{
    genie_optimal, genie_qbar, genie_rbar, lambda_h_max, local_optimal, local_throughput,
    single_active_threshold, GeniePolicy,
};
use crate::sim::{default_burn_in, Mode, Scheme, SimConfig, SimReport, Simulator};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

const DEFAULT_EMAX_SWEEP: [u32; 7] = [1, 2, 5, 10, 20, 50, 100];

#[derive(Debug, Parser)]
#[command(name = "ehra", version, about = "Transmission policies and simulation for energy-harvesting random access")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the local and genie-aided policies with their analytical metrics.
    Solve(CommonArgs),
    /// Throughput of all three schemes over a grid of lambda_H (idealized mode).
    SweepLambda(CommonArgs),
    /// Battery-dynamics throughput over a range of battery capacities.
    SweepBattery(CommonArgs),
    /// Run one simulation and dump its report.
    Simulate(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::SweepLambda(_) => "sweep-lambda",
            Command::SweepBattery(_) => "sweep-battery",
            Command::Simulate(_) => "simulate",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Solve(a) | Command::SweepLambda(a) | Command::SweepBattery(a) | Command::Simulate(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Local,
    Genie,
    Bayesian,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Local => Scheme::Local,
            SchemeArg::Genie => Scheme::Genie,
            SchemeArg::Bayesian => Scheme::Bayesian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Idealized,
    Battery,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Idealized => Mode::Idealized,
            ModeArg::Battery => Mode::Battery,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON file with any of the settings below (flags take precedence).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of nodes N.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// L -> H transition probability per slot.
    #[arg(long)]
    pub p_high: Option<f64>,
    /// H -> L transition probability per slot.
    #[arg(long)]
    pub p_low: Option<f64>,
    /// Average harvested power in H (defaults to lambda_H,max).
    #[arg(long)]
    pub lambda_high: Option<f64>,
    /// Transmission power.
    #[arg(long)]
    pub ptx: Option<f64>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Battery capacity in quanta; a comma-separated list for sweep-battery.
    #[arg(long, value_delimiter = ',')]
    pub emax: Option<Vec<u32>>,
    /// Slots per replication, burn-in included.
    #[arg(long)]
    pub slots: Option<u64>,
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long)]
    pub replications: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of lambda_H points for sweep-lambda.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Contents of a `--config` file; every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub nodes: Option<usize>,
    pub p_high: Option<f64>,
    pub p_low: Option<f64>,
    pub lambda_high: Option<f64>,
    pub ptx: Option<f64>,
    pub scheme: Option<SchemeArg>,
    pub mode: Option<ModeArg>,
    pub emax: Option<Vec<u32>>,
    pub slots: Option<u64>,
    pub burn_in: Option<u64>,
    pub replications: Option<u32>,
    pub seed: Option<u64>,
    pub grid_points: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub command: String,
    pub nodes: usize,
    pub p_high: f64,
    pub p_low: f64,
    pub lambda_high: f64,
    pub lambda_low: f64,
    pub ptx: f64,
    pub scheme: Option<SchemeArg>,
    pub mode: Option<ModeArg>,
    pub emax: Vec<u32>,
    pub slots: u64,
    pub burn_in: u64,
    pub replications: u32,
    pub seed: u64,
    pub grid_points: usize,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SolverFailure(_) => EXIT_SOLVER,
            _ => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

impl ExperimentSpec {
    pub fn resolve(command: &Command) -> Result<Self, CliError> {
        let args = command.args();
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
                serde_json::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        macro_rules! pick {
            ($field:ident, $default:expr) => {
                args.$field.clone().or(file.$field.clone()).unwrap_or($default)
            };
        }
        let nodes = pick!(nodes, 20);
        let p_high = pick!(p_high, 4e-3);
        let p_low = pick!(p_low, 2e-2);
        let ptx = pick!(ptx, 1.0);
        if nodes < 1 {
            return Err(CliError::usage("--nodes must be at least 1"));
        }
        // validate the transition structure before deriving lambda_H,max from it
        let probe = EhChain::with_silent_low(p_high, p_low, 0.0, ptx)?;
        let lambda_high = pick!(lambda_high, lambda_h_max(nodes, &probe));
        let burn_in = pick!(burn_in, default_burn_in(&probe));
        let emax = pick!(emax, DEFAULT_EMAX_SWEEP.to_vec());
        let spec = Self {
            command: command.name().to_string(),
            nodes,
            p_high,
            p_low,
            lambda_high,
            lambda_low: 0.0,
            ptx,
            scheme: args.scheme.or(file.scheme),
            mode: args.mode.or(file.mode),
            emax,
            slots: pick!(slots, 1_000_000),
            burn_in,
            replications: pick!(replications, 20),
            seed: pick!(seed, 1),
            grid_points: pick!(grid_points, 20),
            output: args.output.clone().or(file.output.clone()),
            format: pick!(format, Format::Csv),
        };
        if spec.grid_points < 1 {
            return Err(CliError::usage("--grid-points must be at least 1"));
        }
        if spec.emax.is_empty() {
            return Err(CliError::usage("--emax needs at least one value"));
        }
        Ok(spec)
    }

    pub fn chain(&self) -> Result<EhChain, CliError> {
        Ok(EhChain::new(self.p_high, self.p_low, self.lambda_high, self.lambda_low, self.ptx)?)
    }

    fn sim_config(&self, chain: EhChain, scheme: Scheme, mode: Mode, e_max: u32) -> SimConfig {
        SimConfig {
            n: self.nodes,
            chain,
            scheme,
            mode,
            e_max_quanta: e_max,
            slots: self.slots,
            burn_in: self.burn_in,
            seed: self.seed,
            replications: self.replications,
        }
    }

    fn check_run_lengths(&self) -> Result<(), CliError> {
        if self.slots <= self.burn_in {
            return Err(CliError::usage(format!(
                "--slots ({}) must exceed --burn-in ({})",
                self.slots, self.burn_in
            )));
        }
        if self.replications < 1 {
            return Err(CliError::usage("--replications must be at least 1"));
        }
        Ok(())
    }

    fn meta(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("spec serializes");
        v["tool"] = json!(format!("ehra {}", env!("CARGO_PKG_VERSION")));
        v
    }
}

/// Formats `x` with 12 significant digits, without locale or exponent
/// surprises for ordinary magnitudes.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let s = if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, e) = s.split_once('e').expect("scientific format");
        format!("{}e{e}", trim_fraction(mantissa))
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: serde_json::Map<String, Value> =
                    self.header.iter().cloned().zip(r.iter().map(|&x| json_num(x))).collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

fn json_num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn csv_document(meta: &Value, extra: &[(String, String)], table: &Table) -> String {
    let mut out = String::new();
    if let Value::Object(map) = meta {
        for (k, v) in map {
            let v = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            let _ = writeln!(out, "# {k}: {v}");
        }
    }
    for (k, v) in extra {
        let _ = writeln!(out, "# {k}: {v}");
    }
    out.push_str(&table.header.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn json_document(value: Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("json serializes");
    s.push('\n');
    s
}

fn solve(spec: &ExperimentSpec) -> Result<String, CliError> {
    let chain = spec.chain()?;
    let n = spec.nodes;
    let local = local_optimal(n, &chain)?;
    let genie: GeniePolicy = genie_optimal(n, &chain)?;
    let q_local = local.q_bar(&chain);
    let summary = json!({
        "pi_high": json_num(chain.pi_high()),
        "lambda_h_max": json_num(lambda_h_max(n, &chain)),
        "single_active_threshold": json_num(single_active_threshold(n, &chain)),
        "local": {
            "mu_high": json_num(local.mu_high),
            "mu_low": json_num(local.mu_low),
            "q_bar": json_num(q_local),
            "r_bar": json_num(local_throughput(n, q_local)),
        },
        "genie": {
            "regime": genie.regime().to_string(),
            "phi": json_num(genie.phi()),
            "mu": genie.mu_vec().iter().map(|&u| json_num(u)).collect::<Vec<_>>(),
            "q_bar": json_num(genie_qbar(&genie, &chain)),
            "r_bar": json_num(genie_rbar(&genie, &chain)),
        },
    });
    match spec.format {
        Format::Json => Ok(json_document(json!({ "meta": spec.meta(), "solution": summary }))),
        Format::Csv => {
            let extra = vec![
                ("pi_high".into(), fmt_num(chain.pi_high())),
                ("lambda_h_max".into(), fmt_num(lambda_h_max(n, &chain))),
                ("single_active_threshold".into(), fmt_num(single_active_threshold(n, &chain))),
                ("local_mu_high".into(), fmt_num(local.mu_high)),
                ("local_q_bar".into(), fmt_num(q_local)),
                ("local_r_bar".into(), fmt_num(local_throughput(n, q_local))),
                ("genie_regime".into(), genie.regime().to_string()),
                ("genie_phi".into(), fmt_num(genie.phi())),
                ("genie_q_bar".into(), fmt_num(genie_qbar(&genie, &chain))),
                ("genie_r_bar".into(), fmt_num(genie_rbar(&genie, &chain))),
            ];
            let mut table = Table::new(&["m", "mu_genie"]);
            for (i, &u) in genie.mu_vec().iter().enumerate() {
                table.push(vec![(i + 1) as f64, u]);
            }
            Ok(csv_document(&spec.meta(), &extra, &table))
        }
    }
}

fn run_sim(cfg: SimConfig) -> Result<SimReport, CliError> {
    Ok(Simulator::new(cfg)?.run()?)
}

fn sweep_lambda(spec: &ExperimentSpec) -> Result<String, CliError> {
    spec.check_run_lengths()?;
    let base = spec.chain()?;
    let n = spec.nodes;
    let top = lambda_h_max(n, &base);
    let mut table = Table::new(&[
        "lambda_H",
        "pi_H_lambda_H",
        "R_local_analytic",
        "R_genie_analytic",
        "R_local_mc",
        "R_local_mc_stderr",
        "R_genie_mc",
        "R_genie_mc_stderr",
        "R_bayes_mc",
        "R_bayes_mc_stderr",
        "power_h_local",
        "power_h_local_stderr",
        "power_h_genie",
        "power_h_genie_stderr",
        "power_h_bayes",
        "power_h_bayes_stderr",
    ]);
    for i in 1..=spec.grid_points {
        let lambda = top * i as f64 / spec.grid_points as f64;
        let chain = base.with_lambda_high(lambda)?;
        let local = local_optimal(n, &chain)?;
        let genie = genie_optimal(n, &chain)?;
        let mut row = vec![
            lambda,
            chain.pi_high() * lambda,
            local_throughput(n, local.q_bar(&chain)),
            genie_rbar(&genie, &chain),
        ];
        let reports = [Scheme::Local, Scheme::Genie, Scheme::Bayesian]
            .into_iter()
            .map(|s| run_sim(spec.sim_config(chain, s, Mode::Idealized, 1)))
            .collect::<Result<Vec<_>, _>>()?;
        for r in &reports {
            row.extend([r.throughput.mean, r.throughput.stderr]);
        }
        for r in &reports {
            row.extend([r.power_h.mean, r.power_h.stderr]);
        }
        table.push(row);
    }
    Ok(render_table(spec, &[("lambda_h_max".into(), fmt_num(top))], &table))
}

fn sweep_battery(spec: &ExperimentSpec) -> Result<String, CliError> {
    spec.check_run_lengths()?;
    let chain = spec.chain()?;
    if chain.lambda_high() > chain.ptx() {
        return Err(CliError::usage(format!(
            "battery mode needs lambda_H <= P_tx (got lambda_H / P_tx = {})",
            chain.lambda_high() / chain.ptx()
        )));
    }
    let local_ideal = run_sim(spec.sim_config(chain, Scheme::Local, Mode::Idealized, 1))?;
    let bayes_ideal = run_sim(spec.sim_config(chain, Scheme::Bayesian, Mode::Idealized, 1))?;
    let mut table = Table::new(&[
        "e_max_quanta",
        "R_local_battery",
        "R_local_battery_stderr",
        "R_local_ideal",
        "R_local_ideal_stderr",
        "R_bayes_battery",
        "R_bayes_battery_stderr",
        "R_bayes_ideal",
        "R_bayes_ideal_stderr",
        "outage_rate_local",
        "overflow_rate_local",
        "outage_rate_bayes",
        "overflow_rate_bayes",
    ]);
    for &e_max in &spec.emax {
        if e_max < 1 {
            return Err(CliError::usage("--emax values must be at least 1"));
        }
        let local = run_sim(spec.sim_config(chain, Scheme::Local, Mode::Battery, e_max))?;
        let bayes = run_sim(spec.sim_config(chain, Scheme::Bayesian, Mode::Battery, e_max))?;
        table.push(vec![
            e_max as f64,
            local.throughput.mean,
            local.throughput.stderr,
            local_ideal.throughput.mean,
            local_ideal.throughput.stderr,
            bayes.throughput.mean,
            bayes.throughput.stderr,
            bayes_ideal.throughput.mean,
            bayes_ideal.throughput.stderr,
            local.outage_rate(),
            local.overflow_rate(),
            bayes.outage_rate(),
            bayes.overflow_rate(),
        ]);
    }
    Ok(render_table(spec, &[], &table))
}

fn simulate(spec: &ExperimentSpec) -> Result<String, CliError> {
    spec.check_run_lengths()?;
    let scheme = spec.scheme.ok_or_else(|| CliError::usage("simulate requires --scheme"))?;
    let mode = spec.mode.ok_or_else(|| CliError::usage("simulate requires --mode"))?;
    let e_max = match (mode, spec.emax.as_slice()) {
        (ModeArg::Battery, [single]) => *single,
        (ModeArg::Battery, _) if spec.emax == DEFAULT_EMAX_SWEEP => 100,
        (ModeArg::Battery, _) => return Err(CliError::usage("simulate takes a single --emax value")),
        (ModeArg::Idealized, _) => 1,
    };
    let chain = spec.chain()?;
    let report = run_sim(spec.sim_config(chain, scheme.into(), mode.into(), e_max))?;
    match spec.format {
        Format::Json => Ok(json_document(json!({ "meta": spec.meta(), "report": report }))),
        Format::Csv => {
            let mut table = Table::new(&[
                "seed",
                "replications",
                "e_max_quanta",
                "throughput",
                "throughput_stderr",
                "power_h",
                "power_h_stderr",
                "intents",
                "transmissions",
                "outage_events",
                "harvested_quanta",
                "overflow_quanta",
                "zero_evidence_resets",
            ]);
            table.push(vec![
                report.seed as f64,
                report.replications as f64,
                report.e_max_quanta.map_or(f64::NAN, |e| e as f64),
                report.throughput.mean,
                report.throughput.stderr,
                report.power_h.mean,
                report.power_h.stderr,
                report.intents as f64,
                report.transmissions as f64,
                report.outage_events as f64,
                report.harvested_quanta as f64,
                report.overflow_quanta as f64,
                report.zero_evidence_resets as f64,
            ]);
            Ok(csv_document(&spec.meta(), &[], &table))
        }
    }
}

fn render_table(spec: &ExperimentSpec, extra: &[(String, String)], table: &Table) -> String {
    match spec.format {
        Format::Json => {
            let mut meta = spec.meta();
            for (k, v) in extra {
                meta[k.as_str()] = json!(v);
            }
            json_document(json!({ "meta": meta, "rows": table.to_json() }))
        }
        Format::Csv => csv_document(&spec.meta(), extra, table),
    }
}

/// Produces the output document for a parsed command.
pub fn render(command: &Command) -> Result<(ExperimentSpec, String), CliError> {
    let spec = ExperimentSpec::resolve(command)?;
    let doc = match command {
        Command::Solve(_) => solve(&spec)?,
        Command::SweepLambda(_) => sweep_lambda(&spec)?,
        Command::SweepBattery(_) => sweep_battery(&spec)?,
        Command::Simulate(_) => simulate(&spec)?,
    };
    Ok((spec, doc))
}

/// Parses `args`, runs the command and writes its output; returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = render(&cli.command).and_then(|(spec, doc)| match &spec.output {
        Some(path) => std::fs::write(path, doc)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{doc}");
            Ok(())
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Command {
        Cli::try_parse_from(std::iter::once("ehra").chain(args.iter().copied())).unwrap().command
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.377353602535307), "0.377353602535");
        assert_eq!(fmt_num(20.0), "20");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(-2.5e-9), "-2.5e-9");
        assert_eq!(fmt_num(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(f64::NAN), "NaN");
        assert_eq!(fmt_num(0.00012345), "0.00012345");
    }

    #[test]
    fn defaults_mirror_reference_setting() {
        let spec = ExperimentSpec::resolve(&parse(&["solve"])).unwrap();
        assert_eq!((spec.nodes, spec.p_high, spec.p_low, spec.ptx), (20, 4e-3, 2e-2, 1.0));
        assert!((spec.lambda_high - 0.292174784008623).abs() < 1e-12);
        assert_eq!(spec.burn_in, 417);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"nodes": 5, "p_high": 0.1, "seed": 9}"#).unwrap();
        let p = path.to_str().unwrap();
        let spec = ExperimentSpec::resolve(&parse(&["solve", "--config", p, "--nodes", "7"])).unwrap();
        assert_eq!(spec.nodes, 7);
        assert_eq!(spec.p_high, 0.1);
        assert_eq!(spec.seed, 9);

        std::fs::write(&path, r#"{"bogus": 1}"#).unwrap();
        let err = ExperimentSpec::resolve(&parse(&["solve", "--config", p])).unwrap_err();
        assert_eq!(err.code, EXIT_USAGE);
    }

    #[test]
    fn solve_reports_regimes() {
        let (_, doc) = render(&parse(&["solve", "--lambda-high", "0.3", "--format", "json"])).unwrap();
        let v: Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["solution"]["genie"]["regime"], "UNCONSTRAINED");
        assert_eq!(v["solution"]["genie"]["mu"][3].as_f64().unwrap(), 0.25);

        let (_, doc) = render(&parse(&[
            "solve", "--nodes", "2", "--p-high", "0.1", "--p-low", "0.1", "--lambda-high", "0.4",
        ]))
        .unwrap();
        assert!(doc.contains("# genie_regime: SINGLE_ACTIVE"));
        assert!(doc.ends_with("m,mu_genie\n1,0.8\n2,0\n"));
    }

    #[test]
    fn parameter_errors_exit_with_usage_code() {
        for args in [
            &["solve", "--lambda-high", "0"][..],
            &["solve", "--p-high", "0.6", "--p-low", "0.5"],
            &["sweep-lambda", "--slots", "0"],
            &["sweep-battery", "--lambda-high", "1.5"],
            &["simulate", "--mode", "idealized"],
        ] {
            let err = render(&parse(args)).unwrap_err();
            assert_eq!(err.code, EXIT_USAGE, "{args:?}");
        }
    }

    #[test]
    fn solver_failure_maps_to_exit_3() {
        let e: CliError = Error::SolverFailure("x".into()).into();
        assert_eq!(e.code, EXIT_SOLVER);
    }
}
