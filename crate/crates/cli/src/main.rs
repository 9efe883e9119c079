//! `diml`: solve, sweep, price, simulate and verify ruin-minimizing insurance contracts.

mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use diml_core::config::{ContractSpec, LimitSpec, MarketConfig, MaxLimit};
use diml_core::solver::{self, Solution};
use diml_core::verify::{self, RandomOracleOptions};
use diml_core::{Error, Market64};

use output::{Document, Rows};

#[derive(Parser, Debug)]
#[command(name = "diml", version, about = "Ruin-minimizing deductible-with-limit insurance")]
struct Cli {
    /// Market configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SweepParam {
    Theta,
    Wealth,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal contract at the configured wealth.
    Solve,
    /// Optimal contracts along a range of loadings or wealth levels.
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
    },
    /// Premium of a deductible-with-limit contract.
    Premium {
        #[arg(long)]
        d: f64,
        /// Limit, or `max` for the essential supremum.
        #[arg(long)]
        m: String,
    },
    /// Monte Carlo ruin frequency of the optimal contract.
    Simulate {
        #[arg(long, default_value_t = 1_000_000)]
        paths: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Worker threads; 0 uses all cores. Does not affect the result.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Checks the solver against the grid, randomized and duality oracles.
    Verify {
        /// Points per axis of the deductible/limit grid.
        #[arg(long, default_value_t = 512)]
        grid: usize,
        /// Random admissible quantile grids to sample.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Probability cells per sampled quantile grid.
        #[arg(long, default_value_t = 1_000)]
        cells: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Allowed undercut of the solver's ruin probability by sampled grids.
        #[arg(long, default_value_t = verify::DEFAULT_GRID_TOLERANCE)]
        tolerance: f64,
        /// Worker threads; 0 uses all cores. Does not affect the result.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

/// Failure classes, one per nonzero exit code.
#[derive(Debug)]
enum Failure {
    Verification(String),
    Config(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::PremiumNotFinite(_) | Error::Numerical(_) | Error::InadmissibleGrid { .. } => {
                Failure::Numeric(e.to_string())
            }
            Error::Domain { .. } | Error::Unbounded | Error::InvalidParameter { .. } | Error::InvalidTable { .. } => {
                Failure::Config(e.to_string())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Verification(msg) => eprintln!("FAIL {msg}"),
                Failure::Config(msg) => eprintln!("error: invalid configuration: {msg}"),
                Failure::Numeric(msg) => eprintln!("error: numerical failure: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let config = load_config(cli)?;
    let market: Market64 = config.market()?;
    let wealth: f64 = config.wealth()?;
    match &cli.command {
        Command::Solve => {
            let s = solver::solve(&market, wealth)?;
            emit(cli, &Document::Solution(s))
        }
        Command::Sweep { param, from, to, steps } => {
            let rows = sweep(&config, &market, *param, *from, *to, *steps)?;
            emit(cli, &Document::Sweep(rows))
        }
        Command::Premium { d, m } => {
            let limit = parse_limit(m)?;
            let contract = ContractSpec { d: *d, m: limit }.build(market.loss())?;
            let q = market.premium_diml(contract.deductible(), contract.limit())?;
            emit(cli, &Document::Premium(q))
        }
        Command::Simulate { paths, seed, threads } => {
            let report = with_threads(*threads, || simulate(&market, wealth, *paths, *seed))??;
            emit(cli, &Document::Simulation(report))?;
            status(report.passed, &format!(
                "simulate: estimate {} vs analytic {} ({:.2} standard errors)",
                report.estimate, report.analytic_ruin_prob, report.z_score
            ))
        }
        Command::Verify { grid, samples, cells, seed, tolerance, threads } => {
            let opts = RandomOracleOptions {
                samples: *samples,
                grid: *cells,
                seed: *seed,
                tolerance: *tolerance,
            };
            let report = with_threads(*threads, || verify_all(&market, wealth, *grid, opts))??;
            emit(cli, &Document::Verification(report))?;
            status(report.passed, &format!(
                "verify: grid gap {:e}, random gap {:e}, duality gap {}",
                report.grid_oracle.gap,
                report.random_oracle.gap,
                report.var_duality.map_or("n/a".to_string(), |d| format!("{:e}", d.gap)),
            ))
        }
    }
}

fn load_config(cli: &Cli) -> Result<MarketConfig, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config PATH is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    MarketConfig::from_json(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn parse_limit(m: &str) -> Result<LimitSpec, Failure> {
    if m == "max" {
        return Ok(LimitSpec::Max(MaxLimit::Max));
    }
    m.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(LimitSpec::Value)
        .ok_or_else(|| Failure::Config(format!("--m must be a number or `max`, got `{m}`")))
}

fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Config(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(f))
}

fn emit(cli: &Cli, doc: &Document) -> Result<(), Failure> {
    let text = match cli.format {
        Format::Json => doc.to_json(),
        Format::Csv => doc.to_csv(),
    };
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Config(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn status(passed: bool, msg: &str) -> Result<(), Failure> {
    if passed {
        eprintln!("PASS {msg}");
        Ok(())
    } else {
        Err(Failure::Verification(msg.to_string()))
    }
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    param: f64,
    #[serde(flatten)]
    solution: Solution<f64>,
}

fn sweep(
    config: &MarketConfig,
    market: &Market64,
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<Vec<SweepRow>, Failure> {
    if !(from.is_finite() && to.is_finite() && from < to) {
        return Err(Failure::Config(format!("sweep needs finite --from < --to, got {from} and {to}")));
    }
    if steps < 2 {
        return Err(Failure::Config(format!("sweep needs --steps >= 2, got {steps}")));
    }
    let values = verify::linspace(from, to, steps);
    let thresholds = solver::thresholds(market)?;
    values
        .par_iter()
        .map(|&v| -> Result<SweepRow, Failure> {
            let solution = match param {
                SweepParam::Theta => {
                    let mut c = config.clone();
                    c.theta = v;
                    solver::solve(&c.market::<f64>()?, config.wealth()?)?
                }
                SweepParam::Wealth => solver::solve_with(market, &thresholds, v)?,
            };
            Ok(SweepRow { param: v, solution })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
struct SimulationReport {
    contract: ContractSpec,
    wealth: f64,
    premium: f64,
    analytic_ruin_prob: f64,
    estimate: f64,
    std_err: f64,
    z_score: f64,
    ruined: u64,
    paths: u64,
    seed: u64,
    passed: bool,
}

/// Simulates the optimal contract; passes when the estimate lies within four standard
/// errors of the analytic ruin probability.
fn simulate(market: &Market64, w: f64, paths: u64, seed: u64) -> Result<SimulationReport, Failure> {
    let s = solver::solve(market, w)?;
    let contract = s.contract(market)?;
    let analytic = diml_core::ruin_probability(market, &contract, w)?;
    let e = verify::monte_carlo_ruin(market, &contract, w, paths, seed)?;
    let diff = e.estimate - analytic;
    let z = if e.std_err > 0.0 { diff / e.std_err } else if diff == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(SimulationReport {
        contract: ContractSpec::from_contract(&contract),
        wealth: w,
        premium: s.premium,
        analytic_ruin_prob: analytic,
        estimate: e.estimate,
        std_err: e.std_err,
        z_score: z,
        ruined: e.ruined,
        paths: e.paths,
        seed,
        passed: z.abs() <= 4.0,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
struct VerificationReport {
    wealth: f64,
    solution: Solution<f64>,
    grid_oracle: verify::OracleReport<f64>,
    random_oracle: verify::OracleReport<f64>,
    /// Absent at or above the safe level, where the ruin probability is zero.
    var_duality: Option<verify::DualityReport<f64>>,
    passed: bool,
}

fn verify_all(market: &Market64, w: f64, grid: usize, opts: RandomOracleOptions) -> Result<VerificationReport, Failure> {
    let solution = solver::solve(market, w)?;
    let grid_oracle = verify::grid_oracle(market, w, grid, grid)?;
    let random_oracle = verify::random_admissible_oracle(market, w, opts)?;
    let var_duality = if solution.case == solver::Case::SafeLevel {
        None
    } else {
        Some(verify::var_duality_check(market, w, grid)?)
    };
    let passed = grid_oracle.passed() && random_oracle.passed() && var_duality.is_none_or(|d| d.passed(w));
    Ok(VerificationReport {
        wealth: w,
        solution,
        grid_oracle,
        random_oracle,
        var_duality,
        passed,
    })
}

impl Rows for Vec<SweepRow> {
    fn header(&self) -> Vec<&'static str> {
        vec!["param", "case", "d", "m", "premium", "ruin_prob"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        self.iter()
            .map(|r| {
                let s = &r.solution;
                vec![
                    output::num(r.param),
                    s.case.to_string(),
                    output::num(s.d_star),
                    output::limit(s.m_star),
                    output::num(s.premium),
                    output::num(s.ruin_prob),
                ]
            })
            .collect()
    }
}

impl Rows for SimulationReport {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "d", "m", "wealth", "premium", "analytic_ruin_prob", "estimate", "std_err", "z_score", "ruined", "paths",
            "seed", "passed",
        ]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        let m = match self.contract.m {
            LimitSpec::Value(v) => output::num(v),
            LimitSpec::Max(_) => "max".into(),
        };
        vec![vec![
            output::num(self.contract.d),
            m,
            output::num(self.wealth),
            output::num(self.premium),
            output::num(self.analytic_ruin_prob),
            output::num(self.estimate),
            output::num(self.std_err),
            output::num(self.z_score),
            self.ruined.to_string(),
            self.paths.to_string(),
            self.seed.to_string(),
            self.passed.to_string(),
        ]]
    }
}

impl Rows for VerificationReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["check", "best_ruin_prob", "solver_ruin_prob", "gap", "tolerance", "passed"]
    }
    fn rows(&self) -> Vec<Vec<String>> {
        let oracle = |name: &str, r: &verify::OracleReport<f64>| {
            vec![
                name.to_string(),
                output::num(r.best_ruin_prob),
                output::num(r.solver_ruin_prob),
                output::num(r.gap),
                output::num(r.tolerance),
                r.passed().to_string(),
            ]
        };
        let mut rows = vec![oracle("grid_oracle", &self.grid_oracle), oracle("random_oracle", &self.random_oracle)];
        if let Some(d) = &self.var_duality {
            rows.push(vec![
                "var_duality".into(),
                String::new(),
                output::num(d.alpha),
                output::num(d.gap),
                output::num(d.tolerance),
                d.passed(self.wealth).to_string(),
            ]);
        }
        rows
    }
}
