use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use sparsity_core::harness::{
    apply_calibration, calibrate_general, calibrate_independent, calibrate_threshold, estimate_risk, rate_reference,
    separation_search, sweep, RateQuery, RateSetting, Setting, SweepConfig, TestKind, TestSpec,
};
use sparsity_core::model::{generate_sample, read_dataset, write_dataset, Scenario, SignalSpec};
use sparsity_core::{Constant, DesignConstants, Error, Provenance, Result};

#[derive(Parser)]
#[command(name = "sparsity", version, about = "Sparsity tests for Gaussian linear regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Ignore calibrated entries and use the built-in constants.
    Analytic,
    /// Require a constants file with calibrated entries.
    Calibrated,
}

#[derive(Clone, Copy, ValueEnum)]
enum SettingArg {
    Independent,
    General,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Target level of the tests.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Confidence parameter of the estimators.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Design class parameter.
    #[arg(long, default_value_t = 2.0)]
    eta: f64,
    /// DesignConstants JSON file.
    #[arg(long)]
    constants: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one sample from a scenario and write it as an SPTD dataset.
    Generate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one test on a stored dataset and print the report as JSON.
    RunTest {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        test: TestKind,
        /// JSON object with `k0` and optionally `sigma`, `alpha`, `delta`,
        /// `eta`, `classical_lasso`; its fields take precedence over flags.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        k0: Option<usize>,
        #[arg(long)]
        sigma: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Calibrate rejection cutoffs on a null panel and write DesignConstants JSON.
    Calibrate {
        #[arg(long, value_enum)]
        setting: SettingArg,
        /// Restrict calibration to these tests (comma separated).
        #[arg(long, value_delimiter = ',')]
        tests: Vec<TestKind>,
        /// Null panel as scenario JSON files; overrides the built-in panel.
        #[arg(long = "null")]
        nulls: Vec<PathBuf>,
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        p: usize,
        /// Sparsity levels of the built-in panel.
        #[arg(long, value_delimiter = ',', default_value = "0,5,20")]
        k0: Vec<usize>,
        /// Spike magnitude of the built-in panel, in units of σ·sqrt(ln p / n).
        #[arg(long, default_value_t = 10.0)]
        spike_scale: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate type-I, type-II and total risk of a test.
    Risk {
        #[arg(long)]
        test: TestKind,
        #[arg(long = "null", required = true)]
        nulls: Vec<PathBuf>,
        #[arg(long = "alt", required = true)]
        alts: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Bisect for the separation distance at which the risk crosses gamma.
    Search {
        #[arg(long)]
        test: TestKind,
        #[arg(long = "null", required = true)]
        nulls: Vec<PathBuf>,
        /// Alternative scenario whose distance is varied.
        #[arg(long)]
        template: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Print the reference separation rate and regime.
    Rates {
        #[arg(long, value_enum)]
        setting: SettingArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        k0: usize,
        /// Number of entries beyond k0 carrying the distance.
        #[arg(long)]
        delta: usize,
    },
    /// Run a parameter grid and write one CSV row per cell.
    Sweep {
        /// SweepConfig JSON file.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the seed of the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the trial count of the config file.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        constants: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunParams {
    k0: Option<usize>,
    sigma: Option<f64>,
    alpha: Option<f64>,
    delta: Option<f64>,
    eta: Option<f64>,
    #[serde(default)]
    classical_lasso: bool,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))
}

fn read_scenario(path: &Path) -> Result<Scenario> {
    Scenario::from_json(&read_text(path)?)
}

fn read_scenarios(paths: &[PathBuf]) -> Result<Vec<Scenario>> {
    paths.iter().map(|p| read_scenario(p)).collect()
}

fn strip_calibrated(c: DesignConstants) -> DesignConstants {
    let d = DesignConstants::default();
    let pick = |v: Constant, def: Constant| if v.provenance == Provenance::Calibrated { def } else { v };
    DesignConstants {
        c_t: pick(c.c_t, d.c_t),
        c_chi: pick(c.c_chi, d.c_chi),
        c_f: pick(c.c_f, d.c_f),
        c_i: c.c_i.into_iter().filter(|v| v.provenance != Provenance::Calibrated).collect(),
        c_u_eta: pick(c.c_u_eta, d.c_u_eta),
        c_sl_eta: pick(c.c_sl_eta, d.c_sl_eta),
        c_mcp_eta: pick(c.c_mcp_eta, d.c_mcp_eta),
        c_mcp_prime_eta: pick(c.c_mcp_prime_eta, d.c_mcp_prime_eta),
        c_star_a1: pick(c.c_star_a1, d.c_star_a1),
        c_star_a3: pick(c.c_star_a3, d.c_star_a3),
        c_star: c.c_star.filter(|v| v.provenance != Provenance::Calibrated),
        c_ith_eta: pick(c.c_ith_eta, d.c_ith_eta),
        c_regime_eta: pick(c.c_regime_eta, d.c_regime_eta),
        condition_a_c: pick(c.condition_a_c, d.condition_a_c),
        condition_b_c: pick(c.condition_b_c, d.condition_b_c),
    }
}

fn load_constants(path: Option<&Path>, mode: Option<Mode>) -> Result<DesignConstants> {
    let c = match path {
        Some(p) => DesignConstants::from_json(&read_text(p)?)?,
        None => DesignConstants::default(),
    };
    match mode {
        None => Ok(c),
        Some(Mode::Analytic) => Ok(strip_calibrated(c)),
        Some(Mode::Calibrated) if c.has_calibrated() => Ok(c),
        Some(Mode::Calibrated) => {
            Err(Error::InvalidConfig("--mode calibrated needs a constants file with calibrated entries".into()))
        }
    }
}

fn spec_for(kind: TestKind, common: &Common) -> Result<TestSpec> {
    let constants = load_constants(common.constants.as_deref(), common.mode)?;
    Ok(TestSpec::new(kind, common.alpha, common.delta, common.eta, constants))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { scenario, seed, out } => {
            let sample = generate_sample(&read_scenario(&scenario)?, seed)?;
            let mut w = BufWriter::new(File::create(&out)?);
            write_dataset(&mut w, &sample)?;
            w.flush()?;
        }
        Command::RunTest { dataset, test, params, k0, sigma, common } => {
            let file = File::open(&dataset)
                .map_err(|e| Error::InvalidConfig(format!("cannot open {}: {e}", dataset.display())))?;
            let sample = read_dataset(BufReader::new(file))?;
            let rp: RunParams = match params {
                Some(p) => serde_json::from_str(&read_text(&p)?)?,
                None => {
                    RunParams { k0: None, sigma: None, alpha: None, delta: None, eta: None, classical_lasso: false }
                }
            };
            let k0 = rp.k0.or(k0).ok_or_else(|| Error::InvalidConfig("k0 is required".into()))?;
            let sigma = rp.sigma.or(sigma).unwrap_or(1.0);
            if !(sigma > 0.0) {
                return Err(Error::InvalidConfig(format!("sigma must be positive, got {sigma}")));
            }
            let mut spec = spec_for(test, &common)?;
            spec.alpha = rp.alpha.unwrap_or(spec.alpha);
            spec.delta = rp.delta.unwrap_or(spec.delta);
            spec.eta = rp.eta.unwrap_or(spec.eta);
            spec.classical_lasso = rp.classical_lasso;
            print_json(&spec.run_sample(&sample, k0, sigma)?)?;
        }
        Command::Calibrate { setting, tests, nulls, n, p, k0, spike_scale, out, common } => {
            let panel = if nulls.is_empty() {
                let spike = spike_scale * ((p as f64).ln() / n as f64).sqrt();
                let base = Scenario {
                    n,
                    p,
                    sigma: 1.0,
                    sigma_known: false,
                    covariance: sparsity_core::model::CovarianceSpec::identity(common.eta),
                    signal: SignalSpec::null_spikes(0, spike),
                };
                k0.iter().map(|&k| base.with_signal(SignalSpec::null_spikes(k, spike))).collect()
            } else {
                read_scenarios(&nulls)?
            };
            let kind = match setting {
                SettingArg::Independent => TestKind::T,
                SettingArg::General => TestKind::U,
            };
            let spec = spec_for(kind, &common)?;
            let constants = if tests.is_empty() {
                match setting {
                    SettingArg::Independent => {
                        calibrate_independent(&spec, &panel, common.alpha, common.trials, common.seed)?
                    }
                    SettingArg::General => calibrate_general(&spec, &panel, common.alpha, common.trials, common.seed)?,
                }
            } else {
                let want = match setting {
                    SettingArg::Independent => Setting::Independent,
                    SettingArg::General => Setting::General,
                };
                if let Some(t) = tests.iter().find(|t| t.setting() != want) {
                    return Err(Error::InvalidConfig(format!("test `{t}` belongs to the other setting")));
                }
                let cals = calibrate_threshold(&spec, &tests, &panel, common.alpha, common.trials, common.seed)?;
                apply_calibration(&spec.constants, &cals)?
            };
            let mut w = output(out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &constants)?;
            writeln!(w)?;
            w.flush()?;
        }
        Command::Risk { test, nulls, alts, common } => {
            let spec = spec_for(test, &common)?;
            let est =
                estimate_risk(&spec, &read_scenarios(&nulls)?, &read_scenarios(&alts)?, common.trials, common.seed)?;
            print_json(&est)?;
        }
        Command::Search { test, nulls, template, gamma, lo, hi, common } => {
            let spec = spec_for(test, &common)?;
            let res = separation_search(
                &spec,
                &read_scenarios(&nulls)?,
                &read_scenario(&template)?,
                gamma,
                (lo, hi),
                common.trials,
                common.seed,
            )?;
            print_json(&res)?;
        }
        Command::Rates { setting, n, p, k0, delta } => {
            let setting = match setting {
                SettingArg::Independent => RateSetting::Independent,
                SettingArg::General => RateSetting::General,
            };
            print_json(&rate_reference(&RateQuery { setting, n, p, k0, delta })?)?;
        }
        Command::Sweep { config, out, seed, trials, constants, mode } => {
            let mut cfg: SweepConfig = serde_json::from_str(&read_text(&config)?)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            let c = load_constants(constants.as_deref(), mode)?;
            let mut w = output(out.as_deref())?;
            sweep(&cfg, &c, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
