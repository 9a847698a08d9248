//! `onebit-mimo-sim`: rate sweeps, single-point reports and antenna planning
//! for one-bit massive MIMO downlinks.
//!
//! Exit status is 0 on success, 2 for bad arguments and 1 for anything that
//! went wrong while running.

mod settings;

use std::fmt;
use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use onebit_mimo::downlink::use_and_forget_rate;
use onebit_mimo::experiments::DEFAULT_TRIALS;
use onebit_mimo::{
    closed_form_rate, conventional_rate, db_to_linear, monte_carlo_rate, required_antennas, AntennaComparison,
    ArraySystem, PowerScaling, RandomStream, RateReport, RateVsPower, Scenario, SweepSpec, SystemConfig,
};

use settings::{Flags, Settings};

#[derive(Parser, Debug)]
#[command(
    name = "onebit-mimo-sim",
    version,
    about = "One-bit DAC massive MIMO downlink simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sum rate against transmit power for several array sizes
    RateVsPower(Flags),
    /// Sum rate against M with powers scaled down as 1/M and 1/√M
    PowerScaling(Flags),
    /// One-bit against ideal converters over M, with target crossings
    AntennaComparison(Flags),
    /// Monte-Carlo, closed-form, use-and-forget and conventional rates at one point
    Rate(Flags),
    /// Antennas needed to reach per-user or sum-rate targets
    Plan(Flags),
}

/// Bad input from the user; maps to exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_status(err: &anyhow::Error) -> u8 {
    let usage = err.chain().any(|cause| {
        cause.is::<UsageError>()
            || cause
                .downcast_ref::<onebit_mimo::Error>()
                .is_some_and(|e| e.is_argument_error())
    });
    if usage {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    let (flags, job): (Flags, fn(&Settings) -> anyhow::Result<()>) = match command {
        Command::RateVsPower(f) => (f, rate_vs_power),
        Command::PowerScaling(f) => (f, power_scaling),
        Command::AntennaComparison(f) => (f, antenna_comparison),
        Command::Rate(f) => (f, rate),
        Command::Plan(f) => (f, plan),
    };
    let settings = Settings::resolve(flags)?;
    match settings.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(|| job(&settings)),
        None => job(&settings),
    }
}

fn sweep(settings: &Settings, scenario: Scenario) -> anyhow::Result<()> {
    let spec = SweepSpec {
        scenario,
        trials: settings.trials.unwrap_or(DEFAULT_TRIALS),
        seed: settings.seed,
        mode: settings.mode,
        output_path: settings.out.clone(),
    };
    let table = spec.run()?;
    match &spec.output_path {
        Some(path) => {
            table.write_csv(path)?;
            eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
        }
        None => std::io::stdout().write_all(table.to_csv()?.as_bytes())?,
    }
    Ok(())
}

fn rate_vs_power(s: &Settings) -> anyhow::Result<()> {
    let defaults = RateVsPower::default();
    let params = RateVsPower {
        m_list: s.m.clone().unwrap_or(defaults.m_list),
        p_t_grid_db: s.pt_db.clone().unwrap_or(defaults.p_t_grid_db),
        k: s.k,
        rho_p_db: s.rho_p_db,
    };
    sweep(s, Scenario::RateVsPower(params))
}

fn power_scaling(s: &Settings) -> anyhow::Result<()> {
    let params = PowerScaling {
        m_grid: s.m.clone().unwrap_or(PowerScaling::default().m_grid),
        e_t_db: s.et_db,
        e_u_db: s.eu_db,
        rho_p_db: s.rho_p_db,
        k: s.k,
    };
    sweep(s, Scenario::PowerScaling(params))
}

fn targets_per_user(s: &Settings) -> Vec<f64> {
    let mut out: Vec<f64> = s.target_sum.iter().flatten().map(|t| t / s.k as f64).collect();
    out.extend(s.target_per_user.iter().flatten());
    out
}

fn antenna_comparison(s: &Settings) -> anyhow::Result<()> {
    let defaults = AntennaComparison::default();
    let mut target_sum_rates: Vec<f64> = targets_per_user(s).iter().map(|t| t * s.k as f64).collect();
    if s.target_sum.is_none() && s.target_per_user.is_none() {
        target_sum_rates = defaults.target_sum_rates;
    }
    let params = AntennaComparison {
        m_grid: s.m.clone().unwrap_or(defaults.m_grid),
        k: s.k,
        rho_p_db: s.rho_p_db,
        p_t_db: Settings::single(&s.pt_db, "pt-db", defaults.p_t_db)?,
        target_sum_rates,
    };
    sweep(s, Scenario::AntennaComparison(params))
}

fn print_report(out: &mut impl Write, report: &RateReport) -> std::io::Result<()> {
    let per_user = report.per_user_rate.iter().sum::<f64>() / report.per_user_rate.len() as f64;
    writeln!(
        out,
        "{:<15} sum_rate={:.4} stderr={:.4} per_user={:.4}",
        report.method.as_str(),
        report.sum_rate,
        report.sum_rate_stderr,
        per_user
    )
}

fn rate(s: &Settings) -> anyhow::Result<()> {
    let m = Settings::single(&s.m, "m", 64)?;
    let p_t_db = Settings::single(&s.pt_db, "pt-db", 10.0)?;
    let cfg = SystemConfig::from_db(m, s.k, s.rho_p_db, p_t_db)?;
    let trials = s.trials.unwrap_or(DEFAULT_TRIALS);
    let stream = RandomStream::new(s.seed, 0).substream(6).substream(m as u64);

    let reports = [
        monte_carlo_rate(&cfg, trials, stream, s.mode)?,
        closed_form_rate(&cfg),
        use_and_forget_rate(&cfg),
        conventional_rate(&cfg),
    ];
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "m={m} k={} rho_p_db={} p_t_db={p_t_db} mode={} trials={trials} seed={}",
        s.k,
        s.rho_p_db,
        s.mode.as_str(),
        s.seed
    )?;
    for report in &reports {
        print_report(&mut out, report)?;
    }
    Ok(())
}

fn plan(s: &Settings) -> anyhow::Result<()> {
    let targets = targets_per_user(s);
    if targets.is_empty() {
        return Err(UsageError("plan needs --target-per-user or --target-sum".into()).into());
    }
    let p_t_db = Settings::single(&s.pt_db, "pt-db", 10.0)?;
    let base = SystemConfig::new(1, s.k, db_to_linear(s.rho_p_db), db_to_linear(p_t_db))?;
    let mut out = std::io::stdout().lock();
    for target in targets {
        let one_bit = required_antennas(target, &base, ArraySystem::OneBit)?;
        let conventional = required_antennas(target, &base, ArraySystem::Conventional)?;
        writeln!(
            out,
            "target_per_user={target} one_bit_m={one_bit} conventional_m={conventional} ratio={:.4}",
            one_bit as f64 / conventional as f64
        )?;
    }
    Ok(())
}
