//! Parameter sweeps behind the rate-vs-power, power-scaling and
//! antenna-comparison studies, written as versioned CSV.
//!
//! Every file starts with `# onebit-mimo-sim v1, seed=<s>`, followed by a
//! `# mode=<mode>` line, optional `# crossing ...` lines and then a fixed
//! column header (see [`CSV_COLUMNS`]). Columns that do not apply to a
//! scenario are left empty.
//!
//! Monte-Carlo draws for a grid point depend only on the seed, the scenario
//! and the antenna count, so points that share `M` use common random numbers
//! and output is identical for any thread count.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{db_to_linear, linear_to_db, SystemConfig};
use crate::downlink::{
    case1_limit, case2_limit, closed_form_rate, conventional_rate, monte_carlo_rate, required_antennas, ArraySystem,
};
use crate::error::{Error, Result};
use crate::numerics::RandomStream;
use crate::training::EstimateMode;

pub const CSV_VERSION_TAG: &str = "onebit-mimo-sim v1";

pub const CSV_COLUMNS: [&str; 12] = [
    "scenario",
    "m",
    "k",
    "rho_p_db",
    "p_t_db",
    "trials",
    "mc_sum_rate",
    "mc_stderr",
    "cf_sum_rate",
    "conv_sum_rate",
    "case1_limit",
    "case2_limit",
];

pub const DEFAULT_TRIALS: usize = 2000;

/// One line of a sweep CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario: String,
    pub m: usize,
    pub k: usize,
    pub rho_p_db: f64,
    pub p_t_db: f64,
    pub trials: usize,
    pub mc_sum_rate: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub cf_sum_rate: Option<f64>,
    pub conv_sum_rate: Option<f64>,
    pub case1_limit: Option<f64>,
    pub case2_limit: Option<f64>,
}

impl SweepRow {
    fn for_config(scenario: &str, cfg: &SystemConfig) -> Self {
        Self {
            scenario: scenario.to_owned(),
            m: cfg.m(),
            k: cfg.k(),
            rho_p_db: linear_to_db(cfg.rho_p()),
            p_t_db: linear_to_db(cfg.p_t()),
            trials: 0,
            mc_sum_rate: None,
            mc_stderr: None,
            cf_sum_rate: None,
            conv_sum_rate: None,
            case1_limit: None,
            case2_limit: None,
        }
    }

    fn numeric_fields(&self) -> [Option<f64>; 8] {
        [
            Some(self.rho_p_db),
            Some(self.p_t_db),
            self.mc_sum_rate,
            self.mc_stderr,
            self.cf_sum_rate,
            self.conv_sum_rate,
            self.case1_limit,
            self.case2_limit,
        ]
    }
}

/// Smallest antenna counts reaching a sum-rate target, per converter type.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing {
    pub target_sum_rate: f64,
    pub one_bit_m: usize,
    pub conventional_m: usize,
}

/// Rows of a finished sweep plus the metadata written into the CSV preamble.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub seed: u64,
    pub mode: EstimateMode,
    pub rows: Vec<SweepRow>,
    pub crossings: Vec<Crossing>,
}

impl SweepTable {
    fn new(seed: u64, mode: EstimateMode) -> Self {
        Self {
            seed,
            mode,
            rows: Vec::new(),
            crossings: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        for row in &self.rows {
            if row.numeric_fields().iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("non-finite value in row {row:?}")));
            }
            if row.mc_stderr.is_some_and(|s| s < 0.0) {
                return Err(Error::Domain(format!("negative standard error in row {row:?}")));
            }
        }
        let mut out = format!(
            "# {CSV_VERSION_TAG}, seed={}\n# mode={}\n",
            self.seed,
            self.mode.as_str()
        );
        for c in &self.crossings {
            out.push_str(&format!(
                "# crossing target_sum_rate={} one_bit_m={} conventional_m={}\n",
                c.target_sum_rate, c.one_bit_m, c.conventional_m
            ));
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            writer.write_record(CSV_COLUMNS).map_err(format_error)?;
        }
        for row in &self.rows {
            writer.serialize(row).map_err(format_error)?;
        }
        let body = writer.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        out.push_str(&String::from_utf8(body).map_err(|e| Error::Format(e.to_string()))?);
        Ok(out)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let text = self.to_csv()?;
        let io_err = |source| Error::Io {
            path: path.to_owned(),
            source,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err)?;
        }
        let mut file = fs::File::create(path).map_err(io_err)?;
        file.write_all(text.as_bytes()).map_err(io_err)
    }
}

fn format_error(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Parses a sweep CSV, checking the version preamble and the column header.
pub fn parse_csv(text: &str) -> Result<(u64, Vec<SweepRow>)> {
    let first = text.lines().next().unwrap_or_default();
    let prefix = format!("# {CSV_VERSION_TAG}, seed=");
    let seed = first
        .strip_prefix(&prefix)
        .ok_or_else(|| Error::Format(format!("expected '{prefix}<seed>' header, found '{first}'")))?
        .trim()
        .parse::<u64>()
        .map_err(|e| Error::Format(format!("bad seed in header: {e}")))?;

    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let header = reader.headers().map_err(format_error)?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::Format(format!("unexpected columns {header:?}")));
    }
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<Vec<SweepRow>, _>>()
        .map_err(format_error)?;
    Ok((seed, rows))
}

/// Sum rate against transmit power for several array sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct RateVsPower {
    pub m_list: Vec<usize>,
    pub p_t_grid_db: Vec<f64>,
    pub k: usize,
    pub rho_p_db: f64,
}

impl Default for RateVsPower {
    fn default() -> Self {
        Self {
            m_list: vec![32, 64, 128],
            p_t_grid_db: (0..=8).map(|i| -10.0 + 2.5 * i as f64).collect(),
            k: 10,
            rho_p_db: 10.0,
        }
    }
}

/// Sum rate against M when powers shrink with the array: Case I keeps ρ_p
/// and sets `P_t = E_t/M`, Case II sets `ρ_p = E_u/√M` and `P_t = E_t/√M`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerScaling {
    pub m_grid: Vec<usize>,
    pub e_t_db: f64,
    pub e_u_db: f64,
    pub rho_p_db: f64,
    pub k: usize,
}

impl Default for PowerScaling {
    fn default() -> Self {
        Self {
            m_grid: vec![16, 32, 48, 64, 96, 128, 192, 256, 384, 512],
            e_t_db: 10.0,
            e_u_db: 10.0,
            rho_p_db: 10.0,
            k: 10,
        }
    }
}

/// One-bit against ideal converters as M grows, plus sum-rate crossings.
#[derive(Clone, Debug, PartialEq)]
pub struct AntennaComparison {
    pub m_grid: Vec<usize>,
    pub k: usize,
    pub rho_p_db: f64,
    pub p_t_db: f64,
    pub target_sum_rates: Vec<f64>,
}

impl Default for AntennaComparison {
    fn default() -> Self {
        Self {
            m_grid: (1..=20).map(|i| 20 * i).collect(),
            k: 10,
            rho_p_db: 10.0,
            p_t_db: 10.0,
            target_sum_rates: vec![35.0],
        }
    }
}

/// Which study a [`SweepSpec`] runs.
#[derive(Clone, Debug, PartialEq)]
pub enum Scenario {
    RateVsPower(RateVsPower),
    PowerScaling(PowerScaling),
    AntennaComparison(AntennaComparison),
    /// Arbitrary configurations, each reported with every method.
    Custom(Vec<SystemConfig>),
}

impl Scenario {
    pub fn id(&self) -> &'static str {
        match self {
            Scenario::RateVsPower(_) => "rate_vs_power",
            Scenario::PowerScaling(_) => "power_scaling",
            Scenario::AntennaComparison(_) => "antenna_comparison",
            Scenario::Custom(_) => "custom",
        }
    }
}

/// A complete sweep request.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub scenario: Scenario,
    /// Monte-Carlo trials per grid point. Zero skips the Monte-Carlo columns
    /// where the scenario allows it.
    pub trials: usize,
    pub seed: u64,
    pub mode: EstimateMode,
    pub output_path: Option<PathBuf>,
}

impl SweepSpec {
    pub fn run(&self) -> Result<SweepTable> {
        match &self.scenario {
            Scenario::RateVsPower(p) => run_rate_vs_power(p, self.trials, self.seed, self.mode),
            Scenario::PowerScaling(p) => run_power_scaling(p, self.trials, self.seed, self.mode),
            Scenario::AntennaComparison(p) => run_antenna_comparison(p, self.trials, self.seed, self.mode),
            Scenario::Custom(grid) => run_custom(grid, self.trials, self.seed, self.mode),
        }
    }

    /// Runs the sweep and writes it to `output_path` when one is set.
    pub fn run_and_write(&self) -> Result<SweepTable> {
        let table = self.run()?;
        if let Some(path) = &self.output_path {
            table.write_csv(path)?;
        }
        Ok(table)
    }
}

fn require_nonempty<T>(items: &[T], what: &str) -> Result<()> {
    if items.is_empty() {
        return Err(Error::InvalidArgument(format!("{what} must not be empty")));
    }
    Ok(())
}

fn point_stream(seed: u64, scenario: u64, m: usize) -> RandomStream {
    RandomStream::new(seed, 0).substream(scenario).substream(m as u64)
}

fn fill_monte_carlo(
    row: &mut SweepRow,
    cfg: &SystemConfig,
    trials: usize,
    stream: RandomStream,
    mode: EstimateMode,
) -> Result<()> {
    if trials == 0 {
        return Ok(());
    }
    let report = monte_carlo_rate(cfg, trials, stream, mode)?;
    row.trials = trials;
    row.mc_sum_rate = Some(report.sum_rate);
    row.mc_stderr = Some(report.sum_rate_stderr);
    Ok(())
}

pub fn run_rate_vs_power(params: &RateVsPower, trials: usize, seed: u64, mode: EstimateMode) -> Result<SweepTable> {
    require_nonempty(&params.m_list, "antenna list")?;
    require_nonempty(&params.p_t_grid_db, "transmit power grid")?;
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "rate-vs-power needs at least one Monte-Carlo trial".into(),
        ));
    }
    let mut table = SweepTable::new(seed, mode);
    for &m in &params.m_list {
        for &p_t_db in &params.p_t_grid_db {
            let cfg = SystemConfig::new(m, params.k, db_to_linear(params.rho_p_db), db_to_linear(p_t_db))?;
            let mut row = SweepRow::for_config("rate_vs_power", &cfg);
            row.rho_p_db = params.rho_p_db;
            row.p_t_db = p_t_db;
            fill_monte_carlo(&mut row, &cfg, trials, point_stream(seed, 1, m), mode)?;
            row.cf_sum_rate = Some(closed_form_rate(&cfg).sum_rate);
            table.rows.push(row);
        }
    }
    Ok(table)
}

pub fn run_power_scaling(params: &PowerScaling, trials: usize, seed: u64, mode: EstimateMode) -> Result<SweepTable> {
    require_nonempty(&params.m_grid, "antenna grid")?;
    let k = params.k;
    let e_t = db_to_linear(params.e_t_db);
    let e_u = db_to_linear(params.e_u_db);
    let rho_fixed = db_to_linear(params.rho_p_db);
    let limit1 = k as f64 * case1_limit(rho_fixed, e_t, k);
    let limit2 = k as f64 * case2_limit(e_u, e_t);

    let mut table = SweepTable::new(seed, mode);
    for &m in &params.m_grid {
        let root = (m as f64).sqrt();
        let cases = [
            (
                "power_scaling_case1",
                2,
                SystemConfig::new(m, k, rho_fixed, e_t / m as f64)?,
            ),
            (
                "power_scaling_case2",
                3,
                SystemConfig::new(m, k, e_u / root, e_t / root)?,
            ),
        ];
        for (id, tag, cfg) in cases {
            let mut row = SweepRow::for_config(id, &cfg);
            fill_monte_carlo(&mut row, &cfg, trials, point_stream(seed, tag, m), mode)?;
            row.cf_sum_rate = Some(closed_form_rate(&cfg).sum_rate);
            row.case1_limit = Some(limit1);
            row.case2_limit = Some(limit2);
            table.rows.push(row);
        }
    }
    Ok(table)
}

pub fn run_antenna_comparison(
    params: &AntennaComparison,
    trials: usize,
    seed: u64,
    mode: EstimateMode,
) -> Result<SweepTable> {
    require_nonempty(&params.m_grid, "antenna grid")?;
    let base = SystemConfig::new(1, params.k, db_to_linear(params.rho_p_db), db_to_linear(params.p_t_db))?;

    let mut table = SweepTable::new(seed, mode);
    for &m in &params.m_grid {
        let cfg = base.with_antennas(m)?;
        let mut row = SweepRow::for_config("antenna_comparison", &cfg);
        row.rho_p_db = params.rho_p_db;
        row.p_t_db = params.p_t_db;
        fill_monte_carlo(&mut row, &cfg, trials, point_stream(seed, 4, m), mode)?;
        row.cf_sum_rate = Some(closed_form_rate(&cfg).sum_rate);
        row.conv_sum_rate = Some(conventional_rate(&cfg).sum_rate);
        table.rows.push(row);
    }
    for &target in &params.target_sum_rates {
        let per_user = target / params.k as f64;
        table.crossings.push(Crossing {
            target_sum_rate: target,
            one_bit_m: required_antennas(per_user, &base, ArraySystem::OneBit)?,
            conventional_m: required_antennas(per_user, &base, ArraySystem::Conventional)?,
        });
    }
    Ok(table)
}

pub fn run_custom(grid: &[SystemConfig], trials: usize, seed: u64, mode: EstimateMode) -> Result<SweepTable> {
    require_nonempty(grid, "configuration grid")?;
    let mut table = SweepTable::new(seed, mode);
    for (i, cfg) in grid.iter().enumerate() {
        let mut row = SweepRow::for_config("custom", cfg);
        let stream = RandomStream::new(seed, 0).substream(5).substream(i as u64);
        fill_monte_carlo(&mut row, cfg, trials, stream, mode)?;
        row.cf_sum_rate = Some(closed_form_rate(cfg).sum_rate);
        row.conv_sum_rate = Some(conventional_rate(cfg).sum_rate);
        table.rows.push(row);
    }
    Ok(table)
}
