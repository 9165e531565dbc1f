//! Gas schedule, fee arithmetic, and cost-report construction.
//!
//! Fees follow the linear model `(base + n·gas_per_char) × gas_price`,
//! where `n` is the payload character count for the functions marked
//! variable and 0 otherwise. All arithmetic is exact integer math.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::config::ChainConfig;
use crate::contracts::ContractKind;
use crate::units::{WeiAmount, WEI_PER_ETH};

/// Default marginal gas per payload character.
pub const DEFAULT_GAS_PER_CHAR: u64 = 625;

const EMBEDDED_SCHEDULE: &str = include_str!("../data/gas_schedule.csv");
const SCHEDULE_HEADER: &str = "contract,function,base_gas,variable,ref_payload_len,table_fee_eth,view";

/// Per-function cost parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub base_gas: u64,
    pub variable: bool,
    /// Payload length (characters) at which a variable function meters
    /// its nominal cost; 0 for fixed functions.
    pub ref_payload_len: u64,
    pub view: bool,
}

/// One function row of the schedule file, in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleRow {
    pub contract: ContractKind,
    pub function: String,
    pub entry: ScheduleEntry,
    /// Nominal fee as printed in the reference cost table; used only by
    /// [`FeeSource::TableFeeColumn`] reports.
    pub table_fee: WeiAmount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct DeployRow {
    gas: u64,
    table_fee: WeiAmount,
}

/// The full gas schedule: function rows in canonical report order,
/// per-contract deployment gas, and the marginal per-character gas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GasSchedule {
    gas_per_char: u64,
    rows: Vec<ScheduleRow>,
    index: BTreeMap<String, usize>,
    deploy: BTreeMap<ContractKind, DeployRow>,
}

impl Default for GasSchedule {
    fn default() -> Self {
        GasSchedule::from_csv_str(EMBEDDED_SCHEDULE).expect("embedded gas schedule is valid")
    }
}

impl GasSchedule {
    pub fn from_csv_str(text: &str) -> Result<Self, ScheduleError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == SCHEDULE_HEADER => {}
            other => {
                return Err(ScheduleError::BadHeader {
                    found: other.map(|(_, h)| h.to_string()).unwrap_or_default(),
                })
            }
        }
        let mut schedule = GasSchedule {
            gas_per_char: DEFAULT_GAS_PER_CHAR,
            rows: Vec::new(),
            index: BTreeMap::new(),
            deploy: BTreeMap::new(),
        };
        let mut saw_gas_per_char = false;
        for (idx, raw) in lines {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
            if fields.len() != 7 {
                return Err(ScheduleError::row(line, "expected 7 comma-separated fields"));
            }
            let base_gas: u64 = fields[2]
                .parse()
                .map_err(|_| ScheduleError::row(line, "base_gas must be an integer"))?;
            let variable = parse_bool(fields[3])
                .ok_or_else(|| ScheduleError::row(line, "variable must be true or false"))?;
            let ref_payload_len: u64 = fields[4]
                .parse()
                .map_err(|_| ScheduleError::row(line, "ref_payload_len must be an integer"))?;
            let table_fee = WeiAmount::from_eth_str(fields[5])
                .map_err(|_| ScheduleError::row(line, "table_fee_eth must be a decimal ETH amount"))?;
            let view = parse_bool(fields[6])
                .ok_or_else(|| ScheduleError::row(line, "view must be true or false"))?;

            if fields[0] == "*" {
                if fields[1] != "GAS_PER_CHAR" {
                    return Err(ScheduleError::row(line, "contract `*` is only for GAS_PER_CHAR"));
                }
                if saw_gas_per_char {
                    return Err(ScheduleError::row(line, "GAS_PER_CHAR repeated"));
                }
                if base_gas == 0 {
                    return Err(ScheduleError::row(line, "gas per character must be > 0"));
                }
                schedule.gas_per_char = base_gas;
                saw_gas_per_char = true;
                continue;
            }

            let contract = ContractKind::parse(fields[0])
                .ok_or_else(|| ScheduleError::row(line, "unknown contract"))?;
            if fields[1] == "DEPLOY" {
                if schedule.deploy.contains_key(&contract) {
                    return Err(ScheduleError::row(line, "duplicate DEPLOY row"));
                }
                if variable || view {
                    return Err(ScheduleError::row(line, "DEPLOY rows must be fixed, non-view"));
                }
                schedule.deploy.insert(contract, DeployRow { gas: base_gas, table_fee });
                continue;
            }

            let function = fields[1].to_string();
            if function.is_empty() {
                return Err(ScheduleError::row(line, "function name is empty"));
            }
            if schedule.index.contains_key(&function) {
                return Err(ScheduleError::row(line, "duplicate function"));
            }
            if view && (base_gas != 0 || variable) {
                return Err(ScheduleError::row(line, "view functions must cost 0 and be fixed"));
            }
            if !variable && ref_payload_len != 0 {
                return Err(ScheduleError::row(line, "ref_payload_len only applies to variable rows"));
            }
            schedule.index.insert(function.clone(), schedule.rows.len());
            schedule.rows.push(ScheduleRow {
                contract,
                function,
                entry: ScheduleEntry { base_gas, variable, ref_payload_len, view },
                table_fee,
            });
        }
        Ok(schedule)
    }

    pub fn from_path(path: &Path) -> Result<Self, ScheduleError> {
        let text = fs::read_to_string(path).map_err(|source| ScheduleError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_str(&text)
    }

    /// Canonical file rendering: GAS_PER_CHAR first, then each contract's
    /// DEPLOY row immediately before its first function row.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(SCHEDULE_HEADER);
        out.push('\n');
        let _ = writeln!(out, "*,GAS_PER_CHAR,{},false,0,0,false", self.gas_per_char);
        let mut deploy_written: Vec<ContractKind> = Vec::new();
        for row in &self.rows {
            if !deploy_written.contains(&row.contract) {
                deploy_written.push(row.contract);
                if let Some(deploy) = self.deploy.get(&row.contract) {
                    let _ = writeln!(
                        out,
                        "{},DEPLOY,{},false,0,{},false",
                        row.contract,
                        deploy.gas,
                        deploy.table_fee.to_eth_string()
                    );
                }
            }
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.contract,
                row.function,
                row.entry.base_gas,
                row.entry.variable,
                row.entry.ref_payload_len,
                row.table_fee.to_eth_string(),
                row.entry.view
            );
        }
        out
    }

    pub fn gas_per_char(&self) -> u64 {
        self.gas_per_char
    }

    /// Function rows in canonical report order.
    pub fn rows(&self) -> &[ScheduleRow] {
        &self.rows
    }

    pub fn entry(&self, function: &str) -> Result<&ScheduleRow, GasModelError> {
        self.index
            .get(function)
            .map(|&i| &self.rows[i])
            .ok_or_else(|| GasModelError::UnknownFunction(function.to_string()))
    }

    /// Metered gas for one call: `base + payload_len × gas_per_char` for
    /// variable functions, `base` otherwise.
    pub fn gas_for(&self, function: &str, payload_len: u64) -> Result<u64, GasModelError> {
        let row = self.entry(function)?;
        if row.entry.variable {
            let variable_gas = payload_len
                .checked_mul(self.gas_per_char)
                .and_then(|v| v.checked_add(row.entry.base_gas))
                .expect("gas amount overflows u64");
            Ok(variable_gas)
        } else {
            Ok(row.entry.base_gas)
        }
    }

    pub fn deploy_gas(&self, kind: ContractKind) -> Result<u64, GasModelError> {
        self.deploy
            .get(&kind)
            .map(|d| d.gas)
            .ok_or(GasModelError::MissingDeployRow(kind))
    }

    pub fn quote(
        &self,
        function: &str,
        payload_len: u64,
        config: &ChainConfig,
    ) -> Result<FeeQuote, GasModelError> {
        Ok(FeeQuote::from_gas(self.gas_for(function, payload_len)?, config))
    }

    /// Build the cost table from observed calls. One row per schedule
    /// function in schedule order; a function's row reports its first
    /// observed call (repeat calls of a fixed-cost function meter
    /// identically). Unobserved functions report zero.
    pub fn cost_report(
        &self,
        observations: &[CallObservation],
        config: &ChainConfig,
        fee_source: FeeSource,
    ) -> Result<CostReport, GasModelError> {
        let mut first: BTreeMap<&str, &CallObservation> = BTreeMap::new();
        for obs in observations {
            // Validate every observation, not just the first per function.
            self.entry(&obs.function)?;
            first.entry(obs.function.as_str()).or_insert(obs);
        }
        let mut rows = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let observed = first.get(row.function.as_str());
            let gas = observed.map_or(0, |o| o.gas);
            let latency_s = observed.map_or(0, |o| o.latency_s);
            let fee_wei = match fee_source {
                FeeSource::GasColumn => config.fee_wei(gas),
                FeeSource::TableFeeColumn => {
                    if observed.is_some() {
                        row.table_fee
                    } else {
                        WeiAmount(0)
                    }
                }
            };
            rows.push(CostRow {
                contract: row.contract,
                function: row.function.clone(),
                gas,
                fee_wei,
                usd_micro: usd_micro(fee_wei, config.eth_usd_rate_micro),
                latency_s,
            });
        }
        Ok(CostReport {
            fee_source,
            gas_price: config.gas_price_wei,
            eth_usd_rate_micro: config.eth_usd_rate_micro,
            rows,
        })
    }
}

fn parse_bool(text: &str) -> Option<bool> {
    match text {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

/// Exact fee for one metered call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeeQuote {
    pub gas: u64,
    pub fee_wei: WeiAmount,
    pub usd_micro: u128,
}

impl FeeQuote {
    pub fn from_gas(gas: u64, config: &ChainConfig) -> FeeQuote {
        let fee_wei = config.fee_wei(gas);
        FeeQuote {
            gas,
            fee_wei,
            usd_micro: usd_micro(fee_wei, config.eth_usd_rate_micro),
        }
    }

    pub fn fee_eth_display(&self) -> String {
        self.fee_wei.to_eth_string()
    }

    pub fn usd_display(&self) -> String {
        usd_display_cents(self.usd_micro)
    }
}

/// micro-USD for a wei fee at `rate_micro` micro-USD per ETH, rounded
/// half-up at the discarded digit.
pub fn usd_micro(fee: WeiAmount, rate_micro: u128) -> u128 {
    let numerator = fee
        .0
        .checked_mul(rate_micro)
        .expect("fee × exchange rate overflows u128");
    (numerator + WEI_PER_ETH / 2) / WEI_PER_ETH
}

/// Two-decimal (cents) display, half-up: 1358506 micro → "1.36".
pub fn usd_display_cents(micro: u128) -> String {
    let cents = (micro + 5_000) / 10_000;
    format!("{}.{:02}", cents / 100, cents % 100)
}

/// Four-decimal display, half-up: 315592 micro → "0.3156".
pub fn usd_display_4dp(micro: u128) -> String {
    let tenth_millis = (micro + 50) / 100;
    format!("{}.{:04}", tenth_millis / 10_000, tenth_millis % 10_000)
}

/// Full-precision micro-USD display: 1358506 micro → "1.358506".
pub fn usd_display_full(micro: u128) -> String {
    let whole = micro / 1_000_000;
    let frac = micro % 1_000_000;
    if frac == 0 {
        return format!("{whole}");
    }
    let digits = format!("{frac:06}");
    format!("{whole}.{}", digits.trim_end_matches('0'))
}

/// Which column of the reference cost table a report trusts. The gas
/// column and the printed fee column disagree on two rows, so both modes
/// exist and every report states which one produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeeSource {
    GasColumn,
    TableFeeColumn,
}

impl FeeSource {
    pub fn describe(self) -> &'static str {
        match self {
            FeeSource::GasColumn => "gas column",
            FeeSource::TableFeeColumn => "table fee column",
        }
    }
}

/// One observed call feeding a cost report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallObservation {
    pub function: String,
    pub gas: u64,
    pub latency_s: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostRow {
    pub contract: ContractKind,
    pub function: String,
    pub gas: u64,
    pub fee_wei: WeiAmount,
    pub usd_micro: u128,
    pub latency_s: u64,
}

/// Column header shared by every tab-separated cost rendering.
pub const TSV_HEADER: &str = "contract\tfunction\tgas\tfee_eth\tusd\tlatency_s";

/// The cost table: one row per schedule function, plus per-contract
/// totals. Totals sum the exact wei fees and convert to USD once, so no
/// per-row rounding accumulates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostReport {
    pub fee_source: FeeSource,
    pub gas_price: WeiAmount,
    pub eth_usd_rate_micro: u128,
    pub rows: Vec<CostRow>,
}

/// Column sums for one contract's rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContractTotal {
    pub contract: ContractKind,
    pub gas: u64,
    pub fee_wei: WeiAmount,
    pub usd_micro: u128,
    pub latency_s: u64,
}

impl CostReport {
    /// Per-contract totals in row order of first appearance. USD is
    /// converted from the summed fee, rounded once.
    pub fn totals_by_contract(&self) -> Vec<ContractTotal> {
        let mut order: Vec<ContractKind> = Vec::new();
        let mut acc: BTreeMap<ContractKind, (u64, WeiAmount, u64)> = BTreeMap::new();
        for row in &self.rows {
            if !order.contains(&row.contract) {
                order.push(row.contract);
            }
            let slot = acc.entry(row.contract).or_insert((0, WeiAmount(0), 0));
            slot.0 = slot.0.checked_add(row.gas).expect("gas total overflows u64");
            slot.1 += row.fee_wei;
            slot.2 += row.latency_s;
        }
        order
            .into_iter()
            .map(|contract| {
                let (gas, fee_wei, latency_s) = acc[&contract];
                ContractTotal {
                    contract,
                    gas,
                    fee_wei,
                    usd_micro: usd_micro(fee_wei, self.eth_usd_rate_micro),
                    latency_s,
                }
            })
            .collect()
    }

    /// Tab-separated rendering: header, one line per function row, then
    /// one TOTAL line per contract.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(TSV_HEADER);
        out.push('\n');
        self.write_tsv_rows(&mut out);
        out
    }

    /// Body lines of [`CostReport::to_tsv`], without the header, so other
    /// reports can prepend their own rows under the same columns.
    pub(crate) fn write_tsv_rows(&self, out: &mut String) {
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                row.contract,
                row.function,
                row.gas,
                row.fee_wei.to_eth_string(),
                usd_display_cents(row.usd_micro),
                row.latency_s
            );
        }
        for total in self.totals_by_contract() {
            let _ = writeln!(
                out,
                "{}\tTOTAL\t{}\t{}\t{}\t{}",
                total.contract,
                total.gas,
                total.fee_wei.to_eth_string(),
                usd_display_4dp(total.usd_micro),
                total.latency_s
            );
        }
    }

    /// Aligned text table shaped like the reference cost table, with a
    /// latency column and per-contract totals appended.
    pub fn to_text(&self) -> String {
        let gas_price_eth = self.gas_price.to_eth_string();
        let mut table: Vec<[String; 7]> = vec![[
            "contract".into(),
            "function".into(),
            "gas".into(),
            "gas price (ETH)".into(),
            "fee (ETH)".into(),
            "USD".into(),
            "latency (s)".into(),
        ]];
        for row in &self.rows {
            table.push([
                row.contract.to_string(),
                row.function.clone(),
                row.gas.to_string(),
                gas_price_eth.clone(),
                row.fee_wei.to_eth_string(),
                usd_display_cents(row.usd_micro),
                row.latency_s.to_string(),
            ]);
        }
        for total in self.totals_by_contract() {
            table.push([
                total.contract.to_string(),
                "TOTAL".into(),
                total.gas.to_string(),
                String::new(),
                total.fee_wei.to_eth_string(),
                usd_display_4dp(total.usd_micro),
                total.latency_s.to_string(),
            ]);
        }
        let mut widths = [0usize; 7];
        for row in &table {
            for (w, cell) in widths.iter_mut().zip(row.iter()) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = format!("fee source: {}\n", self.fee_source.describe());
        for row in &table {
            let mut line = String::new();
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                // Right-align numeric columns, left-align names.
                if i < 2 {
                    let _ = write!(line, "{:<width$}", cell, width = widths[i]);
                } else {
                    let _ = write!(line, "{:>width$}", cell, width = widths[i]);
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("failed to read schedule file {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schedule header must be `{SCHEDULE_HEADER}`, found `{found}`")]
    BadHeader { found: String },
    #[error("schedule line {line}: {message}")]
    Row { line: usize, message: String },
}

impl ScheduleError {
    fn row(line: usize, message: &str) -> ScheduleError {
        ScheduleError::Row { line, message: message.to_string() }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GasModelError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("schedule has no deployment row for {0}")]
    MissingDeployRow(ContractKind),
}
