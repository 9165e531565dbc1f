//! Command-line driver for the ledger simulator: deployment quotes,
//! scenario execution, the canonical cost report, and content digests.

use std::env;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tradeledger::config::ChainConfig;
use tradeledger::contracts::ContractKind;
use tradeledger::docstore::ContentHash;
use tradeledger::gasmodel::{
    usd_display_cents, usd_display_full, usd_micro, FeeSource, GasSchedule,
};
use tradeledger::ledger::{Ledger, Receipt};
use tradeledger::scenario;
use tradeledger::{Address, WeiAmount};

/// Configuration file used when `--config` is absent.
const CONFIG_ENV: &str = "TRADELEDGER_CONFIG";

#[derive(Parser)]
#[command(
    name = "tradeledger",
    version,
    about = "Deterministic gas-metered ledger simulator for trade-finance contracts"
)]
struct Cli {
    /// Chain parameter file (falls back to $TRADELEDGER_CONFIG, then defaults)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Gas schedule CSV (defaults to the built-in reference schedule)
    #[arg(long, global = true, value_name = "PATH")]
    schedule: Option<PathBuf>,

    /// Fee column cost rows report: metered gas or the nominal table fee
    #[arg(long, global = true, value_enum, default_value = "gas")]
    fee_source: FeeSourceArg,

    /// Output rendering
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: FormatArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deploy all three contracts and print what that costs
    Deploy,
    /// Execute a scenario file and print its report
    Run { file: PathBuf },
    /// Print the cost table for the built-in canonical scenario
    Report,
    /// Print the digest a file would be stored under
    Hash { file: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FeeSourceArg {
    Gas,
    Table,
}

impl From<FeeSourceArg> for FeeSource {
    fn from(arg: FeeSourceArg) -> FeeSource {
        match arg {
            FeeSourceArg::Gas => FeeSource::GasColumn,
            FeeSourceArg::Table => FeeSource::TableFeeColumn,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Tsv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let config = load_config(cli.config.as_deref())?;
    let schedule = load_schedule(cli.schedule.as_deref())?;
    let fee_source = cli.fee_source.into();
    match cli.command {
        Command::Deploy => {
            cmd_deploy(&config, &schedule, cli.format)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { file } => cmd_run(&file, &config, &schedule, fee_source, cli.format),
        Command::Report => {
            cmd_report(&config, &schedule, fee_source, cli.format)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Hash { file } => {
            cmd_hash(&file)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_config(flag: Option<&Path>) -> Result<ChainConfig, String> {
    let path = match flag {
        Some(path) => Some(path.to_path_buf()),
        None => env::var_os(CONFIG_ENV).map(PathBuf::from),
    };
    match path {
        Some(path) => ChainConfig::from_path(&path)
            .map_err(|e| format!("cannot load config `{}`: {e}", path.display())),
        None => Ok(ChainConfig::default()),
    }
}

fn load_schedule(flag: Option<&Path>) -> Result<GasSchedule, String> {
    match flag {
        Some(path) => GasSchedule::from_path(path)
            .map_err(|e| format!("cannot load schedule `{}`: {e}", path.display())),
        None => Ok(GasSchedule::default()),
    }
}

fn cmd_deploy(
    config: &ChainConfig,
    schedule: &GasSchedule,
    format: FormatArg,
) -> Result<(), String> {
    let mut ledger = Ledger::new(config.clone(), schedule.clone());
    let operator = Address::from_tag(1);
    let mut receipts: Vec<Receipt> = Vec::new();
    for kind in ContractKind::ALL {
        let (_, receipt) = ledger
            .deploy_contract(kind, operator, ledger.now_s())
            .map_err(|e| format!("deploying {kind}: {e}"))?;
        receipts.push(receipt);
    }
    let total_gas: u64 = receipts.iter().map(|r| r.gas_used).sum();
    let total_fee: WeiAmount = receipts.iter().map(|r| r.fee).sum();
    let total_micro = usd_micro(total_fee, config.eth_usd_rate_micro);
    let row_micro = |r: &Receipt| usd_micro(r.fee, config.eth_usd_rate_micro);

    match format {
        FormatArg::Tsv => {
            println!("contract\tgas\tfee_eth\tusd");
            for receipt in &receipts {
                println!(
                    "{}\t{}\t{}\t{}",
                    receipt.contract_kind,
                    receipt.gas_used,
                    receipt.fee.to_eth_string(),
                    usd_display_cents(row_micro(receipt)),
                );
            }
            println!(
                "TOTAL\t{total_gas}\t{}\t{}",
                total_fee.to_eth_string(),
                usd_display_full(total_micro),
            );
        }
        FormatArg::Text => {
            println!(
                "gas price {} ETH/gas, exchange rate {} USD/ETH",
                config.gas_price_wei.to_eth_string(),
                usd_display_full(config.eth_usd_rate_micro),
            );
            println!();
            let mut table: Vec<[String; 4]> =
                vec![["contract".into(), "gas".into(), "fee (ETH)".into(), "USD".into()]];
            for receipt in &receipts {
                table.push([
                    receipt.contract_kind.to_string(),
                    receipt.gas_used.to_string(),
                    receipt.fee.to_eth_string(),
                    usd_display_cents(row_micro(receipt)),
                ]);
            }
            table.push([
                "TOTAL".into(),
                total_gas.to_string(),
                total_fee.to_eth_string(),
                usd_display_cents(total_micro),
            ]);
            print!("{}", align(&table));
            println!();
            println!(
                "exact total: {} ETH = {} USD",
                total_fee.to_eth_string(),
                usd_display_full(total_micro),
            );
        }
    }
    Ok(())
}

/// Column-align a table: first column left, the rest right.
fn align(table: &[[String; 4]]) -> String {
    let mut widths = [0usize; 4];
    for row in table {
        for (width, cell) in widths.iter_mut().zip(row.iter()) {
            *width = (*width).max(cell.len());
        }
    }
    let mut out = String::new();
    for row in table {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            if i == 0 {
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

fn cmd_run(
    file: &Path,
    config: &ChainConfig,
    schedule: &GasSchedule,
    fee_source: FeeSource,
    format: FormatArg,
) -> Result<ExitCode, String> {
    let text = fs::read_to_string(file)
        .map_err(|e| format!("cannot read `{}`: {e}", file.display()))?;
    let script = scenario::parse(&text).map_err(|e| e.to_string())?;
    let report = scenario::execute(&script, config, schedule, fee_source)
        .map_err(|e| e.to_string())?;
    match format {
        FormatArg::Text => print!("{}", report.to_text()),
        FormatArg::Tsv => print!("{}", report.to_tsv()),
    }
    if report.unexpected_count > 0 {
        eprintln!(
            "error: {} step(s) did not behave as scripted",
            report.unexpected_count
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(
    config: &ChainConfig,
    schedule: &GasSchedule,
    fee_source: FeeSource,
    format: FormatArg,
) -> Result<(), String> {
    let script = scenario::canonical_lc_scenario();
    let report = scenario::execute(&script, config, schedule, fee_source)
        .map_err(|e| e.to_string())?;
    match format {
        FormatArg::Text => print!("{}", report.cost.to_text()),
        FormatArg::Tsv => print!("{}", report.cost.to_tsv()),
    }
    Ok(())
}

fn cmd_hash(file: &Path) -> Result<(), String> {
    let bytes =
        fs::read(file).map_err(|e| format!("cannot read `{}`: {e}", file.display()))?;
    println!("{}", ContentHash::of(&bytes));
    Ok(())
}
