//! Line-oriented scenario scripts: parse, execute, report.
//!
//! A script declares actors, deploys contracts, and drives calls
//! through the ledger under the sequential-dependency model: every
//! transactional step waits for its block before the next step runs, so
//! one step's confirmation latency is one workflow cycle. Views execute
//! between blocks at zero cost.

mod exec;
mod parser;

use std::fmt::Write as _;

use crate::address::Address;
use crate::contracts::{ContractError, ContractKind, ViewResult};
use crate::docstore::ContentHash;
use crate::gasmodel::{usd_display_cents, usd_display_full, CostReport, TSV_HEADER};
use crate::ledger::Receipt;
use crate::units::WeiAmount;

pub use exec::{execute, execute_on, ExecError};
pub use parser::{parse, ParseError};

const CANONICAL_LC: &str = include_str!("../../data/scenarios/canonical_lc.scenario");

/// A parsed scenario: actor declarations plus ordered steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioScript {
    pub actors: Vec<(String, Address)>,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    /// 1-based source line.
    pub line: usize,
    pub kind: StepKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepKind {
    Deploy {
        contract: ContractKind,
        binding: String,
    },
    Call {
        actor: String,
        contract: String,
        function: String,
        args: Vec<Value>,
        expect_revert: Option<String>,
    },
    /// Put a file's bytes into the document store, binding `$var`.
    AttachFile {
        actor: String,
        path: String,
        binding: String,
    },
    /// Put an inline string into the document store, binding `$var`.
    AttachContent {
        actor: String,
        content: String,
        binding: String,
    },
    /// Move the simulated clock forward.
    Advance {
        seconds: u64,
    },
}

/// A surface-syntax argument; names are resolved at execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Str(String),
    Int(u128),
    /// `$name` — an attached document's hash.
    Var(String),
    /// Bare identifier — a declared actor's address.
    Ident(String),
}

impl ScenarioScript {
    /// Canonical text form; parsing it back yields an equal script.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, address) in &self.actors {
            let _ = writeln!(out, "actor {name} {address}");
        }
        for step in &self.steps {
            out.push_str(&render_step(&step.kind));
            out.push('\n');
        }
        out
    }
}

fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

fn render_value(value: &Value) -> String {
    match value {
        Value::Str(s) => quote(s),
        Value::Int(n) => n.to_string(),
        Value::Var(name) => format!("${name}"),
        Value::Ident(name) => name.clone(),
    }
}

/// One step in canonical surface syntax.
pub fn render_step(kind: &StepKind) -> String {
    match kind {
        StepKind::Deploy { contract, binding } => format!("deploy {contract} as {binding}"),
        StepKind::Call { actor, contract, function, args, expect_revert } => {
            let args: Vec<String> = args.iter().map(render_value).collect();
            let mut line = format!("{actor} > {contract}.{function}({})", args.join(", "));
            if let Some(name) = expect_revert {
                let _ = write!(line, " expect-revert {name}");
            }
            line
        }
        StepKind::AttachFile { actor, path, binding } => {
            let path = if path.contains(char::is_whitespace) || path.contains('"') {
                quote(path)
            } else {
                path.clone()
            };
            format!("attach {actor} {path} as {binding}")
        }
        StepKind::AttachContent { actor, content, binding } => {
            format!("attach-content {actor} {} as {binding}", quote(content))
        }
        StepKind::Advance { seconds } => format!("advance {seconds}"),
    }
}

/// The shipped reference script: the full letter-of-credit workflow,
/// 16 transactions plus 3 deployments, touching every mutating function
/// once and every view between blocks.
pub fn canonical_lc_scenario() -> ScenarioScript {
    parse(CANONICAL_LC).expect("embedded canonical scenario parses")
}

/// Raw text of the shipped reference script.
pub fn canonical_lc_scenario_text() -> &'static str {
    CANONICAL_LC
}

/// What one executed step did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Deployed { binding: String, receipt: Receipt },
    Mined { receipt: Receipt },
    ViewReturned { result: Result<ViewResult, ContractError> },
    Attached { binding: String, hash: ContentHash, bytes: usize },
    Advanced { to_s: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepReport {
    pub line: usize,
    pub rendered: String,
    pub outcome: StepOutcome,
    pub expect_revert: Option<String>,
    /// True when the outcome contradicted the step's annotation: an
    /// unannotated revert, a missing expected revert, or the wrong one.
    pub unexpected: bool,
}

impl StepReport {
    fn status_text(&self) -> String {
        let expectation = |err: ContractError| {
            if self.unexpected {
                match &self.expect_revert {
                    Some(want) => format!("reverted {} (UNEXPECTED: wanted {want})", err.name()),
                    None => format!("reverted {} (UNEXPECTED)", err.name()),
                }
            } else {
                format!("reverted {} as expected", err.name())
            }
        };
        match &self.outcome {
            StepOutcome::Deployed { receipt, .. } => {
                format!("confirmed in block {} ({} s)", receipt.block_index, receipt.latency_s())
            }
            StepOutcome::Mined { receipt } => match &receipt.status {
                crate::ledger::TxStatus::Confirmed => {
                    if self.unexpected {
                        format!(
                            "confirmed in block {} (UNEXPECTED: wanted revert {})",
                            receipt.block_index,
                            self.expect_revert.as_deref().unwrap_or("?")
                        )
                    } else {
                        format!(
                            "confirmed in block {} ({} s)",
                            receipt.block_index,
                            receipt.latency_s()
                        )
                    }
                }
                crate::ledger::TxStatus::Reverted(err) => expectation(*err),
            },
            StepOutcome::ViewReturned { result } => match result {
                Ok(value) => {
                    if self.unexpected {
                        format!(
                            "view returned {value} (UNEXPECTED: wanted revert {})",
                            self.expect_revert.as_deref().unwrap_or("?")
                        )
                    } else {
                        format!("view returned {value}")
                    }
                }
                Err(err) => expectation(*err),
            },
            StepOutcome::Attached { hash, bytes, .. } => {
                format!("attached {bytes} bytes as {hash}")
            }
            StepOutcome::Advanced { to_s } => format!("clock advanced to {to_s} s"),
        }
    }
}

/// Executed scenario: per-step outcomes, the cost table, and the
/// latency/settlement summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioReport {
    pub steps: Vec<StepReport>,
    pub deployments: Vec<Receipt>,
    pub cost: CostReport,
    /// Submit-to-confirm seconds, one entry per transactional step.
    pub cycle_latencies_s: Vec<u64>,
    pub total_duration_s: u64,
    pub blocks_produced: u64,
    pub settlement_ready: bool,
    pub total_fees: WeiAmount,
    pub view_count: usize,
    /// Steps whose outcome contradicted their annotation.
    pub unexpected_count: usize,
}

impl ScenarioReport {
    pub fn deploy_total_fee(&self) -> WeiAmount {
        self.deployments.iter().map(|r| r.fee).sum()
    }

    /// Tab-separated: header, deployment rows, function rows, totals.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(TSV_HEADER);
        out.push('\n');
        for receipt in &self.deployments {
            let micro =
                crate::gasmodel::usd_micro(receipt.fee, self.cost.eth_usd_rate_micro);
            let _ = writeln!(
                out,
                "{}\tDEPLOY\t{}\t{}\t{}\t{}",
                receipt.contract_kind,
                receipt.gas_used,
                receipt.fee.to_eth_string(),
                usd_display_cents(micro),
                receipt.latency_s()
            );
        }
        self.cost.write_tsv_rows(&mut out);
        out
    }

    /// Human-readable report: deployments, cost table, step log, summary.
    pub fn to_text(&self) -> String {
        let mut out = String::from("deployments\n");
        for receipt in &self.deployments {
            let micro =
                crate::gasmodel::usd_micro(receipt.fee, self.cost.eth_usd_rate_micro);
            let _ = writeln!(
                out,
                "  {:<16} gas {:>8}  fee {} ETH  {} USD  latency {} s",
                receipt.contract_kind.to_string(),
                receipt.gas_used,
                receipt.fee.to_eth_string(),
                usd_display_cents(micro),
                receipt.latency_s()
            );
        }
        let deploy_fee = self.deploy_total_fee();
        let deploy_micro = crate::gasmodel::usd_micro(deploy_fee, self.cost.eth_usd_rate_micro);
        let _ = writeln!(
            out,
            "  total: {} ETH = {} USD ({})",
            deploy_fee.to_eth_string(),
            usd_display_full(deploy_micro),
            usd_display_cents(deploy_micro)
        );
        out.push('\n');
        out.push_str(&self.cost.to_text());
        out.push('\n');
        out.push_str("steps\n");
        for step in &self.steps {
            let _ = writeln!(out, "  line {:>3}  {} -- {}", step.line, step.rendered, step.status_text());
        }
        out.push('\n');
        out.push_str("summary\n");
        let reverted = self
            .steps
            .iter()
            .filter(|s| {
                matches!(
                    &s.outcome,
                    StepOutcome::Mined { receipt } if !receipt.status.is_confirmed()
                )
            })
            .count();
        let _ = writeln!(
            out,
            "  transactions: {} ({} calls + {} deployments), {} reverted, {} unexpected outcomes",
            self.cycle_latencies_s.len() + self.deployments.len(),
            self.cycle_latencies_s.len(),
            self.deployments.len(),
            reverted,
            self.unexpected_count
        );
        let _ = writeln!(out, "  views: {}", self.view_count);
        let _ = writeln!(out, "  settlement ready: {}", self.settlement_ready);
        if let (Some(min), Some(max)) =
            (self.cycle_latencies_s.iter().min(), self.cycle_latencies_s.iter().max())
        {
            let _ = writeln!(
                out,
                "  cycle latency: {} cycles, min {} s, max {} s",
                self.cycle_latencies_s.len(),
                min,
                max
            );
        }
        let _ = writeln!(
            out,
            "  simulated duration: {} s ({} blocks)",
            self.total_duration_s, self.blocks_produced
        );
        let total_micro = crate::gasmodel::usd_micro(self.total_fees, self.cost.eth_usd_rate_micro);
        let _ = writeln!(
            out,
            "  total fees: {} ETH = {} USD ({})",
            self.total_fees.to_eth_string(),
            usd_display_full(total_micro),
            usd_display_cents(total_micro)
        );
        out
    }
}
