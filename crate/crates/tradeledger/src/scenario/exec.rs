//! Script execution: each transactional step is submitted and mined
//! before the next step runs, so the chain advances one block per step
//! and each step's latency is one full workflow cycle.

use std::collections::BTreeMap;

use crate::address::Address;
use crate::config::ChainConfig;
use crate::contracts::{ContractCall, ContractError, ContractEvent, ViewCall};
use crate::docstore::{ContentHash, DocStore, DocStoreError};
use crate::gasmodel::{CallObservation, FeeSource, GasModelError, GasSchedule};
use crate::ledger::{ContractId, Ledger, Receipt, SubmitError, TxPayload, TxStatus, ViewError};

use super::{
    render_step, ScenarioReport, ScenarioScript, StepKind, StepOutcome, StepReport, Value,
};

#[derive(Debug, thiserror::Error)]
pub enum ExecError {
    #[error("script declares no actors; deployments need a sender")]
    NoActors,
    #[error("line {line}: no {what} named `{name}`")]
    Unbound { line: usize, what: &'static str, name: String },
    #[error("line {line}: {message}")]
    BadArgument { line: usize, message: String },
    #[error("line {line}: cannot read `{path}`")]
    AttachIo {
        line: usize,
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {source}")]
    Submit {
        line: usize,
        #[source]
        source: SubmitError,
    },
    #[error("line {line}: {source}")]
    View {
        line: usize,
        #[source]
        source: ViewError,
    },
    #[error(transparent)]
    Cost(#[from] GasModelError),
    #[error(transparent)]
    Store(#[from] DocStoreError),
}

/// Run a script on a fresh ledger and in-memory document store.
pub fn execute(
    script: &ScenarioScript,
    config: &ChainConfig,
    schedule: &GasSchedule,
    fee_source: FeeSource,
) -> Result<ScenarioReport, ExecError> {
    let mut ledger = Ledger::new(config.clone(), schedule.clone());
    let mut store = DocStore::in_memory();
    let (report, _) = execute_on(script, &mut ledger, &mut store, fee_source)?;
    Ok(report)
}

/// Run a script on caller-owned state; returns the report plus the
/// contract ids each `deploy … as <binding>` bound, for inspection.
pub fn execute_on(
    script: &ScenarioScript,
    ledger: &mut Ledger,
    store: &mut DocStore,
    fee_source: FeeSource,
) -> Result<(ScenarioReport, BTreeMap<String, ContractId>), ExecError> {
    let actors: BTreeMap<&str, Address> =
        script.actors.iter().map(|(name, address)| (name.as_str(), *address)).collect();
    let deploy_sender = script.actors.first().map(|(_, address)| *address);
    let mut contracts: BTreeMap<String, ContractId> = BTreeMap::new();
    let mut vars: BTreeMap<String, ContentHash> = BTreeMap::new();

    let mut steps: Vec<StepReport> = Vec::new();
    let mut deployments: Vec<Receipt> = Vec::new();
    let mut observations: Vec<CallObservation> = Vec::new();
    let mut cycle_latencies_s: Vec<u64> = Vec::new();
    let mut view_count = 0usize;
    let mut unexpected_count = 0usize;

    for step in &script.steps {
        let line = step.line;
        let rendered = render_step(&step.kind);
        match &step.kind {
            StepKind::Deploy { contract, binding } => {
                let sender = deploy_sender.ok_or(ExecError::NoActors)?;
                let (id, receipt) = ledger
                    .deploy_contract(*contract, sender, ledger.now_s())
                    .map_err(|source| ExecError::Submit { line, source })?;
                contracts.insert(binding.clone(), id);
                deployments.push(receipt.clone());
                steps.push(StepReport {
                    line,
                    rendered,
                    outcome: StepOutcome::Deployed { binding: binding.clone(), receipt },
                    expect_revert: None,
                    unexpected: false,
                });
            }
            StepKind::Call { actor, contract, function, args, expect_revert } => {
                let sender = *actors
                    .get(actor.as_str())
                    .ok_or_else(|| unbound(line, "actor", actor))?;
                let id = *contracts
                    .get(contract)
                    .ok_or_else(|| unbound(line, "contract", contract))?;
                let ctx = ArgCx { line, actors: &actors, vars: &vars };
                let report = if let Some(view) = build_view(function, args, &ctx)? {
                    let result = match ledger.view(id, &view) {
                        Ok(value) => Ok(value),
                        Err(ViewError::Contract(e)) => Err(e),
                        Err(source) => return Err(ExecError::View { line, source }),
                    };
                    view_count += 1;
                    observations.push(CallObservation {
                        function: function.clone(),
                        gas: 0,
                        latency_s: 0,
                    });
                    let unexpected =
                        outcome_unexpected(result.as_ref().err().copied(), expect_revert);
                    StepReport {
                        line,
                        rendered,
                        outcome: StepOutcome::ViewReturned { result },
                        expect_revert: expect_revert.clone(),
                        unexpected,
                    }
                } else {
                    let call = build_call(function, args, &ctx)?;
                    let tx_id = ledger
                        .submit(sender, TxPayload::Call { contract: id, call })
                        .map_err(|source| ExecError::Submit { line, source })?;
                    let receipt = ledger
                        .advance_block()
                        .into_iter()
                        .find(|r| r.tx_id == tx_id)
                        .expect("a lone pending transaction mines in the next block");
                    observations.push(CallObservation {
                        function: receipt.function.to_string(),
                        gas: receipt.gas_used,
                        latency_s: receipt.latency_s(),
                    });
                    cycle_latencies_s.push(receipt.latency_s());
                    let reverted = match &receipt.status {
                        TxStatus::Confirmed => None,
                        TxStatus::Reverted(e) => Some(*e),
                    };
                    let unexpected = outcome_unexpected(reverted, expect_revert);
                    StepReport {
                        line,
                        rendered,
                        outcome: StepOutcome::Mined { receipt },
                        expect_revert: expect_revert.clone(),
                        unexpected,
                    }
                };
                if report.unexpected {
                    unexpected_count += 1;
                }
                steps.push(report);
            }
            StepKind::AttachFile { actor, path, binding } => {
                if !actors.contains_key(actor.as_str()) {
                    return Err(unbound(line, "actor", actor));
                }
                let bytes = std::fs::read(path).map_err(|source| ExecError::AttachIo {
                    line,
                    path: path.clone(),
                    source,
                })?;
                let hash = store.put(&bytes)?;
                vars.insert(binding.clone(), hash);
                steps.push(StepReport {
                    line,
                    rendered,
                    outcome: StepOutcome::Attached {
                        binding: binding.clone(),
                        hash,
                        bytes: bytes.len(),
                    },
                    expect_revert: None,
                    unexpected: false,
                });
            }
            StepKind::AttachContent { actor, content, binding } => {
                if !actors.contains_key(actor.as_str()) {
                    return Err(unbound(line, "actor", actor));
                }
                let bytes = content.as_bytes();
                let hash = store.put(bytes)?;
                vars.insert(binding.clone(), hash);
                steps.push(StepReport {
                    line,
                    rendered,
                    outcome: StepOutcome::Attached {
                        binding: binding.clone(),
                        hash,
                        bytes: bytes.len(),
                    },
                    expect_revert: None,
                    unexpected: false,
                });
            }
            StepKind::Advance { seconds } => {
                let to_s = ledger
                    .now_s()
                    .checked_add(*seconds)
                    .expect("simulated clock overflows u64");
                ledger.advance_to(to_s);
                steps.push(StepReport {
                    line,
                    rendered,
                    outcome: StepOutcome::Advanced { to_s },
                    expect_revert: None,
                    unexpected: false,
                });
            }
        }
    }

    let cost = ledger.schedule().cost_report(&observations, ledger.config(), fee_source)?;
    let settlement_ready =
        ledger.events().iter().any(|e| e.event == ContractEvent::SettlementReady);
    let report = ScenarioReport {
        steps,
        deployments,
        cost,
        cycle_latencies_s,
        total_duration_s: ledger.now_s(),
        blocks_produced: ledger.blocks().len() as u64,
        settlement_ready,
        total_fees: ledger.total_fees(),
        view_count,
        unexpected_count,
    };
    Ok((report, contracts))
}

fn unbound(line: usize, what: &'static str, name: &str) -> ExecError {
    ExecError::Unbound { line, what, name: name.to_string() }
}

/// A step's outcome is unexpected when it contradicts the annotation:
/// an unannotated revert, a missing expected revert, or the wrong one.
fn outcome_unexpected(reverted: Option<ContractError>, expect: &Option<String>) -> bool {
    match (reverted, expect) {
        (None, None) => false,
        (Some(err), Some(name)) => err.name() != name,
        _ => true,
    }
}

/// Argument-resolution context for one call step.
struct ArgCx<'a> {
    line: usize,
    actors: &'a BTreeMap<&'a str, Address>,
    vars: &'a BTreeMap<String, ContentHash>,
}

impl ArgCx<'_> {
    fn bad(&self, message: impl Into<String>) -> ExecError {
        ExecError::BadArgument { line: self.line, message: message.into() }
    }

    fn string(&self, args: &[Value], i: usize, function: &str) -> Result<String, ExecError> {
        match args.get(i) {
            Some(Value::Str(s)) => Ok(s.clone()),
            other => Err(self.bad(format!(
                "argument {} of `{function}` must be a string, got {other:?}",
                i + 1
            ))),
        }
    }

    fn int(&self, args: &[Value], i: usize, function: &str) -> Result<u128, ExecError> {
        match args.get(i) {
            Some(Value::Int(n)) => Ok(*n),
            other => Err(self.bad(format!(
                "argument {} of `{function}` must be an integer, got {other:?}",
                i + 1
            ))),
        }
    }

    fn index(&self, args: &[Value], i: usize, function: &str) -> Result<u64, ExecError> {
        let n = self.int(args, i, function)?;
        u64::try_from(n)
            .map_err(|_| self.bad(format!("argument {} of `{function}` out of range", i + 1)))
    }

    fn address(&self, args: &[Value], i: usize, function: &str) -> Result<Address, ExecError> {
        match args.get(i) {
            Some(Value::Ident(name)) => self
                .actors
                .get(name.as_str())
                .copied()
                .ok_or_else(|| unbound(self.line, "actor", name)),
            Some(Value::Str(literal)) => literal
                .parse()
                .map_err(|e| self.bad(format!("argument {} of `{function}`: {e}", i + 1))),
            other => Err(self.bad(format!(
                "argument {} of `{function}` must be an address, got {other:?}",
                i + 1
            ))),
        }
    }

    fn hash(&self, args: &[Value], i: usize, function: &str) -> Result<ContentHash, ExecError> {
        match args.get(i) {
            Some(Value::Var(name)) => self
                .vars
                .get(name)
                .copied()
                .ok_or_else(|| unbound(self.line, "document variable", name)),
            Some(Value::Str(literal)) => literal
                .parse()
                .map_err(|e| self.bad(format!("argument {} of `{function}`: {e}", i + 1))),
            other => Err(self.bad(format!(
                "argument {} of `{function}` must be a content hash, got {other:?}",
                i + 1
            ))),
        }
    }
}

fn build_view(
    function: &str,
    args: &[Value],
    ctx: &ArgCx<'_>,
) -> Result<Option<ViewCall>, ExecError> {
    let view = match function {
        "orderExists" => ViewCall::OrderExists { order_id: ctx.string(args, 0, function)? },
        "getNumberOfDocuments" => ViewCall::GetNumberOfDocuments,
        "getDocumentID" => ViewCall::GetDocumentId { index: ctx.index(args, 0, function)? },
        "IsDocumentValid" => ViewCall::IsDocumentValid { doc_id: ctx.index(args, 0, function)? },
        _ => return Ok(None),
    };
    Ok(Some(view))
}

fn build_call(function: &str, args: &[Value], ctx: &ArgCx<'_>) -> Result<ContractCall, ExecError> {
    let call = match function {
        "setSalesContract" => ContractCall::SetSalesContract {
            buyer: ctx.address(args, 0, function)?,
            seller: ctx.address(args, 1, function)?,
        },
        "addOrder" => ContractCall::AddOrder {
            order_id: ctx.string(args, 0, function)?,
            description: ctx.string(args, 1, function)?,
        },
        "confirmOrder" => ContractCall::ConfirmOrder { order_id: ctx.string(args, 0, function)? },
        "cancelOrder" => ContractCall::CancelOrder { order_id: ctx.string(args, 0, function)? },
        "receiveOrder" => ContractCall::ReceiveOrder { order_id: ctx.string(args, 0, function)? },
        "createInvoice" => ContractCall::CreateInvoice {
            invoice_id: ctx.string(args, 0, function)?,
            order_id: ctx.string(args, 1, function)?,
            amount: ctx.int(args, 2, function)?,
        },
        "confirmInvoice" => {
            ContractCall::ConfirmInvoice { invoice_id: ctx.string(args, 0, function)? }
        }
        "setFinancialAgreementParties" => ContractCall::SetFinancialAgreementParties {
            applicant: ctx.address(args, 0, function)?,
            financier: ctx.address(args, 1, function)?,
            beneficiary: ctx.address(args, 2, function)?,
        },
        "confirmAgreement" => ContractCall::ConfirmAgreement,
        "initializeContract" => {
            let mut required_doc_types = Vec::with_capacity(args.len().saturating_sub(4));
            for i in 4..args.len() {
                required_doc_types.push(ctx.string(args, i, function)?);
            }
            ContractCall::InitializeContract {
                applicant: ctx.address(args, 0, function)?,
                beneficiary: ctx.address(args, 1, function)?,
                issuing_bank: ctx.address(args, 2, function)?,
                amount: ctx.int(args, 3, function)?,
                required_doc_types,
            }
        }
        "addDocument" => ContractCall::AddDocument {
            content_hash: ctx.hash(args, 0, function)?,
            doc_type: ctx.string(args, 1, function)?,
        },
        "validateDocument" => {
            ContractCall::ValidateDocument { doc_id: ctx.index(args, 0, function)? }
        }
        other => return Err(ctx.bad(format!("unknown function `{other}`"))),
    };
    Ok(call)
}
