//! Deterministic single-chain simulator.
//!
//! Transactions queue FIFO and are drained into blocks at every
//! boundary `index × block_interval_s` (index ≥ 1), at most
//! `tps × block_interval_s` per block. Execution meters gas from the
//! schedule; reverted calls consume their full scheduled gas. There are
//! no balances: fees are accounted, never funded.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::address::Address;
use crate::config::ChainConfig;
use crate::contracts::{
    ContractCall, ContractError, ContractEvent, ContractInstance, ContractKind, ViewCall,
    ViewResult,
};
use crate::gasmodel::GasSchedule;
use crate::units::WeiAmount;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TxId(pub u64);

impl fmt::Display for TxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tx{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContractId(pub u32);

impl fmt::Display for ContractId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "contract{}", self.0)
    }
}

/// What a transaction does: create a contract or call one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TxPayload {
    Deploy(ContractKind),
    Call { contract: ContractId, call: ContractCall },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub tx_id: TxId,
    pub sender: Address,
    pub payload: TxPayload,
    pub submit_time_s: u64,
}

impl Transaction {
    pub fn function_name(&self) -> &'static str {
        match &self.payload {
            TxPayload::Deploy(_) => "DEPLOY",
            TxPayload::Call { call, .. } => call.function_name(),
        }
    }

    pub fn payload_len(&self) -> u64 {
        match &self.payload {
            TxPayload::Deploy(_) => 0,
            TxPayload::Call { call, .. } => call.payload_len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TxStatus {
    Confirmed,
    Reverted(ContractError),
}

impl TxStatus {
    pub fn is_confirmed(&self) -> bool {
        matches!(self, TxStatus::Confirmed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Receipt {
    pub tx_id: TxId,
    pub contract_id: ContractId,
    pub contract_kind: ContractKind,
    pub function: &'static str,
    pub status: TxStatus,
    pub gas_used: u64,
    pub fee: WeiAmount,
    pub block_index: u64,
    pub submit_time_s: u64,
    pub confirm_time_s: u64,
    /// Return value, when the function has one (document index).
    pub returned: Option<u64>,
}

impl Receipt {
    /// Submit-to-confirmation interval — one workflow "cycle".
    pub fn latency_s(&self) -> u64 {
        self.confirm_time_s - self.submit_time_s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub index: u64,
    pub timestamp_s: u64,
    pub tx_ids: Vec<TxId>,
}

/// A contract event with its chain position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEvent {
    pub block_index: u64,
    pub time_s: u64,
    pub contract_id: ContractId,
    pub event: ContractEvent,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubmitError {
    #[error("no contract registered as {0}")]
    UnknownContract(ContractId),
    #[error("{contract} is a {actual} contract; {function} belongs to {expected}")]
    WrongContractKind {
        contract: ContractId,
        actual: ContractKind,
        expected: ContractKind,
        function: &'static str,
    },
    #[error("gas schedule has no entry for `{0}`")]
    UnknownFunction(String),
    #[error("gas schedule has no deployment row for {0}")]
    MissingDeployRow(ContractKind),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReceiptError {
    #[error("{0} was never submitted")]
    UnknownTx(TxId),
    #[error("{0} is still pending")]
    Pending(TxId),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ViewError {
    #[error("no contract registered as {0}")]
    UnknownContract(ContractId),
    #[error("{contract} is a {actual} contract; {function} belongs to {expected}")]
    WrongContractKind {
        contract: ContractId,
        actual: ContractKind,
        expected: ContractKind,
        function: &'static str,
    },
    #[error(transparent)]
    Contract(#[from] ContractError),
}

#[derive(Debug)]
pub struct Ledger {
    config: ChainConfig,
    schedule: GasSchedule,
    now_s: u64,
    last_block_index: u64,
    next_tx: u64,
    next_contract: u32,
    pending: VecDeque<Transaction>,
    blocks: Vec<Block>,
    receipts: BTreeMap<TxId, Receipt>,
    contracts: BTreeMap<ContractId, ContractInstance>,
    events: Vec<LedgerEvent>,
    total_fees: WeiAmount,
    fees_by_sender: BTreeMap<Address, WeiAmount>,
}

impl Ledger {
    pub fn new(config: ChainConfig, schedule: GasSchedule) -> Ledger {
        Ledger {
            config,
            schedule,
            now_s: 0,
            last_block_index: 0,
            next_tx: 1,
            next_contract: 0,
            pending: VecDeque::new(),
            blocks: Vec::new(),
            receipts: BTreeMap::new(),
            contracts: BTreeMap::new(),
            events: Vec::new(),
            total_fees: WeiAmount::ZERO,
            fees_by_sender: BTreeMap::new(),
        }
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn schedule(&self) -> &GasSchedule {
        &self.schedule
    }

    pub fn now_s(&self) -> u64 {
        self.now_s
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn events(&self) -> &[LedgerEvent] {
        &self.events
    }

    pub fn total_fees(&self) -> WeiAmount {
        self.total_fees
    }

    pub fn fees_by_sender(&self) -> &BTreeMap<Address, WeiAmount> {
        &self.fees_by_sender
    }

    pub fn pending_count(&self) -> usize {
        self.pending.len()
    }

    pub fn contract(&self, id: ContractId) -> Option<&ContractInstance> {
        self.contracts.get(&id)
    }

    /// Queue a transaction at the current simulated time. The target
    /// and its schedule entry are validated here so execution is total.
    pub fn submit(&mut self, sender: Address, payload: TxPayload) -> Result<TxId, SubmitError> {
        match &payload {
            TxPayload::Deploy(kind) => {
                self.schedule
                    .deploy_gas(*kind)
                    .map_err(|_| SubmitError::MissingDeployRow(*kind))?;
            }
            TxPayload::Call { contract, call } => {
                let instance = self
                    .contracts
                    .get(contract)
                    .ok_or(SubmitError::UnknownContract(*contract))?;
                if instance.kind() != call.kind() {
                    return Err(SubmitError::WrongContractKind {
                        contract: *contract,
                        actual: instance.kind(),
                        expected: call.kind(),
                        function: call.function_name(),
                    });
                }
                self.schedule
                    .gas_for(call.function_name(), call.payload_len())
                    .map_err(|_| SubmitError::UnknownFunction(call.function_name().to_string()))?;
            }
        }
        let tx_id = TxId(self.next_tx);
        self.next_tx += 1;
        self.pending.push_back(Transaction {
            tx_id,
            sender,
            payload,
            submit_time_s: self.now_s,
        });
        Ok(tx_id)
    }

    /// Produce every block with boundary ≤ `time_s`, draining pending
    /// transactions FIFO up to capacity per block, and move the clock to
    /// `time_s`. Returns the receipts issued during this advance.
    pub fn advance_to(&mut self, time_s: u64) -> Vec<Receipt> {
        assert!(time_s >= self.now_s, "clock cannot move backwards ({} < {})", time_s, self.now_s);
        let interval = self.config.block_interval_s;
        let capacity = self.config.block_capacity() as usize;
        let mut issued = Vec::new();
        for index in (self.last_block_index + 1)..=(time_s / interval) {
            let boundary = index * interval;
            let take = self.pending.len().min(capacity);
            let mut tx_ids = Vec::with_capacity(take);
            for _ in 0..take {
                let tx = self.pending.pop_front().expect("pending length checked");
                debug_assert!(tx.submit_time_s <= boundary);
                let receipt = self.execute(tx, index, boundary);
                tx_ids.push(receipt.tx_id);
                issued.push(receipt);
            }
            self.blocks.push(Block { index, timestamp_s: boundary, tx_ids });
            self.last_block_index = index;
        }
        self.now_s = time_s;
        issued
    }

    /// Advance exactly to the next block boundary.
    pub fn advance_block(&mut self) -> Vec<Receipt> {
        let interval = self.config.block_interval_s;
        self.advance_to((self.now_s / interval + 1) * interval)
    }

    fn execute(&mut self, tx: Transaction, block_index: u64, boundary_s: u64) -> Receipt {
        let (contract_id, contract_kind, status, gas_used, returned) = match &tx.payload {
            TxPayload::Deploy(kind) => {
                let gas = self.schedule.deploy_gas(*kind).expect("validated at submit");
                let id = ContractId(self.next_contract);
                self.next_contract += 1;
                self.contracts.insert(id, ContractInstance::new(*kind));
                (id, *kind, TxStatus::Confirmed, gas, None)
            }
            TxPayload::Call { contract, call } => {
                let gas = self
                    .schedule
                    .gas_for(call.function_name(), call.payload_len())
                    .expect("validated at submit");
                let instance = self.contracts.get_mut(contract).expect("validated at submit");
                let kind = instance.kind();
                match instance.execute(tx.sender, call) {
                    Ok(outcome) => {
                        for event in outcome.events {
                            self.events.push(LedgerEvent {
                                block_index,
                                time_s: boundary_s,
                                contract_id: *contract,
                                event,
                            });
                        }
                        (*contract, kind, TxStatus::Confirmed, gas, outcome.returned)
                    }
                    // Reverts keep their full scheduled gas.
                    Err(err) => (*contract, kind, TxStatus::Reverted(err), gas, None),
                }
            }
        };
        let fee = self.config.fee_wei(gas_used);
        self.total_fees += fee;
        *self.fees_by_sender.entry(tx.sender).or_insert(WeiAmount::ZERO) += fee;
        let receipt = Receipt {
            tx_id: tx.tx_id,
            contract_id,
            contract_kind,
            function: tx.function_name(),
            status,
            gas_used,
            fee,
            block_index,
            submit_time_s: tx.submit_time_s,
            confirm_time_s: boundary_s,
            returned,
        };
        self.receipts.insert(tx.tx_id, receipt.clone());
        receipt
    }

    pub fn receipt_of(&self, tx_id: TxId) -> Result<&Receipt, ReceiptError> {
        if let Some(receipt) = self.receipts.get(&tx_id) {
            return Ok(receipt);
        }
        if tx_id.0 > 0 && tx_id.0 < self.next_tx {
            Err(ReceiptError::Pending(tx_id))
        } else {
            Err(ReceiptError::UnknownTx(tx_id))
        }
    }

    pub fn receipts(&self) -> impl Iterator<Item = &Receipt> {
        self.receipts.values()
    }

    /// Deploy at `time_s` (≥ current clock) and run the chain forward
    /// until the deployment is mined. Returns the new contract's id and
    /// the deployment receipt.
    pub fn deploy_contract(
        &mut self,
        kind: ContractKind,
        sender: Address,
        time_s: u64,
    ) -> Result<(ContractId, Receipt), SubmitError> {
        self.advance_to(time_s);
        let tx_id = self.submit(sender, TxPayload::Deploy(kind))?;
        loop {
            for receipt in self.advance_block() {
                if receipt.tx_id == tx_id {
                    return Ok((receipt.contract_id, receipt));
                }
            }
        }
    }

    /// Execute a view against current state: immediate, no transaction,
    /// zero gas.
    pub fn view(&self, contract: ContractId, call: &ViewCall) -> Result<ViewResult, ViewError> {
        let instance =
            self.contracts.get(&contract).ok_or(ViewError::UnknownContract(contract))?;
        if instance.kind() != call.kind() {
            return Err(ViewError::WrongContractKind {
                contract,
                actual: instance.kind(),
                expected: call.kind(),
                function: call.function_name(),
            });
        }
        Ok(instance.view(call)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ledger() -> Ledger {
        Ledger::new(ChainConfig::default(), GasSchedule::default())
    }

    fn alice() -> Address {
        Address::from_tag(1)
    }

    fn bob() -> Address {
        Address::from_tag(2)
    }

    fn deploy_sales(ledger: &mut Ledger) -> ContractId {
        let (id, receipt) = ledger.deploy_contract(ContractKind::Sales, alice(), ledger.now_s()).unwrap();
        assert!(receipt.status.is_confirmed());
        id
    }

    #[test]
    fn deployment_fees_match_migration_costs() {
        let mut ledger = ledger();
        let mut fees = Vec::new();
        for kind in ContractKind::ALL {
            let (_, receipt) = ledger.deploy_contract(kind, alice(), ledger.now_s()).unwrap();
            fees.push(receipt.fee.to_eth_string());
        }
        assert_eq!(fees, ["0.00138554", "0.000440383", "0.000640725"]);
        assert_eq!(ledger.total_fees().to_eth_string(), "0.002466648");
    }

    #[test]
    fn empty_advance_produces_empty_blocks() {
        let mut ledger = ledger();
        let receipts = ledger.advance_to(60);
        assert!(receipts.is_empty());
        assert_eq!(ledger.blocks().len(), 4);
        let stamps: Vec<u64> = ledger.blocks().iter().map(|b| b.timestamp_s).collect();
        assert_eq!(stamps, [15, 30, 45, 60]);
        assert!(ledger.blocks().iter().all(|b| b.tx_ids.is_empty()));
        assert_eq!(ledger.now_s(), 60);
    }

    #[test]
    fn tx_submitted_mid_interval_confirms_at_next_boundary() {
        let mut ledger = ledger();
        let id = deploy_sales(&mut ledger); // clock now 15
        ledger.advance_to(16);
        let tx = ledger
            .submit(
                alice(),
                TxPayload::Call {
                    contract: id,
                    call: ContractCall::SetSalesContract { buyer: alice(), seller: bob() },
                },
            )
            .unwrap();
        assert!(matches!(ledger.receipt_of(tx), Err(ReceiptError::Pending(_))));
        let receipts = ledger.advance_to(30);
        assert_eq!(receipts.len(), 1);
        assert_eq!(receipts[0].confirm_time_s, 30);
        assert_eq!(receipts[0].submit_time_s, 16);
        assert_eq!(receipts[0].latency_s(), 14);
        assert_eq!(ledger.receipt_of(tx).unwrap(), &receipts[0]);
    }

    #[test]
    fn block_capacity_defers_the_226th_submission() {
        let mut ledger = ledger();
        let id = deploy_sales(&mut ledger);
        // Repeat calls: the first initializes, the rest revert; every
        // one is metered, which is all capacity cares about.
        let mut ids = Vec::new();
        for _ in 0..226 {
            let tx = ledger
                .submit(
                    alice(),
                    TxPayload::Call {
                        contract: id,
                        call: ContractCall::SetSalesContract { buyer: alice(), seller: bob() },
                    },
                )
                .unwrap();
            ids.push(tx);
        }
        ledger.advance_to(ledger.now_s() + 30);
        let first = ledger.receipt_of(ids[0]).unwrap().confirm_time_s;
        let last224 = ledger.receipt_of(ids[224]).unwrap().confirm_time_s;
        let last = ledger.receipt_of(ids[225]).unwrap().confirm_time_s;
        assert_eq!(first, last224);
        assert_eq!(last, first + 15);
        // Latency bound: one interval of queueing slack plus one block
        // per full capacity multiple.
        for (pos, tx) in ids.iter().enumerate() {
            let receipt = ledger.receipt_of(*tx).unwrap();
            let blocks_needed = (pos / 225 + 1) as u64;
            assert!(receipt.latency_s() <= 15 * (1 + blocks_needed));
        }
    }

    #[test]
    fn reverted_calls_cost_full_gas_and_change_nothing() {
        let mut ledger = ledger();
        let id = deploy_sales(&mut ledger);
        ledger
            .submit(
                alice(),
                TxPayload::Call {
                    contract: id,
                    call: ContractCall::SetSalesContract { buyer: alice(), seller: alice() },
                },
            )
            .unwrap();
        let receipts = ledger.advance_block();
        assert_eq!(receipts[0].status, TxStatus::Reverted(ContractError::SameParty));
        assert_eq!(receipts[0].gas_used, 106_384);
        assert_eq!(receipts[0].fee, WeiAmount(106_384_000_000_000));
        match ledger.contract(id).unwrap() {
            ContractInstance::Sales(c) => assert!(!c.initialized()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn submission_validation_catches_bad_targets() {
        let mut ledger = ledger();
        let ghost = ContractId(7);
        let err = ledger
            .submit(
                alice(),
                TxPayload::Call {
                    contract: ghost,
                    call: ContractCall::ConfirmAgreement,
                },
            )
            .unwrap_err();
        assert_eq!(err, SubmitError::UnknownContract(ghost));
        let id = deploy_sales(&mut ledger);
        let err = ledger
            .submit(alice(), TxPayload::Call { contract: id, call: ContractCall::ConfirmAgreement })
            .unwrap_err();
        assert!(matches!(err, SubmitError::WrongContractKind { .. }));
        assert!(matches!(
            ledger.receipt_of(TxId(999)),
            Err(ReceiptError::UnknownTx(_))
        ));
    }

    #[test]
    fn fees_conserve_across_receipts_blocks_and_counter() {
        let mut ledger = ledger();
        let id = deploy_sales(&mut ledger);
        ledger
            .submit(
                alice(),
                TxPayload::Call {
                    contract: id,
                    call: ContractCall::SetSalesContract { buyer: alice(), seller: bob() },
                },
            )
            .unwrap();
        ledger
            .submit(
                bob(),
                TxPayload::Call {
                    contract: id,
                    call: ContractCall::ConfirmOrder { order_id: "PO-1".into() },
                },
            )
            .unwrap();
        ledger.advance_block();
        let from_receipts: WeiAmount = ledger.receipts().map(|r| r.fee).sum();
        let from_blocks: WeiAmount = ledger
            .blocks()
            .iter()
            .flat_map(|b| b.tx_ids.iter())
            .map(|tx| ledger.receipt_of(*tx).unwrap().fee)
            .sum();
        let from_senders: WeiAmount = ledger.fees_by_sender().values().copied().sum();
        assert_eq!(from_receipts, ledger.total_fees());
        assert_eq!(from_blocks, ledger.total_fees());
        assert_eq!(from_senders, ledger.total_fees());
    }

    #[test]
    fn views_are_immediate_and_free() {
        let mut ledger = ledger();
        let id = deploy_sales(&mut ledger);
        let fees_before = ledger.total_fees();
        let result = ledger
            .view(id, &ViewCall::OrderExists { order_id: "PO-1".into() })
            .unwrap();
        assert_eq!(result, ViewResult::Bool(false));
        assert_eq!(ledger.total_fees(), fees_before);
        assert_eq!(ledger.pending_count(), 0);
        let err = ledger.view(id, &ViewCall::GetNumberOfDocuments).unwrap_err();
        assert!(matches!(err, ViewError::WrongContractKind { .. }));
    }

    #[test]
    fn identical_runs_are_identical() {
        let run = || {
            let mut ledger = ledger();
            let id = deploy_sales(&mut ledger);
            ledger
                .submit(
                    alice(),
                    TxPayload::Call {
                        contract: id,
                        call: ContractCall::SetSalesContract { buyer: alice(), seller: bob() },
                    },
                )
                .unwrap();
            ledger.advance_to(90);
            (
                ledger.blocks().to_vec(),
                ledger.receipts().cloned().collect::<Vec<_>>(),
                ledger.total_fees(),
            )
        };
        assert_eq!(run(), run());
    }
}
