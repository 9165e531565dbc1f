//! An independent transition oracle for the three contract state
//! machines.
//!
//! The rules in this module restate the documented contract behavior
//! directly — they never call into the implementation — over a small
//! fixture (two orders, one invoice, three parties, two documents).
//! A breadth-first walk over all action sequences up to
//! [`SEQUENCE_DEPTH`] produces every reachable (state, role, action)
//! outcome; the same walk run in lockstep against the real contracts
//! checks that implementation and rules agree everywhere, and the
//! shipped `data/transition_table.csv` pins the whole table.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use tradeledger::contracts::{
    ContractCall, ContractError, ContractInstance, ContractKind, InvoiceStatus, LcStatus,
    OrderStatus,
};
use tradeledger::docstore::ContentHash;
use tradeledger::Address;

/// Maximum action-sequence length the table covers.
pub const SEQUENCE_DEPTH: usize = 6;

pub const SHIPPED_TABLE: &str = include_str!("../../data/transition_table.csv");
pub const TABLE_HEADER: &str = "contract,state,role,action,result_state_or_error";

/// (state, role, action) → successor state or error name.
pub type Rows = BTreeMap<(String, String, String), String>;

/// One contract's abstract machine plus its bridge to the real
/// implementation. Rules and encodings on the abstract side must not
/// touch [`ContractInstance`].
trait Machine {
    type State: Clone + Ord;
    type Action: Clone;
    const CONTRACT: ContractKind;
    fn roles() -> &'static [&'static str];
    fn actions() -> Vec<Self::Action>;
    fn label(action: &Self::Action) -> String;
    fn initial() -> Self::State;
    fn rule(
        state: &Self::State,
        role: &'static str,
        action: &Self::Action,
    ) -> Result<Self::State, ContractError>;
    fn encode(state: &Self::State) -> String;
    fn caller(role: &'static str) -> Address;
    fn call(action: &Self::Action) -> ContractCall;
    fn encode_concrete(instance: &ContractInstance) -> String;
}

// ---------------------------------------------------------------- Sales

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum OrdSt {
    Absent,
    Created,
    Confirmed,
    Received,
    Cancelled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum InvSt {
    Absent,
    Issued,
    Confirmed,
}

/// `None` = not initialized; otherwise (order O1, order O2, invoice I1).
type SalesState = Option<(OrdSt, OrdSt, InvSt)>;

#[derive(Debug, Clone, Copy)]
enum SalesAct {
    Init,
    AddOrder(u8),
    ConfirmOrder(u8),
    CancelOrder(u8),
    ReceiveOrder(u8),
    /// Issue invoice I1 against order O1 or O2.
    CreateInvoice(u8),
    ConfirmInvoice,
}

struct SalesMachine;

impl SalesMachine {
    fn order(state: &(OrdSt, OrdSt, InvSt), which: u8) -> OrdSt {
        if which == 1 {
            state.0
        } else {
            state.1
        }
    }

    fn with_order(mut state: (OrdSt, OrdSt, InvSt), which: u8, st: OrdSt) -> SalesState {
        if which == 1 {
            state.0 = st;
        } else {
            state.1 = st;
        }
        Some(state)
    }
}

impl Machine for SalesMachine {
    type State = SalesState;
    type Action = SalesAct;
    const CONTRACT: ContractKind = ContractKind::Sales;

    fn roles() -> &'static [&'static str] {
        &["buyer", "seller", "other"]
    }

    fn actions() -> Vec<SalesAct> {
        vec![
            SalesAct::Init,
            SalesAct::AddOrder(1),
            SalesAct::AddOrder(2),
            SalesAct::ConfirmOrder(1),
            SalesAct::ConfirmOrder(2),
            SalesAct::CancelOrder(1),
            SalesAct::CancelOrder(2),
            SalesAct::ReceiveOrder(1),
            SalesAct::ReceiveOrder(2),
            SalesAct::CreateInvoice(1),
            SalesAct::CreateInvoice(2),
            SalesAct::ConfirmInvoice,
        ]
    }

    fn label(action: &SalesAct) -> String {
        match action {
            SalesAct::Init => "setSalesContract".to_string(),
            SalesAct::AddOrder(o) => format!("addOrder(O{o})"),
            SalesAct::ConfirmOrder(o) => format!("confirmOrder(O{o})"),
            SalesAct::CancelOrder(o) => format!("cancelOrder(O{o})"),
            SalesAct::ReceiveOrder(o) => format!("receiveOrder(O{o})"),
            SalesAct::CreateInvoice(o) => format!("createInvoice(O{o})"),
            SalesAct::ConfirmInvoice => "confirmInvoice(I1)".to_string(),
        }
    }

    fn initial() -> SalesState {
        None
    }

    fn rule(
        state: &SalesState,
        role: &'static str,
        action: &SalesAct,
    ) -> Result<SalesState, ContractError> {
        use ContractError::*;
        let buyer = role == "buyer";
        let seller = role == "seller";
        match *action {
            // Anyone may initialize, once.
            SalesAct::Init => match state {
                Some(_) => Err(AlreadyInitialized),
                None => Ok(Some((OrdSt::Absent, OrdSt::Absent, InvSt::Absent))),
            },
            // Initialization is checked before the role.
            SalesAct::AddOrder(o) => {
                let inner = state.ok_or(NotInitialized)?;
                if !buyer {
                    return Err(NotBuyer);
                }
                if Self::order(&inner, o) != OrdSt::Absent {
                    return Err(DuplicateOrder);
                }
                Ok(Self::with_order(inner, o, OrdSt::Created))
            }
            // Role first: an uninitialized contract has no seller, so
            // every caller fails the role check.
            SalesAct::ConfirmOrder(o) => {
                if state.is_none() || !seller {
                    return Err(NotSeller);
                }
                let inner = state.expect("checked");
                match Self::order(&inner, o) {
                    OrdSt::Absent => Err(NoSuchOrder),
                    OrdSt::Created => Ok(Self::with_order(inner, o, OrdSt::Confirmed)),
                    _ => Err(BadState),
                }
            }
            SalesAct::CancelOrder(o) => {
                if state.is_none() || !buyer {
                    return Err(NotBuyer);
                }
                let inner = state.expect("checked");
                match Self::order(&inner, o) {
                    OrdSt::Absent => Err(NoSuchOrder),
                    OrdSt::Created | OrdSt::Confirmed => {
                        Ok(Self::with_order(inner, o, OrdSt::Cancelled))
                    }
                    _ => Err(BadState),
                }
            }
            SalesAct::ReceiveOrder(o) => {
                if state.is_none() || !buyer {
                    return Err(NotBuyer);
                }
                let inner = state.expect("checked");
                match Self::order(&inner, o) {
                    OrdSt::Absent => Err(NoSuchOrder),
                    OrdSt::Confirmed => Ok(Self::with_order(inner, o, OrdSt::Received)),
                    _ => Err(BadState),
                }
            }
            SalesAct::CreateInvoice(o) => {
                if state.is_none() || !seller {
                    return Err(NotSeller);
                }
                let inner = state.expect("checked");
                match Self::order(&inner, o) {
                    OrdSt::Absent => return Err(NoSuchOrder),
                    OrdSt::Confirmed | OrdSt::Received => {}
                    _ => return Err(BadState),
                }
                if inner.2 != InvSt::Absent {
                    return Err(DuplicateInvoice);
                }
                Ok(Some((inner.0, inner.1, InvSt::Issued)))
            }
            SalesAct::ConfirmInvoice => {
                if state.is_none() || !buyer {
                    return Err(NotBuyer);
                }
                let inner = state.expect("checked");
                match inner.2 {
                    InvSt::Absent => Err(NoSuchInvoice),
                    InvSt::Issued => Ok(Some((inner.0, inner.1, InvSt::Confirmed))),
                    InvSt::Confirmed => Err(BadState),
                }
            }
        }
    }

    fn encode(state: &SalesState) -> String {
        match state {
            None => "uninitialized".to_string(),
            Some((o1, o2, i1)) => {
                let ord = |o: &OrdSt| match o {
                    OrdSt::Absent => "-",
                    OrdSt::Created => "Created",
                    OrdSt::Confirmed => "Confirmed",
                    OrdSt::Received => "Received",
                    OrdSt::Cancelled => "Cancelled",
                };
                let inv = match i1 {
                    InvSt::Absent => "-",
                    InvSt::Issued => "Issued",
                    InvSt::Confirmed => "Confirmed",
                };
                format!("O1={};O2={};I1={}", ord(o1), ord(o2), inv)
            }
        }
    }

    fn caller(role: &'static str) -> Address {
        match role {
            "buyer" => Address::from_tag(1),
            "seller" => Address::from_tag(2),
            _ => Address::from_tag(9),
        }
    }

    fn call(action: &SalesAct) -> ContractCall {
        let order_id = |o: u8| format!("O{o}");
        match *action {
            SalesAct::Init => ContractCall::SetSalesContract {
                buyer: Address::from_tag(1),
                seller: Address::from_tag(2),
            },
            SalesAct::AddOrder(o) => ContractCall::AddOrder {
                order_id: order_id(o),
                description: "fixture".to_string(),
            },
            SalesAct::ConfirmOrder(o) => ContractCall::ConfirmOrder { order_id: order_id(o) },
            SalesAct::CancelOrder(o) => ContractCall::CancelOrder { order_id: order_id(o) },
            SalesAct::ReceiveOrder(o) => ContractCall::ReceiveOrder { order_id: order_id(o) },
            SalesAct::CreateInvoice(o) => ContractCall::CreateInvoice {
                invoice_id: "I1".to_string(),
                order_id: order_id(o),
                amount: 100,
            },
            SalesAct::ConfirmInvoice => {
                ContractCall::ConfirmInvoice { invoice_id: "I1".to_string() }
            }
        }
    }

    fn encode_concrete(instance: &ContractInstance) -> String {
        let ContractInstance::Sales(c) = instance else {
            unreachable!("sales machine drives a sales instance")
        };
        if !c.initialized() {
            return "uninitialized".to_string();
        }
        let ord = |id: &str| match c.order(id).map(|o| o.status) {
            None => "-",
            Some(OrderStatus::Created) => "Created",
            Some(OrderStatus::Confirmed) => "Confirmed",
            Some(OrderStatus::Received) => "Received",
            Some(OrderStatus::Cancelled) => "Cancelled",
        };
        let inv = match c.invoice("I1").map(|i| i.status) {
            None => "-",
            Some(InvoiceStatus::Issued) => "Issued",
            Some(InvoiceStatus::Confirmed) => "Confirmed",
        };
        format!("O1={};O2={};I1={}", ord("O1"), ord("O2"), inv)
    }
}

// ------------------------------------------------------------ Financial

/// `None` = unset; otherwise a confirmation bitmask
/// (applicant = 1, financier = 2, beneficiary = 4; 7 = confirmed).
type FinState = Option<u8>;

#[derive(Debug, Clone, Copy)]
enum FinAct {
    SetParties,
    Confirm,
}

struct FinMachine;

impl Machine for FinMachine {
    type State = FinState;
    type Action = FinAct;
    const CONTRACT: ContractKind = ContractKind::Financial;

    fn roles() -> &'static [&'static str] {
        &["applicant", "financier", "beneficiary", "other"]
    }

    fn actions() -> Vec<FinAct> {
        vec![FinAct::SetParties, FinAct::Confirm]
    }

    fn label(action: &FinAct) -> String {
        match action {
            FinAct::SetParties => "setFinancialAgreementParties".to_string(),
            FinAct::Confirm => "confirmAgreement".to_string(),
        }
    }

    fn initial() -> FinState {
        None
    }

    fn rule(
        state: &FinState,
        role: &'static str,
        action: &FinAct,
    ) -> Result<FinState, ContractError> {
        use ContractError::*;
        match action {
            FinAct::SetParties => match state {
                Some(_) => Err(AlreadyInitialized),
                None => Ok(Some(0)),
            },
            FinAct::Confirm => {
                let mask = state.ok_or(NotInitialized)?;
                let bit = match role {
                    "applicant" => 1,
                    "financier" => 2,
                    "beneficiary" => 4,
                    _ => return Err(NotParty),
                };
                if mask & bit != 0 {
                    return Err(AlreadyConfirmed);
                }
                Ok(Some(mask | bit))
            }
        }
    }

    fn encode(state: &FinState) -> String {
        match state {
            None => "unset".to_string(),
            Some(7) => "confirmed".to_string(),
            Some(mask) => {
                let mut acks = String::new();
                for (bit, tag) in [(1, 'A'), (2, 'F'), (4, 'B')] {
                    if mask & bit != 0 {
                        acks.push(tag);
                    }
                }
                format!("proposed;acks={acks}")
            }
        }
    }

    fn caller(role: &'static str) -> Address {
        match role {
            "applicant" => Address::from_tag(1),
            "financier" => Address::from_tag(2),
            "beneficiary" => Address::from_tag(3),
            _ => Address::from_tag(9),
        }
    }

    fn call(action: &FinAct) -> ContractCall {
        match action {
            FinAct::SetParties => ContractCall::SetFinancialAgreementParties {
                applicant: Address::from_tag(1),
                financier: Address::from_tag(2),
                beneficiary: Address::from_tag(3),
            },
            FinAct::Confirm => ContractCall::ConfirmAgreement,
        }
    }

    fn encode_concrete(instance: &ContractInstance) -> String {
        use tradeledger::contracts::AgreementStatus;
        let ContractInstance::Financial(c) = instance else {
            unreachable!("financial machine drives a financial instance")
        };
        match c.status() {
            AgreementStatus::Unset => "unset".to_string(),
            AgreementStatus::Confirmed => "confirmed".to_string(),
            AgreementStatus::Proposed => {
                let mut acks = String::new();
                for (tag, addr) in [('A', 1), ('F', 2), ('B', 3)] {
                    if c.has_confirmed(Address::from_tag(addr)) {
                        acks.push(tag);
                    }
                }
                format!("proposed;acks={acks}")
            }
        }
    }
}

// ------------------------------------------------------- LetterOfCredit

/// A presented document slot: which fixture document, and validated yet.
/// `A` is the invoice-type document, `B` the bill-of-lading type.
type LcSlot = (char, bool);

/// `None` = unset; otherwise presented documents in order.
type LcState = Option<Vec<LcSlot>>;

#[derive(Debug, Clone, Copy)]
enum LcAct {
    Initialize,
    AddDoc(char),
    Validate(u64),
}

struct LcMachine;

/// Both fixture document types are required, so the letter is complete
/// exactly when each type has a validated document.
fn lc_complete(slots: &[LcSlot]) -> bool {
    ['A', 'B'].iter().all(|d| slots.iter().any(|(doc, valid)| doc == d && *valid))
}

impl Machine for LcMachine {
    type State = LcState;
    type Action = LcAct;
    const CONTRACT: ContractKind = ContractKind::LetterOfCredit;

    fn roles() -> &'static [&'static str] {
        &["applicant", "beneficiary", "issuingBank", "other"]
    }

    fn actions() -> Vec<LcAct> {
        vec![
            LcAct::Initialize,
            LcAct::AddDoc('A'),
            LcAct::AddDoc('B'),
            LcAct::Validate(0),
            LcAct::Validate(1),
        ]
    }

    fn label(action: &LcAct) -> String {
        match action {
            LcAct::Initialize => "initializeContract".to_string(),
            LcAct::AddDoc(d) => format!("addDocument(D{})", if *d == 'A' { 1 } else { 2 }),
            LcAct::Validate(i) => format!("validateDocument({i})"),
        }
    }

    fn initial() -> LcState {
        None
    }

    fn rule(
        state: &LcState,
        role: &'static str,
        action: &LcAct,
    ) -> Result<LcState, ContractError> {
        use ContractError::*;
        match action {
            LcAct::Initialize => match state {
                Some(_) => Err(AlreadyInitialized),
                None => Ok(Some(Vec::new())),
            },
            LcAct::AddDoc(d) => {
                let slots = state.as_ref().ok_or(NotInitialized)?;
                if role != "beneficiary" {
                    return Err(NotBeneficiary);
                }
                let mut next = slots.clone();
                next.push((*d, false));
                Ok(Some(next))
            }
            // The issuing bank of an unset letter is nobody, so the role
            // check fails before anything else.
            LcAct::Validate(i) => {
                if state.is_none() || role != "issuingBank" {
                    return Err(NotIssuingBank);
                }
                let slots = state.as_ref().expect("checked");
                let slot = slots.get(*i as usize).ok_or(NoSuchDocument)?;
                if slot.1 {
                    return Err(AlreadyValid);
                }
                let mut next = slots.clone();
                next[*i as usize].1 = true;
                Ok(Some(next))
            }
        }
    }

    fn encode(state: &LcState) -> String {
        match state {
            None => "unset".to_string(),
            Some(slots) => {
                let status = if lc_complete(slots) { "complete" } else { "issued" };
                let docs: Vec<String> = slots
                    .iter()
                    .map(|(doc, valid)| format!("{doc}{}", if *valid { 'v' } else { 'i' }))
                    .collect();
                format!("{status};docs={}", docs.join("+"))
            }
        }
    }

    fn caller(role: &'static str) -> Address {
        match role {
            "applicant" => Address::from_tag(1),
            "beneficiary" => Address::from_tag(2),
            "issuingBank" => Address::from_tag(3),
            _ => Address::from_tag(9),
        }
    }

    fn call(action: &LcAct) -> ContractCall {
        match action {
            LcAct::Initialize => ContractCall::InitializeContract {
                applicant: Address::from_tag(1),
                beneficiary: Address::from_tag(2),
                issuing_bank: Address::from_tag(3),
                amount: 100,
                required_doc_types: vec!["invoice".to_string(), "billOfLading".to_string()],
            },
            LcAct::AddDoc('A') => ContractCall::AddDocument {
                content_hash: ContentHash::of(b"D1"),
                doc_type: "invoice".to_string(),
            },
            LcAct::AddDoc(_) => ContractCall::AddDocument {
                content_hash: ContentHash::of(b"D2"),
                doc_type: "billOfLading".to_string(),
            },
            LcAct::Validate(i) => ContractCall::ValidateDocument { doc_id: *i },
        }
    }

    fn encode_concrete(instance: &ContractInstance) -> String {
        let ContractInstance::LetterOfCredit(c) = instance else {
            unreachable!("letter-of-credit machine drives a letter-of-credit instance")
        };
        match c.status() {
            LcStatus::Unset => "unset".to_string(),
            status => {
                let prefix = match status {
                    LcStatus::Issued => "issued",
                    LcStatus::DocumentsComplete => "complete",
                    LcStatus::Unset => unreachable!(),
                };
                let docs: Vec<String> = c
                    .documents()
                    .iter()
                    .map(|d| {
                        let tag = match d.doc_type.as_str() {
                            "invoice" => 'A',
                            "billOfLading" => 'B',
                            other => unreachable!("fixture never presents type {other}"),
                        };
                        format!("{tag}{}", if d.valid { 'v' } else { 'i' })
                    })
                    .collect();
                format!("{prefix};docs={}", docs.join("+"))
            }
        }
    }
}

// ---------------------------------------------------------- the drivers

/// Breadth-first closure of the abstract rules alone: every
/// (state, role, action) outcome reachable within the sequence budget.
fn rules_rows<M: Machine>() -> Rows {
    let mut rows = Rows::new();
    let mut seen: BTreeSet<M::State> = BTreeSet::from_iter([M::initial()]);
    let mut queue: VecDeque<(M::State, usize)> = VecDeque::from_iter([(M::initial(), 0)]);
    while let Some((state, depth)) = queue.pop_front() {
        if depth >= SEQUENCE_DEPTH {
            continue;
        }
        for &role in M::roles() {
            for action in M::actions() {
                let key = (M::encode(&state), role.to_string(), M::label(&action));
                let result = match M::rule(&state, role, &action) {
                    Ok(next) => {
                        let encoded = M::encode(&next);
                        if seen.insert(next.clone()) {
                            queue.push_back((next, depth + 1));
                        }
                        encoded
                    }
                    Err(e) => e.name().to_string(),
                };
                rows.insert(key, result);
            }
        }
    }
    rows
}

/// The same walk with the real contract in lockstep: every outcome must
/// match the rules, every revert must leave the instance untouched, and
/// every success must land on the state the rules predict.
fn paired_rows<M: Machine>() -> Result<Rows, String> {
    let mut rows = Rows::new();
    let root = M::initial();
    let fresh = ContractInstance::new(M::CONTRACT);
    if M::encode_concrete(&fresh) != M::encode(&root) {
        return Err(format!(
            "{}: fresh instance encodes as `{}`, rules start at `{}`",
            M::CONTRACT,
            M::encode_concrete(&fresh),
            M::encode(&root)
        ));
    }
    let mut seen: BTreeSet<M::State> = BTreeSet::from_iter([root.clone()]);
    let mut queue: VecDeque<(M::State, ContractInstance, usize)> =
        VecDeque::from_iter([(root, fresh, 0)]);
    while let Some((state, instance, depth)) = queue.pop_front() {
        if depth >= SEQUENCE_DEPTH {
            continue;
        }
        for &role in M::roles() {
            for action in M::actions() {
                let here = M::encode(&state);
                let key = (here.clone(), role.to_string(), M::label(&action));
                let expected = M::rule(&state, role, &action);
                let mut next_instance = instance.clone();
                let got = next_instance.execute(M::caller(role), &M::call(&action));
                let result = match (&expected, &got) {
                    (Err(want), Err(have)) if want == have => {
                        if next_instance != instance {
                            return Err(format!(
                                "{} at `{}`: {} by {role} reverted {} but changed state",
                                M::CONTRACT,
                                here,
                                M::label(&action),
                                have.name()
                            ));
                        }
                        want.name().to_string()
                    }
                    (Ok(next), Ok(_)) => {
                        let want = M::encode(next);
                        let have = M::encode_concrete(&next_instance);
                        if want != have {
                            return Err(format!(
                                "{} at `{}`: {} by {role} landed on `{have}`, rules say `{want}`",
                                M::CONTRACT,
                                here,
                                M::label(&action)
                            ));
                        }
                        if seen.insert(next.clone()) {
                            queue.push_back((next.clone(), next_instance, depth + 1));
                        }
                        want
                    }
                    (want, have) => {
                        let show = |r: &Result<_, ContractError>| match r {
                            Ok(_) => "success".to_string(),
                            Err(e) => format!("revert {}", e.name()),
                        };
                        return Err(format!(
                            "{} at `{}`: {} by {role} → implementation {}, rules {}",
                            M::CONTRACT,
                            here,
                            M::label(&action),
                            show(&have.as_ref().map(|_| ()).map_err(|e| *e)),
                            show(&want.as_ref().map(|_| ()).map_err(|e| *e)),
                        ));
                    }
                };
                rows.insert(key, result);
            }
        }
    }
    Ok(rows)
}

fn append_csv(out: &mut String, contract: ContractKind, rows: &Rows) {
    for ((state, role, action), result) in rows {
        let _ = writeln!(out, "{contract},{state},{role},{action},{result}");
    }
}

/// The full table, generated from the rules alone, in canonical order.
pub fn generate_table_csv() -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    append_csv(&mut out, ContractKind::Sales, &rules_rows::<SalesMachine>());
    append_csv(&mut out, ContractKind::Financial, &rules_rows::<FinMachine>());
    append_csv(&mut out, ContractKind::LetterOfCredit, &rules_rows::<LcMachine>());
    out
}

pub struct OracleStats {
    pub rows: usize,
}

/// Walk all three implementations in lockstep with the rules; error on
/// the first disagreement.
pub fn verify_implementation() -> Result<OracleStats, String> {
    let mut rows = 0;
    let sales = paired_rows::<SalesMachine>()?;
    if sales != rules_rows::<SalesMachine>() {
        return Err("Sales: paired walk and rules walk disagree".to_string());
    }
    rows += sales.len();
    let fin = paired_rows::<FinMachine>()?;
    if fin != rules_rows::<FinMachine>() {
        return Err("Financial: paired walk and rules walk disagree".to_string());
    }
    rows += fin.len();
    let lc = paired_rows::<LcMachine>()?;
    if lc != rules_rows::<LcMachine>() {
        return Err("LetterOfCredit: paired walk and rules walk disagree".to_string());
    }
    rows += lc.len();
    Ok(OracleStats { rows })
}
