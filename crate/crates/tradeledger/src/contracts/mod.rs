//! The three trade-finance contracts as deterministic state machines.
//!
//! Every mutating operation checks its preconditions in a fixed order
//! (role, then existence, then state) and either applies exactly one
//! transition or reverts leaving state untouched. Views never mutate.

mod financial;
mod letter_of_credit;
mod sales;

use std::fmt;

use thiserror::Error;

use crate::address::Address;
use crate::docstore::ContentHash;

pub use financial::{AgreementStatus, FinancialAgreement};
pub use letter_of_credit::{LcStatus, LetterOfCredit, TradeDocument};
pub use sales::{Invoice, InvoiceStatus, Order, OrderStatus, SalesContract};

/// The three deployable contract kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ContractKind {
    Sales,
    Financial,
    LetterOfCredit,
}

impl ContractKind {
    pub const ALL: [ContractKind; 3] =
        [ContractKind::Sales, ContractKind::Financial, ContractKind::LetterOfCredit];

    pub fn name(self) -> &'static str {
        match self {
            ContractKind::Sales => "Sales",
            ContractKind::Financial => "Financial",
            ContractKind::LetterOfCredit => "LetterOfCredit",
        }
    }

    pub fn parse(text: &str) -> Option<ContractKind> {
        match text {
            "Sales" => Some(ContractKind::Sales),
            "Financial" => Some(ContractKind::Financial),
            "LetterOfCredit" => Some(ContractKind::LetterOfCredit),
            _ => None,
        }
    }
}

impl fmt::Display for ContractKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Revert reasons across all three contracts. `name()` is the stable
/// identifier scenarios use in `expect-revert` annotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ContractError {
    #[error("contract already initialized")]
    AlreadyInitialized,
    #[error("buyer and seller must differ")]
    SameParty,
    #[error("contract not initialized")]
    NotInitialized,
    #[error("caller is not the buyer")]
    NotBuyer,
    #[error("caller is not the seller")]
    NotSeller,
    #[error("order id already exists")]
    DuplicateOrder,
    #[error("no such order")]
    NoSuchOrder,
    #[error("operation not allowed in current state")]
    BadState,
    #[error("invoice id already exists")]
    DuplicateInvoice,
    #[error("no such invoice")]
    NoSuchInvoice,
    #[error("amount must be positive")]
    ZeroAmount,
    #[error("parties must be pairwise distinct")]
    DuplicateParty,
    #[error("caller is not a party to the agreement")]
    NotParty,
    #[error("caller already confirmed")]
    AlreadyConfirmed,
    #[error("at least one required document type is needed")]
    NoRequiredDocs,
    #[error("caller is not the beneficiary")]
    NotBeneficiary,
    #[error("caller is not the issuing bank")]
    NotIssuingBank,
    #[error("no such document")]
    NoSuchDocument,
    #[error("document already validated")]
    AlreadyValid,
    #[error("document index out of range")]
    IndexOutOfRange,
}

impl ContractError {
    /// Every revert name, for validating `expect-revert` annotations.
    pub const NAMES: [&'static str; 20] = [
        "AlreadyInitialized",
        "SameParty",
        "NotInitialized",
        "NotBuyer",
        "NotSeller",
        "DuplicateOrder",
        "NoSuchOrder",
        "BadState",
        "DuplicateInvoice",
        "NoSuchInvoice",
        "ZeroAmount",
        "DuplicateParty",
        "NotParty",
        "AlreadyConfirmed",
        "NoRequiredDocs",
        "NotBeneficiary",
        "NotIssuingBank",
        "NoSuchDocument",
        "AlreadyValid",
        "IndexOutOfRange",
    ];

    /// Stable revert name, matching the enum variant.
    pub fn name(self) -> &'static str {
        match self {
            ContractError::AlreadyInitialized => "AlreadyInitialized",
            ContractError::SameParty => "SameParty",
            ContractError::NotInitialized => "NotInitialized",
            ContractError::NotBuyer => "NotBuyer",
            ContractError::NotSeller => "NotSeller",
            ContractError::DuplicateOrder => "DuplicateOrder",
            ContractError::NoSuchOrder => "NoSuchOrder",
            ContractError::BadState => "BadState",
            ContractError::DuplicateInvoice => "DuplicateInvoice",
            ContractError::NoSuchInvoice => "NoSuchInvoice",
            ContractError::ZeroAmount => "ZeroAmount",
            ContractError::DuplicateParty => "DuplicateParty",
            ContractError::NotParty => "NotParty",
            ContractError::AlreadyConfirmed => "AlreadyConfirmed",
            ContractError::NoRequiredDocs => "NoRequiredDocs",
            ContractError::NotBeneficiary => "NotBeneficiary",
            ContractError::NotIssuingBank => "NotIssuingBank",
            ContractError::NoSuchDocument => "NoSuchDocument",
            ContractError::AlreadyValid => "AlreadyValid",
            ContractError::IndexOutOfRange => "IndexOutOfRange",
        }
    }
}

/// A typed mutating call. `function_name()` keys into the gas schedule;
/// `payload_len()` is the character count that variable-cost functions
/// are metered on (0 for every fixed-cost function).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContractCall {
    SetSalesContract { buyer: Address, seller: Address },
    AddOrder { order_id: String, description: String },
    ConfirmOrder { order_id: String },
    CancelOrder { order_id: String },
    ReceiveOrder { order_id: String },
    CreateInvoice { invoice_id: String, order_id: String, amount: u128 },
    ConfirmInvoice { invoice_id: String },
    SetFinancialAgreementParties { applicant: Address, financier: Address, beneficiary: Address },
    ConfirmAgreement,
    InitializeContract {
        applicant: Address,
        beneficiary: Address,
        issuing_bank: Address,
        amount: u128,
        required_doc_types: Vec<String>,
    },
    AddDocument { content_hash: ContentHash, doc_type: String },
    ValidateDocument { doc_id: u64 },
}

impl ContractCall {
    pub fn kind(&self) -> ContractKind {
        match self {
            ContractCall::SetSalesContract { .. }
            | ContractCall::AddOrder { .. }
            | ContractCall::ConfirmOrder { .. }
            | ContractCall::CancelOrder { .. }
            | ContractCall::ReceiveOrder { .. }
            | ContractCall::CreateInvoice { .. }
            | ContractCall::ConfirmInvoice { .. } => ContractKind::Sales,
            ContractCall::SetFinancialAgreementParties { .. }
            | ContractCall::ConfirmAgreement => ContractKind::Financial,
            ContractCall::InitializeContract { .. }
            | ContractCall::AddDocument { .. }
            | ContractCall::ValidateDocument { .. } => ContractKind::LetterOfCredit,
        }
    }

    pub fn function_name(&self) -> &'static str {
        match self {
            ContractCall::SetSalesContract { .. } => "setSalesContract",
            ContractCall::AddOrder { .. } => "addOrder",
            ContractCall::ConfirmOrder { .. } => "confirmOrder",
            ContractCall::CancelOrder { .. } => "cancelOrder",
            ContractCall::ReceiveOrder { .. } => "receiveOrder",
            ContractCall::CreateInvoice { .. } => "createInvoice",
            ContractCall::ConfirmInvoice { .. } => "confirmInvoice",
            ContractCall::SetFinancialAgreementParties { .. } => "setFinancialAgreementParties",
            ContractCall::ConfirmAgreement => "confirmAgreement",
            ContractCall::InitializeContract { .. } => "initializeContract",
            ContractCall::AddDocument { .. } => "addDocument",
            ContractCall::ValidateDocument { .. } => "validateDocument",
        }
    }

    /// Characters of variable payload this call carries.
    pub fn payload_len(&self) -> u64 {
        match self {
            ContractCall::AddOrder { description, .. } => description.chars().count() as u64,
            _ => 0,
        }
    }
}

/// A typed view (read-only, gas 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViewCall {
    OrderExists { order_id: String },
    GetNumberOfDocuments,
    GetDocumentId { index: u64 },
    IsDocumentValid { doc_id: u64 },
}

impl ViewCall {
    pub fn kind(&self) -> ContractKind {
        match self {
            ViewCall::OrderExists { .. } => ContractKind::Sales,
            ViewCall::GetNumberOfDocuments
            | ViewCall::GetDocumentId { .. }
            | ViewCall::IsDocumentValid { .. } => ContractKind::LetterOfCredit,
        }
    }

    pub fn function_name(&self) -> &'static str {
        match self {
            ViewCall::OrderExists { .. } => "orderExists",
            ViewCall::GetNumberOfDocuments => "getNumberOfDocuments",
            ViewCall::GetDocumentId { .. } => "getDocumentID",
            ViewCall::IsDocumentValid { .. } => "IsDocumentValid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViewResult {
    Bool(bool),
    Int(u64),
    Hash(ContentHash),
}

impl fmt::Display for ViewResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViewResult::Bool(b) => write!(f, "{b}"),
            ViewResult::Int(n) => write!(f, "{n}"),
            ViewResult::Hash(h) => write!(f, "{h}"),
        }
    }
}

/// Event raised by a successful call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractEvent {
    /// All required document types of a letter of credit are validated;
    /// downstream settlement may proceed.
    SettlementReady,
}

/// What a successful mutating call produced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallOutcome {
    /// Return value, for the calls that have one (document index).
    pub returned: Option<u64>,
    pub events: Vec<ContractEvent>,
}

impl CallOutcome {
    fn unit() -> CallOutcome {
        CallOutcome::default()
    }
}

/// A deployed contract instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContractInstance {
    Sales(SalesContract),
    Financial(FinancialAgreement),
    LetterOfCredit(LetterOfCredit),
}

impl ContractInstance {
    pub fn new(kind: ContractKind) -> ContractInstance {
        match kind {
            ContractKind::Sales => ContractInstance::Sales(SalesContract::new()),
            ContractKind::Financial => ContractInstance::Financial(FinancialAgreement::new()),
            ContractKind::LetterOfCredit => {
                ContractInstance::LetterOfCredit(LetterOfCredit::new())
            }
        }
    }

    pub fn kind(&self) -> ContractKind {
        match self {
            ContractInstance::Sales(_) => ContractKind::Sales,
            ContractInstance::Financial(_) => ContractKind::Financial,
            ContractInstance::LetterOfCredit(_) => ContractKind::LetterOfCredit,
        }
    }

    /// Execute a mutating call. The caller must have routed the call to
    /// an instance of the matching kind.
    pub fn execute(
        &mut self,
        caller: Address,
        call: &ContractCall,
    ) -> Result<CallOutcome, ContractError> {
        debug_assert_eq!(call.kind(), self.kind(), "call routed to wrong contract kind");
        match (self, call) {
            (ContractInstance::Sales(c), ContractCall::SetSalesContract { buyer, seller }) => {
                c.set_sales_contract(*buyer, *seller).map(|()| CallOutcome::unit())
            }
            (ContractInstance::Sales(c), ContractCall::AddOrder { order_id, description }) => {
                c.add_order(caller, order_id, description).map(|()| CallOutcome::unit())
            }
            (ContractInstance::Sales(c), ContractCall::ConfirmOrder { order_id }) => {
                c.confirm_order(caller, order_id).map(|()| CallOutcome::unit())
            }
            (ContractInstance::Sales(c), ContractCall::CancelOrder { order_id }) => {
                c.cancel_order(caller, order_id).map(|()| CallOutcome::unit())
            }
            (ContractInstance::Sales(c), ContractCall::ReceiveOrder { order_id }) => {
                c.receive_order(caller, order_id).map(|()| CallOutcome::unit())
            }
            (
                ContractInstance::Sales(c),
                ContractCall::CreateInvoice { invoice_id, order_id, amount },
            ) => c
                .create_invoice(caller, invoice_id, order_id, *amount)
                .map(|()| CallOutcome::unit()),
            (ContractInstance::Sales(c), ContractCall::ConfirmInvoice { invoice_id }) => {
                c.confirm_invoice(caller, invoice_id).map(|()| CallOutcome::unit())
            }
            (
                ContractInstance::Financial(c),
                ContractCall::SetFinancialAgreementParties { applicant, financier, beneficiary },
            ) => c
                .set_parties(*applicant, *financier, *beneficiary)
                .map(|()| CallOutcome::unit()),
            (ContractInstance::Financial(c), ContractCall::ConfirmAgreement) => {
                c.confirm_agreement(caller).map(|()| CallOutcome::unit())
            }
            (
                ContractInstance::LetterOfCredit(c),
                ContractCall::InitializeContract {
                    applicant,
                    beneficiary,
                    issuing_bank,
                    amount,
                    required_doc_types,
                },
            ) => c
                .initialize(*applicant, *beneficiary, *issuing_bank, *amount, required_doc_types)
                .map(|()| CallOutcome::unit()),
            (
                ContractInstance::LetterOfCredit(c),
                ContractCall::AddDocument { content_hash, doc_type },
            ) => c.add_document(caller, *content_hash, doc_type).map(|doc_id| CallOutcome {
                returned: Some(doc_id),
                events: Vec::new(),
            }),
            (ContractInstance::LetterOfCredit(c), ContractCall::ValidateDocument { doc_id }) => {
                c.validate_document(caller, *doc_id).map(|completed| CallOutcome {
                    returned: None,
                    events: if completed {
                        vec![ContractEvent::SettlementReady]
                    } else {
                        Vec::new()
                    },
                })
            }
            _ => unreachable!("call routed to wrong contract kind"),
        }
    }

    /// Execute a view. Never mutates; meters zero gas by definition.
    pub fn view(&self, view: &ViewCall) -> Result<ViewResult, ContractError> {
        debug_assert_eq!(view.kind(), self.kind(), "view routed to wrong contract kind");
        match (self, view) {
            (ContractInstance::Sales(c), ViewCall::OrderExists { order_id }) => {
                Ok(ViewResult::Bool(c.order_exists(order_id)))
            }
            (ContractInstance::LetterOfCredit(c), ViewCall::GetNumberOfDocuments) => {
                Ok(ViewResult::Int(c.number_of_documents()))
            }
            (ContractInstance::LetterOfCredit(c), ViewCall::GetDocumentId { index }) => {
                c.document_id(*index).map(ViewResult::Hash)
            }
            (ContractInstance::LetterOfCredit(c), ViewCall::IsDocumentValid { doc_id }) => {
                c.is_document_valid(*doc_id).map(ViewResult::Bool)
            }
            _ => unreachable!("view routed to wrong contract kind"),
        }
    }
}
