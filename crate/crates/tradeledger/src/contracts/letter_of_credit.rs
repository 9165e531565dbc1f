//! Letter of credit: document collection and bank validation.

use std::collections::BTreeSet;

use crate::address::Address;
use crate::contracts::ContractError;
use crate::docstore::ContentHash;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcStatus {
    Unset,
    Issued,
    DocumentsComplete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeDocument {
    /// Position in the document list (0-based insertion order).
    pub doc_id: u64,
    pub content_hash: ContentHash,
    pub doc_type: String,
    /// Monotone: set once by the issuing bank, never cleared.
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct LcTerms {
    applicant: Address,
    beneficiary: Address,
    issuing_bank: Address,
    amount: u128,
    required_doc_types: BTreeSet<String>,
}

/// State machine: Unset → Issued (terms fixed) → DocumentsComplete once
/// every required document type has at least one bank-validated
/// document. Documents may keep arriving after completion; the
/// completion transition fires at most once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LetterOfCredit {
    terms: Option<LcTerms>,
    documents: Vec<TradeDocument>,
    status: LcStatus,
}

impl Default for LetterOfCredit {
    fn default() -> Self {
        LetterOfCredit { terms: None, documents: Vec::new(), status: LcStatus::Unset }
    }
}

impl LetterOfCredit {
    pub fn new() -> LetterOfCredit {
        LetterOfCredit::default()
    }

    pub fn status(&self) -> LcStatus {
        self.status
    }

    pub fn documents(&self) -> &[TradeDocument] {
        &self.documents
    }

    pub fn required_doc_types(&self) -> Option<&BTreeSet<String>> {
        self.terms.as_ref().map(|t| &t.required_doc_types)
    }

    pub fn initialize(
        &mut self,
        applicant: Address,
        beneficiary: Address,
        issuing_bank: Address,
        amount: u128,
        required_doc_types: &[String],
    ) -> Result<(), ContractError> {
        if self.status != LcStatus::Unset {
            return Err(ContractError::AlreadyInitialized);
        }
        if applicant == beneficiary || applicant == issuing_bank || beneficiary == issuing_bank {
            return Err(ContractError::DuplicateParty);
        }
        if amount == 0 {
            return Err(ContractError::ZeroAmount);
        }
        if required_doc_types.is_empty() {
            return Err(ContractError::NoRequiredDocs);
        }
        self.terms = Some(LcTerms {
            applicant,
            beneficiary,
            issuing_bank,
            amount,
            required_doc_types: required_doc_types.iter().cloned().collect(),
        });
        self.status = LcStatus::Issued;
        Ok(())
    }

    /// Append a document (unvalidated) and return its index. Allowed as
    /// long as the letter is initialized; completion does not freeze the
    /// document list.
    pub fn add_document(
        &mut self,
        caller: Address,
        content_hash: ContentHash,
        doc_type: &str,
    ) -> Result<u64, ContractError> {
        let terms = self.terms.as_ref().ok_or(ContractError::NotInitialized)?;
        if caller != terms.beneficiary {
            return Err(ContractError::NotBeneficiary);
        }
        let doc_id = self.documents.len() as u64;
        self.documents.push(TradeDocument {
            doc_id,
            content_hash,
            doc_type: doc_type.to_string(),
            valid: false,
        });
        Ok(doc_id)
    }

    /// Mark a document valid. Returns true when this call completed the
    /// required set (the Issued → DocumentsComplete transition).
    pub fn validate_document(
        &mut self,
        caller: Address,
        doc_id: u64,
    ) -> Result<bool, ContractError> {
        let issuing_bank = self.terms.as_ref().map(|t| t.issuing_bank);
        if issuing_bank != Some(caller) {
            return Err(ContractError::NotIssuingBank);
        }
        let index = usize::try_from(doc_id).expect("doc_id fits usize");
        let doc = self.documents.get_mut(index).ok_or(ContractError::NoSuchDocument)?;
        if doc.valid {
            return Err(ContractError::AlreadyValid);
        }
        doc.valid = true;
        if self.status == LcStatus::Issued && self.required_types_covered() {
            self.status = LcStatus::DocumentsComplete;
            return Ok(true);
        }
        Ok(false)
    }

    fn required_types_covered(&self) -> bool {
        let terms = self.terms.as_ref().expect("issued letter has terms");
        terms
            .required_doc_types
            .iter()
            .all(|t| self.documents.iter().any(|d| d.valid && d.doc_type == *t))
    }

    /// View: insertion count, validated or not.
    pub fn number_of_documents(&self) -> u64 {
        self.documents.len() as u64
    }

    /// View: content hash at `index`.
    pub fn document_id(&self, index: u64) -> Result<ContentHash, ContractError> {
        usize::try_from(index)
            .ok()
            .and_then(|i| self.documents.get(i))
            .map(|d| d.content_hash)
            .ok_or(ContractError::IndexOutOfRange)
    }

    /// View: validation flag of one document.
    pub fn is_document_valid(&self, doc_id: u64) -> Result<bool, ContractError> {
        usize::try_from(doc_id)
            .ok()
            .and_then(|i| self.documents.get(i))
            .map(|d| d.valid)
            .ok_or(ContractError::NoSuchDocument)
    }
}
