//! Financial agreement: three named parties, unanimous confirmation.

use std::collections::BTreeSet;

use crate::address::Address;
use crate::contracts::ContractError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgreementStatus {
    Unset,
    Proposed,
    Confirmed,
}

/// State machine: Unset → Proposed (parties fixed) → Confirmed once
/// every party has confirmed exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinancialAgreement {
    parties: Option<[Address; 3]>,
    confirmations: BTreeSet<Address>,
    status: AgreementStatus,
}

impl Default for FinancialAgreement {
    fn default() -> Self {
        FinancialAgreement {
            parties: None,
            confirmations: BTreeSet::new(),
            status: AgreementStatus::Unset,
        }
    }
}

impl FinancialAgreement {
    pub fn new() -> FinancialAgreement {
        FinancialAgreement::default()
    }

    pub fn status(&self) -> AgreementStatus {
        self.status
    }

    /// Applicant, financier, beneficiary — in that order.
    pub fn parties(&self) -> Option<[Address; 3]> {
        self.parties
    }

    pub fn has_confirmed(&self, party: Address) -> bool {
        self.confirmations.contains(&party)
    }

    pub fn set_parties(
        &mut self,
        applicant: Address,
        financier: Address,
        beneficiary: Address,
    ) -> Result<(), ContractError> {
        if self.status != AgreementStatus::Unset {
            return Err(ContractError::AlreadyInitialized);
        }
        if applicant == financier || applicant == beneficiary || financier == beneficiary {
            return Err(ContractError::DuplicateParty);
        }
        self.parties = Some([applicant, financier, beneficiary]);
        self.status = AgreementStatus::Proposed;
        Ok(())
    }

    pub fn confirm_agreement(&mut self, caller: Address) -> Result<(), ContractError> {
        if self.status == AgreementStatus::Unset {
            return Err(ContractError::NotInitialized);
        }
        let parties = self.parties.expect("proposed agreement has parties");
        if !parties.contains(&caller) {
            return Err(ContractError::NotParty);
        }
        if self.confirmations.contains(&caller) {
            return Err(ContractError::AlreadyConfirmed);
        }
        self.confirmations.insert(caller);
        if self.confirmations.len() == parties.len() {
            self.status = AgreementStatus::Confirmed;
        }
        Ok(())
    }
}
