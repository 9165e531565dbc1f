//! Sales contract: buyer/seller orders and invoices.

use std::collections::BTreeMap;

use crate::address::Address;
use crate::contracts::ContractError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderStatus {
    Created,
    Confirmed,
    Received,
    Cancelled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Order {
    pub order_id: String,
    pub description: String,
    pub status: OrderStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvoiceStatus {
    Issued,
    Confirmed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invoice {
    pub invoice_id: String,
    pub order_id: String,
    pub amount: u128,
    pub status: InvoiceStatus,
}

/// State machine: orders walk Created→Confirmed→Received with
/// Cancelled reachable from Created/Confirmed; invoices walk
/// Issued→Confirmed. Parties are fixed at initialization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SalesContract {
    parties: Option<(Address, Address)>,
    orders: BTreeMap<String, Order>,
    invoices: BTreeMap<String, Invoice>,
}

impl SalesContract {
    pub fn new() -> SalesContract {
        SalesContract::default()
    }

    pub fn initialized(&self) -> bool {
        self.parties.is_some()
    }

    pub fn buyer(&self) -> Option<Address> {
        self.parties.map(|(buyer, _)| buyer)
    }

    pub fn seller(&self) -> Option<Address> {
        self.parties.map(|(_, seller)| seller)
    }

    pub fn order(&self, order_id: &str) -> Option<&Order> {
        self.orders.get(order_id)
    }

    pub fn invoice(&self, invoice_id: &str) -> Option<&Invoice> {
        self.invoices.get(invoice_id)
    }

    pub fn set_sales_contract(
        &mut self,
        buyer: Address,
        seller: Address,
    ) -> Result<(), ContractError> {
        if self.parties.is_some() {
            return Err(ContractError::AlreadyInitialized);
        }
        if buyer == seller {
            return Err(ContractError::SameParty);
        }
        self.parties = Some((buyer, seller));
        Ok(())
    }

    fn require_buyer(&self, caller: Address) -> Result<(), ContractError> {
        if self.buyer() != Some(caller) {
            return Err(ContractError::NotBuyer);
        }
        Ok(())
    }

    fn require_seller(&self, caller: Address) -> Result<(), ContractError> {
        if self.seller() != Some(caller) {
            return Err(ContractError::NotSeller);
        }
        Ok(())
    }

    pub fn add_order(
        &mut self,
        caller: Address,
        order_id: &str,
        description: &str,
    ) -> Result<(), ContractError> {
        if self.parties.is_none() {
            return Err(ContractError::NotInitialized);
        }
        self.require_buyer(caller)?;
        if self.orders.contains_key(order_id) {
            return Err(ContractError::DuplicateOrder);
        }
        self.orders.insert(
            order_id.to_string(),
            Order {
                order_id: order_id.to_string(),
                description: description.to_string(),
                status: OrderStatus::Created,
            },
        );
        Ok(())
    }

    pub fn confirm_order(&mut self, caller: Address, order_id: &str) -> Result<(), ContractError> {
        self.require_seller(caller)?;
        let order = self.orders.get_mut(order_id).ok_or(ContractError::NoSuchOrder)?;
        if order.status != OrderStatus::Created {
            return Err(ContractError::BadState);
        }
        order.status = OrderStatus::Confirmed;
        Ok(())
    }

    pub fn cancel_order(&mut self, caller: Address, order_id: &str) -> Result<(), ContractError> {
        self.require_buyer(caller)?;
        let order = self.orders.get_mut(order_id).ok_or(ContractError::NoSuchOrder)?;
        if !matches!(order.status, OrderStatus::Created | OrderStatus::Confirmed) {
            return Err(ContractError::BadState);
        }
        order.status = OrderStatus::Cancelled;
        Ok(())
    }

    pub fn receive_order(&mut self, caller: Address, order_id: &str) -> Result<(), ContractError> {
        self.require_buyer(caller)?;
        let order = self.orders.get_mut(order_id).ok_or(ContractError::NoSuchOrder)?;
        if order.status != OrderStatus::Confirmed {
            return Err(ContractError::BadState);
        }
        order.status = OrderStatus::Received;
        Ok(())
    }

    /// View: id presence, independent of status.
    pub fn order_exists(&self, order_id: &str) -> bool {
        self.orders.contains_key(order_id)
    }

    pub fn create_invoice(
        &mut self,
        caller: Address,
        invoice_id: &str,
        order_id: &str,
        amount: u128,
    ) -> Result<(), ContractError> {
        self.require_seller(caller)?;
        let order = self.orders.get(order_id).ok_or(ContractError::NoSuchOrder)?;
        if !matches!(order.status, OrderStatus::Confirmed | OrderStatus::Received) {
            return Err(ContractError::BadState);
        }
        if self.invoices.contains_key(invoice_id) {
            return Err(ContractError::DuplicateInvoice);
        }
        if amount == 0 {
            return Err(ContractError::ZeroAmount);
        }
        self.invoices.insert(
            invoice_id.to_string(),
            Invoice {
                invoice_id: invoice_id.to_string(),
                order_id: order_id.to_string(),
                amount,
                status: InvoiceStatus::Issued,
            },
        );
        Ok(())
    }

    pub fn confirm_invoice(
        &mut self,
        caller: Address,
        invoice_id: &str,
    ) -> Result<(), ContractError> {
        self.require_buyer(caller)?;
        let invoice = self.invoices.get_mut(invoice_id).ok_or(ContractError::NoSuchInvoice)?;
        if invoice.status != InvoiceStatus::Issued {
            return Err(ContractError::BadState);
        }
        invoice.status = InvoiceStatus::Confirmed;
        Ok(())
    }
}
