//! A deterministic ledger simulator for a trade-finance contract suite.
//!
//! Three contracts — a sales agreement, a financial agreement, and a
//! letter of credit — run against a discrete-event chain with fixed
//! throughput and block interval. Every call is metered through a gas
//! schedule and priced as `gas × gas price`, in exact integer
//! arithmetic from wei up to display strings, so identical runs produce
//! identical receipts, fees, and reports.
//!
//! The crate is organized bottom-up:
//!
//! * [`units`] / [`address`] — wei amounts and 20-byte addresses.
//! * [`config`] — chain parameters (gas price, throughput, interval,
//!   exchange rate).
//! * [`gasmodel`] — the gas schedule, fee quotes, and cost reports.
//! * [`contracts`] — the three contract state machines.
//! * [`docstore`] — content-addressed document storage with bundle
//!   digests.
//! * [`ledger`] — transaction submission, block production, receipts.
//! * [`scenario`] — a line-oriented script format that drives all of the
//!   above and renders the resulting reports.

pub mod address;
pub mod config;
pub mod contracts;
pub mod docstore;
pub mod gasmodel;
pub mod ledger;
pub mod scenario;
pub mod units;

pub use address::Address;
pub use config::ChainConfig;
pub use contracts::{ContractError, ContractInstance, ContractKind};
pub use docstore::{ContentHash, DocStore};
pub use gasmodel::{FeeSource, GasSchedule};
pub use ledger::Ledger;
pub use scenario::ScenarioScript;
pub use units::WeiAmount;
