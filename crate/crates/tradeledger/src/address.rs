//! 20-byte account/contract addresses.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A 20-byte opaque identifier, rendered as 0x-prefixed lowercase hex
/// (42 characters). Equality is byte equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address([u8; 20]);

impl Address {
    pub fn new(bytes: [u8; 20]) -> Self {
        Address(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }

    /// Handy for tests and fixtures: an address whose last byte is `tag`.
    pub fn from_tag(tag: u8) -> Self {
        let mut bytes = [0u8; 20];
        bytes[19] = tag;
        Address(bytes)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AddressParseError {
    #[error("address must start with 0x")]
    MissingPrefix,
    #[error("address must be 42 characters, got {0}")]
    BadLength(usize),
    #[error("address contains non-hex characters")]
    BadHex,
}

impl FromStr for Address {
    type Err = AddressParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if !s.starts_with("0x") && !s.starts_with("0X") {
            return Err(AddressParseError::MissingPrefix);
        }
        if s.len() != 42 {
            return Err(AddressParseError::BadLength(s.len()));
        }
        let mut bytes = [0u8; 20];
        hex::decode_to_slice(&s[2..], &mut bytes).map_err(|_| AddressParseError::BadHex)?;
        Ok(Address(bytes))
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}
