//! Exact wei arithmetic and ETH decimal rendering.
//!
//! All fee math in this crate is integer-only. 1 ETH = 10^18 wei and
//! 1 gwei = 10^9 wei; amounts never go through floating point.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use thiserror::Error;

/// Wei per ETH.
pub const WEI_PER_ETH: u128 = 1_000_000_000_000_000_000;

/// Wei per gwei.
pub const WEI_PER_GWEI: u128 = 1_000_000_000;

/// A non-negative amount of wei.
///
/// Addition and multiplication are checked; overflowing a u128 means the
/// simulation was configured with absurd parameters, so we treat it as a
/// hard error rather than saturating silently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct WeiAmount(pub u128);

impl WeiAmount {
    pub const ZERO: WeiAmount = WeiAmount(0);

    pub fn from_wei(wei: u128) -> Self {
        WeiAmount(wei)
    }

    pub fn wei(self) -> u128 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// `gas * price`, exact.
    pub fn gas_times_price(gas: u64, price: WeiAmount) -> WeiAmount {
        let product = (gas as u128)
            .checked_mul(price.0)
            .expect("overflow computing gas * gas_price");
        WeiAmount(product)
    }

    /// Render as a plain decimal ETH string with no trailing zeros
    /// (`0.000106384`, `0`). This is the canonical display format for
    /// fees throughout the crate.
    pub fn to_eth_string(self) -> String {
        let whole = self.0 / WEI_PER_ETH;
        let frac = self.0 % WEI_PER_ETH;
        if frac == 0 {
            return whole.to_string();
        }
        let mut frac_str = format!("{frac:018}");
        while frac_str.ends_with('0') {
            frac_str.pop();
        }
        format!("{whole}.{frac_str}")
    }

    /// Parse a plain decimal ETH string (`0.00010638`, `2`, `0`) into wei,
    /// exactly. At most 18 fractional digits are representable.
    pub fn from_eth_str(s: &str) -> Result<Self, AmountParseError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(AmountParseError::Empty);
        }
        let (whole_str, frac_str) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        if frac_str.len() > 18 {
            return Err(AmountParseError::TooPrecise(s.to_string()));
        }
        let digits = |part: &str| part.is_empty() || part.bytes().all(|b| b.is_ascii_digit());
        if !digits(whole_str) || !digits(frac_str) || (whole_str.is_empty() && frac_str.is_empty())
        {
            return Err(AmountParseError::Malformed(s.to_string()));
        }
        let whole: u128 = if whole_str.is_empty() {
            0
        } else {
            whole_str
                .parse()
                .map_err(|_| AmountParseError::Malformed(s.to_string()))?
        };
        let mut frac: u128 = 0;
        if !frac_str.is_empty() {
            let padded = format!("{frac_str:0<18}");
            frac = padded
                .parse()
                .map_err(|_| AmountParseError::Malformed(s.to_string()))?;
        }
        let wei = whole
            .checked_mul(WEI_PER_ETH)
            .and_then(|w| w.checked_add(frac))
            .ok_or_else(|| AmountParseError::Malformed(s.to_string()))?;
        Ok(WeiAmount(wei))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AmountParseError {
    #[error("empty amount")]
    Empty,
    #[error("malformed decimal amount `{0}`")]
    Malformed(String),
    #[error("amount `{0}` has more than 18 fractional digits")]
    TooPrecise(String),
}

impl Add for WeiAmount {
    type Output = WeiAmount;

    fn add(self, rhs: WeiAmount) -> WeiAmount {
        WeiAmount(self.0.checked_add(rhs.0).expect("overflow in wei addition"))
    }
}

impl AddAssign for WeiAmount {
    fn add_assign(&mut self, rhs: WeiAmount) {
        *self = *self + rhs;
    }
}

impl Sum for WeiAmount {
    fn sum<I: Iterator<Item = WeiAmount>>(iter: I) -> WeiAmount {
        iter.fold(WeiAmount::ZERO, |acc, x| acc + x)
    }
}

impl fmt::Display for WeiAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
