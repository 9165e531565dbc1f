//! Chain parameters and the flat key=value config file.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::units::WeiAmount;

/// Default gas price: 1 gwei (0.000000001 ETH per gas unit).
pub const DEFAULT_GAS_PRICE_WEI: u128 = 1_000_000_000;
/// Default throughput: 15 transactions per second.
pub const DEFAULT_TPS: u64 = 15;
/// Default block interval: 15 seconds.
pub const DEFAULT_BLOCK_INTERVAL_S: u64 = 15;
/// Default exchange rate: 550.75 USD per ETH, in micro-USD.
pub const DEFAULT_ETH_USD_RATE_MICRO: u128 = 550_750_000;

/// Parameters of the simulated chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainConfig {
    pub gas_price_wei: WeiAmount,
    pub tps: u64,
    pub block_interval_s: u64,
    pub eth_usd_rate_micro: u128,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            gas_price_wei: WeiAmount(DEFAULT_GAS_PRICE_WEI),
            tps: DEFAULT_TPS,
            block_interval_s: DEFAULT_BLOCK_INTERVAL_S,
            eth_usd_rate_micro: DEFAULT_ETH_USD_RATE_MICRO,
        }
    }
}

impl ChainConfig {
    /// Transactions per block: tps * block_interval_s.
    pub fn block_capacity(&self) -> u64 {
        self.tps * self.block_interval_s
    }

    /// Fee for `gas` units at this config's gas price, exact.
    pub fn fee_wei(&self, gas: u64) -> WeiAmount {
        WeiAmount::gas_times_price(gas, self.gas_price_wei)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_str(&text)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.tps < 1 {
            return Err(ConfigError::OutOfRange("tps must be >= 1"));
        }
        if self.block_interval_s < 1 {
            return Err(ConfigError::OutOfRange("block_interval_s must be >= 1"));
        }
        Ok(())
    }
}

impl FromStr for ChainConfig {
    type Err = ConfigError;

    /// Parse the flat `key=value` config format. Missing keys take
    /// defaults; unknown or repeated keys are an error. Blank lines and
    /// `#` comments are permitted.
    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut config = ChainConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Malformed { line: line_no })?;
            let key = key.trim();
            let value = value.trim();
            if seen.contains(&key) {
                return Err(ConfigError::DuplicateKey {
                    line: line_no,
                    key: key.to_string(),
                });
            }
            let parse_u64 = |v: &str| {
                v.parse::<u64>().map_err(|_| ConfigError::BadValue {
                    line: line_no,
                    key: key.to_string(),
                    value: v.to_string(),
                })
            };
            let parse_u128 = |v: &str| {
                v.parse::<u128>().map_err(|_| ConfigError::BadValue {
                    line: line_no,
                    key: key.to_string(),
                    value: v.to_string(),
                })
            };
            let slot = match key {
                "gas_price_wei" => {
                    config.gas_price_wei = WeiAmount(parse_u128(value)?);
                    "gas_price_wei"
                }
                "tps" => {
                    config.tps = parse_u64(value)?;
                    "tps"
                }
                "block_interval_s" => {
                    config.block_interval_s = parse_u64(value)?;
                    "block_interval_s"
                }
                "eth_usd_rate_micro" => {
                    config.eth_usd_rate_micro = parse_u128(value)?;
                    "eth_usd_rate_micro"
                }
                other => {
                    return Err(ConfigError::UnknownKey {
                        line: line_no,
                        key: other.to_string(),
                    })
                }
            };
            seen.push(slot);
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config file {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line}: expected key=value")]
    Malformed { line: usize },
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: key `{key}` repeated")]
    DuplicateKey { line: usize, key: String },
    #[error("config line {line}: bad value `{value}` for `{key}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("{0}")]
    OutOfRange(&'static str),
}
