use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of fixed-point units in one percent.
pub const UNITS_PER_PERCENT: u64 = 1_000_000;

/// Largest rate a matrix cell may carry, in fixed-point units.
pub const MAX_CELL_UNITS: u64 = 100 * UNITS_PER_PERCENT;

const MAX_DECIMALS: usize = 6;

/// A withholding-tax rate in exact fixed-point form: one unit is 10^-6 percent.
///
/// Also used for path totals, which are sums of cell rates and may exceed 100%.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rate(u64);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RateParseError {
    #[error("empty value")]
    Empty,
    #[error("negative rate `{0}`")]
    Negative(String),
    #[error("`{0}` is not a decimal number")]
    NotDecimal(String),
    #[error("`{0}` has more than 6 decimal places")]
    TooPrecise(String),
    #[error("`{0}` is too large")]
    Overflow(String),
}

impl Rate {
    pub const ZERO: Rate = Rate(0);

    pub const fn from_units(units: u64) -> Self {
        Rate(units)
    }

    /// Whole-percent constructor.
    pub const fn from_percent(percent: u64) -> Self {
        Rate(percent * UNITS_PER_PERCENT)
    }

    pub const fn units(self) -> u64 {
        self.0
    }

    pub fn as_percent_f64(self) -> f64 {
        self.0 as f64 / UNITS_PER_PERCENT as f64
    }

    /// True when the value is a legal matrix cell (0..=100 percent).
    pub fn is_cell_rate(self) -> bool {
        self.0 <= MAX_CELL_UNITS
    }

    pub fn checked_sub(self, other: Rate) -> Option<Rate> {
        self.0.checked_sub(other.0).map(Rate)
    }
}

impl FromStr for Rate {
    type Err = RateParseError;

    /// Parses a plain decimal percent such as `20`, `12.5` or `5.000001`.
    /// No exponent, no sign other than a rejected leading `-`, at most six
    /// fractional digits. The conversion never touches floating point.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.is_empty() {
            return Err(RateParseError::Empty);
        }
        if let Some(rest) = t.strip_prefix('-') {
            if !rest.is_empty() {
                return Err(RateParseError::Negative(t.to_string()));
            }
        }
        let t_unsigned = t.strip_prefix('+').unwrap_or(t);
        let (int_part, frac_part) = match t_unsigned.split_once('.') {
            Some((i, f)) => (i, f),
            None => (t_unsigned, ""),
        };
        let digits_ok = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        if (int_part.is_empty() && frac_part.is_empty()) || !digits_ok(int_part) || !digits_ok(frac_part) {
            return Err(RateParseError::NotDecimal(t.to_string()));
        }
        let frac_trimmed = frac_part.trim_end_matches('0');
        if frac_trimmed.len() > MAX_DECIMALS {
            return Err(RateParseError::TooPrecise(t.to_string()));
        }
        let overflow = || RateParseError::Overflow(t.to_string());
        let whole: u64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| overflow())?
        };
        let mut frac: u64 = 0;
        for b in frac_trimmed.bytes() {
            frac = frac * 10 + u64::from(b - b'0');
        }
        frac *= 10u64.pow((MAX_DECIMALS - frac_trimmed.len()) as u32);
        whole
            .checked_mul(UNITS_PER_PERCENT)
            .and_then(|w| w.checked_add(frac))
            .map(Rate)
            .ok_or_else(overflow)
    }
}

impl fmt::Display for Rate {
    /// Shortest exact decimal: `20`, `12.5`, `5.000001`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / UNITS_PER_PERCENT;
        let frac = self.0 % UNITS_PER_PERCENT;
        if frac == 0 {
            write!(f, "{whole}")
        } else {
            let digits = format!("{frac:06}");
            write!(f, "{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl Serialize for Rate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The three payment types a rate matrix can describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IncomeType {
    Dividends,
    Interest,
    Royalties,
}

impl IncomeType {
    pub const ALL: [IncomeType; 3] = [IncomeType::Dividends, IncomeType::Interest, IncomeType::Royalties];

    pub fn as_str(self) -> &'static str {
        match self {
            IncomeType::Dividends => "dividends",
            IncomeType::Interest => "interest",
            IncomeType::Royalties => "royalties",
        }
    }
}

impl fmt::Display for IncomeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IncomeType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dividends" | "dividend" => Ok(IncomeType::Dividends),
            "interest" => Ok(IncomeType::Interest),
            "royalties" | "royalty" => Ok(IncomeType::Royalties),
            other => Err(format!("unknown income type `{other}`")),
        }
    }
}
