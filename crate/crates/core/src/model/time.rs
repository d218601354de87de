//! Integer simulation time and the physical units built on it.
//!
//! All time arithmetic in the kernel is done on whole nanoseconds. Division
//! results round to the nearest nanosecond (half rounds up).

use std::fmt;
use std::ops::{Add, AddAssign, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const NANOS_PER_MICRO: u64 = 1_000;
const NANOS_PER_MILLI: u64 = 1_000_000;
const NANOS_PER_SEC: u64 = 1_000_000_000;

/// Nanoseconds since the start of a simulation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Time(u64);

impl Time {
    pub const ZERO: Time = Time(0);
    /// Sentinel for an unbounded delay (a path that cannot currently be traversed).
    pub const INFINITE: Time = Time(u64::MAX);

    pub const fn from_nanos(ns: u64) -> Self {
        Time(ns)
    }

    pub const fn from_micros(us: u64) -> Self {
        Time(us * NANOS_PER_MICRO)
    }

    pub const fn from_millis(ms: u64) -> Self {
        Time(ms * NANOS_PER_MILLI)
    }

    pub const fn from_secs(s: u64) -> Self {
        Time(s * NANOS_PER_SEC)
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / NANOS_PER_SEC as f64
    }

    pub fn as_millis_f64(self) -> f64 {
        self.0 as f64 / NANOS_PER_MILLI as f64
    }

    pub const fn is_infinite(self) -> bool {
        self.0 == u64::MAX
    }

    pub fn checked_add(self, rhs: Time) -> Option<Time> {
        self.0.checked_add(rhs.0).map(Time)
    }

    pub fn checked_sub(self, rhs: Time) -> Option<Time> {
        self.0.checked_sub(rhs.0).map(Time)
    }

    /// Saturates at [`Time::INFINITE`].
    pub fn saturating_add(self, rhs: Time) -> Time {
        Time(self.0.saturating_add(rhs.0))
    }

    pub fn saturating_sub(self, rhs: Time) -> Time {
        Time(self.0.saturating_sub(rhs.0))
    }

    /// `self / divisor`, rounded to the nearest nanosecond.
    pub fn div_round(self, divisor: u64) -> Time {
        assert!(divisor > 0, "division of time by zero");
        Time(div_round_u128(self.0 as u128, divisor as u128) as u64)
    }

    /// `self * num / den`, rounded to the nearest nanosecond.
    pub fn mul_div_round(self, num: u64, den: u64) -> Time {
        assert!(den > 0, "division of time by zero");
        let v = div_round_u128(self.0 as u128 * num as u128, den as u128);
        Time(u64::try_from(v).unwrap_or(u64::MAX))
    }
}

pub(crate) fn div_round_u128(num: u128, den: u128) -> u128 {
    (num + den / 2) / den
}

impl Add for Time {
    type Output = Time;

    fn add(self, rhs: Time) -> Time {
        Time(self.0.checked_add(rhs.0).expect("time overflow"))
    }
}

impl Sub for Time {
    type Output = Time;

    fn sub(self, rhs: Time) -> Time {
        Time(self.0.checked_sub(rhs.0).expect("negative time"))
    }
}

impl AddAssign for Time {
    fn add_assign(&mut self, rhs: Time) {
        *self = *self + rhs;
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ns = self.0;
        if self.is_infinite() {
            write!(f, "inf")
        } else if ns == 0 {
            write!(f, "0s")
        } else if ns.is_multiple_of(NANOS_PER_SEC) {
            write!(f, "{}s", ns / NANOS_PER_SEC)
        } else if ns.is_multiple_of(NANOS_PER_MILLI) {
            write!(f, "{}ms", ns / NANOS_PER_MILLI)
        } else if ns.is_multiple_of(NANOS_PER_MICRO) {
            write!(f, "{}us", ns / NANOS_PER_MICRO)
        } else {
            write!(f, "{ns}ns")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnitError {
    #[error("`{0}` is not a quantity (expected a number followed by a unit)")]
    Malformed(String),
    #[error("unknown unit `{unit}` in `{input}`")]
    UnknownUnit { input: String, unit: String },
    #[error("`{0}` is finer than the representable resolution")]
    TooPrecise(String),
    #[error("`{0}` is out of range")]
    Overflow(String),
}

impl FromStr for Time {
    type Err = UnitError;

    /// Accepts `ns`, `us`/`µs`, `ms` and `s` suffixes with an optional decimal fraction.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (number, unit) = split_quantity(s)?;
        let scale = match unit {
            "ns" => 1,
            "us" | "µs" => NANOS_PER_MICRO,
            "ms" => NANOS_PER_MILLI,
            "s" => NANOS_PER_SEC,
            _ => {
                return Err(UnitError::UnknownUnit {
                    input: s.to_string(),
                    unit: unit.to_string(),
                })
            }
        };
        scale_decimal(number, scale, s).map(Time)
    }
}

/// Link or flow rate in bits per second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bandwidth(u64);

impl Bandwidth {
    pub const fn bps(bits_per_sec: u64) -> Self {
        Bandwidth(bits_per_sec)
    }

    pub const fn mbps(m: u64) -> Self {
        Bandwidth(m * 1_000_000)
    }

    pub const fn gbps(g: u64) -> Self {
        Bandwidth(g * 1_000_000_000)
    }

    pub const fn as_bps(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.0;
        if b != 0 && b.is_multiple_of(1_000_000_000) {
            write!(f, "{}Gbps", b / 1_000_000_000)
        } else if b != 0 && b.is_multiple_of(1_000_000) {
            write!(f, "{}Mbps", b / 1_000_000)
        } else if b != 0 && b.is_multiple_of(1_000) {
            write!(f, "{}kbps", b / 1_000)
        } else {
            write!(f, "{b}bps")
        }
    }
}

impl FromStr for Bandwidth {
    type Err = UnitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (number, unit) = split_quantity(s)?;
        let scale = match unit {
            "bps" => 1,
            "kbps" | "Kbps" => 1_000,
            "Mbps" => 1_000_000,
            "Gbps" => 1_000_000_000,
            _ => {
                return Err(UnitError::UnknownUnit {
                    input: s.to_string(),
                    unit: unit.to_string(),
                })
            }
        };
        scale_decimal(number, scale, s).map(Bandwidth)
    }
}

/// Parses a data size into bits. `B`/`KB`/`MB` are bytes (decimal multiples),
/// `b`/`kb`/`Mb`/`Gb` are bits.
pub fn parse_bits(s: &str) -> Result<u64, UnitError> {
    let (number, unit) = split_quantity(s)?;
    let scale = match unit {
        "b" => 1,
        "kb" | "Kb" => 1_000,
        "Mb" => 1_000_000,
        "Gb" => 1_000_000_000,
        "B" => 8,
        "KB" | "kB" => 8_000,
        "MB" => 8_000_000,
        "GB" => 8_000_000_000,
        _ => {
            return Err(UnitError::UnknownUnit {
                input: s.to_string(),
                unit: unit.to_string(),
            })
        }
    };
    scale_decimal(number, scale, s)
}

/// Time to serialize `packet_length` bits onto a link of the given bandwidth,
/// rounded to the nearest nanosecond.
pub fn transmission_delay(packet_length: u64, bandwidth: Bandwidth) -> Result<Time, ZeroBandwidth> {
    if bandwidth.0 == 0 {
        return Err(ZeroBandwidth);
    }
    let ns = div_round_u128(packet_length as u128 * NANOS_PER_SEC as u128, bandwidth.0 as u128);
    Ok(Time(u64::try_from(ns).unwrap_or(u64::MAX)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("bandwidth must be positive")]
pub struct ZeroBandwidth;

fn split_quantity(s: &str) -> Result<(&str, &str), UnitError> {
    let s = s.trim();
    let idx = s
        .find(|c: char| !(c.is_ascii_digit() || c == '.'))
        .ok_or_else(|| UnitError::Malformed(s.to_string()))?;
    let (number, unit) = s.split_at(idx);
    if number.is_empty() {
        return Err(UnitError::Malformed(s.to_string()));
    }
    Ok((number, unit.trim()))
}

fn scale_decimal(number: &str, scale: u64, input: &str) -> Result<u64, UnitError> {
    let (int_part, frac_part) = match number.split_once('.') {
        Some((i, f)) => (i, f),
        None => (number, ""),
    };
    if frac_part.contains('.') || (int_part.is_empty() && frac_part.is_empty()) {
        return Err(UnitError::Malformed(input.to_string()));
    }
    let overflow = || UnitError::Overflow(input.to_string());
    let int: u64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| overflow())?
    };
    let mut value = int.checked_mul(scale).ok_or_else(overflow)?;
    if !frac_part.is_empty() {
        let digits = frac_part.len() as u32;
        let frac: u128 = frac_part.parse().map_err(|_| overflow())?;
        let denom = 10u128.checked_pow(digits).ok_or_else(overflow)?;
        let scaled = frac * scale as u128;
        if !scaled.is_multiple_of(denom) {
            return Err(UnitError::TooPrecise(input.to_string()));
        }
        let add = u64::try_from(scaled / denom).map_err(|_| overflow())?;
        value = value.checked_add(add).ok_or_else(overflow)?;
    }
    Ok(value)
}
