use std::fmt;
use std::ops::{Add, Neg};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact angle `numerator * pi / 2^log2_den`, kept in reduced form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicAngle {
    numerator: i64,
    log2_den: u32,
}

impl DyadicAngle {
    pub const ZERO: Self = Self { numerator: 0, log2_den: 0 };
    pub const PI: Self = Self { numerator: 1, log2_den: 0 };

    pub fn new(numerator: i64, log2_den: u32) -> Self {
        let mut a = Self { numerator, log2_den };
        a.reduce();
        a
    }

    fn reduce(&mut self) {
        if self.numerator == 0 {
            self.log2_den = 0;
            return;
        }
        let tz = self.numerator.trailing_zeros().min(self.log2_den);
        self.numerator >>= tz;
        self.log2_den -= tz;
    }

    pub fn numerator(self) -> i64 {
        self.numerator
    }

    pub fn log2_den(self) -> u32 {
        self.log2_den
    }

    pub fn is_zero(self) -> bool {
        self.numerator == 0
    }

    /// Same angle modulo `2 pi`, in `(-pi, pi]`.
    pub fn normalized(self) -> Self {
        let period = 1i64 << (self.log2_den + 1);
        let half = 1i64 << self.log2_den;
        let mut n = self.numerator.rem_euclid(period);
        if n > half {
            n -= period;
        }
        Self::new(n, self.log2_den)
    }

    pub fn radians(self) -> f64 {
        self.numerator as f64 * std::f64::consts::PI / (1u64 << self.log2_den) as f64
    }
}

impl Neg for DyadicAngle {
    type Output = Self;
    fn neg(self) -> Self {
        Self { numerator: -self.numerator, log2_den: self.log2_den }
    }
}

impl Add for DyadicAngle {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let b = self.log2_den.max(rhs.log2_den);
        let n = (self.numerator << (b - self.log2_den)) + (rhs.numerator << (b - rhs.log2_den));
        Self::new(n, b)
    }
}

/// `0`, `pi`, `-pi/4`, `3*pi/8`.
impl fmt::Display for DyadicAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.numerator;
        if n == 0 {
            return f.write_str("0");
        }
        match n {
            1 => f.write_str("pi")?,
            -1 => f.write_str("-pi")?,
            _ => write!(f, "{n}*pi")?,
        }
        if self.log2_den > 0 {
            write!(f, "/{}", 1u64 << self.log2_den)?;
        }
        Ok(())
    }
}

impl FromStr for DyadicAngle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse { line: 0, message: format!("malformed angle '{s}'") };
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t == "0" {
            return Ok(Self::ZERO);
        }
        let (num_part, den) = match t.split_once('/') {
            Some((a, d)) => (a, d.parse::<u64>().map_err(|_| bad())?),
            None => (t.as_str(), 1),
        };
        if !den.is_power_of_two() {
            return Err(bad());
        }
        let numerator = match num_part {
            "pi" => 1,
            "-pi" => -1,
            other => other.strip_suffix("*pi").and_then(|n| n.parse().ok()).ok_or_else(bad)?,
        };
        Ok(Self::new(numerator, den.trailing_zeros()))
    }
}
