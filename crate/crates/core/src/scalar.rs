//! Exact scalar abstraction.
//!
//! All solver code is generic over [`Scalar`], which is satisfied by any
//! exact ordered field type from `num-rational` (`Ratio<i64>`, `Ratio<i128>`,
//! `BigRational`). Floating point types are deliberately not admitted: the
//! certificate identities are checked with exact equality.

use std::cmp::Ordering;
use std::fmt::{self, Debug, Display};
use std::ops::Add;
use std::str::FromStr;

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// An exact, totally ordered field element.
pub trait Scalar:
    Clone + Ord + Num + Signed + FromPrimitive + ToPrimitive + FromStr + Display + Debug + Send + Sync + 'static
{
    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("every exact scalar represents small integers")
    }

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    fn two() -> Self {
        Self::from_int(2)
    }

    fn midpoint(a: &Self, b: &Self) -> Self {
        (a.clone() + b.clone()) / Self::two()
    }

    /// Largest integer `<= self`.
    fn floor_int(&self) -> Self {
        let frac = self.clone() % Self::one();
        let down = self.clone() - frac.clone();
        if frac.is_negative() {
            down - Self::one()
        } else {
            down
        }
    }

    /// Smallest integer `>= self`.
    fn ceil_int(&self) -> Self {
        -(-self.clone()).floor_int()
    }

    fn is_integral(&self) -> bool {
        (self.clone() % Self::one()).is_zero()
    }

    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Parses `"p/q"`, `"p"` or a decimal literal such as `"-0.25"`.
    fn parse_exact(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Ok(v) = s.parse::<Self>() {
            return Some(v);
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int, frac) = body.split_once('.')?;
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{int}{frac}");
        let num: Self = digits.trim_start_matches('0').parse().ok().or_else(|| {
            if digits.chars().all(|c| c == '0') {
                Some(Self::zero())
            } else {
                None
            }
        })?;
        let mut den = Self::one();
        for _ in 0..frac.len() {
            den = den * Self::from_int(10);
        }
        let v = num / den;
        Some(if neg { -v } else { v })
    }
}

impl<T> Scalar for T where
    T: Clone + Ord + Num + Signed + FromPrimitive + ToPrimitive + FromStr + Display + Debug + Send + Sync + 'static
{
}

/// A scalar extended with `+∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ext<T> {
    Finite(T),
    Infinity,
}

impl<T: Scalar> Ext<T> {
    pub fn zero() -> Self {
        Ext::Finite(T::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Ext::Finite(_))
    }

    pub fn finite(&self) -> Option<&T> {
        match self {
            Ext::Finite(v) => Some(v),
            Ext::Infinity => None,
        }
    }

    pub fn into_finite(self) -> Option<T> {
        match self {
            Ext::Finite(v) => Some(v),
            Ext::Infinity => None,
        }
    }

    pub fn add_finite(&self, d: &T) -> Self {
        match self {
            Ext::Finite(v) => Ext::Finite(v.clone() + d.clone()),
            Ext::Infinity => Ext::Infinity,
        }
    }
}

impl<T: Scalar> Add for Ext<T> {
    type Output = Ext<T>;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Ext::Finite(a), Ext::Finite(b)) => Ext::Finite(a + b),
            _ => Ext::Infinity,
        }
    }
}

impl<T: Scalar> PartialOrd for Ext<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Ext<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Ext::Finite(a), Ext::Finite(b)) => a.cmp(b),
            (Ext::Finite(_), Ext::Infinity) => Ordering::Less,
            (Ext::Infinity, Ext::Finite(_)) => Ordering::Greater,
            (Ext::Infinity, Ext::Infinity) => Ordering::Equal,
        }
    }
}

impl<T: Scalar> From<T> for Ext<T> {
    fn from(v: T) -> Self {
        Ext::Finite(v)
    }
}

impl<T: Display> Display for Ext<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Finite(v) => write!(f, "{v}"),
            Ext::Infinity => write!(f, "inf"),
        }
    }
}
