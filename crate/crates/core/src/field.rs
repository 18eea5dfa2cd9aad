//! Exact coefficient fields: the rationals and small prime fields.

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// An exact field element. Arithmetic never rounds.
pub trait Field:
    Clone + fmt::Debug + fmt::Display + PartialEq + Eq + Hash + Send + Sync + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negate(&self) -> Self;
    /// Multiplicative inverse, `None` for zero.
    fn inverse(&self) -> Option<Self>;
    /// 0 for the rationals.
    fn characteristic() -> u64;
    /// Short tag used in cache keys and on the command line (`q`, `f2`, ...).
    fn tag() -> String;
    /// Parse the canonical `num/den` (or plain integer) encoding.
    fn parse(s: &str) -> Result<Self>;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn sign(positive: bool) -> Self {
        if positive {
            Self::one()
        } else {
            Self::one().negate()
        }
    }
}

/// A rational number stored in lowest terms with positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Q(BigRational);

impl Q {
    pub fn new(num: i64, den: i64) -> Self {
        Q(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl Field for Q {
    fn zero() -> Self {
        Q(BigRational::zero())
    }
    fn one() -> Self {
        Q(BigRational::one())
    }
    fn from_i64(v: i64) -> Self {
        Q(BigRational::from_integer(BigInt::from(v)))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn plus(&self, other: &Self) -> Self {
        Q(&self.0 + &other.0)
    }
    fn minus(&self, other: &Self) -> Self {
        Q(&self.0 - &other.0)
    }
    fn times(&self, other: &Self) -> Self {
        Q(&self.0 * &other.0)
    }
    fn negate(&self) -> Self {
        Q(-&self.0)
    }
    fn inverse(&self) -> Option<Self> {
        if self.0.is_zero() {
            None
        } else {
            Some(Q(self.0.recip()))
        }
    }
    fn characteristic() -> u64 {
        0
    }
    fn tag() -> String {
        "q".into()
    }
    fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid rational `{s}`"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n = BigInt::from_str(n).map_err(|_| bad())?;
        let d = BigInt::from_str(d).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Q(BigRational::new(n, d)))
    }
}

impl Q {
    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }
}

/// Residues modulo the prime `P`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fp<const P: u32>(u32);

impl<const P: u32> Fp<P> {
    pub fn value(self) -> u32 {
        self.0
    }
}

impl<const P: u32> fmt::Display for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/1", self.0)
    }
}

impl<const P: u32> Field for Fp<P> {
    fn zero() -> Self {
        Fp(0)
    }
    fn one() -> Self {
        Fp(1 % P)
    }
    fn from_i64(v: i64) -> Self {
        Fp(v.rem_euclid(P as i64) as u32)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn plus(&self, other: &Self) -> Self {
        Fp(((self.0 as u64 + other.0 as u64) % P as u64) as u32)
    }
    fn minus(&self, other: &Self) -> Self {
        Fp(((self.0 as u64 + P as u64 - other.0 as u64) % P as u64) as u32)
    }
    fn times(&self, other: &Self) -> Self {
        Fp(((self.0 as u64 * other.0 as u64) % P as u64) as u32)
    }
    fn negate(&self) -> Self {
        Fp((P - self.0) % P)
    }
    fn inverse(&self) -> Option<Self> {
        if self.0 == 0 {
            return None;
        }
        // Fermat: a^(p-2)
        let (mut base, mut exp, mut acc) = (self.0 as u64, P as u64 - 2, 1u64);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % P as u64;
            }
            base = base * base % P as u64;
            exp >>= 1;
        }
        Some(Fp(acc as u32))
    }
    fn characteristic() -> u64 {
        P as u64
    }
    fn tag() -> String {
        format!("f{P}")
    }
    fn parse(s: &str) -> Result<Self> {
        let q = Q::parse(s)?;
        let reduce = |b: &BigInt| -> i64 {
            let r = b % BigInt::from(P);
            i64::try_from(r).expect("residue fits")
        };
        let num = Self::from_i64(reduce(q.numer()));
        let den = Self::from_i64(reduce(q.denom()));
        let inv = den
            .inverse()
            .ok_or_else(|| Error::Parse(format!("denominator of `{s}` vanishes mod {P}")))?;
        Ok(num.times(&inv))
    }
}

pub type F2 = Fp<2>;
pub type F3 = Fp<3>;
pub type F5 = Fp<5>;
pub type F7 = Fp<7>;

/// Runtime field selector used by the CLI and the FFI layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FieldKind {
    Q,
    F2,
    F3,
    F5,
    F7,
}

impl FieldKind {
    pub fn tag(self) -> &'static str {
        match self {
            FieldKind::Q => "q",
            FieldKind::F2 => "f2",
            FieldKind::F3 => "f3",
            FieldKind::F5 => "f5",
            FieldKind::F7 => "f7",
        }
    }
}

impl FromStr for FieldKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "q" | "qq" | "rational" => Ok(FieldKind::Q),
            "f2" => Ok(FieldKind::F2),
            "f3" => Ok(FieldKind::F3),
            "f5" => Ok(FieldKind::F5),
            "f7" => Ok(FieldKind::F7),
            other => Err(Error::Usage(format!(
                "unsupported field `{other}` (expected q, f2, f3, f5 or f7)"
            ))),
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Run a generic body with the concrete field type selected by a [`FieldKind`].
#[macro_export]
macro_rules! with_field {
    ($kind:expr, $F:ident => $body:expr) => {
        match $kind {
            $crate::field::FieldKind::Q => {
                type $F = $crate::field::Q;
                $body
            }
            $crate::field::FieldKind::F2 => {
                type $F = $crate::field::F2;
                $body
            }
            $crate::field::FieldKind::F3 => {
                type $F = $crate::field::F3;
                $body
            }
            $crate::field::FieldKind::F5 => {
                type $F = $crate::field::F5;
                $body
            }
            $crate::field::FieldKind::F7 => {
                type $F = $crate::field::F7;
                $body
            }
        }
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_are_reduced() {
        let q = Q::new(6, -4);
        assert_eq!(q.to_string(), "-3/2");
        assert_eq!(Q::parse("-3/2").unwrap(), q);
        assert_eq!(Q::parse("4").unwrap(), Q::from_i64(4));
        assert!(Q::parse("1/0").is_err());
    }

    #[test]
    fn prime_field_inverse() {
        for a in 1..5 {
            let x = F5::from_i64(a);
            assert!(x.times(&x.inverse().unwrap()).is_one());
        }
        assert_eq!(F2::from_i64(-1), F2::one());
        assert_eq!(F3::parse("1/2").unwrap(), F3::from_i64(2));
    }

    #[test]
    fn field_kind_parsing() {
        assert_eq!("Q".parse::<FieldKind>().unwrap(), FieldKind::Q);
        assert_eq!("f3".parse::<FieldKind>().unwrap(), FieldKind::F3);
        assert!("f4".parse::<FieldKind>().is_err());
    }
}
