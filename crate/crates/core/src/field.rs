//! Exact scalars over the rationals or a prime field.
//!
//! The field is chosen at run time (circuit files name it), so a [`Scalar`]
//! carries its own field tag. Mixing fields in one operation is a
//! programming error and panics.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{input, Error, Result};

/// Largest admissible prime modulus. Products of two residues fit in a
/// `u64` and trial division stays cheap.
pub const MAX_PRIME: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldSpec {
    Rational,
    Prime(u64),
}

impl FieldSpec {
    /// Validated prime field.
    pub fn prime(p: u64) -> Result<Self> {
        if p >= MAX_PRIME {
            return input(format!("modulus {p} exceeds the supported bound 2^32"));
        }
        if !is_prime(p) {
            return input(format!("modulus {p} is not prime"));
        }
        Ok(FieldSpec::Prime(p))
    }

    pub fn is_rational(self) -> bool {
        matches!(self, FieldSpec::Rational)
    }

    /// Number of elements, `None` for the rationals.
    pub fn size(self) -> Option<u64> {
        match self {
            FieldSpec::Rational => None,
            FieldSpec::Prime(p) => Some(p),
        }
    }

    /// True when the field has more than `m` elements.
    pub fn exceeds(self, m: u64) -> bool {
        self.size().is_none_or(|p| p > m)
    }

    pub fn zero(self) -> Scalar {
        match self {
            FieldSpec::Rational => Scalar::Q(BigRational::zero()),
            FieldSpec::Prime(p) => Scalar::Fp { v: 0, p },
        }
    }

    pub fn one(self) -> Scalar {
        self.int(1)
    }

    pub fn int(self, n: i64) -> Scalar {
        match self {
            FieldSpec::Rational => Scalar::Q(BigRational::from_integer(BigInt::from(n))),
            FieldSpec::Prime(p) => Scalar::Fp {
                v: n.rem_euclid(p as i64) as u64,
                p,
            },
        }
    }

    pub fn bigint(self, n: &BigInt) -> Scalar {
        match self {
            FieldSpec::Rational => Scalar::Q(BigRational::from_integer(n.clone())),
            FieldSpec::Prime(p) => {
                let r = n.mod_floor(&BigInt::from(p));
                Scalar::Fp {
                    v: r.to_u64().expect("residue fits"),
                    p,
                }
            }
        }
    }

    /// `num/den`, failing when `den` vanishes in this field.
    pub fn ratio(self, num: &BigInt, den: &BigInt) -> Result<Scalar> {
        let d = self.bigint(den);
        match d.inv() {
            Some(di) => Ok(&self.bigint(num) * &di),
            None => input(format!("denominator {den} is zero in {self}")),
        }
    }

    /// Parses `n` or `n/d`.
    pub fn parse_scalar(self, s: &str) -> Result<Scalar> {
        let bad = || Error::Input(format!("malformed scalar `{s}`"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        self.ratio(&n, &d)
    }

    /// Every element of a prime field, in residue order.
    pub fn elements(self) -> Option<impl Iterator<Item = Scalar>> {
        match self {
            FieldSpec::Rational => None,
            FieldSpec::Prime(p) => Some((0..p).map(move |v| Scalar::Fp { v, p })),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rational => write!(f, "rational"),
            FieldSpec::Prime(p) => write!(f, "prime {p}"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    /// Accepts `rational`, `prime <p>` and the short forms `Q`, `F<p>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parts: Vec<&str> = s.split_whitespace().collect();
        match parts.as_slice() {
            ["rational"] | ["Q"] => Ok(FieldSpec::Rational),
            ["prime", p] => FieldSpec::prime(p.parse().map_err(|_| Error::Input(format!("bad modulus `{p}`")))?),
            [one] if one.starts_with('F') || one.starts_with("prime:") => {
                let digits = one.trim_start_matches("prime:").trim_start_matches('F');
                FieldSpec::prime(digits.parse().map_err(|_| Error::Input(format!("bad field `{s}`")))?)
            }
            _ => input(format!("unknown field `{s}`")),
        }
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut q = 2u64;
    while q * q <= p {
        if p.is_multiple_of(q) {
            return false;
        }
        q += 1;
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Q(BigRational),
    Fp { v: u64, p: u64 },
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Q(_) => FieldSpec::Rational,
            Scalar::Fp { p, .. } => FieldSpec::Prime(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(q) => q.is_zero(),
            Scalar::Fp { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Q(q) => q.is_one(),
            Scalar::Fp { v, .. } => *v == 1,
        }
    }

    pub fn inv(&self) -> Option<Scalar> {
        match self {
            Scalar::Q(q) if q.is_zero() => None,
            Scalar::Q(q) => Some(Scalar::Q(q.recip())),
            Scalar::Fp { v: 0, .. } => None,
            Scalar::Fp { v, p } => Some(Scalar::Fp {
                v: mod_pow(*v, p - 2, *p),
                p: *p,
            }),
        }
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = self.field().one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Integer value when the scalar is a rational integer.
    pub fn as_integer(&self) -> Option<BigInt> {
        match self {
            Scalar::Q(q) if q.is_integer() => Some(q.to_integer()),
            Scalar::Q(_) => None,
            Scalar::Fp { v, .. } => Some(BigInt::from(*v)),
        }
    }

    /// Bits needed for numerator plus denominator (residue bits over F_p).
    pub fn bit_length(&self) -> u64 {
        match self {
            Scalar::Q(q) => q.numer().bits() + if q.is_integer() { 0 } else { q.denom().bits() },
            Scalar::Fp { v, .. } => 64 - v.leading_zeros() as u64,
        }
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, Scalar::Q(q) if q.is_negative())
    }

    fn same_field(&self, other: &Scalar) -> u64 {
        match (self, other) {
            (Scalar::Fp { p, .. }, Scalar::Fp { p: q, .. }) if p == q => *p,
            (Scalar::Q(_), Scalar::Q(_)) => 0,
            _ => panic!("scalar field mismatch: {} vs {}", self.field(), other.field()),
        }
    }
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Q(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Scalar::Q(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Scalar::Fp { v, .. } => write!(f, "{v}"),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Rationals by value, residues by representative in `[0, p)`.
impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Q(a), Scalar::Q(b)) => a.cmp(b),
            (Scalar::Fp { v: a, .. }, Scalar::Fp { v: b, .. }) => a.cmp(b),
            (Scalar::Q(_), Scalar::Fp { .. }) => Ordering::Less,
            (Scalar::Fp { .. }, Scalar::Q(_)) => Ordering::Greater,
        }
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        match self.same_field(rhs) {
            0 => match (self, rhs) {
                (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a + b),
                _ => unreachable!(),
            },
            p => match (self, rhs) {
                (Scalar::Fp { v: a, .. }, Scalar::Fp { v: b, .. }) => Scalar::Fp { v: (a + b) % p, p },
                _ => unreachable!(),
            },
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        match self.same_field(rhs) {
            0 => match (self, rhs) {
                (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a - b),
                _ => unreachable!(),
            },
            p => match (self, rhs) {
                (Scalar::Fp { v: a, .. }, Scalar::Fp { v: b, .. }) => Scalar::Fp { v: (a + p - b) % p, p },
                _ => unreachable!(),
            },
        }
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        match self.same_field(rhs) {
            0 => match (self, rhs) {
                (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a * b),
                _ => unreachable!(),
            },
            p => match (self, rhs) {
                (Scalar::Fp { v: a, .. }, Scalar::Fp { v: b, .. }) => Scalar::Fp { v: a * b % p, p },
                _ => unreachable!(),
            },
        }
    }
}

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &Scalar) -> Scalar {
        self * &rhs.inv().expect("division by zero scalar")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Q(a) => Scalar::Q(-a),
            Scalar::Fp { v, p } => Scalar::Fp { v: (p - v) % p, p: *p },
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar { (&self).$m(&rhs) }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar { (&self).$m(rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        *self = &*self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_validation() {
        assert!(FieldSpec::prime(7).is_ok());
        assert!(FieldSpec::prime(2).is_ok());
        assert!(FieldSpec::prime(1).is_err());
        assert!(FieldSpec::prime(9).is_err());
        assert!(FieldSpec::prime(MAX_PRIME + 15).is_err());
    }

    #[test]
    fn rationals_reduce() {
        let q = FieldSpec::Rational;
        let a = q.parse_scalar("6/4").unwrap();
        assert_eq!(a.to_string(), "3/2");
        assert_eq!(q.parse_scalar("-8/4").unwrap().to_string(), "-2");
        assert!(q.parse_scalar("1/0").is_err());
        assert!(q.parse_scalar("x").is_err());
    }

    #[test]
    fn residues() {
        let f = FieldSpec::prime(7).unwrap();
        assert_eq!(f.int(-1).to_string(), "6");
        let half = f.parse_scalar("1/2").unwrap();
        assert_eq!(half.to_string(), "4");
        assert_eq!((&half * &f.int(2)).to_string(), "1");
        assert!(f.parse_scalar("1/7").is_err());
        assert_eq!(f.int(3).inv().unwrap().to_string(), "5");
        assert!(f.zero().inv().is_none());
    }

    #[test]
    fn field_names() {
        assert_eq!("rational".parse::<FieldSpec>().unwrap(), FieldSpec::Rational);
        assert_eq!("prime 5".parse::<FieldSpec>().unwrap(), FieldSpec::Prime(5));
        assert_eq!("F7".parse::<FieldSpec>().unwrap(), FieldSpec::Prime(7));
        assert!("prime 4".parse::<FieldSpec>().is_err());
        assert_eq!(FieldSpec::Prime(5).to_string(), "prime 5");
    }
}
