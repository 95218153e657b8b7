//! Helpers around `BigRational`, which is always kept in lowest terms with a
//! positive denominator.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn floor_int(r: &Rational) -> BigInt {
    r.numer().div_floor(r.denom())
}

/// Parses `"p/q"`, `"p"` or a plain decimal like `"-0.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.contains('/') {
            return Err(Error::Parse(format!("bad rational {s:?}")));
        }
        let neg = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
        let n: BigInt = digits
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
        let d = num_traits::pow(BigInt::from(10), frac_part.len());
        let r = Rational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let r: Rational = s
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    if r.denom().is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(r)
}

/// Always `p/q`, including `q = 1`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn sign(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

pub fn pow2(exp: i64) -> Rational {
    let two = BigInt::from(2);
    if exp >= 0 {
        Rational::from_integer(num_traits::pow(two, exp as usize))
    } else {
        Rational::new(BigInt::one(), num_traits::pow(two, (-exp) as usize))
    }
}
