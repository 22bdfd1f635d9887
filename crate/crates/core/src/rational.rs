//! Exact rational scalars.
//!
//! Every distance, weight and coordinate in the crate is a [`Rat`]. There is
//! no floating-point path: ties between equal-length paths and perturbation
//! thresholds have to be decided exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// Arbitrary-precision rational in canonical reduced form.
pub type Rat = BigRational;

pub fn int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

pub fn frac(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

pub fn half() -> Rat {
    frac(1, 2)
}

/// Parses `p/q` or a plain integer. Whitespace around the token is ignored.
pub fn parse_rat(token: &str) -> Result<Rat, Error> {
    let token = token.trim();
    let bad = || Error::Parse(format!("not a rational number: {token:?}"));
    match token.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {token:?}")));
            }
            Ok(Rat::new(p, q))
        }
        None => {
            let p: BigInt = token.parse().map_err(|_| bad())?;
            Ok(Rat::from_integer(p))
        }
    }
}

/// `|a - b|`
pub fn abs_diff(a: &Rat, b: &Rat) -> Rat {
    (a - b).abs()
}

pub fn sum<'a, I: IntoIterator<Item = &'a Rat>>(items: I) -> Rat {
    items.into_iter().fold(Rat::zero(), |acc, r| acc + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_rat("3").unwrap(), int(3));
        assert_eq!(parse_rat(" 6/4 ").unwrap(), frac(3, 2));
        assert_eq!(parse_rat("-1/2").unwrap(), frac(-1, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
        assert!(parse_rat("0.5").is_err());
    }

    #[test]
    fn canonical_form() {
        let r = frac(4, -6);
        assert_eq!(r.numer(), &BigInt::from(-2));
        assert_eq!(r.denom(), &BigInt::from(3));
        assert_eq!(frac(6, 3).to_string(), "2");
        assert_eq!(frac(1, 2).to_string(), "1/2");
    }
}
