//! Exact rational scalars.

use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

pub type Scalar = Ratio<i64>;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(n)
}

/// Parses `p/q` or a plain integer.
pub fn parse_scalar(s: &str) -> Result<Scalar> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok(Scalar::new(p, q))
        }
        None => Ok(int(s.parse().map_err(|_| bad())?)),
    }
}

pub fn parse_nonneg(s: &str) -> Result<Scalar> {
    let r = parse_scalar(s)?;
    if r.is_negative() {
        return Err(Error::Parameter(format!("expected a nonnegative value, got {s}")));
    }
    Ok(r)
}

pub fn fmt_scalar(r: &Scalar) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Least common multiple of the denominators; the unit in which all the
/// given values become integers.
pub fn common_unit<'a>(values: impl IntoIterator<Item = &'a Scalar>) -> i64 {
    values
        .into_iter()
        .fold(1i64, |acc, v| num_integer::lcm(acc, *v.denom()))
}

/// `r` expressed in multiples of `1/unit`, rounded down. Negative values map to `None`.
pub fn floor_ticks(r: &Scalar, unit: i64) -> Option<u64> {
    if r.is_negative() {
        return None;
    }
    let scaled = *r * int(unit);
    Some(scaled.floor().to_integer() as u64)
}

pub fn from_ticks(t: u64, unit: i64) -> Scalar {
    Scalar::new(t as i64, unit)
}

pub fn is_zero(r: &Scalar) -> bool {
    r.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_scalar("5").unwrap(), int(5));
        assert_eq!(parse_scalar("3/2").unwrap(), Scalar::new(3, 2));
        assert_eq!(parse_scalar(" -4/6 ").unwrap(), Scalar::new(-2, 3));
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("x").is_err());
        assert!(parse_nonneg("-1").is_err());
    }

    #[test]
    fn ticks_round_down() {
        assert_eq!(floor_ticks(&Scalar::new(7, 2), 1), Some(3));
        assert_eq!(floor_ticks(&Scalar::new(7, 2), 2), Some(7));
        assert_eq!(common_unit(&[Scalar::new(1, 2), Scalar::new(1, 3)]), 6);
        assert_eq!(fmt_scalar(&Scalar::new(3, 2)), "3/2");
        assert_eq!(fmt_scalar(&int(4)), "4");
    }
}
