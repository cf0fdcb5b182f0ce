//! Exact rational scalars.
//!
//! [`Rat`] is an arbitrary-precision rational kept in lowest terms with a
//! positive denominator. Text form is `"p/q"` (a bare integer `"p"` is also
//! accepted on input).

use std::fmt;
use std::str::FromStr;

use nalgebra::Point2;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational literal {0:?}")]
pub struct ParseRatError(pub String);

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let err = || ParseRatError(s.to_string());
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| err())?;
    let d = BigInt::from_str(d).map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rat::new(n, d))
}

/// Always `"p/q"`, including integers (`"2/1"`).
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Exact value of a finite float.
pub fn from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

/// Nearest `f64`.
pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn half() -> Rat {
    Rat::new(BigInt::one(), BigInt::from(2))
}

/// A point of the affine plane with exact coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatPoint {
    pub x: Rat,
    pub y: Rat,
}

impl RatPoint {
    pub fn new(x: Rat, y: Rat) -> Self {
        Self { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Self::new(int(x), int(y))
    }

    pub fn origin() -> Self {
        Self::new(Rat::zero(), Rat::zero())
    }

    pub fn from_f64(p: &Point2<f64>) -> Option<Self> {
        Some(Self::new(from_f64(p.x)?, from_f64(p.y)?))
    }

    pub fn to_f64(&self) -> Point2<f64> {
        Point2::new(to_f64(&self.x), to_f64(&self.y))
    }

    pub fn sub(&self, o: &RatPoint) -> (Rat, Rat) {
        (&self.x - &o.x, &self.y - &o.y)
    }

    /// `self + t * (other - self)`
    pub fn lerp(&self, other: &RatPoint, t: &Rat) -> RatPoint {
        RatPoint::new(
            &self.x + t * (&other.x - &self.x),
            &self.y + t * (&other.y - &self.y),
        )
    }
}

impl fmt::Display for RatPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Twice the signed area of `pqr`; positive for a left turn.
pub fn orient(p: &RatPoint, q: &RatPoint, r: &RatPoint) -> Rat {
    let (ux, uy) = q.sub(p);
    let (vx, vy) = r.sub(p);
    ux * vy - uy * vx
}

impl Serialize for RatPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&format_rat(&self.x))?;
        t.serialize_element(&format_rat(&self.y))?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for RatPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y] = deserialize_rat_array::<D, 2>(d)?;
        Ok(RatPoint::new(x, y))
    }
}

pub(crate) fn deserialize_rat_array<'de, D: Deserializer<'de>, const N: usize>(
    d: D,
) -> Result<[Rat; N], D::Error> {
    struct ArrVisitor<const N: usize>;
    impl<'de, const N: usize> Visitor<'de> for ArrVisitor<N> {
        type Value = [Rat; N];
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            write!(f, "an array of {N} rational strings \"p/q\"")
        }
        fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
            let mut out: Vec<Rat> = Vec::with_capacity(N);
            while let Some(s) = seq.next_element::<String>()? {
                out.push(parse_rat(&s).map_err(de::Error::custom)?);
            }
            out.try_into()
                .map_err(|v: Vec<Rat>| de::Error::invalid_length(v.len(), &self))
        }
    }
    d.deserialize_seq(ArrVisitor::<N>)
}

/// `#[serde(with = "rat_string")]` for a single [`Rat`] field.
pub mod rat_string {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rat("6/4").unwrap(), rat(3, 2));
        assert_eq!(parse_rat("-7").unwrap(), int(-7));
        assert_eq!(parse_rat(" 1 / -2 ").unwrap(), rat(-1, 2));
        assert_eq!(format_rat(&rat(-3, 6)), "-1/2");
        assert_eq!(format_rat(&int(2)), "2/1");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn canonical_denominator() {
        let r = rat(4, -6);
        assert!(r.denom().is_positive());
        assert_eq!(r, rat(-2, 3));
    }

    #[test]
    fn float_round_trip_is_exact() {
        for x in [0.1, -3.75, 1e-300, 123456.789] {
            assert_eq!(to_f64(&from_f64(x).unwrap()), x);
        }
        assert!(from_f64(f64::NAN).is_none());
    }

    #[test]
    fn point_json() {
        let p = RatPoint::new(rat(1, 2), int(-3));
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"["1/2","-3/1"]"#);
        let back: RatPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<RatPoint>(r#"["1/2"]"#).is_err());
    }
}
