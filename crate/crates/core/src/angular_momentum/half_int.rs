use core::fmt;
use core::ops::{Add, Neg, Sub};
use core::str::FromStr;

use crate::error::{domain_err, Error};

/// An integer or half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);

    pub const fn from_twice(twice_value: i32) -> Self {
        HalfInt(twice_value)
    }

    pub const fn from_int(value: i32) -> Self {
        HalfInt(2 * value)
    }

    #[inline]
    pub const fn twice(self) -> i32 {
        self.0
    }

    #[inline]
    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// `2j + 1`, the multiplicity of a magnitude.
    #[inline]
    pub const fn multiplicity(self) -> i32 {
        self.0 + 1
    }

    /// Checks that `self` is a usable magnitude `j >= 0`.
    pub fn check_magnitude(self) -> Result<(), Error> {
        if self.0 < 0 {
            return Err(domain_err!("angular momentum magnitude {self} is negative"));
        }
        Ok(())
    }

    /// Checks that `m` is a valid projection of the magnitude `self`.
    pub fn check_projection(self, m: HalfInt) -> Result<(), Error> {
        self.check_magnitude()?;
        if m.0.abs() > self.0 {
            return Err(domain_err!("projection {m} exceeds magnitude {self}"));
        }
        if (self.0 - m.0) % 2 != 0 {
            return Err(domain_err!("projection {m} has the wrong parity for magnitude {self}"));
        }
        Ok(())
    }

    /// Projections `-j, -j+1, ..., j` of the magnitude `self`.
    pub fn projections(self) -> impl DoubleEndedIterator<Item = HalfInt> + Clone {
        let j = self.0.max(-1);
        (0..=j).filter(move |_| j >= 0).map(move |k| HalfInt(-j + 2 * k))
    }
}

/// Whether `a`, `b`, `c` satisfy the triangle rule with integer perimeter.
pub fn triangle(a: HalfInt, b: HalfInt, c: HalfInt) -> bool {
    let (a, b, c) = (a.0, b.0, c.0);
    a >= 0 && b >= 0 && c >= 0 && (a - b).abs() <= c && c <= a + b && (a + b + c) % 2 == 0
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl From<i32> for HalfInt {
    fn from(value: i32) -> Self {
        HalfInt::from_int(value)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"3/2"`, `"-1/2"`, `"2"` and decimal forms such as `"1.5"`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || domain_err!("`{s}` is not an integer or half-integer");
        if let Some((num, den)) = s.split_once('/') {
            let num: i32 = num.trim().parse().map_err(|_| bad())?;
            return match den.trim() {
                "2" => Ok(HalfInt(num)),
                "1" => Ok(HalfInt::from_int(num)),
                _ => Err(bad()),
            };
        }
        if let Ok(v) = s.parse::<i32>() {
            return Ok(HalfInt::from_int(v));
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        let twice = v * 2.0;
        if libm::fabs(twice - libm::round(twice)) > 1e-9 || libm::fabs(twice) > 1e9 {
            return Err(bad());
        }
        Ok(HalfInt(libm::round(twice) as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec::Vec;

    #[test]
    fn parse_and_display() {
        assert_eq!("3/2".parse::<HalfInt>().unwrap(), HalfInt::from_twice(3));
        assert_eq!("-1/2".parse::<HalfInt>().unwrap(), HalfInt::from_twice(-1));
        assert_eq!("2".parse::<HalfInt>().unwrap(), HalfInt::from_int(2));
        assert_eq!("1.5".parse::<HalfInt>().unwrap(), HalfInt::from_twice(3));
        assert!("1/3".parse::<HalfInt>().is_err());
        assert!("0.3".parse::<HalfInt>().is_err());
        assert_eq!(HalfInt::from_twice(-3).to_string(), "-3/2");
        assert_eq!(HalfInt::from_int(-2).to_string(), "-2");
    }

    #[test]
    fn projection_rules() {
        let j = HalfInt::from_twice(3);
        assert!(j.check_projection(HalfInt::from_twice(-1)).is_ok());
        assert!(j.check_projection(HalfInt::from_twice(5)).is_err());
        assert!(j.check_projection(HalfInt::from_int(1)).is_err());
        assert!(HalfInt::from_int(-1).check_magnitude().is_err());
    }

    #[test]
    fn projections_span() {
        let ms: Vec<i32> = HalfInt::from_twice(3).projections().map(HalfInt::twice).collect();
        assert_eq!(ms, [-3, -1, 1, 3]);
        assert_eq!(HalfInt::ZERO.projections().count(), 1);
        assert_eq!(HalfInt::from_int(-1).projections().count(), 0);
    }
}
