use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use spin::Lazy;

use super::half_int::{triangle, HalfInt};
use crate::error::{domain_err, Error};

/// Largest supported `2j` for any argument.
pub const MAX_TWICE_J: i32 = 80;

// (j1 + j2 + j4 + j5 + 1)! bounds every factorial in either sum.
const MAX_FACTORIAL: usize = 2 * MAX_TWICE_J as usize + 2;

static FACTORIALS: Lazy<Vec<BigUint>> = Lazy::new(|| {
    let mut table = Vec::with_capacity(MAX_FACTORIAL + 1);
    let mut acc = BigUint::one();
    table.push(acc.clone());
    for n in 1..=MAX_FACTORIAL {
        acc *= n as u64;
        table.push(acc.clone());
    }
    table
});

#[inline]
fn fact(n: i32) -> &'static BigUint {
    debug_assert!(n >= 0 && n as usize <= MAX_FACTORIAL, "factorial argument {n}");
    &FACTORIALS[n as usize]
}

/// Value of a coupling symbol together with a structural-zero marker.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolValue {
    pub value: f64,
    pub is_exact_zero: bool,
}

impl SymbolValue {
    pub const ZERO: SymbolValue = SymbolValue { value: 0.0, is_exact_zero: true };

    fn from_exact(sign_sum: &BigRational, squared: &BigRational, phase_negative: bool) -> Self {
        if sign_sum.is_zero() {
            return SymbolValue::ZERO;
        }
        let magnitude = libm::sqrt(squared.to_f64().unwrap_or(f64::NAN));
        let negative = sign_sum.is_negative() ^ phase_negative;
        SymbolValue { value: if negative { -magnitude } else { magnitude }, is_exact_zero: false }
    }
}

fn check_range(j: HalfInt) -> Result<(), Error> {
    j.check_magnitude()?;
    if j.twice() > MAX_TWICE_J {
        return Err(domain_err!("angular momentum {j} exceeds supported maximum {}/2", MAX_TWICE_J));
    }
    Ok(())
}

/// Δ(abc)² = (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)! with integer arguments given as twice-values.
fn triangle_coefficient(a: i32, b: i32, c: i32) -> BigRational {
    let num = fact((a + b - c) / 2) * fact((a - b + c) / 2) * fact((-a + b + c) / 2);
    let den = fact((a + b + c) / 2 + 1);
    BigRational::new(BigInt::from(num), BigInt::from(den.clone()))
}

fn signed(k: i32, den: BigUint) -> BigRational {
    let num = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    BigRational::new(num, BigInt::from(den))
}

/// Wigner 3-j symbol `(j1 j2 j3; m1 m2 m3)`.
pub fn wigner_3j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> Result<SymbolValue, Error> {
    for (j, m) in [(j1, m1), (j2, m2), (j3, m3)] {
        check_range(j)?;
        j.check_projection(m)?;
    }
    if (m1 + m2 + m3) != HalfInt::ZERO || !triangle(j1, j2, j3) {
        return Ok(SymbolValue::ZERO);
    }
    let (a, b, c) = (j1.twice(), j2.twice(), j3.twice());
    let (x, y, z) = (m1.twice(), m2.twice(), m3.twice());
    // (j1 j2 j3; 0 0 0) vanishes for odd j1 + j2 + j3
    if x == 0 && y == 0 && ((a + b + c) / 2) % 2 == 1 {
        return Ok(SymbolValue::ZERO);
    }

    let k_min = 0.max((b - c - x) / 2).max((a - c + y) / 2);
    let k_max = ((a + b - c) / 2).min((a - x) / 2).min((b + y) / 2);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = fact(k)
            * fact((c - b + x) / 2 + k)
            * fact((c - a - y) / 2 + k)
            * fact((a + b - c) / 2 - k)
            * fact((a - x) / 2 - k)
            * fact((b + y) / 2 - k);
        sum += signed(k, den);
    }

    let projections = fact((a + x) / 2)
        * fact((a - x) / 2)
        * fact((b + y) / 2)
        * fact((b - y) / 2)
        * fact((c + z) / 2)
        * fact((c - z) / 2);
    let prefactor = triangle_coefficient(a, b, c) * BigRational::from_integer(BigInt::from(projections));
    let squared = &sum * &sum * prefactor;
    // (-1)^(j1 - j2 - m3)
    let phase_negative = ((a - b - z) / 2).rem_euclid(2) == 1;
    Ok(SymbolValue::from_exact(&sum, &squared, phase_negative))
}

/// Wigner 6-j symbol `{j1 j2 j3; j4 j5 j6}`.
pub fn wigner_6j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    j4: HalfInt,
    j5: HalfInt,
    j6: HalfInt,
) -> Result<SymbolValue, Error> {
    for j in [j1, j2, j3, j4, j5, j6] {
        check_range(j)?;
    }
    let triads = [(j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3)];
    if triads.iter().any(|&(a, b, c)| !triangle(a, b, c)) {
        return Ok(SymbolValue::ZERO);
    }
    let [a, b, c, d, e, f] = [j1, j2, j3, j4, j5, j6].map(HalfInt::twice);
    let alphas = [(a + b + c) / 2, (a + e + f) / 2, (d + b + f) / 2, (d + e + c) / 2];
    let betas = [(a + b + d + e) / 2, (b + c + e + f) / 2, (c + a + f + d) / 2];
    let t_min = *alphas.iter().max().unwrap();
    let t_max = *betas.iter().min().unwrap();

    let mut sum = BigRational::zero();
    for t in t_min..=t_max {
        let mut den = BigUint::one();
        for alpha in alphas {
            den *= fact(t - alpha);
        }
        for beta in betas {
            den *= fact(beta - t);
        }
        let mut term = signed(t, den);
        term *= BigRational::from_integer(BigInt::from(fact(t + 1).clone()));
        sum += term;
    }

    let prefactor = triangle_coefficient(a, b, c)
        * triangle_coefficient(a, e, f)
        * triangle_coefficient(d, b, f)
        * triangle_coefficient(d, e, c);
    let squared = &sum * &sum * prefactor;
    Ok(SymbolValue::from_exact(&sum, &squared, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(twice: i32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    fn w3(t: [i32; 6]) -> SymbolValue {
        wigner_3j(h(t[0]), h(t[1]), h(t[2]), h(t[3]), h(t[4]), h(t[5])).unwrap()
    }

    fn w6(t: [i32; 6]) -> SymbolValue {
        wigner_6j(h(t[0]), h(t[1]), h(t[2]), h(t[3]), h(t[4]), h(t[5])).unwrap()
    }

    #[test]
    fn m_sum_rule_is_exact_zero() {
        assert_eq!(w3([2, 2, 2, 2, 2, 2]), SymbolValue::ZERO);
    }

    #[test]
    fn known_3j_values() {
        let v = w3([2, 2, 0, 0, 0, 0]);
        assert!((v.value + 1.0 / libm::sqrt(3.0)).abs() < 1e-15);
        assert!(!v.is_exact_zero);
        // F=2 -> F'=3, m=-2, q=+1 coefficient; sympy: 0.0975900072948533...
        let v = w3([4, 2, 6, -4, 2, 2]);
        assert!((v.value - 0.097_590_007_294_853_32).abs() < 1e-15);
    }

    #[test]
    fn odd_sum_with_zero_projections_vanishes() {
        assert!(w3([2, 2, 2, 0, 0, 0]).is_exact_zero);
        assert!(w3([6, 4, 4, 0, 0, 0]).is_exact_zero);
    }

    #[test]
    fn malformed_projection_is_domain_error() {
        assert!(matches!(wigner_3j(h(2), h(2), h(2), h(4), h(0), h(-4)), Err(Error::Domain(_))));
        assert!(matches!(wigner_3j(h(2), h(2), h(2), h(1), h(0), h(-1)), Err(Error::Domain(_))));
        assert!(wigner_6j(h(-1), h(1), h(2), h(1), h(1), h(2)).is_err());
        assert!(wigner_6j(h(82), h(1), h(2), h(1), h(1), h(2)).is_err());
    }

    #[test]
    fn known_6j_values() {
        assert!(w6([1, 1, 4, 1, 1, 0]).is_exact_zero);
        let v = w6([2, 2, 2, 2, 2, 2]);
        assert!((v.value - 1.0 / 6.0).abs() < 1e-15);
        // {1/2 3/2 1; 3 2 3/2}: every Rb D2 F=2 -> F'=3 coefficient carries it
        let v = w6([1, 3, 2, 6, 4, 3]);
        assert!((v.value - libm::sqrt(5.0) / 10.0).abs() < 1e-15);
    }

    #[test]
    fn largest_supported_arguments_evaluate() {
        let v = w6([80, 80, 80, 80, 80, 80]);
        assert!(v.value.is_finite() && !v.is_exact_zero);
        let v = w3([80, 80, 80, 0, 0, 0]);
        assert!(v.value.is_finite() && !v.is_exact_zero);
    }
}
