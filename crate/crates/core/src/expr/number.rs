//! Numeric constants: exact rationals where possible, IEEE doubles otherwise.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, One, Signed, ToPrimitive, Zero};

pub type Rational = Ratio<i64>;

/// A numeric constant inside an expression tree.
///
/// Arithmetic stays exact while the operands are rational and the result
/// fits in `i64` numerator/denominator; overflow degrades to `Float`.
#[derive(Clone, Copy, Debug)]
pub enum Number {
    Rat(Rational),
    Float(f64),
}

impl Number {
    pub const ZERO: Number = Number::Rat(Ratio::new_raw(0, 1));
    pub const ONE: Number = Number::Rat(Ratio::new_raw(1, 1));
    pub const MINUS_ONE: Number = Number::Rat(Ratio::new_raw(-1, 1));

    pub fn int(n: i64) -> Number {
        Number::Rat(Rational::from_integer(n))
    }

    pub fn ratio(num: i64, den: i64) -> Number {
        Number::Rat(Rational::new(num, den))
    }

    /// Builds a float constant, folding integral values back to rationals so
    /// that `2.0` and `2` share one canonical representation.
    pub fn float(x: f64) -> Number {
        if x.is_finite() && x.fract() == 0.0 && x.abs() < 9.0e15 {
            Number::int(x as i64)
        } else {
            Number::Float(x)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Number::Rat(r) => r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN),
            Number::Float(x) => x,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Number::Rat(r) => r.is_zero(),
            Number::Float(x) => x == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Number::Rat(r) => r.is_one(),
            Number::Float(x) => x == 1.0,
        }
    }

    pub fn is_negative(self) -> bool {
        match self {
            Number::Rat(r) => r.is_negative(),
            Number::Float(x) => x < 0.0,
        }
    }

    pub fn as_integer(self) -> Option<i64> {
        match self {
            Number::Rat(r) if r.is_integer() => Some(*r.numer()),
            _ => None,
        }
    }

    pub fn as_rational(self) -> Option<Rational> {
        match self {
            Number::Rat(r) => Some(r),
            Number::Float(_) => None,
        }
    }

    pub fn abs(self) -> Number {
        match self {
            Number::Rat(r) => Number::Rat(r.abs()),
            Number::Float(x) => Number::Float(x.abs()),
        }
    }

    pub fn add(self, other: Number) -> Number {
        match (self, other) {
            (Number::Rat(a), Number::Rat(b)) => match a.checked_add(&b) {
                Some(r) => Number::Rat(r),
                None => Number::float(self.to_f64() + other.to_f64()),
            },
            _ => Number::float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(self, other: Number) -> Number {
        match (self, other) {
            (Number::Rat(a), Number::Rat(b)) => match a.checked_mul(&b) {
                Some(r) => Number::Rat(r),
                None => Number::float(self.to_f64() * other.to_f64()),
            },
            _ => Number::float(self.to_f64() * other.to_f64()),
        }
    }

    pub fn neg(self) -> Number {
        self.mul(Number::MINUS_ONE)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(self) -> Option<Number> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Number::Rat(r) => Number::Rat(r.recip()),
            Number::Float(x) => Number::float(1.0 / x),
        })
    }

    /// Exact integer power when possible. Returns `None` for `0^negative`.
    pub fn powi(self, n: i64) -> Option<Number> {
        if self.is_zero() && n < 0 {
            return None;
        }
        match self {
            Number::Rat(r) => {
                let base = if n < 0 { r.recip() } else { r };
                let mut acc = Rational::one();
                for _ in 0..n.unsigned_abs() {
                    match acc.checked_mul(&base) {
                        Some(next) => acc = next,
                        None => return Some(Number::float(self.to_f64().powi(n as i32))),
                    }
                }
                Some(Number::Rat(acc))
            }
            Number::Float(x) => Some(Number::float(x.powi(n as i32))),
        }
    }

    /// Exact `self^(p/q)` for a perfect power, e.g. `4^(1/2) = 2`.
    pub fn exact_root_pow(self, exp: Rational) -> Option<Number> {
        let r = self.as_rational()?;
        if r.is_negative() {
            return None;
        }
        let q = *exp.denom();
        if q <= 1 || q > 64 {
            return None;
        }
        let root = |n: i64| -> Option<i64> {
            let guess = (n as f64).powf(1.0 / q as f64).round() as i64;
            (guess.max(0) - 1..=guess + 1)
                .filter(|c| *c >= 0)
                .find(|c| (*c as i128).checked_pow(q as u32) == Some(n as i128))
        };
        let num = root(*r.numer())?;
        let den = root(*r.denom())?;
        Number::Rat(Rational::new(num, den)).powi(*exp.numer())
    }

    fn rank(self) -> u8 {
        match self {
            Number::Rat(_) => 0,
            Number::Float(_) => 1,
        }
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Number {}

impl PartialOrd for Number {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Number {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Number::Rat(a), Number::Rat(b)) => a.cmp(b),
            (Number::Float(a), Number::Float(b)) => a.total_cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for Number {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Number::Rat(r) => {
                0u8.hash(state);
                r.hash(state);
            }
            Number::Float(x) => {
                1u8.hash(state);
                x.to_bits().hash(state);
            }
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rat(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Number::Rat(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            // Debug formatting is the shortest representation that round-trips
            // and always carries a '.' or an exponent.
            Number::Float(x) => write!(f, "{:?}", x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflow_degrades_to_float() {
        let big = Number::int(i64::MAX / 2);
        let prod = big.mul(Number::int(4));
        assert!(matches!(prod, Number::Float(_)));
        assert!((prod.to_f64() - 2.0 * i64::MAX as f64).abs() / prod.to_f64() < 1e-12);
    }

    #[test]
    fn integral_floats_fold_to_rationals() {
        assert_eq!(Number::float(3.0), Number::int(3));
        assert!(matches!(Number::float(0.5), Number::Float(_)));
    }

    #[test]
    fn exact_roots() {
        let four = Number::int(4);
        assert_eq!(four.exact_root_pow(Rational::new(1, 2)), Some(Number::int(2)));
        assert_eq!(Number::ratio(8, 27).exact_root_pow(Rational::new(2, 3)), Some(Number::ratio(4, 9)));
        assert_eq!(Number::int(2).exact_root_pow(Rational::new(1, 2)), None);
    }

    #[test]
    fn negative_powers_are_exact() {
        assert_eq!(Number::int(2).powi(-3), Some(Number::ratio(1, 8)));
        assert_eq!(Number::ZERO.powi(-1), None);
    }
}
