//! Tableau arithmetic: exact rationals stored as reduced `i64` fractions
//! while they fit, falling back to [`BigRational`] otherwise.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Num {
    /// Numerator and positive denominator in lowest terms.
    Small(i64, i64),
    Big(Box<BigRational>),
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    if a <= u64::MAX as u128 && b <= u64::MAX as u128 {
        return gcd_u64(a as u64, b as u64) as u128;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl Num {
    pub(crate) fn zero() -> Num {
        Num::Small(0, 1)
    }

    pub(crate) fn one() -> Num {
        Num::Small(1, 1)
    }

    /// `n / d` for `d > 0`, reduced.
    fn from_i128(n: i128, d: i128) -> Num {
        debug_assert!(d > 0);
        if n == 0 {
            return Num::zero();
        }
        let g = gcd_u128(n.unsigned_abs(), d as u128) as i128;
        let (n, d) = (n / g, d / g);
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Num::Small(n, d),
            _ => Num::Big(Box::new(BigRational::new_raw(BigInt::from(n), BigInt::from(d)))),
        }
    }

    fn from_big(r: BigRational) -> Num {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Num::Small(n, d),
            _ => Num::Big(Box::new(r)),
        }
    }

    pub(crate) fn from_rational(r: &BigRational) -> Num {
        Num::from_big(r.clone())
    }

    pub(crate) fn to_rational(&self) -> BigRational {
        match self {
            Num::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Num::Big(r) => (**r).clone(),
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        matches!(self, Num::Small(0, _))
    }

    pub(crate) fn is_one(&self) -> bool {
        matches!(self, Num::Small(1, 1))
    }

    pub(crate) fn is_positive(&self) -> bool {
        match self {
            Num::Small(n, _) => *n > 0,
            Num::Big(r) => r.is_positive(),
        }
    }

    pub(crate) fn is_negative(&self) -> bool {
        match self {
            Num::Small(n, _) => *n < 0,
            Num::Big(r) => r.is_negative(),
        }
    }

    pub(crate) fn neg(&self) -> Num {
        match self {
            Num::Small(n, d) if *n != i64::MIN => Num::Small(-n, *d),
            _ => Num::from_big(-self.to_rational()),
        }
    }

    pub(crate) fn recip(&self) -> Num {
        match self {
            Num::Small(n, d) if *n > 0 => Num::Small(*d, *n),
            Num::Small(n, d) if *n < 0 && *n != i64::MIN => Num::Small(-d, -n),
            _ => Num::from_big(self.to_rational().recip()),
        }
    }

    pub(crate) fn add(&self, o: &Num) -> Num {
        match (self, o) {
            (Num::Small(a, b), Num::Small(c, d)) => {
                if b == d {
                    return Num::from_i128(*a as i128 + *c as i128, *b as i128);
                }
                Num::from_i128(*a as i128 * *d as i128 + *c as i128 * *b as i128, *b as i128 * *d as i128)
            }
            _ => Num::from_big(self.to_rational() + o.to_rational()),
        }
    }

    pub(crate) fn sub(&self, o: &Num) -> Num {
        self.add(&o.neg())
    }

    pub(crate) fn mul(&self, o: &Num) -> Num {
        match (self, o) {
            (Num::Small(a, b), Num::Small(c, d)) => Num::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128),
            _ => Num::from_big(self.to_rational() * o.to_rational()),
        }
    }

    pub(crate) fn div(&self, o: &Num) -> Num {
        self.mul(&o.recip())
    }

    /// `self -= f * p`.
    pub(crate) fn sub_mul(&mut self, f: &Num, p: &Num) {
        if p.is_zero() || f.is_zero() {
            return;
        }
        *self = self.sub(&f.mul(p));
    }

    pub(crate) fn cmp(&self, o: &Num) -> Ordering {
        match (self, o) {
            (Num::Small(a, b), Num::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_rational().cmp(&o.to_rational()),
        }
    }
}

impl Default for Num {
    fn default() -> Self {
        Num::zero()
    }
}
