//! Outward-rounded interval arithmetic over MPFR floats.

use std::fmt;

use num_rational::BigRational;
use rug::float::{Constant, Round};
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zerofree::rational_to_float;

pub const START_PRECISION: u32 = 128;
pub const MAX_PRECISION: u32 = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub lo: Float,
    pub hi: Float,
}

macro_rules! rounded {
    ($prec:expr, $e:expr, $r:expr) => {
        Float::with_val_round($prec, $e, $r).0
    };
}

impl Interval {
    pub fn point(x: Float) -> Self {
        Self {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn int(prec: u32, n: i64) -> Self {
        Self::point(Float::with_val(prec.max(64), n))
    }

    pub fn big(prec: u32, n: &num_bigint::BigInt) -> Self {
        Self::rational(prec, &BigRational::from_integer(n.clone()))
    }

    pub fn rational(prec: u32, x: &BigRational) -> Self {
        Self {
            lo: rational_to_float(x, prec, Round::Down),
            hi: rational_to_float(x, prec, Round::Up),
        }
    }

    /// A double is a dyadic rational, so this is exact.
    pub fn f64(prec: u32, x: f64) -> Self {
        Self::point(Float::with_val(prec.max(53), x))
    }

    pub fn e(prec: u32) -> Self {
        Self::int(prec, 1).exp()
    }

    pub fn pi(prec: u32) -> Self {
        Self {
            lo: rounded!(prec, Constant::Pi, Round::Down),
            hi: rounded!(prec, Constant::Pi, Round::Up),
        }
    }

    fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    pub fn add(&self, o: &Self) -> Self {
        let p = self.prec().max(o.prec());
        Self {
            lo: rounded!(p, &self.lo + &o.lo, Round::Down),
            hi: rounded!(p, &self.hi + &o.hi, Round::Up),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let p = self.prec().max(o.prec());
        Self {
            lo: rounded!(p, &self.lo - &o.hi, Round::Down),
            hi: rounded!(p, &self.hi - &o.lo, Round::Up),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            lo: Float::with_val(self.prec(), -&self.hi),
            hi: Float::with_val(self.prec(), -&self.lo),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.prec().max(o.prec());
        let pairs = [
            (&self.lo, &o.lo),
            (&self.lo, &o.hi),
            (&self.hi, &o.lo),
            (&self.hi, &o.hi),
        ];
        let lo = pairs
            .iter()
            .map(|(a, b)| rounded!(p, *a * *b, Round::Down))
            .reduce(|a, b| a.min(&b))
            .unwrap();
        let hi = pairs
            .iter()
            .map(|(a, b)| rounded!(p, *a * *b, Round::Up))
            .reduce(|a, b| a.max(&b))
            .unwrap();
        Self { lo, hi }
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        if o.lo <= 0 && o.hi >= 0 {
            return Err(Error::param(
                "interval division by an interval containing 0",
            ));
        }
        let p = self.prec().max(o.prec());
        let pairs = [
            (&self.lo, &o.lo),
            (&self.lo, &o.hi),
            (&self.hi, &o.lo),
            (&self.hi, &o.hi),
        ];
        let lo = pairs
            .iter()
            .map(|(a, b)| rounded!(p, *a / *b, Round::Down))
            .reduce(|a, b| a.min(&b))
            .unwrap();
        let hi = pairs
            .iter()
            .map(|(a, b)| rounded!(p, *a / *b, Round::Up))
            .reduce(|a, b| a.max(&b))
            .unwrap();
        Ok(Self { lo, hi })
    }

    pub fn scale(&self, n: i64) -> Self {
        self.mul(&Self::int(self.prec(), n))
    }

    pub fn ln(&self) -> Result<Self> {
        if self.lo <= 0 {
            return Err(Error::param("logarithm of a nonpositive interval"));
        }
        let p = self.prec();
        Ok(Self {
            lo: rounded!(p, self.lo.ln_ref(), Round::Down),
            hi: rounded!(p, self.hi.ln_ref(), Round::Up),
        })
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        Self {
            lo: rounded!(p, self.lo.exp_ref(), Round::Down),
            hi: rounded!(p, self.hi.exp_ref(), Round::Up),
        }
    }

    /// `self^y` for a positive base.
    pub fn powf(&self, y: &Self) -> Result<Self> {
        Ok(y.mul(&self.ln()?).exp())
    }

    pub fn max(&self, o: &Self) -> Self {
        Self {
            lo: self.lo.clone().max(&o.lo),
            hi: self.hi.clone().max(&o.hi),
        }
    }

    pub fn min(&self, o: &Self) -> Self {
        Self {
            lo: self.lo.clone().min(&o.lo),
            hi: self.hi.clone().min(&o.hi),
        }
    }

    pub fn width(&self) -> f64 {
        rounded!(self.prec(), &self.hi - &self.lo, Round::Up).to_f64()
    }

    pub fn mid_f64(&self) -> f64 {
        let p = self.prec();
        (Float::with_val(p, &self.lo + &self.hi) / 2u32).to_f64()
    }

    /// Strict comparison `self < o`; overlap is indeterminate.
    pub fn lt(&self, o: &Self) -> Verdict {
        if self.hi < o.lo {
            Verdict::Pass
        } else if self.lo >= o.hi {
            Verdict::Fail
        } else {
            Verdict::Indeterminate
        }
    }

    pub fn to_decimal(&self) -> String {
        let digits = ((self.prec() as f64) * std::f64::consts::LOG10_2).min(40.0) as usize;
        let m = Float::with_val(self.prec(), &self.lo + &self.hi) / 2u32;
        m.to_string_radix(10, Some(digits.max(17)))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            self.lo.to_f64_round(Round::Down),
            self.hi.to_f64_round(Round::Up)
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

impl Verdict {
    pub fn and(self, o: Verdict) -> Verdict {
        match (self, o) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Pass, Verdict::Pass) => Verdict::Pass,
            _ => Verdict::Indeterminate,
        }
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Re-run `f` at doubling precision until the verdict is decided or the cap
/// is reached. Returns the final verdict and the precision used.
pub fn decide<T>(mut f: impl FnMut(u32) -> Result<(Verdict, T)>) -> Result<(Verdict, T, u32)> {
    let mut prec = START_PRECISION;
    loop {
        let (v, t) = f(prec)?;
        if v != Verdict::Indeterminate || prec >= MAX_PRECISION {
            return Ok((v, t, prec));
        }
        prec *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encloses_e_and_pi() {
        let e = Interval::e(128);
        assert!(e.lo < std::f64::consts::E + 1e-15 && e.hi > std::f64::consts::E - 1e-15);
        assert!(e.width() < 1e-35);
        let p = Interval::pi(128);
        assert!(p.lo <= std::f64::consts::PI + 1e-15);
    }

    #[test]
    fn arithmetic_encloses() {
        let third = Interval::rational(128, &BigRational::new(1.into(), 3.into()));
        let one = third.scale(3);
        assert!(one.lo <= 1 && one.hi >= 1);
        assert_eq!(one.lt(&Interval::int(128, 1)), Verdict::Indeterminate);
        assert_eq!(
            Interval::int(128, 1).lt(&Interval::int(128, 2)),
            Verdict::Pass
        );
        assert_eq!(
            Interval::int(128, 2).lt(&Interval::int(128, 2)),
            Verdict::Fail
        );
        let l = Interval::int(128, 8)
            .ln()
            .unwrap()
            .div(&Interval::int(128, 2).ln().unwrap())
            .unwrap();
        assert!(l.lo <= 3 && l.hi >= 3);
        assert!(Interval::int(128, 0).ln().is_err());
        assert!(Interval::int(128, 1).div(&Interval::int(128, 0)).is_err());
    }

    #[test]
    fn neg_mul() {
        let a = Interval {
            lo: Float::with_val(64, -2),
            hi: Float::with_val(64, 3),
        };
        let b = a.mul(&a);
        assert_eq!(b.lo, -6);
        assert_eq!(b.hi, 9);
    }

    #[test]
    fn tie_is_indeterminate_at_cap() {
        let (v, _, p) =
            decide(|prec| Ok((Interval::int(prec, 1).lt(&Interval::int(prec, 1)), ()))).unwrap();
        assert_eq!(v, Verdict::Fail);
        assert_eq!(p, START_PRECISION);
        let third = |p| Interval::rational(p, &BigRational::new(1.into(), 3.into())).scale(3);
        let (v, _, p) = decide(|prec| Ok((third(prec).lt(&Interval::int(prec, 1)), ()))).unwrap();
        assert_eq!(v, Verdict::Indeterminate);
        assert_eq!(p, MAX_PRECISION);
    }
}
