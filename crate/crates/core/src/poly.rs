//! Integer-coefficient partition polynomials.

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolyVar {
    Lambda,
    Beta,
}

/// Polynomial with nonnegative integer coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionPolynomial {
    coeffs: Vec<BigInt>,
    var: PolyVar,
}

pub(crate) fn trim(c: &mut Vec<BigInt>) {
    while c.last().is_some_and(Zero::is_zero) {
        c.pop();
    }
}

pub(crate) fn mul_coeffs(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl PartitionPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>, var: PolyVar) -> Result<Self> {
        if coeffs.iter().any(Signed::is_negative) {
            return Err(Error::invalid(
                "partition polynomial with a negative coefficient",
            ));
        }
        trim(&mut coeffs);
        Ok(Self { coeffs, var })
    }

    pub fn from_u64(coeffs: &[u64], var: PolyVar) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect(), var).expect("unsigned")
    }

    pub fn one(var: PolyVar) -> Self {
        Self {
            coeffs: vec![BigInt::one()],
            var,
        }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }
    pub fn var(&self) -> PolyVar {
        self.var
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Value at 1, the sum of coefficients.
    pub fn total(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            coeffs: mul_coeffs(&self.coeffs, &other.coeffs),
            var: self.var,
        }
    }

    pub fn pow(&self, mut m: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.var);
        while m > 0 {
            if m & 1 == 1 {
                acc = acc.mul(&base);
            }
            m >>= 1;
            if m > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }

    /// Exact evaluation at the Gaussian rational `re + i·im`.
    pub fn eval_complex_rational(
        &self,
        re: &BigRational,
        im: &BigRational,
    ) -> (BigRational, BigRational) {
        let (mut ar, mut ai) = (BigRational::zero(), BigRational::zero());
        for c in self.coeffs.iter().rev() {
            let nr = &ar * re - &ai * im + BigRational::from_integer(c.clone());
            let ni = &ar * im + &ai * re;
            ar = nr;
            ai = ni;
        }
        (ar, ai)
    }

    pub fn eval_c64(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + big_to_f64(c);
        }
        acc
    }

    /// Horner evaluation at `precision` bits.
    pub fn eval_mp(&self, z: &rug::Complex) -> rug::Complex {
        let prec = z.prec();
        let mut acc = rug::Complex::new(prec);
        for c in self.coeffs.iter().rev() {
            acc *= z;
            acc += to_rug_int(c);
        }
        acc
    }

    /// Whether the polynomial vanishes at a complex point given in doubles.
    /// Doubles are dyadic rationals, so the test is exact.
    pub fn vanishes_at(&self, z: Complex64) -> bool {
        let (r, i) = self.eval_complex_rational(&f64_to_rational(z.re), &f64_to_rational(z.im));
        r.is_zero() && i.is_zero()
    }

    pub fn to_decimal_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(ToString::to_string).collect()
    }

    pub fn from_decimal_strings(s: &[String], var: PolyVar) -> Result<Self> {
        let coeffs = s
            .iter()
            .map(|t| {
                t.parse::<BigInt>()
                    .map_err(|e| Error::invalid(format!("bad coefficient {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeffs, var)
    }
}

pub fn big_to_f64(c: &BigInt) -> f64 {
    c.to_f64().unwrap_or(if c.sign() == Sign::Minus {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

pub fn to_rug_int(c: &BigInt) -> rug::Integer {
    let (sign, digits) = c.to_u32_digits();
    let mut r = rug::Integer::from_digits(&digits, rug::integer::Order::Lsf);
    if sign == Sign::Minus {
        r = -r;
    }
    r
}

pub fn f64_to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite double")
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `(x + a)^k` coefficients.
pub(crate) fn binomial_shift(k: u32, a: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(k as usize + 1);
    let mut binom = BigInt::one();
    for j in 0..=k {
        // coefficient of x^j is C(k,j) a^{k-j}
        out.push(&binom * a.pow(k - j));
        binom = binom * BigInt::from(k - j) / BigInt::from(j + 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let p = PartitionPolynomial::from_u64(&[6, 12, 6], PolyVar::Lambda);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.total(), BigInt::from(24));
        let sq = p.pow(2);
        assert_eq!(sq, p.mul(&p));
        assert_eq!(sq.total(), BigInt::from(576));
        let minus_one = BigRational::from_integer(BigInt::from(-1));
        assert!(p.eval_rational(&minus_one).is_zero());
        assert!(p.vanishes_at(Complex64::new(-1.0, 0.0)));
        assert!(!p.vanishes_at(Complex64::new(-1.0, 1e-300)));
    }

    #[test]
    fn rejects_negative() {
        assert!(PartitionPolynomial::new(vec![BigInt::from(-1)], PolyVar::Lambda).is_err());
    }

    #[test]
    fn decimal_roundtrip() {
        let p = PartitionPolynomial::from_u64(&[2, 0, 7], PolyVar::Beta);
        let s = p.to_decimal_strings();
        assert_eq!(
            PartitionPolynomial::from_decimal_strings(&s, PolyVar::Beta).unwrap(),
            p
        );
    }

    #[test]
    fn rug_conversion() {
        let big: BigInt = "-123456789012345678901234567890".parse().unwrap();
        assert_eq!(to_rug_int(&big).to_string(), big.to_string());
    }

    #[test]
    fn binomial_shift_small() {
        let c = binomial_shift(3, &BigInt::from(2));
        assert_eq!(c, [8, 12, 6, 1].map(BigInt::from).to_vec());
    }
}
