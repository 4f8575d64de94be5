//! Truncated power series with exact rational coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::rational::{inv_factorial, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("series with zero constant term has no multiplicative inverse")]
    NotAUnit,
}

/// `c_0 + c_1 t + ... + c_order t^order`, everything above `order` discarded.
///
/// Binary operations on series of different orders truncate to the smaller
/// order, so results never claim more precision than their inputs carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    coeffs: Vec<Rational>,
}

impl Series {
    /// Pads with zeros or truncates so that exactly `order + 1` coefficients remain.
    pub fn new(mut coeffs: Vec<Rational>, order: usize) -> Self {
        coeffs.resize(order + 1, Rational::zero());
        Series { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Series::new(Vec::new(), order)
    }

    pub fn one(order: usize) -> Self {
        Series::new(vec![Rational::one()], order)
    }

    /// `t` itself (zero when `order == 0`).
    pub fn variable(order: usize) -> Self {
        Series::new(vec![Rational::zero(), Rational::one()], order)
    }

    /// `(e^t - 1)/t = sum_m t^m/(m+1)!`
    pub fn exp_quotient(order: usize) -> Self {
        Series {
            coeffs: (0..=order).map(|m| inv_factorial(m as u32 + 1)).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        Series::new(self.coeffs.clone(), order)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Series {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inverse(&self) -> Result<Self, SeriesError> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(SeriesError::NotAUnit);
        }
        let inv0 = c0.recip();
        let mut out: Vec<Rational> = Vec::with_capacity(self.coeffs.len());
        out.push(inv0.clone());
        for m in 1..self.coeffs.len() {
            let mut acc = Rational::zero();
            for i in 1..=m {
                acc += &self.coeffs[i] * &out[m - i];
            }
            out.push(-(acc * &inv0));
        }
        Ok(Series { coeffs: out })
    }

    pub fn checked_div(&self, rhs: &Series) -> Result<Self, SeriesError> {
        Ok(self * &rhs.inverse()?)
    }

    /// `self^exp` at `self.order()`. With a nonzero constant term this uses
    /// `n f0 g_n = sum_{i=1}^n ((exp + 1) i - n) f_i g_{n-i}`, from
    /// `f g' = exp f' g`.
    pub fn pow(&self, exp: u32) -> Self {
        let f0 = &self.coeffs[0];
        if f0.is_zero() || exp == 0 {
            return self.pow_binary(exp);
        }
        let alpha1 = i64::from(exp) + 1;
        let inv0 = f0.recip();
        let mut g: Vec<Rational> = Vec::with_capacity(self.coeffs.len());
        g.push(num_traits::pow(f0.clone(), exp as usize));
        for n in 1..self.coeffs.len() {
            let mut acc = Rational::zero();
            for i in 1..=n {
                let f = &self.coeffs[i];
                if f.is_zero() {
                    continue;
                }
                let w = alpha1 * i as i64 - n as i64;
                if w != 0 {
                    acc += f * &g[n - i] * Rational::from_integer(w.into());
                }
            }
            g.push(acc * &inv0 / Rational::from_integer((n as i64).into()));
        }
        Series { coeffs: g }
    }

    fn pow_binary(&self, mut exp: u32) -> Self {
        let mut result = Series::one(self.order());
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result = &result * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        result
    }
}

impl<'a> Add<&'a Series> for &'a Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        let order = self.order().min(rhs.order());
        Series {
            coeffs: (0..=order).map(|i| &self.coeffs[i] + &rhs.coeffs[i]).collect(),
        }
    }
}

impl<'a> Sub<&'a Series> for &'a Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        let order = self.order().min(rhs.order());
        Series {
            coeffs: (0..=order).map(|i| &self.coeffs[i] - &rhs.coeffs[i]).collect(),
        }
    }
}

impl<'a> Mul<&'a Series> for &'a Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        let order = self.order().min(rhs.order());
        let mut coeffs = vec![Rational::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(order + 1 - i) {
                coeffs[i + j] += a * b;
            }
        }
        Series { coeffs }
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}
