use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::exactalg::rational::{pow, Rational};

/// Phase-space coordinate, in exponent-vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T = 0,
    X1 = 1,
    X2 = 2,
    Tau = 3,
    Xi1 = 4,
    Xi2 = 5,
}

/// Polynomial in `(t, x1, x2, tau, xi1, xi2)` with rational coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Poly6 {
    terms: BTreeMap<[u32; 6], Rational>,
}

impl Poly6 {
    pub fn zero() -> Self {
        Poly6::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Poly6::zero();
        p.add_term([0; 6], c);
        p
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0; 6];
        e[v as usize] = 1;
        let mut p = Poly6::zero();
        p.add_term(e, Rational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 6], &Rational)> {
        self.terms.iter()
    }

    fn add_term(&mut self, e: [u32; 6], c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Poly6::zero();
        for (e, q) in &self.terms {
            out.add_term(*e, q * c);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Poly6::constant(Rational::one()), |acc, _| &acc * self)
    }

    pub fn derivative(&self, v: Var) -> Self {
        let i = v as usize;
        let mut out = Poly6::zero();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = *e;
            d[i] -= 1;
            out.add_term(d, c * Rational::from_integer(e[i].into()));
        }
        out
    }

    pub fn eval(&self, point: &[Rational; 6]) -> Rational {
        self.terms.iter().fold(Rational::zero(), |acc, (e, c)| {
            let mono = e
                .iter()
                .zip(point)
                .fold(c.clone(), |m, (&k, x)| m * pow(x, k));
            acc + mono
        })
    }

    pub fn eval_f64(&self, point: &[f64; 6]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(point)
                    .fold(crate::exactalg::rational::to_f64(c), |m, (&k, x)| m * x.powi(k as i32))
            })
            .sum()
    }
}

/// `sum_i (df/dxi_i dg/dx_i - df/dx_i dg/dxi_i) + df/dtau dg/dt - df/dt dg/dtau`
pub fn poisson_bracket(f: &Poly6, g: &Poly6) -> Poly6 {
    let pairs = [(Var::Xi1, Var::X1), (Var::Xi2, Var::X2), (Var::Tau, Var::T)];
    let mut out = Poly6::zero();
    for (p, q) in pairs {
        let a = &f.derivative(p) * &g.derivative(q);
        let b = &f.derivative(q) * &g.derivative(p);
        out = &out + &(&a - &b);
    }
    out
}

impl<'a> Add<&'a Poly6> for &'a Poly6 {
    type Output = Poly6;
    fn add(self, rhs: &Poly6) -> Poly6 {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly6> for &'a Poly6 {
    type Output = Poly6;
    fn sub(self, rhs: &Poly6) -> Poly6 {
        self + &(-rhs)
    }
}

impl Neg for &Poly6 {
    type Output = Poly6;
    fn neg(self) -> Poly6 {
        self.scale(&-Rational::one())
    }
}

impl<'a> Mul<&'a Poly6> for &'a Poly6 {
    type Output = Poly6;
    fn mul(self, rhs: &Poly6) -> Poly6 {
        let mut out = Poly6::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let mut e = [0; 6];
                for i in 0..6 {
                    e[i] = ea[i] + eb[i];
                }
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}
