use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exactalg::rational::{binomial, Rational};

/// Normal-ordered monomial `t^t phi^(j1)...phi^(jn) dt^dt R^r dtheta^dtheta`.
///
/// Multiplication operators (powers of `t`, the formal symbols `phi^(j)`)
/// sit to the left of every derivation. `phis` is kept sorted so a multiset
/// has exactly one representation.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub t: u32,
    pub phis: Vec<u32>,
    pub dt: u32,
    pub r: u32,
    pub dtheta: u32,
}

impl Monomial {
    pub fn identity() -> Self {
        Monomial::default()
    }

    /// Number of derivation factors.
    pub fn derivation_order(&self) -> u32 {
        self.dt + self.r + self.dtheta
    }

    fn with_phis(mut self, mut phis: Vec<u32>) -> Self {
        phis.sort_unstable();
        self.phis = phis;
        self
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        let power = |sym: &str, e: u32| match e {
            0 => None,
            1 => Some(sym.to_string()),
            _ => Some(format!("{sym}^{e}")),
        };
        parts.extend(power("t", self.t));
        parts.extend(self.phis.iter().map(|j| format!("φ^({j})")));
        parts.extend(power("∂t", self.dt));
        parts.extend(power("R", self.r));
        parts.extend(power("∂θ", self.dtheta));
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

/// Differential operator in `(t, r, theta)` with exact rational coefficients,
/// stored as a map from normal-ordered monomials to nonzero coefficients.
///
/// Two operators are equal iff their term maps are identical.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiffOp {
    terms: BTreeMap<Monomial, Rational>,
}

impl DiffOp {
    pub fn zero() -> Self {
        DiffOp::default()
    }

    pub fn one() -> Self {
        DiffOp::scalar(Rational::one())
    }

    pub fn scalar(c: Rational) -> Self {
        DiffOp::term(Monomial::identity(), c)
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut op = DiffOp::zero();
        op.add_term(m, c);
        op
    }

    pub fn t() -> Self {
        DiffOp::t_pow(1)
    }

    /// Multiplication by `t^a`.
    pub fn t_pow(a: u32) -> Self {
        DiffOp::term(Monomial { t: a, ..Monomial::default() }, Rational::one())
    }

    /// Multiplication by the formal symbol `phi^(j) = (r d_r)^j phi`.
    pub fn phi(j: u32) -> Self {
        DiffOp::term(Monomial { phis: vec![j], ..Monomial::default() }, Rational::one())
    }

    pub fn dt() -> Self {
        DiffOp::term(Monomial { dt: 1, ..Monomial::default() }, Rational::one())
    }

    /// The Euler radial field `R = r d_r`.
    pub fn rr() -> Self {
        DiffOp::term(Monomial { r: 1, ..Monomial::default() }, Rational::one())
    }

    pub fn dtheta() -> Self {
        DiffOp::term(Monomial { dtheta: 1, ..Monomial::default() }, Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return DiffOp::zero();
        }
        DiffOp {
            terms: self.terms.iter().map(|(m, q)| (m.clone(), q * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(DiffOp::one(), |acc, _| &acc * self)
    }

    /// Highest derivation order over all terms (0 for the zero operator).
    pub fn derivation_order(&self) -> u32 {
        self.terms.keys().map(Monomial::derivation_order).max().unwrap_or(0)
    }

    /// Replaces every `phi^(j)` by the scalar `value(j)`.
    pub fn substitute_phi(&self, value: impl Fn(u32) -> Rational) -> Self {
        let mut out = DiffOp::zero();
        for (m, c) in &self.terms {
            let factor = m.phis.iter().fold(Rational::one(), |acc, &j| acc * value(j));
            let bare = Monomial { phis: Vec::new(), ..m.clone() };
            out.add_term(bare, c * factor);
        }
        out
    }

    /// Evaluation where the cutoff is identically one: `phi = 1`, all
    /// derivatives of `phi` vanish.
    pub fn on_plateau(&self) -> Self {
        self.substitute_phi(|j| if j == 0 { Rational::one() } else { Rational::zero() })
    }

    /// Up to `limit` rendered terms, for failure diagnostics.
    pub fn sample_terms(&self, limit: usize) -> Vec<String> {
        self.terms
            .iter()
            .take(limit)
            .map(|(m, c)| render_term(m, c, true))
            .collect()
    }
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &DiffOp, b: &DiffOp) -> DiffOp {
    &(a * b) - &(b * a)
}

/// `ad_z^ell(w)`, with `ad_z^0(w) = w`.
pub fn ad_power(z: &DiffOp, w: &DiffOp, ell: u32) -> DiffOp {
    (0..ell).fold(w.clone(), |acc, _| commutator(z, &acc))
}

/// `sum_{i=1}^{j} C(j, i) ad_z^i(w) z^{j-i}`, the expansion of `[z^j, w]`.
pub fn binomial_ad_expand(z: &DiffOp, w: &DiffOp, j: u32) -> DiffOp {
    let mut powers = vec![DiffOp::one()];
    for i in 1..j {
        let next = &powers[i as usize - 1] * z;
        powers.push(next);
    }
    let mut ad = w.clone();
    let mut out = DiffOp::zero();
    for i in 1..=j {
        ad = commutator(z, &ad);
        let c = Rational::from_integer(binomial(j, i));
        out += &(&ad * &powers[(j - i) as usize]).scale(&c);
    }
    out
}

/// `R^c` pushed through a product of `phi` symbols:
/// returns `(multiplicity, new phis, leftover R power)` triples.
fn radial_through_phis(phis: &[u32], c: u32) -> Vec<(BigInt, Vec<u32>, u32)> {
    let mut state: BTreeMap<(Vec<u32>, u32), BigInt> = BTreeMap::new();
    state.insert((phis.to_vec(), 0), BigInt::one());
    for _ in 0..c {
        let mut next: BTreeMap<(Vec<u32>, u32), BigInt> = BTreeMap::new();
        for ((ph, rest), mult) in state {
            *next.entry((ph.clone(), rest + 1)).or_default() += &mult;
            for i in 0..ph.len() {
                let mut bumped = ph.clone();
                bumped[i] += 1;
                bumped.sort_unstable();
                *next.entry((bumped, rest)).or_default() += &mult;
            }
        }
        state = next;
    }
    state.into_iter().map(|((ph, rest), m)| (m, ph, rest)).collect()
}

fn falling(n: u32, i: u32) -> BigInt {
    (0..i).fold(BigInt::one(), |acc, s| acc * (n - s))
}

/// Normal-ordered product of two monomials with unit coefficients.
fn multiply_monomials(left: &Monomial, right: &Monomial, out: &mut DiffOp, coeff: &Rational) {
    let spread = radial_through_phis(&right.phis, left.r);
    for i in 0..=left.dt.min(right.t) {
        let leibniz = Rational::from_integer(binomial(left.dt, i) * falling(right.t, i));
        for (mult, phis, rest) in &spread {
            let mut all_phis = left.phis.clone();
            all_phis.extend_from_slice(phis);
            let m = Monomial {
                t: left.t + right.t - i,
                phis: Vec::new(),
                dt: left.dt - i + right.dt,
                r: rest + right.r,
                dtheta: left.dtheta + right.dtheta,
            }
            .with_phis(all_phis);
            out.add_term(m, coeff * &leibniz * Rational::from_integer(mult.clone()));
        }
    }
}

impl<'a> Mul<&'a DiffOp> for &'a DiffOp {
    type Output = DiffOp;
    fn mul(self, rhs: &DiffOp) -> DiffOp {
        let mut out = DiffOp::zero();
        for (ml, cl) in &self.terms {
            for (mr, cr) in &rhs.terms {
                multiply_monomials(ml, mr, &mut out, &(cl * cr));
            }
        }
        out
    }
}

impl<'a> Add<&'a DiffOp> for &'a DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<'a> Sub<&'a DiffOp> for &'a DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl AddAssign<&DiffOp> for DiffOp {
    fn add_assign(&mut self, rhs: &DiffOp) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl Neg for &DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        self.scale(&-Rational::one())
    }
}

fn render_coeff(c: &Rational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn render_term(m: &Monomial, c: &Rational, signed: bool) -> String {
    let mag = if signed { c.clone() } else { c.abs() };
    if m == &Monomial::identity() {
        return render_coeff(&mag);
    }
    if mag.is_one() {
        m.to_string()
    } else if signed && (-&mag).is_one() {
        format!("-{m}")
    } else {
        format!("{} {m}", render_coeff(&mag))
    }
}

/// Canonical rendering: monomials in key order, `" + "`/`" - "` separators.
impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i == 0 {
                write!(f, "{}", render_term(m, c, true))?;
            } else {
                let sep = if c.is_negative() { " - " } else { " + " };
                write!(f, "{sep}{}", render_term(m, c, false))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::{int, rat};

    #[test]
    fn leibniz_rule_for_dt_and_t() {
        let lhs = &DiffOp::dt() * &DiffOp::t();
        let rhs = &(&DiffOp::t() * &DiffOp::dt()) + &DiffOp::one();
        assert_eq!(lhs, rhs);
        assert_eq!(commutator(&DiffOp::dt(), &DiffOp::t()), DiffOp::one());
    }

    #[test]
    fn radial_field_differentiates_phi() {
        let lhs = &DiffOp::rr() * &DiffOp::phi(0);
        let rhs = &(&DiffOp::phi(0) * &DiffOp::rr()) + &DiffOp::phi(1);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn euler_square() {
        let e = &DiffOp::t() * &DiffOp::dt();
        let expected = &e + &(&DiffOp::t_pow(2) * &DiffOp::dt().pow(2));
        assert_eq!(e.pow(2), expected);
    }

    #[test]
    fn generator_relations() {
        let gens = [
            DiffOp::dt(),
            DiffOp::rr(),
            DiffOp::dtheta(),
            DiffOp::t(),
            DiffOp::phi(0),
            DiffOp::phi(3),
        ];
        let bracket = |a: usize, b: usize| commutator(&gens[a], &gens[b]);
        // [dt, t] = 1, [R, phi(j)] = phi(j+1); everything else commutes
        assert_eq!(bracket(0, 3), DiffOp::one());
        assert_eq!(bracket(1, 4), DiffOp::phi(1));
        assert_eq!(bracket(1, 5), DiffOp::phi(4));
        for (a, b) in [(0, 1), (0, 2), (1, 2), (1, 3), (0, 4), (2, 4), (3, 4), (4, 5)] {
            assert!(bracket(a, b).is_zero(), "[{a}, {b}] should vanish");
        }
    }

    #[test]
    fn radial_power_on_phi_product_is_multinomial() {
        // R^2 (phi0 phi0) = phi0^2 R^2 + 4 phi0 phi1 R + 2 phi1^2 + 2 phi0 phi2
        let p = &DiffOp::phi(0) * &DiffOp::phi(0);
        let lhs = &DiffOp::rr().pow(2) * &p;
        let mono = |phis: Vec<u32>, r: u32| Monomial { phis, r, ..Monomial::default() };
        assert_eq!(lhs.coeff(&mono(vec![0, 0], 2)), int(1));
        assert_eq!(lhs.coeff(&mono(vec![0, 1], 1)), int(4));
        assert_eq!(lhs.coeff(&mono(vec![1, 1], 0)), int(2));
        assert_eq!(lhs.coeff(&mono(vec![0, 2], 0)), int(2));
        assert_eq!(lhs.len(), 4);
    }

    #[test]
    fn ad_power_zero_is_identity() {
        let w = &DiffOp::t_pow(3) * &DiffOp::dt();
        assert_eq!(ad_power(&DiffOp::rr(), &w, 0), w);
    }

    #[test]
    fn binomial_expansion_base_case() {
        let z = DiffOp::dt();
        let w = &DiffOp::t_pow(3) * &DiffOp::dt();
        assert_eq!(binomial_ad_expand(&z, &w, 1), commutator(&z, &w));
        assert_eq!(binomial_ad_expand(&z, &w, 3), commutator(&z.pow(3), &w));
    }

    #[test]
    fn rendering_is_canonical() {
        let op = &(&DiffOp::t_pow(2) * &DiffOp::rr()).scale(&int(3))
            - &(&DiffOp::phi(1) * &DiffOp::dt()).scale(&rat(1, 2));
        assert_eq!(op.to_string(), "-1/2 φ^(1) ∂t + 3 t^2 R");
        assert_eq!(DiffOp::zero().to_string(), "0");
        assert_eq!((-&DiffOp::one()).to_string(), "-1");
        assert_eq!(
            (&DiffOp::t() * &DiffOp::dtheta().pow(2)).to_string(),
            "t ∂θ^2"
        );
    }

    #[test]
    fn plateau_evaluation_drops_derivatives_of_phi() {
        let op = &(&DiffOp::phi(0) * &DiffOp::rr()) + &DiffOp::phi(2);
        assert_eq!(op.on_plateau(), DiffOp::rr());
    }
}
