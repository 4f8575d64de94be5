use num_traits::Zero;
use serde::Serialize;

use super::bands::{f64_of, BandFamily, CutoffError};
use crate::exactalg::rational::{binomial, factorial, pow, rat, to_fraction_string, Rational};

/// `M_q(u + j)` for `j = 0..q`, where `M_q` is the cardinal B-spline of order
/// `q` (the density of a sum of `q` uniforms on `[0, 1]`) and `u in [0, 1)`.
/// The recursion only ever forms convex combinations, so it is stable for
/// large `q`.
fn bspline_table(q: usize, u: f64) -> Vec<f64> {
    let mut b = vec![1.0];
    for order in 2..=q {
        let mut next = vec![0.0; order];
        let inv = 1.0 / (order - 1) as f64;
        for (j, slot) in next.iter_mut().enumerate() {
            let x = u + j as f64;
            let here = b.get(j).copied().unwrap_or(0.0);
            let left = if j > 0 { b[j - 1] } else { 0.0 };
            *slot = (x * here + (order as f64 - x) * left) * inv;
        }
        b = next;
    }
    b
}

/// `M_q^{(m)}(x)` via `m` backward differences of `M_{q-m}`; needs `m < q`.
pub fn bspline_derivative(q: usize, m: usize, x: f64) -> f64 {
    assert!(m < q, "derivative order {m} needs q > m, got {q}");
    if x <= 0.0 || x >= q as f64 {
        return 0.0;
    }
    let i0 = x.floor() as usize;
    let table = bspline_table(q - m, x - x.floor());
    let mut acc = 0.0;
    let mut c = 1.0;
    for i in 0..=m.min(i0) {
        if let Some(v) = table.get(i0 - i) {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * c * v;
        }
        c = c * (m - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// `int_{-inf}^{x} M_q = sum_{j <= x} M_{q+1}(x - j)`.
pub fn bspline_cdf(q: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= q as f64 {
        return 1.0;
    }
    let i0 = x.floor() as usize;
    bspline_table(q + 1, x - x.floor())[..=i0].iter().sum()
}

/// Exact `M_q(x)` from the truncated-power formula
/// `1/(q-1)! sum_{j <= x} (-1)^j C(q, j) (x - j)^(q-1)`.
pub fn bspline_exact(q: u32, x: &Rational) -> Rational {
    let zero = Rational::zero();
    if *x <= zero || *x >= Rational::from_integer(q.into()) {
        return zero;
    }
    let mut acc = Rational::zero();
    let mut j = 0u32;
    while Rational::from_integer(j.into()) < *x {
        let term = pow(&(x - Rational::from_integer(j.into())), q - 1) * Rational::from_integer(binomial(q, j));
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
        j += 1;
    }
    acc / Rational::from_integer(factorial(q - 1))
}

/// `1_[left, right] * K`, with `K` the `n`-fold convolution of boxes of width
/// `w`, centred at 0 (total width `n w`).
///
/// Equals 1 on `[left + n w/2, right - n w/2]` and vanishes outside
/// `[left - n w/2, right + n w/2]`.
#[derive(Debug, Clone)]
pub struct EhrenpreisCutoff {
    pub k: usize,
    /// Number of box layers, the derivative budget.
    pub n: usize,
    /// Transition width `n w`.
    pub gap: Rational,
    pub plateau: (Rational, Rational),
    pub support: (Rational, Rational),
    left: f64,
    right: f64,
    w: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CutoffSummary {
    pub k: usize,
    pub n: usize,
    pub gap: String,
    pub plateau: (String, String),
    pub support: (String, String),
}

impl EhrenpreisCutoff {
    /// Cutoff equal to 1 on `[lo, hi]` with transitions of width `gap` on
    /// either side.
    pub fn new(k: usize, n: usize, lo: Rational, hi: Rational, gap: Rational) -> Self {
        let half = &gap / rat(2, 1);
        let left = &lo - &half;
        let right = &hi + &half;
        let support = (&lo - &gap, &hi + &gap);
        EhrenpreisCutoff {
            k,
            n,
            w: f64_of(&gap) / n as f64,
            left: f64_of(&left),
            right: f64_of(&right),
            gap,
            plateau: (lo, hi),
            support,
        }
    }

    pub fn box_width(&self) -> f64 {
        self.w
    }

    pub fn summary(&self) -> CutoffSummary {
        CutoffSummary {
            k: self.k,
            n: self.n,
            gap: to_fraction_string(&self.gap),
            plateau: (to_fraction_string(&self.plateau.0), to_fraction_string(&self.plateau.1)),
            support: (to_fraction_string(&self.support.0), to_fraction_string(&self.support.1)),
        }
    }

    /// Maps `r` into B-spline coordinates relative to an indicator endpoint.
    fn arg(&self, y: f64) -> f64 {
        y / self.w + self.n as f64 / 2.0
    }

    pub fn value(&self, r: f64) -> f64 {
        bspline_cdf(self.n, self.arg(r - self.left)) - bspline_cdf(self.n, self.arg(r - self.right))
    }

    /// `phi^(l)(r) = K^(l-1)(r - left) - K^(l-1)(r - right)` for `1 <= l <= n`.
    pub fn derivative(&self, order: usize, r: f64) -> f64 {
        if order == 0 {
            return self.value(r);
        }
        assert!(order <= self.n, "order {order} beyond budget {}", self.n);
        let m = order - 1;
        let scale = self.w.powi(-(order as i32));
        scale
            * (bspline_derivative(self.n, m, self.arg(r - self.left))
                - bspline_derivative(self.n, m, self.arg(r - self.right)))
    }
}

/// `phi_k`: 1 on `Omega_k`, transition across the full gap `d_k`, so it is
/// supported in `Omega_{k-1}`.
pub fn build_cutoff(family: &BandFamily, k: usize) -> Result<EhrenpreisCutoff, CutoffError> {
    let band = family.band(k)?;
    Ok(EhrenpreisCutoff::new(
        k,
        band.budget as usize,
        band.r1.clone(),
        band.r2.clone(),
        band.d.clone(),
    ))
}

/// The doubled family `(phi_k, phi~_k)`: the gap `d_k` is split in two
/// halves; `phi_k` uses the inner one and `phi~_k` the outer one, so
/// `phi~_k = 1` on the support of `phi_k`.
pub fn build_pair(family: &BandFamily, k: usize) -> Result<(EhrenpreisCutoff, EhrenpreisCutoff), CutoffError> {
    let band = family.band(k)?;
    let half = &band.d / rat(2, 1);
    let n = band.budget as usize;
    let inner = EhrenpreisCutoff::new(k, n, band.r1.clone(), band.r2.clone(), half.clone());
    let outer = EhrenpreisCutoff::new(k, n, &band.r1 - &half, &band.r2 + &half, half);
    Ok((inner, outer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::{int, to_f64};
    use crate::cutoff::bands::build_bands;

    #[test]
    fn bspline_matches_exact_formula() {
        for q in 1..=12u32 {
            for step in 0..=(8 * q) {
                let x = rat(step as i64, 8);
                let exact = to_f64(&bspline_exact(q, &x));
                let fast = eval(q as usize, to_f64(&x));
                assert!((exact - fast).abs() < 1e-13, "q={q} x={x}: {exact} vs {fast}");
            }
        }
    }

    fn eval(q: usize, x: f64) -> f64 {
        if x <= 0.0 || x >= q as f64 {
            return 0.0;
        }
        bspline_table(q, x - x.floor())[x.floor() as usize]
    }

    #[test]
    fn cdf_is_monotone_and_normalised() {
        let q = 40;
        let mut prev = 0.0;
        for i in 0..=400 {
            let x = i as f64 * 0.1;
            let c = bspline_cdf(q, x);
            assert!(c >= prev - 1e-15);
            prev = c;
        }
        assert!((bspline_cdf(q, 20.0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn plateau_support_and_range() {
        let fam = build_bands(int(1), int(2), 16).unwrap();
        for k in 1..=4 {
            let phi = build_cutoff(&fam, k).unwrap();
            let (plo, phi_hi) = (to_f64(&phi.plateau.0), to_f64(&phi.plateau.1));
            let (slo, shi) = (to_f64(&phi.support.0), to_f64(&phi.support.1));
            let (olo, ohi) = fam.outer(k).unwrap();
            assert_eq!(phi.support, (olo, ohi));
            for i in 0..=2000 {
                let r = 0.9 + 1.2 * i as f64 / 2000.0;
                let v = phi.value(r);
                assert!((-1e-14..=1.0 + 1e-14).contains(&v), "r={r} v={v}");
                if r >= plo && r <= phi_hi {
                    assert!((v - 1.0).abs() < 1e-13, "plateau k={k} r={r} v={v}");
                }
                if r <= slo || r >= shi {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn pair_nests() {
        let fam = build_bands(int(0), int(1), 8).unwrap();
        let (phi, tilde) = build_pair(&fam, 2).unwrap();
        assert!(tilde.plateau.0 <= phi.support.0 && tilde.plateau.1 >= phi.support.1);
        assert_eq!(tilde.support, fam.outer(2).unwrap());
        assert_eq!(phi.plateau.0, fam.bands[1].r1);
    }

    #[test]
    fn derivative_orders_agree_with_differences() {
        let fam = build_bands(int(0), int(1), 8).unwrap();
        let phi = build_cutoff(&fam, 1).unwrap();
        let h = 1e-6;
        for i in 1..200 {
            let r = 0.0 + 0.25 * i as f64 / 200.0;
            let fd = (phi.derivative(1, r + h) - phi.derivative(1, r - h)) / (2.0 * h);
            let scale = 8.0f64.powi(2) / 0.25f64.powi(2);
            assert!((fd - phi.derivative(2, r)).abs() < 1e-5 * scale);
        }
    }
}
