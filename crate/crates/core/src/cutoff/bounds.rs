use std::collections::HashMap;

use serde::Serialize;

use super::bands::{build_bands, f64_of, BandFamily, CutoffError};
use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};

use super::kernel::{build_cutoff, EhrenpreisCutoff};
use crate::exactalg::rational::{factorial, int, ln_abs, Rational};

/// `ln C(m, floor(m/2))`, the largest coefficient of `(1 - s)^m`.
fn ln_central_binomial(m: usize, ln_fact: &[f64]) -> f64 {
    ln_fact[m] - ln_fact[m / 2] - ln_fact[m - m / 2]
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for i in 1..=n {
        out[i] = out[i - 1] + (i as f64).ln();
    }
    out
}

/// `ln M_n(n/2)`, the peak of the order-`n` cardinal B-spline, computed exactly
/// as `sum_{j < n/2} (-1)^j C(n, j) (n - 2j)^(n-1) / (2^(n-1) (n-1)!)`.
pub fn ln_bspline_peak(n: usize) -> f64 {
    let mut acc = BigInt::zero();
    let mut c = BigInt::one();
    for j in 0..n.div_ceil(2) {
        let term = &c * BigInt::from(n - 2 * j).pow(n as u32 - 1);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
        c = c * (n - j) / (j + 1);
    }
    let den = factorial(n as u32 - 1) << (n - 1);
    ln_abs(&Rational::new(acc, den))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileEntry {
    pub k: usize,
    pub ell: usize,
    /// `ln sup |phi^(l)|`
    pub ln_sup: f64,
    /// `ln` of the right-hand side with the measured `C`.
    pub ln_bound: f64,
    /// Whether `ln_sup` is attained rather than an upper bound.
    pub sup_exact: bool,
    /// Smallest `C` for this `l` alone.
    pub c_needed: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub k: usize,
    pub n_budget: usize,
    pub d: f64,
    pub c_measured: f64,
    pub argmax_ell: usize,
    pub pass_profile: Vec<ProfileEntry>,
    /// Corrected weaker form `(C/d)^(l+1) l! e^(N_k)` with the same `C`.
    pub weaker_form_holds: bool,
    pub passed: bool,
}

/// Caches peak values per budget, which are the only exact rational work.
#[derive(Default)]
pub struct PeakCache(HashMap<usize, f64>);

impl PeakCache {
    fn get(&mut self, n: usize) -> f64 {
        *self.0.entry(n).or_insert_with(|| ln_bspline_peak(n))
    }
}

/// `ln sup |phi^(l)|` for `0 <= l <= n` and whether it is attained.
///
/// The two edge transitions of the cutoff have disjoint supports, so the sup
/// is that of one kernel derivative `K^(l-1)`. For `l = 1` that is the exact
/// B-spline peak; for `l >= 2` the backward-difference form gives
/// `|M_n^(m)| <= C(m, floor(m/2))` because the B-spline values at any point
/// sum to at most one, with equality at `m = n - 1`.
fn ln_sup(cut: &EhrenpreisCutoff, ell: usize, ln_fact: &[f64], peaks: &mut PeakCache) -> (f64, bool) {
    let n = cut.n;
    let ln_w = cut.box_width().ln();
    match ell {
        0 => (0.0, true),
        1 => (peaks.get(n) - ln_w, true),
        _ => {
            let m = ell - 1;
            (ln_central_binomial(m, ln_fact) - ell as f64 * ln_w, m == n - 1)
        }
    }
}

/// Least `C` with `sup |phi_k^(l)| <= (C/d_k)^(l+1) N_k^l` for all `l <= N_k`.
pub fn derivative_bound_check(cut: &EhrenpreisCutoff, family: &BandFamily) -> Result<BoundCheck, CutoffError> {
    let mut peaks = PeakCache::default();
    derivative_bound_check_cached(cut, family, &mut peaks)
}

pub fn derivative_bound_check_cached(
    cut: &EhrenpreisCutoff,
    family: &BandFamily,
    peaks: &mut PeakCache,
) -> Result<BoundCheck, CutoffError> {
    let band = family.band(cut.k)?;
    let n = cut.n;
    let ln_n = (n as f64).ln();
    let d = f64_of(&band.d);
    let ln_d = d.ln();
    let ln_fact = ln_factorials(n);

    let mut sups = Vec::with_capacity(n + 1);
    let mut c_measured = 0.0f64;
    let mut argmax_ell = 0;
    for ell in 0..=n {
        let (s, exact) = ln_sup(cut, ell, &ln_fact, peaks);
        let c = ((s - ell as f64 * ln_n) / (ell + 1) as f64 + ln_d).exp();
        if c > c_measured {
            c_measured = c;
            argmax_ell = ell;
        }
        sups.push((s, exact, c));
    }

    let ln_c = c_measured.ln();
    let slack = 1e-12;
    let mut weaker = true;
    let pass_profile: Vec<ProfileEntry> = sups
        .into_iter()
        .enumerate()
        .map(|(ell, (s, exact, c))| {
            let ln_bound = (ell + 1) as f64 * (ln_c - ln_d) + ell as f64 * ln_n;
            let ln_weak = (ell + 1) as f64 * (ln_c - ln_d) + ln_fact[ell] + n as f64;
            if s > ln_weak + slack * ln_weak.abs().max(1.0) {
                weaker = false;
            }
            ProfileEntry {
                k: cut.k,
                ell,
                ln_sup: s,
                ln_bound,
                sup_exact: exact,
                c_needed: c,
                pass: s <= ln_bound + slack * ln_bound.abs().max(1.0),
            }
        })
        .collect();
    let passed = c_measured.is_finite() && pass_profile.iter().all(|p| p.pass);
    Ok(BoundCheck {
        k: cut.k,
        n_budget: n,
        d,
        c_measured,
        argmax_ell,
        pass_profile,
        weaker_form_holds: weaker,
        passed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GridPoint {
    pub n: u64,
    pub k: usize,
    pub c_measured: f64,
    pub argmax_ell: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridReport {
    pub r1: f64,
    pub r2: f64,
    pub points: Vec<GridPoint>,
    pub c_max: f64,
    pub c_min: f64,
    /// `c_max / c_min`
    pub spread: f64,
    pub stable: bool,
    pub geometry_ok: bool,
    pub all_bounds_hold: bool,
}

/// Measured `C` over `4 <= N <= n_max` (powers of two) and `k <= k_max`.
pub fn grid_stability(r1: Rational, r2: Rational, n_max: u64, k_max: usize) -> Result<GridReport, CutoffError> {
    let mut peaks = PeakCache::default();
    let mut points = Vec::new();
    let mut geometry_ok = true;
    let mut all_bounds_hold = true;
    let (f1, f2) = (f64_of(&r1), f64_of(&r2));
    let mut n = 4u64;
    while n <= n_max {
        let fam = build_bands(r1.clone(), r2.clone(), n)?;
        geometry_ok &= fam.geometry_violations().is_empty();
        for k in 1..=fam.bands.len().min(k_max) {
            let cut = build_cutoff(&fam, k)?;
            let chk = derivative_bound_check_cached(&cut, &fam, &mut peaks)?;
            all_bounds_hold &= chk.passed;
            points.push(GridPoint { n, k, c_measured: chk.c_measured, argmax_ell: chk.argmax_ell });
        }
        n *= 2;
    }
    let c_max = points.iter().map(|p| p.c_measured).fold(0.0, f64::max);
    let c_min = points.iter().map(|p| p.c_measured).fold(f64::INFINITY, f64::min);
    let spread = c_max / c_min;
    Ok(GridReport {
        r1: f1,
        r2: f2,
        points,
        c_max,
        c_min,
        spread,
        stable: spread <= 2.0,
        geometry_ok,
        all_bounds_hold,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FdCheck {
    pub samples: usize,
    pub max_rel_err_first: f64,
    pub max_rel_err_second: f64,
    pub passed: bool,
}

/// Central differences of `phi` and `phi'` against the closed-form
/// derivatives, relative to the sup of the derivative being checked.
pub fn finite_difference_check(cut: &EhrenpreisCutoff, samples: usize, tol: f64) -> FdCheck {
    let lo = f64_of(&cut.support.0);
    let hi = f64_of(&cut.support.1);
    let h = 1e-6 * (hi - lo);
    let pts: Vec<f64> = (0..samples).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / samples as f64).collect();
    let d1: Vec<f64> = pts.iter().map(|&r| cut.derivative(1, r)).collect();
    let d2: Vec<f64> = pts.iter().map(|&r| cut.derivative(2, r)).collect();
    let s1 = d1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let s2 = d2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut e1 = 0.0f64;
    let mut e2 = 0.0f64;
    for (i, &r) in pts.iter().enumerate() {
        let fd1 = (cut.value(r + h) - cut.value(r - h)) / (2.0 * h);
        let fd2 = (cut.derivative(1, r + h) - cut.derivative(1, r - h)) / (2.0 * h);
        e1 = e1.max((fd1 - d1[i]).abs() / s1);
        e2 = e2.max((fd2 - d2[i]).abs() / s2);
    }
    FdCheck { samples, max_rel_err_first: e1, max_rel_err_second: e2, passed: e1 <= tol && e2 <= tol }
}

/// Rows `(r, phi, phi', ..., phi^(orders))` on a uniform grid over the support.
pub fn sample_rows(cut: &EhrenpreisCutoff, points: usize, orders: usize) -> Vec<Vec<f64>> {
    let lo = f64_of(&cut.support.0);
    let hi = f64_of(&cut.support.1);
    let orders = orders.min(cut.n);
    (0..points)
        .map(|i| {
            let r = lo + (hi - lo) * i as f64 / (points.max(2) - 1) as f64;
            let mut row = vec![r];
            row.extend((0..=orders).map(|o| cut.derivative(o, r)));
            row
        })
        .collect()
}

/// `[r1, r2] = [1, 2]`, the default radial interval.
pub fn default_interval() -> (Rational, Rational) {
    (int(1), int(2))
}
