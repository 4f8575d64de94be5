use serde::Serialize;

use super::bands::{check_power_of_two, CutoffError};

#[derive(Debug, Clone, Serialize)]
pub struct ProductBound {
    pub n: u64,
    pub c: f64,
    pub log_product: f64,
    pub per_n_rate: f64,
    /// Per-band contributions `N_k ln C + (N/2^k + 1) ln(k^2/2^k)`.
    pub terms: Vec<f64>,
}

/// `ln prod_{k=1}^{log2 N} C^(N_k) (k^2/2^k)^(N/2^k + 1)` with `N_k = N/2^(k-1)`.
pub fn recursion_product(n: u64, c: f64) -> Result<ProductBound, CutoffError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(CutoffError::BadConstant);
    }
    let levels = check_power_of_two(n, 1)?;
    let ln_c = c.ln();
    let terms: Vec<f64> = (1..=levels)
        .map(|k| {
            let nk = (n >> (k - 1)) as f64;
            let expo = (n >> k) as f64 + 1.0;
            let kf = k as f64;
            nk * ln_c + expo * (2.0 * kf.ln() - kf * std::f64::consts::LN_2)
        })
        .collect();
    let log_product: f64 = terms.iter().sum();
    Ok(ProductBound { n, c, log_product, per_n_rate: log_product / n as f64, terms })
}

#[derive(Debug, Clone, Serialize)]
pub struct RatePoint {
    pub n: u64,
    pub per_n_rate: f64,
    /// `|rate(2N) - rate(N)|`, absent for the last point.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Convergence {
    pub c: f64,
    pub points: Vec<RatePoint>,
    /// Largest doubling gap among `N >= from`.
    pub max_gap_from: f64,
    pub from: u64,
    pub converged: bool,
    /// Whether the rate never increases past `N = 2^6`.
    pub non_increasing_after_64: bool,
}

/// Rates for `N = 2^lo_exp, ..., 2^hi_exp`; convergence asks every doubling
/// gap `|rate(2N) - rate(N)|` with `N >= from` to be at most `tol`.
pub fn rate_convergence(c: f64, lo_exp: u32, hi_exp: u32, from: u64, tol: f64) -> Result<Convergence, CutoffError> {
    let rates: Vec<ProductBound> = (lo_exp..=hi_exp)
        .map(|e| recursion_product(1u64 << e, c))
        .collect::<Result<_, _>>()?;
    let points: Vec<RatePoint> = rates
        .iter()
        .enumerate()
        .map(|(i, r)| RatePoint {
            n: r.n,
            per_n_rate: r.per_n_rate,
            gap: rates.get(i + 1).map(|next| (next.per_n_rate - r.per_n_rate).abs()),
        })
        .collect();
    let max_gap_from = points
        .iter()
        .filter(|p| p.n >= from)
        .filter_map(|p| p.gap)
        .fold(0.0, f64::max);
    let non_increasing_after_64 = points
        .windows(2)
        .filter(|w| w[0].n >= 64)
        .all(|w| w[1].per_n_rate <= w[0].per_n_rate);
    Ok(Convergence {
        c,
        points,
        max_gap_from,
        from,
        converged: max_gap_from <= tol,
        non_increasing_after_64,
    })
}
