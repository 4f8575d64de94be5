use num_traits::{Signed, Zero};
use serde::Serialize;

use super::ops::{n_as_m_polynomial, LocalizeError, Localizer};
use crate::exactalg::rational::{factorial, inv_factorial, ln_abs, pow, rat, to_f64, to_fraction_string, Rational};
use crate::exactalg::{a_table_recurrence, delta_closed_form, stirling_b, SignConvention};
use crate::opalg::{commutator, DiffOp, Monomial};

/// Offending monomials listed per failed identity.
pub const MAX_OFFENDERS: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct ResidualEntry {
    pub index: usize,
    pub residual_terms: usize,
    pub offending: Vec<String>,
}

impl ResidualEntry {
    fn of(index: usize, residual: &DiffOp) -> Self {
        ResidualEntry {
            index,
            residual_terms: residual.len(),
            offending: residual.sample_terms(MAX_OFFENDERS),
        }
    }
}

/// One zero-residual identity checked over a range of indices.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub k: u32,
    pub entries: Vec<ResidualEntry>,
    pub passed: bool,
}

impl IdentityReport {
    fn new(identity: &str, k: u32, entries: Vec<ResidualEntry>) -> Self {
        let passed = entries.iter().all(|e| e.residual_terms == 0);
        IdentityReport { identity: identity.to_string(), k, entries, passed }
    }
}

fn fractions(values: &[Rational]) -> Vec<String> {
    values.iter().map(to_fraction_string).collect()
}

/// `[X2, N_j] + t^k N_{j-1} R` for `1 <= j <= jmax`.
pub fn verify_x2_localizer(loc: &Localizer, jmax: usize) -> Result<IdentityReport, LocalizeError> {
    let f = loc.fields();
    let tk = DiffOp::t_pow(loc.k());
    let mut entries = Vec::new();
    for j in 1..=jmax {
        let lhs = commutator(&f.x2, loc.n(j)?);
        let rhs = &(&tk * loc.n(j - 1)?) * &f.r;
        entries.push(ResidualEntry::of(j, &(&lhs + &rhs)));
    }
    Ok(IdentityReport::new("[X2, N_j] = -t^k N_{j-1} R", loc.k(), entries))
}

/// `[X2, R^p_phi] - t^k phi^(p+1) N_p` for `0 <= p <= pmax`.
pub fn verify_x2_bracket(loc: &Localizer, pmax: usize) -> Result<IdentityReport, LocalizeError> {
    let f = loc.fields();
    let tk = DiffOp::t_pow(loc.k());
    let mut entries = Vec::new();
    for p in 0..=pmax {
        let lhs = commutator(&f.x2, &loc.shifted_power(0, p)?);
        let rhs = &(&tk * &DiffOp::phi(p as u32 + 1)) * loc.n(p)?;
        entries.push(ResidualEntry::of(p, &(&lhs - &rhs)));
    }
    Ok(IdentityReport::new("[X2, R^p_phi] = t^k phi^(p+1) N_p", loc.k(), entries))
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaRow {
    pub p: usize,
    pub delta: Vec<String>,
    pub residual_terms: usize,
    #[serde(skip)]
    pub values: Vec<Rational>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaComparison {
    pub ell: usize,
    pub extracted: String,
    pub alternating: String,
    pub positive: String,
    pub alternating_next: String,
    pub positive_next: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaReport {
    pub k: u32,
    pub pmax: usize,
    pub rows: Vec<DeltaRow>,
    /// Longest extracted list (from `p = pmax`).
    pub delta: Vec<String>,
    pub p_independent: bool,
    pub bounded_by_one: bool,
    pub comparisons: Vec<DeltaComparison>,
    /// Per candidate form: whether it reproduces every extracted value.
    pub alternating_matches: bool,
    pub positive_matches: bool,
    pub alternating_next_matches: bool,
    pub positive_next_matches: bool,
    pub structural_failure: Option<String>,
    pub passed: bool,
    #[serde(skip)]
    pub values: Vec<Rational>,
}

/// Solves `[X1, R^p_phi] = -X1 sum_l delta_l R^{p-l-1}_{phi^(l+1)}` for the
/// `delta_l`. The basis element for `l` is the only one carrying the key
/// `phi^(l+1) dt R^{p-l-1}` with a lower index, so a forward sweep suffices.
fn delta_for_p(loc: &Localizer, p: usize) -> Result<(Vec<Rational>, DiffOp), String> {
    let f = loc.fields();
    let bracket = commutator(&f.x1, &loc.shifted_power(0, p).map_err(|e| e.to_string())?);
    let mut residual = -&bracket;
    let mut deltas = Vec::with_capacity(p);
    for ell in 0..p {
        let basis = &f.x1 * &loc.shifted_power(ell as u32 + 1, p - ell - 1).map_err(|e| e.to_string())?;
        let key = Monomial {
            phis: vec![ell as u32 + 1],
            dt: 1,
            r: (p - ell - 1) as u32,
            ..Monomial::default()
        };
        let pivot = basis.coeff(&key);
        if pivot.is_zero() {
            return Err(format!("basis element {ell} at p = {p} has no pivot term {key}"));
        }
        let d = residual.coeff(&key) / pivot;
        residual = &residual - &basis.scale(&d);
        deltas.push(d);
    }
    Ok((deltas, residual))
}

pub fn extract_delta(loc: &Localizer, pmax: usize) -> Result<DeltaReport, LocalizeError> {
    if pmax < 1 {
        return Err(LocalizeError::Range("extract_delta needs pmax >= 1".into()));
    }
    let k = loc.k() as i64;
    let mut rows = Vec::new();
    let mut structural_failure = None;
    for p in 1..=pmax {
        match delta_for_p(loc, p) {
            Ok((values, residual)) => {
                if !residual.is_zero() && structural_failure.is_none() {
                    structural_failure = Some(format!(
                        "p = {p}: {} terms outside the span, e.g. {:?}",
                        residual.len(),
                        residual.sample_terms(MAX_OFFENDERS)
                    ));
                }
                rows.push(DeltaRow { p, delta: fractions(&values), residual_terms: residual.len(), values });
            }
            Err(msg) => {
                structural_failure.get_or_insert(msg);
                break;
            }
        }
    }
    let values = rows.last().map(|r| r.values.clone()).unwrap_or_default();
    let p_independent = rows
        .iter()
        .all(|r| r.values.iter().zip(&values).all(|(a, b)| a == b));
    let bounded_by_one = rows.iter().flat_map(|r| &r.values).all(|d| d.abs() <= Rational::from_integer(1.into()));

    let candidate = |ell: usize, conv| delta_closed_form(ell as u32, k, conv).expect("k validated by model");
    let comparisons: Vec<DeltaComparison> = values
        .iter()
        .enumerate()
        .map(|(ell, d)| DeltaComparison {
            ell,
            extracted: to_fraction_string(d),
            alternating: to_fraction_string(&candidate(ell, SignConvention::Alternating)),
            positive: to_fraction_string(&candidate(ell, SignConvention::Positive)),
            alternating_next: to_fraction_string(&candidate(ell + 1, SignConvention::Alternating)),
            positive_next: to_fraction_string(&candidate(ell + 1, SignConvention::Positive)),
        })
        .collect();
    let matches = |shift: usize, conv| {
        values.iter().enumerate().all(|(ell, d)| *d == candidate(ell + shift, conv))
    };
    let passed = structural_failure.is_none() && p_independent && bounded_by_one;
    Ok(DeltaReport {
        k: loc.k(),
        pmax,
        delta: fractions(&values),
        rows,
        p_independent,
        bounded_by_one,
        alternating_matches: matches(0, SignConvention::Alternating),
        positive_matches: matches(0, SignConvention::Positive),
        alternating_next_matches: matches(1, SignConvention::Alternating),
        positive_next_matches: matches(1, SignConvention::Positive),
        comparisons,
        structural_failure,
        passed,
        values,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaRow {
    pub j: usize,
    /// `gamma_1 ..= gamma_j`
    pub gamma: Vec<String>,
    pub polynomial_residual: usize,
    pub operator_residual_terms: usize,
    /// Residual of `[X1, N_j] + X1 * lhs`.
    pub bracket_residual_terms: usize,
    /// Values of `l` where the scalar per-`l` form fails.
    pub scalar_form_failures: Vec<usize>,
    #[serde(skip)]
    pub values: Vec<Rational>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaReport {
    pub k: u32,
    pub jmax: usize,
    pub rows: Vec<GammaRow>,
    pub toeplitz_consistent: bool,
    pub passed: bool,
}

/// `sum_{j'} sum_{l=1}^{j'} a^j_{j'} (-1/k)^l / l! M^{j'-l}/(j'-l)!` as a
/// coefficient vector over `M^s`.
fn gamma_lhs(loc: &Localizer, j: usize) -> Vec<Rational> {
    let row = loc.table().row(j).expect("row within jmax");
    let minus_inv_k = rat(-1, loc.k() as i64);
    let mut out = vec![Rational::zero(); j + 1];
    for (jp, a) in row.iter().enumerate() {
        for ell in 1..=jp {
            let s = jp - ell;
            out[s] += a * pow(&minus_inv_k, ell as u32) * inv_factorial(ell as u32) * inv_factorial(s as u32);
        }
    }
    out
}

pub fn verify_gamma_expansion(loc: &Localizer, jmax: usize) -> Result<GammaReport, LocalizeError> {
    if jmax < 1 {
        return Err(LocalizeError::Range("verify_gamma_expansion needs jmax >= 1".into()));
    }
    loc.n(jmax)?;
    let f = loc.fields();
    let table = loc.table();
    let minus_inv_k = rat(-1, loc.k() as i64);
    let mut rows = Vec::new();
    for j in 1..=jmax {
        let lhs = gamma_lhs(loc, j);
        // N_s has leading coefficient 1/s! on M^s: back-substitute from the top.
        let mut rest = lhs.clone();
        let mut gamma = vec![Rational::zero(); j + 1];
        for s in (0..j).rev() {
            let g = &rest[s] * Rational::from_integer(factorial(s as u32));
            for (i, c) in n_as_m_polynomial(table, s).iter().enumerate() {
                rest[i] -= &g * c;
            }
            gamma[j - s] = g;
        }
        let polynomial_residual = rest.iter().filter(|c| !c.is_zero()).count();

        let mut lhs_op = DiffOp::zero();
        for (s, c) in lhs.iter().enumerate() {
            lhs_op += &loc.m_scaled(s)?.scale(&(c * Rational::from_integer(factorial(s as u32))));
        }
        let mut rhs_op = DiffOp::zero();
        for s in 0..j {
            rhs_op += &loc.n(s)?.scale(&gamma[j - s]);
        }
        let operator_residual_terms = (&lhs_op - &rhs_op).len();
        let bracket = commutator(&f.x1, loc.n(j)?);
        let bracket_residual_terms = (&bracket + &(&f.x1 * &lhs_op)).len();

        // per-l scalar form, with delta_m = gamma_{m+1}
        let a = |jj: usize, ll: usize| table.get(jj, ll).cloned().expect("entry within table");
        let scalar_form_failures = (0..j)
            .filter(|&ell| {
                let left = (1..=j - ell).fold(Rational::zero(), |acc, h| {
                    acc + a(j, ell + h) * pow(&minus_inv_k, h as u32) * inv_factorial(h as u32)
                });
                let right = (1..=j - ell).fold(Rational::zero(), |acc, h| {
                    acc + &gamma[j - ell - h + 1] * a(ell + h - 1, ell)
                });
                left != right
            })
            .collect();

        let values = gamma[1..].to_vec();
        rows.push(GammaRow {
            j,
            gamma: fractions(&values),
            polynomial_residual,
            operator_residual_terms,
            bracket_residual_terms,
            scalar_form_failures,
            values,
        });
    }
    let longest = rows.last().map(|r| r.values.clone()).unwrap_or_default();
    let toeplitz_consistent = rows
        .iter()
        .all(|r| r.values.iter().zip(&longest).all(|(a, b)| a == b));
    let passed = toeplitz_consistent
        && rows.iter().all(|r| {
            r.polynomial_residual == 0
                && r.operator_residual_terms == 0
                && r.bracket_residual_terms == 0
                && r.scalar_form_failures.is_empty()
        });
    Ok(GammaReport { k: loc.k(), jmax, rows, toeplitz_consistent, passed })
}

#[derive(Debug, Clone, Serialize)]
pub struct StirlingRow {
    pub j: u32,
    /// Coefficients of `t^l dt^l` for `l = 1..=j`.
    pub coefficients: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StirlingReport {
    pub jmax: u32,
    pub rows: Vec<StirlingRow>,
    pub first_mismatch: Option<(u32, u32)>,
    pub stray_terms: usize,
    pub passed: bool,
}

/// Expands `(t dt)^j` and matches it against the closed-form `B^j_l`.
pub fn verify_stirling_identity(jmax: u32) -> Result<StirlingReport, LocalizeError> {
    if jmax < 1 {
        return Err(LocalizeError::Range("verify_stirling_identity needs jmax >= 1".into()));
    }
    let euler = &DiffOp::t() * &DiffOp::dt();
    let mut power = DiffOp::one();
    let mut rows = Vec::new();
    let mut first_mismatch = None;
    let mut stray_terms = 0;
    for j in 1..=jmax {
        power = &power * &euler;
        let mut expected = DiffOp::zero();
        let mut coefficients = Vec::new();
        for ell in 1..=j {
            let key = Monomial { t: ell, dt: ell, ..Monomial::default() };
            let b = stirling_b(j, ell).expect("1 <= l <= j");
            if power.coeff(&key) != b && first_mismatch.is_none() {
                first_mismatch = Some((j, ell));
            }
            coefficients.push(to_fraction_string(&power.coeff(&key)));
            expected += &DiffOp::term(key, b);
        }
        let stray = (&power - &expected).terms().filter(|(m, _)| m.t != m.dt || m.t == 0).count();
        stray_terms += stray;
        rows.push(StirlingRow { j, coefficients });
    }
    let passed = first_mismatch.is_none() && stray_terms == 0;
    Ok(StirlingReport { jmax, rows, first_mismatch, stray_terms, passed })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundScan {
    pub jmax: usize,
    /// `m_j = max_l |a^j_l|`
    pub per_j_max: Vec<String>,
    /// `m_j^(1/j)` for `j >= 1`
    pub per_j_root: Vec<f64>,
    /// Least `c` with `m_j <= c^j` on `1..=jmax`.
    pub c_min_empirical: f64,
    /// `(sum_l B^j_l l!/j!)^(1/j)`, the constant in
    /// `|(t dt)^j v|/j! <= C^j sum_l |t^l dt^l v|/l!`.
    pub stirling_rate: Vec<f64>,
    pub stirling_rate_max: f64,
}

pub fn bound_scan_a(jmax: usize) -> Result<BoundScan, LocalizeError> {
    if jmax < 2 {
        return Err(LocalizeError::Range("bound_scan_a needs jmax >= 2".into()));
    }
    let table = a_table_recurrence(jmax);
    let maxes = table.row_max_abs();
    let per_j_root: Vec<f64> = maxes
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, m)| (ln_abs(m) / j as f64).exp())
        .collect();
    let c_min_empirical = per_j_root.iter().cloned().fold(0.0, f64::max);
    let stirling_rate: Vec<f64> = (1..=jmax as u32)
        .map(|j| {
            let sum = (1..=j).fold(Rational::zero(), |acc, ell| {
                acc + stirling_b(j, ell).expect("1 <= l <= j") * Rational::from_integer(factorial(ell))
            }) / Rational::from_integer(factorial(j));
            to_f64(&sum).powf(1.0 / j as f64)
        })
        .collect();
    let stirling_rate_max = stirling_rate.iter().cloned().fold(0.0, f64::max);
    Ok(BoundScan {
        jmax,
        per_j_max: fractions(&maxes),
        per_j_root,
        c_min_empirical,
        stirling_rate,
        stirling_rate_max,
    })
}
