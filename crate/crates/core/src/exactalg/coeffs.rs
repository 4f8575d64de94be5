//! Scalar coefficient engines: the localizer table `a^j_{j'}` (two independent
//! constructions), the inverse-Toeplitz sequence `c_m`, the Stirling closed
//! form `B^j_l`, and the two printed candidates for `delta_l`.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{
    factorial, int, inv_factorial, parse_fraction, pow, rat, sign_pow,
    to_fraction_string, ParseRationalError, Rational,
};
use super::series::Series;

/// Default depth for exact tables.
pub const DEFAULT_JMAX: usize = 40;

#[derive(Debug, thiserror::Error)]
pub enum CoeffError {
    #[error("index out of range: {what}")]
    OutOfRange { what: String },
    #[error("k must be at least 2, got {0}")]
    InvalidK(i64),
    #[error("malformed coefficient document: {0}")]
    Document(String),
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Truncated series of `t/(e^t - 1)`; coefficient `m` is `B_m/m!`.
pub fn bernoulli_generator(order: usize) -> Series {
    Series::exp_quotient(order)
        .inverse()
        .expect("(e^t - 1)/t has constant term 1")
}

/// Inverse of the unit upper-triangular Toeplitz matrix whose band `m` holds
/// `1/(m+1)!`. Solved by forward substitution on the convolution identity
/// `sum_{i+h=m} c_i/(h+1)! = [m = 0]`.
pub fn matrix_inverse_coeffs(m_max: usize) -> Vec<Rational> {
    let mut c: Vec<Rational> = Vec::with_capacity(m_max + 1);
    c.push(Rational::one());
    for m in 1..=m_max {
        let mut acc = Rational::zero();
        for (i, ci) in c.iter().enumerate() {
            acc += ci * inv_factorial((m - i) as u32 + 1);
        }
        c.push(-acc);
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Recurrence,
    GeneratingFunction,
}

/// Triangular table `a^j_{j'}` for `0 <= j' <= j <= jmax`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffTable {
    rows: Vec<Vec<Rational>>,
    provenance: Provenance,
}

impl CoeffTable {
    pub fn jmax(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn get(&self, j: usize, jprime: usize) -> Option<&Rational> {
        self.rows.get(j).and_then(|row| row.get(jprime))
    }

    /// Row `j` as `[a^j_0, ..., a^j_j]`.
    pub fn row(&self, j: usize) -> Option<&[Rational]> {
        self.rows.get(j).map(Vec::as_slice)
    }

    /// Rows `(j, l)` where `sum_{s=1}^{j-l} a^j_{l+s}/s! != a^{j-1}_l`.
    pub fn recurrence_violations(&self) -> Vec<(usize, usize)> {
        let mut bad = Vec::new();
        for j in 1..self.rows.len() {
            for l in 0..j {
                let lhs = (1..=j - l).fold(Rational::zero(), |acc, s| {
                    acc + &self.rows[j][l + s] * inv_factorial(s as u32)
                });
                if lhs != self.rows[j - 1][l] {
                    bad.push((j, l));
                }
            }
        }
        bad
    }

    /// Rows where `a^j_j = 1` or `a^j_0 = (-1)^j` fails.
    pub fn boundary_violations(&self) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|&j| {
                self.rows[j][j] != Rational::one() || self.rows[j][0] != sign_pow(j as u32)
            })
            .collect()
    }

    /// First entry where two tables differ, if any. Compares up to the smaller depth.
    pub fn first_difference(&self, other: &CoeffTable) -> Option<(usize, usize)> {
        let depth = self.jmax().min(other.jmax());
        (0..=depth)
            .flat_map(|j| (0..=j).map(move |jp| (j, jp)))
            .find(|&(j, jp)| self.rows[j][jp] != other.rows[j][jp])
    }

    /// `max_l |a^j_l|` for each row.
    pub fn row_max_abs(&self) -> Vec<Rational> {
        use num_traits::Signed;
        self.rows
            .iter()
            .map(|row| row.iter().map(|q| q.abs()).max().unwrap_or_else(Rational::zero))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = TableDocument {
            jmax: self.jmax(),
            provenance: self.provenance,
            entries: self
                .rows
                .iter()
                .enumerate()
                .flat_map(|(j, row)| {
                    row.iter()
                        .enumerate()
                        .map(move |(jp, q)| (format!("{j}/{jp}"), to_fraction_string(q)))
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("table document is always serializable")
    }

    pub fn from_json(text: &str) -> Result<CoeffTable, CoeffError> {
        let doc: TableDocument = serde_json::from_str(text)?;
        let bad = |what: String| CoeffError::Document(what);
        let mut rows: Vec<Vec<Option<Rational>>> =
            (0..=doc.jmax).map(|j| vec![None; j + 1]).collect();
        for (key, value) in &doc.entries {
            let (j, jp) = key
                .split_once('/')
                .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
                .ok_or_else(|| bad(format!("bad index key {key:?}")))?;
            let slot = rows
                .get_mut(j)
                .and_then(|row| row.get_mut(jp))
                .ok_or_else(|| bad(format!("index {key} outside the triangle")))?;
            if slot.replace(parse_fraction(value)?).is_some() {
                return Err(bad(format!("duplicate entry {key}")));
            }
        }
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(j, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(jp, q)| q.ok_or_else(|| bad(format!("missing entry {j}/{jp}"))))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CoeffTable {
            rows,
            provenance: doc.provenance,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct TableDocument {
    jmax: usize,
    provenance: Provenance,
    entries: Vec<(String, String)>,
}

/// Builds the table from the recurrence alone: boundary `a^j_0 = (-1)^j`, and
/// `a^j_1..a^j_j` by back-substitution in the unit upper-triangular system
/// whose band `s-1` holds `1/s!`.
pub fn a_table_recurrence(jmax: usize) -> CoeffTable {
    let mut rows: Vec<Vec<Rational>> = vec![vec![Rational::one()]];
    for j in 1..=jmax {
        let prev = &rows[j - 1];
        let mut row = vec![Rational::zero(); j + 1];
        row[0] = sign_pow(j as u32);
        for l in (0..j).rev() {
            let mut rhs = prev[l].clone();
            for s in 2..=j - l {
                rhs -= &row[l + s] * inv_factorial(s as u32);
            }
            row[l + 1] = rhs;
        }
        rows.push(row);
    }
    CoeffTable {
        rows,
        provenance: Provenance::Recurrence,
    }
}

/// `a^j_{j'}`: coefficient of `t^{j-j'}` in `(t/(e^t-1))^{j+1}`.
pub fn a_entry_generating(j: usize, jprime: usize) -> Result<Rational, CoeffError> {
    if jprime > j {
        return Err(CoeffError::OutOfRange {
            what: format!("j' = {jprime} exceeds j = {j}"),
        });
    }
    let order = j - jprime;
    Ok(bernoulli_generator(order).pow(j as u32 + 1).coeff(order))
}

/// Whole table from the generating function, one series power per row.
pub fn a_table_generating(jmax: usize) -> CoeffTable {
    let base = bernoulli_generator(jmax);
    let rows = (0..=jmax)
        .map(|j| {
            let power = base.truncate(j).pow(j as u32 + 1);
            (0..=j).map(|jp| power.coeff(j - jp)).collect()
        })
        .collect();
    CoeffTable {
        rows,
        provenance: Provenance::GeneratingFunction,
    }
}

/// `B^j_l = sum_{m=0}^{l-1} (-1)^m (l-m)^{j-1} / (m! (l-m-1)!)`.
pub fn stirling_b(j: u32, ell: u32) -> Result<Rational, CoeffError> {
    if j == 0 || ell == 0 || ell > j {
        return Err(CoeffError::OutOfRange {
            what: format!("need 1 <= l <= j, got j = {j}, l = {ell}"),
        });
    }
    let mut acc = Rational::zero();
    for m in 0..ell {
        let base = int((ell - m) as i64);
        let term = pow(&base, j - 1) / Rational::from_integer(factorial(m) * factorial(ell - m - 1));
        acc += sign_pow(m) * term;
    }
    Ok(acc)
}

/// Sign layout for the printed `delta_l` partial sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignConvention {
    /// `sum_{h=1}^{l} (-1/k)^h / h!`
    Alternating,
    /// `sum_{h=1}^{l} 1/(k^h h!)`
    Positive,
}

pub fn delta_closed_form(ell: u32, k: i64, convention: SignConvention) -> Result<Rational, CoeffError> {
    if k < 2 {
        return Err(CoeffError::InvalidK(k));
    }
    let ratio = match convention {
        SignConvention::Alternating => rat(-1, k),
        SignConvention::Positive => rat(1, k),
    };
    Ok((1..=ell).fold(Rational::zero(), |acc, h| {
        acc + pow(&ratio, h) * inv_factorial(h)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::{is_integer, rat};

    #[test]
    fn bernoulli_generator_low_orders() {
        assert_eq!(bernoulli_generator(0).coeffs(), &[rat(1, 1)]);
        assert_eq!(
            bernoulli_generator(4).coeffs(),
            &[rat(1, 1), rat(-1, 2), rat(1, 12), rat(0, 1), rat(-1, 720)]
        );
    }

    /// Independent oracle: divide the polynomial `t` by `e^t - 1`, both built
    /// straight from factorials, by long division (`t` divided by a series
    /// with zero constant term means shifting first).
    fn long_division_oracle(order: usize) -> Vec<Rational> {
        // e^t - 1 = t * (1 + t/2! + ...); quotient q satisfies q * (e^t - 1) = t.
        let denom: Vec<Rational> = (1..=order + 2).map(|m| inv_factorial(m as u32)).collect();
        let mut q = Vec::new();
        for m in 0..=order {
            // coefficient of t^{m+1} in q * (e^t - 1)
            let target = if m == 0 { rat(1, 1) } else { rat(0, 1) };
            let partial = (0..m).fold(rat(0, 1), |acc, i| acc + &q[i] * &denom[m - i]);
            q.push((target - partial) / &denom[0]);
        }
        q
    }

    #[test]
    fn bernoulli_generator_matches_long_division() {
        assert_eq!(bernoulli_generator(24).coeffs(), long_division_oracle(24).as_slice());
    }

    #[test]
    fn inverse_coeffs_printed_values() {
        let c = matrix_inverse_coeffs(2);
        assert_eq!(c, vec![rat(1, 1), rat(-1, 2), rat(1, 12)]);
    }

    /// Explicit 3x3 instance of the triangular matrix, inverted by hand-rolled
    /// Gauss-Jordan elimination; the first row of the inverse is (c0, c1, c2).
    #[test]
    fn inverse_coeffs_match_explicit_3x3_inverse() {
        let mut a = vec![
            vec![rat(1, 1), rat(1, 2), rat(1, 6)],
            vec![rat(0, 1), rat(1, 1), rat(1, 2)],
            vec![rat(0, 1), rat(0, 1), rat(1, 1)],
        ];
        let mut inv: Vec<Vec<Rational>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { rat(1, 1) } else { rat(0, 1) }).collect())
            .collect();
        for col in (0..3).rev() {
            for row in 0..col {
                let f = a[row][col].clone();
                for c in 0..3 {
                    let (ar, ir) = (a[col][c].clone(), inv[col][c].clone());
                    a[row][c] -= &f * ar;
                    inv[row][c] -= &f * ir;
                }
            }
        }
        assert_eq!(inv[0], matrix_inverse_coeffs(2));
    }

    #[test]
    fn inverse_coeffs_equal_bernoulli_generator() {
        assert_eq!(matrix_inverse_coeffs(30), bernoulli_generator(30).coeffs());
    }

    #[test]
    fn recurrence_table_small_rows() {
        let t = a_table_recurrence(2);
        assert_eq!(t.row(0).unwrap(), &[rat(1, 1)]);
        assert_eq!(t.row(1).unwrap(), &[rat(-1, 1), rat(1, 1)]);
        assert_eq!(t.row(2).unwrap(), &[rat(1, 1), rat(-3, 2), rat(1, 1)]);
        assert!(t.recurrence_violations().is_empty());
        assert!(t.boundary_violations().is_empty());
    }

    #[test]
    fn generating_entries() {
        assert_eq!(a_entry_generating(2, 1).unwrap(), rat(-3, 2));
        for j in 0..12 {
            assert_eq!(a_entry_generating(j, j).unwrap(), rat(1, 1));
            assert_eq!(a_entry_generating(j, 0).unwrap(), sign_pow(j as u32));
        }
        assert!(a_entry_generating(1, 2).is_err());
    }

    #[test]
    fn generating_table_satisfies_the_recurrence() {
        let t = a_table_generating(16);
        assert_eq!(t.provenance(), Provenance::GeneratingFunction);
        assert!(t.recurrence_violations().is_empty());
        assert!(t.boundary_violations().is_empty());
    }

    #[test]
    fn tables_agree_and_entry_function_agrees() {
        let rec = a_table_recurrence(14);
        assert_eq!(rec.first_difference(&a_table_generating(14)), None);
        for j in 0..=14 {
            for jp in 0..=j {
                assert_eq!(rec.get(j, jp).unwrap(), &a_entry_generating(j, jp).unwrap());
            }
        }
    }

    #[test]
    fn a_tampered_table_is_caught() {
        let mut t = a_table_recurrence(5);
        t.rows[4][2] += rat(1, 1000);
        assert!(t.recurrence_violations().contains(&(4, 1)));
        assert_eq!(t.first_difference(&a_table_generating(5)), Some((4, 2)));
    }

    #[test]
    fn stirling_closed_form_small_values() {
        assert_eq!(stirling_b(2, 1).unwrap(), rat(1, 1));
        assert_eq!(stirling_b(2, 2).unwrap(), rat(1, 1));
        assert_eq!(stirling_b(3, 2).unwrap(), rat(3, 1));
        assert_eq!(stirling_b(5, 3).unwrap(), rat(25, 1));
        for j in 1..20 {
            assert_eq!(stirling_b(j, 1).unwrap(), rat(1, 1));
        }
        assert!(stirling_b(3, 0).is_err());
        assert!(stirling_b(3, 4).is_err());
    }

    #[test]
    fn stirling_values_are_positive_integers() {
        for j in 1..=15 {
            for l in 1..=j {
                let b = stirling_b(j, l).unwrap();
                assert!(is_integer(&b) && b >= rat(1, 1), "B^{j}_{l} = {b}");
            }
        }
    }

    #[test]
    fn delta_candidates() {
        for conv in [SignConvention::Alternating, SignConvention::Positive] {
            assert_eq!(delta_closed_form(0, 3, conv).unwrap(), rat(0, 1));
        }
        assert_eq!(
            delta_closed_form(1, 2, SignConvention::Alternating).unwrap(),
            rat(-1, 2)
        );
        let pos = delta_closed_form(2, 2, SignConvention::Positive).unwrap();
        assert_eq!(pos, rat(5, 8));
        assert!(pos <= rat(1, 1));
        assert!(matches!(
            delta_closed_form(1, 1, SignConvention::Positive),
            Err(CoeffError::InvalidK(1))
        ));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let t = a_table_recurrence(6);
        let text = t.to_json();
        assert!(text.starts_with(r#"{"jmax":6,"provenance":"recurrence","entries":[["0/0","1/1"],["1/0","-1/1"]"#));
        let back = CoeffTable::from_json(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn json_rejects_holes_and_duplicates() {
        let missing = r#"{"jmax":1,"provenance":"recurrence","entries":[["0/0","1/1"],["1/1","1/1"]]}"#;
        assert!(matches!(CoeffTable::from_json(missing), Err(CoeffError::Document(_))));
        let dup = r#"{"jmax":0,"provenance":"recurrence","entries":[["0/0","1/1"],["0/0","1/1"]]}"#;
        assert!(matches!(CoeffTable::from_json(dup), Err(CoeffError::Document(_))));
        let outside = r#"{"jmax":0,"provenance":"recurrence","entries":[["0/1","1/1"]]}"#;
        assert!(CoeffTable::from_json(outside).is_err());
    }
}
