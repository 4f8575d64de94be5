use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::exactalg::rational::{rat, to_f64, to_fraction_string, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CutoffError {
    #[error("N must be a power of two, got {0}")]
    NotPowerOfTwo(u64),
    #[error("N must be at least {min}, got {got}")]
    TooSmall { min: u64, got: u64 },
    #[error("need r1 < r2")]
    EmptyInterval,
    #[error("band index {k} outside 1..={bands}")]
    BandIndex { k: usize, bands: usize },
    #[error("constant C must be positive and finite")]
    BadConstant,
}

pub(crate) fn check_power_of_two(n: u64, min: u64) -> Result<u32, CutoffError> {
    if !n.is_power_of_two() {
        return Err(CutoffError::NotPowerOfTwo(n));
    }
    if n < min {
        return Err(CutoffError::TooSmall { min, got: n });
    }
    Ok(n.trailing_zeros())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Band {
    pub k: usize,
    pub r1: Rational,
    pub r2: Rational,
    /// `d_k = (r2 - r1) / (4 k^2)`
    pub d: Rational,
    /// `N_k = N / 2^(k-1)`
    pub budget: u64,
}

/// Nested bands `Omega_0 = [r1, r2] ⊃ Omega_1 ⊃ ... ⊃ Omega_{log2 N}`,
/// each shrinking the previous one by `d_k` at both ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandFamily {
    pub r1: Rational,
    pub r2: Rational,
    pub n: u64,
    pub bands: Vec<Band>,
}

impl BandFamily {
    pub fn width(&self) -> Rational {
        &self.r2 - &self.r1
    }

    pub fn band(&self, k: usize) -> Result<&Band, CutoffError> {
        if k == 0 || k > self.bands.len() {
            return Err(CutoffError::BandIndex { k, bands: self.bands.len() });
        }
        Ok(&self.bands[k - 1])
    }

    /// `Omega_{k-1}`; `Omega_0` is the whole interval.
    pub fn outer(&self, k: usize) -> Result<(Rational, Rational), CutoffError> {
        self.band(k)?;
        Ok(if k == 1 {
            (self.r1.clone(), self.r2.clone())
        } else {
            let b = &self.bands[k - 2];
            (b.r1.clone(), b.r2.clone())
        })
    }

    /// `sum_k 2 d_k`, the total amount cut from the interval.
    pub fn total_shrinkage(&self) -> Rational {
        self.bands.iter().fold(Rational::zero(), |acc, b| acc + &b.d * rat(2, 1))
    }

    /// Exact check of the schedule, nesting and non-emptiness.
    pub fn geometry_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let w = self.width();
        let (mut lo, mut hi) = (self.r1.clone(), self.r2.clone());
        for (i, b) in self.bands.iter().enumerate() {
            let k = i + 1;
            if b.k != k {
                out.push(format!("band {k} labelled {}", b.k));
            }
            if b.d != &w / Rational::from_integer((4 * k * k).into()) {
                out.push(format!("d_{k} = {} off schedule", to_fraction_string(&b.d)));
            }
            if b.r1 != &lo + &b.d || b.r2 != &hi - &b.d {
                out.push(format!("band {k} not shrunk by d_{k}"));
            }
            if b.r1 >= b.r2 {
                out.push(format!("band {k} empty"));
            }
            if b.budget != self.n >> (k - 1) {
                out.push(format!("budget of band {k} is {}", b.budget));
            }
            lo = b.r1.clone();
            hi = b.r2.clone();
        }
        let cap = w * pi2_over_12_lower();
        if self.total_shrinkage() >= cap {
            out.push("total shrinkage reaches (r2 - r1) pi^2/12".into());
        }
        out
    }

    pub fn summary(&self) -> Vec<BandSummary> {
        self.bands
            .iter()
            .map(|b| BandSummary {
                k: b.k,
                r1: to_fraction_string(&b.r1),
                r2: to_fraction_string(&b.r2),
                d: to_fraction_string(&b.d),
                budget: b.budget,
            })
            .collect()
    }
}

/// `pi^2/12` rounded down, so `shrinkage < width * this` is sufficient.
fn pi2_over_12_lower() -> Rational {
    rat(822_467_033, 1_000_000_000)
}

#[derive(Debug, Clone, Serialize)]
pub struct BandSummary {
    pub k: usize,
    pub r1: String,
    pub r2: String,
    pub d: String,
    pub budget: u64,
}

pub fn build_bands(r1: Rational, r2: Rational, n: u64) -> Result<BandFamily, CutoffError> {
    if r1 >= r2 {
        return Err(CutoffError::EmptyInterval);
    }
    let count = check_power_of_two(n, 4)? as usize;
    let w = &r2 - &r1;
    let mut bands = Vec::with_capacity(count);
    let (mut lo, mut hi) = (r1.clone(), r2.clone());
    for k in 1..=count {
        let d = &w / Rational::from_integer((4 * k * k).into());
        lo = &lo + &d;
        hi = &hi - &d;
        bands.push(Band { k, r1: lo.clone(), r2: hi.clone(), d, budget: n >> (k - 1) });
    }
    Ok(BandFamily { r1, r2, n, bands })
}

pub(crate) fn f64_of(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| to_f64(q))
}
