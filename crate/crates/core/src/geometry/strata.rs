use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::poly::{poisson_bracket, Poly6, Var};
use crate::exactalg::rational::{from_f64, rat, to_f64, Rational};

pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("covector (tau, xi) must be nonzero")]
    ZeroCovector,
    #[error("point is not on stratum {expected:?} (classified as {found:?})")]
    OffStratum { expected: StratumLabel, found: StratumLabel },
    #[error("{0} is only defined for the spiral model")]
    NeedsSpiral(&'static str),
    #[error("invalid integration request: {0}")]
    InvalidStep(String),
    #[error("Richardson estimate {estimate:e} exceeds tolerance {tol:e} at t = {time}")]
    StepRejected { time: f64, estimate: f64, tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum ModelParams {
    /// `X2 = x1 D2 - x2 D1 + t^k (x1 D1 + x2 D2)`
    Closed { k: u32 },
    /// `X2 = g1 g2 [<x, A D> + t^k (x1 D1 + x2 D2)]` on `a < |x| < b`
    Spiral { k: u32, mu: f64, a: f64, b: f64 },
}

impl ModelParams {
    pub fn closed(k: i64) -> Result<Self, GeometryError> {
        Ok(ModelParams::Closed { k: check_k(k)? })
    }

    pub fn spiral(k: i64, mu: f64, a: f64, b: f64) -> Result<Self, GeometryError> {
        let k = check_k(k)?;
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(GeometryError::InvalidParams(format!("mu must be positive, got {mu}")));
        }
        if !(a > 0.0 && a < b && b.is_finite()) {
            return Err(GeometryError::InvalidParams(format!("need 0 < a < b, got a = {a}, b = {b}")));
        }
        Ok(ModelParams::Spiral { k, mu, a, b })
    }

    pub fn k(&self) -> u32 {
        match *self {
            ModelParams::Closed { k } | ModelParams::Spiral { k, .. } => k,
        }
    }

    fn mu(&self) -> Rational {
        match *self {
            ModelParams::Closed { .. } => Rational::zero(),
            ModelParams::Spiral { mu, .. } => from_f64(mu).expect("validated finite"),
        }
    }

    /// Angular part of the characteristic function: `x1 xi2 - x2 xi1 + mu <x, xi>`
    /// (`mu = 0` for the closed model), which is `<x, A xi>` for the spiral model.
    pub fn angular(&self) -> Poly6 {
        let v = Poly6::var;
        let ang = &(&v(Var::X1) * &v(Var::Xi2)) - &(&v(Var::X2) * &v(Var::Xi1));
        &ang + &radial().scale(&self.mu())
    }

    /// Characteristic function `angular + t^k <x, xi>`.
    pub fn char_function(&self) -> Poly6 {
        &self.angular() + &(&Poly6::var(Var::T).pow(self.k()) * &radial())
    }
}

fn check_k(k: i64) -> Result<u32, GeometryError> {
    if !(2..=64).contains(&k) {
        return Err(GeometryError::InvalidParams(format!("k must be in 2..=64, got {k}")));
    }
    Ok(k as u32)
}

/// `<x, xi>`
fn radial() -> Poly6 {
    let v = Poly6::var;
    &(&v(Var::X1) * &v(Var::Xi1)) + &(&v(Var::X2) * &v(Var::Xi2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StratumLabel {
    Noncharacteristic,
    Sigma1,
    Sigma2,
    /// Characteristic points at `t = 0` not covered by the printed strata.
    SigmaTop,
    /// `(tau, xi) = 0`; never returned, zero covectors are rejected.
    ZeroSection,
}

impl std::fmt::Display for StratumLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Covector {
    pub t: f64,
    pub x: [f64; 2],
    pub tau: f64,
    pub xi: [f64; 2],
}

impl Covector {
    pub fn point(&self) -> [f64; 6] {
        [self.t, self.x[0], self.x[1], self.tau, self.xi[0], self.xi[1]]
    }

    fn fiber_norm(&self) -> f64 {
        (self.tau * self.tau + self.xi[0] * self.xi[0] + self.xi[1] * self.xi[1]).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCovector {
    pub t: Rational,
    pub x: [Rational; 2],
    pub tau: Rational,
    pub xi: [Rational; 2],
}

impl ExactCovector {
    pub fn point(&self) -> [Rational; 6] {
        [
            self.t.clone(),
            self.x[0].clone(),
            self.x[1].clone(),
            self.tau.clone(),
            self.xi[0].clone(),
            self.xi[1].clone(),
        ]
    }

    pub fn to_f64(&self) -> Covector {
        Covector {
            t: to_f64(&self.t),
            x: [to_f64(&self.x[0]), to_f64(&self.x[1])],
            tau: to_f64(&self.tau),
            xi: [to_f64(&self.xi[0]), to_f64(&self.xi[1])],
        }
    }
}

/// Zero tests for the defining functions, in the order the strata need them.
struct Tests {
    tau: bool,
    char_fn: bool,
    t: bool,
    x_dot_xi: bool,
}

fn decide(params: &ModelParams, z: Tests) -> StratumLabel {
    if !z.tau || !z.char_fn {
        return StratumLabel::Noncharacteristic;
    }
    if !z.t {
        return StratumLabel::Sigma1;
    }
    match params {
        ModelParams::Closed { .. } => StratumLabel::Sigma2,
        ModelParams::Spiral { .. } if !z.x_dot_xi => StratumLabel::Sigma2,
        ModelParams::Spiral { .. } => StratumLabel::SigmaTop,
    }
}

/// Floating-point classification; a defining function counts as zero when
/// it is within `tol` times its natural scale at the point.
pub fn classify(c: &Covector, params: &ModelParams, tol: f64) -> Result<StratumLabel, GeometryError> {
    let fiber = c.fiber_norm();
    if fiber == 0.0 {
        return Err(GeometryError::ZeroCovector);
    }
    let xn = c.x[0].hypot(c.x[1]);
    let mu = match *params {
        ModelParams::Closed { .. } => 0.0,
        ModelParams::Spiral { mu, .. } => mu,
    };
    let pt = c.point();
    let char_scale = fiber * xn * (1.0 + mu + c.t.abs().powi(params.k() as i32));
    let small = |v: f64, scale: f64| v.abs() <= tol * scale;
    Ok(decide(
        params,
        Tests {
            tau: small(c.tau, fiber),
            char_fn: small(params.char_function().eval_f64(&pt), char_scale),
            t: small(c.t, 1.0),
            x_dot_xi: small(radial().eval_f64(&pt), fiber * xn),
        },
    ))
}

pub fn classify_exact(c: &ExactCovector, params: &ModelParams) -> Result<StratumLabel, GeometryError> {
    if c.tau.is_zero() && c.xi.iter().all(Zero::is_zero) {
        return Err(GeometryError::ZeroCovector);
    }
    let pt = c.point();
    Ok(decide(
        params,
        Tests {
            tau: c.tau.is_zero(),
            char_fn: params.char_function().eval(&pt).is_zero(),
            t: c.t.is_zero(),
            x_dot_xi: radial().eval(&pt).is_zero(),
        },
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct SymplecticReport {
    pub stratum: StratumLabel,
    pub defining_functions: Vec<String>,
    pub bracket_matrix: Vec<Vec<f64>>,
    pub rank: usize,
    pub degenerate: bool,
}

fn defining_functions(stratum: StratumLabel, params: &ModelParams) -> Option<(Vec<&'static str>, Vec<Poly6>)> {
    match stratum {
        StratumLabel::Sigma1 => Some((vec!["tau", "char"], vec![Poly6::var(Var::Tau), params.char_function()])),
        StratumLabel::Sigma2 => Some((
            vec!["tau", "t", "angular"],
            vec![Poly6::var(Var::Tau), Poly6::var(Var::T), params.angular()],
        )),
        _ => None,
    }
}

fn bracket_polys(fs: &[Poly6]) -> Vec<Vec<Poly6>> {
    fs.iter()
        .map(|f| fs.iter().map(|g| poisson_bracket(f, g)).collect())
        .collect()
}

/// Exact rank by fraction-exact Gaussian elimination.
pub fn rank_exact(mut m: Vec<Vec<Rational>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        for r in 0..rows {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &pivot;
                for cc in c..cols {
                    let v = &f * &m[rank][cc];
                    m[r][cc] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank with partial pivoting; entries below `tol * max|entry|` count as zero.
pub fn rank_f64(mut m: Vec<Vec<f64>>, tol: f64) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    for c in 0..cols {
        let p = (rank..rows).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()));
        let Some(p) = p else { break };
        if m[p][c].abs() <= tol * scale {
            continue;
        }
        m.swap(rank, p);
        for r in rank + 1..rows {
            let f = m[r][c] / m[rank][c];
            for cc in c..cols {
                m[r][cc] -= f * m[rank][cc];
            }
        }
        rank += 1;
    }
    rank
}

/// Bracket matrix of the stratum's defining functions at a floating point.
pub fn symplectic_rank(
    stratum: StratumLabel,
    point: &Covector,
    params: &ModelParams,
    tol: f64,
) -> Result<SymplecticReport, GeometryError> {
    let found = classify(point, params, tol)?;
    let Some((names, fs)) = defining_functions(stratum, params).filter(|_| found == stratum) else {
        return Err(GeometryError::OffStratum { expected: stratum, found });
    };
    let pt = point.point();
    let matrix: Vec<Vec<f64>> = bracket_polys(&fs)
        .iter()
        .map(|row| row.iter().map(|p| p.eval_f64(&pt)).collect())
        .collect();
    let rank = rank_f64(matrix.clone(), tol.max(f64::EPSILON));
    Ok(SymplecticReport {
        stratum,
        defining_functions: names.iter().map(|s| s.to_string()).collect(),
        degenerate: rank < fs.len(),
        bracket_matrix: matrix,
        rank,
    })
}

/// Same as [`symplectic_rank`], evaluated and reduced without rounding.
pub fn symplectic_rank_exact(
    stratum: StratumLabel,
    point: &ExactCovector,
    params: &ModelParams,
) -> Result<SymplecticReport, GeometryError> {
    let found = classify_exact(point, params)?;
    let Some((names, fs)) = defining_functions(stratum, params).filter(|_| found == stratum) else {
        return Err(GeometryError::OffStratum { expected: stratum, found });
    };
    let pt = point.point();
    let exact: Vec<Vec<Rational>> = bracket_polys(&fs)
        .iter()
        .map(|row| row.iter().map(|p| p.eval(&pt)).collect())
        .collect();
    let rank = rank_exact(exact.clone());
    Ok(SymplecticReport {
        stratum,
        defining_functions: names.iter().map(|s| s.to_string()).collect(),
        degenerate: rank < fs.len(),
        bracket_matrix: exact.iter().map(|r| r.iter().map(to_f64).collect()).collect(),
        rank,
    })
}

fn random_rational<R: Rng>(rng: &mut R, span: i64) -> Rational {
    let d = rng.gen_range(1..=16i64);
    rat(rng.gen_range(-span * d..=span * d), d)
}

fn random_nonzero<R: Rng>(rng: &mut R, span: i64) -> Rational {
    loop {
        let q = random_rational(rng, span);
        if !q.is_zero() {
            return q;
        }
    }
}

/// Random rational point on `tau = 0, char = 0` at the given `t`, with
/// `xi2` solved from the linear constraint. Retries on degenerate draws.
fn sample_on_char<R: Rng>(params: &ModelParams, t: Rational, rng: &mut R) -> ExactCovector {
    let mu = params.mu();
    let tk = crate::exactalg::rational::pow(&t, params.k());
    loop {
        let x = [random_rational(rng, 2), random_rational(rng, 2)];
        let xi1 = random_nonzero(rng, 3);
        // char = xi1 (mu x1 - x2 + t^k x1) + xi2 (x1 + (mu + t^k) x2)
        let c1 = &mu * &x[0] - &x[1] + &tk * &x[0];
        let c2 = &x[0] + (&mu + &tk) * &x[1];
        if c2.is_zero() || x.iter().all(Zero::is_zero) {
            continue;
        }
        let xi2 = -(&xi1 * c1) / c2;
        let radial = &x[0] * &xi1 + &x[1] * &xi2;
        if radial.is_zero() {
            continue;
        }
        return ExactCovector { t: t.clone(), x, tau: Rational::zero(), xi: [xi1, xi2] };
    }
}

pub fn sample_sigma1<R: Rng>(params: &ModelParams, rng: &mut R) -> ExactCovector {
    let t = random_nonzero(rng, 2);
    sample_on_char(params, t, rng)
}

pub fn sample_sigma2<R: Rng>(params: &ModelParams, rng: &mut R) -> ExactCovector {
    sample_on_char(params, Rational::zero(), rng)
}

/// Uniformly random rational covector with nonzero fiber part; almost
/// always off the characteristic set.
pub fn sample_generic<R: Rng>(rng: &mut R) -> ExactCovector {
    loop {
        let c = ExactCovector {
            t: random_rational(rng, 2),
            x: [random_rational(rng, 2), random_rational(rng, 2)],
            tau: if rng.gen_bool(0.5) { Rational::zero() } else { random_rational(rng, 3) },
            xi: [random_rational(rng, 3), random_rational(rng, 3)],
        };
        if !(c.tau.is_zero() && c.xi.iter().all(Zero::is_zero)) {
            return c;
        }
    }
}

/// Whether the exact covector lies on `Char P = {tau = 0, char = 0}`.
pub fn on_char_set(c: &ExactCovector, params: &ModelParams) -> bool {
    c.tau.is_zero() && params.char_function().eval(&c.point()).is_zero()
}
