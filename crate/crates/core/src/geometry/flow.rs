use std::fmt::Write as _;

use serde::Serialize;

use super::strata::{GeometryError, ModelParams};

/// Per-step Richardson tolerance used by [`integrate`].
pub const DEFAULT_RICHARDSON_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Monitors {
    pub x_dot_xi: f64,
    pub x_a_xi: f64,
    pub norm_x: f64,
    pub norm_xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowState {
    pub time: f64,
    pub x: [f64; 2],
    pub xi: [f64; 2],
    pub monitors: Monitors,
}

#[derive(Debug, Clone, Copy)]
struct Spiral {
    mu: f64,
    a: f64,
    b: f64,
}

impl Spiral {
    fn from(params: &ModelParams) -> Result<Self, GeometryError> {
        match *params {
            ModelParams::Spiral { mu, a, b, .. } => Ok(Spiral { mu, a, b }),
            ModelParams::Closed { .. } => Err(GeometryError::NeedsSpiral("the Hamilton flow")),
        }
    }

    /// `g1 g2 = (|x|^2 - a^2)(b^2 - |x|^2)`
    fn g(&self, x: [f64; 2]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        (r2 - self.a * self.a) * (self.b * self.b - r2)
    }

    /// `A v` with `A = [[mu, 1], [-1, mu]]`
    fn a_mul(&self, v: [f64; 2]) -> [f64; 2] {
        [self.mu * v[0] + v[1], -v[0] + self.mu * v[1]]
    }

    /// `A^T v`
    fn at_mul(&self, v: [f64; 2]) -> [f64; 2] {
        [self.mu * v[0] - v[1], v[0] + self.mu * v[1]]
    }

    fn rhs(&self, y: [f64; 4]) -> [f64; 4] {
        let x = [y[0], y[1]];
        let g = self.g(x);
        let dx = self.at_mul(x);
        let dxi = self.a_mul([y[2], y[3]]);
        [g * dx[0], g * dx[1], -g * dxi[0], -g * dxi[1]]
    }

    /// `d(g1 g2)/dt` along the flow: `2 (x . x') (g2 - g1)`.
    fn g_rate(&self, x: [f64; 2]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let g1 = r2 - self.a * self.a;
        let g2 = self.b * self.b - r2;
        2.0 * self.mu * r2 * g1 * g2 * (g2 - g1)
    }

    fn monitors(&self, x: [f64; 2], xi: [f64; 2]) -> Monitors {
        let axi = self.a_mul(xi);
        Monitors {
            x_dot_xi: x[0] * xi[0] + x[1] * xi[1],
            x_a_xi: x[0] * axi[0] + x[1] * axi[1],
            norm_x: x[0].hypot(x[1]),
            norm_xi: xi[0].hypot(xi[1]),
        }
    }

    fn state(&self, time: f64, y: [f64; 4]) -> FlowState {
        let (x, xi) = ([y[0], y[1]], [y[2], y[3]]);
        FlowState { time, x, xi, monitors: self.monitors(x, xi) }
    }

    fn rk4(&self, y: [f64; 4], h: f64) -> [f64; 4] {
        let add = |a: [f64; 4], b: [f64; 4], s: f64| std::array::from_fn(|i| a[i] + s * b[i]);
        let k1 = self.rhs(y);
        let k2 = self.rhs(add(y, k1, h / 2.0));
        let k3 = self.rhs(add(y, k2, h / 2.0));
        let k4 = self.rhs(add(y, k3, h));
        std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
    }
}

pub fn initial_state(params: &ModelParams, x: [f64; 2], xi: [f64; 2]) -> Result<FlowState, GeometryError> {
    Ok(Spiral::from(params)?.state(0.0, [x[0], x[1], xi[0], xi[1]]))
}

/// `(x', xi') = (g1 g2 A^T x, -g1 g2 A xi)`
pub fn hamilton_rhs(s: &FlowState, params: &ModelParams) -> Result<([f64; 2], [f64; 2]), GeometryError> {
    let d = Spiral::from(params)?.rhs([s.x[0], s.x[1], s.xi[0], s.xi[1]]);
    Ok(([d[0], d[1]], [d[2], d[3]]))
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub h: f64,
    pub states: Vec<FlowState>,
    /// Largest per-step `|y_h - y_{h/2,h/2}|`.
    pub richardson_max: f64,
    /// `int_0^t g1 g2 ds` on the grid.
    pub g_integral: Vec<f64>,
    /// Largest `|xi - xi_closed| / |xi_closed|` over the grid.
    pub closed_form_max_rel_dev: f64,
}

impl Trajectory {
    pub fn drift_x_dot_xi(&self) -> f64 {
        let c0 = self.states[0].monitors.x_dot_xi;
        self.states.iter().map(|s| (s.monitors.x_dot_xi - c0).abs()).fold(0.0, f64::max)
    }

    pub fn drift_x_a_xi(&self) -> f64 {
        let c0 = self.states[0].monitors.x_a_xi;
        self.states.iter().map(|s| (s.monitors.x_a_xi - c0).abs()).fold(0.0, f64::max)
    }

    /// Closed-form deviation restricted to `time <= t_max`.
    pub fn closed_form_dev_until(&self, params: &ModelParams, t_max: f64) -> Result<f64, GeometryError> {
        let sp = Spiral::from(params)?;
        let xi0 = self.states[0].xi;
        Ok(self
            .states
            .iter()
            .zip(&self.g_integral)
            .take_while(|(s, _)| s.time <= t_max + 1e-12)
            .map(|(s, &i)| relative_dev(s.xi, closed_form_xi(sp.mu, i, xi0)))
            .fold(0.0, f64::max))
    }

    /// `|x|` never decreases and never leaves `(a, b]`. Once the orbit has
    /// reached the outer circle to working precision `|x|` jitters by an ulp,
    /// so decreases of a few ulps are not counted.
    pub fn radius_monotone(&self, params: &ModelParams) -> Result<bool, GeometryError> {
        let sp = Spiral::from(params)?;
        let inside = self.states.iter().all(|s| s.monitors.norm_x > sp.a && s.monitors.norm_x <= sp.b);
        let slack = 4.0 * f64::EPSILON;
        let monotone = self
            .states
            .windows(2)
            .all(|w| w[1].monitors.norm_x >= w[0].monitors.norm_x * (1.0 - slack));
        Ok(inside && monotone)
    }

    /// CSV with header; every float printed with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,x1,x2,xi1,xi2,dot_x_xi,x_A_xi,norm_x\n");
        for s in &self.states {
            let cols = [
                s.time,
                s.x[0],
                s.x[1],
                s.xi[0],
                s.xi[1],
                s.monitors.x_dot_xi,
                s.monitors.x_a_xi,
                s.monitors.norm_x,
            ];
            let line: Vec<String> = cols.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

/// `xi(t) = exp(-I A) xi0 = e^{-mu I} [[cos I, -sin I], [sin I, cos I]] xi0`
pub fn closed_form_xi(mu: f64, integral: f64, xi0: [f64; 2]) -> [f64; 2] {
    let decay = (-mu * integral).exp();
    let (s, c) = integral.sin_cos();
    [decay * (c * xi0[0] - s * xi0[1]), decay * (s * xi0[0] + c * xi0[1])]
}

fn relative_dev(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1]) / b[0].hypot(b[1])
}

pub fn integrate(s0: &FlowState, params: &ModelParams, t_end: f64, h: f64) -> Result<Trajectory, GeometryError> {
    integrate_with_tol(s0, params, t_end, h, DEFAULT_RICHARDSON_TOL)
}

/// Fixed-step RK4. Every step is also taken as two half steps; if the two
/// results differ by more than `tol` the run is rejected.
pub fn integrate_with_tol(
    s0: &FlowState,
    params: &ModelParams,
    t_end: f64,
    h: f64,
    tol: f64,
) -> Result<Trajectory, GeometryError> {
    if !(h > 0.0 && t_end > 0.0 && h.is_finite() && t_end.is_finite()) {
        return Err(GeometryError::InvalidStep(format!("need h > 0 and t_end > 0, got h = {h}, t_end = {t_end}")));
    }
    let sp = Spiral::from(params)?;
    let steps = (t_end / h).round() as usize;
    let mut y = [s0.x[0], s0.x[1], s0.xi[0], s0.xi[1]];
    let mut states = Vec::with_capacity(steps + 1);
    states.push(sp.state(0.0, y));
    let mut richardson_max: f64 = 0.0;
    // trapezoid with the endpoint derivative correction -h^2/12 (g'(t) - g'(0))
    let mut trapezoid = 0.0;
    let mut g_prev = sp.g(s0.x);
    let g_rate0 = sp.g_rate(s0.x);
    let mut g_integral = Vec::with_capacity(steps + 1);
    g_integral.push(0.0);
    let mut max_dev: f64 = 0.0;
    for n in 1..=steps {
        let full = sp.rk4(y, h);
        let half = sp.rk4(sp.rk4(y, h / 2.0), h / 2.0);
        let est = (0..4).map(|i| (full[i] - half[i]).abs()).fold(0.0, f64::max);
        let time = n as f64 * h;
        if est > tol {
            return Err(GeometryError::StepRejected { time, estimate: est, tol });
        }
        richardson_max = richardson_max.max(est);
        y = full;
        let x = [y[0], y[1]];
        let g = sp.g(x);
        trapezoid += 0.5 * h * (g_prev + g);
        g_prev = g;
        let integral = trapezoid - h * h / 12.0 * (sp.g_rate(x) - g_rate0);
        g_integral.push(integral);
        let st = sp.state(time, y);
        max_dev = max_dev.max(relative_dev(st.xi, closed_form_xi(sp.mu, integral, s0.xi)));
        states.push(st);
    }
    Ok(Trajectory { h, states, richardson_max, g_integral, closed_form_max_rel_dev: max_dev })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpiralFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    pub points: usize,
}

/// Least-squares fit of `log|x|` against the unwrapped polar angle of `x`,
/// on the part of the orbit with `r_lo <= |x| <= r_hi`.
pub fn spiral_fit(traj: &Trajectory, r_lo: f64, r_hi: f64) -> Option<SpiralFit> {
    let mut angle = 0.0;
    let mut prev = traj.states.first()?.x[1].atan2(traj.states[0].x[0]);
    let mut pts = Vec::new();
    for s in &traj.states {
        let a = s.x[1].atan2(s.x[0]);
        let mut d = a - prev;
        if d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        } else if d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        angle += d;
        prev = a;
        let r = s.monitors.norm_x;
        if r >= r_lo && r <= r_hi {
            pts.push((angle, r.ln()));
        }
    }
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).abs())
        .fold(0.0, f64::max);
    Some(SpiralFit { slope, intercept, max_residual, points: pts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::spiral(2, 0.5, 1.0, 2.0).unwrap()
    }

    #[test]
    fn closed_model_has_no_flow() {
        let p = ModelParams::closed(2).unwrap();
        assert!(matches!(initial_state(&p, [1.5, 0.0], [1.0, 0.0]), Err(GeometryError::NeedsSpiral(_))));
    }

    #[test]
    fn limit_circles_are_stationary() {
        let p = params();
        for x in [[1.0, 0.0], [0.0, 2.0]] {
            let s = initial_state(&p, x, [0.3, -0.7]).unwrap();
            let (dx, dxi) = hamilton_rhs(&s, &p).unwrap();
            assert_eq!(dx, [0.0, 0.0]);
            assert!(dxi.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn radius_grows_inside_annulus() {
        let p = params();
        let s = initial_state(&p, [1.2, 0.5], [1.0, 0.2]).unwrap();
        let (dx, _) = hamilton_rhs(&s, &p).unwrap();
        let half_rate = s.x[0] * dx[0] + s.x[1] * dx[1];
        let r2 = 1.2f64 * 1.2 + 0.25;
        let expected = (r2 - 1.0) * (4.0 - r2) * 0.5 * r2;
        assert!((half_rate - expected).abs() < 1e-12);
    }

    #[test]
    fn closed_form_at_zero_integral_is_identity() {
        assert_eq!(closed_form_xi(0.7, 0.0, [1.5, -2.0]), [1.5, -2.0]);
    }

    #[test]
    fn short_run_conserves_and_spirals() {
        let p = params();
        let s0 = initial_state(&p, [1.1, 0.0], [0.4, 0.9]).unwrap();
        let traj = integrate(&s0, &p, 5.0, 1e-3).unwrap();
        assert!(traj.drift_x_dot_xi() < 1e-10);
        assert!(traj.drift_x_a_xi() < 1e-10);
        assert!(traj.radius_monotone(&p).unwrap());
        assert!(traj.closed_form_max_rel_dev < 1e-6);
        let fit = spiral_fit(&traj, 1.2, 1.8).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-6, "{fit:?}");
        assert!(fit.max_residual < 1e-3);
    }

    #[test]
    fn csv_layout() {
        let p = params();
        let s0 = initial_state(&p, [1.5, 0.0], [1.0, 0.0]).unwrap();
        let traj = integrate(&s0, &p, 0.01, 5e-3).unwrap();
        let csv = traj.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "time,x1,x2,xi1,xi2,dot_x_xi,x_A_xi,norm_x");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 8);
        assert_eq!(first[1], "1.5000000000000000e0");
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn coarse_step_is_rejected() {
        let p = params();
        let s0 = initial_state(&p, [1.1, 0.0], [0.4, 0.9]).unwrap();
        assert!(matches!(
            integrate(&s0, &p, 5.0, 0.5),
            Err(GeometryError::StepRejected { .. })
        ));
        assert!(matches!(integrate(&s0, &p, 5.0, 0.0), Err(GeometryError::InvalidStep(_))));
    }
}
