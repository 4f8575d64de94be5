//! One PASS/FAIL line per acceptance criterion. Criteria listed in
//! `KNOWN_RED` are expected to fail; any other failure makes the run fail.

use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sosverify::cutoff::{default_interval, grid_stability, rate_convergence, recursion_product};
use sosverify::exactalg::rational::rat;
use sosverify::exactalg::{a_entry_generating, a_table_recurrence, bernoulli_generator, matrix_inverse_coeffs};
use sosverify::geometry::strata::{sample_sigma1, sample_sigma2};
use sosverify::geometry::{initial_state, integrate, symplectic_rank_exact, ModelParams, StratumLabel, Trajectory};
use sosverify::localize::{
    bound_scan_a, extract_delta, verify_x2_localizer, verify_stirling_identity, verify_x2_bracket, Localizer,
};

/// Cutoff constant stability: the measured constant varies by more than 2x
/// across bands and budgets.
const KNOWN_RED: &[u32] = &[10];

const KS: [i64; 4] = [2, 3, 4, 5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c1_coefficients() -> Outcome {
    let start = Instant::now();
    let table = a_table_recurrence(40);
    let mut mismatches = 0;
    for j in 0..=40 {
        for jp in 0..=j {
            let g = a_entry_generating(j, jp).expect("jp <= j");
            if table.get(j, jp) != Some(&g) {
                mismatches += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 5.0,
        format!("861 entries, {mismatches} mismatches, {secs:.2}s (limit 5s)"),
    )
}

fn c2_bernoulli() -> Outcome {
    let inv = matrix_inverse_coeffs(20);
    let gen = bernoulli_generator(20);
    let equal = inv.len() == 21 && (0..=20).all(|m| inv[m] == gen.coeff(m));
    let printed = inv[0] == rat(1, 1) && inv[1] == rat(-1, 2);
    outcome(
        equal && printed,
        format!("21 coefficients equal: {equal}; c0 = {}, c1 = {}", inv[0], inv[1]),
    )
}

fn c3_x2_localizer() -> Outcome {
    let start = Instant::now();
    let mut residual = 0;
    let mut all = true;
    for k in KS {
        let loc = Localizer::new(k, 13).expect("valid k");
        let rep = verify_x2_localizer(&loc, 12).expect("within table");
        residual += rep.entries.iter().map(|e| e.residual_terms).sum::<usize>();
        all &= rep.passed;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        all && residual == 0 && secs < 30.0,
        format!("j <= 12, k in 2..=5: {residual} residual terms, {secs:.2}s (limit 30s)"),
    )
}

fn c4_x2_bracket() -> Outcome {
    let mut residual = 0;
    let mut all = true;
    for k in KS {
        let loc = Localizer::new(k, 13).expect("valid k");
        let rep = verify_x2_bracket(&loc, 12).expect("within table");
        residual += rep.entries.iter().map(|e| e.residual_terms).sum::<usize>();
        all &= rep.passed;
    }
    outcome(all && residual == 0, format!("p <= 12, k in 2..=5: {residual} residual terms"))
}

fn c5_x1_structure() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in KS {
        let loc = Localizer::new(k, 11).expect("valid k");
        let rep = extract_delta(&loc, 10).expect("within table");
        pass &= rep.passed;
        parts.push(format!(
            "k={k}: in span {}, p-independent {}, |delta| <= 1 {}, delta[0..3] = {:?}, alternating {} positive {} alternating(l+1) {} positive(l+1) {}",
            rep.structural_failure.is_none(),
            rep.p_independent,
            rep.bounded_by_one,
            &rep.delta[..rep.delta.len().min(3)],
            rep.alternating_matches,
            rep.positive_matches,
            rep.alternating_next_matches,
            rep.positive_next_matches,
        ));
    }
    outcome(pass, format!("p <= 10; {}", parts.join("; ")))
}

fn c6_stirling() -> Outcome {
    let rep = verify_stirling_identity(15).expect("j >= 1");
    outcome(
        rep.passed,
        format!("j <= 15: first mismatch {:?}, stray terms {}", rep.first_mismatch, rep.stray_terms),
    )
}

fn c7_growth() -> Outcome {
    let scan = bound_scan_a(40).expect("jmax >= 2");
    let worst = scan.per_j_root[1..].iter().cloned().fold(0.0, f64::max);
    outcome(worst <= 4.0, format!("max over 2 <= j <= 40 of max_l |a^j_l|^(1/j) = {worst:.6}"))
}

fn c8_symplectic() -> Outcome {
    let mut s1 = 0;
    let mut s2 = 0;
    let mut total = 0;
    for k in KS {
        let params = ModelParams::closed(k).expect("valid k");
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + k as u64);
        for _ in 0..100 {
            let p = sample_sigma1(&params, &mut rng);
            let r = symplectic_rank_exact(StratumLabel::Sigma1, &p, &params).expect("on stratum");
            s1 += usize::from(!r.degenerate);
            let p = sample_sigma2(&params, &mut rng);
            let r = symplectic_rank_exact(StratumLabel::Sigma2, &p, &params).expect("on stratum");
            s2 += usize::from(r.degenerate);
            total += 1;
        }
    }
    outcome(
        s1 == total && s2 == total,
        format!("k in 2..=5, 100 points each: Sigma1 nondegenerate {s1}/{total}, Sigma2 degenerate {s2}/{total}"),
    )
}

fn run_flow(params: &ModelParams, x0: [f64; 2], xi0: [f64; 2], h: f64) -> (Trajectory, f64) {
    let s0 = initial_state(params, x0, xi0).expect("inside the annulus");
    let start = Instant::now();
    let t = integrate(&s0, params, 50.0, h).expect("step accepted");
    (t, start.elapsed().as_secs_f64())
}

fn c9_flow() -> Outcome {
    // Large mu keeps the drift at h = 1e-3 above the roundoff floor, so the
    // halving ratio measures truncation error.
    let mu = 2.0;
    let params = ModelParams::spiral(2, mu, 1.0, 2.0).expect("valid");
    let (x0, xi0) = ([1.02, 0.0], [1.0, -mu]);
    let (fine, secs) = run_flow(&params, x0, xi0, 1e-3);
    let (finer, secs_half) = run_flow(&params, x0, xi0, 5e-4);
    let (dx, da) = (fine.drift_x_dot_xi(), fine.drift_x_a_xi());
    let ratio_x = dx / finer.drift_x_dot_xi();
    let ratio_a = da / finer.drift_x_a_xi();
    let cf = fine.closed_form_max_rel_dev;
    let monotone = fine.radius_monotone(&params).expect("spiral");
    let pass = dx <= 1e-8
        && da <= 1e-8
        && ratio_x >= 12.0
        && ratio_a >= 12.0
        && cf <= 1e-6
        && monotone
        && secs < 10.0
        && secs_half < 10.0;

    let slow = ModelParams::spiral(2, 0.05, 1.0, 2.0).expect("valid");
    let (a, _) = run_flow(&slow, x0, [1.0, -0.05], 1e-3);
    let (b, _) = run_flow(&slow, x0, [1.0, -0.05], 5e-4);
    let (c, _) = run_flow(&slow, x0, [1.0, -0.05], 1e-2);
    let (d, _) = run_flow(&slow, x0, [1.0, -0.05], 5e-3);
    outcome(
        pass,
        format!(
            "mu=2, t in [0,50], h=1e-3: drifts {dx:.2e} / {da:.2e}, halving ratios {ratio_x:.1} / {ratio_a:.1}, \
             closed form {cf:.2e}, radius monotone {monotone}, {secs:.2}s; \
             info mu=0.05: drift {:.2e} at h=1e-3, ratio {:.1} (roundoff floor), ratio {:.1} for h=1e-2 -> 5e-3",
            a.drift_x_dot_xi(),
            a.drift_x_dot_xi() / b.drift_x_dot_xi(),
            c.drift_x_dot_xi() / d.drift_x_dot_xi(),
        ),
    )
}

fn c10_cutoff() -> Outcome {
    let (r1, r2) = default_interval();
    let grid = grid_stability(r1, r2, 1 << 10, 8).expect("valid grid");
    let top = grid.points.iter().filter(|p| p.n == 1 << 10);
    let (hi, lo) = top.fold((0.0f64, f64::INFINITY), |(h, l), p| (h.max(p.c_measured), l.min(p.c_measured)));
    outcome(
        grid.stable && grid.geometry_ok && grid.all_bounds_hold,
        format!(
            "N <= 2^10, k <= 8: C in [{:.4}, {:.4}], spread {:.2} (limit 2), spread at N=2^10 alone {:.2}; \
             bounds hold with C={:.4}: {}; geometry exact: {}",
            grid.c_min,
            grid.c_max,
            grid.spread,
            hi / lo,
            grid.c_max,
            grid.all_bounds_hold,
            grid.geometry_ok,
        ),
    )
}

fn c11_product() -> Outcome {
    let (r1, r2) = default_interval();
    let c = grid_stability(r1, r2, 1 << 10, 8).expect("valid grid").c_max;
    let cv = rate_convergence(c, 2, 20, 1 << 12, 1e-3).expect("valid");
    let ten = rate_convergence(10.0, 2, 20, 1 << 12, 1e-3).expect("valid");
    let r10 = recursion_product(1 << 10, 10.0).expect("valid").per_n_rate;
    let r14 = recursion_product(1 << 14, 10.0).expect("valid").per_n_rate;
    outcome(
        cv.converged,
        format!(
            "C={c:.4} (measured): max |rate(2N)-rate(N)| over N >= 2^12 = {:.3e}, rate(2^20) = {:.6}; \
             info C=10: gap {:.3e}, rate(2^14)/rate(2^10) - 1 = {:.2e}, non-increasing past 2^6: {}",
            cv.max_gap_from,
            cv.points.last().map(|p| p.per_n_rate).unwrap_or(f64::NAN),
            ten.max_gap_from,
            r14 / r10 - 1.0,
            cv.non_increasing_after_64,
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 11] = [
        (1, c1_coefficients),
        (2, c2_bernoulli),
        (3, c3_x2_localizer),
        (4, c4_x2_bracket),
        (5, c5_x1_structure),
        (6, c6_stirling),
        (7, c7_growth),
        (8, c8_symplectic),
        (9, c9_flow),
        (10, c10_cutoff),
        (11, c11_product),
    ];
    let mut unexpected = Vec::new();
    for (n, f) in criteria {
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {tag}: {}", o.detail);
        if !o.pass && !KNOWN_RED.contains(&n) {
            unexpected.push(n);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: no failures outside {KNOWN_RED:?}");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures {unexpected:?}");
        ExitCode::FAILURE
    }
}
