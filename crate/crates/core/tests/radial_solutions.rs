//! Properties of solved radial profiles, checked against independent oracles.

use polyelast::energy::{embed_profile, full_energy, radial_energy};
use polyelast::radial_bvp::{
    core_fit, ddot_closed_form, rescale_check, shoot, solve_bvp, z_interval_bound_check, BvpOptions, BvpSolution,
    LiftOff, RadialProfile,
};
use polyelast::rho::{build_rho, RhoSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `r''` from the equation solved for the second derivative, without the closed form for `d'`.
fn second_derivative(x: f64, r: f64, p: f64, m: u32, rho: &RhoSpec) -> f64 {
    let mf = m as f64;
    let k = rho.ddrho(mf * r * p / x);
    let lhs = x + mf * mf * k * r * r / x;
    let rhs = mf * mf * r / x - p - mf * mf * k * r * p * p / x + mf * mf * k * r * r * p / (x * x);
    rhs / lhs
}

/// Classical fixed-step RK4 in `t = ln R` on the state `(r, r')`.
fn rk4(m: u32, rho: &RhoSpec, x0: f64, state: (f64, f64), x1: f64, steps: usize) -> (f64, f64) {
    let f = |t: f64, y: [f64; 2]| {
        let x = t.exp();
        [x * y[1], x * second_derivative(x, y[0], y[1], m, rho)]
    };
    let (t0, t1) = (x0.ln(), x1.ln());
    let h = (t1 - t0) / steps as f64;
    let mut y = [state.0, state.1];
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let k1 = f(t, y);
        let k2 = f(t + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = f(t + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
        let k4 = f(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    (y[0], y[1])
}

fn solve(m: u32, gamma: f64, delay: f64) -> (RhoSpec, BvpSolution) {
    let rho = build_rho(gamma, 1.0, delay).unwrap();
    let sol = solve_bvp(m, &rho, &BvpOptions::default()).unwrap();
    (rho, sol)
}

const CASES: [(u32, f64, f64); 12] = [
    (2, 0.25, 0.0),
    (2, 0.25, 0.5),
    (2, 0.5, 0.0),
    (2, 0.5, 0.5),
    (2, 2.0, 0.0),
    (2, 2.0, 0.5),
    (3, 0.25, 0.0),
    (3, 0.25, 0.5),
    (3, 0.5, 0.0),
    (3, 0.5, 0.5),
    (3, 2.0, 0.0),
    (3, 2.0, 0.5),
];

#[test]
fn shooting_matches_fine_rk4() {
    let rho = build_rho(1.0, 1.0, 0.0).unwrap();
    let eps0 = 1e-6;
    let p = shoot(2, &rho, 1.0, eps0, 512).unwrap();
    let (r1, _) = rk4(2, &rho, eps0, (eps0 * eps0, 2.0 * eps0), 1.0, 5120 * 10);
    assert!((p.r_last() - r1).abs() < 1e-6, "{} vs {r1}", p.r_last());
}

#[test]
fn solved_profiles_satisfy_sign_and_regularity_invariants() {
    for &(m, g, delay) in &CASES {
        let (_, sol) = solve(m, g, delay);
        let (p, dg) = (&sol.profile, &sol.diagnostics);
        let tag = format!("M={m} gamma={g} delay={delay}");
        assert!(dg.residual_sup < 1e-6, "{tag}: residual {}", dg.residual_sup);
        assert!(p.r.iter().all(|&v| v >= -1e-10), "{tag}");
        assert!(p.dr.iter().all(|&v| v >= -1e-8), "{tag}");
        assert!(dg.d.iter().all(|&v| v >= -1e-8), "{tag}");
        assert!(dg.ddot.iter().all(|&v| v >= -1e-8), "{tag}");
        assert!(dg.d[0] <= 1e-4, "{tag}");
        assert!(dg.zdot_sign_changes(1e-9) <= 1, "{tag}");
        assert_eq!(dg.lift_off, LiftOff::Immediate, "{tag}");
        assert!(
            (dg.dm_estimate - m as f64).abs() <= 0.05 * m as f64,
            "{tag}: {}",
            dg.dm_estimate
        );
        assert!(z_interval_bound_check(p, dg).unwrap(), "{tag}");
    }
}

#[test]
fn ddot_matches_differences_along_trajectory() {
    for &(m, g, delay) in &CASES {
        let (rho, sol) = solve(m, g, delay);
        let p = &sol.profile;
        let mf = m as f64;
        for i in (8..p.len() - 1).step_by(7) {
            let closed = ddot_closed_form(p.grid[i], p.r[i], p.dr[i], m, &rho);
            if closed.abs() <= 1e-3 {
                continue;
            }
            let x = p.grid[i];
            let h = 1e-4 * x;
            let d_at = |y: f64| {
                let (r, dr) = rk4(m, &rho, x, (p.r[i], p.dr[i]), y, 200);
                mf * r * dr / y
            };
            let fd = (d_at(x + h) - d_at(x - h)) / (2.0 * h);
            let rel = ((fd - closed) / closed).abs();
            assert!(rel < 1e-5, "M={m} gamma={g} delay={delay} R={x}: {fd} vs {closed}");
        }
    }
}

#[test]
fn delayed_penalty_core_is_a_power_law() {
    for &(m, g, delay) in CASES.iter().filter(|c| c.2 > 0.0) {
        let (rho, sol) = solve(m, g, delay);
        let core = sol.diagnostics.penalty_core.expect("d starts below the delay");
        let fit = core_fit(&sol.profile, &rho, &core).unwrap();
        assert!(fit.fit_error < 1e-4, "M={m} gamma={g}: {fit:?}");
        assert!(fit.c1_mismatch < 1e-5, "M={m} gamma={g}: {fit:?}");
        // The penalty lift-off radius sits inside the grid cell where d crosses the delay.
        let i = sol.diagnostics.d.iter().position(|&d| d > delay).unwrap();
        assert!(sol.profile.grid[i - 1] <= core.delta && core.delta <= sol.profile.grid[i]);
        assert_eq!(
            sol.diagnostics.lift_off_with_penalty(),
            LiftOff::Delayed { delta: core.delta }
        );
    }
}

#[test]
fn rescaled_profiles_stay_solutions() {
    for &(m, g, delay) in &CASES {
        let (rho, sol) = solve(m, g, delay);
        let res = rescale_check(&sol.profile, &rho, 0.5).unwrap();
        assert!(res < 1e-4, "M={m} gamma={g} delay={delay}: {res}");
        assert!(res <= 10.0 * sol.diagnostics.residual_sup);
    }
}

#[test]
fn solution_beats_localized_perturbations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for &(m, g, delay) in &[(2, 0.5, 0.0), (3, 2.0, 0.5)] {
        let (rho, sol) = solve(m, g, delay);
        let base = radial_energy(&sol.profile, &rho).total;
        for _ in 0..50 {
            let c: f64 = rng.gen_range(0.1..0.9);
            let w: f64 = rng.gen_range(0.02..0.1_f64.min(1.0 - c));
            let amp: f64 = rng.gen_range(-0.05..0.05);
            let bumped = RadialProfile::from_fn(m, sol.profile.grid.clone(), |x| {
                let (r, dr) = sol.profile.eval(x);
                let s = (x - c) / w;
                if s.abs() >= 1.0 {
                    (r, dr)
                } else {
                    let b = (1.0 - s * s).powi(3);
                    let db = -6.0 * s * (1.0 - s * s).powi(2) / w;
                    (r + amp * b, dr + amp * db)
                }
            })
            .unwrap();
            let e = radial_energy(&bumped, &rho).total;
            assert!(base <= e + 1e-6, "bump at {c} width {w} amp {amp}: {base} > {e}");
        }
    }
}

#[test]
fn grid_doubling_stays_within_error_estimate() {
    for &(m, g, delay) in &CASES {
        let (rho, sol) = solve(m, g, delay);
        let fine = solve_bvp(
            m,
            &rho,
            &BvpOptions {
                n_nodes: 1024,
                ..BvpOptions::default()
            },
        )
        .unwrap();
        let coarse = radial_energy(&sol.profile, &rho);
        let e2 = radial_energy(&fine.profile, &rho).total;
        assert!(
            (e2 - coarse.total).abs() < 4.0 * coarse.quad_error_estimate,
            "M={m} gamma={g} delay={delay}: change {} vs estimate {}",
            (e2 - coarse.total).abs(),
            coarse.quad_error_estimate
        );
    }
}

#[test]
fn planar_quadrature_agrees_with_radial() {
    for &(m, g, delay) in &[(2, 0.5, 0.0), (3, 2.0, 0.5)] {
        let (rho, sol) = solve(m, g, delay);
        let radial = radial_energy(&sol.profile, &rho).total;
        let planar = full_energy(&embed_profile(&sol.profile, 512, 64), &rho).total;
        assert!(((planar - radial) / radial).abs() < 1e-4, "{planar} vs {radial}");
    }
}
