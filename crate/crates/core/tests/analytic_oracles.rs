//! Exact SOPs checked against independent oracles: literal transcriptions
//! of the printed integrands, a brute-force trapezoid rule, and Monte Carlo.

use noma_sop::analytic::{
    case_thresholds, sop_far_d1, sop_far_d2, sop_near_d1, sop_near_d2, IntegrandCoefficients,
};
use noma_sop::monte_carlo::estimate_sop;
use noma_sop::quadrature::{integrate_decaying, UpperLimit};
use noma_sop::{DecodingOrder, QuadratureConfig, SecrecyTargets, SimulationConfig, SystemParams, User};
use proptest::prelude::*;

fn scenario(rho_r_db: f64, beta: f64) -> SystemParams {
    SystemParams::from_received_snr_db(1.0, 3.0, 50.0, 100.0, rho_r_db, beta).unwrap()
}

/// Printed exponent of the near-user D2 integrand, transcribed literally.
fn printed_near_d2_exponent(y: f64, a: f64, p: f64, b: f64, r: f64, l1: f64, l2: f64) -> f64 {
    let num = (p - 1.0) * ((1.0 - a) * y * r + 1.0) + a * y * r * p;
    let den = (a * r * ((1.0 - a) * y * r + 1.0)
        - (p - 1.0) * ((1.0 - a) * y * r + 1.0) * b * (1.0 - a) * r
        - p * b * a * (1.0 - a) * r * r * y)
        * l1;
    -num / den - y / l2
}

fn printed_far_d2_exponent(y: f64, a: f64, p: f64, b: f64, r: f64, l1: f64, l2: f64) -> f64 {
    let num = (p - 1.0) * (a * y * r + 1.0) + (1.0 - a) * y * r * p;
    let den = ((1.0 - a) * r * (a * y * r + 1.0)
        - (p - 1.0) * (a * y * r + 1.0) * b * a * r
        - p * b * a * (1.0 - a) * r * r * y)
        * l2;
    -num / den - y / l1
}

fn printed_near_d1_exponent(y: f64, a: f64, p: f64, b: f64, r: f64, l1: f64, l2: f64) -> f64 {
    let num = (p - 1.0) * (b * (1.0 - a) * y * r + 1.0) + a * y * r * p;
    let den = (a * r * (b * (1.0 - a) * y * r + 1.0)
        - (p - 1.0) * (b * (1.0 - a) * y * r + 1.0) * b * (1.0 - a) * r
        - p * b * a * (1.0 - a) * r * r * y)
        * l1;
    -num / den - y / l2
}

fn printed_far_d1_exponent(y: f64, a: f64, p: f64, r: f64, l1: f64, l2: f64) -> f64 {
    let num = (p - 1.0) * (a * y * r + 1.0) + (1.0 - a) * y * r * p;
    let den = ((1.0 - a) * r * (a * y * r + 1.0) - (p - 1.0) * (a * y * r + 1.0) * a * r - p * a * (1.0 - a) * r * r * y)
        * l2;
    -num / den - y / l1
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-300
}

proptest! {
    #[test]
    fn coefficients_match_printed_integrands(
        alpha in 0.01f64..0.99,
        r1 in 0.0f64..3.0,
        r2 in 0.0f64..3.0,
        beta in 0.01f64..1.0,
        rho_r in 0.0f64..40.0,
        t in 0.0f64..5.0,
    ) {
        let params = scenario(rho_r, beta);
        let targets = SecrecyTargets::new(r1, r2).unwrap();
        let (rho, l1, l2) = (params.transmit_snr(), params.mean_gain_near(), params.mean_gain_far());
        let (p1, p2) = (targets.pi_near(), targets.pi_far());

        let check = |c: IntegrandCoefficients, y: f64, printed: f64| {
            let d = c.denominator.at(y);
            if d > 1e-9 * c.denominator.c0.abs().max(1.0) {
                let ours = -c.numerator.at(y) / (d * c.legit_mean) - y / c.eaves_mean;
                prop_assert!(close(ours, printed, 1e-9), "{ours} vs {printed}");
            }
            Ok(())
        };
        let y2 = t * l2;
        let y1 = t * l1;
        check(IntegrandCoefficients::near_d2(&targets, alpha, &params), y2,
              printed_near_d2_exponent(y2, alpha, p1, beta, rho, l1, l2))?;
        check(IntegrandCoefficients::far_d2(&targets, alpha, &params), y1,
              printed_far_d2_exponent(y1, alpha, p2, beta, rho, l1, l2))?;
        check(IntegrandCoefficients::near_d1(&targets, alpha, &params), y2,
              printed_near_d1_exponent(y2, alpha, p1, beta, rho, l1, l2))?;
        check(IntegrandCoefficients::far_d1(&targets, alpha, &params), y1,
              printed_far_d1_exponent(y1, alpha, p2, rho, l1, l2))?;
    }

    #[test]
    fn sops_are_probabilities(
        alpha in 0.01f64..0.99,
        r in 0.0f64..2.5,
        beta in 0.01f64..1.0,
        rho_r in 0.0f64..40.0,
    ) {
        let params = scenario(rho_r, beta);
        let targets = SecrecyTargets::new(r, r).unwrap();
        let cfg = QuadratureConfig::default();
        for s in [
            sop_near_d2(&targets, alpha, &params, &cfg).unwrap(),
            sop_far_d2(&targets, alpha, &params, &cfg).unwrap(),
            sop_near_d1(&targets, alpha, &params, &cfg).unwrap(),
            sop_far_d1(&targets, alpha, &params, &cfg).unwrap(),
        ] {
            prop_assert!((0.0..=1.0).contains(&s.value));
        }
    }
}

#[test]
fn case_one_integral_matches_fine_trapezoid() {
    // rho_t = 1e7, lambda = (8e-6, 1e-6), beta = 0.1, Pi_1 = 2, alpha = 0.1.
    let params = SystemParams::new(1.0, 3.0, 50.0, 100.0, 1e7, 0.1).unwrap();
    let targets = SecrecyTargets::new(1.0, 0.0).unwrap();
    let alpha = 0.1;
    let th = case_thresholds(&targets, alpha, &params).unwrap();
    assert!(alpha > th.alpha_1a && alpha < th.alpha_1b);
    let (l1, l2) = (params.mean_gain_near(), params.mean_gain_far());
    let f = |y: f64| printed_near_d2_exponent(y, alpha, 2.0, 0.1, 1e7, l1, l2).exp() / l2;

    let panels = 1_000_000usize;
    let h = th.t1 / panels as f64;
    // The integrand vanishes at T_1 (exponent -> -inf); evaluate that end as 0.
    let mut trap = 0.5 * f(0.0);
    for k in 1..panels {
        trap += f(k as f64 * h);
    }
    trap *= h;

    let coeffs = IntegrandCoefficients::near_d2(&targets, alpha, &params);
    let cfg = QuadratureConfig::default();
    let ours = integrate_decaying(|y| coeffs.integrand(y), 0.0, UpperLimit::Finite(th.t1), &cfg)
        .unwrap()
        .value;
    assert!(close(ours, trap, 1e-6), "adaptive {ours} vs trapezoid {trap}");

    let s = sop_near_d2(&targets, alpha, &params, &cfg).unwrap().value;
    assert!((s - (1.0 - trap)).abs() < 1e-6);
}

fn mc(order: DecodingOrder, user: User, targets: &SecrecyTargets, alpha: f64, params: &SystemParams) -> (f64, f64) {
    let cfg = SimulationConfig::new(1_000_000, 424_242);
    let e = estimate_sop(order, user, targets, alpha, params, &cfg).unwrap();
    (e.value, e.standard_error)
}

#[test]
fn near_d2_agrees_with_simulation() {
    let params = scenario(20.0, 0.1);
    let targets = SecrecyTargets::new(0.5, 0.1).unwrap();
    let ana = sop_near_d2(&targets, 0.33, &params, &QuadratureConfig::default()).unwrap().value;
    let (sim, se) = mc(DecodingOrder::D2, User::Near, &targets, 0.33, &params);
    assert!((ana - sim).abs() <= 3.0 * se, "analytic {ana} sim {sim} se {se}");
}

#[test]
fn far_d2_agrees_with_simulation() {
    let params = scenario(10.0, 0.1);
    let targets = SecrecyTargets::new(0.5, 0.1).unwrap();
    let ana = sop_far_d2(&targets, 0.33, &params, &QuadratureConfig::default()).unwrap().value;
    let (sim, se) = mc(DecodingOrder::D2, User::Far, &targets, 0.33, &params);
    assert!((ana - sim).abs() <= 3.0 * se, "analytic {ana} sim {sim} se {se}");
}

#[test]
fn conventional_order_agrees_with_simulation() {
    let params = scenario(10.0, 0.1);
    let targets = SecrecyTargets::new(0.5, 0.1).unwrap();
    let cfg = QuadratureConfig::default();
    let near = sop_near_d1(&targets, 0.4, &params, &cfg).unwrap().value;
    let far = sop_far_d1(&targets, 0.4, &params, &cfg).unwrap().value;
    let (sn, sen) = mc(DecodingOrder::D1, User::Near, &targets, 0.4, &params);
    let (sf, sef) = mc(DecodingOrder::D1, User::Far, &targets, 0.4, &params);
    assert!((near - sn).abs() <= 3.0 * sen, "near {near} vs {sn} ({sen})");
    assert!((far - sf).abs() <= 3.0 * sef, "far {far} vs {sf} ({sef})");
}

#[test]
fn monotone_in_threshold() {
    let params = scenario(10.0, 0.1);
    let cfg = QuadratureConfig::default();
    let mut prev = 0.0;
    for k in 0..20 {
        let r = 0.1 + k as f64 * 0.1;
        let t = SecrecyTargets::new(r, r).unwrap();
        let s = sop_near_d2(&t, 0.33, &params, &cfg).unwrap().value;
        assert!(s >= prev - 1e-12, "threshold {r}: {s} < {prev}");
        prev = s;
    }
}

#[test]
fn monotone_in_received_snr() {
    let cfg = QuadratureConfig::default();
    let t = SecrecyTargets::new(0.5, 0.1).unwrap();
    for alpha in [0.2, 0.33, 0.5, 0.7] {
        let mut prev = [f64::INFINITY; 2];
        for rho_r in [10.0, 20.0, 30.0, 40.0] {
            let p = scenario(rho_r, 0.1);
            let now = [
                sop_near_d2(&t, alpha, &p, &cfg).unwrap().value,
                sop_far_d2(&t, alpha, &p, &cfg).unwrap().value,
            ];
            for (n, p) in now.iter().zip(prev) {
                assert!(*n <= p + 1e-12);
            }
            prev = now;
        }
    }
}

#[test]
fn continuous_across_case_boundaries() {
    let cfg = QuadratureConfig::default();
    let params = scenario(10.0, 0.1);
    let t = SecrecyTargets::new(1.0, 0.5).unwrap();
    let th = case_thresholds(&t, 0.5, &params).unwrap();
    let eps = 1e-9;
    let below = sop_near_d2(&t, th.alpha_1b - eps, &params, &cfg).unwrap().value;
    let at = sop_near_d2(&t, th.alpha_1b, &params, &cfg).unwrap().value;
    assert!((below - at).abs() < 1e-6, "{below} vs {at}");
    let above = sop_far_d2(&t, th.alpha_2a + eps, &params, &cfg).unwrap().value;
    let at = sop_far_d2(&t, th.alpha_2a, &params, &cfg).unwrap().value;
    assert!((above - at).abs() < 1e-6, "{above} vs {at}");
}

#[test]
fn far_branch_limit_at_lower_boundary() {
    let cfg = QuadratureConfig::default();
    let params = scenario(10.0, 0.1);
    let t = SecrecyTargets::new(0.5, 0.5).unwrap();
    let a2a = case_thresholds(&t, 0.5, &params).unwrap().alpha_2a;
    let at = sop_far_d2(&t, a2a, &params, &cfg).unwrap().value;
    for eps in [1e-6, 1e-8, 1e-10] {
        let s = sop_far_d2(&t, a2a + eps, &params, &cfg).unwrap().value;
        assert!((s - at).abs() < 1e-6 + 10.0 * eps, "eps {eps}: {s} vs {at}");
    }
}

#[test]
fn tolerance_tightening_is_stable() {
    let loose = QuadratureConfig::default().with_relative_tolerance(1e-6);
    let tight = QuadratureConfig::default().with_relative_tolerance(1e-9);
    for rho_r in [10.0, 20.0] {
        let params = scenario(rho_r, 0.1);
        for k in 0..20 {
            let r = 0.1 + k as f64 * 0.1;
            let t = SecrecyTargets::new(r, r).unwrap();
            for f in [sop_near_d2, sop_far_d2, sop_near_d1, sop_far_d1] {
                let a = f(&t, 0.33, &params, &loose).unwrap().value;
                let b = f(&t, 0.33, &params, &tight).unwrap().value;
                assert!((a - b).abs() < 1e-6);
            }
        }
    }
}

/// Just inside the half-line branch the integrand is a spike of width ~1e-9
/// at the origin on a range of ~1e-4; a single coarse first panel misses it.
#[test]
fn narrow_spike_near_origin_is_resolved() {
    let t = SecrecyTargets::new(0.2, 0.01).unwrap();
    let params = scenario(30.0, 0.05);
    let th = case_thresholds(&t, 0.5, &params).unwrap();
    let cfg = QuadratureConfig::default();
    for alpha in [th.alpha_2a - 1e-7, th.alpha_2a + 1e-7] {
        let exact = sop_far_d2(&t, alpha, &params, &cfg).unwrap().value;
        let (sim, se) = mc(DecodingOrder::D2, User::Far, &t, alpha, &params);
        assert!((exact - sim).abs() <= 3.0 * se, "alpha {alpha}: {exact} vs {sim} +- {se}");
        assert!(exact < 1.0 - 1e-4);
    }
}
