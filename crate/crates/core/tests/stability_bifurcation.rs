mod common;

use arbodyn::bifurcation::{
    beta_hv_critical, bifurcation_coefficients, bifurcation_sweep, coexistence_window, Direction,
};
use arbodyn::equilibria::disease_free_states;
use arbodyn::model::idx;
use arbodyn::stability::{classify, jacobian, phi2_poly, routh_hurwitz_phi2, spectrum, Stability};
use arbodyn::thresholds::basic_reproduction_number;
use arbodyn::{ModelParams, ModelVariant, ParamId};
use common::{any_params, vector_params};
use proptest::prelude::*;

/// Rescales `mu_b` so that the net reproductive number equals `target`.
fn with_net(p: &ModelParams, target: f64) -> ModelParams {
    let mut q = *p;
    q.mu_b *= target / p.net_reproductive_number();
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn routh_hurwitz_matches_quartic_roots(p in any_params(), net in 0.2..3.0f64) {
        let q = with_net(&p, net);
        prop_assume!((q.net_reproductive_number() - 1.0).abs() > 1e-6);
        let rh = routh_hurwitz_phi2(&q).unwrap();
        let roots = phi2_poly(&rh).roots().unwrap();
        let hurwitz = roots.iter().all(|z| z.re < 0.0);
        prop_assert_eq!(rh.satisfied, hurwitz);
        prop_assert_eq!(rh.satisfied, q.net_reproductive_number() < 1.0);
    }

    #[test]
    fn routh_hurwitz_matches_trivial_jacobian(p in any_params(), net in 0.2..3.0f64) {
        let q = with_net(&p, net);
        prop_assume!((q.net_reproductive_number() - 1.0).abs() > 1e-3);
        let (e0, _) = disease_free_states(&q, ModelVariant::FULL).unwrap();
        let verdict = classify(&e0.state, &q, ModelVariant::FULL).unwrap();
        let rh = routh_hurwitz_phi2(&q).unwrap();
        prop_assert_eq!(rh.satisfied, verdict.verdict == Stability::Stable);
    }

    #[test]
    fn dfe_stability_follows_r0(p in vector_params()) {
        let r0 = basic_reproduction_number(&p).unwrap();
        prop_assume!((r0 - 1.0).abs() > 1e-3);
        let (_, e1) = disease_free_states(&p, ModelVariant::FULL).unwrap();
        let verdict = e1.unwrap().stability.verdict;
        let want = if r0 < 1.0 { Stability::Stable } else { Stability::Unstable };
        prop_assert_eq!(verdict, want);
    }

    #[test]
    fn center_manifold_vectors(p in vector_params()) {
        let b = beta_hv_critical(&p).unwrap();
        prop_assume!(b <= 1.0);
        let rep = bifurcation_coefficients(&p).unwrap();
        let vw: f64 = rep.v.iter().zip(&rep.w).map(|(a, c)| a * c).sum();
        prop_assert!((vw - 1.0).abs() < 1e-12);
        prop_assert!(rep.w[idx::I_V] > 0.0);
        prop_assert!(rep.right_residual <= 1e-8 && rep.left_residual <= 1e-8);
        prop_assert!(rep.a2 > 0.0, "{}", rep.a2);
        prop_assert_eq!(rep.direction, Direction::from_coefficients(rep.a1, rep.a2));
    }
}

#[test]
fn trivial_equilibrium_jacobian_entries() {
    let p = ModelParams::baseline();
    let k = p.derived().unwrap();
    let (e0, _) = disease_free_states(&p, ModelVariant::FULL).unwrap();
    let j = jacobian(&e0.state, &p, ModelVariant::FULL).unwrap();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-5 * b.abs().max(1e-12);
    // Aquatic block: eggs fed by every adult class, then s and l transfers.
    for c in [idx::S_V, idx::E_V, idx::I_V] {
        assert!(close(j[(idx::E, c)], p.mu_b));
    }
    assert!(close(j[(idx::E, idx::E)], -k.k5));
    assert!(close(j[(idx::L, idx::E)], p.s));
    assert!(close(j[(idx::L, idx::L)], -k.k6));
    assert!(close(j[(idx::P, idx::L)], p.l));
    assert!(close(j[(idx::P, idx::P)], -k.k7));
    assert!(close(j[(idx::S_V, idx::P)], p.theta));
    assert!(close(j[(idx::E_V, idx::E_V)], -k.k9));
}

#[test]
fn mass_action_jacobian_at_zero_state_is_finite() {
    let p = ModelParams::baseline();
    let j = jacobian(&arbodyn::State::zeros(), &p, ModelVariant::MASS_ACTION).unwrap();
    assert!(j.iter().all(|x| x.is_finite()));
}

#[test]
fn trivial_equilibrium_is_unstable_with_vectors() {
    let p = ModelParams::baseline();
    let (e0, e1) = disease_free_states(&p, ModelVariant::FULL).unwrap();
    assert_eq!(e0.stability.verdict, Stability::Unstable);
    assert!(e1.is_some());
    let s = spectrum(&jacobian(&e0.state, &p, ModelVariant::FULL).unwrap());
    assert_eq!(s.len(), 11);
}

#[test]
fn non_equilibrium_is_rejected() {
    let p = ModelParams::baseline();
    assert!(classify(&arbodyn::State::strategy_initial(), &p, ModelVariant::FULL).is_err());
}

#[test]
fn bifurcation_directions() {
    let back = bifurcation_coefficients(&ModelParams::backward_example(0.05)).unwrap();
    assert_eq!(back.direction, Direction::Backward);
    let fwd = bifurcation_coefficients(&ModelParams::forward_example(0.05)).unwrap();
    assert_eq!(fwd.direction, Direction::Forward);
    assert!(back.a1 > 0.0 && back.a2 > 0.0);
    assert!(fwd.a1 < 0.0 && fwd.a2 > 0.0);
    let r = basic_reproduction_number(&ModelParams::backward_example(back.beta_star)).unwrap();
    assert!((r - 1.0).abs() < 1e-8);
}

#[test]
fn sweep_spans_the_reproduction_range() {
    let p = ModelParams::backward_example(0.0);
    let rows = bifurcation_sweep(&p, ModelVariant::FULL, 0.0, 0.2810, 21).unwrap();
    let first = rows.first().unwrap();
    let last = rows.last().unwrap();
    assert_eq!(first.r0, 0.0);
    assert!((last.r0 - 1.5).abs() <= 0.03, "{}", last.r0);
    // Rows come out ordered by parameter value, then branch.
    for w in rows.windows(2) {
        assert!(w[0].value < w[1].value || (w[0].value == w[1].value && w[0].branch < w[1].branch));
    }
    for r in &rows {
        assert!(r.error.is_none(), "{:?}", r.error);
        if r.branch == 0 {
            let want = if r.r0 < 1.0 {
                Stability::Stable
            } else {
                Stability::Unstable
            };
            assert_eq!(r.stability, Some(want));
        }
    }
}

#[test]
fn backward_window_has_saddle_and_node() {
    let p = ModelParams::backward_example(0.0);
    let (win, (r_lo, r_hi)) =
        coexistence_window(&p, ModelVariant::FULL, ParamId::BetaHv, 0.0, 0.2, 41, 1e-6)
            .unwrap()
            .unwrap();
    assert!(win.0 < win.1);
    assert!(r_lo < r_hi && r_hi <= 1.0 + 1e-3);
    let mid = 0.5 * (win.0 + win.1);
    let rows = bifurcation_sweep(&p, ModelVariant::FULL, mid, mid, 2).unwrap();
    let endemic: Vec<_> = rows.iter().filter(|r| r.branch > 0).collect();
    assert_eq!(endemic.len(), 4);
    assert_eq!(endemic[0].stability, Some(Stability::Unstable));
    assert_eq!(endemic[1].stability, Some(Stability::Stable));
}

#[test]
fn forward_case_has_no_window() {
    let p = ModelParams::forward_example(0.0);
    let w =
        coexistence_window(&p, ModelVariant::FULL, ParamId::BetaHv, 0.0, 0.2, 41, 1e-6).unwrap();
    assert!(w.is_none());
}
