//! Critical transmission probability, center-manifold coefficients at
//! `R0 = 1` and bifurcation-diagram sweeps.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::equilibria::{disease_free_states, solve_endemic, variant_reproduction_number};
use crate::error::{ModelError, Result};
use crate::model::{idx, rhs_vec, ModelVariant, N_STATE};
use crate::params::{ModelParams, ParamId};
use crate::stability::{jacobian_vec, Stability};
use crate::thresholds::basic_reproduction_number;

/// Singular values below this fraction of the largest one count as zero
/// when measuring the kernel of the Jacobian.
pub const KERNEL_TOL: f64 = 1e-9;

/// Relative step for the second differences.
pub const SECOND_DIFF_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Backward,
    Forward,
    Degenerate,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Backward => "backward",
            Direction::Forward => "forward",
            Direction::Degenerate => "degenerate",
        }
    }

    pub fn from_coefficients(a1: f64, a2: f64) -> Self {
        if a2 > 0.0 && a1 > 0.0 {
            Direction::Backward
        } else if a2 > 0.0 && a1 < 0.0 {
            Direction::Forward
        } else {
            Direction::Degenerate
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationReport {
    pub beta_star: f64,
    /// Left null vector, scaled so that `v . w = 1`.
    pub v: [f64; N_STATE],
    /// Right null vector, scaled so that its `I_v` component equals one.
    pub w: [f64; N_STATE],
    /// Published `Gamma_1`, `Gamma_2` and `A_2` evaluated on `v`, `w`.
    pub gamma_1: f64,
    pub gamma_2: f64,
    pub a2_published: f64,
    pub a1: f64,
    pub a2: f64,
    pub direction: Direction,
    /// `|J w| / (|J| |w|)` and `|v^T J| / (|J| |v|)`.
    pub right_residual: f64,
    pub left_residual: f64,
    /// Relative deviation of each printed closed-form eigenvector component
    /// from the numeric one, after matching the free scale on the `I_v`
    /// component. `None` where no closed form is printed or it is zero.
    pub v_closed_form_deviation: [Option<f64>; N_STATE],
    pub w_closed_form_deviation: [Option<f64>; N_STATE],
}

impl BifurcationReport {
    /// `Gamma_1 - Gamma_2`.
    pub fn a1_published(&self) -> f64 {
        self.gamma_1 - self.gamma_2
    }

    /// Relative gap between the published `A_1` and the numeric one.
    pub fn a1_discrepancy(&self) -> f64 {
        (self.a1_published() - self.a1).abs() / self.a1.abs().max(f64::MIN_POSITIVE)
    }
}

/// Value of `beta_hv` at which `R0 = 1`. `R0^2` is linear in `beta_hv`.
pub fn beta_hv_critical(p: &ModelParams) -> Result<f64> {
    let k = p.derived()?;
    if k.n_excess <= 0.0 {
        return Err(ModelError::NoDiseaseFreeVectors {
            net: k.n_excess + 1.0,
        });
    }
    let unit = ModelParams { beta_hv: 1.0, ..*p };
    let r = basic_reproduction_number(&unit)?;
    if !(r > 0.0) {
        return Err(ModelError::UndefinedIndex);
    }
    Ok(1.0 / (r * r))
}

fn null_vector(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    let svd = m.clone().svd(false, true);
    let sv = &svd.singular_values;
    let smax = sv.max().max(1.0);
    let zero = sv.iter().filter(|&&s| s <= KERNEL_TOL * smax).count();
    if zero != 1 {
        return Err(ModelError::DegenerateBifurcation { dimension: zero });
    }
    let imin = sv.imin();
    let vt = svd
        .v_t
        .ok_or_else(|| ModelError::Numerical("SVD without right vectors".into()))?;
    Ok(vt.row(imin).transpose())
}

fn second_difference(x: &[f64], w: &[f64], p: &ModelParams) -> Result<Vec<f64>> {
    let xs = x.iter().fold(1.0_f64, |m, a| m.max(a.abs()));
    let ws = w.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    let t = SECOND_DIFF_STEP * xs / ws;
    let at = |s: f64| -> Result<Vec<f64>> {
        let y: Vec<f64> = x.iter().zip(w).map(|(a, b)| a + s * b).collect();
        rhs_vec(&y, p, ModelVariant::FULL)
    };
    let (fp, f0, fm) = (at(t)?, at(0.0)?, at(-t)?);
    Ok((0..x.len())
        .map(|i| (fp[i] - 2.0 * f0[i] + fm[i]) / (t * t))
        .collect())
}

fn directional_jacobian(x: &[f64], w: &[f64], p: &ModelParams) -> Result<Vec<f64>> {
    let xs = x.iter().fold(1.0_f64, |m, a| m.max(a.abs()));
    let ws = w.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    let t = SECOND_DIFF_STEP * xs / ws;
    let yp: Vec<f64> = x.iter().zip(w).map(|(a, b)| a + t * b).collect();
    let ym: Vec<f64> = x.iter().zip(w).map(|(a, b)| a - t * b).collect();
    let fp = rhs_vec(&yp, p, ModelVariant::FULL)?;
    let fm = rhs_vec(&ym, p, ModelVariant::FULL)?;
    Ok((0..x.len()).map(|i| (fp[i] - fm[i]) / (2.0 * t)).collect())
}

/// `pairs` holds (one-based index, closed form, numeric). Both vectors are
/// already scaled on the same reference component.
fn deviations(pairs: &[(usize, f64, f64)]) -> [Option<f64>; N_STATE] {
    let mut out = [None; N_STATE];
    for &(i, c, n) in pairs {
        if c != 0.0 {
            out[i - 1] = Some(((n - c) / c).abs());
        }
    }
    out
}

/// Center-manifold coefficients of the full model at `beta_hv = beta*`.
pub fn bifurcation_coefficients(p: &ModelParams) -> Result<BifurcationReport> {
    let beta_star = beta_hv_critical(p)?;
    let q = ModelParams {
        beta_hv: beta_star,
        ..*p
    };
    let v_ = ModelVariant::FULL;
    let (_, e1) = disease_free_states(&q, v_)?;
    let e1 = e1.ok_or(ModelError::NoDiseaseFreeVectors { net: 1.0 })?;
    let x0: Vec<f64> = e1.state.y.to_vec();
    let j = jacobian_vec(&x0, &q, v_)?;

    let mut w = null_vector(&j)?;
    let mut v = null_vector(&j.transpose())?;
    if w[idx::I_V] == 0.0 {
        return Err(ModelError::DegenerateBifurcation { dimension: 1 });
    }
    w /= w[idx::I_V];
    let vw = v.dot(&w);
    if vw == 0.0 {
        return Err(ModelError::DegenerateBifurcation { dimension: 1 });
    }
    v /= vw;

    let jn = j.norm();
    let right_residual = (&j * &w).norm() / (jn * w.norm());
    let left_residual = (j.transpose() * &v).norm() / (jn * v.norm());

    let wv: Vec<f64> = w.iter().copied().collect();
    let d2 = second_difference(&x0, &wv, &q)?;
    let a1: f64 = (0..N_STATE).map(|k| v[k] * d2[k]).sum();

    let db = SECOND_DIFF_STEP * beta_star;
    let qp = ModelParams {
        beta_hv: beta_star + db,
        ..q
    };
    let qm = ModelParams {
        beta_hv: beta_star - db,
        ..q
    };
    let gp = directional_jacobian(&x0, &wv, &qp)?;
    let gm = directional_jacobian(&x0, &wv, &qm)?;
    let a2: f64 = (0..N_STATE)
        .map(|k| v[k] * (gp[k] - gm[k]) / (2.0 * db))
        .sum();

    let mut vv = [0.0; N_STATE];
    let mut ww = [0.0; N_STATE];
    vv.copy_from_slice(v.as_slice());
    ww.copy_from_slice(w.as_slice());

    let pubd = published_terms(&q, &x0, &vv, &ww)?;
    Ok(BifurcationReport {
        beta_star,
        v: vv,
        w: ww,
        gamma_1: pubd.gamma_1,
        gamma_2: pubd.gamma_2,
        a2_published: pubd.a2,
        a1,
        a2,
        direction: Direction::from_coefficients(a1, a2),
        right_residual,
        left_residual,
        v_closed_form_deviation: pubd.v_dev,
        w_closed_form_deviation: pubd.w_dev,
    })
}

struct PublishedTerms {
    gamma_1: f64,
    gamma_2: f64,
    a2: f64,
    v_dev: [Option<f64>; N_STATE],
    w_dev: [Option<f64>; N_STATE],
}

/// Closed-form eigenvector components and `Gamma_1`, `Gamma_2`, `A_2` as
/// printed, evaluated with the numeric `v` and `w`. Vector indices below
/// follow the one-based compartment order.
fn published_terms(
    q: &ModelParams,
    x0: &[f64],
    v: &[f64; N_STATE],
    w: &[f64; N_STATE],
) -> Result<PublishedTerms> {
    let k = q.derived()?;
    let (s_h, v_h, s_v) = (x0[idx::S_H], x0[idx::V_H], x0[idx::S_V]);
    let n = s_h + v_h;
    let pi = k.pi;
    let h0 = s_h + pi * v_h;
    let prot = q.a * (1.0 - q.alpha_1);
    let ch = prot * q.beta_hv;
    let cv = prot * q.beta_vh;
    let kappa = k.kappa(q);
    let w_ = |i: usize| w[i - 1];
    let v_ = |i: usize| v[i - 1];

    let v8 = v_(8);
    let v_pairs = [
        (3, k.k8 * n / (ch * h0) * v8, v_(3)),
        (
            4,
            cv * s_v * (q.eta_v * k.k8 + q.gamma_v) / (k.k4 * k.k9 * n) * v8,
            v_(4),
        ),
        (7, (q.eta_v * k.k8 + q.gamma_v) / k.k9 * v8, v_(7)),
        (8, v8, v8),
    ];

    let w8 = w_(8);
    let w7 = k.k8 / q.gamma_v * w8;
    let w5 = q.gamma_h * q.sigma * k.k8 * k.k9 * n
        / (cv * q.mu_h * q.gamma_v * s_v * (q.eta_h * k.k4 + q.gamma_h))
        * w8;
    let w4 = q.mu_h / q.sigma * w5;
    let w3 = k.k4 / q.gamma_h * w4;
    let w2 = -ch * (q.eta_v * k.k8 + q.gamma_v) / (q.gamma_v * n * kappa)
        * (q.xi * s_h + k.k1 * v_h)
        * w8;
    let w1 = q.omega / k.k1 * w2 - ch * s_h / (k.k1 * n) * (q.eta_v * w7 + w8);
    let w_pairs = [
        (1, w1, w_(1)),
        (2, w2, w_(2)),
        (3, w3, w_(3)),
        (4, w4, w_(4)),
        (5, w5, w_(5)),
        (7, w7, w_(7)),
        (8, w8, w8),
    ];

    let gamma_1 =
        ch * (2.0 * v_h * w_(1) + pi * s_h * w_(2)) / (n * n) * (q.eta_v * w_(7) + w_(8)) * v_(3)
            + cv * s_v / n
                * ((q.eta_h * w_(3) + w_(4)) / s_v + (q.eta_h * w_(3) + w_(4) / s_v))
                * w_(6)
                * v_(7);
    let sum15: f64 = (1..=5).map(w_).sum();
    let sum35: f64 = (3..=5).map(w_).sum();
    let gamma_2 = 2.0 * cv * s_v / (n * n) * sum15 * (q.eta_h * w_(3) + w_(4)) * v_(7)
        + ch * h0 * (n + 1.0) / (n * n) * sum35 * (q.eta_v * w_(7) + w_(8)) * v_(3);
    let a2 = q.a * h0 / n * (q.eta_v * w_(7) + w_(8)) * v_(3);

    Ok(PublishedTerms {
        gamma_1,
        gamma_2,
        a2,
        v_dev: deviations(&v_pairs),
        w_dev: deviations(&w_pairs),
    })
}

/// One row of a bifurcation diagram. Branch 0 is the disease-free state;
/// endemic branches are numbered from 1 in order of increasing `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Value of the swept parameter.
    pub value: f64,
    pub r0: f64,
    pub branch: usize,
    pub lambda_root: f64,
    pub e_h: f64,
    pub e_v: f64,
    pub stability: Option<Stability>,
    pub error: Option<String>,
}

fn sweep_point(p: &ModelParams, v: ModelVariant, param: ParamId, value: f64) -> Vec<SweepRow> {
    let q = p.with(param, value);
    let r0 = variant_reproduction_number(&q, v).unwrap_or(f64::NAN);
    let row = |branch, lambda_root, e_h, e_v, stability, error| SweepRow {
        value,
        r0,
        branch,
        lambda_root,
        e_h,
        e_v,
        stability,
        error,
    };
    let mut rows = Vec::new();
    match disease_free_states(&q, v) {
        Ok((_, Some(e1))) => rows.push(row(0, 0.0, 0.0, 0.0, Some(e1.stability.verdict), None)),
        Ok((_, None)) => rows.push(row(
            0,
            0.0,
            0.0,
            0.0,
            None,
            Some("no vector population".into()),
        )),
        Err(e) => rows.push(row(0, 0.0, 0.0, 0.0, None, Some(e.to_string()))),
    }
    match solve_endemic(&q, v) {
        Ok(eqs) => {
            for (i, e) in eqs.iter().enumerate() {
                rows.push(row(
                    i + 1,
                    e.lambda,
                    e.state.y[idx::E_H],
                    e.state.y[idx::E_V],
                    Some(e.stability.verdict),
                    None,
                ));
            }
        }
        Err(e) => rows.push(row(
            1,
            f64::NAN,
            f64::NAN,
            f64::NAN,
            None,
            Some(e.to_string()),
        )),
    }
    rows
}

/// Equilibria at `n` evenly spaced values of `beta_hv` in `[lo, hi]`.
/// Points are solved in parallel; failures are kept as rows with `error`.
pub fn bifurcation_sweep(
    p: &ModelParams,
    v: ModelVariant,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<Vec<SweepRow>> {
    parameter_sweep(p, v, ParamId::BetaHv, lo, hi, n)
}

/// As [`bifurcation_sweep`] for any parameter.
pub fn parameter_sweep(
    p: &ModelParams,
    v: ModelVariant,
    param: ParamId,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<Vec<SweepRow>> {
    if n < 2 || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() || lo < 0.0 {
        return Err(ModelError::InvalidConfig(format!(
            "sweep needs n >= 2 and 0 <= lo <= hi, got n={n}, [{lo}, {hi}]"
        )));
    }
    let net = p.derived()?.n_excess + 1.0;
    if net <= 1.0 {
        return Err(ModelError::NoDiseaseFreeVectors { net });
    }
    param.check(lo)?;
    param.check(hi)?;
    let values: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    Ok(values
        .par_iter()
        .map(|&b| sweep_point(p, v, param, b))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect())
}

fn endemic_count(p: &ModelParams, v: ModelVariant, param: ParamId, x: f64) -> usize {
    solve_endemic(&p.with(param, x), v)
        .map(|e| e.len())
        .unwrap_or(0)
}

/// Parameter interval and the reproduction number at its two ends.
pub type Window = ((f64, f64), (f64, f64));

/// Interval of `param` with at least two endemic equilibria, found by a
/// scan over `[lo, hi]` and bisection of both edges to `tol`. Returns the
/// interval together with the governing reproduction number at its ends.
pub fn coexistence_window(
    p: &ModelParams,
    v: ModelVariant,
    param: ParamId,
    lo: f64,
    hi: f64,
    n: usize,
    tol: f64,
) -> Result<Option<Window>> {
    if n < 2 {
        return Err(ModelError::InvalidConfig(
            "coexistence scan needs n >= 2".into(),
        ));
    }
    let betas: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let counts: Vec<usize> = betas
        .par_iter()
        .map(|&b| endemic_count(p, v, param, b))
        .collect();
    let first = match counts.iter().position(|&c| c >= 2) {
        Some(i) => i,
        None => return Ok(None),
    };
    let last = counts.iter().rposition(|&c| c >= 2).unwrap_or(first);
    let bisect = |mut a: f64, mut b: f64, inside_at_b: bool| {
        while b - a > tol {
            let m = 0.5 * (a + b);
            if (endemic_count(p, v, param, m) >= 2) == inside_at_b {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    };
    let left = if first == 0 {
        betas[0]
    } else {
        bisect(betas[first - 1], betas[first], true)
    };
    let right = if last + 1 == n {
        betas[n - 1]
    } else {
        bisect(betas[last], betas[last + 1], false)
    };
    let r = |b: f64| variant_reproduction_number(&p.with(param, b), v);
    Ok(Some(((left, right), (r(left)?, r(right)?))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_beta_gives_unit_r0() {
        for p in [
            ModelParams::backward_example(0.05),
            ModelParams::forward_example(0.05),
            ModelParams::baseline(),
        ] {
            let b = beta_hv_critical(&p).unwrap();
            let r = basic_reproduction_number(&ModelParams { beta_hv: b, ..p }).unwrap();
            assert!((r - 1.0).abs() < 1e-8, "{r}");
        }
    }

    #[test]
    fn critical_beta_decreases_in_biting_rate() {
        let p = ModelParams::backward_example(0.05);
        let b1 = beta_hv_critical(&p).unwrap();
        let b2 = beta_hv_critical(&ModelParams { a: p.a * 1.01, ..p }).unwrap();
        assert!(b2 < b1);
    }

    #[test]
    fn no_vectors_is_an_error() {
        let p = ModelParams {
            mu_b: 0.01,
            ..ModelParams::baseline()
        };
        assert!(matches!(
            beta_hv_critical(&p),
            Err(ModelError::NoDiseaseFreeVectors { .. })
        ));
    }

    #[test]
    fn null_vectors_are_kernels() {
        let r = bifurcation_coefficients(&ModelParams::backward_example(0.05)).unwrap();
        assert!(r.right_residual <= 1e-8, "{}", r.right_residual);
        assert!(r.left_residual <= 1e-8, "{}", r.left_residual);
        let vw: f64 = r.v.iter().zip(&r.w).map(|(a, b)| a * b).sum();
        assert!((vw - 1.0).abs() < 1e-12);
        assert!(r.w[idx::I_V] > 0.0);
    }

    #[test]
    fn closed_form_components_match_kernels() {
        for p in [
            ModelParams::backward_example(0.05),
            ModelParams::forward_example(0.05),
        ] {
            let r = bifurcation_coefficients(&p).unwrap();
            for i in [2, 3, 6, 7] {
                assert!(r.v_closed_form_deviation[i].unwrap() <= 1e-6, "v{i}");
            }
            for i in [2, 3, 4, 6, 7] {
                assert!(r.w_closed_form_deviation[i].unwrap() <= 1e-6, "w{i}");
            }
        }
    }

    #[test]
    fn susceptible_components_solve_the_linear_balance() {
        // Eliminate w1, w2 from the S_h and V_h rows of J w = 0.
        let p = ModelParams::baseline();
        let r = bifurcation_coefficients(&p).unwrap();
        let q = ModelParams {
            beta_hv: r.beta_star,
            ..p
        };
        let (_, e1) = disease_free_states(&q, ModelVariant::FULL).unwrap();
        let y = e1.unwrap().state.y;
        let (s, vh) = (y[idx::S_H], y[idx::V_H]);
        let n = s + vh;
        let pi = 1.0 - q.epsilon;
        let x =
            q.a * (1.0 - q.alpha_1) * r.beta_star / n * (q.eta_v * r.w[idx::E_V] + r.w[idx::I_V]);
        let k1 = q.xi + q.mu_h;
        let k2 = q.omega + q.mu_h;
        let det = k1 * k2 - q.xi * q.omega;
        let w2 = -x * (q.xi * s + pi * k1 * vh) / det;
        let w1 = (q.omega * w2 - s * x) / k1;
        // The 2x2 block has determinant mu_h (xi + omega + mu_h), so finite
        // difference noise in J is amplified by about k1 k2 / det here.
        assert!((r.w[idx::V_H] - w2).abs() <= 1e-4 * w2.abs());
        assert!((r.w[idx::S_H] - w1).abs() <= 1e-4 * w1.abs());
    }

    #[test]
    fn direction_rule() {
        assert_eq!(Direction::from_coefficients(1.0, 1.0), Direction::Backward);
        assert_eq!(Direction::from_coefficients(-1.0, 1.0), Direction::Forward);
        assert_eq!(
            Direction::from_coefficients(1.0, -1.0),
            Direction::Degenerate
        );
        assert_eq!(
            Direction::from_coefficients(0.0, 1.0),
            Direction::Degenerate
        );
    }

    #[test]
    fn sweep_rejects_bad_ranges() {
        let p = ModelParams::backward_example(0.05);
        assert!(bifurcation_sweep(&p, ModelVariant::FULL, 0.0, 0.1, 1).is_err());
        assert!(bifurcation_sweep(&p, ModelVariant::FULL, 0.2, 0.1, 5).is_err());
    }
}
