//! Jacobians, spectral stability, the Routh–Hurwitz test for the aquatic
//! block at the trivial equilibrium and the linear Lyapunov function.

use nalgebra::{Complex, DMatrix};

use crate::error::{ModelError, Result};
use crate::model::{embed, project, rhs_vec, ModelVariant, State, N_STATE};
use crate::params::{DerivedConstants, ModelParams};
use crate::poly::Poly;

/// Width of the marginal band around zero for the stability modulus.
pub const MARGINAL_TOL: f64 = 1e-7;

/// Relative residual above which a state is not accepted as an equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    /// Largest real part of the spectrum.
    pub modulus: f64,
    pub verdict: Stability,
    pub spectrum: Vec<Complex<f64>>,
}

/// Central-difference Jacobian on the variant's own coordinates.
pub fn jacobian_vec(x: &[f64], p: &ModelParams, v: ModelVariant) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut j = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for i in 0..n {
        let h = 1e-7 * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        let fp = rhs_vec(&xp, p, v)?;
        xp[i] = x[i] - h;
        let fm = rhs_vec(&xp, p, v)?;
        xp[i] = x[i];
        for r in 0..n {
            j[(r, i)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// Jacobian at a full state; 10×10 for the model without vaccination.
pub fn jacobian(st: &State, p: &ModelParams, v: ModelVariant) -> Result<DMatrix<f64>> {
    jacobian_vec(&project(st, v), p, v)
}

/// Max-norm of the right-hand side divided by `max(1, |state|_inf)`.
pub fn relative_residual(st: &State, p: &ModelParams, v: ModelVariant) -> Result<f64> {
    let x = project(st, v);
    let f = rhs_vec(&x, p, v)?;
    let fn_ = f.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    Ok(fn_ / st.max_norm().max(1.0))
}

pub fn spectrum(j: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let mut ev: Vec<Complex<f64>> = j.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.re.total_cmp(&a.re));
    ev
}

pub fn verdict_from_spectrum(spectrum: Vec<Complex<f64>>) -> StabilityVerdict {
    let modulus = spectrum.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re));
    let verdict = if modulus < -MARGINAL_TOL {
        Stability::Stable
    } else if modulus > MARGINAL_TOL {
        Stability::Unstable
    } else {
        Stability::Marginal
    };
    StabilityVerdict {
        modulus,
        verdict,
        spectrum,
    }
}

/// Classifies an equilibrium by the spectrum of its Jacobian.
pub fn classify(st: &State, p: &ModelParams, v: ModelVariant) -> Result<StabilityVerdict> {
    let residual = relative_residual(st, p, v)?;
    if !(residual <= EQUILIBRIUM_TOL) {
        return Err(ModelError::NotAnEquilibrium { residual });
    }
    classify_unchecked(st, p, v)
}

pub(crate) fn classify_unchecked(
    st: &State,
    p: &ModelParams,
    v: ModelVariant,
) -> Result<StabilityVerdict> {
    let j = jacobian(st, p, v)?;
    if j.iter().any(|x| !x.is_finite()) {
        return Err(ModelError::Numerical("non-finite Jacobian".into()));
    }
    Ok(verdict_from_spectrum(spectrum(&j)))
}

/// Hurwitz data for the quartic factor of the characteristic polynomial at
/// the trivial equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouthHurwitz {
    /// `A_1 .. A_4`.
    pub a: [f64; 4],
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub a4: f64,
    pub satisfied: bool,
}

pub fn routh_hurwitz_phi2(p: &ModelParams) -> Result<RouthHurwitz> {
    let k = p.derived()?;
    let (k5, k6, k7, k8) = (k.k5, k.k6, k.k7, k.k8);
    let a1 = k5 + k6 + k7 + k8;
    let a2 = k8 * (k5 + k6 + k7) + k7 * (k5 + k6) + k5 * k6;
    let a3 = k5 * k6 * k7 + k8 * (k5 * k6 + k7 * (k5 + k6));
    let a4 = k5 * k6 * k7 * k8 * (1.0 - (k.n_excess + 1.0));
    let h1 = a1;
    let h2 = a1 * a2 - a3;
    let h3 = a1 * a2 * a3 - a1 * a1 * a4 - a3 * a3;
    Ok(RouthHurwitz {
        a: [a1, a2, a3, a4],
        h1,
        h2,
        h3,
        a4,
        satisfied: h1 > 0.0 && h2 > 0.0 && h3 > 0.0 && a4 > 0.0,
    })
}

/// `phi_2(x) = x^4 + A_1 x^3 + A_2 x^2 + A_3 x + A_4`.
pub fn phi2_poly(rh: &RouthHurwitz) -> Poly {
    Poly::new(vec![rh.a[3], rh.a[2], rh.a[1], rh.a[0], 1.0])
}

/// Weights `g` of the linear Lyapunov function for the trivial equilibrium.
pub fn lyapunov_weights(p: &ModelParams) -> [f64; N_STATE] {
    let k = DerivedConstants::from_params_unchecked(p);
    let mut g = [1.0; N_STATE];
    g[8] = k.k8 / p.mu_b;
    g[9] = k.k5 * k.k8 / (p.mu_b * p.s);
    g[10] = k.k5 * k.k6 * k.k8 / (p.mu_b * p.s * p.l);
    g
}

/// `<g, st - E_0>`, where `E_0` is the trivial equilibrium.
pub fn lyapunov_trivial(st: &State, p: &ModelParams) -> Result<f64> {
    let k = p.derived()?;
    let denom = p.mu_h * (k.k2 + p.xi);
    let mut e0 = [0.0; N_STATE];
    e0[0] = p.lambda_h * k.k2 / denom;
    e0[1] = p.xi * p.lambda_h / denom;
    let g = lyapunov_weights(p);
    Ok((0..N_STATE).map(|i| g[i] * (st.y[i] - e0[i])).sum())
}

/// Full state from variant coordinates, re-exported for callers that work
/// with raw Jacobians.
pub fn state_from_coords(x: &[f64], v: ModelVariant) -> State {
    embed(x, v)
}
