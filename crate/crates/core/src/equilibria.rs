//! Disease-free and endemic equilibria.
//!
//! Endemic states are parametrized by the steady-state force of infection on
//! humans, `lambda`. Every other compartment is an explicit rational function
//! of `lambda`, and substituting them back into the definition of `lambda`
//! gives a polynomial whose positive roots are the endemic equilibria.
//!
//! Two versions of each polynomial are kept. [`endemic_polynomial`] returns
//! the closed-form coefficients as published; [`reconstructed_polynomial`]
//! builds the same polynomial by exact polynomial arithmetic on the
//! back-substitution formulas. The solver uses the reconstruction, and
//! [`transcription_check`] reports how far the published coefficients are
//! from it up to an overall scale.

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ModelError, Result};
use crate::model::{embed, idx, project, rhs_vec, Incidence, ModelVariant, State, N_STATE};
use crate::params::{DerivedConstants, ModelParams};
use crate::poly::{proportional_mismatch, Poly};
use crate::stability::{classify_unchecked, jacobian_vec, relative_residual, StabilityVerdict};
use crate::thresholds::{
    basic_reproduction_number, dfe_pupae, dfe_vector_population, r0_mass, r_nv, r_nv_subthreshold,
};

/// Distance of the reproduction number from one below which the number of
/// equilibria is reported as degenerate.
pub const THRESHOLD_BAND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquilibriumKind {
    Trivial,
    DiseaseFree,
    Endemic,
}

impl EquilibriumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EquilibriumKind::Trivial => "trivial",
            EquilibriumKind::DiseaseFree => "disease-free",
            EquilibriumKind::Endemic => "endemic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub state: State,
    pub kind: EquilibriumKind,
    /// Steady-state force of infection on humans (zero without disease).
    pub lambda: f64,
    /// Max-norm of the right-hand side relative to `max(1, |state|_inf)`.
    pub residual: f64,
    pub stability: StabilityVerdict,
}

fn finish(
    state: State,
    kind: EquilibriumKind,
    lambda: f64,
    p: &ModelParams,
    v: ModelVariant,
) -> Result<Equilibrium> {
    let residual = relative_residual(&state, p, v)?;
    let stability = classify_unchecked(&state, p, v)?;
    Ok(Equilibrium {
        state,
        kind,
        lambda,
        residual,
        stability,
    })
}

/// Human susceptible and vaccinated counts without disease.
fn human_dfe(q: &ModelParams, k: &DerivedConstants) -> (f64, f64) {
    let denom = q.mu_h * (k.k2 + q.xi);
    (q.lambda_h * k.k2 / denom, q.xi * q.lambda_h / denom)
}

/// Aquatic stages `(E, L, P)` and adult vectors at the disease-free
/// equilibrium with vectors.
pub fn aquatic_dfe(q: &ModelParams, k: &DerivedConstants) -> (f64, f64, f64, f64) {
    let n = k.n_excess;
    let p_ = dfe_pupae(k, q);
    let l_ = k.cap_e * k.cap_l * k.k5 * k.k6 * k.k7 * k.k8 * n / (q.mu_b * q.theta * q.l * k.k12);
    let e_ = k.cap_e * k.cap_l * k.k5 * k.k6 * k.k7 * k.k8 * n
        / (q.s * (q.mu_b * q.l * k.cap_l * q.theta + k.k5 * k.k7 * k.k8 * k.cap_e));
    (e_, l_, p_, dfe_vector_population(k, q))
}

/// The trivial equilibrium (no vectors) and, when the vector population
/// persists, the disease-free equilibrium with vectors.
pub fn disease_free_states(
    p: &ModelParams,
    v: ModelVariant,
) -> Result<(Equilibrium, Option<Equilibrium>)> {
    let q = v.effective_params(p);
    let k = q.derived()?;
    let (s0, v0) = human_dfe(&q, &k);
    let mut y = [0.0; N_STATE];
    y[idx::S_H] = s0;
    y[idx::V_H] = v0;
    let e0 = finish(State::new(y), EquilibriumKind::Trivial, 0.0, p, v)?;
    if k.n_excess <= 0.0 {
        return Ok((e0, None));
    }
    let (e, l, pp, n_v) = aquatic_dfe(&q, &k);
    y[idx::S_V] = n_v;
    y[idx::E] = e;
    y[idx::L] = l;
    y[idx::P] = pp;
    let e1 = finish(State::new(y), EquilibriumKind::DiseaseFree, 0.0, p, v)?;
    Ok((e0, Some(e1)))
}

/// Which closed form a polynomial follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolynomialForm {
    /// Full model, standard incidence, `delta > 0`: degree 4.
    Quartic,
    /// Full model, standard incidence, `delta = 0`.
    QuadraticNoDeath,
    /// No vaccination, `delta > 0`.
    QuadraticNoVaccination,
    /// No vaccination, `delta = 0`.
    LinearNoVaccination,
    /// Mass-action incidence.
    QuadraticMassAction,
}

impl PolynomialForm {
    pub fn for_variant(p: &ModelParams, v: ModelVariant) -> Self {
        let q = v.effective_params(p);
        let no_death = q.delta == 0.0;
        match (v.incidence, v.vaccination, no_death) {
            (Incidence::MassAction, _, _) => PolynomialForm::QuadraticMassAction,
            (Incidence::Standard, true, false) => PolynomialForm::Quartic,
            (Incidence::Standard, true, true) => PolynomialForm::QuadraticNoDeath,
            (Incidence::Standard, false, false) => PolynomialForm::QuadraticNoVaccination,
            (Incidence::Standard, false, true) => PolynomialForm::LinearNoVaccination,
        }
    }

    /// Coefficient names, highest degree first.
    pub fn names(&self) -> &'static [&'static str] {
        match self {
            PolynomialForm::Quartic => &["c4", "c3", "c2", "c1", "c0"],
            PolynomialForm::QuadraticNoDeath => &["a2", "a1", "a0"],
            PolynomialForm::QuadraticNoVaccination => &["d2", "d1", "d0"],
            PolynomialForm::LinearNoVaccination => &["p1", "p0"],
            PolynomialForm::QuadraticMassAction => &["e2", "e1", "e0"],
        }
    }
}

/// Closed-form coefficients of the endemic polynomial in `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct EndemicPolynomial {
    pub form: PolynomialForm,
    /// Highest degree first.
    pub coefficients: Vec<f64>,
}

impl EndemicPolynomial {
    pub fn poly(&self) -> Poly {
        Poly::new(self.coefficients.iter().rev().copied().collect())
    }

    pub fn discriminant(&self) -> Option<f64> {
        match self.coefficients.as_slice() {
            [a, b, c] => Some(b * b - 4.0 * a * c),
            _ => None,
        }
    }
}

fn require_vectors(q: &ModelParams) -> Result<DerivedConstants> {
    let k = q.derived()?;
    if k.n_excess <= 0.0 {
        return Err(ModelError::NoDiseaseFreeVectors {
            net: k.n_excess + 1.0,
        });
    }
    Ok(k)
}

/// Published closed-form coefficients for the variant.
pub fn endemic_polynomial(p: &ModelParams, v: ModelVariant) -> Result<EndemicPolynomial> {
    let q = v.effective_params(p);
    let k = require_vectors(&q)?;
    let form = PolynomialForm::for_variant(p, v);
    let coefficients = match form {
        PolynomialForm::Quartic => quartic_published(&q, &k)?,
        PolynomialForm::QuadraticNoDeath => no_death_published(&q, &k)?,
        PolynomialForm::QuadraticNoVaccination => no_vaccination_published(&q, &k)?,
        PolynomialForm::LinearNoVaccination => linear_published(&q, &k)?,
        PolynomialForm::QuadraticMassAction => mass_action_published(&q, &k)?,
    };
    Ok(EndemicPolynomial { form, coefficients })
}

fn no_vaccination_published(q: &ModelParams, k: &DerivedConstants) -> Result<Vec<f64>> {
    let m = k.k3 * k.k4 - q.delta * q.gamma_h;
    let prot = 1.0 - q.alpha_1;
    let d2 = -k.k9
        * q.mu_b
        * q.lambda_h
        * k.k12
        * m
        * (k.k10 * q.a * q.mu_h * prot * q.beta_vh + m * k.k8);
    let base = (k.k3 * k.k4).powi(2) * k.k8 * k.k9 * k.k12 * q.mu_b * q.lambda_h * q.mu_h;
    let rnv2 = r_nv(q)?.powi(2);
    let d1 = base * (rnv2 - r_nv_subthreshold(q)?);
    let d0 = base * q.mu_h * (rnv2 - 1.0);
    Ok(vec![d2, d1, d0])
}

fn linear_published(q: &ModelParams, k: &DerivedConstants) -> Result<Vec<f64>> {
    let prot = 1.0 - q.alpha_1;
    let p1 = k.k9 * k.k10 * k.k12 * q.a * q.mu_b * q.lambda_h * q.mu_h * prot * q.beta_vh
        + k.k3 * (q.mu_h + q.sigma) * k.k8 * k.k9 * k.k12 * q.mu_b * q.lambda_h;
    let r2 = r_nv(&ModelParams { delta: 0.0, ..*q })?.powi(2);
    let p0 = -q.mu_h * k.k3 * k.k4 * k.k8 * k.k9 * k.k12 * q.mu_b * q.lambda_h * (r2 - 1.0);
    Ok(vec![p1, p0])
}

fn mass_action_published(q: &ModelParams, k: &DerivedConstants) -> Result<Vec<f64>> {
    let cv = q.a * (1.0 - q.alpha_1) * q.beta_vh;
    let kappa = k.kappa(q);
    let pxk = k.pi * q.xi + k.k2;
    let r2 = r0_mass(q)?.powi(2);
    let rcm = crate::thresholds::r_cm(q)?;
    let e2 = k.k8 * k.k9 * k.pi * (k.k10 * cv * q.lambda_h + k.k3 * k.k4 * k.k8);
    let e1 = k.k3 * k.k4 * k.k8.powi(2) * k.k9 * kappa * k.pi / pxk * (rcm - r2);
    let e0 = k.k3 * k.k4 * k.k8.powi(2) * k.k9 * kappa * (1.0 - r2);
    Ok(vec![e2, e1, e0])
}

fn no_death_published(q: &ModelParams, k: &DerivedConstants) -> Result<Vec<f64>> {
    let prot = 1.0 - q.alpha_1;
    let pxk = k.pi * q.xi + k.k2;
    let r1 = crate::thresholds::r1(q)?;
    let rb = crate::thresholds::r_b(q)?;
    let a2 = (q.a * prot * q.beta_vh * q.mu_h * k.k10 + k.k3 * k.k4 * k.k8)
        * k.k9
        * q.mu_b
        * q.lambda_h
        * k.pi;
    let a1 = k.k3 * k.k4 * k.k8 * k.k9 * q.mu_b * q.lambda_h * (q.xi + k.k2) * q.mu_h * k.pi / pxk
        * (rb - r1);
    let a0 = q.mu_h * k.k3 * k.k4 * k.k8 * k.k9 * q.mu_b * q.lambda_h * (q.xi + k.k2) * (1.0 - r1);
    Ok(vec![a2, a1, a0])
}

/// The quartic coefficients copied term by term from their published form.
fn quartic_published(q: &ModelParams, k: &DerivedConstants) -> Result<Vec<f64>> {
    let (k1, k2, k3, k4, k5, k6, k8, k9) = (k.k1, k.k2, k.k3, k.k4, k.k5, k.k6, k.k8, k.k9);
    let (k10, k11, k12, n) = (k.k10, k.k11, k.k12, k.n_excess);
    let (ke, kl, pi) = (k.cap_e, k.cap_l, k.pi);
    let (a, mub, lh, muh, gh, dl) = (q.a, q.mu_b, q.lambda_h, q.mu_h, q.gamma_h, q.delta);
    let (xi, om, bhv, bvh) = (q.xi, q.omega, q.beta_hv, q.beta_vh);
    let o = 1.0 - q.alpha_1;
    let m = k3 * k4 - dl * gh;

    let c4 = -pi * pi * k9 * k12 * mub * lh * m * (k10 * a * muh * o * bvh + k8 * m);

    // Shared products.
    let big = k3 * k4 * k5 * k6 * k10 * k11 * a * a * muh * muh;
    let t = k9 * k12 * mub * lh;

    let c3 = pi
        * (big * o * o * bhv * n * pi * bvh * ke * kl
            + 2.0 * k9 * k10 * k12 * a * mub * dl * lh * muh * gh * pi * o * bvh * xi
            - k3 * k4 * k9 * k10 * k12 * a * mub * lh * muh * pi * o * bvh * xi
            - 2.0 * k8 * t * dl * dl * gh * gh * pi * xi
            + 2.0 * k3 * k4 * k8 * t * dl * gh * pi * xi
            - k1 * k3 * k4 * k9 * k10 * k12 * a * mub * lh * muh * pi * o * bvh
            + 2.0 * k2 * k9 * k10 * k12 * a * mub * dl * lh * muh * gh * o * bvh
            - 2.0 * k2 * k3 * k4 * k9 * k10 * k12 * a * mub * lh * muh * o * bvh
            + 2.0 * k1 * k3 * k4 * k8 * t * dl * gh * pi
            - 2.0 * k1 * (k3 * k4).powi(2) * k8 * t * pi
            - 2.0 * k2 * k8 * t * dl * dl * gh * gh
            + 4.0 * k2 * k3 * k4 * k8 * t * dl * gh
            - 2.0 * k2 * (k3 * k4).powi(2) * k8 * t);

    let c2 = big * o * o * bhv * n * pi * pi * bvh * xi * ke * kl
        + k1 * big * o * o * bhv * n * pi * pi * bvh * ke * kl
        + 2.0 * k2 * big * o * o * bhv * n * pi * bvh * ke * kl
        + k9 * k10 * k12 * a * mub * dl * lh * muh * gh * pi * pi * o * bvh * xi * xi
        - k8 * t * dl * dl * gh * gh * pi * pi * xi * xi
        - k1 * k3 * k4 * k9 * k10 * k12 * a * mub * lh * muh * pi * pi * o * bvh * xi
        + k3 * k4 * k9 * k10 * k12 * a * mub * lh * muh * om * pi * o * bvh * xi
        + 2.0 * k2 * k9 * k10 * k12 * a * mub * dl * lh * muh * gh * pi * o * bvh * xi
        - k2 * k3 * k4 * k9 * k10 * k12 * a * mub * lh * muh * pi * o * bvh * xi
        + 2.0 * k1 * k3 * k4 * k8 * t * dl * gh * pi * pi * xi
        - 2.0 * k3 * k4 * k8 * t * dl * gh * om * pi * xi
        + 2.0 * (k3 * k4).powi(2) * k8 * t * om * pi * xi
        - 2.0 * k2 * k8 * t * dl * dl * gh * gh * pi * xi
        + 2.0 * k2 * k3 * k4 * k8 * t * dl * gh * pi * xi
        - 2.0 * k1 * k2 * k3 * k4 * k9 * k10 * k12 * a * mub * lh * muh * o * pi * bvh
        + k2 * k2 * k9 * k10 * k12 * a * mub * dl * lh * muh * gh * o * bvh
        - k2 * k2 * k3 * k4 * k9 * k10 * k12 * a * mub * lh * muh * o * bvh
        - k1 * k1 * (k3 * k4).powi(2) * k8 * t * pi * pi
        + 4.0 * k1 * k2 * k3 * k4 * k8 * t * dl * gh * pi
        - 4.0 * k1 * k2 * (k3 * k4).powi(2) * k8 * t * pi
        - k2 * k2 * k8 * t * dl * dl * gh * gh
        + 2.0 * k2 * k2 * k3 * k4 * k8 * t * dl * gh
        - k2 * k2 * (k3 * k4).powi(2) * k8 * t;

    let c1 = ((k1 * big * o * bhv * n * pi * pi + big * o * o * bhv * n * (k2 - om) * pi)
        * bvh
        * xi
        + (2.0 * k1 * k2 * big * o * bhv * n * pi + k2 * k2 * big * o * bhv * n) * o * bvh)
        * ke
        * kl
        + (k3 * k4 * k9 * k10 * k12 * a * mub * lh * muh * om * pi * o * bvh
            - 2.0 * k3 * k4 * k8 * t * dl * gh * om * pi)
            * xi
            * xi
        + ((k2 * k3 * k4 * k9 * k10 * k12 * a * mub * lh * muh * om
            - k1 * k2 * k3 * k4 * k9 * k10 * k12 * a * mub * lh * muh * pi)
            * o
            * bvh
            + (2.0 * k1 * (k3 * k4).powi(2) * k8 * t * om
                + 2.0 * k1 * k2 * k3 * k4 * k8 * t * dl * gh)
                * pi
            + (2.0 * k2 * (k3 * k4).powi(2) * k8 * t - 2.0 * k2 * k3 * k4 * k8 * t * dl * gh) * om)
            * xi
        - k1 * k2 * k2 * k3 * k4 * k9 * k10 * k12 * a * mub * lh * muh * o * bvh
        - 2.0 * k1 * k1 * k2 * (k3 * k4).powi(2) * k8 * t * pi
        + 2.0 * k1 * k2 * k2 * k3 * k4 * k8 * t * dl * gh
        - 2.0 * k1 * k2 * k2 * (k3 * k4).powi(2) * k8 * t;

    let r0 = basic_reproduction_number(q)?;
    let c0 = (k3 * k4).powi(2) * k8 * t * muh * muh * (k2 + xi).powi(2) * (r0 * r0 - 1.0);
    Ok(vec![c4, c3, c2, c1, c0])
}

/// Endemic polynomial rebuilt from the back-substitution formulas
/// (ascending coefficients).
pub fn reconstructed_polynomial(p: &ModelParams, v: ModelVariant) -> Result<Poly> {
    let q = v.effective_params(p);
    let k = require_vectors(&q)?;
    let form = PolynomialForm::for_variant(p, v);
    let prot = 1.0 - q.alpha_1;
    let ch = q.a * prot * q.beta_hv;
    let cv = q.a * prot * q.beta_vh;
    let theta_p = q.theta * dfe_pupae(&k, &q);
    let (pi, muh, lh) = (k.pi, q.mu_h, q.lambda_h);
    let x = Poly::x();

    // S_h = lh * sn / d, V_h = lh * xi / d, S_h + pi V_h = lh * h / d.
    let (d, h) = if v.vaccination {
        let d = Poly::new(vec![muh * (k.k2 + q.xi), k.k2 + pi * k.k1, pi]);
        let h = Poly::linear(k.k2 + pi * q.xi, pi);
        (d, h)
    } else {
        // Common factor (pi lambda + k2) removed from d and h.
        (Poly::linear(muh, 1.0), Poly::constant(1.0))
    };
    let w = k.k10 * k.k11;
    let poly = match v.incidence {
        Incidence::MassAction => {
            // k8 k9 (cv lh k10 l h + k3 k4 k8 d) = ch cv theta_p k10 k11 lh h
            let lhs = x
                .mul(&h)
                .scale(cv * lh * k.k10)
                .add(&d.scale(k.k3 * k.k4 * k.k8))
                .scale(k.k8 * k.k9);
            lhs.sub(&h.scale(ch * cv * theta_p * w * lh))
        }
        Incidence::Standard => {
            let no_death = matches!(
                form,
                PolynomialForm::QuadraticNoDeath | PolynomialForm::LinearNoVaccination
            );
            if no_death {
                // N_h is constant; the common factor d cancels.
                let inner = x
                    .mul(&h)
                    .scale(cv * muh * k.k10)
                    .add(&d.scale(k.k8 * k.k3 * k.k4));
                inner
                    .scale(k.k8 * k.k9 * lh * k.k3 * k.k4)
                    .sub(&h.scale(ch * cv * theta_p * w * muh * muh * k.k3 * k.k4))
            } else {
                // N_h = lh nn / (muh k3 k4 d).
                let m = muh * k.k4 + muh * q.gamma_h + q.sigma * q.gamma_h;
                let base = if v.vaccination {
                    Poly::linear(k.k2 + q.xi, pi)
                } else {
                    Poly::constant(1.0)
                };
                let nn = base.scale(muh * k.k3 * k.k4).add(&x.mul(&h).scale(m));
                let inner = x.mul(&h).scale(cv * muh * k.k10).add(&nn.scale(k.k8));
                let lhs = nn.mul(&inner).scale(k.k8 * k.k9 * lh);
                lhs.sub(
                    &h.mul(&d)
                        .scale(ch * cv * theta_p * w * muh * muh * k.k3 * k.k4),
                )
            }
        }
    };
    Ok(poly)
}

/// Scale-free distance between the published and reconstructed
/// coefficients (largest entry difference relative to the largest
/// coefficient).
pub fn transcription_check(p: &ModelParams, v: ModelVariant) -> Result<f64> {
    let published = endemic_polynomial(p, v)?;
    let rebuilt = reconstructed_polynomial(p, v)?;
    let n = published.coefficients.len();
    let mut desc: Vec<f64> = rebuilt.c.iter().rev().copied().collect();
    while desc.len() > n && desc[0] == 0.0 {
        desc.remove(0);
    }
    Ok(proportional_mismatch(&published.coefficients, &desc))
}

/// Full state from a steady-state force of infection on humans.
pub fn state_from_lambda(p: &ModelParams, v: ModelVariant, lambda: f64) -> Result<State> {
    let q = v.effective_params(p);
    let k = require_vectors(&q)?;
    let pi = k.pi;
    let d = pi * lambda * lambda + lambda * (k.k2 + pi * k.k1) + q.mu_h * (k.k2 + q.xi);
    let s_h = q.lambda_h * (pi * lambda + k.k2) / d;
    let v_h = q.xi * q.lambda_h / d;
    let e_h = lambda * (s_h + pi * v_h) / k.k3;
    let i_h = q.gamma_h * e_h / k.k4;
    let r_h = q.sigma * i_h / q.mu_h;
    let n_h = s_h + v_h + e_h + i_h + r_h;
    let cv = q.a * (1.0 - q.alpha_1) * q.beta_vh;
    let lambda_v = match v.incidence {
        Incidence::Standard => cv * (q.eta_h * e_h + i_h) / n_h,
        Incidence::MassAction => cv * (q.eta_h * e_h + i_h),
    };
    let (e, l, pp, _) = aquatic_dfe(&q, &k);
    let tp = q.theta * pp;
    let s_v = tp / (lambda_v + k.k8);
    let e_v = tp * lambda_v / (k.k9 * (lambda_v + k.k8));
    let i_v = q.gamma_v * e_v / k.k8;
    Ok(State::new([
        s_h, v_h, e_h, i_h, r_h, s_v, e_v, i_v, e, l, pp,
    ]))
}

/// Reproduction number that governs the variant.
pub fn variant_reproduction_number(p: &ModelParams, v: ModelVariant) -> Result<f64> {
    let q = v.effective_params(p);
    match (v.incidence, v.vaccination) {
        (Incidence::Standard, true) => basic_reproduction_number(&q),
        (Incidence::Standard, false) => r_nv(&q),
        (Incidence::MassAction, _) => r0_mass(&q),
    }
}

/// True when the governing reproduction number is within
/// [`THRESHOLD_BAND`] of one.
pub fn at_threshold(p: &ModelParams, v: ModelVariant) -> Result<bool> {
    Ok((variant_reproduction_number(p, v)? - 1.0).abs() <= THRESHOLD_BAND)
}

fn newton_step(x: &[f64], p: &ModelParams, v: ModelVariant) -> Result<Vec<f64>> {
    let f = rhs_vec(x, p, v)?;
    let j = jacobian_vec(x, p, v)?;
    let dx = j
        .lu()
        .solve(&DVector::from_vec(f))
        .ok_or_else(|| ModelError::Numerical("singular Jacobian in Newton step".into()))?;
    Ok(x.iter().zip(dx.iter()).map(|(a, b)| a - b).collect())
}

fn is_endemic(st: &State) -> bool {
    [idx::E_H, idx::I_H, idx::E_V, idx::I_V]
        .iter()
        .all(|&i| st.y[i] > 0.0)
}

/// Endemic equilibria from the positive roots of the reconstructed
/// polynomial, each refined by a Newton pass on the full vector field and
/// classified. Sorted by ascending `lambda`.
pub fn solve_endemic(p: &ModelParams, v: ModelVariant) -> Result<Vec<Equilibrium>> {
    let poly = reconstructed_polynomial(p, v)?;
    let roots = poly.positive_real_roots()?;
    let mut out = Vec::new();
    for lambda in roots {
        let st = state_from_lambda(p, v, lambda)?;
        if !is_endemic(&st) || !st.is_finite() {
            continue;
        }
        let mut x = project(&st, v);
        let mut res = relative_residual(&st, p, v)?;
        for _ in 0..3 {
            let cand = newton_step(&x, p, v)?;
            let cst = embed(&cand, v);
            let cres = relative_residual(&cst, p, v)?;
            if cres.is_finite() && cres <= res && cand.iter().all(|&c| c >= 0.0) {
                x = cand;
                res = cres;
            }
            if res <= 1e-12 {
                break;
            }
        }
        let st = embed(&x, v);
        if res > crate::stability::EQUILIBRIUM_TOL {
            return Err(ModelError::NotAnEquilibrium { residual: res });
        }
        out.push(finish(st, EquilibriumKind::Endemic, lambda, p, v)?);
    }
    Ok(out)
}

/// Independent steady-state search: Newton iterations on the full vector
/// field in logarithmic coordinates from `starts` random points of the
/// feasible region, once with a line search and once with
/// Levenberg-Marquardt damping. Returns the distinct endemic states found.
pub fn newton_search(
    p: &ModelParams,
    v: ModelVariant,
    starts: usize,
    seed: u64,
) -> Result<Vec<State>> {
    let q = v.effective_params(p);
    let k = q.derived()?;
    let n_h_max = q.lambda_h / q.mu_h;
    let n_v_max = q.theta * q.l * k.cap_l / (k.k7 * k.k8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<State> = Vec::new();
    for _ in 0..starts {
        let mut y = [0.0; N_STATE];
        for (i, slot) in y.iter_mut().enumerate() {
            let u: f64 = rng.random();
            let bound = match i {
                0..=4 => n_h_max,
                5..=7 => n_v_max,
                idx::E => k.cap_e,
                idx::L => k.cap_l,
                _ => q.l * k.cap_l / k.k7,
            };
            // Log-uniform over three decades below the bound.
            *slot = bound * 10f64.powf(-3.0 * u);
        }
        if !v.vaccination {
            y[idx::V_H] = 0.0;
        }
        let x0 = project(&State::new(y), v);
        for rule in [StepRule::LineSearch, StepRule::Damped] {
            let Some(x) = log_newton(&x0, p, v, rule) else {
                continue;
            };
            let st = embed(&x, v);
            if is_endemic(&st)
                && relative_residual(&st, p, v)? <= 1e-9
                && !found.iter().any(|f| state_distance(f, &st) <= 1e-6)
            {
                found.push(st);
            }
        }
    }
    found.sort_by(|a, b| a.y[idx::S_H].total_cmp(&b.y[idx::S_H]).reverse());
    Ok(found)
}

/// Relative max-norm distance between two states.
pub fn state_distance(a: &State, b: &State) -> f64 {
    let scale = a.max_norm().max(b.max_norm()).max(1.0);
    a.y.iter()
        .zip(b.y.iter())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

#[derive(Clone, Copy)]
enum StepRule {
    /// Newton direction with backtracking on the residual norm.
    LineSearch,
    /// Levenberg-Marquardt damping.
    Damped,
}

fn log_newton(x0: &[f64], p: &ModelParams, v: ModelVariant, rule: StepRule) -> Option<Vec<f64>> {
    let n = x0.len();
    let mut u: Vec<f64> = x0.iter().map(|&x| x.max(1e-300).ln()).collect();
    let scaled = |u: &[f64]| -> Option<(Vec<f64>, f64)> {
        let x: Vec<f64> = u.iter().map(|a| a.exp()).collect();
        let f = rhs_vec(&x, p, v).ok()?;
        // Per-capita rates: f_i / x_i.
        let g: Vec<f64> = f.iter().zip(&x).map(|(fi, xi)| fi / xi).collect();
        let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        norm.is_finite().then_some((g, norm))
    };
    let (mut g, mut norm) = scaled(&u)?;
    let mut mu = 1e-3;
    for _ in 0..500 {
        if norm < 1e-13 {
            break;
        }
        let mut jac = DMatrix::zeros(n, n);
        for i in 0..n {
            let h = 1e-6;
            let mut up = u.clone();
            up[i] += h;
            let (gp, _) = scaled(&up)?;
            for r in 0..n {
                jac[(r, i)] = (gp[r] - g[r]) / h;
            }
        }
        let gv = DVector::from_vec(g.clone());
        let try_step = |cand: Vec<f64>, bound: f64| -> Option<(Vec<f64>, Vec<f64>, f64)> {
            let (gc, nc) = scaled(&cand)?;
            (nc < bound).then_some((cand, gc, nc))
        };
        let step = match rule {
            StepRule::LineSearch => {
                let du = jac.clone().lu().solve(&gv)?;
                // Cap the step at five log-units without turning it.
                let mut t = (5.0 / du.amax()).min(1.0);
                let mut found = None;
                for _ in 0..30 {
                    let cand = u.iter().zip(du.iter()).map(|(a, b)| a - t * b).collect();
                    found = try_step(cand, norm * (1.0 - 1e-4 * t));
                    if found.is_some() {
                        break;
                    }
                    t *= 0.5;
                }
                found
            }
            StepRule::Damped => {
                let jtj = jac.transpose() * &jac;
                let jtg = jac.transpose() * &gv;
                let mut found = None;
                for _ in 0..40 {
                    let mut m = jtj.clone();
                    for i in 0..n {
                        m[(i, i)] += mu * jtj[(i, i)].max(1e-12);
                    }
                    if let Some(du) = m.lu().solve(&jtg) {
                        let cand = u.iter().zip(du.iter()).map(|(a, b)| a - b).collect();
                        found = try_step(cand, norm);
                        if found.is_some() {
                            mu = (mu / 3.0).max(1e-12);
                            break;
                        }
                    }
                    mu *= 4.0;
                }
                found
            }
        };
        let (cand, gc, nc) = step?;
        u = cand;
        g = gc;
        norm = nc;
    }
    (norm < 1e-9).then(|| u.iter().map(|a| a.exp()).collect())
}
