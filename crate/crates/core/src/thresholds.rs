//! Reproduction numbers and related threshold quantities.

use nalgebra::{Matrix4, SMatrix};

use crate::error::{ModelError, Result};
use crate::model::{Incidence, ModelVariant};
use crate::params::{DerivedConstants, ModelParams};

/// Net reproductive number of the vector population.
pub fn net_reproductive_number(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    Ok(p.net_reproductive_number())
}

fn require_vectors(p: &ModelParams) -> Result<DerivedConstants> {
    let k = p.derived()?;
    let net = k.n_excess + 1.0;
    if !(net > 1.0) {
        return Err(ModelError::NoDiseaseFreeVectors { net });
    }
    Ok(k)
}

/// Squared basic reproduction number from its closed form; zero when the
/// vector population cannot persist.
pub fn r0_squared(p: &ModelParams) -> Result<f64> {
    let k = p.derived()?;
    if k.n_excess <= 0.0 {
        return Ok(0.0);
    }
    let num = p.a.powi(2)
        * (1.0 - p.alpha_1).powi(2)
        * p.beta_hv
        * p.beta_vh
        * p.mu_h
        * k.k5
        * k.k6
        * k.k10
        * k.k11
        * (k.pi * p.xi + k.k2)
        * p.alpha_2
        * p.capacity_e
        * p.capacity_l
        * k.n_excess;
    let den = k.k3
        * k.k4
        * k.k8
        * k.k9
        * p.mu_b
        * p.lambda_h
        * (p.xi + k.k2)
        * (k.k6 * p.capacity_l + p.s * p.capacity_e);
    Ok(num / den)
}

/// Basic reproduction number (zero when the net reproductive number is at
/// most one).
pub fn basic_reproduction_number(p: &ModelParams) -> Result<f64> {
    Ok(r0_squared(p)?.sqrt())
}

/// Threshold governing global stability of the disease-free equilibrium,
/// `R_0 (mu_h + delta) / mu_h`.
pub fn rc_threshold(p: &ModelParams) -> Result<f64> {
    let k = require_vectors(p)?;
    let r2 = p.a.powi(2)
        * (1.0 - p.alpha_1).powi(2)
        * p.beta_hv
        * p.beta_vh
        * k.k5
        * k.k6
        * k.k10
        * k.k11
        * k.cap_e
        * k.cap_l
        * (k.k2 + k.pi * p.xi)
        * k.n_excess
        / (k.k3 * k.k4 * k.k8 * k.k9 * p.mu_b * (k.k2 + p.xi) * k.k12 * p.lambda_h)
        * (p.mu_h + p.delta).powi(2)
        / p.mu_h;
    Ok(r2.sqrt())
}

/// Adult vector population at the disease-free equilibrium.
pub fn dfe_vector_population(k: &DerivedConstants, p: &ModelParams) -> f64 {
    k.cap_e * k.cap_l * k.k5 * k.k6 * k.n_excess / (p.mu_b * k.k12)
}

/// Reproduction number of the model without vaccination.
pub fn r_nv(p: &ModelParams) -> Result<f64> {
    let k = require_vectors(p)?;
    let n_v = dfe_vector_population(&k, p);
    let n_h = p.lambda_h / p.mu_h;
    let r2 = p.a.powi(2) * (1.0 - p.alpha_1).powi(2) * p.beta_hv * p.beta_vh * k.k10 * k.k11 * n_v
        / (k.k3 * k.k4 * k.k8 * k.k9 * n_h);
    Ok(r2.sqrt())
}

/// Reproduction number of the mass-action model.
pub fn r0_mass(p: &ModelParams) -> Result<f64> {
    let k = require_vectors(p)?;
    let ch = p.a * (1.0 - p.alpha_1) * p.beta_hv;
    let cv = p.a * (1.0 - p.alpha_1) * p.beta_vh;
    let theta_p = p.theta * dfe_pupae(&k, p);
    let r_hv =
        ch * p.lambda_h * k.k10 * (k.pi * p.xi + k.k2) / (p.mu_h * k.k3 * k.k4 * (p.xi + k.k2));
    let r_vh = cv * k.k11 * theta_p / (k.k8 * k.k8 * k.k9);
    Ok((r_hv * r_vh).sqrt())
}

/// Threshold on `R_{0,m}^2` below which the linear coefficient of the
/// mass-action quadratic stays positive.
pub fn r_cm(p: &ModelParams) -> Result<f64> {
    let k = p.derived()?;
    let cv = p.a * (1.0 - p.alpha_1) * p.beta_vh;
    let kappa = k.kappa(p);
    let pxk = k.pi * p.xi + k.k2;
    Ok(
        (k.k10 * pxk * p.lambda_h * cv + (k.k1 * k.pi + k.k2) * k.k3 * k.k4 * k.k8) * pxk
            / (k.k3 * k.k4 * k.k8 * kappa * k.pi),
    )
}

/// Threshold on `R_1` governing the linear coefficient when `delta = 0`.
pub fn r_b(p: &ModelParams) -> Result<f64> {
    let k = p.derived()?;
    let pxk = k.pi * p.xi + k.k2;
    let cv = p.a * (1.0 - p.alpha_1) * p.beta_vh;
    Ok(pxk / (k.pi * (p.xi + k.k2))
        * ((k.k1 * k.pi + k.k2) / p.mu_h + cv * k.k10 * pxk / (k.k3 * k.k4 * k.k8)))
}

/// `R_0^2` evaluated with `delta = 0`.
pub fn r1(p: &ModelParams) -> Result<f64> {
    r0_squared(&ModelParams { delta: 0.0, ..*p })
}

/// Threshold on `R_nv^2` below which the linear coefficient of the
/// no-vaccination quadratic is negative. Shares its symbol with
/// [`rc_threshold`] in the literature but is unrelated to it.
pub fn r_nv_subthreshold(p: &ModelParams) -> Result<f64> {
    let k = p.derived()?;
    let m = k.k3 * k.k4 - p.delta * p.gamma_h;
    Ok(
        (2.0 * k.k8 * m + k.k10 * p.a * p.mu_h * (1.0 - p.alpha_1) * p.beta_vh)
            / (k.k3 * k.k4 * k.k8),
    )
}

/// Pupae at the disease-free equilibrium.
pub fn dfe_pupae(k: &DerivedConstants, p: &ModelParams) -> f64 {
    k.cap_e * k.cap_l * k.k5 * k.k6 * k.k8 * k.n_excess / (p.mu_b * p.theta * k.k12)
}

/// New-infection and transition matrices `(F, V)` of the infected
/// subsystem `(E_h, I_h, E_v, I_v)` at the disease-free equilibrium.
pub fn next_generation_matrices(
    p: &ModelParams,
    variant: ModelVariant,
) -> Result<(Matrix4<f64>, Matrix4<f64>)> {
    let q = variant.effective_params(p);
    let k = require_vectors(&q)?;
    let denom = q.mu_h * (k.k2 + q.xi);
    let s0 = q.lambda_h * k.k2 / denom;
    let v0 = q.xi * q.lambda_h / denom;
    let h0 = s0 + k.pi * v0;
    let n_h0 = s0 + v0;
    let s_v0 = dfe_vector_population(&k, &q);
    let scale = match variant.incidence {
        Incidence::Standard => 1.0 / n_h0,
        Incidence::MassAction => 1.0,
    };
    let ch = q.a * (1.0 - q.alpha_1) * q.beta_hv * scale;
    let cv = q.a * (1.0 - q.alpha_1) * q.beta_vh * scale;
    let mut f = Matrix4::zeros();
    f[(0, 2)] = ch * q.eta_v * h0;
    f[(0, 3)] = ch * h0;
    f[(2, 0)] = cv * q.eta_h * s_v0;
    f[(2, 1)] = cv * s_v0;
    #[rustfmt::skip]
    let v = Matrix4::new(
        k.k3, 0.0, 0.0, 0.0,
        -q.gamma_h, k.k4, 0.0, 0.0,
        0.0, 0.0, k.k9, 0.0,
        0.0, 0.0, -q.gamma_v, k.k8,
    );
    Ok((f, v))
}

/// Spectral radius of `F V^{-1}`.
pub fn ngm_spectral_radius(p: &ModelParams, variant: ModelVariant) -> Result<f64> {
    let (f, v) = next_generation_matrices(p, variant)?;
    let v_inv = v
        .try_inverse()
        .ok_or_else(|| ModelError::Numerical("singular transition matrix".into()))?;
    let k: SMatrix<f64, 4, 4> = f * v_inv;
    Ok(k.complex_eigenvalues()
        .iter()
        .fold(0.0_f64, |m, z| m.max(z.norm())))
}

/// Basic reproduction number as the dominant eigenvalue of the
/// next-generation matrix of the full model.
pub fn r0_via_ngm(p: &ModelParams) -> Result<f64> {
    ngm_spectral_radius(p, ModelVariant::FULL)
}

/// All threshold quantities for one parameter set. `None` marks a quantity
/// that is undefined because the vector population does not persist.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub net: f64,
    pub r0: f64,
    /// Set when `R_0` was defined as zero because `net <= 1`.
    pub no_vectors: bool,
    pub r_c: Option<f64>,
    pub r_nv: Option<f64>,
    pub r0_mass: Option<f64>,
    pub r_cm: Option<f64>,
    pub r_b: Option<f64>,
    pub r1: Option<f64>,
    pub r_nv_subthreshold: Option<f64>,
}

impl ThresholdReport {
    pub fn compute(p: &ModelParams) -> Result<Self> {
        let net = net_reproductive_number(p)?;
        let has_vectors = net > 1.0;
        let gated = |f: fn(&ModelParams) -> Result<f64>| -> Result<Option<f64>> {
            if has_vectors {
                f(p).map(Some)
            } else {
                Ok(None)
            }
        };
        Ok(ThresholdReport {
            net,
            r0: basic_reproduction_number(p)?,
            no_vectors: !has_vectors,
            r_c: gated(rc_threshold)?,
            r_nv: gated(r_nv)?,
            r0_mass: gated(r0_mass)?,
            r_cm: Some(r_cm(p)?),
            r_b: Some(r_b(p)?),
            r1: Some(r1(p)?),
            r_nv_subthreshold: Some(r_nv_subthreshold(p)?),
        })
    }

    /// `(name, value, applicable)` rows in a fixed order.
    pub fn rows(&self) -> Vec<(&'static str, f64, bool)> {
        let opt = |v: Option<f64>| (v.unwrap_or(f64::NAN), v.is_some());
        let mut out = vec![("N", self.net, true), ("R0", self.r0, !self.no_vectors)];
        for (name, v) in [
            ("R_c", self.r_c),
            ("R_nv", self.r_nv),
            ("R0_mass", self.r0_mass),
            ("R_cm", self.r_cm),
            ("R_b", self.r_b),
            ("R1", self.r1),
            ("r_nv_subthreshold", self.r_nv_subthreshold),
        ] {
            let (x, ok) = opt(v);
            out.push((name, x, ok));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn baseline_net_number() {
        let net = net_reproductive_number(&ModelParams::baseline()).unwrap();
        assert!((net - 7.4703).abs() < 1e-3, "{net}");
    }

    #[test]
    fn net_number_edge_cases() {
        let p = ModelParams {
            mu_b: 0.0,
            ..ModelParams::baseline()
        };
        assert_eq!(net_reproductive_number(&p).unwrap(), 0.0);
        let mut p = ModelParams::baseline();
        let k = DerivedConstants::from_params_unchecked(&p);
        p.mu_b = k.k5 * k.k6 * k.k7 * k.k8 / (p.theta * p.l * p.s);
        assert!((net_reproductive_number(&p).unwrap() - 1.0).abs() < 1e-14);
        p.mu_b *= 1.0 - 1e-9;
        assert!(net_reproductive_number(&p).unwrap() < 1.0);
        assert_eq!(basic_reproduction_number(&p).unwrap(), 0.0);
    }

    #[test]
    fn r0_matches_ngm_at_presets() {
        for p in [
            ModelParams::baseline(),
            ModelParams::backward_example(0.0105),
            ModelParams::forward_example(0.2),
        ] {
            let a = basic_reproduction_number(&p).unwrap();
            let b = r0_via_ngm(&p).unwrap();
            assert!(rel(a, b) < 1e-10, "{a} {b}");
        }
    }

    #[test]
    fn backward_example_r0() {
        let r0 = basic_reproduction_number(&ModelParams::backward_example(0.0105)).unwrap();
        assert!((r0 - 0.29).abs() < 0.005, "{r0}");
    }

    #[test]
    fn no_transmission_zero_ngm() {
        let p = ModelParams {
            beta_hv: 0.0,
            beta_vh: 0.0,
            ..ModelParams::baseline()
        };
        assert_eq!(r0_via_ngm(&p).unwrap(), 0.0);
    }

    #[test]
    fn rc_relations() {
        let p = ModelParams::baseline();
        let r0 = basic_reproduction_number(&p).unwrap();
        let rc = rc_threshold(&p).unwrap();
        assert!(rc >= r0);
        assert!(rel(rc, r0 * (p.mu_h + p.delta) / p.mu_h) < 1e-12);
        let q = ModelParams { delta: 0.0, ..p };
        assert!(
            rel(
                rc_threshold(&q).unwrap(),
                basic_reproduction_number(&q).unwrap()
            ) < 1e-12
        );
        assert!(rel(r1(&q).unwrap(), r0_squared(&q).unwrap()) < 1e-14);
    }

    #[test]
    fn variant_numbers_match_their_ngm() {
        let p = ModelParams::no_vaccination_example();
        let a = r_nv(&p).unwrap();
        let b = ngm_spectral_radius(&p, ModelVariant::NO_VACCINATION).unwrap();
        assert!(rel(a, b) < 1e-10, "{a} {b}");
        let p = ModelParams::baseline();
        let a = r0_mass(&p).unwrap();
        let b = ngm_spectral_radius(&p, ModelVariant::MASS_ACTION).unwrap();
        assert!(rel(a, b) < 1e-10, "{a} {b}");
    }

    #[test]
    fn no_vaccination_example_numbers() {
        let p = ModelParams::no_vaccination_example();
        assert!((r_nv(&p).unwrap() - 0.2725).abs() < 1e-3);
        assert!((r_nv_subthreshold(&p).unwrap() - 0.0216).abs() < 1e-3);
    }

    #[test]
    fn gated_when_no_vectors() {
        let p = ModelParams {
            mu_b: 0.01,
            ..ModelParams::baseline()
        };
        let rep = ThresholdReport::compute(&p).unwrap();
        assert!(rep.no_vectors);
        assert_eq!(rep.r0, 0.0);
        assert!(rep.r_nv.is_none());
        assert!(matches!(
            r0_via_ngm(&p),
            Err(ModelError::NoDiseaseFreeVectors { .. })
        ));
    }
}
