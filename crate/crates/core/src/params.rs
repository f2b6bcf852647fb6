//! Biological and control parameters, derived rate constants, and the flat
//! `key = value` text format used to store parameter sets.

use std::fmt::Write as _;

use crate::error::{ModelError, Result};

/// Identifies one scalar parameter of [`ModelParams`].
///
/// The order of [`ParamId::ALL`] is the canonical order used by parameter
/// files, sensitivity tables and sampling matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamId {
    LambdaH,
    MuH,
    Xi,
    Omega,
    Epsilon,
    A,
    BetaHv,
    BetaVh,
    GammaH,
    GammaV,
    Delta,
    Sigma,
    EtaH,
    EtaV,
    MuV,
    Theta,
    MuB,
    CapacityE,
    CapacityL,
    MuE,
    MuL,
    MuP,
    S,
    L,
    Eta1,
    Eta2,
    Alpha1,
    Alpha2,
    Cm,
}

impl ParamId {
    pub const ALL: [ParamId; 29] = [
        ParamId::LambdaH,
        ParamId::MuH,
        ParamId::Xi,
        ParamId::Omega,
        ParamId::Epsilon,
        ParamId::A,
        ParamId::BetaHv,
        ParamId::BetaVh,
        ParamId::GammaH,
        ParamId::GammaV,
        ParamId::Delta,
        ParamId::Sigma,
        ParamId::EtaH,
        ParamId::EtaV,
        ParamId::MuV,
        ParamId::Theta,
        ParamId::MuB,
        ParamId::CapacityE,
        ParamId::CapacityL,
        ParamId::MuE,
        ParamId::MuL,
        ParamId::MuP,
        ParamId::S,
        ParamId::L,
        ParamId::Eta1,
        ParamId::Eta2,
        ParamId::Alpha1,
        ParamId::Alpha2,
        ParamId::Cm,
    ];

    /// Key used in parameter files and CSV output.
    pub fn key(self) -> &'static str {
        match self {
            ParamId::LambdaH => "Lambda_h",
            ParamId::MuH => "mu_h",
            ParamId::Xi => "xi",
            ParamId::Omega => "omega",
            ParamId::Epsilon => "epsilon",
            ParamId::A => "a",
            ParamId::BetaHv => "beta_hv",
            ParamId::BetaVh => "beta_vh",
            ParamId::GammaH => "gamma_h",
            ParamId::GammaV => "gamma_v",
            ParamId::Delta => "delta",
            ParamId::Sigma => "sigma",
            ParamId::EtaH => "eta_h",
            ParamId::EtaV => "eta_v",
            ParamId::MuV => "mu_v",
            ParamId::Theta => "theta",
            ParamId::MuB => "mu_b",
            ParamId::CapacityE => "Gamma_E",
            ParamId::CapacityL => "Gamma_L",
            ParamId::MuE => "mu_E",
            ParamId::MuL => "mu_L",
            ParamId::MuP => "mu_P",
            ParamId::S => "s",
            ParamId::L => "l",
            ParamId::Eta1 => "eta_1",
            ParamId::Eta2 => "eta_2",
            ParamId::Alpha1 => "alpha_1",
            ParamId::Alpha2 => "alpha_2",
            ParamId::Cm => "c_m",
        }
    }

    pub fn from_key(key: &str) -> Option<ParamId> {
        ParamId::ALL.iter().copied().find(|id| id.key() == key)
    }

    /// Admissible interval as `(lo, hi, lo_open, hi_open)`.
    pub fn bounds(self) -> (f64, f64, bool, bool) {
        match self {
            ParamId::MuH | ParamId::MuV | ParamId::CapacityE | ParamId::CapacityL => {
                (0.0, f64::INFINITY, true, true)
            }
            ParamId::Epsilon
            | ParamId::BetaHv
            | ParamId::BetaVh
            | ParamId::EtaH
            | ParamId::EtaV => (0.0, 1.0, false, false),
            ParamId::Alpha1 => (0.0, 1.0, false, true),
            ParamId::Alpha2 => (0.0, 1.0, true, false),
            _ => (0.0, f64::INFINITY, false, true),
        }
    }

    fn range_text(self) -> &'static str {
        match self {
            ParamId::MuH | ParamId::MuV | ParamId::CapacityE | ParamId::CapacityL => "must be > 0",
            ParamId::Epsilon
            | ParamId::BetaHv
            | ParamId::BetaVh
            | ParamId::EtaH
            | ParamId::EtaV => "must lie in [0, 1]",
            ParamId::Alpha1 => "must lie in [0, 1)",
            ParamId::Alpha2 => "must lie in (0, 1]",
            _ => "must be >= 0",
        }
    }

    /// Checks a single value against the admissible interval.
    pub fn check(self, value: f64) -> Result<()> {
        let (lo, hi, lo_open, hi_open) = self.bounds();
        let ok = value.is_finite()
            && if lo_open { value > lo } else { value >= lo }
            && if hi_open { value < hi } else { value <= hi };
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidParameter {
                name: self.key(),
                value,
                reason: self.range_text(),
            })
        }
    }
}

/// All biological and control parameters of the model. Rates are per day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Human recruitment (humans/day).
    pub lambda_h: f64,
    pub mu_h: f64,
    /// Vaccine coverage rate.
    pub xi: f64,
    /// Vaccine waning rate.
    pub omega: f64,
    /// Vaccine efficacy.
    pub epsilon: f64,
    /// Biting rate.
    pub a: f64,
    pub beta_hv: f64,
    pub beta_vh: f64,
    pub gamma_h: f64,
    pub gamma_v: f64,
    /// Disease-induced human death rate.
    pub delta: f64,
    /// Human recovery rate.
    pub sigma: f64,
    pub eta_h: f64,
    pub eta_v: f64,
    pub mu_v: f64,
    /// Pupa to adult maturation rate.
    pub theta: f64,
    /// Eggs laid per female per day.
    pub mu_b: f64,
    pub capacity_e: f64,
    pub capacity_l: f64,
    pub mu_e: f64,
    pub mu_l: f64,
    pub mu_p: f64,
    /// Egg to larva transfer rate.
    pub s: f64,
    /// Larva to pupa transfer rate.
    pub l: f64,
    /// Larvicide-induced egg mortality.
    pub eta_1: f64,
    /// Larvicide-induced larva mortality.
    pub eta_2: f64,
    /// Individual protection level.
    pub alpha_1: f64,
    /// Mechanical control efficacy (fraction of breeding capacity left).
    pub alpha_2: f64,
    /// Adulticide kill rate.
    pub c_m: f64,
}

impl ModelParams {
    /// Baseline parameter values used for the sensitivity analysis and the
    /// control simulations.
    pub fn baseline() -> Self {
        ModelParams {
            lambda_h: 2.5,
            mu_h: 1.0 / (67.0 * 365.0),
            xi: 0.5,
            omega: 0.05,
            epsilon: 0.61,
            a: 1.0,
            beta_hv: 0.75,
            beta_vh: 0.75,
            gamma_h: 1.0 / 14.0,
            gamma_v: 1.0 / 21.0,
            delta: 0.001,
            sigma: 0.1428,
            eta_h: 0.35,
            eta_v: 0.35,
            mu_v: 1.0 / 30.0,
            theta: 0.08,
            mu_b: 6.0,
            capacity_e: 10_000.0,
            capacity_l: 5_000.0,
            mu_e: 0.2,
            mu_l: 0.4,
            mu_p: 0.4,
            s: 0.7,
            l: 0.5,
            eta_1: 0.001,
            eta_2: 0.3,
            alpha_1: 0.2,
            alpha_2: 0.5,
            c_m: 0.01,
        }
    }

    /// Parameter set of the backward-bifurcation diagram (perfect vaccine,
    /// strong disease-induced death) with the given `beta_hv`.
    pub fn backward_example(beta_hv: f64) -> Self {
        ModelParams {
            lambda_h: 10.0,
            epsilon: 1.0,
            beta_vh: 0.8,
            eta_h: 1.0,
            eta_v: 1.0,
            sigma: 0.01428,
            delta: 1.0,
            alpha_1: 0.001,
            alpha_2: 1.0,
            c_m: 0.0001,
            capacity_e: 1e5,
            capacity_l: 5e4,
            beta_hv,
            ..Self::baseline()
        }
    }

    /// Parameter set of the forward-bifurcation diagram (no disease-induced
    /// death, no exposed infectivity, no controls).
    pub fn forward_example(beta_hv: f64) -> Self {
        ModelParams {
            lambda_h: 10.0,
            beta_vh: 0.8,
            eta_h: 0.0,
            eta_v: 0.0,
            delta: 0.0,
            c_m: 0.0,
            alpha_1: 0.0,
            alpha_2: 1.0,
            capacity_e: 1e5,
            capacity_l: 5e4,
            beta_hv,
            ..Self::baseline()
        }
    }

    /// Parameter set illustrating two endemic equilibria of the model without
    /// vaccination.
    ///
    /// Aquatic capacities and mortalities are the values that reproduce the
    /// printed egg and pupa counts (`E = 22180`, `P = 9977`), and `beta_hv`
    /// is the value at which the printed reproduction number 0.2725 and the
    /// quadratic coefficients are recovered.
    pub fn no_vaccination_example() -> Self {
        ModelParams {
            lambda_h: 5.0,
            beta_hv: 0.375,
            eta_h: 1.0,
            eta_v: 1.0,
            delta: 1.0,
            sigma: 0.01,
            c_m: 0.1,
            beta_vh: 0.4,
            alpha_1: 0.7,
            alpha_2: 0.5,
            mu_e: 0.2,
            mu_l: 0.2,
            capacity_e: 1e5,
            capacity_l: 5e4,
            xi: 0.0,
            omega: 0.0,
            ..Self::baseline()
        }
    }

    pub fn get(&self, id: ParamId) -> f64 {
        match id {
            ParamId::LambdaH => self.lambda_h,
            ParamId::MuH => self.mu_h,
            ParamId::Xi => self.xi,
            ParamId::Omega => self.omega,
            ParamId::Epsilon => self.epsilon,
            ParamId::A => self.a,
            ParamId::BetaHv => self.beta_hv,
            ParamId::BetaVh => self.beta_vh,
            ParamId::GammaH => self.gamma_h,
            ParamId::GammaV => self.gamma_v,
            ParamId::Delta => self.delta,
            ParamId::Sigma => self.sigma,
            ParamId::EtaH => self.eta_h,
            ParamId::EtaV => self.eta_v,
            ParamId::MuV => self.mu_v,
            ParamId::Theta => self.theta,
            ParamId::MuB => self.mu_b,
            ParamId::CapacityE => self.capacity_e,
            ParamId::CapacityL => self.capacity_l,
            ParamId::MuE => self.mu_e,
            ParamId::MuL => self.mu_l,
            ParamId::MuP => self.mu_p,
            ParamId::S => self.s,
            ParamId::L => self.l,
            ParamId::Eta1 => self.eta_1,
            ParamId::Eta2 => self.eta_2,
            ParamId::Alpha1 => self.alpha_1,
            ParamId::Alpha2 => self.alpha_2,
            ParamId::Cm => self.c_m,
        }
    }

    pub fn set(&mut self, id: ParamId, value: f64) {
        let slot = match id {
            ParamId::LambdaH => &mut self.lambda_h,
            ParamId::MuH => &mut self.mu_h,
            ParamId::Xi => &mut self.xi,
            ParamId::Omega => &mut self.omega,
            ParamId::Epsilon => &mut self.epsilon,
            ParamId::A => &mut self.a,
            ParamId::BetaHv => &mut self.beta_hv,
            ParamId::BetaVh => &mut self.beta_vh,
            ParamId::GammaH => &mut self.gamma_h,
            ParamId::GammaV => &mut self.gamma_v,
            ParamId::Delta => &mut self.delta,
            ParamId::Sigma => &mut self.sigma,
            ParamId::EtaH => &mut self.eta_h,
            ParamId::EtaV => &mut self.eta_v,
            ParamId::MuV => &mut self.mu_v,
            ParamId::Theta => &mut self.theta,
            ParamId::MuB => &mut self.mu_b,
            ParamId::CapacityE => &mut self.capacity_e,
            ParamId::CapacityL => &mut self.capacity_l,
            ParamId::MuE => &mut self.mu_e,
            ParamId::MuL => &mut self.mu_l,
            ParamId::MuP => &mut self.mu_p,
            ParamId::S => &mut self.s,
            ParamId::L => &mut self.l,
            ParamId::Eta1 => &mut self.eta_1,
            ParamId::Eta2 => &mut self.eta_2,
            ParamId::Alpha1 => &mut self.alpha_1,
            ParamId::Alpha2 => &mut self.alpha_2,
            ParamId::Cm => &mut self.c_m,
        };
        *slot = value;
    }

    /// Returns a copy with one parameter replaced.
    pub fn with(mut self, id: ParamId, value: f64) -> Self {
        self.set(id, value);
        self
    }

    /// Checks every parameter against its admissible interval; the first
    /// violation is reported by name.
    pub fn validate(&self) -> Result<()> {
        for id in ParamId::ALL {
            id.check(self.get(id))?;
        }
        Ok(())
    }

    pub fn derived(&self) -> Result<DerivedConstants> {
        self.validate()?;
        Ok(DerivedConstants::from_params_unchecked(self))
    }

    /// Net reproductive number of the vector population.
    pub fn net_reproductive_number(&self) -> f64 {
        let k = DerivedConstants::from_params_unchecked(self);
        self.mu_b * self.theta * self.l * self.s / (k.k5 * k.k6 * k.k7 * k.k8)
    }

    /// Serializes to the flat `key = value` format, one parameter per line in
    /// canonical order, with round-trip precision.
    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        for id in ParamId::ALL {
            let _ = writeln!(out, "{} = {:e}", id.key(), self.get(id));
        }
        out
    }

    /// Parses the `key = value` format. Every key must be known; missing keys
    /// keep their value from `defaults`. Blank lines and `#` comments are
    /// skipped. Returns the parameters and the keys that were set explicitly.
    pub fn from_kv_str(text: &str, defaults: &ModelParams) -> Result<(ModelParams, Vec<ParamId>)> {
        let mut params = *defaults;
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let (key, value) = split_kv(line, lineno + 1)?;
            let id = ParamId::from_key(key).ok_or_else(|| {
                ModelError::InvalidConfig(format!("line {}: unknown key `{key}`", lineno + 1))
            })?;
            let value = parse_number(value, lineno + 1)?;
            id.check(value)
                .map_err(|e| ModelError::InvalidConfig(format!("line {}: {e}", lineno + 1)))?;
            params.set(id, value);
            if !seen.contains(&id) {
                seen.push(id);
            }
        }
        params.validate()?;
        Ok((params, seen))
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::baseline()
    }
}

pub(crate) fn strip_comment(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

pub(crate) fn split_kv(line: &str, lineno: usize) -> Result<(&str, &str)> {
    let (key, value) = line.split_once('=').ok_or_else(|| {
        ModelError::InvalidConfig(format!("line {lineno}: expected `key = value`"))
    })?;
    Ok((key.trim(), value.trim()))
}

pub(crate) fn parse_number(value: &str, lineno: usize) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| ModelError::InvalidConfig(format!("line {lineno}: `{value}` is not a number")))
}

/// Rate constants and capacities derived from [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
    pub k6: f64,
    pub k7: f64,
    pub k8: f64,
    pub k9: f64,
    /// Effective egg capacity `alpha_2 * Gamma_E`.
    pub cap_e: f64,
    /// Effective larva capacity `alpha_2 * Gamma_L`.
    pub cap_l: f64,
    /// Fraction of vaccinated humans still susceptible, `1 - epsilon`.
    pub pi: f64,
    /// Human infectiousness weight `gamma_h + eta_h k4`.
    pub k10: f64,
    /// Vector infectiousness weight `gamma_v + eta_v k8`.
    pub k11: f64,
    /// `s K_E + k6 K_L`.
    pub k12: f64,
    /// `N - 1`.
    pub n_excess: f64,
}

impl DerivedConstants {
    pub fn from_params_unchecked(p: &ModelParams) -> Self {
        let k1 = p.xi + p.mu_h;
        let k2 = p.omega + p.mu_h;
        let k3 = p.mu_h + p.gamma_h;
        let k4 = p.mu_h + p.delta + p.sigma;
        let k5 = p.s + p.mu_e + p.eta_1;
        let k6 = p.l + p.mu_l + p.eta_2;
        let k7 = p.theta + p.mu_p;
        let k8 = p.mu_v + p.c_m;
        let k9 = p.mu_v + p.gamma_v + p.c_m;
        let cap_e = p.alpha_2 * p.capacity_e;
        let cap_l = p.alpha_2 * p.capacity_l;
        let net = p.mu_b * p.theta * p.l * p.s / (k5 * k6 * k7 * k8);
        DerivedConstants {
            k1,
            k2,
            k3,
            k4,
            k5,
            k6,
            k7,
            k8,
            k9,
            cap_e,
            cap_l,
            pi: 1.0 - p.epsilon,
            k10: p.gamma_h + p.eta_h * k4,
            k11: p.gamma_v + p.eta_v * k8,
            k12: p.s * cap_e + k6 * cap_l,
            n_excess: net - 1.0,
        }
    }

    /// `k1 k2 - xi omega`, evaluated as `mu_h (xi + omega + mu_h)` to avoid
    /// cancellation.
    pub fn kappa(&self, p: &ModelParams) -> f64 {
        p.mu_h * (p.xi + p.omega + p.mu_h)
    }
}

/// Validates and derives the rate constants.
pub fn derive_constants(p: &ModelParams) -> Result<DerivedConstants> {
    p.derived()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_aquatic_constants() {
        let k = derive_constants(&ModelParams::baseline()).unwrap();
        assert!((k.k5 - 0.901).abs() < 1e-12);
        assert!((k.k6 - 1.2).abs() < 1e-12);
        assert!((k.k7 - 0.48).abs() < 1e-12);
    }

    #[test]
    fn controls_off_collapse() {
        let p = ModelParams {
            xi: 0.0,
            omega: 0.0,
            epsilon: 0.0,
            ..ModelParams::baseline()
        };
        let k = derive_constants(&p).unwrap();
        assert_eq!(k.k1, p.mu_h);
        assert_eq!(k.k2, p.mu_h);
        assert_eq!(k.pi, 1.0);
    }

    #[test]
    fn full_mechanical_capacity_is_identity() {
        let p = ModelParams {
            alpha_2: 1.0,
            ..ModelParams::baseline()
        };
        let k = derive_constants(&p).unwrap();
        assert_eq!(k.cap_e, p.capacity_e);
        assert_eq!(k.cap_l, p.capacity_l);
    }

    #[test]
    fn kappa_identity() {
        let p = ModelParams::baseline();
        let k = derive_constants(&p).unwrap();
        let expanded = k.k1 * k.k2 - p.xi * p.omega;
        assert!((k.kappa(&p) - expanded).abs() <= 1e-10 * k.kappa(&p));
        assert!(k.kappa(&p) > 0.0);
    }

    #[test]
    fn rejects_out_of_range_by_name() {
        let p = ModelParams {
            alpha_1: 1.0,
            ..ModelParams::baseline()
        };
        match p.validate() {
            Err(ModelError::InvalidParameter { name, .. }) => assert_eq!(name, "alpha_1"),
            other => panic!("unexpected {other:?}"),
        }
        let p = ModelParams {
            alpha_2: 0.0,
            ..ModelParams::baseline()
        };
        assert!(matches!(
            p.validate(),
            Err(ModelError::InvalidParameter {
                name: "alpha_2",
                ..
            })
        ));
        let p = ModelParams {
            mu_v: -0.1,
            ..ModelParams::baseline()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn keys_round_trip() {
        for id in ParamId::ALL {
            assert_eq!(ParamId::from_key(id.key()), Some(id));
        }
        let p = ModelParams::backward_example(0.0105);
        let text = p.to_kv_string();
        let (q, seen) = ModelParams::from_kv_str(&text, &ModelParams::baseline()).unwrap();
        assert_eq!(p, q);
        assert_eq!(seen.len(), 29);
    }

    #[test]
    fn kv_errors_carry_line_numbers() {
        let base = ModelParams::baseline();
        let err = ModelParams::from_kv_str("a = 1\nbogus = 2\n", &base).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = ModelParams::from_kv_str("\nbeta_hv 0.1", &base).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = ModelParams::from_kv_str("beta_hv = x", &base).unwrap_err();
        assert!(err.to_string().contains("not a number"), "{err}");
        let err = ModelParams::from_kv_str("alpha_1 = 1.5", &base).unwrap_err();
        assert!(err.to_string().contains("alpha_1"), "{err}");
    }

    #[test]
    fn presets_are_valid() {
        for p in [
            ModelParams::baseline(),
            ModelParams::backward_example(0.0105),
            ModelParams::forward_example(0.1),
            ModelParams::no_vaccination_example(),
        ] {
            p.validate().unwrap();
        }
    }
}
