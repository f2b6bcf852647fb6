//! State vector, incidence functions and the right-hand side of every model
//! variant.

use crate::error::{ModelError, Result};
use crate::params::{DerivedConstants, ModelParams};

/// Number of compartments of the full model.
pub const N_STATE: usize = 11;

/// Total human population below which standard incidence is refused.
pub const N_FLOOR: f64 = 1e-9;

/// Component indices into [`State::y`].
pub mod idx {
    pub const S_H: usize = 0;
    pub const V_H: usize = 1;
    pub const E_H: usize = 2;
    pub const I_H: usize = 3;
    pub const R_H: usize = 4;
    pub const S_V: usize = 5;
    pub const E_V: usize = 6;
    pub const I_V: usize = 7;
    pub const E: usize = 8;
    pub const L: usize = 9;
    pub const P: usize = 10;
}

/// Column names in state order.
pub const STATE_NAMES: [&str; N_STATE] = [
    "S_h", "V_h", "E_h", "I_h", "R_h", "S_v", "E_v", "I_v", "E", "L", "P",
];

/// Compartment values `(S_h, V_h, E_h, I_h, R_h, S_v, E_v, I_v, E, L, P)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub y: [f64; N_STATE],
}

impl State {
    pub fn new(y: [f64; N_STATE]) -> Self {
        State { y }
    }

    pub fn zeros() -> Self {
        State { y: [0.0; N_STATE] }
    }

    pub fn n_h(&self) -> f64 {
        self.y[..5].iter().sum()
    }

    pub fn n_v(&self) -> f64 {
        self.y[5..8].iter().sum()
    }

    pub fn max_norm(&self) -> f64 {
        self.y.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.y.iter().all(|v| v.is_finite())
    }

    /// Initial state used by the control-strategy simulations.
    pub fn strategy_initial() -> Self {
        State::new([
            700.0, 10.0, 220.0, 100.0, 60.0, 3000.0, 400.0, 120.0, 10_000.0, 5_000.0, 3_000.0,
        ])
    }

    /// Checks membership of the feasible region with relative slack `slack`.
    /// Returns the first violated bound as `(component name, value, bound)`.
    pub fn feasible_violation(
        &self,
        p: &ModelParams,
        slack: f64,
    ) -> Option<(&'static str, f64, f64)> {
        let k = DerivedConstants::from_params_unchecked(p);
        for (i, &v) in self.y.iter().enumerate() {
            if v < -slack * (1.0 + self.max_norm()) {
                return Some((STATE_NAMES[i], v, 0.0));
            }
        }
        let bounds = [
            ("N_h", self.n_h(), p.lambda_h / p.mu_h),
            ("E", self.y[idx::E], k.cap_e),
            ("L", self.y[idx::L], k.cap_l),
            ("P", self.y[idx::P], p.l * k.cap_l / k.k7),
            ("N_v", self.n_v(), p.theta * p.l * k.cap_l / (k.k7 * k.k8)),
        ];
        bounds
            .into_iter()
            .find(|&(_, v, b)| v > b * (1.0 + slack) + slack)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Incidence {
    Standard,
    MassAction,
}

/// Selects which vector field is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelVariant {
    pub incidence: Incidence,
    pub vaccination: bool,
    /// Forces `delta = 0` regardless of the parameter set.
    pub zero_delta: bool,
}

impl ModelVariant {
    pub const FULL: ModelVariant = ModelVariant {
        incidence: Incidence::Standard,
        vaccination: true,
        zero_delta: false,
    };
    pub const NO_VACCINATION: ModelVariant = ModelVariant {
        incidence: Incidence::Standard,
        vaccination: false,
        zero_delta: false,
    };
    pub const MASS_ACTION: ModelVariant = ModelVariant {
        incidence: Incidence::MassAction,
        vaccination: true,
        zero_delta: false,
    };

    pub fn with_zero_delta(mut self) -> Self {
        self.zero_delta = true;
        self
    }

    /// Dimension of the vector field (10 without vaccination).
    pub fn dim(&self) -> usize {
        if self.vaccination {
            N_STATE
        } else {
            N_STATE - 1
        }
    }

    /// Parameters as seen by this variant (vaccination and `delta` removed
    /// where the variant drops them).
    pub fn effective_params(&self, p: &ModelParams) -> ModelParams {
        let mut q = *p;
        if !self.vaccination {
            q.xi = 0.0;
            q.omega = 0.0;
        }
        if self.zero_delta {
            q.delta = 0.0;
        }
        q
    }

    pub fn name(&self) -> String {
        let mut s = String::from(match self.incidence {
            Incidence::Standard => "standard",
            Incidence::MassAction => "mass-action",
        });
        if !self.vaccination {
            s.push_str("+no-vaccination");
        }
        if self.zero_delta {
            s.push_str("+delta0");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut v = ModelVariant::FULL;
        for part in text.split('+').map(str::trim) {
            match part {
                "standard" | "full" => v.incidence = Incidence::Standard,
                "mass-action" => v.incidence = Incidence::MassAction,
                "no-vaccination" => v.vaccination = false,
                "delta0" => v.zero_delta = true,
                other => {
                    return Err(ModelError::InvalidConfig(format!(
                        "unknown variant component `{other}`"
                    )))
                }
            }
        }
        Ok(v)
    }
}

impl Default for ModelVariant {
    fn default() -> Self {
        ModelVariant::FULL
    }
}

/// Instantaneous values of the time-dependent controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOverrides {
    pub alpha_1: f64,
    pub c_m: f64,
    pub eta_1: f64,
    pub eta_2: f64,
    pub alpha_2: f64,
}

impl ControlOverrides {
    pub fn from_params(p: &ModelParams) -> Self {
        ControlOverrides {
            alpha_1: p.alpha_1,
            c_m: p.c_m,
            eta_1: p.eta_1,
            eta_2: p.eta_2,
            alpha_2: p.alpha_2,
        }
    }

    pub fn apply(&self, p: &ModelParams) -> ModelParams {
        ModelParams {
            alpha_1: self.alpha_1,
            c_m: self.c_m,
            eta_1: self.eta_1,
            eta_2: self.eta_2,
            alpha_2: self.alpha_2,
            ..*p
        }
    }
}

/// Returns `(lambda_h^c, lambda_v^c)`.
pub fn force_of_infection(st: &State, p: &ModelParams, v: ModelVariant) -> Result<(f64, f64)> {
    let y = &st.y;
    let protect = 1.0 - p.alpha_1;
    let from_v = p.eta_v * y[idx::E_V] + y[idx::I_V];
    let from_h = p.eta_h * y[idx::E_H] + y[idx::I_H];
    let ch = p.a * protect * p.beta_hv;
    let cv = p.a * protect * p.beta_vh;
    match v.incidence {
        Incidence::MassAction => Ok((ch * from_v, cv * from_h)),
        Incidence::Standard => {
            let n_h = st.n_h();
            if !(n_h > N_FLOOR) {
                return Err(ModelError::DegeneratePopulation {
                    n_h,
                    floor: N_FLOOR,
                });
            }
            Ok((ch * from_v / n_h, cv * from_h / n_h))
        }
    }
}

/// Right-hand side of the full model (or of the variant selected by `v`),
/// with the controls taken from `active`. For the no-vaccination variant the
/// `V_h` slot is held at zero and the 10-equation field is used.
pub fn rhs(
    _t: f64,
    st: &State,
    p: &ModelParams,
    v: ModelVariant,
    active: &ControlOverrides,
) -> Result<State> {
    let q = v.effective_params(&active.apply(p));
    if !v.vaccination {
        let d = rhs_no_vaccination(&to_reduced(st), &q, v.incidence)?;
        return Ok(from_reduced(&d));
    }
    let y = &st.y;
    let (lh, lv) = force_of_infection(st, &q, v)?;
    let pi = 1.0 - q.epsilon;
    let mut d = [0.0; N_STATE];
    d[idx::S_H] = q.lambda_h + q.omega * y[idx::V_H] - (lh + q.xi + q.mu_h) * y[idx::S_H];
    d[idx::V_H] = q.xi * y[idx::S_H] - (pi * lh + q.omega + q.mu_h) * y[idx::V_H];
    d[idx::E_H] = lh * (y[idx::S_H] + pi * y[idx::V_H]) - (q.mu_h + q.gamma_h) * y[idx::E_H];
    human_tail(&mut d, y, &q);
    vector_part(&mut d, y, &q, lv);
    Ok(State::new(d))
}

fn human_tail(d: &mut [f64; N_STATE], y: &[f64; N_STATE], q: &ModelParams) {
    d[idx::I_H] = q.gamma_h * y[idx::E_H] - (q.mu_h + q.delta + q.sigma) * y[idx::I_H];
    d[idx::R_H] = q.sigma * y[idx::I_H] - q.mu_h * y[idx::R_H];
}

fn vector_part(d: &mut [f64; N_STATE], y: &[f64; N_STATE], q: &ModelParams, lv: f64) {
    let k8 = q.mu_v + q.c_m;
    let n_v = y[idx::S_V] + y[idx::E_V] + y[idx::I_V];
    d[idx::S_V] = q.theta * y[idx::P] - lv * y[idx::S_V] - k8 * y[idx::S_V];
    d[idx::E_V] = lv * y[idx::S_V] - (k8 + q.gamma_v) * y[idx::E_V];
    d[idx::I_V] = q.gamma_v * y[idx::E_V] - k8 * y[idx::I_V];
    d[idx::E] = q.mu_b * (1.0 - y[idx::E] / (q.alpha_2 * q.capacity_e)) * n_v
        - (q.s + q.mu_e + q.eta_1) * y[idx::E];
    d[idx::L] = q.s * y[idx::E] * (1.0 - y[idx::L] / (q.alpha_2 * q.capacity_l))
        - (q.l + q.mu_l + q.eta_2) * y[idx::L];
    d[idx::P] = q.l * y[idx::L] - (q.theta + q.mu_p) * y[idx::P];
}

/// Drops the `V_h` slot.
pub fn to_reduced(st: &State) -> [f64; N_STATE - 1] {
    let mut r = [0.0; N_STATE - 1];
    r[0] = st.y[0];
    r[1..].copy_from_slice(&st.y[2..]);
    r
}

/// Inserts `V_h = 0`.
pub fn from_reduced(r: &[f64; N_STATE - 1]) -> State {
    let mut y = [0.0; N_STATE];
    y[0] = r[0];
    y[2..].copy_from_slice(&r[1..]);
    State::new(y)
}

/// The model without vaccination on `(S_h, E_h, I_h, R_h, S_v, E_v, I_v, E, L, P)`.
pub fn rhs_no_vaccination(
    r: &[f64; N_STATE - 1],
    q: &ModelParams,
    incidence: Incidence,
) -> Result<[f64; N_STATE - 1]> {
    let (s_h, e_h, i_h, r_h) = (r[0], r[1], r[2], r[3]);
    let (s_v, e_v, i_v) = (r[4], r[5], r[6]);
    let (e, l, pp) = (r[7], r[8], r[9]);
    let n_h = s_h + e_h + i_h + r_h;
    let protect = 1.0 - q.alpha_1;
    let mut lh = q.a * protect * q.beta_hv * (q.eta_v * e_v + i_v);
    let mut lv = q.a * protect * q.beta_vh * (q.eta_h * e_h + i_h);
    if incidence == Incidence::Standard {
        if !(n_h > N_FLOOR) {
            return Err(ModelError::DegeneratePopulation {
                n_h,
                floor: N_FLOOR,
            });
        }
        lh /= n_h;
        lv /= n_h;
    }
    let k8 = q.mu_v + q.c_m;
    let n_v = s_v + e_v + i_v;
    Ok([
        q.lambda_h - (lh + q.mu_h) * s_h,
        lh * s_h - (q.mu_h + q.gamma_h) * e_h,
        q.gamma_h * e_h - (q.mu_h + q.delta + q.sigma) * i_h,
        q.sigma * i_h - q.mu_h * r_h,
        q.theta * pp - (lv + k8) * s_v,
        lv * s_v - (k8 + q.gamma_v) * e_v,
        q.gamma_v * e_v - k8 * i_v,
        q.mu_b * (1.0 - e / (q.alpha_2 * q.capacity_e)) * n_v - (q.s + q.mu_e + q.eta_1) * e,
        q.s * e * (1.0 - l / (q.alpha_2 * q.capacity_l)) - (q.l + q.mu_l + q.eta_2) * l,
        q.l * l - (q.theta + q.mu_p) * pp,
    ])
}

/// Right-hand side with the parameter-set controls.
pub fn rhs_static(st: &State, p: &ModelParams, v: ModelVariant) -> Result<State> {
    rhs(0.0, st, p, v, &ControlOverrides::from_params(p))
}

/// Right-hand side on the variant's own coordinates (length `v.dim()`).
pub fn rhs_vec(x: &[f64], p: &ModelParams, v: ModelVariant) -> Result<Vec<f64>> {
    let st = embed(x, v);
    let d = rhs_static(&st, p, v)?;
    Ok(project(&d, v))
}

/// Maps variant coordinates to a full state.
pub fn embed(x: &[f64], v: ModelVariant) -> State {
    if v.vaccination {
        let mut y = [0.0; N_STATE];
        y.copy_from_slice(x);
        State::new(y)
    } else {
        let mut r = [0.0; N_STATE - 1];
        r.copy_from_slice(x);
        from_reduced(&r)
    }
}

/// Maps a full state to variant coordinates.
pub fn project(st: &State, v: ModelVariant) -> Vec<f64> {
    if v.vaccination {
        st.y.to_vec()
    } else {
        to_reduced(st).to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_infectives_no_force() {
        let p = ModelParams::baseline();
        let st = State::new([100.0, 10.0, 0.0, 0.0, 5.0, 50.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(
            force_of_infection(&st, &p, ModelVariant::FULL).unwrap(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn full_protection_no_force() {
        let p = ModelParams {
            alpha_1: 1.0,
            ..ModelParams::baseline()
        };
        let st = State::new([100.0, 10.0, 5.0, 5.0, 5.0, 50.0, 7.0, 9.0, 1.0, 1.0, 1.0]);
        let (lh, lv) = force_of_infection(&st, &p, ModelVariant::FULL).unwrap();
        assert_eq!(lh, 0.0);
        assert_eq!(lv, 0.0);
    }

    #[test]
    fn hand_computed_force() {
        let p = ModelParams::baseline();
        let st = State::new([1000.0, 0.0, 0.0, 0.0, 0.0, 0.0, 100.0, 50.0, 0.0, 0.0, 0.0]);
        let (lh, _) = force_of_infection(&st, &p, ModelVariant::FULL).unwrap();
        assert!((lh - 0.051).abs() < 1e-15);
    }

    #[test]
    fn degenerate_population_rejected() {
        let p = ModelParams::baseline();
        let st = State::zeros();
        assert!(matches!(
            force_of_infection(&st, &p, ModelVariant::FULL),
            Err(ModelError::DegeneratePopulation { .. })
        ));
        assert!(force_of_infection(&st, &p, ModelVariant::MASS_ACTION).is_ok());
    }

    #[test]
    fn human_balance() {
        let p = ModelParams::baseline();
        let st = State::new([
            700.0, 10.0, 220.0, 100.0, 60.0, 3000.0, 400.0, 120.0, 1e4, 5e3, 3e3,
        ]);
        let d = rhs_static(&st, &p, ModelVariant::FULL).unwrap();
        let sum: f64 = d.y[..5].iter().sum();
        let expect = p.lambda_h - p.mu_h * st.n_h() - p.delta * st.y[idx::I_H];
        assert!((sum - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
    }

    #[test]
    fn no_vaccination_matches_full_with_vaccination_off() {
        let p = ModelParams {
            xi: 0.0,
            omega: 0.0,
            ..ModelParams::baseline()
        };
        let st = State::new([
            700.0, 0.0, 220.0, 100.0, 60.0, 3000.0, 400.0, 120.0, 1e4, 5e3, 3e3,
        ]);
        let a = rhs_static(&st, &p, ModelVariant::FULL).unwrap();
        let b = rhs_static(&st, &p, ModelVariant::NO_VACCINATION).unwrap();
        for i in 0..N_STATE {
            assert!(
                (a.y[i] - b.y[i]).abs() <= 1e-12 * (1.0 + a.y[i].abs()),
                "{i}"
            );
        }
    }

    #[test]
    fn mass_action_equals_standard_at_unit_population() {
        let p = ModelParams::baseline();
        let st = State::new([0.4, 0.3, 0.1, 0.1, 0.1, 30.0, 4.0, 1.2, 100.0, 50.0, 30.0]);
        let a = rhs_static(&st, &p, ModelVariant::FULL).unwrap();
        let b = rhs_static(&st, &p, ModelVariant::MASS_ACTION).unwrap();
        for i in 0..N_STATE {
            assert!((a.y[i] - b.y[i]).abs() <= 1e-12 * (1.0 + a.y[i].abs()));
        }
    }

    #[test]
    fn variant_names_round_trip() {
        for v in [
            ModelVariant::FULL,
            ModelVariant::NO_VACCINATION,
            ModelVariant::MASS_ACTION,
            ModelVariant::NO_VACCINATION.with_zero_delta(),
        ] {
            assert_eq!(ModelVariant::parse(&v.name()).unwrap(), v);
        }
        assert!(ModelVariant::parse("bogus").is_err());
    }
}
