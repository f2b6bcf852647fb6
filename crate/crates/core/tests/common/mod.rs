#![allow(dead_code)]

use arbodyn::{ModelParams, ParamId};
use proptest::prelude::*;

/// Maps 29 unit draws to a valid parameter set around the baseline: rates
/// are scaled by a factor in [0.5, 2], probabilities are drawn inside their
/// admissible interval.
pub fn params_from_unit(u: &[f64]) -> ModelParams {
    let base = ModelParams::baseline();
    let mut p = base;
    for (id, &x) in ParamId::ALL.iter().zip(u) {
        let value = match id {
            ParamId::Epsilon
            | ParamId::BetaHv
            | ParamId::BetaVh
            | ParamId::EtaH
            | ParamId::EtaV => x,
            ParamId::Alpha1 => 0.95 * x,
            ParamId::Alpha2 => 0.05 + 0.95 * x,
            _ => base.get(*id) * 2f64.powf(2.0 * x - 1.0),
        };
        p.set(*id, value);
    }
    p
}

pub fn any_params() -> impl Strategy<Value = ModelParams> {
    proptest::collection::vec(0.0..1.0f64, 29).prop_map(|u| params_from_unit(&u))
}

/// Parameter sets that sustain a vector population.
pub fn vector_params() -> impl Strategy<Value = ModelParams> {
    any_params().prop_filter("net reproductive number must exceed one", |p| {
        p.net_reproductive_number() > 1.0
    })
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
