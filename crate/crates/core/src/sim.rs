//! Time integration with pulse-control schedules and the control
//! strategies A–F.

use crate::error::{ModelError, Result};
use crate::model::{force_of_infection, idx, rhs, ControlOverrides, ModelVariant, State, N_STATE};
use crate::ode::{self, Tolerances};
use crate::params::{ModelParams, ParamId};

/// Negative components beyond this fraction of `max(1, |y|_inf)` abort the
/// integration.
pub const POSITIVITY_TOL: f64 = 1e-6;

/// Default horizon for the strategy runs, in days.
pub const STRATEGY_HORIZON: f64 = 500.0;

/// Time-dependent control parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Control {
    Alpha1,
    Cm,
    Eta1,
    Eta2,
    Alpha2,
}

impl Control {
    pub const ALL: [Control; 5] = [
        Control::Alpha1,
        Control::Cm,
        Control::Eta1,
        Control::Eta2,
        Control::Alpha2,
    ];

    pub fn param(self) -> ParamId {
        match self {
            Control::Alpha1 => ParamId::Alpha1,
            Control::Cm => ParamId::Cm,
            Control::Eta1 => ParamId::Eta1,
            Control::Eta2 => ParamId::Eta2,
            Control::Alpha2 => ParamId::Alpha2,
        }
    }

    pub fn key(self) -> &'static str {
        self.param().key()
    }

    pub fn from_key(key: &str) -> Option<Control> {
        Control::ALL.into_iter().find(|c| c.key() == key)
    }

    fn set(self, o: &mut ControlOverrides, level: f64) {
        match self {
            Control::Alpha1 => o.alpha_1 = level,
            Control::Cm => o.c_m = level,
            Control::Eta1 => o.eta_1 = level,
            Control::Eta2 => o.eta_2 = level,
            Control::Alpha2 => o.alpha_2 = level,
        }
    }
}

/// A control held at `level` for `duration` days at the start of every
/// `period` days inside `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseEntry {
    pub control: Control,
    pub level: f64,
    pub period: f64,
    pub duration: f64,
    pub start: f64,
    pub end: f64,
}

impl PulseEntry {
    pub fn validate(&self) -> Result<()> {
        self.control.param().check(self.level)?;
        let finite = [self.period, self.duration, self.start, self.end]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(ModelError::InvalidSchedule(format!(
                "non-finite timing in {} pulse",
                self.control.key()
            )));
        }
        if !(self.duration > 0.0 && self.duration <= self.period) {
            return Err(ModelError::InvalidSchedule(format!(
                "{} pulse needs 0 < duration <= period, got duration {} and period {}",
                self.control.key(),
                self.duration,
                self.period
            )));
        }
        if !(self.start < self.end) {
            return Err(ModelError::InvalidSchedule(format!(
                "{} pulse window [{}, {}] is empty",
                self.control.key(),
                self.start,
                self.end
            )));
        }
        Ok(())
    }

    pub fn is_active(&self, t: f64) -> bool {
        if t < self.start || t >= self.end {
            return false;
        }
        (t - self.start).rem_euclid(self.period) < self.duration
    }

    /// Parses `control level period duration start end`.
    pub fn parse(text: &str) -> Result<PulseEntry> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        if parts.len() != 6 {
            return Err(ModelError::InvalidSchedule(format!(
                "expected `control level period duration start end`, got `{text}`"
            )));
        }
        let control = Control::from_key(parts[0]).ok_or_else(|| {
            ModelError::InvalidSchedule(format!("unknown control `{}`", parts[0]))
        })?;
        let mut nums = [0.0; 5];
        for (slot, s) in nums.iter_mut().zip(&parts[1..]) {
            *slot = s
                .parse()
                .map_err(|_| ModelError::InvalidSchedule(format!("`{s}` is not a number")))?;
        }
        let e = PulseEntry {
            control,
            level: nums[0],
            period: nums[1],
            duration: nums[2],
            start: nums[3],
            end: nums[4],
        };
        e.validate()?;
        Ok(e)
    }

    pub fn to_line(&self) -> String {
        format!(
            "{} {:e} {:e} {:e} {:e} {:e}",
            self.control.key(),
            self.level,
            self.period,
            self.duration,
            self.start,
            self.end
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PulseSchedule {
    pub entries: Vec<PulseEntry>,
}

impl PulseSchedule {
    pub fn new(entries: Vec<PulseEntry>) -> Result<Self> {
        let s = PulseSchedule { entries };
        s.validate()?;
        Ok(s)
    }

    pub fn empty() -> Self {
        PulseSchedule::default()
    }

    /// Entries must be valid, and two entries for the same control may not
    /// have overlapping windows.
    pub fn validate(&self) -> Result<()> {
        for (i, a) in self.entries.iter().enumerate() {
            a.validate()?;
            for b in &self.entries[i + 1..] {
                if a.control == b.control && a.start < b.end && b.start < a.end {
                    return Err(ModelError::InvalidSchedule(format!(
                        "overlapping windows for {}",
                        a.control.key()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn validate_horizon(&self, t0: f64, t1: f64) -> Result<()> {
        for e in &self.entries {
            if e.start < t0 || e.end > t1 {
                return Err(ModelError::InvalidSchedule(format!(
                    "{} window [{}, {}] outside horizon [{t0}, {t1}]",
                    e.control.key(),
                    e.start,
                    e.end
                )));
            }
        }
        Ok(())
    }

    /// Control values in force at time `t`.
    pub fn overrides_at(&self, t: f64, base: &ModelParams) -> ControlOverrides {
        let mut o = ControlOverrides::from_params(base);
        for e in &self.entries {
            if e.is_active(t) {
                e.control.set(&mut o, e.level);
            }
        }
        o
    }

    /// Instants in `(t0, t1)` where some control changes value.
    pub fn switch_times(&self, t0: f64, t1: f64, base: &ModelParams) -> Vec<f64> {
        let mut cand = Vec::new();
        for e in &self.entries {
            let mut k = 0u64;
            loop {
                let on = e.start + k as f64 * e.period;
                if on >= e.end {
                    break;
                }
                cand.push(on);
                cand.push((on + e.duration).min(e.end));
                k += 1;
            }
            cand.push(e.end);
        }
        cand.retain(|&t| t > t0 && t < t1);
        cand.sort_by(f64::total_cmp);
        cand.dedup();
        let mut out = Vec::with_capacity(cand.len());
        let mut prev = t0;
        for (i, &t) in cand.iter().enumerate() {
            let next = cand.get(i + 1).copied().unwrap_or(t1);
            let before = self.overrides_at(0.5 * (prev + t), base);
            let after = self.overrides_at(0.5 * (t + next), base);
            if before != after {
                out.push(t);
                prev = t;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    /// Integral of the human incidence `lambda_h (S_h + pi V_h)` from the
    /// initial time.
    pub cumulative_infections: Vec<f64>,
    /// Control switch instants inside the horizon.
    pub event_times: Vec<f64>,
}

impl Trajectory {
    pub fn infected_humans(&self) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| s.y[idx::E_H] + s.y[idx::I_H])
            .collect()
    }

    pub fn infected_vectors(&self) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| s.y[idx::E_V] + s.y[idx::I_V])
            .collect()
    }

    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }
}

/// `n` evenly spaced times from `t0` to `t1` inclusive.
pub fn uniform_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![t1];
    }
    (0..n)
        .map(|i| {
            if i + 1 == n {
                t1
            } else {
                t0 + (t1 - t0) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn check_positive(t: f64, y: &[f64]) -> Result<()> {
    let scale = y.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    for (i, &v) in y.iter().enumerate() {
        if v < -POSITIVITY_TOL * scale {
            return Err(ModelError::Positivity {
                t,
                component: i,
                value: v,
            });
        }
    }
    Ok(())
}

fn incidence(st: &State, q: &ModelParams, v: ModelVariant) -> Result<f64> {
    let (lh, _) = force_of_infection(st, q, v)?;
    let pi = 1.0 - q.epsilon;
    let vh = if v.vaccination { st.y[idx::V_H] } else { 0.0 };
    Ok(lh * (st.y[idx::S_H] + pi * vh))
}

/// Integrates the model from `init` over `t_span`, restarting at every
/// control switch. `samples` must be sorted inside `t_span`.
pub fn integrate(
    p: &ModelParams,
    v: ModelVariant,
    init: &State,
    t_span: (f64, f64),
    schedule: &PulseSchedule,
    tol: &Tolerances,
    samples: &[f64],
) -> Result<Trajectory> {
    p.validate()?;
    tol.validate()?;
    schedule.validate()?;
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(ModelError::InvalidConfig(format!(
            "time span [{t0}, {t1}] is empty"
        )));
    }
    schedule.validate_horizon(t0, t1)?;
    if !init.is_finite() || init.y.iter().any(|&x| x < 0.0) {
        return Err(ModelError::InvalidConfig(
            "initial state must be finite and nonnegative".into(),
        ));
    }
    if !v.vaccination && init.y[idx::V_H] != 0.0 {
        return Err(ModelError::InvalidConfig(
            "the model without vaccination needs V_h = 0 initially".into(),
        ));
    }
    if samples.windows(2).any(|w| !(w[0] < w[1])) || samples.iter().any(|&s| s < t0 || s > t1) {
        return Err(ModelError::InvalidConfig(
            "sample times must be strictly increasing inside the time span".into(),
        ));
    }

    let events = schedule.switch_times(t0, t1, p);
    let mut bounds = Vec::with_capacity(events.len() + 2);
    bounds.push(t0);
    bounds.extend_from_slice(&events);
    bounds.push(t1);

    let mut y = [0.0; N_STATE + 1];
    y[..N_STATE].copy_from_slice(&init.y);
    let mut times = Vec::with_capacity(samples.len());
    let mut states = Vec::with_capacity(samples.len());
    let mut cumulative = Vec::with_capacity(samples.len());
    let mut si = 0;

    for seg in bounds.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let ctrl = schedule.overrides_at(0.5 * (a + b), p);
        let q = v.effective_params(&ctrl.apply(p));
        let lo = si;
        while si < samples.len() && samples[si] <= b {
            si += 1;
        }
        let f = |t: f64, x: &[f64], d: &mut [f64]| -> Result<()> {
            let mut s = [0.0; N_STATE];
            s.copy_from_slice(&x[..N_STATE]);
            let st = State::new(s);
            let ds = rhs(t, &st, p, v, &ctrl)?;
            d[..N_STATE].copy_from_slice(&ds.y);
            d[N_STATE] = incidence(&st, &q, v)?;
            Ok(())
        };
        let out = ode::integrate(f, a, b, &y, tol, &samples[lo..si], None, check_positive)?;
        for (t, x) in out.samples {
            let mut s = [0.0; N_STATE];
            for (dst, &src) in s.iter_mut().zip(&x[..N_STATE]) {
                *dst = src.max(0.0);
            }
            times.push(t);
            states.push(State::new(s));
            cumulative.push(x[N_STATE].max(0.0));
        }
        y.copy_from_slice(&out.y_end);
    }
    Ok(Trajectory {
        times,
        states,
        cumulative_infections: cumulative,
        event_times: events,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategySummary {
    pub cumulative_infections: f64,
    pub peak_infected_humans: f64,
    pub final_infected_humans: f64,
    pub final_infected_vectors: f64,
    pub final_eggs: f64,
    pub final_larvae: f64,
}

impl StrategySummary {
    pub fn from_trajectory(tr: &Trajectory) -> Result<Self> {
        let last = tr
            .last()
            .ok_or_else(|| ModelError::InvalidConfig("empty trajectory".into()))?;
        let ih = tr.infected_humans();
        Ok(StrategySummary {
            cumulative_infections: tr.cumulative_infections.last().copied().unwrap_or(0.0),
            peak_infected_humans: ih.iter().copied().fold(0.0, f64::max),
            final_infected_humans: last.y[idx::E_H] + last.y[idx::I_H],
            final_infected_vectors: last.y[idx::E_V] + last.y[idx::I_V],
            final_eggs: last.y[idx::E],
            final_larvae: last.y[idx::L],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::A,
        Strategy::B,
        Strategy::C,
        Strategy::D,
        Strategy::E,
        Strategy::F,
    ];

    pub fn parse(tag: &str) -> Result<Strategy> {
        match tag.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Strategy::A),
            "B" => Ok(Strategy::B),
            "C" => Ok(Strategy::C),
            "D" => Ok(Strategy::D),
            "E" => Ok(Strategy::E),
            "F" => Ok(Strategy::F),
            _ => Err(ModelError::InvalidConfig(format!(
                "unknown strategy `{tag}`"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::A => "A",
            Strategy::B => "B",
            Strategy::C => "C",
            Strategy::D => "D",
            Strategy::E => "E",
            Strategy::F => "F",
        }
    }

    /// Controls whose level the strategy varies.
    pub fn varied(&self) -> &'static [Control] {
        match self {
            Strategy::A => &[Control::Alpha1],
            Strategy::B => &[Control::Cm],
            Strategy::C => &[Control::Eta1, Control::Eta2],
            Strategy::D => &[Control::Alpha2],
            Strategy::E => &[Control::Alpha1, Control::Cm],
            Strategy::F => &[Control::Alpha1, Control::Alpha2],
        }
    }
}

/// Control levels for a strategy run. Levels of controls a strategy does not
/// vary are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyLevels {
    pub alpha_1: f64,
    pub c_m: f64,
    pub eta_1: f64,
    pub eta_2: f64,
    pub alpha_2: f64,
}

impl Default for StrategyLevels {
    fn default() -> Self {
        StrategyLevels {
            alpha_1: 0.0,
            c_m: 0.0,
            eta_1: 0.0,
            eta_2: 0.0,
            alpha_2: 1.0,
        }
    }
}

impl StrategyLevels {
    pub fn get(&self, c: Control) -> f64 {
        match c {
            Control::Alpha1 => self.alpha_1,
            Control::Cm => self.c_m,
            Control::Eta1 => self.eta_1,
            Control::Eta2 => self.eta_2,
            Control::Alpha2 => self.alpha_2,
        }
    }

    pub fn set(&mut self, c: Control, level: f64) {
        match c {
            Control::Alpha1 => self.alpha_1 = level,
            Control::Cm => self.c_m = level,
            Control::Eta1 => self.eta_1 = level,
            Control::Eta2 => self.eta_2 = level,
            Control::Alpha2 => self.alpha_2 = level,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyOptions {
    pub horizon: f64,
    pub init: State,
    pub tol: Tolerances,
    /// Number of evenly spaced output samples including both ends.
    pub samples: usize,
}

impl Default for StrategyOptions {
    fn default() -> Self {
        StrategyOptions {
            horizon: STRATEGY_HORIZON,
            init: State::strategy_initial(),
            tol: Tolerances::default(),
            samples: STRATEGY_HORIZON as usize + 1,
        }
    }
}

/// Period, pulse length and window end of the pulsed adulticide and
/// larvicide campaigns.
const ADULTICIDE_PULSE: (f64, f64, f64) = (7.0, 1.0, 100.0);
const LARVICIDE_PULSE: (f64, f64, f64) = (15.0, 1.0, 100.0);

fn pulse(control: Control, level: f64, spec: (f64, f64, f64), horizon: f64) -> PulseEntry {
    PulseEntry {
        control,
        level,
        period: spec.0,
        duration: spec.1,
        start: 0.0,
        end: spec.2.min(horizon),
    }
}

/// Parameters and schedule that a strategy runs with.
pub fn strategy_setup(
    tag: Strategy,
    p: &ModelParams,
    levels: &StrategyLevels,
    horizon: f64,
) -> Result<(ModelParams, PulseSchedule)> {
    for &c in tag.varied() {
        c.param().check(levels.get(c))?;
    }
    let mut base = *p;
    base.eta_1 = 0.0;
    base.eta_2 = 0.0;
    base.c_m = 0.0;
    base.alpha_1 = 0.0;
    base.alpha_2 = 1.0;
    let mut entries = Vec::new();
    match tag {
        Strategy::A => base.alpha_1 = levels.alpha_1,
        Strategy::B => entries.push(pulse(Control::Cm, levels.c_m, ADULTICIDE_PULSE, horizon)),
        Strategy::C => {
            entries.push(pulse(Control::Eta1, levels.eta_1, LARVICIDE_PULSE, horizon));
            entries.push(pulse(Control::Eta2, levels.eta_2, LARVICIDE_PULSE, horizon));
        }
        Strategy::D => base.alpha_2 = levels.alpha_2,
        Strategy::E => {
            base.alpha_1 = levels.alpha_1;
            entries.push(pulse(Control::Cm, levels.c_m, ADULTICIDE_PULSE, horizon));
        }
        Strategy::F => {
            base.alpha_1 = levels.alpha_1;
            base.alpha_2 = levels.alpha_2;
        }
    }
    Ok((base, PulseSchedule::new(entries)?))
}

pub fn run_strategy(
    tag: Strategy,
    p: &ModelParams,
    levels: &StrategyLevels,
    opts: &StrategyOptions,
) -> Result<(Trajectory, StrategySummary)> {
    let (base, schedule) = strategy_setup(tag, p, levels, opts.horizon)?;
    let samples = uniform_times(0.0, opts.horizon, opts.samples);
    let tr = integrate(
        &base,
        ModelVariant::FULL,
        &opts.init,
        (0.0, opts.horizon),
        &schedule,
        &opts.tol,
        &samples,
    )?;
    let summary = StrategySummary::from_trajectory(&tr)?;
    Ok((tr, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::disease_free_states;

    #[test]
    fn pulse_activity() {
        let e = PulseEntry {
            control: Control::Cm,
            level: 0.5,
            period: 7.0,
            duration: 1.0,
            start: 0.0,
            end: 100.0,
        };
        assert!(e.is_active(0.0) && e.is_active(7.5) && !e.is_active(1.0));
        assert!(!e.is_active(100.0) && !e.is_active(-0.5));
        let s = PulseSchedule::new(vec![e]).unwrap();
        let sw = s.switch_times(0.0, 500.0, &ModelParams::baseline());
        assert_eq!(sw[0], 1.0);
        assert_eq!(sw[1], 7.0);
        assert_eq!(*sw.last().unwrap(), 99.0);
        assert_eq!(sw.len(), 29);
    }

    #[test]
    fn continuous_pulse_has_no_switches_inside() {
        let e = PulseEntry {
            control: Control::Alpha2,
            level: 0.3,
            period: 1.0,
            duration: 1.0,
            start: 0.0,
            end: 50.0,
        };
        let s = PulseSchedule::new(vec![e]).unwrap();
        assert_eq!(
            s.switch_times(0.0, 100.0, &ModelParams::baseline()),
            vec![50.0]
        );
    }

    #[test]
    fn schedule_validation() {
        let ok = PulseEntry::parse("c_m 0.5 7 1 0 100").unwrap();
        assert_eq!(ok.control, Control::Cm);
        assert!(PulseEntry::parse("c_m 0.5 7 8 0 100").is_err());
        assert!(PulseEntry::parse("alpha_1 1.5 7 1 0 100").is_err());
        assert!(PulseEntry::parse("c_m 0.5 7 1 10 5").is_err());
        assert!(PulseEntry::parse("foo 0.5 7 1 0 100").is_err());
        let overlap = PulseSchedule::new(vec![
            ok,
            PulseEntry {
                start: 50.0,
                end: 150.0,
                ..ok
            },
        ]);
        assert!(overlap.is_err());
        let s = PulseSchedule::new(vec![ok]).unwrap();
        assert!(s.validate_horizon(0.0, 50.0).is_err());
        assert_eq!(PulseEntry::parse(&ok.to_line()).unwrap(), ok);
    }

    #[test]
    fn disease_free_state_is_fixed() {
        let p = ModelParams::baseline();
        let (_, e1) = disease_free_states(&p, ModelVariant::FULL).unwrap();
        let e1 = e1.unwrap().state;
        let s =
            PulseSchedule::new(vec![PulseEntry::parse("alpha_1 0.5 7 1 0 100").unwrap()]).unwrap();
        let tr = integrate(
            &p,
            ModelVariant::FULL,
            &e1,
            (0.0, 200.0),
            &s,
            &Tolerances::default(),
            &uniform_times(0.0, 200.0, 21),
        )
        .unwrap();
        for st in &tr.states {
            for i in 0..N_STATE {
                assert!(
                    (st.y[i] - e1.y[i]).abs() <= 1e-6 * e1.y[i].abs().max(1.0),
                    "{i}"
                );
            }
        }
        assert!(tr.cumulative_infections.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = ModelParams::baseline();
        let tol = Tolerances::default();
        let mut bad = State::strategy_initial();
        bad.y[0] = -1.0;
        let s = PulseSchedule::empty();
        assert!(integrate(&p, ModelVariant::FULL, &bad, (0.0, 1.0), &s, &tol, &[]).is_err());
        let init = State::strategy_initial();
        assert!(integrate(&p, ModelVariant::FULL, &init, (1.0, 1.0), &s, &tol, &[]).is_err());
        assert!(integrate(
            &p,
            ModelVariant::NO_VACCINATION,
            &init,
            (0.0, 1.0),
            &s,
            &tol,
            &[]
        )
        .is_err());
        assert!(integrate(
            &p,
            ModelVariant::FULL,
            &init,
            (0.0, 1.0),
            &s,
            &tol,
            &[0.5, 0.2]
        )
        .is_err());
    }

    #[test]
    fn strategy_levels_are_checked() {
        let p = ModelParams::baseline();
        let levels = StrategyLevels {
            alpha_1: 1.2,
            ..Default::default()
        };
        assert!(strategy_setup(Strategy::A, &p, &levels, 500.0).is_err());
        assert!(strategy_setup(Strategy::B, &p, &levels, 500.0).is_ok());
        assert_eq!(Strategy::parse("e").unwrap(), Strategy::E);
        assert!(Strategy::parse("G").is_err());
    }
}
