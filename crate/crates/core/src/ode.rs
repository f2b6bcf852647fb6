//! Dormand–Prince 5(4) integrator with adaptive steps and the standard
//! fourth-order continuous extension for dense output.

use crate::error::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-8,
            atol: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        if !(1e-12..=1e-3).contains(&self.rtol) {
            return Err(ModelError::InvalidConfig(format!(
                "relative tolerance {} outside [1e-12, 1e-3]",
                self.rtol
            )));
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return Err(ModelError::InvalidConfig(format!(
                "absolute tolerance {} must be positive",
                self.atol
            )));
        }
        Ok(())
    }
}

/// Hard cap on accepted plus rejected steps per call.
pub const MAX_STEPS: usize = 5_000_000;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Result of integrating over one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// `(t, y)` at each requested sample time, in order.
    pub samples: Vec<(f64, Vec<f64>)>,
    pub y_end: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    /// Step size proposed for a continuation.
    pub h_next: f64,
}

fn err_norm(y0: &[f64], y1: &[f64], e: &[f64], tol: &Tolerances) -> f64 {
    let n = y0.len() as f64;
    let s: f64 = (0..y0.len())
        .map(|i| {
            let sc = tol.atol + tol.rtol * y0[i].abs().max(y1[i].abs());
            (e[i] / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

fn initial_step<F>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    tol: &Tolerances,
    span: f64,
) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    let sc: Vec<f64> = y0.iter().map(|y| tol.atol + tol.rtol * y.abs()).collect();
    let rms = |v: &[f64]| -> f64 {
        ((0..n).map(|i| (v[i] / sc[i]).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let y1: Vec<f64> = (0..n).map(|i| y0[i] + h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    f(t0 + h0, &y1, &mut f1)?;
    let diff: Vec<f64> = (0..n).map(|i| f1[i] - f0[i]).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Integrates `y' = f(t, y)` from `t0` to `t1 > t0`.
///
/// `samples` must be sorted and lie in `[t0, t1]`; each is filled from the
/// dense output of the step that covers it. `check` runs after every
/// accepted step on the new state and may abort the integration.
#[allow(clippy::too_many_arguments)]
pub fn integrate<F, C>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    tol: &Tolerances,
    samples: &[f64],
    h_init: Option<f64>,
    mut check: C,
) -> Result<Segment>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    C: FnMut(f64, &[f64]) -> Result<()>,
{
    let n = y0.len();
    if !(t1 > t0) {
        return Err(ModelError::InvalidConfig(format!(
            "integration interval [{t0}, {t1}] is empty"
        )));
    }
    let span = t1 - t0;
    let mut out = Vec::with_capacity(samples.len());
    let mut si = 0;
    while si < samples.len() && samples[si] <= t0 {
        out.push((samples[si], y0.to_vec()));
        si += 1;
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    f(t, &y, &mut k1)?;
    let mut h = match h_init {
        Some(h) if h > 0.0 => h.min(span),
        _ => initial_step(&mut f, t0, &y, &k1, tol, span)?,
    };
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut errv = vec![0.0; n];
    let (mut accepted, mut rejected) = (0, 0);
    let mut last_reject = false;

    while t < t1 {
        if accepted + rejected >= MAX_STEPS {
            return Err(ModelError::Numerical(format!(
                "step limit {MAX_STEPS} reached at t = {t}"
            )));
        }
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < h_min {
            return Err(ModelError::StepSizeUnderflow { t, last_state: y });
        }
        let last = t + h >= t1 - h_min;
        if last {
            h = t1 - t;
        }

        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, &tmp, &mut k2)?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, &tmp, &mut k3)?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, &tmp, &mut k4)?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, &tmp, &mut k5)?;
        for i in 0..n {
            tmp[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, &tmp, &mut k6)?;
        for i in 0..n {
            y_new[i] =
                y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        let t_new = if last { t1 } else { t + h };
        f(t_new, &y_new, &mut k7)?;
        for i in 0..n {
            errv[i] =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = err_norm(&y, &y_new, &errv, tol);
        if !err.is_finite() {
            rejected += 1;
            h *= 0.1;
            last_reject = true;
            continue;
        }

        if err <= 1.0 {
            check(t_new, &y_new)?;
            while si < samples.len() && samples[si] <= t_new {
                let ts = samples[si];
                let ys = if ts == t_new {
                    y_new.clone()
                } else {
                    dense(&y, &y_new, &k1, &k3, &k4, &k5, &k6, &k7, h, (ts - t) / h)
                };
                out.push((ts, ys));
                si += 1;
            }
            accepted += 1;
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            let mut fac = 0.9 * err.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            if last_reject {
                fac = fac.min(1.0);
            }
            h *= fac;
            last_reject = false;
        } else {
            rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            last_reject = true;
        }
    }
    Ok(Segment {
        samples: out,
        y_end: y,
        accepted,
        rejected,
        h_next: h,
    })
}

#[allow(clippy::too_many_arguments)]
fn dense(
    y0: &[f64],
    y1: &[f64],
    k1: &[f64],
    k3: &[f64],
    k4: &[f64],
    k5: &[f64],
    k6: &[f64],
    k7: &[f64],
    h: f64,
    theta: f64,
) -> Vec<f64> {
    let th1 = 1.0 - theta;
    (0..y0.len())
        .map(|i| {
            let ydiff = y1[i] - y0[i];
            let bspl = h * k1[i] - ydiff;
            let r4 = ydiff - h * k7[i] - bspl;
            let r5 =
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            y0[i] + theta * (ydiff + th1 * (bspl + theta * (r4 + th1 * r5)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_check(_: f64, _: &[f64]) -> Result<()> {
        Ok(())
    }

    #[test]
    fn exponential_decay() {
        let tol = Tolerances::default();
        let samples: Vec<f64> = (0..=10).map(|i| i as f64 * 0.5).collect();
        let seg = integrate(
            |_, y, d| {
                d[0] = -y[0];
                Ok(())
            },
            0.0,
            5.0,
            &[1.0],
            &tol,
            &samples,
            None,
            no_check,
        )
        .unwrap();
        assert_eq!(seg.samples.len(), samples.len());
        for (t, y) in &seg.samples {
            assert!((y[0] - (-t).exp()).abs() < 1e-8, "{t}");
        }
        assert!((seg.y_end[0] - (-5.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let tol = Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
        };
        let samples: Vec<f64> = (0..=300).map(|i| i as f64 * 0.1).collect();
        let seg = integrate(
            |_, y, d| {
                d[0] = y[1];
                d[1] = -y[0];
                Ok(())
            },
            0.0,
            30.0,
            &[1.0, 0.0],
            &tol,
            &samples,
            None,
            no_check,
        )
        .unwrap();
        for (t, y) in &seg.samples {
            assert!((y[0] - t.cos()).abs() < 1e-7, "{t} {}", y[0]);
            assert!((y[1] + t.sin()).abs() < 1e-7);
        }
    }

    #[test]
    fn blow_up_reports_underflow_or_failure() {
        let r = integrate(
            |_, y, d| {
                d[0] = y[0] * y[0];
                Ok(())
            },
            0.0,
            2.0,
            &[1.0],
            &Tolerances::default(),
            &[],
            None,
            no_check,
        );
        assert!(r.is_err());
    }

    #[test]
    fn check_can_abort() {
        let r = integrate(
            |_, _, d| {
                d[0] = -1.0;
                Ok(())
            },
            0.0,
            2.0,
            &[0.5],
            &Tolerances::default(),
            &[],
            None,
            |t, y| {
                if y[0] < -1e-6 {
                    Err(ModelError::Positivity {
                        t,
                        component: 0,
                        value: y[0],
                    })
                } else {
                    Ok(())
                }
            },
        );
        assert!(matches!(r, Err(ModelError::Positivity { .. })));
    }

    #[test]
    fn tolerance_bounds() {
        assert!(Tolerances::default().validate().is_ok());
        assert!(Tolerances {
            rtol: 1e-2,
            atol: 1e-10
        }
        .validate()
        .is_err());
        assert!(Tolerances {
            rtol: 1e-8,
            atol: 0.0
        }
        .validate()
        .is_err());
    }
}
