//! Normalized local sensitivity indices of `R0`, Latin hypercube sampling
//! and partial rank correlation coefficients.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{ModelError, Result};
use crate::params::{ModelParams, ParamId};
use crate::thresholds::basic_reproduction_number;

/// Relative step of the central differences.
pub const LOCAL_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalIndex {
    pub param: ParamId,
    /// Reported index; exact for parameters that enter `R0` as a power law.
    pub index: f64,
    /// Finite-difference estimate.
    pub numeric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalIndexTable {
    pub r0: f64,
    /// In the canonical parameter order.
    pub rows: Vec<LocalIndex>,
}

impl LocalIndexTable {
    pub fn get(&self, id: ParamId) -> Option<f64> {
        self.rows.iter().find(|r| r.param == id).map(|r| r.index)
    }

    /// Rows by decreasing magnitude of the index.
    pub fn ranked(&self) -> Vec<LocalIndex> {
        let mut r = self.rows.clone();
        r.sort_by(|a, b| b.index.abs().total_cmp(&a.index.abs()));
        r
    }
}

/// Exponent of `R0` in parameters that enter it as a pure power.
fn exact_index(id: ParamId) -> Option<f64> {
    match id {
        ParamId::A => Some(1.0),
        ParamId::BetaHv | ParamId::BetaVh => Some(0.5),
        _ => None,
    }
}

fn r0_at(p: &ModelParams, id: ParamId, value: f64) -> Result<f64> {
    basic_reproduction_number(&p.with(id, value))
}

pub fn local_indices(p: &ModelParams) -> Result<LocalIndexTable> {
    p.validate()?;
    let r0 = basic_reproduction_number(p)?;
    if !(r0 > 0.0) {
        return Err(ModelError::UndefinedIndex);
    }
    let mut rows = Vec::with_capacity(ParamId::ALL.len());
    for id in ParamId::ALL {
        let x = p.get(id);
        let numeric = if x == 0.0 {
            0.0
        } else {
            let h = LOCAL_STEP * x.abs();
            let up = id.check(x + h).is_ok();
            let down = id.check(x - h).is_ok();
            let d = match (up, down) {
                (true, true) => (r0_at(p, id, x + h)? - r0_at(p, id, x - h)?) / (2.0 * h),
                (true, false) => (r0_at(p, id, x + h)? - r0) / h,
                (false, true) => (r0 - r0_at(p, id, x - h)?) / h,
                (false, false) => 0.0,
            };
            x / r0 * d
        };
        rows.push(LocalIndex {
            param: id,
            index: exact_index(id).unwrap_or(numeric),
            numeric,
        });
    }
    Ok(LocalIndexTable { r0, rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRange {
    pub param: ParamId,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LhsConfig {
    pub n: usize,
    pub seed: u64,
    pub ranges: Vec<ParamRange>,
}

/// Default sampling ranges: `[0.5, 1.5]` times the value in `p`, clipped to
/// the admissible interval; the individual protection rate instead spans
/// `[0, 0.8]`. Parameters that are zero in `p` are held fixed.
pub fn default_ranges(p: &ModelParams) -> Vec<ParamRange> {
    ParamId::ALL
        .iter()
        .filter_map(|&id| {
            if id == ParamId::Alpha1 {
                return Some(ParamRange {
                    param: id,
                    lo: 0.0,
                    hi: 0.8,
                });
            }
            let x = p.get(id);
            if x <= 0.0 {
                return None;
            }
            let (blo, bhi, _, hi_open) = id.bounds();
            let lo = (0.5 * x).max(blo);
            let mut hi = (1.5 * x).min(bhi);
            if hi_open && hi >= bhi {
                hi = bhi * (1.0 - 1e-9);
            }
            (lo < hi).then_some(ParamRange { param: id, lo, hi })
        })
        .collect()
}

impl LhsConfig {
    pub fn with_defaults(p: &ModelParams, n: usize, seed: u64) -> Self {
        LhsConfig {
            n,
            seed,
            ranges: default_ranges(p),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(ModelError::InvalidConfig(
                "LHS needs at least 2 samples".into(),
            ));
        }
        for (i, r) in self.ranges.iter().enumerate() {
            if !(r.lo < r.hi) {
                return Err(ModelError::InvalidConfig(format!(
                    "range for {} needs lo < hi, got [{}, {}]",
                    r.param.key(),
                    r.lo,
                    r.hi
                )));
            }
            r.param.check(r.lo)?;
            // The upper end is never drawn exactly, so an open bound is fine.
            let (_, bhi, _, hi_open) = r.param.bounds();
            if !(hi_open && r.hi == bhi) {
                r.param.check(r.hi)?;
            }
            if self.ranges[..i].iter().any(|o| o.param == r.param) {
                return Err(ModelError::InvalidConfig(format!(
                    "duplicate range for {}",
                    r.param.key()
                )));
            }
        }
        Ok(())
    }

    /// Parses `key lo hi` lines; `#` starts a comment.
    pub fn parse_ranges(text: &str) -> Result<Vec<ParamRange>> {
        let mut out = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let err = |msg: String| ModelError::InvalidConfig(format!("line {}: {msg}", no + 1));
            if parts.len() != 3 {
                return Err(err(format!("expected `parameter lo hi`, got `{line}`")));
            }
            let param = ParamId::from_key(parts[0])
                .ok_or_else(|| err(format!("unknown parameter `{}`", parts[0])))?;
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| err(format!("`{s}` is not a number")))
            };
            out.push(ParamRange {
                param,
                lo: num(parts[1])?,
                hi: num(parts[2])?,
            });
        }
        Ok(out)
    }
}

/// Stratified sample, one row per draw and one column per range. Each
/// column puts exactly one point in each of `n` equal strata, with strata
/// permuted independently per column.
pub fn lhs_sample(cfg: &LhsConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let n = cfg.n;
    let m = cfg.ranges.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = vec![vec![0.0; m]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for (j, r) in cfg.ranges.iter().enumerate() {
        perm.shuffle(&mut rng);
        let width = r.hi - r.lo;
        for (i, row) in rows.iter_mut().enumerate() {
            let u: f64 = rng.random();
            row[j] = r.lo + width * (perm[i] as f64 + u) / n as f64;
        }
    }
    Ok(rows)
}

/// `R0` for every sampled row, in row order.
pub fn evaluate_r0(p: &ModelParams, cfg: &LhsConfig, samples: &[Vec<f64>]) -> Result<Vec<f64>> {
    samples
        .par_iter()
        .map(|row| {
            let mut q = *p;
            for (r, &x) in cfg.ranges.iter().zip(row) {
                q.set(r.param, x);
            }
            basic_reproduction_number(&q)
        })
        .collect()
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Residual norms below this fraction of the centered data norm count as
/// zero in [`prcc`].
pub const RESIDUAL_TOL: f64 = 1e-9;

fn centered_norm(x: &DVector<f64>) -> f64 {
    let m = x.mean();
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>().sqrt()
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    let scale = (saa * sbb).sqrt();
    (scale > 0.0).then(|| (sab / scale).clamp(-1.0, 1.0))
}

/// Partial rank correlation of each column of `samples` with `outputs`,
/// controlling for all other columns. Constant columns give `None`.
///
/// Rows are put in a canonical order (by their rank vectors) before any
/// summation, so permuting the rows jointly leaves every coefficient
/// bit-identical.
pub fn prcc(samples: &[Vec<f64>], outputs: &[f64]) -> Result<Vec<Option<f64>>> {
    let n = samples.len();
    if n != outputs.len() {
        return Err(ModelError::InvalidConfig(format!(
            "{n} sample rows but {} outputs",
            outputs.len()
        )));
    }
    if n < 3 {
        return Err(ModelError::InvalidConfig(
            "PRCC needs at least 3 samples".into(),
        ));
    }
    let m = samples[0].len();
    let mut cols: Vec<Vec<f64>> = (0..m)
        .map(|j| average_ranks(&samples.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect();
    let mut ry = average_ranks(outputs);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        ry[a].total_cmp(&ry[b]).then_with(|| {
            cols.iter()
                .map(|c| c[a].total_cmp(&c[b]))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    ry = order.iter().map(|&i| ry[i]).collect();
    for c in cols.iter_mut() {
        *c = order.iter().map(|&i| c[i]).collect();
    }

    let live: Vec<usize> = (0..m)
        .filter(|&j| cols[j].iter().any(|&v| v != cols[j][0]))
        .collect();
    let k = live.len();
    // Design matrix [1, ranks of live columns].
    let z = DMatrix::from_fn(
        n,
        k + 1,
        |i, c| if c == 0 { 1.0 } else { cols[live[c - 1]][i] },
    );
    let g = z.transpose() * &z;
    let zy = z.transpose() * DVector::from_column_slice(&ry);

    let y_spread = centered_norm(&DVector::from_column_slice(&ry));
    let mut out = vec![None; m];
    for (pos, &j) in live.iter().enumerate() {
        let keep: Vec<usize> = (0..=k).filter(|&c| c != pos + 1).collect();
        let gs = g.select_rows(&keep).select_columns(&keep);
        let zs = z.select_columns(&keep);
        let chol = match gs.clone().cholesky() {
            Some(c) => c,
            None => continue,
        };
        let xj = z.column(pos + 1).into_owned();
        let bx = chol.solve(&(zs.transpose() * &xj));
        let by = chol.solve(&zy.select_rows(&keep));
        let rx = &xj - &zs * bx;
        let ryr = DVector::from_column_slice(&ry) - &zs * by;
        out[j] = if rx.norm() <= RESIDUAL_TOL * centered_norm(&xj) {
            None
        } else if ryr.norm() <= RESIDUAL_TOL * y_spread {
            // The other inputs already explain the output completely.
            Some(0.0)
        } else {
            pearson(rx.as_slice(), ryr.as_slice())
        };
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalReport {
    pub params: Vec<ParamId>,
    pub r0: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub p_gt_1: f64,
    /// One entry per sampled parameter, in the order of `params`.
    pub prcc: Vec<Option<f64>>,
}

impl GlobalReport {
    pub fn get(&self, id: ParamId) -> Option<f64> {
        self.params
            .iter()
            .position(|&p| p == id)
            .and_then(|i| self.prcc[i])
    }

    /// Parameters by decreasing `|PRCC|`; undefined entries last.
    pub fn ranked(&self) -> Vec<(ParamId, Option<f64>)> {
        let mut r: Vec<_> = self
            .params
            .iter()
            .copied()
            .zip(self.prcc.iter().copied())
            .collect();
        r.sort_by(|a, b| {
            let ka = a.1.map(f64::abs).unwrap_or(-1.0);
            let kb = b.1.map(f64::abs).unwrap_or(-1.0);
            kb.total_cmp(&ka)
        });
        r
    }
}

/// Mean, sample standard deviation and fraction above one.
pub fn summary_stats(r0: &[f64]) -> (f64, f64, f64) {
    let n = r0.len() as f64;
    let mean = r0.iter().sum::<f64>() / n;
    let var = if r0.len() > 1 {
        r0.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let above = r0.iter().filter(|&&x| x > 1.0).count() as f64 / n;
    (mean, var.sqrt(), above)
}

/// Samples `R0` over the configured ranges and computes its PRCCs.
/// Draws with a non-persistent vector population count as `R0 = 0`.
pub fn global_analysis(p: &ModelParams, cfg: &LhsConfig) -> Result<GlobalReport> {
    p.validate()?;
    let samples = lhs_sample(cfg)?;
    let r0 = evaluate_r0(p, cfg, &samples)?;
    let prcc = prcc(&samples, &r0)?;
    let (mean, std, p_gt_1) = summary_stats(&r0);
    Ok(GlobalReport {
        params: cfg.ranges.iter().map(|r| r.param).collect(),
        r0,
        mean,
        std,
        p_gt_1,
        prcc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_indices() {
        let t = local_indices(&ModelParams::baseline()).unwrap();
        assert_eq!(t.get(ParamId::A), Some(1.0));
        assert_eq!(t.get(ParamId::BetaHv), Some(0.5));
        for r in &t.rows {
            if let Some(e) = exact_index(r.param) {
                assert!((r.numeric - e).abs() < 1e-8, "{:?}", r.param);
            }
        }
        // R0 is proportional to (1 - alpha_1).
        let a1 = 0.2;
        assert!((t.get(ParamId::Alpha1).unwrap() + a1 / (1.0 - a1)).abs() < 1e-8);
        assert_eq!(t.ranked()[0].param, ParamId::A);
    }

    #[test]
    fn undefined_without_vectors() {
        let p = ModelParams {
            mu_b: 0.01,
            ..ModelParams::baseline()
        };
        assert_eq!(local_indices(&p), Err(ModelError::UndefinedIndex));
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(
            average_ranks(&[3.0, 1.0, 3.0, 2.0]),
            vec![3.5, 1.0, 3.5, 2.0]
        );
    }

    #[test]
    fn lhs_one_point_per_stratum() {
        let cfg = LhsConfig::with_defaults(&ModelParams::baseline(), 200, 7);
        let s = lhs_sample(&cfg).unwrap();
        for (j, r) in cfg.ranges.iter().enumerate() {
            let mut seen = vec![false; cfg.n];
            for row in &s {
                let k = ((row[j] - r.lo) / (r.hi - r.lo) * cfg.n as f64).floor() as usize;
                assert!(!seen[k], "{:?}", r.param);
                seen[k] = true;
            }
        }
        assert_eq!(lhs_sample(&cfg).unwrap(), s);
    }

    #[test]
    fn default_ranges_are_admissible() {
        let p = ModelParams::baseline();
        let rs = default_ranges(&p);
        let cfg = LhsConfig {
            n: 10,
            seed: 1,
            ranges: rs.clone(),
        };
        cfg.validate().unwrap();
        let beta = rs.iter().find(|r| r.param == ParamId::BetaHv).unwrap();
        assert_eq!((beta.lo, beta.hi), (0.375, 1.0));
        let a1 = rs.iter().find(|r| r.param == ParamId::Alpha1).unwrap();
        assert_eq!((a1.lo, a1.hi), (0.0, 0.8));
    }

    #[test]
    fn prcc_detects_monotone_dependence() {
        let cfg = LhsConfig {
            n: 500,
            seed: 3,
            ranges: vec![
                ParamRange {
                    param: ParamId::A,
                    lo: 0.0,
                    hi: 1.0,
                },
                ParamRange {
                    param: ParamId::S,
                    lo: 0.0,
                    hi: 1.0,
                },
                ParamRange {
                    param: ParamId::L,
                    lo: 0.0,
                    hi: 1.0,
                },
            ],
        };
        let s = lhs_sample(&cfg).unwrap();
        let y: Vec<f64> = s.iter().map(|r| r[1].exp()).collect();
        let c = prcc(&s, &y).unwrap();
        assert!((c[1].unwrap() - 1.0).abs() < 1e-6);
        assert!(c[0].unwrap().abs() < 1e-6 && c[2].unwrap().abs() < 1e-6);
    }

    #[test]
    fn constant_column_is_flagged() {
        let s: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![i as f64, 1.0, ((i * 7) % 20) as f64])
            .collect();
        let y: Vec<f64> = (0..20).map(|i| (i + (i * 13) % 5) as f64).collect();
        let c = prcc(&s, &y).unwrap();
        assert!(c[1].is_none());
        assert!(c[0].is_some() && c[2].is_some());
    }

    #[test]
    fn range_file_parsing() {
        let r = LhsConfig::parse_ranges("# c\nalpha_1 0 0.8\nmu_v 0.01 0.05 # x\n").unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[1].param, ParamId::MuV);
        assert!(LhsConfig::parse_ranges("nope 0 1").is_err());
        assert!(LhsConfig::parse_ranges("mu_v 0 x").is_err());
    }
}
