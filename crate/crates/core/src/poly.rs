//! Dense real polynomials (coefficients in ascending order) and their roots.

use nalgebra::Complex;
use nalgebra::DMatrix;

use crate::error::{ModelError, Result};

/// Imaginary parts below `REAL_TOL * (1 + |z|)` are treated as zero.
pub const REAL_TOL: f64 = 1e-9;
/// Roots at or below this value are not counted as positive.
pub const POSITIVE_TOL: f64 = 1e-12;

/// Real polynomial `c[0] + c[1] x + ... + c[n] x^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub c: Vec<f64>,
}

impl Poly {
    pub fn new(c: Vec<f64>) -> Self {
        Poly { c }
    }

    pub fn constant(v: f64) -> Self {
        Poly { c: vec![v] }
    }

    /// `a + b x`.
    pub fn linear(a: f64, b: f64) -> Self {
        Poly { c: vec![a, b] }
    }

    pub fn x() -> Self {
        Poly::linear(0.0, 1.0)
    }

    /// Degree after dropping exact trailing zeros.
    pub fn degree(&self) -> usize {
        self.c.iter().rposition(|&v| v != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
    }

    pub fn eval_complex(&self, z: Complex<f64>) -> Complex<f64> {
        self.c
            .iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, &v| acc * z + v)
    }

    pub fn derivative(&self) -> Poly {
        if self.c.len() <= 1 {
            return Poly::constant(0.0);
        }
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &v)| i as f64 * v)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.c.iter().map(|v| v * s).collect())
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new(
            (0..n)
                .map(|i| self.c.get(i).unwrap_or(&0.0) + o.c.get(i).unwrap_or(&0.0))
                .collect(),
        )
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(-1.0))
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = vec![0.0; self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Coefficients from the highest degree down.
    pub fn descending(&self) -> Vec<f64> {
        self.c[..=self.degree()].iter().rev().copied().collect()
    }

    /// Complex roots via the eigenvalues of the companion matrix, each
    /// polished by Newton steps.
    pub fn roots(&self) -> Result<Vec<Complex<f64>>> {
        let deg = self.degree();
        let lead = self.c[deg];
        if self.c.iter().any(|v| !v.is_finite()) || (deg == 0 && lead == 0.0) {
            return Err(ModelError::RootFinding {
                coefficients: self.descending(),
            });
        }
        if deg == 0 {
            return Ok(Vec::new());
        }
        let mut comp = DMatrix::<f64>::zeros(deg, deg);
        for i in 1..deg {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..deg {
            comp[(i, deg - 1)] = -self.c[i] / lead;
        }
        let eig = comp.complex_eigenvalues();
        let d = self.derivative();
        let mut out = Vec::with_capacity(deg);
        for z0 in eig.iter() {
            if !z0.re.is_finite() || !z0.im.is_finite() {
                return Err(ModelError::RootFinding {
                    coefficients: self.descending(),
                });
            }
            out.push(self.polish(*z0, &d));
        }
        Ok(out)
    }

    fn polish(&self, z0: Complex<f64>, d: &Poly) -> Complex<f64> {
        let mut z = z0;
        let mut fz = self.eval_complex(z).norm();
        for _ in 0..3 {
            let dz = d.eval_complex(z);
            if dz.norm() == 0.0 {
                break;
            }
            let cand = z - self.eval_complex(z) / dz;
            let fc = self.eval_complex(cand).norm();
            if fc.is_finite() && fc <= fz {
                z = cand;
                fz = fc;
            } else {
                break;
            }
        }
        z
    }

    /// Real roots strictly above [`POSITIVE_TOL`], ascending.
    pub fn positive_real_roots(&self) -> Result<Vec<f64>> {
        let mut r: Vec<f64> = self
            .roots()?
            .into_iter()
            .filter(|z| z.im.abs() <= REAL_TOL * (1.0 + z.norm()))
            .map(|z| z.re)
            .filter(|&x| x > POSITIVE_TOL)
            .collect();
        r.sort_by(f64::total_cmp);
        Ok(r)
    }
}

/// Divides out the largest-magnitude coefficient so polynomials with the
/// same roots can be compared. The sign of the leading coefficient is kept.
pub fn normalized(desc: &[f64]) -> Vec<f64> {
    let m = desc.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return desc.to_vec();
    }
    desc.iter().map(|v| v / m).collect()
}

/// Largest componentwise difference between two coefficient lists after
/// scaling the second onto the first by least squares.
pub fn proportional_mismatch(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let bb: f64 = b.iter().map(|y| y * y).sum();
    if bb == 0.0 {
        return f64::INFINITY;
    }
    let s = ab / bb;
    let amax = a.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter()
        .zip(b)
        .map(|(x, y)| ((x - s * y) / amax).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quadratic_roots() {
        let p = Poly::new(vec![2.0, -3.0, 1.0]);
        assert_eq!(p.degree(), 2);
        let r = p.positive_real_roots().unwrap();
        assert!((r[0] - 1.0).abs() < 1e-14 && (r[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn complex_pair_filtered() {
        let p = Poly::new(vec![1.0, 0.0, 1.0]);
        assert!(p.positive_real_roots().unwrap().is_empty());
        assert_eq!(p.roots().unwrap().len(), 2);
    }

    #[test]
    fn linear_and_constant() {
        let p = Poly::linear(-3.0, 2.0);
        assert_eq!(p.positive_real_roots().unwrap(), vec![1.5]);
        assert!(Poly::constant(0.0).roots().is_err());
        assert!(Poly::constant(2.0).roots().unwrap().is_empty());
    }

    #[test]
    fn arithmetic() {
        let a = Poly::linear(1.0, 1.0);
        let b = a.mul(&a);
        assert_eq!(b.c, vec![1.0, 2.0, 1.0]);
        assert_eq!(b.sub(&a).c, vec![0.0, 1.0, 1.0]);
        assert_eq!(b.derivative().c, vec![2.0, 2.0]);
        assert_eq!(b.descending(), vec![1.0, 2.0, 1.0]);
    }

    #[test]
    fn mismatch_is_scale_free() {
        assert!(proportional_mismatch(&[1.0, -2.0, 3.0], &[-2.0, 4.0, -6.0]) < 1e-15);
        assert!(proportional_mismatch(&[1.0, -2.0, 3.0], &[1.0, 2.0, 3.0]) > 0.1);
    }

    proptest! {
        #[test]
        fn recovers_planted_roots(r in proptest::collection::vec(0.01f64..10.0, 1..5), lead in 0.1f64..10.0) {
            let mut p = Poly::constant(lead);
            for &x in &r {
                p = p.mul(&Poly::linear(-x, 1.0));
            }
            let mut want = r.clone();
            want.sort_by(f64::total_cmp);
            let got = p.roots().unwrap();
            for &x in &want {
                let best = got.iter().map(|z| (z - Complex::new(x, 0.0)).norm()).fold(f64::INFINITY, f64::min);
                // Clustered roots lose accuracy like eps^(1/multiplicity).
                prop_assert!(best < 1e-3 * (1.0 + x), "{x} {got:?}");
            }
        }
    }
}
