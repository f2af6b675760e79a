//! The quadratic differential -(Σ α_i/(z-a_i))² dz² and its critical structure.
//!
//! Everything downstream works with two scalar fields derived from the pole
//! data: the rational field F(z) = Σ α_i/(z-a_i) and the log-potential
//! u(z) = Σ α_i ln|z-a_i|. Trajectories are level curves of u; the critical
//! points are the zeros of the numerator polynomial p(z) = F(z)·Π(z-a_i).

use crate::error::{Error, Result};
use crate::roots;
use num_complex::Complex64;

/// A quadratic differential -(Σ α_i/(z-a_i))² dz² with double poles `a_i`,
/// real weights `α_i` and positive total weight `α`.
///
/// Immutable after construction; cheap to clone and safe to share.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadDifferential {
    poles: Vec<Complex64>,
    weights: Vec<f64>,
    alpha: f64,
}

/// Zeros of the numerator polynomial together with the potential values
/// w_k = Π|z_k - a_i|^{α_i} attained there. Zeros are repeated according to
/// multiplicity, ordered by (re, im).
#[derive(Debug, Clone)]
pub struct CriticalSet {
    pub zeros: Vec<Complex64>,
    pub values: Vec<f64>,
    /// Multiplicity of the numerator zero backing each entry.
    pub multiplicities: Vec<usize>,
}

impl CriticalSet {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Deduplicated (zero, multiplicity) pairs, in the stored order.
    pub fn distinct(&self) -> Vec<(Complex64, usize)> {
        let mut out: Vec<(Complex64, usize)> = Vec::new();
        let mut k = 0;
        while k < self.zeros.len() {
            let m = self.multiplicities[k];
            out.push((self.zeros[k], m));
            k += m;
        }
        out
    }
}

impl QuadDifferential {
    /// Validate pole/weight data and cache the total weight.
    pub fn new(poles: Vec<Complex64>, weights: Vec<f64>) -> Result<Self> {
        if poles.len() != weights.len() {
            return Err(Error::LengthMismatch { poles: poles.len(), weights: weights.len() });
        }
        if poles.is_empty() {
            return Err(Error::Empty);
        }
        let scale = poles
            .iter()
            .map(|p| p.norm())
            .fold(1.0f64, f64::max);
        for i in 0..poles.len() {
            for j in (i + 1)..poles.len() {
                if (poles[i] - poles[j]).norm() <= 1e-12 * scale {
                    return Err(Error::DuplicatePoles(i, j));
                }
            }
        }
        if let Some(i) = weights.iter().position(|w| *w == 0.0) {
            return Err(Error::ZeroWeight(i));
        }
        let alpha: f64 = weights.iter().sum();
        if alpha <= 0.0 {
            return Err(Error::NonpositiveTotalWeight(alpha));
        }
        Ok(QuadDifferential { poles, weights, alpha })
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total weight α = Σ α_i (always positive).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest pairwise pole distance, or 1 for a single pole. Used as the
    /// length scale for tolerances so they survive rescaling of the plane.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.poles.len() {
            for j in (i + 1)..self.poles.len() {
                d = d.max((self.poles[i] - self.poles[j]).norm());
            }
        }
        if d == 0.0 { 1.0 } else { d }
    }

    /// Arithmetic mean of the poles.
    pub fn centroid(&self) -> Complex64 {
        self.poles.iter().sum::<Complex64>() / self.poles.len() as f64
    }

    fn check_not_pole(&self, z: Complex64) -> Result<()> {
        for (i, &a) in self.poles.iter().enumerate() {
            if (z - a).norm() == 0.0 {
                return Err(Error::EvaluationAtPole { index: i, z });
            }
        }
        Ok(())
    }

    /// F(z) = Σ α_i/(z-a_i), the rational field whose level flow traces
    /// trajectories: ∇u = conj(F).
    pub fn field_at(&self, z: Complex64) -> Result<Complex64> {
        self.check_not_pole(z)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (&a, &w) in self.poles.iter().zip(&self.weights) {
            acc += w / (z - a);
        }
        Ok(acc)
    }

    /// F'(z) = -Σ α_i/(z-a_i)².
    pub fn field_derivative_at(&self, z: Complex64) -> Result<Complex64> {
        self.check_not_pole(z)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (&a, &w) in self.poles.iter().zip(&self.weights) {
            let d = z - a;
            acc -= w / (d * d);
        }
        Ok(acc)
    }

    /// u(z) = Σ α_i ln|z-a_i| = ln Π|z-a_i|^{α_i}. The lemniscate at level λ
    /// is the set u = ln λ.
    pub fn log_modulus(&self, z: Complex64) -> Result<f64> {
        self.check_not_pole(z)?;
        let mut acc = 0.0;
        for (&a, &w) in self.poles.iter().zip(&self.weights) {
            acc += w * (z - a).norm().ln();
        }
        Ok(acc)
    }

    /// Continuous argument contribution Σ α_i arg(z-a_i) with each factor's
    /// argument taken principal. Branch-coherent evaluation lives in
    /// `confmap::BranchTrackedMap`; this is the raw per-point value.
    pub fn principal_argument(&self, z: Complex64) -> Result<f64> {
        self.check_not_pole(z)?;
        let mut acc = 0.0;
        for (&a, &w) in self.poles.iter().zip(&self.weights) {
            acc += w * (z - a).arg();
        }
        Ok(acc)
    }

    /// Coefficients (ascending) of p(z) = Σ_i α_i Π_{j≠i} (z-a_j).
    ///
    /// Expanded term by term without divisions, so the result is exact up to
    /// floating-point rounding of the products. Degree is n-1 with leading
    /// coefficient α.
    pub fn numerator_polynomial(&self) -> Vec<Complex64> {
        let n = self.poles.len();
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let others: Vec<Complex64> = self
                .poles
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, &a)| a)
                .collect();
            let term = roots::poly_from_roots(&others);
            for (k, c) in term.into_iter().enumerate() {
                acc[k] += self.weights[i] * c;
            }
        }
        acc
    }

    /// Zeros of the numerator polynomial (critical points of the
    /// differential) with the potential values attained there.
    ///
    /// Roots are Newton-polished on p and merged into multiplicity clusters
    /// when closer than 1e-8 times the configuration diameter.
    pub fn critical_set(&self) -> Result<CriticalSet> {
        if self.poles.len() < 2 {
            return Ok(CriticalSet { zeros: Vec::new(), values: Vec::new(), multiplicities: Vec::new() });
        }
        let p = self.numerator_polynomial();
        let raw = roots::all_roots(&p)?;
        let clusters = roots::cluster_roots(&raw, 1e-8 * self.diameter());
        let mut zeros = Vec::new();
        let mut values = Vec::new();
        let mut multiplicities = Vec::new();
        for (z, m) in clusters {
            let w = self.log_modulus(z)?.exp();
            for _ in 0..m {
                zeros.push(z);
                values.push(w);
                multiplicities.push(m);
            }
        }
        Ok(CriticalSet { zeros, values, multiplicities })
    }

    /// Connectivity test for the critical graph: connected iff all critical
    /// values coincide up to `rel_tol` (relative to the largest). Returns the
    /// witness (max, min) index pair when disconnected. Vacuously connected
    /// when there are no critical points.
    pub fn is_critical_graph_connected(&self, rel_tol: f64) -> Result<(bool, Option<(usize, usize)>)> {
        let cs = self.critical_set()?;
        if cs.is_empty() {
            return Ok((true, None));
        }
        let (mut hi, mut lo) = (0usize, 0usize);
        for (k, &v) in cs.values.iter().enumerate() {
            if v > cs.values[hi] {
                hi = k;
            }
            if v < cs.values[lo] {
                lo = k;
            }
        }
        if cs.values[hi] - cs.values[lo] <= rel_tol * cs.values[hi] {
            Ok((true, None))
        } else {
            Ok((false, Some((hi, lo))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Three-pole mixed-sign configuration used throughout the test suite:
    /// poles (1, -1, 0), weights (1, -1, √2).
    pub fn mixed_sign_config() -> QuadDifferential {
        QuadDifferential::new(
            vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)],
            vec![1.0, -1.0, 2f64.sqrt()],
        )
        .unwrap()
    }

    #[test]
    fn construction_computes_total_weight() {
        let qd = mixed_sign_config();
        assert_relative_eq!(qd.alpha(), 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn single_pole_is_valid() {
        let qd = QuadDifferential::new(vec![c(0.0, 0.0)], vec![1.0]).unwrap();
        assert_eq!(qd.alpha(), 1.0);
    }

    #[test]
    fn duplicate_poles_rejected() {
        let err = QuadDifferential::new(vec![c(1.0, 0.0), c(1.0, 0.0)], vec![1.0, 2.0]).unwrap_err();
        assert!(matches!(err, Error::DuplicatePoles(0, 1)));
    }

    #[test]
    fn zero_weight_rejected() {
        let err = QuadDifferential::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::ZeroWeight(1)));
    }

    #[test]
    fn nonpositive_total_weight_rejected() {
        let err = QuadDifferential::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![1.0, -1.0]).unwrap_err();
        assert!(matches!(err, Error::NonpositiveTotalWeight(_)));
    }

    #[test]
    fn field_single_pole() {
        let qd = QuadDifferential::new(vec![c(0.0, 0.0)], vec![1.0]).unwrap();
        assert_relative_eq!(qd.field_at(c(2.0, 0.0)).unwrap().re, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn field_symmetric_pair_vanishes_at_origin() {
        let qd = QuadDifferential::new(vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![1.0, 1.0]).unwrap();
        assert!(qd.field_at(c(0.0, 0.0)).unwrap().norm() < 1e-15);
    }

    #[test]
    fn field_reference_point() {
        // F(2i) = -0.4 - (√2/2) i, by exact rational arithmetic.
        let qd = mixed_sign_config();
        let f = qd.field_at(c(0.0, 2.0)).unwrap();
        assert_relative_eq!(f.re, -0.4, max_relative = 1e-14);
        assert_relative_eq!(f.im, -2f64.sqrt() / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn field_errors_at_pole() {
        let qd = mixed_sign_config();
        assert!(matches!(
            qd.field_at(c(1.0, 0.0)),
            Err(Error::EvaluationAtPole { index: 0, .. })
        ));
    }

    #[test]
    fn log_modulus_single_pole() {
        let qd = QuadDifferential::new(vec![c(0.0, 0.0)], vec![1.0]).unwrap();
        assert_relative_eq!(
            qd.log_modulus(c(std::f64::consts::E, 0.0)).unwrap(),
            1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn log_modulus_pair_at_origin() {
        let qd = QuadDifferential::new(vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![1.0, 1.0]).unwrap();
        assert!(qd.log_modulus(c(0.0, 0.0)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn log_modulus_reference_point() {
        // u(3) = ln 2 - ln 4 + √2 ln 3
        let qd = mixed_sign_config();
        let want = 2f64.ln() - 4f64.ln() + 2f64.sqrt() * 3f64.ln();
        assert_relative_eq!(qd.log_modulus(c(3.0, 0.0)).unwrap(), want, max_relative = 1e-14);
    }

    #[test]
    fn numerator_single_pole_is_constant() {
        let qd = QuadDifferential::new(vec![c(0.0, 0.0)], vec![1.0]).unwrap();
        let p = qd.numerator_polynomial();
        assert_eq!(p.len(), 1);
        assert_relative_eq!(p[0].re, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn numerator_symmetric_pair() {
        // (z+1)+(z-1) = 2z
        let qd = QuadDifferential::new(vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![1.0, 1.0]).unwrap();
        let p = qd.numerator_polynomial();
        assert!(p[0].norm() < 1e-15);
        assert_relative_eq!(p[1].re, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn numerator_reference_config() {
        // √2 z² + 2 z - √2
        let qd = mixed_sign_config();
        let p = qd.numerator_polynomial();
        let s2 = 2f64.sqrt();
        assert_relative_eq!(p[0].re, -s2, max_relative = 1e-14);
        assert_relative_eq!(p[1].re, 2.0, max_relative = 1e-14);
        assert_relative_eq!(p[2].re, s2, max_relative = 1e-14);
        assert!(p[0].im.abs() < 1e-15 && p[1].im.abs() < 1e-15 && p[2].im.abs() < 1e-15);
    }

    #[test]
    fn critical_set_reference_config() {
        // zeros (-1±√3)/√2; potential values frozen from a 30-digit oracle.
        let qd = mixed_sign_config();
        let cs = qd.critical_set().unwrap();
        assert_eq!(cs.len(), 2);
        let z_minus = -1.93185165257813657349948639946;
        let z_plus = 0.517638090205041524697797675248;
        let w_minus = 7.98404914346076350418235558128;
        let w_plus = 0.125249730059469587044838243096;
        assert_relative_eq!(cs.zeros[0].re, z_minus, max_relative = 1e-12);
        assert_relative_eq!(cs.zeros[1].re, z_plus, max_relative = 1e-12);
        assert!(cs.zeros[0].im.abs() < 1e-12 && cs.zeros[1].im.abs() < 1e-12);
        assert_relative_eq!(cs.values[0], w_minus, max_relative = 1e-11);
        assert_relative_eq!(cs.values[1], w_plus, max_relative = 1e-11);
    }

    #[test]
    fn critical_set_symmetric_pair() {
        let qd = QuadDifferential::new(vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![1.0, 1.0]).unwrap();
        let cs = qd.critical_set().unwrap();
        assert_eq!(cs.len(), 1);
        assert!(cs.zeros[0].norm() < 1e-12);
        assert_relative_eq!(cs.values[0], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn critical_set_single_pole_empty() {
        let qd = QuadDifferential::new(vec![c(0.0, 0.0)], vec![1.0]).unwrap();
        assert!(qd.critical_set().unwrap().is_empty());
    }

    #[test]
    fn connectivity_reference_config_false() {
        let qd = mixed_sign_config();
        let (connected, witness) = qd.is_critical_graph_connected(1e-9).unwrap();
        assert!(!connected);
        let (hi, lo) = witness.unwrap();
        assert!(qd.critical_set().unwrap().values[hi] > qd.critical_set().unwrap().values[lo]);
    }

    #[test]
    fn connectivity_symmetric_three_poles_true() {
        let qd = QuadDifferential::new(
            vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            vec![1.0, 1.0, 1.0],
        )
        .unwrap();
        let (connected, _) = qd.is_critical_graph_connected(1e-9).unwrap();
        assert!(connected);
        // zeros at ±1/√3
        let cs = qd.critical_set().unwrap();
        assert_eq!(cs.len(), 2);
        assert_relative_eq!(cs.zeros[1].re, 1.0 / 3f64.sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn connectivity_single_pole_vacuous() {
        let qd = QuadDifferential::new(vec![c(2.0, 1.0)], vec![3.0]).unwrap();
        assert_eq!(qd.is_critical_graph_connected(1e-9).unwrap(), (true, None));
    }

    #[test]
    fn residual_at_critical_points_is_small() {
        let qd = mixed_sign_config();
        let cs = qd.critical_set().unwrap();
        for &z in &cs.zeros {
            assert!(qd.field_at(z).unwrap().norm() < 1e-9);
        }
    }

    #[test]
    fn connectivity_invariant_under_affine_pole_map() {
        let qd = mixed_sign_config();
        let moved = QuadDifferential::new(
            qd.poles().iter().map(|a| 2.0 * a + c(1.0, 0.0)).collect(),
            qd.weights().to_vec(),
        )
        .unwrap();
        assert_eq!(
            qd.is_critical_graph_connected(1e-9).unwrap().0,
            moved.is_critical_graph_connected(1e-9).unwrap().0
        );
    }
}
