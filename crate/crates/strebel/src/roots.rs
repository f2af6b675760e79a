//! Dense complex polynomials and a simultaneous root finder.
//!
//! Coefficients are stored in ascending degree order. The root finder runs
//! Aberth-Ehrlich iteration from a circle of initial guesses and polishes
//! every root with damped Newton steps on the original polynomial.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Evaluate p(z) by Horner's rule. Coefficients ascending.
pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Evaluate p(z) and p'(z) in one pass.
pub fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Σ |c_k| |z|^k, the natural magnitude scale for relative residuals.
pub fn magnitude_at(coeffs: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    let mut acc = 0.0;
    let mut pw = 1.0;
    for c in coeffs {
        acc += c.norm() * pw;
        pw *= r;
    }
    acc.max(f64::MIN_POSITIVE)
}

/// Multiply a polynomial by the linear factor (z - a) in place.
pub fn mul_linear(coeffs: &mut Vec<Complex64>, a: Complex64) {
    coeffs.push(Complex64::new(0.0, 0.0));
    for k in (1..coeffs.len()).rev() {
        let prev = coeffs[k - 1];
        coeffs[k] = coeffs[k] + prev;
        coeffs[k - 1] = -a * prev;
    }
    // after the loop coeffs[0] holds -a * old_coeffs[0]
}

/// Π (z - a_i) expanded to coefficients.
pub fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &a in roots {
        mul_linear(&mut coeffs, a);
    }
    coeffs
}

fn degree(coeffs: &[Complex64]) -> usize {
    let mut d = coeffs.len();
    while d > 1 && coeffs[d - 1].norm() == 0.0 {
        d -= 1;
    }
    d - 1
}

/// All complex roots of `coeffs` (ascending order, leading coefficient nonzero).
///
/// Returns the polished roots in no particular order. Fails only when the
/// Aberth iteration and Newton polish together leave a residual above
/// `1e-10` relative to the coefficient magnitude at the root.
pub fn all_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let deg = degree(coeffs);
    let coeffs = &coeffs[..deg + 1];
    match deg {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![-coeffs[0] / coeffs[1]]),
        2 => return Ok(quadratic_roots(coeffs[0], coeffs[1], coeffs[2])),
        _ => {}
    }

    let lead = coeffs[deg];
    // Cauchy bound for |root| and the root centroid.
    let bound = 1.0
        + coeffs[..deg]
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0, f64::max);
    let center = -coeffs[deg - 1] / (lead * deg as f64);

    let mut zs: Vec<Complex64> = (0..deg)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.45;
            center + Complex64::from_polar(0.7 * bound, ang)
        })
        .collect();

    let mut converged = false;
    for _ in 0..200 {
        let mut max_step = 0.0f64;
        let mut offsets = vec![Complex64::new(0.0, 0.0); deg];
        for i in 0..deg {
            let (p, dp) = horner_with_derivative(coeffs, zs[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = if dp.norm() > 0.0 {
                p / dp
            } else {
                Complex64::new(1e-8 * bound, 0.0)
            };
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    let d = zs[i] - zs[j];
                    if d.norm() > 0.0 {
                        sum += Complex64::new(1.0, 0.0) / d;
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * sum;
            let w = if denom.norm() > 1e-290 { newton / denom } else { newton };
            offsets[i] = w;
            max_step = max_step.max(w.norm() / (1.0 + zs[i].norm()));
        }
        for i in 0..deg {
            zs[i] -= offsets[i];
        }
        if max_step < 1e-14 {
            converged = true;
            break;
        }
    }
    let _ = converged;

    // Newton polish on the original polynomial, keeping the best iterate.
    for z in zs.iter_mut() {
        let mut best = *z;
        let mut best_res = horner(coeffs, best).norm() / magnitude_at(coeffs, best);
        let mut cur = *z;
        for _ in 0..40 {
            let (p, dp) = horner_with_derivative(coeffs, cur);
            if dp.norm() == 0.0 {
                break;
            }
            cur -= p / dp;
            let res = horner(coeffs, cur).norm() / magnitude_at(coeffs, cur);
            if res < best_res {
                best_res = res;
                best = cur;
            }
            if res == 0.0 {
                break;
            }
        }
        *z = best;
    }

    let worst = zs
        .iter()
        .map(|&z| horner(coeffs, z).norm() / magnitude_at(coeffs, z))
        .fold(0.0, f64::max);
    if worst > 1e-10 {
        return Err(Error::RootSolverFailure { residual: worst });
    }
    Ok(zs)
}

/// Numerically stable quadratic formula.
fn quadratic_roots(c0: Complex64, c1: Complex64, c2: Complex64) -> Vec<Complex64> {
    let disc = (c1 * c1 - 4.0 * c2 * c0).sqrt();
    // pick the sign that avoids cancellation in -b -/+ disc
    let q = if (c1.conj() * disc).re >= 0.0 { -(c1 + disc) } else { -(c1 - disc) };
    let q = q * 0.5;
    if q.norm() == 0.0 {
        // c1 == 0 and c0 == 0
        return vec![Complex64::new(0.0, 0.0), -c1 / c2];
    }
    vec![q / c2, c0 / q]
}

/// Group near-coincident roots into (representative, multiplicity) clusters.
///
/// Roots closer than `tol` are merged to the cluster mean; the result is
/// sorted by (re, im) so that output order is deterministic.
pub fn cluster_roots(roots: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut remaining: Vec<Complex64> = roots.to_vec();
    remaining.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for z in remaining {
        match clusters.iter_mut().find(|(c, _)| (*c - z).norm() <= tol) {
            Some((c, m)) => {
                // running mean keeps the representative centered
                *c = (*c * (*m as f64) + z) / (*m as f64 + 1.0);
                *m += 1;
            }
            None => clusters.push((z, 1)),
        }
    }
    clusters.sort_by(|a, b| (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).unwrap());
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn expands_product_of_linear_factors() {
        // (z-1)(z+2) = z^2 + z - 2
        let p = poly_from_roots(&[c(1.0, 0.0), c(-2.0, 0.0)]);
        assert_relative_eq!(p[0].re, -2.0, max_relative = 1e-15);
        assert_relative_eq!(p[1].re, 1.0, max_relative = 1e-15);
        assert_relative_eq!(p[2].re, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn finds_roots_of_wilkinson_style_product() {
        let truth: Vec<Complex64> = (1..=12).map(|k| c(k as f64, 0.0)).collect();
        let p = poly_from_roots(&truth);
        let mut roots = all_roots(&p).unwrap();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (r, t) in roots.iter().zip(&truth) {
            assert!((r - t).norm() < 1e-6, "{r} vs {t}");
        }
    }

    #[test]
    fn finds_complex_conjugate_pair() {
        // z^2 + 1
        let roots = all_roots(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let mut ims: Vec<f64> = roots.iter().map(|r| r.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(ims[0], -1.0, epsilon = 1e-12);
        assert_relative_eq!(ims[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn clusters_report_multiplicity() {
        let roots = vec![c(1.0, 0.0), c(1.0 + 1e-12, 0.0), c(-3.0, 0.0)];
        let clusters = cluster_roots(&roots, 1e-8);
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0].1, 1); // -3
        assert_eq!(clusters[1].1, 2); // near 1
    }

    #[test]
    fn double_root_residual_stays_small() {
        // (z-2)^2 (z+1)
        let p = poly_from_roots(&[c(2.0, 0.0), c(2.0, 0.0), c(-1.0, 0.0)]);
        let roots = all_roots(&p).unwrap();
        assert_eq!(roots.len(), 3);
        let clusters = cluster_roots(&roots, 1e-5);
        let m: usize = clusters
            .iter()
            .filter(|(z, _)| (z - c(2.0, 0.0)).norm() < 1e-4)
            .map(|(_, m)| m)
            .sum();
        assert_eq!(m, 2);
    }
}
