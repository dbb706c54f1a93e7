//! Finite-difference derivatives of the deficit and of `phi` in `(x; r)`
//! coordinates, checks of the closed-form derivatives at the regular polygon,
//! and the coercivity constant `sigma` of the deficit Hessian on the tangent
//! sphere.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::manifold::{retract, TangentBasis};
use crate::polygon::{deficit_at, phi_at, side_variance_at, ManifoldPoint};
use crate::spectral::BlockHessian;

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Richardson disagreement (steps h and 2h) above which a step is rejected.
pub const RICHARDSON_TOL: f64 = 1e-3;

const MIN_STEP: f64 = 1e-7;
const MAX_STEP: f64 = 1e-3;

/// Scalar fields of the laboratory, evaluated on concatenated `(x; r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    Deficit,
    Phi,
    SideVariance,
}

impl Functional {
    pub fn eval(self, z: &[f64]) -> f64 {
        match self {
            Functional::Deficit => deficit_at(z),
            Functional::Phi => phi_at(z),
            Functional::SideVariance => side_variance_at(z),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Functional::Deficit => "deficit",
            Functional::Phi => "phi",
            Functional::SideVariance => "side_variance",
        }
    }
}

fn check_step(h: f64) -> Result<()> {
    if (MIN_STEP..=MAX_STEP).contains(&h) {
        Ok(())
    } else {
        Err(Error::StepOutOfRange(h))
    }
}

fn central_gradient<F: Fn(&[f64]) -> f64>(f: &F, z: &[f64], h: f64) -> Vec<f64> {
    let mut zz = z.to_vec();
    (0..z.len())
        .map(|i| {
            zz[i] = z[i] + h;
            let fp = f(&zz);
            zz[i] = z[i] - h;
            let fm = f(&zz);
            zz[i] = z[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

fn central_hessian<F: Fn(&[f64]) -> f64>(f: &F, z: &[f64], h: f64) -> DMatrix<f64> {
    let d = z.len();
    let mut zz = z.to_vec();
    let f0 = f(z);
    let mut hess = DMatrix::zeros(d, d);
    for i in 0..d {
        zz[i] = z[i] + h;
        let fp = f(&zz);
        zz[i] = z[i] - h;
        let fm = f(&zz);
        zz[i] = z[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in (i + 1)..d {
            let mut eval = |si: f64, sj: f64| {
                zz[i] = z[i] + si * h;
                zz[j] = z[j] + sj * h;
                let v = f(&zz);
                zz[i] = z[i];
                zz[j] = z[j];
                v
            };
            let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

/// Central-difference gradient, cross-checked against the step `2h`.
pub fn grad_fd<F: Fn(&[f64]) -> f64>(f: F, z: &[f64], h: f64) -> Result<Vec<f64>> {
    check_step(h)?;
    let g = central_gradient(&f, z, h);
    let g2 = central_gradient(&f, z, 2.0 * h);
    let scale = g.iter().fold(1.0, |m: f64, v| m.max(v.abs()));
    let disagreement = g
        .iter()
        .zip(&g2)
        .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()))
        / scale;
    if disagreement > RICHARDSON_TOL {
        return Err(Error::StepTooSmall {
            step: h,
            disagreement,
        });
    }
    Ok(g)
}

/// Central-difference Hessian (symmetric by construction), cross-checked
/// against the step `2h`.
pub fn hessian_fd<F: Fn(&[f64]) -> f64>(f: F, z: &[f64], h: f64) -> Result<DMatrix<f64>> {
    check_step(h)?;
    let hess = central_hessian(&f, z, h);
    let hess2 = central_hessian(&f, z, 2.0 * h);
    let scale = linalg::max_abs(&hess).max(1.0);
    let disagreement = linalg::max_abs(&(&hess - &hess2)) / scale;
    if disagreement > RICHARDSON_TOL {
        return Err(Error::StepTooSmall {
            step: h,
            disagreement,
        });
    }
    Ok(hess)
}

/// Errors of finite-difference derivatives against closed forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub function: Functional,
    pub n: usize,
    pub step: f64,
    pub gradient_max_abs_error: f64,
    /// Entrywise error divided by the largest closed-form entry.
    pub hessian_max_rel_error: f64,
}

/// Gradient of the deficit at the regular point: `2n tan(pi/n)` on every
/// angle coordinate, zero on the radii.
pub fn deficit_gradient_at_star(n: usize) -> Vec<f64> {
    let g = 2.0 * n as f64 * (PI / n as f64).tan();
    (0..2 * n).map(|i| if i < n { g } else { 0.0 }).collect()
}

fn max_entry_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> (usize, usize, f64) {
    let mut worst = (0, 0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let e = (a[(i, j)] - b[(i, j)]).abs();
            if e > worst.2 {
                worst = (i, j, e);
            }
        }
    }
    worst
}

/// Compares the finite-difference gradient and Hessian of `phi` at the
/// regular point against zero and the closed-form block Hessian.
pub fn verify_hessian_phi(n: usize, h: f64) -> Result<DerivativeReport> {
    let star = ManifoldPoint::regular(n).coords();
    let grad = grad_fd(phi_at, &star, h)?;
    let hess = hessian_fd(phi_at, &star, h)?;
    let exact = BlockHessian::new(n);
    let scale = linalg::max_abs(exact.matrix());
    let (row, col, err) = max_entry_error(&hess, exact.matrix());
    let rel = err / scale;
    let tolerance = 1e-5;
    if rel > tolerance {
        return Err(Error::MismatchExceedsTolerance {
            what: "phi Hessian",
            row,
            col,
            error: rel,
            tolerance,
        });
    }
    Ok(DerivativeReport {
        function: Functional::Phi,
        n,
        step: h,
        gradient_max_abs_error: grad.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
        hessian_max_rel_error: rel,
    })
}

/// Compares the finite-difference gradient of the deficit at the regular
/// point against the closed form. The Hessian has no closed form to compare
/// with, so its error field is the Richardson (h vs 2h) disagreement.
pub fn verify_deficit_gradient(n: usize, h: f64) -> Result<DerivativeReport> {
    let star = ManifoldPoint::regular(n).coords();
    let grad = grad_fd(deficit_at, &star, h)?;
    let exact = deficit_gradient_at_star(n);
    let scale = exact[0];
    let (i, err) = grad
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .enumerate()
        .fold((0, 0.0), |m, (i, e)| if e > m.1 { (i, e) } else { m });
    let tolerance = 1e-6;
    if err / scale > tolerance {
        return Err(Error::MismatchExceedsTolerance {
            what: "deficit gradient",
            row: i,
            col: 0,
            error: err / scale,
            tolerance,
        });
    }
    let h1 = central_hessian(&deficit_at, &star, h);
    let h2 = central_hessian(&deficit_at, &star, 2.0 * h);
    Ok(DerivativeReport {
        function: Functional::Deficit,
        n,
        step: h,
        gradient_max_abs_error: err,
        hessian_max_rel_error: linalg::max_abs(&(&h1 - &h2)) / linalg::max_abs(&h1).max(1.0),
    })
}

/// Ambient Hessian of a functional at the regular point.
pub fn hessian_at_star(f: Functional, n: usize, h: f64) -> Result<DMatrix<f64>> {
    let star = ManifoldPoint::regular(n).coords();
    hessian_fd(|z: &[f64]| f.eval(z), &star, h)
}

/// Minimum of `<D^2 delta(z*) w, w>` over unit tangent vectors at the regular point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaEstimate {
    pub n: usize,
    pub step: f64,
    pub sigma: f64,
    /// Eigenvalues of the restricted Hessian, ascending.
    pub spectrum: Vec<f64>,
}

/// Restricts the finite-difference deficit Hessian to the tangent basis and
/// returns its smallest eigenvalue.
pub fn sigma_estimate(n: usize, h: f64) -> Result<SigmaEstimate> {
    let hess = hessian_at_star(Functional::Deficit, n, h)?;
    let basis = TangentBasis::at_regular(n);
    let (spectrum, _) = linalg::sorted_symmetric_eigen(&linalg::restrict(&hess, basis.matrix()));
    let sigma = spectrum[0];
    if !(sigma > 0.0) {
        return Err(Error::NonpositiveSigma(sigma));
    }
    Ok(SigmaEstimate {
        n,
        step: h,
        sigma,
        spectrum,
    })
}

pub fn quadratic(m: &DMatrix<f64>, w: &[f64]) -> f64 {
    let v = DVector::from_column_slice(w);
    v.dot(&(m * &v))
}

/// Third-order Taylor remainder along a retracted tangent curve:
/// `|f(z) - 1/2 <H (z - z*), z - z*>| / |z - z*|^3` at `z = retract(z* + t w)`.
pub fn taylor_remainder_ratio(
    f: Functional,
    hessian: &DMatrix<f64>,
    w: &[f64],
    t: f64,
) -> Result<f64> {
    let n = w.len() / 2;
    let star = ManifoldPoint::regular(n).coords();
    let z: Vec<f64> = star.iter().zip(w).map(|(s, d)| s + t * d).collect();
    let m = retract(&z)?;
    let dz: Vec<f64> = m.coords().iter().zip(&star).map(|(a, b)| a - b).collect();
    let norm = dz.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rem = (f.eval(&m.coords()) - 0.5 * quadratic(hessian, &dz)).abs();
    Ok(rem / norm.powi(3))
}

/// Largest remainder ratio over a set of tangent directions at a fixed `t`.
pub fn fit_taylor_constant(
    f: Functional,
    hessian: &DMatrix<f64>,
    directions: &[Vec<f64>],
    t: f64,
) -> Result<f64> {
    directions.iter().try_fold(0.0, |acc: f64, w| {
        Ok(acc.max(taylor_remainder_ratio(f, hessian, w, t)?))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::seeded_rng;
    use crate::spectral::build_phi;

    #[test]
    fn hessian_of_quadratic_is_exact() {
        let phi = build_phi(4);
        let m = phi.matrix().clone();
        let f = |z: &[f64]| 0.5 * quadratic(&m, z);
        let z = [0.3, -0.1, 0.2, 0.5, 1.0, -2.0, 0.7, 0.1];
        let hess = hessian_fd(f, &z, 1e-3).unwrap();
        assert!(linalg::max_abs(&(hess - &m)) < 1e-8);
    }

    #[test]
    fn gradient_of_deficit_at_star() {
        for n in 3..=10 {
            let star = ManifoldPoint::regular(n).coords();
            let g = grad_fd(deficit_at, &star, DEFAULT_STEP).unwrap();
            let want = deficit_gradient_at_star(n);
            for (a, b) in g.iter().zip(&want) {
                assert!((a - b).abs() < 1e-6, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn gradient_of_phi_vanishes_at_star() {
        for n in 3..=10 {
            let star = ManifoldPoint::regular(n).coords();
            let g = grad_fd(phi_at, &star, DEFAULT_STEP).unwrap();
            assert!(g.iter().all(|v| v.abs() < 1e-6));
        }
    }

    #[test]
    fn phi_hessian_closed_form() {
        for n in [3, 4, 5, 8] {
            let report = verify_hessian_phi(n, DEFAULT_STEP).unwrap();
            assert!(report.hessian_max_rel_error < 1e-5, "{report:?}");
        }
        let h3 = hessian_at_star(Functional::Phi, 3, DEFAULT_STEP).unwrap();
        assert!((h3[(0, 0)] - 3.0 * 3f64.sqrt()).abs() < 1e-4);
        let h5 = hessian_at_star(Functional::Phi, 5, DEFAULT_STEP).unwrap();
        let mixed = linalg::max_abs(&h5.view((0, 5), (5, 5)).into_owned());
        assert!(mixed < 1e-6, "{mixed:e}");
        let h4 = hessian_at_star(Functional::Phi, 4, DEFAULT_STEP).unwrap();
        assert!((h4[(4, 5)] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn step_bounds() {
        assert_eq!(
            grad_fd(deficit_at, &[1.0; 6], 1e-2),
            Err(Error::StepOutOfRange(1e-2))
        );
    }

    #[test]
    fn noisy_function_trips_richardson_check() {
        // Large noise relative to the step: differences at h and 2h disagree.
        let f = |z: &[f64]| (z[0] * 1e9).sin() * 1e-3;
        assert!(matches!(
            grad_fd(f, &[0.1, 0.2], 1e-7),
            Err(Error::StepTooSmall { .. })
        ));
    }

    #[test]
    fn sigma_positive_and_is_a_minimum() {
        let est = sigma_estimate(5, DEFAULT_STEP).unwrap();
        assert!(est.sigma > 0.0);
        let hess = hessian_at_star(Functional::Deficit, 5, DEFAULT_STEP).unwrap();
        let basis = TangentBasis::at_regular(5);
        let mut rng = seeded_rng(2);
        for _ in 0..50 {
            let w = basis.random_unit(&mut rng);
            assert!(quadratic(&hess, &w) >= est.sigma - 1e-6);
        }
    }

    #[test]
    fn deficit_gradient_orthogonal_to_tangent_space() {
        for n in 3..=12 {
            let star = ManifoldPoint::regular(n).coords();
            let g = grad_fd(deficit_at, &star, DEFAULT_STEP).unwrap();
            for w in TangentBasis::at_regular(n).vectors() {
                let dot: f64 = g.iter().zip(&w).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 1e-6);
            }
        }
    }
}
