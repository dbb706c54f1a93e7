//! Constraint evaluation, sampling, retraction and tangent spaces of the
//! polygonal manifold
//!
//! ```text
//! M = { (x; r) : x, r >= 0,  sum x = 2pi,  sum r = n,
//!       sum r_i cos(theta_i) = 0,  sum r_i sin(theta_i) = 0 }
//! ```
//!
//! with `theta_i = x_0 + ... + x_{i-1}`. For fixed angles the last three
//! constraints are linear in the radii, which the sampler and the retraction
//! both exploit.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::polygon::{polar_angles, ManifoldPoint, CONSTRAINT_TOL, MIN_RADIUS};

/// Seeded generator used throughout the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintResiduals {
    pub angle_sum_residual: f64,
    pub radius_sum_residual: f64,
    pub barycenter_cos_residual: f64,
    pub barycenter_sin_residual: f64,
}

impl ConstraintResiduals {
    pub fn max_abs(&self) -> f64 {
        self.angle_sum_residual
            .abs()
            .max(self.radius_sum_residual.abs())
            .max(self.barycenter_cos_residual.abs())
            .max(self.barycenter_sin_residual.abs())
    }

    pub fn on_manifold(&self) -> bool {
        self.max_abs() < CONSTRAINT_TOL
    }
}

/// The four constraint residuals, read directly off the constraint equations.
pub fn residuals(x: &[f64], r: &[f64]) -> ConstraintResiduals {
    let theta = polar_angles(x);
    let (mut c, mut s) = (0.0, 0.0);
    for (t, ri) in theta.iter().zip(r) {
        c += ri * t.cos();
        s += ri * t.sin();
    }
    ConstraintResiduals {
        angle_sum_residual: x.iter().sum::<f64>() - TAU,
        radius_sum_residual: r.iter().sum::<f64>() - r.len() as f64,
        barycenter_cos_residual: c,
        barycenter_sin_residual: s,
    }
}

/// Jacobian (4 x 2n) of the constraint map at `(x; r)`.
pub fn constraint_jacobian(x: &[f64], r: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let theta = polar_angles(x);
    let mut jac = DMatrix::zeros(4, 2 * n);
    for i in 0..n {
        jac[(0, i)] = 1.0;
        jac[(1, n + i)] = 1.0;
        jac[(2, n + i)] = theta[i].cos();
        jac[(3, n + i)] = theta[i].sin();
    }
    // theta_i depends on x_k for k < i; accumulate suffix sums.
    let (mut dc, mut ds) = (0.0, 0.0);
    for k in (0..n).rev() {
        jac[(2, k)] = dc;
        jac[(3, k)] = ds;
        dc -= r[k] * theta[k].sin();
        ds += r[k] * theta[k].cos();
    }
    jac
}

/// Orthonormal basis of the tangent space at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentBasis {
    n: usize,
    basis: DMatrix<f64>,
}

impl TangentBasis {
    /// Kernel of the constraint Jacobian at `m`.
    pub fn at(m: &ManifoldPoint) -> Self {
        let jac = constraint_jacobian(m.x(), m.r());
        TangentBasis {
            n: m.n(),
            basis: linalg::null_space(&jac, 1e-10),
        }
    }

    /// Tangent space at the regular point; dimension `2n - 4`.
    pub fn at_regular(n: usize) -> Self {
        Self::at(&ManifoldPoint::regular(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Basis vectors as matrix columns (2n x dim).
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.basis.column(k).iter().copied().collect()
    }

    pub fn vectors(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.dim()).map(|k| self.vector(k))
    }

    /// Orthogonal projection of an ambient vector onto the tangent space.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(v);
        let p = &self.basis * (self.basis.transpose() * v);
        p.iter().copied().collect()
    }

    /// Tangent vector with the given coefficients in this basis.
    pub fn combine(&self, coeffs: &[f64]) -> Vec<f64> {
        let p = &self.basis * DVector::from_column_slice(coeffs);
        p.iter().copied().collect()
    }

    /// Uniform random unit tangent vector.
    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let coeffs: Vec<f64> = (0..self.dim()).map(|_| rng.sample(StandardNormal)).collect();
        let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        let coeffs: Vec<f64> = coeffs.iter().map(|c| c / norm).collect();
        self.combine(&coeffs)
    }
}

/// Orthonormal basis of the tangent space at the regular n-gon.
pub fn tangent_basis_at_star(n: usize) -> TangentBasis {
    TangentBasis::at_regular(n)
}

/// The 3 x n linear system `A r = (n, 0, 0)` of the radius constraints for fixed angles.
fn radius_system(x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let theta = polar_angles(x);
    DMatrix::from_fn(3, n, |row, i| match row {
        0 => 1.0,
        1 => theta[i].cos(),
        _ => theta[i].sin(),
    })
}

/// Least-squares correction of `r` onto `{A r = (n, 0, 0)}`.
fn project_radii(a: &DMatrix<f64>, r: &DVector<f64>) -> Option<DVector<f64>> {
    let n = a.ncols() as f64;
    let aat: Matrix3<f64> = (a * a.transpose()).fixed_view::<3, 3>(0, 0).into_owned();
    let inv = aat.try_inverse()?;
    let mut r = r.clone();
    // A second pass recovers the digits lost to the conditioning of A A^T.
    for _ in 0..2 {
        let res = a * &r - DVector::from_column_slice(&[n, 0.0, 0.0]);
        let res = Vector3::new(res[0], res[1], res[2]);
        let corr = a.transpose() * DVector::from_column_slice((inv * res).as_slice());
        r -= corr;
    }
    Some(r)
}

fn kernel_direction<R: Rng + ?Sized>(a: &DMatrix<f64>, rng: &mut R) -> Option<DVector<f64>> {
    let n = a.ncols();
    let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let aat: Matrix3<f64> = (a * a.transpose()).fixed_view::<3, 3>(0, 0).into_owned();
    let inv = aat.try_inverse()?;
    let ag = a * &g;
    let coef = inv * Vector3::new(ag[0], ag[1], ag[2]);
    Some(g - a.transpose() * DVector::from_column_slice(coef.as_slice()))
}

/// Draws radii satisfying the three radius constraints for fixed angles:
/// the projection of `(1, ..., 1)` plus `spread` times a random kernel
/// combination, rejecting any draw with a nonpositive radius.
pub fn radii_for_angles<R: Rng + ?Sized>(
    x: &[f64],
    spread: f64,
    rng: &mut R,
    attempts: usize,
) -> Result<ManifoldPoint> {
    let a = radius_system(x);
    let base = project_radii(&a, &DVector::from_element(x.len(), 1.0))
        .ok_or(Error::SamplingExhausted(0))?;
    for _ in 0..attempts.max(1) {
        let mut r = base.clone();
        if spread > 0.0 {
            if let Some(k) = kernel_direction(&a, rng) {
                r += k * spread;
            }
            r = project_radii(&a, &r).ok_or(Error::SamplingExhausted(0))?;
        }
        if r.iter().all(|&v| v > MIN_RADIUS) {
            if let Ok(m) = ManifoldPoint::new(x.to_vec(), r.iter().copied().collect()) {
                return Ok(m);
            }
        }
    }
    Err(Error::SamplingExhausted(attempts))
}

/// Parameters of the randomized sampler. Each draw picks a Dirichlet
/// concentration and a radius spread log-uniformly from the given ranges, so
/// a batch covers both near-regular and strongly distorted polygons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub concentration: (f64, f64),
    pub radius_spread: (f64, f64),
    /// Keep only points whose vertex image is convex.
    pub convex_only: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            concentration: (0.5, 500.0),
            radius_spread: (1e-3, 0.5),
            convex_only: false,
        }
    }
}

impl SamplerConfig {
    pub fn convex() -> Self {
        SamplerConfig {
            convex_only: true,
            ..Self::default()
        }
    }
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo >= hi {
        return lo;
    }
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Symmetric Dirichlet draw scaled to sum to 2*pi.
pub fn sample_angles<R: Rng + ?Sized>(n: usize, concentration: f64, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    let g: Vec<f64> = (0..n).map(|_| gamma.sample(rng).max(f64::MIN_POSITIVE)).collect();
    let total: f64 = g.iter().sum();
    g.iter().map(|v| TAU * v / total).collect()
}

/// Random point of the manifold with positive coordinates and every central
/// angle below pi (so the image is star-shaped about its barycenter).
pub fn sample_with<R: Rng + ?Sized>(
    n: usize,
    config: &SamplerConfig,
    rng: &mut R,
    attempts: usize,
) -> Result<ManifoldPoint> {
    if n < 3 {
        return Err(Error::TooFewVertices(n));
    }
    for _ in 0..attempts {
        let alpha = log_uniform(rng, config.concentration);
        let x = sample_angles(n, alpha, rng);
        if x.iter().any(|&v| v >= PI || v <= 0.0) {
            continue;
        }
        let spread = log_uniform(rng, config.radius_spread);
        if let Ok(m) = radii_for_angles(&x, spread, rng, 1) {
            if !config.convex_only || m.is_convex() {
                return Ok(m);
            }
        }
    }
    Err(Error::SamplingExhausted(attempts))
}

/// Random point with the default sampler configuration.
pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R, attempts: usize) -> Result<ManifoldPoint> {
    sample_with(n, &SamplerConfig::default(), rng, attempts)
}

/// Random point whose vertex image is convex.
pub fn sample_convex<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
    attempts: usize,
) -> Result<ManifoldPoint> {
    sample_with(n, &SamplerConfig::convex(), rng, attempts)
}

/// The regular point displaced by `t` along a random unit tangent, retracted.
pub fn sample_near_regular<R: Rng + ?Sized>(
    basis: &TangentBasis,
    t: f64,
    rng: &mut R,
    attempts: usize,
) -> Result<ManifoldPoint> {
    let star = ManifoldPoint::regular(basis.n()).coords();
    for _ in 0..attempts {
        let w = basis.random_unit(rng);
        let z: Vec<f64> = star.iter().zip(&w).map(|(s, d)| s + t * d).collect();
        if let Ok(m) = retract(&z) {
            return Ok(m);
        }
    }
    Err(Error::SamplingExhausted(attempts))
}

/// Maps a nearby point of R^{2n} onto the manifold: angles are rescaled to sum
/// to 2*pi, then radii are projected onto the affine solution set of the
/// radius constraints by least squares.
pub fn retract(z: &[f64]) -> Result<ManifoldPoint> {
    if z.len() % 2 != 0 || z.len() < 6 {
        return Err(Error::DimensionMismatch {
            expected: 2 * (z.len() / 2).max(3),
            got: z.len(),
        });
    }
    let n = z.len() / 2;
    let (x, r) = z.split_at(n);
    let total: f64 = x.iter().sum();
    if !(total > 0.0) {
        return Err(Error::RetractionFailed(format!("angle sum {total}")));
    }
    let x: Vec<f64> = x.iter().map(|v| v * TAU / total).collect();
    if let Some(i) = x.iter().position(|&v| v <= 0.0) {
        return Err(Error::RetractionFailed(format!("x[{i}] = {}", x[i])));
    }
    let a = radius_system(&x);
    let r = project_radii(&a, &DVector::from_column_slice(r))
        .ok_or_else(|| Error::RetractionFailed("singular radius system".into()))?;
    if let Some(i) = r.iter().position(|&v| v <= MIN_RADIUS) {
        return Err(Error::RetractionFailed(format!("r[{i}] = {}", r[i])));
    }
    ManifoldPoint::new(x, r.iter().copied().collect())
        .map_err(|e| Error::RetractionFailed(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (u, v)| m.max((u - v).abs()))
    }

    #[test]
    fn residuals_at_regular_vanish() {
        for n in 3..=20 {
            let m = ManifoldPoint::regular(n);
            let res = residuals(m.x(), m.r());
            assert!(res.max_abs() < 1e-14, "n={n}: {res:?}");
        }
    }

    #[test]
    fn residuals_of_perturbed_radii() {
        let m = ManifoldPoint::regular(6);
        let mut r = m.r().to_vec();
        r[0] += 0.1;
        r[1] -= 0.1;
        let res = residuals(m.x(), &r);
        assert!(res.radius_sum_residual.abs() < 1e-15);
        // Direct evaluation: 0.1 (cos 0 - cos 60deg) and 0.1 (sin 0 - sin 60deg).
        assert!((res.barycenter_cos_residual - 0.05).abs() < 1e-15);
        assert!((res.barycenter_sin_residual + 0.1 * (PI / 3.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn residuals_of_scaled_angles() {
        let m = ManifoldPoint::regular(7);
        let x: Vec<f64> = m.x().iter().map(|v| v * 1.01).collect();
        let res = residuals(&x, m.r());
        assert!((res.angle_sum_residual - 0.02 * PI).abs() < 1e-13);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = seeded_rng(3);
        let m = sample(7, &mut rng, 1000).unwrap();
        let z = m.coords();
        let jac = constraint_jacobian(m.x(), m.r());
        let h = 1e-6;
        for j in 0..z.len() {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[j] += h;
            zm[j] -= h;
            let f = |z: &[f64]| {
                let r = residuals(&z[..7], &z[7..]);
                [
                    r.angle_sum_residual,
                    r.radius_sum_residual,
                    r.barycenter_cos_residual,
                    r.barycenter_sin_residual,
                ]
            };
            let (fp, fm) = (f(&zp), f(&zm));
            for i in 0..4 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                assert!((fd - jac[(i, j)]).abs() < 1e-8, "({i},{j})");
            }
        }
    }

    #[test]
    fn triangle_radii_are_forced() {
        // Three unknowns, three equations: solve the system directly and compare.
        let mut rng = seeded_rng(11);
        for _ in 0..20 {
            let m = sample(3, &mut rng, 1000).unwrap();
            let theta = polar_angles(m.x());
            let a = Matrix3::from_fn(|row, i| match row {
                0 => 1.0,
                1 => theta[i].cos(),
                _ => theta[i].sin(),
            });
            let r = a.lu().solve(&Vector3::new(3.0, 0.0, 0.0)).unwrap();
            assert!(max_abs_diff(r.as_slice(), m.r()) < 1e-12);
        }
    }

    #[test]
    fn triangle_with_right_angle_gap_has_no_radii() {
        // theta = (0, pi, 3pi/2): the sine equation forces r_2 = 0.
        let x = [PI, PI / 2.0, PI / 2.0];
        let mut rng = seeded_rng(0);
        assert_eq!(
            radii_for_angles(&x, 0.1, &mut rng, 5),
            Err(Error::SamplingExhausted(5))
        );
        // The full sampler retries with fresh angles and succeeds.
        assert!(sample(3, &mut rng, 100).is_ok());
    }

    #[test]
    fn samples_are_on_manifold() {
        let mut rng = seeded_rng(42);
        for n in [3, 4, 6, 9, 16] {
            for _ in 0..50 {
                let m = sample(n, &mut rng, 1000).unwrap();
                assert!(residuals(m.x(), m.r()).max_abs() < 1e-9);
                assert!(m.x().iter().all(|&v| v > 0.0 && v < PI));
                assert!(m.r().iter().all(|&v| v > 0.0));
            }
        }
    }

    #[test]
    fn convex_sampler_yields_convex_points() {
        let mut rng = seeded_rng(5);
        for n in [3, 5, 12] {
            for _ in 0..30 {
                let m = sample_convex(n, &mut rng, 10_000).unwrap();
                assert!(m.is_convex());
                assert!(m.to_vertices().unwrap().is_convex());
            }
        }
    }

    #[test]
    fn tangent_basis_dimension_and_orthonormality() {
        for n in 3..=32 {
            let tb = tangent_basis_at_star(n);
            assert_eq!(tb.dim(), 2 * n - 4, "n={n}");
            let gram = tb.matrix().transpose() * tb.matrix();
            let dev = linalg::max_abs(&(gram - DMatrix::identity(tb.dim(), tb.dim())));
            assert!(dev < 1e-12, "n={n}: {dev:e}");
            let star = ManifoldPoint::regular(n);
            let jac = constraint_jacobian(star.x(), star.r());
            assert!(linalg::max_abs(&(jac * tb.matrix())) < 1e-10);
        }
    }

    #[test]
    fn retract_is_identity_on_manifold() {
        let mut rng = seeded_rng(8);
        for _ in 0..20 {
            let m = sample(8, &mut rng, 1000).unwrap();
            let back = retract(&m.coords()).unwrap();
            assert!(max_abs_diff(&back.coords(), &m.coords()) < 1e-12);
        }
    }

    #[test]
    fn retract_contracts_small_tangent_steps() {
        for n in [3, 5, 8] {
            let tb = tangent_basis_at_star(n);
            let star = ManifoldPoint::regular(n).coords();
            for w in tb.vectors() {
                for eps in [1e-3, 1e-4] {
                    let z: Vec<f64> = star.iter().zip(&w).map(|(s, d)| s + eps * d).collect();
                    let m = retract(&z).unwrap();
                    let c = m.coords();
                    assert!(max_abs_diff(&c, &z) < 1e-5);
                    let dist = c
                        .iter()
                        .zip(&star)
                        .map(|(a, b)| (a - b).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    assert!(dist <= 2.0 * eps);
                }
            }
        }
    }

    #[test]
    fn retract_rescales_angles() {
        let star = ManifoldPoint::regular(5);
        let mut z = star.coords();
        for v in &mut z[..5] {
            *v *= 1.05;
        }
        let m = retract(&z).unwrap();
        for v in m.x() {
            assert!((v - TAU / 5.0).abs() < 1e-14);
        }
    }

    #[test]
    fn retract_rejects_far_points() {
        let mut z = ManifoldPoint::regular(4).coords();
        z[4] = -3.0;
        assert!(matches!(retract(&z), Err(Error::RetractionFailed(_))));
    }

    #[test]
    fn near_regular_samples() {
        let tb = tangent_basis_at_star(6);
        let mut rng = seeded_rng(1);
        let m = sample_near_regular(&tb, 1e-2, &mut rng, 10).unwrap();
        let d = m.distance_to_regular();
        assert!(d > 0.0 && d < 2e-2);
    }
}
