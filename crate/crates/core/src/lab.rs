//! Inequality checks on individual polygons and numerical estimation of the
//! stability constants.
//!
//! The estimator follows a near/far split around the regular point `z*`:
//! away from `z*` the ratio `(sigma_r^2 + |P| sigma_a^2) / delta` is
//! maximized by sampling plus projected-gradient ascent on the manifold;
//! near `z*` it is replaced by its limit along curves into `z*`, the largest
//! generalized Rayleigh quotient `<Phi w, w> / (n^2 <D^2 delta(z*) w, w>)`
//! over tangent directions `w`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::calculus::{self, Functional, DEFAULT_STEP};
use crate::error::{Error, Result};
use crate::linalg;
use crate::manifold::{
    constraint_jacobian, retract, sample_with, seeded_rng, SamplerConfig, TangentBasis,
};
use crate::polygon::{
    area_xr, deficit_xr, side_variance_xr, variance, ManifoldPoint, PolygonSummary,
    VertexPolygon,
};
use crate::spectral::BlockHessian;

/// Points closer than this (max-norm) to `z*` belong to the local phase.
pub const NEAR_RADIUS: f64 = 1e-2;

/// Deficits below this are not used in ratios.
pub const DEFICIT_FLOOR: f64 = 1e-14;

/// Default number of ascent starts.
pub const DEFAULT_STARTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityRecord {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl InequalityRecord {
    fn tolerance(lhs: f64, rhs: f64) -> f64 {
        1e-9 * 1f64.max(lhs.abs()).max(rhs.abs())
    }

    /// `lhs <= rhs`, up to the relative tolerance.
    pub fn inequality(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        InequalityRecord {
            name,
            lhs,
            rhs,
            slack,
            pass: slack >= -Self::tolerance(lhs, rhs),
        }
    }

    /// `lhs == rhs`, up to the relative tolerance.
    pub fn identity(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        InequalityRecord {
            name,
            lhs,
            rhs,
            slack,
            pass: slack.abs() <= Self::tolerance(lhs, rhs),
        }
    }
}

/// Constants used by the constant-dependent checks; absent constants skip
/// the corresponding records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Constants {
    /// Constant of the main bound `sigma_r^2 + |P| sigma_a^2 <= c_n delta`.
    pub c_n: Option<f64>,
    /// Constant of the side-length bound `sigma_s^2 <= c delta`.
    pub side_variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub n: usize,
    pub convex: bool,
    pub summary: PolygonSummary,
    pub records: Vec<InequalityRecord>,
}

impl InequalityReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn record(&self, name: &str) -> Option<&InequalityRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InequalityRecord> {
        self.records.iter().filter(|r| !r.pass)
    }
}

/// Evaluates every inequality and identity on a polygon's functionals.
///
/// The deficit sign and the convexity-only bounds are reported only for
/// convex polygons; the main bound only needs the central angles to sum to
/// 2*pi, which any summary with valid central angles satisfies.
pub fn verify_summary(s: &PolygonSummary, convex: bool, constants: &Constants) -> InequalityReport {
    let n = s.n as f64;
    let iso = crate::polygon::isoperimetric_constant(s.n);
    let radius_term = 8.0 * n * n * (PI / n).sin().powi(2) * s.radius_variance;
    let shilleto = InequalityRecord::inequality(
        "shilleto",
        radius_term,
        n * s.side_square_sum - iso * s.area,
    );
    let fin = InequalityRecord::inequality(
        "fin",
        radius_term,
        s.deficit + n * n * s.side_variance,
    );
    let mut records = Vec::new();
    if convex {
        records.push(InequalityRecord::inequality(
            "nonnegativity",
            iso * s.area,
            s.perimeter * s.perimeter,
        ));
    }
    records.push(InequalityRecord::identity(
        "variance_identity",
        n * n * s.side_variance,
        n * s.side_square_sum - s.perimeter * s.perimeter,
    ));
    records.push(InequalityRecord::identity(
        "shilleto_fin_equivalence",
        shilleto.slack,
        fin.slack,
    ));
    records.push(shilleto);
    records.push(fin);
    if let (true, Some(c4)) = (convex, constants.side_variance) {
        records.push(InequalityRecord::inequality(
            "side_variance",
            s.side_variance,
            c4 * s.deficit,
        ));
    }
    if let Some(c) = constants.c_n {
        records.push(InequalityRecord::inequality(
            "main_theorem",
            s.stability_functional(),
            c * s.deficit,
        ));
    }
    if let (true, Some(c), Some(c4)) = (convex, constants.c_n, constants.side_variance) {
        records.push(InequalityRecord::inequality(
            "corollary",
            s.side_variance + s.stability_functional(),
            (c + c4) * s.deficit,
        ));
    }
    InequalityReport {
        n: s.n,
        convex,
        summary: *s,
        records,
    }
}

/// Inequality report for a manifold point.
pub fn verify(m: &ManifoldPoint, constants: &Constants) -> Result<InequalityReport> {
    Ok(verify_summary(&m.summary()?, m.is_convex(), constants))
}

/// Inequality report for raw `(x; r)` coordinates, rejecting points off the manifold.
pub fn verify_coords(z: &[f64], constants: &Constants) -> Result<InequalityReport> {
    let m = ManifoldPoint::from_coords(z).map_err(|e| Error::NotOnManifold(e.to_string()))?;
    verify(&m, constants)
}

/// Inequality report for a vertex polygon, in its own (unscaled) units.
pub fn verify_polygon(p: &VertexPolygon, constants: &Constants) -> Result<InequalityReport> {
    Ok(verify_summary(&p.summary()?, p.is_convex(), constants))
}

/// Which stability constant to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// `(sigma_r^2 + |P| sigma_a^2) / delta`.
    MainTheorem,
    /// `sigma_s^2 / delta` over convex polygons (empirical constant).
    SideVariance,
}

impl Target {
    fn numerator(self, x: &[f64], r: &[f64]) -> f64 {
        match self {
            Target::MainTheorem => variance(r) + area_xr(x, r) * variance(x),
            Target::SideVariance => side_variance_xr(x, r),
        }
    }

    /// Ratio on concatenated coordinates, `None` below the deficit floor.
    pub fn ratio(self, z: &[f64]) -> Option<f64> {
        let (x, r) = z.split_at(z.len() / 2);
        let d = deficit_xr(x, r);
        (d >= DEFICIT_FLOOR).then(|| self.numerator(x, r) / d)
    }

    fn convex_only(self) -> bool {
        matches!(self, Target::SideVariance)
    }
}

/// Second-order model of numerator and deficit at the regular point,
/// restricted to the tangent space.
#[derive(Debug, Clone)]
pub struct LocalModel {
    pub n: usize,
    pub target: Target,
    pub basis: TangentBasis,
    /// Ambient Hessian of the numerator.
    pub numerator_hessian: DMatrix<f64>,
    /// Ambient Hessian of the deficit (finite differences).
    pub deficit_hessian: DMatrix<f64>,
}

impl LocalModel {
    pub fn new(n: usize, target: Target) -> Result<Self> {
        let numerator_hessian = match target {
            Target::MainTheorem => BlockHessian::new(n).matrix() / (n * n) as f64,
            Target::SideVariance => {
                calculus::hessian_at_star(Functional::SideVariance, n, DEFAULT_STEP)?
            }
        };
        Ok(LocalModel {
            n,
            target,
            basis: TangentBasis::at_regular(n),
            numerator_hessian,
            deficit_hessian: calculus::hessian_at_star(Functional::Deficit, n, DEFAULT_STEP)?,
        })
    }

    /// Limit of the ratio along a curve into `z*` with tangent `w`.
    pub fn rayleigh(&self, w: &[f64]) -> f64 {
        calculus::quadratic(&self.numerator_hessian, w) / calculus::quadratic(&self.deficit_hessian, w)
    }

    /// Largest Rayleigh quotient over the tangent space and a maximizing unit direction.
    pub fn max_rayleigh(&self) -> Result<(f64, Vec<f64>)> {
        let t = self.basis.matrix();
        let a = linalg::restrict(&self.numerator_hessian, t);
        let b = linalg::restrict(&self.deficit_hessian, t);
        let b = (&b + b.transpose()) * 0.5;
        let chol = b.clone().cholesky().ok_or_else(|| {
            Error::NonpositiveSigma(linalg::min_symmetric_eigenvalue(&b))
        })?;
        let l_inv = chol
            .l()
            .try_inverse()
            .ok_or(Error::NonpositiveSigma(0.0))?;
        let reduced = &l_inv * a * l_inv.transpose();
        let (values, vectors) = linalg::sorted_symmetric_eigen(&reduced);
        let top = values.len() - 1;
        let y: DVector<f64> = l_inv.transpose() * vectors.column(top);
        let mut w: Vec<f64> = (t * y).iter().copied().collect();
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        w.iter_mut().for_each(|v| *v /= norm);
        Ok((values[top], w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Global,
    Local,
}

/// Numerical estimate of a stability constant. This is numerical evidence,
/// not a certified bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantEstimate {
    pub n: usize,
    pub target: Target,
    pub seed: u64,
    pub budget: usize,
    pub c_hat: f64,
    pub winning_phase: Phase,
    /// Best ratio found away from `z*`.
    pub global_max: f64,
    /// Limit of the ratio into `z*`, maximized over tangent directions.
    pub rayleigh_bound: f64,
    pub rayleigh_direction: Vec<f64>,
    /// Point attaining `global_max`.
    pub argmax: Option<ManifoldPoint>,
    pub samples_evaluated: usize,
    pub optimizer_iterations: usize,
    /// Set when the sampler could not fill the budget.
    pub budget_exhausted: bool,
}

/// Options of the global phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub starts: usize,
    pub max_iterations: usize,
    pub near_radius: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            starts: DEFAULT_STARTS,
            max_iterations: 500,
            near_radius: NEAR_RADIUS,
        }
    }
}

fn admissible(m: &ManifoldPoint, convex_only: bool, near_radius: f64) -> bool {
    m.x().iter().all(|&v| v > 0.0 && v < PI)
        && m.distance_to_regular() >= near_radius
        && (!convex_only || m.is_convex())
}

/// Projects an ambient vector onto the kernel of the constraint Jacobian at `m`.
fn project_tangent(m: &ManifoldPoint, g: &[f64]) -> Option<Vec<f64>> {
    let jac = constraint_jacobian(m.x(), m.r());
    let g = DVector::from_column_slice(g);
    let jjt = &jac * jac.transpose();
    let coef = jjt.lu().solve(&(&jac * &g))?;
    Some((g - jac.transpose() * coef).iter().copied().collect())
}

/// Projected-gradient ascent of the ratio with retraction and step halving.
/// Returns the final value, point and iteration count.
fn ascend(
    target: Target,
    start: ManifoldPoint,
    value: f64,
    options: &SearchOptions,
) -> (f64, ManifoldPoint, usize) {
    let convex_only = target.convex_only();
    let (mut best, mut point) = (value, start);
    let mut step = 1e-2;
    let mut iterations = 0;
    let f = |z: &[f64]| target.ratio(z).unwrap_or(0.0);
    while iterations < options.max_iterations {
        iterations += 1;
        let z = point.coords();
        let Ok(g) = calculus::grad_fd(f, &z, 1e-6) else {
            break;
        };
        let Some(g) = project_tangent(&point, &g) else {
            break;
        };
        let gmax = g.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        if gmax < 1e-12 {
            break;
        }
        let mut improved = false;
        while step > 1e-10 {
            let cand: Vec<f64> = z.iter().zip(&g).map(|(a, d)| a + step * d / gmax).collect();
            if let Ok(m) = retract(&cand) {
                if admissible(&m, convex_only, options.near_radius) {
                    if let Some(v) = target.ratio(&m.coords()) {
                        if v > best {
                            best = v;
                            point = m;
                            improved = true;
                            step *= 1.5;
                            break;
                        }
                    }
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (best, point, iterations)
}

/// Estimates `sup ratio` over the manifold for `n`-gons.
pub fn estimate_constant(
    n: usize,
    target: Target,
    budget: usize,
    seed: u64,
    options: &SearchOptions,
) -> Result<ConstantEstimate> {
    if n < 3 {
        return Err(Error::TooFewVertices(n));
    }
    if budget < 1000 {
        return Err(Error::BudgetTooSmall(budget));
    }
    let local = LocalModel::new(n, target)?;
    let (rayleigh_bound, rayleigh_direction) = local.max_rayleigh()?;

    let config = if target.convex_only() {
        SamplerConfig::convex()
    } else {
        SamplerConfig::default()
    };
    let mut rng = seeded_rng(seed);
    let mut top: Vec<(f64, ManifoldPoint)> = Vec::with_capacity(options.starts + 1);
    let mut samples_evaluated = 0;
    let mut budget_exhausted = false;
    for _ in 0..budget {
        let m = match sample_with(n, &config, &mut rng, 10_000) {
            Ok(m) => m,
            Err(_) => {
                budget_exhausted = true;
                break;
            }
        };
        samples_evaluated += 1;
        if m.distance_to_regular() < options.near_radius {
            continue;
        }
        let Some(v) = target.ratio(&m.coords()) else {
            continue;
        };
        if top.len() < options.starts || v > top[top.len() - 1].0 {
            let at = top.partition_point(|(u, _)| *u >= v);
            top.insert(at, (v, m));
            top.truncate(options.starts);
        }
    }

    let mut global_max = 0.0;
    let mut argmax = None;
    let mut optimizer_iterations = 0;
    for (v, m) in top {
        let (value, point, iters) = ascend(target, m, v, options);
        optimizer_iterations += iters;
        if value > global_max {
            global_max = value;
            argmax = Some(point);
        }
    }

    let (c_hat, winning_phase) = if global_max >= rayleigh_bound {
        (global_max, Phase::Global)
    } else {
        (rayleigh_bound, Phase::Local)
    };
    Ok(ConstantEstimate {
        n,
        target,
        seed,
        budget,
        c_hat,
        winning_phase,
        global_max,
        rayleigh_bound,
        rayleigh_direction,
        argmax,
        samples_evaluated,
        optimizer_iterations,
        budget_exhausted,
    })
}

/// Estimate of the main-bound constant `c_n`.
pub fn estimate_cn(n: usize, budget: usize, seed: u64) -> Result<ConstantEstimate> {
    estimate_constant(n, Target::MainTheorem, budget, seed, &SearchOptions::default())
}

/// Re-checks `c_hat * delta >= numerator` on fresh convex samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoldoutReport {
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
    pub violations: usize,
    pub max_ratio: f64,
    pub c_hat: f64,
}

pub fn holdout_check(estimate: &ConstantEstimate, samples: usize, seed: u64) -> Result<HoldoutReport> {
    let mut rng = seeded_rng(seed);
    let config = SamplerConfig::convex();
    let mut violations = 0;
    let mut max_ratio: f64 = 0.0;
    for _ in 0..samples {
        let m = sample_with(estimate.n, &config, &mut rng, 100_000)?;
        let s = m.summary()?;
        let lhs = match estimate.target {
            Target::MainTheorem => s.stability_functional(),
            Target::SideVariance => s.side_variance,
        };
        if s.deficit >= DEFICIT_FLOOR {
            max_ratio = max_ratio.max(lhs / s.deficit);
        }
        if !InequalityRecord::inequality("holdout", lhs, estimate.c_hat * s.deficit).pass {
            violations += 1;
        }
    }
    Ok(HoldoutReport {
        n: estimate.n,
        seed,
        samples,
        violations,
        max_ratio,
        c_hat: estimate.c_hat,
    })
}

/// Ratio along `retract(z* + t w)` for a sequence of `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessReport {
    pub n: usize,
    pub t: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Linear extrapolation to `t = 0` from the two smallest `t`.
    pub limit: f64,
    pub rayleigh: f64,
    pub positive: bool,
}

impl SharpnessReport {
    /// Relative distance of the ratio at `t` from the Rayleigh quotient.
    pub fn relative_error_at(&self, t: f64) -> Option<f64> {
        let i = self.t.iter().position(|&s| (s - t).abs() <= 1e-12 * t)?;
        Some((self.ratios[i] - self.rayleigh).abs() / self.rayleigh)
    }
}

/// Follows the ratio along a retracted curve into `z*` with tangent `w`.
pub fn sharpness_probe(model: &LocalModel, w: &[f64], ts: &[f64]) -> Result<SharpnessReport> {
    let n = model.n;
    if w.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            got: w.len(),
        });
    }
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    let w: Vec<f64> = w.iter().map(|v| v / norm).collect();
    let star = ManifoldPoint::regular(n);
    let jac = constraint_jacobian(star.x(), star.r());
    let off = (jac * DVector::from_column_slice(&w)).amax();
    if off > 1e-9 {
        return Err(Error::NotTangent(off));
    }
    let phi_form = calculus::quadratic(BlockHessian::new(n).matrix(), &w);
    if phi_form <= 1e-12 {
        return Err(Error::DegenerateDirection(phi_form));
    }
    let z0 = star.coords();
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(ts.len());
    for &t in ts {
        let z: Vec<f64> = z0.iter().zip(&w).map(|(a, d)| a + t * d).collect();
        let m = retract(&z)?;
        let ratio = model
            .target
            .ratio(&m.coords())
            .ok_or(Error::DegenerateDirection(m.deficit()))?;
        pairs.push((t, ratio));
    }
    let mut sorted = pairs.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let limit = match sorted.as_slice() {
        [(t1, r1), (t2, r2), ..] => (t2 * r1 - t1 * r2) / (t2 - t1),
        [(_, r1)] => *r1,
        [] => f64::NAN,
    };
    let rayleigh = model.rayleigh(&w);
    Ok(SharpnessReport {
        n,
        t: pairs.iter().map(|p| p.0).collect(),
        ratios: pairs.iter().map(|p| p.1).collect(),
        limit,
        rayleigh,
        positive: limit > 0.0 && limit.is_finite(),
    })
}

/// Exact scaling laws under dilation of the radii about the barycenter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub alpha: f64,
    pub deficit: f64,
    pub deficit_scaled: f64,
    pub angle_variance: f64,
    pub angle_variance_scaled: f64,
    /// `|delta(P_a) / (a^2 delta(P)) - 1|`.
    pub deficit_law_error: f64,
    /// `|sigma_a^2(P_a) / sigma_a^2(P) - 1|`.
    pub angle_law_error: f64,
    pub radius_law_error: f64,
    pub area_law_error: f64,
    /// `sigma_a^2 / delta` of `P` and of `P_alpha`.
    pub ratio: f64,
    pub ratio_scaled: f64,
}

fn rel_law_error(scaled: f64, base: f64, factor: f64) -> f64 {
    if base == 0.0 {
        return scaled.abs();
    }
    (scaled / (base * factor) - 1.0).abs()
}

pub fn scaling_check(p: &VertexPolygon, alpha: f64) -> Result<ScalingReport> {
    let base = p.summary()?;
    let scaled = p.dilate(alpha).summary()?;
    let a2 = alpha * alpha;
    Ok(ScalingReport {
        alpha,
        deficit: base.deficit,
        deficit_scaled: scaled.deficit,
        angle_variance: base.angle_variance,
        angle_variance_scaled: scaled.angle_variance,
        deficit_law_error: rel_law_error(scaled.deficit, base.deficit, a2),
        angle_law_error: rel_law_error(scaled.angle_variance, base.angle_variance, 1.0),
        radius_law_error: rel_law_error(scaled.radius_variance, base.radius_variance, a2),
        area_law_error: rel_law_error(scaled.area, base.area, a2),
        ratio: base.angle_variance / base.deficit,
        ratio_scaled: scaled.angle_variance / scaled.deficit,
    })
}

/// Scaling check on the vertex image of a manifold point.
pub fn scaling_check_point(m: &ManifoldPoint, alpha: f64) -> Result<ScalingReport> {
    scaling_check(&m.to_vertices()?, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{sample, sample_convex};
    use approx::assert_relative_eq;

    fn rectangle() -> VertexPolygon {
        VertexPolygon::from_vertices([(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (0.0, 1.0)]).unwrap()
    }

    #[test]
    fn regular_polygon_is_equality_case() {
        let consts = Constants {
            c_n: Some(1.0),
            side_variance: Some(1.0),
        };
        for n in 3..=12 {
            let rep = verify(&ManifoldPoint::regular(n), &consts).unwrap();
            assert!(rep.all_pass(), "{rep:?}");
            for name in ["shilleto", "fin", "main_theorem"] {
                assert!(rep.record(name).unwrap().slack.abs() < 1e-12, "{name}");
            }
            assert!(rep.summary.deficit.abs() < 1e-12);
        }
    }

    #[test]
    fn rectangle_shilleto_slack() {
        let rep = verify_polygon(&rectangle(), &Constants::default()).unwrap();
        let rec = rep.record("shilleto").unwrap();
        assert_relative_eq!(rec.rhs, 40.0 - 32.0, epsilon = 1e-12);
        assert_relative_eq!(rec.slack, 8.0, epsilon = 1e-12);
        assert!(rep.all_pass());
        // The manifold image is scaled by 1/sqrt(1.25): slacks scale by 1/1.25.
        let (m, _) = rectangle().to_manifold_point().unwrap();
        let rep = verify(&m, &Constants::default()).unwrap();
        assert_relative_eq!(rep.record("shilleto").unwrap().slack, 6.4, epsilon = 1e-12);
    }

    #[test]
    fn off_manifold_coordinates_rejected() {
        let mut z = ManifoldPoint::regular(4).coords();
        z[0] += 0.1;
        assert!(matches!(
            verify_coords(&z, &Constants::default()),
            Err(Error::NotOnManifold(_))
        ));
    }

    #[test]
    fn sampled_points_pass_constant_free_checks() {
        let mut rng = seeded_rng(9);
        for n in 3..=8 {
            for _ in 0..200 {
                let m = sample(n, &mut rng, 1000).unwrap();
                let rep = verify(&m, &Constants::default()).unwrap();
                assert!(rep.all_pass(), "{m}: {:?}", rep.failures().collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn ratio_is_invariant_under_relabeling() {
        let mut rng = seeded_rng(4);
        for _ in 0..20 {
            let m = sample(7, &mut rng, 1000).unwrap();
            let base = Target::MainTheorem.ratio(&m.coords()).unwrap();
            for k in 1..7 {
                let v = Target::MainTheorem.ratio(&m.rotated(k).coords()).unwrap();
                assert_relative_eq!(v, base, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn square_rayleigh_bound() {
        let model = LocalModel::new(4, Target::MainTheorem).unwrap();
        let (top, w) = model.max_rayleigh().unwrap();
        assert_relative_eq!(model.rayleigh(&w), top, max_relative = 1e-9);
        let mut rng = seeded_rng(0);
        for _ in 0..200 {
            let v = model.basis.random_unit(&mut rng);
            assert!(model.rayleigh(&v) <= top * (1.0 + 1e-9));
        }
    }

    #[test]
    fn estimate_dominates_samples_and_rayleigh() {
        let est = estimate_cn(5, 2000, 1).unwrap();
        assert!(est.c_hat.is_finite() && est.c_hat > 0.0);
        assert!(est.c_hat >= est.rayleigh_bound - 1e-6);
        assert!(est.c_hat >= est.global_max);
        let mut rng = seeded_rng(1);
        for _ in 0..500 {
            let m = sample(5, &mut rng, 1000).unwrap();
            if let Some(v) = Target::MainTheorem.ratio(&m.coords()) {
                assert!(v <= est.c_hat * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn small_budget_rejected() {
        assert_eq!(estimate_cn(4, 10, 0), Err(Error::BudgetTooSmall(10)));
    }

    #[test]
    fn probe_rejects_pure_scaling() {
        let model = LocalModel::new(5, Target::MainTheorem).unwrap();
        let w: Vec<f64> = (0..10).map(|i| if i < 5 { 0.0 } else { 1.0 }).collect();
        assert!(matches!(
            sharpness_probe(&model, &w, &[1e-2]),
            Err(Error::NotTangent(_))
        ));
    }

    #[test]
    fn probe_converges_to_rayleigh() {
        let model = LocalModel::new(5, Target::MainTheorem).unwrap();
        let w = model.basis.vector(0);
        let rep = sharpness_probe(&model, &w, &[1e-1, 1e-2, 1e-3, 1e-4]).unwrap();
        assert!(rep.positive);
        assert!(rep.relative_error_at(1e-3).unwrap() < 0.02);
        assert!((rep.limit - rep.rayleigh).abs() / rep.rayleigh < 1e-3);
    }

    #[test]
    fn rectangle_scaling() {
        let rep = scaling_check(&rectangle(), 2.0).unwrap();
        assert_relative_eq!(rep.deficit_scaled, 16.0, epsilon = 1e-12);
        assert_relative_eq!(rep.angle_variance_scaled, rep.angle_variance, max_relative = 1e-12);
        let one = scaling_check(&rectangle(), 1.0).unwrap();
        assert_eq!(one.deficit, one.deficit_scaled);
        let tiny = scaling_check(&rectangle(), 1e-3).unwrap();
        assert!(tiny.ratio_scaled > 1e5 * tiny.ratio);
    }

    #[test]
    fn convex_holdout_against_estimate() {
        let est = estimate_cn(4, 2000, 3).unwrap();
        let rep = holdout_check(&est, 200, 99).unwrap();
        assert_eq!(rep.violations, 0, "{rep:?}");
        let mut rng = seeded_rng(5);
        let m = sample_convex(4, &mut rng, 1000).unwrap();
        let consts = Constants {
            c_n: Some(est.c_hat),
            side_variance: None,
        };
        assert!(verify(&m, &consts).unwrap().record("main_theorem").unwrap().pass);
    }
}
