//! Polygon representations and the scalar functionals of an n-gon.
//!
//! A polygon is held either as an ordered list of vertices ([`VertexPolygon`])
//! or as a point `(x; r)` of central angles and radii measured from the vertex
//! barycenter ([`ManifoldPoint`]). All indices are periodic mod n.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on each manifold constraint residual.
pub const CONSTRAINT_TOL: f64 = 1e-9;

/// Radii below this are treated as degenerate.
pub const MIN_RADIUS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        self.sub(other).norm()
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// Population variance, computed from deviations about the mean.
pub fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// The isoperimetric constant `4n tan(pi/n)` of the regular n-gon.
pub fn isoperimetric_constant(n: usize) -> f64 {
    4.0 * n as f64 * (PI / n as f64).tan()
}

/// Polar angles `theta_i = x_0 + ... + x_{i-1}` of the vertices.
pub fn polar_angles(x: &[f64]) -> Vec<f64> {
    let mut theta = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    for &xi in x {
        theta.push(acc);
        acc += xi;
    }
    theta
}

/// Side lengths `l_i = (r_{i+1}^2 + r_i^2 - 2 r_{i+1} r_i cos x_i)^{1/2}`.
pub fn side_lengths_xr(x: &[f64], r: &[f64]) -> Vec<f64> {
    let n = r.len();
    (0..n)
        .map(|i| {
            let (a, b) = (r[i], r[(i + 1) % n]);
            // Equivalent to the law of cosines, but without cancellation for small x_i.
            let half = (0.5 * x[i]).sin();
            ((a - b).powi(2) + 4.0 * a * b * half * half).max(0.0).sqrt()
        })
        .collect()
}

/// Signed area `1/2 sum r_i r_{i+1} sin x_i`.
pub fn area_xr(x: &[f64], r: &[f64]) -> f64 {
    let n = r.len();
    0.5 * (0..n).map(|i| r[i] * r[(i + 1) % n] * x[i].sin()).sum::<f64>()
}

/// Deficit `L^2 - 4n tan(pi/n) |P|` in `(x; r)` coordinates.
///
/// Defined on all of R^{2n} so that it can be differentiated off the manifold.
pub fn deficit_xr(x: &[f64], r: &[f64]) -> f64 {
    let perimeter: f64 = side_lengths_xr(x, r).iter().sum();
    perimeter * perimeter - isoperimetric_constant(r.len()) * area_xr(x, r)
}

/// `phi = n^2 (|P| sigma_a^2 + sigma_r^2)` in `(x; r)` coordinates.
pub fn phi_xr(x: &[f64], r: &[f64]) -> f64 {
    let n2 = (r.len() * r.len()) as f64;
    n2 * (area_xr(x, r) * variance(x) + variance(r))
}

/// Side-length variance in `(x; r)` coordinates.
pub fn side_variance_xr(x: &[f64], r: &[f64]) -> f64 {
    variance(&side_lengths_xr(x, r))
}

fn split(z: &[f64]) -> (&[f64], &[f64]) {
    z.split_at(z.len() / 2)
}

/// [`deficit_xr`] on concatenated coordinates `z = (x; r)`.
pub fn deficit_at(z: &[f64]) -> f64 {
    let (x, r) = split(z);
    deficit_xr(x, r)
}

/// [`phi_xr`] on concatenated coordinates `z = (x; r)`.
pub fn phi_at(z: &[f64]) -> f64 {
    let (x, r) = split(z);
    phi_xr(x, r)
}

/// [`side_variance_xr`] on concatenated coordinates `z = (x; r)`.
pub fn side_variance_at(z: &[f64]) -> f64 {
    let (x, r) = split(z);
    side_variance_xr(x, r)
}

/// Scalar functionals of a polygon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolygonSummary {
    pub n: usize,
    pub perimeter: f64,
    pub area: f64,
    pub side_square_sum: f64,
    pub deficit: f64,
    pub side_variance: f64,
    pub radius_variance: f64,
    pub angle_variance: f64,
    pub phi: f64,
}

impl PolygonSummary {
    fn from_parts(sides: &[f64], radii: &[f64], angles: &[f64], area: f64) -> Self {
        let n = sides.len();
        let perimeter: f64 = sides.iter().sum();
        let side_square_sum = sides.iter().map(|l| l * l).sum();
        let angle_variance = variance(angles);
        let radius_variance = variance(radii);
        PolygonSummary {
            n,
            perimeter,
            area,
            side_square_sum,
            deficit: perimeter * perimeter - isoperimetric_constant(n) * area,
            side_variance: variance(sides),
            radius_variance,
            angle_variance,
            phi: (n * n) as f64 * (area * angle_variance + radius_variance),
        }
    }

    /// Quantities of the polygon dilated by `factor` about its barycenter.
    pub fn rescaled(&self, factor: f64) -> Self {
        let f2 = factor * factor;
        PolygonSummary {
            n: self.n,
            perimeter: self.perimeter * factor,
            area: self.area * f2,
            side_square_sum: self.side_square_sum * f2,
            deficit: self.deficit * f2,
            side_variance: self.side_variance * f2,
            radius_variance: self.radius_variance * f2,
            angle_variance: self.angle_variance,
            phi: self.phi * f2,
        }
    }

    /// `sigma_r^2 + |P| sigma_a^2`, the left side of the main stability bound.
    pub fn stability_functional(&self) -> f64 {
        self.radius_variance + self.area * self.angle_variance
    }
}

/// Ordered planar vertex list, normalized to counterclockwise orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexPolygon {
    vertices: Vec<Point>,
    convex: bool,
}

fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    0.5 * (0..n)
        .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
        .sum::<f64>()
}

fn bbox_scale(vertices: &[Point]) -> f64 {
    let (mut lo, mut hi) = (vertices[0], vertices[0]);
    for p in vertices {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    hi.dist(lo)
}

impl VertexPolygon {
    /// Validates the vertex list and normalizes it to counterclockwise order,
    /// keeping the first vertex in place.
    pub fn from_vertices<P: Into<Point>>(points: impl IntoIterator<Item = P>) -> Result<Self> {
        let mut vertices: Vec<Point> = points.into_iter().map(Into::into).collect();
        let n = vertices.len();
        if n < 3 {
            return Err(Error::TooFewVertices(n));
        }
        let scale = bbox_scale(&vertices);
        for i in 0..n {
            let j = (i + 1) % n;
            if vertices[i].dist(vertices[j]) <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::DuplicateConsecutiveVertex(i, j));
            }
        }
        let area = signed_area(&vertices);
        if area.abs() <= 1e-14 * scale * scale {
            return Err(Error::DegenerateZeroArea);
        }
        if area < 0.0 {
            vertices[1..].reverse();
        }
        let convex = Self::check_convex(&vertices, scale);
        Ok(VertexPolygon { vertices, convex })
    }

    fn check_convex(vertices: &[Point], scale: f64) -> bool {
        let n = vertices.len();
        let tol = 1e-12 * scale * scale;
        let mut turning = 0.0;
        for i in 0..n {
            let e0 = vertices[(i + 1) % n].sub(vertices[i]);
            let e1 = vertices[(i + 2) % n].sub(vertices[(i + 1) % n]);
            let c = e0.cross(e1);
            if c < -tol {
                return false;
            }
            turning += c.atan2(e0.dot(e1));
        }
        if (turning - TAU).abs() > 1e-9 {
            return false;
        }
        let o = barycenter(vertices);
        (0..n).all(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            b.sub(a).cross(o.sub(a)) > tol
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    /// Convex with the vertex barycenter strictly inside.
    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn side_lengths(&self) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| self.vertices[i].dist(self.vertices[(i + 1) % n]))
            .collect()
    }

    pub fn perimeter(&self) -> f64 {
        self.side_lengths().iter().sum()
    }

    pub fn deficit(&self) -> f64 {
        let l = self.perimeter();
        l * l - isoperimetric_constant(self.n()) * self.area()
    }

    pub fn barycenter(&self) -> Point {
        barycenter(&self.vertices)
    }

    /// Signed central angles at the vertex barycenter, from `OA_i` to `OA_{i+1}`.
    pub fn central_angles(&self) -> Vec<f64> {
        let o = self.barycenter();
        let n = self.n();
        (0..n)
            .map(|i| {
                let a = self.vertices[i].sub(o);
                let b = self.vertices[(i + 1) % n].sub(o);
                a.cross(b).atan2(a.dot(b))
            })
            .collect()
    }

    pub fn radii(&self) -> Vec<f64> {
        let o = self.barycenter();
        self.vertices.iter().map(|v| v.dist(o)).collect()
    }

    fn checked_angles_and_radii(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let radii = self.radii();
        let scale = radii.iter().cloned().fold(0.0, f64::max);
        if let Some(i) = radii.iter().position(|&r| r < MIN_RADIUS * scale.max(1.0)) {
            return Err(Error::ZeroRadius(i));
        }
        let angles = self.central_angles();
        let angle_sum: f64 = angles.iter().sum();
        if angles.iter().any(|&a| a <= 0.0) || (angle_sum - TAU).abs() > CONSTRAINT_TOL {
            return Err(Error::BarycenterOutside { angle_sum });
        }
        Ok((angles, radii))
    }

    /// Maps the polygon to `(x; r)` coordinates, rescaling the radii to sum to n.
    ///
    /// Returns the manifold point and the applied scale `n / sum(r)`.
    pub fn to_manifold_point(&self) -> Result<(ManifoldPoint, f64)> {
        let (x, radii) = self.checked_angles_and_radii()?;
        let n = self.n() as f64;
        let scale = n / radii.iter().sum::<f64>();
        let r: Vec<f64> = radii.iter().map(|v| v * scale).collect();
        // Re-measured angles can drift from 2*pi by a few ulps.
        let drift = TAU / x.iter().sum::<f64>();
        let x = x.iter().map(|v| v * drift).collect();
        Ok((ManifoldPoint::new(x, r)?, scale))
    }

    /// All functionals in vertex space, using central angles at the vertex barycenter.
    pub fn summary(&self) -> Result<PolygonSummary> {
        let (angles, radii) = self.checked_angles_and_radii()?;
        let area = self.area();
        if area <= 0.0 {
            return Err(Error::NonpositiveArea(area));
        }
        let summary = PolygonSummary::from_parts(&self.side_lengths(), &radii, &angles, area);
        debug_assert!({
            let (m, scale) = self.to_manifold_point()?;
            let other = m.summary()?.rescaled(1.0 / scale);
            (other.deficit - summary.deficit).abs()
                <= 1e-9 * summary.perimeter.powi(2).max(1.0)
        });
        Ok(summary)
    }

    /// Dilates the polygon by `alpha` about its vertex barycenter.
    pub fn dilate(&self, alpha: f64) -> VertexPolygon {
        let o = self.barycenter();
        let vertices = self
            .vertices
            .iter()
            .map(|v| Point::new(o.x + alpha * (v.x - o.x), o.y + alpha * (v.y - o.y)))
            .collect();
        VertexPolygon {
            vertices,
            convex: self.convex,
        }
    }

    /// True when no two non-adjacent edges intersect.
    pub fn is_simple(&self) -> bool {
        is_simple(&self.vertices)
    }

    /// Parses the `x,y` per line format; `#` starts a comment.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected `x,y`, got {:?}",
                    lineno + 1,
                    raw
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            points.push(Point::new(parse(fields[0])?, parse(fields[1])?));
        }
        Self::from_vertices(points)
    }

    pub fn to_csv_string(&self) -> String {
        self.vertices
            .iter()
            .map(|p| format!("{},{}\n", p.x, p.y))
            .collect()
    }

    /// Builds a polygon without validation, used by the convexifier whose
    /// reflections preserve orientation and edge lengths.
    pub(crate) fn from_raw(vertices: Vec<Point>) -> Self {
        let scale = bbox_scale(&vertices);
        let convex = Self::check_convex(&vertices, scale);
        VertexPolygon { vertices, convex }
    }
}

pub(crate) fn barycenter(vertices: &[Point]) -> Point {
    let n = vertices.len() as f64;
    let (sx, sy) = vertices
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Point::new(sx / n, sy / n)
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    b.sub(a).cross(c.sub(a))
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

pub(crate) fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

pub(crate) fn is_simple(vertices: &[Point]) -> bool {
    let n = vertices.len();
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        for j in (i + 1)..n {
            // Skip adjacent edges.
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (vertices[j], vertices[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// A polygon in central-angle/radius coordinates, lying on the polygonal
/// manifold: angles sum to 2*pi, radii sum to n, and the vertex barycenter
/// sits at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ManifoldPointRecord", into = "ManifoldPointRecord")]
pub struct ManifoldPoint {
    x: Vec<f64>,
    r: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ManifoldPointRecord {
    n: usize,
    x: Vec<f64>,
    r: Vec<f64>,
}

impl TryFrom<ManifoldPointRecord> for ManifoldPoint {
    type Error = Error;

    fn try_from(rec: ManifoldPointRecord) -> Result<Self> {
        if rec.x.len() != rec.n {
            return Err(Error::DimensionMismatch {
                expected: rec.n,
                got: rec.x.len(),
            });
        }
        ManifoldPoint::new(rec.x, rec.r)
    }
}

impl From<ManifoldPoint> for ManifoldPointRecord {
    fn from(m: ManifoldPoint) -> Self {
        ManifoldPointRecord {
            n: m.n(),
            x: m.x,
            r: m.r,
        }
    }
}

impl fmt::Display for ManifoldPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(x = {:?}; r = {:?})", self.x, self.r)
    }
}

impl ManifoldPoint {
    /// Validates membership: nonnegative angles, radii above [`MIN_RADIUS`],
    /// and all four constraint residuals below [`CONSTRAINT_TOL`].
    pub fn new(x: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        if x.len() != r.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: r.len(),
            });
        }
        if x.len() < 3 {
            return Err(Error::TooFewVertices(x.len()));
        }
        if let Some(i) = x.iter().position(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidManifoldPoint(format!("x[{i}] = {} < 0", x[i])));
        }
        if let Some(i) = r.iter().position(|v| !(*v >= MIN_RADIUS)) {
            return Err(Error::InvalidManifoldPoint(format!(
                "r[{i}] = {} below {MIN_RADIUS:e}",
                r[i]
            )));
        }
        let res = crate::manifold::residuals(&x, &r);
        if res.max_abs() >= CONSTRAINT_TOL {
            return Err(Error::InvalidManifoldPoint(format!("{res:?}")));
        }
        Ok(ManifoldPoint { x, r })
    }

    /// Builds a point from concatenated coordinates `(x; r)`.
    pub fn from_coords(z: &[f64]) -> Result<Self> {
        if z.len() % 2 != 0 {
            return Err(Error::DimensionMismatch {
                expected: z.len() + 1,
                got: z.len(),
            });
        }
        let (x, r) = split(z);
        Self::new(x.to_vec(), r.to_vec())
    }

    /// The regular n-gon `(2pi/n, ..., 2pi/n; 1, ..., 1)`.
    pub fn regular(n: usize) -> Self {
        ManifoldPoint {
            x: vec![TAU / n as f64; n],
            r: vec![1.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(&self.r).copied().collect()
    }

    /// Vertices `A_i = r_i (cos theta_i, sin theta_i)`.
    pub fn vertex_points(&self) -> Vec<Point> {
        polar_angles(&self.x)
            .iter()
            .zip(&self.r)
            .map(|(t, r)| Point::new(r * t.cos(), r * t.sin()))
            .collect()
    }

    pub fn to_vertices(&self) -> Result<VertexPolygon> {
        VertexPolygon::from_vertices(self.vertex_points())
    }

    pub fn side_lengths(&self) -> Vec<f64> {
        side_lengths_xr(&self.x, &self.r)
    }

    pub fn area(&self) -> f64 {
        area_xr(&self.x, &self.r)
    }

    pub fn deficit(&self) -> f64 {
        deficit_xr(&self.x, &self.r)
    }

    pub fn summary(&self) -> Result<PolygonSummary> {
        let area = self.area();
        if area <= 0.0 {
            return Err(Error::NonpositiveArea(area));
        }
        Ok(PolygonSummary::from_parts(
            &self.side_lengths(),
            &self.r,
            &self.x,
            area,
        ))
    }

    /// Convexity of the vertex image: every angle below pi and every vertex turn
    /// to the left.
    pub fn is_convex(&self) -> bool {
        if self.x.iter().any(|&v| v >= PI) {
            return false;
        }
        let v = self.vertex_points();
        let n = v.len();
        let tol = 1e-12 * self.r.iter().cloned().fold(0.0, f64::max).powi(2);
        (0..n).all(|i| {
            let e0 = v[(i + 1) % n].sub(v[i]);
            let e1 = v[(i + 2) % n].sub(v[(i + 1) % n]);
            e0.cross(e1) >= -tol
        })
    }

    /// Cyclic relabeling: vertex `k` becomes vertex 0.
    ///
    /// The image is the same polygon rotated about the origin, so the point
    /// stays on the manifold.
    pub fn rotated(&self, k: usize) -> Self {
        let n = self.n();
        let k = k % n;
        let mut x = self.x.clone();
        let mut r = self.r.clone();
        x.rotate_left(k);
        r.rotate_left(k);
        ManifoldPoint { x, r }
    }

    /// Max-norm distance to the regular point.
    pub fn distance_to_regular(&self) -> f64 {
        let xs = TAU / self.n() as f64;
        self.x
            .iter()
            .map(|v| (v - xs).abs())
            .chain(self.r.iter().map(|v| (v - 1.0).abs()))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rectangle() -> VertexPolygon {
        VertexPolygon::from_vertices([(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (0.0, 1.0)]).unwrap()
    }

    #[test]
    fn rectangle_is_ccw_convex() {
        let p = rectangle();
        assert!(p.is_convex());
        assert_eq!(p.area(), 2.0);
    }

    #[test]
    fn clockwise_input_is_reversed() {
        let p = VertexPolygon::from_vertices([(0.0, 0.0), (0.0, 1.0), (2.0, 1.0), (2.0, 0.0)])
            .unwrap();
        assert_eq!(p, rectangle());
    }

    #[test]
    fn rejects_bad_vertex_lists() {
        assert_eq!(
            VertexPolygon::from_vertices([(0.0, 0.0), (1.0, 0.0)]),
            Err(Error::TooFewVertices(2))
        );
        assert_eq!(
            VertexPolygon::from_vertices([(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 1.0)]),
            Err(Error::DuplicateConsecutiveVertex(1, 2))
        );
        assert_eq!(
            VertexPolygon::from_vertices([(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]),
            Err(Error::DegenerateZeroArea)
        );
    }

    #[test]
    fn rectangle_vertex_summary() {
        let s = rectangle().summary().unwrap();
        assert_relative_eq!(s.perimeter, 6.0, epsilon = 1e-14);
        assert_relative_eq!(s.area, 2.0, epsilon = 1e-14);
        assert_relative_eq!(s.side_square_sum, 10.0, epsilon = 1e-14);
        assert_relative_eq!(s.deficit, 4.0, epsilon = 1e-13);
        assert_relative_eq!(s.side_variance, 0.25, epsilon = 1e-14);
        assert!(s.radius_variance.abs() < 1e-15);
        // Central angles alternate 2 atan(2) and 2 atan(1/2); both deviate from
        // pi/2 by 2 atan(2) - pi/2.
        let dev = 2.0 * 2f64.atan() - PI / 2.0;
        assert_relative_eq!(s.angle_variance, dev * dev, epsilon = 1e-14);
        assert!((s.angle_variance - 0.41416).abs() < 1e-4);
    }

    #[test]
    fn rectangle_manifold_image() {
        let (m, scale) = rectangle().to_manifold_point().unwrap();
        assert_relative_eq!(scale, 4.0 / (4.0 * 1.25f64.sqrt()), epsilon = 1e-15);
        for r in m.r() {
            assert_relative_eq!(*r, 1.0, epsilon = 1e-14);
        }
        let big = 2.0 * 2f64.atan();
        let small = 2.0 * 0.5f64.atan();
        for (i, x) in m.x().iter().enumerate() {
            let want = if i % 2 == 0 { big } else { small };
            assert_relative_eq!(*x, want, epsilon = 1e-14);
        }
        let sides = m.side_lengths();
        for (l, want) in sides.iter().zip([2.0, 1.0, 2.0, 1.0]) {
            assert_relative_eq!(*l, want * scale, epsilon = 1e-14);
        }
    }

    #[test]
    fn barycenter_outside_is_rejected() {
        // A thick C shape: the vertex mean falls in the hollow.
        let mut pts = Vec::new();
        for k in 0..=10 {
            let t = (-150.0 + 30.0 * k as f64).to_radians();
            pts.push((t.cos(), t.sin()));
        }
        for k in (0..=10).rev() {
            let t = (-150.0 + 30.0 * k as f64).to_radians();
            pts.push((0.8 * t.cos(), 0.8 * t.sin()));
        }
        let p = VertexPolygon::from_vertices(pts).unwrap();
        assert!(!p.is_convex());
        assert!(matches!(
            p.to_manifold_point(),
            Err(Error::BarycenterOutside { .. })
        ));
    }

    #[test]
    fn regular_points_map_to_regular_polygons() {
        let sq = ManifoldPoint::regular(4).to_vertices().unwrap();
        let want = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (v, w) in sq.vertices().iter().zip(want) {
            assert!((v.x - w.0).abs() < 1e-15 && (v.y - w.1).abs() < 1e-15);
        }
        let tri = ManifoldPoint::regular(3).to_vertices().unwrap();
        for l in tri.side_lengths() {
            assert_relative_eq!(l, 3f64.sqrt(), epsilon = 1e-15);
        }
        for v in tri.vertices() {
            assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn regular_side_lengths() {
        for l in ManifoldPoint::regular(4).side_lengths() {
            assert_relative_eq!(l, 2f64.sqrt(), epsilon = 1e-15);
        }
        for l in ManifoldPoint::regular(6).side_lengths() {
            assert_relative_eq!(l, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn regular_summary_is_equality_case() {
        for n in 3..=16 {
            let s = ManifoldPoint::regular(n).summary().unwrap();
            assert!(s.deficit.abs() < 1e-12, "n={n} deficit {}", s.deficit);
            assert!(s.side_variance.abs() < 1e-12);
            assert_eq!(s.radius_variance, 0.0);
            assert!(s.angle_variance.abs() < 1e-12);
            assert_relative_eq!(
                s.area,
                n as f64 / 2.0 * (TAU / n as f64).sin(),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn invalid_points_rejected() {
        let mut x = ManifoldPoint::regular(5).x().to_vec();
        x[0] *= 1.01;
        assert!(matches!(
            ManifoldPoint::new(x, vec![1.0; 5]),
            Err(Error::InvalidManifoldPoint(_))
        ));
        assert!(matches!(
            ManifoldPoint::new(vec![TAU / 3.0; 3], vec![1.0, 1.0, 0.0]),
            Err(Error::InvalidManifoldPoint(_))
        ));
    }

    #[test]
    fn json_shape() {
        let m = ManifoldPoint::regular(3);
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        assert_eq!(v["n"], 3);
        assert_eq!(v["r"], serde_json::json!([1.0, 1.0, 1.0]));
        let back: ManifoldPoint = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
        let bad = serde_json::json!({"n": 3, "x": [1.0, 1.0, 1.0], "r": [1.0, 1.0, 1.0]});
        assert!(serde_json::from_value::<ManifoldPoint>(bad).is_err());
    }

    #[test]
    fn csv_parsing() {
        let p = VertexPolygon::from_csv_str("# rectangle\n0,0\n2,0 # corner\n\n2,1\n0,1\n").unwrap();
        assert_eq!(p, rectangle());
        assert!(matches!(
            VertexPolygon::from_csv_str("0,0\n1\n"),
            Err(Error::Parse(_))
        ));
        assert_eq!(
            VertexPolygon::from_csv_str("0,0\n1,0\n"),
            Err(Error::TooFewVertices(2))
        );
    }
}
