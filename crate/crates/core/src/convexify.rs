//! Erdős–Nagy pocket flips: reflect a chain of vertices lying inside the
//! convex hull across its hull edge until the polygon is convex. Each flip
//! keeps every side length, so the perimeter is invariant while the area
//! grows.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::polygon::{is_simple, Point, VertexPolygon};

/// Default flip budget.
pub const DEFAULT_MAX_FLIPS: usize = 10_000;

/// A maximal chain of vertices inside the convex hull, closed off by the
/// hull edge `lid`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Pocket {
    pub lid: (usize, usize),
    pub vertices: Vec<usize>,
}

fn scale_of(vertices: &[Point]) -> f64 {
    vertices
        .iter()
        .fold(0.0, |m: f64, p| m.max(p.x.abs()).max(p.y.abs()))
        .max(f64::MIN_POSITIVE)
}

/// Indices of convex-hull vertices in increasing order, collinear points dropped.
fn hull_indices(vertices: &[Point], tol: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vertices.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (vertices[a], vertices[b]);
        p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y))
    });
    let turn = |o: usize, a: usize, b: usize| {
        vertices[a].sub(vertices[o]).cross(vertices[b].sub(vertices[o]))
    };
    let mut hull: Vec<usize> = Vec::with_capacity(2 * order.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(order.iter())
        } else {
            Box::new(order.iter().rev())
        };
        for &i in iter {
            while hull.len() >= start + 2
                && turn(hull[hull.len() - 2], hull[hull.len() - 1], i) <= tol
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull.sort_unstable();
    hull.dedup();
    hull
}

fn distance_to_line(p: Point, a: Point, b: Point) -> f64 {
    let d = b.sub(a);
    d.cross(p.sub(a)).abs() / d.norm()
}

/// Pockets of a simple polygon, ordered by the index of their first lid vertex.
pub fn pockets(p: &VertexPolygon) -> Result<Vec<Pocket>> {
    if !p.is_simple() {
        return Err(Error::NotSimple);
    }
    Ok(pockets_unchecked(p.vertices()))
}

fn pockets_unchecked(vertices: &[Point]) -> Vec<Pocket> {
    let n = vertices.len();
    let scale = scale_of(vertices);
    let hull = hull_indices(vertices, 1e-12 * scale * scale);
    let mut out = Vec::new();
    for (k, &a) in hull.iter().enumerate() {
        let b = hull[(k + 1) % hull.len()];
        let chain: Vec<usize> = (1..n)
            .map(|s| (a + s) % n)
            .take_while(|&i| i != b)
            .collect();
        if chain.is_empty() {
            continue;
        }
        let inside = chain
            .iter()
            .any(|&i| distance_to_line(vertices[i], vertices[a], vertices[b]) > 1e-12 * scale);
        if inside {
            out.push(Pocket {
                lid: (a, b),
                vertices: chain,
            });
        }
    }
    out
}

fn reflect(p: Point, a: Point, b: Point) -> Point {
    let d = b.sub(a);
    let d = Point::new(d.x / d.norm(), d.y / d.norm());
    let v = p.sub(a);
    let along = d.dot(v);
    Point::new(a.x + 2.0 * along * d.x - v.x, a.y + 2.0 * along * d.y - v.y)
}

/// Reflects the pocket's vertices across its lid line.
pub fn flip(p: &VertexPolygon, pocket: &Pocket) -> Result<VertexPolygon> {
    let mut vertices = p.vertices().to_vec();
    let (a, b) = (vertices[pocket.lid.0], vertices[pocket.lid.1]);
    for &i in &pocket.vertices {
        vertices[i] = reflect(vertices[i], a, b);
    }
    if !is_simple(&vertices) {
        return Err(Error::ReflectionCreatesSelfIntersection(pocket.vertices.clone()));
    }
    let flipped = VertexPolygon::from_raw(vertices);
    if flipped.area() <= p.area() {
        return Err(Error::ReflectionCreatesSelfIntersection(pocket.vertices.clone()));
    }
    Ok(flipped)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlipStep {
    pub step: usize,
    /// `None` for the initial polygon.
    pub pocket: Option<Pocket>,
    pub vertices: Vec<Point>,
    pub perimeter: f64,
    pub area: f64,
    pub deficit: f64,
}

impl FlipStep {
    fn new(step: usize, pocket: Option<Pocket>, p: &VertexPolygon) -> Self {
        FlipStep {
            step,
            pocket,
            vertices: p.vertices().to_vec(),
            perimeter: p.perimeter(),
            area: p.area(),
            deficit: p.deficit(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlipTrace {
    pub steps: Vec<FlipStep>,
}

impl FlipTrace {
    pub fn flips(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    /// Largest relative perimeter deviation from the initial polygon.
    pub fn perimeter_drift(&self) -> f64 {
        let p0 = self.steps[0].perimeter;
        self.steps
            .iter()
            .fold(0.0, |m: f64, s| m.max((s.perimeter - p0).abs() / p0))
    }

    pub fn area_strictly_increasing(&self) -> bool {
        self.steps.windows(2).all(|w| w[1].area > w[0].area)
    }

    pub fn deficit_nonincreasing(&self) -> bool {
        self.steps.windows(2).all(|w| {
            w[1].deficit <= w[0].deficit + 1e-12 * w[0].perimeter.powi(2)
        })
    }
}

/// Flips the lowest-index pocket until none remain.
pub fn convexify(p: &VertexPolygon, max_flips: usize) -> Result<(VertexPolygon, FlipTrace)> {
    if !p.is_simple() {
        return Err(Error::NotSimple);
    }
    let mut current = p.clone();
    let mut steps = vec![FlipStep::new(0, None, &current)];
    loop {
        let Some(pocket) = pockets_unchecked(current.vertices()).into_iter().next() else {
            break;
        };
        if steps.len() > max_flips {
            return Err(Error::FlipBudgetExhausted(max_flips));
        }
        current = flip(&current, &pocket)?;
        steps.push(FlipStep::new(steps.len(), Some(pocket), &current));
    }
    Ok((current, FlipTrace { steps }))
}

/// Random simple polygon: sorted random polar angles with random radii,
/// star-shaped about the origin.
pub fn random_star_polygon<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> VertexPolygon {
    use std::f64::consts::TAU;
    loop {
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let pts: Vec<Point> = angles
            .iter()
            .map(|t| {
                let r = rng.random_range(0.2..1.0);
                Point::new(r * t.cos(), r * t.sin())
            })
            .collect();
        if let Ok(p) = VertexPolygon::from_vertices(pts) {
            if p.is_simple() {
                return p;
            }
        }
    }
}
