//! Realizability predicates and the numerical realizer.
//!
//! Closed forms: the polygon inequality for cycles, the closure interval for
//! a chord completing a path, and the bordered squared-distance determinant
//! test for the complete graph on four vertices. The numerical side is a
//! damped Gauss-Newton multistart on the edge-residual vector; a negative
//! verdict is evidence, not proof.

use crate::geom::{det_small, solve_spd, Point};
use crate::graph::{GraphError, PinnedFrame, Realization, WeightedGraph};
use crate::interval::Interval;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RealizeError {
    #[error("a cycle needs at least 2 lengths, got {0}")]
    TooFewLengths(usize),
    #[error("closure interval needs at least 1 length")]
    EmptyPath,
    #[error("negative length supplied")]
    NegativeLength,
    #[error("subgraph realization invalid: residual {residual} exceeds {tolerance}")]
    BadSubRealization { residual: f64, tolerance: f64 },
    #[error("subgraph realization missing vertex {0:?}")]
    MissingVertex(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn check_nonneg(lengths: &[f64]) -> Result<(), RealizeError> {
    if lengths.iter().any(|&l| l < 0.0 || !l.is_finite()) {
        return Err(RealizeError::NegativeLength);
    }
    Ok(())
}

/// A closed cycle with these edge lengths is realizable iff the largest is at
/// most the sum of the others. A 2-cycle (parallel pair) needs equal lengths.
pub fn cycle_realizable(lengths: &[f64]) -> Result<bool, RealizeError> {
    if lengths.len() < 2 {
        return Err(RealizeError::TooFewLengths(lengths.len()));
    }
    check_nonneg(lengths)?;
    let sum: f64 = lengths.iter().sum();
    let max = lengths.iter().copied().fold(0.0, f64::max);
    Ok(2.0 * max <= sum)
}

/// Values of a closing edge that make path lengths + chord realizable:
/// `[max(0, 2*max - sum), sum]`.
pub fn cycle_closure_interval(path_lengths: &[f64]) -> Result<Interval, RealizeError> {
    if path_lengths.is_empty() {
        return Err(RealizeError::EmptyPath);
    }
    check_nonneg(path_lengths)?;
    let sum: f64 = path_lengths.iter().sum();
    let max = path_lengths.iter().copied().fold(0.0, f64::max);
    Ok(Interval::new((2.0 * max - sum).max(0.0), sum))
}

/// Edge lengths of the complete graph on `v1..v4`:
/// `a = l(v1v2)`, `b = l(v2v4)`, `c = l(v3v4)`, `d = l(v1v3)`,
/// `alpha = l(v2v3)`, `beta = l(v1v4)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct K4Lengths {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl K4Lengths {
    pub fn new(a: f64, b: f64, c: f64, d: f64, alpha: f64, beta: f64) -> Self {
        K4Lengths { a, b, c, d, alpha, beta }
    }

    pub fn max_length(&self) -> f64 {
        [self.a, self.b, self.c, self.d, self.alpha, self.beta]
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// Pairwise distances measured between four explicit points, mapped onto
    /// the labeling above.
    pub fn from_points(p1: Point, p2: Point, p3: Point, p4: Point) -> Self {
        K4Lengths {
            a: p1.dist(p2),
            b: p2.dist(p4),
            c: p3.dist(p4),
            d: p1.dist(p3),
            alpha: p2.dist(p3),
            beta: p1.dist(p4),
        }
    }

    pub fn to_graph(&self) -> WeightedGraph {
        WeightedGraph::from_edges(
            &["v1", "v2", "v3", "v4"],
            &[
                ("v1", "v2", self.a),
                ("v2", "v4", self.b),
                ("v3", "v4", self.c),
                ("v1", "v3", self.d),
                ("v2", "v3", self.alpha),
                ("v1", "v4", self.beta),
            ],
        )
    }
}

/// Determinant of the 5x5 bordered matrix of squared distances
/// (rows/columns: border, v1, v2, v3, v4). Vanishes exactly when the four
/// points fit in the plane.
pub fn cayley_menger_det(k: &K4Lengths) -> f64 {
    let (a2, b2, c2, d2) = (k.a * k.a, k.b * k.b, k.c * k.c, k.d * k.d);
    let (al2, be2) = (k.alpha * k.alpha, k.beta * k.beta);
    let m = vec![
        vec![0.0, 1.0, 1.0, 1.0, 1.0],
        vec![1.0, 0.0, a2, d2, be2],
        vec![1.0, a2, 0.0, al2, b2],
        vec![1.0, d2, al2, 0.0, c2],
        vec![1.0, be2, b2, c2, 0.0],
    ];
    det_small(&m)
}

/// Scale-aware tolerance for the determinant zero test (degree-8 in lengths).
pub fn cayley_menger_tolerance(k: &K4Lengths) -> f64 {
    let l = k.max_length();
    1e-9 * (1.0 + l * l).powi(4)
}

/// Planar realizability of the weighted complete graph on four vertices:
/// every face triangle satisfies its three inequalities and the bordered
/// determinant vanishes to scaled tolerance.
pub fn k4_realizable(k: &K4Lengths) -> bool {
    let triangle = |x: f64, y: f64, z: f64| x <= y + z && y <= x + z && z <= x + y;
    // faces: v1v2v4, v2v3v4, v1v3v4, v1v2v3
    triangle(k.a, k.b, k.beta)
        && triangle(k.b, k.c, k.alpha)
        && triangle(k.c, k.d, k.beta)
        && triangle(k.d, k.a, k.alpha)
        && cayley_menger_det(k).abs() <= cayley_menger_tolerance(k)
}

pub const FEASIBILITY_REL_TOL: f64 = 1e-7;

/// Success tolerance for a graph: `1e-7 * (1 + max length)`.
pub fn feasibility_tolerance(g: &WeightedGraph) -> f64 {
    FEASIBILITY_REL_TOL * (1.0 + g.max_length())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Realized,
    NoRealizationFound,
}

/// Result of a multistart least-squares realization attempt.
#[derive(Clone, Debug, Serialize)]
pub struct RealizeReport {
    pub verdict: Verdict,
    pub best_residual: f64,
    pub restarts_used: usize,
    pub best_realization: Realization,
    pub per_edge_residuals: Vec<f64>,
    /// Histogram of best-per-restart max residuals over decade bins
    /// `[1e-16, 1e-15), ... [1e0, inf)`; makes a negative verdict auditable.
    pub residual_histogram: Vec<HistogramBin>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HistogramBin {
    pub upper_bound: f64,
    pub count: usize,
}

fn histogram(residuals: &[f64]) -> Vec<HistogramBin> {
    let mut bins: Vec<HistogramBin> = (-16..=0)
        .map(|e| HistogramBin { upper_bound: 10f64.powi(e), count: 0 })
        .collect();
    bins.push(HistogramBin { upper_bound: f64::INFINITY, count: 0 });
    for &r in residuals {
        let idx = bins
            .iter()
            .position(|b| r < b.upper_bound)
            .unwrap_or(bins.len() - 1);
        bins[idx].count += 1;
    }
    bins
}

/// Internal fixed-gauge least-squares problem over free vertex coordinates.
struct Problem<'g> {
    graph: &'g WeightedGraph,
    /// vertex index -> column offset in x, or None when pinned
    var_of: Vec<Option<usize>>,
    pinned_pos: Vec<Option<Point>>,
    edges: Vec<(usize, usize, f64)>,
    n_vars: usize,
}

impl<'g> Problem<'g> {
    fn new(graph: &'g WeightedGraph, pins: &[(usize, Point)]) -> Self {
        let n = graph.vertices.len();
        let mut var_of = vec![None; n];
        let mut pinned_pos = vec![None; n];
        for &(vi, p) in pins {
            pinned_pos[vi] = Some(p);
        }
        let mut k = 0;
        for (i, slot) in pinned_pos.iter().enumerate() {
            if slot.is_none() {
                var_of[i] = Some(k);
                k += 1;
            }
        }
        let vidx: BTreeMap<&str, usize> =
            graph.vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let edges = graph
            .edges
            .iter()
            .map(|e| (vidx[e.u.as_str()], vidx[e.v.as_str()], e.length))
            .collect();
        Problem { graph, var_of, pinned_pos, edges, n_vars: 2 * k }
    }

    fn position(&self, x: &[f64], vi: usize) -> Point {
        match self.var_of[vi] {
            Some(col) => Point::new(x[2 * col], x[2 * col + 1]),
            None => self.pinned_pos[vi].unwrap(),
        }
    }

    fn residuals(&self, x: &[f64]) -> Vec<f64> {
        self.edges
            .iter()
            .map(|&(u, v, l)| self.position(x, u).dist(self.position(x, v)) - l)
            .collect()
    }

    /// Sum of squared residuals and its analytic gradient.
    fn value_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut f = 0.0;
        let mut g = vec![0.0; self.n_vars];
        for &(u, v, l) in &self.edges {
            let pu = self.position(x, u);
            let pv = self.position(x, v);
            let diff = pu - pv;
            let d = diff.norm();
            let r = d - l;
            f += r * r;
            if d > 1e-300 {
                let s = 2.0 * r / d;
                if let Some(cu) = self.var_of[u] {
                    g[2 * cu] += s * diff.x;
                    g[2 * cu + 1] += s * diff.y;
                }
                if let Some(cv) = self.var_of[v] {
                    g[2 * cv] -= s * diff.x;
                    g[2 * cv + 1] -= s * diff.y;
                }
            }
        }
        (f, g)
    }

    /// One damped Gauss-Newton descent run, in place. Stops when the gradient
    /// norm drops below 1e-12 (scaled) or after `max_iter` iterations.
    fn descend(&self, x: &mut Vec<f64>, max_iter: usize) -> f64 {
        let m = self.edges.len();
        let n = self.n_vars;
        if n == 0 {
            let r = self.residuals(x);
            return r.iter().map(|v| v * v).sum();
        }
        let mut lambda = 1e-3;
        let (mut f, _) = self.value_and_grad(x);
        for _ in 0..max_iter {
            // Jacobian rows of residual vector
            let mut jt_j = vec![vec![0.0; n]; n];
            let mut jt_r = vec![0.0; n];
            let mut rows: Vec<(usize, [f64; 4], [Option<usize>; 2], f64)> = Vec::with_capacity(m);
            for (ei, &(u, v, l)) in self.edges.iter().enumerate() {
                let pu = self.position(x, u);
                let pv = self.position(x, v);
                let diff = pu - pv;
                let d = diff.norm();
                let r = d - l;
                let (dx, dy) = if d > 1e-300 { (diff.x / d, diff.y / d) } else { (0.0, 0.0) };
                rows.push((ei, [dx, dy, -dx, -dy], [self.var_of[u], self.var_of[v]], r));
            }
            for (_, row, cols, r) in &rows {
                let entries: [(Option<usize>, f64, f64); 2] =
                    [(cols[0], row[0], row[1]), (cols[1], row[2], row[3])];
                for &(c1, gx1, gy1) in &entries {
                    let Some(c1) = c1 else { continue };
                    jt_r[2 * c1] += gx1 * r;
                    jt_r[2 * c1 + 1] += gy1 * r;
                    for &(c2, gx2, gy2) in &entries {
                        let Some(c2) = c2 else { continue };
                        jt_j[2 * c1][2 * c2] += gx1 * gx2;
                        jt_j[2 * c1][2 * c2 + 1] += gx1 * gy2;
                        jt_j[2 * c1 + 1][2 * c2] += gy1 * gx2;
                        jt_j[2 * c1 + 1][2 * c2 + 1] += gy1 * gy2;
                    }
                }
            }
            let grad_norm = (jt_r.iter().map(|v| 4.0 * v * v).sum::<f64>()).sqrt();
            if grad_norm <= 1e-12 || f <= 1e-30 {
                break;
            }
            // try damped steps until improvement
            let mut accepted = false;
            for _ in 0..12 {
                let mut a = jt_j.clone();
                for (i, row) in a.iter_mut().enumerate() {
                    row[i] += lambda * (1.0 + row[i]);
                }
                let rhs: Vec<f64> = jt_r.iter().map(|v| -v).collect();
                if let Some(step) = solve_spd(&a, &rhs) {
                    let x_new: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
                    let (f_new, _) = self.value_and_grad(&x_new);
                    if f_new < f {
                        *x = x_new;
                        f = f_new;
                        lambda = (lambda / 3.0).max(1e-12);
                        accepted = true;
                        break;
                    }
                }
                lambda *= 4.0;
            }
            if !accepted {
                break;
            }
        }
        f
    }

    fn realization(&self, x: &[f64]) -> Realization {
        let positions = self
            .graph
            .vertices
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), self.position(x, i)))
            .collect();
        Realization::new(positions)
    }

    fn max_edge_residual(&self, x: &[f64]) -> f64 {
        self.residuals(x).iter().fold(0.0f64, |m, r| m.max(r.abs()))
    }
}

const MAX_DESCENT_ITER: usize = 500;

fn run_multistart(
    g: &WeightedGraph,
    pins: &[(usize, Point)],
    restarts: usize,
    seed: u64,
) -> Result<RealizeReport, RealizeError> {
    g.require_valid()?;
    let problem = Problem::new(g, pins);
    let tol = feasibility_tolerance(g);
    let radius = g.total_length().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_x: Option<Vec<f64>> = None;
    let mut best_res = f64::INFINITY;
    let mut per_restart = Vec::with_capacity(restarts);
    let mut used = 0;
    for _ in 0..restarts.max(1) {
        used += 1;
        // uniform in a disk of radius = sum of lengths: any realization fits
        let mut x: Vec<f64> = Vec::with_capacity(problem.n_vars);
        for _ in 0..problem.n_vars / 2 {
            let r = radius * rng.gen::<f64>().sqrt();
            let t = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            x.push(r * t.cos());
            x.push(r * t.sin());
        }
        problem.descend(&mut x, MAX_DESCENT_ITER);
        let res = problem.max_edge_residual(&x);
        per_restart.push(res);
        if res < best_res {
            best_res = res;
            best_x = Some(x);
        }
        if best_res <= tol * 1e-2 {
            break;
        }
    }
    let x = best_x.expect("at least one restart ran");
    let verdict = if best_res <= tol { Verdict::Realized } else { Verdict::NoRealizationFound };
    Ok(RealizeReport {
        verdict,
        best_residual: best_res,
        restarts_used: used,
        per_edge_residuals: problem.residuals(&x).iter().map(|r| r.abs()).collect(),
        best_realization: problem.realization(&x),
        residual_histogram: histogram(&per_restart),
    })
}

/// Multistart least-squares realization of a weighted graph in the plane.
/// Deterministic for a given seed. `Realized` iff the best max-edge residual
/// is at most `1e-7 * (1 + max length)`.
pub fn attempt_realize(g: &WeightedGraph, restarts: usize, seed: u64) -> Result<RealizeReport, RealizeError> {
    run_multistart(g, &[], restarts, seed)
}

/// Same, with the gauge fixed: `pin.origin_vertex` at the origin and
/// `pin.axis_vertex` on the positive x-axis at the pinned edge length.
pub fn attempt_realize_pinned(
    g: &WeightedGraph,
    pin: &PinnedFrame,
    restarts: usize,
    seed: u64,
) -> Result<RealizeReport, RealizeError> {
    let len = pin.pinned_length(g)?;
    let oi = g
        .vertex_index(&pin.origin_vertex)
        .ok_or_else(|| GraphError::UnknownVertex(pin.origin_vertex.clone()))?;
    let ai = g
        .vertex_index(&pin.axis_vertex)
        .ok_or_else(|| GraphError::UnknownVertex(pin.axis_vertex.clone()))?;
    run_multistart(g, &[(oi, Point::ORIGIN), (ai, Point::new(len, 0.0))], restarts, seed)
}

/// Refine an explicit starting realization under a pinned gauge (used for
/// path-certificate reprojection). Returns the refined realization and its
/// max edge residual.
pub fn refine_pinned(
    g: &WeightedGraph,
    pin: &PinnedFrame,
    start: &Realization,
    max_iter: usize,
) -> Result<(Realization, f64), RealizeError> {
    let len = pin.pinned_length(g)?;
    let oi = g
        .vertex_index(&pin.origin_vertex)
        .ok_or_else(|| GraphError::UnknownVertex(pin.origin_vertex.clone()))?;
    let ai = g
        .vertex_index(&pin.axis_vertex)
        .ok_or_else(|| GraphError::UnknownVertex(pin.axis_vertex.clone()))?;
    let problem = Problem::new(g, &[(oi, Point::ORIGIN), (ai, Point::new(len, 0.0))]);
    let mut x = vec![0.0; problem.n_vars];
    for (vi, name) in g.vertices.iter().enumerate() {
        if let Some(col) = problem.var_of[vi] {
            let p = start.get(name).ok_or_else(|| RealizeError::MissingVertex(name.clone()))?;
            x[2 * col] = p.x;
            x[2 * col + 1] = p.y;
        }
    }
    problem.descend(&mut x, max_iter);
    let res = problem.max_edge_residual(&x);
    Ok((problem.realization(&x), res))
}

/// Objective value and analytic gradient of the pinned least-squares problem
/// at an explicit point; exposed for gradient verification.
pub fn objective_and_gradient(
    g: &WeightedGraph,
    x: &[f64],
) -> (f64, Vec<f64>) {
    let problem = Problem::new(g, &[]);
    assert_eq!(x.len(), problem.n_vars, "expected {} coordinates", problem.n_vars);
    problem.value_and_grad(x)
}

/// Extend the length function of `g` so the whole graph becomes realizable,
/// given a valid realization of the subgraph spanned by `sub_edges`.
///
/// Vertices not placed by the subgraph realization are put at distinct
/// default positions (k, k+1); every edge outside the subgraph is then
/// assigned the measured distance, so the result is realizable by
/// construction.
pub fn extend_to_realizable(
    g: &WeightedGraph,
    sub_edges: &[usize],
    sub_real: &Realization,
) -> Result<WeightedGraph, RealizeError> {
    g.require_valid()?;
    let sub = g.induced_sublengths(sub_edges)?;
    let tol = 1e-9 * (1.0 + g.max_length());
    let mut touched: std::collections::BTreeSet<&str> = std::collections::BTreeSet::new();
    for e in &sub.edges {
        touched.insert(&e.u);
        touched.insert(&e.v);
    }
    for v in &touched {
        if sub_real.get(v).is_none() {
            return Err(RealizeError::MissingVertex(v.to_string()));
        }
    }
    let mut worst = 0.0f64;
    for e in &sub.edges {
        worst = worst.max(sub_real.edge_residual(e).unwrap());
    }
    if worst > tol {
        return Err(RealizeError::BadSubRealization { residual: worst, tolerance: tol });
    }

    let mut positions: BTreeMap<String, Point> = BTreeMap::new();
    for v in &touched {
        positions.insert(v.to_string(), sub_real.get(v).unwrap());
    }
    let mut k = 0usize;
    for name in &g.vertices {
        if !positions.contains_key(name) {
            positions.insert(name.clone(), Point::new(k as f64, k as f64 + 1.0));
            k += 1;
        }
    }
    let full = Realization::new(positions);
    let sub_set: std::collections::BTreeSet<usize> = sub_edges.iter().copied().collect();
    let mut out = g.clone();
    for (i, e) in out.edges.iter_mut().enumerate() {
        if !sub_set.contains(&i) {
            e.length = full.get(&e.u).unwrap().dist(full.get(&e.v).unwrap());
        }
    }
    Ok(out)
}
