//! Staged realizable extension for the weighted complete bipartite graph on
//! 3+3 vertices.
//!
//! Stage chain: the open path (a..e) closes into a hexagon by choosing `f`,
//! gains the long chord `alpha`, then `beta`, then `gamma`. Each stage's
//! feasible set is computed in closed form where one exists (closure
//! intervals, arc distance sets) and by a one-parameter branch sweep for the
//! final stage: pin `v4` at the origin and `v1` on the x-axis, parametrize
//! the position of `v6` by its angle around `v1`, and resolve `v5`, `v3`,
//! `v2` through two-circle intersections with an explicit +/- branch choice
//! each. Every pinned configuration is reached by some (angle, branch
//! triple), so the image of the emitted chord values is the feasible set.

use crate::arc::{arc_distance_set, circle_annulus_arcs, CircleArcSet, StageBounds};
use crate::geom::{circle_circle, CircleCircle, Point, Sign};
use crate::graph::WeightedGraph;
use crate::interval::{Interval, IntervalSet};
use crate::realize::{cycle_closure_interval, RealizeError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

/// Minimum sweep resolution for reliable region detection.
pub const MIN_RESOLUTION: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    F,
    Alpha,
    Beta,
    Gamma,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::F => "f",
            Stage::Alpha => "alpha",
            Stage::Beta => "beta",
            Stage::Gamma => "gamma",
        };
        write!(f, "{s}")
    }
}

/// Hexagon edge lengths `a..f` plus the three chords, later stages optional.
///
/// Labeling: `a = l(v1v6)`, `b = l(v1v2)`, `c = l(v2v3)`, `d = l(v3v4)`,
/// `e = l(v4v5)`, `f = l(v5v6)`, `alpha = l(v1v4)`, `beta = l(v3v6)`,
/// `gamma = l(v2v5)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct K33Lengths {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

#[derive(Debug, Error)]
pub enum StageError {
    #[error("negative or non-finite length")]
    BadLength,
    #[error("stage fields must form a contiguous prefix (f, alpha, beta, gamma)")]
    NonContiguous,
    #[error("stage {stage} value missing")]
    Missing { stage: Stage },
    #[error("chosen {stage} = {value} lies outside the feasible set {set}")]
    OutOfStage { stage: Stage, value: f64, set: IntervalSet },
    #[error("empty workspace: stage-two lengths admit no position for {vertex}")]
    EmptyWorkspace { vertex: &'static str },
    #[error("resolution {0} too low; need at least {MIN_RESOLUTION}")]
    ResolutionTooLow(usize),
    #[error(transparent)]
    Realize(#[from] RealizeError),
}

impl K33Lengths {
    pub fn chain(a: f64, b: f64, c: f64, d: f64, e: f64) -> Self {
        K33Lengths { a, b, c, d, e, f: None, alpha: None, beta: None, gamma: None }
    }

    pub fn with_f(mut self, f: f64) -> Self {
        self.f = Some(f);
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    /// 5 to 9 values in the order a,b,c,d,e,f,alpha,beta,gamma.
    pub fn from_values(vals: &[f64]) -> Result<Self, StageError> {
        if !(5..=9).contains(&vals.len()) {
            return Err(StageError::NonContiguous);
        }
        let mut l = K33Lengths::chain(vals[0], vals[1], vals[2], vals[3], vals[4]);
        if vals.len() > 5 {
            l.f = Some(vals[5]);
        }
        if vals.len() > 6 {
            l.alpha = Some(vals[6]);
        }
        if vals.len() > 7 {
            l.beta = Some(vals[7]);
        }
        if vals.len() > 8 {
            l.gamma = Some(vals[8]);
        }
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<(), StageError> {
        let all = [
            Some(self.a),
            Some(self.b),
            Some(self.c),
            Some(self.d),
            Some(self.e),
            self.f,
            self.alpha,
            self.beta,
            self.gamma,
        ];
        for v in all.iter().flatten() {
            if !v.is_finite() || *v < 0.0 {
                return Err(StageError::BadLength);
            }
        }
        // later-stage fields require all earlier ones
        let stages = [self.f, self.alpha, self.beta, self.gamma];
        let mut seen_gap = false;
        for s in stages {
            match (s, seen_gap) {
                (Some(_), true) => return Err(StageError::NonContiguous),
                (None, _) => seen_gap = true,
                _ => {}
            }
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.a
            + self.b
            + self.c
            + self.d
            + self.e
            + self.f.unwrap_or(0.0)
            + self.alpha.unwrap_or(0.0)
            + self.beta.unwrap_or(0.0)
            + self.gamma.unwrap_or(0.0)
    }

    fn need(&self, stage: Stage) -> Result<f64, StageError> {
        let v = match stage {
            Stage::F => self.f,
            Stage::Alpha => self.alpha,
            Stage::Beta => self.beta,
            Stage::Gamma => self.gamma,
        };
        v.ok_or(StageError::Missing { stage })
    }

    /// Full weighted graph on vertices v1..v6 (requires all nine lengths).
    pub fn to_graph(&self) -> Result<WeightedGraph, StageError> {
        let f = self.need(Stage::F)?;
        let alpha = self.need(Stage::Alpha)?;
        let beta = self.need(Stage::Beta)?;
        let gamma = self.need(Stage::Gamma)?;
        Ok(WeightedGraph::from_edges(
            &["v1", "v2", "v3", "v4", "v5", "v6"],
            &[
                ("v6", "v1", self.a),
                ("v1", "v2", self.b),
                ("v2", "v3", self.c),
                ("v3", "v4", self.d),
                ("v4", "v5", self.e),
                ("v5", "v6", f),
                ("v1", "v4", alpha),
                ("v2", "v5", gamma),
                ("v3", "v6", beta),
            ],
        ))
    }

    /// Read the nine lengths back out of a canonical graph (vertices named
    /// v1..v6 with the standard edge set, in any order).
    pub fn from_graph(g: &WeightedGraph) -> Result<Self, StageError> {
        let find = |x: &str, y: &str| -> Result<f64, StageError> {
            g.edges
                .iter()
                .find(|e| (e.u == x && e.v == y) || (e.u == y && e.v == x))
                .map(|e| e.length)
                .ok_or(StageError::NonContiguous)
        };
        let a = find("v1", "v6")?;
        let b = find("v1", "v2")?;
        let c = find("v2", "v3")?;
        let d = find("v3", "v4")?;
        let e = find("v4", "v5")?;
        let f = find("v5", "v6")?;
        let alpha = find("v1", "v4")?;
        let beta = find("v3", "v6")?;
        let gamma = find("v2", "v5")?;
        let l = K33Lengths::chain(a, b, c, d, e)
            .with_f(f)
            .with_alpha(alpha)
            .with_beta(beta)
            .with_gamma(gamma);
        l.validate()?;
        Ok(l)
    }
}

/// Feasible set of one extension stage.
#[derive(Clone, Debug, Serialize)]
pub struct StageReport {
    pub stage: Stage,
    pub feasible_set: IntervalSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<StageBounds>,
}

fn containment_tol(l: &K33Lengths) -> f64 {
    1e-9 * (1.0 + l.total())
}

/// Hexagon-closing values of `f` given the open chain a..e.
pub fn f_interval(l: &K33Lengths) -> Result<StageReport, StageError> {
    l.validate()?;
    let iv = cycle_closure_interval(&[l.a, l.b, l.c, l.d, l.e])?;
    Ok(StageReport { stage: Stage::F, feasible_set: IntervalSet::single(iv), bounds: None })
}

/// Long-chord values: intersection of the closure intervals of the two
/// three-edge paths between `v1` and `v4`, with the doubled maxima recorded.
pub fn alpha_interval(l: &K33Lengths) -> Result<StageReport, StageError> {
    l.validate()?;
    let f = l.need(Stage::F)?;
    let f_set = f_interval(l)?.feasible_set;
    if f_set.distance_to(f) > containment_tol(l) {
        return Err(StageError::OutOfStage { stage: Stage::F, value: f, set: f_set });
    }
    let mu1 = 2.0 * l.a.max(l.e).max(f);
    let mu2 = 2.0 * l.b.max(l.c).max(l.d);
    let s1 = l.a + l.e + f;
    let s2 = l.b + l.c + l.d;
    let i1 = Interval::new((mu1 - s1).max(0.0), s1);
    let i2 = Interval::new((mu2 - s2).max(0.0), s2);
    let set = IntervalSet::single(i1).intersect(&IntervalSet::single(i2));
    // a realizable hexagon always admits some chord value
    assert!(!set.is_empty(), "alpha interval empty despite f being feasible");
    let bounds = StageBounds { mu1: Some(mu1), mu2: Some(mu2), ..StageBounds::default() };
    Ok(StageReport { stage: Stage::Alpha, feasible_set: set, bounds: Some(bounds) })
}

/// Pinned stage-two workspaces: with `v4` at the origin and `v1` at
/// `(alpha, 0)`, the locus of `v3` on its radius-`d` circle and of `v6` on
/// its radius-`a` circle, each cut by the annulus reachable through its
/// two-edge chain. Returns `(w3, w6)`.
pub fn workspaces(l: &K33Lengths) -> Result<(CircleArcSet, CircleArcSet), StageError> {
    l.validate()?;
    let f = l.need(Stage::F)?;
    let alpha = l.need(Stage::Alpha)?;
    let a_set = alpha_interval(l)?.feasible_set;
    if a_set.distance_to(alpha) > containment_tol(l) {
        return Err(StageError::OutOfStage { stage: Stage::Alpha, value: alpha, set: a_set });
    }
    let w6 = circle_annulus_arcs(alpha, l.a, 0.0, (l.e - f).abs(), l.e + f);
    let w3 = circle_annulus_arcs(0.0, l.d, alpha, (l.b - l.c).abs(), l.b + l.c);
    if w3.is_empty() {
        return Err(StageError::EmptyWorkspace { vertex: "v3" });
    }
    if w6.is_empty() {
        return Err(StageError::EmptyWorkspace { vertex: "v6" });
    }
    Ok((w3, w6))
}

/// Feasible `beta` values: the distance set between the two workspaces.
pub fn beta_set(l: &K33Lengths) -> Result<StageReport, StageError> {
    let (w3, w6) = workspaces(l)?;
    let (set, bounds) = arc_distance_set(&w3, &w6).expect("workspaces are nonempty");
    Ok(StageReport { stage: Stage::Beta, feasible_set: set, bounds: Some(bounds) })
}

/// Branch choices for the three resolved vertices, in resolution order
/// (`v5`, `v3`, `v2`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignTuple(pub [Sign; 3]);

impl SignTuple {
    pub const ALL: [SignTuple; 8] = {
        use Sign::{Minus as M, Plus as P};
        [
            SignTuple([M, M, M]),
            SignTuple([M, M, P]),
            SignTuple([M, P, M]),
            SignTuple([M, P, P]),
            SignTuple([P, M, M]),
            SignTuple([P, M, P]),
            SignTuple([P, P, M]),
            SignTuple([P, P, P]),
        ]
    };

    pub fn mirror(self) -> SignTuple {
        SignTuple([self.0[0].flip(), self.0[1].flip(), self.0[2].flip()])
    }

    pub fn index(self) -> usize {
        SignTuple::ALL.iter().position(|t| *t == self).unwrap()
    }
}

impl fmt::Display for SignTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.0[0].as_char(), self.0[1].as_char(), self.0[2].as_char())
    }
}

/// One emitted sweep configuration.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepSample {
    pub theta: f64,
    pub signs: SignTuple,
    pub gamma: f64,
}

/// Pinned positions of a resolved branch configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct K33Positions {
    pub p1: Point,
    pub p2: Point,
    pub p3: Point,
    pub p4: Point,
    pub p5: Point,
    pub p6: Point,
}

impl K33Positions {
    pub fn gamma(&self) -> f64 {
        self.p2.dist(self.p5)
    }

    pub fn max_displacement(&self, other: &K33Positions) -> f64 {
        self.p2
            .dist(other.p2)
            .max(self.p3.dist(other.p3))
            .max(self.p5.dist(other.p5))
            .max(self.p6.dist(other.p6))
    }
}

/// Per-stage circle pairs, exposed so degenerate (coincident) stages can be
/// recognized by callers that need the full fiber rather than a branch point.
pub(crate) struct ResolvedLengths {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ResolvedLengths {
    pub fn of(l: &K33Lengths) -> Result<ResolvedLengths, StageError> {
        Ok(ResolvedLengths {
            a: l.a,
            b: l.b,
            c: l.c,
            d: l.d,
            e: l.e,
            f: l.need(Stage::F)?,
            alpha: l.need(Stage::Alpha)?,
            beta: l.need(Stage::Beta)?,
        })
    }

    pub fn p1(&self) -> Point {
        Point::new(self.alpha, 0.0)
    }

    pub fn p6_at(&self, cos_t: f64, sin_t: f64) -> Point {
        Point::new(self.alpha + self.a * cos_t, self.a * sin_t)
    }
}

/// Outcome of resolving one vertex from a circle pair.
pub(crate) enum StageOutcome {
    Point(Point),
    /// Whole-circle fiber: the vertex is free on this circle.
    Fiber { center: Point, radius: f64 },
    Infeasible,
}

pub(crate) fn resolve_stage(c0: Point, r0: f64, c1: Point, r1: f64, sign: Sign) -> StageOutcome {
    match circle_circle(c0, r0, c1, r1) {
        CircleCircle::Two(p, m) => StageOutcome::Point(match sign {
            Sign::Plus => p,
            Sign::Minus => m,
        }),
        CircleCircle::Tangent(p) => StageOutcome::Point(p),
        CircleCircle::Coincident => StageOutcome::Fiber { center: c0, radius: r0 },
        CircleCircle::Disjoint => StageOutcome::Infeasible,
    }
}

/// Resolve the branch configuration at angle (cos_t, sin_t) for one sign
/// tuple. Degenerate coincident-circle stages yield `None` here; the sweep
/// emits only branch-generic configurations.
pub(crate) fn branch_positions_trig(
    rl: &ResolvedLengths,
    cos_t: f64,
    sin_t: f64,
    signs: SignTuple,
) -> Option<K33Positions> {
    let p4 = Point::ORIGIN;
    let p1 = rl.p1();
    let p6 = rl.p6_at(cos_t, sin_t);
    let p5 = match resolve_stage(p4, rl.e, p6, rl.f, signs.0[0]) {
        StageOutcome::Point(p) => p,
        _ => return None,
    };
    let p3 = match resolve_stage(p4, rl.d, p6, rl.beta, signs.0[1]) {
        StageOutcome::Point(p) => p,
        _ => return None,
    };
    let p2 = match resolve_stage(p1, rl.b, p3, rl.c, signs.0[2]) {
        StageOutcome::Point(p) => p,
        _ => return None,
    };
    Some(K33Positions { p1, p2, p3, p4, p5, p6 })
}

/// Branch configuration at an arbitrary angle.
pub fn branch_positions(l: &K33Lengths, theta: f64, signs: SignTuple) -> Result<Option<K33Positions>, StageError> {
    let rl = ResolvedLengths::of(l)?;
    Ok(branch_positions_trig(&rl, theta.cos(), theta.sin(), signs))
}

/// Angle grid with bit-exact mirror symmetry: index `n - k` carries exactly
/// the reflected trig values of index `k`, making the emitted sample multiset
/// exactly invariant under the global branch flip.
pub(crate) struct AngleGrid {
    pub theta: Vec<f64>,
    pub cos_t: Vec<f64>,
    pub sin_t: Vec<f64>,
}

impl AngleGrid {
    pub fn new(n: usize) -> AngleGrid {
        assert!(n >= 1);
        let mut theta = vec![0.0; n];
        let mut cos_t = vec![0.0; n];
        let mut sin_t = vec![0.0; n];
        let h = 2.0 * PI / n as f64;
        for k in 0..=n / 2 {
            let t = -PI + k as f64 * h;
            let (mut c, mut s) = (t.cos(), t.sin());
            if k == 0 {
                c = -1.0;
                s = 0.0;
            }
            if 2 * k == n {
                c = 1.0;
                s = 0.0;
            }
            theta[k] = t;
            cos_t[k] = c;
            sin_t[k] = s;
            let m = (n - k) % n;
            theta[m] = if k == 0 { t } else { PI - k as f64 * h };
            cos_t[m] = c;
            sin_t[m] = -s;
        }
        AngleGrid { theta, cos_t, sin_t }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }
}

fn grid_for(l: &K33Lengths, resolution: usize) -> AngleGrid {
    // zero-length first edge collapses the sweep to a single slice
    if l.a == 0.0 {
        AngleGrid::new(1)
    } else {
        AngleGrid::new(resolution)
    }
}

fn check_stage3(l: &K33Lengths) -> Result<(), StageError> {
    let beta = l.need(Stage::Beta)?;
    let b_set = beta_set(l)?.feasible_set;
    if b_set.distance_to(beta) > containment_tol(l) {
        return Err(StageError::OutOfStage { stage: Stage::Beta, value: beta, set: b_set });
    }
    Ok(())
}

/// Evaluate all feasible branch configurations on a uniform angle grid.
/// Samples are ordered by angle, then sign tuple; infeasible combinations are
/// omitted. Parallel evaluation preserves the sequential order exactly.
pub fn sweep(l: &K33Lengths, resolution: usize) -> Result<Vec<SweepSample>, StageError> {
    l.validate()?;
    check_stage3(l)?;
    let rl = ResolvedLengths::of(l)?;
    let grid = grid_for(l, resolution.max(1));
    let columns: Vec<Vec<SweepSample>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let mut out = Vec::new();
            for signs in SignTuple::ALL {
                if let Some(pos) = branch_positions_trig(&rl, grid.cos_t[k], grid.sin_t[k], signs) {
                    out.push(SweepSample { theta: grid.theta[k], signs, gamma: pos.gamma() });
                }
            }
            out
        })
        .collect();
    Ok(columns.into_iter().flatten().collect())
}

/// Default interval-merge gap: `1e-3` of the total length scale.
pub fn default_merge_gap(l: &K33Lengths) -> f64 {
    1e-3 * (l.a
        + l.b
        + l.c
        + l.d
        + l.e
        + l.f.unwrap_or(0.0)
        + l.alpha.unwrap_or(0.0)
        + l.beta.unwrap_or(0.0))
}

/// Maximal runs of consecutive feasible grid cells for one sign tuple,
/// treating the grid circularly. Each run is (start index, length).
fn feasible_runs(feasible: &[bool]) -> Vec<(usize, usize)> {
    let n = feasible.len();
    let total: usize = feasible.iter().filter(|b| **b).count();
    if total == 0 {
        return Vec::new();
    }
    if total == n {
        return vec![(0, n)];
    }
    // circular runs: a run starts where the previous cell is infeasible
    let mut runs = Vec::new();
    for k in 0..n {
        if feasible[k] && !feasible[(k + n - 1) % n] {
            let mut len = 1;
            while feasible[(k + len) % n] {
                len += 1;
            }
            runs.push((k, len));
        }
    }
    runs
}

/// Refine the gamma extremum near grid angle `t0` (within +-`radius`) by
/// golden-section search restricted to one sign tuple.
fn refine_extremum(
    rl: &ResolvedLengths,
    signs: SignTuple,
    t0: f64,
    radius: f64,
    maximize: bool,
) -> Option<f64> {
    let eval = |t: f64| -> Option<f64> {
        branch_positions_trig(rl, t.cos(), t.sin(), signs).map(|p| p.gamma())
    };
    let (mut lo, mut hi) = (t0 - radius, t0 + radius);
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    for _ in 0..60 {
        let pick1 = if maximize { f1 > f2 } else { f1 < f2 };
        if pick1 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = eval(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = eval(x2)?;
        }
    }
    Some(if maximize { f1.max(f2) } else { f1.min(f2) })
}

/// Bisect the feasibility boundary between a feasible and an infeasible angle
/// for a sign tuple, returning the gamma value at the feasible side.
fn refine_boundary(rl: &ResolvedLengths, signs: SignTuple, t_feasible: f64, t_infeasible: f64) -> Option<f64> {
    let eval = |t: f64| branch_positions_trig(rl, t.cos(), t.sin(), signs);
    let mut a = t_feasible;
    let mut b = t_infeasible;
    let mut last = eval(a)?;
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        match eval(mid) {
            Some(p) => {
                a = mid;
                last = p;
            }
            None => b = mid,
        }
        if (b - a).abs() <= 1e-10 {
            break;
        }
    }
    Some(last.gamma())
}

/// Per-tuple feasibility table plus gamma values on the grid.
fn sweep_table(rl: &ResolvedLengths, grid: &AngleGrid) -> Vec<Vec<Option<f64>>> {
    let n = grid.len();
    let columns: Vec<[Option<f64>; 8]> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut col = [None; 8];
            for (ti, signs) in SignTuple::ALL.iter().enumerate() {
                col[ti] = branch_positions_trig(rl, grid.cos_t[k], grid.sin_t[k], *signs)
                    .map(|p| p.gamma());
            }
            col
        })
        .collect();
    (0..8)
        .map(|ti| columns.iter().map(|col| col[ti]).collect())
        .collect()
}

/// Feasible `gamma` values via the branch sweep: per-region interval hulls
/// with boundary bisection and interior extremum refinement, unioned and then
/// merged across gaps below `merge_gap`.
pub fn gamma_set(l: &K33Lengths, resolution: usize, merge_gap: Option<f64>) -> Result<StageReport, StageError> {
    l.validate()?;
    if resolution < MIN_RESOLUTION {
        return Err(StageError::ResolutionTooLow(resolution));
    }
    check_stage3(l)?;
    let rl = ResolvedLengths::of(l)?;
    let gap = merge_gap.unwrap_or_else(|| default_merge_gap(l));
    let grid = grid_for(l, resolution);
    let n = grid.len();
    let table = sweep_table(&rl, &grid);

    let mut intervals: Vec<Interval> = Vec::new();
    for (ti, signs) in SignTuple::ALL.iter().enumerate() {
        let gammas = &table[ti];
        let feasible: Vec<bool> = gammas.iter().map(Option::is_some).collect();
        for (start, len) in feasible_runs(&feasible) {
            if n == 1 {
                let g = gammas[start].unwrap();
                intervals.push(Interval::point(g));
                continue;
            }
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut arg_lo = start;
            let mut arg_hi = start;
            for j in 0..len {
                let k = (start + j) % n;
                let g = gammas[k].unwrap();
                if g < lo {
                    lo = g;
                    arg_lo = k;
                }
                if g > hi {
                    hi = g;
                    arg_hi = k;
                }
            }
            let h = 2.0 * PI / n as f64;
            for (arg, maximize) in [(arg_lo, false), (arg_hi, true)] {
                if let Some(refined) = refine_extremum(&rl, *signs, grid.theta[arg], h, maximize) {
                    if maximize {
                        hi = hi.max(refined);
                    } else {
                        lo = lo.min(refined);
                    }
                }
            }
            if len < n {
                // partial run: refine both fold boundaries
                let before = (start + n - 1) % n;
                let after = (start + len) % n;
                let first = start;
                let last = (start + len - 1) % n;
                for (fk, ik) in [(first, before), (last, after)] {
                    if let Some(g) = refine_boundary(&rl, *signs, grid.theta[fk], grid.theta[ik]) {
                        lo = lo.min(g);
                        hi = hi.max(g);
                    }
                }
            }
            intervals.push(Interval::new(lo.min(hi), hi));
        }
    }
    let set = IntervalSet::from_intervals(intervals).merge_within(gap);
    Ok(StageReport { stage: Stage::Gamma, feasible_set: set, bounds: None })
}

/// Independent cross-check of [`gamma_set`]: re-parametrize by the angle of
/// `v3` around the origin (instead of `v6` around `v1`), resolve `v6`, `v5`,
/// `v2` by branches, and return the union of region hulls. The two routes
/// enumerate the same pinned configuration space.
pub fn gamma_set_oracle(l: &K33Lengths, samples: usize, seed: u64) -> Result<IntervalSet, StageError> {
    use rand::{Rng, SeedableRng};
    l.validate()?;
    if samples < MIN_RESOLUTION {
        return Err(StageError::ResolutionTooLow(samples));
    }
    check_stage3(l)?;
    let rl = ResolvedLengths::of(l)?;
    let gap = default_merge_gap(l);
    let jitter: f64 = rand_chacha::ChaCha8Rng::seed_from_u64(seed).gen::<f64>();
    // resolve order: v6 from (v1, a) x (v3, beta); v5 from (v4, e) x (v6, f);
    // v2 from (v1, b) x (v3, c)
    let p1 = rl.p1();
    let p4 = Point::ORIGIN;
    let eval = |phi: f64, signs: [Sign; 3]| -> Option<f64> {
        let p3 = Point::new(rl.d * phi.cos(), rl.d * phi.sin());
        let p6 = match resolve_stage(p1, rl.a, p3, rl.beta, signs[0]) {
            StageOutcome::Point(p) => p,
            _ => return None,
        };
        let p5 = match resolve_stage(p4, rl.e, p6, rl.f, signs[1]) {
            StageOutcome::Point(p) => p,
            _ => return None,
        };
        let p2 = match resolve_stage(p1, rl.b, p3, rl.c, signs[2]) {
            StageOutcome::Point(p) => p,
            _ => return None,
        };
        Some(p2.dist(p5))
    };
    let n = if rl.d == 0.0 { 1 } else { samples };
    let step = 2.0 * PI / n as f64;
    let phi_of = |k: usize| -PI + (k as f64 + jitter) * step;
    let mut intervals = Vec::new();
    for signs in SignTuple::ALL {
        let gammas: Vec<Option<f64>> = (0..n)
            .into_par_iter()
            .map(|k| eval(phi_of(k), signs.0))
            .collect();
        let feasible: Vec<bool> = gammas.iter().map(Option::is_some).collect();
        for (start, len) in feasible_runs(&feasible) {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut args = (start, start);
            for j in 0..len {
                let k = (start + j) % n;
                let g = gammas[k].unwrap();
                if g < lo {
                    lo = g;
                    args.0 = k;
                }
                if g > hi {
                    hi = g;
                    args.1 = k;
                }
            }
            // golden refinement around extrema
            let refine = |k: usize, maximize: bool| -> Option<f64> {
                let t0 = phi_of(k);
                let phi = 0.5 * (5.0f64.sqrt() - 1.0);
                let (mut a, mut b) = (t0 - step, t0 + step);
                let mut x1 = b - phi * (b - a);
                let mut x2 = a + phi * (b - a);
                let mut f1 = eval(x1, signs.0)?;
                let mut f2 = eval(x2, signs.0)?;
                for _ in 0..60 {
                    let pick1 = if maximize { f1 > f2 } else { f1 < f2 };
                    if pick1 {
                        b = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = b - phi * (b - a);
                        f1 = eval(x1, signs.0)?;
                    } else {
                        a = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = a + phi * (b - a);
                        f2 = eval(x2, signs.0)?;
                    }
                }
                Some(if maximize { f1.max(f2) } else { f1.min(f2) })
            };
            if n > 1 {
                if let Some(g) = refine(args.0, false) {
                    lo = lo.min(g);
                }
                if let Some(g) = refine(args.1, true) {
                    hi = hi.max(g);
                }
                if len < n {
                    let boundary = |fk: usize, ik: usize| -> Option<f64> {
                        let mut a = phi_of(fk);
                        let mut b = phi_of(ik);
                        let mut last = eval(a, signs.0)?;
                        for _ in 0..60 {
                            let mid = 0.5 * (a + b);
                            match eval(mid, signs.0) {
                                Some(g) => {
                                    a = mid;
                                    last = g;
                                }
                                None => b = mid,
                            }
                        }
                        Some(last)
                    };
                    let before = (start + n - 1) % n;
                    let after = (start + len) % n;
                    let last_k = (start + len - 1) % n;
                    for (fk, ik) in [(start, before), (last_k, after)] {
                        if let Some(g) = boundary(fk, ik) {
                            lo = lo.min(g);
                            hi = hi.max(g);
                        }
                    }
                }
            }
            intervals.push(Interval::new(lo.min(hi), hi));
        }
    }
    Ok(IntervalSet::from_intervals(intervals).merge_within(gap))
}

/// The full staged narrative: all four feasible sets, failing fast with the
/// violated set when a chosen value falls outside its stage.
pub fn staged_report(
    l: &K33Lengths,
    resolution: usize,
    merge_gap: Option<f64>,
) -> Result<Vec<StageReport>, StageError> {
    l.validate()?;
    let tol = containment_tol(l);
    let f_rep = f_interval(l)?;
    let f = l.need(Stage::F)?;
    if f_rep.feasible_set.distance_to(f) > tol {
        return Err(StageError::OutOfStage { stage: Stage::F, value: f, set: f_rep.feasible_set });
    }
    let a_rep = alpha_interval(l)?;
    let alpha = l.need(Stage::Alpha)?;
    if a_rep.feasible_set.distance_to(alpha) > tol {
        return Err(StageError::OutOfStage {
            stage: Stage::Alpha,
            value: alpha,
            set: a_rep.feasible_set,
        });
    }
    let b_rep = beta_set(l)?;
    let beta = l.need(Stage::Beta)?;
    if b_rep.feasible_set.distance_to(beta) > tol {
        return Err(StageError::OutOfStage {
            stage: Stage::Beta,
            value: beta,
            set: b_rep.feasible_set,
        });
    }
    let g_rep = gamma_set(l, resolution, merge_gap)?;
    if let Some(gamma) = l.gamma {
        if g_rep.feasible_set.distance_to(gamma) > tol.max(default_merge_gap(l)) {
            return Err(StageError::OutOfStage {
                stage: Stage::Gamma,
                value: gamma,
                set: g_rep.feasible_set,
            });
        }
    }
    Ok(vec![f_rep, a_rep, b_rep, g_rep])
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS_A: f64 = 0.05;

    fn assert_close(x: f64, y: f64, tol: f64) {
        assert!((x - y).abs() <= tol, "{x} vs {y} (tol {tol})");
    }

    pub(crate) fn two_interval_lengths() -> K33Lengths {
        // hexagon 1,1,1,1 with f = beta = sqrt(2), near-degenerate first edge
        let r2 = 2.0f64.sqrt();
        K33Lengths::chain(EPS_A, 1.0, 1.0, 1.0, 1.0).with_f(r2).with_alpha(1.0).with_beta(r2)
    }

    #[test]
    fn f_interval_examples() {
        let l = K33Lengths::chain(1.0, 1.0, 1.0, 1.0, 1.0);
        let rep = f_interval(&l).unwrap();
        assert_eq!(rep.feasible_set.intervals()[0], Interval::new(0.0, 5.0));

        let l = K33Lengths::chain(1.0, 1.0, 1.0, 1.0, 10.0);
        let rep = f_interval(&l).unwrap();
        assert_eq!(rep.feasible_set.intervals()[0], Interval::new(6.0, 14.0));

        let l = K33Lengths::chain(0.0, 0.0, 0.0, 0.0, 0.0);
        let rep = f_interval(&l).unwrap();
        assert_eq!(rep.feasible_set.intervals()[0], Interval::new(0.0, 0.0));
    }

    #[test]
    fn alpha_interval_examples() {
        let l = K33Lengths::chain(1.0, 1.0, 1.0, 1.0, 1.0).with_f(1.0);
        let rep = alpha_interval(&l).unwrap();
        assert_eq!(rep.feasible_set.intervals()[0], Interval::new(0.0, 3.0));
        let b = rep.bounds.unwrap();
        assert_eq!((b.mu1.unwrap(), b.mu2.unwrap()), (2.0, 2.0));

        // (a,e,f) = (1,1,1), (b,c,d) = (5,1,1): [0,3] meets [3,7] in a point
        let l = K33Lengths::chain(1.0, 5.0, 1.0, 1.0, 1.0).with_f(1.0);
        let rep = alpha_interval(&l).unwrap();
        assert_eq!(rep.feasible_set.intervals()[0], Interval::new(3.0, 3.0));
    }

    #[test]
    fn alpha_requires_feasible_f() {
        let l = K33Lengths::chain(1.0, 1.0, 1.0, 1.0, 1.0).with_f(6.0);
        match alpha_interval(&l) {
            Err(StageError::OutOfStage { stage: Stage::F, value, set }) => {
                assert_eq!(value, 6.0);
                assert_eq!(set.intervals()[0], Interval::new(0.0, 5.0));
            }
            other => panic!("expected out-of-stage error, got {other:?}"),
        }
    }

    #[test]
    fn workspaces_all_ones_are_full_circles() {
        let l = K33Lengths::chain(1.0, 1.0, 1.0, 1.0, 1.0).with_f(1.0).with_alpha(1.0);
        let (w3, w6) = workspaces(&l).unwrap();
        assert_eq!(w3.part, crate::arc::ArcPart::Full);
        assert_eq!(w6.part, crate::arc::ArcPart::Full);
    }

    #[test]
    fn workspace_empty_reports_error() {
        // b = c = 0.5 cannot bridge the gap from v1 to the d-circle once
        // alpha = 3; the stage-two precondition itself rejects that choice
        let l = K33Lengths::chain(1.0, 0.5, 0.5, 1.0, 1.0).with_f(1.5).with_alpha(3.0);
        assert!(matches!(workspaces(&l), Err(StageError::OutOfStage { .. })));
        // with alpha inside the interval the workspaces are provably
        // nonempty; the empty case is reachable only through the containment
        // tolerance at the exact boundary
        let boundary = 0.5 + 0.5 + 1.0; // b + c + d
        let l2 = K33Lengths::chain(2.0, 0.5, 0.5, 1.0, 2.0)
            .with_f(2.0)
            .with_alpha(boundary + 1e-10);
        match workspaces(&l2) {
            Err(StageError::EmptyWorkspace { vertex }) => assert_eq!(vertex, "v3"),
            other => panic!("expected empty workspace, got {other:?}"),
        }
    }

    #[test]
    fn beta_set_all_ones() {
        let l = K33Lengths::chain(1.0, 1.0, 1.0, 1.0, 1.0).with_f(1.0).with_alpha(1.0);
        let rep = beta_set(&l).unwrap();
        assert_eq!(rep.feasible_set.count(), 1);
        let iv = rep.feasible_set.intervals()[0];
        assert_close(iv.lo, 0.0, 1e-12);
        assert_close(iv.hi, 3.0, 1e-12);
    }

    #[test]
    fn beta_set_point_workspace() {
        // a = 0 pins v6 at (alpha, 0)
        let l = K33Lengths::chain(0.0, 1.0, 1.0, 1.0, 1.0).with_f(1.0).with_alpha(1.0);
        let rep = beta_set(&l).unwrap();
        assert_eq!(rep.feasible_set.count(), 1);
        let iv = rep.feasible_set.intervals()[0];
        assert_close(iv.lo, 0.0, 1e-12); // v3 circle passes through v6
        assert_close(iv.hi, 2.0, 1e-12);
    }

    #[test]
    fn sweep_emits_mirror_symmetric_samples() {
        let l = two_interval_lengths();
        let samples = sweep(&l, 2000).unwrap();
        assert!(!samples.is_empty());
        use std::collections::BTreeMap;
        let mut counts: BTreeMap<u64, i64> = BTreeMap::new();
        for s in &samples {
            *counts.entry(s.gamma.to_bits()).or_default() += 1;
        }
        // global sign flip + theta -> -theta is a bijection preserving gamma,
        // so the gamma multiset is exactly flip-invariant; spot-check by
        // pairing each sample with its mirrored tuple at the mirrored angle
        let mut by_key: BTreeMap<(u64, usize), i64> = BTreeMap::new();
        for s in &samples {
            *by_key.entry((s.gamma.to_bits(), s.signs.index())).or_default() += 1;
        }
        for ((bits, ti), count) in &by_key {
            let mirrored = SignTuple::ALL[*ti].mirror().index();
            let mate = by_key.get(&(*bits, mirrored)).copied().unwrap_or(0);
            assert_eq!(*count, mate, "mirror pairing violated for tuple {ti}");
        }
        assert!(counts.len() > 1);
    }

    #[test]
    fn sweep_with_zero_first_edge_collapses() {
        let l = K33Lengths::chain(0.0, 1.0, 1.0, 1.0, 1.0)
            .with_f(1.0)
            .with_alpha(1.0)
            .with_beta(1.0);
        let samples = sweep(&l, 2000).unwrap();
        // single slice: at most 8 samples
        assert!(samples.len() <= 8);
    }

    #[test]
    fn gamma_set_rejects_low_resolution() {
        let l = two_interval_lengths();
        assert!(matches!(gamma_set(&l, 999, None), Err(StageError::ResolutionTooLow(999))));
    }

    #[test]
    fn gamma_set_two_intervals() {
        let l = two_interval_lengths();
        let rep = gamma_set(&l, 20_000, None).unwrap();
        assert_eq!(rep.feasible_set.count(), 2, "set = {}", rep.feasible_set);
        let ivs = rep.feasible_set.intervals();
        assert_close(ivs[0].center(), 1.0, 0.1);
        assert_close(ivs[1].center(), 5.0f64.sqrt(), 0.1);
        // frozen endpoints for the second interval (dense-sweep values)
        assert_close(ivs[1].lo, 2.190888685, 1e-6);
        assert_close(ivs[1].hi, 2.280349573, 1e-6);
    }

    #[test]
    fn gamma_oracle_agrees_on_two_interval_fixture() {
        let l = two_interval_lengths();
        let rep = gamma_set(&l, 20_000, None).unwrap();
        let oracle = gamma_set_oracle(&l, 20_000, 0).unwrap();
        assert_eq!(rep.feasible_set.count(), oracle.count());
        for (x, y) in rep.feasible_set.intervals().iter().zip(oracle.intervals()) {
            assert_close(x.lo, y.lo, 1e-3);
            assert_close(x.hi, y.hi, 1e-3);
        }
    }

    #[test]
    fn staged_report_all_ones() {
        let l = K33Lengths::chain(1.0, 1.0, 1.0, 1.0, 1.0)
            .with_f(1.0)
            .with_alpha(1.0)
            .with_beta(1.0)
            .with_gamma(1.0);
        let reps = staged_report(&l, 4000, None).unwrap();
        assert_eq!(reps.len(), 4);
        assert_eq!(reps[0].feasible_set.intervals()[0], Interval::new(0.0, 5.0));
        assert_eq!(reps[1].feasible_set.intervals()[0], Interval::new(0.0, 3.0));
        assert!(reps[3].feasible_set.contains(1.0));
    }

    #[test]
    fn staged_report_rejects_out_of_interval_choice() {
        let l = K33Lengths::chain(1.0, 1.0, 1.0, 1.0, 1.0).with_f(6.0);
        match staged_report(&l, 4000, None) {
            Err(StageError::OutOfStage { stage: Stage::F, set, .. }) => {
                assert_eq!(set.intervals()[0], Interval::new(0.0, 5.0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn doubling_resolution_refines_monotonically() {
        let l = two_interval_lengths();
        let coarse = gamma_set(&l, 2000, None).unwrap().feasible_set;
        let fine = gamma_set(&l, 4000, None).unwrap().feasible_set;
        assert_eq!(coarse.count(), fine.count());
        let h = 2.0 * PI / 2000.0 * (l.a + l.b + l.c + l.d + l.e);
        for (c, f) in coarse.intervals().iter().zip(fine.intervals()) {
            assert!((c.lo - f.lo).abs() <= h && (c.hi - f.hi).abs() <= h);
        }
    }

    #[test]
    fn lengths_json_round_trip_and_prefix_rule() {
        let l = two_interval_lengths();
        let s = serde_json::to_string(&l).unwrap();
        let back: K33Lengths = serde_json::from_str(&s).unwrap();
        assert_eq!(back, l);
        // gamma without beta is rejected
        let bad = r#"{"a":1,"b":1,"c":1,"d":1,"e":1,"f":1,"alpha":1,"gamma":1}"#;
        let parsed: K33Lengths = serde_json::from_str(bad).unwrap();
        assert!(matches!(parsed.validate(), Err(StageError::NonContiguous)));
    }

    #[test]
    fn graph_round_trip() {
        let l = two_interval_lengths().with_gamma(1.0);
        let g = l.to_graph().unwrap();
        assert_eq!(K33Lengths::from_graph(&g).unwrap(), l);
    }
}
