//! Plane-geometry primitives shared by the solver and the sweep machinery.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Reflection in the x-axis.
    pub fn reflect_x(self) -> Point {
        Point { x: self.x, y: -self.y }
    }

    /// Angle in (-pi, pi] measured from the positive x-axis.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Branch selector for a two-circle intersection.
///
/// With `u = c1 - c0`, the two intersection points are `base ± h * perp(u)/|u|`
/// where `perp(u) = (-u.y, u.x)`. `Plus` picks the `+` point. Reflecting both
/// circles in the x-axis maps the `Plus` branch to the `Minus` branch, which is
/// what makes sweep sign tuples mirror cleanly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Minus => '-',
            Sign::Plus => '+',
        }
    }
}

/// Outcome of intersecting two circles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CircleCircle {
    /// Centers and radii agree to tolerance: a whole circle of solutions.
    Coincident,
    /// No intersection (too far apart or one strictly inside the other).
    Disjoint,
    /// Tangential contact, a single point.
    Tangent(Point),
    /// Two points, ordered (`Plus` branch, `Minus` branch).
    Two(Point, Point),
}

/// Intersect circle (`c0`, `r0`) with circle (`c1`, `r1`).
///
/// Nearly tangential configurations (discriminant in `[-tol, 0]` with
/// `tol = 1e-12 * scale^2`) are clamped to the tangency point so that branch
/// sweeps do not split regions on floating-point noise.
pub fn circle_circle(c0: Point, r0: f64, c1: Point, r1: f64) -> CircleCircle {
    let u = c1 - c0;
    let d2 = u.dot(u);
    let scale2 = d2.max(r0 * r0).max(r1 * r1).max(f64::MIN_POSITIVE);

    if d2 <= 1e-18 * scale2 {
        // Concentric. Equal radii means a coincident pair; otherwise disjoint.
        return if (r0 - r1).abs() <= 1e-9 * scale2.sqrt() {
            CircleCircle::Coincident
        } else {
            CircleCircle::Disjoint
        };
    }

    let t = (d2 + r0 * r0 - r1 * r1) / (2.0 * d2);
    let h2 = r0 * r0 - t * t * d2;
    let tol = 1e-12 * scale2;
    if h2 < -tol {
        return CircleCircle::Disjoint;
    }
    let base = c0 + u * t;
    if h2 <= tol {
        return CircleCircle::Tangent(base);
    }
    let h = (h2 / d2).sqrt();
    let perp = Point::new(-u.y, u.x);
    CircleCircle::Two(base + perp * h, base + perp * (-h))
}

/// Select one branch of a two-circle intersection. A tangency yields the same
/// point for either sign; coincident or disjoint circles yield `None`.
pub fn circle_circle_branch(c0: Point, r0: f64, c1: Point, r1: f64, sign: Sign) -> Option<Point> {
    match circle_circle(c0, r0, c1, r1) {
        CircleCircle::Two(p, m) => Some(match sign {
            Sign::Plus => p,
            Sign::Minus => m,
        }),
        CircleCircle::Tangent(p) => Some(p),
        _ => None,
    }
}

/// Determinant of an n x n matrix (n <= 8) by Gaussian elimination with
/// partial pivoting. Sizes here are tiny; no external linear algebra needed.
pub fn det_small(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= factor * a[col][c];
            }
        }
    }
    det
}

/// Solve the symmetric positive(-ish) definite system `A x = b` in place via
/// Cholesky with a diagonal ridge fallback. Used by the damped least-squares
/// steps where `A = J^T J + lambda I`.
pub fn solve_spd(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // forward then backward substitution
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_unit_circles_cross_at_expected_points() {
        let r = circle_circle(Point::ORIGIN, 1.0, Point::new(1.0, 0.0), 1.0);
        match r {
            CircleCircle::Two(p, m) => {
                assert!((p.x - 0.5).abs() < 1e-15 && (p.y - 0.75f64.sqrt()).abs() < 1e-15);
                assert!((m.x - 0.5).abs() < 1e-15 && (m.y + 0.75f64.sqrt()).abs() < 1e-15);
            }
            other => panic!("expected two points, got {other:?}"),
        }
    }

    #[test]
    fn tangent_and_disjoint_circles() {
        match circle_circle(Point::ORIGIN, 1.0, Point::new(2.0, 0.0), 1.0) {
            CircleCircle::Tangent(p) => assert!((p.x - 1.0).abs() < 1e-12 && p.y.abs() < 1e-12),
            other => panic!("expected tangency, got {other:?}"),
        }
        assert_eq!(
            circle_circle(Point::ORIGIN, 1.0, Point::new(3.0, 0.0), 1.0),
            CircleCircle::Disjoint
        );
        assert_eq!(
            circle_circle(Point::ORIGIN, 3.0, Point::new(0.5, 0.0), 1.0),
            CircleCircle::Disjoint
        );
    }

    #[test]
    fn coincident_circles_detected() {
        assert_eq!(
            circle_circle(Point::ORIGIN, 2.0, Point::new(0.0, 0.0), 2.0),
            CircleCircle::Coincident
        );
    }

    #[test]
    fn branch_reflection_pairing() {
        // Reflecting both centers swaps the branches.
        let c1 = Point::new(0.3, 0.4);
        let p = circle_circle_branch(Point::ORIGIN, 1.0, c1, 0.9, Sign::Plus).unwrap();
        let m = circle_circle_branch(Point::ORIGIN, 1.0, c1.reflect_x(), 0.9, Sign::Minus).unwrap();
        assert!((p.x - m.x).abs() < 1e-15);
        assert!((p.y + m.y).abs() < 1e-15);
    }

    #[test]
    fn det_small_matches_known_values() {
        let id: Vec<Vec<f64>> = (0..5)
            .map(|i| (0..5).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        assert!((det_small(&id) - 1.0).abs() < 1e-15);
        let m = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!((det_small(&m) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn solve_spd_roundtrip() {
        let a = vec![vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 0.5], vec![0.0, 0.5, 2.0]];
        let x_true = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a[i][j] * x_true[j]).sum())
            .collect();
        let x = solve_spd(&a, &b).unwrap();
        for i in 0..3 {
            assert!((x[i] - x_true[i]).abs() < 1e-12);
        }
    }
}
