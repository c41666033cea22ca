//! Minimal SVG emission for realizations and stage-two workspaces: vertices
//! as dots, edges as segments, workspace circles dotted with the admissible
//! arcs stroked solid, pinned edge along the x-axis. 40 px per length unit,
//! viewBox fitted to the drawing.

use crate::arc::{ArcPart, CircleArcSet};
use crate::geom::Point;
use crate::graph::{Realization, WeightedGraph};
use std::f64::consts::PI;
use std::fmt::Write as _;

pub const PX_PER_UNIT: f64 = 40.0;

struct Canvas {
    body: String,
    min: Point,
    max: Point,
}

impl Canvas {
    fn new() -> Canvas {
        Canvas {
            body: String::new(),
            min: Point::new(f64::INFINITY, f64::INFINITY),
            max: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: Point, pad: f64) {
        self.min.x = self.min.x.min(p.x - pad);
        self.min.y = self.min.y.min(p.y - pad);
        self.max.x = self.max.x.max(p.x + pad);
        self.max.y = self.max.y.max(p.y + pad);
    }

    // y flips so the mathematical upper half-plane renders upward
    fn px(&self, p: Point) -> (f64, f64) {
        (p.x * PX_PER_UNIT, -p.y * PX_PER_UNIT)
    }

    fn line(&mut self, a: Point, b: Point, style: &str) {
        self.grow(a, 0.2);
        self.grow(b, 0.2);
        let (x1, y1) = self.px(a);
        let (x2, y2) = self.px(b);
        writeln!(
            self.body,
            r#"  <line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" {style}/>"#
        )
        .unwrap();
    }

    fn dot(&mut self, p: Point, label: Option<&str>) {
        self.grow(p, 0.3);
        let (cx, cy) = self.px(p);
        writeln!(self.body, r#"  <circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="black"/>"#).unwrap();
        if let Some(text) = label {
            writeln!(
                self.body,
                r#"  <text x="{:.2}" y="{:.2}" font-size="11">{text}</text>"#,
                cx + 5.0,
                cy - 5.0
            )
            .unwrap();
        }
    }

    fn circle(&mut self, center: Point, r: f64, style: &str) {
        self.grow(center, r + 0.2);
        let (cx, cy) = self.px(center);
        writeln!(
            self.body,
            r#"  <circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="none" {style}/>"#,
            r * PX_PER_UNIT
        )
        .unwrap();
    }

    fn arc_path(&mut self, center: Point, r: f64, a0: f64, a1: f64, style: &str) {
        self.grow(center, r + 0.2);
        // polyline approximation keeps the writer tiny and exact enough
        let steps = 64;
        let mut d = String::new();
        for i in 0..=steps {
            let t = a0 + (a1 - a0) * i as f64 / steps as f64;
            let p = Point::new(center.x + r * t.cos(), center.y + r * t.sin());
            let (x, y) = self.px(p);
            if i == 0 {
                write!(d, "M {x:.2} {y:.2}").unwrap();
            } else {
                write!(d, " L {x:.2} {y:.2}").unwrap();
            }
        }
        writeln!(self.body, r#"  <path d="{d}" fill="none" {style}/>"#).unwrap();
    }

    fn finish(self) -> String {
        let (min, max) = if self.min.x.is_finite() {
            (self.min, self.max)
        } else {
            (Point::new(-1.0, -1.0), Point::new(1.0, 1.0))
        };
        let x = min.x * PX_PER_UNIT;
        let y = -max.y * PX_PER_UNIT;
        let w = (max.x - min.x) * PX_PER_UNIT;
        let h = (max.y - min.y) * PX_PER_UNIT;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{x:.2} {y:.2} {w:.2} {h:.2}\">\n{}</svg>\n",
            self.body
        )
    }
}

/// Draw a realization of a graph: dots, labels, edge segments.
pub fn render_realization(g: &WeightedGraph, r: &Realization) -> String {
    let mut c = Canvas::new();
    for e in &g.edges {
        if let (Some(a), Some(b)) = (r.get(&e.u), r.get(&e.v)) {
            c.line(a, b, r#"stroke="black" stroke-width="1.5""#);
        }
    }
    for name in &g.vertices {
        if let Some(p) = r.get(name) {
            c.dot(p, Some(name));
        }
    }
    c.finish()
}

/// Draw the two stage-two workspaces: dotted carrier circles, solid
/// admissible arcs, pinned axis.
pub fn render_workspaces(w3: &CircleArcSet, w6: &CircleArcSet, alpha: f64) -> String {
    let mut c = Canvas::new();
    // pinned frame markers
    c.line(
        Point::new(-0.5 - w3.radius.max(w6.radius), 0.0),
        Point::new(alpha + 0.5 + w3.radius.max(w6.radius), 0.0),
        r#"stroke="gray" stroke-width="0.5""#,
    );
    c.dot(Point::ORIGIN, Some("v4"));
    c.dot(Point::new(alpha, 0.0), Some("v1"));
    for (w, color) in [(w3, "crimson"), (w6, "royalblue")] {
        let dotted = format!(r#"stroke="{color}" stroke-width="0.7" stroke-dasharray="3 4""#);
        let solid = format!(r#"stroke="{color}" stroke-width="2.5""#);
        c.circle(w.center(), w.radius, &dotted);
        match w.part {
            ArcPart::Empty => {}
            ArcPart::Full => c.circle(w.center(), w.radius, &solid),
            _ => {
                for comp in w.components() {
                    let (a0, a1) = comp.ang.unwrap_or((-PI, PI));
                    if a1 > a0 {
                        c.arc_path(w.center(), w.radius, a0, a1, &solid);
                    } else {
                        c.dot(comp.point_at(a0), None);
                    }
                }
            }
        }
    }
    c.finish()
}
