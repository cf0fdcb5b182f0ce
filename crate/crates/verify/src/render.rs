//! Hand-written SVG figures. Output depends only on the spec, so the same
//! input gives the same bytes.

use std::fmt::Write as _;

use synthgeom::body::{ConvexBody, P2, V2};
use synthgeom::constructions::{build_harmonic_net, pasch_phi, ExactEuclidean, HarmonicNet, IncidencePlane};
use synthgeom::line_systems::{moulton_desargues_counterexample, LineSystem, MoultonLine, SystemLine};
use synthgeom::metric::StraightPlane;
use synthgeom::projective::{desargues_verdict, harmonic_conjugate_quadrangle, ProjPoint};
use synthgeom::rat::{rat, to_f64, Rat, RatPoint};
use synthgeom::sampling::{perspective_pair, seeded};

use crate::spec::{RenderTarget, SceneSpec};
use crate::suites::{model_box, phi_map};

/// Drawing area for the longer side, in pixels.
const EXTENT: f64 = 720.0;
const MARGIN: f64 = 40.0;

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("nothing to render: {0}")]
    NothingToRender(String),
    #[error("{0}")]
    Construction(String),
}

enum Item {
    Path { pts: Vec<P2>, closed: bool, class: &'static str },
    Dot { p: P2, class: &'static str, label: String },
    Ring { c: P2, r: f64, class: &'static str },
}

/// Items in world coordinates; the view box is fitted to the `fit` points.
pub struct Figure {
    title: String,
    items: Vec<Item>,
    fit: Vec<P2>,
}

fn finite(p: &P2) -> bool {
    p.x.is_finite() && p.y.is_finite()
}

impl Figure {
    fn new(title: impl Into<String>) -> Self {
        Figure { title: title.into(), items: Vec::new(), fit: Vec::new() }
    }

    fn path(&mut self, pts: Vec<P2>, class: &'static str) {
        self.items.push(Item::Path { pts, closed: false, class });
    }

    fn polygon(&mut self, pts: Vec<P2>, class: &'static str) {
        self.fit.extend(pts.iter().copied());
        self.items.push(Item::Path { pts, closed: true, class });
    }

    fn dot(&mut self, p: P2, class: &'static str, label: impl Into<String>) {
        self.fit.push(p);
        self.items.push(Item::Dot { p, class, label: label.into() });
    }

    fn ring(&mut self, c: P2, r: f64, class: &'static str) {
        self.fit.push(c + V2::new(r, r));
        self.fit.push(c - V2::new(r, r));
        self.items.push(Item::Ring { c, r, class });
    }

    fn bounds(&self) -> Option<(P2, P2)> {
        let mut it = self.fit.iter().filter(|p| finite(p));
        let first = *it.next()?;
        Some(it.fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p))))
    }

    pub fn to_svg(&self) -> Result<String, RenderError> {
        let (lo, hi) = self.bounds().ok_or_else(|| RenderError::NothingToRender(self.title.clone()))?;
        let span = (hi - lo).max().max(1e-9);
        let pad = 0.06 * span;
        let (lo, hi) = (lo.map(|c| c - pad), hi.map(|c| c + pad));
        let scale = EXTENT / (hi - lo).max();
        let (w, h) = ((hi.x - lo.x) * scale + 2.0 * MARGIN, (hi.y - lo.y) * scale + 2.0 * MARGIN);
        let tx = |p: &P2| ((p.x - lo.x) * scale + MARGIN, (hi.y - p.y) * scale + MARGIN);
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#);
        let _ = writeln!(s, "<title>{}</title>", escape(&self.title));
        s.push_str(STYLE);
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        for item in &self.items {
            match item {
                Item::Path { pts, closed, class } => {
                    let pts: Vec<String> = pts.iter().filter(|p| finite(p)).map(|p| {
                        let (x, y) = tx(p);
                        format!("{x:.2},{y:.2}")
                    }).collect();
                    if pts.len() < 2 {
                        continue;
                    }
                    let tag = if *closed { "polygon" } else { "polyline" };
                    let _ = writeln!(s, r#"<{tag} class="{class}" points="{}"/>"#, pts.join(" "));
                }
                Item::Ring { c, r, class } => {
                    let (x, y) = tx(c);
                    let _ = writeln!(s, r#"<circle class="{class}" cx="{x:.2}" cy="{y:.2}" r="{:.2}"/>"#, r * scale);
                }
                Item::Dot { p, class, label } => {
                    if !finite(p) {
                        continue;
                    }
                    let (x, y) = tx(p);
                    let _ = writeln!(s, r#"<circle class="{class}" cx="{x:.2}" cy="{y:.2}" r="3"/>"#);
                    if !label.is_empty() {
                        let _ = writeln!(s, r#"<text class="label" x="{:.2}" y="{:.2}">{}</text>"#, x + 4.0, y - 4.0, escape(label));
                    }
                }
            }
        }
        s.push_str("</svg>\n");
        Ok(s)
    }
}

const STYLE: &str = "<style>
polyline, polygon, circle { fill: none; stroke-width: 1.2; }
.base { stroke: #222; stroke-width: 2; }
.net-edge { stroke: #6a8caf; stroke-width: 0.8; }
.domain { stroke: #999; stroke-dasharray: 4 3; }
.triangle-1 { stroke: #b03a2e; }
.triangle-2 { stroke: #1f618d; }
.perspective { stroke: #aaa; }
.side { stroke: #bbb; stroke-dasharray: 2 3; }
.axis { stroke: #117a65; stroke-width: 1.6; }
.moulton { stroke: #7d3c98; }
.construction { stroke: #888; }
circle.net-point, circle.point { fill: #222; stroke: none; }
circle.phi-model { fill: #b03a2e; stroke: none; }
circle.phi-image { fill: #1f618d; stroke: none; }
.label { font: 11px sans-serif; fill: #222; }
</style>
";

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(spec: &SceneSpec) -> Result<String, RenderError> {
    let fig = match spec.target.expect("validated") {
        RenderTarget::Net => net_figure(spec)?,
        RenderTarget::Desargues => desargues_figure(spec)?,
        RenderTarget::Quadrangle => quadrangle_figure()?,
        RenderTarget::Moulton => moulton_figure(spec)?,
        RenderTarget::Phi => phi_figure(spec)?,
    };
    fig.to_svg()
}

fn construction(e: impl std::fmt::Display) -> RenderError {
    RenderError::Construction(e.to_string())
}

// ---- nets ----------------------------------------------------------------

fn domain_outline(fig: &mut Figure, plane: &StraightPlane) {
    match plane.domain() {
        Some(ConvexBody::Disk { center, radius }) => fig.ring(*center, *radius, "domain"),
        Some(ConvexBody::Polygon(poly)) => fig.polygon(poly.vertices().iter().map(RatPoint::to_f64).collect(), "domain"),
        _ => {}
    }
}

fn corner_name(m: u64, n: u64, last: u64) -> Option<&'static str> {
    match (m == 0, m == last, n == 0, n == last) {
        (true, _, true, _) => Some("a"),
        (_, true, true, _) => Some("b"),
        (_, true, _, true) => Some("y"),
        (true, _, _, true) => Some("x"),
        _ => None,
    }
}

fn draw_net<Pl: IncidencePlane>(fig: &mut Figure, pl: &Pl, net: &HarmonicNet<Pl::Point>) {
    let side = net.side();
    let last = side - 1;
    let at = |m: u64, n: u64| pl.to_f64(net.at(m, n));
    let base = [at(0, 0), at(last, 0), at(last, last), at(0, last)];
    fig.polygon(base.to_vec(), "base");
    if net.depth() > 0 {
        for i in 1..last {
            fig.path((0..side).map(|m| at(m, i)).collect(), "net-edge");
            fig.path((0..side).map(|n| at(i, n)).collect(), "net-edge");
        }
    }
    for (label, p) in net.entries() {
        let (m, n) = label.at_depth(net.depth());
        let name = match corner_name(m, n, last) {
            Some(c) => c.to_string(),
            None if label.k == 1 && label.m == 1 && label.n == 1 => format!("w{label}"),
            None => label.to_string(),
        };
        fig.dot(pl.to_f64(p), "net-point", name);
    }
}

fn net_figure(spec: &SceneSpec) -> Result<Figure, RenderError> {
    let depth = spec.depth();
    let mut fig = Figure::new(format!("harmonic net, depth {depth}"));
    if spec.exact_plane() {
        let net = build_harmonic_net(&ExactEuclidean, &spec.exact_base(), depth).map_err(construction)?;
        draw_net(&mut fig, &ExactEuclidean, &net);
    } else {
        let plane = spec.plane();
        domain_outline(&mut fig, &plane);
        let net = build_harmonic_net(&plane, &spec.metric_base(), depth).map_err(construction)?;
        draw_net(&mut fig, &plane, &net);
    }
    Ok(fig)
}

// ---- straight configurations ------------------------------------------------

/// The points sorted along their common line, so a polyline through them
/// covers the whole span.
fn span(pts: &[P2]) -> Vec<P2> {
    let v: Vec<P2> = pts.iter().copied().filter(finite).collect();
    let Some(&a) = v.first() else { return Vec::new() };
    let far = v.iter().copied().max_by(|p, q| (p - a).norm().total_cmp(&(q - a).norm())).unwrap_or(a);
    let key = |p: &P2| (p - a).dot(&(far - a));
    let lo = v.iter().copied().min_by(|p, q| key(p).total_cmp(&key(q))).unwrap_or(a);
    let hi = v.iter().copied().max_by(|p, q| key(p).total_cmp(&key(q))).unwrap_or(a);
    vec![lo, hi]
}

fn affine(p: &ProjPoint) -> Option<P2> {
    p.to_affine().map(|q| q.to_f64())
}

fn desargues_figure(spec: &SceneSpec) -> Result<Figure, RenderError> {
    let mut rng = seeded(spec.seed());
    let (o, t1, t2, sides) = (0..1000)
        .find_map(|_| {
            let (o, t1, t2) = perspective_pair(&mut rng);
            let proj = |t: &[RatPoint; 3]| t.clone().map(|p| ProjPoint::from_rat_point(&p));
            let v = desargues_verdict(&proj(&t1), &proj(&t2));
            let sides = v.side_points.clone().filter(|_| !v.is_degenerate())?;
            let sides: Vec<P2> = sides.iter().map(affine).collect::<Option<_>>()?;
            Some((o.to_f64(), t1.map(|p| p.to_f64()), t2.map(|p| p.to_f64()), sides))
        })
        .ok_or_else(|| RenderError::NothingToRender("no drawable perspective pair".into()))?;
    let mut fig = Figure::new("Desargues configuration");
    for i in 0..3 {
        fig.path(span(&[o, t1[i], t2[i]]), "perspective");
    }
    for (s, (i, j)) in sides.iter().zip([(0, 1), (0, 2), (1, 2)]) {
        fig.path(span(&[t1[i], t1[j], *s]), "side");
        fig.path(span(&[t2[i], t2[j], *s]), "side");
    }
    fig.polygon(t1.to_vec(), "triangle-1");
    fig.polygon(t2.to_vec(), "triangle-2");
    fig.path(span(&sides), "axis");
    fig.dot(o, "point", "O");
    for (names, t) in [(["A", "B", "C"], &t1), (["A'", "B'", "C'"], &t2)] {
        for (n, p) in names.iter().zip(t) {
            fig.dot(*p, "point", *n);
        }
    }
    for (n, p) in ["I", "J", "K"].iter().zip(&sides) {
        fig.dot(*p, "point", *n);
    }
    Ok(fig)
}

fn quadrangle_figure() -> Result<Figure, RenderError> {
    let pt = |x: Rat, y: Rat| ProjPoint::affine(x, y);
    let (a, b, p) = (pt(rat(0, 1), rat(0, 1)), pt(rat(4, 1), rat(0, 1)), pt(rat(1, 1), rat(0, 1)));
    let (z, x) = (pt(rat(1, 1), rat(3, 1)), pt(rat(1, 2), rat(3, 2)));
    let h = harmonic_conjugate_quadrangle(&a, &b, &p, &z, &x).map_err(construction)?;
    let g = |q: &ProjPoint| affine(q).ok_or_else(|| RenderError::NothingToRender("ideal point in the quadrangle".into()));
    let (a, b, p, q) = (g(&h.a)?, g(&h.b)?, g(&h.p)?, g(&h.q)?);
    let quad = &h.quadrangle;
    let (x, y, z, w) = (g(&quad.x)?, g(&quad.y)?, g(&quad.z)?, g(&quad.w)?);
    let mut fig = Figure::new("harmonic conjugate by a complete quadrangle");
    fig.path(span(&[a, b, p, q]), "axis");
    for line in [[a, x, z], [b, y, z], [p, x, y], [x, b, w], [y, a, w], [w, z, q]] {
        fig.path(span(&line), "construction");
    }
    for (n, v) in ["a", "b", "p", "q", "x", "y", "z", "w"].iter().zip([a, b, p, q, x, y, z, w]) {
        fig.dot(v, "point", *n);
    }
    Ok(fig)
}

// ---- Moulton ------------------------------------------------------------------

/// Polyline of a Moulton line over `[x0, x1]`, with the bend as a vertex.
fn moulton_path(line: &MoultonLine, bend: &Rat, x0: &Rat, x1: &Rat, y_range: (f64, f64)) -> Vec<P2> {
    let at = |x: &Rat| line.y_at(bend, x).map(|y| P2::new(to_f64(x), to_f64(&y)));
    match line {
        MoultonLine::Vertical { x } => vec![P2::new(to_f64(x), y_range.0), P2::new(to_f64(x), y_range.1)],
        _ => {
            let mut pts = vec![at(x0)];
            if matches!(line, MoultonLine::Bent { .. }) && *x0 < Rat::default() && Rat::default() < *x1 {
                pts.push(line.bend_point().map(|b| b.to_f64()));
            }
            pts.push(at(x1));
            pts.into_iter().flatten().collect()
        }
    }
}

/// The Moulton segment spanned by `pts`, all on one line.
fn moulton_span(sys: &LineSystem, pts: &[&RatPoint]) -> Vec<P2> {
    let LineSystem::Moulton(bend) = sys else { return Vec::new() };
    let Ok(SystemLine::Moulton(line)) = sys.line_through(pts[0], pts[1]) else { return Vec::new() };
    let xs = pts.iter().map(|p| &p.x);
    let (x0, x1) = (xs.clone().min().expect("points").clone(), xs.max().expect("points").clone());
    let ys: Vec<f64> = pts.iter().map(|p| to_f64(&p.y)).collect();
    let y_range = (ys.iter().copied().fold(f64::INFINITY, f64::min), ys.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    moulton_path(&line, bend, &x0, &x1, y_range)
}

fn moulton_figure(spec: &SceneSpec) -> Result<Figure, RenderError> {
    let sys = spec.system();
    let LineSystem::Moulton(bend) = &sys else { unreachable!("validated") };
    let w = moulton_desargues_counterexample(bend).map_err(construction)?;
    let [t1, t2] = &w.triangles;
    let mut fig = Figure::new(format!("Moulton plane, bend {bend}: perspective triangles with a broken axis"));
    for i in 0..3 {
        fig.path(moulton_span(&sys, &[&w.center, &t1[i], &t2[i]]), "perspective");
    }
    for (s, (i, j)) in w.side_points.iter().zip([(0, 1), (0, 2), (1, 2)]) {
        fig.path(moulton_span(&sys, &[&t1[i], &t1[j], s]), "side");
        fig.path(moulton_span(&sys, &[&t2[i], &t2[j], s]), "side");
    }
    for (t, class) in [(t1, "triangle-1"), (t2, "triangle-2")] {
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            fig.path(moulton_span(&sys, &[&t[i], &t[j]]), class);
        }
        fig.fit.extend(t.iter().map(RatPoint::to_f64));
    }
    // the line through I and J, which misses K
    let [i, j, k] = &w.side_points;
    let far = |p: &RatPoint, q: &RatPoint| {
        let lo = if p.x < q.x { &p.x } else { &q.x };
        let hi = if p.x < q.x { &q.x } else { &p.x };
        (lo - rat(1, 1), hi + rat(1, 1))
    };
    if let Ok(SystemLine::Moulton(line)) = sys.line_through(i, j) {
        let (x0, x1) = far(i, j);
        let ys = (to_f64(&i.y).min(to_f64(&j.y)) - 1.0, to_f64(&i.y).max(to_f64(&j.y)) + 1.0);
        fig.path(moulton_path(&line, bend, &x0, &x1, ys), "moulton");
    }
    fig.dot(w.center.to_f64(), "point", "O");
    for (names, t) in [(["A", "B", "C"], t1), (["A'", "B'", "C'"], t2)] {
        for (n, p) in names.iter().zip(t) {
            fig.dot(p.to_f64(), "point", *n);
        }
    }
    for (n, p) in ["I", "J", "K"].iter().zip([i, j, k]) {
        fig.dot(p.to_f64(), "point", *n);
    }
    Ok(fig)
}

// ---- φ ------------------------------------------------------------------------

fn phi_figure(spec: &SceneSpec) -> Result<Figure, RenderError> {
    let plane = spec.plane();
    let map = phi_map(spec).map_err(construction)?;
    let mut fig = Figure::new("Pasch map: model triangle (left) and its image (right)");
    // the model panel sits to the left of the metric one
    let (lo, hi) = model_box(&map);
    let right = match plane.domain() {
        Some(ConvexBody::Disk { center, radius }) => center.x - radius,
        _ => [map.a, map.b, map.c].iter().map(|p| p.x).fold(f64::INFINITY, f64::min),
    };
    let shift = V2::new(right - 0.2 - hi.x, 0.0);
    let m = map.model.map(|p| p + shift);
    fig.polygon(m.to_vec(), "triangle-1");
    domain_outline(&mut fig, &plane);
    fig.polygon(vec![map.a, map.b, map.c], "triangle-2");
    const STEPS: usize = 8;
    for i in 0..=STEPS {
        for j in 0..=STEPS {
            let q = P2::new(
                lo.x + 0.5 + (hi.x - lo.x - 1.0) * i as f64 / STEPS as f64,
                lo.y + 0.5 + (hi.y - lo.y - 1.0) * j as f64 / STEPS as f64,
            );
            let inside = (0..3).all(|k| {
                let (u, v) = (map.model[k], map.model[(k + 1) % 3]);
                (v - u).perp(&(q - u)) >= -1e-12
            });
            if !inside {
                continue;
            }
            if let Ok(img) = pasch_phi(&plane, &map, &q) {
                fig.dot(q + shift, "phi-model", "");
                fig.dot(img, "phi-image", "");
            }
        }
    }
    for (n, p) in ["A", "B", "C", "P"].iter().zip([m[0], m[1], m[2], map.model_p + shift]) {
        fig.dot(p, "point", *n);
    }
    for (n, p) in ["a", "b", "c", "p"].iter().zip([map.a, map.b, map.c, map.p]) {
        fig.dot(p, "point", *n);
    }
    Ok(fig)
}
