//! Numeric straight planes whose geodesics are affine chords.
//!
//! Four metrics are provided on a planar carrier:
//!
//! - `Euclidean`: the whole plane with `‖y − x‖₂`.
//! - `Minkowski`: the whole plane with the gauge of a symmetric body.
//! - `HilbertWeak`: the interior of a convex domain with the weak Hilbert
//!   metric `h`.
//! - `ProjectiveSum`: the interior of a convex domain with `‖y − x‖₂ + h`.
//!
//! ## The weak Hilbert metric in closed form
//!
//! `h(x, y)` is defined as the infimum of
//! `log( ‖x−b‖/‖y−b‖ · ‖y−a‖/‖x−a‖ )` over pairs `a, b` of the domain with
//! `y ∈ [x, b]` and `x ∈ [a, y]`. Such `a` lies on the ray from `x` away from
//! `y` and `b` on the ray from `y` away from `x`. Writing `‖x−b‖/‖y−b‖ =
//! 1 + ‖y−x‖/‖y−b‖`, the first factor strictly decreases as `b` moves
//! outward; likewise the second factor strictly decreases as `a` moves
//! outward. Both factors stay above 1, so the infimum is approached by
//! pushing `a` and `b` to the chord endpoints on the boundary. For a
//! bounded domain it equals the value at those endpoints; a ray that never
//! leaves an unbounded domain contributes the factor 1.
//!
//! With `σ_b = ‖y−b‖/‖y−x‖` and `σ_a = ‖x−a‖/‖y−x‖` (the exit parameters
//! of the two rays in units of `‖y−x‖`) this is
//! `h = ln(1 + 1/σ_b) + ln(1 + 1/σ_a)`, which is how it is evaluated.

use serde::{Deserialize, Serialize};

use crate::body::{ConvexBody, GaugeBody, P2, V2};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("point {0:?} is outside the carrier")]
    OutsideCarrier(P2),
    #[error("points coincide")]
    CoincidentPoints,
    #[error("geodesics coincide")]
    CoincidentLines,
    #[error("the metric vanishes along this line; no arclength parametrization")]
    DegenerateLine,
}

pub type Result<T> = std::result::Result<T, MetricError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StraightPlane {
    Euclidean,
    Minkowski { gauge: GaugeBody },
    HilbertWeak { domain: ConvexBody },
    ProjectiveSum { domain: ConvexBody },
}

fn finite(p: &P2) -> bool {
    p.x.is_finite() && p.y.is_finite()
}

/// Chord endpoints `a` (behind `x`) and `b` (beyond `y`) on the boundary of
/// `body`; `None` marks an endpoint at infinity.
pub fn chord_boundary_intersection(body: &ConvexBody, x: &P2, y: &P2) -> Result<(Option<P2>, Option<P2>)> {
    check_interior(body, x)?;
    check_interior(body, y)?;
    if x == y {
        return Err(MetricError::CoincidentPoints);
    }
    let d = y - x;
    Ok((body.exit_point(x, &-d), body.exit_point(y, &d)))
}

fn check_interior(body: &ConvexBody, p: &P2) -> Result<()> {
    if body.contains_interior(p) {
        Ok(())
    } else {
        Err(MetricError::OutsideCarrier(*p))
    }
}

/// `ln(1 + 1/σ)`, with an infinite exit contributing 0.
fn exit_term(sigma: Option<f64>) -> f64 {
    sigma.map_or(0.0, |s| (1.0 / s).ln_1p())
}

pub fn hilbert_distance(domain: &ConvexBody, x: &P2, y: &P2) -> Result<f64> {
    check_interior(domain, x)?;
    check_interior(domain, y)?;
    if x == y {
        return Ok(0.0);
    }
    let d = y - x;
    let beyond_y = domain.exit_param(y, &d);
    let behind_x = domain.exit_param(x, &-d);
    Ok(exit_term(beyond_y) + exit_term(behind_x))
}

/// Arclength law of a geodesic as a function of the signed Euclidean
/// parameter `τ` measured from its base point.
#[derive(Debug, Clone, Copy, PartialEq)]
enum ArcLaw {
    Scaled(f64),
    /// Chord reaching `behind` units back and `ahead` units forward.
    Hilbert { behind: Option<f64>, ahead: Option<f64> },
    HilbertPlusEuclid { behind: Option<f64>, ahead: Option<f64> },
}

/// Signed Hilbert arclength from the base point:
/// `ln(1 + τ/A) − ln(1 − τ/B)` for a chord `(−A, B)`.
fn hilbert_arc(behind: Option<f64>, ahead: Option<f64>, tau: f64) -> f64 {
    behind.map_or(0.0, |a| (tau / a).ln_1p()) - ahead.map_or(0.0, |b| (-tau / b).ln_1p())
}

fn hilbert_arc_inverse(behind: Option<f64>, ahead: Option<f64>, s: f64) -> f64 {
    match (behind, ahead) {
        (Some(a), Some(b)) => a * b * s.exp_m1() / (a * s.exp() + b),
        (None, Some(b)) => -b * (-s).exp_m1(),
        (Some(a), None) => a * s.exp_m1(),
        (None, None) => f64::NAN,
    }
}

/// An affine chord with its arclength parametrization in the plane's metric.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicLine {
    base: P2,
    dir: V2,
    /// Euclidean parameter interval of the carrier part of the chord.
    lo: f64,
    hi: f64,
    law: ArcLaw,
}

impl GeodesicLine {
    pub fn base(&self) -> P2 {
        self.base
    }

    /// Euclidean unit direction.
    pub fn direction(&self) -> V2 {
        self.dir
    }

    /// Euclidean parameter interval of the chord inside the carrier.
    pub fn param_interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn point_at_param(&self, tau: f64) -> P2 {
        self.base + tau * self.dir
    }

    /// Signed Euclidean parameter of the orthogonal projection of `p`.
    pub fn param_of(&self, p: &P2) -> f64 {
        (p - self.base).dot(&self.dir)
    }

    /// Euclidean distance from `p` to the underlying line.
    pub fn residual(&self, p: &P2) -> f64 {
        let v = p - self.base;
        (v.x * self.dir.y - v.y * self.dir.x).abs()
    }

    /// Signed metric arclength from the base point to parameter `tau`.
    pub fn arclength_at_param(&self, tau: f64) -> f64 {
        match self.law {
            ArcLaw::Scaled(k) => k * tau,
            ArcLaw::Hilbert { behind, ahead } => hilbert_arc(behind, ahead, tau),
            ArcLaw::HilbertPlusEuclid { behind, ahead } => tau + hilbert_arc(behind, ahead, tau),
        }
    }

    pub fn arclength_of(&self, p: &P2) -> f64 {
        self.arclength_at_param(self.param_of(p))
    }

    /// Euclidean parameter at signed arclength `s`.
    pub fn param_at_arclength(&self, s: f64) -> f64 {
        match self.law {
            ArcLaw::Scaled(k) => s / k,
            ArcLaw::Hilbert { behind, ahead } => hilbert_arc_inverse(behind, ahead, s),
            ArcLaw::HilbertPlusEuclid { behind, ahead } => {
                // τ + h(τ) is increasing with |τ| ≤ |s|; safeguarded Newton
                let mut lo = behind.map_or(-s.abs(), |a| (-a).max(-s.abs()));
                let mut hi = ahead.map_or(s.abs(), |b| b.min(s.abs()));
                let mut tau = hilbert_arc_inverse(behind, ahead, s).clamp(lo, hi);
                if !tau.is_finite() {
                    tau = 0.5 * (lo + hi);
                }
                for _ in 0..200 {
                    let f = tau + hilbert_arc(behind, ahead, tau) - s;
                    if f == 0.0 {
                        break;
                    }
                    if f > 0.0 {
                        hi = tau;
                    } else {
                        lo = tau;
                    }
                    let df = 1.0
                        + behind.map_or(0.0, |a| 1.0 / (a + tau))
                        + ahead.map_or(0.0, |b| 1.0 / (b - tau));
                    let newton = tau - f / df;
                    let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
                    if next == tau || hi - lo <= f64::EPSILON * tau.abs().max(1e-300) {
                        tau = next;
                        break;
                    }
                    tau = next;
                }
                tau
            }
        }
    }

    /// The point at signed arclength `s` from the base point.
    pub fn point_at(&self, s: f64) -> P2 {
        self.point_at_param(self.param_at_arclength(s))
    }
}

impl StraightPlane {
    pub fn hilbert_disk() -> Self {
        StraightPlane::HilbertWeak { domain: ConvexBody::unit_disk() }
    }

    /// The convex domain for the two domain-based metrics.
    pub fn domain(&self) -> Option<&ConvexBody> {
        match self {
            StraightPlane::HilbertWeak { domain } | StraightPlane::ProjectiveSum { domain } => Some(domain),
            _ => None,
        }
    }

    pub fn in_carrier(&self, p: &P2) -> bool {
        finite(p) && self.domain().is_none_or(|d| d.contains_interior(p))
    }

    fn check(&self, p: &P2) -> Result<()> {
        if self.in_carrier(p) {
            Ok(())
        } else {
            Err(MetricError::OutsideCarrier(*p))
        }
    }

    pub fn distance(&self, x: &P2, y: &P2) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(match self {
            StraightPlane::Euclidean => (y - x).norm(),
            StraightPlane::Minkowski { gauge } => gauge.gauge(&(y - x)),
            StraightPlane::HilbertWeak { domain } => hilbert_distance(domain, x, y)?,
            StraightPlane::ProjectiveSum { domain } => (y - x).norm() + hilbert_distance(domain, x, y)?,
        })
    }

    /// The chord through `x` and `y`, parametrized by arclength with
    /// `point_at(0) = x` and `point_at(d(x, y)) = y`.
    pub fn geodesic_through(&self, x: &P2, y: &P2) -> Result<GeodesicLine> {
        self.check(x)?;
        self.check(y)?;
        if x == y {
            return Err(MetricError::CoincidentPoints);
        }
        let dir = (y - x).normalize();
        let (lo, hi, law) = match self {
            StraightPlane::Euclidean => (f64::NEG_INFINITY, f64::INFINITY, ArcLaw::Scaled(1.0)),
            StraightPlane::Minkowski { gauge } => {
                (f64::NEG_INFINITY, f64::INFINITY, ArcLaw::Scaled(gauge.gauge(&dir)))
            }
            StraightPlane::HilbertWeak { domain } | StraightPlane::ProjectiveSum { domain } => {
                let ahead = domain.exit_param(x, &dir);
                let behind = domain.exit_param(x, &-dir);
                let (lo, hi) = (behind.map_or(f64::NEG_INFINITY, |a| -a), ahead.unwrap_or(f64::INFINITY));
                let law = if matches!(self, StraightPlane::HilbertWeak { .. }) {
                    if behind.is_none() && ahead.is_none() {
                        return Err(MetricError::DegenerateLine);
                    }
                    ArcLaw::Hilbert { behind, ahead }
                } else {
                    ArcLaw::HilbertPlusEuclid { behind, ahead }
                };
                (lo, hi, law)
            }
        };
        Ok(GeodesicLine { base: *x, dir, lo, hi, law })
    }

    /// Intersection of the underlying chords when it lies in the carrier.
    pub fn line_line_meet(&self, g1: &GeodesicLine, g2: &GeodesicLine) -> Result<Option<P2>> {
        let (u, v) = (g1.dir, g2.dir);
        let w = g2.base - g1.base;
        let denom = u.x * v.y - u.y * v.x;
        let scale = 1.0 + g1.base.coords.norm() + g2.base.coords.norm();
        if denom.abs() <= 1e-15 {
            if g1.residual(&g2.base) <= 1e-12 * scale {
                return Err(MetricError::CoincidentLines);
            }
            if denom == 0.0 {
                return Ok(None);
            }
        }
        let t = (w.x * v.y - w.y * v.x) / denom;
        let p = g1.point_at_param(t);
        Ok(self.in_carrier(&p).then_some(p))
    }
}

/// Cross-ratio `(a, b; c, d)` of four points on a common line, from their
/// affine parameters along that line.
pub fn cross_ratio_on_line(a: &P2, b: &P2, c: &P2, d: &P2) -> f64 {
    let dir = if a != b { b - a } else { c - a };
    let t = |p: &P2| (p - a).dot(&dir) / dir.norm_squared();
    let (ta, tb, tc, td) = (t(a), t(b), t(c), t(d));
    ((tc - ta) * (td - tb)) / ((tc - tb) * (td - ta))
}

/// One row of a distance export: `x1,y1,x2,y2,d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceSample {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub d: f64,
}

impl DistanceSample {
    pub fn new(x: &P2, y: &P2, d: f64) -> Self {
        Self { x1: x.x, y1: x.y, x2: y.x, y2: y.y, d }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::ConvexPolygon;
    use crate::rat::int;

    fn square() -> ConvexBody {
        ConvexBody::Polygon(ConvexPolygon::centered_square(int(1)))
    }

    #[test]
    fn diameter_chord() {
        let (a, b) = chord_boundary_intersection(&ConvexBody::unit_disk(), &P2::origin(), &P2::new(0.5, 0.0)).unwrap();
        assert_eq!(a, Some(P2::new(-1.0, 0.0)));
        assert_eq!(b, Some(P2::new(1.0, 0.0)));
        let (a, b) = chord_boundary_intersection(&square(), &P2::origin(), &P2::new(0.5, 0.0)).unwrap();
        assert_eq!(a, Some(P2::new(-1.0, 0.0)));
        assert_eq!(b, Some(P2::new(1.0, 0.0)));
    }

    #[test]
    fn chord_errors() {
        let disk = ConvexBody::unit_disk();
        assert_eq!(
            chord_boundary_intersection(&disk, &P2::origin(), &P2::origin()),
            Err(MetricError::CoincidentPoints)
        );
        assert!(matches!(
            chord_boundary_intersection(&disk, &P2::origin(), &P2::new(1.0, 0.0)),
            Err(MetricError::OutsideCarrier(_))
        ));
        assert!(hilbert_distance(&disk, &P2::new(2.0, 0.0), &P2::origin()).is_err());
    }

    #[test]
    fn hilbert_log_three() {
        let x = P2::origin();
        let y = P2::new(0.5, 0.0);
        for body in [ConvexBody::unit_disk(), square()] {
            let h = hilbert_distance(&body, &x, &y).unwrap();
            assert!((h - 3f64.ln()).abs() <= 1e-12, "{h}");
            assert_eq!(hilbert_distance(&body, &y, &y).unwrap(), 0.0);
        }
        // closed form along a diameter: ln((1 + r)/(1 − r))
        let r: f64 = 0.9;
        let h = hilbert_distance(&ConvexBody::unit_disk(), &x, &P2::new(0.0, r)).unwrap();
        assert!((h - ((1.0 + r) / (1.0 - r)).ln()).abs() < 1e-13);
    }

    #[test]
    fn strip_degeneracy() {
        let strip = ConvexBody::strip(-1.0, Some(1.0)).unwrap();
        let h = hilbert_distance(&strip, &P2::new(-3.0, 0.2), &P2::new(5.0, 0.2)).unwrap();
        assert_eq!(h, 0.0);
        assert!(hilbert_distance(&strip, &P2::new(0.0, 0.0), &P2::new(1.0, 0.5)).unwrap() > 0.0);
        let half = ConvexBody::strip(0.0, None).unwrap();
        assert_eq!(hilbert_distance(&half, &P2::new(0.0, 1.0), &P2::new(7.0, 1.0)).unwrap(), 0.0);
        assert!(hilbert_distance(&half, &P2::new(0.0, 1.0), &P2::new(0.0, 2.0)).unwrap() > 0.0);
        let plane = StraightPlane::HilbertWeak { domain: half };
        assert_eq!(
            plane.geodesic_through(&P2::new(0.0, 1.0), &P2::new(3.0, 1.0)),
            Err(MetricError::DegenerateLine)
        );
    }

    #[test]
    fn metric_examples() {
        let gauge = GaugeBody::new(square()).unwrap();
        let mink = StraightPlane::Minkowski { gauge };
        assert_eq!(mink.distance(&P2::origin(), &P2::new(3.0, 4.0)).unwrap(), 4.0);
        let ps = StraightPlane::ProjectiveSum { domain: ConvexBody::unit_disk() };
        let d = ps.distance(&P2::origin(), &P2::new(0.5, 0.0)).unwrap();
        assert!((d - (0.5 + 3f64.ln())).abs() < 1e-12);
        let p = P2::new(0.1, -0.3);
        for plane in [StraightPlane::Euclidean, mink, StraightPlane::hilbert_disk(), ps] {
            assert_eq!(plane.distance(&p, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn geodesic_endpoints() {
        let x = P2::new(0.1, 0.2);
        let y = P2::new(-0.3, 0.5);
        let planes = [
            StraightPlane::Euclidean,
            StraightPlane::Minkowski { gauge: GaugeBody::new(square()).unwrap() },
            StraightPlane::hilbert_disk(),
            StraightPlane::ProjectiveSum { domain: square() },
            StraightPlane::ProjectiveSum { domain: ConvexBody::strip(0.0, None).unwrap() },
        ];
        for plane in planes {
            let g = plane.geodesic_through(&x, &y).unwrap();
            let d = plane.distance(&x, &y).unwrap();
            assert!((g.point_at(0.0) - x).norm() < 1e-15);
            assert!((g.point_at(d) - y).norm() < 1e-12, "{plane:?}");
            assert!((g.arclength_of(&y) - d).abs() < 1e-12);
        }
    }

    #[test]
    fn hilbert_geodesic_inverts_diameter_distance() {
        let g = StraightPlane::hilbert_disk().geodesic_through(&P2::origin(), &P2::new(0.5, 0.0)).unwrap();
        let q = g.point_at(3f64.ln());
        assert!((q - P2::new(0.5, 0.0)).norm() < 1e-15);
        let q = g.point_at(-3f64.ln());
        assert!((q - P2::new(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn meets() {
        let disk = StraightPlane::hilbert_disk();
        let g1 = disk.geodesic_through(&P2::new(-0.5, 0.0), &P2::new(0.5, 0.0)).unwrap();
        let g2 = disk.geodesic_through(&P2::new(0.0, -0.5), &P2::new(0.0, 0.5)).unwrap();
        assert_eq!(disk.line_line_meet(&g1, &g2).unwrap(), Some(P2::origin()));
        let g3 = disk.geodesic_through(&P2::new(-0.5, 0.3), &P2::new(0.5, 0.3)).unwrap();
        assert_eq!(disk.line_line_meet(&g1, &g3).unwrap(), None);
        let g4 = disk.geodesic_through(&P2::new(0.2, 0.0), &P2::new(0.1, 0.0)).unwrap();
        assert_eq!(disk.line_line_meet(&g1, &g4), Err(MetricError::CoincidentLines));
        // chords whose lines cross outside the disk
        let g5 = disk.geodesic_through(&P2::new(0.9, 0.0), &P2::new(0.0, 0.9)).unwrap();
        let g6 = disk.geodesic_through(&P2::new(0.9, 0.1), &P2::new(0.0, 0.95)).unwrap();
        assert_eq!(disk.line_line_meet(&g5, &g6).unwrap(), None);
    }

    #[test]
    fn plane_json() {
        let p: StraightPlane =
            serde_json::from_str(r#"{"kind":"hilbert_weak","domain":{"kind":"disk","center":[0,0],"radius":1}}"#)
                .unwrap();
        assert_eq!(p, StraightPlane::hilbert_disk());
        let m: StraightPlane = serde_json::from_str(
            r#"{"kind":"minkowski","gauge":{"kind":"polygon","vertices":[["-1","-1"],["1","-1"],["1","1"],["-1","1"]]}}"#,
        )
        .unwrap();
        assert!(matches!(m, StraightPlane::Minkowski { .. }));
        assert!(serde_json::from_str::<StraightPlane>(
            r#"{"kind":"minkowski","gauge":{"kind":"disk","center":[1,0],"radius":1}}"#
        )
        .is_err());
    }
}
