//! Convex bodies: exact rational polygons, disks, ellipses and the
//! axis-aligned strips used for unbounded domains.

use nalgebra::{Point2, Vector2};
use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rat::{self, orient, Rat, RatPoint};

pub type P2 = Point2<f64>;
pub type V2 = Vector2<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BodyError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon vertices are not strictly convex in counterclockwise order")]
    NotStrictlyConvex,
    #[error("radius and semi-axes must be positive and finite")]
    NonPositiveSize,
    #[error("strip bounds are empty or not finite")]
    EmptyStrip,
    #[error("gauge body must be bounded")]
    Unbounded,
    #[error("gauge body is not centrally symmetric about the origin")]
    NotCentrallySymmetric,
    #[error("origin is not an interior point of the gauge body")]
    OriginNotInterior,
    #[error("coordinate is not a finite number")]
    NonFinite,
}

/// A strictly convex polygon with exact rational vertices in
/// counterclockwise order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<RatPoint>", into = "Vec<RatPoint>")]
pub struct ConvexPolygon {
    vertices: Vec<RatPoint>,
}

impl TryFrom<Vec<RatPoint>> for ConvexPolygon {
    type Error = BodyError;
    fn try_from(v: Vec<RatPoint>) -> Result<Self, BodyError> {
        Self::new(v)
    }
}

impl From<ConvexPolygon> for Vec<RatPoint> {
    fn from(p: ConvexPolygon) -> Self {
        p.vertices
    }
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<RatPoint>) -> Result<Self, BodyError> {
        let n = vertices.len();
        if n < 3 {
            return Err(BodyError::TooFewVertices(n));
        }
        // every other vertex strictly left of every edge: strict convexity,
        // counterclockwise orientation and simplicity in one test
        for i in 0..n {
            let (p, q) = (&vertices[i], &vertices[(i + 1) % n]);
            for (j, r) in vertices.iter().enumerate() {
                if j != i && j != (i + 1) % n && !orient(p, q, r).is_positive() {
                    return Err(BodyError::NotStrictlyConvex);
                }
            }
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: Rat, y0: Rat, x1: Rat, y1: Rat) -> Result<Self, BodyError> {
        Self::new(vec![
            RatPoint::new(x0.clone(), y0.clone()),
            RatPoint::new(x1.clone(), y0),
            RatPoint::new(x1, y1.clone()),
            RatPoint::new(x0, y1),
        ])
    }

    /// `[-h, h]²`
    pub fn centered_square(h: Rat) -> Self {
        Self::rectangle(-h.clone(), -h.clone(), h.clone(), h).expect("positive half-width")
    }

    pub fn unit_square() -> Self {
        Self::rectangle(Rat::zero(), Rat::zero(), rat::int(1), rat::int(1)).expect("valid")
    }

    pub fn vertices(&self) -> &[RatPoint] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (&RatPoint, &RatPoint)> {
        let n = self.vertices.len();
        (0..n).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }

    pub fn contains_closed(&self, p: &RatPoint) -> bool {
        self.edges().all(|(a, b)| !orient(a, b, p).is_negative())
    }

    pub fn contains_open(&self, p: &RatPoint) -> bool {
        self.edges().all(|(a, b)| orient(a, b, p).is_positive())
    }

    /// Parameter interval `[lo, hi]` of `{ t : p + t·d ∈ polygon }`, or
    /// `None` if the line misses the polygon.
    pub fn clip_line(&self, p: &RatPoint, d: &(Rat, Rat)) -> Option<(Rat, Rat)> {
        let mut lo: Option<Rat> = None;
        let mut hi: Option<Rat> = None;
        for (a, b) in self.edges() {
            // orient(a, b, p + t d) = f0 + t k must stay ≥ 0
            let f0 = orient(a, b, p);
            let (ex, ey) = b.sub(a);
            let k = &ex * &d.1 - &ey * &d.0;
            if k.is_zero() {
                if f0.is_negative() {
                    return None;
                }
                continue;
            }
            let t = -f0 / &k;
            if k.is_positive() {
                if lo.as_ref().is_none_or(|l| t > *l) {
                    lo = Some(t);
                }
            } else if hi.as_ref().is_none_or(|h| t < *h) {
                hi = Some(t);
            }
        }
        let (lo, hi) = (lo?, hi?);
        (lo <= hi).then_some((lo, hi))
    }

    /// Exact exit parameter of the ray `p + t·d`, `t > 0`, from an interior `p`.
    pub fn exit_param(&self, p: &RatPoint, d: &(Rat, Rat)) -> Rat {
        self.clip_line(p, d).expect("interior point lies in the polygon").1
    }

    pub fn is_centrally_symmetric(&self) -> bool {
        let n = self.vertices.len();
        n.is_multiple_of(2)
            && (0..n / 2).all(|i| {
                let (p, q) = (&self.vertices[i], &self.vertices[i + n / 2]);
                p.x == -q.x.clone() && p.y == -q.y.clone()
            })
    }

    /// Minkowski functional `inf { λ ≥ 0 : v ∈ λ·P }`, exact per edge:
    /// with outward normal `n` and offset `c = n·v_i > 0`, it is
    /// `max_i (n·v)/c`.
    pub fn gauge(&self, v: &RatPoint) -> Rat {
        self.edges()
            .map(|(a, b)| {
                let (ex, ey) = b.sub(a);
                let (nx, ny) = (ey, -ex);
                let c = &nx * &a.x + &ny * &a.y;
                (nx * &v.x + ny * &v.y) / c
            })
            .max()
            .expect("polygon has edges")
    }
}

/// A closed convex carrier with nonempty interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBody", into = "RawBody")]
pub enum ConvexBody {
    Polygon(ConvexPolygon),
    Disk { center: P2, radius: f64 },
    Ellipse { center: P2, semi_axes: [f64; 2], rotation: f64 },
    /// Horizontal strip `lower < y < upper`; a half-plane when `upper` is `None`.
    Strip { lower: f64, upper: Option<f64> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawBody {
    Polygon { vertices: ConvexPolygon },
    Disk { center: [f64; 2], radius: f64 },
    Ellipse { center: [f64; 2], semi_axes: [f64; 2], #[serde(default)] rotation: f64 },
    Strip { lower: f64, #[serde(default)] upper: Option<f64> },
}

impl TryFrom<RawBody> for ConvexBody {
    type Error = BodyError;
    fn try_from(raw: RawBody) -> Result<Self, BodyError> {
        match raw {
            RawBody::Polygon { vertices } => Ok(ConvexBody::Polygon(vertices)),
            RawBody::Disk { center, radius } => ConvexBody::disk(P2::new(center[0], center[1]), radius),
            RawBody::Ellipse { center, semi_axes, rotation } => {
                ConvexBody::ellipse(P2::new(center[0], center[1]), semi_axes, rotation)
            }
            RawBody::Strip { lower, upper } => ConvexBody::strip(lower, upper),
        }
    }
}

impl From<ConvexBody> for RawBody {
    fn from(b: ConvexBody) -> Self {
        match b {
            ConvexBody::Polygon(p) => RawBody::Polygon { vertices: p },
            ConvexBody::Disk { center, radius } => RawBody::Disk { center: [center.x, center.y], radius },
            ConvexBody::Ellipse { center, semi_axes, rotation } => {
                RawBody::Ellipse { center: [center.x, center.y], semi_axes, rotation }
            }
            ConvexBody::Strip { lower, upper } => RawBody::Strip { lower, upper },
        }
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl ConvexBody {
    pub fn disk(center: P2, radius: f64) -> Result<Self, BodyError> {
        if !center.iter().all(|c| c.is_finite()) {
            return Err(BodyError::NonFinite);
        }
        if !positive(radius) {
            return Err(BodyError::NonPositiveSize);
        }
        Ok(ConvexBody::Disk { center, radius })
    }

    pub fn unit_disk() -> Self {
        ConvexBody::Disk { center: P2::origin(), radius: 1.0 }
    }

    pub fn ellipse(center: P2, semi_axes: [f64; 2], rotation: f64) -> Result<Self, BodyError> {
        if !center.iter().all(|c| c.is_finite()) || !rotation.is_finite() {
            return Err(BodyError::NonFinite);
        }
        if !semi_axes.iter().all(|&s| positive(s)) {
            return Err(BodyError::NonPositiveSize);
        }
        Ok(ConvexBody::Ellipse { center, semi_axes, rotation })
    }

    pub fn strip(lower: f64, upper: Option<f64>) -> Result<Self, BodyError> {
        let ok = lower.is_finite() && upper.is_none_or(|u| u.is_finite() && u > lower);
        if !ok {
            return Err(BodyError::EmptyStrip);
        }
        Ok(ConvexBody::Strip { lower, upper })
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, ConvexBody::Strip { .. })
    }

    /// Coordinates in which an ellipse is the unit disk.
    fn ellipse_local(semi_axes: &[f64; 2], rotation: f64, v: &V2) -> V2 {
        let (s, c) = rotation.sin_cos();
        V2::new((c * v.x + s * v.y) / semi_axes[0], (-s * v.x + c * v.y) / semi_axes[1])
    }

    pub fn contains_interior(&self, p: &P2) -> bool {
        if !p.iter().all(|c| c.is_finite()) {
            return false;
        }
        match self {
            ConvexBody::Polygon(poly) => {
                RatPoint::from_f64(p).is_some_and(|q| poly.contains_open(&q))
            }
            ConvexBody::Disk { center, radius } => (p - center).norm_squared() < radius * radius,
            ConvexBody::Ellipse { center, semi_axes, rotation } => {
                Self::ellipse_local(semi_axes, *rotation, &(p - center)).norm_squared() < 1.0
            }
            ConvexBody::Strip { lower, upper } => p.y > *lower && upper.is_none_or(|u| p.y < u),
        }
    }

    /// Closed membership decided in exact arithmetic on the stored
    /// parameters (each `f64` is taken at its exact binary value, as are the
    /// rounded sine and cosine of an ellipse's rotation).
    pub fn contains_closed_exact(&self, p: &RatPoint) -> bool {
        let ex = |v: f64| rat::from_f64(v).expect("validated finite");
        match self {
            ConvexBody::Polygon(poly) => poly.contains_closed(p),
            ConvexBody::Disk { center, radius } => {
                let dx = &p.x - ex(center.x);
                let dy = &p.y - ex(center.y);
                let r = ex(*radius);
                &dx * &dx + &dy * &dy <= &r * &r
            }
            ConvexBody::Ellipse { center, semi_axes, rotation } => {
                let (s, c) = rotation.sin_cos();
                let (s, c) = (ex(s), ex(c));
                let dx = &p.x - ex(center.x);
                let dy = &p.y - ex(center.y);
                let u = (&c * &dx + &s * &dy) / ex(semi_axes[0]);
                let v = (&c * &dy - &s * &dx) / ex(semi_axes[1]);
                &u * &u + &v * &v <= Rat::from_integer(1.into())
            }
            ConvexBody::Strip { lower, upper } => {
                p.y >= ex(*lower) && upper.is_none_or(|u| p.y <= ex(u))
            }
        }
    }

    /// For interior `p` and nonzero `d`, the `t > 0` where `p + t·d` leaves
    /// the body; `None` if the ray never leaves.
    pub fn exit_param(&self, p: &P2, d: &V2) -> Option<f64> {
        match self {
            ConvexBody::Polygon(poly) => {
                let pe = RatPoint::from_f64(p)?;
                let de = (rat::from_f64(d.x)?, rat::from_f64(d.y)?);
                Some(rat::to_f64(&poly.exit_param(&pe, &de)))
            }
            ConvexBody::Disk { center, radius } => {
                Some(unit_disk_exit(&((p - center) / *radius), &(d / *radius)))
            }
            ConvexBody::Ellipse { center, semi_axes, rotation } => {
                let lp = Self::ellipse_local(semi_axes, *rotation, &(p - center));
                let ld = Self::ellipse_local(semi_axes, *rotation, d);
                Some(unit_disk_exit(&lp, &ld))
            }
            ConvexBody::Strip { lower, upper } => {
                if d.y > 0.0 {
                    upper.map(|u| (u - p.y) / d.y)
                } else if d.y < 0.0 {
                    Some((lower - p.y) / d.y)
                } else {
                    None
                }
            }
        }
    }

    /// Exit point of the ray from interior `p` through `p + d`; for polygons
    /// it is computed exactly and rounded once.
    pub fn exit_point(&self, p: &P2, d: &V2) -> Option<P2> {
        if let ConvexBody::Polygon(poly) = self {
            let pe = RatPoint::from_f64(p)?;
            let de = (rat::from_f64(d.x)?, rat::from_f64(d.y)?);
            let t = poly.exit_param(&pe, &de);
            let q = RatPoint::new(&pe.x + &t * &de.0, &pe.y + &t * &de.1);
            return Some(q.to_f64());
        }
        self.exit_param(p, d).map(|t| p + t * d)
    }
}

/// Positive root of `|p + t d|² = 1` for `|p| < 1`, in the cancellation-free form.
fn unit_disk_exit(p: &V2, d: &V2) -> f64 {
    let a = d.norm_squared();
    let b = d.dot(p);
    let c = p.norm_squared() - 1.0;
    let disc = (b * b - a * c).max(0.0).sqrt();
    if b > 0.0 {
        -c / (b + disc)
    } else {
        (disc - b) / a
    }
}

/// A centrally symmetric bounded convex body with the origin inside; the
/// unit ball of a Minkowski norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConvexBody", into = "ConvexBody")]
pub struct GaugeBody(ConvexBody);

impl TryFrom<ConvexBody> for GaugeBody {
    type Error = BodyError;
    fn try_from(b: ConvexBody) -> Result<Self, BodyError> {
        GaugeBody::new(b)
    }
}

impl From<GaugeBody> for ConvexBody {
    fn from(g: GaugeBody) -> Self {
        g.0
    }
}

impl GaugeBody {
    pub fn new(body: ConvexBody) -> Result<Self, BodyError> {
        match &body {
            ConvexBody::Strip { .. } => return Err(BodyError::Unbounded),
            ConvexBody::Polygon(p) => {
                if !p.contains_open(&RatPoint::origin()) {
                    return Err(BodyError::OriginNotInterior);
                }
                if !p.is_centrally_symmetric() {
                    return Err(BodyError::NotCentrallySymmetric);
                }
            }
            ConvexBody::Disk { center, .. } | ConvexBody::Ellipse { center, .. } => {
                if *center != P2::origin() {
                    return Err(BodyError::NotCentrallySymmetric);
                }
            }
        }
        Ok(GaugeBody(body))
    }

    pub fn body(&self) -> &ConvexBody {
        &self.0
    }

    pub fn gauge(&self, v: &V2) -> f64 {
        match &self.0 {
            ConvexBody::Polygon(p) => match (rat::from_f64(v.x), rat::from_f64(v.y)) {
                (Some(x), Some(y)) => rat::to_f64(&p.gauge(&RatPoint::new(x, y))),
                _ => f64::NAN,
            },
            ConvexBody::Disk { radius, .. } => v.norm() / radius,
            ConvexBody::Ellipse { semi_axes, rotation, .. } => {
                ConvexBody::ellipse_local(semi_axes, *rotation, v).norm()
            }
            ConvexBody::Strip { .. } => unreachable!("rejected at construction"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn pt(x: i64, y: i64) -> RatPoint {
        RatPoint::from_ints(x, y)
    }

    #[test]
    fn polygon_validation() {
        assert!(ConvexPolygon::new(vec![pt(0, 0), pt(1, 0)]).is_err());
        // clockwise
        assert_eq!(
            ConvexPolygon::new(vec![pt(0, 0), pt(0, 1), pt(1, 1), pt(1, 0)]),
            Err(BodyError::NotStrictlyConvex)
        );
        // three consecutive collinear
        assert!(ConvexPolygon::new(vec![pt(0, 0), pt(1, 0), pt(2, 0), pt(1, 1)]).is_err());
        // reflex vertex
        assert!(ConvexPolygon::new(vec![pt(0, 0), pt(2, 0), pt(1, 1), pt(2, 2), pt(0, 2)]).is_err());
        assert!(ConvexPolygon::new(vec![pt(0, 0), pt(2, 0), pt(1, 1)]).is_ok());
    }

    #[test]
    fn clip_and_contains() {
        let sq = ConvexPolygon::centered_square(int(1));
        assert!(sq.contains_open(&pt(0, 0)));
        assert!(!sq.contains_open(&pt(1, 0)));
        assert!(sq.contains_closed(&pt(1, 0)));
        let (lo, hi) = sq.clip_line(&RatPoint::origin(), &(rat(1, 2), int(0))).unwrap();
        assert_eq!((lo, hi), (int(-2), int(2)));
        assert!(sq.clip_line(&pt(0, 5), &(int(1), int(0))).is_none());
    }

    #[test]
    fn square_gauge_is_max_norm() {
        let sq = ConvexPolygon::centered_square(int(1));
        assert_eq!(sq.gauge(&pt(3, 4)), int(4));
        assert_eq!(sq.gauge(&pt(-5, 2)), int(5));
        assert!(sq.is_centrally_symmetric());
        let tri = ConvexPolygon::new(vec![pt(-1, -1), pt(1, -1), pt(0, 1)]).unwrap();
        assert!(!tri.is_centrally_symmetric());
    }

    #[test]
    fn disk_exit() {
        let d = ConvexBody::unit_disk();
        let t = d.exit_param(&P2::new(0.5, 0.0), &V2::new(0.5, 0.0)).unwrap();
        assert!((t - 1.0).abs() < 1e-15);
        let t = d.exit_param(&P2::new(0.0, 0.0), &V2::new(-0.5, 0.0)).unwrap();
        assert!((t - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ellipse_exit_matches_axis() {
        let e = ConvexBody::ellipse(P2::new(1.0, 2.0), [3.0, 1.0], std::f64::consts::FRAC_PI_2).unwrap();
        // rotated a quarter turn: the long axis is vertical
        let q = e.exit_point(&P2::new(1.0, 2.0), &V2::new(0.0, 1.0)).unwrap();
        assert!((q - P2::new(1.0, 5.0)).norm() < 1e-12);
        let q = e.exit_point(&P2::new(1.0, 2.0), &V2::new(1.0, 0.0)).unwrap();
        assert!((q - P2::new(2.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn strip_exit() {
        let s = ConvexBody::strip(0.0, None).unwrap();
        assert_eq!(s.exit_param(&P2::new(0.0, 1.0), &V2::new(1.0, 0.0)), None);
        assert_eq!(s.exit_param(&P2::new(0.0, 1.0), &V2::new(0.0, 1.0)), None);
        assert_eq!(s.exit_param(&P2::new(0.0, 1.0), &V2::new(0.0, -2.0)), Some(0.5));
        assert!(ConvexBody::strip(1.0, Some(1.0)).is_err());
    }

    #[test]
    fn gauge_body_validation() {
        assert_eq!(
            GaugeBody::new(ConvexBody::Polygon(ConvexPolygon::unit_square())),
            Err(BodyError::OriginNotInterior)
        );
        let tri = ConvexPolygon::new(vec![pt(-1, -1), pt(1, -1), pt(0, 1)]).unwrap();
        assert_eq!(GaugeBody::new(ConvexBody::Polygon(tri)), Err(BodyError::NotCentrallySymmetric));
        assert!(GaugeBody::new(ConvexBody::disk(P2::new(1.0, 0.0), 1.0).unwrap()).is_err());
        let g = GaugeBody::new(ConvexBody::disk(P2::origin(), 2.0).unwrap()).unwrap();
        assert!((g.gauge(&V2::new(3.0, 4.0)) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn body_json() {
        let json = r#"{"kind":"polygon","vertices":[["-1/1","-1/1"],["1/1","-1/1"],["1/1","1/1"],["-1/1","1/1"]]}"#;
        let b: ConvexBody = serde_json::from_str(json).unwrap();
        assert_eq!(b, ConvexBody::Polygon(ConvexPolygon::centered_square(int(1))));
        assert_eq!(serde_json::to_string(&b).unwrap(), json);
        let bad = r#"{"kind":"polygon","vertices":[["0","0"],["0","1"],["1","0"]]}"#;
        assert!(serde_json::from_str::<ConvexBody>(bad).is_err());
        let d: ConvexBody = serde_json::from_str(r#"{"kind":"disk","center":[0,0],"radius":1}"#).unwrap();
        assert_eq!(d, ConvexBody::unit_disk());
        assert!(serde_json::from_str::<ConvexBody>(r#"{"kind":"disk","center":[0,0],"radius":-1}"#).is_err());
        assert!(serde_json::from_str::<ConvexBody>(r#"{"kind":"disk","center":[0,0],"radius":1,"x":2}"#).is_err());
    }
}
