//! Synthetic constructions carried out with joins and meets only: harmonic
//! conjugates by the complete quadrangle, harmonic division of a base
//! quadrilateral, the Möbius net, the collineation ψ onto the unit square
//! and its extension, and the Pasch map φ from a Euclidean model triangle.
//!
//! The net machinery is generic over [`IncidencePlane`], implemented for the
//! numeric [`StraightPlane`]s and for [`ExactEuclidean`], the affine plane
//! over ℚ.

use std::collections::HashMap;
use std::fmt;

use num::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::body::{P2, V2};
use crate::metric::{GeodesicLine, MetricError, StraightPlane};
use crate::projective::{join, meet, ProjLine, ProjPoint};
use crate::rat::{self, orient, Rat, RatPoint};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstructionError {
    #[error("base quadrilateral is degenerate or not convex")]
    DegenerateQuadrilateral,
    #[error("auxiliary point {0} does not exist in the carrier")]
    MissingIdealIntersection(&'static str),
    #[error("degenerate auxiliary configuration: {0}")]
    DegenerateAuxiliary(&'static str),
    #[error("intersection {0} falls outside the carrier")]
    IntersectionOutsideCarrier(&'static str),
    #[error("the conjugate is at infinity")]
    NoFiniteConjugate,
    #[error("input points are not collinear")]
    NotCollinear,
    #[error("net depth {0} is out of range")]
    InvalidDepth(u32),
    #[error("harmonic division failed in cell {path}: {source}")]
    NetFailure { path: String, source: Box<ConstructionError> },
    #[error("net point {label} differs by {gap:e} between recursion paths")]
    InconsistentNet { label: NetLabel, gap: f64 },
    #[error("point lies outside the base quadrilateral")]
    OutsideHull,
    #[error("cell refinement failed before the requested resolution")]
    ResolutionUnreachable,
    #[error("no two admissible secants through the point")]
    NoAdmissibleSecants,
    #[error("secant images are nearly parallel (sine {0:e})")]
    IllConditionedIntersection(f64),
    #[error("model triangle is degenerate")]
    ModelDegenerate,
    #[error("reference point is not interior to side a-c")]
    NotOnSide,
    #[error("points coincide")]
    CoincidentPoints,
    #[error("both signs satisfy the ratio condition")]
    SignAmbiguous,
    #[error("no preimage found")]
    NoPreimage,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

pub type Result<T> = std::result::Result<T, ConstructionError>;

/// Join, meet and betweenness primitives the constructions are built from.
pub trait IncidencePlane: Sync {
    type Point: Clone + PartialEq + fmt::Debug + Send + Sync;
    type Line;

    /// Largest disagreement tolerated between two computations of one net
    /// point.
    const CONSISTENCY_TOL: f64;

    fn line(&self, p: &Self::Point, q: &Self::Point) -> Result<Self::Line>;
    /// Common point inside the carrier, `None` if there is none.
    fn meet(&self, l: &Self::Line, m: &Self::Line) -> Result<Option<Self::Point>>;
    fn in_carrier(&self, p: &Self::Point) -> bool;
    /// Sign of the turn `a → b → c`, zero when collinear.
    fn turn(&self, a: &Self::Point, b: &Self::Point, c: &Self::Point) -> i8;
    /// `x + 2^-h · (x − a)`.
    fn extend(&self, a: &Self::Point, x: &Self::Point, h: u32) -> Self::Point;
    fn gap(&self, p: &Self::Point, q: &Self::Point) -> f64;
    fn to_f64(&self, p: &Self::Point) -> P2;
}

/// The Euclidean plane over ℚ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExactEuclidean;

impl IncidencePlane for ExactEuclidean {
    type Point = RatPoint;
    type Line = ProjLine;
    const CONSISTENCY_TOL: f64 = 0.0;

    fn line(&self, p: &RatPoint, q: &RatPoint) -> Result<ProjLine> {
        join(&ProjPoint::from_rat_point(p), &ProjPoint::from_rat_point(q))
            .map_err(|_| ConstructionError::DegenerateAuxiliary("coincident points"))
    }

    fn meet(&self, l: &ProjLine, m: &ProjLine) -> Result<Option<RatPoint>> {
        let x = meet(l, m).map_err(|_| ConstructionError::DegenerateAuxiliary("coincident lines"))?;
        Ok(x.to_affine())
    }

    fn in_carrier(&self, _: &RatPoint) -> bool {
        true
    }

    fn turn(&self, a: &RatPoint, b: &RatPoint, c: &RatPoint) -> i8 {
        let o = orient(a, b, c);
        if o.is_zero() {
            0
        } else if o.is_positive() {
            1
        } else {
            -1
        }
    }

    fn extend(&self, a: &RatPoint, x: &RatPoint, h: u32) -> RatPoint {
        let e = Rat::new(1.into(), num::BigInt::from(1u8) << h as usize);
        a.lerp(x, &(e + rat::int(1)))
    }

    fn gap(&self, p: &RatPoint, q: &RatPoint) -> f64 {
        if p == q {
            0.0
        } else {
            (p.to_f64() - q.to_f64()).norm().max(f64::MIN_POSITIVE)
        }
    }

    fn to_f64(&self, p: &RatPoint) -> P2 {
        p.to_f64()
    }
}

fn cross(u: &V2, v: &V2) -> f64 {
    u.x * v.y - u.y * v.x
}

fn turn_f64(a: &P2, b: &P2, c: &P2) -> i8 {
    let (u, v) = (b - a, c - a);
    let k = cross(&u, &v);
    if k.abs() <= 1e-12 * u.norm() * v.norm() {
        0
    } else if k > 0.0 {
        1
    } else {
        -1
    }
}

fn metric_err(e: MetricError) -> ConstructionError {
    match e {
        MetricError::CoincidentPoints => ConstructionError::DegenerateAuxiliary("coincident points"),
        MetricError::CoincidentLines => ConstructionError::DegenerateAuxiliary("coincident lines"),
        MetricError::OutsideCarrier(_) => ConstructionError::IntersectionOutsideCarrier("join"),
        e => ConstructionError::Metric(e),
    }
}

impl IncidencePlane for StraightPlane {
    type Point = P2;
    type Line = GeodesicLine;
    const CONSISTENCY_TOL: f64 = 1e-8;

    fn line(&self, p: &P2, q: &P2) -> Result<GeodesicLine> {
        self.geodesic_through(p, q).map_err(metric_err)
    }

    fn meet(&self, l: &GeodesicLine, m: &GeodesicLine) -> Result<Option<P2>> {
        self.line_line_meet(l, m).map_err(metric_err)
    }

    fn in_carrier(&self, p: &P2) -> bool {
        StraightPlane::in_carrier(self, p)
    }

    fn turn(&self, a: &P2, b: &P2, c: &P2) -> i8 {
        turn_f64(a, b, c)
    }

    fn extend(&self, a: &P2, x: &P2, h: u32) -> P2 {
        x + (x - a) * 0.5f64.powi(h as i32)
    }

    fn gap(&self, p: &P2, q: &P2) -> f64 {
        (p - q).norm()
    }

    fn to_f64(&self, p: &P2) -> P2 {
        *p
    }
}

fn need<P>(p: Option<P>, what: &'static str) -> Result<P> {
    p.ok_or(ConstructionError::IntersectionOutsideCarrier(what))
}

/// Four corners labelled `a(0,0)`, `b(1,0)`, `y(1,1)`, `x(0,1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseQuadrilateral<P> {
    pub a: P,
    pub b: P,
    pub y: P,
    pub x: P,
}

impl<P: Clone> BaseQuadrilateral<P> {
    pub fn new(a: P, b: P, y: P, x: P) -> Self {
        Self { a, b, y, x }
    }

    /// Corners in boundary order `a, b, y, x`.
    pub fn corners(&self) -> [P; 4] {
        [self.a.clone(), self.b.clone(), self.y.clone(), self.x.clone()]
    }
}

impl BaseQuadrilateral<RatPoint> {
    pub fn unit_square() -> Self {
        let p = RatPoint::from_ints;
        Self::new(p(0, 0), p(1, 0), p(1, 1), p(0, 1))
    }
}

impl BaseQuadrilateral<P2> {
    pub fn unit_square() -> Self {
        Self::new(P2::new(0.0, 0.0), P2::new(1.0, 0.0), P2::new(1.0, 1.0), P2::new(0.0, 1.0))
    }
}

impl<P: Clone + PartialEq + fmt::Debug + Send + Sync> BaseQuadrilateral<P> {
    /// Strictly convex with every corner in the carrier.
    pub fn validate<Pl: IncidencePlane<Point = P>>(&self, pl: &Pl) -> Result<()> {
        let c = self.corners();
        if !c.iter().all(|p| pl.in_carrier(p)) {
            return Err(ConstructionError::DegenerateQuadrilateral);
        }
        let s = pl.turn(&c[0], &c[1], &c[2]);
        let convex = s != 0 && (0..4).all(|i| pl.turn(&c[i], &c[(i + 1) % 4], &c[(i + 2) % 4]) == s);
        if convex {
            Ok(())
        } else {
            Err(ConstructionError::DegenerateQuadrilateral)
        }
    }

    /// `z`, the meet of lines `ax` and `by`, when it lies in the carrier.
    pub fn z<Pl: IncidencePlane<Point = P>>(&self, pl: &Pl) -> Result<Option<P>> {
        pl.meet(&pl.line(&self.a, &self.x)?, &pl.line(&self.b, &self.y)?)
    }

    /// `p`, the meet of lines `ab` and `xy`, when it lies in the carrier.
    pub fn p<Pl: IncidencePlane<Point = P>>(&self, pl: &Pl) -> Result<Option<P>> {
        pl.meet(&pl.line(&self.a, &self.b)?, &pl.line(&self.x, &self.y)?)
    }
}

/// How a harmonic division was carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisionVariant {
    /// Through the auxiliary points `z` and `p` themselves.
    Direct,
    /// `z` or `p` is not in the carrier; each side point is instead the
    /// conjugate from a quadrangle whose extra vertex sits at relative
    /// distance `2^-halvings` beyond a corner.
    Pencil { halvings: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicDivision<P> {
    /// `(1/2, 1/2)`
    pub w: P,
    /// `(1/2, 0)`
    pub q: P,
    /// `(1, 1/2)`
    pub s: P,
    /// `(1/2, 1)`
    pub t: P,
    /// `(0, 1/2)`
    pub u: P,
    pub variant: DivisionVariant,
}

const MAX_HALVINGS: u32 = 40;

/// Harmonic conjugate of `ab ∩ m` with respect to `a, b`, where `m` is a
/// line through `x`, from the quadrangle with extra vertex `z` on line `ax`.
fn quadrangle_conjugate<Pl: IncidencePlane>(
    pl: &Pl,
    a: &Pl::Point,
    b: &Pl::Point,
    m: &Pl::Line,
    z: &Pl::Point,
    x: &Pl::Point,
) -> Result<Pl::Point> {
    let y = need(pl.meet(m, &pl.line(b, z)?)?, "y")?;
    let w = need(pl.meet(&pl.line(x, b)?, &pl.line(&y, a)?)?, "w")?;
    need(pl.meet(&pl.line(a, b)?, &pl.line(&w, z)?)?, "q")
}

/// Retry [`quadrangle_conjugate`] with `z` ever closer to `x` until every
/// intermediate point is inside the carrier.
fn pencil_conjugate<Pl: IncidencePlane>(
    pl: &Pl,
    a: &Pl::Point,
    b: &Pl::Point,
    x: &Pl::Point,
    m: &Pl::Line,
) -> Result<(Pl::Point, u32)> {
    let mut last = ConstructionError::IntersectionOutsideCarrier("z");
    for h in 1..=MAX_HALVINGS {
        let z = pl.extend(a, x, h);
        if !pl.in_carrier(&z) {
            continue;
        }
        match quadrangle_conjugate(pl, a, b, m, &z, x) {
            Ok(q) => return Ok((q, h)),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Harmonic division of the quadrilateral `abyx` into the five points
/// `w, q, s, t, u`.
pub fn harmonic_division<Pl: IncidencePlane>(
    pl: &Pl,
    quad: &BaseQuadrilateral<Pl::Point>,
) -> Result<HarmonicDivision<Pl::Point>> {
    quad.validate(pl)?;
    let BaseQuadrilateral { a, b, y, x } = quad;
    let w = pl
        .meet(&pl.line(a, y)?, &pl.line(x, b)?)?
        .ok_or(ConstructionError::DegenerateQuadrilateral)?;
    match harmonic_division_direct(pl, quad, &w) {
        Err(ConstructionError::MissingIdealIntersection(_)) => {}
        r => return r,
    }
    let (ab, xy, ax, by) = (pl.line(a, b)?, pl.line(x, y)?, pl.line(a, x)?, pl.line(b, y)?);
    let (q, h1) = pencil_conjugate(pl, a, b, x, &xy)?;
    let (t, h2) = pencil_conjugate(pl, x, y, a, &ab)?;
    let (u, h3) = pencil_conjugate(pl, a, x, b, &by)?;
    let (s, h4) = pencil_conjugate(pl, b, y, a, &ax)?;
    let halvings = h1.max(h2).max(h3).max(h4);
    Ok(HarmonicDivision { w, q, s, t, u, variant: DivisionVariant::Pencil { halvings } })
}

/// The construction through `z` and `p`; `MissingIdealIntersection` when
/// either is not a point of the carrier.
pub fn harmonic_division_direct<Pl: IncidencePlane>(
    pl: &Pl,
    quad: &BaseQuadrilateral<Pl::Point>,
    w: &Pl::Point,
) -> Result<HarmonicDivision<Pl::Point>> {
    let BaseQuadrilateral { a, b, y, x } = quad;
    let z = quad.z(pl)?.ok_or(ConstructionError::MissingIdealIntersection("z"))?;
    let p = quad.p(pl)?.ok_or(ConstructionError::MissingIdealIntersection("p"))?;
    let (zw, pw) = (pl.line(&z, w)?, pl.line(&p, w)?);
    let q = need(pl.meet(&zw, &pl.line(a, b)?)?, "q")?;
    let t = need(pl.meet(&zw, &pl.line(x, y)?)?, "t")?;
    let s = need(pl.meet(&pw, &pl.line(y, b)?)?, "s")?;
    let u = need(pl.meet(&pw, &pl.line(a, x)?)?, "u")?;
    Ok(HarmonicDivision { w: w.clone(), q, s, t, u, variant: DivisionVariant::Direct })
}

/// Harmonic conjugate of `p` with respect to `a, b` by the complete
/// quadrangle through the auxiliary points `z` (off line `ab`) and `x`
/// (on line `az`).
pub fn metric_harmonic_conjugate(
    plane: &StraightPlane,
    a: &P2,
    b: &P2,
    p: &P2,
    z: &P2,
    x: &P2,
) -> Result<P2> {
    if a == b || p == a || p == b {
        return Err(ConstructionError::DegenerateAuxiliary("coincident points"));
    }
    let ab = plane.line(a, b)?;
    let scale = 1.0 + a.coords.norm() + b.coords.norm();
    if ab.residual(p) > 1e-12 * scale {
        return Err(ConstructionError::NotCollinear);
    }
    if turn_f64(a, b, z) == 0 || turn_f64(a, z, x) != 0 || x == a || x == z {
        return Err(ConstructionError::DegenerateAuxiliary("z on ab or x off az"));
    }
    let px = plane.line(p, x)?;
    let y = need(plane.meet(&px, &plane.line(b, z)?)?, "y")?;
    let w = need(plane.meet(&plane.line(x, b)?, &plane.line(&y, a)?)?, "w")?;
    let wz = plane.line(&w, z)?;
    match plane.meet(&ab, &wz)? {
        Some(q) => Ok(q),
        None if cross(&ab.direction(), &wz.direction()).abs() <= 1e-12 => {
            Err(ConstructionError::NoFiniteConjugate)
        }
        None => Err(ConstructionError::IntersectionOutsideCarrier("q")),
    }
}

/// The dyadic point `(m/2^k, n/2^k)` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NetLabel {
    pub m: u64,
    pub n: u64,
    pub k: u32,
}

impl NetLabel {
    pub fn new(mut m: u64, mut n: u64, mut k: u32) -> Self {
        while k > 0 && m.is_multiple_of(2) && n.is_multiple_of(2) {
            m /= 2;
            n /= 2;
            k -= 1;
        }
        Self { m, n, k }
    }

    pub fn coords(&self) -> (f64, f64) {
        let d = (1u64 << self.k) as f64;
        (self.m as f64 / d, self.n as f64 / d)
    }

    /// Grid indices at depth `depth ≥ k`.
    pub fn at_depth(&self, depth: u32) -> (u64, u64) {
        let s = 1u64 << (depth - self.k);
        (self.m * s, self.n * s)
    }
}

fn dyadic(num: u64, k: u32) -> String {
    if num == 0 {
        return "0".into();
    }
    let l = NetLabel::new(num, 0, k);
    if l.k == 0 {
        format!("{}", l.m)
    } else {
        format!("{}/{}", l.m, 1u64 << l.k)
    }
}

impl fmt::Display for NetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", dyadic(self.m, self.k), dyadic(self.n, self.k))
    }
}

/// The Möbius net of a base quadrilateral to a given depth.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicNet<P> {
    base: BaseQuadrilateral<P>,
    depth: u32,
    /// Row-major by `n`, `(2^depth + 1)²` entries.
    points: Vec<P>,
    direct: usize,
    pencil: usize,
    max_gap: f64,
}

pub const MAX_NET_DEPTH: u32 = 10;

const QUADRANTS: [&str; 4] = ["aqwu", "qbsw", "uwtx", "wsyt"];

fn cell_path(level: u32, i: u64, j: u64) -> String {
    let mut parts = vec!["abyx"];
    for bit in (0..level).rev() {
        let q = ((i >> bit) & 1) + 2 * ((j >> bit) & 1);
        parts.push(QUADRANTS[q as usize]);
    }
    parts.join("/")
}

impl<P: Clone> HarmonicNet<P> {
    pub fn base(&self) -> &BaseQuadrilateral<P> {
        &self.base
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn side(&self) -> u64 {
        (1u64 << self.depth) + 1
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Point with grid indices `(m, n)` at full depth.
    pub fn at(&self, m: u64, n: u64) -> &P {
        &self.points[(n * self.side() + m) as usize]
    }

    pub fn get(&self, label: &NetLabel) -> Option<&P> {
        if label.k > self.depth {
            return None;
        }
        let (m, n) = label.at_depth(self.depth);
        (m < self.side() && n < self.side()).then(|| self.at(m, n))
    }

    /// All points with their labels, ordered by `n` then `m`.
    pub fn entries(&self) -> impl Iterator<Item = (NetLabel, &P)> {
        let side = self.side();
        let k = self.depth;
        self.points
            .iter()
            .enumerate()
            .map(move |(idx, p)| (NetLabel::new(idx as u64 % side, idx as u64 / side, k), p))
    }

    /// Corners of cell `(i, j)` at `level ≤ depth`.
    pub fn cell(&self, level: u32, i: u64, j: u64) -> BaseQuadrilateral<P> {
        let s = 1u64 << (self.depth - level);
        let (m0, n0, m1, n1) = (i * s, j * s, (i + 1) * s, (j + 1) * s);
        BaseQuadrilateral::new(
            self.at(m0, n0).clone(),
            self.at(m1, n0).clone(),
            self.at(m1, n1).clone(),
            self.at(m0, n1).clone(),
        )
    }

    /// Harmonic divisions done without and with the pencil variant.
    pub fn variant_counts(&self) -> (usize, usize) {
        (self.direct, self.pencil)
    }

    /// Largest disagreement seen between two computations of one point.
    pub fn max_gap(&self) -> f64 {
        self.max_gap
    }
}

/// Builds the net level by level. Cells of one level are divided in
/// parallel; results are merged in lexicographic cell order, so the first
/// computation of a shared edge point is kept and the others are checked
/// against it.
pub fn build_harmonic_net<Pl: IncidencePlane>(
    pl: &Pl,
    base: &BaseQuadrilateral<Pl::Point>,
    depth: u32,
) -> Result<HarmonicNet<Pl::Point>> {
    if depth > MAX_NET_DEPTH {
        return Err(ConstructionError::InvalidDepth(depth));
    }
    base.validate(pl)?;
    let side = (1u64 << depth) + 1;
    let idx = |m: u64, n: u64| (n * side + m) as usize;
    let mut slots: Vec<Option<Pl::Point>> = vec![None; (side * side) as usize];
    let top = side - 1;
    slots[idx(0, 0)] = Some(base.a.clone());
    slots[idx(top, 0)] = Some(base.b.clone());
    slots[idx(top, top)] = Some(base.y.clone());
    slots[idx(0, top)] = Some(base.x.clone());
    let (mut direct, mut pencil, mut max_gap) = (0, 0, 0.0f64);

    for level in 0..depth {
        let s = 1u64 << (depth - level);
        let h = s / 2;
        let cells: Vec<(u64, u64)> =
            (0..1u64 << level).flat_map(|i| (0..1u64 << level).map(move |j| (i, j))).collect();
        let corner = |m: u64, n: u64| slots[idx(m, n)].clone().expect("coarser level filled");
        let divided: Vec<Result<HarmonicDivision<Pl::Point>>> = cells
            .par_iter()
            .map(|&(i, j)| {
                let (m0, n0) = (i * s, j * s);
                let quad = BaseQuadrilateral::new(
                    corner(m0, n0),
                    corner(m0 + s, n0),
                    corner(m0 + s, n0 + s),
                    corner(m0, n0 + s),
                );
                harmonic_division(pl, &quad)
            })
            .collect();
        for (&(i, j), d) in cells.iter().zip(divided) {
            let d = d.map_err(|e| ConstructionError::NetFailure {
                path: cell_path(level, i, j),
                source: Box::new(e),
            })?;
            match d.variant {
                DivisionVariant::Direct => direct += 1,
                DivisionVariant::Pencil { .. } => pencil += 1,
            }
            let (m0, n0) = (i * s, j * s);
            let placed = [
                (m0 + h, n0 + h, d.w),
                (m0 + h, n0, d.q),
                (m0 + s, n0 + h, d.s),
                (m0 + h, n0 + s, d.t),
                (m0, n0 + h, d.u),
            ];
            for (m, n, p) in placed {
                match &slots[idx(m, n)] {
                    None => slots[idx(m, n)] = Some(p),
                    Some(old) => {
                        let gap = pl.gap(old, &p);
                        max_gap = max_gap.max(gap);
                        if gap > Pl::CONSISTENCY_TOL {
                            return Err(ConstructionError::InconsistentNet {
                                label: NetLabel::new(m, n, depth),
                                gap,
                            });
                        }
                    }
                }
            }
        }
    }
    let points = slots.into_iter().map(|p| p.expect("every label reached")).collect();
    Ok(HarmonicNet { base: base.clone(), depth, points, direct, pencil, max_gap })
}

/// Further bisection levels below the net depth used by [`psi_map`].
pub const PSI_REFINE: u32 = 16;
/// Bisection levels below the net depth used for the secant points of
/// [`psi_extend`].
pub const EXTEND_REFINE: u32 = 30;
/// Smallest admissible sine between the two secant images.
pub const MIN_SECANT_SINE: f64 = 0.05;

/// Signed distance of `v` from each edge of `quad`, positive inside; the
/// minimum over the edges.
fn inset(quad: &BaseQuadrilateral<P2>, v: &P2) -> f64 {
    let c = quad.corners();
    let sign = if cross(&(c[1] - c[0]), &(c[2] - c[0])) >= 0.0 { 1.0 } else { -1.0 };
    (0..4)
        .map(|i| {
            let e = c[(i + 1) % 4] - c[i];
            sign * cross(&e, &(v - c[i])) / e.norm()
        })
        .fold(f64::INFINITY, f64::min)
}

fn children(quad: &BaseQuadrilateral<P2>, d: &HarmonicDivision<P2>) -> [(u64, u64, BaseQuadrilateral<P2>); 4] {
    let BaseQuadrilateral { a, b, y, x } = quad.clone();
    let HarmonicDivision { w, q, s, t, u, .. } = d.clone();
    [
        (0, 0, BaseQuadrilateral::new(a, q, w, u)),
        (1, 0, BaseQuadrilateral::new(q, b, s, w)),
        (1, 1, BaseQuadrilateral::new(w, s, y, t)),
        (0, 1, BaseQuadrilateral::new(u, w, t, x)),
    ]
}

fn close(p: &P2, q: &P2) -> bool {
    (p - q).norm() <= 1e-12 * (1.0 + p.coords.norm())
}

/// ψ on the closed base quadrilateral with the default refinement.
pub fn psi_map(plane: &StraightPlane, net: &HarmonicNet<P2>, v: &P2) -> Result<P2> {
    psi_map_refined(plane, net, v, PSI_REFINE)
}

/// ψ(v) in the unit square. The point is located in nested cells, first
/// those of the net and then `refine` further levels of harmonic division;
/// the result is the dyadic center of the final cell, or the exact label
/// when `v` is a cell corner.
pub fn psi_map_refined(plane: &StraightPlane, net: &HarmonicNet<P2>, v: &P2, refine: u32) -> Result<P2> {
    let levels = net.depth() + refine;
    if levels > 52 {
        return Err(ConstructionError::InvalidDepth(levels));
    }
    let scale = 1.0 + v.coords.norm();
    let mut quad = net.base().clone();
    if !plane.in_carrier(v) || inset(&quad, v) < -1e-12 * scale {
        return Err(ConstructionError::OutsideHull);
    }
    let (mut i, mut j) = (0u64, 0u64);
    for level in 0..=levels {
        let corners = [(0, 0), (1, 0), (1, 1), (0, 1)];
        for ((di, dj), c) in corners.iter().zip(quad.corners()) {
            if close(&c, v) {
                let (m, n) = (2 * (i + di), 2 * (j + dj));
                let d = (1u64 << (level + 1)) as f64;
                return Ok(P2::new(m as f64 / d, n as f64 / d));
            }
        }
        if level == levels {
            break;
        }
        let kids: Vec<(u64, u64, BaseQuadrilateral<P2>)> = if level < net.depth() {
            [(0, 0), (1, 0), (1, 1), (0, 1)]
                .map(|(di, dj)| (di, dj, net.cell(level + 1, 2 * i + di, 2 * j + dj)))
                .to_vec()
        } else {
            let d = harmonic_division(plane, &quad).map_err(|_| ConstructionError::ResolutionUnreachable)?;
            children(&quad, &d).to_vec()
        };
        let (di, dj, next) = kids
            .into_iter()
            .map(|(di, dj, q)| (inset(&q, v), di, dj, q))
            .max_by(|l, r| l.0.total_cmp(&r.0))
            .map(|(_, di, dj, q)| (di, dj, q))
            .expect("four children");
        i = 2 * i + di;
        j = 2 * j + dj;
        quad = next;
    }
    let d = (1u64 << (levels + 1)) as f64;
    Ok(P2::new((2 * i + 1) as f64 / d, (2 * j + 1) as f64 / d))
}

/// Interior net points offered as secant anchors, the depth-2 labels
/// `(m/4, n/4)` with `0 < m, n < 4`.
pub fn secant_anchors(net: &HarmonicNet<P2>) -> Vec<P2> {
    if net.depth() < 2 {
        return Vec::new();
    }
    (1..4)
        .flat_map(|n| (1..4).map(move |m| (m, n)))
        .filter_map(|(m, n)| net.get(&NetLabel::new(m, n, 2)).copied())
        .collect()
}

/// Where the line through `v` and the interior point `o` crosses the
/// boundary of the quadrilateral: `(near, far)` as seen from `v`.
fn hull_crossings(quad: &BaseQuadrilateral<P2>, v: &P2, o: &P2) -> Option<(P2, P2)> {
    let d = o - v;
    let c = quad.corners();
    let mut ts: Vec<f64> = Vec::new();
    for i in 0..4 {
        let (p, e) = (c[i], c[(i + 1) % 4] - c[i]);
        let den = cross(&d, &e);
        if den == 0.0 {
            continue;
        }
        let w = p - v;
        let t = cross(&w, &e) / den;
        let mu = cross(&w, &d) / den;
        if (-1e-12..=1.0 + 1e-12).contains(&mu) {
            ts.push(t);
        }
    }
    let lo = ts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo.is_finite() && hi > lo).then(|| (v + lo * d, v + hi * d))
}

/// ψ(v) for `v` outside the base quadrilateral, from the two secants through
/// `v` and the interior anchors `o1`, `o2`.
pub fn psi_extend_via(plane: &StraightPlane, net: &HarmonicNet<P2>, v: &P2, o1: &P2, o2: &P2) -> Result<P2> {
    if !plane.in_carrier(v) || turn_f64(v, o1, o2) == 0 {
        return Err(ConstructionError::NoAdmissibleSecants);
    }
    let mut images = Vec::with_capacity(2);
    for o in [o1, o2] {
        let (e1, e2) = hull_crossings(net.base(), v, o).ok_or(ConstructionError::NoAdmissibleSecants)?;
        let f1 = psi_map_refined(plane, net, &e1, EXTEND_REFINE)?;
        let f2 = psi_map_refined(plane, net, &e2, EXTEND_REFINE)?;
        images.push((f1, f2 - f1));
    }
    let ((p, u), (q, w)) = (images[0], images[1]);
    let den = cross(&u, &w);
    let sine = den.abs() / (u.norm() * w.norm());
    if sine < MIN_SECANT_SINE {
        return Err(ConstructionError::IllConditionedIntersection(sine));
    }
    Ok(p + u * (cross(&(q - p), &w) / den))
}

/// Admissible anchor pairs for `v`, in deterministic order.
pub fn secant_pairs(plane: &StraightPlane, net: &HarmonicNet<P2>, v: &P2) -> Vec<(P2, P2)> {
    let anchors = secant_anchors(net);
    let mut out = Vec::new();
    for (i, o1) in anchors.iter().enumerate() {
        for o2 in &anchors[i + 1..] {
            if plane.in_carrier(v) && turn_f64(v, o1, o2) != 0 {
                out.push((*o1, *o2));
            }
        }
    }
    out
}

/// ψ extended to a carrier point outside the base quadrilateral. Points
/// inside are passed to [`psi_map`].
pub fn psi_extend(plane: &StraightPlane, net: &HarmonicNet<P2>, v: &P2) -> Result<P2> {
    if !plane.in_carrier(v) {
        return Err(ConstructionError::NoAdmissibleSecants);
    }
    if inset(net.base(), v) >= 0.0 {
        return psi_map(plane, net, v);
    }
    let mut last = ConstructionError::NoAdmissibleSecants;
    for (o1, o2) in secant_pairs(plane, net, v) {
        match psi_extend_via(plane, net, v, &o1, &o2) {
            Ok(p) => return Ok(p),
            Err(e @ ConstructionError::IllConditionedIntersection(_)) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// A metric triangle `abc`, a point `p` inside side `a-c`, and the
/// Euclidean model `ABC` with the same side lengths: `A` at the origin, `B`
/// on the positive x-axis, `C` above it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaschMap {
    pub a: P2,
    pub b: P2,
    pub c: P2,
    pub p: P2,
    pub model: [P2; 3],
    pub model_p: P2,
    /// `d(a,b)`, `d(b,c)`, `d(a,c)`.
    pub sides: [f64; 3],
}

/// Everything computed for one φ(Q).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiTrace {
    pub q: P2,
    pub model_s: P2,
    pub s: P2,
    pub lambda: f64,
    pub tau: f64,
}

impl PaschMap {
    pub fn new(plane: &StraightPlane, a: P2, b: P2, c: P2, p: P2) -> Result<Self> {
        let ab = plane.distance(&a, &b)?;
        let bc = plane.distance(&b, &c)?;
        let ac = plane.distance(&a, &c)?;
        let ap = plane.distance(&a, &p)?;
        let pc = plane.distance(&p, &c)?;
        if ab == 0.0 || ac == 0.0 {
            return Err(ConstructionError::ModelDegenerate);
        }
        let cx = (ab * ab + ac * ac - bc * bc) / (2.0 * ab);
        let cy2 = ac * ac - cx * cx;
        if cy2 <= (1e-10 * ac).powi(2) {
            return Err(ConstructionError::ModelDegenerate);
        }
        if p == a || p == c || (ap + pc - ac).abs() > 1e-10 * ac {
            return Err(ConstructionError::NotOnSide);
        }
        let model = [P2::origin(), P2::new(ab, 0.0), P2::new(cx, cy2.sqrt())];
        let model_p = model[0] + (model[2] - model[0]) * (ap / ac);
        Ok(Self { a, b, c, p, model, model_p, sides: [ab, bc, ac] })
    }

    /// Perimeter of the model path `A → B → C`.
    pub fn path_length(&self) -> f64 {
        self.sides[0] + self.sides[1]
    }

    /// Model point at distance `u` along `A → B → C`.
    pub fn model_at(&self, u: f64) -> P2 {
        let [ma, mb, mc] = self.model;
        if u <= self.sides[0] {
            ma + (mb - ma) * (u / self.sides[0])
        } else {
            mb + (mc - mb) * ((u - self.sides[0]) / self.sides[1])
        }
    }

    /// Metric point matching [`model_at`](Self::model_at), with
    /// `d(s, b) = ‖S − B‖`.
    pub fn metric_at(&self, plane: &StraightPlane, u: f64) -> Result<P2> {
        let (toward, dist) = if u <= self.sides[0] {
            (self.a, self.sides[0] - u)
        } else {
            (self.c, u - self.sides[0])
        };
        if dist == 0.0 {
            return Ok(self.b);
        }
        Ok(plane.geodesic_through(&self.b, &toward)?.point_at(dist))
    }

    /// Where the model line `PQ` leaves the triangle through `[A,B] ∪ [B,C]`,
    /// as a position along the path `A → B → C`.
    fn exit_position(&self, q: &P2) -> f64 {
        let [ma, mb, mc] = self.model;
        let (p, d) = (self.model_p, q - self.model_p);
        let mut best: Option<(f64, f64)> = None;
        for (start, end, offset) in [(ma, mb, 0.0), (mb, mc, self.sides[0])] {
            let e = end - start;
            let den = cross(&d, &e);
            if den == 0.0 {
                continue;
            }
            let mu = cross(&(start - p), &d) / den;
            if (-1e-12..=1.0 + 1e-12).contains(&mu) {
                let mu = mu.clamp(0.0, 1.0);
                let t = cross(&(start - p), &e) / den;
                let cand = (t.abs(), offset + mu * e.norm());
                if best.is_none_or(|b| cand.0 > b.0) {
                    best = Some(cand);
                }
            }
        }
        match best {
            Some((t, u)) if t > 1e-14 => u,
            // the line is AC itself
            _ if d.dot(&(mc - p)) > 0.0 => self.path_length(),
            _ => 0.0,
        }
    }
}

/// φ(Q) with all intermediate quantities.
pub fn pasch_phi_trace(plane: &StraightPlane, map: &PaschMap, model_q: &P2) -> Result<PhiTrace> {
    let mp = map.model_p;
    if *model_q == mp {
        return Err(ConstructionError::CoincidentPoints);
    }
    let u = map.exit_position(model_q);
    let model_s = map.model_at(u);
    let s = map.metric_at(plane, u)?;
    let ps_model = (model_s - mp).norm();
    let ps = plane.distance(&map.p, &s)?;
    let lambda = ps / ps_model;
    let qp = (model_q - mp).norm();
    let qs = (model_q - model_s).norm();
    let target = qs * lambda;
    let miss = |tau: f64| ((tau - ps).abs() - target).abs();
    let (plus, minus) = (miss(qp * lambda), miss(-qp * lambda));
    let tol = 1e-9 * (ps + target).max(1e-300);
    if plus <= tol && minus <= tol {
        return Err(ConstructionError::SignAmbiguous);
    }
    let tau = if plus <= minus { qp * lambda } else { -qp * lambda };
    let q = plane.geodesic_through(&map.p, &s)?.point_at(tau);
    Ok(PhiTrace { q, model_s, s, lambda, tau })
}

/// The Pasch map: model point `Q` to the point `q` of the straight plane.
pub fn pasch_phi(plane: &StraightPlane, map: &PaschMap, model_q: &P2) -> Result<P2> {
    Ok(pasch_phi_trace(plane, map, model_q)?.q)
}

/// A model point `Q` with `φ(Q) = target`, found by bisecting the exit
/// position along `A → B → C` until the metric point lies on the line
/// through `p` and `target`.
pub fn pasch_phi_preimage(plane: &StraightPlane, map: &PaschMap, target: &P2) -> Result<P2> {
    if *target == map.p {
        return Ok(map.model_p);
    }
    let side = |u: f64| -> Result<f64> {
        let s = map.metric_at(plane, u)?;
        Ok(cross(&(target - map.p), &(s - map.p)))
    };
    let (mut lo, mut hi) = (0.0, map.path_length());
    let f_lo = side(lo)?;
    if f_lo == 0.0 || f_lo.signum() == side(hi)?.signum() {
        return Err(ConstructionError::NoPreimage);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = side(mid)?;
        if f == 0.0 {
            (lo, hi) = (mid, mid);
            break;
        }
        if f.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    let model_s = map.model_at(u);
    let s = map.metric_at(plane, u)?;
    let g = plane.geodesic_through(&map.p, &s)?;
    let lambda = plane.distance(&map.p, &s)? / (model_s - map.model_p).norm();
    let tau = g.arclength_of(target);
    let dir = (model_s - map.model_p).normalize();
    Ok(map.model_p + dir * (tau / lambda))
}

/// Hash key of a point at resolution `cell`.
pub fn grid_key(p: &P2, cell: f64) -> (i64, i64) {
    ((p.x / cell).round() as i64, (p.y / cell).round() as i64)
}

/// Pairs of distinct inputs whose images share a grid key.
pub fn hash_collisions(points: &[(P2, P2)], cell: f64) -> usize {
    let mut seen: HashMap<(i64, i64), P2> = HashMap::new();
    let mut hits = 0;
    for (pre, img) in points {
        match seen.get(&grid_key(img, cell)) {
            Some(other) if other != pre => hits += 1,
            Some(_) => {}
            None => {
                seen.insert(grid_key(img, cell), *pre);
            }
        }
    }
    hits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::ConvexBody;
    use crate::projective::{harmonic_conjugate_algebraic, Homography};
    use crate::rat::{half, int, rat};

    fn hd() -> StraightPlane {
        StraightPlane::hilbert_disk()
    }

    fn skew_base() -> BaseQuadrilateral<P2> {
        BaseQuadrilateral::new(
            P2::new(-0.3, -0.25),
            P2::new(0.28, -0.3),
            P2::new(0.3, 0.32),
            P2::new(-0.25, 0.27),
        )
    }

    fn oracle(base: &BaseQuadrilateral<P2>) -> Homography {
        let e = |p: &P2| ProjPoint::from_rat_point(&RatPoint::from_f64(p).unwrap());
        Homography::from_unit_square(&e(&base.a), &e(&base.b), &e(&base.x), &e(&base.y)).unwrap()
    }

    fn image(h: &Homography, m: u64, n: u64, k: u32) -> P2 {
        let d = 1i64 << k;
        let p = ProjPoint::affine(rat(m as i64, d), rat(n as i64, d));
        h.apply(&p).to_affine().unwrap().to_f64()
    }

    #[test]
    fn unit_square_division_is_exact() {
        let d = harmonic_division(&ExactEuclidean, &BaseQuadrilateral::<RatPoint>::unit_square()).unwrap();
        let p = |x: Rat, y: Rat| RatPoint::new(x, y);
        assert_eq!(d.w, p(half(), half()));
        assert_eq!(d.q, p(half(), int(0)));
        assert_eq!(d.s, p(int(1), half()));
        assert_eq!(d.t, p(half(), int(1)));
        assert_eq!(d.u, p(int(0), half()));
        // z and p are at infinity for a square
        assert_eq!(d.variant, DivisionVariant::Pencil { halvings: 1 });
    }

    #[test]
    fn degenerate_base() {
        let p = RatPoint::from_ints;
        let flat = BaseQuadrilateral::new(p(0, 0), p(1, 0), p(2, 0), p(0, 1));
        assert_eq!(
            harmonic_division(&ExactEuclidean, &flat),
            Err(ConstructionError::DegenerateQuadrilateral)
        );
        let bowtie = BaseQuadrilateral::new(p(0, 0), p(1, 0), p(0, 1), p(1, 1));
        assert!(harmonic_division(&ExactEuclidean, &bowtie).is_err());
    }

    #[test]
    fn direct_and_pencil_agree() {
        let p = RatPoint::from_ints;
        let quad = BaseQuadrilateral::new(p(0, 0), p(5, 1), p(4, 4), p(1, 3));
        let d = harmonic_division(&ExactEuclidean, &quad).unwrap();
        assert_eq!(d.variant, DivisionVariant::Direct);
        let w = d.w.clone();
        let ab = ExactEuclidean.line(&quad.a, &quad.b).unwrap();
        let xy = ExactEuclidean.line(&quad.x, &quad.y).unwrap();
        let (q, _) = pencil_conjugate(&ExactEuclidean, &quad.a, &quad.b, &quad.x, &xy).unwrap();
        let (t, _) = pencil_conjugate(&ExactEuclidean, &quad.x, &quad.y, &quad.a, &ab).unwrap();
        assert_eq!((q, t), (d.q.clone(), d.t.clone()));
        assert_eq!(w, harmonic_division_direct(&ExactEuclidean, &quad, &w).unwrap().w);
    }

    #[test]
    fn division_points_are_harmonic() {
        let p = RatPoint::from_ints;
        let quad = BaseQuadrilateral::new(p(0, 0), p(5, 1), p(4, 4), p(1, 3));
        let d = harmonic_division(&ExactEuclidean, &quad).unwrap();
        let e = |r: &RatPoint| ProjPoint::from_rat_point(r);
        let z = e(&quad.z(&ExactEuclidean).unwrap().unwrap());
        let pp = e(&quad.p(&ExactEuclidean).unwrap().unwrap());
        let h = |a: &ProjPoint, b: &ProjPoint, c: &ProjPoint| harmonic_conjugate_algebraic(a, b, c).unwrap();
        assert_eq!(h(&e(&d.w), &pp, &e(&d.u)), e(&d.s));
        assert_eq!(h(&e(&quad.x), &e(&quad.y), &pp), e(&d.t));
        assert_eq!(h(&z, &e(&d.w), &e(&d.t)), e(&d.q));
        assert_eq!(h(&e(&quad.x), &e(&quad.a), &e(&d.u)), z);
    }

    #[test]
    fn hilbert_division_matches_affine() {
        let base = skew_base();
        let d = harmonic_division(&hd(), &base).unwrap();
        let h = oracle(&base);
        let want = [(1, 1, d.w), (1, 0, d.q), (2, 1, d.s), (1, 2, d.t), (0, 1, d.u)];
        for (m, n, got) in want {
            assert!((image(&h, m, n, 1) - got).norm() < 1e-9);
        }
    }

    #[test]
    fn hilbert_square_base_uses_pencil() {
        let s = 0.4;
        let base = BaseQuadrilateral::new(P2::new(-s, -s), P2::new(s, -s), P2::new(s, s), P2::new(-s, s));
        let d = harmonic_division(&hd(), &base).unwrap();
        assert!(matches!(d.variant, DivisionVariant::Pencil { .. }));
        assert!((d.q - P2::new(0.0, -s)).norm() < 1e-12);
        assert!((d.w - P2::origin()).norm() < 1e-12);
    }

    #[test]
    fn net_counts_and_exact_grid() {
        for k in 0..=3u32 {
            let net = build_harmonic_net(&ExactEuclidean, &BaseQuadrilateral::<RatPoint>::unit_square(), k).unwrap();
            assert_eq!(net.len() as u64, ((1u64 << k) + 1).pow(2));
            for (label, p) in net.entries() {
                let d = 1i64 << label.k;
                assert_eq!(*p, RatPoint::new(rat(label.m as i64, d), rat(label.n as i64, d)));
            }
            assert_eq!(net.max_gap(), 0.0);
        }
        assert_eq!(
            build_harmonic_net(&ExactEuclidean, &BaseQuadrilateral::<RatPoint>::unit_square(), 11),
            Err(ConstructionError::InvalidDepth(11))
        );
    }

    #[test]
    fn net_center_is_w() {
        let base = skew_base();
        let net = build_harmonic_net(&hd(), &base, 3).unwrap();
        let w = harmonic_division(&hd(), &base).unwrap().w;
        assert_eq!(*net.get(&NetLabel::new(1, 1, 1)).unwrap(), w);
        let h = oracle(&base);
        for (label, p) in net.entries() {
            assert!((image(&h, label.m, label.n, label.k) - p).norm() < 1e-8, "{label}");
        }
    }

    #[test]
    fn net_failure_names_the_cell() {
        // in a strip the horizontal side ab is a full line of the domain, on
        // which the weak metric vanishes
        let plane = StraightPlane::HilbertWeak { domain: ConvexBody::strip(0.0, Some(1.0)).unwrap() };
        let base = BaseQuadrilateral::new(P2::new(0.0, 0.25), P2::new(1.0, 0.25), P2::new(1.0, 0.5), P2::new(0.0, 0.5));
        match build_harmonic_net(&plane, &base, 2) {
            Err(ConstructionError::NetFailure { path, source }) => {
                assert_eq!(path, "abyx");
                assert_eq!(*source, ConstructionError::Metric(MetricError::DegenerateLine));
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn labels() {
        let l = NetLabel::new(4, 2, 3);
        assert_eq!(l, NetLabel { m: 2, n: 1, k: 2 });
        assert_eq!(l.to_string(), "(1/2, 1/4)");
        assert_eq!(NetLabel::new(0, 8, 3).to_string(), "(0, 1)");
        assert_eq!(l.at_depth(4), (8, 4));
        assert_eq!(cell_path(2, 1, 2), "abyx/uwtx/qbsw");
    }

    #[test]
    fn metric_conjugate_examples() {
        let e = StraightPlane::Euclidean;
        let (a, b, p) = (P2::new(0.0, 0.0), P2::new(1.0, 0.0), P2::new(2.0, 0.0));
        let q = metric_harmonic_conjugate(&e, &a, &b, &p, &P2::new(0.0, 2.0), &P2::new(0.0, 1.0)).unwrap();
        assert!((q - P2::new(2.0 / 3.0, 0.0)).norm() < 1e-12);
        let (a, b, p) = (P2::new(-0.25, 0.0), P2::new(0.25, 0.0), P2::origin());
        let r = metric_harmonic_conjugate(&hd(), &a, &b, &p, &P2::new(0.05, 0.5), &P2::new(-0.04, 0.35));
        assert_eq!(r, Err(ConstructionError::NoFiniteConjugate));
        let r = metric_harmonic_conjugate(&hd(), &a, &b, &P2::new(0.0, 0.1), &P2::new(0.0, 0.5), &P2::new(0.0, 0.3));
        assert_eq!(r, Err(ConstructionError::NotCollinear));
    }

    #[test]
    fn psi_on_net_points_and_corners() {
        let base = skew_base();
        let net = build_harmonic_net(&hd(), &base, 3).unwrap();
        assert_eq!(psi_map(&hd(), &net, &base.a).unwrap(), P2::new(0.0, 0.0));
        assert_eq!(psi_map(&hd(), &net, &base.y).unwrap(), P2::new(1.0, 1.0));
        let v = *net.get(&NetLabel::new(3, 1, 2)).unwrap();
        assert_eq!(psi_map(&hd(), &net, &v).unwrap(), P2::new(0.75, 0.25));
        assert_eq!(psi_map(&hd(), &net, &P2::new(0.6, 0.0)), Err(ConstructionError::OutsideHull));
    }

    #[test]
    fn psi_inverts_the_oracle() {
        let base = skew_base();
        let net = build_harmonic_net(&hd(), &base, 4).unwrap();
        let h = oracle(&base);
        for (m, n) in [(3, 7), (50, 13), (99, 99), (1, 80)] {
            let v = image(&h, m, n, 7);
            let got = psi_map(&hd(), &net, &v).unwrap();
            let want = P2::new(m as f64 / 128.0, n as f64 / 128.0);
            assert!((got - want).norm() < 1e-6);
        }
    }

    #[test]
    fn psi_extend_affine_case() {
        let e = StraightPlane::Euclidean;
        let net = build_harmonic_net(&e, &BaseQuadrilateral::<P2>::unit_square(), 3).unwrap();
        for v in [P2::new(1.7, 0.3), P2::new(-0.5, -2.25), P2::new(0.5, 3.0)] {
            assert!((psi_extend(&e, &net, &v).unwrap() - v).norm() < 1e-9);
        }
        let inside = P2::new(0.25, 0.75);
        assert_eq!(psi_extend(&e, &net, &inside).unwrap(), inside);
    }

    #[test]
    fn psi_extend_pairs_agree_in_the_disk() {
        let base = skew_base();
        let net = build_harmonic_net(&hd(), &base, 4).unwrap();
        let v = P2::new(0.55, -0.45);
        let images: Vec<P2> = secant_pairs(&hd(), &net, &v)
            .iter()
            .filter_map(|(o1, o2)| psi_extend_via(&hd(), &net, &v, o1, o2).ok())
            .collect();
        assert!(images.len() >= 5);
        let h = oracle(&base).inverse();
        let e = ProjPoint::from_rat_point(&RatPoint::from_f64(&v).unwrap());
        let want = h.apply(&e).to_affine().unwrap().to_f64();
        for p in &images {
            assert!((p - want).norm() < 1e-6, "{p} vs {want}");
        }
        assert_eq!(psi_extend(&hd(), &net, &P2::new(1.0, 0.0)), Err(ConstructionError::NoAdmissibleSecants));
    }

    fn euclid_map() -> PaschMap {
        let e = StraightPlane::Euclidean;
        let (a, b, c) = (P2::new(0.0, 0.0), P2::new(4.0, 0.0), P2::new(1.0, 3.0));
        PaschMap::new(&e, a, b, c, a + (c - a) * 0.375).unwrap()
    }

    #[test]
    fn phi_is_the_identity_on_an_isometric_model() {
        let map = euclid_map();
        assert!((map.model[2] - map.c).norm() < 1e-12);
        for q in [P2::new(2.0, 1.0), P2::new(-3.0, 5.0), P2::new(0.5, -1.0), P2::new(3.9, 0.05)] {
            assert!((pasch_phi(&StraightPlane::Euclidean, &map, &q).unwrap() - q).norm() < 1e-12);
        }
    }

    #[test]
    fn phi_of_exit_point_is_s() {
        let plane = hd();
        let map = PaschMap::new(&plane, P2::new(-0.5, -0.3), P2::new(0.6, -0.2), P2::new(0.0, 0.6), P2::new(-0.25, 0.15)).unwrap();
        let tr = pasch_phi_trace(&plane, &map, &P2::new(0.9, 0.4)).unwrap();
        let at_s = pasch_phi(&plane, &map, &tr.model_s).unwrap();
        assert!((at_s - tr.s).norm() < 1e-12);
        let mq = P2::new(0.9, 0.4);
        let r1 = plane.distance(&tr.q, &tr.s).unwrap() / (mq - tr.model_s).norm();
        let r2 = plane.distance(&tr.q, &map.p).unwrap() / (mq - map.model_p).norm();
        assert!((r1 - tr.lambda).abs() < 1e-9 && (r2 - tr.lambda).abs() < 1e-9);
    }

    #[test]
    fn phi_preimage_round_trip() {
        let plane = hd();
        let map = PaschMap::new(&plane, P2::new(-0.5, -0.3), P2::new(0.6, -0.2), P2::new(0.0, 0.6), P2::new(-0.25, 0.15)).unwrap();
        for t in [P2::new(0.1, 0.1), P2::new(-0.8, 0.1), P2::new(0.3, -0.7)] {
            let q = pasch_phi_preimage(&plane, &map, &t).unwrap();
            assert!((pasch_phi(&plane, &map, &q).unwrap() - t).norm() < 1e-6);
        }
    }

    #[test]
    fn degenerate_models() {
        let e = StraightPlane::Euclidean;
        let (a, b, c) = (P2::new(0.0, 0.0), P2::new(1.0, 0.0), P2::new(2.0, 0.0));
        assert_eq!(PaschMap::new(&e, a, b, c, P2::new(1.5, 0.0)), Err(ConstructionError::ModelDegenerate));
        let c = P2::new(0.0, 1.0);
        assert_eq!(PaschMap::new(&e, a, b, c, P2::new(0.5, 0.5)), Err(ConstructionError::NotOnSide));
        let map = PaschMap::new(&e, a, b, c, P2::new(0.0, 0.5)).unwrap();
        assert_eq!(pasch_phi(&e, &map, &map.model_p), Err(ConstructionError::CoincidentPoints));
    }

    #[test]
    fn collisions() {
        let pts = [(P2::new(0.0, 0.0), P2::new(1.0, 1.0)), (P2::new(1.0, 0.0), P2::new(1.0 + 1e-12, 1.0))];
        assert_eq!(hash_collisions(&pts, 1e-9), 1);
        assert_eq!(hash_collisions(&pts[..1], 1e-9), 0);
    }
}
