//! The real projective plane over the rationals.
//!
//! Points and lines are homogeneous triples stored in canonical form: the
//! first nonzero coordinate is 1. Two triples describe the same projective
//! object iff their canonical forms are equal, so `==` is projective
//! equality. Ideal points (`h2 = 0`) are ordinary points here; parallel
//! affine lines simply meet on the line at infinity.

use std::fmt;

use num::{One, Zero};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Deserializer, Serialize};

use crate::rat::{deserialize_rat_array, format_rat, int, Rat, RatPoint};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProjectiveError {
    #[error("homogeneous coordinates are all zero")]
    ZeroVector,
    #[error("points coincide; no unique joining line")]
    CoincidentPoints,
    #[error("lines coincide; no unique meeting point")]
    CoincidentLines,
    #[error("points are not collinear")]
    NotCollinear,
    #[error("cross-ratio undefined for this coincidence pattern")]
    UndefinedCrossRatio,
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("degenerate auxiliary choice: {0}")]
    DegenerateAuxiliary(&'static str),
    #[error("frame points are not in general position")]
    SingularFrame,
}

pub type Result<T> = std::result::Result<T, ProjectiveError>;

type Triple = [Rat; 3];

fn canonical(mut h: Triple) -> Result<Triple> {
    let lead = h.iter().position(|c| !c.is_zero()).ok_or(ProjectiveError::ZeroVector)?;
    if !h[lead].is_one() {
        let inv = h[lead].recip();
        for c in h.iter_mut() {
            *c = &*c * &inv;
        }
    }
    Ok(h)
}

fn cross(u: &Triple, v: &Triple) -> Triple {
    [
        &u[1] * &v[2] - &u[2] * &v[1],
        &u[2] * &v[0] - &u[0] * &v[2],
        &u[0] * &v[1] - &u[1] * &v[0],
    ]
}

fn dot(u: &Triple, v: &Triple) -> Rat {
    &u[0] * &v[0] + &u[1] * &v[1] + &u[2] * &v[2]
}

pub(crate) fn det3(u: &Triple, v: &Triple, w: &Triple) -> Rat {
    dot(u, &cross(v, w))
}

fn is_zero_triple(h: &Triple) -> bool {
    h.iter().all(Zero::is_zero)
}

macro_rules! homogeneous_type {
    ($name:ident, $open:literal, $close:literal) => {
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(Triple);

        impl $name {
            pub fn new(h0: Rat, h1: Rat, h2: Rat) -> Result<Self> {
                canonical([h0, h1, h2]).map(Self)
            }

            pub fn from_ints(h0: i64, h1: i64, h2: i64) -> Result<Self> {
                Self::new(int(h0), int(h1), int(h2))
            }

            pub fn coords(&self) -> &[Rat; 3] {
                &self.0
            }

            pub(crate) fn from_raw(h: Triple) -> Result<Self> {
                canonical(h).map(Self)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Display::fmt(self, f)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{} : {} : {}{}", $open, self.0[0], self.0[1], self.0[2], $close)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut t = s.serialize_tuple(3)?;
                for c in &self.0 {
                    t.serialize_element(&format_rat(c))?;
                }
                t.end()
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let h = deserialize_rat_array::<D, 3>(d)?;
                Self::from_raw(h).map_err(serde::de::Error::custom)
            }
        }
    };
}

homogeneous_type!(ProjPoint, "(", ")");
homogeneous_type!(ProjLine, "[", "]");

impl ProjPoint {
    /// The affine point `(x, y)` as `(x : y : 1)`.
    pub fn affine(x: Rat, y: Rat) -> Self {
        Self::from_raw([x, y, Rat::one()]).expect("h2 = 1 is nonzero")
    }

    pub fn from_rat_point(p: &RatPoint) -> Self {
        Self::affine(p.x.clone(), p.y.clone())
    }

    /// Ideal point in direction `(dx, dy)`.
    pub fn ideal(dx: Rat, dy: Rat) -> Result<Self> {
        Self::new(dx, dy, Rat::zero())
    }

    pub fn is_ideal(&self) -> bool {
        self.0[2].is_zero()
    }

    pub fn to_affine(&self) -> Option<RatPoint> {
        if self.is_ideal() {
            return None;
        }
        // the leading coordinate is normalized, so h2 need not be 1
        let w = &self.0[2];
        Some(RatPoint::new(&self.0[0] / w, &self.0[1] / w))
    }

    pub fn incident(&self, l: &ProjLine) -> bool {
        dot(&self.0, &l.0).is_zero()
    }
}

impl ProjLine {
    /// The line `a x + b y + c = 0`.
    pub fn from_equation(a: Rat, b: Rat, c: Rat) -> Result<Self> {
        Self::new(a, b, c)
    }

    pub fn at_infinity() -> Self {
        Self([Rat::zero(), Rat::zero(), Rat::one()])
    }

    pub fn contains(&self, p: &ProjPoint) -> bool {
        p.incident(self)
    }

    /// Value of the line's linear form at an affine point.
    pub fn eval(&self, p: &RatPoint) -> Rat {
        &self.0[0] * &p.x + &self.0[1] * &p.y + &self.0[2]
    }
}

pub fn join(p: &ProjPoint, q: &ProjPoint) -> Result<ProjLine> {
    let h = cross(&p.0, &q.0);
    if is_zero_triple(&h) {
        return Err(ProjectiveError::CoincidentPoints);
    }
    ProjLine::from_raw(h)
}

pub fn meet(l: &ProjLine, m: &ProjLine) -> Result<ProjPoint> {
    let h = cross(&l.0, &m.0);
    if is_zero_triple(&h) {
        return Err(ProjectiveError::CoincidentLines);
    }
    ProjPoint::from_raw(h)
}

pub fn collinear(p: &ProjPoint, q: &ProjPoint, r: &ProjPoint) -> bool {
    det3(&p.0, &q.0, &r.0).is_zero()
}

pub fn concurrent(l: &ProjLine, m: &ProjLine, n: &ProjLine) -> bool {
    det3(&l.0, &m.0, &n.0).is_zero()
}

/// Determinant of the three canonical coordinate vectors; zero iff collinear.
pub fn collinearity_defect(p: &ProjPoint, q: &ProjPoint, r: &ProjPoint) -> Rat {
    det3(&p.0, &q.0, &r.0)
}

/// Value of a cross-ratio on the projectively extended rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CrossRatio {
    Finite(Rat),
    Infinity,
}

impl CrossRatio {
    pub fn is_harmonic(&self) -> bool {
        matches!(self, CrossRatio::Finite(r) if *r == -Rat::one())
    }
}

/// Linear coordinates on a line: drop a coordinate index where the line's
/// own coordinate is nonzero. The projection is injective on that line.
struct LineChart {
    keep: [usize; 2],
}

impl LineChart {
    fn for_line(l: &ProjLine) -> Self {
        let drop = l.0.iter().position(|c| !c.is_zero()).expect("canonical line is nonzero");
        let keep = match drop {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        };
        // keep the affine coordinate last so ordinary points read as (t, 1)
        Self { keep }
    }

    fn project(&self, p: &ProjPoint) -> [Rat; 2] {
        [p.0[self.keep[0]].clone(), p.0[self.keep[1]].clone()]
    }
}

fn bracket(u: &[Rat; 2], v: &[Rat; 2]) -> Rat {
    &u[0] * &v[1] - &u[1] * &v[0]
}

/// The common line of a set of points, if they are collinear and not all equal.
fn common_line(pts: &[&ProjPoint]) -> Result<ProjLine> {
    let first = pts[0];
    let other = pts
        .iter()
        .find(|p| **p != first)
        .ok_or(ProjectiveError::UndefinedCrossRatio)?;
    let l = join(first, other)?;
    if pts.iter().all(|p| p.incident(&l)) {
        Ok(l)
    } else {
        Err(ProjectiveError::NotCollinear)
    }
}

/// `(a, b; c, d) = ((c − a)(d − b)) / ((c − b)(d − a))` in any affine
/// parameter of the common line, evaluated with homogeneous brackets so
/// ideal points need no special case.
pub fn cross_ratio(a: &ProjPoint, b: &ProjPoint, c: &ProjPoint, d: &ProjPoint) -> Result<CrossRatio> {
    let l = common_line(&[a, b, c, d])?;
    if a == b {
        return Err(ProjectiveError::UndefinedCrossRatio);
    }
    let chart = LineChart::for_line(&l);
    let [pa, pb, pc, pd] = [a, b, c, d].map(|p| chart.project(p));
    let num = bracket(&pc, &pa) * bracket(&pd, &pb);
    let den = bracket(&pc, &pb) * bracket(&pd, &pa);
    match (num.is_zero(), den.is_zero()) {
        (_, false) => Ok(CrossRatio::Finite(num / den)),
        (false, true) => Ok(CrossRatio::Infinity),
        (true, true) => Err(ProjectiveError::UndefinedCrossRatio),
    }
}

/// Harmonic conjugate of `p` with respect to `a`, `b`: writing
/// `p = αa + βb` in homogeneous coordinates, the conjugate is `αa − βb`.
pub fn harmonic_conjugate_algebraic(a: &ProjPoint, b: &ProjPoint, p: &ProjPoint) -> Result<ProjPoint> {
    if a == b {
        return Err(ProjectiveError::DegenerateInput("a = b"));
    }
    if p == a || p == b {
        return Err(ProjectiveError::DegenerateInput("p coincides with a or b"));
    }
    let l = join(a, b)?;
    if !p.incident(&l) {
        return Err(ProjectiveError::NotCollinear);
    }
    let chart = LineChart::for_line(&l);
    let (pa, pb, pp) = (chart.project(a), chart.project(b), chart.project(p));
    let ab = bracket(&pa, &pb);
    let alpha = bracket(&pp, &pb) / &ab;
    let beta = bracket(&pa, &pp) / &ab;
    let h = [0, 1, 2].map(|i| &alpha * &a.0[i] - &beta * &b.0[i]);
    ProjPoint::from_raw(h)
}

/// Four points, no three collinear.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Quadrangle {
    pub x: ProjPoint,
    pub y: ProjPoint,
    pub z: ProjPoint,
    pub w: ProjPoint,
}

impl Quadrangle {
    pub fn new(x: ProjPoint, y: ProjPoint, z: ProjPoint, w: ProjPoint) -> Result<Self> {
        let pts = [&x, &y, &z, &w];
        for i in 0..4 {
            for j in i + 1..4 {
                for k in j + 1..4 {
                    if collinear(pts[i], pts[j], pts[k]) {
                        return Err(ProjectiveError::DegenerateInput(
                            "three quadrangle vertices are collinear",
                        ));
                    }
                }
            }
        }
        Ok(Self { x, y, z, w })
    }
}

/// The full complete-quadrangle construction of a harmonic conjugate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HarmonicQuadrangle {
    pub a: ProjPoint,
    pub b: ProjPoint,
    pub p: ProjPoint,
    pub quadrangle: Quadrangle,
    pub q: ProjPoint,
}

fn aux<T>(r: Result<T>, what: &'static str) -> Result<T> {
    r.map_err(|_| ProjectiveError::DegenerateAuxiliary(what))
}

/// Harmonic conjugate of `p` with respect to `a`, `b` via the complete
/// quadrangle with auxiliary `z` (off the line) and `x` (on `az`):
/// `y = px ∩ bz`, `w = xb ∩ ya`, `q = ab ∩ wz`.
pub fn harmonic_conjugate_quadrangle(
    a: &ProjPoint,
    b: &ProjPoint,
    p: &ProjPoint,
    z: &ProjPoint,
    x: &ProjPoint,
) -> Result<HarmonicQuadrangle> {
    if a == b {
        return Err(ProjectiveError::DegenerateInput("a = b"));
    }
    if p == a || p == b {
        return Err(ProjectiveError::DegenerateInput("p coincides with a or b"));
    }
    let ell = join(a, b)?;
    if !p.incident(&ell) {
        return Err(ProjectiveError::NotCollinear);
    }
    if z.incident(&ell) {
        return Err(ProjectiveError::DegenerateAuxiliary("z lies on the base line"));
    }
    if x == a || x == z || !collinear(a, z, x) {
        return Err(ProjectiveError::DegenerateAuxiliary("x must lie on az, distinct from a and z"));
    }
    let y = aux(meet(&join(p, x)?, &join(b, z)?), "y = px ∩ bz")?;
    let w = aux(meet(&aux(join(x, b), "xb")?, &aux(join(&y, a), "ya")?), "w = xb ∩ ya")?;
    let q = aux(meet(&ell, &aux(join(&w, z), "wz")?), "q = ab ∩ wz")?;
    let quadrangle = aux(Quadrangle::new(x.clone(), y, z.clone(), w), "quadrangle")?;
    Ok(HarmonicQuadrangle { a: a.clone(), b: b.clone(), p: p.clone(), quadrangle, q })
}

pub type Triangle = [ProjPoint; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    CollinearTriangle,
    SharedVertex,
    CoincidentSides,
}

/// Outcome of checking a triangle pair for perspectivity from a point and
/// from a line. For a non-degenerate pair the two flags agree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DesarguesVerdict {
    pub perspective_from_point: bool,
    pub center: Option<ProjPoint>,
    pub perspective_from_line: bool,
    pub axis: Option<ProjLine>,
    /// `I = AB ∩ A'B'`, `J = AC ∩ A'C'`, `K = BC ∩ B'C'`.
    pub side_points: Option<[ProjPoint; 3]>,
    pub degenerate: Option<Degeneracy>,
}

impl DesarguesVerdict {
    fn degenerate(kind: Degeneracy) -> Self {
        Self {
            perspective_from_point: false,
            center: None,
            perspective_from_line: false,
            axis: None,
            side_points: None,
            degenerate: Some(kind),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate.is_some()
    }

    /// Exact collinearity determinant of `I, J, K`.
    pub fn axis_defect(&self) -> Option<Rat> {
        self.side_points.as_ref().map(|[i, j, k]| collinearity_defect(i, j, k))
    }

    pub fn consistent(&self) -> bool {
        self.is_degenerate() || self.perspective_from_point == self.perspective_from_line
    }
}

pub fn desargues_verdict(t1: &Triangle, t2: &Triangle) -> DesarguesVerdict {
    let [a, b, c] = t1;
    let [a2, b2, c2] = t2;
    if collinear(a, b, c) || collinear(a2, b2, c2) {
        return DesarguesVerdict::degenerate(Degeneracy::CollinearTriangle);
    }
    if t1.iter().any(|p| t2.contains(p)) {
        return DesarguesVerdict::degenerate(Degeneracy::SharedVertex);
    }
    // vertices within a triangle are distinct, so every join below is defined
    let side = |p: &ProjPoint, q: &ProjPoint| join(p, q).expect("distinct vertices");
    let (ab, ac, bc) = (side(a, b), side(a, c), side(b, c));
    let (ab2, ac2, bc2) = (side(a2, b2), side(a2, c2), side(b2, c2));
    if ab == ab2 || ac == ac2 || bc == bc2 {
        return DesarguesVerdict::degenerate(Degeneracy::CoincidentSides);
    }

    let (aa, bb, cc) = (side(a, a2), side(b, b2), side(c, c2));
    // aa = bb would force ab = a'b', excluded above
    let o = meet(&aa, &bb).expect("distinct perspectivity rays");
    let from_point = o.incident(&cc);

    let i = meet(&ab, &ab2).expect("distinct sides");
    let j = meet(&ac, &ac2).expect("distinct sides");
    let k = meet(&bc, &bc2).expect("distinct sides");
    let from_line = collinear(&i, &j, &k);
    // I = J would put the point on AB ∩ AC = A and A'B' ∩ A'C' = A'
    let axis = from_line.then(|| join(&i, &j).expect("I ≠ J for distinct vertices"));

    DesarguesVerdict {
        perspective_from_point: from_point,
        center: from_point.then_some(o),
        perspective_from_line: from_line,
        axis,
        side_points: Some([i, j, k]),
        degenerate: None,
    }
}

/// A projective transformation given by an invertible 3×3 rational matrix
/// acting on column vectors of point coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homography {
    m: [[Rat; 3]; 3],
}

impl Homography {
    pub fn from_matrix(m: [[Rat; 3]; 3]) -> Result<Self> {
        let h = Self { m };
        if h.det().is_zero() {
            return Err(ProjectiveError::SingularFrame);
        }
        Ok(h)
    }

    pub fn det(&self) -> Rat {
        let m = &self.m;
        let cols = [0, 1, 2].map(|j| [m[0][j].clone(), m[1][j].clone(), m[2][j].clone()]);
        det3(&cols[0], &cols[1], &cols[2])
    }

    pub fn apply(&self, p: &ProjPoint) -> ProjPoint {
        let h = [0, 1, 2].map(|i| dot(&self.m[i], &p.0));
        ProjPoint::from_raw(h).expect("invertible map sends nonzero vectors to nonzero vectors")
    }

    fn compose(&self, other: &Homography) -> Homography {
        let m = [0, 1, 2].map(|i| {
            [0, 1, 2].map(|j| (0..3).map(|k| &self.m[i][k] * &other.m[k][j]).sum::<Rat>())
        });
        Homography { m }
    }

    pub fn inverse(&self) -> Homography {
        let m = &self.m;
        let det = self.det();
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            &m[r0][c0] * &m[r1][c1] - &m[r0][c1] * &m[r1][c0]
        };
        // adjugate / det
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        Homography { m: adj.map(|row| row.map(|c| c / &det)) }
    }

    /// The map sending `e1, e2, e3, (1,1,1)` to the four given points.
    fn from_standard_frame(p: &[ProjPoint; 4]) -> Result<Self> {
        let cols = [&p[0].0, &p[1].0, &p[2].0];
        let d = det3(cols[0], cols[1], cols[2]);
        if d.is_zero() {
            return Err(ProjectiveError::SingularFrame);
        }
        // solve λ0 p0 + λ1 p1 + λ2 p2 = p3 by Cramer's rule
        let lam = [
            det3(&p[3].0, cols[1], cols[2]) / &d,
            det3(cols[0], &p[3].0, cols[2]) / &d,
            det3(cols[0], cols[1], &p[3].0) / &d,
        ];
        if lam.iter().any(Zero::is_zero) {
            return Err(ProjectiveError::SingularFrame);
        }
        let m = [0, 1, 2].map(|i| [0, 1, 2].map(|j| &lam[j] * &cols[j][i]));
        Ok(Homography { m })
    }

    /// The unique projective map sending each `src[i]` to `dst[i]`; both
    /// frames must have no three points collinear.
    pub fn from_frames(src: &[ProjPoint; 4], dst: &[ProjPoint; 4]) -> Result<Self> {
        let s = Self::from_standard_frame(src)?;
        let t = Self::from_standard_frame(dst)?;
        Ok(t.compose(&s.inverse()))
    }

    /// Sends `(0,0), (1,0), (0,1), (1,1)` to `a, b, x, y`.
    pub fn from_unit_square(a: &ProjPoint, b: &ProjPoint, x: &ProjPoint, y: &ProjPoint) -> Result<Self> {
        let sq = |u: i64, v: i64| ProjPoint::from_ints(u, v, 1).expect("nonzero");
        let src = [sq(0, 0), sq(1, 0), sq(0, 1), sq(1, 1)];
        Self::from_frames(&src, &[a.clone(), b.clone(), x.clone(), y.clone()])
    }
}
