//! Incidence planes given by explicit line systems over a planar carrier:
//! the straight chords of a convex body, and the Moulton plane whose lines of
//! negative slope bend where they cross the y-axis.
//!
//! Everything here is exact. Chords are carried by a projective line and
//! clipped to the closed body; Moulton lines are unions of at most two rays.

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::body::ConvexBody;
use crate::projective::{
    collinearity_defect, desargues_verdict, join, meet, ProjLine, ProjPoint, ProjectiveError,
};
use crate::rat::{int, orient, rat, rat_string, Rat, RatPoint};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LineSystemError {
    #[error("points coincide")]
    CoincidentPoints,
    #[error("point {0} lies outside the carrier")]
    OutsideCarrier(Box<RatPoint>),
    #[error("lines coincide")]
    CoincidentLines,
    #[error("triangle vertices lie on one line")]
    DegenerateTriangle,
    #[error("point is not strictly inside the side a-c")]
    NotInteriorToSide,
    #[error("probe line does not pass through the side point")]
    ProbeMissesPoint,
    #[error("probe line is the side a-c itself")]
    ProbeIsSide,
    #[error("bend factor must be positive and different from 1, got {0}")]
    InvalidBend(Rat),
    #[error("no witness among {0} enumerated configurations")]
    SearchExhausted(u64),
}

pub type Result<T> = std::result::Result<T, LineSystemError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem", into = "RawSystem")]
pub enum LineSystem {
    /// Straight chords of a closed convex body.
    EuclideanChords(ConvexBody),
    /// Moulton plane with the given bend factor.
    Moulton(Rat),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawSystem {
    EuclideanChords {
        body: ConvexBody,
    },
    Moulton {
        #[serde(with = "rat_string")]
        bend: Rat,
    },
}

impl TryFrom<RawSystem> for LineSystem {
    type Error = LineSystemError;
    fn try_from(r: RawSystem) -> Result<Self> {
        match r {
            RawSystem::EuclideanChords { body } => Ok(LineSystem::EuclideanChords(body)),
            RawSystem::Moulton { bend } => LineSystem::moulton(bend),
        }
    }
}

impl From<LineSystem> for RawSystem {
    fn from(s: LineSystem) -> Self {
        match s {
            LineSystem::EuclideanChords(body) => RawSystem::EuclideanChords { body },
            LineSystem::Moulton(bend) => RawSystem::Moulton { bend },
        }
    }
}

/// A Moulton line in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MoultonLine {
    Vertical {
        #[serde(with = "rat_string")]
        x: Rat,
    },
    /// `y = slope·x + intercept` with `slope ≥ 0`.
    Straight {
        #[serde(with = "rat_string")]
        slope: Rat,
        #[serde(with = "rat_string")]
        intercept: Rat,
    },
    /// `y = slope·x + intercept` for `x ≤ 0` and
    /// `y = bend·slope·x + intercept` for `x ≥ 0`, with `slope < 0`.
    Bent {
        #[serde(with = "rat_string")]
        slope: Rat,
        #[serde(with = "rat_string")]
        intercept: Rat,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum HalfPlane {
    All,
    NonPositive,
    NonNegative,
}

impl HalfPlane {
    fn admits(self, x: &Rat) -> bool {
        match self {
            HalfPlane::All => true,
            HalfPlane::NonPositive => !x.is_positive(),
            HalfPlane::NonNegative => !x.is_negative(),
        }
    }
}

fn sloped(m: &Rat, c: &Rat) -> ProjLine {
    ProjLine::from_equation(m.clone(), int(-1), c.clone()).expect("b = -1")
}

impl MoultonLine {
    /// Height at `x`; `None` for vertical lines.
    pub fn y_at(&self, bend: &Rat, x: &Rat) -> Option<Rat> {
        match self {
            MoultonLine::Vertical { .. } => None,
            MoultonLine::Straight { slope, intercept } => Some(slope * x + intercept),
            MoultonLine::Bent { slope, intercept } if x.is_positive() => {
                Some(bend * slope * x + intercept)
            }
            MoultonLine::Bent { slope, intercept } => Some(slope * x + intercept),
        }
    }

    pub fn contains(&self, bend: &Rat, p: &RatPoint) -> bool {
        match self {
            MoultonLine::Vertical { x } => p.x == *x,
            _ => self.y_at(bend, &p.x).as_ref() == Some(&p.y),
        }
    }

    /// The point where a bent line changes slope.
    pub fn bend_point(&self) -> Option<RatPoint> {
        match self {
            MoultonLine::Bent { intercept, .. } => {
                Some(RatPoint::new(Rat::zero(), intercept.clone()))
            }
            _ => None,
        }
    }

    fn pieces(&self, bend: &Rat) -> Vec<(ProjLine, HalfPlane)> {
        match self {
            MoultonLine::Vertical { x } => vec![(
                ProjLine::from_equation(int(1), Rat::zero(), -x.clone()).expect("a = 1"),
                HalfPlane::All,
            )],
            MoultonLine::Straight { slope, intercept } => {
                vec![(sloped(slope, intercept), HalfPlane::All)]
            }
            MoultonLine::Bent { slope, intercept } => vec![
                (sloped(slope, intercept), HalfPlane::NonPositive),
                (sloped(&(bend * slope), intercept), HalfPlane::NonNegative),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemLine {
    Chord(ProjLine),
    Moulton(MoultonLine),
}

/// A Moulton configuration perspective from a point whose side
/// intersections are not Moulton-collinear.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoultonWitness {
    #[serde(with = "rat_string")]
    pub bend: Rat,
    pub center: RatPoint,
    pub triangles: [[RatPoint; 3]; 2],
    /// `AB∩A'B'`, `AC∩A'C'`, `BC∩B'C'` in the Moulton plane.
    pub side_points: [RatPoint; 3],
    /// Offset of the third side point from the Moulton line through the
    /// first two: vertical, or horizontal when that line is vertical.
    #[serde(with = "rat_string")]
    pub defect: Rat,
    /// The same six vertices joined by straight lines.
    pub straight_side_points: [ProjPoint; 3],
    #[serde(with = "rat_string")]
    pub straight_defect: Rat,
    /// Configurations examined, the witness included.
    pub examined: u64,
}

/// Upper bound on configurations tried by [`moulton_desargues_counterexample`].
pub const MOULTON_SEARCH_BUDGET: u64 = 1_000_000;

impl LineSystem {
    pub fn moulton(bend: Rat) -> Result<Self> {
        if !bend.is_positive() || bend == int(1) {
            return Err(LineSystemError::InvalidBend(bend));
        }
        Ok(LineSystem::Moulton(bend))
    }

    pub fn in_carrier(&self, p: &RatPoint) -> bool {
        match self {
            LineSystem::EuclideanChords(body) => body.contains_closed_exact(p),
            LineSystem::Moulton(_) => true,
        }
    }

    fn check_carrier(&self, p: &RatPoint) -> Result<()> {
        if self.in_carrier(p) {
            Ok(())
        } else {
            Err(LineSystemError::OutsideCarrier(Box::new(p.clone())))
        }
    }

    pub fn line_through(&self, p: &RatPoint, q: &RatPoint) -> Result<SystemLine> {
        self.check_carrier(p)?;
        self.check_carrier(q)?;
        if p == q {
            return Err(LineSystemError::CoincidentPoints);
        }
        match self {
            LineSystem::EuclideanChords(_) => {
                let l = join(&ProjPoint::from_rat_point(p), &ProjPoint::from_rat_point(q))
                    .expect("distinct affine points");
                Ok(SystemLine::Chord(l))
            }
            LineSystem::Moulton(k) => Ok(SystemLine::Moulton(moulton_through(k, p, q))),
        }
    }

    pub fn contains(&self, l: &SystemLine, p: &RatPoint) -> bool {
        match (self, l) {
            (LineSystem::EuclideanChords(_), SystemLine::Chord(l)) => {
                self.in_carrier(p) && l.eval(p).is_zero()
            }
            (LineSystem::Moulton(k), SystemLine::Moulton(m)) => m.contains(k, p),
            _ => false,
        }
    }

    /// The common point of two distinct lines inside the carrier.
    pub fn intersect_lines(&self, l1: &SystemLine, l2: &SystemLine) -> Result<Option<RatPoint>> {
        if l1 == l2 {
            return Err(LineSystemError::CoincidentLines);
        }
        match (self, l1, l2) {
            (LineSystem::EuclideanChords(_), SystemLine::Chord(a), SystemLine::Chord(b)) => {
                let x = meet(a, b).map_err(|_| LineSystemError::CoincidentLines)?;
                Ok(x.to_affine().filter(|x| self.in_carrier(x)))
            }
            (LineSystem::Moulton(k), SystemLine::Moulton(a), SystemLine::Moulton(b)) => {
                moulton_meet(k, a, b)
            }
            _ => panic!("line does not belong to this system"),
        }
    }

    /// Whether `x`, assumed on the line through `a` and `b`, lies on the
    /// closed segment between them. Along any line of either system the
    /// order is the order of the abscissa, or of the ordinate on verticals.
    fn between(a: &RatPoint, b: &RatPoint, x: &RatPoint) -> bool {
        let (u, v, w) = if a.x != b.x { (&a.x, &b.x, &x.x) } else { (&a.y, &b.y, &x.y) };
        let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
        lo <= w && w <= hi
    }

    /// Closed-segment membership along the system line through `a` and `b`.
    pub fn on_segment(&self, a: &RatPoint, b: &RatPoint, x: &RatPoint) -> Result<bool> {
        let l = self.line_through(a, b)?;
        Ok(self.contains(&l, x) && Self::between(a, b, x))
    }

    fn meets_segment(&self, l: &SystemLine, u: &RatPoint, v: &RatPoint) -> Result<bool> {
        if self.contains(l, u) || self.contains(l, v) {
            return Ok(true);
        }
        let uv = self.line_through(u, v)?;
        Ok(match self.intersect_lines(l, &uv)? {
            Some(x) => Self::between(u, v, &x),
            None => false,
        })
    }

    /// Pasch's axiom for one instance: does `probe`, a line through the
    /// interior point `p` of side `a-c`, meet `[a, b] ∪ [b, c]`?
    pub fn pasch_check(
        &self,
        a: &RatPoint,
        b: &RatPoint,
        c: &RatPoint,
        p: &RatPoint,
        probe: &SystemLine,
    ) -> Result<bool> {
        for q in [a, b, c, p] {
            self.check_carrier(q)?;
        }
        if a == b || b == c || a == c {
            return Err(LineSystemError::DegenerateTriangle);
        }
        let ac = self.line_through(a, c)?;
        if self.contains(&ac, b) {
            return Err(LineSystemError::DegenerateTriangle);
        }
        if p == a || p == c || !self.contains(&ac, p) || !Self::between(a, c, p) {
            return Err(LineSystemError::NotInteriorToSide);
        }
        if !self.contains(probe, p) {
            return Err(LineSystemError::ProbeMissesPoint);
        }
        if *probe == ac {
            return Err(LineSystemError::ProbeIsSide);
        }
        Ok(self.meets_segment(probe, a, b)? || self.meets_segment(probe, b, c)?)
    }

    /// Exact endpoints of a chord of a polygonal body.
    pub fn chord_ends(&self, l: &SystemLine) -> Option<[RatPoint; 2]> {
        let (LineSystem::EuclideanChords(ConvexBody::Polygon(poly)), SystemLine::Chord(l)) =
            (self, l)
        else {
            return None;
        };
        let [a, b, c] = l.coords().clone();
        // a point of the line and its direction (b, -a)
        let base = if !b.is_zero() {
            RatPoint::new(Rat::zero(), -c / &b)
        } else {
            RatPoint::new(-c / &a, Rat::zero())
        };
        let d = (b.clone(), -a.clone());
        let (lo, hi) = poly.clip_line(&base, &d)?;
        let at = |t: &Rat| RatPoint::new(&base.x + t * &d.0, &base.y + t * &d.1);
        Some([at(&lo), at(&hi)])
    }
}

fn moulton_through(k: &Rat, p: &RatPoint, q: &RatPoint) -> MoultonLine {
    if p.x == q.x {
        return MoultonLine::Vertical { x: p.x.clone() };
    }
    let (p, q) = if p.x < q.x { (p, q) } else { (q, p) };
    let m = (&q.y - &p.y) / (&q.x - &p.x);
    if !m.is_negative() {
        let intercept = &p.y - &m * &p.x;
        return MoultonLine::Straight { slope: m, intercept };
    }
    if !p.x.is_positive() && !q.x.is_positive() {
        let intercept = &p.y - &m * &p.x;
        MoultonLine::Bent { slope: m, intercept }
    } else if !p.x.is_negative() {
        let intercept = &p.y - &m * &p.x;
        MoultonLine::Bent { slope: m / k, intercept }
    } else {
        // p.y = m0·p.x + c and q.y = k·m0·q.x + c
        let m0 = (&q.y - &p.y) / (k * &q.x - &p.x);
        let intercept = &p.y - &m0 * &p.x;
        MoultonLine::Bent { slope: m0, intercept }
    }
}

fn moulton_meet(k: &Rat, a: &MoultonLine, b: &MoultonLine) -> Result<Option<RatPoint>> {
    let mut found: Option<RatPoint> = None;
    for (la, ha) in a.pieces(k) {
        for (lb, hb) in b.pieces(k) {
            let x = match meet(&la, &lb) {
                Ok(x) => match x.to_affine() {
                    Some(x) => x,
                    None => continue,
                },
                Err(ProjectiveError::CoincidentLines) => {
                    // one ray of each on the same straight line; distinct
                    // lines can share at most the bend point
                    if ha == HalfPlane::All || hb == HalfPlane::All || ha == hb {
                        return Err(LineSystemError::CoincidentLines);
                    }
                    a.bend_point().or_else(|| b.bend_point()).expect("bent line")
                }
                Err(e) => unreachable!("{e}"),
            };
            if ha.admits(&x.x) && hb.admits(&x.x) {
                debug_assert!(found.as_ref().is_none_or(|f| *f == x));
                found = Some(x);
            }
        }
    }
    Ok(found)
}

fn moulton_defect(k: &Rat, i: &RatPoint, j: &RatPoint, kp: &RatPoint) -> Rat {
    match moulton_through(k, i, j) {
        MoultonLine::Vertical { x } => &kp.x - x,
        l => &kp.y - l.y_at(k, &kp.x).expect("not vertical"),
    }
}

/// Exact grid searched for a Moulton counterexample to Desargues: center
/// `(-6, -6)`, vertices of the first triangle from `{-3, …, 3}²` in
/// lexicographic order, and each primed vertex `O + t·(V - O)` with `t` from
/// [`STRETCHES`]. Every perspective line has positive slope, so it is
/// straight in the Moulton plane as well.
pub const GRID_RADIUS: i64 = 3;
pub const STRETCHES: [(i64, i64); 3] = [(1, 2), (3, 2), (2, 1)];

/// First configuration of the documented grid that is perspective from a
/// point in the Moulton plane but whose side intersections are not
/// Moulton-collinear.
pub fn moulton_desargues_counterexample(bend: &Rat) -> Result<MoultonWitness> {
    let LineSystem::Moulton(k) = LineSystem::moulton(bend.clone())? else { unreachable!() };
    let sys = LineSystem::Moulton(k.clone());
    let center = RatPoint::from_ints(-6, -6);
    let grid: Vec<RatPoint> = (-GRID_RADIUS..=GRID_RADIUS)
        .flat_map(|x| (-GRID_RADIUS..=GRID_RADIUS).map(move |y| RatPoint::from_ints(x, y)))
        .collect();
    let stretches: Vec<Rat> = STRETCHES.iter().map(|&(n, d)| rat(n, d)).collect();
    let mut examined = 0u64;
    let n = grid.len();
    for ia in 0..n {
        for ib in ia + 1..n {
            for ic in ib + 1..n {
                let t1 = [grid[ia].clone(), grid[ib].clone(), grid[ic].clone()];
                if orient(&t1[0], &t1[1], &t1[2]).is_zero() {
                    continue;
                }
                for sa in &stretches {
                    for sb in &stretches {
                        for sc in &stretches {
                            examined += 1;
                            if examined > MOULTON_SEARCH_BUDGET {
                                return Err(LineSystemError::SearchExhausted(
                                    MOULTON_SEARCH_BUDGET,
                                ));
                            }
                            let t2 = [
                                center.lerp(&t1[0], sa),
                                center.lerp(&t1[1], sb),
                                center.lerp(&t1[2], sc),
                            ];
                            if let Some(w) = try_witness(&sys, &k, &center, &t1, &t2) {
                                return Ok(MoultonWitness { examined, ..w });
                            }
                        }
                    }
                }
            }
        }
    }
    Err(LineSystemError::SearchExhausted(examined))
}

fn try_witness(
    sys: &LineSystem,
    k: &Rat,
    center: &RatPoint,
    t1: &[RatPoint; 3],
    t2: &[RatPoint; 3],
) -> Option<MoultonWitness> {
    for t in [t1, t2] {
        let l = sys.line_through(&t[0], &t[1]).ok()?;
        if sys.contains(&l, &t[2]) {
            return None;
        }
    }
    for v in 0..3 {
        let l = sys.line_through(center, &t1[v]).ok()?;
        if !sys.contains(&l, &t2[v]) {
            return None;
        }
    }
    let side = |i: usize, j: usize| -> Option<RatPoint> {
        let l1 = sys.line_through(&t1[i], &t1[j]).ok()?;
        let l2 = sys.line_through(&t2[i], &t2[j]).ok()?;
        sys.intersect_lines(&l1, &l2).ok()?
    };
    let (i, j, kp) = (side(0, 1)?, side(0, 2)?, side(1, 2)?);
    if i == j || i == kp || j == kp {
        return None;
    }
    let defect = moulton_defect(k, &i, &j, &kp);
    if defect.is_zero() {
        return None;
    }
    let proj = |t: &[RatPoint; 3]| t.clone().map(|p| ProjPoint::from_rat_point(&p));
    let verdict = desargues_verdict(&proj(t1), &proj(t2));
    let [si, sj, sk] = verdict.side_points?;
    let straight_defect = collinearity_defect(&si, &sj, &sk);
    Some(MoultonWitness {
        bend: k.clone(),
        center: center.clone(),
        triangles: [t1.clone(), t2.clone()],
        side_points: [i, j, kp],
        defect,
        straight_side_points: [si, sj, sk],
        straight_defect,
        examined: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::ConvexPolygon;
    use crate::rat::half;
    use proptest::prelude::*;

    fn square() -> LineSystem {
        LineSystem::EuclideanChords(ConvexBody::Polygon(ConvexPolygon::unit_square()))
    }

    fn m2() -> LineSystem {
        LineSystem::moulton(int(2)).unwrap()
    }

    fn p(x: i64, y: i64) -> RatPoint {
        RatPoint::from_ints(x, y)
    }

    #[test]
    fn chord_of_the_x_axis() {
        let sys = square();
        let l = sys.line_through(&p(0, 0), &RatPoint::new(half(), int(0))).unwrap();
        assert_eq!(l, SystemLine::Chord(ProjLine::from_ints(0, 1, 0).unwrap()));
        assert_eq!(sys.chord_ends(&l).unwrap(), [p(0, 0), p(1, 0)]);
        assert_eq!(
            sys.line_through(&p(0, 0), &p(2, 0)),
            Err(LineSystemError::OutsideCarrier(Box::new(p(2, 0))))
        );
        assert_eq!(sys.line_through(&p(1, 1), &p(1, 1)), Err(LineSystemError::CoincidentPoints));
    }

    #[test]
    fn chords_crossing_at_the_center() {
        let sys = square();
        let d1 = sys.line_through(&p(0, 0), &p(1, 1)).unwrap();
        let d2 = sys.line_through(&p(1, 0), &p(0, 1)).unwrap();
        assert_eq!(sys.intersect_lines(&d1, &d2).unwrap(), Some(RatPoint::new(half(), half())));
        assert_eq!(sys.intersect_lines(&d1, &d1), Err(LineSystemError::CoincidentLines));
    }

    #[test]
    fn disjoint_chords() {
        let sys = square();
        let a = sys.line_through(&p(0, 0), &RatPoint::new(half(), int(0))).unwrap();
        let b = sys.line_through(&p(1, 1), &RatPoint::new(half(), int(1))).unwrap();
        assert_eq!(sys.intersect_lines(&a, &b).unwrap(), None);
        // the edge x = 1 meets the antidiagonal at a corner
        let c = sys.line_through(&p(1, 1), &RatPoint::new(int(1), half())).unwrap();
        let d = sys.line_through(&p(0, 1), &p(1, 0)).unwrap();
        assert_eq!(sys.intersect_lines(&c, &d).unwrap(), Some(RatPoint::new(int(1), int(0))));
        let e = sys.line_through(&RatPoint::new(half(), int(1)), &RatPoint::new(int(1), half())).unwrap();
        assert_eq!(sys.intersect_lines(&a, &e).unwrap(), None);
    }

    #[test]
    fn chords_of_a_disk() {
        let sys = LineSystem::EuclideanChords(ConvexBody::unit_disk());
        assert!(sys.in_carrier(&p(1, 0)));
        assert!(!sys.in_carrier(&RatPoint::new(rat(3, 4), rat(3, 4))));
        let a = sys.line_through(&p(-1, 0), &p(1, 0)).unwrap();
        let b = sys.line_through(&p(0, -1), &p(0, 1)).unwrap();
        assert_eq!(sys.intersect_lines(&a, &b).unwrap(), Some(p(0, 0)));
    }

    #[test]
    fn moulton_bends_across_the_axis() {
        let sys = m2();
        let (a, b) = (p(-1, 1), p(1, -1));
        let l = sys.line_through(&a, &b).unwrap();
        // slope m on the left and 2m on the right: 1 = -m + c, -1 = 2m + c
        let want = MoultonLine::Bent { slope: rat(-2, 3), intercept: rat(1, 3) };
        assert_eq!(l, SystemLine::Moulton(want));
        assert!(sys.contains(&l, &a) && sys.contains(&l, &b));
        assert!(!sys.contains(&l, &p(0, 0)));
        assert!(sys.contains(&l, &RatPoint::new(int(0), rat(1, 3))));
    }

    #[test]
    fn moulton_positive_slopes_stay_straight() {
        let sys = m2();
        let l = sys.line_through(&p(-2, -1), &p(2, 1)).unwrap();
        assert_eq!(l, SystemLine::Moulton(MoultonLine::Straight { slope: half(), intercept: int(0) }));
        assert!(sys.contains(&l, &p(4, 2)));
        let v = sys.line_through(&p(3, -1), &p(3, 5)).unwrap();
        assert_eq!(v, SystemLine::Moulton(MoultonLine::Vertical { x: int(3) }));
    }

    #[test]
    fn moulton_same_side_negative_slopes() {
        let sys = m2();
        // right half-plane: the stored slope is the left-hand one
        let l = sys.line_through(&p(1, 0), &p(2, -2)).unwrap();
        assert_eq!(l, SystemLine::Moulton(MoultonLine::Bent { slope: int(-1), intercept: int(2) }));
        assert!(sys.contains(&l, &p(-1, 3)));
        let l = sys.line_through(&p(-2, 2), &p(-1, 1)).unwrap();
        assert_eq!(l, SystemLine::Moulton(MoultonLine::Bent { slope: int(-1), intercept: int(0) }));
        assert!(sys.contains(&l, &p(1, -2)));
    }

    #[test]
    fn moulton_meets_vertical_with_doubled_slope() {
        let sys = m2();
        let bent = sys.line_through(&p(-1, 1), &p(0, 0)).unwrap();
        let v = sys.line_through(&p(3, 0), &p(3, 1)).unwrap();
        let x = sys.intersect_lines(&bent, &v).unwrap().unwrap();
        assert_eq!(x, p(3, -6));
        assert!(sys.contains(&bent, &x) && sys.contains(&v, &x));
    }

    #[test]
    fn moulton_rays_on_one_euclidean_line_meet_at_the_bend() {
        let sys = m2();
        // left ray of a: y = -2x + 1; right ray of b: y = 2·(-1)x + 1
        let a = SystemLine::Moulton(MoultonLine::Bent { slope: int(-2), intercept: int(1) });
        let b = SystemLine::Moulton(MoultonLine::Bent { slope: int(-1), intercept: int(1) });
        assert_eq!(sys.intersect_lines(&a, &b).unwrap(), Some(p(0, 1)));
    }

    #[test]
    fn moulton_parallels() {
        let sys = m2();
        let a = sys.line_through(&p(0, 0), &p(1, 1)).unwrap();
        let b = sys.line_through(&p(0, 1), &p(1, 2)).unwrap();
        assert_eq!(sys.intersect_lines(&a, &b).unwrap(), None);
    }

    #[test]
    fn bend_validation() {
        assert_eq!(LineSystem::moulton(int(1)), Err(LineSystemError::InvalidBend(int(1))));
        assert!(LineSystem::moulton(int(-2)).is_err());
        assert!(LineSystem::moulton(half()).is_ok());
        assert!(matches!(
            moulton_desargues_counterexample(&int(1)),
            Err(LineSystemError::InvalidBend(_))
        ));
    }

    #[test]
    fn json_shapes() {
        let s: LineSystem = serde_json::from_str(r#"{"kind":"moulton","bend":"2/1"}"#).unwrap();
        assert_eq!(s, m2());
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"kind":"moulton","bend":"2/1"}"#);
        assert!(serde_json::from_str::<LineSystem>(r#"{"kind":"moulton","bend":"1/1"}"#).is_err());
        assert!(serde_json::from_str::<LineSystem>(r#"{"kind":"moulton","bend":"2","x":1}"#).is_err());
        let c = r#"{"kind":"euclidean_chords","body":{"kind":"disk","center":[0.0,0.0],"radius":1.0}}"#;
        let s: LineSystem = serde_json::from_str(c).unwrap();
        assert_eq!(s, LineSystem::EuclideanChords(ConvexBody::unit_disk()));
    }

    #[test]
    fn pasch_preconditions() {
        let sys = square();
        let (a, b, c) = (p(0, 0), p(1, 0), p(0, 1));
        let mid = RatPoint::new(int(0), half());
        let ac = sys.line_through(&a, &c).unwrap();
        assert_eq!(sys.pasch_check(&a, &b, &c, &mid, &ac), Err(LineSystemError::ProbeIsSide));
        let probe = sys.line_through(&mid, &p(1, 1)).unwrap();
        assert_eq!(sys.pasch_check(&a, &b, &c, &a, &probe), Err(LineSystemError::NotInteriorToSide));
        let off = sys.line_through(&p(1, 1), &b).unwrap();
        assert_eq!(sys.pasch_check(&a, &b, &c, &mid, &off), Err(LineSystemError::ProbeMissesPoint));
        let flat = RatPoint::new(half(), int(0));
        assert_eq!(
            sys.pasch_check(&a, &flat, &b, &flat, &probe),
            Err(LineSystemError::DegenerateTriangle)
        );
        assert_eq!(sys.pasch_check(&a, &b, &c, &mid, &probe), Ok(true));
    }

    #[test]
    fn moulton_pasch_through_the_bend() {
        let sys = m2();
        let (a, b, c) = (p(-4, 0), p(4, 0), p(-4, 4));
        let mid = p(-4, 2);
        let probe = sys.line_through(&mid, &p(0, 0)).unwrap();
        assert!(matches!(probe, SystemLine::Moulton(MoultonLine::Bent { .. })));
        assert_eq!(sys.pasch_check(&a, &b, &c, &mid, &probe), Ok(true));
    }

    #[test]
    fn moulton_witness_for_bend_two() {
        let w = moulton_desargues_counterexample(&int(2)).unwrap();
        assert!(!w.defect.is_zero());
        assert!(w.straight_defect.is_zero());
        let sys = m2();
        // perspective in the Moulton plane
        for v in 0..3 {
            let l = sys.line_through(&w.center, &w.triangles[0][v]).unwrap();
            assert!(sys.contains(&l, &w.triangles[1][v]));
        }
        // side points are genuine Moulton intersections
        let pairs = [(0, 1), (0, 2), (1, 2)];
        for (s, (i, j)) in w.side_points.iter().zip(pairs) {
            for t in &w.triangles {
                let l = sys.line_through(&t[i], &t[j]).unwrap();
                assert!(sys.contains(&l, s));
            }
        }
        let ij = sys.line_through(&w.side_points[0], &w.side_points[1]).unwrap();
        assert!(!sys.contains(&ij, &w.side_points[2]));
        assert!(w.examined <= MOULTON_SEARCH_BUDGET);
        assert_eq!(moulton_desargues_counterexample(&int(2)).unwrap(), w);
    }

    fn small() -> impl Strategy<Value = Rat> {
        (-40i64..=40, 1i64..=8).prop_map(|(n, d)| rat(n, d))
    }

    fn pt() -> impl Strategy<Value = RatPoint> {
        (small(), small()).prop_map(|(x, y)| RatPoint::new(x, y))
    }

    fn bend() -> impl Strategy<Value = Rat> {
        prop_oneof![Just(int(2)), Just(rat(1, 3)), Just(rat(5, 2))]
    }

    proptest! {
        #[test]
        fn moulton_line_is_unique(k in bend(), a in pt(), b in pt(), c in pt()) {
            prop_assume!(a != b);
            let sys = LineSystem::moulton(k).unwrap();
            let l = sys.line_through(&a, &b).unwrap();
            prop_assert!(sys.contains(&l, &a) && sys.contains(&l, &b));
            prop_assert_eq!(&l, &sys.line_through(&b, &a).unwrap());
            if c != a && sys.contains(&l, &c) {
                prop_assert_eq!(&l, &sys.line_through(&a, &c).unwrap());
            }
        }

        #[test]
        fn moulton_meet_is_on_both(k in bend(), a in pt(), b in pt(), c in pt(), d in pt()) {
            prop_assume!(a != b && c != d);
            let sys = LineSystem::moulton(k).unwrap();
            let (l1, l2) = (sys.line_through(&a, &b).unwrap(), sys.line_through(&c, &d).unwrap());
            prop_assume!(l1 != l2);
            if let Some(x) = sys.intersect_lines(&l1, &l2).unwrap() {
                prop_assert!(sys.contains(&l1, &x) && sys.contains(&l2, &x));
            }
        }

        #[test]
        fn moulton_pasch(k in bend(), a in pt(), b in pt(), c in pt(), s in 1i64..8, r in pt()) {
            let sys = LineSystem::moulton(k).unwrap();
            prop_assume!(a != b && b != c && a != c);
            let ac = sys.line_through(&a, &c).unwrap();
            prop_assume!(!sys.contains(&ac, &b));
            // an interior point of the Moulton segment a-c
            let x = &a.x + rat(s, 8) * (&c.x - &a.x);
            let mid = match &ac {
                SystemLine::Moulton(MoultonLine::Vertical { .. }) => {
                    RatPoint::new(a.x.clone(), &a.y + rat(s, 8) * (&c.y - &a.y))
                }
                SystemLine::Moulton(m) => {
                    let y = m.y_at(sys_bend(&sys), &x).unwrap();
                    RatPoint::new(x, y)
                }
                _ => unreachable!(),
            };
            prop_assume!(r != mid);
            let probe = sys.line_through(&mid, &r).unwrap();
            prop_assume!(probe != ac);
            prop_assert_eq!(sys.pasch_check(&a, &b, &c, &mid, &probe), Ok(true));
        }
    }

    fn sys_bend(s: &LineSystem) -> &Rat {
        match s {
            LineSystem::Moulton(k) => k,
            _ => unreachable!(),
        }
    }
}
