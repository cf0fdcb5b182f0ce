//! Seeded random inputs.
//!
//! A single `u64` seeds a ChaCha8 stream. Random rationals have numerator
//! and denominator bounded by [`MAX_TERM`], which keeps exact arithmetic on
//! them cheap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::body::{ConvexBody, P2};
use crate::rat::{int, orient, rat, Rat, RatPoint};
use num::Zero;

pub type SeededRng = ChaCha8Rng;

pub const MAX_TERM: i64 = 1000;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n/d` with `|n| ≤ 1000`, `1 ≤ d ≤ 1000`.
pub fn rational(rng: &mut SeededRng) -> Rat {
    rat(rng.gen_range(-MAX_TERM..=MAX_TERM), rng.gen_range(1..=MAX_TERM))
}

/// Multiple of `1/1000` in `[lo, hi]`.
pub fn rational_in(rng: &mut SeededRng, lo: i64, hi: i64) -> Rat {
    rat(rng.gen_range(lo * MAX_TERM..=hi * MAX_TERM), MAX_TERM)
}

pub fn rat_point(rng: &mut SeededRng) -> RatPoint {
    RatPoint::new(rational(rng), rational(rng))
}

/// Point with coordinates that are multiples of `1/1000` in `[lo, hi]²`.
pub fn rat_point_in(rng: &mut SeededRng, lo: i64, hi: i64) -> RatPoint {
    RatPoint::new(rational_in(rng, lo, hi), rational_in(rng, lo, hi))
}

/// Nonzero stretch factor different from 1.
fn stretch(rng: &mut SeededRng) -> Rat {
    loop {
        let t = rational(rng);
        if !t.is_zero() && t != int(1) {
            return t;
        }
    }
}

/// Center `O`, triangle `ABC` and `A'B'C'` with `V' = O + t_V (V − O)`.
/// The triangles may be degenerate; callers skip those.
pub fn perspective_pair(rng: &mut SeededRng) -> (RatPoint, [RatPoint; 3], [RatPoint; 3]) {
    let o = rat_point(rng);
    let t1 = [rat_point(rng), rat_point(rng), rat_point(rng)];
    let t2 = [0, 1, 2].map(|i| o.lerp(&t1[i], &stretch(rng)));
    (o, t1, t2)
}

/// A perspective pair with `C'` moved off the line `OC`, so that the pair is
/// not perspective from `O`; since `AA'` and `BB'` still meet only at `O`,
/// it is not perspective from any point.
pub fn non_perspective_pair(rng: &mut SeededRng) -> ([RatPoint; 3], [RatPoint; 3]) {
    loop {
        let (o, t1, mut t2) = perspective_pair(rng);
        let shift = rat_point(rng);
        t2[2] = RatPoint::new(&t2[2].x + &shift.x, &t2[2].y + &shift.y);
        if !orient(&o, &t1[2], &t2[2]).is_zero() {
            return (t1, t2);
        }
    }
}

fn bounding_box(body: &ConvexBody) -> Option<(P2, P2)> {
    match body {
        ConvexBody::Polygon(poly) => {
            let pts: Vec<P2> = poly.vertices().iter().map(RatPoint::to_f64).collect();
            let lo = pts.iter().fold(P2::new(f64::INFINITY, f64::INFINITY), |m, p| m.inf(p));
            let hi = pts.iter().fold(P2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |m, p| m.sup(p));
            Some((lo, hi))
        }
        ConvexBody::Disk { center, radius } => {
            Some((center.map(|c| c - radius), center.map(|c| c + radius)))
        }
        ConvexBody::Ellipse { center, semi_axes, .. } => {
            let r = semi_axes[0].max(semi_axes[1]);
            Some((center.map(|c| c - r), center.map(|c| c + r)))
        }
        ConvexBody::Strip { .. } => None,
    }
}

/// Uniform interior point of a bounded body, by rejection.
pub fn interior_point(rng: &mut SeededRng, body: &ConvexBody) -> P2 {
    let (lo, hi) = bounding_box(body).expect("bounded body");
    loop {
        let p = P2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if body.contains_interior(&p) {
            return p;
        }
    }
}

/// Uniform interior point of the disk of radius `r` about the origin.
pub fn disk_point(rng: &mut SeededRng, r: f64) -> P2 {
    loop {
        let p = P2::new(rng.gen_range(-r..r), rng.gen_range(-r..r));
        if p.coords.norm() < r {
            return p;
        }
    }
}

pub fn unit(rng: &mut SeededRng) -> f64 {
    rng.gen::<f64>()
}

pub fn index(rng: &mut SeededRng, n: usize) -> usize {
    rng.gen_range(0..n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::{desargues_verdict, ProjPoint};

    #[test]
    fn reproducible() {
        let a: Vec<Rat> = (0..5).map(|_| rational(&mut seeded(7))).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let mut r = seeded(7);
        let b: Vec<Rat> = (0..50).map(|_| rational(&mut r)).collect();
        assert!(b.iter().all(|q| q.numer().magnitude() <= &1000u32.into() && q.denom() <= &1000.into()));
    }

    #[test]
    fn generated_pairs_have_the_claimed_kind() {
        let mut r = seeded(11);
        let proj = |t: &[RatPoint; 3]| t.clone().map(|p| ProjPoint::from_rat_point(&p));
        for _ in 0..20 {
            let (_, t1, t2) = perspective_pair(&mut r);
            let v = desargues_verdict(&proj(&t1), &proj(&t2));
            assert!(v.is_degenerate() || v.perspective_from_point);
            let (t1, t2) = non_perspective_pair(&mut r);
            let v = desargues_verdict(&proj(&t1), &proj(&t2));
            assert!(v.is_degenerate() || !v.perspective_from_point);
        }
    }

    #[test]
    fn interior_points() {
        let mut r = seeded(3);
        let body = ConvexBody::unit_disk();
        assert!((0..100).all(|_| body.contains_interior(&interior_point(&mut r, &body))));
    }
}
