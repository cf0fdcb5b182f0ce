//! The property suites behind each subcommand.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use num::Zero;
use rayon::prelude::*;
use synthgeom::body::{ConvexBody, P2, V2};
use synthgeom::constructions::{
    build_harmonic_net, hash_collisions, metric_harmonic_conjugate, pasch_phi, pasch_phi_preimage,
    pasch_phi_trace, psi_map, ExactEuclidean, HarmonicNet, PaschMap,
};
use synthgeom::line_systems::{moulton_desargues_counterexample, LineSystem, SystemLine, MOULTON_SEARCH_BUDGET};
use synthgeom::metric::StraightPlane;
use synthgeom::projective::{
    desargues_verdict, harmonic_conjugate_algebraic, harmonic_conjugate_quadrangle, Homography, ProjPoint,
};
use synthgeom::rat::{int, rat, to_f64, Rat, RatPoint};
use synthgeom::sampling::{
    disk_point, index, interior_point, non_perspective_pair, perspective_pair, rat_point, rational, rational_in,
    seeded, unit, SeededRng,
};

use crate::export;
use crate::report::{ConfigReport, NamedPoint, Tally, Timing, Witness};
use crate::spec::{SceneSpec, Suite};

/// Fixed shard count, so results do not depend on the thread pool size.
pub const SHARDS: u64 = 8;

/// Probe lines per triangle in the Pasch suite.
pub const PROBES: usize = 10;

/// Auxiliary pairs per base triple in the harmonic suite.
pub const AUX_PAIRS: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("{0}")]
    Setup(String),
    #[error("render is not a suite")]
    NotASuite,
}

/// A finished run plus any extra files it asked for.
pub struct SuiteOutput {
    pub report: ConfigReport,
    pub artifacts: Vec<(PathBuf, String)>,
}

struct Outcome {
    descriptor: String,
    exact: bool,
    depth: Option<u32>,
    tolerances: BTreeMap<String, f64>,
    tally: Tally,
    artifacts: Vec<(PathBuf, String)>,
}

impl Outcome {
    fn new(descriptor: String, exact: bool, tally: Tally) -> Self {
        Outcome { descriptor, exact, depth: None, tolerances: BTreeMap::new(), tally, artifacts: Vec::new() }
    }

    fn tol(mut self, name: &str, v: f64) -> Self {
        self.tolerances.insert(name.into(), v);
        self
    }

    fn depth(mut self, d: u32) -> Self {
        self.depth = Some(d);
        self
    }
}

/// Splits `cases` over [`SHARDS`] independent ChaCha streams of one seed.
/// Output order is the shard order.
fn sharded<T, F>(cases: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut SeededRng, u64) -> T + Sync,
{
    (0..SHARDS)
        .into_par_iter()
        .map(|s| {
            let n = cases / SHARDS + u64::from(s < cases % SHARDS);
            let mut rng = seeded(seed);
            rng.set_stream(s);
            f(&mut rng, n)
        })
        .collect()
}

fn combine(parts: Vec<Tally>) -> Tally {
    parts.into_iter().fold(Tally::default(), |mut acc, t| {
        acc.absorb(t);
        acc
    })
}

fn describe<T: serde::Serialize>(x: &T) -> String {
    serde_json::to_string(x).expect("descriptors serialize")
}

pub fn run_suite(spec: &SceneSpec) -> Result<SuiteOutput, SuiteError> {
    let start = Instant::now();
    let out = match spec.suite {
        Suite::Desargues => desargues(spec),
        Suite::Harmonic => harmonic(spec)?,
        Suite::Net => net(spec),
        Suite::Psi => psi(spec)?,
        Suite::Phi => phi(spec)?,
        Suite::Hilbert => hilbert(spec)?,
        Suite::Pasch => pasch(spec)?,
        Suite::Moulton => moulton(spec),
        Suite::Render => return Err(SuiteError::NotASuite),
    };
    let (counts, worst_residual, witnesses) = out.tally.witnesses_sorted();
    let report = ConfigReport {
        suite: spec.suite,
        descriptor: out.descriptor,
        seed: spec.seed(),
        depth: out.depth,
        exact: out.exact,
        counts,
        worst_residual,
        tolerances: out.tolerances,
        witnesses,
        timing: Timing { wall_clock_seconds: start.elapsed().as_secs_f64() },
    };
    Ok(SuiteOutput { report, artifacts: out.artifacts })
}

// ---- sampling ----------------------------------------------------------------

/// Interior point of the plane's domain, or of the unit disk for planes
/// without one.
pub fn sample_point(plane: &StraightPlane, rng: &mut SeededRng) -> P2 {
    match plane.domain() {
        Some(body) if body.is_bounded() => interior_point(rng, body),
        _ => disk_point(rng, 1.0),
    }
}

fn int_box(lo: f64, hi: f64) -> (i64, i64) {
    (lo.floor() as i64, hi.ceil() as i64)
}

/// Rational points on a `1/1000` grid covering the system's carrier.
pub fn system_point(sys: &LineSystem, rng: &mut SeededRng) -> Option<RatPoint> {
    let (xs, ys) = match sys {
        LineSystem::Moulton(_) => ((-3, 3), (-3, 3)),
        LineSystem::EuclideanChords(body) => match body {
            ConvexBody::Polygon(poly) => {
                let v: Vec<P2> = poly.vertices().iter().map(RatPoint::to_f64).collect();
                let lo = v.iter().fold(P2::new(f64::INFINITY, f64::INFINITY), |m, p| m.inf(p));
                let hi = v.iter().fold(P2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |m, p| m.sup(p));
                (int_box(lo.x, hi.x), int_box(lo.y, hi.y))
            }
            ConvexBody::Disk { center, radius } => {
                (int_box(center.x - radius, center.x + radius), int_box(center.y - radius, center.y + radius))
            }
            ConvexBody::Ellipse { center, semi_axes, .. } => {
                let r = semi_axes[0].max(semi_axes[1]);
                (int_box(center.x - r, center.x + r), int_box(center.y - r, center.y + r))
            }
            ConvexBody::Strip { lower, upper } => ((-3, 3), int_box(*lower, upper.unwrap_or(lower + 3.0))),
        },
    };
    (0..10_000).find_map(|_| {
        let p = RatPoint::new(rational_in(rng, xs.0, xs.1), rational_in(rng, ys.0, ys.1));
        sys.in_carrier(&p).then_some(p)
    })
}

fn no_points() -> SuiteError {
    SuiteError::Setup("cannot sample points inside the carrier".into())
}

// ---- desargues ---------------------------------------------------------------

fn proj(t: &[RatPoint; 3]) -> [ProjPoint; 3] {
    t.clone().map(|p| ProjPoint::from_rat_point(&p))
}

fn pair_witness(label: &str, center: Option<&RatPoint>, t1: &[RatPoint; 3], t2: &[RatPoint; 3]) -> Witness {
    let mut pts: Vec<NamedPoint> = center.map(|o| NamedPoint::exact("O", o)).into_iter().collect();
    for (names, t) in [(["A", "B", "C"], t1), (["A'", "B'", "C'"], t2)] {
        pts.extend(names.iter().zip(t).map(|(n, p)| NamedPoint::exact(n, p)));
    }
    Witness::new(label, None, pts)
}

fn desargues(spec: &SceneSpec) -> Outcome {
    let parts = sharded(spec.cases(), spec.seed(), |rng, n| {
        let mut t = Tally::default();
        for _ in 0..n {
            if index(rng, 2) == 0 {
                let (o, t1, t2) = perspective_pair(rng);
                let v = desargues_verdict(&proj(&t1), &proj(&t2));
                if v.is_degenerate() {
                    t.skip();
                    continue;
                }
                let defect = v.axis_defect().unwrap_or_else(|| int(1));
                let residual = Some(to_f64(&defect).abs());
                if v.perspective_from_point && v.perspective_from_line && defect.is_zero() {
                    t.pass(residual);
                } else {
                    t.fail(residual, pair_witness("perspective pair misjudged", Some(&o), &t1, &t2));
                }
            } else {
                let (t1, t2) = non_perspective_pair(rng);
                let v = desargues_verdict(&proj(&t1), &proj(&t2));
                if v.is_degenerate() {
                    t.skip();
                } else if !v.perspective_from_point && !v.perspective_from_line {
                    t.pass(None);
                } else {
                    t.fail(None, pair_witness("non-perspective pair misjudged", None, &t1, &t2));
                }
            }
        }
        t
    });
    Outcome::new("exact_projective".into(), true, combine(parts)).tol("residual", 0.0)
}

// ---- harmonic ----------------------------------------------------------------

/// Distance between two points of the projective plane, seen as antipodal
/// pairs on the unit sphere.
fn chordal(p: &ProjPoint, q: &ProjPoint) -> f64 {
    let unit = |p: &ProjPoint| {
        let v = p.coords().clone().map(|c| to_f64(&c));
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        v.map(|c| c / n)
    };
    let (u, v) = (unit(p), unit(q));
    let dist = |sign: f64| (0..3).map(|i| (u[i] - sign * v[i]).powi(2)).sum::<f64>().sqrt();
    dist(1.0).min(dist(-1.0))
}

fn nonzero_non_one(rng: &mut SeededRng) -> Rat {
    loop {
        let t = rational(rng);
        if !t.is_zero() && t != int(1) {
            return t;
        }
    }
}

fn exact_harmonic(spec: &SceneSpec) -> Outcome {
    let parts = sharded(spec.cases(), spec.seed(), |rng, n| {
        let mut t = Tally::default();
        for _ in 0..n {
            let (a, b) = (rat_point(rng), rat_point(rng));
            if a == b {
                t.skip();
                continue;
            }
            let p = a.lerp(&b, &nonzero_non_one(rng));
            let [pa, pb, pp] = [&a, &b, &p].map(ProjPoint::from_rat_point);
            let Ok(want) = harmonic_conjugate_algebraic(&pa, &pb, &pp) else {
                t.skip();
                continue;
            };
            let mut worst = 0.0f64;
            let mut found = Vec::new();
            for _ in 0..1000 {
                if found.len() == AUX_PAIRS {
                    break;
                }
                let z = rat_point(rng);
                let x = a.lerp(&z, &nonzero_non_one(rng));
                let [pz, px] = [&z, &x].map(ProjPoint::from_rat_point);
                if let Ok(h) = harmonic_conjugate_quadrangle(&pa, &pb, &pp, &pz, &px) {
                    worst = worst.max(chordal(&h.q, &want));
                    found.push((z, x, h.q));
                }
            }
            if found.len() < AUX_PAIRS {
                t.skip();
            } else if found.iter().all(|(_, _, q)| *q == want) {
                t.pass(Some(0.0));
            } else {
                let mut pts = vec![NamedPoint::exact("a", &a), NamedPoint::exact("b", &b), NamedPoint::exact("p", &p)];
                for (i, (z, x, q)) in found.iter().enumerate().filter(|(_, f)| f.2 != want) {
                    pts.push(NamedPoint::exact(&format!("z{i}"), z));
                    pts.push(NamedPoint::exact(&format!("x{i}"), x));
                    pts.push(NamedPoint::projective(&format!("q{i}"), q));
                }
                t.fail(Some(worst), Witness::new("conjugate depends on the auxiliaries", None, pts));
            }
        }
        t
    });
    Outcome::new("exact_projective".into(), true, combine(parts)).tol("residual", 0.0)
}

fn harmonic(spec: &SceneSpec) -> Result<Outcome, SuiteError> {
    let plane = spec.plane();
    if spec.exact_plane() {
        return Ok(exact_harmonic(spec));
    }
    let tol = spec.tolerances.residual.unwrap_or(1e-9);
    let parts = sharded(spec.cases(), spec.seed(), |rng, n| {
        let mut t = Tally::default();
        for _ in 0..n {
            let (a, b) = (sample_point(&plane, rng), sample_point(&plane, rng));
            let s = 1.2 + unit(rng);
            let p = a + (b - a) * s;
            if (b - a).norm() < 0.05 || !plane.in_carrier(&p) {
                t.skip();
                continue;
            }
            // harmonic conjugacy is projective, so the affine value on the
            // straight chord is the reference
            let want = a + (b - a) * (s / (2.0 * s - 1.0));
            let mut got = Vec::new();
            for _ in 0..4 * AUX_PAIRS {
                if got.len() == AUX_PAIRS / 2 {
                    break;
                }
                let z = sample_point(&plane, rng);
                let x = a + (z - a) * (0.2 + 0.6 * unit(rng));
                if let Ok(q) = metric_harmonic_conjugate(&plane, &a, &b, &p, &z, &x) {
                    got.push((z, x, q));
                }
            }
            if got.len() < 2 {
                t.skip();
                continue;
            }
            let spread = got.iter().map(|(_, _, q)| (q - got[0].2).norm().max((q - want).norm())).fold(0.0, f64::max);
            t.check(spread, tol, || {
                let mut pts = vec![NamedPoint::numeric("a", &a), NamedPoint::numeric("b", &b), NamedPoint::numeric("p", &p)];
                for (i, (z, x, q)) in got.iter().enumerate() {
                    pts.push(NamedPoint::numeric(&format!("z{i}"), z));
                    pts.push(NamedPoint::numeric(&format!("x{i}"), x));
                    pts.push(NamedPoint::numeric(&format!("q{i}"), q));
                }
                Witness::new("conjugates disagree", Some(format!("spread {spread:e}")), pts)
            });
        }
        t
    });
    Ok(Outcome::new(describe(&plane), false, combine(parts)).tol("residual", tol))
}

// ---- net -----------------------------------------------------------------------

fn error_witness(label: &str, e: impl std::fmt::Display) -> Witness {
    Witness::new(label, Some(e.to_string()), Vec::new())
}

fn unit_square_map(corners: [RatPoint; 4]) -> Option<Homography> {
    let [a, b, y, x] = corners.map(|p| ProjPoint::from_rat_point(&p));
    Homography::from_unit_square(&a, &b, &x, &y).ok()
}

fn dyadic_point(m: u64, n: u64, depth: u32) -> ProjPoint {
    let d = 1i64 << depth;
    ProjPoint::affine(rat(m as i64, d), rat(n as i64, d))
}

fn net(spec: &SceneSpec) -> Outcome {
    let depth = spec.depth();
    let mut tally = Tally::default();
    let mut artifacts = Vec::new();
    let export_to = |text: String, artifacts: &mut Vec<(PathBuf, String)>| {
        if let Some(path) = &spec.net_export {
            artifacts.push((path.clone(), text));
        }
    };
    let csv_export = spec.net_export.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "csv"));
    let (descriptor, exact, tol) = if spec.exact_plane() {
        let base = spec.exact_base();
        let h = unit_square_map(base.corners()).expect("validated base");
        match build_harmonic_net(&ExactEuclidean, &base, depth) {
            Ok(net) => {
                for (label, p) in net.entries() {
                    let (m, n) = label.at_depth(depth);
                    let want = h.apply(&dyadic_point(m, n, depth));
                    let got = ProjPoint::from_rat_point(p);
                    if got == want {
                        tally.pass(Some(0.0));
                    } else {
                        let r = chordal(&got, &want);
                        tally.fail(Some(r), Witness::new(label.to_string(), None, vec![NamedPoint::exact("net", p), NamedPoint::projective("oracle", &want)]));
                    }
                }
                let text = if csv_export { export::net_csv_exact(&net) } else { export::net_json_exact(&net) };
                export_to(text, &mut artifacts);
            }
            Err(e) => tally.fail(None, error_witness("net construction failed", e)),
        }
        ("exact_euclidean".to_string(), true, 0.0)
    } else {
        let plane = spec.plane();
        let tol = spec.tolerances.residual.unwrap_or(1e-8);
        let base = spec.metric_base();
        let h = unit_square_map(spec.exact_base().corners()).expect("validated base");
        match build_harmonic_net(&plane, &base, depth) {
            Ok(net) => {
                for (label, p) in net.entries() {
                    let (m, n) = label.at_depth(depth);
                    let want = h.apply(&dyadic_point(m, n, depth)).to_affine().map(|q| q.to_f64());
                    let r = want.map_or(f64::MAX, |w| (p - w).norm());
                    tally.check(r, tol, || {
                        let mut pts = vec![NamedPoint::numeric("net", p)];
                        pts.extend(want.map(|w| NamedPoint::numeric("oracle", &w)));
                        Witness::new(label.to_string(), None, pts)
                    });
                }
                let text = if csv_export { export::net_csv_numeric(&net) } else { export::net_json_numeric(&net) };
                export_to(text, &mut artifacts);
            }
            Err(e) => tally.fail(None, error_witness("net construction failed", e)),
        }
        (describe(&plane), false, tol)
    };
    let mut out = Outcome::new(descriptor, exact, tally).tol("residual", tol).depth(depth);
    out.artifacts = artifacts;
    out
}

// ---- psi -----------------------------------------------------------------------

fn cross(u: V2, v: V2) -> f64 {
    u.x * v.y - u.y * v.x
}

/// Inside the convex quadrilateral `c`, either orientation.
pub fn inside_quad(c: &[P2; 4], v: &P2) -> bool {
    let s: Vec<f64> = (0..4).map(|i| cross(c[(i + 1) % 4] - c[i], v - c[i])).collect();
    s.iter().all(|&x| x > 0.0) || s.iter().all(|&x| x < 0.0)
}

fn quad_point(c: &[P2; 4], rng: &mut SeededRng) -> P2 {
    let lo = c.iter().fold(c[0], |m, p| m.inf(p));
    let hi = c.iter().fold(c[0], |m, p| m.sup(p));
    loop {
        let p = P2::new(lo.x + (hi.x - lo.x) * unit(rng), lo.y + (hi.y - lo.y) * unit(rng));
        if inside_quad(c, &p) {
            return p;
        }
    }
}

/// Distance of `q` from the line through `p` and `r`.
pub fn collinearity_residual(p: &P2, q: &P2, r: &P2) -> f64 {
    cross(r - p, q - p).abs() / (r - p).norm()
}

fn psi(spec: &SceneSpec) -> Result<Outcome, SuiteError> {
    let plane = spec.plane();
    let depth = spec.depth();
    let tol = spec.tolerances.residual.unwrap_or(1e-6);
    let net: HarmonicNet<P2> =
        build_harmonic_net(&plane, &spec.metric_base(), depth).map_err(|e| SuiteError::Setup(format!("net: {e}")))?;
    let corners = spec.base_corners();
    let diam = (corners[2] - corners[0]).norm().max((corners[3] - corners[1]).norm());
    let parts = sharded(spec.cases(), spec.seed(), |rng, n| {
        let mut t = Tally::default();
        for _ in 0..n {
            let (p, r) = (quad_point(&corners, rng), quad_point(&corners, rng));
            if (r - p).norm() < 0.1 * diam {
                t.skip();
                continue;
            }
            let q = p + (r - p) * (0.05 + 0.9 * unit(rng));
            let images: Result<Vec<P2>, _> = [p, q, r].iter().map(|v| psi_map(&plane, &net, v)).collect();
            match images {
                Ok(im) => {
                    let res = collinearity_residual(&im[0], &im[1], &im[2]);
                    t.check(res, tol, || {
                        let names = ["p", "q", "r", "psi(p)", "psi(q)", "psi(r)"];
                        let pts = [p, q, r, im[0], im[1], im[2]];
                        Witness::new("images not collinear", Some(format!("residual {res:e}")), names.iter().zip(&pts).map(|(n, v)| NamedPoint::numeric(n, v)).collect())
                    });
                }
                Err(e) => t.fail(None, Witness::new("psi failed", Some(e.to_string()), vec![NamedPoint::numeric("p", &p), NamedPoint::numeric("q", &q), NamedPoint::numeric("r", &r)])),
            }
        }
        t
    });
    Ok(Outcome::new(describe(&plane), false, combine(parts)).tol("residual", tol).depth(depth))
}

// ---- phi -----------------------------------------------------------------------

/// φ for the spec's triangle, with `p` at 0.4 of the way from `a` to `c`.
pub fn phi_map(spec: &SceneSpec) -> Result<PaschMap, SuiteError> {
    let plane = spec.plane();
    let [a, b, c] = spec.triangle_corners();
    let setup = |e: &dyn std::fmt::Display| SuiteError::Setup(format!("pasch map: {e}"));
    let ac = plane.distance(&a, &c).map_err(|e| setup(&e))?;
    let p = plane.geodesic_through(&a, &c).map_err(|e| setup(&e))?.point_at(0.4 * ac);
    PaschMap::new(&plane, a, b, c, p).map_err(|e| setup(&e))
}

/// Box around the model triangle, half a unit wider on every side.
pub fn model_box(map: &PaschMap) -> (P2, P2) {
    let m = &map.model;
    let lo = m.iter().fold(m[0], |acc, p| acc.inf(p)) - V2::new(0.5, 0.5);
    let hi = m.iter().fold(m[0], |acc, p| acc.sup(p)) + V2::new(0.5, 0.5);
    (lo, hi)
}

fn phi(spec: &SceneSpec) -> Result<Outcome, SuiteError> {
    let plane = spec.plane();
    let map = phi_map(spec)?;
    let tol = spec.tolerances.residual.unwrap_or(1e-9);
    let tol_pre = spec.tolerances.preimage.unwrap_or(1e-6);
    let cell = spec.tolerances.hash.unwrap_or(1e-9);
    let (lo, hi) = model_box(&map);
    let parts = sharded(spec.cases(), spec.seed(), |rng, n| {
        let mut t = Tally::default();
        let mut pairs = Vec::new();
        for _ in 0..n {
            let mq = P2::new(lo.x + (hi.x - lo.x) * unit(rng), lo.y + (hi.y - lo.y) * unit(rng));
            let tr = match pasch_phi_trace(&plane, &map, &mq) {
                Ok(tr) => tr,
                Err(e) => {
                    t.fail(None, Witness::new("phi failed", Some(e.to_string()), vec![NamedPoint::numeric("Q", &mq)]));
                    continue;
                }
            };
            let mut res = 0.0f64;
            for (model, metric) in [(tr.model_s, tr.s), (map.model_p, map.p)] {
                let len = (mq - model).norm();
                if len > 1e-12 {
                    match plane.distance(&tr.q, &metric) {
                        Ok(d) => res = res.max((d / len - tr.lambda).abs()),
                        Err(_) => res = f64::MAX,
                    }
                }
            }
            pairs.push((mq, tr.q));
            t.check(res, tol, || {
                Witness::new("ratio contract broken", Some(format!("residual {res:e}")), vec![NamedPoint::numeric("Q", &mq), NamedPoint::numeric("q", &tr.q)])
            });
        }
        let mut pre = Tally::default();
        for _ in 0..n.div_ceil(100) {
            let target = sample_point(&plane, rng);
            let back = pasch_phi_preimage(&plane, &map, &target).and_then(|mq| pasch_phi(&plane, &map, &mq));
            match back {
                Ok(q) if (q - target).norm() <= tol_pre => pre.pass(None),
                Ok(q) => pre.fail(None, Witness::new("preimage misses its target", Some(format!("error {:e}", (q - target).norm())), vec![NamedPoint::numeric("target", &target), NamedPoint::numeric("phi(preimage)", &q)])),
                Err(e) => pre.fail(None, Witness::new("no preimage", Some(e.to_string()), vec![NamedPoint::numeric("target", &target)])),
            }
        }
        (t, pre, pairs)
    });
    let mut tally = Tally::default();
    let mut pairs = Vec::new();
    for (t, pre, p) in parts {
        tally.absorb(t);
        tally.absorb(pre);
        pairs.extend(p);
    }
    let hits = hash_collisions(&pairs, cell);
    if hits == 0 {
        tally.pass(None);
    } else {
        tally.fail(None, Witness::new("images collide", Some(format!("{hits} collisions at resolution {cell:e}")), Vec::new()));
    }
    Ok(Outcome::new(describe(&plane), false, tally).tol("residual", tol).tol("preimage", tol_pre).tol("hash", cell))
}

// ---- hilbert -------------------------------------------------------------------

fn hilbert(spec: &SceneSpec) -> Result<Outcome, SuiteError> {
    let plane = spec.plane();
    let tol = spec.tolerances.residual.unwrap_or(1e-10);
    let parts = sharded(spec.cases(), spec.seed(), |rng, n| {
        let mut t = Tally::default();
        for _ in 0..n {
            let (x, y, z) = (sample_point(&plane, rng), sample_point(&plane, rng), sample_point(&plane, rng));
            let m = x + (y - x) * unit(rng);
            let d = |p: &P2, q: &P2| plane.distance(p, q);
            let checked = (|| -> Result<f64, synthgeom::metric::MetricError> {
                let triangle = d(&x, &y)? + d(&y, &z)? - d(&x, &z)?;
                let additivity = (d(&x, &m)? + d(&m, &y)? - d(&x, &y)?).abs();
                let symmetry = (d(&x, &y)? - d(&y, &x)?).abs();
                Ok((-triangle).max(additivity).max(symmetry).max(0.0))
            })();
            let pts = || ["x", "y", "z", "m"].iter().zip([x, y, z, m]).map(|(n, p)| NamedPoint::numeric(n, &p)).collect();
            match checked {
                Ok(r) => t.check(r, tol, || Witness::new("metric law broken", Some(format!("residual {r:e}")), pts())),
                Err(e) => t.fail(None, Witness::new("distance failed", Some(e.to_string()), pts())),
            }
        }
        t
    });
    Ok(Outcome::new(describe(&plane), false, combine(parts)).tol("residual", tol))
}

// ---- pasch ---------------------------------------------------------------------

/// A point strictly inside the segment `[a, c]` of the system.
fn point_on(sys: &LineSystem, ac: &SystemLine, a: &RatPoint, c: &RatPoint, s: &Rat) -> RatPoint {
    match (sys, ac) {
        (LineSystem::Moulton(k), SystemLine::Moulton(line)) => {
            let x = &a.x + s * (&c.x - &a.x);
            match line.y_at(k, &x) {
                Some(y) => RatPoint::new(x, y),
                None => a.lerp(c, s),
            }
        }
        _ => a.lerp(c, s),
    }
}

fn pasch(spec: &SceneSpec) -> Result<Outcome, SuiteError> {
    let sys = spec.system();
    if system_point(&sys, &mut seeded(spec.seed())).is_none() {
        return Err(no_points());
    }
    let parts = sharded(spec.cases(), spec.seed(), |rng, n| {
        let mut t = Tally::default();
        let draw = |rng: &mut SeededRng| system_point(&sys, rng).expect("carrier was sampled before");
        for _ in 0..n {
            let (a, b, c) = (draw(rng), draw(rng), draw(rng));
            let Ok(ac) = sys.line_through(&a, &c) else {
                t.skip();
                continue;
            };
            if a == b || b == c || sys.contains(&ac, &b) {
                t.skip();
                continue;
            }
            let s = loop {
                let s = rational_in(rng, 0, 1);
                if !s.is_zero() && s != int(1) {
                    break s;
                }
            };
            let p = point_on(&sys, &ac, &a, &c, &s);
            let mut bad = None;
            let mut probes = 0;
            while probes < PROBES {
                let r = draw(rng);
                let Ok(probe) = sys.line_through(&p, &r) else { continue };
                if probe == ac {
                    continue;
                }
                probes += 1;
                match sys.pasch_check(&a, &b, &c, &p, &probe) {
                    Ok(true) => {}
                    Ok(false) => bad = Some((r, None)),
                    Err(e) => bad = Some((r, Some(e.to_string()))),
                }
                if bad.is_some() {
                    break;
                }
            }
            match bad {
                None => t.pass(None),
                Some((r, err)) => {
                    let pts = ["a", "b", "c", "p", "r"].iter().zip([&a, &b, &c, &p, &r]).map(|(n, v)| NamedPoint::exact(n, v)).collect();
                    t.fail(None, Witness::new("probe through p misses [a,b] and [b,c]", err, pts));
                }
            }
        }
        t
    });
    Ok(Outcome::new(describe(&sys), true, combine(parts)))
}

// ---- moulton -------------------------------------------------------------------

fn moulton(spec: &SceneSpec) -> Outcome {
    let sys = spec.system();
    let LineSystem::Moulton(bend) = &sys else { unreachable!("validated") };
    let mut t = Tally::default();
    match moulton_desargues_counterexample(bend) {
        Ok(w) => {
            let mut pts = vec![NamedPoint::exact("O", &w.center)];
            let [t1, t2] = &w.triangles;
            for (names, tri) in [(["A", "B", "C"], t1), (["A'", "B'", "C'"], t2)] {
                pts.extend(names.iter().zip(tri).map(|(n, p)| NamedPoint::exact(n, p)));
            }
            pts.extend(["I", "J", "K"].iter().zip(&w.side_points).map(|(n, p)| NamedPoint::exact(n, p)));
            let detail = format!(
                "defect {}, straight defect {}, {} of {MOULTON_SEARCH_BUDGET} configurations examined",
                w.defect, w.straight_defect, w.examined
            );
            let witness = Witness::new("non-Desarguesian configuration", Some(detail), pts);
            if !w.defect.is_zero() && w.straight_defect.is_zero() {
                t.pass(None);
                t.witnesses.push(witness);
            } else {
                t.fail(None, witness);
            }
        }
        Err(e) => t.fail(None, error_witness("no counterexample", e)),
    }
    Outcome::new(describe(&sys), true, t)
}
