//! Suite reports and how shards of a run are combined.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use synthgeom::body::P2;
use synthgeom::projective::ProjPoint;
use synthgeom::rat::{format_rat, RatPoint};

use crate::spec::Suite;

pub const REPORT_SCHEMA: &str = include_str!("../schema/config_report.schema.json");

/// Failure witnesses kept per report; merges keep the smallest ones.
pub const MAX_WITNESSES: usize = 16;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Counts {
    pub run: u64,
    pub passed: u64,
    pub failed: u64,
    pub skipped: u64,
}

impl Counts {
    fn add(self, o: Counts) -> Counts {
        Counts {
            run: self.run + o.run,
            passed: self.passed + o.passed,
            failed: self.failed + o.failed,
            skipped: self.skipped + o.skipped,
        }
    }
}

#[derive(Debug, Clone, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coords {
    /// Affine (two entries) or homogeneous (three entries), as `"p/q"`.
    Exact(Vec<String>),
    Numeric([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedPoint {
    pub name: String,
    pub coords: Coords,
}

impl NamedPoint {
    pub fn exact(name: &str, p: &RatPoint) -> Self {
        NamedPoint { name: name.into(), coords: Coords::Exact(vec![format_rat(&p.x), format_rat(&p.y)]) }
    }

    pub fn projective(name: &str, p: &ProjPoint) -> Self {
        match p.to_affine() {
            Some(a) => Self::exact(name, &a),
            None => NamedPoint { name: name.into(), coords: Coords::Exact(p.coords().iter().map(format_rat).collect()) },
        }
    }

    pub fn numeric(name: &str, p: &P2) -> Self {
        NamedPoint { name: name.into(), coords: Coords::Numeric([p.x, p.y]) }
    }
}

#[derive(Debug, Clone, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Witness {
    pub label: String,
    #[serde(default)]
    pub detail: Option<String>,
    pub points: Vec<NamedPoint>,
}

impl Witness {
    pub fn new(label: impl Into<String>, detail: Option<String>, points: Vec<NamedPoint>) -> Self {
        Witness { label: label.into(), detail, points }
    }
}

/// The only nondeterministic part of a report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigReport {
    pub suite: Suite,
    pub descriptor: String,
    pub seed: u64,
    pub depth: Option<u32>,
    pub exact: bool,
    pub counts: Counts,
    pub worst_residual: Option<f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub witnesses: Vec<Witness>,
    pub timing: Timing,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("cannot merge reports of different runs ({0})")]
pub struct MergeError(&'static str);

fn sorted_witnesses(mut w: Vec<Witness>) -> Vec<Witness> {
    w.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    w.truncate(MAX_WITNESSES);
    w
}

impl ConfigReport {
    pub fn ok(&self) -> bool {
        self.counts.failed == 0
    }

    /// Combines two shards of one run. Commutative and associative: counts
    /// add, residuals and timings take the maximum, the seed the minimum,
    /// and witnesses keep the smallest [`MAX_WITNESSES`] in sorted order.
    pub fn merge(self, other: ConfigReport) -> Result<ConfigReport, MergeError> {
        if self.suite != other.suite {
            return Err(MergeError("suite"));
        }
        if self.descriptor != other.descriptor {
            return Err(MergeError("descriptor"));
        }
        if self.depth != other.depth || self.exact != other.exact {
            return Err(MergeError("depth or mode"));
        }
        if self.tolerances != other.tolerances {
            return Err(MergeError("tolerances"));
        }
        let worst_residual = match (self.worst_residual, other.worst_residual) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let mut witnesses = self.witnesses;
        witnesses.extend(other.witnesses);
        Ok(ConfigReport {
            suite: self.suite,
            descriptor: self.descriptor,
            seed: self.seed.min(other.seed),
            depth: self.depth,
            exact: self.exact,
            counts: self.counts.add(other.counts),
            worst_residual,
            tolerances: self.tolerances,
            witnesses: sorted_witnesses(witnesses),
            timing: Timing { wall_clock_seconds: self.timing.wall_clock_seconds.max(other.timing.wall_clock_seconds) },
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// One header row and one data row; witnesses are reduced to a count.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let tol = self.tolerances.iter().map(|(k, v)| format!("{k}={v:e}")).collect::<Vec<_>>().join(";");
        w.write_record([
            "suite", "descriptor", "seed", "depth", "exact", "run", "passed", "failed", "skipped",
            "worst_residual", "tolerances", "witnesses", "wall_clock_seconds",
        ])
        .expect("in-memory write");
        w.write_record([
            self.suite.name().to_string(),
            self.descriptor.clone(),
            self.seed.to_string(),
            self.depth.map(|d| d.to_string()).unwrap_or_default(),
            self.exact.to_string(),
            self.counts.run.to_string(),
            self.counts.passed.to_string(),
            self.counts.failed.to_string(),
            self.counts.skipped.to_string(),
            self.worst_residual.map(|r| format!("{r:e}")).unwrap_or_default(),
            tol,
            self.witnesses.len().to_string(),
            format!("{:.6}", self.timing.wall_clock_seconds),
        ])
        .expect("in-memory write");
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn summary(&self) -> String {
        let c = &self.counts;
        let residual = match self.worst_residual {
            Some(r) => format!("{r:.3e}"),
            None => "n/a".into(),
        };
        format!(
            "{}: run {}, passed {}, failed {}, skipped {}, worst residual {}",
            self.suite.name(),
            c.run,
            c.passed,
            c.failed,
            c.skipped,
            residual
        )
    }
}

/// Running totals for one shard.
#[derive(Debug, Clone, Default)]
pub struct Tally {
    pub counts: Counts,
    pub worst: Option<f64>,
    pub witnesses: Vec<Witness>,
}

impl Tally {
    pub fn skip(&mut self) {
        self.counts.run += 1;
        self.counts.skipped += 1;
    }

    fn residual(&mut self, r: Option<f64>) {
        if let Some(r) = r {
            self.worst = Some(self.worst.map_or(r, |w| w.max(r)));
        }
    }

    pub fn pass(&mut self, residual: Option<f64>) {
        self.counts.run += 1;
        self.counts.passed += 1;
        self.residual(residual);
    }

    pub fn fail(&mut self, residual: Option<f64>, witness: Witness) {
        self.counts.run += 1;
        self.counts.failed += 1;
        self.residual(residual);
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(witness);
        }
    }

    /// Records a case with a residual checked against `tol`.
    pub fn check(&mut self, residual: f64, tol: f64, witness: impl FnOnce() -> Witness) {
        if residual <= tol {
            self.pass(Some(residual));
        } else {
            self.fail(Some(residual), witness());
        }
    }

    pub fn absorb(&mut self, other: Tally) {
        self.counts = self.counts.add(other.counts);
        self.residual(other.worst);
        self.witnesses.extend(other.witnesses);
    }

    pub fn witnesses_sorted(self) -> (Counts, Option<f64>, Vec<Witness>) {
        (self.counts, self.worst, sorted_witnesses(self.witnesses))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn report(seed: u64, counts: [u64; 3], worst: Option<f64>, witness: Option<&str>, secs: f64) -> ConfigReport {
        let [passed, failed, skipped] = counts;
        ConfigReport {
            suite: Suite::Psi,
            descriptor: "d".into(),
            seed,
            depth: Some(6),
            exact: false,
            counts: Counts { run: passed + failed + skipped, passed, failed, skipped },
            worst_residual: worst,
            tolerances: BTreeMap::from([("residual".to_string(), 1e-6)]),
            witnesses: witness
                .map(|l| vec![Witness::new(l, None, vec![NamedPoint::numeric("v", &P2::new(0.5, 0.25))])])
                .unwrap_or_default(),
            timing: Timing { wall_clock_seconds: secs },
        }
    }

    prop_compose! {
        fn any_report()(seed in 0u64..100, c in prop::array::uniform3(0u64..50),
                        worst in prop::option::of(0.0f64..1.0),
                        w in prop::option::of("[a-c]{1,3}"), secs in 0.0f64..5.0) -> ConfigReport {
            report(seed, c, worst, w.as_deref(), secs)
        }
    }

    proptest! {
        #[test]
        fn merge_commutes(a in any_report(), b in any_report()) {
            prop_assert_eq!(a.clone().merge(b.clone()).unwrap(), b.merge(a).unwrap());
        }

        #[test]
        fn merge_associates(a in any_report(), b in any_report(), c in any_report()) {
            let left = a.clone().merge(b.clone()).unwrap().merge(c.clone()).unwrap();
            let right = a.merge(b.merge(c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn merged_counts_balance(a in any_report(), b in any_report()) {
            let m = a.merge(b).unwrap().counts;
            prop_assert_eq!(m.passed + m.failed + m.skipped, m.run);
        }
    }

    #[test]
    fn mismatched_runs_do_not_merge() {
        let a = report(1, [1, 0, 0], None, None, 0.0);
        let mut b = a.clone();
        b.descriptor = "other".into();
        assert_eq!(a.clone().merge(b), Err(MergeError("descriptor")));
        let mut c = a.clone();
        c.tolerances.insert("residual".into(), 1.0);
        assert!(a.merge(c).is_err());
    }

    #[test]
    fn csv_has_one_row() {
        let text = report(3, [4, 1, 0], Some(2e-7), Some("x"), 0.5).to_csv();
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
        assert_eq!(rows.len(), 1);
        assert_eq!(&rows[0][0], "psi");
        assert_eq!(&rows[0][5], "5");
        assert_eq!(&rows[0][7], "1");
    }

    #[test]
    fn json_round_trip() {
        let r = report(3, [4, 1, 0], Some(2e-7), Some("x"), 0.5);
        let back: ConfigReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
