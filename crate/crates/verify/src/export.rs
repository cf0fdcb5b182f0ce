//! Net export as JSON (label to coordinates) and CSV.

use serde_json::{json, Map, Value};
use synthgeom::body::P2;
use synthgeom::constructions::HarmonicNet;
use synthgeom::rat::{format_rat, RatPoint};

fn json_of<P: Clone>(net: &HarmonicNet<P>, coords: impl Fn(&P) -> Value) -> String {
    let points: Map<String, Value> = net.entries().map(|(l, p)| (l.to_string(), coords(p))).collect();
    let doc = json!({ "depth": net.depth(), "points": points });
    let mut s = serde_json::to_string_pretty(&doc).expect("net serializes");
    s.push('\n');
    s
}

fn csv_of<P: Clone>(net: &HarmonicNet<P>, coords: impl Fn(&P) -> [String; 2]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "m", "n", "k", "x", "y"]).expect("in-memory write");
    for (l, p) in net.entries() {
        let [x, y] = coords(p);
        w.write_record([l.to_string(), l.m.to_string(), l.n.to_string(), l.k.to_string(), x, y])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub fn net_json_exact(net: &HarmonicNet<RatPoint>) -> String {
    json_of(net, |p| json!([format_rat(&p.x), format_rat(&p.y)]))
}

pub fn net_json_numeric(net: &HarmonicNet<P2>) -> String {
    json_of(net, |p| json!([p.x, p.y]))
}

pub fn net_csv_exact(net: &HarmonicNet<RatPoint>) -> String {
    csv_of(net, |p| [format_rat(&p.x), format_rat(&p.y)])
}

pub fn net_csv_numeric(net: &HarmonicNet<P2>) -> String {
    csv_of(net, |p| [format!("{:e}", p.x), format!("{:e}", p.y)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use synthgeom::constructions::{build_harmonic_net, BaseQuadrilateral, ExactEuclidean};

    #[test]
    fn exact_net_exports() {
        let net = build_harmonic_net(&ExactEuclidean, &BaseQuadrilateral::<RatPoint>::unit_square(), 1).unwrap();
        let v: Value = serde_json::from_str(&net_json_exact(&net)).unwrap();
        assert_eq!(v["points"].as_object().unwrap().len(), 9);
        assert_eq!(v["points"]["(1/2, 1/2)"], json!(["1/2", "1/2"]));
        let text = net_csv_exact(&net);
        let rows: Vec<_> = csv::Reader::from_reader(text.as_bytes()).records().map(Result::unwrap).collect();
        assert_eq!(rows.len(), 9);
        assert_eq!(&rows[4][0], "(1/2, 1/2)");
        assert_eq!(&rows[4][4], "1/2");
    }
}
