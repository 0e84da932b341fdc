use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use super::{MultipatchGeometry, NurbsPatch};
use crate::error::{Error, Result};
use crate::splines::KnotVector;

const HEADER: &str = "nurbs-multipatch v1";

/// Serializes a geometry. Floats use Rust's shortest round-trip formatting,
/// so reading the text back reproduces every bit.
pub fn write_geometry(geometry: &MultipatchGeometry) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    for (id, patch) in geometry.patches().iter().enumerate() {
        let (p1, p2) = patch.degrees();
        writeln!(out, "patch {id}").unwrap();
        writeln!(out, "degrees {p1} {p2}").unwrap();
        for (name, kv) in [("knots_u", patch.knots_u()), ("knots_v", patch.knots_v())] {
            let knots: Vec<String> = kv.knots().iter().map(|k| format!("{k:?}")).collect();
            writeln!(out, "{name} {}", knots.join(" ")).unwrap();
        }
        writeln!(out, "cpts").unwrap();
        for (c, w) in patch.control_points().iter().zip(patch.weights()) {
            writeln!(out, "{:?} {:?} {:?} {:?}", c.x, c.y, c.z, w).unwrap();
        }
    }
    out
}

pub fn save_geometry(geometry: &MultipatchGeometry, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_geometry(geometry))?;
    Ok(())
}

pub fn load_geometry(path: impl AsRef<Path>) -> Result<MultipatchGeometry> {
    parse_geometry(&std::fs::read_to_string(path)?)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_floats(line: usize, field: &str, tokens: &[&str]) -> Result<Vec<f64>> {
    tokens
        .iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| parse_err(line, format!("{field}: '{t}' is not a number")))
        })
        .collect()
}

/// Lines with their 1-based numbers, comments and blank lines removed.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then(|| (i + 1, l.split_whitespace().collect()))
    })
}

pub fn parse_geometry(text: &str) -> Result<MultipatchGeometry> {
    let mut lines = content_lines(text).peekable();
    match lines.next() {
        Some((_, t)) if t.join(" ") == HEADER => {}
        Some((n, _)) => return Err(parse_err(n, format!("expected header '{HEADER}'"))),
        None => return Err(parse_err(0, "empty geometry file")),
    }

    let mut patches = Vec::new();
    while let Some((n, tokens)) = lines.next() {
        if tokens[0] != "patch" {
            return Err(parse_err(n, format!("expected 'patch', found '{}'", tokens[0])));
        }
        let mut expect = |key: &str| -> Result<(usize, Vec<&str>)> {
            match lines.next() {
                Some((m, t)) if t[0] == key => Ok((m, t[1..].to_vec())),
                Some((m, t)) => Err(parse_err(m, format!("expected '{key}', found '{}'", t[0]))),
                None => Err(parse_err(n, format!("patch truncated before '{key}'"))),
            }
        };
        let (m, deg) = expect("degrees")?;
        let deg = parse_floats(m, "degrees", &deg)?;
        if deg.len() != 2 || deg.iter().any(|d| d.fract() != 0.0 || *d < 0.0) {
            return Err(parse_err(m, "degrees: expected two non-negative integers"));
        }
        let mut knots = Vec::new();
        for (key, d) in [("knots_u", deg[0]), ("knots_v", deg[1])] {
            let (m, t) = expect(key)?;
            let k = parse_floats(m, key, &t)?;
            knots.push(
                KnotVector::new(d as usize, k).map_err(|e| parse_err(m, format!("{key}: {e}")))?,
            );
        }
        let (m, _) = expect("cpts")?;
        let count = knots[0].len() * knots[1].len();
        let mut cps = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        while cps.len() < count {
            match lines.peek() {
                Some((_, t)) if t[0] != "patch" => {
                    let (l, t) = lines.next().unwrap();
                    let v = parse_floats(l, "cpts", &t)?;
                    if v.len() != 4 {
                        return Err(parse_err(l, "cpts: expected 'x y z w'"));
                    }
                    if !(v[3] > 0.0) {
                        return Err(parse_err(l, format!("cpts: weight {} is not positive", v[3])));
                    }
                    cps.push(Vector3::new(v[0], v[1], v[2]));
                    weights.push(v[3]);
                }
                _ => break,
            }
        }
        if cps.len() != count {
            return Err(parse_err(
                m,
                format!("cpts: found {} control points, expected {count}", cps.len()),
            ));
        }
        if let Some((l, _)) = lines.peek().filter(|(_, t)| t[0] != "patch") {
            return Err(parse_err(*l, format!("cpts: more than {count} control points")));
        }
        let [ku, kv]: [KnotVector; 2] = knots.try_into().unwrap();
        patches.push(NurbsPatch::new(ku, kv, cps, weights).map_err(|e| parse_err(n, e.to_string()))?);
    }
    if patches.is_empty() {
        return Err(parse_err(0, "no patches"));
    }
    MultipatchGeometry::new(patches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{builtin_fichera, builtin_sphere};

    #[test]
    fn round_trip_is_lossless() {
        for g in [builtin_sphere(), builtin_fichera()] {
            let h = parse_geometry(&write_geometry(&g)).unwrap();
            assert_eq!(h.patches(), g.patches());
            assert_eq!(h.interfaces(), g.interfaces());
            for (a, b) in g.patches().iter().zip(h.patches()) {
                for (u, v) in [(0.1, 0.2), (0.77, 0.5), (1.0, 0.0)] {
                    assert!((a.eval(u, v) - b.eval(u, v)).norm() <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sphere.geo");
        save_geometry(&builtin_sphere(), &path).unwrap();
        assert_eq!(load_geometry(&path).unwrap().patches(), builtin_sphere().patches());
    }

    const SQUARE: &str = "nurbs-multipatch v1
# unit square
patch 0
degrees 1 1
knots_u 0 0 1 1
knots_v 0 0 1 1
cpts
0 0 0 1
0 1 0 1
1 0 0 1
1 1 0 1
";

    #[test]
    fn parses_comments_and_patches() {
        let g = parse_geometry(SQUARE).unwrap();
        assert_eq!(g.num_patches(), 1);
        assert_eq!(g.boundary_edges().len(), 4);
    }

    #[test]
    fn rejects_zero_weight() {
        let bad = SQUARE.replace("1 1 0 1", "1 1 0 0");
        let err = parse_geometry(&bad).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 11, .. }), "{err}");
    }

    #[test]
    fn rejects_shape_mismatch() {
        let short = SQUARE.replace("1 1 0 1\n", "");
        assert!(matches!(parse_geometry(&short), Err(Error::Parse { .. })));
        let long = format!("{SQUARE}2 2 0 1\n");
        assert!(matches!(parse_geometry(&long), Err(Error::Parse { line: 12, .. })));
    }

    #[test]
    fn rejects_bad_header() {
        assert!(parse_geometry("nurbs v0\n").is_err());
        assert!(parse_geometry("").is_err());
    }
}
