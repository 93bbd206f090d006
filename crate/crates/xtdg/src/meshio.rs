//! Plain-text mesh files.
//!
//! ```text
//! vertices N / triangles M
//! x1 x2                         (N rows)
//! v0 v1 v2 refedge subdomain    (M rows)
//! v0 v1 D|N                     (boundary edges)
//! speeds c0 c1 ...
//! corner x1 x2 delta radius     (optional, repeated)
//! midpoint a b m                (optional, repeated)
//! ```
//!
//! Floats are written in shortest round-trip exponent form, so a load
//! reproduces the dumped mesh exactly.

use std::fmt::Write as _;

use xtdg_core::mesh2d::{BoundaryTag, CornerSpec, Point2, SpatialMesh, Triangle};

use crate::CliError;

pub fn dump_mesh(mesh: &SpatialMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "vertices {} / triangles {}",
        mesh.vertices.len(),
        mesh.len()
    );
    for p in &mesh.vertices {
        let _ = writeln!(s, "{:e} {:e}", p.x1, p.x2);
    }
    for t in &mesh.triangles {
        let [a, b, c] = t.vertex_ids;
        let _ = writeln!(s, "{a} {b} {c} {} {}", t.refinement_edge, t.subdomain_id);
    }
    for ((a, b), tag) in mesh.boundary_edges() {
        let tag = match tag {
            BoundaryTag::Dirichlet => 'D',
            BoundaryTag::Neumann => 'N',
        };
        let _ = writeln!(s, "{a} {b} {tag}");
    }
    s.push_str("speeds");
    for c in &mesh.subdomain_speeds {
        let _ = write!(s, " {c:e}");
    }
    s.push('\n');
    for c in &mesh.corners {
        let _ = writeln!(
            s,
            "corner {:e} {:e} {:e} {:e}",
            c.location.x1, c.location.x2, c.delta, c.radius
        );
    }
    for (a, b, m) in mesh.midpoints() {
        let _ = writeln!(s, "midpoint {a} {b} {m}");
    }
    s
}

fn bad(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Mesh(format!("line {line}: {msg}"))
}

fn parse_all<T: std::str::FromStr>(line: usize, fields: &[&str]) -> Result<Vec<T>, CliError> {
    fields
        .iter()
        .map(|f| {
            f.parse()
                .map_err(|_| bad(line, format!("invalid number `{f}`")))
        })
        .collect()
}

pub fn load_mesh(text: &str) -> Result<SpatialMesh, CliError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, f)| !f.is_empty());
    let (n, header) = lines
        .next()
        .ok_or_else(|| CliError::Mesh("empty mesh file".into()))?;
    let (nv, nt) = match header.as_slice() {
        ["vertices", nv, "/", "triangles", nt] => (
            nv.parse::<usize>()
                .map_err(|_| bad(n, "invalid vertex count"))?,
            nt.parse::<usize>()
                .map_err(|_| bad(n, "invalid triangle count"))?,
        ),
        _ => return Err(bad(n, "expected `vertices N / triangles M`")),
    };
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| CliError::Mesh(format!("file ends before {what}")))
    };
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, f) = next("all vertices")?;
        let xy: Vec<f64> = parse_all(n, &f)?;
        if xy.len() != 2 {
            return Err(bad(n, "expected two coordinates"));
        }
        vertices.push(Point2::new(xy[0], xy[1]));
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (n, f) = next("all triangles")?;
        let v: Vec<usize> = parse_all(n, &f)?;
        if v.len() != 5 {
            return Err(bad(n, "expected `v0 v1 v2 refedge subdomain`"));
        }
        triangles.push(Triangle {
            vertex_ids: [v[0], v[1], v[2]],
            refinement_edge: v[3],
            subdomain_id: v[4],
            generation: 0,
        });
    }
    let (mut boundary, mut speeds, mut corners, mut midpoints) =
        (Vec::new(), None, Vec::new(), Vec::new());
    for (n, f) in lines {
        match f.as_slice() {
            ["speeds", rest @ ..] => speeds = Some(parse_all::<f64>(n, rest)?),
            ["corner", rest @ ..] => {
                let c: Vec<f64> = parse_all(n, rest)?;
                if c.len() != 4 {
                    return Err(bad(n, "expected `corner x1 x2 delta radius`"));
                }
                corners.push(CornerSpec::new(Point2::new(c[0], c[1]), c[2], c[3])?);
            }
            ["midpoint", rest @ ..] => {
                let m: Vec<usize> = parse_all(n, rest)?;
                if m.len() != 3 {
                    return Err(bad(n, "expected `midpoint a b m`"));
                }
                midpoints.push((m[0], m[1], m[2]));
            }
            [a, b, tag] => {
                let tag = match *tag {
                    "D" => BoundaryTag::Dirichlet,
                    "N" => BoundaryTag::Neumann,
                    _ => return Err(bad(n, format!("unknown boundary tag `{tag}`"))),
                };
                let ab: Vec<usize> = parse_all(n, &[a, b])?;
                boundary.push(((ab[0], ab[1]), tag));
            }
            _ => return Err(bad(n, "unrecognised line")),
        }
    }
    let speeds = speeds.ok_or_else(|| CliError::Mesh("missing `speeds` line".into()))?;
    Ok(SpatialMesh::from_parts(
        vertices, triangles, boundary, speeds, corners, midpoints,
    )?)
}
