//! Plain-text mesh format.
//!
//! ```text
//! floquet-mesh 1
//! profile <json>
//! height <H>
//! target_h <h>
//! nodes <n>
//! <x1> <x2>            (n lines)
//! triangles <m>
//! <a> <b> <c>          (m lines, 0-based)
//! boundary <e>
//! <a> <b> <tag>        (e lines: surface | top | left | right)
//! pairs <p>
//! <left> <right>       (p lines)
//! ```
//!
//! Boundary tags and pairs are written for readers in other tools; on input
//! they are recomputed from the geometry and checked against the file.

use std::io::{BufRead, Write};

use super::mesh::{BoundaryTag, UnitCellMesh};
use super::profile::SurfaceProfile;
use crate::error::{Error, Result};

const MAGIC: &str = "floquet-mesh 1";

pub fn write_mesh<W: Write>(mesh: &UnitCellMesh, mut out: W) -> Result<()> {
    let profile = serde_json::to_string(mesh.profile()).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "profile {profile}")?;
    writeln!(out, "height {:e}", mesh.height())?;
    writeln!(out, "target_h {:e}", mesh.target_h())?;
    writeln!(out, "nodes {}", mesh.nodes().len())?;
    for p in mesh.nodes() {
        // {:e} round-trips f64 exactly
        writeln!(out, "{:e} {:e}", p[0], p[1])?;
    }
    writeln!(out, "triangles {}", mesh.triangles().len())?;
    for t in mesh.triangles() {
        writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(out, "boundary {}", mesh.boundary().len())?;
    for e in mesh.boundary() {
        writeln!(out, "{} {} {}", e.nodes[0], e.nodes[1], e.tag.as_str())?;
    }
    writeln!(out, "pairs {}", mesh.periodic_pairs().len())?;
    for (l, r) in mesh.periodic_pairs() {
        writeln!(out, "{l} {r}")?;
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String> {
        self.number += 1;
        match self.inner.next() {
            Some(line) => Ok(line?),
            None => Err(Error::Parse(format!(
                "unexpected end of mesh file at line {}",
                self.number
            ))),
        }
    }

    fn fail(&self, what: &str) -> Error {
        Error::Parse(format!("line {}: {what}", self.number))
    }

    fn header(&mut self, key: &str) -> Result<String> {
        let line = self.next()?;
        match line.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest.trim().to_string()),
            _ => Err(self.fail(&format!("expected `{key} ...`"))),
        }
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        let v = self.header(key)?;
        v.parse().map_err(|_| self.fail(&format!("bad {key} count")))
    }

    fn fields<T: std::str::FromStr>(&mut self, n: usize) -> Result<Vec<T>> {
        let line = self.next()?;
        let parts: Vec<T> = line
            .split_whitespace()
            .take(n)
            .map(|s| s.parse::<T>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| self.fail("malformed entry"))?;
        if parts.len() != n {
            return Err(self.fail(&format!("expected {n} fields")));
        }
        Ok(parts)
    }
}

pub fn read_mesh<R: BufRead>(input: R) -> Result<UnitCellMesh> {
    let mut lines = Lines {
        inner: input.lines(),
        number: 0,
    };
    if lines.next()?.trim() != MAGIC {
        return Err(lines.fail("not a floquet mesh file"));
    }
    let profile: SurfaceProfile =
        serde_json::from_str(&lines.header("profile")?).map_err(|e| lines.fail(&format!("bad profile: {e}")))?;
    let height: f64 = lines.header("height")?.parse().map_err(|_| lines.fail("bad height"))?;
    let target_h: f64 = lines
        .header("target_h")?
        .parse()
        .map_err(|_| lines.fail("bad target_h"))?;
    let n = lines.count("nodes")?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let v: Vec<f64> = lines.fields(2)?;
        nodes.push([v[0], v[1]]);
    }
    let m = lines.count("triangles")?;
    let mut triangles = Vec::with_capacity(m);
    for _ in 0..m {
        let v: Vec<usize> = lines.fields(3)?;
        triangles.push([v[0], v[1], v[2]]);
    }
    let e = lines.count("boundary")?;
    let mut edges = Vec::with_capacity(e);
    for _ in 0..e {
        let line = lines.next()?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(lines.fail("expected `a b tag`"));
        }
        let a: usize = parts[0].parse().map_err(|_| lines.fail("bad node index"))?;
        let b: usize = parts[1].parse().map_err(|_| lines.fail("bad node index"))?;
        edges.push(([a.min(b), a.max(b)], BoundaryTag::parse(parts[2])?));
    }
    let p = lines.count("pairs")?;
    let mut pairs = Vec::with_capacity(p);
    for _ in 0..p {
        let v: Vec<usize> = lines.fields(2)?;
        pairs.push((v[0], v[1]));
    }
    let mesh = UnitCellMesh::from_parts(profile, height, target_h, nodes, triangles)?;
    let mut derived: Vec<_> = mesh
        .boundary()
        .iter()
        .map(|e| ([e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1])], e.tag))
        .collect();
    derived.sort();
    edges.sort();
    if derived != edges {
        return Err(Error::Mesh("boundary section disagrees with the triangulation".into()));
    }
    if mesh.periodic_pairs() != pairs.as_slice() {
        return Err(Error::Mesh("pairs section disagrees with the side nodes".into()));
    }
    Ok(mesh)
}
