use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::profile::SurfaceProfile;
use crate::error::{Error, Result};
use crate::fields::Point;

/// Which part of the cell boundary an edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundaryTag {
    Surface,
    Top,
    Left,
    Right,
}

impl BoundaryTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Surface => "surface",
            Self::Top => "top",
            Self::Left => "left",
            Self::Right => "right",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "surface" => Ok(Self::Surface),
            "top" => Ok(Self::Top),
            "left" => Ok(Self::Left),
            "right" => Ok(Self::Right),
            _ => Err(Error::Parse(format!("unknown boundary tag {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

/// Thresholds below which a mesh is reported as poorly shaped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    pub min_angle_deg: f64,
    pub max_edge_ratio: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            min_angle_deg: 10.0,
            max_edge_ratio: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshQuality {
    pub min_angle_deg: f64,
    pub min_edge: f64,
    pub max_edge: f64,
}

impl MeshQuality {
    pub fn edge_ratio(&self) -> f64 {
        self.max_edge / self.min_edge
    }
}

/// Triangulation of one period `[-Λ/2, Λ/2] × [p(x1), H]` of the domain.
///
/// Both side walls carry nodes; every left node has a right partner at the
/// same height, which the quasiperiodic solver identifies with it.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCellMesh {
    profile: SurfaceProfile,
    height: f64,
    target_h: f64,
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
    pairs: Vec<(usize, usize)>,
}

impl UnitCellMesh {
    /// Assembles a mesh from raw nodes and triangles, fixing orientation and
    /// deriving boundary tags and periodic pairs from the geometry.
    pub fn from_parts(
        profile: SurfaceProfile,
        height: f64,
        target_h: f64,
        nodes: Vec<Point>,
        mut triangles: Vec<[usize; 3]>,
    ) -> Result<Self> {
        for t in &mut triangles {
            if t.iter().any(|&i| i >= nodes.len()) {
                return Err(Error::Mesh(format!("triangle {t:?} references a missing node")));
            }
            let area = signed_area(&nodes, *t);
            let scale = edge_lengths(&nodes, *t).iter().fold(0.0f64, |a, &b| a.max(b));
            if area.abs() <= 1e-14 * scale * scale {
                return Err(Error::Mesh(format!("degenerate triangle {t:?}")));
            }
            if area < 0.0 {
                t.swap(1, 2);
            }
        }
        let half = 0.5 * profile.period();
        let boundary = boundary_edges(&nodes, &triangles, half, height);
        let pairs = periodic_pairs(&nodes, half)?;
        Ok(Self {
            profile,
            height,
            target_h,
            nodes,
            triangles,
            boundary,
            pairs,
        })
    }

    pub fn profile(&self) -> &SurfaceProfile {
        &self.profile
    }

    pub fn period(&self) -> f64 {
        self.profile.period()
    }

    /// Truncation height `H` of the cell.
    pub fn height(&self) -> f64 {
        self.height
    }

    /// Width requested at construction (halved by each refinement).
    pub fn target_h(&self) -> f64 {
        self.target_h
    }

    /// Actual mesh width: the longest edge.
    pub fn h(&self) -> f64 {
        self.quality().max_edge
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    /// `(left, right)` node pairs ordered by height.
    pub fn periodic_pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.nodes, self.triangles[t])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Sorted, deduplicated nodes of edges carrying `tag`.
    pub fn tagged_nodes(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary
            .iter()
            .filter(|e| e.tag == tag)
            .flat_map(|e| e.nodes)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn quality(&self) -> MeshQuality {
        let mut q = MeshQuality {
            min_angle_deg: 180.0,
            min_edge: f64::INFINITY,
            max_edge: 0.0,
        };
        for &t in &self.triangles {
            let l = edge_lengths(&self.nodes, t);
            for i in 0..3 {
                q.min_edge = q.min_edge.min(l[i]);
                q.max_edge = q.max_edge.max(l[i]);
                // angle opposite edge i by the law of cosines
                let (a, b, c) = (l[i], l[(i + 1) % 3], l[(i + 2) % 3]);
                let cos = ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0);
                q.min_angle_deg = q.min_angle_deg.min(cos.acos().to_degrees());
            }
        }
        q
    }

    /// Checks the structural invariants and returns human-readable violations.
    pub fn validate(&self, options: &MeshOptions) -> Vec<String> {
        let mut issues = Vec::new();
        let q = self.quality();
        if q.min_angle_deg < options.min_angle_deg {
            issues.push(format!(
                "minimum angle {:.2}° below {:.2}°",
                q.min_angle_deg, options.min_angle_deg
            ));
        }
        if q.edge_ratio() > options.max_edge_ratio {
            issues.push(format!(
                "edge ratio {:.2} above {:.2}",
                q.edge_ratio(),
                options.max_edge_ratio
            ));
        }
        for (t, &tri) in self.triangles.iter().enumerate() {
            if signed_area(&self.nodes, tri) <= 0.0 {
                issues.push(format!("triangle {t} is not positively oriented"));
            }
        }
        for &(l, r) in &self.pairs {
            if (self.nodes[l][1] - self.nodes[r][1]).abs() > 1e-12 {
                issues.push(format!("pair ({l}, {r}) differs in height"));
            }
        }
        let walls = self.profile.breakpoints();
        for i in self.tagged_nodes(BoundaryTag::Surface) {
            let [x1, x2] = self.nodes[i];
            let on_graph = (x2 - self.profile.eval(x1)).abs() <= 1e-12 * x2.abs().max(1.0);
            let on_wall = self.profile.is_piecewise_constant() && walls.iter().any(|&w| (w - x1).abs() <= 1e-12);
            if !on_graph && !on_wall {
                issues.push(format!("surface node {i} at ({x1}, {x2}) is off the profile"));
            }
        }
        let vertices = self.nodes.len() as i64;
        let faces = self.triangles.len() as i64;
        let interior_edges = (3 * faces - self.boundary.len() as i64) / 2;
        let edges = interior_edges + self.boundary.len() as i64;
        if vertices - edges + faces != 1 {
            issues.push(format!(
                "Euler characteristic {} instead of 1",
                vertices - edges + faces
            ));
        }
        issues
    }
}

fn signed_area(nodes: &[Point], t: [usize; 3]) -> f64 {
    let [a, b, c] = t.map(|i| nodes[i]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn edge_lengths(nodes: &[Point], t: [usize; 3]) -> [f64; 3] {
    let d = |i: usize, j: usize| {
        let (p, q) = (nodes[t[i]], nodes[t[j]]);
        (p[0] - q[0]).hypot(p[1] - q[1])
    };
    // edge i is opposite vertex i
    [d(1, 2), d(2, 0), d(0, 1)]
}

/// Edges owned by exactly one triangle, sorted for reproducibility.
fn boundary_edges(nodes: &[Point], triangles: &[[usize; 3]], half: f64, height: f64) -> Vec<BoundaryEdge> {
    let mut all: Vec<[usize; 2]> = triangles
        .iter()
        .flat_map(|t| [[t[0], t[1]], [t[1], t[2]], [t[2], t[0]]])
        .map(|[a, b]| [a.min(b), a.max(b)])
        .collect();
    all.sort_unstable();
    let mut out = Vec::new();
    let mut i = 0;
    while i < all.len() {
        let mut j = i + 1;
        while j < all.len() && all[j] == all[i] {
            j += 1;
        }
        if j - i == 1 {
            let [a, b] = all[i];
            let (p, q) = (nodes[a], nodes[b]);
            let tag = if p[1] == height && q[1] == height {
                BoundaryTag::Top
            } else if p[0] == -half && q[0] == -half {
                BoundaryTag::Left
            } else if p[0] == half && q[0] == half {
                BoundaryTag::Right
            } else {
                BoundaryTag::Surface
            };
            out.push(BoundaryEdge { nodes: [a, b], tag });
        }
        i = j;
    }
    out
}

fn periodic_pairs(nodes: &[Point], half: f64) -> Result<Vec<(usize, usize)>> {
    let side = |x: f64| {
        let mut v: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i][0] == x).collect();
        v.sort_by(|&a, &b| nodes[a][1].total_cmp(&nodes[b][1]));
        v
    };
    let left = side(-half);
    let right = side(half);
    if left.len() != right.len() || left.is_empty() {
        return Err(Error::Mesh(format!(
            "{} left and {} right boundary nodes",
            left.len(),
            right.len()
        )));
    }
    for (&l, &r) in left.iter().zip(&right) {
        if (nodes[l][1] - nodes[r][1]).abs() > 1e-12 {
            return Err(Error::Mesh(format!(
                "side nodes at heights {} and {} do not match",
                nodes[l][1], nodes[r][1]
            )));
        }
    }
    Ok(left.into_iter().zip(right).collect())
}

/// Column abscissae: cell ends and profile breakpoints, with every gap split
/// into pieces no wider than `h`.
fn column_positions(profile: &SurfaceProfile, h: f64) -> Vec<f64> {
    let half = 0.5 * profile.period();
    let mut knots = vec![-half];
    knots.extend(profile.breakpoints().into_iter().filter(|&t| t > -half && t < half));
    knots.push(half);
    let mut xs = vec![-half];
    let mut narrow = 0usize;
    for w in knots.windows(2) {
        let len = w[1] - w[0];
        if len < h {
            narrow += 1;
        }
        let n = ((len / h) - 1e-9).ceil().max(1.0) as usize;
        for i in 1..=n {
            xs.push(if i == n { w[1] } else { w[0] + len * i as f64 / n as f64 });
        }
    }
    if narrow > 0 {
        log::warn!("{narrow} profile segments are narrower than h = {h}; meshing them with one column");
    }
    xs
}

fn grid_triangles(
    ncols: usize,
    nrows: usize,
    nodes: &[Point],
    active: impl Fn(usize, usize) -> bool,
    id: impl Fn(usize, usize) -> usize,
) -> Vec<[usize; 3]> {
    let dist = |a: usize, b: usize| (nodes[a][0] - nodes[b][0]).hypot(nodes[a][1] - nodes[b][1]);
    let mut triangles = Vec::new();
    for c in 0..ncols {
        for r in 0..nrows {
            if !active(c, r) {
                continue;
            }
            let (p00, p10, p11, p01) = (id(c, r), id(c + 1, r), id(c + 1, r + 1), id(c, r + 1));
            if dist(p00, p11) <= dist(p10, p01) {
                triangles.push([p00, p10, p11]);
                triangles.push([p00, p11, p01]);
            } else {
                triangles.push([p00, p10, p01]);
                triangles.push([p10, p11, p01]);
            }
        }
    }
    triangles
}

/// Builds a mesh of width about `h` between the profile and `x2 = height`.
pub fn build_unit_cell_mesh(profile: &SurfaceProfile, height: f64, h: f64) -> Result<UnitCellMesh> {
    build_unit_cell_mesh_with(profile, height, h, &MeshOptions::default())
}

pub fn build_unit_cell_mesh_with(
    profile: &SurfaceProfile,
    height: f64,
    h: f64,
    options: &MeshOptions,
) -> Result<UnitCellMesh> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Argument(format!("mesh width must be positive, got {h}")));
    }
    if !(height > profile.max_height()) {
        return Err(Error::Domain(format!(
            "truncation height {height} must exceed the profile maximum {}",
            profile.max_height()
        )));
    }
    let mesh = if profile.is_piecewise_constant() {
        masked_grid(profile, height, h)?
    } else {
        mapped_grid(profile, height, h)?
    };
    for issue in mesh.validate(options) {
        log::warn!("mesh h = {h}: {issue}");
    }
    Ok(mesh)
}

/// Structured grid whose columns are stretched from the profile to the top.
fn mapped_grid(profile: &SurfaceProfile, height: f64, h: f64) -> Result<UnitCellMesh> {
    let xs = column_positions(profile, h);
    let ncols = xs.len() - 1;
    let mut bottoms: Vec<f64> = xs.iter().map(|&x| profile.eval(x)).collect();
    bottoms[ncols] = bottoms[0];
    let lowest = bottoms.iter().cloned().fold(f64::INFINITY, f64::min);
    let nrows = (((height - lowest) / h) - 1e-9).ceil().max(1.0) as usize;
    let mut nodes = Vec::with_capacity((ncols + 1) * (nrows + 1));
    for (&x, &b) in xs.iter().zip(&bottoms) {
        for r in 0..=nrows {
            let y = if r == nrows {
                height
            } else {
                b + (height - b) * r as f64 / nrows as f64
            };
            nodes.push([x, y]);
        }
    }
    let triangles = grid_triangles(ncols, nrows, &nodes, |_, _| true, |c, r| c * (nrows + 1) + r);
    UnitCellMesh::from_parts(profile.clone(), height, h, nodes, triangles)
}

/// Cartesian grid with the cells below a piecewise-constant profile removed;
/// the vertical jumps become surface walls.
fn masked_grid(profile: &SurfaceProfile, height: f64, h: f64) -> Result<UnitCellMesh> {
    let xs = column_positions(profile, h);
    let ncols = xs.len() - 1;
    let mut knots = profile.levels();
    knots.push(height);
    let mut ys = vec![knots[0]];
    for w in knots.windows(2) {
        let len = w[1] - w[0];
        let n = ((len / h) - 1e-9).ceil().max(1.0) as usize;
        for i in 1..=n {
            ys.push(if i == n { w[1] } else { w[0] + len * i as f64 / n as f64 });
        }
    }
    let nrows = ys.len() - 1;
    let floors: Vec<f64> = (0..ncols).map(|c| profile.eval(0.5 * (xs[c] + xs[c + 1]))).collect();
    let active = |c: usize, r: usize| ys[r] >= floors[c] - 1e-12;
    let mut index = vec![None; (ncols + 1) * (nrows + 1)];
    let mut nodes = Vec::new();
    for c in 0..ncols {
        for r in 0..nrows {
            if !active(c, r) {
                continue;
            }
            for (cc, rr) in [(c, r), (c + 1, r), (c + 1, r + 1), (c, r + 1)] {
                let slot = &mut index[cc * (nrows + 1) + rr];
                if slot.is_none() {
                    *slot = Some(nodes.len());
                    nodes.push([xs[cc], ys[rr]]);
                }
            }
        }
    }
    let triangles = grid_triangles(ncols, nrows, &nodes, active, |c, r| {
        index[c * (nrows + 1) + r].expect("corner of an active cell")
    });
    UnitCellMesh::from_parts(profile.clone(), height, h, nodes, triangles)
}

/// Red refinement: every triangle splits into four similar children.
/// Surface midpoints of smooth profiles are moved onto the curve.
pub fn refine(mesh: &UnitCellMesh) -> Result<UnitCellMesh> {
    let mut nodes = mesh.nodes.clone();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let surface: std::collections::HashSet<(usize, usize)> = mesh
        .boundary
        .iter()
        .filter(|e| e.tag == BoundaryTag::Surface)
        .map(|e| (e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1])))
        .collect();
    let project = mesh.profile.is_smooth();
    let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<Point>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoints.entry(key).or_insert_with(|| {
            let (p, q) = (nodes[key.0], nodes[key.1]);
            let mut m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            if project && surface.contains(&key) {
                m[1] = mesh.profile.eval(m[0]);
            }
            nodes.push(m);
            nodes.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = midpoint(a, b, &mut nodes);
        let bc = midpoint(b, c, &mut nodes);
        let ca = midpoint(c, a, &mut nodes);
        triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    UnitCellMesh::from_parts(mesh.profile.clone(), mesh.height, 0.5 * mesh.target_h, nodes, triangles)
}
