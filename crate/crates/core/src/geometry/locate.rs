use super::mesh::UnitCellMesh;
use crate::fields::Point;

/// Bucket grid over the cell for point-in-triangle queries.
#[derive(Debug, Clone)]
pub struct Locator {
    origin: Point,
    spacing: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl Locator {
    pub fn new(mesh: &UnitCellMesh) -> Self {
        let nodes = mesh.nodes();
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in nodes {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        // about two triangles per bucket
        let cells = (mesh.triangles().len() as f64 / 2.0).max(1.0);
        let aspect = (hi[0] - lo[0]) / (hi[1] - lo[1]);
        let nx = ((cells * aspect).sqrt().ceil() as usize).max(1);
        let ny = ((cells / aspect).sqrt().ceil() as usize).max(1);
        let spacing = [(hi[0] - lo[0]) / nx as f64, (hi[1] - lo[1]) / ny as f64];
        let mut locator = Self {
            origin: lo,
            spacing,
            dims: [nx, ny],
            buckets: vec![Vec::new(); nx * ny],
        };
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let pts = tri.map(|i| nodes[i]);
            let (x0, y0) = locator.bucket_of(
                pts.iter()
                    .fold([f64::INFINITY; 2], |a, p| [a[0].min(p[0]), a[1].min(p[1])]),
            );
            let (x1, y1) = locator.bucket_of(
                pts.iter()
                    .fold([f64::NEG_INFINITY; 2], |a, p| [a[0].max(p[0]), a[1].max(p[1])]),
            );
            for bx in x0..=x1 {
                for by in y0..=y1 {
                    locator.buckets[by * nx + bx].push(t);
                }
            }
        }
        locator
    }

    fn bucket_of(&self, p: Point) -> (usize, usize) {
        let clamp = |v: f64, n: usize| (v.floor().max(0.0) as usize).min(n - 1);
        (
            clamp((p[0] - self.origin[0]) / self.spacing[0], self.dims[0]),
            clamp((p[1] - self.origin[1]) / self.spacing[1], self.dims[1]),
        )
    }

    /// Triangle containing `p` and its barycentric coordinates, if any.
    ///
    /// Points within `1e-10` (relative) outside a triangle still count, so
    /// nodes and edges are always found.
    pub fn locate(&self, mesh: &UnitCellMesh, p: Point) -> Option<(usize, [f64; 3])> {
        self.closest(mesh, p).filter(|b| b.2 >= -1e-10).map(|(t, l, _)| (t, l))
    }

    /// Triangle in the bucket of `p` that `p` is least outside of.
    fn closest(&self, mesh: &UnitCellMesh, p: Point) -> Option<(usize, [f64; 3], f64)> {
        let (bx, by) = self.bucket_of(p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.buckets[by * self.dims[0] + bx] {
            let lambda = barycentric(mesh, t, p);
            let worst = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
            if best.is_none_or(|b| worst > b.2) {
                best = Some((t, lambda, worst));
            }
        }
        best
    }

    /// Linear interpolation of nodal `values` at `p`.
    pub fn interpolate<T>(&self, mesh: &UnitCellMesh, values: &[T], p: Point) -> Option<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let (t, l) = self.locate(mesh, p)?;
        let tri = mesh.triangles()[t];
        Some(values[tri[0]] * l[0] + values[tri[1]] * l[1] + values[tri[2]] * l[2])
    }

    /// Like [`Locator::interpolate`], but points slightly outside the mesh (a
    /// curved surface seen from a coarser polygon) are extrapolated linearly
    /// from the nearest triangle of their bucket.
    pub fn extrapolate<T>(&self, mesh: &UnitCellMesh, values: &[T], p: Point) -> Option<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let (t, l, _) = self.closest(mesh, p)?;
        let tri = mesh.triangles()[t];
        Some(values[tri[0]] * l[0] + values[tri[1]] * l[1] + values[tri[2]] * l[2])
    }
}

fn barycentric(mesh: &UnitCellMesh, t: usize, p: Point) -> [f64; 3] {
    let [a, b, c] = mesh.triangles()[t].map(|i| mesh.nodes()[i]);
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
    let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
    [1.0 - l1 - l2, l1, l2]
}
