//! Cartesian grids masked to a centred disk, and the scalar fields living on them.
//!
//! Node `(i, j)` sits at `x = -L + i·h`, `y = -L + j·h` with `h = 2L/(N-1)`;
//! values are stored row-major (`index = j·N + i`). `N` is odd so the origin
//! is a node. The disk has radius `L`, so the default `L = 1` grid carries
//! the unit disk.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::disk_solver::poisson::Factorization;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeTag {
    Interior,
    BoundaryRing,
    Exterior,
}

impl NodeTag {
    pub fn in_disk(self) -> bool {
        !matches!(self, NodeTag::Exterior)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeTag::Interior => "interior",
            NodeTag::BoundaryRing => "boundary-ring",
            NodeTag::Exterior => "exterior",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    #[serde(default = "unit_half_width")]
    pub half_width: f64,
}

fn unit_half_width() -> f64 {
    1.0
}

impl GridSpec {
    pub fn unit(n: usize) -> Self {
        GridSpec { n, half_width: 1.0 }
    }
}

/// Geometry of a masked grid. Shared between fields through an `Arc`; the
/// Poisson factorization is computed on first use and cached here.
#[derive(Debug)]
pub struct DiskGrid {
    n: usize,
    half_width: f64,
    spacing: f64,
    tags: Vec<NodeTag>,
    ring: Vec<usize>,
    interior: Vec<usize>,
    /// For exterior nodes the nearest ring node, for disk nodes the node itself.
    source: Vec<usize>,
    pub(crate) poisson: OnceLock<Factorization>,
}

impl DiskGrid {
    pub fn new(spec: GridSpec) -> Result<Arc<Self>> {
        let GridSpec { n, half_width } = spec;
        if n < 5 || n % 2 == 0 {
            return Err(Error::InvalidParameters(format!(
                "grid size N = {n} must be odd and at least 5"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParameters(format!(
                "half width {half_width} must be positive"
            )));
        }
        let spacing = 2.0 * half_width / (n - 1) as f64;
        let radius2 = half_width * half_width * (1.0 + 1e-12);
        let coord = |i: usize| -half_width + i as f64 * spacing;
        let inside = |i: isize, j: isize| {
            if i < 0 || j < 0 || i >= n as isize || j >= n as isize {
                return false;
            }
            let (x, y) = (coord(i as usize), coord(j as usize));
            x * x + y * y <= radius2
        };
        let mut tags = vec![NodeTag::Exterior; n * n];
        let mut ring = Vec::new();
        let mut interior = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let (ii, jj) = (i as isize, j as isize);
                if !inside(ii, jj) {
                    continue;
                }
                let idx = j * n + i;
                let all_in = inside(ii - 1, jj) && inside(ii + 1, jj) && inside(ii, jj - 1) && inside(ii, jj + 1);
                if all_in {
                    tags[idx] = NodeTag::Interior;
                    interior.push(idx);
                } else {
                    tags[idx] = NodeTag::BoundaryRing;
                    ring.push(idx);
                }
            }
        }
        let mut source: Vec<usize> = (0..n * n).collect();
        for j in 0..n {
            for i in 0..n {
                let idx = j * n + i;
                if tags[idx] != NodeTag::Exterior {
                    continue;
                }
                let (x, y) = (coord(i), coord(j));
                let r = x.hypot(y);
                let (bx, by) = (x * half_width / r, y * half_width / r);
                let ci = ((bx + half_width) / spacing).round() as isize;
                let cj = ((by + half_width) / spacing).round() as isize;
                let mut best = (f64::INFINITY, usize::MAX);
                for dj in -3..=3 {
                    for di in -3..=3 {
                        let (a, b) = (ci + di, cj + dj);
                        if a < 0 || b < 0 || a >= n as isize || b >= n as isize {
                            continue;
                        }
                        let cand = b as usize * n + a as usize;
                        if tags[cand] != NodeTag::BoundaryRing {
                            continue;
                        }
                        let d = (coord(a as usize) - x).hypot(coord(b as usize) - y);
                        if d < best.0 {
                            best = (d, cand);
                        }
                    }
                }
                if best.1 == usize::MAX {
                    // far corner of a coarse grid: fall back to a full scan
                    for &cand in &ring {
                        let d = (coord(cand % n) - x).hypot(coord(cand / n) - y);
                        if d < best.0 {
                            best = (d, cand);
                        }
                    }
                }
                source[idx] = best.1;
            }
        }
        Ok(Arc::new(DiskGrid {
            n,
            half_width,
            spacing,
            tags,
            ring,
            interior,
            source,
            poisson: OnceLock::new(),
        }))
    }

    pub fn unit(n: usize) -> Result<Arc<Self>> {
        DiskGrid::new(GridSpec::unit(n))
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            n: self.n,
            half_width: self.half_width,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Radius of the masked disk (equal to the half width).
    pub fn radius(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn tag(&self, idx: usize) -> NodeTag {
        self.tags[idx]
    }

    pub fn tags(&self) -> &[NodeTag] {
        &self.tags
    }

    pub fn ring(&self) -> &[usize] {
        &self.ring
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing
    }

    pub fn position(&self, idx: usize) -> (f64, f64) {
        (self.coord(idx % self.n), self.coord(idx / self.n))
    }

    /// Index of the node at the origin.
    pub fn center_index(&self) -> usize {
        let c = self.n / 2;
        self.index(c, c)
    }

    /// Area covered by the disk nodes, `h²·#(interior ∪ ring)`.
    pub fn mask_area(&self) -> f64 {
        (self.interior.len() + self.ring.len()) as f64 * self.cell_area()
    }

    /// Node index `(i, j)` coinciding with `(x, y)` up to `1e-9·h`, if any.
    pub fn node_at(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fi = (x + self.half_width) / self.spacing;
        let fj = (y + self.half_width) / self.spacing;
        let (ri, rj) = (fi.round(), fj.round());
        if (fi - ri).abs() > 1e-9 || (fj - rj).abs() > 1e-9 {
            return None;
        }
        if ri < 0.0 || rj < 0.0 || ri >= self.n as f64 || rj >= self.n as f64 {
            return None;
        }
        Some((ri as usize, rj as usize))
    }
}

/// Values on the ring nodes of a grid, in the grid's ring order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub values: Vec<f64>,
}

impl BoundaryTrace {
    pub fn from_fn(grid: &DiskGrid, g: impl Fn(f64, f64) -> f64) -> Self {
        BoundaryTrace {
            values: grid
                .ring()
                .iter()
                .map(|&idx| {
                    let (x, y) = grid.position(idx);
                    g(x, y)
                })
                .collect(),
        }
    }

    pub fn constant(grid: &DiskGrid, c: f64) -> Self {
        BoundaryTrace {
            values: vec![c; grid.ring().len()],
        }
    }

    /// Shift every ring value by `-kappa`.
    pub fn shifted(&self, kappa: f64) -> Self {
        BoundaryTrace {
            values: self.values.iter().map(|v| v - kappa).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone)]
pub struct GridField {
    grid: Arc<DiskGrid>,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: &Arc<DiskGrid>) -> Self {
        GridField {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len()],
        }
    }

    /// Sample `f` at every disk node; exterior nodes copy their nearest ring node.
    pub fn from_fn(grid: &Arc<DiskGrid>, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = vec![0.0; grid.len()];
        for (idx, v) in values.iter_mut().enumerate() {
            if grid.tag(idx).in_disk() {
                let (x, y) = grid.position(idx);
                *v = f(x, y);
            }
        }
        let mut field = GridField {
            grid: Arc::clone(grid),
            values,
        };
        field.fill_exterior();
        field
    }

    /// Takes raw node values; exterior entries are overwritten.
    pub fn from_values(grid: &Arc<DiskGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let mut field = GridField {
            grid: Arc::clone(grid),
            values,
        };
        field.fill_exterior();
        Ok(field)
    }

    /// Wraps values verbatim, exterior entries included.
    pub(crate) fn from_raw(grid: &Arc<DiskGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        GridField {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access to the raw values. Callers editing ring nodes should
    /// finish with [`GridField::fill_exterior`].
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn at_origin(&self) -> f64 {
        self.values[self.grid.center_index()]
    }

    pub fn fill_exterior(&mut self) {
        for idx in 0..self.values.len() {
            let src = self.grid.source[idx];
            if src != idx {
                self.values[idx] = self.values[src];
            }
        }
    }

    pub fn trace(&self) -> BoundaryTrace {
        BoundaryTrace {
            values: self.grid.ring().iter().map(|&i| self.values[i]).collect(),
        }
    }

    pub fn set_trace(&mut self, trace: &BoundaryTrace) -> Result<()> {
        if trace.values.len() != self.grid.ring().len() {
            return Err(Error::GridMismatch(format!(
                "trace of length {} for {} ring nodes",
                trace.values.len(),
                self.grid.ring().len()
            )));
        }
        for (&idx, &v) in self.grid.ring().iter().zip(trace.values.iter()) {
            self.values[idx] = v;
        }
        self.fill_exterior();
        Ok(())
    }

    pub fn same_grid(&self, other: &GridField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.spec() == other.grid.spec()
    }

    /// Sup-norm of the difference over disk nodes.
    pub fn sup_diff(&self, other: &GridField) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .zip(self.grid.tags().iter())
            .filter(|(_, t)| t.in_disk())
            .map(|((a, b), _)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.tags().iter())
            .filter(|(_, t)| t.in_disk())
            .map(|(a, _)| a.abs())
            .fold(0.0, f64::max)
    }

    /// Add a constant to every node.
    pub fn shift(&mut self, c: f64) {
        self.values.iter_mut().for_each(|v| *v += c);
    }

    /// Bilinear interpolation; points outside the array are clamped to it.
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        let n = self.grid.n;
        let h = self.grid.spacing;
        let l = self.grid.half_width;
        let locate = |z: f64| {
            let f = ((z + l) / h).clamp(0.0, (n - 1) as f64);
            let i = (f.floor() as usize).min(n - 2);
            (i, f - i as f64)
        };
        let (i, tx) = locate(x);
        let (j, ty) = locate(y);
        let v = &self.values;
        let k = j * n + i;
        let bottom = v[k] + tx * (v[k + 1] - v[k]);
        let top = v[k + n] + tx * (v[k + n + 1] - v[k + n]);
        bottom + ty * (top - bottom)
    }

    /// Tensor-product cubic Lagrange interpolation on the 4×4 block of nodes
    /// around `(x, y)` (fourth-order accurate for smooth fields). The block is
    /// shifted inwards next to the array edge; points outside are clamped.
    pub fn interpolate_cubic(&self, x: f64, y: f64) -> f64 {
        let n = self.grid.n;
        if n < 4 {
            return self.interpolate(x, y);
        }
        let h = self.grid.spacing;
        let l = self.grid.half_width;
        let stencil = |z: f64| {
            let f = ((z + l) / h).clamp(0.0, (n - 1) as f64);
            let start = (f.floor() as usize).saturating_sub(1).min(n - 4);
            (start, lagrange4(f - start as f64))
        };
        let (i0, wx) = stencil(x);
        let (j0, wy) = stencil(y);
        let mut total = 0.0;
        for (b, wyb) in wy.iter().enumerate() {
            let row = &self.values[(j0 + b) * n + i0..(j0 + b) * n + i0 + 4];
            let line: f64 = row.iter().zip(&wx).map(|(v, w)| v * w).sum();
            total += wyb * line;
        }
        total
    }

    /// Centred-difference gradient at node `(i, j)`; one-sided at the array edge.
    pub fn gradient_at(&self, i: usize, j: usize) -> (f64, f64) {
        let n = self.grid.n;
        let h = self.grid.spacing;
        let diff = |lo: usize, hi: usize, lo_val: f64, hi_val: f64| (hi_val - lo_val) / ((hi - lo) as f64 * h);
        let (il, ih) = (i.saturating_sub(1), (i + 1).min(n - 1));
        let (jl, jh) = (j.saturating_sub(1), (j + 1).min(n - 1));
        (
            diff(il, ih, self.get(il, j), self.get(ih, j)),
            diff(jl, jh, self.get(i, jl), self.get(i, jh)),
        )
    }

    /// CSV with columns `x, y, mask, value`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["x", "y", "mask", "value"])?;
        for (idx, &v) in self.values.iter().enumerate() {
            let (x, y) = self.grid.position(idx);
            out.write_record([
                format!("{x:e}"),
                format!("{y:e}"),
                self.grid.tag(idx).as_str().to_string(),
                format!("{v:e}"),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Binary dump: `N` as little-endian u64, spacing as f64, then the values
    /// row-major as little-endian f64.
    pub fn write_binary<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(&(self.grid.n as u64).to_le_bytes())?;
        writer.write_all(&self.grid.spacing.to_le_bytes())?;
        for v in &self.values {
            writer.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut reader: R) -> Result<Self> {
        let mut word = [0u8; 8];
        reader.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        reader.read_exact(&mut word)?;
        let spacing = f64::from_le_bytes(word);
        if !(5..=1 << 16).contains(&n) || spacing.is_nan() || spacing <= 0.0 {
            return Err(Error::Parse(format!("bad grid header N = {n}, spacing = {spacing}")));
        }
        let grid = DiskGrid::new(GridSpec {
            n,
            half_width: spacing * (n - 1) as f64 / 2.0,
        })?;
        let mut values = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            reader.read_exact(&mut word)?;
            values.push(f64::from_le_bytes(word));
        }
        Ok(GridField { grid, values })
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_binary(std::io::BufWriter::new(file))
    }

    pub fn load_binary(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        GridField::read_binary(std::io::BufReader::new(file))
    }
}

/// Lagrange weights of the nodes `0, 1, 2, 3` at position `t`.
fn lagrange4(t: f64) -> [f64; 4] {
    let (a, b, c, d) = (t, t - 1.0, t - 2.0, t - 3.0);
    [
        -b * c * d / 6.0,
        a * c * d / 2.0,
        -a * b * d / 2.0,
        a * b * c / 6.0,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_partitions_nodes() {
        let grid = DiskGrid::unit(33).unwrap();
        let disk = grid.interior().len() + grid.ring().len();
        let ext = grid.tags().iter().filter(|t| **t == NodeTag::Exterior).count();
        assert_eq!(disk + ext, grid.len());
        assert_eq!(grid.tag(grid.center_index()), NodeTag::Interior);
        // the four extreme points of the unit circle are nodes on the ring
        assert_eq!(grid.tag(grid.index(32, 16)), NodeTag::BoundaryRing);
        assert_eq!(grid.tag(grid.index(16, 0)), NodeTag::BoundaryRing);
        // every neighbour of an interior node lies in the disk
        for &idx in grid.interior() {
            for nb in [idx - 1, idx + 1, idx - 33, idx + 33] {
                assert!(grid.tag(nb).in_disk());
            }
        }
        assert!((grid.mask_area() - std::f64::consts::PI).abs() < 0.1);
    }

    #[test]
    fn rejects_even_sizes() {
        assert!(DiskGrid::unit(64).is_err());
        assert!(DiskGrid::unit(3).is_err());
    }

    #[test]
    fn exterior_copies_nearest_ring() {
        let grid = DiskGrid::unit(17).unwrap();
        let field = GridField::from_fn(&grid, |x, y| x + 2.0 * y);
        for idx in 0..grid.len() {
            if grid.tag(idx) == NodeTag::Exterior {
                let src = grid.source[idx];
                assert_eq!(grid.tag(src), NodeTag::BoundaryRing);
                assert_eq!(field.values()[idx], field.values()[src]);
                let (x, y) = grid.position(idx);
                let (sx, sy) = grid.position(src);
                let d = (x - sx).hypot(y - sy);
                for &r in grid.ring() {
                    let (rx, ry) = grid.position(r);
                    assert!(d <= (x - rx).hypot(y - ry) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn bilinear_is_exact_on_bilinear_functions() {
        let grid = DiskGrid::unit(21).unwrap();
        let f = |x: f64, y: f64| 1.0 + 2.0 * x - y + 0.5 * x * y;
        let field = GridField::from_fn(&grid, f);
        for &(x, y) in &[(0.0, 0.0), (0.123, -0.41), (-0.5, 0.33), (0.7, 0.05)] {
            assert!((field.interpolate(x, y) - f(x, y)).abs() < 1e-13);
        }
    }

    #[test]
    fn cubic_is_exact_on_bicubic_functions() {
        let grid = DiskGrid::unit(21).unwrap();
        let f = |x: f64, y: f64| 1.0 + x * x * x - 2.0 * x * y * y + 0.3 * x * x * y * y * y;
        let field = GridField::from_fn(&grid, f);
        for &(x, y) in &[(0.0, 0.0), (0.123, -0.41), (-0.5, 0.33), (0.55, 0.05)] {
            assert!((field.interpolate_cubic(x, y) - f(x, y)).abs() < 1e-13);
        }
    }

    #[test]
    fn binary_round_trip() {
        let grid = DiskGrid::unit(9).unwrap();
        let field = GridField::from_fn(&grid, |x, y| x * y - 0.25);
        let mut bytes = Vec::new();
        field.write_binary(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 16 + 8 * 81);
        let back = GridField::read_binary(bytes.as_slice()).unwrap();
        assert_eq!(back.values(), field.values());
        assert_eq!(back.grid().spec(), grid.spec());
        assert!(GridField::read_binary(&bytes[..20]).is_err());
    }

    #[test]
    fn csv_has_header_and_one_row_per_node() {
        let grid = DiskGrid::unit(5).unwrap();
        let field = GridField::from_fn(&grid, |x, _| x);
        let mut out = Vec::new();
        field.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "x,y,mask,value");
        assert_eq!(lines.len(), 26);
    }

    #[test]
    fn node_lookup() {
        let grid = DiskGrid::unit(9).unwrap();
        assert_eq!(grid.node_at(0.0, 0.0), Some((4, 4)));
        assert_eq!(grid.node_at(0.25, -0.5), Some((5, 2)));
        assert_eq!(grid.node_at(0.1, 0.0), None);
    }
}
