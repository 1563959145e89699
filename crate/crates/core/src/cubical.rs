//! Sublevel-set filtered cubical complexes on pixel grids, with torus
//! identification and mask support, and their persistence diagrams.
//!
//! Pixels are the top-dimensional cells and carry the field values; every
//! edge and vertex takes the minimum over its incident masked-in pixels, so
//! the complex at threshold `t` is exactly the union of closed pixels with
//! value `<= t`. Masked-out pixels, and cells all of whose incident pixels
//! are masked out, are absent from the complex entirely.

use crate::diagram::{DiagramSet, PersistencePoint};
use crate::dsu::DisjointSets;
use crate::field::{Boundary, GridField};
use crate::reduce::{self, FilteredComplex};

/// All cells of the complex with their filtration values, in a fixed
/// geometric enumeration (vertices, horizontal edges, vertical edges,
/// squares; row-major within each kind).
pub struct CubicalFiltration {
    dims: Vec<u8>,
    values: Vec<f64>,
    /// Facets by geometric id, mod-2 cancelled under torus identification.
    faces: Vec<Vec<u32>>,
}

/// Cell kind enumeration used during construction.
#[derive(Clone, Copy)]
enum Kind {
    Vertex,
    HEdge,
    VEdge,
    Square,
}

struct GridGeometry<'a> {
    field: &'a GridField,
    nx: usize,
    ny: usize,
    torus: bool,
}

impl<'a> GridGeometry<'a> {
    fn new(field: &'a GridField) -> Self {
        GridGeometry {
            field,
            nx: field.nx(),
            ny: field.ny(),
            torus: field.boundary() == Boundary::Torus,
        }
    }

    /// Lattice extent for a cell kind: on a torus every kind has nx*ny slots,
    /// on a bounded grid vertices and edges spill one past the pixels.
    fn extent(&self, kind: Kind) -> (usize, usize) {
        if self.torus {
            return (self.nx, self.ny);
        }
        match kind {
            Kind::Vertex => (self.nx + 1, self.ny + 1),
            Kind::HEdge => (self.nx, self.ny + 1),
            Kind::VEdge => (self.nx + 1, self.ny),
            Kind::Square => (self.nx, self.ny),
        }
    }

    /// Minimum value over the masked-in pixels incident to the cell, or None
    /// when every incident pixel is masked out or off-grid.
    fn cell_value(&self, kind: Kind, i: usize, j: usize) -> Option<f64> {
        let (i, j) = (i as isize, j as isize);
        let candidates: &[(isize, isize)] = match kind {
            Kind::Square => &[(i, j)],
            Kind::HEdge => &[(i, j), (i, j - 1)],
            Kind::VEdge => &[(i, j), (i - 1, j)],
            Kind::Vertex => &[(i, j), (i - 1, j), (i, j - 1), (i - 1, j - 1)],
        };
        let mut best: Option<f64> = None;
        for &(pi, pj) in candidates {
            let Some((pi, pj)) = self.pixel(pi, pj) else {
                continue;
            };
            if !self.field.in_domain(pi, pj) {
                continue;
            }
            let v = self.field.value(pi, pj);
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
        best
    }

    /// Resolves a pixel coordinate, wrapping on the torus.
    fn pixel(&self, i: isize, j: isize) -> Option<(usize, usize)> {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        if self.torus {
            Some((i.rem_euclid(nx) as usize, j.rem_euclid(ny) as usize))
        } else if i >= 0 && i < nx && j >= 0 && j < ny {
            Some((i as usize, j as usize))
        } else {
            None
        }
    }

    /// Lattice coordinate of a vertex/edge slot, wrapping on the torus.
    fn slot(&self, kind: Kind, i: usize, j: usize) -> (usize, usize) {
        if self.torus {
            (i % self.nx, j % self.ny)
        } else {
            let (ex, ey) = self.extent(kind);
            debug_assert!(i < ex && j < ey);
            (i, j)
        }
    }
}

/// Builds the filtered cubical complex of a field.
pub fn build_filtration(field: &GridField) -> CubicalFiltration {
    let geom = GridGeometry::new(field);
    let kinds = [Kind::Vertex, Kind::HEdge, Kind::VEdge, Kind::Square];

    // First pass: assign ids to present cells, kind by kind, row-major.
    let mut slot_ids: [Vec<u32>; 4] = Default::default();
    let mut dims = Vec::new();
    let mut values = Vec::new();
    let mut coords = Vec::new();
    for (k, &kind) in kinds.iter().enumerate() {
        let (ex, ey) = geom.extent(kind);
        slot_ids[k] = vec![u32::MAX; ex * ey];
        for j in 0..ey {
            for i in 0..ex {
                if let Some(v) = geom.cell_value(kind, i, j) {
                    slot_ids[k][j * ex + i] = dims.len() as u32;
                    dims.push(k.min(3) as u8);
                    values.push(v);
                    coords.push((k, i, j));
                }
            }
        }
    }
    // Dimensions: kinds 1 and 2 are both edges.
    for d in &mut dims {
        *d = match *d {
            0 => 0,
            1 | 2 => 1,
            _ => 2,
        };
    }

    let id_of = |kind_idx: usize, kind: Kind, i: usize, j: usize| -> u32 {
        let (si, sj) = geom.slot(kind, i, j);
        let (ex, _) = geom.extent(kind);
        slot_ids[kind_idx][sj * ex + si]
    };

    // Second pass: facets with mod-2 cancellation of identified cells.
    let mut faces = vec![Vec::new(); dims.len()];
    for (cell, &(k, i, j)) in coords.iter().enumerate() {
        let mut fs: Vec<u32> = match kinds[k] {
            Kind::Vertex => Vec::new(),
            Kind::HEdge => vec![
                id_of(0, Kind::Vertex, i, j),
                id_of(0, Kind::Vertex, i + 1, j),
            ],
            Kind::VEdge => vec![
                id_of(0, Kind::Vertex, i, j),
                id_of(0, Kind::Vertex, i, j + 1),
            ],
            Kind::Square => vec![
                id_of(1, Kind::HEdge, i, j),
                id_of(1, Kind::HEdge, i, j + 1),
                id_of(2, Kind::VEdge, i, j),
                id_of(2, Kind::VEdge, i + 1, j),
            ],
        };
        debug_assert!(fs.iter().all(|&f| f != u32::MAX));
        fs.sort_unstable();
        // identified faces appear twice and cancel over GF(2)
        let mut cancelled = Vec::with_capacity(fs.len());
        let mut idx = 0;
        while idx < fs.len() {
            if idx + 1 < fs.len() && fs[idx] == fs[idx + 1] {
                idx += 2;
            } else {
                cancelled.push(fs[idx]);
                idx += 1;
            }
        }
        faces[cell] = cancelled;
    }

    CubicalFiltration { dims, values, faces }
}

impl CubicalFiltration {
    pub fn cell_count(&self) -> usize {
        self.dims.len()
    }

    pub fn count_in_dim(&self, dim: u8) -> usize {
        self.dims.iter().filter(|&&d| d == dim).count()
    }

    /// `(dim, value)` of every cell in geometric order.
    pub fn cells(&self) -> impl Iterator<Item = (u8, f64)> + '_ {
        self.dims.iter().copied().zip(self.values.iter().copied())
    }

    /// Sorts cells into filtration order and remaps face indices.
    /// `reverse_ties` flips the deterministic tiebreak among equal
    /// (value, dim) cells; diagrams must not depend on it.
    fn to_complex(&self, reverse_ties: bool) -> FilteredComplex {
        let n = self.dims.len();
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by(|&a, &b| {
            let (ia, ib) = (a as usize, b as usize);
            self.values[ia]
                .partial_cmp(&self.values[ib])
                .unwrap()
                .then(self.dims[ia].cmp(&self.dims[ib]))
                .then_with(|| if reverse_ties { b.cmp(&a) } else { a.cmp(&b) })
        });
        let mut rank_of = vec![0u32; n];
        for (rank, &g) in order.iter().enumerate() {
            rank_of[g as usize] = rank as u32;
        }
        let mut dims = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        let mut boundaries = Vec::with_capacity(n);
        for &g in &order {
            let g = g as usize;
            dims.push(self.dims[g]);
            values.push(self.values[g]);
            let mut bd: Vec<u32> = self.faces[g].iter().map(|&f| rank_of[f as usize]).collect();
            bd.sort_unstable();
            boundaries.push(bd);
        }
        FilteredComplex {
            dims,
            values,
            boundaries,
        }
    }
}

/// Persistence diagrams of a filtered cubical complex over the two-element
/// field: all finite pairs with `birth < death` plus essential classes.
pub fn compute_persistence(filtration: &CubicalFiltration) -> DiagramSet {
    compute_persistence_with(filtration, false, false)
}

pub(crate) fn compute_persistence_with(
    filtration: &CubicalFiltration,
    reverse_ties: bool,
    naive: bool,
) -> DiagramSet {
    let cx = filtration.to_complex(reverse_ties);
    let reduction = if naive {
        reduce::reduce_standard(&cx)
    } else {
        reduce::reduce_twist(&cx)
    };
    let mut points = Vec::new();
    for &(birth_cell, death_cell) in &reduction.pairs {
        let birth = cx.values[birth_cell as usize];
        let death = cx.values[death_cell as usize];
        if birth < death {
            points.push(PersistencePoint::new(
                cx.dims[birth_cell as usize] as usize,
                birth,
                death,
            ));
        }
    }
    for &cell in &reduction.essential {
        points.push(PersistencePoint::new(
            cx.dims[cell as usize] as usize,
            cx.values[cell as usize],
            f64::INFINITY,
        ));
    }
    DiagramSet::new(points).expect("reduction produces birth < death pairs")
}

/// Convenience: diagrams of a field in one call.
pub fn field_persistence(field: &GridField) -> DiagramSet {
    compute_persistence(&build_filtration(field))
}

/// Betti numbers of the sublevel complex at `theta`, computed without the
/// persistence pairing: connected-component labeling for `beta_0`, boundary
/// ranks over the two-element field for `beta_1` and `beta_2`.
pub fn betti_direct(field: &GridField, theta: f64) -> [usize; 3] {
    let filtration = build_filtration(field);
    let present: Vec<bool> = filtration.values.iter().map(|&v| v <= theta).collect();

    // Compact per-dimension indices for present cells.
    let mut index = vec![u32::MAX; filtration.dims.len()];
    let mut counts = [0usize; 3];
    for (c, &dim) in filtration.dims.iter().enumerate() {
        if present[c] {
            index[c] = counts[dim as usize] as u32;
            counts[dim as usize] += 1;
        }
    }
    let [n_v, n_e, n_f] = counts;

    // beta_0 by labeling: union the endpoints of every present edge.
    let mut dsu = DisjointSets::new(n_v);
    let mut components = n_v;
    for (c, &dim) in filtration.dims.iter().enumerate() {
        if dim == 1 && present[c] && filtration.faces[c].len() == 2 {
            let a = index[filtration.faces[c][0] as usize] as usize;
            let b = index[filtration.faces[c][1] as usize] as usize;
            if dsu.union(a, b) {
                components -= 1;
            }
        }
    }

    let pack = |rows: usize, dim: u8| -> (Vec<Vec<u64>>, usize) {
        let words = rows.div_ceil(64).max(1);
        let mut cols = Vec::new();
        for (c, &d) in filtration.dims.iter().enumerate() {
            if d == dim && present[c] {
                let mut col = vec![0u64; words];
                for &f in &filtration.faces[c] {
                    let r = index[f as usize] as usize;
                    col[r / 64] |= 1 << (r % 64);
                }
                cols.push(col);
            }
        }
        (cols, words)
    };

    let (cols1, words1) = pack(n_v, 1);
    let rank1 = reduce::gf2_rank(cols1, words1);
    let (cols2, words2) = pack(n_e, 2);
    let rank2 = reduce::gf2_rank(cols2, words2);

    debug_assert_eq!(components, n_v - rank1);
    [components, n_e - rank1 - rank2, n_f - rank2]
}
