//! Boundary-matrix reduction over the two-element field, shared by the
//! cubical and Vietoris-Rips pipelines.
//!
//! Cells arrive already sorted by filtration order (value, then dimension,
//! then a deterministic tiebreak), with each boundary listing strictly
//! earlier cells. Reduction pairs a death cell with the birth cell left as
//! the lowest one of its reduced column; unpaired cells are essential.

/// A complex in filtration order. `boundaries[j]` holds the sorted indices of
/// the facets of cell `j`, after mod-2 cancellation of identified faces.
pub(crate) struct FilteredComplex {
    pub dims: Vec<u8>,
    pub values: Vec<f64>,
    pub boundaries: Vec<Vec<u32>>,
}

impl FilteredComplex {
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn max_dim(&self) -> u8 {
        self.dims.iter().copied().max().unwrap_or(0)
    }
}

pub(crate) struct Reduction {
    /// (birth cell, death cell) pairs, in discovery order.
    pub pairs: Vec<(u32, u32)>,
    /// Cells never involved in a pair.
    pub essential: Vec<u32>,
}

const NONE: u32 = u32::MAX;

/// Symmetric difference of two sorted lists (mod-2 column addition).
pub(crate) fn xor_sorted<T: Ord + Copy>(target: &[T], other: &[T], out: &mut Vec<T>) {
    out.clear();
    let (mut a, mut b) = (0, 0);
    while a < target.len() && b < other.len() {
        match target[a].cmp(&other[b]) {
            std::cmp::Ordering::Less => {
                out.push(target[a]);
                a += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(other[b]);
                b += 1;
            }
            std::cmp::Ordering::Equal => {
                a += 1;
                b += 1;
            }
        }
    }
    out.extend_from_slice(&target[a..]);
    out.extend_from_slice(&other[b..]);
}

fn finish(n: usize, pairs: Vec<(u32, u32)>) -> Reduction {
    let mut in_pair = vec![false; n];
    for &(b, d) in &pairs {
        in_pair[b as usize] = true;
        in_pair[d as usize] = true;
    }
    let essential = (0..n as u32).filter(|&c| !in_pair[c as usize]).collect();
    Reduction { pairs, essential }
}

/// Reduces one column against the current owners, recording a pair if it
/// survives. Returns the column's storage for reuse.
fn reduce_column(
    mut col: Vec<u32>,
    j: u32,
    owners: &mut [u32],
    stored: &mut [Vec<u32>],
    pairs: &mut Vec<(u32, u32)>,
    scratch: &mut Vec<u32>,
) {
    while let Some(&low) = col.last() {
        let owner = owners[low as usize];
        if owner == NONE {
            owners[low as usize] = j;
            pairs.push((low, j));
            stored[j as usize] = col;
            return;
        }
        xor_sorted(&col, &stored[owner as usize], scratch);
        std::mem::swap(&mut col, scratch);
    }
}

/// Standard left-to-right reduction, all dimensions interleaved in
/// filtration order. Kept as the oracle for the twist variant.
pub(crate) fn reduce_standard(cx: &FilteredComplex) -> Reduction {
    let n = cx.len();
    let mut owners = vec![NONE; n];
    let mut stored: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut pairs = Vec::new();
    let mut scratch = Vec::new();
    for j in 0..n {
        reduce_column(
            cx.boundaries[j].clone(),
            j as u32,
            &mut owners,
            &mut stored,
            &mut pairs,
            &mut scratch,
        );
    }
    finish(n, pairs)
}

/// Reduction with the twist: dimensions processed top-down, and the column
/// of every cell paired as a birth is cleared without being reduced. Output
/// matches `reduce_standard` exactly.
pub(crate) fn reduce_twist(cx: &FilteredComplex) -> Reduction {
    let n = cx.len();
    let mut owners = vec![NONE; n];
    let mut stored: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut pairs = Vec::new();
    let mut scratch = Vec::new();
    let mut cleared = vec![false; n];
    for d in (1..=cx.max_dim()).rev() {
        for j in 0..n {
            if cx.dims[j] != d || cleared[j] {
                continue;
            }
            let before = pairs.len();
            reduce_column(
                cx.boundaries[j].clone(),
                j as u32,
                &mut owners,
                &mut stored,
                &mut pairs,
                &mut scratch,
            );
            if pairs.len() > before {
                cleared[pairs[before].0 as usize] = true;
            }
        }
    }
    finish(n, pairs)
}

/// Rank of a set of GF(2) column vectors, each packed into `words` u64 words.
/// Destroys its input.
pub(crate) fn gf2_rank(mut columns: Vec<Vec<u64>>, words: usize) -> usize {
    fn highest_bit(col: &[u64]) -> Option<usize> {
        for (w, &block) in col.iter().enumerate().rev() {
            if block != 0 {
                return Some(w * 64 + (63 - block.leading_zeros() as usize));
            }
        }
        None
    }

    let mut pivots: Vec<Option<usize>> = vec![None; words * 64];
    let mut reduced: Vec<Vec<u64>> = Vec::new();
    let mut rank = 0;
    for mut col in columns.drain(..) {
        while let Some(bit) = highest_bit(&col) {
            match pivots[bit] {
                Some(owner) => {
                    let owner_col = &reduced[owner];
                    for (t, o) in col.iter_mut().zip(owner_col) {
                        *t ^= o;
                    }
                }
                None => {
                    pivots[bit] = Some(reduced.len());
                    reduced.push(col);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn sort_pairs(mut p: Vec<(u32, u32)>) -> Vec<(u32, u32)> {
        p.sort_unstable();
        p
    }

    /// A filtered triangle boundary: three vertices, three edges, one face.
    fn triangle() -> FilteredComplex {
        FilteredComplex {
            dims: vec![0, 0, 0, 1, 1, 1, 2],
            values: vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0],
            boundaries: vec![
                vec![],
                vec![],
                vec![],
                vec![0, 1],
                vec![1, 2],
                vec![0, 2],
                vec![3, 4, 5],
            ],
        }
    }

    #[test]
    fn triangle_pairs() {
        let red = reduce_standard(&triangle());
        assert_eq!(
            sort_pairs(red.pairs),
            vec![(1, 3), (2, 4), (5, 6)]
        );
        assert_eq!(red.essential, vec![0]);
    }

    #[test]
    fn twist_matches_standard_on_random_complexes() {
        // Random filtered 2-complexes built as a growing triangle fan.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let nv = rng.random_range(3..8usize);
            let mut dims = vec![0u8; nv];
            let mut boundaries: Vec<Vec<u32>> = vec![Vec::new(); nv];
            let mut edges = Vec::new();
            for a in 0..nv {
                for b in (a + 1)..nv {
                    if rng.random_bool(0.7) {
                        dims.push(1);
                        boundaries.push(vec![a as u32, b as u32]);
                        edges.push((a, b, dims.len() - 1));
                    }
                }
            }
            let n_edges = edges.len();
            for x in 0..n_edges {
                for y in (x + 1)..n_edges {
                    let (a1, b1, e1) = edges[x];
                    let (a2, b2, e2) = edges[y];
                    let shared: Vec<usize> = [a1, b1]
                        .iter()
                        .filter(|v| [a2, b2].contains(v))
                        .copied()
                        .collect();
                    if shared.len() != 1 {
                        continue;
                    }
                    let third: Vec<usize> = [a1, b1, a2, b2]
                        .into_iter()
                        .filter(|&v| v != shared[0])
                        .collect();
                    if let Some((_, _, e3)) = edges
                        .iter()
                        .find(|&&(a, b, _)| (a, b) == (third[0].min(third[1]), third[0].max(third[1])))
                    {
                        if rng.random_bool(0.5) {
                            dims.push(2);
                            let mut bd = vec![e1 as u32, e2 as u32, *e3 as u32];
                            bd.sort_unstable();
                            boundaries.push(bd);
                        }
                    }
                }
            }
            let values = (0..dims.len()).map(|k| k as f64).collect();
            let cx = FilteredComplex {
                dims,
                values,
                boundaries,
            };
            let a = reduce_standard(&cx);
            let b = reduce_twist(&cx);
            assert_eq!(sort_pairs(a.pairs), sort_pairs(b.pairs));
            assert_eq!(a.essential, b.essential);
        }
    }
}
