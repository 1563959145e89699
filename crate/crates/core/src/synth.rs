//! Seeded generators for fields, field series, and point clouds with
//! analytically known topology. These stand in for simulation data in tests
//! and acceptance runs; they claim topological fidelity only.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::cloud::DistanceMatrix;
use crate::error::SynthError;
use crate::field::{Boundary, FieldSeries, GridField};

/// Grid shape for field-producing generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub boundary: Boundary,
}

impl GridSpec {
    pub fn torus(nx: usize, ny: usize) -> Self {
        GridSpec {
            nx,
            ny,
            boundary: Boundary::Torus,
        }
    }

    pub fn bounded(nx: usize, ny: usize) -> Self {
        GridSpec {
            nx,
            ny,
            boundary: Boundary::Bounded,
        }
    }
}

/// What to generate.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    /// Flat field; on the torus its diagram is the torus homology at the
    /// constant value.
    ConstantField { value: f64 },
    /// Horizontal band pattern `cos(2 pi y / L)` on the torus.
    BandField,
    /// Wells at the given depths joined through saddles (one fewer saddle
    /// than wells), on a bounded grid. Constant along y.
    MultiWell { depths: Vec<f64>, saddles: Vec<f64> },
    /// Two horizontal bands on the torus joined by `n_links` vertical links
    /// at an intermediate level: `n_links + 1` independent loops.
    LinkedBands { n_links: usize },
    /// Two localized wells whose depths oscillate with a phase offset; the
    /// diagram trajectory is a closed loop traversed every `period` frames.
    PeriodicOrbitSeries {
        period: usize,
        n_frames: usize,
        noise_amp: f64,
    },
    /// The periodic orbit with a time reparameterization that concentrates
    /// most of the phase advance in a short window of each period.
    FastSlowSeries {
        period: usize,
        n_frames: usize,
        noise_amp: f64,
    },
    /// `n` points on a circle of the given radius with bounded coordinate
    /// noise; Euclidean distances.
    CirclePointCloud { n: usize, radius: f64, noise: f64 },
    /// `k_blobs` clusters of unit diameter with centers `sep` apart.
    BlobCloud { k_blobs: usize, sep: f64 },
}

/// A fully seeded generation request: the seed determines every byte of the
/// output.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub seed: u64,
    pub grid: GridSpec,
}

/// Documented ground truth accompanying a generated field.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldTruth {
    Constant {
        value: f64,
    },
    Band {
        lo: f64,
        hi: f64,
    },
    MultiWell {
        /// Expected dimension-0 points, `(birth, death)` with infinite death
        /// for the deepest well, computed by the 1-D merge rule.
        expected_pd0: Vec<(f64, f64)>,
    },
    LinkedBands {
        band_level: f64,
        link_level: f64,
        background: f64,
        /// Independent loops at `link_level`: `n_links + 1`.
        expected_beta1: usize,
    },
}

/// Documented ground truth accompanying a generated series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTruth {
    pub period: usize,
    pub noise_amp: f64,
    /// Frame ranges `[start, end)` carrying the fast phase advance; empty
    /// for the uniformly sampled orbit.
    pub fast_windows: Vec<(usize, usize)>,
}

/// Documented ground truth accompanying a generated point cloud.
#[derive(Debug, Clone, PartialEq)]
pub enum CloudTruth {
    Circle { radius: f64 },
    Blobs { labels: Vec<usize> },
}

fn bad(msg: impl Into<String>) -> SynthError {
    SynthError::BadSpec(msg.into())
}

/// Generates a single field with its ground truth.
pub fn gen_field(spec: &GeneratorSpec) -> Result<(GridField, FieldTruth), SynthError> {
    let GridSpec { nx, ny, boundary } = spec.grid;
    match &spec.kind {
        GeneratorKind::ConstantField { value } => {
            let field = GridField::new(nx, ny, vec![*value; nx * ny], boundary, None)?;
            Ok((field, FieldTruth::Constant { value: *value }))
        }
        GeneratorKind::BandField => {
            if boundary != Boundary::Torus {
                return Err(bad("band field is defined on the torus"));
            }
            if ny < 4 {
                return Err(bad("band field needs ny >= 4"));
            }
            let values: Vec<f64> = (0..ny)
                .flat_map(|j| {
                    let v = (std::f64::consts::TAU * (j as f64 + 0.5) / ny as f64).cos();
                    std::iter::repeat_n(v, nx)
                })
                .collect();
            let field = GridField::new(nx, ny, values, boundary, None)?;
            let (lo, hi) = field.min_max();
            Ok((field, FieldTruth::Band { lo, hi }))
        }
        GeneratorKind::MultiWell { depths, saddles } => {
            if boundary != Boundary::Bounded {
                return Err(bad("multi-well field is defined on a bounded grid"));
            }
            if depths.is_empty() || saddles.len() + 1 != depths.len() {
                return Err(bad("need k wells and k-1 saddles"));
            }
            for (i, &s) in saddles.iter().enumerate() {
                if !(s > depths[i] && s > depths[i + 1]) {
                    return Err(bad(format!(
                        "saddle {i} at {s} must exceed its adjacent wells"
                    )));
                }
            }
            let profile_len = depths.len() + saddles.len();
            if nx < profile_len + 2 {
                return Err(bad(format!(
                    "grid too narrow: need nx >= {}",
                    profile_len + 2
                )));
            }
            let pad = depths
                .iter()
                .chain(saddles.iter())
                .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
                + 1.0;
            let mut profile = vec![pad; nx];
            let start = (nx - profile_len) / 2;
            for (k, &d) in depths.iter().enumerate() {
                profile[start + 2 * k] = d;
            }
            for (k, &s) in saddles.iter().enumerate() {
                profile[start + 2 * k + 1] = s;
            }
            let values: Vec<f64> = (0..ny).flat_map(|_| profile.iter().copied()).collect();
            let field = GridField::new(nx, ny, values, boundary, None)?;
            Ok((
                field,
                FieldTruth::MultiWell {
                    expected_pd0: multiwell_pd0(depths, saddles),
                },
            ))
        }
        GeneratorKind::LinkedBands { n_links } => {
            let n_links = *n_links;
            if boundary != Boundary::Torus {
                return Err(bad("linked bands are defined on the torus"));
            }
            if n_links == 0 {
                return Err(bad("need at least one link"));
            }
            if nx < 2 * n_links || ny < 8 {
                return Err(bad(format!(
                    "grid too small for {n_links} links: need nx >= {} and ny >= 8",
                    2 * n_links
                )));
            }
            let (band_level, link_level, background) = (-1.0, -0.5, 0.5);
            let (r0, r1) = (ny / 4, 3 * ny / 4);
            let mut values = vec![background; nx * ny];
            for i in 0..nx {
                values[r0 * nx + i] = band_level;
                values[r1 * nx + i] = band_level;
            }
            for k in 0..n_links {
                let c = k * nx / n_links;
                for j in (r0 + 1)..r1 {
                    values[j * nx + c] = link_level;
                }
            }
            let field = GridField::new(nx, ny, values, boundary, None)?;
            Ok((
                field,
                FieldTruth::LinkedBands {
                    band_level,
                    link_level,
                    background,
                    expected_beta1: n_links + 1,
                },
            ))
        }
        _ => Err(bad("spec kind does not generate a single field")),
    }
}

/// Expected dimension-0 diagram of a well/saddle profile by the 1-D merge
/// rule: saddles processed by increasing value merge their adjacent
/// components, and the component with the larger birth dies.
fn multiwell_pd0(depths: &[f64], saddles: &[f64]) -> Vec<(f64, f64)> {
    let k = depths.len();
    let mut parent: Vec<usize> = (0..k).collect();
    let birth: Vec<f64> = depths.to_vec();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut order: Vec<usize> = (0..saddles.len()).collect();
    order.sort_by(|&a, &b| {
        saddles[a]
            .partial_cmp(&saddles[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut points = Vec::new();
    for s in order {
        let left = find(&mut parent, s);
        let right = find(&mut parent, s + 1);
        let (survivor, victim) = if birth[left] <= birth[right] {
            (left, right)
        } else {
            (right, left)
        };
        points.push((birth[victim], saddles[s]));
        parent[victim] = survivor;
    }
    let root = find(&mut parent, 0);
    points.push((birth[root], f64::INFINITY));
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points
}

/// Depth pair of the oscillating wells at a given phase. The two base depths
/// are offset so the ranges stay disjoint and the diagram always tells the
/// wells apart; with a shared base the trajectory would fold onto an arc.
fn orbit_depths(phase: f64) -> (f64, f64) {
    let v1 = -(1.0 + 0.5 * phase.sin());
    let v2 = -(2.5 + 0.5 * phase.cos());
    (v1, v2)
}

fn orbit_frame(
    grid: GridSpec,
    phase: f64,
    noise_amp: f64,
    rng: &mut ChaCha8Rng,
) -> Result<GridField, SynthError> {
    let GridSpec { nx, ny, .. } = grid;
    let (v1, v2) = orbit_depths(phase);
    let mut values = vec![0.0; nx * ny];
    let (c1, c2) = ((nx / 4, ny / 4), (3 * nx / 4, 3 * ny / 4));
    for (cx, cy, v) in [(c1.0, c1.1, v1), (c2.0, c2.1, v2)] {
        for dj in 0..2 {
            for di in 0..2 {
                values[(cy + dj) % ny * nx + (cx + di) % nx] = v;
            }
        }
    }
    if noise_amp > 0.0 {
        for v in &mut values {
            *v += rng.random_range(-noise_amp..=noise_amp);
        }
    }
    Ok(GridField::new(nx, ny, values, grid.boundary, None)?)
}

/// Generates a field series with its ground truth.
pub fn gen_series(spec: &GeneratorSpec) -> Result<(FieldSeries, SeriesTruth), SynthError> {
    let (period, n_frames, noise_amp, fast) = match spec.kind {
        GeneratorKind::PeriodicOrbitSeries {
            period,
            n_frames,
            noise_amp,
        } => (period, n_frames, noise_amp, false),
        GeneratorKind::FastSlowSeries {
            period,
            n_frames,
            noise_amp,
        } => (period, n_frames, noise_amp, true),
        _ => return Err(bad("spec kind does not generate a series")),
    };
    if spec.grid.boundary != Boundary::Torus {
        return Err(bad("orbit series are defined on the torus"));
    }
    if spec.grid.nx < 8 || spec.grid.ny < 8 {
        return Err(bad("orbit series need at least an 8x8 grid"));
    }
    if period < 4 {
        return Err(bad("period must be at least 4 frames"));
    }
    if period >= n_frames {
        return Err(bad(format!(
            "period {period} must be shorter than the series ({n_frames} frames)"
        )));
    }
    if !(noise_amp >= 0.0) {
        return Err(bad("noise amplitude must be non-negative"));
    }

    // fast/slow reparameterization: the first fifth of each period advances
    // four fifths of the phase
    let window = (period / 5).max(1);
    let fast_share = 0.8 * std::f64::consts::TAU;
    let slow_share = std::f64::consts::TAU - fast_share;

    // phase computed from the within-period position only, so noise-free
    // frames one period apart are bit-identical
    let phase_at = |t: usize| -> f64 {
        let within = t % period;
        if !fast {
            std::f64::consts::TAU * within as f64 / period as f64
        } else if within < window {
            fast_share * within as f64 / window as f64
        } else {
            fast_share + slow_share * (within - window) as f64 / (period - window) as f64
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut frames = Vec::with_capacity(n_frames);
    for t in 0..n_frames {
        frames.push(orbit_frame(spec.grid, phase_at(t), noise_amp, &mut rng)?);
    }
    let fast_windows = if fast {
        (0..n_frames / period)
            .map(|p| (p * period, p * period + window))
            .collect()
    } else {
        Vec::new()
    };
    Ok((
        FieldSeries::new(frames, 1.0)?,
        SeriesTruth {
            period,
            noise_amp,
            fast_windows,
        },
    ))
}

/// Generates a planar point cloud's Euclidean distance matrix with its
/// ground truth.
pub fn gen_cloud(spec: &GeneratorSpec) -> Result<(DistanceMatrix, CloudTruth), SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (points, truth): (Vec<(f64, f64)>, CloudTruth) = match spec.kind {
        GeneratorKind::CirclePointCloud { n, radius, noise } => {
            if n < 3 {
                return Err(bad("circle cloud needs at least 3 points"));
            }
            if !(radius > 0.0) || !(noise >= 0.0) {
                return Err(bad("circle cloud needs radius > 0 and noise >= 0"));
            }
            let pts = (0..n)
                .map(|i| {
                    let a = std::f64::consts::TAU * i as f64 / n as f64;
                    let (mut x, mut y) = (radius * a.cos(), radius * a.sin());
                    if noise > 0.0 {
                        x += rng.random_range(-noise..=noise);
                        y += rng.random_range(-noise..=noise);
                    }
                    (x, y)
                })
                .collect();
            (pts, CloudTruth::Circle { radius })
        }
        GeneratorKind::BlobCloud { k_blobs, sep } => {
            if k_blobs == 0 {
                return Err(bad("need at least one blob"));
            }
            if !(sep > 1.0) {
                return Err(bad("blob separation must exceed the unit blob diameter"));
            }
            const POINTS_PER_BLOB: usize = 8;
            let mut pts = Vec::new();
            let mut labels = Vec::new();
            for b in 0..k_blobs {
                let center = (b as f64 * sep, 0.0);
                for _ in 0..POINTS_PER_BLOB {
                    // rejection-sampled unit-diameter disk
                    let (dx, dy) = loop {
                        let dx = rng.random_range(-0.5..=0.5);
                        let dy = rng.random_range(-0.5..=0.5);
                        if dx * dx + dy * dy <= 0.25 {
                            break (dx, dy);
                        }
                    };
                    pts.push((center.0 + dx, center.1 + dy));
                    labels.push(b);
                }
            }
            (pts, CloudTruth::Blobs { labels })
        }
        _ => return Err(bad("spec kind does not generate a point cloud")),
    };
    let dm = DistanceMatrix::from_fn(points.len(), "euclidean", |i, j| {
        let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
        dx.hypot(dy)
    })
    .expect("euclidean distances form a metric");
    Ok((dm, truth))
}
