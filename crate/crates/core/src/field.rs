//! 2-D piecewise-constant scalar fields on grids with torus or bounded topology.
//!
//! Values live on pixels (top-dimensional cells) in row-major order. A bounded
//! field may carry a boolean mask; masked-out pixels are not part of the domain
//! and may hold any value, including NaN. Torus fields are always full.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::FieldError;

/// Domain topology of a grid field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Opposite edges identified; the domain is a torus.
    Torus,
    /// Plain rectangle, optionally cropped by a mask.
    Bounded,
}

impl Boundary {
    fn token(self) -> &'static str {
        match self {
            Boundary::Torus => "torus",
            Boundary::Bounded => "bounded",
        }
    }
}

/// A 2-D scalar field sampled on an `nx` x `ny` pixel grid.
///
/// Immutable after construction; transformations return new fields.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
    boundary: Boundary,
    mask: Option<Vec<bool>>,
}

impl GridField {
    /// Builds a field, checking all invariants: positive dimensions, finite
    /// values inside the domain, no mask on a torus, non-empty domain.
    pub fn new(
        nx: usize,
        ny: usize,
        values: Vec<f64>,
        boundary: Boundary,
        mask: Option<Vec<bool>>,
    ) -> Result<Self, FieldError> {
        if nx == 0 || ny == 0 {
            return Err(FieldError::ZeroDimension);
        }
        if values.len() != nx * ny {
            return Err(FieldError::ValueLength {
                expected: nx * ny,
                found: values.len(),
            });
        }
        if let Some(m) = &mask {
            if boundary == Boundary::Torus {
                return Err(FieldError::MaskOnTorus);
            }
            if m.len() != nx * ny {
                return Err(FieldError::MaskLength {
                    expected: nx * ny,
                    found: m.len(),
                });
            }
            if !m.iter().any(|&b| b) {
                return Err(FieldError::EmptyDomain);
            }
        }
        let field = GridField {
            nx,
            ny,
            values,
            boundary,
            mask,
        };
        for j in 0..ny {
            for i in 0..nx {
                if field.in_domain(i, j) && !field.value(i, j).is_finite() {
                    return Err(FieldError::NonFinite { row: j, col: i });
                }
            }
        }
        Ok(field)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Value of the pixel in column `i`, row `j`.
    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.idx(i, j)]
    }

    /// Whether pixel `(i, j)` belongs to the domain.
    #[inline]
    pub fn in_domain(&self, i: usize, j: usize) -> bool {
        match &self.mask {
            Some(m) => m[self.idx(i, j)],
            None => true,
        }
    }

    /// Iterates over `(i, j, value)` for every masked-in pixel.
    pub fn domain_values(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ny).flat_map(move |j| {
            (0..self.nx)
                .filter(move |&i| self.in_domain(i, j))
                .map(move |i| (i, j, self.value(i, j)))
        })
    }

    /// Minimum and maximum over masked-in pixels.
    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (_, _, v) in self.domain_values() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Affine rescale of the domain values onto `{0, .., levels-1}` with
    /// round-half-to-even, preserving value order. Masked-out pixels become NaN.
    pub fn quantize(&self, levels: u32) -> Result<GridField, FieldError> {
        if levels < 2 {
            return Err(FieldError::BadLevels(levels));
        }
        let (lo, hi) = self.min_max();
        if lo == hi {
            return Err(FieldError::ConstantField);
        }
        let scale = f64::from(levels - 1) / (hi - lo);
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let masked_in = self.mask.as_ref().is_none_or(|m| m[k]);
                if masked_in {
                    ((v - lo) * scale).round_ties_even()
                } else {
                    f64::NAN
                }
            })
            .collect();
        GridField::new(self.nx, self.ny, values, self.boundary, self.mask.clone())
    }

    /// Supremum over the common domain of `|self - other|`.
    pub fn sup_norm_diff(&self, other: &GridField) -> Result<f64, FieldError> {
        if self.nx != other.nx
            || self.ny != other.ny
            || self.boundary != other.boundary
            || self.mask != other.mask
        {
            return Err(FieldError::ShapeMismatch);
        }
        let mut sup = 0.0f64;
        for (i, j, v) in self.domain_values() {
            sup = sup.max((v - other.value(i, j)).abs());
        }
        Ok(sup)
    }

    /// Cyclic shift of the contents by `(dx, dy)` pixels. Torus fields only.
    pub fn shifted(&self, dx: i64, dy: i64) -> GridField {
        assert_eq!(
            self.boundary,
            Boundary::Torus,
            "cyclic shift is only an automorphism of torus fields"
        );
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        let mut values = vec![0.0; self.values.len()];
        for j in 0..self.ny {
            for i in 0..self.nx {
                let si = (i as i64 - dx).rem_euclid(nx) as usize;
                let sj = (j as i64 - dy).rem_euclid(ny) as usize;
                values[self.idx(i, j)] = self.value(si, sj);
            }
        }
        GridField {
            values,
            mask: self.mask.clone(),
            ..*self
        }
    }

    /// Rotation by pi about the grid center.
    pub fn rotated_pi(&self) -> GridField {
        self.remapped(|i, j, nx, ny| (nx - 1 - i, ny - 1 - j))
    }

    /// Reflection across the vertical axis.
    pub fn flipped_x(&self) -> GridField {
        self.remapped(|i, j, nx, _| (nx - 1 - i, j))
    }

    fn remapped(&self, f: impl Fn(usize, usize, usize, usize) -> (usize, usize)) -> GridField {
        let mut values = vec![0.0; self.values.len()];
        let mut mask = self.mask.as_ref().map(|_| vec![false; self.values.len()]);
        for j in 0..self.ny {
            for i in 0..self.nx {
                let (si, sj) = f(i, j, self.nx, self.ny);
                values[self.idx(i, j)] = self.value(si, sj);
                if let Some(m) = &mut mask {
                    m[self.idx(i, j)] = self.in_domain(si, sj);
                }
            }
        }
        GridField {
            values,
            mask,
            ..*self
        }
    }

    /// Reads a field from the text format, or from the binary variant when a
    /// sibling `<name>.f64` file exists.
    pub fn load(path: impl AsRef<Path>) -> Result<GridField, FieldError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| FieldError::Io {
            path: path.to_owned(),
            source,
        })?;
        let sidecar = path.with_extension("f64");
        let binary = sidecar.is_file();
        parse_field(&text, path, binary.then_some(&sidecar))
    }

    /// Writes the field in the text format. Finite values round-trip exactly;
    /// masked-out pixels are written as `nan`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), FieldError> {
        let path = path.as_ref();
        fs::write(path, self.full_text()).map_err(|source| FieldError::Io {
            path: path.to_owned(),
            source,
        })
    }

    /// Writes the binary variant: header (and mask) in `<path>`, raw
    /// little-endian f64 values row-major in `<path with .f64 extension>`.
    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<(), FieldError> {
        let path = path.as_ref();
        let io_err = |source| FieldError::Io {
            path: path.to_owned(),
            source,
        };
        fs::write(path, self.header_text()).map_err(io_err)?;
        let sidecar = path.with_extension("f64");
        let mut bytes = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let mut f = fs::File::create(&sidecar).map_err(|source| FieldError::Io {
            path: sidecar.clone(),
            source,
        })?;
        f.write_all(&bytes).map_err(|source| FieldError::Io {
            path: sidecar.clone(),
            source,
        })
    }

    fn header_text(&self) -> String {
        let mut s = String::new();
        s.push_str("FIELD2D v1\n");
        let _ = writeln!(
            s,
            "nx {} ny {} boundary {} mask {}",
            self.nx,
            self.ny,
            self.boundary.token(),
            u8::from(self.mask.is_some())
        );
        if let Some(m) = &self.mask {
            for j in 0..self.ny {
                let row: Vec<&str> = (0..self.nx)
                    .map(|i| if m[self.idx(i, j)] { "1" } else { "0" })
                    .collect();
                s.push_str(&row.join(" "));
                s.push('\n');
            }
        }
        s
    }

    fn full_text(&self) -> String {
        let mut s = String::new();
        s.push_str("FIELD2D v1\n");
        let _ = writeln!(
            s,
            "nx {} ny {} boundary {} mask {}",
            self.nx,
            self.ny,
            self.boundary.token(),
            u8::from(self.mask.is_some())
        );
        for j in 0..self.ny {
            for i in 0..self.nx {
                if i > 0 {
                    s.push(' ');
                }
                let v = self.value(i, j);
                if v.is_nan() {
                    s.push_str("nan");
                } else {
                    let _ = write!(s, "{v}");
                }
            }
            s.push('\n');
        }
        if let Some(m) = &self.mask {
            for j in 0..self.ny {
                let row: Vec<&str> = (0..self.nx)
                    .map(|i| if m[self.idx(i, j)] { "1" } else { "0" })
                    .collect();
                s.push_str(&row.join(" "));
                s.push('\n');
            }
        }
        s
    }
}

fn parse_field(
    text: &str,
    path: &Path,
    binary_sidecar: Option<&PathBuf>,
) -> Result<GridField, FieldError> {
    let fmt = |line: usize, msg: String| FieldError::Format {
        path: path.to_owned(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    let (_, magic) = lines
        .next()
        .ok_or_else(|| fmt(1, "empty file".into()))?;
    if magic.trim() != "FIELD2D v1" {
        return Err(fmt(1, format!("expected `FIELD2D v1`, found `{magic}`")));
    }
    let (_, header) = lines
        .next()
        .ok_or_else(|| fmt(2, "missing header line".into()))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 8 || tokens[0] != "nx" || tokens[2] != "ny" || tokens[4] != "boundary" || tokens[6] != "mask" {
        return Err(fmt(2, format!("malformed header `{header}`")));
    }
    let nx: usize = tokens[1]
        .parse()
        .map_err(|_| fmt(2, format!("bad nx `{}`", tokens[1])))?;
    let ny: usize = tokens[3]
        .parse()
        .map_err(|_| fmt(2, format!("bad ny `{}`", tokens[3])))?;
    let boundary = match tokens[5] {
        "torus" => Boundary::Torus,
        "bounded" => Boundary::Bounded,
        other => return Err(fmt(2, format!("bad boundary `{other}`"))),
    };
    let has_mask = match tokens[7] {
        "0" => false,
        "1" => true,
        other => return Err(fmt(2, format!("bad mask flag `{other}`"))),
    };
    if nx == 0 || ny == 0 {
        return Err(FieldError::ZeroDimension);
    }

    let values = if let Some(sidecar) = binary_sidecar {
        let mut bytes = Vec::new();
        fs::File::open(sidecar)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|source| FieldError::Io {
                path: sidecar.clone(),
                source,
            })?;
        if bytes.len() != nx * ny * 8 {
            return Err(FieldError::DimensionMismatch {
                expected: nx * ny,
                found: bytes.len() / 8,
            });
        }
        bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect()
    } else {
        let mut values = Vec::with_capacity(nx * ny);
        for _ in 0..ny {
            let Some((lineno, line)) = lines.next() else {
                return Err(FieldError::DimensionMismatch {
                    expected: nx * ny,
                    found: values.len(),
                });
            };
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| fmt(lineno + 1, format!("bad value `{tok}`")))?;
                values.push(v);
            }
            if values.len() % nx != 0 {
                return Err(FieldError::DimensionMismatch {
                    expected: nx * ny,
                    found: values.len(),
                });
            }
        }
        if values.len() != nx * ny {
            return Err(FieldError::DimensionMismatch {
                expected: nx * ny,
                found: values.len(),
            });
        }
        values
    };

    let mask = if has_mask {
        let mut mask = Vec::with_capacity(nx * ny);
        for _ in 0..ny {
            let Some((lineno, line)) = lines.next() else {
                return Err(FieldError::MaskLength {
                    expected: nx * ny,
                    found: mask.len(),
                });
            };
            for tok in line.split_whitespace() {
                match tok {
                    "0" => mask.push(false),
                    "1" => mask.push(true),
                    other => {
                        return Err(fmt(lineno + 1, format!("bad mask token `{other}`")));
                    }
                }
            }
        }
        if mask.len() != nx * ny {
            return Err(FieldError::MaskLength {
                expected: nx * ny,
                found: mask.len(),
            });
        }
        Some(mask)
    } else {
        None
    };

    GridField::new(nx, ny, values, boundary, mask)
}

/// An ordered sequence of fields sampled at a fixed interval.
#[derive(Debug, Clone)]
pub struct FieldSeries {
    frames: Vec<GridField>,
    dt: f64,
}

impl FieldSeries {
    pub fn new(frames: Vec<GridField>, dt: f64) -> Result<Self, FieldError> {
        if !(dt > 0.0) {
            return Err(FieldError::BadDt(dt));
        }
        let first = frames.first().ok_or(FieldError::EmptySeries)?;
        let shape = (first.nx, first.ny, first.boundary, first.mask.clone());
        for (index, f) in frames.iter().enumerate().skip(1) {
            if (f.nx, f.ny, f.boundary, f.mask.clone()) != shape {
                return Err(FieldError::FrameShape { index });
            }
        }
        Ok(FieldSeries { frames, dt })
    }

    pub fn frames(&self) -> &[GridField] {
        &self.frames
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Loads `frame_NNNNNN.field` files plus `series.meta` from a directory.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<FieldSeries, FieldError> {
        let dir = dir.as_ref();
        let meta_path = dir.join("series.meta");
        let meta = fs::read_to_string(&meta_path).map_err(|source| FieldError::Io {
            path: meta_path.clone(),
            source,
        })?;
        let dt = parse_meta_dt(&meta, &meta_path)?;
        let mut frame_paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|source| FieldError::Io {
                path: dir.to_owned(),
                source,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension().is_some_and(|e| e == "field")
                    && p.file_stem()
                        .and_then(|s| s.to_str())
                        .is_some_and(|s| s.starts_with("frame_"))
            })
            .collect();
        frame_paths.sort();
        let frames = frame_paths
            .iter()
            .map(GridField::load)
            .collect::<Result<Vec<_>, _>>()?;
        FieldSeries::new(frames, dt)
    }

    /// Writes frames as `frame_NNNNNN.field` plus `series.meta` into `dir`.
    pub fn save_dir(&self, dir: impl AsRef<Path>) -> Result<(), FieldError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|source| FieldError::Io {
            path: dir.to_owned(),
            source,
        })?;
        for (k, frame) in self.frames.iter().enumerate() {
            frame.save(dir.join(format!("frame_{k:06}.field")))?;
        }
        let meta_path = dir.join("series.meta");
        fs::write(&meta_path, format!("dt {}\n", self.dt)).map_err(|source| FieldError::Io {
            path: meta_path,
            source,
        })
    }
}

fn parse_meta_dt(meta: &str, path: &Path) -> Result<f64, FieldError> {
    let fmt = |msg: String| FieldError::Format {
        path: path.to_owned(),
        line: 1,
        msg,
    };
    let tokens: Vec<&str> = meta.split_whitespace().collect();
    if tokens.len() != 2 || tokens[0] != "dt" {
        return Err(fmt(format!("expected `dt <real>`, found `{}`", meta.trim())));
    }
    let dt: f64 = tokens[1]
        .parse()
        .map_err(|_| fmt(format!("bad dt `{}`", tokens[1])))?;
    if !(dt > 0.0) {
        return Err(FieldError::BadDt(dt));
    }
    Ok(dt)
}
