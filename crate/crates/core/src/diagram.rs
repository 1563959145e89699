//! Persistence diagrams: multisets of (birth, death) points per homology
//! dimension, with `death = +inf` for essential classes.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::DiagramError;

/// One feature: born when the sublevel set first contains it, dead when it
/// merges or fills in. Essential features never die.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePoint {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

impl PersistencePoint {
    pub fn new(dim: usize, birth: f64, death: f64) -> Self {
        PersistencePoint { dim, birth, death }
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    /// `death - birth`; infinite for essential points.
    pub fn lifespan(&self) -> f64 {
        self.death - self.birth
    }

    fn key(&self) -> (usize, f64, f64) {
        (self.dim, self.birth, self.death)
    }
}

fn cmp_points(a: &PersistencePoint, b: &PersistencePoint) -> Ordering {
    let (da, ba, xa) = a.key();
    let (db, bb, xb) = b.key();
    da.cmp(&db)
        .then(ba.partial_cmp(&bb).unwrap())
        .then(xa.partial_cmp(&xb).unwrap())
}

/// The persistence diagrams of one field or point cloud, all dimensions
/// together, sorted by (dim, birth, death).
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramSet {
    points: Vec<PersistencePoint>,
    provenance: Option<String>,
}

impl DiagramSet {
    /// Builds a diagram set. Zero-lifespan pairs are invisible in every
    /// sublevel set, so `birth >= death` is rejected.
    pub fn new(mut points: Vec<PersistencePoint>) -> Result<Self, DiagramError> {
        for p in &points {
            if !(p.birth < p.death) || p.birth.is_nan() {
                return Err(DiagramError::BadPoint {
                    birth: p.birth,
                    death: p.death,
                });
            }
        }
        points.sort_by(cmp_points);
        Ok(DiagramSet {
            points,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, label: impl Into<String>) -> Self {
        self.provenance = Some(label.into());
        self
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    pub fn points(&self) -> &[PersistencePoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest homology dimension carrying any point.
    pub fn max_dim(&self) -> usize {
        self.points.iter().map(|p| p.dim).max().unwrap_or(0)
    }

    pub fn points_in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePoint> {
        self.points.iter().filter(move |p| p.dim == dim)
    }

    pub fn finite_in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePoint> {
        self.points_in_dim(dim).filter(|p| !p.is_essential())
    }

    pub fn essential_in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePoint> {
        self.points_in_dim(dim).filter(|p| p.is_essential())
    }

    /// Essential-class counts for dimensions 0, 1, 2.
    pub fn essential_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for p in self.points.iter().filter(|p| p.is_essential()) {
            if p.dim < 3 {
                counts[p.dim] += 1;
            }
        }
        counts
    }

    /// Betti numbers of the sublevel set at `theta`, read off the diagram:
    /// the count of points with `birth <= theta < death` per dimension.
    pub fn betti_at(&self, theta: f64) -> [usize; 3] {
        let mut betti = [0; 3];
        for p in &self.points {
            if p.dim < 3 && p.birth <= theta && theta < p.death {
                betti[p.dim] += 1;
            }
        }
        betti
    }

    /// Serializes to the diagram text format, points in (dim, birth, death)
    /// order, `inf` for infinite deaths.
    pub fn to_text(&self) -> String {
        let mut s = String::from("PDIAG v1\n");
        for p in &self.points {
            if p.is_essential() {
                let _ = writeln!(s, "{} {} inf", p.dim, p.birth);
            } else {
                let _ = writeln!(s, "{} {} {}", p.dim, p.birth, p.death);
            }
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DiagramError> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|source| DiagramError::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<DiagramSet, DiagramError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| DiagramError::Io {
            path: path.to_owned(),
            source,
        })?;
        let fmt = |line: usize, msg: String| DiagramError::Format {
            path: path.to_owned(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, magic)) if magic.trim() == "PDIAG v1" => {}
            Some((_, magic)) => {
                return Err(fmt(1, format!("expected `PDIAG v1`, found `{magic}`")))
            }
            None => return Err(fmt(1, "empty file".into())),
        }
        let mut points = Vec::new();
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() != 3 {
                return Err(fmt(lineno + 1, format!("expected `k birth death`, found `{line}`")));
            }
            let dim: usize = tok[0]
                .parse()
                .map_err(|_| fmt(lineno + 1, format!("bad dimension `{}`", tok[0])))?;
            let birth: f64 = tok[1]
                .parse()
                .map_err(|_| fmt(lineno + 1, format!("bad birth `{}`", tok[1])))?;
            let death: f64 = if tok[2] == "inf" {
                f64::INFINITY
            } else {
                tok[2]
                    .parse()
                    .map_err(|_| fmt(lineno + 1, format!("bad death `{}`", tok[2])))?
            };
            points.push(PersistencePoint::new(dim, birth, death));
        }
        DiagramSet::new(points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(dim: usize, birth: f64, death: f64) -> PersistencePoint {
        PersistencePoint::new(dim, birth, death)
    }

    #[test]
    fn betti_counts_infinite_death() {
        let ds = DiagramSet::new(vec![pt(0, 1.0, f64::INFINITY)]).unwrap();
        assert_eq!(ds.betti_at(0.5), [0, 0, 0]);
        assert_eq!(ds.betti_at(1.0), [1, 0, 0]);
        assert_eq!(ds.betti_at(1e12), [1, 0, 0]);
    }

    #[test]
    fn betti_two_well() {
        let ds = DiagramSet::new(vec![
            pt(0, -2.0, f64::INFINITY),
            pt(0, -1.0, 0.0),
        ])
        .unwrap();
        assert_eq!(ds.betti_at(-0.5), [2, 0, 0]);
        assert_eq!(ds.betti_at(0.5), [1, 0, 0]);
        // death is exclusive: at the saddle the wells are already merged
        assert_eq!(ds.betti_at(0.0), [1, 0, 0]);
    }

    #[test]
    fn zero_lifespan_rejected() {
        assert!(DiagramSet::new(vec![pt(0, 1.0, 1.0)]).is_err());
        assert!(DiagramSet::new(vec![pt(0, 2.0, 1.0)]).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = DiagramSet::new(vec![
            pt(1, 0.932, f64::INFINITY),
            pt(0, -2.7206, -0.697),
            pt(0, -2.7206, f64::INFINITY),
            pt(2, 2.7092, f64::INFINITY),
        ])
        .unwrap();
        let path = dir.path().join("d.pdiag");
        ds.save(&path).unwrap();
        let back = DiagramSet::load(&path).unwrap();
        assert_eq!(ds, back);
        // deterministic ordering: dim, then birth, then death, finite before inf
        let text = ds.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "0 -2.7206 -0.697");
        assert_eq!(lines[2], "0 -2.7206 inf");
        assert_eq!(lines[4], "2 2.7092 inf");
    }
}
