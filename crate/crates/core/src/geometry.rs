//! Point clouds, domain samplers, and the distance diagnostics (fill
//! distance, separation distance, uniformity) used to judge how evenly a
//! greedy method spreads its centers.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{fmt_f64, parse_f64, read_csv_lines, write_meta_line};
use crate::kernels::dist;
use crate::rngstream;

/// A finite set of points in `R^dim`, stored row-major in one flat buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Build a cloud from row-major coordinates. Fails if `dim` is zero, the
    /// buffer length is not a multiple of `dim`, or any coordinate is not
    /// finite.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig(
                "point dimension must be at least 1".into(),
            ));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidConfig(format!(
                "coordinate buffer length {} is not a multiple of dimension {}",
                coords.len(),
                dim
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "point coordinates must be finite, got {bad}"
            )));
        }
        Ok(PointCloud { dim, coords })
    }

    /// Build a cloud from a list of rows; the dimension is taken from the
    /// first row. Fails on an empty list or ragged rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptySet)?;
        let dim = first.len();
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        PointCloud::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Coordinates of point `i`.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// New cloud holding the listed points, in the listed order.
    pub fn subset(&self, indices: &[usize]) -> PointCloud {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointCloud {
            dim: self.dim,
            coords,
        }
    }

    /// Error if the cloud contains two bitwise-identical points. Runs in
    /// `O(n log n)` via a lexicographic sort.
    pub fn ensure_distinct(&self) -> Result<()> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&i, &j| {
            self.point(i)
                .iter()
                .zip(self.point(j))
                .map(|(a, b)| a.total_cmp(b))
                .find(|c| c.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for pair in order.windows(2) {
            let (i, j) = (pair[0], pair[1]);
            if self.point(i) == self.point(j) {
                return Err(Error::DuplicateCandidates(i.min(j), i.max(j)));
            }
        }
        Ok(())
    }

    /// Write the cloud as CSV with header `x0,...,x{d-1}`, preceded by the
    /// given `# key=value` metadata pairs.
    pub fn write_csv(&self, w: &mut impl Write, meta: &[(&str, String)]) -> Result<()> {
        let mut pairs = vec![
            ("dim", self.dim.to_string()),
            ("points", self.len().to_string()),
        ];
        pairs.extend(meta.iter().cloned());
        write_meta_line(w, &pairs)?;
        let header: Vec<String> = (0..self.dim).map(|i| format!("x{i}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for p in self.iter() {
            let row: Vec<String> = p.iter().map(|&c| fmt_f64(c)).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Read a cloud from CSV; the dimension comes from the `x0,...` header.
    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let (_meta, header, rows) = read_csv_lines(r, "point cloud CSV")?;
        let dim = header.len();
        for (i, h) in header.iter().enumerate() {
            if h != &format!("x{i}") {
                return Err(Error::Parse {
                    what: "point cloud CSV",
                    detail: format!("expected header column x{i}, got {h:?}"),
                });
            }
        }
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(Error::Parse {
                    what: "point cloud CSV",
                    detail: format!("row has {} fields, expected {}", row.len(), dim),
                });
            }
            for field in row {
                coords.push(parse_f64(field, "point cloud CSV")?);
            }
        }
        PointCloud::new(dim, coords)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>, meta: &[(&str, String)]) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut w, meta)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(BufReader::new(std::fs::File::open(path)?))
    }

    /// Write the cloud as JSON: `{"dim": d, "points": [[...], ...]}`.
    pub fn write_json(&self, w: &mut impl Write) -> Result<()> {
        let doc = CloudJson {
            dim: self.dim,
            points: self.iter().map(|p| p.to_vec()).collect(),
        };
        serde_json::to_writer(w, &doc)?;
        Ok(())
    }

    pub fn read_json(r: impl std::io::Read) -> Result<Self> {
        let doc: CloudJson = serde_json::from_reader(r)?;
        for p in &doc.points {
            if p.len() != doc.dim {
                return Err(Error::DimensionMismatch {
                    expected: doc.dim,
                    got: p.len(),
                });
            }
        }
        PointCloud::new(doc.dim, doc.points.concat())
    }
}

#[derive(Serialize, Deserialize)]
struct CloudJson {
    dim: usize,
    points: Vec<Vec<f64>>,
}

/// Domains that the built-in samplers can draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    /// The unit cube `[0, 1]^dim`.
    UnitCube { dim: usize },
    /// A non-convex planar blob with a small circular hole: a polar-graph
    /// region centered at `(0.1, 0)` with the disk of squared radius `0.003`
    /// around `(0.17, 0.17)` removed. Sampled by rejection from the bounding
    /// box `[-0.7, 0.9] x [-0.8, 0.8]`.
    BlobWithHole,
}

/// Center of the circular hole cut out of [`DomainKind::BlobWithHole`].
pub const BLOB_HOLE_CENTER: [f64; 2] = [0.17, 0.17];

impl DomainKind {
    pub fn dim(&self) -> usize {
        match self {
            DomainKind::UnitCube { dim } => *dim,
            DomainKind::BlobWithHole => 2,
        }
    }

    /// Membership test. For the unit cube this is the closed cube; for the
    /// blob it is the open polar-graph region minus the closed hole.
    pub fn contains(&self, p: &[f64]) -> bool {
        match self {
            DomainKind::UnitCube { dim } => {
                p.len() == *dim && p.iter().all(|&c| (0.0..=1.0).contains(&c))
            }
            DomainKind::BlobWithHole => {
                if p.len() != 2 {
                    return false;
                }
                let sx = p[0] - 0.1;
                let sy = p[1];
                let rad = (sx * sx + sy * sy).sqrt();
                let phi =
                    (sy.atan2(sx) + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI);
                let hx = p[0] - BLOB_HOLE_CENTER[0];
                let hy = p[1] - BLOB_HOLE_CENTER[1];
                rad < blob_radius(phi) && hx * hx + hy * hy > 0.003
            }
        }
    }
}

/// Boundary radius of the blob as a function of the (shifted) polar angle.
fn blob_radius(phi: f64) -> f64 {
    let t = phi / std::f64::consts::PI;
    0.35 * ((std::f64::consts::PI * t * t).cos() + 2.0) * (0.15 * phi.cos().powi(2) + 0.3)
}

/// A reproducible point sampler for one of the built-in domains.
///
/// Sampling is a pure function of `(kind, seed, stream, n)`: every call to
/// [`DomainSampler::sample`] starts a fresh generator, so repeated calls
/// return identical clouds. Independent clouds for the same seed (for
/// example a train/test split) come from distinct RNG streams.
#[derive(Debug, Clone, Copy)]
pub struct DomainSampler {
    kind: DomainKind,
    seed: u64,
    stream: u64,
}

impl DomainSampler {
    /// Sampler on the default domain-sampling stream.
    pub fn new(kind: DomainKind, seed: u64) -> Self {
        DomainSampler {
            kind,
            seed,
            stream: rngstream::DOMAIN,
        }
    }

    /// Sampler on an explicit RNG stream (see [`crate::rngstream`]).
    pub fn with_stream(kind: DomainKind, seed: u64, stream: u64) -> Self {
        DomainSampler { kind, seed, stream }
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    /// Draw `n` points. For the blob domain this uses rejection sampling and
    /// fails if the acceptance rate falls below `1e-4`.
    pub fn sample(&self, n: usize) -> Result<PointCloud> {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        match self.kind {
            DomainKind::UnitCube { dim } => {
                if dim == 0 {
                    return Err(Error::InvalidConfig(
                        "unit cube dimension must be at least 1".into(),
                    ));
                }
                let coords: Vec<f64> = (0..n * dim).map(|_| rng.random::<f64>()).collect();
                PointCloud::new(dim, coords)
            }
            DomainKind::BlobWithHole => {
                let mut coords = Vec::with_capacity(2 * n);
                let mut accepted = 0usize;
                let mut attempts = 0usize;
                // The blob fills a few percent of its bounding box, so this
                // budget only trips if the membership test is broken.
                let budget = 10_000usize.max(n.saturating_mul(10_000));
                while accepted < n {
                    if attempts >= budget {
                        return Err(Error::RejectionBudgetExceeded { accepted, attempts });
                    }
                    attempts += 1;
                    let p = [rng.random_range(-0.7..0.9), rng.random_range(-0.8..0.8)];
                    if self.kind.contains(&p) {
                        coords.extend_from_slice(&p);
                        accepted += 1;
                    }
                }
                PointCloud::new(2, coords)
            }
        }
    }
}

/// Fill distance of `centers` relative to the discretized domain
/// `candidates`: the largest distance from any candidate to its nearest
/// center. Small fill distance means no candidate is left uncovered.
pub fn fill_distance(candidates: &PointCloud, centers: &PointCloud) -> Result<f64> {
    if candidates.is_empty() || centers.is_empty() {
        return Err(Error::EmptySet);
    }
    if candidates.dim() != centers.dim() {
        return Err(Error::DimensionMismatch {
            expected: candidates.dim(),
            got: centers.dim(),
        });
    }
    let mut fill = 0.0f64;
    for c in candidates.iter() {
        let mut nearest = f64::INFINITY;
        for z in centers.iter() {
            nearest = nearest.min(dist(c, z));
        }
        fill = fill.max(nearest);
    }
    Ok(fill)
}

/// Separation distance: the smallest pairwise distance within `points`.
/// Needs at least two points.
pub fn separation_distance(points: &PointCloud) -> Result<f64> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let mut sep = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            sep = sep.min(dist(points.point(i), points.point(j)));
        }
    }
    Ok(sep)
}

/// Uniformity of `centers` over the discretized domain: fill distance
/// divided by separation distance. Values near `1/2` mean the centers are
/// close to evenly spread; large values mean clumping.
pub fn uniformity_constant(candidates: &PointCloud, centers: &PointCloud) -> Result<f64> {
    Ok(fill_distance(candidates, centers)? / separation_distance(centers)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cloud1(xs: &[f64]) -> PointCloud {
        PointCloud::new(1, xs.to_vec()).unwrap()
    }

    #[test]
    fn construction_checks() {
        assert!(PointCloud::new(0, vec![]).is_err());
        assert!(PointCloud::new(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(PointCloud::new(1, vec![f64::NAN]).is_err());
        let c = PointCloud::new(2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.point(1), &[2.0, 3.0]);
        assert!(matches!(
            PointCloud::from_rows(&[vec![0.0], vec![1.0, 2.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn duplicate_detection_reports_indices() {
        let c = PointCloud::from_rows(&[vec![0.0, 1.0], vec![2.0, 3.0], vec![0.0, 1.0]]).unwrap();
        match c.ensure_distinct() {
            Err(Error::DuplicateCandidates(0, 2)) => {}
            other => panic!("expected duplicate (0, 2), got {other:?}"),
        }
        let ok = PointCloud::from_rows(&[vec![0.0, 1.0], vec![0.0, 1.5]]).unwrap();
        assert!(ok.ensure_distinct().is_ok());
    }

    #[test]
    fn unit_cube_sampler_is_reproducible() {
        let s = DomainSampler::new(DomainKind::UnitCube { dim: 3 }, 42);
        let a = s.sample(100).unwrap();
        let b = s.sample(100).unwrap();
        assert_eq!(a, b);
        let c = DomainSampler::new(DomainKind::UnitCube { dim: 3 }, 42)
            .sample(100)
            .unwrap();
        assert_eq!(a, c);
        assert!(a.iter().all(|p| p.iter().all(|&x| (0.0..1.0).contains(&x))));
        // A different seed or a different stream gives different points.
        let d = DomainSampler::new(DomainKind::UnitCube { dim: 3 }, 43)
            .sample(100)
            .unwrap();
        assert_ne!(a, d);
        let e =
            DomainSampler::with_stream(DomainKind::UnitCube { dim: 3 }, 42, rngstream::EVALUATION)
                .sample(100)
                .unwrap();
        assert_ne!(a, e);
    }

    #[test]
    fn blob_sampler_respects_membership() {
        let s = DomainSampler::new(DomainKind::BlobWithHole, 7);
        let cloud = s.sample(831).unwrap();
        assert_eq!(cloud.len(), 831);
        assert_eq!(cloud.dim(), 2);
        for p in cloud.iter() {
            assert!(
                DomainKind::BlobWithHole.contains(p),
                "sampled point {p:?} outside blob"
            );
        }
        assert_eq!(cloud, s.sample(831).unwrap());
    }

    #[test]
    fn blob_membership_cases() {
        let blob = DomainKind::BlobWithHole;
        // The hole center and its immediate neighborhood are excluded.
        assert!(!blob.contains(&BLOB_HOLE_CENTER));
        assert!(!blob.contains(&[0.17, 0.17 + 0.05]));
        // The blob's own center point is inside (well clear of the hole).
        assert!(blob.contains(&[0.1, 0.0]));
        // Far outside the bounding box.
        assert!(!blob.contains(&[1.0, 0.0]));
        assert!(!blob.contains(&[0.1, -0.79]));
        // Wrong dimension is simply "not a member".
        assert!(!blob.contains(&[0.1]));
    }

    #[test]
    fn fill_distance_examples() {
        let candidates = cloud1(&[0.0, 0.25, 0.5, 0.75, 1.0]);
        let centers = cloud1(&[0.0, 1.0]);
        assert_relative_eq!(fill_distance(&candidates, &centers).unwrap(), 0.5);
        // Centers covering everything give fill 0.
        assert_relative_eq!(fill_distance(&candidates, &candidates).unwrap(), 0.0);
        assert!(matches!(
            fill_distance(&candidates, &PointCloud::new(1, vec![]).unwrap()),
            Err(Error::EmptySet)
        ));
        let centers2 = PointCloud::new(2, vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            fill_distance(&candidates, &centers2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn separation_distance_examples() {
        let c = PointCloud::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0], vec![10.0, 0.0]]).unwrap();
        assert_relative_eq!(separation_distance(&c).unwrap(), 5.0);
        assert!(matches!(
            separation_distance(&cloud1(&[0.3])),
            Err(Error::TooFewPoints(1))
        ));
    }

    #[test]
    fn uniformity_of_even_centers() {
        // 1001-point grid on [0, 1]; centers {0, 1/2, 1}: fill = 1/4 and
        // separation = 1/2, so the uniformity constant is exactly 1/2.
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        let candidates = cloud1(&grid);
        let centers = cloud1(&[0.0, 0.5, 1.0]);
        assert_relative_eq!(fill_distance(&candidates, &centers).unwrap(), 0.25);
        assert_relative_eq!(separation_distance(&centers).unwrap(), 0.5);
        assert_relative_eq!(uniformity_constant(&candidates, &centers).unwrap(), 0.5);
    }

    #[test]
    fn csv_round_trip() {
        let cloud = PointCloud::from_rows(&[vec![0.1, 0.2], vec![1.0 / 3.0, -5e-17]]).unwrap();
        let mut buf = Vec::new();
        cloud
            .write_csv(&mut buf, &[("domain", "test".to_string())])
            .unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# dim=2"));
        assert!(text.contains("x0,x1"));
        let back = PointCloud::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(cloud, back);
    }

    #[test]
    fn csv_rejects_bad_header() {
        let r = std::io::Cursor::new(b"a,b\n1,2\n".to_vec());
        assert!(matches!(PointCloud::read_csv(r), Err(Error::Parse { .. })));
        let ragged = std::io::Cursor::new(b"x0,x1\n1,2\n3\n".to_vec());
        assert!(PointCloud::read_csv(ragged).is_err());
    }

    #[test]
    fn json_round_trip() {
        let cloud = PointCloud::from_rows(&[vec![0.25, -1.0], vec![2.0, 3.5]]).unwrap();
        let mut buf = Vec::new();
        cloud.write_json(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\"dim\":2"));
        let back = PointCloud::read_json(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(cloud, back);
        let bad = br#"{"dim":2,"points":[[1.0]]}"#;
        assert!(PointCloud::read_json(std::io::Cursor::new(bad.to_vec())).is_err());
    }

    proptest! {
        /// The streaming implementations agree exactly with naive
        /// double-loop oracles (same pairwise distances, so the min/max
        /// chains produce bitwise-equal results).
        #[test]
        fn distances_match_brute_force(
            cand in proptest::collection::vec(-10.0f64..10.0, 2..40),
            cent in proptest::collection::vec(-10.0f64..10.0, 2..12),
        ) {
            let candidates = cloud1(&cand);
            let centers = cloud1(&cent);

            let mut oracle_fill = 0.0f64;
            for &c in &cand {
                let mut nearest = f64::INFINITY;
                for &z in &cent {
                    nearest = nearest.min((c - z).abs());
                }
                oracle_fill = oracle_fill.max(nearest);
            }
            prop_assert_eq!(fill_distance(&candidates, &centers).unwrap(), oracle_fill);

            let mut oracle_sep = f64::INFINITY;
            for i in 0..cent.len() {
                for j in (i + 1)..cent.len() {
                    oracle_sep = oracle_sep.min((cent[i] - cent[j]).abs());
                }
            }
            prop_assert_eq!(separation_distance(&centers).unwrap(), oracle_sep);
        }

        #[test]
        fn distances_match_brute_force_2d(
            pts in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..25),
        ) {
            let rows: Vec<Vec<f64>> = pts.iter().map(|&(a, b)| vec![a, b]).collect();
            let cloud = PointCloud::from_rows(&rows).unwrap();
            let centers = cloud.subset(&[0, 1, 2]);

            let euclid = |p: &[f64], q: &[f64]| {
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
            };
            let mut oracle_fill = 0.0f64;
            for row in &rows {
                let mut nearest = f64::INFINITY;
                for c in 0..3 {
                    nearest = nearest.min(euclid(row, centers.point(c)));
                }
                oracle_fill = oracle_fill.max(nearest);
            }
            prop_assert_eq!(fill_distance(&cloud, &centers).unwrap(), oracle_fill);
        }
    }
}
