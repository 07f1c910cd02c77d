//! Point-cloud geometry: depth-image back-projection, surface normal
//! estimation, torso/head segmentation and voxel partitioning.
//!
//! Coordinates are millimetres throughout. The sensor sits at the origin
//! looking down +z; the y axis points up (image rows increase downward, so
//! back-projection flips the sign).

mod kdtree;

pub use kdtree::KdTree3;

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Vector3, Vector6};
use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg;

/// Normals must be unit length to within this tolerance.
pub const UNIT_NORMAL_TOL: f64 = 1e-6;
/// Orthogonality/determinant tolerance for rotation matrices.
pub const ROTATION_TOL: f64 = 1e-10;
/// Arm-exclusion margin as a fraction of the shoulder span.
const SHOULDER_MARGIN_FRAC: f64 = 0.05;

/// Pinhole camera intrinsics, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::InvalidIntrinsics(format!(
                "focal lengths must be positive (fx={}, fy={})",
                self.fx, self.fy
            )));
        }
        if !(self.cx.is_finite() && self.cy.is_finite()) {
            return Err(Error::InvalidIntrinsics(
                "principal point must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Row-major depth frame in millimetres; a zero sample marks an invalid pixel.
#[derive(Debug, Clone)]
pub struct DepthImage {
    pub width: usize,
    pub height: usize,
    pub depth: Vec<u16>,
    pub intrinsics: Intrinsics,
}

impl DepthImage {
    pub fn new(
        width: usize,
        height: usize,
        depth: Vec<u16>,
        intrinsics: Intrinsics,
    ) -> Result<Self> {
        if depth.len() != width * height {
            return Err(Error::Format(format!(
                "depth buffer has {} samples, expected {}x{}={}",
                depth.len(),
                width,
                height,
                width * height
            )));
        }
        Ok(DepthImage {
            width,
            height,
            depth,
            intrinsics,
        })
    }
}

/// A set of 3-d surface points with optional unit normals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    points: Vec<Vector3<f64>>,
    normals: Option<Vec<Vector3<f64>>>,
}

impl PointCloud {
    pub fn from_points(points: Vec<Vector3<f64>>) -> Self {
        PointCloud {
            points,
            normals: None,
        }
    }

    /// Builds a cloud with normals, validating lengths and unit norms.
    pub fn with_normals(points: Vec<Vector3<f64>>, normals: Vec<Vector3<f64>>) -> Result<Self> {
        if points.len() != normals.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} points vs {} normals",
                points.len(),
                normals.len()
            )));
        }
        for (i, n) in normals.iter().enumerate() {
            if (n.norm() - 1.0).abs() > UNIT_NORMAL_TOL {
                return Err(Error::InvalidParam(format!(
                    "normal {} has norm {}, expected 1",
                    i,
                    n.norm()
                )));
            }
        }
        Ok(PointCloud {
            points,
            normals: Some(normals),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn normals(&self) -> Option<&[Vector3<f64>]> {
        self.normals.as_deref()
    }

    /// Point + unit normal stacked as `[x, y, z, nx, ny, nz]`.
    pub fn feature_vectors(&self) -> Result<Vec<Vector6<f64>>> {
        let normals = self.normals().ok_or(Error::MissingNormals)?;
        Ok(self
            .points
            .iter()
            .zip(normals)
            .map(|(p, n)| Vector6::new(p.x, p.y, p.z, n.x, n.y, n.z))
            .collect())
    }

    /// Sub-cloud holding the given point indices (normals carried along).
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| indices.iter().map(|&i| ns[i]).collect()),
        }
    }
}

/// Named skeleton joint positions in millimetres. Foot joints are optional;
/// everything else is required.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonJoints {
    pub head: Vector3<f64>,
    pub neck: Vector3<f64>,
    pub left_shoulder: Vector3<f64>,
    pub right_shoulder: Vector3<f64>,
    pub left_elbow: Vector3<f64>,
    pub right_elbow: Vector3<f64>,
    pub left_hand: Vector3<f64>,
    pub right_hand: Vector3<f64>,
    pub torso: Vector3<f64>,
    pub left_hip: Vector3<f64>,
    pub right_hip: Vector3<f64>,
    pub left_knee: Vector3<f64>,
    pub right_knee: Vector3<f64>,
    pub left_foot: Option<Vector3<f64>>,
    pub right_foot: Option<Vector3<f64>>,
}

pub const REQUIRED_JOINTS: [&str; 13] = [
    "head",
    "neck",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_hand",
    "right_hand",
    "torso",
    "left_hip",
    "right_hip",
    "left_knee",
    "right_knee",
];

impl SkeletonJoints {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.iter_required() {
            if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                return Err(Error::DegenerateSkeleton(format!(
                    "joint `{name}` has non-finite coordinates"
                )));
            }
        }
        Ok(())
    }

    pub fn iter_required(&self) -> impl Iterator<Item = (&'static str, Vector3<f64>)> + '_ {
        [
            ("head", self.head),
            ("neck", self.neck),
            ("left_shoulder", self.left_shoulder),
            ("right_shoulder", self.right_shoulder),
            ("left_elbow", self.left_elbow),
            ("right_elbow", self.right_elbow),
            ("left_hand", self.left_hand),
            ("right_hand", self.right_hand),
            ("torso", self.torso),
            ("left_hip", self.left_hip),
            ("right_hip", self.right_hip),
            ("left_knee", self.left_knee),
            ("right_knee", self.right_knee),
        ]
        .into_iter()
    }

    pub fn from_named(map: &BTreeMap<String, [f64; 3]>) -> Result<Self> {
        let get = |name: &str| -> Result<Vector3<f64>> {
            let v = map
                .get(name)
                .ok_or_else(|| Error::MissingJoint(name.to_string()))?;
            Ok(Vector3::new(v[0], v[1], v[2]))
        };
        let opt = |name: &str| -> Option<Vector3<f64>> {
            map.get(name).map(|v| Vector3::new(v[0], v[1], v[2]))
        };
        let joints = SkeletonJoints {
            head: get("head")?,
            neck: get("neck")?,
            left_shoulder: get("left_shoulder")?,
            right_shoulder: get("right_shoulder")?,
            left_elbow: get("left_elbow")?,
            right_elbow: get("right_elbow")?,
            left_hand: get("left_hand")?,
            right_hand: get("right_hand")?,
            torso: get("torso")?,
            left_hip: get("left_hip")?,
            right_hip: get("right_hip")?,
            left_knee: get("left_knee")?,
            right_knee: get("right_knee")?,
            left_foot: opt("left_foot"),
            right_foot: opt("right_foot"),
        };
        joints.validate()?;
        Ok(joints)
    }

    pub fn to_named(&self) -> BTreeMap<String, [f64; 3]> {
        let mut map = BTreeMap::new();
        for (name, v) in self.iter_required() {
            map.insert(name.to_string(), [v.x, v.y, v.z]);
        }
        if let Some(f) = self.left_foot {
            map.insert("left_foot".into(), [f.x, f.y, f.z]);
        }
        if let Some(f) = self.right_foot {
            map.insert("right_foot".into(), [f.x, f.y, f.z]);
        }
        map
    }

    /// Translate every joint by `offset`.
    pub fn translated(&self, offset: Vector3<f64>) -> Self {
        self.transformed(|p| p + offset)
    }

    pub fn transformed(&self, f: impl Fn(Vector3<f64>) -> Vector3<f64>) -> Self {
        SkeletonJoints {
            head: f(self.head),
            neck: f(self.neck),
            left_shoulder: f(self.left_shoulder),
            right_shoulder: f(self.right_shoulder),
            left_elbow: f(self.left_elbow),
            right_elbow: f(self.right_elbow),
            left_hand: f(self.left_hand),
            right_hand: f(self.right_hand),
            torso: f(self.torso),
            left_hip: f(self.left_hip),
            right_hip: f(self.right_hip),
            left_knee: f(self.left_knee),
            right_knee: f(self.right_knee),
            left_foot: self.left_foot.map(&f),
            right_foot: self.right_foot.map(&f),
        }
    }
}

impl Serialize for SkeletonJoints {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_named().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SkeletonJoints {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, [f64; 3]>::deserialize(deserializer)?;
        SkeletonJoints::from_named(&map).map_err(D::Error::custom)
    }
}

/// Rectangular voxel partition of a point cloud over the (x, y) plane.
/// The z extent is never subdivided. Cells are laid out row-major with row 0
/// at `y_min`; the overlapped variant steps cells by half their size.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    rows: usize,
    cols: usize,
    overlapped: bool,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    cells: Vec<Vec<usize>>,
}

impl VoxelGrid {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn overlapped(&self) -> bool {
        self.overlapped
    }

    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        (self.x_min, self.x_max, self.y_min, self.y_max)
    }

    /// Lattice dimensions: `(rows, cols)` plain, `(2r-1, 2c-1)` overlapped.
    pub fn lattice_dims(&self) -> (usize, usize) {
        if self.overlapped {
            (2 * self.rows - 1, 2 * self.cols - 1)
        } else {
            (self.rows, self.cols)
        }
    }

    pub fn cell_count(&self) -> usize {
        let (r, c) = self.lattice_dims();
        r * c
    }

    pub fn cell(&self, idx: usize) -> &[usize] {
        &self.cells[idx]
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }
}

/// A rigid viewpoint change: one rotation for coordinates, one for normals,
/// plus a pre-rotation translation applied to coordinates only.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidMotion {
    pub coord_rotation: Matrix3<f64>,
    pub normal_rotation: Matrix3<f64>,
    pub shift: Vector3<f64>,
}

impl RigidMotion {
    pub fn identity() -> Self {
        RigidMotion {
            coord_rotation: Matrix3::identity(),
            normal_rotation: Matrix3::identity(),
            shift: Vector3::zeros(),
        }
    }

    pub fn new(
        coord_rotation: Matrix3<f64>,
        normal_rotation: Matrix3<f64>,
        shift: Vector3<f64>,
    ) -> Result<Self> {
        let m = RigidMotion {
            coord_rotation,
            normal_rotation,
            shift,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("coordinate", &self.coord_rotation),
            ("normal", &self.normal_rotation),
        ] {
            let dev = (r * r.transpose() - Matrix3::identity()).abs().max();
            if dev > ROTATION_TOL {
                return Err(Error::InvalidParam(format!(
                    "{name} rotation is not orthogonal (deviation {dev:.3e})"
                )));
            }
            let det = r.determinant();
            if (det - 1.0).abs() > ROTATION_TOL {
                return Err(Error::InvalidParam(format!(
                    "{name} rotation has determinant {det}, expected +1"
                )));
            }
        }
        Ok(())
    }

    /// Motion undoing this one: `x -> R^T x - shift`.
    pub fn inverse(&self) -> RigidMotion {
        RigidMotion {
            coord_rotation: self.coord_rotation.transpose(),
            normal_rotation: self.normal_rotation.transpose(),
            shift: -(self.coord_rotation * self.shift),
        }
    }

    /// Random motion with independent coordinate/normal rotations and a shift
    /// of at most `max_shift` per axis.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_shift: f64) -> RigidMotion {
        RigidMotion {
            coord_rotation: random_rotation(rng),
            normal_rotation: random_rotation(rng),
            shift: Vector3::new(
                rng.random_range(-max_shift..=max_shift),
                rng.random_range(-max_shift..=max_shift),
                rng.random_range(-max_shift..=max_shift),
            ),
        }
    }

    /// Apply the motion to a stacked `[x y z nx ny nz]` feature vector.
    pub fn apply_feature(&self, f: &Vector6<f64>) -> Vector6<f64> {
        let p = self.coord_rotation * (Vector3::new(f[0], f[1], f[2]) + self.shift);
        let n = self.normal_rotation * Vector3::new(f[3], f[4], f[5]);
        Vector6::new(p.x, p.y, p.z, n.x, n.y, n.z)
    }
}

/// Uniformly distributed random rotation (axis-angle with random unit axis).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
    use crate::linalg::std_normal;
    let mut axis = Vector3::new(std_normal(rng), std_normal(rng), std_normal(rng));
    while axis.norm() < 1e-9 {
        axis = Vector3::new(std_normal(rng), std_normal(rng), std_normal(rng));
    }
    axis.normalize_mut();
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    *nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle).matrix()
}

/// Back-project a depth image through its pinhole intrinsics. Zero-depth
/// pixels are skipped; the result has no normals.
pub fn depth_to_pointcloud(img: &DepthImage) -> Result<PointCloud> {
    img.intrinsics.validate()?;
    if img.depth.len() != img.width * img.height {
        return Err(Error::Format("depth buffer size mismatch".into()));
    }
    let Intrinsics { fx, fy, cx, cy } = img.intrinsics;
    let mut points = Vec::new();
    for v in 0..img.height {
        for u in 0..img.width {
            let z = img.depth[v * img.width + u] as f64;
            if z <= 0.0 {
                continue;
            }
            let x = (u as f64 - cx) * z / fx;
            // Image rows grow downward; world y grows upward.
            let y = (cy - v as f64) * z / fy;
            points.push(Vector3::new(x, y, z));
        }
    }
    Ok(PointCloud::from_points(points))
}

/// Forward projection of a point with positive depth to pixel coordinates.
pub fn project_to_pixel(intrinsics: &Intrinsics, p: &Vector3<f64>) -> Result<(f64, f64)> {
    intrinsics.validate()?;
    if p.z <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "point depth must be positive, got {}",
            p.z
        )));
    }
    let u = intrinsics.cx + p.x * intrinsics.fx / p.z;
    let v = intrinsics.cy - p.y * intrinsics.fy / p.z;
    Ok((u, v))
}

/// Estimate unit surface normals from the k-nearest neighbourhood of each
/// point: the eigenvector of the smallest eigenvalue of the neighbourhood
/// covariance, oriented toward the sensor at the origin.
pub fn estimate_normals(cloud: &PointCloud, k: usize) -> Result<PointCloud> {
    if k < 3 {
        return Err(Error::InvalidParam(format!(
            "normal estimation needs k >= 3, got {k}"
        )));
    }
    let n = cloud.len();
    if n < k + 1 {
        return Err(Error::InsufficientPoints {
            need: k + 1,
            got: n,
        });
    }
    let points = cloud.points();
    let tree = KdTree3::build(points);
    let mut normals = Vec::with_capacity(n);
    for (i, p) in points.iter().enumerate() {
        let nbrs = tree.knn(p, k, Some(i));
        let count = (nbrs.len() + 1) as f64;
        let mut mean = *p;
        for &j in &nbrs {
            mean += points[j];
        }
        mean /= count;
        let mut cov = Matrix3::zeros();
        let d = p - mean;
        cov += d * d.transpose();
        for &j in &nbrs {
            let d = points[j] - mean;
            cov += d * d.transpose();
        }
        cov /= count - 1.0;
        if cov.trace() <= 1e-18 {
            return Err(Error::DegenerateNeighborhood);
        }
        let (_, vecs) = linalg::sym_eigen3_desc(&cov);
        // Least-scattered direction = smallest eigenvalue = last column.
        let mut normal = vecs.column(2).into_owned();
        normal.normalize_mut();
        // Sensor-facing: n . (-p) >= 0.
        if normal.dot(p) > 0.0 {
            normal = -normal;
        }
        normals.push(normal);
    }
    PointCloud::with_normals(points.to_vec(), normals)
}

/// Indices of points kept by torso/head segmentation: above the hip line, and
/// below neck height additionally within the laterally widened shoulder span.
pub fn segment_torso_head_indices(
    cloud: &PointCloud,
    joints: &SkeletonJoints,
) -> Result<Vec<usize>> {
    joints.validate()?;
    if cloud.is_empty() {
        return Err(Error::InsufficientPoints { need: 1, got: 0 });
    }
    let hip_y = joints.left_hip.y.min(joints.right_hip.y);
    let neck_y = joints.neck.y;
    let sx_lo = joints.left_shoulder.x.min(joints.right_shoulder.x);
    let sx_hi = joints.left_shoulder.x.max(joints.right_shoulder.x);
    let margin = SHOULDER_MARGIN_FRAC * (sx_hi - sx_lo);
    let kept: Vec<usize> = cloud
        .points()
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            p.y >= hip_y && (p.y >= neck_y || (p.x >= sx_lo - margin && p.x <= sx_hi + margin))
        })
        .map(|(i, _)| i)
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptySegment);
    }
    Ok(kept)
}

/// Torso + head sub-cloud; arms and legs are discarded.
pub fn segment_torso_head(cloud: &PointCloud, joints: &SkeletonJoints) -> Result<PointCloud> {
    Ok(cloud.select(&segment_torso_head_indices(cloud, joints)?))
}

/// Partition the (x, y) bounding box of `cloud` into `rows x cols` voxels.
/// With `overlapped` the same-size cells step by half a cell per axis, giving
/// a `(2 rows - 1) x (2 cols - 1)` lattice where a point can fall in up to
/// four cells. Boundary points belong to the higher-index cell; the outermost
/// edge is closed.
pub fn build_voxel_grid(
    cloud: &PointCloud,
    rows: usize,
    cols: usize,
    overlapped: bool,
) -> Result<VoxelGrid> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParam("grid must have rows, cols >= 1".into()));
    }
    if cloud.is_empty() {
        return Err(Error::InsufficientPoints { need: 1, got: 0 });
    }
    let pts = cloud.points();
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x_min = x_min.min(p.x);
        x_max = x_max.max(p.x);
        y_min = y_min.min(p.y);
        y_max = y_max.max(p.y);
    }
    if !(x_max - x_min > 0.0) {
        return Err(Error::DegenerateExtent("x"));
    }
    if !(y_max - y_min > 0.0) {
        return Err(Error::DegenerateExtent("y"));
    }
    let cell_w = (x_max - x_min) / cols as f64;
    let cell_h = (y_max - y_min) / rows as f64;

    let (lat_rows, lat_cols) = if overlapped {
        (2 * rows - 1, 2 * cols - 1)
    } else {
        (rows, cols)
    };
    let mut cells = vec![Vec::new(); lat_rows * lat_cols];

    if !overlapped {
        for (i, p) in pts.iter().enumerate() {
            let c = (((p.x - x_min) / cell_w).floor() as usize).min(cols - 1);
            let r = (((p.y - y_min) / cell_h).floor() as usize).min(rows - 1);
            cells[r * cols + c].push(i);
        }
    } else {
        // Cell c spans half-steps [c, c+2), so a point with half-step index
        // h = floor(t / half) belongs to cells {h-1, h}. Clamping h keeps the
        // outermost edge inside the last cell (closed upper boundary) without
        // any floating-point interval comparisons.
        let members = |t: f64, step: f64, last: usize| -> Vec<usize> {
            let half = step / 2.0;
            let h = ((t / half).floor() as isize).clamp(0, last as isize + 1);
            let mut out = Vec::with_capacity(2);
            for cand in [h - 1, h] {
                if cand >= 0 && cand as usize <= last {
                    out.push(cand as usize);
                }
            }
            out
        };
        for (i, p) in pts.iter().enumerate() {
            let xs = members(p.x - x_min, cell_w, lat_cols - 1);
            let ys = members(p.y - y_min, cell_h, lat_rows - 1);
            for &r in &ys {
                for &c in &xs {
                    cells[r * lat_cols + c].push(i);
                }
            }
        }
    }

    Ok(VoxelGrid {
        rows,
        cols,
        overlapped,
        x_min,
        x_max,
        y_min,
        y_max,
        cells,
    })
}

/// Unordered pairs of 8-adjacent cells of a non-overlapped grid, each pair
/// once, in lexicographic (low index, high index) order.
pub fn adjacent_voxel_pairs(grid: &VoxelGrid) -> Result<Vec<(usize, usize)>> {
    if grid.overlapped() {
        return Err(Error::WrongGridKind {
            expected: "non-overlapped",
        });
    }
    Ok(king_graph_edges(grid.rows(), grid.cols()))
}

/// Edges of the rows x cols king graph (8-adjacency), lexicographic order.
pub fn king_graph_edges(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            // Forward neighbours only, in ascending index order.
            if c + 1 < cols {
                pairs.push((i, i + 1));
            }
            if r + 1 < rows {
                if c > 0 {
                    pairs.push((i, i + cols - 1));
                }
                pairs.push((i, i + cols));
                if c + 1 < cols {
                    pairs.push((i, i + cols + 1));
                }
            }
        }
    }
    pairs
}

/// Move a cloud through a rigid viewpoint change: points get
/// `R1 (p + shift)`, normals get `R2 n`.
pub fn apply_rigid_motion(cloud: &PointCloud, motion: &RigidMotion) -> Result<PointCloud> {
    let normals = cloud.normals().ok_or(Error::MissingNormals)?;
    motion.validate()?;
    let points = cloud
        .points()
        .iter()
        .map(|p| motion.coord_rotation * (p + motion.shift))
        .collect();
    let normals = normals
        .iter()
        .map(|n| {
            let mut n = motion.normal_rotation * n;
            n.normalize_mut();
            n
        })
        .collect();
    PointCloud::with_normals(points, normals)
}
