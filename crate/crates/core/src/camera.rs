//! Pinhole projection model and the linear forward-intersection initializer.
//!
//! World coordinates are local ENU meters. A [`PlatformPose`] stores the
//! world→camera rotation; the projection matrix is `M = K·[R | −R·S]` where
//! `S` is the platform (camera center) position.

use nalgebra::{DMatrix, Matrix3, Matrix3x4, Rotation3, RowVector4, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{rank_with_tolerance, DEFAULT_RANK_TOLERANCE};

/// A point in the world frame, meters.
pub type Point3 = Vector3<f64>;

/// Depths with magnitude at or below this are treated as the focal plane.
pub const DEPTH_EPSILON: f64 = 1e-9;

/// Image coordinates in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pixel {
    pub x: f64,
    pub y: f64,
}

impl Pixel {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    #[serde(default)]
    pub skew: f64,
}

impl Default for CameraIntrinsics {
    /// Narrow-field tracking sensor used by the simulator.
    fn default() -> Self {
        Self {
            fx: 8000.0,
            fy: 8000.0,
            cx: 0.0,
            cy: 0.0,
            skew: 0.0,
        }
    }
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            skew: 0.0,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.fx, self.fy, self.cx, self.cy, self.skew];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("camera intrinsics"));
        }
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "focal lengths must be positive, got fx={} fy={}",
                self.fx, self.fy
            )));
        }
        Ok(())
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.fx, self.skew, self.cx, //
            0.0, self.fy, self.cy, //
            0.0, 0.0, 1.0,
        )
    }
}

/// Platform position plus world→camera attitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformPose {
    position: Point3,
    rotation: UnitQuaternion<f64>,
}

impl PlatformPose {
    pub fn new(position: Point3, rotation: UnitQuaternion<f64>) -> Result<Self> {
        if !position.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("pose position"));
        }
        let q = rotation.quaternion();
        if !q.coords.iter().all(|v| v.is_finite()) || (q.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("pose rotation is not a unit quaternion".into()));
        }
        Ok(Self { position, rotation })
    }

    /// Builds a pose from yaw, pitch, roll in degrees (Z-Y-X intrinsic),
    /// describing the world→camera rotation `Rz(yaw)·Ry(pitch)·Rx(roll)`.
    pub fn from_ypr_deg(position: Point3, yaw: f64, pitch: f64, roll: f64) -> Result<Self> {
        if ![yaw, pitch, roll].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("pose angles"));
        }
        let q = UnitQuaternion::from_euler_angles(roll.to_radians(), pitch.to_radians(), yaw.to_radians());
        Self::new(position, q)
    }

    /// Builds a pose from an explicit world→camera rotation matrix.
    pub fn from_rotation_matrix(position: Point3, r: &Matrix3<f64>) -> Result<Self> {
        let ortho = (r.transpose() * r - Matrix3::identity()).abs().max();
        if !r.iter().all(|v| v.is_finite()) || ortho > 1e-9 || (r.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("rotation matrix is not a proper rotation".into()));
        }
        let rot = Rotation3::from_matrix_unchecked(*r);
        Self::new(position, UnitQuaternion::from_rotation_matrix(&rot))
    }

    /// Pose at `position` whose optical axis points at `target`.
    ///
    /// Camera x is horizontal (perpendicular to the line of sight and world
    /// up), camera y completes a right-handed frame pointing image-down.
    pub fn looking_at(position: Point3, target: &Point3) -> Result<Self> {
        let forward = target - position;
        let dist = forward.norm();
        if dist <= DEPTH_EPSILON {
            return Err(Error::InvalidInput("pose coincides with its look-at target".into()));
        }
        let z = forward / dist;
        let up = Vector3::z();
        let mut x = z.cross(&up);
        if x.norm() < 1e-12 {
            // Nadir view: any horizontal axis works.
            x = Vector3::x();
        }
        let x = x.normalize();
        let y = z.cross(&x);
        let r = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
        Self::from_rotation_matrix(position, &r)
    }

    pub fn position(&self) -> Point3 {
        self.position
    }

    pub fn rotation(&self) -> UnitQuaternion<f64> {
        self.rotation
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.rotation.to_rotation_matrix().into_inner()
    }

    /// `T = −R·S`.
    pub fn translation(&self) -> Vector3<f64> {
        -(self.rotation_matrix() * self.position)
    }

    /// (yaw, pitch, roll) in degrees, inverse of [`PlatformPose::from_ypr_deg`].
    pub fn ypr_deg(&self) -> (f64, f64, f64) {
        let (roll, pitch, yaw) = self.rotation.euler_angles();
        (yaw.to_degrees(), pitch.to_degrees(), roll.to_degrees())
    }

    /// Unit optical axis in world coordinates.
    pub fn boresight(&self) -> Vector3<f64> {
        self.rotation_matrix().row(2).transpose()
    }

    pub fn with_position(&self, position: Point3) -> Self {
        Self {
            position,
            rotation: self.rotation,
        }
    }

    pub fn with_rotation(&self, rotation: UnitQuaternion<f64>) -> Self {
        Self {
            position: self.position,
            rotation,
        }
    }
}

/// The 3×4 world→pixel map of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionMatrix(Matrix3x4<f64>);

impl ProjectionMatrix {
    pub fn from_matrix(m: Matrix3x4<f64>) -> Result<Self> {
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("projection matrix"));
        }
        if m[(2, 0)] == 0.0 && m[(2, 1)] == 0.0 && m[(2, 2)] == 0.0 {
            return Err(Error::InvalidInput("projection matrix depth row is zero".into()));
        }
        Ok(Self(m))
    }

    /// `M = K·[R | T]`.
    pub fn build(k: &CameraIntrinsics, pose: &PlatformPose) -> Self {
        let mut rt = Matrix3x4::zeros();
        rt.fixed_view_mut::<3, 3>(0, 0).copy_from(&pose.rotation_matrix());
        rt.set_column(3, &pose.translation());
        Self(k.matrix() * rt)
    }

    pub fn matrix(&self) -> &Matrix3x4<f64> {
        &self.0
    }

    /// Row-major entry `m_index`, `index` in `0..12`.
    pub fn m(&self, index: usize) -> f64 {
        self.0[(index / 4, index % 4)]
    }

    /// Homogeneous image coordinates `(M₁, M₂, M₃)` of a world point.
    pub fn homogeneous(&self, x: &Point3) -> Vector3<f64> {
        self.0 * x.push(1.0)
    }

    /// Pixel of a world point; fails when the point sits in the focal plane.
    pub fn project(&self, x: &Point3) -> Result<Pixel> {
        let h = self.homogeneous(x);
        if h[2].abs() <= DEPTH_EPSILON {
            return Err(Error::DepthDegenerate { frame: 0 });
        }
        Ok(Pixel::new(h[0] / h[2], h[1] / h[2]))
    }

    /// Camera center: the null vector of `M`.
    pub fn camera_center(&self) -> Option<Point3> {
        let a = self.0.fixed_view::<3, 3>(0, 0).into_owned();
        let inv = a.try_inverse()?;
        Some(-(inv * self.0.column(3)))
    }

    /// Unit world-frame direction of the ray through `pixel`, pointing in
    /// front of the camera.
    pub fn ray_direction(&self, pixel: &Pixel) -> Option<Vector3<f64>> {
        let a = self.0.fixed_view::<3, 3>(0, 0).into_owned();
        let mut d = a.try_inverse()? * Vector3::new(pixel.x, pixel.y, 1.0);
        // Positive depth means the third row of M maps d to a positive value.
        if a.row(2).dot(&d.transpose()) < 0.0 {
            d = -d;
        }
        let n = d.norm();
        (n > 0.0).then(|| d / n)
    }
}

/// Output of [`forward_intersection`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangulation {
    pub point: Point3,
    /// Number of frames in which `point` lies in front of the camera.
    pub views_in_front: usize,
    /// False when fewer than a majority of frames see the point in front.
    pub cheirality_ok: bool,
}

/// Linear (DLT) triangulation of one point from `n ≥ 2` calibrated frames.
///
/// Each frame contributes `x̃·row3 − row1` and `ỹ·row3 − row2`; rows are
/// scaled to unit norm before stacking.
pub fn forward_intersection(projections: &[ProjectionMatrix], pixels: &[Pixel]) -> Result<Triangulation> {
    if projections.len() != pixels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} projections but {} pixels",
            projections.len(),
            pixels.len()
        )));
    }
    if projections.len() < 2 {
        return Err(Error::InsufficientViews(projections.len()));
    }
    if pixels.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::NonFinite("pixel"));
    }

    // Scale the homogeneous coordinate so all four columns carry similar
    // magnitudes: X = scale·X', which keeps the SVD well balanced when the
    // world coordinates are kilometers.
    let scale = projections
        .iter()
        .filter_map(|p| p.camera_center())
        .map(|c| c.norm())
        .fold(0.0_f64, f64::max)
        .max(1.0);

    let n = projections.len();
    let mut a = DMatrix::<f64>::zeros(2 * n, 4);
    for (i, (p, px)) in projections.iter().zip(pixels).enumerate() {
        let m = p.matrix();
        let r1: RowVector4<f64> = m.row(0).into_owned();
        let r2: RowVector4<f64> = m.row(1).into_owned();
        let r3: RowVector4<f64> = m.row(2).into_owned();
        for (k, row) in [r3 * px.x - r1, r3 * px.y - r2].into_iter().enumerate() {
            let mut row = row;
            row[0] *= scale;
            row[1] *= scale;
            row[2] *= scale;
            let norm = row.norm();
            if norm > 0.0 {
                row /= norm;
            }
            a.set_row(2 * i + k, &row);
        }
    }

    if rank_with_tolerance(&a, DEFAULT_RANK_TOLERANCE)? < 3 {
        return Err(Error::DegenerateGeometry(
            "linear triangulation system has rank below 3".into(),
        ));
    }

    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let h = v_t.row(idx);
    if h[3].abs() <= 1e-12 * h.norm() {
        return Err(Error::DegenerateGeometry(
            "rays are parallel, intersection at infinity".into(),
        ));
    }
    let point = Vector3::new(h[0], h[1], h[2]) * (scale / h[3]);

    let views_in_front = projections.iter().filter(|p| p.homogeneous(&point)[2] > 0.0).count();

    Ok(Triangulation {
        point,
        views_in_front,
        cheirality_ok: 2 * views_in_front > n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_projection(t: Vector3<f64>) -> ProjectionMatrix {
        let mut m = Matrix3x4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&Matrix3::identity());
        m.set_column(3, &t);
        ProjectionMatrix::from_matrix(m).unwrap()
    }

    #[test]
    fn unit_intrinsics_identity_pose_gives_canonical_projection() {
        let k = CameraIntrinsics::new(1.0, 1.0, 0.0, 0.0).unwrap();
        let pose = PlatformPose::new(Point3::zeros(), UnitQuaternion::identity()).unwrap();
        let m = ProjectionMatrix::build(&k, &pose);
        assert_eq!(m, identity_projection(Vector3::zeros()));
    }

    #[test]
    fn intrinsics_appear_directly_in_projection() {
        let k = CameraIntrinsics::new(1000.0, 1000.0, 320.0, 240.0).unwrap();
        let pose = PlatformPose::new(Point3::zeros(), UnitQuaternion::identity()).unwrap();
        let m = ProjectionMatrix::build(&k, &pose);
        let expected = Matrix3x4::new(
            1000.0, 0.0, 320.0, 0.0, //
            0.0, 1000.0, 240.0, 0.0, //
            0.0, 0.0, 1.0, 0.0,
        );
        assert_eq!(*m.matrix(), expected);
        assert_eq!(m.m(2), 320.0);
        assert_eq!(m.m(10), 1.0);
    }

    #[test]
    fn project_examples() {
        let m = identity_projection(Vector3::zeros());
        let p = m.project(&Point3::new(2.0, 3.0, 4.0)).unwrap();
        assert_eq!(p, Pixel::new(0.5, 0.75));
        assert!(matches!(
            m.project(&Point3::new(1.0, 1.0, 0.0)),
            Err(Error::DepthDegenerate { .. })
        ));
    }

    #[test]
    fn invalid_intrinsics_and_matrices_are_rejected() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(CameraIntrinsics::new(1.0, f64::NAN, 0.0, 0.0).is_err());
        assert!(ProjectionMatrix::from_matrix(Matrix3x4::zeros()).is_err());
    }

    #[test]
    fn two_ray_intersection() {
        let m1 = identity_projection(Vector3::zeros());
        let m2 = identity_projection(Vector3::new(-1.0, 0.0, 0.0));
        let tri = forward_intersection(&[m1, m2], &[Pixel::new(0.0, 0.0), Pixel::new(-0.2, 0.0)]).unwrap();
        assert!((tri.point - Point3::new(0.0, 0.0, 5.0)).norm() < 1e-12);
        assert!(tri.cheirality_ok);
        assert_eq!(tri.views_in_front, 2);
    }

    #[test]
    fn single_view_is_insufficient() {
        let m1 = identity_projection(Vector3::zeros());
        assert_eq!(
            forward_intersection(&[m1], &[Pixel::default()]),
            Err(Error::InsufficientViews(1))
        );
    }

    #[test]
    fn parallel_rays_are_degenerate() {
        let m1 = identity_projection(Vector3::zeros());
        let m2 = identity_projection(Vector3::new(-1.0, 0.0, 0.0));
        let res = forward_intersection(&[m1, m2], &[Pixel::new(0.0, 0.0), Pixel::new(0.0, 0.0)]);
        assert!(matches!(res, Err(Error::DegenerateGeometry(_))), "{res:?}");
    }

    #[test]
    fn point_behind_cameras_is_flagged() {
        let m1 = identity_projection(Vector3::zeros());
        let m2 = identity_projection(Vector3::new(-1.0, 0.0, 0.0));
        // Same rays as the (0,0,5) case but mirrored behind the cameras.
        let tri = forward_intersection(&[m1, m2], &[Pixel::new(0.0, 0.0), Pixel::new(0.2, 0.0)]).unwrap();
        assert!((tri.point - Point3::new(0.0, 0.0, -5.0)).norm() < 1e-12);
        assert!(!tri.cheirality_ok);
    }

    #[test]
    fn ypr_round_trip() {
        let pose = PlatformPose::from_ypr_deg(Point3::new(1.0, 2.0, 3.0), 30.0, -20.0, 10.0).unwrap();
        let (y, p, r) = pose.ypr_deg();
        assert!((y - 30.0).abs() < 1e-12 && (p + 20.0).abs() < 1e-12 && (r - 10.0).abs() < 1e-12);
        let rm = pose.rotation_matrix();
        assert!((rm.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn looking_at_puts_target_on_principal_point() {
        let k = CameraIntrinsics::new(800.0, 810.0, 320.0, 240.0).unwrap();
        let target = Point3::new(10.0, -20.0, 0.0);
        let pose = PlatformPose::looking_at(Point3::new(4000.0, 2000.0, 2000.0), &target).unwrap();
        let px = ProjectionMatrix::build(&k, &pose).project(&target).unwrap();
        assert!((px.x - 320.0).abs() < 1e-9 && (px.y - 240.0).abs() < 1e-9);
        let nadir = PlatformPose::looking_at(Point3::new(0.0, 0.0, 100.0), &Point3::zeros()).unwrap();
        assert!((nadir.boresight() + Vector3::z()).norm() < 1e-12);
    }

    #[test]
    fn camera_center_and_ray() {
        let k = CameraIntrinsics::new(800.0, 800.0, 320.0, 240.0).unwrap();
        let s = Point3::new(100.0, 50.0, 300.0);
        let pose = PlatformPose::from_ypr_deg(s, 10.0, 5.0, -3.0).unwrap();
        let m = ProjectionMatrix::build(&k, &pose);
        assert!((m.camera_center().unwrap() - s).norm() < 1e-9);
        let x = s + pose.boresight() * 500.0 + Vector3::new(20.0, -10.0, 5.0);
        let px = m.project(&x).unwrap();
        let ray = m.ray_direction(&px).unwrap();
        assert!((ray - (x - s).normalize()).norm() < 1e-12);
    }
}
