//! Per-frame measurements as they arrive from a platform log.

use crate::camera::{CameraIntrinsics, Pixel, PlatformPose, ProjectionMatrix};
use crate::error::Result;
use crate::fusion::ObservationSet;
use crate::range::RangeObservation;
use crate::vision::VisionObservation;

/// One track point: platform pose, target pixel and optional laser range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackFrame {
    pub pose: PlatformPose,
    pub pixel: Pixel,
    pub range: Option<f64>,
}

/// Projection matrices from `camera` and each pose; range stations at the
/// pose positions.
pub fn observation_set_from_frames(camera: &CameraIntrinsics, frames: &[TrackFrame]) -> Result<ObservationSet> {
    camera.validate()?;
    let mut vision = Vec::with_capacity(frames.len());
    let mut ranges = Vec::new();
    let mut range_frames = Vec::new();
    for (i, f) in frames.iter().enumerate() {
        let projection = ProjectionMatrix::build(camera, &f.pose);
        vision.push(VisionObservation::new(projection, f.pixel)?);
        if let Some(d) = f.range {
            ranges.push(RangeObservation::new(f.pose.position(), d)?);
            range_frames.push(i);
        }
    }
    ObservationSet::with_range_frames(vision, ranges, range_frames)
}
