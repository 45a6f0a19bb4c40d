//! Observation logs as comma-separated text.
//!
//! Columns are matched by header name, so their order is free:
//!
//! ```text
//! obs_id,px_x,px_y,range_m,pos_x,pos_y,pos_z,yaw_deg,pitch_deg,roll_deg
//! 1,0.12,-0.40,5001.3,2012.5,-4221.0,2003.1,-25.3,-66.4,0.0
//! 2,0.08,-0.31,,2410.2,-4002.7,1998.4,-31.0,-66.5,0.1
//! ```
//!
//! An empty `range_m` cell marks a vision-only row. Angles are degrees,
//! world→camera, yaw about Z then pitch about Y then roll about X.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, IoError, IoResult};
use crate::camera::{CameraIntrinsics, Pixel, PlatformPose, Point3};
use crate::fusion::ObservationSet;
use crate::track::{observation_set_from_frames, TrackFrame};

pub const COLUMNS: [&str; 10] = [
    "obs_id",
    "px_x",
    "px_y",
    "range_m",
    "pos_x",
    "pos_y",
    "pos_z",
    "yaw_deg",
    "pitch_deg",
    "roll_deg",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationRecord {
    pub obs_id: i64,
    pub px_x: f64,
    pub px_y: f64,
    pub range_m: Option<f64>,
    pub pos_x: f64,
    pub pos_y: f64,
    pub pos_z: f64,
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub roll_deg: f64,
}

impl ObservationRecord {
    pub fn from_frame(obs_id: i64, frame: &TrackFrame) -> Self {
        let p = frame.pose.position();
        let (yaw_deg, pitch_deg, roll_deg) = frame.pose.ypr_deg();
        Self {
            obs_id,
            px_x: frame.pixel.x,
            px_y: frame.pixel.y,
            range_m: frame.range,
            pos_x: p.x,
            pos_y: p.y,
            pos_z: p.z,
            yaw_deg,
            pitch_deg,
            roll_deg,
        }
    }

    pub fn to_frame(&self) -> crate::error::Result<TrackFrame> {
        let pose = PlatformPose::from_ypr_deg(
            Point3::new(self.pos_x, self.pos_y, self.pos_z),
            self.yaw_deg,
            self.pitch_deg,
            self.roll_deg,
        )?;
        Ok(TrackFrame {
            pose,
            pixel: Pixel::new(self.px_x, self.px_y),
            range: self.range_m,
        })
    }

    fn finite(&self) -> bool {
        [
            self.px_x,
            self.px_y,
            self.pos_x,
            self.pos_y,
            self.pos_z,
            self.yaw_deg,
            self.pitch_deg,
            self.roll_deg,
        ]
        .iter()
        .chain(self.range_m.iter())
        .all(|v| v.is_finite())
    }
}

fn schema(row: usize, message: impl Into<String>) -> IoError {
    IoError::Schema {
        row,
        message: message.into(),
    }
}

/// Parses and checks rows without building solver inputs.
pub fn read_observation_records<R: std::io::Read>(reader: R) -> IoResult<Vec<ObservationRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| schema(0, e.to_string()))?.clone();
    for name in &headers {
        if !COLUMNS.contains(&name) {
            return Err(schema(0, format!("unknown column `{name}`")));
        }
    }
    for name in COLUMNS {
        if !headers.iter().any(|h| h == name) {
            return Err(schema(0, format!("missing column `{name}`")));
        }
    }

    let mut records: Vec<ObservationRecord> = Vec::new();
    for (i, row) in rdr.deserialize::<ObservationRecord>().enumerate() {
        let row_no = i + 1;
        let rec = row.map_err(|e| {
            let detail = match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => match err.field() {
                    Some(f) => format!("column `{}`: {}", headers.get(f as usize).unwrap_or("?"), err.kind()),
                    None => err.kind().to_string(),
                },
                _ => e.to_string(),
            };
            schema(row_no, detail)
        })?;
        if !rec.finite() {
            return Err(schema(row_no, "non-finite value"));
        }
        if let Some(prev) = records.last() {
            if rec.obs_id <= prev.obs_id {
                return Err(schema(
                    row_no,
                    format!("obs_id {} does not increase after {}", rec.obs_id, prev.obs_id),
                ));
            }
        }
        records.push(rec);
    }
    Ok(records)
}

/// Reads an observation log; row `i` becomes frame `i`.
pub fn load_observations(path: &Path, camera: &CameraIntrinsics) -> IoResult<ObservationSet> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let records = read_observation_records(file)?;
    observations_from_records(&records, camera)
}

pub fn observations_from_records(records: &[ObservationRecord], camera: &CameraIntrinsics) -> IoResult<ObservationSet> {
    let ranged = records.iter().filter(|r| r.range_m.is_some()).count();
    if ranged < 2 {
        return Err(IoError::InsufficientRangedRows(ranged));
    }
    let frames = records
        .iter()
        .enumerate()
        .map(|(i, r)| r.to_frame().map_err(|e| schema(i + 1, e.to_string())))
        .collect::<IoResult<Vec<_>>>()?;
    Ok(observation_set_from_frames(camera, &frames)?)
}

/// Writes frames with `obs_id` counting from 1.
pub fn write_observations(path: &Path, frames: &[TrackFrame]) -> IoResult<()> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    for (i, frame) in frames.iter().enumerate() {
        w.serialize(ObservationRecord::from_frame(i as i64 + 1, frame))
            .map_err(|e| IoError::InsufficientData(e.to_string()))?;
    }
    w.flush().map_err(io_err(path))
}
