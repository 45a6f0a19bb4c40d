//! Zero-mean Gaussian measurement noise.
//!
//! Draw order per frame is fixed: position x, y, z; attitude about camera
//! x, y, z; pixel x, y; range. Every draw is taken even when its sigma is
//! zero, so changing one sigma never shifts the stream of the others.
//! Attitude noise is `δR = Rz(εz)·Ry(εy)·Rx(εx)` applied on the camera side
//! of the world→camera rotation (X first, then Y, then Z).

use nalgebra::UnitQuaternion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::camera::{Pixel, Point3};
use crate::error::{Error, Result};
use crate::fusion::ObservationSet;
use crate::sim::scenario::Scenario;
use crate::track::{observation_set_from_frames, TrackFrame};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// Platform position, meters per axis.
    pub pos_sigma: f64,
    /// Laser range, meters.
    pub range_sigma: f64,
    /// Attitude, degrees per axis.
    pub rot_sigma: f64,
    /// Pixel extraction, pixels per coordinate.
    pub pixel_sigma: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            pos_sigma: 5.0,
            range_sigma: 2.5,
            rot_sigma: 0.2,
            pixel_sigma: 0.1,
        }
    }
}

impl NoiseSpec {
    pub fn zero() -> Self {
        Self {
            pos_sigma: 0.0,
            range_sigma: 0.0,
            rot_sigma: 0.0,
            pixel_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("pos_sigma", self.pos_sigma),
            ("range_sigma", self.range_sigma),
            ("rot_sigma", self.rot_sigma),
            ("pixel_sigma", self.pixel_sigma),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

fn draw(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    if sigma > 0.0 {
        sigma * z
    } else {
        0.0
    }
}

fn add(value: f64, noise: f64) -> f64 {
    if noise == 0.0 {
        value
    } else {
        value + noise
    }
}

/// Noisy copies of the frames handed to the solvers.
///
/// Pixels and ranges come from `obs`; poses are perturbed copies of the
/// scenario's true poses, so both the projection matrices and the range
/// stations reflect the navigation error.
pub fn perturb_frames(sc: &Scenario, obs: &ObservationSet, noise: &NoiseSpec, seed: u64) -> Result<Vec<TrackFrame>> {
    noise.validate()?;
    if sc.true_poses.len() != obs.len() {
        return Err(Error::DimensionMismatch(format!(
            "scenario has {} poses but observation set has {} frames",
            sc.true_poses.len(),
            obs.len()
        )));
    }
    let mut ranges: Vec<Option<f64>> = vec![None; obs.len()];
    for (&frame, r) in obs.range_frames().iter().zip(obs.ranges()) {
        ranges[frame] = Some(r.range);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sc.true_poses
        .iter()
        .zip(obs.vision())
        .zip(ranges)
        .map(|((pose, vis), range)| {
            let p = pose.position();
            let position = Point3::new(
                add(p.x, draw(&mut rng, noise.pos_sigma)),
                add(p.y, draw(&mut rng, noise.pos_sigma)),
                add(p.z, draw(&mut rng, noise.pos_sigma)),
            );
            let rot_sigma = noise.rot_sigma.to_radians();
            let ex = draw(&mut rng, rot_sigma);
            let ey = draw(&mut rng, rot_sigma);
            let ez = draw(&mut rng, rot_sigma);
            let rotation = if ex == 0.0 && ey == 0.0 && ez == 0.0 {
                pose.rotation()
            } else {
                UnitQuaternion::from_euler_angles(ex, ey, ez) * pose.rotation()
            };
            let pixel = Pixel::new(
                add(vis.pixel.x, draw(&mut rng, noise.pixel_sigma)),
                add(vis.pixel.y, draw(&mut rng, noise.pixel_sigma)),
            );
            let range_noise = draw(&mut rng, noise.range_sigma);
            Ok(TrackFrame {
                pose: pose.with_position(position).with_rotation(rotation),
                pixel,
                range: range.map(|d| add(d, range_noise)),
            })
        })
        .collect()
}

/// Observation set a solver sees after noise injection.
pub fn inject_noise(sc: &Scenario, obs: &ObservationSet, noise: &NoiseSpec, seed: u64) -> Result<ObservationSet> {
    observation_set_from_frames(&sc.camera, &perturb_frames(sc, obs, noise, seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::scenario::{generate_scenario, synthesize_observations, ScenarioSpec};

    fn fixture() -> (Scenario, ObservationSet) {
        let sc = generate_scenario(&ScenarioSpec::default()).unwrap();
        let obs = synthesize_observations(&sc).unwrap();
        (sc, obs)
    }

    #[test]
    fn zero_sigmas_leave_observations_unchanged() {
        let (sc, obs) = fixture();
        let noisy = inject_noise(&sc, &obs, &NoiseSpec::zero(), 7).unwrap();
        assert_eq!(noisy, obs);
    }

    #[test]
    fn same_seed_same_output() {
        let (sc, obs) = fixture();
        let a = inject_noise(&sc, &obs, &NoiseSpec::default(), 42).unwrap();
        let b = inject_noise(&sc, &obs, &NoiseSpec::default(), 42).unwrap();
        assert_eq!(a, b);
        let c = inject_noise(&sc, &obs, &NoiseSpec::default(), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn truth_is_not_mutated() {
        let (sc, obs) = fixture();
        let before = sc.clone();
        let _ = inject_noise(&sc, &obs, &NoiseSpec::default(), 1).unwrap();
        assert_eq!(sc, before);
    }

    #[test]
    fn range_noise_has_requested_spread() {
        // 10⁵ draws; the 99% chi-square band for the sample sd is about ±1.6%.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let samples: Vec<f64> = (0..n).map(|_| draw(&mut rng, 2.5)).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        assert!((2.46..=2.54).contains(&sd), "sd = {sd}");
    }

    #[test]
    fn stations_follow_perturbed_positions() {
        let (sc, obs) = fixture();
        let noisy = inject_noise(&sc, &obs, &NoiseSpec::default(), 3).unwrap();
        for (v, r) in noisy.vision().iter().zip(noisy.ranges()) {
            let c = v.projection.camera_center().unwrap();
            assert!((c - r.station).norm() < 1e-6);
        }
        let moved = noisy
            .ranges()
            .iter()
            .zip(&sc.true_poses)
            .filter(|(r, p)| (r.station - p.position()).norm() > 0.0)
            .count();
        assert_eq!(moved, sc.true_poses.len());
    }
}
