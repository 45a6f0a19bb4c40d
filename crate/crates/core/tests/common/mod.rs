#![allow(dead_code)]

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vlfuse::fusion::ObservationSet;
use vlfuse::sim::{generate_scenario, inject_noise, synthesize_observations, NoiseSpec, Scenario, ScenarioSpec};
use vlfuse::Point3;

struct Objective<'a, F>(&'a F);

impl<F: Fn(&Point3) -> f64> CostFunction for Objective<'_, F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        Ok((self.0)(&Point3::new(p[0], p[1], p[2])))
    }
}

/// Derivative-free minimum of `f`, restarted from its own answer with a
/// shrinking simplex until the restarts stop moving.
pub fn nelder_mead<F: Fn(&Point3) -> f64>(f: F, start: Point3, scale: f64) -> Point3 {
    let mut x = start;
    let mut size = scale;
    for _ in 0..12 {
        let mut simplex = vec![vec![x.x, x.y, x.z]];
        for axis in 0..3 {
            let mut v = simplex[0].clone();
            v[axis] += size;
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex).with_sd_tolerance(1e-14).unwrap();
        let state = Executor::new(Objective(&f), solver)
            .configure(|s| s.max_iters(4000))
            .run()
            .unwrap()
            .state;
        let p = state.best_param.unwrap();
        let next = Point3::new(p[0], p[1], p[2]);
        let moved = (next - x).norm();
        x = next;
        size = (moved * 4.0).max(1e-3);
        if moved < 1e-6 {
            break;
        }
    }
    x
}

/// Central-difference Jacobian of `f` at `x` with step `h`.
pub fn central_jacobian<F: Fn(&Point3) -> DVector<f64>>(f: F, x: &Point3, h: f64) -> DMatrix<f64> {
    let rows = f(x).len();
    let mut jac = DMatrix::zeros(rows, 3);
    for j in 0..3 {
        let mut plus = *x;
        let mut minus = *x;
        plus[j] += h;
        minus[j] -= h;
        let d = (f(&plus) - f(&minus)) / (2.0 * h);
        jac.set_column(j, &d);
    }
    jac
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

pub fn noisy_instance(spec: &ScenarioSpec, noise: &NoiseSpec, seed: u64) -> (Scenario, ObservationSet) {
    let scenario = generate_scenario(spec).unwrap();
    let clean = synthesize_observations(&scenario).unwrap();
    let noisy = inject_noise(&scenario, &clean, noise, seed).unwrap();
    (scenario, noisy)
}

/// An arc scenario with random angle, length, height and slant range.
pub fn random_spec(rng: &mut ChaCha8Rng) -> ScenarioSpec {
    ScenarioSpec {
        gamma: rng.random_range(10.0..=80.0),
        n_obs: rng.random_range(3..=20),
        height: rng.random_range(1000.0..3000.0),
        slant_range: rng.random_range(4000.0..6000.0),
        ..ScenarioSpec::default()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
