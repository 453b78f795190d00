//! The 24 noiseless BBOB function classes with seeded per-instance
//! transformations.
//!
//! Instances are generated by our own deterministic scheme: a ChaCha8 stream
//! seeded with `problem_id * 1_000_000 + instance_id` draws, in order, the
//! optimum location, the optimum value, the rotation `R`, the rotation `Q`,
//! and finally any class-specific extras (random signs and Gallagher peaks).
//! The structure of every class follows the BBOB definitions; the numbers do
//! not match COCO's instances.

mod functions;
pub mod transforms;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use transforms::{f_pen, lambda_scaling, t_asy, t_osz};

pub const NUM_CLASSES: u8 = 24;
pub const LOWER: f64 = -5.0;
pub const UPPER: f64 = 5.0;

/// Axis-aligned search box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SearchDomain {
    /// The BBOB box `[-5, 5]^d`.
    pub fn bbob(dimension: usize) -> Self {
        assert!(dimension >= 1, "dimension must be positive");
        Self {
            lower: vec![LOWER; dimension],
            upper: vec![UPPER; dimension],
        }
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }

    /// Componentwise clipping into the box.
    pub fn clip(&self, x: &mut [f64]) {
        for (v, (&lo, &hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(lo, hi);
        }
    }
}

/// One local optimum of a Gallagher function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Peak location in the rotated frame (`R * y_i`).
    pub rotated_center: Vec<f64>,
    pub weight: f64,
    /// Diagonal of the peak's quadratic form, already divided by `alpha^(1/4)`.
    pub scales: Vec<f64>,
}

/// A fully transformed BBOB function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub problem_id: u8,
    pub instance_id: u32,
    pub dimension: usize,
    pub x_opt: Vec<f64>,
    pub f_opt: f64,
    pub r: DMatrix<f64>,
    pub q: DMatrix<f64>,
    /// Random `+1/-1` vector (Schwefel and Lunacek classes).
    pub signs: Vec<f64>,
    /// Gallagher peaks; empty for every other class.
    pub peaks: Vec<Peak>,
}

/// Seed of the instance stream for `(problem_id, instance_id)`.
pub fn instance_seed(problem_id: u8, instance_id: u32) -> u64 {
    problem_id as u64 * 1_000_000 + instance_id as u64
}

/// Build instance `instance_id` of class `problem_id` in dimension `dimension`.
pub fn make_instance(problem_id: u8, instance_id: u32, dimension: usize) -> Result<ProblemInstance> {
    if !(1..=NUM_CLASSES).contains(&problem_id) {
        return Err(invalid(format!("problem_id {problem_id} outside 1..=24")));
    }
    if instance_id == 0 {
        return Err(invalid("instance_id must be at least 1"));
    }
    if dimension < 2 {
        return Err(invalid(format!("dimension {dimension} < 2")));
    }
    let d = dimension;
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(problem_id, instance_id));

    let mut x_opt: Vec<f64> = (0..d).map(|_| rng.random_range(-4.0..4.0)).collect();
    let f_opt = draw_f_opt(&mut rng);
    let r = random_rotation(&mut rng, d);
    let q = random_rotation(&mut rng, d);
    let signs: Vec<f64> = x_opt.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut peaks = Vec::new();

    match problem_id {
        4 => {
            for v in x_opt.iter_mut().step_by(2) {
                *v = v.abs();
            }
        }
        5 => {
            for (v, s) in x_opt.iter_mut().zip(&signs) {
                *v = 5.0 * s;
            }
        }
        8 => {
            for v in &mut x_opt {
                *v *= 0.75;
            }
        }
        9 | 19 => {
            // z = c R x + 1/2 equals the all-ones vector at x = R^T (1 / (2c))
            let c = rosenbrock_scale(d);
            for (i, v) in x_opt.iter_mut().enumerate() {
                *v = (0..d).map(|k| r[(k, i)]).sum::<f64>() * 0.5 / c;
            }
        }
        20 => {
            for (v, s) in x_opt.iter_mut().zip(&signs) {
                *v = 0.5 * 4.2096874633 * s;
            }
        }
        21 | 22 => {
            let (count, top_alpha, opt_box) = if problem_id == 21 {
                (101, 1000.0, 4.0)
            } else {
                (21, 1000.0 * 1000.0, 3.92)
            };
            for v in &mut x_opt {
                *v *= opt_box / 4.0;
            }
            peaks = gallagher_peaks(&mut rng, &r, &x_opt, count, top_alpha);
        }
        24 => {
            for (v, s) in x_opt.iter_mut().zip(&signs) {
                *v = 1.25 * s;
            }
        }
        _ => {}
    }

    Ok(ProblemInstance {
        problem_id,
        instance_id,
        dimension: d,
        x_opt,
        f_opt,
        r,
        q,
        signs,
        peaks,
    })
}

impl ProblemInstance {
    /// Objective value at `x`. Points outside the box are allowed.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(invalid(format!(
                "point has length {}, instance dimension is {}",
                x.len(),
                self.dimension
            )));
        }
        Ok(functions::evaluate_class(self, x))
    }

    /// Evaluation without the length check, for callers that own the shape.
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dimension);
        functions::evaluate_class(self, x)
    }

    pub fn domain(&self) -> SearchDomain {
        SearchDomain::bbob(self.dimension)
    }
}

/// Classes whose optimum is `c * signs` for a fixed constant `c`, so only
/// `2^d` distinct optima exist (linear slope, Schwefel, Lunacek).
pub const SIGN_DETERMINED_OPTIMUM_CLASSES: &[u8] = &[5, 20, 24];

pub(crate) fn rosenbrock_scale(d: usize) -> f64 {
    f64::max(1.0, (d as f64).sqrt() / 8.0)
}

/// Ratio of two standard normals scaled by 100, rounded to two decimals and
/// clamped to `[-1000, 1000]`.
fn draw_f_opt(rng: &mut ChaCha8Rng) -> f64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    let raw = 100.0 * a / b;
    if raw.is_nan() {
        return 0.0;
    }
    ((raw * 100.0).round() / 100.0).clamp(-1000.0, 1000.0)
}

/// Orthogonal matrix from modified Gram-Schmidt on a Gaussian matrix.
/// Columns are orthonormalised twice so the residual stays near machine
/// precision.
fn random_rotation(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    for _pass in 0..2 {
        for j in 0..d {
            for k in 0..j {
                let dot = m.column(j).dot(&m.column(k));
                let prev = m.column(k).clone_owned();
                m.column_mut(j).axpy(-dot, &prev, 1.0);
            }
            let norm = m.column(j).norm();
            m.column_mut(j).unscale_mut(norm);
        }
    }
    m
}

fn gallagher_peaks(
    rng: &mut ChaCha8Rng,
    r: &DMatrix<f64>,
    x_opt: &[f64],
    count: usize,
    top_alpha: f64,
) -> Vec<Peak> {
    let d = x_opt.len();
    let others = count - 1;
    let mut exponents: Vec<usize> = (0..others).collect();
    shuffle(rng, &mut exponents);

    let mut peaks = Vec::with_capacity(count);
    for i in 0..count {
        let (center, weight, alpha) = if i == 0 {
            (x_opt.to_vec(), 10.0, top_alpha)
        } else {
            let center: Vec<f64> = (0..d).map(|_| rng.random_range(-4.9..4.9)).collect();
            let weight = 1.1 + 8.0 * (i - 1) as f64 / (others - 1) as f64;
            let alpha = 1000f64.powf(2.0 * exponents[i - 1] as f64 / (others - 1) as f64);
            (center, weight, alpha)
        };
        let mut scales: Vec<f64> = lambda_scaling(alpha, d).iter().map(|s| s / alpha.powf(0.25)).collect();
        shuffle(rng, &mut scales);
        let rotated_center = (r * nalgebra::DVector::from_column_slice(&center)).as_slice().to_vec();
        peaks.push(Peak {
            rotated_center,
            weight,
            scales,
        });
    }
    peaks
}

fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    use rand::seq::SliceRandom;
    items.shuffle(rng);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthogonality_error(m: &DMatrix<f64>) -> f64 {
        let prod = m.transpose() * m;
        let eye = DMatrix::<f64>::identity(m.nrows(), m.ncols());
        (prod - eye).abs().max()
    }

    #[test]
    fn deterministic_construction() {
        let a = make_instance(1, 1, 3).unwrap();
        let b = make_instance(1, 1, 3).unwrap();
        assert_eq!(a, b);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.x_opt), bits(&b.x_opt));
        assert_eq!(a.f_opt.to_bits(), b.f_opt.to_bits());
    }

    #[test]
    fn different_instances_differ() {
        let a = make_instance(1, 1, 3).unwrap();
        let b = make_instance(1, 2, 3).unwrap();
        assert_ne!(a.x_opt, b.x_opt);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(make_instance(25, 1, 3), Err(crate::Error::InvalidArgument(_))));
        assert!(make_instance(0, 1, 3).is_err());
        assert!(make_instance(1, 0, 3).is_err());
        assert!(make_instance(1, 1, 1).is_err());
    }

    #[test]
    fn rotations_are_orthogonal() {
        for pid in 1..=NUM_CLASSES {
            for iid in 1..=20 {
                for d in [2, 3, 5, 10] {
                    let inst = make_instance(pid, iid, d).unwrap();
                    assert!(orthogonality_error(&inst.r) <= 1e-9);
                    assert!(orthogonality_error(&inst.q) <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn optimum_inside_inner_box() {
        for pid in 1..=NUM_CLASSES {
            for iid in 1..=50 {
                let inst = make_instance(pid, iid, 3).unwrap();
                let bound = if pid == 5 { 5.0 } else { 4.0 };
                assert!(inst.x_opt.iter().all(|v| v.abs() <= bound), "f{pid} i{iid}");
                assert!(inst.f_opt.is_finite() && inst.f_opt.abs() <= 1000.0);
            }
        }
    }

    #[test]
    fn optima_pairwise_distinct() {
        for pid in (1..=NUM_CLASSES).filter(|p| !SIGN_DETERMINED_OPTIMUM_CLASSES.contains(p)) {
            let opts: Vec<Vec<f64>> = (1..=100).map(|i| make_instance(pid, i, 3).unwrap().x_opt).collect();
            for i in 0..opts.len() {
                for j in i + 1..opts.len() {
                    assert_ne!(opts[i], opts[j], "f{pid}: instances {} and {}", i + 1, j + 1);
                }
            }
        }
    }

    #[test]
    fn domain_clip() {
        let dom = SearchDomain::bbob(3);
        let mut x = [7.0, -9.0, 1.0];
        dom.clip(&mut x);
        assert_eq!(x, [5.0, -5.0, 1.0]);
        assert!(dom.contains(&x));
    }
}
