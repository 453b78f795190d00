use std::f64::consts::PI;

use super::transforms::{f_pen, ratio, t_asy, t_osz, t_osz_scalar};
use super::{rosenbrock_scale, ProblemInstance};
use nalgebra::DMatrix;

fn matvec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    let d = v.len();
    (0..d).map(|i| (0..d).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

fn shifted(x: &[f64], x_opt: &[f64]) -> Vec<f64> {
    x.iter().zip(x_opt).map(|(a, b)| a - b).collect()
}

/// Multiply componentwise by `alpha^(i/(2(d-1)))`.
fn condition(v: &mut [f64], alpha: f64) {
    let d = v.len();
    for (i, c) in v.iter_mut().enumerate() {
        *c *= alpha.powf(0.5 * ratio(i, d));
    }
}

fn rastrigin_core(z: &[f64]) -> f64 {
    let d = z.len() as f64;
    let cos_sum: f64 = z.iter().map(|v| (2.0 * PI * v).cos()).sum();
    10.0 * (d - cos_sum) + z.iter().map(|v| v * v).sum::<f64>()
}

fn ellipsoid_core(z: &[f64]) -> f64 {
    let d = z.len();
    z.iter()
        .enumerate()
        .map(|(i, v)| 1e6f64.powf(ratio(i, d)) * v * v)
        .sum()
}

fn rosenbrock_core(z: &[f64]) -> f64 {
    z.windows(2)
        .map(|w| {
            let a = w[0] * w[0] - w[1];
            100.0 * a * a + (w[0] - 1.0) * (w[0] - 1.0)
        })
        .sum()
}

fn schaffer_core(z: &[f64]) -> f64 {
    let d = z.len();
    let mut acc = 0.0;
    for w in z.windows(2) {
        let s = (w[0] * w[0] + w[1] * w[1]).sqrt();
        let root = s.sqrt();
        let sin = (50.0 * s.powf(0.2)).sin();
        acc += root + root * sin * sin;
    }
    let mean = acc / (d - 1) as f64;
    mean * mean
}

pub(super) fn evaluate_class(p: &ProblemInstance, x: &[f64]) -> f64 {
    let d = p.dimension;
    let df = d as f64;
    let r = &p.r;
    let q = &p.q;
    let raw = match p.problem_id {
        // sphere
        1 => shifted(x, &p.x_opt).iter().map(|v| v * v).sum(),
        // separable ellipsoid
        2 => ellipsoid_core(&t_osz(&shifted(x, &p.x_opt))),
        // separable Rastrigin
        3 => {
            let mut z = t_asy(&t_osz(&shifted(x, &p.x_opt)), 0.2);
            condition(&mut z, 10.0);
            rastrigin_core(&z)
        }
        // Bueche-Rastrigin
        4 => {
            let mut z = t_osz(&shifted(x, &p.x_opt));
            for (i, v) in z.iter_mut().enumerate() {
                let base = 10f64.powf(0.5 * ratio(i, d));
                let s = if *v > 0.0 && i % 2 == 0 { 10.0 * base } else { base };
                *v *= s;
            }
            rastrigin_core(&z) + 100.0 * f_pen(x)
        }
        // linear slope
        5 => (0..d)
            .map(|i| {
                let xo = p.x_opt[i];
                let s = xo.signum() * 10f64.powf(ratio(i, d));
                let z = if xo * x[i] < 25.0 { x[i] } else { xo };
                5.0 * s.abs() - s * z
            })
            .sum(),
        // attractive sector
        6 => {
            let mut z = matvec(r, &shifted(x, &p.x_opt));
            condition(&mut z, 10.0);
            let z = matvec(q, &z);
            let sum: f64 = z
                .iter()
                .zip(&p.x_opt)
                .map(|(v, xo)| {
                    let s = if v * xo > 0.0 { 100.0 } else { 1.0 };
                    (s * v) * (s * v)
                })
                .sum();
            t_osz_scalar(sum).powf(0.9)
        }
        // step ellipsoid
        7 => {
            let mut zhat = matvec(r, &shifted(x, &p.x_opt));
            condition(&mut zhat, 10.0);
            let ztilde: Vec<f64> = zhat
                .iter()
                .map(|&v| {
                    if v.abs() > 0.5 {
                        (0.5 + v).floor()
                    } else {
                        (0.5 + 10.0 * v).floor() / 10.0
                    }
                })
                .collect();
            let z = matvec(q, &ztilde);
            let weighted: f64 = z
                .iter()
                .enumerate()
                .map(|(i, v)| 100f64.powf(ratio(i, d)) * v * v)
                .sum();
            0.1 * f64::max(zhat[0].abs() / 1e4, weighted) + f_pen(x)
        }
        // Rosenbrock, original
        8 => {
            let c = rosenbrock_scale(d);
            let z: Vec<f64> = shifted(x, &p.x_opt).iter().map(|v| c * v + 1.0).collect();
            rosenbrock_core(&z)
        }
        // Rosenbrock, rotated
        9 => {
            let c = rosenbrock_scale(d);
            let z: Vec<f64> = matvec(r, x).iter().map(|v| c * v + 0.5).collect();
            rosenbrock_core(&z)
        }
        // ellipsoid
        10 => ellipsoid_core(&t_osz(&matvec(r, &shifted(x, &p.x_opt)))),
        // discus
        11 => {
            let z = t_osz(&matvec(r, &shifted(x, &p.x_opt)));
            1e6 * z[0] * z[0] + z[1..].iter().map(|v| v * v).sum::<f64>()
        }
        // bent cigar
        12 => {
            let z = matvec(r, &t_asy(&matvec(r, &shifted(x, &p.x_opt)), 0.5));
            z[0] * z[0] + 1e6 * z[1..].iter().map(|v| v * v).sum::<f64>()
        }
        // sharp ridge
        13 => {
            let mut z = matvec(r, &shifted(x, &p.x_opt));
            condition(&mut z, 10.0);
            let z = matvec(q, &z);
            z[0] * z[0] + 100.0 * z[1..].iter().map(|v| v * v).sum::<f64>().sqrt()
        }
        // different powers
        14 => {
            let z = matvec(r, &shifted(x, &p.x_opt));
            z.iter()
                .enumerate()
                .map(|(i, v)| v.abs().powf(2.0 + 4.0 * ratio(i, d)))
                .sum::<f64>()
                .sqrt()
        }
        // Rastrigin, rotated
        15 => {
            let inner = t_asy(&t_osz(&matvec(r, &shifted(x, &p.x_opt))), 0.2);
            let mut z = matvec(q, &inner);
            condition(&mut z, 10.0);
            rastrigin_core(&matvec(r, &z))
        }
        // Weierstrass
        16 => {
            let inner = t_osz(&matvec(r, &shifted(x, &p.x_opt)));
            let mut z = matvec(q, &inner);
            condition(&mut z, 0.01);
            let z = matvec(r, &z);
            let f0: f64 = (0..12).map(|k| 0.5f64.powi(k) * (PI * 3f64.powi(k)).cos()).sum();
            let mut acc = 0.0;
            for v in &z {
                for k in 0..12 {
                    acc += 0.5f64.powi(k) * (2.0 * PI * 3f64.powi(k) * (v + 0.5)).cos();
                }
            }
            let t = acc / df - f0;
            10.0 * t * t * t + 10.0 / df * f_pen(x)
        }
        // Schaffers F7 and its ill-conditioned variant
        17 | 18 => {
            let alpha = if p.problem_id == 17 { 10.0 } else { 1000.0 };
            let inner = t_asy(&matvec(r, &shifted(x, &p.x_opt)), 0.5);
            let mut z = matvec(q, &inner);
            condition(&mut z, alpha);
            schaffer_core(&z) + 10.0 * f_pen(x)
        }
        // composite Griewank-Rosenbrock
        19 => {
            let c = rosenbrock_scale(d);
            let z: Vec<f64> = matvec(r, x).iter().map(|v| c * v + 0.5).collect();
            let sum: f64 = z
                .windows(2)
                .map(|w| {
                    let a = w[0] * w[0] - w[1];
                    let s = 100.0 * a * a + (w[0] - 1.0) * (w[0] - 1.0);
                    s / 4000.0 - s.cos()
                })
                .sum();
            10.0 * sum / (df - 1.0) + 10.0
        }
        // Schwefel x*sin(x)
        20 => {
            let two_abs_opt: Vec<f64> = p.x_opt.iter().map(|v| 2.0 * v.abs()).collect();
            let xhat: Vec<f64> = x.iter().zip(&p.signs).map(|(v, s)| 2.0 * s * v).collect();
            let mut zhat = xhat.clone();
            for i in 1..d {
                zhat[i] = xhat[i] + 0.25 * (xhat[i - 1] - two_abs_opt[i - 1]);
            }
            let mut diff: Vec<f64> = zhat.iter().zip(&two_abs_opt).map(|(a, b)| a - b).collect();
            condition(&mut diff, 10.0);
            let z: Vec<f64> = diff.iter().zip(&two_abs_opt).map(|(a, b)| 100.0 * (a + b)).collect();
            let s: f64 = z.iter().map(|v| v * v.abs().sqrt().sin()).sum();
            let scaled: Vec<f64> = z.iter().map(|v| v / 100.0).collect();
            -s / (100.0 * df) + 4.189828872724339 + 100.0 * f_pen(&scaled)
        }
        // Gallagher 101 / 21 peaks
        21 | 22 => {
            let rx = matvec(r, x);
            let mut best = f64::NEG_INFINITY;
            for peak in &p.peaks {
                let quad: f64 = rx
                    .iter()
                    .zip(&peak.rotated_center)
                    .zip(&peak.scales)
                    .map(|((a, b), s)| s * (a - b) * (a - b))
                    .sum();
                best = best.max(peak.weight * (-quad / (2.0 * df)).exp());
            }
            let t = t_osz_scalar(10.0 - best);
            t * t + f_pen(x)
        }
        // Katsuura
        23 => {
            let mut z = matvec(r, &shifted(x, &p.x_opt));
            condition(&mut z, 100.0);
            let z = matvec(q, &z);
            let exponent = 10.0 / df.powf(1.2);
            let mut prod = 1.0;
            for (i, v) in z.iter().enumerate() {
                let mut sum = 0.0;
                let mut pow2 = 1.0;
                for _ in 1..=32 {
                    pow2 *= 2.0;
                    let t = pow2 * v;
                    sum += (t - t.round()).abs() / pow2;
                }
                prod *= (1.0 + (i + 1) as f64 * sum).powf(exponent);
            }
            10.0 / (df * df) * prod - 10.0 / (df * df) + f_pen(x)
        }
        // Lunacek bi-Rastrigin
        24 => {
            let mu0 = 2.5;
            let s = 1.0 - 1.0 / (2.0 * (df + 20.0).sqrt() - 8.2);
            let mu1 = -((mu0 * mu0 - 1.0) / s).sqrt();
            let xhat: Vec<f64> = x.iter().zip(&p.signs).map(|(v, sg)| 2.0 * sg * v).collect();
            let mut z = matvec(r, &xhat.iter().map(|v| v - mu0).collect::<Vec<_>>());
            condition(&mut z, 100.0);
            let z = matvec(q, &z);
            let first: f64 = xhat.iter().map(|v| (v - mu0) * (v - mu0)).sum();
            let second: f64 = df + s * xhat.iter().map(|v| (v - mu1) * (v - mu1)).sum::<f64>();
            let cos_sum: f64 = z.iter().map(|v| (2.0 * PI * v).cos()).sum();
            first.min(second) + 10.0 * (df - cos_sum) + 1e4 * f_pen(x)
        }
        other => unreachable!("problem class {other} validated at construction"),
    };
    raw + p.f_opt
}
