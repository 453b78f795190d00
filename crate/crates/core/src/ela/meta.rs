use nalgebra::{DMatrix, DVector};

use super::{ratio_or_nan, NamedFeatures, PooledSample};

/// Ordinary least-squares fit with an intercept in column 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    pub r2: f64,
    pub adj_r2: f64,
}

/// Least squares through the SVD of the column-scaled design matrix; rank
/// deficiency yields the minimum-norm (pseudo-inverse) solution. A target
/// with zero variance gets `R^2 = 0` and zero slope coefficients.
pub fn fit_least_squares(design: &DMatrix<f64>, y: &[f64]) -> LinearFit {
    let (n, cols) = design.shape();
    let regressors = cols.saturating_sub(1);
    let y_min = y.iter().copied().fold(f64::INFINITY, f64::min);
    let y_max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if y_min == y_max {
        let mut coefficients = vec![0.0; cols];
        if cols > 0 {
            coefficients[0] = y_min;
        }
        return LinearFit {
            coefficients,
            r2: 0.0,
            adj_r2: 0.0,
        };
    }

    let norms: Vec<f64> = (0..cols)
        .map(|j| {
            let nrm = design.column(j).norm();
            if nrm > 0.0 {
                nrm
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = design.clone();
    for (j, nrm) in norms.iter().enumerate() {
        scaled.column_mut(j).unscale_mut(*nrm);
    }
    let target = DVector::from_column_slice(y);
    let svd = scaled.clone().svd(true, true);
    let top = svd.singular_values.max();
    let eps = top * (n.max(cols) as f64) * f64::EPSILON;
    let beta = svd
        .solve(&target, eps)
        .unwrap_or_else(|_| DVector::zeros(cols));
    let fitted = &scaled * &beta;
    let coefficients: Vec<f64> = beta.iter().zip(&norms).map(|(b, s)| b / s).collect();

    let mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let sse: f64 = y.iter().zip(fitted.iter()).map(|(a, b)| (a - b).powi(2)).sum();
    let r2 = 1.0 - sse / sst;
    let dof = n as f64 - regressors as f64 - 1.0;
    let adj_r2 = if dof > 0.0 {
        1.0 - (1.0 - r2) * (n as f64 - 1.0) / dof
    } else {
        f64::NAN
    };
    LinearFit {
        coefficients,
        r2,
        adj_r2,
    }
}

#[derive(Clone, Copy)]
enum Model {
    Linear,
    LinearInteractions,
    Quadratic,
    QuadraticInteractions,
}

fn design(sample: &PooledSample, model: Model) -> DMatrix<f64> {
    let d = sample.dimension;
    let n = sample.len();
    let mut terms: Vec<Box<dyn Fn(&[f64]) -> f64>> = vec![Box::new(|_| 1.0)];
    for j in 0..d {
        terms.push(Box::new(move |x| x[j]));
    }
    match model {
        Model::Linear => {}
        Model::LinearInteractions => {
            for a in 0..d {
                for b in a + 1..d {
                    terms.push(Box::new(move |x| x[a] * x[b]));
                }
            }
        }
        Model::Quadratic => {
            for j in 0..d {
                terms.push(Box::new(move |x| x[j] * x[j]));
            }
        }
        Model::QuadraticInteractions => {
            for a in 0..d {
                for b in a..d {
                    terms.push(Box::new(move |x| x[a] * x[b]));
                }
            }
        }
    }
    DMatrix::from_fn(n, terms.len(), |i, j| terms[j](sample.row(i)))
}

/// Linear and quadratic surrogate fits of `y` on `X`.
pub fn meta_features(sample: &PooledSample) -> NamedFeatures {
    let d = sample.dimension;
    let y = &sample.fitness;
    let lin = fit_least_squares(&design(sample, Model::Linear), y);
    let slopes: Vec<f64> = lin.coefficients[1..].iter().map(|c| c.abs()).collect();
    let coef_min = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let coef_max = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lin_inter = fit_least_squares(&design(sample, Model::LinearInteractions), y);
    let quad = fit_least_squares(&design(sample, Model::Quadratic), y);
    let quad_abs: Vec<f64> = quad.coefficients[1 + d..].iter().map(|c| c.abs()).collect();
    let quad_min = quad_abs.iter().copied().fold(f64::INFINITY, f64::min);
    let quad_max = quad_abs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let quad_inter = fit_least_squares(&design(sample, Model::QuadraticInteractions), y);
    vec![
        ("ela_meta.lin_simple.adj_r2".into(), lin.adj_r2),
        ("ela_meta.lin_simple.intercept".into(), lin.coefficients[0]),
        ("ela_meta.lin_simple.coef.min".into(), coef_min),
        ("ela_meta.lin_simple.coef.max".into(), coef_max),
        ("ela_meta.lin_simple.coef.max_by_min".into(), ratio_or_nan(coef_max, coef_min)),
        ("ela_meta.lin_w_interact.adj_r2".into(), lin_inter.adj_r2),
        ("ela_meta.quad_simple.adj_r2".into(), quad.adj_r2),
        ("ela_meta.quad_simple.cond".into(), ratio_or_nan(quad_max, quad_min)),
        ("ela_meta.quad_w_interact.adj_r2".into(), quad_inter.adj_r2),
    ]
}
