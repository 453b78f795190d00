//! Coordinate transformations shared by the BBOB function definitions.

use nalgebra::DVector;

/// Oscillation transform applied componentwise. Identity at zero, monotone,
/// and introduces small smooth irregularities everywhere else.
pub fn t_osz(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| t_osz_scalar(v)).collect()
}

pub(crate) fn t_osz_scalar(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let xhat = v.abs().ln();
    let (c1, c2) = if v > 0.0 { (10.0, 7.9) } else { (5.5, 3.1) };
    v.signum() * (xhat + 0.049 * ((c1 * xhat).sin() + (c2 * xhat).sin())).exp()
}

/// Asymmetric transform: positive components `x_i` are raised to
/// `1 + beta * i/(d-1) * sqrt(x_i)`; non-positive components pass through.
pub fn t_asy(x: &[f64], beta: f64) -> Vec<f64> {
    let d = x.len();
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            if v > 0.0 {
                v.powf(1.0 + beta * ratio(i, d) * v.sqrt())
            } else {
                v
            }
        })
        .collect()
}

/// Diagonal of the conditioning matrix with entries `alpha^(i/(2(d-1)))`.
pub fn lambda_scaling(alpha: f64, d: usize) -> DVector<f64> {
    DVector::from_iterator(d, (0..d).map(|i| alpha.powf(0.5 * ratio(i, d))))
}

/// Boundary penalty `sum max(0, |x_i| - 5)^2`.
pub fn f_pen(x: &[f64]) -> f64 {
    x.iter()
        .map(|&v| {
            let excess = v.abs() - 5.0;
            if excess > 0.0 {
                excess * excess
            } else {
                0.0
            }
        })
        .sum()
}

/// `i/(d-1)`, with the single-coordinate case mapped to 0.
pub(crate) fn ratio(i: usize, d: usize) -> f64 {
    if d <= 1 {
        0.0
    } else {
        i as f64 / (d - 1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_origin() {
        assert_eq!(t_osz(&[0.0, 0.0, 0.0]), vec![0.0; 3]);
        assert_eq!(t_asy(&[0.0, 0.0, 0.0], 0.5), vec![0.0; 3]);
    }

    #[test]
    fn t_osz_preserves_sign_and_order() {
        let xs: Vec<f64> = (-50..=50).map(|k| k as f64 * 0.37).collect();
        let ys = t_osz(&xs);
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(x.signum(), y.signum());
        }
        assert!(ys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn t_asy_leaves_first_and_negative_components() {
        let out = t_asy(&[2.0, -3.0, 4.0], 0.5);
        assert_eq!(out[0], 2.0);
        assert_eq!(out[1], -3.0);
        // last coordinate: 4^(1 + 0.5 * 1 * 2) = 4^2
        assert!((out[2] - 16.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_scaling_hand_values() {
        let diag = lambda_scaling(100.0, 3);
        // 100^(0/4), 100^(1/4), 100^(2/4)
        let expected = [1.0, 10f64.sqrt(), 10.0];
        for (a, b) in diag.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn penalty_zero_inside_box() {
        assert_eq!(f_pen(&[5.0, -5.0, 0.3]), 0.0);
        assert!((f_pen(&[6.0, -7.0, 0.0]) - 5.0).abs() < 1e-12);
    }
}
