use crate::error::KinematicsError;

/// Coefficient of determination `1 - SS_res / SS_tot`, with `SS_tot` taken
/// about the target mean.
pub fn r_squared(actual: &[f64], target: &[f64]) -> Result<f64, KinematicsError> {
    if actual.len() != target.len() || target.len() < 2 {
        return Err(KinematicsError::LengthMismatch {
            actual: actual.len(),
            target: target.len(),
        });
    }
    let n = target.len() as f64;
    let mean = target.iter().sum::<f64>() / n;
    let ss_tot: f64 = target.iter().map(|t| (t - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(KinematicsError::DegenerateTarget);
    }
    let ss_res: f64 = actual
        .iter()
        .zip(target)
        .map(|(a, t)| (a - t).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn perfect_fit_is_one() {
        let t = [0.1, 0.5, -0.3, 2.0];
        assert_eq!(r_squared(&t, &t).unwrap(), 1.0);
    }

    #[test]
    fn mean_predictor_is_zero() {
        let t = [1.0, 2.0, 6.0];
        assert_abs_diff_eq!(r_squared(&[3.0; 3], &t).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn three_point_hand_computation() {
        // target mean 40/3; SS_tot = (40/3)² + (10/3)² + (50/3)² = 4200/9;
        // SS_res = 10² = 100 → R² = 1 - 900/4200 = 11/14
        let r2 = r_squared(&[0.0, 10.0, 20.0], &[0.0, 10.0, 30.0]).unwrap();
        assert_abs_diff_eq!(r2, 11.0 / 14.0, epsilon = 1e-14);
    }

    #[test]
    fn constant_target_rejected() {
        assert_eq!(
            r_squared(&[1.0, 2.0], &[4.0, 4.0]),
            Err(KinematicsError::DegenerateTarget)
        );
        assert!(matches!(
            r_squared(&[1.0], &[1.0]),
            Err(KinematicsError::LengthMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn affine_invariance(
            pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40),
            shift in -100.0f64..100.0,
            scale in 0.01f64..100.0,
        ) {
            let (a, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let base = match r_squared(&a, &t) {
                Ok(v) => v,
                Err(_) => return Ok(()),
            };
            prop_assume!(base.abs() < 1e6);
            let a2: Vec<f64> = a.iter().map(|v| scale * v + shift).collect();
            let t2: Vec<f64> = t.iter().map(|v| scale * v + shift).collect();
            let moved = r_squared(&a2, &t2).unwrap();
            prop_assert!((moved - base).abs() <= 1e-8 * (1.0 + base.abs()));
        }
    }
}
