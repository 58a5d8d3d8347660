use super::SQRT_2_OVER_PI;
use crate::error::{Error, Result};

/// Relative slack above `Q0(0)` still mapped to `z = 0`.
const RANGE_SLACK: f64 = 1e-12;

/// `sum_m m^power c_m exp(-m^2 z)` for `z >= 0`.
///
/// Uses `exp(-m^2 z) = exp(-(m-1)^2 z) * exp(-(2m-1) z)` so a single
/// exponential is evaluated per call.
pub fn kernel_sum(coefs: &[f64], z: f64, power: i32) -> f64 {
    debug_assert!(z >= 0.0);
    let q = (-z).exp();
    let q2 = q * q;
    let mut ratio = q;
    let mut weight = 1.0;
    let mut acc = 0.0;
    for (k, c) in coefs.iter().enumerate() {
        weight *= ratio;
        ratio *= q2;
        if *c != 0.0 {
            acc += (k as f64 + 1.0).powi(power) * c * weight;
        }
        if weight == 0.0 {
            break;
        }
    }
    acc
}

fn check_argument(z: f64) -> Result<()> {
    if z >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("kernel argument must be >= 0, got {z}")))
    }
}

/// `Q0(z) = sqrt(2/pi) sum_m m H_m exp(-m^2 z)`.
pub fn eval_q0(h: &[f64], z: f64) -> Result<f64> {
    check_argument(z)?;
    Ok(SQRT_2_OVER_PI * kernel_sum(h, z, 1))
}

/// `dQ0/dz`, nonpositive for nonnegative coefficients.
pub fn eval_q0_derivative(h: &[f64], z: f64) -> Result<f64> {
    check_argument(z)?;
    Ok(-SQRT_2_OVER_PI * kernel_sum(h, z, 3))
}

/// `Q(z, s) = sqrt(2/pi) sum_m m F_m(s) exp(-m^2 z)` for the forcing
/// coefficients `F_m(s)` at one time.
pub fn eval_q(f_at_s: &[f64], z: f64) -> Result<f64> {
    check_argument(z)?;
    Ok(SQRT_2_OVER_PI * kernel_sum(f_at_s, z, 1))
}

/// `dQ/dz` at fixed `s`.
pub fn eval_q_derivative(f_at_s: &[f64], z: f64) -> Result<f64> {
    check_argument(z)?;
    Ok(-SQRT_2_OVER_PI * kernel_sum(f_at_s, z, 3))
}

/// Solves `Q0(z) = y` for `z >= 0`.
///
/// `Q0` is strictly decreasing when no coefficient is negative and one is
/// positive. A bracket `[lo, hi]` is grown geometrically from `[0, 1]`,
/// narrowed by a few bisections, and finished with Newton steps that fall
/// back to bisection whenever they leave the bracket. Coefficients within
/// `1e-12 * max |H|` below zero count as zero.
pub fn invert_q0(h: &[f64], y: f64, tol: f64) -> Result<f64> {
    let band = 1e-12 * h.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    if let Some(m) = h.iter().position(|c| *c < -band || !c.is_finite()) {
        return Err(Error::Domain(format!(
            "Q0 inversion needs nonnegative coefficients, H_{} = {}",
            m + 1,
            h[m]
        )));
    }
    if !h.iter().any(|c| *c > 0.0) {
        return Err(Error::DegenerateKernel);
    }
    let upper = SQRT_2_OVER_PI * kernel_sum(h, 0.0, 1);
    if !(y > 0.0) || y > upper * (1.0 + RANGE_SLACK) {
        return Err(Error::OutOfRange { value: y, upper });
    }
    if y >= upper {
        return Ok(0.0);
    }
    let residual = |z: f64| SQRT_2_OVER_PI * kernel_sum(h, z, 1) - y;

    let mut lo = 0.0;
    let mut hi = 1.0;
    while residual(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            // y is below what Q0 can represent in f64
            return Err(Error::OutOfRange { value: y, upper });
        }
    }
    for _ in 0..6 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut z = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = residual(z);
        if r == 0.0 {
            return Ok(z);
        }
        if r > 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        let slope = -SQRT_2_OVER_PI * kernel_sum(h, z, 3);
        let mut next = z - r / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - z).abs();
        z = next;
        let scale = z.max(1.0);
        if step <= 4.0 * f64::EPSILON * scale
            || hi - lo <= 4.0 * f64::EPSILON * scale
            || (r.abs() <= tol * y && step <= 1e-13 * scale)
        {
            break;
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SQRT_PI_OVER_2;
    use proptest::prelude::*;

    fn single() -> Vec<f64> {
        vec![SQRT_PI_OVER_2, 0.0, 0.0, 0.0]
    }

    /// Direct term-by-term sum, independent of the recurrence.
    fn direct(coefs: &[f64], z: f64, power: i32) -> f64 {
        coefs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let m = (k + 1) as f64;
                m.powi(power) * c * (-m * m * z).exp()
            })
            .sum()
    }

    #[test]
    fn recurrence_matches_direct_sum() {
        let c: Vec<f64> = (1..=32).map(|m| 1.0 / (m as f64).powi(2)).collect();
        for &z in &[0.0, 1e-4, 0.01, 0.3, 2.0, 40.0] {
            for p in [1, 3] {
                let a = kernel_sum(&c, z, p);
                let b = direct(&c, z, p);
                assert!((a - b).abs() <= 1e-13 * b.abs().max(1e-300), "z={z} p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn single_mode_q0() {
        assert!((eval_q0(&single(), 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((eval_q0(&single(), 1.0).unwrap() - 0.3678794).abs() < 1e-7);
        assert_eq!(eval_q0(&[0.0; 4], 0.7).unwrap(), 0.0);
    }

    #[test]
    fn single_mode_q() {
        assert_eq!(eval_q(&[0.0; 3], 2.0).unwrap(), 0.0);
        // F_1(s) = sqrt(pi/2) e^{-s} at s = 0
        let f = [SQRT_PI_OVER_2 * (-0.0f64).exp(), 0.0];
        assert!((eval_q(&f, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((eval_q(&[SQRT_PI_OVER_2], 0.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_argument_rejected() {
        assert!(matches!(eval_q0(&single(), -1e-3), Err(Error::Domain(_))));
        assert!(matches!(eval_q(&single(), -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn inversion_examples() {
        assert!(invert_q0(&single(), 1.0, 1e-15).unwrap().abs() < 1e-15);
        let z = invert_q0(&single(), (-2.0f64).exp(), 1e-15).unwrap();
        assert!((z - 2.0).abs() < 1e-10);
        assert!(matches!(
            invert_q0(&single(), 1.5, 1e-15),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            invert_q0(&single(), 0.0, 1e-15),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            invert_q0(&[0.0, 0.0], 0.5, 1e-15),
            Err(Error::DegenerateKernel)
        ));
        assert!(matches!(invert_q0(&[1.0, -0.1], 0.5, 1e-15), Err(Error::Domain(_))));
    }

    #[test]
    fn inversion_of_tiny_values() {
        let y = eval_q0(&single(), 600.0).unwrap();
        let z = invert_q0(&single(), y, 1e-15).unwrap();
        assert!((z - 600.0).abs() < 1e-9);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let c = [0.3, 0.0, 0.7, 0.1];
        let z = 0.2;
        let eps = 1e-6;
        let fd = (eval_q(&c, z + eps).unwrap() - eval_q(&c, z - eps).unwrap()) / (2.0 * eps);
        assert!((fd - eval_q_derivative(&c, z).unwrap()).abs() < 1e-7);
        let fd0 = (eval_q0(&c, z + eps).unwrap() - eval_q0(&c, z - eps).unwrap()) / (2.0 * eps);
        assert!((fd0 - eval_q0_derivative(&c, z).unwrap()).abs() < 1e-7);
    }

    fn admissible() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..2.0, 1..12).prop_filter("one positive", |v| v.iter().any(|c| *c > 1e-3))
    }

    proptest! {
        #[test]
        fn q0_strictly_decreasing(h in admissible(), z1 in 0.0f64..5.0, dz in 1e-3f64..2.0) {
            let a = eval_q0(&h, z1).unwrap();
            let b = eval_q0(&h, z1 + dz).unwrap();
            prop_assert!(a > b);
        }

        #[test]
        fn inversion_round_trip(h in admissible(), z in 0.0f64..5.0) {
            let y = eval_q0(&h, z).unwrap();
            let back = invert_q0(&h, y, 1e-15).unwrap();
            prop_assert!((back - z).abs() <= 1e-10, "z={} back={}", z, back);
        }

        #[test]
        fn kernels_are_linear(
            a in prop::collection::vec(-2.0f64..2.0, 6),
            b in prop::collection::vec(-2.0f64..2.0, 6),
            alpha in -3.0f64..3.0,
            z in 0.0f64..3.0,
        ) {
            let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + y).collect();
            let lhs = eval_q(&combo, z).unwrap();
            let rhs = alpha * eval_q(&a, z).unwrap() + eval_q(&b, z).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
            let lhs0 = eval_q0(&combo, z).unwrap();
            let rhs0 = alpha * eval_q0(&a, z).unwrap() + eval_q0(&b, z).unwrap();
            prop_assert!((lhs0 - rhs0).abs() <= 1e-12 * (1.0 + rhs0.abs()));
        }

        #[test]
        fn derivative_bounded_by_cubic_sum(
            f in prop::collection::vec(-2.0f64..2.0, 1..10),
            z in 0.0f64..3.0,
        ) {
            let bound = SQRT_2_OVER_PI
                * f.iter().enumerate().map(|(k, c)| ((k + 1) as f64).powi(3) * c.abs()).sum::<f64>();
            let d = eval_q_derivative(&f, z).unwrap();
            prop_assert!(d.abs() <= bound * (1.0 + 1e-12));
            let eps = 1e-6;
            let lo = (z - eps).max(0.0);
            let fd = (eval_q(&f, z + eps).unwrap() - eval_q(&f, lo).unwrap()) / (z + eps - lo);
            prop_assert!((fd - d).abs() <= 1e-4 * (1.0 + bound));
        }
    }
}
