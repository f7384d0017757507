//! Boltzmann-type scalar functions.

use crate::error::{domain, Result};

/// `λ(r) = r log r − r + 1`, extended by `λ(0) = 1`.
///
/// ```
/// let v = erds::entropy::boltzmann_lambda(2.0).unwrap();
/// assert!((v - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
/// ```
pub fn boltzmann_lambda(r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(domain("boltzmann_lambda", format!("r = {r} is negative")));
    }
    Ok(lambda_raw(r))
}

/// `λ_s(r) = (r^s − s r)/(s − 1) + 1` for `1 < s ≤ 2`.
pub fn lambda_s(r: f64, s: f64) -> Result<f64> {
    if !(s > 1.0 && s <= 2.0) {
        return Err(domain("lambda_s", format!("s = {s} outside (1, 2]")));
    }
    if !(r >= 0.0) {
        return Err(domain("lambda_s", format!("r = {r} is negative")));
    }
    Ok(lambda_s_raw(r, s))
}

/// Relative Boltzmann function `b(s, e) = e λ(s/e)`.
pub fn rel_boltzmann_b(s: f64, e: f64) -> Result<f64> {
    if !(e > 0.0) {
        return Err(domain("rel_boltzmann_b", format!("e = {e} is not positive")));
    }
    if !(s >= 0.0) {
        return Err(domain("rel_boltzmann_b", format!("s = {s} is negative")));
    }
    Ok(e * lambda_raw(s / e))
}

pub(crate) fn lambda_raw(r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else {
        r * r.ln() - r + 1.0
    }
}

pub(crate) fn lambda_s_raw(r: f64, s: f64) -> f64 {
    (r.powf(s) - s * r) / (s - 1.0) + 1.0
}

/// Value and first three derivatives of `λ_s`, with `s = 1` meaning `λ`.
pub(crate) fn lambda_s_derivs(r: f64, s: f64) -> [f64; 4] {
    if s == 1.0 {
        [lambda_raw(r), r.ln(), 1.0 / r, -1.0 / (r * r)]
    } else {
        [
            lambda_s_raw(r, s),
            s * (r.powf(s - 1.0) - 1.0) / (s - 1.0),
            s * r.powf(s - 2.0),
            s * (s - 2.0) * r.powf(s - 3.0),
        ]
    }
}

/// Logarithmic mean `(b − a)/(ln b − ln a)` of two positive numbers.
pub(crate) fn log_mean(a: f64, b: f64) -> f64 {
    let sum = a + b;
    if sum <= 0.0 {
        return 0.0;
    }
    let x = (b - a) / sum;
    if x.abs() < 1e-4 {
        let x2 = x * x;
        0.5 * sum / (1.0 + x2 / 3.0 + x2 * x2 / 5.0)
    } else if a <= 0.0 || b <= 0.0 {
        0.0
    } else {
        (b - a) / (b.ln() - a.ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_values() {
        assert_eq!(boltzmann_lambda(1.0).unwrap(), 0.0);
        assert_eq!(boltzmann_lambda(0.0).unwrap(), 1.0);
        assert!((boltzmann_lambda(2.0).unwrap() - 0.3862943611).abs() < 1e-10);
        assert!(boltzmann_lambda(-0.1).is_err());
        assert!(boltzmann_lambda(f64::NAN).is_err());
    }

    #[test]
    fn lambda_s_values() {
        assert_eq!(lambda_s(1.0, 2.0).unwrap(), 0.0);
        assert_eq!(lambda_s(0.0, 2.0).unwrap(), 1.0);
        assert_eq!(lambda_s(2.0, 2.0).unwrap(), 1.0);
        assert!(lambda_s(1.0, 1.0).is_err());
        assert!(lambda_s(1.0, 2.5).is_err());
    }

    #[test]
    fn relative_b_values() {
        assert_eq!(rel_boltzmann_b(3.0, 3.0).unwrap(), 0.0);
        assert_eq!(rel_boltzmann_b(0.0, 2.0).unwrap(), 2.0);
        assert!((rel_boltzmann_b(2.0, 1.0).unwrap() - 0.3862943611).abs() < 1e-10);
        assert!(rel_boltzmann_b(1.0, 0.0).is_err());
    }

    #[test]
    fn lambda_s_derivatives_match_differences() {
        for &s in &[1.0, 1.3, 1.7, 2.0] {
            for &r in &[0.1, 0.7, 1.0, 3.0, 20.0] {
                let d = lambda_s_derivs(r, s);
                let h = 1e-5 * r;
                for k in 0..3 {
                    let fd = (lambda_s_derivs(r + h, s)[k] - lambda_s_derivs(r - h, s)[k]) / (2.0 * h);
                    let rel = (fd - d[k + 1]).abs() / d[k + 1].abs().max(1e-3);
                    assert!(rel < 1e-6, "s={s} r={r} k={k} rel={rel}");
                }
            }
        }
    }

    #[test]
    fn log_mean_limits() {
        assert!((log_mean(2.0, 2.0) - 2.0).abs() < 1e-15);
        let exact = (3.0 - 1.0) / 3f64.ln();
        assert!((log_mean(1.0, 3.0) - exact).abs() < 1e-15);
        let a = 1.0;
        let b = 1.0 + 1e-5;
        let lm = log_mean(a, b);
        assert!(lm > a && lm < b);
        assert_eq!(log_mean(0.0, 1.0), 0.0);
    }
}
