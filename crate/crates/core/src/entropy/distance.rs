//! Pointwise relative entropies and the generalized distance `dist_α`.

use super::{Entropy, TruncationParams};
use crate::error::{domain, Result};

/// `h(z) − Dh(z̃)·(z − z̃) − h(z̃)`.
///
/// ```
/// use erds::entropy::{rel_entropy_density, EntropyModel};
/// let m = EntropyModel::witness(1);
/// let v = rel_entropy_density(&[1.1, 1.0], &[1.0, 1.0], &m).unwrap();
/// assert!((v - 0.0052947).abs() < 1e-7);
/// ```
pub fn rel_entropy_density<E: Entropy + ?Sized>(z: &[f64], zt: &[f64], model: &E) -> Result<f64> {
    model.check_point("rel_entropy_density", z, false)?;
    model.check_point("rel_entropy_density", zt, true)?;
    Ok(rel_raw(z, zt, model))
}

pub(crate) fn rel_raw<E: Entropy + ?Sized>(z: &[f64], zt: &[f64], model: &E) -> f64 {
    let g = model.gradient_vec(zt);
    let lin: f64 = g.iter().zip(z.iter().zip(zt)).map(|(g, (a, b))| g * (a - b)).sum();
    model.density_raw(z) - lin - model.density_raw(zt)
}

/// `h*_rel(z, z̃) = h(z) − D_ih(z̃)(ξ*(z) z_i − z̃_i) − h(z̃)`.
pub fn adjusted_rel_entropy_density<E: Entropy + ?Sized>(
    z: &[f64],
    zt: &[f64],
    params: &TruncationParams,
    model: &E,
) -> Result<f64> {
    model.check_point("adjusted_rel_entropy_density", z, false)?;
    model.check_point("adjusted_rel_entropy_density", zt, true)?;
    check_scale("adjusted_rel_entropy_density", zt, params)?;
    Ok(adjusted_raw(z, zt, params, model))
}

pub(crate) fn adjusted_raw<E: Entropy + ?Sized>(
    z: &[f64],
    zt: &[f64],
    params: &TruncationParams,
    model: &E,
) -> f64 {
    let xi = model.truncation(z, params).value;
    if xi == 1.0 {
        return rel_raw(z, zt, model);
    }
    let g = model.gradient_vec(zt);
    let lin: f64 = g.iter().zip(z.iter().zip(zt)).map(|(g, (a, b))| g * (xi * a - b)).sum();
    model.density_raw(z) - lin - model.density_raw(zt)
}

/// `dist_α(z, z̃) = h*_rel(z, z̃) + (α/2)(u − ũ)²`.
///
/// ```
/// use erds::entropy::{dist_alpha_density, EntropyModel, TruncationParams};
/// let m = EntropyModel::witness(1);
/// let p = TruncationParams::new(10.0, 2.0, 0.1, 1.0).unwrap();
/// let v = dist_alpha_density(&[1.1, 1.0], &[1.0, 1.0], &p, &m).unwrap();
/// assert!((v - 0.0102947).abs() < 1e-7);
/// ```
pub fn dist_alpha_density<E: Entropy + ?Sized>(
    z: &[f64],
    zt: &[f64],
    params: &TruncationParams,
    model: &E,
) -> Result<f64> {
    model.check_point("dist_alpha_density", z, false)?;
    model.check_point("dist_alpha_density", zt, true)?;
    check_scale("dist_alpha_density", zt, params)?;
    Ok(dist_raw(z, zt, params, model))
}

pub(crate) fn dist_raw<E: Entropy + ?Sized>(
    z: &[f64],
    zt: &[f64],
    params: &TruncationParams,
    model: &E,
) -> f64 {
    let du = z[0] - zt[0];
    adjusted_raw(z, zt, params, model) + 0.5 * params.alpha * du * du
}

fn check_scale(func: &'static str, zt: &[f64], params: &TruncationParams) -> Result<()> {
    let b = zt.iter().copied().fold(0.0, f64::max);
    if params.e < 2.0 * b {
        return Err(domain(func, format!("E = {} is below 2·max z̃ = {}", params.e, 2.0 * b)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::EntropyModel;

    #[test]
    fn examples() {
        let m = EntropyModel::witness(1);
        assert_eq!(rel_entropy_density(&[1.0, 1.0], &[1.0, 1.0], &m).unwrap(), 0.0);
        let h11 = m.entropy_density(&[1.1, 1.0]).unwrap();
        assert!((h11 + 0.4662791).abs() < 1e-6);
        let p = TruncationParams::new(10.0, 2.0, 0.1, 1.0).unwrap();
        assert_eq!(dist_alpha_density(&[1.0, 1.0], &[1.0, 1.0], &p, &m).unwrap(), 0.0);
        assert!(rel_entropy_density(&[1.0, 1.0], &[1.0, 0.0], &m).is_err());
    }

    #[test]
    fn adjusted_matches_classical_inside_and_linear_part_outside() {
        let m = EntropyModel::witness(2);
        let p = TruncationParams::new(4.0, 2.0, 0.1, 1.0).unwrap();
        let zt = [1.0, 0.5, 1.5];
        let z = [1.5, 1.0, 1.2];
        let a = adjusted_rel_entropy_density(&z, &zt, &p, &m).unwrap();
        let r = rel_entropy_density(&z, &zt, &m).unwrap();
        assert!((a - r).abs() < 1e-15);
        let far = [10.0, 5.0, 3.0];
        let a = adjusted_rel_entropy_density(&far, &zt, &p, &m).unwrap();
        let g = m.entropy_gradient(&zt).unwrap();
        let expect = m.entropy_density(&far).unwrap() + g.dot(&nalgebra::DVector::from_row_slice(&zt))
            - m.entropy_density(&zt).unwrap();
        assert!((a - expect).abs() < 1e-12);
    }

    #[test]
    fn scale_precondition() {
        let m = EntropyModel::witness(1);
        let p = TruncationParams::new(2.0, 2.0, 0.1, 1.0).unwrap();
        assert!(dist_alpha_density(&[1.0, 1.0], &[1.5, 1.0], &p, &m).is_err());
    }
}
