use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::entropy::EntropyModel;
use crate::error::{config, domain, Result};

/// Exchange reaction `c_i ⇌ c_j` with rate `kappa` (species indices are 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExchangePair {
    pub i: usize,
    pub j: usize,
    pub kappa: f64,
}

/// A list of exchange reactions.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionSpec {
    #[serde(default)]
    pub pairs: Vec<ExchangePair>,
}

impl ReactionSpec {
    pub fn none() -> Self {
        ReactionSpec { pairs: Vec::new() }
    }

    pub fn single(i: usize, j: usize, kappa: f64) -> Self {
        ReactionSpec {
            pairs: vec![ExchangePair { i, j, kappa }],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.iter().all(|p| p.kappa == 0.0)
    }

    /// `true` when species `i` (1-based) takes part in some reaction.
    pub fn touches(&self, i: usize) -> bool {
        self.pairs.iter().any(|p| p.kappa != 0.0 && (p.i == i || p.j == i))
    }

    pub fn validate(&self, n: usize, prefix: &str) -> Result<()> {
        for (k, p) in self.pairs.iter().enumerate() {
            if !(1 <= p.i && p.i < p.j && p.j <= n) {
                return Err(config(format!("{prefix}.pairs[{k}]"), format!("need 1 <= i < j <= {n}")));
            }
            if !(p.kappa >= 0.0 && p.kappa.is_finite()) {
                return Err(config(format!("{prefix}.pairs[{k}].kappa"), "must be >= 0"));
            }
        }
        Ok(())
    }
}

/// Reaction vector `(0, R_1, …, R_n)`: each pair adds `κ(c_j/w_j − c_i/w_i)` to
/// `R_i` and subtracts it from `R_j`.
///
/// ```
/// use erds::entropy::EntropyModel;
/// use erds::models::{reaction, ReactionSpec};
/// let r = reaction(&[1.0, 2.0, 0.0], &ReactionSpec::single(1, 2, 1.0),
///                  &EntropyModel::witness(2)).unwrap();
/// assert!((r[1] + 2f64.sqrt()).abs() < 1e-15 && (r[2] - 2f64.sqrt()).abs() < 1e-15);
/// ```
pub fn reaction(z: &[f64], rspec: &ReactionSpec, model: &EntropyModel) -> Result<DVector<f64>> {
    if z.len() != model.dim() || !(z[0] > 0.0) || z[1..].iter().any(|&c| !(c >= 0.0)) {
        return Err(domain("reaction", "need u > 0 and c_i >= 0"));
    }
    let mut out = vec![0.0; z.len()];
    reaction_raw(z, rspec, model, &mut out);
    Ok(DVector::from_vec(out))
}

pub(crate) fn reaction_raw(z: &[f64], rspec: &ReactionSpec, model: &EntropyModel, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let u = z[0];
    for p in &rspec.pairs {
        if p.kappa == 0.0 {
            continue;
        }
        let wi = model.species[p.i - 1].derivs(u)[0];
        let wj = model.species[p.j - 1].derivs(u)[0];
        let r = p.kappa * (z[p.j] / wj - z[p.i] / wi);
        out[p.i] += r;
        out[p.j] -= r;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_of_exchange() {
        let m = EntropyModel::default();
        let u = 0.8;
        let w1 = m.species[0].derivs(u)[0];
        let w2 = m.species[1].derivs(u)[0];
        let r = reaction(&[u, 2.0 * w1, 2.0 * w2], &ReactionSpec::single(1, 2, 3.0), &m).unwrap();
        assert!(r.norm() < 1e-15);
    }

    #[test]
    fn validation() {
        let r = ReactionSpec::single(2, 1, 1.0);
        assert!(r.validate(2, "model.reactions").is_err());
        let r = ReactionSpec::single(1, 3, 1.0);
        assert!(r.validate(2, "model.reactions").is_err());
        let r = ReactionSpec::single(1, 2, -1.0);
        assert!(r.validate(2, "model.reactions").is_err());
        assert!(ReactionSpec::single(1, 2, 1.0).touches(2));
        assert!(!ReactionSpec::single(1, 2, 1.0).touches(3));
    }
}
