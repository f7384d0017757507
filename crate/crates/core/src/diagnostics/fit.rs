use crate::error::{domain, Result};

/// Least-squares line through `(t, log v)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    /// `−slope`: the decay rate.
    pub rate: f64,
    pub slope: f64,
    pub intercept: f64,
    /// `max_t [log v(t) − (intercept + slope t)]`.
    pub max_violation: f64,
    /// Number of points used.
    pub points: usize,
    /// `true` when a non-positive value cut the series short.
    pub truncated: bool,
}

/// Fits `log v ≈ intercept + slope·t` on the leading run of positive values.
///
/// ```
/// let t: Vec<f64> = (0..20).map(|k| k as f64 * 0.1).collect();
/// let v: Vec<f64> = t.iter().map(|t| (-2.0 * t).exp()).collect();
/// let fit = erds::diagnostics::decay_fit(&t, &v).unwrap();
/// assert!((fit.rate - 2.0).abs() < 1e-9);
/// ```
pub fn decay_fit(t: &[f64], v: &[f64]) -> Result<DecayFit> {
    if t.len() != v.len() {
        return Err(domain("decay_fit", "length mismatch"));
    }
    let prefix = v.iter().take_while(|x| **x > 0.0 && x.is_finite()).count();
    if prefix < 10 {
        return Err(domain("decay_fit", format!("need at least 10 positive values, got {prefix}")));
    }
    let ts = &t[..prefix];
    let ys: Vec<f64> = v[..prefix].iter().map(|x| x.ln()).collect();
    let n = prefix as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let mut stt = 0.0;
    let mut sty = 0.0;
    for (a, b) in ts.iter().zip(&ys) {
        stt += (a - tm) * (a - tm);
        sty += (a - tm) * (b - ym);
    }
    let slope = if stt > 0.0 { sty / stt } else { 0.0 };
    let intercept = ym - slope * tm;
    let max_violation = ts
        .iter()
        .zip(&ys)
        .map(|(a, b)| b - (intercept + slope * a))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit {
        rate: -slope,
        slope,
        intercept,
        max_violation,
        points: prefix,
        truncated: prefix < v.len(),
    })
}

/// Envelope `v(t) ≤ v(t₀) e^{k(t − t₀)}` anchored at the first value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    /// Least-squares slope of `log(v/v(t₀))` against `t − t₀` through the origin.
    pub rate: f64,
    /// `max_t [log v(t) − log v(t₀) − k (t − t₀)]`, at least 0.
    pub max_violation: f64,
    pub points: usize,
}

/// Fits the anchored envelope on the leading run of positive values.
///
/// ```
/// let t: Vec<f64> = (0..20).map(|k| k as f64 * 0.1).collect();
/// let v: Vec<f64> = t.iter().map(|t| 3.0 * (0.5 * t).exp()).collect();
/// let env = erds::diagnostics::anchored_envelope(&t, &v).unwrap();
/// assert!((env.rate - 0.5).abs() < 1e-9 && env.max_violation < 1e-9);
/// ```
pub fn anchored_envelope(t: &[f64], v: &[f64]) -> Result<Envelope> {
    if t.len() != v.len() {
        return Err(domain("anchored_envelope", "length mismatch"));
    }
    let prefix = v.iter().take_while(|x| **x > 0.0 && x.is_finite()).count();
    if prefix < 10 {
        return Err(domain("anchored_envelope", format!("need at least 10 positive values, got {prefix}")));
    }
    let (t0, y0) = (t[0], v[0].ln());
    let mut stt = 0.0;
    let mut sty = 0.0;
    for k in 1..prefix {
        let dt = t[k] - t0;
        stt += dt * dt;
        sty += dt * (v[k].ln() - y0);
    }
    let rate = if stt > 0.0 { sty / stt } else { 0.0 };
    let max_violation = (0..prefix)
        .map(|k| v[k].ln() - y0 - rate * (t[k] - t0))
        .fold(0.0, f64::max);
    Ok(Envelope {
        rate,
        max_violation,
        points: prefix,
    })
}
