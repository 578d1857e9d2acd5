use crate::error::{Error, Result};

/// Least-squares growth rate from annulus samples `(s, ‖v‖²_{L²(A(s,2s))})`.
///
/// A field of rate `γ` on an `n`-dimensional cone has squared annulus norm
/// `~ s^{n+2γ}`, so the rate is `(m - n)/2` for the log-log slope `m`.
pub fn estimate_rate_from_samples(samples: &[(f64, f64)], n: u32) -> Result<f64> {
    if samples.len() < 4 {
        return Err(Error::Invalid(format!(
            "need at least 4 samples, got {}",
            samples.len()
        )));
    }
    for (i, w) in samples.windows(2).enumerate() {
        if !(w[1].0 < w[0].0) {
            return Err(Error::Invalid(format!(
                "radii must strictly decrease (sample {})",
                i + 1
            )));
        }
    }
    for (i, &(s, l2)) in samples.iter().enumerate() {
        if !(s > 0.0) || !(l2 > 0.0) || !l2.is_finite() {
            return Err(Error::Domain(format!(
                "sample {i}: need s > 0 and positive finite norm, got ({s}, {l2})"
            )));
        }
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(s, l2)| (s.ln(), l2.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok((slope - f64::from(n)) / 2.0)
}

/// `s_i = s0 · ratio^i` for `i < count`.
pub fn geometric_radii(s0: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| s0 * ratio.powi(i as i32)).collect()
}
