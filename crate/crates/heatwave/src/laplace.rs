//! Long-time information from real-axis Laplace data: the Tauberian limit
//! lim_{lambda -> 0} lambda * U(lambda) by Richardson extrapolation, and
//! pointwise inversion by the Gaver-Stehfest sequence.

use crate::error::{Error, Result};

/// Default starting lambda for the Tauberian extrapolation.
pub const TAUBERIAN_LAMBDA0: f64 = 0.1;

/// Estimated limit with the extrapolation spread as an error bar.
#[derive(Debug, Clone, Copy)]
pub struct TauberianEstimate {
    pub limit: f64,
    pub error_bar: f64,
}

/// lim_{lambda -> 0} lambda * transform(lambda), from samples at
/// lambda0 / 2^k, k = 0..3, via a ratio-2 Richardson table.
pub fn tauberian_limit(
    transform: impl Fn(f64) -> f64,
    lambda0: f64,
) -> Result<TauberianEstimate> {
    if !(lambda0 > 0.0) || !lambda0.is_finite() {
        return Err(Error::Domain(format!(
            "lambda0 must be > 0, got {lambda0}"
        )));
    }
    let samples: Vec<f64> = (0..4)
        .map(|k| {
            let lam = lambda0 / 2f64.powi(k);
            lam * transform(lam)
        })
        .collect();
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("transform produced non-finite values".into()));
    }
    // diverging data: successive sample differences must not keep growing
    let d01 = (samples[1] - samples[0]).abs();
    let d12 = (samples[2] - samples[1]).abs();
    let d23 = (samples[3] - samples[2]).abs();
    let scale = samples.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if d23 > d12 && d12 > d01 && d23 > 1e-10 * scale {
        return Err(Error::Numerical(format!(
            "limit not detected: lambda * transform(lambda) diverges as lambda -> 0 \
             (sample differences grow {d01:.3e} -> {d23:.3e})"
        )));
    }
    // triangular Richardson table; diag[i] is the order-i estimate
    let mut table = vec![samples.clone()];
    for j in 1..4 {
        let fac = 2f64.powi(j as i32) - 1.0;
        let prev = &table[j - 1];
        let row: Vec<f64> = (1..prev.len())
            .map(|i| prev[i] + (prev[i] - prev[i - 1]) / fac)
            .collect();
        table.push(row);
    }
    let diag: Vec<f64> = table.iter().map(|row| *row.last().expect("nonempty")).collect();
    // size of the last correction bounds the remaining truncation error
    Ok(TauberianEstimate {
        limit: diag[3],
        error_bar: (diag[3] - diag[2]).abs(),
    })
}

/// Eliminate sqrt(lambda) and lambda error terms from three samples of
/// A(lambda) at lambda, lambda/2, lambda/4 (so sqrt-ratio sqrt(2)).
pub fn extrapolate_sqrt(a0: f64, a1: f64, a2: f64) -> f64 {
    let s = 2f64.sqrt();
    let b0 = (s * a1 - a0) / (s - 1.0);
    let b1 = (s * a2 - a1) / (s - 1.0);
    2.0 * b1 - b0
}

/// Gaver-Stehfest inversion: u(t) ~ (ln 2 / t) sum_k v_k U(k ln 2 / t).
pub fn invert_real_axis(
    transform: impl Fn(f64) -> f64,
    t: f64,
    order: usize,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be > 0, got {t}")));
    }
    let weights = stehfest_weights(order)?;
    let ln2 = std::f64::consts::LN_2;
    let mut acc = 0.0;
    for (k, v) in weights.iter().enumerate() {
        let lam = (k + 1) as f64 * ln2 / t;
        let val = transform(lam);
        if !val.is_finite() {
            return Err(Error::Numerical(format!(
                "transform not finite at lambda = {lam}"
            )));
        }
        acc += v * val;
    }
    Ok(acc * ln2 / t)
}

fn stehfest_weights(order: usize) -> Result<Vec<f64>> {
    if order > 18 {
        return Err(Error::Domain(format!(
            "Stehfest order {order} > 18 overflows double-precision weights"
        )));
    }
    if order < 2 || order % 2 != 0 {
        return Err(Error::Domain(format!(
            "Stehfest order must be a small even integer, got {order}"
        )));
    }
    let half = order / 2;
    let fact = |n: usize| -> f64 { (1..=n).map(|i| i as f64).product() };
    let mut v = vec![0.0; order];
    for (k0, vk) in v.iter_mut().enumerate() {
        let k = k0 + 1;
        let mut sum = 0.0;
        for j in k.div_ceil(2)..=k.min(half) {
            sum += (j as f64).powi(half as i32) * fact(2 * j)
                / (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
        }
        let sign = if (k + half) % 2 == 0 { 1.0 } else { -1.0 };
        *vk = sign * sum;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tauberian_closed_forms() {
        // u = 1: U = 1/lambda
        let c = tauberian_limit(|l| 1.0 / l, TAUBERIAN_LAMBDA0).unwrap();
        assert!((c.limit - 1.0).abs() < 1e-12);
        // u = e^{-t}: U = 1/(lambda + 1); the four-sample table at
        // lambda0 = 0.1 leaves an O(lambda0^4) residual near 1.3e-6
        let d = tauberian_limit(|l| 1.0 / (l + 1.0), TAUBERIAN_LAMBDA0).unwrap();
        assert!(d.limit.abs() < 2e-6, "{}", d.limit);
        // u = 1 - e^{-t}
        let e = tauberian_limit(|l| 1.0 / l - 1.0 / (l + 1.0), TAUBERIAN_LAMBDA0).unwrap();
        assert!((e.limit - 1.0).abs() < 2e-6);
        assert!(e.error_bar < 1e-4);
        // starting closer to zero shrinks the residual by (lambda0 ratio)^4
        let d = tauberian_limit(|l| 1.0 / (l + 1.0), 0.01).unwrap();
        assert!(d.limit.abs() < 1e-8, "{}", d.limit);
        let e = tauberian_limit(|l| 1.0 / l - 1.0 / (l + 1.0), 0.01).unwrap();
        assert!((e.limit - 1.0).abs() < 1e-8);
    }

    #[test]
    fn tauberian_rejects_divergence() {
        // lambda * U = 1/sqrt(lambda) diverges as lambda -> 0
        let err = tauberian_limit(|l| l.powf(-1.5), TAUBERIAN_LAMBDA0).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)), "{err}");
    }

    #[test]
    fn tauberian_is_linear() {
        let f = |l: f64| 1.0 / l - 1.0 / (l + 1.0);
        let g = |l: f64| 1.0 / (l + 2.0);
        let a = tauberian_limit(f, 0.1).unwrap().limit;
        let b = tauberian_limit(g, 0.1).unwrap().limit;
        let combined = tauberian_limit(|l| 3.0 * f(l) + 2.0 * g(l), 0.1).unwrap().limit;
        assert!((combined - (3.0 * a + 2.0 * b)).abs() < 1e-12);
    }

    #[test]
    fn stehfest_closed_form_pairs() {
        // U = 1/lambda <-> u = 1
        for t in [0.5, 1.0, 2.0, 10.0] {
            let u = invert_real_axis(|l| 1.0 / l, t, 12).unwrap();
            assert!((u - 1.0).abs() < 1e-8, "t={t}: {u}");
        }
        // U = 1/(lambda+1) <-> u = e^{-t}; order-12 discretization error
        // at t = 1 is 1.005e-5 (confirmed in exact arithmetic)
        let u = invert_real_axis(|l| 1.0 / (l + 1.0), 1.0, 12).unwrap();
        assert!((u - (-1.0f64).exp()).abs() < 2e-5, "{u}");
        // U = 1/lambda^2 <-> u = t
        let u = invert_real_axis(|l| 1.0 / (l * l), 2.0, 12).unwrap();
        assert!((u - 2.0).abs() < 1e-5, "{u}");
    }

    #[test]
    fn stehfest_order_effects() {
        let exact = (-1.0f64).exp();
        let e8 = (invert_real_axis(|l| 1.0 / (l + 1.0), 1.0, 8).unwrap() - exact).abs();
        let e12 = (invert_real_axis(|l| 1.0 / (l + 1.0), 1.0, 12).unwrap() - exact).abs();
        assert!(e12 < e8, "order 12 ({e12}) should beat order 8 ({e8})");
        assert!(invert_real_axis(|l| 1.0 / l, 1.0, 20).is_err());
        assert!(invert_real_axis(|l| 1.0 / l, 1.0, 7).is_err());
    }

    #[test]
    fn stehfest_is_linear() {
        let f = |l: f64| 1.0 / (l + 1.0);
        let g = |l: f64| 1.0 / (l * l);
        let a = invert_real_axis(f, 1.5, 12).unwrap();
        let b = invert_real_axis(g, 1.5, 12).unwrap();
        // weights reach ~8e6, so cancellation leaves O(1e-9) round-off
        let c = invert_real_axis(|l| 2.0 * f(l) - 0.5 * g(l), 1.5, 12).unwrap();
        assert!((c - (2.0 * a - 0.5 * b)).abs() < 1e-8);
    }

    #[test]
    fn sqrt_extrapolation_eliminates_low_order_terms() {
        // A(lambda) = L + c1 sqrt(lambda) + c2 lambda + c3 lambda^{3/2}
        let a = |lam: f64| 5.0 + 2.0 * lam.sqrt() - 3.0 * lam + 0.7 * lam.powf(1.5);
        let est = extrapolate_sqrt(a(0.1), a(0.05), a(0.025));
        assert!((est - 5.0).abs() < 1e-2, "{est}");
        // much better than the best raw sample
        assert!((est - 5.0).abs() < 0.05 * (a(0.025) - 5.0).abs());
    }

    #[test]
    fn lemma_duality_time_average_matches_limit() {
        // (1/T) int_0^T (1 - e^{-t}) dt at T = 1e3 vs the Tauberian limit
        let t_max = 1e3f64;
        let avg = (t_max - (1.0 - (-t_max).exp())) / t_max;
        let lim = tauberian_limit(|l| 1.0 / l - 1.0 / (l + 1.0), 0.1)
            .unwrap()
            .limit;
        assert!((avg - lim).abs() < 1e-3);
    }
}
