//! Log-space evaluation of truncated exponential series.

/// `ln Σ_{i=0}^{k} xⁱ / i!` for `x ≥ 0`, accumulated in log space so neither
/// `xⁱ` nor `i!` is ever formed.
pub fn ln_truncated_exp(x: f64, k: usize) -> f64 {
    debug_assert!(x >= 0.0, "series argument must be nonnegative");
    if x <= 0.0 || k == 0 {
        return 0.0;
    }
    let ln_x = x.ln();
    let mut terms = Vec::with_capacity(k + 1);
    let mut ln_term = 0.0;
    terms.push(ln_term);
    for i in 1..=k {
        ln_term += ln_x - (i as f64).ln();
        terms.push(ln_term);
    }
    log_sum_exp(&terms)
}

/// `Σ_{i=1}^{k} xⁱ / i!`, the truncated series without its constant term.
pub fn truncated_exp_tail(x: f64, k: usize) -> f64 {
    ln_truncated_exp(x, k).exp_m1()
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(x: f64, k: usize) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for i in 1..=k {
            term *= x / i as f64;
            sum += term;
        }
        sum.ln()
    }

    #[test]
    fn matches_direct_summation() {
        for &x in &[0.0, 1e-6, 0.3, 1.0, 2.5, 10.0, 40.0] {
            for k in 0..25 {
                let d = direct(x, k);
                assert!((ln_truncated_exp(x, k) - d).abs() < 1e-12 * d.abs().max(1.0), "x={x} k={k}");
            }
        }
    }

    #[test]
    fn survives_overflow_range() {
        // 1000! and 500^1000 both overflow f64
        let v = ln_truncated_exp(500.0, 1000);
        assert!((v - 500.0).abs() < 1e-6, "{v}");
        assert!(ln_truncated_exp(1e5, 300).is_finite());
    }

    #[test]
    fn tail_excludes_constant() {
        assert!((truncated_exp_tail(1.0, 2) - 1.5).abs() < 1e-15);
        assert_eq!(truncated_exp_tail(0.0, 4), 0.0);
    }
}
