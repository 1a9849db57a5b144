//! Inverse CDFs used to turn stratified uniforms into forecast errors.

use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc_inv;

/// Standard normal quantile.
pub fn standard_normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

pub fn normal_quantile(p: f64, mean: f64, std_dev: f64) -> f64 {
    mean + std_dev * standard_normal_quantile(p)
}

/// Beta(alpha, beta) quantile by bisection on the regularized incomplete
/// beta function. Result is within `1e-10` of the true quantile.
pub fn beta_quantile(p: f64, alpha: f64, beta: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if beta_reg(alpha, beta, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
