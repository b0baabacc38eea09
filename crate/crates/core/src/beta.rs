//! Binomial coefficients and incomplete Beta integrals of the monomials
//! `x^(k-1) (1-x)^(n-k)` that appear in the win-probability recursion.
//!
//! The regularized incomplete Beta function with integer parameters is a
//! binomial tail, so `I_x(k, n-k+1) = sum_{j=k}^{n} C(n,j) x^j (1-x)^(n-j)`.
//! Summing nonnegative Bernstein terms avoids the cancellation that the
//! expanded polynomial would suffer for large `n`.

use crate::error::{Error, Result};

/// `C(n, k)` as a float: exact integer arithmetic while it fits in `u128`,
/// then the multiplicative formula in floating point. `C(256, 128)` is about
/// 5.8e75, so the supported range never overflows.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut exact = 1u128;
    for i in 0..k {
        match exact.checked_mul((n - i) as u128) {
            Some(v) => exact = v / (i as u128 + 1),
            None => {
                let mut c = exact as f64;
                for j in i..k {
                    c = c * (n - j) as f64 / (j + 1) as f64;
                }
                return c;
            }
        }
    }
    exact as f64
}

/// Multinomial coefficient `(sum sizes)! / prod(size_i!)`, as a product of
/// binomials so no factorial is formed.
pub fn multinomial(sizes: &[usize]) -> f64 {
    let mut total = 0usize;
    let mut acc = 1.0f64;
    for &s in sizes {
        total += s;
        acc *= binomial(total, s);
    }
    acc
}

/// Regularized incomplete Beta `I_x(k, n-k+1)` for integers `1 <= k <= n`.
pub fn regularized_beta(x: f64, k: usize, n: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    // Sum the shorter tail: upper tail j >= k directly, or 1 - lower tail.
    if k > n / 2 {
        bernstein_sum(x, k..=n, n)
    } else {
        (1.0 - bernstein_sum(x, 0..=k - 1, n)).max(0.0)
    }
}

fn bernstein_sum(x: f64, js: std::ops::RangeInclusive<usize>, n: usize) -> f64 {
    let y = 1.0 - x;
    js.map(|j| binomial(n, j) * x.powi(j as i32) * y.powi((n - j) as i32))
        .sum()
}

/// `int_a^b x^(k-1) (1-x)^(n-k) dx` for `0 <= a <= b <= 1` and `1 <= k <= n`.
pub fn beta_segment(a: f64, b: f64, k: usize, n: usize) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::InvalidRange(format!("slot {k} outside 1..={n}")));
    }
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
        return Err(Error::InvalidRange(format!(
            "interval [{a}, {b}] is not an ordered subinterval of [0, 1]"
        )));
    }
    Ok(regularized_segment(a, b, k, n) / (n as f64 * binomial(n - 1, k - 1)))
}

/// `I_b - I_a` for the `(k, n-k+1)` Beta distribution; unchecked.
pub(crate) fn regularized_segment(a: f64, b: f64, k: usize, n: usize) -> f64 {
    if a >= b {
        return 0.0;
    }
    // Both endpoints in the same tail keep the subtraction between
    // comparably sized numbers; near-equal endpoints lose at most a few ulps.
    (regularized_beta(b, k, n) - regularized_beta(a, k, n)).max(0.0)
}
