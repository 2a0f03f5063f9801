//! Binomial pmf and cdf that stay accurate for large `n`.
//!
//! Terms are evaluated in log space (plain products for `n <= 50`) and
//! accumulated with Neumaier summation.

const PLAIN_PRODUCT_MAX_N: u64 = 50;

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `ln C(n, k)`; negative infinity when `k > n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k)
        .map(|i| (((n - k + i) as f64) / (i as f64)).ln())
        .collect::<CompensatedSum>()
        .value()
}

/// `C(n, k)` as a float (exact while it fits in 53 bits).
pub fn choose(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 1..=k {
        acc = acc * ((n - k + i) as f64) / (i as f64);
    }
    acc.round()
}

/// `ln[p^k (1-p)^(n-k)]` for a single configuration with `k` successes.
pub fn ln_term(k: u64, n: u64, p: f64) -> f64 {
    let succ = if k == 0 { 0.0 } else { k as f64 * p.ln() };
    let fail = if k == n { 0.0 } else { (n - k) as f64 * (-p).ln_1p() };
    succ + fail
}

/// Probability of exactly `k` successes in `n` trials with success probability `p`.
pub fn pmf(k: u64, n: u64, p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    if n <= PLAIN_PRODUCT_MAX_N {
        return choose(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
    }
    (ln_choose(n, k) + ln_term(k, n, p)).exp()
}

/// `P[X <= k]`.
pub fn cdf(k: u64, n: u64, p: f64) -> f64 {
    if k >= n {
        return 1.0;
    }
    (0..=k).map(|j| pmf(j, n, p)).collect::<CompensatedSum>().value()
}

/// Full pmf table `b(0..=n; n, p)`.
pub fn pmf_table(n: u64, p: f64) -> Vec<f64> {
    if n <= PLAIN_PRODUCT_MAX_N || p == 0.0 || p == 1.0 {
        return (0..=n).map(|k| pmf(k, n, p)).collect();
    }
    // ln C(n, k) built up incrementally and compensated
    let mut ln_c = CompensatedSum::default();
    (0..=n)
        .map(|k| {
            if k > 0 {
                ln_c.add((((n - k + 1) as f64) / (k as f64)).ln());
            }
            (ln_c.value() + ln_term(k, n, p)).exp()
        })
        .collect()
}

/// [`pmf_table`] rescaled to sum to one, which removes the common scale error
/// that log-space terms pick up at very large `n`.
pub fn normalized_pmf_table(n: u64, p: f64) -> Vec<f64> {
    let mut t = pmf_table(n, p);
    let total = t.iter().cloned().collect::<CompensatedSum>().value();
    t.iter_mut().for_each(|x| *x /= total);
    t
}
