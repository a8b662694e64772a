//! Numeric routines: softmax, log-gamma, regularized incomplete gamma
//! tails, and a one-sample Kolmogorov-Smirnov uniformity check.

/// Numerically stable softmax. Returns a probability vector summing to 1.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for p in &mut out {
        *p /= sum;
    }
    out
}

/// ln Γ(x) for x > 0 (Lanczos approximation, ~1e-10 relative accuracy).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut ser = 1.000000000190015;
    for (j, &c) in COEFFS.iter().enumerate() {
        ser += c / (x + 1.0 + j as f64);
    }
    -tmp + (2.5066282746310005 * ser / x).ln()
}

const GAMMA_EPS: f64 = 1e-14;
const GAMMA_MAX_ITER: usize = 600;

/// Series expansion of the lower regularized incomplete gamma P(a, x),
/// valid for x < a + 1.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Continued-fraction factor h with Q(a, x) = exp(-x + a ln x - lnΓ(a)) * h,
/// valid for x >= a + 1 (modified Lentz).
fn gamma_q_cf_factor(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    h
}

/// Upper regularized incomplete gamma Q(a, x) = Γ(a, x) / Γ(a), a > 0, x >= 0.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        (1.0 - gamma_p_series(a, x)).clamp(0.0, 1.0)
    } else {
        ((-x + a * x.ln() - ln_gamma(a)).exp() * gamma_q_cf_factor(a, x)).clamp(0.0, 1.0)
    }
}

/// ln Q(a, x), finite even where Q underflows to zero in linear space.
pub fn ln_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        (1.0 - gamma_p_series(a, x)).max(f64::MIN_POSITIVE).ln()
    } else {
        (-x + a * x.ln() - ln_gamma(a)) + gamma_q_cf_factor(a, x).ln()
    }
}

/// One-sample Kolmogorov-Smirnov statistic against Uniform(0, 1).
pub fn ks_statistic_uniform(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let hi = (i + 1) as f64 / n - x;
        let lo = x - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    d
}

/// Critical KS distance at significance 0.01 (Stephens' approximation).
pub fn ks_critical_01(n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    1.62762 / (sqrt_n + 0.12 + 0.11 / sqrt_n)
}

/// KS uniformity check at significance 0.01: true when the sample is
/// consistent with Uniform(0, 1).
pub fn ks_uniform_01(samples: &[f64]) -> bool {
    ks_statistic_uniform(samples) < ks_critical_01(samples.len())
}
