//! Goodness-of-fit statistics used by the property suites and experiments:
//! Kolmogorov–Smirnov, Pearson χ² and binomial intervals.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Asymptotic Kolmogorov constant at the 1% level, `sqrt(−ln(0.005)/2)`.
pub const KS_C_1PCT: f64 = 1.627_617_6;

/// Largest gap between the empirical CDF of `samples` and `cdf`.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// 1% critical value of the one-sample statistic for `n` draws.
pub fn ks_one_sample_critical_1pct(n: usize) -> f64 {
    KS_C_1PCT / (n as f64).sqrt()
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut worst: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        worst = worst.max((i as f64 / na - j as f64 / nb).abs());
    }
    worst
}

/// 1% critical value of the two-sample statistic.
pub fn ks_two_sample_critical_1pct(na: usize, nb: usize) -> f64 {
    let (na, nb) = (na as f64, nb as f64);
    KS_C_1PCT * ((na + nb) / (na * nb)).sqrt()
}

/// Pearson χ² statistic of `points` in `(0,1)²` against the uniform law on a
/// `bins × bins` grid.
pub fn chi_square_uniform_2d(points: &[[f64; 2]], bins: usize) -> f64 {
    let mut counts = vec![0usize; bins * bins];
    for p in points {
        let i = ((p[0] * bins as f64) as usize).min(bins - 1);
        let j = ((p[1] * bins as f64) as usize).min(bins - 1);
        counts[i * bins + j] += 1;
    }
    let expected = points.len() as f64 / (bins * bins) as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}

/// Upper 1% point of the χ² law with `dof` degrees of freedom.
pub fn chi_square_critical_1pct(dof: usize) -> f64 {
    ChiSquared::new(dof as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.99)
}

/// Standard error of a binomial proportion.
pub fn binomial_stderr(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// A proportion sequence is nondecreasing within two sigma when no adjacent
/// pair drops by more than twice the combined binomial standard error.
pub fn nondecreasing_within_2sigma(props: &[(f64, usize)]) -> bool {
    props.windows(2).all(|w| {
        let (p0, n0) = w[0];
        let (p1, n1) = w[1];
        let sigma = (binomial_stderr(p0, n0).powi(2) + binomial_stderr(p1, n1).powi(2)).sqrt();
        p1 >= p0 - 2.0 * sigma
    })
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
