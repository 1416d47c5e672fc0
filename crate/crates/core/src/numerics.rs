//! Shared numerical utilities: quadrature, statistics, least squares.
//!
//! Composite Simpson with 2^10 panels is the single quadrature rule used for
//! density mark spaces throughout the crate, for reproducibility.

use crate::scalar::Scalar;

/// Default panel count for composite Simpson quadrature.
pub const SIMPSON_PANELS: usize = 1 << 10;

/// Composite Simpson rule on [a, b] with `panels` panels (panels made even).
pub fn simpson<S: Scalar>(f: impl Fn(S) -> S, a: S, b: S, panels: usize) -> S {
    let n = if panels % 2 == 0 { panels } else { panels + 1 };
    let h = (b - a) / S::of_usize(n);
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + h * S::of_usize(i);
        let w = if i % 2 == 1 { S::of(4.0) } else { S::of(2.0) };
        acc = acc + w * f(x);
    }
    acc * h / S::of(3.0)
}

/// Composite trapezoid rule on [a, b] with `n` subintervals.
pub fn trapezoid<S: Scalar>(f: impl Fn(S) -> S, a: S, b: S, n: usize) -> S {
    let n = n.max(1);
    let h = (b - a) / S::of_usize(n);
    let mut acc = (f(a) + f(b)) * S::of(0.5);
    for i in 1..n {
        acc = acc + f(a + h * S::of_usize(i));
    }
    acc * h
}

/// Sample mean.
pub fn mean<S: Scalar>(xs: &[S]) -> S {
    if xs.is_empty() {
        return S::zero();
    }
    xs.iter().copied().sum::<S>() / S::of_usize(xs.len())
}

/// Standard error of the sample mean (unbiased variance estimate).
pub fn std_error<S: Scalar>(xs: &[S]) -> S {
    let n = xs.len();
    if n < 2 {
        return S::zero();
    }
    let m = mean(xs);
    let var = xs
        .iter()
        .map(|&x| (x - m) * (x - m))
        .sum::<S>()
        / S::of_usize(n - 1);
    (var / S::of_usize(n)).sqrt()
}

/// Ordinary least squares fit y = intercept + slope * x.
///
/// Returns (intercept, slope).
pub fn linear_fit<S: Scalar>(xs: &[S], ys: &[S]) -> (S, S) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points to fit a line");
    let n = S::of_usize(xs.len());
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxx = S::zero();
    let mut sxy = S::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
    }
    let _ = n;
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// One-sample Kolmogorov-Smirnov statistic of `samples` against the CDF `cdf`.
///
/// Sorts a copy of the samples; D_n = sup |F_n - F|.
pub fn ks_statistic<S: Scalar>(samples: &[S], cdf: impl Fn(S) -> S) -> S {
    let mut xs: Vec<S> = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = S::of_usize(xs.len());
    let mut d = S::zero();
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let lo = S::of_usize(i) / n;
        let hi = S::of_usize(i + 1) / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Asymptotic KS critical value at significance `alpha` in {0.05, 0.01, 0.001}.
pub fn ks_critical<S: Scalar>(n: usize, alpha: f64) -> S {
    let c = if alpha <= 0.001 {
        1.949
    } else if alpha <= 0.01 {
        1.628
    } else {
        1.358
    };
    S::of(c) / S::of_usize(n).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_integrates_polynomials_exactly() {
        // Simpson is exact through cubics.
        let v = simpson(|x: f64| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 8);
        assert_relative_eq!(v, 4.0 - 4.0 + 2.0, epsilon = 1e-13);
    }

    #[test]
    fn simpson_constant_density_mass() {
        let v = simpson(|_: f64| 1.0, 0.0, 2.0, SIMPSON_PANELS);
        assert_relative_eq!(v, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn trapezoid_linear_exact() {
        let v = trapezoid(|x: f64| 3.0 * x, 0.0, 1.0, 4);
        assert_relative_eq!(v, 1.5, epsilon = 1e-14);
    }

    #[test]
    fn fit_recovers_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (b, m) = linear_fit(&xs, &ys);
        assert_relative_eq!(b, 1.0, epsilon = 1e-12);
        assert_relative_eq!(m, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn ks_detects_wrong_law() {
        // Uniform samples against the uniform CDF: small statistic.
        let n = 4096;
        let unif: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&unif, |x| x.clamp(0.0, 1.0));
        assert!(d < ks_critical::<f64>(n, 0.01));
        // Same samples against Exp(1): large statistic.
        let d_bad = ks_statistic(&unif, |x: f64| 1.0 - (-x).exp());
        assert!(d_bad > ks_critical::<f64>(n, 0.01));
    }

    #[test]
    fn stderr_shrinks_with_n() {
        let xs: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        let se = std_error(&xs);
        assert!(se > 0.0 && se < 0.1);
    }
}
