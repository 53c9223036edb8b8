//! Bracketing, bisection and quadrature helpers shared by the solvers.

use crate::error::{Error, Result};

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// A sign change of a function between two sample points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

/// Samples `f` on `points` (ascending) and returns every bracket where it
/// changes sign. Points where `f` fails are skipped. A sample that is exactly
/// zero yields a degenerate bracket `[x, x]`.
pub fn sign_changes<F>(points: &[f64], mut f: F) -> Vec<Bracket>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in points {
        let Ok(fx) = f(x) else {
            prev = None;
            continue;
        };
        if fx == 0.0 {
            out.push(Bracket {
                lo: x,
                hi: x,
                f_lo: 0.0,
                f_hi: 0.0,
            });
            prev = None;
            continue;
        }
        if let Some((px, pf)) = prev {
            if pf.signum() != fx.signum() {
                out.push(Bracket {
                    lo: px,
                    hi: x,
                    f_lo: pf,
                    f_hi: fx,
                });
            }
        }
        prev = Some((x, fx));
    }
    out
}

/// Bisects a bracket until its relative width is below `rel_tol` or no
/// further floating-point progress is possible.
pub fn bisect<F>(bracket: Bracket, rel_tol: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let Bracket {
        mut lo,
        mut hi,
        mut f_lo,
        ..
    } = bracket;
    if lo == hi {
        return Ok(lo);
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= rel_tol * mid.abs() {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NotConverged("bisection exceeded its iteration cap".into()))
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (p_n, p_nm1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * p_n - p_nm1) / (x * x - 1.0);
    (p_n, d)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels of
/// `order` points each.
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (nodes, weights) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * width;
        for (x, w) in nodes.iter().zip(&weights) {
            out.push((mid + 0.5 * width * x, 0.5 * width * w));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_space_endpoints() {
        let xs = log_space(1e-8, 1e8, 200);
        assert_eq!(xs.len(), 200);
        assert_eq!(xs[199], 1e8);
        assert!((xs[0] - 1e-8).abs() < 1e-22);
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn sign_changes_skip_failures() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 + 0.5).collect();
        let found = sign_changes(&xs, |x| {
            if (3.0..4.0).contains(&x) {
                Err(Error::NoSolution("hole".into()))
            } else {
                Ok((x - 2.0) * (x - 7.2))
            }
        });
        assert_eq!(found.len(), 2);
        assert_eq!((found[0].lo, found[0].hi), (1.5, 2.5));
        assert_eq!((found[1].lo, found[1].hi), (6.5, 7.5));
    }

    #[test]
    fn bisect_finds_sqrt_two() {
        let b = Bracket {
            lo: 1.0,
            hi: 2.0,
            f_lo: -1.0,
            f_hi: 2.0,
        };
        let r = bisect(b, 1e-15, |x| Ok(x * x - 2.0)).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 4e-16);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 10, 16] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn composite_rule_integrates_gaussian() {
        let rule = composite_gauss_legendre(0.0, 12.0, 40, 10);
        let q: f64 = rule.iter().map(|(x, w)| w * (-x * x).exp()).sum();
        assert!((q - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-14);
    }
}
