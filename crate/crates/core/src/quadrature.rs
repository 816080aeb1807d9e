//! Composite Gauss–Legendre rules on finite intervals.

use std::f64::consts::PI;

/// Nodes and weights of the `order`-point rule on [-1, 1].
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    assert!(order >= 1, "quadrature order must be positive");
    let n = order;
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights of the composite rule with `panels` equal panels on [a, b].
pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    assert!(panels >= 1, "need at least one panel");
    let base = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = a + p as f64 * h;
            base.iter().map(move |&(x, w)| (lo + 0.5 * h * (x + 1.0), 0.5 * h * w))
        })
        .collect()
}
