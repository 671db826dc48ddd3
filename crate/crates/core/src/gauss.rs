//! Gauss–Legendre nodes and weights on [-1, 1].
//!
//! Nodes are the roots of the Legendre polynomial P_n, found by Newton
//! iteration from the standard Chebyshev-like initial guess; weights use
//! w_i = 2 / ((1 - x_i^2) P_n'(x_i)^2). An n-point rule integrates
//! polynomials up to degree 2n - 1 exactly.

/// Legendre P_n(x) and its derivative, by upward recurrence.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes (ascending) and weights of the n-point Gauss–Legendre rule.
///
/// Newton iteration is run to a residual below 1e-15; node symmetry about
/// zero is enforced exactly by mirroring the lower half.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n / 2;

    for i in 0..half {
        // initial guess for the i-th root in descending order
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let (_, dp) = legendre_with_deriv(n, 0.0);
        nodes[half] = 0.0;
        weights[half] = 2.0 / (dp * dp);
    }
    (nodes, weights)
}

/// Nodes and weights rescaled to integrate over [a, b].
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    (
        xs.iter().map(|x| mid + hw * x).collect(),
        ws.iter().map(|w| w * hw).collect(),
    )
}
