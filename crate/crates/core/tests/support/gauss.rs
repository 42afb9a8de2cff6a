//! Gauss–Legendre nodes (ascending) and weights on [-1, 1].

use qdeflect::legendre::legendre;

pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let derivative = |x: f64| n as f64 * (x * legendre(n, x) - legendre(n - 1, x)) / (x * x - 1.0);
        for _ in 0..100 {
            let dx = legendre(n, x) / derivative(x);
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let dp = derivative(x);
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}
