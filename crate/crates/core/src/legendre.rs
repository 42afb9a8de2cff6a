//! Legendre polynomials P_n(x) on [-1, 1].

/// P_n(x) by the three-term recurrence
/// (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}.
pub fn legendre(n: usize, x: f64) -> f64 {
    let mut p_prev = 1.0;
    if n == 0 {
        return p_prev;
    }
    let mut p = x;
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * p - k as f64 * p_prev) / (k + 1) as f64;
        p_prev = p;
        p = next;
    }
    p
}

/// P_0(x) ..= P_order(x) in one pass.
pub fn legendre_all(order: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    out.push(1.0);
    if order == 0 {
        return out;
    }
    out.push(x);
    for k in 1..order {
        let next = ((2 * k + 1) as f64 * x * out[k] - k as f64 * out[k - 1]) / (k + 1) as f64;
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        for &x in &[-1.0, -0.3, 0.0, 0.5, 1.0] {
            assert_eq!(legendre(0, x), 1.0);
            assert_eq!(legendre(1, x), x);
            assert!((legendre(2, x) - (3.0 * x * x - 1.0) / 2.0).abs() < 1e-15);
            assert!((legendre(3, x) - (5.0 * x * x * x - 3.0 * x) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn batch_matches_single() {
        let all = legendre_all(12, 0.37);
        for (n, v) in all.iter().enumerate() {
            assert_eq!(*v, legendre(n, 0.37));
        }
        assert!((legendre(40, 1.0) - 1.0).abs() < 1e-12);
        assert!((legendre(41, -1.0) + 1.0).abs() < 1e-12);
    }
}
