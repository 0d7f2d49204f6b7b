//! Legendre modal basis and Gauss-Legendre quadrature on `[-1, 1]`.

/// Values `P_0(ξ), …, P_p(ξ)` and derivatives of the Legendre polynomials.
pub fn legendre(p: usize, xi: f64) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; p + 1];
    let mut d = vec![0.0; p + 1];
    v[0] = 1.0;
    if p >= 1 {
        v[1] = xi;
        d[1] = 1.0;
    }
    for n in 1..p {
        let nf = n as f64;
        v[n + 1] = ((2.0 * nf + 1.0) * xi * v[n] - nf * v[n - 1]) / (nf + 1.0);
        // P'_{n+1} = P'_{n-1} + (2n+1) P_n
        d[n + 1] = d[n - 1] + (2.0 * nf + 1.0) * v[n];
    }
    (v, d)
}

/// `n`-point Gauss-Legendre rule on `[-1, 1]`, exact for degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, refined by Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (v, d) = legendre(n, x);
            dp = d[n];
            let dx = v[n] / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d[n] != 0.0 { d[n] } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}
