use crate::scalar::HdgScalar;

/// Solves a tridiagonal system by Gaussian elimination with partial
/// pivoting (the `gtsv` algorithm). `dl[i]` is entry `(i+1, i)` and `du[i]`
/// entry `(i, i+1)`. All inputs are overwritten; the solution is left in
/// `b`. Returns `false` if a pivot vanishes relative to `scale`.
pub fn solve_tridiagonal<T: HdgScalar>(dl: &mut [T], d: &mut [T], du: &mut [T], b: &mut [T]) -> bool {
    let n = d.len();
    if n == 0 {
        return true;
    }
    let scale = d
        .iter()
        .chain(dl.iter())
        .chain(du.iter())
        .map(|v| v.modulus())
        .fold(0.0, f64::max);
    let tiny = scale * f64::EPSILON * n as f64;
    let mut fill = vec![T::zero(); n.saturating_sub(2)];
    for i in 0..n - 1 {
        if d[i].modulus() >= dl[i].modulus() {
            if d[i].modulus() <= tiny {
                return false;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            let bi = b[i];
            b[i + 1] -= fact * bi;
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                fill[i] = du[i + 1];
                du[i + 1] = -fact * fill[i];
            }
            du[i] = temp;
            let bi = b[i];
            b[i] = b[i + 1];
            b[i + 1] = bi - fact * b[i + 1];
        }
    }
    if d[n - 1].modulus() <= tiny {
        return false;
    }
    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - fill[i] * b[i + 2]) / d[i];
    }
    b.iter().all(|v| v.to_complex().is_finite())
}

/// Solves a tridiagonal system given by its off-diagonals and row sums
/// `rho[i] = dl[i-1] + d[i] + du[i]`, without pivoting. Each elimination step
/// updates the row sum rather than the diagonal, and pivots are recovered as
/// `rho - du`. For diagonally dominant M-matrices every quantity is then a
/// sum of like-signed terms, so small row sums survive next to large
/// off-diagonals. Meant for row diagonally dominant systems, where
/// elimination without pivoting is stable. `rho` is overwritten; the solution
/// is left in `b`.
pub fn solve_tridiagonal_row_sums<T: HdgScalar>(dl: &[T], du: &[T], rho: &mut [T], b: &mut [T]) -> bool {
    let n = rho.len();
    if n == 0 {
        return true;
    }
    let sup = |i: usize| if i + 1 < n { du[i] } else { T::zero() };
    let scale = rho
        .iter()
        .chain(dl.iter())
        .chain(du.iter())
        .map(|v| v.modulus())
        .fold(0.0, f64::max);
    let tiny = scale * f64::EPSILON * n as f64;
    let mut pivots = Vec::with_capacity(n);
    for i in 0..n {
        let piv = rho[i] - sup(i);
        if piv.modulus() <= tiny {
            return false;
        }
        pivots.push(piv);
        if i + 1 < n {
            let fact = dl[i] / piv;
            let (ri, bi) = (rho[i], b[i]);
            rho[i + 1] -= fact * ri;
            b[i + 1] -= fact * bi;
        }
    }
    b[n - 1] /= pivots[n - 1];
    for i in (0..n - 1).rev() {
        let next = b[i + 1];
        b[i] = (b[i] - du[i] * next) / pivots[i];
    }
    b.iter().all(|v| v.to_complex().is_finite())
}
