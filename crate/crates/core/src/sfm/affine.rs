//! Minimum-norm point of the affine hull of a small point set.

/// Coefficients `alpha` with `sum(alpha) = 1` minimizing `|sum alpha_i p_i|`.
///
/// Solves the bordered Gram system first and falls back to a re-orthogonalized
/// QR least-squares solve when that system is ill-conditioned.
pub(crate) fn affine_minimizer(points: &[Vec<f64>]) -> Vec<f64> {
    let k = points.len();
    if k == 1 {
        return vec![1.0];
    }
    if let Some(alpha) = bordered_gram(points) {
        if optimality_residual(points, &alpha) <= 1e-10 * (1.0 + max_sq_norm(points)) {
            return alpha;
        }
    }
    qr_least_squares(points)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_sq_norm(points: &[Vec<f64>]) -> f64 {
    points.iter().map(|p| dot(p, p)).fold(0.0, f64::max)
}

pub(crate) fn combine(points: &[Vec<f64>], coef: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; points[0].len()];
    for (p, &c) in points.iter().zip(coef) {
        for (yi, pi) in y.iter_mut().zip(p) {
            *yi += c * pi;
        }
    }
    y
}

/// Spread of `<y, p_i>` over the active points; zero at the affine minimizer.
fn optimality_residual(points: &[Vec<f64>], alpha: &[f64]) -> f64 {
    let y = combine(points, alpha);
    let ips: Vec<f64> = points.iter().map(|p| dot(&y, p)).collect();
    let lo = ips.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ips.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if alpha.iter().all(|a| a.is_finite()) {
        hi - lo
    } else {
        f64::INFINITY
    }
}

/// `[G 1; 1' 0] [alpha; mu] = [0; 1]` by Gaussian elimination with partial pivoting.
fn bordered_gram(points: &[Vec<f64>]) -> Option<Vec<f64>> {
    let k = points.len();
    let n = k + 1;
    let mut a = vec![0.0; n * n];
    for i in 0..k {
        for j in i..k {
            let g = dot(&points[i], &points[j]);
            a[i * n + j] = g;
            a[j * n + i] = g;
        }
        a[i * n + k] = 1.0;
        a[k * n + i] = 1.0;
    }
    let mut rhs = vec![0.0; n];
    rhs[k] = 1.0;
    let scale = (0..n * n).map(|i| a[i].abs()).fold(0.0, f64::max);
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))?;
        if a[piv * n + col].abs() <= 1e-14 * scale {
            return None;
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            rhs.swap(piv, col);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f != 0.0 {
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    let mut sol = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r * n + c] * sol[c]).sum();
        sol[r] = (rhs[r] - s) / a[r * n + r];
    }
    sol.truncate(k);
    Some(sol)
}

/// Minimizes `|p_0 + D beta|` with `D = [p_i - p_0]` via modified Gram-Schmidt
/// applied twice; directions with negligible residual norm get zero weight.
fn qr_least_squares(points: &[Vec<f64>]) -> Vec<f64> {
    let k = points.len();
    let p0 = &points[0];
    let cols: Vec<Vec<f64>> = points[1..].iter().map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut r = vec![vec![0.0; k - 1]; k - 1];
    let mut kept: Vec<usize> = Vec::new();
    let scale = cols.iter().map(|c| dot(c, c).sqrt()).fold(0.0, f64::max).max(1e-300);
    for (j, c) in cols.iter().enumerate() {
        let mut v = c.clone();
        for _ in 0..2 {
            for (qi, &row) in q.iter().zip(&kept) {
                let proj = dot(qi, &v);
                r[row][j] += proj;
                for (vi, qv) in v.iter_mut().zip(qi) {
                    *vi -= proj * qv;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-12 * scale {
            r[j][j] = norm;
            q.push(v.iter().map(|x| x / norm).collect());
            kept.push(j);
        }
    }
    // R beta = -Q' p0 restricted to the kept columns.
    let qtb: Vec<f64> = q.iter().map(|qi| -dot(qi, p0)).collect();
    let mut beta = vec![0.0; k - 1];
    for idx in (0..kept.len()).rev() {
        let j = kept[idx];
        let s: f64 = kept[idx + 1..].iter().map(|&c| r[j][c] * beta[c]).sum();
        beta[j] = (qtb[idx] - s) / r[j][j];
    }
    let mut alpha = Vec::with_capacity(k);
    alpha.push(1.0 - beta.iter().sum::<f64>());
    alpha.extend(beta);
    alpha
}
