//! Shared quadrature and finite-difference kernels.
//!
//! Quadrature is a composite rule built from degree-4 Lagrange interpolation
//! over panels of four consecutive intervals; it works on graded (non-uniform)
//! node sets and reduces to composite Boole on uniform ones. Derivative
//! stencils come from Fornberg's algorithm so the same code path serves
//! uniform and graded grids.

/// Integration weights for the degree-(n-1) interpolant through `nodes`,
/// integrated over `[a, b]`. Nodes are shifted to their midpoint before the
/// monomial expansion to keep the small Vandermonde-like products conditioned.
pub fn lagrange_integration_weights(nodes: &[f64], a: f64, b: f64) -> Vec<f64> {
    let n = nodes.len();
    assert!(n >= 2 && n <= 8, "panel size out of range");
    let mid = 0.5 * (nodes[0] + nodes[n - 1]);
    let ys: Vec<f64> = nodes.iter().map(|&x| x - mid).collect();
    let (lo, hi) = (a - mid, b - mid);

    // Moments of monomials over [lo, hi].
    let mut moments = vec![0.0; n];
    for (d, m) in moments.iter_mut().enumerate() {
        let p = (d + 1) as f64;
        *m = (hi.powi(d as i32 + 1) - lo.powi(d as i32 + 1)) / p;
    }

    let mut weights = vec![0.0; n];
    for j in 0..n {
        // Expand prod_{k != j} (y - ys[k]) into monomial coefficients.
        let mut coeffs = vec![0.0; n];
        coeffs[0] = 1.0;
        let mut deg = 0;
        let mut denom = 1.0;
        for k in 0..n {
            if k == j {
                continue;
            }
            denom *= ys[j] - ys[k];
            // multiply by (y - ys[k])
            for d in (0..=deg).rev() {
                coeffs[d + 1] += coeffs[d];
                coeffs[d] *= -ys[k];
            }
            deg += 1;
        }
        let mut acc = 0.0;
        for d in 0..n {
            acc += coeffs[d] * moments[d];
        }
        weights[j] = acc / denom;
    }
    weights
}

/// Composite quadrature weights over the full node set: panels of four
/// intervals, with the final partial panel integrated from the last five
/// nodes so the order does not degrade at the tail.
pub fn panel_quadrature_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    assert!(n >= 5, "need at least 5 nodes for the composite panel rule");
    let mut weights = vec![0.0; n];
    let intervals = n - 1;
    let full_panels = intervals / 4;
    let rem = intervals % 4;

    for p in 0..full_panels {
        let i0 = 4 * p;
        let panel = &nodes[i0..i0 + 5];
        let w = lagrange_integration_weights(panel, panel[0], panel[4]);
        for (k, wk) in w.iter().enumerate() {
            weights[i0 + k] += wk;
        }
    }
    if rem > 0 {
        // Integrate the remaining `rem` intervals with the degree-4
        // interpolant through the last five nodes.
        let i0 = n - 5;
        let panel = &nodes[i0..n];
        let w = lagrange_integration_weights(panel, nodes[n - 1 - rem], nodes[n - 1]);
        for (k, wk) in w.iter().enumerate() {
            weights[i0 + k] += wk;
        }
    }
    weights
}

/// Fornberg weights for derivatives 0..=max_order at `x0` from `nodes`.
/// Returns one weight row per derivative order.
pub fn fornberg_weights(x0: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    assert!(max_order < n, "need more nodes than derivative order");
    let m = max_order;
    // c[k][j]: weight of node j for the k-th derivative.
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Cubic Lagrange interpolation on an ascending node set.
/// Queries outside the node range clamp to the nearest end stencil.
pub struct CubicInterpolator<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
}

impl<'a> CubicInterpolator<'a> {
    pub fn new(xs: &'a [f64], ys: &'a [f64]) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert!(xs.len() >= 4);
        Self { xs, ys }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let pos = self.xs.partition_point(|&t| t < x);
        let i0 = pos.saturating_sub(2).min(n - 4);
        let xs = &self.xs[i0..i0 + 4];
        let ys = &self.ys[i0..i0 + 4];
        let mut acc = 0.0;
        for j in 0..4 {
            let mut lj = 1.0;
            for k in 0..4 {
                if k != j {
                    lj *= (x - xs[k]) / (xs[j] - xs[k]);
                }
            }
            acc += lj * ys[j];
        }
        acc
    }
}

/// Ordinary least squares for y = X beta with a small fixed number of
/// regressors, solved through the normal equations with partial pivoting.
pub fn least_squares(columns: &[&[f64]], y: &[f64]) -> Vec<f64> {
    let p = columns.len();
    let n = y.len();
    for c in columns {
        assert_eq!(c.len(), n);
    }
    let mut ata = vec![vec![0.0; p]; p];
    let mut aty = vec![0.0; p];
    for i in 0..p {
        for j in 0..p {
            ata[i][j] = columns[i].iter().zip(columns[j]).map(|(a, b)| a * b).sum();
        }
        aty[i] = columns[i].iter().zip(y).map(|(a, b)| a * b).sum();
    }
    solve_dense(&mut ata, &mut aty);
    aty
}

/// In-place Gaussian elimination with partial pivoting; solution ends in `b`.
pub fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        assert!(d != 0.0, "singular system");
        for row in (col + 1)..n {
            let f = a[row][col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in (col + 1)..n {
            acc -= a[col][k] * b[k];
        }
        b[col] = acc / a[col][col];
    }
}
