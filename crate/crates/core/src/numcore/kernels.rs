//! Low-level f64 compute kernels shared by the tape forward pass and the
//! pure inference paths, so the math exists in exactly one place.

/// C = A @ B for row-major A (m x k) and B (k x n).
pub fn matmul(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    let mut c = vec![0.0; m * n];
    for i in 0..m {
        let a_row = &a[i * k..(i + 1) * k];
        let c_row = &mut c[i * n..(i + 1) * n];
        for (p, &a_val) in a_row.iter().enumerate() {
            let b_row = &b[p * n..(p + 1) * n];
            for (c_val, &b_val) in c_row.iter_mut().zip(b_row) {
                *c_val += a_val * b_val;
            }
        }
    }
    c
}

/// dA = G @ B^T for G (m x n), B (k x n); result is (m x k).
pub fn matmul_grad_lhs(g: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut da = vec![0.0; m * k];
    for i in 0..m {
        let g_row = &g[i * n..(i + 1) * n];
        let da_row = &mut da[i * k..(i + 1) * k];
        for p in 0..k {
            let b_row = &b[p * n..(p + 1) * n];
            let mut dot = 0.0;
            for (gv, bv) in g_row.iter().zip(b_row) {
                dot += gv * bv;
            }
            da_row[p] = dot;
        }
    }
    da
}

/// dB = A^T @ G for A (m x k), G (m x n); result is (k x n).
pub fn matmul_grad_rhs(a: &[f64], g: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut db = vec![0.0; k * n];
    for i in 0..m {
        let a_row = &a[i * k..(i + 1) * k];
        let g_row = &g[i * n..(i + 1) * n];
        for (p, &a_val) in a_row.iter().enumerate() {
            let db_row = &mut db[p * n..(p + 1) * n];
            for (dv, &gv) in db_row.iter_mut().zip(g_row) {
                *dv += a_val * gv;
            }
        }
    }
    db
}

/// y = v @ M for a length-k vector and a (k x n) matrix.
pub fn vecmat(v: &[f64], m: &[f64], k: usize, n: usize) -> Vec<f64> {
    debug_assert_eq!(v.len(), k);
    debug_assert_eq!(m.len(), k * n);
    let mut y = vec![0.0; n];
    for (i, &v_val) in v.iter().enumerate() {
        let m_row = &m[i * n..(i + 1) * n];
        for (yv, &mv) in y.iter_mut().zip(m_row) {
            *yv += v_val * mv;
        }
    }
    y
}

pub fn add_assign(acc: &mut [f64], rhs: &[f64]) {
    debug_assert_eq!(acc.len(), rhs.len());
    for (a, b) in acc.iter_mut().zip(rhs) {
        *a += b;
    }
}

pub fn tanh_vec(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.tanh()).collect()
}

pub fn sigmoid_vec(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| sigmoid(*x)).collect()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small_known() {
        // [1 2; 3 4] @ [5 6; 7 8] = [19 22; 43 50]
        let c = matmul(&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0, 7.0, 8.0], 2, 2, 2);
        assert_eq!(c, vec![19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn matmul_grads_match_transpose_products() {
        let a = [1.0, -2.0, 0.5, 3.0, 1.5, -1.0]; // 2x3
        let b = [2.0, 0.0, -1.0, 1.0, 0.5, 2.0, 1.0, -3.0, 0.25, 4.0, -0.5, 1.0]; // 3x4
        let g = [1.0; 8]; // 2x4
        let da = matmul_grad_lhs(&g, &b, 2, 3, 4);
        let db = matmul_grad_rhs(&a, &g, 2, 3, 4);
        // dA[i][p] = sum_j B[p][j]; dB[p][j] = sum_i A[i][p]
        for i in 0..2 {
            for p in 0..3 {
                let expect: f64 = (0..4).map(|j| b[p * 4 + j]).sum();
                assert!((da[i * 3 + p] - expect).abs() < 1e-12);
            }
        }
        for p in 0..3 {
            for j in 0..4 {
                let expect: f64 = (0..2).map(|i| a[i * 3 + p]).sum();
                assert!((db[p * 4 + j] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vecmat_known() {
        let y = vecmat(&[1.0, 2.0], &[3.0, 4.0, 5.0, 6.0], 2, 2);
        assert_eq!(y, vec![13.0, 16.0]);
    }

    #[test]
    fn sigmoid_stable_at_extremes() {
        assert!(sigmoid(1000.0) <= 1.0);
        assert!(sigmoid(-1000.0) >= 0.0);
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
    }
}
