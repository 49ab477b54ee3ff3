//! Small dense linear algebra: cyclic Jacobi for symmetric eigenvalues and
//! partial-pivot LU determinants. Matrices are row-major `n × n` slices.

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method.
///
/// Sweeps until the off-diagonal Frobenius norm drops below `1e-14` times
/// the Frobenius norm of the input (absolute floor `1e-300`). Returned in
/// ascending order.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    let mut m = a.to_vec();
    let total: f64 = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let threshold = (1e-14 * total).max(1e-300);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&m, n) < threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

fn off_diagonal_norm(m: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[i * n + j] * m[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Singular values of a square matrix from the eigenvalues of `AᵀA`,
/// with tiny negative eigenvalues clamped to zero. Descending order.
pub fn singular_values(a: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    let mut ata = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..n).map(|k| a[k * n + i] * a[k * n + j]).sum();
            ata[i * n + j] = s;
            ata[j * n + i] = s;
        }
    }
    let mut sv: Vec<f64> = symmetric_eigenvalues(&ata, n)
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    sv.reverse();
    sv
}

/// Determinant by LU factorisation with partial pivoting. An exactly zero
/// pivot column gives `0.0`.
pub fn determinant(a: &[f64], n: usize) -> f64 {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    let mut m = a.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r1, &r2| m[r1 * n + col].abs().total_cmp(&m[r2 * n + col].abs()))
            .unwrap_or(col);
        let pv = m[pivot * n + col];
        if pv == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        det *= pv;
        for r in (col + 1)..n {
            let factor = m[r * n + col] / pv;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[r * n + k] -= factor * m[col * n + k];
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_diagonal_and_rotated() {
        let e = symmetric_eigenvalues(&[3.0, 0.0, 0.0, 1.0], 2);
        assert_eq!(e, vec![1.0, 3.0]);
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let e = symmetric_eigenvalues(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_sum_to_trace() {
        let a = [4.0, 1.0, -2.0, 1.0, 3.0, 0.5, -2.0, 0.5, 1.0];
        let e = symmetric_eigenvalues(&a, 3);
        let tr: f64 = e.iter().sum();
        assert!((tr - 8.0).abs() < 1e-12);
        let prod: f64 = e.iter().product();
        assert!((prod - determinant(&a, 3)).abs() < 1e-10);
    }

    #[test]
    fn singular_values_rank_one() {
        let sv = singular_values(&[1.0, 1.0, 1.0, 1.0], 2);
        assert!((sv[0] - 2.0).abs() < 1e-12);
        assert!(sv[1].abs() < 1e-7);
    }

    #[test]
    fn determinant_with_pivoting() {
        assert_eq!(determinant(&[0.0, 1.0, 1.0, 0.0], 2), -1.0);
        let d = determinant(&[0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0], 3);
        assert!((d - 4.0).abs() < 1e-14);
        assert_eq!(determinant(&[1.0, 2.0, 2.0, 4.0], 2), 0.0);
    }
}
