//! Small dense helpers.

/// Solves A x = b by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Least-squares fit y ≈ Σ c_j basis_j(x) through the normal equations,
/// with columns scaled to unit norm first.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let p = rows.first()?.len();
    let scale: Vec<f64> = (0..p)
        .map(|j| rows.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt().max(f64::MIN_POSITIVE))
        .collect();
    let mut ata = vec![vec![0.0; p]; p];
    let mut atb = vec![0.0; p];
    for (r, &yv) in rows.iter().zip(y) {
        for i in 0..p {
            atb[i] += r[i] / scale[i] * yv;
            for j in 0..p {
                ata[i][j] += r[i] / scale[i] * r[j] / scale[j];
            }
        }
    }
    let c = solve_dense(ata, atb)?;
    Some(c.iter().zip(&scale).map(|(c, s)| c / s).collect())
}

/// Slope and intercept of the least-squares line, with the slope's standard error.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    let se = if x.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (slope, icpt, se)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_and_fits() {
        let x = solve_dense(vec![vec![0.0, 2.0], vec![3.0, 1.0]], vec![4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|v| 2.0 * v + 1.0).collect();
        let (a, b, se) = linear_fit(&xs, &ys);
        assert!((a - 2.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14 && se < 1e-12);
        let rows: Vec<Vec<f64>> = xs.iter().map(|&v| vec![1.0, v, v * v]).collect();
        let ys: Vec<f64> = xs.iter().map(|v| 1.0 - v + 0.5 * v * v).collect();
        let c = least_squares(&rows, &ys).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] + 1.0).abs() < 1e-12 && (c[2] - 0.5).abs() < 1e-12);
    }
}
