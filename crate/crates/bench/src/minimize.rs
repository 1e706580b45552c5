//! Plain gradient descent on the penalized least-squares loss, used to check
//! the closed-form and coordinate-descent fits.

/// Z-scored copy of `x` (population standard deviation) and the centered target.
pub fn standardize(x: &[Vec<f64>], y: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = x.len() as f64;
    let p = x[0].len();
    let mut z = x.to_vec();
    for j in 0..p {
        let mean = x.iter().map(|r| r[j]).sum::<f64>() / n;
        let sd = (x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n).sqrt();
        for row in &mut z {
            row[j] = (row[j] - mean) / sd;
        }
    }
    let ybar = y.iter().sum::<f64>() / n;
    (z, y.iter().map(|v| v - ybar).collect())
}

/// `(1/2n)|y - Z b|^2 + alpha/2 |b|^2` for centered `y`.
pub fn ridge_loss(z: &[Vec<f64>], y: &[f64], alpha: f64, b: &[f64]) -> f64 {
    let n = z.len() as f64;
    let sse: f64 = z
        .iter()
        .zip(y)
        .map(|(row, v)| (v - row.iter().zip(b).map(|(a, c)| a * c).sum::<f64>()).powi(2))
        .sum();
    sse / (2.0 * n) + 0.5 * alpha * b.iter().map(|c| c * c).sum::<f64>()
}

/// Minimizes [`ridge_loss`] by fixed-step gradient descent.
pub fn ridge_by_descent(z: &[Vec<f64>], y: &[f64], alpha: f64) -> Vec<f64> {
    let n = z.len() as f64;
    let p = z[0].len();
    // Lipschitz bound: trace of Z'Z/n plus alpha.
    let lip = z.iter().flatten().map(|v| v * v).sum::<f64>() / n + alpha;
    let step = 1.0 / lip;
    let mut b = vec![0.0; p];
    for _ in 0..5_000_000 {
        let mut grad: Vec<f64> = b.iter().map(|c| alpha * c).collect();
        for (row, v) in z.iter().zip(y) {
            let r = row.iter().zip(&b).map(|(a, c)| a * c).sum::<f64>() - v;
            for j in 0..p {
                grad[j] += row[j] * r / n;
            }
        }
        if grad.iter().all(|g| g.abs() < 1e-13) {
            break;
        }
        for j in 0..p {
            b[j] -= step * grad[j];
        }
    }
    b
}

/// Proximal gradient (ISTA) for the elastic-net loss
/// `(1/2n)|y - Z b|^2 + alpha (l1 |b|_1 + (1 - l1)/2 |b|^2)`.
pub fn elastic_net_by_ista(z: &[Vec<f64>], y: &[f64], alpha: f64, l1_ratio: f64) -> Vec<f64> {
    let n = z.len() as f64;
    let p = z[0].len();
    let l2 = alpha * (1.0 - l1_ratio);
    let lip = z.iter().flatten().map(|v| v * v).sum::<f64>() / n + l2;
    let step = 1.0 / lip;
    let thresh = step * alpha * l1_ratio;
    let mut b = vec![0.0; p];
    for _ in 0..5_000_000 {
        let mut grad: Vec<f64> = b.iter().map(|c| l2 * c).collect();
        for (row, v) in z.iter().zip(y) {
            let r = row.iter().zip(&b).map(|(a, c)| a * c).sum::<f64>() - v;
            for j in 0..p {
                grad[j] += row[j] * r / n;
            }
        }
        let mut moved: f64 = 0.0;
        for j in 0..p {
            let u = b[j] - step * grad[j];
            let next = u.signum() * (u.abs() - thresh).max(0.0);
            moved = moved.max((next - b[j]).abs());
            b[j] = next;
        }
        if moved < 1e-14 {
            break;
        }
    }
    b
}
