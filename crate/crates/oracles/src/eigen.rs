use nalgebra::{DMatrix, SymmetricEigen};

/// Smallest eigenvalue of `-u'' + xi u = lambda u` with Robin conditions,
/// discretized by linear elements with a lumped mass matrix, computed by a
/// dense symmetric eigensolver.
pub fn dense_robin_laplacian(length: f64, n_cells: usize, xi: f64, beta: (f64, f64)) -> f64 {
    let n = n_cells + 1;
    let h = length / n_cells as f64;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for cell in 0..n_cells {
        let (i, j) = (cell, cell + 1);
        a[(i, i)] += 1.0 / h;
        a[(j, j)] += 1.0 / h;
        a[(i, j)] -= 1.0 / h;
        a[(j, i)] -= 1.0 / h;
    }
    a[(0, 0)] += beta.0;
    a[(n - 1, n - 1)] += beta.1;
    let mass: Vec<f64> = (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect();
    for i in 0..n {
        a[(i, i)] += xi * mass[i];
    }
    let s = DMatrix::from_fn(n, n, |i, j| a[(i, j)] / (mass[i] * mass[j]).sqrt());
    SymmetricEigen::new(s).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}
