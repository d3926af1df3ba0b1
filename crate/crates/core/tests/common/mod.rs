//! Independent reference implementations used by the integration tests. None of
//! these call into the library's numerical code.
#![allow(dead_code)]

use landweber::Complex64;
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cn<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| cn(rng))
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| cn(rng)).collect()
}

pub fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// `y_i = Δx Σ_j g[(i − j) mod n] x_j`, summed term by term.
pub fn direct_cyclic_convolution(kernel: &[Complex64], x: &[Complex64], dx: f64) -> Vec<Complex64> {
    let n = kernel.len();
    (0..n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += kernel[(i + n - j) % n] * x[j];
            }
            acc * dx
        })
        .collect()
}

/// `M^H M` by explicit triple loop.
pub fn gram(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (rows, cols) = m.shape();
    DMatrix::from_fn(cols, cols, |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..rows {
            acc += m[(r, i)].conj() * m[(r, j)];
        }
        acc
    })
}

pub fn matvec(m: &DMatrix<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

pub fn adjoint_matvec(m: &DMatrix<Complex64>, y: &[Complex64]) -> Vec<Complex64> {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].conj() * y[i]).sum())
        .collect()
}

/// Gaussian elimination with partial pivoting on a copy of `a`.
pub fn gauss_solve(a: &DMatrix<Complex64>, b: &[Complex64]) -> Vec<Complex64> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    let mut m: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let mut row: Vec<Complex64> = (0..n).map(|j| a[(i, j)]).collect();
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| m[p][col].norm().total_cmp(&m[q][col].norm()))
            .unwrap();
        m.swap(col, pivot);
        let p = m[col][col];
        assert!(p.norm() > 0.0, "singular system");
        for row in col + 1..n {
            let f = m[row][col] / p;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in col..=n {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut acc = m[i][n];
        for j in i + 1..n {
            acc -= m[i][j] * x[j];
        }
        x[i] = acc / m[i][i];
    }
    x
}

/// Least-squares solution through the normal equations, solved by elimination.
pub fn least_squares(h: &DMatrix<Complex64>, y: &[Complex64]) -> Vec<Complex64> {
    gauss_solve(&gram(h), &adjoint_matvec(h, y))
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_symmetric(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Eigenvalues of a Hermitian matrix `A + iB` via the real embedding
/// `[[A, −B], [B, A]]`, whose spectrum is that of `A + iB` with every value doubled.
pub fn jacobi_hermitian(m: &DMatrix<Complex64>) -> Vec<f64> {
    let n = m.nrows();
    let mut r = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            r[i][j] = z.re;
            r[i + n][j + n] = z.re;
            r[i][j + n] = -z.im;
            r[i + n][j] = z.im;
        }
    }
    jacobi_symmetric(&r).into_iter().step_by(2).collect()
}

/// Eigenvalues of `H^H H`, ascending.
pub fn gram_eigenvalues(h: &DMatrix<Complex64>) -> Vec<f64> {
    jacobi_hermitian(&gram(h))
}

/// `∏ (1 − w_k λ)` evaluated directly.
pub fn beta(factors: &[f64], lambda: f64) -> f64 {
    factors.iter().map(|w| 1.0 - w * lambda).product()
}
