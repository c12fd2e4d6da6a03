//! Dense complex linear algebra helpers used across the crate.
//!
//! Everything here is a thin layer over `ndarray` / LAPACK: adjoints,
//! residual norms, Hermitian and general matrix exponentials, and the
//! frequency-window reduction used by aliasing-aware spectrum comparisons.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, OperationNorm, Solve, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest absolute entry of a matrix.
pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest absolute entry of a vector.
pub fn max_abs_vec(v: &Array1<C64>) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Frobenius norm of a matrix.
pub fn fro(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Conjugate transpose.
pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// ‖m − m†‖_max.
pub fn hermiticity_residual(m: &Array2<C64>) -> f64 {
    max_abs(&(m - &dagger(m)))
}

/// ‖m·m† − 1‖_max.
pub fn unitarity_residual(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    max_abs(&(m.dot(&dagger(m)) - &eye(n)))
}

/// Complex identity matrix.
pub fn eye(n: usize) -> Array2<C64> {
    Array2::eye(n).mapv(|x: f64| C64::new(x, 0.0))
}

/// Promote a real matrix to complex.
pub fn to_complex(m: &Array2<f64>) -> Array2<C64> {
    m.mapv(|x| C64::new(x, 0.0))
}

/// Hermitian eigendecomposition with guaranteed column eigenvectors:
/// h·V = V·diag(w), so h = V·diag(w)·V†.
///
/// LAPACK backends disagree on the orientation of complex eigenvector
/// output under row-major storage (the returned matrix can be the
/// conjugate of the eigenvector matrix), so the orientation is measured
/// and corrected here.
pub fn hermitian_eig(h: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let (w, v) = h.eigh(UPLO::Lower)?;
    let scale_cols = |m: &Array2<C64>| {
        let mut out = m.clone();
        for (mut col, ww) in out.columns_mut().into_iter().zip(w.iter()) {
            col.mapv_inplace(|z| z * C64::new(*ww, 0.0));
        }
        out
    };
    let res_as_is = max_abs(&(h.dot(&v) - scale_cols(&v)));
    let vc = v.mapv(|z| z.conj());
    let res_conj = max_abs(&(h.dot(&vc) - scale_cols(&vc)));
    Ok(if res_conj < res_as_is { (w, vc) } else { (w, v) })
}

/// exp(scale·h) for Hermitian `h` through its eigendecomposition.
///
/// For purely imaginary `scale` the result is unitary to machine precision.
pub fn expm_hermitian(h: &Array2<C64>, scale: C64) -> Result<Array2<C64>> {
    let (w, v) = hermitian_eig(h)?;
    let phases: Array1<C64> = w.mapv(|x| (scale * x).exp());
    let mut scaled = v.clone();
    for (mut col, ph) in scaled.columns_mut().into_iter().zip(phases.iter()) {
        col.mapv_inplace(|z| z * ph);
    }
    Ok(scaled.dot(&dagger(&v)))
}

/// General matrix exponential, scaling-and-squaring with a degree-13 Padé
/// approximant (Higham 2005). Adequate for every operator size in this crate.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;

    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidArgument("expm: matrix must be square".into()));
    }
    let norm1 = a.opnorm_one()?;
    let s = if norm1 > THETA_13 {
        (norm1 / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let a = a.mapv(|z| z / C64::new(2f64.powi(s as i32), 0.0));

    let id = eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let b = |k: usize| C64::new(B[k], 0.0);
    let u_inner = a6.mapv(|z| z * b(13)) + &a4.mapv(|z| z * b(11)) + &a2.mapv(|z| z * b(9));
    let u = a.dot(
        &(a6.dot(&u_inner)
            + &a6.mapv(|z| z * b(7))
            + &a4.mapv(|z| z * b(5))
            + &a2.mapv(|z| z * b(3))
            + &id.mapv(|z| z * b(1))),
    );
    let v_inner = a6.mapv(|z| z * b(12)) + &a4.mapv(|z| z * b(10)) + &a2.mapv(|z| z * b(8));
    let v = a6.dot(&v_inner)
        + &a6.mapv(|z| z * b(6))
        + &a4.mapv(|z| z * b(4))
        + &a2.mapv(|z| z * b(2))
        + &id.mapv(|z| z * b(0));

    // Solve (V − U) X = (V + U) column by column.
    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut x = Array2::<C64>::zeros((n, n));
    for (j, col) in rhs.columns().into_iter().enumerate() {
        let sol = lhs.solve(&col.to_owned())?;
        x.column_mut(j).assign(&sol);
    }
    for _ in 0..s {
        x = x.dot(&x);
    }
    Ok(x)
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues(m: &Array2<C64>) -> Result<Array1<C64>> {
    let (vals, _) = m.eig()?;
    Ok(vals)
}

/// Reduce a frequency to the window [−π/ε, π/ε), with a small guard band so
/// that values sitting exactly on the Nyquist seam map consistently to the
/// negative side under floating-point noise.
pub fn reduce_mod_band(x: f64, eps: f64) -> f64 {
    let band = 2.0 * std::f64::consts::PI / eps;
    let mut y = x - band * (x / band).round();
    let guard = band * 1e-9;
    if y >= band / 2.0 - guard {
        y -= band;
    }
    if y < -band / 2.0 - guard {
        y += band;
    }
    y
}

/// Largest gap between two sorted multisets of frequencies compared modulo
/// 2π/ε. Returns `f64::INFINITY` on length mismatch.
pub fn spectra_distance_mod(a: &[f64], b: &[f64], eps: f64) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut ra: Vec<f64> = a.iter().map(|&x| reduce_mod_band(x, eps)).collect();
    let mut rb: Vec<f64> = b.iter().map(|&x| reduce_mod_band(x, eps)).collect();
    ra.sort_by(|x, y| x.partial_cmp(y).unwrap());
    rb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ra.iter()
        .zip(rb.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Sorted real eigenvalues of a Hermitian matrix.
pub fn eigh_values(m: &Array2<C64>) -> Result<Vec<f64>> {
    let (w, _) = m.eigh(UPLO::Lower)?;
    let mut v = w.to_vec();
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn expm_matches_diagonal_oracle() {
        let a = array![
            [C64::new(0.0, 1.3), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(-0.7, 0.0)]
        ];
        let e = expm(&a).unwrap();
        assert!((e[[0, 0]] - C64::new(0.0, 1.3).exp()).norm() < 1e-14);
        assert!((e[[1, 1]] - C64::new(-0.7, 0.0).exp()).norm() < 1e-14);
        assert!(e[[0, 1]].norm() < 1e-15);
    }

    #[test]
    fn hermitian_eig_reconstructs() {
        let h = array![
            [C64::new(2.0, 0.0), C64::new(0.3, 0.4)],
            [C64::new(0.3, -0.4), C64::new(-1.0, 0.0)]
        ];
        let (w, v) = hermitian_eig(&h).unwrap();
        let mut scaled = v.clone();
        for (mut col, ww) in scaled.columns_mut().into_iter().zip(w.iter()) {
            col.mapv_inplace(|z| z * C64::new(*ww, 0.0));
        }
        assert!(max_abs(&(scaled.dot(&dagger(&v)) - &h)) < 1e-13);
        assert!(unitarity_residual(&v) < 1e-13);
    }

    #[test]
    fn expm_matches_hermitian_route() {
        let h = array![
            [C64::new(2.0, 0.0), C64::new(0.3, 0.4)],
            [C64::new(0.3, -0.4), C64::new(-1.0, 0.0)]
        ];
        let via_eigh = expm_hermitian(&h, C64::new(0.0, -1.0)).unwrap();
        let via_pade = expm(&h.mapv(|z| z * C64::new(0.0, -1.0))).unwrap();
        assert!(max_abs(&(&via_eigh - &via_pade)) < 1e-13);
    }

    #[test]
    fn expm_inverse_property() {
        let a = array![
            [C64::new(0.1, 0.2), C64::new(-0.5, 0.7), C64::new(0.0, 0.3)],
            [C64::new(1.5, 0.0), C64::new(0.0, -0.2), C64::new(0.4, 0.0)],
            [C64::new(0.0, 1.1), C64::new(0.2, 0.2), C64::new(-0.3, 0.0)]
        ];
        let e = expm(&a).unwrap();
        let em = expm(&a.mapv(|z| -z)).unwrap();
        assert!(max_abs(&(e.dot(&em) - eye(3))) < 1e-12);
    }

    #[test]
    fn expm_large_norm_scaling() {
        // 40·σ_y: exp(i·40·σ_y)-style rotation exercises the squaring phase.
        let a = array![
            [C64::new(0.0, 0.0), C64::new(40.0, 0.0)],
            [C64::new(-40.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let e = expm(&a).unwrap();
        let c = 40.0f64.cos();
        let s = 40.0f64.sin();
        assert!((e[[0, 0]] - C64::new(c, 0.0)).norm() < 1e-11);
        assert!((e[[0, 1]] - C64::new(s, 0.0)).norm() < 1e-11);
        assert!((e[[1, 0]] + C64::new(s, 0.0)).norm() < 1e-11);
    }

    #[test]
    fn band_reduction_is_idempotent_and_guards_nyquist() {
        let eps = 1.0;
        let pi = std::f64::consts::PI;
        assert!((reduce_mod_band(2.0 * pi + 0.3, eps) - 0.3).abs() < 1e-12);
        // Nyquist value and its noisy neighbours land on the same side.
        let a = reduce_mod_band(pi, eps);
        let b = reduce_mod_band(pi - 1e-13, eps);
        let c = reduce_mod_band(-pi, eps);
        assert!((a - c).abs() < 1e-10);
        assert!((b - c).abs() < 1e-10);
    }

    #[test]
    fn spectra_mod_comparison() {
        // {0, −π} ≡ {−2π, −π} mod 2π at ε=1
        let pi = std::f64::consts::PI;
        let d = spectra_distance_mod(&[0.0, -pi], &[-2.0 * pi, -pi], 1.0);
        assert!(d < 1e-12);
        let d2 = spectra_distance_mod(&[0.0, -pi], &[-1.0, -pi], 1.0);
        assert!(d2 > 0.5);
    }
}
