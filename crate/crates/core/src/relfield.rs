//! 1+1-dimensional periodic space-time lattice realization of the
//! relativistic quantum action, mass-shell mode extraction, and the
//! coherent-state classical-action identity.
//!
//! Derivatives are spectral (Fourier-diagonal), so the dispersion
//! ω² − p² − m₀² is exact on the lattice and the action identity holds to
//! rounding. Signature convention η₀₀ = +1.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lattice::{dft_matrix, TimeLattice};
use crate::linalg::{dagger, max_abs};

/// Periodic lattice in one time and one space dimension.
#[derive(Debug, Clone)]
pub struct SpacetimeLattice {
    time: TimeLattice,
    space: TimeLattice,
}

impl SpacetimeLattice {
    pub fn new(n_t: usize, dt: f64, n_x: usize, dx: f64) -> Result<Self> {
        Ok(SpacetimeLattice {
            time: TimeLattice::new(n_t, dt, None)?,
            space: TimeLattice::new(n_x, dx, None)?,
        })
    }

    pub fn n_t(&self) -> usize {
        self.time.n_sites()
    }

    pub fn n_x(&self) -> usize {
        self.space.n_sites()
    }

    pub fn dt(&self) -> f64 {
        self.time.dt()
    }

    pub fn dx(&self) -> f64 {
        self.space.dt()
    }

    /// Frequencies ω_k over the symmetric window.
    pub fn frequencies(&self) -> Vec<f64> {
        self.time.frequencies()
    }

    /// Momenta p_q over the symmetric window.
    pub fn momenta(&self) -> Vec<f64> {
        self.space.frequencies()
    }

    pub fn k_window(&self) -> Vec<i64> {
        self.time.k_window()
    }

    pub fn q_window(&self) -> Vec<i64> {
        self.space.k_window()
    }

    /// Total sites n_t·n_x; flat index = t-site · n_x + x-site.
    pub fn n_sites(&self) -> usize {
        self.n_t() * self.n_x()
    }

    /// ‖F·F† − 1‖ for both axis DFTs.
    pub fn dft_unitarity_residual(&self) -> f64 {
        crate::lattice::dft_unitarity_residual(&self.time)
            .max(crate::lattice::dft_unitarity_residual(&self.space))
    }
}

/// Complex field amplitudes φ(t_j, x_n), flattened with x fastest.
#[derive(Debug, Clone)]
pub struct FieldConfig {
    pub amplitudes: Array1<C64>,
}

impl FieldConfig {
    pub fn from_fn(slat: &SpacetimeLattice, f: impl Fn(f64, f64) -> C64) -> Self {
        let mut amps = Array1::<C64>::zeros(slat.n_sites());
        for (j, t) in slat.time.site_times().iter().enumerate() {
            for (n, x) in slat.space.site_times().iter().enumerate() {
                amps[j * slat.n_x() + n] = f(*t, *x);
            }
        }
        FieldConfig { amplitudes: amps }
    }

    /// Plane wave with unit (or given) amplitude at window indices (k, q).
    pub fn plane_wave(slat: &SpacetimeLattice, k: i64, q: i64, amplitude: C64) -> Result<Self> {
        let w = 2.0 * std::f64::consts::PI * k as f64 / (slat.n_t() as f64 * slat.dt());
        let p = 2.0 * std::f64::consts::PI * q as f64 / (slat.n_x() as f64 * slat.dx());
        Ok(FieldConfig::from_fn(slat, |t, x| {
            amplitude * C64::from_polar(1.0, -w * t + p * x)
        }))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Matrix of J_rel = −(∂² + m₀²), ∂² = ∂_t² − ∂_x², with spectral
/// derivatives: eigenvalue at (k, q) is exactly ω_k² − p_q² − m₀².
pub fn build_jrel(slat: &SpacetimeLattice, m0: f64) -> Result<Array2<C64>> {
    if m0 < 0.0 {
        return Err(Error::InvalidArgument("m0 must be non-negative".into()));
    }
    let ft = dft_matrix(&slat.time);
    let fx = dft_matrix(&slat.space);
    let wt: Vec<f64> = slat.frequencies().iter().map(|w| w * w).collect();
    let px: Vec<f64> = slat.momenta().iter().map(|p| p * p).collect();

    let spectral = |f: &Array2<C64>, d: &[f64]| -> Array2<C64> {
        let mut df = f.clone();
        for (mut row, &v) in df.rows_mut().into_iter().zip(d.iter()) {
            row.mapv_inplace(|z| z * C64::new(v, 0.0));
        }
        dagger(f).dot(&df)
    };
    let d2t = spectral(&ft, &wt); // F†·diag(ω²)·F = −∂_t²·(−1) … see below
    let d2x = spectral(&fx, &px);

    // −∂² − m₀² = (−∂_t²) + ∂_x² − m₀² = d2t − d2x − m₀² with spectral
    // (−∂_t²) ↔ ω² and (−∂_x²) ↔ p².
    let nt = slat.n_t();
    let nx = slat.n_x();
    let dim = nt * nx;
    let mut j = Array2::<C64>::zeros((dim, dim));
    for jt in 0..nt {
        for lt in 0..nt {
            for jx in 0..nx {
                for lx in 0..nx {
                    let mut z = C64::new(0.0, 0.0);
                    if jx == lx {
                        z += d2t[[jt, lt]];
                    }
                    if jt == lt {
                        z -= d2x[[jx, lx]];
                    }
                    if jt == lt && jx == lx {
                        z -= C64::new(m0 * m0, 0.0);
                    }
                    j[[jt * nx + jx, lt * nx + lx]] = z;
                }
            }
        }
    }
    Ok(j)
}

/// Both evaluations of the action expectation.
#[derive(Debug, Clone)]
pub struct ActionValue {
    /// Σ dt·dx·φ*·[−(∂² + m₀²)φ] — the coherent-state expectation of J_rel.
    pub direct: C64,
    /// Σ dt·dx·(|∂_t φ|² − |∂_x φ|² − m₀²|φ|²) — summed-by-parts form.
    pub by_parts: C64,
}

/// ⟨φ(x)|J_rel|φ(x)⟩/⟨φ(x)|φ(x)⟩ evaluated in closed form; equals the
/// discretized classical action of the free scalar field.
pub fn action_expectation(
    slat: &SpacetimeLattice,
    m0: f64,
    phi: &FieldConfig,
) -> Result<ActionValue> {
    if phi.amplitudes.len() != slat.n_sites() {
        return Err(Error::InvalidArgument(
            "field configuration size mismatch".into(),
        ));
    }
    if phi.norm_sqr() == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    let measure = C64::new(slat.dt() * slat.dx(), 0.0);
    let j = build_jrel(slat, m0)?;
    let jphi = j.dot(&phi.amplitudes);
    let direct = phi
        .amplitudes
        .iter()
        .zip(jphi.iter())
        .map(|(a, b)| a.conj() * b)
        .sum::<C64>()
        * measure;

    // spectral first derivatives: ∂_t ↔ −iω, ∂_x ↔ −ip on e^{−iωt+ipx}
    let ft = dft_matrix(&slat.time);
    let fx = dft_matrix(&slat.space);
    let nt = slat.n_t();
    let nx = slat.n_x();
    let wt = slat.frequencies();
    let px = slat.momenta();

    // reshape to (nt, nx), transform along each axis
    let mut grid = Array2::<C64>::zeros((nt, nx));
    for jt in 0..nt {
        for jx in 0..nx {
            grid[[jt, jx]] = phi.amplitudes[jt * nx + jx];
        }
    }
    let tilde_t = ft.dot(&grid); // frequency components along time
    let mut dt_grid = tilde_t.clone();
    for (mut row, &w) in dt_grid.rows_mut().into_iter().zip(wt.iter()) {
        row.mapv_inplace(|z| z * C64::new(0.0, -w));
    }
    let dt_field = dagger(&ft).dot(&dt_grid);

    let tilde_x = fx.dot(&grid.t().to_owned()); // momentum components along space
    let mut dx_grid = tilde_x.clone();
    for (mut row, &p) in dx_grid.rows_mut().into_iter().zip(px.iter()) {
        row.mapv_inplace(|z| z * C64::new(0.0, -p));
    }
    let dx_field = dagger(&fx).dot(&dx_grid).t().to_owned();

    let kinetic_t: f64 = dt_field.iter().map(|z| z.norm_sqr()).sum();
    let kinetic_x: f64 = dx_field.iter().map(|z| z.norm_sqr()).sum();
    let mass: f64 = m0 * m0 * phi.norm_sqr();
    let by_parts = measure * C64::new(kinetic_t - kinetic_x - mass, 0.0);

    Ok(ActionValue { direct, by_parts })
}

/// All window pairs (k, q) with |ω_k² − p_q² − m₀²| ≤ tol, optionally
/// filtered to the positive-frequency branch ω_k > 0.
pub fn mass_shell_modes(
    slat: &SpacetimeLattice,
    m0: f64,
    tol: f64,
    positive_frequency: bool,
) -> Result<Vec<(i64, i64)>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let mut out = Vec::new();
    for (ki, &k) in slat.k_window().iter().enumerate() {
        let w = slat.frequencies()[ki];
        if positive_frequency && w <= 0.0 {
            continue;
        }
        for (qi, &q) in slat.q_window().iter().enumerate() {
            let p = slat.momenta()[qi];
            if (w * w - p * p - m0 * m0).abs() <= tol {
                out.push((k, q));
            }
        }
    }
    Ok(out)
}

/// ‖[J_rel, S]‖ for both lattice translation operators S — discrete
/// space-time homogeneity.
pub fn translation_invariance_residual(slat: &SpacetimeLattice, m0: f64) -> Result<f64> {
    let j = build_jrel(slat, m0)?;
    let nt = slat.n_t();
    let nx = slat.n_x();
    let st = crate::lattice::shift_matrix(&slat.time, 1);
    let sx = crate::lattice::shift_matrix(&slat.space, 1);
    let full_t = ndarray::linalg::kron(&st, &crate::linalg::eye(nx));
    let full_x = ndarray::linalg::kron(&crate::linalg::eye(nt), &sx);
    let rt = max_abs(&(j.dot(&full_t) - full_t.dot(&j)));
    let rx = max_abs(&(j.dot(&full_x) - full_x.dot(&j)));
    Ok(rt.max(rx))
}
