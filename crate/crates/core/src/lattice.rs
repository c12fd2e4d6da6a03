//! Periodic time lattice, its frequency window, and the unitary DFT between
//! time sites and frequency modes.
//!
//! All conventions used downstream are fixed here:
//!
//! * sites `t_j = t_start + j·ε`, `j = 0..N`, period `T = N·ε`;
//! * frequency window `k ∈ {−⌊N/2⌋, …, ⌈N/2⌉−1}`, `ω_k = 2πk/T`, so ω = 0 is
//!   always present;
//! * DFT rows `F[k, j] = e^{iω_k t_j}/√N`, mapping site operators to
//!   frequency operators `A(ω_k) = Σ_j F[k,j]·A_{t_j}`;
//! * shift sign: `exp(i·p·Δt)` advances site labels by Δt, i.e. conjugation
//!   by it sends the operator at `t` to the operator at `t + Δt`.
//!
//! Site operators `A(t_j) = A_{t_j}/√ε` carry the 1/√ε normalization exactly
//! once; every matrix in this crate is expressed in the discrete `A_{t_j}`
//! convention, so no √ε factors appear downstream.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, dagger};

/// Equally spaced periodic time sites with the derived frequency window.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeLattice {
    n_sites: usize,
    dt: f64,
    t_start: f64,
}

impl TimeLattice {
    /// Build a lattice of `n_sites` sites with spacing `dt`. `t_start`
    /// defaults to −T/2.
    pub fn new(n_sites: usize, dt: f64, t_start: Option<f64>) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidArgument("n_sites must be positive".into()));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "dt must be a positive real, got {dt}"
            )));
        }
        let period = n_sites as f64 * dt;
        Ok(TimeLattice {
            n_sites,
            dt,
            t_start: t_start.unwrap_or(-period / 2.0),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    /// Total period T = N·ε.
    pub fn period(&self) -> f64 {
        self.n_sites as f64 * self.dt
    }

    /// Site time t_j.
    pub fn site_time(&self, j: usize) -> f64 {
        self.t_start + j as f64 * self.dt
    }

    /// All site times.
    pub fn site_times(&self) -> Vec<f64> {
        (0..self.n_sites).map(|j| self.site_time(j)).collect()
    }

    /// Integer window {−⌊N/2⌋, …, ⌈N/2⌉−1}, ascending; ω = 0 always present.
    pub fn k_window(&self) -> Vec<i64> {
        let n = self.n_sites as i64;
        (-(n / 2)..(n + 1) / 2).collect()
    }

    /// Frequencies ω_k = 2πk/T in window order (strictly increasing).
    pub fn frequencies(&self) -> Vec<f64> {
        let period = self.period();
        self.k_window()
            .into_iter()
            .map(|k| 2.0 * std::f64::consts::PI * k as f64 / period)
            .collect()
    }

    /// Position of integer `k` within the window, if present.
    pub fn k_index(&self, k: i64) -> Option<usize> {
        let n = self.n_sites as i64;
        if k >= -(n / 2) && k < (n + 1) / 2 {
            Some((k + n / 2) as usize)
        } else {
            None
        }
    }

    /// Whether `t` lies on the site grid; returns the site index if so.
    pub fn site_of(&self, t: f64) -> Option<usize> {
        let x = (t - self.t_start) / self.dt;
        let j = x.round();
        if (x - j).abs() < 1e-9 && j >= 0.0 && (j as usize) < self.n_sites {
            Some(j as usize)
        } else {
            None
        }
    }

    /// Whether `delta` is an integer number of steps; returns that number
    /// (may be negative or exceed N; callers reduce mod N as needed).
    pub fn steps_of(&self, delta: f64) -> Option<i64> {
        let x = delta / self.dt;
        let s = x.round();
        if (x - s).abs() < 1e-9 {
            Some(s as i64)
        } else {
            None
        }
    }

    /// Site index of `t` reduced modulo the period.
    pub fn site_of_periodic(&self, t: f64) -> Option<usize> {
        let steps = self.steps_of(t - self.t_start)?;
        Some(steps.rem_euclid(self.n_sites as i64) as usize)
    }
}

/// Flattening of (site j, spatial mode m) pairs onto 0..N·M and the basis tag
/// tracked through every one-body operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    Site,
    Frequency,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeIndexing {
    n_sites: usize,
    n_space_modes: usize,
}

impl ModeIndexing {
    pub fn new(n_sites: usize, n_space_modes: usize) -> Result<Self> {
        if n_space_modes == 0 {
            return Err(Error::InvalidArgument(
                "n_space_modes must be positive".into(),
            ));
        }
        Ok(ModeIndexing {
            n_sites,
            n_space_modes,
        })
    }

    pub fn n_space_modes(&self) -> usize {
        self.n_space_modes
    }

    /// Total flat dimension N·M.
    pub fn len(&self) -> usize {
        self.n_sites * self.n_space_modes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (site, mode) → flat index.
    pub fn flatten(&self, site: usize, mode: usize) -> usize {
        debug_assert!(site < self.n_sites && mode < self.n_space_modes);
        site * self.n_space_modes + mode
    }

    /// flat index → (site, mode).
    pub fn unflatten(&self, flat: usize) -> (usize, usize) {
        (flat / self.n_space_modes, flat % self.n_space_modes)
    }
}

/// Unitary DFT matrix, `F[k, j] = e^{iω_k t_j}/√N`, rows in window order.
pub fn dft_matrix(lat: &TimeLattice) -> Array2<C64> {
    let n = lat.n_sites();
    let norm = 1.0 / (n as f64).sqrt();
    let freqs = lat.frequencies();
    let times = lat.site_times();
    Array2::from_shape_fn((n, n), |(k, j)| {
        (C64::i() * freqs[k] * times[j]).exp() * norm
    })
}

/// One-body matrix of the time-translation generator in the site basis:
/// `p = F†·diag(ω_k)·F`. Hermitian; spectrum = {ω_k}.
pub fn onebody_pt(lat: &TimeLattice) -> Array2<C64> {
    let f = dft_matrix(lat);
    let freqs = lat.frequencies();
    let mut dmid = f.clone();
    for (mut row, w) in dmid.rows_mut().into_iter().zip(freqs.iter()) {
        row.mapv_inplace(|z| z * C64::new(*w, 0.0));
    }
    dagger(&f).dot(&dmid)
}

/// Cyclic site-shift permutation: maps basis vector e_j to e_{j+steps mod N}.
/// `exp(i·p·dt·steps)` equals `shift_matrix(lat, steps)` exactly.
pub fn shift_matrix(lat: &TimeLattice, steps: i64) -> Array2<C64> {
    let n = lat.n_sites() as i64;
    let mut m = Array2::<C64>::zeros((n as usize, n as usize));
    for j in 0..n {
        let tgt = (j + steps).rem_euclid(n);
        m[[tgt as usize, j as usize]] = C64::new(1.0, 0.0);
    }
    m
}

/// ‖F·F† − 1‖_max, reported by the suite's unitarity check.
pub fn dft_unitarity_residual(lat: &TimeLattice) -> f64 {
    linalg::unitarity_residual(&dft_matrix(lat))
}
