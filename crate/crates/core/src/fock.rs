//! Many-body history Fock spaces: truncated bosonic and exact fermionic
//! ladder operators, coherent states, number-conserving Gaussian unitaries,
//! and bilinear lifts of one-body matrices.
//!
//! Basis convention: occupation numbers are digits of the basis index in a
//! little-endian mixed radix (base `n_max + 1` for bosons, base 2 for
//! fermions), so flat mode 0 is the fastest digit. Fermionic states are
//! `(b†_0)^{n_0}(b†_1)^{n_1}···|Ω⟩` with Jordan–Wigner signs counted below
//! the acted-on mode.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lattice::{ModeIndexing, TimeLattice};
use crate::linalg::{self, expm_hermitian};
use crate::onebody::{build_j, build_pt_full, build_v, OneBodyHamiltonian};

/// Default cap on Fock dimensions; override through `FockSpec::with_max_dim`
/// or the `HISTLAT_MAX_DIM` environment variable at the CLI layer.
pub const DEFAULT_MAX_DIM: usize = 1 << 20;

/// Dimension above which operators are no longer materialized as matrices;
/// exponentials switch to Krylov action on states.
pub const DENSE_EXP_MAX_DIM: usize = 1 << 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    /// Truncated bosons with `n_max` quanta per flat mode.
    Bose { n_max: u32 },
    /// Exact fermions.
    Fermi,
}

/// A many-body history space over the N·M flat modes of a lattice.
#[derive(Debug, Clone)]
pub struct FockSpec {
    stats: Statistics,
    lattice: TimeLattice,
    indexing: ModeIndexing,
    dim: usize,
    /// index strides per flat mode
    strides: Vec<usize>,
}

impl FockSpec {
    pub fn new(stats: Statistics, lattice: TimeLattice, n_space_modes: usize) -> Result<Self> {
        Self::with_max_dim(stats, lattice, n_space_modes, DEFAULT_MAX_DIM)
    }

    pub fn with_max_dim(
        stats: Statistics,
        lattice: TimeLattice,
        n_space_modes: usize,
        max_dim: usize,
    ) -> Result<Self> {
        let indexing = ModeIndexing::new(lattice.n_sites(), n_space_modes)?;
        let n_modes = indexing.len();
        let base = match stats {
            Statistics::Bose { n_max } => {
                if n_max == 0 {
                    return Err(Error::InvalidArgument("n_max must be positive".into()));
                }
                n_max as u128 + 1
            }
            Statistics::Fermi => 2,
        };
        let mut dim: u128 = 1;
        let mut strides = Vec::with_capacity(n_modes);
        for _ in 0..n_modes {
            strides.push(dim as usize);
            dim = dim.saturating_mul(base);
            if dim > max_dim as u128 {
                return Err(Error::DimensionBound {
                    dim,
                    bound: max_dim,
                });
            }
        }
        Ok(FockSpec {
            stats,
            lattice,
            indexing,
            dim: dim as usize,
            strides,
        })
    }

    pub fn stats(&self) -> Statistics {
        self.stats
    }

    pub fn lattice(&self) -> &TimeLattice {
        &self.lattice
    }

    pub fn indexing(&self) -> &ModeIndexing {
        &self.indexing
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of flat modes L = N·M.
    pub fn n_modes(&self) -> usize {
        self.indexing.len()
    }

    fn base(&self) -> usize {
        match self.stats {
            Statistics::Bose { n_max } => n_max as usize + 1,
            Statistics::Fermi => 2,
        }
    }

    pub fn n_max(&self) -> u32 {
        match self.stats {
            Statistics::Bose { n_max } => n_max,
            Statistics::Fermi => 1,
        }
    }

    /// Occupation of flat mode `l` in basis state `idx`.
    pub fn occupation(&self, idx: usize, l: usize) -> u32 {
        ((idx / self.strides[l]) % self.base()) as u32
    }

    /// Total particle number of basis state `idx`.
    pub fn total_occupation(&self, idx: usize) -> u32 {
        (0..self.n_modes()).map(|l| self.occupation(idx, l)).sum()
    }

    /// Basis index of an occupation vector.
    pub fn index_of(&self, occ: &[u32]) -> Result<usize> {
        if occ.len() != self.n_modes() {
            return Err(Error::InvalidArgument("occupation length mismatch".into()));
        }
        let mut idx = 0usize;
        for (l, &n) in occ.iter().enumerate() {
            if n > self.n_max() {
                return Err(Error::InvalidArgument(format!(
                    "occupation {n} exceeds cutoff at mode {l}"
                )));
            }
            idx += n as usize * self.strides[l];
        }
        Ok(idx)
    }

    /// Jordan–Wigner sign for acting at mode `l` on fermionic state `idx`:
    /// parity of the occupations strictly below `l`.
    fn jw_sign(&self, idx: usize, l: usize) -> f64 {
        let below = idx & (self.strides[l] - 1);
        if (below as u64).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Basis index of the single-particle state at flat mode `l`.
    pub fn single_particle_index(&self, l: usize) -> usize {
        self.strides[l]
    }

    /// Vacuum state.
    pub fn vacuum(&self) -> StateVector {
        let mut amps = Array1::<C64>::zeros(self.dim);
        amps[0] = C64::new(1.0, 0.0);
        StateVector { amps }
    }
}

/// Amplitude vector over a spec's basis. Norm is reported, never silently
/// renormalized.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub amps: Array1<C64>,
}

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        StateVector {
            amps: Array1::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scaled(&self, z: C64) -> StateVector {
        StateVector {
            amps: self.amps.mapv(|a| a * z),
        }
    }

    pub fn normalized(&self) -> StateVector {
        let n = self.norm();
        self.scaled(C64::new(1.0 / n, 0.0))
    }
}

/// Compressed sparse row complex matrix; the only operator storage used by
/// the many-body engine.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseMatrix {
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, C64)>,
    ) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut rows = Vec::with_capacity(triplets.len());
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if rows.last() == Some(&r) && col_idx.last() == Some(&c) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                col_idx.push(c);
                vals.push(v);
            }
        }
        let mut row_ptr = vec![0usize; nrows + 1];
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec(&self, v: &Array1<C64>) -> Array1<C64> {
        debug_assert_eq!(v.len(), self.ncols);
        let mut out = Array1::<C64>::zeros(self.nrows);
        for r in 0..self.nrows {
            let mut acc = C64::new(0.0, 0.0);
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[i] * v[self.col_idx[i]];
            }
            out[r] = acc;
        }
        out
    }

    pub fn apply(&self, state: &StateVector) -> StateVector {
        StateVector {
            amps: self.matvec(&state.amps),
        }
    }

    pub fn adjoint(&self) -> SparseMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                triplets.push((self.col_idx[i], r, self.vals[i].conj()));
            }
        }
        SparseMatrix::from_triplets(self.ncols, self.nrows, triplets)
    }

    pub fn scaled(&self, z: C64) -> SparseMatrix {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= z;
        }
        out
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let mut m = Array2::<C64>::zeros((self.nrows, self.ncols));
        for r in 0..self.nrows {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[[r, self.col_idx[i]]] += self.vals[i];
            }
        }
        m
    }

    pub fn from_dense(m: &Array2<C64>, drop_tol: f64) -> SparseMatrix {
        let mut triplets = Vec::new();
        for ((r, c), z) in m.indexed_iter() {
            if z.norm() > drop_tol {
                triplets.push((r, c, *z));
            }
        }
        SparseMatrix::from_triplets(m.nrows(), m.ncols(), triplets)
    }

    /// 1-norm upper bound (max absolute column sum) used to pick Krylov
    /// substeps.
    pub fn norm_est(&self) -> f64 {
        let mut col_sums = vec![0.0f64; self.ncols];
        for (i, &c) in self.col_idx.iter().enumerate() {
            col_sums[c] += self.vals[i].norm();
        }
        col_sums.into_iter().fold(0.0, f64::max)
    }
}

/// Annihilation operator for flat mode `l`.
pub fn ladder(spec: &FockSpec, l: usize) -> Result<SparseMatrix> {
    if l >= spec.n_modes() {
        return Err(Error::InvalidArgument(format!(
            "mode index {l} out of range (L = {})",
            spec.n_modes()
        )));
    }
    let stride = spec.strides[l];
    let mut triplets = Vec::new();
    for idx in 0..spec.dim {
        let n = spec.occupation(idx, l);
        if n == 0 {
            continue;
        }
        let val = match spec.stats {
            Statistics::Bose { .. } => C64::new((n as f64).sqrt(), 0.0),
            Statistics::Fermi => C64::new(spec.jw_sign(idx, l), 0.0),
        };
        triplets.push((idx - stride, idx, val));
    }
    Ok(SparseMatrix::from_triplets(spec.dim, spec.dim, triplets))
}

/// Creation operator for flat mode `l` (adjoint of [`ladder`]).
pub fn raising(spec: &FockSpec, l: usize) -> Result<SparseMatrix> {
    Ok(ladder(spec, l)?.adjoint())
}

/// Apply A†(x) = Σ_l x_l·a†_l to a state.
pub fn apply_creation(spec: &FockSpec, x: &Array1<C64>, state: &StateVector) -> StateVector {
    let mut out = Array1::<C64>::zeros(spec.dim);
    let nmax = spec.n_max();
    for (l, &coef) in x.iter().enumerate() {
        if coef.norm() == 0.0 {
            continue;
        }
        let stride = spec.strides[l];
        for idx in 0..spec.dim {
            let amp = state.amps[idx];
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let n = spec.occupation(idx, l);
            if n >= nmax {
                continue; // truncation edge (impossible for fermions: n ∈ {0,1})
            }
            let factor = match spec.stats {
                Statistics::Bose { .. } => C64::new(((n + 1) as f64).sqrt(), 0.0),
                Statistics::Fermi => C64::new(spec.jw_sign(idx, l), 0.0),
            };
            out[idx + stride] += coef * factor * amp;
        }
    }
    StateVector { amps: out }
}

/// Apply A(x) = Σ_l x̄_l·a_l (the adjoint of A†(x)) to a state.
pub fn apply_annihilation(spec: &FockSpec, x: &Array1<C64>, state: &StateVector) -> StateVector {
    let mut out = Array1::<C64>::zeros(spec.dim);
    for (l, &coef) in x.iter().enumerate() {
        if coef.norm() == 0.0 {
            continue;
        }
        let stride = spec.strides[l];
        for idx in 0..spec.dim {
            let amp = state.amps[idx];
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let n = spec.occupation(idx, l);
            if n == 0 {
                continue;
            }
            let factor = match spec.stats {
                Statistics::Bose { .. } => C64::new((n as f64).sqrt(), 0.0),
                Statistics::Fermi => C64::new(spec.jw_sign(idx, l), 0.0),
            };
            out[idx - stride] += coef.conj() * factor * amp;
        }
    }
    StateVector { amps: out }
}

/// Normal-ordered bilinear Σ_{αβ} m_{αβ}·a†_α·a_β as a sparse matrix.
pub fn bilinear(spec: &FockSpec, m: &Array2<C64>) -> Result<SparseMatrix> {
    let l_modes = spec.n_modes();
    if m.nrows() != l_modes || m.ncols() != l_modes {
        return Err(Error::InvalidArgument(
            "bilinear matrix must be L×L over flat modes".into(),
        ));
    }
    let nmax = spec.n_max();
    let mut triplets = Vec::new();
    for idx in 0..spec.dim {
        for beta in 0..l_modes {
            let n_b = spec.occupation(idx, beta);
            if n_b == 0 {
                continue;
            }
            let (mid, amp_b) = match spec.stats {
                Statistics::Bose { .. } => {
                    (idx - spec.strides[beta], (n_b as f64).sqrt())
                }
                Statistics::Fermi => (idx - spec.strides[beta], spec.jw_sign(idx, beta)),
            };
            for alpha in 0..l_modes {
                let coef = m[[alpha, beta]];
                if coef.norm() == 0.0 {
                    continue;
                }
                let n_a = spec.occupation(mid, alpha);
                if n_a >= nmax {
                    continue;
                }
                let (tgt, amp_a) = match spec.stats {
                    Statistics::Bose { .. } => {
                        (mid + spec.strides[alpha], ((n_a + 1) as f64).sqrt())
                    }
                    Statistics::Fermi => (mid + spec.strides[alpha], spec.jw_sign(mid, alpha)),
                };
                triplets.push((tgt, idx, coef * C64::new(amp_b * amp_a, 0.0)));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(spec.dim, spec.dim, triplets))
}

/// Diagnostics returned together with a truncated coherent state.
#[derive(Debug, Clone)]
pub struct CoherentInfo {
    /// max_i ‖(a_i − α_i)|α⟩‖ over modes.
    pub eigenvalue_residual: f64,
    /// Probability weight lost beyond the per-mode cutoff.
    pub tail_weight: f64,
}

/// Normalized truncated coherent state over the flat modes.
pub fn coherent_state(spec: &FockSpec, alpha: &Array1<C64>) -> Result<(StateVector, CoherentInfo)> {
    if !matches!(spec.stats, Statistics::Bose { .. }) {
        return Err(Error::Unsupported(
            "coherent states require bosonic statistics".into(),
        ));
    }
    if alpha.len() != spec.n_modes() {
        return Err(Error::InvalidArgument("alpha length must be L".into()));
    }
    let nmax = spec.n_max();
    // per-mode amplitudes e^{−|α|²/2}·αⁿ/√(n!)
    let mut per_mode: Vec<Vec<C64>> = Vec::with_capacity(alpha.len());
    for &a in alpha.iter() {
        let mut col = Vec::with_capacity(nmax as usize + 1);
        let pref = (-a.norm_sqr() / 2.0).exp();
        let mut term = C64::new(pref, 0.0);
        col.push(term);
        for n in 1..=nmax as usize {
            term = term * a / C64::new((n as f64).sqrt(), 0.0);
            col.push(term);
        }
        per_mode.push(col);
    }
    let mut amps = Array1::<C64>::zeros(spec.dim);
    for idx in 0..spec.dim {
        let mut z = C64::new(1.0, 0.0);
        for l in 0..spec.n_modes() {
            z *= per_mode[l][spec.occupation(idx, l) as usize];
        }
        amps[idx] = z;
    }
    let raw = StateVector { amps };
    let captured = raw.norm().powi(2);
    let tail_weight = (1.0 - captured).max(0.0);
    let state = raw.normalized();

    let mut worst = 0.0f64;
    for l in 0..spec.n_modes() {
        let a_op = ladder(spec, l)?;
        let lhs = a_op.apply(&state);
        let shifted = StateVector {
            amps: &lhs.amps - &state.amps.mapv(|z| z * alpha[l]),
        };
        worst = worst.max(shifted.norm());
    }
    Ok((
        state,
        CoherentInfo {
            eigenvalue_residual: worst,
            tail_weight,
        },
    ))
}

/// Number-conserving Gaussian unitary with one-body matrix `f`, built column
/// by column as products of transformed creation operators on the vacuum.
/// Exact for fermions; truncation-faithful for bosons on states whose total
/// occupation stays within the per-mode cutoff.
pub fn gaussian_from_onebody(spec: &FockSpec, f: &Array2<C64>) -> Result<SparseMatrix> {
    let l_modes = spec.n_modes();
    if f.nrows() != l_modes || f.ncols() != l_modes {
        return Err(Error::InvalidArgument(
            "one-body matrix must be L×L".into(),
        ));
    }
    if spec.dim > DENSE_EXP_MAX_DIM {
        return Err(Error::DimensionBound {
            dim: spec.dim as u128,
            bound: DENSE_EXP_MAX_DIM,
        });
    }
    let mut triplets = Vec::new();
    for idx in 0..spec.dim {
        let col = gaussian_column(spec, f, idx);
        for (r, z) in col.amps.indexed_iter() {
            if z.norm() > 0.0 {
                triplets.push((r, idx, *z));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(spec.dim, spec.dim, triplets))
}

/// Γ(f) applied to a single basis state.
fn gaussian_column(spec: &FockSpec, f: &Array2<C64>, idx: usize) -> StateVector {
    let mut scratch = spec.vacuum();
    let mut norm_div = 1.0f64;
    // rightmost creation factor acts first: descend over modes
    for beta in (0..spec.n_modes()).rev() {
        let n = spec.occupation(idx, beta);
        for _ in 0..n {
            let col = f.column(beta).to_owned();
            scratch = apply_creation(spec, &col, &scratch);
        }
        for k in 1..=n as usize {
            norm_div *= (k as f64).sqrt();
        }
    }
    scratch.scaled(C64::new(1.0 / norm_div, 0.0))
}

/// Γ(f) applied to an arbitrary state by linearity over its basis support.
pub fn apply_gaussian(spec: &FockSpec, f: &Array2<C64>, state: &StateVector) -> StateVector {
    let mut out = Array1::<C64>::zeros(spec.dim);
    for (idx, amp) in state.amps.indexed_iter() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let col = gaussian_column(spec, f, idx);
        out = out + col.amps.mapv(|z| z * *amp);
    }
    StateVector { amps: out }
}

/// exp(i·Σ g_{jk}·a†_j·a_k) for Hermitian g, realized through the one-body
/// exponential e^{ig}.
pub fn gaussian_unitary(spec: &FockSpec, g: &Array2<C64>) -> Result<SparseMatrix> {
    if linalg::hermiticity_residual(g) > 1e-12 {
        return Err(Error::InvalidArgument("g must be Hermitian".into()));
    }
    let f = expm_hermitian(g, C64::i())?;
    gaussian_from_onebody(spec, &f)
}

/// Which many-body operator to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManyBodyKind {
    Pt,
    J,
    V,
    T,
    N,
}

/// Number-conserving theory data for the many-body engine. Pairing terms
/// are certified in the one-body BdG channel instead.
#[derive(Debug, Clone)]
pub struct ManyBodyTheory {
    /// Hermitian one-body Hamiltonian over the M spatial modes.
    pub h: Array2<C64>,
    /// Evolution reference time; defaults to the lattice start.
    pub t0: f64,
    /// c-number channel of the Hamiltonian (per time site).
    pub constant: f64,
}

impl ManyBodyTheory {
    pub fn oscillator(lat: &TimeLattice, omega0: f64) -> Self {
        ManyBodyTheory {
            h: Array2::from_elem((1, 1), C64::new(omega0, 0.0)),
            t0: lat.t_start(),
            constant: 0.0,
        }
    }

    pub fn null(lat: &TimeLattice, n_space_modes: usize) -> Self {
        ManyBodyTheory {
            h: Array2::zeros((n_space_modes, n_space_modes)),
            t0: lat.t_start(),
            constant: 0.0,
        }
    }
}

/// Bilinear lift of the corresponding one-body matrix (Pt, J, T, N) or the
/// Gaussian unitary of the per-site evolution phases (V). The scalar channel
/// accumulated by normal ordering is returned alongside.
pub fn many_body(
    spec: &FockSpec,
    kind: ManyBodyKind,
    theory: &ManyBodyTheory,
) -> Result<(SparseMatrix, f64)> {
    let lat = spec.lattice().clone();
    let m = spec.indexing().n_space_modes();
    if theory.h.nrows() != m {
        return Err(Error::InvalidArgument(
            "theory dimension does not match spec".into(),
        ));
    }
    match kind {
        ManyBodyKind::Pt => {
            let p = build_pt_full(&lat, m)?.matrix;
            Ok((bilinear(spec, &p)?, 0.0))
        }
        ManyBodyKind::J => {
            let j = build_j(&lat, &theory.h)?.matrix;
            Ok((
                bilinear(spec, &j)?,
                -(lat.n_sites() as f64) * theory.constant,
            ))
        }
        ManyBodyKind::V => {
            let v = build_v(
                &lat,
                &OneBodyHamiltonian::Constant(theory.h.clone()),
                theory.t0,
            )?
            .matrix;
            Ok((gaussian_from_onebody(spec, &v)?, 0.0))
        }
        ManyBodyKind::T => {
            let nm = spec.n_modes();
            let mut tau = Array2::<C64>::zeros((nm, nm));
            for j in 0..lat.n_sites() {
                for mm in 0..m {
                    tau[[j * m + mm, j * m + mm]] = C64::new(lat.site_time(j), 0.0);
                }
            }
            Ok((bilinear(spec, &tau)?, 0.0))
        }
        ManyBodyKind::N => {
            let nm = spec.n_modes();
            Ok((bilinear(spec, &linalg::eye(nm))?, 0.0))
        }
    }
}

/// Matrix elements of an operator between single-particle basis states —
/// the single-particle restriction compared against one-body matrices.
pub fn sp_restriction(spec: &FockSpec, op: &SparseMatrix) -> Array2<C64> {
    let l = spec.n_modes();
    let dense_cols: Vec<Array1<C64>> = (0..l)
        .map(|b| {
            let mut v = Array1::<C64>::zeros(spec.dim);
            v[spec.single_particle_index(b)] = C64::new(1.0, 0.0);
            op.matvec(&v)
        })
        .collect();
    Array2::from_shape_fn((l, l), |(a, b)| {
        dense_cols[b][spec.single_particle_index(a)]
    })
}

/// exp(τ·H)·v for Hermitian sparse H via the dense eigendecomposition
/// (dims ≤ `DENSE_EXP_MAX_DIM`).
pub fn exp_apply_dense(op: &SparseMatrix, tau: C64, v: &Array1<C64>) -> Result<Array1<C64>> {
    if op.nrows() > DENSE_EXP_MAX_DIM {
        return Err(Error::DimensionBound {
            dim: op.nrows() as u128,
            bound: DENSE_EXP_MAX_DIM,
        });
    }
    let e = expm_hermitian(&op.to_dense(), tau)?;
    Ok(e.dot(v))
}

/// exp(τ·H)·v for Hermitian sparse H by Lanczos iteration with full
/// reorthogonalization, substepped so each Krylov solve is well inside its
/// convergence regime.
pub fn exp_apply_krylov(op: &SparseMatrix, tau: C64, v: &Array1<C64>) -> Result<Array1<C64>> {
    const KRYLOV_DIM: usize = 30;
    let n = op.nrows();
    let m = KRYLOV_DIM.min(n);
    let norm_est = op.norm_est();
    let steps = ((norm_est * tau.norm() / 4.0).ceil() as usize).max(1);
    let tau_step = tau / C64::new(steps as f64, 0.0);

    let mut w = v.clone();
    for _ in 0..steps {
        let beta0 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if beta0 == 0.0 {
            return Ok(w);
        }
        let mut basis: Vec<Array1<C64>> = vec![w.mapv(|z| z / C64::new(beta0, 0.0))];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        for j in 0..m {
            let hv = op.matvec(&basis[j]);
            let alpha: C64 = basis[j]
                .iter()
                .zip(hv.iter())
                .map(|(x, y)| x.conj() * y)
                .sum();
            alphas.push(alpha.re);
            // full reorthogonalization keeps the tridiagonal honest
            let mut cand = hv;
            for b in &basis {
                let ov: C64 = b.iter().zip(cand.iter()).map(|(x, y)| x.conj() * y).sum();
                cand = cand - b.mapv(|z| z * ov);
            }
            let beta = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if beta < 1e-14 || j + 1 == m {
                break;
            }
            betas.push(beta);
            basis.push(cand.mapv(|z| z / C64::new(beta, 0.0)));
        }
        let k = basis.len();
        let mut tri = Array2::<C64>::zeros((k, k));
        for (i, &a) in alphas.iter().take(k).enumerate() {
            tri[[i, i]] = C64::new(a, 0.0);
        }
        for (i, &b) in betas.iter().take(k.saturating_sub(1)).enumerate() {
            tri[[i, i + 1]] = C64::new(b, 0.0);
            tri[[i + 1, i]] = C64::new(b, 0.0);
        }
        let small = expm_hermitian(&tri, tau_step)?;
        let mut next = Array1::<C64>::zeros(n);
        for (i, b) in basis.iter().enumerate() {
            let coef = small[[i, 0]] * C64::new(beta0, 0.0);
            next = next + b.mapv(|z| z * coef);
        }
        w = next;
    }
    Ok(w)
}

/// exp(τ·H)·v choosing the dense route below the dense bound and Krylov
/// above it.
pub fn exp_apply(op: &SparseMatrix, tau: C64, v: &Array1<C64>) -> Result<Array1<C64>> {
    if op.nrows() <= DENSE_EXP_MAX_DIM {
        exp_apply_dense(op, tau, v)
    } else {
        exp_apply_krylov(op, tau, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dagger, eye, max_abs};
    use ndarray::array;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn bose_spec(n_sites: usize, n_max: u32) -> FockSpec {
        let lat = TimeLattice::new(n_sites, 1.0, None).unwrap();
        FockSpec::new(Statistics::Bose { n_max }, lat, 1).unwrap()
    }

    fn fermi_spec(n_sites: usize) -> FockSpec {
        let lat = TimeLattice::new(n_sites, 1.0, None).unwrap();
        FockSpec::new(Statistics::Fermi, lat, 1).unwrap()
    }

    #[test]
    fn dims_and_bounds() {
        assert_eq!(bose_spec(4, 3).dim(), 256);
        assert_eq!(fermi_spec(4).dim(), 16);
        let lat = TimeLattice::new(64, 1.0, None).unwrap();
        match FockSpec::new(Statistics::Fermi, lat, 1) {
            Err(Error::DimensionBound { .. }) => {}
            other => panic!("expected dimension bound, got {other:?}"),
        }
    }

    #[test]
    fn fermi_creation_squares_to_zero() {
        let spec = fermi_spec(3);
        for l in 0..3 {
            let bd = raising(&spec, l).unwrap();
            let sq = bd.to_dense().dot(&bd.to_dense());
            assert_eq!(max_abs(&sq), 0.0, "(b†)² must vanish bit-exactly");
        }
    }

    #[test]
    fn fermi_car_relations() {
        let spec = fermi_spec(2);
        let b0 = ladder(&spec, 0).unwrap().to_dense();
        let b1d = raising(&spec, 1).unwrap().to_dense();
        let anti = b0.dot(&b1d) + b1d.dot(&b0);
        assert_eq!(max_abs(&anti), 0.0, "{{b₀, b₁†}} must vanish exactly");
        let b0d = raising(&spec, 0).unwrap().to_dense();
        let anti_same = b0.dot(&b0d) + b0d.dot(&b0);
        assert!(max_abs(&(&anti_same - &eye(4))) < 1e-15);
    }

    #[test]
    fn bose_number_operator() {
        let spec = bose_spec(1, 3);
        let a = ladder(&spec, 0).unwrap().to_dense();
        let num = dagger(&a).dot(&a);
        for n in 0..=3usize {
            assert!((num[[n, n]] - c(n as f64)).norm() < 1e-14);
        }
    }

    #[test]
    fn bose_commutator_below_cutoff() {
        let spec = bose_spec(2, 3);
        let a = ladder(&spec, 0).unwrap().to_dense();
        let comm = a.dot(&dagger(&a)) - dagger(&a).dot(&a);
        // identity on all states whose mode-0 occupation is below the cutoff
        for idx in 0..spec.dim() {
            if spec.occupation(idx, 0) < 3 {
                assert!((comm[[idx, idx]] - c(1.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn coherent_vacuum_and_eigenvalue() {
        let spec = bose_spec(1, 6);
        let (vac, info) = coherent_state(&spec, &array![c(0.0)]).unwrap();
        assert!((vac.amps[0] - c(1.0)).norm() < 1e-15);
        assert!(info.tail_weight < 1e-15);

        // residual is the cutoff-edge leak α·|c_{n_max}|, a Poisson tail
        let alpha = 0.3f64;
        let (st, info) = coherent_state(&spec, &array![c(alpha)]).unwrap();
        assert!((st.norm() - 1.0).abs() < 1e-14);
        let mut fact6 = 1.0f64;
        for k in 1..=6 {
            fact6 *= k as f64;
        }
        let captured: f64 = (0..=6)
            .map(|n| {
                let mut f = 1.0f64;
                for k in 1..=n {
                    f *= k as f64;
                }
                (-alpha * alpha).exp() * alpha.powi(2 * n as i32) / f
            })
            .sum();
        let edge = (-alpha * alpha / 2.0).exp() * alpha.powi(6) / fact6.sqrt();
        let oracle = alpha * edge / captured.sqrt();
        assert!((info.eigenvalue_residual - oracle).abs() <= 1e-9,
            "residual {} vs oracle {}", info.eigenvalue_residual, oracle);
        assert!(info.eigenvalue_residual <= 1e-5);
    }

    #[test]
    fn coherent_overlap_law() {
        let spec = bose_spec(1, 8);
        let al = C64::new(0.3, 0.2);
        let be = C64::new(-0.1, 0.4);
        let (sa, _) = coherent_state(&spec, &array![al]).unwrap();
        let (sb, _) = coherent_state(&spec, &array![be]).unwrap();
        let got = sb.inner(&sa);
        let expect = (-0.5 * al.norm_sqr() - 0.5 * be.norm_sqr() + be.conj() * al).exp();
        assert!((got - expect).norm() <= 1e-8);
    }

    #[test]
    fn coherent_needs_bosons() {
        let spec = fermi_spec(2);
        assert!(matches!(
            coherent_state(&spec, &array![c(0.1), c(0.0)]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn gaussian_identity() {
        let spec = fermi_spec(3);
        let g = Array2::<C64>::zeros((3, 3));
        let u = gaussian_unitary(&spec, &g).unwrap().to_dense();
        assert!(max_abs(&(&u - &eye(spec.dim()))) < 1e-14);
    }

    #[test]
    fn gaussian_conjugation_fermi_exact() {
        let spec = fermi_spec(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let raw = Array2::from_shape_fn((3, 3), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let g = (&raw + &dagger(&raw)).mapv(|z| z * c(0.5));
        let u = gaussian_unitary(&spec, &g).unwrap().to_dense();
        assert!(linalg::unitarity_residual(&u) <= 1e-12);
        let f = expm_hermitian(&g, C64::i()).unwrap();
        let mut worst = 0.0f64;
        for beta in 0..3 {
            let adag = raising(&spec, beta).unwrap().to_dense();
            let lhs = u.dot(&adag).dot(&dagger(&u));
            let mut rhs = Array2::<C64>::zeros((spec.dim(), spec.dim()));
            for gamma in 0..3 {
                let gd = raising(&spec, gamma).unwrap().to_dense();
                rhs = rhs + gd.mapv(|z| z * f[[gamma, beta]]);
            }
            worst = worst.max(max_abs(&(&lhs - &rhs)));
        }
        assert!(worst <= 1e-10, "conjugation residual {worst}");
    }

    #[test]
    fn gaussian_conjugation_bose_low_sector() {
        let spec = bose_spec(2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let raw = Array2::from_shape_fn((2, 2), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let g = (&raw + &dagger(&raw)).mapv(|z| z * c(0.25)); // ‖g‖ ≤ 0.5
        let u = gaussian_unitary(&spec, &g).unwrap().to_dense();
        let f = expm_hermitian(&g, C64::i()).unwrap();
        // compare on columns with ≤ 2 excitations
        let mut worst = 0.0f64;
        for beta in 0..2 {
            let adag = raising(&spec, beta).unwrap().to_dense();
            let lhs = u.dot(&adag).dot(&dagger(&u));
            let mut rhs = Array2::<C64>::zeros((spec.dim(), spec.dim()));
            for gamma in 0..2 {
                let gd = raising(&spec, gamma).unwrap().to_dense();
                rhs = rhs + gd.mapv(|z| z * f[[gamma, beta]]);
            }
            let diff = &lhs - &rhs;
            for idx in 0..spec.dim() {
                if spec.total_occupation(idx) <= 2 {
                    for r in 0..spec.dim() {
                        worst = worst.max(diff[[r, idx]].norm());
                    }
                }
            }
        }
        assert!(worst <= 1e-6, "bose conjugation residual {worst}");
    }

    #[test]
    fn many_body_number_operator() {
        let spec = fermi_spec(3);
        let theory = ManyBodyTheory::null(spec.lattice(), 1);
        let (n_op, _) = many_body(&spec, ManyBodyKind::N, &theory).unwrap();
        let dense = n_op.to_dense();
        for idx in 0..spec.dim() {
            let expect = spec.total_occupation(idx) as f64;
            assert!((dense[[idx, idx]] - c(expect)).norm() < 1e-14);
        }
    }

    #[test]
    fn many_body_j_null_theory_is_pt() {
        let spec = fermi_spec(3);
        let theory = ManyBodyTheory::null(spec.lattice(), 1);
        let (j, _) = many_body(&spec, ManyBodyKind::J, &theory).unwrap();
        let (pt, _) = many_body(&spec, ManyBodyKind::Pt, &theory).unwrap();
        assert!(max_abs(&(&j.to_dense() - &pt.to_dense())) < 1e-14);
    }

    #[test]
    fn vacuum_invariance_of_v() {
        let spec = bose_spec(4, 3);
        let theory = ManyBodyTheory::oscillator(spec.lattice(), std::f64::consts::PI / 2.0);
        let (v, _) = many_body(&spec, ManyBodyKind::V, &theory).unwrap();
        let vac = spec.vacuum();
        let out = v.apply(&vac);
        let diff = StateVector {
            amps: &out.amps - &vac.amps,
        };
        assert!(diff.norm() <= 1e-12);
    }

    #[test]
    fn sp_sector_consistency() {
        let spec = fermi_spec(4);
        let w0 = std::f64::consts::PI / 2.0;
        let theory = ManyBodyTheory {
            h: array![[c(w0)]],
            t0: spec.lattice().t_start(),
            constant: 0.0,
        };
        for kind in [ManyBodyKind::Pt, ManyBodyKind::J, ManyBodyKind::T, ManyBodyKind::N] {
            let (op, _) = many_body(&spec, kind, &theory).unwrap();
            let sp = sp_restriction(&spec, &op);
            let expect = match kind {
                ManyBodyKind::Pt => build_pt_full(spec.lattice(), 1).unwrap().matrix,
                ManyBodyKind::J => build_j(spec.lattice(), &theory.h).unwrap().matrix,
                ManyBodyKind::T => {
                    let mut tau = Array2::<C64>::zeros((4, 4));
                    for j in 0..4 {
                        tau[[j, j]] = c(spec.lattice().site_time(j));
                    }
                    tau
                }
                ManyBodyKind::N => eye(4),
                ManyBodyKind::V => unreachable!(),
            };
            assert!(max_abs(&(&sp - &expect)) <= 1e-10, "{kind:?}");
        }
        // V restricts to the block-diagonal evolution matrix
        let (v, _) = many_body(&spec, ManyBodyKind::V, &theory).unwrap();
        let sp = sp_restriction(&spec, &v);
        let expect = build_v(
            spec.lattice(),
            &OneBodyHamiltonian::Constant(theory.h.clone()),
            theory.t0,
        )
        .unwrap()
        .matrix;
        assert!(max_abs(&(&sp - &expect)) <= 1e-10);
    }

    #[test]
    fn exp_routes_agree_at_dense_bound() {
        // dim 2^10: Fermi on 10 modes
        let lat = TimeLattice::new(10, 0.5, None).unwrap();
        let spec = FockSpec::new(Statistics::Fermi, lat, 1).unwrap();
        assert_eq!(spec.dim(), 1024);
        let theory = ManyBodyTheory::null(spec.lattice(), 1);
        let (pt, _) = many_body(&spec, ManyBodyKind::Pt, &theory).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let v = Array1::from_shape_fn(spec.dim(), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let v = v.mapv(|z| z / c(norm));
        let tau = C64::new(0.0, 0.8);
        let dense = exp_apply_dense(&pt, tau, &v).unwrap();
        let krylov = exp_apply_krylov(&pt, tau, &v).unwrap();
        let overlap: C64 = dense.iter().zip(krylov.iter()).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap.norm() - 1.0).abs() <= 1e-9);
        let diff = &dense - &krylov;
        let err = diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-9, "routes differ by {err}");
    }

    #[test]
    fn ladder_index_bounds() {
        let spec = fermi_spec(2);
        assert!(ladder(&spec, 2).is_err());
    }
}
