//! Quadratic Hamiltonians, their doubled dynamical matrices, symplectic
//! propagation W(t), normal forms and stability.
//!
//! A quadratic theory over M modes is H = ½·ψ†·K·ψ with ψ = (a, a†)ᵀ and
//!
//! ```text
//!     K = [ ω₀   γ  ]          Π = [ 1   0 ]
//!         [ γ*   ω₀*],             [ 0  −1 ],
//! ```
//!
//! ω₀ Hermitian, γ symmetric. Normal ordering moves a constant ½·tr ω₀ into a
//! separate scalar channel which is carried, never dropped.

use ndarray::{s, Array1, Array2};
use ndarray_linalg::{Cholesky, Eig, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lattice::TimeLattice;
use crate::linalg::{self, dagger, expm, eye, max_abs, to_complex};

const SYMMETRY_TOL: f64 = 1e-12;

/// Time dependence of a quadratic Hamiltonian.
#[derive(Debug, Clone)]
pub enum TimeDependence {
    Constant,
    /// One (ω₀, γ) sample per lattice site.
    PerSite(Vec<(Array2<C64>, Array2<C64>)>),
}

/// ½·ψ†Kψ data: ω₀ (Hermitian), γ (symmetric), optional per-site samples,
/// plus the normal-ordering constant tracked separately.
#[derive(Debug, Clone)]
pub struct QuadraticHamiltonian {
    omega0: Array2<C64>,
    gamma: Array2<C64>,
    time_dependence: TimeDependence,
    /// c-number left over when the Hamiltonian is written in normal order.
    constant: f64,
}

impl QuadraticHamiltonian {
    pub fn new(omega0: Array2<C64>, gamma: Array2<C64>) -> Result<Self> {
        validate_blocks(&omega0, &gamma)?;
        let constant = 0.5 * omega0.diag().iter().map(|z| z.re).sum::<f64>();
        Ok(QuadraticHamiltonian {
            omega0,
            gamma,
            time_dependence: TimeDependence::Constant,
            constant,
        })
    }

    /// Single decoupled oscillator of frequency ω₀.
    pub fn oscillator(omega0: f64) -> Self {
        QuadraticHamiltonian::new(
            Array2::from_elem((1, 1), C64::new(omega0, 0.0)),
            Array2::zeros((1, 1)),
        )
        .expect("1x1 blocks are always valid")
    }

    /// Number-conserving theory defined by a Hermitian one-body matrix.
    pub fn number_conserving(h: Array2<C64>) -> Result<Self> {
        let m = h.nrows();
        QuadraticHamiltonian::new(h, Array2::zeros((m, m)))
    }

    pub fn with_samples(mut self, samples: Vec<(Array2<C64>, Array2<C64>)>) -> Result<Self> {
        for (om, ga) in &samples {
            validate_blocks(om, ga)?;
        }
        self.time_dependence = TimeDependence::PerSite(samples);
        Ok(self)
    }

    pub fn n_modes(&self) -> usize {
        self.omega0.nrows()
    }

    pub fn omega0(&self) -> &Array2<C64> {
        &self.omega0
    }

    pub fn gamma(&self) -> &Array2<C64> {
        &self.gamma
    }

    /// Normal-ordering constant ½·tr ω₀ (per time site when summed into the
    /// action).
    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.time_dependence, TimeDependence::Constant)
    }

    pub fn is_number_conserving(&self) -> bool {
        max_abs(&self.gamma) < SYMMETRY_TOL
            && match &self.time_dependence {
                TimeDependence::Constant => true,
                TimeDependence::PerSite(v) => v.iter().all(|(_, g)| max_abs(g) < SYMMETRY_TOL),
            }
    }

    fn sample(&self, site: Option<usize>) -> Result<(&Array2<C64>, &Array2<C64>)> {
        match (&self.time_dependence, site) {
            (TimeDependence::Constant, _) => Ok((&self.omega0, &self.gamma)),
            (TimeDependence::PerSite(v), Some(j)) => {
                let (om, ga) = v.get(j).ok_or_else(|| {
                    Error::InvalidArgument(format!("sample index {j} out of range"))
                })?;
                Ok((om, ga))
            }
            (TimeDependence::PerSite(_), None) => Err(Error::InvalidArgument(
                "per-site Hamiltonian requires a sample site".into(),
            )),
        }
    }
}

fn validate_blocks(omega0: &Array2<C64>, gamma: &Array2<C64>) -> Result<()> {
    if omega0.nrows() != omega0.ncols() || gamma.nrows() != gamma.ncols() {
        return Err(Error::InvalidArgument("blocks must be square".into()));
    }
    if omega0.nrows() != gamma.nrows() {
        return Err(Error::InvalidArgument(
            "omega0 and gamma must have matching dimension".into(),
        ));
    }
    if linalg::hermiticity_residual(omega0) > SYMMETRY_TOL {
        return Err(Error::InvalidArgument("omega0 must be Hermitian".into()));
    }
    let asym = max_abs(&(gamma - &gamma.t().to_owned()));
    if asym > SYMMETRY_TOL {
        return Err(Error::InvalidArgument("gamma must be symmetric".into()));
    }
    Ok(())
}

/// Doubled (Bogoliubov–de Gennes) dynamical matrix [[ω₀, γ], [γ*, ω₀*]].
#[derive(Debug, Clone)]
pub struct KMatrix {
    matrix: Array2<C64>,
}

impl KMatrix {
    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }
}

/// Metric Π = diag(+1_M, −1_M).
pub fn bdg_metric(m: usize) -> Array2<C64> {
    let mut pi = eye(2 * m);
    for i in m..2 * m {
        pi[[i, i]] = C64::new(-1.0, 0.0);
    }
    pi
}

/// Assemble K from a Hamiltonian; `site` selects the sample for per-site
/// theories and is rejected otherwise only when missing.
pub fn build_k(h: &QuadraticHamiltonian, site: Option<usize>) -> Result<KMatrix> {
    let (om, ga) = h.sample(site)?;
    let m = om.nrows();
    let mut k = Array2::<C64>::zeros((2 * m, 2 * m));
    k.slice_mut(s![..m, ..m]).assign(om);
    k.slice_mut(s![..m, m..]).assign(ga);
    k.slice_mut(s![m.., ..m]).assign(&ga.mapv(|z| z.conj()));
    k.slice_mut(s![m.., m..]).assign(&om.mapv(|z| z.conj()));
    debug_assert!(linalg::hermiticity_residual(&k) <= SYMMETRY_TOL);
    Ok(KMatrix { matrix: k })
}

/// Convert the (q, p)-form ½·Σ t_ij p_i p_j + v_ij q_i q_j + u_ij (q_i p_j +
/// p_j q_i) to (ω₀, γ) blocks plus the additive constant from reordering to
/// normal order.
///
/// With q = (a + a†)/√2 and p = i(a† − a)/√2 the map is
/// ω₀ = (t + v)/2 + i(uᵀ − u)/2,  γ = (v − t)/2 + i(u + uᵀ)/2,
/// constant = tr(t + v)/4.
pub fn from_tvu(
    t_mat: &Array2<f64>,
    v_mat: &Array2<f64>,
    u_mat: &Array2<f64>,
) -> Result<(QuadraticHamiltonian, f64)> {
    let m = t_mat.nrows();
    if t_mat.ncols() != m || v_mat.nrows() != m || v_mat.ncols() != m || u_mat.nrows() != m || u_mat.ncols() != m {
        return Err(Error::InvalidArgument(
            "t, v, u must be square with matching dimension".into(),
        ));
    }
    let sym_err = |a: &Array2<f64>| {
        a.indexed_iter()
            .map(|((i, j), x)| (x - a[[j, i]]).abs())
            .fold(0.0, f64::max)
    };
    if sym_err(t_mat) > SYMMETRY_TOL || sym_err(v_mat) > SYMMETRY_TOL {
        return Err(Error::InvalidArgument("t and v must be symmetric".into()));
    }

    let tc = to_complex(t_mat);
    let vc = to_complex(v_mat);
    let uc = to_complex(u_mat);
    let ut = uc.t().to_owned();
    let half = C64::new(0.5, 0.0);
    let ihalf = C64::new(0.0, 0.5);

    let omega0 = (&tc + &vc).mapv(|z| z * half) + (&ut - &uc).mapv(|z| z * ihalf);
    let gamma = (&vc - &tc).mapv(|z| z * half) + (&uc + &ut).mapv(|z| z * ihalf);
    let constant = 0.25 * (0..m).map(|i| t_mat[[i, i]] + v_mat[[i, i]]).sum::<f64>();

    Ok((QuadraticHamiltonian::new(omega0, gamma)?, constant))
}

/// A 2M×2M Bogoliubov map: W†ΠW = Π within `SYMPLECTIC_TOL`.
#[derive(Debug, Clone)]
pub struct SymplecticMap {
    matrix: Array2<C64>,
}

pub const SYMPLECTIC_TOL: f64 = 1e-9;

impl SymplecticMap {
    pub fn new(matrix: Array2<C64>) -> Result<Self> {
        let r = symplectic_residual(&matrix);
        if r > SYMPLECTIC_TOL {
            return Err(Error::InvalidArgument(format!(
                "matrix is not symplectic: residual {r:.3e}"
            )));
        }
        Ok(SymplecticMap { matrix })
    }

    pub fn identity(m: usize) -> Self {
        SymplecticMap { matrix: eye(2 * m) }
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// Π-inverse: W⁻¹ = Π W† Π, exact for symplectic W.
    pub fn inverse(&self) -> Array2<C64> {
        let m = self.n_modes();
        let pi = bdg_metric(m);
        pi.dot(&dagger(&self.matrix)).dot(&pi)
    }

    pub fn residual(&self) -> f64 {
        symplectic_residual(&self.matrix)
    }
}

/// ‖W†ΠW − Π‖_max.
pub fn symplectic_residual(w: &Array2<C64>) -> f64 {
    let m = w.nrows() / 2;
    let pi = bdg_metric(m);
    max_abs(&(dagger(w).dot(&pi).dot(w) - &pi))
}

/// Result of propagating W(t) across the lattice.
#[derive(Debug, Clone)]
pub struct WPropagation {
    /// W(t_j) at every site, starting from W(t_start) = W0.
    pub maps: Vec<SymplecticMap>,
    /// max_j ‖W(t_j)†ΠW(t_j) − Π‖.
    pub max_symplectic_residual: f64,
    /// max_j ‖i(W(t_{j+1}) − W(t_j))/ε − ΠK(t_j)W(t_j)‖ (forward difference).
    pub heisenberg_residual: f64,
}

/// Solve i·Ẇ = ΠK(t)·W on the lattice. Constant K uses the closed form
/// W(t_j) = exp(−iΠK·(t_j − t_start))·W0; sampled K uses the time-ordered
/// product of per-step exponentials exp(−iΠK(t_j)·ε).
pub fn propagate_w(
    h: &QuadraticHamiltonian,
    lat: &TimeLattice,
    w0: &SymplecticMap,
) -> Result<WPropagation> {
    let m = h.n_modes();
    if w0.n_modes() != m {
        return Err(Error::InvalidArgument(
            "W0 dimension does not match Hamiltonian".into(),
        ));
    }
    let n = lat.n_sites();
    let eps = lat.dt();
    let pi = bdg_metric(m);

    let mut mats: Vec<Array2<C64>> = Vec::with_capacity(n);
    if h.is_constant() {
        let k = build_k(h, None)?;
        let gen = pi.dot(k.matrix()).mapv(|z| z * C64::new(0.0, -1.0));
        for j in 0..n {
            let dtj = lat.site_time(j) - lat.t_start();
            let e = expm(&gen.mapv(|z| z * C64::new(dtj, 0.0)))?;
            mats.push(e.dot(w0.matrix()));
        }
    } else {
        let mut w = w0.matrix().clone();
        mats.push(w.clone());
        for j in 0..n - 1 {
            let k = build_k(h, Some(j))?;
            let step = expm(
                &pi.dot(k.matrix())
                    .mapv(|z| z * C64::new(0.0, -eps)),
            )?;
            w = step.dot(&w);
            mats.push(w.clone());
        }
    }

    let mut max_symp: f64 = 0.0;
    let mut max_heis: f64 = 0.0;
    for j in 0..n {
        max_symp = max_symp.max(symplectic_residual(&mats[j]));
        if j + 1 < n {
            let k = build_k(h, if h.is_constant() { None } else { Some(j) })?;
            let fd = (&mats[j + 1] - &mats[j]).mapv(|z| z * C64::new(0.0, 1.0 / eps));
            let rhs = pi.dot(k.matrix()).dot(&mats[j]);
            max_heis = max_heis.max(max_abs(&(&fd - &rhs)));
        }
    }

    let maps = mats
        .into_iter()
        .map(|mat| SymplecticMap { matrix: mat })
        .collect();
    Ok(WPropagation {
        maps,
        max_symplectic_residual: max_symp,
        heisenberg_residual: max_heis,
    })
}

/// Normal form of a stable constant quadratic theory: a symplectic W0 with
/// W0†·K·W0 = diag(ν, ν), ν ascending.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub w0: SymplecticMap,
    pub frequencies: Vec<f64>,
}

/// Diagonalize K by a Bogoliubov transformation.
///
/// Positive-definite K goes through the Cholesky route (Colpa 1978), which
/// yields a symplectic eigenbasis directly from a Hermitian eigenproblem.
/// Otherwise the spectrum of ΠK decides: complex eigenvalues are an
/// unstable-theory error carrying the offenders; a real spectrum falls back
/// to Π-orthonormalization of the ΠK eigenvectors.
pub fn normal_form(h: &QuadraticHamiltonian) -> Result<NormalForm> {
    if !h.is_constant() {
        return Err(Error::InvalidArgument(
            "normal form requires a constant Hamiltonian".into(),
        ));
    }
    let m = h.n_modes();
    let k = build_k(h, None)?.matrix().clone();
    let pi = bdg_metric(m);

    if let Ok(chol) = k.cholesky(UPLO::Upper) {
        // K = C†C; G = CΠC† is Hermitian with spectrum {±ν}.
        let g = chol.dot(&pi).dot(&dagger(&chol));
        let (w, u) = crate::linalg::hermitian_eig(&g)?;
        // ascending eigh order: (−ν_M … −ν_1, ν_1 … ν_M)
        let mut order: Vec<usize> = (m..2 * m).collect();
        order.extend((0..m).rev());
        let mut u2 = Array2::<C64>::zeros((2 * m, 2 * m));
        let mut e2 = Array1::<f64>::zeros(2 * m);
        for (dst, &src) in order.iter().enumerate() {
            u2.column_mut(dst).assign(&u.column(src));
            e2[dst] = w[src];
        }
        if e2.slice(s![..m]).iter().any(|&x| x <= 0.0) {
            return Err(Error::DegenerateNormalForm(
                "Cholesky route produced a non-positive normal frequency".into(),
            ));
        }
        // W0 = C⁻¹ U (ΠE)^{1/2}
        let cinv = invert(&chol)?;
        let mut scaled = u2.clone();
        for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
            let pe = if j < m { e2[j] } else { -e2[j] };
            let root = C64::new(pe.sqrt(), 0.0);
            col.mapv_inplace(|z| z * root);
        }
        let mut w0 = cinv.dot(&scaled);
        fix_column_phases(&mut w0);
        let nu: Vec<f64> = e2.slice(s![..m]).to_vec();
        return Ok(NormalForm {
            w0: SymplecticMap::new(w0)?,
            frequencies: nu,
        });
    }

    // General route: eigenvectors of ΠK, Π-orthonormalized per eigenvalue
    // cluster, particle modes selected by positive Π-norm.
    let pik = pi.dot(&k);
    let (vals, vecs) = pik.eig()?;
    let complex: Vec<C64> = vals
        .iter()
        .copied()
        .filter(|z| z.im.abs() > 1e-9 * (1.0 + z.norm()))
        .collect();
    if !complex.is_empty() {
        return Err(Error::UnstableTheory(complex));
    }

    let mut idx: Vec<usize> = (0..2 * m).collect();
    idx.sort_by(|&a, &b| vals[a].re.partial_cmp(&vals[b].re).unwrap());
    let mut particles: Vec<(f64, Array1<C64>)> = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let lam = vals[idx[i]].re;
        let mut cluster = vec![idx[i]];
        let mut j = i + 1;
        while j < idx.len() && (vals[idx[j]].re - lam).abs() < 1e-8 * (1.0 + lam.abs()) {
            cluster.push(idx[j]);
            j += 1;
        }
        // Gram matrix under Π; positive directions are particle modes.
        let cols: Vec<Array1<C64>> = cluster.iter().map(|&c| vecs.column(c).to_owned()).collect();
        let d = cols.len();
        let mut gram = Array2::<C64>::zeros((d, d));
        for a in 0..d {
            for b in 0..d {
                gram[[a, b]] = pi_inner(&pi, &cols[a], &cols[b]);
            }
        }
        let (gw, gv) = crate::linalg::hermitian_eig(&gram)?;
        for (s_idx, &sval) in gw.iter().enumerate() {
            if sval > 1e-9 {
                let mut vec = Array1::<C64>::zeros(2 * m);
                for (a, col) in cols.iter().enumerate() {
                    let coef = gv[[a, s_idx]];
                    vec = vec + col.mapv(|z| z * coef);
                }
                let norm = pi_inner(&pi, &vec, &vec).re;
                if norm <= 1e-12 {
                    continue;
                }
                vec.mapv_inplace(|z| z / C64::new(norm.sqrt(), 0.0));
                particles.push((lam, vec));
            }
        }
        i = j;
    }
    if particles.len() != m {
        return Err(Error::DegenerateNormalForm(format!(
            "found {} particle modes, expected {m}",
            particles.len()
        )));
    }
    particles.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut w0 = Array2::<C64>::zeros((2 * m, 2 * m));
    for (c, (_, v)) in particles.iter().enumerate() {
        w0.column_mut(c).assign(v);
        // conjugate partner: Σ v* with Σ the block swap
        let mut partner = Array1::<C64>::zeros(2 * m);
        for a in 0..m {
            partner[a] = v[m + a].conj();
            partner[m + a] = v[a].conj();
        }
        w0.column_mut(m + c).assign(&partner);
    }
    fix_column_phases(&mut w0);
    let nu: Vec<f64> = particles.iter().map(|(l, _)| *l).collect();
    Ok(NormalForm {
        w0: SymplecticMap::new(w0)?,
        frequencies: nu,
    })
}

fn pi_inner(pi: &Array2<C64>, a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.mapv(|z| z.conj()).dot(&pi.dot(b))
}

/// Rotate each column so its largest-magnitude component is real positive;
/// ties break on the lowest row index. Keeps the output reproducible.
fn fix_column_phases(w: &mut Array2<C64>) {
    for mut col in w.columns_mut() {
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for (i, z) in col.iter().enumerate() {
            if z.norm() > best_mag + 1e-12 {
                best_mag = z.norm();
                best = i;
            }
        }
        if best_mag > 0.0 {
            let phase = col[best] / C64::new(best_mag, 0.0);
            let adj = phase.conj();
            col.mapv_inplace(|z| z * adj);
        }
    }
}

fn invert(m: &Array2<C64>) -> Result<Array2<C64>> {
    use ndarray_linalg::Inverse;
    Ok(m.inv()?)
}

/// Eigenvalues of ΠK for stability classification.
pub fn dynamical_eigenvalues(h: &QuadraticHamiltonian) -> Result<Vec<C64>> {
    let m = h.n_modes();
    let k = build_k(h, None)?;
    let pik = bdg_metric(m).dot(k.matrix());
    Ok(linalg::eigenvalues(&pik)?.to_vec())
}

/// Check that every frequency driving the evolution lies on the lattice
/// grid (2π/T)·ℤ within `tol`: the eigenvalues of ω₀ for number-conserving
/// theories, the normal frequencies ν otherwise. Returns the offenders.
pub fn commensurability(
    h: &QuadraticHamiltonian,
    lat: &TimeLattice,
    tol: f64,
) -> Result<(bool, Vec<f64>)> {
    let freqs: Vec<f64> = if h.is_number_conserving() {
        linalg::eigh_values(h.omega0())?
    } else {
        normal_form(h)?.frequencies
    };
    let base = 2.0 * std::f64::consts::PI / lat.period();
    let mut offending = Vec::new();
    for &f in &freqs {
        let ratio = f / base;
        if (ratio - ratio.round()).abs() > tol / base {
            offending.push(f);
        }
    }
    Ok((offending.is_empty(), offending))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, m: usize) -> Array2<C64> {
        let raw = Array2::from_shape_fn((m, m), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        (&raw + &dagger(&raw)).mapv(|z| z * c(0.5))
    }

    fn random_symmetric(rng: &mut ChaCha8Rng, m: usize) -> Array2<C64> {
        let raw = Array2::from_shape_fn((m, m), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        (&raw + &raw.t().to_owned()).mapv(|z| z * c(0.5))
    }

    #[test]
    fn k_matrix_trivial_cases() {
        let h = QuadraticHamiltonian::oscillator(1.0);
        let k = build_k(&h, None).unwrap();
        assert!(max_abs(&(k.matrix() - &eye(2))) < 1e-15);

        let h = QuadraticHamiltonian::new(array![[c(1.0)]], array![[c(0.5)]]).unwrap();
        let k = build_k(&h, None).unwrap();
        let expect = array![[c(1.0), c(0.5)], [c(0.5), c(1.0)]];
        assert!(max_abs(&(k.matrix() - &expect)) < 1e-15);
    }

    #[test]
    fn k_matrix_random_hermiticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let om = random_hermitian(&mut rng, 2);
        let ga = random_symmetric(&mut rng, 2);
        let h = QuadraticHamiltonian::new(om, ga).unwrap();
        let k = build_k(&h, None).unwrap();
        assert!(linalg::hermiticity_residual(k.matrix()) <= 1e-15);
    }

    #[test]
    fn invalid_blocks_rejected() {
        let bad_om = array![[c(0.0), c(1.0)], [c(0.0), c(0.0)]];
        assert!(QuadraticHamiltonian::new(bad_om, Array2::zeros((2, 2))).is_err());
        let bad_ga = array![[c(0.0), c(1.0)], [c(-1.0), c(0.0)]];
        assert!(QuadraticHamiltonian::new(eye(2), bad_ga).is_err());
    }

    // Independent oracle for from_tvu: build both quadratic forms as dense
    // truncated oscillator matrices and compare on the cutoff-safe sector.
    fn qp_oracle_check(t: f64, v: f64, u: f64) {
        let nmax = 14usize;
        let dim = nmax + 1;
        let mut a = Array2::<C64>::zeros((dim, dim));
        for n in 1..dim {
            a[[n - 1, n]] = c((n as f64).sqrt());
        }
        let ad = dagger(&a);
        let sqrt2 = 2.0f64.sqrt();
        let q = (&a + &ad).mapv(|z| z / c(sqrt2));
        let p = (&ad - &a).mapv(|z| z * C64::new(0.0, 1.0) / c(sqrt2));
        let h_qp = (p.dot(&p).mapv(|z| z * c(t))
            + q.dot(&q).mapv(|z| z * c(v))
            + (q.dot(&p) + p.dot(&q)).mapv(|z| z * c(u)))
        .mapv(|z| z * c(0.5));

        let (ham, constant) = from_tvu(
            &array![[t]],
            &array![[v]],
            &array![[u]],
        )
        .unwrap();
        let w0 = ham.omega0()[[0, 0]];
        let g0 = ham.gamma()[[0, 0]];
        let h_ao = ad.dot(&a).mapv(|z| z * w0)
            + ad.dot(&ad).mapv(|z| z * g0 * c(0.5))
            + a.dot(&a).mapv(|z| z * g0.conj() * c(0.5))
            + eye(dim).mapv(|z| z * c(constant));

        // compare matrix elements on states well below the cutoff
        for i in 0..dim - 2 {
            for j in 0..dim - 2 {
                assert!(
                    (h_qp[[i, j]] - h_ao[[i, j]]).norm() < 1e-12,
                    "element ({i},{j}) for t={t} v={v} u={u}"
                );
            }
        }
    }

    #[test]
    fn from_tvu_unit_oscillator() {
        let (h, constant) = from_tvu(&array![[1.0]], &array![[1.0]], &array![[0.0]]).unwrap();
        assert!((h.omega0()[[0, 0]] - c(1.0)).norm() < 1e-15);
        assert!(h.gamma()[[0, 0]].norm() < 1e-15);
        assert!((constant - 0.5).abs() < 1e-15);
        qp_oracle_check(1.0, 1.0, 0.0);
    }

    #[test]
    fn from_tvu_free_particle_form() {
        let (h, constant) = from_tvu(&array![[1.0]], &array![[0.0]], &array![[0.0]]).unwrap();
        assert!((h.omega0()[[0, 0]] - c(0.5)).norm() < 1e-15);
        assert!((h.gamma()[[0, 0]] + c(0.5)).norm() < 1e-15);
        assert!((constant - 0.25).abs() < 1e-15);
        qp_oracle_check(1.0, 0.0, 0.0);
    }

    #[test]
    fn from_tvu_zero_and_cross_terms() {
        let (h, constant) = from_tvu(
            &Array2::zeros((1, 1)),
            &Array2::zeros((1, 1)),
            &Array2::zeros((1, 1)),
        )
        .unwrap();
        assert!(max_abs(h.omega0()) < 1e-15);
        assert!(max_abs(h.gamma()) < 1e-15);
        assert!(constant.abs() < 1e-15);
        qp_oracle_check(0.4, 1.3, 0.25);
    }

    #[test]
    fn from_tvu_rejects_asymmetric() {
        let asym = array![[0.0, 1.0], [0.0, 0.0]];
        let z = Array2::zeros((2, 2));
        assert!(from_tvu(&asym, &z, &z).is_err());
    }

    #[test]
    fn propagate_w_null_theory() {
        let lat = TimeLattice::new(6, 0.5, None).unwrap();
        let h = QuadraticHamiltonian::new(Array2::zeros((1, 1)), Array2::zeros((1, 1))).unwrap();
        let prop = propagate_w(&h, &lat, &SymplecticMap::identity(1)).unwrap();
        for w in &prop.maps {
            assert!(max_abs(&(w.matrix() - &eye(2))) < 1e-14);
        }
        assert!(prop.heisenberg_residual < 1e-14);
    }

    #[test]
    fn propagate_w_oscillator_closed_form() {
        // ω₀ = 1, t = π from t_start: W = diag(e^{−iπ}, e^{iπ}) = −1
        let lat = TimeLattice::new(4, PI / 4.0, Some(0.0)).unwrap();
        let h = QuadraticHamiltonian::oscillator(1.0);
        let k = build_k(&h, None).unwrap();
        let pi2 = bdg_metric(1);
        let gen = pi2.dot(k.matrix()).mapv(|z| z * C64::new(0.0, -PI));
        let w = expm(&gen).unwrap();
        assert!(max_abs(&(&w + &eye(2))) < 1e-12);
    }

    #[test]
    fn propagate_w_symplectic_invariant() {
        let lat = TimeLattice::new(16, 0.25, None).unwrap();
        let h = QuadraticHamiltonian::new(array![[c(1.0)]], array![[c(0.5)]]).unwrap();
        let prop = propagate_w(&h, &lat, &SymplecticMap::identity(1)).unwrap();
        assert!(prop.max_symplectic_residual <= 1e-10);
    }

    #[test]
    fn propagate_w_rejects_nonsymplectic_start() {
        let bad = eye(2).mapv(|z| z * c(2.0));
        assert!(SymplecticMap::new(bad).is_err());
    }

    #[test]
    fn heisenberg_residual_first_order() {
        let h = QuadraticHamiltonian::new(array![[c(1.0)]], array![[c(0.5)]]).unwrap();
        let r1 = propagate_w(&h, &TimeLattice::new(64, 4.0 / 64.0, None).unwrap(), &SymplecticMap::identity(1))
            .unwrap()
            .heisenberg_residual;
        let r2 = propagate_w(&h, &TimeLattice::new(128, 4.0 / 128.0, None).unwrap(), &SymplecticMap::identity(1))
            .unwrap()
            .heisenberg_residual;
        let order = (r1 / r2).log2();
        assert!(order >= 0.9, "observed order {order}");
    }

    #[test]
    fn normal_form_identity_theory() {
        let nf = normal_form(&QuadraticHamiltonian::oscillator(1.0)).unwrap();
        assert!((nf.frequencies[0] - 1.0).abs() < 1e-12);
        assert!(max_abs(&(nf.w0.matrix() - &eye(2))) < 1e-10);
    }

    #[test]
    fn normal_form_paired_oscillator() {
        // ν = √(ω₀² − γ²) = √0.75
        let h = QuadraticHamiltonian::new(array![[c(1.0)]], array![[c(0.5)]]).unwrap();
        let nf = normal_form(&h).unwrap();
        assert!((nf.frequencies[0] - 0.75f64.sqrt()).abs() < 1e-12);
        let k = build_k(&h, None).unwrap();
        let d = dagger(nf.w0.matrix()).dot(k.matrix()).dot(nf.w0.matrix());
        let expect = array![
            [c(nf.frequencies[0]), c(0.0)],
            [c(0.0), c(nf.frequencies[0])]
        ];
        assert!(max_abs(&(&d - &expect)) < 1e-10);
        assert!(nf.w0.residual() <= 1e-9);
    }

    #[test]
    fn normal_form_unstable_theory() {
        let h = QuadraticHamiltonian::new(array![[c(1.0)]], array![[c(1.5)]]).unwrap();
        match normal_form(&h) {
            Err(Error::UnstableTheory(vals)) => {
                let expect = 1.25f64.sqrt();
                assert!(vals.iter().any(|z| (z.im.abs() - expect).abs() < 1e-9));
            }
            other => panic!("expected unstable-theory error, got {other:?}"),
        }
    }

    #[test]
    fn normal_form_involutive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let om = random_hermitian(&mut rng, 2) + eye(2).mapv(|z| z * c(3.0));
        let ga = random_symmetric(&mut rng, 2).mapv(|z| z * c(0.3));
        let h = QuadraticHamiltonian::new(om, ga).unwrap();
        let nf = normal_form(&h).unwrap();
        let k = build_k(&h, None).unwrap();
        let kp = dagger(nf.w0.matrix()).dot(k.matrix()).dot(nf.w0.matrix());
        // strip the tiny off-diagonal residue so the constructor accepts it
        let m = h.n_modes();
        let mut om2 = Array2::<C64>::zeros((m, m));
        for i in 0..m {
            om2[[i, i]] = c(kp[[i, i]].re);
        }
        let h2 = QuadraticHamiltonian::new(om2, Array2::zeros((m, m))).unwrap();
        let nf2 = normal_form(&h2).unwrap();
        // |W0| pattern of the already-diagonal theory is the identity
        let absdiff = nf2
            .w0
            .matrix()
            .indexed_iter()
            .map(|((i, j), z)| {
                let target = if i == j { 1.0 } else { 0.0 };
                (z.norm() - target).abs()
            })
            .fold(0.0, f64::max);
        assert!(absdiff < 1e-9);
    }

    #[test]
    fn symplectic_group_closure() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let om = random_hermitian(&mut rng, 2) + eye(2).mapv(|z| z * c(2.5));
        let ga = random_symmetric(&mut rng, 2).mapv(|z| z * c(0.4));
        let h = QuadraticHamiltonian::new(om, ga).unwrap();
        let nf = normal_form(&h).unwrap();
        let w = nf.w0.matrix();
        assert!(symplectic_residual(&w.dot(w)) <= 1e-9);
        assert!(symplectic_residual(&nf.w0.inverse()) <= 1e-9);
        let prod = w.dot(&nf.w0.inverse());
        assert!(max_abs(&(&prod - &eye(4))) < 1e-10);
    }

    #[test]
    fn commensurability_examples() {
        // ν = π/2 on T = 4 is commensurate
        let lat = TimeLattice::new(4, 1.0, None).unwrap();
        let h = QuadraticHamiltonian::oscillator(PI / 2.0);
        let (ok, off) = commensurability(&h, &lat, 1e-9).unwrap();
        assert!(ok && off.is_empty());

        // ν = 1 on T = 4 is not
        let h = QuadraticHamiltonian::oscillator(1.0);
        let (ok, off) = commensurability(&h, &lat, 1e-9).unwrap();
        assert!(!ok);
        assert_eq!(off.len(), 1);
        assert!((off[0] - 1.0).abs() < 1e-12);

        // null theory is commensurate
        let h = QuadraticHamiltonian::new(Array2::zeros((1, 1)), Array2::zeros((1, 1))).unwrap();
        let (ok, _) = commensurability(&h, &lat, 1e-9).unwrap();
        assert!(ok);
    }
}
