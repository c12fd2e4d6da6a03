//! Physical subspaces of the history space: the lift map, foliation
//! unitaries, propagator ratios, Heisenberg-picture observable elements,
//! temporal entanglement, and the single-particle structure checks.
//!
//! The many-body arena here is number-conserving; theories enter as a
//! Hermitian one-body matrix h over the M spatial modes. Pairing terms are
//! certified in the one-body BdG channel of [`crate::onebody`].

use ndarray::{Array1, Array2};
use ndarray_linalg::SVD;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{
    apply_creation, exp_apply, gaussian_from_onebody, many_body, ManyBodyKind, ManyBodyTheory,
    FockSpec, SparseMatrix, StateVector, Statistics,
};
use crate::lattice::dft_matrix;
use crate::linalg::{dagger, max_abs_vec};
use crate::onebody::{build_v, OneBodyHamiltonian};

/// Coefficients of a state in the small conventional Fock space over the M
/// spatial modes, keyed by occupation vectors.
#[derive(Debug, Clone)]
pub struct SmallState {
    /// (occupations over M modes, coefficient); the basis normalization
    /// Π(a†)^n/√(n!) is implied.
    pub terms: Vec<(Vec<u32>, C64)>,
}

impl SmallState {
    pub fn vacuum(m: usize) -> Self {
        SmallState {
            terms: vec![(vec![0; m], C64::new(1.0, 0.0))],
        }
    }

    /// Single particle in spatial mode `mode`.
    pub fn single(m: usize, mode: usize) -> Self {
        let mut occ = vec![0u32; m];
        occ[mode] = 1;
        SmallState {
            terms: vec![(occ, C64::new(1.0, 0.0))],
        }
    }

    /// Truncated coherent state of a single mode (M = 1), normalized.
    pub fn coherent_single_mode(alpha: C64, n_cut: u32) -> Self {
        let mut terms = Vec::new();
        let mut coef = C64::new(1.0, 0.0);
        terms.push((vec![0], coef));
        for n in 1..=n_cut {
            coef = coef * alpha / C64::new((n as f64).sqrt(), 0.0);
            terms.push((vec![n], coef));
        }
        let norm: f64 = terms.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt();
        for (_, c) in &mut terms {
            *c /= C64::new(norm, 0.0);
        }
        SmallState { terms }
    }

    pub fn norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, c)| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// ⟨self|other⟩ assuming occupation keys are unique per state.
    pub fn inner(&self, other: &SmallState) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (occ_a, ca) in &self.terms {
            for (occ_b, cb) in &other.terms {
                if occ_a == occ_b {
                    acc += ca.conj() * cb;
                }
            }
        }
        acc
    }

    /// Apply a one-body rotation u (M×M) to the state: Π(a†)^n|0⟩ →
    /// Π(A†(u·e))^n|0⟩, expanded back onto occupation vectors. Used for the
    /// evolved reference states in foliation checks.
    pub fn rotated(&self, u: &Array2<C64>, n_cut: u32) -> SmallState {
        let m = u.nrows();
        // dense expansion in a small truncated space
        let base = n_cut as usize + 1;
        let dim: usize = base.pow(m as u32);
        let occ_of = |idx: usize, l: usize| (idx / base.pow(l as u32)) % base;
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        for (occ, coef) in &self.terms {
            // build Π (Σ_m' u_{m'm} a†_{m'})^{n_m} |0⟩ / √(n!)
            let mut scratch = vec![C64::new(0.0, 0.0); dim];
            scratch[0] = *coef;
            for (mode, &n) in occ.iter().enumerate() {
                for _ in 0..n {
                    let mut next = vec![C64::new(0.0, 0.0); dim];
                    for (idx, amp) in scratch.iter().enumerate() {
                        if amp.norm_sqr() == 0.0 {
                            continue;
                        }
                        for tgt_mode in 0..m {
                            let nt = occ_of(idx, tgt_mode);
                            if nt + 1 >= base {
                                continue;
                            }
                            let stride = base.pow(tgt_mode as u32);
                            next[idx + stride] += u[[tgt_mode, mode]]
                                * C64::new(((nt + 1) as f64).sqrt(), 0.0)
                                * amp;
                        }
                    }
                    scratch = next;
                }
                let mut fact = 1.0f64;
                for k in 1..=n as usize {
                    fact *= (k as f64).sqrt();
                }
                for a in &mut scratch {
                    *a /= C64::new(fact, 0.0);
                }
            }
            for (a, s) in amps.iter_mut().zip(scratch.iter()) {
                *a += *s;
            }
        }
        let mut terms = Vec::new();
        for (idx, amp) in amps.iter().enumerate() {
            if amp.norm() > 1e-15 {
                let occ: Vec<u32> = (0..m).map(|l| occ_of(idx, l) as u32).collect();
                terms.push((occ, *amp));
            }
        }
        SmallState { terms }
    }
}

/// Creator kets y_{k,m} of the normal modes Ã†_m(ω_k) = A†(y_{k,m}) over the
/// flat (site, mode) basis: y_{k,m} = v·(F†e_k ⊗ e_m) with v the one-body
/// matrix of 𝒱†.
fn normal_mode_kets(spec: &FockSpec, theory: &ManyBodyTheory) -> Result<Vec<Vec<Array1<C64>>>> {
    let lat = spec.lattice();
    let m = spec.indexing().n_space_modes();
    let n = lat.n_sites();
    let v = build_v(lat, &OneBodyHamiltonian::Constant(theory.h.clone()), theory.t0)?.matrix;
    let f = dft_matrix(lat);
    let fdag = dagger(&f);
    let mut all = Vec::with_capacity(n);
    for k in 0..n {
        let mut per_mode = Vec::with_capacity(m);
        let fk = fdag.column(k).to_owned();
        for mode in 0..m {
            let mut ket = Array1::<C64>::zeros(n * m);
            for j in 0..n {
                ket[j * m + mode] = fk[j];
            }
            per_mode.push(v.dot(&ket));
        }
        all.push(per_mode);
    }
    Ok(all)
}

/// Result of lifting a conventional state into the physical subspace.
#[derive(Debug, Clone)]
pub struct LiftResult {
    pub state: StateVector,
    /// Norm of the source small-Fock state (the lift preserves it).
    pub source_norm: f64,
    /// Scalar channel: c-numbers accumulated by normal ordering of the
    /// theory behind this lift (per the action's constant channel).
    pub constants: f64,
}

/// Lift a small-Fock state into its history: apply the polynomial of
/// Ã†_m(0) (or of the smeared Ã′†_m) to |Ω̃⟩ = |Ω⟩.
///
/// `smear`, when given, must hold N weights with Σ|φ(ω_k)|² = 1; the
/// unsmeared lift uses the ω = 0 modes alone.
pub fn lift(
    spec: &FockSpec,
    theory: &ManyBodyTheory,
    psi: &SmallState,
    smear: Option<&Array1<C64>>,
) -> Result<LiftResult> {
    let lat = spec.lattice();
    let n = lat.n_sites();
    let m = spec.indexing().n_space_modes();
    let kets = normal_mode_kets(spec, theory)?;
    let k0 = lat
        .k_index(0)
        .expect("omega = 0 is always in the window");

    let creators: Vec<Array1<C64>> = match smear {
        None => (0..m).map(|mode| kets[k0][mode].clone()).collect(),
        Some(phi) => {
            if phi.len() != n {
                return Err(Error::InvalidArgument(
                    "smear weights must have one entry per frequency".into(),
                ));
            }
            let wsum: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
            if (wsum - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "smear weights must be normalized, Σ|φ|² = {wsum}"
                )));
            }
            (0..m)
                .map(|mode| {
                    let mut acc = Array1::<C64>::zeros(n * m);
                    for k in 0..n {
                        acc = acc + kets[k][mode].mapv(|z| z * phi[k].conj());
                    }
                    acc
                })
                .collect()
        }
    };

    let mut out = StateVector::zeros(spec.dim());
    for (occ, coef) in &psi.terms {
        if occ.len() != m {
            return Err(Error::InvalidArgument(
                "small-state occupation length must be M".into(),
            ));
        }
        let mut scratch = spec.vacuum();
        let mut norm_div = 1.0f64;
        for (mode, &cnt) in occ.iter().enumerate().rev() {
            for _ in 0..cnt {
                scratch = apply_creation(spec, &creators[mode], &scratch);
            }
            for k in 1..=cnt as usize {
                norm_div *= (k as f64).sqrt();
            }
        }
        let scale = *coef / C64::new(norm_div, 0.0);
        out.amps = out.amps + scratch.amps.mapv(|z| z * scale);
    }

    Ok(LiftResult {
        state: out,
        source_norm: psi.norm(),
        constants: -(n as f64) * theory.constant,
    })
}

/// ‖J·Ψ‖ for a lifted state — the physical-subspace membership residual.
pub fn action_annihilation_residual(
    spec: &FockSpec,
    theory: &ManyBodyTheory,
    state: &StateVector,
) -> Result<f64> {
    let (j, _) = many_body(spec, ManyBodyKind::J, theory)?;
    Ok(j.apply(state).norm())
}

/// One-body matrix of the foliation unitary ℱ(t): maps the normal mode at
/// ω_k to the tilde site operator at t + ε·k (cyclic).
pub fn foliation_onebody(
    spec: &FockSpec,
    theory: &ManyBodyTheory,
    t: f64,
) -> Result<Array2<C64>> {
    let lat = spec.lattice();
    let site = lat
        .site_of_periodic(t)
        .ok_or_else(|| Error::InvalidArgument(format!("t = {t} is off-lattice")))?;
    let n = lat.n_sites();
    let m = spec.indexing().n_space_modes();
    let kets = normal_mode_kets(spec, theory)?;
    let v = build_v(lat, &OneBodyHamiltonian::Constant(theory.h.clone()), theory.t0)?.matrix;

    // f = Σ_{k,mode} y_{k,mode} · (v·e_{site+k,mode})†
    let mut f = Array2::<C64>::zeros((n * m, n * m));
    for (kidx, k) in lat.k_window().iter().enumerate() {
        let tgt_site = ((site as i64 + k).rem_euclid(n as i64)) as usize;
        for mode in 0..m {
            let mut site_ket = Array1::<C64>::zeros(n * m);
            site_ket[tgt_site * m + mode] = C64::new(1.0, 0.0);
            let tilde_site = v.dot(&site_ket);
            let y = &kets[kidx][mode];
            for r in 0..n * m {
                for c in 0..n * m {
                    f[[r, c]] += y[r] * tilde_site[c].conj();
                }
            }
        }
    }
    Ok(f)
}

/// The foliation unitary as a many-body sparse operator (dims within the
/// dense-operator bound).
pub fn foliation_unitary(
    spec: &FockSpec,
    theory: &ManyBodyTheory,
    t: f64,
) -> Result<SparseMatrix> {
    let f = foliation_onebody(spec, theory, t)?;
    gaussian_from_onebody(spec, &f)
}

/// ℱ†(t)·Ψ computed through the one-body matrix, by linearity over the basis
/// support of Ψ.
pub fn apply_foliation_adjoint(
    spec: &FockSpec,
    theory: &ManyBodyTheory,
    t: f64,
    state: &StateVector,
) -> Result<StateVector> {
    let f = foliation_onebody(spec, theory, t)?;
    Ok(crate::fock::apply_gaussian(spec, &dagger(&f), state))
}

/// Directly constructed product state: `small` at site `t`, vacuum
/// elsewhere. The Appendix-D comparison target for ℱ†(t)·lift(ψ).
pub fn site_product_state(
    spec: &FockSpec,
    t: f64,
    small: &SmallState,
) -> Result<StateVector> {
    let lat = spec.lattice();
    let site = lat
        .site_of_periodic(t)
        .ok_or_else(|| Error::InvalidArgument(format!("t = {t} is off-lattice")))?;
    let m = spec.indexing().n_space_modes();
    let mut out = StateVector::zeros(spec.dim());
    for (occ, coef) in &small.terms {
        let mut full = vec![0u32; spec.n_modes()];
        for (mode, &cnt) in occ.iter().enumerate() {
            full[site * m + mode] = cnt;
        }
        let idx = spec.index_of(&full)?;
        out.amps[idx] += *coef;
    }
    Ok(out)
}

/// Which propagator realization to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagatorMethod {
    /// ⟨Φ|ℱ(t₂)e^{i𝒫(t₂−t₁)}ℱ†(t₁)|Ψ⟩ / ⟨Ω̃|e^{i𝒫(t₂−t₁)}|Ω̃⟩
    Foliation,
    /// ⟨Φ|e^{i𝒫(t₂−t₁)}|Ψ⟩ / ⟨Ω̃|e^{i𝒫(t₂−t₁)}|Ω̃⟩
    Global,
}

const DENOMINATOR_CUTOFF: f64 = 1e-12;

/// Propagator matrix element recovered from history overlaps. Both methods
/// divide by the vacuum-vacuum amplitude, which normal ordering makes 1 for
/// number-conserving theories; it is computed, not assumed.
pub fn propagator_ratio(
    spec: &FockSpec,
    theory: &ManyBodyTheory,
    psi: &SmallState,
    phi: &SmallState,
    t1: f64,
    t2: f64,
    method: PropagatorMethod,
) -> Result<C64> {
    let lat = spec.lattice();
    for t in [t1, t2] {
        if lat.site_of_periodic(t).is_none() {
            return Err(Error::InvalidArgument(format!("t = {t} is off-lattice")));
        }
    }
    let delta = t2 - t1;
    let (pt, _) = many_body(spec, ManyBodyKind::Pt, theory)?;
    let tau = C64::new(0.0, delta);

    // denominator ⟨Ω̃|e^{i𝒫Δt}|Ω̃⟩ with Ω̃ = Ω for number-conserving theories
    let vac = spec.vacuum();
    let evolved_vac = exp_apply(&pt, tau, &vac.amps)?;
    let denom: C64 = vac
        .amps
        .iter()
        .zip(evolved_vac.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    if denom.norm() < DENOMINATOR_CUTOFF {
        return Err(Error::DegenerateDenominator(denom.norm()));
    }

    let numerator = match method {
        PropagatorMethod::Global => {
            let big_psi = lift(spec, theory, psi, None)?.state;
            let big_phi = lift(spec, theory, phi, None)?.state;
            let evolved = exp_apply(&pt, tau, &big_psi.amps)?;
            big_phi
                .amps
                .iter()
                .zip(evolved.iter())
                .map(|(a, b)| a.conj() * b)
                .sum::<C64>()
        }
        PropagatorMethod::Foliation => {
            let big_psi = lift(spec, theory, psi, None)?.state;
            let big_phi = lift(spec, theory, phi, None)?.state;
            let folded_psi = apply_foliation_adjoint(spec, theory, t1, &big_psi)?;
            let folded_phi = apply_foliation_adjoint(spec, theory, t2, &big_phi)?;
            let evolved = exp_apply(&pt, tau, &folded_psi.amps)?;
            folded_phi
                .amps
                .iter()
                .zip(evolved.iter())
                .map(|(a, b)| a.conj() * b)
                .sum::<C64>()
        }
    };
    Ok(numerator / denom)
}

/// ⟨Φ|e^{i𝒫t}·𝒪·e^{−i𝒫t}|Ψ⟩ for 𝒪 supplied as a sparse many-body operator
/// built from physical-mode operators.
pub fn observable_element(
    spec: &FockSpec,
    theory: &ManyBodyTheory,
    observable: &SparseMatrix,
    t: f64,
    psi: &SmallState,
    phi: &SmallState,
) -> Result<C64> {
    if spec.lattice().steps_of(t).is_none() {
        return Err(Error::InvalidArgument(format!(
            "t = {t} is not an integer number of lattice steps"
        )));
    }
    let (pt, _) = many_body(spec, ManyBodyKind::Pt, theory)?;
    let big_psi = lift(spec, theory, psi, None)?.state;
    let big_phi = lift(spec, theory, phi, None)?.state;
    let down = exp_apply(&pt, C64::new(0.0, -t), &big_psi.amps)?;
    let mid = observable.matvec(&down);
    let up = exp_apply(&pt, C64::new(0.0, -t), &big_phi.amps)?;
    Ok(up.iter().zip(mid.iter()).map(|(a, b)| a.conj() * b).sum())
}

/// Sparse matrix of the physical creation operator Ã†_m(ω_k).
pub fn physical_creation(
    spec: &FockSpec,
    theory: &ManyBodyTheory,
    k: i64,
    mode: usize,
) -> Result<SparseMatrix> {
    let lat = spec.lattice();
    let kidx = lat
        .k_index(k)
        .ok_or_else(|| Error::InvalidArgument(format!("k = {k} outside the window")))?;
    let kets = normal_mode_kets(spec, theory)?;
    let y = &kets[kidx][mode];
    let mut triplets = Vec::new();
    for (l, coef) in y.indexed_iter() {
        if coef.norm() == 0.0 {
            continue;
        }
        let ad = crate::fock::raising(spec, l)?;
        let dense_triplets = {
            let d = ad.to_dense();
            let mut tp = Vec::new();
            for ((r, c), z) in d.indexed_iter() {
                if z.norm() > 0.0 {
                    tp.push((r, c, *z * *coef));
                }
            }
            tp
        };
        triplets.extend(dense_triplets);
    }
    Ok(SparseMatrix::from_triplets(spec.dim(), spec.dim(), triplets))
}

/// Von Neumann entropy (nats) of the reduced state across a bipartition of
/// time sites. Fermionic mode reordering signs are applied per basis state.
pub fn temporal_entropy(
    spec: &FockSpec,
    state: &StateVector,
    sites_a: &[usize],
) -> Result<f64> {
    let lat = spec.lattice();
    let n = lat.n_sites();
    let m = spec.indexing().n_space_modes();
    let mut in_a = vec![false; n];
    for &s in sites_a {
        if s >= n {
            return Err(Error::InvalidArgument(format!("site {s} out of range")));
        }
        in_a[s] = true;
    }
    let base = spec.n_max() as usize + 1;
    let site_dim = base.pow(m as u32);
    let na = in_a.iter().filter(|&&b| b).count();
    let dim_a = site_dim.pow(na as u32);
    let dim_b = site_dim.pow((n - na) as u32);
    if dim_a == 0 || dim_b == 0 || state.amps.len() != spec.dim() {
        return Err(Error::InvalidArgument("bad bipartition".into()));
    }

    // order of sites inside each factor follows ascending site index
    let mut a_rank = vec![0usize; n];
    let mut b_rank = vec![0usize; n];
    let mut ra = 0;
    let mut rb = 0;
    for j in 0..n {
        if in_a[j] {
            a_rank[j] = ra;
            ra += 1;
        } else {
            b_rank[j] = rb;
            rb += 1;
        }
    }

    let fermi = matches!(spec.stats(), Statistics::Fermi);
    let mut c = Array2::<C64>::zeros((dim_a, dim_b));
    for (idx, amp) in state.amps.indexed_iter() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let mut ia = 0usize;
        let mut ib = 0usize;
        for j in 0..n {
            let mut site_code = 0usize;
            for mm in 0..m {
                site_code += spec.occupation(idx, j * m + mm) as usize * base.pow(mm as u32);
            }
            if in_a[j] {
                ia += site_code * site_dim.pow(a_rank[j] as u32);
            } else {
                ib += site_code * site_dim.pow(b_rank[j] as u32);
            }
        }
        let mut sign = 1.0;
        if fermi {
            // parity of crossings when occupied modes are stably reordered
            // to (A-modes, then B-modes)
            let occupied: Vec<usize> = (0..spec.n_modes())
                .filter(|&l| spec.occupation(idx, l) == 1)
                .collect();
            let mut b_seen = 0usize;
            let mut crossings = 0usize;
            for &l in &occupied {
                if in_a[l / m] {
                    crossings += b_seen;
                } else {
                    b_seen += 1;
                }
            }
            if crossings % 2 == 1 {
                sign = -1.0;
            }
        }
        c[[ia, ib]] += *amp * C64::new(sign, 0.0);
    }

    let (_, sv, _) = c.svd(false, false)?;
    let total: f64 = sv.iter().map(|s| s * s).sum();
    let mut entropy = 0.0;
    for s in sv.iter() {
        let p = s * s / total;
        if p > 1e-15 {
            entropy -= p * p.ln();
        }
    }
    Ok(entropy)
}

/// Single-particle structure checks for a decoupled-oscillator theory.
#[derive(Debug, Clone)]
pub struct SpStructure {
    /// Componentwise gap between lift(|1⟩) and the directly constructed
    /// stationary history Σ_j e^{−iω₀(t_j−t₀)}|t_j⟩/√N.
    pub paw_componentwise: f64,
    /// max |⟨Φ_{k'}|Ψ_k⟩ − δ_{kk'}·⟨φ|ψ⟩| over tested frequency families.
    pub family_orthogonality: f64,
}

/// Certify the stationary-state form of sp physical states and the Kronecker
/// orthogonality of ω-families.
pub fn sp_structure_checks(
    spec: &FockSpec,
    omega0: f64,
    seed_coeffs: &[(C64, C64)],
) -> Result<SpStructure> {
    let lat = spec.lattice().clone();
    let n = lat.n_sites();
    let m = spec.indexing().n_space_modes();
    if m != 1 {
        return Err(Error::Unsupported(
            "sp structure checks are defined for M = 1".into(),
        ));
    }
    let theory = ManyBodyTheory::oscillator(&lat, omega0);

    // (a) componentwise PaW form of the lifted single particle
    let lifted = lift(spec, &theory, &SmallState::single(1, 0), None)?.state;
    let mut reference = StateVector::zeros(spec.dim());
    let t0 = theory.t0;
    let amp = 1.0 / (n as f64).sqrt();
    for j in 0..n {
        let idx = spec.single_particle_index(j);
        reference.amps[idx] = C64::from_polar(amp, -omega0 * (lat.site_time(j) - t0));
    }
    let diff = StateVector {
        amps: &lifted.amps - &reference.amps,
    };
    let paw_componentwise = max_abs_vec(&diff.amps);

    // (b) families at different ω_k are Kronecker-orthogonal with
    // Kronecker normalization ⟨Φ_{k'}|Ψ_k⟩ = δ_{kk'}·⟨φ|ψ⟩
    let kets = normal_mode_kets(spec, &theory)?;
    let k0 = lat.k_index(0).unwrap();
    let k1 = lat.k_index(1).unwrap_or(k0);
    let mut worst = 0.0f64;
    for ka in [k0, k1] {
        for kb in [k0, k1] {
            for &(ca, cb) in seed_coeffs {
                // Ψ_k = c·Ã†(ω_k)|Ω̃⟩, Φ_{k'} = c'·Ã†(ω_{k'})|Ω̃⟩
                let psi = apply_creation(spec, &kets[ka][0], &spec.vacuum()).scaled(ca);
                let phi = apply_creation(spec, &kets[kb][0], &spec.vacuum()).scaled(cb);
                let cross = phi.inner(&psi);
                let expect = if ka == kb {
                    cb.conj() * ca
                } else {
                    C64::new(0.0, 0.0)
                };
                worst = worst.max((cross - expect).norm());
            }
        }
    }
    Ok(SpStructure {
        paw_componentwise,
        family_orthogonality: worst,
    })
}
