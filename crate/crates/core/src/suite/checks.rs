//! The check registry: every verification the CLI can run, with its default
//! configuration (the shipped acceptance values) and its implementation.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{
    self, coherent_state, exp_apply_dense, exp_apply_krylov, gaussian_from_onebody, ladder,
    many_body, raising, sp_restriction, FockSpec, ManyBodyKind, ManyBodyTheory, SparseMatrix,
    Statistics,
};
use crate::lattice::{onebody_pt, shift_matrix, TimeLattice};
use crate::linalg::{self, dagger, expm_hermitian, eye, max_abs};
use crate::onebody::{
    build_j, build_pt_full, build_v, commutator_pt_time, conjugation_symmetry, gaussian_packet,
    grid_center, physical_mode_count, physical_modes, translate_physical, verify_diag, DiagForm,
    OneBodyHamiltonian,
};
use crate::physical::{
    action_annihilation_residual, apply_foliation_adjoint, foliation_onebody, foliation_unitary,
    lift, observable_element, physical_creation, propagator_ratio, site_product_state,
    sp_structure_checks, temporal_entropy, PropagatorMethod, SmallState,
};
use crate::quadratic::{
    build_k, commensurability, normal_form, propagate_w, QuadraticHamiltonian,
    SymplecticMap,
};
use crate::relfield::{
    action_expectation, build_jrel, mass_shell_modes, translation_invariance_residual,
    FieldConfig, SpacetimeLattice,
};
use crate::suite::config::{CheckConfig, EngineConfig, LatticeConfig, SpaceConfig, TheoryConfig};
use crate::suite::result::ResidualEntry;

/// What a check computed, before tolerance overrides are applied.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub residuals: Vec<ResidualEntry>,
    pub expected_nonzero: bool,
    pub dims: Vec<usize>,
}

impl Outcome {
    fn new(residuals: Vec<ResidualEntry>, dims: Vec<usize>) -> Self {
        Outcome {
            residuals,
            expected_nonzero: false,
            dims,
        }
    }

    fn flagged(mut self) -> Self {
        self.expected_nonzero = true;
        self
    }
}

pub struct CheckDef {
    pub name: &'static str,
    pub description: &'static str,
    pub default_config: fn() -> CheckConfig,
    pub run: fn(&CheckConfig) -> Result<Outcome>,
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn rng_for(cfg: &CheckConfig, name: &str) -> Result<ChaCha8Rng> {
    Ok(ChaCha8Rng::seed_from_u64(cfg.require_seed(name)?))
}

fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
}

fn random_hermitian(rng: &mut ChaCha8Rng, m: usize) -> Array2<C64> {
    let raw = Array2::from_shape_fn((m, m), |_| random_complex(rng));
    (&raw + &dagger(&raw)).mapv(|z| z * c(0.5))
}

fn random_symmetric(rng: &mut ChaCha8Rng, m: usize) -> Array2<C64> {
    let raw = Array2::from_shape_fn((m, m), |_| random_complex(rng));
    (&raw + &raw.t().to_owned()).mapv(|z| z * c(0.5))
}

fn osc_theory(lat: &TimeLattice, omega0: f64) -> ManyBodyTheory {
    ManyBodyTheory {
        h: Array2::from_elem((1, 1), c(omega0)),
        t0: lat.t_start(),
        constant: 0.0,
    }
}

// ───────────────────────── lattice ─────────────────────────

fn check_dft_unitarity(cfg: &CheckConfig) -> Result<Outcome> {
    let lat = cfg.build_lattice()?;
    let r = crate::lattice::dft_unitarity_residual(&lat);
    Ok(Outcome::new(
        vec![ResidualEntry::new("unitarity", r, 1e-12)],
        vec![lat.n_sites()],
    ))
}

fn check_pt_spectrum(cfg: &CheckConfig) -> Result<Outcome> {
    let lat = cfg.build_lattice()?;
    let ev = linalg::eigh_values(&onebody_pt(&lat))?;
    let mut freqs = lat.frequencies();
    freqs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let gap = ev
        .iter()
        .zip(freqs.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(Outcome::new(
        vec![ResidualEntry::new("spectrum_gap", gap, 1e-10)],
        vec![lat.n_sites()],
    ))
}

fn check_pt_shift(cfg: &CheckConfig) -> Result<Outcome> {
    let lat = cfg.build_lattice()?;
    let p = onebody_pt(&lat);
    let fwd = expm_hermitian(&p, C64::new(0.0, lat.dt()))?;
    let bwd = expm_hermitian(&p, C64::new(0.0, -lat.dt()))?;
    let r = max_abs(&(&fwd - &shift_matrix(&lat, 1)))
        .max(max_abs(&(&bwd - &shift_matrix(&lat, -1))));
    Ok(Outcome::new(
        vec![ResidualEntry::new("shift_gap", r, 1e-12)],
        vec![lat.n_sites()],
    ))
}

// ───────────────────────── quadratic ─────────────────────────

fn check_k_structure(cfg: &CheckConfig) -> Result<Outcome> {
    let mut rng = rng_for(cfg, "quadratic/k-structure")?;
    let m = 2;
    let om = random_hermitian(&mut rng, m);
    let ga = random_symmetric(&mut rng, m);
    let h = QuadraticHamiltonian::new(om.clone(), ga.clone())?;
    let k = build_k(&h, None)?;
    let herm = linalg::hermiticity_residual(k.matrix());
    // block pattern is exact by construction
    let mut block = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            block = block
                .max((k.matrix()[[i, j]] - om[[i, j]]).norm())
                .max((k.matrix()[[i, m + j]] - ga[[i, j]]).norm())
                .max((k.matrix()[[m + i, j]] - ga[[i, j]].conj()).norm())
                .max((k.matrix()[[m + i, m + j]] - om[[i, j]].conj()).norm());
        }
    }
    Ok(Outcome::new(
        vec![
            ResidualEntry::new("hermiticity", herm, 1e-15),
            ResidualEntry::new("block_pattern", block, 0.0),
        ],
        vec![2 * m],
    ))
}

fn check_w_propagation(cfg: &CheckConfig) -> Result<Outcome> {
    let (omega0, gamma) = match cfg.theory {
        TheoryConfig::Quadratic { omega0, gamma } => (omega0, gamma),
        _ => (1.0, 0.5),
    };
    let h = QuadraticHamiltonian::new(
        Array2::from_elem((1, 1), c(omega0)),
        Array2::from_elem((1, 1), c(gamma)),
    )?;
    let lat = cfg.build_lattice()?;
    let prop = propagate_w(&h, &lat, &SymplecticMap::identity(1))?;
    let fine = TimeLattice::new(lat.n_sites() * 2, lat.dt() / 2.0, Some(lat.t_start()))?;
    let prop2 = propagate_w(&h, &fine, &SymplecticMap::identity(1))?;
    let order = (prop.heisenberg_residual / prop2.heisenberg_residual).log2();
    Ok(Outcome::new(
        vec![
            ResidualEntry::new("symplectic", prop.max_symplectic_residual, 1e-9),
            ResidualEntry::info("heisenberg_fd", prop.heisenberg_residual),
            ResidualEntry::floor("convergence_order", order, 0.9),
        ],
        vec![lat.n_sites(), fine.n_sites()],
    ))
}

fn check_normal_form(_cfg: &CheckConfig) -> Result<Outcome> {
    let h = QuadraticHamiltonian::new(
        Array2::from_elem((1, 1), c(1.0)),
        Array2::from_elem((1, 1), c(0.5)),
    )?;
    let nf = normal_form(&h)?;
    let nu_gap = (nf.frequencies[0] - 0.75f64.sqrt()).abs();
    let symp = nf.w0.residual();
    let k = build_k(&h, None)?;
    let d = dagger(nf.w0.matrix()).dot(k.matrix()).dot(nf.w0.matrix());
    let mut diag_gap = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let expect = if i == j { c(nf.frequencies[0]) } else { c(0.0) };
            diag_gap = diag_gap.max((d[[i, j]] - expect).norm());
        }
    }
    // unstable theory must be detected with the right offenders
    let unstable = QuadraticHamiltonian::new(
        Array2::from_elem((1, 1), c(1.0)),
        Array2::from_elem((1, 1), c(1.5)),
    )?;
    let detected = match normal_form(&unstable) {
        Err(Error::UnstableTheory(vals)) => {
            let expect = 1.25f64.sqrt();
            vals.iter().any(|z| (z.im.abs() - expect).abs() < 1e-9)
        }
        _ => false,
    };
    Ok(Outcome::new(
        vec![
            ResidualEntry::new("nu_gap", nu_gap, 1e-12),
            ResidualEntry::new("symplectic", symp, 1e-9),
            ResidualEntry::new("diagonalization", diag_gap, 1e-10),
            ResidualEntry::floor("unstable_detected", detected as u8 as f64, 1.0),
        ],
        vec![2],
    ))
}

fn check_commensurability(cfg: &CheckConfig) -> Result<Outcome> {
    let lat = cfg.build_lattice()?;
    let pi = std::f64::consts::PI;
    let (yes, off_yes) =
        commensurability(&QuadraticHamiltonian::oscillator(pi / 2.0), &lat, 1e-9)?;
    let (no, off_no) = commensurability(&QuadraticHamiltonian::oscillator(1.0), &lat, 1e-9)?;
    let (null_ok, _) = commensurability(
        &QuadraticHamiltonian::new(Array2::zeros((1, 1)), Array2::zeros((1, 1)))?,
        &lat,
        1e-9,
    )?;
    let ok = yes && off_yes.is_empty() && !no && off_no.len() == 1 && null_ok;
    Ok(Outcome::new(
        vec![ResidualEntry::floor("classification", ok as u8 as f64, 1.0)],
        vec![lat.n_sites()],
    ))
}

// ───────────────────────── onebody ─────────────────────────

fn check_diag_exponentiated(_cfg: &CheckConfig) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut dims = Vec::new();
    for n in [2usize, 4, 8, 16] {
        for m in [1usize, 2] {
            let lat = TimeLattice::new(n, 1.0, None)?;
            let base = 2.0 * std::f64::consts::PI / lat.period();
            let mut h = Array2::<C64>::zeros((m, m));
            for d in 0..m {
                h[[d, d]] = c(base * (d as f64 + 1.0));
            }
            let chk = verify_diag(&lat, &h, lat.t_start(), DiagForm::Exponentiated)?;
            worst = worst.max(chk.operator_residual);
            dims.push(n * m);
        }
    }
    Ok(Outcome::new(
        vec![ResidualEntry::new("exponentiated", worst, 1e-10)],
        dims,
    ))
}

fn check_diag_generator(cfg: &CheckConfig) -> Result<Outcome> {
    let lat = cfg.build_lattice()?;
    let omega0 = cfg.theory.omega0()?;
    let h = Array2::from_elem((1, 1), c(omega0));
    let chk = verify_diag(&lat, &h, lat.t_start(), DiagForm::Generator)?;
    let spectra = chk.aliased_spectra_residual.unwrap_or(f64::INFINITY);
    let out = Outcome::new(
        vec![
            ResidualEntry::new("aliased_spectra", spectra, 1e-10),
            ResidualEntry::info("operator_gap", chk.operator_residual),
        ],
        vec![lat.n_sites()],
    );
    Ok(if chk.commensurate { out } else { out.flagged() })
}

fn check_physical_modes(cfg: &CheckConfig) -> Result<Outcome> {
    let lat = cfg.build_lattice()?;
    let omega0 = cfg.theory.omega0()?;
    let h = Array2::from_elem((1, 1), c(omega0));
    let basis = physical_modes(&lat, &h, 1e-9)?;
    let expected = physical_mode_count(&lat, &h, 1e-9)?;
    let count_gap = (basis.ncols() as f64 - expected as f64).abs();
    let j = build_j(&lat, &h)?.matrix;
    let kernel = if basis.ncols() > 0 {
        max_abs(&j.dot(&basis))
    } else {
        0.0
    };
    let gram = if basis.ncols() > 0 {
        max_abs(&(dagger(&basis).dot(&basis) - eye(basis.ncols())))
    } else {
        0.0
    };
    // stationary-state amplitudes for the single commensurate oscillator
    let mut amp_gap = 0.0;
    if basis.ncols() == 1 {
        let n = lat.n_sites();
        let reference: Array1<C64> = (0..n)
            .map(|jj| {
                C64::from_polar(
                    1.0 / (n as f64).sqrt(),
                    -omega0 * (lat.site_time(jj) - lat.t_start()),
                )
            })
            .collect();
        let overlap = reference
            .mapv(|z| z.conj())
            .dot(&basis.column(0).to_owned());
        amp_gap = (overlap.norm() - 1.0).abs();
    }
    // an off-grid frequency has an empty kernel
    let empty = physical_modes(&lat, &Array2::from_elem((1, 1), c(1.0)), 1e-9)?;
    let empty_ok = if (1.0f64 / (2.0 * std::f64::consts::PI / lat.period())).fract() > 1e-6 {
        empty.ncols() == 0
    } else {
        true
    };
    Ok(Outcome::new(
        vec![
            ResidualEntry::new("count_gap", count_gap, 0.0),
            ResidualEntry::new("kernel", kernel, 1e-10),
            ResidualEntry::new("orthonormality", gram, 1e-10),
            ResidualEntry::new("amplitude_form", amp_gap, 1e-12),
            ResidualEntry::floor("empty_kernel_offgrid", empty_ok as u8 as f64, 1.0),
        ],
        vec![lat.n_sites()],
    ))
}

fn check_translate_physical(cfg: &CheckConfig) -> Result<Outcome> {
    let lat = cfg.build_lattice()?;
    let (omega0, gamma) = match cfg.theory {
        TheoryConfig::Quadratic { omega0, gamma } => (omega0, gamma),
        _ => {
            let nu = std::f64::consts::PI / 2.0;
            ((nu * nu + 0.09).sqrt(), 0.3)
        }
    };
    let h = QuadraticHamiltonian::new(
        Array2::from_elem((1, 1), c(omega0)),
        Array2::from_elem((1, 1), c(gamma)),
    )?;
    let (ok, off) = commensurability(&h, &lat, 1e-9)?;
    let step = translate_physical(&lat, &h, lat.dt())?;
    let period = translate_physical(&lat, &h, lat.period())?;
    let out = Outcome::new(
        vec![
            ResidualEntry::new("one_step", step, 1e-9),
            ResidualEntry::new("full_period", period, 1e-9),
        ],
        vec![2 * lat.n_sites()],
    );
    Ok(if ok {
        out
    } else {
        // incommensurate theories carry the flag; offenders are reported
        let mut flagged = out.flagged();
        flagged
            .residuals
            .push(ResidualEntry::info("offending_frequency", off[0]));
        flagged
    })
}

fn check_commutator_time(cfg: &CheckConfig) -> Result<Outcome> {
    let n0 = cfg.lattice.n_sites;
    let mut values = Vec::new();
    for factor in [1usize, 2, 4] {
        let n = n0 * factor;
        let lat = TimeLattice::new(n, cfg.lattice.dt, cfg.lattice.t_start)?;
        let packet = gaussian_packet(&lat, 1, grid_center(&lat), lat.period() / 8.0, 0.0);
        values.push(commutator_pt_time(&lat, 1, &packet, &packet)?.norm());
    }
    Ok(Outcome::new(
        vec![
            ResidualEntry::new("commutator", values[0], 1e-3),
            ResidualEntry::floor("decay_2n", values[0] - values[1], 1e-12),
            ResidualEntry::floor("decay_4n", values[1] - values[2], 1e-12),
        ],
        vec![n0, n0 * 2, n0 * 4],
    ))
}

fn check_conjugation_constant(cfg: &CheckConfig) -> Result<Outcome> {
    let lat = cfg.build_lattice()?;
    let mut rng = rng_for(cfg, "onebody/conjugation-constant")?;
    let g = random_hermitian(&mut rng, 2);
    let samples = vec![g; lat.n_sites()];
    let chk = conjugation_symmetry(&lat, &samples)?;
    Ok(Outcome::new(
        vec![ResidualEntry::new(
            "commutator",
            chk.exact_commutator.unwrap_or(f64::INFINITY),
            1e-10,
        )],
        vec![2 * lat.n_sites()],
    ))
}

fn commensurate_slope(lat: &TimeLattice, m: usize, rng: &mut ChaCha8Rng) -> Result<Array2<C64>> {
    let herm = random_hermitian(rng, m);
    let (_, q) = linalg::hermitian_eig(&herm)?;
    let base = 2.0 * std::f64::consts::PI / lat.period();
    let mut d = Array2::<C64>::zeros((m, m));
    for i in 0..m {
        let k: i64 = rng.random_range(-2..3);
        d[[i, i]] = c(base * k as f64);
    }
    Ok(q.dot(&d).dot(&dagger(&q)))
}

fn check_conjugation_timedep(cfg: &CheckConfig) -> Result<Outcome> {
    let period = cfg.lattice.n_sites as f64 * cfg.lattice.dt;
    let seed = cfg.require_seed("onebody/conjugation-timedep")?;
    let mut residuals = Vec::new();
    for n in [cfg.lattice.n_sites, cfg.lattice.n_sites * 2] {
        let lat = TimeLattice::new(n, period / n as f64, cfg.lattice.t_start)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let slope = commensurate_slope(&lat, 2, &mut rng)?;
        let samples: Vec<Array2<C64>> = (0..n)
            .map(|j| slope.mapv(|z| z * c(lat.site_time(j))))
            .collect();
        residuals.push(conjugation_symmetry(&lat, &samples)?.identity_residual);
    }
    let order = (residuals[0] / residuals[1]).log2();
    Ok(Outcome::new(
        vec![
            ResidualEntry::info("residual_coarse", residuals[0]),
            ResidualEntry::info("residual_fine", residuals[1]),
            ResidualEntry::floor("convergence_order", order, 0.9),
        ],
        vec![cfg.lattice.n_sites, cfg.lattice.n_sites * 2],
    ))
}

// ───────────────────────── fock ─────────────────────────

fn fermi_spec_for(cfg: &CheckConfig, n_sites: usize) -> Result<FockSpec> {
    let lat = TimeLattice::new(n_sites, cfg.lattice.dt, cfg.lattice.t_start)?;
    FockSpec::with_max_dim(Statistics::Fermi, lat, 1, cfg.dim_bound())
}

fn bose_spec_for(cfg: &CheckConfig, n_sites: usize, n_max: u32) -> Result<FockSpec> {
    let lat = TimeLattice::new(n_sites, cfg.lattice.dt, cfg.lattice.t_start)?;
    FockSpec::with_max_dim(Statistics::Bose { n_max }, lat, 1, cfg.dim_bound())
}

fn check_fermi_car(cfg: &CheckConfig) -> Result<Outcome> {
    let spec = fermi_spec_for(cfg, 3)?;
    let mut sq = 0.0f64;
    for l in 0..3 {
        let bd = raising(&spec, l)?.to_dense();
        sq = sq.max(max_abs(&bd.dot(&bd)));
    }
    let b0 = ladder(&spec, 0)?.to_dense();
    let b1d = raising(&spec, 1)?.to_dense();
    let cross = max_abs(&(b0.dot(&b1d) + b1d.dot(&b0)));
    let b0d = raising(&spec, 0)?.to_dense();
    let same = max_abs(&(b0.dot(&b0d) + b0d.dot(&b0) - eye(spec.dim())));
    Ok(Outcome::new(
        vec![
            ResidualEntry::new("creation_squared", sq, 0.0),
            ResidualEntry::new("cross_anticommutator", cross, 0.0),
            ResidualEntry::new("car_identity", same, 1e-15),
        ],
        vec![spec.dim()],
    ))
}

fn check_coherent_overlap(cfg: &CheckConfig) -> Result<Outcome> {
    let n_max = match cfg.engine {
        EngineConfig::FockBose { n_max } => n_max,
        _ => 8,
    };
    let spec = bose_spec_for(cfg, cfg.lattice.n_sites, n_max)?;
    let mut rng = rng_for(cfg, "fock/coherent-overlap")?;
    let l = spec.n_modes();
    let mut worst = 0.0f64;
    let mut tail = 0.0f64;
    for _ in 0..20 {
        let draw = |rng: &mut ChaCha8Rng| -> Array1<C64> {
            let v: Array1<C64> = (0..l).map(|_| random_complex(rng)).collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            // total amplitude ≤ 0.5
            v.mapv(|z| z * c(0.5 * rng.random::<f64>() / norm))
        };
        let alpha = draw(&mut rng);
        let beta = draw(&mut rng);
        let (sa, ia) = coherent_state(&spec, &alpha)?;
        let (sb, _) = coherent_state(&spec, &beta)?;
        let got = sb.inner(&sa);
        let expect = {
            let asq: f64 = alpha.iter().map(|z| z.norm_sqr()).sum();
            let bsq: f64 = beta.iter().map(|z| z.norm_sqr()).sum();
            let mixed: C64 = beta
                .iter()
                .zip(alpha.iter())
                .map(|(b, a)| b.conj() * a)
                .sum();
            (c(-0.5 * asq - 0.5 * bsq) + mixed).exp()
        };
        worst = worst.max((got - expect).norm());
        tail = tail.max(ia.tail_weight);
    }
    Ok(Outcome::new(
        vec![
            ResidualEntry::new("overlap_law", worst, 1e-8),
            ResidualEntry::info("tail_weight", tail),
        ],
        vec![spec.dim()],
    ))
}

fn check_gaussian_conjugation(cfg: &CheckConfig) -> Result<Outcome> {
    // Fermi: exact for a seeded dense generator
    let fermi = fermi_spec_for(cfg, 3)?;
    let mut rng = rng_for(cfg, "fock/gaussian-conjugation")?;
    let g = random_hermitian(&mut rng, 3);
    let u = fock::gaussian_unitary(&fermi, &g)?.to_dense();
    let f = expm_hermitian(&g, C64::i())?;
    let mut fermi_res = linalg::unitarity_residual(&u);
    for beta in 0..3 {
        let adag = raising(&fermi, beta)?.to_dense();
        let lhs = u.dot(&adag).dot(&dagger(&u));
        let mut rhs = Array2::<C64>::zeros((fermi.dim(), fermi.dim()));
        for gamma in 0..3 {
            let gd = raising(&fermi, gamma)?.to_dense();
            rhs = rhs + gd.mapv(|z| z * f[[gamma, beta]]);
        }
        fermi_res = fermi_res.max(max_abs(&(&lhs - &rhs)));
    }

    // Bose: small generator, residual on the ≤ 2-excitation sector
    let bose = bose_spec_for(cfg, 2, 4)?;
    let g2 = random_hermitian(&mut rng, 2).mapv(|z| z * c(0.5));
    let u2 = fock::gaussian_unitary(&bose, &g2)?.to_dense();
    let f2 = expm_hermitian(&g2, C64::i())?;
    let mut bose_res = 0.0f64;
    for beta in 0..2 {
        let adag = raising(&bose, beta)?.to_dense();
        let lhs = u2.dot(&adag).dot(&dagger(&u2));
        let mut rhs = Array2::<C64>::zeros((bose.dim(), bose.dim()));
        for gamma in 0..2 {
            let gd = raising(&bose, gamma)?.to_dense();
            rhs = rhs + gd.mapv(|z| z * f2[[gamma, beta]]);
        }
        let diff = &lhs - &rhs;
        for idx in 0..bose.dim() {
            if bose.total_occupation(idx) <= 2 {
                for r in 0..bose.dim() {
                    bose_res = bose_res.max(diff[[r, idx]].norm());
                }
            }
        }
    }
    Ok(Outcome::new(
        vec![
            ResidualEntry::new("fermi_exact", fermi_res, 1e-10),
            ResidualEntry::new("bose_low_sector", bose_res, 1e-6),
        ],
        vec![fermi.dim(), bose.dim()],
    ))
}

/// Many-body diagonalization identity V†·e^{−i𝒫ε}·V = e^{−i𝒥ε}, Fermi on
/// the full space and Bose on the truncation-faithful sector.
fn check_manybody_diag(cfg: &CheckConfig) -> Result<Outcome> {
    let omega0 = cfg.theory.omega0()?;

    let run_engine = |spec: &FockSpec, restrict: bool| -> Result<f64> {
        let lat = spec.lattice();
        let eps = lat.dt();
        let theory = osc_theory(lat, omega0);
        let (v_op, _) = many_body(spec, ManyBodyKind::V, &theory)?;
        let shift = ndarray::linalg::kron(&shift_matrix(lat, -1), &eye(1));
        let exp_pt = gaussian_from_onebody(spec, &shift)?;
        let ej_one = expm_hermitian(&build_j(lat, &theory.h)?.matrix, C64::new(0.0, -eps))?;
        let exp_j = gaussian_from_onebody(spec, &ej_one)?;

        let v = v_op.to_dense();
        let lhs = v.dot(&exp_pt.to_dense()).dot(&dagger(&v));
        let rhs = exp_j.to_dense();
        let diff = &lhs - &rhs;
        let mut worst = 0.0f64;
        for idx in 0..spec.dim() {
            if restrict && spec.total_occupation(idx) > spec.n_max() {
                continue;
            }
            for r in 0..spec.dim() {
                worst = worst.max(diff[[r, idx]].norm());
            }
        }
        Ok(worst)
    };

    let fermi = fermi_spec_for(cfg, cfg.lattice.n_sites)?;
    let fermi_res = run_engine(&fermi, false)?;
    let bose = bose_spec_for(cfg, cfg.lattice.n_sites, 3)?;
    let bose_res = run_engine(&bose, true)?;
    Ok(Outcome::new(
        vec![
            ResidualEntry::new("fermi_full", fermi_res, 1e-10),
            ResidualEntry::new("bose_sector", bose_res, 1e-10),
        ],
        vec![fermi.dim(), bose.dim()],
    ))
}

fn check_sp_consistency(cfg: &CheckConfig) -> Result<Outcome> {
    let omega0 = cfg.theory.omega0()?;
    let mut worst = 0.0f64;
    let mut dims = Vec::new();
    let fermi = fermi_spec_for(cfg, cfg.lattice.n_sites)?;
    let bose = bose_spec_for(cfg, cfg.lattice.n_sites, 3)?;
    for spec in [&fermi, &bose] {
        let lat = spec.lattice();
        let theory = osc_theory(lat, omega0);
        let n = lat.n_sites();
        for kind in [
            ManyBodyKind::Pt,
            ManyBodyKind::J,
            ManyBodyKind::V,
            ManyBodyKind::T,
            ManyBodyKind::N,
        ] {
            let (op, _) = many_body(spec, kind, &theory)?;
            let sp = sp_restriction(spec, &op);
            let expect = match kind {
                ManyBodyKind::Pt => build_pt_full(lat, 1)?.matrix,
                ManyBodyKind::J => build_j(lat, &theory.h)?.matrix,
                ManyBodyKind::V => {
                    build_v(lat, &OneBodyHamiltonian::Constant(theory.h.clone()), theory.t0)?
                        .matrix
                }
                ManyBodyKind::T => {
                    let mut tau = Array2::<C64>::zeros((n, n));
                    for j in 0..n {
                        tau[[j, j]] = c(lat.site_time(j));
                    }
                    tau
                }
                ManyBodyKind::N => eye(n),
            };
            worst = worst.max(max_abs(&(&sp - &expect)));
        }
        dims.push(spec.dim());
    }
    Ok(Outcome::new(
        vec![ResidualEntry::new("sp_restriction", worst, 1e-10)],
        dims,
    ))
}

fn check_exp_routes(cfg: &CheckConfig) -> Result<Outcome> {
    let lat = TimeLattice::new(10, 0.5, None)?;
    let spec = FockSpec::with_max_dim(Statistics::Fermi, lat, 1, cfg.dim_bound())?;
    let theory = ManyBodyTheory::null(spec.lattice(), 1);
    let (pt, _) = many_body(&spec, ManyBodyKind::Pt, &theory)?;
    let mut rng = rng_for(cfg, "fock/exp-routes")?;
    let v: Array1<C64> = (0..spec.dim()).map(|_| random_complex(&mut rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let v = v.mapv(|z| z / c(norm));
    let tau = C64::new(0.0, 0.8);
    let dense = exp_apply_dense(&pt, tau, &v)?;
    let krylov = exp_apply_krylov(&pt, tau, &v)?;
    let diff: f64 = dense
        .iter()
        .zip(krylov.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(Outcome::new(
        vec![ResidualEntry::new("route_agreement", diff, 1e-9)],
        vec![spec.dim()],
    ))
}

// ───────────────────────── physical ─────────────────────────

fn random_fermi_small_state(rng: &mut ChaCha8Rng) -> SmallState {
    let c0 = random_complex(rng);
    let c1 = random_complex(rng);
    let norm = (c0.norm_sqr() + c1.norm_sqr()).sqrt();
    SmallState {
        terms: vec![
            (vec![0], c0 / c(norm)),
            (vec![1], c1 / c(norm)),
        ],
    }
}

fn check_lift_annihilation(cfg: &CheckConfig) -> Result<Outcome> {
    let omega0 = cfg.theory.omega0()?;
    let mut rng = rng_for(cfg, "physical/lift-annihilation")?;

    let fermi = fermi_spec_for(cfg, cfg.lattice.n_sites)?;
    let ft = osc_theory(fermi.lattice(), omega0);
    let mut fermi_res = 0.0f64;
    for _ in 0..20 {
        let psi = random_fermi_small_state(&mut rng);
        let lifted = lift(&fermi, &ft, &psi, None)?.state;
        fermi_res = fermi_res.max(action_annihilation_residual(&fermi, &ft, &lifted)?);
    }

    let n_max = 6u32;
    let bose = bose_spec_for(cfg, cfg.lattice.n_sites, n_max)?;
    let bt = osc_theory(bose.lattice(), omega0);
    let mut bose_res = 0.0f64;
    for _ in 0..20 {
        let alpha = C64::from_polar(0.5 * rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>());
        let psi = SmallState::coherent_single_mode(alpha, n_max - 1);
        let lifted = lift(&bose, &bt, &psi, None)?.state;
        bose_res = bose_res.max(action_annihilation_residual(&bose, &bt, &lifted)?);
    }
    Ok(Outcome::new(
        vec![
            ResidualEntry::new("fermi", fermi_res, 1e-10),
            ResidualEntry::new("bose", bose_res, 1e-6),
        ],
        vec![fermi.dim(), bose.dim()],
    ))
}

fn check_lift_overlap(cfg: &CheckConfig) -> Result<Outcome> {
    let omega0 = cfg.theory.omega0()?;
    let mut rng = rng_for(cfg, "physical/lift-overlap")?;

    let fermi = fermi_spec_for(cfg, cfg.lattice.n_sites)?;
    let ft = osc_theory(fermi.lattice(), omega0);
    let mut fermi_res = 0.0f64;
    for _ in 0..20 {
        let psi = random_fermi_small_state(&mut rng);
        let phi = random_fermi_small_state(&mut rng);
        let lp = lift(&fermi, &ft, &psi, None)?.state;
        let lf = lift(&fermi, &ft, &phi, None)?.state;
        fermi_res = fermi_res.max((lf.inner(&lp) - phi.inner(&psi)).norm());
    }

    // Bose: seeded coherent pairs, lifted overlap against the analytic law
    let n_max = 6u32;
    let bose = bose_spec_for(cfg, cfg.lattice.n_sites, n_max)?;
    let bt = osc_theory(bose.lattice(), omega0);
    let mut bose_res = 0.0f64;
    for _ in 0..10 {
        let alpha = C64::from_polar(0.5 * rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>());
        let beta = C64::from_polar(0.5 * rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>());
        let psi = SmallState::coherent_single_mode(alpha, n_max - 1);
        let phi = SmallState::coherent_single_mode(beta, n_max - 1);
        let lp = lift(&bose, &bt, &psi, None)?.state;
        let lf = lift(&bose, &bt, &phi, None)?.state;
        let analytic = (c(-0.5 * alpha.norm_sqr() - 0.5 * beta.norm_sqr())
            + beta.conj() * alpha)
            .exp();
        bose_res = bose_res.max((lf.inner(&lp) - analytic).norm());
    }
    Ok(Outcome::new(
        vec![
            ResidualEntry::new("fermi", fermi_res, 1e-10),
            ResidualEntry::new("bose_coherent", bose_res, 1e-6),
        ],
        vec![fermi.dim(), bose.dim()],
    ))
}

fn check_foliation(cfg: &CheckConfig) -> Result<Outcome> {
    let omega0 = cfg.theory.omega0()?;
    let fermi = fermi_spec_for(cfg, cfg.lattice.n_sites)?;
    let theory = osc_theory(fermi.lattice(), omega0);
    let lat = fermi.lattice().clone();

    let mut unit = 0.0f64;
    let mut vac = 0.0f64;
    let mut fid_deficit: f64 = 0.0;
    for site in 0..lat.n_sites() {
        let t = lat.site_time(site);
        let f1 = foliation_onebody(&fermi, &theory, t)?;
        unit = unit.max(linalg::unitarity_residual(&f1));
        let f_op = foliation_unitary(&fermi, &theory, t)?.to_dense();
        unit = unit.max(linalg::unitarity_residual(&f_op));

        let vacuum = fermi.vacuum();
        let out = apply_foliation_adjoint(&fermi, &theory, t, &vacuum)?;
        let dn = (0..fermi.dim())
            .map(|i| (out.amps[i] - vacuum.amps[i]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        vac = vac.max(dn);

        let psi = SmallState::single(1, 0);
        let lifted = lift(&fermi, &theory, &psi, None)?.state;
        let folded = apply_foliation_adjoint(&fermi, &theory, t, &lifted)?;
        let u = expm_hermitian(&theory.h, C64::new(0.0, -(t - theory.t0)))?;
        let evolved = psi.rotated(&u, 1);
        let product = site_product_state(&fermi, t, &evolved)?;
        fid_deficit = fid_deficit.max(1.0 - product.inner(&folded).norm());
    }

    // Bose variant at the start site
    let bose = bose_spec_for(cfg, cfg.lattice.n_sites, 3)?;
    let btheory = osc_theory(bose.lattice(), omega0);
    let t = lat.t_start();
    let psi = SmallState::single(1, 0);
    let lifted = lift(&bose, &btheory, &psi, None)?.state;
    let folded = apply_foliation_adjoint(&bose, &btheory, t, &lifted)?;
    let u = expm_hermitian(&btheory.h, C64::new(0.0, 0.0))?;
    let evolved = psi.rotated(&u, 1);
    let product = site_product_state(&bose, t, &evolved)?;
    let bose_deficit = 1.0 - product.inner(&folded).norm();

    Ok(Outcome::new(
        vec![
            ResidualEntry::new("unitarity", unit, 1e-10),
            ResidualEntry::new("vacuum_invariance", vac, 1e-10),
            ResidualEntry::new("fermi_fidelity_deficit", fid_deficit, 1e-10),
            ResidualEntry::new("bose_fidelity_deficit", bose_deficit, 1e-8),
        ],
        vec![fermi.dim(), bose.dim()],
    ))
}

fn check_propagator(cfg: &CheckConfig) -> Result<Outcome> {
    let omega0 = cfg.theory.omega0()?;
    let fermi = fermi_spec_for(cfg, cfg.lattice.n_sites)?;
    let theory = osc_theory(fermi.lattice(), omega0);
    let psi = SmallState::single(1, 0);
    let t1 = fermi.lattice().t_start();
    let t2 = t1 + 1.0;
    let expect = C64::from_polar(1.0, omega0 * (t2 - t1));

    let mut fermi_res = 0.0f64;
    for method in [PropagatorMethod::Global, PropagatorMethod::Foliation] {
        let v = propagator_ratio(&fermi, &theory, &psi, &psi, t1, t2, method)?;
        fermi_res = fermi_res.max((v - expect).norm());
    }

    // Bose at n_max = 8 (dim 6561), Krylov exponentials
    let n_max = match cfg.engine {
        EngineConfig::FockBose { n_max } => n_max,
        _ => 8,
    };
    let bose = bose_spec_for(cfg, cfg.lattice.n_sites, n_max)?;
    let btheory = osc_theory(bose.lattice(), omega0);
    let mut bose_res = 0.0f64;
    for method in [PropagatorMethod::Global, PropagatorMethod::Foliation] {
        let v = propagator_ratio(&bose, &btheory, &psi, &psi, t1, t2, method)?;
        bose_res = bose_res.max((v - expect).norm());
    }

    // cross-method agreement over seeded commensurate theories
    let mut rng = rng_for(cfg, "physical/propagator")?;
    let base = 2.0 * std::f64::consts::PI / fermi.lattice().period();
    let mut cross = 0.0f64;
    for _ in 0..10 {
        let k: i64 = loop {
            let k = rng.random_range(-2..3);
            if k != 0 {
                break k;
            }
        };
        let th = osc_theory(fermi.lattice(), base * k as f64);
        let psi_r = random_fermi_small_state(&mut rng);
        let phi_r = random_fermi_small_state(&mut rng);
        let a = propagator_ratio(&fermi, &th, &psi_r, &phi_r, t1, t2, PropagatorMethod::Global)?;
        let b =
            propagator_ratio(&fermi, &th, &psi_r, &phi_r, t1, t2, PropagatorMethod::Foliation)?;
        cross = cross.max((a - b).norm());
    }

    Ok(Outcome::new(
        vec![
            ResidualEntry::new("fermi_value", fermi_res, 1e-8),
            ResidualEntry::new("bose_value", bose_res, 1e-6),
            ResidualEntry::new("method_agreement", cross, 1e-8),
        ],
        vec![fermi.dim(), bose.dim()],
    ))
}

fn check_observable_heisenberg(cfg: &CheckConfig) -> Result<Outcome> {
    let omega0 = cfg.theory.omega0()?;
    let t = 1.0;

    // Fermi quadrature element: ⟨1|Q_H(t)|0⟩ = e^{iω₀t}/√2
    let fermi = fermi_spec_for(cfg, cfg.lattice.n_sites)?;
    let theory = osc_theory(fermi.lattice(), omega0);
    let adag = physical_creation(&fermi, &theory, 0, 0)?;
    let a_op = adag.adjoint();
    let q_dense = (adag.to_dense() + a_op.to_dense()).mapv(|z| z / c(2.0f64.sqrt()));
    let q_op = SparseMatrix::from_dense(&q_dense, 1e-15);
    let got = observable_element(
        &fermi,
        &theory,
        &q_op,
        t,
        &SmallState::vacuum(1),
        &SmallState::single(1, 0),
    )?;
    let fermi_res = (got - C64::from_polar(1.0 / 2.0f64.sqrt(), omega0 * t)).norm();

    // Bose coherent quadrature expectation: √2·Re(α·e^{−iω₀t})
    let n_max = 8u32;
    let bose = bose_spec_for(cfg, cfg.lattice.n_sites, n_max)?;
    let btheory = osc_theory(bose.lattice(), omega0);
    let alpha = c(0.3);
    let psi = SmallState::coherent_single_mode(alpha, n_max - 1);
    let adag_b = physical_creation(&bose, &btheory, 0, 0)?;
    let a_b = adag_b.adjoint();
    let q_b = SparseMatrix::from_dense(
        &(adag_b.to_dense() + a_b.to_dense()).mapv(|z| z / c(2.0f64.sqrt())),
        1e-15,
    );
    let got_b = observable_element(&bose, &btheory, &q_b, t, &psi, &psi)?;
    let expect_b = 2.0f64.sqrt() * (alpha * C64::from_polar(1.0, -omega0 * t)).re;
    let bose_res = (got_b - c(expect_b)).norm();

    Ok(Outcome::new(
        vec![
            ResidualEntry::new("fermi_quadrature", fermi_res, 1e-10),
            ResidualEntry::new("bose_coherent_quadrature", bose_res, 1e-5),
        ],
        vec![fermi.dim(), bose.dim()],
    ))
}

fn check_temporal_entropy(cfg: &CheckConfig) -> Result<Outcome> {
    let omega0 = cfg.theory.omega0()?;
    // coherent lifts are separable across every cut
    let n_max = 8u32;
    let bose = bose_spec_for(cfg, cfg.lattice.n_sites, n_max)?;
    let theory = osc_theory(bose.lattice(), omega0);
    let psi = SmallState::coherent_single_mode(c(0.5), n_max - 1);
    let lifted = lift(&bose, &theory, &psi, None)?.state.normalized();
    let n = bose.lattice().n_sites();
    let mut coherent_entropy = 0.0f64;
    for mask in 1..(1u32 << n) - 1 {
        let cut: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        coherent_entropy = coherent_entropy.max(temporal_entropy(&bose, &lifted, &cut)?);
    }

    // two-particle Schmidt value at N = 2: S = (3/2)·ln 2
    let spec2 = bose_spec_for(cfg, 2, 3)?;
    let th2 = ManyBodyTheory::null(spec2.lattice(), 1);
    let two = SmallState {
        terms: vec![(vec![2], c(1.0))],
    };
    let lifted2 = lift(&spec2, &th2, &two, None)?.state.normalized();
    let s2 = temporal_entropy(&spec2, &lifted2, &[0])?;
    let schmidt_gap = (s2 - 1.5 * 2.0f64.ln()).abs();

    // sp physical state: entropy equals the binary distribution of the cut
    let fermi = fermi_spec_for(cfg, cfg.lattice.n_sites)?;
    let ft = osc_theory(fermi.lattice(), omega0);
    let sp = lift(&fermi, &ft, &SmallState::single(1, 0), None)?.state;
    let s_sp = temporal_entropy(&fermi, &sp, &[0])?;
    let w = 1.0 / n as f64;
    let expect_sp = -(w * w.ln() + (1.0 - w) * (1.0 - w).ln());
    let sp_gap = (s_sp - expect_sp).abs();

    Ok(Outcome::new(
        vec![
            ResidualEntry::new("coherent_every_cut", coherent_entropy, 1e-8),
            ResidualEntry::new("two_particle_schmidt", schmidt_gap, 1e-9),
            ResidualEntry::new("sp_distribution", sp_gap, 1e-10),
        ],
        vec![bose.dim(), spec2.dim(), fermi.dim()],
    ))
}

fn check_sp_structure(cfg: &CheckConfig) -> Result<Outcome> {
    let omega0 = cfg.theory.omega0()?;
    let fermi = fermi_spec_for(cfg, cfg.lattice.n_sites)?;
    let mut rng = rng_for(cfg, "physical/sp-structure")?;
    let seeds: Vec<(C64, C64)> = (0..4)
        .map(|_| (random_complex(&mut rng), random_complex(&mut rng)))
        .collect();
    let chk = sp_structure_checks(&fermi, omega0, &seeds)?;

    // structural identity: j is exactly kron(p, 1) − kron(1, h)
    let lat = fermi.lattice();
    let h = Array2::from_elem((1, 1), c(omega0));
    let j = build_j(lat, &h)?.matrix;
    let reference = ndarray::linalg::kron(&onebody_pt(lat), &eye(1))
        - ndarray::linalg::kron(&eye(lat.n_sites()), &h);
    let bitwise = if j == reference { 0.0 } else { 1.0 };

    Ok(Outcome::new(
        vec![
            ResidualEntry::new("paw_componentwise", chk.paw_componentwise, 1e-12),
            ResidualEntry::new("kron_structure", bitwise, 0.0),
            ResidualEntry::new("family_orthogonality", chk.family_orthogonality, 1e-12),
        ],
        vec![fermi.dim()],
    ))
}

// ───────────────────────── relfield ─────────────────────────

fn spacetime_for(cfg: &CheckConfig) -> Result<SpacetimeLattice> {
    let space = cfg.space.clone().unwrap_or(SpaceConfig { n_x: 8, dx: 1.0 });
    SpacetimeLattice::new(cfg.lattice.n_sites, cfg.lattice.dt, space.n_x, space.dx)
}

fn check_action_identity(cfg: &CheckConfig) -> Result<Outcome> {
    let slat = spacetime_for(cfg)?;
    let m0 = cfg.theory.mass().unwrap_or(0.5);
    let mut rng = rng_for(cfg, "relfield/action-identity")?;

    let mut parts_gap = 0.0f64;
    let mut imag = 0.0f64;
    for _ in 0..10 {
        let phi = FieldConfig {
            amplitudes: (0..slat.n_sites()).map(|_| random_complex(&mut rng)).collect(),
        };
        let v = action_expectation(&slat, m0, &phi)?;
        parts_gap = parts_gap.max((v.direct - v.by_parts).norm());
    }
    // real configs give real action
    let real_phi = FieldConfig {
        amplitudes: (0..slat.n_sites())
            .map(|_| c(rng.random::<f64>() - 0.5))
            .collect(),
    };
    let v = action_expectation(&slat, m0, &real_phi)?;
    imag = imag.max(v.direct.im.abs());

    // on-shell plane wave of the massless theory
    let on_shell = FieldConfig::plane_wave(&slat, 1, 1, c(0.7))?;
    let v0 = action_expectation(&slat, 0.0, &on_shell)?;

    // spectral eigenvalue at (k, q) = (1, 0) against the dispersion formula
    let j = build_jrel(&slat, m0)?;
    let pw = FieldConfig::plane_wave(&slat, 1, 0, c(1.0))?;
    let jpw = j.dot(&pw.amplitudes);
    let w1 = slat.frequencies()[slat.k_window().iter().position(|&k| k == 1).unwrap()];
    let expect = w1 * w1 - m0 * m0;
    let eig_gap = jpw
        .iter()
        .zip(pw.amplitudes.iter())
        .map(|(a, b)| (a - b * c(expect)).norm())
        .fold(0.0, f64::max);

    Ok(Outcome::new(
        vec![
            ResidualEntry::new("by_parts_agreement", parts_gap, 1e-10),
            ResidualEntry::new("on_shell_action", v0.direct.norm(), 1e-10),
            ResidualEntry::new("eigenvalue_formula", eig_gap, 1e-12),
            ResidualEntry::new("reality", imag, 1e-12),
        ],
        vec![slat.n_sites()],
    ))
}

fn check_mass_shell(_cfg: &CheckConfig) -> Result<Outcome> {
    // odd grid so every |ω| = |p| line pairs fully
    let n = 9;
    let slat = SpacetimeLattice::new(n, 1.0, n, 1.0)?;
    let all = mass_shell_modes(&slat, 0.0, 1e-9, false)?;
    let pos = mass_shell_modes(&slat, 0.0, 1e-9, true)?;
    let count_gap = (all.len() as f64 - (2 * n - 1) as f64).abs();
    let filter_gap = ((all.len() - 1) as f64 - (2 * pos.len()) as f64).abs();

    let off = mass_shell_modes(&slat, 0.123, 1e-9, false)?;
    let empty_ok = off.is_empty();

    let tol = 1e-9;
    let j = build_jrel(&slat, 0.0)?;
    let mut shell_res = 0.0f64;
    for (k, q) in &all {
        let u = FieldConfig::plane_wave(&slat, *k, *q, c(1.0))?;
        let ju = j.dot(&u.amplitudes);
        let norm = ju.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        shell_res = shell_res.max(norm / u.norm_sqr().sqrt());
    }
    Ok(Outcome::new(
        vec![
            ResidualEntry::new("diagonal_count", count_gap, 0.0),
            ResidualEntry::new("positive_filter", filter_gap, 0.0),
            ResidualEntry::floor("empty_off_shell", empty_ok as u8 as f64, 1.0),
            ResidualEntry::new("shell_annihilation", shell_res, tol),
        ],
        vec![slat.n_sites()],
    ))
}

fn check_rel_translation(cfg: &CheckConfig) -> Result<Outcome> {
    let slat = spacetime_for(cfg)?;
    let m0 = cfg.theory.mass().unwrap_or(0.5);
    let r = translation_invariance_residual(&slat, m0)?;
    let unit = slat.dft_unitarity_residual();
    Ok(Outcome::new(
        vec![
            ResidualEntry::new("homogeneity", r, 1e-10),
            ResidualEntry::new("dft_unitarity", unit, 1e-12),
        ],
        vec![slat.n_sites()],
    ))
}

// ───────────────────────── registry ─────────────────────────

fn dc() -> CheckConfig {
    CheckConfig::default()
}

fn dc_lat(n_sites: usize, dt: f64) -> CheckConfig {
    CheckConfig {
        lattice: LatticeConfig {
            n_sites,
            dt,
            t_start: None,
        },
        ..CheckConfig::default()
    }
}

pub fn registry() -> Vec<CheckDef> {
    vec![
        CheckDef {
            name: "lattice/dft-unitarity",
            description: "time-frequency DFT is unitary",
            default_config: || dc_lat(256, 0.25),
            run: check_dft_unitarity,
        },
        CheckDef {
            name: "lattice/pt-spectrum",
            description: "time-translation generator has the frequency window as spectrum",
            default_config: || dc_lat(16, 1.0),
            run: check_pt_spectrum,
        },
        CheckDef {
            name: "lattice/pt-shift",
            description: "exp(±i·p·ε) equals the one-step cyclic site shift exactly",
            default_config: || dc_lat(8, 0.5),
            run: check_pt_shift,
        },
        CheckDef {
            name: "quadratic/k-structure",
            description: "doubled dynamical matrix has the exact block pattern and is Hermitian",
            default_config: dc,
            run: check_k_structure,
        },
        CheckDef {
            name: "quadratic/w-propagation",
            description: "W(t) stays symplectic and its Heisenberg residual converges with ε",
            default_config: || {
                let mut cfg = dc_lat(64, 4.0 / 64.0);
                cfg.theory = TheoryConfig::Quadratic {
                    omega0: 1.0,
                    gamma: 0.5,
                };
                cfg
            },
            run: check_w_propagation,
        },
        CheckDef {
            name: "quadratic/normal-form",
            description: "Bogoliubov normal form: frequencies, symplecticity, instability detection",
            default_config: dc,
            run: check_normal_form,
        },
        CheckDef {
            name: "quadratic/commensurability",
            description: "frequency-grid membership classifier",
            default_config: dc,
            run: check_commensurability,
        },
        CheckDef {
            name: "onebody/diag-exponentiated",
            description: "one-step diagonalization identity over N ∈ {2,4,8,16}, M ∈ {1,2}",
            default_config: dc,
            run: check_diag_exponentiated,
        },
        CheckDef {
            name: "onebody/diag-generator",
            description: "generator-form diagonalization, spectra compared mod 2π/ε",
            default_config: dc,
            run: check_diag_generator,
        },
        CheckDef {
            name: "onebody/diag-generator-incommensurate",
            description: "generator form for an off-grid frequency (flagged expected-nonzero)",
            default_config: || {
                let mut cfg = dc();
                cfg.theory = TheoryConfig::Oscillator { omega0: 1.0 };
                cfg
            },
            run: check_diag_generator,
        },
        CheckDef {
            name: "onebody/physical-modes",
            description: "kernel of the action: dimension, orthonormality, stationary form",
            default_config: dc,
            run: check_physical_modes,
        },
        CheckDef {
            name: "onebody/translate-physical",
            description: "rigid time translation evolves physical modes by exp(−iΠK′Δt)",
            default_config: dc,
            run: check_translate_physical,
        },
        CheckDef {
            name: "onebody/commutator-time",
            description: "[p, τ] − i·1 vanishes on centered packets as N grows",
            default_config: || dc_lat(64, 1.0),
            run: check_commutator_time,
        },
        CheckDef {
            name: "onebody/conjugation-constant",
            description: "time-independent canonical transformations commute with p",
            default_config: || dc_lat(8, 0.5),
            run: check_conjugation_constant,
        },
        CheckDef {
            name: "onebody/conjugation-timedep",
            description: "time-dependent conjugation identity converges with ε",
            default_config: || dc_lat(64, 8.0 / 64.0),
            run: check_conjugation_timedep,
        },
        CheckDef {
            name: "fock/fermi-car",
            description: "fermionic algebra holds bit-exactly, (b†)² = 0",
            default_config: dc,
            run: check_fermi_car,
        },
        CheckDef {
            name: "fock/coherent-overlap",
            description: "truncated coherent states reproduce the analytic overlap law",
            default_config: || {
                let mut cfg = dc_lat(2, 1.0);
                cfg.engine = EngineConfig::FockBose { n_max: 8 };
                cfg
            },
            run: check_coherent_overlap,
        },
        CheckDef {
            name: "fock/gaussian-conjugation",
            description: "Gaussian unitaries conjugate ladder operators by e^{ig}",
            default_config: dc,
            run: check_gaussian_conjugation,
        },
        CheckDef {
            name: "fock/manybody-diag",
            description: "many-body diagonalization identity, Fermi exact and Bose sector-faithful",
            default_config: dc,
            run: check_manybody_diag,
        },
        CheckDef {
            name: "fock/sp-consistency",
            description: "single-particle restriction of every many-body operator",
            default_config: dc,
            run: check_sp_consistency,
        },
        CheckDef {
            name: "fock/exp-routes",
            description: "dense and Krylov exponentials agree at dimension 2^10",
            default_config: dc,
            run: check_exp_routes,
        },
        CheckDef {
            name: "physical/lift-annihilation",
            description: "lifted states are annihilated by the quantum action",
            default_config: dc,
            run: check_lift_annihilation,
        },
        CheckDef {
            name: "physical/lift-overlap",
            description: "the lift preserves inner products (Fermi exact, Bose at cutoff)",
            default_config: dc,
            run: check_lift_overlap,
        },
        CheckDef {
            name: "physical/foliation",
            description: "foliation unitarity and evolved-state extraction at a site",
            default_config: dc,
            run: check_foliation,
        },
        CheckDef {
            name: "physical/propagator",
            description: "propagator recovery by foliation and global overlaps",
            default_config: dc,
            run: check_propagator,
        },
        CheckDef {
            name: "physical/observable-heisenberg",
            description: "Heisenberg-picture elements from rigid time translations",
            default_config: dc,
            run: check_observable_heisenberg,
        },
        CheckDef {
            name: "physical/temporal-entropy",
            description: "entanglement in time: separable coherent lifts, Schmidt oracle",
            default_config: dc,
            run: check_temporal_entropy,
        },
        CheckDef {
            name: "physical/sp-structure",
            description: "relational form of sp physical states and ω-family orthogonality",
            default_config: dc,
            run: check_sp_structure,
        },
        CheckDef {
            name: "relfield/action-identity",
            description: "coherent-state expectation of J_rel equals the classical action",
            default_config: || {
                let mut cfg = dc_lat(8, 1.0);
                cfg.space = Some(SpaceConfig { n_x: 8, dx: 1.0 });
                cfg.theory = TheoryConfig::RelScalar { mass: 0.5 };
                cfg
            },
            run: check_action_identity,
        },
        CheckDef {
            name: "relfield/mass-shell",
            description: "mass-shell mode extraction and positive-frequency filter",
            default_config: || {
                let mut cfg = dc_lat(9, 1.0);
                cfg.space = Some(SpaceConfig { n_x: 9, dx: 1.0 });
                cfg.theory = TheoryConfig::RelScalar { mass: 0.0 };
                cfg
            },
            run: check_mass_shell,
        },
        CheckDef {
            name: "relfield/translation",
            description: "J_rel commutes with both lattice translations",
            default_config: || {
                let mut cfg = dc_lat(6, 0.5);
                cfg.space = Some(SpaceConfig { n_x: 4, dx: 1.0 });
                cfg.theory = TheoryConfig::RelScalar { mass: 0.5 };
                cfg
            },
            run: check_rel_translation,
        },
    ]
}

pub fn find(name: &str) -> Result<CheckDef> {
    registry()
        .into_iter()
        .find(|d| d.name == name)
        .ok_or_else(|| Error::UnknownCheck(name.into()))
}
