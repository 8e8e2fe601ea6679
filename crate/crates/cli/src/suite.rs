//! Verification suites run in dependency order against a [`RunConfig`].

use std::error::Error as StdError;
use std::time::Instant;

use fermigap::assembly::{
    critical_b, decomposition_identity, per_term_operators, proposition_check, relative_bound_b, AssemblyContext,
    LocalOperator,
};
use fermigap::doubled::{
    build_doubled_h0, check_h0sq_vs_nsq, doubled_spectrum, is_even, subset_sums, verify_doubling_identity,
    DoubledHamiltonian,
};
use fermigap::flow::{
    apply_filter, conjugated_commutator, default_gamma, integrate_flow, uniform_grid, FlowState, DEGENERACY_TOL,
};
use fermigap::fock::{annihilation, majorana, number, parity_operator, total_number, FockSpace, ModeSet};
use fermigap::lattice::{Lattice, SiteSet};
use fermigap::lieb_robinson::{commutator_profile, evolution_checks, fit_velocity, time_grid, Evolution};
use fermigap::linalg::{anticommutator, hermitian_eigen, hermiticity_defect, spectral_norm, CMat, C64, I};
use fermigap::localization::{
    pi_bar, pi_bar_direct, pi_bar_unchecked, sandwich_split, shell_decompose, truncation_check, ShellMode,
};
use fermigap::majorana::{build_a, majorana_site_projection, structure_report, BdgData, Species, GAPLESS_TOL};
use fermigap::models::{hopping_operator, random_even_hermitian};
use fermigap::polynomial::Polynomial;
use fermigap::single_particle::{fit_exponential_decay, from_matrix, particle_hole_doubled, SingleParticleModel};
use fermigap::transform::{local_bound_profile, oracle_compare, transform_to_eta, validate_assumptions, InteractionSet};
use fermigap::fock::Parity;

use crate::config::RunConfig;
use crate::report::{config_hash, CheckRecord, Relation, Status, Tables, VerificationReport};

type StageResult = Result<(), Box<dyn StdError>>;

/// Largest Fock space used for the CAR and Majorana operator checks.
const CAR_MODES: usize = 6;

pub struct SuiteOutput {
    pub report: VerificationReport,
    pub tables: Tables,
}

/// Doubled-space data on the flow window, shared by the flow, assembly and localization suites.
struct FlowData {
    lattice: Lattice,
    dh: DoubledHamiltonian,
    v_terms: Vec<LocalOperator>,
    h0: CMat,
    vt: CMat,
    states: Vec<FlowState>,
    gamma: f64,
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    tol_scale: f64,
    suite: &'static str,
    records: Vec<CheckRecord>,
    tables: Tables,
    clock: Instant,
    flow: Option<FlowData>,
}

/// Leading `k` sites of a one-dimensional model as an open chain.
fn window(model: &SingleParticleModel, k: usize) -> fermigap::Result<SingleParticleModel> {
    if k == model.lattice.len() {
        return Ok(model.clone());
    }
    let t = model.t.view((0, 0), (k, k)).into_owned();
    from_matrix(Lattice::chain(k)?, t, model.fermi_energy, model.disorder)
}

/// Terms of `v` supported on the leading `k` sites.
fn window_interaction(v: &InteractionSet, k: usize) -> InteractionSet {
    InteractionSet {
        n_sites: k,
        terms: v.terms.iter().filter(|t| t.sites.iter().all(|&s| s < k)).cloned().collect(),
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn sum_ops(ops: impl Iterator<Item = CMat>, dim: usize) -> CMat {
    ops.fold(CMat::zeros(dim, dim), |acc, m| acc + m)
}

impl<'a> Runner<'a> {
    fn push(
        &mut self,
        name: &str,
        anchor: &str,
        status: Status,
        measured: Option<f64>,
        tolerance: Option<f64>,
        relation: Relation,
        message: String,
    ) {
        let now = Instant::now();
        self.records.push(CheckRecord {
            id: format!("{}.{name}", self.suite),
            suite: self.suite.to_string(),
            anchor: anchor.to_string(),
            status,
            measured,
            tolerance,
            relation,
            message,
            runtime: now - self.clock,
        });
        self.clock = now;
    }

    fn override_for(&self, name: &str) -> Option<f64> {
        self.cfg.tolerances.get(&format!("{}.{name}", self.suite)).copied()
    }

    /// Precision check: passes iff `measured ≤ tol · tol_scale`.
    fn at_most(&mut self, name: &str, anchor: &str, measured: f64, default_tol: f64) {
        let tol = self.override_for(name).unwrap_or(default_tol) * self.tol_scale;
        self.bounded_above(name, anchor, measured, tol);
    }

    /// Structural upper bound, not affected by `--tol-scale`.
    fn bounded_above(&mut self, name: &str, anchor: &str, measured: f64, tol: f64) {
        let status = if measured <= tol { Status::Pass } else { Status::Fail };
        self.push(name, anchor, status, Some(measured), Some(tol), Relation::AtMost, String::new());
    }

    fn at_least(&mut self, name: &str, anchor: &str, measured: f64, threshold: f64) {
        let threshold = self.override_for(name).unwrap_or(threshold);
        let status = if measured >= threshold { Status::Pass } else { Status::Fail };
        self.push(name, anchor, status, Some(measured), Some(threshold), Relation::AtLeast, String::new());
    }

    fn flag(&mut self, name: &str, anchor: &str, ok: bool, measured: Option<f64>, message: String) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.push(name, anchor, status, measured, None, Relation::Flag, message);
    }

    fn skip(&mut self, name: &str, anchor: &str, message: String) {
        self.push(name, anchor, Status::Skipped, None, None, Relation::Flag, message);
    }

    fn model(&self) -> Result<SingleParticleModel, Box<dyn StdError>> {
        Ok(self.cfg.model()?)
    }

    fn max_sites(&self) -> usize {
        self.cfg.max_sites
    }

    fn flow_data(&mut self) -> Result<&FlowData, Box<dyn StdError>> {
        if self.flow.is_none() {
            let k = self.cfg.flow.sites;
            let model = window(&self.model()?, k)?;
            let bdg = build_a(&model)?;
            let dh = build_doubled_h0(&bdg, self.max_sites())?;
            let v = window_interaction(&self.cfg.interaction()?, k);
            let v_terms = per_term_operators(&v, &bdg, self.cfg.epsilon)?;
            let h0 = dh.h0.dense();
            let vt = sum_ops(v_terms.iter().map(|t| t.op.clone()), dh.dim());
            let grid = uniform_grid(self.cfg.flow.s_max, self.cfg.flow.steps);
            let states = integrate_flow(&h0, &vt, &grid, self.cfg.flow.substeps)?;
            let gamma = default_gamma(&states, self.cfg.flow.gamma_factor);
            self.flow = Some(FlowData { lattice: model.lattice.clone(), dh, v_terms, h0, vt, states, gamma });
        }
        Ok(self.flow.as_ref().expect("flow data computed"))
    }

    fn run_stage(&mut self, suite: &'static str) {
        self.suite = suite;
        self.clock = Instant::now();
        let result = match suite {
            "geometry" => geometry(self),
            "single-particle" => single_particle(self),
            "car" => car(self),
            "majorana" => majorana_suite(self),
            "doubling" => doubling(self),
            "transform" => transform(self),
            "flow" => flow(self),
            "assembly" => assembly(self),
            "localization" => localization(self),
            "gap" => gap(self),
            "lr" => lieb_robinson(self),
            other => Err(format!("unknown suite {other}").into()),
        };
        if let Err(e) = result {
            self.push("stage", "stage-completes", Status::Fail, None, None, Relation::Flag, e.to_string());
        }
    }
}

fn geometry(r: &mut Runner) -> StageResult {
    let lat = r.cfg.lattice()?;
    let n = lat.len();
    let mut symmetric = true;
    let mut triangle = true;
    let mut max_d = 0;
    for x in 0..n {
        symmetric &= lat.dist(x, x) == 0;
        for y in 0..n {
            let d = lat.dist(x, y);
            max_d = max_d.max(d);
            symmetric &= d == lat.dist(y, x) && (d > 0 || x == y);
            for z in 0..n {
                triangle &= d <= lat.dist(x, z) + lat.dist(z, y);
            }
        }
    }
    r.flag("metric", "path-metric-symmetry", symmetric, None, format!("{n} sites"));
    r.flag("triangle", "path-metric-triangle-inequality", triangle, None, String::new());
    let unit = (0..n).all(|x| lat.neighbors(x).iter().all(|&y| lat.dist(x, y) == 1));
    r.flag("neighbors", "nearest-neighbour-unit-distance", unit, None, String::new());
    r.flag(
        "diameter",
        "lattice-diameter",
        lat.diameter() == max_d,
        Some(lat.diameter() as f64),
        format!("max pair distance {max_d}"),
    );
    let mut nested = true;
    for x in 0..n {
        let z: SiteSet = [x].into_iter().collect();
        let mut prev = lat.ball(&z, 0)?;
        nested &= prev == z;
        for radius in 1..=lat.diameter() {
            let b = lat.ball(&z, radius)?;
            nested &= prev.is_subset(&b);
            prev = b;
        }
        nested &= prev.len() == n;
    }
    r.flag("balls", "ball-nesting-and-exhaustion", nested, None, String::new());
    Ok(())
}

fn single_particle(r: &mut Runner) -> StageResult {
    let model = r.model()?;
    r.at_most("hermiticity", "hopping-matrix-hermitian", hermiticity_defect(&model.t), 1e-12);
    r.at_most("diagonalization", "hopping-eigendecomposition", model.diagonalization_residual(), 1e-10);
    r.at_least("fermi-gap", "fermi-level-gap", model.gap, GAPLESS_TOL);
    let ph = hermitian_eigen(&particle_hole_doubled(&model.t)).values;
    let mut expected: Vec<f64> = model.eigenvalues().iter().flat_map(|&l| [l, -l]).collect();
    expected.sort_by(f64::total_cmp);
    let mismatch = max_of(ph.iter().zip(&expected).map(|(a, b)| (a - b).abs()));
    r.at_most("particle-hole", "particle-hole-doubled-spectrum", mismatch, 1e-10);
    if let Ok(fit) = fit_exponential_decay(&model.t, &model.lattice, None) {
        r.tables.decay.extend(fit.samples.iter().map(|&(d, v)| ("hopping".to_string(), d, v)));
    }
    Ok(())
}

fn car(r: &mut Runner) -> StageResult {
    let m = r.cfg.lattice()?.len().min(CAR_MODES);
    let space = FockSpace::sites(m)?;
    let dim = space.dim();
    let id = CMat::identity(dim, dim);
    let a: Vec<CMat> = (0..m).map(|k| annihilation(&space, k).map(|o| o.dense())).collect::<Result<_, _>>()?;
    let mut mixed: f64 = 0.0;
    let mut pure: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let ad = a[j].adjoint();
            let delta = if i == j { id.clone() } else { CMat::zeros(dim, dim) };
            mixed = mixed.max(spectral_norm(&(anticommutator(&a[i], &ad) - delta)));
            pure = pure.max(spectral_norm(&anticommutator(&a[i], &a[j])));
        }
    }
    r.at_most("mixed-anticommutator", "canonical-anticommutation", mixed, 1e-13);
    r.at_most("pure-anticommutator", "ladder-anticommutation", pure, 1e-13);
    let projector = max_of((0..m).map(|k| {
        let n = a[k].adjoint() * &a[k];
        spectral_norm(&(&n * &n - &n))
    }));
    r.at_most("number-projector", "occupation-number-idempotent", projector, 1e-13);
    let parity = parity_operator(&space, ModeSet::all(m)).dense();
    let odd = max_of(a.iter().map(|x| spectral_norm(&anticommutator(&parity, x))));
    r.at_most("parity-anticommutes", "ladder-operators-are-odd", odd, 1e-13);
    let counts = hermitian_eigen(&total_number(&space).dense()).values;
    let integrality = max_of(counts.iter().map(|c| (c - c.round()).abs()));
    r.at_most("number-spectrum", "integer-particle-number", integrality, 1e-12);
    Ok(())
}

fn majorana_suite(r: &mut Runner) -> StageResult {
    let model = r.model()?;
    let n = model.lattice.len();
    let m = n.min(CAR_MODES);
    let space = FockSpace::sites(m)?;
    let dim = space.dim();
    let id = CMat::identity(dim, dim);
    let c: Vec<CMat> = (0..m).map(|k| majorana(&space, k, Species::C).map(|o| o.dense())).collect::<Result<_, _>>()?;
    let d: Vec<CMat> = (0..m).map(|k| majorana(&space, k, Species::D).map(|o| o.dense())).collect::<Result<_, _>>()?;
    let mut anti: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let delta = if i == j { id.clone() } else { CMat::zeros(dim, dim) };
            anti = anti.max(spectral_norm(&(anticommutator(&c[i], &c[j]) - &delta)));
            anti = anti.max(spectral_norm(&(anticommutator(&d[i], &d[j]) - &delta)));
            anti = anti.max(spectral_norm(&anticommutator(&c[i], &d[j])));
        }
    }
    r.at_most("anticommutators", "majorana-anticommutation", anti, 1e-13);
    let half = &id * C64::from(0.5);
    let square = max_of((0..m).flat_map(|x| {
        [spectral_norm(&(&c[x] * &c[x] - &half)), spectral_norm(&(&d[x] * &d[x] - &half))]
    }));
    r.at_most("square-half", "majorana-square-one-half", square, 1e-13);

    let bdg = build_a(&model)?;
    let s = structure_report(&bdg, Some(model.gap));
    r.at_most("a-imaginary", "majorana-matrix-pure-imaginary", s.a_real_part, 1e-10);
    r.at_most("a-antisymmetric", "majorana-matrix-antisymmetric", s.a_antisymmetry, 1e-10);
    r.at_most("abs-symmetric", "absolute-value-real-symmetric", s.abs_symmetry, 1e-10);
    r.at_most("abs-gap", "absolute-value-bottom-equals-fermi-gap", s.gap_mismatch.unwrap_or(f64::INFINITY), 1e-10);
    r.at_most("sign-antisymmetric", "sign-antisymmetric", s.sign_antisymmetry, 1e-10);
    r.at_most("sign-hermitian", "sign-self-adjoint", s.sign_hermiticity, 1e-10);
    r.at_most("sign-square", "sign-squares-to-identity", s.sign_square, 1e-10);
    r.at_most("polar", "polar-decomposition", s.polar, 1e-10);
    r.at_most("projectors", "spectral-projectors", s.projector, 1e-10);
    let fit = fit_exponential_decay(&bdg.sign_a, &model.lattice, Some(&majorana_site_projection(n)))?;
    r.tables.decay.extend(fit.samples.iter().map(|&(d, v)| ("sign-a".to_string(), d, v)));
    r.flag(
        "sign-decay",
        "sign-function-exponential-decay",
        fit.rate > 0.0,
        Some(fit.rate),
        format!("prefactor {:.3e}, r² {:.4}", fit.prefactor, fit.r_squared),
    );
    Ok(())
}

fn doubled_of(model: &SingleParticleModel, max_sites: usize) -> fermigap::Result<(BdgData, DoubledHamiltonian)> {
    let bdg = build_a(model)?;
    let dh = build_doubled_h0(&bdg, max_sites)?;
    Ok((bdg, dh))
}

fn doubling(r: &mut Runner) -> StageResult {
    let model = r.model()?;
    let (bdg, dh) = doubled_of(&model, r.max_sites())?;
    r.at_most("frustration-free", "local-terms-annihilate-vacuum", dh.frustration_residual(), 1e-12);
    r.at_most("local-sum", "doubled-hamiltonian-local-decomposition", dh.local_sum_residual(), 1e-10);
    let even = dh.local_terms.iter().all(|t| is_even(&t.op));
    r.flag("even-terms", "local-terms-even", even, None, format!("{} local terms", dh.local_terms.len()));
    let positivity = check_h0sq_vs_nsq(&dh, bdg.gap)?;
    r.at_least("positivity", "h0-squared-dominates-number-squared", positivity, -1e-9);
    let sharp = check_h0sq_vs_nsq(&dh, 1.01 * bdg.gap)?;
    r.flag(
        "sharpness",
        "number-squared-bound-sharp",
        sharp < -1e-9,
        Some(sharp),
        "bound must fail at 1.01 times the gap".into(),
    );

    let k = r.cfg.window_sites;
    let (wb, wdh) = doubled_of(&window(&model, k)?, r.max_sites())?;
    let spec = doubled_spectrum(&wdh)?;
    let sums = subset_sums(&hermitian_eigen(&wb.abs_a).values);
    let mismatch = max_of(spec.iter().zip(&sums).map(|(a, b)| (a - b).abs()));
    r.at_most("spectrum", "doubled-spectrum-subset-sums", mismatch, 1e-10);
    let identity = verify_doubling_identity(&wb, &wdh)?;
    r.at_most("identity", "two-copy-doubling-identity", identity.max_residual(), 1e-10);
    Ok(())
}

fn transform(r: &mut Runner) -> StageResult {
    let model = r.model()?;
    let v = r.cfg.interaction()?;
    if v.terms.is_empty() {
        r.skip("interaction", "interaction-present", "no interaction terms configured".into());
        return Ok(());
    }
    let parity_ok = v.check_parity().is_ok();
    r.flag("parity", "interaction-even", parity_ok, None, String::new());
    let assumptions = validate_assumptions(&v, &model.lattice, r.cfg.k_h)?;
    r.flag(
        "summability",
        "interaction-summability",
        assumptions.finite,
        assumptions.weighted_fit.as_ref().map(|f| f.rate),
        format!("K_h = {}", r.cfg.k_h),
    );
    let bdg = build_a(&model)?;
    let tv = transform_to_eta(&v, &bdg, r.cfg.epsilon)?;
    let total = tv.total();
    r.flag("eta-parity", "transformed-interaction-even", total.parity() == Parity::Even, None, String::new());
    let adjoint: Polynomial = total.add(&total.adjoint().scale(C64::from(-1.0)));
    r.at_most("self-adjoint", "transformed-interaction-self-adjoint", adjoint.l1_norm(), 1e-10);
    r.at_most("truncated-mass", "coefficient-truncation", tv.dropped_mass, 1e-8);
    let profile = local_bound_profile(&tv, &model.lattice)?;
    r.bounded_above("triangle", "term-norm-below-coefficient-sum", profile.triangle_ratio, 1.0 + 1e-12);
    match &profile.fit {
        Some(fit) => {
            r.tables.decay.extend(fit.samples.iter().map(|&(d, v)| ("local-bound".to_string(), d, v)));
            r.flag("local-bound-decay", "transformed-interaction-local-bound-decay", fit.rate > 0.0, Some(fit.rate), String::new());
        }
        None => r.flag("local-bound-decay", "transformed-interaction-local-bound-decay", false, None, "no decay fit".into()),
    }

    let k = r.cfg.window_sites;
    let wmodel = window(&model, k)?;
    let wbdg = build_a(&wmodel)?;
    let wv = window_interaction(&v, k);
    let wtv = transform_to_eta(&wv, &wbdg, 0.0)?;
    let oracle = oracle_compare(&wv, &wtv, &wbdg, r.max_sites())?;
    r.at_most("oracle", "eta-transformation-exact", oracle, 1e-10);
    Ok(())
}

fn flow(r: &mut Runner) -> StageResult {
    let seed = r.cfg.seed;
    let (steps, substeps, s_max) = (r.cfg.flow.steps, r.cfg.flow.substeps, r.cfg.flow.s_max);
    let fd = r.flow_data()?;
    let min_gap = fd.states.iter().map(|s| s.gap).fold(f64::INFINITY, f64::min);
    let last = fd.states.last().expect("nonempty flow");
    let residual = last.intertwining_residual;
    let unitarity = max_of(fd.states.iter().map(|s| s.unitarity_defect));
    let p_initial = fd.states[0].ground_projector();
    let commutes = conjugated_commutator(last, &p_initial);
    let refined = integrate_flow(&fd.h0, &fd.vt, &uniform_grid(s_max, 2 * steps), substeps)?;
    let r2 = refined.last().expect("nonempty flow").intertwining_residual;
    let dim = fd.dh.dim();
    let id = CMat::identity(dim, dim);
    let ht = last.h_tilde();
    let fixed = spectral_norm(&(apply_filter(last, &id, fd.gamma) - &id))
        .max(spectral_norm(&(apply_filter(last, &ht, fd.gamma) - &ht)));
    let v0 = last.conjugated_spectrum().vectors.column(0).into_owned();
    let p0 = &v0 * v0.adjoint();
    let q0 = &id - &p0;
    let off = max_of((0..20u64).map(|k| {
        let x = random_even_hermitian(&fd.dh.space, seed.wrapping_add(2 * k), 1.0);
        let y = random_even_hermitian(&fd.dh.space, seed.wrapping_add(2 * k + 1), 1.0);
        let a = x + y * I;
        spectral_norm(&(&q0 * apply_filter(last, &a, fd.gamma) * &p0))
    }));
    let gamma = fd.gamma;

    r.at_least("gap-open", "flow-gap-open", min_gap, DEGENERACY_TOL);
    r.at_most("intertwining", "kato-intertwining", residual, 1e-6);
    r.at_most("unitarity", "flow-unitary", unitarity, 1e-12);
    let floor = (residual / 8.0).max(1e-13);
    r.push(
        "refinement",
        "rk4-step-refinement",
        if r2 <= floor { Status::Pass } else { Status::Fail },
        Some(r2),
        Some(floor),
        Relation::AtMost,
        format!("{steps} steps {residual:.3e}, {} steps {r2:.3e}", 2 * steps),
    );
    r.at_most("conjugated-commutator", "transported-hamiltonian-commutes-with-initial-projector", commutes, 1e-6);
    r.at_most("filter-fixed-points", "filter-fixes-identity-and-hamiltonian", fixed, 1e-12);
    r.at_most("filter-off-diagonal", "filter-kills-ground-to-excited-elements", off, 1e-10);
    r.flag("gamma", "filter-band-inside-gap", gamma > 0.0 && gamma < min_gap, Some(gamma), String::new());
    Ok(())
}

fn assembly(r: &mut Runner) -> StageResult {
    let modes = r.cfg.lattice()?.len().min(4);
    let fd = r.flow_data()?;
    let ctx = AssemblyContext::from_doubled(&fd.dh, fd.v_terms.clone(), fd.states.clone(), fd.gamma)?;
    let k = fd.states.len() - 1;
    let ws = ctx.build_all(k)?;
    let annihilation = max_of(ws.iter().map(|w| w.annihilation_residual));
    let recon = ctx.reconstruct(k, &ws)?;
    let dim = fd.dh.dim();
    let w_total = sum_ops(ws.iter().map(|w| w.operator.clone()), dim);
    let rb = relative_bound_b(&w_total, &fd.h0)?;
    let phi0 = fd.dh.ground_state();
    let prop = proposition_check(&fd.h0, &w_total, &phi0)?;

    r.at_most("annihilation", "effective-interactions-annihilate-ground-state", annihilation, 1e-8);
    r.at_most("reconstruction", "effective-hamiltonian-reconstruction", recon.residual, 1e-7);
    r.bounded_above("relative-bound", "relative-bound-below-critical", rb.b, critical_b());
    r.push(
        "gap-bound",
        "relative-bound-gap-estimate",
        if prop.holds && prop.bound.is_some() { Status::Pass } else { Status::Fail },
        Some(prop.measured_e1),
        prop.bound,
        Relation::AtLeast,
        format!("b = {:.4e}, ΔE = {:.4}", prop.b, prop.delta_e),
    );
    let space = FockSpace::sites(modes)?;
    let orders: Vec<Vec<usize>> = vec![vec![0], (0..modes.min(2)).collect(), (0..modes.min(3)).rev().collect()];
    let decomposition = max_of(orders.iter().map(|x| decomposition_identity(&space, x)).collect::<Result<Vec<_>, _>>()?);
    r.at_most("decomposition", "vacuum-complement-decomposition", decomposition, 1e-13);
    Ok(())
}

fn localization(r: &mut Runner) -> StageResult {
    let seed = r.cfg.seed;
    let small = FockSpace::sites(3)?;
    let dim = small.dim();
    let id = CMat::identity(dim, dim);
    let mut pinned: f64 = 0.0;
    for x in 0..3 {
        let mx = ModeSet::single(x);
        pinned = pinned.max(spectral_norm(&(pi_bar(&small, &number(&small, x)?.dense(), mx)? - &id * C64::from(0.5))));
        pinned = pinned.max(spectral_norm(&pi_bar_unchecked(&small, &annihilation(&small, x)?.dense(), mx)?));
    }
    let a = random_even_hermitian(&small, seed.wrapping_add(500), 1.0);
    let trunc = truncation_check(&small, &a, ModeSet::from_modes([0, 1]))?;

    let fd = r.flow_data()?;
    let space = &fd.dh.space;
    let x = ModeSet::from_modes(0..space.n_modes().min(3));
    let b = random_even_hermitian(space, seed.wrapping_add(600), 1.0);
    let composition = spectral_norm(&(pi_bar(space, &b, x)? - pi_bar_direct(space, &b, x)?));

    let ctx = AssemblyContext::from_doubled(&fd.dh, fd.v_terms.clone(), fd.states.clone(), fd.gamma)?;
    let k = fd.states.len() - 1;
    let phi0 = fd.dh.ground_state();
    let n_max = fd.lattice.diameter();
    let mut telescoping: f64 = 0.0;
    let mut sum_residual: f64 = 0.0;
    let mut part_annihilation: f64 = 0.0;
    let mut containment = true;
    let mut rows = Vec::new();
    for z in 0..ctx.h0_terms.len() {
        for (w, mode, label) in
            [(ctx.w2(z, k)?, ShellMode::FlowConjugation, "flow-conjugation"), (ctx.w3(z, k)?, ShellMode::Filter, "filter")]
        {
            let shells = shell_decompose(space, &fd.lattice, &w.operator, &w.sites, n_max, mode)?;
            telescoping = telescoping.max(shells.telescoping_residual);
            for s in &shells.shells {
                rows.push((w.label.clone(), w.kind, label.to_string(), s.n, s.sites.len(), s.norm, s.tail));
            }
            let split = sandwich_split(space, &w.operator, &shells, &phi0)?;
            sum_residual = sum_residual.max(split.sum_residual);
            part_annihilation = part_annihilation.max(max_of(split.parts.iter().map(|p| p.annihilation_residual)));
            containment &= split.parts.iter().all(|p| p.support_ok);
        }
    }
    r.tables.shells.extend(rows);

    r.at_most("pinned-values", "conditional-expectation-pinned-values", pinned, 1e-14);
    r.flag(
        "truncation-bound",
        "truncation-error-below-probe-commutators",
        trunc.holds(),
        Some(trunc.error),
        format!("probe bound {:.3e}", trunc.epsilon),
    );
    r.at_most("composition", "single-site-composition-equals-direct-average", composition, 1e-12);
    r.at_most("telescoping", "shell-decomposition-telescopes", telescoping, 1e-10);
    r.at_most("sandwich-sum", "sandwich-parts-sum-to-term", sum_residual, 1e-10);
    r.at_most("sandwich-annihilation", "sandwich-parts-annihilate-ground-state", part_annihilation, 1e-9);
    r.flag("sandwich-support", "sandwich-parts-supported-in-regions", containment, None, String::new());
    Ok(())
}

/// Many-body `H₀ + V` on the physical Fock space, guarded by `max_sites`.
fn physical_operators(r: &Runner) -> Result<(SingleParticleModel, CMat, CMat), Box<dyn StdError>> {
    let model = r.model()?;
    let n = model.lattice.len();
    if n > r.max_sites() {
        return Err(Box::new(fermigap::Error::DimensionGuard { sites: n, max: r.max_sites() }));
    }
    let h0 = hopping_operator(&model)?.dense();
    let v = r.cfg.interaction()?.physical_operator()?.dense();
    Ok((model, h0, v))
}

fn gap(r: &mut Runner) -> StageResult {
    let (_, h0, v) = physical_operators(r)?;
    let grid = uniform_grid(r.cfg.gap_curve.s_max, r.cfg.gap_curve.steps);
    let curve = fermigap::assembly::gap_curve(&h0, &v, &grid, DEGENERACY_TOL)?;
    for k in 0..curve.s.len() {
        r.tables.gap_curve.push((curve.s[k], curve.e0[k], curve.e1[k], curve.gap[k], curve.nondegenerate[k]));
    }
    let min_gap = curve.gap.iter().cloned().fold(f64::INFINITY, f64::min);
    r.at_least("initial-gap", "unperturbed-many-body-gap", curve.gap[0], DEGENERACY_TOL);
    r.flag(
        "nondegenerate",
        "ground-state-nondegenerate-along-path",
        curve.nondegenerate.iter().all(|&b| b),
        Some(min_gap),
        String::new(),
    );
    r.flag(
        "half-gap-interval",
        "gap-stays-above-half-on-interval",
        curve.s_dagger > 0.0,
        Some(curve.s_dagger),
        format!("gap(0) = {:.6}", curve.gap[0]),
    );
    r.push(
        "lipschitz",
        "gap-curve-lipschitz",
        if curve.continuous { Status::Pass } else { Status::Fail },
        Some(curve.max_slope),
        Some(curve.lipschitz),
        Relation::AtMost,
        String::new(),
    );
    Ok(())
}

fn lieb_robinson(r: &mut Runner) -> StageResult {
    let (model, h0, v) = physical_operators(r)?;
    let lat = &model.lattice;
    let n = lat.len();
    let space = FockSpace::sites(n)?;
    let evolution = Evolution::new(&(h0 + v));
    let q0 = number(&space, 0)?.dense();
    let grid = time_grid(r.cfg.lr.t_max, r.cfg.lr.steps);
    let (iso, group) = evolution_checks(&evolution, &q0, &time_grid(r.cfg.lr.t_max, 20));
    let mut profiles = Vec::new();
    for dist in 1..=lat.diameter() {
        if let Some(y) = (0..n).find(|&y| lat.dist(0, y) == dist) {
            let qy = number(&space, y)?.dense();
            profiles.push(commutator_profile(&evolution, &q0, &qy, &grid, dist, false));
        }
    }
    for p in &profiles {
        r.tables.lr.extend(p.times.iter().zip(&p.norms).map(|(&t, &nm)| (p.distance, t, nm)));
    }
    let initial = max_of(profiles.iter().map(|p| p.norms[0]));
    r.at_most("isometry", "heisenberg-evolution-isometric", iso, 1e-10);
    r.at_most("group-law", "heisenberg-evolution-group-law", group, 1e-10);
    r.at_most("initial-commutator", "disjoint-even-operators-commute", initial, 1e-12);
    let fit = fit_velocity(&profiles, r.cfg.lr.theta)?;
    let arrivals: Vec<String> = fit.arrivals.iter().map(|(d, t)| format!("{d}:{t:.3}")).collect();
    r.flag("monotone-arrivals", "light-cone-arrival-order", fit.monotone, None, arrivals.join(" "));
    r.flag(
        "velocity",
        "finite-lieb-robinson-velocity",
        fit.v_lr.is_finite() && fit.v_lr > 0.0,
        Some(fit.v_lr),
        format!("r² = {:.4}", fit.r_squared),
    );
    Ok(())
}

/// Run the selected suites of a validated config.
pub fn run_suite(cfg: &RunConfig, tol_scale: f64) -> SuiteOutput {
    let mut runner = Runner {
        cfg,
        tol_scale,
        suite: "",
        records: Vec::new(),
        tables: Tables::default(),
        clock: Instant::now(),
        flow: None,
    };
    let suites = cfg.selected_suites();
    for s in &suites {
        runner.run_stage(s);
    }
    let hash = config_hash(&cfg.to_toml());
    let report = VerificationReport::new(hash, cfg.seed, suites.iter().map(|s| s.to_string()).collect(), runner.records);
    SuiteOutput { report, tables: runner.tables }
}
