//! One function per subcommand. Each validates its configuration before any
//! computation, writes its files and reports a [`Failure`] for nonzero exits.

use std::f64::consts::PI;
use std::sync::Arc;

use adsdirac::bf_scalar::{self, BoundaryTreatment, KgParams, WeylClass, ALPHA_LOWER, ALPHA_UPPER};
use adsdirac::evolution::{
    self, cesaro_average, cesaro_bound, gaussian_data, project_initial_data, CesaroMethod, ChiralityMatrices,
    EvolutionState, Profile,
};
use adsdirac::gamma_geometry::PhysicalParams;
use adsdirac::spectrum::{spectrum_sweep, SolverConfig, SpectralResult};
use num_complex::Complex64 as C64;
use serde_json::{json, Value};

use crate::config::{finite_list, RunConfig};
use crate::output::{num, Run, Table};
use crate::selftest;
use crate::Failure;

fn regime_tag(params: &PhysicalParams) -> &'static str {
    if params.is_heavy() {
        "heavy"
    } else {
        "light"
    }
}

fn params_meta(params: &PhysicalParams) -> Value {
    json!({
        "Lambda": params.lambda(),
        "M": params.mass(),
        "m": params.m(),
        "regime": regime_tag(params),
        "threshold_M": params.bf_threshold(),
    })
}

fn solver_meta(cfg: &SolverConfig) -> Value {
    json!({
        "n_nodes": cfg.n_nodes,
        "n_eigs": cfg.n_eigs,
        "accept_tol": cfg.accept_tol,
        "gap_tol": cfg.gap_tol,
        "rel_tol": cfg.rel_tol,
        "heavy_decay": cfg.heavy_decay.tag(),
    })
}

pub fn spectrum(config: RunConfig) -> Result<(), Failure> {
    let params = config.params()?;
    let bc = config.boundary()?;
    let cfg = config.solver()?;
    let two_l_max = config.two_l_max();
    eprintln!("regime: {} (m = {})", regime_tag(&params), params.m());
    let mut run = Run::new("spectrum", config);
    let results = run.timed("sweep", || spectrum_sweep(&params, &bc, two_l_max, &cfg))?;
    let mut table = Table::new(&["two_l", "two_n_multiplicity", "eig_index", "lambda", "residual", "n_nodes", "converged"]);
    for r in &results {
        for k in 0..r.eigenvalues.len() {
            table.push(vec![
                r.mode.two_l().to_string(),
                r.multiplicity.to_string(),
                k.to_string(),
                num(r.eigenvalues[k]),
                num(r.residuals[k]),
                r.n_nodes.to_string(),
                r.converged[k].to_string(),
            ]);
        }
    }
    run.converged = results.iter().all(|r| r.converged.iter().all(|&c| c));
    let meta = json!({
        "params": params_meta(&params),
        "bc": bc.to_string(),
        "two_l_max": two_l_max,
        "solver": solver_meta(&cfg),
        "hermiticity_defect": results.iter().map(|r| r.hermiticity_defect).fold(0.0, f64::max),
    });
    run.emit(&table, meta)?;
    let converged = run.converged;
    run.finish()?;
    if !converged {
        return Err(Failure::numeric("some reported eigenpairs did not pass the refinement check"));
    }
    Ok(())
}

/// Solver settings for expansions: more eigenpairs and nodes by default.
fn expansion_solver(config: &RunConfig, n_nodes: usize, n_eigs: usize) -> Result<SolverConfig, Failure> {
    let mut c = config.clone();
    c.n_nodes.get_or_insert(n_nodes);
    c.n_eigs.get_or_insert(n_eigs);
    c.solver()
}

/// Gaussian initial data for every mode of the sweep.
struct InitialData {
    profiles: Vec<Box<dyn Fn(f64, f64) -> [C64; 4] + Sync>>,
}

impl InitialData {
    fn from_config(config: &RunConfig, two_l_max: i32, default_width: f64) -> Result<Self, Failure> {
        match config.preset.as_deref().unwrap_or("gaussian") {
            "gaussian" => {}
            other => return Err(Failure::config(format!("unknown initial-data preset '{other}' (gaussian)"))),
        }
        let centre = config.centre.unwrap_or(0.0);
        let width = config.width.unwrap_or(default_width);
        if !(width > 0.0 && width.is_finite() && centre.is_finite()) {
            return Err(Failure::config("gaussian preset needs finite centre and positive width"));
        }
        let w = config.weights.unwrap_or([[1.0, 0.0], [0.5, 0.3]]);
        let weights = [C64::new(w[0][0], w[0][1]), C64::new(w[1][0], w[1][1])];
        let kappas = (two_l_max.max(1) + 1) / 2;
        let profiles = (1..=kappas as u32)
            .map(|k| Box::new(gaussian_data(k, centre, width, weights)) as Box<dyn Fn(f64, f64) -> [C64; 4] + Sync>)
            .collect();
        Ok(InitialData { profiles })
    }

    fn refs(&self) -> Vec<Profile<'_>> {
        self.profiles.iter().map(|p| p.as_ref() as Profile).collect()
    }
}

fn sweep_arcs(params: &PhysicalParams, bc: &adsdirac::boundary::BoundaryCondition, two_l_max: i32, cfg: &SolverConfig) -> Result<Vec<Arc<SpectralResult>>, Failure> {
    Ok(spectrum_sweep(params, bc, two_l_max, cfg)?.into_iter().map(Arc::new).collect())
}

fn expansion(run: &mut Run, width: f64) -> Result<(PhysicalParams, SolverConfig, EvolutionState), Failure> {
    let params = run.config.params()?;
    let bc = run.config.boundary()?;
    let cfg = expansion_solver(&run.config, 96, 40)?;
    let two_l_max = run.config.two_l_max();
    let data = InitialData::from_config(&run.config, two_l_max, width)?;
    eprintln!("regime: {} (m = {})", regime_tag(&params), params.m());
    let spectra = run.timed("sweep", || sweep_arcs(&params, &bc, two_l_max, &cfg))?;
    let state = run.timed("projection", || project_initial_data(&spectra, &data.refs()))?;
    Ok((params, cfg, state))
}

fn expansion_meta(params: &PhysicalParams, cfg: &SolverConfig, state: &EvolutionState) -> Value {
    json!({
        "params": params_meta(params),
        "bc": state.bc.to_string(),
        "solver": solver_meta(cfg),
        "reconstruction_error": state.modes.iter().map(|m| m.reconstruction_error).collect::<Vec<_>>(),
    })
}

pub fn evolve(config: RunConfig) -> Result<(), Failure> {
    let times = finite_list("times", config.times.as_ref())?;
    if times.iter().any(|&t| t < 0.0) {
        return Err(Failure::config("times must be non-negative"));
    }
    let mut run = Run::new("evolve", config);
    let (params, cfg, state) = expansion(&mut run, 0.35)?;
    let chi = run.timed("chirality", || ChiralityMatrices::new(&state));
    let mut table = Table::new(&["t", "charge", "chiral_observable", "cesaro_running_average"]);
    for &t in &times {
        let now = evolution::evolve(&state, t);
        let obs = chi.observable(&now);
        let running = if t > 0.0 { cesaro_average(&state, &chi, t, CesaroMethod::ClosedForm)? } else { obs };
        table.push(vec![num(t), num(now.charge()), num(obs), num(running)]);
    }
    let mut meta = expansion_meta(&params, &cfg, &state);
    meta["max_diagonal_chirality"] = json!(chi.max_diagonal());
    run.emit(&table, meta)?;
    run.finish()
}

pub fn equipartition(config: RunConfig) -> Result<(), Failure> {
    let horizons = finite_list("horizons", config.horizons.as_ref())?;
    if horizons.iter().any(|&t| t <= 0.0) {
        return Err(Failure::config("horizons must be positive"));
    }
    let mut run = Run::new("equipartition", config);
    let (params, cfg, state) = expansion(&mut run, 0.35)?;
    let chi = run.timed("chirality", || ChiralityMatrices::new(&state));
    let c = cesaro_bound(&state, &chi);
    let mut table = Table::new(&["T", "cesaro_average", "bound", "T_times_average"]);
    for &t in &horizons {
        let avg = cesaro_average(&state, &chi, t, CesaroMethod::ClosedForm)?;
        table.push(vec![num(t), num(avg), num(c / t), num(t * avg)]);
    }
    let mut meta = expansion_meta(&params, &cfg, &state);
    meta["bound_constant"] = json!(c);
    meta["max_diagonal_chirality"] = json!(chi.max_diagonal());
    run.emit(&table, meta)?;
    run.finish()
}

pub fn causal_compare(config: RunConfig) -> Result<(), Failure> {
    let times = finite_list("times", config.times.as_ref())?;
    let params = config.params()?;
    let bc_a = config.boundary()?;
    let bc_b = config.boundary_b()?;
    let rho0 = config.rho0.unwrap_or(0.2);
    let cfg = expansion_solver(&config, 256, 150)?;
    let two_l_max = config.two_l_max();
    let data = InitialData::from_config(&config, two_l_max, 0.1)?;
    eprintln!("regime: {} (m = {})", regime_tag(&params), params.m());
    let mut run = Run::new("causal-compare", config);
    let (sa, sb) = run.timed("sweep", || -> Result<_, Failure> {
        Ok((sweep_arcs(&params, &bc_a, two_l_max, &cfg)?, sweep_arcs(&params, &bc_b, two_l_max, &cfg)?))
    })?;
    let mut table = Table::new(&["t", "rho_max", "inside", "outside", "reconstruction_error"]);
    for &t in &times {
        let r = evolution::causal_compare(&data.refs(), &sa, &sb, rho0, t)?;
        table.push(vec![
            num(t),
            num(r.rho_max),
            num(r.inside),
            num(r.outside),
            num(r.reconstruction_error),
        ]);
    }
    let meta = json!({
        "params": params_meta(&params),
        "bc": bc_a.to_string(),
        "bc_b": bc_b.to_string(),
        "rho0": rho0,
        "solver": solver_meta(&cfg),
    });
    run.emit(&table, meta)?;
    run.finish()
}

pub fn kg(config: RunConfig) -> Result<(), Failure> {
    let alphas = finite_list("alphas", config.alphas.as_ref())?;
    let ls = config.ls.clone().unwrap_or_else(|| vec![0, 1, 2]);
    let thetas = match &config.thetas {
        Some(_) => finite_list("thetas", config.thetas.as_ref())?,
        None => (0..8).map(|k| k as f64 * PI / 8.0).collect(),
    };
    let n_basis = config.n_basis.unwrap_or(24);
    if let Some(&a) = alphas.iter().find(|&&a| a > ALPHA_UPPER) {
        return Err(Failure::regime(format!("alpha = {a} exceeds {ALPHA_UPPER}; the spectrum is unbounded below")));
    }
    let mut header: Vec<String> =
        ["alpha", "l", "classification", "boundary", "centre", "borderline", "spectrum"].map(String::from).to_vec();
    header.extend((0..thetas.len()).map(|k| format!("lowest_theta_{k}")));
    let mut table = Table::new(&header);
    let mut run = Run::new("kg", config);
    for &alpha in &alphas {
        for &l in &ls {
            let kg = KgParams::new(alpha, l)?;
            let w = bf_scalar::weyl_classify(kg)?;
            let class = if w.essentially_self_adjoint() { WeylClass::LimitPoint } else { WeylClass::LimitCircle };
            let extension = alpha > ALPHA_LOWER && alpha < ALPHA_UPPER;
            let lowest: Vec<f64> = if extension {
                thetas
                    .iter()
                    .map(|&th| Ok(bf_scalar::extension_spectrum(kg, th, n_basis, 1)?[0]))
                    .collect::<Result<_, Failure>>()?
            } else {
                let core = bf_scalar::assemble_hl(kg, n_basis, BoundaryTreatment::Core)?;
                vec![bf_scalar::generalized_eigenvalues(&core)?[0]; thetas.len()]
            };
            let mut row = vec![
                num(alpha),
                l.to_string(),
                class.tag().to_string(),
                w.boundary.tag().to_string(),
                w.centre.tag().to_string(),
                w.borderline.to_string(),
                if extension { "extension" } else { "core" }.to_string(),
            ];
            row.extend(lowest.iter().map(|&v| num(v)));
            table.push(row);
        }
    }
    let meta = json!({ "thetas": thetas, "n_basis": n_basis });
    run.emit(&table, meta)?;
    run.finish()
}

pub fn selftest(config: RunConfig) -> Result<(), Failure> {
    let suite = config.suite.clone().ok_or_else(|| Failure::config("missing suite name (harmonics|green)"))?;
    let seed = config.seed.unwrap_or(1);
    let checks = match suite.as_str() {
        "harmonics" => selftest::harmonics()?,
        "green" => selftest::green(seed)?,
        other => return Err(Failure::config(format!("unknown selftest suite '{other}' (harmonics|green)"))),
    };
    let mut table = Table::new(&["check", "value", "tolerance", "pass"]);
    let mut all = true;
    for c in &checks {
        let pass = c.passes();
        all &= pass;
        println!("{} {} (value {:.3e}, {} {:.1e})", if pass { "PASS" } else { "FAIL" }, c.name, c.value, if c.above { ">" } else { "<" }, c.tolerance);
        table.push(vec![c.name.clone(), num(c.value), num(c.tolerance), pass.to_string()]);
    }
    let mut run = Run::new("selftest", config);
    run.converged = all;
    run.emit(&table, json!({ "suite": suite, "seed": seed }))?;
    run.finish()?;
    if all {
        Ok(())
    } else {
        Err(Failure::numeric(format!("selftest suite '{suite}' failed")))
    }
}
