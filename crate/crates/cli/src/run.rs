//! Subcommand execution. Every subcommand produces one or more tables and
//! a plain-text summary; nothing is written until [`write_outputs`].

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use bqc_core::blend::BlendFunction;
use bqc_core::energy::EnergyModel;
use bqc_core::experiments::{
    audit_table, convergence_study, critical_strain_study, fit_rate, fit_table, ghost_force_row, ghost_table,
    modeling_audit_sweep, patch_test, FitVariable, GroupFit, StateSampler, SweepSpec,
};
use bqc_core::lattice::{diff1, dual_norm, Deformation, LatticeConfig};
use bqc_core::sampling::{random_smooth_displacement, seeded_rng};
use bqc_core::solve::equilibrate;
use bqc_core::table::{format_float, Table};
use bqc_core::BqcError;

use crate::config::{RunConfig, Subcommand};

/// Patch-test threshold on `‖δΦ(y^F)‖_{U^{-1,p}}`.
pub const PATCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    /// Name of the failing operation.
    pub operation: String,
    pub message: String,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.operation, self.message)
    }
}

impl std::error::Error for RunError {}

fn op(operation: &str) -> impl Fn(BqcError) -> RunError + '_ {
    move |e| RunError {
        operation: operation.to_string(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub tables: Vec<(PathBuf, Table)>,
    /// Two-column plot files, filled only when `emit_plot_data` is set.
    pub plots: Vec<(PathBuf, String)>,
    pub summary: Vec<String>,
    /// Set when a sweep stopped early; the tables hold the rows before it.
    pub failure: Option<RunError>,
}

impl RunOutput {
    fn new() -> Self {
        Self {
            tables: Vec::new(),
            plots: Vec::new(),
            summary: Vec::new(),
            failure: None,
        }
    }

    fn line(&mut self, key: &str, value: impl fmt::Display) {
        self.summary.push(format!("{key} = {value}"));
    }
}

/// `<stem><suffix>.<ext>` next to the main output.
fn sibling(output: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = output.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    output.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn add_plot(out: &mut RunOutput, cfg: &RunConfig, table_path: &Path, table: &Table, x: &str, y: &str) {
    if cfg.emit_plot_data {
        if let Some(text) = table.plot_data(x, y) {
            out.plots.push((table_path.with_extension("dat"), text));
        }
    }
}

fn single_blend(cfg: &RunConfig) -> Result<BlendFunction, RunError> {
    cfg.blend
        .build(cfg.n, &cfg.blend.shape, cfg.blend.k)
        .map_err(op("blend"))
}

fn single_model(cfg: &RunConfig) -> Result<(BlendFunction, EnergyModel), RunError> {
    let blend = single_blend(cfg)?;
    let model = EnergyModel::from_kind(cfg.model, cfg.potential.clone(), &blend).map_err(op("model"))?;
    Ok((blend, model))
}

fn sweep_spec(cfg: &RunConfig) -> SweepSpec {
    let mut solve = cfg.solve;
    solve.compute_coercivity = false;
    SweepSpec {
        model: cfg.model,
        potential: cfg.potential.clone(),
        n_list: cfg.n_list.clone(),
        k_list: cfg.k_list.clone(),
        shapes: cfg.shapes.clone(),
        strain_f: cfg.strain_f,
        load: cfg.load,
        atomistic_width: cfg.blend.atomistic_width,
        p: cfg.p,
        solve,
    }
}

fn describe_fit(f: &GroupFit) -> String {
    let (variable, held) = match f.variable {
        FitVariable::K => ("k", "n"),
        FitVariable::Epsilon => ("eps", "k"),
    };
    format!(
        "slope_vs_{variable} ({held} = {}, shape = {}) = {} (r_squared = {})",
        f.fixed,
        f.shape,
        format_float(f.fit.slope),
        format_float(f.fit.r_squared)
    )
}

pub fn execute(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    let mut out = RunOutput::new();
    out.line("subcommand", cfg.subcommand);
    match cfg.subcommand {
        Subcommand::Energy => energy(cfg, &mut out)?,
        Subcommand::Equilibrate => equilibrium(cfg, &mut out)?,
        Subcommand::GhostForce => ghost_force(cfg, &mut out)?,
        Subcommand::CriticalStrain => critical(cfg, &mut out)?,
        Subcommand::ModelingAudit => audit(cfg, &mut out)?,
        Subcommand::Convergence => convergence(cfg, &mut out)?,
        Subcommand::PatchTest => patch(cfg, &mut out)?,
    }
    Ok(out)
}

fn energy(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let (blend, model) = single_model(cfg)?;
    let config = blend.config();
    let mut y = Deformation::uniform(config, cfg.strain_f).map_err(op("state"))?;
    if cfg.state_amplitude > 0.0 {
        let seed = cfg.seed.expect("validated: random states carry a seed");
        let u = random_smooth_displacement(config, cfg.state_modes, cfg.state_amplitude, &mut seeded_rng(seed));
        y = y.with_displacement(u).map_err(op("state"))?;
    }
    let value = model.value(&y).map_err(op("energy"))?;
    let g = model.first_variation(&y).map_err(op("first_variation"))?;
    let forces = g.site_forces();
    let strains = diff1(&y);
    let mut t = Table::new(
        "energy",
        &["site", "x", "strain", "gamma", "alpha", "beta", "stress", "force"],
    );
    for i in 0..cfg.n {
        t.push(vec![
            i.into(),
            config.coordinate(i).into(),
            strains[i].into(),
            blend.gamma()[i].into(),
            model.alpha()[i].into(),
            model.beta()[i].into(),
            g.strain_rep()[i].into(),
            forces[i].into(),
        ]);
    }
    out.line("model", model.kind());
    out.line("energy", format_float(value));
    out.line("force_dual_norm", format_float(dual_norm(&g, cfg.p).map_err(op("dual_norm"))?));
    out.line("min_strain", format_float(y.min_strain()));
    add_plot(out, cfg, &cfg.output, &t, "x", "force");
    out.tables.push((cfg.output.clone(), t));
    Ok(())
}

fn equilibrium(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let (blend, model) = single_model(cfg)?;
    let config: LatticeConfig = blend.config();
    let load = cfg.load.sample(config, blend.center());
    let y0 = Deformation::uniform(config, cfg.strain_f).map_err(op("state"))?;
    let (y, report) = equilibrate(&model, &load, &y0, &cfg.solve).map_err(op("equilibrate"))?;
    let strains = diff1(&y);
    let mut t = Table::new("equilibrium", &["site", "x", "displacement", "strain", "load"]);
    for (i, strain) in strains.iter().enumerate() {
        t.push(vec![
            i.into(),
            config.coordinate(i).into(),
            y.displacement().values()[i].into(),
            (*strain).into(),
            load.values()[i].into(),
        ]);
    }
    out.line("model", model.kind());
    out.line("iterations", report.iterations);
    out.line("residual", format_float(report.residual));
    if let Some(e) = report.energy_history.last() {
        out.line("total_energy", format_float(*e));
    }
    out.line("min_strain", format_float(y.min_strain()));
    out.line("halvings", report.halvings);
    out.line("shifted_steps", report.shifted_steps);
    if let Some(c) = report.coercivity {
        out.line("coercivity", format_float(c));
    }
    add_plot(out, cfg, &cfg.output, &t, "x", "strain");
    out.tables.push((cfg.output.clone(), t));
    Ok(())
}

fn ghost_force(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let mut rows = Vec::new();
    for shape in &cfg.shapes {
        for &k in &cfg.k_list {
            let blend = cfg.blend.build(cfg.n, shape, k).map_err(op("blend"))?;
            rows.push(
                ghost_force_row(cfg.model, &cfg.potential, &blend, cfg.strain_f, cfg.p).map_err(op("ghost_force"))?,
            );
        }
    }
    out.line("model", cfg.model);
    out.line("p", if cfg.p.is_infinite() { "inf".to_string() } else { cfg.p.to_string() });
    for r in &rows {
        out.summary.push(format!(
            "k = {} shape = {}: transition_dual_seminorm = {} ghost_dual_norm = {}",
            r.k,
            r.shape,
            format_float(r.transition_dual),
            format_float(r.ghost_dual_norm)
        ));
    }
    for shape in &cfg.shapes {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.shape == shape.name())
            .map(|r| (r.k as f64, r.alpha_seminorm))
            .collect();
        if let Ok(fit) = fit_rate(&pts) {
            out.summary.push(format!(
                "alpha_seminorm slope_vs_k (shape = {}) = {}",
                shape.name(),
                format_float(fit.slope)
            ));
        }
    }
    let t = ghost_table(&rows);
    add_plot(out, cfg, &cfg.output, &t, "k", "alpha_seminorm");
    out.tables.push((cfg.output.clone(), t));

    // per-site dual representation for the base blend
    let (blend, model) = single_model(cfg)?;
    let y = Deformation::uniform(blend.config(), cfg.strain_f).map_err(op("state"))?;
    let g = model.first_variation(&y).map_err(op("first_variation"))?;
    let forces = g.site_forces();
    let mut sites = Table::new("ghost_force_sites", &["site", "gamma", "alpha", "beta", "stress", "force"]);
    for (i, force) in forces.iter().enumerate() {
        sites.push(vec![
            i.into(),
            blend.gamma()[i].into(),
            model.alpha()[i].into(),
            model.beta()[i].into(),
            g.strain_rep()[i].into(),
            (*force).into(),
        ]);
    }
    out.tables.push((sibling(&cfg.output, "_sites", "csv"), sites));
    Ok(())
}

fn critical(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let study = critical_strain_study(&sweep_spec(cfg), cfg.critical_tol).map_err(op("critical_strain"))?;
    out.line("model", cfg.model);
    out.line("tol", format_float(cfg.critical_tol));
    for r in &study.rows {
        out.summary.push(format!(
            "n = {} k = {} shape = {}: f_star = {} f_star_cb = {} error = {}",
            r.n,
            r.k,
            r.shape,
            format_float(r.f_star),
            format_float(r.f_star_cb),
            format_float(r.error)
        ));
    }
    for f in &study.fits {
        out.summary.push(describe_fit(f));
    }
    let t = study.table();
    add_plot(out, cfg, &cfg.output, &t, "k", "error");
    out.tables.push((cfg.output.clone(), t));
    Ok(())
}

fn audit(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let blend = single_blend(cfg)?;
    let models = cfg
        .models
        .iter()
        .map(|&kind| EnergyModel::from_kind(kind, cfg.potential.clone(), &blend))
        .collect::<Result<Vec<_>, _>>()
        .map_err(op("model"))?;
    let sampler = StateSampler {
        max_modes: cfg.state_modes,
        ..StateSampler::default()
    };
    let seed = cfg.seed.expect("validated: audits carry a seed");
    let rows = modeling_audit_sweep(&models, cfg.samples, seed, &cfg.p_list, &sampler).map_err(op("modeling_audit"))?;
    let violations = rows.iter().filter(|r| !r.holds()).count();
    let ratio = rows
        .iter()
        .map(|r| if r.audit.rhs > 0.0 { r.audit.lhs / r.audit.rhs } else { 0.0 })
        .fold(0.0_f64, f64::max);
    out.line("audits", rows.len());
    out.line("violations", violations);
    out.line("max_lhs_over_rhs", format_float(ratio));
    out.tables.push((cfg.output.clone(), audit_table(&rows)));
    Ok(())
}

fn convergence(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let study = convergence_study(&sweep_spec(cfg)).map_err(op("convergence"))?;
    out.line("model", cfg.model);
    out.line("rows", study.rows.len());
    for f in &study.fits {
        out.summary.push(describe_fit(f));
    }
    let t = study.table();
    add_plot(out, cfg, &cfg.output, &t, "k", "error_u12");
    out.tables.push((cfg.output.clone(), t));
    if !study.fits.is_empty() {
        out.tables.push((sibling(&cfg.output, "_fits", "csv"), fit_table(&study.fits)));
    }
    if let Some((index, e)) = study.failure {
        out.failure = Some(RunError {
            operation: "convergence".into(),
            message: format!("sweep point {index}: {e}"),
        });
    }
    Ok(())
}

fn patch(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let (_, model) = single_model(cfg)?;
    let results = patch_test(&model, &cfg.strain_list, cfg.p).map_err(op("patch_test"))?;
    let mut t = Table::new("patch_test", &["f", "ghost_dual_norm"]);
    for &(f, g) in &results {
        t.push(vec![f.into(), g.into()]);
    }
    let worst = results.iter().map(|r| r.1).fold(0.0_f64, f64::max);
    out.line("model", model.kind());
    out.line("max_ghost_dual_norm", format_float(worst));
    if worst <= PATCH_TOL {
        out.summary.push("ghost_dual_norm ≤ 1e-12".into());
    } else {
        out.summary.push(format!("ghost_dual_norm = {} > 1e-12", format_float(worst)));
    }
    add_plot(out, cfg, &cfg.output, &t, "f", "ghost_dual_norm");
    out.tables.push((cfg.output.clone(), t));
    Ok(())
}

/// Writes every table and plot file; the summary goes to the caller.
pub fn write_outputs(out: &RunOutput) -> Result<(), RunError> {
    let io = |path: &Path, e: std::io::Error| RunError {
        operation: "write_output".into(),
        message: format!("{}: {e}", path.display()),
    };
    for (path, table) in &out.tables {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        }
        fs::write(path, table.to_csv()).map_err(|e| io(path, e))?;
    }
    for (path, text) in &out.plots {
        fs::write(path, text).map_err(|e| io(path, e))?;
    }
    Ok(())
}
