//! Quasi-static load stepping with a staggered phase-field/displacement
//! alternation.

use rayon::prelude::*;

use crate::constitutive::{psi_plus, update_history, MaterialParams};
use crate::error::{Error, Result};
use crate::fem::{
    apply_dirichlet, assemble_displacement, assemble_phase_field, element_gradients,
    element_strains, reaction_force, DirichletSet, DofMap, QuadHistory, QuadratureRule, NQ,
};
use crate::linalg::{cg_solve_from, CgOptions};
use crate::meshio::{entities_with_tag, Mesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadSchedule {
    pub v_max: f64,
    pub dv_coarse: f64,
    pub dv_fine: f64,
    pub switch_at: f64,
    pub max_inner: usize,
    pub stag_tol: f64,
}

impl LoadSchedule {
    /// Schedule of the symmetric three-point bending benchmark.
    pub fn three_point_bending() -> Self {
        LoadSchedule {
            v_max: 0.1,
            dv_coarse: 1e-3,
            dv_fine: 1e-4,
            switch_at: 3e-2,
            max_inner: 10,
            stag_tol: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.dv_fine > 0.0
            && self.dv_fine <= self.dv_coarse
            && self.switch_at > 0.0
            && self.switch_at < self.v_max
            && self.v_max.is_finite()
            && self.max_inner >= 1
            && self.stag_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "invalid load schedule {self:?}: need 0 < dv_fine <= dv_coarse, \
                 0 < switch_at < v_max, max_inner >= 1, stag_tol > 0"
            )))
        }
    }

    /// Applied displacements of every outer step, accumulated exactly as
    /// the driver does.
    pub fn increments(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut v = 0.0;
        while v < self.v_max {
            v += if v >= self.switch_at {
                self.dv_fine
            } else {
                self.dv_coarse
            };
            out.push(v);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn component(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BcKind {
    Zero,
    /// Prescribed value `-scale · vApp`.
    Ramp {
        scale: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletRule {
    pub tag: String,
    pub axis: Axis,
    pub kind: BcKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundaryConditions {
    pub rules: Vec<DirichletRule>,
}

impl BoundaryConditions {
    /// Left support holds `uy`, right support holds both components and
    /// the load line is pushed down by `vApp`.
    pub fn three_point_bending() -> Self {
        let rule = |tag: &str, axis, kind| DirichletRule {
            tag: tag.into(),
            axis,
            kind,
        };
        BoundaryConditions {
            rules: vec![
                rule("LeftSupport", Axis::Y, BcKind::Zero),
                rule("RightSupport", Axis::X, BcKind::Zero),
                rule("RightSupport", Axis::Y, BcKind::Zero),
                rule("LoadLine", Axis::Y, BcKind::Ramp { scale: 1.0 }),
            ],
        }
    }

    /// Resolves tags to dofs; unknown tags are lookup errors.
    pub fn resolve(&self, mesh: &Mesh) -> Result<ResolvedBcs> {
        let dofs = DofMap::vector(mesh.num_nodes());
        let mut entries = Vec::new();
        for rule in &self.rules {
            let ent = entities_with_tag(mesh, &rule.tag)?;
            for node in ent.nodes {
                entries.push((dofs.dof(node, rule.axis.component()), rule.kind));
            }
        }
        let resolved = ResolvedBcs { entries };
        // Surface conflicts (same dof, different rules) before the run starts.
        resolved.at(1.0)?;
        Ok(resolved)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedBcs {
    entries: Vec<(usize, BcKind)>,
}

impl ResolvedBcs {
    pub fn at(&self, v_app: f64) -> Result<DirichletSet> {
        DirichletSet::from_pairs(self.entries.iter().map(|&(dof, kind)| {
            let value = match kind {
                BcKind::Zero => 0.0,
                BcKind::Ramp { scale } => -scale * v_app,
            };
            (dof, value)
        }))
    }
}

/// Primary unknowns and history carried between load steps.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    /// Interleaved nodal displacements.
    pub u: Vec<f64>,
    pub s: Vec<f64>,
    pub h: QuadHistory,
    pub v_app: f64,
    pub step: usize,
}

impl FieldState {
    pub fn initial(mesh: &Mesh) -> Self {
        FieldState {
            u: vec![0.0; 2 * mesh.num_nodes()],
            s: vec![1.0; mesh.num_nodes()],
            h: QuadHistory::zeros(mesh.num_triangles()),
            v_app: 0.0,
            step: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverOptions {
    pub cg: CgOptions,
    /// Clamp `s` into `[0, 1]` after every phase-field solve.
    pub clamp_s: bool,
}

/// New phase field from the current history; `state` is not modified.
pub fn step_phase_field(
    state: &FieldState,
    mesh: &Mesh,
    m: &MaterialParams,
    cg: CgOptions,
) -> Result<Vec<f64>> {
    let (a, b) = assemble_phase_field(mesh, &state.h, m)?;
    let sol = cg_solve_from(&a, &b, state.s.clone(), cg)?;
    log::debug!("phase-field CG: {} iterations", sol.iterations);
    Ok(sol.x)
}

/// New displacement with the branch strain taken from `state.u`.
pub fn step_displacement(
    state: &FieldState,
    mesh: &Mesh,
    m: &MaterialParams,
    bcs: &ResolvedBcs,
    v_app: f64,
    cg: CgOptions,
) -> Result<Vec<f64>> {
    let (a, b) = assemble_displacement(mesh, &state.u, &state.s, m)?;
    let d = bcs.at(v_app)?;
    let (a, b) = apply_dirichlet(a, b, &d)?;
    let mut guess = state.u.clone();
    for (dof, v) in d.iter() {
        guess[dof] = v;
    }
    let sol = cg_solve_from(&a, &b, guess, cg)?;
    log::debug!("displacement CG: {} iterations", sol.iterations);
    Ok(sol.x)
}

/// `|a(s, s; H) − b(s)| / |b(s)|` for the phase-field form.
pub fn stag_residual(state: &FieldState, mesh: &Mesh, m: &MaterialParams) -> Result<f64> {
    let rule = QuadratureRule::degree2();
    let (gc, ls) = (m.gc, m.ls);
    let s = &state.s;
    let parts: Vec<(f64, f64)> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|e| {
            let g = element_gradients(mesh, e)?;
            let [i0, i1, i2] = mesh.triangles[e];
            // Differences against vertex 0 keep a constant field exactly constant.
            let (d1, d2) = (s[i1] - s[i0], s[i2] - s[i0]);
            let grad = [
                g.grads[1][0] * d1 + g.grads[2][0] * d2,
                g.grads[1][1] * d1 + g.grads[2][1] * d2,
            ];
            let mut a = gc * ls * (grad[0] * grad[0] + grad[1] * grad[1]) * g.area;
            let mut b = 0.0;
            let h = state.h.element(e);
            for q in 0..NQ {
                let [xi, et] = rule.points[q];
                let sq = s[i0] + xi * d1 + et * d2;
                let w = rule.weights[q] * 2.0 * g.area;
                a += w * (2.0 * h[q] * sq * sq + gc / ls * sq * sq);
                b += w * (gc / ls * sq);
            }
            Ok((a, b))
        })
        .collect::<Result<_>>()?;
    let a: f64 = parts.iter().map(|p| p.0).sum();
    let b: f64 = parts.iter().map(|p| p.1).sum();
    if b == 0.0 || !b.is_finite() {
        return Err(Error::DegenerateState(format!(
            "phase-field residual denominator is {b}"
        )));
    }
    Ok((a - b).abs() / b.abs())
}

/// `H ← max(H, ψ₊(ε(u)))` at every quadrature point.
pub fn update_history_field(state: &mut FieldState, mesh: &Mesh, m: &MaterialParams) -> Result<()> {
    let strains = element_strains(mesh, &state.u)?;
    let hist = state.h.as_mut_slice();
    hist.par_iter_mut()
        .zip(strains.par_iter())
        .try_for_each(|(h, eps)| -> Result<()> {
            let psi = psi_plus(*eps, m);
            for hq in h.iter_mut() {
                *hq = update_history(*hq, psi)?;
            }
            Ok(())
        })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LoadHistory {
    /// `(vApp, −Fy)` pairs, starting at `(0, 0)`.
    pub pairs: Vec<(f64, f64)>,
}

impl LoadHistory {
    pub fn peak(&self) -> Option<(usize, f64, f64)> {
        self.pairs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .map(|(i, &(v, l))| (i, v, l))
    }
}

/// Summary of one finished outer step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub v_app: f64,
    pub inner_iterations: usize,
    /// Residual measured at the start of the last inner iteration.
    pub residual: f64,
    pub converged: bool,
    pub load: f64,
    pub s_min: f64,
    pub s_max: f64,
}

/// Receives every finished load step.
pub trait StepSink {
    fn on_step(&mut self, mesh: &Mesh, report: &StepReport, state: &FieldState) -> Result<()>;
}

pub struct NullSink;

impl StepSink for NullSink {
    fn on_step(&mut self, _: &Mesh, _: &StepReport, _: &FieldState) -> Result<()> {
        Ok(())
    }
}

impl<A: StepSink, B: StepSink> StepSink for (A, B) {
    fn on_step(&mut self, mesh: &Mesh, report: &StepReport, state: &FieldState) -> Result<()> {
        self.0.on_step(mesh, report, state)?;
        self.1.on_step(mesh, report, state)
    }
}

impl<S: StepSink + ?Sized> StepSink for &mut S {
    fn on_step(&mut self, mesh: &Mesh, report: &StepReport, state: &FieldState) -> Result<()> {
        (**self).on_step(mesh, report, state)
    }
}

/// Keeps every report.
#[derive(Debug, Default)]
pub struct ReportLog {
    pub reports: Vec<StepReport>,
}

impl StepSink for ReportLog {
    fn on_step(&mut self, _: &Mesh, report: &StepReport, _: &FieldState) -> Result<()> {
        self.reports.push(*report);
        Ok(())
    }
}

/// Compares the history field of consecutive steps point by point.
#[derive(Debug, Default)]
pub struct IrreversibilityAudit {
    previous: Option<QuadHistory>,
    pub steps_checked: usize,
    /// `(step, element, point, before, after)` for every decrease seen.
    pub violations: Vec<(usize, usize, usize, f64, f64)>,
}

impl StepSink for IrreversibilityAudit {
    fn on_step(&mut self, _: &Mesh, report: &StepReport, state: &FieldState) -> Result<()> {
        if let Some(prev) = &self.previous {
            for (e, (now, before)) in state.h.as_slice().iter().zip(prev.as_slice()).enumerate() {
                for q in 0..NQ {
                    if now[q] < before[q] {
                        self.violations.push((report.step, e, q, before[q], now[q]));
                    }
                }
            }
            self.steps_checked += 1;
        }
        self.previous = Some(state.h.clone());
        Ok(())
    }
}

/// Everything the driver needs besides the schedule.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub mesh: &'a Mesh,
    pub material: MaterialParams,
    pub bcs: ResolvedBcs,
    pub load_tag: String,
    pub options: SolverOptions,
}

fn wrap(step: usize, inner: usize) -> impl Fn(Error) -> Error {
    move |e| Error::Stagger {
        step,
        inner,
        source: Box::new(e),
    }
}

/// Runs one inner alternation at the state's current `v_app`.
fn inner_loop(
    p: &Problem,
    sched: &LoadSchedule,
    state: &mut FieldState,
) -> Result<(usize, f64, bool)> {
    let (mesh, m, cg) = (p.mesh, &p.material, p.options.cg);
    let mut last = f64::NAN;
    for inner in 1..=sched.max_inner {
        let err = wrap(state.step, inner);
        let residual = stag_residual(state, mesh, m).map_err(&err)?;
        let mut s = step_phase_field(state, mesh, m, cg).map_err(&err)?;
        if p.options.clamp_s {
            s.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        }
        state.s = s;
        state.u = step_displacement(state, mesh, m, &p.bcs, state.v_app, cg).map_err(&err)?;
        update_history_field(state, mesh, m).map_err(&err)?;
        last = residual;
        if residual < sched.stag_tol {
            return Ok((inner, residual, true));
        }
    }
    Ok((sched.max_inner, last, false))
}

/// Drives the load from zero to `v_max`, reporting each step to `sink`.
pub fn run_load_stepping(
    p: &Problem,
    sched: &LoadSchedule,
    sink: &mut dyn StepSink,
) -> Result<LoadHistory> {
    sched.validate()?;
    let mut state = FieldState::initial(p.mesh);
    let mut history = LoadHistory {
        pairs: vec![(0.0, 0.0)],
    };
    let mut unconverged = 0;
    while state.v_app < sched.v_max {
        state.step += 1;
        state.v_app += if state.v_app >= sched.switch_at {
            sched.dv_fine
        } else {
            sched.dv_coarse
        };

        let (inner_iterations, residual, converged) = inner_loop(p, sched, &mut state)?;
        if !converged {
            unconverged += 1;
            log::warn!(
                "step {} (vApp = {}): staggered residual {residual:e} above tolerance after {inner_iterations} iterations",
                state.step,
                state.v_app
            );
        }

        let [_, fy] = reaction_force(p.mesh, &p.load_tag, &state.u, &state.s, &p.material)
            .map_err(wrap(state.step, inner_iterations))?;
        let load = -fy;
        history.pairs.push((state.v_app, load));

        let (s_min, s_max) = state
            .s
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let report = StepReport {
            step: state.step,
            v_app: state.v_app,
            inner_iterations,
            residual,
            converged,
            load,
            s_min,
            s_max,
        };
        log::info!(
            "step {:4} vApp {:.5e} load {:.6e} inner {:2} residual {:.3e} s in [{:.4}, {:.4}]",
            report.step,
            report.v_app,
            report.load,
            report.inner_iterations,
            report.residual,
            report.s_min,
            report.s_max
        );
        sink.on_step(p.mesh, &report, &state)?;
    }
    if unconverged > 0 {
        log::warn!("{unconverged} load steps ended without staggered convergence");
    }
    Ok(history)
}
