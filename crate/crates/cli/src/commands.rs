//! Subcommand bodies. Each returns a process exit code and writes its
//! human-readable output to the supplied writer.

use std::fs;
use std::io::Write;
use std::path::Path;

use pffrac_core::linalg::CgOptions;
use pffrac_core::meshio::{entities_with_tag, parse_msh, validate, Mesh};
use pffrac_core::output::OutputSink;
use pffrac_core::stagger::{
    run_load_stepping, FieldState, NullSink, Problem, SolverOptions, StepReport, StepSink,
};
use pffrac_core::verify::{run_checks, Fault};
use pffrac_core::Error;

use crate::config::{ConfigError, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_MESH: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_MESH_FINDINGS: i32 = 5;

/// Overrides taken from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub threads: Option<usize>,
    pub out_dir: Option<std::path::PathBuf>,
}

fn read_mesh(path: &Path) -> Result<Mesh, String> {
    let bytes = fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_msh(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

struct Progress<'w> {
    out: &'w mut (dyn Write + Send),
}

impl StepSink for Progress<'_> {
    fn on_step(&mut self, _: &Mesh, r: &StepReport, _: &FieldState) -> pffrac_core::Result<()> {
        // Progress is best effort; a closed stdout must not abort the run.
        let _ = writeln!(
            self.out,
            "step {:4}  vApp {:.6e}  inner {:2}{}  residual {:.3e}  load {:.6e}",
            r.step,
            r.v_app,
            r.inner_iterations,
            if r.converged { " " } else { "*" },
            r.residual,
            r.load
        );
        Ok(())
    }
}

fn config_error(out: &mut dyn Write, err: &ConfigError) -> i32 {
    let _ = writeln!(out, "error: config: {err}");
    EXIT_CONFIG
}

/// Mesh-related failures map to exit 3, everything else to exit 4.
fn runtime_exit(err: &Error) -> i32 {
    match err.root() {
        Error::Lookup { .. }
        | Error::Parse { .. }
        | Error::UnsupportedFormat(_)
        | Error::Integrity(_)
        | Error::Geometry { .. } => EXIT_MESH,
        _ => EXIT_SOLVER,
    }
}

pub fn cmd_run(config_path: &Path, opts: &RunOptions, out: &mut (dyn Write + Send)) -> i32 {
    cmd_run_with(config_path, opts, out, &mut NullSink)
}

/// [`cmd_run`] with an extra sink that sees every finished step.
pub fn cmd_run_with(
    config_path: &Path,
    opts: &RunOptions,
    out: &mut (dyn Write + Send),
    extra: &mut (dyn StepSink + Send),
) -> i32 {
    let cfg = match RunConfig::load(config_path).and_then(|c| c.resolve(config_path)) {
        Ok(c) => c,
        Err(e) => return config_error(out, &e),
    };

    let mesh = match read_mesh(&cfg.mesh_path) {
        Ok(m) => m,
        Err(msg) => {
            let _ = writeln!(out, "error: mesh: {msg}");
            return EXIT_MESH;
        }
    };
    let bcs = match cfg.bcs.resolve(&mesh) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(out, "error: dirichlet: {e}");
            return runtime_exit(&e);
        }
    };
    if let Err(e) = entities_with_tag(&mesh, &cfg.raw.load_tag) {
        let _ = writeln!(out, "error: load_tag: {e}");
        return EXIT_MESH;
    }

    let out_dir = opts
        .out_dir
        .clone()
        .unwrap_or_else(|| cfg.raw.out_dir.clone());
    let problem = Problem {
        mesh: &mesh,
        material: cfg.material.clone(),
        bcs,
        load_tag: cfg.raw.load_tag.clone(),
        options: SolverOptions {
            cg: CgOptions::default(),
            clamp_s: cfg.raw.clamp_s,
        },
    };

    let pool = match opts.threads {
        Some(0) => {
            let _ = writeln!(out, "error: --threads must be at least 1");
            return EXIT_CONFIG;
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(out, "error: thread pool: {e}");
            return EXIT_SOLVER;
        }
    };

    let _ = writeln!(
        out,
        "mesh {}: {} nodes, {} triangles; writing to {}",
        cfg.mesh_path.display(),
        mesh.num_nodes(),
        mesh.num_triangles(),
        out_dir.display()
    );
    let result = pool.install(|| {
        let files = OutputSink::create(&out_dir, cfg.raw.snapshot_stride)?;
        let mut sink = (files, (Progress { out: &mut *out }, extra));
        run_load_stepping(&problem, &cfg.schedule, &mut sink)
    });
    match result {
        Ok(history) => {
            if let Some((_, v, load)) = history.peak() {
                let _ = writeln!(
                    out,
                    "done: {} steps, peak load {load:.6e} at vApp {v:.6e}",
                    history.pairs.len() - 1
                );
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            runtime_exit(&e)
        }
    }
}

pub fn cmd_mesh_info(mesh_path: &Path, out: &mut dyn Write) -> i32 {
    let mesh = match read_mesh(mesh_path) {
        Ok(m) => m,
        Err(msg) => {
            let _ = writeln!(out, "error: {msg}");
            return EXIT_MESH;
        }
    };
    let (lo, hi) = mesh.bounding_box();
    let _ = writeln!(out, "nodes:     {}", mesh.num_nodes());
    let _ = writeln!(out, "triangles: {}", mesh.num_triangles());
    let _ = writeln!(out, "edges:     {}", mesh.boundary_edges.len());
    let _ = writeln!(out, "points:    {}", mesh.tagged_points.len());
    let _ = writeln!(
        out,
        "bbox:      [{}, {}] x [{}, {}]",
        lo[0], hi[0], lo[1], hi[1]
    );
    if mesh.reoriented > 0 {
        let _ = writeln!(out, "reoriented {} clockwise triangles", mesh.reoriented);
    }
    let _ = writeln!(out, "physical names:");
    for ((dim, tag), name) in &mesh.physical_names {
        let count = match dim {
            0 => mesh.tagged_points.iter().filter(|p| p.tag == *tag).count(),
            1 => mesh.boundary_edges.iter().filter(|e| e.tag == *tag).count(),
            _ => mesh.num_triangles(),
        };
        let what = match dim {
            0 => "points",
            1 => "edges",
            _ => "triangles",
        };
        let _ = writeln!(out, "  {name:<16} dim {dim} tag {tag:<4} {count} {what}");
    }
    let report = validate(&mesh);
    if report.passed() {
        let _ = writeln!(out, "validation: ok");
        EXIT_OK
    } else {
        let _ = writeln!(out, "validation: {} findings", report.findings.len());
        for f in &report.findings {
            let _ = writeln!(out, "  {f}");
        }
        EXIT_MESH_FINDINGS
    }
}

pub fn cmd_verify(fault: Fault, out: &mut dyn Write) -> i32 {
    let checks = match run_checks(fault) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            return EXIT_VERIFY_FAILED;
        }
    };
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        let _ = writeln!(
            out,
            "{}  {:<width$}  {:.3e} (tol {:.0e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let _ = writeln!(
        out,
        "{} of {} checks passed",
        checks.len() - failed,
        checks.len()
    );
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}
