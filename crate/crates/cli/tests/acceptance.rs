//! Acceptance criteria. Each test prints one `criterion N ...: PASS|FAIL`
//! line before asserting.
//!
//! The symmetric coarse run is shared by criteria 6, 7 and 9 and executes
//! once per test binary. The full-resolution symmetric run and the three-hole run are
//! `#[ignore]`d; run them with `cargo test --release -p pffrac --test
//! acceptance -- --ignored`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pffrac::commands::{cmd_run, cmd_run_with, RunOptions};
use pffrac_core::constitutive::{psi_plus, stress, MaterialParams};
use pffrac_core::fem::{
    apply_dirichlet, assemble_displacement, assemble_phase_field, DirichletSet, QuadHistory,
    QuadratureRule,
};
use pffrac_core::linalg::{cg_solve, CgOptions};
use pffrac_core::meshio::{parse_msh, structured_unit_square, Mesh};
use pffrac_core::output::{read_csv, CSV_NAME};
use pffrac_core::stagger::{FieldState, IrreversibilityAudit, StepReport, StepSink};
use pffrac_core::tensors::{PlanarMode, SymTensor2};
use pffrac_core::verify::{patch_test, psi_minus};

fn report(n: u32, what: &str, passed: bool, detail: String) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    println!("criterion {n} ({what}): {verdict}  {detail}");
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> PathBuf {
    root().join("fixtures/meshes").join(name)
}

fn load_mesh(path: &Path) -> Mesh {
    parse_msh(&fs::read(path).unwrap()).unwrap()
}

/// E = 20.8, ν = 0.3, plane strain: λ = 12, μ = 8.
fn reference(eta: f64) -> MaterialParams {
    MaterialParams::new(20.8, 0.3, 5e-4, 0.03, eta, PlanarMode::PlaneStrain).unwrap()
}

/// `½ ε:Cε` from the Lamé form, independent of the tensor code.
fn elastic_energy(e: SymTensor2, lambda: f64, mu: f64) -> f64 {
    let t = e.xx + e.yy;
    0.5 * lambda * t * t + mu * (e.xx * e.xx + e.yy * e.yy + 2.0 * e.xy * e.xy)
}

fn lame(e: f64, nu: f64) -> (f64, f64) {
    (
        e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
        e / (2.0 * (1.0 + nu)),
    )
}

fn random_strain(rng: &mut ChaCha8Rng) -> SymTensor2 {
    loop {
        let e = SymTensor2::new(
            rng.gen_range(-1e-3..1e-3),
            rng.gen_range(-1e-3..1e-3),
            rng.gen_range(-1e-3..1e-3),
        );
        let norm = (e.xx * e.xx + e.yy * e.yy + 2.0 * e.xy * e.xy).sqrt();
        if (e.xx + e.yy).abs() > 0.1 * norm {
            return e;
        }
    }
}

#[test]
fn criterion_01_patch_test() {
    let m = reference(0.0);
    let start = Instant::now();
    let r = patch_test(8, &m, [1e-3, 2e-3, -1e-3, 5e-4, 1e-3, 3e-3]).unwrap();
    let elapsed = start.elapsed();
    let passed =
        r.nodal_error <= 1e-10 && r.stress_spread <= 1e-10 && elapsed < Duration::from_secs(1);
    report(
        1,
        "elastic patch test",
        passed,
        format!(
            "nodal error {:.3e}, stress spread {:.3e} (tol 1e-10), {:.3} s",
            r.nodal_error,
            r.stress_spread,
            elapsed.as_secs_f64()
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_02_energy_split_identity() {
    let m = reference(0.0);
    let (lambda, mu) = lame(m.e, m.nu);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let (mut worst_t, mut worst_c, mut n_t, mut n_c) = (0.0_f64, 0.0_f64, 0, 0);
    for _ in 0..1000 {
        let e = random_strain(&mut rng);
        let w = elastic_energy(e, lambda, mu);
        let defect = (psi_plus(e, &m) + psi_minus(e, &m) - w).abs() / w;
        if e.xx + e.yy >= 0.0 {
            worst_t = worst_t.max(defect);
            n_t += 1;
        } else {
            worst_c = worst_c.max(defect);
            n_c += 1;
        }
    }
    let elapsed = start.elapsed();
    let passed =
        worst_t.max(worst_c) <= 1e-12 && n_t > 0 && n_c > 0 && elapsed < Duration::from_secs(1);
    report(
        2,
        "energy-split identity",
        passed,
        format!(
            "max relative defect {:.3e} over {n_t} tensile, {:.3e} over {n_c} compressive samples (tol 1e-12)",
            worst_t, worst_c
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_03_stress_energy_gradient() {
    let m = reference(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let start = Instant::now();
    let (mut worst_t, mut worst_c) = (0.0_f64, 0.0_f64);
    for _ in 0..200 {
        let e = random_strain(&mut rng);
        let s: f64 = rng.gen_range(0.0..1.0);
        let energy = |x: SymTensor2| s * s * psi_plus(x, &m) + psi_minus(x, &m);
        let sigma = stress(e, e, s, &m);
        let h = 1e-6 * e.xx.abs().max(e.yy.abs()).max(e.xy.abs());
        let fd_xx = (energy(e + SymTensor2::new(h, 0.0, 0.0))
            - energy(e - SymTensor2::new(h, 0.0, 0.0)))
            / (2.0 * h);
        let fd_yy = (energy(e + SymTensor2::new(0.0, h, 0.0))
            - energy(e - SymTensor2::new(0.0, h, 0.0)))
            / (2.0 * h);
        // The shear strain enters the energy through ε_xy and ε_yx.
        let fd_xy = (energy(e + SymTensor2::new(0.0, 0.0, h))
            - energy(e - SymTensor2::new(0.0, 0.0, h)))
            / (4.0 * h);
        let scale = sigma.xx.abs().max(sigma.yy.abs()).max(sigma.xy.abs());
        let dev = (fd_xx - sigma.xx)
            .abs()
            .max((fd_yy - sigma.yy).abs())
            .max((fd_xy - sigma.xy).abs())
            / scale;
        if e.xx + e.yy >= 0.0 {
            worst_t = worst_t.max(dev);
        } else {
            worst_c = worst_c.max(dev);
        }
    }
    let elapsed = start.elapsed();
    let passed = worst_t.max(worst_c) <= 1e-6 && elapsed < Duration::from_secs(5);
    report(
        3,
        "stress-energy gradient",
        passed,
        format!(
            "max relative deviation {:.3e} tensile, {:.3e} compressive (tol 1e-6)",
            worst_t, worst_c
        ),
    );
    assert!(passed);
}

fn homogeneous_deviation(mesh: &Mesh, m: &MaterialParams) -> f64 {
    let h = m.gc / (2.0 * m.ls);
    let history = QuadHistory::filled(mesh.num_triangles(), h);
    let (a, b) = assemble_phase_field(mesh, &history, m).unwrap();
    let cg = CgOptions {
        rel_tol: 1e-14,
        max_iter: None,
    };
    let s = cg_solve(&a, &b, cg).unwrap().x;
    let oracle = (m.gc / m.ls) / (2.0 * h + m.gc / m.ls);
    s.iter().map(|v| (v - oracle).abs()).fold(0.0, f64::max)
}

#[test]
fn criterion_04_homogeneous_phase_field() {
    let m = reference(1e-15);
    let meshes = [
        ("unit square 7x7", structured_unit_square(7).unwrap()),
        (
            "coarse beam",
            load_mesh(&fixture("tpb_symmetric_coarse_v41.msh")),
        ),
        (
            "three-hole beam",
            load_mesh(&fixture("tpb_asym_b_coarse_v22.msh")),
        ),
    ];
    let mut passed = true;
    let mut detail = Vec::new();
    for (name, mesh) in &meshes {
        let dev = homogeneous_deviation(mesh, &m);
        passed &= dev <= 1e-10;
        detail.push(format!("{name} {dev:.3e}"));
    }
    report(
        4,
        "homogeneous phase field",
        passed,
        format!("max |s - 0.5|: {} (tol 1e-10)", detail.join(", ")),
    );
    assert!(passed);
}

/// Harmonic and divergence free, so it solves the Navier equations with no
/// body force for any Lamé pair.
fn manufactured(p: [f64; 2]) -> [f64; 2] {
    let (x, y) = (p[0], p[1]);
    [x.exp() * y.sin(), x.exp() * y.cos()]
}

fn l2_error(n: usize, m: &MaterialParams) -> f64 {
    let mesh = structured_unit_square(n).unwrap();
    let nn = mesh.num_nodes();
    let (k, rhs) = assemble_displacement(&mesh, &vec![0.0; 2 * nn], &vec![1.0; nn], m).unwrap();
    let mut bc = DirichletSet::new();
    for edge in &mesh.boundary_edges {
        for node in edge.nodes {
            let v = manufactured(mesh.nodes[node]);
            bc.insert(2 * node, v[0]).unwrap();
            bc.insert(2 * node + 1, v[1]).unwrap();
        }
    }
    let (k, rhs) = apply_dirichlet(k, rhs, &bc).unwrap();
    let cg = CgOptions {
        rel_tol: 1e-13,
        max_iter: None,
    };
    let u = cg_solve(&k, &rhs, cg).unwrap().x;

    let rule = QuadratureRule::degree5();
    let mut sum = 0.0;
    for (e, t) in mesh.triangles.iter().enumerate() {
        let x = mesh.triangle_coords(e);
        let jac = 2.0 * mesh.triangle_area(e);
        for q in 0..rule.len() {
            let l = rule.shape_values(q);
            let p = [
                l[0] * x[0][0] + l[1] * x[1][0] + l[2] * x[2][0],
                l[0] * x[0][1] + l[1] * x[1][1] + l[2] * x[2][1],
            ];
            let exact = manufactured(p);
            let mut err = 0.0;
            for c in 0..2 {
                let uh: f64 = (0..3).map(|i| l[i] * u[2 * t[i] + c]).sum();
                err += (uh - exact[c]).powi(2);
            }
            sum += rule.weights[q] * jac * err;
        }
    }
    sum.sqrt()
}

#[test]
fn criterion_05_convergence_order() {
    let m = reference(0.0);
    let errors: Vec<f64> = [8, 16, 32].iter().map(|&n| l2_error(n, &m)).collect();
    let ratios = [errors[0] / errors[1], errors[1] / errors[2]];
    let passed = ratios.iter().all(|r| (3.5..=4.5).contains(r));
    report(
        5,
        "L2 convergence order",
        passed,
        format!(
            "errors {:.3e}, {:.3e}, {:.3e}; ratios {:.3}, {:.3} (range [3.5, 4.5])",
            errors[0], errors[1], errors[2], ratios[0], ratios[1]
        ),
    );
    assert!(passed);
}

/// Tracks the crack band `s < 0.05` over a run.
struct BandTracker {
    tip: [f64; 2],
    center_x: f64,
    /// Step, vApp and distance from the notch tip of the first band node.
    nucleation: Option<(usize, f64, f64)>,
    final_band: Vec<[f64; 2]>,
    reports: Vec<StepReport>,
}

const BAND: f64 = 0.05;

impl BandTracker {
    fn new(tip: [f64; 2], center_x: f64) -> Self {
        BandTracker {
            tip,
            center_x,
            nucleation: None,
            final_band: Vec::new(),
            reports: Vec::new(),
        }
    }

    fn y_max(&self) -> f64 {
        self.final_band
            .iter()
            .map(|p| p[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn x_spread(&self) -> f64 {
        self.final_band
            .iter()
            .map(|p| (p[0] - self.center_x).abs())
            .fold(0.0, f64::max)
    }

    fn centroid(&self) -> [f64; 2] {
        let n = self.final_band.len() as f64;
        let sx: f64 = self.final_band.iter().map(|p| p[0]).sum();
        let sy: f64 = self.final_band.iter().map(|p| p[1]).sum();
        [sx / n, sy / n]
    }
}

impl StepSink for BandTracker {
    fn on_step(
        &mut self,
        mesh: &Mesh,
        r: &StepReport,
        state: &FieldState,
    ) -> pffrac_core::Result<()> {
        self.final_band = state
            .s
            .iter()
            .zip(&mesh.nodes)
            .filter(|(s, _)| **s < BAND)
            .map(|(_, p)| *p)
            .collect();
        if self.nucleation.is_none() && !self.final_band.is_empty() {
            let d = self
                .final_band
                .iter()
                .map(|p| ((p[0] - self.tip[0]).powi(2) + (p[1] - self.tip[1]).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            self.nucleation = Some((r.step, r.v_app, d));
        }
        self.reports.push(*r);
        Ok(())
    }
}

struct Run {
    code: i32,
    out_dir: PathBuf,
    band: BandTracker,
    audit: IrreversibilityAudit,
    elapsed: Duration,
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"))
        .join("acceptance")
        .join(name);
    if dir.exists() {
        fs::remove_dir_all(&dir).unwrap();
    }
    dir
}

fn tracked_run(config: &str, name: &str, threads: usize, tip: [f64; 2], center_x: f64) -> Run {
    let out_dir = scratch(name);
    let opts = RunOptions {
        threads: Some(threads),
        out_dir: Some(out_dir.clone()),
    };
    let mut sinks = (
        BandTracker::new(tip, center_x),
        IrreversibilityAudit::default(),
    );
    let mut progress = Vec::new();
    let start = Instant::now();
    let code = cmd_run_with(
        &root().join("configs").join(config),
        &opts,
        &mut progress,
        &mut sinks,
    );
    let elapsed = start.elapsed();
    fs::write(out_dir.join("progress.txt"), &progress).unwrap();
    Run {
        code,
        out_dir,
        band: sinks.0,
        audit: sinks.1,
        elapsed,
    }
}

const BEAM_TIP: [f64; 2] = [4.0, 0.4];

fn coarse_run() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| {
        tracked_run(
            "tpb_symmetric_coarse.json",
            "coarse_threads1",
            1,
            BEAM_TIP,
            4.0,
        )
    })
}

#[test]
fn criterion_06_irreversibility_audit() {
    let run = coarse_run();
    assert_eq!(run.code, 0);
    let passed = run.audit.violations.is_empty() && run.audit.steps_checked > 0;
    let first = run.audit.violations.first();
    report(
        6,
        "irreversibility audit",
        passed,
        format!(
            "{} steps compared, {} decreases{}",
            run.audit.steps_checked,
            run.audit.violations.len(),
            first.map_or(String::new(), |v| format!(", first {v:?}"))
        ),
    );
    assert!(passed);
}

/// Rises over the first half of the pre-peak branch, peaks strictly inside
/// the run and ends at or below half the peak.
fn curve_shape(pairs: &[(f64, f64)]) -> (bool, usize, f64, f64) {
    let (ipk, &(vpk, lpk)) = pairs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .unwrap();
    let rises = ipk >= 2 && pairs[..=ipk / 2 + 1].windows(2).all(|w| w[1].1 > w[0].1);
    let interior = ipk + 1 < pairs.len();
    let softens = pairs.last().unwrap().1 <= 0.5 * lpk;
    (rises && interior && softens, ipk, vpk, lpk)
}

/// Largest edge among triangles lying entirely within `half_width` of
/// `x = cx`.
fn central_band_size(mesh: &Mesh, cx: f64, half_width: f64) -> f64 {
    let mut worst = 0.0_f64;
    for e in 0..mesh.num_triangles() {
        let x = mesh.triangle_coords(e);
        if x.iter().any(|p| (p[0] - cx).abs() > half_width) {
            continue;
        }
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            worst = worst.max(((x[a][0] - x[b][0]).powi(2) + (x[a][1] - x[b][1]).powi(2)).sqrt());
        }
    }
    worst
}

#[test]
fn criterion_07_symmetric_benchmark_coarse() {
    let ls = 0.06;
    let mesh = load_mesh(&fixture("tpb_symmetric_coarse_v41.msh"));
    let h_band = central_band_size(&mesh, 4.0, 0.2);

    let run = coarse_run();
    assert_eq!(run.code, 0);
    let history = read_csv(&run.out_dir.join(CSV_NAME)).unwrap();
    let (shape_ok, ipk, vpk, lpk) = curve_shape(&history.pairs);
    let final_load = history.pairs.last().unwrap().1;
    let (nuc_ok, nuc) = match run.band.nucleation {
        Some((step, v, d)) => (
            d <= 2.0 * ls,
            format!("nucleates at step {step} (vApp {v:.4}) {d:.4} from the tip"),
        ),
        None => (false, "no crack band".into()),
    };
    let y_max = run.band.y_max();
    let spread = run.band.x_spread();
    let path_ok = y_max >= 1.0 && spread <= 0.3;
    let time_ok = run.elapsed <= Duration::from_secs(30 * 60);
    let passed = h_band <= ls / 2.0 && shape_ok && nuc_ok && path_ok && time_ok;
    report(
        7,
        "symmetric beam, coarse",
        passed,
        format!(
            "element size in |x - 4| <= 0.2 {h_band:.4} (max {}); peak {lpk:.5e} at step {ipk} (vApp {vpk:.4}), final {final_load:.4e}; {nuc}; band reaches y {y_max:.3}, max |x - 4| {spread:.3}; {:.0} s",
            ls / 2.0,
            run.elapsed.as_secs_f64()
        ),
    );
    assert!(passed);
}

#[test]
#[ignore = "full-resolution run, hours single-threaded"]
fn criterion_07_symmetric_benchmark_full_resolution() {
    let run = tracked_run("tpb_symmetric.json", "fine", 1, BEAM_TIP, 4.0);
    assert_eq!(run.code, 0);
    let history = read_csv(&run.out_dir.join(CSV_NAME)).unwrap();
    let (shape_ok, _, vpk, lpk) = curve_shape(&history.pairs);
    let window = (0.035..=0.05).contains(&vpk);
    let passed = shape_ok && window;
    report(
        7,
        "symmetric beam, full resolution",
        passed,
        format!(
            "peak {lpk:.5e} at vApp {vpk:.5} (window [0.035, 0.05]); {:.0} s",
            run.elapsed.as_secs_f64()
        ),
    );
    assert!(passed);
}

#[test]
#[ignore = "three-hole beam, multi-hour"]
fn criterion_08_asymmetric_three_hole() {
    // Notch at x = 10 - e1 = 4, height e2 = 1.
    let run = tracked_run("tpb_asym_a_coarse.json", "asym_a", 1, [4.0, 1.0], 4.0);
    assert_eq!(run.code, 0);
    let holes = [[6.0, 2.75], [6.0, 4.75]];
    let c = run.band.centroid();
    let d = holes
        .iter()
        .map(|h| ((c[0] - h[0]).powi(2) + (c[1] - h[1]).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min);
    let passed = !run.band.final_band.is_empty() && d <= 1.0;
    report(
        8,
        "three-hole beam e1=6, e2=1",
        passed,
        format!(
            "band centroid ({:.3}, {:.3}), {d:.3} from the nearer of the bottom two holes (max 1.0); {:.0} s",
            c[0],
            c[1],
            run.elapsed.as_secs_f64()
        ),
    );
    assert!(passed);
}

fn output_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "vtk" || x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_09_determinism_across_threads() {
    let first = coarse_run();
    assert_eq!(first.code, 0);
    let out_dir = scratch("coarse_threads2");
    let opts = RunOptions {
        threads: Some(2),
        out_dir: Some(out_dir.clone()),
    };
    let code = cmd_run(
        &root().join("configs/tpb_symmetric_coarse.json"),
        &opts,
        &mut std::io::sink(),
    );
    assert_eq!(code, 0);

    let a = output_files(&first.out_dir);
    let b = output_files(&out_dir);
    let names = |f: &[(String, Vec<u8>)]| f.iter().map(|x| x.0.clone()).collect::<Vec<_>>();
    let same_names = names(&a) == names(&b);
    let differing: Vec<&str> = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| x.1 != y.1)
        .map(|(x, _)| x.0.as_str())
        .collect();
    let passed = same_names && differing.is_empty() && a.len() > 1;
    report(
        9,
        "determinism, 1 vs 2 threads",
        passed,
        format!(
            "{} files compared, {} differ {:?}",
            a.len(),
            differing.len(),
            differing
        ),
    );
    assert!(passed);
}

#[test]
fn criterion_10_msh_ingestion() {
    let benchmarks = [
        "tpb_symmetric_coarse",
        "tpb_symmetric_fine",
        "tpb_asym_a_coarse",
        "tpb_asym_b_coarse",
        "tpb_asym_c_coarse",
    ];
    let summary = |m: &Mesh| (m.num_nodes(), m.num_triangles(), m.names());
    let mut mismatched = Vec::new();
    for name in benchmarks {
        let v22 = load_mesh(&fixture(&format!("{name}_v22.msh")));
        let v41 = load_mesh(&fixture(&format!("{name}_v41.msh")));
        if summary(&v22) != summary(&v41) {
            mismatched.push(name);
        }
    }
    let passed = mismatched.is_empty();
    report(
        10,
        "MSH 2.2 / 4.1 ingestion",
        passed,
        format!(
            "{} meshes compared, mismatches {:?}",
            benchmarks.len(),
            mismatched
        ),
    );
    assert!(passed);
}
