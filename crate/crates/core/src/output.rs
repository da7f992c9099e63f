//! Legacy ASCII VTK snapshots and the load–displacement CSV.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fem::{project_quadstate, ElementLinearField};
use crate::meshio::Mesh;
use crate::stagger::{FieldState, LoadHistory, StepReport, StepSink};

/// Fields of one load step as written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<'a> {
    pub step: usize,
    pub v_app: f64,
    /// Interleaved nodal displacements.
    pub u: &'a [f64],
    pub s: &'a [f64],
    pub history: Option<&'a ElementLinearField>,
}

/// Nine significant digits; negative zero is written as zero.
fn num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.8e}")
}

pub fn vtk_string(mesh: &Mesh, snap: &Snapshot) -> Result<String> {
    let nn = mesh.num_nodes();
    let ne = mesh.num_triangles();
    if snap.u.len() != 2 * nn || snap.s.len() != nn {
        return Err(Error::Parameter(format!(
            "snapshot fields ({} displacement, {} phase entries) do not match a mesh with {nn} nodes",
            snap.u.len(),
            snap.s.len()
        )));
    }
    if let Some(h) = snap.history {
        if h.vertex_values.len() != ne {
            return Err(Error::Parameter(format!(
                "history projection has {} elements, mesh has {ne}",
                h.vertex_values.len()
            )));
        }
    }

    let mut out = String::with_capacity(64 * (nn + ne));
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(out, "pffrac step {} vApp {}", snap.step, snap.v_app);
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {nn} float");
    for p in &mesh.nodes {
        let _ = writeln!(out, "{} {} {}", num(p[0]), num(p[1]), num(0.0));
    }
    let _ = writeln!(out, "CELLS {ne} {}", 4 * ne);
    for t in &mesh.triangles {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(out, "CELL_TYPES {ne}");
    for _ in 0..ne {
        out.push_str("5\n");
    }
    let _ = writeln!(out, "POINT_DATA {nn}");
    out.push_str("VECTORS displacement float\n");
    for i in 0..nn {
        let _ = writeln!(
            out,
            "{} {} {}",
            num(snap.u[2 * i]),
            num(snap.u[2 * i + 1]),
            num(0.0)
        );
    }
    out.push_str("SCALARS phase_field float 1\nLOOKUP_TABLE default\n");
    for &v in snap.s {
        let _ = writeln!(out, "{}", num(v));
    }
    if let Some(h) = snap.history {
        let _ = writeln!(out, "CELL_DATA {ne}");
        out.push_str("SCALARS history float 1\nLOOKUP_TABLE default\n");
        for e in 0..ne {
            let _ = writeln!(out, "{}", num(h.element_mean(e)));
        }
    }
    Ok(out)
}

pub fn write_vtk(mesh: &Mesh, snap: &Snapshot, path: &Path) -> Result<()> {
    let text = vtk_string(mesh, snap)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn csv_string(history: &LoadHistory) -> String {
    let mut out = String::from("displacement,load\n");
    for &(v, l) in &history.pairs {
        let _ = writeln!(out, "{v},{l}");
    }
    out
}

/// Writes `displacement,load` rows with round-trip precision.
pub fn write_csv(history: &LoadHistory, path: &Path) -> Result<()> {
    fs::write(path, csv_string(history)).map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<LoadHistory> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, msg: &str| Error::Parse {
        section: "csv".into(),
        line,
        message: msg.into(),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "displacement,load")) => {}
        _ => return Err(bad(1, "expected header `displacement,load`")),
    }
    let mut pairs = Vec::new();
    for (i, line) in lines {
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| bad(i + 1, "expected two columns"))?;
        let a = a.parse().map_err(|_| bad(i + 1, "bad displacement"))?;
        let b = b.parse().map_err(|_| bad(i + 1, "bad load"))?;
        pairs.push((a, b));
    }
    Ok(LoadHistory { pairs })
}

/// What the minimal reader recovers from a VTK file.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkSummary {
    pub num_points: usize,
    pub num_cells: usize,
    pub cells_size: usize,
    pub all_triangles: bool,
    pub points: Vec<[f64; 2]>,
    pub displacement: Vec<[f64; 2]>,
    pub phase_field: Vec<f64>,
    pub history: Option<Vec<f64>>,
}

/// Reads files produced by [`write_vtk`].
pub fn read_vtk(path: &Path) -> Result<VtkSummary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vtk(&text)
}

pub fn parse_vtk(text: &str) -> Result<VtkSummary> {
    let bad = |line: usize, msg: String| Error::Parse {
        section: "vtk".into(),
        line,
        message: msg,
    };
    let lines: Vec<&str> = text.lines().collect();
    if lines.first() != Some(&"# vtk DataFile Version 3.0") {
        return Err(bad(1, "missing VTK header".into()));
    }
    let mut i = 4;
    let next = |i: &mut usize| -> Result<Vec<&str>> {
        let l = lines
            .get(*i)
            .ok_or_else(|| bad(*i + 1, "unexpected end of file".into()))?;
        *i += 1;
        Ok(l.split_whitespace().collect())
    };
    let floats = |t: &[&str], line: usize| -> Result<Vec<f64>> {
        t.iter()
            .map(|x| {
                x.parse::<f64>()
                    .map_err(|_| bad(line, format!("bad number {x:?}")))
            })
            .collect()
    };
    let count = |t: &[&str], key: &str, line: usize| -> Result<usize> {
        if t.first() != Some(&key) {
            return Err(bad(line, format!("expected {key}")));
        }
        t.get(1)
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| bad(line, format!("bad {key} count")))
    };

    let head = next(&mut i)?;
    let np = count(&head, "POINTS", i)?;
    let mut points = Vec::with_capacity(np);
    for _ in 0..np {
        let v = floats(&next(&mut i)?, i)?;
        points.push([v[0], v[1]]);
    }
    let head = next(&mut i)?;
    let nc = count(&head, "CELLS", i)?;
    let cells_size = head
        .get(2)
        .and_then(|x| x.parse().ok())
        .ok_or_else(|| bad(i, "bad CELLS size".into()))?;
    i += nc;
    let head = next(&mut i)?;
    count(&head, "CELL_TYPES", i)?;
    let mut all_triangles = true;
    for _ in 0..nc {
        all_triangles &= next(&mut i)? == ["5"];
    }
    let head = next(&mut i)?;
    count(&head, "POINT_DATA", i)?;
    next(&mut i)?;
    let mut displacement = Vec::with_capacity(np);
    for _ in 0..np {
        let v = floats(&next(&mut i)?, i)?;
        displacement.push([v[0], v[1]]);
    }
    i += 2;
    let mut phase_field = Vec::with_capacity(np);
    for _ in 0..np {
        phase_field.push(floats(&next(&mut i)?, i)?[0]);
    }
    let history = if i < lines.len() {
        let head = next(&mut i)?;
        count(&head, "CELL_DATA", i)?;
        i += 2;
        let mut h = Vec::with_capacity(nc);
        for _ in 0..nc {
            h.push(floats(&next(&mut i)?, i)?[0]);
        }
        Some(h)
    } else {
        None
    };
    Ok(VtkSummary {
        num_points: np,
        num_cells: nc,
        cells_size,
        all_triangles,
        points,
        displacement,
        phase_field,
        history,
    })
}

pub fn snapshot_path(out_dir: &Path, step: usize) -> PathBuf {
    out_dir.join(format!("step_{step:04}.vtk"))
}

pub const CSV_NAME: &str = "load_displacement.csv";

/// Writes every `stride`-th step as VTK and appends each step to the CSV.
pub struct OutputSink {
    out_dir: PathBuf,
    stride: usize,
    csv: fs::File,
    pub written: Vec<PathBuf>,
}

impl OutputSink {
    /// Creates `out_dir` and starts the CSV with the `(0, 0)` row.
    pub fn create(out_dir: &Path, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::Parameter(
                "snapshot stride must be at least 1".into(),
            ));
        }
        fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let path = out_dir.join(CSV_NAME);
        let mut csv = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        csv.write_all(
            csv_string(&LoadHistory {
                pairs: vec![(0.0, 0.0)],
            })
            .as_bytes(),
        )
        .map_err(|e| Error::io(&path, e))?;
        Ok(OutputSink {
            out_dir: out_dir.to_path_buf(),
            stride,
            csv,
            written: Vec::new(),
        })
    }
}

impl StepSink for OutputSink {
    fn on_step(&mut self, mesh: &Mesh, report: &StepReport, state: &FieldState) -> Result<()> {
        let csv_path = self.out_dir.join(CSV_NAME);
        writeln!(self.csv, "{},{}", report.v_app, report.load)
            .and_then(|_| self.csv.flush())
            .map_err(|e| Error::io(&csv_path, e))?;
        if report.step % self.stride == 0 {
            let projection = project_quadstate(&state.h);
            let snap = Snapshot {
                step: report.step,
                v_app: report.v_app,
                u: &state.u,
                s: &state.s,
                history: Some(&projection),
            };
            let path = snapshot_path(&self.out_dir, report.step);
            write_vtk(mesh, &snap, &path)?;
            self.written.push(path);
        }
        Ok(())
    }
}
