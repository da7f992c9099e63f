use rayon::prelude::*;

use super::history::QuadHistory;
use super::quadrature::{QuadratureRule, NQ};
use crate::constitutive::{tangent_cmod, MaterialParams};
use crate::error::{Error, Result};
use crate::linalg::{to_csr, SparseMatrix, TripletBuffer};
use crate::meshio::{signed_area2, Mesh};
use crate::tensors::{SymTensor2, SymTensor4};

/// Constant shape-function gradients and area of one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub grads: [[f64; 2]; 3],
    pub area: f64,
}

pub fn element_gradients(mesh: &Mesh, e: usize) -> Result<ElementGeometry> {
    let [a, b, c] = mesh.triangle_coords(e);
    let det = signed_area2(a, b, c);
    if !(det > 0.0) {
        return Err(Error::Geometry {
            element: e,
            area: 0.5 * det,
        });
    }
    // ∇N_i = perp(x_k - x_j) / 2A for (i, j, k) cyclic.
    let grad = |p: [f64; 2], q: [f64; 2]| [(p[1] - q[1]) / det, (q[0] - p[0]) / det];
    Ok(ElementGeometry {
        grads: [grad(b, c), grad(c, a), grad(a, b)],
        area: 0.5 * det,
    })
}

fn all_geometries(mesh: &Mesh) -> Result<Vec<ElementGeometry>> {
    (0..mesh.num_triangles())
        .into_par_iter()
        .map(|e| element_gradients(mesh, e))
        .collect()
}

/// Small strain of the interleaved nodal field `u` on element `e`.
pub fn element_strain(mesh: &Mesh, geo: &ElementGeometry, e: usize, u: &[f64]) -> SymTensor2 {
    let tri = mesh.triangles[e];
    let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
    for (i, &node) in tri.iter().enumerate() {
        let [gx, gy] = geo.grads[i];
        let (ux, uy) = (u[2 * node], u[2 * node + 1]);
        xx += gx * ux;
        yy += gy * uy;
        xy += 0.5 * (gy * ux + gx * uy);
    }
    SymTensor2::new(xx, yy, xy)
}

/// Strains of every element.
pub fn element_strains(mesh: &Mesh, u: &[f64]) -> Result<Vec<SymTensor2>> {
    check_len("displacement", u.len(), 2 * mesh.num_nodes())?;
    (0..mesh.num_triangles())
        .into_par_iter()
        .map(|e| Ok(element_strain(mesh, &element_gradients(mesh, e)?, e, u)))
        .collect()
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Parameter(format!(
            "{what} field has {got} entries, mesh needs {want}"
        )));
    }
    Ok(())
}

fn triplets_from_blocks<const D: usize>(
    mesh: &Mesh,
    blocks: &[[[f64; D]; D]],
    dofs_per_node: usize,
) -> TripletBuffer {
    let mut trip = TripletBuffer::with_capacity(blocks.len() * D * D);
    for (tri, k) in mesh.triangles.iter().zip(blocks) {
        let dof = |a: usize| dofs_per_node * tri[a / dofs_per_node] + a % dofs_per_node;
        for (a, row) in k.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                trip.push(dof(a), dof(b), v);
            }
        }
    }
    trip
}

/// Phase-field system: `∫ Gc ls ∇s·∇φ + (2H + Gc/ls) s φ = ∫ (Gc/ls) φ`.
pub fn assemble_phase_field(
    mesh: &Mesh,
    h: &QuadHistory,
    m: &MaterialParams,
) -> Result<(SparseMatrix, Vec<f64>)> {
    let ne = mesh.num_triangles();
    check_len("history", h.num_elements(), ne)?;
    let rule = QuadratureRule::degree2();
    let geos = all_geometries(mesh)?;
    let (gc, ls) = (m.gc, m.ls);

    let blocks: Vec<[[f64; 3]; 3]> = (0..ne)
        .into_par_iter()
        .map(|e| {
            let g = &geos[e];
            let mut k = [[0.0; 3]; 3];
            for (i, row) in k.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    let gi = g.grads[i];
                    let gj = g.grads[j];
                    *v = gc * ls * (gi[0] * gj[0] + gi[1] * gj[1]) * g.area;
                }
            }
            let hq = h.element(e);
            for q in 0..NQ {
                let n = rule.shape_values(q);
                let c = rule.weights[q] * 2.0 * g.area * (2.0 * hq[q] + gc / ls);
                for i in 0..3 {
                    for j in 0..3 {
                        k[i][j] += c * n[i] * n[j];
                    }
                }
            }
            k
        })
        .collect();

    let mut rhs = vec![0.0; mesh.num_nodes()];
    for (tri, g) in mesh.triangles.iter().zip(&geos) {
        for q in 0..NQ {
            let n = rule.shape_values(q);
            let c = rule.weights[q] * 2.0 * g.area * gc / ls;
            for i in 0..3 {
                rhs[tri[i]] += c * n[i];
            }
        }
    }
    let a = to_csr(&triplets_from_blocks(mesh, &blocks, 1), mesh.num_nodes())?;
    Ok((a, rhs))
}

/// Voigt strain-displacement rows for local dof `a` (node `a/2`,
/// component `a%2`), with the tensor shear component.
fn b_column(g: &ElementGeometry, a: usize) -> [f64; 3] {
    let [gx, gy] = g.grads[a / 2];
    if a % 2 == 0 {
        [gx, 0.0, 0.5 * gy]
    } else {
        [0.0, gy, 0.5 * gx]
    }
}

/// `∫ ε(v) : C_mod : ε(u)` on one element from a quadrature-averaged tangent.
fn displacement_block(g: &ElementGeometry, c: &SymTensor4) -> [[f64; 6]; 6] {
    const W: [f64; 3] = [1.0, 1.0, 2.0];
    let bs: [[f64; 3]; 6] = std::array::from_fn(|a| b_column(g, a));
    let mut k = [[0.0; 6]; 6];
    for (a, row) in k.iter_mut().enumerate() {
        let mut cb = [0.0; 3];
        for (q, v) in cb.iter_mut().enumerate() {
            *v = (0..3).map(|p| bs[a][p] * W[p] * c.m[p][q]).sum::<f64>() * W[q];
        }
        for (b, v) in row.iter_mut().enumerate() {
            *v = g.area * (0..3).map(|q| cb[q] * bs[b][q]).sum::<f64>();
        }
    }
    k
}

/// Displacement system for the staggered step.
///
/// The branch of the split is taken from `ε(u_prev)`; `s` is interpolated
/// at the quadrature points. The right-hand side is zero.
pub fn assemble_displacement(
    mesh: &Mesh,
    u_prev: &[f64],
    s: &[f64],
    m: &MaterialParams,
) -> Result<(SparseMatrix, Vec<f64>)> {
    let nn = mesh.num_nodes();
    check_len("displacement", u_prev.len(), 2 * nn)?;
    check_len("phase", s.len(), nn)?;
    let rule = QuadratureRule::degree2();
    let geos = all_geometries(mesh)?;

    let blocks: Vec<[[f64; 6]; 6]> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|e| {
            let g = &geos[e];
            let tri = mesh.triangles[e];
            let branch = element_strain(mesh, g, e, u_prev);
            // The tangent is affine in s², so the quadrature average of the
            // pointwise tangents integrates the bilinear form exactly.
            let mut c = SymTensor4::ZERO;
            for q in 0..NQ {
                let n = rule.shape_values(q);
                let sq = n[0] * s[tri[0]] + n[1] * s[tri[1]] + n[2] * s[tri[2]];
                c = c + (2.0 * rule.weights[q]) * tangent_cmod(branch, sq, m);
            }
            displacement_block(g, &c)
        })
        .collect();

    let a = to_csr(&triplets_from_blocks(mesh, &blocks, 2), 2 * nn)?;
    Ok((a, vec![0.0; 2 * nn]))
}
