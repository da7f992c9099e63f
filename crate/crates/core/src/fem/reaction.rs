use std::collections::HashMap;

use super::assembly::{element_gradients, element_strain};
use super::quadrature::gauss2_unit;
use crate::constitutive::{stress, MaterialParams};
use crate::error::{Error, Result};
use crate::meshio::{entities_with_tag, Mesh};

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// `∫_Γ σ·n dΓ` over the boundary edges named `tag`.
///
/// Each edge takes the (constant) stress of its single adjacent triangle
/// and the normal pointing away from that triangle's third vertex.
pub fn reaction_force(
    mesh: &Mesh,
    tag: &str,
    u: &[f64],
    s: &[f64],
    m: &MaterialParams,
) -> Result<[f64; 2]> {
    let entities = entities_with_tag(mesh, tag)?;
    if entities.edges.is_empty() {
        return Err(Error::Lookup {
            name: format!("{tag} (no boundary edges)"),
            available: mesh.names(),
        });
    }
    if u.len() != 2 * mesh.num_nodes() || s.len() != mesh.num_nodes() {
        return Err(Error::Parameter(format!(
            "reaction needs {} displacement and {} phase entries, got {} and {}",
            2 * mesh.num_nodes(),
            mesh.num_nodes(),
            u.len(),
            s.len()
        )));
    }

    let wanted: HashMap<(usize, usize), usize> = entities
        .edges
        .iter()
        .map(|&i| {
            let [a, b] = mesh.boundary_edges[i].nodes;
            (edge_key(a, b), i)
        })
        .collect();
    let mut adjacent: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (e, t) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let key = edge_key(t[k], t[(k + 1) % 3]);
            if wanted.contains_key(&key) {
                adjacent.entry(key).or_default().push(e);
            }
        }
    }

    let mut force = [0.0; 2];
    for &i in &entities.edges {
        let [a, b] = mesh.boundary_edges[i].nodes;
        let elems = adjacent
            .get(&edge_key(a, b))
            .map(Vec::as_slice)
            .unwrap_or(&[]);
        let e = match elems {
            [e] => *e,
            [] => {
                return Err(Error::Integrity(format!(
                    "edge {a}-{b} of {tag:?} is not a side of any triangle"
                )))
            }
            _ => {
                return Err(Error::Integrity(format!(
                    "edge {a}-{b} of {tag:?} is interior; outward normal is undefined"
                )))
            }
        };
        let geo = element_gradients(mesh, e)?;
        let eps = element_strain(mesh, &geo, e, u);

        let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
        let t = [pb[0] - pa[0], pb[1] - pa[1]];
        let len = t[0].hypot(t[1]);
        let mut n = [t[1] / len, -t[0] / len];
        let third = mesh.triangles[e]
            .iter()
            .copied()
            .find(|&v| v != a && v != b)
            .expect("triangle has a third vertex");
        let pc = mesh.nodes[third];
        if n[0] * (pc[0] - pa[0]) + n[1] * (pc[1] - pa[1]) > 0.0 {
            n = [-n[0], -n[1]];
        }

        for (xi, w) in gauss2_unit() {
            let sq = (1.0 - xi) * s[a] + xi * s[b];
            let traction = stress(eps, eps, sq, m).apply(n);
            force[0] += w * len * traction[0];
            force[1] += w * len * traction[1];
        }
    }
    Ok(force)
}
