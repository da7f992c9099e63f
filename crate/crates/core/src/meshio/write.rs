//! Minimal ASCII MSH writers for test fixtures.
//!
//! Coordinates are written with Rust's shortest round-trip formatting, so
//! reading a written file back reproduces node positions bit for bit.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::Mesh;

fn surface_tag(mesh: &Mesh) -> i32 {
    mesh.physical_names
        .keys()
        .find(|(dim, _)| *dim == 2)
        .map(|(_, tag)| *tag)
        .unwrap_or(0)
}

fn write_names(mesh: &Mesh, out: &mut String) {
    if mesh.physical_names.is_empty() {
        return;
    }
    out.push_str("$PhysicalNames\n");
    let _ = writeln!(out, "{}", mesh.physical_names.len());
    for ((dim, tag), name) in &mesh.physical_names {
        let _ = writeln!(out, "{dim} {tag} \"{name}\"");
    }
    out.push_str("$EndPhysicalNames\n");
}

/// Serializes `mesh` as MSH 2.2 (node tags are `index + 1`).
pub fn to_msh22(mesh: &Mesh) -> String {
    let mut out = String::from("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n");
    write_names(mesh, &mut out);

    out.push_str("$Nodes\n");
    let _ = writeln!(out, "{}", mesh.nodes.len());
    for (i, p) in mesh.nodes.iter().enumerate() {
        let _ = writeln!(out, "{} {} {} 0", i + 1, p[0], p[1]);
    }
    out.push_str("$EndNodes\n$Elements\n");

    let total = mesh.tagged_points.len() + mesh.boundary_edges.len() + mesh.triangles.len();
    let _ = writeln!(out, "{total}");
    let mut id = 0;
    for p in &mesh.tagged_points {
        id += 1;
        let _ = writeln!(out, "{id} 15 2 {} {} {}", p.tag, p.tag, p.node + 1);
    }
    for e in &mesh.boundary_edges {
        id += 1;
        let _ = writeln!(
            out,
            "{id} 1 2 {} {} {} {}",
            e.tag,
            e.tag,
            e.nodes[0] + 1,
            e.nodes[1] + 1
        );
    }
    let surf = surface_tag(mesh);
    for t in &mesh.triangles {
        id += 1;
        let _ = writeln!(
            out,
            "{id} 2 2 {surf} 1 {} {} {}",
            t[0] + 1,
            t[1] + 1,
            t[2] + 1
        );
    }
    out.push_str("$EndElements\n");
    out
}

/// Serializes `mesh` as MSH 4.1.
///
/// Entities are synthetic: one point entity per tagged point, one curve
/// entity per boundary-edge tag and a single surface holding every node
/// and triangle.
pub fn to_msh41(mesh: &Mesh) -> String {
    let mut out = String::from("$MeshFormat\n4.1 0 8\n$EndMeshFormat\n");
    write_names(mesh, &mut out);

    let edge_tags: Vec<i32> = mesh
        .boundary_edges
        .iter()
        .map(|e| e.tag)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let (lo, hi) = if mesh.nodes.is_empty() {
        ([0.0; 2], [0.0; 2])
    } else {
        mesh.bounding_box()
    };
    let phys = |tag: i32| {
        if tag == 0 {
            "0".to_string()
        } else {
            format!("1 {tag}")
        }
    };

    out.push_str("$Entities\n");
    let _ = writeln!(out, "{} {} 1 0", mesh.tagged_points.len(), edge_tags.len());
    for (k, p) in mesh.tagged_points.iter().enumerate() {
        let xy = mesh.nodes[p.node];
        let _ = writeln!(out, "{} {} {} 0 {}", k + 1, xy[0], xy[1], phys(p.tag));
    }
    for (k, tag) in edge_tags.iter().enumerate() {
        let _ = writeln!(
            out,
            "{} {} {} 0 {} {} 0 {} 0",
            k + 1,
            lo[0],
            lo[1],
            hi[0],
            hi[1],
            phys(*tag)
        );
    }
    let _ = writeln!(
        out,
        "1 {} {} 0 {} {} 0 {} 0",
        lo[0],
        lo[1],
        hi[0],
        hi[1],
        phys(surface_tag(mesh))
    );
    out.push_str("$EndEntities\n");

    let n = mesh.nodes.len();
    out.push_str("$Nodes\n");
    let _ = writeln!(out, "1 {n} 1 {n}");
    let _ = writeln!(out, "2 1 0 {n}");
    for i in 0..n {
        let _ = writeln!(out, "{}", i + 1);
    }
    for p in &mesh.nodes {
        let _ = writeln!(out, "{} {} 0", p[0], p[1]);
    }
    out.push_str("$EndNodes\n");

    let total = mesh.tagged_points.len() + mesh.boundary_edges.len() + mesh.triangles.len();
    let blocks = mesh.tagged_points.len() + edge_tags.len() + 1;
    out.push_str("$Elements\n");
    let _ = writeln!(out, "{blocks} {total} 1 {total}");
    let mut id = 0;
    for (k, p) in mesh.tagged_points.iter().enumerate() {
        id += 1;
        let _ = writeln!(out, "0 {} 15 1\n{id} {}", k + 1, p.node + 1);
    }
    for (k, tag) in edge_tags.iter().enumerate() {
        let members: Vec<_> = mesh
            .boundary_edges
            .iter()
            .filter(|e| e.tag == *tag)
            .collect();
        let _ = writeln!(out, "1 {} 1 {}", k + 1, members.len());
        for e in members {
            id += 1;
            let _ = writeln!(out, "{id} {} {}", e.nodes[0] + 1, e.nodes[1] + 1);
        }
    }
    let _ = writeln!(out, "2 1 2 {}", mesh.triangles.len());
    for t in &mesh.triangles {
        id += 1;
        let _ = writeln!(out, "{id} {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out.push_str("$EndElements\n");
    out
}
