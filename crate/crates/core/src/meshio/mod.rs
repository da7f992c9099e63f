//! Triangular meshes with tagged boundary entities.

mod msh;
mod write;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

pub use msh::parse_msh;
pub use write::{to_msh22, to_msh41};

/// Physical group key: `(dimension, tag)`.
pub type PhysicalKey = (u8, i32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaggedPoint {
    pub node: usize,
    pub tag: i32,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    /// Counterclockwise node triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub tagged_points: Vec<TaggedPoint>,
    pub physical_names: BTreeMap<PhysicalKey, String>,
    /// Number of triangles whose winding was flipped on construction.
    pub reoriented: usize,
}

/// Twice the signed area of the triangle `(a, b, c)`.
pub fn signed_area2(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

impl Mesh {
    /// Builds a mesh, checking index ranges and flipping clockwise triangles.
    pub fn new(
        nodes: Vec<[f64; 2]>,
        mut triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        tagged_points: Vec<TaggedPoint>,
        physical_names: BTreeMap<PhysicalKey, String>,
    ) -> Result<Self> {
        let n = nodes.len();
        let check = |i: usize, what: &str| {
            if i >= n {
                Err(Error::Integrity(format!(
                    "{what} references node {i}, mesh has {n} nodes"
                )))
            } else {
                Ok(())
            }
        };
        for t in &triangles {
            for &i in t {
                check(i, "triangle")?;
            }
        }
        for e in &boundary_edges {
            check(e.nodes[0], "boundary edge")?;
            check(e.nodes[1], "boundary edge")?;
        }
        for p in &tagged_points {
            check(p.node, "tagged point")?;
        }

        let mut reoriented = 0;
        for t in &mut triangles {
            if signed_area2(nodes[t[0]], nodes[t[1]], nodes[t[2]]) < 0.0 {
                t.swap(1, 2);
                reoriented += 1;
            }
        }

        Ok(Mesh {
            nodes,
            triangles,
            boundary_edges,
            tagged_points,
            physical_names,
            reoriented,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_coords(&self, e: usize) -> [[f64; 2]; 3] {
        let t = self.triangles[e];
        [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]]
    }

    pub fn triangle_area(&self, e: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(e);
        0.5 * signed_area2(a, b, c)
    }

    /// `(min, max)` corners of the node cloud.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.nodes {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Distinct physical names, sorted.
    pub fn names(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.physical_names.values().collect();
        set.into_iter().cloned().collect()
    }

    fn keys_for(&self, name: &str) -> Result<Vec<PhysicalKey>> {
        let keys: Vec<PhysicalKey> = self
            .physical_names
            .iter()
            .filter(|(_, v)| v.as_str() == name)
            .map(|(k, _)| *k)
            .collect();
        if keys.is_empty() {
            return Err(Error::Lookup {
                name: name.to_string(),
                available: self.names(),
            });
        }
        Ok(keys)
    }
}

/// Boundary entities carrying one physical name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TaggedEntities {
    /// Indices into [`Mesh::boundary_edges`].
    pub edges: Vec<usize>,
    /// Indices into [`Mesh::tagged_points`].
    pub points: Vec<usize>,
    /// Sorted, deduplicated nodes touched by `edges` and `points`.
    pub nodes: Vec<usize>,
}

/// All boundary edges and tagged points whose physical tag resolves to `name`.
pub fn entities_with_tag(mesh: &Mesh, name: &str) -> Result<TaggedEntities> {
    let keys = mesh.keys_for(name)?;
    let edge_tags: BTreeSet<i32> = keys.iter().filter(|k| k.0 == 1).map(|k| k.1).collect();
    let point_tags: BTreeSet<i32> = keys.iter().filter(|k| k.0 == 0).map(|k| k.1).collect();

    let edges: Vec<usize> = mesh
        .boundary_edges
        .iter()
        .enumerate()
        .filter(|(_, e)| edge_tags.contains(&e.tag))
        .map(|(i, _)| i)
        .collect();
    let points: Vec<usize> = mesh
        .tagged_points
        .iter()
        .enumerate()
        .filter(|(_, p)| point_tags.contains(&p.tag))
        .map(|(i, _)| i)
        .collect();

    let mut nodes: BTreeSet<usize> = BTreeSet::new();
    for &i in &edges {
        nodes.extend(mesh.boundary_edges[i].nodes);
    }
    for &i in &points {
        nodes.insert(mesh.tagged_points[i].node);
    }

    Ok(TaggedEntities {
        edges,
        points,
        nodes: nodes.into_iter().collect(),
    })
}

/// Uniform `n × n` grid over the unit square, each cell split along its
/// `(0,0)–(1,1)` diagonal.
///
/// Boundary edges are tagged `bottom`, `right`, `top`, `left` (dimension 1,
/// tags 1..=4), the corner at the origin is the point `origin` and the
/// surface is `Domain`.
pub fn structured_unit_square(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::Parameter("structured mesh needs n >= 1".into()));
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let h = 1.0 / n as f64;

    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            nodes.push([i as f64 * h, j as f64 * h]);
        }
    }
    // Pin the far edges exactly to 1.0.
    for p in &mut nodes {
        for c in p.iter_mut() {
            if (*c - 1.0).abs() < 1e-12 {
                *c = 1.0;
            }
        }
    }

    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }

    let mut edges = Vec::with_capacity(4 * n);
    for i in 0..n {
        edges.push(BoundaryEdge {
            nodes: [id(i, 0), id(i + 1, 0)],
            tag: 1,
        });
    }
    for j in 0..n {
        edges.push(BoundaryEdge {
            nodes: [id(n, j), id(n, j + 1)],
            tag: 2,
        });
    }
    for i in (0..n).rev() {
        edges.push(BoundaryEdge {
            nodes: [id(i + 1, n), id(i, n)],
            tag: 3,
        });
    }
    for j in (0..n).rev() {
        edges.push(BoundaryEdge {
            nodes: [id(0, j + 1), id(0, j)],
            tag: 4,
        });
    }

    let names: BTreeMap<PhysicalKey, String> = [
        ((0, 5), "origin"),
        ((1, 1), "bottom"),
        ((1, 2), "right"),
        ((1, 3), "top"),
        ((1, 4), "left"),
        ((2, 6), "Domain"),
    ]
    .into_iter()
    .map(|(k, v)| (k, v.to_string()))
    .collect();

    Mesh::new(
        nodes,
        triangles,
        edges,
        vec![TaggedPoint {
            node: id(0, 0),
            tag: 5,
        }],
        names,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum Finding {
    NonPositiveArea { element: usize, area: f64 },
    IndexOutOfRange { element: usize, node: usize },
    DuplicateNode { first: usize, second: usize },
    OrphanedNode { node: usize },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::NonPositiveArea { element, area } => {
                write!(f, "non-positive area: element {element} (area {area:e})")
            }
            Finding::IndexOutOfRange { element, node } => {
                write!(
                    f,
                    "index out of range: element {element} references node {node}"
                )
            }
            Finding::DuplicateNode { first, second } => {
                write!(f, "duplicate node: {second} coincides with {first}")
            }
            Finding::OrphanedNode { node } => write!(f, "orphaned node: {node}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.findings.is_empty()
    }
}

const DUPLICATE_TOL: f64 = 1e-12;

/// Checks areas, index ranges, coincident nodes and unreferenced nodes.
pub fn validate(mesh: &Mesh) -> ValidationReport {
    let n = mesh.nodes.len();
    let mut findings = Vec::new();
    let mut used = vec![false; n];

    for (e, t) in mesh.triangles.iter().enumerate() {
        let mut in_range = true;
        for &i in t {
            if i >= n {
                findings.push(Finding::IndexOutOfRange {
                    element: e,
                    node: i,
                });
                in_range = false;
            } else {
                used[i] = true;
            }
        }
        if in_range {
            let area = mesh.triangle_area(e);
            if area <= 0.0 {
                findings.push(Finding::NonPositiveArea { element: e, area });
            }
        }
    }

    // Sweep over nodes sorted by x.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        mesh.nodes[a][0]
            .total_cmp(&mesh.nodes[b][0])
            .then(a.cmp(&b))
    });
    for (k, &a) in order.iter().enumerate() {
        for &b in &order[k + 1..] {
            let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
            if pb[0] - pa[0] > DUPLICATE_TOL {
                break;
            }
            if (pb[1] - pa[1]).abs() <= DUPLICATE_TOL {
                findings.push(Finding::DuplicateNode {
                    first: a.min(b),
                    second: a.max(b),
                });
            }
        }
    }

    findings.extend(
        used.iter()
            .enumerate()
            .filter(|(_, u)| !**u)
            .map(|(node, _)| Finding::OrphanedNode { node }),
    );

    ValidationReport { findings }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_counts() {
        let m = structured_unit_square(1).unwrap();
        assert_eq!(
            (m.num_nodes(), m.num_triangles(), m.boundary_edges.len()),
            (4, 2, 4)
        );
        let m = structured_unit_square(2).unwrap();
        assert_eq!(
            (m.num_nodes(), m.num_triangles(), m.boundary_edges.len()),
            (9, 8, 8)
        );
        assert!(structured_unit_square(0).is_err());
    }

    #[test]
    fn unit_square_tiles_the_square() {
        for n in [1, 3, 7, 16] {
            let m = structured_unit_square(n).unwrap();
            let total: f64 = (0..m.num_triangles()).map(|e| m.triangle_area(e)).sum();
            assert!((total - 1.0).abs() < 1e-13, "n={n} area {total}");
            assert!((0..m.num_triangles()).all(|e| m.triangle_area(e) > 0.0));
            assert_eq!(m.reoriented, 0);
        }
    }

    #[test]
    fn tag_lookup() {
        let m = structured_unit_square(1).unwrap();
        let left = entities_with_tag(&m, "left").unwrap();
        assert_eq!((left.edges.len(), left.points.len()), (1, 0));
        assert_eq!(left.nodes, vec![0, 2]);

        let origin = entities_with_tag(&m, "origin").unwrap();
        assert_eq!((origin.edges.len(), origin.points.len()), (0, 1));
        assert_eq!(origin.nodes, vec![0]);

        match entities_with_tag(&m, "LoadLin") {
            Err(Error::Lookup { available, .. }) => {
                assert!(available.contains(&"left".to_string()));
                assert!(available.contains(&"origin".to_string()));
            }
            other => panic!("expected lookup error, got {other:?}"),
        }
    }

    #[test]
    fn tag_union_covers_tagged_edges() {
        let m = structured_unit_square(5).unwrap();
        let mut seen = BTreeSet::new();
        for name in m.names() {
            seen.extend(entities_with_tag(&m, &name).unwrap().edges);
        }
        assert_eq!(seen.len(), m.boundary_edges.len());
    }

    #[test]
    fn validate_clean_mesh() {
        let r = validate(&structured_unit_square(4).unwrap());
        assert!(r.passed(), "{:?}", r.findings);
    }

    #[test]
    fn validate_flags_inverted_triangle() {
        let mut m = structured_unit_square(2).unwrap();
        m.triangles[3].swap(0, 1);
        let r = validate(&m);
        assert!(!r.passed());
        assert_eq!(r.findings.len(), 1);
        let msg = r.findings[0].to_string();
        assert!(
            msg.contains("non-positive area") && msg.contains("element 3"),
            "{msg}"
        );
    }

    #[test]
    fn validate_flags_duplicate_and_orphan() {
        let mut m = structured_unit_square(1).unwrap();
        m.nodes.push([1.0, 1.0]);
        let r = validate(&m);
        let msgs: Vec<String> = r.findings.iter().map(|f| f.to_string()).collect();
        assert!(
            msgs.iter().any(|s| s.contains("duplicate node")),
            "{msgs:?}"
        );
        assert!(r.findings.contains(&Finding::OrphanedNode { node: 4 }));
    }

    #[test]
    fn constructor_reorients_and_checks_indices() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let m = Mesh::new(
            nodes.clone(),
            vec![[0, 2, 1]],
            vec![],
            vec![],
            BTreeMap::new(),
        )
        .unwrap();
        assert_eq!(m.reoriented, 1);
        assert!(m.triangle_area(0) > 0.0);
        assert!(Mesh::new(nodes, vec![[0, 1, 3]], vec![], vec![], BTreeMap::new()).is_err());
    }
}
