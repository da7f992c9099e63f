use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{to_csr, SparseMatrix, TripletBuffer};

/// Node-to-dof numbering; vector fields interleave components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofMap {
    pub num_nodes: usize,
    pub components: usize,
}

impl DofMap {
    pub fn scalar(num_nodes: usize) -> Self {
        DofMap {
            num_nodes,
            components: 1,
        }
    }

    pub fn vector(num_nodes: usize) -> Self {
        DofMap {
            num_nodes,
            components: 2,
        }
    }

    pub fn dof(&self, node: usize, component: usize) -> usize {
        debug_assert!(node < self.num_nodes && component < self.components);
        self.components * node + component
    }

    pub fn num_dofs(&self) -> usize {
        self.components * self.num_nodes
    }
}

/// Prescribed dof values, sorted by dof.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DirichletSet {
    values: BTreeMap<usize, f64>,
}

impl DirichletSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Repeating a dof with the same value is allowed; a different value
    /// is a constraint error.
    pub fn insert(&mut self, dof: usize, value: f64) -> Result<()> {
        match self.values.get(&dof) {
            Some(&first) if first != value => Err(Error::Constraint {
                dof,
                first,
                second: value,
            }),
            _ => {
                self.values.insert(dof, value);
                Ok(())
            }
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut d = Self::new();
        for (dof, v) in pairs {
            d.insert(dof, v)?;
        }
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().map(|(&d, &v)| (d, v))
    }

    pub fn get(&self, dof: usize) -> Option<f64> {
        self.values.get(&dof).copied()
    }
}

/// Symmetric elimination of prescribed dofs.
///
/// Constrained rows and columns are zeroed, their diagonal set to one and
/// the known column contributions moved to the right-hand side.
pub fn apply_dirichlet(
    mut a: SparseMatrix,
    mut b: Vec<f64>,
    d: &DirichletSet,
) -> Result<(SparseMatrix, Vec<f64>)> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::Parameter(format!(
            "rhs has {} entries, matrix is {n}x{n}",
            b.len()
        )));
    }
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for (dof, v) in d.iter() {
        if dof >= n {
            return Err(Error::IndexOutOfRange {
                row: dof,
                col: dof,
                n,
            });
        }
        fixed[dof] = Some(v);
    }

    let missing_diag = d.iter().any(|(dof, _)| a.row(dof).all(|(j, _)| j != dof));
    if missing_diag {
        let mut trip = TripletBuffer::with_capacity(a.nnz() + d.len());
        for i in 0..n {
            for (j, v) in a.row(i) {
                trip.push(i, j, v);
            }
        }
        for (dof, _) in d.iter() {
            trip.push(dof, dof, 0.0);
        }
        a = to_csr(&trip, n)?;
    }

    let offsets = a.row_offsets().to_vec();
    let cols = a.col_indices().to_vec();
    let vals = a.values_mut();
    for i in 0..n {
        let range = offsets[i]..offsets[i + 1];
        match fixed[i] {
            Some(v) => {
                for k in range {
                    vals[k] = if cols[k] == i { 1.0 } else { 0.0 };
                }
                b[i] = v;
            }
            None => {
                for k in range {
                    if let Some(v) = fixed[cols[k]] {
                        b[i] -= vals[k] * v;
                        vals[k] = 0.0;
                    }
                }
            }
        }
    }
    Ok((a, b))
}
