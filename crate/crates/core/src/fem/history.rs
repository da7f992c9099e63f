use rayon::prelude::*;

use super::quadrature::{QuadratureRule, NQ};
use crate::error::{Error, Result};

/// History values `H` at the quadrature points of every element.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadHistory {
    values: Vec<[f64; NQ]>,
}

impl QuadHistory {
    pub fn zeros(num_elements: usize) -> Self {
        Self::filled(num_elements, 0.0)
    }

    pub fn filled(num_elements: usize, value: f64) -> Self {
        QuadHistory {
            values: vec![[value; NQ]; num_elements],
        }
    }

    pub fn num_elements(&self) -> usize {
        self.values.len()
    }

    pub fn element(&self, e: usize) -> [f64; NQ] {
        self.values[e]
    }

    pub fn set_element(&mut self, e: usize, v: [f64; NQ]) {
        self.values[e] = v;
    }

    pub fn as_slice(&self) -> &[[f64; NQ]] {
        &self.values
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [[f64; NQ]] {
        &mut self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().fold(0.0_f64, |m, v| m.max(*v))
    }

    /// Returns the first `(element, point, previous, current)` where `self`
    /// is below `earlier`.
    pub fn first_decrease(&self, earlier: &QuadHistory) -> Option<(usize, usize, f64, f64)> {
        self.values
            .iter()
            .zip(&earlier.values)
            .enumerate()
            .find_map(|(e, (now, before))| {
                (0..NQ)
                    .find(|&q| now[q] < before[q])
                    .map(|q| (e, q, before[q], now[q]))
            })
    }
}

/// Piecewise-linear, elementwise-discontinuous field stored by its values
/// at the three vertices of each element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementLinearField {
    pub vertex_values: Vec<[f64; 3]>,
}

impl ElementLinearField {
    /// Value at barycentric coordinates `lambda` of element `e`.
    pub fn eval(&self, e: usize, lambda: [f64; 3]) -> f64 {
        let v = self.vertex_values[e];
        v[0] * lambda[0] + v[1] * lambda[1] + v[2] * lambda[2]
    }

    pub fn element_mean(&self, e: usize) -> f64 {
        let v = self.vertex_values[e];
        (v[0] + v[1] + v[2]) / 3.0
    }
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Result<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty range");
        if a[pivot][col] == 0.0 {
            return Err(Error::DegenerateState("singular 3x3 mass matrix".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let tail: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - tail) / a[r][r];
    }
    Ok(x)
}

/// Elementwise L2 projection of quadrature values onto linear functions.
///
/// The element area scales both sides of the local mass system and
/// cancels, so the reference-element system is solved directly.
pub fn project_quadstate(q: &QuadHistory) -> ElementLinearField {
    let rule = QuadratureRule::degree2();
    let mut mass = [[0.0; 3]; 3];
    for k in 0..NQ {
        let n = rule.shape_values(k);
        for i in 0..3 {
            for j in 0..3 {
                mass[i][j] += rule.weights[k] * n[i] * n[j];
            }
        }
    }
    let vertex_values = q
        .values
        .par_iter()
        .map(|h| {
            let mut rhs = [0.0; 3];
            for k in 0..NQ {
                let n = rule.shape_values(k);
                for i in 0..3 {
                    rhs[i] += rule.weights[k] * n[i] * h[k];
                }
            }
            solve3(mass, rhs).expect("P1 mass matrix is nonsingular")
        })
        .collect();
    ElementLinearField { vertex_values }
}

/// Barycentric coordinates of the solver's quadrature points.
#[cfg(test)]
pub(crate) fn quad_barycentric() -> [[f64; 3]; NQ] {
    let rule = QuadratureRule::degree2();
    std::array::from_fn(|k| super::quadrature::barycentric(rule.points[k]))
}
