//! Quadrature on the reference triangle and on straight edges.

/// Points on the reference triangle `(0,0),(1,0),(0,1)` with weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Three interior points, exact for polynomials of degree 2.
    pub fn degree2() -> Self {
        QuadratureRule {
            points: vec![
                [1.0 / 6.0, 1.0 / 6.0],
                [2.0 / 3.0, 1.0 / 6.0],
                [1.0 / 6.0, 2.0 / 3.0],
            ],
            weights: vec![1.0 / 6.0; 3],
        }
    }

    /// Seven-point Dunavant rule, exact for degree 5. Used to measure
    /// discretization errors without polluting them with quadrature error.
    pub fn degree5() -> Self {
        let a1 = 0.059_715_871_789_770;
        let b1 = 0.470_142_064_105_115;
        let a2 = 0.797_426_985_353_087;
        let b2 = 0.101_286_507_323_456;
        let w0 = 0.225 / 2.0;
        let w1 = 0.132_394_152_788_506 / 2.0;
        let w2 = 0.125_939_180_544_827 / 2.0;
        QuadratureRule {
            points: vec![
                [1.0 / 3.0, 1.0 / 3.0],
                [b1, b1],
                [a1, b1],
                [b1, a1],
                [b2, b2],
                [a2, b2],
                [b2, a2],
            ],
            weights: vec![w0, w1, w1, w1, w2, w2, w2],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// P1 shape function values `(1-ξ-η, ξ, η)` at point `q`.
    pub fn shape_values(&self, q: usize) -> [f64; 3] {
        barycentric(self.points[q])
    }
}

pub fn barycentric(p: [f64; 2]) -> [f64; 3] {
    [1.0 - p[0] - p[1], p[0], p[1]]
}

/// Number of points of the triangle rule used by the solver.
pub const NQ: usize = 3;

/// Two-point Gauss rule on `[0, 1]`: `(parameter, weight)` pairs.
pub fn gauss2_unit() -> [(f64, f64); 2] {
    let d = 0.5 / 3.0_f64.sqrt();
    [(0.5 - d, 0.5), (0.5 + d, 0.5)]
}
