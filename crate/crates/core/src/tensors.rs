//! Symmetric 2D tensors in Voigt layout.
//!
//! Components are ordered `(xx, yy, xy)`. A [`SymTensor2`] stores the tensor
//! shear component, not the engineering strain, so every contraction that
//! sums over the shear index counts it twice. A [`SymTensor4`] stores the
//! 3×3 matrix `M[a][b] = T_{ij kl}` for Voigt pairs `a = (ij)`, `b = (kl)`,
//! with both minor symmetries implied.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Multiplicity of each Voigt slot in a full double contraction.
const VOIGT_WEIGHT: [f64; 3] = [1.0, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor2 {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl SymTensor2 {
    pub const ZERO: SymTensor2 = SymTensor2::new(0.0, 0.0, 0.0);
    pub const IDENTITY: SymTensor2 = SymTensor2::new(1.0, 1.0, 0.0);

    pub const fn new(xx: f64, yy: f64, xy: f64) -> Self {
        SymTensor2 { xx, yy, xy }
    }

    pub const fn diag(xx: f64, yy: f64) -> Self {
        SymTensor2 { xx, yy, xy: 0.0 }
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn to_voigt(self) -> [f64; 3] {
        [self.xx, self.yy, self.xy]
    }

    pub fn from_voigt(v: [f64; 3]) -> Self {
        SymTensor2::new(v[0], v[1], v[2])
    }

    /// Frobenius norm of the full 2×2 tensor.
    pub fn norm(&self) -> f64 {
        contract22(*self, *self).sqrt()
    }

    /// Traction `σ·n` for a unit normal `n`.
    pub fn apply(&self, n: [f64; 2]) -> [f64; 2] {
        [
            self.xx * n[0] + self.xy * n[1],
            self.xy * n[0] + self.yy * n[1],
        ]
    }
}

impl Add for SymTensor2 {
    type Output = SymTensor2;
    fn add(self, o: SymTensor2) -> SymTensor2 {
        SymTensor2::new(self.xx + o.xx, self.yy + o.yy, self.xy + o.xy)
    }
}

impl Sub for SymTensor2 {
    type Output = SymTensor2;
    fn sub(self, o: SymTensor2) -> SymTensor2 {
        SymTensor2::new(self.xx - o.xx, self.yy - o.yy, self.xy - o.xy)
    }
}

impl Neg for SymTensor2 {
    type Output = SymTensor2;
    fn neg(self) -> SymTensor2 {
        SymTensor2::new(-self.xx, -self.yy, -self.xy)
    }
}

impl Mul<SymTensor2> for f64 {
    type Output = SymTensor2;
    fn mul(self, t: SymTensor2) -> SymTensor2 {
        SymTensor2::new(self * t.xx, self * t.yy, self * t.xy)
    }
}

/// Fourth-order tensor with minor symmetries, stored as a Voigt matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor4 {
    pub m: [[f64; 3]; 3],
}

impl SymTensor4 {
    pub const ZERO: SymTensor4 = SymTensor4 { m: [[0.0; 3]; 3] };

    pub const fn from_matrix(m: [[f64; 3]; 3]) -> Self {
        SymTensor4 { m }
    }

    /// Symmetric identity `½(δ_ik δ_jl + δ_il δ_jk)`; maps every symmetric
    /// tensor onto itself.
    pub fn identity() -> Self {
        SymTensor4::from_matrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.5]])
    }

    /// Dyadic product `(a ⊗ b)_ijkl = a_ij b_kl`.
    pub fn outer(a: SymTensor2, b: SymTensor2) -> Self {
        let (a, b) = (a.to_voigt(), b.to_voigt());
        let mut m = [[0.0; 3]; 3];
        for (p, row) in m.iter_mut().enumerate() {
            for (q, v) in row.iter_mut().enumerate() {
                *v = a[p] * b[q];
            }
        }
        SymTensor4 { m }
    }

    pub fn transpose(&self) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (p, row) in m.iter_mut().enumerate() {
            for (q, v) in row.iter_mut().enumerate() {
                *v = self.m[q][p];
            }
        }
        SymTensor4 { m }
    }

    pub fn is_major_symmetric(&self) -> bool {
        (0..3).all(|p| (0..3).all(|q| self.m[p][q] == self.m[q][p]))
    }

    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

impl Add for SymTensor4 {
    type Output = SymTensor4;
    fn add(mut self, o: SymTensor4) -> SymTensor4 {
        for p in 0..3 {
            for q in 0..3 {
                self.m[p][q] += o.m[p][q];
            }
        }
        self
    }
}

impl Sub for SymTensor4 {
    type Output = SymTensor4;
    fn sub(mut self, o: SymTensor4) -> SymTensor4 {
        for p in 0..3 {
            for q in 0..3 {
                self.m[p][q] -= o.m[p][q];
            }
        }
        self
    }
}

impl Mul<SymTensor4> for f64 {
    type Output = SymTensor4;
    fn mul(self, mut t: SymTensor4) -> SymTensor4 {
        t.m.iter_mut().flatten().for_each(|v| *v *= self);
        t
    }
}

/// `(C:e)_ij = Σ_kl C_ijkl e_kl`.
pub fn contract42(c: &SymTensor4, e: SymTensor2) -> SymTensor2 {
    let e = e.to_voigt();
    let mut out = [0.0; 3];
    for (p, o) in out.iter_mut().enumerate() {
        *o = (0..3).map(|q| c.m[p][q] * VOIGT_WEIGHT[q] * e[q]).sum();
    }
    SymTensor2::from_voigt(out)
}

/// `a:b = Σ_ij a_ij b_ij`.
pub fn contract22(a: SymTensor2, b: SymTensor2) -> f64 {
    a.xx * b.xx + a.yy * b.yy + 2.0 * a.xy * b.xy
}

/// `(AB)_ijkl = Σ_mn A_ijmn B_mnkl`, so that `(AB):e = A:(B:e)`.
pub fn compose44(a: &SymTensor4, b: &SymTensor4) -> SymTensor4 {
    let mut m = [[0.0; 3]; 3];
    for (p, row) in m.iter_mut().enumerate() {
        for (q, v) in row.iter_mut().enumerate() {
            *v = (0..3)
                .map(|r| a.m[p][r] * VOIGT_WEIGHT[r] * b.m[r][q])
                .sum();
        }
    }
    SymTensor4 { m }
}

/// Volumetric and deviatoric projectors `(P_vol, P_dev)`.
///
/// `P_vol = (1/3) I⊗I` keeps the three-dimensional 1/3 factor in 2D, so
/// `P_vol` is not idempotent here (`P_vol² = (2/3) P_vol`) and the
/// deviatoric image of `e` has trace `tr(e)/3`.
pub fn projectors() -> (SymTensor4, SymTensor4) {
    let p_vol = (1.0 / 3.0) * SymTensor4::outer(SymTensor2::IDENTITY, SymTensor2::IDENTITY);
    let p_dev = SymTensor4::identity() - p_vol;
    (p_vol, p_dev)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanarMode {
    PlaneStress,
    PlaneStrain,
}

/// Isotropic elasticity tensor for a planar state.
pub fn make_elasticity_tensor(e: f64, nu: f64, mode: PlanarMode) -> Result<SymTensor4> {
    if !(e.is_finite() && e > 0.0) {
        return Err(Error::Parameter(format!(
            "Young's modulus must be positive, got {e}"
        )));
    }
    let nu_ok = match mode {
        PlanarMode::PlaneStress => nu > -1.0 && nu <= 0.5,
        PlanarMode::PlaneStrain => nu > -1.0 && nu < 0.5,
    };
    if !nu_ok {
        return Err(Error::Parameter(format!(
            "Poisson's ratio {nu} out of range for {mode:?}"
        )));
    }

    let (c1111, c1122, c2222) = match mode {
        PlanarMode::PlaneStress => {
            let d = 1.0 - nu * nu;
            (e / d, nu * e / d, e / d)
        }
        PlanarMode::PlaneStrain => {
            let d = 1.0 - nu - 2.0 * nu * nu;
            (
                e * (1.0 - nu * nu) / ((1.0 + nu) * d),
                nu * e / d,
                e * (1.0 - nu) / d,
            )
        }
    };
    let c1212 = e / (2.0 * (1.0 + nu));
    Ok(SymTensor4::from_matrix([
        [c1111, c1122, 0.0],
        [c1122, c2222, 0.0],
        [0.0, 0.0, c1212],
    ]))
}
