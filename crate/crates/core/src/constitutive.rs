//! Pointwise material laws: tension/compression split energy, degraded
//! stress, modified tangent and the history update.
//!
//! The branch is chosen on the sign of `tr ε`. Under plane strain the 2D
//! projectors use the 3D factor 1/3, so equibiaxial compression still
//! carries a nonzero `ψ₊`; this is intentional and tested.

use crate::error::{Error, Result};
use crate::tensors::{
    compose44, contract22, contract42, make_elasticity_tensor, projectors, PlanarMode, SymTensor2,
    SymTensor4,
};

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialParams {
    pub e: f64,
    pub nu: f64,
    pub gc: f64,
    pub ls: f64,
    pub eta: f64,
    pub mode: PlanarMode,
    c: SymTensor4,
    p_vol: SymTensor4,
    p_dev: SymTensor4,
    p_dev_c: SymTensor4,
    p_vol_c: SymTensor4,
}

impl MaterialParams {
    pub fn new(e: f64, nu: f64, gc: f64, ls: f64, eta: f64, mode: PlanarMode) -> Result<Self> {
        let c = make_elasticity_tensor(e, nu, mode)?;
        if !(gc > 0.0 && gc.is_finite()) {
            return Err(Error::Parameter(format!("Gc must be positive, got {gc}")));
        }
        if !(ls > 0.0 && ls.is_finite()) {
            return Err(Error::Parameter(format!("ls must be positive, got {ls}")));
        }
        if !(0.0..1.0).contains(&eta) {
            return Err(Error::Parameter(format!(
                "eta must lie in [0, 1), got {eta}"
            )));
        }
        let (p_vol, p_dev) = projectors();
        Ok(MaterialParams {
            e,
            nu,
            gc,
            ls,
            eta,
            mode,
            p_dev_c: compose44(&p_dev, &c),
            p_vol_c: compose44(&p_vol, &c),
            c,
            p_vol,
            p_dev,
        })
    }

    /// Same material with a different residual stiffness.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(self.e, self.nu, self.gc, self.ls, eta, self.mode)
    }

    pub fn elasticity(&self) -> &SymTensor4 {
        &self.c
    }

    pub fn p_vol(&self) -> &SymTensor4 {
        &self.p_vol
    }

    pub fn p_dev(&self) -> &SymTensor4 {
        &self.p_dev
    }

    fn degradation(&self, s: f64) -> f64 {
        s * s + self.eta
    }
}

/// Tensile part of the elastic energy density; `η` does not enter.
pub fn psi_plus(eps: SymTensor2, m: &MaterialParams) -> f64 {
    let sigma = contract42(&m.c, eps);
    if eps.trace() >= 0.0 {
        0.5 * contract22(eps, sigma)
    } else {
        0.5 * contract22(contract42(&m.p_dev, sigma), contract42(&m.p_dev, eps))
    }
}

/// Degraded stress; `eps_branch` selects the branch only.
pub fn stress(eps: SymTensor2, eps_branch: SymTensor2, s: f64, m: &MaterialParams) -> SymTensor2 {
    let g = m.degradation(s);
    let sigma = contract42(&m.c, eps);
    if eps_branch.trace() >= 0.0 {
        g * sigma
    } else {
        g * contract42(&m.p_dev, sigma) + contract42(&m.p_vol, sigma)
    }
}

/// Modified tangent with `tangent_cmod(e, s, m) : x == stress(x, e, s, m)`.
pub fn tangent_cmod(eps_branch: SymTensor2, s: f64, m: &MaterialParams) -> SymTensor4 {
    let g = m.degradation(s);
    if eps_branch.trace() >= 0.0 {
        g * m.c
    } else {
        g * m.p_dev_c + m.p_vol_c
    }
}

/// Irreversible driving force: `max(h_prev, psi_now)`.
pub fn update_history(h_prev: f64, psi_now: f64) -> Result<f64> {
    if !(h_prev >= 0.0) || !(psi_now >= 0.0) {
        return Err(Error::Parameter(format!(
            "history update needs nonnegative energies, got h_prev={h_prev}, psi={psi_now}"
        )));
    }
    Ok(h_prev.max(psi_now))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn concrete(eta: f64) -> MaterialParams {
        MaterialParams::new(20.8, 0.3, 5e-4, 0.03, eta, PlanarMode::PlaneStrain).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn psi_plus_examples() {
        let m = concrete(0.0);
        assert_eq!(psi_plus(SymTensor2::ZERO, &m), 0.0);
        assert!(close(
            psi_plus(SymTensor2::new(0.0, 0.0, 0.5), &m),
            4.0,
            1e-14
        ));

        // By hand: σ = -0.04 I, P_dev σ = -(0.04/3) I,
        // P_dev ε = -(1e-3/3) I, contraction over two diagonal entries.
        let oracle = 0.5 * 2.0 * (0.04 / 3.0) * (1e-3 / 3.0);
        let got = psi_plus(-1e-3 * SymTensor2::IDENTITY, &m);
        assert!(close(got, oracle, 1e-12));
        assert!(close(got, 4.4444e-6, 1e-4));
    }

    #[test]
    fn stress_examples() {
        let m = concrete(0.0);
        let e = SymTensor2::new(0.7, -0.3, 0.2);
        let elastic = contract42(m.elasticity(), e);
        assert_eq!(stress(e, e, 1.0, &m), elastic);
        assert!((stress(e, -e, 1.0, &m) - elastic).norm() < 1e-14 * elastic.norm());

        let m = concrete(1e-15);
        let e = SymTensor2::diag(1e-3, 0.0);
        let s = stress(e, e, 0.0, &m);
        assert!(close(s.xx, 1e-15 * 0.028, 1e-12));
        assert!(close(s.yy, 1e-15 * 0.012, 1e-12));
        assert_eq!(s.xy, 0.0);

        let m = concrete(0.0);
        let e = -1e-3 * SymTensor2::IDENTITY;
        let s = stress(e, e, 0.0, &m);
        assert!(close(s.xx, -0.08 / 3.0, 1e-12));
        assert!(close(s.yy, -0.08 / 3.0, 1e-12));
        assert_eq!(s.xy, 0.0);
    }

    #[test]
    fn tangent_examples() {
        let m = concrete(0.0);
        let c = *m.elasticity();
        assert_eq!(tangent_cmod(SymTensor2::IDENTITY, 1.0, &m), c);
        let compressive = tangent_cmod(-SymTensor2::IDENTITY, 1.0, &m);
        assert!((compressive - c).max_abs() < 1e-14 * c.max_abs());

        let (p_vol, _) = projectors();
        let vol_only = tangent_cmod(-SymTensor2::IDENTITY, 0.0, &m);
        assert_eq!(vol_only, compose44(&p_vol, &c));
        // λ=12, μ=8: P_vol C maps diag(1,0) to (28+12)/3 on both diagonals.
        let img = contract42(&vol_only, SymTensor2::diag(1.0, 0.0));
        assert!(close(img.xx, 40.0 / 3.0, 1e-14) && close(img.yy, 40.0 / 3.0, 1e-14));
    }

    #[test]
    fn tangent_is_symmetric_and_positive_with_eta() {
        let m = concrete(1e-6);
        let t = tangent_cmod(-SymTensor2::IDENTITY, 0.0, &m);
        assert!((t - t.transpose()).max_abs() < 1e-14 * t.max_abs());
        for x in [
            SymTensor2::new(1.0, -1.0, 0.0),
            SymTensor2::new(0.0, 0.0, 1.0),
            SymTensor2::new(1.0, 1.0, 0.0),
        ] {
            assert!(contract22(x, contract42(&t, x)) > 0.0);
        }
    }

    #[test]
    fn history_examples() {
        assert_eq!(update_history(2.0, 3.0).unwrap(), 3.0);
        assert_eq!(update_history(2.0, 1.0).unwrap(), 2.0);
        assert_eq!(update_history(0.0, 0.0).unwrap(), 0.0);
        assert!(update_history(-1.0, 0.0).is_err());
        assert!(update_history(0.0, -1e-30).is_err());
        assert!(update_history(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        let mode = PlanarMode::PlaneStrain;
        assert!(MaterialParams::new(0.0, 0.3, 1.0, 1.0, 0.0, mode).is_err());
        assert!(MaterialParams::new(1.0, 0.3, 0.0, 1.0, 0.0, mode).is_err());
        assert!(MaterialParams::new(1.0, 0.3, 1.0, -1.0, 0.0, mode).is_err());
        assert!(MaterialParams::new(1.0, 0.3, 1.0, 1.0, -1e-3, mode).is_err());
        assert!(MaterialParams::new(1.0, 0.5, 1.0, 1.0, 0.0, mode).is_err());
    }

    fn sym2() -> impl Strategy<Value = SymTensor2> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b, c)| SymTensor2::new(a, b, c))
    }

    proptest! {
        #[test]
        fn tangent_matches_stress(e in sym2(), x in sym2(), s in 0.0..1.0f64) {
            let m = concrete(1e-3);
            let via_tangent = contract42(&tangent_cmod(e, s, &m), x);
            let direct = stress(x, e, s, &m);
            let scale = direct.norm().max(contract42(m.elasticity(), x).norm()).max(1e-300);
            prop_assert!((via_tangent - direct).norm() <= 1e-14 * scale);
        }

        #[test]
        fn tensile_stress_monotone_in_s(e in sym2(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
            prop_assume!(e.trace() >= 0.0);
            let m = concrete(1e-15);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(stress(e, e, lo, &m).norm() <= stress(e, e, hi, &m).norm());
        }

        #[test]
        fn history_max_is_idempotent_and_commutative(
            h in 0.0..10.0f64,
            vals in prop::collection::vec(0.0..10.0f64, 1..8),
        ) {
            let fold = |seq: &[f64]| seq.iter().try_fold(h, |acc, &p| update_history(acc, p)).unwrap();
            let forward = fold(&vals);
            let mut rev = vals.clone();
            rev.reverse();
            prop_assert_eq!(forward, fold(&rev));
            prop_assert_eq!(update_history(forward, forward).unwrap(), forward);
        }

        #[test]
        fn psi_plus_nonnegative(e in sym2()) {
            prop_assert!(psi_plus(e, &concrete(0.0)) >= 0.0);
        }
    }
}
