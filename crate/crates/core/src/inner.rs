//! Inner functions and inner multipliers: finite Blaschke products, monomials
//! and diagonal assemblies of them.
//!
//! A Blaschke factor with zero `a ≠ 0` is normalized as
//! `b_a(z) = (|a|/a)(a − z)/(1 − āz)`, so `b_a(0) = |a| > 0`; the degenerate
//! factor `b_0(z) = z`. Truncated symbols carry a certified ℓ¹ bound on the
//! discarded Taylor coefficients, which also bounds the tail in `H²` and `H^∞`.

use std::f64::consts::PI;

use crate::coeff::C64;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::operators::MatSymbol;

#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeSpec {
    zeros: Vec<C64>,
    rotation: C64,
}

impl BlaschkeSpec {
    pub fn new(zeros: Vec<C64>, rotation: C64) -> Result<Self> {
        if let Some(&zero) = zeros.iter().find(|a| !a.norm().is_finite() || a.norm() >= 1.0) {
            return Err(Error::ZeroOutsideDisc { zero });
        }
        if !rotation.re.is_finite() || (rotation.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::precondition(format!(
                "rotation {rotation} is not unimodular"
            )));
        }
        Ok(BlaschkeSpec { zeros, rotation })
    }

    /// Product with rotation 1.
    pub fn from_zeros(zeros: Vec<C64>) -> Result<Self> {
        Self::new(zeros, C64::new(1.0, 0.0))
    }

    pub fn zeros(&self) -> &[C64] {
        &self.zeros
    }

    pub fn rotation(&self) -> C64 {
        self.rotation
    }

    /// Closed-form evaluation of `rotation·∏ b_a(z)`.
    pub fn eval(&self, z: C64) -> C64 {
        self.zeros
            .iter()
            .fold(self.rotation, |acc, &a| acc * factor_value(a, z))
    }
}

fn factor_value(a: C64, z: C64) -> C64 {
    if a == C64::new(0.0, 0.0) {
        z
    } else {
        (a.norm() / a) * (a - z) / (C64::new(1.0, 0.0) - a.conj() * z)
    }
}

/// Taylor coefficients of one factor up to `deg`, with the exact ℓ¹ norm of
/// the coefficients beyond `deg`.
fn factor_series(a: C64, deg: usize) -> (Vec<C64>, f64) {
    let mut c = vec![C64::new(0.0, 0.0); deg + 1];
    if a == C64::new(0.0, 0.0) {
        if deg >= 1 {
            c[1] = C64::new(1.0, 0.0);
            return (c, 0.0);
        }
        return (c, 1.0);
    }
    let rho = a.norm();
    let phase = rho / a;
    // (a − z)Σ(āz)ᵏ: c₀ = a, cₙ = āⁿ⁻¹(|a|² − 1).
    c[0] = phase * a;
    let mut pow = C64::new(1.0, 0.0);
    for cn in c.iter_mut().skip(1) {
        *cn = phase * pow * (rho * rho - 1.0);
        pow *= a.conj();
    }
    // Σ_{n>deg} (1 − ρ²)ρⁿ⁻¹ = (1 + ρ)ρ^deg
    (c, (1.0 + rho) * rho.powi(deg as i32))
}

/// Truncated Taylor expansion of a finite Blaschke product as a `1 × 1` symbol.
///
/// Factors are multiplied with [`MatSymbol::mul`], which propagates the tail
/// bounds pessimistically.
pub fn blaschke_scalar(spec: &BlaschkeSpec, deg: usize) -> Result<MatSymbol> {
    let mut acc = MatSymbol::scalar(&[spec.rotation])?
        .retruncated(deg)
        .with_claimed_inner(true);
    for &a in &spec.zeros {
        let (coeffs, tail) = factor_series(a, deg);
        let factor = MatSymbol::scalar(&coeffs)?
            .with_tail_bound(tail)
            .with_claimed_inner(true);
        acc = acc.mul(&factor, deg)?;
    }
    Ok(acc)
}

/// Scalar inner function `zᵏ`, stored to degree `deg`.
pub fn monomial_inner(k: usize, deg: usize) -> Result<MatSymbol> {
    if k > deg {
        return Err(Error::MonomialDegree { k, deg });
    }
    let mut coeffs = vec![C64::new(0.0, 0.0); deg + 1];
    coeffs[k] = C64::new(1.0, 0.0);
    Ok(MatSymbol::scalar(&coeffs)?.with_claimed_inner(true))
}

/// Diagonal inner multiplier `diag(θ₁, …, θ_m)` with entries brought to a
/// common degree.
pub fn diag_inner(entries: &[MatSymbol], deg: usize) -> Result<MatSymbol> {
    if entries.is_empty() {
        return Err(Error::Empty);
    }
    let m = entries.len();
    let mut mats = vec![CMat::zeros(m, m); deg + 1];
    let mut tail: f64 = 0.0;
    for (i, e) in entries.iter().enumerate() {
        if e.m_out() != 1 || e.m_in() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: e.m_out() * e.m_in(),
            });
        }
        if !e.claimed_inner() {
            return Err(Error::precondition(format!(
                "diagonal entry {i} is not an inner symbol"
            )));
        }
        let e = e.retruncated(deg);
        for (k, mk) in mats.iter_mut().enumerate() {
            mk[(i, i)] = e.mats()[k][(0, 0)];
        }
        tail = tail.max(e.tail_bound());
    }
    Ok(MatSymbol::new(m, m, mats)?
        .with_tail_bound(tail)
        .with_claimed_inner(true))
}

/// `max_θ ‖Θ(e^{iθ})ᴴΘ(e^{iθ}) − I‖₂` over a uniform circle grid.
pub fn check_inner(t: &MatSymbol, grid_points: usize) -> Result<f64> {
    let need = 4 * (t.deg() + 1);
    if grid_points < need {
        return Err(Error::precondition(format!(
            "grid of {grid_points} points is too coarse; need at least {need}"
        )));
    }
    let id = CMat::identity(t.m_in(), t.m_in());
    let mut worst: f64 = 0.0;
    for j in 0..grid_points {
        let z = C64::from_polar(1.0, 2.0 * PI * j as f64 / grid_points as f64);
        let v = t.eval(z);
        let dev = v.adjoint() * v - &id;
        worst = worst.max(linalg::spectral_norm(&dev));
    }
    Ok(worst)
}

/// Deviation allowed by [`check_inner`] for a claimed-inner symbol:
/// `‖ΘᴴΘ − I‖ ≤ 2ε + ε² ≤ 3ε` for a tail of size `ε ≤ 1`.
pub fn inner_allowance(t: &MatSymbol) -> f64 {
    3.0 * t.tail_bound() + 1e-10
}

/// Default grid for inner checks: at least 64 and `4(deg+1)` points.
pub fn default_grid(t: &MatSymbol) -> usize {
    (4 * (t.deg() + 1)).max(64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoeffFn;
    use proptest::prelude::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn scalar_coeffs(t: &MatSymbol) -> Vec<C64> {
        t.mats().iter().map(|m| m[(0, 0)]).collect()
    }

    #[test]
    fn blaschke_examples() {
        let z = blaschke_scalar(&BlaschkeSpec::from_zeros(vec![c(0.0)]).unwrap(), 4).unwrap();
        assert_eq!(scalar_coeffs(&z), vec![c(0.0), c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert_eq!(z.tail_bound(), 0.0);

        let b = blaschke_scalar(&BlaschkeSpec::from_zeros(vec![c(0.5)]).unwrap(), 2).unwrap();
        // Hand expansion of (1/2 − z)Σ(z/2)ᵏ.
        let expect = [0.5, -0.75, -0.375];
        for (got, want) in scalar_coeffs(&b).iter().zip(expect) {
            assert!((got - c(want)).norm() < 1e-15);
        }
        assert!(b.claimed_inner());

        let one = blaschke_scalar(&BlaschkeSpec::from_zeros(vec![]).unwrap(), 3).unwrap();
        assert_eq!(scalar_coeffs(&one)[0], c(1.0));
        assert_eq!(one.tail_bound(), 0.0);
    }

    #[test]
    fn blaschke_rejects_zero_on_circle() {
        assert!(matches!(
            BlaschkeSpec::from_zeros(vec![c(1.0)]),
            Err(Error::ZeroOutsideDisc { .. })
        ));
        assert!(BlaschkeSpec::new(vec![], c(2.0)).is_err());
    }

    #[test]
    fn blaschke_normalized_positive_at_origin() {
        let a = C64::new(0.3, -0.4);
        let b = blaschke_scalar(&BlaschkeSpec::from_zeros(vec![a]).unwrap(), 8).unwrap();
        let v0 = b.mats()[0][(0, 0)];
        assert!((v0 - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn truncated_blaschke_matches_closed_form_on_circle() {
        let spec = BlaschkeSpec::new(vec![c(0.5), C64::new(0.0, -0.3), c(0.0)], C64::new(0.0, 1.0))
            .unwrap();
        let b = blaschke_scalar(&spec, 32).unwrap();
        for j in 0..128 {
            let z = C64::from_polar(1.0, 2.0 * PI * j as f64 / 128.0);
            let err = (b.eval(z)[(0, 0)] - spec.eval(z)).norm();
            assert!(err <= b.tail_bound() + 1e-14, "err {err} tail {}", b.tail_bound());
        }
    }

    #[test]
    fn coefficient_decay_is_geometric() {
        let rho: f64 = 0.6;
        let b = blaschke_scalar(&BlaschkeSpec::from_zeros(vec![c(rho)]).unwrap(), 40).unwrap();
        for (k, cf) in scalar_coeffs(&b).iter().enumerate().skip(1) {
            assert!(cf.norm() <= (1.0 - rho * rho) * rho.powi(k as i32 - 1) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn monomial_examples() {
        assert_eq!(scalar_coeffs(&monomial_inner(0, 0).unwrap()), vec![c(1.0)]);
        assert_eq!(
            scalar_coeffs(&monomial_inner(2, 4).unwrap()),
            vec![c(0.0), c(0.0), c(1.0), c(0.0), c(0.0)]
        );
        assert!(matches!(monomial_inner(5, 4), Err(Error::MonomialDegree { .. })));
    }

    #[test]
    fn diag_examples() {
        let z = monomial_inner(1, 1).unwrap();
        let zi = diag_inner(&[z.clone(), z], 1).unwrap();
        assert_eq!(zi.mats()[0], CMat::zeros(2, 2));
        assert_eq!(zi.mats()[1], CMat::identity(2, 2));

        let b = blaschke_scalar(&BlaschkeSpec::from_zeros(vec![c(0.5)]).unwrap(), 8).unwrap();
        let d = diag_inner(&[monomial_inner(2, 8).unwrap(), b.clone()], 8).unwrap();
        assert_eq!(d.column(0), CoeffFn::monomial(2, 2, 0).padded(8).unwrap());
        let col1: Vec<C64> = (0..=8).map(|k| d.column(1).coeff(k)[1]).collect();
        assert_eq!(col1, scalar_coeffs(&b));
        assert_eq!(d.tail_bound(), b.tail_bound());

        let id = diag_inner(&[monomial_inner(0, 0).unwrap()], 0).unwrap();
        assert_eq!(id.mats()[0], CMat::identity(1, 1));

        assert_eq!(diag_inner(&[], 3), Err(Error::Empty));
    }

    #[test]
    fn check_inner_examples() {
        let z = monomial_inner(1, 1).unwrap();
        let zi = diag_inner(&[z.clone(), z], 1).unwrap();
        assert!(check_inner(&zi, 64).unwrap() <= 1e-12);
        let d = diag_inner(&[monomial_inner(2, 3).unwrap(), monomial_inner(3, 3).unwrap()], 3)
            .unwrap();
        assert!(check_inner(&d, 64).unwrap() <= 1e-12);
        let b = blaschke_scalar(&BlaschkeSpec::from_zeros(vec![c(0.5)]).unwrap(), 32).unwrap();
        assert!(check_inner(&b, 256).unwrap() <= 3.0 * b.tail_bound());
        assert!(check_inner(&b, 16).is_err());
        let not_inner = MatSymbol::scalar(&[c(1.0), c(1.0)]).unwrap();
        assert!(check_inner(&not_inner, 64).unwrap() > 1.0);
    }

    #[test]
    fn monomial_multiplier_is_k_fold_shift() {
        let f = CoeffFn::scalar(&[C64::new(1.0, 2.0), C64::new(-0.5, 0.1)]).unwrap();
        let t = monomial_inner(3, 3).unwrap();
        let out = t.apply(&f).unwrap().trimmed(0.0);
        assert_eq!(out, f.shift().shift().shift());
        assert_eq!(out.norm(), f.norm());
    }

    proptest! {
        #[test]
        fn truncated_inner_is_isometric_up_to_tail(
            re in -0.7..0.7f64, im in -0.7..0.7f64, deg in 8usize..24,
            f in prop::collection::vec(-1.0..1.0f64, 1..6),
        ) {
            let a = C64::new(re, im);
            prop_assume!(a.norm() < 0.95);
            let b = blaschke_scalar(&BlaschkeSpec::from_zeros(vec![a]).unwrap(), deg).unwrap();
            let f = CoeffFn::scalar_real(&f).unwrap();
            let eps = b.tail_bound();
            let gap = (b.apply(&f).unwrap().norm() - f.norm()).abs();
            prop_assert!(gap <= (2.0 * eps + eps * eps).sqrt() * f.norm() + 1e-12);
        }
    }
}
