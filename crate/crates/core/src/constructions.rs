//! Ready-made subspaces used by the scenario harness, the acceptance suite and
//! the Python bindings.

use crate::coeff::{CoeffFn, C64};
use crate::error::{Error, Result};
use crate::inner::{blaschke_scalar, diag_inner, monomial_inner, BlaschkeSpec};
use crate::nearly::synthesize_m;
use crate::operators::MatSymbol;
use crate::subspace::{beurling_space, model_space, Subspace};
use crate::DEFAULT_TOL;

/// Single Blaschke factor `b_a` truncated at `deg`.
pub fn blaschke(a: C64, deg: usize) -> Result<MatSymbol> {
    blaschke_scalar(&BlaschkeSpec::from_zeros(vec![a])?, deg)
}

/// `diag(z^{k₁}, …, z^{k_m})`.
pub fn diag_monomial(ks: &[usize]) -> Result<MatSymbol> {
    let d = ks.iter().copied().max().ok_or(Error::Empty)?;
    let entries = ks
        .iter()
        .map(|&k| monomial_inner(k, d))
        .collect::<Result<Vec<_>>>()?;
    diag_inner(&entries, d)
}

/// `f · e_i` in `ℂᵐ` for a scalar `f`.
pub fn place(f: &CoeffFn, m: usize, i: usize) -> Result<CoeffFn> {
    if f.dim_m() != 1 || i >= m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: i,
        });
    }
    let parts: Vec<CoeffFn> = (0..m)
        .map(|j| if j == i { f.clone() } else { CoeffFn::zeros(1, 0) })
        .collect();
    CoeffFn::stack(&parts)
}

/// `ΨK_Θ` in `V_N`, with `K_Θ` truncated at `N − deg Ψ` so every image is an
/// exact product.
pub fn psi_k_theta(psi: &MatSymbol, theta: &MatSymbol, ambient_deg: usize) -> Result<Subspace> {
    if ambient_deg < psi.deg() {
        return Err(Error::TruncationOverflow {
            deg: psi.deg(),
            ambient: ambient_deg,
        });
    }
    let k = model_space(theta, ambient_deg - psi.deg())?;
    let images = k
        .basis()
        .iter()
        .map(|f| psi.apply_multiplier(f, ambient_deg))
        .collect::<Result<Vec<_>>>()?;
    Subspace::from_spanning(psi.m_out(), &images, ambient_deg, DEFAULT_TOL)
}

/// Both sides of `(ΨK_Θ)^⊥ = ΨΘH² ⊕ K_Ψ` in `V_N`.
#[derive(Debug, Clone)]
pub struct OrthocomplementLemma {
    pub lhs: Subspace,
    pub rhs: Subspace,
    /// Tail bound of the product symbol `ΨΘ`.
    pub tail: f64,
}

pub fn orthocomplement_lemma(
    psi: &MatSymbol,
    theta: &MatSymbol,
    ambient_deg: usize,
) -> Result<OrthocomplementLemma> {
    let lhs = psi_k_theta(psi, theta, ambient_deg)?.complement();
    let prod = psi.mul(theta, psi.deg() + theta.deg())?;
    let rhs = beurling_space(&prod, ambient_deg)?.sum(&model_space(psi, ambient_deg)?)?;
    Ok(OrthocomplementLemma {
        lhs,
        rhs,
        tail: prod.tail_bound(),
    })
}

/// `(ΘK_Θ)^⊥` for `Θ = zI_m`: everything except `span{z e_i}`.
pub fn counterexample_space(m: usize, ambient_deg: usize) -> Result<Subspace> {
    if ambient_deg < 2 {
        return Err(Error::InvalidParameter {
            name: "N".into(),
            message: "need N ≥ 2".into(),
        });
    }
    let theta = diag_monomial(&vec![1; m])?;
    Ok(psi_k_theta(&theta, &theta, ambient_deg)?.complement())
}

/// `M = span{(1+z)/√2}` together with the complementary direction
/// `(1−z)/√2` in `span{1, z}`.
pub fn hand_example(ambient_deg: usize) -> Result<(Subspace, CoeffFn)> {
    let s = 0.5f64.sqrt();
    let m = Subspace::from_spanning(1, &[CoeffFn::scalar_real(&[s, s])?], ambient_deg, DEFAULT_TOL)?;
    Ok((m, CoeffFn::scalar_real(&[s, -s])?))
}

const PSI_ZEROS: [(f64, f64); 4] = [(1.0 / 3.0, 0.0), (-0.25, 0.0), (0.0, 1.0 / 3.0), (0.2, 0.2)];
const K_EXPONENTS: [usize; 4] = [2, 3, 2, 3];
const E_BLASCHKE_ZERO: f64 = 0.25;

/// Synthesized nearly `S*`-invariant space with wandering rank `r` and defect `p`.
///
/// `m = r + p`; `F₀ = [ψᵢ eᵢ]` with single Blaschke factors `ψᵢ`, `E₁ = e_{r+1}`,
/// `E_j = b_{1/4} e_{r+j}` for `j ≥ 2`, and `K` is the model space of a diagonal
/// monomial symbol on `ℂ^{r+p}`.
#[derive(Debug, Clone)]
pub struct DefectExample {
    pub r: usize,
    pub p: usize,
    pub ambient_deg: usize,
    pub k_exponents: Vec<usize>,
    pub k: Subspace,
    pub f0_cols: Vec<CoeffFn>,
    pub e: Vec<CoeffFn>,
    pub space: Subspace,
    /// Largest tail bound among the truncated factors.
    pub tail: f64,
}

impl DefectExample {
    pub fn f0_symbol(&self) -> Result<Option<MatSymbol>> {
        if self.r == 0 {
            return Ok(None);
        }
        MatSymbol::from_columns(&self.f0_cols).map(Some)
    }

    pub fn e_symbols(&self) -> Result<Vec<MatSymbol>> {
        self.e
            .iter()
            .map(|f| MatSymbol::from_columns(std::slice::from_ref(f)))
            .collect()
    }
}

pub fn defect_example(r: usize, p: usize, ambient_deg: usize) -> Result<DefectExample> {
    let m = r + p;
    if m == 0 || r > PSI_ZEROS.len() || m > K_EXPONENTS.len() {
        return Err(Error::InvalidParameter {
            name: "r, p".into(),
            message: format!("need 1 ≤ r + p ≤ {} and r ≤ {}", K_EXPONENTS.len(), PSI_ZEROS.len()),
        });
    }
    let k_exponents = K_EXPONENTS[..m].to_vec();
    let nk = k_exponents.iter().copied().max().unwrap_or(0) + 1;
    if ambient_deg < nk + 8 {
        return Err(Error::InvalidParameter {
            name: "N".into(),
            message: format!("need N ≥ {}", nk + 8),
        });
    }
    let k = model_space(&diag_monomial(&k_exponents)?, nk)?;
    let d = ambient_deg - nk;
    let mut tail: f64 = 0.0;
    let mut f0_cols = Vec::with_capacity(r);
    for (i, &(re, im)) in PSI_ZEROS[..r].iter().enumerate() {
        let b = blaschke(C64::new(re, im), d)?;
        tail = tail.max(b.tail_bound());
        f0_cols.push(place(&b.column(0), m, i)?);
    }
    let mut e = Vec::with_capacity(p);
    for j in 0..p {
        let scalar = if j == 0 {
            CoeffFn::scalar_real(&[1.0])?
        } else {
            let b = blaschke(C64::new(E_BLASCHKE_ZERO, 0.0), d - 1)?;
            tail = tail.max(b.tail_bound());
            b.column(0)
        };
        e.push(place(&scalar, m, r + j)?);
    }
    let space = synthesize_m(&k, &f0_cols, &e, ambient_deg)?;
    Ok(DefectExample {
        r,
        p,
        ambient_deg,
        k_exponents,
        k,
        f0_cols,
        e,
        space,
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defect_example_shapes() {
        for (r, p) in [(1, 1), (2, 1), (2, 2), (0, 1)] {
            let ex = defect_example(r, p, 24).unwrap();
            assert_eq!(ex.space.dim(), ex.k.dim());
            assert_eq!(ex.space.dim_m(), r + p);
            assert_eq!(ex.space.wandering().unwrap().dim(), r);
        }
    }

    #[test]
    fn counterexample_is_complement_of_z_constants() {
        let m = counterexample_space(2, 5).unwrap();
        assert_eq!(m.dim(), 2 * 6 - 2);
        assert!(m.distance_to(&CoeffFn::monomial(2, 1, 0)).unwrap() > 0.99);
        assert!(m.distance_to(&CoeffFn::monomial(2, 2, 1)).unwrap() < 1e-12);
    }
}
