//! Closed subspaces of the truncated ambient space `V_N = {F : deg F ≤ N}`.
//!
//! A [`Subspace`] is an orthonormal basis stored as the columns of a dense
//! matrix in the degree-major layout. Every rank decision goes through
//! singular values compared against the subspace's single tolerance.
//!
//! Spaces built from a symbol of degree `d` record a comparison band
//! `N − d`: the Beurling space only uses inputs short enough that its vectors
//! are exact products, and the truncated model space over-approximates
//! `K_Θ` by the vectors living in the top `d` degrees. Compressions to the band
//! ([`Subspace::compressed_distance`]) ignore that headroom.

use std::fmt;

use nalgebra::DVector;

use crate::coeff::{CoeffFn, C64};
use crate::error::{Error, Result};
use crate::inner::{check_inner, default_grid, inner_allowance};
use crate::linalg::{self, CMat};
use crate::operators::MatSymbol;
use crate::DEFAULT_TOL;

/// Which shift a certificate talks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShiftOp {
    /// `S`, multiplication by `z`.
    Shift,
    /// `S*`, the backward shift.
    Backshift,
}

impl fmt::Display for ShiftOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShiftOp::Shift => write!(f, "S"),
            ShiftOp::Backshift => write!(f, "S*"),
        }
    }
}

impl std::str::FromStr for ShiftOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S" | "s" | "shift" => Ok(ShiftOp::Shift),
            "S*" | "s*" | "Sstar" | "backshift" => Ok(ShiftOp::Backshift),
            other => Err(Error::InvalidParameter {
                name: "op".into(),
                message: format!("expected S or S*, got `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InvarianceMode {
    /// Only the part of `M` vanishing at the origin is tested.
    Nearly,
    /// All of `M` is tested.
    Almost,
}

impl fmt::Display for InvarianceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvarianceMode::Nearly => write!(f, "nearly"),
            InvarianceMode::Almost => write!(f, "almost"),
        }
    }
}

/// Certified statement `op(M₀) ⊆ M + span(defect_basis)`, where `M₀` is `M`
/// (almost mode) or its vanishing slice (nearly mode).
#[derive(Debug, Clone, PartialEq)]
pub struct DefectCertificate {
    pub op: ShiftOp,
    pub mode: InvarianceMode,
    pub defect_dim: usize,
    /// Orthonormal, orthogonal to `M`.
    pub defect_basis: Vec<CoeffFn>,
    /// Full singular spectrum of the escaping part, descending.
    pub singular_values: Vec<f64>,
    /// Largest singular value not absorbed into the defect basis.
    pub max_residual: f64,
    /// Defect dimension the caller asked for, if any.
    pub bound: Option<usize>,
    pub tol: f64,
}

impl DefectCertificate {
    pub fn holds_with(&self, p: usize) -> bool {
        self.defect_dim <= p
    }

    /// Whether the requested bound (if any) is met.
    pub fn passed(&self) -> bool {
        self.bound.is_none_or(|p| self.holds_with(p))
    }

    /// Largest escaping singular value, i.e. the residual with no defect space.
    pub fn top_singular_value(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    dim_m: usize,
    ambient_deg: usize,
    basis: CMat,
    tol: f64,
    band_deg: usize,
}

impl Subspace {
    pub fn zero(dim_m: usize, ambient_deg: usize) -> Self {
        let n = dim_m * (ambient_deg + 1);
        Subspace {
            dim_m,
            ambient_deg,
            basis: CMat::zeros(n, 0),
            tol: DEFAULT_TOL,
            band_deg: ambient_deg,
        }
    }

    pub fn full(dim_m: usize, ambient_deg: usize) -> Self {
        let n = dim_m * (ambient_deg + 1);
        Subspace {
            basis: CMat::identity(n, n),
            ..Self::zero(dim_m, ambient_deg)
        }
    }

    /// Orthonormal basis of `span(fns)` inside `V_N`; directions with singular
    /// value `≤ tol·max‖fᵢ‖` are discarded.
    pub fn from_spanning(
        dim_m: usize,
        fns: &[CoeffFn],
        ambient_deg: usize,
        tol: f64,
    ) -> Result<Self> {
        let n = dim_m * (ambient_deg + 1);
        let mut cols = Vec::with_capacity(fns.len());
        for f in fns {
            if f.dim_m() != dim_m {
                return Err(Error::DimensionMismatch {
                    expected: dim_m,
                    found: f.dim_m(),
                });
            }
            cols.push(f.flatten(ambient_deg)?);
        }
        Self::from_matrix(dim_m, ambient_deg, &linalg::from_columns(&cols, n), tol)
    }

    /// Orthonormal basis of the column space of a dense spanning matrix.
    pub fn from_matrix(dim_m: usize, ambient_deg: usize, mat: &CMat, tol: f64) -> Result<Self> {
        let n = dim_m * (ambient_deg + 1);
        if mat.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: mat.nrows(),
            });
        }
        let scale = mat
            .column_iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
        let basis = if scale == 0.0 {
            CMat::zeros(n, 0)
        } else {
            linalg::range(mat, tol * scale)
        };
        Ok(Subspace {
            dim_m,
            ambient_deg,
            basis,
            tol,
            band_deg: ambient_deg,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub(crate) fn with_band(mut self, band_deg: usize) -> Self {
        self.band_deg = band_deg.min(self.ambient_deg);
        self
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn dim_m(&self) -> usize {
        self.dim_m
    }

    pub fn ambient_deg(&self) -> usize {
        self.ambient_deg
    }

    /// `m(N + 1)`.
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Highest degree in which comparisons with the untruncated space are valid.
    pub fn band_deg(&self) -> usize {
        self.band_deg
    }

    pub fn basis_matrix(&self) -> &CMat {
        &self.basis
    }

    pub fn basis(&self) -> Vec<CoeffFn> {
        self.basis
            .column_iter()
            .map(|c| CoeffFn::unflatten(self.dim_m, c.as_slice()).expect("finite basis"))
            .collect()
    }

    pub fn projector(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }

    /// Max-entry deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        linalg::orthonormality_defect(&self.basis)
    }

    /// Same subspace viewed inside `V_{ambient_deg}`; shrinking is allowed only
    /// if the dropped top degrees are empty.
    pub fn embed(&self, ambient_deg: usize) -> Result<Subspace> {
        let m = self.dim_m;
        let n_new = m * (ambient_deg + 1);
        let n_old = self.ambient_dim();
        let mut basis = CMat::zeros(n_new, self.dim());
        if n_new >= n_old {
            basis.view_mut((0, 0), (n_old, self.dim())).copy_from(&self.basis);
        } else {
            let dropped = self.basis.rows(n_new, n_old - n_new).norm();
            if dropped > self.tol {
                return Err(Error::TruncationOverflow {
                    deg: self.ambient_deg,
                    ambient: ambient_deg,
                });
            }
            basis.copy_from(&self.basis.rows(0, n_new));
        }
        let band = if ambient_deg >= self.ambient_deg {
            self.band_deg
        } else {
            self.band_deg.min(ambient_deg)
        };
        Ok(Subspace {
            dim_m: m,
            ambient_deg,
            basis,
            tol: self.tol,
            band_deg: band,
        })
    }

    fn check_compatible(&self, other: &Subspace) -> Result<()> {
        if self.dim_m != other.dim_m {
            return Err(Error::DimensionMismatch {
                expected: self.dim_m,
                found: other.dim_m,
            });
        }
        if self.ambient_deg != other.ambient_deg {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_deg,
                found: other.ambient_deg,
            });
        }
        Ok(())
    }

    pub(crate) fn flatten_fn(&self, f: &CoeffFn) -> Result<DVector<C64>> {
        if f.dim_m() != self.dim_m {
            return Err(Error::DimensionMismatch {
                expected: self.dim_m,
                found: f.dim_m(),
            });
        }
        f.flatten(self.ambient_deg)
    }

    pub(crate) fn unflatten(&self, v: &DVector<C64>) -> CoeffFn {
        CoeffFn::unflatten(self.dim_m, v.as_slice()).expect("finite vector")
    }

    /// Orthogonal complement inside `V_N`.
    pub fn complement(&self) -> Subspace {
        let n = self.ambient_dim();
        let basis = if self.dim() == 0 {
            CMat::identity(n, n)
        } else {
            linalg::null_space(&self.basis.adjoint(), 0.5)
        };
        Subspace {
            basis,
            ..self.clone()
        }
    }

    /// `A ∩ B`: vectors of `A` that `P_B` leaves unchanged (at tolerance).
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_compatible(other)?;
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Subspace {
                basis: CMat::zeros(self.ambient_dim(), 0),
                ..self.clone()
            });
        }
        let deficiency = linalg::project_out(&other.basis, &self.basis);
        let coords = linalg::null_space(&deficiency, self.tol);
        Ok(Subspace {
            basis: &self.basis * coords,
            band_deg: self.band_deg.min(other.band_deg),
            ..self.clone()
        })
    }

    /// `A + B` (closed span of the union).
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_compatible(other)?;
        let n = self.ambient_dim();
        let stacked = linalg::hstack(&[&self.basis, &other.basis], n);
        let mut s = Subspace::from_matrix(self.dim_m, self.ambient_deg, &stacked, self.tol)?;
        s.band_deg = self.band_deg.min(other.band_deg);
        Ok(s)
    }

    /// `A + span(fns)`.
    pub fn extended(&self, fns: &[CoeffFn]) -> Result<Subspace> {
        let other = Subspace::from_spanning(self.dim_m, fns, self.ambient_deg, self.tol)?;
        self.sum(&other)
    }

    /// `P_A F`.
    pub fn project(&self, f: &CoeffFn) -> Result<CoeffFn> {
        let v = self.flatten_fn(f)?;
        let p = &self.basis * (self.basis.adjoint() * v);
        Ok(self.unflatten(&p))
    }

    /// `‖F − P_A F‖`.
    pub fn distance_to(&self, f: &CoeffFn) -> Result<f64> {
        let v = self.flatten_fn(f)?;
        let p = &self.basis * (self.basis.adjoint() * &v);
        Ok((v - p).norm())
    }

    /// `σ_max((I − P_A) X)`: how far the columns of `X` stick out of `A`.
    pub fn escape_norm(&self, x: &CMat) -> f64 {
        linalg::spectral_norm(&linalg::project_out(&self.basis, x))
    }

    /// `‖P_A − P_B‖₂`, computed as `max(‖(I−P_B)Q_A‖, ‖(I−P_A)Q_B‖)`.
    pub fn distance(&self, other: &Subspace) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(other
            .escape_norm(&self.basis)
            .max(self.escape_norm(&other.basis)))
    }

    /// `‖Q(P_A − P_B)Q‖₂` where `Q` keeps degrees `≤ band`.
    pub fn compressed_distance(&self, other: &Subspace, band: usize) -> Result<f64> {
        self.check_compatible(other)?;
        let rows = self.dim_m * (band.min(self.ambient_deg) + 1);
        let a = self.basis.rows(0, rows);
        let b = other.basis.rows(0, rows);
        let diff = a * a.adjoint() - b * b.adjoint();
        Ok(linalg::spectral_norm(&diff))
    }

    /// Values at the origin of the basis, an `m × dim` matrix.
    pub(crate) fn eval_at_zero(&self) -> CMat {
        self.basis.rows(0, self.dim_m).into_owned()
    }

    /// `{F ∈ M : F(0) = 0}` = `M ∩ zH²`.
    pub fn vanishing_slice(&self) -> Subspace {
        if self.dim() == 0 {
            return self.clone();
        }
        let coords = linalg::null_space(&self.eval_at_zero(), self.tol);
        Subspace {
            basis: &self.basis * coords,
            ..self.clone()
        }
    }

    /// Wandering space `W = M ⊖ (M ∩ zH²)` with a canonical orthonormal basis:
    /// the matrix of values `[W₁(0) … W_r(0)]` is lower triangular (column
    /// echelon) with a positive diagonal.
    pub fn wandering(&self) -> Result<Subspace> {
        let n = self.ambient_dim();
        if self.dim() == 0 {
            return Ok(self.clone());
        }
        let vals = self.eval_at_zero();
        let (_, s, v) = linalg::svd_sorted(&vals);
        let r = s.iter().take_while(|&&x| x > self.tol).count();
        if r > self.dim_m {
            return Err(Error::InvariantViolation(format!(
                "wandering dimension {r} exceeds m = {}",
                self.dim_m
            )));
        }
        if r == 0 {
            return Ok(Subspace {
                basis: CMat::zeros(n, 0),
                ..self.clone()
            });
        }
        let vr = v.columns(0, r).into_owned();
        let raw = &self.basis * &vr;
        let raw_vals = &vals * &vr;
        // raw_valsᴴ = QR  ⇒  raw_vals·Q = Rᴴ is lower triangular.
        let qr = raw_vals.adjoint().qr();
        let q = qr.q();
        let rr = qr.r();
        let mut basis = raw * q;
        for j in 0..r {
            let d = rr[(j, j)];
            if d.norm() > 0.0 {
                let phase = d / d.norm();
                let mut col = basis.column_mut(j);
                col *= phase;
            }
        }
        Ok(Subspace {
            basis,
            ..self.clone()
        })
    }

    /// Defect certificate for `op(M) ⊆ M + 𝓕`.
    pub fn defect_of(&self, op: ShiftOp) -> Result<DefectCertificate> {
        self.defect_of_family(&self.basis, op, InvarianceMode::Almost)
    }

    /// Applies `op` to the columns of `sources` (vectors of `V_N`), projects onto
    /// `M^⊥` and reads the defect off the singular values.
    pub(crate) fn defect_of_family(
        &self,
        sources: &CMat,
        op: ShiftOp,
        mode: InvarianceMode,
    ) -> Result<DefectCertificate> {
        let moved = apply_op(self.dim_m, sources, op, self.tol).ok_or(
            Error::TruncationOverflow {
                deg: self.ambient_deg + 1,
                ambient: self.ambient_deg,
            },
        )?;
        let escaped = linalg::project_out(&self.basis, &moved);
        let (u, s, _) = linalg::svd_sorted(&escaped);
        let d = s.iter().take_while(|&&x| x > self.tol).count();
        let defect_basis = (0..d)
            .map(|j| self.unflatten(&u.column(j).into_owned()))
            .collect();
        Ok(DefectCertificate {
            op,
            mode,
            defect_dim: d,
            defect_basis,
            max_residual: s.get(d).copied().unwrap_or(0.0),
            singular_values: s,
            bound: None,
            tol: self.tol,
        })
    }

    /// `M ∩ V_deg`.
    pub fn below(&self, deg: usize) -> Subspace {
        if deg >= self.ambient_deg || self.dim() == 0 {
            return self.clone();
        }
        let start = self.dim_m * (deg + 1);
        let upper = self.basis.rows(start, self.ambient_dim() - start).into_owned();
        let coords = linalg::null_space(&upper, self.tol);
        Subspace {
            basis: &self.basis * coords,
            ..self.clone()
        }
    }

    /// Like [`Subspace::defect_of`], but `S` is only applied to `M ∩ V_{N−1}`
    /// so the top degree never overflows. Identical to `defect_of` for `S*`.
    pub fn defect_of_band(&self, op: ShiftOp) -> Result<DefectCertificate> {
        match op {
            ShiftOp::Backshift => self.defect_of(op),
            ShiftOp::Shift => {
                let band = self.below(self.ambient_deg.saturating_sub(1));
                self.defect_of_family(band.basis_matrix(), op, InvarianceMode::Almost)
            }
        }
    }

    /// How far `S` moves `M ∩ V_{N−1}` outside `M`; zero for a truncated
    /// shift-invariant subspace.
    pub fn shift_invariance_residual(&self) -> f64 {
        if self.dim() == 0 || self.ambient_deg == 0 {
            return 0.0;
        }
        let band = self.below(self.ambient_deg - 1);
        match apply_op(self.dim_m, band.basis_matrix(), ShiftOp::Shift, self.tol) {
            Some(moved) => self.escape_norm(&moved),
            None => f64::INFINITY,
        }
    }
}

/// Dense `S` or `S*` on columns in the degree-major layout. `None` if `S`
/// would push a column past the top degree.
pub(crate) fn apply_op(m: usize, x: &CMat, op: ShiftOp, tol: f64) -> Option<CMat> {
    let n = x.nrows();
    let mut out = CMat::zeros(n, x.ncols());
    if x.ncols() == 0 || n == 0 {
        return Some(out);
    }
    match op {
        ShiftOp::Shift => {
            if x.rows(n - m, m).norm() > tol {
                return None;
            }
            out.rows_mut(m, n - m).copy_from(&x.rows(0, n - m));
        }
        ShiftOp::Backshift => {
            out.rows_mut(0, n - m).copy_from(&x.rows(m, n - m));
        }
    }
    Some(out)
}

/// Closed span `ΘH²` at truncation: column `j` of `Θ` is applied to inputs of
/// degree `≤ N − deg Θe_j`, so every basis vector is an exact product.
pub fn beurling_space(t: &MatSymbol, ambient_deg: usize) -> Result<Subspace> {
    let allowed = inner_allowance(t);
    if !t.claimed_inner() {
        let deviation = check_inner(t, default_grid(t))?;
        return Err(Error::NotInner { deviation, allowed });
    }
    let deviation = check_inner(t, default_grid(t))?;
    if deviation > allowed {
        return Err(Error::NotInner { deviation, allowed });
    }
    if ambient_deg < t.deg() {
        return Err(Error::TruncationOverflow {
            deg: t.deg(),
            ambient: ambient_deg,
        });
    }
    // Column j only needs headroom for its own stored degree.
    let m_in = t.m_in();
    let full = t.toeplitz_matrix(ambient_deg);
    let keep: Vec<usize> = (0..m_in)
        .flat_map(|j| {
            let dj = t.column(j).trimmed(0.0).deg();
            (0..=ambient_deg - dj).map(move |n| n * m_in + j)
        })
        .collect();
    let cols = full.select_columns(keep.iter());
    let band = ambient_deg - t.deg();
    Ok(Subspace::from_matrix(t.m_out(), ambient_deg, &cols, DEFAULT_TOL)?.with_band(band))
}

/// Truncated model space `K_Θ`: the complement of [`beurling_space`] in `V_N`.
pub fn model_space(t: &MatSymbol, ambient_deg: usize) -> Result<Subspace> {
    let b = beurling_space(t, ambient_deg)?;
    let band = b.band_deg();
    Ok(b.complement().with_band(band))
}

pub fn subspace_distance(a: &Subspace, b: &Subspace) -> Result<f64> {
    a.distance(b)
}

pub fn defect_of(m: &Subspace, op: ShiftOp) -> Result<DefectCertificate> {
    m.defect_of(op)
}
