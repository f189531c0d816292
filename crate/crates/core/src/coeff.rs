//! Truncated `ℂᵐ`-valued Hardy-space functions.
//!
//! A [`CoeffFn`] stores `F(z) = Σ_{n≤N} A_n zⁿ` as a flat, degree-major array:
//! entry `n·m + i` is the `i`-th component of `A_n`. The same layout is used
//! when a function is embedded into a dense vector ([`CoeffFn::flatten`]), so
//! block `n` of every matrix in this crate corresponds to degree `n`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Slack on `|z| ≤ 1` so that roots of unity computed in floating point pass.
const DISC_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffFn {
    dim_m: usize,
    coeffs: Vec<C64>,
}

impl CoeffFn {
    /// Builds a function from its coefficient vectors `A_0, …, A_N`.
    pub fn new(dim_m: usize, coeffs: Vec<Vec<C64>>) -> Result<Self> {
        if dim_m == 0 {
            return Err(Error::precondition("dim_m must be positive"));
        }
        if coeffs.is_empty() {
            return Err(Error::Empty);
        }
        let mut flat = Vec::with_capacity(dim_m * coeffs.len());
        for a in coeffs {
            if a.len() != dim_m {
                return Err(Error::DimensionMismatch {
                    expected: dim_m,
                    found: a.len(),
                });
            }
            flat.extend(a);
        }
        Self::from_flat(dim_m, flat)
    }

    /// Builds a function from a degree-major flat coefficient array.
    pub fn from_flat(dim_m: usize, flat: Vec<C64>) -> Result<Self> {
        if dim_m == 0 {
            return Err(Error::precondition("dim_m must be positive"));
        }
        if flat.is_empty() {
            return Err(Error::Empty);
        }
        if !flat.len().is_multiple_of(dim_m) {
            return Err(Error::DimensionMismatch {
                expected: dim_m,
                found: flat.len() % dim_m,
            });
        }
        if let Some(idx) = flat.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite {
                deg: idx / dim_m,
                component: idx % dim_m,
            });
        }
        Ok(CoeffFn { dim_m, coeffs: flat })
    }

    /// Scalar (`m = 1`) function from its coefficients.
    pub fn scalar(coeffs: &[C64]) -> Result<Self> {
        Self::from_flat(1, coeffs.to_vec())
    }

    /// Scalar function from real coefficients.
    pub fn scalar_real(coeffs: &[f64]) -> Result<Self> {
        Self::from_flat(1, coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// The canonical zero function: degree 0, one zero vector.
    pub fn zero(dim_m: usize) -> Self {
        Self::zeros(dim_m, 0)
    }

    /// Zero function carrying an explicit degree.
    pub fn zeros(dim_m: usize, deg: usize) -> Self {
        assert!(dim_m > 0, "dim_m must be positive");
        CoeffFn {
            dim_m,
            coeffs: vec![C64::new(0.0, 0.0); dim_m * (deg + 1)],
        }
    }

    /// `zᵏ e_i`.
    pub fn monomial(dim_m: usize, k: usize, i: usize) -> Self {
        assert!(i < dim_m, "component index out of range");
        let mut f = Self::zeros(dim_m, k);
        f.coeffs[k * dim_m + i] = C64::new(1.0, 0.0);
        f
    }

    /// Constant function with value `v`.
    pub fn constant(v: &[C64]) -> Result<Self> {
        Self::from_flat(v.len(), v.to_vec())
    }

    pub fn dim_m(&self) -> usize {
        self.dim_m
    }

    pub fn deg(&self) -> usize {
        self.coeffs.len() / self.dim_m - 1
    }

    /// Coefficient vector `A_n`; zero beyond the stored degree.
    pub fn coeff(&self, n: usize) -> Vec<C64> {
        if n > self.deg() {
            vec![C64::new(0.0, 0.0); self.dim_m]
        } else {
            self.block(n).to_vec()
        }
    }

    pub(crate) fn block(&self, n: usize) -> &[C64] {
        &self.coeffs[n * self.dim_m..(n + 1) * self.dim_m]
    }

    /// Flat degree-major coefficients.
    pub fn as_flat(&self) -> &[C64] {
        &self.coeffs
    }

    /// All coefficient vectors, `coeffs()[n] = A_n`.
    pub fn coeffs(&self) -> Vec<Vec<C64>> {
        self.coeffs.chunks(self.dim_m).map(|c| c.to_vec()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨F, G⟩ = Σₙ ⟨Aₙ, Bₙ⟩`, linear in `self`, conjugate-linear in `other`.
    pub fn inner_product(&self, other: &CoeffFn) -> Result<C64> {
        self.check_dim(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a * b.conj())
            .sum())
    }

    /// `SF = zF`.
    pub fn shift(&self) -> CoeffFn {
        let mut coeffs = vec![C64::new(0.0, 0.0); self.dim_m];
        coeffs.extend_from_slice(&self.coeffs);
        CoeffFn {
            dim_m: self.dim_m,
            coeffs,
        }
    }

    /// `S*F = (F − F(0))/z`.
    pub fn backshift(&self) -> CoeffFn {
        if self.deg() == 0 {
            return CoeffFn::zero(self.dim_m);
        }
        CoeffFn {
            dim_m: self.dim_m,
            coeffs: self.coeffs[self.dim_m..].to_vec(),
        }
    }

    /// `F(0) = A_0`.
    pub fn value_at_zero(&self) -> Vec<C64> {
        self.block(0).to_vec()
    }

    /// Horner evaluation on the closed unit disc.
    pub fn eval_at(&self, z: C64) -> Result<Vec<C64>> {
        if z.norm() > 1.0 + DISC_SLACK {
            return Err(Error::Domain { z });
        }
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: C64) -> Vec<C64> {
        let mut acc = vec![C64::new(0.0, 0.0); self.dim_m];
        for n in (0..=self.deg()).rev() {
            for (a, c) in acc.iter_mut().zip(self.block(n)) {
                *a = *a * z + c;
            }
        }
        acc
    }

    /// Dense embedding into `ℂ^{m(N+1)}`, degree-major.
    pub fn flatten(&self, ambient_deg: usize) -> Result<DVector<C64>> {
        if self.deg() > ambient_deg {
            return Err(Error::TruncationOverflow {
                deg: self.deg(),
                ambient: ambient_deg,
            });
        }
        let mut v = DVector::zeros(self.dim_m * (ambient_deg + 1));
        for (dst, src) in v.iter_mut().zip(self.coeffs.iter()) {
            *dst = *src;
        }
        Ok(v)
    }

    /// Inverse of [`CoeffFn::flatten`]; the result has the ambient degree.
    pub fn unflatten(dim_m: usize, v: &[C64]) -> Result<CoeffFn> {
        Self::from_flat(dim_m, v.to_vec())
    }

    /// Zero-pads to degree `deg`; errors instead of dropping coefficients.
    pub fn padded(&self, deg: usize) -> Result<CoeffFn> {
        if deg < self.deg() {
            return Err(Error::TruncationOverflow {
                deg: self.deg(),
                ambient: deg,
            });
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(self.dim_m * (deg + 1), C64::new(0.0, 0.0));
        Ok(CoeffFn {
            dim_m: self.dim_m,
            coeffs,
        })
    }

    /// Explicit lossy truncation to degree `deg`.
    pub fn truncated(&self, deg: usize) -> CoeffFn {
        let keep = self.dim_m * (deg.min(self.deg()) + 1);
        CoeffFn {
            dim_m: self.dim_m,
            coeffs: self.coeffs[..keep].to_vec(),
        }
    }

    /// Drops trailing coefficient blocks whose entries are all `≤ tol` in
    /// modulus. With `tol = 0` this yields the canonical form used for equality.
    pub fn trimmed(&self, tol: f64) -> CoeffFn {
        let mut deg = self.deg();
        while deg > 0 && self.block(deg).iter().all(|c| c.norm() <= tol) {
            deg -= 1;
        }
        self.truncated(deg)
    }

    pub fn scale(&self, s: C64) -> CoeffFn {
        CoeffFn {
            dim_m: self.dim_m,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s·other`, padding to the larger degree.
    pub fn axpy(&self, s: C64, other: &CoeffFn) -> Result<CoeffFn> {
        self.check_dim(other)?;
        let deg = self.deg().max(other.deg());
        let mut out = self.padded(deg)?;
        for (o, b) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *o += s * b;
        }
        Ok(out)
    }

    pub fn add(&self, other: &CoeffFn) -> Result<CoeffFn> {
        self.axpy(C64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &CoeffFn) -> Result<CoeffFn> {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// Pointwise product of a scalar function with `self`.
    pub fn times_scalar_fn(&self, s: &CoeffFn) -> Result<CoeffFn> {
        if s.dim_m != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: s.dim_m,
            });
        }
        let m = self.dim_m;
        let deg = self.deg() + s.deg();
        let mut out = CoeffFn::zeros(m, deg);
        for (j, sj) in s.coeffs.iter().enumerate() {
            if *sj == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..=self.deg() {
                for (o, a) in out.coeffs[(j + k) * m..(j + k + 1) * m]
                    .iter_mut()
                    .zip(self.block(k))
                {
                    *o += sj * a;
                }
            }
        }
        Ok(out)
    }

    /// Distance to `other` with zero padding.
    pub fn distance(&self, other: &CoeffFn) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    /// Components `start..start + len` as a `ℂ^len`-valued function.
    pub fn components(&self, start: usize, len: usize) -> Result<CoeffFn> {
        if start + len > self.dim_m || len == 0 {
            return Err(Error::DimensionMismatch {
                expected: self.dim_m,
                found: start + len,
            });
        }
        let flat = (0..=self.deg())
            .flat_map(|n| self.block(n)[start..start + len].to_vec())
            .collect();
        CoeffFn::from_flat(len, flat)
    }

    /// Stacks functions into one with `Σ dim_m` components, padded to the
    /// largest degree.
    pub fn stack(parts: &[CoeffFn]) -> Result<CoeffFn> {
        if parts.is_empty() {
            return Err(Error::Empty);
        }
        let deg = parts.iter().map(|f| f.deg()).max().unwrap_or(0);
        let m: usize = parts.iter().map(|f| f.dim_m).sum();
        let mut flat = Vec::with_capacity(m * (deg + 1));
        for n in 0..=deg {
            for f in parts {
                if n <= f.deg() {
                    flat.extend_from_slice(f.block(n));
                } else {
                    flat.extend(std::iter::repeat_n(C64::new(0.0, 0.0), f.dim_m));
                }
            }
        }
        CoeffFn::from_flat(m, flat)
    }

    fn check_dim(&self, other: &CoeffFn) -> Result<()> {
        if self.dim_m != other.dim_m {
            return Err(Error::DimensionMismatch {
                expected: self.dim_m,
                found: other.dim_m,
            });
        }
        Ok(())
    }
}
