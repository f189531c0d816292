//! Matrix-valued analytic symbols `Θ(z) = Σ Θ_k zᵏ` and the multiplication
//! operators `T_Θ` they induce.
//!
//! Adjoints are computed coefficient-wise as a correlation, which is exact for
//! polynomial symbols. Dense realizations are block lower-triangular Toeplitz
//! matrices in the degree-major layout of [`CoeffFn::flatten`].

use nalgebra::DMatrix;

use crate::coeff::{CoeffFn, C64};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

#[derive(Debug, Clone, PartialEq)]
pub struct MatSymbol {
    m_out: usize,
    m_in: usize,
    mats: Vec<CMat>,
    tail_bound: f64,
    claimed_inner: bool,
}

impl MatSymbol {
    /// Polynomial symbol from its Taylor coefficients (`tail_bound = 0`).
    pub fn new(m_out: usize, m_in: usize, mats: Vec<CMat>) -> Result<Self> {
        if m_out == 0 || m_in == 0 {
            return Err(Error::precondition("symbol dimensions must be positive"));
        }
        if mats.is_empty() {
            return Err(Error::Empty);
        }
        for (k, mk) in mats.iter().enumerate() {
            if mk.shape() != (m_out, m_in) {
                return Err(Error::DimensionMismatch {
                    expected: m_out * m_in,
                    found: mk.nrows() * mk.ncols(),
                });
            }
            if let Some(idx) = mk.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(Error::NonFinite {
                    deg: k,
                    component: idx,
                });
            }
        }
        Ok(MatSymbol {
            m_out,
            m_in,
            mats,
            tail_bound: 0.0,
            claimed_inner: false,
        })
    }

    /// Scalar symbol from Taylor coefficients.
    pub fn scalar(coeffs: &[C64]) -> Result<Self> {
        Self::new(
            1,
            1,
            coeffs.iter().map(|&c| CMat::from_element(1, 1, c)).collect(),
        )
    }

    /// Constant identity symbol on `ℂᵐ`.
    pub fn identity(m: usize) -> Self {
        MatSymbol {
            m_out: m,
            m_in: m,
            mats: vec![CMat::identity(m, m)],
            tail_bound: 0.0,
            claimed_inner: true,
        }
    }

    /// The `m × r` symbol whose columns are the given `ℂᵐ`-valued functions.
    pub fn from_columns(cols: &[CoeffFn]) -> Result<Self> {
        let first = cols.first().ok_or(Error::Empty)?;
        let m = first.dim_m();
        let deg = cols.iter().map(|c| c.deg()).max().unwrap_or(0);
        let mut mats = vec![CMat::zeros(m, cols.len()); deg + 1];
        for (j, col) in cols.iter().enumerate() {
            if col.dim_m() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: col.dim_m(),
                });
            }
            for (n, mat) in mats.iter_mut().enumerate().take(col.deg() + 1) {
                for (i, v) in col.block(n).iter().enumerate() {
                    mat[(i, j)] = *v;
                }
            }
        }
        Self::new(m, cols.len(), mats)
    }

    /// Attaches a certified bound on the discarded Taylor tail.
    pub fn with_tail_bound(mut self, tail_bound: f64) -> Self {
        self.tail_bound = tail_bound.max(0.0);
        self
    }

    pub fn with_claimed_inner(mut self, claimed: bool) -> Self {
        self.claimed_inner = claimed;
        self
    }

    pub fn m_out(&self) -> usize {
        self.m_out
    }

    pub fn m_in(&self) -> usize {
        self.m_in
    }

    pub fn deg(&self) -> usize {
        self.mats.len() - 1
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    pub fn coeff(&self, k: usize) -> CMat {
        self.mats
            .get(k)
            .cloned()
            .unwrap_or_else(|| CMat::zeros(self.m_out, self.m_in))
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn claimed_inner(&self) -> bool {
        self.claimed_inner
    }

    /// `Θ(z)` from the stored coefficients (Horner).
    pub fn eval(&self, z: C64) -> CMat {
        let mut acc = CMat::zeros(self.m_out, self.m_in);
        for mk in self.mats.iter().rev() {
            acc = acc * z + mk;
        }
        acc
    }

    /// `Σ_k ‖Θ_k‖₂`, an upper bound on `sup_{|z|≤1} ‖Θ_stored(z)‖`.
    pub fn coeff_l1(&self) -> f64 {
        self.mats.iter().map(linalg::spectral_norm).sum()
    }

    /// Upper bound on `sup_{|z|≤1} ‖Θ(z)‖` for the untruncated symbol.
    pub fn sup_bound(&self) -> f64 {
        if self.claimed_inner {
            1.0
        } else {
            self.coeff_l1() + self.tail_bound
        }
    }

    /// Column `j` as a `ℂ^{m_out}`-valued function, `Θ e_j`.
    pub fn column(&self, j: usize) -> CoeffFn {
        let flat = self
            .mats
            .iter()
            .flat_map(|mk| mk.column(j).iter().copied().collect::<Vec<_>>())
            .collect();
        CoeffFn::from_flat(self.m_out, flat).expect("finite by construction")
    }

    /// Re-truncates (or zero-pads) to degree `deg`; dropped coefficients are
    /// added to the tail bound.
    pub fn retruncated(&self, deg: usize) -> MatSymbol {
        let mut mats = self.mats.clone();
        let mut tail = self.tail_bound;
        if deg < self.deg() {
            tail += mats[deg + 1..].iter().map(linalg::spectral_norm).sum::<f64>();
            mats.truncate(deg + 1);
        } else {
            mats.resize(deg + 1, CMat::zeros(self.m_out, self.m_in));
        }
        MatSymbol {
            mats,
            tail_bound: tail,
            ..self.clone()
        }
    }

    /// Symbol product `ΘΦ` truncated to degree `deg`.
    ///
    /// Stored coefficients up to `deg` are exact. The tail bound accounts for
    /// the high part of the stored product plus each factor's own tail:
    /// `‖high(Θ_d Φ_d)‖ + t_Θ·sup|Φ| + sup|Θ_d|·t_Φ`.
    pub fn mul(&self, other: &MatSymbol, deg: usize) -> Result<MatSymbol> {
        if self.m_in != other.m_out {
            return Err(Error::DimensionMismatch {
                expected: self.m_in,
                found: other.m_out,
            });
        }
        let full = self.deg() + other.deg();
        let mut prod = vec![CMat::zeros(self.m_out, other.m_in); full + 1];
        for (i, a) in self.mats.iter().enumerate() {
            for (j, b) in other.mats.iter().enumerate() {
                prod[i + j] += a * b;
            }
        }
        let high: f64 = prod.iter().skip(deg + 1).map(linalg::spectral_norm).sum();
        prod.resize(deg + 1, CMat::zeros(self.m_out, other.m_in));
        let self_stored_sup = if self.claimed_inner {
            1.0 + self.tail_bound
        } else {
            self.coeff_l1()
        };
        let tail = high + self.tail_bound * other.sup_bound() + self_stored_sup * other.tail_bound;
        Ok(MatSymbol {
            m_out: self.m_out,
            m_in: other.m_in,
            mats: prod,
            tail_bound: tail,
            claimed_inner: self.claimed_inner && other.claimed_inner,
        })
    }

    /// `T_Θ F` truncated to `out_deg`: `C_n = Σ_{j+k=n} Θ_j A_k`.
    ///
    /// `out_deg ≥ deg Θ + deg F` keeps the product exact; anything smaller is an
    /// explicit truncation request.
    pub fn apply_multiplier(&self, f: &CoeffFn, out_deg: usize) -> Result<CoeffFn> {
        if f.dim_m() != self.m_in {
            return Err(Error::DimensionMismatch {
                expected: self.m_in,
                found: f.dim_m(),
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.m_out * (out_deg + 1)];
        for (j, th) in self.mats.iter().enumerate() {
            for k in 0..=f.deg() {
                let n = j + k;
                if n > out_deg {
                    break;
                }
                let a = nalgebra::DVector::from_column_slice(f.block(k));
                let prod = th * a;
                for (o, p) in out[n * self.m_out..(n + 1) * self.m_out]
                    .iter_mut()
                    .zip(prod.iter())
                {
                    *o += p;
                }
            }
        }
        CoeffFn::from_flat(self.m_out, out)
    }

    /// `T_Θ F` at full degree `deg Θ + deg F`.
    pub fn apply(&self, f: &CoeffFn) -> Result<CoeffFn> {
        self.apply_multiplier(f, self.deg() + f.deg())
    }

    /// `T*_Θ G`, the analytic part of `Θ* G`: coefficient `n` is
    /// `Σ_{j≥0} Θ_jᴴ A_{n+j}`. The result keeps the degree of `G`.
    pub fn adjoint_apply(&self, g: &CoeffFn) -> Result<CoeffFn> {
        if g.dim_m() != self.m_out {
            return Err(Error::DimensionMismatch {
                expected: self.m_out,
                found: g.dim_m(),
            });
        }
        let adj: Vec<CMat> = self.mats.iter().map(|m| m.adjoint()).collect();
        let mut out = vec![C64::new(0.0, 0.0); self.m_in * (g.deg() + 1)];
        for n in 0..=g.deg() {
            for (j, th) in adj.iter().enumerate() {
                if n + j > g.deg() {
                    break;
                }
                let a = nalgebra::DVector::from_column_slice(g.block(n + j));
                let prod = th * a;
                for (o, p) in out[n * self.m_in..(n + 1) * self.m_in]
                    .iter_mut()
                    .zip(prod.iter())
                {
                    *o += p;
                }
            }
        }
        CoeffFn::from_flat(self.m_in, out)
    }

    /// Dense block lower-triangular Toeplitz matrix of `T_Θ` on degree
    /// `≤ ambient_deg`: block `(i, j)` is `Θ_{i−j}`.
    pub fn toeplitz_matrix(&self, ambient_deg: usize) -> CMat {
        let n = ambient_deg + 1;
        let mut t = DMatrix::zeros(self.m_out * n, self.m_in * n);
        for i in 0..n {
            for j in 0..=i {
                if let Some(th) = self.mats.get(i - j) {
                    t.view_mut((i * self.m_out, j * self.m_in), (self.m_out, self.m_in))
                        .copy_from(th);
                }
            }
        }
        t
    }

    /// Whether `S T_Θ = T_Θ S` on inputs of degree `≤ ambient_deg − deg Θ − 1`,
    /// measured in operator norm.
    pub fn commutes_with_shift(&self, ambient_deg: usize, tol: f64) -> Result<bool> {
        if ambient_deg < self.deg() + 2 {
            return Err(Error::precondition(format!(
                "ambient degree {ambient_deg} needs at least deg Θ + 2 = {}",
                self.deg() + 2
            )));
        }
        let t = self.toeplitz_matrix(ambient_deg);
        let input_deg = ambient_deg - self.deg() - 1;
        Ok(shift_commutator_norm(&t, self.m_out, self.m_in, ambient_deg, input_deg) <= tol)
    }
}

/// `‖(S T − T S) P‖₂` for a dense operator `T` on degree-major spaces, where
/// `P` restricts inputs to degree `≤ input_deg`. Exposed so that arbitrary
/// (including non-Toeplitz) matrices can be tested.
pub fn shift_commutator_norm(
    t: &CMat,
    m_out: usize,
    m_in: usize,
    ambient_deg: usize,
    input_deg: usize,
) -> f64 {
    let n = ambient_deg + 1;
    let s_out = shift_matrix(m_out, n);
    let s_in = shift_matrix(m_in, n);
    let cols = m_in * (input_deg + 1);
    let diff = s_out * t - t * s_in;
    linalg::spectral_norm(&diff.columns(0, cols).into_owned())
}

/// Dense shift on degree `< n` (the top block is dropped).
pub(crate) fn shift_matrix(m: usize, n: usize) -> CMat {
    let mut s = CMat::zeros(m * n, m * n);
    for i in m..m * n {
        s[(i, i - m)] = C64::new(1.0, 0.0);
    }
    s
}
