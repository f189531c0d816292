//! Nearly `S*`-invariant subspaces with finite defect.
//!
//! A subspace `M ⊆ H²(𝔻, ℂᵐ)` is nearly `S*`-invariant with defect `p` when
//! `F ∈ M, F(0) = 0` implies `S*F ∈ M ⊕ 𝓕` for a `p`-dimensional `𝓕 ⊥ M`.
//! Every such `F` then factors as
//!
//! ```text
//! F = F₀K₀ + Σⱼ z kⱼ Eⱼ,     ‖F‖² = ‖K₀‖² + Σⱼ ‖kⱼ‖²,
//! ```
//!
//! where the columns of `F₀` are an orthonormal basis of the wandering space
//! `W = M ⊖ (M ∩ zH²)`, `E₁, …, E_p` is an orthonormal basis of `𝓕`, and the
//! tuple `(K₀, k₁, …, k_p)` ranges over an `S*`-invariant subspace of
//! `H²(𝔻, ℂ^{r+p})`. [`Decomposer`] computes that factorization by iterating
//! "peel off `W`, back-shift, split into `M` and `𝓕`" until nothing is left.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::coeff::{CoeffFn, C64};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::operators::MatSymbol;
use crate::subspace::{apply_op, DefectCertificate, InvarianceMode, ShiftOp, Subspace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearlyOptions {
    /// Stop once `‖G_k‖ < eps`.
    pub eps: f64,
    /// Iteration cap; `None` means `N + p + 8`.
    pub k_max: Option<usize>,
    /// Allowed step residual and membership slack.
    pub near_tol: f64,
}

impl Default for NearlyOptions {
    fn default() -> Self {
        NearlyOptions {
            eps: 1e-10,
            k_max: None,
            near_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompResult {
    /// `K₀ = Σ A_k zᵏ`, `ℂʳ`-valued; `None` when `r = 0`.
    pub k0: Option<CoeffFn>,
    /// `kⱼ = Σ_{k≥1} β_{k,j} z^{k−1}`.
    pub kj: Vec<CoeffFn>,
    pub a_trace: Vec<Vec<C64>>,
    /// `β_1, β_2, …`
    pub beta_trace: Vec<Vec<C64>>,
    /// `‖G_1‖, ‖G_2‖, …`
    pub gk_norms: Vec<f64>,
    pub max_step_residual: f64,
    pub norm_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl DecompResult {
    pub fn r(&self) -> usize {
        self.k0.as_ref().map_or(0, |k| k.dim_m())
    }

    pub fn p(&self) -> usize {
        self.kj.len()
    }

    /// `(K₀, k₁, …, k_p)` as one `ℂ^{r+p}`-valued function.
    pub fn tuple(&self) -> Result<CoeffFn> {
        let mut parts = Vec::with_capacity(1 + self.kj.len());
        if let Some(k0) = &self.k0 {
            parts.push(k0.clone());
        }
        parts.extend(self.kj.iter().cloned());
        CoeffFn::stack(&parts)
    }
}

/// Precomputed data for decomposing many functions of one subspace.
#[derive(Debug, Clone)]
pub struct Decomposer {
    space: Subspace,
    wandering: Subspace,
    defect: CMat,
    opts: NearlyOptions,
}

impl Decomposer {
    pub fn new(space: &Subspace, defect_basis: &[CoeffFn], opts: NearlyOptions) -> Result<Self> {
        if opts.k_max == Some(0) {
            return Err(Error::InvalidParameter {
                name: "k_max".into(),
                message: "must be at least 1".into(),
            });
        }
        let n = space.ambient_dim();
        let cols = defect_basis
            .iter()
            .map(|e| space.flatten_fn(e))
            .collect::<Result<Vec<_>>>()?;
        let defect = linalg::from_columns(&cols, n);
        let ortho = linalg::orthonormality_defect(&defect);
        if ortho > opts.near_tol {
            return Err(Error::precondition(format!(
                "defect basis is not orthonormal (Gram deviation {ortho:.3e})"
            )));
        }
        let overlap = linalg::spectral_norm(&(space.basis_matrix().adjoint() * &defect));
        if overlap > opts.near_tol {
            return Err(Error::precondition(format!(
                "defect basis is not orthogonal to M (overlap {overlap:.3e})"
            )));
        }
        let wandering = space.wandering()?;
        Ok(Decomposer {
            space: space.clone(),
            wandering,
            defect,
            opts,
        })
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    /// Canonical wandering basis, the columns of `F₀`.
    pub fn wandering(&self) -> &Subspace {
        &self.wandering
    }

    pub fn r(&self) -> usize {
        self.wandering.dim()
    }

    pub fn p(&self) -> usize {
        self.defect.ncols()
    }

    pub fn k_max(&self) -> usize {
        self.opts
            .k_max
            .unwrap_or(self.space.ambient_deg() + self.p() + 8)
    }

    pub fn decompose(&self, f: &CoeffFn) -> Result<DecompResult> {
        let m = self.space.dim_m();
        let fnorm = f.norm();
        let scale = fnorm.max(1.0);
        let outside = self.space.distance_to(f)?;
        if outside > self.opts.near_tol * scale {
            return Err(Error::precondition(format!(
                "F is not in M (distance {outside:.3e})"
            )));
        }
        let q = self.space.basis_matrix();
        let w = self.wandering.basis_matrix();
        let e = &self.defect;
        let (r, p) = (self.r(), self.p());
        let k_max = self.k_max();

        let mut g = self.space.flatten_fn(f)?;
        let mut a_trace = Vec::new();
        let mut beta_trace = Vec::new();
        let mut gk_norms = Vec::new();
        let mut max_step_residual: f64 = 0.0;
        let mut converged = false;
        let mut iterations = 0;

        for k in 0..k_max {
            let a = w.adjoint() * &g;
            let f_next = &g - w * &a;
            let at_zero = f_next.rows(0, m).norm();
            if at_zero > self.opts.near_tol * scale {
                return Err(Error::Certification(format!(
                    "step {k}: remainder does not vanish at 0 ({at_zero:.3e})"
                )));
            }
            let h = backshift_vec(m, &f_next);
            let g_next = q * (q.adjoint() * &h);
            let beta = e.adjoint() * &h;
            let rem = &h - &g_next - e * &beta;
            let res = rem.norm();
            if res > self.opts.near_tol * scale {
                return Err(Error::NotNearlyInvariant {
                    step: k + 1,
                    residual: res,
                    remainder: self.space.unflatten(&rem),
                });
            }
            max_step_residual = max_step_residual.max(res);
            a_trace.push(a.iter().copied().collect::<Vec<_>>());
            beta_trace.push(beta.iter().copied().collect::<Vec<_>>());
            let gn = g_next.norm();
            gk_norms.push(gn);
            g = g_next;
            iterations = k + 1;
            if gn < self.opts.eps {
                converged = true;
                break;
            }
        }

        let k0 = (r > 0).then(|| {
            let flat = a_trace.iter().flatten().copied().collect();
            CoeffFn::from_flat(r, flat).expect("finite coefficients")
        });
        let kj: Vec<CoeffFn> = (0..p)
            .map(|j| {
                let c: Vec<C64> = beta_trace.iter().map(|b| b[j]).collect();
                CoeffFn::scalar(&c).expect("finite coefficients")
            })
            .collect();
        let tuple_sq = k0.as_ref().map_or(0.0, |k| k.norm_sqr())
            + kj.iter().map(|k| k.norm_sqr()).sum::<f64>();
        Ok(DecompResult {
            k0,
            kj,
            a_trace,
            beta_trace,
            gk_norms,
            max_step_residual,
            norm_gap: (fnorm * fnorm - tuple_sq).abs(),
            iterations,
            converged,
        })
    }
}

fn backshift_vec(m: usize, v: &DVector<C64>) -> DVector<C64> {
    let n = v.len();
    let mut out = DVector::zeros(n);
    out.rows_mut(0, n - m).copy_from(&v.rows(m, n - m));
    out
}

/// Runs the decomposition of `F ∈ M` against the defect basis `E`.
pub fn decompose(
    space: &Subspace,
    defect_basis: &[CoeffFn],
    f: &CoeffFn,
    opts: NearlyOptions,
) -> Result<DecompResult> {
    Decomposer::new(space, defect_basis, opts)?.decompose(f)
}

/// Defect of `S*` on the vanishing slice of `M`, compared against `p_max`.
pub fn certify_nearly(space: &Subspace, p_max: usize) -> Result<DefectCertificate> {
    let slice = space.vanishing_slice();
    let mut cert =
        space.defect_of_family(slice.basis_matrix(), ShiftOp::Backshift, InvarianceMode::Nearly)?;
    cert.bound = Some(p_max);
    Ok(cert)
}

/// Output of [`extract_k_detailed`].
#[derive(Debug, Clone)]
pub struct Extraction {
    /// The `S*`-invariant parameter space in `H²(𝔻, ℂ^{r+p})`.
    pub k: Subspace,
    pub r: usize,
    pub p: usize,
    /// Decomposition of each basis vector of `M`, in basis order.
    pub results: Vec<DecompResult>,
    /// Max-entry deviation of the tuple Gram matrix from the identity.
    pub isometry_defect: f64,
    /// Largest singular value of `(I − P_K) S* K`.
    pub invariance_residual: f64,
}

/// The space of tuples `(K₀, k₁, …, k_p)` over all of `M`.
pub fn extract_k(space: &Subspace, defect_basis: &[CoeffFn], opts: NearlyOptions) -> Result<Subspace> {
    Ok(extract_k_detailed(space, defect_basis, opts)?.k)
}

pub fn extract_k_detailed(
    space: &Subspace,
    defect_basis: &[CoeffFn],
    opts: NearlyOptions,
) -> Result<Extraction> {
    let dec = Decomposer::new(space, defect_basis, opts)?;
    let (r, p) = (dec.r(), dec.p());
    if r + p == 0 {
        return Err(Error::precondition(
            "M ⊆ zH² with an empty defect basis leaves nothing to extract",
        ));
    }
    let results = space
        .basis()
        .par_iter()
        .map(|f| dec.decompose(f))
        .collect::<Result<Vec<_>>>()?;
    let tuples = results
        .iter()
        .map(|res| res.tuple())
        .collect::<Result<Vec<_>>>()?;
    let deg = tuples
        .iter()
        .map(|t| t.trimmed(opts.eps).deg())
        .max()
        .unwrap_or(0)
        .max(space.ambient_deg());
    let cols = tuples
        .iter()
        .map(|t| t.truncated(deg).flatten(deg))
        .collect::<Result<Vec<_>>>()?;
    let mat = linalg::from_columns(&cols, (r + p) * (deg + 1));
    let isometry_defect = linalg::orthonormality_defect(&mat);
    if isometry_defect > opts.near_tol {
        return Err(Error::Certification(format!(
            "tuple map is not isometric (Gram deviation {isometry_defect:.3e})"
        )));
    }
    let k = Subspace::from_matrix(r + p, deg, &mat, space.tol())?;
    let invariance_residual = k.defect_of(ShiftOp::Backshift)?.top_singular_value();
    if invariance_residual > opts.near_tol {
        return Err(Error::Certification(format!(
            "extracted K is not S*-invariant (residual {invariance_residual:.3e})"
        )));
    }
    Ok(Extraction {
        k,
        r,
        p,
        results,
        isometry_defect,
        invariance_residual,
    })
}

/// `M = {F₀K₀ + Σⱼ z kⱼ Eⱼ : (K₀, k₁, …, k_p) ∈ K}` inside `V_{ambient_deg}`.
pub fn synthesize_m(
    k: &Subspace,
    f0_cols: &[CoeffFn],
    e: &[CoeffFn],
    ambient_deg: usize,
) -> Result<Subspace> {
    let (r, p) = (f0_cols.len(), e.len());
    if r + p == 0 {
        return Err(Error::Empty);
    }
    if k.dim_m() != r + p {
        return Err(Error::DimensionMismatch {
            expected: r + p,
            found: k.dim_m(),
        });
    }
    let m = f0_cols.first().or(e.first()).map(|f| f.dim_m()).unwrap_or(0);
    if let Some(bad) = f0_cols.iter().chain(e).find(|f| f.dim_m() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: bad.dim_m(),
        });
    }
    let tol = k.tol().max(1e-10);
    let gram_check = |fns: &[CoeffFn], what: &str| -> Result<()> {
        if fns.is_empty() {
            return Ok(());
        }
        let deg = fns.iter().map(|f| f.deg()).max().unwrap_or(0);
        let cols = fns.iter().map(|f| f.flatten(deg)).collect::<Result<Vec<_>>>()?;
        let dev = linalg::orthonormality_defect(&linalg::from_columns(&cols, m * (deg + 1)));
        if dev > 1e-8 {
            return Err(Error::precondition(format!(
                "{what} is not orthonormal (Gram deviation {dev:.3e})"
            )));
        }
        Ok(())
    };
    gram_check(f0_cols, "F₀")?;
    gram_check(e, "E")?;
    let f0 = if r > 0 {
        let sym = MatSymbol::from_columns(f0_cols)?;
        let rank = linalg::range(&sym.coeff(0), tol).ncols();
        if rank < r {
            return Err(Error::precondition(format!(
                "values of F₀ at 0 have rank {rank} < r = {r}"
            )));
        }
        Some(sym)
    } else {
        None
    };
    let need = k.ambient_deg()
        + f0_cols
            .iter()
            .map(|f| f.deg())
            .chain(e.iter().map(|f| f.deg() + 1))
            .max()
            .unwrap_or(0);
    if ambient_deg < need {
        return Err(Error::TruncationOverflow {
            deg: need,
            ambient: ambient_deg,
        });
    }
    let images = k
        .basis()
        .iter()
        .map(|t| synthesize_one(t, f0.as_ref(), e, r, ambient_deg))
        .collect::<Result<Vec<_>>>()?;
    let out = Subspace::from_spanning(m, &images, ambient_deg, k.tol())?;
    let cert = certify_nearly(&out.clone().with_tol(1e-8), p)?;
    if !cert.passed() {
        return Err(Error::Certification(format!(
            "synthesized space has nearly-defect {} > p = {p}",
            cert.defect_dim
        )));
    }
    Ok(out)
}

fn synthesize_one(
    t: &CoeffFn,
    f0: Option<&MatSymbol>,
    e: &[CoeffFn],
    r: usize,
    ambient_deg: usize,
) -> Result<CoeffFn> {
    let m = f0.map_or_else(|| e[0].dim_m(), |s| s.m_out());
    let mut acc = CoeffFn::zeros(m, ambient_deg);
    if let Some(sym) = f0 {
        acc = acc.add(&sym.apply_multiplier(&t.components(0, r)?, ambient_deg)?)?;
    }
    for (j, ej) in e.iter().enumerate() {
        let kj = t.components(r + j, 1)?;
        acc = acc.add(&ej.times_scalar_fn(&kj.shift())?)?;
    }
    Ok(acc.truncated(ambient_deg))
}

/// Outcome of a yes/no check with the residual that decided it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOutcome {
    pub holds: bool,
    pub residual: f64,
}

fn family_matrix(space: &Subspace, fns: &[CoeffFn]) -> Result<CMat> {
    let cols = fns
        .iter()
        .map(|f| space.flatten_fn(f))
        .collect::<Result<Vec<_>>>()?;
    Ok(linalg::from_columns(&cols, space.ambient_dim()))
}

/// Whether `S*Wᵢ ∈ M ⊕ 𝓕` for the wandering basis as well, which together
/// with near invariance makes `M` almost invariant for `S*`. The residual is
/// the largest escape of a wandering vector.
pub fn almost_invariant_sstar_check(space: &Subspace, defect_basis: &[CoeffFn]) -> Result<CheckOutcome> {
    let tol = space.tol();
    let x = space.extended(defect_basis)?;
    let slice = space.vanishing_slice();
    let w = space.wandering()?;
    let moved = |src: &CMat| {
        apply_op(space.dim_m(), src, ShiftOp::Backshift, tol).expect("S* never overflows")
    };
    let nearly_res = x.escape_norm(&moved(slice.basis_matrix()));
    let residual = w
        .basis_matrix()
        .column_iter()
        .map(|c| {
            let col = CMat::from_column_slice(c.nrows(), 1, c.as_slice());
            x.escape_norm(&moved(&col))
        })
        .fold(0.0, f64::max);
    Ok(CheckOutcome {
        holds: nearly_res <= tol && residual <= tol,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityOutcome {
    /// `S*M ⊆ M ⊕ 𝓕`.
    pub forward: CheckOutcome,
    /// `S(M ⊕ 𝓕)^⊥ ⊆ (M ⊕ 𝓕)^⊥ ⊕ 𝓕`.
    pub dual: CheckOutcome,
}

impl DualityOutcome {
    pub fn agree(&self) -> bool {
        self.forward.holds == self.dual.holds
    }
}

/// Tests both sides of `S*M ⊆ M ⊕ 𝓕 ⟺ S(M ⊕ 𝓕)^⊥ ⊆ (M ⊕ 𝓕)^⊥ ⊕ 𝓕`. The
/// defect family is first made orthogonal to `M`. The right-hand side is
/// evaluated in `V_{N+1}`, where the complement of `M ⊕ 𝓕` contains the new
/// top degree.
pub fn duality_check(space: &Subspace, defect_basis: &[CoeffFn]) -> Result<DualityOutcome> {
    let tol = space.tol();
    let m = space.dim_m();
    let n = space.ambient_deg();
    let raw = family_matrix(space, defect_basis)?;
    let fam = Subspace::from_matrix(
        m,
        n,
        &linalg::project_out(space.basis_matrix(), &raw),
        tol,
    )?;
    let x = space.sum(&fam)?;

    let moved = apply_op(m, space.basis_matrix(), ShiftOp::Backshift, tol).expect("S* never overflows");
    let fwd = x.escape_norm(&moved);

    let big = n + 1;
    let y = x.complement().embed(big)?;
    let target = x.embed(big)?.complement().sum(&fam.embed(big)?)?;
    let shifted = apply_op(m, y.basis_matrix(), ShiftOp::Shift, tol).ok_or(Error::TruncationOverflow {
        deg: big + 1,
        ambient: big,
    })?;
    let dual = target.escape_norm(&shifted);
    Ok(DualityOutcome {
        forward: CheckOutcome {
            holds: fwd <= tol,
            residual: fwd,
        },
        dual: CheckOutcome {
            holds: dual <= tol,
            residual: dual,
        },
    })
}

/// `(T*_{F₀}G, T*_{E₁}S*G, …, T*_{E_p}S*G)`; the `F₀` slot is absent when
/// `f0` is `None`.
pub fn orthocomplement_tuple(g: &CoeffFn, f0: Option<&MatSymbol>, e: &[MatSymbol]) -> Result<CoeffFn> {
    let mut parts = Vec::with_capacity(1 + e.len());
    if let Some(sym) = f0 {
        parts.push(sym.adjoint_apply(g)?);
    }
    let sg = g.backshift();
    for ej in e {
        if ej.m_in() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: ej.m_in(),
            });
        }
        parts.push(ej.adjoint_apply(&sg)?);
    }
    CoeffFn::stack(&parts)
}

/// Whether `G ∈ M^⊥`, decided through the orthocomplement tuple lying in
/// `K^⊥`. `k_perp` is the complement of `K` inside its own truncation, so
/// tuple coefficients above its ambient degree count as members.
pub fn orthocomplement_membership(
    g: &CoeffFn,
    f0: Option<&MatSymbol>,
    e: &[MatSymbol],
    k_perp: &Subspace,
) -> Result<CheckOutcome> {
    let tuple = orthocomplement_tuple(g, f0, e)?;
    if tuple.dim_m() != k_perp.dim_m() {
        return Err(Error::DimensionMismatch {
            expected: k_perp.dim_m(),
            found: tuple.dim_m(),
        });
    }
    let edge = k_perp.shift_invariance_residual();
    if edge > k_perp.tol().max(1e-8) {
        return Err(Error::precondition(format!(
            "K^⊥ is not shift-invariant (residual {edge:.3e})"
        )));
    }
    let residual = k_perp.distance_to(&tuple.truncated(k_perp.ambient_deg()))?;
    Ok(CheckOutcome {
        holds: residual <= k_perp.tol(),
        residual,
    })
}
