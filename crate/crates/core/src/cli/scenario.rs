//! Scripted verifications, one per structural claim, each producing a
//! self-contained [`ScenarioReport`].

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::coeff::{CoeffFn, C64};
use crate::constructions::{
    blaschke, counterexample_space, defect_example, diag_monomial, hand_example, orthocomplement_lemma,
    psi_k_theta,
};
use crate::error::{Error, Result};
use crate::inner::diag_inner;
use crate::nearly::{
    almost_invariant_sstar_check, certify_nearly, decompose, duality_check, extract_k_detailed,
    orthocomplement_membership, synthesize_m, NearlyOptions,
};
use crate::operators::MatSymbol;
use crate::subspace::{beurling_space, model_space, ShiftOp, Subspace};
use crate::DEFAULT_TOL;

pub const SCENARIO_IDS: [&str; 12] = [
    "beurling",
    "prop_F0K_almost",
    "lemma_orthocomplement",
    "lemma_nearly",
    "prop_perp_almost",
    "counterexample",
    "wandering_bound",
    "main_defect1",
    "main_defectp",
    "corollary_almost",
    "duality",
    "section4",
];

/// One-line statement of what each scenario checks.
pub fn claim(id: &str) -> &'static str {
    match id {
        "beurling" => "ΘH² is shift-invariant and K_Θ is its exact complement",
        "prop_F0K_almost" => "F₀K_Θ is almost invariant for S with defect r′",
        "lemma_orthocomplement" => "(ΨK_Θ)^⊥ = ΨΘH² ⊕ K_Ψ",
        "lemma_nearly" => "ΨK_Θ is nearly S*-invariant",
        "prop_perp_almost" => "(ΨK_Θ)^⊥ is almost invariant for S with defect at most m",
        "counterexample" => "(ΘK_Θ)^⊥ for Θ = zI is not nearly S*-invariant",
        "wandering_bound" => "1 ≤ dim W ≤ m unless M ⊆ zH²",
        "main_defect1" => "F = F₀K₀ + z k₁ E₁ with ‖F‖² = ‖K₀‖² + ‖k₁‖²",
        "main_defectp" => "F = F₀K₀ + Σ z kⱼ Eⱼ with an S*-invariant tuple space",
        "corollary_almost" => "S*W ⊆ M ⊕ 𝓕 upgrades near invariance to almost invariance",
        "duality" => "S*M ⊆ M ⊕ 𝓕 iff S(M ⊕ 𝓕)^⊥ ⊆ (M ⊕ 𝓕)^⊥ ⊕ 𝓕",
        "section4" => "G ⊥ M iff (T*_{F₀}G, T*_{Eⱼ}S*G) ⊥ K",
        _ => "",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario_id: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
    pub parameters: Map<String, Value>,
    pub runtime_ms: f64,
}

/// `key=value` overrides plus the global flags.
#[derive(Debug, Clone)]
pub struct ScenarioParams {
    values: BTreeMap<String, String>,
    pub seed: u64,
    pub tol: f64,
    pub timing: bool,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            values: BTreeMap::new(),
            seed: 0,
            tol: DEFAULT_TOL,
            timing: true,
        }
    }
}

impl ScenarioParams {
    pub fn parse(pairs: &[String]) -> Result<Self> {
        let mut values = BTreeMap::new();
        for p in pairs {
            let (k, v) = p.split_once('=').ok_or_else(|| Error::InvalidParameter {
                name: p.clone(),
                message: "expected key=value".into(),
            })?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(ScenarioParams {
            values,
            ..Default::default()
        })
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.values.insert(key.to_string(), value.to_string());
        self
    }
}

#[derive(Debug, Clone, Copy)]
enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Within(f64, f64),
}

impl Bound {
    fn holds(self, x: f64) -> bool {
        match self {
            Bound::AtMost(t) => x <= t,
            Bound::AtLeast(t) => x >= t,
            Bound::Within(lo, hi) => lo <= x && x <= hi,
        }
    }

    fn describe(self) -> String {
        let num = |t: f64| {
            if t.fract() == 0.0 && t.abs() < 1e6 {
                format!("{t}")
            } else {
                format!("{t:e}")
            }
        };
        match self {
            Bound::AtMost(t) => format!("<= {}", num(t)),
            Bound::AtLeast(t) => format!(">= {}", num(t)),
            Bound::Within(lo, hi) if lo == hi => format!("== {lo}"),
            Bound::Within(lo, hi) => format!("in [{lo}, {hi}]"),
        }
    }
}

struct Ctx<'a> {
    params: &'a ScenarioParams,
    used: BTreeSet<String>,
    echo: Map<String, Value>,
    metrics: BTreeMap<String, f64>,
    thresholds: Map<String, Value>,
    passed: bool,
}

impl<'a> Ctx<'a> {
    fn new(params: &'a ScenarioParams) -> Self {
        Ctx {
            params,
            used: BTreeSet::new(),
            echo: Map::new(),
            metrics: BTreeMap::new(),
            thresholds: Map::new(),
            passed: true,
        }
    }

    fn raw(&mut self, name: &str) -> Option<String> {
        self.used.insert(name.to_string());
        self.params.values.get(name).cloned()
    }

    fn bad(name: &str, v: &str) -> Error {
        Error::InvalidParameter {
            name: name.into(),
            message: format!("cannot parse `{v}`"),
        }
    }

    fn usize(&mut self, name: &str, default: usize) -> Result<usize> {
        let v = match self.raw(name) {
            Some(s) => s.parse().map_err(|_| Self::bad(name, &s))?,
            None => default,
        };
        self.echo.insert(name.into(), json!(v));
        Ok(v)
    }

    /// Comma-separated exponents; `2,3`, `z^2,z^3` and `diag z²,z³` all work.
    fn list(&mut self, name: &str, default: &[usize]) -> Result<Vec<usize>> {
        let v = match self.raw(name) {
            Some(s) => s
                .trim_start_matches("diag")
                .split(',')
                .map(|t| exponent(t).ok_or_else(|| Self::bad(name, &s)))
                .collect::<Result<Vec<usize>>>()?,
            None => default.to_vec(),
        };
        if v.is_empty() {
            return Err(Self::bad(name, ""));
        }
        self.echo.insert(name.into(), json!(v));
        Ok(v)
    }

    fn echo(&mut self, name: &str, v: Value) {
        self.echo.insert(name.into(), v);
    }

    fn metric(&mut self, name: &str, v: f64) {
        self.metrics.insert(name.into(), v);
    }

    fn check(&mut self, name: &str, v: f64, bound: Bound) {
        self.metric(name, v);
        self.thresholds.insert(name.into(), json!(bound.describe()));
        if !bound.holds(v) {
            self.passed = false;
        }
    }

    fn finish(mut self, id: &str, runtime_ms: f64) -> Result<ScenarioReport> {
        if let Some(extra) = self.params.values.keys().find(|k| !self.used.contains(*k)) {
            return Err(Error::InvalidParameter {
                name: extra.clone(),
                message: format!("not a parameter of scenario `{id}`"),
            });
        }
        self.echo.insert("seed".into(), json!(self.params.seed));
        self.echo.insert("tol".into(), json!(self.params.tol));
        self.echo.insert("thresholds".into(), Value::Object(self.thresholds));
        Ok(ScenarioReport {
            scenario_id: id.to_string(),
            passed: self.passed,
            metrics: self.metrics,
            parameters: self.echo,
            runtime_ms,
        })
    }
}

pub fn run_scenario(id: &str, params: &ScenarioParams) -> Result<ScenarioReport> {
    let body: fn(&mut Ctx) -> Result<()> = match id {
        "beurling" => beurling,
        "prop_F0K_almost" => prop_f0k_almost,
        "lemma_orthocomplement" => lemma_orthocomplement,
        "lemma_nearly" => lemma_nearly,
        "prop_perp_almost" => prop_perp_almost,
        "counterexample" => counterexample,
        "wandering_bound" => wandering_bound,
        "main_defect1" => main_defect1,
        "main_defectp" => main_defectp,
        "corollary_almost" => corollary_almost,
        "duality" => duality,
        "section4" => section4,
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    let start = Instant::now();
    let mut ctx = Ctx::new(params);
    body(&mut ctx)?;
    let runtime_ms = if params.timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    ctx.finish(id, runtime_ms)
}

/// All scenarios, run concurrently and reported in [`SCENARIO_IDS`] order.
/// Overrides are not forwarded since parameter names differ per scenario.
pub fn run_all(params: &ScenarioParams) -> Result<Vec<ScenarioReport>> {
    let shared = ScenarioParams {
        values: BTreeMap::new(),
        ..params.clone()
    };
    SCENARIO_IDS
        .par_iter()
        .map(|id| run_scenario(id, &shared))
        .collect()
}

fn exponent(token: &str) -> Option<usize> {
    const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    let t = token.trim();
    let digits: String = t
        .chars()
        .filter_map(|c| match SUP.iter().position(|&s| s == c) {
            Some(d) => char::from_digit(d as u32, 10),
            None => c.is_ascii_digit().then_some(c),
        })
        .collect();
    match (digits.is_empty(), t) {
        (true, "z") => Some(1),
        (true, _) => None,
        _ if t.chars().all(|c| c.is_ascii_digit() || c.is_whitespace() || "z^".contains(c) || SUP.contains(&c)) => {
            digits.parse().ok()
        }
        _ => None,
    }
}

fn bool_metric(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn random_fn(rng: &mut ChaCha8Rng, m: usize, deg: usize) -> CoeffFn {
    let v = (0..m * (deg + 1))
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    CoeffFn::from_flat(m, v).expect("finite")
}

fn beurling(ctx: &mut Ctx) -> Result<()> {
    let ks = ctx.list("theta", &[2, 3])?;
    let n = ctx.usize("N", 16)?;
    let m = ks.len();
    let theta = diag_monomial(&ks)?;
    let k = model_space(&theta, n)?;
    let b = beurling_space(&theta, n)?;
    let expected: Vec<CoeffFn> = ks
        .iter()
        .enumerate()
        .flat_map(|(i, &ki)| (0..ki).map(move |j| CoeffFn::monomial(m, j, i)))
        .collect();
    let expected = Subspace::from_spanning(m, &expected, n, DEFAULT_TOL)?;
    ctx.check("model_distance", k.distance(&expected)?, Bound::AtMost(1e-10));
    ctx.check(
        "beurling_shift_residual",
        b.shift_invariance_residual(),
        Bound::AtMost(1e-10),
    );
    let gap = (b.dim() + k.dim()) as f64 - (m * (n + 1)) as f64;
    ctx.check("dim_gap", gap.abs(), Bound::AtMost(0.0));
    let cross = (b.basis_matrix().adjoint() * k.basis_matrix()).norm();
    ctx.check("orthogonality", cross, Bound::AtMost(1e-12));
    ctx.metric("model_dim", k.dim() as f64);
    Ok(())
}

fn prop_f0k_almost(ctx: &mut Ctx) -> Result<()> {
    let d = ctx.usize("psi_deg", 24)?;
    let ks = ctx.list("theta", &[2, 3])?;
    ctx.echo("psi", json!("diag(b_{1/2}, b_{1/3})"));
    let psi = diag_inner(
        &[blaschke(C64::new(0.5, 0.0), d)?, blaschke(C64::new(1.0 / 3.0, 0.0), d)?],
        d,
    )?;
    let tol0 = (3.0 * psi.tail_bound()).max(1e-8);
    let m0 = psi_k_theta(&psi, &diag_monomial(&[1, 1])?, d + 1)?.with_tol(tol0);
    let cert0 = certify_nearly(&m0, 0)?;
    ctx.check("source_nearly_defect", cert0.defect_dim as f64, Bound::AtMost(0.0));
    let w = m0.wandering()?;
    let r = w.dim();
    ctx.metric("wandering_rank", r as f64);
    if ks.len() != r {
        return Err(Error::InvalidParameter {
            name: "theta".into(),
            message: format!("need {r} exponents, one per wandering direction"),
        });
    }
    let f0 = MatSymbol::from_columns(&w.basis())?;
    let theta = diag_monomial(&ks)?;
    let kmax = theta.deg();
    let k = model_space(&theta, kmax)?;
    let n = f0.deg() + kmax;
    ctx.echo("ambient_deg", json!(n));
    let images = k
        .basis()
        .iter()
        .map(|f| f0.apply_multiplier(f, n))
        .collect::<Result<Vec<_>>>()?;
    let m = Subspace::from_spanning(f0.m_out(), &images, n, DEFAULT_TOL)?.with_tol(1e-8);
    let cert = m.defect_of(ShiftOp::Shift)?;
    ctx.check(
        "defect_dim",
        cert.defect_dim as f64,
        Bound::Within(r as f64, r as f64),
    );
    let perp = m.complement();
    let tildes = (0..r)
        .map(|i| perp.project(&f0.apply_multiplier(&theta.column(i), n)?))
        .collect::<Result<Vec<_>>>()?;
    let expected = Subspace::from_spanning(f0.m_out(), &tildes, n, 1e-8)?;
    let got = Subspace::from_spanning(f0.m_out(), &cert.defect_basis, n, 1e-8)?;
    ctx.check("defect_basis_distance", got.distance(&expected)?, Bound::AtMost(1e-6));
    Ok(())
}

fn lemma_orthocomplement(ctx: &mut Ctx) -> Result<()> {
    let n = ctx.usize("N", 48)?;
    let dpsi = ctx.usize("psi_deg", 24)?;
    let dtheta = ctx.usize("theta_deg", 16)?;
    ctx.echo("psi", json!("diag(z^3, b_{1/2})"));
    ctx.echo("theta", json!("diag(z^2, b_{-1/3})"));
    let psi = diag_inner(
        &[crate::inner::monomial_inner(3, dpsi)?, blaschke(C64::new(0.5, 0.0), dpsi)?],
        dpsi,
    )?;
    let theta = diag_inner(
        &[crate::inner::monomial_inner(2, dtheta)?, blaschke(C64::new(-1.0 / 3.0, 0.0), dtheta)?],
        dtheta,
    )?;
    let lemma = orthocomplement_lemma(&psi, &theta, n)?;
    let thr = (5.0 * lemma.tail).max(1e-8);
    ctx.metric("tail_bound", lemma.tail);
    ctx.check("distance", lemma.lhs.distance(&lemma.rhs)?, Bound::AtMost(thr));
    let band = n.saturating_sub(psi.deg() + theta.deg());
    ctx.metric("band_distance", lemma.lhs.compressed_distance(&lemma.rhs, band)?);
    Ok(())
}

fn lemma_nearly(ctx: &mut Ctx) -> Result<()> {
    let d = ctx.usize("psi_deg", 24)?;
    let ks = ctx.list("theta", &[3, 2])?;
    ctx.echo("psi", json!("diag(b_{1/2}, b_{1/3})"));
    let psi = diag_inner(
        &[blaschke(C64::new(0.5, 0.0), d)?, blaschke(C64::new(1.0 / 3.0, 0.0), d)?],
        d,
    )?;
    let theta = diag_monomial(&ks)?;
    if ks.len() != 2 {
        return Err(Error::InvalidParameter {
            name: "theta".into(),
            message: "need two exponents".into(),
        });
    }
    let n = d + theta.deg();
    ctx.echo("ambient_deg", json!(n));
    let tol = (3.0 * psi.tail_bound()).max(1e-8);
    let m = psi_k_theta(&psi, &theta, n)?.with_tol(tol);
    let cert = certify_nearly(&m, 0)?;
    ctx.metric("tail_bound", psi.tail_bound());
    ctx.check("defect_dim", cert.defect_dim as f64, Bound::AtMost(0.0));
    ctx.check("residual", cert.top_singular_value(), Bound::AtMost(tol));
    Ok(())
}

fn prop_perp_almost(ctx: &mut Ctx) -> Result<()> {
    let d = ctx.usize("psi_deg", 24)?;
    let ks = ctx.list("theta", &[1, 2])?;
    let n = ctx.usize("N", d + 8)?;
    ctx.echo("psi", json!("diag(z^2, b_{1/2})"));
    let psi = diag_inner(&[crate::inner::monomial_inner(2, d)?, blaschke(C64::new(0.5, 0.0), d)?], d)?;
    let theta = diag_monomial(&ks)?;
    let tol = (3.0 * psi.tail_bound()).max(1e-8);
    let perp = psi_k_theta(&psi, &theta, n)?.complement().with_tol(tol);
    let m = psi.m_out();
    let cert = perp.defect_of_band(ShiftOp::Shift)?;
    ctx.check("defect_dim", cert.defect_dim as f64, Bound::AtMost(m as f64));
    let tildes: Vec<CoeffFn> = (0..m).map(|i| psi.column(i)).collect();
    let x = perp.extended(&tildes)?;
    let band = perp.below(n - 1);
    let moved = crate::subspace::apply_op(m, band.basis_matrix(), ShiftOp::Shift, tol)
        .ok_or(Error::TruncationOverflow { deg: n + 1, ambient: n })?;
    ctx.check("residual_with_psi_columns", x.escape_norm(&moved), Bound::AtMost(tol));
    Ok(())
}

fn counterexample(ctx: &mut Ctx) -> Result<()> {
    let m = ctx.usize("m", 2)?;
    let n = ctx.usize("N", 8)?;
    ctx.echo("theta", json!(format!("z I_{m}")));
    let space = counterexample_space(m, n)?;
    let cert = certify_nearly(&space, 0)?;
    ctx.check("nearly_defect_dim", cert.defect_dim as f64, Bound::AtLeast(1.0));
    ctx.metric("nearly_top_singular_value", cert.top_singular_value());
    let f = CoeffFn::monomial(m, 2, 0);
    let (step, residual) = match decompose(&space, &[], &f, NearlyOptions::default()) {
        Err(Error::NotNearlyInvariant { step, residual, .. }) => (step as f64, residual),
        Ok(_) => (0.0, 0.0),
        Err(e) => return Err(e),
    };
    ctx.check("failure_step", step, Bound::Within(1.0, 1.0));
    ctx.check("residual", residual, Bound::Within(0.99, 1.01));
    Ok(())
}

fn wandering_bound(ctx: &mut Ctx) -> Result<()> {
    let trials = ctx.usize("trials", 30)?;
    let n = ctx.usize("N", 4)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.params.seed);
    let mut violations = 0usize;
    let mut min_w = usize::MAX;
    let mut max_excess = i64::MIN;
    for _ in 0..trials {
        let m = rng.random_range(1..=3usize);
        let k = rng.random_range(1..m * (n + 1));
        let fns: Vec<_> = (0..k).map(|_| random_fn(&mut rng, m, n)).collect();
        let space = Subspace::from_spanning(m, &fns, n, ctx.params.tol)?;
        let w = space.wandering()?.dim();
        min_w = min_w.min(w);
        max_excess = max_excess.max(w as i64 - m as i64);
        if w < 1 || w > m {
            violations += 1;
        }
    }
    // Case M ⊆ zH²: the wandering space must vanish.
    let inside = Subspace::from_spanning(
        2,
        &[CoeffFn::monomial(2, 1, 0), CoeffFn::monomial(2, 2, 1)],
        n.max(2),
        DEFAULT_TOL,
    )?;
    let inside_w = inside.wandering()?.dim();
    let d = 24;
    let psi = diag_inner(
        &[blaschke(C64::new(0.5, 0.0), d)?, blaschke(C64::new(1.0 / 3.0, 0.0), d)?],
        d,
    )?;
    let psi_w = psi_k_theta(&psi, &diag_monomial(&[1, 1])?, d + 1)?.wandering()?.dim();
    ctx.check("violations", violations as f64, Bound::AtMost(0.0));
    ctx.check("min_dim_w", min_w as f64, Bound::AtLeast(1.0));
    ctx.check("max_dim_w_minus_m", max_excess as f64, Bound::AtMost(0.0));
    ctx.check("vanishing_case_dim_w", inside_w as f64, Bound::Within(0.0, 0.0));
    ctx.check("psi_constants_dim_w", psi_w as f64, Bound::Within(2.0, 2.0));
    Ok(())
}

fn roundtrip(ctx: &mut Ctx, p: usize, rs: &[usize], n: usize) -> Result<()> {
    let opts = NearlyOptions::default();
    let k_cap = n + p + 8;
    for &r in rs {
        let ex = defect_example(r, p, n)?;
        let key = |s: &str| format!("r{r}.{s}");
        let cert = certify_nearly(&ex.space.clone().with_tol(1e-8), p)?;
        ctx.check(&key("nearly_defect_dim"), cert.defect_dim as f64, Bound::AtMost(p as f64));
        let ext = extract_k_detailed(&ex.space, &ex.e, opts)?;
        let k_back = ext.k.embed(ex.k.ambient_deg())?;
        ctx.check(&key("k_distance"), k_back.distance(&ex.k)?, Bound::AtMost(1e-6));
        let m_back = synthesize_m(&k_back, &ex.f0_cols, &ex.e, n)?;
        ctx.check(&key("m_distance"), m_back.distance(&ex.space)?, Bound::AtMost(1e-6));
        let gap = ext.results.iter().map(|x| x.norm_gap).fold(0.0, f64::max);
        let iters = ext.results.iter().map(|x| x.iterations).max().unwrap_or(0);
        let all_conv = ext.results.iter().all(|x| x.converged);
        let gk_sum = ext
            .results
            .iter()
            .map(|x| x.gk_norms.iter().sum::<f64>())
            .fold(0.0, f64::max);
        ctx.check(&key("max_norm_gap"), gap, Bound::AtMost(1e-6));
        ctx.check(&key("max_iterations"), iters as f64, Bound::AtMost(k_cap as f64));
        ctx.check(&key("all_converged"), bool_metric(all_conv), Bound::Within(1.0, 1.0));
        ctx.metric(&key("max_gk_sum"), gk_sum);
        ctx.check(&key("gk_sum_finite"), bool_metric(gk_sum.is_finite()), Bound::Within(1.0, 1.0));
        ctx.metric(&key("isometry_defect"), ext.isometry_defect);
        ctx.metric(&key("k_invariance_residual"), ext.invariance_residual);
        ctx.metric(&key("tail_bound"), ex.tail);
    }
    Ok(())
}

fn roundtrip_params(ctx: &mut Ctx, default_p: usize) -> Result<(usize, Vec<usize>, usize)> {
    let p = ctx.usize("p", default_p)?;
    let rs = ctx.list("r", &[1, 2])?;
    let n = ctx.usize("N", 32)?;
    ctx.echo("construction", json!("F0 = [b_a e_i], E_1 = e_{r+1}, E_2 = b_{1/4} e_{r+2}, K = model space of diag(z^k)"));
    Ok((p, rs, n))
}

fn main_defect1(ctx: &mut Ctx) -> Result<()> {
    let (p, rs, n) = roundtrip_params(ctx, 1)?;
    roundtrip(ctx, p, &rs, n)
}

fn main_defectp(ctx: &mut Ctx) -> Result<()> {
    let (p, rs, n) = roundtrip_params(ctx, 2)?;
    roundtrip(ctx, p, &rs, n)
}

fn corollary_almost(ctx: &mut Ctx) -> Result<()> {
    let n = ctx.usize("N", 3)?;
    ctx.echo("M", json!("span{(1+z)/sqrt 2}"));
    let (m, defect) = hand_example(n)?;
    let nearly = certify_nearly(&m, 0)?;
    ctx.check("nearly_defect_dim", nearly.defect_dim as f64, Bound::AtMost(0.0));
    let bare = almost_invariant_sstar_check(&m, &[])?;
    let with = almost_invariant_sstar_check(&m, &[defect])?;
    ctx.metric("residual_empty", bare.residual);
    ctx.check("residual_empty_error", (bare.residual - 0.5).abs(), Bound::AtMost(1e-10));
    ctx.check("holds_empty", bool_metric(bare.holds), Bound::Within(0.0, 0.0));
    ctx.check("residual_defect", with.residual, Bound::AtMost(1e-10));
    ctx.check("holds_defect", bool_metric(with.holds), Bound::Within(1.0, 1.0));
    Ok(())
}

fn duality(ctx: &mut Ctx) -> Result<()> {
    let pairs = ctx.usize("pairs", 50)?;
    let m = ctx.usize("m", 2)?;
    let n = ctx.usize("N", 8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.params.seed);
    let (mut agree, mut fwd_true, mut fwd_false) = (0usize, 0usize, 0usize);
    let mut max_gap: f64 = 0.0;
    for i in 0..pairs {
        let k = rng.random_range(1..=5usize);
        let fns: Vec<_> = (0..k).map(|_| random_fn(&mut rng, m, n)).collect();
        let space = Subspace::from_spanning(m, &fns, n, ctx.params.tol)?;
        let cert = space.defect_of(ShiftOp::Backshift)?;
        let mut defect = cert.defect_basis.clone();
        if i % 2 == 1 && !defect.is_empty() {
            defect.remove(rng.random_range(0..defect.len()));
        }
        let out = duality_check(&space, &defect)?;
        if out.agree() {
            agree += 1;
        }
        if out.forward.holds {
            fwd_true += 1;
        } else {
            fwd_false += 1;
        }
        max_gap = max_gap.max((out.forward.residual - out.dual.residual).abs());
    }
    ctx.check("disagreements", (pairs - agree) as f64, Bound::AtMost(0.0));
    ctx.check("forward_true", fwd_true as f64, Bound::AtLeast(1.0));
    ctx.check("forward_false", fwd_false as f64, Bound::AtLeast(1.0));
    ctx.metric("agreements", agree as f64);
    ctx.metric("max_residual_gap", max_gap);
    Ok(())
}

fn section4(ctx: &mut Ctx) -> Result<()> {
    let samples = ctx.usize("samples", 100)?;
    let r = ctx.usize("r", 2)?;
    let n = ctx.usize("N", 24)?;
    let ex = defect_example(r, 1, n)?;
    let f0 = ex.f0_symbol()?;
    let e = ex.e_symbols()?;
    let k_perp = ex.k.complement();
    let m_perp = ex.space.complement();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.params.seed);
    let (mut agree, mut members, mut non_members) = (0usize, 0usize, 0usize);
    let mut member_residual: f64 = 0.0;
    for i in 0..samples {
        let mut g = random_fn(&mut rng, r + 1, n);
        if i % 2 == 0 {
            g = m_perp.project(&g)?;
        }
        let direct = ex.space.project(&g)?.norm() <= 1e-7;
        let out = orthocomplement_membership(&g, f0.as_ref(), &e, &k_perp)?;
        if out.holds == direct {
            agree += 1;
        }
        if direct {
            members += 1;
            member_residual = member_residual.max(out.residual);
        } else {
            non_members += 1;
        }
    }
    ctx.check("disagreements", (samples - agree) as f64, Bound::AtMost(0.0));
    ctx.check("members", members as f64, Bound::AtLeast(20.0));
    ctx.check("non_members", non_members as f64, Bound::AtLeast(20.0));
    ctx.metric("max_member_residual", member_residual);
    Ok(())
}

/// Markdown table: one row per metric.
pub fn render_markdown(reports: &[ScenarioReport]) -> String {
    let mut out = String::from("| scenario | claim | metric | value | threshold | passed |\n|---|---|---|---|---|---|\n");
    for rep in reports {
        let thresholds = rep.parameters.get("thresholds").and_then(Value::as_object);
        for (name, value) in &rep.metrics {
            let thr = thresholds
                .and_then(|t| t.get(name))
                .and_then(Value::as_str)
                .unwrap_or("");
            out.push_str(&format!(
                "| {} | {} | {} | {:.3e} | {} | {} |\n",
                rep.scenario_id,
                claim(&rep.scenario_id),
                name,
                value,
                thr,
                if rep.passed { "yes" } else { "no" }
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> ScenarioParams {
        ScenarioParams {
            timing: false,
            ..Default::default()
        }
    }

    #[test]
    fn counterexample_example() {
        let rep = run_scenario("counterexample", &quiet().with("m", 2)).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.metrics["residual"] >= 0.9);
    }

    #[test]
    fn beurling_example() {
        let p = quiet().with("theta", "diag z²,z³").with("N", 16);
        let rep = run_scenario("beurling", &p).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.metrics["model_distance"] <= 1e-10);
    }

    #[test]
    fn main_defectp_example() {
        let p = quiet().with("r", 2).with("p", 1).with("N", 32);
        let rep = run_scenario("main_defectp", &p).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.metrics["r2.max_norm_gap"] <= 1e-6);
    }

    #[test]
    fn unknown_inputs_are_rejected() {
        assert!(matches!(run_scenario("nope", &quiet()), Err(Error::UnknownScenario(_))));
        assert!(matches!(
            run_scenario("beurling", &quiet().with("bogus", 1)),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            run_scenario("beurling", &quiet().with("N", "x")),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(ScenarioParams::parse(&["novalue".into()]).is_err());
    }

    #[test]
    fn reports_echo_thresholds_and_seed() {
        let rep = run_scenario("corollary_almost", &quiet()).unwrap();
        let thr = rep.parameters["thresholds"].as_object().unwrap();
        for name in thr.keys() {
            assert!(rep.metrics.contains_key(name));
        }
        assert_eq!(rep.parameters["seed"], json!(0));
        assert_eq!(rep.runtime_ms, 0.0);
    }

    #[test]
    fn markdown_has_a_row_per_metric() {
        let rep = run_scenario("corollary_almost", &quiet()).unwrap();
        let md = render_markdown(std::slice::from_ref(&rep));
        assert_eq!(md.lines().count(), 2 + rep.metrics.len());
    }
}
