//! JSON file formats. Complex numbers are `[re, im]` pairs.
//!
//! * function: `{"m": 2, "coeffs": [[[re, im], [re, im]], ...]}`, one inner list per degree;
//! * symbol: `{"kind": ..., "deg": N, ...}` with kinds `monomial {k}`,
//!   `blaschke {zeros, rotation}`, `poly {coeffs}`, `diag {entries}` and
//!   `matrix {rows, inner}`;
//! * space: `{"m": 2, "ambient_deg": N, "functions": [function, ...]}`.
//!
//! Parse errors carry a JSON path such as `$.coeffs[1][0]`, or the line and
//! column for malformed documents.

use serde_json::{json, Map, Value};

use crate::coeff::{CoeffFn, C64};
use crate::error::{Error, Result};
use crate::inner::{blaschke_scalar, diag_inner, monomial_inner, BlaschkeSpec};
use crate::linalg::CMat;
use crate::nearly::DecompResult;
use crate::operators::MatSymbol;
use crate::subspace::{DefectCertificate, Subspace};

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })
}

fn field<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::parse(path, format!("missing field `{key}`")))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::parse(path, "expected a non-negative integer"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::parse(path, "expected an array"))
}

fn complex(v: &Value, path: &str) -> Result<C64> {
    let pair = as_array(v, path)?;
    if pair.len() != 2 {
        return Err(Error::parse(path, "expected [re, im]"));
    }
    let part = |i: usize| -> Result<f64> {
        let x = pair[i]
            .as_f64()
            .ok_or_else(|| Error::parse(format!("{path}[{i}]"), "expected a number"))?;
        if !x.is_finite() {
            return Err(Error::parse(format!("{path}[{i}]"), "non-finite number"));
        }
        Ok(x)
    };
    Ok(C64::new(part(0)?, part(1)?))
}

fn complex_list(v: &Value, path: &str) -> Result<Vec<C64>> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, c)| complex(c, &format!("{path}[{i}]")))
        .collect()
}

fn c_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn function_from_value(v: &Value, path: &str) -> Result<CoeffFn> {
    let m = as_usize(field(v, "m", path)?, &format!("{path}.m"))?;
    if m == 0 {
        return Err(Error::parse(format!("{path}.m"), "m must be positive"));
    }
    let cpath = format!("{path}.coeffs");
    let degs = as_array(field(v, "coeffs", path)?, &cpath)?;
    if degs.is_empty() {
        return Err(Error::parse(cpath, "at least one coefficient is required"));
    }
    let mut coeffs = Vec::with_capacity(degs.len());
    for (n, block) in degs.iter().enumerate() {
        let bpath = format!("{cpath}[{n}]");
        let vals = complex_list(block, &bpath)?;
        if vals.len() != m {
            return Err(Error::parse(
                bpath,
                format!("ragged array: expected {m} components, found {}", vals.len()),
            ));
        }
        coeffs.push(vals);
    }
    CoeffFn::new(m, coeffs)
}

pub fn parse_function_spec(text: &str) -> Result<CoeffFn> {
    function_from_value(&parse_json(text)?, "$")
}

pub fn function_to_value(f: &CoeffFn) -> Value {
    json!({
        "m": f.dim_m(),
        "coeffs": f
            .coeffs()
            .iter()
            .map(|a| a.iter().map(|&z| c_json(z)).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

pub fn serialize_function(f: &CoeffFn) -> String {
    function_to_value(f).to_string()
}

/// Scalar (1×1) symbol spec at truncation degree `deg`.
fn scalar_symbol(v: &Value, deg: usize, path: &str) -> Result<MatSymbol> {
    let kind = field(v, "kind", path)?
        .as_str()
        .ok_or_else(|| Error::parse(format!("{path}.kind"), "expected a string"))?;
    match kind {
        "monomial" => {
            let k = as_usize(field(v, "k", path)?, &format!("{path}.k"))?;
            monomial_inner(k, deg)
        }
        "blaschke" => {
            let zeros = complex_list(field(v, "zeros", path)?, &format!("{path}.zeros"))?;
            let rotation = match v.get("rotation") {
                Some(r) => complex(r, &format!("{path}.rotation"))?,
                None => C64::new(1.0, 0.0),
            };
            blaschke_scalar(&BlaschkeSpec::new(zeros, rotation)?, deg)
        }
        "poly" => {
            let coeffs = complex_list(field(v, "coeffs", path)?, &format!("{path}.coeffs"))?;
            if coeffs.is_empty() {
                return Err(Error::parse(format!("{path}.coeffs"), "empty polynomial"));
            }
            Ok(MatSymbol::scalar(&coeffs)?.retruncated(deg))
        }
        other => Err(Error::parse(
            format!("{path}.kind"),
            format!("unknown scalar kind `{other}`"),
        )),
    }
}

fn symbol_from_value(v: &Value, deg: usize, path: &str) -> Result<MatSymbol> {
    let kind = field(v, "kind", path)?
        .as_str()
        .ok_or_else(|| Error::parse(format!("{path}.kind"), "expected a string"))?;
    match kind {
        "diag" => {
            let epath = format!("{path}.entries");
            let entries = as_array(field(v, "entries", path)?, &epath)?
                .iter()
                .enumerate()
                .map(|(i, e)| scalar_symbol(e, deg, &format!("{epath}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            if entries.is_empty() {
                return Err(Error::parse(epath, "empty diagonal"));
            }
            if entries.iter().all(|e| e.claimed_inner()) {
                diag_inner(&entries, deg)
            } else {
                let grid: Vec<Vec<Option<MatSymbol>>> = (0..entries.len())
                    .map(|i| {
                        (0..entries.len())
                            .map(|j| (i == j).then(|| entries[i].clone()))
                            .collect()
                    })
                    .collect();
                assemble(&grid, deg, false)
            }
        }
        "matrix" => {
            let rpath = format!("{path}.rows");
            let rows = as_array(field(v, "rows", path)?, &rpath)?;
            if rows.is_empty() {
                return Err(Error::parse(rpath, "empty matrix"));
            }
            let mut grid: Vec<Vec<Option<MatSymbol>>> = Vec::with_capacity(rows.len());
            for (i, row) in rows.iter().enumerate() {
                let row_path = format!("{rpath}[{i}]");
                let cells = as_array(row, &row_path)?;
                if i > 0 && cells.len() != grid[0].len() {
                    return Err(Error::parse(row_path, "ragged matrix rows"));
                }
                grid.push(
                    cells
                        .iter()
                        .enumerate()
                        .map(|(j, c)| scalar_symbol(c, deg, &format!("{row_path}[{j}]")).map(Some))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            if grid[0].is_empty() {
                return Err(Error::parse(rpath, "empty matrix row"));
            }
            let inner = v.get("inner").and_then(Value::as_bool).unwrap_or(false);
            assemble(&grid, deg, inner)
        }
        _ => scalar_symbol(v, deg, path),
    }
}

/// Matrix symbol from scalar entries (`None` is zero). The tail bound is the
/// Frobenius combination of the entry tails.
fn assemble(grid: &[Vec<Option<MatSymbol>>], deg: usize, inner: bool) -> Result<MatSymbol> {
    let (rows, cols) = (grid.len(), grid[0].len());
    let mut mats = vec![CMat::zeros(rows, cols); deg + 1];
    let mut tail_sq = 0.0;
    for (i, row) in grid.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            if let Some(s) = cell {
                for (k, mk) in s.mats().iter().enumerate() {
                    mats[k][(i, j)] = mk[(0, 0)];
                }
                tail_sq += s.tail_bound() * s.tail_bound();
            }
        }
    }
    Ok(MatSymbol::new(rows, cols, mats)?
        .with_tail_bound(tail_sq.sqrt())
        .with_claimed_inner(inner))
}

pub fn parse_symbol_spec(text: &str) -> Result<MatSymbol> {
    let v = parse_json(text)?;
    let deg = as_usize(field(&v, "deg", "$")?, "$.deg")?;
    symbol_from_value(&v, deg, "$")
}

pub fn space_from_value(v: &Value, tol: f64) -> Result<Subspace> {
    let m = as_usize(field(v, "m", "$")?, "$.m")?;
    let n = as_usize(field(v, "ambient_deg", "$")?, "$.ambient_deg")?;
    let fns = function_list(v, m)?;
    let tol = v.get("tol").and_then(Value::as_f64).unwrap_or(tol);
    Subspace::from_spanning(m, &fns, n, tol)
}

/// Parses a space file; `tol` is used unless the file sets its own.
pub fn parse_space_spec(text: &str, tol: f64) -> Result<Subspace> {
    space_from_value(&parse_json(text)?, tol)
}

/// The `functions` of a space file, as given (not orthonormalized).
pub fn parse_function_list(text: &str) -> Result<Vec<CoeffFn>> {
    let v = parse_json(text)?;
    let m = as_usize(field(&v, "m", "$")?, "$.m")?;
    function_list(&v, m)
}

fn function_list(v: &Value, m: usize) -> Result<Vec<CoeffFn>> {
    let fns = as_array(field(v, "functions", "$")?, "$.functions")?
        .iter()
        .enumerate()
        .map(|(i, f)| function_from_value(f, &format!("$.functions[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    if let Some((i, _)) = fns.iter().enumerate().find(|(_, f)| f.dim_m() != m) {
        return Err(Error::parse(
            format!("$.functions[{i}].m"),
            format!("expected m = {m}"),
        ));
    }
    Ok(fns)
}

pub fn space_to_value(s: &Subspace) -> Value {
    json!({
        "m": s.dim_m(),
        "ambient_deg": s.ambient_deg(),
        "dim": s.dim(),
        "band_deg": s.band_deg(),
        "tol": s.tol(),
        "functions": s.basis().iter().map(function_to_value).collect::<Vec<_>>(),
    })
}

pub fn space_document(m: usize, ambient_deg: usize, fns: &[CoeffFn]) -> Value {
    json!({
        "m": m,
        "ambient_deg": ambient_deg,
        "functions": fns.iter().map(function_to_value).collect::<Vec<_>>(),
    })
}

pub fn certificate_to_value(c: &DefectCertificate) -> Value {
    json!({
        "op": c.op.to_string(),
        "mode": c.mode.to_string(),
        "defect_dim": c.defect_dim,
        "bound": c.bound,
        "passed": c.passed(),
        "max_residual": c.max_residual,
        "tol": c.tol,
        "singular_values": c.singular_values,
        "defect_basis": c.defect_basis.iter().map(function_to_value).collect::<Vec<_>>(),
    })
}

pub fn decomposition_to_value(d: &DecompResult) -> Value {
    let vecs = |t: &[Vec<C64>]| -> Vec<Vec<Value>> {
        t.iter().map(|v| v.iter().map(|&z| c_json(z)).collect()).collect()
    };
    let mut out = Map::new();
    out.insert("K0".into(), d.k0.as_ref().map_or(Value::Null, function_to_value));
    out.insert(
        "kj".into(),
        Value::Array(d.kj.iter().map(function_to_value).collect()),
    );
    out.insert("A_trace".into(), json!(vecs(&d.a_trace)));
    out.insert("beta_trace".into(), json!(vecs(&d.beta_trace)));
    out.insert("gk_norms".into(), json!(d.gk_norms));
    out.insert("max_step_residual".into(), json!(d.max_step_residual));
    out.insert("norm_gap".into(), json!(d.norm_gap));
    out.insert("iterations".into(), json!(d.iterations));
    out.insert("converged".into(), json!(d.converged));
    Value::Object(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_TOL;
    use proptest::prelude::*;

    #[test]
    fn function_examples() {
        let f = parse_function_spec(r#"{"m":1,"coeffs":[[[1,0]]]}"#).unwrap();
        assert_eq!(f, CoeffFn::scalar_real(&[1.0]).unwrap());
        let f = parse_function_spec(r#"{"m":2,"coeffs":[[[0,0],[0,0]],[[1,0],[0,0]]]}"#).unwrap();
        assert_eq!(f, CoeffFn::monomial(2, 1, 0));
    }

    #[test]
    fn function_errors_carry_paths() {
        let err = parse_function_spec(r#"{"m":2,"coeffs":[[[0,0],[0,0]],[[1,0]]]}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { ref path, .. } if path == "$.coeffs[1]"));
        let err = parse_function_spec(r#"{"m":1,"coeffs":[[[1,"x"]]]}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { ref path, .. } if path == "$.coeffs[0][0][1]"));
        let err = parse_function_spec("{\"m\":1,\n \"coeffs\": [").unwrap_err();
        assert!(matches!(err, Error::Parse { ref path, .. } if path.starts_with("line 2")));
        let err = parse_function_spec(r#"{"coeffs":[[[1,0]]]}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn symbol_examples() {
        let s = parse_symbol_spec(
            r#"{"kind":"diag","deg":1,"entries":[{"kind":"monomial","k":1},{"kind":"monomial","k":1}]}"#,
        )
        .unwrap();
        assert!(s.claimed_inner());
        assert!((s.coeff(1) - CMat::identity(2, 2)).norm() < 1e-15);
        assert!(s.coeff(0).norm() < 1e-15);

        let s = parse_symbol_spec(r#"{"kind":"blaschke","deg":32,"zeros":[[0.5,0]]}"#).unwrap();
        assert_eq!(s.deg(), 32);
        // c₀ = 1/2, cₙ = (1/4 − 1)(1/2)^{n−1}
        assert!((s.coeff(0)[(0, 0)].re - 0.5).abs() < 1e-15);
        for n in 1..=32 {
            let expect = -0.75 * 0.5f64.powi(n as i32 - 1);
            assert!((s.coeff(n)[(0, 0)].re - expect).abs() < 1e-15);
        }
        assert!(s.tail_bound() > 0.0);

        let s = parse_symbol_spec(r#"{"kind":"poly","deg":0,"coeffs":[[1,0]]}"#).unwrap();
        assert_eq!(s, MatSymbol::scalar(&[C64::new(1.0, 0.0)]).unwrap());
    }

    #[test]
    fn symbol_errors() {
        let err = parse_symbol_spec(r#"{"kind":"blaschke","deg":4,"zeros":[[1.0,0]]}"#).unwrap_err();
        assert!(matches!(err, Error::ZeroOutsideDisc { .. }));
        let err = parse_symbol_spec(r#"{"kind":"spline","deg":4}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = parse_symbol_spec(
            r#"{"kind":"matrix","deg":1,"rows":[[{"kind":"monomial","k":1}],[]]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn matrix_symbol_assembles_entries() {
        let s = parse_symbol_spec(
            r#"{"kind":"matrix","deg":1,"inner":true,"rows":[
                [{"kind":"poly","coeffs":[[0,0]]},{"kind":"monomial","k":1}],
                [{"kind":"monomial","k":0},{"kind":"poly","coeffs":[[0,0]]}]]}"#,
        )
        .unwrap();
        assert!(s.claimed_inner());
        assert_eq!((s.m_out(), s.m_in()), (2, 2));
        assert_eq!(s.coeff(1)[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(s.coeff(0)[(1, 0)], C64::new(1.0, 0.0));
    }

    #[test]
    fn space_roundtrip() {
        let text = r#"{"m":1,"ambient_deg":3,"functions":[
            {"m":1,"coeffs":[[[1,0]]]},{"m":1,"coeffs":[[[0,0]],[[1,0]]]},{"m":1,"coeffs":[[[1,0]],[[1,0]]]}]}"#;
        let s = parse_space_spec(text, DEFAULT_TOL).unwrap();
        assert_eq!(s.dim(), 2);
        let again = space_from_value(&space_to_value(&s), DEFAULT_TOL).unwrap();
        assert!(s.distance(&again).unwrap() < 1e-14);
    }

    fn arb_fn() -> impl Strategy<Value = CoeffFn> {
        (1usize..4, 0usize..6).prop_flat_map(|(m, d)| {
            prop::collection::vec((-1e3..1e3f64, -1e3..1e3f64), m * (d + 1)).prop_map(move |v| {
                CoeffFn::from_flat(m, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn serialize_parse_roundtrip(f in arb_fn()) {
            let back = parse_function_spec(&serialize_function(&f)).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
