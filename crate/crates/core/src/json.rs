//! `mpwb/1` JSON encodings: complex numbers as `[re, im]`, matrices as
//! row-major nested arrays. Decoding errors name the offending schema path
//! (`$.g[1]`, `$.ref.siegel[0][0]`, ...).

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::halfform::DMorphism;
use crate::linalg::{CMat, RMat, C64};
use crate::metaplectic::{GeneralizedMetaplecticElement, MetaplecticElement};
use crate::symplectic::{PositivePolarization, Symplectomorphism};
use crate::trace::FixedPointDatum;

pub const SCHEMA: &str = "mpwb/1";

fn schema_error(path: &str, message: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("{path}: {message}"))
}

pub fn child(path: &str, key: &str) -> String {
    format!("{path}.{key}")
}

pub fn item(path: &str, index: usize) -> String {
    format!("{path}[{index}]")
}

/// Required object field.
pub fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    let obj = v.as_object().ok_or_else(|| schema_error(path, "expected an object"))?;
    obj.get(key).ok_or_else(|| schema_error(&child(path, key), "missing field"))
}

/// Optional object field (`null` counts as absent).
pub fn opt_field<'a>(v: &'a Value, key: &str) -> Option<&'a Value> {
    v.as_object().and_then(|o| o.get(key)).filter(|x| !x.is_null())
}

pub fn f64_from_json(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| schema_error(path, "expected a number"))
}

pub fn u32_from_json(v: &Value, path: &str) -> Result<u32> {
    v.as_u64()
        .and_then(|x| u32::try_from(x).ok())
        .ok_or_else(|| schema_error(path, "expected a non-negative integer"))
}

pub fn complex_to_json(z: C64) -> Value {
    json!([z.re, z.im])
}

/// `[re, im]`, or a bare real number.
pub fn complex_from_json(v: &Value, path: &str) -> Result<C64> {
    if let Some(x) = v.as_f64() {
        return Ok(C64::new(x, 0.0));
    }
    match v.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => Ok(C64::new(
            f64_from_json(re, &item(path, 0))?,
            f64_from_json(im, &item(path, 1))?,
        )),
        _ => Err(schema_error(path, "expected a complex number [re, im]")),
    }
}

fn rows_of<'a>(v: &'a Value, path: &str) -> Result<Vec<&'a Vec<Value>>> {
    let rows = v.as_array().ok_or_else(|| schema_error(path, "expected a matrix (array of rows)"))?;
    if rows.is_empty() {
        return Err(schema_error(path, "empty matrix"));
    }
    let mut out = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let r = r.as_array().ok_or_else(|| schema_error(&item(path, i), "expected a row array"))?;
        if r.len() != rows[0].as_array().map_or(0, |x| x.len()) || r.is_empty() {
            return Err(schema_error(&item(path, i), "row length differs from the first row"));
        }
        out.push(r);
    }
    Ok(out)
}

pub fn rmat_from_json(v: &Value, path: &str) -> Result<RMat> {
    let rows = rows_of(v, path)?;
    let (nr, nc) = (rows.len(), rows[0].len());
    let mut m = RMat::zeros(nr, nc);
    for (i, r) in rows.iter().enumerate() {
        for (j, x) in r.iter().enumerate() {
            m[(i, j)] = f64_from_json(x, &item(&item(path, i), j))?;
        }
    }
    Ok(m)
}

pub fn cmat_from_json(v: &Value, path: &str) -> Result<CMat> {
    let rows = rows_of(v, path)?;
    let (nr, nc) = (rows.len(), rows[0].len());
    let mut m = CMat::zeros(nr, nc);
    for (i, r) in rows.iter().enumerate() {
        for (j, x) in r.iter().enumerate() {
            m[(i, j)] = complex_from_json(x, &item(&item(path, i), j))?;
        }
    }
    Ok(m)
}

pub fn rmat_to_json(m: &RMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn cmat_to_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_json(m[(i, j)])).collect()))
            .collect(),
    )
}

fn check_square(m: &RMat, path: &str) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() % 2 != 0 {
        return Err(schema_error(path, "expected a square matrix of even size 2n"));
    }
    Ok(m.nrows() / 2)
}

pub fn symplectic_from_json(v: &Value, path: &str) -> Result<Symplectomorphism> {
    let m = rmat_from_json(v, path)?;
    check_square(&m, path)?;
    Symplectomorphism::new(m)
}

/// `{"siegel": Z}` or `{"frame": F}`; a missing value means the standard polarization.
pub fn polarization_from_json(v: Option<&Value>, n: usize, path: &str) -> Result<PositivePolarization> {
    let Some(v) = v else {
        return Ok(PositivePolarization::standard(n));
    };
    if let Some(s) = v.as_str() {
        return match s {
            "standard" => Ok(PositivePolarization::standard(n)),
            _ => Err(schema_error(path, "unknown polarization name")),
        };
    }
    let p = if let Some(z) = opt_field(v, "siegel") {
        PositivePolarization::from_siegel(cmat_from_json(z, &child(path, "siegel"))?)?
    } else if let Some(f) = opt_field(v, "frame") {
        PositivePolarization::from_frame(cmat_from_json(f, &child(path, "frame"))?)?
    } else {
        return Err(schema_error(path, "expected {\"siegel\": ...} or {\"frame\": ...}"));
    };
    if p.half_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p.half_dim() });
    }
    Ok(p)
}

pub fn polarization_to_json(p: &PositivePolarization) -> Value {
    json!({ "siegel": cmat_to_json(p.siegel()), "frame": cmat_to_json(p.frame()) })
}

fn check_n(v: &Value, n: usize, path: &str) -> Result<()> {
    if let Some(nv) = opt_field(v, "n") {
        let declared = u32_from_json(nv, &child(path, "n"))? as usize;
        if declared != n {
            return Err(schema_error(&child(path, "n"), format!("n = {declared} but g is {0}x{0}", 2 * n)));
        }
    }
    Ok(())
}

/// `{"g": ..., "z": ..., "ref"?: ..., "n"?: ...}`.
pub fn element_from_json(v: &Value, path: &str) -> Result<MetaplecticElement> {
    let g = symplectic_from_json(field(v, "g", path)?, &child(path, "g"))?;
    let n = g.half_dim();
    check_n(v, n, path)?;
    let z = complex_from_json(field(v, "z", path)?, &child(path, "z"))?;
    let reference = polarization_from_json(opt_field(v, "ref"), n, &child(path, "ref"))?;
    MetaplecticElement::new(g, z, reference)
}

pub fn element_to_json(e: &MetaplecticElement) -> Value {
    json!({
        "g": rmat_to_json(e.g().matrix()),
        "z": complex_to_json(e.z()),
        "ref": polarization_to_json(e.reference()),
    })
}

pub fn generalized_to_json(e: &GeneralizedMetaplecticElement) -> Value {
    json!({
        "g": rmat_to_json(e.g().matrix()),
        "z": complex_to_json(e.z()),
        "p": e.p(),
        "ref": polarization_to_json(e.reference()),
    })
}

/// `{"g"?: ..., "source"?: ..., "target"?: ..., "psi"?: ..., "lift"?: "distinguished" | "other"}`.
/// Without `psi` the chosen lift of `g` is used; `g` defaults to the identity.
pub fn dmorphism_from_json(v: &Value, path: &str) -> Result<DMorphism> {
    let n_hint = match opt_field(v, "n") {
        Some(nv) => Some(u32_from_json(nv, &child(path, "n"))? as usize),
        None => None,
    };
    let g = match opt_field(v, "g") {
        Some(gv) => Some(symplectic_from_json(gv, &child(path, "g"))?),
        None => None,
    };
    let n = match (&g, n_hint) {
        (Some(g), _) => g.half_dim(),
        (None, Some(n)) => n,
        (None, None) => {
            let src = opt_field(v, "source").and_then(|s| opt_field(s, "siegel"));
            match src.and_then(|s| s.as_array()) {
                Some(rows) => rows.len(),
                None => return Err(schema_error(path, "cannot infer n: give g, n or source.siegel")),
            }
        }
    };
    check_n(v, n, path)?;
    let g = g.unwrap_or_else(|| Symplectomorphism::identity(n));
    let source = polarization_from_json(opt_field(v, "source"), n, &child(path, "source"))?;
    let target = polarization_from_json(opt_field(v, "target"), n, &child(path, "target"))?;
    if let Some(psi) = opt_field(v, "psi") {
        let psi = complex_from_json(psi, &child(path, "psi"))?;
        return DMorphism::new(g, source, target, psi);
    }
    let (distinguished, other) = DMorphism::lift(&g, &source, &target)?;
    match opt_field(v, "lift").map(|l| l.as_str()) {
        None | Some(Some("distinguished")) => Ok(distinguished),
        Some(Some("other")) => Ok(other),
        _ => Err(schema_error(&child(path, "lift"), "expected \"distinguished\" or \"other\"")),
    }
}

pub fn dmorphism_to_json(m: &DMorphism) -> Value {
    json!({
        "g": rmat_to_json(m.g().matrix()),
        "source": polarization_to_json(m.source()),
        "target": polarization_to_json(m.target()),
        "psi": complex_to_json(m.psi()),
    })
}

/// `{"g": ..., "z": ..., "u": ..., "h"?: ..., "mp"?: {"z": ..., "p"?: ...}, "ref"?: ...}`.
/// `mp` defaults to `p = 1` and to the datum's `g` and `ref`; `"mp": true`
/// uses `z` itself as the metaplectic `z`.
pub fn datum_from_json(v: &Value, path: &str) -> Result<FixedPointDatum> {
    let g = symplectic_from_json(field(v, "g", path)?, &child(path, "g"))?;
    let n = g.half_dim();
    let z = complex_from_json(field(v, "z", path)?, &child(path, "z"))?;
    let u = complex_from_json(field(v, "u", path)?, &child(path, "u"))?;
    let reference = polarization_from_json(opt_field(v, "ref"), n, &child(path, "ref"))?;
    let mut d = FixedPointDatum::new(g.clone(), z, u)?.with_reference(reference.clone())?;
    if let Some(h) = opt_field(v, "h") {
        d = d.with_h(cmat_from_json(h, &child(path, "h"))?)?;
    }
    if let Some(mp) = opt_field(v, "mp") {
        let mpath = child(path, "mp");
        let (mz, p) = if mp.as_bool() == Some(true) {
            (z, 1)
        } else {
            let mz = complex_from_json(field(mp, "z", &mpath)?, &child(&mpath, "z"))?;
            let p = match opt_field(mp, "p") {
                Some(pv) => u32_from_json(pv, &child(&mpath, "p"))?,
                None => 1,
            };
            (mz, p)
        };
        d = d.with_mp(GeneralizedMetaplecticElement::new(g, mz, reference, p)?)?;
    }
    Ok(d)
}

/// Wraps a result object with the schema tag.
pub fn tagged(mut body: Map<String, Value>) -> Value {
    body.insert("schema".into(), Value::String(SCHEMA.into()));
    Value::Object(body)
}
