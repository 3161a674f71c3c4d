use serde_json::{json, Map, Value};

use mpwb_core::bargmann::{abel_trace, kernel_trace, operator_matrix, phase_form, unitarity_defect};
use mpwb_core::halfform::{dmor_compose_with, transfer_det, zeta_sqrt_with};
use mpwb_core::json::{
    child, cmat_to_json, complex_from_json, complex_to_json, datum_from_json, dmorphism_from_json,
    dmorphism_to_json, element_from_json, element_to_json, f64_from_json, field, item, opt_field, polarization_from_json, rmat_to_json, symplectic_from_json,
    u32_from_json,
};
use mpwb_core::linalg::{det_c, max_abs_c, rel_diff, C64};
use mpwb_core::metaplectic::{
    mp_index_with, mp_p_index_with, projection_matrix, DEGENERACY_THRESHOLD,
};
use mpwb_core::trace::sphere_sweep;
use mpwb_core::{
    lefschetz_number, mp_index_2d, mp_lift, trace_estimate, trace_estimate_halfform, zeta, BranchOptions,
    DMorphism, FixedPointDatum, GeneralizedMetaplecticElement, MetaplecticElement, PositivePolarization,
    Symplectomorphism, TraceQuery,
};

use crate::{CliError, Command, Doc, Options, DEFAULT_TRUNCATION};

type Res<T> = Result<T, CliError>;

/// A scalar table for CSV output.
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// One CSV document; with `array`, a leading `job` column holds the input position.
    pub fn render_all(tables: &[Table], array: bool) -> String {
        let mut out = String::new();
        let Some(first) = tables.first() else {
            return out;
        };
        let mut header: Vec<&str> = Vec::new();
        if array {
            header.push("job");
        }
        header.extend(&first.headers);
        out.push_str(&header.join(","));
        out.push('\n');
        for (job, t) in tables.iter().enumerate() {
            for row in &t.rows {
                let mut cells: Vec<String> = Vec::with_capacity(row.len() + 1);
                if array {
                    cells.push(job.to_string());
                }
                cells.extend(row.iter().map(|&x| csv_number(x)));
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }
}

/// Shortest round-trip form, as in the JSON output.
fn csv_number(x: f64) -> String {
    serde_json::Number::from_f64(x).map_or_else(|| x.to_string(), |n| n.to_string())
}

fn doc(body: Value) -> Doc {
    Doc { body: into_map(body), table: None }
}

fn into_map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    }
}

fn branch_options(opts: &Options) -> BranchOptions {
    opts.path_steps.map_or_else(BranchOptions::default, BranchOptions::with_steps)
}

fn array_field<'a>(v: &'a Value, key: &str, path: &str) -> Res<&'a Vec<Value>> {
    let a = field(v, key, path)?;
    a.as_array()
        .ok_or_else(|| CliError::Schema(format!("{}: expected an array", child(path, key))))
}

/// `n` from an explicit field or from the first polarization given.
fn infer_n(v: &Value, polarizations: &[Value], path: &str) -> Res<usize> {
    if let Some(n) = opt_field(v, "n") {
        return Ok(u32_from_json(n, &child(path, "n"))? as usize);
    }
    for p in polarizations {
        if let Some(rows) = opt_field(p, "siegel").and_then(Value::as_array) {
            return Ok(rows.len());
        }
        if let Some(rows) = opt_field(p, "frame").and_then(Value::as_array) {
            return Ok(rows.len() / 2);
        }
    }
    Err(CliError::Schema(format!("{path}: cannot infer n; give \"n\" or a Siegel matrix")))
}

/// `|(z^2 det M)^p - 1|` for `g F = F M + conj(F) N`.
fn element_residual(g: &Symplectomorphism, z: C64, reference: &PositivePolarization, p: u32) -> Res<f64> {
    let d = det_c(&projection_matrix(g, reference)?);
    Ok(((z * z * d).powu(p) - 1.0).norm())
}

fn maybe_index(e: &MetaplecticElement, tol: f64) -> Res<Value> {
    if e.g().det_one_minus().abs() <= DEGENERACY_THRESHOLD {
        return Ok(Value::Null);
    }
    Ok(json!(mp_index_with(e, tol)?.m))
}

fn index(v: &Value, path: &str, opts: &Options) -> Res<Doc> {
    let p = match (opt_field(v, "p"), opts.p) {
        (Some(pv), _) => u32_from_json(pv, &child(path, "p"))?,
        (None, Some(p)) => p,
        (None, None) => 1,
    };
    if p == 1 {
        let e = element_from_json(v, path)?;
        let r = mp_index_with(&e, opts.tolerance)?;
        let mut body = json!({
            "m": r.m,
            "modulus": r.modulus,
            "residual": r.residual,
            "detsqrt": complex_to_json(r.detsqrt),
            "a": rmat_to_json(&r.a),
            "det_one_minus_g": e.g().det_one_minus(),
            "element_residual": element_residual(e.g(), e.z(), e.reference(), 1)?,
        });
        if e.half_dim() == 1 {
            body["m_2d"] = json!(mp_index_2d(&e)?);
        }
        return Ok(doc(body));
    }
    let g = symplectic_from_json(field(v, "g", path)?, &child(path, "g"))?;
    let z = complex_from_json(field(v, "z", path)?, &child(path, "z"))?;
    let reference = polarization_from_json(opt_field(v, "ref"), g.half_dim(), &child(path, "ref"))?;
    let e = GeneralizedMetaplecticElement::new(g, z, reference, p)?;
    let r = mp_p_index_with(&e, opts.tolerance)?;
    Ok(doc(json!({
        "m": r.m,
        "modulus": r.modulus,
        "p": p,
        "p_prime": e.p_prime(),
        "residual": r.residual,
        "detsqrt": complex_to_json(r.detsqrt),
        "a": rmat_to_json(&r.a),
        "det_one_minus_g": e.g().det_one_minus(),
        "element_residual": element_residual(e.g(), e.z(), e.reference(), p)?,
    })))
}

fn dmorphism_residual(m: &DMorphism) -> Res<f64> {
    let d = transfer_det(&m.source().pushforward(m.g())?, m.target())?;
    Ok(rel_diff(m.psi() * m.psi(), d))
}

fn compose(v: &Value, path: &str, opts: &Options) -> Res<Doc> {
    let branch = branch_options(opts);
    if let Some(items) = opt_field(v, "elements") {
        let ipath = child(path, "elements");
        let items = items
            .as_array()
            .filter(|a| !a.is_empty())
            .ok_or_else(|| CliError::Schema(format!("{ipath}: expected a nonempty array")))?;
        let mut acc = element_from_json(&items[0], &item(&ipath, 0))?;
        for (k, x) in items.iter().enumerate().skip(1) {
            let next = element_from_json(x, &item(&ipath, k))?;
            let m = dmor_compose_with(&next.to_dmorphism(), &acc.to_dmorphism(), &branch)?;
            acc = MetaplecticElement::from_dmorphism(&m)?;
        }
        let mut body = element_to_json(&acc);
        body["element_residual"] = json!(element_residual(acc.g(), acc.z(), acc.reference(), 1)?);
        body["m"] = maybe_index(&acc, opts.tolerance)?;
        return Ok(doc(body));
    }
    let ipath = child(path, "morphisms");
    let items = array_field(v, "morphisms", path)
        .map_err(|_| CliError::Schema(format!("{path}: expected \"elements\" or \"morphisms\"")))?;
    if items.is_empty() {
        return Err(CliError::Schema(format!("{ipath}: expected a nonempty array")));
    }
    let mut acc = dmorphism_from_json(&items[0], &item(&ipath, 0))?;
    for (k, x) in items.iter().enumerate().skip(1) {
        let next = dmorphism_from_json(x, &item(&ipath, k))?;
        acc = dmor_compose_with(&next, &acc, &branch)?;
    }
    let mut body = dmorphism_to_json(&acc);
    body["residual"] = json!(dmorphism_residual(&acc)?);
    Ok(doc(body))
}

fn cocycle(v: &Value, path: &str, opts: &Options) -> Res<Doc> {
    let items = array_field(v, "polarizations", path)?;
    let ppath = child(path, "polarizations");
    if items.len() != 3 && items.len() != 4 {
        return Err(CliError::Schema(format!("{ppath}: expected 3 or 4 polarizations")));
    }
    let n = infer_n(v, items, path)?;
    let ps = items
        .iter()
        .enumerate()
        .map(|(k, x)| polarization_from_json(Some(x), n, &item(&ppath, k)))
        .collect::<Result<Vec<_>, _>>()?;
    let branch = branch_options(opts);
    let z = zeta(&ps[0], &ps[1], &ps[2])?;
    let s = zeta_sqrt_with(&ps[0], &ps[1], &ps[2], &branch)?;
    let finer = zeta_sqrt_with(&ps[0], &ps[1], &ps[2], &BranchOptions::with_steps(2 * branch.base_steps))?;
    let mut body = json!({
        "zeta": complex_to_json(z),
        "zeta_sqrt": complex_to_json(s),
        "path_steps": branch.base_steps,
        "square_residual": rel_diff(s * s, z),
        "branch_refinement": (finer - s).norm(),
    });
    if ps.len() == 4 {
        let lhs = zeta(&ps[1], &ps[2], &ps[3])? * zeta(&ps[0], &ps[1], &ps[3])?;
        let rhs = zeta(&ps[0], &ps[2], &ps[3])? * z;
        body["cocycle_residual"] = json!(rel_diff(lhs, rhs));
    }
    Ok(doc(body))
}

fn lift(v: &Value, path: &str, opts: &Options) -> Res<Doc> {
    if opt_field(v, "source").is_some() || opt_field(v, "target").is_some() {
        let m = dmorphism_from_json(v, path)?;
        let d = transfer_det(&m.source().pushforward(m.g())?, m.target())?;
        let other = m.opposite();
        return Ok(doc(json!({
            "distinguished": complex_to_json(m.psi()),
            "other": complex_to_json(other.psi()),
            "transfer_det": complex_to_json(d),
            "residual": rel_diff(m.psi() * m.psi(), d),
        })));
    }
    let g = symplectic_from_json(field(v, "g", path)?, &child(path, "g"))?;
    let reference = polarization_from_json(opt_field(v, "ref"), g.half_dim(), &child(path, "ref"))?;
    let (a, b) = mp_lift(&g, &reference)?;
    let residual = element_residual(a.g(), a.z(), a.reference(), 1)?;
    Ok(doc(json!({
        "elements": [element_to_json(&a), element_to_json(&b)],
        "m": [maybe_index(&a, opts.tolerance)?, maybe_index(&b, opts.tolerance)?],
        "element_residual": residual,
    })))
}

fn bargmann_op(v: &Value, path: &str, opts: &Options) -> Res<Doc> {
    let m = dmorphism_from_json(v, path)?;
    let truncation = opts.truncation.unwrap_or(DEFAULT_TRUNCATION);
    let pf = phase_form(m.g(), m.source(), m.target())?;
    let u = operator_matrix(&m, truncation)?;
    let block = truncation / 3;
    Ok(doc(json!({
        "truncation": truncation,
        "monomials": u.monomials(),
        "entries": cmat_to_json(u.entries()),
        "psi": complex_to_json(m.psi()),
        "phase_residual": pf.residual(),
        "phase_rank": pf.rank(),
        "unitarity_block_degree": block,
        "unitarity_defect": unitarity_defect(&u, block),
    })))
}

fn kernel_trace_cmd(v: &Value, path: &str, opts: &Options) -> Res<Doc> {
    let m = if opt_field(v, "z").is_some() {
        element_from_json(v, path)?.to_dmorphism()
    } else {
        dmorphism_from_json(v, path)?
    };
    let t = kernel_trace(&m)?;
    let e = MetaplecticElement::from_dmorphism(&m)?;
    let mut body = json!({ "trace": complex_to_json(t) });
    if let Value::Number(idx) = maybe_index(&e, opts.tolerance)? {
        let mi = idx.as_u64().unwrap_or(0) as u32;
        let expected = C64::new(0.0, 1.0).powu(mi) / e.g().det_one_minus().abs().sqrt();
        body["m"] = json!(mi);
        body["fixed_point_term"] = complex_to_json(expected);
        body["formula_residual"] = json!((t - expected).norm());
    }
    if let Some(truncation) = opts.truncation {
        let radius = match opt_field(v, "radius") {
            Some(r) => f64_from_json(r, &child(path, "radius"))?,
            None => 0.999,
        };
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(CliError::Schema(format!("{}: radius must lie in (0, 1]", child(path, "radius"))));
        }
        let abel = abel_trace(&operator_matrix(&m, truncation)?, radius);
        body["abel"] = json!({
            "truncation": truncation,
            "radius": radius,
            "plain": complex_to_json(abel.plain),
            "accelerated": complex_to_json(abel.accelerated),
            "residual": (abel.accelerated - t).norm(),
        });
    }
    Ok(doc(body))
}

struct Query {
    ks: Vec<u32>,
    data: Vec<FixedPointDatum>,
    sweep: bool,
}

fn parse_query(v: &Value, path: &str) -> Res<Query> {
    let items = array_field(v, "data", path)?;
    let dpath = child(path, "data");
    let data = items
        .iter()
        .enumerate()
        .map(|(k, x)| datum_from_json(x, &item(&dpath, k)))
        .collect::<Result<Vec<_>, _>>()?;
    let (ks, sweep) = match (opt_field(v, "k"), opt_field(v, "k_max")) {
        (Some(k), None) => (vec![u32_from_json(k, &child(path, "k"))?], false),
        (None, Some(k)) => ((1..=u32_from_json(k, &child(path, "k_max"))?).collect(), true),
        _ => return Err(CliError::Schema(format!("{path}: give exactly one of \"k\" and \"k_max\""))),
    };
    if ks.is_empty() || ks[0] == 0 {
        return Err(CliError::Schema(format!("{path}: k must be at least 1")));
    }
    Ok(Query { ks, data, sweep })
}

fn rows_json(ks: &[u32], values: &[C64]) -> Value {
    Value::Array(
        ks.iter()
            .zip(values)
            .map(|(k, x)| json!({"k": k, "value": complex_to_json(*x)}))
            .collect(),
    )
}

fn trace_cmd(v: &Value, path: &str, opts: &Options) -> Res<Doc> {
    let q = parse_query(v, path)?;
    let p = opts.p.unwrap_or(1);
    let with_mp = q.data.iter().all(|d| d.mp().is_some());
    let mut direct = Vec::with_capacity(q.ks.len());
    let mut halfform = Vec::with_capacity(q.ks.len());
    for &k in &q.ks {
        let tq = TraceQuery::new(k, q.data.clone())?;
        if p == 1 {
            direct.push(trace_estimate(&tq)?);
        }
        if with_mp {
            halfform.push(trace_estimate_halfform(&tq, p)?);
        }
    }
    let mut index_residual: f64 = 0.0;
    for d in &q.data {
        if let Some(mp) = d.mp() {
            index_residual = index_residual.max(mp_p_index_with(mp, opts.tolerance)?.residual);
        }
    }
    let difference = direct
        .iter()
        .zip(&halfform)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let mut body = Map::new();
    body.insert("p".into(), json!(p));
    if q.sweep {
        if !direct.is_empty() {
            body.insert("estimate".into(), rows_json(&q.ks, &direct));
        }
        if !halfform.is_empty() {
            body.insert("halfform".into(), rows_json(&q.ks, &halfform));
        }
    } else {
        body.insert("k".into(), json!(q.ks[0]));
        if let Some(x) = direct.first() {
            body.insert("estimate".into(), complex_to_json(*x));
        }
        if let Some(x) = halfform.first() {
            body.insert("halfform".into(), complex_to_json(*x));
        }
    }
    if with_mp {
        body.insert("index_residual".into(), json!(index_residual));
    }
    if !direct.is_empty() && !halfform.is_empty() {
        body.insert("formula_difference".into(), json!(difference));
    }
    if direct.is_empty() && halfform.is_empty() {
        return Err(CliError::Schema(format!(
            "{path}: p = {p} needs every datum to carry \"mp\""
        )));
    }
    let table = q.sweep.then(|| {
        let (headers, source) = if !halfform.is_empty() {
            (vec!["k", "halfform_re", "halfform_im"], &halfform)
        } else {
            (vec!["k", "estimate_re", "estimate_im"], &direct)
        };
        Table {
            headers,
            rows: q.ks.iter().zip(source.iter()).map(|(k, x)| vec![*k as f64, x.re, x.im]).collect(),
        }
    });
    Ok(Doc { body, table })
}

fn lefschetz_cmd(v: &Value, path: &str) -> Res<Doc> {
    let q = parse_query(v, path)?;
    let mut h_defect: f64 = 0.0;
    for d in &q.data {
        if let Some(h) = d.h() {
            h_defect = h_defect.max(max_abs_c(&(h - projection_matrix(d.g(), d.reference())?)));
        }
    }
    let values = q
        .ks
        .iter()
        .map(|&k| lefschetz_number(&TraceQuery::new(k, q.data.clone())?))
        .collect::<Result<Vec<_>, _>>()?;
    let mut body = Map::new();
    if q.sweep {
        body.insert("lefschetz".into(), rows_json(&q.ks, &values));
    } else {
        body.insert("k".into(), json!(q.ks[0]));
        body.insert("lefschetz".into(), complex_to_json(values[0]));
    }
    body.insert("h_defect".into(), json!(h_defect));
    let table = q.sweep.then(|| Table {
        headers: vec!["k", "lefschetz_re", "lefschetz_im"],
        rows: q.ks.iter().zip(&values).map(|(k, x)| vec![*k as f64, x.re, x.im]).collect(),
    });
    Ok(Doc { body, table })
}

pub fn run_one(command: &Command, v: &Value, path: &str, opts: &Options) -> Res<Doc> {
    match command {
        Command::Index => index(v, path, opts),
        Command::Compose => compose(v, path, opts),
        Command::Cocycle => cocycle(v, path, opts),
        Command::Lift => lift(v, path, opts),
        Command::BargmannOp => bargmann_op(v, path, opts),
        Command::KernelTrace => kernel_trace_cmd(v, path, opts),
        Command::Trace => trace_cmd(v, path, opts),
        Command::Lefschetz => lefschetz_cmd(v, path),
        Command::SphereModel { .. } | Command::Selftest { .. } => run_standalone(command, opts),
    }
}

pub fn run_standalone(command: &Command, _opts: &Options) -> Res<Doc> {
    match command {
        Command::SphereModel { theta, k_max } => {
            let sweep = sphere_sweep(*theta, *k_max)?;
            let lefschetz_error = sweep
                .rows
                .iter()
                .map(|r| (r.lefschetz - r.exact).norm())
                .fold(0.0, f64::max);
            let rows: Vec<Value> = sweep
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "k": r.k,
                        "exact": r.exact,
                        "formula": complex_to_json(r.formula),
                        "lefschetz": complex_to_json(r.lefschetz),
                        "diff": r.diff,
                    })
                })
                .collect();
            let table = Table {
                headers: vec!["k", "exact", "formula_re", "formula_im", "lefschetz_re", "lefschetz_im", "diff"],
                rows: sweep
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.k as f64,
                            r.exact,
                            r.formula.re,
                            r.formula.im,
                            r.lefschetz.re,
                            r.lefschetz.im,
                            r.diff,
                        ]
                    })
                    .collect(),
            };
            let body = json!({
                "theta": theta,
                "k_max": k_max,
                "rows": rows,
                "fitted_c": sweep.fitted_c,
                "lefschetz_max_error": lefschetz_error,
            });
            Ok(Doc { body: into_map(body), table: Some(table) })
        }
        Command::Selftest { seed, cases } => {
            if *cases == 0 {
                return Err(CliError::Schema("cases must be positive".into()));
            }
            let report = mpwb_core::selftest::run(*seed, *cases);
            let body = serde_json::to_value(&report).map_err(|e| CliError::Internal(e.to_string()))?;
            Ok(doc(body))
        }
        other => Err(CliError::Schema(format!("{} needs an input document", other.name()))),
    }
}
