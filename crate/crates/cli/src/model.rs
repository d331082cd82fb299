//! Line-oriented sectioned model files: context declaration, function
//! atoms, constitutive components, named vector fields, an optional
//! connection, an optional secondary-law candidate and the analysis list.

use std::collections::{BTreeMap, BTreeSet};

use jetforms_core::constitutive::{build_cr, ConstitutiveRelation, CrKind, CrSpec};
use jetforms_core::context::JetContext;
use jetforms_core::coords::{MultiIndex, VarRef};
use jetforms_core::expr::{parse_expr, Expr};
use jetforms_core::jet::VectorField;
use jetforms_core::secondary::SecondaryCandidate;
use jetforms_core::symmetry::Connection;
use jetforms_core::{Ctx, Error};

#[derive(Debug)]
pub struct ModelError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ModelError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ModelError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ModelError> {
    Err(ModelError {
        line,
        message: message.into(),
    })
}

fn core_err(line: usize, e: Error) -> ModelError {
    ModelError {
        line,
        message: e.to_string(),
    }
}

/// A fully validated model.
#[derive(Debug)]
pub struct Model {
    pub ctx: Ctx,
    pub cr: ConstitutiveRelation,
    pub vector_fields: BTreeMap<String, VectorField>,
    pub connection: Connection,
    pub secondary: Option<SecondaryCandidate>,
    pub analyses: Vec<AnalysisRequest>,
}

/// One requested analysis with optional vector-field arguments.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisRequest {
    pub name: String,
    pub args: Vec<String>,
}

impl AnalysisRequest {
    pub fn parse(text: &str) -> Result<AnalysisRequest, String> {
        let text = text.trim();
        if let Some(open) = text.find('(') {
            if !text.ends_with(')') {
                return Err(format!("malformed analysis request `{}`", text));
            }
            let name = text[..open].trim().to_string();
            let args = text[open + 1..text.len() - 1]
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            Ok(AnalysisRequest { name, args })
        } else {
            Ok(AnalysisRequest {
                name: text.to_string(),
                args: Vec::new(),
            })
        }
    }
}

pub const KNOWN_ANALYSES: &[&str] = &[
    "balance",
    "helmholtz",
    "lepage",
    "legendre",
    "symmetry",
    "noether",
    "energy-momentum",
    "gauge",
    "secondary",
    "cattaneo",
];

struct Section {
    name: String,
    entries: Vec<(usize, String)>,
}

fn split_sections(text: &str) -> Result<Vec<Section>, ModelError> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return err(line_no, "unterminated section header");
            }
            sections.push(Section {
                name: line[1..line.len() - 1].trim().to_string(),
                entries: Vec::new(),
            });
        } else {
            match sections.last_mut() {
                Some(section) => section.entries.push((line_no, line.to_string())),
                None => return err(line_no, "entry before any [section] header"),
            }
        }
    }
    Ok(sections)
}

fn key_value(line_no: usize, entry: &str) -> Result<(String, String), ModelError> {
    match entry.split_once('=') {
        Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
        None => err(line_no, format!("expected `key = value`, got `{}`", entry)),
    }
}

/// Load and validate a model file.
pub fn load_model(text: &str) -> Result<Model, ModelError> {
    let sections = split_sections(text)?;

    // ---- [context] ----
    let context_section = sections
        .iter()
        .find(|s| s.name == "context")
        .ok_or(ModelError {
            line: 0,
            message: "missing [context] section".into(),
        })?;
    let mut base_names: Vec<String> = Vec::new();
    let mut field_names: Vec<String> = Vec::new();
    let mut order = 1usize;
    let mut derivatives = String::from("all");
    let mut derivatives_line = 0usize;
    let mut metric = String::from("euclidean");
    let mut metric_line = 0usize;
    for (line_no, entry) in &context_section.entries {
        let (key, value) = key_value(*line_no, entry)?;
        match key.as_str() {
            "base" => base_names = value.split_whitespace().map(String::from).collect(),
            "fields" => field_names = value.split_whitespace().map(String::from).collect(),
            "order" => {
                order = value
                    .parse()
                    .map_err(|_| ModelError {
                        line: *line_no,
                        message: format!("bad order `{}`", value),
                    })?;
            }
            "derivatives" => {
                derivatives = value;
                derivatives_line = *line_no;
            }
            "metric" => {
                metric = value;
                metric_line = *line_no;
            }
            other => return err(*line_no, format!("unknown context key `{}`", other)),
        }
    }
    if base_names.is_empty() || field_names.is_empty() {
        return err(0, "context must declare base and fields");
    }
    let n = base_names.len();
    let m = field_names.len();

    let mut jc = match derivatives.as_str() {
        "all" => JetContext::full(n, m, order),
        "none" => {
            if order != 0 {
                return err(derivatives_line, "derivatives = none requires order = 0");
            }
            JetContext::ret(n, m)
        }
        listing => {
            // explicit whitelist: entries like z[mu,(c1,...,cn)]
            let mut p = BTreeSet::new();
            let probe = JetContext::full(n, m, order.max(1));
            for item in split_top_level(listing) {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                let parsed = parse_expr(item, &probe)
                    .map_err(|e| core_err(derivatives_line, e))?;
                let support = parsed.support();
                match support.iter().next() {
                    Some(VarRef::Jet(mu, idx)) if support.len() == 1 => {
                        p.insert((*mu, idx.clone()));
                    }
                    _ => {
                        return err(
                            derivatives_line,
                            format!("`{}` is not a jet coordinate", item),
                        )
                    }
                }
            }
            JetContext::partial(n, m, order, p)
                .map_err(|e| core_err(derivatives_line, e))?
        }
    };
    {
        let base_refs: Vec<&str> = base_names.iter().map(String::as_str).collect();
        let field_refs: Vec<&str> = field_names.iter().map(String::as_str).collect();
        jc = jc.with_names(&base_refs, &field_refs);
    }

    // ---- [functions] ----
    if let Some(section) = sections.iter().find(|s| s.name == "functions") {
        for (line_no, entry) in &section.entries {
            // name(dep, dep, ...)
            let open = entry.find('(').ok_or(ModelError {
                line: *line_no,
                message: format!("expected `name(deps)`, got `{}`", entry),
            })?;
            if !entry.ends_with(')') {
                return err(*line_no, "unterminated dependency list");
            }
            let name = entry[..open].trim().to_string();
            let mut args: Vec<VarRef> = Vec::new();
            for dep in entry[open + 1..entry.len() - 1].split(',') {
                let dep = dep.trim();
                if dep.is_empty() {
                    continue;
                }
                match dep {
                    "x" => args.extend((0..n).map(VarRef::Base)),
                    "y" => args.extend((0..m).map(VarRef::Field)),
                    "z" => {
                        args.extend(
                            jc.admitted_jets()
                                .map(|(mu, idx)| VarRef::Jet(*mu, idx.clone()))
                                .collect::<Vec<_>>(),
                        );
                    }
                    named => match jc.lookup_name(named) {
                        Some(v) => args.push(v),
                        None => {
                            return err(*line_no, format!("unknown dependency `{}`", named))
                        }
                    },
                }
            }
            jc = jc.declare_func(&name, args);
        }
    }

    // metric may reference coordinate names, so parse it against the
    // finished name table
    if metric != "euclidean" {
        let probe = jc.clone().into_ctx();
        let g = parse_expr(&metric, &probe).map_err(|e| core_err(metric_line, e))?;
        jc = jc
            .with_metric_density(g)
            .map_err(|e| core_err(metric_line, e))?;
    }
    let ctx = jc.into_ctx();

    // ---- [cr] ----
    let cr_section = sections.iter().find(|s| s.name == "cr").ok_or(ModelError {
        line: 0,
        message: "missing [cr] section".into(),
    })?;
    let mut kind = String::from("generic");
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    for (line_no, entry) in &cr_section.entries {
        let (key, value) = key_value(*line_no, entry)?;
        if key == "kind" {
            kind = value;
        } else {
            entries.push((*line_no, key, value));
        }
    }
    let parse = |line_no: usize, text: &str| -> Result<Expr, ModelError> {
        parse_expr(text, &ctx).map_err(|e| core_err(line_no, e))
    };
    let mut flux = vec![vec![Expr::zero(); m]; n];
    let mut source = vec![Expr::zero(); m];
    let mut density: Option<Expr> = None;
    let mut lagrangian: Option<Expr> = None;
    let mut dissipation: Option<Expr> = None;
    let mut densities_f0: Vec<Option<Expr>> = vec![None; m];
    let mut potential: Vec<Option<Expr>> = vec![None; n];
    let mut lift_flag = false;
    let index_pair = |line_no: usize, key: &str, name: &str| -> Result<(usize, usize), ModelError> {
        let inner = key
            .strip_prefix(&format!("{}[", name))
            .and_then(|s| s.strip_suffix(']'))
            .ok_or(ModelError {
                line: line_no,
                message: format!("expected `{}[i,mu]`", name),
            })?;
        let (i, mu) = inner.split_once(',').ok_or(ModelError {
            line: line_no,
            message: format!("expected `{}[i,mu]`", name),
        })?;
        let parse_idx = |s: &str, max: usize| -> Result<usize, ModelError> {
            let v: usize = s.trim().parse().map_err(|_| ModelError {
                line: line_no,
                message: format!("bad index `{}`", s),
            })?;
            if v == 0 || v > max {
                return err(line_no, format!("index {} out of range 1..{}", v, max));
            }
            Ok(v - 1)
        };
        Ok((parse_idx(i, n)?, parse_idx(mu, m)?))
    };
    let single_index = |line_no: usize, key: &str, name: &str, max: usize| -> Result<usize, ModelError> {
        let inner = key
            .strip_prefix(&format!("{}[", name))
            .and_then(|s| s.strip_suffix(']'))
            .ok_or(ModelError {
                line: line_no,
                message: format!("expected `{}[k]`", name),
            })?;
        let v: usize = inner.trim().parse().map_err(|_| ModelError {
            line: line_no,
            message: format!("bad index `{}`", inner),
        })?;
        if v == 0 || v > max {
            return err(line_no, format!("index {} out of range 1..{}", v, max));
        }
        Ok(v - 1)
    };
    for (line_no, key, value) in &entries {
        match key.as_str() {
            "L" => lagrangian = Some(parse(*line_no, value)?),
            "D" => dissipation = Some(parse(*line_no, value)?),
            "p" => density = Some(parse(*line_no, value)?),
            "lift" => lift_flag = value == "true",
            k if k.starts_with("F0[") => {
                let mu = single_index(*line_no, k, "F0", m)?;
                densities_f0[mu] = Some(parse(*line_no, value)?);
            }
            k if k.starts_with("F[") => {
                let (i, mu) = index_pair(*line_no, k, "F")?;
                flux[i][mu] = parse(*line_no, value)?;
            }
            k if k.starts_with("Pi[") => {
                let mu = single_index(*line_no, k, "Pi", m)?;
                source[mu] = parse(*line_no, value)?;
            }
            k if k.starts_with("h[") => {
                let i = single_index(*line_no, k, "h", n)?;
                potential[i] = Some(parse(*line_no, value)?);
            }
            other => return err(*line_no, format!("unknown cr key `{}`", other)),
        }
    }
    let cr = match kind.as_str() {
        "generic" => ConstitutiveRelation::new(&ctx, flux, source, density, CrKind::Generic)
            .map_err(|e| core_err(0, e))?,
        "lagrangian" => {
            let l = lagrangian.ok_or(ModelError {
                line: 0,
                message: "lagrangian kind needs `L = ...`".into(),
            })?;
            build_cr(CrSpec::Lagrangian(l), &ctx).map_err(|e| core_err(0, e))?
        }
        "semi-lagrangian" => {
            let l = lagrangian.ok_or(ModelError {
                line: 0,
                message: "semi-lagrangian kind needs `L = ...`".into(),
            })?;
            build_cr(CrSpec::SemiLagrangian { lagrangian: l, source }, &ctx)
                .map_err(|e| core_err(0, e))?
        }
        "lagrangian-dissipative" => {
            let l = lagrangian.ok_or(ModelError {
                line: 0,
                message: "lagrangian-dissipative kind needs `L = ...`".into(),
            })?;
            let d = dissipation.ok_or(ModelError {
                line: 0,
                message: "lagrangian-dissipative kind needs `D = ...`".into(),
            })?;
            build_cr(
                CrSpec::LagrangianDissipative {
                    lagrangian: l,
                    dissipation: d,
                },
                &ctx,
            )
            .map_err(|e| core_err(0, e))?
        }
        "spatial-lagrangian" => {
            let l = lagrangian.ok_or(ModelError {
                line: 0,
                message: "spatial-lagrangian kind needs `L = ...`".into(),
            })?;
            let densities: Vec<Expr> = densities_f0
                .into_iter()
                .map(|d| d.unwrap_or_else(Expr::zero))
                .collect();
            build_cr(
                CrSpec::SpatialLagrangian {
                    lagrangian: l,
                    densities,
                },
                &ctx,
            )
            .map_err(|e| core_err(0, e))?
        }
        "vector-potential" => {
            let h: Vec<Expr> = potential
                .into_iter()
                .map(|p| p.unwrap_or_else(Expr::zero))
                .collect();
            build_cr(CrSpec::VectorPotential { h, source }, &ctx)
                .map_err(|e| core_err(0, e))?
        }
        other => return err(0, format!("unknown cr kind `{}`", other)),
    };
    let cr = if lift_flag { cr.lift() } else { cr };

    // ---- [vectorfields] ----
    let mut vector_fields = BTreeMap::new();
    if let Some(section) = sections.iter().find(|s| s.name == "vectorfields") {
        for (line_no, entry) in &section.entries {
            let (name, value) = key_value(*line_no, entry)?;
            let inner = value
                .strip_prefix('{')
                .and_then(|s| s.strip_suffix('}'))
                .ok_or(ModelError {
                    line: *line_no,
                    message: "vector field syntax: name = { coord: expr, ... }".into(),
                })?;
            let mut field = VectorField::new(&ctx);
            for part in split_top_level(inner) {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                let (coord, expr_text) = part.split_once(':').ok_or(ModelError {
                    line: *line_no,
                    message: format!("expected `coord: expr` in `{}`", part),
                })?;
                let coeff = parse(*line_no, expr_text.trim())?;
                let coord = coord.trim();
                match ctx.lookup_name(coord) {
                    Some(VarRef::Base(i)) => field.base[i] = coeff,
                    Some(VarRef::Field(mu)) => field.fiber[mu] = coeff,
                    _ => {
                        // jet slot in z[mu,(...)] syntax
                        let probe = parse(*line_no, coord)?;
                        match probe.support().iter().next() {
                            Some(VarRef::Jet(mu, idx)) => {
                                field.jet.insert((*mu, idx.clone()), coeff);
                            }
                            _ => {
                                return err(
                                    *line_no,
                                    format!("unknown coordinate `{}`", coord),
                                )
                            }
                        }
                    }
                }
            }
            vector_fields.insert(name, field);
        }
    }

    // ---- [connection] ----
    let mut connection = Connection::zero(&ctx);
    if let Some(section) = sections.iter().find(|s| s.name == "connection") {
        for (line_no, entry) in &section.entries {
            let (key, value) = key_value(*line_no, entry)?;
            let (i, mu) = index_pair(*line_no, &key, "Gamma")?;
            connection.gamma[i][mu] = parse(*line_no, &value)?;
        }
    }

    // ---- [secondary] ----
    let mut secondary = None;
    if let Some(section) = sections.iter().find(|s| s.name == "secondary") {
        let mut flux = vec![Expr::zero(); n];
        let mut src = Expr::zero();
        let mut multipliers = vec![Expr::zero(); m];
        for (line_no, entry) in &section.entries {
            let (key, value) = key_value(*line_no, entry)?;
            match key.as_str() {
                "Q" => src = parse(*line_no, &value)?,
                k if k.starts_with("K[") => {
                    let i = single_index(*line_no, k, "K", n)?;
                    flux[i] = parse(*line_no, &value)?;
                }
                k if k.starts_with("lambda[") => {
                    let mu = single_index(*line_no, k, "lambda", m)?;
                    multipliers[mu] = parse(*line_no, &value)?;
                }
                other => return err(*line_no, format!("unknown secondary key `{}`", other)),
            }
        }
        secondary = Some(SecondaryCandidate {
            flux,
            source: src,
            multipliers,
        });
    }

    // ---- [analyses] ----
    let mut analyses = Vec::new();
    if let Some(section) = sections.iter().find(|s| s.name == "analyses") {
        for (line_no, entry) in &section.entries {
            let (key, value) = key_value(*line_no, entry)?;
            if key != "run" {
                return err(*line_no, format!("unknown analyses key `{}`", key));
            }
            for item in split_top_level(&value) {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                let request = AnalysisRequest::parse(item)
                    .map_err(|message| ModelError {
                        line: *line_no,
                        message,
                    })?;
                if !KNOWN_ANALYSES.contains(&request.name.as_str()) {
                    return err(*line_no, format!("unknown analysis `{}`", request.name));
                }
                for arg in &request.args {
                    if !vector_fields.contains_key(arg) {
                        return err(
                            *line_no,
                            format!("analysis `{}` names unknown vector field `{}`",
                                request.name, arg),
                        );
                    }
                }
                analyses.push(request);
            }
        }
    }

    Ok(Model {
        ctx,
        cr,
        vector_fields,
        connection,
        secondary,
        analyses,
    })
}

/// Split on commas that sit outside any bracket pair.
fn split_top_level(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for ch in text.chars() {
        match ch {
            '(' | '[' | '{' => {
                depth += 1;
                current.push(ch);
            }
            ')' | ']' | '}' => {
                depth -= 1;
                current.push(ch);
            }
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut current));
            }
            _ => current.push(ch),
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// Expand the multi-index shorthand used in docs/tests (kept public for the
/// format documentation tests).
pub fn jet_multi_index(n: usize, dir: usize) -> MultiIndex {
    MultiIndex::unit(n, dir)
}
