//! Canonical on-disk formats. Encoders emit deterministic JSON with
//! alphabetically ordered keys, one top-level key per line, so equal
//! objects produce byte-identical files. Decoders distinguish malformed
//! input (parse and schema errors, with positions and field paths) from
//! well-formed input that fails mathematical validation.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::Value;

use twinbuildings::building::{validate_building, BuildingSpace, Chamber};
use twinbuildings::coxeter::{build_group, CoxeterMatrix, Gen};
use twinbuildings::twin::{spherical_double, validate_twin, Sign, SignedChamber, TwinSpace};

/// Malformed input: either not JSON at all, or JSON of the wrong shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormatError {
    Parse {
        line: usize,
        column: usize,
        detail: String,
    },
    Schema {
        path: String,
        detail: String,
    },
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::Parse {
                line,
                column,
                detail,
            } => write!(f, "parse error at line {line}, column {column}: {detail}"),
            FormatError::Schema { path, detail } => {
                write!(f, "schema error at {path}: {detail}")
            }
        }
    }
}

impl std::error::Error for FormatError {}

/// Well-formed input that fails a mathematical check; the message carries
/// the witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentError(pub String);

impl fmt::Display for ContentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "content error: {}", self.0)
    }
}

impl std::error::Error for ContentError {}

/// Either decoder failure class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeError {
    Format(FormatError),
    Content(ContentError),
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeError::Format(e) => e.fmt(f),
            DecodeError::Content(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for DecodeError {}

impl From<FormatError> for DecodeError {
    fn from(e: FormatError) -> Self {
        DecodeError::Format(e)
    }
}

impl From<ContentError> for DecodeError {
    fn from(e: ContentError) -> Self {
        DecodeError::Content(e)
    }
}

fn schema(path: &str, detail: impl Into<String>) -> FormatError {
    FormatError::Schema {
        path: path.to_string(),
        detail: detail.into(),
    }
}

fn content(detail: impl fmt::Display) -> DecodeError {
    DecodeError::Content(ContentError(detail.to_string()))
}

// ---------------------------------------------------------------------
// Shared JSON helpers
// ---------------------------------------------------------------------

fn parse_json(text: &str) -> Result<Value, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::Parse {
        line: e.line(),
        column: e.column(),
        detail: e.to_string(),
    })
}

fn as_object<'v>(
    v: &'v Value,
    path: &str,
) -> Result<&'v serde_json::Map<String, Value>, FormatError> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn as_array<'v>(v: &'v Value, path: &str) -> Result<&'v Vec<Value>, FormatError> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize, FormatError> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| schema(path, "expected a non-negative integer"))
}

fn field<'v>(
    obj: &'v serde_json::Map<String, Value>,
    key: &str,
    path: &str,
) -> Result<&'v Value, FormatError> {
    obj.get(key)
        .ok_or_else(|| schema(path, format!("missing required field \"{key}\"")))
}

fn reject_unknown_keys(
    obj: &serde_json::Map<String, Value>,
    allowed: &[&str],
    path: &str,
) -> Result<(), FormatError> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(schema(path, format!("unknown field \"{key}\"")));
        }
    }
    Ok(())
}

fn int_list(v: &Value, path: &str) -> Result<Vec<usize>, FormatError> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| as_usize(x, &format!("{path}[{i}]")))
        .collect()
}

// ---------------------------------------------------------------------
// Building files
// ---------------------------------------------------------------------

/// Renders a building as canonical JSON: chamber count, the type matrix
/// row-major with 0 standing for an unbounded entry, and the panel
/// partition of each generator keyed by its index.
pub fn encode_building(b: &BuildingSpace) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!("\"chambers\": {},\n", b.n_chambers()));
    out.push_str(&format!(
        "\"coxeter\": {},\n",
        matrix_json(b.group().matrix())
    ));
    out.push_str("\"panels\": {");
    for s in 0..b.group().rank() {
        if s > 0 {
            out.push(',');
        }
        out.push_str(&format!("\n\"{s}\": ["));
        let classes = b.panels(Gen(s as u16));
        for (k, class) in classes.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let ids: Vec<String> = class.iter().map(|c| c.0.to_string()).collect();
            out.push_str(&format!("[{}]", ids.join(",")));
        }
        out.push(']');
    }
    out.push_str("\n}\n}\n");
    out
}

fn matrix_json(m: &CoxeterMatrix) -> String {
    let rows: Vec<String> = m
        .rows()
        .iter()
        .map(|row| {
            let entries: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            format!("[{}]", entries.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

fn matrix_from_json(v: &Value, path: &str) -> Result<Vec<Vec<u32>>, FormatError> {
    let rows = as_array(v, path)?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let row_path = format!("{path}[{i}]");
            Ok(int_list(row, &row_path)?
                .into_iter()
                .map(|e| e as u32)
                .collect())
        })
        .collect()
}

/// Parses, shape-checks, and validates a building file. Shape problems are
/// format errors; axiom failures are content errors carrying the witness.
pub fn decode_building(text: &str) -> Result<BuildingSpace, DecodeError> {
    let value = parse_json(text)?;
    building_from_value(&value, "")
}

fn building_from_value(value: &Value, prefix: &str) -> Result<BuildingSpace, DecodeError> {
    let at = |key: &str| -> String {
        match (prefix.is_empty(), key.is_empty()) {
            (true, true) => "$".to_string(),
            (true, false) => key.to_string(),
            (false, true) => prefix.to_string(),
            (false, false) => format!("{prefix}.{key}"),
        }
    };
    let root = as_object(value, if prefix.is_empty() { "$" } else { prefix })?;
    reject_unknown_keys(root, &["chambers", "coxeter", "panels"], &at(""))?;
    let n = as_usize(field(root, "chambers", &at(""))?, &at("chambers"))?;
    let rows = matrix_from_json(field(root, "coxeter", &at(""))?, &at("coxeter"))?;
    let rank = rows.len();
    let matrix = CoxeterMatrix::new(rows).map_err(content)?;
    let group = Arc::new(build_group(matrix, 100_000).map_err(content)?);

    let panels_val = as_object(field(root, "panels", &at(""))?, &at("panels"))?;
    let mut panels: Vec<Vec<Vec<Chamber>>> = vec![Vec::new(); rank];
    for (key, classes_val) in panels_val {
        let gen_path = format!("{}.{key}", at("panels"));
        let s: usize = key
            .parse()
            .map_err(|_| schema(&gen_path, "keys must be generator indices"))?;
        if s >= rank {
            return Err(schema(&gen_path, "generator index out of range").into());
        }
        let classes = as_array(classes_val, &gen_path)?;
        for (k, class_val) in classes.iter().enumerate() {
            let class_path = format!("{gen_path}[{k}]");
            let ids = int_list(class_val, &class_path)?;
            panels[s].push(ids.into_iter().map(|i| Chamber(i as u32)).collect());
        }
    }
    for (s, classes) in panels.iter().enumerate() {
        if classes.is_empty() && n > 0 {
            return Err(schema(
                &format!("{}.{s}", at("panels")),
                "missing panel classes for this generator",
            )
            .into());
        }
    }
    validate_building(group, n, &panels).map_err(content)
}

// ---------------------------------------------------------------------
// Twin files
// ---------------------------------------------------------------------

/// Renders a twin as canonical JSON. The opposition data is always the
/// explicit row-major table of reduced words (plus chamber major), so a
/// file fixes the twin independently of how it was constructed.
pub fn encode_twin(t: &TwinSpace) -> String {
    let g = t.group();
    let np = t.building(Sign::Plus).n_chambers();
    let nm = t.building(Sign::Minus).n_chambers();
    let table = t.costar_plus_minus();
    let mut rows = Vec::with_capacity(np);
    for x in 0..np {
        let mut entries = Vec::with_capacity(nm);
        for y in 0..nm {
            let e = twinbuildings::coxeter::Elem(table[x * nm + y]);
            let word: Vec<String> = g.word(e).iter().map(|s| s.index().to_string()).collect();
            entries.push(format!("[{}]", word.join(",")));
        }
        rows.push(format!("[{}]", entries.join(",")));
    }
    let mut out = String::from("{\n");
    out.push_str(&format!(
        "\"costar\": {{\"table\": [{}]}},\n",
        rows.join(",")
    ));
    out.push_str(&format!(
        "\"minus\": {},\n",
        inline_object(&encode_building(t.building(Sign::Minus)))
    ));
    out.push_str(&format!(
        "\"plus\": {}\n",
        inline_object(&encode_building(t.building(Sign::Plus)))
    ));
    out.push_str("}\n");
    out
}

/// Re-renders a canonical building file as a single-line object so it can
/// be nested inside a twin file.
fn inline_object(building_json: &str) -> String {
    building_json
        .lines()
        .map(str::trim)
        .collect::<Vec<_>>()
        .join(" ")
        .trim()
        .to_string()
}

/// Parses, shape-checks, and validates a twin file. The opposition data is
/// either the explicit word table or `{"rule": "spherical-double"}`, which
/// recomputes the double of the plus half and requires the stored minus
/// half to match it.
pub fn decode_twin(text: &str) -> Result<TwinSpace, DecodeError> {
    let value = parse_json(text)?;
    let root = as_object(&value, "$")?;
    reject_unknown_keys(root, &["costar", "minus", "plus"], "$")?;
    let plus = Arc::new(building_from_value(field(root, "plus", "$")?, "plus")?);
    let minus = Arc::new(building_from_value(field(root, "minus", "$")?, "minus")?);

    let costar = as_object(field(root, "costar", "$")?, "costar")?;
    if let Some(rule) = costar.get("rule") {
        reject_unknown_keys(costar, &["rule"], "costar")?;
        let name = rule
            .as_str()
            .ok_or_else(|| schema("costar.rule", "expected a string"))?;
        if name != "spherical-double" {
            return Err(schema("costar.rule", format!("unknown rule \"{name}\"")).into());
        }
        let twin = spherical_double(plus).map_err(content)?;
        if encode_building(twin.building(Sign::Minus)) != encode_building(&minus) {
            return Err(content(
                "the stored minus half does not match the double of the plus half",
            ));
        }
        return Ok(twin);
    }

    reject_unknown_keys(costar, &["table"], "costar")?;
    let table
        = as_array(field(costar, "table", "costar")?, "costar.table")?;
    let np = plus.n_chambers();
    let nm = minus.n_chambers();
    if table.len() != np {
        return Err(schema(
            "costar.table",
            format!("expected {np} rows, found {}", table.len()),
        )
        .into());
    }
    if plus.group().matrix() != minus.group().matrix() {
        return Err(content("the two halves have different type matrices"));
    }
    let g = plus.group();
    let rank = g.rank();
    let mut pm = vec![0u32; np * nm];
    let mut mp = vec![0u32; nm * np];
    for (x, row_val) in table.iter().enumerate() {
        let row_path = format!("costar.table[{x}]");
        let row = as_array(row_val, &row_path)?;
        if row.len() != nm {
            return Err(schema(
                &row_path,
                format!("expected {nm} entries, found {}", row.len()),
            )
            .into());
        }
        for (y, word_val) in row.iter().enumerate() {
            let word_path = format!("{row_path}[{y}]");
            let word = int_list(word_val, &word_path)?;
            let mut e = twinbuildings::coxeter::Elem::IDENTITY;
            for s in word {
                if s >= rank {
                    return Err(schema(&word_path, "generator index out of range").into());
                }
                e = g.right_mul(e, Gen(s as u16));
            }
            pm[x * nm + y] = e.0;
            mp[y * np + x] = g.inv(e).0;
        }
    }
    validate_twin(plus, minus, pm, mp).map_err(content)
}

// ---------------------------------------------------------------------
// Isometry files
// ---------------------------------------------------------------------

fn sign_str(sign: Sign) -> &'static str {
    match sign {
        Sign::Plus => "+",
        Sign::Minus => "-",
    }
}

fn sign_from_str(s: &str, path: &str) -> Result<Sign, FormatError> {
    match s {
        "+" => Ok(Sign::Plus),
        "-" => Ok(Sign::Minus),
        other => Err(schema(path, format!("expected \"+\" or \"-\", found \"{other}\""))),
    }
}

/// Renders a list of signed chamber pairs, sorted by domain chamber, one
/// pair per line.
pub fn encode_isometry(pairs: &[(SignedChamber, SignedChamber)]) -> String {
    let sorted: BTreeMap<SignedChamber, SignedChamber> = pairs.iter().copied().collect();
    let mut out = String::from("{\n\"pairs\": [");
    for (i, (a, b)) in sorted.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!(
            "\n[\"{}\",{},\"{}\",{}]",
            sign_str(a.sign),
            a.ch.0,
            sign_str(b.sign),
            b.ch.0
        ));
    }
    out.push_str("\n]\n}\n");
    out
}

/// Parses and shape-checks an isometry file; whether the pairs actually
/// form an isometry of particular twins is checked separately.
pub fn decode_isometry(text: &str) -> Result<Vec<(SignedChamber, SignedChamber)>, FormatError> {
    let value = parse_json(text)?;
    let root = as_object(&value, "$")?;
    reject_unknown_keys(root, &["pairs"], "$")?;
    let list = as_array(field(root, "pairs", "$")?, "pairs")?;
    let mut pairs = Vec::with_capacity(list.len());
    for (i, entry) in list.iter().enumerate() {
        let path = format!("pairs[{i}]");
        let quad = as_array(entry, &path)?;
        if quad.len() != 4 {
            return Err(schema(&path, "expected [sign, id, sign, id]"));
        }
        let s0 = quad[0]
            .as_str()
            .ok_or_else(|| schema(&format!("{path}[0]"), "expected a sign string"))?;
        let s1 = quad[2]
            .as_str()
            .ok_or_else(|| schema(&format!("{path}[2]"), "expected a sign string"))?;
        let a = SignedChamber::new(
            sign_from_str(s0, &format!("{path}[0]"))?,
            Chamber(as_usize(&quad[1], &format!("{path}[1]"))? as u32),
        );
        let b = SignedChamber::new(
            sign_from_str(s1, &format!("{path}[2]"))?,
            Chamber(as_usize(&quad[3], &format!("{path}[3]"))? as u32),
        );
        pairs.push((a, b));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{generate_building, CatalogId};

    fn fano_twin() -> TwinSpace {
        let plus = Arc::new(generate_building(&CatalogId::Fano));
        spherical_double(plus).unwrap()
    }

    #[test]
    fn building_files_round_trip_byte_for_byte() {
        for id in ["rank1(3)", "fano", "prod(rank1(3),rank1(3),rank1(3))"] {
            let id: CatalogId = id.parse().unwrap();
            let b = generate_building(&id);
            let text = encode_building(&b);
            let back = decode_building(&text).unwrap();
            assert_eq!(encode_building(&back), text);
        }
    }

    #[test]
    fn twin_files_round_trip_byte_for_byte() {
        let t = fano_twin();
        let text = encode_twin(&t);
        let back = decode_twin(&text).unwrap();
        assert_eq!(encode_twin(&back), text);
        // The explicit table reproduces the same opposition data.
        assert_eq!(back.costar_plus_minus(), t.costar_plus_minus());
    }

    #[test]
    fn the_double_rule_is_accepted_when_the_minus_half_matches() {
        let t = fano_twin();
        let plus = encode_building(t.building(Sign::Plus));
        let minus = encode_building(t.building(Sign::Minus));
        let text = format!(
            "{{\"plus\": {}, \"minus\": {}, \"costar\": {{\"rule\": \"spherical-double\"}}}}",
            inline_object(&plus),
            inline_object(&minus)
        );
        let back = decode_twin(&text).unwrap();
        assert_eq!(encode_twin(&back), encode_twin(&t));
        // A mismatched minus half is rejected as content, not schema.
        let wrong = format!(
            "{{\"plus\": {}, \"minus\": {}, \"costar\": {{\"rule\": \"spherical-double\"}}}}",
            inline_object(&plus),
            inline_object(&plus)
        );
        match decode_twin(&wrong) {
            Err(DecodeError::Content(_)) => {}
            other => panic!("expected a content error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_inputs_carry_positions_and_paths() {
        match decode_building("{\"chambers\": 3,") {
            Err(DecodeError::Format(FormatError::Parse { line, column, .. })) => {
                assert_eq!(line, 1);
                assert!(column > 0);
            }
            other => panic!("expected a parse error, got {other:?}"),
        }
        match decode_building("{\"chambers\": 3, \"coxeter\": [[1]]}") {
            Err(DecodeError::Format(FormatError::Schema { path, detail })) => {
                assert_eq!(path, "$");
                assert!(detail.contains("panels"));
            }
            other => panic!("expected a schema error, got {other:?}"),
        }
        match decode_building("{\"chambers\": 3, \"coxeter\": [[1]], \"panels\": {\"7\": []}}") {
            Err(DecodeError::Format(FormatError::Schema { path, .. })) => {
                assert_eq!(path, "panels.7");
            }
            other => panic!("expected a schema error, got {other:?}"),
        }
    }

    #[test]
    fn axiom_violations_in_well_formed_files_are_content_errors() {
        // A two-chamber panel class is thin but still a valid partition;
        // dropping a chamber from one class of rank1(3) leaves a singleton,
        // which violates the panel axioms.
        let text = "{\"chambers\": 3, \"coxeter\": [[1]], \"panels\": {\"0\": [[0,1],[2]]}}";
        match decode_building(text) {
            Err(DecodeError::Content(ContentError(msg))) => {
                assert!(!msg.is_empty());
            }
            other => panic!("expected a content error, got {other:?}"),
        }
    }

    #[test]
    fn isometry_files_round_trip_and_sort_by_domain() {
        let pairs = vec![
            (SignedChamber::minus(Chamber(2)), SignedChamber::minus(Chamber(0))),
            (SignedChamber::plus(Chamber(5)), SignedChamber::plus(Chamber(1))),
            (SignedChamber::plus(Chamber(0)), SignedChamber::plus(Chamber(4))),
        ];
        let text = encode_isometry(&pairs);
        let back = decode_isometry(&text).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back[0].0, SignedChamber::plus(Chamber(0)));
        assert_eq!(encode_isometry(&back), text);
        assert!(decode_isometry("{\"pairs\": [[\"?\",0,\"+\",1]]}").is_err());
    }
}
