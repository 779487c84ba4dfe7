//! JSON file formats: posets, frames, polynomials, and theories.
//!
//! Loaders validate semantically and report the JSON pointer of the
//! offending value. The poset loader closes `leq` under reflexivity and
//! transitivity, warning when closure added pairs; `prec` is taken verbatim
//! so that invalid candidates can still be loaded and reported on.

use serde::Deserialize;
use thiserror::Error;

use crate::frame::{downset_frame, BasedFrame, FiniteFrame};
use crate::order::{FinitePoset, FinitePreorder, Relation, WfRelation};
use crate::theory::{Formula, GeometricTheory, Sequent};
use crate::wtypes::{Polynomial, Shape};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("invalid JSON: {0}")]
    Syntax(String),
    #[error("at {path}: {msg}")]
    Invalid { path: String, msg: String },
}

impl LoadError {
    fn at(path: impl Into<String>, msg: impl Into<String>) -> Self {
        LoadError::Invalid { path: path.into(), msg: msg.into() }
    }

    /// JSON pointer of the offending value, when known.
    pub fn path(&self) -> Option<&str> {
        match self {
            LoadError::Syntax(_) => None,
            LoadError::Invalid { path, .. } => Some(path),
        }
    }
}

/// A loaded value together with loader warnings.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

impl<T> Loaded<T> {
    fn plain(value: T) -> Self {
        Loaded { value, warnings: Vec::new() }
    }
}

fn parse<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T, LoadError> {
    serde_json::from_str(s).map_err(|e| LoadError::Syntax(e.to_string()))
}

// ---------------------------------------------------------------------------
// Posets
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct PosetDoc {
    elements: Vec<String>,
    #[serde(default)]
    leq: Vec<(String, String)>,
    #[serde(default)]
    prec: Vec<(String, String)>,
}

fn relation_from_named_pairs(
    names: &[String],
    pairs: &[(String, String)],
    path: &str,
) -> Result<Relation, LoadError> {
    let mut r = Relation::empty(names.len())
        .map_err(|e| LoadError::at("/elements", e.to_string()))?;
    for (i, (a, b)) in pairs.iter().enumerate() {
        let u = names
            .iter()
            .position(|n| n == a)
            .ok_or_else(|| LoadError::at(format!("{path}/{i}/0"), format!("unknown element {a:?}")))?;
        let v = names
            .iter()
            .position(|n| n == b)
            .ok_or_else(|| LoadError::at(format!("{path}/{i}/1"), format!("unknown element {b:?}")))?;
        r.insert(u, v);
    }
    Ok(r)
}

/// Load a poset document: `{"elements": [..], "leq": [[u,v],..], "prec": [[u,v],..]}`.
///
/// `leq` is closed under reflexivity and transitivity (with a warning when
/// pairs were added); `prec` is kept as written.
pub fn poset_from_str(s: &str) -> Result<Loaded<WfRelation>, LoadError> {
    let doc: PosetDoc = parse(s)?;
    for (i, name) in doc.elements.iter().enumerate() {
        if doc.elements[..i].contains(name) {
            return Err(LoadError::at(format!("/elements/{i}"), format!("duplicate element {name:?}")));
        }
    }
    let raw = relation_from_named_pairs(&doc.elements, &doc.leq, "/leq")?;
    let (leq, grew) = raw.reflexive_transitive_closure();
    let mut warnings = Vec::new();
    if grew {
        warnings.push("leq was not reflexively and transitively closed; closure added pairs".into());
    }
    let prec = relation_from_named_pairs(&doc.elements, &doc.prec, "/prec")?;
    let base = FinitePreorder::new(doc.elements, leq)
        .map_err(|e| LoadError::at("/leq", e.to_string()))?;
    let value = WfRelation::new(base, prec).expect("arity matches by construction");
    Ok(Loaded { value, warnings })
}

/// As [`poset_from_str`], additionally requiring antisymmetry.
pub fn poset_from_str_strict(s: &str) -> Result<Loaded<(FinitePoset, Relation)>, LoadError> {
    let loaded = poset_from_str(s)?;
    let prec = loaded.value.prec().clone();
    let poset = loaded
        .value
        .poset()
        .map_err(|e| LoadError::at("/leq", e.to_string()))?;
    Ok(Loaded { value: (poset, prec), warnings: loaded.warnings })
}

/// Serialize a poset with its strict relation in the poset file format.
pub fn poset_to_json(names: &[String], leq: &Relation, prec: &Relation) -> serde_json::Value {
    let pairs = |r: &Relation| -> Vec<Vec<String>> {
        r.pairs()
            .into_iter()
            .map(|(u, v)| vec![names[u].clone(), names[v].clone()])
            .collect()
    };
    serde_json::json!({
        "elements": names,
        "leq": pairs(leq),
        "prec": pairs(prec),
    })
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(untagged)]
enum FrameDoc {
    Downsets { downsets_of: PosetDocValue },
    Explicit {
        opens: Vec<String>,
        leq: Vec<(String, String)>,
        basis: Vec<String>,
        #[serde(default)]
        basis_prec: Vec<(String, String)>,
    },
}

#[derive(Deserialize)]
struct PosetDocValue(serde_json::Value);

/// Load a frame: either `{"downsets_of": <poset document>}` or an explicit
/// `{"opens", "leq", "basis", "basis_prec"}` presentation.
pub fn frame_from_str(s: &str) -> Result<Loaded<BasedFrame>, LoadError> {
    let doc: FrameDoc = parse(s)?;
    match doc {
        FrameDoc::Downsets { downsets_of } => {
            let inner = serde_json::to_string(&downsets_of.0).expect("reserialize");
            let loaded = poset_from_str(&inner).map_err(|e| match e {
                LoadError::Syntax(m) => LoadError::Syntax(m),
                LoadError::Invalid { path, msg } => {
                    LoadError::at(format!("/downsets_of{path}"), msg)
                }
            })?;
            let prec = loaded.value.prec().clone();
            let poset = loaded
                .value
                .poset()
                .map_err(|e| LoadError::at("/downsets_of/leq", e.to_string()))?;
            let frame = downset_frame(&poset, &prec)
                .map_err(|e| LoadError::at("/downsets_of", e.to_string()))?;
            Ok(Loaded { value: frame, warnings: loaded.warnings })
        }
        FrameDoc::Explicit { opens, leq, basis, basis_prec } => {
            for (i, name) in opens.iter().enumerate() {
                if opens[..i].contains(name) {
                    return Err(LoadError::at(format!("/opens/{i}"), format!("duplicate open {name:?}")));
                }
            }
            let raw = relation_from_named_pairs(&opens, &leq, "/leq")?;
            let (closed, _) = raw.reflexive_transitive_closure();
            let frame = FiniteFrame::new(opens.clone(), closed)
                .map_err(|e| LoadError::at("/leq", e.to_string()))?;
            let basis_ids: Vec<usize> = basis
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    opens
                        .iter()
                        .position(|n| n == b)
                        .ok_or_else(|| LoadError::at(format!("/basis/{i}"), format!("unknown open {b:?}")))
                })
                .collect::<Result<_, _>>()?;
            let mut prec = Relation::empty(basis_ids.len())
                .map_err(|e| LoadError::at("/basis", e.to_string()))?;
            for (i, (a, b)) in basis_prec.iter().enumerate() {
                let u = basis
                    .iter()
                    .position(|n| n == a)
                    .ok_or_else(|| LoadError::at(format!("/basis_prec/{i}/0"), format!("{a:?} is not a basis open")))?;
                let v = basis
                    .iter()
                    .position(|n| n == b)
                    .ok_or_else(|| LoadError::at(format!("/basis_prec/{i}/1"), format!("{b:?} is not a basis open")))?;
                prec.insert(u, v);
            }
            let based = BasedFrame::new(frame, basis_ids, prec)
                .map_err(|e| LoadError::at("/basis", e.to_string()))?;
            Ok(Loaded::plain(based))
        }
    }
}

// ---------------------------------------------------------------------------
// Polynomials
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct PolyDoc {
    shapes: Vec<ShapeDoc>,
}

#[derive(Deserialize)]
struct ShapeDoc {
    name: String,
    fiber_size: usize,
}

/// Load `{"shapes": [{"name": .., "fiber_size": n}, ..]}`; warns when no
/// shape has an empty fiber (no finite trees exist then).
pub fn polynomial_from_str(s: &str) -> Result<Loaded<Polynomial>, LoadError> {
    let doc: PolyDoc = parse(s)?;
    let shapes: Vec<Shape> =
        doc.shapes.into_iter().map(|s| Shape { name: s.name, fiber: s.fiber_size }).collect();
    let poly = Polynomial::new(shapes).map_err(|e| LoadError::at("/shapes", e.to_string()))?;
    let mut warnings = Vec::new();
    if !poly.has_nullary_shape() {
        warnings.push("no shape has an empty fiber; there are no finite trees".into());
    }
    Ok(Loaded { value: poly, warnings })
}

// ---------------------------------------------------------------------------
// Theories
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct TheoryDoc {
    symbols: Vec<String>,
    #[serde(default)]
    sequents: Vec<SequentDoc>,
}

#[derive(Deserialize)]
struct SequentDoc {
    lhs: serde_json::Value,
    rhs: serde_json::Value,
}

fn formula_from_value(
    v: &serde_json::Value,
    symbols: &[String],
    path: &str,
) -> Result<Formula, LoadError> {
    match v {
        serde_json::Value::String(s) if s == "top" => Ok(Formula::Top),
        serde_json::Value::String(s) => symbols
            .iter()
            .position(|n| n == s)
            .map(Formula::Sym)
            .ok_or_else(|| LoadError::at(path, format!("unknown symbol {s:?}"))),
        serde_json::Value::Object(map) => {
            if let Some(fs) = map.get("and") {
                let arr = fs
                    .as_array()
                    .ok_or_else(|| LoadError::at(format!("{path}/and"), "expected an array"))?;
                let parts = arr
                    .iter()
                    .enumerate()
                    .map(|(i, f)| formula_from_value(f, symbols, &format!("{path}/and/{i}")))
                    .collect::<Result<_, _>>()?;
                Ok(Formula::And(parts))
            } else if let Some(fs) = map.get("or") {
                let arr = fs
                    .as_array()
                    .ok_or_else(|| LoadError::at(format!("{path}/or"), "expected an array"))?;
                let parts = arr
                    .iter()
                    .enumerate()
                    .map(|(i, f)| formula_from_value(f, symbols, &format!("{path}/or/{i}")))
                    .collect::<Result<_, _>>()?;
                Ok(Formula::Or(parts))
            } else {
                Err(LoadError::at(path, "expected \"top\", a symbol, {\"and\": [..]} or {\"or\": [..]}"))
            }
        }
        _ => Err(LoadError::at(path, "expected \"top\", a symbol, {\"and\": [..]} or {\"or\": [..]}")),
    }
}

/// Load `{"symbols": [..], "sequents": [{"lhs": f, "rhs": f}, ..]}` where a
/// formula is `"top"`, a symbol name, `{"and": [..]}` or `{"or": [..]}`.
/// The name `"top"` is reserved.
pub fn theory_from_str(s: &str) -> Result<Loaded<GeometricTheory>, LoadError> {
    let doc: TheoryDoc = parse(s)?;
    for (i, sym) in doc.symbols.iter().enumerate() {
        if sym == "top" {
            return Err(LoadError::at(format!("/symbols/{i}"), "\"top\" is reserved"));
        }
        if doc.symbols[..i].contains(sym) {
            return Err(LoadError::at(format!("/symbols/{i}"), format!("duplicate symbol {sym:?}")));
        }
    }
    let mut sequents = Vec::new();
    for (i, sq) in doc.sequents.iter().enumerate() {
        let lhs = formula_from_value(&sq.lhs, &doc.symbols, &format!("/sequents/{i}/lhs"))?;
        let rhs = formula_from_value(&sq.rhs, &doc.symbols, &format!("/sequents/{i}/rhs"))?;
        sequents.push(Sequent { lhs, rhs });
    }
    let theory = GeometricTheory::new(doc.symbols, sequents)
        .map_err(|e| LoadError::at("/symbols", e.to_string()))?;
    Ok(Loaded::plain(theory))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::check_loeb;
    use crate::order::is_compatible_wf;
    use crate::theory::enumerate_models;

    #[test]
    fn poset_roundtrip_with_closure_warning() {
        let loaded = poset_from_str(
            r#"{"elements": ["a", "b", "c"], "leq": [["a","b"], ["b","c"]], "prec": [["a","b"]]}"#,
        )
        .unwrap();
        assert_eq!(loaded.warnings.len(), 1);
        let w = &loaded.value;
        assert!(w.base().leq(0, 2), "closure added a ≤ c");
        assert!(w.prec_holds(0, 1));
    }

    #[test]
    fn poset_unknown_element_has_path() {
        let err = poset_from_str(r#"{"elements": ["a"], "leq": [["a","zz"]]}"#).unwrap_err();
        assert_eq!(err.path(), Some("/leq/0/1"));
    }

    #[test]
    fn frame_from_downsets_checks_loeb() {
        let doc = r#"{"downsets_of": {"elements": ["0","1"], "leq": [["0","1"]], "prec": [["0","1"]]}}"#;
        let loaded = frame_from_str(doc).unwrap();
        assert_eq!(check_loeb(&loaded.value), None);
    }

    #[test]
    fn explicit_frame_loads() {
        let doc = r#"{
            "opens": ["bot", "u"],
            "leq": [["bot","u"]],
            "basis": ["u"],
            "basis_prec": [["u","u"]]
        }"#;
        let loaded = frame_from_str(doc).unwrap();
        let bf = loaded.value;
        assert!(!is_compatible_wf(&bf.basis_wf_relation()).ok());
        assert_eq!(check_loeb(&bf), Some(bf.frame().bottom()));
    }

    #[test]
    fn polynomial_warns_without_leaf() {
        let loaded = polynomial_from_str(r#"{"shapes": [{"name": "n", "fiber_size": 2}]}"#).unwrap();
        assert_eq!(loaded.warnings.len(), 1);
        let ok = polynomial_from_str(
            r#"{"shapes": [{"name": "leaf", "fiber_size": 0}, {"name": "node", "fiber_size": 1}]}"#,
        )
        .unwrap();
        assert!(ok.warnings.is_empty());
    }

    #[test]
    fn theory_formulas_parse() {
        let doc = r#"{
            "symbols": ["p", "q"],
            "sequents": [
                {"lhs": "p", "rhs": {"or": ["p", "q"]}},
                {"lhs": {"and": ["p", "q"]}, "rhs": "top"},
                {"lhs": "top", "rhs": {"or": ["p", "q"]}}
            ]
        }"#;
        let t = theory_from_str(doc).unwrap().value;
        assert_eq!(enumerate_models(&t).len(), 3);
    }

    #[test]
    fn theory_bad_symbol_has_path() {
        let doc = r#"{"symbols": ["p"], "sequents": [{"lhs": "p", "rhs": {"or": ["zz"]}}]}"#;
        let err = theory_from_str(doc).unwrap_err();
        assert_eq!(err.path(), Some("/sequents/0/rhs/or/0"));
    }

    #[test]
    fn empty_theory_parses() {
        let t = theory_from_str(r#"{"symbols": []}"#).unwrap().value;
        assert_eq!(enumerate_models(&t), vec![0]);
    }
}
