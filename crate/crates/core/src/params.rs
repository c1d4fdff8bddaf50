//! Flat scalar parameter maps and their per-method schemas.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A scalar parameter value as written in a config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Bool(b) => write!(f, "{b}"),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Float(x) => write!(f, "{x}"),
            ParamValue::Str(s) => f.write_str(s),
        }
    }
}

pub type ParamMap = BTreeMap<String, ParamValue>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Bool,
    Int,
    Float,
    Str,
}

/// One entry of a method's parameter schema.
#[derive(Debug, Clone, Copy)]
pub struct ParamDef {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: DefaultValue,
    /// Admissible values for numeric kinds.
    pub valid: fn(f64) -> bool,
    /// Allowed values for string kinds (empty = any).
    pub choices: &'static [&'static str],
    pub domain: &'static str,
}

#[derive(Debug, Clone, Copy)]
pub enum DefaultValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(&'static str),
}

impl DefaultValue {
    fn to_value(self) -> ParamValue {
        match self {
            DefaultValue::Bool(b) => ParamValue::Bool(b),
            DefaultValue::Int(i) => ParamValue::Int(i),
            DefaultValue::Float(x) => ParamValue::Float(x),
            DefaultValue::Str(s) => ParamValue::Str(s.to_string()),
        }
    }
}

fn any(_: f64) -> bool {
    true
}

impl ParamDef {
    pub const fn float(name: &'static str, default: f64, valid: fn(f64) -> bool, domain: &'static str) -> Self {
        Self {
            name,
            kind: ParamKind::Float,
            default: DefaultValue::Float(default),
            valid,
            choices: &[],
            domain,
        }
    }

    pub const fn int(name: &'static str, default: i64, valid: fn(f64) -> bool, domain: &'static str) -> Self {
        Self {
            name,
            kind: ParamKind::Int,
            default: DefaultValue::Int(default),
            valid,
            choices: &[],
            domain,
        }
    }

    pub const fn flag(name: &'static str, default: bool) -> Self {
        Self {
            name,
            kind: ParamKind::Bool,
            default: DefaultValue::Bool(default),
            valid: any,
            choices: &[],
            domain: "true or false",
        }
    }

    pub const fn choice(name: &'static str, default: &'static str, choices: &'static [&'static str]) -> Self {
        Self {
            name,
            kind: ParamKind::Str,
            default: DefaultValue::Str(default),
            valid: any,
            choices,
            domain: "one of the listed choices",
        }
    }
}

/// Coerces `value` to the kind `def` expects. Integers widen to floats;
/// nothing else converts.
pub fn coerce(def: &ParamDef, value: &ParamValue) -> Result<ParamValue, String> {
    let kind_name = match def.kind {
        ParamKind::Bool => "a boolean",
        ParamKind::Int => "an integer",
        ParamKind::Float => "a number",
        ParamKind::Str => "a string",
    };
    match (def.kind, value) {
        (ParamKind::Bool, ParamValue::Bool(_))
        | (ParamKind::Int, ParamValue::Int(_))
        | (ParamKind::Float, ParamValue::Float(_))
        | (ParamKind::Str, ParamValue::Str(_)) => Ok(value.clone()),
        (ParamKind::Float, ParamValue::Int(i)) => Ok(ParamValue::Float(*i as f64)),
        _ => Err(format!("expected {kind_name}, got `{value}`")),
    }
}

/// Materializes defaults and coerces kinds. Unknown names and kind
/// mismatches are reported as `(parameter name, message)`.
pub fn resolve(schema: &[ParamDef], given: &ParamMap) -> Result<ParamMap, Vec<(String, String)>> {
    let mut errs = Vec::new();
    for name in given.keys() {
        if !schema.iter().any(|d| d.name == name) {
            let known: Vec<&str> = schema.iter().map(|d| d.name).collect();
            errs.push((
                name.clone(),
                format!("unknown parameter `{name}`; expected one of {known:?}"),
            ));
        }
    }
    let mut out = ParamMap::new();
    for def in schema {
        let v = match given.get(def.name) {
            Some(v) => match coerce(def, v) {
                Ok(v) => v,
                Err(e) => {
                    errs.push((def.name.to_string(), e));
                    continue;
                }
            },
            None => def.default.to_value(),
        };
        out.insert(def.name.to_string(), v);
    }
    if errs.is_empty() {
        Ok(out)
    } else {
        Err(errs)
    }
}

/// Range and choice checks on an already-resolved map.
pub fn check_ranges(schema: &[ParamDef], params: &ParamMap) -> Vec<(String, String)> {
    let mut errs = Vec::new();
    for def in schema {
        match params.get(def.name) {
            Some(ParamValue::Float(x)) if !(x.is_finite() && (def.valid)(*x)) => {
                errs.push((def.name.to_string(), format!("{x} outside {}", def.domain)))
            }
            Some(ParamValue::Int(i)) if !(def.valid)(*i as f64) => {
                errs.push((def.name.to_string(), format!("{i} outside {}", def.domain)))
            }
            Some(ParamValue::Str(s)) if !def.choices.is_empty() && !def.choices.contains(&s.as_str()) => {
                errs.push((def.name.to_string(), format!("`{s}` is not one of {:?}", def.choices)))
            }
            _ => {}
        }
    }
    errs
}

/// Typed reads of resolved parameter maps. Missing or mistyped entries fall
/// back to the schema default, so these never fail on a resolved map.
pub struct Params<'a> {
    schema: &'a [ParamDef],
    map: &'a ParamMap,
}

impl<'a> Params<'a> {
    pub fn new(schema: &'a [ParamDef], map: &'a ParamMap) -> Self {
        Self { schema, map }
    }

    fn default_of(&self, name: &str) -> ParamValue {
        self.schema
            .iter()
            .find(|d| d.name == name)
            .unwrap_or_else(|| panic!("parameter `{name}` not in schema"))
            .default
            .to_value()
    }

    fn value(&self, name: &str) -> ParamValue {
        self.map.get(name).cloned().unwrap_or_else(|| self.default_of(name))
    }

    pub fn f64(&self, name: &str) -> f64 {
        match self.value(name) {
            ParamValue::Float(x) => x,
            ParamValue::Int(i) => i as f64,
            _ => match self.default_of(name) {
                ParamValue::Float(x) => x,
                _ => unreachable!("float parameter `{name}`"),
            },
        }
    }

    pub fn usize(&self, name: &str) -> usize {
        match self.value(name) {
            ParamValue::Int(i) if i >= 0 => i as usize,
            _ => match self.default_of(name) {
                ParamValue::Int(i) => i.max(0) as usize,
                _ => unreachable!("integer parameter `{name}`"),
            },
        }
    }

    pub fn bool(&self, name: &str) -> bool {
        match self.value(name) {
            ParamValue::Bool(b) => b,
            _ => matches!(self.default_of(name), ParamValue::Bool(true)),
        }
    }

    pub fn str(&self, name: &str) -> String {
        match self.value(name) {
            ParamValue::Str(s) => s,
            _ => self.default_of(name).to_string(),
        }
    }
}

pub(crate) fn positive(x: f64) -> bool {
    x > 0.0
}

pub(crate) fn non_negative(x: f64) -> bool {
    x >= 0.0
}

pub(crate) fn at_least_one(x: f64) -> bool {
    x >= 1.0
}

pub(crate) fn open_unit(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

pub(crate) fn half_open_unit(x: f64) -> bool {
    x > 0.0 && x <= 1.0
}
