use std::fmt;
use std::hash::{Hash, Hasher};

use super::types::{Indexable, TypeTag};

/// An index into a garden, or ⊥ when the value escaped it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexVal {
    At(u32),
    Bot,
}

impl IndexVal {
    pub fn index(self) -> Option<u32> {
        match self {
            IndexVal::At(i) => Some(i),
            IndexVal::Bot => None,
        }
    }

    pub fn is_bot(self) -> bool {
        matches!(self, IndexVal::Bot)
    }

    /// Sentinel encoding used only at the textual representation layer.
    pub fn to_sentinel(self) -> i64 {
        match self {
            IndexVal::At(i) => i64::from(i),
            IndexVal::Bot => -1,
        }
    }
}

impl fmt::Display for IndexVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexVal::At(i) => write!(f, "{i}"),
            IndexVal::Bot => f.write_str("bot"),
        }
    }
}

/// A MiniImp runtime value.
///
/// Equality and hashing compare floats by bit pattern, so values can key
/// gardens (NaN is admissible and equal to itself).
#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(Vec<u8>),
    Index(Indexable, IndexVal),
}

impl Value {
    /// Float constructor that canonicalizes every NaN to one bit pattern.
    pub fn float(f: f64) -> Value {
        if f.is_nan() {
            Value::Float(f64::NAN)
        } else {
            Value::Float(f)
        }
    }

    pub fn str(s: impl AsRef<[u8]>) -> Value {
        Value::Str(s.as_ref().to_vec())
    }

    pub fn type_tag(&self) -> TypeTag {
        match self {
            Value::Int(_) => TypeTag::Int,
            Value::Float(_) => TypeTag::Float,
            Value::Bool(_) => TypeTag::Bool,
            Value::Str(_) => TypeTag::Str,
            Value::Index(t, _) => TypeTag::Index(*t),
        }
    }

    pub fn default_for(ty: TypeTag) -> Option<Value> {
        match ty {
            TypeTag::Int => Some(Value::Int(0)),
            TypeTag::Float => Some(Value::Float(0.0)),
            TypeTag::Bool => Some(Value::Bool(false)),
            TypeTag::Str => Some(Value::Str(Vec::new())),
            TypeTag::Index(_) => None,
        }
    }

    /// C-style truthiness for raw values. Index values have no intrinsic truth.
    pub fn truthy(&self) -> Option<bool> {
        match self {
            Value::Int(i) => Some(*i != 0),
            Value::Float(f) => Some(*f != 0.0),
            Value::Bool(b) => Some(*b),
            Value::Str(s) => Some(!s.is_empty()),
            Value::Index(..) => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&[u8]> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_float(&self) -> Option<f64> {
        match self {
            Value::Float(f) => Some(*f),
            _ => None,
        }
    }

    /// Renders the value as a typed literal: `str:foo`, `int:3`, `float:1.5`.
    /// Parsed back by [`Value::parse_typed`].
    pub fn to_typed(&self) -> String {
        match self {
            Value::Int(i) => format!("int:{i}"),
            Value::Float(f) => format!("float:{}", format_float(*f)),
            Value::Bool(b) => format!("bool:{b}"),
            Value::Str(s) => format!("str:{}", escape_bytes(s, false)),
            Value::Index(t, i) => format!("idx<{t}>:{i}"),
        }
    }

    pub fn parse_typed(text: &str) -> Result<Value, String> {
        let (tag, body) = text
            .split_once(':')
            .ok_or_else(|| format!("missing type prefix in `{text}`"))?;
        match tag {
            "int" => body
                .parse::<i64>()
                .map(Value::Int)
                .map_err(|e| format!("bad int `{body}`: {e}")),
            "float" => parse_float(body)
                .map(Value::float)
                .ok_or_else(|| format!("bad float `{body}`")),
            "bool" => match body {
                "true" => Ok(Value::Bool(true)),
                "false" => Ok(Value::Bool(false)),
                _ => Err(format!("bad bool `{body}`")),
            },
            "str" => unescape_bytes(body).map(Value::Str),
            "idx<str>" | "idx<float>" => {
                let base = if tag == "idx<str>" { Indexable::Str } else { Indexable::Float };
                if body == "bot" {
                    Ok(Value::Index(base, IndexVal::Bot))
                } else {
                    body.parse::<u32>()
                        .map(|i| Value::Index(base, IndexVal::At(i)))
                        .map_err(|e| format!("bad index `{body}`: {e}"))
                }
            }
            _ => Err(format!("unknown type prefix `{tag}`")),
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => a.to_bits() == b.to_bits(),
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Index(t, a), Value::Index(u, b)) => t == u && a == b,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Value::Int(i) => i.hash(state),
            Value::Float(f) => f.to_bits().hash(state),
            Value::Bool(b) => b.hash(state),
            Value::Str(s) => s.hash(state),
            Value::Index(t, i) => {
                t.hash(state);
                i.hash(state);
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => f.write_str(&format_float(*x)),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "\"{}\"", escape_bytes(s, true)),
            Value::Index(t, i) => write!(f, "@{t}({i})"),
        }
    }
}

/// Shortest round-trip float text; non-finite values use `nan`, `inf`, `-inf`.
pub fn format_float(f: f64) -> String {
    if f.is_nan() {
        "nan".into()
    } else if f.is_infinite() {
        if f > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        let s = format!("{f:?}");
        if s.contains(['.', 'e', 'E']) { s } else { format!("{s}.0") }
    }
}

pub fn parse_float(s: &str) -> Option<f64> {
    match s {
        "nan" | "NaN" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse::<f64>().ok(),
    }
}

/// Escapes a byte string with `\t`, `\n`, `\\` and `\xHH` for every other
/// byte outside printable ASCII. With `quote`, `"` is escaped too.
pub fn escape_bytes(bytes: &[u8], quote: bool) -> String {
    let mut out = String::with_capacity(bytes.len());
    for &b in bytes {
        match b {
            b'\t' => out.push_str("\\t"),
            b'\n' => out.push_str("\\n"),
            b'\\' => out.push_str("\\\\"),
            b'"' if quote => out.push_str("\\\""),
            0x20..=0x7e => out.push(b as char),
            _ => out.push_str(&format!("\\x{b:02X}")),
        }
    }
    out
}

pub fn unescape_bytes(text: &str) -> Result<Vec<u8>, String> {
    let bytes = text.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b != b'\\' {
            out.push(b);
            i += 1;
            continue;
        }
        let esc = *bytes
            .get(i + 1)
            .ok_or_else(|| "dangling backslash".to_string())?;
        match esc {
            b't' => out.push(b'\t'),
            b'n' => out.push(b'\n'),
            b'\\' => out.push(b'\\'),
            b'"' => out.push(b'"'),
            b'x' => {
                let hex = text
                    .get(i + 2..i + 4)
                    .ok_or_else(|| "truncated \\x escape".to_string())?;
                let v = u8::from_str_radix(hex, 16)
                    .map_err(|_| format!("bad \\x escape `{hex}`"))?;
                out.push(v);
                i += 2;
            }
            other => return Err(format!("unknown escape `\\{}`", other as char)),
        }
        i += 2;
    }
    Ok(out)
}
