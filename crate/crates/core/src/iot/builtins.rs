//! Concrete semantics of the builtin operators.
//!
//! These are the reference implementations every indexed table is memoized
//! from, so they are kept deliberately plain.

use std::cmp::Ordering;

use crate::lang::{Indexable, TypeTag, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{op}: {message}")]
pub struct EvalError {
    pub op: String,
    pub message: String,
}

pub type EvalFn = fn(&[Value]) -> Result<Value, EvalError>;

pub struct Builtin {
    pub name: &'static str,
    pub params: &'static [TypeTag],
    pub ret: TypeTag,
    /// The indexed type whose library this operator belongs to. `None` for
    /// sinks such as `puts`, which are never indexed.
    pub library: Option<Indexable>,
    pub eval: EvalFn,
}

impl std::fmt::Debug for Builtin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Builtin").field("name", &self.name).finish()
    }
}

use TypeTag::{Float, Int, Str};

const SS: &[TypeTag] = &[Str, Str];
const SSI: &[TypeTag] = &[Str, Str, Int];
const SII: &[TypeTag] = &[Str, Int, Int];
const S: &[TypeTag] = &[Str];
const FF: &[TypeTag] = &[Float, Float];
const F: &[TypeTag] = &[Float];

pub static BUILTINS: &[Builtin] = &[
    Builtin { name: "strcat", params: SS, ret: Str, library: Some(Indexable::Str), eval: strcat },
    Builtin { name: "strstr", params: SS, ret: Str, library: Some(Indexable::Str), eval: strstr },
    Builtin { name: "strncmp", params: SSI, ret: Int, library: Some(Indexable::Str), eval: strncmp },
    Builtin { name: "strcmp", params: SS, ret: Int, library: Some(Indexable::Str), eval: strcmp },
    Builtin { name: "strlen", params: S, ret: Int, library: Some(Indexable::Str), eval: strlen },
    Builtin { name: "substr", params: SII, ret: Str, library: Some(Indexable::Str), eval: substr },
    Builtin { name: "fadd", params: FF, ret: Float, library: Some(Indexable::Float), eval: fadd },
    Builtin { name: "fsub", params: FF, ret: Float, library: Some(Indexable::Float), eval: fsub },
    Builtin { name: "fmul", params: FF, ret: Float, library: Some(Indexable::Float), eval: fmul },
    Builtin { name: "fdiv", params: FF, ret: Float, library: Some(Indexable::Float), eval: fdiv },
    Builtin { name: "sqrt", params: F, ret: Float, library: Some(Indexable::Float), eval: sqrt },
    Builtin { name: "fabs", params: F, ret: Float, library: Some(Indexable::Float), eval: fabs },
    Builtin { name: "fmin", params: FF, ret: Float, library: Some(Indexable::Float), eval: fmin },
    Builtin { name: "fmax", params: FF, ret: Float, library: Some(Indexable::Float), eval: fmax },
    Builtin { name: "puts", params: S, ret: Int, library: None, eval: puts },
];

pub fn builtin(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

/// Every builtin in the library of `t`, in registry order.
pub fn library(t: Indexable) -> impl Iterator<Item = &'static Builtin> {
    BUILTINS.iter().filter(move |b| b.library == Some(t))
}

/// Evaluates a builtin by name on concrete arguments.
pub fn eval_builtin(name: &str, args: &[Value]) -> Result<Value, EvalError> {
    let b = builtin(name).ok_or_else(|| EvalError { op: name.into(), message: "unknown builtin".into() })?;
    if args.len() != b.params.len() || args.iter().zip(b.params).any(|(a, t)| a.type_tag() != *t) {
        return Err(EvalError { op: name.into(), message: format!("ill-typed arguments {args:?}") });
    }
    (b.eval)(args)
}

fn s(v: &Value) -> &[u8] {
    v.as_str().expect("typed by eval_builtin")
}

fn i(v: &Value) -> i64 {
    v.as_int().expect("typed by eval_builtin")
}

fn f(v: &Value) -> f64 {
    v.as_float().expect("typed by eval_builtin")
}

fn sign(o: Ordering) -> Value {
    Value::Int(match o {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    })
}

fn strcat(a: &[Value]) -> Result<Value, EvalError> {
    let mut out = s(&a[0]).to_vec();
    out.extend_from_slice(s(&a[1]));
    Ok(Value::Str(out))
}

/// Suffix of the haystack from the first occurrence of the needle; the empty
/// string stands in for NULL on a miss.
fn strstr(a: &[Value]) -> Result<Value, EvalError> {
    let (hay, needle) = (s(&a[0]), s(&a[1]));
    if needle.is_empty() {
        return Ok(Value::Str(hay.to_vec()));
    }
    let found = hay.windows(needle.len()).position(|w| w == needle);
    Ok(Value::Str(found.map(|p| hay[p..].to_vec()).unwrap_or_default()))
}

/// Byte at `k` with C string termination semantics.
fn at(bytes: &[u8], k: usize) -> u8 {
    bytes.get(k).copied().unwrap_or(0)
}

fn compare_prefix(a: &[u8], b: &[u8], n: usize) -> Ordering {
    for k in 0..n {
        let (x, y) = (at(a, k), at(b, k));
        if x != y {
            return x.cmp(&y);
        }
        if x == 0 {
            break;
        }
    }
    Ordering::Equal
}

fn strncmp(a: &[Value]) -> Result<Value, EvalError> {
    let n = usize::try_from(i(&a[2]).max(0)).unwrap_or(usize::MAX);
    Ok(sign(compare_prefix(s(&a[0]), s(&a[1]), n)))
}

fn strcmp(a: &[Value]) -> Result<Value, EvalError> {
    let (x, y) = (s(&a[0]), s(&a[1]));
    Ok(sign(compare_prefix(x, y, x.len().max(y.len()) + 1)))
}

fn strlen(a: &[Value]) -> Result<Value, EvalError> {
    let bytes = s(&a[0]);
    let len = bytes.iter().position(|b| *b == 0).unwrap_or(bytes.len());
    Ok(Value::Int(len as i64))
}

/// `substr(s, start, len)`, clamped to the string bounds.
fn substr(a: &[Value]) -> Result<Value, EvalError> {
    let bytes = s(&a[0]);
    let start = usize::try_from(i(&a[1]).max(0)).unwrap_or(usize::MAX).min(bytes.len());
    let len = usize::try_from(i(&a[2]).max(0)).unwrap_or(usize::MAX);
    let end = start.saturating_add(len).min(bytes.len());
    Ok(Value::Str(bytes[start..end].to_vec()))
}

fn fadd(a: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::float(f(&a[0]) + f(&a[1])))
}

fn fsub(a: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::float(f(&a[0]) - f(&a[1])))
}

fn fmul(a: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::float(f(&a[0]) * f(&a[1])))
}

fn fdiv(a: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::float(f(&a[0]) / f(&a[1])))
}

fn sqrt(a: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::float(f(&a[0]).sqrt()))
}

fn fabs(a: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::float(f(&a[0]).abs()))
}

fn fmin(a: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::float(f(&a[0]).min(f(&a[1]))))
}

fn fmax(a: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::float(f(&a[0]).max(f(&a[1]))))
}

fn puts(_: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::Int(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(name: &str, args: &[Value]) -> Value {
        eval_builtin(name, args).unwrap()
    }

    /// Textbook substring search, independent of `windows`.
    fn naive_find(hay: &[u8], needle: &[u8]) -> Option<usize> {
        'outer: for start in 0..=hay.len() {
            if start + needle.len() > hay.len() {
                return None;
            }
            for k in 0..needle.len() {
                if hay[start + k] != needle[k] {
                    continue 'outer;
                }
            }
            return Some(start);
        }
        None
    }

    #[test]
    fn strstr_matches_naive_search() {
        assert_eq!(call("strstr", &[Value::str("foobar"), Value::str("oo")]), Value::str("oobar"));
        assert_eq!(call("strstr", &[Value::str("oo"), Value::str("bar")]), Value::str(""));
        let words = ["", "a", "ab", "ba", "aab", "bab", "abab"];
        for h in words {
            for n in words {
                let expect = naive_find(h.as_bytes(), n.as_bytes())
                    .map(|p| Value::str(&h[p..]))
                    .unwrap_or(Value::str(""));
                assert_eq!(call("strstr", &[Value::str(h), Value::str(n)]), expect, "{h:?} {n:?}");
            }
        }
    }

    #[test]
    fn strncmp_compares_only_prefix() {
        let a = Value::str("NVidia C");
        let b = Value::str("NVidia Corporation");
        assert_eq!(call("strncmp", &[a.clone(), b.clone(), Value::Int(4)]), Value::Int(0));
        assert_eq!(call("strncmp", &[a.clone(), b.clone(), Value::Int(18)]), Value::Int(-1));
        assert_eq!(call("strcmp", &[b, a]), Value::Int(1));
    }

    #[test]
    fn strcat_identity_and_strlen() {
        assert_eq!(call("strcat", &[Value::str(""), Value::str("x")]), Value::str("x"));
        assert_eq!(call("strlen", &[Value::str("abc")]), Value::Int(3));
        assert_eq!(call("substr", &[Value::str("abcdef"), Value::Int(2), Value::Int(10)]), Value::str("cdef"));
        assert_eq!(call("substr", &[Value::str("ab"), Value::Int(5), Value::Int(1)]), Value::str(""));
    }

    #[test]
    fn sqrt_of_negative_is_canonical_nan() {
        let r = call("sqrt", &[Value::Float(-1.0)]);
        assert_eq!(r, Value::float(f64::NAN));
    }

    #[test]
    fn ill_typed_arguments_are_rejected() {
        assert!(eval_builtin("strcat", &[Value::str("a"), Value::Int(1)]).is_err());
        assert!(eval_builtin("nope", &[]).is_err());
    }
}
