use std::fmt;

use serde::{Deserialize, Serialize};

/// Base types that may be indexed (the members of the indexed type set).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Indexable {
    Str,
    Float,
}

impl Indexable {
    pub const ALL: [Indexable; 2] = [Indexable::Str, Indexable::Float];

    pub fn name(self) -> &'static str {
        match self {
            Indexable::Str => "str",
            Indexable::Float => "float",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "str" | "string" => Some(Indexable::Str),
            "float" => Some(Indexable::Float),
            _ => None,
        }
    }

    pub fn tag(self) -> TypeTag {
        match self {
            Indexable::Str => TypeTag::Str,
            Indexable::Float => TypeTag::Float,
        }
    }
}

impl fmt::Display for Indexable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// MiniImp value types. `Index` cannot nest: its payload is an [`Indexable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TypeTag {
    Int,
    Float,
    Bool,
    Str,
    Index(Indexable),
}

impl TypeTag {
    /// The indexable base of a raw type, if any.
    pub fn indexable(self) -> Option<Indexable> {
        match self {
            TypeTag::Str => Some(Indexable::Str),
            TypeTag::Float => Some(Indexable::Float),
            _ => None,
        }
    }

    pub fn is_index(self) -> bool {
        matches!(self, TypeTag::Index(_))
    }

    /// Index(t) for t in `indexed`, otherwise the type itself.
    pub fn indexed_under(self, indexed: &IndexedTypes) -> TypeTag {
        match self.indexable() {
            Some(base) if indexed.contains(base) => TypeTag::Index(base),
            _ => self,
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "int" => Some(TypeTag::Int),
            "float" => Some(TypeTag::Float),
            "bool" => Some(TypeTag::Bool),
            "str" => Some(TypeTag::Str),
            _ => None,
        }
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeTag::Int => f.write_str("int"),
            TypeTag::Float => f.write_str("float"),
            TypeTag::Bool => f.write_str("bool"),
            TypeTag::Str => f.write_str("str"),
            TypeTag::Index(base) => write!(f, "idx<{base}>"),
        }
    }
}

/// The set of indexed types for one indexification run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexedTypes {
    pub str: bool,
    pub float: bool,
}

impl IndexedTypes {
    pub const NONE: IndexedTypes = IndexedTypes { str: false, float: false };
    pub const STR: IndexedTypes = IndexedTypes { str: true, float: false };
    pub const FLOAT: IndexedTypes = IndexedTypes { str: false, float: true };
    pub const BOTH: IndexedTypes = IndexedTypes { str: true, float: true };

    pub fn contains(&self, t: Indexable) -> bool {
        match t {
            Indexable::Str => self.str,
            Indexable::Float => self.float,
        }
    }

    pub fn contains_tag(&self, t: TypeTag) -> bool {
        t.indexable().is_some_and(|b| self.contains(b))
    }

    pub fn iter(&self) -> impl Iterator<Item = Indexable> + '_ {
        Indexable::ALL.into_iter().filter(|t| self.contains(*t))
    }

    /// Parses the `--type` flag vocabulary: `string`, `float`, `both`.
    pub fn from_flag(flag: &str) -> Option<Self> {
        match flag {
            "string" | "str" => Some(Self::STR),
            "float" => Some(Self::FLOAT),
            "both" => Some(Self::BOTH),
            "none" => Some(Self::NONE),
            _ => None,
        }
    }
}

/// Name and type of an operator or function.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub name: String,
    pub params: Vec<TypeTag>,
    pub ret: TypeTag,
}

impl Signature {
    pub fn new(name: impl Into<String>, params: Vec<TypeTag>, ret: TypeTag) -> Self {
        Signature { name: name.into(), params, ret }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// The signature of the indexed counterpart `i_<name>`: every parameter and
    /// the return type in `indexed` become index types.
    pub fn indexed(&self, indexed: &IndexedTypes) -> Signature {
        Signature {
            name: indexed_name(&self.name),
            params: self.params.iter().map(|t| t.indexed_under(indexed)).collect(),
            ret: self.ret.indexed_under(indexed),
        }
    }
}

pub fn indexed_name(op: &str) -> String {
    format!("i_{op}")
}
