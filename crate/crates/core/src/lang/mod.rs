//! MiniImp: the small imperative language indexification operates on.

pub mod ast;
pub mod interp;
pub mod parser;
pub mod printer;
pub mod typeck;
pub mod types;
pub mod value;

pub use ast::*;
pub use interp::{input_key, interpret, IndexRuntime, InterpConfig, InterpError, InterpResult, NoIndex, Verdict};
pub use parser::{parse, ParseError};
pub use printer::{expr_to_string, print};
pub use typeck::{typecheck, TypeError, TypedProgram};
pub use types::{indexed_name, Indexable, IndexedTypes, Signature, TypeTag};
pub use value::{escape_bytes, format_float, parse_float, unescape_bytes, IndexVal, Value};
