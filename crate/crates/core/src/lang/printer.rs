use std::fmt::Write;

use super::ast::*;
use super::value::Value;

/// Canonical source formatting. `parse(print(p))` is structurally equal to `p`.
pub fn print(program: &Program) -> String {
    let mut out = String::new();
    for e in &program.externs {
        let params: Vec<String> = e.params.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "extern {} {}({});", e.ret, e.name, params.join(", "));
    }
    if !program.externs.is_empty() {
        out.push('\n');
    }
    for f in &program.functions {
        print_function(&mut out, f);
        out.push('\n');
    }
    print_function(&mut out, &program.main);
    out
}

fn print_function(out: &mut String, f: &FunctionDef) {
    let params: Vec<String> = f.params.iter().map(|p| format!("{} {}", p.ty, p.name)).collect();
    let _ = writeln!(out, "{} {}({}) {{", f.ret, f.name, params.join(", "));
    print_block(out, &f.body, 1);
    out.push_str("}\n");
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn print_block(out: &mut String, block: &Block, depth: usize) {
    for s in block {
        print_stmt(out, s, depth);
    }
}

fn print_stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match &s.kind {
        StmtKind::Decl { name, ty, init } => match init {
            Some(e) => {
                let _ = writeln!(out, "{ty} {name} = {};", expr_to_string(e));
            }
            None => {
                let _ = writeln!(out, "{ty} {name};");
            }
        },
        StmtKind::Assign { name, value } => {
            let _ = writeln!(out, "{name} = {};", expr_to_string(value));
        }
        StmtKind::If { .. } => {
            print_if(out, s, depth);
        }
        StmtKind::While { cond, body, .. } => {
            let _ = writeln!(out, "while ({}) {{", expr_to_string(cond));
            print_block(out, body, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::Assert(e) => {
            let _ = writeln!(out, "assert({});", expr_to_string(e));
        }
        StmtKind::Return(e) => {
            let _ = writeln!(out, "return {};", expr_to_string(e));
        }
        StmtKind::Expr(e) => {
            let _ = writeln!(out, "{};", expr_to_string(e));
        }
        StmtKind::MakeSymbolic(name) => {
            let _ = writeln!(out, "make_symbolic({name});");
        }
    }
}

fn print_if(out: &mut String, s: &Stmt, depth: usize) {
    let StmtKind::If { cond, then_block, else_block, .. } = &s.kind else {
        unreachable!("print_if on non-if")
    };
    let _ = writeln!(out, "if ({}) {{", expr_to_string(cond));
    print_block(out, then_block, depth + 1);
    indent(out, depth);
    out.push('}');
    match else_block.as_slice() {
        [] => out.push('\n'),
        [only] if matches!(only.kind, StmtKind::If { .. }) => {
            out.push_str(" else ");
            print_if(out, only, depth);
        }
        _ => {
            out.push_str(" else {\n");
            print_block(out, else_block, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, 0);
    out
}

// Unary and atomic expressions bind tighter than any binary operator.
const UNARY_PREC: u8 = 7;

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    match e {
        Expr::Lit(v) => {
            let negative = match v {
                Value::Int(i) => *i < 0,
                Value::Float(f) => f.is_sign_negative() && !f.is_nan(),
                _ => false,
            };
            // A negative literal re-parses as a literal only when not
            // glued to a preceding binary minus; parenthesize under operators.
            if negative && min_prec > 0 {
                let _ = write!(out, "({v})");
            } else {
                let _ = write!(out, "{v}");
            }
        }
        Expr::Bot(t) => {
            let _ = write!(out, "@{t}(bot)");
        }
        Expr::Var(n) => out.push_str(n),
        Expr::Call { name, args } => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0);
            }
            out.push(')');
        }
        Expr::Index(inner) => {
            out.push_str("delta(");
            write_expr(out, inner, 0);
            out.push(')');
        }
        Expr::Unindex(inner) => {
            out.push_str("delta_inv(");
            write_expr(out, inner, 0);
            out.push(')');
        }
        Expr::Unary { op, expr } => {
            match op {
                UnOp::Not => {
                    out.push('!');
                    write_expr(out, expr, UNARY_PREC);
                }
                UnOp::Neg => {
                    // Always parenthesized so `-(3)` stays a negation node.
                    out.push_str("-(");
                    write_expr(out, expr, 0);
                    out.push(')');
                }
            }
        }
        Expr::Binary { op, lhs, rhs } => {
            let prec = op.precedence();
            let wrap = prec < min_prec;
            if wrap {
                out.push('(');
            }
            write_expr(out, lhs, prec);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, rhs, prec + 1);
            if wrap {
                out.push(')');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    #[test]
    fn round_trip_nested_expressions() {
        let src = r#"
            int f(str s, int n) { return n * (n + 1) - -2 / 3; }
            int main() {
                str s = "a\tb\x01";
                int x = f(s, 3);
                if (x < 3 || !(x == 4) && true) { x = x - 1; } else if (x > 9) { x = 0; } else { x = 1; }
                while (x != 0) { x = x - 1; }
                float y = -(1.5);
                return x % 2;
            }"#;
        let p = parse(src).unwrap();
        let printed = print(&p);
        assert_eq!(parse(&printed).unwrap(), p, "{printed}");
        assert_eq!(print(&parse(&printed).unwrap()), printed);
    }

    #[test]
    fn subtraction_is_left_associative() {
        let p = parse("int main(){ return 1 - 2 - 3; }").unwrap();
        let printed = print(&p);
        assert!(printed.contains("return 1 - 2 - 3;"), "{printed}");
        let p2 = parse("int main(){ return 1 - (2 - 3); }").unwrap();
        assert!(print(&p2).contains("1 - (2 - 3)"));
    }
}
