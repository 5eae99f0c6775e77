use super::types::{Indexable, TypeTag};
use super::value::Value;

pub type StmtId = u32;
pub type BranchId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    /// Indexed operator prototypes injected by the rewriter.
    pub externs: Vec<ExternDecl>,
    pub functions: Vec<FunctionDef>,
    pub main: FunctionDef,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternDecl {
    pub name: String,
    pub params: Vec<TypeTag>,
    pub ret: TypeTag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<Param>,
    pub ret: TypeTag,
    pub body: Block,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: TypeTag,
}

pub type Block = Vec<Stmt>;

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub id: StmtId,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Decl { name: String, ty: TypeTag, init: Option<Expr> },
    Assign { name: String, value: Expr },
    If { branch: BranchId, cond: Expr, then_block: Block, else_block: Block },
    While { branch: BranchId, cond: Expr, body: Block },
    Assert(Expr),
    Return(Expr),
    Expr(Expr),
    MakeSymbolic(String),
}

impl StmtKind {
    /// The statement's single expression slot, if it has one.
    pub fn expr(&self) -> Option<&Expr> {
        match self {
            StmtKind::Decl { init, .. } => init.as_ref(),
            StmtKind::Assign { value, .. } => Some(value),
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => Some(cond),
            StmtKind::Assert(e) | StmtKind::Return(e) | StmtKind::Expr(e) => Some(e),
            StmtKind::MakeSymbolic(_) => None,
        }
    }

    pub fn expr_mut(&mut self) -> Option<&mut Expr> {
        match self {
            StmtKind::Decl { init, .. } => init.as_mut(),
            StmtKind::Assign { value, .. } => Some(value),
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => Some(cond),
            StmtKind::Assert(e) | StmtKind::Return(e) | StmtKind::Expr(e) => Some(e),
            StmtKind::MakeSymbolic(_) => None,
        }
    }

    pub fn blocks(&self) -> Vec<&Block> {
        match self {
            StmtKind::If { then_block, else_block, .. } => vec![then_block, else_block],
            StmtKind::While { body, .. } => vec![body],
            _ => Vec::new(),
        }
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Block> {
        match self {
            StmtKind::If { then_block, else_block, .. } => vec![then_block, else_block],
            StmtKind::While { body, .. } => vec![body],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Value),
    /// ⊥ of an indexed type; only produced by rewriting.
    Bot(Indexable),
    Var(String),
    Call { name: String, args: Vec<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Unary { op: UnOp, expr: Box<Expr> },
    /// δ⊥(e): value to index, ⊥ outside the garden.
    Index(Box<Expr>),
    /// δ⊥⁻¹(e): index to value; consuming ⊥ escapes the garden.
    Unindex(Box<Expr>),
}

impl Expr {
    pub fn call(name: impl Into<String>, args: Vec<Expr>) -> Expr {
        Expr::Call { name: name.into(), args }
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Lit(_) | Expr::Bot(_) | Expr::Var(_) => Vec::new(),
            Expr::Call { args, .. } => args.iter().collect(),
            Expr::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            Expr::Unary { expr, .. } | Expr::Index(expr) | Expr::Unindex(expr) => vec![expr],
        }
    }

    pub fn child_mut(&mut self, i: usize) -> Option<&mut Expr> {
        match self {
            Expr::Lit(_) | Expr::Bot(_) | Expr::Var(_) => None,
            Expr::Call { args, .. } => args.get_mut(i),
            Expr::Binary { lhs, rhs, .. } => match i {
                0 => Some(lhs),
                1 => Some(rhs),
                _ => None,
            },
            Expr::Unary { expr, .. } | Expr::Index(expr) | Expr::Unindex(expr) => {
                (i == 0).then_some(&mut **expr)
            }
        }
    }

    /// Visits every literal in pre-order.
    pub fn for_each_literal<'a>(&'a self, f: &mut impl FnMut(&'a Value)) {
        if let Expr::Lit(v) = self {
            f(v);
        }
        for c in self.children() {
            c.for_each_literal(f);
        }
    }

    pub fn for_each_call<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        if let Expr::Call { name, .. } = self {
            f(name);
        }
        for c in self.children() {
            c.for_each_call(f);
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}

impl Program {
    pub fn all_functions(&self) -> impl Iterator<Item = &FunctionDef> {
        self.functions.iter().chain(std::iter::once(&self.main))
    }

    pub fn all_functions_mut(&mut self) -> impl Iterator<Item = &mut FunctionDef> {
        self.functions.iter_mut().chain(std::iter::once(&mut self.main))
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.all_functions().find(|f| f.name == name)
    }

    /// Visits every statement of every function in source pre-order.
    pub fn for_each_stmt<'a>(&'a self, f: &mut impl FnMut(&'a FunctionDef, &'a Stmt)) {
        fn walk<'a>(
            func: &'a FunctionDef,
            block: &'a Block,
            f: &mut impl FnMut(&'a FunctionDef, &'a Stmt),
        ) {
            for s in block {
                f(func, s);
                for b in s.kind.blocks() {
                    walk(func, b, f);
                }
            }
        }
        for func in self.all_functions() {
            walk(func, &func.body, f);
        }
    }

    /// Visits every literal in source order.
    pub fn for_each_literal<'a>(&'a self, f: &mut impl FnMut(&'a Value)) {
        self.for_each_stmt(&mut |_, s| {
            if let Some(e) = s.kind.expr() {
                e.for_each_literal(f);
            }
        });
    }

    pub fn stmt_count(&self) -> usize {
        let mut n = 0;
        self.for_each_stmt(&mut |_, _| n += 1);
        n
    }

    /// Number of If/While sites; each contributes two branch outcomes.
    pub fn branch_site_count(&self) -> usize {
        let mut n = 0;
        self.for_each_stmt(&mut |_, s| {
            if matches!(s.kind, StmtKind::If { .. } | StmtKind::While { .. }) {
                n += 1;
            }
        });
        n
    }

    /// AST node count used for rewriting iteration caps.
    pub fn size(&self) -> usize {
        let mut n = 0;
        for f in self.all_functions() {
            n += 1 + f.params.len();
        }
        self.for_each_stmt(&mut |_, s| {
            n += 1 + s.kind.expr().map_or(0, Expr::size);
        });
        n
    }

    pub fn names_called(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.for_each_stmt(&mut |_, s| {
            if let Some(e) = s.kind.expr() {
                e.for_each_call(&mut |n| {
                    if !out.iter().any(|o| o == n) {
                        out.push(n.to_string());
                    }
                });
            }
        });
        out
    }
}
