//! Weight and defining-function expressions.
//!
//! A [`WeightExpr`] is a real-valued expression in complex variables
//! `z1..zn` (fiber) and `t1..tk` (parameters). Complex values are only
//! observable through `re`, `im` and `abs2`, so every well-sorted expression
//! is real by construction.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := power ('*' power)*
//! power   := unary ('^' power)?
//! unary   := '-' unary | primary
//! primary := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Unary minus binds tighter than `^`, so `-x^2` is `(-x)^2`.

mod eval;
mod integrability;
mod parse;
mod print;
mod psh;

pub use eval::EvalError;
pub use integrability::{integrability_check, IntegrabilityConfig, IntegrabilityReport};
pub use parse::{parse_expr, ParseError, ParseErrorKind};
pub use psh::{check_psh_sample, PshSampleConfig};

use std::fmt;
use std::str::FromStr;

use crate::C64;

/// Which family of variables a symbol belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Z,
    T,
}

/// Built-in functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Re,
    Im,
    Abs2,
    Log,
    Exp,
    Max,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Re => "re",
            Func::Im => "im",
            Func::Abs2 => "abs2",
            Func::Log => "log",
            Func::Exp => "exp",
            Func::Max => "max",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "re" => Func::Re,
            "im" => Func::Im,
            "abs2" => Func::Abs2,
            "log" => Func::Log,
            "exp" => Func::Exp,
            "max" => Func::Max,
            _ => return None,
        })
    }
}

/// Named constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constant {
    /// Imaginary unit `i`.
    I,
    Pi,
}

/// Expression tree node.
#[derive(Debug, Clone)]
pub enum Node {
    /// Non-negative literal; `text` keeps the source spelling for printing.
    Num {
        value: f64,
        text: Option<String>,
    },
    Var {
        kind: VarKind,
        index: usize,
    },
    Const(Constant),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        use Node::*;
        match (self, other) {
            (Num { value: a, .. }, Num { value: b, .. }) => a.to_bits() == b.to_bits(),
            (
                Var {
                    kind: k1,
                    index: i1,
                },
                Var {
                    kind: k2,
                    index: i2,
                },
            ) => k1 == k2 && i1 == i2,
            (Const(a), Const(b)) => a == b,
            (Neg(a), Neg(b)) => a == b,
            (Add(a, b), Add(c, d))
            | (Sub(a, b), Sub(c, d))
            | (Mul(a, b), Mul(c, d))
            | (Pow(a, b), Pow(c, d)) => a == c && b == d,
            (Call(f, a), Call(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

impl Node {
    pub fn num(value: f64) -> Node {
        Node::Num { value, text: None }
    }

    /// Literal tree for a complex constant.
    pub fn complex(value: C64) -> Node {
        let signed = |x: f64| {
            if x < 0.0 {
                Node::Neg(Box::new(Node::num(-x)))
            } else {
                Node::num(x)
            }
        };
        let im = Node::Mul(
            Box::new(signed(value.im)),
            Box::new(Node::Const(Constant::I)),
        );
        Node::Add(Box::new(signed(value.re)), Box::new(im))
    }

    fn map_vars(&self, f: &impl Fn(VarKind, usize) -> Option<Node>) -> Node {
        let go = |n: &Node| Box::new(n.map_vars(f));
        match self {
            Node::Var { kind, index } => f(*kind, *index).unwrap_or_else(|| self.clone()),
            Node::Num { .. } | Node::Const(_) => self.clone(),
            Node::Neg(a) => Node::Neg(go(a)),
            Node::Add(a, b) => Node::Add(go(a), go(b)),
            Node::Sub(a, b) => Node::Sub(go(a), go(b)),
            Node::Mul(a, b) => Node::Mul(go(a), go(b)),
            Node::Pow(a, b) => Node::Pow(go(a), go(b)),
            Node::Call(func, args) => {
                Node::Call(*func, args.iter().map(|a| a.map_vars(f)).collect())
            }
        }
    }

    fn visit(&self, f: &mut impl FnMut(&Node)) {
        f(self);
        match self {
            Node::Num { .. } | Node::Var { .. } | Node::Const(_) => {}
            Node::Neg(a) => a.visit(f),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Pow(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Node::Call(_, args) => args.iter().for_each(|a| a.visit(f)),
        }
    }
}

/// A parsed, sort-checked, real-valued expression.
///
/// Immutable after construction; evaluation is pure, so a `WeightExpr` can be
/// shared freely between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightExpr {
    root: Node,
    z_arity: usize,
    t_arity: usize,
    has_log: bool,
}

impl WeightExpr {
    /// Wrap an already sort-checked tree. Used by the parser and by tests that
    /// build trees directly.
    pub fn from_node(root: Node) -> Result<Self, ParseError> {
        parse::check_sorts(&root)?;
        Ok(Self::new_unchecked(root))
    }

    fn new_unchecked(root: Node) -> Self {
        let (mut z_arity, mut t_arity, mut has_log) = (0, 0, false);
        root.visit(&mut |n| match n {
            Node::Var {
                kind: VarKind::Z,
                index,
            } => z_arity = z_arity.max(*index),
            Node::Var {
                kind: VarKind::T,
                index,
            } => t_arity = t_arity.max(*index),
            Node::Call(Func::Log, _) => has_log = true,
            _ => {}
        });
        Self {
            root,
            z_arity,
            t_arity,
            has_log,
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Largest `z` index used (0 when no `z` variable appears).
    pub fn z_arity(&self) -> usize {
        self.z_arity
    }

    /// Largest `t` index used.
    pub fn t_arity(&self) -> usize {
        self.t_arity
    }

    pub fn depends_on_t(&self) -> bool {
        self.t_arity > 0
    }

    /// The constant expression `0`.
    pub fn zero() -> Self {
        Self::new_unchecked(Node::num(0.0))
    }

    /// Replace the variable `kind`/`index` (1-based) by a complex constant.
    pub fn substitute(&self, kind: VarKind, index: usize, value: C64) -> WeightExpr {
        let root = self
            .root
            .map_vars(&|k, i| (k == kind && i == index).then(|| Node::complex(value)));
        Self::new_unchecked(root)
    }

    /// `self + other`.
    pub fn plus(&self, other: &WeightExpr) -> WeightExpr {
        Self::new_unchecked(Node::Add(
            Box::new(self.root.clone()),
            Box::new(other.root.clone()),
        ))
    }
}

impl FromStr for WeightExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}

impl fmt::Display for WeightExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_node(f, &self.root, 0)
    }
}
