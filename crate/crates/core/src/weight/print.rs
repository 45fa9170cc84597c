use std::fmt::{self, Write};

use super::{Constant, Node, VarKind};

fn prec(n: &Node) -> u8 {
    match n {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) => 2,
        Node::Pow(..) => 3,
        Node::Neg(..) => 4,
        _ => 5,
    }
}

/// Print `n`, parenthesized when its precedence is below `min`.
pub(super) fn write_node(f: &mut fmt::Formatter<'_>, n: &Node, min: u8) -> fmt::Result {
    let paren = prec(n) < min;
    if paren {
        f.write_char('(')?;
    }
    match n {
        Node::Num { value, text } => match text {
            Some(t) => f.write_str(t)?,
            None => write!(f, "{value}")?,
        },
        Node::Var { kind, index } => {
            let c = if *kind == VarKind::Z { 'z' } else { 't' };
            write!(f, "{c}{index}")?
        }
        Node::Const(Constant::I) => f.write_str("i")?,
        Node::Const(Constant::Pi) => f.write_str("pi")?,
        Node::Neg(a) => {
            f.write_char('-')?;
            write_node(f, a, 4)?;
        }
        Node::Add(a, b) => {
            write_node(f, a, 1)?;
            f.write_str(" + ")?;
            write_node(f, b, 2)?;
        }
        Node::Sub(a, b) => {
            write_node(f, a, 1)?;
            f.write_str(" - ")?;
            write_node(f, b, 2)?;
        }
        Node::Mul(a, b) => {
            write_node(f, a, 2)?;
            f.write_str(" * ")?;
            write_node(f, b, 3)?;
        }
        Node::Pow(a, b) => {
            write_node(f, a, 4)?;
            f.write_char('^')?;
            write_node(f, b, 3)?;
        }
        Node::Call(func, args) => {
            write!(f, "{}(", func.name())?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_node(f, a, 0)?;
            }
            f.write_char(')')?;
        }
    }
    if paren {
        f.write_char(')')?;
    }
    Ok(())
}
