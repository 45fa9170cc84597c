use std::f64::consts::PI;

use super::{Constant, Func, Node, VarKind, WeightExpr};
use crate::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("variable {name} is unbound ({available} value(s) supplied)")]
    Unbound { name: String, available: usize },
}

impl WeightExpr {
    /// Check that `n` fiber and `k` parameter values bind every variable.
    pub fn check_bound(&self, n: usize, k: usize) -> Result<(), EvalError> {
        if self.z_arity > n {
            return Err(EvalError::Unbound {
                name: format!("z{}", self.z_arity),
                available: n,
            });
        }
        if self.t_arity > k {
            return Err(EvalError::Unbound {
                name: format!("t{}", self.t_arity),
                available: k,
            });
        }
        Ok(())
    }

    /// Evaluate at `(z, t)`. `log(0)` evaluates to `-inf`.
    pub fn eval(&self, z: &[C64], t: &[C64]) -> Result<f64, EvalError> {
        self.check_bound(z.len(), t.len())?;
        Ok(self.eval_bound(z, t))
    }

    /// Evaluate without the binding check; callers must have run
    /// [`check_bound`](Self::check_bound) for these slice lengths.
    pub(crate) fn eval_bound(&self, z: &[C64], t: &[C64]) -> f64 {
        eval_node(&self.root, z, t).re
    }

    /// Smallest argument of any `log` node at `(z, t)`, or `+inf` when the
    /// expression has no logarithm. Used to stay clear of log poles.
    pub(crate) fn min_log_argument(&self, z: &[C64], t: &[C64]) -> f64 {
        if !self.has_log {
            return f64::INFINITY;
        }
        let mut m = f64::INFINITY;
        min_log(&self.root, z, t, &mut m);
        m
    }
}

fn log_real(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln()
    }
}

fn eval_node(n: &Node, z: &[C64], t: &[C64]) -> C64 {
    match n {
        Node::Num { value, .. } => C64::new(*value, 0.0),
        Node::Var {
            kind: VarKind::Z,
            index,
        } => z[*index - 1],
        Node::Var {
            kind: VarKind::T,
            index,
        } => t[*index - 1],
        Node::Const(Constant::I) => C64::new(0.0, 1.0),
        Node::Const(Constant::Pi) => C64::new(PI, 0.0),
        Node::Neg(a) => -eval_node(a, z, t),
        Node::Add(a, b) => eval_node(a, z, t) + eval_node(b, z, t),
        Node::Sub(a, b) => eval_node(a, z, t) - eval_node(b, z, t),
        Node::Mul(a, b) => {
            let (x, y) = (eval_node(a, z, t), eval_node(b, z, t));
            if x.im == 0.0 && y.im == 0.0 {
                C64::new(x.re * y.re, 0.0)
            } else {
                x * y
            }
        }
        Node::Pow(a, b) => {
            let base = eval_node(a, z, t);
            let e = eval_node(b, z, t).re;
            if base.im == 0.0 {
                C64::new(base.re.powf(e), 0.0)
            } else {
                base.powi(e as i32)
            }
        }
        Node::Call(f, args) => {
            let real = match f {
                Func::Re => eval_node(&args[0], z, t).re,
                Func::Im => eval_node(&args[0], z, t).im,
                Func::Abs2 => eval_node(&args[0], z, t).norm_sqr(),
                Func::Log => log_real(eval_node(&args[0], z, t).re),
                Func::Exp => eval_node(&args[0], z, t).re.exp(),
                Func::Max => args
                    .iter()
                    .map(|a| eval_node(a, z, t).re)
                    .fold(f64::NEG_INFINITY, f64::max),
            };
            C64::new(real, 0.0)
        }
    }
}

fn min_log(n: &Node, z: &[C64], t: &[C64], m: &mut f64) {
    match n {
        Node::Call(Func::Log, args) => {
            *m = m.min(eval_node(&args[0], z, t).re);
            min_log(&args[0], z, t, m);
        }
        Node::Neg(a) => min_log(a, z, t, m),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Pow(a, b) => {
            min_log(a, z, t, m);
            min_log(b, z, t, m);
        }
        Node::Call(_, args) => args.iter().for_each(|a| min_log(a, z, t, m)),
        _ => {}
    }
}
