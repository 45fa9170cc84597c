use std::fmt;

use super::{Constant, Func, Node, VarKind, WeightExpr};

/// What went wrong while parsing.
#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    InvalidNumber(String),
    UnknownIdentifier(String),
    WrongArity {
        func: &'static str,
        expected: &'static str,
        found: usize,
    },
    /// A complex-valued subexpression where a real value is required.
    ComplexValued,
    /// Complex bases only accept non-negative integer literal exponents.
    ComplexPower,
}

/// Parse failure; `offset` is the 1-based byte position where it was detected
/// (`len + 1` for a premature end of input).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => write!(
                f,
                "syntax error at offset {}: unexpected character {c:?}",
                self.offset
            ),
            ParseErrorKind::UnexpectedToken(t) => {
                write!(f, "syntax error at offset {}: unexpected {t}", self.offset)
            }
            ParseErrorKind::UnexpectedEnd => write!(
                f,
                "syntax error at offset {}: unexpected end of input",
                self.offset
            ),
            ParseErrorKind::InvalidNumber(s) => write!(
                f,
                "syntax error at offset {}: invalid number {s:?}",
                self.offset
            ),
            ParseErrorKind::UnknownIdentifier(s) => {
                write!(f, "unknown identifier {s:?} at offset {}", self.offset)
            }
            ParseErrorKind::WrongArity {
                func,
                expected,
                found,
            } => {
                write!(
                    f,
                    "{func} expects {expected} argument(s), found {found} (offset {})",
                    self.offset
                )
            }
            ParseErrorKind::ComplexValued => write!(
                f,
                "complex-valued subexpression at offset {} must be wrapped in re, im or abs2",
                self.offset
            ),
            ParseErrorKind::ComplexPower => write!(
                f,
                "a complex base at offset {} needs a non-negative integer exponent",
                self.offset
            ),
        }
    }
}

/// Parse and sort-check an expression.
pub fn parse_expr(text: &str) -> Result<WeightExpr, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.len() + 1,
    };
    let (node, sort, start) = p.expr()?;
    if let Some(tok) = p.peek() {
        return Err(ParseError {
            kind: ParseErrorKind::UnexpectedToken(tok.tok.describe()),
            offset: tok.offset,
        });
    }
    if sort == Sort::Complex {
        return Err(ParseError {
            kind: ParseErrorKind::ComplexValued,
            offset: start,
        });
    }
    Ok(WeightExpr::new_unchecked(node))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(_, s) => format!("number {s}"),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let offset = i + 1;
        let simple = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, offset });
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s = &text[start..i];
            let value: f64 = s.parse().map_err(|_| ParseError {
                kind: ParseErrorKind::InvalidNumber(s.to_string()),
                offset,
            })?;
            out.push(Token {
                tok: Tok::Num(value, s.to_string()),
                offset,
            });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(text[start..i].to_string()),
                offset,
            });
        } else {
            let ch = text[i..].chars().next().unwrap_or('\u{fffd}');
            return Err(ParseError {
                kind: ParseErrorKind::UnexpectedChar(ch),
                offset,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum Sort {
    Real,
    Complex,
}

fn join(a: Sort, b: Sort) -> Sort {
    if a == Sort::Complex || b == Sort::Complex {
        Sort::Complex
    } else {
        Sort::Real
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

type Parsed = (Node, Sort, usize);

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_tok(&self) -> Option<&Tok> {
        self.peek().map(|t| &t.tok)
    }

    fn next(&mut self) -> Result<Token, ParseError> {
        let t = self.tokens.get(self.pos).cloned().ok_or(ParseError {
            kind: ParseErrorKind::UnexpectedEnd,
            offset: self.end,
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        let t = self.next()?;
        if t.tok == want {
            Ok(())
        } else {
            Err(ParseError {
                kind: ParseErrorKind::UnexpectedToken(t.tok.describe()),
                offset: t.offset,
            })
        }
    }

    fn expr(&mut self) -> Result<Parsed, ParseError> {
        let (mut lhs, mut sort, start) = self.term()?;
        loop {
            let op = match self.peek_tok() {
                Some(Tok::Plus) => Tok::Plus,
                Some(Tok::Minus) => Tok::Minus,
                _ => break,
            };
            self.pos += 1;
            let (rhs, rs, _) = self.term()?;
            sort = join(sort, rs);
            lhs = if op == Tok::Plus {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok((lhs, sort, start))
    }

    fn term(&mut self) -> Result<Parsed, ParseError> {
        let (mut lhs, mut sort, start) = self.power()?;
        while let Some(Tok::Star) = self.peek_tok() {
            self.pos += 1;
            let (rhs, rs, _) = self.power()?;
            sort = join(sort, rs);
            lhs = Node::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok((lhs, sort, start))
    }

    fn power(&mut self) -> Result<Parsed, ParseError> {
        let (base, bs, start) = self.unary()?;
        if let Some(Tok::Caret) = self.peek_tok() {
            self.pos += 1;
            let (exp, es, eoff) = self.power()?;
            if es == Sort::Complex {
                return Err(ParseError {
                    kind: ParseErrorKind::ComplexValued,
                    offset: eoff,
                });
            }
            if bs == Sort::Complex && !is_nonneg_integer_literal(&exp) {
                return Err(ParseError {
                    kind: ParseErrorKind::ComplexPower,
                    offset: eoff,
                });
            }
            return Ok((Node::Pow(Box::new(base), Box::new(exp)), bs, start));
        }
        Ok((base, bs, start))
    }

    fn unary(&mut self) -> Result<Parsed, ParseError> {
        if let Some(Tok::Minus) = self.peek_tok() {
            let offset = self.next()?.offset;
            let (inner, sort, _) = self.unary()?;
            return Ok((Node::Neg(Box::new(inner)), sort, offset));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Parsed, ParseError> {
        let t = self.next()?;
        match t.tok {
            Tok::Num(value, text) => Ok((
                Node::Num {
                    value,
                    text: Some(text),
                },
                Sort::Real,
                t.offset,
            )),
            Tok::LParen => {
                let (inner, sort, _) = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok((inner, sort, t.offset))
            }
            Tok::Ident(name) => {
                if let Some(Tok::LParen) = self.peek_tok() {
                    let func = Func::from_name(&name).ok_or(ParseError {
                        kind: ParseErrorKind::UnknownIdentifier(name.clone()),
                        offset: t.offset,
                    })?;
                    self.pos += 1;
                    let mut args = Vec::new();
                    loop {
                        args.push(self.expr()?);
                        match self.next()? {
                            Token {
                                tok: Tok::Comma, ..
                            } => continue,
                            Token {
                                tok: Tok::RParen, ..
                            } => break,
                            other => {
                                return Err(ParseError {
                                    kind: ParseErrorKind::UnexpectedToken(other.tok.describe()),
                                    offset: other.offset,
                                })
                            }
                        }
                    }
                    check_arity(func, args.len(), t.offset)?;
                    if matches!(func, Func::Log | Func::Exp | Func::Max) {
                        if let Some((_, _, off)) = args.iter().find(|(_, s, _)| *s == Sort::Complex)
                        {
                            return Err(ParseError {
                                kind: ParseErrorKind::ComplexValued,
                                offset: *off,
                            });
                        }
                    }
                    let nodes = args.into_iter().map(|(n, _, _)| n).collect();
                    Ok((Node::Call(func, nodes), Sort::Real, t.offset))
                } else {
                    let (node, sort) = symbol(&name).ok_or(ParseError {
                        kind: ParseErrorKind::UnknownIdentifier(name.clone()),
                        offset: t.offset,
                    })?;
                    Ok((node, sort, t.offset))
                }
            }
            other => Err(ParseError {
                kind: ParseErrorKind::UnexpectedToken(other.describe()),
                offset: t.offset,
            }),
        }
    }
}

fn is_nonneg_integer_literal(n: &Node) -> bool {
    matches!(n, Node::Num { value, .. } if value.fract() == 0.0 && *value >= 0.0 && *value <= 1024.0)
}

fn check_arity(func: Func, found: usize, offset: usize) -> Result<(), ParseError> {
    let ok = match func {
        Func::Max => found >= 2,
        _ => found == 1,
    };
    if ok {
        Ok(())
    } else {
        let expected = if func == Func::Max { "at least 2" } else { "1" };
        Err(ParseError {
            kind: ParseErrorKind::WrongArity {
                func: func.name(),
                expected,
                found,
            },
            offset,
        })
    }
}

fn symbol(name: &str) -> Option<(Node, Sort)> {
    match name {
        "i" => return Some((Node::Const(Constant::I), Sort::Complex)),
        "pi" => return Some((Node::Const(Constant::Pi), Sort::Real)),
        _ => {}
    }
    let (kind, digits) = match name.as_bytes().first()? {
        b'z' => (VarKind::Z, &name[1..]),
        b't' => (VarKind::T, &name[1..]),
        _ => return None,
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    let index: usize = digits.parse().ok()?;
    Some((Node::Var { kind, index }, Sort::Complex))
}

/// Sort-check a tree built outside the parser. Offsets are reported as 0.
pub(super) fn check_sorts(root: &Node) -> Result<(), ParseError> {
    fn sort(n: &Node) -> Result<Sort, ParseErrorKind> {
        Ok(match n {
            Node::Num { value, .. } if *value < 0.0 || !value.is_finite() => {
                return Err(ParseErrorKind::InvalidNumber(value.to_string()))
            }
            Node::Num { .. } | Node::Const(Constant::Pi) => Sort::Real,
            Node::Const(Constant::I) => Sort::Complex,
            Node::Var { index, .. } => {
                if *index == 0 {
                    return Err(ParseErrorKind::UnknownIdentifier("index 0".into()));
                }
                Sort::Complex
            }
            Node::Neg(a) => sort(a)?,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => join(sort(a)?, sort(b)?),
            Node::Pow(a, b) => {
                let (sa, sb) = (sort(a)?, sort(b)?);
                if sb == Sort::Complex {
                    return Err(ParseErrorKind::ComplexValued);
                }
                if sa == Sort::Complex && !is_nonneg_integer_literal(b) {
                    return Err(ParseErrorKind::ComplexPower);
                }
                sa
            }
            Node::Call(f, args) => {
                check_arity(*f, args.len(), 0).map_err(|e| e.kind)?;
                for a in args {
                    let s = sort(a)?;
                    if s == Sort::Complex && matches!(f, Func::Log | Func::Exp | Func::Max) {
                        return Err(ParseErrorKind::ComplexValued);
                    }
                }
                Sort::Real
            }
        })
    }
    match sort(root) {
        Ok(Sort::Real) => Ok(()),
        Ok(Sort::Complex) => Err(ParseError {
            kind: ParseErrorKind::ComplexValued,
            offset: 0,
        }),
        Err(kind) => Err(ParseError { kind, offset: 0 }),
    }
}
