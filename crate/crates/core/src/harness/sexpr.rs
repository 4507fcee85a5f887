//! The textual term format: prefix s-expressions such as
//! `(+ (op mul x1 x2) (neg (op mul x2 x1)))`.
//!
//! Atoms are variables `x1, x2, …` and `zero`; compound forms are `(+ a b)`,
//! `(neg a)`, `(zero)` and `(op NAME args…)` for `Ω` symbols.

use thiserror::Error;

use crate::signature::{Op, Signature, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at byte {offset}: {message}")]
pub struct TermParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(text: &str) -> Vec<(usize, Tok<'_>)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        let delim = ch == '(' || ch == ')' || ch.is_whitespace();
        if delim {
            if let Some(s) = start.take() {
                out.push((s, Tok::Atom(&text[s..i])));
            }
            match ch {
                '(' => out.push((i, Tok::Open)),
                ')' => out.push((i, Tok::Close)),
                _ => {}
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, Tok::Atom(&text[s..])));
    }
    out
}

struct Parser<'a, 's> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    end: usize,
    sig: &'s Signature,
}

impl<'a> Parser<'a, '_> {
    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, TermParseError> {
        Err(TermParseError {
            offset,
            message: message.into(),
        })
    }

    fn next(&mut self) -> Result<(usize, Tok<'a>), TermParseError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => self.err(self.end, "unexpected end of term"),
        }
    }

    fn term(&mut self) -> Result<Term, TermParseError> {
        let (at, tok) = self.next()?;
        match tok {
            Tok::Close => self.err(at, "unexpected `)`"),
            Tok::Atom(a) => self.atom(at, a),
            Tok::Open => {
                let (hat, head) = self.next()?;
                let head = match head {
                    Tok::Atom(h) => h,
                    _ => return self.err(hat, "expected an operator after `(`"),
                };
                let (op, name) = match head {
                    "+" => (Op::Add, "+"),
                    "neg" | "-" | "−" => (Op::Neg, "neg"),
                    "zero" | "0" => (Op::Zero, "zero"),
                    "op" => {
                        let (nat, name) = self.next()?;
                        let name = match name {
                            Tok::Atom(n) => n,
                            _ => return self.err(nat, "expected a symbol name after `op`"),
                        };
                        match self.sig.lookup(name) {
                            Some(op @ Op::Omega(_)) => (op, name),
                            _ => return self.err(nat, format!("unknown operation symbol `{name}`")),
                        }
                    }
                    other => {
                        return self.err(
                            hat,
                            format!("unknown operator `{other}`; Ω symbols are written (op NAME …)"),
                        )
                    }
                };
                let mut args = Vec::new();
                loop {
                    match self.toks.get(self.pos) {
                        Some((_, Tok::Close)) => {
                            self.pos += 1;
                            break;
                        }
                        Some(_) => args.push(self.term()?),
                        None => return self.err(self.end, "missing `)`"),
                    }
                }
                let arity = self.sig.arity(op).expect("resolved above");
                if args.len() != arity {
                    return self.err(hat, format!("`{name}` takes {arity} arguments, got {}", args.len()));
                }
                Ok(Term::App(op, args))
            }
        }
    }

    fn atom(&self, at: usize, a: &str) -> Result<Term, TermParseError> {
        if a == "zero" || a == "0" {
            return Ok(Term::zero());
        }
        if let Some(k) = a.strip_prefix('x') {
            if let Ok(i) = k.parse::<u32>() {
                if i >= 1 {
                    return Ok(Term::var(i));
                }
            }
            return self.err(at, format!("bad variable `{a}`; variables are x1, x2, …"));
        }
        match self.sig.lookup(a) {
            Some(Op::Omega(_)) => self.err(at, format!("write `(op {a} …)` to apply `{a}`")),
            _ => self.err(at, format!("unexpected atom `{a}`")),
        }
    }
}

/// Parses one term, checking symbols and arities against `sig`.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, TermParseError> {
    let mut p = Parser {
        toks: tokenize(text),
        pos: 0,
        end: text.len(),
        sig,
    };
    let t = p.term()?;
    if let Some((at, _)) = p.toks.get(p.pos) {
        return p.err(*at, "trailing input after the term");
    }
    Ok(t)
}
