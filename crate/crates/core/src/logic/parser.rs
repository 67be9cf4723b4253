//! Concrete syntax.
//!
//! Grammar (ASCII), loosest to tightest: `<->` (right), `->` (right),
//! `|` (left), `&` (left), `!` (prefix). Atoms: `true`, `false`, `t1 = t2`,
//! `R(t1,...,tk)`, parenthesized formulas. Quantifiers `forall x. f`,
//! `exists x. f`, and the sugar `exists>=N x. f` scope as far right as
//! possible and must be parenthesized in operand position.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{expand_counting, Formula, Signature, SignatureError, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at column {pos}: {message}")]
pub struct ParseError {
    /// 1-based character position in the input.
    pub pos: usize,
    pub message: String,
}

impl ParseError {
    fn new(pos: usize, message: impl Into<String>) -> Self {
        ParseError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(usize),
    True,
    False,
    ForAll,
    Exists,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Eq,
    Geq,
    LParen,
    RParen,
    Comma,
    Dot,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::ForAll => "`forall`".into(),
            Tok::Exists => "`exists`".into(),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Geq => "`>=`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
        }
    }
}

fn lex(input: &str, allow_params: bool) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let pos = i + 1;
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '(' => {
                out.push((pos, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((pos, Tok::RParen));
                i += 1;
            }
            ',' => {
                out.push((pos, Tok::Comma));
                i += 1;
            }
            '.' => {
                out.push((pos, Tok::Dot));
                i += 1;
            }
            '=' => {
                out.push((pos, Tok::Eq));
                i += 1;
            }
            '!' => {
                out.push((pos, Tok::Not));
                i += 1;
            }
            '&' => {
                out.push((pos, Tok::And));
                i += 1;
            }
            '|' => {
                out.push((pos, Tok::Or));
                i += 1;
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    out.push((pos, Tok::Implies));
                    i += 2;
                } else {
                    return Err(ParseError::new(pos, "expected `->`"));
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
                    out.push((pos, Tok::Iff));
                    i += 3;
                } else {
                    return Err(ParseError::new(pos, "expected `<->`"));
                }
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    out.push((pos, Tok::Geq));
                    i += 2;
                } else {
                    return Err(ParseError::new(pos, "expected `>=`"));
                }
            }
            '#' if allow_params => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i == start + 1 {
                    return Err(ParseError::new(pos, "expected digits after `#`"));
                }
                out.push((pos, Tok::Ident(chars[start..i].iter().collect())));
            }
            _ if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let n = text
                    .parse::<usize>()
                    .map_err(|_| ParseError::new(pos, "integer too large"))?;
                out.push((pos, Tok::Int(n)));
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = match word.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "forall" => Tok::ForAll,
                    "exists" => Tok::Exists,
                    _ => Tok::Ident(word),
                };
                out.push((pos, tok));
            }
            _ => {
                return Err(ParseError::new(pos, format!("unexpected character `{c}`")));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    sig: &'a Signature,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.at).cloned();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok) -> Result<(), ParseError> {
        match self.next() {
            Some((_, tok)) if &tok == want => Ok(()),
            Some((pos, tok)) => Err(ParseError::new(
                pos,
                format!("expected {}, found {}", want.describe(), tok.describe()),
            )),
            None => Err(ParseError::new(
                self.end,
                format!("expected {}, found end of input", want.describe()),
            )),
        }
    }

    fn ident(&mut self) -> Result<(usize, String), ParseError> {
        match self.next() {
            Some((pos, Tok::Ident(s))) => Ok((pos, s)),
            Some((pos, tok)) => Err(ParseError::new(
                pos,
                format!("expected identifier, found {}", tok.describe()),
            )),
            None => Err(ParseError::new(
                self.end,
                "expected identifier, found end of input",
            )),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::ForAll) | Some(Tok::Exists) => self.quantified(),
            _ => self.iff(),
        }
    }

    fn quantified(&mut self) -> Result<Formula, ParseError> {
        let (_, tok) = self.next().expect("peeked");
        match tok {
            Tok::ForAll => {
                let (_, v) = self.ident()?;
                self.expect(&Tok::Dot)?;
                let body = self.formula()?;
                Ok(Formula::forall(v, body))
            }
            Tok::Exists => {
                if self.peek() == Some(&Tok::Geq) {
                    self.next();
                    let n = match self.next() {
                        Some((_, Tok::Int(n))) => n,
                        Some((pos, tok)) => {
                            return Err(ParseError::new(
                                pos,
                                format!("expected integer, found {}", tok.describe()),
                            ))
                        }
                        None => {
                            return Err(ParseError::new(
                                self.end,
                                "expected integer, found end of input",
                            ))
                        }
                    };
                    let (_, v) = self.ident()?;
                    self.expect(&Tok::Dot)?;
                    let body = self.formula()?;
                    Ok(expand_counting(n, &v, &body))
                } else {
                    let (_, v) = self.ident()?;
                    self.expect(&Tok::Dot)?;
                    let body = self.formula()?;
                    Ok(Formula::exists(v, body))
                }
            }
            _ => unreachable!(),
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let left = self.implies()?;
        if self.peek() == Some(&Tok::Iff) {
            self.next();
            let right = self.iff_or_quantified()?;
            Ok(left.iff(right))
        } else {
            Ok(left)
        }
    }

    fn iff_or_quantified(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::ForAll) | Some(Tok::Exists) => self.quantified(),
            _ => self.iff(),
        }
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let left = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            self.next();
            let right = match self.peek() {
                Some(Tok::ForAll) | Some(Tok::Exists) => self.quantified()?,
                _ => self.implies()?,
            };
            Ok(left.implies(right))
        } else {
            Ok(left)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.next();
            let rhs = self.and()?;
            acc = acc.or(rhs);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.next();
            let rhs = self.unary()?;
            acc = acc.and(rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.peek() == Some(&Tok::Not) {
            self.next();
            let inner = self.unary()?;
            Ok(Formula::not(inner))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::True) => {
                self.next();
                Ok(Formula::True)
            }
            Some(Tok::False) => {
                self.next();
                Ok(Formula::False)
            }
            Some(Tok::LParen) => {
                self.next();
                let inner = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(inner)
            }
            Some(Tok::Ident(_)) => {
                let (pos, name) = self.ident()?;
                if self.peek() == Some(&Tok::LParen) {
                    // relation application
                    let arity = self.sig.arity(&name).ok_or_else(|| {
                        ParseError::new(pos, format!("unknown relation symbol `{name}`"))
                    })?;
                    self.next();
                    let mut args = Vec::new();
                    if self.peek() != Some(&Tok::RParen) {
                        loop {
                            args.push(self.term()?);
                            if self.peek() == Some(&Tok::Comma) {
                                self.next();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(&Tok::RParen)?;
                    if args.len() != arity {
                        return Err(ParseError::new(
                            pos,
                            format!(
                                "relation `{name}` has arity {arity}, applied to {} arguments",
                                args.len()
                            ),
                        ));
                    }
                    Ok(Formula::Rel(name, args))
                } else {
                    // equation
                    let left = self.resolve_term(name);
                    self.expect(&Tok::Eq)?;
                    let right = self.term()?;
                    Ok(Formula::Equal(left, right))
                }
            }
            Some(tok) => Err(ParseError::new(
                self.pos(),
                format!("expected a formula, found {}", tok.describe()),
            )),
            None => Err(ParseError::new(
                self.end,
                "expected a formula, found end of input",
            )),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let (_, name) = self.ident()?;
        Ok(self.resolve_term(name))
    }

    /// An identifier denotes a constant exactly when the signature declares it;
    /// otherwise it is a variable.
    fn resolve_term(&self, name: String) -> Term {
        if self.sig.has_constant(&name) || name.starts_with('#') {
            Term::Const(name)
        } else {
            Term::Var(name)
        }
    }
}

/// Parses a formula in the concrete grammar against a signature.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    parse_inner(text, sig, false)
}

/// Like [`parse_formula`] but additionally accepts `#N` witness constants;
/// used when replaying proof traces.
pub fn parse_formula_with_params(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    parse_inner(text, sig, true)
}

fn parse_inner(text: &str, sig: &Signature, allow_params: bool) -> Result<Formula, ParseError> {
    let toks = lex(text, allow_params)?;
    let end = text.chars().count() + 1;
    let mut p = Parser {
        toks,
        at: 0,
        sig,
        end,
    };
    let f = p.formula()?;
    if let Some((pos, tok)) = p.next() {
        return Err(ParseError::new(
            pos,
            format!("unexpected trailing {}", tok.describe()),
        ));
    }
    Ok(f)
}

#[derive(Debug, Error)]
pub enum SignatureFileError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] SignatureError),
}

/// Parses a signature document: one `relation NAME/ARITY` or `constant NAME`
/// per line; blank lines and `#` comments allowed.
pub fn parse_signature(name: &str, text: &str) -> Result<Signature, SignatureFileError> {
    let mut relations = BTreeMap::new();
    let mut constants = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let kind = parts.next().unwrap();
        let rest = parts.next().ok_or_else(|| SignatureFileError::Malformed {
            line,
            message: format!("`{kind}` needs an argument"),
        })?;
        if parts.next().is_some() {
            return Err(SignatureFileError::Malformed {
                line,
                message: "trailing tokens".into(),
            });
        }
        match kind {
            "relation" => {
                let (rname, arity) =
                    rest.split_once('/')
                        .ok_or_else(|| SignatureFileError::Malformed {
                            line,
                            message: "expected NAME/ARITY".into(),
                        })?;
                let arity: usize =
                    arity
                        .parse()
                        .map_err(|_| SignatureFileError::Malformed {
                            line,
                            message: format!("bad arity `{arity}`"),
                        })?;
                relations.insert(rname.to_string(), arity);
            }
            "constant" => constants.push(rest.to_string()),
            other => {
                return Err(SignatureFileError::Malformed {
                    line,
                    message: format!("unknown directive `{other}`"),
                })
            }
        }
    }
    Ok(Signature::new(name, relations, constants)?)
}
