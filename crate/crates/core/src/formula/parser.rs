//! Recursive-descent parser for the textual formula grammar.
//!
//! ```text
//! formula := disj ("->" formula)?
//! disj    := conj ("||" conj)*
//! conj    := unary ("&&" unary)*
//! unary   := "!" unary | "G[" int "," int "]" unary | "F[" int "," int "]" unary
//!          | atom "U[" int "," int "]" atom | atom
//! atom    := "(" formula ")" | ident cmp number | "true" | "false" | ident
//! cmp     := ">" | "<"
//! ```
//!
//! A bare identifier is a region name and is expanded through a [`RegionTable`].

use super::{Direction, Formula, Interval, Predicate, RegionTable};
use crate::error::ParseError;

type PResult<T> = std::result::Result<T, ParseError>;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Bang,
    AndAnd,
    OrOr,
    Arrow,
    Gt,
    Lt,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Bang => "`!`".into(),
            Tok::AndAnd => "`&&`".into(),
            Tok::OrOr => "`||`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> PResult<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'[' => out.push((Tok::LBracket, start)),
            b']' => out.push((Tok::RBracket, start)),
            b',' => out.push((Tok::Comma, start)),
            b'!' => out.push((Tok::Bang, start)),
            b'>' => out.push((Tok::Gt, start)),
            b'<' => out.push((Tok::Lt, start)),
            b'&' | b'|' => {
                if bytes.get(i + 1) != Some(&c) {
                    return Err(ParseError::new(
                        start,
                        format!("expected `{0}{0}`", c as char),
                    ));
                }
                out.push((if c == b'&' { Tok::AndAnd } else { Tok::OrOr }, start));
                i += 2;
                continue;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((Tok::Arrow, start));
                i += 2;
                continue;
            }
            b'-' | b'+' | b'.' | b'0'..=b'9' => {
                i += 1;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == b'.'
                        || bytes[i] == b'e'
                        || bytes[i] == b'E'
                        || ((bytes[i] == b'-' || bytes[i] == b'+')
                            && matches!(bytes[i - 1], b'e' | b'E')))
                {
                    i += 1;
                }
                out.push((Tok::Number(text[start..i].to_string()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::new(start, format!("unexpected character `{ch}`")));
            }
        }
        i += 1;
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    regions: Option<&'a RegionTable>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let idx = (self.pos + ahead).min(self.toks.len() - 1);
        &self.toks[idx].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> PResult<usize> {
        let (tok, at) = self.bump();
        if tok == want {
            Ok(at)
        } else {
            Err(ParseError::new(
                at,
                format!("expected {}, found {}", want.describe(), tok.describe()),
            ))
        }
    }

    fn is_temporal_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw) && *self.peek_at(1) == Tok::LBracket
    }

    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.disj()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> PResult<Formula> {
        let mut subs = vec![self.conj()?];
        while *self.peek() == Tok::OrOr {
            self.bump();
            subs.push(self.conj()?);
        }
        Ok(if subs.len() == 1 {
            subs.pop().unwrap()
        } else {
            Formula::Or(subs)
        })
    }

    fn conj(&mut self) -> PResult<Formula> {
        let mut subs = vec![self.unary()?];
        while *self.peek() == Tok::AndAnd {
            self.bump();
            subs.push(self.unary()?);
        }
        Ok(if subs.len() == 1 {
            subs.pop().unwrap()
        } else {
            Formula::And(subs)
        })
    }

    fn unary(&mut self) -> PResult<Formula> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(Formula::not(self.unary()?));
        }
        if self.is_temporal_keyword("G") || self.is_temporal_keyword("F") {
            let (tok, _) = self.bump();
            let interval = self.interval()?;
            let sub = Box::new(self.unary()?);
            return Ok(match tok {
                Tok::Ident(s) if s == "G" => Formula::Globally { interval, sub },
                _ => Formula::Eventually { interval, sub },
            });
        }
        let lhs = self.atom()?;
        if self.is_temporal_keyword("U") {
            self.bump();
            let interval = self.interval()?;
            let rhs = self.atom()?;
            return Ok(Formula::Until {
                interval,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            });
        }
        Ok(lhs)
    }

    fn interval(&mut self) -> PResult<Interval> {
        let open = self.expect(Tok::LBracket)?;
        let a = self.index()?;
        self.expect(Tok::Comma)?;
        let b = self.index()?;
        self.expect(Tok::RBracket)?;
        Interval::new(a, b).map_err(|_| {
            ParseError::new(open, format!("interval [{a},{b}] must satisfy b > a"))
        })
    }

    fn index(&mut self) -> PResult<usize> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Number(s) => s.parse::<usize>().map_err(|_| {
                ParseError::new(at, format!("interval bound `{s}` is not a non-negative integer"))
            }),
            other => Err(ParseError::new(
                at,
                format!("expected interval bound, found {}", other.describe()),
            )),
        }
    }

    fn atom(&mut self) -> PResult<Formula> {
        let (tok, at) = self.bump();
        match tok {
            Tok::LParen => {
                let inner = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => match self.peek() {
                Tok::Gt | Tok::Lt => {
                    let direction = if self.bump().0 == Tok::Gt {
                        Direction::GreaterThan
                    } else {
                        Direction::LessThan
                    };
                    let threshold = self.number()?;
                    Predicate::new(name, direction, threshold.0)
                        .map(Formula::Predicate)
                        .map_err(|_| {
                            ParseError::new(
                                threshold.1,
                                format!("threshold {} outside [-1, 1]", threshold.0),
                            )
                        })
                }
                _ if name == "true" => Ok(Formula::True),
                _ if name == "false" => Ok(Formula::False),
                _ => self.region(&name, at),
            },
            other => Err(ParseError::new(
                at,
                format!("expected a formula, found {}", other.describe()),
            )),
        }
    }

    fn number(&mut self) -> PResult<(f64, usize)> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Number(s) => s
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(|v| (v, at))
                .ok_or_else(|| ParseError::new(at, format!("malformed number `{s}`"))),
            other => Err(ParseError::new(
                at,
                format!("expected a number, found {}", other.describe()),
            )),
        }
    }

    fn region(&self, name: &str, at: usize) -> PResult<Formula> {
        let table = self
            .regions
            .ok_or_else(|| ParseError::new(at, format!("unknown region `{name}`")))?;
        match table.expand(name) {
            Some(Ok(f)) => Ok(f),
            Some(Err(e)) => Err(ParseError::new(at, e.to_string())),
            None => Err(ParseError::new(at, format!("unknown region `{name}`"))),
        }
    }
}

fn run(text: &str, regions: Option<&RegionTable>) -> PResult<Formula> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        regions,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(ParseError::new(
            p.offset(),
            format!("unexpected {}", p.peek().describe()),
        ));
    }
    Ok(f)
}

/// Parses a formula that uses only explicit predicates.
pub fn parse(text: &str) -> PResult<Formula> {
    run(text, None)
}

/// Parses a formula, expanding bare identifiers through `regions`.
pub fn parse_with_regions(text: &str, regions: &RegionTable) -> PResult<Formula> {
    run(text, Some(regions))
}
