//! Recursive-descent parser for the supported query shape:
//!
//! ```sql
//! SELECT A, AGGR(B) FROM D [WHERE l <= C <= r] GROUP BY A [;]
//! ```
//!
//! Keywords are case-insensitive, the two select items may appear in either
//! order, and `COUNT(*)` is accepted. Anything else fails with the byte
//! offset and the tokens that would have been accepted there.

use std::fmt;

use thiserror::Error;

use super::{AggFn, Predicate, QuerySpec};

#[derive(Debug, Error, PartialEq)]
#[error("parse error at byte {offset}: expected {}, found {found}", expected.join(" | "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Comma,
    LParen,
    RParen,
    Star,
    Le,
    Semicolon,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Number(n) => write!(f, "number {n}"),
            Tok::Comma => write!(f, "','"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::Star => write!(f, "'*'"),
            Tok::Le => write!(f, "'<='"),
            Tok::Semicolon => write!(f, "';'"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn error(&self, offset: usize, expected: &[&str], found: impl Into<String>) -> ParseError {
        ParseError {
            offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: found.into(),
        }
    }

    fn tokens(&mut self) -> Result<Vec<(usize, Tok)>, ParseError> {
        let bytes = self.src.as_bytes();
        let mut out = Vec::new();
        while self.pos < bytes.len() {
            let c = bytes[self.pos] as char;
            let start = self.pos;
            match c {
                ' ' | '\t' | '\r' | '\n' => {
                    self.pos += 1;
                }
                ',' => {
                    out.push((start, Tok::Comma));
                    self.pos += 1;
                }
                '(' => {
                    out.push((start, Tok::LParen));
                    self.pos += 1;
                }
                ')' => {
                    out.push((start, Tok::RParen));
                    self.pos += 1;
                }
                '*' => {
                    out.push((start, Tok::Star));
                    self.pos += 1;
                }
                ';' => {
                    out.push((start, Tok::Semicolon));
                    self.pos += 1;
                }
                '<' => {
                    if bytes.get(self.pos + 1) == Some(&b'=') {
                        out.push((start, Tok::Le));
                        self.pos += 2;
                    } else {
                        return Err(self.error(start, &["'<='"], "'<'"));
                    }
                }
                'a'..='z' | 'A'..='Z' | '_' => {
                    let mut end = self.pos + 1;
                    while end < bytes.len()
                        && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                    {
                        end += 1;
                    }
                    out.push((start, Tok::Ident(self.src[start..end].to_string())));
                    self.pos = end;
                }
                '0'..='9' | '.' | '-' | '+' => {
                    let mut end = self.pos;
                    if bytes[end] == b'-' || bytes[end] == b'+' {
                        end += 1;
                    }
                    let digits_start = end;
                    while end < bytes.len() && bytes[end].is_ascii_digit() {
                        end += 1;
                    }
                    if end < bytes.len() && bytes[end] == b'.' {
                        end += 1;
                        while end < bytes.len() && bytes[end].is_ascii_digit() {
                            end += 1;
                        }
                    }
                    if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                        let mut exp_end = end + 1;
                        if exp_end < bytes.len() && (bytes[exp_end] == b'-' || bytes[exp_end] == b'+')
                        {
                            exp_end += 1;
                        }
                        let exp_digits = exp_end;
                        while exp_end < bytes.len() && bytes[exp_end].is_ascii_digit() {
                            exp_end += 1;
                        }
                        if exp_end > exp_digits {
                            end = exp_end;
                        }
                    }
                    if end == digits_start {
                        return Err(self.error(start, &["a number"], format!("'{c}'")));
                    }
                    let text = &self.src[start..end];
                    let value: f64 = text
                        .parse()
                        .map_err(|_| self.error(start, &["a number"], format!("'{text}'")))?;
                    out.push((start, Tok::Number(value)));
                    self.pos = end;
                }
                other => {
                    return Err(self.error(start, &["a token"], format!("'{other}'")));
                }
            }
        }
        out.push((self.src.len(), Tok::Eof));
        Ok(out)
    }
}

struct TokenStream {
    toks: Vec<(usize, Tok)>,
    idx: usize,
}

impl TokenStream {
    fn peek(&self) -> &(usize, Tok) {
        &self.toks[self.idx]
    }

    fn next(&mut self) -> (usize, Tok) {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let (offset, tok) = self.peek();
        ParseError {
            offset: *offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.to_string(),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            (_, Tok::Ident(s)) if s.eq_ignore_ascii_case(kw) => {
                self.next();
                Ok(())
            }
            _ => Err(self.error(&[kw])),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            (_, Tok::Ident(s)) if !is_keyword(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn expect_number(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            (_, Tok::Number(v)) => {
                let v = *v;
                self.next();
                Ok(v)
            }
            _ => Err(self.error(&["a number"])),
        }
    }

    fn expect_tok(&mut self, tok: Tok, display: &str) -> Result<(), ParseError> {
        if self.peek().1 == tok {
            self.next();
            Ok(())
        } else {
            Err(self.error(&[display]))
        }
    }
}

fn is_keyword(s: &str) -> bool {
    ["select", "from", "where", "group", "by"]
        .iter()
        .any(|k| s.eq_ignore_ascii_case(k))
}

fn agg_fn(s: &str) -> Option<AggFn> {
    if s.eq_ignore_ascii_case("avg") {
        Some(AggFn::Avg)
    } else if s.eq_ignore_ascii_case("sum") {
        Some(AggFn::Sum)
    } else if s.eq_ignore_ascii_case("count") {
        Some(AggFn::Count)
    } else {
        None
    }
}

enum SelectItem {
    Column(String),
    Aggregate(AggFn, Option<String>),
}

fn select_item(ts: &mut TokenStream) -> Result<SelectItem, ParseError> {
    let (_, tok) = ts.peek().clone();
    match tok {
        Tok::Ident(name) => {
            if let Some(f) = agg_fn(&name) {
                ts.next();
                ts.expect_tok(Tok::LParen, "'('")?;
                let column = match ts.peek() {
                    (_, Tok::Star) if f == AggFn::Count => {
                        ts.next();
                        None
                    }
                    _ => Some(ts.expect_ident("a column name")?),
                };
                ts.expect_tok(Tok::RParen, "')'")?;
                Ok(SelectItem::Aggregate(f, column))
            } else if is_keyword(&name) {
                Err(ts.error(&["a column name", "AVG", "SUM", "COUNT"]))
            } else {
                ts.next();
                Ok(SelectItem::Column(name))
            }
        }
        _ => Err(ts.error(&["a column name", "AVG", "SUM", "COUNT"])),
    }
}

/// Parses one query. The grammar accepts both select orders
/// (`A, AGGR(B)` and `AGGR(B), A`); the GROUP BY column must repeat the
/// selected group column.
pub fn parse(sql: &str) -> Result<QuerySpec, ParseError> {
    let toks = Lexer::new(sql).tokens()?;
    let mut ts = TokenStream { toks, idx: 0 };

    ts.expect_keyword("select")?;
    let first = select_item(&mut ts)?;
    ts.expect_tok(Tok::Comma, "','")?;
    let second = select_item(&mut ts)?;
    let (group_column, agg, agg_column) = match (first, second) {
        (SelectItem::Column(g), SelectItem::Aggregate(f, c)) => (g, f, c),
        (SelectItem::Aggregate(f, c), SelectItem::Column(g)) => (g, f, c),
        (SelectItem::Column(_), SelectItem::Column(_)) => {
            return Err(ts.error(&["exactly one aggregate among the select items"]));
        }
        (SelectItem::Aggregate(..), SelectItem::Aggregate(..)) => {
            return Err(ts.error(&["exactly one plain column among the select items"]));
        }
    };

    ts.expect_keyword("from")?;
    let table = ts.expect_ident("a table name")?;

    let predicate = if matches!(ts.peek(), (_, Tok::Ident(s)) if s.eq_ignore_ascii_case("where")) {
        ts.next();
        let lo = ts.expect_number()?;
        ts.expect_tok(Tok::Le, "'<='")?;
        let column = ts.expect_ident("a column name")?;
        let le_offset = ts.peek().0;
        ts.expect_tok(Tok::Le, "'<='")?;
        let hi = ts.expect_number()?;
        if lo > hi {
            return Err(ParseError {
                offset: le_offset,
                expected: vec!["a range with lower <= upper".into()],
                found: format!("{lo} > {hi}"),
            });
        }
        Some(Predicate { column, lo, hi })
    } else {
        None
    };

    ts.expect_keyword("group")?;
    ts.expect_keyword("by")?;
    let by = ts.expect_ident("the group column")?;
    if by != group_column {
        return Err(ParseError {
            offset: ts.toks[ts.idx.saturating_sub(1)].0,
            expected: vec![format!("GROUP BY column '{group_column}' from the select list")],
            found: format!("'{by}'"),
        });
    }
    if ts.peek().1 == Tok::Semicolon {
        ts.next();
    }
    match ts.peek() {
        (_, Tok::Eof) => Ok(QuerySpec {
            agg,
            agg_column,
            group_column,
            table,
            predicate,
        }),
        _ => Err(ts.error(&["end of input"])),
    }
}

/// Canonical text for a spec; `parse(unparse(q)) == q`.
pub fn unparse(spec: &QuerySpec) -> String {
    let agg = match (&spec.agg, &spec.agg_column) {
        (AggFn::Count, None) => "COUNT(*)".to_string(),
        (f, Some(c)) => format!("{f}({c})"),
        (f, None) => format!("{f}(*)"),
    };
    let mut out = format!(
        "SELECT {}, {agg} FROM {}",
        spec.group_column, spec.table
    );
    if let Some(p) = &spec.predicate {
        out.push_str(&format!(" WHERE {} <= {} <= {}", p.lo, p.column, p.hi));
    }
    out.push_str(&format!(" GROUP BY {}", spec.group_column));
    out
}
