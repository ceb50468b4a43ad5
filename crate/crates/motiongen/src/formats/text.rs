//! Line-oriented text helpers shared by the file formats.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{parse_error, CliError, Result};

/// Shortest decimal that parses back to the same `f64`.
pub fn float(v: f64) -> String {
    format!("{v:?}")
}

pub fn push_floats(out: &mut String, values: impl IntoIterator<Item = f64>) {
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v:?}");
    }
    out.push('\n');
}

/// One meaningful line: 1-based number and whitespace-separated tokens.
#[derive(Debug, Clone)]
pub struct Line<'a> {
    pub number: usize,
    pub tokens: Vec<&'a str>,
}

/// Reader over the non-blank, non-comment lines of a file.
pub struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Peekable<Box<dyn Iterator<Item = Line<'a>> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    pub fn new(path: &'a Path, text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = Line<'a>> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| Line {
                    number: i + 1,
                    tokens: l.split_whitespace().collect(),
                })
                .filter(|l| l.tokens.first().is_some_and(|t| !t.starts_with('#'))),
        );
        Lines {
            path,
            inner: it.peekable(),
            last: 0,
        }
    }

    pub fn error(&self, line: usize, msg: impl std::fmt::Display) -> CliError {
        parse_error(self.path, line, msg)
    }

    pub fn next_line(&mut self) -> Option<Line<'a>> {
        let l = self.inner.next()?;
        self.last = l.number;
        Some(l)
    }

    pub fn peek_key(&mut self) -> Option<&'a str> {
        self.inner.peek().map(|l| l.tokens[0])
    }

    /// The next line, which must start with `key`; returns the remaining tokens.
    pub fn expect(&mut self, key: &str) -> Result<Line<'a>> {
        match self.next_line() {
            Some(l) if l.tokens[0] == key => Ok(l),
            Some(l) => Err(self.error(l.number, format!("expected `{key}`, found `{}`", l.tokens[0]))),
            None => Err(self.error(self.last + 1, format!("expected `{key}`, found end of file"))),
        }
    }

    /// Consumes a `key value` line if it comes next.
    pub fn optional(&mut self, key: &str) -> Result<Option<Line<'a>>> {
        if self.peek_key() == Some(key) {
            self.expect(key).map(Some)
        } else {
            Ok(None)
        }
    }

    /// A `key value` line parsed as `T`.
    pub fn value<T: FromStr>(&mut self, key: &str, what: &str) -> Result<T> {
        let l = self.expect(key)?;
        self.arity(&l, 2)?;
        self.field(&l, 1, what)
    }

    pub fn header(&mut self, magic: &str, version: u32) -> Result<()> {
        let l = self.expect(magic)?;
        let found: u32 = self.field(&l, 1, "schema version")?;
        if found != version {
            return Err(self.error(l.number, format!("unsupported schema version {found} (expected {version})")));
        }
        self.arity(&l, 2)
    }

    pub fn field<T: FromStr>(&self, line: &Line, index: usize, what: &str) -> Result<T> {
        let token = line
            .tokens
            .get(index)
            .ok_or_else(|| self.error(line.number, format!("missing {what}")))?;
        token
            .parse()
            .map_err(|_| self.error(line.number, format!("invalid {what} `{token}`")))
    }

    /// A finite float field.
    pub fn number(&self, line: &Line, index: usize, what: &str) -> Result<f64> {
        let v: f64 = self.field(line, index, what)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.error(line.number, format!("{what} must be finite")))
        }
    }

    pub fn arity(&self, line: &Line, count: usize) -> Result<()> {
        if line.tokens.len() == count {
            Ok(())
        } else {
            Err(self.error(
                line.number,
                format!("`{}` takes {} field(s), found {}", line.tokens[0], count - 1, line.tokens.len() - 1),
            ))
        }
    }

    /// Parses every token of `line` as a finite float, checking the count.
    pub fn floats(&self, line: &Line, count: usize) -> Result<Vec<f64>> {
        if line.tokens.len() != count {
            return Err(self.error(line.number, format!("expected {count} values, found {}", line.tokens.len())));
        }
        line.tokens
            .iter()
            .map(|t| match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(self.error(line.number, format!("invalid number `{t}`"))),
            })
            .collect()
    }

    pub fn finish(&mut self) -> Result<()> {
        match self.next_line() {
            None => Ok(()),
            Some(l) => Err(self.error(l.number, format!("unexpected `{}`", l.tokens[0]))),
        }
    }
}
