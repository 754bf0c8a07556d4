//! Parser for the textual `name(arg, key=value, ...)` form used by kernels,
//! omega functions and generators.

use crate::error::{parse_err, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Num(f64),
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub name: String,
    pub args: Vec<(Option<String>, Arg)>,
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.ws();
        if p.pos != p.src.len() {
            return parse_err(format!("trailing input in `{text}` at byte {}", p.pos));
        }
        Ok(e)
    }

    pub fn positional(&self) -> impl Iterator<Item = &Arg> {
        self.args.iter().filter(|(k, _)| k.is_none()).map(|(_, a)| a)
    }

    pub fn keyword(&self, key: &str) -> Option<&Arg> {
        self.args
            .iter()
            .find(|(k, _)| k.as_deref() == Some(key))
            .map(|(_, a)| a)
    }

    /// Looks up an argument by keyword, falling back to the given positional slot.
    pub fn arg(&self, key: &str, slot: usize) -> Option<&Arg> {
        self.keyword(key).or_else(|| self.positional().nth(slot))
    }

    pub fn num(&self, key: &str, slot: usize, default: Option<f64>) -> Result<f64> {
        match self.arg(key, slot) {
            Some(Arg::Num(v)) => Ok(*v),
            Some(Arg::Expr(e)) if e.args.is_empty() => match e.name.as_str() {
                "inf" | "infinity" => Ok(f64::INFINITY),
                _ => parse_err(format!("`{}`: argument `{key}` must be a number", self.name)),
            },
            Some(_) => parse_err(format!("`{}`: argument `{key}` must be a number", self.name)),
            None => default.ok_or_else(|| {
                crate::Error::Parse(format!("`{}`: missing argument `{key}`", self.name))
            }),
        }
    }

    pub fn expr(&self, key: &str, slot: usize) -> Result<&Expr> {
        match self.arg(key, slot) {
            Some(Arg::Expr(e)) => Ok(e),
            _ => parse_err(format!("`{}`: argument `{key}` must be a spec", self.name)),
        }
    }

    /// Rejects keywords outside `allowed` and more than `max_positional` positional args.
    pub fn check(&self, allowed: &[&str], max_positional: usize) -> Result<()> {
        for (k, _) in &self.args {
            if let Some(k) = k {
                if !allowed.contains(&k.as_str()) {
                    return parse_err(format!("`{}`: unknown argument `{k}`", self.name));
                }
            }
        }
        if self.positional().count() > max_positional {
            return parse_err(format!("`{}`: too many arguments", self.name));
        }
        Ok(())
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name)?;
        if self.args.is_empty() {
            return Ok(());
        }
        write!(f, "(")?;
        for (i, (k, a)) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            if let Some(k) = k {
                write!(f, "{k}=")?;
            }
            match a {
                Arg::Num(v) => write!(f, "{v}")?,
                Arg::Expr(e) => write!(f, "{e}")?,
            }
        }
        write!(f, ")")
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn ident(&mut self) -> Option<String> {
        self.ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' || (c == b'.' && self.pos > start) {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start || !self.src[start].is_ascii_alphabetic() {
            self.pos = start;
            return None;
        }
        Some(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<f64> {
        self.ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            let sign_ok = (c == b'-' || c == b'+')
                && (self.pos == start || matches!(self.src[self.pos - 1], b'e' | b'E'));
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || sign_ok {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = String::from_utf8_lossy(&self.src[start..self.pos]);
        text.parse::<f64>()
            .or_else(|_| parse_err(format!("bad number `{text}` at byte {start}")))
    }

    fn expr(&mut self) -> Result<Expr> {
        let name = match self.ident() {
            Some(n) => n,
            None => return parse_err(format!("expected a name at byte {}", self.pos)),
        };
        let mut args = Vec::new();
        self.ws();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            self.ws();
            if self.peek() == Some(b')') {
                self.pos += 1;
                return Ok(Expr { name, args });
            }
            loop {
                args.push(self.arg()?);
                self.ws();
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return parse_err(format!("expected `,` or `)` at byte {}", self.pos)),
                }
            }
        }
        Ok(Expr { name, args })
    }

    fn arg(&mut self) -> Result<(Option<String>, Arg)> {
        self.ws();
        let save = self.pos;
        if let Some(id) = self.ident() {
            self.ws();
            if self.peek() == Some(b'=') {
                self.pos += 1;
                return Ok((Some(id), self.value()?));
            }
        }
        self.pos = save;
        Ok((None, self.value()?))
    }

    fn value(&mut self) -> Result<Arg> {
        self.ws();
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => Ok(Arg::Expr(self.expr()?)),
            Some(_) => Ok(Arg::Num(self.number()?)),
            None => parse_err("unexpected end of input"),
        }
    }
}
