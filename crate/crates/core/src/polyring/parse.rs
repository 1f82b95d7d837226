//! Literal syntax: `c * v1^e1 * ... ` terms joined by `+`/`-`, rationals as `p/q`,
//! parentheses allowed.

use super::{Polynomial, Ring};
use crate::error::{Error, Result};
use crate::exactmath::Rational;
use num_bigint::BigInt;
use std::sync::Arc;

pub fn parse(ring: &Arc<Ring>, s: &str) -> Result<Polynomial> {
    let mut p = Parser { ring, s: s.as_bytes(), pos: 0 };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    ring: &'a Arc<Ring>,
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = Polynomial::zero(self.ring);
        let mut first = true;
        loop {
            let neg = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    false
                }
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                _ if first => false,
                _ => break,
            };
            first = false;
            let t = self.term()?;
            acc = if neg { &acc - &t } else { &acc + &t };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let k = self.digits().ok_or_else(|| self.err("expected exponent"))?;
            let k: u32 = k.parse().map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n: BigInt = self.digits().unwrap().parse().unwrap();
                let mut q = BigInt::from(1);
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    self.skip_ws();
                    q = self.digits().ok_or_else(|| self.err("expected denominator"))?.parse().unwrap();
                    if q == BigInt::from(0) {
                        return Err(self.err("zero denominator"));
                    }
                }
                Ok(Polynomial::constant(self.ring, Rational::new(n, q)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.s.len()
                    && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                match self.ring.index_of(name) {
                    Some(i) => Ok(Polynomial::var(self.ring, i)),
                    None => {
                        self.pos = start;
                        Err(self.err(&format!("unknown variable {name}")))
                    }
                }
            }
            _ => Err(self.err("expected a term")),
        }
    }
}
