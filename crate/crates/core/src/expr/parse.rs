//! Recursive-descent parser for the expression grammar:
//! identifiers, `+ - * / ^`, integer literals, `x[i]`, `y[mu]`,
//! `z[mu,(c1,...,cn)]`, declared function atoms, `diff(f,var)`,
//! `Int(f,var)`, `exp(e)`.

use num::BigInt;

use super::Expr;
use crate::context::JetContext;
use crate::coords::{FiberCoord, MultiIndex, VarRef};
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ctx: &'a JetContext,
}

/// Parse an expression string against a context. Round-trip through the
/// canonical printer is the identity on canonical forms.
pub fn parse_expr(text: &str, ctx: &JetContext) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        ctx,
    };
    let e = p.parse_sum()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src.get(self.pos).map(|&b| b as char)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c)))
        }
    }

    fn parse_sum(&mut self) -> Result<Expr> {
        let mut acc = if self.eat('-') {
            self.parse_product()?.neg()
        } else {
            self.parse_product()?
        };
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = acc.add(&self.parse_product()?);
                }
                Some('-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.parse_product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_product(&mut self) -> Result<Expr> {
        let mut acc = self.parse_power()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.parse_power()?);
                }
                Some('/') => {
                    self.pos += 1;
                    let pos = self.pos;
                    let rhs = self.parse_power()?;
                    acc = acc.div(&rhs).map_err(|e| match e {
                        Error::DivisorNotMonomial => Error::Syntax {
                            pos,
                            msg: "division by a non-monomial expression".into(),
                        },
                        other => other,
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_power(&mut self) -> Result<Expr> {
        let base = self.parse_unary()?;
        if self.eat('^') {
            let negative = self.eat('-');
            let pos = self.pos;
            let exp: i64 = self
                .parse_integer()?
                .try_into()
                .map_err(|_| Error::Syntax {
                    pos,
                    msg: "exponent out of range".into(),
                })?;
            let exp = if negative { -exp } else { exp };
            return base.pow(exp).map_err(|e| match e {
                Error::NegativePowerOfSum => Error::Syntax {
                    pos,
                    msg: "negative power of a non-monomial expression".into(),
                },
                other => other,
            });
        }
        Ok(base)
    }

    fn parse_unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(self.parse_unary()?.neg());
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.parse_sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let v = self.parse_integer()?;
                Ok(Expr::from_rational(num::BigRational::from_integer(v)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.parse_name(),
            _ => Err(self.err("expected expression")),
        }
    }

    fn parse_integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<BigInt>().map_err(|_| Error::Syntax {
            pos: start,
            msg: "bad integer".into(),
        })
    }

    fn parse_usize(&mut self) -> Result<usize> {
        let pos = self.pos;
        self.parse_integer()?
            .try_into()
            .map_err(|_| Error::Syntax {
                pos,
                msg: "index out of range".into(),
            })
    }

    fn parse_ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos] as char;
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(self.err("expected identifier"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string())
    }

    fn parse_name(&mut self) -> Result<Expr> {
        let start = self.pos;
        let name = self.parse_ident()?;
        match name.as_str() {
            "x" | "y" if self.peek() == Some('[') => {
                self.expect('[')?;
                let idx = self.parse_usize()?;
                self.expect(']')?;
                let (dim, kind): (usize, fn(usize) -> VarRef) = if name == "x" {
                    (self.ctx.base_dim(), VarRef::Base)
                } else {
                    (self.ctx.fiber_dim(), VarRef::Field)
                };
                if idx == 0 || idx > dim {
                    return Err(Error::IndexOutOfRange(format!("{}[{}]", name, idx)));
                }
                Ok(Expr::var(kind(idx - 1)))
            }
            "z" if self.peek() == Some('[') => {
                let v = self.parse_jet_ref()?;
                Ok(Expr::var(v))
            }
            "p" if self.peek() == Some('[') => {
                let (i, mu) = self.parse_pair()?;
                self.check_fiber(i, mu)?;
                Ok(Expr::fiber(FiberCoord::Pi(i - 1, mu - 1)))
            }
            "p" => Ok(Expr::fiber(FiberCoord::P)),
            "pm" if self.peek() == Some('[') => {
                self.expect('[')?;
                let mu = self.parse_usize()?;
                self.expect(']')?;
                self.check_field(mu)?;
                Ok(Expr::fiber(FiberCoord::Pmu(mu - 1)))
            }
            "q" if self.peek() == Some('[') => {
                self.expect('[')?;
                let mu = self.parse_usize()?;
                self.expect(']')?;
                self.check_field(mu)?;
                Ok(Expr::fiber(FiberCoord::Q(mu - 1)))
            }
            "qq" if self.peek() == Some('[') => {
                let (i, mu) = self.parse_pair()?;
                self.check_fiber(i, mu)?;
                Ok(Expr::fiber(FiberCoord::Qi(i - 1, mu - 1)))
            }
            "diff" => {
                self.expect('(')?;
                let inner = self.parse_sum()?;
                self.expect(',')?;
                let v = self.parse_var_ref()?;
                self.expect(')')?;
                Ok(inner.partial_derivative(&v))
            }
            "Int" => {
                self.expect('(')?;
                let inner = self.parse_sum()?;
                self.expect(',')?;
                let v = self.parse_var_ref()?;
                self.expect(')')?;
                Expr::antideriv(inner, v)
            }
            "exp" => {
                self.expect('(')?;
                let inner = self.parse_sum()?;
                self.expect(')')?;
                Ok(Expr::exp(inner))
            }
            _ => {
                if let Some(v) = self.ctx.lookup_name(&name) {
                    return Ok(Expr::var(v));
                }
                if let Ok(sig) = self.ctx.func_sig(&name) {
                    let args = sig.args.clone();
                    // optional argument list, validated loosely and discarded
                    if self.peek() == Some('(') {
                        self.expect('(')?;
                        if self.peek() != Some(')') {
                            loop {
                                self.parse_arg_mention()?;
                                if !self.eat(',') {
                                    break;
                                }
                            }
                        }
                        self.expect(')')?;
                    }
                    return Ok(Expr::func(&name, args));
                }
                Err(Error::Syntax {
                    pos: start,
                    msg: format!("unknown name `{}`", name),
                })
            }
        }
    }

    /// Inside a declared-function call the arguments are a dependency
    /// mention (`L(x,y,z)`), not subexpressions; accept group names and
    /// concrete coordinates.
    fn parse_arg_mention(&mut self) -> Result<()> {
        let name = self.parse_ident()?;
        match name.as_str() {
            "x" | "y" | "z" if self.peek() == Some('[') => {
                // concrete coordinate mention
                if name == "z" {
                    self.parse_jet_ref()?;
                } else {
                    self.expect('[')?;
                    self.parse_usize()?;
                    self.expect(']')?;
                }
                Ok(())
            }
            "x" | "y" | "z" => Ok(()),
            _ if self.ctx.lookup_name(&name).is_some() => Ok(()),
            _ => Err(self.err(&format!("unknown dependency mention `{}`", name))),
        }
    }

    fn parse_pair(&mut self) -> Result<(usize, usize)> {
        self.expect('[')?;
        let i = self.parse_usize()?;
        self.expect(',')?;
        let mu = self.parse_usize()?;
        self.expect(']')?;
        Ok((i, mu))
    }

    fn check_field(&self, mu: usize) -> Result<()> {
        if mu == 0 || mu > self.ctx.fiber_dim() {
            return Err(Error::IndexOutOfRange(format!("field {}", mu)));
        }
        Ok(())
    }

    fn check_fiber(&self, i: usize, mu: usize) -> Result<()> {
        if i == 0 || i > self.ctx.base_dim() {
            return Err(Error::IndexOutOfRange(format!("base {}", i)));
        }
        self.check_field(mu)
    }

    fn parse_jet_ref(&mut self) -> Result<VarRef> {
        self.expect('[')?;
        let mu = self.parse_usize()?;
        self.check_field(mu)?;
        self.expect(',')?;
        self.expect('(')?;
        let mut counts = Vec::new();
        if self.peek() != Some(')') {
            loop {
                let c = self.parse_usize()?;
                counts.push(c as u8);
                if !self.eat(',') {
                    break;
                }
            }
        }
        self.expect(')')?;
        self.expect(']')?;
        if counts.len() != self.ctx.base_dim() {
            return Err(Error::IndexOutOfRange(format!(
                "multi-index must have {} entries",
                self.ctx.base_dim()
            )));
        }
        let idx = MultiIndex::from_counts(counts);
        if idx.order() == 0 {
            return Ok(VarRef::Field(mu - 1));
        }
        // accept up to two orders above the truncation (shadow output layer)
        if idx.order() > self.ctx.order() + 2 {
            return Err(Error::IndexOutOfRange(format!(
                "derivative order {} exceeds truncation {}",
                idx.order(),
                self.ctx.order()
            )));
        }
        Ok(VarRef::Jet(mu - 1, idx))
    }

    /// A coordinate reference for `diff`/`Int`: indexed or named.
    fn parse_var_ref(&mut self) -> Result<VarRef> {
        let name = self.parse_ident()?;
        match name.as_str() {
            "x" if self.peek() == Some('[') => {
                self.expect('[')?;
                let i = self.parse_usize()?;
                self.expect(']')?;
                if i == 0 || i > self.ctx.base_dim() {
                    return Err(Error::IndexOutOfRange(format!("x[{}]", i)));
                }
                Ok(VarRef::Base(i - 1))
            }
            "y" if self.peek() == Some('[') => {
                self.expect('[')?;
                let mu = self.parse_usize()?;
                self.expect(']')?;
                self.check_field(mu)?;
                Ok(VarRef::Field(mu - 1))
            }
            "z" if self.peek() == Some('[') => self.parse_jet_ref(),
            _ => self
                .ctx
                .lookup_name(&name)
                .ok_or_else(|| self.err(&format!("unknown coordinate `{}`", name))),
        }
    }
}
