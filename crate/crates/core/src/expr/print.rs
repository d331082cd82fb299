//! Canonical (re-parseable) printing and a report-oriented pretty form.

use std::fmt;

use num::{BigRational, One, Signed};

use super::{Expr, Factor, Monomial};
use crate::context::JetContext;
use crate::coords::VarRef;

fn write_varref(f: &mut String, v: &VarRef) {
    match v {
        VarRef::Base(i) => f.push_str(&format!("x[{}]", i + 1)),
        VarRef::Field(mu) => f.push_str(&format!("y[{}]", mu + 1)),
        VarRef::Jet(mu, idx) => f.push_str(&format!("z[{},{}]", mu + 1, idx)),
    }
}

fn write_factor(out: &mut String, factor: &Factor) {
    match factor {
        Factor::Var(v) => write_varref(out, v),
        Factor::Fiber(c) => out.push_str(&c.to_string()),
        Factor::Func(atom) => {
            let mut inner = atom.name.clone();
            for (v, count) in &atom.derivs {
                for _ in 0..*count {
                    let mut vtxt = String::new();
                    write_varref(&mut vtxt, v);
                    inner = format!("diff({},{})", inner, vtxt);
                }
            }
            out.push_str(&inner);
        }
        Factor::AntiDeriv { integrand, var } => {
            let mut vtxt = String::new();
            write_varref(&mut vtxt, var);
            out.push_str(&format!("Int({},{})", canonical(integrand), vtxt));
        }
        Factor::Exp(arg) => {
            out.push_str(&format!("exp({})", canonical(arg)));
        }
    }
}

fn write_monomial(out: &mut String, m: &Monomial) {
    let mut first = true;
    for (factor, e) in m.factors() {
        if !first {
            out.push('*');
        }
        first = false;
        let needs_paren = false;
        if needs_paren {
            out.push('(');
        }
        write_factor(out, factor);
        if needs_paren {
            out.push(')');
        }
        if e != 1 {
            out.push_str(&format!("^{}", e));
        }
    }
}

fn write_coeff(out: &mut String, c: &BigRational, lead: bool, bare: bool) {
    let mag = c.abs();
    if c.is_negative() {
        out.push_str(if lead { "-" } else { " - " });
    } else if !lead {
        out.push_str(" + ");
    }
    if mag.is_one() && !bare {
        return;
    }
    if mag.denom().is_one() {
        out.push_str(&format!("{}", mag.numer()));
    } else {
        out.push_str(&format!("{}/{}", mag.numer(), mag.denom()));
    }
    if !bare {
        out.push('*');
    }
}

/// Deterministic canonical form; `parse_expr` of the output reproduces the
/// expression exactly.
pub fn canonical(e: &Expr) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    let mut lead = true;
    for (m, c) in e.terms() {
        write_coeff(&mut out, c, lead, m.is_unit());
        if !m.is_unit() {
            write_monomial(&mut out, m);
        }
        lead = false;
    }
    out
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", canonical(self))
    }
}

/// Pretty form for reports: coordinates are shown under their declared names
/// and derivative atoms with subscripts (`tau_{theta}`).
pub fn pretty(e: &Expr, ctx: &JetContext) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    let mut lead = true;
    for (m, c) in e.terms() {
        write_coeff(&mut out, c, lead, m.is_unit());
        let mut first = true;
        for (factor, exp) in m.factors() {
            if !(first && m.is_unit()) && !first {
                out.push('*');
            }
            first = false;
            out.push_str(&pretty_factor(factor, ctx));
            if exp != 1 {
                out.push_str(&format!("^{}", exp));
            }
        }
        lead = false;
    }
    out
}

fn pretty_var(v: &VarRef, ctx: &JetContext) -> String {
    match v {
        VarRef::Base(i) => ctx.base_name(*i).to_string(),
        VarRef::Field(mu) => ctx.field_name(*mu).to_string(),
        VarRef::Jet(mu, idx) => {
            let mut subs = String::new();
            for (i, &c) in idx.counts().iter().enumerate() {
                for _ in 0..c {
                    if !subs.is_empty() {
                        subs.push(' ');
                    }
                    subs.push_str(ctx.base_name(i));
                }
            }
            format!("{}_{{{}}}", ctx.field_name(*mu), subs)
        }
    }
}

fn pretty_factor(factor: &Factor, ctx: &JetContext) -> String {
    match factor {
        Factor::Var(v) => pretty_var(v, ctx),
        Factor::Fiber(c) => c.to_string(),
        Factor::Func(atom) => {
            if atom.derivs.is_empty() {
                atom.name.clone()
            } else {
                let mut subs = String::new();
                for (v, count) in &atom.derivs {
                    for _ in 0..*count {
                        if !subs.is_empty() {
                            subs.push(' ');
                        }
                        subs.push_str(&pretty_var(v, ctx));
                    }
                }
                format!("{}_{{{}}}", atom.name, subs)
            }
        }
        Factor::AntiDeriv { integrand, var } => format!(
            "Int({}, {})",
            pretty(integrand, ctx),
            pretty_var(var, ctx)
        ),
        Factor::Exp(arg) => format!("exp({})", pretty(arg, ctx)),
    }
}

/// LaTeX emitter mirroring the usual jet-coordinate notation.
pub fn latex(e: &Expr, ctx: &JetContext) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    let mut lead = true;
    for (m, c) in e.terms() {
        let mag = c.abs();
        if c.is_negative() {
            out.push_str(if lead { "-" } else { " - " });
        } else if !lead {
            out.push_str(" + ");
        }
        if !mag.is_one() || m.is_unit() {
            if mag.denom().is_one() {
                out.push_str(&format!("{}", mag.numer()));
            } else {
                out.push_str(&format!(
                    "\\tfrac{{{}}}{{{}}}",
                    mag.numer(),
                    mag.denom()
                ));
            }
            if !m.is_unit() {
                out.push_str("\\,");
            }
        }
        for (factor, exp) in m.factors() {
            out.push_str(&latex_factor(factor, ctx));
            if exp != 1 {
                out.push_str(&format!("^{{{}}}", exp));
            }
            out.push(' ');
        }
        lead = false;
    }
    out.trim_end().to_string()
}

fn latex_var(v: &VarRef, ctx: &JetContext) -> String {
    match v {
        VarRef::Base(i) => format!("x^{{{}}}", ctx.base_name(*i)),
        VarRef::Field(mu) => format!("y^{{{}}}", ctx.field_name(*mu)),
        VarRef::Jet(mu, idx) => {
            let mut subs = String::new();
            for (i, &c) in idx.counts().iter().enumerate() {
                for _ in 0..c {
                    subs.push_str(ctx.base_name(i));
                    subs.push(' ');
                }
            }
            format!("z^{{{}}}_{{{}}}", ctx.field_name(*mu), subs.trim_end())
        }
    }
}

fn latex_factor(factor: &Factor, ctx: &JetContext) -> String {
    match factor {
        Factor::Var(v) => latex_var(v, ctx),
        Factor::Fiber(c) => c.to_string(),
        Factor::Func(atom) => {
            if atom.derivs.is_empty() {
                atom.name.clone()
            } else {
                let mut subs = String::new();
                for (v, count) in &atom.derivs {
                    for _ in 0..*count {
                        subs.push_str(&latex_var(v, ctx));
                        subs.push(' ');
                    }
                }
                format!("{}_{{,{}}}", atom.name, subs.trim_end())
            }
        }
        Factor::AntiDeriv { integrand, var } => format!(
            "\\int^{{{}}} {}\\,ds",
            latex_var(var, ctx),
            latex(integrand, ctx)
        ),
        Factor::Exp(arg) => format!("e^{{{}}}", latex(arg, ctx)),
    }
}
