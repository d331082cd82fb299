//! Symbolic scalar kernel: canonical rational expressions in jet coordinates
//! extended by opaque function atoms with recorded partial derivatives, an
//! antiderivative atom and an exponential.
//!
//! Expressions are kept in a canonical sum-of-monomials form at all times:
//! two expressions that are equal as functions of their atoms have identical
//! representations. Monomials may carry negative powers of atoms (reciprocals
//! of single factors); division by a general sum is rejected.

mod numeric;
mod parse;
mod print;

pub use numeric::{equals, Assignment, Equality, DEFAULT_EQUALITY_SEED};
pub use parse::parse_expr;
pub use print::{canonical, latex, pretty};

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, BigRational, One, Zero};

use crate::coords::{FiberCoord, VarRef};
use crate::error::{Error, Result};

/// Opaque function atom with its declared dependency list and the multiset of
/// partial derivatives applied to it. Mixed partials commute because the
/// multiset is unordered.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FuncAtom {
    pub name: String,
    pub args: Vec<VarRef>,
    pub derivs: BTreeMap<VarRef, u32>,
}

impl FuncAtom {
    pub fn depends_on(&self, v: &VarRef) -> bool {
        self.args.contains(v)
    }

    pub fn total_deriv_order(&self) -> u32 {
        self.derivs.values().sum()
    }
}

/// A multiplicative atom.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Factor {
    Var(VarRef),
    Fiber(FiberCoord),
    Func(FuncAtom),
    /// Antiderivative ∫^v f ds: opaque except for ∂_v ∫^v f = f. The
    /// integrand may depend on `var` only.
    AntiDeriv { integrand: Box<Expr>, var: VarRef },
    Exp(Box<Expr>),
}

/// Product of factors with nonzero integer exponents.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial {
    factors: BTreeMap<Factor, i64>,
}

impl Monomial {
    fn unit() -> Self {
        Monomial::default()
    }

    fn single(f: Factor) -> Self {
        let mut factors = BTreeMap::new();
        factors.insert(f, 1);
        Monomial { factors }
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut factors = self.factors.clone();
        for (f, e) in &other.factors {
            let entry = factors.entry(f.clone()).or_insert(0);
            *entry += e;
            if *entry == 0 {
                factors.remove(f);
            }
        }
        Monomial { factors }
    }

    fn powi(&self, e: i64) -> Monomial {
        let mut factors = BTreeMap::new();
        for (f, k) in &self.factors {
            factors.insert(f.clone(), k * e);
        }
        Monomial { factors }
    }

    pub fn factors(&self) -> impl Iterator<Item = (&Factor, i64)> {
        self.factors.iter().map(|(f, e)| (f, *e))
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }
}

/// Canonical symbolic expression.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Expr {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::default()
    }

    pub fn one() -> Expr {
        Expr::from_int(1)
    }

    pub fn from_int(v: i64) -> Expr {
        Expr::from_rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(r: BigRational) -> Expr {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(Monomial::unit(), r);
        }
        Expr { terms }
    }

    pub fn var(v: VarRef) -> Expr {
        Expr::from_monomial(Monomial::single(Factor::Var(v)), BigRational::one())
    }

    pub fn fiber(c: FiberCoord) -> Expr {
        Expr::from_monomial(Monomial::single(Factor::Fiber(c)), BigRational::one())
    }

    pub fn func(name: &str, args: Vec<VarRef>) -> Expr {
        let mut args = args;
        args.sort();
        args.dedup();
        Expr::from_monomial(
            Monomial::single(Factor::Func(FuncAtom {
                name: name.to_string(),
                args,
                derivs: BTreeMap::new(),
            })),
            BigRational::one(),
        )
    }

    pub fn func_atom(atom: FuncAtom) -> Expr {
        Expr::from_monomial(Monomial::single(Factor::Func(atom)), BigRational::one())
    }

    /// ∫^v f ds. The integrand may depend on `var` only.
    pub fn antideriv(integrand: Expr, var: VarRef) -> Result<Expr> {
        if integrand.is_zero() {
            return Ok(Expr::zero());
        }
        let bad: Vec<_> = integrand
            .support()
            .into_iter()
            .filter(|w| *w != var)
            .collect();
        if !bad.is_empty() {
            return Err(Error::AntiDerivArgs(format!("{:?}", bad)));
        }
        Ok(Expr::from_monomial(
            Monomial::single(Factor::AntiDeriv {
                integrand: Box::new(integrand),
                var,
            }),
            BigRational::one(),
        ))
    }

    pub fn exp(arg: Expr) -> Expr {
        if arg.is_zero() {
            return Expr::one();
        }
        Expr::from_monomial(Monomial::single(Factor::Exp(Box::new(arg))), BigRational::one())
    }

    fn from_monomial(m: Monomial, c: BigRational) -> Expr {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Expr { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().map(|r| r.is_one()).unwrap_or(false)
    }

    /// The value if this expression is a rational constant.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.is_unit() {
                return Some(c);
            }
        }
        if self.terms.is_empty() {
            // zero has no stored term; callers treat None as "not constant",
            // so report via is_zero instead.
            return None;
        }
        None
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &Expr) -> Expr {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let entry = terms.entry(m.clone()).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(m);
            }
        }
        Expr { terms }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Expr {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), -c.clone()))
            .collect();
        Expr { terms }
    }

    pub fn scale(&self, r: &BigRational) -> Expr {
        if r.is_zero() {
            return Expr::zero();
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), c * r))
            .collect();
        Expr { terms }
    }

    pub fn scale_int(&self, k: i64) -> Expr {
        self.scale(&BigRational::from_integer(BigInt::from(k)))
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        let mut terms: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                let entry = terms.entry(m).or_insert_with(BigRational::zero);
                *entry += c;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Expr { terms }
    }

    /// Integer power. Nonnegative exponents expand; negative exponents
    /// require a single-monomial base.
    pub fn pow(&self, e: i64) -> Result<Expr> {
        if e == 0 {
            return Ok(Expr::one());
        }
        if e > 0 {
            let mut acc = Expr::one();
            let mut base = self.clone();
            let mut k = e as u64;
            loop {
                if k & 1 == 1 {
                    acc = acc.mul(&base);
                }
                k >>= 1;
                if k == 0 {
                    break;
                }
                base = base.mul(&base);
            }
            return Ok(acc);
        }
        // negative power
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.terms.len() != 1 {
            return Err(Error::NegativePowerOfSum);
        }
        let (m, c) = self.terms.iter().next().unwrap();
        let mut inv = Expr::from_monomial(m.powi(-1), c.recip());
        if e < -1 {
            inv = inv.pow(-e)?;
        }
        Ok(inv)
    }

    /// Exact division: the divisor must be a single monomial (possibly with
    /// atom powers).
    pub fn div(&self, other: &Expr) -> Result<Expr> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if other.terms.len() != 1 {
            return Err(Error::DivisorNotMonomial);
        }
        Ok(self.mul(&other.pow(-1)?))
    }

    /// ∂e/∂v. Total on valid expressions: linear, Leibniz, commuting mixed
    /// partials on atoms, ∂_v ∫^v f = f.
    pub fn partial_derivative(&self, v: &VarRef) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            for (f, e) in &m.factors {
                let df = f.derivative(v);
                if df.is_zero() {
                    continue;
                }
                // c * e * f^(e-1) * df * (rest of the monomial)
                let mut rest = m.clone();
                rest.factors.remove(f);
                if *e != 1 {
                    rest.factors.insert(f.clone(), e - 1);
                }
                let coeff = c * BigRational::from_integer(BigInt::from(*e));
                let term = Expr::from_monomial(rest, coeff).mul(&df);
                out = out.add(&term);
            }
        }
        out
    }

    /// ∂e/∂c for a form-bundle fiber coordinate.
    pub fn fiber_derivative(&self, c: &FiberCoord) -> Expr {
        let mut out = Expr::zero();
        for (m, coef) in &self.terms {
            for (f, e) in &m.factors {
                if let Factor::Fiber(d) = f {
                    if d == c {
                        let mut rest = m.clone();
                        rest.factors.remove(f);
                        if *e != 1 {
                            rest.factors.insert(f.clone(), e - 1);
                        }
                        let coeff = coef * BigRational::from_integer(BigInt::from(*e));
                        out = out.add(&Expr::from_monomial(rest, coeff));
                    }
                }
            }
        }
        out
    }

    /// Coordinate atoms this expression depends on, including declared
    /// arguments of its function atoms.
    pub fn support(&self) -> BTreeSet<VarRef> {
        let mut out = BTreeSet::new();
        for (m, _) in &self.terms {
            for (f, _) in &m.factors {
                f.collect_support(&mut out);
            }
        }
        out
    }

    /// Fiber coordinates appearing in the expression.
    pub fn fiber_support(&self) -> BTreeSet<FiberCoord> {
        let mut out = BTreeSet::new();
        for (m, _) in &self.terms {
            for (f, _) in &m.factors {
                if let Factor::Fiber(c) = f {
                    out.insert(*c);
                }
            }
        }
        out
    }

    /// Highest jet order among the variables in the support.
    pub fn max_order(&self) -> usize {
        self.support().iter().map(|v| v.order()).max().unwrap_or(0)
    }

    /// All multiplicative atoms (for numeric assignment enumeration).
    pub fn atoms(&self) -> BTreeSet<Factor> {
        let mut out = BTreeSet::new();
        for (m, _) in &self.terms {
            for (f, _) in &m.factors {
                f.collect_atoms(&mut out);
            }
        }
        out
    }

    /// Simultaneous substitution followed by canonicalization.
    pub fn substitute(&self, bindings: &Bindings) -> Result<Expr> {
        self.substitute_depth(bindings, 0)
    }

    fn substitute_depth(&self, bindings: &Bindings, depth: usize) -> Result<Expr> {
        if depth > 16 {
            return Err(Error::InconsistentBinding(
                "substitution recursion too deep (self-referential binding?)".into(),
            ));
        }
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let mut term = Expr::from_rational(c.clone());
            for (f, e) in &m.factors {
                let image = f.substitute(bindings, depth)?;
                term = term.mul(&image.pow(*e)?);
            }
            out = out.add(&term);
        }
        Ok(out)
    }
}

impl Factor {
    fn derivative(&self, v: &VarRef) -> Expr {
        match self {
            Factor::Var(w) => {
                if w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Factor::Fiber(_) => Expr::zero(),
            Factor::Func(atom) => {
                if atom.depends_on(v) {
                    let mut next = atom.clone();
                    *next.derivs.entry(v.clone()).or_insert(0) += 1;
                    Expr::func_atom(next)
                } else {
                    Expr::zero()
                }
            }
            Factor::AntiDeriv { integrand, var } => {
                if var == v {
                    (**integrand).clone()
                } else {
                    Expr::zero()
                }
            }
            Factor::Exp(arg) => {
                let da = arg.partial_derivative(v);
                if da.is_zero() {
                    Expr::zero()
                } else {
                    da.mul(&Expr::exp((**arg).clone()))
                }
            }
        }
    }

    fn collect_support(&self, out: &mut BTreeSet<VarRef>) {
        match self {
            Factor::Var(v) => {
                out.insert(v.clone());
            }
            Factor::Fiber(_) => {}
            Factor::Func(atom) => {
                for a in &atom.args {
                    out.insert(a.clone());
                }
            }
            Factor::AntiDeriv { integrand, var } => {
                out.insert(var.clone());
                for v in integrand.support() {
                    out.insert(v);
                }
            }
            Factor::Exp(arg) => {
                for v in arg.support() {
                    out.insert(v);
                }
            }
        }
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Factor>) {
        match self {
            Factor::Exp(arg) => {
                for (m, _) in &arg.terms {
                    for (f, _) in &m.factors {
                        f.collect_atoms(out);
                    }
                }
            }
            _ => {
                out.insert(self.clone());
            }
        }
    }

    fn substitute(&self, bindings: &Bindings, depth: usize) -> Result<Expr> {
        match self {
            Factor::Var(v) => Ok(bindings
                .vars
                .get(v)
                .cloned()
                .unwrap_or_else(|| Expr::var(v.clone()))),
            Factor::Fiber(c) => Ok(bindings
                .fibers
                .get(c)
                .cloned()
                .unwrap_or_else(|| Expr::fiber(*c))),
            Factor::Func(atom) => {
                if let Some(concrete) = bindings.funcs.get(&atom.name) {
                    if concrete
                        .atoms()
                        .iter()
                        .any(|f| matches!(f, Factor::Func(a) if a.name == atom.name))
                    {
                        return Err(Error::InconsistentBinding(atom.name.clone()));
                    }
                    // chain rule: realize the recorded partials on the
                    // concrete form, then substitute the rest
                    let mut image = concrete.clone();
                    for (v, count) in &atom.derivs {
                        for _ in 0..*count {
                            image = image.partial_derivative(v);
                        }
                    }
                    image.substitute_depth(bindings, depth + 1)
                } else {
                    for a in &atom.args {
                        if let Some(img) = bindings.vars.get(a) {
                            if img != &Expr::var(a.clone()) {
                                return Err(Error::OpaqueComposition(atom.name.clone()));
                            }
                        }
                    }
                    Ok(Expr::func_atom(atom.clone()))
                }
            }
            Factor::AntiDeriv { integrand, var } => {
                if let Some(img) = bindings.vars.get(var) {
                    if img != &Expr::var(var.clone()) {
                        return Err(Error::OpaqueComposition("Int".into()));
                    }
                }
                let inner = integrand.substitute_depth(bindings, depth + 1)?;
                Expr::antideriv(inner, var.clone())
            }
            Factor::Exp(arg) => {
                let inner = arg.substitute_depth(bindings, depth + 1)?;
                Ok(Expr::exp(inner))
            }
        }
    }
}

/// Substitution data for [`Expr::substitute`]. Function bindings map an atom
/// base name to a concrete expression in the atom's arguments; recorded
/// derivative multisets are realized by the chain rule.
#[derive(Clone, Debug, Default)]
pub struct Bindings {
    pub vars: BTreeMap<VarRef, Expr>,
    pub funcs: BTreeMap<String, Expr>,
    pub fibers: BTreeMap<FiberCoord, Expr>,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn var(mut self, v: VarRef, e: Expr) -> Self {
        self.vars.insert(v, e);
        self
    }

    pub fn func(mut self, name: &str, e: Expr) -> Self {
        self.funcs.insert(name.to_string(), e);
        self
    }

    pub fn fiber(mut self, c: FiberCoord, e: Expr) -> Self {
        self.fibers.insert(c, e);
        self
    }
}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
