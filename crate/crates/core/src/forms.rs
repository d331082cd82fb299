//! Exterior forms on (partial) jet spaces in the mixed coordinate/contact
//! basis {dx^i, ω^μ_I, d(fiber)}, with wedge, exterior derivative,
//! contraction, Lie derivative, contact decomposition and a differential on
//! form pairs.
//!
//! dy^μ and dz^μ_I never appear in stored terms: they are rewritten as
//! ω^μ_I + z^μ_{I+1_j} dx^j on construction, so "is i-contact" is a
//! syntactic predicate on wedge words.

use std::collections::BTreeMap;

use crate::context::{Ctx, JetContext};
use crate::coords::{FiberCoord, MultiIndex, VarRef};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{total_derivative, VectorField};

/// Basis covector of the contact coframe.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Covector {
    Dx(usize),
    /// ω^μ_I = dz^μ_I − z^μ_{I+1_j} dx^j (I may be empty: ω^μ).
    Omega(usize, MultiIndex),
    DFiber(FiberCoord),
}

impl Covector {
    fn is_contact(&self) -> bool {
        matches!(self, Covector::Omega(_, _))
    }
}

type Word = Vec<Covector>;

/// Exterior form as a sum of wedge words with scalar coefficients.
#[derive(Clone, Debug)]
pub struct DiffForm {
    ctx: Ctx,
    degree: usize,
    terms: BTreeMap<Word, Expr>,
}

impl PartialEq for DiffForm {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.terms == other.terms
    }
}

fn merge_sorted(a: &[Covector], b: &[Covector]) -> Option<(Word, i64)> {
    // merge two strictly sorted words, counting transpositions
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut sign = 1i64;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Equal => return None,
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                // b[j] moves past the remaining a-entries
                if (a.len() - i) % 2 == 1 {
                    sign = -sign;
                }
                out.push(b[j].clone());
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, sign))
}

fn sort_word(word: &[Covector]) -> Option<(Word, i64)> {
    // insertion sort with sign tracking; None on a repeated covector
    let mut out: Word = Vec::with_capacity(word.len());
    let mut sign = 1i64;
    for c in word {
        let pos = out.partition_point(|d| d < c);
        if out.get(pos) == Some(c) {
            return None;
        }
        if (out.len() - pos) % 2 == 1 {
            sign = -sign;
        }
        out.insert(pos, c.clone());
    }
    Some((out, sign))
}

impl DiffForm {
    pub fn zero(ctx: &Ctx, degree: usize) -> DiffForm {
        DiffForm {
            ctx: ctx.clone(),
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// Degree-0 form from a scalar.
    pub fn scalar(ctx: &Ctx, e: Expr) -> DiffForm {
        let mut terms = BTreeMap::new();
        if !e.is_zero() {
            terms.insert(Vec::new(), e);
        }
        DiffForm {
            ctx: ctx.clone(),
            degree: 0,
            terms,
        }
    }

    /// A single wedge word with a coefficient. The word may be unsorted.
    pub fn term(ctx: &Ctx, coeff: Expr, word: Vec<Covector>) -> DiffForm {
        let degree = word.len();
        let mut out = DiffForm::zero(ctx, degree);
        if coeff.is_zero() {
            return out;
        }
        if let Some((sorted, sign)) = sort_word(&word) {
            out.add_term(sorted, coeff.scale_int(sign));
        }
        out
    }

    pub fn dx(ctx: &Ctx, i: usize) -> DiffForm {
        DiffForm::term(ctx, Expr::one(), vec![Covector::Dx(i)])
    }

    /// ω^μ_I as a basis form (I empty gives ω^μ).
    pub fn omega(ctx: &Ctx, mu: usize, idx: MultiIndex) -> DiffForm {
        DiffForm::term(ctx, Expr::one(), vec![Covector::Omega(mu, idx)])
    }

    pub fn dfiber(ctx: &Ctx, c: FiberCoord) -> DiffForm {
        DiffForm::term(ctx, Expr::one(), vec![Covector::DFiber(c)])
    }

    /// dy^μ = ω^μ + z^μ_i dx^i, expanded into the contact basis.
    pub fn dy(ctx: &Ctx, mu: usize) -> DiffForm {
        Self::dz(ctx, mu, MultiIndex::zero(ctx.base_dim()))
    }

    /// dz^μ_I = ω^μ_I + z^μ_{I+1_i} dx^i, expanded into the contact basis.
    pub fn dz(ctx: &Ctx, mu: usize, idx: MultiIndex) -> DiffForm {
        let mut out = DiffForm::omega(ctx, mu, idx.clone());
        for i in 0..ctx.base_dim() {
            let z = Expr::var(VarRef::Jet(mu, idx.step(i)));
            out = out.add(&DiffForm::term(ctx, z, vec![Covector::Dx(i)]));
        }
        out
    }

    /// Volume form η = g dx^1∧…∧dx^n.
    pub fn eta(ctx: &Ctx) -> DiffForm {
        let word: Word = (0..ctx.base_dim()).map(Covector::Dx).collect();
        DiffForm::term(ctx, ctx.density(), word)
    }

    /// η_i = i_{∂_{x^i}} η.
    pub fn eta_i(ctx: &Ctx, i: usize) -> DiffForm {
        let xi = VectorField::base_translation(ctx, i);
        DiffForm::eta(ctx).contract(&xi)
    }

    /// η_{ij} = i_{∂_{x^j}} i_{∂_{x^i}} η.
    pub fn eta_ij(ctx: &Ctx, i: usize, j: usize) -> DiffForm {
        let xj = VectorField::base_translation(ctx, j);
        DiffForm::eta_i(ctx, i).contract(&xj)
    }

    fn add_term(&mut self, word: Word, coeff: Expr) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&word) {
            Some(entry) => {
                *entry = entry.add(&coeff);
                if entry.is_zero() {
                    self.terms.remove(&word);
                }
            }
            None => {
                self.terms.insert(word, coeff);
            }
        }
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Expr)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn check_space(&self, other: &DiffForm) -> Result<()> {
        if **self.ctx() != **other.ctx() {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &DiffForm) -> DiffForm {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        debug_assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &DiffForm) -> DiffForm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffForm {
        self.scale_int(-1)
    }

    pub fn scale_int(&self, k: i64) -> DiffForm {
        let mut out = DiffForm::zero(&self.ctx, self.degree);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c.scale_int(k));
        }
        out
    }

    pub fn scale(&self, e: &Expr) -> DiffForm {
        let mut out = DiffForm::zero(&self.ctx, self.degree);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c.mul(e));
        }
        out
    }

    /// Graded-commutative product.
    pub fn wedge(&self, other: &DiffForm) -> Result<DiffForm> {
        self.check_space(other)?;
        let mut out = DiffForm::zero(&self.ctx, self.degree + other.degree);
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                if let Some((word, sign)) = merge_sorted(wa, wb) {
                    out.add_term(word, ca.mul(cb).scale_int(sign));
                }
            }
        }
        Ok(out)
    }

    /// The coefficient of a single wedge word (sorted or not).
    pub fn coefficient(&self, word: &[Covector]) -> Expr {
        let (sorted, sign) = match sort_word(word) {
            Some(x) => x,
            None => return Expr::zero(),
        };
        self.terms
            .get(&sorted)
            .map(|c| c.scale_int(sign))
            .unwrap_or_else(Expr::zero)
    }

    /// Exterior derivative. d² = 0 holds syntactically.
    pub fn exterior_d(&self) -> DiffForm {
        let mut out = DiffForm::zero(&self.ctx, self.degree + 1);
        for (word, coeff) in &self.terms {
            // d(coeff) ∧ word
            for (cov, dc) in differential_of_scalar(coeff, &self.ctx) {
                let mut w = vec![cov];
                w.extend_from_slice(word);
                if let Some((sorted, sign)) = sort_word(&w) {
                    out.add_term(sorted, dc.scale_int(sign));
                }
            }
            // coeff ∧ d(word): dω^μ_I = −ω^μ_{I+1_j} ∧ dx^j
            for (pos, cov) in word.iter().enumerate() {
                if let Covector::Omega(mu, idx) = cov {
                    let leading_sign = if pos % 2 == 0 { 1 } else { -1 };
                    for j in 0..self.ctx.base_dim() {
                        let mut w: Word = Vec::with_capacity(word.len() + 1);
                        w.push(Covector::Omega(*mu, idx.step(j)));
                        w.push(Covector::Dx(j));
                        for (k, c) in word.iter().enumerate() {
                            if k != pos {
                                w.push(c.clone());
                            }
                        }
                        if let Some((sorted, sign)) = sort_word(&w) {
                            out.add_term(sorted, coeff.scale_int(-leading_sign * sign));
                        }
                    }
                }
            }
        }
        out
    }

    /// Interior product with a vector field (graded antiderivation of
    /// degree −1). Contraction of ω^μ_I yields the characteristic
    /// ξ^{(μ,I)} − z^μ_{I+1_j} ξ^j.
    pub fn contract(&self, xi: &VectorField) -> DiffForm {
        let mut out = DiffForm::zero(&self.ctx, self.degree.saturating_sub(1));
        for (word, coeff) in &self.terms {
            for (pos, cov) in word.iter().enumerate() {
                let pairing = match cov {
                    Covector::Dx(i) => xi.base[*i].clone(),
                    Covector::Omega(mu, idx) => xi.contact_characteristic(*mu, idx),
                    Covector::DFiber(c) => {
                        xi.form_fiber.get(c).cloned().unwrap_or_else(Expr::zero)
                    }
                };
                if pairing.is_zero() {
                    continue;
                }
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                let rest: Word = word
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != pos)
                    .map(|(_, c)| c.clone())
                    .collect();
                out.add_term(rest, coeff.mul(&pairing).scale_int(sign));
            }
        }
        out
    }

    /// Cartan formula L_ξ = i_ξ∘d + d∘i_ξ.
    pub fn lie_derivative(&self, xi: &VectorField) -> DiffForm {
        self.exterior_d()
            .contract(xi)
            .add(&self.contract(xi).exterior_d())
    }

    /// Number of contact covectors in a wedge word.
    pub fn contact_degree_of(word: &[Covector]) -> usize {
        word.iter().filter(|c| c.is_contact()).count()
    }

    /// Split into i-contact components [a_0, …, a_q]; a_0 is the horizontal
    /// part. The sum of the components is the input.
    pub fn contact_decompose(&self) -> Vec<DiffForm> {
        let mut parts: Vec<DiffForm> = (0..=self.degree)
            .map(|_| DiffForm::zero(&self.ctx, self.degree))
            .collect();
        for (word, coeff) in &self.terms {
            let c = Self::contact_degree_of(word);
            parts[c].add_term(word.clone(), coeff.clone());
        }
        parts
    }

    /// The 0-contact component.
    pub fn horizontal_part(&self) -> DiffForm {
        let mut out = DiffForm::zero(&self.ctx, self.degree);
        for (word, coeff) in &self.terms {
            if Self::contact_degree_of(word) == 0 {
                out.add_term(word.clone(), coeff.clone());
            }
        }
        out
    }

    /// True when every term contains at least `i` contact covectors.
    pub fn is_contact(&self, i: usize) -> bool {
        self.terms.keys().all(|w| Self::contact_degree_of(w) >= i)
    }

    /// True when every term contains exactly `i` contact covectors.
    pub fn is_exactly_contact(&self, i: usize) -> bool {
        self.terms.keys().all(|w| Self::contact_degree_of(w) == i)
    }

    /// Horizontal differential: the part of d that preserves the contact
    /// degree of each term.
    pub fn d_h(&self) -> DiffForm {
        let mut out = DiffForm::zero(&self.ctx, self.degree + 1);
        for (word, coeff) in &self.terms {
            let c0 = Self::contact_degree_of(word);
            let single = DiffForm {
                ctx: self.ctx.clone(),
                degree: self.degree,
                terms: BTreeMap::from([(word.clone(), coeff.clone())]),
            };
            for (w, c) in single.exterior_d().terms {
                if Self::contact_degree_of(&w) == c0 {
                    out.add_term(w, c);
                }
            }
        }
        out
    }

    /// Vertical (contact) differential: d − d_h.
    pub fn d_v(&self) -> DiffForm {
        self.exterior_d().sub(&self.d_h())
    }

    /// Coefficient-wise variable substitution.
    pub fn substitute(&self, bindings: &crate::expr::Bindings) -> Result<DiffForm> {
        let mut out = DiffForm::zero(&self.ctx, self.degree);
        for (word, coeff) in &self.terms {
            out.add_term(word.clone(), coeff.substitute(bindings)?);
        }
        Ok(out)
    }
}

impl DiffForm {
    /// Deterministic contact-basis rendering: ω^μ_I, dx^i and fiber
    /// covectors with coefficients in the pretty scalar form.
    pub fn pretty(&self, ctx: &JetContext) -> String {
        self.render(ctx, false)
    }

    /// LaTeX rendering mirroring the ω^μ/η_i notation.
    pub fn latex(&self, ctx: &JetContext) -> String {
        self.render(ctx, true)
    }

    fn render(&self, ctx: &JetContext, tex: bool) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (word, coeff) in &self.terms {
            if !out.is_empty() {
                out.push_str(" + ");
            }
            let c = if tex {
                crate::expr::latex(coeff, ctx)
            } else {
                crate::expr::pretty(coeff, ctx)
            };
            if coeff.num_terms() > 1 {
                out.push_str(&format!("({})", c));
            } else {
                out.push_str(&c);
            }
            for cov in word {
                out.push_str(if tex { "\\wedge " } else { "^" });
                out.push_str(&render_covector(cov, ctx, tex));
            }
        }
        out
    }
}

fn render_covector(cov: &Covector, ctx: &JetContext, tex: bool) -> String {
    match cov {
        Covector::Dx(i) => {
            if tex {
                format!("dx^{{{}}}", ctx.base_name(*i))
            } else {
                format!("d{}", ctx.base_name(*i))
            }
        }
        Covector::Omega(mu, idx) => {
            let mut subs = String::new();
            for (i, &c) in idx.counts().iter().enumerate() {
                for _ in 0..c {
                    if !subs.is_empty() {
                        subs.push(' ');
                    }
                    subs.push_str(ctx.base_name(i));
                }
            }
            if tex {
                if subs.is_empty() {
                    format!("\\omega^{{{}}}", ctx.field_name(*mu))
                } else {
                    format!("\\omega^{{{}}}_{{{}}}", ctx.field_name(*mu), subs)
                }
            } else if subs.is_empty() {
                format!("w[{}]", ctx.field_name(*mu))
            } else {
                format!("w[{},{}]", ctx.field_name(*mu), subs)
            }
        }
        Covector::DFiber(c) => format!("d({})", c),
    }
}

/// df in the contact basis: (d_i f) dx^i + Σ f_{,z^μ_I} ω^μ_I + Σ f_{,c} dc.
fn differential_of_scalar(f: &Expr, ctx: &JetContext) -> Vec<(Covector, Expr)> {
    let mut out = Vec::new();
    for i in 0..ctx.base_dim() {
        let d = total_derivative(f, i, ctx);
        if !d.is_zero() {
            out.push((Covector::Dx(i), d));
        }
    }
    for v in f.support() {
        match v {
            VarRef::Base(_) => {}
            VarRef::Field(mu) => {
                let d = f.partial_derivative(&VarRef::Field(mu));
                if !d.is_zero() {
                    out.push((Covector::Omega(mu, MultiIndex::zero(ctx.base_dim())), d));
                }
            }
            VarRef::Jet(mu, idx) => {
                let d = f.partial_derivative(&VarRef::Jet(mu, idx.clone()));
                if !d.is_zero() {
                    out.push((Covector::Omega(mu, idx), d));
                }
            }
        }
    }
    for c in f.fiber_support() {
        let d = f.fiber_derivative(&c);
        if !d.is_zero() {
            out.push((Covector::DFiber(c), d));
        }
    }
    out
}

/// Differential on (k, k+1) form pairs: (α, β) ↦ (−dα + β, dβ). Squares to
/// zero.
pub fn con_differential(alpha: &DiffForm, beta: &DiffForm) -> Result<(DiffForm, DiffForm)> {
    if beta.degree() != alpha.degree() + 1 {
        return Err(Error::DegreeMismatch(format!(
            "pair must have degrees (k, k+1), got ({}, {})",
            alpha.degree(),
            beta.degree()
        )));
    }
    if **alpha.ctx() != **beta.ctx() {
        return Err(Error::SpaceMismatch);
    }
    Ok((alpha.exterior_d().neg().add(beta), beta.exterior_d()))
}

/// d f split per the contact decomposition: the tuple of total derivatives
/// (the horizontal coefficients) and the contact 1-form d_v f.
pub fn split_dh_dv(f: &Expr, ctx: &Ctx) -> (Vec<Expr>, DiffForm) {
    let dh: Vec<Expr> = (0..ctx.base_dim())
        .map(|i| total_derivative(f, i, ctx))
        .collect();
    let mut dv = DiffForm::zero(ctx, 1);
    for (cov, c) in differential_of_scalar(f, ctx) {
        if cov.is_contact() {
            dv = dv.add(&DiffForm::term(ctx, c, vec![cov]));
        }
    }
    (dh, dv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::JetContext;
    use crate::expr::Expr;

    fn ctx(n: usize, m: usize, k: usize) -> Ctx {
        JetContext::full(n, m, k).into_ctx()
    }

    #[test]
    fn wedge_antisymmetry() {
        let c = ctx(2, 1, 1);
        let dx1 = DiffForm::dx(&c, 0);
        let dx2 = DiffForm::dx(&c, 1);
        assert!(dx1.wedge(&dx1).unwrap().is_zero());
        let a = dx1.wedge(&dx2).unwrap();
        let b = dx2.wedge(&dx1).unwrap().neg();
        assert_eq!(a, b);
    }

    #[test]
    fn dx_wedge_eta_i_is_delta_eta() {
        let c = ctx(3, 1, 1);
        for i in 0..3 {
            for j in 0..3 {
                let lhs = DiffForm::dx(&c, j).wedge(&DiffForm::eta_i(&c, i)).unwrap();
                let rhs = if i == j {
                    DiffForm::eta(&c)
                } else {
                    DiffForm::zero(&c, 3)
                };
                assert_eq!(lhs, rhs, "i={} j={}", i, j);
            }
        }
    }

    #[test]
    fn dx_wedge_eta_ik() {
        // dx^j ∧ η_{ik} = δ^j_k η_i − δ^j_i η_k
        let c = ctx(3, 1, 1);
        for i in 0..3 {
            for k in 0..3 {
                for j in 0..3 {
                    let lhs = DiffForm::dx(&c, j)
                        .wedge(&DiffForm::eta_ij(&c, i, k))
                        .unwrap();
                    let mut rhs = DiffForm::zero(&c, 2);
                    if j == k {
                        rhs = rhs.add(&DiffForm::eta_i(&c, i));
                    }
                    if j == i {
                        rhs = rhs.sub(&DiffForm::eta_i(&c, k));
                    }
                    assert_eq!(lhs, rhs, "i={} k={} j={}", i, k, j);
                }
            }
        }
    }

    fn density_ctx() -> Ctx {
        let g = Expr::exp(Expr::var(VarRef::Base(0)).add(&Expr::var(VarRef::Base(1))));
        JetContext::full(2, 1, 1)
            .with_metric_density(g)
            .unwrap()
            .into_ctx()
    }

    #[test]
    fn d_eta_i_is_lambda_eta() {
        let c = density_ctx();
        for i in 0..2 {
            let lhs = DiffForm::eta_i(&c, i).exterior_d();
            let rhs = DiffForm::eta(&c).scale(&c.lambda_g(i));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn d_eta_ij_identity() {
        // dη_{ij} = λ_{G,j} η_i − λ_{G,i} η_j
        let c = density_ctx();
        let (i, j) = (0, 1);
        let lhs = DiffForm::eta_ij(&c, i, j).exterior_d();
        let rhs = DiffForm::eta_i(&c, i)
            .scale(&c.lambda_g(j))
            .sub(&DiffForm::eta_i(&c, j).scale(&c.lambda_g(i)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn d_squared_is_zero() {
        let c = ctx(2, 2, 1);
        let f = Expr::func("F", c.coordinates());
        let form = DiffForm::term(
            &c,
            f,
            vec![Covector::Omega(0, MultiIndex::zero(2)), Covector::Dx(1)],
        );
        assert!(form.exterior_d().exterior_d().is_zero());
    }

    #[test]
    fn contraction_of_eta_gives_eta_i() {
        let c = ctx(2, 1, 1);
        let xi = VectorField::base_translation(&c, 0);
        assert_eq!(DiffForm::eta(&c).contract(&xi), DiffForm::eta_i(&c, 0));
    }

    #[test]
    fn contraction_of_omega_with_vertical_field() {
        let c = ctx(2, 2, 1);
        let xi = VectorField::new(&c)
            .with_fiber(0, Expr::var(VarRef::Base(0)))
            .with_fiber(1, Expr::one());
        let omega0 = DiffForm::omega(&c, 0, MultiIndex::zero(2));
        let i = omega0.contract(&xi);
        assert_eq!(i, DiffForm::scalar(&c, Expr::var(VarRef::Base(0))));
    }

    #[test]
    fn contraction_of_dy_wedge_eta_with_translation() {
        // i_{∂_{x^j}}(dy^μ ∧ η) = −dy^μ∧η_j, whose contact expansion is
        // −ω^μ∧η_j − z^μ_j η
        let c = ctx(2, 1, 1);
        let j = 1;
        let xi = VectorField::base_translation(&c, j);
        let dy_eta = DiffForm::dy(&c, 0).wedge(&DiffForm::eta(&c)).unwrap();
        let lhs = dy_eta.contract(&xi);
        let rhs = DiffForm::dy(&c, 0)
            .wedge(&DiffForm::eta_i(&c, j))
            .unwrap()
            .neg();
        assert_eq!(lhs, rhs);
        let z = Expr::var(VarRef::Jet(0, MultiIndex::unit(2, j)));
        let expanded = DiffForm::omega(&c, 0, MultiIndex::zero(2))
            .wedge(&DiffForm::eta_i(&c, j))
            .unwrap()
            .neg()
            .sub(&DiffForm::eta(&c).scale(&z));
        assert_eq!(lhs, expanded);
    }

    #[test]
    fn lie_derivative_of_dx_along_translation() {
        let c = ctx(2, 1, 1);
        let xi = VectorField::base_translation(&c, 0);
        assert!(DiffForm::dx(&c, 0).lie_derivative(&xi).is_zero());
    }

    #[test]
    fn contact_decompose_of_dy() {
        // dy^μ = ω^μ + z^μ_i dx^i
        let c = ctx(2, 1, 1);
        let parts = DiffForm::dy(&c, 0).contact_decompose();
        assert_eq!(parts[1], DiffForm::omega(&c, 0, MultiIndex::zero(2)));
        let mut horizontal = DiffForm::zero(&c, 1);
        for i in 0..2 {
            horizontal = horizontal.add(
                &DiffForm::dx(&c, i)
                    .scale(&Expr::var(VarRef::Jet(0, MultiIndex::unit(2, i)))),
            );
        }
        assert_eq!(parts[0], horizontal);
    }

    #[test]
    fn contact_decompose_roundtrip_and_grading() {
        let c = ctx(2, 2, 1);
        let f = Expr::func("F", c.coordinates());
        let form = DiffForm::dy(&c, 0)
            .wedge(&DiffForm::dz(&c, 1, MultiIndex::unit(2, 0)))
            .unwrap()
            .scale(&f);
        let parts = form.contact_decompose();
        let mut sum = DiffForm::zero(&c, 2);
        for (i, p) in parts.iter().enumerate() {
            assert!(p.is_exactly_contact(i));
            sum = sum.add(p);
        }
        assert_eq!(sum, form);
    }

    #[test]
    fn split_dh_dv_examples() {
        let c = ctx(2, 1, 1);
        // f = x^1: d_h = dx^1, d_v = 0
        let (dh, dv) = split_dh_dv(&Expr::var(VarRef::Base(0)), &c);
        assert_eq!(dh[0], Expr::one());
        assert!(dh[1].is_zero());
        assert!(dv.is_zero());
        // f = y: d_h coefficients are z_i, d_v = ω
        let (dh, dv) = split_dh_dv(&Expr::var(VarRef::Field(0)), &c);
        for (i, d) in dh.iter().enumerate() {
            assert_eq!(d, &Expr::var(VarRef::Jet(0, MultiIndex::unit(2, i))));
        }
        assert_eq!(dv, DiffForm::omega(&c, 0, MultiIndex::zero(2)));
    }

    #[test]
    fn dh_dv_homology() {
        let c = ctx(2, 1, 1);
        let f = Expr::func("F", c.coordinates()).mul(&Expr::func("G", c.coordinates()));
        let f_form = DiffForm::scalar(&c, f);
        assert!(f_form.d_h().d_h().is_zero());
        assert!(f_form.d_v().d_v().is_zero());
        let mixed = f_form.d_h().d_v().add(&f_form.d_v().d_h());
        assert!(mixed.is_zero());
    }

    #[test]
    fn con_differential_squares_to_zero() {
        let c = ctx(2, 1, 1);
        let f = Expr::func("F", c.coordinates());
        let alpha = DiffForm::dy(&c, 0).scale(&f);
        let beta = DiffForm::dy(&c, 0)
            .wedge(&DiffForm::dx(&c, 0))
            .unwrap()
            .scale(&Expr::var(VarRef::Field(0)));
        let (a1, b1) = con_differential(&alpha, &beta).unwrap();
        let (a2, b2) = con_differential(&a1, &b1).unwrap();
        assert!(a2.is_zero());
        assert!(b2.is_zero());
    }

    #[test]
    fn con_differential_checks_degrees() {
        let c = ctx(2, 1, 1);
        let alpha = DiffForm::dx(&c, 0);
        assert!(con_differential(&alpha, &alpha).is_err());
    }

    #[test]
    fn exterior_d_of_scalar_times_eta_is_contact() {
        // d(f η) = (d_v f) ∧ η: no horizontal part
        let c = ctx(2, 1, 1);
        let f = Expr::func("F", c.coordinates());
        let d = DiffForm::eta(&c).scale(&f).exterior_d();
        assert!(d.horizontal_part().is_zero());
        let (_, dv) = split_dh_dv(&f, &c);
        assert_eq!(d, dv.wedge(&DiffForm::eta(&c)).unwrap());
    }
}
