//! Total derivatives, vector fields on (partial) jet spaces and their
//! canonical lifts: flow prolongation to jet coordinates and the lifts to
//! the form bundles that keep the canonical forms invariant.

use std::collections::BTreeMap;

use crate::context::JetContext;
use crate::coords::{FiberCoord, MultiIndex, VarRef};
use crate::error::{Error, Result};
use crate::expr::{equals, Equality, Expr, DEFAULT_EQUALITY_SEED};

/// d_i: the total derivative in direction x^i. Differentiation treats every
/// fiber/jet variable as a function of x through the next-order coordinate,
/// so the result may live one order above the input (the shadow layer).
pub fn total_derivative(e: &Expr, i: usize, ctx: &JetContext) -> Expr {
    let mut out = e.partial_derivative(&VarRef::Base(i));
    for v in e.support() {
        let next = match &v {
            VarRef::Base(_) => continue,
            VarRef::Field(mu) => VarRef::Jet(*mu, MultiIndex::unit(ctx.base_dim(), i)),
            VarRef::Jet(mu, idx) => VarRef::Jet(*mu, idx.step(i)),
        };
        let de = e.partial_derivative(&v);
        if !de.is_zero() {
            out = out.add(&Expr::var(next).mul(&de));
        }
    }
    out
}

/// Iterated total derivative d_I.
pub fn total_derivative_multi(e: &Expr, idx: &MultiIndex, ctx: &JetContext) -> Expr {
    let mut out = e.clone();
    for (i, &c) in idx.counts().iter().enumerate() {
        for _ in 0..c {
            out = total_derivative(&out, i, ctx);
        }
    }
    out
}

/// Property-test helper: total derivatives commute.
pub fn commutes_total(e: &Expr, i: usize, j: usize, ctx: &JetContext) -> bool {
    let ab = total_derivative(&total_derivative(e, i, ctx), j, ctx);
    let ba = total_derivative(&total_derivative(e, j, ctx), i, ctx);
    equals(&ab, &ba, DEFAULT_EQUALITY_SEED).holds()
}

/// Covariant divergence of a base-indexed family: (d_i + λ_{G,i}) K^i.
pub fn covariant_divergence(flux: &[Expr], ctx: &JetContext) -> Expr {
    let mut out = Expr::zero();
    for (i, k) in flux.iter().enumerate() {
        out = out.add(&total_derivative(k, i, ctx));
        let lam = ctx.lambda_g(i);
        if !lam.is_zero() {
            out = out.add(&lam.mul(k));
        }
    }
    out
}

/// div_G(ξ̄) = ∂_i ξ^i + ξ^i λ_{G,i} for the base projection of a
/// projectable field.
pub fn div_g(base: &[Expr], ctx: &JetContext) -> Expr {
    let mut out = Expr::zero();
    for (i, xi) in base.iter().enumerate() {
        out = out.add(&xi.partial_derivative(&VarRef::Base(i)));
        let lam = ctx.lambda_g(i);
        if !lam.is_zero() {
            out = out.add(&lam.mul(xi));
        }
    }
    out
}

/// A vector field with coefficients on base, fiber and jet directions, plus
/// optional coefficients on form-bundle fiber directions.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct VectorField {
    pub base: Vec<Expr>,
    pub fiber: Vec<Expr>,
    pub jet: BTreeMap<(usize, MultiIndex), Expr>,
    pub form_fiber: BTreeMap<FiberCoord, Expr>,
}

impl VectorField {
    pub fn new(ctx: &JetContext) -> VectorField {
        VectorField {
            base: vec![Expr::zero(); ctx.base_dim()],
            fiber: vec![Expr::zero(); ctx.fiber_dim()],
            jet: BTreeMap::new(),
            form_fiber: BTreeMap::new(),
        }
    }

    /// ∂_{x^i}
    pub fn base_translation(ctx: &JetContext, i: usize) -> VectorField {
        let mut v = VectorField::new(ctx);
        v.base[i] = Expr::one();
        v
    }

    pub fn with_base(mut self, i: usize, e: Expr) -> VectorField {
        self.base[i] = e;
        self
    }

    pub fn with_fiber(mut self, mu: usize, e: Expr) -> VectorField {
        self.fiber[mu] = e;
        self
    }

    pub fn with_jet(mut self, mu: usize, idx: MultiIndex, e: Expr) -> VectorField {
        self.jet.insert((mu, idx), e);
        self
    }

    pub fn with_form_fiber(mut self, c: FiberCoord, e: Expr) -> VectorField {
        self.form_fiber.insert(c, e);
        self
    }

    /// Coefficient on a coordinate direction.
    pub fn coefficient(&self, v: &VarRef) -> Expr {
        match v {
            VarRef::Base(i) => self.base.get(*i).cloned().unwrap_or_else(Expr::zero),
            VarRef::Field(mu) => self.fiber.get(*mu).cloned().unwrap_or_else(Expr::zero),
            VarRef::Jet(mu, idx) => self
                .jet
                .get(&(*mu, idx.clone()))
                .cloned()
                .unwrap_or_else(Expr::zero),
        }
    }

    pub fn is_vertical(&self) -> bool {
        self.base.iter().all(|e| e.is_zero())
    }

    /// Apply the field to a scalar as a derivation.
    pub fn apply(&self, e: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (i, c) in self.base.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&c.mul(&e.partial_derivative(&VarRef::Base(i))));
            }
        }
        for (mu, c) in self.fiber.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&c.mul(&e.partial_derivative(&VarRef::Field(mu))));
            }
        }
        for ((mu, idx), c) in &self.jet {
            if !c.is_zero() {
                out = out.add(&c.mul(&e.partial_derivative(&VarRef::Jet(*mu, idx.clone()))));
            }
        }
        for (fc, c) in &self.form_fiber {
            if !c.is_zero() {
                out = out.add(&c.mul(&e.fiber_derivative(fc)));
            }
        }
        out
    }

    /// ω^μ_I(ξ) = ξ^{(μ,I)} − z^μ_{I+1_j} ξ^j, the characteristic of the
    /// basic contact form against this field.
    pub fn contact_characteristic(&self, mu: usize, idx: &MultiIndex) -> Expr {
        let mut out = self.coefficient(&VarRef::jet(mu, idx.clone()));
        for (j, xi) in self.base.iter().enumerate() {
            if !xi.is_zero() {
                let z = Expr::var(VarRef::Jet(mu, idx.step(j)));
                out = out.sub(&z.mul(xi));
            }
        }
        out
    }

    /// The field is projectable when base coefficients depend on x only and
    /// fiber coefficients on (x, y) only.
    pub fn check_projectable(&self) -> Result<()> {
        for (i, c) in self.base.iter().enumerate() {
            if c.support().iter().any(|v| !matches!(v, VarRef::Base(_))) {
                return Err(Error::NotProjectable(format!(
                    "base coefficient on x^{} depends on fiber variables",
                    i + 1
                )));
            }
        }
        for (mu, c) in self.fiber.iter().enumerate() {
            if c.support().iter().any(|v| matches!(v, VarRef::Jet(_, _))) {
                return Err(Error::NotProjectable(format!(
                    "fiber coefficient on y^{} depends on jet variables",
                    mu + 1
                )));
            }
        }
        Ok(())
    }

    /// Structure preservation for a split base: coefficients along one block
    /// may not depend on coordinates of the other block.
    pub fn check_structure_preserving(&self, ctx: &JetContext) -> Result<()> {
        self.check_projectable()?;
        if let Some(blocks) = ctx.base_block() {
            for (i, c) in self.base.iter().enumerate() {
                for v in c.support() {
                    if let VarRef::Base(j) = v {
                        if blocks[j] != blocks[i] {
                            return Err(Error::StructureViolation(format!(
                                "base coefficient on {} depends on {} across the split",
                                ctx.base_name(i),
                                ctx.base_name(j)
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Commutator of derivations, computed coefficient-wise.
    pub fn lie_bracket(&self, other: &VectorField, ctx: &JetContext) -> VectorField {
        let mut out = VectorField::new(ctx);
        for i in 0..ctx.base_dim() {
            out.base[i] = self.apply(&other.base[i]).sub(&other.apply(&self.base[i]));
        }
        for mu in 0..ctx.fiber_dim() {
            out.fiber[mu] = self
                .apply(&other.fiber[mu])
                .sub(&other.apply(&self.fiber[mu]));
        }
        let mut slots: Vec<(usize, MultiIndex)> = self.jet.keys().cloned().collect();
        for k in other.jet.keys() {
            if !slots.contains(k) {
                slots.push(k.clone());
            }
        }
        for (mu, idx) in slots {
            let a = self.apply(
                &other
                    .jet
                    .get(&(mu, idx.clone()))
                    .cloned()
                    .unwrap_or_else(Expr::zero),
            );
            let b = other.apply(
                &self
                    .jet
                    .get(&(mu, idx.clone()))
                    .cloned()
                    .unwrap_or_else(Expr::zero),
            );
            let c = a.sub(&b);
            if !c.is_zero() {
                out.jet.insert((mu, idx), c);
            }
        }
        let mut fslots: Vec<FiberCoord> = self.form_fiber.keys().cloned().collect();
        for k in other.form_fiber.keys() {
            if !fslots.contains(k) {
                fslots.push(*k);
            }
        }
        for fc in fslots {
            let a = self.apply(
                &other
                    .form_fiber
                    .get(&fc)
                    .cloned()
                    .unwrap_or_else(Expr::zero),
            );
            let b = other.apply(
                &self
                    .form_fiber
                    .get(&fc)
                    .cloned()
                    .unwrap_or_else(Expr::zero),
            );
            let c = a.sub(&b);
            if !c.is_zero() {
                out.form_fiber.insert(fc, c);
            }
        }
        out
    }
}

/// Flow prolongation of a projectable, structure-preserving field to the jet
/// coordinates admitted by the context, up to `order` (which may exceed the
/// truncation by one for shadow-layer arguments). The coefficient on
/// ∂_{z^μ_I} is d_I(ξ^μ − ξ^i z^μ_i) + ξ^i z^μ_{I+1_i}.
pub fn prolong(xi: &VectorField, order: usize, ctx: &JetContext) -> Result<VectorField> {
    xi.check_structure_preserving(ctx)?;
    let n = ctx.base_dim();
    let mut out = xi.clone();
    out.jet.clear();

    let mut slots: Vec<(usize, MultiIndex)> = Vec::new();
    for (mu, idx) in ctx.admitted_jets() {
        if idx.order() <= order {
            slots.push((*mu, idx.clone()));
        }
    }
    if order > ctx.order() {
        // shadow layer: one-step extensions of admitted slots
        for (mu, idx) in ctx.admitted_jets() {
            for i in 0..n {
                let next = idx.step(i);
                if next.order() <= order && !slots.contains(&(*mu, next.clone())) {
                    slots.push((*mu, next));
                }
            }
        }
        if ctx.order() == 0 {
            for mu in 0..ctx.fiber_dim() {
                for i in 0..n {
                    let next = MultiIndex::unit(n, i);
                    if !slots.contains(&(mu, next.clone())) {
                        slots.push((mu, next));
                    }
                }
            }
        }
    }

    for (mu, idx) in slots {
        // characteristic Q^μ = ξ^μ − ξ^i z^μ_i
        let mut q = xi.fiber[mu].clone();
        for i in 0..n {
            if !xi.base[i].is_zero() {
                let z = Expr::var(VarRef::Jet(mu, MultiIndex::unit(n, i)));
                q = q.sub(&xi.base[i].mul(&z));
            }
        }
        let mut coeff = total_derivative_multi(&q, &idx, ctx);
        for i in 0..n {
            if !xi.base[i].is_zero() {
                let z = Expr::var(VarRef::Jet(mu, idx.step(i)));
                coeff = coeff.add(&xi.base[i].mul(&z));
            }
        }
        if idx.order() <= ctx.order() {
            for v in coeff.support() {
                if !ctx.is_admitted(&v) && !matches!(v, VarRef::Base(_)) {
                    return Err(Error::StructureViolation(format!(
                        "prolongation coefficient on z[{},{}] depends on {:?}, \
                         which the bundle does not admit",
                        mu + 1,
                        idx,
                        v
                    )));
                }
            }
        }
        if !coeff.is_zero() {
            out.jet.insert((mu, idx), coeff);
        }
    }
    Ok(out)
}

/// Lift of a projectable field to the bundle of n-forms annihilated by two
/// vertical vectors, relative to a semibasic correction α = α^j(x,y) η_j.
/// The lifted field satisfies L_{ξ*} Θ = dα for the canonical form
/// Θ = p η + p^i_μ dy^μ∧η_i.
pub fn lift_semibasic(xi: &VectorField, alpha: &[Expr], ctx: &JetContext) -> Result<VectorField> {
    xi.check_projectable()?;
    let n = ctx.base_dim();
    let m = ctx.fiber_dim();
    let div_xi = div_g(&xi.base, ctx);
    let mut out = xi.clone();

    // ξ^p = −p div_G(ξ̄) − p^i_μ ∂ξ^μ/∂x^i + div_G(ᾱ)
    let p = Expr::fiber(FiberCoord::P);
    let mut xp = p.mul(&div_xi).neg();
    for i in 0..n {
        for mu in 0..m {
            let pi = Expr::fiber(FiberCoord::Pi(i, mu));
            let d = xi.fiber[mu].partial_derivative(&VarRef::Base(i));
            if !d.is_zero() {
                xp = xp.sub(&pi.mul(&d));
            }
        }
    }
    if !alpha.is_empty() {
        xp = xp.add(&div_g(alpha, ctx));
    }
    out.form_fiber.insert(FiberCoord::P, xp);

    // ξ^{p^i_μ} = p^j_μ ∂ξ^i/∂x^j − p^i_ν ∂ξ^ν/∂y^μ − p^i_μ div_G(ξ̄) + ∂α^i/∂y^μ
    for i in 0..n {
        for mu in 0..m {
            let mut c = Expr::zero();
            for j in 0..n {
                let d = xi.base[i].partial_derivative(&VarRef::Base(j));
                if !d.is_zero() {
                    c = c.add(&Expr::fiber(FiberCoord::Pi(j, mu)).mul(&d));
                }
            }
            for nu in 0..m {
                let d = xi.fiber[nu].partial_derivative(&VarRef::Field(mu));
                if !d.is_zero() {
                    c = c.sub(&Expr::fiber(FiberCoord::Pi(i, nu)).mul(&d));
                }
            }
            c = c.sub(&Expr::fiber(FiberCoord::Pi(i, mu)).mul(&div_xi));
            if !alpha.is_empty() {
                c = c.add(&alpha[i].partial_derivative(&VarRef::Field(mu)));
            }
            out.form_fiber.insert(FiberCoord::Pi(i, mu), c);
        }
    }
    Ok(out)
}

/// Lift of a projectable field to the bundle of (n+1)-forms, keeping the
/// canonical form p_μ dy^μ∧η invariant:
/// ξ^{p_σ} = −p_σ div_G(ξ̄) − p_ν ∂ξ^ν/∂y^σ.
pub fn lift_n_plus_1(xi: &VectorField, ctx: &JetContext) -> Result<VectorField> {
    xi.check_projectable()?;
    let m = ctx.fiber_dim();
    let div_xi = div_g(&xi.base, ctx);
    let mut out = xi.clone();
    for sigma in 0..m {
        let mut c = Expr::fiber(FiberCoord::Pmu(sigma)).mul(&div_xi).neg();
        for nu in 0..m {
            let d = xi.fiber[nu].partial_derivative(&VarRef::Field(sigma));
            if !d.is_zero() {
                c = c.sub(&Expr::fiber(FiberCoord::Pmu(nu)).mul(&d));
            }
        }
        out.form_fiber.insert(FiberCoord::Pmu(sigma), c);
    }
    Ok(out)
}

/// Lift of a projectable field on the 1-jet space (fiber coefficients
/// z-independent, jet coefficients arbitrary) to the bundle of (n+1)-forms
/// over it, keeping (q_μ ω^μ + q^i_μ ω^μ_i)∧η invariant:
/// ξ^{q_ν}   = −q_μ ξ^μ_{,y^ν} − q^i_μ ξ^μ_{i,y^ν} − q_ν div_G(ξ̄)
/// ξ^{q^j_ν} = −q_μ ξ^μ_{,z^ν_j} − q^i_μ ξ^μ_{i,z^ν_j} − q^j_ν div_G(ξ̄)
pub fn lift_forms_on_j1(xi: &VectorField, ctx: &JetContext) -> Result<VectorField> {
    xi.check_projectable()?;
    let n = ctx.base_dim();
    let m = ctx.fiber_dim();
    for (mu, c) in xi.fiber.iter().enumerate() {
        if c.support().iter().any(|v| matches!(v, VarRef::Jet(_, _))) {
            return Err(Error::NotProjectable(format!(
                "fiber coefficient on y^{} depends on jet variables",
                mu + 1
            )));
        }
    }
    let div_xi = div_g(&xi.base, ctx);
    let jet_coeff = |mu: usize, j: usize| -> Expr {
        xi.jet
            .get(&(mu, MultiIndex::unit(n, j)))
            .cloned()
            .unwrap_or_else(Expr::zero)
    };
    let mut out = xi.clone();
    for nu in 0..m {
        let mut c = Expr::fiber(FiberCoord::Q(nu)).mul(&div_xi).neg();
        for mu in 0..m {
            let d = xi.fiber[mu].partial_derivative(&VarRef::Field(nu));
            if !d.is_zero() {
                c = c.sub(&Expr::fiber(FiberCoord::Q(mu)).mul(&d));
            }
            for i in 0..n {
                let d = jet_coeff(mu, i).partial_derivative(&VarRef::Field(nu));
                if !d.is_zero() {
                    c = c.sub(&Expr::fiber(FiberCoord::Qi(i, mu)).mul(&d));
                }
            }
        }
        out.form_fiber.insert(FiberCoord::Q(nu), c);
        for j in 0..n {
            let znj = VarRef::Jet(nu, MultiIndex::unit(n, j));
            let mut c = Expr::fiber(FiberCoord::Qi(j, nu)).mul(&div_xi).neg();
            for mu in 0..m {
                let d = xi.fiber[mu].partial_derivative(&znj);
                if !d.is_zero() {
                    c = c.sub(&Expr::fiber(FiberCoord::Q(mu)).mul(&d));
                }
                for i in 0..n {
                    let d = jet_coeff(mu, i).partial_derivative(&znj);
                    if !d.is_zero() {
                        c = c.sub(&Expr::fiber(FiberCoord::Qi(i, mu)).mul(&d));
                    }
                }
            }
            out.form_fiber.insert(FiberCoord::Qi(j, nu), c);
        }
    }
    Ok(out)
}

/// Coefficient-wise equality ignoring stored zeros.
pub fn fields_equal(a: &VectorField, b: &VectorField) -> bool {
    let norm = |f: &VectorField| {
        let mut f = f.clone();
        f.jet.retain(|_, e| !e.is_zero());
        f.form_fiber.retain(|_, e| !e.is_zero());
        f
    };
    let (a, b) = (norm(a), norm(b));
    a.base == b.base && a.fiber == b.fiber && a.jet == b.jet && a.form_fiber == b.form_fiber
}

/// Randomized-equality wrapper used by property helpers.
pub fn exprs_probably_equal(a: &Expr, b: &Expr) -> bool {
    matches!(
        equals(a, b, DEFAULT_EQUALITY_SEED),
        Equality::Equal | Equality::ProbablyEqual
    )
}
