//! The divergence-form PDE system of a constitutive relation, its invariant
//! contact decomposition, admissible variations, the contact-corrected
//! Poincaré–Cartan form and the dual (boundary-term) expansion.

use std::collections::BTreeMap;

use crate::constitutive::{ConstitutiveRelation, CrKind, CrSpec, PCForm};
use crate::context::Ctx;
use crate::coords::{MultiIndex, VarRef};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::forms::DiffForm;
use crate::jet::{covariant_divergence, div_g, total_derivative, VectorField};

/// Residuals B_μ = d_i F^i_μ + λ_{G,i} F^i_μ − Π_μ, one per field, living on
/// the order-(k+1) shadow layer.
#[derive(Clone, Debug, PartialEq)]
pub struct BalanceSystem {
    pub ctx: Ctx,
    pub residuals: Vec<Expr>,
}

/// B_μ for a constitutive relation.
pub fn balance_system(cr: &ConstitutiveRelation) -> BalanceSystem {
    let ctx = &cr.ctx;
    let m = ctx.fiber_dim();
    let mut residuals = Vec::with_capacity(m);
    for mu in 0..m {
        let flux_col: Vec<Expr> = (0..ctx.base_dim())
            .map(|i| cr.flux[i][mu].clone())
            .collect();
        residuals.push(covariant_divergence(&flux_col, ctx).sub(&cr.source[mu]));
    }
    BalanceSystem {
        ctx: ctx.clone(),
        residuals,
    }
}

/// Euler–Lagrange residuals of a first-order Lagrangian with the metric
/// density folded in: d_i(∂_{z^μ_i}(Lg))/g − ∂_{y^μ}(Lg)/g. This equals
/// `balance_system` of the Lagrangian relation exactly (the conventional
/// display is the negative; the orientation here keeps one residual sign
/// everywhere).
pub fn euler_lagrange(l: &Expr, ctx: &Ctx) -> Result<BalanceSystem> {
    if ctx.order() != 1 {
        return Err(Error::WrongOrder {
            expected: 1,
            got: ctx.order(),
        });
    }
    let n = ctx.base_dim();
    let g = ctx.density();
    let lg = l.mul(&g);
    let mut residuals = Vec::new();
    for mu in 0..ctx.fiber_dim() {
        let mut acc = Expr::zero();
        for i in 0..n {
            let z = VarRef::Jet(mu, MultiIndex::unit(n, i));
            acc = acc.add(&total_derivative(&lg.partial_derivative(&z), i, ctx));
        }
        acc = acc.sub(&lg.partial_derivative(&VarRef::Field(mu)));
        residuals.push(acc.div(&g)?);
    }
    Ok(BalanceSystem {
        ctx: ctx.clone(),
        residuals,
    })
}

/// Contact decomposition of the pair differential of the sign-flipped
/// Poincaré–Cartan pair, d(Θ^n) + Π_μ dy^μ∧η, organized by contact level.
#[derive(Clone, Debug)]
pub struct IBSDecomposition {
    /// Coefficient of ω^μ∧η per field. Equals −B_μ for lifted covering
    /// relations; in general −B_μ + (p+zF)_{,y^μ}.
    pub omega1: Vec<Expr>,
    /// Defect block over |I| ≥ 1: the coefficient of ω^μ_I∧η enters the
    /// decomposition as −defect[(μ,I)]. For lifted relations the entries are
    /// F^j_ν on first-order slots; the block vanishes identically exactly
    /// when the flux part is a z-gradient (semi-Lagrangian within P).
    pub defect: BTreeMap<(usize, MultiIndex), Expr>,
    /// 2-contact remainder.
    pub two_contact: DiffForm,
    /// The decomposed (n+1)-form itself.
    pub total: DiffForm,
}

impl IBSDecomposition {
    /// Rebuild the decomposed form from the stored blocks; equals `total`
    /// exactly.
    pub fn reassemble(&self, ctx: &Ctx) -> DiffForm {
        let n = ctx.base_dim();
        let eta = DiffForm::eta(ctx);
        let mut out = self.two_contact.clone();
        for (mu, c) in self.omega1.iter().enumerate() {
            if !c.is_zero() {
                let w = DiffForm::omega(ctx, mu, MultiIndex::zero(n));
                out = out.add(&w.wedge(&eta).expect("same space").scale(c));
            }
        }
        for ((mu, idx), c) in &self.defect {
            if !c.is_zero() {
                let w = DiffForm::omega(ctx, *mu, idx.clone());
                out = out.sub(&w.wedge(&eta).expect("same space").scale(c));
            }
        }
        out
    }
}

/// Decompose d(Θ^n) + Π_μ dy^μ∧η for a covering relation into the balance
/// block, the contact defect block and the 2-contact remainder.
pub fn ibs_decomposition(cr: &ConstitutiveRelation) -> Result<IBSDecomposition> {
    if !cr.has_density() {
        return Err(Error::Precondition {
            op: "ibs_decomposition".into(),
            detail: "relation carries no density (lift it first)".into(),
        });
    }
    let ctx = &cr.ctx;
    let n = ctx.base_dim();
    let pc = cr.pc_form();
    let total = pc.n_form.exterior_d().add(&pc.n_plus_1);

    let parts = total.contact_decompose();
    debug_assert!(parts[0].is_zero());
    let one_contact = &parts[1];
    let mut two_contact = DiffForm::zero(ctx, n + 1);
    for (i, p) in parts.iter().enumerate() {
        if i >= 2 {
            two_contact = two_contact.add(p);
        }
    }

    let g = ctx.density();
    let eta_word: Vec<crate::forms::Covector> = (0..n).map(crate::forms::Covector::Dx).collect();
    let mut omega1 = vec![Expr::zero(); ctx.fiber_dim()];
    let mut defect: BTreeMap<(usize, MultiIndex), Expr> = BTreeMap::new();
    let mut seen: Vec<(usize, MultiIndex)> = Vec::new();
    for (word, _) in one_contact.terms() {
        let omega = word
            .iter()
            .find_map(|c| match c {
                crate::forms::Covector::Omega(mu, idx) => Some((*mu, idx.clone())),
                _ => None,
            })
            .expect("1-contact term");
        if seen.contains(&omega) {
            continue;
        }
        seen.push(omega.clone());
        let mut sorted = vec![crate::forms::Covector::Omega(omega.0, omega.1.clone())];
        sorted.extend(eta_word.iter().cloned());
        let c = one_contact.coefficient(&sorted).div(&g)?;
        if omega.1.is_empty_index() {
            omega1[omega.0] = c;
        } else {
            defect.insert((omega.0, omega.1), c.neg());
        }
    }
    Ok(IBSDecomposition {
        omega1,
        defect,
        two_contact,
        total,
    })
}

/// Admissibility residual Σ_{(μ,i)∈P} F^i_μ ω^μ_i(ξ^{k+1}) of a variation
/// field against a first-order relation; the variation separates the
/// individual balance equations iff the residual vanishes.
pub fn admissible_check(xi: &VectorField, cr: &ConstitutiveRelation) -> (bool, Expr) {
    let ctx = &cr.ctx;
    let n = ctx.base_dim();
    let mut residual = Expr::zero();
    for (mu, i) in ctx.admitted_first_order() {
        let chr = xi.contact_characteristic(mu, &MultiIndex::unit(n, i));
        residual = residual.add(&cr.flux[i][mu].mul(&chr));
    }
    (residual.is_zero(), residual)
}

/// The contact-corrected Poincaré–Cartan pair
/// Θ̂ = p η + F^i_μ dy^μ∧η_i − (Π_μ ω^μ + F^i_μ ω^μ_i)∧η. Contracting the
/// pair differential of Θ̂ for a lifted relation yields the balance
/// residuals against arbitrary variations.
pub fn modified_pc_form(cr: &ConstitutiveRelation) -> Result<PCForm> {
    if !cr.has_density() {
        return Err(Error::Precondition {
            op: "modified_pc_form".into(),
            detail: "relation carries no density (lift it first)".into(),
        });
    }
    let plain = cr.pc_form();
    let k = cr.k_form()?;
    Ok(PCForm {
        n_form: plain.n_form,
        n_plus_1: k.neg(),
        mod_eta: false,
        modified: true,
    })
}

/// d(Θ̂^n) minus the modified source: the (n+1)-form whose contraction with
/// any variation field produces −ω^μ(ξ) B_μ η + contact for lifted
/// relations.
pub fn modified_pair_differential(cr: &ConstitutiveRelation) -> Result<DiffForm> {
    let pc = modified_pc_form(cr)?;
    // subtracting the (negated) contact source adds K_C back
    Ok(pc.n_form.exterior_d().sub(&pc.n_plus_1))
}

/// η-coefficient of the boundary-term pair differential
/// d(i_ξ Θ^n) − i_ξΘ^{n+1}, computed through total derivatives:
/// ω^μ(ξ)B_μ + ξ^i(d_i+λ_{G,i})(p+zF) + (p+zF)∂_iξ^i + F^i_μ d_iω^μ(ξ).
pub fn dual_form_expansion(cr: &ConstitutiveRelation, xi: &VectorField) -> Result<Expr> {
    if !cr.has_density() {
        return Err(Error::Precondition {
            op: "dual_form_expansion".into(),
            detail: "relation carries no density (lift it first)".into(),
        });
    }
    xi.check_projectable()?;
    let ctx = &cr.ctx;
    let n = ctx.base_dim();
    let bs = balance_system(cr);
    let p_tilde = cr.p_tilde();
    let mut out = Expr::zero();
    for mu in 0..ctx.fiber_dim() {
        let chr = xi.contact_characteristic(mu, &MultiIndex::zero(n));
        out = out.add(&chr.mul(&bs.residuals[mu]));
    }
    for i in 0..n {
        if !xi.base[i].is_zero() {
            let dp = total_derivative(&p_tilde, i, ctx).add(&ctx.lambda_g(i).mul(&p_tilde));
            out = out.add(&xi.base[i].mul(&dp));
            out = out.add(&p_tilde.mul(&xi.base[i].partial_derivative(&VarRef::Base(i))));
        }
    }
    for mu in 0..ctx.fiber_dim() {
        let chr = xi.contact_characteristic(mu, &MultiIndex::zero(n));
        for i in 0..n {
            if !cr.flux[i][mu].is_zero() {
                out = out.add(&cr.flux[i][mu].mul(&total_derivative(&chr, i, ctx)));
            }
        }
    }
    Ok(out)
}

/// The same η-coefficient computed independently through the forms engine:
/// horizontal part of d(i_ξ Θ^n) − i_ξ Θ^{n+1}, divided by the density.
pub fn dual_form_via_engine(cr: &ConstitutiveRelation, xi: &VectorField) -> Result<Expr> {
    let ctx = &cr.ctx;
    let pc = cr.pc_form();
    let form = pc
        .n_form
        .contract(xi)
        .exterior_d()
        .sub(&pc.n_plus_1.contract(xi));
    let horizontal = form.horizontal_part();
    let word: Vec<crate::forms::Covector> = (0..ctx.base_dim())
        .map(crate::forms::Covector::Dx)
        .collect();
    horizontal.coefficient(&word).div(&ctx.density())
}

/// div_G of a base field (re-export for callers outside the jet module).
pub fn base_divergence(base: &[Expr], ctx: &Ctx) -> Expr {
    div_g(base, ctx)
}

/// Convenience constructor passthrough.
pub fn build(spec: CrSpec, ctx: &Ctx) -> Result<ConstitutiveRelation> {
    crate::constitutive::build_cr(spec, ctx)
}

impl BalanceSystem {
    /// True when every residual canonicalizes to zero.
    pub fn is_trivial(&self) -> bool {
        self.residuals.iter().all(|r| r.is_zero())
    }
}

impl ConstitutiveRelation {
    /// Marker for relations whose density is forced (p = −zF).
    pub fn is_lifted(&self) -> bool {
        matches!(self.kind, CrKind::Lifted) || (self.has_density() && self.p_tilde().is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{build_cr, ConstitutiveRelation};
    use crate::context::JetContext;

    fn wave() -> (Ctx, ConstitutiveRelation, Expr) {
        let ctx = JetContext::full(2, 1, 1)
            .with_names(&["t", "x"], &["u"])
            .into_ctx();
        let zt = Expr::var(VarRef::Jet(0, MultiIndex::unit(2, 0)));
        let zx = Expr::var(VarRef::Jet(0, MultiIndex::unit(2, 1)));
        let l = zt
            .pow(2)
            .unwrap()
            .sub(&zx.pow(2).unwrap())
            .scale(&num::BigRational::new(1.into(), 2.into()));
        let cr = build_cr(CrSpec::Lagrangian(l.clone()), &ctx).unwrap();
        (ctx, cr, l)
    }

    #[test]
    fn wave_equation_residual() {
        let (ctx, cr, l) = wave();
        let bs = balance_system(&cr);
        let ztt = Expr::var(VarRef::Jet(0, MultiIndex::from_counts(vec![2, 0])));
        let zxx = Expr::var(VarRef::Jet(0, MultiIndex::from_counts(vec![0, 2])));
        assert_eq!(bs.residuals[0], ztt.sub(&zxx));
        let el = euler_lagrange(&l, &ctx).unwrap();
        assert_eq!(el.residuals, bs.residuals);
    }

    #[test]
    fn zero_relation_is_trivial() {
        let ctx = JetContext::full(2, 2, 1).into_ctx();
        assert!(balance_system(&ConstitutiveRelation::zero(&ctx)).is_trivial());
    }

    #[test]
    fn forced_source_from_field_lagrangian() {
        // L = y: residual is d_i(0) − 1 = −1; the conventional display
        // flips the sign
        let ctx = JetContext::full(1, 1, 1).into_ctx();
        let el = euler_lagrange(&Expr::var(VarRef::Field(0)), &ctx).unwrap();
        assert_eq!(el.residuals[0], Expr::from_int(-1));
    }

    #[test]
    fn euler_lagrange_with_density_matches_balance() {
        use num::BigRational;
        let g = Expr::exp(Expr::var(VarRef::Base(0)));
        let ctx = JetContext::full(1, 1, 1)
            .with_metric_density(g)
            .unwrap()
            .into_ctx();
        let z = Expr::var(VarRef::Jet(0, MultiIndex::unit(1, 0)));
        let l = z
            .pow(2)
            .unwrap()
            .scale(&BigRational::new(1.into(), 2.into()))
            .add(&Expr::var(VarRef::Field(0)).pow(3).unwrap());
        let el = euler_lagrange(&l, &ctx).unwrap();
        let cr = build_cr(CrSpec::Lagrangian(l), &ctx).unwrap();
        let bs = balance_system(&cr);
        assert_eq!(el.residuals, bs.residuals);
        assert!(!ctx.lambda_g(0).is_zero());
    }

    #[test]
    fn ibs_blocks_for_lifted_relation() {
        let (ctx, cr, _) = wave();
        let lifted = cr.lift();
        let dec = ibs_decomposition(&lifted).unwrap();
        let bs = balance_system(&lifted);
        assert_eq!(dec.omega1[0], bs.residuals[0].neg());
        for (mu, i) in ctx.admitted_first_order() {
            assert_eq!(
                dec.defect.get(&(mu, MultiIndex::unit(2, i))).unwrap(),
                &lifted.flux[i][mu]
            );
        }
        assert_eq!(dec.reassemble(&ctx), dec.total);
    }

    #[test]
    fn ibs_defect_vanishes_for_lagrangian_covering() {
        let (ctx, cr, _) = wave();
        let dec = ibs_decomposition(&cr).unwrap();
        assert!(dec.defect.is_empty());
        assert_eq!(dec.reassemble(&ctx), dec.total);
    }

    #[test]
    fn admissibility_examples() {
        let (ctx, cr, _) = wave();
        // constant vertical field is admissible
        let xi = VectorField::new(&ctx).with_fiber(0, Expr::one());
        let pr = crate::jet::prolong(&xi, 2, &ctx).unwrap();
        let (ok, res) = admissible_check(&pr, &cr);
        assert!(ok, "residual {:?}", res);
        // x-dependent vertical field is not: residual Σ F^i ∂_i ξ
        let xi = VectorField::new(&ctx).with_fiber(0, Expr::var(VarRef::Base(0)));
        let pr = crate::jet::prolong(&xi, 2, &ctx).unwrap();
        let (ok, res) = admissible_check(&pr, &cr);
        assert!(!ok);
        let zt = Expr::var(VarRef::Jet(0, MultiIndex::unit(2, 0)));
        assert_eq!(res, zt);
    }

    #[test]
    fn modified_form_yields_balance_against_arbitrary_variations() {
        // fully symbolic variation: every coefficient is an opaque atom
        let (ctx, cr, _) = wave();
        let lifted = cr.lift();
        let x = modified_pair_differential(&lifted).unwrap();
        let coords = ctx.coordinates();
        let xi = VectorField::new(&ctx)
            .with_base(0, Expr::func("a1", vec![VarRef::Base(0), VarRef::Base(1)]))
            .with_base(1, Expr::func("a2", vec![VarRef::Base(0), VarRef::Base(1)]))
            .with_fiber(0, Expr::func("b", coords.clone()))
            .with_jet(0, MultiIndex::unit(2, 0), Expr::func("c1", coords.clone()))
            .with_jet(0, MultiIndex::unit(2, 1), Expr::func("c2", coords));
        let contracted = x.contract(&xi);
        let bs = balance_system(&lifted);
        let chr = xi.contact_characteristic(0, &MultiIndex::zero(2));
        let expected = DiffForm::eta(&ctx).scale(&chr.mul(&bs.residuals[0]).neg());
        assert_eq!(contracted.horizontal_part(), expected);
    }

    #[test]
    fn dual_expansion_matches_engine() {
        let (ctx, cr, _) = wave();
        let lifted = cr.lift();
        let xi = VectorField::new(&ctx)
            .with_base(0, Expr::var(VarRef::Base(1)))
            .with_fiber(0, Expr::var(VarRef::Field(0)));
        let pr = crate::jet::prolong(&xi, 1, &ctx).unwrap();
        let a = dual_form_expansion(&lifted, &pr).unwrap();
        let b = dual_form_via_engine(&lifted, &pr).unwrap();
        assert_eq!(a, b);

        // vertical field with vanishing flux defect reduces to Σ ξ^μ B_μ
        let xi = VectorField::new(&ctx).with_fiber(0, Expr::one());
        let pr = crate::jet::prolong(&xi, 1, &ctx).unwrap();
        let a = dual_form_expansion(&lifted, &pr).unwrap();
        let bs = balance_system(&lifted);
        assert_eq!(a, bs.residuals[0]);

        // ξ = 0
        let zero = VectorField::new(&ctx);
        assert!(dual_form_expansion(&lifted, &zero).unwrap().is_zero());
    }
}
