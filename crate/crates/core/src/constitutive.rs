//! Constitutive data (flux, source, optional density), its Poincaré–Cartan
//! forms, the standard constructors, the Legendre map, and the local
//! variationality tests (Lepage condition, Helmholtz condition, interior
//! Euler operator).

use crate::context::Ctx;
use crate::coords::{MultiIndex, VarRef};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::forms::{Covector, DiffForm};
use crate::jet::covariant_divergence;

/// How a constitutive relation was built.
#[derive(Clone, Debug, PartialEq)]
pub enum CrKind {
    Generic,
    /// F^i_μ = ∂L/∂z^μ_i, Π_μ = ∂L/∂y^μ, p = L − z^μ_i F^i_μ.
    Lagrangian(Expr),
    /// Lagrangian flux part with a free source.
    SemiLagrangian(Expr, Vec<Expr>),
    /// Flux from L, source D_{,z^μ_0} − L_{,y^μ} (gradient-flow systems).
    LagrangianDissipative(Expr, Expr),
    /// Spatial flux from L, independently supplied densities F^0_μ.
    SpatialLagrangian(Expr, Vec<Expr>),
    /// Point-bundle relation with flux F^i_μ = ∂h^i/∂y^μ.
    VectorPotential(Vec<Expr>),
    /// Density forced to p = −Σ_{(μ,j)∈P} z^μ_j F^j_μ.
    Lifted,
}

/// The triple (p; F^i_μ; Π_μ). A relation with a density present is a
/// covering relation; without one, the n-form of its Poincaré–Cartan pair is
/// defined modulo η.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstitutiveRelation {
    pub ctx: Ctx,
    /// flux[i][mu] = F^i_μ
    pub flux: Vec<Vec<Expr>>,
    /// source[mu] = Π_μ
    pub source: Vec<Expr>,
    pub density: Option<Expr>,
    pub kind: CrKind,
}

/// The Poincaré–Cartan pair of a constitutive relation: an n-form and an
/// (n+1)-form, in the contact basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PCForm {
    pub n_form: DiffForm,
    pub n_plus_1: DiffForm,
    /// The n-form is only defined modulo η (no density present).
    pub mod_eta: bool,
    /// Source written through the contact (n+1)-form −K_C instead of
    /// Π dy∧η.
    pub modified: bool,
}

impl ConstitutiveRelation {
    pub fn new(
        ctx: &Ctx,
        flux: Vec<Vec<Expr>>,
        source: Vec<Expr>,
        density: Option<Expr>,
        kind: CrKind,
    ) -> Result<ConstitutiveRelation> {
        let cr = ConstitutiveRelation {
            ctx: ctx.clone(),
            flux,
            source,
            density,
            kind,
        };
        cr.validate()?;
        Ok(cr)
    }

    pub fn zero(ctx: &Ctx) -> ConstitutiveRelation {
        let n = ctx.base_dim();
        let m = ctx.fiber_dim();
        ConstitutiveRelation {
            ctx: ctx.clone(),
            flux: vec![vec![Expr::zero(); m]; n],
            source: vec![Expr::zero(); m],
            density: None,
            kind: CrKind::Generic,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.ctx.base_dim();
        let m = self.ctx.fiber_dim();
        if self.flux.len() != n || self.flux.iter().any(|row| row.len() != m) {
            return Err(Error::IndexOutOfRange("flux table shape".into()));
        }
        if self.source.len() != m {
            return Err(Error::IndexOutOfRange("source length".into()));
        }
        let check = |e: &Expr, what: &str| -> Result<()> {
            for v in e.support() {
                if !self.ctx.is_admitted(&v) {
                    return Err(Error::NotAdmitted(format!(
                        "{} depends on {}",
                        what,
                        self.ctx.display_var(&v)
                    )));
                }
            }
            Ok(())
        };
        for (i, row) in self.flux.iter().enumerate() {
            for (mu, e) in row.iter().enumerate() {
                check(e, &format!("F[{},{}]", i + 1, mu + 1))?;
            }
        }
        for (mu, e) in self.source.iter().enumerate() {
            check(e, &format!("Pi[{}]", mu + 1))?;
        }
        if let Some(p) = &self.density {
            check(p, "p")?;
        }
        Ok(())
    }

    pub fn has_density(&self) -> bool {
        self.density.is_some()
    }

    /// p + Σ_{(μ,j)∈P} z^μ_j F^j_μ (zero density if absent). For the lifted
    /// relation this vanishes identically.
    pub fn p_tilde(&self) -> Expr {
        let mut out = self.density.clone().unwrap_or_else(Expr::zero);
        for (mu, j) in self.ctx.admitted_first_order() {
            let z = Expr::var(VarRef::Jet(mu, MultiIndex::unit(self.ctx.base_dim(), j)));
            out = out.add(&z.mul(&self.flux[j][mu]));
        }
        out
    }

    /// The covering relation with p = −Σ_{(μ,j)∈P} z^μ_j F^j_μ; its
    /// Poincaré–Cartan n-form is F^i_μ ω^μ∧η_i.
    pub fn lift(&self) -> ConstitutiveRelation {
        let n = self.ctx.base_dim();
        let mut p = Expr::zero();
        for (mu, j) in self.ctx.admitted_first_order() {
            let z = Expr::var(VarRef::Jet(mu, MultiIndex::unit(n, j)));
            p = p.sub(&z.mul(&self.flux[j][mu]));
        }
        ConstitutiveRelation {
            ctx: self.ctx.clone(),
            flux: self.flux.clone(),
            source: self.source.clone(),
            density: Some(p),
            kind: CrKind::Lifted,
        }
    }

    /// Poincaré–Cartan pair: Θ^n = p η + F^i_μ dy^μ∧η_i,
    /// Θ^{n+1} = Π_μ dy^μ∧η (both expanded into the contact basis).
    pub fn pc_form(&self) -> PCForm {
        let ctx = &self.ctx;
        let mut n_form = match &self.density {
            Some(p) => DiffForm::eta(ctx).scale(p),
            None => DiffForm::zero(ctx, ctx.base_dim()),
        };
        for i in 0..ctx.base_dim() {
            for mu in 0..ctx.fiber_dim() {
                if !self.flux[i][mu].is_zero() {
                    let dy_eta_i = DiffForm::dy(ctx, mu)
                        .wedge(&DiffForm::eta_i(ctx, i))
                        .expect("same space");
                    n_form = n_form.add(&dy_eta_i.scale(&self.flux[i][mu]));
                }
            }
        }
        let mut n_plus_1 = DiffForm::zero(ctx, ctx.base_dim() + 1);
        for mu in 0..ctx.fiber_dim() {
            if !self.source[mu].is_zero() {
                let dy_eta = DiffForm::dy(ctx, mu)
                    .wedge(&DiffForm::eta(ctx))
                    .expect("same space");
                n_plus_1 = n_plus_1.add(&dy_eta.scale(&self.source[mu]));
            }
        }
        PCForm {
            n_form,
            n_plus_1,
            mod_eta: self.density.is_none(),
            modified: false,
        }
    }

    /// The contact source form K_C = (F^i_μ ω^μ_i + Π_μ ω^μ)∧η, living one
    /// order up. First order only.
    pub fn k_form(&self) -> Result<DiffForm> {
        if self.ctx.order() != 1 {
            return Err(Error::WrongOrder {
                expected: 1,
                got: self.ctx.order(),
            });
        }
        let ctx = &self.ctx;
        let n = ctx.base_dim();
        let eta = DiffForm::eta(ctx);
        let mut out = DiffForm::zero(ctx, n + 1);
        for mu in 0..ctx.fiber_dim() {
            if !self.source[mu].is_zero() {
                let w = DiffForm::omega(ctx, mu, MultiIndex::zero(n));
                out = out.add(&w.wedge(&eta)?.scale(&self.source[mu]));
            }
            for i in 0..n {
                if !self.flux[i][mu].is_zero() {
                    let w = DiffForm::omega(ctx, mu, MultiIndex::unit(n, i));
                    out = out.add(&w.wedge(&eta)?.scale(&self.flux[i][mu]));
                }
            }
        }
        Ok(out)
    }
}

/// Constructor inputs for [`build_cr`].
pub enum CrSpec {
    Generic {
        flux: Vec<Vec<Expr>>,
        source: Vec<Expr>,
        density: Option<Expr>,
    },
    Lagrangian(Expr),
    SemiLagrangian { lagrangian: Expr, source: Vec<Expr> },
    LagrangianDissipative { lagrangian: Expr, dissipation: Expr },
    SpatialLagrangian { lagrangian: Expr, densities: Vec<Expr> },
    VectorPotential { h: Vec<Expr>, source: Vec<Expr> },
}

/// Build a constitutive relation of a standard kind; flux/source components
/// are generated by partial differentiation where the kind prescribes them.
pub fn build_cr(spec: CrSpec, ctx: &Ctx) -> Result<ConstitutiveRelation> {
    let n = ctx.base_dim();
    let m = ctx.fiber_dim();
    let flux_from_lagrangian = |l: &Expr| -> Vec<Vec<Expr>> {
        let mut flux = vec![vec![Expr::zero(); m]; n];
        for (mu, i) in ctx.admitted_first_order() {
            let z = VarRef::Jet(mu, MultiIndex::unit(n, i));
            flux[i][mu] = l.partial_derivative(&z);
        }
        flux
    };
    match spec {
        CrSpec::Generic {
            flux,
            source,
            density,
        } => ConstitutiveRelation::new(ctx, flux, source, density, CrKind::Generic),
        CrSpec::Lagrangian(l) => {
            if ctx.order() != 1 {
                return Err(Error::WrongOrder {
                    expected: 1,
                    got: ctx.order(),
                });
            }
            let flux = flux_from_lagrangian(&l);
            let source: Vec<Expr> = (0..m)
                .map(|mu| l.partial_derivative(&VarRef::Field(mu)))
                .collect();
            let mut p = l.clone();
            for (mu, i) in ctx.admitted_first_order() {
                let z = Expr::var(VarRef::Jet(mu, MultiIndex::unit(n, i)));
                p = p.sub(&z.mul(&flux[i][mu]));
            }
            ConstitutiveRelation::new(ctx, flux, source, Some(p), CrKind::Lagrangian(l))
        }
        CrSpec::SemiLagrangian { lagrangian, source } => {
            if ctx.order() != 1 {
                return Err(Error::WrongOrder {
                    expected: 1,
                    got: ctx.order(),
                });
            }
            let flux = flux_from_lagrangian(&lagrangian);
            let mut p = lagrangian.clone();
            for (mu, i) in ctx.admitted_first_order() {
                let z = Expr::var(VarRef::Jet(mu, MultiIndex::unit(n, i)));
                p = p.sub(&z.mul(&flux[i][mu]));
            }
            ConstitutiveRelation::new(
                ctx,
                flux,
                source.clone(),
                Some(p),
                CrKind::SemiLagrangian(lagrangian, source),
            )
        }
        CrSpec::LagrangianDissipative {
            lagrangian,
            dissipation,
        } => {
            if ctx.order() != 1 {
                return Err(Error::WrongOrder {
                    expected: 1,
                    got: ctx.order(),
                });
            }
            let flux = flux_from_lagrangian(&lagrangian);
            let source: Vec<Expr> = (0..m)
                .map(|mu| {
                    let zdot = VarRef::Jet(mu, MultiIndex::unit(n, 0));
                    dissipation
                        .partial_derivative(&zdot)
                        .sub(&lagrangian.partial_derivative(&VarRef::Field(mu)))
                })
                .collect();
            ConstitutiveRelation::new(
                ctx,
                flux,
                source,
                None,
                CrKind::LagrangianDissipative(lagrangian, dissipation),
            )
        }
        CrSpec::SpatialLagrangian {
            lagrangian,
            densities,
        } => {
            if densities.len() != m {
                return Err(Error::IndexOutOfRange("densities length".into()));
            }
            let mut flux = flux_from_lagrangian(&lagrangian);
            for (mu, f0) in densities.iter().enumerate() {
                if !flux[0][mu].is_zero() {
                    return Err(Error::Precondition {
                        op: "build_cr(spatial)".into(),
                        detail: format!(
                            "time flux of field {} is already generated by the Lagrangian",
                            mu + 1
                        ),
                    });
                }
                flux[0][mu] = f0.clone();
            }
            let source: Vec<Expr> = (0..m)
                .map(|mu| lagrangian.partial_derivative(&VarRef::Field(mu)))
                .collect();
            ConstitutiveRelation::new(
                ctx,
                flux,
                source,
                None,
                CrKind::SpatialLagrangian(lagrangian, densities),
            )
        }
        CrSpec::VectorPotential { h, source } => {
            if h.len() != n {
                return Err(Error::IndexOutOfRange("potential length".into()));
            }
            let mut flux = vec![vec![Expr::zero(); m]; n];
            for (i, hi) in h.iter().enumerate() {
                for mu in 0..m {
                    flux[i][mu] = hi.partial_derivative(&VarRef::Field(mu));
                }
            }
            ConstitutiveRelation::new(ctx, flux, source, None, CrKind::VectorPotential(h))
        }
    }
}

/// Outcome of the Legendre map of a first-order Lagrangian.
#[derive(Clone, Debug)]
pub struct LegendreMap {
    /// p = L − z^μ_i ∂L/∂z^μ_i
    pub p: Expr,
    /// p^i_μ = ∂L/∂z^μ_i on admitted slots
    pub momenta: Vec<((usize, usize), Expr)>,
    /// Vertical Hessian rows ((μ,i),(ν,j)) → ∂²L/∂z^μ_i∂z^ν_j
    pub hessian: Vec<Vec<Expr>>,
    pub hessian_slots: Vec<(usize, usize)>,
    pub determinant: Expr,
    pub verdict: Regularity,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Regularity {
    Regular,
    Degenerate,
    /// Determinant is a non-constant expression; sampled at 16 points.
    IndeterminateSampled { nonzero_samples: usize, total: usize },
}

/// Legendre coordinates and a regularity report for a first-order
/// Lagrangian.
pub fn legendre_map(l: &Expr, ctx: &Ctx) -> Result<LegendreMap> {
    if ctx.order() != 1 {
        return Err(Error::WrongOrder {
            expected: 1,
            got: ctx.order(),
        });
    }
    let n = ctx.base_dim();
    let slots = ctx.admitted_first_order();
    let mut p = l.clone();
    let mut momenta = Vec::new();
    for (mu, i) in &slots {
        let z = VarRef::Jet(*mu, MultiIndex::unit(n, *i));
        let f = l.partial_derivative(&z);
        p = p.sub(&Expr::var(z).mul(&f));
        momenta.push(((*i, *mu), f));
    }
    let dim = slots.len();
    let mut hessian = vec![vec![Expr::zero(); dim]; dim];
    for (a, (mu, i)) in slots.iter().enumerate() {
        for (b, (nu, j)) in slots.iter().enumerate() {
            let za = VarRef::Jet(*mu, MultiIndex::unit(n, *i));
            let zb = VarRef::Jet(*nu, MultiIndex::unit(n, *j));
            hessian[a][b] = l.partial_derivative(&za).partial_derivative(&zb);
        }
    }
    let determinant = det(&hessian);
    let verdict = if determinant.is_zero() {
        Regularity::Degenerate
    } else if determinant.as_rational().is_some() {
        Regularity::Regular
    } else {
        // sample at 16 seeded points
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(16);
        let atoms = determinant.atoms();
        let mut nonzero = 0;
        let total = 16;
        for _ in 0..total {
            let mut assignment = crate::expr::Assignment::new();
            for a in &atoms {
                assignment.insert(a.clone(), rng.gen_range(-2.0..2.0f64));
            }
            if let Ok(v) = determinant.eval_numeric(&assignment) {
                if v.abs() > 1e-9 {
                    nonzero += 1;
                }
            }
        }
        Regularity::IndeterminateSampled {
            nonzero_samples: nonzero,
            total,
        }
    };
    Ok(LegendreMap {
        p,
        momenta,
        hessian,
        hessian_slots: slots,
        determinant,
        verdict,
    })
}

/// Symbolic determinant by cofactor expansion (shared with the
/// transformation code).
pub(crate) fn det_matrix(matrix: &[Vec<Expr>]) -> Expr {
    det(matrix)
}

fn det(matrix: &[Vec<Expr>]) -> Expr {
    let n = matrix.len();
    if n == 0 {
        return Expr::one();
    }
    if n == 1 {
        return matrix[0][0].clone();
    }
    // cofactor expansion along the first row; fine at the sizes used here
    let mut out = Expr::zero();
    for (j, top) in matrix[0].iter().enumerate() {
        if top.is_zero() {
            continue;
        }
        let minor: Vec<Vec<Expr>> = matrix[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let cofactor = top.mul(&det(&minor));
        out = if j % 2 == 0 {
            out.add(&cofactor)
        } else {
            out.sub(&cofactor)
        };
    }
    out
}

/// Outcome of the Lepage test.
#[derive(Clone, Debug, PartialEq)]
pub enum LepageOutcome {
    /// The n-form is a Lepage form; the associated Lagrangian is
    /// L = p + Σ_{(μ,i)∈P} z^μ_i F^i_μ.
    Lagrangian(Expr),
    /// p or F depends on variables above first order.
    NotFirstOrder(String),
    /// Gradient conditions (p+zF)_{,z^μ_i} = F^i_μ fail; the residuals are
    /// listed per slot.
    GradientFailure(Vec<((usize, usize), Expr)>),
}

/// Test whether the covering relation's n-form is a Lepage form, and recover
/// the associated Lagrangian if so.
pub fn lepage_test(cr: &ConstitutiveRelation) -> Result<LepageOutcome> {
    let p = cr.density.clone().ok_or_else(|| Error::Precondition {
        op: "lepage_test".into(),
        detail: "relation carries no density".into(),
    })?;
    let ctx = &cr.ctx;
    let n = ctx.base_dim();
    // (a) first-order support of p and F
    let order_check = |e: &Expr, what: &str| -> Option<String> {
        e.support()
            .iter()
            .find(|v| v.order() > 1)
            .map(|v| format!("{} depends on {}", what, ctx.display_var(v)))
    };
    if let Some(msg) = order_check(&p, "p") {
        return Ok(LepageOutcome::NotFirstOrder(msg));
    }
    for i in 0..n {
        for mu in 0..ctx.fiber_dim() {
            if let Some(msg) =
                order_check(&cr.flux[i][mu], &format!("F[{},{}]", i + 1, mu + 1))
            {
                return Ok(LepageOutcome::NotFirstOrder(msg));
            }
        }
    }
    // (b) gradient conditions on the first-order slots
    let p_tilde = cr.p_tilde();
    let mut residuals = Vec::new();
    for (mu, i) in ctx.admitted_first_order() {
        let z = VarRef::Jet(mu, MultiIndex::unit(n, i));
        let r = p_tilde.partial_derivative(&z).sub(&cr.flux[i][mu]);
        if !r.is_zero() {
            residuals.push(((i, mu), r));
        }
    }
    if !residuals.is_empty() {
        return Ok(LepageOutcome::GradientFailure(residuals));
    }
    Ok(LepageOutcome::Lagrangian(p_tilde))
}

/// Residual families of the Helmholtz condition dK_C = 0.
#[derive(Clone, Debug, Default)]
pub struct HelmholtzCertificate {
    /// Π_{μ,y^ν} − Π_{ν,y^μ}
    pub source_block: Vec<((usize, usize), Expr)>,
    /// F^i_{μ,y^ν} − Π_{ν,z^μ_i}
    pub mixed_block: Vec<((usize, usize, usize), Expr)>,
    /// F^i_{μ,z^ν_j} − F^j_{ν,z^μ_i}
    pub flux_block: Vec<((usize, usize, usize, usize), Expr)>,
}

impl HelmholtzCertificate {
    pub fn passes(&self) -> bool {
        self.source_block.is_empty()
            && self.mixed_block.is_empty()
            && self.flux_block.is_empty()
    }
}

/// Closedness of K_C, i.e. local variationality of a first-order relation.
/// Returns the verdict with all nonzero residuals.
pub fn helmholtz_test(cr: &ConstitutiveRelation) -> Result<(bool, HelmholtzCertificate)> {
    if cr.ctx.order() != 1 {
        return Err(Error::WrongOrder {
            expected: 1,
            got: cr.ctx.order(),
        });
    }
    let ctx = &cr.ctx;
    let n = ctx.base_dim();
    let m = ctx.fiber_dim();
    let mut cert = HelmholtzCertificate::default();
    for mu in 0..m {
        for nu in (mu + 1)..m {
            let r = cr.source[mu]
                .partial_derivative(&VarRef::Field(nu))
                .sub(&cr.source[nu].partial_derivative(&VarRef::Field(mu)));
            if !r.is_zero() {
                cert.source_block.push(((mu, nu), r));
            }
        }
    }
    for i in 0..n {
        for mu in 0..m {
            for nu in 0..m {
                let z = VarRef::Jet(mu, MultiIndex::unit(n, i));
                let r = cr.flux[i][mu]
                    .partial_derivative(&VarRef::Field(nu))
                    .sub(&cr.source[nu].partial_derivative(&z));
                if !r.is_zero() {
                    cert.mixed_block.push(((i, mu, nu), r));
                }
            }
        }
    }
    for i in 0..n {
        for mu in 0..m {
            for j in 0..n {
                for nu in 0..m {
                    if (j, nu) < (i, mu) {
                        continue;
                    }
                    let zi = VarRef::Jet(mu, MultiIndex::unit(n, i));
                    let zj = VarRef::Jet(nu, MultiIndex::unit(n, j));
                    let r = cr.flux[i][mu]
                        .partial_derivative(&zj)
                        .sub(&cr.flux[j][nu].partial_derivative(&zi));
                    if !r.is_zero() {
                        cert.flux_block.push(((i, mu, j, nu), r));
                    }
                }
            }
        }
    }
    Ok((cert.passes(), cert))
}

/// First-order interior Euler operator on a 1-contact (n+1)-form
/// K = (a_μ ω^μ + b^i_μ ω^μ_i)∧η: returns
/// ω^μ ∧ [a_μ − d_i b^i_μ − λ_{G,i} b^i_μ] η.
pub fn interior_euler(k: &DiffForm, ctx: &Ctx) -> Result<DiffForm> {
    let n = ctx.base_dim();
    if k.degree() != n + 1 {
        return Err(Error::DegreeMismatch(format!(
            "interior Euler operator expects an (n+1)-form, got degree {}",
            k.degree()
        )));
    }
    if k.is_zero() {
        return Ok(DiffForm::zero(ctx, n + 1));
    }
    if !k.is_exactly_contact(1) {
        return Err(Error::Unsupported(
            "interior Euler operator is implemented for 1-contact forms only".into(),
        ));
    }
    let eta_word: Vec<Covector> = (0..n).map(Covector::Dx).collect();
    let g = ctx.density();
    let mut out = DiffForm::zero(ctx, n + 1);
    for mu in 0..ctx.fiber_dim() {
        // a_μ: coefficient of ω^μ ∧ η
        let mut word = vec![Covector::Omega(mu, MultiIndex::zero(n))];
        word.extend(eta_word.iter().cloned());
        let a = k.coefficient(&word).div(&g)?;
        // b^i_μ: coefficients of ω^μ_i ∧ η
        let mut b = vec![Expr::zero(); n];
        for (i, slot) in b.iter_mut().enumerate() {
            let mut word = vec![Covector::Omega(mu, MultiIndex::unit(n, i))];
            word.extend(eta_word.iter().cloned());
            *slot = k.coefficient(&word).div(&g)?;
        }
        for v in k
            .terms()
            .flat_map(|(w, _)| w.iter())
            .filter_map(|c| match c {
                Covector::Omega(m2, idx) if *m2 == mu && idx.order() > 1 => Some(idx),
                _ => None,
            })
        {
            return Err(Error::Unsupported(format!(
                "interior Euler operator is first-order only (found ω^{}_{})",
                mu + 1,
                v
            )));
        }
        let coeff = a.sub(&covariant_divergence(&b, ctx));
        if !coeff.is_zero() {
            let omega = DiffForm::omega(ctx, mu, MultiIndex::zero(n));
            out = out.add(&omega.wedge(&DiffForm::eta(ctx))?.scale(&coeff));
        }
    }
    Ok(out)
}

/// The image of a 1-form a_μ^i dz^μ_i + b_μ dy^μ under the vertical
/// endomorphism pairing: a^i_μ ω^μ∧η_i + b_μ ω^μ∧η. Used to cross-check the
/// lifted Poincaré–Cartan pair at first order.
pub fn vertical_endomorphism_image(
    z_coeffs: &[Vec<Expr>],
    y_coeffs: &[Expr],
    ctx: &Ctx,
) -> Result<(DiffForm, DiffForm)> {
    let n = ctx.base_dim();
    let mut n_form = DiffForm::zero(ctx, n);
    let zero = MultiIndex::zero(n);
    for (i, row) in z_coeffs.iter().enumerate() {
        for (mu, a) in row.iter().enumerate() {
            if !a.is_zero() {
                let w = DiffForm::omega(ctx, mu, zero.clone());
                n_form = n_form.add(&w.wedge(&DiffForm::eta_i(ctx, i))?.scale(a));
            }
        }
    }
    let mut n_plus_1 = DiffForm::zero(ctx, n + 1);
    for (mu, b) in y_coeffs.iter().enumerate() {
        if !b.is_zero() {
            let w = DiffForm::omega(ctx, mu, zero.clone());
            n_plus_1 = n_plus_1.add(&w.wedge(&DiffForm::eta(ctx))?.scale(b));
        }
    }
    Ok((n_form, n_plus_1))
}
