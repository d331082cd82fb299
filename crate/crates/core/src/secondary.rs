//! Secondary balance laws: verification of multiplier certificates, the
//! point-bundle (extended-thermodynamics) potential machinery, and the
//! complete Cattaneo heat-propagation example with the entropy-production
//! sign test.

use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::balance::{balance_system, BalanceSystem};
use crate::constitutive::{ConstitutiveRelation, CrKind, Regularity};
use crate::context::{Ctx, JetContext};
use crate::coords::VarRef;
use crate::error::{Error, Result};
use crate::expr::{Assignment, Bindings, Expr, Factor};
use crate::jet::covariant_divergence;

/// A candidate secondary law: flux K^i (K^0 is the density when the first
/// base coordinate is time), source Q, and the multipliers λ^μ certifying
/// (d_i + λ_{G,i}) K^i − Q = Σ λ^μ B_μ.
#[derive(Clone, Debug)]
pub struct SecondaryCandidate {
    pub flux: Vec<Expr>,
    pub source: Expr,
    pub multipliers: Vec<Expr>,
}

/// Check the multiplier certificate; returns the residual on failure.
pub fn verify_secondary(bs: &BalanceSystem, cand: &SecondaryCandidate) -> (bool, Expr) {
    let ctx = &bs.ctx;
    let mut lhs = covariant_divergence(&cand.flux, ctx).sub(&cand.source);
    for (lam, b) in cand.multipliers.iter().zip(&bs.residuals) {
        lhs = lhs.sub(&lam.mul(b));
    }
    (lhs.is_zero(), lhs)
}

/// Closure residuals of the potential system for a point-bundle relation
/// with identity time-density block (F^0_μ = y^μ): for each spatial column A
/// and each pair σ < ν,
/// Σ_μ [F^A_{μ,y^σ} h⁰_{,y^μ y^ν} − F^A_{μ,y^ν} h⁰_{,y^μ y^σ}],
/// together with the vertical Hessian of h⁰ and its regularity verdict.
pub struct PotentialReport {
    pub residuals: Vec<((usize, usize, usize), Expr)>,
    pub hessian: Vec<Vec<Expr>>,
    pub hessian_verdict: Regularity,
}

pub fn ret_potential_residuals(
    cr: &ConstitutiveRelation,
    h0: &Expr,
) -> Result<PotentialReport> {
    let ctx = &cr.ctx;
    if ctx.order() != 0 {
        return Err(Error::WrongOrder {
            expected: 0,
            got: ctx.order(),
        });
    }
    let m = ctx.fiber_dim();
    for mu in 0..m {
        if cr.flux[0][mu] != Expr::var(VarRef::Field(mu)) {
            return Err(Error::Precondition {
                op: "ret_potential_residuals".into(),
                detail: format!(
                    "time-density block must be the identity (F[1,{}] = y[{}])",
                    mu + 1,
                    mu + 1
                ),
            });
        }
    }
    let mut residuals = Vec::new();
    for a in 1..ctx.base_dim() {
        for sigma in 0..m {
            for nu in (sigma + 1)..m {
                let mut r = Expr::zero();
                for mu in 0..m {
                    let h_mu_nu = h0
                        .partial_derivative(&VarRef::Field(mu))
                        .partial_derivative(&VarRef::Field(nu));
                    let h_mu_sigma = h0
                        .partial_derivative(&VarRef::Field(mu))
                        .partial_derivative(&VarRef::Field(sigma));
                    r = r.add(
                        &cr.flux[a][mu]
                            .partial_derivative(&VarRef::Field(sigma))
                            .mul(&h_mu_nu),
                    );
                    r = r.sub(
                        &cr.flux[a][mu]
                            .partial_derivative(&VarRef::Field(nu))
                            .mul(&h_mu_sigma),
                    );
                }
                if !r.is_zero() {
                    residuals.push(((a, sigma, nu), r));
                }
            }
        }
    }
    let mut hessian = vec![vec![Expr::zero(); m]; m];
    for mu in 0..m {
        for nu in 0..m {
            hessian[mu][nu] = h0
                .partial_derivative(&VarRef::Field(mu))
                .partial_derivative(&VarRef::Field(nu));
        }
    }
    let determinant = crate::constitutive::det_matrix(&hessian);
    let hessian_verdict = if determinant.is_zero() {
        Regularity::Degenerate
    } else if determinant.as_rational().is_some() {
        Regularity::Regular
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let atoms = determinant.atoms();
        let total = 16;
        let mut nonzero = 0;
        for _ in 0..total {
            let mut assignment = Assignment::new();
            for atom in &atoms {
                assignment.insert(atom.clone(), rng.gen_range(-2.0..2.0f64));
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
    Ok(PotentialReport {
        residuals,
        hessian,
        hessian_verdict,
    })
}

/// Assemble and verify the secondary law generated by a potential h⁰(y):
/// multipliers λ^μ = ∂h⁰/∂y^μ, density K^0 = h⁰, source Q = λ^μ Π_μ. The
/// spatial flux is constructed in closed form for a single field (an
/// antiderivative atom); for more fields a candidate flux must be supplied
/// and is then verified.
pub fn ret_secondary_from_potential(
    cr: &ConstitutiveRelation,
    h0: &Expr,
    spatial_flux: Option<Vec<Expr>>,
) -> Result<SecondaryCandidate> {
    let ctx = &cr.ctx;
    let report = ret_potential_residuals(cr, h0)?;
    if !report.residuals.is_empty() {
        let listing = report
            .residuals
            .iter()
            .map(|((a, s, n), e)| format!("(A={},σ={},ν={}): {}", a + 1, s + 1, n + 1, e))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Precondition {
            op: "ret_secondary_from_potential".into(),
            detail: format!("potential system residuals do not vanish: {}", listing),
        });
    }
    // A degenerate Hessian breaks functional independence of the
    // multipliers, but the certificate below is still decisive (coordinate
    // projections are the degenerate boundary case and recover the original
    // laws); the verdict stays available through ret_potential_residuals.
    let m = ctx.fiber_dim();
    let n = ctx.base_dim();
    let multipliers: Vec<Expr> = (0..m)
        .map(|mu| h0.partial_derivative(&VarRef::Field(mu)))
        .collect();
    let mut flux = Vec::with_capacity(n);
    flux.push(h0.clone());
    match spatial_flux {
        Some(ks) => {
            if ks.len() != n - 1 {
                return Err(Error::IndexOutOfRange(
                    "spatial flux must have one entry per spatial direction".into(),
                ));
            }
            flux.extend(ks);
        }
        None => {
            if m != 1 {
                return Err(Error::Unsupported(
                    "closed-form flux construction needs a single field; \
                     supply a candidate spatial flux"
                        .into(),
                ));
            }
            let y = VarRef::Field(0);
            for a in 1..n {
                let integrand = h0
                    .partial_derivative(&y)
                    .mul(&cr.flux[a][0].partial_derivative(&y));
                for v in cr.flux[a][0].support() {
                    if v != y {
                        return Err(Error::Unsupported(format!(
                            "closed-form flux needs F[{},1] to depend on the field only",
                            a + 1
                        )));
                    }
                }
                flux.push(Expr::antideriv(integrand, y.clone())?);
            }
        }
    }
    let mut source = Expr::zero();
    for mu in 0..m {
        source = source.add(&multipliers[mu].mul(&cr.source[mu]));
    }
    let cand = SecondaryCandidate {
        flux,
        source,
        multipliers,
    };
    let bs = balance_system(cr);
    let (ok, residual) = verify_secondary(&bs, &cand);
    if !ok {
        return Err(Error::Precondition {
            op: "ret_secondary_from_potential".into(),
            detail: format!("candidate verification failed with residual {}", residual),
        });
    }
    Ok(cand)
}

/// The Cattaneo heat-propagation model over (t, x¹..x³) with fields
/// (θ, q¹..q³): energy balance ∂_t ε + div q = 0 and flux relaxation
/// ∂_t(τ(θ) q^A) + ∂_{x^A} Λ(θ) = −q^A, with the internal energy tied to
/// the entropy multiplier λ̂⁰(θ) so that an entropy-type secondary law
/// exists.
#[derive(Clone, Debug)]
pub struct CattaneoModel {
    pub ctx: Ctx,
    pub cr: ConstitutiveRelation,
    /// Internal energy ε(θ, ‖q‖²).
    pub energy: Expr,
    /// The entropy-type candidate (density, flux, production) with its
    /// multipliers.
    pub candidate: SecondaryCandidate,
    /// Production term −(Λ_{,θ})⁻¹ λ̂⁰_{,θ} ‖q‖².
    pub production: Expr,
}

pub const CATTANEO_TAU: &str = "tau";
pub const CATTANEO_LAMBDA: &str = "Lambda";
pub const CATTANEO_EPSEQ: &str = "epseq";
pub const CATTANEO_LAM0: &str = "lam0";

/// Context for the Cattaneo model: 4 base coordinates (t first), 4 fields,
/// first order, all first derivatives admitted, with the four constitutive
/// atoms declared as functions of θ.
pub fn cattaneo_context() -> Ctx {
    let mut ctx = JetContext::full(4, 4, 1).with_names(
        &["t", "x1", "x2", "x3"],
        &["theta", "q1", "q2", "q3"],
    );
    for name in [CATTANEO_TAU, CATTANEO_LAMBDA, CATTANEO_EPSEQ, CATTANEO_LAM0] {
        ctx = ctx.declare_func(name, vec![VarRef::Field(0)]);
    }
    ctx.into_ctx()
}

/// Assemble the model with fully symbolic τ, Λ, ε^eq, λ̂⁰, derive the
/// internal energy that admits the entropy multiplier, emit the secondary
/// candidate and verify its certificate.
pub fn cattaneo_build() -> Result<CattaneoModel> {
    let ctx = cattaneo_context();
    let theta = VarRef::Field(0);
    let tau = Expr::func(CATTANEO_TAU, vec![theta.clone()]);
    let lambda = Expr::func(CATTANEO_LAMBDA, vec![theta.clone()]);
    let epseq = Expr::func(CATTANEO_EPSEQ, vec![theta.clone()]);
    let lam0 = Expr::func(CATTANEO_LAM0, vec![theta.clone()]);

    let tau_t = tau.partial_derivative(&theta);
    let lambda_t = lambda.partial_derivative(&theta);
    let lambda_tt = lambda_t.partial_derivative(&theta);
    let lam0_t = lam0.partial_derivative(&theta);
    let lam0_tt = lam0_t.partial_derivative(&theta);
    let inv_lambda_t = lambda_t.pow(-1)?;
    let inv_lam0_t = lam0_t.pow(-1)?;
    let half = BigRational::new(1.into(), 2.into());

    let mut qsq = Expr::zero();
    for a in 1..4 {
        qsq = qsq.add(&Expr::var(VarRef::Field(a)).pow(2)?);
    }

    // (λ̂⁰_{,θ} / Λ_{,θ})_{,θ} expanded through reciprocal powers
    let ratio_t = lam0_tt
        .mul(&inv_lambda_t)
        .sub(&lam0_t.mul(&lambda_tt).mul(&inv_lambda_t.pow(2)?));
    // ε = ε^eq + [τ_{,θ}/(2Λ_{,θ}) − (τ/(2λ̂⁰_{,θ}))(λ̂⁰_{,θ}/Λ_{,θ})_{,θ}]‖q‖²
    let coeff = tau_t
        .mul(&inv_lambda_t)
        .scale(&half)
        .sub(&tau.mul(&inv_lam0_t).scale(&half).mul(&ratio_t));
    let energy = epseq.add(&coeff.mul(&qsq));

    // fluxes: F^t = (ε, τ q^A); F^B = (q^B, δ^B_A Λ); sources (0, −q^A)
    let mut flux = vec![vec![Expr::zero(); 4]; 4];
    flux[0][0] = energy.clone();
    for a in 1..4 {
        let q_a = Expr::var(VarRef::Field(a));
        flux[a][0] = q_a.clone();
        flux[0][a] = tau.mul(&q_a);
        flux[a][a] = lambda.clone();
    }
    let mut source = vec![Expr::zero(); 4];
    for a in 1..4 {
        source[a] = Expr::var(VarRef::Field(a)).neg();
    }
    let cr = ConstitutiveRelation::new(&ctx, flux, source, None, CrKind::Generic)?;

    // entropy-type candidate
    let int_term = Expr::antideriv(lam0_t.mul(&epseq), theta.clone())?;
    let k0 = lam0
        .mul(&energy)
        .sub(&int_term)
        .add(&tau.mul(&inv_lambda_t).mul(&lam0_t).scale(&half).mul(&qsq));
    let mut cand_flux = vec![k0];
    for a in 1..4 {
        cand_flux.push(lam0.mul(&Expr::var(VarRef::Field(a))));
    }
    let production = inv_lambda_t.mul(&lam0_t).mul(&qsq).neg();
    let mut multipliers = vec![lam0.clone()];
    for a in 1..4 {
        multipliers.push(inv_lambda_t.mul(&lam0_t).mul(&Expr::var(VarRef::Field(a))));
    }
    let candidate = SecondaryCandidate {
        flux: cand_flux,
        source: production.clone(),
        multipliers,
    };
    let bs = balance_system(&cr);
    let (ok, residual) = verify_secondary(&bs, &candidate);
    if !ok {
        return Err(Error::Precondition {
            op: "cattaneo_build".into(),
            detail: format!(
                "entropy candidate verification failed with residual {}",
                residual
            ),
        });
    }
    Ok(CattaneoModel {
        ctx,
        cr,
        energy,
        candidate,
        production,
    })
}

/// Sign verdict of the sampled production term.
#[derive(Clone, Debug)]
pub struct SignVerdict {
    pub samples: usize,
    pub nonnegative: usize,
    pub nonpositive: usize,
    pub min_value: f64,
    pub max_value: f64,
    /// The production term after substituting the concrete functions.
    pub production: Expr,
    /// Some(true): manifestly ≥ 0 (even atom powers, positive
    /// coefficients); Some(false): manifestly ≤ 0.
    pub manifest: Option<bool>,
}

impl SignVerdict {
    pub fn passes_nonnegative(&self) -> bool {
        self.nonnegative == self.samples
    }
}

/// Substitute concrete constitutive functions (expressions in θ) into the
/// production term and sample its sign over θ ∈ theta_range, ‖q‖ ∈ q_range.
pub fn ii_law_check(
    model: &CattaneoModel,
    concrete: &Bindings,
    theta_range: (f64, f64),
    q_range: (f64, f64),
    samples: usize,
    seed: u64,
) -> Result<SignVerdict> {
    let production = model.production.substitute(concrete)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nonnegative = 0;
    let mut nonpositive = 0;
    let mut min_value = f64::INFINITY;
    let mut max_value = f64::NEG_INFINITY;
    let tol = 1e-12;
    for _ in 0..samples {
        let theta = rng.gen_range(theta_range.0..=theta_range.1);
        let norm = rng.gen_range(q_range.0..=q_range.1);
        // random direction on the sphere
        let mut dir = [0.0f64; 3];
        loop {
            let mut len2 = 0.0;
            for d in dir.iter_mut() {
                *d = rng.gen_range(-1.0..1.0);
                len2 += *d * *d;
            }
            if len2 > 1e-3 && len2 <= 1.0 {
                let len = len2.sqrt();
                for d in dir.iter_mut() {
                    *d = *d / len * norm;
                }
                break;
            }
        }
        let mut assignment = Assignment::new();
        assignment.insert(Factor::Var(VarRef::Field(0)), theta);
        for a in 0..3 {
            assignment.insert(Factor::Var(VarRef::Field(a + 1)), dir[a]);
        }
        // any remaining atoms (free constants) get positive draws
        for atom in production.atoms() {
            assignment.entry(atom).or_insert_with(|| rng.gen_range(0.5..2.0));
        }
        let v = production.eval_numeric(&assignment)?;
        min_value = min_value.min(v);
        max_value = max_value.max(v);
        if v >= -tol {
            nonnegative += 1;
        }
        if v <= tol {
            nonpositive += 1;
        }
    }
    Ok(SignVerdict {
        samples,
        nonnegative,
        nonpositive,
        min_value,
        max_value,
        manifest: manifest_sign(&production),
        production,
    })
}

/// Some(true) when the expression is manifestly ≥ 0 (all coefficients
/// positive and all atom powers even), Some(false) for the mirror case.
pub fn manifest_sign(e: &Expr) -> Option<bool> {
    use num::Signed;
    if e.is_zero() {
        return Some(true);
    }
    let mut all_pos = true;
    let mut all_neg = true;
    for (m, c) in e.terms() {
        for (_, exp) in m.factors() {
            if exp % 2 != 0 {
                return None;
            }
        }
        if c.is_negative() {
            all_pos = false;
        } else {
            all_neg = false;
        }
    }
    if all_pos {
        Some(true)
    } else if all_neg {
        Some(false)
    } else {
        None
    }
}

/// Concrete bindings for the classical Fourier-limit check:
/// τ constant, Λ = κ θ, λ̂⁰ = ±1/θ.
pub fn cattaneo_concrete(kappa: BigRational, lam0_sign: i64) -> Result<Bindings> {
    let theta = Expr::var(VarRef::Field(0));
    Ok(Bindings::new()
        .func(CATTANEO_TAU, Expr::one())
        .func(CATTANEO_LAMBDA, theta.scale(&kappa))
        .func(CATTANEO_EPSEQ, theta.clone())
        .func(CATTANEO_LAM0, theta.pow(-1)?.scale_int(lam0_sign)))
}
