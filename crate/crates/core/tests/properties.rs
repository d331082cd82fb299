//! Randomized property checks complementing the acceptance criteria:
//! canonical-form stability, printer round-trips, numeric agreement of the
//! equality decision, transformation composition, determining-equation
//! redundancies and cross-module oracle comparisons.

use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jetforms_core::balance::balance_system;
use jetforms_core::catalog;
use jetforms_core::constitutive::{interior_euler, ConstitutiveRelation, CrKind};
use jetforms_core::context::JetContext;
use jetforms_core::coords::{MultiIndex, VarRef};
use jetforms_core::expr::{
    canonical, equals, parse_expr, Assignment, Equality, Expr,
};
use jetforms_core::forms::Covector;
use jetforms_core::jet::{commutes_total, prolong, VectorField};
use jetforms_core::secondary::{cattaneo_build, verify_secondary, SecondaryCandidate};
use jetforms_core::symmetry::{
    gauge_law, symmetry_residuals, transform_cr, PointMap,
};
use jetforms_core::Ctx;

const SEED: u64 = 0x51de_ca5e;

fn rand_coeff(rng: &mut ChaCha8Rng) -> BigRational {
    BigRational::new(rng.gen_range(-5i64..=5).into(), rng.gen_range(1i64..=4).into())
}

fn rand_poly(rng: &mut ChaCha8Rng, vars: &[VarRef], terms: usize, deg: usize) -> Expr {
    let mut out = Expr::zero();
    for _ in 0..terms {
        let mut mono = Expr::from_rational(rand_coeff(rng));
        for _ in 0..rng.gen_range(0..=deg) {
            mono = mono.mul(&Expr::var(vars[rng.gen_range(0..vars.len())].clone()));
        }
        out = out.add(&mono);
    }
    out
}

/// Random expression with function atoms, reciprocal powers of atoms and an
/// occasional antiderivative.
fn rand_expr(rng: &mut ChaCha8Rng, ctx: &Ctx) -> Expr {
    let vars = ctx.coordinates();
    let mut out = rand_poly(rng, &vars, 3, 2);
    let atom = Expr::func("W", vars.clone());
    match rng.gen_range(0..4) {
        0 => out = out.add(&atom),
        1 => {
            out = out.add(
                &atom
                    .partial_derivative(&vars[rng.gen_range(0..vars.len())])
                    .scale_int(rng.gen_range(1..=3)),
            )
        }
        2 => {
            let single = Expr::func("V", vec![VarRef::Field(0)]);
            let d = single.partial_derivative(&VarRef::Field(0));
            if let Ok(inv) = d.pow(-1) {
                out = out.add(&inv.mul(&rand_poly(rng, &vars, 2, 1)));
            }
        }
        _ => {
            let single = Expr::func("V", vec![VarRef::Field(0)]);
            let int = Expr::antideriv(
                single.partial_derivative(&VarRef::Field(0)),
                VarRef::Field(0),
            )
            .unwrap();
            out = out.add(&int);
        }
    }
    out
}

#[test]
fn canonical_form_is_stable_and_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let ctx = JetContext::full(2, 2, 1)
        .declare_func("W", JetContext::full(2, 2, 1).coordinates())
        .declare_func("V", vec![VarRef::Field(0)])
        .into_ctx();
    for _ in 0..50 {
        let e = rand_expr(&mut rng, &ctx);
        // print → parse is the identity on canonical forms, and a second
        // pass changes nothing (canonicalization is idempotent)
        let printed = canonical(&e);
        let back = parse_expr(&printed, &ctx).unwrap();
        assert_eq!(back, e, "round trip failed for {}", printed);
        assert_eq!(canonical(&back), printed);
        // sums assembled in shuffled order canonicalize identically
        let double = e.add(&e);
        assert_eq!(double, e.scale_int(2));
        let cancel = e.sub(&e);
        assert!(cancel.is_zero());
    }
}

#[test]
fn equality_decision_agrees_with_numeric_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let ctx = JetContext::full(2, 2, 1)
        .declare_func("W", JetContext::full(2, 2, 1).coordinates())
        .declare_func("V", vec![VarRef::Field(0)])
        .into_ctx();
    let mut checked = 0;
    for round in 0..200 {
        if checked >= 100 {
            break;
        }
        let a = rand_expr(&mut rng, &ctx);
        let b = if round % 2 == 0 {
            // syntactically equal tree built through a detour: no false
            // negatives allowed
            a.add(&Expr::var(VarRef::Base(0)))
                .sub(&Expr::var(VarRef::Base(0)))
        } else {
            rand_expr(&mut rng, &ctx)
        };
        let verdict = equals(&a, &b, SEED);
        // sample both at common points and compare
        let mut atoms = a.atoms();
        atoms.extend(b.atoms());
        let mut agree = true;
        let mut points = 0;
        for _ in 0..64 {
            if points == 32 {
                break;
            }
            let mut assignment = Assignment::new();
            for atom in &atoms {
                assignment.insert(atom.clone(), rng.gen_range(0.25..2.0f64));
            }
            let (va, vb) = match (a.eval_numeric(&assignment), b.eval_numeric(&assignment)) {
                (Ok(va), Ok(vb)) => (va, vb),
                _ => continue,
            };
            points += 1;
            if (va - vb).abs() > 1e-6 * va.abs().max(vb.abs()).max(1.0) {
                agree = false;
                break;
            }
        }
        if points == 0 {
            continue;
        }
        checked += 1;
        match verdict {
            Equality::Equal | Equality::ProbablyEqual => {
                assert!(agree, "equality verdict contradicts evaluation")
            }
            Equality::Distinct => {
                if round % 2 == 0 {
                    panic!("false negative on a syntactically equal tree");
                }
            }
        }
    }
    assert!(checked >= 100);
}

#[test]
fn total_derivatives_commute_on_random_expressions() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let ctx = JetContext::full(3, 2, 1).into_ctx();
    let vars = ctx.coordinates();
    for _ in 0..20 {
        let e = rand_poly(&mut rng, &vars, 4, 3);
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert!(commutes_total(&e, i, j, &ctx));
            }
        }
    }
}

#[test]
fn transformation_composition_law_on_random_linear_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let ctx = JetContext::full(1, 1, 1).into_ctx();
    let x = Expr::var(VarRef::Base(0));
    let y = Expr::var(VarRef::Field(0));
    let z = Expr::var(VarRef::Jet(0, MultiIndex::unit(1, 0)));
    for _ in 0..10 {
        let a = rng.gen_range(1i64..=4);
        let b = rng.gen_range(1i64..=4);
        let phi = PointMap {
            base: vec![x.scale_int(a)],
            fiber: vec![y.scale_int(b)],
        };
        let phi_inv = PointMap {
            base: vec![x.scale(&BigRational::new(1.into(), a.into()))],
            fiber: vec![y.scale(&BigRational::new(1.into(), b.into()))],
        };
        let c = rng.gen_range(1i64..=4);
        let d = -rng.gen_range(1i64..=4);
        let psi = PointMap {
            base: vec![x.scale_int(c)],
            fiber: vec![y.scale_int(d)],
        };
        let psi_inv = PointMap {
            base: vec![x.scale(&BigRational::new(1.into(), c.into()))],
            fiber: vec![y.scale(&BigRational::new(1.into(), d.into()))],
        };
        let comp = PointMap {
            base: vec![x.scale_int(a * c)],
            fiber: vec![y.scale_int(b * d)],
        };
        let comp_inv = PointMap {
            base: vec![x.scale(&BigRational::new(1.into(), (a * c).into()))],
            fiber: vec![y.scale(&BigRational::new(1.into(), (b * d).into()))],
        };
        let cr = ConstitutiveRelation::new(
            &ctx,
            vec![vec![rand_poly(&mut rng, &[x.support().iter().next().unwrap().clone(), VarRef::Field(0), VarRef::Jet(0, MultiIndex::unit(1, 0))], 3, 2)]],
            vec![rand_poly(&mut rng, &[VarRef::Base(0), VarRef::Field(0)], 2, 2)],
            Some(z.pow(2).unwrap()),
            CrKind::Generic,
        )
        .unwrap();
        let lhs = transform_cr(&cr, &comp, &comp_inv).unwrap();
        let step = transform_cr(&cr, &psi, &psi_inv).unwrap();
        let rhs = transform_cr(&step, &phi, &phi_inv).unwrap();
        assert_eq!(lhs.flux, rhs.flux);
        assert_eq!(lhs.source, rhs.source);
        assert_eq!(lhs.density, rhs.density);
    }
}

#[test]
fn determining_equation_redundancy_for_random_prolongations() {
    // the fourth determining block is identically satisfied by flow
    // prolongations, and the density block of a lifted relation is the
    // flux-weighted combination of the flux blocks
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let ctx = JetContext::full(2, 2, 1).into_ctx();
    let base_vars: Vec<VarRef> = (0..2).map(VarRef::Base).collect();
    let point_vars: Vec<VarRef> = base_vars
        .iter()
        .cloned()
        .chain((0..2).map(VarRef::Field))
        .collect();
    for _ in 0..10 {
        let mut xi = VectorField::new(&ctx);
        for i in 0..2 {
            xi.base[i] = rand_poly(&mut rng, &base_vars, 2, 2);
        }
        for mu in 0..2 {
            xi.fiber[mu] = rand_poly(&mut rng, &point_vars, 2, 2);
        }
        let pr = prolong(&xi, 1, &ctx).unwrap();
        let cr = {
            let vars = ctx.coordinates();
            let flux = (0..2)
                .map(|_| (0..2).map(|_| rand_poly(&mut rng, &vars, 2, 2)).collect())
                .collect();
            let source = (0..2).map(|_| rand_poly(&mut rng, &vars, 2, 2)).collect();
            ConstitutiveRelation::new(&ctx, flux, source, None, CrKind::Generic).unwrap()
        };
        // redundant block: F^i_ν ξ^ν_{,y^μ} − F^j_μ ξ^i_{,x^j}
        //                  − F^j_ν ∂_{z^μ_i}(ξ^ν_j) ≡ 0
        for i in 0..2 {
            for mu in 0..2 {
                let mut r = Expr::zero();
                for nu in 0..2 {
                    r = r.add(
                        &cr.flux[i][nu]
                            .mul(&pr.fiber[nu].partial_derivative(&VarRef::Field(mu))),
                    );
                }
                for j in 0..2 {
                    r = r.sub(
                        &cr.flux[j][mu]
                            .mul(&pr.base[i].partial_derivative(&VarRef::Base(j))),
                    );
                }
                for ((nu, idx), coeff) in &pr.jet {
                    if idx.order() == 1 {
                        let j = idx.support().next().unwrap();
                        let d = coeff
                            .partial_derivative(&VarRef::Jet(mu, MultiIndex::unit(2, i)));
                        r = r.sub(&cr.flux[j][*nu].mul(&d));
                    }
                }
                assert!(r.is_zero(), "redundancy residual {}", r);
            }
        }
        // density-block combination for the lifted covering relation
        let lifted = cr.lift();
        let report = symmetry_residuals(&lifted, &xi).unwrap();
        let mut combo = report.block_i.clone().unwrap();
        for (mu, i) in ctx.admitted_first_order() {
            let zv = Expr::var(VarRef::Jet(mu, MultiIndex::unit(2, i)));
            combo = combo.add(&zv.mul(&report.block_ii[i][mu]));
        }
        assert!(combo.is_zero(), "combination residual {}", combo);
    }
}

#[test]
fn gauge_laws_verify_as_secondary_laws() {
    // a gauge law is a secondary law with the gauge parameters as
    // multipliers
    let (ctx, cr, _) = catalog::wave().unwrap();
    let xi = VectorField::new(&ctx).with_fiber(0, Expr::one());
    let law = gauge_law(&cr, &xi).unwrap();
    let bs = balance_system(&cr);
    let cand = SecondaryCandidate {
        flux: law.flux.clone(),
        source: law.source.clone(),
        multipliers: law.certificate.clone(),
    };
    let (ok, residual) = verify_secondary(&bs, &cand);
    assert!(ok, "residual {}", residual);

    let model = cattaneo_build().unwrap();
    let mut shift = VectorField::new(&model.ctx);
    shift.fiber[2] = Expr::one();
    let law = gauge_law(&model.cr, &shift).unwrap();
    let bs = balance_system(&model.cr);
    let cand = SecondaryCandidate {
        flux: law.flux.clone(),
        source: law.source.clone(),
        multipliers: law.certificate.clone(),
    };
    let (ok, residual) = verify_secondary(&bs, &cand);
    assert!(ok, "residual {}", residual);
}

#[test]
fn original_laws_verify_for_every_catalog_relation() {
    let mut relations: Vec<(Ctx, ConstitutiveRelation)> = Vec::new();
    let (ctx, cr, _) = catalog::wave().unwrap();
    relations.push((ctx, cr));
    let (ctx, cr) = catalog::five_field().unwrap();
    relations.push((ctx, cr));
    let model = cattaneo_build().unwrap();
    relations.push((model.ctx.clone(), model.cr.clone()));
    for (ctx, cr) in relations {
        let bs = balance_system(&cr);
        for mu in 0..ctx.fiber_dim() {
            let mut multipliers = vec![Expr::zero(); ctx.fiber_dim()];
            multipliers[mu] = Expr::one();
            let cand = SecondaryCandidate {
                flux: (0..ctx.base_dim()).map(|i| cr.flux[i][mu].clone()).collect(),
                source: cr.source[mu].clone(),
                multipliers,
            };
            let (ok, residual) = verify_secondary(&bs, &cand);
            assert!(ok, "field {} residual {}", mu, residual);
        }
    }
}

#[test]
fn interior_euler_matches_balance_residuals_for_cattaneo() {
    let model = cattaneo_build().unwrap();
    let ctx = &model.ctx;
    let k_c = model.cr.k_form().unwrap();
    let euler = interior_euler(&k_c, ctx).unwrap();
    let bs = balance_system(&model.cr);
    let eta_word: Vec<Covector> = (0..4).map(Covector::Dx).collect();
    for mu in 0..4 {
        let mut word = vec![Covector::Omega(mu, MultiIndex::zero(4))];
        word.extend(eta_word.iter().cloned());
        let coeff = euler.coefficient(&word);
        assert_eq!(coeff, bs.residuals[mu].neg(), "field {}", mu);
    }
}
