//! Deterministic report assembly over a loaded model.

use std::fmt::Write as _;

use jetforms_core::balance::{admissible_check, balance_system, ibs_decomposition};
use jetforms_core::constitutive::{
    helmholtz_test, legendre_map, lepage_test, CrKind, LepageOutcome, Regularity,
};
use jetforms_core::expr::{latex, pretty, Expr};
use jetforms_core::jet::VectorField;
use jetforms_core::secondary::{
    cattaneo_build, cattaneo_concrete, ii_law_check, verify_secondary,
};
use jetforms_core::symmetry::{
    energy_momentum, gauge_law, noether_law, source_charge, symmetry_residuals, BalanceLaw,
};
use jetforms_core::Ctx;

use crate::model::{AnalysisRequest, Model};

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Latex,
}

pub struct ReportOptions {
    pub format: Format,
    pub seed: u64,
    pub samples: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            format: Format::Text,
            seed: jetforms_core::expr::DEFAULT_EQUALITY_SEED,
            samples: 10_000,
        }
    }
}

pub struct Report {
    pub text: String,
    pub all_passed: bool,
}

struct Emitter<'a> {
    out: String,
    format: Format,
    ctx: &'a Ctx,
}

impl<'a> Emitter<'a> {
    fn expr(&self, e: &Expr) -> String {
        match self.format {
            Format::Text => pretty(e, self.ctx),
            Format::Latex => latex(e, self.ctx),
        }
    }

    fn heading(&mut self, title: &str) {
        match self.format {
            Format::Text => {
                let _ = writeln!(self.out, "\n== {} ==", title);
            }
            Format::Latex => {
                let _ = writeln!(self.out, "\n\\section*{{{}}}", title);
            }
        }
    }

    fn line(&mut self, text: &str) {
        let _ = writeln!(self.out, "{}", text);
    }

    fn equation(&mut self, lhs: &str, e: &Expr) {
        match self.format {
            Format::Text => {
                let _ = writeln!(self.out, "  {} = {}", lhs, self.expr(e));
            }
            Format::Latex => {
                let _ = writeln!(self.out, "\\[ {} = {} \\]", lhs, self.expr(e));
            }
        }
    }

    fn verdict(&mut self, label: &str, ok: bool) {
        let _ = writeln!(self.out, "  {}: {}", label, if ok { "PASS" } else { "FAIL" });
    }
}

fn emit_balance_law(em: &mut Emitter, name: &str, law: &BalanceLaw, ctx: &Ctx) {
    for (i, k) in law.flux.iter().enumerate() {
        em.equation(&format!("{}: K^{}", name, ctx.base_name(i)), k);
    }
    em.equation(&format!("{}: Q", name), &law.source);
    for (mu, c) in law.certificate.iter().enumerate() {
        em.equation(&format!("{}: c_{}", name, ctx.field_name(mu)), c);
    }
    em.verdict(
        &format!(
            "{} certificate (div K - Q = sum c_mu B_mu){}",
            name,
            if law.conservation {
                ", conservation law"
            } else {
                ""
            }
        ),
        law.verified,
    );
}

pub fn run_report(model: &Model, requests: &[AnalysisRequest], options: &ReportOptions) -> Report {
    let ctx = &model.ctx;
    let mut em = Emitter {
        out: String::new(),
        format: options.format,
        ctx,
    };
    let mut all_passed = true;

    em.line(&format!(
        "jetforms report (seed {}, samples {})",
        options.seed, options.samples
    ));
    em.heading("context");
    em.line(&format!(
        "  base dimension {}, fields {}, order {}, admitted jet coordinates {}",
        ctx.base_dim(),
        ctx.fiber_dim(),
        ctx.order(),
        ctx.admitted_jets().count()
    ));
    let names: Vec<String> = (0..ctx.base_dim())
        .map(|i| ctx.base_name(i).to_string())
        .collect();
    em.line(&format!("  base coordinates: {}", names.join(" ")));
    let names: Vec<String> = (0..ctx.fiber_dim())
        .map(|mu| ctx.field_name(mu).to_string())
        .collect();
    em.line(&format!("  fields: {}", names.join(" ")));

    let bs = balance_system(&model.cr);
    let field_of = |name: &str| model.vector_fields.get(name).cloned();
    let named_fields = |args: &[String]| -> Vec<(String, VectorField)> {
        if args.is_empty() {
            model
                .vector_fields
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect()
        } else {
            args.iter()
                .filter_map(|a| field_of(a).map(|f| (a.clone(), f)))
                .collect()
        }
    };

    for request in requests {
        match request.name.as_str() {
            "balance" => {
                em.heading("balance system");
                for (mu, r) in bs.residuals.iter().enumerate() {
                    em.equation(&format!("B_{}", ctx.field_name(mu)), r);
                }
                em.line("  (each equation reads B = 0 on solutions)");
            }
            "helmholtz" => {
                em.heading("Helmholtz condition");
                match helmholtz_test(&model.cr) {
                    Ok((ok, cert)) => {
                        em.verdict("locally variational", ok);
                        if !ok {
                            all_passed = false;
                            for ((mu, nu), r) in &cert.source_block {
                                em.equation(&format!("source block ({},{})", mu + 1, nu + 1), r);
                            }
                            for ((i, mu, nu), r) in &cert.mixed_block {
                                em.equation(
                                    &format!("mixed block ({},{},{})", i + 1, mu + 1, nu + 1),
                                    r,
                                );
                            }
                            for ((i, mu, j, nu), r) in &cert.flux_block {
                                em.equation(
                                    &format!(
                                        "flux block ({},{};{},{})",
                                        i + 1,
                                        mu + 1,
                                        j + 1,
                                        nu + 1
                                    ),
                                    r,
                                );
                            }
                        }
                    }
                    Err(e) => {
                        all_passed = false;
                        em.line(&format!("  error: {}", e));
                    }
                }
            }
            "lepage" => {
                em.heading("Lepage test");
                let covering = if model.cr.has_density() {
                    model.cr.clone()
                } else {
                    model.cr.lift()
                };
                match lepage_test(&covering) {
                    Ok(LepageOutcome::Lagrangian(l)) => {
                        em.verdict("Lepage form", true);
                        em.equation("associated Lagrangian", &l);
                    }
                    Ok(LepageOutcome::NotFirstOrder(msg)) => {
                        all_passed = false;
                        em.verdict("Lepage form", false);
                        em.line(&format!("  {}", msg));
                    }
                    Ok(LepageOutcome::GradientFailure(rs)) => {
                        all_passed = false;
                        em.verdict("Lepage form", false);
                        for ((i, mu), r) in rs {
                            em.equation(
                                &format!("gradient residual ({},{})", i + 1, mu + 1),
                                &r,
                            );
                        }
                    }
                    Err(e) => {
                        all_passed = false;
                        em.line(&format!("  error: {}", e));
                    }
                }
            }
            "legendre" => {
                em.heading("Legendre map");
                let l = match &model.cr.kind {
                    CrKind::Lagrangian(l)
                    | CrKind::SemiLagrangian(l, _)
                    | CrKind::LagrangianDissipative(l, _)
                    | CrKind::SpatialLagrangian(l, _) => Some(l.clone()),
                    _ => None,
                };
                match l {
                    None => em.line("  (relation has no generating Lagrangian; skipped)"),
                    Some(l) => match legendre_map(&l, ctx) {
                        Ok(leg) => {
                            em.equation("p", &leg.p);
                            for ((i, mu), f) in &leg.momenta {
                                em.equation(
                                    &format!("p^{}_{}", ctx.base_name(*i), ctx.field_name(*mu)),
                                    f,
                                );
                            }
                            em.equation("det Hessian", &leg.determinant);
                            let verdict = match leg.verdict {
                                Regularity::Regular => "regular".to_string(),
                                Regularity::Degenerate => "degenerate".to_string(),
                                Regularity::IndeterminateSampled {
                                    nonzero_samples,
                                    total,
                                } => format!(
                                    "indeterminate (sampled: {}/{} nonzero)",
                                    nonzero_samples, total
                                ),
                            };
                            em.line(&format!("  regularity: {}", verdict));
                        }
                        Err(e) => {
                            all_passed = false;
                            em.line(&format!("  error: {}", e));
                        }
                    },
                }
            }
            "symmetry" => {
                em.heading("symmetry determining equations");
                for (name, field) in named_fields(&request.args) {
                    match symmetry_residuals(&model.cr, &field) {
                        Ok(report) => {
                            let ok = report.is_symmetry();
                            em.verdict(&format!("{} is a symmetry", name), ok);
                            if !ok {
                                all_passed = false;
                                for (label, r) in report.nonzero_residuals() {
                                    em.equation(&format!("{} residual {}", name, label), &r);
                                }
                            }
                        }
                        Err(e) => {
                            all_passed = false;
                            em.line(&format!("  {}: error: {}", name, e));
                        }
                    }
                }
            }
            "noether" => {
                em.heading("Noether balance laws");
                for (name, field) in named_fields(&request.args) {
                    let (adm, residual) = admissible_check(&field, &model.cr);
                    if !adm {
                        em.equation(&format!("{}: admissibility defect", name), &residual);
                    }
                    match noether_law(&model.cr, &field) {
                        Ok(law) => {
                            if !law.verified {
                                all_passed = false;
                            }
                            emit_balance_law(&mut em, &name, &law, ctx);
                        }
                        Err(e) => {
                            all_passed = false;
                            em.line(&format!("  {}: refused: {}", name, e));
                        }
                    }
                }
            }
            "energy-momentum" => {
                em.heading("energy-momentum balance laws");
                match energy_momentum(&model.cr, &model.connection) {
                    Ok((tensor, laws)) => {
                        for j in 0..ctx.base_dim() {
                            for i in 0..ctx.base_dim() {
                                em.equation(
                                    &format!(
                                        "T^{}_{}",
                                        ctx.base_name(j),
                                        ctx.base_name(i)
                                    ),
                                    &tensor.matrix[j][i],
                                );
                            }
                        }
                        for (i, law) in laws.iter().enumerate() {
                            if !law.verified {
                                all_passed = false;
                            }
                            emit_balance_law(
                                &mut em,
                                &format!("direction {}", ctx.base_name(i)),
                                law,
                                ctx,
                            );
                        }
                    }
                    Err(e) => {
                        all_passed = false;
                        em.line(&format!("  refused: {}", e));
                    }
                }
            }
            "gauge" => {
                em.heading("gauge balance laws");
                for (name, field) in named_fields(&request.args) {
                    match gauge_law(&model.cr, &field) {
                        Ok(law) => {
                            if !law.verified {
                                all_passed = false;
                            }
                            emit_balance_law(&mut em, &name, &law, ctx);
                        }
                        Err(e) => {
                            all_passed = false;
                            em.line(&format!("  {}: refused: {}", name, e));
                        }
                    }
                }
            }
            "secondary" => {
                em.heading("secondary balance law verification");
                match &model.secondary {
                    None => {
                        all_passed = false;
                        em.line("  no [secondary] candidate declared");
                    }
                    Some(candidate) => {
                        let (ok, residual) = verify_secondary(&bs, candidate);
                        em.verdict("multiplier certificate", ok);
                        if !ok {
                            all_passed = false;
                            em.equation("residual", &residual);
                        }
                    }
                }
            }
            "cattaneo" => {
                em.heading("Cattaneo heat propagation");
                match cattaneo_build() {
                    Ok(catmodel) => {
                        let cat_ctx = &catmodel.ctx;
                        let cat_bs = balance_system(&catmodel.cr);
                        let mut inner = Emitter {
                            out: String::new(),
                            format: options.format,
                            ctx: cat_ctx,
                        };
                        for (mu, r) in cat_bs.residuals.iter().enumerate() {
                            inner.equation(&format!("B_{}", cat_ctx.field_name(mu)), r);
                        }
                        inner.equation("internal energy", &catmodel.energy);
                        inner.equation("entropy density K^t", &catmodel.candidate.flux[0]);
                        for a in 1..4 {
                            inner.equation(
                                &format!("entropy flux K^{}", cat_ctx.base_name(a)),
                                &catmodel.candidate.flux[a],
                            );
                        }
                        inner.equation("production", &catmodel.production);
                        let (ok, residual) = verify_secondary(&cat_bs, &catmodel.candidate);
                        inner.verdict("symbolic entropy certificate", ok);
                        if !ok {
                            all_passed = false;
                            inner.equation("residual", &residual);
                        }
                        let kappa = num::BigRational::new(3.into(), 2.into());
                        for sign in [1i64, -1] {
                            let concrete = cattaneo_concrete(kappa.clone(), sign).unwrap();
                            match ii_law_check(
                                &catmodel,
                                &concrete,
                                (1.0, 10.0),
                                (0.0, 10.0),
                                options.samples,
                                options.seed,
                            ) {
                                Ok(verdict) => {
                                    let label = format!(
                                        "production sign under lam0 = {}1/theta \
                                         ({} samples, min {:.6e}, max {:.6e})",
                                        if sign > 0 { "" } else { "-" },
                                        verdict.samples,
                                        verdict.min_value,
                                        verdict.max_value
                                    );
                                    let ok = if sign > 0 {
                                        verdict.passes_nonnegative()
                                    } else {
                                        verdict.nonpositive == verdict.samples
                                    };
                                    inner.verdict(&label, ok);
                                    if !ok {
                                        all_passed = false;
                                    }
                                }
                                Err(e) => {
                                    all_passed = false;
                                    inner.line(&format!("  sampling error: {}", e));
                                }
                            }
                        }
                        em.out.push_str(&inner.out);
                    }
                    Err(e) => {
                        all_passed = false;
                        em.line(&format!("  error: {}", e));
                    }
                }
            }
            other => {
                all_passed = false;
                em.line(&format!("unknown analysis `{}`", other));
            }
        }
    }

    // informational extras for covering relations
    if requests.iter().any(|r| r.name == "balance") && model.cr.has_density() {
        if let Ok(dec) = ibs_decomposition(&model.cr) {
            em.heading("invariant decomposition");
            for (mu, c) in dec.omega1.iter().enumerate() {
                em.equation(&format!("omega^1 coefficient ({})", ctx.field_name(mu)), c);
            }
            let defect_zero = dec.defect.values().all(|e| e.is_zero());
            em.verdict("contact defect block vanishes", defect_zero);
        }
    }
    if requests.iter().any(|r| r.name == "symmetry") {
        for (name, field) in model.vector_fields.iter() {
            if field.is_vertical() {
                if let Ok((q, closed)) = source_charge(&model.cr, field) {
                    em.heading(&format!("source charge of {}", name));
                    em.verdict("horizontally closed", closed);
                    if q.is_zero() {
                        em.line("  charge form vanishes (conservation-law case)");
                    } else {
                        let rendered = match options.format {
                            Format::Text => q.pretty(ctx),
                            Format::Latex => q.latex(ctx),
                        };
                        em.line(&format!("  Q(xi) = {}", rendered));
                    }
                }
            }
        }
    }

    let _ = writeln!(
        em.out,
        "\noverall: {}",
        if all_passed { "PASS" } else { "FAIL" }
    );
    Report {
        text: em.out,
        all_passed,
    }
}
