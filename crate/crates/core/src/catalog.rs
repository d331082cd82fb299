//! Built-in example models shared by the test suite and the CLI: the 1+1
//! scalar wave field and the five-field fluid system.

use num::BigRational;

use crate::constitutive::{build_cr, ConstitutiveRelation, CrKind, CrSpec};
use crate::context::{Ctx, JetContext};
use crate::coords::{MultiIndex, VarRef};
use crate::error::Result;
use crate::expr::Expr;

/// 1+1 scalar field over (t, x) with L = ½(u_t² − u_x²).
pub fn wave() -> Result<(Ctx, ConstitutiveRelation, Expr)> {
    let ctx = JetContext::full(2, 1, 1)
        .with_names(&["t", "x"], &["u"])
        .into_ctx();
    let zt = Expr::var(VarRef::Jet(0, MultiIndex::unit(2, 0)));
    let zx = Expr::var(VarRef::Jet(0, MultiIndex::unit(2, 1)));
    let half = BigRational::new(1.into(), 2.into());
    let l = zt.pow(2)?.sub(&zx.pow(2)?).scale(&half);
    let cr = build_cr(CrSpec::Lagrangian(l.clone()), &ctx)?;
    Ok((ctx, cr, l))
}

/// Five-field fluid system over (t, x¹..x³) with fields (ρ, v¹..v³, e) and
/// opaque constitutive atoms: stress t^{AB}, heat flux h^B, bulk force f_A
/// and radiation source r, all functions of the fields. The balance system
/// consists of the mass conservation law, the three momentum balance laws
/// and the energy balance law.
pub fn five_field() -> Result<(Ctx, ConstitutiveRelation)> {
    let mut jc = JetContext::ret(4, 5).with_names(
        &["t", "x1", "x2", "x3"],
        &["rho", "v1", "v2", "v3", "e"],
    );
    let fields: Vec<VarRef> = (0..5).map(VarRef::Field).collect();
    for a in 1..=3usize {
        for b in 1..=3usize {
            jc = jc.declare_func(&format!("t{}{}", a, b), fields.clone());
        }
        jc = jc.declare_func(&format!("h{}", a), fields.clone());
        jc = jc.declare_func(&format!("f{}", a), fields.clone());
    }
    jc = jc.declare_func("r", fields.clone());
    let ctx = jc.into_ctx();

    let rho = Expr::var(VarRef::Field(0));
    let v = |a: usize| Expr::var(VarRef::Field(a)); // a in 1..=3
    let e = Expr::var(VarRef::Field(4));
    let half = BigRational::new(1.into(), 2.into());
    let mut vsq = Expr::zero();
    for a in 1..=3 {
        vsq = vsq.add(&v(a).pow(2)?);
    }
    let kinetic = rho.mul(&vsq).scale(&half);
    let t_ab = |a: usize, b: usize| Expr::func(&format!("t{}{}", a, b), fields.clone());
    let h_b = |b: usize| Expr::func(&format!("h{}", b), fields.clone());
    let f_a = |a: usize| Expr::func(&format!("f{}", a), fields.clone());

    let mut flux = vec![vec![Expr::zero(); 5]; 4];
    let mut source = vec![Expr::zero(); 5];
    // mass: ∂_t ρ + ∂_B(ρ v^B) = 0
    flux[0][0] = rho.clone();
    for b in 1..=3 {
        flux[b][0] = rho.mul(&v(b));
    }
    // momentum: ∂_t(ρ v^A) + ∂_B(½ρ v^A v^B + t^{AB}) = f^A
    for a in 1..=3 {
        flux[0][a] = rho.mul(&v(a));
        for b in 1..=3 {
            flux[b][a] = rho.mul(&v(a)).mul(&v(b)).scale(&half).add(&t_ab(a, b));
        }
        source[a] = f_a(a);
    }
    // energy: ∂_t(½ρ‖v‖² + e)
    //         + ∂_B((½ρ‖v‖² + e)v^B + t^B_C v^C − h^B) = f_B v^B + r
    let total_energy = kinetic.add(&e);
    flux[0][4] = total_energy.clone();
    for b in 1..=3 {
        let mut transport = total_energy.mul(&v(b)).sub(&h_b(b));
        for c in 1..=3 {
            transport = transport.add(&t_ab(b, c).mul(&v(c)));
        }
        flux[b][4] = transport;
    }
    let mut work = Expr::func("r", fields.clone());
    for b in 1..=3 {
        work = work.add(&f_a(b).mul(&v(b)));
    }
    source[4] = work;

    let cr = ConstitutiveRelation::new(&ctx, flux, source, None, CrKind::Generic)?;
    Ok((ctx, cr))
}
