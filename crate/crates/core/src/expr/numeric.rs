//! IEEE-double evaluation and the randomized equality fallback.

use std::collections::BTreeMap;

use num::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Expr, Factor};
use crate::error::{Error, Result};

/// Numeric assignment: every leaf atom (coordinate, fiber coordinate,
/// function atom with its derivative record, antiderivative atom) maps to a
/// real value. Exponentials are evaluated from their argument.
pub type Assignment = BTreeMap<Factor, f64>;

/// Outcome of [`equals`]: `Equal` is a syntactic identity of canonical
/// forms; `ProbablyEqual` means canonicalization could not identify the two
/// but randomized evaluation at 32 points with independent atom values did
/// (reported as "probable").
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Equality {
    Equal,
    ProbablyEqual,
    Distinct,
}

impl Equality {
    pub fn holds(self) -> bool {
        matches!(self, Equality::Equal | Equality::ProbablyEqual)
    }
}

impl Expr {
    /// Evaluate at an assignment. Errors on unassigned atoms and on negative
    /// powers of zero.
    pub fn eval_numeric(&self, assignment: &Assignment) -> Result<f64> {
        let mut total = 0.0;
        for (m, c) in self.terms() {
            let mut prod = c.to_f64().ok_or(Error::DivisionByZero)?;
            for (factor, e) in m.factors() {
                let base = eval_factor(factor, assignment)?;
                if e < 0 && base.abs() < 1e-300 {
                    return Err(Error::DivisionByZero);
                }
                prod *= base.powi(e as i32);
            }
            total += prod;
        }
        Ok(total)
    }
}

fn eval_factor(factor: &Factor, assignment: &Assignment) -> Result<f64> {
    if let Factor::Exp(arg) = factor {
        return Ok(arg.eval_numeric(assignment)?.exp());
    }
    assignment
        .get(factor)
        .copied()
        .ok_or_else(|| Error::UnassignedAtom(format!("{:?}", factor)))
}

const EQUALITY_POINTS: usize = 32;
pub const DEFAULT_EQUALITY_SEED: u64 = 0x6a65_7466_6f72_6d73;

/// Canonical-form equality with a seeded randomized numeric fallback. All
/// atoms are sampled as independent unknowns (derivative relations between
/// an atom and its recorded partials are deliberately not imposed).
pub fn equals(a: &Expr, b: &Expr, seed: u64) -> Equality {
    if a == b {
        return Equality::Equal;
    }
    let mut atoms = a.atoms();
    atoms.extend(b.atoms());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < EQUALITY_POINTS && attempts < EQUALITY_POINTS * 8 {
        attempts += 1;
        let mut assignment = Assignment::new();
        for atom in &atoms {
            let v: f64 = rng.gen_range(-2.0..2.0);
            // keep away from zero so reciprocal powers stay tame
            let v = if v.abs() < 0.05 { v + 0.5 } else { v };
            assignment.insert(atom.clone(), v);
        }
        let (va, vb) = match (a.eval_numeric(&assignment), b.eval_numeric(&assignment)) {
            (Ok(va), Ok(vb)) => (va, vb),
            _ => continue,
        };
        let scale = va.abs().max(vb.abs()).max(1.0);
        if (va - vb).abs() > 1e-6 * scale {
            return Equality::Distinct;
        }
        checked += 1;
    }
    if checked == 0 {
        // could not produce a single valid sample; stay conservative
        return Equality::Distinct;
    }
    Equality::ProbablyEqual
}
