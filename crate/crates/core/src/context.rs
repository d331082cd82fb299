//! The bundle model: dimensions, truncation order, the admitted-derivative
//! set P, the metric density and declared function atoms.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::coords::{MultiIndex, VarRef};
use crate::error::{Error, Result};
use crate::expr::Expr;

/// How the base volume density is modeled.
#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    /// g ≡ 1, so λ_G = 0.
    Euclidean,
    /// A density g(x) given as an expression in the base coordinates; the
    /// logarithmic derivatives λ_{G,i} = g_{,i}/g enter covariant
    /// divergences.
    Density(Expr),
}

/// Declared function atom: its dependency list.
#[derive(Clone, Debug, PartialEq)]
pub struct FuncSig {
    pub name: String,
    pub args: Vec<VarRef>,
}

/// Immutable description of a (partial) jet bundle. `P` lists the admitted
/// jet coordinates (μ, I) with 1 ≤ |I| ≤ k; order-0 coordinates are always
/// admitted. Total derivatives and decompositions may emit variables one
/// order above `k`; these live on a shadow layer that exists for outputs
/// only.
#[derive(Clone, Debug)]
pub struct JetContext {
    n: usize,
    m: usize,
    k: usize,
    p_set: BTreeSet<(usize, MultiIndex)>,
    base_names: Vec<String>,
    field_names: Vec<String>,
    /// Optional almost-product split of the base: block id per base
    /// coordinate. Vector fields preserving the split may not mix blocks.
    base_block: Option<Vec<u8>>,
    metric: Metric,
    functions: BTreeMap<String, FuncSig>,
}

pub type Ctx = Arc<JetContext>;

impl JetContext {
    /// Full jet bundle of order `k`.
    pub fn full(n: usize, m: usize, k: usize) -> JetContext {
        let mut p_set = BTreeSet::new();
        let mut frontier: Vec<MultiIndex> = vec![MultiIndex::zero(n)];
        for _ in 1..=k {
            let mut next = Vec::new();
            for idx in &frontier {
                for i in 0..n {
                    next.push(idx.step(i));
                }
            }
            for idx in &next {
                for mu in 0..m {
                    p_set.insert((mu, idx.clone()));
                }
            }
            frontier = next;
        }
        Self::assemble(n, m, k, p_set).expect("full jet whitelist is closed")
    }

    /// Point bundle: constitutive functions depend on the fields only.
    pub fn ret(n: usize, m: usize) -> JetContext {
        Self::assemble(n, m, 0, BTreeSet::new()).expect("empty whitelist is closed")
    }

    /// Partial jet bundle with an explicit whitelist.
    pub fn partial(
        n: usize,
        m: usize,
        k: usize,
        p_set: BTreeSet<(usize, MultiIndex)>,
    ) -> Result<JetContext> {
        Self::assemble(n, m, k, p_set)
    }

    fn assemble(
        n: usize,
        m: usize,
        k: usize,
        p_set: BTreeSet<(usize, MultiIndex)>,
    ) -> Result<JetContext> {
        let ctx = JetContext {
            n,
            m,
            k,
            p_set,
            base_names: (0..n).map(|i| format!("x{}", i + 1)).collect(),
            field_names: (0..m).map(|mu| format!("y{}", mu + 1)).collect(),
            base_block: None,
            metric: Metric::Euclidean,
            functions: BTreeMap::new(),
        };
        ctx.validate()?;
        Ok(ctx)
    }

    fn validate(&self) -> Result<()> {
        for (mu, idx) in &self.p_set {
            if *mu >= self.m {
                return Err(Error::IndexOutOfRange(format!("field {}", mu + 1)));
            }
            if idx.len() != self.n {
                return Err(Error::IndexOutOfRange(format!(
                    "multi-index {} has wrong length",
                    idx
                )));
            }
            let ord = idx.order();
            if ord == 0 || ord > self.k {
                return Err(Error::IndexOutOfRange(format!(
                    "|{}| must lie in 1..={}",
                    idx, self.k
                )));
            }
        }
        // Downward closure within the directions each field actually uses:
        // the first-order slice of P defines the admitted directions of the
        // field, and every predecessor that still touches one of them must
        // itself be admitted.
        for (mu, idx) in &self.p_set {
            if idx.order() < 2 {
                continue;
            }
            let dirs: BTreeSet<usize> = self
                .p_set
                .iter()
                .filter(|(nu, j)| nu == mu && j.order() == 1)
                .flat_map(|(_, j)| j.support().collect::<Vec<_>>())
                .collect();
            let mut reachable = false;
            for i in idx.support() {
                let pred = idx.lower(i).unwrap();
                if self.p_set.contains(&(*mu, pred.clone())) {
                    reachable = true;
                    continue;
                }
                let touches = pred.support().any(|d| dirs.contains(&d));
                if touches {
                    return Err(Error::WhitelistNotClosed(
                        format!("z[{},{}]", mu + 1, idx),
                        format!("z[{},{}]", mu + 1, pred),
                    ));
                }
            }
            if !reachable {
                let i = idx.support().next().unwrap();
                return Err(Error::WhitelistNotClosed(
                    format!("z[{},{}]", mu + 1, idx),
                    format!("z[{},{}]", mu + 1, idx.lower(i).unwrap()),
                ));
            }
        }
        if let Metric::Density(g) = &self.metric {
            if !g.support().iter().all(|v| matches!(v, VarRef::Base(_))) {
                return Err(Error::Unsupported(
                    "metric density must depend on base coordinates only".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn with_names(mut self, base: &[&str], fields: &[&str]) -> JetContext {
        assert_eq!(base.len(), self.n);
        assert_eq!(fields.len(), self.m);
        self.base_names = base.iter().map(|s| s.to_string()).collect();
        self.field_names = fields.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_metric_density(mut self, g: Expr) -> Result<JetContext> {
        self.metric = Metric::Density(g);
        self.validate()?;
        Ok(self)
    }

    pub fn with_base_split(mut self, blocks: Vec<u8>) -> JetContext {
        assert_eq!(blocks.len(), self.n);
        self.base_block = Some(blocks);
        self
    }

    /// Declare an opaque function atom with an explicit dependency list.
    pub fn declare_func(mut self, name: &str, args: Vec<VarRef>) -> JetContext {
        let mut args = args;
        args.sort();
        args.dedup();
        self.functions.insert(
            name.to_string(),
            FuncSig {
                name: name.to_string(),
                args,
            },
        );
        self
    }

    pub fn into_ctx(self) -> Ctx {
        Arc::new(self)
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn fiber_dim(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn base_name(&self, i: usize) -> &str {
        &self.base_names[i]
    }

    pub fn field_name(&self, mu: usize) -> &str {
        &self.field_names[mu]
    }

    pub fn base_block(&self) -> Option<&[u8]> {
        self.base_block.as_deref()
    }

    pub fn functions(&self) -> &BTreeMap<String, FuncSig> {
        &self.functions
    }

    pub fn func_sig(&self, name: &str) -> Result<&FuncSig> {
        self.functions
            .get(name)
            .ok_or_else(|| Error::UndeclaredFunction(name.to_string()))
    }

    /// Admitted jet pairs (μ, I), |I| ≥ 1, in canonical order.
    pub fn admitted_jets(&self) -> impl Iterator<Item = &(usize, MultiIndex)> {
        self.p_set.iter()
    }

    /// First-order admitted pairs (μ, i).
    pub fn admitted_first_order(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (mu, idx) in &self.p_set {
            if idx.order() == 1 {
                let i = idx.support().next().unwrap();
                out.push((*mu, i));
            }
        }
        out
    }

    pub fn is_admitted(&self, v: &VarRef) -> bool {
        match v {
            VarRef::Base(i) => *i < self.n,
            VarRef::Field(mu) => *mu < self.m,
            VarRef::Jet(mu, idx) => self.p_set.contains(&(*mu, idx.clone())),
        }
    }

    /// Admitted on the bundle itself or on its one-order shadow extension
    /// (images of admitted variables under one total derivative).
    pub fn is_shadow_admitted(&self, v: &VarRef) -> bool {
        if self.is_admitted(v) {
            return true;
        }
        match v {
            VarRef::Jet(mu, idx) => {
                if *mu >= self.m {
                    return false;
                }
                idx.support().any(|i| {
                    idx.lower(i)
                        .map(|pred| {
                            pred.is_empty_index() || self.p_set.contains(&(*mu, pred))
                        })
                        .unwrap_or(false)
                })
            }
            _ => false,
        }
    }

    /// All coordinates of the bundle in canonical order (no shadow layer).
    pub fn coordinates(&self) -> Vec<VarRef> {
        let mut out = Vec::new();
        for i in 0..self.n {
            out.push(VarRef::Base(i));
        }
        for mu in 0..self.m {
            out.push(VarRef::Field(mu));
        }
        for (mu, idx) in &self.p_set {
            out.push(VarRef::Jet(*mu, idx.clone()));
        }
        out
    }

    /// The density g as an expression (1 for the euclidean case).
    pub fn density(&self) -> Expr {
        match &self.metric {
            Metric::Euclidean => Expr::one(),
            Metric::Density(g) => g.clone(),
        }
    }

    /// λ_{G,i} = g_{,i}/g.
    pub fn lambda_g(&self, i: usize) -> Expr {
        match &self.metric {
            Metric::Euclidean => Expr::zero(),
            Metric::Density(g) => {
                let dg = g.partial_derivative(&VarRef::Base(i));
                dg.div(g).expect("density is a monomial or atom power")
            }
        }
    }

    /// Resolve a coordinate name from the surface syntax.
    pub fn lookup_name(&self, name: &str) -> Option<VarRef> {
        if let Some(i) = self.base_names.iter().position(|s| s == name) {
            return Some(VarRef::Base(i));
        }
        if let Some(mu) = self.field_names.iter().position(|s| s == name) {
            return Some(VarRef::Field(mu));
        }
        None
    }

    pub fn display_var(&self, v: &VarRef) -> String {
        match v {
            VarRef::Base(i) => self.base_names[*i].clone(),
            VarRef::Field(mu) => self.field_names[*mu].clone(),
            VarRef::Jet(mu, idx) => format!("z[{},{}]", mu + 1, idx),
        }
    }
}

impl PartialEq for JetContext {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.m == other.m
            && self.k == other.k
            && self.p_set == other.p_set
            && self.metric == other.metric
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_jet_has_all_pairs() {
        let ctx = JetContext::full(2, 2, 2);
        // order 1: 2 dirs x 2 fields; order 2: 3 indices x 2 fields
        assert_eq!(ctx.admitted_jets().count(), 4 + 6);
    }

    #[test]
    fn whitelist_closure_is_enforced() {
        let n = 1;
        let mut p = BTreeSet::new();
        // second derivative admitted without the first
        p.insert((0usize, MultiIndex::from_counts(vec![2])));
        let err = JetContext::partial(n, 1, 2, p).unwrap_err();
        assert!(matches!(err, Error::WhitelistNotClosed(_, _)));
    }

    #[test]
    fn ret_context_has_empty_whitelist() {
        let ctx = JetContext::ret(4, 4);
        assert_eq!(ctx.admitted_jets().count(), 0);
        assert_eq!(ctx.order(), 0);
        // shadow admits first derivatives
        let v = VarRef::Jet(0, MultiIndex::unit(4, 0));
        assert!(!ctx.is_admitted(&v));
        assert!(ctx.is_shadow_admitted(&v));
    }
}
