//! Coordinate bookkeeping: multi-indices, jet coordinates and form-bundle
//! fiber coordinates.

use std::cmp::Ordering;
use std::fmt;

/// A derivative multi-index over the base coordinates: `counts[i]` is the
/// number of derivatives in direction `x^i`. The length always equals the
/// base dimension of the context the index is used with.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex {
    counts: Vec<u8>,
}

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex {
            counts: vec![0; n],
        }
    }

    pub fn from_counts(counts: Vec<u8>) -> Self {
        MultiIndex { counts }
    }

    /// Single derivative in direction `i`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut counts = vec![0; n];
        counts[i] = 1;
        MultiIndex { counts }
    }

    pub fn counts(&self) -> &[u8] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty_index(&self) -> bool {
        self.order() == 0
    }

    /// |I| = total derivative order.
    pub fn order(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    /// I + 1_i
    pub fn step(&self, i: usize) -> Self {
        let mut counts = self.counts.clone();
        counts[i] += 1;
        MultiIndex { counts }
    }

    /// I - 1_i, or None if I_i = 0.
    pub fn lower(&self, i: usize) -> Option<Self> {
        if self.counts[i] == 0 {
            return None;
        }
        let mut counts = self.counts.clone();
        counts[i] -= 1;
        Some(MultiIndex { counts })
    }

    /// Directions with a nonzero count.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| i)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        // Degree first, then lexicographic: keeps printed output grouped by
        // derivative order.
        (self.order(), &self.counts).cmp(&(other.order(), &other.counts))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.counts.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", c)?;
        }
        write!(f, ")")
    }
}

/// A coordinate on a (partial) jet space.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum VarRef {
    /// Base coordinate x^i, 0-based.
    Base(usize),
    /// Fiber coordinate y^μ, 0-based.
    Field(usize),
    /// Jet coordinate z^μ_I with |I| ≥ 1.
    Jet(usize, MultiIndex),
}

impl VarRef {
    pub fn jet(mu: usize, index: MultiIndex) -> Self {
        if index.is_empty_index() {
            VarRef::Field(mu)
        } else {
            VarRef::Jet(mu, index)
        }
    }

    /// The field index if this is a fiber or jet coordinate.
    pub fn field_index(&self) -> Option<usize> {
        match self {
            VarRef::Base(_) => None,
            VarRef::Field(mu) => Some(*mu),
            VarRef::Jet(mu, _) => Some(*mu),
        }
    }

    /// Derivative order: 0 for base/fiber coordinates, |I| for jets.
    pub fn order(&self) -> usize {
        match self {
            VarRef::Jet(_, idx) => idx.order(),
            _ => 0,
        }
    }
}

/// Fiber coordinate of one of the form bundles an expression can live on.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum FiberCoord {
    /// p, the η-coefficient on the bundle of n-forms killed by two vertical
    /// vectors.
    P,
    /// p^i_μ, coefficient of dy^μ∧η_i on the same bundle.
    Pi(usize, usize),
    /// p_μ, coefficient of dy^μ∧η on the (n+1)-form bundle.
    Pmu(usize),
    /// q_μ, coefficient of ω^μ∧η on the (n+1)-form bundle over the 1-jet
    /// space.
    Q(usize),
    /// q^i_μ, coefficient of ω^μ_i∧η on the same bundle.
    Qi(usize, usize),
}

impl fmt::Display for FiberCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiberCoord::P => write!(f, "p"),
            FiberCoord::Pi(i, mu) => write!(f, "p[{},{}]", i + 1, mu + 1),
            FiberCoord::Pmu(mu) => write!(f, "pm[{}]", mu + 1),
            FiberCoord::Q(mu) => write!(f, "q[{}]", mu + 1),
            FiberCoord::Qi(i, mu) => write!(f, "qq[{},{}]", i + 1, mu + 1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_step_and_lower() {
        let i = MultiIndex::zero(2).step(0).step(0).step(1);
        assert_eq!(i.counts(), &[2, 1]);
        assert_eq!(i.order(), 3);
        assert_eq!(i.lower(1).unwrap().counts(), &[2, 0]);
        assert!(i.lower(1).unwrap().lower(1).is_none());
    }

    #[test]
    fn multi_index_order_is_degree_first() {
        let a = MultiIndex::from_counts(vec![0, 2]);
        let b = MultiIndex::from_counts(vec![1, 0]);
        assert!(b < a);
    }
}
