//! Variable registries and monomial orders.
//!
//! A [`VarRegistry`] fixes the ambient polynomial variables once; every
//! polynomial carries a shared handle to its registry and all arithmetic
//! demands registry agreement. Monomial comparison is factored into
//! [`MonomialOrder`], a sequence of variable blocks each compared by
//! graded reverse lexicographic order. Single-block = grevlex, one
//! singleton block per variable = lex, and a leading block of eliminated
//! variables gives an elimination order.

use std::cmp::Ordering;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarRegistry {
    names: Vec<String>,
}

impl VarRegistry {
    pub fn new<S: Into<String>>(names: Vec<S>) -> Arc<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut seen = std::collections::BTreeSet::new();
        for n in &names {
            assert!(seen.insert(n.clone()), "duplicate variable name `{n}`");
        }
        Arc::new(VarRegistry { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Check that two registries agree (by content, not pointer).
pub fn same_registry(a: &Arc<VarRegistry>, b: &Arc<VarRegistry>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a.names == b.names {
        Ok(())
    } else {
        Err(Error::RegistryMismatch(format!(
            "[{}] vs [{}]",
            a.names.join(","),
            b.names.join(",")
        )))
    }
}

/// Monomial order as an ordered list of variable blocks. Blocks are compared
/// in sequence; within a block, graded reverse lexicographic order applies
/// (total block degree first, then the rightmost differing variable with the
/// *smaller* exponent wins).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonomialOrder {
    /// Graded reverse lexicographic over all variables. The default.
    GrevLex,
    /// Pure lexicographic, variable 0 most significant.
    Lex,
    /// Explicit block order. Every variable of the registry must appear in
    /// exactly one block.
    Blocks(Arc<Vec<Vec<usize>>>),
}

impl MonomialOrder {
    pub fn blocks(blocks: Vec<Vec<usize>>) -> Self {
        MonomialOrder::Blocks(Arc::new(blocks))
    }

    /// Elimination order: `eliminated` block first, then the remaining
    /// variables of a registry of size `nvars` as one grevlex block.
    pub fn elim(eliminated: &[usize], nvars: usize) -> Self {
        let elim_set: std::collections::BTreeSet<usize> = eliminated.iter().copied().collect();
        let rest: Vec<usize> = (0..nvars).filter(|v| !elim_set.contains(v)).collect();
        let mut first: Vec<usize> = eliminated.to_vec();
        first.sort_unstable();
        MonomialOrder::blocks(vec![first, rest])
    }

    /// Compare exponent vectors; `Greater` means `a` precedes `b` (is the
    /// larger monomial).
    pub fn cmp(&self, a: &[u32], b: &[u32]) -> Ordering {
        debug_assert_eq!(a.len(), b.len());
        match self {
            MonomialOrder::GrevLex => grevlex_all(a, b),
            MonomialOrder::Lex => {
                for i in 0..a.len() {
                    match a[i].cmp(&b[i]) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                Ordering::Equal
            }
            MonomialOrder::Blocks(blocks) => {
                for block in blocks.iter() {
                    match grevlex_block(a, b, block) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                Ordering::Equal
            }
        }
    }
}

fn grevlex_all(a: &[u32], b: &[u32]) -> Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    match da.cmp(&db) {
        Ordering::Equal => {}
        ord => return ord,
    }
    // Rightmost differing exponent, smaller wins.
    for i in (0..a.len()).rev() {
        match a[i].cmp(&b[i]) {
            Ordering::Equal => continue,
            Ordering::Less => return Ordering::Greater,
            Ordering::Greater => return Ordering::Less,
        }
    }
    Ordering::Equal
}

fn grevlex_block(a: &[u32], b: &[u32], block: &[usize]) -> Ordering {
    let da: u64 = block.iter().map(|&v| a[v] as u64).sum();
    let db: u64 = block.iter().map(|&v| b[v] as u64).sum();
    match da.cmp(&db) {
        Ordering::Equal => {}
        ord => return ord,
    }
    for &v in block.iter().rev() {
        match a[v].cmp(&b[v]) {
            Ordering::Equal => continue,
            Ordering::Less => return Ordering::Greater,
            Ordering::Greater => return Ordering::Less,
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grevlex_degree_first() {
        let o = MonomialOrder::GrevLex;
        // x^2 > y (degrees 2 vs 1)
        assert_eq!(o.cmp(&[2, 0], &[0, 1]), Ordering::Greater);
        // same degree: x*y vs y^2 -> rightmost diff is y, smaller wins: x*y > y^2
        assert_eq!(o.cmp(&[1, 1], &[0, 2]), Ordering::Greater);
    }

    #[test]
    fn lex_ignores_degree() {
        let o = MonomialOrder::Lex;
        // x > y^5
        assert_eq!(o.cmp(&[1, 0], &[0, 5]), Ordering::Greater);
    }

    #[test]
    fn lex_equals_singleton_blocks() {
        let o1 = MonomialOrder::Lex;
        let o2 = MonomialOrder::blocks(vec![vec![0], vec![1], vec![2]]);
        let ms: Vec<Vec<u32>> = vec![vec![1, 0, 3], vec![0, 2, 0], vec![1, 1, 0], vec![2, 0, 0]];
        for a in &ms {
            for b in &ms {
                assert_eq!(o1.cmp(a, b), o2.cmp(a, b));
            }
        }
    }

    #[test]
    fn elimination_order_dominates() {
        // Eliminate variable 0: any monomial containing it beats any without.
        let o = MonomialOrder::elim(&[0], 3);
        assert_eq!(o.cmp(&[1, 0, 0], &[0, 9, 9]), Ordering::Greater);
    }
}
