//! Finite polynomial endofunctors, bounded-depth W-trees, and the plump
//! ordering with its poset reflection.
//!
//! The plump preorder and its strict part are the least pair of relations
//! closed under
//!
//! ```text
//! (∀x. c(x) ⊏ w) → σ(a,c) ⊑ w        (∃x. w ⊑ c(x)) → w ⊏ σ(a,c)
//! ```
//!
//! computed by simultaneous Kleene iteration; restricting to trees of bounded
//! depth is exact because the rules only mention immediate subtrees.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::order::{FinitePreorder, OrderError, PosetReflection, Relation, WfRelation};

/// Default cap on the number of trees materialized by [`build_wtrees`].
pub const DEFAULT_TREE_CAP: usize = 100_000;

#[derive(Debug, Error)]
pub enum WtypeError {
    #[error("duplicate shape name {0:?}")]
    DuplicateShape(String),
    #[error("building trees to depth {depth} would produce {count} trees, over the cap {cap}")]
    TooManyTrees { depth: usize, count: u128, cap: usize },
    #[error("tree set is not closed under subtrees: missing a child of {0}")]
    NotSubtreeClosed(String),
    #[error("tree uses shape index {0} outside the polynomial")]
    UnknownShape(usize),
    #[error(transparent)]
    Order(#[from] OrderError),
}

/// A polynomial endofunctor presented by its shapes and fiber sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    shapes: Vec<Shape>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    pub name: String,
    pub fiber: usize,
}

impl Polynomial {
    pub fn new(shapes: Vec<Shape>) -> Result<Self, WtypeError> {
        for (i, s) in shapes.iter().enumerate() {
            if shapes[..i].iter().any(|t| t.name == s.name) {
                return Err(WtypeError::DuplicateShape(s.name.clone()));
            }
        }
        Ok(Polynomial { shapes })
    }

    /// Shapes `leaf` (empty fiber) and `node` (unary fiber); its W-type is
    /// the finite chain fragment of ω.
    pub fn unary_chain() -> Self {
        Polynomial::new(vec![
            Shape { name: "leaf".into(), fiber: 0 },
            Shape { name: "node".into(), fiber: 1 },
        ])
        .expect("distinct shape names")
    }

    /// Shapes `leaf` (empty fiber) and `node` (binary fiber).
    pub fn binary() -> Self {
        Polynomial::new(vec![
            Shape { name: "leaf".into(), fiber: 0 },
            Shape { name: "node".into(), fiber: 2 },
        ])
        .expect("distinct shape names")
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn fiber(&self, shape: usize) -> usize {
        self.shapes[shape].fiber
    }

    /// Whether any shape has an empty fiber; without one there are no
    /// finite trees at all.
    pub fn has_nullary_shape(&self) -> bool {
        self.shapes.iter().any(|s| s.fiber == 0)
    }

    /// Number of trees of depth `< depth`, saturating.
    pub fn tree_count(&self, depth: usize) -> u128 {
        let mut level: u128 = 0;
        for _ in 0..depth {
            let mut next: u128 = 0;
            for s in &self.shapes {
                let mut pow: u128 = 1;
                for _ in 0..s.fiber {
                    pow = pow.saturating_mul(level);
                }
                next = next.saturating_add(pow);
            }
            level = next;
        }
        level
    }
}

/// A well-founded tree: a shape together with one subtree per fiber element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WTree {
    pub shape: usize,
    pub children: Vec<WTree>,
}

impl WTree {
    pub fn leaf(shape: usize) -> Self {
        WTree { shape, children: Vec::new() }
    }

    /// Depth: 0 for childless trees, one more than the deepest child.
    pub fn depth(&self) -> usize {
        self.children.iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    pub fn display(&self, poly: &Polynomial) -> String {
        let name = &poly.shapes()[self.shape].name;
        if self.children.is_empty() {
            name.clone()
        } else {
            let kids: Vec<String> = self.children.iter().map(|c| c.display(poly)).collect();
            format!("{}({})", name, kids.join(","))
        }
    }
}

/// All trees of depth `< depth`, in canonical (structural) order.
///
/// Monotone in `depth`. Refuses to materialize more than `cap` trees.
pub fn build_wtrees(poly: &Polynomial, depth: usize, cap: usize) -> Result<Vec<WTree>, WtypeError> {
    let count = poly.tree_count(depth);
    if count > cap as u128 {
        return Err(WtypeError::TooManyTrees { depth, count, cap });
    }
    let mut level: BTreeSet<WTree> = BTreeSet::new();
    for _ in 0..depth {
        let prev: Vec<WTree> = level.iter().cloned().collect();
        let mut next = BTreeSet::new();
        for (si, s) in poly.shapes().iter().enumerate() {
            // all assignments of previous-level trees to the fiber
            let mut stack: Vec<Vec<WTree>> = vec![Vec::new()];
            for _ in 0..s.fiber {
                let mut grown = Vec::new();
                for partial in &stack {
                    for t in &prev {
                        let mut p = partial.clone();
                        p.push(t.clone());
                        grown.push(p);
                    }
                }
                stack = grown;
            }
            for children in stack {
                next.insert(WTree { shape: si, children });
            }
        }
        level = next;
    }
    Ok(level.into_iter().collect())
}

/// The plump preorder `⊑` and strict relation `⊏` on a subtree-closed set of
/// trees, as a [`WfRelation`] whose base carries `⊑`.
pub fn plump_order(trees: &[WTree], poly: &Polynomial) -> Result<WfRelation, WtypeError> {
    let n = trees.len();
    let index_of = |t: &WTree| -> Result<usize, WtypeError> {
        trees
            .binary_search(t)
            .map_err(|_| WtypeError::NotSubtreeClosed(t.display(poly)))
    };
    debug_assert!(trees.windows(2).all(|w| w[0] < w[1]), "trees must be sorted and distinct");
    for t in trees {
        if t.shape >= poly.shapes().len() {
            return Err(WtypeError::UnknownShape(t.shape));
        }
    }
    // children as indices; also validates subtree closure
    let mut kids: Vec<Vec<usize>> = Vec::with_capacity(n);
    for t in trees {
        let mut row = Vec::with_capacity(t.children.len());
        for c in &t.children {
            row.push(index_of(c)?);
        }
        kids.push(row);
    }

    let mut sqle = Relation::empty(n)?;
    let mut sqlt = Relation::empty(n)?;
    loop {
        let mut next_sqle = Relation::empty(n)?;
        let mut next_sqlt = Relation::empty(n)?;
        for (t, tk) in kids.iter().enumerate() {
            for w in 0..n {
                if tk.iter().all(|&c| sqlt.contains(c, w)) {
                    next_sqle.insert(t, w);
                }
                if tk.iter().any(|&c| sqle.contains(w, c)) {
                    next_sqlt.insert(w, t);
                }
            }
        }
        if next_sqle == sqle && next_sqlt == sqlt {
            break;
        }
        sqle = next_sqle;
        sqlt = next_sqlt;
    }

    let names = trees.iter().map(|t| t.display(poly)).collect();
    let base = FinitePreorder::new(names, sqle)?;
    Ok(WfRelation::new(base, sqlt)?)
}

/// Build the trees of depth `< depth`, compute the plump ordering, and
/// reflect onto a poset.
pub fn plump_poset(poly: &Polynomial, depth: usize, cap: usize) -> Result<PosetReflection, WtypeError> {
    let trees = build_wtrees(poly, depth, cap)?;
    let order = plump_order(&trees, poly)?;
    Ok(crate::order::poset_reflection(&order)?)
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.fiber)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::is_compatible_wf;

    /// Rank oracle: with finite fibers, both plump relations coincide with
    /// comparisons of tree depth-rank (leaf rank 0, node rank 1 + max child
    /// rank). Derived by induction from the two generation rules.
    fn rank(t: &WTree) -> usize {
        t.children.iter().map(|c| rank(c) + 1).max().unwrap_or(0)
    }

    #[test]
    fn build_counts_unary_chain() {
        let p = Polynomial::unary_chain();
        assert_eq!(build_wtrees(&p, 0, DEFAULT_TREE_CAP).unwrap().len(), 0);
        let t3 = build_wtrees(&p, 3, DEFAULT_TREE_CAP).unwrap();
        assert_eq!(t3.len(), 3);
        let depths: Vec<usize> = t3.iter().map(|t| t.depth()).collect();
        let mut sorted = depths.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2]);
    }

    #[test]
    fn build_no_nullary_shape_is_empty() {
        let p = Polynomial::new(vec![Shape { name: "s".into(), fiber: 2 }]).unwrap();
        assert!(!p.has_nullary_shape());
        for d in 0..4 {
            assert!(build_wtrees(&p, d, DEFAULT_TREE_CAP).unwrap().is_empty());
        }
    }

    #[test]
    fn build_is_monotone_in_depth() {
        let p = Polynomial::binary();
        let mut prev: Vec<WTree> = Vec::new();
        for d in 0..4 {
            let cur = build_wtrees(&p, d, DEFAULT_TREE_CAP).unwrap();
            assert!(prev.iter().all(|t| cur.contains(t)), "depth {d}");
            prev = cur;
        }
    }

    #[test]
    fn explosion_guard_fires() {
        let p = Polynomial::new(vec![
            Shape { name: "leaf".into(), fiber: 0 },
            Shape { name: "node".into(), fiber: 3 },
        ])
        .unwrap();
        assert!(matches!(build_wtrees(&p, 6, 1000), Err(WtypeError::TooManyTrees { .. })));
    }

    #[test]
    fn plump_leaf_below_itself() {
        let p = Polynomial::unary_chain();
        let trees = build_wtrees(&p, 1, DEFAULT_TREE_CAP).unwrap();
        let w = plump_order(&trees, &p).unwrap();
        assert!(w.base().leq(0, 0));
        assert!(!w.prec_holds(0, 0));
    }

    #[test]
    fn plump_unary_chain_two_levels() {
        // c0 = leaf, c1 = node(c0): c0 ⊑ c1 and c0 ⊏ c1, ⊏ irreflexive
        let p = Polynomial::unary_chain();
        let trees = build_wtrees(&p, 2, DEFAULT_TREE_CAP).unwrap();
        assert_eq!(trees.len(), 2);
        let w = plump_order(&trees, &p).unwrap();
        let c0 = trees.iter().position(|t| t.children.is_empty()).unwrap();
        let c1 = 1 - c0;
        assert!(w.base().leq(c0, c1));
        assert!(w.prec_holds(c0, c1));
        for i in 0..2 {
            assert!(!w.prec_holds(i, i));
        }
    }

    #[test]
    fn plump_matches_rank_oracle() {
        for (poly, depth) in [
            (Polynomial::unary_chain(), 5),
            (Polynomial::binary(), 3),
            (
                Polynomial::new(vec![
                    Shape { name: "a".into(), fiber: 0 },
                    Shape { name: "b".into(), fiber: 0 },
                    Shape { name: "c".into(), fiber: 2 },
                ])
                .unwrap(),
                3,
            ),
        ] {
            let trees = build_wtrees(&poly, depth, DEFAULT_TREE_CAP).unwrap();
            let w = plump_order(&trees, &poly).unwrap();
            for (i, t) in trees.iter().enumerate() {
                for (j, s) in trees.iter().enumerate() {
                    assert_eq!(w.base().leq(i, j), rank(t) <= rank(s));
                    assert_eq!(w.prec_holds(i, j), rank(t) < rank(s));
                }
            }
        }
    }

    #[test]
    fn plump_passes_compatible_wf() {
        for (poly, depth) in [(Polynomial::unary_chain(), 4), (Polynomial::binary(), 3)] {
            let trees = build_wtrees(&poly, depth, DEFAULT_TREE_CAP).unwrap();
            let w = plump_order(&trees, &poly).unwrap();
            let report = is_compatible_wf(&w);
            assert!(report.ok(), "{}", report.describe(w.base().names()));
        }
    }

    #[test]
    fn plump_depth_monotone() {
        // the plump order at depth d is the restriction of the one at d+1
        let p = Polynomial::binary();
        for d in 1..3 {
            let small = build_wtrees(&p, d, DEFAULT_TREE_CAP).unwrap();
            let big = build_wtrees(&p, d + 1, DEFAULT_TREE_CAP).unwrap();
            let ws = plump_order(&small, &p).unwrap();
            let wb = plump_order(&big, &p).unwrap();
            for (i, t) in small.iter().enumerate() {
                for (j, s) in small.iter().enumerate() {
                    let bi = big.binary_search(t).unwrap();
                    let bj = big.binary_search(s).unwrap();
                    assert_eq!(ws.base().leq(i, j), wb.base().leq(bi, bj));
                    assert_eq!(ws.prec_holds(i, j), wb.prec_holds(bi, bj));
                }
            }
        }
    }

    #[test]
    fn plump_poset_unary_chain_is_a_chain() {
        // depth d yields the d-element chain with its strict order
        for d in 1..=6usize {
            let refl = plump_poset(&Polynomial::unary_chain(), d, DEFAULT_TREE_CAP).unwrap();
            let q = refl.quotient();
            assert_eq!(q.len(), d);
            // total order, strict part = irreflexive comparability
            for i in 0..d {
                for j in 0..d {
                    assert!(q.leq(i, j) || q.leq(j, i));
                    assert_eq!(
                        refl.reflected_prec().contains(i, j),
                        q.leq(i, j) && i != j
                    );
                }
            }
            assert!(is_compatible_wf(&refl.as_wf_relation()).ok());
        }
    }

    #[test]
    fn plump_poset_depth_one_is_point() {
        let refl = plump_poset(&Polynomial::binary(), 1, DEFAULT_TREE_CAP).unwrap();
        assert_eq!(refl.quotient().len(), 1);
    }

    #[test]
    fn plump_poset_binary_depth3() {
        // rank collapses the five depth-<3 binary trees to a 3-chain;
        // the reflected structure passes all compatibility axioms
        let refl = plump_poset(&Polynomial::binary(), 3, DEFAULT_TREE_CAP).unwrap();
        assert_eq!(refl.quotient().len(), 3);
        assert!(is_compatible_wf(&refl.as_wf_relation()).ok());
    }
}
