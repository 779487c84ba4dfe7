//! Finite preorders and posets, compatible well-founded relations,
//! accessibility, connectedness, poset reflection, and global adequacy.
//!
//! Carriers are small (at most [`MAX_CARRIER`] elements); every relation is
//! stored extensionally as a bit matrix, so all checks are decidable by
//! exhaustive iteration.

use std::fmt;

use thiserror::Error;

/// Index of an element in a finite carrier.
pub type Elem = usize;

/// Largest supported carrier; one machine word per relation row.
pub const MAX_CARRIER: usize = 64;

#[derive(Debug, Error)]
pub enum OrderError {
    #[error("carrier has {0} elements, maximum is {MAX_CARRIER}")]
    CarrierTooLarge(usize),
    #[error("duplicate element name {0:?}")]
    DuplicateName(String),
    #[error("relation is not reflexive: missing ({0}, {0})")]
    NotReflexive(Elem),
    #[error("relation is not transitive: ({0},{1}) and ({1},{2}) but not ({0},{2})")]
    NotTransitive(Elem, Elem, Elem),
    #[error("relation is not antisymmetric: {0} and {1} are mutually related")]
    NotAntisymmetric(Elem, Elem),
    #[error("relation arity {got} does not match carrier size {want}")]
    ArityMismatch { got: usize, want: usize },
    #[error("relation is not a compatible well-founded relation: {0}")]
    NotCompatibleWf(String),
}

/// Binary relation on `{0, .., n-1}` as a dense bit matrix.
///
/// Bit `v` of `rows[u]` is set iff `(u, v)` is in the relation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    n: usize,
    rows: Vec<u64>,
}

impl Relation {
    pub fn empty(n: usize) -> Result<Self, OrderError> {
        if n > MAX_CARRIER {
            return Err(OrderError::CarrierTooLarge(n));
        }
        Ok(Relation { n, rows: vec![0; n] })
    }

    pub fn from_pairs(n: usize, pairs: &[(Elem, Elem)]) -> Result<Self, OrderError> {
        let mut r = Relation::empty(n)?;
        for &(u, v) in pairs {
            assert!(u < n && v < n, "pair ({u},{v}) out of range for carrier {n}");
            r.insert(u, v);
        }
        Ok(r)
    }

    pub fn identity(n: usize) -> Result<Self, OrderError> {
        let mut r = Relation::empty(n)?;
        for u in 0..n {
            r.insert(u, u);
        }
        Ok(r)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    pub fn contains(&self, u: Elem, v: Elem) -> bool {
        self.rows[u] >> v & 1 == 1
    }

    pub fn insert(&mut self, u: Elem, v: Elem) {
        self.rows[u] |= 1 << v;
    }

    /// Successors of `u` as a bitmask.
    pub fn row(&self, u: Elem) -> u64 {
        self.rows[u]
    }

    /// Predecessors of `v` as a bitmask.
    pub fn column(&self, v: Elem) -> u64 {
        let mut mask = 0;
        for u in 0..self.n {
            if self.contains(u, v) {
                mask |= 1 << u;
            }
        }
        mask
    }

    pub fn pairs(&self) -> Vec<(Elem, Elem)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in 0..self.n {
                if self.contains(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// First missing diagonal pair, if any.
    pub fn reflexivity_witness(&self) -> Option<Elem> {
        (0..self.n).find(|&u| !self.contains(u, u))
    }

    /// First failing triple `(u,v,w)` with `uRv`, `vRw` but not `uRw`.
    pub fn transitivity_witness(&self) -> Option<(Elem, Elem, Elem)> {
        for u in 0..self.n {
            for v in 0..self.n {
                if !self.contains(u, v) {
                    continue;
                }
                let missing = self.rows[v] & !self.rows[u];
                if missing != 0 {
                    let w = missing.trailing_zeros() as usize;
                    return Some((u, v, w));
                }
            }
        }
        None
    }

    /// First mutually related pair of distinct elements, if any.
    pub fn antisymmetry_witness(&self) -> Option<(Elem, Elem)> {
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.contains(u, v) && self.contains(v, u) {
                    return Some((u, v));
                }
            }
        }
        None
    }

    /// First pair of `self` missing from `other`, if any.
    pub fn subrelation_witness(&self, other: &Relation) -> Option<(Elem, Elem)> {
        assert_eq!(self.n, other.n);
        for u in 0..self.n {
            let extra = self.rows[u] & !other.rows[u];
            if extra != 0 {
                return Some((u, extra.trailing_zeros() as usize));
            }
        }
        None
    }

    /// Reflexive-transitive closure; reports whether any pair was added.
    pub fn reflexive_transitive_closure(&self) -> (Relation, bool) {
        let mut r = self.clone();
        for u in 0..r.n {
            r.insert(u, u);
        }
        // Floyd-Warshall on bit rows.
        loop {
            let mut changed = false;
            for u in 0..r.n {
                let mut acc = r.rows[u];
                let mut via = acc;
                while via != 0 {
                    let v = via.trailing_zeros() as usize;
                    via &= via - 1;
                    acc |= r.rows[v];
                }
                if acc != r.rows[u] {
                    r.rows[u] = acc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let grew = (0..self.n).any(|u| r.rows[u] & !self.rows[u] != 0);
        (r, grew)
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Relation{:?}", self.pairs())
    }
}

/// Finite preorder: named elements with a reflexive transitive relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePreorder {
    names: Vec<String>,
    leq: Relation,
}

impl FinitePreorder {
    pub fn new(names: Vec<String>, leq: Relation) -> Result<Self, OrderError> {
        if names.len() > MAX_CARRIER {
            return Err(OrderError::CarrierTooLarge(names.len()));
        }
        if leq.len() != names.len() {
            return Err(OrderError::ArityMismatch { got: leq.len(), want: names.len() });
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(OrderError::DuplicateName(name.clone()));
            }
        }
        if let Some(u) = leq.reflexivity_witness() {
            return Err(OrderError::NotReflexive(u));
        }
        if let Some((u, v, w)) = leq.transitivity_witness() {
            return Err(OrderError::NotTransitive(u, v, w));
        }
        Ok(FinitePreorder { names, leq })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, u: Elem) -> &str {
        &self.names[u]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<Elem> {
        self.names.iter().position(|n| n == name)
    }

    pub fn leq(&self, u: Elem, v: Elem) -> bool {
        self.leq.contains(u, v)
    }

    pub fn leq_relation(&self) -> &Relation {
        &self.leq
    }
}

/// Finite poset: an antisymmetric preorder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePoset {
    pre: FinitePreorder,
}

impl FinitePoset {
    pub fn new(pre: FinitePreorder) -> Result<Self, OrderError> {
        if let Some((u, v)) = pre.leq.antisymmetry_witness() {
            return Err(OrderError::NotAntisymmetric(u, v));
        }
        Ok(FinitePoset { pre })
    }

    pub fn from_leq(names: Vec<String>, leq: Relation) -> Result<Self, OrderError> {
        FinitePoset::new(FinitePreorder::new(names, leq)?)
    }

    /// The chain `0 < 1 < .. < n-1`.
    pub fn chain(n: usize) -> Self {
        let names = (0..n).map(|i| i.to_string()).collect();
        let mut leq = Relation::empty(n).expect("chain within carrier bound");
        for u in 0..n {
            for v in u..n {
                leq.insert(u, v);
            }
        }
        FinitePoset::from_leq(names, leq).expect("chain is a poset")
    }

    /// The discrete poset on `n` named points.
    pub fn antichain(n: usize) -> Self {
        let names = (0..n).map(|i| ((b'a' + (i % 26) as u8) as char).to_string() + if i >= 26 { "x" } else { "" }).collect();
        let leq = Relation::identity(n).expect("antichain within carrier bound");
        FinitePoset::from_leq(names, leq).expect("antichain is a poset")
    }

    pub fn as_preorder(&self) -> &FinitePreorder {
        &self.pre
    }

    pub fn len(&self) -> usize {
        self.pre.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pre.is_empty()
    }

    pub fn name(&self, u: Elem) -> &str {
        self.pre.name(u)
    }

    pub fn leq(&self, u: Elem, v: Elem) -> bool {
        self.pre.leq(u, v)
    }

    pub fn leq_relation(&self) -> &Relation {
        self.pre.leq_relation()
    }

    /// Strict part of the order as a bitmask relation.
    pub fn strict(&self) -> Relation {
        let n = self.len();
        let mut r = Relation::empty(n).expect("within bound");
        for u in 0..n {
            for v in 0..n {
                if u != v && self.leq(u, v) {
                    r.insert(u, v);
                }
            }
        }
        r
    }
}

/// A preorder together with a candidate compatible well-founded subrelation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WfRelation {
    base: FinitePreorder,
    prec: Relation,
}

impl WfRelation {
    pub fn new(base: FinitePreorder, prec: Relation) -> Result<Self, OrderError> {
        if prec.len() != base.len() {
            return Err(OrderError::ArityMismatch { got: prec.len(), want: base.len() });
        }
        Ok(WfRelation { base, prec })
    }

    pub fn base(&self) -> &FinitePreorder {
        &self.base
    }

    pub fn prec(&self) -> &Relation {
        &self.prec
    }

    pub fn prec_holds(&self, u: Elem, v: Elem) -> bool {
        self.prec.contains(u, v)
    }

    /// The base as a poset, if antisymmetric.
    pub fn poset(&self) -> Result<FinitePoset, OrderError> {
        FinitePoset::new(self.base.clone())
    }
}

/// Least fixed point of `S ↦ {u | ∀v. v R u ⇒ v ∈ S}` by Kleene iteration.
///
/// `R` is well-founded exactly when the result is the whole carrier.
pub fn accessible_set(r: &Relation) -> Vec<Elem> {
    let mask = accessible_mask(r);
    (0..r.len()).filter(|&u| mask >> u & 1 == 1).collect()
}

pub(crate) fn accessible_mask(r: &Relation) -> u64 {
    let n = r.len();
    let mut acc: u64 = 0;
    loop {
        let mut next: u64 = 0;
        for u in 0..n {
            if r.column(u) & !acc == 0 {
                next |= 1 << u;
            }
        }
        if next == acc {
            return acc;
        }
        acc = next;
    }
}

/// Validity report for the compatible well-founded relation axioms.
///
/// Each field is `None`/empty when the axiom holds, otherwise it carries the
/// first counterexample in ascending element order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WfReport {
    /// Pair in `prec` missing from `leq`.
    pub not_subrelation: Option<(Elem, Elem)>,
    /// Triple violating transitivity of `prec`.
    pub not_transitive: Option<(Elem, Elem, Elem)>,
    /// Triple `(u,v,w)` with `u ≤ v`, `v ≺ w` but not `u ≺ w`.
    pub not_left_compatible: Option<(Elem, Elem, Elem)>,
    /// Triple `(u,v,w)` with `u ≺ v`, `v ≤ w` but not `u ≺ w`.
    pub not_right_compatible: Option<(Elem, Elem, Elem)>,
    /// Elements outside the accessible set; nonempty means not well-founded.
    pub inaccessible: Vec<Elem>,
}

impl WfReport {
    pub fn ok(&self) -> bool {
        self.not_subrelation.is_none()
            && self.not_transitive.is_none()
            && self.not_left_compatible.is_none()
            && self.not_right_compatible.is_none()
            && self.inaccessible.is_empty()
    }

    pub fn describe(&self, names: &[String]) -> String {
        let nm = |u: Elem| names.get(u).cloned().unwrap_or_else(|| u.to_string());
        if let Some((u, v)) = self.not_subrelation {
            return format!("prec is not a subrelation of leq: {} ≺ {} but not {} ≤ {}", nm(u), nm(v), nm(u), nm(v));
        }
        if let Some((u, v, w)) = self.not_transitive {
            return format!("prec is not transitive at ({}, {}, {})", nm(u), nm(v), nm(w));
        }
        if let Some((u, v, w)) = self.not_left_compatible {
            return format!("left compatibility fails at ({}, {}, {})", nm(u), nm(v), nm(w));
        }
        if let Some((u, v, w)) = self.not_right_compatible {
            return format!("right compatibility fails at ({}, {}, {})", nm(u), nm(v), nm(w));
        }
        if !self.inaccessible.is_empty() {
            let elems: Vec<_> = self.inaccessible.iter().map(|&u| nm(u)).collect();
            return format!("prec is not well-founded: inaccessible elements {{{}}}", elems.join(", "));
        }
        "ok".to_string()
    }
}

/// Check all compatible well-founded relation axioms, with witnesses.
pub fn is_compatible_wf(w: &WfRelation) -> WfReport {
    let n = w.base.len();
    let leq = w.base.leq_relation();
    let prec = &w.prec;

    let not_subrelation = prec.subrelation_witness(leq);
    let not_transitive = prec.transitivity_witness();

    let mut not_left_compatible = None;
    'left: for u in 0..n {
        for v in 0..n {
            if !leq.contains(u, v) {
                continue;
            }
            // u ≤ v; every w with v ≺ w must satisfy u ≺ w.
            let missing = prec.row(v) & !prec.row(u);
            if missing != 0 {
                let t = missing.trailing_zeros() as usize;
                not_left_compatible = Some((u, v, t));
                break 'left;
            }
        }
    }

    let mut not_right_compatible = None;
    'right: for u in 0..n {
        for v in 0..n {
            if !prec.contains(u, v) {
                continue;
            }
            // u ≺ v; every w with v ≤ w must satisfy u ≺ w.
            let missing = leq.row(v) & !prec.row(u);
            if missing != 0 {
                let t = missing.trailing_zeros() as usize;
                not_right_compatible = Some((u, v, t));
                break 'right;
            }
        }
    }

    let acc = accessible_mask(prec);
    let inaccessible = (0..n).filter(|&u| acc >> u & 1 == 0).collect();

    WfReport { not_subrelation, not_transitive, not_left_compatible, not_right_compatible, inaccessible }
}

/// Poset reflection of a well-founded preorder: quotient by mutual `≤`,
/// with the strict relation transported along the quotient map.
#[derive(Clone, Debug)]
pub struct PosetReflection {
    quotient: FinitePoset,
    class_of: Vec<usize>,
    reflected_prec: Relation,
}

impl PosetReflection {
    pub fn quotient(&self) -> &FinitePoset {
        &self.quotient
    }

    /// Index of the quotient class of each source element.
    pub fn class_of(&self) -> &[usize] {
        &self.class_of
    }

    pub fn reflected_prec(&self) -> &Relation {
        &self.reflected_prec
    }

    pub fn as_wf_relation(&self) -> WfRelation {
        WfRelation::new(self.quotient.as_preorder().clone(), self.reflected_prec.clone())
            .expect("quotient arity matches")
    }
}

/// Quotient a well-founded preorder to its poset skeleton.
///
/// The reflected strict order is `[u] ≺ [v] ⟺ ∀x ∈ [u], y ∈ [v]. x ⊏ y`.
/// Rejects inputs whose strict relation fails [`is_compatible_wf`].
pub fn poset_reflection(w: &WfRelation) -> Result<PosetReflection, OrderError> {
    let report = is_compatible_wf(w);
    if !report.ok() {
        return Err(OrderError::NotCompatibleWf(report.describe(w.base.names())));
    }
    let n = w.base.len();
    let leq = w.base.leq_relation();

    // Mutual-≤ classes, represented by least member, in ascending order.
    let mut class_of = vec![usize::MAX; n];
    let mut reps: Vec<Elem> = Vec::new();
    for u in 0..n {
        if class_of[u] != usize::MAX {
            continue;
        }
        let class_id = reps.len();
        reps.push(u);
        class_of[u] = class_id;
        for v in u + 1..n {
            if leq.contains(u, v) && leq.contains(v, u) {
                class_of[v] = class_id;
            }
        }
    }

    let m = reps.len();
    let mut qleq = Relation::empty(m)?;
    for (i, &ri) in reps.iter().enumerate() {
        for (j, &rj) in reps.iter().enumerate() {
            if leq.contains(ri, rj) {
                qleq.insert(i, j);
            }
        }
    }

    // [u] ≺ [v] iff every member of [u] is strictly below every member of [v].
    let mut members: Vec<Vec<Elem>> = vec![Vec::new(); m];
    for u in 0..n {
        members[class_of[u]].push(u);
    }
    let mut qprec = Relation::empty(m)?;
    for i in 0..m {
        for j in 0..m {
            let all = members[i]
                .iter()
                .all(|&x| members[j].iter().all(|&y| w.prec.contains(x, y)));
            if all {
                qprec.insert(i, j);
            }
        }
    }

    let names = reps.iter().map(|&r| w.base.name(r).to_string()).collect();
    let quotient = FinitePoset::from_leq(names, qleq)?;
    Ok(PosetReflection { quotient, class_of, reflected_prec: qprec })
}

/// Connectedness of the comparability graph; the empty poset counts as
/// connected (vacuous reading of the pairwise definition).
pub fn is_connected(p: &FinitePoset) -> bool {
    let n = p.len();
    if n == 0 {
        return true;
    }
    connected_in_mask(p, (1u64 << n) - 1)
}

/// Connectedness of the subposet induced by `mask`; empty masks count as
/// connected.
pub(crate) fn connected_in_mask(p: &FinitePoset, mask: u64) -> bool {
    component_count(p, mask) <= 1
}

/// Connected components of the subposet induced by `mask`; returns
/// `component id` per element (usize::MAX off-mask) and the count.
pub(crate) fn components_in_mask(p: &FinitePoset, mask: u64) -> (Vec<usize>, usize) {
    let n = p.len();
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if mask >> start & 1 == 0 || comp[start] != usize::MAX {
            continue;
        }
        let id = count;
        count += 1;
        let mut stack = vec![start];
        comp[start] = id;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if mask >> v & 1 == 1
                    && comp[v] == usize::MAX
                    && (p.leq(u, v) || p.leq(v, u))
                {
                    comp[v] = id;
                    stack.push(v);
                }
            }
        }
    }
    (comp, count)
}

pub(crate) fn component_count(p: &FinitePoset, mask: u64) -> usize {
    components_in_mask(p, mask).1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_wf(n: usize) -> WfRelation {
        let p = FinitePoset::chain(n);
        let prec = p.strict();
        WfRelation::new(p.as_preorder().clone(), prec).unwrap()
    }

    /// Independent oracle: least prefixed point over all subsets of the carrier.
    fn accessible_oracle(r: &Relation) -> u64 {
        let n = r.len();
        assert!(n <= 16, "oracle is exponential");
        let mut least: Option<u64> = None;
        for s in 0u64..1 << n {
            // prefixed point: step(s) ⊆ s
            let mut step = 0u64;
            for u in 0..n {
                if r.column(u) & !s == 0 {
                    step |= 1 << u;
                }
            }
            if step & !s == 0 {
                least = Some(match least {
                    None => s,
                    Some(l) => l & s,
                });
            }
        }
        least.unwrap_or(0)
    }

    #[test]
    fn accessible_set_chain() {
        // P={0,1,2} with the strict chain order: everything accessible.
        let p = FinitePoset::chain(3);
        let r = p.strict();
        assert_eq!(accessible_set(&r), vec![0, 1, 2]);
        assert_eq!(accessible_mask(&r), accessible_oracle(&r));
    }

    #[test]
    fn accessible_set_self_loop() {
        let r = Relation::from_pairs(1, &[(0, 0)]).unwrap();
        assert_eq!(accessible_set(&r), Vec::<usize>::new());
        assert_eq!(accessible_mask(&r), accessible_oracle(&r));
    }

    #[test]
    fn accessible_set_empty_relation() {
        let r = Relation::empty(2).unwrap();
        assert_eq!(accessible_set(&r), vec![0, 1]);
    }

    #[test]
    fn accessible_set_is_least_fixed_point_small() {
        // Exhaustive over all relations on carriers of size <= 3, plus spot
        // checks on size 4: the computed set is a fixed point of the step
        // operator and contained in every prefixed point.
        for n in 0..=3usize {
            let cells = n * n;
            for bits in 0u64..1 << cells {
                let mut r = Relation::empty(n).unwrap();
                for c in 0..cells {
                    if bits >> c & 1 == 1 {
                        r.insert(c / n.max(1), c % n.max(1));
                    }
                }
                let acc = accessible_mask(&r);
                // one more step leaves it unchanged
                let mut step = 0u64;
                for u in 0..n {
                    if r.column(u) & !acc == 0 {
                        step |= 1 << u;
                    }
                }
                assert_eq!(step, acc);
                assert_eq!(acc, accessible_oracle(&r));
            }
        }
    }

    #[test]
    fn accessible_set_contained_in_all_prefixed_points_size5() {
        // sampled relations on 5 points: the accessible set is a fixed point
        // and lies inside every prefixed point found by subset enumeration
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..200 {
            let mut r = Relation::empty(5).unwrap();
            let bits = next();
            for c in 0..25 {
                if bits >> c & 1 == 1 {
                    r.insert(c / 5, c % 5);
                }
            }
            let acc = accessible_mask(&r);
            for s in 0u64..1 << 5 {
                let mut step = 0u64;
                for u in 0..5 {
                    if r.column(u) & !s == 0 {
                        step |= 1 << u;
                    }
                }
                if step & !s == 0 {
                    assert_eq!(acc & !s, 0, "accessible set exceeds a prefixed point");
                }
            }
        }
    }

    #[test]
    fn compatible_wf_chain_passes() {
        let report = is_compatible_wf(&chain_wf(5));
        assert!(report.ok(), "{}", report.describe(&[]));
    }

    #[test]
    fn compatible_wf_reflexive_prec_fails_wf() {
        // chain {0≤1} with ≺ = ≤: reflexivity puts 0 outside the accessible set
        let p = FinitePoset::chain(2);
        let w = WfRelation::new(p.as_preorder().clone(), p.leq_relation().clone()).unwrap();
        let report = is_compatible_wf(&w);
        assert!(!report.ok());
        assert!(report.not_subrelation.is_none());
        assert!(report.not_transitive.is_none());
        assert!(report.not_left_compatible.is_none());
        assert!(report.not_right_compatible.is_none());
        assert!(report.inaccessible.contains(&0));
    }

    #[test]
    fn compatible_wf_left_compat_witness() {
        // ≺ = {(1,2)} on the chain 0≤1≤2: 0≤1, 1≺2, 0⊀2.
        let p = FinitePoset::chain(3);
        let prec = Relation::from_pairs(3, &[(1, 2)]).unwrap();
        let w = WfRelation::new(p.as_preorder().clone(), prec).unwrap();
        let report = is_compatible_wf(&w);
        assert_eq!(report.not_left_compatible, Some((0, 1, 2)));
    }

    #[test]
    fn poset_reflection_identity_on_posets() {
        let w = chain_wf(4);
        let refl = poset_reflection(&w).unwrap();
        assert_eq!(refl.quotient().len(), 4);
        assert_eq!(refl.class_of(), &[0, 1, 2, 3]);
        assert!(is_compatible_wf(&refl.as_wf_relation()).ok());
    }

    #[test]
    fn poset_reflection_collapses_mutual_pairs() {
        // {a,b} with a≤b≤a and ⊏=∅ collapses to a point.
        let mut leq = Relation::identity(2).unwrap();
        leq.insert(0, 1);
        leq.insert(1, 0);
        let pre = FinitePreorder::new(vec!["a".into(), "b".into()], leq).unwrap();
        let w = WfRelation::new(pre, Relation::empty(2).unwrap()).unwrap();
        let refl = poset_reflection(&w).unwrap();
        assert_eq!(refl.quotient().len(), 1);
        assert_eq!(refl.class_of(), &[0, 0]);
        assert!(is_compatible_wf(&refl.as_wf_relation()).ok());
    }

    #[test]
    fn poset_reflection_rejects_bad_prec() {
        let p = FinitePoset::chain(2);
        let w = WfRelation::new(p.as_preorder().clone(), p.leq_relation().clone()).unwrap();
        assert!(poset_reflection(&w).is_err());
    }

    #[test]
    fn reflection_roundtrip_on_all_small_preorders() {
        // every compatible well-founded relation on every labeled preorder
        // with <= 3 elements reflects to a structure passing the axioms again
        let n = 3usize;
        let cells = n * n;
        let mut preorders = 0usize;
        for bits in 0u64..1 << cells {
            let mut r = Relation::empty(n).unwrap();
            for c in 0..cells {
                if bits >> c & 1 == 1 {
                    r.insert(c / n, c % n);
                }
            }
            if r.reflexivity_witness().is_some() || r.transitivity_witness().is_some() {
                continue;
            }
            preorders += 1;
            let pre = FinitePreorder::new((0..n).map(|i| i.to_string()).collect(), r.clone()).unwrap();
            let strict: Vec<(Elem, Elem)> =
                r.pairs().into_iter().filter(|&(u, v)| u != v).collect();
            for mask in 0u64..1 << strict.len() {
                let mut prec = Relation::empty(n).unwrap();
                for (i, &(u, v)) in strict.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        prec.insert(u, v);
                    }
                }
                let w = WfRelation::new(pre.clone(), prec).unwrap();
                if !is_compatible_wf(&w).ok() {
                    assert!(poset_reflection(&w).is_err());
                    continue;
                }
                let refl = poset_reflection(&w).unwrap();
                let report = is_compatible_wf(&refl.as_wf_relation());
                assert!(report.ok(), "{}", report.describe(refl.quotient().as_preorder().names()));
                // the map is monotone and identifies exactly the mutual pairs
                for u in 0..n {
                    for v in 0..n {
                        if pre.leq(u, v) {
                            assert!(refl.quotient().leq(refl.class_of()[u], refl.class_of()[v]));
                        }
                        let same = refl.class_of()[u] == refl.class_of()[v];
                        assert_eq!(same, pre.leq(u, v) && pre.leq(v, u));
                    }
                }
            }
        }
        assert_eq!(preorders, 29, "labeled preorders on 3 elements");
    }

    #[test]
    fn connected_examples() {
        assert!(is_connected(&FinitePoset::chain(4)));
        assert!(is_connected(&FinitePoset::chain(0)));
        assert!(!is_connected(&FinitePoset::antichain(2)));
        // "V" poset a ≥ c ≤ b
        let mut leq = Relation::identity(3).unwrap();
        leq.insert(2, 0);
        leq.insert(2, 1);
        let v = FinitePoset::from_leq(vec!["a".into(), "b".into(), "c".into()], leq).unwrap();
        assert!(is_connected(&v));
    }

    #[test]
    fn connected_agrees_with_component_oracle() {
        // all posets up to 6 elements
        for n in 0..=6usize {
            for leq in crate::enumerate::enumerate_posets(n) {
                let p = FinitePoset::from_leq((0..n).map(|i| i.to_string()).collect(), leq).unwrap();
                let mask = if n == 0 { 0 } else { (1u64 << n) - 1 };
                let (_, count) = components_in_mask(&p, mask);
                assert_eq!(is_connected(&p), count <= 1);
            }
        }
    }

    #[test]
    fn closure_reports_additions() {
        let r = Relation::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        let (closed, grew) = r.reflexive_transitive_closure();
        assert!(grew);
        assert!(closed.contains(0, 2));
        assert!(closed.contains(0, 0));
        let (_, grew_again) = closed.reflexive_transitive_closure();
        assert!(!grew_again);
    }
}
