//! Finite frames with marked bases: Heyting implication, the predecessor
//! operation, the propositional later modality, and the Löb induction check.
//!
//! A finite frame is exactly a finite distributive lattice; opens are stored
//! extensionally with meet/join tables. The later modality on subterminals is
//! `▷φ = ⋁{u | Pred(u) ≤ φ}` where `Pred` is the basis predecessor operation.

use std::fmt;

use thiserror::Error;

use crate::order::{is_compatible_wf, FinitePoset, FinitePreorder, Relation, WfRelation, WfReport};

/// Index of an open in a frame.
pub type OpenId = usize;

/// Largest supported frame; one machine word per relation row.
pub const MAX_OPENS: usize = 64;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("a frame needs at least one open")]
    Empty,
    #[error("frame has {0} opens, maximum is {MAX_OPENS}")]
    TooLarge(usize),
    #[error("opens are not partially ordered: {0}")]
    NotPartialOrder(String),
    #[error("opens {0} and {1} have no {2}")]
    NotALattice(OpenId, OpenId, &'static str),
    #[error("lattice is not distributive at ({0}, {1}, {2})")]
    NotDistributive(OpenId, OpenId, OpenId),
    #[error("basis open {0} listed twice")]
    DuplicateBasisOpen(OpenId),
    #[error("basis index out of range: {0}")]
    BasisOutOfRange(OpenId),
    #[error("open {0} is not the join of the basis opens below it")]
    BasisDoesNotCover(OpenId),
    #[error("basis_prec is not structurally compatible: {0}")]
    BadBasisPrec(String),
    #[error(transparent)]
    Order(#[from] crate::order::OrderError),
}

/// Finite distributive lattice of opens with explicit operation tables.
#[derive(Clone, Debug)]
pub struct FiniteFrame {
    names: Vec<String>,
    leq: Relation,
    meet: Vec<Vec<OpenId>>,
    join: Vec<Vec<OpenId>>,
    bottom: OpenId,
    top: OpenId,
}

impl FiniteFrame {
    /// Build a frame from a named partial order, deriving the meet and join
    /// tables and checking distributivity.
    pub fn new(names: Vec<String>, leq: Relation) -> Result<Self, FrameError> {
        let n = names.len();
        if n == 0 {
            return Err(FrameError::Empty);
        }
        if n > MAX_OPENS {
            return Err(FrameError::TooLarge(n));
        }
        if leq.len() != n {
            return Err(FrameError::NotPartialOrder(format!(
                "relation arity {} does not match {} opens",
                leq.len(),
                n
            )));
        }
        if let Some(u) = leq.reflexivity_witness() {
            return Err(FrameError::NotPartialOrder(format!("missing ({u}, {u})")));
        }
        if let Some((u, v, w)) = leq.transitivity_witness() {
            return Err(FrameError::NotPartialOrder(format!(
                "not transitive at ({u}, {v}, {w})"
            )));
        }
        if let Some((u, v)) = leq.antisymmetry_witness() {
            return Err(FrameError::NotPartialOrder(format!(
                "not antisymmetric at ({u}, {v})"
            )));
        }

        let columns: Vec<u64> = (0..n).map(|v| leq.column(v)).collect();
        let lub = |u: OpenId, v: OpenId| -> Option<OpenId> {
            let uppers = leq.row(u) & leq.row(v);
            let mut cand = uppers;
            while cand != 0 {
                let w = cand.trailing_zeros() as usize;
                cand &= cand - 1;
                if uppers & !leq.row(w) == 0 {
                    return Some(w);
                }
            }
            None
        };
        let glb = |u: OpenId, v: OpenId| -> Option<OpenId> {
            let lowers = columns[u] & columns[v];
            let mut cand = lowers;
            while cand != 0 {
                let w = cand.trailing_zeros() as usize;
                cand &= cand - 1;
                if lowers & !columns[w] == 0 {
                    return Some(w);
                }
            }
            None
        };

        let mut meet = vec![vec![0; n]; n];
        let mut join = vec![vec![0; n]; n];
        for u in 0..n {
            for v in 0..n {
                meet[u][v] = glb(u, v).ok_or(FrameError::NotALattice(u, v, "meet"))?;
                join[u][v] = lub(u, v).ok_or(FrameError::NotALattice(u, v, "join"))?;
            }
        }

        let bottom = (0..n)
            .find(|&b| (0..n).all(|u| leq.contains(b, u)))
            .ok_or(FrameError::NotALattice(0, 0, "bottom"))?;
        let top = (0..n)
            .find(|&t| (0..n).all(|u| leq.contains(u, t)))
            .ok_or(FrameError::NotALattice(0, 0, "top"))?;

        // binary distributivity suffices for finite lattices
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if meet[a][join[b][c]] != join[meet[a][b]][meet[a][c]] {
                        return Err(FrameError::NotDistributive(a, b, c));
                    }
                }
            }
        }

        Ok(FiniteFrame { names, leq, meet, join, bottom, top })
    }

    pub fn count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, u: OpenId) -> &str {
        &self.names[u]
    }

    pub fn leq(&self, u: OpenId, v: OpenId) -> bool {
        self.leq.contains(u, v)
    }

    pub fn meet(&self, u: OpenId, v: OpenId) -> OpenId {
        self.meet[u][v]
    }

    pub fn join(&self, u: OpenId, v: OpenId) -> OpenId {
        self.join[u][v]
    }

    /// Finitary join; the empty join is the bottom open.
    pub fn join_all(&self, opens: impl IntoIterator<Item = OpenId>) -> OpenId {
        opens.into_iter().fold(self.bottom, |acc, u| self.join(acc, u))
    }

    pub fn bottom(&self) -> OpenId {
        self.bottom
    }

    pub fn top(&self) -> OpenId {
        self.top
    }

    pub fn opens(&self) -> impl Iterator<Item = OpenId> {
        0..self.count()
    }
}

/// A frame with a marked basis carrying a candidate well-founded relation.
///
/// Construction checks that the basis generates the frame by joins and that
/// `basis_prec` is a transitive, left/right compatible subrelation of the
/// basis order. Well-foundedness of `basis_prec` is deliberately *not*
/// enforced: the Löb checker must be runnable on frames that violate it.
#[derive(Clone, Debug)]
pub struct BasedFrame {
    frame: FiniteFrame,
    basis: Vec<OpenId>,
    basis_prec: Relation,
}

impl BasedFrame {
    pub fn new(frame: FiniteFrame, basis: Vec<OpenId>, basis_prec: Relation) -> Result<Self, FrameError> {
        for (i, &k) in basis.iter().enumerate() {
            if k >= frame.count() {
                return Err(FrameError::BasisOutOfRange(k));
            }
            if basis[..i].contains(&k) {
                return Err(FrameError::DuplicateBasisOpen(k));
            }
        }
        if basis_prec.len() != basis.len() {
            return Err(FrameError::BadBasisPrec(format!(
                "arity {} does not match basis size {}",
                basis_prec.len(),
                basis.len()
            )));
        }
        for u in frame.opens() {
            let below = basis.iter().copied().filter(|&k| frame.leq(k, u));
            if frame.join_all(below) != u {
                return Err(FrameError::BasisDoesNotCover(u));
            }
        }
        let bf = BasedFrame { frame, basis, basis_prec };
        let wf = bf.basis_wf_relation();
        let report = is_compatible_wf(&wf);
        if report.not_subrelation.is_some()
            || report.not_transitive.is_some()
            || report.not_left_compatible.is_some()
            || report.not_right_compatible.is_some()
        {
            return Err(FrameError::BadBasisPrec(report.describe(wf.base().names())));
        }
        Ok(bf)
    }

    pub fn frame(&self) -> &FiniteFrame {
        &self.frame
    }

    pub fn basis(&self) -> &[OpenId] {
        &self.basis
    }

    pub fn basis_prec(&self) -> &Relation {
        &self.basis_prec
    }

    /// The basis as a preorder under the restricted frame order, paired with
    /// `basis_prec`.
    pub fn basis_wf_relation(&self) -> WfRelation {
        let names = self.basis.iter().map(|&k| self.frame.name(k).to_string()).collect();
        let mut leq = Relation::empty(self.basis.len()).expect("basis within carrier bound");
        for (i, &k) in self.basis.iter().enumerate() {
            for (j, &l) in self.basis.iter().enumerate() {
                if self.frame.leq(k, l) {
                    leq.insert(i, j);
                }
            }
        }
        let base = FinitePreorder::new(names, leq).expect("restriction of a partial order");
        WfRelation::new(base, self.basis_prec.clone()).expect("arity matches")
    }

    /// Full compatible-well-founded report for the basis relation.
    pub fn basis_wf(&self) -> WfReport {
        is_compatible_wf(&self.basis_wf_relation())
    }
}

/// Downset frame of a poset, with extra downset bookkeeping.
#[derive(Clone, Debug)]
pub struct DownsetFrame {
    pub based: BasedFrame,
    /// Element bitmask of each open.
    pub masks: Vec<u64>,
    /// Open id of the principal downset of each poset element.
    pub principal: Vec<OpenId>,
}

/// All downsets of a poset ordered by inclusion, with the principal downsets
/// as basis; `basis_prec` is inherited from `prec` on the poset.
pub fn downset_frame(p: &FinitePoset, prec: &Relation) -> Result<BasedFrame, FrameError> {
    Ok(downset_frame_full(p, prec)?.based)
}

/// As [`downset_frame`], also returning the mask and principal tables.
pub fn downset_frame_full(p: &FinitePoset, prec: &Relation) -> Result<DownsetFrame, FrameError> {
    let n = p.len();
    if prec.len() != n {
        return Err(FrameError::BadBasisPrec(format!(
            "prec arity {} does not match poset size {}",
            prec.len(),
            n
        )));
    }
    assert!(n <= 20, "downset enumeration over {n} elements");
    let full: u64 = if n == 0 { 0 } else { (1 << n) - 1 };
    let mut masks = Vec::new();
    for s in 0u64..=full {
        let down_closed = (0..n)
            .filter(|&u| s >> u & 1 == 1)
            .all(|u| p.leq_relation().column(u) & !s == 0);
        if down_closed {
            masks.push(s);
            if masks.len() > MAX_OPENS {
                return Err(FrameError::TooLarge(masks.len()));
            }
        }
    }

    let count = masks.len();
    let names = masks
        .iter()
        .map(|&m| {
            let elems: Vec<&str> =
                (0..n).filter(|&u| m >> u & 1 == 1).map(|u| p.name(u)).collect();
            format!("{{{}}}", elems.join(","))
        })
        .collect();
    let mut leq = Relation::empty(count)?;
    for (i, &a) in masks.iter().enumerate() {
        for (j, &b) in masks.iter().enumerate() {
            if a & !b == 0 {
                leq.insert(i, j);
            }
        }
    }
    let frame = FiniteFrame::new(names, leq)?;

    let open_of_mask = |m: u64| -> OpenId {
        masks.binary_search(&m).expect("downset mask present")
    };
    let principal: Vec<OpenId> =
        (0..n).map(|u| open_of_mask(p.leq_relation().column(u))).collect();
    let basis = principal.clone();
    let mut basis_prec = Relation::empty(n)?;
    for u in 0..n {
        for v in 0..n {
            if prec.contains(u, v) {
                basis_prec.insert(u, v);
            }
        }
    }
    let based = BasedFrame::new(frame, basis, basis_prec)?;
    Ok(DownsetFrame { based, masks, principal })
}

/// Heyting implication `u → v = ⋁{w | w ∧ u ≤ v}`.
pub fn heyting_implies(f: &FiniteFrame, u: OpenId, v: OpenId) -> OpenId {
    f.join_all(f.opens().filter(|&w| f.leq(f.meet(w, u), v)))
}

/// Predecessor of an open: the join of all basis opens lying strictly below
/// some basis open under `u`.
pub fn predecessor(bf: &BasedFrame, u: OpenId) -> OpenId {
    let f = bf.frame();
    let ks = bf.basis().iter().enumerate().filter_map(|(ki, &k)| {
        let witnessed = bf
            .basis()
            .iter()
            .enumerate()
            .any(|(li, &l)| f.leq(l, u) && bf.basis_prec().contains(ki, li));
        witnessed.then_some(k)
    });
    f.join_all(ks)
}

/// Propositional later modality: `▷φ = ⋁{u | Pred(u) ≤ φ}`.
pub fn later_prop(bf: &BasedFrame, phi: OpenId) -> OpenId {
    let f = bf.frame();
    f.join_all(f.opens().filter(|&u| f.leq(predecessor(bf, u), phi)))
}

/// Table of `▷φ` for every open, computing each predecessor once.
pub fn later_table(bf: &BasedFrame) -> Vec<OpenId> {
    let f = bf.frame();
    let pred: Vec<OpenId> = f.opens().map(|u| predecessor(bf, u)).collect();
    f.opens()
        .map(|phi| f.join_all(f.opens().filter(|&u| f.leq(pred[u], phi))))
        .collect()
}

/// Report for monotonicity, top preservation, and binary meet preservation
/// of the later modality.
#[derive(Clone, Debug)]
pub struct LexReport {
    /// Pair `(φ, ψ)` with `φ ≤ ψ` but `▷φ ≰ ▷ψ`.
    pub not_monotone: Option<(OpenId, OpenId)>,
    /// Set when `▷⊤ ≠ ⊤`.
    pub top_not_preserved: bool,
    /// Pair `(φ, ψ)` with `▷(φ∧ψ) ≠ ▷φ ∧ ▷ψ`.
    pub meet_not_preserved: Option<(OpenId, OpenId)>,
}

impl LexReport {
    pub fn ok(&self) -> bool {
        self.not_monotone.is_none() && !self.top_not_preserved && self.meet_not_preserved.is_none()
    }
}

/// Check that the later modality is monotone, preserves the top open, and
/// preserves binary meets, over all pairs of opens.
pub fn check_wellpointed_lex(bf: &BasedFrame) -> LexReport {
    let f = bf.frame();
    let later = later_table(bf);
    let mut not_monotone = None;
    let mut meet_not_preserved = None;
    'outer: for phi in f.opens() {
        for psi in f.opens() {
            if f.leq(phi, psi) && !f.leq(later[phi], later[psi]) {
                not_monotone = Some((phi, psi));
                break 'outer;
            }
        }
    }
    'meets: for phi in f.opens() {
        for psi in f.opens() {
            if later[f.meet(phi, psi)] != f.meet(later[phi], later[psi]) {
                meet_not_preserved = Some((phi, psi));
                break 'meets;
            }
        }
    }
    LexReport {
        not_monotone,
        top_not_preserved: later[f.top()] != f.top(),
        meet_not_preserved,
    }
}

/// Löb induction check: for every open `φ`, `(▷φ ⇒ φ) = ⊤` must force
/// `φ = ⊤`. Returns the first failing open in ascending order, or `None`
/// when the principle holds.
pub fn check_loeb(bf: &BasedFrame) -> Option<OpenId> {
    let f = bf.frame();
    let later = later_table(bf);
    f.opens().find(|&phi| heyting_implies(f, later[phi], phi) == f.top() && phi != f.top())
}

/// The one-basis-open frame with `u ≺ u`: the standard witness that the
/// well-foundedness hypothesis of the Löb theorem is not vacuous.
pub fn loop_frame() -> BasedFrame {
    let mut leq = Relation::identity(2).expect("two opens");
    leq.insert(0, 1);
    let frame = FiniteFrame::new(vec!["⊥".into(), "u".into()], leq).expect("chain of two opens");
    let mut prec = Relation::empty(1).expect("one basis open");
    prec.insert(0, 0);
    BasedFrame::new(frame, vec![1], prec).expect("loop frame is structurally valid")
}

impl fmt::Display for LexReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            write!(f, "monotone, ▷⊤=⊤, preserves binary meets")
        } else {
            write!(
                f,
                "not_monotone={:?} top_not_preserved={} meet_not_preserved={:?}",
                self.not_monotone, self.top_not_preserved, self.meet_not_preserved
            )
        }
    }
}
