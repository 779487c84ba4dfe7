//! Propositional geometric theories, the filter theory of a poset, the bag
//! and inhabited-bag transformations, and exhaustive finite model
//! enumeration.
//!
//! Assignments are bitmasks over the symbol list; a sequent `φ ⊢ ψ` holds in
//! an assignment when `φ` true forces `ψ` true. Bag models are families of
//! models indexed by a finite set, counted both with labeled indices and up
//! to index bijection.

use std::fmt;

use thiserror::Error;

use crate::order::FinitePoset;

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("theory has {0} symbols, maximum is 64")]
    TooManySymbols(usize),
    #[error("formula references symbol index {0} outside the theory")]
    UnknownSymbol(usize),
    #[error("duplicate symbol name {0:?}")]
    DuplicateSymbol(String),
    #[error("poset is not a total order: {0} and {1} are incomparable")]
    NotTotal(String, String),
    #[error("poset has no top element")]
    NoTop,
    #[error("poset lacks a meet of {0} and {1}")]
    NoMeet(String, String),
}

/// Positive propositional formula: symbols, finite conjunction, finite
/// disjunction, truth. The empty disjunction is falsity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Formula {
    Top,
    Sym(usize),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn eval(&self, assignment: u64) -> bool {
        match self {
            Formula::Top => true,
            Formula::Sym(i) => assignment >> i & 1 == 1,
            Formula::And(fs) => fs.iter().all(|f| f.eval(assignment)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(assignment)),
        }
    }

    fn max_symbol(&self) -> Option<usize> {
        match self {
            Formula::Top => None,
            Formula::Sym(i) => Some(*i),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().filter_map(|f| f.max_symbol()).max(),
        }
    }

    pub fn render(&self, symbols: &[String]) -> String {
        match self {
            Formula::Top => "⊤".to_string(),
            Formula::Sym(i) => symbols[*i].clone(),
            Formula::And(fs) if fs.is_empty() => "⊤".to_string(),
            Formula::And(fs) => {
                let parts: Vec<String> = fs.iter().map(|f| f.render(symbols)).collect();
                format!("({})", parts.join(" ∧ "))
            }
            Formula::Or(fs) if fs.is_empty() => "⊥".to_string(),
            Formula::Or(fs) => {
                let parts: Vec<String> = fs.iter().map(|f| f.render(symbols)).collect();
                format!("({})", parts.join(" ∨ "))
            }
        }
    }
}

/// A sequent `lhs ⊢ rhs` between positive formulas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sequent {
    pub lhs: Formula,
    pub rhs: Formula,
}

impl Sequent {
    pub fn holds(&self, assignment: u64) -> bool {
        !self.lhs.eval(assignment) || self.rhs.eval(assignment)
    }
}

/// A propositional geometric theory: named proposition symbols and sequents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeometricTheory {
    symbols: Vec<String>,
    sequents: Vec<Sequent>,
}

impl GeometricTheory {
    pub fn new(symbols: Vec<String>, sequents: Vec<Sequent>) -> Result<Self, TheoryError> {
        if symbols.len() > 64 {
            return Err(TheoryError::TooManySymbols(symbols.len()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(TheoryError::DuplicateSymbol(s.clone()));
            }
        }
        for sq in &sequents {
            for f in [&sq.lhs, &sq.rhs] {
                if let Some(m) = f.max_symbol() {
                    if m >= symbols.len() {
                        return Err(TheoryError::UnknownSymbol(m));
                    }
                }
            }
        }
        Ok(GeometricTheory { symbols, sequents })
    }

    /// The empty theory: no symbols, no sequents.
    pub fn empty() -> Self {
        GeometricTheory { symbols: Vec::new(), sequents: Vec::new() }
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn sequents(&self) -> &[Sequent] {
        &self.sequents
    }

    pub fn satisfies(&self, assignment: u64) -> bool {
        self.sequents.iter().all(|s| s.holds(assignment))
    }

    /// Rename symbols along a bijection `old index ↦ new name`, keeping the
    /// sequents; used to probe naturality of the bag transformation.
    pub fn rename_symbols(&self, names: Vec<String>) -> Result<Self, TheoryError> {
        assert_eq!(names.len(), self.symbols.len());
        GeometricTheory::new(names, self.sequents.clone())
    }
}

/// All boolean models of the theory, as assignment bitmasks in ascending
/// order.
pub fn enumerate_models(t: &GeometricTheory) -> Vec<u64> {
    let n = t.symbols().len();
    let total: u128 = 1u128 << n;
    (0..total).map(|a| a as u64).filter(|&a| t.satisfies(a)).collect()
}

/// The geometric theory of filters on a poset: one symbol per element,
/// order sequents, totality of the disjunction of all symbols, and
/// downward directedness.
pub fn filt_theory(p: &FinitePoset) -> GeometricTheory {
    let n = p.len();
    let symbols: Vec<String> = (0..n).map(|u| format!("<{}>", p.name(u))).collect();
    let mut sequents = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if p.leq(u, v) {
                sequents.push(Sequent { lhs: Formula::Sym(u), rhs: Formula::Sym(v) });
            }
        }
    }
    sequents.push(Sequent {
        lhs: Formula::Top,
        rhs: Formula::Or((0..n).map(Formula::Sym).collect()),
    });
    for u in 0..n {
        for v in 0..n {
            let lowers: Vec<Formula> = (0..n)
                .filter(|&w| p.leq(w, u) && p.leq(w, v))
                .map(Formula::Sym)
                .collect();
            sequents.push(Sequent {
                lhs: Formula::And(vec![Formula::Sym(u), Formula::Sym(v)]),
                rhs: Formula::Or(lowers),
            });
        }
    }
    GeometricTheory::new(symbols, sequents).expect("filter theory is well-formed")
}

/// The simplified presentation available on total orders, where downward
/// directedness is derivable and dropped.
pub fn chain_simplify(p: &FinitePoset) -> Result<GeometricTheory, TheoryError> {
    let n = p.len();
    for u in 0..n {
        for v in 0..n {
            if !p.leq(u, v) && !p.leq(v, u) {
                return Err(TheoryError::NotTotal(p.name(u).to_string(), p.name(v).to_string()));
            }
        }
    }
    let symbols: Vec<String> = (0..n).map(|u| format!("<{}>", p.name(u))).collect();
    let mut sequents = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if p.leq(u, v) {
                sequents.push(Sequent { lhs: Formula::Sym(u), rhs: Formula::Sym(v) });
            }
        }
    }
    sequents.push(Sequent {
        lhs: Formula::Top,
        rhs: Formula::Or((0..n).map(Formula::Sym).collect()),
    });
    GeometricTheory::new(symbols, sequents)
}

/// The cartesian presentation available when the poset has binary meets and
/// a top element: directedness and totality are replaced by `⊤ ⊢ <top>` and
/// meet sequents.
pub fn cartesian_simplify(p: &FinitePoset) -> Result<GeometricTheory, TheoryError> {
    let n = p.len();
    let top = (0..n)
        .find(|&t| (0..n).all(|u| p.leq(u, t)))
        .ok_or(TheoryError::NoTop)?;
    let mut meet = vec![vec![0usize; n]; n];
    for u in 0..n {
        for v in 0..n {
            let lowers: Vec<usize> = (0..n).filter(|&w| p.leq(w, u) && p.leq(w, v)).collect();
            meet[u][v] = lowers
                .iter()
                .copied()
                .find(|&w| lowers.iter().all(|&x| p.leq(x, w)))
                .ok_or_else(|| TheoryError::NoMeet(p.name(u).to_string(), p.name(v).to_string()))?;
        }
    }
    let symbols: Vec<String> = (0..n).map(|u| format!("<{}>", p.name(u))).collect();
    let mut sequents = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if p.leq(u, v) {
                sequents.push(Sequent { lhs: Formula::Sym(u), rhs: Formula::Sym(v) });
            }
        }
    }
    sequents.push(Sequent { lhs: Formula::Top, rhs: Formula::Sym(top) });
    for u in 0..n {
        for v in 0..n {
            sequents.push(Sequent {
                lhs: Formula::And(vec![Formula::Sym(u), Formula::Sym(v)]),
                rhs: Formula::Sym(meet[u][v]),
            });
        }
    }
    GeometricTheory::new(symbols, sequents)
}

/// Independent oracle for the filter theory's models: every nonempty,
/// upward-closed, downward-directed subset, by direct subset enumeration.
pub fn filters_oracle(p: &FinitePoset) -> Vec<u64> {
    let n = p.len();
    let total: u128 = 1u128 << n;
    let mut out = Vec::new();
    for s128 in 1..total {
        let s = s128 as u64;
        let up_closed = (0..n)
            .filter(|&u| s >> u & 1 == 1)
            .all(|u| p.leq_relation().row(u) & !s == 0);
        if !up_closed {
            continue;
        }
        let directed = (0..n).filter(|&u| s >> u & 1 == 1).all(|u| {
            (0..n)
                .filter(|&v| s >> v & 1 == 1)
                .all(|v| (0..n).any(|w| s >> w & 1 == 1 && p.leq(w, u) && p.leq(w, v)))
        });
        if directed {
            out.push(s);
        }
    }
    out
}

/// The bag transformation of a propositional theory: one index sort, each
/// symbol becomes an indexed predicate, each sequent an indexed sequent.
/// The `inhabited` flag adds the inhabitation axiom on the index sort.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BagTheory {
    base: GeometricTheory,
    inhabited: bool,
}

impl BagTheory {
    pub fn base(&self) -> &GeometricTheory {
        &self.base
    }

    pub fn inhabited(&self) -> bool {
        self.inhabited
    }

    /// Pretty-print the indexed presentation.
    pub fn render(&self) -> String {
        let mut out = String::from("sort K\n");
        if self.inhabited {
            out.push_str("axiom ⊢ ∃k:K. ⊤\n");
        }
        for s in self.base.symbols() {
            out.push_str(&format!("predicate k:K | {s}[k]\n"));
        }
        for sq in self.base.sequents() {
            out.push_str(&format!(
                "axiom k:K | {}[k] ⊢ {}[k]\n",
                sq.lhs.render(self.base.symbols()),
                sq.rhs.render(self.base.symbols())
            ));
        }
        out
    }
}

/// Families of models of the base theory, indexed by `{0, .., k-1}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BagModel {
    pub family: Vec<u64>,
}

pub fn bag_theory(t: &GeometricTheory) -> BagTheory {
    BagTheory { base: t.clone(), inhabited: false }
}

pub fn ibag_theory(t: &GeometricTheory) -> BagTheory {
    BagTheory { base: t.clone(), inhabited: true }
}

/// All bag models with index sets of size at most `max_index`: one model of
/// the base theory per index. The empty index set is excluded for inhabited
/// bag theories.
pub fn enumerate_bag_models(b: &BagTheory, max_index: usize) -> Vec<BagModel> {
    let models = enumerate_models(b.base());
    let mut out = Vec::new();
    for k in 0..=max_index {
        if k == 0 && b.inhabited() {
            continue;
        }
        let mut families: Vec<Vec<u64>> = vec![Vec::new()];
        for _ in 0..k {
            let mut grown = Vec::new();
            for fam in &families {
                for &m in &models {
                    let mut f2 = fam.clone();
                    f2.push(m);
                    grown.push(f2);
                }
            }
            families = grown;
        }
        out.extend(families.into_iter().map(|family| BagModel { family }));
    }
    out
}

/// Model counts for a bag theory: labeled families and families up to a
/// bijection of the index set, per index size and in total.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BagCounts {
    pub per_index_size: Vec<(usize, u128, u128)>,
    pub raw: u128,
    pub up_to_iso: u128,
}

pub fn bag_model_counts(b: &BagTheory, max_index: usize) -> BagCounts {
    let m = enumerate_models(b.base()).len() as u128;
    let mut per = Vec::new();
    let mut raw = 0u128;
    let mut iso = 0u128;
    for k in 0..=max_index {
        if k == 0 && b.inhabited() {
            continue;
        }
        let labeled = m.pow(k as u32);
        // multisets of size k over m models: C(m + k - 1, k)
        let multi = binomial(m + k as u128 - 1, k as u128);
        per.push((k, labeled, multi));
        raw += labeled;
        iso += multi;
    }
    BagCounts { per_index_size: per, raw, up_to_iso: iso }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

impl fmt::Display for GeometricTheory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "symbols: {}", self.symbols.join(", "))?;
        for s in &self.sequents {
            writeln!(f, "  {} ⊢ {}", s.lhs.render(&self.symbols), s.rhs.render(&self.symbols))?;
        }
        Ok(())
    }
}
