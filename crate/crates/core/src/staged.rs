//! The topos of trees as demand-driven stage-indexed sets: later, next,
//! guarded fixed points, guarded streams, and exhaustive uniqueness checking.
//!
//! A staged set assigns a finite set to every stage `n` together with a
//! restriction map from stage `n+1` down to stage `n`; elements are indices
//! below the stage cardinality. Stages are computed on demand and memoized
//! behind a lock, so values are freely shareable across threads.

use std::sync::{Arc, Mutex};

use thiserror::Error;

/// Element of a finite stage set.
pub type El = usize;

/// Default cap on per-stage cardinality for exhaustive searches.
pub const DEFAULT_STAGE_CAP: usize = 200_000;

#[derive(Debug, Error)]
pub enum StagedError {
    #[error("stage {stage} has {card} elements, over the cap {cap}")]
    StageTooLarge { stage: usize, card: usize, cap: usize },
}

/// Naturality failure of a stage-indexed map.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("naturality fails at stage {stage}, element {element}: source route gives {via_source}, target route gives {via_target}")]
pub struct NaturalityViolation {
    pub stage: usize,
    pub element: El,
    pub via_source: El,
    pub via_target: El,
}

struct StagedInner {
    card: Box<dyn Fn(usize) -> usize + Send + Sync>,
    restrict: Box<dyn Fn(usize, El) -> El + Send + Sync>,
    cards: Mutex<Vec<Option<usize>>>,
}

/// A stage-indexed family of finite sets with restriction maps.
#[derive(Clone)]
pub struct StagedSet {
    inner: Arc<StagedInner>,
}

impl StagedSet {
    pub fn new(
        card: impl Fn(usize) -> usize + Send + Sync + 'static,
        restrict: impl Fn(usize, El) -> El + Send + Sync + 'static,
    ) -> Self {
        StagedSet {
            inner: Arc::new(StagedInner {
                card: Box::new(card),
                restrict: Box::new(restrict),
                cards: Mutex::new(Vec::new()),
            }),
        }
    }

    /// Cardinality of the stage-`n` set (memoized).
    pub fn card(&self, n: usize) -> usize {
        {
            let cards = self.inner.cards.lock().unwrap();
            if let Some(Some(c)) = cards.get(n) {
                return *c;
            }
        }
        let c = (self.inner.card)(n);
        let mut cards = self.inner.cards.lock().unwrap();
        if cards.len() <= n {
            cards.resize(n + 1, None);
        }
        cards[n] = Some(c);
        c
    }

    /// Restriction of a stage-`n+1` element down to stage `n`.
    pub fn restrict(&self, n: usize, x: El) -> El {
        assert!(x < self.card(n + 1), "element {x} out of range at stage {}", n + 1);
        let y = (self.inner.restrict)(n, x);
        assert!(y < self.card(n), "restriction produced {y} out of range at stage {n}");
        y
    }

    /// The terminal staged set: a point at every stage.
    pub fn terminal() -> Self {
        StagedSet::new(|_| 1, |_, _| 0)
    }

    /// Constant staged set with identity restrictions.
    pub fn constant(size: usize) -> Self {
        StagedSet::new(move |_| size, |_, x| x)
    }

    /// Staged set given by explicit tables, stationary beyond them: stages
    /// past the last table entry repeat it with identity restrictions.
    /// `restricts[n]` maps stage-`n+1` elements to stage-`n` elements.
    pub fn from_tables(cards: Vec<usize>, restricts: Vec<Vec<El>>) -> Self {
        assert!(!cards.is_empty());
        assert_eq!(restricts.len() + 1, cards.len());
        for (n, r) in restricts.iter().enumerate() {
            assert_eq!(r.len(), cards[n + 1]);
            assert!(r.iter().all(|&y| y < cards[n]));
        }
        let cards2 = cards.clone();
        StagedSet::new(
            move |n| cards[n.min(cards.len() - 1)],
            move |n, x| {
                if n + 1 < cards2.len() {
                    restricts[n][x]
                } else {
                    x
                }
            },
        )
    }
}

impl std::fmt::Debug for StagedSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "StagedSet(card0={})", self.card(0))
    }
}

/// Later modality: `(▷X)(0) = 1` and `(▷X)(n+1) = X(n)`, restrictions
/// shifted down by one.
pub fn later(x: &StagedSet) -> StagedSet {
    let xc = x.clone();
    let xr = x.clone();
    StagedSet::new(
        move |n| if n == 0 { 1 } else { xc.card(n - 1) },
        move |n, e| if n == 0 { 0 } else { xr.restrict(n - 1, e) },
    )
}

struct MapInner {
    source: StagedSet,
    target: StagedSet,
    comp: Box<dyn Fn(usize, El) -> El + Send + Sync>,
    verified_below: Mutex<usize>,
}

/// A stage-indexed map between staged sets.
///
/// Every demanded component is spot-checked against the naturality square at
/// its own element, and a violation panics rather than producing garbage
/// downstream; [`StagedMap::verify_natural`] runs the exhaustive per-stage
/// check for bounded tests.
#[derive(Clone)]
pub struct StagedMap {
    inner: Arc<MapInner>,
}

impl StagedMap {
    pub fn new(
        source: StagedSet,
        target: StagedSet,
        comp: impl Fn(usize, El) -> El + Send + Sync + 'static,
    ) -> Self {
        StagedMap {
            inner: Arc::new(MapInner {
                source,
                target,
                comp: Box::new(comp),
                verified_below: Mutex::new(0),
            }),
        }
    }

    pub fn source(&self) -> &StagedSet {
        &self.inner.source
    }

    pub fn target(&self) -> &StagedSet {
        &self.inner.target
    }

    fn raw(&self, n: usize, x: El) -> El {
        assert!(x < self.inner.source.card(n), "element {x} out of range at stage {n}");
        let y = (self.inner.comp)(n, x);
        assert!(y < self.inner.target.card(n), "component produced {y} out of range at stage {n}");
        y
    }

    fn square_at(&self, n: usize, x: El) -> Result<(), NaturalityViolation> {
        let via_source = self.raw(n, self.inner.source.restrict(n, x));
        let via_target = self.inner.target.restrict(n, self.raw(n + 1, x));
        if via_source == via_target {
            Ok(())
        } else {
            Err(NaturalityViolation { stage: n, element: x, via_source, via_target })
        }
    }

    /// Exhaustively check the naturality squares for stages `< upto`.
    pub fn verify_natural(&self, upto: usize) -> Result<(), NaturalityViolation> {
        let mut done = self.inner.verified_below.lock().unwrap();
        while *done < upto {
            let n = *done;
            for x in 0..self.inner.source.card(n + 1) {
                self.square_at(n, x)?;
            }
            *done = n + 1;
        }
        Ok(())
    }

    /// Component at stage `n`, spot-checking the naturality square at this
    /// element.
    pub fn component(&self, n: usize, x: El) -> El {
        if n > 0 {
            if let Err(v) = self.square_at(n - 1, x) {
                panic!("{v}");
            }
        }
        self.raw(n, x)
    }
}

/// The natural transformation `next: X → ▷X`: the unique map at stage 0 and
/// the restriction of `X` at every later stage.
pub fn next(x: &StagedSet) -> StagedMap {
    let xc = x.clone();
    StagedMap::new(x.clone(), later(x), move |n, e| {
        if n == 0 {
            0
        } else {
            xc.restrict(n - 1, e)
        }
    })
}

/// Functorial action of later on maps: `▷f` where `f: X → Y`.
pub fn later_map(f: &StagedMap) -> StagedMap {
    let g = f.clone();
    StagedMap::new(later(f.source()), later(f.target()), move |n, e| {
        if n == 0 {
            0
        } else {
            g.component(n - 1, e)
        }
    })
}

/// A global element `1 → X`: a compatible choice of one element per stage.
///
/// Picks are produced by a step function (seeded at stage 0, extended from
/// the previous pick) and memoized; compatibility with the restriction maps
/// is asserted as stages are demanded.
#[derive(Clone)]
pub struct GlobalElement {
    of: StagedSet,
    picks: Arc<Mutex<Vec<El>>>,
    step: Arc<dyn Fn(usize, Option<El>) -> El + Send + Sync>,
}

impl GlobalElement {
    pub fn from_step(
        of: StagedSet,
        step: impl Fn(usize, Option<El>) -> El + Send + Sync + 'static,
    ) -> Self {
        GlobalElement { of, picks: Arc::new(Mutex::new(Vec::new())), step: Arc::new(step) }
    }

    /// A global element given directly as a function of the stage.
    pub fn from_fn(of: StagedSet, f: impl Fn(usize) -> El + Send + Sync + 'static) -> Self {
        GlobalElement::from_step(of, move |n, _| f(n))
    }

    pub fn of(&self) -> &StagedSet {
        &self.of
    }

    pub fn pick(&self, n: usize) -> El {
        let mut picks = self.picks.lock().unwrap();
        while picks.len() <= n {
            let k = picks.len();
            let prev = if k == 0 { None } else { Some(picks[k - 1]) };
            let x = (self.step)(k, prev);
            assert!(x < self.of.card(k), "pick {x} out of range at stage {k}");
            if let Some(p) = prev {
                assert_eq!(
                    self.of.restrict(k - 1, x),
                    p,
                    "global element incompatible with restriction at stage {k}"
                );
            }
            picks.push(x);
        }
        picks[n]
    }
}

/// The guarded fixed point of `f: ▷A → A`: the unique global element with
/// `f ∘ next_A ∘ f† = f†`, built stagewise.
///
/// `f`'s source must be the later of its target; this is asserted stage by
/// stage as picks are demanded.
pub fn gfix(f: &StagedMap) -> GlobalElement {
    let g = f.clone();
    GlobalElement::from_step(f.target().clone(), move |n, prev| {
        assert_eq!(
            g.source().card(n),
            if n == 0 { 1 } else { g.target().card(n - 1) },
            "gfix expects a map ▷A → A"
        );
        match prev {
            None => g.component(0, 0),
            Some(p) => g.component(n, p),
        }
    })
}

/// Verify the fixed-point equation `f ∘ next ∘ e = e` at stages `0..=upto`.
pub fn satisfies_fix_equation(f: &StagedMap, e: &GlobalElement, upto: usize) -> bool {
    let nx = next(f.target());
    (0..=upto).all(|n| {
        let delayed = nx.component(n, e.pick(n));
        f.component(n, delayed) == e.pick(n)
    })
}

/// Exhaustively enumerate all stagewise-compatible families satisfying the
/// fixed-point equation up to stage `upto`; `true` iff exactly one exists and
/// it equals the truncation of [`gfix`].
pub fn check_fix_unique(f: &StagedMap, upto: usize, cap: usize) -> Result<bool, StagedError> {
    let a = f.target();
    for n in 0..=upto {
        let card = a.card(n);
        if card > cap {
            return Err(StagedError::StageTooLarge { stage: n, card, cap });
        }
    }
    // families as vectors of picks; the equation at stage 0 is x0 = f0(*),
    // at stage n+1 it is x_{n+1} = f_{n+1}(next(x_{n+1})) = f_{n+1}(x_n)
    // for compatible families.
    let mut families: Vec<Vec<El>> = (0..a.card(0))
        .filter(|&x0| x0 == f.component(0, 0))
        .map(|x0| vec![x0])
        .collect();
    for n in 0..upto {
        let mut grown = Vec::new();
        for fam in &families {
            let prev = fam[n];
            let want = f.component(n + 1, prev);
            for x in 0..a.card(n + 1) {
                if a.restrict(n, x) == prev && x == want {
                    let mut f2 = fam.clone();
                    f2.push(x);
                    grown.push(f2);
                }
            }
        }
        families = grown;
    }
    if families.len() != 1 {
        return Ok(false);
    }
    let fixed = gfix(f);
    Ok((0..=upto).all(|n| families[0][n] == fixed.pick(n)))
}

/// Guarded streams over a finite alphabet: stage `n` holds the length-`n+1`
/// prefixes, encoded in base `alphabet` with the head as least significant
/// digit, and restriction drops the last (most delayed) entry.
#[derive(Clone, Debug)]
pub struct GuardedStream {
    alphabet: usize,
}

impl GuardedStream {
    pub fn new(alphabet: usize) -> Self {
        assert!(alphabet >= 1, "streams need a nonempty alphabet");
        GuardedStream { alphabet }
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    fn pow(&self, k: usize) -> usize {
        self.alphabet.checked_pow(k as u32).expect("stream stage cardinality overflow")
    }

    /// The underlying staged set.
    pub fn staged(&self) -> StagedSet {
        let s = self.clone();
        let t = self.clone();
        StagedSet::new(move |n| s.pow(n + 1), move |n, x| x % t.pow(n + 1))
    }

    pub fn encode(&self, seq: &[usize]) -> El {
        assert!(!seq.is_empty());
        seq.iter().rev().fold(0, |acc, &d| {
            assert!(d < self.alphabet);
            acc * self.alphabet + d
        })
    }

    pub fn decode(&self, n: usize, code: El) -> Vec<usize> {
        let mut out = Vec::with_capacity(n + 1);
        let mut c = code;
        for _ in 0..=n {
            out.push(c % self.alphabet);
            c /= self.alphabet;
        }
        out
    }

    /// Prepend a head onto a delayed tail: `t` is a stage-`n` element of
    /// `▷S`, i.e. a point at stage 0 and a length-`n` prefix otherwise.
    pub fn cons(&self, n: usize, head: usize, t: El) -> El {
        assert!(head < self.alphabet);
        if n == 0 {
            assert_eq!(t, 0, "stage-0 delayed tail is the point");
            head
        } else {
            assert!(t < self.pow(n));
            head + t * self.alphabet
        }
    }

    /// Split a stage-`n` prefix into its head and delayed tail; inverse to
    /// [`GuardedStream::cons`] at every stage.
    pub fn uncons(&self, n: usize, s: El) -> (usize, El) {
        assert!(s < self.pow(n + 1));
        let _ = n;
        (s % self.alphabet, s / self.alphabet)
    }

    /// The step map `cons head ∘ ▷(map g): ▷S → S` for a digitwise function
    /// `g` on the alphabet.
    pub fn cons_map(
        &self,
        head: usize,
        g: impl Fn(usize) -> usize + Send + Sync + 'static,
    ) -> StagedMap {
        let st = self.staged();
        let gs = self.clone();
        StagedMap::new(later(&st), st, move |n, x| {
            if n == 0 {
                gs.cons(0, head, 0)
            } else {
                let digits = gs.decode(n - 1, x);
                let mapped: Vec<usize> = digits.iter().map(|&d| {
                    let y = g(d);
                    assert!(y < gs.alphabet);
                    y
                }).collect();
                gs.cons(n, head, gs.encode(&mapped))
            }
        })
    }

    /// The step map `cons head: ▷S → S` that repeats a literal head.
    pub fn cons_literal(&self, head: usize) -> StagedMap {
        self.cons_map(head, |d| d)
    }
}
