//! Seeded generation of staged sets, natural step maps, and clock-indexed
//! presheaves for the randomized property suites.
//!
//! Randomness comes from a SplitMix64 stream so runs are reproducible from a
//! single seed on any platform.

use crate::clocks::MultiPresheaf;
use crate::staged::{El, StagedMap, StagedSet};

/// Default seed for the property suites.
pub const DEFAULT_SEED: u64 = 0x5eed_cafe_f00d_0001;

/// SplitMix64 pseudo-random stream.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform draw from `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    /// Uniform draw from `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }
}

/// Cardinality and restriction tables for a staged set, with stages past the
/// table stationary.
#[derive(Clone, Debug)]
pub struct StagedTables {
    pub cards: Vec<usize>,
    pub restricts: Vec<Vec<El>>,
}

impl StagedTables {
    pub fn to_staged(&self) -> StagedSet {
        StagedSet::from_tables(self.cards.clone(), self.restricts.clone())
    }
}

/// Random staged tables with `stages + 1` tabulated cardinalities at most
/// `max_card`.
pub fn gen_staged_tables(rng: &mut SplitMix64, max_card: usize, stages: usize) -> StagedTables {
    let cards: Vec<usize> = (0..=stages).map(|_| rng.range(1, max_card)).collect();
    let restricts: Vec<Vec<El>> = (0..stages)
        .map(|n| (0..cards[n + 1]).map(|_| rng.below(cards[n])).collect())
        .collect();
    StagedTables { cards, restricts }
}

/// A random natural step map `f: ▷A → A` over random staged tables.
///
/// Components are chosen stage by stage inside the naturality constraint:
/// the stage-`n+1` component must land in the restriction fiber over the
/// image of the stage-`n` component. When a fiber is empty the restriction
/// table is repaired (before that stage's component is fixed) by rerouting a
/// random element onto the needed value, which never invalidates the
/// components already chosen.
pub fn gen_natural_step_map(
    rng: &mut SplitMix64,
    max_card: usize,
    stages: usize,
) -> (StagedSet, StagedMap) {
    // Nondecreasing cardinalities with surjective restrictions keep every
    // restriction fiber nonempty, so natural components always exist.
    // cards[0..=stages+1], restricts[n]: A(n+1) → A(n) for n ≤ stages.
    let mut cards = Vec::with_capacity(stages + 2);
    cards.push(rng.range(1, max_card));
    for n in 0..=stages {
        cards.push(rng.range(cards[n], max_card));
    }
    let restricts: Vec<Vec<El>> = (0..=stages)
        .map(|n| {
            (0..cards[n + 1])
                .map(|y| if y < cards[n] { y } else { rng.below(cards[n]) })
                .collect()
        })
        .collect();

    // comps[0] is the single stage-0 value f_0(*); comps[m] for m ≥ 1 is
    // f_m: A(m-1) → A(m). The naturality square at stage m-1 forces
    //   restrict(m-1)(f_m(x)) = f_{m-1}((▷A).restrict(m-1)(x)),
    // so f_m(x) is drawn from the fiber over that value.
    let mut comps: Vec<Vec<El>> = Vec::with_capacity(stages + 2);
    comps.push(vec![rng.below(cards[0])]);
    for m in 1..=stages + 1 {
        let domain = cards[m - 1];
        let mut comp = Vec::with_capacity(domain);
        for x in 0..domain {
            let lower = if m == 1 {
                comps[0][0]
            } else {
                comps[m - 1][restricts[m - 2][x]]
            };
            let fiber: Vec<El> =
                (0..cards[m]).filter(|&y| restricts[m - 1][y] == lower).collect();
            assert!(!fiber.is_empty(), "surjective restrictions have nonempty fibers");
            comp.push(fiber[rng.below(fiber.len())]);
        }
        comps.push(comp);
    }

    let a = StagedSet::from_tables(cards, restricts);
    let f = StagedMap::new(crate::staged::later(&a), a.clone(), move |n, x| {
        assert!(n < comps.len(), "generated step map demanded past stage {}", comps.len() - 1);
        if n == 0 {
            comps[0][0]
        } else {
            comps[n][x]
        }
    });
    (a, f)
}

/// A presheaf over clock contexts that only looks at one clock's depth,
/// backed by random staged tables in that coordinate.
pub fn gen_clock_presheaf(
    rng: &mut SplitMix64,
    clock: &str,
    max_card: usize,
    stages: usize,
) -> MultiPresheaf {
    let t = gen_staged_tables(rng, max_card, stages);
    let staged = t.to_staged();
    let s1 = staged.clone();
    let s2 = staged;
    let k1 = clock.to_string();
    let k2 = clock.to_string();
    MultiPresheaf::new(
        move |ctx| {
            let d = ctx.depth(&k1).expect("generated presheaf demands its clock");
            s1.card(d)
        },
        move |h, e| {
            assert!(h.fixes(&k2));
            let src = h.src().depth(&k2).expect("clock in source");
            let dst = h.dst().depth(&k2).expect("clock in target");
            let mut y = e;
            for n in (dst..src).rev() {
                y = s2.restrict(n, y);
            }
            y
        },
    )
}
