//! The acceptance battery: every headline property runs as a named check
//! with an explicit witness on failure, at pinned desk-scale bounds.

use std::fmt;

use crate::adequacy::check_global_adequacy;
use crate::clocks::{
    check_clk_restriction, check_fp_op_iso, check_grothendieck_total, force, later_k,
    next_under_forall, ClockContext, ClockFamily, CoStream, ForallK, MultiPresheaf,
};
use crate::enumerate::{enumerate_posets, enumerate_wf_relations};
use crate::frame::{check_loeb, downset_frame, loop_frame};
use crate::gen::{gen_clock_presheaf, gen_natural_step_map, SplitMix64, DEFAULT_SEED};
use crate::order::{is_compatible_wf, FinitePoset, Relation, WfRelation};
use crate::staged::{check_fix_unique, gfix, satisfies_fix_equation, DEFAULT_STAGE_CAP};
use crate::theory::{
    bag_theory, cartesian_simplify, chain_simplify, enumerate_bag_models, enumerate_models,
    filt_theory, filters_oracle, ibag_theory,
};
use crate::wtypes::{plump_poset, Polynomial, DEFAULT_TREE_CAP};

/// Outcome of one acceptance check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub witness: Option<String>,
}

impl Check {
    fn pass(name: &'static str, detail: String) -> Self {
        Check { name, pass: true, detail, witness: None }
    }

    fn fail(name: &'static str, detail: String, witness: String) -> Self {
        Check { name, pass: false, detail, witness: Some(witness) }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{status} {} — {}", self.name, self.detail)?;
        if let Some(w) = &self.witness {
            write!(f, " [witness: {w}]")?;
        }
        Ok(())
    }
}

/// Bounds for the acceptance battery. Defaults are the pinned desk-scale
/// values; the soundness sweep and classifying checks always run the full
/// "every poset up to 5 points" quantification.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub stages: usize,
    pub bound: usize,
    pub max_k: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { stages: 8, bound: 3, max_k: 3, seed: DEFAULT_SEED }
    }
}

fn labeled_poset(n: usize, leq: Relation) -> FinitePoset {
    FinitePoset::from_leq((0..n).map(|i| i.to_string()).collect(), leq)
        .expect("enumerated relations are posets")
}

/// Criterion 1. Löb induction holds on the downset frame of every poset with
/// at most 5 points, for every compatible well-founded relation.
pub fn loeb_soundness() -> Check {
    const NAME: &str = "01-loeb-soundness";
    let mut frames = 0usize;
    for n in 0..=5usize {
        for leq in enumerate_posets(n) {
            let p = labeled_poset(n, leq);
            for w in enumerate_wf_relations(&p) {
                let bf = match downset_frame(&p, w.prec()) {
                    Ok(bf) => bf,
                    Err(e) => {
                        return Check::fail(
                            NAME,
                            "downset frame construction failed".into(),
                            format!("poset {:?}: {e}", p.leq_relation()),
                        )
                    }
                };
                if let Some(phi) = check_loeb(&bf) {
                    return Check::fail(
                        NAME,
                        "a compatible well-founded basis refuted Löb induction".into(),
                        format!(
                            "poset {:?}, prec {:?}, open {}",
                            p.leq_relation(),
                            w.prec(),
                            bf.frame().name(phi)
                        ),
                    );
                }
                frames += 1;
            }
        }
    }
    Check::pass(NAME, format!("Löb holds on all {frames} (poset, ≺) pairs with ≤ 5 points"))
}

/// Criterion 2. The loop frame (one basis open strictly below itself)
/// refutes Löb with counterexample ⊥.
pub fn loeb_necessity() -> Check {
    const NAME: &str = "02-loeb-necessity";
    let bf = loop_frame();
    if is_compatible_wf(&bf.basis_wf_relation()).ok() {
        return Check::fail(
            NAME,
            "loop frame unexpectedly passed the well-foundedness axioms".into(),
            "u ≺ u should be inaccessible".into(),
        );
    }
    match check_loeb(&bf) {
        Some(phi) if phi == bf.frame().bottom() => {
            Check::pass(NAME, "loop frame fails Löb at ⊥; well-foundedness is load-bearing".into())
        }
        other => Check::fail(
            NAME,
            "loop frame did not fail at ⊥".into(),
            format!("check_loeb returned {other:?}"),
        ),
    }
}

/// Criterion 3. Generated natural step maps have guarded fixed points that
/// satisfy the fixed-point equation exactly and are unique.
pub fn fixpoint_uniqueness(cfg: &SuiteConfig) -> Check {
    const NAME: &str = "03-fixpoint-uniqueness";
    let mut rng = SplitMix64::new(cfg.seed);
    let count = 20;
    for i in 0..count {
        let (_, f) = gen_natural_step_map(&mut rng, 6, cfg.stages);
        if let Err(v) = f.verify_natural(cfg.stages) {
            return Check::fail(NAME, format!("generator produced a non-natural map (#{i})"), v.to_string());
        }
        let e = gfix(&f);
        if !satisfies_fix_equation(&f, &e, cfg.stages) {
            return Check::fail(
                NAME,
                format!("fixed-point equation failed (#{i})"),
                format!("picks {:?}", (0..=cfg.stages).map(|n| e.pick(n)).collect::<Vec<_>>()),
            );
        }
        match check_fix_unique(&f, cfg.stages, DEFAULT_STAGE_CAP) {
            Ok(true) => {}
            Ok(false) => {
                return Check::fail(
                    NAME,
                    format!("fixed point not unique (#{i})"),
                    format!("seed {}", cfg.seed),
                )
            }
            Err(e) => return Check::fail(NAME, "stage cap exceeded".into(), e.to_string()),
        }
    }
    Check::pass(
        NAME,
        format!(
            "{count} generated step maps: equation exact and fixed point unique up to stage {}",
            cfg.stages
        ),
    )
}

/// Criterion 4. The stream programs compute the expected prefixes and
/// satisfy their defining equations pointwise.
pub fn stream_programs(cfg: &SuiteConfig) -> Check {
    const NAME: &str = "04-stream-programs";
    let s = CoStream::naturals_mod(10);
    if !s.take(0).is_empty() {
        return Check::fail(NAME, "take 0 is not []".into(), format!("{:?}", s.take(0)));
    }
    for n in 0..=cfg.stages {
        let want: Vec<usize> = (0..n).map(|i| i % 10).collect();
        let got = s.take(n);
        if got != want {
            return Check::fail(NAME, format!("take {n} wrong"), format!("got {got:?}, want {want:?}"));
        }
    }
    // defining equations: take (n+1) u = head u :: take n (tail u), with
    // head and tail computed by their own programs; heads are
    // depth-independent
    let mut cur = s.clone();
    for step in 0..cfg.stages {
        for d in 0..3 {
            if cur.head_at_depth(d) != cur.head() {
                return Check::fail(
                    NAME,
                    format!("head depends on clock depth after {step} tails"),
                    format!("depth {d}"),
                );
            }
        }
        let n = cfg.stages - step;
        let mut unfolded = vec![cur.head()];
        unfolded.extend(cur.tail().take(n - 1));
        if unfolded != cur.take(n) {
            return Check::fail(
                NAME,
                format!("take recursion violated after {step} tails"),
                format!("{unfolded:?} vs {:?}", cur.take(n)),
            );
        }
        cur = cur.tail();
    }
    Check::pass(NAME, format!("naturals-mod-10 prefixes and program equations hold up to {}", cfg.stages))
}

/// Criterion 5. `force` and `Λk.next(·[k])` are mutually inverse on
/// generated presheaves, on every compatible family up to the stage bound.
pub fn force_iso(cfg: &SuiteConfig) -> Check {
    const NAME: &str = "05-force-iso";
    let mut rng = SplitMix64::new(cfg.seed ^ 0xf0ce);
    let ctx = ClockContext::empty();
    let count = 10;
    let mut families = 0usize;
    for i in 0..count {
        let x = gen_clock_presheaf(&mut rng, "k", 4, cfg.stages + 2);
        let fx = ForallK::new(x.clone(), "k");
        for fam in fx.elements_up_to(&ctx, cfg.stages + 1) {
            let f = ClockFamily::from_vec(fam.clone());
            let rt = force(&next_under_forall(&x, "k", &ctx, &f));
            if !rt.agrees_with(&f, cfg.stages) {
                return Check::fail(
                    NAME,
                    format!("force ∘ next ≠ id on ∀k.X (presheaf #{i})"),
                    format!("family {fam:?}"),
                );
            }
            families += 1;
        }
        let flx = ForallK::new(later_k(&x, "k"), "k");
        for fam in flx.elements_up_to(&ctx, cfg.stages + 1) {
            let f = ClockFamily::from_vec(fam.clone());
            let rt = next_under_forall(&x, "k", &ctx, &force(&f));
            if !rt.agrees_with(&f, cfg.stages) {
                return Check::fail(
                    NAME,
                    format!("next ∘ force ≠ id on ∀k.▷X (presheaf #{i})"),
                    format!("family {fam:?}"),
                );
            }
            families += 1;
        }
    }
    Check::pass(
        NAME,
        format!("both composites are the identity on {families} families across {count} presheaves"),
    )
}

/// Criterion 6. Clock irrelevance: for presheaves constant in the bound
/// clock, `∀k.X ≅ X` up to the stage bound.
pub fn clock_irrelevance(cfg: &SuiteConfig) -> Check {
    const NAME: &str = "06-clock-irrelevance";
    let mut rng = SplitMix64::new(cfg.seed ^ 0x1e0e);
    let ctx = ClockContext::single("c", 2);
    for i in 0..8usize {
        // a presheaf over the ambient clock "c", lifted blind to "k"
        let x = gen_clock_presheaf(&mut rng, "c", 4, cfg.stages + 2);
        let y = MultiPresheaf::phantom_clock(&x, "k");
        let fa = ForallK::new(y, "k");
        let elems = fa.elements_up_to(&ctx, cfg.stages);
        let card = x.card(&ctx);
        if elems.len() != card {
            return Check::fail(
                NAME,
                format!("|∀k.X| ≠ |X| for constant-in-k presheaf #{i}"),
                format!("{} families vs card {card}", elems.len()),
            );
        }
        for fam in &elems {
            if fam.iter().any(|&v| v != fam[0]) {
                return Check::fail(
                    NAME,
                    format!("non-constant family in ∀k.X for presheaf #{i}"),
                    format!("{fam:?}"),
                );
            }
        }
        // the canonical maps are mutually inverse: evaluate then reconstitute
        let mut seen: Vec<usize> = elems.iter().map(|f| f[0]).collect();
        seen.sort();
        if seen != (0..card).collect::<Vec<_>>() {
            return Check::fail(
                NAME,
                format!("evaluation is not a bijection for presheaf #{i}"),
                format!("{seen:?}"),
            );
        }
    }
    Check::pass(NAME, format!("∀k.X ≅ X on 8 constant-in-k presheaves up to stage {}", cfg.stages))
}

/// Criterion 7. Classifying correspondence: filter-theory models match the
/// filters oracle on every poset with ≤ 5 points; the chain and cartesian
/// simplifications have identical model sets where they apply.
pub fn classifying_correspondence() -> Check {
    const NAME: &str = "07-classifying-correspondence";
    let mut posets = 0usize;
    let mut chains = 0usize;
    let mut cartesians = 0usize;
    for n in 0..=5usize {
        for leq in enumerate_posets(n) {
            let p = labeled_poset(n, leq);
            let models = enumerate_models(&filt_theory(&p));
            let filters = filters_oracle(&p);
            if models != filters {
                return Check::fail(
                    NAME,
                    "filter-theory models differ from the filters oracle".into(),
                    format!("poset {:?}", p.leq_relation()),
                );
            }
            posets += 1;
            if let Ok(simple) = chain_simplify(&p) {
                if enumerate_models(&simple) != models {
                    return Check::fail(
                        NAME,
                        "chain simplification changed the model set".into(),
                        format!("poset {:?}", p.leq_relation()),
                    );
                }
                chains += 1;
            }
            if let Ok(cart) = cartesian_simplify(&p) {
                if enumerate_models(&cart) != models {
                    return Check::fail(
                        NAME,
                        "cartesian simplification changed the model set".into(),
                        format!("poset {:?}", p.leq_relation()),
                    );
                }
                cartesians += 1;
            }
        }
    }
    Check::pass(
        NAME,
        format!(
            "models ↔ filters on {posets} posets; {chains} total orders and {cartesians} meet-semilattices simplified identically"
        ),
    )
}

/// Criterion 8. Bag universal property at model level: labeled family
/// counts are the geometric series over the filter count, and the inhabited
/// variant drops exactly the empty-index term.
pub fn bag_universal_property(cfg: &SuiteConfig) -> Check {
    const NAME: &str = "08-bag-universal-property";
    let mut posets = 0usize;
    for n in 0..=4usize {
        for leq in enumerate_posets(n) {
            let p = labeled_poset(n, leq);
            let t = filt_theory(&p);
            let m = filters_oracle(&p).len() as u128;
            let want: u128 = (0..=cfg.max_k).map(|k| m.pow(k as u32)).sum();
            let got = enumerate_bag_models(&bag_theory(&t), cfg.max_k).len() as u128;
            if got != want {
                return Check::fail(
                    NAME,
                    "bag model count is not the geometric series over filters".into(),
                    format!("poset {:?}: {got} vs {want}", p.leq_relation()),
                );
            }
            let got_inh = enumerate_bag_models(&ibag_theory(&t), cfg.max_k).len() as u128;
            if got_inh != want - 1 {
                return Check::fail(
                    NAME,
                    "inhabited bag count does not drop exactly the empty-index term".into(),
                    format!("poset {:?}: {got_inh} vs {}", p.leq_relation(), want - 1),
                );
            }
            posets += 1;
        }
    }
    Check::pass(
        NAME,
        format!("bag counts are Σ_k |filters|^k (k ≤ {}) on {posets} posets, inhabited drops k=0", cfg.max_k),
    )
}

/// Criterion 9. Clock-category structure: the opposite of the free finite
/// product completion of ω is the clock category on the bounded fragment,
/// the nonempty restriction is a full subcategory, and the elements and
/// fiberwise constructions of the total category agree.
pub fn clock_category_structure() -> Check {
    const NAME: &str = "09-clock-categories";
    if !check_fp_op_iso(3, 4) {
        return Check::fail(
            NAME,
            "FP(ω)ᵒᵖ does not match the clock category".into(),
            "|U| ≤ 3, depths ≤ 4".into(),
        );
    }
    if !check_clk_restriction(3, 4) {
        return Check::fail(
            NAME,
            "nonempty restriction is not the full subcategory".into(),
            "|U| ≤ 3, depths ≤ 4".into(),
        );
    }
    if !check_grothendieck_total(3, 4) {
        return Check::fail(
            NAME,
            "elements and fiberwise total categories differ".into(),
            "arity ≤ 3, depths ≤ 4".into(),
        );
    }
    Check::pass(NAME, "FP(ω)ᵒᵖ ≅ 𝕂, CLK is the nonempty full subcategory, total categories agree (|U| ≤ 3, depths ≤ 4)".into())
}

/// Criterion 10. Plump ordering: the unary-chain polynomial at depth 6
/// reflects to the 6-point chain with its strict order; the binary
/// polynomial at depth 3 passes all compatibility axioms.
pub fn plump_ordering() -> Check {
    const NAME: &str = "10-plump-ordering";
    let refl = match plump_poset(&Polynomial::unary_chain(), 6, DEFAULT_TREE_CAP) {
        Ok(r) => r,
        Err(e) => return Check::fail(NAME, "plump reflection failed".into(), e.to_string()),
    };
    let q = refl.quotient();
    if q.len() != 6 {
        return Check::fail(NAME, "unary-chain reflection has wrong size".into(), format!("{}", q.len()));
    }
    for i in 0..6 {
        for j in 0..6 {
            let comparable = q.leq(i, j) || q.leq(j, i);
            let strict_ok = refl.reflected_prec().contains(i, j) == (q.leq(i, j) && i != j);
            if !comparable || !strict_ok {
                return Check::fail(
                    NAME,
                    "unary-chain reflection is not the chain with its strict order".into(),
                    format!("at ({i}, {j})"),
                );
            }
        }
    }
    let binary = match plump_poset(&Polynomial::binary(), 3, DEFAULT_TREE_CAP) {
        Ok(r) => r,
        Err(e) => return Check::fail(NAME, "binary plump reflection failed".into(), e.to_string()),
    };
    let report = is_compatible_wf(&binary.as_wf_relation());
    if !report.ok() {
        return Check::fail(
            NAME,
            "binary plump poset fails the compatibility axioms".into(),
            report.describe(binary.quotient().as_preorder().names()),
        );
    }
    Check::pass(NAME, "depth-6 unary chain ≅ 6-point chain with <; binary depth-3 reflection is compatible well-founded".into())
}

/// Criterion 11. Global adequacy: holds on the chain and diamond instances,
/// fails on the disconnected antichain.
pub fn global_adequacy() -> Check {
    const NAME: &str = "11-global-adequacy";
    for n in 2..=5usize {
        let p = FinitePoset::chain(n);
        let w = WfRelation::new(p.as_preorder().clone(), p.strict()).expect("arity");
        match check_global_adequacy(&w, 2) {
            Ok(true) => {}
            Ok(false) => {
                return Check::fail(NAME, format!("chain of {n} not adequate"), "|A| = 2".into())
            }
            Err(e) => return Check::fail(NAME, "adequacy check errored".into(), e.to_string()),
        }
    }
    let mut leq = Relation::identity(4).expect("diamond");
    for v in 1..4 {
        leq.insert(0, v);
    }
    leq.insert(1, 3);
    leq.insert(2, 3);
    let diamond = FinitePoset::from_leq(
        vec!["bot".into(), "a".into(), "b".into(), "top".into()],
        leq,
    )
    .expect("diamond is a poset");
    let w = WfRelation::new(diamond.as_preorder().clone(), diamond.strict()).expect("arity");
    if !check_global_adequacy(&w, 2).unwrap_or(false) {
        return Check::fail(NAME, "diamond with strict order not adequate".into(), "|A| = 2".into());
    }
    let anti = FinitePoset::antichain(2);
    let w = WfRelation::new(anti.as_preorder().clone(), Relation::empty(2).expect("arity"))
        .expect("arity");
    match check_global_adequacy(&w, 2) {
        Ok(false) => {}
        other => {
            return Check::fail(
                NAME,
                "disconnected antichain unexpectedly adequate".into(),
                format!("{other:?}"),
            )
        }
    }
    // singleton value sets are always adequate
    for n in 0..=3usize {
        for leq in enumerate_posets(n) {
            let p = labeled_poset(n, leq);
            for w in enumerate_wf_relations(&p) {
                if !check_global_adequacy(&w, 1).unwrap_or(false) {
                    return Check::fail(
                        NAME,
                        "singleton value set not adequate".into(),
                        format!("poset {:?}, prec {:?}", p.leq_relation(), w.prec()),
                    );
                }
            }
        }
    }
    Check::pass(NAME, "adequate on chains and the diamond, refuted on the antichain, trivially adequate at singletons".into())
}

/// Run the full battery; checks are independent and run concurrently, and
/// results are merged in name order.
pub fn run_suite(cfg: &SuiteConfig) -> Vec<Check> {
    let mut results: Vec<Check> = std::thread::scope(|scope| {
        let handles = vec![
            scope.spawn(loeb_soundness),
            scope.spawn(loeb_necessity),
            scope.spawn(|| fixpoint_uniqueness(cfg)),
            scope.spawn(|| stream_programs(cfg)),
            scope.spawn(|| force_iso(cfg)),
            scope.spawn(|| clock_irrelevance(cfg)),
            scope.spawn(classifying_correspondence),
            scope.spawn(|| bag_universal_property(cfg)),
            scope.spawn(clock_category_structure),
            scope.spawn(plump_ordering),
            scope.spawn(global_adequacy),
        ];
        handles.into_iter().map(|h| h.join().expect("check panicked")).collect()
    });
    results.sort_by_key(|c| c.name);
    results
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_are_unique_and_ordered() {
        let cfg = SuiteConfig { stages: 3, bound: 2, max_k: 2, ..SuiteConfig::default() };
        // cheap members only; the full battery runs in the acceptance tests
        let checks = [loeb_necessity(), stream_programs(&cfg), clock_irrelevance(&cfg)];
        let names: Vec<&str> = checks.iter().map(|c| c.name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        for c in &checks {
            assert!(c.pass, "{c}");
        }
    }
}
