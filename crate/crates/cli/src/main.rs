//! Command-line front end: reproducible checks and evaluations over the
//! poset, frame, polynomial, and theory file formats.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on
//! malformed input (with the JSON pointer of the offending value).

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use guarded_lab::clocks::{
    check_clk_restriction, check_fp_op_iso, check_grothendieck_total, force, later_k,
    next_under_forall, ClockContext, ClockFamily, CoStream, ForallK,
};
use guarded_lab::frame::check_loeb;
use guarded_lab::gen::{gen_clock_presheaf, SplitMix64, DEFAULT_SEED};
use guarded_lab::json::{
    self, frame_from_str, polynomial_from_str, poset_from_str, theory_from_str, LoadError,
};
use guarded_lab::order::is_compatible_wf;
use guarded_lab::staged::{gfix, GuardedStream, StagedMap, StagedSet};
use guarded_lab::suite::{run_suite, SuiteConfig};
use guarded_lab::theory::{
    bag_model_counts, bag_theory, enumerate_bag_models, enumerate_models, filters_oracle,
    ibag_theory,
};
use guarded_lab::wtypes::{plump_poset, DEFAULT_TREE_CAP};

use report::{fnv1a64, InputDigest, ResultLine, RunReport};

#[derive(Parser)]
#[command(name = "guarded-lab", version, about = "Finite-scale checks for guarded recursion: Löb induction on based frames, guarded fixed points, multi-clock quantification, and classifying-theory model counts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write a machine-readable run report to this file
    #[arg(long, global = true, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the compatible well-founded relation axioms of a poset file
    CheckWf {
        /// Poset JSON ("-" for stdin)
        poset: PathBuf,
    },
    /// Check Löb induction on a frame file (or the downset frame of a poset file)
    CheckLoeb {
        /// Frame or poset JSON ("-" for stdin)
        frame: PathBuf,
    },
    /// Build bounded-depth trees of a polynomial, order them plumply, and
    /// emit the reflected poset in the poset file format
    Plump {
        /// Polynomial JSON ("-" for stdin)
        polynomial: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Cap on the number of materialized trees
        #[arg(long, default_value_t = DEFAULT_TREE_CAP)]
        cap: usize,
    },
    /// Evaluate the guarded fixed point of a built-in step map stagewise
    Fixpoint {
        /// Step-map JSON ("-" for stdin)
        spec: PathBuf,
        #[arg(long, default_value_t = 8)]
        stages: usize,
    },
    /// Print a prefix of a built-in coinductive stream
    EvalStream {
        /// One of: zeros, alternating, naturals, naturals-mod-<m>
        program: String,
        #[arg(long, default_value_t = 8)]
        take: usize,
    },
    /// Run the bounded clock-category, force, and clock-irrelevance suites
    CheckMulticlock {
        /// Clock-count bound; category fragments use depths up to bound+1
        #[arg(long, default_value_t = 3)]
        bound: usize,
        #[arg(long, default_value_t = 8)]
        stages: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Enumerate the boolean models of a theory file
    Models {
        /// Theory JSON ("-" for stdin)
        theory: PathBuf,
    },
    /// Enumerate the filters of a poset file
    Filters {
        /// Poset JSON ("-" for stdin)
        poset: PathBuf,
    },
    /// Count indexed-family models of the bag transformation of a theory
    Bag {
        /// Theory JSON ("-" for stdin)
        theory: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_k: usize,
        /// Use the inhabited variant (excludes the empty index set)
        #[arg(long)]
        inhabited: bool,
    },
    /// Run the full acceptance battery
    Suite {
        #[arg(long, default_value_t = 8)]
        stages: usize,
        #[arg(long, default_value_t = 3)]
        bound: usize,
        #[arg(long, default_value_t = 3)]
        max_k: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

struct Run {
    inputs: Vec<InputDigest>,
    results: Vec<ResultLine>,
}

impl Run {
    fn new() -> Self {
        Run { inputs: Vec::new(), results: Vec::new() }
    }

    fn read(&mut self, path: &Path) -> Result<String, String> {
        let text = if path.as_os_str() == "-" {
            use std::io::Read;
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf).map_err(|e| e.to_string())?;
            buf
        } else {
            std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?
        };
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            fnv1a64: format!("{:016x}", fnv1a64(text.as_bytes())),
        });
        Ok(text)
    }

    fn check(&mut self, name: &str, pass: bool, detail: String, witness: Option<String>) {
        let status = if pass { "PASS" } else { "FAIL" };
        match &witness {
            Some(w) => println!("{status} {name} — {detail} [witness: {w}]"),
            None => println!("{status} {name} — {detail}"),
        }
        self.results.push(ResultLine { name: name.to_string(), pass, detail: Some(detail), witness });
    }
}

enum CmdError {
    /// Malformed input: exit 2.
    Input(String),
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn load_err(e: LoadError) -> CmdError {
    CmdError::Input(e.to_string())
}

fn cmd_check_wf(run: &mut Run, poset: &Path) -> Result<(), CmdError> {
    let text = run.read(poset).map_err(CmdError::Input)?;
    let loaded = poset_from_str(&text).map_err(load_err)?;
    warn_all(&loaded.warnings);
    let w = loaded.value;
    let names = w.base().names().to_vec();
    let report = is_compatible_wf(&w);
    let nm = |u: usize| names[u].clone();
    run.check(
        "subrelation",
        report.not_subrelation.is_none(),
        "prec ⊆ leq".into(),
        report.not_subrelation.map(|(u, v)| format!("{} ≺ {} not below", nm(u), nm(v))),
    );
    run.check(
        "transitivity",
        report.not_transitive.is_none(),
        "prec is transitive".into(),
        report.not_transitive.map(|(u, v, t)| format!("({}, {}, {})", nm(u), nm(v), nm(t))),
    );
    run.check(
        "left-compatibility",
        report.not_left_compatible.is_none(),
        "u ≤ v ≺ w ⇒ u ≺ w".into(),
        report.not_left_compatible.map(|(u, v, t)| format!("({}, {}, {})", nm(u), nm(v), nm(t))),
    );
    run.check(
        "right-compatibility",
        report.not_right_compatible.is_none(),
        "u ≺ v ≤ w ⇒ u ≺ w".into(),
        report.not_right_compatible.map(|(u, v, t)| format!("({}, {}, {})", nm(u), nm(v), nm(t))),
    );
    run.check(
        "well-foundedness",
        report.inaccessible.is_empty(),
        "every element is accessible".into(),
        (!report.inaccessible.is_empty()).then(|| {
            let elems: Vec<String> = report.inaccessible.iter().map(|&u| nm(u)).collect();
            format!("inaccessible: {{{}}}", elems.join(", "))
        }),
    );
    Ok(())
}

fn cmd_check_loeb(run: &mut Run, frame: &Path) -> Result<(), CmdError> {
    let text = run.read(frame).map_err(CmdError::Input)?;
    // accept a frame document, or a bare poset document via its downset frame
    let loaded = match frame_from_str(&text) {
        Ok(l) => l,
        Err(frame_err) => match poset_from_str(&text) {
            Ok(p) => {
                warn_all(&p.warnings);
                let prec = p.value.prec().clone();
                let poset = p
                    .value
                    .poset()
                    .map_err(|e| CmdError::Input(format!("at /leq: {e}")))?;
                let based = guarded_lab::frame::downset_frame(&poset, &prec)
                    .map_err(|e| CmdError::Input(e.to_string()))?;
                json::Loaded { value: based, warnings: Vec::new() }
            }
            Err(_) => return Err(load_err(frame_err)),
        },
    };
    warn_all(&loaded.warnings);
    let bf = loaded.value;
    match check_loeb(&bf) {
        None => run.check(
            "loeb",
            true,
            format!("Löb induction holds over {} opens", bf.frame().count()),
            None,
        ),
        Some(phi) => run.check(
            "loeb",
            false,
            "Löb induction fails".into(),
            Some(format!("counterexample open {}", bf.frame().name(phi))),
        ),
    }
    Ok(())
}

fn cmd_plump(run: &mut Run, polynomial: &Path, depth: usize, cap: usize) -> Result<(), CmdError> {
    let text = run.read(polynomial).map_err(CmdError::Input)?;
    let loaded = polynomial_from_str(&text).map_err(load_err)?;
    warn_all(&loaded.warnings);
    let refl = plump_poset(&loaded.value, depth, cap).map_err(|e| CmdError::Input(e.to_string()))?;
    let q = refl.quotient();
    let doc = json::poset_to_json(
        q.as_preorder().names(),
        q.leq_relation(),
        refl.reflected_prec(),
    );
    println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    run.results.push(ResultLine {
        name: "plump".into(),
        pass: true,
        detail: Some(format!("{} classes at depth {depth}", q.len())),
        witness: None,
    });
    Ok(())
}

#[derive(serde::Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
enum FixpointSpec {
    /// Constant map into a constant staged set.
    Constant { size: usize, value: usize },
    /// `cons head` on guarded streams over an alphabet.
    ConsLiteral { alphabet: usize, head: usize },
    /// `cons head ∘ ▷(map successor mod alphabet)`.
    MapSuccessor { alphabet: usize, head: usize },
}

fn cmd_fixpoint(run: &mut Run, spec: &Path, stages: usize) -> Result<(), CmdError> {
    let text = run.read(spec).map_err(CmdError::Input)?;
    let parsed: FixpointSpec =
        serde_json::from_str(&text).map_err(|e| CmdError::Input(format!("invalid JSON: {e}")))?;
    let (f, stream): (StagedMap, Option<GuardedStream>) = match parsed {
        FixpointSpec::Constant { size, value } => {
            if value >= size {
                return Err(CmdError::Input(format!("at /value: {value} is not below {size}")));
            }
            let a = StagedSet::constant(size);
            (StagedMap::new(guarded_lab::staged::later(&a), a, move |_, _| value), None)
        }
        FixpointSpec::ConsLiteral { alphabet, head } => {
            if head >= alphabet {
                return Err(CmdError::Input(format!("at /head: {head} is not below {alphabet}")));
            }
            let gs = GuardedStream::new(alphabet);
            (gs.cons_literal(head), Some(gs))
        }
        FixpointSpec::MapSuccessor { alphabet, head } => {
            if head >= alphabet {
                return Err(CmdError::Input(format!("at /head: {head} is not below {alphabet}")));
            }
            let gs = GuardedStream::new(alphabet);
            (gs.cons_map(head, move |d| (d + 1) % alphabet), Some(gs))
        }
    };
    let e = gfix(&f);
    for n in 0..=stages {
        match &stream {
            Some(gs) => println!("pick({n}) = {:?}", gs.decode(n, e.pick(n))),
            None => println!("pick({n}) = {}", e.pick(n)),
        }
    }
    run.results.push(ResultLine {
        name: "fixpoint".into(),
        pass: true,
        detail: Some(format!("unrolled to stage {stages}")),
        witness: None,
    });
    Ok(())
}

fn parse_stream(program: &str) -> Result<CoStream, CmdError> {
    match program {
        "zeros" => Ok(CoStream::zeros()),
        "alternating" => Ok(CoStream::alternating()),
        "naturals" => Ok(CoStream::naturals_mod(10)),
        other => {
            if let Some(m) = other.strip_prefix("naturals-mod-") {
                let m: usize = m
                    .parse()
                    .map_err(|_| CmdError::Input(format!("bad modulus in {other:?}")))?;
                if m == 0 {
                    return Err(CmdError::Input("modulus must be positive".into()));
                }
                Ok(CoStream::naturals_mod(m))
            } else {
                Err(CmdError::Input(format!(
                    "unknown stream {other:?}; expected zeros, alternating, naturals, or naturals-mod-<m>"
                )))
            }
        }
    }
}

fn cmd_eval_stream(run: &mut Run, program: &str, take: usize) -> Result<(), CmdError> {
    let s = parse_stream(program)?;
    let prefix = s.take(take);
    let rendered: Vec<String> = prefix.iter().map(|d| d.to_string()).collect();
    println!("[{}]", rendered.join(", "));
    run.results.push(ResultLine {
        name: "eval-stream".into(),
        pass: true,
        detail: Some(format!("{program} --take {take}")),
        witness: None,
    });
    Ok(())
}

fn cmd_check_multiclock(run: &mut Run, bound: usize, stages: usize, seed: u64) {
    run.check(
        "fp-op-iso",
        check_fp_op_iso(bound, bound + 1),
        format!("FP(ω)ᵒᵖ ≅ 𝕂 on |U| ≤ {bound}, depths ≤ {}", bound + 1),
        None,
    );
    run.check(
        "clk-restriction",
        check_clk_restriction(bound, bound + 1),
        "nonempty contexts form the full subcategory".into(),
        None,
    );
    run.check(
        "grothendieck-total",
        check_grothendieck_total(bound, bound + 1),
        "elements and fiberwise total categories agree".into(),
        None,
    );

    let mut rng = SplitMix64::new(seed);
    let ctx = ClockContext::empty();
    let mut force_ok = true;
    let mut families = 0usize;
    for _ in 0..5 {
        let x = gen_clock_presheaf(&mut rng, "k", 4, stages + 2);
        let fx = ForallK::new(x.clone(), "k");
        for fam in fx.elements_up_to(&ctx, stages + 1) {
            let f = ClockFamily::from_vec(fam);
            force_ok &= force(&next_under_forall(&x, "k", &ctx, &f)).agrees_with(&f, stages);
            families += 1;
        }
        let flx = ForallK::new(later_k(&x, "k"), "k");
        for fam in flx.elements_up_to(&ctx, stages + 1) {
            let f = ClockFamily::from_vec(fam);
            force_ok &= next_under_forall(&x, "k", &ctx, &force(&f)).agrees_with(&f, stages);
            families += 1;
        }
    }
    run.check("force-iso", force_ok, format!("roundtrips on {families} families up to stage {stages}"), None);

    let mut irrelevant = true;
    let ambient = ClockContext::single("c", 2);
    for _ in 0..5 {
        let x = gen_clock_presheaf(&mut rng, "c", 4, stages + 2);
        let fa = ForallK::new(guarded_lab::clocks::MultiPresheaf::phantom_clock(&x, "k"), "k");
        let elems = fa.elements_up_to(&ambient, stages);
        irrelevant &= elems.len() == x.card(&ambient);
        irrelevant &= elems.iter().all(|f| f.iter().all(|&v| v == f[0]));
    }
    run.check("clock-irrelevance", irrelevant, format!("∀k.X ≅ X on constant-in-k presheaves up to stage {stages}"), None);
}

fn cmd_models(run: &mut Run, theory: &Path) -> Result<(), CmdError> {
    let text = run.read(theory).map_err(CmdError::Input)?;
    let t = theory_from_str(&text).map_err(load_err)?.value;
    let models = enumerate_models(&t);
    for m in &models {
        let truthy: Vec<&str> = t
            .symbols()
            .iter()
            .enumerate()
            .filter(|(i, _)| m >> i & 1 == 1)
            .map(|(_, s)| s.as_str())
            .collect();
        println!("{{{}}}", truthy.join(", "));
    }
    let n = models.len();
    println!("{n} model{}", if n == 1 { "" } else { "s" });
    run.results.push(ResultLine {
        name: "models".into(),
        pass: true,
        detail: Some(format!("{n} models")),
        witness: None,
    });
    Ok(())
}

fn cmd_filters(run: &mut Run, poset: &Path) -> Result<(), CmdError> {
    let text = run.read(poset).map_err(CmdError::Input)?;
    let loaded = poset_from_str(&text).map_err(load_err)?;
    warn_all(&loaded.warnings);
    let p = loaded
        .value
        .poset()
        .map_err(|e| CmdError::Input(format!("at /leq: {e}")))?;
    let filters = filters_oracle(&p);
    for f in &filters {
        let elems: Vec<&str> =
            (0..p.len()).filter(|&u| f >> u & 1 == 1).map(|u| p.name(u)).collect();
        println!("{{{}}}", elems.join(", "));
    }
    let n = filters.len();
    println!("{n} filter{}", if n == 1 { "" } else { "s" });
    run.results.push(ResultLine {
        name: "filters".into(),
        pass: true,
        detail: Some(format!("{n} filters")),
        witness: None,
    });
    Ok(())
}

fn cmd_bag(run: &mut Run, theory: &Path, max_k: usize, inhabited: bool) -> Result<(), CmdError> {
    let text = run.read(theory).map_err(CmdError::Input)?;
    let t = theory_from_str(&text).map_err(load_err)?.value;
    let b = if inhabited { ibag_theory(&t) } else { bag_theory(&t) };
    let counts = bag_model_counts(&b, max_k);
    let listed = enumerate_bag_models(&b, max_k);
    for (k, raw, iso) in &counts.per_index_size {
        println!("|K| = {k}: {raw} labeled, {iso} up to index bijection");
    }
    println!("total: {} labeled, {} up to index bijection", counts.raw, counts.up_to_iso);
    let consistent = listed.len() as u128 == counts.raw;
    run.check(
        "bag-count",
        consistent,
        format!("enumeration agrees with the counting formula ({} families)", counts.raw),
        (!consistent).then(|| format!("enumerated {}", listed.len())),
    );
    Ok(())
}

fn cmd_suite(run: &mut Run, cfg: &SuiteConfig) {
    for check in run_suite(cfg) {
        run.check(check.name, check.pass, check.detail.clone(), check.witness.clone());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let mut run = Run::new();
    let command_name = match &cli.command {
        Command::CheckWf { .. } => "check-wf",
        Command::CheckLoeb { .. } => "check-loeb",
        Command::Plump { .. } => "plump",
        Command::Fixpoint { .. } => "fixpoint",
        Command::EvalStream { .. } => "eval-stream",
        Command::CheckMulticlock { .. } => "check-multiclock",
        Command::Models { .. } => "models",
        Command::Filters { .. } => "filters",
        Command::Bag { .. } => "bag",
        Command::Suite { .. } => "suite",
    };

    let outcome = match &cli.command {
        Command::CheckWf { poset } => cmd_check_wf(&mut run, poset),
        Command::CheckLoeb { frame } => cmd_check_loeb(&mut run, frame),
        Command::Plump { polynomial, depth, cap } => cmd_plump(&mut run, polynomial, *depth, *cap),
        Command::Fixpoint { spec, stages } => cmd_fixpoint(&mut run, spec, *stages),
        Command::EvalStream { program, take } => cmd_eval_stream(&mut run, program, *take),
        Command::CheckMulticlock { bound, stages, seed } => {
            cmd_check_multiclock(&mut run, *bound, *stages, seed.unwrap_or(DEFAULT_SEED));
            Ok(())
        }
        Command::Models { theory } => cmd_models(&mut run, theory),
        Command::Filters { poset } => cmd_filters(&mut run, poset),
        Command::Bag { theory, max_k, inhabited } => cmd_bag(&mut run, theory, *max_k, *inhabited),
        Command::Suite { stages, bound, max_k, seed } => {
            let cfg = SuiteConfig {
                stages: *stages,
                bound: *bound,
                max_k: *max_k,
                seed: seed.unwrap_or(DEFAULT_SEED),
            };
            cmd_suite(&mut run, &cfg);
            Ok(())
        }
    };

    if let Err(CmdError::Input(msg)) = outcome {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }

    let report = RunReport::new(command_name.to_string(), run.inputs, run.results, started.elapsed());
    if let Some(path) = &cli.json {
        let rendered = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Err(e) = std::fs::write(path, rendered) {
            eprintln!("error: cannot write report to {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
