//! Cross-module integration tests: tracking-automaton lasso agreement
//! through the full determinization pipeline, normalization stability of
//! verdicts, and the command line interface.

use std::collections::BTreeSet;
use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mucalc::closure::fl_closure;
use mucalc::determinize::{npa_accepts_lasso, ExplicitDpa, ExplicitNba, Npa, TrackingBuchi};
use mucalc::engine::{run_formula, EngineOptions, Verdict};
use mucalc::formula::{normalize, Formula, LogicSpec};
use mucalc::gen::{random_lasso, random_tracking_letter};
use mucalc::parse::parse;
use mucalc::tracking::{Letter, Slot, TrackingNpa};

/// Materializes the tracking NPA over a sampled sub-alphabet.
fn materialize_npa(table: &mucalc::closure::ClosureTable, letters: &[Letter]) -> Npa {
    let npa = TrackingNpa::new(table);
    let n = npa.num_states();
    let delta = (0..n)
        .map(|s| {
            letters
                .iter()
                .map(|l| {
                    npa.delta(s as u32, l)
                        .into_iter()
                        .map(|t| t as usize)
                        .collect()
                })
                .collect()
        })
        .collect();
    Npa {
        num_states: n,
        num_letters: letters.len(),
        initial: npa.initial() as usize,
        priority: (0..n).map(|s| npa.priority(s as u32)).collect(),
        delta,
    }
}

/// Materializes the level-committed Büchi automaton of the tracking NPA
/// over the same sampled sub-alphabet.
fn materialize_nba(table: &mucalc::closure::ClosureTable, letters: &[Letter]) -> ExplicitNba {
    let buchi = TrackingBuchi::new(TrackingNpa::new(table));
    let n = buchi.num_states();
    let delta = (0..n)
        .map(|s| letters.iter().map(|l| buchi.successors(s, l)).collect())
        .collect();
    ExplicitNba {
        num_states: n,
        num_letters: letters.len(),
        initial: vec![buchi.initial()],
        accepting: (0..n).map(|s| buchi.accepting(s)).collect(),
        delta,
    }
}

#[test]
fn mu_diamond_bad_branch_word() {
    // For chi = mu X. dia X, the word (tau, {dia chi})^omega encodes the
    // branch that unfolds the least fixpoint forever: the tracking
    // automaton accepts it and the co-determinized automaton rejects it.
    let spec = LogicSpec::parse("rel").unwrap();
    let chi = normalize(&parse("mu X. dia X", &spec).unwrap());
    let table = fl_closure(&chi);
    let dia_chi = table
        .id_of(&Formula::diamond(table.chi.clone()))
        .expect("dia chi in closure");
    let tau = Letter::Choice([].into());
    let kappa = Letter::Selection([Slot { lit: dia_chi, arg: 0 }].into());
    let letters = vec![tau, kappa];
    let npa = materialize_npa(&table, &letters);
    assert!(npa_accepts_lasso(&npa, &[], &[0, 1]));
    let nba = materialize_nba(&table, &letters);
    let mut b_chi = ExplicitDpa::determinize(nba).complement();
    assert!(!b_chi.accepts_lasso(&[], &[0, 1]));
    // A run that dies (empty selections forever) is not accepted by the
    // tracking automaton.
    let empty_sel = Letter::Selection(BTreeSet::new());
    let letters2 = vec![Letter::Choice([].into()), empty_sel];
    let npa2 = materialize_npa(&table, &letters2);
    assert!(!npa_accepts_lasso(&npa2, &[], &[0, 1]));
}

#[test]
fn tracking_complement_agreement_on_random_lassos() {
    let spec = LogicSpec::parse("rel").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    for text in [
        "mu X. (p | dia X)",
        "nu X. mu Y. ((p & dia X) | dia Y)",
        "nu X. box (mu Y. X | dia Y)",
    ] {
        let chi = normalize(&parse(text, &spec).unwrap());
        let table = fl_closure(&chi);
        let npa_view = TrackingNpa::new(&table);
        // A sampled sub-alphabet of full letters.
        let mut letters: Vec<Letter> = Vec::new();
        while letters.len() < 4 {
            let l = random_tracking_letter(&mut rng, &npa_view);
            if !letters.contains(&l) {
                letters.push(l);
            }
        }
        let npa = materialize_npa(&table, &letters);
        let nba = materialize_nba(&table, &letters);
        let mut dpa = ExplicitDpa::determinize(nba.clone());
        let mut comp = ExplicitDpa::determinize(nba).complement();
        for _ in 0..1000 {
            let (prefix, period) = random_lasso(&mut rng, letters.len(), 6);
            let a = npa_accepts_lasso(&npa, &prefix, &period);
            let d = dpa.accepts_lasso(&prefix, &period);
            let c = comp.accepts_lasso(&prefix, &period);
            assert_eq!(a, d, "{text}: determinization changed the language");
            assert!(a ^ c, "{text}: complement not exact on a sampled lasso");
        }
    }
}

#[test]
fn normalization_preserves_verdicts() {
    let spec = LogicSpec::parse("rel").unwrap();
    for text in [
        "mu X. (p | dia X)",
        "mu X. dia X",
        "nu X. (p & dia X)",
        "dia p & box !p",
    ] {
        let f = parse(text, &spec).unwrap();
        let double_neg = Formula::not(Formula::not(f.clone()));
        let v1 = run_formula(&f, spec.clone(), EngineOptions::default())
            .unwrap()
            .verdict;
        let v2 = run_formula(&double_neg, spec.clone(), EngineOptions::default())
            .unwrap()
            .verdict;
        assert_eq!(v1, v2, "double negation changed the verdict of {text}");
        // Idempotence.
        let n = normalize(&f);
        assert_eq!(normalize(&n), n);
    }
}

#[test]
fn negated_corpus_formulas_flip_verdicts() {
    let spec = LogicSpec::parse("rel").unwrap();
    for (text, expect) in [
        ("mu X. (p | dia X)", Verdict::Sat),
        ("mu X. dia X", Verdict::Unsat),
    ] {
        let f = parse(text, &spec).unwrap();
        let v = run_formula(&f, spec.clone(), EngineOptions::default())
            .unwrap()
            .verdict;
        assert_eq!(v, expect);
        let neg = Formula::not(f);
        let nv = run_formula(&neg, spec.clone(), EngineOptions::default())
            .unwrap()
            .verdict;
        // A formula and its negation cannot both be unsatisfiable, and
        // mu X. dia X's negation nu X. box X is valid hence satisfiable.
        if v == Verdict::Unsat {
            assert_eq!(nv, Verdict::Sat);
        }
    }
}

/// Oracle-free soundness net for the backends without a model-search
/// oracle: a formula and its negation can never both be unsatisfiable, and
/// the engine verifies every extracted model against the exact semantics
/// (an engine error would fail the test).
#[test]
fn random_graded_and_probabilistic_soundness() {
    use mucalc::gen::{random_formula, FormulaGenConfig};
    let mut rng = ChaCha8Rng::seed_from_u64(0xFEED);
    let configs = [
        ("graded", FormulaGenConfig::graded(12)),
        ("prob", FormulaGenConfig::probabilistic(12)),
    ];
    for (tag, cfg) in configs {
        let spec = LogicSpec::parse(tag).unwrap();
        let mut sat = 0;
        let mut unsat = 0;
        for i in 0..80 {
            let f = random_formula(&mut rng, &cfg);
            // Alternate between on-the-fly and final-only solving.
            let opts = || EngineOptions {
                verify: true,
                solve_every: if i % 2 == 0 { 1 } else { 0 },
                ..Default::default()
            };
            let v1 = run_formula(&f, spec.clone(), opts())
                .unwrap_or_else(|e| panic!("{tag} `{f}`: {e}"))
                .verdict;
            let neg = Formula::not(f.clone());
            let v2 = run_formula(&neg, spec.clone(), opts())
                .unwrap_or_else(|e| panic!("{tag} `!({f})`: {e}"))
                .verdict;
            assert!(
                !(v1 == Verdict::Unsat && v2 == Verdict::Unsat),
                "{tag}: `{f}` and its negation both unsatisfiable"
            );
            assert_ne!(v1, Verdict::Unknown, "{tag}: `{f}` unexpectedly unknown");
            match v1 {
                Verdict::Sat => sat += 1,
                Verdict::Unsat => unsat += 1,
                Verdict::Unknown => {}
            }
        }
        // The sample must exercise both verdicts to mean anything.
        assert!(sat > 0 && unsat > 0, "{tag}: degenerate sample (sat={sat}, unsat={unsat})");
    }
}

fn mucalc_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mucalc"))
}

#[test]
fn cli_exit_codes_and_reports() {
    let out = mucalc_bin()
        .args(["solve", "--logic", "rel", "mu X. (p | dia X)"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(10));
    assert!(String::from_utf8_lossy(&out.stdout).contains("SAT"));

    let out = mucalc_bin()
        .args(["solve", "--logic", "rel", "mu X. dia X"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(20));

    let out = mucalc_bin()
        .args(["solve", "--logic", "rel", "mu X. (p |"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Budget exhaustion surfaces as UNKNOWN with exit 30.
    let out = mucalc_bin()
        .args([
            "solve",
            "--logic",
            "rel",
            "--max-nodes",
            "1",
            "nu X. mu Y. ((p & dia X) | dia Y)",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(30));
}

#[test]
fn cli_model_extraction_roundtrip() {
    let dir = std::env::temp_dir().join(format!("mucalc-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("model.txt");
    let out = mucalc_bin()
        .args([
            "solve",
            "--logic",
            "graded",
            "nu X. (a & <1> X)",
            "--extract-model",
            path.to_str().unwrap(),
            "--verify",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(10), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("mucalc-model 1\nlogic graded\n"));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("model verified"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn cli_reports_are_deterministic_for_a_seed() {
    let run = || {
        let out = mucalc_bin()
            .args(["selftest", "--suite", "onestep", "--cases", "40", "--seed", "9"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    let a = run();
    let b = run();
    assert_eq!(a, b, "selftest reports differ between identical runs");

    // The environment variable overrides the flag.
    let out = mucalc_bin()
        .args(["selftest", "--suite", "onestep", "--cases", "40", "--seed", "9"])
        .env("MUCALC_SEED", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn cli_solve_output_is_deterministic() {
    let run = || {
        mucalc_bin()
            .args([
                "solve",
                "--logic",
                "prob",
                "nu X. (safe & <19/20> X)",
                "--verify",
            ])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run(), run(), "identical solve runs must print identical reports");
}

#[test]
fn cli_oracle_reports_models_and_bounds() {
    let out = mucalc_bin()
        .args(["oracle", "mu X. (p | dia X)", "--max-states", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("model found with 1 states"));

    let out = mucalc_bin()
        .args(["oracle", "mu X. dia X", "--max-states", "3"])
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("none up to bound 3"));
}

#[test]
fn cli_dumps_are_printed() {
    let out = mucalc_bin()
        .args(["solve", "--logic", "rel", "mu X. (p | dia X)", "--dump-npa"])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("tracking automaton"));

    let out = mucalc_bin()
        .args(["solve", "--logic", "rel", "dia p", "--dump-dpa"])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("co-determinized tracking automaton"));
}
