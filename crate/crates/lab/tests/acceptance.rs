//! One PASS/FAIL line per acceptance criterion. Run with `--nocapture` to
//! see them.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use rccs_core::equivalence::{
    check_equal, divergence_witness, ell_witness, q_witness, refine, weighted_prob, Partition,
    SignatureItem,
};
use rccs_core::oracle::{ccs_equal, coarsest_by_enumeration, is_branching_bisim, passing_partitions, DEFAULT_ORACLE_BOUND};
use rccs_core::semantics::{build_joint_space, Action, Bundle, Label, Lts, StateId, DEFAULT_BOUND};
use rccs_core::syntax::{parse, Name, Term};
use rccs_core::witness::{finite_mass, tree_prob, unroll, WitnessPolicy};
use rccs_core::Rational;
use rccs_lab::congruence::{self, PropConfig};
use rccs_lab::gen::{self, GenConfig};

const OMEGA_A: &str = "mu X. (tau.a + tau.X)";
const OMEGA_HALF: &str = "mu X. ((1/2)tau.X (+) (1/2)tau.X)";
const OMEGA_HALF_A: &str = "mu X. ((1/2)tau.a (+) (1/2)tau.X)";
const G: &str = "mu X. ((1/3)tau.(a + tau.X) (+) (2/3)tau.X)";
const H: &str = "mu X. ((1/2)tau.(a + tau.X) (+) (1/2)tau.(b + tau.X))";
const E: &str = "mu X. (a + b + tau.X)";
const PROB_RING: &str = "mu X. ((1/2)tau.a1 (+) (1/2)tau.((1/2)tau.a2 (+) (1/2)tau.((1/2)tau.a3 (+) (1/2)tau.X)))";
const ND_RING: &str = "mu X. (a1 + tau.(a2 + tau.(a3 + tau.X)))";

fn t(s: &str) -> Term {
    parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

struct Fixture {
    name: String,
    lts: Lts,
    /// Source terms, when the space was built from terms.
    terms: Vec<Term>,
    roots: Vec<StateId>,
}

fn from_terms(name: &str, terms: &[&str]) -> Fixture {
    let terms: Vec<Term> = terms.iter().map(|s| t(s)).collect();
    let sp = build_joint_space(&terms, DEFAULT_BOUND).unwrap();
    Fixture { name: name.into(), lts: sp.lts, terms, roots: sp.roots }
}

fn fixtures() -> Vec<Fixture> {
    let ga = format!("a + tau.{G}");
    let ha = format!("a + tau.{H}");
    let hb = format!("b + tau.{H}");
    let mut out = vec![
        from_terms("omega-half-a vs a", &[OMEGA_HALF_A, "a"]),
        from_terms("omega-a vs omega-half-a", &[OMEGA_A, OMEGA_HALF_A]),
        from_terms("omega-half", &[OMEGA_HALF]),
        from_terms("omega-half vs 0", &[OMEGA_HALF, "0"]),
        from_terms("G", &[G, &ga]),
        from_terms("H", &[H, &ha, &hb, E]),
        from_terms("probabilistic ring", &[PROB_RING]),
        from_terms("nondeterministic ring", &[ND_RING]),
        from_terms("tau.a vs a", &["tau.a", "a"]),
        from_terms("tau.b+a vs b+a", &["tau.b + a", "b + a"]),
        from_terms("a.b | 'a", &["a.b | 'a"]),
        from_terms("restricted handshake", &["(new a)(a.b | 'a)"]),
        from_terms("split coin", &["(1/3)tau.a (+) (2/3)tau.b", "(2/3)tau.b (+) (1/3)tau.a"]),
        from_terms("uneven coins", &["(1/3)tau.a (+) (2/3)tau.b", "(1/2)tau.a (+) (1/2)tau.b"]),
    ];
    let mut rng = gen::rng(2024);
    let mut k = 0;
    while k < 14 {
        let term = gen::term(&mut rng, GenConfig { depth: 3, random: true });
        let Ok(sp) = build_joint_space(std::slice::from_ref(&term), 9) else { continue };
        if sp.len() < 2 || sp.len() > DEFAULT_ORACLE_BOUND {
            continue;
        }
        out.push(Fixture { name: format!("random term {term}"), lts: sp.lts, terms: vec![term], roots: sp.roots });
        k += 1;
    }
    for n in 2..=7 {
        for j in 0..2 {
            let lts = gen::lts(&mut rng, n);
            out.push(Fixture { name: format!("random lts {n}.{j}"), lts, terms: Vec::new(), roots: vec![0] });
        }
    }
    out
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ac1() -> Outcome {
    let pairs = [
        (OMEGA_HALF_A.to_string(), "a".to_string()),
        (G.to_string(), format!("a + tau.{G}")),
        (H.to_string(), format!("a + tau.{H}")),
        (H.to_string(), format!("b + tau.{H}")),
        (H.to_string(), E.to_string()),
    ];
    for (a, b) in &pairs {
        let v = check_equal(&t(a), &t(b), DEFAULT_BOUND).map_err(|e| e.to_string())?;
        ensure(v.equal, || format!("{a} and {b} reported NOT EQUAL"))?;
    }
    Ok(format!("{} pairs equal", pairs.len()))
}

fn ring_nodes(lts: &Lts, pick: impl Fn(&Bundle<StateId>) -> bool) -> Vec<StateId> {
    lts.states().filter(|&s| lts.bundles(s).iter().any(&pick)).collect()
}

fn ac2() -> Outcome {
    let v = check_equal(&t(OMEGA_A), &t(OMEGA_HALF_A), DEFAULT_BOUND).map_err(|e| e.to_string())?;
    ensure(!v.equal, || "omega-a reported equal to omega-half-a".into())?;
    let item = v.evidence.map(|e| e.item);
    ensure(item == Some(SignatureItem::Divergent), || format!("evidence was {item:?}"))?;

    let f = from_terms("", &[PROB_RING]);
    let ring = ring_nodes(&f.lts, Bundle::is_random);
    ensure(ring.len() == 3, || format!("probabilistic ring has {} nodes", ring.len()))?;
    let p = refine(&f.lts);
    for (i, &x) in ring.iter().enumerate() {
        for &y in &ring[i + 1..] {
            ensure(!p.same_block(x, y), || format!("probabilistic ring nodes {x} and {y} equal"))?;
        }
    }

    let f = from_terms("", &[ND_RING]);
    let ring = ring_nodes(&f.lts, |b| matches!(b, Bundle::Tau(_)));
    ensure(ring.len() == 3, || format!("nondeterministic ring has {} nodes", ring.len()))?;
    let p = refine(&f.lts);
    ensure(ring.iter().all(|&x| p.same_block(x, ring[0])), || "nondeterministic ring nodes split".into())?;
    Ok("divergence evidence; 3 distinct probabilistic nodes; 3 equal nondeterministic nodes".into())
}

fn labels(lts: &Lts) -> BTreeSet<Label> {
    let mut out = BTreeSet::from([Label::Tau]);
    for s in lts.states() {
        for b in lts.bundles(s) {
            if let Bundle::Visible(a, _) = b {
                out.insert(Label::Visible(a.clone()));
            }
        }
    }
    out
}

/// Every witness the analysis can extract on `lts` under `p`.
fn witnesses(lts: &Lts, p: &Partition) -> Vec<WitnessPolicy> {
    let mut out = Vec::new();
    let labels = labels(lts);
    for s in lts.states() {
        let home = p.block_of(s);
        for l in &labels {
            for c in 0..p.num_blocks() {
                if *l == Label::Tau && c == home {
                    continue;
                }
                out.extend(ell_witness(lts, p, s, l, c).unwrap());
            }
        }
        let mut qs = BTreeSet::new();
        for &x in p.block(home) {
            for i in 0..lts.bundles(x).len() {
                if !lts.bundles(x)[i].is_random() {
                    continue;
                }
                for c in (0..p.num_blocks()).filter(|&c| c != home) {
                    if let Some(q) = weighted_prob(lts, p, x, i, c).unwrap() {
                        qs.insert((q, c));
                    }
                }
            }
        }
        for (q, c) in qs {
            out.extend(q_witness(lts, p, s, q, c).unwrap());
        }
        out.extend(divergence_witness(lts, p, s));
    }
    out
}

fn ac3(fx: &[Fixture]) -> Outcome {
    let mut count = 0;
    for f in fx {
        for p in [refine(&f.lts), Partition::identity(f.lts.len())] {
            for w in witnesses(&f.lts, &p) {
                w.validate(&f.lts, &p).map_err(|e| format!("{}: invalid policy: {e}", f.name))?;
                for k in 0..=12 {
                    let mass = tree_prob(&unroll(&w, k, &f.lts));
                    ensure(mass == Rational::ONE, || format!("{}: tree_prob {mass} at depth {k}", f.name))?;
                }
                count += 1;
            }
        }
    }
    ensure(count >= 100, || format!("only {count} policies"))?;
    Ok(format!("{count} policies, depths 0..=12"))
}

fn ac4() -> Outcome {
    let f = from_terms("", &[OMEGA_HALF_A, "a"]);
    let (w, a) = (f.roots[0], f.roots[1]);
    let mut labels: Vec<usize> = f.lts.states().collect();
    labels[w] = a;
    let p = Partition::from_labels(labels);
    let nil = f.lts.states().find(|&s| f.lts.bundles(s).is_empty()).ok_or("no inert state")?;
    let act = Label::Visible(Action::Input(Name::new("a")));
    let pol = ell_witness(&f.lts, &p, w, &act, p.block_of(nil)).unwrap().ok_or("no witness")?;
    let half = Rational::new(1, 2).unwrap();
    for k in 1..=20u32 {
        let m = finite_mass(&pol, k as usize, &f.lts);
        ensure(m == Rational::ONE - half.pow(k), || format!("finite mass {m} at depth {k}"))?;
    }
    Ok("1 - (1/2)^k for k = 1..=20".into())
}

fn ac5(fx: &[Fixture]) -> Outcome {
    let start = Instant::now();
    let small: Vec<&Fixture> = fx.iter().filter(|f| f.lts.len() <= DEFAULT_ORACLE_BOUND).collect();
    ensure(small.len() >= 25, || format!("only {} small fixtures", small.len()))?;
    for f in &small {
        let c = coarsest_by_enumeration(&f.lts, DEFAULT_ORACLE_BOUND).map_err(|e| format!("{}: {e}", f.name))?;
        let r = refine(&f.lts);
        ensure(c.partition == r, || format!("{}: refine {:?}, oracle {:?}", f.name, r.blocks(), c.partition.blocks()))?;
    }
    Ok(format!("{} fixtures agree in {:.1}s", small.len(), start.elapsed().as_secs_f64()))
}

fn ac6() -> Outcome {
    let cfg = PropConfig { seed: 42, cases: 200, ..PropConfig::default() };
    let s = congruence::run(&cfg);
    ensure(s.passed() && s.cases == 200, || s.to_string())?;
    let checks: usize = s.checks.values().sum();
    Ok(format!("200 cases, {checks} checks, {} skipped", s.skipped))
}

fn ac7(fx: &[Fixture]) -> Outcome {
    let cfg = PropConfig { cases: 100, ..PropConfig::default() };
    let a = congruence::conservativity(&cfg);
    ensure(a.pairs == 100 && a.disagreements.is_empty(), || format!("{:?}", a.disagreements))?;
    let ccs: Vec<&Term> = fx.iter().flat_map(|f| &f.terms).filter(|t| t.is_ccs()).collect();
    let mut pairs = 0;
    for (i, x) in ccs.iter().enumerate() {
        for y in &ccs[i..] {
            let lhs = ccs_equal(x, y, DEFAULT_BOUND).map_err(|e| e.to_string())?;
            let rhs = check_equal(x, y, DEFAULT_BOUND).map_err(|e| e.to_string())?.equal;
            ensure(lhs == rhs, || format!("{x} vs {y}: ccs {lhs}, rccs {rhs}"))?;
            pairs += 1;
        }
    }
    Ok(format!("100 random pairs ({} equal) and {pairs} fixture pairs agree", a.equal))
}

fn ac8(fx: &[Fixture]) -> Outcome {
    let mut rng = gen::rng(8);
    let mut joins = 0;
    for f in fx.iter().filter(|f| f.lts.len() <= DEFAULT_ORACLE_BOUND) {
        let passing = passing_partitions(&f.lts, DEFAULT_ORACLE_BOUND).map_err(|e| e.to_string())?;
        for _ in 0..50 {
            let x = &passing[rng.random_range(0..passing.len())];
            let y = &passing[rng.random_range(0..passing.len())];
            let j = x.join(y);
            let ok = is_branching_bisim(&f.lts, &j, DEFAULT_ORACLE_BOUND).map_err(|e| e.to_string())?;
            ensure(ok, || format!("{}: join of {:?} and {:?} fails", f.name, x.blocks(), y.blocks()))?;
            joins += 1;
        }
    }
    Ok(format!("{joins} joins pass"))
}

fn ac9() -> Outcome {
    let runs: Vec<Vec<&str>> = vec![
        vec!["check", "-e", H, "-e", E],
        vec!["check", "-e", OMEGA_A, "-e", OMEGA_HALF_A, "--format", "json"],
        vec!["lts", "-e", PROB_RING, "--format", "json"],
        vec!["lts", "-e", PROB_RING, "--format", "dot"],
        vec!["lts", "-e", "a.b | 'a", "--format", "text"],
        vec!["minimize", "-e", H, "-e", E, "--format", "json"],
        vec!["minimize", "-e", G, "--format", "dot"],
        vec!["witness", "-e", OMEGA_HALF_A, "--label", "a", "--into", "0"],
        vec!["witness", "-e", PROB_RING, "--q", "1/2", "--into", "a1", "--format", "json"],
        vec!["witness", "-e", OMEGA_A, "--divergence", "--format", "dot"],
        vec!["diverge", "-e", OMEGA_HALF],
        vec!["oracle", "-e", "tau.a", "-e", "a"],
        vec!["proptest", "--seed", "7", "--cases", "10"],
        vec!["proptest", "--seed", "7", "--cases", "10", "--ccs"],
    ];
    for args in &runs {
        let go = || Command::new(env!("CARGO_BIN_EXE_rccs")).args(args).output().map_err(|e| e.to_string());
        let (x, y) = (go()?, go()?);
        ensure(x == y, || format!("rccs {} differs between runs", args.join(" ")))?;
        ensure(!x.stdout.is_empty(), || {
            format!("rccs {} printed nothing: {}", args.join(" "), String::from_utf8_lossy(&x.stderr))
        })?;
    }
    Ok(format!("{} invocations byte-identical", runs.len()))
}

#[test]
fn acceptance() {
    let fx = fixtures();
    let criteria: [(&str, &dyn Fn() -> Outcome); 9] = [
        ("equalities", &ac1),
        ("inequalities", &ac2),
        ("witness trees have mass one", &|| ac3(&fx)),
        ("finite mass converges", &ac4),
        ("refine matches the oracle", &|| ac5(&fx)),
        ("congruence", &ac6),
        ("conservativity", &|| ac7(&fx)),
        ("joins of bisimulations", &|| ac8(&fx)),
        ("determinism", &ac9),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("AC{} PASS {name}: {detail}", i + 1),
            Err(why) => {
                println!("AC{} FAIL {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
