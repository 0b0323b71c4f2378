//! Seeded congruence runner.
//!
//! Each case builds an equal pair `(A, B)`, either a known equation or a
//! term and an equality-preserving rewrite of it, then checks that every
//! context keeps them equal, that refinement agrees with the brute-force
//! oracle on small joint spaces, and that the CCS checker agrees on
//! random-free pairs. Failures are shrunk by delta debugging.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::IndexedRandom;
use rand::{Rng, RngCore};
use rccs_core::equivalence::{check_equal, refine};
use rccs_core::oracle::{ccs_equal, coarsest_by_enumeration};
use rccs_core::semantics::{build_joint_space, SemanticsError};
use rccs_core::syntax::{free_channels, parse, substitute, Name, Prefix, Term};
use rccs_core::Rational;

use crate::gen::{self, GenConfig, CHANNELS};

#[derive(Clone, Copy, Debug)]
pub struct PropConfig {
    pub seed: u64,
    pub cases: usize,
    /// State bound for every equality check.
    pub bound: usize,
    pub oracle_bound: usize,
    pub depth: u32,
}

impl Default for PropConfig {
    fn default() -> Self {
        PropConfig { seed: 42, cases: 200, bound: 2000, oracle_bound: 8, depth: 2 }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Property {
    /// The rewrite that produced `B` really gives an equal term.
    Rewrite,
    ParRight,
    ParLeft,
    Restrict,
    Sum,
    Random,
    Oracle,
    Conservativity,
}

impl Property {
    pub const ALL: [Property; 8] = [
        Property::Rewrite,
        Property::ParRight,
        Property::ParLeft,
        Property::Restrict,
        Property::Sum,
        Property::Random,
        Property::Oracle,
        Property::Conservativity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Rewrite => "rewrite",
            Property::ParRight => "A|C = B|C",
            Property::ParLeft => "C|A = C|B",
            Property::Restrict => "(new c)A = (new c)B",
            Property::Sum => "x.A+g = x.B+g",
            Property::Random => "p.A (+) q.D = p.B (+) q.D",
            Property::Oracle => "refine = oracle",
            Property::Conservativity => "ccs = rccs",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Failure {
    pub case: usize,
    pub property: Property,
    pub left: Term,
    pub right: Term,
    pub detail: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "case {}: {} failed", self.case, self.property.name())?;
        writeln!(f, "  left:  {}", self.left)?;
        writeln!(f, "  right: {}", self.right)?;
        write!(f, "  {}", self.detail)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Summary {
    pub cases: usize,
    /// Candidate cases dropped because a state space hit the bound.
    pub skipped: usize,
    pub checks: BTreeMap<Property, usize>,
    pub failures: Vec<Failure>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "cases: {}", self.cases)?;
        writeln!(f, "skipped: {}", self.skipped)?;
        for p in Property::ALL {
            writeln!(f, "{}: {} checks", p.name(), self.checks.get(&p).copied().unwrap_or(0))?;
        }
        for fail in &self.failures {
            writeln!(f, "{fail}")?;
        }
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Equations the checker must accept.
pub const KNOWN_PAIRS: [(&str, &str); 6] = [
    ("mu X. ((1/2)tau.a (+) (1/2)tau.X)", "a"),
    ("mu X. ((1/3)tau.(a + tau.X) (+) (2/3)tau.X)", "a + tau.mu X. ((1/3)tau.(a + tau.X) (+) (2/3)tau.X)"),
    ("mu X. ((1/2)tau.(a + tau.X) (+) (1/2)tau.(b + tau.X))", "mu X. (a + b + tau.X)"),
    ("mu X. ((1/2)tau.(a + tau.X) (+) (1/2)tau.(b + tau.X))", "a + tau.mu X. ((1/2)tau.(a + tau.X) (+) (1/2)tau.(b + tau.X))"),
    ("tau.a", "a"),
    ("mu X. (tau.X + tau.b)", "mu X. (tau.tau.X + tau.b)"),
];

fn fresh_var(t: &Term) -> Name {
    let s = t.to_string();
    (0..).map(|i| format!("Z{i}")).find(|n| !s.contains(n.as_str())).map(Name::new).expect("unbounded")
}

/// One equality-preserving rewrite of the whole term.
fn rewrite_top(rng: &mut impl RngCore, t: &Term, random: bool) -> Term {
    let p = gen::prob(rng);
    let pick = rng.random_range(0..9);
    let pick = if !random && (pick == 3 || pick == 4) { 2 } else { pick };
    match pick {
        0 => Term::par(t.clone(), Term::nil()),
        1 => Term::par(Term::nil(), t.clone()),
        2 => Term::tau(t.clone()),
        3 => Term::Random(vec![(p, t.clone()), (Rational::ONE - p, t.clone())]),
        4 => {
            let z = fresh_var(t);
            Term::Fix(z.clone(), Box::new(Term::Random(vec![(p, t.clone()), (Rational::ONE - p, Term::Var(z))])))
        }
        5 => match t {
            Term::Fix(x, body) => substitute(body, x, t),
            _ => Term::restrict("d", t.clone()),
        },
        6 => match t {
            Term::Choice(bs) if !bs.is_empty() => {
                let mut bs = bs.clone();
                let i = rng.random_range(0..bs.len());
                bs.insert(i, bs[i].clone());
                Term::Choice(bs)
            }
            _ => Term::tau(t.clone()),
        },
        7 => match t {
            Term::Par(l, r) => Term::Par(r.clone(), l.clone()),
            _ => Term::par(t.clone(), Term::nil()),
        },
        _ if !free_channels(t).contains(&Name::new("d")) => Term::restrict("d", t.clone()),
        _ => t.clone(),
    }
}

/// Rewrites the whole term or one subterm in a term position.
fn rewrite(rng: &mut impl RngCore, t: &Term, random: bool) -> Term {
    if !t.is_closed() || rng.random_bool(0.5) {
        return if t.is_closed() { rewrite_top(rng, t, random) } else { rewrite_open(rng, t, random) };
    }
    rewrite_inside(rng, t, random)
}

/// Rewrites that are sound for open terms too.
fn rewrite_open(rng: &mut impl RngCore, t: &Term, random: bool) -> Term {
    match rng.random_range(0..if random { 3 } else { 2 }) {
        0 => Term::par(t.clone(), Term::nil()),
        1 => Term::tau(t.clone()),
        _ => {
            let p = gen::prob(rng);
            Term::Random(vec![(p, t.clone()), (Rational::ONE - p, t.clone())])
        }
    }
}

fn rewrite_inside(rng: &mut impl RngCore, t: &Term, random: bool) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::Choice(bs) if bs.is_empty() => rewrite_top(rng, t, random),
        Term::Choice(bs) => {
            let mut bs = bs.clone();
            let i = rng.random_range(0..bs.len());
            bs[i].1 = rewrite(rng, &bs[i].1, random);
            Term::Choice(bs)
        }
        Term::Random(bs) => {
            let mut bs = bs.clone();
            let i = rng.random_range(0..bs.len());
            bs[i].1 = rewrite(rng, &bs[i].1, random);
            Term::Random(bs)
        }
        Term::Par(l, r) => {
            if rng.random_bool(0.5) {
                Term::Par(Box::new(rewrite(rng, l, random)), r.clone())
            } else {
                Term::Par(l.clone(), Box::new(rewrite(rng, r, random)))
            }
        }
        Term::Restrict(c, body) => Term::Restrict(c.clone(), Box::new(rewrite(rng, body, random))),
        Term::Fix(x, body) => Term::Fix(x.clone(), Box::new(rewrite_inside(rng, body, random))),
    }
}

/// The contexts applied to both sides of a case.
#[derive(Clone, Debug)]
struct Contexts {
    c: Term,
    channel: &'static str,
    prefix: Prefix,
    g: Term,
    p: Rational,
    d: Term,
}

impl Contexts {
    fn generate(rng: &mut impl RngCore, depth: u32) -> Self {
        let cfg = GenConfig { depth, random: true };
        Contexts {
            c: gen::term(rng, cfg),
            channel: CHANNELS.choose(rng).expect("nonempty"),
            prefix: gen::prefix(rng, true),
            g: gen::summand(rng, cfg),
            p: gen::prob(rng),
            d: gen::term(rng, GenConfig { depth: depth.saturating_sub(1), ..cfg }),
        }
    }

    fn apply(&self, prop: Property, t: &Term) -> Term {
        match prop {
            Property::ParRight => Term::par(t.clone(), self.c.clone()),
            Property::ParLeft => Term::par(self.c.clone(), t.clone()),
            Property::Restrict => Term::restrict(self.channel, t.clone()),
            Property::Sum => Term::sum([Term::prefixed(self.prefix.clone(), t.clone()), self.g.clone()]),
            Property::Random => {
                Term::Random(vec![(self.p, t.clone()), (Rational::ONE - self.p, self.d.clone())])
            }
            _ => t.clone(),
        }
    }

    fn terms(&self) -> Vec<Term> {
        vec![self.c.clone(), self.g.clone(), self.d.clone()]
    }

    fn with_terms(&self, ts: &[Term]) -> Self {
        Contexts { c: ts[0].clone(), g: ts[1].clone(), d: ts[2].clone(), ..self.clone() }
    }
}

#[derive(Debug)]
enum Outcome {
    Pass,
    Fail(String),
    Skip,
}

fn equal(a: &Term, b: &Term, cfg: &PropConfig) -> Result<bool, SemanticsError> {
    check_equal(a, b, cfg.bound).map(|v| v.equal)
}

fn check(prop: Property, a: &Term, b: &Term, ctx: &Contexts, cfg: &PropConfig) -> Outcome {
    match prop {
        Property::Oracle => {
            let Ok(space) = build_joint_space(&[a.clone(), b.clone()], cfg.oracle_bound) else {
                return Outcome::Skip;
            };
            match coarsest_by_enumeration(&space.lts, cfg.oracle_bound) {
                Ok(c) if c.partition == refine(&space.lts) => Outcome::Pass,
                Ok(c) => Outcome::Fail(format!(
                    "refine {:?} vs oracle {:?}",
                    refine(&space.lts).blocks(),
                    c.partition.blocks()
                )),
                Err(e) => Outcome::Fail(e.to_string()),
            }
        }
        Property::Conservativity => {
            if !a.is_ccs() || !b.is_ccs() {
                return Outcome::Skip;
            }
            match (ccs_equal(a, b, cfg.bound), equal(a, b, cfg)) {
                (Ok(x), Ok(y)) if x == y => Outcome::Pass,
                (Ok(x), Ok(y)) => Outcome::Fail(format!("ccs says {x}, rccs says {y}")),
                _ => Outcome::Skip,
            }
        }
        _ => {
            let (l, r) = (ctx.apply(prop, a), ctx.apply(prop, b));
            match equal(&l, &r, cfg) {
                Ok(true) => Outcome::Pass,
                Ok(false) => Outcome::Fail(format!("{l}  !=  {r}")),
                Err(_) => Outcome::Skip,
            }
        }
    }
}

fn fails(prop: Property, a: &Term, b: &Term, ctx: &Contexts, cfg: &PropConfig) -> bool {
    let pair_ok = prop == Property::Rewrite || matches!(equal(a, b, cfg), Ok(true));
    let failing = match prop {
        Property::Rewrite => matches!(equal(a, b, cfg), Ok(false)),
        _ => matches!(check(prop, a, b, ctx, cfg), Outcome::Fail(_)),
    };
    pair_ok && failing
}

/// Closed terms one step smaller than `t`.
fn smaller(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    if !t.is_nil() {
        out.push(Term::nil());
    }
    match t {
        Term::Var(_) => {}
        Term::Choice(bs) => {
            for i in 0..bs.len() {
                if bs.len() > 1 {
                    let mut fewer = bs.clone();
                    fewer.remove(i);
                    out.push(Term::Choice(fewer));
                }
                for k in smaller(&bs[i].1) {
                    let mut v = bs.clone();
                    v[i].1 = k;
                    out.push(Term::Choice(v));
                }
            }
        }
        Term::Random(bs) => {
            for (i, (_, k)) in bs.iter().enumerate() {
                out.push(k.clone());
                for k2 in smaller(k) {
                    let mut v = bs.clone();
                    v[i].1 = k2;
                    out.push(Term::Random(v));
                }
            }
        }
        Term::Par(l, r) => {
            out.push((**l).clone());
            out.push((**r).clone());
            out.extend(smaller(l).into_iter().map(|k| Term::Par(Box::new(k), r.clone())));
            out.extend(smaller(r).into_iter().map(|k| Term::Par(l.clone(), Box::new(k))));
        }
        Term::Restrict(c, body) => {
            out.push((**body).clone());
            out.extend(smaller(body).into_iter().map(|k| Term::Restrict(c.clone(), Box::new(k))));
        }
        Term::Fix(x, body) => {
            out.extend(smaller(body).into_iter().map(|k| Term::Fix(x.clone(), Box::new(k))));
        }
    }
    out.retain(|k| k.is_closed() && rccs_core::syntax::validate(k).is_ok());
    out
}

/// Greedy delta debugging over all terms of a failing case.
fn shrink(prop: Property, a: &Term, b: &Term, ctx: &Contexts, cfg: &PropConfig) -> (Term, Term, Contexts) {
    let mut terms = vec![a.clone(), b.clone()];
    terms.extend(ctx.terms());
    let mut ctx = ctx.clone();
    let sum_ok = |g: &Term| matches!(g, Term::Choice(bs) if bs.len() == 1);
    let mut progress = true;
    while progress {
        progress = false;
        for i in 0..terms.len() {
            for cand in smaller(&terms[i]) {
                if i == 3 && !sum_ok(&cand) {
                    continue;
                }
                let mut next = terms.clone();
                next[i] = cand;
                let c2 = ctx.with_terms(&next[2..]);
                if fails(prop, &next[0], &next[1], &c2, cfg) {
                    terms = next;
                    ctx = c2;
                    progress = true;
                    break;
                }
            }
        }
    }
    (terms[0].clone(), terms[1].clone(), ctx)
}

fn case_seed(seed: u64, i: u64) -> u64 {
    seed ^ i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Draws an equal pair whose joint space fits the bound.
fn draw_pair(rng: &mut impl RngCore, cfg: &PropConfig, random: bool) -> Option<(Term, Term)> {
    let (a, b) = if random && rng.random_bool(0.25) {
        let (l, r) = KNOWN_PAIRS.choose(rng).expect("nonempty");
        (parse(l).expect("valid"), parse(r).expect("valid"))
    } else {
        let a = gen::term(rng, GenConfig { depth: cfg.depth, random });
        let mut b = rewrite(rng, &a, random);
        if rng.random_bool(0.3) {
            b = rewrite(rng, &b, random);
        }
        (a, b)
    };
    let (a, b) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
    build_joint_space(&[a.clone(), b.clone()], cfg.bound).ok().map(|_| (a, b))
}

pub fn run(cfg: &PropConfig) -> Summary {
    run_filtered(cfg, true)
}

/// Random-free pairs only.
pub fn run_ccs(cfg: &PropConfig) -> Summary {
    run_filtered(cfg, false)
}

fn run_filtered(cfg: &PropConfig, random: bool) -> Summary {
    let mut summary = Summary::default();
    let mut attempt = 0u64;
    while summary.cases < cfg.cases {
        let mut rng = gen::rng(case_seed(cfg.seed, attempt));
        attempt += 1;
        let Some((a, b)) = draw_pair(&mut rng, cfg, random) else {
            summary.skipped += 1;
            continue;
        };
        let ctx = Contexts::generate(&mut rng, cfg.depth);
        let ctx = if random { ctx } else { ccs_only(ctx, &mut rng) };
        let case = summary.cases;
        summary.cases += 1;

        match equal(&a, &b, cfg) {
            Ok(true) => *summary.checks.entry(Property::Rewrite).or_default() += 1,
            _ => {
                let (l, r, _) = shrink(Property::Rewrite, &a, &b, &ctx, cfg);
                summary.failures.push(Failure {
                    case,
                    property: Property::Rewrite,
                    left: l,
                    right: r,
                    detail: "rewrite produced an unequal term".into(),
                });
                continue;
            }
        }
        for prop in &Property::ALL[1..] {
            match check(*prop, &a, &b, &ctx, cfg) {
                Outcome::Pass => *summary.checks.entry(*prop).or_default() += 1,
                Outcome::Skip => {}
                Outcome::Fail(_) => {
                    let (l, r, c) = shrink(*prop, &a, &b, &ctx, cfg);
                    let detail = match check(*prop, &l, &r, &c, cfg) {
                        Outcome::Fail(d) => d,
                        _ => String::new(),
                    };
                    summary.failures.push(Failure { case, property: *prop, left: l, right: r, detail });
                }
            }
        }
    }
    summary
}

#[derive(Clone, Debug, Default)]
pub struct Agreement {
    pub pairs: usize,
    pub equal: usize,
    pub skipped: usize,
    pub disagreements: Vec<(Term, Term)>,
}

/// Random-free pairs, about half of them equal by construction, compared
/// under both checkers.
pub fn conservativity(cfg: &PropConfig) -> Agreement {
    let mut out = Agreement::default();
    let mut attempt = 0u64;
    while out.pairs < cfg.cases {
        let mut rng = gen::rng(case_seed(cfg.seed, attempt));
        attempt += 1;
        let gcfg = GenConfig { depth: cfg.depth, random: false };
        let a = gen::term(&mut rng, gcfg);
        let b = match rng.random_range(0..3) {
            0 => gen::term(&mut rng, gcfg),
            1 => rewrite(&mut rng, &a, false),
            _ => {
                let once = rewrite(&mut rng, &a, false);
                rewrite(&mut rng, &once, false)
            }
        };
        match (ccs_equal(&a, &b, cfg.bound), equal(&a, &b, cfg)) {
            (Ok(x), Ok(y)) => {
                out.pairs += 1;
                out.equal += usize::from(y);
                if x != y {
                    out.disagreements.push((a, b));
                }
            }
            _ => out.skipped += 1,
        }
    }
    out
}

fn ccs_only(ctx: Contexts, rng: &mut impl RngCore) -> Contexts {
    let cfg = GenConfig { depth: 2, random: false };
    Contexts { c: gen::term(rng, cfg), g: gen::summand(rng, cfg), d: gen::term(rng, cfg), ..ctx }
}
