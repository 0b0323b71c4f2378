//! Seeded random terms and transition systems.
//!
//! Terms are kept small so their state spaces stay oracle-sized: nesting
//! depth at most 3, at most two parallel components, channels `a`, `b`, `c`,
//! probabilities drawn from {1/2, 1/3, 2/3, 1/4, 3/4}.

use rand::seq::IndexedRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rccs_core::semantics::{Action, Bundle, Lts};
use rccs_core::syntax::{Name, Prefix, Term};
use rccs_core::Rational;

pub const CHANNELS: [&str; 3] = ["a", "b", "c"];
const PROBS: [(i128, i128); 5] = [(1, 2), (1, 3), (2, 3), (1, 4), (3, 4)];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub depth: u32,
    pub random: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { depth: 3, random: true }
    }
}

pub fn prob(rng: &mut impl RngCore) -> Rational {
    let (n, d) = *PROBS.choose(rng).expect("nonempty");
    Rational::new(n, d).expect("valid")
}

pub fn prefix(rng: &mut impl RngCore, allow_tau: bool) -> Prefix {
    let c = Name::new(*CHANNELS.choose(rng).expect("nonempty"));
    match rng.random_range(0..if allow_tau { 3 } else { 2 }) {
        0 => Prefix::Input(c),
        1 => Prefix::Output(c),
        _ => Prefix::Tau,
    }
}

struct Gen<'a, R> {
    rng: &'a mut R,
    cfg: GenConfig,
    vars: Vec<Name>,
}

impl<R: RngCore> Gen<'_, R> {
    /// A continuation right under a prefix: may be a bound variable.
    fn cont(&mut self, depth: u32) -> Term {
        if !self.vars.is_empty() && self.rng.random_bool(0.3) {
            return Term::Var(self.vars.choose(self.rng).expect("nonempty").clone());
        }
        self.term(depth, true)
    }

    fn choice(&mut self, depth: u32) -> Term {
        let n = self.rng.random_range(1..=2);
        let branches = (0..n)
            .map(|_| {
                let p = prefix(self.rng, true);
                let k = if depth == 0 { Term::nil() } else { self.cont(depth - 1) };
                (p, k)
            })
            .collect();
        Term::Choice(branches)
    }

    fn random(&mut self, depth: u32) -> Term {
        let p = prob(self.rng);
        let d = depth.saturating_sub(1);
        Term::Random(vec![(p, self.cont(d)), (Rational::ONE - p, self.cont(d))])
    }

    fn term(&mut self, depth: u32, allow_par: bool) -> Term {
        if depth == 0 {
            return if self.rng.random_bool(0.3) { Term::nil() } else { self.choice(0) };
        }
        let kinds: &[u8] = match (self.cfg.random, allow_par) {
            (true, true) => &[0, 0, 1, 1, 2, 3, 4, 4],
            (true, false) => &[0, 0, 1, 1, 3, 4, 4],
            (false, true) => &[0, 0, 0, 2, 3, 4, 4],
            (false, false) => &[0, 0, 0, 3, 4, 4],
        };
        match *kinds.choose(self.rng).expect("nonempty") {
            0 => self.choice(depth),
            1 => self.random(depth),
            2 => {
                let l = self.term(depth - 1, false);
                let r = self.term(depth - 1, false);
                Term::par(l, r)
            }
            3 => {
                let c = *CHANNELS.choose(self.rng).expect("nonempty");
                let body = self.term(depth - 1, allow_par);
                Term::restrict(c, body)
            }
            _ => {
                let x = Name::new(format!("X{}", self.vars.len()));
                self.vars.push(x.clone());
                let body = if self.cfg.random && self.rng.random_bool(0.4) {
                    self.random(depth)
                } else {
                    self.choice(depth)
                };
                self.vars.pop();
                Term::Fix(x, Box::new(body))
            }
        }
    }
}

/// A closed, well-formed term.
pub fn term(rng: &mut impl RngCore, cfg: GenConfig) -> Term {
    Gen { rng, cfg, vars: Vec::new() }.term(cfg.depth, true)
}

/// A guarded summand `alpha.T`.
pub fn summand(rng: &mut impl RngCore, cfg: GenConfig) -> Term {
    let p = prefix(rng, true);
    let k = term(rng, GenConfig { depth: cfg.depth.saturating_sub(1), ..cfg });
    Term::prefixed(p, k)
}

/// A transition system with `n` states over actions `a`, `'a`, `b`.
pub fn lts(rng: &mut impl RngCore, n: usize) -> Lts {
    let actions = [Action::Input(Name::new("a")), Action::Output(Name::new("a")), Action::Input(Name::new("b"))];
    let bundles = (0..n)
        .map(|_| {
            let k = rng.random_range(0..=3);
            (0..k)
                .map(|_| match rng.random_range(0..4) {
                    0 => Bundle::Visible(actions.choose(rng).expect("nonempty").clone(), rng.random_range(0..n)),
                    1 => Bundle::Tau(rng.random_range(0..n)),
                    _ => {
                        let p = prob(rng);
                        Bundle::Random(vec![(p, rng.random_range(0..n)), (Rational::ONE - p, rng.random_range(0..n))])
                    }
                })
                .collect()
        })
        .collect();
    Lts::new(bundles).expect("generated bundles are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rccs_core::syntax::{parse, validate};

    #[test]
    fn terms_are_closed_and_well_formed() {
        let mut r = rng(7);
        for _ in 0..500 {
            let t = term(&mut r, GenConfig::default());
            assert!(t.is_closed());
            validate(&t).unwrap();
            assert_eq!(parse(&t.to_string()).unwrap(), t);
        }
    }

    #[test]
    fn ccs_mode_has_no_random_choice() {
        let mut r = rng(8);
        for _ in 0..200 {
            assert!(term(&mut r, GenConfig { depth: 3, random: false }).is_ccs());
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a: Vec<Term> = (0..20).map({
            let mut r = rng(1);
            move |_| term(&mut r, GenConfig::default())
        }).collect();
        let b: Vec<Term> = (0..20).map({
            let mut r = rng(1);
            move |_| term(&mut r, GenConfig::default())
        }).collect();
        assert_eq!(a, b);
    }
}
