use proptest::prelude::*;
use rccs_core::semantics::step;
use rccs_core::syntax::{alpha_normalize, free_vars, parse, substitute, validate, Name, Prefix, Term};
use rccs_core::Rational;

fn r(n: i128, d: i128) -> Rational {
    Rational::new(n, d).unwrap()
}

fn arb_prefix() -> impl Strategy<Value = Prefix> {
    prop_oneof![
        prop::sample::select(vec!["a", "b", "c"]).prop_map(|c| Prefix::Input(Name::new(c))),
        prop::sample::select(vec!["a", "b"]).prop_map(|c| Prefix::Output(Name::new(c))),
        Just(Prefix::Tau),
    ]
}

/// Terms whose variables occur only right under a prefix or random branch,
/// so every fixpoint is guarded.
fn arb_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::nil()),
        arb_prefix().prop_map(|p| Term::Choice(vec![(p, Term::nil())])),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        let cont = prop_oneof![
            3 => inner.clone(),
            1 => prop::sample::select(vec!["X", "Y"]).prop_map(Term::var),
        ];
        let dists = prop::sample::select(vec![
            vec![r(1, 2), r(1, 2)],
            vec![r(1, 3), r(2, 3)],
            vec![r(1, 4), r(1, 4), r(1, 2)],
        ]);
        prop_oneof![
            prop::collection::vec((arb_prefix(), cont.clone()), 1..3).prop_map(Term::Choice),
            (dists, prop::collection::vec(cont, 3))
                .prop_map(|(ps, ks)| Term::Random(ps.into_iter().zip(ks).collect())),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::par(a, b)),
            (prop::sample::select(vec!["a", "b", "d"]), inner.clone()).prop_map(|(c, t)| Term::restrict(c, t)),
            (prop::sample::select(vec!["X", "Y"]), inner).prop_map(|(x, t)| Term::fix(x, t)),
        ]
    })
}

/// Renames every binder to a fresh name, consistently.
fn rename_binders(t: &Term, k: &mut usize) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::Choice(bs) => Term::Choice(bs.iter().map(|(p, c)| (p.clone(), rename_binders(c, k))).collect()),
        Term::Random(bs) => Term::Random(bs.iter().map(|(p, c)| (*p, rename_binders(c, k))).collect()),
        Term::Par(a, b) => Term::par(rename_binders(a, k), rename_binders(b, k)),
        Term::Restrict(c, body) => {
            *k += 1;
            let fresh = Name::new(format!("z{k}"));
            let body = rccs_core::syntax::rename_channel(body, c, &fresh);
            Term::Restrict(fresh, Box::new(rename_binders(&body, k)))
        }
        Term::Fix(x, body) => {
            *k += 1;
            let fresh = Term::var(format!("Z{k}").as_str());
            let body = substitute(body, x, &fresh);
            let Term::Var(name) = fresh else { unreachable!() };
            Term::Fix(name, Box::new(rename_binders(&body, k)))
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn print_parse_round_trip(t in arb_term()) {
        prop_assume!(validate(&t).is_ok());
        let text = t.to_string();
        let back = parse(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn alpha_normalize_is_idempotent(t in arb_term()) {
        let n = alpha_normalize(&t);
        prop_assert_eq!(alpha_normalize(&n), n);
    }

    #[test]
    fn alpha_normalize_ignores_binder_names(t in arb_term()) {
        let renamed = rename_binders(&t, &mut 0);
        prop_assert_eq!(alpha_normalize(&renamed), alpha_normalize(&t));
    }

    #[test]
    fn step_commutes_with_alpha_normalize(t in arb_term()) {
        prop_assume!(validate(&t).is_ok() && free_vars(&t).is_empty());
        let norm = |bs: Vec<rccs_core::semantics::Bundle<Term>>| -> Vec<_> {
            bs.into_iter().map(|b| b.map(|x| alpha_normalize(&x))).collect()
        };
        prop_assert_eq!(norm(step(&alpha_normalize(&t)).unwrap()), norm(step(&t).unwrap()));
    }

    #[test]
    fn random_bundles_are_distributions(t in arb_term()) {
        prop_assume!(validate(&t).is_ok() && free_vars(&t).is_empty());
        for b in step(&t).unwrap() {
            if let rccs_core::semantics::Bundle::Random(bs) = b {
                prop_assert!(bs.len() >= 2);
                prop_assert_eq!(bs.iter().map(|(p, _)| *p).sum::<Rational>(), Rational::ONE);
            }
        }
    }

    #[test]
    fn ccs_terms_have_no_random_bundles(t in arb_term()) {
        prop_assume!(t.is_ccs() && validate(&t).is_ok() && free_vars(&t).is_empty());
        prop_assert!(step(&t).unwrap().iter().all(|b| !b.is_random()));
    }
}

#[test]
fn substitution_examples() {
    let x = Name::new("X");
    assert_eq!(substitute(&Term::var("X"), &x, &Term::nil()), Term::nil());
    let omega = parse("mu X. (tau.a.0 + tau.X)").unwrap();
    let Term::Fix(_, body) = &omega else { panic!() };
    assert_eq!(substitute(body, &x, &omega), Term::Choice(vec![(Prefix::Tau, parse("a").unwrap()), (Prefix::Tau, omega.clone())]));
    let bound = parse("mu X. a.X").unwrap();
    assert_eq!(substitute(&bound, &x, &parse("b").unwrap()), bound);
}

#[test]
fn free_vars_examples() {
    assert_eq!(free_vars(&Term::var("X")).into_iter().collect::<Vec<_>>(), vec![Name::new("X")]);
    assert!(free_vars(&parse("mu X. (tau.a.0 + tau.X)").unwrap()).is_empty());
    let t = Term::par(Term::var("X"), parse("mu X. a.X").unwrap());
    assert_eq!(free_vars(&t).into_iter().collect::<Vec<_>>(), vec![Name::new("X")]);
}
