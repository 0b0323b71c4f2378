//! JSON and DOT renderings. Every JSON document carries
//! `"format": "rccs-lab/1"`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rccs_core::equivalence::{Evidence, Partition, SignatureItem};
use rccs_core::oracle::Coarsest;
use rccs_core::semantics::{Bundle, Lts, StateId, StateSpace};
use rccs_core::witness::{Decision, NodeKind, Purpose, TreeTruncation, WitnessPolicy};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const FORMAT: &str = "rccs-lab/1";

#[derive(Serialize)]
struct BranchJson {
    p: String,
    target: StateId,
}

#[derive(Serialize)]
struct BundleJson {
    source: StateId,
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    action: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<StateId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    branches: Option<Vec<BranchJson>>,
}

fn bundles_json(lts: &Lts) -> Vec<BundleJson> {
    let mut out = Vec::new();
    for s in lts.states() {
        for b in lts.bundles(s) {
            out.push(match b {
                Bundle::Visible(a, t) => BundleJson {
                    source: s,
                    kind: "visible",
                    action: Some(a.to_string()),
                    target: Some(*t),
                    branches: None,
                },
                Bundle::Tau(t) => BundleJson { source: s, kind: "tau", action: None, target: Some(*t), branches: None },
                Bundle::Random(bs) => BundleJson {
                    source: s,
                    kind: "random",
                    action: None,
                    target: None,
                    branches: Some(bs.iter().map(|(p, t)| BranchJson { p: p.to_string(), target: *t }).collect()),
                },
            });
        }
    }
    out
}

/// A transition system whose states are labelled by `labels`.
pub fn lts_json(lts: &Lts, labels: &[String], roots: &[StateId]) -> Value {
    let states: Vec<Value> = labels.iter().enumerate().map(|(id, term)| json!({"id": id, "term": term})).collect();
    json!({
        "format": FORMAT,
        "states": states,
        "root": roots.first(),
        "roots": roots,
        "bundles": bundles_json(lts),
    })
}

pub fn space_json(space: &StateSpace) -> Value {
    let labels: Vec<String> = space.states.iter().map(ToString::to_string).collect();
    lts_json(&space.lts, &labels, &space.roots)
}

/// SHA-256 of the space's canonical JSON, hex encoded.
pub fn space_hash(space: &StateSpace) -> String {
    let text = serde_json::to_string(&space_json(space)).expect("serializable");
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn partition_json(p: &Partition) -> Value {
    json!({"format": FORMAT, "blocks": p.blocks()})
}

pub fn item_kind(item: &SignatureItem) -> &'static str {
    match item {
        SignatureItem::Visible(..) => "visible",
        SignatureItem::Tau(_) => "tau",
        SignatureItem::Q(..) => "q",
        SignatureItem::Divergent => "divergence",
    }
}

pub fn evidence_json(e: &Evidence) -> Value {
    let block = |c: usize| e.partition.block(c).to_vec();
    let detail = match &e.item {
        SignatureItem::Visible(a, c) => json!({"action": a.to_string(), "target_block": block(*c)}),
        SignatureItem::Tau(c) => json!({"target_block": block(*c)}),
        SignatureItem::Q(q, c) => json!({"q": q.to_string(), "target_block": block(*c)}),
        SignatureItem::Divergent => json!({}),
    };
    json!({
        "format": FORMAT,
        "kind": item_kind(&e.item),
        "holder": e.holder,
        "round": e.round,
        "detail": detail,
    })
}

fn decision_str(d: &Decision) -> String {
    match d {
        Decision::Stop => "stop".into(),
        Decision::TakeTau(i) => format!("tau:{i}"),
        Decision::TakeRandom(i) => format!("random:{i}"),
    }
}

pub fn purpose_json(p: &Purpose) -> Value {
    match p {
        Purpose::Ell { label, target } => json!({"kind": "ell", "label": label.to_string(), "target": target}),
        Purpose::Q { q, target } => json!({"kind": "q", "q": q.to_string(), "target": target}),
        Purpose::Divergence => json!({"kind": "divergence"}),
    }
}

pub fn policy_json(policy: &WitnessPolicy) -> Value {
    let decisions: Vec<Value> =
        policy.decide.iter().map(|(s, d)| json!({"state": s, "action": decision_str(d)})).collect();
    json!({
        "format": FORMAT,
        "root": policy.root,
        "decisions": decisions,
        "purpose": purpose_json(&policy.purpose),
    })
}

pub fn golden_json(space: &StateSpace, c: &Coarsest) -> Value {
    json!({
        "format": FORMAT,
        "space_hash": space_hash(space),
        "coarsest_partition": c.partition.blocks(),
        "passing_count": c.passing_count,
    })
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Random bundles become a point node joined to the source by one dashed
/// arc, with one `p=n/d` edge per branch.
pub fn lts_dot(lts: &Lts, labels: &[String], roots: &[StateId]) -> String {
    let mut out = String::from("digraph lts {\n  node [shape=circle];\n");
    for (s, l) in labels.iter().enumerate() {
        let shape = if roots.contains(&s) { ", shape=doublecircle" } else { "" };
        writeln!(out, "  s{s} [label=\"{s}: {}\"{shape}];", dot_escape(l)).expect("write to string");
    }
    for s in lts.states() {
        for (i, b) in lts.bundles(s).iter().enumerate() {
            match b {
                Bundle::Visible(a, t) => {
                    writeln!(out, "  s{s} -> s{t} [label=\"{}\"];", dot_escape(&a.to_string())).expect("write")
                }
                Bundle::Tau(t) => writeln!(out, "  s{s} -> s{t} [label=\"tau\"];").expect("write"),
                Bundle::Random(bs) => {
                    writeln!(out, "  r{s}_{i} [shape=point];").expect("write");
                    writeln!(out, "  s{s} -> r{s}_{i} [style=dashed, arrowhead=none];").expect("write");
                    for (p, t) in bs {
                        writeln!(out, "  r{s}_{i} -> s{t} [label=\"p={p}\"];").expect("write");
                    }
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

pub fn space_dot(space: &StateSpace) -> String {
    let labels: Vec<String> = space.states.iter().map(ToString::to_string).collect();
    lts_dot(&space.lts, &labels, &space.roots)
}

/// Leaves are double circles; a node whose state already occurs on the path
/// from the root is drawn as an ellipsis and not expanded.
pub fn tree_dot(tree: &TreeTruncation) -> String {
    let mut out = String::from("digraph tree {\n  node [shape=circle];\n");
    fn go(tree: &TreeTruncation, i: usize, ancestors: &mut Vec<StateId>, out: &mut String) {
        let n = &tree.nodes[i];
        let repeated = ancestors.contains(&n.state);
        let attrs = if repeated {
            format!("label=\"{}...\", shape=plaintext", n.state)
        } else {
            match n.kind {
                NodeKind::Leaf => format!("label=\"{}\", shape=doublecircle", n.state),
                NodeKind::Inner => format!("label=\"{}\"", n.state),
                NodeKind::Frontier => format!("label=\"{}\", style=dotted", n.state),
            }
        };
        writeln!(out, "  n{i} [{attrs}];").expect("write");
        if repeated {
            return;
        }
        ancestors.push(n.state);
        for &c in &n.children {
            writeln!(out, "  n{i} -> n{c} [label=\"{}\"];", tree.nodes[c].prob).expect("write");
            go(tree, c, ancestors, out);
        }
        ancestors.pop();
    }
    if !tree.nodes.is_empty() {
        go(tree, 0, &mut Vec::new(), &mut out);
    }
    out.push_str("}\n");
    out
}

/// Plain-text listing of a transition system.
pub fn lts_text(lts: &Lts, labels: &[String], roots: &[StateId]) -> String {
    let mut out = String::new();
    let roots: BTreeSet<StateId> = roots.iter().copied().collect();
    for (s, l) in labels.iter().enumerate() {
        let mark = if roots.contains(&s) { "*" } else { " " };
        writeln!(out, "{mark}{s}: {l}").expect("write");
        for b in lts.bundles(s) {
            match b {
                Bundle::Visible(a, t) => writeln!(out, "    --{a}--> {t}"),
                Bundle::Tau(t) => writeln!(out, "    --tau--> {t}"),
                Bundle::Random(bs) => {
                    let parts: Vec<String> = bs.iter().map(|(p, t)| format!("{p}:{t}")).collect();
                    writeln!(out, "    ==> {{{}}}", parts.join(", "))
                }
            }
            .expect("write");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rccs_core::semantics::build_state_space;
    use rccs_core::syntax::parse;

    #[test]
    fn random_self_loop_json() {
        let sp = build_state_space(&parse("mu X. ((1/2)tau.X (+) (1/2)tau.X)").unwrap(), 10).unwrap();
        let v = space_json(&sp);
        assert_eq!(v["format"], FORMAT);
        assert_eq!(v["states"].as_array().unwrap().len(), 1);
        assert_eq!(v["bundles"][0]["kind"], "random");
        assert_eq!(v["bundles"][0]["branches"][0]["p"], "1/2");
    }

    #[test]
    fn dot_groups_random_bundles() {
        let sp = build_state_space(&parse("mu X. ((1/2)tau.a (+) (1/2)tau.X)").unwrap(), 10).unwrap();
        let dot = space_dot(&sp);
        assert_eq!(dot.matches("style=dashed").count(), 1);
        assert_eq!(dot.matches("p=1/2").count(), 2);
    }

    #[test]
    fn hash_is_stable() {
        let t = parse("a.b | 'a").unwrap();
        let a = build_state_space(&t, 100).unwrap();
        let b = build_state_space(&t, 100).unwrap();
        assert_eq!(space_hash(&a), space_hash(&b));
        assert_eq!(space_hash(&a).len(), 64);
    }
}
