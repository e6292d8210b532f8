use portstrat::corpus::arithmetic::{self, Number};
use portstrat::graph::{interface_nodes, name, LocatedGraph, NodeId, PortGraph, PortRef};
use portstrat::inets::{
    inf_strategy, isomorphic, principal_designation, validate_inet, AgentDecl, INetRuleSet, InetViolation,
};
use portstrat::strategy::{parse_strategy_unchecked, run, EngineConfig, RunOutcome};
use portstrat::text::{parse_graph_with, parse_rules};

fn arith_set() -> INetRuleSet {
    let rf = arithmetic::rule_file();
    INetRuleSet { agents: rf.agents, rules: rf.rules }
}

fn set_from(text: &str) -> INetRuleSet {
    let rf = parse_rules(text).unwrap();
    INetRuleSet { agents: rf.agents, rules: rf.rules }
}

const HEAD: &str = "SIGNATURE\nI : i_h, i_l, i_r\nS : s_p, s_a\nAGENTS\nI\narity 2\nprincipal i_h\nS\narity 1\nprincipal s_p\n";

#[test]
fn arithmetic_rules_are_interaction_rules() {
    assert_eq!(validate_inet(&arith_set()), vec![]);
}

#[test]
fn aux_to_principal_is_not_active() {
    let rs = set_from(&format!(
        "{HEAD}RULE bad\nLHS\n1 : S\n2 : S\nEDGES\n1.s_a -- 2.s_p\nRHS\nINTERFACE\n1.s_p -> WIRE 2.s_a\nM\n"
    ));
    let v = validate_inet(&rs);
    assert!(v.iter().any(|x| matches!(x, InetViolation::NotActivePair { .. })), "{v:?}");
    assert!(v.iter().any(|x| x.to_string().contains("not an active pair")));
    assert!(v.iter().all(|x| x.to_string().contains("`bad`")));
}

#[test]
fn second_rule_for_a_pair_is_rejected() {
    let rule = |n: &str| format!("RULE {n}\nLHS\n1 : S\n2 : S\nEDGES\n1.s_p -- 2.s_p\nRHS\nINTERFACE\n1.s_a -> WIRE 2.s_a\nM\n");
    let rs = set_from(&format!("{HEAD}{}{}", rule("one"), rule("two")));
    let v = validate_inet(&rs);
    assert_eq!(v.len(), 1, "{v:?}");
    assert!(v[0].to_string().contains("duplicate pair"));
    assert!(matches!(&v[0], InetViolation::DuplicatePair { rule, .. } if &**rule == "two"));
}

#[test]
fn free_port_counts_must_agree() {
    let rs = set_from(&format!("{HEAD}RULE lossy\nLHS\n1 : S\n2 : S\nEDGES\n1.s_p -- 2.s_p\nRHS\nM\n"));
    let v = validate_inet(&rs);
    assert!(matches!(v.as_slice(), [InetViolation::FreePortMismatch { lhs: 2, rhs: 0, .. }]), "{v:?}");
}

#[test]
fn designation_reads_principal_ports() {
    let d = principal_designation(&arith_set());
    assert_eq!(d.get("I").map(|p| &**p), Some("i_h"));
    assert_eq!(d.get("S").map(|p| &**p), Some("s_p"));
    assert_eq!(d.get("Z"), None);

    let rf = parse_rules("SIGNATURE\nZ : z\nAGENTS\nZ\narity 0\nprincipal z\n").unwrap();
    let zero = AgentDecl::from_signature(&rf.signature, "Z", 0, "z").unwrap();
    assert!(zero.auxiliary.is_empty());
    let d = principal_designation(&INetRuleSet { agents: vec![zero], rules: vec![] });
    assert_eq!(d.get("Z"), Some(&name("z")));
}

#[test]
fn inf_strategy_shape() {
    assert!(inf_strategy(&[] as &[&str]).is_err());
    let want = parse_strategy_unchecked("repeat*((reduce; property(interface,graph)) orelse nextsuc)").unwrap();
    assert_eq!(inf_strategy(&["reduce"]).unwrap(), want);
    let want = parse_strategy_unchecked(
        "repeat*(((reduce orelse negate orelse open); property(interface,graph)) orelse nextsuc)",
    )
    .unwrap();
    assert_eq!(inf_strategy(&["reduce", "negate", "open"]).unwrap(), want);
}

/// Some rule has an active pair touching the interface, found by trying
/// every ordered pair of nodes.
fn interface_redex(rs: &INetRuleSet, g: &PortGraph) -> bool {
    let d = principal_designation(rs);
    let iface = interface_nodes(g);
    let nodes: Vec<_> = g.nodes().collect();
    for rule in &rs.rules {
        let l: Vec<_> = rule.lhs().graph().nodes().map(|n| n.name.clone()).collect();
        for a in &nodes {
            for b in &nodes {
                if a.id == b.id || a.name != l[0] || b.name != l[1] {
                    continue;
                }
                if !iface.contains(&a.id) && !iface.contains(&b.id) {
                    continue;
                }
                let pa = PortRef::new(a.id, &d[&a.name]);
                if g.partner(&pa) == Some(&PortRef::new(b.id, &d[&b.name])) {
                    return true;
                }
            }
        }
    }
    false
}

fn inf_run(g: &PortGraph, seed: u64) -> portstrat::strategy::RunResult {
    let rs = arith_set();
    let names: Vec<String> = rs.rules.iter().map(|r| r.name().to_string()).collect();
    let cfg = EngineConfig::new(rs.rules.iter().cloned())
        .with_seed(seed)
        .with_max_steps(100_000)
        .with_designation(principal_designation(&rs));
    let host = LocatedGraph::new(g.clone(), interface_nodes(g));
    run(&inf_strategy(&names).unwrap(), &host, &cfg).unwrap()
}

#[test]
fn inf_run_on_a_normal_form_rewrites_nothing() {
    let rs = arith_set();
    let sig = arithmetic::rule_file().signature;
    // 2 - 0 with a free head: three agents, no redex at the interface.
    let g = parse_graph_with(
        "NODES\n1 : I\n2 : S\n3 : S\nEDGES\n1.i_l -- 2.s_a\n2.s_p -- 3.s_a\n3.s_p -- 1.i_r\n",
        &sig,
    )
    .unwrap()
    .graph;
    assert!(!interface_redex(&rs, &g));
    let r = inf_run(&g, 0);
    assert_eq!(r.outcome, RunOutcome::Id);
    assert_eq!(r.trace.rewrite_count(), 0);
    assert_eq!(r.graph.graph, g);
}

#[test]
fn inf_run_reduces_an_interface_redex() {
    let rs = arith_set();
    let sig = arithmetic::rule_file().signature;
    // An opener meeting a number: the opener's lists are free.
    let g = parse_graph_with(
        "NODES\n1 : I\n2 : I\n3 : S\nEDGES\n1.i_h -- 2.i_h\n2.i_l -- 3.s_a\n3.s_p -- 2.i_r\n",
        &sig,
    )
    .unwrap()
    .graph;
    assert!(interface_redex(&rs, &g));
    let r = inf_run(&g, 0);
    assert_eq!(r.outcome, RunOutcome::Id);
    assert_eq!(r.trace.applied_rules(), vec![name("open")]);
    assert!(!interface_redex(&rs, &r.graph.graph));
}

#[test]
fn normal_forms_agree_across_seeds() {
    let rules = arithmetic::rule_file().rules;
    let s = parse_strategy_unchecked(arithmetic::STRATEGY).unwrap();
    for (x, y) in [(Number::new(3, 1), Number::new(0, 4)), (Number::new(2, 2), Number::new(5, 0))] {
        let g = arithmetic::addition_net(x, y);
        let a = run(&s, &g, &EngineConfig::new(rules.clone()).with_seed(1)).unwrap();
        let b = run(&s, &g, &EngineConfig::new(rules.clone()).with_seed(2)).unwrap();
        assert!(isomorphic(&a.graph.graph, &b.graph.graph));
        assert_eq!(arithmetic::decode(&a.graph.graph), Ok(x.value() + y.value()));
    }
}

#[test]
fn isomorphism_ignores_ids_only() {
    let sig = arithmetic::rule_file().signature;
    let text = |a: u64, b: u64| {
        format!("NODES\n{a} : I\n{b} : S\nEDGES\n{a}.i_l -- {b}.s_a\n{b}.s_p -- {a}.i_r\n")
    };
    let g = parse_graph_with(&text(1, 2), &sig).unwrap().graph;
    let h = parse_graph_with(&text(9, 4), &sig).unwrap().graph;
    assert!(isomorphic(&g, &h));
    let mut k = h.clone();
    k.set_state(&PortRef::new(NodeId(9), "i_h"), Some(name("x"))).unwrap();
    assert!(!isomorphic(&g, &k));
}
