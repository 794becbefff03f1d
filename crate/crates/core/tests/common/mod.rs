#![allow(dead_code)]

use proptest::prelude::*;

/// Random expression over `vars` with literals below `max_lit`.
pub fn expr(vars: &'static [&'static str], max_lit: u64, depth: u32) -> BoxedStrategy<String> {
    let leaf = prop_oneof![
        prop::sample::select(vars).prop_map(str::to_string),
        (0..=max_lit).prop_map(|n| n.to_string()),
    ];
    leaf.prop_recursive(depth, 8, 2, |inner| {
        (inner.clone(), prop::sample::select(&["+", "-", "*", "/"][..]), inner)
            .prop_map(|(a, op, b)| format!("({a} {op} {b})"))
    })
    .boxed()
}

pub fn pred(vars: &'static [&'static str], max_lit: u64) -> BoxedStrategy<String> {
    let rel = (expr(vars, max_lit, 1), prop::sample::select(&["<", "<=", ">", ">=", "==", "!="][..]), expr(vars, max_lit, 1))
        .prop_map(|(a, op, b)| format!("{a} {op} {b}"));
    rel.prop_recursive(2, 4, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) and ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) or ({b})")),
            inner.prop_map(|a| format!("!({a})")),
        ]
    })
    .boxed()
}

const READ: &[&str] = &["x", "y", "a", "b"];

fn stmt(depth: u32) -> BoxedStrategy<String> {
    let assign = (prop::sample::select(&["a", "b"][..]), expr(READ, 7, 2))
        .prop_map(|(v, e)| format!("{v} := {e};"));
    if depth == 0 {
        return assign.boxed();
    }
    prop_oneof![
        3 => assign,
        1 => (pred(READ, 7), prop::collection::vec(stmt(depth - 1), 0..3), prop::collection::vec(stmt(depth - 1), 0..3))
            .prop_map(|(p, t, e)| format!("if ({p}) {{ {} }} else {{ {} }}", t.join(" "), e.join(" "))),
    ]
    .boxed()
}

/// Loop-free program over inputs `x`, `y` at width 3.
pub fn program() -> impl Strategy<Value = String> {
    (prop::collection::vec(stmt(2), 1..4), prop::sample::select(&["a", "b", "a + b", "a * b"][..]))
        .prop_map(|(body, ret)| format!("int gen(int x, int y) {{ a := x; b := y; {} return {ret}; }}", body.join(" ")))
}
