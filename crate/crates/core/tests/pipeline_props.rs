use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use indexify::cli::{indexify, IndexConfig};
use indexify::lang::{interpret, parse, print, InterpConfig, NoIndex, Verdict};
use indexify::rewrite::{find_redexes, normalize, RewriteConfig, Strategy as Order};

/// Small programs over one symbolic string built from a few templates.
fn program() -> impl Strategy<Value = String> {
    let lit = prop::sample::select(vec!["a", "b", "ab", "ba", ""]);
    let expr = prop_oneof![
        Just("s".to_string()),
        lit.clone().prop_map(|l| format!("\"{l}\"")),
        (lit.clone(), lit.clone()).prop_map(|(a, b)| format!("strcat(\"{a}\", \"{b}\")")),
        lit.clone().prop_map(|a| format!("strcat(s, \"{a}\")")),
        lit.clone().prop_map(|a| format!("strstr(s, \"{a}\")")),
    ];
    let cond = prop_oneof![
        expr.clone().prop_map(|e| format!("strcmp({e}, s) == 0")),
        expr.clone().prop_map(|e| format!("strlen({e}) > 1")),
        expr.clone().prop_map(|e| format!("strstr({e}, \"a\")")),
    ];
    (prop::collection::vec((expr, cond), 1..4)).prop_map(|parts| {
        let mut body = String::from("str s;\nstr t = \"\";\nint n = 0;\nmake_symbolic(s);\n");
        for (i, (e, c)) in parts.iter().enumerate() {
            body.push_str(&format!("t = {e};\nif ({c}) {{ n = n + {}; }}\n", i + 1));
        }
        body.push_str("puts(t);\nreturn n;\n");
        format!("int main() {{\n{body}}}\n")
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn random_orders_reach_the_first_order_normal_form(src in program(), seed in any::<u64>()) {
        let p = parse(&src).unwrap();
        let cfg = IndexConfig { k: 1, max_len: 4, ..IndexConfig::default() };
        let ix = indexify(&p, &cfg).unwrap();
        let rcfg = RewriteConfig::new(cfg.types, &ix.fplus, &ix.gardens).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = normalize(&p, &rcfg, Order::Random(&mut rng)).unwrap();
        prop_assert_eq!(print(&r.program), print(&ix.rewrite.program));
        prop_assert!(find_redexes(&r.program, &rcfg).is_empty());
    }

    #[test]
    fn indexed_runs_agree_with_the_original(src in program(), pick in any::<prop::sample::Index>()) {
        let p = parse(&src).unwrap();
        let cfg = IndexConfig { k: 1, max_len: 4, ..IndexConfig::default() };
        let ix = indexify(&p, &cfg).unwrap();
        let g = ix.gardens.get(indexify::lang::Indexable::Str).unwrap();
        let v = pick.get(g.values()).clone();
        let inputs = [("s".to_string(), v)].into_iter().collect();
        let got = interpret(&ix.indexed, &inputs, &ix.runtime(), InterpConfig::default()).unwrap();
        if got.verdict != Verdict::EscapedGarden {
            let want = interpret(&ix.original, &inputs, &NoIndex, InterpConfig::default()).unwrap();
            prop_assert_eq!(got.verdict, want.verdict);
            prop_assert_eq!(got.return_value, want.return_value);
        }
    }

    #[test]
    fn harvested_literals_are_all_in_the_garden(src in program()) {
        let p = parse(&src).unwrap();
        let ix = indexify(&p, &IndexConfig { k: 1, max_len: 4, ..IndexConfig::default() }).unwrap();
        prop_assert!(indexify::garden::literals_outside(&p, &ix.gardens).is_empty());
        prop_assert_eq!(ix.rewrite.applied.get(&indexify::rewrite::Rule::R5LiteralBot), None);
    }
}
