use proptest::prelude::*;
use wmfair_core::omega::{MullerSpec, PropKind, Proposition};

/// States visited along a run, with consecutive repeats collapsed.
fn run(spec: &MullerSpec, word: &[u32]) -> Vec<usize> {
    let mut q = spec.initial;
    let mut out = vec![q];
    for &a in word {
        q = spec.step(q, a);
        if out.last() != Some(&q) {
            out.push(q);
        }
    }
    out
}

fn spec_from(table: Vec<Vec<usize>>) -> MullerSpec {
    let props = vec![
        Proposition { name: "p".into(), kind: PropKind::AllHalted },
        Proposition { name: "r".into(), kind: PropKind::AllHalted },
    ];
    MullerSpec::from_table(props, 3, &table, vec![0b100])
}

fn words(len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| (0..4).map(move |a| { let mut v = w.clone(); v.push(a); v }))
            .collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]
    #[test]
    fn idempotence_implies_stutter_closure(table in prop::collection::vec(prop::collection::vec(0usize..3, 4), 3)) {
        let spec = spec_from(table);
        let claimed = spec.check_stutter_insensitive(None).is_ok();
        let mut brute = true;
        'outer: for len in 1..=5 {
            for w in words(len) {
                let base = run(&spec, &w);
                for i in 0..w.len() {
                    let mut s = w.clone();
                    s.insert(i, w[i]);
                    if run(&spec, &s) != base {
                        brute = false;
                        break 'outer;
                    }
                }
            }
        }
        // the syntactic check is sufficient: a positive answer must agree
        if claimed {
            prop_assert!(brute);
        }
    }
}
