use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use skipalign_core::corpus::{self, CorpusConfig};
use skipalign_core::io::{self, AlignmentRecord, LogFormat, ResultDocument, TraceResult};
use skipalign_core::model::{Operator, Tree};
use skipalign_core::search::{self, Heuristic};

fn label() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z][a-z0-9_]{0,3}",
        "[A-Za-z0-9 ,()'\\\\*+-]{1,5}",
        Just("tau".to_string()),
        Just("X".to_string()),
    ]
}

fn tree() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![label().prop_map(Tree::Activity), Just(Tree::Tau)];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (
                prop_oneof![Just(Operator::Seq), Just(Operator::Xor), Just(Operator::And)],
                prop::collection::vec(inner.clone(), 1..4)
            )
                .prop_map(|(op, kids)| Tree::Node(op, kids)),
            (inner.clone(), inner).prop_map(|(a, b)| Tree::Node(Operator::Loop, vec![a, b])),
        ]
    })
}

proptest! {
    #[test]
    fn tree_text_round_trip(t in tree()) {
        let text = io::tree_to_text(&t);
        prop_assert_eq!(io::parse_tree_text(&text).unwrap(), t.clone());
        // whitespace is insignificant outside quotes
        let spaced = text.replace(',', " , ").replace('(', "( ");
        if !t.to_string().contains('\'') {
            prop_assert_eq!(io::parse_tree_text(&spaced).unwrap(), t);
        }
    }

    #[test]
    fn csv_grouping_is_exact_under_shuffling(
        traces in prop::collection::vec(prop::collection::vec("[a-e]", 0..6), 1..6),
        seed in any::<u64>(),
    ) {
        // one row per event with increasing timestamps per case, rows shuffled
        let mut rows = Vec::new();
        for (c, trace) in traces.iter().enumerate() {
            for (i, a) in trace.iter().enumerate() {
                rows.push(format!("case{c},{a},2024-03-01T10:{:02}:00Z", i * 7 % 60 + c));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rows.shuffle(&mut rng);
        let text = format!("case_id,activity,timestamp\n{}\n", rows.join("\n"));
        let parsed = io::parse_log_str(&text, LogFormat::Csv).unwrap();
        let expected: Vec<_> = traces
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.is_empty())
            .map(|(c, t)| (format!("case{c}"), t.clone()))
            .collect();
        let mut got = parsed.clone();
        got.sort();
        let mut want = expected.clone();
        want.sort();
        prop_assert_eq!(got, want);
    }
}

#[test]
fn xes_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.xes");
    std::fs::write(
        &path,
        r#"<log><trace><string key="concept:name" value="c1"/>
        <event><string key="concept:name" value="a"/></event>
        <event><string key="concept:name" value="b"/></event>
        <event><string key="concept:name" value="d"/></event></trace></log>"#,
    )
    .unwrap();
    let cases = io::parse_log(&path, LogFormat::Xes).unwrap();
    assert_eq!(
        cases,
        vec![("c1".to_string(), vec!["a".into(), "b".into(), "d".into()])]
    );
    assert!(io::parse_log(&dir.path().join("missing.xes"), LogFormat::Xes).is_err());
}

#[test]
fn result_documents_revalidate() {
    let instances = corpus::generate(99, 80, &CorpusConfig::default());
    for inst in &instances {
        let out = search::enumerate_all_optimal(&inst.model, &inst.trace, Heuristic::ModelRemainder).unwrap();
        let doc = ResultDocument {
            traces: vec![TraceResult {
                trace_id: format!("t{}", inst.id),
                cases: vec![format!("c{}", inst.id)],
                multiplicity: 1,
                events: inst.trace.clone(),
                cost: Some(out.cost),
                alignments: out
                    .alignments
                    .iter()
                    .map(|d| AlignmentRecord::from_moves(&inst.model, d.moves()))
                    .collect(),
                error: None,
            }],
            ..ResultDocument::default()
        };
        let text = io::write_results(&doc);
        let back = io::read_results(&text).unwrap();
        assert_eq!(back, doc);
        io::validate_document(&inst.model, &back).unwrap();
        assert_eq!(io::write_results(&back), text);

        // tampered documents are rejected
        let mut bad = back.clone();
        bad.traces[0].alignments[0].cost += 1;
        assert!(io::validate_document(&inst.model, &bad).is_err());
        let mut bad = back.clone();
        bad.traces[0].alignments[0].moves.push(io::MoveRecord {
            kind: io::MoveKind::Log,
            label: Some("zz".into()),
            block: None,
            cost: 1,
        });
        assert!(io::validate_document(&inst.model, &bad).is_err());
    }
}

#[test]
fn perfect_fit_document() {
    let m = io::parse_model("->(a,X(b,c),d)").unwrap();
    let trace: Vec<String> = ["a", "b", "d"].iter().map(|s| s.to_string()).collect();
    let out = search::enumerate_all_optimal(&m, &trace, Heuristic::Zero).unwrap();
    let rec = AlignmentRecord::from_moves(&m, out.alignments.first().unwrap().moves());
    let json = serde_json::to_string(&rec).unwrap();
    assert_eq!(
        json,
        r#"{"cost":0,"moves":[{"kind":"sync","label":"a","block":"B1","cost":0},{"kind":"sync","label":"b","block":"B3","cost":0},{"kind":"sync","label":"d","block":"B5","cost":0}]}"#
    );
}
