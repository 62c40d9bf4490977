use std::collections::BTreeSet;

use skipalign_core::corpus::{self, CorpusConfig};
use skipalign_core::oracle::{self, OracleBudget, OracleError};
use skipalign_core::search::{self, Heuristic};

#[test]
fn search_matches_oracle_on_random_instances() {
    let budget = OracleBudget::default();
    let mut compared = 0;
    let mut excluded = 0;
    for inst in corpus::generate(20_240_601, 120, &CorpusConfig::default()) {
        let expected = match oracle::coinciding_normal_forms(&inst.model, &inst.trace, &budget) {
            Ok(set) => set,
            Err(OracleError::BudgetExceeded(_)) => {
                excluded += 1;
                continue;
            }
            Err(e) => panic!("{} {:?}: {e}", inst.model_text(), inst.trace),
        };
        let got = search::enumerate_all_optimal(&inst.model, &inst.trace, Heuristic::ModelRemainder).unwrap();
        let got: BTreeSet<_> = got.alignments;
        if got != expected {
            let show = |s: &BTreeSet<skipalign_core::SkipAlignment>| {
                s.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n    ")
            };
            panic!(
                "instance {} model {} trace {:?}\n  search:\n    {}\n  oracle:\n    {}",
                inst.id,
                inst.model_text(),
                inst.trace,
                show(&got),
                show(&expected)
            );
        }
        compared += 1;
    }
    assert!(compared >= 100, "compared {compared}, excluded {excluded}");
}

/// Longer sweep over many seeds; run with `--ignored`.
#[test]
#[ignore]
fn stress_many_seeds() {
    let budget = OracleBudget::default();
    let (mut compared, mut excluded, mut no_worse) = (0, 0, 0);
    let tau_heavy = CorpusConfig {
        tau_probability: 0.35,
        labels: 3,
        ..CorpusConfig::default()
    };
    for seed in 0..40u64 {
        let cfg = if seed % 2 == 0 {
            CorpusConfig::default()
        } else {
            tau_heavy
        };
        for inst in corpus::generate(seed, 200, &cfg) {
            let pairs = match oracle::coinciding_map(&inst.model, &inst.trace, &budget) {
                Ok(p) => p,
                Err(OracleError::BudgetExceeded(_)) => {
                    excluded += 1;
                    continue;
                }
                Err(e) => panic!("{} {:?}: {e}", inst.model_text(), inst.trace),
            };
            let expected: BTreeSet<_> = pairs.1.iter().map(|(_, d)| d.clone()).collect();
            let a = search::enumerate_all_optimal(&inst.model, &inst.trace, Heuristic::ModelRemainder).unwrap();
            let z = search::enumerate_all_optimal(&inst.model, &inst.trace, Heuristic::Zero).unwrap();
            assert_eq!(a.cost, pairs.0);
            assert_eq!(a.alignments, z.alignments);
            assert_eq!(
                a.alignments,
                expected,
                "seed {seed} {} {:?}",
                inst.model_text(),
                inst.trace
            );
            // every optimal alignment lies in exactly one expansion cell
            let mut union = BTreeSet::new();
            let mut total = 0;
            for d in &a.alignments {
                let cell = oracle::expand_coinciding(&inst.model, d, &budget).unwrap();
                assert!(!cell.is_empty());
                let direct = oracle::expand_direct(&inst.model, d, &budget).unwrap();
                assert!(direct.is_subset(&cell), "{} {d}", inst.model_text());
                total += cell.len();
                union.extend(cell);
            }
            let all: BTreeSet<_> = pairs.1.iter().map(|(g, _)| g.clone()).collect();
            assert_eq!(total, union.len());
            assert_eq!(union, all);
            if a.stats.expanded() <= z.stats.expanded() {
                no_worse += 1;
            }
            compared += 1;
        }
    }
    eprintln!("compared {compared} excluded {excluded} heuristic no worse {no_worse}");
}
