use delpezzo::certify::{CertificateKind, Tables};
use delpezzo::experiment::{run_density, ExperimentConfig, PlaceBudget};
use delpezzo::input::parse_surface_file;
use delpezzo::report::{analyze_lines, SurfaceAnalysis, SurfaceDocument};

const FILE: &str = "\
# Fermat over F_7, Fermat over F_2, a pencil over F_2(u)
7 1 : 1,0,0,0,0,0,0,0,0,0,1,0,0,0,0,0,1,0,0,1
2 1 : 1,0,0,0,0,0,0,0,0,0,1,0,0,0,0,0,1,0,0,1

2 1 : [1,1],0,0,0,0,1,0,0,0,0,1,0,0,0,0,0,[0,1],0,1,1
";

#[test]
fn surface_file_to_json_and_back() {
    let lines = parse_surface_file(FILE).unwrap();
    assert_eq!(lines.iter().map(|l| l.line).collect::<Vec<_>>(), vec![2, 3, 5]);
    let doc = analyze_lines(&lines, &PlaceBudget::default(), Tables::get()).unwrap();
    let text = serde_json::to_string_pretty(&doc).unwrap();
    let back: SurfaceDocument = serde_json::from_str(&text).unwrap();
    assert_eq!(back, doc);
    assert_eq!(doc.hashes, Tables::get().hashes);
    match &doc.surfaces[1].analysis {
        SurfaceAnalysis::Finite(r) => assert_eq!(r.cycle_types, vec!["1^3 2^12".to_string()]),
        other => panic!("{other:?}"),
    }
    match &doc.surfaces[2].analysis {
        SurfaceAnalysis::Family(r) => {
            assert!(!r.places.is_empty());
            assert!(r.h1.hashes == doc.hashes || r.h1.kind == CertificateKind::Inconclusive);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn density_rows_add_up() {
    let cfg = ExperimentConfig { degrees: vec![1, 2], samples: 5, seed: 3, ..ExperimentConfig::default() };
    let a = run_density(&cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&run_density(&cfg).unwrap()).unwrap());
    for row in &a.rows {
        assert_eq!(row.skipped + row.undetermined + row.included, row.samples);
        assert!(row.h1_trivial <= row.included);
        assert!(row.not_in_listed_subgroups <= row.included);
    }
    assert_eq!(a.samples.len(), 10);
}
