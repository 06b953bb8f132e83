use std::path::Path;

use proptest::prelude::*;

use kgsynth::config::{emit_template, parse_config, validate_config, ConfigFormat};
use kgsynth::{GeneratorConfig, OutputFormat};

prop_compose! {
    fn any_config()(
        num_classes in 1usize..1000,
        max_depth in 1u32..8,
        avg_depth in 0.5f64..9.0,
        ratio in -1.0f64..6.0,
        props in proptest::collection::vec(-0.2f64..1.2, 14),
        counts in (1usize..10_000, 1usize..100_000, 1usize..500),
        reals in proptest::collection::vec(0.5f64..6.0, 3),
        multityping in any::<bool>(),
        seed in any::<u64>(),
        turtle in any::<bool>(),
    ) -> GeneratorConfig {
        let mut formats = vec![OutputFormat::Ntriples];
        if turtle {
            formats.push(OutputFormat::Turtle);
        }
        GeneratorConfig {
            num_classes,
            max_depth,
            avg_depth,
            inheritance_ratio: ratio,
            avg_disjointness: props[0],
            num_relations: counts.2,
            prop_profiled_relations: props[1],
            relation_specificity: reals[0],
            prop_asymmetric: props[2],
            prop_symmetric: props[3],
            prop_irreflexive: props[4],
            prop_reflexive: props[5],
            prop_transitive: props[6],
            prop_functional: props[7],
            prop_inversefunctional: props[8],
            prop_inverseof: props[9],
            prop_subproperties: props[10],
            num_entities: counts.0,
            num_triples: counts.1,
            relation_balance: props[11],
            prop_untyped: props[12],
            avg_depth_specific: reals[1],
            multityping,
            avg_multityping: reals[2],
            seed,
            output_dir: "out/runs".into(),
            formats,
            random_placement_prob: props[13],
        }
    }
}

fn proportions(cfg: &GeneratorConfig) -> [f64; 14] {
    [
        cfg.avg_disjointness,
        cfg.prop_profiled_relations,
        cfg.prop_asymmetric,
        cfg.prop_symmetric,
        cfg.prop_irreflexive,
        cfg.prop_reflexive,
        cfg.prop_transitive,
        cfg.prop_functional,
        cfg.prop_inversefunctional,
        cfg.prop_inverseof,
        cfg.prop_subproperties,
        cfg.relation_balance,
        cfg.prop_untyped,
        cfg.random_placement_prob,
    ]
}

proptest! {
    #[test]
    fn json_round_trips(cfg in any_config()) {
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        prop_assert_eq!(parse_config(&text, ConfigFormat::Json).unwrap(), cfg);
    }

    #[test]
    fn yaml_round_trips(cfg in any_config()) {
        let text = serde_yaml::to_string(&cfg).unwrap();
        prop_assert_eq!(parse_config(&text, ConfigFormat::Yaml).unwrap(), cfg);
    }

    #[test]
    fn partial_documents_fill_in_defaults(cfg in any_config()) {
        let text = format!("num_classes: {}\nseed: {}\n", cfg.num_classes, cfg.seed);
        let parsed = parse_config(&text, ConfigFormat::Yaml).unwrap();
        prop_assert_eq!(
            parsed,
            GeneratorConfig { num_classes: cfg.num_classes, seed: cfg.seed, ..GeneratorConfig::default() }
        );
    }

    /// Errors are exactly the independent hard constraints; everything else
    /// is at most a warning.
    #[test]
    fn errors_match_hard_constraints(cfg in any_config()) {
        let d = cfg.max_depth as f64;
        let expected_error = proportions(&cfg).iter().any(|p| !(0.0..=1.0).contains(p))
            || cfg.avg_depth < 1.0
            || cfg.avg_depth > d
            || cfg.avg_depth_specific > d
            || cfg.relation_specificity < 1.0
            || cfg.avg_depth_specific < 1.0
            || cfg.avg_multityping < 1.0
            || cfg.inheritance_ratio <= 0.0;
        let report = validate_config(&cfg);
        prop_assert_eq!(!report.is_ok(), expected_error, "{}", report);
    }
}

#[test]
fn templates_parse_to_the_defaults() {
    for format in [ConfigFormat::Yaml, ConfigFormat::Json] {
        let text = emit_template(format);
        assert_eq!(parse_config(&text, format).unwrap(), GeneratorConfig::default());
        assert!(validate_config(&GeneratorConfig::default()).is_empty());
    }
}

#[test]
fn format_follows_the_extension() {
    assert_eq!(ConfigFormat::from_path(Path::new("a/b.json")), ConfigFormat::Json);
    assert_eq!(ConfigFormat::from_path(Path::new("b.JSON")), ConfigFormat::Json);
    assert_eq!(ConfigFormat::from_path(Path::new("b.yml")), ConfigFormat::Yaml);
    assert_eq!(ConfigFormat::from_path(Path::new("b")), ConfigFormat::Yaml);
}

#[test]
fn formats_accept_lowercase_names() {
    let cfg = parse_config("formats: [ntriples, turtle]\n", ConfigFormat::Yaml).unwrap();
    assert_eq!(cfg.formats, vec![OutputFormat::Ntriples, OutputFormat::Turtle]);
    assert!(parse_config("formats: [rdfxml]\n", ConfigFormat::Yaml).is_err());
}
