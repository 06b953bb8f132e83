//! Generator configuration: parsing from YAML or JSON, validation, and
//! template emission.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// RDF output formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Ntriples,
    Turtle,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Ntriples => "nt",
            OutputFormat::Turtle => "ttl",
        }
    }
}

/// Syntax of a configuration document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigFormat {
    Yaml,
    Json,
}

impl ConfigFormat {
    /// Guesses the format from a file extension; anything but `.json` is YAML.
    pub fn from_path(path: &Path) -> ConfigFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => ConfigFormat::Json,
            _ => ConfigFormat::Yaml,
        }
    }

    pub fn template_file_name(self) -> &'static str {
        match self {
            ConfigFormat::Yaml => "template.yml",
            ConfigFormat::Json => "template.json",
        }
    }
}

/// Every parameter steering schema and KG generation.
///
/// Keys are flat; the grouping below is only for readability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    // classes
    pub num_classes: usize,
    pub max_depth: u32,
    pub avg_depth: f64,
    pub inheritance_ratio: f64,
    pub avg_disjointness: f64,

    // relations
    pub num_relations: usize,
    pub prop_profiled_relations: f64,
    pub relation_specificity: f64,
    pub prop_asymmetric: f64,
    pub prop_symmetric: f64,
    pub prop_irreflexive: f64,
    pub prop_reflexive: f64,
    pub prop_transitive: f64,
    pub prop_functional: f64,
    pub prop_inversefunctional: f64,
    pub prop_inverseof: f64,
    pub prop_subproperties: f64,

    // individuals
    pub num_entities: usize,
    pub num_triples: usize,
    pub relation_balance: f64,
    pub prop_untyped: f64,
    pub avg_depth_specific: f64,
    pub multityping: bool,
    pub avg_multityping: f64,

    // run
    pub seed: u64,
    pub output_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
    /// Probability that a class is attached to a random parent instead of
    /// the target-driven one.
    pub random_placement_prob: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            num_classes: 25,
            max_depth: 3,
            avg_depth: 1.5,
            inheritance_ratio: 2.5,
            avg_disjointness: 0.1,
            num_relations: 25,
            prop_profiled_relations: 0.9,
            relation_specificity: 1.5,
            prop_asymmetric: 0.1,
            prop_symmetric: 0.1,
            prop_irreflexive: 0.1,
            prop_reflexive: 0.1,
            prop_transitive: 0.1,
            prop_functional: 0.1,
            prop_inversefunctional: 0.1,
            prop_inverseof: 0.1,
            prop_subproperties: 0.1,
            num_entities: 100,
            num_triples: 1000,
            relation_balance: 0.9,
            prop_untyped: 0.3,
            avg_depth_specific: 2.0,
            multityping: true,
            avg_multityping: 2.0,
            seed: 42,
            output_dir: PathBuf::from("output"),
            formats: vec![OutputFormat::Ntriples],
            random_placement_prob: 0.1,
        }
    }
}

impl GeneratorConfig {
    /// Mean number of most-specific classes per typed entity actually targeted.
    pub fn effective_multityping(&self) -> f64 {
        if self.multityping {
            self.avg_multityping
        } else {
            1.0
        }
    }
}

/// A documented configuration key.
#[derive(Debug, Clone, Copy)]
pub struct Parameter {
    pub key: &'static str,
    pub description: &'static str,
}

const fn param(key: &'static str, description: &'static str) -> Parameter {
    Parameter { key, description }
}

/// The generation parameters, in template order.
pub const PARAMETERS: [Parameter; 24] = [
    param("num_classes", "Number of classes"),
    param("max_depth", "Depth of the class hierarchy"),
    param("avg_depth", "Average class depth"),
    param("inheritance_ratio", "Proportion of rdfs:subClassOf (mean children per parent class)"),
    param("avg_disjointness", "Proportion of owl:disjointWith"),
    param("num_relations", "Number of relations"),
    param("prop_profiled_relations", "Proportion of rdfs:domain and rdfs:range"),
    param("relation_specificity", "Average depth of rdfs:domain and rdfs:range"),
    param("prop_asymmetric", "Proportion of owl:AsymmetricProperty"),
    param("prop_symmetric", "Proportion of owl:SymmetricProperty"),
    param("prop_irreflexive", "Proportion of owl:IrreflexiveProperty"),
    param("prop_reflexive", "Proportion of owl:ReflexiveProperty"),
    param("prop_transitive", "Proportion of owl:TransitiveProperty"),
    param("prop_functional", "Proportion of owl:FunctionalProperty"),
    param("prop_inversefunctional", "Proportion of owl:InverseFunctionalProperty"),
    param("prop_inverseof", "Proportion of owl:inverseOf"),
    param("prop_subproperties", "Proportion of rdfs:subPropertyOf"),
    param("num_entities", "Number of entities"),
    param("num_triples", "Number of triples"),
    param("relation_balance", "Relation distribution across triples (1 = uniform)"),
    param("prop_untyped", "Proportion of untyped entities"),
    param("avg_depth_specific", "Average depth of most specific class"),
    param("multityping", "Whether entities are multi-typed"),
    param("avg_multityping", "Average number of most-specific classes per entity"),
];

/// Run-level keys that follow the generation parameters.
pub const RUN_PARAMETERS: [Parameter; 4] = [
    param("seed", "Seed for every random choice"),
    param("output_dir", "Directory receiving generated artifacts"),
    param("formats", "Output formats: ntriples, turtle"),
    param("random_placement_prob", "Chance of placing a class at random (advanced)"),
];

fn all_keys() -> impl Iterator<Item = &'static str> {
    PARAMETERS.iter().chain(RUN_PARAMETERS.iter()).map(|p| p.key)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("configuration must be a key/value mapping")]
    NotAMapping,
    #[error("invalid value: {0}")]
    Type(String),
}

pub fn parse_config(text: &str, format: ConfigFormat) -> Result<GeneratorConfig, ConfigError> {
    if text.trim().is_empty() {
        return Ok(GeneratorConfig::default());
    }
    match format {
        ConfigFormat::Yaml => parse_yaml(text),
        ConfigFormat::Json => parse_json(text),
    }
}

fn parse_yaml(text: &str) -> Result<GeneratorConfig, ConfigError> {
    let value: serde_yaml::Value = serde_yaml::from_str(text).map_err(|e| {
        let (line, column) = e.location().map(|l| (l.line(), l.column())).unwrap_or((0, 0));
        ConfigError::Syntax {
            line,
            column,
            message: e.to_string(),
        }
    })?;
    let value = match value {
        serde_yaml::Value::Null => return Ok(GeneratorConfig::default()),
        serde_yaml::Value::Mapping(m) => {
            for k in m.keys() {
                let key = k.as_str().ok_or(ConfigError::NotAMapping)?;
                check_key(key)?;
            }
            serde_yaml::Value::Mapping(m)
        }
        _ => return Err(ConfigError::NotAMapping),
    };
    serde_yaml::from_value(value).map_err(|e| ConfigError::Type(e.to_string()))
}

fn parse_json(text: &str) -> Result<GeneratorConfig, ConfigError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    match &value {
        serde_json::Value::Null => return Ok(GeneratorConfig::default()),
        serde_json::Value::Object(m) => {
            for k in m.keys() {
                check_key(k)?;
            }
        }
        _ => return Err(ConfigError::NotAMapping),
    }
    serde_json::from_value(value).map_err(|e| ConfigError::Type(e.to_string()))
}

fn check_key(key: &str) -> Result<(), ConfigError> {
    if all_keys().any(|k| k == key) {
        Ok(())
    } else {
        Err(ConfigError::UnknownKey(key.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    /// Targets that are individually legal but cannot all be met at once.
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty() && self.warnings.is_empty()
    }

    fn error(&mut self, field: &str, message: impl Into<String>) {
        self.errors.push(Issue {
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn warn(&mut self, field: &str, message: impl Into<String>) {
        self.warnings.push(Issue {
            field: field.to_string(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

pub fn validate_config(cfg: &GeneratorConfig) -> ValidationReport {
    let mut r = ValidationReport::default();

    for (field, v) in [
        ("num_classes", cfg.num_classes),
        ("max_depth", cfg.max_depth as usize),
        ("num_relations", cfg.num_relations),
        ("num_entities", cfg.num_entities),
        ("num_triples", cfg.num_triples),
    ] {
        if v == 0 {
            r.error(field, "must be a positive integer");
        }
    }

    for (field, v) in [
        ("avg_disjointness", cfg.avg_disjointness),
        ("prop_profiled_relations", cfg.prop_profiled_relations),
        ("prop_asymmetric", cfg.prop_asymmetric),
        ("prop_symmetric", cfg.prop_symmetric),
        ("prop_irreflexive", cfg.prop_irreflexive),
        ("prop_reflexive", cfg.prop_reflexive),
        ("prop_transitive", cfg.prop_transitive),
        ("prop_functional", cfg.prop_functional),
        ("prop_inversefunctional", cfg.prop_inversefunctional),
        ("prop_inverseof", cfg.prop_inverseof),
        ("prop_subproperties", cfg.prop_subproperties),
        ("relation_balance", cfg.relation_balance),
        ("prop_untyped", cfg.prop_untyped),
        ("random_placement_prob", cfg.random_placement_prob),
    ] {
        if !(0.0..=1.0).contains(&v) {
            r.error(field, format!("{v} is not a proportion in [0, 1]"));
        }
    }

    for (field, v) in [
        ("avg_depth", cfg.avg_depth),
        ("relation_specificity", cfg.relation_specificity),
        ("avg_depth_specific", cfg.avg_depth_specific),
        ("avg_multityping", cfg.avg_multityping),
    ] {
        if !(v >= 1.0) || !v.is_finite() {
            r.error(field, format!("{v} must be a real number >= 1"));
        }
    }
    if !(cfg.inheritance_ratio > 0.0) || !cfg.inheritance_ratio.is_finite() {
        r.error("inheritance_ratio", "must be a positive real number");
    }

    let max_depth = cfg.max_depth as f64;
    if cfg.avg_depth > max_depth {
        r.error(
            "avg_depth",
            format!("avg_depth {} exceeds max_depth {}", cfg.avg_depth, cfg.max_depth),
        );
    }
    if cfg.avg_depth_specific > max_depth {
        r.error(
            "avg_depth_specific",
            format!(
                "avg_depth_specific {} exceeds max_depth {}",
                cfg.avg_depth_specific, cfg.max_depth
            ),
        );
    }
    if cfg.formats.is_empty() {
        r.error("formats", "at least one output format is required");
    }

    if !r.is_ok() {
        return r;
    }

    class_target_warnings(cfg, &mut r);

    if cfg.relation_specificity > max_depth {
        r.warn(
            "relation_specificity",
            "exceeds max_depth; domains and ranges will be shallower",
        );
    }
    if cfg.prop_reflexive + cfg.prop_irreflexive > 1.0 {
        r.warn(
            "prop_reflexive",
            "reflexive and irreflexive proportions sum above 1 but cannot overlap",
        );
    }
    if cfg.prop_symmetric + cfg.prop_asymmetric > 1.0 {
        r.warn(
            "prop_symmetric",
            "symmetric and asymmetric proportions sum above 1 but cannot overlap",
        );
    }
    if cfg.multityping && cfg.avg_multityping > cfg.num_classes as f64 {
        r.warn("avg_multityping", "exceeds the number of classes");
    }
    r
}

/// Necessary conditions for `avg_depth` and `inheritance_ratio` to be
/// jointly reachable once the max-depth chain is in place.
fn class_target_warnings(cfg: &GeneratorConfig, r: &mut ValidationReport) {
    let n = cfg.num_classes as f64;
    let d = cfg.max_depth as f64;
    if cfg.num_classes < cfg.max_depth as usize {
        r.warn(
            "max_depth",
            format!(
                "only {} classes: a chain of depth {} cannot be built",
                cfg.num_classes, cfg.max_depth
            ),
        );
        return;
    }
    let chain_sum = d * (d + 1.0) / 2.0;
    let rest = n - d;
    let lo = (chain_sum + rest) / n;
    let hi = (chain_sum + rest * d) / n;
    const EPS: f64 = 1e-9;
    if cfg.avg_depth < lo - EPS || cfg.avg_depth > hi + EPS {
        r.warn(
            "avg_depth",
            format!("reachable average depth is [{lo:.3}, {hi:.3}] once the depth chain exists"),
        );
    }
    if cfg.max_depth == 1 {
        r.warn(
            "inheritance_ratio",
            "a flat hierarchy has no subclass links; the ratio will be 0",
        );
        return;
    }
    if cfg.inheritance_ratio < 1.0 - EPS {
        r.warn(
            "inheritance_ratio",
            "every parent has at least one child, so the ratio is at least 1",
        );
    }
    // classes beyond the chain that must sit at depth 1 to keep the average down
    let extra_sum = n * cfg.avg_depth - chain_sum;
    let forced_top = (2.0 * rest - extra_sum).clamp(0.0, rest);
    let max_ratio = (n - 1.0 - forced_top) / (d - 1.0);
    if cfg.inheritance_ratio > max_ratio + EPS {
        r.warn(
            "inheritance_ratio",
            format!(
                "cannot exceed {max_ratio:.3} with avg_depth {} and max_depth {}; competing targets, best effort",
                cfg.avg_depth, cfg.max_depth
            ),
        );
    }
}

/// Renders a documented configuration file holding the default values.
pub fn emit_template(format: ConfigFormat) -> String {
    let cfg = GeneratorConfig::default();
    let values = serde_json::to_value(&cfg).expect("config serializes");
    let value_of = |key: &str| serde_json::to_string(&values[key]).expect("value serializes");
    let mut out = String::new();
    match format {
        ConfigFormat::Yaml => {
            let sections = [
                ("Classes", &PARAMETERS[0..5]),
                ("Relations", &PARAMETERS[5..17]),
                ("Individuals", &PARAMETERS[17..24]),
                ("Run", &RUN_PARAMETERS[..]),
            ];
            for (i, (title, params)) in sections.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                out.push_str(&format!("# --- {title} ---\n"));
                for p in params.iter() {
                    out.push_str(&format!("# {}\n{}: {}\n", p.description, p.key, value_of(p.key)));
                }
            }
        }
        ConfigFormat::Json => {
            out.push_str("{\n");
            let keys: Vec<_> = all_keys().collect();
            for (i, key) in keys.iter().enumerate() {
                let sep = if i + 1 == keys.len() { "" } else { "," };
                out.push_str(&format!("  \"{key}\": {}{sep}\n", value_of(key)));
            }
            out.push_str("}\n");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const S1_YAML: &str = "\
num_classes: 25
max_depth: 3
avg_depth: 1.5
avg_disjointness: 0.1
num_relations: 25
relation_specificity: 1.5
prop_reflexive: 0.1
prop_irreflexive: 0.1
prop_asymmetric: 0.1
prop_symmetric: 0.1
prop_transitive: 0.1
prop_inverseof: 0.1
";

    #[test]
    fn parses_s1_keys() {
        let cfg = parse_config(S1_YAML, ConfigFormat::Yaml).unwrap();
        assert_eq!(cfg.num_classes, 25);
        assert_eq!(cfg.max_depth, 3);
        assert_eq!(cfg.avg_depth, 1.5);
        assert_eq!(cfg.avg_disjointness, 0.1);
        assert_eq!(cfg.num_relations, 25);
        assert_eq!(cfg.relation_specificity, 1.5);
        for v in [
            cfg.prop_reflexive,
            cfg.prop_irreflexive,
            cfg.prop_asymmetric,
            cfg.prop_symmetric,
            cfg.prop_transitive,
            cfg.prop_inverseof,
        ] {
            assert_eq!(v, 0.1);
        }
    }

    #[test]
    fn empty_document_is_default() {
        for fmt in [ConfigFormat::Yaml, ConfigFormat::Json] {
            assert_eq!(parse_config("", fmt).unwrap(), GeneratorConfig::default());
        }
        assert_eq!(
            parse_config("{}", ConfigFormat::Json).unwrap(),
            GeneratorConfig::default()
        );
        assert_eq!(
            parse_config("# nothing\n", ConfigFormat::Yaml).unwrap(),
            GeneratorConfig::default()
        );
    }

    #[test]
    fn typo_is_rejected_by_name() {
        let err = parse_config("num_clases: 10\n", ConfigFormat::Yaml).unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey("num_clases".into()));
        assert!(err.to_string().contains("num_clases"));
        let err = parse_config("{\"num_clases\": 10}", ConfigFormat::Json).unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey("num_clases".into()));
    }

    #[test]
    fn syntax_and_type_errors() {
        match parse_config("{\n  \"num_classes\": ,\n}", ConfigFormat::Json) {
            Err(ConfigError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(matches!(
            parse_config("num_classes: [1, 2\nmax_depth: 3", ConfigFormat::Yaml),
            Err(ConfigError::Syntax { .. })
        ));
        assert!(matches!(
            parse_config("num_classes: many\n", ConfigFormat::Yaml),
            Err(ConfigError::Type(_))
        ));
        assert!(matches!(
            parse_config("- 1\n- 2\n", ConfigFormat::Yaml),
            Err(ConfigError::NotAMapping)
        ));
    }

    #[test]
    fn template_round_trips_in_both_formats() {
        let yaml = parse_config(&emit_template(ConfigFormat::Yaml), ConfigFormat::Yaml).unwrap();
        let json = parse_config(&emit_template(ConfigFormat::Json), ConfigFormat::Json).unwrap();
        assert_eq!(yaml, GeneratorConfig::default());
        assert_eq!(json, yaml);
    }

    #[test]
    fn template_names_every_parameter() {
        let names = [
            "num_classes",
            "max_depth",
            "avg_depth",
            "inheritance_ratio",
            "avg_disjointness",
            "num_relations",
            "prop_profiled_relations",
            "relation_specificity",
            "prop_asymmetric",
            "prop_symmetric",
            "prop_irreflexive",
            "prop_reflexive",
            "prop_transitive",
            "prop_functional",
            "prop_inversefunctional",
            "prop_inverseof",
            "prop_subproperties",
            "num_entities",
            "num_triples",
            "relation_balance",
            "prop_untyped",
            "avg_depth_specific",
            "multityping",
            "avg_multityping",
        ];
        assert_eq!(names.len(), PARAMETERS.len());
        let yaml = emit_template(ConfigFormat::Yaml);
        for name in names {
            let line = format!("\n{name}: ");
            assert!(yaml.contains(&line), "missing {name}");
            // each key is preceded by its description comment
            let at = yaml.find(&line).unwrap();
            let before = &yaml[..at];
            assert!(before.lines().last().unwrap().starts_with("# "));
        }
    }

    #[test]
    fn validation_cases() {
        assert!(validate_config(&GeneratorConfig::default()).is_empty());

        let cfg = GeneratorConfig {
            avg_depth: 4.0,
            max_depth: 3,
            ..Default::default()
        };
        assert_eq!(validate_config(&cfg).errors.len(), 1);

        let fig2 = GeneratorConfig {
            num_classes: 6,
            max_depth: 3,
            avg_depth: 1.5,
            inheritance_ratio: 2.5,
            ..Default::default()
        };
        let r = validate_config(&fig2);
        assert!(r.errors.is_empty());
        assert!(!r.warnings.is_empty());
        assert_eq!(r, validate_config(&fig2));

        let bad = GeneratorConfig {
            prop_untyped: 1.5,
            num_entities: 0,
            ..Default::default()
        };
        assert_eq!(validate_config(&bad).errors.len(), 2);
    }

    #[test]
    fn grid_schema_rows_validate_cleanly() {
        for (n, d, a) in [(25, 3, 1.5), (100, 4, 2.5), (250, 5, 3.0)] {
            let cfg = GeneratorConfig {
                num_classes: n,
                max_depth: d,
                avg_depth: a,
                relation_specificity: a,
                ..Default::default()
            };
            let r = validate_config(&cfg);
            assert!(r.is_empty(), "{r}");
        }
    }
}
