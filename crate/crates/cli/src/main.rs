use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use kgsynth::bench::{run_grid, GridSpec, GRAPH_ROWS, SCHEMA_ROWS};
use kgsynth::config::{emit_template, parse_config, ConfigFormat};
use kgsynth::pipeline::{self, shared_matrix, Mode};
use kgsynth::serializer::{parse_ntriples, IriPolicy};
use kgsynth::{check_consistency, check_schema_consistency, OutputFormat};

#[derive(Parser, Debug)]
#[command(name = "kgsynth", version, about = "Synthetic schema and knowledge graph generator")]
struct Cli {
    /// Only print errors
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a configuration template with every parameter
    Template {
        path: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = TemplateFormat::Yaml)]
        format: TemplateFormat,
        /// Overwrite an existing file
        #[arg(long)]
        force: bool,
    },
    /// Generate a schema, a graph, or both from a configuration file
    Generate {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = RunMode::Both)]
        mode: RunMode,
        /// Existing schema.nt for `--mode kg`
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Output formats; repeat to write several
        #[arg(long, value_enum)]
        format: Vec<RdfFormat>,
    },
    /// Check a graph against a schema
    Check {
        kg: PathBuf,
        schema: PathBuf,
        /// Print violations as JSON lines
        #[arg(long)]
        json: bool,
    },
    /// Print the characteristic compatibility matrix
    Matrix,
    /// Run the experiment grid
    Grid {
        /// Comma-separated seeds
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        seeds: Vec<u64>,
        /// Schema rows to run, e.g. S1,S4
        #[arg(long, value_delimiter = ',')]
        schemas: Vec<String>,
        /// Graph rows to run, e.g. G1,G2
        #[arg(long, value_delimiter = ',')]
        graphs: Vec<String>,
        /// Also write the report as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Include stage timings
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TemplateFormat {
    Yaml,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum RunMode {
    Schema,
    Kg,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RdfFormat {
    #[value(alias = "nt")]
    Ntriples,
    #[value(alias = "ttl")]
    Turtle,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match dispatch(cli.command, cli.quiet) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command, quiet: bool) -> Result<ExitCode> {
    match command {
        Command::Template {
            path,
            format,
            force,
        } => template(path, format, force),
        Command::Generate {
            config,
            mode,
            schema,
            seed,
            output_dir,
            format,
        } => generate(&config, mode, schema.as_deref(), seed, output_dir, format, quiet),
        Command::Check { kg, schema, json } => check(&kg, &schema, json),
        Command::Matrix => {
            print!("{}", shared_matrix().to_table());
            Ok(ExitCode::SUCCESS)
        }
        Command::Grid {
            seeds,
            schemas,
            graphs,
            csv,
            timings,
        } => grid(seeds, &schemas, &graphs, csv, timings),
    }
}

fn template(path: Option<PathBuf>, format: TemplateFormat, force: bool) -> Result<ExitCode> {
    let format = match format {
        TemplateFormat::Yaml => ConfigFormat::Yaml,
        TemplateFormat::Json => ConfigFormat::Json,
    };
    let path = path.unwrap_or_else(|| PathBuf::from(format.template_file_name()));
    if path.exists() && !force {
        bail!("{} already exists; pass --force to overwrite", path.display());
    }
    fs::write(&path, emit_template(format))
        .with_context(|| format!("cannot write {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn generate(
    config: &Path,
    mode: RunMode,
    schema_path: Option<&Path>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    formats: Vec<RdfFormat>,
    quiet: bool,
) -> Result<ExitCode> {
    let text = fs::read_to_string(config)
        .with_context(|| format!("cannot read {}", config.display()))?;
    let mut cfg = parse_config(&text, ConfigFormat::from_path(config))
        .with_context(|| format!("in {}", config.display()))?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    if !formats.is_empty() {
        cfg.formats = formats
            .into_iter()
            .map(|f| match f {
                RdfFormat::Ntriples => OutputFormat::Ntriples,
                RdfFormat::Turtle => OutputFormat::Turtle,
            })
            .collect();
        cfg.formats.sort();
        cfg.formats.dedup();
    }

    let (mode, schema) = match mode {
        RunMode::Schema => (Mode::Schema, None),
        RunMode::Both => (Mode::Both, None),
        RunMode::Kg => {
            let Some(path) = schema_path else {
                bail!("--mode kg needs --schema <schema.nt>");
            };
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read schema {}", path.display()))?;
            let parsed = parse_ntriples(&text, &IriPolicy::default())
                .with_context(|| format!("in {}", path.display()))?;
            (Mode::Kg, Some(parsed.schema))
        }
    };

    let run_name = config
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("run")
        .to_string();
    let dir = pipeline::run_dir(&cfg, &run_name);

    let mut run = pipeline::run(&cfg, mode, schema)?;
    for w in &run.warnings {
        log::warn!("{w}");
    }
    let written = pipeline::write_artifacts(&mut run, &dir)?;
    if !quiet {
        for path in &written {
            println!("{}", path.display());
        }
        for (name, d) in run.timings.stages() {
            log::info!("{name}: {:.3}s", d.as_secs_f64());
        }
    }
    if run.is_consistent() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "warning: generated artifacts are inconsistent; see {}",
            dir.join("report.txt").display()
        );
        Ok(ExitCode::from(2))
    }
}

fn check(kg_path: &Path, schema_path: &Path, json: bool) -> Result<ExitCode> {
    let read = |p: &Path| {
        fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))
    };
    let policy = IriPolicy::default();
    let schema_text = read(schema_path)?;
    let kg_text = read(kg_path)?;
    let combined = format!("{schema_text}\n{kg_text}");
    let parsed = parse_ntriples(&combined, &policy).map_err(|mut e| {
        // point at the graph file when the error lies there
        let offset = schema_text.lines().count() + 1;
        let path = if e.line > offset {
            e.line -= offset;
            kg_path
        } else {
            schema_path
        };
        anyhow::anyhow!("in {}: {e}", path.display())
    })?;
    for (line, text) in &parsed.skipped {
        log::warn!("skipped unsupported statement ({line}): {text}");
    }

    let schema_report = check_schema_consistency(&parsed.schema);
    let report = if schema_report.consistent {
        check_consistency(&parsed.schema, &parsed.kg)
    } else {
        schema_report
    };
    if json {
        print!("{}", report.to_json_lines());
    } else {
        print!("{}", report.to_text());
    }
    Ok(if report.consistent {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn grid(
    seeds: Vec<u64>,
    schemas: &[String],
    graphs: &[String],
    csv: Option<PathBuf>,
    timings: bool,
) -> Result<ExitCode> {
    let mut spec = GridSpec::full(seeds);
    if !schemas.is_empty() {
        spec.schemas = SCHEMA_ROWS
            .into_iter()
            .filter(|r| schemas.iter().any(|s| s.eq_ignore_ascii_case(r.name)))
            .collect();
    }
    if !graphs.is_empty() {
        spec.graphs = GRAPH_ROWS
            .into_iter()
            .filter(|r| graphs.iter().any(|g| g.eq_ignore_ascii_case(r.name)))
            .collect();
    }
    if spec.schemas.is_empty() || spec.graphs.is_empty() {
        bail!("no grid rows selected");
    }
    let report = run_grid(&spec);
    print!("{}", report.to_table(timings));
    if let Some(path) = csv {
        fs::write(&path, report.to_csv(timings))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(if report.consistent_count() == report.cells.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
