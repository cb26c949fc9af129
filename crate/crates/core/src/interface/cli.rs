//! `mathkb` command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::ontology::{load_ontology_file, parse_ontology_document, validate, Ontology};
use crate::recommender::{recommend, ProfileSet};
use crate::search::{aggregate, AggregateCriteria, Index, SemanticQuery};

use super::{
    document_rdf, formula_search, ingest_dir, load_patterns, parse_rdf_format, parse_segment_type,
    segment_search, split_concepts, ApiError, FormulaQuery, ServiceConfig, DEFAULT_BASE_IRI,
};

pub const DEFAULT_INDEX: &str = "mathkb-index.json";

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mathkb",
    version,
    about = "Semantic indexing and search for mathematical articles"
)]
pub struct Cli {
    /// Index snapshot written by `ingest` and read by the query commands.
    #[arg(long, global = true, default_value = DEFAULT_INDEX)]
    pub index: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, annotate and index every .tex file of a directory.
    Ingest {
        dir: PathBuf,
        #[arg(long)]
        ontology: PathBuf,
        /// Binding-template file replacing the built-in templates.
        #[arg(long)]
        patterns: Option<PathBuf>,
    },
    /// Write RDF for one document or all of them.
    ExportRdf(ExportArgs),
    #[command(subcommand)]
    Search(SearchCommand),
    /// List segments and formulas meeting all given criteria.
    Aggregate {
        #[arg(long = "type")]
        segment_type: Option<String>,
        #[arg(long)]
        area: Option<String>,
        #[arg(long)]
        object: Option<String>,
    },
    /// Related documents for a document.
    Recommend {
        doc_id: String,
        #[arg(long, default_value = "referee")]
        profile: String,
        #[arg(short = 'k', default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
        /// JSON file with additional profiles.
        #[arg(long)]
        profiles: Option<PathBuf>,
    },
    #[command(subcommand)]
    Ontology(OntologyCommand),
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, required_unless_present = "all", conflicts_with = "all")]
    pub doc: Option<String>,
    #[arg(long)]
    pub all: bool,
    #[arg(long, default_value = "nt")]
    pub format: String,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value = DEFAULT_BASE_IRI)]
    pub base: String,
}

#[derive(Debug, Subcommand)]
pub enum SearchCommand {
    /// Formula search by pattern or by concepts.
    Formula {
        #[arg(long, conflicts_with_all = ["concepts", "scope", "no_expand"], required_unless_present = "concepts")]
        pattern: Option<String>,
        /// Comma-separated concept ids.
        #[arg(long)]
        concepts: Option<String>,
        #[arg(long)]
        scope: Option<String>,
        #[arg(long)]
        no_expand: bool,
    },
    /// Segments of a type connected to a concept.
    Segments {
        #[arg(long = "type")]
        segment_type: String,
        #[arg(long)]
        via: String,
        /// Concept id or label.
        #[arg(long)]
        target: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum OntologyCommand {
    /// Report integrity errors and warnings of an ontology file.
    Validate { path: PathBuf },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Api(#[from] ApiError),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Api(e) if e.status.is_client_error() => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

fn load_index(path: &Path) -> Result<Index, CliError> {
    Index::load(path).map_err(|e| CliError::Failed(format!("cannot load index {}: {e}", path.display())))
}

fn print_json(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::Failed(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Ingest {
            dir,
            ontology,
            patterns,
        } => {
            let ontology: Arc<Ontology> = Arc::new(load_ontology_file(&ontology).map_err(ApiError::from)?);
            let patterns = load_patterns(patterns.as_deref())?;
            let (index, report) = ingest_dir(&dir, ontology, &patterns).map_err(ApiError::from)?;
            write!(err, "{report}")?;
            if report.indexed.is_empty() {
                return Ok(EXIT_FAILURE);
            }
            index.save(&cli.index).map_err(ApiError::from)?;
            writeln!(out, "{}", cli.index.display())?;
            Ok(EXIT_OK)
        }
        Command::ExportRdf(args) => {
            let index = load_index(&cli.index)?;
            let format = parse_rdf_format(&args.format)?;
            let ids: Vec<String> = match args.doc {
                Some(id) => vec![id],
                None => index.documents().iter().map(|d| d.doc.id.clone()).collect(),
            };
            std::fs::create_dir_all(&args.out_dir)?;
            for id in ids {
                let bytes = document_rdf(&index, &id, &args.base, format)?;
                let path = args.out_dir.join(format!("{id}.{}", format.extension()));
                std::fs::write(&path, bytes)?;
                writeln!(out, "{}", path.display())?;
            }
            Ok(EXIT_OK)
        }
        Command::Search(SearchCommand::Formula {
            pattern,
            concepts,
            scope,
            no_expand,
        }) => {
            let index = load_index(&cli.index)?;
            let query = match (pattern, concepts) {
                (Some(p), _) => FormulaQuery::Syntactic(p),
                (None, Some(c)) => {
                    let mut q = SemanticQuery::new(split_concepts(&c)).expand(!no_expand);
                    if let Some(s) = scope {
                        q = q.scope(parse_segment_type(&s)?);
                    }
                    FormulaQuery::Semantic(q)
                }
                (None, None) => return Err(ApiError::bad_request("give --pattern or --concepts").into()),
            };
            print_json(out, &formula_search(&index, &query)?)?;
            Ok(EXIT_OK)
        }
        Command::Search(SearchCommand::Segments {
            segment_type,
            via,
            target,
        }) => {
            let index = load_index(&cli.index)?;
            print_json(out, &segment_search(&index, &segment_type, &via, &target)?)?;
            Ok(EXIT_OK)
        }
        Command::Aggregate {
            segment_type,
            area,
            object,
        } => {
            let index = load_index(&cli.index)?;
            let criteria = AggregateCriteria {
                segment_type: segment_type.as_deref().map(parse_segment_type).transpose()?,
                area,
                object,
            };
            print_json(out, &aggregate(&index, &criteria).map_err(ApiError::from)?)?;
            Ok(EXIT_OK)
        }
        Command::Recommend {
            doc_id,
            profile,
            k,
            profiles,
        } => {
            let index = load_index(&cli.index)?;
            let set = match profiles {
                Some(path) => ProfileSet::load(path).map_err(ApiError::from)?,
                None => ProfileSet::default(),
            };
            let profile = set.get(&profile).map_err(ApiError::from)?;
            let list = recommend(&index, &doc_id, profile, k as usize).map_err(ApiError::from)?;
            print_json(out, &list)?;
            Ok(EXIT_OK)
        }
        Command::Ontology(OntologyCommand::Validate { path }) => {
            let file = std::fs::File::open(&path)?;
            let doc = parse_ontology_document(std::io::BufReader::new(file)).map_err(ApiError::from)?;
            let report = validate(&Ontology::from_document(doc));
            writeln!(out, "{report}")?;
            Ok(if report.is_valid() { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Serve { config } => {
            let config = ServiceConfig::load(&config).map_err(|e| CliError::Failed(e.to_string()))?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime
                .block_on(super::http::serve(config))
                .map_err(|e| CliError::Failed(e.to_string()))?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs one parsed command, writing results to `out` and diagnostics to
/// `err`. Returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            let _ = write!(err, "{e}");
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            }
        }
    }
}
