use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use surfdyn::annulus::CollapseChoice;
use surfdyn::canon::{adjust, condense, AdjustedGraph, Census, CollapseChoices};
use surfdyn::document::{parse_census, DocumentError, GraphDocument, Loaded};
use surfdyn::error::Error;
use surfdyn::nielsen::{analyze, NielsenReport, Stage};
use surfdyn::render::{dot_report, text_report};

mod shadow;

#[derive(Parser)]
#[command(name = "surfdyn", version, about = "Canonical forms and periodic orbit classes of reducible surface maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a graph document against the structural rules.
    Validate { file: PathBuf },
    /// Write the adjusted graph.
    Adjust {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value = "left")]
        collapse: CollapseArg,
    },
    /// Write the condensed graph.
    Condense {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value = "left")]
        collapse: CollapseArg,
    },
    /// Periodic Nielsen classes up to a period.
    Classes {
        file: PathBuf,
        #[arg(long)]
        max_period: u64,
        /// JSON file `{piece: {period: count}}` of interior pseudo-Anosov orbits.
        #[arg(long)]
        census: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Full report on a graph: pieces, orbits, relations and classes.
    Report {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, default_value_t = 6)]
        max_period: u64,
        #[arg(long)]
        census: Option<PathBuf>,
    },
    /// Shadowing and flip-annulus experiments.
    Shadow {
        #[command(subcommand)]
        experiment: shadow::Experiment,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CollapseArg {
    Left,
    Right,
}

impl From<CollapseArg> for CollapseChoice {
    fn from(c: CollapseArg) -> Self {
        match c {
            CollapseArg::Left => CollapseChoice::Left,
            CollapseArg::Right => CollapseChoice::Right,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn check(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<DocumentError> for Failure {
    fn from(e: DocumentError) -> Self {
        match e {
            DocumentError::Syntax { .. } | DocumentError::MissingField { .. } => Self::usage(e.to_string()),
            _ => Self::check(e.to_string()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::check(e.to_string())
    }
}

impl From<surfdyn::error::NumericError> for Failure {
    fn from(e: surfdyn::error::NumericError) -> Self {
        Self::usage(e.to_string())
    }
}

pub type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports always serialize");
    s.push('\n');
    s
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let doc = GraphDocument::parse(&read(path)?).map_err(|e| match e {
        DocumentError::Syntax { .. } => Failure::usage(format!("{}: {e}", path.display())),
        other => other.into(),
    })?;
    let loaded = doc.load()?;
    let report = loaded.graph().validate();
    if !report.is_valid() {
        return Err(Failure::check(format!("{}: invalid graph\n{report}", path.display())));
    }
    Ok(loaded)
}

fn adjusted(loaded: Loaded, collapse: CollapseChoice) -> Result<AdjustedGraph, Failure> {
    match loaded {
        Loaded::Input(g) => Ok(adjust(&g, &CollapseChoices::uniform(collapse))?),
        Loaded::Adjusted(a) => Ok(a),
        Loaded::Condensed(c) => Ok(c.as_adjusted()),
    }
}

fn census(path: Option<&PathBuf>) -> Result<Option<Census>, Failure> {
    path.map(|p| {
        parse_census(&read(p)?).map_err(|e| match e {
            DocumentError::Syntax { .. } => Failure::usage(format!("{}: {e}", p.display())),
            other => other.into(),
        })
    })
    .transpose()
}

/// Analysis at the stage the document declares; input documents are adjusted first.
fn analyze_loaded(loaded: &Loaded, max_period: u64, census: Option<&Census>) -> Result<(NielsenReport, Option<AdjustedGraph>), Failure> {
    match loaded {
        Loaded::Input(g) => {
            let a = adjust(g, &CollapseChoices::default())?;
            let report = analyze(&a, max_period, census)?;
            Ok((report, Some(a)))
        }
        Loaded::Adjusted(a) => Ok((analyze(a, max_period, census)?, None)),
        Loaded::Condensed(c) => Ok((analyze(c, max_period, census)?, None)),
    }
}

fn collapses_of<'a>(loaded: &'a Loaded, adjusted: &'a Option<AdjustedGraph>) -> Stage<'a> {
    match (loaded, adjusted) {
        (_, Some(a)) => Stage::Adjusted(a),
        (Loaded::Adjusted(a), None) => Stage::Adjusted(a),
        (Loaded::Condensed(c), None) => Stage::Condensed(c),
        (Loaded::Input(_), None) => unreachable!("input documents are always adjusted"),
    }
}

fn classes_text(report: &NielsenReport) -> String {
    let mut out = String::new();
    for c in &report.classes {
        let kinds: Vec<String> = c.kinds.iter().map(|k| k.to_string()).collect();
        let flag = |b: Option<bool>| match b {
            Some(true) => "yes",
            Some(false) => "no",
            None => "?",
        };
        out.push_str(&format!(
            "class {} period {} index {} members [{}] collapsible {} essential {} persistent {}{}\n",
            c.id,
            c.period,
            c.index,
            kinds.join(", "),
            if c.collapsible { "yes" } else { "no" },
            flag(c.essential),
            flag(c.persistent),
            if c.multiplicity > 1 { format!(" x{}", c.multiplicity) } else { String::new() }
        ));
    }
    if !report.inventory.census_absent.is_empty() {
        let ids: Vec<String> = report.inventory.census_absent.iter().map(|p| p.to_string()).collect();
        out.push_str(&format!("census absent: {}\n", ids.join(", ")));
    }
    out
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { file } => {
            load(&file)?;
            println!("valid");
            Ok(())
        }
        Command::Adjust { file, output, collapse } => {
            let a = adjusted(load(&file)?, collapse.into())?;
            write(&output, &GraphDocument::from_adjusted(&a).to_json())?;
            println!(
                "adjusted: {} pieces, {} annuli, {} merges",
                a.graph.pieces.len(),
                a.graph.annuli.len(),
                a.merges.len()
            );
            Ok(())
        }
        Command::Condense { file, output, collapse } => {
            let loaded = load(&file)?;
            let c = match loaded {
                Loaded::Condensed(c) => condense(&c.as_adjusted())?,
                other => condense(&adjusted(other, collapse.into())?)?,
            };
            write(&output, &GraphDocument::from_condensed(&c).to_json())?;
            println!(
                "condensed: {} pieces, {} annuli, {} junctions, {} orbit records",
                c.graph.pieces.len(),
                c.graph.annuli.len(),
                c.graph.junctions.len(),
                c.orbit_inventory.len()
            );
            Ok(())
        }
        Command::Classes {
            file,
            max_period,
            census: census_path,
            format,
        } => {
            let loaded = load(&file)?;
            let census = census(census_path.as_ref())?;
            let (report, _) = analyze_loaded(&loaded, max_period, census.as_ref())?;
            match format {
                Format::Json => print!("{}", to_json(&report.classes)),
                Format::Text => print!("{}", classes_text(&report)),
                Format::Dot => print!("{}", dot_report(&report)),
            }
            Ok(())
        }
        Command::Report {
            file,
            format,
            max_period,
            census: census_path,
        } => {
            let loaded = load(&file)?;
            let census = census(census_path.as_ref())?;
            let (report, adj) = analyze_loaded(&loaded, max_period, census.as_ref())?;
            match format {
                Format::Json => print!("{}", to_json(&report)),
                Format::Dot => print!("{}", dot_report(&report)),
                Format::Text => {
                    let stage = collapses_of(&loaded, &adj);
                    let collapses = match stage {
                        Stage::Adjusted(a) => &a.collapses,
                        Stage::Condensed(c) => &c.collapses,
                    };
                    print!("{}", text_report(stage.graph(), collapses, &report));
                }
            }
            Ok(())
        }
        Command::Shadow { experiment } => shadow::run(experiment),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
