use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use ontogrow::insertion::{attach_and_patch, Outcome};
use ontogrow::tree::build_tree;
use ontogrow_cli::commands::{self, InsertOptions, NluArgs};
use ontogrow_cli::http::{self, ServeConfig};

#[derive(Parser)]
#[command(name = "ontogrow", version, about = "Grow a conversational topic ontology at run time")]
struct Cli {
    #[command(flatten)]
    nlu: NluArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the dialogue tree built from an ontology.
    BuildTree {
        ontology: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract candidate concepts from each reply of a corpus.
    Extract {
        ontology: PathBuf,
        corpus: PathBuf,
        /// Also write the labelled recognition report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Insert a concept, answering questions on the terminal or by script.
    Insert {
        ontology: PathBuf,
        concept: String,
        #[arg(long)]
        method: u8,
        /// Oracle user as JSON: target_parent, definition_script, sentence_script.
        #[arg(long, conflicts_with = "interactive")]
        oracle: Option<PathBuf>,
        #[arg(long)]
        interactive: bool,
        #[arg(long)]
        entity_type: Option<String>,
        /// Sentence about the concept, for method 4.
        #[arg(long)]
        sentence: Option<String>,
        /// Write the grown ontology here after an interactive insertion.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Confusion matrix and metrics over a tagged corpus.
    EvalRecognition { ontology: PathBuf, corpus: PathBuf },
    /// Step counts of every method for every noun, with signed-rank tests.
    EvalInsertion {
        ontology: PathBuf,
        nouns: PathBuf,
        scripts: PathBuf,
        #[arg(long)]
        steps_out: Option<PathBuf>,
        #[arg(long)]
        wilcoxon_out: Option<PathBuf>,
    },
    /// Run the HTTP session API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        ontology: PathBuf,
        /// Method policy, tried in order.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        methods: Vec<u8>,
        #[arg(long, default_value = "user")]
        user: String,
        #[arg(long)]
        journal: Option<PathBuf>,
    },
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::BuildTree { ontology, out } => emit(&commands::build_tree_cmd(&ontology)?, out.as_deref()),
        Command::Extract { ontology, corpus, report } => {
            let nlu = cli.nlu.load()?;
            emit(&commands::extract_cmd(&ontology, &corpus, report.as_deref(), &nlu)?, None)
        }
        Command::Insert {
            ontology,
            concept,
            method,
            oracle,
            interactive: _,
            entity_type,
            sentence,
            out,
        } => {
            let nlu = cli.nlu.load()?;
            let opts = InsertOptions {
                method,
                entity_type,
                sentence,
            };
            if let Some(script) = oracle {
                return emit(&commands::insert_with_oracle(&ontology, &concept, &opts, &script, &nlu)?, None);
            }
            let mut onto = commands::load_ontology_file(&ontology)?;
            let stdin = io::stdin();
            let mut session =
                commands::insert_interactive(&onto, &concept, &opts, &nlu, &mut stdin.lock(), &mut io::stdout())?;
            if let Some(path) = out {
                if session.outcome != Outcome::Inserted {
                    bail!("nothing was inserted");
                }
                let tree = build_tree(&onto);
                attach_and_patch(&mut session, &mut onto, &tree)?;
                emit(&onto.to_json(), Some(&path))?;
            }
            Ok(())
        }
        Command::EvalRecognition { ontology, corpus } => {
            let nlu = cli.nlu.load()?;
            emit(&commands::eval_recognition_cmd(&ontology, &corpus, &nlu)?, None)
        }
        Command::EvalInsertion {
            ontology,
            nouns,
            scripts,
            steps_out,
            wilcoxon_out,
        } => {
            let nlu = cli.nlu.load()?;
            let out = commands::eval_insertion_cmd(&ontology, &nouns, &scripts, &nlu)?;
            emit(&out.steps_csv, steps_out.as_deref())?;
            emit(&out.wilcoxon_csv, wilcoxon_out.as_deref())?;
            emit(&out.averages, None)
        }
        Command::Serve {
            port,
            ontology,
            methods,
            user,
            journal,
        } => {
            let cfg = ServeConfig {
                port,
                ontology,
                methods,
                user,
                journal,
            };
            let engine = match http::engine_from_config(&cfg, &cli.nlu) {
                Ok(engine) => engine,
                Err(problems) => {
                    for p in &problems {
                        eprintln!("config error: {p}");
                    }
                    bail!("{} configuration error(s)", problems.len());
                }
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind(("0.0.0.0", cfg.port))
                    .await
                    .with_context(|| format!("binding port {}", cfg.port))?;
                eprintln!("listening on {}", listener.local_addr()?);
                http::serve(listener, engine).await?;
                Ok(())
            })
        }
    }
}
