use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use omhc_client::Client;
use omhc_core::corpus::Corpus;
use omhc_core::labeling::{import_labels, HeuristicProvider, LabelProvider, LabelTable};
use omhc_core::llm::LlmConfig;
use omhc_core::search::{SearchConfig, SearchIndex};
use omhc_core::session::SessionDocument;
use omhc_core::similarity::{embed_corpus, HttpEmbedder, PairSet, BUILTIN_PROVIDER, EXTERNAL_PROVIDER, EMBED_URL_ENV};
use omhc_core::topics::{sweep_k, LdaConfig, DEFAULT_ITERATIONS};
use omhc_server::{AppState, ServerConfig, Store};

#[derive(Parser)]
#[command(name = "omhc", version, about = "Build stores for and run the support exploration service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean a JSON-lines dump of posts and comments into a store.
    Ingest {
        #[arg(long)]
        dump: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the full-text index over the stored posts.
    Index {
        #[arg(long)]
        store: PathBuf,
        /// Defaults to the store directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Label every post and comment with support levels.
    Label {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, value_enum, default_value_t = ProviderArg::Heuristic)]
        provider: ProviderArg,
        /// CSV of precomputed labels (with `--provider file`).
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Alternative lexicon file for the heuristic provider.
        #[arg(long)]
        lexicons: Option<PathBuf>,
    },
    /// Compute similar post pairs.
    Pairs {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value_t = omhc_core::similarity::DEFAULT_THRESHOLD)]
        theta: f64,
        /// External embedding service; defaults to $EMBED_URL, else the builtin vectorizer.
        #[arg(long)]
        embed_url: Option<String>,
    },
    /// Report topic coherence for a range of k on one query's results.
    SweepK {
        #[arg(long)]
        store: PathBuf,
        /// Defaults to the store directory.
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        query: String,
        /// Inclusive range such as `1..10`.
        #[arg(long, default_value = "1..10", value_parser = parse_range)]
        k_range: (usize, usize),
        #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
        iterations: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        store: PathBuf,
        /// Defaults to the store directory.
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
    /// Export or import a session through a running server.
    Session {
        #[command(subcommand)]
        action: SessionAction,
    },
}

#[derive(Subcommand)]
enum SessionAction {
    Export {
        #[arg(long, default_value = "http://127.0.0.1:8080")]
        server: String,
        #[arg(long)]
        session: String,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Import {
        #[arg(long, default_value = "http://127.0.0.1:8080")]
        server: String,
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProviderArg {
    Heuristic,
    File,
}

fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or("expected LO..HI")?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let lo: usize = a.trim().parse().map_err(|_| format!("bad lower bound {a:?}"))?;
    let hi: usize = b.trim().parse().map_err(|_| format!("bad upper bound {b:?}"))?;
    if lo == 0 || lo > hi {
        return Err("need 1 <= LO <= HI".into());
    }
    Ok((lo, hi))
}

fn require_dir(dir: &Path, what: &str, command: &str) -> Result<()> {
    if !dir.is_dir() {
        bail!("{what} {} not found; run `omhc {command}` first", dir.display());
    }
    Ok(())
}

fn print_json(v: &omhc_core::corpus::CorpusStats) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let _ = tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .try_init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", render(&e));
            ExitCode::FAILURE
        }
    }
}

/// The error chain, skipping causes the previous message already quotes.
fn render(e: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut last = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if last.contains(&msg) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&msg);
        last = msg;
    }
    out
}

fn runtime() -> Result<tokio::runtime::Runtime> {
    Ok(tokio::runtime::Builder::new_multi_thread().enable_all().build()?)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest { dump, out } => {
            let t = Instant::now();
            let (corpus, stats) = Corpus::ingest_file(&dump)?;
            corpus.save(&stats, &out)?;
            print_json(&stats)?;
            eprintln!("ingested into {} in {:.2?}", out.display(), t.elapsed());
        }
        Command::Index { store, out } => {
            require_dir(&store, "store", "ingest")?;
            let corpus = Corpus::load(&store)?;
            let index = SearchIndex::build(&corpus);
            let out = out.unwrap_or(store);
            index.save(&out)?;
            eprintln!("indexed {} posts, {} terms into {}", index.n_docs(), index.n_terms(), out.display());
        }
        Command::Label { store, provider, labels, lexicons } => {
            require_dir(&store, "store", "ingest")?;
            let corpus = Corpus::load(&store)?;
            let provider: Box<dyn LabelProvider> = match provider {
                ProviderArg::Heuristic => match lexicons {
                    Some(p) => Box::new(HeuristicProvider::from_file(&p)?),
                    None => Box::new(HeuristicProvider::default()),
                },
                ProviderArg::File => {
                    let path = labels.context("--provider file needs --labels <CSV>")?;
                    Box::new(import_labels(&path)?)
                }
            };
            let table = LabelTable::label_corpus(&corpus, provider.as_ref());
            table.save(&store)?;
            eprintln!("labeled {} posts and {} comments with {}", table.posts.len(), table.comments.len(), provider.name());
        }
        Command::Pairs { store, theta, embed_url } => {
            require_dir(&store, "store", "ingest")?;
            let corpus = Corpus::load(&store)?;
            let url = embed_url.or_else(|| std::env::var(EMBED_URL_ENV).ok().filter(|u| !u.is_empty()));
            let (vectors, provider) = match url {
                Some(url) => {
                    let docs: Vec<(String, String)> = corpus.posts().map(|p| (p.id.clone(), p.full_text())).collect();
                    let vectors = runtime()?.block_on(HttpEmbedder::new(url).embed_batch(&docs))?;
                    (vectors, EXTERNAL_PROVIDER)
                }
                None => (embed_corpus(&corpus), BUILTIN_PROVIDER),
            };
            let pairs = PairSet::compute(&vectors, theta, provider)?;
            pairs.save(&store)?;
            eprintln!("{} similar pairs at theta {theta} ({provider})", pairs.pairs.len());
        }
        Command::SweepK { store, index, query, k_range, iterations, seed } => {
            require_dir(&store, "store", "ingest")?;
            let index_dir = index.unwrap_or_else(|| store.clone());
            let corpus = Corpus::load(&store)?;
            let index = SearchIndex::load(&index_dir).context("run `omhc index` first")?;
            let outcome = index.search(&query, &SearchConfig::default());
            let docs: Vec<(String, String)> = outcome
                .results
                .iter()
                .filter_map(|r| corpus.post(&r.post_id))
                .map(|p| (p.id.clone(), p.full_text()))
                .collect();
            if docs.is_empty() {
                bail!("query {query:?} matches no posts");
            }
            let base = LdaConfig { iterations, seed, ..LdaConfig::default() };
            let points = sweep_k(&docs, k_range.0..=k_range.1, &base);
            println!("k\tcoherence");
            for p in &points {
                println!("{}\t{:.4}", p.k, p.coherence);
            }
        }
        Command::Serve { port, store, index, config, host } => {
            let mut cfg = match &config {
                Some(p) => ServerConfig::from_file(p)?,
                None => ServerConfig::default(),
            };
            if let Some(port) = port {
                cfg.port = port;
            }
            require_dir(&store, "store", "ingest")?;
            let index_dir = index.unwrap_or_else(|| store.clone());
            let loaded = Store::load(&store, &index_dir)?.with_theta(cfg.theta)?;
            let llm = LlmConfig::from_env();
            let state = AppState::new(loaded, cfg.clone(), llm.provider())?;
            let addr = SocketAddr::new(host, cfg.port);
            runtime()?.block_on(omhc_server::serve(state, addr, |bound| {
                println!("listening on http://{bound}");
            }))?;
        }
        Command::Session { action } => {
            let rt = runtime()?;
            match action {
                SessionAction::Export { server, session, out } => {
                    let doc = rt.block_on(Client::new(server).export_session(&session))?;
                    let text = serde_json::to_string_pretty(&doc)?;
                    match out {
                        Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                        None => println!("{text}"),
                    }
                }
                SessionAction::Import { server, file } => {
                    let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
                    let doc: SessionDocument = serde_json::from_str(&text).context("not a session document")?;
                    let created = rt.block_on(Client::new(server).import_session(&doc))?;
                    println!("{}", created.session_id);
                }
            }
        }
    }
    Ok(())
}
