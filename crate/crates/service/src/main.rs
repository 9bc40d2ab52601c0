use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use adaptfuse_core::aggregation::HttpChatConfig;
use adaptfuse_harness::Backend;
use adaptfuse_service::{router, Backends, SessionSnapshot, SessionStore};
use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};

#[derive(Parser)]
#[command(
    name = "adaptfuse-service",
    version,
    about = "Serve live preference-learning sessions over HTTP"
)]
struct Args {
    #[arg(long, env = "ADAPTFUSE_HOST", default_value = "127.0.0.1")]
    host: String,
    #[arg(long, env = "ADAPTFUSE_PORT", default_value_t = 8080)]
    port: u16,
    /// Sampler used when a session does not pick one.
    #[arg(long, env = "ADAPTFUSE_BACKEND", value_enum, default_value_t = BackendArg::Synthetic)]
    backend: BackendArg,
    /// Chat-completions base URL; enables the http backend.
    #[arg(long, env = "ADAPTFUSE_BASE_URL")]
    base_url: Option<String>,
    #[arg(long, env = "ADAPTFUSE_MODEL")]
    model: Option<String>,
    /// Allowed CORS origins, comma-separated; `*` for any.
    #[arg(long, env = "ADAPTFUSE_CORS_ORIGIN", value_delimiter = ',', default_value = "*")]
    cors_origin: Vec<String>,
    /// Idle time after which a session is dropped.
    #[arg(long, env = "ADAPTFUSE_SESSION_TTL_SECS", default_value_t = 1800)]
    ttl_secs: u64,
    /// Restore sessions from this file on start and write them back on shutdown.
    #[arg(long, env = "ADAPTFUSE_SNAPSHOT")]
    snapshot: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Synthetic,
    Http,
}

fn backends(args: &Args) -> Result<Backends> {
    let default_backend = match args.backend {
        BackendArg::Synthetic => Backend::Synthetic,
        BackendArg::Http => Backend::Http,
    };
    let http = match (&args.base_url, default_backend) {
        (Some(url), _) => {
            let mut config = HttpChatConfig {
                base_url: url.clone(),
                ..Default::default()
            };
            if let Some(model) = &args.model {
                config.model = model.clone();
            }
            Some(config.with_env_api_key())
        }
        (None, Backend::Http) => anyhow::bail!("--backend http needs --base-url"),
        (None, Backend::Synthetic) => None,
    };
    Ok(Backends {
        default_backend,
        http,
        ..Default::default()
    })
}

fn load_snapshot(store: &SessionStore, path: &Path) -> Result<()> {
    if !path.exists() {
        return Ok(());
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let snaps: Vec<SessionSnapshot> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let total = snaps.len();
    for (id, err) in store.restore(snaps) {
        log::warn!("could not restore session {id}: {err}");
    }
    log::info!("restored {} of {total} sessions from {}", store.len(), path.display());
    Ok(())
}

fn save_snapshot(store: &SessionStore, path: &Path) -> Result<()> {
    let text = serde_json::to_string(&store.snapshot())?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    log::info!("saved {} sessions to {}", store.len(), path.display());
    Ok(())
}

#[tokio::main]
async fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let ttl = Duration::from_secs(args.ttl_secs);
    let store = Arc::new(SessionStore::new(backends(&args)?, ttl));
    if let Some(path) = &args.snapshot {
        load_snapshot(&store, path)?;
    }

    let sweeper = store.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            let removed = sweeper.sweep(Instant::now());
            if removed > 0 {
                log::info!("dropped {removed} idle sessions");
            }
        }
    });

    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .with_context(|| format!("bad listen address {}:{}", args.host, args.port))?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    log::info!("listening on http://{addr}");
    axum::serve(listener, router(store.clone(), &args.cors_origin))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;

    if let Some(path) = &args.snapshot {
        save_snapshot(&store, path)?;
    }
    Ok(())
}
