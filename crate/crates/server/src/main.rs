use anyhow::Context;
use clap::Parser;
use schemagraph_core::project::ProjectManager;
use schemagraph_server::{serve, AppState, Args, Config};
use tokio::net::TcpListener;
use tracing_subscriber::EnvFilter;

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")),
        )
        .init();
    let config = Config::resolve(Args::parse())?;
    let manager = ProjectManager::open(config.store.clone()).context("restoring projects")?;
    let listener = TcpListener::bind(config.listen)
        .await
        .with_context(|| format!("binding {}", config.listen))?;
    tracing::info!(
        listen = %listener.local_addr()?,
        data_dir = ?config.store.data_dir,
        fsync = ?config.store.fsync,
        "serving"
    );
    serve(listener, AppState::new(manager), async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(())
}
