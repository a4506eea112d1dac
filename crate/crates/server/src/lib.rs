//! HTTP service: temporally attributed vector tiles, feature ingestion and
//! query, a content-addressed GLB model repository, and control-point
//! fitting for the georectification UI.
//!
//! | Method | Path | Purpose |
//! |---|---|---|
//! | GET | `/healthz` | status, snapshot version, counts |
//! | GET | `/tiles/{z}/{x}/{y}.mvt?time=` | MVT tile, optionally filtered to a date |
//! | POST | `/features` | ingest a Feature, FeatureCollection or array |
//! | GET | `/features?bbox=&time=` | query as a FeatureCollection |
//! | POST | `/models?title=&feature_id=&start_date=&end_date=` | upload a GLB body |
//! | GET | `/models/{id}` | fetch a GLB |
//! | GET | `/models?feature_id=` | list model records |
//! | POST | `/models/{id}/link` | `{"feature_id": n}` ties a model to a building |
//! | POST | `/warp/fit` | `{"pairs": [...], "kind": "affine"}` -> transform + residuals |
//! | POST | `/warp/residuals` | `{"pairs": [...], "transform": {...}}` -> residuals |

pub mod app;
pub mod config;
pub mod models;

use std::sync::Arc;

pub use app::{router, AppState};
pub use config::{ConfigError, ConfigOverrides, ServiceConfig};
pub use models::{ModelError, ModelMetadata, ModelRecord, ModelRepo};

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Store(#[from] timeatlas_core::store::StoreError),
    #[error(transparent)]
    Models(#[from] ModelError),
    #[error("cannot listen on {address}: {source}")]
    Bind {
        address: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Binds the configured address and serves until interrupted.
pub async fn serve(config: ServiceConfig) -> Result<(), ServerError> {
    let address = config.bind_address();
    let state = Arc::new(AppState::open(config)?);
    let listener = tokio::net::TcpListener::bind(&address)
        .await
        .map_err(|source| ServerError::Bind { address: address.clone(), source })?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
