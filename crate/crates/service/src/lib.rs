//! HTTP service for the interactive workflow: upload an image, place seeds,
//! segment, inspect the maps, add seeds and segment again.
//!
//! Segmentation runs as a background job per request (`202` then poll). Every
//! segment request appends a seed revision; results stay retrievable by
//! revision index.

mod api;
mod session;

pub use api::router;
pub use session::{ResultBundle, SegmentRequest, Timing};

use std::net::SocketAddr;
use std::path::PathBuf;

pub const MAX_PIXELS_ENV: &str = "FUZZYSEG_MAX_PIXELS";
pub const DEFAULT_MAX_PIXELS: usize = 4096 * 4096;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Uploads with more pixels are refused with 413.
    pub max_pixels: usize,
    /// Origin allowed by CORS; any origin when unset.
    pub allow_origin: Option<String>,
    /// Directory of static UI assets served under `/`.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { max_pixels: DEFAULT_MAX_PIXELS, allow_origin: None, static_dir: None }
    }
}

impl ServiceConfig {
    /// Defaults, with `max_pixels` taken from `FUZZYSEG_MAX_PIXELS` when set.
    pub fn from_env() -> Result<Self, String> {
        let mut c = Self::default();
        if let Ok(v) = std::env::var(MAX_PIXELS_ENV) {
            c.max_pixels = v
                .trim()
                .parse()
                .ok()
                .filter(|&n: &usize| n > 0)
                .ok_or_else(|| format!("{MAX_PIXELS_ENV} must be a positive integer, got '{v}'"))?;
        }
        Ok(c)
    }
}

impl ServiceConfig {
    pub fn validate(&self) -> Result<(), String> {
        if let Some(o) = &self.allow_origin {
            o.parse::<axum::http::HeaderValue>().map_err(|_| format!("invalid allow-origin '{o}'"))?;
        }
        if self.max_pixels == 0 {
            return Err("max pixels must be positive".into());
        }
        Ok(())
    }
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(config)).await
}
