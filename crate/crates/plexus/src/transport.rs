use std::sync::{Arc, OnceLock};
use std::time::Duration;

use plexus_core::ingest::{HttpResponse, SearchRequest, SearchTransport, SourceError};

const REQUEST_TIMEOUT: Duration = Duration::from_secs(20);

/// Blocking HTTPS transport for the recent-search endpoint.
///
/// The client is built on first use so that the transport can be created on
/// an async thread but used from a session's pipeline thread.
#[derive(Clone, Default)]
pub struct HttpTransport {
    client: Arc<OnceLock<reqwest::blocking::Client>>,
}

impl HttpTransport {
    pub fn new() -> Self {
        Self::default()
    }

    fn client(&self) -> Result<&reqwest::blocking::Client, SourceError> {
        if let Some(client) = self.client.get() {
            return Ok(client);
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(REQUEST_TIMEOUT)
            .user_agent(concat!("plexus/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| SourceError::Transport(e.to_string()))?;
        Ok(self.client.get_or_init(|| client))
    }
}

impl SearchTransport for HttpTransport {
    fn execute(&self, request: &SearchRequest) -> Result<HttpResponse, SourceError> {
        let response = self
            .client()?
            .get(&request.url)
            .query(&request.params)
            .bearer_auth(&request.bearer_token)
            .send()
            .map_err(|e| SourceError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        let headers = response
            .headers()
            .iter()
            .filter_map(|(name, value)| Some((name.as_str().to_ascii_lowercase(), value.to_str().ok()?.to_string())))
            .collect();
        let body = response.text().map_err(|e| SourceError::Transport(e.to_string()))?;
        Ok(HttpResponse { status, headers, body })
    }
}
