//! Blocking JSON-over-HTTP POST with bounded retries and exponential backoff.
//!
//! Shared by the remote embedding, completion, token-embedding and
//! sequence-scoring providers.

use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_RETRIES: u32 = 3;
pub const DEFAULT_BACKOFF: Duration = Duration::from_millis(200);

#[derive(Debug, Clone)]
pub struct JsonClient {
    client: reqwest::blocking::Client,
    endpoint: String,
    max_retries: u32,
    backoff: Duration,
}

impl JsonClient {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Result<Self> {
        let endpoint = endpoint.into();
        reqwest::Url::parse(&endpoint)
            .map_err(|e| Error::Config(format!("invalid endpoint `{endpoint}`: {e}")))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Config(format!("cannot build HTTP client: {e}")))?;
        Ok(JsonClient {
            client,
            endpoint,
            max_retries: DEFAULT_MAX_RETRIES,
            backoff: DEFAULT_BACKOFF,
        })
    }

    /// `max_retries` counts retries after the first attempt.
    pub fn with_retry(mut self, max_retries: u32, backoff: Duration) -> Self {
        self.max_retries = max_retries;
        self.backoff = backoff;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn post<B, R>(&self, body: &B) -> Result<R>
    where
        B: Serialize + ?Sized,
        R: DeserializeOwned,
    {
        let mut last_error = String::new();
        for attempt in 0..=self.max_retries {
            if attempt > 0 {
                thread::sleep(self.backoff * 2u32.saturating_pow(attempt - 1));
            }
            match self.client.post(&self.endpoint).json(body).send() {
                Ok(resp) if resp.status().is_success() => {
                    let bytes = resp
                        .bytes()
                        .map_err(|e| Error::Protocol(format!("reading response body: {e}")))?;
                    return serde_json::from_slice(&bytes)
                        .map_err(|e| Error::Protocol(format!("malformed response: {e}")));
                }
                Ok(resp) => {
                    let status = resp.status();
                    last_error = format!("{} returned HTTP {status}", self.endpoint);
                    let retriable = status.is_server_error() || status.as_u16() == 429;
                    if !retriable {
                        return Err(Error::Provider {
                            attempts: attempt + 1,
                            message: last_error,
                        });
                    }
                }
                Err(e) => last_error = format!("{}: {e}", self.endpoint),
            }
        }
        Err(Error::Provider {
            attempts: self.max_retries + 1,
            message: last_error,
        })
    }
}
