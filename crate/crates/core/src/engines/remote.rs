//! HTTP adapter for an out-of-process engine.
//!
//! Each request is a `POST` of
//! `{"src","tgt","text","history":[[src_utt,translation],...],"granularity"}`
//! and expects `{"text": ...}` back. Transport errors, timeouts and non-2xx
//! statuses all map to [`EngineError::EngineUnavailable`].

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{EngineDescriptor, EngineError, Granularity, TranslationEngine, TranslationRequest};

#[derive(Serialize)]
struct WireRequest<'a> {
    src: &'a str,
    tgt: &'a str,
    text: &'a str,
    history: &'a [(String, String)],
    granularity: Granularity,
}

#[derive(Deserialize)]
struct WireResponse {
    text: String,
}

/// Counting gate bounding in-flight requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(n: usize) -> Self {
        Gate {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn enter(&self) -> GateGuard<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

pub struct RemoteEngine {
    descriptor: EngineDescriptor,
    url: String,
    agent: ureq::Agent,
    gate: Gate,
}

impl RemoteEngine {
    pub fn new(descriptor: EngineDescriptor, url: impl Into<String>, timeout: Duration, max_connections: usize) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        RemoteEngine {
            descriptor,
            url: url.into(),
            agent,
            gate: Gate::new(max_connections),
        }
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

impl TranslationEngine for RemoteEngine {
    fn descriptor(&self) -> &EngineDescriptor {
        &self.descriptor
    }

    fn translate_raw(&self, req: &TranslationRequest) -> Result<String, EngineError> {
        let id = &self.descriptor.id;
        let unavailable = |why: String| EngineError::EngineUnavailable(id.clone(), why);
        let body = WireRequest {
            src: req.src.code(),
            tgt: req.tgt.code(),
            text: &req.text,
            history: &req.context.history,
            granularity: req.granularity,
        };
        let _slot = self.gate.enter();
        let mut resp = self
            .agent
            .post(&self.url)
            .send_json(&body)
            .map_err(|e| unavailable(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(unavailable(format!("HTTP {}", status.as_u16())));
        }
        let parsed: WireResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| unavailable(format!("bad response body: {e}")))?;
        Ok(parsed.text)
    }
}
