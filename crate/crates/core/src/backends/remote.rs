use std::time::Duration;

use serde::Deserialize;

use super::{BackendError, Capability, Sampler};
use crate::qubo::{QuboModel, Sample, SampleRecord, SampleSet};

/// Reported energies further than this from the local value count as a
/// mismatch.
pub const ENERGY_MISMATCH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteSamplerConfig {
    /// Base URL; requests go to `{endpoint}/sample`.
    pub endpoint: String,
    pub timeout_ms: u64,
    pub num_reads: usize,
    pub auth_token: Option<String>,
    /// Idle connections kept in the pool.
    pub max_connections: usize,
    pub max_vars: Option<usize>,
}

impl RemoteSamplerConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteSamplerConfig {
            endpoint: endpoint.into(),
            timeout_ms: 30_000,
            num_reads: 10,
            auth_token: None,
            max_connections: 4,
            max_vars: None,
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.timeout_ms == 0 {
            return Err(BackendError::Config("remote timeout must be positive".into()));
        }
        if self.endpoint.is_empty() {
            return Err(BackendError::Config("remote endpoint is empty".into()));
        }
        Ok(())
    }

    fn url(&self, num_reads: usize, seed: u64) -> String {
        format!(
            "{}/sample?num_reads={num_reads}&seed={seed}",
            self.endpoint.trim_end_matches('/')
        )
    }
}

#[derive(Deserialize)]
struct Reply {
    samples: Vec<ReplySample>,
}

#[derive(Deserialize)]
struct ReplySample {
    bits: Vec<u8>,
    energy: f64,
    #[serde(default = "one")]
    occurrences: u64,
}

fn one() -> u64 {
    1
}

/// HTTP sampler client. The agent pools connections, so one backend can be
/// shared by concurrent workers.
pub struct RemoteBackend {
    cfg: RemoteSamplerConfig,
    agent: ureq::Agent,
}

impl std::fmt::Debug for RemoteBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteBackend").field("cfg", &self.cfg).finish()
    }
}

impl RemoteBackend {
    pub fn new(cfg: RemoteSamplerConfig) -> Result<Self, BackendError> {
        cfg.validate()?;
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(cfg.timeout_ms)))
            .max_idle_connections(cfg.max_connections.max(1))
            .max_idle_connections_per_host(cfg.max_connections.max(1))
            .http_status_as_error(true)
            .build()
            .new_agent();
        Ok(RemoteBackend { cfg, agent })
    }

    pub fn config(&self) -> &RemoteSamplerConfig {
        &self.cfg
    }

    fn post(&self, model: &QuboModel, num_reads: usize, seed: u64) -> Result<String, BackendError> {
        let mut req = self
            .agent
            .post(self.cfg.url(num_reads, seed))
            .header("Content-Type", "application/json");
        if let Some(token) = &self.cfg.auth_token {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let mut resp = req.send(model.to_json()).map_err(transport_error)?;
        resp.body_mut().read_to_string().map_err(transport_error)
    }
}

fn transport_error(e: ureq::Error) -> BackendError {
    let retryable = match &e {
        ureq::Error::StatusCode(code) => *code >= 500 || *code == 429,
        ureq::Error::Timeout(_)
        | ureq::Error::Io(_)
        | ureq::Error::ConnectionFailed
        | ureq::Error::HostNotFound
        | ureq::Error::BodyStalled => true,
        _ => false,
    };
    BackendError::Transport {
        message: e.to_string(),
        retryable,
    }
}

/// Verifies a reply against `model`. Local energies replace reported ones;
/// disagreements beyond [`ENERGY_MISMATCH_TOL`] are counted on the set.
fn verify_reply(model: &QuboModel, body: &str) -> Result<SampleSet, BackendError> {
    let reply: Reply =
        serde_json::from_str(body).map_err(|e| BackendError::Protocol(format!("bad reply: {e}")))?;
    if reply.samples.is_empty() {
        return Err(BackendError::Protocol("reply contains no samples".into()));
    }
    let mut records = Vec::with_capacity(reply.samples.len());
    let mut corrected = 0;
    for (k, s) in reply.samples.into_iter().enumerate() {
        let sample = Sample::new(s.bits).map_err(|e| BackendError::Protocol(format!("sample {k}: {e}")))?;
        if sample.len() != model.num_variables() {
            return Err(BackendError::Protocol(format!(
                "sample {k} has {} bits, model has {}",
                sample.len(),
                model.num_variables()
            )));
        }
        let record = SampleRecord::new(model, sample)?.with_occurrences(s.occurrences.max(1));
        if !(s.energy - record.energy).abs().le(&ENERGY_MISMATCH_TOL) {
            log::warn!(
                "remote energy {} differs from local {} for sample {k}",
                s.energy,
                record.energy
            );
            corrected += 1;
        }
        records.push(record);
    }
    Ok(SampleSet::normalized(records, model.fingerprint(), corrected))
}

/// One request to the remote sampler described by `cfg`.
pub fn remote_sample(
    cfg: &RemoteSamplerConfig,
    model: &QuboModel,
    num_reads: usize,
) -> Result<SampleSet, BackendError> {
    RemoteBackend::new(cfg.clone())?.sample(model, num_reads, 0)
}

impl Sampler for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn capability(&self) -> Capability {
        Capability {
            max_vars: self.cfg.max_vars,
            exact: false,
        }
    }

    fn sample(&self, model: &QuboModel, num_reads: usize, seed: u64) -> Result<SampleSet, BackendError> {
        self.capability().check(model.num_variables())?;
        let body = self.post(model, num_reads.max(1), seed)?;
        verify_reply(model, &body)
    }
}

#[cfg(test)]
mod tests {
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::thread;

    use super::*;
    use crate::qubo::QuboBuilder;

    /// Serves `reply` once and hands back the request line and body.
    fn serve_once(status: &'static str, reply: String) -> (String, thread::JoinHandle<(String, String)>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let handle = thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            let mut out = stream;
            write!(
                out,
                "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                reply.len()
            )
            .unwrap();
            (request_line, String::from_utf8(body).unwrap())
        });
        (url, handle)
    }

    fn model() -> QuboModel {
        let mut b = QuboBuilder::new(2);
        b.add_linear(0, 1.0).add_linear(1, -2.0).add_quadratic(0, 1, 3.0);
        b.build()
    }

    #[test]
    fn echo_server_energy_is_recomputed() {
        let (url, h) = serve_once("200 OK", r#"{"samples":[{"bits":[0,1],"energy":-2.0,"occurrences":3}]}"#.into());
        let set = remote_sample(&RemoteSamplerConfig::new(url), &model(), 3).unwrap();
        let (line, body) = h.join().unwrap();
        assert!(line.starts_with("POST /sample?num_reads=3"), "{line}");
        assert_eq!(QuboModel::from_json(&body).unwrap(), model());
        assert_eq!(set.best().unwrap().energy, -2.0);
        assert_eq!(set.best().unwrap().occurrences, 3);
        assert!(!set.has_energy_mismatch());
    }

    #[test]
    fn wrong_energy_is_corrected_and_flagged() {
        let (url, h) = serve_once(
            "200 OK",
            r#"{"samples":[{"bits":[1,1],"energy":-50.0},{"bits":[0,0],"energy":0.0}]}"#.into(),
        );
        let set = remote_sample(&RemoteSamplerConfig::new(url), &model(), 2).unwrap();
        h.join().unwrap();
        assert!(set.has_energy_mismatch());
        assert_eq!(set.corrected_energies(), 1);
        let energies: Vec<f64> = set.records().iter().map(|r| r.energy).collect();
        assert_eq!(energies, vec![0.0, 2.0]);
    }

    #[test]
    fn malformed_payloads_are_protocol_errors() {
        for reply in [
            "not json",
            r#"{"samples":[]}"#,
            r#"{"samples":[{"bits":[0,1,1],"energy":0}]}"#,
            r#"{"samples":[{"bits":[0,7],"energy":0}]}"#,
        ] {
            let (url, h) = serve_once("200 OK", reply.into());
            let err = remote_sample(&RemoteSamplerConfig::new(url), &model(), 1).unwrap_err();
            h.join().unwrap();
            assert!(matches!(err, BackendError::Protocol(_)), "{reply}: {err:?}");
        }
    }

    #[test]
    fn server_error_is_retryable() {
        let (url, h) = serve_once("503 Service Unavailable", "{}".into());
        let err = remote_sample(&RemoteSamplerConfig::new(url), &model(), 1).unwrap_err();
        h.join().unwrap();
        assert!(err.is_retryable(), "{err:?}");
    }

    #[test]
    fn unreachable_endpoint_is_retryable() {
        // Bind then drop to get a port with nothing listening.
        let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
        let mut cfg = RemoteSamplerConfig::new(format!("http://127.0.0.1:{port}"));
        cfg.timeout_ms = 500;
        let err = remote_sample(&cfg, &model(), 1).unwrap_err();
        assert!(err.is_retryable(), "{err:?}");
    }

    #[test]
    fn silent_server_times_out() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let mut cfg = RemoteSamplerConfig::new(format!("http://{}", listener.local_addr().unwrap()));
        cfg.timeout_ms = 200;
        let err = remote_sample(&cfg, &model(), 1).unwrap_err();
        drop(listener);
        assert!(err.is_retryable(), "{err:?}");
    }

    #[test]
    fn zero_timeout_is_rejected() {
        let mut cfg = RemoteSamplerConfig::new("http://localhost");
        cfg.timeout_ms = 0;
        assert!(matches!(RemoteBackend::new(cfg), Err(BackendError::Config(_))));
    }
}
