//! Subprocess plugin protocol shared by external encoders and labelers.
//!
//! The plugin is a child process speaking line-delimited JSON on its
//! standard streams. On startup it must print a handshake line declaring
//! `{"dimension": d, "name": "..."}`. Each request line is
//! `{"task":"encode"|"label","mode":"single"|"pair","text_a":...,
//! "text_b":...,"id":n}` and each response line is `{"id":n,"vector":[..]}`
//! for encode, `{"id":n,"score":x}` for label, or `{"id":n,"error":"..."}`
//! to report a failure.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::encoding::{EncodeMode, EmbeddingVector, Encoder};
use crate::error::{Error, Result};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Serialize)]
struct Request<'a> {
    task: &'a str,
    mode: &'a str,
    text_a: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    text_b: Option<&'a str>,
    id: u64,
}

#[derive(Debug, Deserialize)]
struct Response {
    id: u64,
    #[serde(default)]
    vector: Option<Vec<f64>>,
    #[serde(default)]
    score: Option<f64>,
    #[serde(default)]
    error: Option<String>,
}

#[derive(Debug, Deserialize)]
struct Handshake {
    dimension: usize,
    name: String,
}

struct Transport {
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
}

/// One live plugin process. Requests are serialized; the reader thread
/// forwards stdout lines over a channel so every wait has a timeout.
pub struct PluginClient {
    name: String,
    dimension: usize,
    timeout: Duration,
    transport: Mutex<Transport>,
    child: Mutex<Child>,
}

impl PluginClient {
    /// Spawn `command` (split on whitespace) and perform the handshake.
    pub fn spawn(command: &str, timeout: Option<Duration>) -> Result<Self> {
        let timeout = timeout.unwrap_or(DEFAULT_TIMEOUT);
        let mut parts = command.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| Error::Plugin("empty plugin command".into()))?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Plugin(format!("failed to spawn `{command}`: {e}")))?;

        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });

        let mut transport = Transport {
            stdin,
            lines,
            next_id: 0,
        };
        let handshake_line = recv_line(&mut transport, timeout)?;
        let handshake: Handshake = serde_json::from_str(&handshake_line)
            .map_err(|e| Error::Plugin(format!("bad handshake `{handshake_line}`: {e}")))?;

        Ok(PluginClient {
            name: handshake.name,
            dimension: handshake.dimension,
            timeout,
            transport: Mutex::new(transport),
            child: Mutex::new(child),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    fn round_trip(&self, task: &str, mode: &str, text_a: &str, text_b: Option<&str>) -> Result<Response> {
        let mut transport = self.transport.lock().expect("plugin transport poisoned");
        transport.next_id += 1;
        let id = transport.next_id;
        let request = Request {
            task,
            mode,
            text_a,
            text_b,
            id,
        };
        let line = serde_json::to_string(&request)?;
        writeln!(transport.stdin, "{line}")
            .and_then(|_| transport.stdin.flush())
            .map_err(|e| Error::Plugin(format!("plugin stdin closed: {e}")))?;

        loop {
            let line = recv_line(&mut transport, self.timeout)?;
            let response: Response = serde_json::from_str(&line)
                .map_err(|e| Error::Plugin(format!("bad response `{line}`: {e}")))?;
            if response.id != id {
                // Stale line from an earlier timed-out request; skip it.
                continue;
            }
            if let Some(message) = response.error {
                return Err(Error::Plugin(message));
            }
            return Ok(response);
        }
    }

    pub fn encode(&self, mode: EncodeMode, text_a: &str, text_b: Option<&str>) -> Result<Vec<f64>> {
        let mode_str = match mode {
            EncodeMode::Single => "single",
            EncodeMode::Pair => "pair",
        };
        let response = self.round_trip("encode", mode_str, text_a, text_b)?;
        let vector = response
            .vector
            .ok_or_else(|| Error::Plugin("encode response missing `vector`".into()))?;
        if vector.len() != self.dimension {
            return Err(Error::Plugin(format!(
                "plugin declared dimension {} but returned {}",
                self.dimension,
                vector.len()
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Plugin("plugin returned non-finite values".into()));
        }
        Ok(vector)
    }

    pub fn label(&self, text: &str) -> Result<f64> {
        let response = self.round_trip("label", "single", text, None)?;
        response
            .score
            .ok_or_else(|| Error::Plugin("label response missing `score`".into()))
    }
}

impl Drop for PluginClient {
    fn drop(&mut self) {
        if let Ok(mut child) = self.child.lock() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

fn recv_line(transport: &mut Transport, timeout: Duration) -> Result<String> {
    loop {
        match transport.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => {
                if line.trim().is_empty() {
                    continue;
                }
                return Ok(line);
            }
            Ok(Err(e)) => return Err(Error::Plugin(format!("plugin stdout error: {e}"))),
            Err(RecvTimeoutError::Timeout) => return Err(Error::PluginTimeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => {
                return Err(Error::Plugin("plugin exited before responding".into()))
            }
        }
    }
}

/// Encoder backed by a plugin process.
pub struct PluginEncoder {
    client: PluginClient,
    source: String,
}

impl PluginEncoder {
    pub fn spawn(command: &str, timeout: Option<Duration>) -> Result<Self> {
        let client = PluginClient::spawn(command, timeout)?;
        let source = format!("plugin:{}", client.name());
        Ok(PluginEncoder { client, source })
    }
}

impl Encoder for PluginEncoder {
    fn name(&self) -> &str {
        &self.source
    }

    fn dimension(&self) -> usize {
        self.client.dimension()
    }

    fn encode_single(&self, text: &str) -> Result<EmbeddingVector> {
        if text.trim().is_empty() {
            return Err(Error::EmptyText);
        }
        Ok(EmbeddingVector {
            values: self.client.encode(EncodeMode::Single, text, None)?,
            source: self.source.clone(),
            mode: EncodeMode::Single,
        })
    }

    fn encode_pair(&self, text_a: &str, text_b: &str) -> Result<EmbeddingVector> {
        if text_a.trim().is_empty() || text_b.trim().is_empty() {
            return Err(Error::EmptyText);
        }
        Ok(EmbeddingVector {
            values: self.client.encode(EncodeMode::Pair, text_a, Some(text_b))?,
            source: self.source.clone(),
            mode: EncodeMode::Pair,
        })
    }
}
