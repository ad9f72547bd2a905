//! Reference implementation of the encoder/labeler plugin protocol:
//! serves the built-in reference encoder and lexicon labeler over
//! stdin/stdout. Useful for exercising the plugin transport end to end and
//! as a template for real plugin authors.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use fpe_core::encoding::{Encoder, ReferenceEncoder};
use fpe_core::error::Result;
use fpe_core::labeling::lexicon_score;

#[derive(Deserialize)]
struct Request {
    task: String,
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    text_a: Option<String>,
    #[serde(default)]
    text_b: Option<String>,
    id: u64,
}

#[derive(Serialize)]
struct VectorResponse<'a> {
    id: u64,
    vector: &'a [f64],
}

#[derive(Serialize)]
struct ScoreResponse {
    id: u64,
    score: f64,
}

#[derive(Serialize)]
struct ErrorResponse {
    id: u64,
    error: String,
}

pub fn serve(dimension: usize, name: &str) -> Result<()> {
    let encoder = ReferenceEncoder::new(dimension)?;
    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout().lock();
    writeln!(
        stdout,
        "{}",
        serde_json::json!({ "dimension": dimension, "name": name })
    )?;
    stdout.flush()?;

    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let request: Request = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                // No id to correlate; report on stderr and keep serving.
                eprintln!("plugin-serve: bad request: {e}");
                continue;
            }
        };
        let id = request.id;
        let reply = handle(&encoder, request);
        match reply {
            Ok(Reply::Vector(values)) => {
                writeln!(stdout, "{}", serde_json::to_string(&VectorResponse { id, vector: &values })?)?
            }
            Ok(Reply::Score(score)) => {
                writeln!(stdout, "{}", serde_json::to_string(&ScoreResponse { id, score })?)?
            }
            Err(message) => {
                writeln!(stdout, "{}", serde_json::to_string(&ErrorResponse { id, error: message })?)?
            }
        }
        stdout.flush()?;
    }
    Ok(())
}

enum Reply {
    Vector(Vec<f64>),
    Score(f64),
}

fn handle(encoder: &ReferenceEncoder, request: Request) -> std::result::Result<Reply, String> {
    match request.task.as_str() {
        "encode" => {
            let text_a = request.text_a.as_deref().ok_or("missing text_a")?;
            let vector = match request.mode.as_deref() {
                Some("pair") => {
                    let text_b = request.text_b.as_deref().ok_or("missing text_b")?;
                    encoder.encode_pair(text_a, text_b).map_err(|e| e.to_string())?
                }
                _ => encoder.encode_single(text_a).map_err(|e| e.to_string())?,
            };
            Ok(Reply::Vector(vector.values))
        }
        "label" => {
            let text = request.text_a.as_deref().ok_or("missing text_a")?;
            Ok(Reply::Score(lexicon_score(text)))
        }
        other => Err(format!("unknown task `{other}`")),
    }
}
