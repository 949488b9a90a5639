//! Remote providers against a scripted local HTTP server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use metarag::embed::{Embedder, RemoteEmbedder};
use metarag::http::JsonClient;
use metarag::metrics::{
    score_pair, RemoteScorer, RemoteTokenEmbedder, ScoringProviders, SequenceScorer, TokenEmbedder,
};
use metarag::qa::{CompletionProvider, CompletionRequest, RemoteCompletion};
use metarag::Error;
use serde_json::{json, Value};

/// Serves one scripted `(status, body)` reply per connection, in order, and
/// records each request body.
struct Server {
    url: String,
    requests: Arc<Mutex<Vec<Value>>>,
}

fn serve(script: Vec<(u16, String)>) -> Server {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let requests = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&requests);
    thread::spawn(move || {
        for (status, body) in script {
            let Ok((stream, _)) = listener.accept() else { return };
            let mut reader = BufReader::new(stream);
            let mut content_length = 0;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    content_length = v.trim().parse().unwrap();
                }
            }
            let mut raw = vec![0; content_length];
            reader.read_exact(&mut raw).unwrap();
            log.lock().unwrap().push(serde_json::from_slice(&raw).unwrap_or(Value::Null));
            let reply = format!(
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            let mut stream = reader.into_inner();
            stream.write_all(reply.as_bytes()).unwrap();
        }
    });
    Server { url, requests }
}

fn client(server: &Server) -> JsonClient {
    JsonClient::new(&server.url, Duration::from_secs(5))
        .unwrap()
        .with_retry(3, Duration::from_millis(1))
}

fn ok(body: Value) -> (u16, String) {
    (200, body.to_string())
}

#[test]
fn embedder_batches_and_normalizes() {
    let server = serve(vec![
        ok(json!({"embeddings": [[3.0, 4.0], [0.0, 2.0]]})),
        ok(json!({"embeddings": [[1.0, 0.0]]})),
    ]);
    let e = RemoteEmbedder::new(client(&server), "emb-small", 2, 2);
    let out = e.embed(&["a", "b", "c"]).unwrap();
    assert_eq!(out[0].values(), &[0.6, 0.8]);
    assert_eq!(out[1].values(), &[0.0, 1.0]);
    assert_eq!(out[2].values(), &[1.0, 0.0]);
    let reqs = server.requests.lock().unwrap();
    assert_eq!(reqs[0], json!({"model": "emb-small", "texts": ["a", "b"]}));
    assert_eq!(reqs[1], json!({"model": "emb-small", "texts": ["c"]}));
}

#[test]
fn embedder_retries_server_errors_then_succeeds() {
    let server = serve(vec![
        (503, "{}".into()),
        (429, "{}".into()),
        ok(json!({"embeddings": [[1.0, 1.0]]})),
    ]);
    let e = RemoteEmbedder::new(client(&server), "m", 2, 8);
    let out = e.embed(&["x"]).unwrap();
    assert!((out[0].norm() - 1.0).abs() < 1e-12);
    assert_eq!(server.requests.lock().unwrap().len(), 3);
}

#[test]
fn embedder_gives_up_after_retries() {
    let server = serve(vec![(500, "{}".into()); 4]);
    let e = RemoteEmbedder::new(client(&server), "m", 2, 8);
    match e.embed(&["x"]).unwrap_err() {
        Error::Provider { attempts, .. } => assert_eq!(attempts, 4),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn client_errors_are_not_retried() {
    let server = serve(vec![(400, "{}".into()), ok(json!({"embeddings": [[1.0]]}))]);
    let e = RemoteEmbedder::new(client(&server), "m", 1, 8);
    match e.embed(&["x"]).unwrap_err() {
        Error::Provider { attempts, .. } => assert_eq!(attempts, 1),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn embedder_dimension_mismatch_is_protocol_error() {
    let server = serve(vec![ok(json!({"embeddings": [[1.0, 0.0, 0.0]]}))]);
    let e = RemoteEmbedder::new(client(&server), "m", 2, 8);
    assert!(matches!(e.embed(&["x"]), Err(Error::Protocol(_))));
}

#[test]
fn embedder_count_mismatch_is_protocol_error() {
    let server = serve(vec![ok(json!({"embeddings": [[1.0, 0.0]]}))]);
    let e = RemoteEmbedder::new(client(&server), "m", 2, 8);
    assert!(matches!(e.embed(&["x", "y"]), Err(Error::Protocol(_))));
}

#[test]
fn malformed_body_is_protocol_error() {
    let server = serve(vec![(200, "not json".into())]);
    let e = RemoteEmbedder::new(client(&server), "m", 2, 8);
    assert!(matches!(e.embed(&["x"]), Err(Error::Protocol(_))));
}

#[test]
fn unreachable_endpoint_exhausts_retries() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let c = JsonClient::new(format!("http://127.0.0.1:{port}/"), Duration::from_millis(500))
        .unwrap()
        .with_retry(2, Duration::from_millis(1));
    let e = RemoteEmbedder::new(c, "m", 2, 8);
    assert!(matches!(e.embed(&["x"]), Err(Error::Provider { attempts: 3, .. })));
}

#[test]
fn completion_sends_prompt_and_budget() {
    let server = serve(vec![ok(json!({"text": "Rs 10 crore."}))]);
    let c = RemoteCompletion::new(client(&server), "gen-1");
    let text = c
        .complete(&CompletionRequest { prompt: "Question: q\nAnswer:", context: &[], max_output_tokens: 1024 })
        .unwrap();
    assert_eq!(text, "Rs 10 crore.");
    assert_eq!(
        server.requests.lock().unwrap()[0],
        json!({"model": "gen-1", "prompt": "Question: q\nAnswer:", "max_output_tokens": 1024})
    );
}

#[test]
fn completion_missing_text_is_protocol_error() {
    let server = serve(vec![ok(json!({"choices": []}))]);
    let c = RemoteCompletion::new(client(&server), "gen-1");
    let req = CompletionRequest { prompt: "p", context: &[], max_output_tokens: 8 };
    assert!(matches!(c.complete(&req), Err(Error::Protocol(_))));
}

#[test]
fn token_embedder_and_scorer_feed_metrics() {
    let tokens = ok(json!({"token_embeddings": [[[1.0, 0.0], [0.0, 1.0]]]}));
    let server = serve(vec![tokens.clone(), tokens]);
    let scorer_server = serve(vec![ok(json!({"score": -2.5}))]);
    let providers = ScoringProviders {
        token_embedder: Some(Box::new(RemoteTokenEmbedder::new(client(&server), "tok"))),
        sequence_scorer: Some(Box::new(RemoteScorer::new(client(&scorer_server), "bart"))),
    };
    let report = score_pair("same text", "same text", &providers);
    assert!((report.bertscore_f1.unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(report.bartscore, Some(-2.5));
    assert!(report.unavailable.is_empty());
    assert_eq!(
        scorer_server.requests.lock().unwrap()[0],
        json!({"model": "bart", "candidate": "same text", "reference": "same text"})
    );
    assert_eq!(server.requests.lock().unwrap()[0], json!({"model": "tok", "texts": ["same text"]}));
}

#[test]
fn failing_scorers_leave_metrics_absent() {
    let server = serve(vec![(404, "{}".into())]);
    let scorer_server = serve(vec![ok(json!({"score": "high"}))]);
    let providers = ScoringProviders {
        token_embedder: Some(Box::new(RemoteTokenEmbedder::new(client(&server), "tok"))),
        sequence_scorer: Some(Box::new(RemoteScorer::new(client(&scorer_server), "bart"))),
    };
    let report = score_pair("a", "a", &providers);
    assert_eq!(report.bertscore_f1, None);
    assert_eq!(report.bartscore, None);
    assert_eq!(report.unavailable.len(), 2);
    assert_eq!(report.jaro, 1.0);
}

#[test]
fn token_embedder_wrong_text_count_is_protocol_error() {
    let server = serve(vec![ok(json!({"token_embeddings": []}))]);
    let t = RemoteTokenEmbedder::new(client(&server), "tok");
    assert!(matches!(t.embed_tokens("x"), Err(Error::Protocol(_))));
}

#[test]
fn scorer_reports_value() {
    let server = serve(vec![ok(json!({"score": -1.25}))]);
    let s = RemoteScorer::new(client(&server), "bart");
    assert_eq!(s.score("c", "r").unwrap(), -1.25);
}
