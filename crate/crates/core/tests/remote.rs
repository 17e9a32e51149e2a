use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use serde_json::Value;
use simulpipe::context::RequestContext;
use simulpipe::engines::{translate, EngineDescriptor, EngineError, Granularity, RemoteEngine, TranslationRequest};
use simulpipe::LanguageCode;

/// Serves `responses` in order, one per connection, and sends each request
/// body back over the channel.
fn serve(responses: Vec<(u16, &'static str)>) -> (String, mpsc::Receiver<Value>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/translate", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for (status, body) in responses {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                if let Some((k, v)) = line.split_once(':') {
                    if k.eq_ignore_ascii_case("content-length") {
                        len = v.trim().parse().unwrap();
                    }
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            let _ = tx.send(serde_json::from_slice(&buf).unwrap_or(Value::Null));
            let mut stream = reader.into_inner();
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (url, rx)
}

fn engine(url: &str, timeout_ms: u64) -> RemoteEngine {
    let en = LanguageCode::parse("en").unwrap();
    let ja = LanguageCode::parse("ja").unwrap();
    RemoteEngine::new(EngineDescriptor::new("remote", [(en, ja)], true, 0), url, Duration::from_millis(timeout_ms), 2)
}

fn request() -> TranslationRequest {
    let ctx = RequestContext {
        tag_prefix: String::new(),
        history: vec![("hello .".into(), "こんにちは。".into())],
    };
    TranslationRequest::new(
        LanguageCode::parse("en").unwrap(),
        LanguageCode::parse("ja").unwrap(),
        "thank you",
        ctx,
        Granularity::Chunk,
    )
}

#[test]
fn round_trip_sends_the_wire_format() {
    let (url, rx) = serve(vec![(200, r#"{"text":"ありがとう"}"#)]);
    let out = translate(&engine(&url, 2000), &request()).unwrap();
    assert_eq!(out, "ありがとう");
    let body = rx.recv().unwrap();
    assert_eq!(body["src"], "en");
    assert_eq!(body["tgt"], "ja");
    assert_eq!(body["text"], "thank you");
    assert_eq!(body["granularity"], "chunk");
    assert_eq!(body["history"], serde_json::json!([["hello .", "こんにちは。"]]));
}

#[test]
fn server_errors_and_bad_bodies_are_unavailable() {
    let (url, _rx) = serve(vec![(503, "{}"), (200, "not json"), (200, r#"{"text":"  "}"#)]);
    let e = engine(&url, 2000);
    for expect in ["HTTP 503", "bad response body"] {
        match translate(&e, &request()) {
            Err(EngineError::EngineUnavailable(id, why)) => {
                assert_eq!(id, "remote");
                assert!(why.contains(expect), "{why}");
            }
            other => panic!("expected unavailable, got {other:?}"),
        }
    }
    assert!(matches!(translate(&e, &request()), Err(EngineError::EmptyResponse(_))));
}

#[test]
fn timeouts_and_refused_connections_are_unavailable() {
    // accepts but never answers
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/", listener.local_addr().unwrap());
    let r = translate(&engine(&url, 200), &request());
    assert!(matches!(r, Err(EngineError::EngineUnavailable(..))), "{r:?}");
    drop(listener);
    let r = translate(&engine(&url, 200), &request());
    assert!(matches!(r, Err(EngineError::EngineUnavailable(..))), "{r:?}");
}

#[test]
fn unsupported_pair_is_rejected_before_any_request() {
    let e = engine("http://127.0.0.1:9/", 100);
    let mut req = request();
    req.tgt = LanguageCode::parse("es").unwrap();
    assert!(matches!(translate(&e, &req), Err(EngineError::UnsupportedPair { .. })));
}
