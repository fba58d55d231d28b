//! Adapter wire-protocol tests: one request/response pair of single-line
//! JSON objects over a subprocess's standard streams or an HTTP POST body.
//! Field names are part of the contract: request {prompt, specificity,
//! temperature, top_p, max_tokens, seed}, response {code, backend_meta}.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::time::Duration;

use seceval_core::backend::{
    generate_sample, Backend, GateConfig, GenerationParams, GenerationRequest, HttpBackend,
    ModelDescriptor, SpecificityLevel, SubprocessBackend,
};
use seceval_core::corpus::Prompt;
use seceval_core::error::Error;

/// Echo adapter: validates the pinned request fields and returns them in
/// backend_meta so the test can assert the exact wire schema.
const ECHO_ADAPTER: &str = r#"
import json, sys
line = sys.stdin.readline()
req = json.loads(line)
expected = {"prompt", "specificity", "temperature", "top_p", "max_tokens", "seed"}
if set(req.keys()) != expected:
    sys.stderr.write("unexpected fields: %s" % sorted(req.keys()))
    sys.exit(9)
resp = {"code": "value = 41 + 1\n", "backend_meta": {"echo": req}}
sys.stdout.write(json.dumps(resp) + "\n")
"#;

fn write_script(body: &str) -> tempfile::NamedTempFile {
    let file = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(file.path(), body).unwrap();
    file
}

fn request(prompt: &str) -> GenerationRequest<'_> {
    GenerationRequest {
        prompt_id: "p1",
        prompt,
        specificity: SpecificityLevel::Medium,
        temperature: 0.7,
        top_p: 0.95,
        max_tokens: 256,
        seed: 42,
        attempt: 1,
    }
}

#[test]
fn subprocess_round_trip_uses_pinned_field_names() {
    let script = write_script(ECHO_ADAPTER);
    let backend = SubprocessBackend::new(
        &format!("python3 {}", script.path().display()),
        Duration::from_secs(10),
    )
    .unwrap();

    let resp = backend.generate(&request("write a parser")).unwrap();
    assert_eq!(resp.code, "value = 41 + 1\n");
    let echo = &resp.backend_meta["echo"];
    assert_eq!(echo["prompt"], "write a parser");
    assert_eq!(echo["specificity"], "medium");
    assert_eq!(echo["temperature"], 0.7);
    assert_eq!(echo["top_p"], 0.95);
    assert_eq!(echo["max_tokens"], 256);
    assert_eq!(echo["seed"], 42);
}

#[test]
fn subprocess_feeds_the_generation_gate() {
    let script = write_script(ECHO_ADAPTER);
    let model = ModelDescriptor {
        name: "proc-model".into(),
        endpoint: format!("cmd:python3 {}", script.path().display()),
        param_count_billions: 7.0,
        quantization_tag: String::new(),
        worker_index: 1,
    };
    let prompt = Prompt { id: "p1".into(), text: "task".into(), stratum: "low".into(), tags: vec![] };
    let backend = SubprocessBackend::new(
        &format!("python3 {}", script.path().display()),
        Duration::from_secs(10),
    )
    .unwrap();
    let rec = generate_sample(
        &backend,
        &model,
        &prompt,
        SpecificityLevel::High,
        &GenerationParams::default(),
        1,
        &GateConfig::default(),
    )
    .unwrap();
    assert_eq!(rec.gate_attempts, 1);
    assert!(!rec.gate_exhausted);
    assert_eq!(rec.code, "value = 41 + 1\n");
}

#[test]
fn subprocess_nonzero_exit_reports_diagnostics() {
    let script = write_script("import sys\nsys.stderr.write(\"model weights missing\")\nsys.exit(3)\n");
    let backend = SubprocessBackend::new(
        &format!("python3 {}", script.path().display()),
        Duration::from_secs(10),
    )
    .unwrap();
    match backend.generate(&request("x")) {
        Err(Error::BackendFailure(msg)) => assert!(msg.contains("model weights missing"), "{msg}"),
        other => panic!("expected backend failure, got {other:?}"),
    }
}

#[test]
fn subprocess_malformed_response() {
    let script = write_script("print(\"not a json object\")\n");
    let backend = SubprocessBackend::new(
        &format!("python3 {}", script.path().display()),
        Duration::from_secs(10),
    )
    .unwrap();
    assert!(matches!(backend.generate(&request("x")), Err(Error::MalformedResponse(_))));
}

#[test]
fn subprocess_timeout_kills_backend() {
    let script = write_script("import time\ntime.sleep(30)\n");
    let backend = SubprocessBackend::new(
        &format!("python3 {}", script.path().display()),
        Duration::from_millis(300),
    )
    .unwrap();
    assert!(matches!(backend.generate(&request("x")), Err(Error::BackendTimeout(300))));
}

#[test]
fn http_round_trip_same_schema() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();

    let server = std::thread::spawn(move || {
        let (mut stream, _) = listener.accept().unwrap();
        let mut buf = Vec::new();
        let mut chunk = [0u8; 4096];
        let body_start;
        loop {
            let n = stream.read(&mut chunk).unwrap();
            buf.extend_from_slice(&chunk[..n]);
            if let Some(at) = buf.windows(4).position(|w| w == b"\r\n\r\n") {
                body_start = at + 4;
                break;
            }
        }
        let header_text = String::from_utf8_lossy(&buf[..body_start]).to_string();
        let content_length: usize = header_text
            .lines()
            .find(|l| l.to_ascii_lowercase().starts_with("content-length:"))
            .and_then(|l| l.split(':').nth(1))
            .and_then(|v| v.trim().parse().ok())
            .unwrap();
        while buf.len() < body_start + content_length {
            let n = stream.read(&mut chunk).unwrap();
            buf.extend_from_slice(&chunk[..n]);
        }
        let request_body: serde_json::Value =
            serde_json::from_slice(&buf[body_start..body_start + content_length]).unwrap();

        let response_body = serde_json::json!({
            "code": "total = sum(values)\n",
            "backend_meta": { "echo": request_body }
        })
        .to_string();
        let response = format!(
            "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\n\r\n{}",
            response_body.len(),
            response_body
        );
        stream.write_all(response.as_bytes()).unwrap();
    });

    let backend = HttpBackend { url: format!("http://{addr}/generate"), timeout: Duration::from_secs(10) };
    let resp = backend.generate(&request("sum a list")).unwrap();
    server.join().unwrap();

    assert_eq!(resp.code, "total = sum(values)\n");
    let echo = &resp.backend_meta["echo"];
    assert_eq!(echo["prompt"], "sum a list");
    assert_eq!(echo["specificity"], "medium");
    assert_eq!(echo["seed"], 42);
    assert_eq!(
        echo.as_object().unwrap().len(),
        6,
        "request must carry exactly the six pinned fields"
    );
}
