mod support;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex, OnceLock};
use std::thread::JoinHandle;

use ontodx::client::{parse_observation, Backend, Client, ClientError, ImageRef, ModelConfig};
use ontodx::prompt::{build_prompt, PromptSpec};
use ontodx::reasoner::VocabularyRoots;
use proptest::prelude::*;

const SECRET: &str = "sk-test-9f3a1c-DO-NOT-LOG";

struct Capture(Mutex<Vec<String>>);

impl log::Log for Capture {
    fn enabled(&self, _: &log::Metadata) -> bool {
        true
    }
    fn log(&self, record: &log::Record) {
        self.0.lock().unwrap().push(format!("{} {}", record.target(), record.args()));
    }
    fn flush(&self) {}
}

fn logs() -> &'static Capture {
    static CAPTURE: OnceLock<&'static Capture> = OnceLock::new();
    CAPTURE.get_or_init(|| {
        let capture: &'static Capture = Box::leak(Box::new(Capture(Mutex::new(Vec::new()))));
        log::set_logger(capture).unwrap();
        log::set_max_level(log::LevelFilter::Trace);
        capture
    })
}

/// Serves one scripted `(status, body)` per connection and returns the raw requests.
fn stub_server(script: Vec<(u16, String)>) -> (String, JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let handle = std::thread::spawn(move || {
        let mut seen = Vec::new();
        for (status, body) in script {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut head = String::new();
            let mut length = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap();
                }
                head.push_str(&line);
                if line == "\r\n" || line.is_empty() {
                    break;
                }
            }
            let mut payload = vec![0; length];
            reader.read_exact(&mut payload).unwrap();
            seen.push(head + &String::from_utf8_lossy(&payload));
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
        seen
    });
    (url, handle)
}

fn prompt() -> PromptSpec {
    let onto = support::rice();
    let vocab = ontodx::extract_vocabulary(&onto, &VocabularyRoots::conventional(&onto)).unwrap();
    build_prompt("rice leaf", &vocab).unwrap()
}

fn image() -> ImageRef {
    ImageRef::from_bytes(vec![0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a, 1, 2, 3]).unwrap()
}

fn openai_config(url: &str, key_var: &str) -> ModelConfig {
    std::env::set_var(key_var, SECRET);
    let mut config = ModelConfig::new(Backend::OpenaiStyle, "stub-model");
    config.endpoint_url = Some(url.into());
    config.api_key_env = Some(key_var.into());
    config.backoff_base_ms = 5;
    config.max_retries = 3;
    config.timeout_secs = 10;
    config
}

const REPLY: &str = r#"{"SymptomAbnormality": "Spot", "ColorAbnormality": "Brown", "ShapeOfSymptomAbnormality": "Oval"}"#;

fn ok_body() -> String {
    serde_json::json!({"choices": [{"message": {"content": REPLY}}]}).to_string()
}

#[test]
fn retries_rate_limits_then_succeeds_without_logging_the_key() {
    let capture = logs();
    let (url, server) = stub_server(vec![(429, "{}".into()), (429, "{}".into()), (200, ok_body())]);
    let client = Client::new(openai_config(&url, "ONTODX_TEST_KEY_RETRY")).unwrap();
    let reply = client.send(&prompt(), &image(), 0).unwrap();
    assert_eq!(reply, REPLY);
    let requests = server.join().unwrap();
    assert_eq!(requests.len(), 3);
    // The key goes to the server in the header and nowhere else.
    assert!(requests.iter().all(|r| r.contains(&format!("Bearer {SECRET}"))));
    assert!(requests[0].contains("\"temperature\":0.7"));
    assert!(requests[0].contains(&image().base64()));

    let lines = capture.0.lock().unwrap().clone();
    assert!(lines.iter().any(|l| l.contains("retry 2/3")), "{lines:?}");
    assert!(lines.iter().all(|l| !l.contains(SECRET)));
    assert!(!format!("{client:?}").contains(SECRET));
}

#[test]
fn exhausted_retries_and_auth_failures() {
    let (url, server) = stub_server(vec![(429, "{}".into()); 2]);
    let mut config = openai_config(&url, "ONTODX_TEST_KEY_EXHAUST");
    config.max_retries = 1;
    let err = Client::new(config).unwrap().send(&prompt(), &image(), 0).unwrap_err();
    assert!(matches!(err, ClientError::RateLimited { attempts: 2 }), "{err:?}");
    server.join().unwrap();

    let (url, server) = stub_server(vec![(401, "{}".into())]);
    let err = Client::new(openai_config(&url, "ONTODX_TEST_KEY_AUTH"))
        .unwrap()
        .send(&prompt(), &image(), 0)
        .unwrap_err();
    assert!(matches!(err, ClientError::AuthError { status: 401 }));
    assert!(!err.to_string().contains(SECRET));
    server.join().unwrap();

    let (url, server) = stub_server(vec![(503, "{}".into()), (200, "not json".into())]);
    let err = Client::new(openai_config(&url, "ONTODX_TEST_KEY_MALFORMED"))
        .unwrap()
        .send(&prompt(), &image(), 0)
        .unwrap_err();
    assert!(matches!(err, ClientError::MalformedResponse(_)), "{err:?}");
    server.join().unwrap();
}

#[test]
fn recorded_replies_replay_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (url, server) = stub_server(vec![(200, ok_body()), (200, ok_body())]);
    let live = Client::new(openai_config(&url, "ONTODX_TEST_KEY_RECORD"))
        .unwrap()
        .recording_to(dir.path());
    let (p, img) = (prompt(), image());
    live.send(&p, &img, 0).unwrap();
    live.send(&p, &img, 1).unwrap();
    server.join().unwrap();
    let expected = dir
        .path()
        .join("stub-model")
        .join(format!("{}-{}.txt", p.fingerprint, img.content_hash));
    assert_eq!(std::fs::read_to_string(&expected).unwrap(), REPLY);
    assert!(dir
        .path()
        .join("stub-model")
        .join(format!("{}-{}-1.txt", p.fingerprint, img.content_hash))
        .exists());

    let mut replay = ModelConfig::new(Backend::Replay, "stub-model");
    replay.replay_dir = Some(dir.path().to_owned());
    let client = Client::new(replay).unwrap();
    assert_eq!(client.send(&p, &img, 0).unwrap(), REPLY);
    let obs = client.observe(&p, &img, 0).unwrap();
    assert_eq!(obs.symptom.label(), Some("Spot"));
    assert!(obs.model_fingerprint.starts_with("replay:stub-model:"));
    match client.send(&p, &img, 5) {
        Err(ClientError::ReplayMiss(path)) => assert!(path.ends_with(format!("{}-{}-5.txt", p.fingerprint, img.content_hash))),
        other => panic!("{other:?}"),
    }
}

#[test]
fn mock_backend_returns_canned_reply() {
    let mut config = ModelConfig::new(Backend::Mock, "canned");
    config.mock_reply = Some(REPLY.into());
    assert_eq!(ontodx::client::send(&prompt(), &image(), &config).unwrap(), REPLY);
}

#[test]
fn transport_failures_are_retried_then_reported() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/", listener.local_addr().unwrap());
    drop(listener);
    let mut config = openai_config(&url, "ONTODX_TEST_KEY_TRANSPORT");
    config.max_retries = 1;
    let err = Client::new(config).unwrap().send(&prompt(), &image(), 0).unwrap_err();
    assert!(matches!(err, ClientError::Transport(_)), "{err:?}");
}

#[test]
fn concurrent_recording_is_serialized() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ModelConfig::new(Backend::Mock, "canned");
    config.mock_reply = Some(REPLY.into());
    let client = Arc::new(Client::new(config).unwrap().recording_to(dir.path()));
    let p = prompt();
    std::thread::scope(|s| {
        for k in 0..8 {
            let client = Arc::clone(&client);
            let p = &p;
            s.spawn(move || client.send(p, &image(), k % 2).unwrap());
        }
    });
    let files: Vec<_> = std::fs::read_dir(dir.path().join("canned")).unwrap().collect();
    assert_eq!(files.len(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn parse_observation_never_panics(raw in any::<String>()) {
        let _ = parse_observation(&raw);
    }

    #[test]
    fn parse_observation_never_panics_on_jsonish(raw in r#"[{}":, \[\]a-zA-Z/` \n\\]{0,200}"#) {
        let _ = parse_observation(&raw);
    }

    #[test]
    fn wrapped_replies_parse(prefix in "[^{]{0,40}", suffix in ".{0,40}", s in "[A-Za-z ]{1,12}") {
        prop_assume!(!s.trim().is_empty());
        let body = serde_json::json!({"SymptomAbnormality": s, "ColorAbnormality": "N/A", "ShapeOfSymptomAbnormality": "Oval"});
        let raw = format!("{prefix}```json\n{body}\n```{suffix}");
        let obs = parse_observation(&raw).unwrap();
        prop_assert_eq!(obs.symptom.label(), Some(s.trim()));
        prop_assert!(obs.color.is_na());
    }
}
