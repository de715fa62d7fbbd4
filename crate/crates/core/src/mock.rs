//! Mock completion backends for hermetic tests: an in-process backend that
//! records every call, and a minimal HTTP server speaking the same wire
//! protocol as the real endpoint.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use crate::backend::{CompletionBackend, CompletionCall, WireRequest, WireResponse};
use crate::error::Result;

type Responder = Box<dyn Fn(&CompletionCall) -> String + Send + Sync>;

/// In-process backend: answers via a closure and captures every call.
pub struct MockBackend {
    responder: Responder,
    calls: Mutex<Vec<CompletionCall>>,
}

impl MockBackend {
    pub fn with(responder: impl Fn(&CompletionCall) -> String + Send + Sync + 'static) -> Self {
        MockBackend {
            responder: Box::new(responder),
            calls: Mutex::new(Vec::new()),
        }
    }

    /// Always answers with the same text.
    pub fn fixed(text: &str) -> Self {
        let text = text.to_string();
        Self::with(move |_| text.clone())
    }

    /// Answers with the target of the example closest to the query (the
    /// last example pair in the prompt), or an empty string without
    /// examples. With self-retrieval queries this copies the reference.
    pub fn echo_last_example_target() -> Self {
        Self::with(|call| last_example_target(&call.prompt).unwrap_or_default())
    }

    pub fn calls(&self) -> Vec<CompletionCall> {
        self.calls.lock().unwrap().clone()
    }
}

/// Target text of the example nearest the query: the third-to-last prompt
/// line, stripped of its language-name prefix.
pub fn last_example_target(prompt: &str) -> Option<String> {
    let lines: Vec<&str> = prompt.lines().collect();
    if lines.len() < 4 {
        return None; // zero-shot prompt: query line + cue only
    }
    let line = lines[lines.len() - 3];
    Some(line.split_once(": ").map(|(_, t)| t).unwrap_or(line).to_string())
}

impl CompletionBackend for MockBackend {
    fn complete(&self, call: &CompletionCall) -> Result<String> {
        self.calls.lock().unwrap().push(call.clone());
        Ok((self.responder)(call))
    }
}

/// What the mock HTTP server should answer for one request.
pub enum MockResponse {
    Ok(String),
    Status(u16),
}

type ServerResponder = Arc<dyn Fn(&WireRequest) -> MockResponse + Send + Sync>;

/// A tiny single-threaded HTTP server implementing the completion wire
/// protocol, for exercising the real HTTP backend in tests.
pub struct MockServer {
    addr: SocketAddr,
    requests: Arc<Mutex<Vec<WireRequest>>>,
    shutdown: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(responder: impl Fn(&WireRequest) -> MockResponse + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind mock server");
        let addr = listener.local_addr().unwrap();
        let requests: Arc<Mutex<Vec<WireRequest>>> = Arc::default();
        let shutdown = Arc::new(AtomicBool::new(false));
        let responder: ServerResponder = Arc::new(responder);

        let requests_bg = Arc::clone(&requests);
        let shutdown_bg = Arc::clone(&shutdown);
        let handle = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if shutdown_bg.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let _ = handle_connection(stream, &requests_bg, &responder);
            }
        });

        MockServer {
            addr,
            requests,
            shutdown,
            handle: Some(handle),
        }
    }

    pub fn url(&self) -> String {
        format!("http://{}/complete", self.addr)
    }

    pub fn requests(&self) -> Vec<WireRequest> {
        self.requests.lock().unwrap().clone()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // Unblock accept() so the thread can observe the flag.
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn handle_connection(
    stream: TcpStream,
    requests: &Mutex<Vec<WireRequest>>,
    responder: &ServerResponder,
) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut line = String::new();
    reader.read_line(&mut line)?; // request line
    let mut content_length = 0usize;
    loop {
        let mut header = String::new();
        if reader.read_line(&mut header)? == 0 {
            return Ok(());
        }
        let header = header.trim_end();
        if header.is_empty() {
            break;
        }
        if let Some(value) = header
            .to_ascii_lowercase()
            .strip_prefix("content-length:")
            .map(str::trim)
        {
            content_length = value.parse().unwrap_or(0);
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;

    let mut stream = stream;
    let Ok(request) = serde_json::from_slice::<WireRequest>(&body) else {
        stream.write_all(b"HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n")?;
        return Ok(());
    };
    requests.lock().unwrap().push(request.clone());
    match responder(&request) {
        MockResponse::Ok(completion) => {
            let body = serde_json::to_string(&WireResponse { completion }).unwrap();
            let response = format!(
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                body.len(),
                body
            );
            stream.write_all(response.as_bytes())?;
        }
        MockResponse::Status(code) => {
            let response = format!(
                "HTTP/1.1 {code} Error\r\nContent-Length: 0\r\nConnection: close\r\n\r\n"
            );
            stream.write_all(response.as_bytes())?;
        }
    }
    Ok(())
}
