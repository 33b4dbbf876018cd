//! HTTP query service over the index.
//!
//! GET /health and GET /news, JSON in and out. Each request runs against a
//! consistent index snapshot, so concurrent reads stay self-consistent while
//! a worker pool keeps indexing.

use std::sync::Arc;
use std::thread::JoinHandle;

use serde::Serialize;
use thiserror::Error;
use tiny_http::{Header, Method, Response, Server};

use super::{NewsIndex, QueryRequest};

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {message}")]
    Bind { addr: String, message: String },
}

/// A running query service; dropping the handle without calling
/// [`ServerHandle::shutdown`] detaches the worker threads.
pub struct ServerHandle {
    server: Arc<Server>,
    workers: Vec<JoinHandle<()>>,
    addr: std::net::SocketAddr,
}

impl ServerHandle {
    pub fn addr(&self) -> std::net::SocketAddr {
        self.addr
    }

    pub fn shutdown(self) {
        // unblock() wakes a single blocked recv(), so fire one per worker.
        for _ in &self.workers {
            self.server.unblock();
        }
        for worker in self.workers {
            let _ = worker.join();
        }
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

/// Starts the service on `addr` (e.g. "127.0.0.1:8080"; port 0 picks a free
/// one) with a small pool of handler threads.
pub fn serve(
    index: Arc<NewsIndex>,
    addr: &str,
    threads: usize,
) -> Result<ServerHandle, ServeError> {
    let server = Arc::new(Server::http(addr).map_err(|e| ServeError::Bind {
        addr: addr.to_string(),
        message: e.to_string(),
    })?);
    let bound = server
        .server_addr()
        .to_ip()
        .expect("http listener has an IP address");
    let mut workers = Vec::new();
    for _ in 0..threads.max(1) {
        let server = Arc::clone(&server);
        let index = Arc::clone(&index);
        workers.push(std::thread::spawn(move || {
            while let Ok(request) = server.recv() {
                let response = handle(&index, request.method(), request.url());
                let _ = request.respond(response);
            }
        }));
    }
    Ok(ServerHandle {
        server,
        workers,
        addr: bound,
    })
}

fn json_response(status: u16, body: String) -> Response<std::io::Cursor<Vec<u8>>> {
    let header = Header::from_bytes(
        &b"Content-Type"[..],
        &b"application/json; charset=utf-8"[..],
    )
    .expect("static header");
    Response::from_string(body)
        .with_status_code(status)
        .with_header(header)
}

fn handle(index: &NewsIndex, method: &Method, url: &str) -> Response<std::io::Cursor<Vec<u8>>> {
    if *method != Method::Get {
        return json_response(
            405,
            serde_json::to_string(&ErrorBody {
                error: "method not allowed".to_string(),
            })
            .unwrap(),
        );
    }
    let (path, query) = match url.split_once('?') {
        Some((p, q)) => (p, Some(q)),
        None => (url, None),
    };
    match path {
        "/health" => json_response(200, "{\"status\":\"ok\"}".to_string()),
        "/news" => {
            let pairs = match parse_query_string(query.unwrap_or("")) {
                Ok(pairs) => pairs,
                Err(message) => {
                    return json_response(
                        400,
                        serde_json::to_string(&ErrorBody { error: message }).unwrap(),
                    )
                }
            };
            let req =
                QueryRequest::from_params(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())));
            match req.and_then(|r| index.search(&r)) {
                Ok(response) => json_response(200, serde_json::to_string(&response).unwrap()),
                Err(e) => json_response(
                    400,
                    serde_json::to_string(&ErrorBody { error: e.0 }).unwrap(),
                ),
            }
        }
        _ => json_response(
            404,
            serde_json::to_string(&ErrorBody {
                error: format!("no such path: {path}"),
            })
            .unwrap(),
        ),
    }
}

/// Splits and percent-decodes an application/x-www-form-urlencoded query
/// string.
pub fn parse_query_string(query: &str) -> Result<Vec<(String, String)>, String> {
    let mut pairs = Vec::new();
    for piece in query.split('&') {
        if piece.is_empty() {
            continue;
        }
        let (key, value) = piece.split_once('=').unwrap_or((piece, ""));
        pairs.push((percent_decode(key)?, percent_decode(value)?));
    }
    Ok(pairs)
}

fn percent_decode(input: &str) -> Result<String, String> {
    let bytes = input.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'%' => {
                let hex = bytes
                    .get(i + 1..i + 3)
                    .ok_or_else(|| format!("truncated percent escape in {input:?}"))?;
                let value = u8::from_str_radix(
                    std::str::from_utf8(hex).map_err(|_| "bad percent escape".to_string())?,
                    16,
                )
                .map_err(|_| format!("bad percent escape in {input:?}"))?;
                out.push(value);
                i += 3;
            }
            b'+' => {
                out.push(b' ');
                i += 1;
            }
            b => {
                out.push(b);
                i += 1;
            }
        }
    }
    String::from_utf8(out).map_err(|_| format!("query parameter is not UTF-8: {input:?}"))
}
