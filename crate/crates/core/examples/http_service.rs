//! Starts the JSON service on an ephemeral port, issues a few requests and
//! reloads the corpus.
//!
//! cargo run --example http_service

use std::path::PathBuf;
use std::sync::Arc;

use mathkb::interface::http::{serve_on, AppState};
use mathkb::interface::ServiceConfig;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};

async fn request(addr: std::net::SocketAddr, method: &str, target: &str) -> std::io::Result<String> {
    let mut stream = TcpStream::connect(addr).await?;
    let head = format!(
        "{method} {target} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\nContent-Length: 0\r\n\r\n"
    );
    stream.write_all(head.as_bytes()).await?;
    let mut response = String::new();
    stream.read_to_string(&mut response).await?;
    Ok(response)
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let config = ServiceConfig::load(fixtures.join("service.json"))?;
    let (state, report) = AppState::from_config(config)?;
    print!("{report}");

    let listener = TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    let server = tokio::spawn(serve_on(listener, Arc::new(state)));

    for (method, target) in [
        ("GET", "/healthz"),
        (
            "GET",
            "/search/formula?mode=semantic&concepts=Curvature&scope=Definition",
        ),
        ("GET", "/ontology/suggest?q=tri&limit=3"),
        ("GET", "/recommend/circle?profile=novice&k=2"),
        ("POST", "/admin/reload"),
    ] {
        let response = request(addr, method, target).await?;
        let status = response.lines().next().unwrap_or_default();
        let body = response.split("\r\n\r\n").nth(1).unwrap_or_default();
        let preview: String = body.chars().take(160).collect();
        println!("{method} {target}\n  {status}\n  {preview}\n");
    }
    server.abort();
    Ok(())
}
