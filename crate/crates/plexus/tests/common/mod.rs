#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use futures::StreamExt;
use plexus::server::{router, AppState};
use plexus_core::WireEvent;
use serde_json::Value;
use tokio_tungstenite::tungstenite::Message;

pub const WS_TIMEOUT: Duration = Duration::from_secs(30);

/// Serves a fresh [`AppState`] on an ephemeral local port.
pub async fn spawn_server(state: Arc<AppState>) -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        axum::serve(listener, router(state)).await.unwrap();
    });
    addr
}

pub async fn get(addr: SocketAddr, path: &str) -> (u16, String) {
    let response = reqwest::get(format!("http://{addr}{path}")).await.unwrap();
    let status = response.status().as_u16();
    (status, response.text().await.unwrap())
}

pub async fn get_json(addr: SocketAddr, path: &str) -> (u16, Value) {
    let (status, body) = get(addr, path).await;
    (status, serde_json::from_str(&body).unwrap_or(Value::Null))
}

pub async fn post_json(addr: SocketAddr, path: &str, body: &str) -> (u16, Value) {
    let response = reqwest::Client::new()
        .post(format!("http://{addr}{path}"))
        .header("content-type", "application/json")
        .body(body.to_string())
        .send()
        .await
        .unwrap();
    let status = response.status().as_u16();
    let text = response.text().await.unwrap();
    (status, serde_json::from_str(&text).unwrap_or(Value::Null))
}

pub async fn create_session(addr: SocketAddr, body: &str) -> String {
    let (status, reply) = post_json(addr, "/api/sessions", body).await;
    assert_eq!(status, 201, "{reply}");
    reply["session_id"].as_str().unwrap().to_string()
}

/// Reads text frames until the server closes the stream. Returns the raw
/// frames so callers can compare bytes.
pub async fn collect_frames(addr: SocketAddr, session: &str) -> Vec<String> {
    collect_frames_limited(addr, session, usize::MAX).await
}

pub async fn collect_frames_limited(addr: SocketAddr, session: &str, limit: usize) -> Vec<String> {
    let url = format!("ws://{addr}/api/sessions/{session}/events");
    let (mut socket, _) = tokio_tungstenite::connect_async(url).await.unwrap();
    let mut frames = Vec::new();
    while frames.len() < limit {
        let next = tokio::time::timeout(WS_TIMEOUT, socket.next())
            .await
            .expect("event stream stalled");
        match next {
            Some(Ok(Message::Text(text))) => frames.push(text.to_string()),
            Some(Ok(Message::Close(_))) | None => break,
            Some(Ok(_)) => {}
            Some(Err(e)) => panic!("websocket error: {e}"),
        }
    }
    frames
}

pub fn parse_frames(frames: &[String]) -> Vec<WireEvent> {
    frames.iter().map(|f| serde_json::from_str(f).unwrap()).collect()
}
