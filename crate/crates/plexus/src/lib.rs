//! Command line and HTTP/WebSocket service for Plexus sessions.

pub mod cli;
pub mod server;
pub mod transport;
