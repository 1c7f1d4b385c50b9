//! Newline-delimited JSON protocol for driving Circle2D from another
//! process. One session per connection.
//!
//! Requests: `{"v":1,"cmd":"make","config":{...}}`, `{"v":1,"cmd":"reset","seed":7}`,
//! `{"v":1,"cmd":"step","action":[dx,dy]}`, `{"v":1,"cmd":"config"}`,
//! `{"v":1,"cmd":"close"}`. Responses carry `"ok":true` plus payload, or
//! `"ok":false` with `code` and `msg`.

mod protocol;
mod transport;

pub use protocol::{ErrorCode, Session, PROTOCOL_VERSION};
pub use transport::{serve_stream, serve_tcp};
