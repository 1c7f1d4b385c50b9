use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::thread;

use super::Session;
use crate::circle2d::EnvConfig;

/// Serve one session over a line stream until `close` or end of input.
pub fn serve_stream<R: BufRead, W: Write>(
    reader: R,
    mut writer: W,
    default_config: EnvConfig,
) -> std::io::Result<()> {
    let mut session = Session::new(default_config);
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut response = serde_json::to_vec(&session.handle_line(&line))?;
        response.push(b'\n');
        writer.write_all(&response)?;
        writer.flush()?;
        if session.is_closed() {
            break;
        }
    }
    Ok(())
}

/// Accept connections forever, one thread and one session per connection.
pub fn serve_tcp(listener: TcpListener, default_config: EnvConfig) -> std::io::Result<()> {
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                eprintln!("accept failed: {e}");
                continue;
            }
        };
        let _ = stream.set_nodelay(true);
        let config = default_config.clone();
        thread::spawn(move || {
            let reader = match stream.try_clone() {
                Ok(r) => BufReader::new(r),
                Err(e) => return eprintln!("connection setup failed: {e}"),
            };
            if let Err(e) = serve_stream(reader, stream, config) {
                eprintln!("connection ended: {e}");
            }
        });
    }
    Ok(())
}
