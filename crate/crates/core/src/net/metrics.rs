use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use super::relay::Relay;

#[derive(Default)]
pub struct RelayMetrics {
    pub frames: AtomicU64,
    pub bytes: AtomicU64,
    pub route_errors: AtomicU64,
    pub rejected: AtomicU64,
    by_type: Mutex<BTreeMap<u8, (u64, u64)>>,
}

impl RelayMetrics {
    pub(super) fn record(&self, msg_type: u8, len: usize) {
        self.frames.fetch_add(1, Ordering::Relaxed);
        self.bytes.fetch_add(len as u64, Ordering::Relaxed);
        let mut m = self.by_type.lock().unwrap();
        let e = m.entry(msg_type).or_default();
        e.0 += 1;
        e.1 += len as u64;
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "primematch_relay_frames {}\nprimematch_relay_bytes {}\nprimematch_relay_route_errors {}\nprimematch_relay_rejected {}\n",
            self.frames.load(Ordering::Relaxed),
            self.bytes.load(Ordering::Relaxed),
            self.route_errors.load(Ordering::Relaxed),
            self.rejected.load(Ordering::Relaxed),
        );
        for (t, (n, b)) in self.by_type.lock().unwrap().iter() {
            out.push_str(&format!("primematch_relay_type_frames{{type=\"0x{t:02x}\"}} {n}\n"));
            out.push_str(&format!("primematch_relay_type_bytes{{type=\"0x{t:02x}\"}} {b}\n"));
        }
        out
    }
}

/// Serves the relay counters as plain text to any HTTP GET.
pub fn serve_metrics(addr: SocketAddr, relay: Arc<Relay>) -> std::io::Result<(SocketAddr, JoinHandle<()>)> {
    let listener = TcpListener::bind(addr)?;
    let local = listener.local_addr()?;
    let handle = std::thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            let mut stream = stream;
            let mut buf = [0u8; 1024];
            let _ = stream.read(&mut buf);
            let body = relay.metrics.render();
            let _ = write!(
                stream,
                "HTTP/1.0 200 OK\r\nContent-Type: text/plain\r\nContent-Length: {}\r\n\r\n{}",
                body.len(),
                body
            );
        }
    });
    Ok((local, handle))
}
