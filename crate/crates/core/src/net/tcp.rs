use std::io::BufReader;
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use super::envelope::Envelope;
use super::frame::{read_frame, write_frame};
use super::link::Link;
use super::relay::Relay;
use super::NetError;

/// Accepts client connections and plugs each into the relay.
///
/// The first frame on a connection names the party (its envelope sender);
/// the route is registered before that frame is forwarded. Each connection
/// gets a reader thread feeding the relay and a writer thread draining the
/// party's queue.
pub struct TcpServer {
    pub local_addr: SocketAddr,
    pub handle: JoinHandle<()>,
}

impl TcpServer {
    pub fn bind(addr: impl ToSocketAddrs, relay: Arc<Relay>) -> std::io::Result<TcpServer> {
        let listener = TcpListener::bind(addr)?;
        let local_addr = listener.local_addr()?;
        let handle = std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let relay = Arc::clone(&relay);
                std::thread::spawn(move || serve_connection(stream, relay));
            }
        });
        Ok(TcpServer { local_addr, handle })
    }
}

fn serve_connection(stream: TcpStream, relay: Arc<Relay>) {
    let _ = stream.set_nodelay(true);
    let Ok(write_half) = stream.try_clone() else { return };
    let mut reader = BufReader::new(stream);
    let Ok(first) = read_frame(&mut reader, relay.max_frame()) else { return };
    let Ok((party, _)) = Envelope::peek_route(&first) else { return };
    let (tx, rx) = channel::<Vec<u8>>();
    if relay.register(party, tx).is_err() {
        let _ = write_half.shutdown(Shutdown::Both);
        return;
    }
    let mut writer = write_half;
    let writer_thread = std::thread::spawn(move || {
        for raw in rx {
            if write_frame(&mut writer, &raw).is_err() {
                break;
            }
        }
        let _ = writer.shutdown(Shutdown::Both);
    });
    let mut next = Some(first);
    loop {
        let raw = match next.take() {
            Some(r) => r,
            None => match read_frame(&mut reader, relay.max_frame()) {
                Ok(r) => r,
                Err(_) => break,
            },
        };
        if relay.route(party, raw).is_err() {
            break;
        }
    }
    relay.disconnect(party);
    let _ = writer_thread.join();
}

/// Client side of a TCP connection to the relay.
pub struct TcpLink {
    writer: TcpStream,
    inbox: Receiver<Result<Vec<u8>, NetError>>,
}

pub fn connect(addr: impl ToSocketAddrs, max_frame: usize) -> Result<TcpLink, NetError> {
    let stream = TcpStream::connect(addr)?;
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let (tx, rx) = channel();
    std::thread::spawn(move || loop {
        let r = read_frame(&mut reader, max_frame);
        let stop = r.is_err();
        if tx.send(r).is_err() || stop {
            break;
        }
    });
    Ok(TcpLink { writer: stream, inbox: rx })
}

impl Link for TcpLink {
    fn send(&mut self, raw_frame: Vec<u8>) -> Result<(), NetError> {
        write_frame(&mut self.writer, &raw_frame)
    }

    fn recv(&mut self, timeout: Duration) -> Result<Vec<u8>, NetError> {
        match self.inbox.recv_timeout(timeout) {
            Ok(r) => r,
            Err(RecvTimeoutError::Timeout) => Err(NetError::Timeout),
            Err(RecvTimeoutError::Disconnected) => Err(NetError::Closed),
        }
    }
}

impl Drop for TcpLink {
    fn drop(&mut self) {
        let _ = self.writer.shutdown(Shutdown::Both);
    }
}
