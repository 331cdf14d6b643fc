//! Links carried over TCP between separate hosts.
//!
//! Each link-level token is five bytes: a kind byte (0 data, 1 END) and
//! the word, most significant byte first. Switched tokens use kinds 2
//! (data) and 3 (END) followed by the word, the destination port and the
//! source port, four bytes each.

use std::io::{self, Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use nopsys::fabric::{ExternalLink, LinkItem, PortId, Token, Word};
use thiserror::Error;

pub const RAW_DATA: u8 = 0;
pub const RAW_END: u8 = 1;
pub const ROUTED_DATA: u8 = 2;
pub const ROUTED_END: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown frame kind {0}")]
pub struct FrameError(pub u8);

fn token_parts(token: Token) -> (bool, Word) {
    match token {
        Token::Data(w) => (false, w),
        Token::End => (true, 0),
    }
}

pub fn encode(item: &LinkItem, out: &mut Vec<u8>) {
    match *item {
        LinkItem::Raw(t) => {
            let (end, w) = token_parts(t);
            out.push(if end { RAW_END } else { RAW_DATA });
            out.extend_from_slice(&w.to_be_bytes());
        }
        LinkItem::Routed { dest, src, token, .. } => {
            let (end, w) = token_parts(token);
            out.push(if end { ROUTED_END } else { ROUTED_DATA });
            out.extend_from_slice(&w.to_be_bytes());
            out.extend_from_slice(&dest.word().to_be_bytes());
            out.extend_from_slice(&src.word().to_be_bytes());
        }
    }
}

fn word_at(b: &[u8], at: usize) -> Word {
    Word::from_be_bytes(b[at..at + 4].try_into().unwrap())
}

/// Decodes one item from the front of `buf`. `Ok(None)` means more bytes
/// are needed; otherwise the item and the bytes it used.
pub fn decode(buf: &[u8]) -> Result<Option<(LinkItem, usize)>, FrameError> {
    let Some(&kind) = buf.first() else { return Ok(None) };
    let len = match kind {
        RAW_DATA | RAW_END => 5,
        ROUTED_DATA | ROUTED_END => 13,
        k => return Err(FrameError(k)),
    };
    if buf.len() < len {
        return Ok(None);
    }
    let w = word_at(buf, 1);
    let item = match kind {
        RAW_DATA => LinkItem::Raw(Token::Data(w)),
        RAW_END => LinkItem::Raw(Token::End),
        _ => LinkItem::Routed {
            token: if kind == ROUTED_END { Token::End } else { Token::Data(w) },
            dest: PortId::from_word(word_at(buf, 5)),
            src: PortId::from_word(word_at(buf, 9)),
            credited: false,
        },
    };
    Ok(Some((item, len)))
}

/// Connection state shared with the reader thread.
#[derive(Debug)]
pub struct LinkState {
    connected: AtomicBool,
    last_activity: Mutex<Instant>,
}

impl LinkState {
    fn touch(&self) {
        *self.last_activity.lock().unwrap() = Instant::now();
    }

    pub fn connected(&self) -> bool {
        self.connected.load(Ordering::SeqCst)
    }

    pub fn idle_for(&self) -> Duration {
        self.last_activity.lock().unwrap().elapsed()
    }
}

pub struct SocketLink {
    stream: TcpStream,
    rx: Receiver<LinkItem>,
    state: Arc<LinkState>,
    buf: Vec<u8>,
}

impl SocketLink {
    pub fn new(stream: TcpStream) -> io::Result<Self> {
        stream.set_nodelay(true)?;
        let state = Arc::new(LinkState { connected: AtomicBool::new(true), last_activity: Mutex::new(Instant::now()) });
        let (tx, rx) = mpsc::channel();
        let mut reader = stream.try_clone()?;
        let st = state.clone();
        thread::spawn(move || {
            let mut pending = Vec::new();
            let mut chunk = [0u8; 4096];
            loop {
                match reader.read(&mut chunk) {
                    Ok(0) | Err(_) => break,
                    Ok(n) => pending.extend_from_slice(&chunk[..n]),
                }
                st.touch();
                let mut used = 0;
                loop {
                    match decode(&pending[used..]) {
                        Ok(Some((item, n))) => {
                            used += n;
                            if tx.send(item).is_err() {
                                return;
                            }
                        }
                        Ok(None) => break,
                        Err(e) => {
                            warn!("socket link: {e}; closing");
                            st.connected.store(false, Ordering::SeqCst);
                            return;
                        }
                    }
                }
                pending.drain(..used);
            }
            debug!("socket link closed by peer");
            st.connected.store(false, Ordering::SeqCst);
        });
        Ok(SocketLink { stream, rx, state, buf: Vec::new() })
    }

    pub fn state(&self) -> Arc<LinkState> {
        self.state.clone()
    }

    /// Waits for one peer on `addr`. `announce` gets the bound address.
    pub fn listen(addr: &str, announce: impl FnOnce(std::net::SocketAddr)) -> io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        announce(listener.local_addr()?);
        let (stream, peer) = listener.accept()?;
        info!("link peer {peer} connected");
        SocketLink::new(stream)
    }

    /// Connects to `addr`, retrying until `patience` runs out.
    pub fn connect(addr: &str, patience: Duration) -> io::Result<Self> {
        let start = Instant::now();
        loop {
            let attempt = addr.to_socket_addrs().and_then(|mut a| {
                let a = a.next().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "no address"))?;
                TcpStream::connect(a)
            });
            match attempt {
                Ok(s) => return SocketLink::new(s),
                Err(e) if start.elapsed() >= patience => return Err(e),
                Err(_) => thread::sleep(Duration::from_millis(50)),
            }
        }
    }
}

impl Drop for SocketLink {
    fn drop(&mut self) {
        let _ = self.stream.shutdown(std::net::Shutdown::Both);
    }
}

impl ExternalLink for SocketLink {
    fn send(&mut self, item: LinkItem) {
        if !self.state.connected() {
            return;
        }
        self.buf.clear();
        encode(&item, &mut self.buf);
        if self.stream.write_all(&self.buf).is_err() {
            self.state.connected.store(false, Ordering::SeqCst);
        }
        self.state.touch();
    }

    fn poll(&mut self) -> Option<LinkItem> {
        self.rx.try_recv().ok()
    }

    fn connected(&self) -> bool {
        self.state.connected()
    }
}
