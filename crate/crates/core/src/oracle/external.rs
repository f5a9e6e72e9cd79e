//! Newline-delimited JSON oracle protocol.
//!
//! ```text
//! host   -> {"protocol": 1, "n": 12, "labels": [...], "meta": {...}}
//! client -> {"id": 7, "keep": [0, 3, 4]}
//! host   -> {"id": 7, "value": -1.25}
//! host   -> {"id": 8, "error": "keep index 12 out of range"}
//! ```
//!
//! Several requests may be in flight at once; responses are matched by id,
//! never by arrival order. Request ids are unique per connection.

use std::collections::HashMap;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{Shutdown, TcpStream, ToSocketAddrs};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex, MutexGuard};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{Oracle, OracleError};
use crate::lattice::{SubsetMask, N_MAX};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Handshake {
    pub protocol: u32,
    pub n: usize,
    #[serde(default)]
    pub labels: Vec<String>,
    #[serde(default = "empty_meta")]
    pub meta: serde_json::Value,
}

fn empty_meta() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub keep: Vec<usize>,
}

impl Request {
    pub fn new(id: u64, mask: SubsetMask) -> Self {
        Self {
            id,
            keep: mask.players().collect(),
        }
    }
}

/// A host reply: either a value or an error record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Where an external oracle host lives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    /// `tcp:host:port`
    Tcp(String),
    /// `exec:program arg1 arg2`, spoken over the child's stdin/stdout.
    Exec { program: String, args: Vec<String> },
}

impl Endpoint {
    pub fn parse(descriptor: &str) -> Result<Self, OracleError> {
        if let Some(addr) = descriptor.strip_prefix("tcp:") {
            if addr.is_empty() {
                return Err(OracleError::Source("empty tcp address".into()));
            }
            return Ok(Endpoint::Tcp(addr.to_string()));
        }
        if let Some(cmd) = descriptor.strip_prefix("exec:") {
            let mut parts = cmd.split_whitespace().map(str::to_string);
            let program = parts
                .next()
                .ok_or_else(|| OracleError::Source("empty exec command".into()))?;
            return Ok(Endpoint::Exec {
                program,
                args: parts.collect(),
            });
        }
        Err(OracleError::Source(format!(
            "unknown endpoint {descriptor:?}; expected tcp:<host:port> or exec:<command>"
        )))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalConfig {
    /// Per-request timeout, also applied to the handshake.
    pub timeout: Duration,
    /// When set, a handshake declaring a different `n` is rejected.
    pub expected_n: Option<usize>,
}

impl Default for ExternalConfig {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(30),
            expected_n: None,
        }
    }
}

type Reply = Result<f64, OracleError>;

struct Shared {
    writer: Mutex<Box<dyn Write + Send>>,
    pending: Mutex<HashMap<u64, Sender<Reply>>>,
    broken: Mutex<Option<OracleError>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl Shared {
    // lock order: pending, then broken
    fn fail_all(&self, err: OracleError) {
        let mut pending = lock(&self.pending);
        {
            let mut broken = lock(&self.broken);
            if broken.is_none() {
                *broken = Some(err.clone());
            }
        }
        for (_, tx) in pending.drain() {
            let _ = tx.send(Err(err.clone()));
        }
    }

    fn deliver(&self, line: &str) {
        let resp: Response = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                self.fail_all(OracleError::Malformed(format!(
                    "{e} in {:?}",
                    truncate(line)
                )));
                return;
            }
        };
        let Some(tx) = lock(&self.pending).remove(&resp.id) else {
            // late reply to a request that already timed out
            return;
        };
        let reply = match (resp.value, resp.error) {
            (_, Some(message)) => Err(OracleError::Host {
                id: resp.id,
                message,
            }),
            (Some(v), None) if v.is_finite() => Ok(v),
            (Some(v), None) => Err(OracleError::Malformed(format!(
                "non-finite value {v} for request {}",
                resp.id
            ))),
            (None, None) => Err(OracleError::Malformed(format!(
                "response {} carries neither value nor error",
                resp.id
            ))),
        };
        let _ = tx.send(reply);
    }
}

fn truncate(line: &str) -> String {
    line.chars().take(120).collect()
}

enum Conn {
    Tcp(TcpStream),
    Child(Child),
    Other,
}

/// Oracle served by an external host over the wire protocol.
pub struct ExternalOracle {
    handshake: Handshake,
    shared: Arc<Shared>,
    next_id: AtomicU64,
    timeout: Duration,
    conn: Mutex<Conn>,
}

impl std::fmt::Debug for ExternalOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalOracle")
            .field("handshake", &self.handshake)
            .field("timeout", &self.timeout)
            .finish_non_exhaustive()
    }
}

impl ExternalOracle {
    pub fn connect(endpoint: &Endpoint, config: &ExternalConfig) -> Result<Self, OracleError> {
        match endpoint {
            Endpoint::Tcp(addr) => {
                let sock = addr
                    .to_socket_addrs()
                    .map_err(|e| OracleError::Transport(format!("resolve {addr}: {e}")))?
                    .next()
                    .ok_or_else(|| OracleError::Transport(format!("no address for {addr}")))?;
                let stream = TcpStream::connect_timeout(&sock, config.timeout)
                    .map_err(|e| OracleError::Transport(format!("connect {addr}: {e}")))?;
                let _ = stream.set_nodelay(true);
                let reader = stream
                    .try_clone()
                    .map_err(|e| OracleError::Transport(e.to_string()))?;
                let writer = stream
                    .try_clone()
                    .map_err(|e| OracleError::Transport(e.to_string()))?;
                Self::start(reader, writer, config, Conn::Tcp(stream))
            }
            Endpoint::Exec { program, args } => {
                let mut child = Command::new(program)
                    .args(args)
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()
                    .map_err(|e| OracleError::Transport(format!("spawn {program}: {e}")))?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                Self::start(stdout, stdin, config, Conn::Child(child))
            }
        }
    }

    /// Speaks the protocol over an arbitrary byte-stream pair.
    pub fn from_streams<R, W>(
        reader: R,
        writer: W,
        config: &ExternalConfig,
    ) -> Result<Self, OracleError>
    where
        R: Read + Send + 'static,
        W: Write + Send + 'static,
    {
        Self::start(reader, writer, config, Conn::Other)
    }

    fn start<R, W>(
        reader: R,
        writer: W,
        config: &ExternalConfig,
        conn: Conn,
    ) -> Result<Self, OracleError>
    where
        R: Read + Send + 'static,
        W: Write + Send + 'static,
    {
        let shared = Arc::new(Shared {
            writer: Mutex::new(Box::new(writer)),
            pending: Mutex::new(HashMap::new()),
            broken: Mutex::new(None),
        });
        let (hs_tx, hs_rx) = mpsc::channel();
        let reader_shared = Arc::clone(&shared);
        thread::Builder::new()
            .name("oracle-reader".into())
            .spawn(move || read_loop(BufReader::new(reader), reader_shared, hs_tx))
            .map_err(|e| OracleError::Transport(format!("spawn reader: {e}")))?;

        let mut oracle = Self {
            handshake: Handshake {
                protocol: PROTOCOL_VERSION,
                n: 0,
                labels: vec![],
                meta: empty_meta(),
            },
            shared,
            next_id: AtomicU64::new(0),
            timeout: config.timeout,
            conn: Mutex::new(conn),
        };
        let line = match hs_rx.recv_timeout(config.timeout) {
            Ok(line) => line?,
            Err(_) => {
                return Err(OracleError::Timeout {
                    id: 0,
                    after_ms: config.timeout.as_millis() as u64,
                })
            }
        };
        let hs: Handshake = serde_json::from_str(&line).map_err(|e| {
            OracleError::Protocol(format!("bad handshake {:?}: {e}", truncate(&line)))
        })?;
        if hs.protocol != PROTOCOL_VERSION {
            return Err(OracleError::Protocol(format!(
                "host speaks protocol {}, expected {PROTOCOL_VERSION}",
                hs.protocol
            )));
        }
        if hs.n > N_MAX {
            return Err(OracleError::Protocol(format!(
                "host declares n = {}, limit is {N_MAX}",
                hs.n
            )));
        }
        if let Some(expected) = config.expected_n {
            if expected != hs.n {
                return Err(OracleError::HandshakeMismatch {
                    expected,
                    found: hs.n,
                });
            }
        }
        if !hs.labels.is_empty() && hs.labels.len() != hs.n {
            return Err(OracleError::Protocol(format!(
                "handshake carries {} labels for n = {}",
                hs.labels.len(),
                hs.n
            )));
        }
        oracle.handshake = hs;
        Ok(oracle)
    }

    pub fn handshake(&self) -> &Handshake {
        &self.handshake
    }

    fn send(&self, masks: &[SubsetMask]) -> Vec<(u64, Result<Receiver<Reply>, OracleError>)> {
        let n = self.handshake.n;
        let mut out = Vec::with_capacity(masks.len());
        let mut buf = Vec::new();
        {
            let mut pending = lock(&self.shared.pending);
            let broken = lock(&self.shared.broken).clone();
            for &mask in masks {
                let id = self.next_id.fetch_add(1, Ordering::Relaxed);
                if !mask.fits(n) {
                    out.push((
                        id,
                        Err(OracleError::MaskOutOfRange {
                            mask: mask.bits(),
                            n,
                        }),
                    ));
                    continue;
                }
                if let Some(err) = &broken {
                    out.push((id, Err(err.clone())));
                    continue;
                }
                let (tx, rx) = mpsc::channel();
                pending.insert(id, tx);
                serde_json::to_writer(&mut buf, &Request::new(id, mask))
                    .expect("request serializes");
                buf.push(b'\n');
                out.push((id, Ok(rx)));
            }
        }
        if buf.is_empty() {
            return out;
        }
        let written = {
            let mut w = lock(&self.shared.writer);
            w.write_all(&buf).and_then(|_| w.flush())
        };
        if let Err(e) = written {
            self.shared
                .fail_all(OracleError::Transport(format!("write: {e}")));
        }
        out
    }

    fn wait(&self, sent: Vec<(u64, Result<Receiver<Reply>, OracleError>)>) -> Vec<Reply> {
        let deadline = Instant::now() + self.timeout;
        sent.into_iter()
            .map(|(id, rx)| {
                let rx = rx?;
                let left = deadline.saturating_duration_since(Instant::now());
                match rx.recv_timeout(left) {
                    Ok(reply) => reply,
                    Err(RecvTimeoutError::Timeout) => {
                        lock(&self.shared.pending).remove(&id);
                        // the reply may have raced the removal
                        rx.try_recv().unwrap_or(Err(OracleError::Timeout {
                            id,
                            after_ms: self.timeout.as_millis() as u64,
                        }))
                    }
                    Err(RecvTimeoutError::Disconnected) => Err(lock(&self.shared.broken)
                        .clone()
                        .unwrap_or_else(|| OracleError::Transport("connection closed".into()))),
                }
            })
            .collect()
    }
}

impl Oracle for ExternalOracle {
    fn n(&self) -> usize {
        self.handshake.n
    }

    fn labels(&self) -> Option<&[String]> {
        (!self.handshake.labels.is_empty()).then_some(self.handshake.labels.as_slice())
    }

    fn query(&self, mask: SubsetMask) -> Result<f64, OracleError> {
        self.query_batch(&[mask]).pop().expect("one reply per mask")
    }

    fn query_batch(&self, masks: &[SubsetMask]) -> Vec<Result<f64, OracleError>> {
        let sent = self.send(masks);
        self.wait(sent)
    }
}

impl Drop for ExternalOracle {
    fn drop(&mut self) {
        match &mut *lock(&self.conn) {
            Conn::Tcp(stream) => {
                let _ = stream.shutdown(Shutdown::Both);
            }
            Conn::Child(child) => {
                let _ = child.kill();
                let _ = child.wait();
            }
            Conn::Other => {}
        }
    }
}

fn read_loop<R: BufRead>(
    mut reader: R,
    shared: Arc<Shared>,
    handshake: Sender<Result<String, OracleError>>,
) {
    let mut handshake = Some(handshake);
    let mut line = String::new();
    loop {
        line.clear();
        match reader.read_line(&mut line) {
            Ok(0) => {
                let err = OracleError::Transport("host closed the connection".into());
                if let Some(tx) = handshake.take() {
                    let _ = tx.send(Err(err.clone()));
                }
                shared.fail_all(err);
                return;
            }
            Ok(_) => {
                let text = line.trim();
                if text.is_empty() {
                    continue;
                }
                if let Some(tx) = handshake.take() {
                    let _ = tx.send(Ok(text.to_string()));
                } else {
                    shared.deliver(text);
                }
            }
            Err(e) => {
                let err = OracleError::Transport(format!("read: {e}"));
                if let Some(tx) = handshake.take() {
                    let _ = tx.send(Err(err.clone()));
                }
                shared.fail_all(err);
                return;
            }
        }
    }
}

/// Hosts `oracle` over the wire protocol until the client disconnects.
///
/// A request that violates the protocol gets an error record and the
/// connection is closed.
pub fn serve<R: BufRead, W: Write>(
    oracle: &dyn Oracle,
    meta: serde_json::Value,
    mut reader: R,
    mut writer: W,
) -> io::Result<()> {
    let n = oracle.n();
    let hs = Handshake {
        protocol: PROTOCOL_VERSION,
        n,
        labels: oracle.labels().map(<[String]>::to_vec).unwrap_or_default(),
        meta,
    };
    serde_json::to_writer(&mut writer, &hs)?;
    writer.write_all(b"\n")?;
    writer.flush()?;

    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Ok(());
        }
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let req: Request = match serde_json::from_str(text) {
            Ok(r) => r,
            Err(e) => {
                let id = serde_json::from_str::<serde_json::Value>(text)
                    .ok()
                    .and_then(|v| v.get("id").and_then(serde_json::Value::as_u64))
                    .unwrap_or(0);
                write_response(
                    &mut writer,
                    &Response {
                        id,
                        value: None,
                        error: Some(format!("bad request: {e}")),
                    },
                )?;
                return Ok(());
            }
        };
        let resp = match keep_mask(&req.keep, n) {
            Ok(mask) => match oracle.query(mask) {
                Ok(v) if v.is_finite() => Response {
                    id: req.id,
                    value: Some(v),
                    error: None,
                },
                Ok(v) => Response {
                    id: req.id,
                    value: None,
                    error: Some(format!("non-finite value {v}")),
                },
                Err(e) => Response {
                    id: req.id,
                    value: None,
                    error: Some(e.to_string()),
                },
            },
            Err(msg) => {
                write_response(
                    &mut writer,
                    &Response {
                        id: req.id,
                        value: None,
                        error: Some(msg),
                    },
                )?;
                return Ok(());
            }
        };
        write_response(&mut writer, &resp)?;
    }
}

fn keep_mask(keep: &[usize], n: usize) -> Result<SubsetMask, String> {
    if keep.windows(2).any(|w| w[0] >= w[1]) {
        return Err("keep indices must be strictly ascending".into());
    }
    if let Some(&bad) = keep.iter().find(|&&p| p >= n) {
        return Err(format!("keep index {bad} out of range for n = {n}"));
    }
    Ok(SubsetMask::from_bits(
        keep.iter().fold(0u32, |acc, &p| acc | (1 << p)),
    ))
}

fn write_response<W: Write>(writer: &mut W, resp: &Response) -> io::Result<()> {
    serde_json::to_writer(&mut *writer, resp)?;
    writer.write_all(b"\n")?;
    writer.flush()
}
