//! Line-delimited JSON protocol (v1) for driving a pursuer team from an
//! external process, e.g. a trained policy server.
//!
//! Transport is a local TCP stream (`tcp://host:port`) or a child process
//! speaking over stdin/stdout (`stdio:<command> [args...]`). Each message
//! is one JSON object per line:
//!
//! - handshake: `{"type":"hello","version":1,"n_agents":N,"grid":{"v_d":..,"h_d":..}}`,
//!   answered by an identical `hello` from the server;
//! - request:  `{"type":"obs","agent_id":i,"tick":t,"psto":{...},"proprio":[12],"reward":{...},"outcome":...}`;
//! - reply:    `{"type":"act","agent_id":i,"tick":t,"cmd":[vx,vy]}`.
//!
//! The observation tensor travels either inline as base64 `f32` bytes or as
//! a length-prefixed binary frame (`u32` little-endian length + payload)
//! immediately following the JSON line. The framed mode is the bit-exact
//! one. A reply must arrive within the configured deadline; violations are
//! reported as bridge faults, never as task outcomes.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants;
use crate::psto::PstoTensor;
use crate::rewards::RewardBreakdown;
use crate::sim::Outcome;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("bridge i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("no reply within {deadline_ms} ms")]
    Timeout { deadline_ms: u64 },
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("protocol version mismatch: ours {ours}, peer {peer}")]
    VersionMismatch { ours: u32, peer: u32 },
    #[error("peer closed the connection")]
    Closed,
    #[error("bad endpoint '{0}' (expected tcp://host:port or stdio:<command>)")]
    BadEndpoint(String),
    #[error("reply does not match request: expected agent {agent} tick {tick}, got {got}")]
    ReplyMismatch { agent: usize, tick: u64, got: String },
}

/// Grid shape advertised during the handshake.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridShape {
    pub v_d: usize,
    pub h_d: usize,
}

/// Tensor payload descriptor inside an `obs` message. Exactly one of
/// `data` (base64 f32le) or `frame_bytes` (length of the binary frame that
/// follows the line) is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PstoPayload {
    /// `[channels, rows, cols]`.
    pub shape: [usize; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_bytes: Option<usize>,
}

/// One protocol message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BridgeMessage {
    Hello {
        version: u32,
        n_agents: usize,
        grid: GridShape,
    },
    Obs {
        agent_id: usize,
        tick: u64,
        psto: PstoPayload,
        proprio: Vec<f64>,
        reward: RewardBreakdown,
        outcome: Outcome,
    },
    Act {
        agent_id: usize,
        tick: u64,
        cmd: [f64; 2],
    },
}

/// How the tensor bytes travel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadMode {
    Base64,
    Framed,
}

/// One observation to ship across the bridge.
pub struct ObsFrame<'a> {
    pub agent_id: usize,
    pub tick: u64,
    pub psto: &'a PstoTensor,
    pub proprio: Vec<f64>,
    pub reward: RewardBreakdown,
    pub outcome: Outcome,
}

fn parse_message(line: &str) -> Result<BridgeMessage, BridgeError> {
    serde_json::from_str(line).map_err(|e| BridgeError::Malformed(format!("{e}: {line}")))
}

/// Client side of the bridge, owned by one episode loop.
pub struct BridgeClient {
    writer: Box<dyn Write + Send>,
    lines: mpsc::Receiver<std::io::Result<String>>,
    deadline: Duration,
    mode: PayloadMode,
    handshaken: bool,
    child: Option<Child>,
}

impl BridgeClient {
    /// Connect to `endpoint`: `tcp://host:port` or `stdio:<command ...>`.
    pub fn connect(endpoint: &str, deadline: Duration, mode: PayloadMode) -> Result<Self, BridgeError> {
        if let Some(addr) = endpoint.strip_prefix("tcp://") {
            let stream = TcpStream::connect(addr)?;
            stream.set_nodelay(true)?;
            let reader = stream.try_clone()?;
            Ok(Self::from_parts(Box::new(stream), Box::new(reader), deadline, mode, None))
        } else if let Some(cmdline) = endpoint.strip_prefix("stdio:") {
            let mut parts = cmdline.split_whitespace();
            let program = parts
                .next()
                .ok_or_else(|| BridgeError::BadEndpoint(endpoint.to_string()))?;
            let mut child = Command::new(program)
                .args(parts)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .spawn()?;
            let stdin = child.stdin.take().expect("piped stdin");
            let stdout = child.stdout.take().expect("piped stdout");
            Ok(Self::from_parts(
                Box::new(stdin),
                Box::new(stdout),
                deadline,
                mode,
                Some(child),
            ))
        } else {
            Err(BridgeError::BadEndpoint(endpoint.to_string()))
        }
    }

    fn from_parts(
        writer: Box<dyn Write + Send>,
        reader: Box<dyn Read + Send>,
        deadline: Duration,
        mode: PayloadMode,
        child: Option<Child>,
    ) -> Self {
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let mut buf = BufReader::new(reader);
            loop {
                let mut line = String::new();
                match buf.read_line(&mut line) {
                    Ok(0) => break,
                    Ok(_) => {
                        if tx.send(Ok(line)).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });
        Self {
            writer,
            lines: rx,
            deadline,
            mode,
            handshaken: false,
            child,
        }
    }

    pub fn default_deadline() -> Duration {
        Duration::from_millis(constants::BRIDGE_DEADLINE_MS)
    }

    pub fn is_handshaken(&self) -> bool {
        self.handshaken
    }

    fn next_message(&mut self) -> Result<BridgeMessage, BridgeError> {
        match self.lines.recv_timeout(self.deadline) {
            Ok(Ok(line)) => parse_message(line.trim_end()),
            Ok(Err(e)) => Err(BridgeError::Io(e)),
            Err(mpsc::RecvTimeoutError::Timeout) => Err(BridgeError::Timeout {
                deadline_ms: self.deadline.as_millis() as u64,
            }),
            Err(mpsc::RecvTimeoutError::Disconnected) => Err(BridgeError::Closed),
        }
    }

    /// Exchange `hello` messages. The peer must answer with the same
    /// protocol version.
    pub fn handshake(&mut self, n_agents: usize, grid: GridShape) -> Result<(), BridgeError> {
        let hello = BridgeMessage::Hello {
            version: PROTOCOL_VERSION,
            n_agents,
            grid,
        };
        let mut line = serde_json::to_string(&hello).expect("serializable message");
        line.push('\n');
        self.writer.write_all(line.as_bytes())?;
        self.writer.flush()?;
        match self.next_message()? {
            BridgeMessage::Hello { version, .. } if version == PROTOCOL_VERSION => {
                self.handshaken = true;
                Ok(())
            }
            BridgeMessage::Hello { version, .. } => Err(BridgeError::VersionMismatch {
                ours: PROTOCOL_VERSION,
                peer: version,
            }),
            other => Err(BridgeError::Malformed(format!(
                "expected hello, got {other:?}"
            ))),
        }
    }

    /// Ship one observation and await the matching command.
    pub fn request_command(&mut self, obs: ObsFrame) -> Result<[f64; 2], BridgeError> {
        let bytes = obs.psto.to_f32_bytes();
        let (channels, rows, cols) = obs.psto.shape();
        let payload = match self.mode {
            PayloadMode::Base64 => PstoPayload {
                shape: [channels, rows, cols],
                data: Some(BASE64.encode(&bytes)),
                frame_bytes: None,
            },
            PayloadMode::Framed => PstoPayload {
                shape: [channels, rows, cols],
                data: None,
                frame_bytes: Some(bytes.len()),
            },
        };
        let msg = BridgeMessage::Obs {
            agent_id: obs.agent_id,
            tick: obs.tick,
            psto: payload,
            proprio: obs.proprio,
            reward: obs.reward,
            outcome: obs.outcome,
        };
        let mut line = serde_json::to_string(&msg).expect("serializable message");
        line.push('\n');
        self.writer.write_all(line.as_bytes())?;
        if self.mode == PayloadMode::Framed {
            self.writer.write_all(&(bytes.len() as u32).to_le_bytes())?;
            self.writer.write_all(&bytes)?;
        }
        self.writer.flush()?;

        match self.next_message()? {
            BridgeMessage::Act { agent_id, tick, cmd }
                if agent_id == obs.agent_id && tick == obs.tick =>
            {
                if !cmd[0].is_finite() || !cmd[1].is_finite() {
                    return Err(BridgeError::Malformed("non-finite command".into()));
                }
                Ok(cmd)
            }
            BridgeMessage::Act { agent_id, tick, .. } => Err(BridgeError::ReplyMismatch {
                agent: obs.agent_id,
                tick: obs.tick,
                got: format!("agent {agent_id} tick {tick}"),
            }),
            other => Err(BridgeError::Malformed(format!("expected act, got {other:?}"))),
        }
    }
}

impl Drop for BridgeClient {
    fn drop(&mut self) {
        if let Some(child) = self.child.as_mut() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// Reference server side of the protocol, for tests and as a template for
/// real policy servers.
pub mod server {
    use super::*;
    use std::net::TcpListener;
    use std::sync::{Arc, Mutex};

    /// An observation as decoded by the server, tensor bytes included.
    #[derive(Debug, Clone)]
    pub struct ReceivedObs {
        pub agent_id: usize,
        pub tick: u64,
        pub shape: [usize; 3],
        pub psto_bytes: Vec<u8>,
        pub proprio: Vec<f64>,
        pub reward: RewardBreakdown,
        pub outcome: Outcome,
    }

    /// Handle to a running reference server.
    pub struct ReferenceServer {
        pub addr: std::net::SocketAddr,
        /// Every observation received so far.
        pub received: Arc<Mutex<Vec<ReceivedObs>>>,
    }

    /// Spawn a single-connection policy server on an ephemeral local port.
    /// `policy` maps each received observation to a command; `reply_delay`
    /// is injected before each reply (deadline tests).
    pub fn spawn_reference_server<F>(
        policy: F,
        reply_delay: Duration,
    ) -> std::io::Result<ReferenceServer>
    where
        F: Fn(&ReceivedObs) -> [f64; 2] + Send + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let received = Arc::new(Mutex::new(Vec::new()));
        let sink = Arc::clone(&received);

        std::thread::spawn(move || {
            let Ok((stream, _)) = listener.accept() else {
                return;
            };
            let _ = serve_connection(stream, &policy, reply_delay, &sink);
        });
        Ok(ReferenceServer { addr, received })
    }

    fn serve_connection<F>(
        stream: TcpStream,
        policy: &F,
        reply_delay: Duration,
        sink: &Arc<Mutex<Vec<ReceivedObs>>>,
    ) -> Result<(), BridgeError>
    where
        F: Fn(&ReceivedObs) -> [f64; 2],
    {
        stream.set_nodelay(true)?;
        let mut writer = stream.try_clone()?;
        let mut reader = BufReader::new(stream);
        loop {
            let mut line = String::new();
            if reader.read_line(&mut line)? == 0 {
                return Ok(());
            }
            match parse_message(line.trim_end())? {
                BridgeMessage::Hello { version, n_agents, grid } => {
                    let reply = BridgeMessage::Hello {
                        version,
                        n_agents,
                        grid,
                    };
                    let mut out = serde_json::to_string(&reply).expect("serializable");
                    out.push('\n');
                    writer.write_all(out.as_bytes())?;
                    writer.flush()?;
                }
                BridgeMessage::Obs {
                    agent_id,
                    tick,
                    psto,
                    proprio,
                    reward,
                    outcome,
                } => {
                    let bytes = match (&psto.data, psto.frame_bytes) {
                        (Some(b64), None) => BASE64
                            .decode(b64)
                            .map_err(|e| BridgeError::Malformed(e.to_string()))?,
                        (None, Some(len)) => {
                            let mut prefix = [0u8; 4];
                            reader.read_exact(&mut prefix)?;
                            let framed = u32::from_le_bytes(prefix) as usize;
                            if framed != len {
                                return Err(BridgeError::Malformed(format!(
                                    "frame length {framed} != announced {len}"
                                )));
                            }
                            let mut buf = vec![0u8; len];
                            reader.read_exact(&mut buf)?;
                            buf
                        }
                        _ => {
                            return Err(BridgeError::Malformed(
                                "payload must carry exactly one of data/frame_bytes".into(),
                            ))
                        }
                    };
                    let obs = ReceivedObs {
                        agent_id,
                        tick,
                        shape: psto.shape,
                        psto_bytes: bytes,
                        proprio,
                        reward,
                        outcome,
                    };
                    let cmd = policy(&obs);
                    sink.lock().expect("server sink").push(obs);
                    if !reply_delay.is_zero() {
                        std::thread::sleep(reply_delay);
                    }
                    let reply = BridgeMessage::Act {
                        agent_id,
                        tick,
                        cmd,
                    };
                    let mut out = serde_json::to_string(&reply).expect("serializable");
                    out.push('\n');
                    writer.write_all(out.as_bytes())?;
                    writer.flush()?;
                }
                BridgeMessage::Act { .. } => {
                    return Err(BridgeError::Malformed("unexpected act from client".into()))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::server::spawn_reference_server;
    use super::*;
    use crate::psto::Grid;

    fn sample_tensor() -> PstoTensor {
        let mut lidar = Grid::zeros(6, 120);
        let mut intent = Grid::zeros(6, 120);
        lidar.set(2, 60, 8.0);
        lidar.set(0, 0, 1.0);
        intent.set(2, 60, 0.45);
        intent.set(3, 90, -0.3);
        PstoTensor { lidar, intent }
    }

    fn obs_frame(tensor: &PstoTensor) -> ObsFrame<'_> {
        ObsFrame {
            agent_id: 0,
            tick: 42,
            psto: tensor,
            proprio: vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            reward: RewardBreakdown::default(),
            outcome: Outcome::Running,
        }
    }

    #[test]
    fn handshake_and_round_trip_framed() {
        let server = spawn_reference_server(|_| [0.1, -0.2], Duration::ZERO).unwrap();
        let endpoint = format!("tcp://{}", server.addr);
        let mut client =
            BridgeClient::connect(&endpoint, Duration::from_millis(2000), PayloadMode::Framed)
                .unwrap();
        client.handshake(2, GridShape { v_d: 6, h_d: 120 }).unwrap();
        assert!(client.is_handshaken());

        let tensor = sample_tensor();
        let cmd = client.request_command(obs_frame(&tensor)).unwrap();
        assert_eq!(cmd, [0.1, -0.2]);

        let received = server.received.lock().unwrap();
        assert_eq!(received.len(), 1);
        assert_eq!(received[0].shape, [2, 6, 120]);
        assert_eq!(received[0].psto_bytes, tensor.to_f32_bytes());
    }

    #[test]
    fn base64_payload_round_trip() {
        let server = spawn_reference_server(|_| [0.0, 0.0], Duration::ZERO).unwrap();
        let endpoint = format!("tcp://{}", server.addr);
        let mut client =
            BridgeClient::connect(&endpoint, Duration::from_millis(2000), PayloadMode::Base64)
                .unwrap();
        client.handshake(1, GridShape { v_d: 6, h_d: 120 }).unwrap();
        let tensor = sample_tensor();
        client.request_command(obs_frame(&tensor)).unwrap();
        let received = server.received.lock().unwrap();
        assert_eq!(received[0].psto_bytes, tensor.to_f32_bytes());
    }

    #[test]
    fn late_reply_is_a_timeout_fault() {
        let server = spawn_reference_server(|_| [0.0, 0.0], Duration::from_millis(300)).unwrap();
        let endpoint = format!("tcp://{}", server.addr);
        let mut client =
            BridgeClient::connect(&endpoint, Duration::from_millis(30), PayloadMode::Framed)
                .unwrap();
        // Handshake replies are immediate; only obs replies are delayed.
        client.handshake(1, GridShape { v_d: 6, h_d: 120 }).unwrap();
        let tensor = sample_tensor();
        let err = client.request_command(obs_frame(&tensor)).unwrap_err();
        assert!(matches!(err, BridgeError::Timeout { deadline_ms: 30 }));
    }

    #[test]
    fn stdio_echo_peer_handshakes_then_fails_malformed() {
        // `cat` echoes our own lines back: the hello echo is a valid
        // handshake, while an obs echoed in place of an act is malformed.
        let mut client = BridgeClient::connect(
            "stdio:/bin/cat",
            Duration::from_millis(2000),
            PayloadMode::Base64,
        )
        .unwrap();
        client.handshake(1, GridShape { v_d: 6, h_d: 120 }).unwrap();
        let tensor = sample_tensor();
        let err = client.request_command(obs_frame(&tensor)).unwrap_err();
        assert!(matches!(err, BridgeError::Malformed(_)));
    }

    #[test]
    fn bad_endpoint_is_rejected() {
        match BridgeClient::connect("udp://nowhere", Duration::ZERO, PayloadMode::Framed) {
            Err(BridgeError::BadEndpoint(_)) => {}
            Err(other) => panic!("unexpected error: {other}"),
            Ok(_) => panic!("bad endpoint accepted"),
        }
    }

    #[test]
    fn message_json_shape_is_stable() {
        let msg = BridgeMessage::Act {
            agent_id: 1,
            tick: 7,
            cmd: [0.5, -0.5],
        };
        let text = serde_json::to_string(&msg).unwrap();
        assert_eq!(
            text,
            "{\"type\":\"act\",\"agent_id\":1,\"tick\":7,\"cmd\":[0.5,-0.5]}"
        );
        let hello = BridgeMessage::Hello {
            version: 1,
            n_agents: 2,
            grid: GridShape { v_d: 6, h_d: 120 },
        };
        let text = serde_json::to_string(&hello).unwrap();
        assert!(text.contains("\"type\":\"hello\"") && text.contains("\"version\":1"));
    }
}
