//! Newline-delimited JSON protocol between terminals and the bank.
//!
//! ```text
//! -> {"type":"challenge_request","serial":"000017"}
//! <- {"type":"challenge","serial":"000017","bases":["Z","X",...]}
//! -> {"type":"response","serial":"000017","outcomes":[[0,1],[null,0],...]}
//! <- {"type":"verdict","accepted":true,"error_rate":0.05,"loss_rate":0.0,"checked":38}
//! ```
//!
//! Anything the bank cannot act on is answered with
//! `{"type":"error","message":...}` and the connection stays open.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::{Arc, Mutex};
use std::thread;

use serde::{Deserialize, Serialize};

use crate::bank::{Bank, Challenge, QubitReport, Response, Verdict};
use crate::error::{Error, Result};
use crate::qstate::Basis;
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    ChallengeRequest {
        serial: String,
    },
    Response {
        serial: String,
        outcomes: Vec<[QubitReport; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Challenge {
        serial: String,
        bases: Vec<Basis>,
    },
    Verdict {
        accepted: bool,
        error_rate: f64,
        loss_rate: f64,
        checked: usize,
    },
    Error {
        message: String,
    },
}

impl From<Verdict> for ServerMessage {
    fn from(v: Verdict) -> Self {
        ServerMessage::Verdict {
            accepted: v.accepted,
            error_rate: v.error_rate,
            loss_rate: v.loss_rate,
            checked: v.checked_qubits,
        }
    }
}

/// Shared bank state. Ledger writes go through the single bank mutex.
pub struct BankService {
    bank: Mutex<Bank>,
    rng: Mutex<SimRng>,
}

impl BankService {
    pub fn new(bank: Bank, rng: SimRng) -> Arc<BankService> {
        Arc::new(BankService {
            bank: Mutex::new(bank),
            rng: Mutex::new(rng),
        })
    }

    pub fn with_bank<T>(&self, f: impl FnOnce(&mut Bank) -> T) -> T {
        f(&mut self.bank.lock().expect("bank lock poisoned"))
    }

    pub fn session(self: &Arc<Self>) -> Session {
        Session {
            service: Arc::clone(self),
            pending: HashMap::new(),
        }
    }
}

/// One connection's view: challenges it has been sent and not yet answered.
pub struct Session {
    service: Arc<BankService>,
    pending: HashMap<String, Challenge>,
}

impl Session {
    pub fn handle(&mut self, msg: ClientMessage) -> Result<ServerMessage> {
        match msg {
            ClientMessage::ChallengeRequest { serial } => {
                let challenge = {
                    let bank = self.service.bank.lock().expect("bank lock poisoned");
                    let mut rng = self.service.rng.lock().expect("rng lock poisoned");
                    bank.challenge(&serial, &mut *rng)?
                };
                let reply = ServerMessage::Challenge {
                    serial: serial.clone(),
                    bases: challenge.bases.clone(),
                };
                self.pending.insert(serial, challenge);
                Ok(reply)
            }
            ClientMessage::Response { serial, outcomes } => {
                let challenge = self.pending.remove(&serial).ok_or_else(|| {
                    Error::Protocol(format!("no outstanding challenge for serial {serial:?}"))
                })?;
                let response = Response { serial, outcomes };
                let verdict = self
                    .service
                    .with_bank(|b| b.verify(&challenge, &response))?;
                Ok(verdict.into())
            }
        }
    }

    /// Parses one request line and always produces a reply.
    pub fn handle_line(&mut self, line: &str) -> ServerMessage {
        let parsed: std::result::Result<ClientMessage, _> = serde_json::from_str(line);
        match parsed {
            Ok(msg) => self.handle(msg).unwrap_or_else(|e| ServerMessage::Error {
                message: e.to_string(),
            }),
            Err(e) => ServerMessage::Error {
                message: format!("malformed request: {e}"),
            },
        }
    }
}

fn serve_connection(service: Arc<BankService>, stream: TcpStream) -> Result<()> {
    let reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    let mut session = service.session();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = session.handle_line(&line);
        writeln!(writer, "{}", serde_json::to_string(&reply)?)?;
        writer.flush()?;
    }
    Ok(())
}

/// Accepts connections until `max_connections` have been served (forever
/// when `None`). Each connection runs on its own thread.
pub fn serve(
    listener: TcpListener,
    service: Arc<BankService>,
    max_connections: Option<usize>,
) -> Result<()> {
    let mut handles = Vec::new();
    for (n, stream) in listener.incoming().enumerate() {
        let stream = stream?;
        let svc = Arc::clone(&service);
        handles.push(thread::spawn(move || {
            if let Err(e) = serve_connection(svc, stream) {
                log::warn!("connection closed with error: {e}");
            }
        }));
        if max_connections.is_some_and(|m| n + 1 >= m) {
            break;
        }
    }
    for h in handles {
        let _ = h.join();
    }
    Ok(())
}

/// Terminal side of a connection.
pub struct BankClient {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl BankClient {
    pub fn connect(addr: impl ToSocketAddrs) -> Result<BankClient> {
        let stream = TcpStream::connect(addr)?;
        Ok(BankClient {
            reader: BufReader::new(stream.try_clone()?),
            writer: BufWriter::new(stream),
        })
    }

    pub fn send_raw(&mut self, line: &str) -> Result<ServerMessage> {
        writeln!(self.writer, "{line}")?;
        self.writer.flush()?;
        let mut reply = String::new();
        if self.reader.read_line(&mut reply)? == 0 {
            return Err(Error::Protocol("bank closed the connection".into()));
        }
        Ok(serde_json::from_str(&reply)?)
    }

    pub fn send(&mut self, msg: &ClientMessage) -> Result<ServerMessage> {
        self.send_raw(&serde_json::to_string(msg)?)
    }

    pub fn request_challenge(&mut self, serial: &str) -> Result<Challenge> {
        match self.send(&ClientMessage::ChallengeRequest {
            serial: serial.to_owned(),
        })? {
            ServerMessage::Challenge { serial, bases } => Ok(Challenge { serial, bases }),
            ServerMessage::Error { message } => Err(Error::Protocol(message)),
            other => Err(Error::Protocol(format!(
                "expected challenge, got {other:?}"
            ))),
        }
    }

    pub fn submit(&mut self, response: &Response) -> Result<Verdict> {
        match self.send(&ClientMessage::Response {
            serial: response.serial.clone(),
            outcomes: response.outcomes.clone(),
        })? {
            ServerMessage::Verdict {
                accepted,
                error_rate,
                loss_rate,
                checked,
            } => Ok(Verdict {
                accepted,
                error_rate,
                loss_rate,
                checked_qubits: checked,
            }),
            ServerMessage::Error { message } => Err(Error::Protocol(message)),
            other => Err(Error::Protocol(format!("expected verdict, got {other:?}"))),
        }
    }
}
