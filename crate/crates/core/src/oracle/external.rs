//! Line-oriented membership-query protocol.
//!
//! ```text
//! server -> client   HELLO <d> <k>\n
//! client -> server   <x0> <x1> ... <x{d-1}>\n
//! server -> client   <label>\n
//! client -> server   BYE\n            (server closes)
//! ```
//!
//! Requests and responses are strictly alternating.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::sync::Mutex;

use super::{Oracle, QueryCounter};
use crate::error::{Error, Result};

/// Parses a `HELLO <d> <k>` greeting.
pub fn parse_handshake(line: &str) -> Result<(usize, usize)> {
    let bad = |message: &str| Error::Protocol {
        message: message.to_string(),
        line: line.to_string(),
    };
    let parts: Vec<&str> = line.trim_end_matches(['\n', '\r']).split(' ').collect();
    if parts.len() != 3 || parts[0] != "HELLO" {
        return Err(bad("expected `HELLO <d> <k>`"));
    }
    let d: usize = parts[1].parse().map_err(|_| bad("d is not an integer"))?;
    let k: usize = parts[2].parse().map_err(|_| bad("k is not an integer"))?;
    if d == 0 {
        return Err(bad("d must be >= 1"));
    }
    if k == 0 {
        return Err(bad("k must be >= 1"));
    }
    Ok((d, k))
}

struct Transport {
    reader: Box<dyn BufRead + Send>,
    writer: Box<dyn Write + Send>,
    child: Option<Child>,
    closed: bool,
}

impl Transport {
    fn read_line(&mut self) -> Result<String> {
        let mut line = String::new();
        let n = self
            .reader
            .read_line(&mut line)
            .map_err(|e| Error::OracleTransport(e.to_string()))?;
        if n == 0 {
            return Err(Error::OracleTransport("connection closed".into()));
        }
        Ok(line)
    }

    fn send(&mut self, line: &str) -> Result<()> {
        self.writer
            .write_all(line.as_bytes())
            .and_then(|_| self.writer.flush())
            .map_err(|e| Error::OracleTransport(e.to_string()))
    }
}

/// Client side of the wire protocol. Queries are serialized through an
/// internal lock.
pub struct ExternalOracle {
    dim: usize,
    classes: usize,
    transport: Mutex<Transport>,
    counter: QueryCounter,
}

impl std::fmt::Debug for ExternalOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalOracle")
            .field("dim", &self.dim)
            .field("classes", &self.classes)
            .finish()
    }
}

impl ExternalOracle {
    /// Performs the handshake over an already-open stream pair.
    pub fn connect(reader: Box<dyn BufRead + Send>, writer: Box<dyn Write + Send>) -> Result<Self> {
        Self::with_child(reader, writer, None)
    }

    /// Spawns `program args...` and talks to it over stdin/stdout.
    pub fn spawn(program: &str, args: &[String]) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::OracleTransport(format!("spawning {program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        Self::with_child(
            Box::new(BufReader::new(stdout)),
            Box::new(stdin),
            Some(child),
        )
    }

    fn with_child(
        reader: Box<dyn BufRead + Send>,
        writer: Box<dyn Write + Send>,
        child: Option<Child>,
    ) -> Result<Self> {
        let mut transport = Transport {
            reader,
            writer,
            child,
            closed: false,
        };
        let greeting = transport.read_line()?;
        let (dim, classes) = parse_handshake(&greeting)?;
        Ok(Self {
            dim,
            classes,
            transport: Mutex::new(transport),
            counter: QueryCounter::default(),
        })
    }

    /// Sends `BYE` and waits for a spawned server to exit.
    pub fn close(&self) -> Result<()> {
        let mut t = self.transport.lock().expect("oracle lock poisoned");
        if t.closed {
            return Ok(());
        }
        t.closed = true;
        let sent = t.send("BYE\n");
        if let Some(mut child) = t.child.take() {
            drop(std::mem::replace(&mut t.writer, Box::new(std::io::sink())));
            child
                .wait()
                .map_err(|e| Error::OracleTransport(e.to_string()))?;
        }
        sent
    }
}

impl Drop for ExternalOracle {
    fn drop(&mut self) {
        let _ = self.close();
    }
}

impl Oracle for ExternalOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_classes(&self) -> usize {
        self.classes
    }

    fn label_of(&self, z: &[f64]) -> Result<usize> {
        if z.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: z.len(),
            });
        }
        let mut request = z
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        request.push('\n');
        let mut t = self.transport.lock().expect("oracle lock poisoned");
        if t.closed {
            return Err(Error::OracleTransport("oracle already closed".into()));
        }
        t.send(&request)?;
        let line = t.read_line()?;
        let label: usize =
            line.trim_end_matches(['\n', '\r'])
                .parse()
                .map_err(|_| Error::Protocol {
                    message: "response is not an integer label".into(),
                    line: line.clone(),
                })?;
        if label >= self.classes {
            return Err(Error::Protocol {
                message: format!("label outside [0, {})", self.classes),
                line,
            });
        }
        Ok(label)
    }

    fn counter(&self) -> &QueryCounter {
        &self.counter
    }

    fn is_serial(&self) -> bool {
        true
    }
}

/// Server side: answers queries for `oracle` until `BYE` or end of input.
/// Returns the number of queries answered.
pub fn serve<R: BufRead, W: Write>(
    oracle: &dyn Oracle,
    mut reader: R,
    mut writer: W,
) -> Result<u64> {
    writeln!(writer, "HELLO {} {}", oracle.dim(), oracle.num_classes())?;
    writer.flush()?;
    let mut answered = 0;
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        let body = line.trim_end_matches(['\n', '\r']);
        if body == "BYE" {
            break;
        }
        let coords = body
            .split(' ')
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Protocol {
                message: "request is not a list of floats".into(),
                line: line.clone(),
            })?;
        if coords.len() != oracle.dim() {
            return Err(Error::Protocol {
                message: format!("expected {} coordinates", oracle.dim()),
                line: line.clone(),
            });
        }
        let label = oracle.label_of(&coords)?;
        writeln!(writer, "{label}")?;
        writer.flush()?;
        answered += 1;
    }
    Ok(answered)
}
