//! Worker-device channel. The physical buzzer is out of reach; the channel
//! carries one text line per warning, to stdout or as one UDP datagram.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, Write};
use std::net::UdpSocket;
use std::str::FromStr;

use log::warn;

use crate::detection_io::Camera;

use super::WarningEvent;

pub trait DeviceChannel {
    /// Sends one message. `message` carries its trailing newline.
    fn send(&mut self, message: &str) -> io::Result<()>;
}

/// Writes messages to any `Write`, flushing after each one.
pub struct WriterDevice<W> {
    inner: W,
}

impl<W: Write> WriterDevice<W> {
    pub fn new(inner: W) -> Self {
        Self { inner }
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}

impl<W: Write> DeviceChannel for WriterDevice<W> {
    fn send(&mut self, message: &str) -> io::Result<()> {
        self.inner.write_all(message.as_bytes())?;
        self.inner.flush()
    }
}

/// One datagram per warning.
pub struct UdpDevice {
    socket: UdpSocket,
}

impl UdpDevice {
    pub fn connect(host: &str, port: u16) -> io::Result<Self> {
        let socket = UdpSocket::bind(("0.0.0.0", 0))?;
        socket.connect((host, port))?;
        Ok(Self { socket })
    }
}

impl DeviceChannel for UdpDevice {
    fn send(&mut self, message: &str) -> io::Result<()> {
        let n = self.socket.send(message.as_bytes())?;
        if n != message.len() {
            return Err(io::Error::new(io::ErrorKind::WriteZero, "short datagram"));
        }
        Ok(())
    }
}

/// Where warnings go: `stdout` or `udp:<host>:<port>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeviceSpec {
    Stdout,
    Udp { host: String, port: u16 },
}

impl FromStr for DeviceSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "stdout" {
            return Ok(DeviceSpec::Stdout);
        }
        let rest = s
            .strip_prefix("udp:")
            .ok_or_else(|| format!("device must be `stdout` or `udp:<host>:<port>`, got `{s}`"))?;
        let (host, port) = rest
            .rsplit_once(':')
            .ok_or_else(|| format!("missing port in `{s}`"))?;
        if host.is_empty() {
            return Err(format!("missing host in `{s}`"));
        }
        let port = port.parse().map_err(|_| format!("bad port `{port}`"))?;
        Ok(DeviceSpec::Udp {
            host: host.to_string(),
            port,
        })
    }
}

impl fmt::Display for DeviceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeviceSpec::Stdout => f.write_str("stdout"),
            DeviceSpec::Udp { host, port } => write!(f, "udp:{host}:{port}"),
        }
    }
}

impl DeviceSpec {
    pub fn open(&self) -> io::Result<Box<dyn DeviceChannel + Send>> {
        Ok(match self {
            DeviceSpec::Stdout => Box::new(WriterDevice::new(io::stdout())),
            DeviceSpec::Udp { host, port } => Box::new(UdpDevice::connect(host, *port)?),
        })
    }
}

/// Best-effort warning delivery. Failures are counted, never fatal, and the
/// same warning is never sent twice.
pub struct WarningEmitter {
    channel: Box<dyn DeviceChannel + Send>,
    seen: HashSet<(u64, Camera, u64)>,
    sent: u64,
    failed: u64,
}

impl WarningEmitter {
    pub fn new(channel: Box<dyn DeviceChannel + Send>) -> Self {
        Self {
            channel,
            seen: HashSet::new(),
            sent: 0,
            failed: 0,
        }
    }

    /// Returns whether a message went out for this call.
    pub fn emit(&mut self, warning: &WarningEvent) -> bool {
        let key = (
            warning.timestamp.to_bits(),
            warning.camera,
            warning.track_id,
        );
        if !self.seen.insert(key) {
            return false;
        }
        match self.channel.send(&format!("{warning}\n")) {
            Ok(()) => {
                self.sent += 1;
                true
            }
            Err(e) => {
                warn!("warning delivery failed: {e}");
                self.failed += 1;
                false
            }
        }
    }

    pub fn sent(&self) -> u64 {
        self.sent
    }

    pub fn failed(&self) -> u64 {
        self.failed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::{Arc, Mutex};

    #[derive(Clone, Default)]
    struct Shared(Arc<Mutex<Vec<u8>>>);

    impl Write for Shared {
        fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
            self.0.lock().unwrap().extend_from_slice(buf);
            Ok(buf.len())
        }
        fn flush(&mut self) -> io::Result<()> {
            Ok(())
        }
    }

    /// Fails the first `fail` sends, then records.
    struct Flaky {
        fail: usize,
        got: Arc<Mutex<Vec<String>>>,
    }

    impl DeviceChannel for Flaky {
        fn send(&mut self, message: &str) -> io::Result<()> {
            if self.fail > 0 {
                self.fail -= 1;
                return Err(io::Error::new(io::ErrorKind::BrokenPipe, "closed"));
            }
            self.got.lock().unwrap().push(message.to_string());
            Ok(())
        }
    }

    fn warning(t: f64, track: u64) -> WarningEvent {
        WarningEvent {
            timestamp: t,
            track_id: track,
            camera: Camera::Rear,
            gap: 15.0,
        }
    }

    #[test]
    fn one_line_per_warning_in_order() {
        let buf = Shared::default();
        let mut em = WarningEmitter::new(Box::new(WriterDevice::new(buf.clone())));
        assert!(em.emit(&warning(15.0, 7)));
        assert!(em.emit(&warning(31.5, 9)));
        let text = String::from_utf8(buf.0.lock().unwrap().clone()).unwrap();
        assert_eq!(
            text,
            "WARN t=15.000 cam=rear track=7 gap=15.0\nWARN t=31.500 cam=rear track=9 gap=15.0\n"
        );
        assert_eq!(em.sent(), 2);
    }

    #[test]
    fn repeated_event_is_sent_once() {
        let buf = Shared::default();
        let mut em = WarningEmitter::new(Box::new(WriterDevice::new(buf.clone())));
        assert!(em.emit(&warning(15.0, 7)));
        assert!(!em.emit(&warning(15.0, 7)));
        assert_eq!(
            buf.0
                .lock()
                .unwrap()
                .iter()
                .filter(|b| **b == b'\n')
                .count(),
            1
        );
    }

    #[test]
    fn failures_are_counted_and_delivery_continues() {
        let got = Arc::new(Mutex::new(Vec::new()));
        let mut em = WarningEmitter::new(Box::new(Flaky {
            fail: 1,
            got: got.clone(),
        }));
        assert!(!em.emit(&warning(15.0, 1)));
        assert!(em.emit(&warning(30.0, 2)));
        assert_eq!((em.sent(), em.failed()), (1, 1));
        assert_eq!(got.lock().unwrap().len(), 1);
    }

    #[test]
    fn udp_datagram_per_warning() {
        let rx = UdpSocket::bind("127.0.0.1:0").unwrap();
        rx.set_read_timeout(Some(std::time::Duration::from_secs(2)))
            .unwrap();
        let port = rx.local_addr().unwrap().port();
        let spec: DeviceSpec = format!("udp:127.0.0.1:{port}").parse().unwrap();
        let mut em = WarningEmitter::new(spec.open().unwrap());
        assert!(em.emit(&warning(15.0, 7)));
        let mut buf = [0u8; 128];
        let n = rx.recv(&mut buf).unwrap();
        assert_eq!(&buf[..n], b"WARN t=15.000 cam=rear track=7 gap=15.0\n");
    }

    #[test]
    fn device_spec_parsing() {
        assert_eq!("stdout".parse::<DeviceSpec>().unwrap(), DeviceSpec::Stdout);
        assert_eq!(
            "udp:10.0.0.2:9000".parse::<DeviceSpec>().unwrap(),
            DeviceSpec::Udp {
                host: "10.0.0.2".into(),
                port: 9000
            }
        );
        for bad in ["udp:", "udp:host", "udp::9", "udp:h:notaport", "tcp:h:1"] {
            assert!(bad.parse::<DeviceSpec>().is_err(), "{bad}");
        }
    }
}
