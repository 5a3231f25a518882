//! Client for an external MQTT 3.1.1 broker.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use crossbeam_channel::{unbounded, Receiver, Sender};
use oda_core::telemetry::Frame;
use parking_lot::Mutex;
use rumqttc::{Client, ClientError, Event, MqttOptions, Packet, QoS};
use serde::{Deserialize, Serialize};

use crate::bus::validate_filter;
use crate::{Transport, TransportError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MqttConfig {
    pub host: String,
    pub port: u16,
    pub client_id: String,
    pub keep_alive_secs: u64,
    /// Outbound request queue inside the client.
    pub queue: usize,
}

impl Default for MqttConfig {
    fn default() -> Self {
        MqttConfig {
            host: "127.0.0.1".into(),
            port: 1883,
            client_id: format!("oda-{}", std::process::id()),
            keep_alive_secs: 30,
            queue: 4096,
        }
    }
}

impl MqttConfig {
    /// Parses `host:port` (port defaults to 1883).
    pub fn from_endpoint(endpoint: &str, client_id: &str) -> Result<Self, TransportError> {
        let (host, port) = match endpoint.rsplit_once(':') {
            Some((h, p)) => {
                let port = p.parse().map_err(|_| TransportError::TransportDown(format!("bad endpoint {endpoint:?}")))?;
                (h.to_string(), port)
            }
            None => (endpoint.to_string(), 1883),
        };
        Ok(MqttConfig { host, port, client_id: client_id.to_string(), ..Default::default() })
    }
}

struct Shared {
    connected: AtomicBool,
    stop: AtomicBool,
    filters: Mutex<Vec<String>>,
}

/// Publishes at QoS 1 and forwards inbound publishes as [`Frame`]s.
///
/// The event thread reconnects on its own; while the session is down,
/// publishes fail fast with `TransportDown` so callers can buffer.
pub struct MqttLink {
    client: Client,
    shared: Arc<Shared>,
    worker: Option<JoinHandle<()>>,
}

impl MqttLink {
    pub fn connect(config: &MqttConfig) -> (MqttLink, Receiver<Frame>) {
        let mut opts = MqttOptions::new(&config.client_id, &config.host, config.port);
        opts.set_keep_alive(Duration::from_secs(config.keep_alive_secs.max(5)));
        opts.set_max_packet_size(1 << 20, 1 << 20);
        let (client, mut connection) = Client::new(opts, config.queue.max(1));
        let shared = Arc::new(Shared {
            connected: AtomicBool::new(false),
            stop: AtomicBool::new(false),
            filters: Mutex::new(Vec::new()),
        });
        let (tx, rx): (Sender<Frame>, Receiver<Frame>) = unbounded();

        let worker = {
            let shared = shared.clone();
            let client = client.clone();
            thread::Builder::new()
                .name("mqtt-events".into())
                .spawn(move || {
                    for event in connection.iter() {
                        if shared.stop.load(Ordering::SeqCst) {
                            break;
                        }
                        match event {
                            Ok(Event::Incoming(Packet::ConnAck(_))) => {
                                shared.connected.store(true, Ordering::SeqCst);
                                for f in shared.filters.lock().iter() {
                                    if let Err(e) = client.try_subscribe(f.clone(), QoS::AtLeastOnce) {
                                        log::warn!("resubscribing {f}: {e}");
                                    }
                                }
                            }
                            Ok(Event::Incoming(Packet::Publish(p))) => {
                                let payload = String::from_utf8_lossy(&p.payload).into_owned();
                                // A dropped receiver only means nobody consumes inbound frames.
                                let _ = tx.send(Frame { topic: p.topic, payload });
                            }
                            Ok(Event::Incoming(Packet::Disconnect)) => {
                                shared.connected.store(false, Ordering::SeqCst);
                            }
                            Ok(_) => {}
                            Err(e) => {
                                if shared.connected.swap(false, Ordering::SeqCst) {
                                    log::warn!("mqtt connection lost: {e}");
                                }
                                if shared.stop.load(Ordering::SeqCst) {
                                    break;
                                }
                                thread::sleep(Duration::from_millis(200));
                            }
                        }
                    }
                })
                .expect("spawning mqtt event thread")
        };
        (MqttLink { client, shared, worker: Some(worker) }, rx)
    }

    pub fn is_connected(&self) -> bool {
        self.shared.connected.load(Ordering::SeqCst)
    }

    /// Waits up to `timeout` for the broker session.
    pub fn wait_connected(&self, timeout: Duration) -> bool {
        let deadline = std::time::Instant::now() + timeout;
        while std::time::Instant::now() < deadline {
            if self.is_connected() {
                return true;
            }
            thread::sleep(Duration::from_millis(5));
        }
        self.is_connected()
    }

    /// Subscribes now and again after every reconnect.
    pub fn subscribe(&self, filter: &str) -> Result<(), TransportError> {
        validate_filter(filter)?;
        self.shared.filters.lock().push(filter.to_string());
        self.client.try_subscribe(filter, QoS::AtLeastOnce).map_err(down)
    }

    pub fn disconnect(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        self.shared.stop.store(true, Ordering::SeqCst);
        let _ = self.client.try_disconnect();
        self.shared.connected.store(false, Ordering::SeqCst);
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

impl Drop for MqttLink {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn down(e: ClientError) -> TransportError {
    TransportError::TransportDown(e.to_string())
}

impl Transport for MqttLink {
    fn publish_frame(&self, frame: Frame) -> Result<(), TransportError> {
        if !self.is_connected() {
            return Err(TransportError::TransportDown("no broker session".into()));
        }
        self.client.try_publish(frame.topic, QoS::AtLeastOnce, false, frame.payload.into_bytes()).map_err(down)
    }
}
