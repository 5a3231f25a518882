//! MQTT client against a minimal in-test broker (3.1.1, QoS 0/1, no retain).

use std::io::{self, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use oda_core::telemetry::{MetricSample, Plugin, TopicPath};
use oda_transport::{topic_matches, MqttConfig, MqttLink, Transport, TransportError};

type Clients = Arc<Mutex<Vec<(Arc<Mutex<TcpStream>>, Vec<String>)>>>;

fn read_packet(s: &mut TcpStream) -> io::Result<(u8, Vec<u8>)> {
    let mut h = [0u8];
    s.read_exact(&mut h)?;
    let (mut len, mut mult) = (0usize, 1usize);
    loop {
        let mut b = [0u8];
        s.read_exact(&mut b)?;
        len += (b[0] & 0x7f) as usize * mult;
        mult *= 128;
        if b[0] & 0x80 == 0 {
            break;
        }
    }
    let mut body = vec![0u8; len];
    s.read_exact(&mut body)?;
    Ok((h[0], body))
}

fn packet(header: u8, body: &[u8]) -> Vec<u8> {
    let mut out = vec![header];
    let mut len = body.len();
    loop {
        let mut b = (len % 128) as u8;
        len /= 128;
        if len > 0 {
            b |= 0x80;
        }
        out.push(b);
        if len == 0 {
            break;
        }
    }
    out.extend_from_slice(body);
    out
}

fn utf8(body: &[u8], at: usize) -> (String, usize) {
    let n = u16::from_be_bytes([body[at], body[at + 1]]) as usize;
    (String::from_utf8(body[at + 2..at + 2 + n].to_vec()).unwrap(), at + 2 + n)
}

fn serve_client(stream: TcpStream, clients: Clients, idx: usize) -> io::Result<()> {
    let mut reader = stream.try_clone()?;
    let writer = clients.lock().unwrap()[idx].0.clone();
    let send = |bytes: Vec<u8>| writer.lock().unwrap().write_all(&bytes);
    loop {
        let (h, body) = read_packet(&mut reader)?;
        match h >> 4 {
            1 => send(packet(0x20, &[0, 0]))?,
            3 => {
                let qos = (h >> 1) & 3;
                let (topic, mut at) = utf8(&body, 0);
                if qos > 0 {
                    send(packet(0x40, &body[at..at + 2]))?;
                    at += 2;
                }
                let payload = &body[at..];
                let mut fwd = Vec::new();
                fwd.extend_from_slice(&(topic.len() as u16).to_be_bytes());
                fwd.extend_from_slice(topic.as_bytes());
                fwd.extend_from_slice(payload);
                let out = packet(0x30, &fwd);
                let targets: Vec<_> = clients
                    .lock()
                    .unwrap()
                    .iter()
                    .filter(|(_, subs)| subs.iter().any(|f| topic_matches(f, &topic)))
                    .map(|(w, _)| w.clone())
                    .collect();
                for w in targets {
                    let _ = w.lock().unwrap().write_all(&out);
                }
            }
            8 => {
                let mut at = 2;
                let mut granted = Vec::new();
                while at < body.len() {
                    let (f, next) = utf8(&body, at);
                    clients.lock().unwrap()[idx].1.push(f);
                    granted.push(1u8);
                    at = next + 1;
                }
                let mut ack = body[0..2].to_vec();
                ack.extend(granted);
                send(packet(0x90, &ack))?;
            }
            12 => send(packet(0xd0, &[]))?,
            14 => return Ok(()),
            _ => {}
        }
    }
}

fn start_broker() -> u16 {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    let clients: Clients = Arc::new(Mutex::new(Vec::new()));
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            let writer = Arc::new(Mutex::new(stream.try_clone().unwrap()));
            let idx = {
                let mut c = clients.lock().unwrap();
                c.push((writer, Vec::new()));
                c.len() - 1
            };
            let clients = clients.clone();
            thread::spawn(move || {
                let _ = serve_client(stream, clients, idx);
            });
        }
    });
    port
}

fn config(port: u16, id: &str) -> MqttConfig {
    MqttConfig { host: "127.0.0.1".into(), port, client_id: id.into(), ..Default::default() }
}

#[test]
fn publish_reaches_subscriber_with_identical_strings() {
    let port = start_broker();
    let (sub, frames) = MqttLink::connect(&config(port, "ingest"));
    assert!(sub.wait_connected(Duration::from_secs(5)));
    sub.subscribe("org/+/cluster/+/node/+/plugin/+/chnl/data/#").unwrap();
    let (publisher, _) = MqttLink::connect(&config(port, "agent"));
    assert!(publisher.wait_connected(Duration::from_secs(5)));
    // Give the SUBSCRIBE a moment to land before publishing.
    thread::sleep(Duration::from_millis(200));

    let topic = TopicPath::new("unibo", "montecimone", "mc02", Plugin::PmuPub, Some(3), "instret").unwrap();
    let mut sent = Vec::new();
    for k in 0..50 {
        let s = MetricSample::new(topic.clone(), 1000.0 * k as f64, 1_650_000_000.0 + 0.5 * k as f64).unwrap();
        publisher.publish(&s).unwrap();
        sent.push(s.to_frame());
    }
    let got: Vec<_> = (0..50).map(|_| frames.recv_timeout(Duration::from_secs(5)).unwrap()).collect();
    assert_eq!(got, sent);
}

#[test]
fn unreachable_broker_is_transport_down() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let (link, _) = MqttLink::connect(&config(port, "lonely"));
    let topic = TopicPath::new("a", "b", "c", Plugin::StatsPub, None, "load_avg.1m").unwrap();
    let s = MetricSample::new(topic, 0.5, 1.0).unwrap();
    assert!(matches!(link.publish(&s), Err(TransportError::TransportDown(_))));
}

#[test]
fn endpoint_parsing() {
    let c = MqttConfig::from_endpoint("broker.local:1884", "x").unwrap();
    assert_eq!((c.host.as_str(), c.port), ("broker.local", 1884));
    assert_eq!(MqttConfig::from_endpoint("broker.local", "x").unwrap().port, 1883);
    assert!(MqttConfig::from_endpoint("h:notaport", "x").is_err());
}
