//! Long-running subcommands: agent, ingest service, replay.

use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use oda_agent::{Agent, AgentConfig, AgentReport};
use oda_sim::{read_bundle, replay, ReplayReport, Speed};
use oda_transport::{ingest_loop, Bus, IngestStats, MqttConfig, MqttLink, SeriesStore, StoreConfig, Transport};

use crate::cli::{AgentRunArgs, ServeArgs, SimReplayArgs};
use crate::error::CliError;

const MQTT_CONNECT_WAIT: Duration = Duration::from_secs(5);

fn open_store(dir: Option<&Path>) -> Result<Arc<SeriesStore>, CliError> {
    Ok(Arc::new(match dir {
        Some(d) => SeriesStore::open(StoreConfig { dir: Some(d.to_path_buf()), ..Default::default() })
            .map_err(|e| CliError::config(format!("opening store {}: {e}", d.display())))?,
        None => SeriesStore::in_memory(),
    }))
}

/// A bus with an ingest thread writing into a store.
pub struct LocalIngest {
    pub bus: Bus,
    pub store: Arc<SeriesStore>,
    pub stats: Arc<IngestStats>,
    worker: Option<JoinHandle<()>>,
}

impl LocalIngest {
    pub fn start(store: Arc<SeriesStore>) -> Result<Self, CliError> {
        let bus = Bus::new();
        let sub = bus.subscribe("#")?;
        let stats = Arc::new(IngestStats::default());
        let worker = {
            let (store, stats) = (store.clone(), stats.clone());
            thread::Builder::new()
                .name("ingest".into())
                .spawn(move || ingest_loop(sub.receiver(), &store, &stats))
                .map_err(|e| CliError::config(format!("spawning ingest: {e}")))?
        };
        Ok(LocalIngest { bus, store, stats, worker: Some(worker) })
    }

    /// Drains everything published so far and flushes the store.
    pub fn finish(mut self) -> Result<oda_transport::IngestSnapshot, CliError> {
        self.bus.close();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
        self.store.flush().map_err(|e| CliError::config(format!("flushing store: {e}")))?;
        Ok(self.stats.snapshot())
    }
}

fn connect_mqtt(endpoint: &str, client_id: &str) -> Result<(MqttLink, crossbeam_channel::Receiver<oda_core::Frame>), CliError> {
    let cfg = MqttConfig::from_endpoint(endpoint, client_id)?;
    let (link, rx) = MqttLink::connect(&cfg);
    if !link.wait_connected(MQTT_CONNECT_WAIT) {
        log::warn!("broker {endpoint} not reachable yet; will keep retrying");
    }
    Ok((link, rx))
}

fn ctrl_c_flag() -> Arc<AtomicBool> {
    let flag = Arc::new(AtomicBool::new(false));
    let f = flag.clone();
    thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_current_thread().enable_all().build();
        if let Ok(rt) = rt {
            if rt.block_on(tokio::signal::ctrl_c()).is_ok() {
                f.store(true, Ordering::SeqCst);
            }
        }
    });
    flag
}

fn wait_until_stopped(stop: &AtomicBool, duration: Option<f64>) {
    let deadline = duration.map(|d| std::time::Instant::now() + Duration::from_secs_f64(d.max(0.0)));
    while !stop.load(Ordering::SeqCst) && deadline.is_none_or(|d| std::time::Instant::now() < d) {
        thread::sleep(Duration::from_millis(50));
    }
}

pub fn agent_run(args: &AgentRunArgs) -> Result<String, CliError> {
    let config = AgentConfig::load(&args.config)?;
    if let Some(d) = args.duration {
        if !(d > 0.0 && d.is_finite()) {
            return Err(CliError::config("--duration must be positive"));
        }
    }
    let agent = Agent::new(config.clone())?;
    let stop = ctrl_c_flag();
    let run = |transport: Arc<dyn Transport>| -> Result<AgentReport, CliError> {
        let handle = agent.start(transport)?;
        wait_until_stopped(&stop, args.duration);
        Ok(handle.stop())
    };
    let report = match &config.broker {
        Some(endpoint) => {
            let (link, _) = connect_mqtt(endpoint, &format!("oda-agent-{}", config.node))?;
            let link = Arc::new(link);
            let report = run(link.clone())?;
            if let Ok(link) = Arc::try_unwrap(link) {
                link.disconnect();
            }
            report
        }
        None => {
            let ingest = LocalIngest::start(open_store(args.store.as_deref())?)?;
            let report = run(Arc::new(ingest.bus.clone()))?;
            let snap = ingest.finish()?;
            log::info!("ingested {snap:?}");
            report
        }
    };
    Ok(serde_json::to_string_pretty(&report).expect("report serializes") + "\n")
}

pub fn sim_replay(args: &SimReplayArgs) -> Result<String, CliError> {
    let bundle = read_bundle(&args.bundle)?;
    let report: ReplayReport = match (&args.mqtt, &args.store) {
        (Some(endpoint), _) => {
            let (link, _) = connect_mqtt(endpoint, "oda-replay")?;
            let r = replay(&bundle, &link, args.speed);
            link.disconnect();
            r?
        }
        (None, Some(dir)) => {
            let ingest = LocalIngest::start(open_store(Some(dir))?)?;
            let r = replay(&bundle, &ingest.bus, args.speed);
            let snap = ingest.finish()?;
            log::info!("ingested {snap:?}");
            r?
        }
        (None, None) => return Err(CliError::config("one of --store or --mqtt is required")),
    };
    Ok(serde_json::to_string_pretty(&report).expect("report serializes") + "\n")
}

pub fn serve(args: &ServeArgs) -> Result<String, CliError> {
    let store = open_store(args.store.as_deref())?;
    let ingest = LocalIngest::start(store.clone())?;
    let stop = ctrl_c_flag();

    let mut mqtt = None;
    let mut forwarder = None;
    if let Some(endpoint) = &args.mqtt {
        let (link, rx) = connect_mqtt(endpoint, "oda-serve")?;
        link.subscribe("org/#")?;
        let bus = ingest.bus.clone();
        forwarder = Some(thread::spawn(move || {
            for frame in rx {
                if bus.publish_raw(frame).is_err() {
                    break;
                }
            }
        }));
        mqtt = Some(link);
    }

    let agent = match &args.agent {
        Some(path) => {
            let agent = Agent::new(AgentConfig::load(path)?)?;
            Some(agent.start(Arc::new(ingest.bus.clone()))?)
        }
        None => None,
    };

    let replayer = match &args.replay {
        Some(dir) => {
            let bundle = read_bundle(dir)?;
            let bus = ingest.bus.clone();
            let speed: Speed = args.speed;
            Some(thread::spawn(move || replay(&bundle, &bus, speed)))
        }
        None => None,
    };

    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::config(format!("starting runtime: {e}")))?;
    let listener = rt
        .block_on(tokio::net::TcpListener::bind(args.listen))
        .map_err(|e| CliError::config(format!("binding {}: {e}", args.listen)))?;
    let addr = listener.local_addr().map_err(|e| CliError::config(e.to_string()))?;
    eprintln!("listening on http://{addr}");
    let app = oda_transport::http::router(store.clone(), ingest.stats.clone());
    let duration = args.duration;
    let shutdown = {
        let stop = stop.clone();
        async move {
            let deadline = duration.map(|d| tokio::time::Instant::now() + Duration::from_secs_f64(d.max(0.0)));
            loop {
                if stop.load(Ordering::SeqCst) || deadline.is_some_and(|d| tokio::time::Instant::now() >= d) {
                    break;
                }
                tokio::time::sleep(Duration::from_millis(50)).await;
            }
        }
    };
    rt.block_on(async { axum::serve(listener, app).with_graceful_shutdown(shutdown).await })
        .map_err(|e| CliError::config(format!("http server: {e}")))?;

    if let Some(a) = agent {
        log::info!("agent: {:?}", a.stop());
    }
    if let Some(r) = replayer {
        // An unfinished paced replay gives up once the bus refuses samples.
        if !r.is_finished() {
            ingest.bus.set_down(true);
        }
        match r.join() {
            Ok(Ok(rep)) => log::info!("replay: {rep:?}"),
            Ok(Err(e)) => log::error!("replay failed: {e}"),
            Err(_) => log::error!("replay thread panicked"),
        }
    }
    if let Some(link) = mqtt {
        link.disconnect();
    }
    if let Some(f) = forwarder {
        let _ = f.join();
    }
    let snap = ingest.finish()?;
    Ok(serde_json::to_string_pretty(&snap).expect("stats serialize") + "\n")
}
