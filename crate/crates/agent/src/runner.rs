use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crossbeam_channel::{bounded, Receiver, RecvTimeoutError, Sender};
use oda_core::telemetry::{quantize, MetricSample, Plugin};
use oda_transport::Transport;
use serde::Serialize;

use crate::catalog::DIAGNOSTIC_PREFIX;
use crate::clock::{Clock, SystemClock};
use crate::config::{AgentConfig, ConfigError, SamplerSpec};
use crate::source::{open_source, Source, SourceError};

const OUTBOUND_QUEUE: usize = 65_536;
const RETRY: Duration = Duration::from_millis(100);
/// How long a stopping agent keeps retrying buffered samples.
const SHUTDOWN_GRACE: Duration = Duration::from_secs(2);

#[derive(Debug, Default)]
struct Counters {
    emitted: AtomicU64,
    published: AtomicU64,
    dropped: AtomicU64,
    source_errors: AtomicU64,
    counter_warnings: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AgentReport {
    /// Samples produced by the samplers.
    pub emitted: u64,
    /// Samples (including diagnostics) accepted by the transport.
    pub published: u64,
    /// Samples discarded because a plugin buffer was full.
    pub dropped: u64,
    /// Samples still buffered at shutdown.
    pub buffered: u64,
    pub source_errors: u64,
    pub counter_warnings: u64,
}

pub struct Agent {
    config: Arc<AgentConfig>,
    clock: Arc<dyn Clock>,
}

impl Agent {
    pub fn new(mut config: AgentConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Agent { config: Arc::new(config), clock: Arc::new(SystemClock) })
    }

    pub fn with_clock(mut self, clock: impl Clock + 'static) -> Self {
        self.clock = Arc::new(clock);
        self
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    /// Starts sampling until [`AgentHandle::stop`].
    pub fn start(&self, transport: Arc<dyn Transport>) -> Result<AgentHandle, ConfigError> {
        self.spawn(transport, None)
    }

    /// Samples every tick scheduled in `[start, start + secs)` and returns once
    /// they are all handed to the transport (or buffered).
    pub fn run_for(&self, transport: Arc<dyn Transport>, secs: f64) -> Result<AgentReport, ConfigError> {
        Ok(self.spawn(transport, Some(secs))?.wait())
    }

    fn spawn(&self, transport: Arc<dyn Transport>, secs: Option<f64>) -> Result<AgentHandle, ConfigError> {
        let mut sources = Vec::new();
        for (i, spec) in self.config.samplers.iter().enumerate() {
            let salt = format!("{}/{i}", self.config.node);
            sources.push(open_source(&spec.source, spec.plugin, &salt).map_err(ConfigError::Source)?);
        }
        let stop = Arc::new(AtomicBool::new(false));
        let counters = Arc::new(Counters::default());
        let (tx, rx) = bounded(OUTBOUND_QUEUE);
        let start = self.clock.now();
        let end = secs.map(|s| start + s);

        let samplers = self
            .config
            .samplers
            .iter()
            .cloned()
            .zip(sources)
            .map(|(spec, source)| {
                let ctx = SamplerCtx {
                    config: self.config.clone(),
                    clock: self.clock.clone(),
                    stop: stop.clone(),
                    counters: counters.clone(),
                    tx: tx.clone(),
                    start,
                    end,
                };
                thread::Builder::new()
                    .name(format!("sampler-{}", spec.plugin))
                    .spawn(move || ctx.run(spec, source))
                    .expect("spawning sampler thread")
            })
            .collect();
        drop(tx);

        let publisher = {
            let config = self.config.clone();
            let counters = counters.clone();
            thread::Builder::new()
                .name("publisher".into())
                .spawn(move || publish_loop(&config, rx, transport.as_ref(), &counters))
                .expect("spawning publisher thread")
        };
        Ok(AgentHandle { stop, counters, samplers, publisher: Some(publisher) })
    }
}

pub struct AgentHandle {
    stop: Arc<AtomicBool>,
    counters: Arc<Counters>,
    samplers: Vec<JoinHandle<()>>,
    publisher: Option<JoinHandle<u64>>,
}

impl AgentHandle {
    /// Signals the samplers and waits for the queue to drain.
    pub fn stop(self) -> AgentReport {
        self.stop.store(true, Ordering::SeqCst);
        self.wait()
    }

    /// Waits for every sampler to reach its end (or a stop signal).
    pub fn wait(mut self) -> AgentReport {
        for s in self.samplers.drain(..) {
            if s.join().is_err() {
                log::error!("sampler thread panicked");
            }
        }
        let buffered = self.publisher.take().map(|p| p.join().unwrap_or(0)).unwrap_or(0);
        let c = &self.counters;
        AgentReport {
            emitted: c.emitted.load(Ordering::SeqCst),
            published: c.published.load(Ordering::SeqCst),
            dropped: c.dropped.load(Ordering::SeqCst),
            buffered,
            source_errors: c.source_errors.load(Ordering::SeqCst),
            counter_warnings: c.counter_warnings.load(Ordering::SeqCst),
        }
    }

    pub fn stop_flag(&self) -> Arc<AtomicBool> {
        self.stop.clone()
    }
}

/// Runs `config` against `transport` until `stop` is raised.
pub fn run_agent(config: AgentConfig, transport: Arc<dyn Transport>, stop: &AtomicBool) -> Result<AgentReport, ConfigError> {
    let handle = Agent::new(config)?.start(transport)?;
    while !stop.load(Ordering::SeqCst) {
        thread::sleep(Duration::from_millis(100));
    }
    Ok(handle.stop())
}

struct SamplerCtx {
    config: Arc<AgentConfig>,
    clock: Arc<dyn Clock>,
    stop: Arc<AtomicBool>,
    counters: Arc<Counters>,
    tx: Sender<MetricSample>,
    start: f64,
    end: Option<f64>,
}

impl SamplerCtx {
    fn run(self, spec: SamplerSpec, mut source: Box<dyn Source>) {
        let cores: Vec<Option<u32>> = if spec.plugin.is_per_core() {
            spec.cores.iter().map(|&c| Some(c)).collect()
        } else {
            vec![None]
        };
        let mut last_counter: HashMap<(u32, String), f64> = HashMap::new();
        let mut reported: HashSet<String> = HashSet::new();
        for k in 0u64.. {
            let deadline = self.start + k as f64 * spec.period;
            if self.end.is_some_and(|end| deadline >= end) || !self.clock.wait_until(deadline, &self.stop) {
                break;
            }
            for &core in &cores {
                for metric in &spec.metrics {
                    let ts = quantize(self.clock.stamp(deadline));
                    let value = match source.read(metric, core, ts) {
                        Ok(v) => v,
                        Err(SourceError::Warmup(_)) => continue,
                        Err(e) => {
                            self.counters.source_errors.fetch_add(1, Ordering::Relaxed);
                            if reported.insert(metric.clone()) {
                                log::warn!("{}: {e}; skipping this tick", spec.plugin);
                            } else {
                                log::debug!("{}: {e}", spec.plugin);
                            }
                            continue;
                        }
                    };
                    if let Some(c) = core {
                        let prev = last_counter.insert((c, metric.clone()), value);
                        if let Some(prev) = prev.filter(|&p| value < p) {
                            self.counters.counter_warnings.fetch_add(1, Ordering::Relaxed);
                            log::warn!("{metric} on core {c} went backwards ({prev} -> {value})");
                            let topic = self.config.topic(spec.plugin, core, &format!("{DIAGNOSTIC_PREFIX}decrease.{metric}"));
                            self.emit(MetricSample { topic, value: prev - value, timestamp: ts });
                        }
                    }
                    let topic = self.config.topic(spec.plugin, core, metric);
                    match MetricSample::new(topic, value, ts) {
                        Ok(s) => self.emit(s),
                        Err(e) => {
                            self.counters.source_errors.fetch_add(1, Ordering::Relaxed);
                            log::warn!("{metric}: {e}");
                        }
                    }
                }
            }
        }
    }

    fn emit(&self, sample: MetricSample) {
        self.counters.emitted.fetch_add(1, Ordering::Relaxed);
        // Only fails once the publisher is gone, i.e. during shutdown.
        let _ = self.tx.send(sample);
    }
}

/// Per-plugin bounded buffers in front of the transport.
struct Outbox {
    limit: usize,
    queues: BTreeMap<Plugin, VecDeque<MetricSample>>,
    dropped: BTreeMap<Plugin, u64>,
    /// Latest pending drop-count diagnostic per plugin.
    diagnostics: BTreeMap<Plugin, MetricSample>,
}

impl Outbox {
    fn push(&mut self, config: &AgentConfig, sample: MetricSample, counters: &Counters) {
        let plugin = sample.topic.plugin();
        let ts = sample.timestamp;
        let q = self.queues.entry(plugin).or_default();
        q.push_back(sample);
        if q.len() > self.limit {
            q.pop_front();
            counters.dropped.fetch_add(1, Ordering::Relaxed);
            let n = self.dropped.entry(plugin).or_default();
            *n += 1;
            let topic = config.topic(Plugin::StatsPub, None, &format!("{DIAGNOSTIC_PREFIX}dropped.{plugin}"));
            self.diagnostics.insert(plugin, MetricSample { topic, value: *n as f64, timestamp: ts });
        }
    }

    fn len(&self) -> usize {
        self.queues.values().map(VecDeque::len).sum::<usize>() + self.diagnostics.len()
    }

    /// Publishes in order until the transport refuses. Returns false on refusal.
    fn flush(&mut self, transport: &dyn Transport, counters: &Counters) -> bool {
        for q in self.queues.values_mut() {
            while let Some(s) = q.front() {
                if let Err(e) = transport.publish(s) {
                    log::debug!("publish failed, buffering: {e}");
                    return false;
                }
                q.pop_front();
                counters.published.fetch_add(1, Ordering::Relaxed);
            }
        }
        while let Some((&plugin, s)) = self.diagnostics.iter().next() {
            if transport.publish(s).is_err() {
                return false;
            }
            self.diagnostics.remove(&plugin);
            counters.published.fetch_add(1, Ordering::Relaxed);
        }
        true
    }
}

/// Returns how many samples were still buffered when the queue closed.
fn publish_loop(config: &AgentConfig, rx: Receiver<MetricSample>, transport: &dyn Transport, counters: &Counters) -> u64 {
    let mut outbox = Outbox {
        limit: config.buffer_limit,
        queues: BTreeMap::new(),
        dropped: BTreeMap::new(),
        diagnostics: BTreeMap::new(),
    };
    let mut retry_at: Option<Instant> = None;
    loop {
        let first = if outbox.len() == 0 {
            rx.recv().map_err(|_| RecvTimeoutError::Disconnected)
        } else {
            rx.recv_timeout(RETRY)
        };
        match first {
            Ok(s) => {
                outbox.push(config, s, counters);
                for s in rx.try_iter() {
                    outbox.push(config, s, counters);
                }
            }
            Err(RecvTimeoutError::Timeout) => {}
            Err(RecvTimeoutError::Disconnected) => {
                let give_up = Instant::now() + SHUTDOWN_GRACE;
                while !outbox.flush(transport, counters) && Instant::now() < give_up {
                    thread::sleep(RETRY);
                }
                return outbox.len() as u64;
            }
        }
        if retry_at.is_none_or(|t| Instant::now() >= t) {
            retry_at = (!outbox.flush(transport, counters)).then(|| Instant::now() + RETRY);
        }
    }
}
