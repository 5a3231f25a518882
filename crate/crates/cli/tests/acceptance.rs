//! Acceptance criteria 1-9, one PASS/FAIL line each. Exits non-zero if any fail.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use oda_cli::analyze;
use oda_cli::data::{Dataset, Span};
use oda_cli::service::LocalIngest;
use oda_core::analysis::{
    bandwidth_efficiency, decompose_levels, decompose_power, detect_thermal_events, flops_efficiency,
    leakage_share, scaling_summary, window_points, BenchmarkRecord, BootSegmentation, EventKind, MachineSpec,
    TemperatureTrace, ThermalThresholds,
};
use oda_core::profiles::{BootRegion, BootSchedule, Workload};
use oda_core::telemetry::{decode_payload, decode_topic, encode_topic, quantize, Frame, MetricSample, Plugin, Point, RailName, TopicPath};
use oda_sim::{generate, replay, Bundle, Phase, ProfileName, SimScenario, Speed, ThermalScript, ThermalShape};
use oda_transport::{ingest_frame, IngestOutcome, IngestStats, SeriesKey, SeriesStore};
use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tower::ServiceExt;

type Outcome = Result<String, String>;

/// Collects tolerance violations so a criterion reports all of them at once.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    count: usize,
}

impl Checks {
    fn ok(&mut self, cond: bool, what: impl FnOnce() -> String) {
        self.count += 1;
        if !cond {
            self.failures.push(what());
        }
    }

    fn near(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        self.ok((got - want).abs() <= tol, || format!("{name}: got {got:.4}, want {want} ± {tol}"));
    }

    fn rel(&mut self, name: &str, got: f64, want: f64, frac: f64) {
        self.near(name, got, want, frac * want.abs());
    }

    fn finish(self, summary: String) -> Outcome {
        if self.failures.is_empty() {
            Ok(format!("{summary}; {} checks", self.count))
        } else {
            let shown: Vec<_> = self.failures.iter().take(8).cloned().collect();
            Err(format!("{} of {} checks failed: {}", self.failures.len(), self.count, shown.join("; ")))
        }
    }
}

fn pct(x: f64) -> f64 {
    x * 100.0
}

fn efficiency_arithmetic() -> Outcome {
    let spec = MachineSpec::u740_cluster();
    let mut c = Checks::default();
    for (sustained, nodes, want) in [(1.86e9, 1, 46.5), (12.65e9, 8, 39.5), (1.44e9, 1, 36.0)] {
        let rec = BenchmarkRecord::flops("hpl", sustained, nodes).unwrap();
        let got = pct(flops_efficiency(&rec, &spec).unwrap().fraction);
        c.near(&format!("hpl {sustained:e} on {nodes}"), got, want, 0.1);
    }
    let copy = BenchmarkRecord::bandwidth("copy", 1206.0e6).unwrap();
    c.near("stream copy", pct(bandwidth_efficiency(&copy, &spec).unwrap().fraction), 15.5, 0.1);

    let out = Command::new(env!("CARGO_BIN_EXE_oda"))
        .args(["analyze", "efficiency", "--sustained", "1.86e9", "--nodes", "1", "--cores", "4", "--peak-per-core", "1e9"])
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    c.ok(out.status.success() && stdout.contains("46.5%"), || format!("oda analyze efficiency printed {stdout:?}"));
    c.finish("46.5 / 39.5 / 36.0 / 15.5 %".into())
}

fn scaling_arithmetic() -> Outcome {
    let one = BenchmarkRecord::flops("hpl", 1.86e9, 1).unwrap();
    let eight = BenchmarkRecord::flops("hpl", 12.65e9, 8).unwrap();
    let s = scaling_summary(&one, &eight).unwrap();
    let mut c = Checks::default();
    c.near("linear fraction", pct(s.linear_fraction), 85.0, 0.1);
    c.ok(s.linear_fraction == s.speedup / 8.0, || "linear_fraction != speedup / nodes".into());
    c.finish(format!("linear fraction {:.2}%", pct(s.linear_fraction)))
}

fn decomposition() -> Outcome {
    let mut c = Checks::default();
    let d = decompose_levels(984.0, 2561.0, 3075.0, RailName::Core).unwrap();
    c.near("leakage mW", d.leakage, 984.0, 1e-9);
    c.near("dynamic+clock mW", d.dynamic_clock, 1577.0, 1e-9);
    c.near("os mW", d.os_power, 514.0, 1e-9);
    c.near("leakage %", pct(d.leakage_fraction), 32.0, 0.5);
    c.near("dynamic+clock %", pct(d.dynamic_clock_fraction), 51.0, 0.5);
    c.near("os %", pct(d.os_fraction), 17.0, 0.5);
    c.near("leakage % (rendered)", pct(d.leakage_fraction), 32.0, 0.05);
    c.near("dynamic+clock % (rendered)", pct(d.dynamic_clock_fraction), 51.3, 0.05);
    c.near("os % (rendered)", pct(d.os_fraction), 16.7, 0.05);

    // Same numbers through the segmentation-based entry point.
    let seg = BootSegmentation {
        r1: (4.0, 10.0),
        r2: (10.0, 40.0),
        r3: (40.0, 60.0),
        mean_power: [
            (BootRegion::R1, [(RailName::Core, 984.0)].into()),
            (BootRegion::R2, [(RailName::Core, 2561.0)].into()),
        ]
        .into(),
    };
    let d2 = decompose_power(&seg, 3075.0, RailName::Core).unwrap();
    c.ok(d2 == d, || format!("decompose_power disagrees with decompose_levels: {d2:?}"));

    let ddr = leakage_share(275.0, 404.0, RailName::DdrMem).unwrap();
    c.near("ddr_mem leakage %", pct(ddr.fraction), 68.1, 0.5);
    c.finish(format!(
        "{:.1}/{:.1}/{:.1}% core, ddr_mem leakage {:.1}%",
        pct(d.leakage_fraction),
        pct(d.dynamic_clock_fraction),
        pct(d.os_fraction),
        pct(ddr.fraction)
    ))
}

/// Replays a bundle through the in-process bus into a fresh in-memory store.
fn through_pipeline(bundle: &Bundle) -> Result<(SeriesStore, Arc<IngestStats>, u64), String> {
    let store = Arc::new(SeriesStore::in_memory());
    let ingest = LocalIngest::start(store.clone()).map_err(|e| e.to_string())?;
    let stats = ingest.stats.clone();
    let report = replay(bundle, &ingest.bus, Speed::Unlimited).map_err(|e| e.to_string())?;
    ingest.finish().map_err(|e| e.to_string())?;
    let store = Arc::try_unwrap(store).map_err(|_| "store still shared".to_string())?;
    Ok((store, stats, report.published))
}

fn table5_closed_loop() -> Outcome {
    let mut s = SimScenario::new(Workload::ALL.iter().map(|&w| Phase::new(ProfileName::Steady(w), 60.0)).collect());
    s.seed = 5;
    s.noise = 0.01;
    s.power_rate = 1000.0;
    s.stats_period = 0.0;
    let bundle = generate(&s).map_err(|e| e.to_string())?;
    let (store, _, published) = through_pipeline(&bundle)?;
    let ds = Dataset::Store(store);
    let cols: Vec<(String, Span)> = bundle.manifest.nodes[0]
        .phases
        .iter()
        .map(|p| (p.workload.to_string(), Span { start: s.start + p.start, end: s.start + p.end }))
        .collect();
    let (tables, _) = analyze::table5(&ds, "mc01", &cols, None).map_err(|e| e.to_string())?;

    let mut c = Checks::default();
    let mut worst: f64 = 0.0;
    for (w, t) in Workload::ALL.iter().zip(&tables) {
        let means = w.reference_means();
        let pcts = w.reference_percent();
        for rail in RailName::ALL {
            let want = means.get(rail);
            let got = t.mean(rail);
            if want > 0.0 {
                worst = worst.max((got - want).abs() / want);
            }
            c.rel(&format!("{w} {rail} mean"), got, want, 0.02);
            c.near(&format!("{w} {rail} percent"), t.display_percent(rail) as f64, pcts[rail.index()] as f64, 1.0);
        }
        c.rel(&format!("{w} total"), t.total, w.reference_total(), 0.02);
    }
    c.finish(format!("{published} samples ingested, worst rail deviation {:.3}%", worst * 100.0))
}

fn boot_closed_loop() -> Outcome {
    let mut s = SimScenario::new(vec![Phase::new(ProfileName::Boot, 70.0)]);
    s.seed = 11;
    s.noise = 0.01;
    s.stats_period = 0.0;
    let bundle = generate(&s).map_err(|e| e.to_string())?;
    let (store, _, _) = through_pipeline(&bundle)?;
    let ds = Dataset::Store(store);
    let seg = analyze::boot_segmentation(&ds, "mc01", Span::ALL).map_err(|e| e.to_string())?;
    let sched = BootSchedule::reference();

    let mut c = Checks::default();
    c.near("R1 start", seg.r1.0 - s.start, sched.power_on, 0.1);
    c.near("R2 start", seg.r2.0 - s.start, sched.pll_active, 0.1);
    c.near("R3 start", seg.r3.0 - s.start, sched.os_start, 0.1);
    for region in BootRegion::ALL {
        for rail in [RailName::Core, RailName::Pll, RailName::DdrMem] {
            let want = sched.means(region).get(rail);
            let got = seg.mean(region, rail).ok_or_else(|| format!("no {region} {rail} mean"))?;
            c.rel(&format!("{region} {rail}"), got, want, 0.02);
        }
    }
    c.finish(format!(
        "R1 {:.1} mW on {:.3}-{:.3} s, R2 {:.1} mW from {:.3} s, R3 from {:.3} s",
        seg.mean(BootRegion::R1, RailName::Core).unwrap_or(f64::NAN),
        seg.r1.0 - s.start,
        seg.r1.1 - s.start,
        seg.mean(BootRegion::R2, RailName::Core).unwrap_or(f64::NAN),
        seg.r2.0 - s.start,
        seg.r3.0 - s.start,
    ))
}

fn thermal_kinds(shape: ThermalShape) -> Result<Vec<EventKind>, String> {
    let mut s = SimScenario::new(vec![Phase::new(ProfileName::Steady(Workload::Hpl), 120.0)]);
    s.power_rate = 10.0;
    s.thermal = vec![ThermalScript { node: "mc01".into(), sensor: "cpu_temp".into(), shape, period: 1.0 }];
    let bundle = generate(&s).map_err(|e| e.to_string())?;
    let ds = Dataset::Bundle(Box::new(bundle));
    let events = analyze::thermal(&ds, &["mc01".into()], &ThermalThresholds::default()).map_err(|e| e.to_string())?;
    Ok(events.into_iter().map(|e| e.kind).collect())
}

fn thermal_detection() -> Outcome {
    let count = |v: &[EventKind], k: EventKind| v.iter().filter(|&&x| x == k).count();
    let mut c = Checks::default();
    let ramp = thermal_kinds(ThermalShape::Ramp { from: 71.0, to: 107.0, span: 30.0, at: 20.0 })?;
    c.ok(count(&ramp, EventKind::Critical) == 1, || format!("ramp: {ramp:?}"));
    c.ok(count(&ramp, EventKind::Runaway) == 1, || format!("ramp: {ramp:?}"));
    let steady = thermal_kinds(ThermalShape::Steady { level: 39.0 })?;
    c.ok(steady.is_empty(), || format!("steady 39: {steady:?}"));
    let plateau = thermal_kinds(ThermalShape::Steady { level: 71.0 })?;
    c.ok(plateau == [EventKind::Warn], || format!("plateau 71: {plateau:?}"));
    c.finish(format!("ramp {ramp:?}, steady 39 {steady:?}, plateau 71 {plateau:?}"))
}

fn random_segment(rng: &mut ChaCha8Rng) -> String {
    const ALPHABET: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_.-";
    let n = rng.random_range(1..=12);
    (0..n).map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())] as char).collect()
}

fn malformed_corpus(frames: &[Frame]) -> Vec<Frame> {
    let mut bad = Vec::new();
    let topic = frames[0].topic.clone();
    let payload = frames[0].payload.clone();
    let semi = payload.find(';').unwrap();
    for cut in 0..=semi {
        bad.push(Frame { topic: topic.clone(), payload: payload[..cut].to_string() });
    }
    bad.push(Frame { topic: topic.clone(), payload: payload[..payload.len() - 1].replace(';', ";;") });
    for sep in [",", ":", " ", "", ";;", "; "] {
        bad.push(Frame { topic: topic.clone(), payload: payload.replacen(';', sep, 1) });
    }
    for p in ["NaN;1650000000.0", "nan;1650000000.0", "1.0;NaN", "inf;1650000000.0", "1.0;inf", "-inf;1.0", ";", "1;", ";1", "1;2;3", "0x10;1.0", "1.0;-5"] {
        bad.push(Frame { topic: topic.clone(), payload: p.into() });
    }
    for f in frames.iter().take(50) {
        for (i, _) in f.topic.match_indices('/') {
            bad.push(Frame { topic: f.topic[..i].to_string(), payload: payload.clone() });
            bad.push(Frame { topic: f.topic[..=i].to_string(), payload: payload.clone() });
        }
        bad.push(Frame { topic: f.topic.replace('/', "\\"), payload: payload.clone() });
        bad.push(Frame { topic: f.topic.replacen('/', "//", 1), payload: payload.clone() });
        bad.push(Frame { topic: format!("/{}", f.topic), payload: payload.clone() });
    }
    bad
}

fn wire_format() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut c = Checks::default();
    let mut frames = Vec::new();
    for i in 0..10_000 {
        let plugin = Plugin::ALL[rng.random_range(0..3)];
        let core = plugin.is_per_core().then(|| rng.random_range(0..512));
        let metric = match plugin {
            Plugin::PowerPub => RailName::ALL[rng.random_range(0..9)].metric_name(),
            _ => format!("{}.{}", random_segment(&mut rng).to_lowercase().replace('.', "_"), i % 7),
        };
        let topic = TopicPath::new(random_segment(&mut rng), random_segment(&mut rng), random_segment(&mut rng), plugin, core, metric)
            .map_err(|e| format!("generator made an invalid topic: {e}"))?;
        let v = quantize(rng.random_range(-1e9..1e9));
        let t = quantize(rng.random_range(1.0e9..2.0e9));
        let s = MetricSample::new(topic, v, t).map_err(|e| e.to_string())?;
        let f = s.to_frame();
        let back = MetricSample::from_frame(&f);
        c.ok(back.as_ref() == Ok(&s), || format!("round trip failed for {f:?}: {back:?}"));
        c.ok(back.is_ok_and(|b| b.to_frame() == f), || format!("re-encoding differs for {f:?}"));
        frames.push(f);
    }
    let roundtrips = c.count / 2;

    let bad = malformed_corpus(&frames);
    let store = SeriesStore::in_memory();
    let stats = IngestStats::new();
    for f in &bad {
        let r = catch_unwind(AssertUnwindSafe(|| MetricSample::from_frame(f)));
        c.ok(matches!(r, Ok(Err(_))), || format!("accepted or panicked on {f:?}"));
        let r = catch_unwind(AssertUnwindSafe(|| ingest_frame(&store, &stats, f)));
        c.ok(matches!(r, Ok(IngestOutcome::Rejected)), || format!("ingest did not reject {f:?}: {r:?}"));
    }
    // Byte-level truncation and mutation: only absence of panics is required.
    let mut random = 0;
    for f in frames.iter().take(2000) {
        let raw = format!("{}\u{0}{}", f.topic, f.payload);
        let cut = rng.random_range(0..raw.len());
        let mut bytes = raw.as_bytes()[..cut].to_vec();
        if !bytes.is_empty() && rng.random_bool(0.5) {
            let i = rng.random_range(0..bytes.len());
            bytes[i] = rng.random();
        }
        let s = String::from_utf8_lossy(&bytes).into_owned();
        let (t, p) = s.split_once('\u{0}').unwrap_or((&s, ""));
        let ok = catch_unwind(|| {
            let _ = decode_topic(t);
            let _ = decode_payload(p);
        })
        .is_ok();
        c.ok(ok, || format!("panic on {s:?}"));
        random += 1;
    }
    c.ok(store.is_empty(), || "malformed frames reached the store".into());
    c.ok(stats.snapshot().rejects as usize == bad.len(), || "reject counter mismatch".into());
    let _ = encode_topic;
    c.finish(format!("{roundtrips} round trips, {} malformed rejected, {random} random truncations", bad.len()))
}

async fn http_get(app: axum::Router, uri: &str) -> Result<(StatusCode, Vec<u8>), String> {
    let resp = app
        .oneshot(Request::get(uri).body(Body::empty()).map_err(|e| e.to_string())?)
        .await
        .map_err(|e| e.to_string())?;
    let status = resp.status();
    let body = resp.into_body().collect().await.map_err(|e| e.to_string())?.to_bytes().to_vec();
    Ok((status, body))
}

fn pipeline_lossless() -> Outcome {
    let mut s = SimScenario::new(vec![
        Phase::new(ProfileName::Steady(Workload::Idle), 20.0),
        Phase::new(ProfileName::Steady(Workload::Hpl), 40.0),
    ]);
    s.seed = 8;
    s.nodes = 8;
    s.counters = Some(Default::default());
    s.thermal = vec![ThermalScript {
        node: "mc07".into(),
        sensor: "cpu_temp".into(),
        shape: ThermalShape::Ramp { from: 71.0, to: 107.0, span: 30.0, at: 10.0 },
        period: 1.0,
    }];
    let bundle = generate(&s).map_err(|e| e.to_string())?;
    let (store, stats, published) = through_pipeline(&bundle)?;
    let mut c = Checks::default();
    let snap = stats.snapshot();
    c.ok(published as usize == bundle.total_samples(), || format!("published {published} of {}", bundle.total_samples()));
    c.ok(snap.accepted == published, || format!("accepted {} of {published}: {snap:?}", snap.accepted));

    let mut series = 0;
    for node in &bundle.nodes {
        for (sig, pts) in &node.signals {
            let key = SeriesKey::from(&bundle.topic(&node.hostname, sig).map_err(|e| e.to_string())?);
            c.ok(store.len(&key) == pts.len(), || format!("{key}: stored {} of {}", store.len(&key), pts.len()));
            let got = store.get(&key).unwrap_or_default();
            c.ok(got == *pts, || format!("{key}: stored points differ"));
            series += 1;
        }
    }

    let store = Arc::new(store);
    let app = oda_transport::http::router(store.clone(), stats.clone());
    let rt = tokio::runtime::Builder::new_current_thread().build().map_err(|e| e.to_string())?;
    let keys = store.keys();
    let (http_checked, hosts) = rt.block_on(async {
        let (status, body) = http_get(app.clone(), "/series").await?;
        let listed: Vec<SeriesKey> = serde_json::from_slice(&body).map_err(|e| e.to_string())?;
        c.ok(status == StatusCode::OK && listed == keys, || "/series differs from the store".into());
        let hosts: std::collections::BTreeSet<String> = listed.iter().map(|k| k.topic().node().to_string()).collect();
        let mut n = 0;
        for key in &keys {
            let enc = utf8_percent_encode(key.as_str(), NON_ALPHANUMERIC).to_string();
            let full = store.get(key).map_err(|e| e.to_string())?;
            let (status, body) = http_get(app.clone(), &format!("/series/{enc}/range")).await?;
            let direct = serde_json::to_vec(&full).map_err(|e| e.to_string())?;
            c.ok(status == StatusCode::OK && body == direct, || format!("{key}: full range differs"));
            let (a, b) = (full[full.len() / 4].t, full[full.len() / 2].t);
            let (status, body) = http_get(app.clone(), &format!("/series/{enc}/range?start={a:.6}&end={b:.6}")).await?;
            let direct = serde_json::to_vec(&store.query_range(key, a, b).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            c.ok(status == StatusCode::OK && body == direct, || format!("{key}: [{a}, {b}] differs"));
            n += 2;
        }
        Ok::<_, String>((n, hosts))
    })?;
    c.ok(hosts.len() == 8, || format!("{} hostnames in /series", hosts.len()));
    c.finish(format!("{published} samples in {series} series lossless, {http_checked} HTTP queries equal, {} hosts", hosts.len()))
}

fn invariant_suites() -> Outcome {
    const CASES: u32 = 1000;
    let run = |name: &str, f: &dyn Fn(&mut TestRunner) -> Result<(), String>| -> Result<String, String> {
        let mut runner = TestRunner::new(Config { cases: CASES, failure_persistence: None, ..Config::default() });
        f(&mut runner).map_err(|e| format!("{name}: {e}"))?;
        Ok(format!("{name} x{CASES}"))
    };
    let mut done = Vec::new();

    done.push(run("decomposition sums to idle", &|r| {
        r.run(&(0.0f64..5000.0, 0.0f64..5000.0, 0.0f64..5000.0), |(a, b, c)| {
            let mut lv = [a, b, c];
            lv.sort_by(f64::total_cmp);
            let d = decompose_levels(lv[0], lv[1], lv[2], RailName::Core).unwrap();
            prop_assert!((d.component_sum() - lv[2]).abs() <= 1e-12 * lv[2].max(1.0));
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?);

    done.push(run("linear_fraction == speedup / nodes", &|r| {
        r.run(&(1e6f64..1e12, 0.1f64..64.0, 2u32..64), |(single, ratio, nodes)| {
            let one = BenchmarkRecord::flops("b", single, 1).unwrap();
            let many = BenchmarkRecord::flops("b", single * ratio, nodes).unwrap();
            let s = scaling_summary(&one, &many).unwrap();
            prop_assert_eq!(s.linear_fraction, s.speedup / nodes as f64);
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?);

    done.push(run("window average commutes with affine maps", &|r| {
        let strat = (prop::collection::vec(0.0f64..5000.0, 1..300), 1e-4f64..0.1, 1e-3f64..1.0, -10.0f64..10.0, -1000.0f64..1000.0);
        r.run(&strat, |(vals, dt, window, a, b)| {
            let pts: Vec<Point> = vals.iter().enumerate().map(|(i, &v)| Point::new(1.65e9 + i as f64 * dt, v)).collect();
            let mapped: Vec<Point> = pts.iter().map(|p| Point::new(p.t, a * p.v + b)).collect();
            let lhs = window_points(&mapped, window).unwrap();
            let rhs = window_points(&pts, window).unwrap();
            prop_assert_eq!(lhs.len(), rhs.len());
            for (l, r) in lhs.iter().zip(&rhs) {
                let want = a * r.v + b;
                prop_assert_eq!(l.t, r.t);
                prop_assert!((l.v - want).abs() <= 1e-9 * (1.0 + want.abs() + 5000.0 * a.abs()));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?);

    done.push(run("raising thermal thresholds never adds events", &|r| {
        let strat = (
            prop::collection::vec(20.0f64..120.0, 2..120),
            30.0f64..90.0,
            1.0f64..30.0,
            0.0f64..3.0,
            (0.0f64..20.0, 0.0f64..20.0, 0.0f64..2.0),
        );
        r.run(&strat, |(temps, warn, gap, rate, bump)| {
            let trace = TemperatureTrace {
                node: "n".into(),
                sensor: "cpu_temp".into(),
                points: temps.iter().enumerate().map(|(i, &v)| Point::new(i as f64 * 2.0, v)).collect(),
            };
            let lo = ThermalThresholds { warn, critical: warn + gap, runaway_rate: rate, runaway_window: 10.0 };
            let hi = ThermalThresholds {
                warn: warn + bump.0,
                critical: warn + gap + bump.0 + bump.1,
                runaway_rate: rate + bump.2,
                runaway_window: 10.0,
            };
            let count = |th: &ThermalThresholds| detect_thermal_events(std::slice::from_ref(&trace), th).unwrap();
            let (ev_lo, ev_hi) = (count(&lo), count(&hi));
            prop_assert!(ev_hi.len() <= ev_lo.len());
            for e in &ev_hi {
                prop_assert!(ev_lo.iter().any(|x| x.kind == e.kind && x.onset <= e.onset));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?);

    Ok(done.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, f64, fn() -> Outcome); 9] = [
        (1, "efficiency arithmetic", 5.0, efficiency_arithmetic),
        (2, "scaling arithmetic", 1.0, scaling_arithmetic),
        (3, "power decomposition", 1.0, decomposition),
        (4, "workload power table, closed loop", 120.0, table5_closed_loop),
        (5, "boot segmentation, closed loop", 30.0, boot_closed_loop),
        (6, "thermal detection", 30.0, thermal_detection),
        (7, "wire format round trips and fuzz", 30.0, wire_format),
        (8, "pipeline losslessness", 60.0, pipeline_lossless),
        (9, "invariant suites", 60.0, invariant_suites),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, budget, f) in criteria {
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let out = catch_unwind(f).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        let out = match out {
            Ok(detail) if secs > budget => Err(format!("{detail}; took {secs:.1} s, budget {budget} s")),
            other => other,
        };
        match out {
            Ok(detail) => println!("PASS criterion {n}: {name} ({detail}) [{secs:.2} s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n}: {name}: {why} [{secs:.2} s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
