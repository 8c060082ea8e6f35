//! Acceptance criteria. Runs every criterion, prints one line each and
//! exits non-zero if any failed.

mod common;

use std::time::Instant;

use leo_handover::channel::{self, ChannelConfig, EnvironmentRow};
use leo_handover::cli::{self, CampaignSpec};
use leo_handover::engine;
use leo_handover::geometry;
use leo_handover::handover::{self, AssociationState, HoMechanism, MechanismKind};
use leo_handover::monitor::{RlfConfig, RlfMonitor, SyncPhase};
use leo_handover::{LinkSample, MetricsRecord, MobilityMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const USERS: usize = 200;
const DROPS: u32 = 2;
const SEEDS: [u64; 3] = [1, 2, 3];

type Outcome = (Vec<String>, String);
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn desk_spec(seed: u64) -> CampaignSpec {
    let mut spec = CampaignSpec::default_paper();
    spec.seeds.base_seed = seed;
    spec.seeds.users_per_drop = USERS;
    spec.seeds.drops = DROPS;
    spec
}

fn desk_campaign(seed: u64, kind: Option<MechanismKind>) -> Vec<MetricsRecord> {
    let mut spec = desk_spec(seed);
    if let Some(k) = kind {
        spec.sweep.mechanisms = vec![k.as_str().to_string()];
    }
    engine::run_campaign(&spec.grid().unwrap()).unwrap()
}

fn label(r: &MetricsRecord) -> String {
    let m = r.key.mechanism;
    match m.ttt_ms() {
        Some(ttt) => {
            format!("{} {}/{}ms {} seed {}", m.kind(), m.offset(), ttt, r.key.mobility.as_str(), r.key.seed)
        }
        None => format!("{} {} {} seed {}", m.kind(), m.offset(), r.key.mobility.as_str(), r.key.seed),
    }
}

fn timer_exactness() -> Outcome {
    let mut fails = Vec::new();
    let start = Instant::now();
    let records = desk_campaign(1, Some(MechanismKind::Timer));
    let elapsed = start.elapsed().as_secs_f64();
    let two_n = 2 * (USERS as u64) * u64::from(DROPS);
    for r in &records {
        let HoMechanism::Timer { t_off } = r.key.mechanism else { unreachable!() };
        if r.pingpong_handovers() != 0 || r.rlfs() != 0 {
            fails.push(format!("{}: pp={} rlf={}", label(r), r.pingpong_handovers(), r.rlfs()));
        }
        if t_off <= 6.6 + 1e-9 && r.handovers() != two_n {
            fails.push(format!("{}: hos={} != {two_n}", label(r), r.handovers()));
        }
        if t_off >= 6.7 - 1e-9 {
            let floor = 0.995 * two_n as f64;
            if !(r.handovers() < two_n && r.handovers() as f64 >= floor) {
                fails.push(format!("{}: hos={} not in [{floor}, {two_n})", label(r), r.handovers()));
            }
        }
    }
    if elapsed >= 10.0 {
        fails.push(format!("runtime {elapsed:.1} s"));
    }
    (fails, format!("{} rows, {elapsed:.2} s", records.len()))
}

fn find(records: &[MetricsRecord], m: HoMechanism, mobility: MobilityMode) -> &MetricsRecord {
    records
        .iter()
        .find(|r| r.key.mechanism == m && r.key.mobility == mobility)
        .expect("configuration present")
}

fn zero_zero(campaigns: &[Vec<MetricsRecord>]) -> Outcome {
    let mut fails = Vec::new();
    let settings = [(20, 3.0), (40, 2.0), (60, 1.0)];
    for records in campaigns {
        for (ttt_ms, hys_plus_off) in settings {
            for mobility in [MobilityMode::Static, MobilityMode::SmoothRandom] {
                let r = find(records, HoMechanism::Measurement { hys_plus_off, ttt_ms }, mobility);
                if r.pingpong_handovers() != 0 || r.rlfs() != 0 {
                    fails.push(format!("{}: pp={} rlf={}", label(r), r.pingpong_handovers(), r.rlfs()));
                }
            }
        }
    }
    (fails, format!("{} settings x {} seeds x 2 mobility", settings.len(), campaigns.len()))
}

fn pingpong_regime(campaigns: &[Vec<MetricsRecord>]) -> Outcome {
    let m = HoMechanism::Measurement { hys_plus_off: 1.0, ttt_ms: 20 };
    let mut fails = Vec::new();
    let mut ratios = Vec::new();
    for mobility in [MobilityMode::Static, MobilityMode::SmoothRandom] {
        let r = find(&campaigns[0], m, mobility);
        let ratio = r.pingpong_handovers() as f64 / r.handovers().max(1) as f64;
        ratios.push(format!("{}={ratio:.3}", mobility.as_str()));
        if !(0.30..=0.60).contains(&ratio) {
            fails.push(format!(
                "{}: pp/hos = {}/{} = {ratio:.3}",
                label(r),
                r.pingpong_handovers(),
                r.handovers()
            ));
        }
    }
    (fails, format!("pp/hos {}", ratios.join(" ")))
}

fn alternative_no_pingpong(campaigns: &[Vec<MetricsRecord>]) -> Outcome {
    let mut fails = Vec::new();
    let mut rows = 0;
    for r in campaigns[0].iter().filter(|r| r.key.kind() != MechanismKind::Measurement) {
        rows += 1;
        if r.pingpong_handovers() != 0 {
            fails.push(format!("{}: pp={}", label(r), r.pingpong_handovers()));
        }
    }
    (fails, format!("{rows} rows"))
}

/// Sums over seeds and mobility modes for one mechanism setting.
fn totals(campaigns: &[Vec<MetricsRecord>], m: HoMechanism) -> (u64, u64) {
    campaigns
        .iter()
        .flatten()
        .filter(|r| r.key.mechanism == m)
        .fold((0, 0), |(h, f), r| (h + r.handovers(), f + r.rlfs()))
}

fn check_axis(
    campaigns: &[Vec<MetricsRecord>],
    axis: &str,
    settings: &[HoMechanism],
    fails: &mut Vec<String>,
) {
    let points: Vec<(u64, u64)> = settings.iter().map(|&m| totals(campaigns, m)).collect();
    for (w, pair) in points.windows(2).zip(settings.windows(2)) {
        let ((h0, f0), (h1, f1)) = (w[0], w[1]);
        if h1 > h0 {
            fails.push(format!("{axis}: HOs rise {h0} -> {h1} at {:?} -> {:?}", pair[0], pair[1]));
        }
        if f1 < f0 {
            fails.push(format!("{axis}: RLFs fall {f0} -> {f1} at {:?} -> {:?}", pair[0], pair[1]));
        }
    }
}

fn monotone_trends(campaigns: &[Vec<MetricsRecord>]) -> Outcome {
    let sweep = CampaignSpec::default_paper().sweep;
    let mut fails = Vec::new();
    for &ttt_ms in &sweep.ttt_ms {
        let axis: Vec<_> = sweep
            .hys_plus_off_db
            .iter()
            .map(|&hys_plus_off| HoMechanism::Measurement { hys_plus_off, ttt_ms })
            .collect();
        check_axis(campaigns, &format!("hys+off @ TTT {ttt_ms}"), &axis, &mut fails);
    }
    for &hys_plus_off in &sweep.hys_plus_off_db {
        let axis: Vec<_> =
            sweep.ttt_ms.iter().map(|&ttt_ms| HoMechanism::Measurement { hys_plus_off, ttt_ms }).collect();
        check_axis(campaigns, &format!("TTT @ {hys_plus_off} dB"), &axis, &mut fails);
    }
    let d: Vec<_> = sweep.d_off_km.iter().map(|&d| HoMechanism::Distance { d_off: d * 1000.0 }).collect();
    check_axis(campaigns, "d_off", &d, &mut fails);
    let a: Vec<_> = sweep.alpha_off_deg.iter().map(|&a| HoMechanism::Elevation { alpha_off: a }).collect();
    check_axis(campaigns, "alpha_off", &a, &mut fails);
    let (hos, rlfs) = totals(campaigns, HoMechanism::Elevation { alpha_off: 10.0 });
    if hos != 0 || rlfs == 0 {
        fails.push(format!("alpha_off 10: hos={hos} rlfs={rlfs}"));
    }
    (fails, format!("alpha_off 10: hos={hos} rlfs={rlfs}"))
}

fn static_mobile_parity(campaigns: &[Vec<MetricsRecord>]) -> Outcome {
    let mut fails = Vec::new();
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for records in campaigns {
        for s in records.iter().filter(|r| r.key.mobility == MobilityMode::Static && r.handovers() > 100) {
            let m = find(records, s.key.mechanism, MobilityMode::SmoothRandom);
            let rel = (s.handovers() as f64 - m.handovers() as f64).abs() / s.handovers() as f64;
            checked += 1;
            worst = worst.max(rel);
            if rel >= 0.05 {
                fails.push(format!("{}: static {} mobile {}", label(s), s.handovers(), m.handovers()));
            }
        }
    }
    (fails, format!("{checked} configurations, worst {:.2}%", 100.0 * worst))
}

fn channel_golden() -> Outcome {
    let mut fails = Vec::new();
    let cfg = ChannelConfig::default();
    let fspl = channel::fspl(600e3, 2.0).unwrap();
    if (fspl - 154.03).abs() > 0.01 {
        fails.push(format!("fspl(600 km) = {fspl}"));
    }
    let zenith = geometry::slant_distance_from_elevation(90.0, 600e3);
    if zenith != 600e3 {
        fails.push(format!("slant(90) = {zenith}"));
    }
    let pl_s = cfg.scintillation_loss();
    if (pl_s - 7.778).abs() > 0.001 {
        fails.push(format!("PL_s = {pl_s}"));
    }
    let eirp = cfg.eirp_per_prb_dbm();
    if (eirp - 56.55).abs() > 0.01 {
        fails.push(format!("eirp per PRB = {eirp}"));
    }
    let table: [(f64, f64, f64, f64, f64); 9] = [
        (10.0, 28.2, 3.5, 15.5, 34.3),
        (20.0, 33.1, 3.4, 13.9, 30.9),
        (30.0, 39.8, 2.9, 12.4, 29.0),
        (40.0, 46.8, 3.0, 11.7, 27.7),
        (50.0, 53.7, 3.1, 10.6, 26.8),
        (60.0, 61.2, 2.7, 10.5, 26.2),
        (70.0, 73.8, 2.5, 10.1, 25.8),
        (80.0, 82.0, 2.3, 9.2, 25.5),
        (90.0, 98.1, 1.2, 9.2, 25.5),
    ];
    for (el, los_pct, s_los, s_nlos, cl) in table {
        let row: EnvironmentRow = channel::lookup_environment(el).unwrap();
        let got = (
            f64::from(row.elevation_bucket),
            format!("{:.1}", 100.0 * row.los_probability),
            row.sigma_sf_los,
            row.sigma_sf_nlos,
            row.clutter_loss,
        );
        if got != (el, format!("{los_pct:.1}"), s_los, s_nlos, cl) {
            fails.push(format!("row {el}: {got:?}"));
        }
    }
    (fails, format!("fspl {fspl:.4} dB, PL_s {pl_s:.4} dB, eirp {eirp:.4} dBm"))
}

fn feed(m: &mut RlfMonitor, trace: impl IntoIterator<Item = f64>) -> Vec<u32> {
    trace
        .into_iter()
        .enumerate()
        .filter_map(|(i, s)| m.update(s, 10).then_some(10 * (i as u32 + 1)))
        .collect()
}

fn rlf_suite() -> Outcome {
    let mut fails = Vec::new();
    let mut m = RlfMonitor::new(RlfConfig::default());
    let at = feed(&mut m, std::iter::repeat_n(-10.0, 100));
    if at.first() != Some(&500) {
        fails.push(format!("constant -10 dB: RLF at {at:?} ms"));
    }
    let mut m = RlfMonitor::new(RlfConfig::default());
    let at = feed(&mut m, std::iter::repeat_n(-9.0, 20).chain(std::iter::repeat_n(-5.0, 100)));
    if !at.is_empty() || m.phase != SyncPhase::InSync || m.t310_elapsed_ms != 0 {
        fails.push(format!("Q_in abort: {at:?} {:?}", m.phase));
    }
    let mut m = RlfMonitor::new(RlfConfig::default());
    let at = feed(&mut m, std::iter::repeat_n(-7.0, 1000));
    if !at.is_empty() || m.phase != SyncPhase::InSync {
        fails.push(format!("dead band: {at:?} {:?}", m.phase));
    }
    (fails, "T310 expiry, Q_in abort, dead band".into())
}

fn determinism() -> Outcome {
    let mut fails = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let mut spec = desk_spec(7);
        spec.sweep.mechanisms = vec!["measurement".into()];
        spec.sweep.ttt_ms = vec![20];
        spec.output.results = dir.path().join(format!("r{i}.csv"));
        spec.output.events = Some(dir.path().join(format!("e{i}.csv")));
        cli::run(&spec, &mut std::io::sink()).unwrap();
        let read = |p: &std::path::Path| std::fs::read(p).unwrap();
        outputs.push((read(&spec.output.results), read(spec.output.events.as_ref().unwrap())));
    }
    if outputs[0] != outputs[1] {
        fails.push("repeated run produced different CSV bytes".into());
    }

    let mut spec = desk_spec(1);
    spec.sweep.mechanisms = vec!["distance".into(), "elevation".into(), "timer".into()];
    spec.sweep.mobility = vec!["static".into()];
    let run_with = |channel_seed| {
        let mut s = spec.clone();
        s.seeds.channel_seed = Some(channel_seed);
        engine::run_campaign(&s.grid().unwrap()).unwrap()
    };
    let (a, b) = (run_with(1), run_with(99));
    let mut changed = 0;
    for (x, y) in a.iter().zip(&b) {
        if x.handovers() != y.handovers() {
            changed += 1;
            fails.push(format!(
                "{}: hos {} vs {} across channel seeds",
                label(x),
                x.handovers(),
                y.handovers()
            ));
        }
    }
    (fails, format!("{} rows compared, {changed} changed", a.len()))
}

fn property_suites() -> Outcome {
    let mut fails = Vec::new();
    let v = common::mobility_violations(100, 10_000);
    if v != 0 {
        fails.push(format!("mobility: {v} violations in 1e6 steps"));
    }
    let (stats, critical) = common::placement_ks(100_000);
    if stats.iter().any(|&d| d >= critical) {
        fails.push(format!("placement KS {stats:?} >= {critical}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut sinr_bad = 0;
    for _ in 0..10_000 {
        let s = rng.random_range(-150.0..-50.0);
        let i: Vec<f64> = (0..rng.random_range(0..4)).map(|_| rng.random_range(-150.0..-50.0)).collect();
        let n = rng.random_range(-140.0..-100.0);
        let c = rng.random_range(-50.0..50.0);
        let shifted: Vec<f64> = i.iter().map(|x| x + c).collect();
        let d = channel::sinr(s, &i, n).unwrap() - channel::sinr(s + c, &shifted, n + c).unwrap();
        if d.abs() >= 1e-9 {
            sinr_bad += 1;
        }
    }
    if sinr_bad != 0 {
        fails.push(format!("SINR shift: {sinr_bad} violations"));
    }

    let mut ttt_bad = 0;
    let sample = |rss| LinkSample { distance: 0.0, elevation: 0.0, pl_total: 0.0, rss, sinr: 0.0 };
    for _ in 0..1_000 {
        let ttt_steps = rng.random_range(1..=10u32);
        let mut state = AssociationState::new(0, 2);
        let mut run = 0;
        for _ in 0..200 {
            let cond = rng.random_bool(0.8);
            let samples = [sample(-100.0), sample(if cond { -96.5 } else { -97.0 })];
            let fired = handover::evaluate_measurement(&mut state, &samples, 3.0, 10 * ttt_steps, 10);
            run = if cond { run + 1 } else { 0 };
            if state.ttt_elapsed[1] != 10 * run || fired.is_some() != (run >= ttt_steps) {
                ttt_bad += 1;
            }
            if fired.is_some() {
                state = AssociationState::new(0, 2);
                run = 0;
            }
        }
    }
    if ttt_bad != 0 {
        fails.push(format!("TTT reset: {ttt_bad} violations"));
    }
    (fails, "mobility 1e6 steps, KS 1e5, SINR shift 1e4, TTT 2e5 steps".into())
}

fn main() {
    let campaigns: Vec<Vec<MetricsRecord>> = SEEDS.iter().map(|&s| desk_campaign(s, None)).collect();

    let criteria: Vec<Criterion> = vec![
        ("timer exactness", Box::new(timer_exactness)),
        ("zero-zero measurement settings", Box::new(|| zero_zero(&campaigns))),
        ("measurement ping-pong regime", Box::new(|| pingpong_regime(&campaigns))),
        ("alternative mechanisms without ping-pong", Box::new(|| alternative_no_pingpong(&campaigns))),
        ("monotone trends", Box::new(|| monotone_trends(&campaigns))),
        ("static/mobile parity", Box::new(|| static_mobile_parity(&campaigns))),
        ("channel golden values", Box::new(channel_golden)),
        ("RLF state machine", Box::new(rlf_suite)),
        ("determinism and channel-seed invariance", Box::new(determinism)),
        ("property suites", Box::new(property_suites)),
    ];

    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (fails, detail) = check();
        let status = if fails.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status}: {name} ({detail})", i + 1);
        for f in fails.iter().take(12) {
            println!("    {f}");
        }
        if fails.len() > 12 {
            println!("    ... {} more", fails.len() - 12);
        }
        failed += usize::from(!fails.is_empty());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
