//! End-to-end acceptance suite. Runs every criterion, prints one PASS/FAIL
//! line each and exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skydeploy::channel::{self, ChannelParams};
use skydeploy::deployment::{
    maximize_coverage, min_drones_full_coverage, minimize_hover_time, Scene, SearchConfig, UserNode,
};
use skydeploy::extraction::{
    extract_footprints, score_extraction, ExtractionConfig, Georef, RasterImage,
};
use skydeploy::geometry::{los_blocked, Building, Point2, Point3, Polygon, Region};
use skydeploy::scenario::{
    records_to_bytes, run_scenario, run_sweep, BuildingSource, Format, HeightRange, RunRecord,
    RunStatus, ScenarioConfig, ScenarioKind, Strategy, SweepParam, SweepSpec,
};
use skydeploy::Error;

use common::{random_convex, segment_hits_convex_prism, ChannelOracle};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_at(
    records: &[RunRecord],
    value: f64,
    f: impl Fn(&RunRecord) -> Option<f64>,
) -> (f64, usize) {
    let xs: Vec<f64> = records
        .iter()
        .filter(|r| r.swept_value == Some(value))
        .filter_map(f)
        .collect();
    (mean(&xs), xs.len())
}

// ---------------------------------------------------------------- 1

struct SmallInstance {
    region: Region,
    spacing: f64,
    altitudes: Vec<f64>,
    boxes: Vec<(f64, f64, f64, f64, f64)>,
    users: Vec<UserNode>,
    params: ChannelParams,
    m: usize,
}

fn in_box(p: (f64, f64), b: &(f64, f64, f64, f64, f64)) -> bool {
    p.0 >= b.0 && p.0 <= b.2 && p.1 >= b.1 && p.1 <= b.3
}

fn small_instance(seed: u64) -> SmallInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // all shapes have at most 12 lattice points
    let (w, h, altitudes) = match rng.gen_range(0..4) {
        0 => (60.0, 60.0, vec![50.0]),
        1 => (90.0, 60.0, vec![40.0]),
        2 => (60.0, 30.0, vec![35.0, 70.0]),
        _ => (30.0, 30.0, vec![30.0, 60.0, 90.0]),
    };
    let mut boxes = Vec::new();
    for _ in 0..rng.gen_range(0..3) {
        let x0 = rng.gen_range(0.0..w - 8.0);
        let y0 = rng.gen_range(0.0..h - 8.0);
        let bw = rng.gen_range(5.0f64..25.0).min(w - x0);
        let bh = rng.gen_range(5.0f64..25.0).min(h - y0);
        boxes.push((x0, y0, x0 + bw, y0 + bh, rng.gen_range(8.0..45.0)));
    }
    let mut users = Vec::new();
    let l = rng.gen_range(1..=6);
    while users.len() < l {
        let p = (rng.gen_range(0.0..w), rng.gen_range(0.0..h));
        if !boxes.iter().any(|b| in_box(p, b)) {
            users.push(UserNode::new(
                users.len(),
                Point2::new(p.0, p.1),
                rng.gen_range(1e6..2e7),
            ));
        }
    }
    let params = ChannelParams {
        sinr_threshold_db: rng.gen_range(-5.0..25.0),
        path_loss_exponent: [2.0, 2.5, 3.0][rng.gen_range(0..3)],
        nlos_penalty_db: rng.gen_range(10.0..30.0),
        ..ChannelParams::default()
    };
    SmallInstance {
        region: Region::new(w, h, Point2::new(0.0, 0.0)).unwrap(),
        spacing: 30.0,
        altitudes,
        boxes,
        users,
        params,
        m: rng.gen_range(1..=2),
    }
}

fn box_blocked(u: &UserNode, d: &Point3, boxes: &[(f64, f64, f64, f64, f64)]) -> bool {
    let a = Point3::new(u.position.x, u.position.y, 0.0);
    boxes.iter().any(|&(x0, y0, x1, y1, h)| {
        let ring = [
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ];
        segment_hits_convex_prism(a, *d, &ring, h)
    })
}

/// Best (covered, hover) over all `m`-subsets of the lattice, for the
/// coverage objective and for hover time among fully covering subsets.
fn enumerate(inst: &SmallInstance, m: usize) -> (usize, Option<f64>, usize) {
    let oracle = ChannelOracle::new(&inst.params);
    let mut cands = Vec::new();
    for &z in &inst.altitudes {
        let mut y = 0.0;
        while y <= inst.region.height + 1e-9 {
            let mut x = 0.0;
            while x <= inst.region.width + 1e-9 {
                if !inst.boxes.iter().any(|b| in_box((x, y), b)) {
                    cands.push(Point3::new(x, y, z));
                }
                x += inst.spacing;
            }
            y += inst.spacing;
        }
    }
    let los = |u: &UserNode, d: &Point3| !box_blocked(u, d, &inst.boxes);
    let mut best_cov = 0;
    let mut best_hover: Option<f64> = None;
    let mut subsets: Vec<Vec<Point3>> = Vec::new();
    for i in 0..cands.len() {
        if m == 1 {
            subsets.push(vec![cands[i]]);
        } else {
            for j in i + 1..cands.len() {
                subsets.push(vec![cands[i], cands[j]]);
            }
        }
    }
    for s in &subsets {
        let (c, t) = oracle.score(s, &inst.users, los);
        best_cov = best_cov.max(c);
        if c == inst.users.len() {
            best_hover = Some(best_hover.map_or(t, |b: f64| b.min(t)));
        }
    }
    (best_cov, best_hover, cands.len())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut max_nc = 0;
    for seed in 0..50u64 {
        let inst = small_instance(seed);
        let buildings: Vec<Building> = inst
            .boxes
            .iter()
            .map(|&(x0, y0, x1, y1, h)| {
                Building::new(Polygon::rect(x0, y0, x1, y1).unwrap(), h).unwrap()
            })
            .collect();
        let scene = Scene {
            region: inst.region,
            users: &inst.users,
            buildings: &buildings,
            params: &inst.params,
        };
        // the refinement lattice coincides with the candidate lattice
        let cfg = SearchConfig {
            grid_spacing: inst.spacing,
            altitudes: inst.altitudes.clone(),
            fine_spacing: inst.spacing,
            refine_radius: 4.0 * inst.spacing,
            ..SearchConfig::default()
        };
        let oracle = ChannelOracle::new(&inst.params);
        let los = |u: &UserNode, d: &Point3| !box_blocked(u, d, &inst.boxes);
        let (cov, hover, nc) = enumerate(&inst, inst.m);
        max_nc = max_nc.max(nc);
        if nc < inst.m {
            failures.push(format!("seed {seed}: instance has {nc} candidates"));
            continue;
        }

        let r = maximize_coverage(&scene, inst.m, &cfg).unwrap();
        let (got, _) = oracle.score(&r.placements, &inst.users, los);
        if got != cov || r.covered_count != cov {
            failures.push(format!(
                "seed {seed}: coverage {got}/{} vs {cov}",
                r.covered_count
            ));
        }

        let want_m = (1..=2).find(|&k| k <= nc && enumerate(&inst, k).0 == inst.users.len());
        match (min_drones_full_coverage(&scene, 2, &cfg), want_m) {
            (Ok(r), Some(k))
                if r.placements.len() == k
                    && oracle.score(&r.placements, &inst.users, los).0 == inst.users.len() => {}
            (Err(Error::InfeasibleCoverage(_)), None) => {}
            (got, want) => failures.push(format!(
                "seed {seed}: min drones {:?} vs {want:?}",
                got.map(|r| r.placements.len())
            )),
        }

        match (minimize_hover_time(&scene, inst.m, &cfg), hover) {
            (Ok(r), Some(best)) => {
                let (c, t) = oracle.score(&r.placements, &inst.users, los);
                if c != inst.users.len() || (t - best).abs() > 1e-9 * best {
                    failures.push(format!("seed {seed}: hover {t} vs {best}"));
                }
            }
            (Err(Error::InfeasibleCoverage(_)), None) => {}
            (got, want) => failures.push(format!(
                "seed {seed}: hover {:?} vs {want:?}",
                got.map(|r| r.total_hover)
            )),
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(60);
    let mut detail = format!(
        "50 instances (N_C <= {max_nc}), {} mismatches, {}",
        failures.len(),
        secs(elapsed)
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    outcome(pass, detail)
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let base = ScenarioConfig {
        buildings: BuildingSource::Campus,
        drones: 5,
        ..ScenarioConfig::default()
    };
    let sweep = SweepSpec {
        param: SweepParam::SinrThreshold,
        values: vec![2.0, 4.0, 6.0, 8.0],
        replications: 10,
    };
    let recs = run_sweep(&base, &sweep).unwrap();
    let means: Vec<f64> = sweep
        .values
        .iter()
        .map(|&v| mean_at(&recs, v, |r| Some(r.covered_fraction)).0)
        .collect();
    let non_increasing = means.windows(2).all(|w| w[1] <= w[0]);
    let drop = (means[0] - means[3]) / means[0];
    let elapsed = start.elapsed();
    outcome(
        non_increasing && drop >= 0.40 && elapsed < Duration::from_secs(300),
        format!(
            "mean coverage {:.3} {:.3} {:.3} {:.3} at 2/4/6/8 dB, drop {:.1}%, {}",
            means[0],
            means[1],
            means[2],
            means[3],
            100.0 * drop,
            secs(elapsed)
        ),
    )
}

// ---------------------------------------------------------------- 3, 4

/// Building-dense layout: twelve 20-35 m blocks in the 200 m square, with
/// a steeper path-loss exponent and a 30 dB blockage penalty.
fn dense_config() -> ScenarioConfig {
    ScenarioConfig {
        buildings: BuildingSource::Synthetic {
            count: 12,
            min_side: 20.0,
            max_side: 35.0,
            seed: None,
        },
        users: 100,
        channel: ChannelParams {
            path_loss_exponent: 3.5,
            nlos_penalty_db: 30.0,
            ..ChannelParams::default()
        },
        ..ScenarioConfig::default()
    }
}

fn criterion_3() -> Outcome {
    let mut base = dense_config();
    base.channel.sinr_threshold_db = 8.0;
    base.drones = 5;
    let mut wins = 0;
    let mut ratios = Vec::new();
    for seed in 1..=20u64 {
        let aware = ScenarioConfig {
            seed,
            ..base.clone()
        };
        let blind = ScenarioConfig {
            strategy: Strategy::Probabilistic,
            ..aware.clone()
        };
        let a = run_scenario(&aware).unwrap().record.covered_fraction;
        let b = run_scenario(&blind).unwrap().record.covered_fraction;
        if a >= b {
            wins += 1;
        }
        // one user's worth of coverage keeps the ratio finite
        ratios.push(a / b.max(1.0 / base.users as f64));
    }
    let ratio = mean(&ratios);
    outcome(
        wins >= 18 && ratio >= 1.3,
        format!("aware >= probabilistic in {wins}/20 pairs, mean coverage ratio {ratio:.3}"),
    )
}

fn criterion_4() -> Outcome {
    let base = dense_config();
    let sweep = SweepSpec {
        param: SweepParam::Drones,
        values: (1..=10).map(f64::from).collect(),
        replications: 10,
    };
    let recs = run_sweep(&base, &sweep).unwrap();
    let means: Vec<f64> = sweep
        .values
        .iter()
        .map(|&v| mean_at(&recs, v, |r| Some(r.covered_fraction)).0)
        .collect();
    let best = (0..means.len())
        .max_by(|&i, &j| means[i].total_cmp(&means[j]).then(j.cmp(&i)))
        .unwrap();
    let m_star = best + 1;
    let tail_decreasing = means[best..].windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.3}")).collect();
    outcome(
        m_star > 1 && m_star < 10 && tail_decreasing,
        format!(
            "M* = {m_star}; mean coverage for M=1..10: {}",
            shown.join(" ")
        ),
    )
}

// ---------------------------------------------------------------- 5, 6

fn criterion_5() -> Outcome {
    let base = ScenarioConfig {
        scenario: ScenarioKind::MinHover,
        buildings: BuildingSource::Synthetic {
            count: 4,
            min_side: 45.0,
            max_side: 60.0,
            seed: None,
        },
        building_heights: HeightRange {
            min: 20.0,
            max: 40.0,
        },
        channel: ChannelParams {
            nlos_penalty_db: 30.0,
            ..ChannelParams::default()
        },
        drones: 1,
        ..ScenarioConfig::default()
    };
    let sweep = SweepSpec {
        param: SweepParam::BuildingCount,
        values: vec![1.0, 2.0, 3.0, 4.0],
        replications: 10,
    };
    let recs = run_sweep(&base, &sweep).unwrap();
    let infeasible = recs
        .iter()
        .filter(|r| r.status == RunStatus::Infeasible)
        .count();
    let means: Vec<f64> = sweep
        .values
        .iter()
        .map(|&v| mean_at(&recs, v, |r| r.total_hover).0)
        .collect();
    let increasing = means.windows(2).all(|w| w[1] > w[0]);
    let growth = (means[3] - means[0]) / means[0];
    outcome(
        infeasible == 0 && increasing && growth >= 0.20,
        format!(
            "mean hover {:.1} {:.1} {:.1} {:.1} s for 1-4 buildings, +{:.1}%, {infeasible} infeasible runs",
            means[0],
            means[1],
            means[2],
            means[3],
            100.0 * growth
        ),
    )
}

fn criterion_6() -> Outcome {
    let base = ScenarioConfig {
        scenario: ScenarioKind::MinHover,
        channel: ChannelParams {
            sinr_threshold_db: 0.0,
            ..ChannelParams::default()
        },
        drones: 2,
        ..ScenarioConfig::default()
    };
    let mut feasible = 0;
    let mut wins = 0;
    let mut reductions = Vec::new();
    for seed in 1..=20u64 {
        let opt = ScenarioConfig {
            seed,
            ..base.clone()
        };
        let rnd = ScenarioConfig {
            strategy: Strategy::Random,
            ..opt.clone()
        };
        let a = run_scenario(&opt).unwrap().record.total_hover;
        let b = run_scenario(&rnd).unwrap().record.total_hover;
        if let (Some(a), Some(b)) = (a, b) {
            feasible += 1;
            if a <= b {
                wins += 1;
            }
            reductions.push(1.0 - a / b);
        }
    }
    let reduction = if reductions.is_empty() {
        0.0
    } else {
        mean(&reductions)
    };
    outcome(
        feasible > 0 && wins == feasible && reduction >= 0.40,
        format!(
            "optimized <= random in {wins}/{feasible} feasible pairs, mean reduction {:.1}%",
            100.0 * reduction
        ),
    )
}

// ---------------------------------------------------------------- 7

fn poly(pts: &[(f64, f64)]) -> Polygon {
    Polygon::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
    Polygon::rect(x0, y0, x1, y1).unwrap()
}

fn rotated_rect(cx: f64, cy: f64, w: f64, h: f64, deg: f64) -> Polygon {
    let (s, c) = deg.to_radians().sin_cos();
    poly(
        &[(-w, -h), (w, -h), (w, h), (-w, h)]
            .map(|(x, y)| (cx + 0.5 * (x * c - y * s), cy + 0.5 * (x * s + y * c))),
    )
}

fn disk(cx: f64, cy: f64, r: f64, n: usize) -> Polygon {
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let a = k as f64 * 2.0 * PI / n as f64;
            (cx + r * a.cos(), cy + r * a.sin())
        })
        .collect();
    poly(&pts)
}

/// Five 120 m map tiles at 0.5 m/px with roads, parks and water drawn in
/// other colors. Returns each tile with its true footprints.
fn map_corpus(cfg: &ExtractionConfig) -> Vec<(RasterImage, Vec<Polygon>)> {
    let tiles: Vec<Vec<Polygon>> = vec![
        vec![
            rect(10.0, 10.0, 45.0, 35.0),
            rect(60.0, 15.0, 110.0, 40.0),
            rect(20.0, 60.0, 50.0, 110.0),
            rect(70.0, 70.0, 100.0, 95.0),
        ],
        vec![
            poly(&[
                (15.0, 15.0),
                (75.0, 15.0),
                (75.0, 45.0),
                (45.0, 45.0),
                (45.0, 100.0),
                (15.0, 100.0),
            ]),
            rect(85.0, 60.0, 110.0, 110.0),
        ],
        vec![disk(45.0, 70.0, 30.0, 64), rect(85.0, 10.0, 110.0, 40.0)],
        vec![
            rotated_rect(60.0, 65.0, 60.0, 30.0, 25.0),
            rect(10.0, 10.0, 30.0, 25.0),
        ],
        vec![
            poly(&[
                (10.0, 10.0),
                (70.0, 10.0),
                (70.0, 60.0),
                (55.0, 60.0),
                (55.0, 25.0),
                (25.0, 25.0),
                (25.0, 60.0),
                (10.0, 60.0),
            ]),
            rect(80.0, 70.0, 110.0, 110.0),
            rect(15.0, 75.0, 50.0, 105.0),
        ],
    ];
    let g = Georef::new(0.5, Point2::new(0.0, 120.0)).unwrap();
    tiles
        .into_iter()
        .enumerate()
        .map(|(i, truth)| {
            let mut img = RasterImage::filled(240, 240, [242, 239, 233], g).unwrap();
            // roads, a park and a pond under the buildings
            let o = 3.0 * i as f64;
            img.fill_polygon(&rect(0.0, 50.0 + o, 120.0, 56.0 + o), [255, 255, 255]);
            img.fill_polygon(&rect(52.0 + o, 0.0, 58.0 + o, 120.0), [255, 255, 255]);
            img.fill_polygon(&rect(100.0, 0.0, 120.0, 8.0), [197, 232, 197]);
            img.fill_polygon(&disk(112.0, 55.0, 6.0, 24), [170, 218, 255]);
            for t in &truth {
                img.fill_polygon(t, cfg.color);
            }
            (img, truth)
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let cfg = ExtractionConfig::default();
    let mut worst_correct = f64::INFINITY;
    let mut fps = Vec::new();
    let mut buildings = 0;
    for (img, truth) in map_corpus(&cfg) {
        let out = extract_footprints(&img, &cfg).unwrap();
        let s = score_extraction(&out.polygons, &truth).unwrap();
        for b in &s.per_building {
            worst_correct = worst_correct.min(b.correct);
        }
        buildings += truth.len();
        fps.push(s.false_positive_fraction);
    }
    let fp = mean(&fps);
    let elapsed = start.elapsed();
    outcome(
        worst_correct >= 0.90 && fp <= 0.15 && elapsed < Duration::from_secs(30),
        format!(
            "{buildings} buildings on 5 tiles: worst per-building correct {:.3}, mean false positive {:.3}, {}",
            worst_correct,
            fp,
            secs(elapsed)
        ),
    )
}

// ---------------------------------------------------------------- 8

fn criterion_8() -> Outcome {
    let p = ChannelParams::default();
    let noise_dbm = 10.0 * (channel::noise_power(&p) * 1e3).log10();
    let at15 = channel::p_los(&p, 15f64.to_radians()).unwrap();
    let at90 = channel::p_los(&p, PI / 2.0).unwrap();
    let r = channel::rate_linear(&p, 1.0);
    let pass = (noise_dbm + 110.0).abs() <= 1e-9
        && at15 == 0.0
        && (at90 - 0.891).abs() <= 1e-3
        && r == 1e6;
    outcome(
        pass,
        format!(
            "noise {noise_dbm:.12} dBm, p_los(15) {at15}, p_los(90) {at90:.4}, rate(1) {r} bit/s"
        ),
    )
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut agree = 0;
    let mut blocked = 0;
    for _ in 0..100 {
        let fp = random_convex(&mut rng, 30.0, 70.0, 5.0, 25.0);
        let h = rng.gen_range(5.0..40.0);
        let u = Point3::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0), 0.0);
        let d = Point3::new(
            rng.gen_range(0.0..100.0),
            rng.gen_range(0.0..100.0),
            rng.gen_range(10.0..120.0),
        );
        let exact = segment_hits_convex_prism(u, d, fp.vertices(), h);
        let got = los_blocked(&u, &d, &[Building::new(fp, h).unwrap()], 1.0);
        agree += usize::from(exact == got);
        blocked += usize::from(exact);
    }
    outcome(
        agree == 100,
        format!("{agree}/100 agree with the exact prism test ({blocked} blocked)"),
    )
}

// ---------------------------------------------------------------- 10

fn criterion_10() -> Outcome {
    let base = ScenarioConfig {
        users: 60,
        ..ScenarioConfig::default()
    };
    let sweep = SweepSpec {
        param: SweepParam::SinrThreshold,
        values: vec![8.0, 2.0, 5.0],
        replications: 3,
    };
    let csv = |recs: &[RunRecord]| records_to_bytes(recs, Format::Csv, false).unwrap();
    let a = csv(&run_sweep(&base, &sweep).unwrap());
    let b = csv(&run_sweep(&base, &sweep).unwrap());
    let hover = ScenarioConfig {
        scenario: ScenarioKind::MinHover,
        channel: ChannelParams {
            sinr_threshold_db: 0.0,
            ..ChannelParams::default()
        },
        drones: 2,
        seed: 9,
        ..base.clone()
    };
    let one = |c: &ScenarioConfig| csv(&[run_scenario(c).unwrap().record]);
    let same_deploy = one(&hover) == one(&hover) && one(&base) == one(&base);
    outcome(
        a == b && same_deploy,
        format!(
            "sweep CSV {} bytes identical: {}, single-run CSV identical: {same_deploy}",
            a.len(),
            a == b
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("small-instance oracle equivalence", criterion_1),
        ("coverage falls with SINR threshold", criterion_2),
        ("building-aware beats probabilistic LoS", criterion_3),
        ("interior optimum in fleet size", criterion_4),
        ("hover time grows with obstacles", criterion_5),
        ("optimized hover beats random", criterion_6),
        ("footprint extraction accuracy", criterion_7),
        ("channel unit checks", criterion_8),
        ("LoS test matches exact prism oracle", criterion_9),
        ("byte-identical CSV on rerun", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
