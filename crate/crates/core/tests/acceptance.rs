//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::f64::consts::{PI, SQRT_2};
use std::time::{Duration, Instant};

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqshare_core::bell::{builtin, lhv_bound_exact, Inequality};
use seqshare_core::measure::{
    decohere_channel, luders_update_b, quality_factor, uniform_weights, Direction, Outcome,
    UnsharpMeasurement,
};
use seqshare_core::optimize::{max_bobs, sharing_margin, sharing_margin_fixed, OptimizerConfig};
use seqshare_core::qcore::{eigenvalues_hermitian4, ComplexMat4};
use seqshare_core::robustness::{threshold, SettingsPolicy, ThresholdKind};
use seqshare_core::seqchain::{
    analytic_value_vector, bob_table, preset, value_vector, Scenario, PRESET_NAMES,
};
use seqshare_core::states::{make_state, StateSpec};

const SEED: u64 = 20_150_625;
const RESTARTS: usize = 400;
const QUANTUM_MAX_TOL: f64 = 1e-3;
const REPLAY_TOL: f64 = 0.05;
const THRESHOLD_TOL: f64 = 0.02;
const CHANNEL_TOL: f64 = 1e-12;
const ANALYTIC_TOL: f64 = 1e-8;
const PROPERTY_SAMPLES: usize = 1000;

const TABLE_MAX_BOBS: [(Inequality, usize); 10] = [
    (Inequality::Chsh, 2),
    (Inequality::Chain3, 2),
    (Inequality::Gisin3, 1),
    (Inequality::I3322, 1),
    (Inequality::Chain4, 1),
    (Inequality::Gisin4, 2),
    (Inequality::Dzc, 2),
    (Inequality::Bg, 2),
    (Inequality::Aiig1, 2),
    (Inequality::Aiig2, 2),
];

const TABLE_C_MIN: [(Inequality, f64); 7] = [
    (Inequality::Chsh, 0.76),
    (Inequality::Chain3, 0.92),
    (Inequality::Gisin4, 0.91),
    (Inequality::Dzc, 0.82),
    (Inequality::Bg, 0.82),
    (Inequality::Aiig1, 0.84),
    (Inequality::Aiig2, 0.82),
];

const TABLE_W_MIN: [(Inequality, f64); 7] = [
    (Inequality::Chsh, 0.89),
    (Inequality::Chain3, 0.97),
    (Inequality::Gisin4, 0.96),
    (Inequality::Dzc, 0.95),
    (Inequality::Bg, 0.96),
    (Inequality::Aiig1, 0.93),
    (Inequality::Aiig2, 0.96),
];

fn cfg() -> OptimizerConfig {
    OptimizerConfig {
        restarts: RESTARTS,
        seed: SEED,
        ..Default::default()
    }
}

struct Report {
    failed: Vec<String>,
    pending: Vec<String>,
}

impl Report {
    fn line(&mut self, id: &str, title: &str, pass: bool, elapsed: Duration) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("{verdict} [{id}] {title} ({:.1}s)", elapsed.as_secs_f64());
        for text in self.pending.drain(..) {
            println!("       {text}");
        }
        if !pass {
            self.failed.push(id.to_string());
        }
    }

    fn detail(&mut self, text: impl Into<String>) {
        self.pending.push(text.into());
    }
}

fn criterion_1(r: &mut Report) {
    let t = Instant::now();
    let mut ok = true;
    for which in Inequality::ALL {
        let bound = lhv_bound_exact(&builtin(which)).expect("enumerable");
        let declared = Rational64::from_integer(which.declared_bound());
        ok &= bound == declared;
        r.detail(format!(
            "{:7} enumerated {bound:>3} declared {declared:>3}",
            which.name()
        ));
    }
    let elapsed = t.elapsed();
    ok &= elapsed < Duration::from_secs(1);
    r.line(
        "1",
        "classical bounds by exhaustive enumeration, exact",
        ok,
        elapsed,
    );
}

fn criterion_2(r: &mut Report) {
    let t = Instant::now();
    let mut ok = true;
    let expected = [
        (Inequality::Chsh, 2.0 * SQRT_2),
        (Inequality::Chain3, 6.0 * (PI / 6.0).cos()),
        (Inequality::Chain4, 8.0 * (PI / 8.0).cos()),
    ];
    for (which, closed) in expected {
        let f = builtin(which);
        let oracle = common::planar_singlet_max(&f);
        let res = sharing_margin(StateSpec::Singlet, &f, 1, &cfg()).expect("optimizer");
        let found = res.values.values[0];
        let pass = (found - oracle).abs() <= QUANTUM_MAX_TOL && (oracle - closed).abs() <= 1e-9;
        ok &= pass;
        r.detail(format!(
            "{:7} optimizer {found:.6} oracle {oracle:.6} closed form {closed:.6}",
            which.name()
        ));
    }
    let elapsed = t.elapsed();
    ok &= elapsed < Duration::from_secs(60);
    r.line(
        "2",
        "sharp single-Bob maxima against the planar grid oracle",
        ok,
        elapsed,
    );
}

fn criterion_3(r: &mut Report) {
    let t = Instant::now();
    let mut ok = true;
    for name in PRESET_NAMES {
        let p = preset(name).expect("preset");
        let v = value_vector(&p.scenario).expect("valid preset");
        let pass = v
            .values
            .iter()
            .zip(&p.expected)
            .all(|(a, b)| (a - b).abs() <= REPLAY_TOL);
        ok &= pass;
        r.detail(format!(
            "{name:18} values {:?} expected {:?}",
            rounded(&v.values),
            p.expected
        ));
    }
    let elapsed = t.elapsed();
    ok &= elapsed < Duration::from_secs(1);
    r.line("3", "published settings replay", ok, elapsed);
}

fn rounded(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e4).round() / 1e4).collect()
}

fn criterion_4(r: &mut Report) {
    let t = Instant::now();
    let mut ok = true;
    for (which, expected) in TABLE_MAX_BOBS {
        let f = builtin(which);
        let res = max_bobs(StateSpec::Singlet, &f, &cfg(), 4).expect("optimizer");
        let mut evidence = true;
        for step in &res.per_k {
            if step.feasible {
                let again = value_vector(&step.best_scenario).expect("witness");
                evidence &= again.all_violate() && again == step.values;
            } else {
                evidence &= step.margin < 0.0 && step.restarts >= 400;
            }
        }
        let pass = res.max_bobs == expected && evidence;
        ok &= pass;
        let margins: Vec<String> = res
            .per_k
            .iter()
            .map(|s| format!("k={} {:+.2e}", s.k, s.margin))
            .collect();
        r.detail(format!(
            "{:7} max Bobs {} expected {} [{}]{}",
            which.name(),
            res.max_bobs,
            expected,
            margins.join(", "),
            if pass { "" } else { "  <- mismatch" }
        ));
    }
    r.line(
        "4",
        "maximum number of Bobs on the singlet",
        ok,
        t.elapsed(),
    );
}

fn criterion_5(r: &mut Report) {
    let t = Instant::now();
    let f = builtin(Inequality::Chain3);
    let mut ok = true;
    for lambda in [0.77, 0.84] {
        let res = sharing_margin_fixed(
            StateSpec::Singlet,
            &f,
            vec![Some(lambda), Some(1.0)],
            &cfg(),
        )
        .expect("optimizer");
        let verified = value_vector(&res.best_scenario)
            .expect("witness")
            .all_violate();
        ok &= res.feasible && verified;
        r.detail(format!(
            "lambda_1 = {lambda}: margin {:+.4e} values {:?}",
            res.margin,
            rounded(&res.values.values)
        ));
    }
    r.line(
        "5",
        "chain3 two-Bob witnesses at lambda_1 = 0.77 and 0.84",
        ok,
        t.elapsed(),
    );
}

fn thresholds(
    r: &mut Report,
    id: &str,
    title: &str,
    kind: ThresholdKind,
    policy: SettingsPolicy,
    table: &[(Inequality, f64)],
) {
    let t = Instant::now();
    let mut within = true;
    let mut found = Vec::new();
    for &(which, published) in table {
        let res = threshold(&builtin(which), kind, policy, &cfg()).expect("threshold");
        let pass = (res.threshold - published).abs() <= THRESHOLD_TOL;
        within &= pass;
        r.detail(format!(
            "{:7} {:.4} bracket ({:.4}, {:.4}) published {published:.2}{}",
            which.name(),
            res.threshold,
            res.bracket.0,
            res.bracket.1,
            if pass { "" } else { "  <- outside tolerance" }
        ));
        found.push((which, res.threshold));
    }
    let chsh = found
        .iter()
        .find(|(w, _)| *w == Inequality::Chsh)
        .map(|p| p.1)
        .expect("chsh row");
    let ordered = found
        .iter()
        .all(|&(w, v)| w == Inequality::Chsh || chsh < v);
    r.detail(format!("chsh strictly most robust: {ordered}"));
    r.line(id, title, within && ordered, t.elapsed());
}

fn random_direction(rng: &mut ChaCha8Rng) -> Direction {
    Direction::new(
        rng.random_range(0.0..PI),
        rng.random_range(0.0..std::f64::consts::TAU),
    )
}

fn random_state(rng: &mut ChaCha8Rng) -> StateSpec {
    match rng.random_range(0..3) {
        0 => StateSpec::Singlet,
        1 => StateSpec::Schmidt {
            alpha: rng.random_range(0.0..std::f64::consts::FRAC_PI_2),
        },
        _ => StateSpec::Werner {
            w: rng.random_range(0.0..=1.0),
        },
    }
}

fn random_scenario(rng: &mut ChaCha8Rng, state: StateSpec) -> Scenario {
    let f = builtin(Inequality::ALL[rng.random_range(0..Inequality::ALL.len())]);
    let bobs = rng.random_range(1..=4);
    let mut lambdas: Vec<f64> = (1..bobs).map(|_| rng.random_range(0.02..=1.0)).collect();
    lambdas.push(1.0);
    Scenario {
        state,
        alice_dirs: (0..f.n_alice()).map(|_| random_direction(rng)).collect(),
        bob_dirs: (0..bobs)
            .map(|_| (0..f.n_bob()).map(|_| random_direction(rng)).collect())
            .collect(),
        functional: f,
        lambdas,
    }
}

fn criterion_8(r: &mut Report) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checks: Vec<(&str, bool)> = Vec::new();

    let mut channel_ok = true;
    let mut trace_ok = true;
    for _ in 0..PROPERTY_SAMPLES / 4 {
        let rho = make_state(&random_state(&mut rng)).expect("state");
        let ms: Vec<UnsharpMeasurement> = (0..rng.random_range(1..=4))
            .map(|_| {
                UnsharpMeasurement::new(random_direction(&mut rng), rng.random_range(0.01..=1.0))
                    .expect("lambda")
            })
            .collect();
        let w = uniform_weights(ms.len());
        let channel = decohere_channel(&rho, &ms, &w).expect("channel");
        let mut sum = ComplexMat4::zeros();
        for (m, wi) in ms.iter().zip(&w) {
            for o in Outcome::BOTH {
                if let Ok((p, post)) = luders_update_b(&rho, m, o) {
                    sum = sum + post.matrix().scale_re(p * wi);
                    trace_ok &= (post.matrix().trace().re - 1.0).abs() < 1e-12
                        && eigenvalues_hermitian4(post.matrix())
                            .iter()
                            .all(|&e| e > -1e-10);
                }
            }
        }
        channel_ok &= channel.matrix().approx_eq(&sum, CHANNEL_TOL);
        trace_ok &= (channel.matrix().trace().re - 1.0).abs() < 1e-12;
    }
    checks.push(("channel equals averaged Lüders branches", channel_ok));
    checks.push(("trace and positivity preserved", trace_ok));

    let mut analytic_ok = true;
    for _ in 0..PROPERTY_SAMPLES {
        let s = random_scenario(&mut rng, StateSpec::Singlet);
        let dm = value_vector(&s).expect("density path");
        let an = analytic_value_vector(&s).expect("analytic path");
        analytic_ok &= dm
            .values
            .iter()
            .zip(&an.values)
            .all(|(a, b)| (a - b).abs() <= ANALYTIC_TOL);
    }
    checks.push((
        "analytic singlet path equals density matrices on 1000 scenarios",
        analytic_ok,
    ));

    let identity_ok = (0..=1000).all(|i| {
        let l = i as f64 / 1000.0;
        let f = quality_factor(l);
        (f * f + l * l - 1.0).abs() < 1e-12
    });
    checks.push(("F^2 + G^2 = 1", identity_ok));

    let mut werner_ok = true;
    for _ in 0..PROPERTY_SAMPLES / 10 {
        let s = random_scenario(&mut rng, StateSpec::Singlet);
        let w = rng.random_range(0.0..=1.0);
        let base = bob_table(&s, 1).expect("table");
        let mixed = bob_table(
            &Scenario {
                state: StateSpec::Werner { w },
                ..s
            },
            1,
        )
        .expect("table");
        werner_ok &= base
            .corr
            .iter()
            .flatten()
            .zip(mixed.corr.iter().flatten())
            .all(|(a, b)| (w * a - b).abs() < 1e-12);
    }
    checks.push(("Werner first-Bob correlators linear in w", werner_ok));

    let mut perm_ok = true;
    for _ in 0..PROPERTY_SAMPLES / 10 {
        let state = random_state(&mut rng);
        let s = random_scenario(&mut rng, state);
        if s.bob_count() < 2 {
            continue;
        }
        let mut p = s.clone();
        p.bob_dirs[0].reverse();
        let a = bob_table(&s, 2).expect("table");
        let b = bob_table(&p, 2).expect("table");
        perm_ok &= a
            .corr
            .iter()
            .flatten()
            .zip(b.corr.iter().flatten())
            .all(|(x, y)| (x - y).abs() < 1e-12);
    }
    checks.push((
        "earlier Bob's setting order does not affect later Bobs",
        perm_ok,
    ));

    let quick = OptimizerConfig {
        restarts: 16,
        seed: SEED,
        ..Default::default()
    };
    let run = || {
        let res = sharing_margin(
            StateSpec::Werner { w: 0.97 },
            &builtin(Inequality::Chain3),
            2,
            &quick,
        )
        .expect("run");
        serde_json::to_string(&res).expect("json")
    };
    checks.push((
        "identical seeds give byte-identical results",
        run() == run(),
    ));

    let mut ok = true;
    for (name, pass) in checks {
        r.detail(format!("{} {name}", if pass { "ok  " } else { "FAIL" }));
        ok &= pass;
    }
    r.line("8", "property suites", ok, t.elapsed());
}

fn main() {
    let mut r = Report {
        failed: Vec::new(),
        pending: Vec::new(),
    };
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_8(&mut r);
    criterion_5(&mut r);
    criterion_4(&mut r);
    thresholds(
        &mut r,
        "6a",
        "concurrence thresholds, free settings",
        ThresholdKind::Concurrence,
        SettingsPolicy::Free,
        &TABLE_C_MIN,
    );
    thresholds(
        &mut r,
        "6b",
        "concurrence thresholds, singlet-witness settings",
        ThresholdKind::Concurrence,
        SettingsPolicy::SingletFrozen,
        &TABLE_C_MIN,
    );
    thresholds(
        &mut r,
        "7a",
        "Werner thresholds, free settings",
        ThresholdKind::WernerW,
        SettingsPolicy::Free,
        &TABLE_W_MIN,
    );
    thresholds(
        &mut r,
        "7b",
        "Werner thresholds, singlet-witness settings",
        ThresholdKind::WernerW,
        SettingsPolicy::SingletFrozen,
        &TABLE_W_MIN,
    );
    if r.failed.is_empty() {
        println!("all acceptance criteria passed");
    } else {
        println!("failed criteria: {}", r.failed.join(", "));
        std::process::exit(1);
    }
}
