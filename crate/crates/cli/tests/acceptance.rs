//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! printed.

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use genpauli::channel::{
    channel_from_eigenvalues, channel_from_probabilities, choi_matrix, eigenvalues_from_probabilities, fujiwara_verdict,
    probabilities_from_eigenvalues,
};
use genpauli::dynamics::{
    analyze, build_trajectory, build_trajectory_in, check_cptp_trajectory, check_p_necessary, check_p_sufficient,
    find_p_divisibility_witness, AnalysisConfig, DivisibilityReport, WitnessConfig,
};
use genpauli::linalg::ComplexMatrix;
use genpauli::mub::{commuting_classes, mub_family, weyl_basis, MubFamily, WeylIndex};
use genpauli::ratefn::{Preset, RateSet, DEFAULT_QUAD_TOL};
use genpauli::LinearMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut sizes_ok = true;
    let mut slowest: f64 = 0.0;
    for d in [2usize, 3, 5, 7] {
        let start = Instant::now();
        let fam = mub_family(d).unwrap();
        let rows = fam.cross_overlaps();
        slowest = slowest.max(start.elapsed().as_secs_f64());
        sizes_ok &= fam.len() == d + 1 && rows.len() == d * d * d * (d + 1) / 2;
        for (_, _, _, _, v) in rows {
            worst = worst.max((v - 1.0 / d as f64).abs());
        }
    }
    outcome(
        sizes_ok && worst <= 1e-12 && slowest < 1.0,
        format!("max | |<psi|phi>|^2 - 1/d | = {worst:.2e}, slowest build {slowest:.3} s"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in [2usize, 3, 5] {
        let w = weyl_basis(d).unwrap();
        let omega = w.omega();
        let di = d as i64;
        for k in 0..di {
            for l in 0..di {
                let wkl = w.get(k, l);
                let adj = w.get(-k, -l).scale(omega.powi(((k * l) % di) as i32));
                worst = worst.max(wkl.adjoint().max_abs_diff(&adj));
                for r in 0..di {
                    for s in 0..di {
                        let lhs = wkl * w.get(r, s);
                        let rhs = w.get(k + r, l + s).scale(omega.powi(((k * s) % di) as i32));
                        worst = worst.max(lhs.max_abs_diff(&rhs));
                    }
                }
            }
        }
    }
    let classes = commuting_classes(&weyl_basis(3).unwrap()).unwrap();
    let got: BTreeSet<BTreeSet<WeylIndex>> = classes.iter().map(|c| c.iter().copied().collect()).collect();
    let want: BTreeSet<BTreeSet<WeylIndex>> = [
        [(0, 1), (0, 2)],
        [(1, 0), (2, 0)],
        [(1, 1), (2, 2)],
        [(1, 2), (2, 1)],
    ]
    .into_iter()
    .map(|c| c.into_iter().collect())
    .collect();
    outcome(
        worst <= 1e-13 && got == want,
        format!("max entrywise deviation {worst:.2e}, d=3 classes match: {}", got == want),
    )
}

fn random_probabilities(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // Exponential spacings give a uniform point on the simplex.
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut eig_err: f64 = 0.0;
    let mut trip_err: f64 = 0.0;
    for d in [2usize, 3, 5] {
        let fam = Arc::new(mub_family(d).unwrap());
        let powers: Vec<Vec<ComplexMatrix>> = (1..=d + 1)
            .map(|a| {
                let u = fam.unitary(a).unwrap();
                (1..d).map(|k| u.pow(k)).collect()
            })
            .collect();
        for _ in 0..500 {
            let p = random_probabilities(&mut rng, d + 2);
            let ch = channel_from_probabilities(&fam, &p).unwrap();
            for (a, us) in powers.iter().enumerate() {
                let lambda = ch.eigenvalues()[a];
                for uk in us {
                    let out = ch.apply(uk).unwrap();
                    eig_err = eig_err.max(out.max_abs_diff(&uk.scale_real(lambda)));
                }
            }
            let back = probabilities_from_eigenvalues(d, &eigenvalues_from_probabilities(d, &p));
            for (x, y) in p.iter().zip(&back) {
                trip_err = trip_err.max((x - y).abs());
            }
        }
    }
    outcome(
        eig_err <= 1e-11 && trip_err <= 1e-12,
        format!("eigen-relation error {eig_err:.2e}, p->lambda->p error {trip_err:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut disagreements = 0;
    let mut tested = 0;
    let mut cp_count = 0;
    for d in [2usize, 3, 5] {
        let fam = Arc::new(mub_family(d).unwrap());
        let mut done = 0;
        while done < 1000 {
            let l: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v = fujiwara_verdict(d, &l);
            if v.margin.abs() < 1e-8 {
                continue;
            }
            done += 1;
            let choi = choi_matrix(&channel_from_eigenvalues(&fam, &l).unwrap());
            if choi.is_positive() != v.is_cp {
                disagreements += 1;
            }
            cp_count += v.is_cp as usize;
            tested += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        disagreements == 0 && secs < 30.0,
        format!("{tested} vectors ({cp_count} CP), {disagreements} disagreements, {secs:.2} s"),
    )
}

fn criterion_5() -> Outcome {
    let traj = build_trajectory(&Preset::EternalQubit.rate_set().unwrap(), 5.0, 400).unwrap();
    let mut lam_err: f64 = 0.0;
    let mut gamma_err: f64 = 0.0;
    for i in 0..traj.len() {
        let t = traj.grid()[i];
        let e = (-2.0 * t).exp();
        let expected = [(1.0 + e) / 2.0, (1.0 + e) / 2.0, e];
        for (a, b) in traj.lambdas(i).iter().zip(expected) {
            lam_err = lam_err.max((a - b).abs());
        }
        gamma_err = gamma_err.max((traj.integrals(i)[2] + t.cosh().ln()).abs());
    }
    outcome(
        traj.len() == 401 && lam_err <= 1e-9 && gamma_err <= 1e-9,
        format!("max lambda error {lam_err:.2e}, max |Gamma_3 + ln cosh t| {gamma_err:.2e}"),
    )
}

fn seeded_config(seed: u64) -> AnalysisConfig {
    AnalysisConfig {
        witness: WitnessConfig {
            seed,
            ..WitnessConfig::default()
        },
        ..AnalysisConfig::default()
    }
}

fn criterion_6() -> Outcome {
    let traj = build_trajectory(&Preset::EternalGeneral { dim: 3 }.rate_set().unwrap(), 5.0, 400).unwrap();
    let report = analyze(&traj, &seeded_config(42));
    let two_negative = report.negative_rates.iter().skip(1).all(|&n| n == 2);
    let mut margin_err: f64 = 0.0;
    for (i, m) in report.p_necessary.margins.iter().enumerate() {
        margin_err = margin_err.max((m.unwrap() - (1.0 - traj.grid()[i].tanh())).abs());
    }
    outcome(
        two_negative && report.cp_map_valid.holds() && report.p_necessary.holds() && margin_err <= 1e-9,
        format!(
            "two negative rates for t > 0: {two_negative}, cp trajectory {}, p_necessary {}, margin error {margin_err:.2e}",
            report.cp_map_valid.status, report.p_necessary.status
        ),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let rates = Preset::AvgDecoherence { dim: 3 }.rate_set().unwrap();
    let traj = build_trajectory(&rates, 5.0, 400).unwrap();
    let report = analyze(&traj, &seeded_config(42));
    let secs = start.elapsed().as_secs_f64();
    let suf = &report.p_sufficient;
    let crossing = suf.crossing_time;
    let crossing_ok = crossing.is_some_and(|ts| {
        let g = rates.evaluate(ts).unwrap();
        let before = rates.evaluate(ts - 1e-6).unwrap();
        let after = rates.evaluate(ts + 1e-6).unwrap();
        (g[0] + 2.0 * g[3]).abs() < 1e-9
            && before[0] + 2.0 * before[3] > 0.0
            && after[0] + 2.0 * after[3] < 0.0
            && suf.violations.iter().all(|v| v.time > ts)
            && suf.violations.last().is_some_and(|v| v.index == traj.len() - 1)
    });
    let magnitude = report.trace_norm_witness.witness.as_ref().map(|w| w.magnitude);
    outcome(
        report.p_necessary.holds()
            && suf.is_violated()
            && crossing_ok
            && magnitude.is_some_and(|m| m > 1e-9)
            && secs < 120.0,
        format!(
            "p_necessary {}, p_sufficient {} with t* = {}, witness magnitude {}, back-flow {} (recorded only), {secs:.1} s",
            report.p_necessary.status,
            suf.status,
            crossing.map_or("none".into(), |t| format!("{t:.12}")),
            magnitude.map_or("none".into(), |m| format!("{m:.3e}")),
            report.blp_witness.status,
        ),
    )
}

fn random_rates(rng: &mut ChaCha8Rng, d: usize) -> Vec<String> {
    (0..=d)
        .map(|_| {
            let a: f64 = rng.random_range(-0.5..1.5);
            let b: f64 = rng.random_range(-1.5..1.0);
            let c: f64 = rng.random_range(0.2..3.0);
            format!("{a} + {b}*tanh({c}*t)")
        })
        .collect()
}

fn preset_runs() -> Vec<RateSet> {
    vec![
        Preset::EternalQubit.rate_set().unwrap(),
        Preset::EternalGeneral { dim: 3 }.rate_set().unwrap(),
        Preset::EternalGeneral { dim: 5 }.rate_set().unwrap(),
        Preset::AvgDecoherence { dim: 2 }.rate_set().unwrap(),
        Preset::AvgDecoherence { dim: 3 }.rate_set().unwrap(),
        Preset::AvgDecoherence { dim: 5 }.rate_set().unwrap(),
        Preset::Semigroup { rates: vec![1.0, 1.0, 1.0] }.rate_set().unwrap(),
        Preset::Semigroup { rates: vec![0.2, 1.0, 0.0, 3.0] }.rate_set().unwrap(),
    ]
}

fn criterion_8() -> Outcome {
    let mut failures: Vec<String> = Vec::new();
    let mut runs = 0;
    let mut check = |report: &DivisibilityReport, label: String| {
        runs += 1;
        if !report.hierarchy.consistent {
            failures.push(format!("{label}: {:?}", report.hierarchy.failures));
        }
    };
    for rates in preset_runs() {
        let traj = build_trajectory(&rates, 5.0, 200).unwrap();
        let label = format!("preset {:?}", rates.rates().iter().map(|r| r.source()).collect::<Vec<_>>());
        check(&analyze(&traj, &seeded_config(42)), label);
    }
    let mut stats = [0usize; 3];
    for d in [2usize, 3] {
        let fam = Arc::new(mub_family(d).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(800 + d as u64);
        for k in 0..200 {
            let src = random_rates(&mut rng, d);
            let rates = RateSet::parse(d, &src).unwrap();
            let traj = build_trajectory_in(&fam, &rates, 2.0, 60, DEFAULT_QUAD_TOL).unwrap();
            let report = analyze(&traj, &seeded_config(k));
            stats[0] += report.cp_divisible.holds() as usize;
            stats[1] += report.p_sufficient.holds() as usize;
            stats[2] += report.trace_norm_witness.found() as usize;
            check(&report, format!("d={d} seed={k} rates={src:?}"));
        }
    }
    for f in &failures {
        println!("    hierarchy failure: {f}");
    }
    outcome(
        failures.is_empty(),
        format!(
            "{runs} runs, {} inconsistent (random sets: {} CP-divisible, {} sufficient holds, {} with witness)",
            failures.len(),
            stats[0],
            stats[1],
            stats[2]
        ),
    )
}

fn criterion_9() -> Outcome {
    let fam: Arc<MubFamily> = Arc::new(mub_family(2).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut good, mut bad) = (0usize, 0usize);
    let (mut false_alarms, mut detected) = (0usize, 0usize);
    let mut misses: Vec<String> = Vec::new();
    let mut k = 0u64;
    while good < 200 || bad < 200 {
        let src = random_rates(&mut rng, 2);
        let rates = RateSet::parse(2, &src).unwrap();
        let traj = build_trajectory_in(&fam, &rates, 2.0, 100, DEFAULT_QUAD_TOL).unwrap();
        let holds = check_p_necessary(&traj).holds();
        if (holds && good >= 200) || (!holds && bad >= 200) {
            continue;
        }
        k += 1;
        let search = find_p_divisibility_witness(
            &traj,
            &WitnessConfig {
                seed: k,
                ..WitnessConfig::default()
            },
        );
        if holds {
            good += 1;
            if search.found() {
                false_alarms += 1;
                misses.push(format!("false witness: seed={k} rates={src:?}"));
            }
        } else {
            bad += 1;
            if search.found() {
                detected += 1;
            } else {
                misses.push(format!("missed: seed={k} rates={src:?}"));
            }
        }
    }
    for m in &misses {
        println!("    {m}");
    }
    let rate = detected as f64 / bad as f64;
    outcome(
        false_alarms == 0 && rate >= 0.95,
        format!("{good} satisfying sets: {false_alarms} witnesses; {bad} violating sets: {detected} detected ({:.1}%)", 100.0 * rate),
    )
}

fn run_cli(args: &[&str], out: Option<&std::path::Path>) -> (Vec<u8>, Vec<(String, Vec<u8>)>) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_genpauli"));
    cmd.args(args);
    if let Some(dir) = out {
        cmd.arg("--out").arg(dir);
    }
    let output = cmd.output().expect("binary runs");
    assert!(output.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&output.stderr));
    let mut files = Vec::new();
    if let Some(dir) = out {
        let mut names: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        names.sort();
        for p in names {
            files.push((p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()));
        }
    }
    (output.stdout, files)
}

fn criterion_10() -> Outcome {
    let commands: Vec<Vec<&str>> = vec![
        vec!["mub", "--d", "5"],
        vec!["mub", "--d", "3", "--format", "csv"],
        vec!["channel", "--d", "3", "--lambdas", "0.5,-0.2,0.1,0.3"],
        vec!["channel", "--d", "2", "--probs", "0.4,0.3,0.2,0.1", "--format", "csv"],
        vec!["presets", "list"],
        vec!["dynamics", "--preset", "eternal-qubit", "--t-max", "5", "--steps", "400"],
        vec!["dynamics", "--preset", "avg-decoherence", "--d", "3", "--steps", "100", "--format", "csv"],
        vec!["dynamics", "--preset", "avg-decoherence", "--d", "3", "--seed", "7", "--steps", "100"],
        vec!["dynamics", "--d", "2", "--gamma", "1", "--gamma", "0.3", "--gamma", "-tanh(2*t)"],
    ];
    let mut mismatches = Vec::new();
    for args in &commands {
        let (a, _) = run_cli(args, None);
        let (b, _) = run_cli(args, None);
        if a != b || a.is_empty() {
            mismatches.push(args.join(" "));
        }
    }
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let args = ["dynamics", "--preset", "eternal-general", "--d", "3", "--steps", "120"];
    let (_, fa) = run_cli(&args, Some(dirs[0].path()));
    let (_, fb) = run_cli(&args, Some(dirs[1].path()));
    if fa != fb || fa.len() != 2 {
        mismatches.push(format!("{} --out", args.join(" ")));
    }
    outcome(
        mismatches.is_empty(),
        format!("{} invocations run twice, mismatches: {mismatches:?}", commands.len() + 1),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("MUB construction", criterion_1),
        ("Weyl algebra and d=3 classes", criterion_2),
        ("channel spectral identities", criterion_3),
        ("CP oracle equivalence", criterion_4),
        ("eternal-qubit reproduction", criterion_5),
        ("eternal-general(d=3)", criterion_6),
        ("avg-decoherence(d=3)", criterion_7),
        ("logical hierarchy", criterion_8),
        ("d=2 sufficiency", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut all = true;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        all &= o.pass;
        println!(
            "criterion {:>2} [{}] {name}: {} ({:.1} s)",
            n + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    let traj = build_trajectory(&Preset::AvgDecoherence { dim: 3 }.rate_set().unwrap(), 5.0, 400).unwrap();
    let cptp = check_cptp_trajectory(&traj).holds();
    let suf = check_p_sufficient(&traj).is_violated();
    println!("avg-decoherence(d=3) cp trajectory holds: {cptp}, sufficient condition violated: {suf}");
    if all {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
