//! Acceptance suite. Each test prints one PASS line when its criterion
//! holds; run with `cargo test -p rwca-cli --test acceptance`.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use rwca_core::test_support::{
    cost239_dest1_instance, random_small_instance, toy5_instance, SmallInstanceSpec,
};
use rwca_core::{
    brute_force_optimum, solve_exact, solve_heuristic, validate, Coupling, Instance, Mode,
    OracleLimits, RuleId, SolveConfig, Status,
};

fn rwca(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rwca"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data_file(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn all_configs() -> Vec<SolveConfig> {
    vec![
        SolveConfig::new(Mode::Bypass),
        SolveConfig::new(Mode::Bypass).with_coupling(Coupling::PerSegment),
        SolveConfig::new(Mode::Occin),
        SolveConfig::new(Mode::Occin).with_coupling(Coupling::PerSegment),
    ]
}

#[test]
fn criterion_1_toy_reproduction() {
    let start = Instant::now();
    let instance = toy5_instance(3);

    let bypass = solve_exact(&instance, &SolveConfig::new(Mode::Bypass));
    assert_eq!(bypass.status, Status::Optimal);
    assert_eq!(
        (bypass.wavelength_count, bypass.wavelength_link_units),
        (2, 6),
        "bypass spectral cost"
    );

    let occin = solve_exact(&instance, &SolveConfig::new(Mode::Occin));
    assert_eq!(occin.status, Status::Optimal);
    assert_eq!(
        (occin.wavelength_count, occin.wavelength_link_units),
        (1, 4),
        "occin spectral cost"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "PASS: criterion 1 - toy instance: bypass (2, 6), occin (1, 4) in {elapsed:?}"
    );
}

#[test]
fn criterion_2_cost239_reproduction() {
    let start = Instant::now();
    let instance = cost239_dest1_instance(4);

    let bypass = solve_exact(&instance, &SolveConfig::new(Mode::Bypass));
    assert_eq!(bypass.status, Status::Optimal);
    assert_eq!(bypass.wavelength_count, 3, "bypass optimum");

    let occin = solve_exact(&instance, &SolveConfig::new(Mode::Occin));
    assert_eq!(occin.status, Status::Optimal);
    assert_eq!(occin.wavelength_count, 2, "occin optimum");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "took {elapsed:?}");
    println!(
        "PASS: criterion 2 - cost239 destination 1: bypass 3, occin 2 in {elapsed:?}"
    );
}

/// Sweep rows as (dest, in_degree, bypass_lambda, occin_lambda).
fn run_sweep(seed: u64) -> Vec<(usize, usize, usize, usize)> {
    let out = rwca(&["bench-sweep", "--seed", &seed.to_string(), "--deterministic"]);
    assert!(out.status.success(), "sweep failed: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("dest,") {
            continue;
        }
        let cells: Vec<usize> =
            line.split(',').map(|c| c.parse().expect("numeric cell")).collect();
        rows.push((cells[0], cells[1], cells[2], cells[3]));
    }
    assert_eq!(rows.len(), 11, "one row per destination");
    rows
}

#[test]
fn criterion_3_sweep_dominance() {
    let rows = run_sweep(42);
    for (dest, _, bypass, occin) in &rows {
        assert!(occin <= bypass, "destination {dest}: occin {occin} > bypass {bypass}");
    }
    println!("PASS: criterion 3 - occin never needs more wavelengths across all 11 destinations");
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation; 0 when either side has no variance (a flat
/// series carries no trend either way).
fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx.sqrt() * vy.sqrt())
}

#[test]
fn criterion_4_degree_trend() {
    let rows = run_sweep(42);
    let degrees: Vec<f64> = rows.iter().map(|r| r.1 as f64).collect();
    let bypass: Vec<f64> = rows.iter().map(|r| r.2 as f64).collect();
    let occin: Vec<f64> = rows.iter().map(|r| r.3 as f64).collect();
    let rho_bypass = spearman(&degrees, &bypass);
    let rho_occin = spearman(&degrees, &occin);
    assert!(rho_bypass <= 0.0, "bypass trend {rho_bypass}");
    assert!(rho_occin <= 0.0, "occin trend {rho_occin}");
    println!(
        "PASS: criterion 4 - wavelengths fall with destination degree \
         (spearman bypass {rho_bypass:.3}, occin {rho_occin:.3})"
    );
}

#[test]
fn criterion_5_oracle_equivalence() {
    let limits = OracleLimits::default();
    let spec = SmallInstanceSpec::default();
    let mut checked = 0;
    for seed in 0..110 {
        let instance = random_small_instance(seed, &spec);
        for cfg in all_configs() {
            let solved = solve_exact(&instance, &cfg);
            let got = match solved.status {
                Status::Optimal => Some(solved.wavelength_count),
                Status::Infeasible => None,
                other => panic!("seed {seed}: unexpected status {other:?}"),
            };
            let want = brute_force_optimum(&instance, &cfg, &limits).unwrap();
            assert_eq!(
                got, want,
                "seed {seed} mode {:?} coupling {:?}",
                cfg.mode, cfg.coupling
            );
            checked += 1;
        }
    }
    println!(
        "PASS: criterion 5 - exact solver matches the brute-force oracle on \
         {checked} instance/config pairs"
    );
}

#[test]
fn criterion_6_validator_soundness_and_sensitivity() {
    let spec = SmallInstanceSpec::default();
    let mut validated = 0usize;
    let mut collisions = 0usize;
    let mut truncations = 0usize;
    let mut moved_nodes = 0usize;
    let mut seed = 0u64;

    while (collisions < 100 || truncations < 100 || moved_nodes < 100 || validated < 100)
        && seed < 3000
    {
        seed += 1;
        let instance = random_small_instance(seed, &spec);
        let cfg = if seed.is_multiple_of(2) {
            SolveConfig::new(Mode::Occin)
        } else {
            SolveConfig::new(Mode::Bypass)
        };
        let solution = match seed % 3 {
            0 => solve_heuristic(&instance, &cfg),
            _ => solve_exact(&instance, &cfg),
        };
        if matches!(solution.status, Status::Infeasible) {
            continue;
        }
        let doc = solution.to_doc(&instance, &cfg);

        // soundness: every solver-emitted provisioning validates
        let report = validate(&doc, &instance, &cfg);
        assert!(report.ok, "seed {seed}: {:?}", report.violations);
        validated += 1;

        // wavelength collision: copy a wavelength onto another lightpath
        // that shares an arc with it
        'outer: for (ai, a) in doc.assignments.iter().enumerate() {
            for (si, seg) in a.segments.iter().enumerate() {
                for (bi, b) in doc.assignments.iter().enumerate() {
                    for (ti, other) in b.segments.iter().enumerate() {
                        if (ai, si) == (bi, ti) || seg.lambda == other.lambda {
                            continue;
                        }
                        let shares = seg
                            .route
                            .windows(2)
                            .any(|h| other.route.windows(2).any(|g| g == h));
                        if !shares {
                            continue;
                        }
                        let mut bad = doc.clone();
                        bad.assignments[bi].segments[ti].lambda = seg.lambda;
                        let report = validate(&bad, &instance, &cfg);
                        assert!(report.has_rule(RuleId::R2), "seed {seed}: {report:?}");
                        collisions += 1;
                        break 'outer;
                    }
                }
            }
        }

        // route truncation: drop the final hop of a multi-hop route
        'trunc: for (ai, a) in doc.assignments.iter().enumerate() {
            for (si, seg) in a.segments.iter().enumerate() {
                if seg.route.len() > 2 {
                    let mut bad = doc.clone();
                    bad.assignments[ai].segments[si].route.pop();
                    let report = validate(&bad, &instance, &cfg);
                    assert!(report.has_rule(RuleId::R4), "seed {seed}: {report:?}");
                    truncations += 1;
                    break 'trunc;
                }
            }
        }

        // computing node moved onto the destination
        if cfg.mode == Mode::Occin {
            if let Some((ai, a)) = doc
                .assignments
                .iter()
                .enumerate()
                .find(|(_, a)| a.demand.kind == "comp")
            {
                let dst = instance.comp[a.demand.index].dst.external();
                let mut bad = doc.clone();
                bad.assignments[ai].computing_node = Some(dst);
                let report = validate(&bad, &instance, &cfg);
                assert!(report.has_rule(RuleId::R5), "seed {seed}: {report:?}");
                moved_nodes += 1;
            }
        }
    }

    assert!(validated >= 100, "only {validated} solutions validated");
    assert!(collisions >= 100, "only {collisions} collision mutations");
    assert!(truncations >= 100, "only {truncations} truncation mutations");
    assert!(moved_nodes >= 100, "only {moved_nodes} computing-node mutations");
    println!(
        "PASS: criterion 6 - {validated} solutions validated; mutations caught: \
         {collisions} collisions (R2), {truncations} truncations (R4), \
         {moved_nodes} computing-node moves (R5)"
    );
}

#[test]
fn criterion_7_relaxation_ordering() {
    let spec = SmallInstanceSpec::default();
    let mut coupling_pairs = 0;
    let mut heuristic_pairs = 0;
    for seed in 0..110 {
        let instance = random_small_instance(seed, &spec);

        let per_demand = solve_exact(&instance, &SolveConfig::new(Mode::Occin));
        let per_segment = solve_exact(
            &instance,
            &SolveConfig::new(Mode::Occin).with_coupling(Coupling::PerSegment),
        );
        match (per_segment.status, per_demand.status) {
            (Status::Optimal, Status::Optimal) => {
                assert!(
                    per_segment.wavelength_count <= per_demand.wavelength_count,
                    "seed {seed}: segment {} > demand {}",
                    per_segment.wavelength_count,
                    per_demand.wavelength_count
                );
                coupling_pairs += 1;
            }
            (Status::Infeasible, Status::Optimal) => {
                panic!("seed {seed}: relaxation infeasible but coupled solvable")
            }
            _ => {}
        }

        for cfg in all_configs() {
            let h = solve_heuristic(&instance, &cfg);
            if h.status != Status::Feasible {
                continue;
            }
            let exact = solve_exact(&instance, &cfg);
            assert_eq!(exact.status, Status::Optimal);
            assert!(
                h.wavelength_count >= exact.wavelength_count,
                "seed {seed}: heuristic {} < exact {}",
                h.wavelength_count,
                exact.wavelength_count
            );
            heuristic_pairs += 1;
        }
    }
    assert!(coupling_pairs >= 100 && heuristic_pairs >= 100);
    println!(
        "PASS: criterion 7 - relaxation ordering held on {coupling_pairs} coupling \
         pairs and {heuristic_pairs} heuristic comparisons"
    );
}

#[test]
fn criterion_8_deterministic_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let demands = data_file("cost239_dest1.dem");

    let mut artifacts = Vec::new();
    for mode in ["bypass", "occin"] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let path = tmp.path().join(format!("solve_{mode}_{run}.json"));
            let out = rwca(&[
                "solve",
                "--topology",
                "builtin:cost239",
                "--demands",
                &demands,
                "--mode",
                mode,
                "--solver",
                "exact",
                "--deterministic",
                "--out",
                path.to_str().unwrap(),
            ]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            outputs.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{mode} solves differ");
        artifacts.push(format!("solve({mode})"));
    }

    let mut sweeps = Vec::new();
    for run in 0..2 {
        let path = tmp.path().join(format!("sweep_{run}.csv"));
        let out = rwca(&[
            "bench-sweep",
            "--seed",
            "42",
            "--deterministic",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        sweeps.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(sweeps[0], sweeps[1], "sweeps differ");
    artifacts.push("bench-sweep".into());

    println!(
        "PASS: criterion 8 - byte-identical deterministic reruns for {}",
        artifacts.join(", ")
    );
}

/// The bundled data files stay in sync with the builtin topology and the
/// calibration seed.
#[test]
fn bundled_data_files_match_builtins() {
    let topo_text = std::fs::read_to_string(data_file("cost239.topo")).unwrap();
    let parsed = rwca_core::Topology::parse(&topo_text).unwrap();
    assert_eq!(parsed, rwca_core::builtin_cost239());

    let dem_text = std::fs::read_to_string(data_file("cost239_dest1.dem")).unwrap();
    let instance = Instance::parse(&dem_text, &parsed).unwrap();
    assert_eq!(instance, cost239_dest1_instance(10));
}
