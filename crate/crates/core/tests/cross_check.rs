//! Cross-checks between the exact solver, the heuristic and the brute-force
//! oracle on seeded random small instances.

use rwca_core::test_support::{random_small_instance, SmallInstanceSpec};
use rwca_core::{
    brute_force_optimum, solve_exact, solve_heuristic, validate, Coupling, Instance, Mode,
    OracleLimits, SolveConfig, Status,
};

fn configs() -> Vec<SolveConfig> {
    vec![
        SolveConfig::new(Mode::Bypass),
        SolveConfig::new(Mode::Bypass).with_coupling(Coupling::PerSegment),
        SolveConfig::new(Mode::Occin),
        SolveConfig::new(Mode::Occin).with_coupling(Coupling::PerSegment),
    ]
}

fn exact_count(instance: &Instance, cfg: &SolveConfig) -> Option<usize> {
    let s = solve_exact(instance, cfg);
    match s.status {
        Status::Optimal => Some(s.wavelength_count),
        Status::Infeasible => None,
        other => panic!("unexpected status {other:?}"),
    }
}

#[test]
fn exact_matches_oracle_on_random_instances() {
    let limits = OracleLimits::default();
    let spec = SmallInstanceSpec::default();
    for seed in 0..60 {
        let instance = random_small_instance(seed, &spec);
        for cfg in configs() {
            let got = exact_count(&instance, &cfg);
            let want = brute_force_optimum(&instance, &cfg, &limits).unwrap();
            assert_eq!(
                got, want,
                "seed {seed} mode {:?} coupling {:?}",
                cfg.mode, cfg.coupling
            );
        }
    }
}

#[test]
fn heuristic_never_beats_exact() {
    let spec = SmallInstanceSpec::default();
    for seed in 100..160 {
        let instance = random_small_instance(seed, &spec);
        for cfg in configs() {
            let h = solve_heuristic(&instance, &cfg);
            if h.status != Status::Feasible {
                continue;
            }
            let exact = exact_count(&instance, &cfg)
                .expect("heuristic found a provisioning, so one exists");
            assert!(
                h.wavelength_count >= exact,
                "seed {seed}: heuristic {} < exact {exact}",
                h.wavelength_count
            );
        }
    }
}

#[test]
fn per_segment_is_a_relaxation_of_per_demand() {
    let spec = SmallInstanceSpec::default();
    for seed in 200..260 {
        let instance = random_small_instance(seed, &spec);
        let coupled = exact_count(&instance, &SolveConfig::new(Mode::Occin));
        let split = exact_count(
            &instance,
            &SolveConfig::new(Mode::Occin).with_coupling(Coupling::PerSegment),
        );
        match (split, coupled) {
            (Some(s), Some(c)) => assert!(s <= c, "seed {seed}: {s} > {c}"),
            (None, Some(c)) => panic!("seed {seed}: split infeasible but coupled = {c}"),
            _ => {}
        }
    }
}

#[test]
fn solver_solutions_always_validate() {
    let spec = SmallInstanceSpec::default();
    for seed in 300..360 {
        let instance = random_small_instance(seed, &spec);
        for cfg in configs() {
            for s in [solve_exact(&instance, &cfg), solve_heuristic(&instance, &cfg)] {
                if s.status == Status::Infeasible {
                    continue;
                }
                let report = validate(&s.to_doc(&instance, &cfg), &instance, &cfg);
                assert!(
                    report.ok,
                    "seed {seed} mode {:?} coupling {:?}: {:?}",
                    cfg.mode, cfg.coupling, report.violations
                );
            }
        }
    }
}

#[test]
fn adding_a_demand_never_lowers_the_optimum() {
    let spec = SmallInstanceSpec { max_comm: 2, max_comp: 1, ..Default::default() };
    for seed in 400..440 {
        let mut instance = random_small_instance(seed, &spec);
        instance.max_wavelengths = 6; // roomy budget so both solves succeed
        let cfg = SolveConfig::new(Mode::Occin);
        let base = exact_count(&instance, &cfg).expect("roomy budget");

        let extra = random_small_instance(seed + 10_000, &spec);
        let mut grown = instance.clone();
        if let Some(d) = extra.comm.first() {
            if d.src.0 < grown.topology.node_count() && d.dst.0 < grown.topology.node_count() {
                grown.comm.push(*d);
            }
        }
        if grown.comm.len() == instance.comm.len() {
            continue;
        }
        let grown_count = exact_count(&grown, &cfg).expect("roomy budget");
        assert!(grown_count >= base, "seed {seed}: {grown_count} < {base}");
    }
}

#[test]
fn starved_candidate_lists_still_reach_the_oracle_optimum() {
    // with a single candidate route per segment the first phase regularly
    // fails, so this exercises the exhaustive fallback's completeness
    let limits = OracleLimits::default();
    let spec = SmallInstanceSpec::default();
    for seed in 600..660 {
        let instance = random_small_instance(seed, &spec);
        for mut cfg in configs() {
            cfg.k_routes = 1;
            let s = solve_exact(&instance, &cfg);
            let got = match s.status {
                Status::Optimal => {
                    let report = validate(&s.to_doc(&instance, &cfg), &instance, &cfg);
                    assert!(report.ok, "seed {seed}: {:?}", report.violations);
                    Some(s.wavelength_count)
                }
                Status::Infeasible => None,
                other => panic!("unexpected status {other:?}"),
            };
            let want = brute_force_optimum(&instance, &cfg, &limits).unwrap();
            assert_eq!(
                got, want,
                "seed {seed} mode {:?} coupling {:?}",
                cfg.mode, cfg.coupling
            );
        }
    }
}

#[test]
fn parallel_exploration_agrees_with_sequential() {
    let spec = SmallInstanceSpec::default();
    for seed in 700..730 {
        let instance = random_small_instance(seed, &spec);
        for cfg in configs() {
            let mut par = cfg.clone();
            par.parallel_width = 3;
            assert_eq!(
                exact_count(&instance, &cfg),
                exact_count(&instance, &par),
                "seed {seed}"
            );
        }
    }
}

#[test]
fn candidate_width_never_changes_the_optimum_on_mid_size_instances() {
    // beyond oracle reach: check internal consistency between the candidate
    // search (k = 8), the starved search (k = 1, fallback-heavy) and a
    // parallel run on 7..8-node instances
    let spec = SmallInstanceSpec {
        max_nodes: 8,
        max_extra_edges: 4,
        max_comm: 2,
        max_comp: 2,
        max_wavelengths: 3,
    };
    for seed in 800..820 {
        let instance = random_small_instance(seed, &spec);
        for cfg in configs() {
            let wide = exact_count(&instance, &cfg);
            let mut starved = cfg.clone();
            starved.k_routes = 1;
            assert_eq!(exact_count(&instance, &starved), wide, "seed {seed}");
            let mut parallel = cfg.clone();
            parallel.parallel_width = 4;
            assert_eq!(exact_count(&instance, &parallel), wide, "seed {seed}");
        }
    }
}

#[test]
fn deterministic_solutions_are_reproducible() {
    let spec = SmallInstanceSpec::default();
    for seed in 500..520 {
        let instance = random_small_instance(seed, &spec);
        let cfg = SolveConfig::new(Mode::Occin).deterministic();
        assert_eq!(solve_exact(&instance, &cfg), solve_exact(&instance, &cfg));
    }
}
