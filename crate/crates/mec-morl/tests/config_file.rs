use mec_morl::config_file::{config_hash, env_pairs, load, parse_pairs, render};
use mec_morl::Failure;
use mec_morl_core::{MeanTaskSize, SystemConfig};
use proptest::prelude::*;

fn vars(v: &[(&str, &str)]) -> Vec<(String, String)> {
    v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

#[test]
fn comments_and_blank_lines() {
    let p = parse_pairs("# header\n\nnum_users = 4  # trailing\n steps_per_episode=20\n").unwrap();
    assert_eq!(
        p,
        vec![
            ("num_users".to_string(), "4".to_string()),
            ("steps_per_episode".to_string(), "20".to_string())
        ]
    );
}

#[test]
fn missing_equals_names_the_line() {
    match parse_pairs("num_users = 4\nbogus\n") {
        Err(Failure::Usage(m)) => assert!(m.contains("line 2"), "{m}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn file_then_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sys.conf");
    std::fs::write(&path, "num_users = 6\nmean_task_size = 5e6\nedge_radius_range = 10, 20\n").unwrap();
    let cfg = load(
        SystemConfig::table1(8),
        Some(&path),
        vars(&[("MECMORL_NUM_USERS", "7"), ("HOME", "/root")]),
    )
    .unwrap();
    assert_eq!(cfg.num_users, 7);
    assert_eq!(cfg.mean_task_size, MeanTaskSize::Bits(5e6));
    assert_eq!(cfg.edge_radius_range, (10.0, 20.0));
    assert_eq!(cfg.num_edge_servers, 8);
}

#[test]
fn unknown_prefixed_variable_is_rejected() {
    assert!(matches!(env_pairs(vars(&[("MECMORL_NOPE", "1")])), Err(Failure::Usage(_))));
    assert!(env_pairs(vars(&[("OTHER_NOPE", "1")])).unwrap().is_empty());
}

#[test]
fn invalid_values_are_usage_errors() {
    for v in [("MECMORL_NUM_USERS", "x"), ("MECMORL_STEP_DURATION", "-1")] {
        let e = load(SystemConfig::table1(8), None, vars(&[v])).unwrap_err();
        assert_eq!(e.exit_code(), 2, "{e}");
    }
    let e = load(SystemConfig::table1(8), Some(std::path::Path::new("/nonexistent/x.conf")), vars(&[])).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn rendered_config_reloads_identically() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SystemConfig::smoke();
    cfg.mean_task_size = MeanTaskSize::Bits(1.2345678901234e7);
    cfg.noise_power = 3.3e-14;
    let path = dir.path().join("c.conf");
    std::fs::write(&path, render(&cfg)).unwrap();
    let back = load(SystemConfig::table1(8), Some(&path), vars(&[])).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(config_hash(&back), config_hash(&cfg));
}

#[test]
fn hash_tracks_every_change() {
    let a = SystemConfig::table1(8);
    let mut b = a.clone();
    b.rng_seed = 1;
    assert_ne!(config_hash(&a), config_hash(&b));
    assert_eq!(config_hash(&a), config_hash(&a.clone()));
    assert_eq!(config_hash(&a).len(), 64);
}

proptest! {
    #[test]
    fn float_values_round_trip(bw in 1e3f64..1e9, p in 1e-6f64..1.0, users in 1usize..50) {
        let mut cfg = SystemConfig::table1(3);
        cfg.bandwidth = bw;
        cfg.offload_power = p;
        cfg.num_users = users;
        let pairs = parse_pairs(&render(&cfg)).unwrap();
        let mut back = SystemConfig::smoke();
        mec_morl::config_file::apply_pairs(&mut back, &pairs, "test").unwrap();
        prop_assert_eq!(back, cfg);
    }
}
