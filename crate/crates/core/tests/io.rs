use nshs_core::field::{make_grid, RunConfig, VorticityState};
use nshs_core::io::*;
use nshs_core::kernels::KernelMatrix;
use nshs_core::solvers::{Datum, SolverKind};
use nshs_core::C64;
use proptest::prelude::*;
use std::sync::Arc;

#[test]
fn radius_constraint_message() {
    let err = parse_config_str("[physics]\nmu0 = 0.2\n", &[]).unwrap_err();
    assert!(err.to_string().contains("mu0 = 0.2 violates the radius constraint"), "{err}");
}

#[test]
fn time_weight_constraint_message() {
    let err = parse_config_str("", &["physics.alpha=0.5".into()]).unwrap_err();
    assert!(err.to_string().contains("alpha = 0.5 violates the time-weight constraint"), "{err}");
}

#[test]
fn window_constraint_message() {
    let err = parse_config_str("", &["gamma=0.5".into(), "t_final=0.2".into()]).unwrap_err();
    assert!(err.to_string().contains("violates the time window"), "{err}");
}

#[test]
fn config_round_trip() {
    let text = "[physics]\nnu = 0.01\ndatum = \"detached\"\namplitude = 2.5\n[numerics]\nk = 6\nsolver = \"direct\"\nnu_list = [1e-2, 5e-3]\n[io]\nsnapshot_every = 3\n";
    let a = parse_config_str(text, &[]).unwrap();
    assert_eq!(a.physics.datum, Datum::Detached);
    assert_eq!(a.numerics.solver, SolverKind::Direct);
    let b = parse_config_str(&a.to_toml(), &[]).unwrap();
    assert_eq!(a, b);
    let rc = a.run_config();
    assert_eq!((rc.nu, rc.k, rc.snapshot_every), (0.01, 6, 3));
}

#[test]
fn overrides_are_type_checked() {
    assert!(matches!(parse_config_str("", &["numerics.k=abc".into()]), Err(IoError::Parse(_))));
    assert!(matches!(parse_config_str("", &["numerics.k".into()]), Err(IoError::OverrideSyntax(_))));
    assert!(matches!(parse_config_str("", &["bogus=1".into()]), Err(IoError::OverrideKey(_))));
    assert!(matches!(parse_config_str("", &["numerics.bogus=1".into()]), Err(IoError::Parse(_))));
    assert!(matches!(parse_config_str("", &["nowhere.k=1".into()]), Err(IoError::OverrideKey(_))));
    let c = parse_config_str("", &["datum=boundary_bump".into(), "numerics.nu_list=[1e-2,1e-3]".into()]).unwrap();
    assert_eq!(c.physics.datum, Datum::BoundaryBump);
    assert_eq!(c.numerics.nu_list, vec![1e-2, 1e-3]);
}

#[test]
fn unknown_keys_and_bad_lists_rejected() {
    assert!(parse_config_str("[physics]\nviscosity = 1\n", &[]).is_err());
    assert!(matches!(parse_config_str("", &["numerics.nu_list=[1e-3,1e-2]".into()]), Err(IoError::Settings(_))));
    assert!(matches!(parse_config_str("", &["numerics.gamma_grid=[0.2,0.1]".into()]), Err(IoError::Settings(_))));
}

#[test]
fn empty_emission_has_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let m = emit_outputs(dir.path(), &[]).unwrap();
    assert!(m.artifacts.is_empty());
    assert!(dir.path().join(MANIFEST_NAME).exists());
    assert!(verify_manifest(dir.path()).unwrap().is_empty());
}

#[test]
fn re_emission_is_byte_identical() {
    let arts = vec![
        Artifact::text("b.csv", "table", "x,y\n1,2\n"),
        Artifact::binary("sub/a.bin", "data", vec![1, 2, 3, 255]),
    ];
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let m1 = emit_outputs(d1.path(), &arts).unwrap();
    let m2 = emit_outputs(d2.path(), &arts).unwrap();
    assert_eq!(m1, m2);
    assert_eq!(m1.artifacts[0].path, "b.csv");
    assert_eq!(m1.artifacts[1].sha256, sha256_hex(&[1, 2, 3, 255]));
    assert_eq!(std::fs::read(d1.path().join(MANIFEST_NAME)).unwrap(), std::fs::read(d2.path().join(MANIFEST_NAME)).unwrap());
    std::fs::write(d1.path().join("b.csv"), "tampered").unwrap();
    assert_eq!(verify_manifest(d1.path()).unwrap(), vec!["b.csv".to_string()]);
}

#[test]
fn sha256_known_vector() {
    assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

#[test]
fn failed_emission_leaves_nothing() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("blocker")).unwrap();
    let arts = vec![Artifact::text("ok.txt", "t", "x"), Artifact::text("blocker", "t", "y")];
    assert!(emit_outputs(dir.path(), &arts).is_err());
    assert!(!dir.path().join("ok.txt").exists());
    assert!(!dir.path().join(MANIFEST_NAME).exists());
}

fn sample_states(cfg: &RunConfig) -> Vec<VorticityState> {
    let g = Arc::new(cfg.grid().unwrap());
    (0..3)
        .map(|i| {
            let mut s = VorticityState::from_profiles(cfg.k, g.clone(), |xi, y| C64::new(y * (-y * y).exp(), 0.1 * xi as f64 * i as f64));
            s.time = 0.01 * i as f64;
            s
        })
        .collect()
}

#[test]
fn checkpoint_round_trip() {
    let cfg = RunConfig { k: 3, ny: 64, nu: 0.02, ..RunConfig::default() };
    let states = sample_states(&cfg);
    let bytes = encode_checkpoint(&cfg, &states);
    assert_eq!(&bytes[..4], CHECKPOINT_MAGIC);
    let ck = decode_checkpoint(&bytes).unwrap();
    assert_eq!(ck.run_config().unwrap(), cfg);
    let back = ck.states().unwrap();
    assert_eq!(back.len(), 3);
    for (a, b) in states.iter().zip(&back) {
        assert_eq!(a.time, b.time);
        assert_eq!(a.difference(b).max_abs(), 0.0);
    }
    assert_eq!(ck.grid().unwrap().nodes, states[0].grid.nodes);
}

#[test]
fn truncated_and_corrupt_files_error() {
    let cfg = RunConfig { k: 2, ny: 64, nu: 0.05, ..RunConfig::default() };
    let bytes = encode_checkpoint(&cfg, &sample_states(&cfg));
    for cut in [0, 3, 10, bytes.len() / 2, bytes.len() - 1] {
        assert!(matches!(decode_checkpoint(&bytes[..cut]), Err(IoError::Format { .. })), "cut {cut}");
    }
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(decode_checkpoint(&extra).is_err());
    let mut magic = bytes;
    magic[0] = b'X';
    assert!(decode_checkpoint(&magic).is_err());
}

#[test]
fn kernel_round_trip() {
    let g = Arc::new(make_grid(64, 2.0, 1e-2).unwrap());
    let k = KernelMatrix::htilde(3, 0.1, 0.1, g);
    let bytes = encode_kernel(&k);
    let d = decode_kernel(&bytes).unwrap();
    assert_eq!((d.xi, d.t, d.nu, d.n), (3, 0.1, 0.1, 64));
    assert_eq!(d.entries, k.entries.data);
    assert!(decode_kernel(&bytes[..bytes.len() - 8]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn numeric_overrides_round_trip(nu in 1e-5f64..1.0, k in 1usize..32, amp in -5.0f64..5.0) {
        let ov = vec![format!("physics.nu={nu:e}"), format!("numerics.k={k}"), format!("amplitude={amp:e}")];
        let c = parse_config_str("", &ov).unwrap();
        prop_assert_eq!(c.physics.nu, nu);
        prop_assert_eq!(c.numerics.k, k);
        prop_assert_eq!(c.physics.amplitude, amp);
        let again = parse_config_str(&c.to_toml(), &[]).unwrap();
        prop_assert_eq!(again, c);
    }
}
