use std::fs;

use qsdist_core::distill::default_code;
use qsdist_core::experiments::{run, Command, ExperimentSpec, InstanceSource, Overrides};
use qsdist_core::{Error, Scenario};

const BASE: &str = r#"
schema_version = 1
name = "two-users"

[[users]]
distance_km = 0.4
r_min_hz = 50.0
f_min = 0.9

[[users]]
distance_m = 1300.0
r_min_hz = 5.0
f_min = 0.88

[experiment]
seeds = [1, 2]
samples = 2000
"#;

fn resolve(path: &std::path::Path, command: Command) -> qsdist_core::Result<ExperimentSpec> {
    ExperimentSpec::resolve(command, InstanceSource::Config(path.into()), Overrides::default(), None)
}

#[test]
fn fixed_users_load_with_unit_conversion() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    fs::write(&path, BASE).unwrap();
    let s = Scenario::load(&path).unwrap();
    let inst = s.instance(99);
    assert_eq!(inst.users[0].distance_d, 400.0);
    assert_eq!(inst.users[1].distance_d, 1300.0);
    assert_eq!(s.experiment.seeds, vec![1, 2]);
    assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s);
}

#[test]
fn code_file_replaces_the_default_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mut blocks: Vec<String> = (2..=7)
        .map(|n| default_code(n).unwrap().generators().iter().map(|g| g.to_string()).collect::<Vec<_>>().join("\n"))
        .collect();
    // an equivalent four-qubit code with the Z checks listed first
    blocks[2] = "ZZZZ\nXXXX\nXYZI".into();
    fs::create_dir(dir.path().join("codes")).unwrap();
    fs::write(dir.path().join("codes/custom.txt"), format!("# custom set\n{}\n", blocks.join("\n\n"))).unwrap();
    let path = dir.path().join("s.toml");
    fs::write(&path, format!("code_file = \"codes/custom.txt\"\n{BASE}")).unwrap();
    let spec = resolve(&path, Command::SweepTheta).unwrap();
    let table = spec.table().unwrap();
    let default = qsdist_core::distill::DistillationTable::default_table();
    for z in 2..=7u8 {
        for f in [0.3, 0.7, 0.95] {
            let (a, b) = (table.stats(f, z).unwrap(), default.stats(f, z).unwrap());
            assert!((a.p_success - b.p_success).abs() < 1e-12 && (a.f_out - b.f_out).abs() < 1e-12);
        }
    }
    assert!(run(&spec).is_ok());
}

#[test]
fn broken_inputs_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");

    fs::write(&path, BASE.replace("schema_version = 1", "schema_version = 9")).unwrap();
    assert!(resolve(&path, Command::Solve).is_err());

    fs::write(&path, BASE.replace("f_min = 0.9", "f_min = 1.5")).unwrap();
    assert!(resolve(&path, Command::Solve).is_err());

    fs::write(&path, format!("{BASE}\n[params]\nbogus = 1\n")).unwrap();
    assert!(resolve(&path, Command::Solve).is_err());

    fs::write(&path, format!("code_file = \"missing.txt\"\n{BASE}")).unwrap();
    let spec = resolve(&path, Command::SweepTheta).unwrap();
    assert!(matches!(run(&spec), Err(Error::Io { .. })));

    let missing = dir.path().join("nope.toml");
    assert!(matches!(resolve(&missing, Command::Solve), Err(Error::Io { .. })));
}
