use std::fs;
use std::process::{Command, Output};

fn helixqd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_helixqd"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bifurcations() {
    let o = helixqd(&["bifurcations", "--n", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "wells,ratio,asymptotic");
    assert!(lines[1].starts_with("1,2.92848"));
    assert_eq!(lines.len(), 4);
}

#[test]
fn extrema_and_potential() {
    let o = helixqd(&["extrema", "--h", "10", "--R", "10"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o).lines().filter(|l| l.contains(",min,")).count(),
        6
    );
    let o = helixqd(&[
        "potential",
        "--h",
        "5.8",
        "--R",
        "4",
        "--s-min",
        "-10",
        "--s-max",
        "10",
        "--n-points",
        "101",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 102);
}

#[test]
fn preset_listing_and_expansion() {
    let o = helixqd(&["preset"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 12);
    let o = helixqd(&["preset", "fig6"]);
    assert!(stdout(&o).contains("p0 = -0.154"));
}

#[test]
fn exit_codes() {
    assert_eq!(helixqd(&["preset", "nope"]).status.code(), Some(2));
    assert_eq!(helixqd(&["propagate"]).status.code(), Some(2));
    assert_eq!(
        helixqd(&["extrema", "--h", "-1", "--R", "4"]).status.code(),
        Some(2)
    );
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[helix]\nh = 5.8\nR = 4.0\nsigma = 1.0\n").unwrap();
    let o = helixqd(&["propagate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma"));
}

#[test]
fn propagate_from_config_uses_env_root() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("tiny.toml");
    fs::write(
        &cfg,
        "[helix]\nh = 5.8\nR = 4.0\n[grid]\ns_min = -50.0\ns_max = 300.0\nn_points = 701\n\
         [wavepacket]\ns0 = 150.0\ndelta_s = 4.0\n[propagation]\nt_final = 5.0\nsnapshot_times = [5.0]\n\
         [spectrum]\nenabled = false\n",
    )
    .unwrap();
    let root = tmp.path().join("root");
    let o = Command::new(env!("CARGO_BIN_EXE_helixqd"))
        .args(["propagate", "--config", cfg.to_str().unwrap()])
        .env("HELIXQD_OUT", &root)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "manifest.json",
        "extrema.csv",
        "observables.csv",
        "snapshot_0.csv",
    ] {
        assert!(root.join("tiny").join(f).exists(), "{f}");
    }
}

#[test]
fn sweeps() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("scan");
    let o = helixqd(&[
        "sweep",
        "--preset",
        "fig3",
        "--param",
        "helix.ratio",
        "--values",
        "3.0,2.0,1.6,1.4,1.2",
        "--landscape-only",
        "--jobs",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let counts: Vec<String> = stdout(&o)
        .lines()
        .map(|l| l.rsplit(": ").next().unwrap().to_string())
        .collect();
    assert_eq!(
        counts,
        ["0 wells", "1 wells", "2 wells", "3 wells", "4 wells"]
    );
    assert_eq!(
        fs::read_to_string(out.join("index.csv"))
            .unwrap()
            .lines()
            .count(),
        6
    );

    let empty = tmp.path().join("empty");
    let o = helixqd(&[
        "sweep",
        "--preset",
        "fig3",
        "--param",
        "mass",
        "--out",
        empty.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
}
