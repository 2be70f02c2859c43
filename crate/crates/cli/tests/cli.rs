use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cgsat::basis::BasisKind;
use cgsat::timeint::{MassSolver, Scheme};
use cgsat_cli::config::RunConfig;
use proptest::prelude::*;

fn cgsat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgsat"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = cgsat(args);
    assert!(
        out.status.success(),
        "cgsat {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_writes_artifacts_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&[
            "solve",
            "--problem",
            "sine2d",
            "--cells",
            "3",
            "--order",
            "2",
            "--t-end",
            "0.1",
            "-o",
            s(out),
        ]);
    }
    for f in ["solution_final.vtk", "energy.csv", "summary.txt"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
    let vtk = fs::read_to_string(a.join("solution_final.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
    assert!(vtk.contains("UNSTRUCTURED_GRID") && vtk.contains("POINT_DATA"));
    let summary = fs::read_to_string(a.join("summary.txt")).unwrap();
    assert!(summary.contains("status = stable"));
    assert!(fs::read_to_string(a.join("energy.csv"))
        .unwrap()
        .starts_with("step,t,energy,umax,umin"));
}

#[test]
fn one_d_output_is_csv() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "solve",
        "--problem",
        "wave1d",
        "--cells",
        "10",
        "--t-end",
        "1",
        "-o",
        s(dir.path()),
    ]);
    let csv = fs::read_to_string(dir.path().join("solution_final.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "x,u1,u2");
    assert_eq!(csv.lines().count(), 1 + 21);
}

#[test]
fn blow_up_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = cgsat(&[
        "solve",
        "--problem",
        "advection2d",
        "--cells",
        "8",
        "--volume-quad",
        "6",
        "--edge-quad",
        "5",
        "--t-end",
        "5",
        "--blowup",
        "2",
        "-o",
        s(dir.path()),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("blew up"));
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("status = aborted"));
}

#[test]
fn spectrum_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&[
        "spectrum",
        "--problem",
        "advection2d",
        "--cells",
        "3",
        "--order",
        "1",
        "-o",
        s(dir.path()),
    ]);
    assert!(stdout.contains("verdict = stable"), "{stdout}");
    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(csv
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("neg_noSAT,pos_noSAT,neg_SAT,pos_SAT"));
    let stdout = ok(&[
        "spectrum",
        "--problem",
        "advection2d",
        "--cells",
        "4",
        "--volume-quad",
        "6",
        "--edge-quad",
        "5",
        "-o",
        s(dir.path()),
    ]);
    assert!(stdout.contains("verdict = unstable"), "{stdout}");
    let out = cgsat(&["spectrum", "--problem", "rotation2d", "-o", s(dir.path())]);
    assert!(!out.status.success(), "dense cap not enforced");
}

#[test]
fn convergence_of_representable_solution_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "convergence",
        "--problem",
        "linear2d",
        "--order",
        "1",
        "--levels",
        "3",
        "--base-cells",
        "2",
        "--t-end",
        "0.2",
        "-o",
        s(dir.path()),
    ]);
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let l2: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(l2 < 1e-12, "{line}");
    }
    assert!(cgsat(&[
        "convergence",
        "--problem",
        "linear2d",
        "--levels",
        "2",
        "-o",
        s(dir.path())
    ])
    .status
    .code()
    .is_some_and(|c| c != 0));
}

#[test]
fn mesh_file_round_trip_and_operator_dump() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("disk.mesh");
    ok(&["mesh-gen", "--mesh", "disk:2", "-o", s(&mesh)]);
    let out = dir.path().join("ops");
    let stdout = ok(&[
        "dump-operators",
        "--problem",
        "rotation2d",
        "--mesh",
        s(&mesh),
        "--order",
        "1",
        "-o",
        s(&out),
    ]);
    assert!(stdout.contains("unknowns"));
    for f in ["M.mtx", "Q.mtx", "B.mtx", "Pi.mtx"] {
        let text = fs::read_to_string(out.join(f)).unwrap();
        assert!(
            text.starts_with("%%MatrixMarket matrix coordinate real general"),
            "{f}"
        );
    }
    assert!(!cgsat(&["mesh-gen", "--mesh", "cube:3", "-o", s(&mesh)])
        .status
        .success());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("out");
    fs::write(
        &cfg,
        format!(
            "problem = sine2d\ncells = 2\norder = 1\nt_end = 0.5\noutput = {}\n",
            out.display()
        ),
    )
    .unwrap();
    ok(&["solve", "--config", s(&cfg), "--t-end", "0.05"]);
    let written = RunConfig::load(out.join("config.txt")).unwrap();
    assert_eq!(written.t_end, Some(0.05));
    assert_eq!(written.cells, Some(2));
    assert_eq!(written.output, out);
}

fn config() -> impl Strategy<Value = RunConfig> {
    let basis = prop_oneof![Just(BasisKind::Lagrange), Just(BasisKind::Bernstein)];
    let scheme = prop_oneof![
        Just(Scheme::Ssprk22),
        Just(Scheme::Ssprk33),
        Just(Scheme::Ssprk54)
    ];
    let solver = prop_oneof![Just(MassSolver::Direct), Just(MassSolver::Cg)];
    let real = || {
        proptest::option::of(prop_oneof![
            any::<f64>().prop_filter("finite", |x| x.is_finite()),
            0.0..1.0
        ])
    };
    (
        (
            "[a-z0-9]{1,12}",
            proptest::option::of("(square|disk):[1-9][0-9]?|[a-z/_]{1,20}\\.mesh"),
            proptest::option::of(1usize..500),
        ),
        (
            proptest::option::of(1usize..4),
            proptest::option::of(basis),
            proptest::option::of(1usize..9),
            proptest::option::of(1usize..9),
        ),
        (real(), real(), proptest::option::of(scheme), real(), real()),
        (
            proptest::option::of(1usize..10_000),
            real(),
            proptest::option::of(solver),
            "[a-zA-Z0-9_/. -]{0,20}[a-z]",
            any::<u64>(),
        ),
    )
        .prop_map(|(a, b, c, d)| RunConfig {
            problem: a.0,
            mesh: a.1,
            cells: a.2,
            order: b.0,
            basis: b.1,
            volume_quad: b.2,
            edge_quad: b.3,
            split_alpha: c.0,
            sat_scale: c.1,
            scheme: c.2,
            cfl: c.3,
            t_end: c.4,
            max_steps: d.0,
            blowup: d.1,
            mass_solver: d.2,
            output: PathBuf::from(d.3.trim_start()),
            seed: d.4,
        })
}

proptest! {
    #[test]
    fn config_round_trips(c in config()) {
        let text = c.serialize();
        let back = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.serialize(), text);
    }
}
