use std::process::{Command, Output};

use mcpdist::table::read_csv_columns;

const PLANAR: [&str; 8] = [
    "--dim",
    "2",
    "--lambda-p",
    "20e-6",
    "--mean-points",
    "30",
    "--rd",
    "40",
];

fn mcpdist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcpdist"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let (columns, rows) = read_csv_columns(text).unwrap();
    let j = columns
        .iter()
        .position(|c| c == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[j]).collect()
}

#[test]
fn cdf_defaults_end_at_the_contact_quantile() {
    let out = mcpdist(&[&["cdf"], &PLANAR[..]].concat());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("# schema=1\n# command=cdf\n"));
    let cd = column(&text, "F_CD");
    assert_eq!(cd.len(), 200);
    assert_eq!(cd[0], 0.0);
    assert!((cd[199] - 0.999).abs() < 1e-9);
    assert!(cd.windows(2).all(|w| w[0] <= w[1]));
    let nnd = column(&text, "F_NND");
    assert!(nnd.iter().zip(&cd).skip(1).all(|(n, c)| n >= c));
}

#[test]
fn two_point_grid_starts_at_zero() {
    let out = mcpdist(
        &[
            &["cdf", "--steps", "2", "--r-min", "0", "--r-max", "50"],
            &PLANAR[..],
        ]
        .concat(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(column(&text, "r"), vec![0.0, 50.0]);
    assert_eq!(column(&text, "F_CD")[0], 0.0);
    assert_eq!(column(&text, "F_NND")[0], 0.0);
}

#[test]
fn pdf_and_bounds_tables_have_their_columns() {
    let pdf = stdout(&mcpdist(&[&["pdf", "--steps", "5"], &PLANAR[..]].concat()));
    assert!(column(&pdf, "f_CD").iter().all(|v| *v >= 0.0));
    let bounds = stdout(&mcpdist(
        &[&["bounds", "--steps", "20"], &PLANAR[..]].concat(),
    ));
    let exact = column(&bounds, "F_CD");
    for (name, upper) in [
        ("F_CD_ub1", true),
        ("F_CD_lb1", false),
        ("F_CD_ub2", true),
        ("F_CD_lb2", false),
    ] {
        for (b, e) in column(&bounds, name).iter().zip(&exact) {
            assert!(
                if upper {
                    b - e >= -1e-9
                } else {
                    e - b >= -1e-9
                },
                "{name}"
            );
        }
    }
}

#[test]
fn json_output_is_one_document() {
    let out = mcpdist(&[&["cdf", "--steps", "3", "--format", "json"], &PLANAR[..]].concat());
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["command"], "cdf");
    assert_eq!(doc["params"]["dim"], 2);
    assert_eq!(doc["columns"][1], "F_CD");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn lambda_d_and_mean_points_agree() {
    let m = stdout(&mcpdist(&[&["cdf", "--steps", "4"], &PLANAR[..]].concat()));
    let lambda_d = (30.0 / (std::f64::consts::PI * 1600.0)).to_string();
    let d = stdout(&mcpdist(&[
        "cdf",
        "--steps",
        "4",
        "--dim",
        "2",
        "--lambda-p",
        "20e-6",
        "--lambda-d",
        &lambda_d,
        "--rd",
        "40",
    ]));
    for (a, b) in column(&m, "F_CD").iter().zip(column(&d, "F_CD")) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn bad_parameters_exit_one_with_a_json_line() {
    for args in [
        &[
            "cdf",
            "--dim",
            "2",
            "--lambda-p",
            "-1",
            "--mean-points",
            "3",
            "--rd",
            "1",
        ][..],
        &["cdf", "--dim", "2", "--lambda-p", "1", "--rd", "1"],
        &[
            "cdf",
            "--dim",
            "2",
            "--lambda-p",
            "1",
            "--mean-points",
            "3",
            "--lambda-d",
            "1",
            "--rd",
            "1",
        ],
        &["cdf", "--bogus"],
        &["validate", "--suite", "nope"],
        &[
            "deviation",
            "--dim",
            "2",
            "--lambda-p",
            "1e-6",
            "--lambda-d",
            "1",
        ],
    ] {
        let out = mcpdist(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let line = String::from_utf8(out.stderr).unwrap();
        let doc: serde_json::Value =
            serde_json::from_str(line.trim()).unwrap_or_else(|_| panic!("{line}"));
        assert!(
            doc["error"].is_string() && doc["message"].is_string(),
            "{line}"
        );
    }
}

#[test]
fn failed_validation_exits_two_after_writing_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("asymptotics.csv");
    let out = mcpdist(&[
        "validate",
        "--suite",
        "asymptotics",
        "--out",
        path.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&path).unwrap();
    let failed: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("# failed="))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(out.status.code(), Some(if failed == 0 { 0 } else { 2 }));
}

#[test]
fn passing_validation_exits_zero() {
    let out = mcpdist(&["validate", "--suite", "metrics"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("# failed=0"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    let out_path = dir.path().join("out.csv");
    std::fs::write(
        &config,
        format!(
            "command = \"cdf\"\n\n[params]\ndim = 2\nlambda_p = 2e-5\nmean_points = 30.0\nrd = 40.0\n\n\
             [grid]\nr_min = 0.0\nr_max = 100.0\nsteps = 11\nspacing = \"linear\"\n\n\
             [output]\npath = {:?}\nformat = \"csv\"\n",
            out_path
        ),
    )
    .unwrap();
    let cfg = config.to_str().unwrap();
    assert_eq!(mcpdist(&["--config", cfg]).status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(column(&text, "r").len(), 11);
    assert_eq!(*column(&text, "r").last().unwrap(), 100.0);

    let out = mcpdist(&["--config", cfg, "--steps", "3", "--out", "-"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(column(&stdout(&out), "r"), vec![0.0, 50.0, 100.0]);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "command = \"cdf\"\ncolour = \"red\"\n").unwrap();
    let out = mcpdist(&["--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_reports_band_and_seed() {
    let out = mcpdist(&[
        "simulate",
        "--dim",
        "2",
        "--lambda-p",
        "1e-4",
        "--mean-points",
        "5",
        "--rd",
        "20",
        "--samples",
        "2000",
        "--steps",
        "20",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("# seed=3\n"));
    assert!(text.contains("# samples=2000\n"));
    assert_eq!(column(&text, "F_CD_empirical")[0], 0.0);
}
