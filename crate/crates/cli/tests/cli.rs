//! Black-box tests against the built binary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn run(subcommand: &str, args: &[&str], out_dir: &Path) -> Output {
    let root = repo_root();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_invplan"));
    cmd.current_dir(&root).arg(subcommand).args([
        "--corpus",
        "data/corpus.json",
        "--fixtures",
        "fixtures",
        "--out",
    ]);
    cmd.arg(out_dir).args(args);
    cmd.output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn parse_posterior(text: &str) -> BTreeMap<String, f64> {
    text.lines()
        .filter_map(|line| {
            let (goal, p) = line.split_once(' ')?;
            Some((goal.to_string(), p.parse().ok()?))
        })
        .collect()
}

#[test]
fn infer_reference_spatial_stimulus_prints_bronze_max() {
    let dir = tempfile::tempdir().unwrap();
    let output = run("infer", &["--stimulus", "spatial_04"], dir.path());
    assert!(output.status.success(), "{output:?}");
    let posterior = parse_posterior(&stdout(&output));
    assert_eq!(posterior.len(), 3);
    assert!(posterior["bronze"] > posterior["gold"]);
    assert!(posterior["bronze"] > posterior["silver"]);
    assert!(dir.path().join("posterior_spatial_04.json").exists());
    assert!(dir.path().join("posterior_spatial_04.csv").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn infer_with_tiny_beta_is_near_the_prior() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(
        "infer",
        &["--stimulus", "spatial_04", "--beta", "0.0001"],
        dir.path(),
    );
    assert!(output.status.success());
    let posterior = parse_posterior(&stdout(&output));
    // Prior from costs (2, 3, 5): (0.4839, 0.3226, 0.1935).
    assert!((posterior["gold"] - 0.4839).abs() < 0.01, "{posterior:?}");
    assert!((posterior["silver"] - 0.3226).abs() < 0.01);
    assert!((posterior["bronze"] - 0.1935).abs() < 0.01);
}

#[test]
fn infer_on_a_raw_scenario_record_works() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(
        "infer",
        &["--scenario", "fixtures/colordiff_01/scenario.json"],
        dir.path(),
    );
    assert!(output.status.success(), "{output:?}");
    let posterior = parse_posterior(&stdout(&output));
    assert!(posterior["bronze"] > 0.9);
}

#[test]
fn missing_fixture_exits_with_the_transport_code() {
    let dir = tempfile::tempdir().unwrap();
    let root = repo_root();
    let output = Command::new(env!("CARGO_BIN_EXE_invplan"))
        .current_dir(&root)
        .args([
            "infer",
            "--corpus",
            "data/corpus.json",
            "--fixtures",
            "/nonexistent-fixtures",
            "--stimulus",
            "spatial_04",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4), "{output:?}");
}

#[test]
fn unknown_stimulus_exits_with_the_schema_code() {
    let dir = tempfile::tempdir().unwrap();
    let output = run("infer", &["--stimulus", "nope_99"], dir.path());
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    let output = Command::new(env!("CARGO_BIN_EXE_invplan"))
        .arg("--definitely-not-a-flag")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn eval_is_byte_deterministic_for_a_fixed_seed() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let output = run(
            "eval",
            &[
                "--human",
                "data/human_synthetic.csv",
                "--bootstrap-samples",
                "1000",
                "--seed",
                "7",
            ],
            dir.path(),
        );
        assert!(output.status.success(), "{output:?}");
    }
    for file in [
        "report_overall.json",
        "report_spatial.json",
        "scatter_overall.csv",
        "model_values.csv",
    ] {
        let a = std::fs::read(dir_a.path().join(file)).unwrap();
        let b = std::fs::read(dir_b.path().join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn eval_writes_overall_plus_four_variant_reports() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(
        "eval",
        &["--human", "data/human_synthetic.csv", "--bootstrap-samples", "200"],
        dir.path(),
    );
    assert!(output.status.success());
    for scope in ["overall", "generic", "color_same", "color_different", "spatial"] {
        assert!(dir.path().join(format!("report_{scope}.json")).exists());
    }
}

#[test]
fn baseline_fixture_transcripts_reproduce_the_reference_means() {
    let dir = tempfile::tempdir().unwrap();
    let output = run("baseline", &["--samples", "20"], dir.path());
    assert!(output.status.success(), "{output:?}");
    let means = std::fs::read_to_string(dir.path().join("baseline_means.csv")).unwrap();
    assert!(means.contains("colordiff_01,gold,6"));
    assert!(means.contains("colordiff_01,silver,6"));
    assert!(means.contains("colordiff_01,bronze,1"));
}

#[test]
fn plan_length_matches_the_optimal_cost() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(
        "plan",
        &["--stimulus", "spatial_04", "--goal", "bronze"],
        dir.path(),
    );
    assert!(output.status.success());
    let text = stdout(&output);
    let moves: Vec<&str> = text.lines().filter(|l| l.starts_with("move ")).collect();
    assert_eq!(moves.len(), 5, "bronze is 5 steps south:\n{text}");
    assert!(text.contains("total cost: 5"));
}

#[test]
fn planning_to_an_unreachable_trophy_reports_it_informationally() {
    let dir = tempfile::tempdir().unwrap();
    // colorsame_04: the bronze room has a blue lock and no blue key exists.
    let output = run(
        "plan",
        &["--stimulus", "colorsame_04", "--goal", "bronze"],
        dir.path(),
    );
    assert!(output.status.success(), "informational, exit 0");
    assert!(stdout(&output).contains("UNREACHABLE"));
}

#[test]
fn sample_map_places_trophies_at_the_constrained_offsets() {
    let dir = tempfile::tempdir().unwrap();
    let output = run("sample-map", &["--stimulus", "spatial_04"], dir.path());
    assert!(output.status.success());
    let grid: Vec<Vec<char>> = stdout(&output)
        .lines()
        .map(|l| l.chars().collect())
        .collect();
    let find = |c: char| -> (i16, i16) {
        for (y, row) in grid.iter().enumerate() {
            for (x, cell) in row.iter().enumerate() {
                if *cell == c {
                    return (x as i16, y as i16);
                }
            }
        }
        panic!("{c} not on the map");
    };
    let a = find('A');
    assert_eq!(find('G'), (a.0 + 2, a.1), "gold 2 east");
    assert_eq!(find('S'), (a.0, a.1 + 3), "silver 3 south");
    assert_eq!(find('B'), (a.0, a.1 + 5), "bronze 5 south");
}

#[test]
fn help_documents_the_documented_flags() {
    let check = |sub: &str, flags: &[&str]| {
        let output = Command::new(env!("CARGO_BIN_EXE_invplan"))
            .args([sub, "--help"])
            .output()
            .unwrap();
        let text = String::from_utf8_lossy(&output.stdout).to_string();
        for flag in flags {
            assert!(text.contains(flag), "{sub} --help lacks {flag}:\n{text}");
        }
    };
    let common = [
        "--beta",
        "--epsilon-floor",
        "--seed",
        "--fixtures",
        "--live",
        "--llm-model",
        "--temperature",
        "--max-rejections",
        "--out",
    ];
    check("infer", &common);
    check("eval", &[&common[..], &["--bootstrap-samples", "--human"]].concat());
    check("baseline", &[&common[..], &["--samples"]].concat());
    check("plan", &[&common[..], &["--goal"]].concat());
    check("sample-map", &common);
}

#[test]
fn reruns_with_identical_inputs_reproduce_posterior_bytes() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let output = run(
            "infer",
            &["--stimulus", "colordiff_02", "--seed", "11"],
            dir.path(),
        );
        assert!(output.status.success());
    }
    let a = std::fs::read(dir_a.path().join("posterior_colordiff_02.json")).unwrap();
    let b = std::fs::read(dir_b.path().join("posterior_colordiff_02.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn live_mode_without_credentials_exits_with_the_transport_code() {
    let dir = tempfile::tempdir().unwrap();
    let root = repo_root();
    let output = Command::new(env!("CARGO_BIN_EXE_invplan"))
        .current_dir(&root)
        .env_remove("INVPLAN_API_KEY")
        .env_remove("OPENAI_API_KEY")
        .args([
            "baseline",
            "--corpus",
            "data/corpus.json",
            "--live",
            "--samples",
            "1",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4), "{output:?}");
}

#[test]
fn eval_supports_participant_exclusion_preprocessing() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(
        "eval",
        &[
            "--human",
            "data/human_synthetic.csv",
            "--bootstrap-samples",
            "100",
            "--exclude-below",
            "0.3",
        ],
        dir.path(),
    );
    assert!(output.status.success(), "{output:?}");
}

#[test]
fn human_data_missing_a_variant_stubs_that_report_only() {
    let root = repo_root();
    let full = std::fs::read_to_string(root.join("data/human_synthetic.csv")).unwrap();
    let filtered: String = full
        .lines()
        .filter(|l| !l.contains(",spatial_"))
        .collect::<Vec<_>>()
        .join("\n");
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("partial.csv");
    std::fs::write(&csv_path, filtered).unwrap();

    let out_dir = tempfile::tempdir().unwrap();
    let output = run(
        "eval",
        &[
            "--human",
            csv_path.to_str().unwrap(),
            "--bootstrap-samples",
            "100",
        ],
        out_dir.path(),
    );
    assert!(output.status.success(), "{output:?}");
    let spatial = std::fs::read_to_string(out_dir.path().join("report_spatial.json")).unwrap();
    assert!(spatial.contains("insufficient"), "{spatial}");
    let overall = std::fs::read_to_string(out_dir.path().join("report_overall.json")).unwrap();
    assert!(overall.contains("pearson_r"));
}
